//! Displacement-error metrics and a constant-velocity baseline.

use std::fmt::Write as _;

use thiserror::Error;

use crate::dataset::TrajectoryDataset;
use crate::schema::ActorClass;

pub const DEFAULT_OBSERVE: usize = 6;
pub const DEFAULT_PREDICT: usize = 6;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("no class is present in the task")]
    NoClassPresent,
    #[error("weights must be finite and non-negative with a positive sum over present classes")]
    BadWeights,
    #[error("observe length must be at least 2 and predict length at least 1")]
    BadHorizon,
}

pub type Vec3 = [f64; 3];

#[derive(Debug, Clone, PartialEq)]
pub struct PredictionPair {
    pub agent_id: u64,
    pub class: ActorClass,
    pub observed: Vec<Vec3>,
    pub truth: Vec<Vec3>,
    pub predicted: Vec<Vec3>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictionTask {
    pub observe_len: usize,
    pub predict_len: usize,
    pub pairs: Vec<PredictionPair>,
}

fn distance(a: Vec3, b: Vec3) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Cuts each agent's runs of consecutive frames into non-overlapping windows
/// of `observe_len + predict_len` and extrapolates the last observed
/// per-frame velocity across the prediction horizon.
pub fn constant_velocity_predict(
    ds: &TrajectoryDataset,
    observe_len: usize,
    predict_len: usize,
) -> Result<PredictionTask, MetricsError> {
    if observe_len < 2 || predict_len < 1 {
        return Err(MetricsError::BadHorizon);
    }
    let window = observe_len + predict_len;
    let mut pairs = Vec::new();
    for (agent_id, recs) in ds.trajectories() {
        let mut start = 0;
        while start < recs.len() {
            let mut end = start + 1;
            while end < recs.len() && recs[end].frame_index == recs[end - 1].frame_index + 1 {
                end += 1;
            }
            let run = &recs[start..end];
            for chunk in run.chunks_exact(window) {
                let pos: Vec<Vec3> = chunk.iter().map(|r| r.position()).collect();
                let (observed, truth) = pos.split_at(observe_len);
                let last = observed[observe_len - 1];
                let prev = observed[observe_len - 2];
                let v = [last[0] - prev[0], last[1] - prev[1], last[2] - prev[2]];
                let predicted = (1..=predict_len)
                    .map(|k| {
                        let k = k as f64;
                        [last[0] + k * v[0], last[1] + k * v[1], last[2] + k * v[2]]
                    })
                    .collect();
                pairs.push(PredictionPair {
                    agent_id,
                    class: chunk[0].class,
                    observed: observed.to_vec(),
                    truth: truth.to_vec(),
                    predicted,
                });
            }
            start = end;
        }
    }
    Ok(PredictionTask {
        observe_len,
        predict_len,
        pairs,
    })
}

fn pairs_of(task: &PredictionTask, class: Option<ActorClass>) -> impl Iterator<Item = &PredictionPair> {
    task.pairs.iter().filter(move |p| class.is_none_or(|c| p.class == c))
}

/// Mean distance over every predicted frame of every matching pair.
pub fn ade(task: &PredictionTask, class: Option<ActorClass>) -> Option<f64> {
    let (mut sum, mut n) = (0.0, 0usize);
    for p in pairs_of(task, class) {
        for (a, b) in p.predicted.iter().zip(&p.truth) {
            sum += distance(*a, *b);
            n += 1;
        }
    }
    (n > 0).then(|| sum / n as f64)
}

/// Mean final-frame distance over matching pairs.
pub fn fde(task: &PredictionTask, class: Option<ActorClass>) -> Option<f64> {
    let (mut sum, mut n) = (0.0, 0usize);
    for p in pairs_of(task, class) {
        if let (Some(a), Some(b)) = (p.predicted.last(), p.truth.last()) {
            sum += distance(*a, *b);
            n += 1;
        }
    }
    (n > 0).then(|| sum / n as f64)
}

/// Per-class weights in (vehicle, pedestrian, bicycle) order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassWeights(pub [f64; 3]);

impl ClassWeights {
    pub const EQUAL: Self = Self([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]);
    /// Weighted preset for comparison with published aggregate columns.
    pub const WEIGHTED: Self = Self([0.20, 0.58, 0.22]);

    pub fn get(&self, class: ActorClass) -> f64 {
        self.0[class_index(class)]
    }
}

impl std::str::FromStr for ClassWeights {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "equal" => return Ok(Self::EQUAL),
            "weighted" => return Ok(Self::WEIGHTED),
            _ => {}
        }
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|_| format!("bad weight `{p}`")))
            .collect::<Result<_, _>>()?;
        match parts.as_slice() {
            [v, p, b] if parts.iter().all(|w| w.is_finite() && *w >= 0.0) => Ok(Self([*v, *p, *b])),
            _ => Err("weights must be three non-negative numbers wv,wp,wb".to_string()),
        }
    }
}

fn class_index(class: ActorClass) -> usize {
    match class {
        ActorClass::Vehicle => 0,
        ActorClass::Pedestrian => 1,
        ActorClass::Bicycle => 2,
    }
}

const CLASSES: [ActorClass; 3] = [ActorClass::Vehicle, ActorClass::Pedestrian, ActorClass::Bicycle];

/// Per-class errors in (vehicle, pedestrian, bicycle) order; `None` marks an absent class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerClass {
    pub ade: [Option<f64>; 3],
    pub fde: [Option<f64>; 3],
}

impl PerClass {
    pub fn from_task(task: &PredictionTask) -> Self {
        Self {
            ade: CLASSES.map(|c| ade(task, Some(c))),
            fde: CLASSES.map(|c| fde(task, Some(c))),
        }
    }
}

/// Weighted means of the present classes, weights renormalized over them.
pub fn aggregate(per_class: &PerClass, weights: ClassWeights) -> Result<(f64, f64), MetricsError> {
    if weights.0.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(MetricsError::BadWeights);
    }
    let present: Vec<usize> = (0..3).filter(|&i| per_class.ade[i].is_some()).collect();
    if present.is_empty() {
        return Err(MetricsError::NoClassPresent);
    }
    let total: f64 = present.iter().map(|&i| weights.0[i]).sum();
    if total <= 0.0 {
        return Err(MetricsError::BadWeights);
    }
    let mut tae = 0.0;
    let mut tfe = 0.0;
    for &i in &present {
        let w = weights.0[i] / total;
        tae += w * per_class.ade[i].unwrap();
        tfe += w * per_class.fde[i].unwrap_or(0.0);
    }
    Ok((tae, tfe))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub ade_v: Option<f64>,
    pub ade_p: Option<f64>,
    pub ade_b: Option<f64>,
    pub fde_v: Option<f64>,
    pub fde_p: Option<f64>,
    pub fde_b: Option<f64>,
    pub tae: f64,
    pub tfe: f64,
    pub class_weights: ClassWeights,
    pub pairs: usize,
}

pub fn evaluate(task: &PredictionTask, weights: ClassWeights) -> Result<MetricsReport, MetricsError> {
    let pc = PerClass::from_task(task);
    let (tae, tfe) = aggregate(&pc, weights)?;
    Ok(MetricsReport {
        ade_v: pc.ade[0],
        ade_p: pc.ade[1],
        ade_b: pc.ade[2],
        fde_v: pc.fde[0],
        fde_p: pc.fde[1],
        fde_b: pc.fde[2],
        tae,
        tfe,
        class_weights: weights,
        pairs: task.pairs.len(),
    })
}

impl MetricsReport {
    /// Aligned table followed by `key=value` lines; absent classes print `-`.
    pub fn render(&self) -> String {
        let f = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.6}"));
        let cols = [
            ("TAE", Some(self.tae)),
            ("ADEv", self.ade_v),
            ("ADEp", self.ade_p),
            ("ADEb", self.ade_b),
            ("TFE", Some(self.tfe)),
            ("FDEv", self.fde_v),
            ("FDEp", self.fde_p),
            ("FDEb", self.fde_b),
        ];
        let mut out = String::new();
        for (name, _) in &cols {
            let _ = write!(out, "{name:>10}");
        }
        out.push('\n');
        for (_, v) in &cols {
            let _ = write!(out, "{:>10}", f(*v));
        }
        out.push('\n');
        for (name, v) in &cols {
            let _ = writeln!(out, "{}={}", name.to_lowercase(), v.map_or("-".to_string(), |x| x.to_string()));
        }
        let w = self.class_weights.0;
        let _ = writeln!(out, "weights={},{},{}", w[0], w[1], w[2]);
        let _ = writeln!(out, "pairs={}", self.pairs);
        out
    }
}
