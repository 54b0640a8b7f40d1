//! Batch orchestration: description in, trajectory dataset out.
//!
//! Every job writes its artifacts under its own zero-padded directory, so
//! jobs never touch each other's files and can run in parallel.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use crate::dataset::{self, DatasetError, TrajectoryDataset};
use crate::filter::{check_relevance, filter_description, Relevance, ScenarioDescription};
use crate::lexicon::Lexicon;
use crate::llm::Backend;
use crate::prompt::{assemble_prompt, select_exemplars, ExemplarSet};
use crate::schema::{categorize, serialize_config, ActorClass, ScenarioConfig};
use crate::sim::{self, SimError};
use crate::validator::validate_pipeline;

pub const FILTERED_FILE: &str = "filtered.txt";
pub const PROMPT_FILE: &str = "prompt.txt";
pub const RESPONSE_FILE: &str = "response.txt";
pub const REPORT_FILE: &str = "report.txt";
pub const CONFIG_FILE: &str = "config.scn";
pub const TRACE_FILE: &str = "trace.traj";
pub const DATA_FILE: &str = "data.traj";
pub const SUMMARY_FILE: &str = "summary.txt";
pub const MERGED_FILE: &str = "merged.traj";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("cannot build worker pool: {0}")]
    Pool(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Splits a descriptions file into blocks separated by `---` lines.
pub fn read_descriptions(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur: Vec<&str> = Vec::new();
    for line in text.lines().chain(std::iter::once("---")) {
        if line.trim() == "---" {
            let block = cur.join("\n").trim().to_string();
            if !block.is_empty() {
                out.push(block);
            }
            cur.clear();
        } else {
            cur.push(line);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum JobStatus {
    Rejected(String),
    GenerationFailed(String),
    ValidationFailed(String),
    SimulationFailed(String),
    Simulated,
}

impl JobStatus {
    pub fn label(&self) -> &'static str {
        match self {
            JobStatus::Rejected(_) => "rejected",
            JobStatus::GenerationFailed(_) => "generation_failed",
            JobStatus::ValidationFailed(_) => "validation_failed",
            JobStatus::SimulationFailed(_) => "simulation_failed",
            JobStatus::Simulated => "simulated",
        }
    }

    pub fn detail(&self) -> Option<&str> {
        match self {
            JobStatus::Rejected(d)
            | JobStatus::GenerationFailed(d)
            | JobStatus::ValidationFailed(d)
            | JobStatus::SimulationFailed(d) => Some(d),
            JobStatus::Simulated => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineJob {
    pub scenario_index: usize,
    pub description: String,
    pub status: JobStatus,
    pub dir: PathBuf,
    /// Artifacts written, in stage order.
    pub artifacts: Vec<PathBuf>,
    pub config: Option<ScenarioConfig>,
}

pub struct PipelineContext<'a> {
    pub lexicon: &'a Lexicon,
    pub exemplars: &'a ExemplarSet,
    pub backend: &'a dyn Backend,
    pub instruction: &'a str,
}

#[derive(Debug, Clone)]
pub struct PipelineOptions {
    pub out_dir: PathBuf,
    pub shots: usize,
    pub parallel: usize,
    /// Only jobs carrying this tag go into the merged dataset.
    pub filter_tag: Option<String>,
}

impl PipelineOptions {
    pub fn new(out_dir: impl Into<PathBuf>) -> Self {
        Self {
            out_dir: out_dir.into(),
            shots: 2,
            parallel: 4,
            filter_tag: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchSummary {
    pub jobs: Vec<PipelineJob>,
    pub merged: Option<PathBuf>,
}

impl BatchSummary {
    pub fn count(&self, label: &str) -> usize {
        self.jobs.iter().filter(|j| j.status.label() == label).count()
    }

    pub fn simulated(&self) -> usize {
        self.count("simulated")
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for j in &self.jobs {
            let _ = write!(out, "{:>5} {:<18}", j.scenario_index, j.status.label());
            if let Some(d) = j.status.detail() {
                let _ = write!(out, " {d}");
            }
            out.push('\n');
        }
        for label in ["simulated", "rejected", "generation_failed", "validation_failed", "simulation_failed"] {
            let _ = writeln!(out, "{label}={}", self.count(label));
        }
        let _ = writeln!(out, "total={}", self.jobs.len());
        out
    }
}

pub fn job_dir_name(index: usize, total: usize) -> String {
    let width = total.saturating_sub(1).to_string().len().max(3);
    format!("{index:0width$}")
}

struct JobWriter {
    dir: PathBuf,
    artifacts: Vec<PathBuf>,
}

impl JobWriter {
    fn write(&mut self, name: &str, contents: &str) -> Result<(), PipelineError> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(io_err(&path))?;
        self.artifacts.push(path);
        Ok(())
    }
}

/// Runs one description through every stage, persisting each artifact.
pub fn run_job(
    index: usize,
    dir: PathBuf,
    description: &str,
    ctx: &PipelineContext<'_>,
    shots: usize,
) -> Result<PipelineJob, PipelineError> {
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let mut w = JobWriter {
        dir: dir.clone(),
        artifacts: Vec::new(),
    };
    let mut job = PipelineJob {
        scenario_index: index,
        description: description.to_string(),
        status: JobStatus::Simulated,
        dir,
        artifacts: Vec::new(),
        config: None,
    };
    let finish = |mut job: PipelineJob, w: JobWriter, status: JobStatus| {
        job.status = status;
        job.artifacts = w.artifacts;
        Ok(job)
    };

    let desc = ScenarioDescription::new(description);
    if let Relevance::Reject(reason) = check_relevance(&desc, ctx.lexicon) {
        w.write(REPORT_FILE, &format!("status=rejected\nreason={reason}\n"))?;
        return finish(job, w, JobStatus::Rejected(reason.to_string()));
    }
    let filtered = filter_description(&desc, ctx.lexicon);
    w.write(FILTERED_FILE, &filtered.text)?;

    let k = shots.min(ctx.exemplars.len());
    let picked = select_exemplars(ctx.exemplars, &filtered, k).expect("k is clamped to the set size");
    let prompt = assemble_prompt(&filtered, &picked, ctx.instruction);
    w.write(PROMPT_FILE, &prompt.text)?;

    let response = match ctx.backend.generate(&prompt) {
        Ok(r) => r,
        Err(e) => {
            w.write(REPORT_FILE, &format!("status=generation_failed\nerror={e}\n"))?;
            return finish(job, w, JobStatus::GenerationFailed(e.to_string()));
        }
    };
    w.write(RESPONSE_FILE, &response.text)?;

    let (mut cfg, report) = match validate_pipeline(&response, ctx.lexicon) {
        Ok(v) => v,
        Err(e) => {
            w.write(REPORT_FILE, &format!("status=validation_failed\nerror={e}\n"))?;
            return finish(job, w, JobStatus::ValidationFailed(e.to_string()));
        }
    };
    w.write(REPORT_FILE, &report.render())?;

    let mut tags = cfg.tags.clone();
    tags.extend(categorize(&filtered, &cfg));
    tags.sort();
    tags.dedup();
    cfg.tags = tags;
    w.write(CONFIG_FILE, &serialize_config(&cfg))?;
    job.config = Some(cfg.clone());

    let trace = match sim::run(&cfg) {
        Ok(t) => t,
        Err(e) => return finish(job, w, JobStatus::SimulationFailed(e.to_string())),
    };
    let trace_path = w.dir.join(TRACE_FILE);
    dataset::write_trace(&trace, &trace_path)?;
    w.artifacts.push(trace_path);
    let data = dataset::collect(&trace, &[]);
    let data_path = w.dir.join(DATA_FILE);
    dataset::write(&data, &data_path)?;
    w.artifacts.push(data_path);
    finish(job, w, JobStatus::Simulated)
}

fn pool(parallel: usize) -> Result<rayon::ThreadPool, PipelineError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(parallel.max(1))
        .build()
        .map_err(|e| PipelineError::Pool(e.to_string()))
}

/// Runs every description, then writes `summary.txt` and, when any job
/// simulated, `merged.traj` from the simulated jobs (tag-filtered if asked).
pub fn pipeline(
    descriptions: &[String],
    ctx: &PipelineContext<'_>,
    opts: &PipelineOptions,
) -> Result<BatchSummary, PipelineError> {
    fs::create_dir_all(&opts.out_dir).map_err(io_err(&opts.out_dir))?;
    let total = descriptions.len();
    let jobs: Vec<PipelineJob> = pool(opts.parallel)?.install(|| {
        descriptions
            .par_iter()
            .enumerate()
            .map(|(i, d)| run_job(i, opts.out_dir.join(job_dir_name(i, total)), d, ctx, opts.shots))
            .collect::<Result<_, _>>()
    })?;

    let mut merged: Option<TrajectoryDataset> = None;
    for job in &jobs {
        let Some(cfg) = &job.config else { continue };
        if job.status != JobStatus::Simulated {
            continue;
        }
        if let Some(tag) = &opts.filter_tag {
            if !cfg.tags.contains(tag) {
                continue;
            }
        }
        let ds = dataset::read(job.dir.join(DATA_FILE))?;
        merged = Some(match merged {
            Some(m) => dataset::merge(&m, &ds),
            None => ds,
        });
    }
    let merged_path = match merged {
        Some(m) => {
            let p = opts.out_dir.join(MERGED_FILE);
            dataset::write(&m, &p)?;
            Some(p)
        }
        None => None,
    };
    let summary = BatchSummary {
        jobs,
        merged: merged_path,
    };
    let path = opts.out_dir.join(SUMMARY_FILE);
    fs::write(&path, summary.render()).map_err(io_err(&path))?;
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variation {
    pub vehicles: u32,
    pub pedestrians: u32,
    pub seed: u64,
    pub name: String,
    pub result: Result<TrajectoryDataset, SimError>,
}

/// Simulates `cfg` once per (vehicles, pedestrians) count pair and seed.
/// Failures stay local to their tuple.
pub fn run_variations(cfg: &ScenarioConfig, counts: &[(u32, u32)], seeds: &[u64]) -> Vec<Variation> {
    let tuples: Vec<(u32, u32, u64)> = counts
        .iter()
        .flat_map(|&(v, p)| seeds.iter().map(move |&s| (v, p, s)))
        .collect();
    tuples
        .par_iter()
        .map(|&(vehicles, pedestrians, seed)| {
            let mut c = cfg.clone();
            c.seed = seed;
            for (class, n) in [(ActorClass::Vehicle, vehicles), (ActorClass::Pedestrian, pedestrians)] {
                match c.group_mut(class) {
                    Some(g) => g.count = n,
                    None => c.set_group(crate::schema::ActorGroup::new(class, n)),
                }
            }
            c.name = format!("{}_v{vehicles}_p{pedestrians}_s{seed}", cfg.name);
            let result = sim::run(&c).map(|t| dataset::collect(&t, &[]));
            Variation {
                vehicles,
                pedestrians,
                seed,
                name: c.name,
                result,
            }
        })
        .collect()
}
