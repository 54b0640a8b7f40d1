//! Trajectory records, the `.traj` file format, imports, merge/split and statistics.
//!
//! A `.traj` file is UTF-8 text. The first line is `# scenegen-traj v1`.
//! Metadata lines follow (`# source <count> <name>`, `# tags <t>...`, and
//! for traces `# collision <frame> <a> <b>`), then one record per line with
//! eight space-separated columns:
//!
//! ```text
//! frame_index agent_id class_code x y z heading speed
//! ```
//!
//! Floats are written in shortest round-trip form, so reading a written
//! file reproduces it exactly.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::{self, Write as _};
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use thiserror::Error;

use crate::rng::SplitMix64;
use crate::schema::ActorClass;
use crate::sim::{Collision, SimulationTrace};

pub const HEADER: &str = "# scenegen-traj v1";
/// Frame spacing assumed for apolloscapes-like imports.
pub const APOLLO_FRAME_DT: f64 = 0.5;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("line {line}: unknown object type `{token}`")]
    UnknownClass { line: usize, token: String },
    #[error("line {line}: frames of agent {agent} are not increasing")]
    NonMonotone { line: usize, agent: u64 },
    #[error("duplicate record for frame {frame}, agent {agent}")]
    DuplicateKey { frame: u64, agent: u64 },
    #[error("agent {agent} changes class")]
    ClassChange { agent: u64 },
    #[error("split needs at least 2 agents, found {0}")]
    TooFewAgents(usize),
    #[error("train fraction {0} outside (0, 1)")]
    InvalidFraction(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRecord {
    pub frame_index: u64,
    pub agent_id: u64,
    pub class: ActorClass,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub heading: f64,
    pub speed: f64,
}

impl TrajectoryRecord {
    pub fn key(&self) -> (u64, u64) {
        (self.frame_index, self.agent_id)
    }

    pub fn position(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl fmt::Display for TrajectoryRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {} {} {} {} {} {}",
            self.frame_index,
            self.agent_id,
            self.class.code(),
            self.x,
            self.y,
            self.z,
            self.heading,
            self.speed
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrajectoryDataset {
    records: Vec<TrajectoryRecord>,
    /// (source name, record count) per contributing source.
    pub provenance: Vec<(String, usize)>,
    pub tags: Vec<String>,
}

impl TrajectoryDataset {
    /// Sorts the records and checks key uniqueness and per-agent class.
    pub fn new(
        mut records: Vec<TrajectoryRecord>,
        provenance: Vec<(String, usize)>,
        tags: Vec<String>,
    ) -> Result<Self, DatasetError> {
        records.sort_by_key(|r| r.key());
        let mut class_of: HashMap<u64, ActorClass> = HashMap::new();
        for (i, r) in records.iter().enumerate() {
            if i > 0 && records[i - 1].key() == r.key() {
                return Err(DatasetError::DuplicateKey {
                    frame: r.frame_index,
                    agent: r.agent_id,
                });
            }
            if *class_of.entry(r.agent_id).or_insert(r.class) != r.class {
                return Err(DatasetError::ClassChange { agent: r.agent_id });
            }
        }
        let tags: BTreeSet<String> = tags.into_iter().collect();
        Ok(Self {
            records,
            provenance,
            tags: tags.into_iter().collect(),
        })
    }

    pub fn records(&self) -> &[TrajectoryRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn agent_ids(&self) -> BTreeSet<u64> {
        self.records.iter().map(|r| r.agent_id).collect()
    }

    /// Records of each agent in frame order.
    pub fn trajectories(&self) -> BTreeMap<u64, Vec<TrajectoryRecord>> {
        let mut out: BTreeMap<u64, Vec<TrajectoryRecord>> = BTreeMap::new();
        for r in &self.records {
            out.entry(r.agent_id).or_default().push(*r);
        }
        out
    }

    fn keep_agents(&self, agents: &BTreeSet<u64>) -> Self {
        Self {
            records: self.records.iter().filter(|r| agents.contains(&r.agent_id)).copied().collect(),
            provenance: self.provenance.clone(),
            tags: self.tags.clone(),
        }
    }
}

/// One record per (frame, agent) of the trace.
pub fn collect(trace: &SimulationTrace, tags: &[String]) -> TrajectoryDataset {
    let mut records = Vec::new();
    for frame in &trace.frames {
        for a in &frame.agents {
            records.push(TrajectoryRecord {
                frame_index: frame.index as u64,
                agent_id: a.agent_id as u64,
                class: a.class,
                x: a.position[0],
                y: a.position[1],
                z: a.position[2],
                heading: a.heading,
                speed: a.speed,
            });
        }
    }
    let count = records.len();
    let tags = trace.config.tags.iter().chain(tags).cloned().collect();
    TrajectoryDataset::new(records, vec![(trace.config.name.clone(), count)], tags)
        .expect("simulator traces have unique keys and fixed classes")
}

fn render(ds: &TrajectoryDataset, collisions: &[Collision]) -> String {
    let mut out = String::with_capacity(ds.len() * 48 + 64);
    out.push_str(HEADER);
    out.push('\n');
    for (name, count) in &ds.provenance {
        let _ = writeln!(out, "# source {count} {name}");
    }
    if !ds.tags.is_empty() {
        let _ = writeln!(out, "# tags {}", ds.tags.join(" "));
    }
    for c in collisions {
        let _ = writeln!(out, "# collision {} {} {}", c.frame, c.a, c.b);
    }
    for r in &ds.records {
        let _ = writeln!(out, "{r}");
    }
    out
}

pub fn to_string(ds: &TrajectoryDataset) -> String {
    render(ds, &[])
}

fn write_text(text: &str, path: &Path) -> Result<(), DatasetError> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    w.write_all(text.as_bytes())?;
    w.flush()?;
    Ok(())
}

pub fn write(ds: &TrajectoryDataset, path: impl AsRef<Path>) -> Result<(), DatasetError> {
    write_text(&to_string(ds), path.as_ref())
}

/// Writes the collected trace records plus its collision events.
pub fn write_trace(trace: &SimulationTrace, path: impl AsRef<Path>) -> Result<(), DatasetError> {
    write_text(&render(&collect(trace, &[]), &trace.collisions), path.as_ref())
}

fn format_err(line: usize, message: impl Into<String>) -> DatasetError {
    DatasetError::Format {
        line,
        message: message.into(),
    }
}

fn parse_num<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<T, DatasetError> {
    tok.parse()
        .map_err(|_| format_err(line, format!("bad {what} `{tok}`")))
}

/// Parses `.traj` text, returning the dataset and any collision lines.
pub fn parse_with_collisions(text: &str) -> Result<(TrajectoryDataset, Vec<Collision>), DatasetError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, l)) if l.trim_end() == HEADER => {}
        _ => return Err(format_err(1, format!("missing `{HEADER}` header"))),
    }
    let mut records = Vec::new();
    let mut provenance = Vec::new();
    let mut tags = Vec::new();
    let mut collisions = Vec::new();
    for (i, raw) in lines {
        let n = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(meta) = line.strip_prefix('#') {
            let mut parts = meta.split_whitespace();
            match parts.next() {
                Some("source") => {
                    let count = parse_num(parts.next().unwrap_or(""), n, "source count")?;
                    let name = meta.trim_start()["source".len()..].trim_start();
                    let name = name[name.find(char::is_whitespace).unwrap_or(name.len())..].trim();
                    provenance.push((name.to_string(), count));
                }
                Some("tags") => tags.extend(parts.map(str::to_string)),
                Some("collision") => {
                    let v: Vec<&str> = parts.collect();
                    if v.len() != 3 {
                        return Err(format_err(n, "collision line needs frame and two agent ids"));
                    }
                    collisions.push(Collision {
                        frame: parse_num(v[0], n, "frame")?,
                        a: parse_num(v[1], n, "agent id")?,
                        b: parse_num(v[2], n, "agent id")?,
                    });
                }
                _ => {}
            }
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 8 {
            return Err(format_err(n, format!("expected 8 columns, found {}", cols.len())));
        }
        let code: u8 = parse_num(cols[2], n, "class code")?;
        let class = ActorClass::from_code(code).ok_or_else(|| format_err(n, format!("unknown class code {code}")))?;
        records.push(TrajectoryRecord {
            frame_index: parse_num(cols[0], n, "frame index")?,
            agent_id: parse_num(cols[1], n, "agent id")?,
            class,
            x: parse_num(cols[3], n, "x")?,
            y: parse_num(cols[4], n, "y")?,
            z: parse_num(cols[5], n, "z")?,
            heading: parse_num(cols[6], n, "heading")?,
            speed: parse_num(cols[7], n, "speed")?,
        });
    }
    Ok((TrajectoryDataset::new(records, provenance, tags)?, collisions))
}

pub fn parse(text: &str) -> Result<TrajectoryDataset, DatasetError> {
    parse_with_collisions(text).map(|(ds, _)| ds)
}

pub fn read(path: impl AsRef<Path>) -> Result<TrajectoryDataset, DatasetError> {
    parse(&fs::read_to_string(path)?)
}

pub fn read_with_collisions(path: impl AsRef<Path>) -> Result<(TrajectoryDataset, Vec<Collision>), DatasetError> {
    parse_with_collisions(&fs::read_to_string(path)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImportFormat {
    /// Whitespace-separated `frame_id object_id object_type x y z heading`.
    Apolloscapes,
    /// CSV `vehicle_id, frame_id, x, y, speed`, optional header row.
    Ngsim,
}

impl std::str::FromStr for ImportFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "apolloscapes" => Ok(Self::Apolloscapes),
            "ngsim" => Ok(Self::Ngsim),
            other => Err(format!("unknown import format `{other}` (expected apolloscapes or ngsim)")),
        }
    }
}

fn apollo_class(token: &str) -> Option<ActorClass> {
    match token {
        "1" | "2" => Some(ActorClass::Vehicle),
        "3" => Some(ActorClass::Pedestrian),
        "4" => Some(ActorClass::Bicycle),
        _ => None,
    }
}

/// Checks frames increase per agent, reporting the offending input line.
fn check_monotone(rows: &[(usize, u64, u64)]) -> Result<(), DatasetError> {
    let mut last: HashMap<u64, u64> = HashMap::new();
    for &(line, agent, frame) in rows {
        if let Some(&prev) = last.get(&agent) {
            if frame <= prev {
                return Err(DatasetError::NonMonotone { line, agent });
            }
        }
        last.insert(agent, frame);
    }
    Ok(())
}

/// Apolloscapes-like text with speed from the 3-D finite difference of
/// consecutive positions; an agent's first record has speed 0.
pub fn import_apolloscapes(text: &str, name: &str, frame_dt: f64) -> Result<TrajectoryDataset, DatasetError> {
    let mut records = Vec::new();
    let mut rows = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 7 {
            return Err(format_err(n, format!("expected 7 columns, found {}", cols.len())));
        }
        let class = apollo_class(cols[2]).ok_or_else(|| DatasetError::UnknownClass {
            line: n,
            token: cols[2].to_string(),
        })?;
        let r = TrajectoryRecord {
            frame_index: parse_num(cols[0], n, "frame id")?,
            agent_id: parse_num(cols[1], n, "object id")?,
            class,
            x: parse_num(cols[3], n, "x")?,
            y: parse_num(cols[4], n, "y")?,
            z: parse_num(cols[5], n, "z")?,
            heading: parse_num(cols[6], n, "heading")?,
            speed: 0.0,
        };
        rows.push((n, r.agent_id, r.frame_index));
        records.push(r);
    }
    check_monotone(&rows)?;
    let mut prev: HashMap<u64, TrajectoryRecord> = HashMap::new();
    for r in &mut records {
        if let Some(p) = prev.get(&r.agent_id) {
            let dt = (r.frame_index - p.frame_index) as f64 * frame_dt;
            let d = ((r.x - p.x).powi(2) + (r.y - p.y).powi(2) + (r.z - p.z).powi(2)).sqrt();
            r.speed = d / dt;
        }
        prev.insert(r.agent_id, *r);
    }
    let count = records.len();
    TrajectoryDataset::new(records, vec![(name.to_string(), count)], Vec::new())
}

/// NGSIM-like CSV; every row is a vehicle on the ground plane, heading
/// from the displacement to the next sample (or from the previous one for
/// an agent's last sample, 0 for a single sample).
pub fn import_ngsim(text: &str, name: &str) -> Result<TrajectoryDataset, DatasetError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows: Vec<(usize, u64, u64, f64, f64, f64)> = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| format_err(i + 1, e.to_string()))?;
        let n = rec.position().map_or(i + 1, |p| p.line() as usize);
        if rec.len() != 5 {
            return Err(format_err(n, format!("expected 5 fields, found {}", rec.len())));
        }
        if i == 0 && rec[0].parse::<u64>().is_err() {
            continue;
        }
        rows.push((
            n,
            parse_num(&rec[0], n, "vehicle id")?,
            parse_num(&rec[1], n, "frame id")?,
            parse_num(&rec[2], n, "x")?,
            parse_num(&rec[3], n, "y")?,
            parse_num(&rec[4], n, "speed")?,
        ));
    }
    check_monotone(&rows.iter().map(|r| (r.0, r.1, r.2)).collect::<Vec<_>>())?;

    let mut by_agent: BTreeMap<u64, Vec<(u64, f64, f64, f64)>> = BTreeMap::new();
    for &(_, agent, frame, x, y, speed) in &rows {
        by_agent.entry(agent).or_default().push((frame, x, y, speed));
    }
    let mut records = Vec::with_capacity(rows.len());
    for (agent, samples) in by_agent {
        for (k, &(frame, x, y, speed)) in samples.iter().enumerate() {
            let heading = match (samples.get(k + 1), k.checked_sub(1).map(|j| samples[j])) {
                (Some(&(_, nx, ny, _)), _) => (ny - y).atan2(nx - x),
                (None, Some((_, px, py, _))) => (y - py).atan2(x - px),
                (None, None) => 0.0,
            };
            records.push(TrajectoryRecord {
                frame_index: frame,
                agent_id: agent,
                class: ActorClass::Vehicle,
                x,
                y,
                z: 0.0,
                heading: crate::sim::network::normalize_heading(heading),
                speed,
            });
        }
    }
    let count = records.len();
    TrajectoryDataset::new(records, vec![(name.to_string(), count)], Vec::new())
}

pub fn import_external(
    path: impl AsRef<Path>,
    format: ImportFormat,
) -> Result<TrajectoryDataset, DatasetError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let name = path.file_name().map_or_else(|| "import".into(), |n| n.to_string_lossy().into_owned());
    match format {
        ImportFormat::Apolloscapes => import_apolloscapes(&text, &name, APOLLO_FRAME_DT),
        ImportFormat::Ngsim => import_ngsim(&text, &name),
    }
}

/// Appends `b` after `a`, shifting b's agent ids past a's largest id and
/// its frames past a's last frame.
pub fn merge(a: &TrajectoryDataset, b: &TrajectoryDataset) -> TrajectoryDataset {
    let id_shift = a.records.iter().map(|r| r.agent_id + 1).max().unwrap_or(0);
    let frame_shift = a.records.iter().map(|r| r.frame_index + 1).max().unwrap_or(0);
    let mut records = a.records.clone();
    records.extend(b.records.iter().map(|r| TrajectoryRecord {
        frame_index: r.frame_index + frame_shift,
        agent_id: r.agent_id + id_shift,
        ..*r
    }));
    let provenance = a.provenance.iter().chain(&b.provenance).cloned().collect();
    let tags = a.tags.iter().chain(&b.tags).cloned().collect();
    TrajectoryDataset::new(records, provenance, tags).expect("shifted keys cannot collide")
}

/// Splits whole agents: a seeded shuffle of agent ids, the first
/// `round(fraction * agents)` (kept within 1..agents-1) go to train.
pub fn split(
    ds: &TrajectoryDataset,
    train_fraction: f64,
    seed: u64,
) -> Result<(TrajectoryDataset, TrajectoryDataset), DatasetError> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(DatasetError::InvalidFraction(train_fraction));
    }
    let mut agents: Vec<u64> = ds.agent_ids().into_iter().collect();
    if agents.len() < 2 {
        return Err(DatasetError::TooFewAgents(agents.len()));
    }
    SplitMix64::new(seed).shuffle(&mut agents);
    let n_train = ((train_fraction * agents.len() as f64).round() as usize).clamp(1, agents.len() - 1);
    let train: BTreeSet<u64> = agents[..n_train].iter().copied().collect();
    let test: BTreeSet<u64> = agents[n_train..].iter().copied().collect();
    Ok((ds.keep_agents(&train), ds.keep_agents(&test)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassStats {
    pub class: ActorClass,
    pub agents: usize,
    pub records: usize,
    /// Class records divided by total frames.
    pub avg_per_frame: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StatsReport {
    pub total_frames: usize,
    pub classes: Vec<ClassStats>,
    /// Zero when the wall duration is not positive.
    pub frames_per_minute: f64,
}

impl StatsReport {
    pub fn class(&self, class: ActorClass) -> &ClassStats {
        self.classes.iter().find(|c| c.class == class).unwrap()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<12} {:>8} {:>10} {:>14}", "class", "agents", "records", "avg/frame");
        for c in &self.classes {
            let _ = writeln!(out, "{:<12} {:>8} {:>10} {:>14.4}", c.class.as_str(), c.agents, c.records, c.avg_per_frame);
        }
        let _ = writeln!(out, "frames {}", self.total_frames);
        let _ = writeln!(out, "frames_per_minute {}", self.frames_per_minute);
        out
    }
}

/// Frame, agent and per-frame averages, plus frames per minute of wall time.
pub fn stats(ds: &TrajectoryDataset, wall_duration_s: f64) -> StatsReport {
    let frames: BTreeSet<u64> = ds.records.iter().map(|r| r.frame_index).collect();
    let total_frames = frames.len();
    let classes = ActorClass::ALL
        .iter()
        .map(|&class| {
            let recs = ds.records.iter().filter(|r| r.class == class);
            let records = recs.clone().count();
            let agents = recs.map(|r| r.agent_id).collect::<BTreeSet<_>>().len();
            ClassStats {
                class,
                agents,
                records,
                avg_per_frame: if total_frames == 0 { 0.0 } else { records as f64 / total_frames as f64 },
            }
        })
        .collect();
    let frames_per_minute = if wall_duration_s > 0.0 {
        total_frames as f64 / (wall_duration_s / 60.0)
    } else {
        0.0
    };
    StatsReport {
        total_frames,
        classes,
        frames_per_minute,
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn rec(frame: u64, agent: u64, class: ActorClass, x: f64) -> TrajectoryRecord {
        TrajectoryRecord {
            frame_index: frame,
            agent_id: agent,
            class,
            x,
            y: 0.0,
            z: 0.0,
            heading: 0.0,
            speed: 0.0,
        }
    }

    fn grid(frames: u64, agents: u64) -> TrajectoryDataset {
        let mut v = Vec::new();
        for f in 0..frames {
            for a in 0..agents {
                v.push(rec(f, a, ActorClass::Vehicle, f as f64));
            }
        }
        TrajectoryDataset::new(v, vec![("g".into(), (frames * agents) as usize)], vec![]).unwrap()
    }

    #[test]
    fn records_are_sorted_and_unique() {
        let ds = TrajectoryDataset::new(
            vec![rec(1, 0, ActorClass::Vehicle, 0.0), rec(0, 1, ActorClass::Vehicle, 0.0)],
            vec![],
            vec![],
        )
        .unwrap();
        assert_eq!(ds.records()[0].frame_index, 0);
        assert!(matches!(
            TrajectoryDataset::new(vec![rec(0, 0, ActorClass::Vehicle, 0.0); 2], vec![], vec![]),
            Err(DatasetError::DuplicateKey { .. })
        ));
        assert!(matches!(
            TrajectoryDataset::new(
                vec![rec(0, 0, ActorClass::Vehicle, 0.0), rec(1, 0, ActorClass::Bicycle, 0.0)],
                vec![],
                vec![]
            ),
            Err(DatasetError::ClassChange { agent: 0 })
        ));
    }

    #[test]
    fn seven_columns_names_the_line() {
        let text = format!("{HEADER}\n0 0 1 0 0 0 0 0\n1 0 1 0 0 0 0\n");
        match parse(&text) {
            Err(DatasetError::Format { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_header_is_an_error() {
        assert!(parse("0 0 1 0 0 0 0 0\n").is_err());
    }

    #[test]
    fn empty_dataset_is_header_only() {
        let ds = TrajectoryDataset::default();
        assert_eq!(to_string(&ds), format!("{HEADER}\n"));
        assert_eq!(parse(&to_string(&ds)).unwrap(), ds);
    }

    #[test]
    fn metadata_round_trips() {
        let mut ds = grid(3, 2);
        ds.provenance.push(("name with spaces".into(), 0));
        ds.tags = vec!["rain".into(), "safe".into()];
        assert_eq!(parse(&to_string(&ds)).unwrap(), ds);
    }

    #[test]
    fn apollo_two_line_speed() {
        let ds = import_apolloscapes("0 7 1 0 0 0 0\n1 7 1 1 0 0 0\n", "fx", 0.5).unwrap();
        assert_eq!(ds.records()[0].speed, 0.0);
        // Hand finite difference: 1 m over one 0.5 s frame.
        assert!((ds.records()[1].speed - 2.0).abs() <= 1e-9 * 2.0);
    }

    #[test]
    fn apollo_unknown_type_names_token() {
        let err = import_apolloscapes("0 1 9 0 0 0 0\n", "x", 0.5).unwrap_err();
        assert!(err.to_string().contains("`9`"), "{err}");
    }

    #[test]
    fn apollo_non_monotone_frames() {
        assert!(matches!(
            import_apolloscapes("2 1 1 0 0 0 0\n1 1 1 0 0 0 0\n", "x", 0.5),
            Err(DatasetError::NonMonotone { line: 2, agent: 1 })
        ));
    }

    #[test]
    fn empty_imports() {
        assert!(import_apolloscapes("", "x", 0.5).unwrap().is_empty());
        assert!(import_ngsim("", "x").unwrap().is_empty());
    }

    #[test]
    fn ngsim_header_and_heading() {
        let text = "vehicle_id,frame_id,x,y,speed\n5,0,0,0,1\n5,1,0,2,1\n";
        let ds = import_ngsim(text, "n").unwrap();
        assert_eq!(ds.len(), 2);
        for r in ds.records() {
            assert_eq!(r.class, ActorClass::Vehicle);
            assert_eq!(r.z, 0.0);
            assert!((r.heading - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        }
    }

    #[test]
    fn merge_counts_and_shifts() {
        let a = grid(10, 10);
        let b = grid(5, 10);
        let m = merge(&a, &b);
        assert_eq!(m.len(), 150);
        let keys: BTreeSet<_> = m.records().iter().map(|r| r.key()).collect();
        assert_eq!(keys.len(), 150);
        assert_eq!(m.provenance.len(), 2);
        let e = merge(&a, &TrajectoryDataset::default());
        assert_eq!(e.records(), a.records());
    }

    #[test]
    fn split_eight_two() {
        let ds = grid(4, 10);
        let (train, test) = split(&ds, 0.8, 3).unwrap();
        assert_eq!(train.agent_ids().len(), 8);
        assert_eq!(test.agent_ids().len(), 2);
        assert!(train.agent_ids().is_disjoint(&test.agent_ids()));
        assert_eq!(train.len() + test.len(), ds.len());
        assert_eq!(split(&ds, 0.8, 3).unwrap(), (train, test));
        assert!(matches!(split(&grid(3, 1), 0.5, 0), Err(DatasetError::TooFewAgents(1))));
        assert!(split(&ds, 1.0, 0).is_err());
    }

    #[test]
    fn stats_average_is_records_over_frames() {
        let mut v = Vec::new();
        for f in 0..50 {
            for a in 0..5 {
                v.push(rec(f, a, ActorClass::Pedestrian, 0.0));
            }
        }
        let ds = TrajectoryDataset::new(v, vec![], vec![]).unwrap();
        let s = stats(&ds, 60.0);
        // Direct count: 250 pedestrian records over 50 frames.
        assert_eq!(s.class(ActorClass::Pedestrian).records, 250);
        assert_eq!(s.class(ActorClass::Pedestrian).avg_per_frame, 250.0 / 50.0);
        assert_eq!(s.class(ActorClass::Vehicle).avg_per_frame, 0.0);
        assert_eq!(s.frames_per_minute, 50.0);
        let z = stats(&TrajectoryDataset::default(), 0.0);
        assert_eq!(z.total_frames, 0);
        assert!(z.classes.iter().all(|c| c.records == 0 && c.avg_per_frame == 0.0));
    }

    pub(crate) fn arb_dataset() -> impl Strategy<Value = TrajectoryDataset> {
        let agent = (0u64..50, 1u8..=3, prop::collection::vec((0u64..40, any::<f64>(), -1e6f64..1e6, -5.0f64..5.0), 0..8));
        (prop::collection::vec(agent, 0..6), prop::collection::vec("[a-z]{1,6}", 0..3)).prop_map(|(agents, tags)| {
            let mut seen = BTreeSet::new();
            let mut v = Vec::new();
            for (id, code, samples) in agents {
                for (frame, x, y, h) in samples {
                    if x.is_finite() && seen.insert((frame, id)) {
                        v.push(TrajectoryRecord {
                            frame_index: frame,
                            agent_id: id,
                            class: ActorClass::from_code(code).unwrap(),
                            x,
                            y,
                            z: y / 3.0,
                            heading: h,
                            speed: h.abs(),
                        });
                    }
                }
            }
            // Keep one class per agent.
            let mut class_of = HashMap::new();
            v.retain(|r| *class_of.entry(r.agent_id).or_insert(r.class) == r.class);
            let n = v.len();
            TrajectoryDataset::new(v, vec![("gen".into(), n)], tags).unwrap()
        })
    }

    proptest! {
        #[test]
        fn write_read_identity(ds in arb_dataset()) {
            prop_assert_eq!(parse(&to_string(&ds)).unwrap(), ds);
        }

        #[test]
        fn merge_is_key_disjoint_and_associative_in_size(a in arb_dataset(), b in arb_dataset(), c in arb_dataset()) {
            let left = merge(&merge(&a, &b), &c);
            let right = merge(&a, &merge(&b, &c));
            prop_assert_eq!(left.len(), a.len() + b.len() + c.len());
            prop_assert_eq!(right.len(), left.len());
            let keys: BTreeSet<_> = left.records().iter().map(|r| r.key()).collect();
            prop_assert_eq!(keys.len(), left.len());
        }

        #[test]
        fn constant_velocity_import_speed(vx in -5.0f64..5.0, vy in -5.0f64..5.0, steps in 2usize..6) {
            let mut text = String::new();
            for k in 0..steps {
                let _ = writeln!(text, "{} 1 1 {} {} 0 0", k * 2, vx * k as f64, vy * k as f64);
            }
            let ds = import_apolloscapes(&text, "cv", 0.5).unwrap();
            let expected = (vx * vx + vy * vy).sqrt() / 1.0;
            for r in &ds.records()[1..] {
                prop_assert!((r.speed - expected).abs() <= 1e-9 * expected.max(1e-12));
            }
        }
    }
}
