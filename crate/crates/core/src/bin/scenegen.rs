use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use scenegen::dataset::{self, DatasetError, ImportFormat};
use scenegen::filter::{check_relevance, filter_description, Relevance, ScenarioDescription};
use scenegen::lexicon::{Lexicon, LexiconError};
use scenegen::llm::{build_backend, BackendConfig, BackendKind, LlmError, RawResponse};
use scenegen::metrics::{constant_velocity_predict, evaluate, ClassWeights, DEFAULT_OBSERVE, DEFAULT_PREDICT};
use scenegen::pipeline::{self, read_descriptions, PipelineContext, PipelineError, PipelineOptions};
use scenegen::prompt::{assemble_prompt, select_exemplars, ExemplarSet, PromptError, ShotPolicy, DEFAULT_INSTRUCTION};
use scenegen::schema::parse_config;
use scenegen::sim;
use scenegen::validator::validate_pipeline;

#[derive(Parser)]
#[command(name = "scenegen", version, about = "Turn traffic scenario descriptions into simulated trajectory datasets")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Lexicon file; the built-in lexicon is used when omitted.
    #[arg(long, global = true)]
    lexicon: Option<PathBuf>,
    /// Exemplar file; the built-in exemplars are used when omitted.
    #[arg(long, global = true)]
    exemplars: Option<PathBuf>,
    /// `template` synthesizes offline; `remote` calls a chat-completions endpoint
    /// with the key from SCENEGEN_LLM_API_KEY.
    #[arg(long, global = true, value_enum, default_value_t = BackendArg::Template)]
    backend: BackendArg,
    /// Chat-completions URL for the remote backend.
    #[arg(long, global = true)]
    endpoint: Option<String>,
    #[arg(long, global = true, default_value = "default")]
    model: String,
    #[arg(long, global = true, default_value_t = 0.0)]
    temperature: f64,
    #[arg(long, global = true, default_value_t = 1024)]
    max_tokens: u32,
    /// Exemplars placed in each prompt.
    #[arg(long, global = true, default_value_t = 2)]
    shots: usize,
    /// Concurrent jobs.
    #[arg(long, global = true, default_value_t = 4)]
    parallel: usize,
    /// Output directory for batch commands.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Remote,
    Template,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Apolloscapes,
    Ngsim,
}

#[derive(Subcommand)]
enum Command {
    /// Check relevance and rewrite a description ("-" reads stdin).
    Filter { input: PathBuf },
    /// Filter, build the prompt and query the backend.
    Generate {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also write the assembled prompt here.
        #[arg(long)]
        prompt_out: Option<PathBuf>,
    },
    /// Extract and repair a configuration from a response.
    Validate {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run a configuration and write its trace.
    Simulate {
        config: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Turn a trace into a dataset, adding tags.
    Collect {
        trace: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long = "tag")]
        tags: Vec<String>,
    },
    /// Convert an external trajectory file.
    Import {
        input: PathBuf,
        #[arg(long, value_enum)]
        format: FormatArg,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Concatenate datasets with id and frame shifting.
    Merge {
        #[arg(required = true, num_args = 2..)]
        inputs: Vec<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Split a dataset by agent.
    Split {
        input: PathBuf,
        #[arg(long)]
        fraction: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        test: PathBuf,
    },
    /// Frame and per-class agent statistics.
    Stats {
        input: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        wall_seconds: f64,
    },
    /// Constant-velocity ADE/FDE report.
    Metrics {
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_OBSERVE)]
        observe: usize,
        #[arg(long, default_value_t = DEFAULT_PREDICT)]
        predict: usize,
        /// `equal`, `weighted` or three numbers `wv,wp,wb`.
        #[arg(long, default_value = "equal")]
        weights: ClassWeights,
    },
    /// End-to-end batch over a `---` separated descriptions file.
    Pipeline {
        descriptions: PathBuf,
        /// Merge only scenarios carrying this tag.
        #[arg(long)]
        filter_tag: Option<String>,
    },
    /// Simulate a configuration over count and seed variations.
    Vary {
        config: PathBuf,
        /// Vehicle x pedestrian pairs, e.g. `5x5,10x10`.
        #[arg(long, value_delimiter = ',')]
        counts: Vec<String>,
        #[arg(long, value_delimiter = ',', default_value = "0")]
        seeds: Vec<u64>,
    },
}

/// Failure with its documented exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

const EXIT_REJECTED: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_CREDENTIALS: u8 = 4;

impl From<DatasetError> for Failure {
    fn from(e: DatasetError) -> Self {
        let code = if matches!(e, DatasetError::Io(_)) { EXIT_IO } else { 1 };
        Self::new(code, e.to_string())
    }
}

impl From<LexiconError> for Failure {
    fn from(e: LexiconError) -> Self {
        let code = if matches!(e, LexiconError::Io(_) | LexiconError::NotFound(_)) { EXIT_IO } else { 1 };
        Self::new(code, e.to_string())
    }
}

impl From<PromptError> for Failure {
    fn from(e: PromptError) -> Self {
        let code = if matches!(e, PromptError::Io(_)) { EXIT_IO } else { 1 };
        Self::new(code, e.to_string())
    }
}

impl From<LlmError> for Failure {
    fn from(e: LlmError) -> Self {
        let code = if matches!(e, LlmError::MissingCredential) { EXIT_CREDENTIALS } else { 1 };
        Self::new(code, e.to_string())
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Dataset(d) => d.into(),
            PipelineError::Io { .. } => Self::new(EXIT_IO, e.to_string()),
            PipelineError::Pool(_) => Self::new(1, e.to_string()),
        }
    }
}

type Result<T> = std::result::Result<T, Failure>;

fn read_input(path: &Path) -> Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Failure::new(EXIT_IO, format!("stdin: {e}")))?;
        return Ok(s);
    }
    fs::read_to_string(path).map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))
}

fn write_output(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", parent.display())))?;
    }
    fs::write(path, text).map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(p) => write_output(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

impl Global {
    fn lexicon(&self) -> Result<Lexicon> {
        Ok(match &self.lexicon {
            Some(p) => Lexicon::load(p)?,
            None => Lexicon::default_lexicon(),
        })
    }

    fn exemplars(&self) -> Result<ExemplarSet> {
        let policy = ShotPolicy::from_count(self.shots);
        Ok(match &self.exemplars {
            Some(p) => ExemplarSet::load(p, policy)?,
            None => ExemplarSet::default_set(policy)?,
        })
    }

    fn backend_config(&self) -> BackendConfig {
        let mut cfg = match self.backend {
            BackendArg::Template => BackendConfig::template(),
            BackendArg::Remote => BackendConfig::remote(self.endpoint.clone().unwrap_or_default(), self.model.clone()),
        };
        if cfg.kind == BackendKind::Remote {
            cfg.temperature = self.temperature;
            cfg.max_tokens = self.max_tokens;
        }
        cfg
    }
}

fn parse_count_pair(s: &str) -> Result<(u32, u32)> {
    let bad = || Failure::new(1, format!("bad count pair `{s}`, expected e.g. 5x5"));
    let (v, p) = s.split_once(['x', 'X', ':']).ok_or_else(bad)?;
    Ok((v.trim().parse().map_err(|_| bad())?, p.trim().parse().map_err(|_| bad())?))
}

fn read_config(path: &Path) -> Result<scenegen::ScenarioConfig> {
    let text = read_input(path)?;
    parse_config(&text).map_err(|e| Failure::new(1, format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<()> {
    let g = &cli.global;
    match cli.command {
        Command::Filter { input } => {
            let lex = g.lexicon()?;
            let desc = ScenarioDescription::new(read_input(&input)?.trim_end());
            if let Relevance::Reject(reason) = check_relevance(&desc, &lex) {
                return Err(Failure::new(EXIT_REJECTED, format!("rejected: {reason}")));
            }
            let out = filter_description(&desc, &lex);
            for e in &out.edits {
                log::info!("{} -> {} ({})", e.original, e.replacement, e.reason);
            }
            println!("{}", out.text);
        }
        Command::Generate {
            input,
            output,
            prompt_out,
        } => {
            let lex = g.lexicon()?;
            let exemplars = g.exemplars()?;
            let backend = build_backend(&g.backend_config())?;
            let desc = ScenarioDescription::new(read_input(&input)?.trim_end());
            if let Relevance::Reject(reason) = check_relevance(&desc, &lex) {
                return Err(Failure::new(EXIT_REJECTED, format!("rejected: {reason}")));
            }
            let filtered = filter_description(&desc, &lex);
            let picked = select_exemplars(&exemplars, &filtered, g.shots.min(exemplars.len()))?;
            let prompt = assemble_prompt(&filtered, &picked, DEFAULT_INSTRUCTION);
            if let Some(p) = prompt_out {
                write_output(&p, &prompt.text)?;
            }
            let resp = backend.generate(&prompt)?;
            log::info!("{} answered in {} ms", resp.backend_id, resp.latency_ms);
            emit(output.as_deref(), &resp.text)?;
        }
        Command::Validate { input, output, report } => {
            let lex = g.lexicon()?;
            let raw = RawResponse::from_text(read_input(&input)?);
            let (_, rep) = validate_pipeline(&raw, &lex).map_err(|e| Failure::new(1, e.to_string()))?;
            if let Some(p) = report {
                write_output(&p, &rep.render())?;
            }
            for r in &rep.repairs {
                log::info!("repair {r}");
            }
            emit(output.as_deref(), &rep.final_text)?;
        }
        Command::Simulate { config, output } => {
            let cfg = read_config(&config)?;
            let trace = sim::run(&cfg).map_err(|e| Failure::new(1, e.to_string()))?;
            dataset::write_trace(&trace, &output)?;
            eprintln!("{} frames, {} collisions", trace.frames.len(), trace.collisions.len());
        }
        Command::Collect { trace, output, tags } => {
            let (ds, _) = dataset::read_with_collisions(&trace)?;
            let mut all = ds.tags.clone();
            all.extend(tags);
            let provenance = ds.provenance.clone();
            let ds = scenegen::TrajectoryDataset::new(ds.records().to_vec(), provenance, all)?;
            dataset::write(&ds, &output)?;
        }
        Command::Import { input, format, output } => {
            let format = match format {
                FormatArg::Apolloscapes => ImportFormat::Apolloscapes,
                FormatArg::Ngsim => ImportFormat::Ngsim,
            };
            let ds = dataset::import_external(&input, format)?;
            dataset::write(&ds, &output)?;
            eprintln!("{} records", ds.len());
        }
        Command::Merge { inputs, output } => {
            let mut merged = dataset::read(&inputs[0])?;
            for p in &inputs[1..] {
                merged = dataset::merge(&merged, &dataset::read(p)?);
            }
            dataset::write(&merged, &output)?;
            eprintln!("{} records", merged.len());
        }
        Command::Split {
            input,
            fraction,
            seed,
            train,
            test,
        } => {
            let ds = dataset::read(&input)?;
            let (a, b) = dataset::split(&ds, fraction, seed)?;
            dataset::write(&a, &train)?;
            dataset::write(&b, &test)?;
            eprintln!("train {} agents, test {} agents", a.agent_ids().len(), b.agent_ids().len());
        }
        Command::Stats { input, wall_seconds } => {
            let ds = dataset::read(&input)?;
            print!("{}", dataset::stats(&ds, wall_seconds).render());
        }
        Command::Metrics {
            input,
            observe,
            predict,
            weights,
        } => {
            let ds = dataset::read(&input)?;
            let task = constant_velocity_predict(&ds, observe, predict).map_err(|e| Failure::new(1, e.to_string()))?;
            let report = evaluate(&task, weights).map_err(|e| Failure::new(1, e.to_string()))?;
            print!("{}", report.render());
        }
        Command::Pipeline {
            descriptions,
            filter_tag,
        } => {
            let lex = g.lexicon()?;
            let exemplars = g.exemplars()?;
            let backend = build_backend(&g.backend_config())?;
            let descs = read_descriptions(&read_input(&descriptions)?);
            let ctx = PipelineContext {
                lexicon: &lex,
                exemplars: &exemplars,
                backend: backend.as_ref(),
                instruction: DEFAULT_INSTRUCTION,
            };
            let mut opts = PipelineOptions::new(&g.out);
            opts.shots = g.shots;
            opts.parallel = g.parallel;
            opts.filter_tag = filter_tag;
            let summary = pipeline::pipeline(&descs, &ctx, &opts)?;
            print!("{}", summary.render());
            if summary.simulated() == 0 {
                let code = if summary.count("rejected") == summary.jobs.len() { EXIT_REJECTED } else { 1 };
                return Err(Failure::new(code, "no scenario was simulated"));
            }
        }
        Command::Vary { config, counts, seeds } => {
            let cfg = read_config(&config)?;
            let counts: Vec<(u32, u32)> = counts.iter().map(|s| parse_count_pair(s)).collect::<Result<_>>()?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(g.parallel.max(1))
                .build()
                .map_err(|e| Failure::new(1, e.to_string()))?;
            let results = pool.install(|| pipeline::run_variations(&cfg, &counts, &seeds));
            fs::create_dir_all(&g.out).map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", g.out.display())))?;
            let mut failed = 0;
            for v in &results {
                match &v.result {
                    Ok(ds) => {
                        let p = g.out.join(format!("{}.traj", v.name));
                        dataset::write(ds, &p)?;
                        println!("{} ok {} records", v.name, ds.len());
                    }
                    Err(e) => {
                        failed += 1;
                        println!("{} failed: {e}", v.name);
                    }
                }
            }
            if failed > 0 && failed == results.len() {
                return Err(Failure::new(1, "every variation failed"));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
