//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or validation error,
//! 3 runtime error. Diagnostics go to stderr; results go to stdout or the
//! `--out` file.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::classifiers::{fit, ClassifierError, ModelFamily, ModelSpec};
use crate::domain::{dataset_stats, parse_dataset, write_dataset, Dataset, DatasetError};
use crate::encoding::{encode_with, feature_names, EncodingFamily, EncodingSpec, FeatureVector, OverflowPolicy};
use crate::evaluation::{EvalError, StdKind};
use crate::experiment::{emit_report, run_grid, ExperimentConfig, ExperimentError, ReportFormat, RunOptions};
use crate::synthgen::{generate, GeneratorConfig, GeneratorMode, CORPUS_HATEFUL, CORPUS_NON_HATEFUL};

/// Relative dataset paths not found in the working directory are looked up here.
pub const DATA_DIR_ENV: &str = "ARGSTRUCT_DATA_DIR";

#[derive(Debug, Parser)]
#[command(name = "argstruct", version, about = "Hate speech prediction from argument-structure annotations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check every record of a dataset.
    Validate(ValidateArgs),
    /// Print corpus statistics and the label contingency table.
    Stats(StatsArgs),
    /// Write feature vectors for one encoding as CSV.
    Encode(EncodeArgs),
    /// Generate a synthetic dataset.
    Synth(SynthArgs),
    /// Run cross-validated encoding × model experiments.
    Run(Box<RunArgs>),
}

#[derive(Debug, Args)]
struct DatasetArgs {
    /// Line-delimited dataset file.
    #[arg(long)]
    dataset: PathBuf,
    /// Skip invalid records instead of failing.
    #[arg(long, default_value_t = false)]
    lenient: bool,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[command(flatten)]
    data: DatasetArgs,
}

#[derive(Debug, Args)]
struct StatsArgs {
    #[command(flatten)]
    data: DatasetArgs,
    /// Output format: text or json.
    #[arg(long, default_value = "text")]
    format: String,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EncodeArgs {
    #[command(flatten)]
    data: DatasetArgs,
    /// Encoding family, e.g. arg-str-cw-hs.
    #[arg(long)]
    encoding: String,
    /// Premise slot capacity (default: largest premise count in the dataset).
    #[arg(long)]
    capacity: Option<usize>,
    /// Drop premises beyond the capacity instead of failing.
    #[arg(long, default_value_t = false)]
    truncate: bool,
    /// Stage-one model for two-stage encodings.
    #[arg(long, default_value = "lgr")]
    model: String,
    /// Threshold stage-one scores at 0.5.
    #[arg(long, default_value_t = false)]
    hard_stage1: bool,
    /// Stage-one model seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// table1 or separable.
    #[arg(long, default_value = "table1")]
    mode: String,
    #[arg(long, default_value_t = CORPUS_HATEFUL)]
    n_hate: usize,
    #[arg(long, default_value_t = CORPUS_NON_HATEFUL)]
    n_nohate: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Upper clamp on premises per message.
    #[arg(long, default_value_t = 6)]
    max_premises: usize,
    /// Force at least one hateful component into every hateful message.
    #[arg(long, default_value_t = false)]
    guarantee_hateful: bool,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Every option may also come from `--config`; flags win over the file.
#[derive(Debug, Args, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct RunArgs {
    /// TOML file with any of these options (kebab-case keys).
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// Line-delimited dataset file.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Skip invalid records instead of failing.
    #[arg(long)]
    #[serde(default)]
    lenient: bool,
    /// Comma-separated encoding families, or `all` [default: all]
    #[arg(long)]
    encodings: Option<String>,
    /// Comma-separated models (lgr, svm, rforest, xgb-style-gbt), or `all` [default: all]
    #[arg(long)]
    models: Option<String>,
    /// Number of folds [default: 5]
    #[arg(long)]
    k: Option<usize>,
    /// Seed for folds and models [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    /// markdown, csv or json [default: markdown]
    #[arg(long)]
    format: Option<String>,
    /// Output file [default: stdout]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; results do not depend on it [default: available parallelism]
    #[arg(long)]
    jobs: Option<usize>,
    /// Out-of-fold stage-one scores for two-stage training rows.
    #[arg(long)]
    #[serde(default)]
    inner_cv: bool,
    /// Threshold stage-one scores at 0.5.
    #[arg(long)]
    #[serde(default)]
    hard_stage1: bool,
    /// Report sample std (n-1) instead of population std.
    #[arg(long)]
    #[serde(default)]
    sample_std: bool,
    /// Drop premises beyond the capacity instead of failing.
    #[arg(long)]
    #[serde(default)]
    truncate: bool,
    /// Enable L2 1e-4 for lgr.
    #[arg(long)]
    #[serde(default)]
    lgr_l2: bool,
    /// Gradient steps for lgr and svm [default: 1000]
    #[arg(long)]
    max_iter: Option<usize>,
    /// lgr step size [default: 0.1]
    #[arg(long)]
    lgr_lr: Option<f64>,
    /// svm step size [default: 0.1]
    #[arg(long)]
    svm_lr: Option<f64>,
    /// svm L2 strength [default: 0.001]
    #[arg(long)]
    svm_l2: Option<f64>,
    /// Random forest size [default: 100]
    #[arg(long)]
    trees: Option<usize>,
    /// Random forest depth limit [default: 8]
    #[arg(long)]
    rf_depth: Option<usize>,
    /// Boosting rounds [default: 100]
    #[arg(long)]
    gbt_rounds: Option<usize>,
    /// Boosted tree depth limit [default: 3]
    #[arg(long)]
    gbt_depth: Option<usize>,
    /// Boosting shrinkage [default: 0.1]
    #[arg(long)]
    gbt_lr: Option<f64>,
    /// Row subsample per boosting round [default: 1.0]
    #[arg(long)]
    gbt_subsample: Option<f64>,
    /// Leaf-weight L2 for boosting [default: 1.0]
    #[arg(long)]
    gbt_lambda: Option<f64>,
}

impl RunArgs {
    fn merge(self, file: RunArgs) -> RunArgs {
        RunArgs {
            config: self.config,
            dataset: self.dataset.or(file.dataset),
            lenient: self.lenient || file.lenient,
            encodings: self.encodings.or(file.encodings),
            models: self.models.or(file.models),
            k: self.k.or(file.k),
            seed: self.seed.or(file.seed),
            format: self.format.or(file.format),
            out: self.out.or(file.out),
            jobs: self.jobs.or(file.jobs),
            inner_cv: self.inner_cv || file.inner_cv,
            hard_stage1: self.hard_stage1 || file.hard_stage1,
            sample_std: self.sample_std || file.sample_std,
            truncate: self.truncate || file.truncate,
            lgr_l2: self.lgr_l2 || file.lgr_l2,
            max_iter: self.max_iter.or(file.max_iter),
            lgr_lr: self.lgr_lr.or(file.lgr_lr),
            svm_lr: self.svm_lr.or(file.svm_lr),
            svm_l2: self.svm_l2.or(file.svm_l2),
            trees: self.trees.or(file.trees),
            rf_depth: self.rf_depth.or(file.rf_depth),
            gbt_rounds: self.gbt_rounds.or(file.gbt_rounds),
            gbt_depth: self.gbt_depth.or(file.gbt_depth),
            gbt_lr: self.gbt_lr.or(file.gbt_lr),
            gbt_subsample: self.gbt_subsample.or(file.gbt_subsample),
            gbt_lambda: self.gbt_lambda.or(file.gbt_lambda),
        }
    }

    fn model_spec(&self, family: ModelFamily, seed: u64) -> ModelSpec {
        let mut spec = ModelSpec::new(family).with_seed(seed);
        if let Some(n) = self.max_iter {
            spec.max_iter = n;
        }
        match family {
            ModelFamily::Lgr => {
                if self.lgr_l2 {
                    spec.regularization = 1e-4;
                }
                if let Some(lr) = self.lgr_lr {
                    spec.learning_rate = lr;
                }
            }
            ModelFamily::Svm => {
                if let Some(lr) = self.svm_lr {
                    spec.learning_rate = lr;
                }
                if let Some(l2) = self.svm_l2 {
                    spec.regularization = l2;
                }
            }
            ModelFamily::Rforest => {
                if let Some(n) = self.trees {
                    spec.tree_count = n;
                }
                if let Some(d) = self.rf_depth {
                    spec.max_depth = d;
                }
            }
            ModelFamily::Gbt => {
                if let Some(n) = self.gbt_rounds {
                    spec.tree_count = n;
                }
                if let Some(d) = self.gbt_depth {
                    spec.max_depth = d;
                }
                if let Some(lr) = self.gbt_lr {
                    spec.learning_rate = lr;
                }
                if let Some(s) = self.gbt_subsample {
                    spec.subsample = s;
                }
                if let Some(l) = self.gbt_lambda {
                    spec.regularization = l;
                }
            }
        }
        spec
    }
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(String),
    Runtime(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            Self::Usage(_) => 1,
            Self::Data(_) => 2,
            Self::Runtime(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Self::Usage(m) | Self::Data(m) | Self::Runtime(m) => m,
        }
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::Io(e) => CliError::Runtime(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::InvalidConfig(_) | ExperimentError::UnknownFormat(_) => CliError::Usage(e.to_string()),
            ExperimentError::Evaluation(EvalError::KTooSmall(_)) => CliError::Usage(e.to_string()),
            ExperimentError::Classifier(ClassifierError::InvalidSpec(_)) => CliError::Usage(e.to_string()),
            ExperimentError::Encoding(_) | ExperimentError::Evaluation(_) => CliError::Data(e.to_string()),
            ExperimentError::Classifier(_) => CliError::Runtime(e.to_string()),
        }
    }
}

fn io_err(path: &Path, e: io::Error) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

fn resolve_dataset(path: &Path) -> PathBuf {
    if path.is_relative() && !path.exists() {
        if let Some(dir) = std::env::var_os(DATA_DIR_ENV) {
            let candidate = Path::new(&dir).join(path);
            if candidate.exists() {
                return candidate;
            }
        }
    }
    path.to_path_buf()
}

fn load_dataset(path: &Path, lenient: bool, err: &mut dyn Write) -> Result<Dataset, CliError> {
    let path = resolve_dataset(path);
    let file = File::open(&path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let parsed = parse_dataset(BufReader::new(file), !lenient)
        .map_err(CliError::from)
        .map_err(|e| match e {
            CliError::Data(m) => CliError::Data(format!("{}: {m}", path.display())),
            other => other,
        })?;
    for (line, reason) in &parsed.skipped {
        let _ = writeln!(err, "{}: line {line}: skipped: {reason}", path.display());
    }
    for w in &parsed.warnings {
        let _ = writeln!(err, "warning: {w}");
    }
    Ok(parsed.dataset)
}

fn write_output(out_path: Option<&Path>, stdout: &mut dyn Write, bytes: &[u8]) -> Result<(), CliError> {
    match out_path {
        Some(p) => {
            let mut f = BufWriter::new(File::create(p).map_err(|e| io_err(p, e))?);
            f.write_all(bytes).and_then(|_| f.flush()).map_err(|e| io_err(p, e))
        }
        None => stdout
            .write_all(bytes)
            .map_err(|e| CliError::Runtime(format!("stdout: {e}"))),
    }
}

fn parse_list<T, E: std::fmt::Display>(raw: &str, all: &[T], parse: impl Fn(&str) -> Result<T, E>) -> Result<Vec<T>, CliError>
where
    T: Copy + PartialEq,
{
    if raw.trim() == "all" {
        return Ok(all.to_vec());
    }
    let mut out = Vec::new();
    for part in raw.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let item = parse(part).map_err(|e| CliError::Usage(e.to_string()))?;
        if !out.contains(&item) {
            out.push(item);
        }
    }
    if out.is_empty() {
        return Err(CliError::Usage(format!("empty list `{raw}`")));
    }
    Ok(out)
}

fn cmd_validate(args: ValidateArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let d = load_dataset(&args.data.dataset, args.data.lenient, stderr)?;
    let (h, n) = d.class_counts();
    let msg = format!(
        "ok: {} messages ({h} hate, {n} nohate), {} components, premise capacity {}\n",
        d.len(),
        d.component_count(),
        d.premise_capacity()
    );
    write_output(None, stdout, msg.as_bytes())
}

fn cmd_stats(args: StatsArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let d = load_dataset(&args.data.dataset, args.data.lenient, stderr)?;
    let stats = dataset_stats(&d);
    let text = match args.format.as_str() {
        "text" => stats.render_text(),
        "json" => format!("{}\n", serde_json::to_string_pretty(&stats.to_json()).expect("stats serialize")),
        other => return Err(CliError::Usage(format!("unknown stats format `{other}`"))),
    };
    write_output(args.out.as_deref(), stdout, text.as_bytes())
}

fn cmd_encode(args: EncodeArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let family: EncodingFamily = args.encoding.parse().map_err(|e: crate::encoding::UnknownEncoding| CliError::Usage(e.to_string()))?;
    let model: ModelFamily = args.model.parse().map_err(|e: crate::classifiers::UnknownModel| CliError::Usage(e.to_string()))?;
    let d = load_dataset(&args.data.dataset, args.data.lenient, stderr)?;
    let capacity = args.capacity.unwrap_or(d.premise_capacity());
    if capacity < 1 {
        return Err(CliError::Usage("capacity must be at least 1".into()));
    }
    let overflow = if args.truncate {
        OverflowPolicy::Truncate
    } else {
        OverflowPolicy::Error
    };
    let spec = EncodingSpec::new(family, capacity);
    let data_err = |e: crate::encoding::EncodingError| CliError::Data(e.to_string());
    let scores: Vec<Option<f64>> = match family.stage_one_family() {
        None => vec![None; d.len()],
        Some(stage_one) => {
            let premise_spec = EncodingSpec::new(stage_one, capacity);
            let x: Vec<FeatureVector> = d
                .messages()
                .iter()
                .map(|m| encode_with(m, premise_spec, None, overflow))
                .collect::<Result<_, _>>()
                .map_err(data_err)?;
            let m = fit(&ModelSpec::new(model).with_seed(args.seed), &x, &d.labels())
                .map_err(|e| CliError::Data(e.to_string()))?;
            x.iter()
                .map(|r| {
                    let s = m.predict_score(r).expect("dimension matches");
                    Some(if args.hard_stage1 { f64::from(u8::from(s >= 0.5)) } else { s })
                })
                .collect()
        }
    };
    let mut csv = feature_names(spec).join(",");
    csv.push_str(",label\n");
    for (m, score) in d.messages().iter().zip(scores) {
        let v = encode_with(m, spec, score, overflow).map_err(data_err)?;
        for x in v.iter() {
            csv.push_str(&x.to_string());
            csv.push(',');
        }
        csv.push_str(if m.label.is_hateful() { "1\n" } else { "0\n" });
    }
    write_output(args.out.as_deref(), stdout, csv.as_bytes())
}

fn cmd_synth(args: SynthArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let mode: GeneratorMode = args.mode.parse().map_err(|e: crate::synthgen::GeneratorError| CliError::Usage(e.to_string()))?;
    let mut cfg = GeneratorConfig::new(mode, args.n_hate, args.n_nohate, args.seed);
    cfg.max_premises = args.max_premises;
    cfg.guarantee_hateful_component = args.guarantee_hateful;
    let d = generate(&cfg).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut buf = Vec::new();
    write_dataset(&mut buf, &d).map_err(|e| CliError::Runtime(e.to_string()))?;
    write_output(args.out.as_deref(), stdout, &buf)
}

fn cmd_run(args: RunArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let args = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            let file: RunArgs = toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            args.merge(file)
        }
        None => args,
    };
    let dataset = args
        .dataset
        .clone()
        .ok_or_else(|| CliError::Usage("--dataset is required".into()))?;
    let format: ReportFormat = args.format.as_deref().unwrap_or("markdown").parse()?;
    let seed = args.seed.unwrap_or(0);
    let encodings = parse_list(args.encodings.as_deref().unwrap_or("all"), &EncodingFamily::ALL, str::parse::<EncodingFamily>)?;
    let families = parse_list(args.models.as_deref().unwrap_or("all"), &ModelFamily::ALL, str::parse::<ModelFamily>)?;
    let cfg = ExperimentConfig {
        encodings,
        models: families.iter().map(|&f| args.model_spec(f, seed)).collect(),
        k: args.k.unwrap_or(5),
        seed,
        options: RunOptions {
            inner_cv: args.inner_cv,
            hard_stage1: args.hard_stage1,
            std_kind: if args.sample_std { StdKind::Sample } else { StdKind::Population },
            truncate: args.truncate,
        },
    };
    cfg.validate()?;
    let jobs = match args.jobs {
        Some(0) => return Err(CliError::Usage("--jobs must be at least 1".into())),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let d = load_dataset(&dataset, args.lenient, stderr)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let report = pool.install(|| run_grid(&d, &cfg))?;
    let text = emit_report(&report, format)?;
    write_output(args.out.as_deref(), stdout, text.as_bytes())
}

/// Runs the CLI against explicit streams and returns the exit code.
pub fn run_with(argv: &[String], stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(rendered.as_bytes());
                    0
                }
                _ => {
                    let _ = stderr.write_all(rendered.as_bytes());
                    1
                }
            };
        }
    };
    let result = match cli.command {
        Command::Validate(a) => cmd_validate(a, stdout, stderr),
        Command::Stats(a) => cmd_stats(a, stdout, stderr),
        Command::Encode(a) => cmd_encode(a, stdout, stderr),
        Command::Synth(a) => cmd_synth(a, stdout),
        Command::Run(a) => cmd_run(*a, stdout, stderr),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message());
            e.code()
        }
    }
}

pub fn main(argv: &[String]) -> i32 {
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}
