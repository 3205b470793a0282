//! Command-line front end.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::bandit::{Policy, PolicyConfig, PolicyKind};
use crate::binarizer::fit_schema_with_kinds;
use crate::data::{
    class_to_bandit, gen_noisy_xor, load_csv, load_ratings, recommender_to_bandit, BanditProblem,
    ContextEncoder, CsvHints, LabelColumn, TabularDataset,
};
use crate::error::{Error, Result};
use crate::experiment::{aggregate_runs, run_many, save_aggregate_csv, save_trace_csv};
use crate::interpret::{extract_dnf, Polarity};
use crate::presets::{tm_preset, TM_PRESETS};
use crate::seed;
use crate::tm::TmConfig;

#[derive(Debug, Parser)]
#[command(name = "tsetlin-bandit", version, about = "Tsetlin Machine contextual bandits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run independent bandit simulations and write trace CSVs.
    Run(RunArgs),
    /// Generate a synthetic dataset as CSV.
    Gen(GenArgs),
    /// Print per-arm rules of a saved policy.
    Inspect(InspectArgs),
    /// Fit a binarization schema and write the binarized table.
    Binarize(BinarizeArgs),
}

/// Where the rounds come from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DatasetSpec {
    Csv {
        path: PathBuf,
        #[serde(default)]
        hints: CsvHints,
    },
    Xor {
        samples: usize,
        bits: usize,
        flip: f64,
        seed: u64,
    },
    Ratings {
        path: PathBuf,
        rank: usize,
        #[serde(default)]
        top_k_items: Option<usize>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EncodingSpec {
    /// Binary when every value is 0/1, thermometer with `max_bits` otherwise.
    Auto { max_bits: usize },
    Binary,
    Cutoff { cutoff: f64 },
    Thermometer { max_bits: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TmSpec {
    pub num_clauses: usize,
    pub threshold: u32,
    pub specificity: f64,
    pub num_state_bits: u32,
    #[serde(default)]
    pub boost_true_positives: bool,
}

/// A complete, reproducible description of a `run` invocation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub dataset: DatasetSpec,
    pub encoding: EncodingSpec,
    pub policy: PolicyKind,
    pub tm: TmSpec,
    pub epsilon: f64,
    pub refit_interval: u64,
    pub fit_epochs: usize,
    pub alpha: f64,
    pub learning_rate: f64,
    pub horizon: usize,
    pub runs: usize,
    pub seed: u64,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::Config("horizon must be >= 1".into()));
        }
        if self.runs == 0 {
            return Err(Error::Config("runs must be >= 1".into()));
        }
        match &self.dataset {
            DatasetSpec::Csv { path, .. } | DatasetSpec::Ratings { path, .. } if !path.is_file() => Err(Error::io(
                path,
                std::io::Error::new(std::io::ErrorKind::NotFound, "dataset file not found"),
            )),
            _ => Ok(()),
        }
    }

    pub fn policy_config(&self, num_features: usize) -> PolicyConfig {
        let t = &self.tm;
        let tm = TmConfig::new(t.num_clauses, t.threshold, t.specificity, t.num_state_bits, num_features)
            .with_boost(t.boost_true_positives);
        PolicyConfig {
            kind: self.policy,
            epsilon: self.epsilon,
            tm,
            refit_interval: self.refit_interval,
            fit_epochs: self.fit_epochs,
            alpha: self.alpha,
            learning_rate: self.learning_rate,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// CSV path, `gen:xor`, or `ratings:<path>` for user,item,rating triples.
    #[arg(long)]
    pub dataset: Option<String>,
    /// Full run configuration as JSON; replaces all dataset and policy flags.
    #[arg(long, conflicts_with = "dataset")]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "tm-thompson-online")]
    pub policy: PolicyKind,
    #[arg(long, default_value_t = 1000)]
    pub horizon: usize,
    #[arg(long, default_value_t = 10)]
    pub runs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Parallel runs (0 = one per core).
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    /// Also write each run's final policy state as JSON.
    #[arg(long)]
    pub save_model: bool,

    /// Learner configuration preset (see `--preset list`).
    #[arg(long, default_value = "noisy-xor")]
    pub preset: String,
    #[arg(long)]
    pub clauses: Option<usize>,
    #[arg(long)]
    pub threshold: Option<u32>,
    #[arg(long)]
    pub specificity: Option<f64>,
    #[arg(long)]
    pub state_bits: Option<u32>,
    #[arg(long)]
    pub boost: bool,
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 1)]
    pub refit_interval: u64,
    #[arg(long, default_value_t = 1)]
    pub fit_epochs: usize,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.1)]
    pub learning_rate: f64,

    /// Thermometer bits per feature; repeat or comma-separate for per-feature budgets.
    #[arg(long, value_delimiter = ',')]
    pub max_bits: Vec<usize>,
    /// One bit per feature, set when the value is at least this.
    #[arg(long, conflicts_with = "max_bits")]
    pub cutoff: Option<f64>,
    /// Treat feature values as bits as-is.
    #[arg(long, conflicts_with_all = ["max_bits", "cutoff"])]
    pub binary: bool,

    /// Label column name (CSV); defaults to the last column.
    #[arg(long)]
    pub label: Option<String>,
    /// Columns to treat as categorical (CSV).
    #[arg(long, value_delimiter = ',')]
    pub categorical: Vec<String>,
    /// Columns to ignore (CSV).
    #[arg(long, value_delimiter = ',')]
    pub drop: Vec<String>,

    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 12)]
    pub bits: usize,
    #[arg(long, default_value_t = 0.4)]
    pub flip: f64,

    #[arg(long, default_value_t = 10)]
    pub rank: usize,
    #[arg(long)]
    pub top_k_items: Option<usize>,
}

const DATASET_SEED: u64 = 0xda7a;

impl RunArgs {
    pub fn resolve(&self) -> Result<RunConfig> {
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            let cfg: RunConfig = serde_json::from_str(&text)?;
            return Ok(cfg);
        }
        let spec = self
            .dataset
            .as_deref()
            .ok_or_else(|| Error::Config("one of --dataset or --config is required".into()))?;
        let dataset = if spec == "gen:xor" {
            DatasetSpec::Xor {
                samples: self.samples,
                bits: self.bits,
                flip: self.flip,
                seed: seed::derive(self.seed, &[DATASET_SEED]),
            }
        } else if let Some(path) = spec.strip_prefix("ratings:") {
            DatasetSpec::Ratings {
                path: path.into(),
                rank: self.rank,
                top_k_items: self.top_k_items,
            }
        } else if let Some(other) = spec.strip_prefix("gen:") {
            return Err(Error::Config(format!("unknown generator {other:?}")));
        } else {
            DatasetSpec::Csv {
                path: spec.into(),
                hints: CsvHints {
                    label: self.label.clone().map_or(LabelColumn::Last, LabelColumn::Name),
                    categorical: self.categorical.clone(),
                    drop: self.drop.clone(),
                    ..CsvHints::default()
                },
            }
        };
        let encoding = if self.binary {
            EncodingSpec::Binary
        } else if let Some(cutoff) = self.cutoff {
            EncodingSpec::Cutoff { cutoff }
        } else if self.max_bits.len() > 1 {
            EncodingSpec::Thermometer {
                max_bits: self.max_bits.clone(),
            }
        } else {
            EncodingSpec::Auto {
                max_bits: self.max_bits.first().copied().unwrap_or(10),
            }
        };
        let preset = tm_preset(&self.preset).ok_or_else(|| {
            let names: Vec<&str> = TM_PRESETS.iter().map(|p| p.name).collect();
            Error::Config(format!("unknown preset {:?}; known: {}", self.preset, names.join(", ")))
        })?;
        Ok(RunConfig {
            dataset,
            encoding,
            policy: self.policy,
            tm: TmSpec {
                num_clauses: self.clauses.unwrap_or(preset.num_clauses),
                threshold: self.threshold.unwrap_or(preset.threshold),
                specificity: self.specificity.unwrap_or(preset.specificity),
                num_state_bits: self.state_bits.unwrap_or(preset.num_state_bits),
                boost_true_positives: self.boost,
            },
            epsilon: self.epsilon,
            refit_interval: self.refit_interval,
            fit_epochs: self.fit_epochs,
            alpha: self.alpha,
            learning_rate: self.learning_rate,
            horizon: self.horizon,
            runs: self.runs,
            seed: self.seed,
        })
    }
}

fn all_binary(rows: &[Vec<f64>]) -> bool {
    rows.iter().flatten().all(|&v| v == 0.0 || v == 1.0)
}

fn tabular_encoder(d: &TabularDataset, spec: &EncodingSpec) -> Result<ContextEncoder> {
    Ok(match spec {
        EncodingSpec::Binary => ContextEncoder::Binary,
        EncodingSpec::Cutoff { cutoff } => ContextEncoder::Cutoff(*cutoff),
        EncodingSpec::Auto { .. } if all_binary(&d.rows) => ContextEncoder::Binary,
        EncodingSpec::Auto { max_bits } => ContextEncoder::fit_thermometer(d, &vec![*max_bits; d.num_features()])?,
        EncodingSpec::Thermometer { max_bits } => ContextEncoder::fit_thermometer(d, max_bits)?,
    })
}

/// Materializes the dataset and its context encoding.
pub fn build_problem(dataset: &DatasetSpec, encoding: &EncodingSpec) -> Result<BanditProblem> {
    match dataset {
        DatasetSpec::Csv { path, hints } => {
            let d = load_csv(path, hints)?;
            class_to_bandit(&d, &tabular_encoder(&d, encoding)?)
        }
        DatasetSpec::Xor {
            samples,
            bits,
            flip,
            seed,
        } => {
            let d = gen_noisy_xor(*samples, *bits, *flip, *seed)?;
            class_to_bandit(&d, &tabular_encoder(&d, encoding)?)
        }
        DatasetSpec::Ratings {
            path,
            rank,
            top_k_items,
        } => {
            let mut m = load_ratings(path)?;
            if let Some(k) = top_k_items {
                m = m.top_k_items(*k);
            }
            let bandit = recommender_to_bandit(&m.values, *rank)?;
            let columns: Vec<Vec<f64>> = (0..*rank)
                .map(|c| bandit.contexts.iter().map(|row| row[c]).collect())
                .collect();
            let encoder = match encoding {
                EncodingSpec::Binary => ContextEncoder::Binary,
                EncodingSpec::Cutoff { cutoff } => ContextEncoder::Cutoff(*cutoff),
                EncodingSpec::Auto { max_bits } => ContextEncoder::Thermometer(fit_schema_with_kinds(
                    &columns,
                    &vec![*max_bits; *rank],
                    &vec![false; *rank],
                )?),
                EncodingSpec::Thermometer { max_bits } => {
                    ContextEncoder::Thermometer(fit_schema_with_kinds(&columns, max_bits, &vec![false; *rank])?)
                }
            };
            bandit.to_problem(&encoder)
        }
    }
}

/// Executes every run and writes `trace_run_NN.csv`, `aggregate.csv` and
/// `config.json` (plus `model_run_NN.json` with `save_model`) under `out`.
pub fn cmd_run(config: &RunConfig, out: &Path, jobs: usize, save_model: bool) -> Result<()> {
    config.validate()?;
    let problem = build_problem(&config.dataset, &config.encoding)?;
    let policy = config.policy_config(problem.bit_width());
    policy.validate()?;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let config_path = out.join("config.json");
    fs::write(&config_path, serde_json::to_string_pretty(config)? + "\n").map_err(|e| Error::io(&config_path, e))?;

    let results = run_many(&problem, &policy, config.horizon, config.runs, config.seed, jobs)?;
    let width = config.runs.saturating_sub(1).to_string().len().max(2);
    for (run, (trace, state)) in results.iter().enumerate() {
        save_trace_csv(trace, &out.join(format!("trace_run_{run:0width$}.csv")))?;
        if save_model {
            state.save(&out.join(format!("model_run_{run:0width$}.json")))?;
        }
    }
    let traces: Vec<_> = results.into_iter().map(|(t, _)| t).collect();
    let agg = aggregate_runs(&traces)?;
    save_aggregate_csv(&agg, &out.join("aggregate.csv"))?;
    Ok(())
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(subcommand)]
    pub generator: Generator,
}

#[derive(Debug, Subcommand)]
pub enum Generator {
    /// Noisy XOR of the first two bits plus distractor bits.
    Xor {
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        #[arg(long, default_value_t = 12)]
        bits: usize,
        #[arg(long, default_value_t = 0.4)]
        flip: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

pub fn cmd_gen(args: &GenArgs) -> Result<()> {
    match &args.generator {
        Generator::Xor {
            n,
            bits,
            flip,
            seed,
            out,
        } => gen_noisy_xor(*n, *bits, *flip, *seed)?.save_csv(out),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PolarityArg {
    Pos,
    Neg,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    /// Policy state written by `run --save-model`.
    pub model: PathBuf,
    #[arg(long)]
    pub arm: Option<usize>,
    #[arg(long, value_enum, default_value = "pos")]
    pub polarity: PolarityArg,
    #[arg(long, value_enum, default_value = "text")]
    pub format: OutputFormat,
}

pub fn cmd_inspect<W: Write>(args: &InspectArgs, mut out: W) -> Result<()> {
    let policy = Policy::load(&args.model)?;
    if !policy.config().kind.uses_tm() {
        return Err(Error::Config(format!(
            "{} holds a {:?} policy, which has no rules to extract",
            args.model.display(),
            policy.config().kind
        )));
    }
    let num_arms = crate::bandit::BanditPolicy::num_arms(&policy);
    let arms: Vec<usize> = match args.arm {
        Some(a) if a >= num_arms => {
            return Err(Error::Index {
                what: "arm",
                index: a,
                limit: num_arms,
            })
        }
        Some(a) => vec![a],
        None => (0..num_arms).collect(),
    };
    let polarity = match args.polarity {
        PolarityArg::Pos => Polarity::Pos,
        PolarityArg::Neg => Polarity::Neg,
    };
    let mut entries = Vec::new();
    for arm in arms {
        let dnf = policy
            .arm_tm(arm)
            .map(|tm| extract_dnf(tm, polarity))
            .unwrap_or_default();
        match args.format {
            OutputFormat::Text => writeln!(out, "arm {arm}: {dnf}").map_err(|e| Error::io("<stdout>", e))?,
            OutputFormat::Json => {
                let mut v = dnf.to_json();
                v["arm"] = arm.into();
                v["polarity"] = serde_json::to_value(polarity)?;
                entries.push(v);
            }
        }
    }
    if args.format == OutputFormat::Json {
        serde_json::to_writer_pretty(&mut out, &entries)?;
        writeln!(out).map_err(|e| Error::io("<stdout>", e))?;
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct BinarizeArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "10")]
    pub max_bits: Vec<usize>,
    #[arg(long)]
    pub label: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub categorical: Vec<String>,
    /// Output directory for `binarized.csv` and `schema.json`.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

pub fn cmd_binarize(args: &BinarizeArgs) -> Result<()> {
    let hints = CsvHints {
        label: args.label.clone().map_or(LabelColumn::Last, LabelColumn::Name),
        categorical: args.categorical.clone(),
        ..CsvHints::default()
    };
    let d = load_csv(&args.input, &hints)?;
    let max_bits = match args.max_bits.as_slice() {
        [b] => vec![*b; d.num_features()],
        list => list.to_vec(),
    };
    let schema = fit_schema_with_kinds(&d.columns(), &max_bits, &d.categorical_mask())?;
    fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    let schema_path = args.out.join("schema.json");
    fs::write(&schema_path, serde_json::to_string_pretty(&schema)? + "\n").map_err(|e| Error::io(&schema_path, e))?;

    let csv_path = args.out.join("binarized.csv");
    let file = fs::File::create(&csv_path).map_err(|e| Error::io(&csv_path, e))?;
    let mut w = csv::Writer::from_writer(file);
    let mut header: Vec<String> = (1..=schema.width()).map(|i| format!("b{i}")).collect();
    header.push("label".into());
    w.write_record(&header)?;
    for (row, &y) in d.rows.iter().zip(&d.labels) {
        let mut rec: Vec<String> = schema.transform(row)?.bits().iter().map(u8::to_string).collect();
        rec.push(d.class_names[y].clone());
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(&csv_path, e))
}

/// Exit status for a failed command: 2 for bad input (configuration, files,
/// data), 3 for numerical failures, 1 otherwise.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Io { .. } | Error::Data(_) | Error::Json(_) | Error::Csv(_) => 2,
        Error::Numeric { .. } => 3,
        _ => 1,
    }
}

pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => {
            let cfg = args.resolve()?;
            cmd_run(&cfg, &args.out, args.jobs, args.save_model)
        }
        Command::Gen(args) => cmd_gen(&args),
        Command::Inspect(args) => cmd_inspect(&args, std::io::stdout().lock()),
        Command::Binarize(args) => cmd_binarize(&args),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("tsetlin-bandit").chain(args.iter().copied())).unwrap()
    }

    fn run_args(cli: Cli) -> RunArgs {
        match cli.command {
            Command::Run(a) => a,
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn resolves_xor_defaults() {
        let cfg = run_args(parse(&["run", "--dataset", "gen:xor", "--policy", "tm-eps-greedy"]))
            .resolve()
            .unwrap();
        assert!(matches!(cfg.dataset, DatasetSpec::Xor { samples: 10_000, bits: 12, .. }));
        assert_eq!(cfg.tm.num_clauses, 1000);
        assert_eq!(cfg.tm.threshold, 700);
        assert_eq!(cfg.policy, PolicyKind::TmEpsGreedy);
        assert_eq!(cfg.runs, 10);
    }

    #[test]
    fn resolves_overrides_and_encodings() {
        let cfg = run_args(parse(&[
            "run",
            "--dataset",
            "iris.csv",
            "--preset",
            "iris",
            "--clauses",
            "40",
            "--max-bits",
            "4,4,2,2",
            "--label",
            "species",
        ]))
        .resolve()
        .unwrap();
        assert_eq!(cfg.tm.num_clauses, 40);
        assert_eq!(cfg.tm.threshold, 1000);
        assert_eq!(cfg.encoding, EncodingSpec::Thermometer { max_bits: vec![4, 4, 2, 2] });
        match cfg.dataset {
            DatasetSpec::Csv { hints, .. } => assert_eq!(hints.label, LabelColumn::Name("species".into())),
            other => panic!("{other:?}"),
        }
        let cut = run_args(parse(&["run", "--dataset", "ratings:r.csv", "--cutoff", "75"]))
            .resolve()
            .unwrap();
        assert_eq!(cut.encoding, EncodingSpec::Cutoff { cutoff: 75.0 });
        assert!(matches!(cut.dataset, DatasetSpec::Ratings { rank: 10, .. }));
    }

    #[test]
    fn bad_preset_and_generator() {
        let a = run_args(parse(&["run", "--dataset", "gen:xor", "--preset", "nope"]));
        assert!(matches!(a.resolve(), Err(Error::Config(_))));
        let b = run_args(parse(&["run", "--dataset", "gen:spiral"]));
        assert!(matches!(b.resolve(), Err(Error::Config(_))));
        assert!(Cli::try_parse_from(["tsetlin-bandit", "run", "--policy", "greedy"]).is_err());
    }

    #[test]
    fn run_config_round_trips() {
        let cfg = run_args(parse(&["run", "--dataset", "gen:xor", "--horizon", "5"])).resolve().unwrap();
        let back: RunConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn validation() {
        let mut cfg = run_args(parse(&["run", "--dataset", "gen:xor"])).resolve().unwrap();
        cfg.horizon = 0;
        assert!(cfg.validate().is_err());
        cfg.horizon = 1;
        cfg.dataset = DatasetSpec::Csv {
            path: "/no/such/file.csv".into(),
            hints: CsvHints::default(),
        };
        let err = cfg.validate().unwrap_err();
        assert_eq!(exit_code(&err), 2);
        assert!(err.to_string().contains("/no/such/file.csv"));
    }
}
