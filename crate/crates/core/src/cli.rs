//! Command-line front end. JSON lines go to stdout, human-readable
//! progress to stderr. Exit code 1 is a validation error, 2 a runtime one.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::experiments::{batch, hard, mean, one_shot};
use crate::ltl::{parse_formula, Formula, InputSchema, Trace};
use crate::model::{Model, ModelError};
use crate::plot::{axes_svg, history_svg, scene_svg};
use crate::quantloss::{loss_breakdown, LossConfig, LossMode, UntilVariant};
use crate::tasks::{builtin_spec, compose_specs, gen_dataset, load_dataset, load_trace, save_dataset, TaskError, BUILTIN_SPECS};
use crate::training::{evaluate, train, EpochMetrics, ModelConfig, TrainConfig, TrainError};

#[derive(Debug, Parser)]
#[command(name = "ltldmp", version, about = "Movement primitives elaborated with temporal-logic constraints")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic 2-D dataset
    Gen {
        #[arg(long, default_value = "avoid")]
        task: String,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a model and write a checkpoint
    Train(TrainArgs),
    /// Evaluate a checkpoint on a dataset
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Builtin name(s) joined by commas, or a spec file
        #[arg(long)]
        spec: Option<String>,
    },
    /// Evaluate a spec on one stored trace
    Check {
        /// Trace file, or a dataset with --index
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        spec: String,
        #[arg(long, default_value_t = 0)]
        index: usize,
    },
    /// Write an SVG figure
    Plot {
        /// Dataset or trace file
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        index: usize,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        spec: Option<String>,
        /// Metrics history (JSON lines) for a loss-vs-epoch plot
        #[arg(long)]
        metrics: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the one-shot or batch experiment matrix
    Experiments {
        #[arg(long, value_enum, default_value = "one-shot")]
        table: Table,
        #[arg(long, default_value = "avoid,patrol,steady,slow")]
        tasks: String,
        #[arg(long, default_value_t = 5)]
        seeds: u64,
        #[arg(long, default_value_t = 100)]
        train_count: usize,
        #[arg(long, default_value_t = 20)]
        test_count: usize,
        #[arg(long)]
        epochs: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Table {
    OneShot,
    Batch,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum UntilArg {
    Witness,
    AsPrinted,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Builtin name(s) joined by commas, or a spec file; omit for unconstrained
    #[arg(long)]
    pub spec: Option<String>,
    /// Held-out dataset reported in the metrics
    #[arg(long)]
    pub test: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
    #[arg(long, default_value_t = 0.005)]
    pub gamma: f64,
    #[arg(long, default_value_t = 0.0)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 10)]
    pub adv_iters: usize,
    #[arg(long)]
    pub adv_lr: Option<f64>,
    #[arg(long, default_value_t = 200)]
    pub epochs: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    #[arg(long, default_value_t = 32)]
    pub batch: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "witness")]
    pub until: UntilArg,
    #[arg(long)]
    pub no_adversary: bool,
    #[arg(long, default_value_t = 30)]
    pub n_basis: usize,
    #[arg(long, default_value_t = 1000.0)]
    pub output_scale: f64,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the metrics history here
    #[arg(long)]
    pub metrics: Option<PathBuf>,
}

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "error: {m}"),
            CliError::Runtime(m) => write!(f, "runtime error: {m}"),
        }
    }
}

impl From<TaskError> for CliError {
    fn from(e: TaskError) -> Self {
        match e {
            TaskError::Io(_) => CliError::Runtime(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<TrainError> for CliError {
    fn from(e: TrainError) -> Self {
        match e {
            TrainError::Diverged { .. } => CliError::Runtime(e.to_string()),
            TrainError::Model(ModelError::Io(_)) => CliError::Runtime(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        TrainError::Model(e).into()
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

fn emit(value: serde_json::Value) {
    out_line(&value.to_string());
}

// a closed pipe on stdout is not an error worth a panic
fn out_line(line: &str) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout(), "{line}");
}

/// Resolves a spec argument: builtin names joined by commas, or a file.
pub fn load_spec(arg: &str, schema: &InputSchema) -> Result<Formula, CliError> {
    let names: Vec<&str> = arg.split(',').map(str::trim).collect();
    let f = if names.iter().all(|n| BUILTIN_SPECS.contains(n)) {
        let specs = names.iter().map(|n| builtin_spec(n)).collect::<Result<Vec<_>, _>>()?;
        compose_specs(specs).expect("at least one name")
    } else {
        let path = Path::new(arg);
        let text = std::fs::read_to_string(path).map_err(|e| {
            if e.kind() == std::io::ErrorKind::NotFound {
                CliError::Validation(format!("`{arg}` is neither a builtin spec nor a readable file"))
            } else {
                io_err(path, e)
            }
        })?;
        parse_formula(&text, schema).map_err(|e| CliError::Validation(format!("{arg}: {e}")))?
    };
    f.check(schema).map_err(|e| CliError::Validation(e.to_string()))?;
    Ok(f)
}

/// A trajectory with its objects, from either a trace file or a dataset.
fn load_any_trace(path: &Path, index: usize) -> Result<(Trace, Vec<Vec<f64>>, InputSchema, Option<Vec<f64>>), CliError> {
    if let Ok(tf) = load_trace(path) {
        let schema = tf.schema.input_schema();
        return Ok((tf.trace()?, tf.objects, schema, None));
    }
    let ds = load_dataset(path)?;
    let demo = ds
        .demos
        .get(index)
        .ok_or_else(|| CliError::Validation(format!("index {index} out of range for {} demos", ds.len())))?;
    Ok((
        demo.trajectory.clone(),
        demo.objects(&ds.schema),
        ds.schema.input_schema(),
        Some(demo.input.clone()),
    ))
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Gen { task, count, seed, out } => {
            if count == 0 {
                return Err(CliError::Validation("count must be at least 1".into()));
            }
            let ds = gen_dataset(&task, count, seed);
            save_dataset(&ds, &out)?;
            emit(json!({"command": "gen", "task": task, "count": count, "seed": seed, "out": out}));
            Ok(())
        }
        Command::Train(args) => cmd_train(args),
        Command::Eval { model, data, spec } => {
            let m = Model::load(&model)?;
            let ds = load_dataset(&data)?;
            let f = spec.as_deref().map(|s| load_spec(s, &ds.schema.input_schema())).transpose()?;
            let metrics = evaluate(&m, &ds, f.as_ref(), &LossConfig::default())?;
            emit(json!({
                "command": "eval",
                "n": ds.len(),
                "Ld": metrics.imitation,
                "Lc_hard": metrics.constraint_hard,
                "Lc_soft": metrics.constraint_soft,
                "satisfaction": metrics.satisfaction,
            }));
            Ok(())
        }
        Command::Check { trace, spec, index } => {
            let (tr, objects, schema, _) = load_any_trace(&trace, index)?;
            let f = load_spec(&spec, &schema)?;
            let rows = loss_breakdown(&f, &tr, &objects, &LossConfig::default().with_mode(LossMode::Hard))
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            for r in &rows {
                emit(serde_json::to_value(r).expect("row serialises"));
            }
            let top = &rows[0];
            emit(json!({
                "verdict": if top.satisfied { "satisfied" } else { "violated" },
                "loss": top.loss,
            }));
            eprintln!("{}: {}", if top.satisfied { "satisfied" } else { "violated" }, f);
            Ok(())
        }
        Command::Plot {
            data,
            index,
            model,
            spec,
            metrics,
            out,
        } => {
            let svg = if let Some(path) = metrics {
                let text = std::fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
                let history = text
                    .lines()
                    .filter(|l| !l.trim().is_empty())
                    .map(serde_json::from_str::<EpochMetrics>)
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
                history_svg(&history, &path.display().to_string())
            } else {
                let path = data.ok_or_else(|| CliError::Validation("plot needs --data or --metrics".into()))?;
                let (tr, objects, schema, input) = load_any_trace(&path, index)?;
                let learned = match (model, input) {
                    (Some(mp), Some(input)) => Some(Model::load(&mp)?.rollout(&input)?),
                    (Some(_), None) => {
                        return Err(CliError::Validation("--model needs a dataset input, not a trace file".into()))
                    }
                    _ => None,
                };
                let f = spec.as_deref().map(|s| load_spec(s, &schema)).transpose()?;
                if tr.dim() == 2 {
                    scene_svg(&tr, learned.as_ref(), &objects, f.as_ref())
                } else {
                    axes_svg(&tr, learned.as_ref())
                }
            };
            std::fs::write(&out, svg).map_err(|e| io_err(&out, e))?;
            emit(json!({"command": "plot", "out": out}));
            Ok(())
        }
        Command::Experiments {
            table,
            tasks,
            seeds,
            train_count,
            test_count,
            epochs,
        } => {
            let model = ModelConfig::default();
            let mut base = TrainConfig::default();
            if let Some(e) = epochs {
                base.epochs = e;
            }
            let tasks: Vec<&str> = tasks.split(',').map(str::trim).collect();
            match table {
                Table::OneShot => {
                    eprintln!("{:<8} {:>12} {:>12} {:>12} {:>12}", "task", "Ld unc", "Lc unc", "Ld con", "Lc con");
                    for task in tasks {
                        let mut cells = Vec::new();
                        for seed in 0..seeds {
                            let cell = one_shot(task, seed, &model, &base)?;
                            emit(serde_json::to_value(&cell).expect("cell serialises"));
                            cells.push(cell);
                        }
                        let row = [
                            mean(&cells, |c| c.unconstrained.imitation),
                            mean(&cells, |c| hard(&c.unconstrained)),
                            mean(&cells, |c| c.constrained.imitation),
                            mean(&cells, |c| hard(&c.constrained)),
                        ];
                        emit(json!({"table": "one_shot", "task": task, "seeds": seeds,
                            "unconstrained_Ld": row[0], "unconstrained_Lc": row[1],
                            "constrained_Ld": row[2], "constrained_Lc": row[3]}));
                        eprintln!("{task:<8} {:>12.4} {:>12.4} {:>12.4} {:>12.4}", row[0], row[1], row[2], row[3]);
                    }
                }
                Table::Batch => {
                    base.epsilon = 0.01;
                    eprintln!("{:<8} {:>14} {:>14} {:>14}", "task", "unconstrained", "train-only", "adversarial");
                    for task in tasks {
                        let mut cells = Vec::new();
                        for seed in 0..seeds {
                            let cell = batch(task, seed, train_count, test_count, &model, &base)?;
                            emit(serde_json::to_value(&cell).expect("cell serialises"));
                            cells.push(cell);
                        }
                        let row = [
                            mean(&cells, |c| hard(&c.unconstrained)),
                            mean(&cells, |c| hard(&c.train_only)),
                            mean(&cells, |c| hard(&c.adversarial)),
                        ];
                        emit(json!({"table": "batch", "task": task, "seeds": seeds,
                            "unconstrained_Lc": row[0], "train_only_Lc": row[1], "adversarial_Lc": row[2]}));
                        eprintln!("{task:<8} {:>14.4} {:>14.4} {:>14.4}", row[0], row[1], row[2]);
                    }
                }
            }
            Ok(())
        }
    }
}

fn cmd_train(a: TrainArgs) -> Result<(), CliError> {
    let ds = load_dataset(&a.data)?;
    let test = a.test.as_ref().map(load_dataset).transpose()?;
    let f = a.spec.as_deref().map(|s| load_spec(s, &ds.schema.input_schema())).transpose()?;
    let cfg = TrainConfig {
        epochs: a.epochs,
        lr: a.lr,
        eta: if f.is_some() { a.eta } else { 0.0 },
        gamma: a.gamma,
        zeta: LossConfig::default().zeta,
        epsilon: a.epsilon,
        adv_iterations: a.adv_iters,
        adv_lr: a.adv_lr,
        batch_size: a.batch,
        seed: a.seed,
        until_variant: match a.until {
            UntilArg::Witness => UntilVariant::Witness,
            UntilArg::AsPrinted => UntilVariant::AsPrinted,
        },
        adversary_enabled: !a.no_adversary,
    };
    cfg.validate()?;
    let mc = ModelConfig {
        n_basis: a.n_basis,
        output_scale: a.output_scale,
        ..Default::default()
    };
    let mut model = mc.build(&ds.schema, a.seed)?;
    let mut lines = String::new();
    let history = train(&mut model, &ds, test.as_ref(), f.as_ref(), &cfg, |m| {
        let line = serde_json::to_string(m).expect("metrics serialise");
        out_line(&line);
        lines.push_str(&line);
        lines.push('\n');
        if m.epoch % 20 == 0 || m.epoch == cfg.epochs {
            eprintln!("epoch {:>4}  Ld {:.5}  Lc {:?}", m.epoch, m.train_ld, m.train_lc_hard);
        }
    })?;
    model.save(&a.out)?;
    if let Some(p) = &a.metrics {
        std::fs::write(p, lines).map_err(|e| io_err(p, e))?;
    }
    eprintln!("wrote {} after {} epochs", a.out.display(), history.len());
    Ok(())
}

/// Parses arguments, runs, and returns the process exit code.
pub fn main_with_args(args: impl IntoIterator<Item = String>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
