use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ppr_core::ela::FeatureConfig;
use ppr_core::evaluation::{
    relative_advantage, run_evaluation_tables, ClassSource, EvalOptions, Scenario, ScenarioReport,
};
use ppr_core::io::{
    compute_feature_table, generate_performance, load_feature_table, load_manifest,
    load_performance_table, save_manifest, write_features, write_performance, Manifest, Optimizer,
    SuiteConfig,
};
use ppr_core::personalize::{train_personalized, TrainOptions, WeightSource};
use ppr_core::target::TargetTransform;
use ppr_core::trees::{enumerate_grid, RMConfig};
use ppr_core::{Error, Result};

#[derive(Parser)]
#[command(name = "ppr", version, about = "Personalized performance regression for black-box optimizers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute landscape features for the built-in suite, or validate and re-export a table.
    Features(FeaturesArgs),
    /// Run a simple optimizer on the built-in suite and write fixed-budget precisions.
    Performance(PerformanceArgs),
    /// Train a personalized model and write its manifest.
    Train(TrainArgs),
    /// Predict class and performance for every row of a feature table.
    Predict(PredictArgs),
    /// Cross-validate ensembles against single-model baselines.
    Evaluate(EvaluateArgs),
    /// Render a saved evaluation report.
    Report(ReportArgs),
}

#[derive(Args, Clone)]
struct SuiteArgs {
    /// Search-space dimension of the built-in suite.
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Problem ids, e.g. `1-24` or `1,6,15`.
    #[arg(long, default_value = "1-24")]
    problems: String,
    /// Instance ids.
    #[arg(long, default_value = "1-5")]
    instances: String,
}

impl SuiteArgs {
    fn config(&self) -> Result<SuiteConfig> {
        Ok(SuiteConfig {
            dim: self.dim,
            problems: parse_ids(&self.problems)?,
            instances: parse_ids(&self.instances)?,
        })
    }
}

#[derive(Args)]
struct FeaturesArgs {
    #[command(flatten)]
    suite: SuiteArgs,
    /// Sample size per instance is multiplier * dim.
    #[arg(long, default_value_t = 50)]
    multiplier: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Read an existing feature table instead of computing one.
    #[arg(long)]
    import: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum OptimizerArg {
    RandomSearch,
    OnePlusOneEs,
}

impl From<OptimizerArg> for Optimizer {
    fn from(o: OptimizerArg) -> Self {
        match o {
            OptimizerArg::RandomSearch => Optimizer::RandomSearch,
            OptimizerArg::OnePlusOneEs => Optimizer::OnePlusOneEs,
        }
    }
}

#[derive(Args)]
struct PerformanceArgs {
    #[command(flatten)]
    suite: SuiteArgs,
    #[arg(long, value_enum, default_value = "random-search")]
    optimizer: OptimizerArg,
    /// Comma-separated evaluation budgets.
    #[arg(long, default_value = "250,500,1000")]
    budgets: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TargetArg {
    Raw,
    Log,
}

impl From<TargetArg> for TargetTransform {
    fn from(t: TargetArg) -> Self {
        match t {
            TargetArg::Raw => TargetTransform::Raw,
            TargetArg::Log => TargetTransform::NaturalLog,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum WeightingArg {
    TrainingFit,
    HoldOut,
}

#[derive(Args, Clone)]
struct ModelArgs {
    #[arg(long)]
    algorithm: Option<String>,
    #[arg(long)]
    budget: u64,
    #[arg(long, value_enum, default_value = "log")]
    target: TargetArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// File with one canonical config name per line; the full grid otherwise.
    #[arg(long)]
    grid: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "training-fit")]
    weighting: WeightingArg,
    /// With hold-out weighting, keep the reduced fits instead of refitting.
    #[arg(long)]
    no_refit: bool,
}

impl ModelArgs {
    fn train_options(&self) -> TrainOptions {
        TrainOptions {
            target_transform: self.target.into(),
            seed: self.seed,
            weighting: match self.weighting {
                WeightingArg::TrainingFit => WeightSource::TrainingFit,
                WeightingArg::HoldOut => WeightSource::HoldOut,
            },
            refit_selected: !self.no_refit,
            ..TrainOptions::default()
        }
    }

    fn grid(&self) -> Result<Vec<RMConfig>> {
        match &self.grid {
            None => Ok(enumerate_grid()),
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
                let grid = text
                    .lines()
                    .map(str::trim)
                    .filter(|l| !l.is_empty() && !l.starts_with('#'))
                    .map(str::parse)
                    .collect::<Result<Vec<RMConfig>>>()?;
                if grid.is_empty() {
                    return Err(Error::Data(format!("{}: no configs", path.display())));
                }
                Ok(grid)
            }
        }
    }
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    features: PathBuf,
    #[arg(long)]
    performance: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
    /// Instance ids to train on.
    #[arg(long, default_value = "1-5")]
    train_instances: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    features: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Feature table; computed from the built-in suite when absent.
    #[arg(long)]
    features: Option<PathBuf>,
    /// Performance table; generated with --optimizer when absent.
    #[arg(long)]
    performance: Option<PathBuf>,
    #[command(flatten)]
    suite: SuiteArgs,
    #[arg(long, default_value_t = 400)]
    multiplier: usize,
    #[arg(long, value_enum, default_value = "random-search")]
    optimizer: OptimizerArg,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    /// Skip the Best-test baseline, which looks at test errors.
    #[arg(long)]
    no_best_test: bool,
    /// Feed true classes to Ensemble-class instead of the classifier.
    #[arg(long)]
    oracle_classes: bool,
    /// Machine-readable report (JSON).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    confusion: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    report: PathBuf,
    /// `a:b` prints median(b) - median(a) per problem, e.g. ensemble-class:best-train.
    #[arg(long)]
    compare: Option<String>,
    /// Compare means instead of medians.
    #[arg(long)]
    mean: bool,
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source: e,
    }
}

fn parse_ids(spec: &str) -> Result<Vec<u32>> {
    let bad = || Error::Data(format!("bad id list `{spec}`"));
    let mut ids = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b): (u32, u32) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
                if a > b {
                    return Err(bad());
                }
                ids.extend(a..=b);
            }
            None => ids.push(part.parse().map_err(|_| bad())?),
        }
    }
    ids.sort_unstable();
    ids.dedup();
    if ids.is_empty() {
        return Err(bad());
    }
    Ok(ids)
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => fs::write(path, bytes).map_err(|e| io_err(path, e)),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| io_err(Path::new("<stdout>"), e)),
    }
}

fn features(args: FeaturesArgs) -> Result<()> {
    let table = match &args.import {
        Some(path) => load_feature_table(path)?,
        None => compute_feature_table(
            &args.suite.config()?,
            &FeatureConfig::with_multiplier(args.multiplier, args.seed),
        )?,
    };
    let mut buf = Vec::new();
    write_features(&mut buf, &table)?;
    emit(args.out.as_deref(), &buf)?;
    eprintln!("{} feature rows", table.len());
    Ok(())
}

fn performance(args: PerformanceArgs) -> Result<()> {
    let budgets: Vec<u64> = parse_ids(&args.budgets)?.into_iter().map(u64::from).collect();
    let records = generate_performance(&args.suite.config()?, args.optimizer.into(), &budgets, args.seed)?;
    let mut buf = Vec::new();
    write_performance(&mut buf, &records)?;
    emit(args.out.as_deref(), &buf)
}

fn require_algorithm(model: &ModelArgs, fallback: Option<&str>) -> Result<String> {
    model
        .algorithm
        .clone()
        .or_else(|| fallback.map(str::to_string))
        .ok_or_else(|| Error::Data("--algorithm is required with an external performance table".into()))
}

fn train(args: TrainArgs) -> Result<()> {
    let features = load_feature_table(&args.features)?;
    let perf = load_performance_table(&args.performance)?;
    let algorithm = require_algorithm(&args.model, None)?;
    let instances = parse_ids(&args.train_instances)?;
    let model = train_personalized(
        &features,
        &perf,
        &algorithm,
        args.model.budget,
        &instances,
        &args.model.grid()?,
        &args.model.train_options(),
    )?;
    let manifest = Manifest::new(model, &algorithm, args.model.budget, &instances);
    save_manifest(&args.out, &manifest)?;
    eprintln!(
        "trained {} class ensembles, manifest at {}",
        manifest.classes.len(),
        args.out.display()
    );
    Ok(())
}

fn predict(args: PredictArgs) -> Result<()> {
    let manifest = load_manifest(&args.model)?;
    let rows = load_feature_table(&args.features)?;
    let mut out = String::from("problem_id,instance_id,predicted_class,prediction\n");
    for fv in &rows {
        let (y, class) = ppr_core::personalize::predict(&manifest.model, fv)?;
        out.push_str(&format!("{},{},{class},{y}\n", fv.problem_id, fv.instance_id));
    }
    emit(args.out.as_deref(), out.as_bytes())
}

fn evaluate(args: EvaluateArgs) -> Result<()> {
    let start = Instant::now();
    let suite = args.suite.config()?;
    let features = match &args.features {
        Some(p) => load_feature_table(p)?,
        None => compute_feature_table(&suite, &FeatureConfig::with_multiplier(args.multiplier, args.model.seed))?,
    };
    let optimizer: Optimizer = args.optimizer.into();
    let (perf, algorithm) = match &args.performance {
        Some(p) => (load_performance_table(p)?, require_algorithm(&args.model, None)?),
        None => (
            generate_performance(&suite, optimizer, &[args.model.budget], args.model.seed)?,
            optimizer.name().to_string(),
        ),
    };
    let opts = EvalOptions {
        folds: args.folds,
        seed: args.model.seed,
        train: args.model.train_options(),
        class_source: if args.oracle_classes {
            ClassSource::Oracle
        } else {
            ClassSource::Trained
        },
        best_test: !args.no_best_test,
        algorithm,
        budget: args.model.budget,
        sample_multiplier: args.features.is_none().then_some(args.multiplier),
        dim: args.features.is_none().then_some(suite.dim),
    };
    let result = run_evaluation_tables(&features, &perf, &args.model.grid()?, &opts)?;
    print!("{}", result.report.render_table(Some(&result.confusion)));
    if let Some(path) = &args.out {
        fs::write(path, result.report.to_json()?).map_err(|e| io_err(path, e))?;
    }
    if let Some(path) = &args.confusion {
        fs::write(path, result.confusion.to_csv()).map_err(|e| io_err(path, e))?;
    }
    eprintln!("evaluation finished in {:.1} s", start.elapsed().as_secs_f64());
    Ok(())
}

fn report(args: ReportArgs) -> Result<()> {
    let text = fs::read_to_string(&args.report).map_err(|e| io_err(&args.report, e))?;
    let report = ScenarioReport::from_json(&text)?;
    match &args.compare {
        None => print!("{}", report.render_table(None)),
        Some(spec) => {
            let (a, b) = spec
                .split_once(':')
                .ok_or_else(|| Error::Data(format!("--compare expects `a:b`, got `{spec}`")))?;
            let (a, b): (Scenario, Scenario) = (a.parse()?, b.parse()?);
            let pick = |s| if args.mean { report.means(s) } else { report.medians(s) };
            let adv = relative_advantage(&pick(a)?, &pick(b)?)?;
            println!("problem,{}_minus_{}", b.name(), a.name());
            for (p, v) in &adv {
                println!("{p},{v}");
            }
            let wins = adv.values().filter(|v| **v > 0.0).count();
            eprintln!("{} better on {wins}/{} problems", a.name(), adv.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { 1 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Features(a) => features(a),
        Command::Performance(a) => performance(a),
        Command::Train(a) => train(a),
        Command::Predict(a) => predict(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Report(a) => report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
