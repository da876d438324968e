//! Command-line workflows: `fit`, `cv` and `reproduce`.
//!
//! Exit codes: `0` success, `1` configuration error, `2` data error (missing
//! or malformed input, failure to write outputs), `3` solver failure.
//! Data products go to files under `--out`; stdout carries a short summary.
//! Every output file embeds the version and the full [`RunConfig`].

use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::dataset::{self, preprocess, AttributeSelection};
use crate::error::Error;
use crate::experiment::{
    grid_search, reproduce, run_naive, CvPlan, ExperimentReport, HyperGrid, ModelSpec,
    ReproduceConfig, PUBLISHED_SELECTIONS,
};
use crate::model::Approximant;
use crate::operator::NodeSet;
use crate::solver::SolverConfig;
use crate::terms::IndexShape;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Parses `λ` in plain (`1096.6`) or exponent (`e7`, `e^7`) notation.
pub fn parse_lambda(s: &str) -> Result<f64, String> {
    let t = s.trim();
    let value = match t.strip_prefix("e^").or_else(|| t.strip_prefix('e')) {
        Some(exp) => exp
            .parse::<f64>()
            .map(f64::exp)
            .map_err(|_| format!("invalid exponent in `{s}`"))?,
        None => t.parse::<f64>().map_err(|_| format!("invalid λ `{s}`"))?,
    };
    if value >= 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(format!("λ must be finite and nonnegative, got `{s}`"))
    }
}

fn parse_bandwidths(s: &str) -> Result<Vec<usize>, String> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| format!("invalid bandwidth `{t}`"))
        })
        .collect()
}

#[derive(Debug, Parser)]
#[command(
    name = "anova-normal",
    version,
    about = "Interpretable ANOVA regression for Z-scored data"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit one model on the whole dataset and write coefficients and
    /// sensitivity data.
    Fit(FitArgs),
    /// Cross-validate one configuration or a hyperparameter grid.
    Cv(CvArgs),
    /// Run the complete forest-fires benchmark and check it against the
    /// published numbers.
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Forest-fires CSV (defaults to $ANOVA_FORESTFIRES_CSV).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Superposition threshold: maximal interaction order.
    #[arg(long, default_value_t = 2)]
    pub ds: usize,
    /// Bandwidth of order-1 terms.
    #[arg(long, default_value_t = 2)]
    pub n1: usize,
    /// Bandwidth of terms of order ≥ 2.
    #[arg(long, default_value_t = 2)]
    pub n2: usize,
    /// Explicit bandwidth per order, e.g. `2,6,4`; overrides --n1/--n2.
    #[arg(long, value_parser = parse_bandwidths)]
    pub bandwidths: Option<Vec<usize>>,
    #[arg(long, default_value = "fullgrid")]
    pub shape: IndexShape,
    /// Ridge parameter, plain (`1096.6`) or exponent (`e7`, `e^7`) notation.
    #[arg(long, value_parser = parse_lambda, default_value = "e8")]
    pub lambda: f64,
}

impl ModelArgs {
    fn spec(&self) -> Result<ModelSpec, CliError> {
        if self.ds == 0 {
            return Err(CliError::Config("--ds must be at least 1".into()));
        }
        let bandwidths = match &self.bandwidths {
            Some(b) if b.len() >= self.ds => b[..self.ds].to_vec(),
            Some(b) => {
                return Err(CliError::Config(format!(
                    "--bandwidths lists {} orders but --ds is {}",
                    b.len(),
                    self.ds
                )))
            }
            None => (1..=self.ds)
                .map(|o| if o == 1 { self.n1 } else { self.n2 })
                .collect(),
        };
        if let Some(n) = bandwidths.iter().find(|n| **n < 2) {
            return Err(CliError::Config(format!(
                "bandwidths must be at least 2, got {n}"
            )));
        }
        Ok(ModelSpec::new(self.ds, bandwidths, self.shape, self.lambda))
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// STFWI, STM, FWI, M, ALL or a comma-separated attribute list.
    #[arg(long, default_value = "ALL")]
    pub select: String,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Variance share for the superposition dimension.
    #[arg(long, default_value_t = 0.99)]
    pub alpha: f64,
}

#[derive(Debug, Args)]
pub struct CvArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Attribute selections (repeatable). Defaults to ALL, or to the four
    /// benchmark selections with `--grid default`.
    #[arg(long)]
    pub select: Vec<String>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    #[arg(long, default_value_t = 30)]
    pub reps: usize,
    /// Hyperparameter grid; `default` searches N₂ ∈ 2..=10, λ ∈ e^5..e^12.
    #[arg(long)]
    pub grid: Option<GridChoice>,
    /// Also cross-validate the naive mean predictor.
    #[arg(long)]
    pub naive: bool,
    /// Compute Z-score statistics on each training split.
    #[arg(long)]
    pub per_fold_normalization: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GridChoice {
    Default,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// One CV repetition and widened tolerances.
    #[arg(long)]
    pub quick: bool,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    #[arg(long, default_value_t = 30)]
    pub reps: usize,
}

/// Validated configuration of one invocation, embedded in every output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub subcommand: String,
    pub input: PathBuf,
    pub selections: Vec<String>,
    pub model: Option<ModelSpec>,
    pub grid: Option<HyperGrid>,
    pub seed: u64,
    pub folds: Option<usize>,
    pub repetitions: Option<usize>,
    pub quick: bool,
    pub out: PathBuf,
    pub formats: Vec<String>,
}

/// Error classified by exit code.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Data(String),
    Solver(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 1,
            Self::Data(_) => 2,
            Self::Solver(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Config(m) => write!(f, "configuration error: {m}"),
            Self::Data(m) => write!(f, "data error: {m}"),
            Self::Solver(m) => write!(f, "solver failure: {m}"),
        }
    }
}

fn classify(e: &Error) -> fn(String) -> CliError {
    match e {
        Error::Io { .. }
        | Error::Parse { .. }
        | Error::Data(_)
        | Error::ZeroStd(_)
        | Error::Json(_) => CliError::Data,
        Error::NonFinite(_) | Error::ZeroVariance => CliError::Solver,
        Error::Run { source, .. } => classify(source),
        _ => CliError::Config,
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        classify(&e)(e.to_string())
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    version: &'static str,
    config: &'a RunConfig,
    #[serde(flatten)]
    payload: T,
}

struct Outputs<'a> {
    dir: &'a Path,
    config: &'a RunConfig,
}

impl Outputs<'_> {
    fn prepare(&self) -> Result<(), CliError> {
        std::fs::create_dir_all(self.dir)
            .map_err(|e| CliError::Data(format!("cannot create {}: {e}", self.dir.display())))
    }

    fn write(&self, name: &str, content: &str) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, content)
            .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))?;
        Ok(path)
    }

    fn provenance(&self) -> Result<String, CliError> {
        let cfg = serde_json::to_string(self.config).map_err(|e| CliError::Data(e.to_string()))?;
        Ok(format!("anova-normal {VERSION} config={cfg}"))
    }

    fn json<T: Serialize>(&self, name: &str, payload: T) -> Result<PathBuf, CliError> {
        let env = Envelope {
            version: VERSION,
            config: self.config,
            payload,
        };
        let text = serde_json::to_string_pretty(&env).map_err(|e| CliError::Data(e.to_string()))?;
        self.write(name, &(text + "\n"))
    }

    fn csv(&self, name: &str, body: &str) -> Result<PathBuf, CliError> {
        self.write(name, &format!("# {}\n{body}", self.provenance()?))
    }

    fn markdown(&self, name: &str, body: &str) -> Result<PathBuf, CliError> {
        self.write(name, &format!("<!-- {} -->\n\n{body}", self.provenance()?))
    }
}

fn resolve_input(explicit: &Option<PathBuf>) -> Result<PathBuf, CliError> {
    dataset::default_dataset_path(explicit.as_deref()).ok_or_else(|| {
        CliError::Config(format!(
            "no input given: pass --input or set {}",
            dataset::DATASET_ENV
        ))
    })
}

fn parse_selection(s: &str) -> Result<AttributeSelection, CliError> {
    s.parse()
        .map_err(|e: Error| CliError::Config(e.to_string()))
}

fn cmd_fit(args: &FitArgs) -> Result<String, CliError> {
    let spec = args.model.spec()?;
    let selection = parse_selection(&args.select)?;
    if !(0.0..=1.0).contains(&args.alpha) {
        return Err(CliError::Config(format!(
            "--alpha must lie in [0,1], got {}",
            args.alpha
        )));
    }
    let input = resolve_input(&args.data.input)?;
    let config = RunConfig {
        subcommand: "fit".into(),
        input: input.clone(),
        selections: vec![selection.label()],
        model: Some(spec.clone()),
        grid: None,
        seed: args.data.seed,
        folds: None,
        repetitions: None,
        quick: false,
        out: args.data.out.clone(),
        formats: vec!["json".into(), "csv".into()],
    };
    let records = dataset::load_csv(&input)?;
    let data = preprocess(&records, &selection)?;
    let index_set = std::sync::Arc::new(spec.index_set(data.dim())?);
    let fit = Approximant::fit(
        NodeSet::new(data.dim(), data.nodes().to_vec())?,
        data.targets(),
        index_set,
        spec.lambda,
        &SolverConfig::default(),
    )?;
    let approx = fit
        .approximant
        .with_preprocessing(data.preprocessing().clone());
    let report = approx.sensitivity_report(args.alpha)?;

    let out = Outputs {
        dir: &args.data.out,
        config: &config,
    };
    out.prepare()?;
    #[derive(Serialize)]
    struct Fitted<'a> {
        attributes: Vec<&'static str>,
        coefficients: crate::model::CoefficientReport,
        solver: &'a crate::solver::SolverResult,
    }
    out.json(
        "coefficients.json",
        Fitted {
            attributes: data.attributes().iter().map(|a| a.name()).collect(),
            coefficients: approx.coefficient_report(),
            solver: &fit.solver,
        },
    )?;
    out.json("sensitivity.json", &report)?;
    out.csv("ranking.csv", &report.ranking_csv())?;
    out.csv("gsi.csv", &report.gsi_csv())?;

    let mut summary = format!(
        "fit {} rows, {} attributes, |I| = {}, {} LSQR iterations ({:?})\nattribute ranking:\n",
        data.rows(),
        data.dim(),
        approx.index_set().len(),
        fit.solver.iterations,
        fit.solver.termination
    );
    for i in report.ranked_attributes() {
        let a = data.attributes()[i - 1];
        summary.push_str(&format!(
            "  {} ({}): {:.4}\n",
            a.name(),
            a.number(),
            report.ranking[i - 1]
        ));
    }
    summary.push_str(&format!(
        "superposition dimension (α = {}): {}\noutputs written to {}\n",
        args.alpha,
        report.superposition_dimension,
        args.data.out.display()
    ));
    Ok(summary)
}

fn cmd_cv(args: &CvArgs) -> Result<String, CliError> {
    let spec = args.model.spec()?;
    let names: Vec<String> = match (args.select.is_empty(), args.grid) {
        (false, _) => args.select.clone(),
        (true, Some(GridChoice::Default)) => PUBLISHED_SELECTIONS
            .iter()
            .map(|s| s.0.to_string())
            .collect(),
        (true, None) => vec!["ALL".into()],
    };
    let selections = names
        .iter()
        .map(|n| parse_selection(n))
        .collect::<Result<Vec<_>, _>>()?;
    let grid = match args.grid {
        Some(GridChoice::Default) => HyperGrid {
            shape: args.model.shape,
            ..HyperGrid::default()
        },
        None => HyperGrid::singleton(&spec)?,
    };
    grid.specs()?;
    let plan = CvPlan {
        folds: args.folds,
        repetitions: args.reps,
        seed: args.data.seed,
        shuffle: true,
        per_fold_normalization: args.per_fold_normalization,
    };
    if plan.folds < 2 || plan.repetitions == 0 {
        return Err(CliError::Config("need --folds ≥ 2 and --reps ≥ 1".into()));
    }
    let input = resolve_input(&args.data.input)?;
    let config = RunConfig {
        subcommand: "cv".into(),
        input: input.clone(),
        selections: selections.iter().map(AttributeSelection::label).collect(),
        model: args.grid.is_none().then(|| spec.clone()),
        grid: args.grid.map(|_| grid.clone()),
        seed: plan.seed,
        folds: Some(plan.folds),
        repetitions: Some(plan.repetitions),
        quick: false,
        out: args.data.out.clone(),
        formats: vec!["json".into(), "md".into()],
    };
    let records = dataset::load_csv(&input)?;
    let all = preprocess(&records, &AttributeSelection::all())?;
    let solver = SolverConfig::default();
    let mut reports: Vec<ExperimentReport> = Vec::new();
    for sel in &selections {
        eprintln!("cross-validating {}", sel.label());
        let data = all.select(sel)?;
        reports.push(grid_search(&data, &sel.label(), &grid, &plan, &solver)?);
    }
    let naive = if args.naive {
        Some(run_naive(&all, &plan)?)
    } else {
        None
    };

    let out = Outputs {
        dir: &args.data.out,
        config: &config,
    };
    out.prepare()?;
    #[derive(Serialize)]
    struct CvPayload<'a> {
        naive: &'a Option<crate::experiment::ConfigReport>,
        reports: &'a [ExperimentReport],
    }
    out.json(
        "cv_report.json",
        CvPayload {
            naive: &naive,
            reports: &reports,
        },
    )?;
    let mut md = String::from("| selection | best model | MAD (RMSE) |\n|---|---|---|\n");
    if let Some(n) = &naive {
        md.push_str(&format!("| all | Naive | {} |\n", n.cell()));
    }
    for r in &reports {
        md.push_str(&format!(
            "| {} | {} | {} |\n",
            r.selection,
            r.best().model.label(),
            r.best().cell()
        ));
    }
    md.push('\n');
    for r in &reports {
        md.push_str(&r.to_markdown());
        md.push('\n');
    }
    out.markdown("cv_report.md", &md)?;

    let mut summary = String::new();
    if let Some(n) = &naive {
        summary.push_str(&format!("Naive: MAD (RMSE) {}\n", n.cell()));
    }
    for r in &reports {
        summary.push_str(&format!(
            "{}: best {} → MAD (RMSE) {}\n",
            r.selection,
            r.best().model.label(),
            r.best().cell()
        ));
    }
    summary.push_str(&format!("outputs written to {}\n", args.data.out.display()));
    Ok(summary)
}

fn cmd_reproduce(args: &ReproduceArgs) -> Result<String, CliError> {
    if args.folds < 2 || args.reps == 0 {
        return Err(CliError::Config("need --folds ≥ 2 and --reps ≥ 1".into()));
    }
    let cfg = ReproduceConfig {
        seed: args.data.seed,
        quick: args.quick,
        folds: args.folds,
        repetitions: args.reps,
        ..ReproduceConfig::default()
    };
    let input = resolve_input(&args.data.input)?;
    let config = RunConfig {
        subcommand: "reproduce".into(),
        input: input.clone(),
        selections: PUBLISHED_SELECTIONS
            .iter()
            .map(|s| s.0.to_string())
            .collect(),
        model: None,
        grid: None,
        seed: cfg.seed,
        folds: Some(cfg.folds),
        repetitions: Some(cfg.plan().repetitions),
        quick: cfg.quick,
        out: args.data.out.clone(),
        formats: vec!["json".into(), "md".into()],
    };
    let records = dataset::load_csv(&input)?;
    let report = reproduce(&records, &cfg)?;

    let out = Outputs {
        dir: &args.data.out,
        config: &config,
    };
    out.prepare()?;
    out.json("reproduce.json", &report)?;
    out.markdown("reproduce.md", &report.to_markdown())?;

    let mut summary = String::new();
    for c in &report.checks {
        summary.push_str(&format!(
            "[{}] {}: {:.4} (expected {})\n",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.observed,
            c.expected
        ));
    }
    let passed = report.checks.iter().filter(|c| c.passed).count();
    summary.push_str(&format!(
        "{passed}/{} checks passed; outputs written to {}\n",
        report.checks.len(),
        args.data.out.display()
    ));
    Ok(summary)
}

/// Runs a parsed command, returning the stdout summary.
pub fn execute(cli: &Cli) -> Result<String, CliError> {
    match &cli.command {
        Command::Fit(a) => cmd_fit(a),
        Command::Cv(a) => cmd_cv(a),
        Command::Reproduce(a) => cmd_reproduce(a),
    }
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(summary) => {
            print!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
