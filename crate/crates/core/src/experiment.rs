//! Cross-validation harness, error metrics, hyperparameter search, the naive
//! baseline and the forest-fires benchmark reproduction.

use std::fmt::Write as _;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{
    inverse_target, preprocess, Attribute, AttributeSelection, DesignMatrix, RawRecord,
    CANONICAL_ROWS,
};
use crate::error::{Error, Result};
use crate::model::Approximant;
use crate::operator::{GroupedOperator, NodeSet};
use crate::solver::SolverConfig;
use crate::terms::{build_index_set, build_term_set, BandwidthSchedule, IndexSet, IndexShape};

fn check_pair(pred: &[f64], truth: &[f64]) -> Result<()> {
    if pred.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            found: pred.len(),
        });
    }
    if pred.is_empty() {
        return Err(Error::InvalidArgument(
            "metrics need at least one pair".into(),
        ));
    }
    Ok(())
}

/// Mean absolute deviation `(1/n) Σ |predᵢ − truthᵢ|`.
pub fn mad(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check_pair(pred, truth)?;
    Ok(pred
        .iter()
        .zip(truth)
        .map(|(p, t)| (p - t).abs())
        .sum::<f64>()
        / pred.len() as f64)
}

/// Root mean square error `sqrt((1/n) Σ (predᵢ − truthᵢ)²)`.
pub fn rmse(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check_pair(pred, truth)?;
    let mse = pred
        .iter()
        .zip(truth)
        .map(|(p, t)| (p - t).powi(2))
        .sum::<f64>()
        / pred.len() as f64;
    Ok(mse.sqrt())
}

/// Predicts the mean training target for every input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NaiveBaseline {
    mean: f64,
}

impl NaiveBaseline {
    pub fn fit(train: &[f64]) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::InvalidArgument(
                "naive baseline needs training targets".into(),
            ));
        }
        Ok(Self {
            mean: train.iter().sum::<f64>() / train.len() as f64,
        })
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn predict(&self, n: usize) -> Vec<f64> {
        vec![self.mean; n]
    }
}

/// Repeated k-fold cross-validation protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CvPlan {
    pub folds: usize,
    pub repetitions: usize,
    pub seed: u64,
    pub shuffle: bool,
    /// Re-derive the Z-score statistics from each training split instead of
    /// the whole dataset.
    pub per_fold_normalization: bool,
}

impl Default for CvPlan {
    fn default() -> Self {
        Self {
            folds: 10,
            repetitions: 30,
            seed: 0,
            shuffle: true,
            per_fold_normalization: false,
        }
    }
}

impl CvPlan {
    pub fn validate(&self, rows: usize) -> Result<()> {
        if self.folds < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 folds, got {}",
                self.folds
            )));
        }
        if self.repetitions == 0 {
            return Err(Error::InvalidArgument(
                "need at least one repetition".into(),
            ));
        }
        if rows < self.folds {
            return Err(Error::InvalidArgument(format!(
                "{rows} rows cannot be split into {} folds",
                self.folds
            )));
        }
        Ok(())
    }

    /// Test folds of one repetition. The folds partition `0..rows`; the first
    /// `rows % folds` folds hold one extra record.
    pub fn test_folds(&self, rows: usize, repetition: usize) -> Vec<Vec<usize>> {
        let mut order: Vec<usize> = (0..rows).collect();
        if self.shuffle {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            rng.set_stream(repetition as u64);
            order.shuffle(&mut rng);
        }
        let base = rows / self.folds;
        let extra = rows % self.folds;
        let mut start = 0;
        (0..self.folds)
            .map(|f| {
                let len = base + usize::from(f < extra);
                let fold = order[start..start + len].to_vec();
                start += len;
                fold
            })
            .collect()
    }
}

fn lambda_label(lambda: f64) -> String {
    if lambda > 0.0 {
        let e = lambda.ln();
        if (e - e.round()).abs() < 1e-9 {
            return format!("e^{}", e.round() as i64);
        }
    }
    format!("{lambda}")
}

/// One ANOVA model configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub d_s: usize,
    /// `N_1, …, N_{d_s}`.
    pub bandwidths: Vec<usize>,
    pub shape: IndexShape,
    pub lambda: f64,
}

impl ModelSpec {
    pub fn new(d_s: usize, bandwidths: Vec<usize>, shape: IndexShape, lambda: f64) -> Self {
        Self {
            d_s,
            bandwidths,
            shape,
            lambda,
        }
    }

    pub fn index_set(&self, d: usize) -> Result<IndexSet> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "lambda must be finite and nonnegative, got {}",
                self.lambda
            )));
        }
        let terms = build_term_set(d, self.d_s.min(d))?;
        let schedule = BandwidthSchedule::new(self.bandwidths.clone(), self.shape)?;
        build_index_set(&terms, &schedule)
    }

    pub fn label(&self) -> String {
        let n: Vec<String> = self.bandwidths.iter().map(usize::to_string).collect();
        format!(
            "d_s={} N=({}) {} λ={}",
            self.d_s,
            n.join(","),
            self.shape,
            lambda_label(self.lambda)
        )
    }
}

/// Model evaluated in a CV run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelKind {
    Naive,
    Anova(ModelSpec),
}

impl ModelKind {
    pub fn label(&self) -> String {
        match self {
            Self::Naive => "Naive".to_string(),
            Self::Anova(spec) => spec.label(),
        }
    }
}

/// Scores of one fold of one repetition, measured in hectares.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunScore {
    pub repetition: usize,
    pub fold: usize,
    pub mad: f64,
    pub rmse: f64,
    /// LSQR iterations; zero for the naive baseline.
    pub iterations: usize,
    pub converged: bool,
}

/// Aggregated CV result of one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigReport {
    pub model: ModelKind,
    /// Number of basis functions, zero for the naive baseline.
    pub basis_size: usize,
    pub mean_mad: f64,
    pub mean_rmse: f64,
    pub runs: Vec<RunScore>,
}

impl ConfigReport {
    fn from_runs(model: ModelKind, basis_size: usize, runs: Vec<RunScore>) -> Self {
        let n = runs.len() as f64;
        let mean_mad = runs.iter().map(|r| r.mad).sum::<f64>() / n;
        let mean_rmse = runs.iter().map(|r| r.rmse).sum::<f64>() / n;
        Self {
            model,
            basis_size,
            mean_mad,
            mean_rmse,
            runs,
        }
    }

    /// `MAD (RMSE)` with two decimals, as in the benchmark tables.
    pub fn cell(&self) -> String {
        format!("{:.2} ({:.2})", self.mean_mad, self.mean_rmse)
    }
}

/// Split of one CV run: training and test rows.
fn split(folds: &[Vec<usize>], f: usize) -> (Vec<usize>, &[usize]) {
    let train = folds
        .iter()
        .enumerate()
        .filter(|(g, _)| *g != f)
        .flat_map(|(_, fold)| fold.iter().copied())
        .collect();
    (train, &folds[f])
}

/// Executes `run` for every (repetition, fold) in parallel and returns the
/// scores in (repetition, fold) order.
fn for_each_run<F>(rows: usize, plan: &CvPlan, run: F) -> Result<Vec<RunScore>>
where
    F: Fn(usize, usize, &[usize], &[usize]) -> Result<RunScore> + Sync,
{
    plan.validate(rows)?;
    let partitions: Vec<Vec<Vec<usize>>> = (0..plan.repetitions)
        .map(|r| plan.test_folds(rows, r))
        .collect();
    let jobs: Vec<(usize, usize)> = (0..plan.repetitions)
        .flat_map(|r| (0..plan.folds).map(move |f| (r, f)))
        .collect();
    jobs.par_iter()
        .map(|&(r, f)| {
            let (train, test) = split(&partitions[r], f);
            run(r, f, &train, test).map_err(|source| Error::Run {
                repetition: r,
                fold: f,
                source: Box::new(source),
            })
        })
        .collect()
}

/// Cross-validates the naive mean predictor on the hectare scale.
pub fn run_naive(data: &DesignMatrix, plan: &CvPlan) -> Result<ConfigReport> {
    let areas = data.areas();
    let runs = for_each_run(data.rows(), plan, |r, f, train, test| {
        let train_y: Vec<f64> = train.iter().map(|&i| areas[i]).collect();
        let truth: Vec<f64> = test.iter().map(|&i| areas[i]).collect();
        let pred = NaiveBaseline::fit(&train_y)?.predict(test.len());
        Ok(RunScore {
            repetition: r,
            fold: f,
            mad: mad(&pred, &truth)?,
            rmse: rmse(&pred, &truth)?,
            iterations: 0,
            converged: true,
        })
    })?;
    Ok(ConfigReport::from_runs(ModelKind::Naive, 0, runs))
}

/// Cross-validates one ANOVA configuration: fit on `ln(1 + area)`, predict the
/// test split, map back to hectares and score.
pub fn run_cv(
    data: &DesignMatrix,
    spec: &ModelSpec,
    plan: &CvPlan,
    solver: &SolverConfig,
) -> Result<ConfigReport> {
    let index_set = Arc::new(spec.index_set(data.dim())?);
    let d = data.dim();
    let runs = for_each_run(data.rows(), plan, |r, f, train, test| {
        let (train_x, test_x) = if plan.per_fold_normalization {
            let pre = data.fit_preprocessing(train)?;
            (data.gather_with(train, &pre), data.gather_with(test, &pre))
        } else {
            (data.gather(train), data.gather(test))
        };
        let train_y: Vec<f64> = train.iter().map(|&i| data.targets()[i]).collect();
        let op = GroupedOperator::new(NodeSet::new(d, train_x)?, index_set.clone())?;
        let fit = Approximant::fit_operator(&op, &train_y, spec.lambda, solver)?;
        let pred: Vec<f64> = fit
            .approximant
            .evaluate_many(&test_x)?
            .into_iter()
            .map(inverse_target)
            .collect();
        let truth: Vec<f64> = test.iter().map(|&i| data.areas()[i]).collect();
        Ok(RunScore {
            repetition: r,
            fold: f,
            mad: mad(&pred, &truth)?,
            rmse: rmse(&pred, &truth)?,
            iterations: fit.solver.iterations,
            converged: fit.solver.converged(),
        })
    })?;
    Ok(ConfigReport::from_runs(
        ModelKind::Anova(spec.clone()),
        index_set.len(),
        runs,
    ))
}

/// Candidate configurations for the joint search over bandwidths and `λ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperGrid {
    pub d_s: usize,
    pub n1: Vec<usize>,
    pub n2: Vec<usize>,
    pub lambdas: Vec<f64>,
    pub shape: IndexShape,
}

impl Default for HyperGrid {
    /// `N_1 = 2`, `N_2 ∈ {2,…,10}`, `λ ∈ {e^5,…,e^12}`, diagonal shape.
    fn default() -> Self {
        Self {
            d_s: 2,
            n1: vec![2],
            n2: (2..=10).collect(),
            lambdas: (5..=12).map(|e| (e as f64).exp()).collect(),
            shape: IndexShape::Diagonal,
        }
    }
}

impl HyperGrid {
    pub fn singleton(spec: &ModelSpec) -> Result<Self> {
        match spec.bandwidths.as_slice() {
            [n1] => Ok(Self {
                d_s: spec.d_s,
                n1: vec![*n1],
                n2: vec![],
                lambdas: vec![spec.lambda],
                shape: spec.shape,
            }),
            [n1, n2] => Ok(Self {
                d_s: spec.d_s,
                n1: vec![*n1],
                n2: vec![*n2],
                lambdas: vec![spec.lambda],
                shape: spec.shape,
            }),
            _ => Err(Error::InvalidArgument(
                "hyperparameter grids cover at most two bandwidths".into(),
            )),
        }
    }

    /// All configurations in (N₁, N₂, λ) order.
    pub fn specs(&self) -> Result<Vec<ModelSpec>> {
        let nonempty = !self.n1.is_empty()
            && !self.lambdas.is_empty()
            && (self.d_s < 2 || !self.n2.is_empty());
        if !nonempty || self.d_s == 0 || self.d_s > 2 {
            return Err(Error::InvalidArgument(
                "grid needs d_s ∈ {1,2} and nonempty N and λ candidates".into(),
            ));
        }
        if let Some(n) = self.n1.iter().chain(&self.n2).find(|n| **n < 2) {
            return Err(Error::InvalidArgument(format!(
                "bandwidths must be ≥ 2, got {n}"
            )));
        }
        if let Some(l) = self.lambdas.iter().find(|l| !(**l >= 0.0 && l.is_finite())) {
            return Err(Error::InvalidArgument(format!(
                "λ must be finite and ≥ 0, got {l}"
            )));
        }
        let mut out = Vec::new();
        for &n1 in &self.n1 {
            let second: Vec<Option<usize>> = if self.d_s == 1 {
                vec![None]
            } else {
                self.n2.iter().map(|&n| Some(n)).collect()
            };
            for n2 in second {
                for &lambda in &self.lambdas {
                    let bandwidths = std::iter::once(n1).chain(n2).collect();
                    out.push(ModelSpec::new(self.d_s, bandwidths, self.shape, lambda));
                }
            }
        }
        Ok(out)
    }
}

/// Result of a grid search for one attribute selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub selection: String,
    pub rows: usize,
    pub plan: CvPlan,
    pub solver: SolverConfig,
    /// Every evaluated configuration in grid order.
    pub configs: Vec<ConfigReport>,
    /// Position of the configuration with the lowest mean MAD.
    pub best: usize,
}

impl ExperimentReport {
    pub fn best(&self) -> &ConfigReport {
        &self.configs[self.best]
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Markdown table with one line per configuration, best marked.
    pub fn to_markdown(&self) -> String {
        let mut out = format!(
            "### {} ({} rows, {}×{}-fold CV)\n\n| model | |I| | MAD (RMSE) | |\n|---|---|---|---|\n",
            self.selection, self.rows, self.plan.repetitions, self.plan.folds
        );
        for (i, c) in self.configs.iter().enumerate() {
            let mark = if i == self.best { "best" } else { "" };
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} |",
                c.model.label(),
                c.basis_size,
                c.cell(),
                mark
            );
        }
        out
    }
}

/// Runs [`run_cv`] for every grid configuration and selects the lowest mean
/// MAD (ties keep the earlier configuration).
pub fn grid_search(
    data: &DesignMatrix,
    selection: &str,
    grid: &HyperGrid,
    plan: &CvPlan,
    solver: &SolverConfig,
) -> Result<ExperimentReport> {
    let configs = grid
        .specs()?
        .iter()
        .map(|spec| run_cv(data, spec, plan, solver))
        .collect::<Result<Vec<_>>>()?;
    let best = configs.iter().enumerate().fold(0, |b, (i, c)| {
        if c.mean_mad < configs[b].mean_mad {
            i
        } else {
            b
        }
    });
    Ok(ExperimentReport {
        selection: selection.to_string(),
        rows: data.rows(),
        plan: *plan,
        solver: *solver,
        configs,
        best,
    })
}

/// A pass/fail comparison against a published value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub observed: f64,
    pub expected: String,
    pub passed: bool,
}

impl Check {
    fn within(name: impl Into<String>, observed: f64, target: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            observed,
            expected: format!("{target} ± {}", (tol * 1e6).round() / 1e6),
            passed: (observed - target).abs() <= tol,
        }
    }

    fn at_most(name: impl Into<String>, observed: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            observed,
            expected: format!("≤ {bound}"),
            passed: observed <= bound,
        }
    }

    fn flag(name: impl Into<String>, ok: bool, expected: &str) -> Self {
        Self {
            name: name.into(),
            observed: f64::from(u8::from(ok)),
            expected: expected.to_string(),
            passed: ok,
        }
    }
}

/// Published benchmark numbers of the ANOVA model per attribute selection:
/// (selection, N₁, N₂, ln λ, |I|, MAD, RMSE).
pub const PUBLISHED_SELECTIONS: [(&str, usize, usize, i32, usize, f64, f64); 4] = [
    ("STFWI", 2, 6, 9, 149, 12.75, 45.77),
    ("STM", 2, 10, 10, 261, 12.81, 46.7),
    ("FWI", 2, 4, 8, 23, 12.76, 46.09),
    ("M", 2, 8, 7, 47, 12.65, 45.69),
];

/// Published naive baseline (MAD, RMSE).
pub const PUBLISHED_NAIVE: (f64, f64) = (18.61, 63.7);

/// Published attribute ranking of the full-attribute model with N = (2, 2).
pub const PUBLISHED_RANKING: [(Attribute, f64); 3] = [
    (Attribute::Month, 0.3014967904608072),
    (Attribute::Dc, 0.2060387544136121),
    (Attribute::Temp, 0.15801317797015244),
];

/// Published three-attribute follow-up (MAD, RMSE) and its acceptance bounds.
pub const PUBLISHED_FOLLOW_UP: (f64, f64) = (12.64, 45.57);
const FOLLOW_UP_BOUNDS: (f64, f64) = (12.9, 47.0);

/// Settings of the benchmark reproduction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReproduceConfig {
    pub seed: u64,
    /// One CV repetition instead of the full protocol, with tolerances
    /// widened by [`QUICK_TOLERANCE_FACTOR`].
    pub quick: bool,
    pub folds: usize,
    pub repetitions: usize,
    pub solver: SolverConfig,
    /// Skip the check that the file has the canonical number of records.
    pub allow_noncanonical: bool,
}

/// Tolerance multiplier of quick runs.
pub const QUICK_TOLERANCE_FACTOR: f64 = 3.0;

impl Default for ReproduceConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            quick: false,
            folds: 10,
            repetitions: 30,
            solver: SolverConfig::default(),
            allow_noncanonical: false,
        }
    }
}

impl ReproduceConfig {
    pub fn plan(&self) -> CvPlan {
        CvPlan {
            folds: self.folds,
            repetitions: if self.quick { 1 } else { self.repetitions },
            seed: self.seed,
            shuffle: true,
            per_fold_normalization: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub selection: String,
    pub result: ConfigReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingResult {
    pub lambda: f64,
    /// `r(i)` for attributes 1..=12.
    pub ranking: Vec<f64>,
    /// 1-based attributes with `r(i) > 0.1`, by decreasing score.
    pub important: Vec<usize>,
    pub solver_iterations: usize,
    /// 2-norm condition number of the basis matrix.
    pub condition_number: f64,
}

/// Complete benchmark reproduction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReproductionReport {
    pub rows: usize,
    pub config: ReproduceConfig,
    pub naive: ConfigReport,
    pub selections: Vec<SelectionResult>,
    pub rankings: Vec<RankingResult>,
    pub follow_up: ConfigReport,
    pub checks: Vec<Check>,
}

impl ReproductionReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Drops per-run scores, keeping only aggregates.
    pub fn summarized(mut self) -> Self {
        self.naive.runs.clear();
        self.follow_up.runs.clear();
        self.selections
            .iter_mut()
            .for_each(|s| s.result.runs.clear());
        self
    }

    /// Markdown mirroring the benchmark table plus the pass/fail list.
    pub fn to_markdown(&self) -> String {
        let mut out = String::from("| model |");
        for s in &self.selections {
            let _ = write!(out, " {} |", s.selection);
        }
        out.push_str("\n|---|");
        out.push_str(&"---|".repeat(self.selections.len()));
        let _ = write!(
            out,
            "\n| Naive |{}",
            format!(" {} |", self.naive.cell()).repeat(self.selections.len())
        );
        out.push_str("\n| ANOVA |");
        for s in &self.selections {
            let _ = write!(out, " {} |", s.result.cell());
        }
        let _ = write!(
            out,
            "\n\nFollow-up {{month, DC, temp}}: {}\n\n| check | observed | expected | result |\n|---|---|---|---|\n",
            self.follow_up.cell()
        );
        for c in &self.checks {
            let _ = writeln!(
                out,
                "| {} | {:.4} | {} | {} |",
                c.name,
                c.observed,
                c.expected,
                if c.passed { "pass" } else { "FAIL" }
            );
        }
        out
    }
}

/// Full-attribute fit with N = (2, 2) and its attribute ranking.
pub fn ranking_fit(
    data: &DesignMatrix,
    lambda: f64,
    solver: &SolverConfig,
) -> Result<RankingResult> {
    let spec = ModelSpec::new(2, vec![2, 2], IndexShape::FullGrid, lambda);
    let index_set = Arc::new(spec.index_set(data.dim())?);
    let op = GroupedOperator::new(NodeSet::new(data.dim(), data.nodes().to_vec())?, index_set)?;
    let condition_number = op.dense_materialize()?.condition_number();
    let fit = Approximant::fit_operator(&op, data.targets(), lambda, solver)?;
    let ranking = fit.approximant.attribute_ranking()?;
    let mut important: Vec<usize> = (0..ranking.len()).filter(|&i| ranking[i] > 0.1).collect();
    important.sort_by(|&a, &b| ranking[b].total_cmp(&ranking[a]));
    Ok(RankingResult {
        lambda,
        ranking,
        important: important.into_iter().map(|i| i + 1).collect(),
        solver_iterations: fit.solver.iterations,
        condition_number,
    })
}

/// Runs the complete forest-fires pipeline and compares it with the
/// published numbers.
pub fn reproduce(records: &[RawRecord], cfg: &ReproduceConfig) -> Result<ReproductionReport> {
    if !cfg.allow_noncanonical && records.len() != CANONICAL_ROWS {
        return Err(Error::Data(format!(
            "expected M = {CANONICAL_ROWS} records, found {}",
            records.len()
        )));
    }
    let plan = cfg.plan();
    let widen = if cfg.quick {
        QUICK_TOLERANCE_FACTOR
    } else {
        1.0
    };
    let all = preprocess(records, &AttributeSelection::all())?;
    let mut checks = Vec::new();

    let naive = run_naive(&all, &plan)?;
    checks.push(Check::within(
        "naive MAD",
        naive.mean_mad,
        PUBLISHED_NAIVE.0,
        0.5 * widen,
    ));
    checks.push(Check::within(
        "naive RMSE",
        naive.mean_rmse,
        PUBLISHED_NAIVE.1,
        2.0 * widen,
    ));

    let mut selections = Vec::new();
    for (name, n1, n2, ln_lambda, size, pub_mad, pub_rmse) in PUBLISHED_SELECTIONS {
        let selection: AttributeSelection = name.parse()?;
        let data = all.select(&selection)?;
        let spec = ModelSpec::new(
            2,
            vec![n1, n2],
            IndexShape::Diagonal,
            f64::from(ln_lambda).exp(),
        );
        let result = run_cv(&data, &spec, &plan, &cfg.solver)?;
        checks.push(Check::within(
            format!("{name} |I|"),
            result.basis_size as f64,
            size as f64,
            0.0,
        ));
        checks.push(Check::within(
            format!("{name} MAD"),
            result.mean_mad,
            pub_mad,
            0.4 * widen,
        ));
        if name == "M" {
            checks.push(Check::within(
                format!("{name} RMSE"),
                result.mean_rmse,
                pub_rmse,
                2.5 * widen,
            ));
        }
        selections.push(SelectionResult {
            selection: name.to_string(),
            result,
        });
    }

    let mut rankings = Vec::new();
    for lambda in [1.0, 8f64.exp()] {
        let r = ranking_fit(&all, lambda, &cfg.solver)?;
        let label = lambda_label(lambda);
        let expected: Vec<usize> = PUBLISHED_RANKING.iter().map(|(a, _)| a.number()).collect();
        checks.push(Check::flag(
            format!("ranking λ={label}: r>0.1 exactly month>DC>temp"),
            r.important == expected,
            "true",
        ));
        for (a, value) in PUBLISHED_RANKING {
            checks.push(Check::within(
                format!("ranking λ={label}: r({})", a.number()),
                r.ranking[a.number() - 1],
                value,
                0.05,
            ));
        }
        rankings.push(r);
    }

    let follow_sel: AttributeSelection = "month,DC,temp".parse()?;
    let follow_data = all.select(&follow_sel)?;
    let follow_spec = ModelSpec::new(2, vec![2, 10], IndexShape::Diagonal, 8f64.exp());
    let follow_up = run_cv(&follow_data, &follow_spec, &plan, &cfg.solver)?;
    let bound = |b: f64, published: f64| published + (b - published) * widen;
    checks.push(Check::at_most(
        "follow-up MAD",
        follow_up.mean_mad,
        bound(FOLLOW_UP_BOUNDS.0, PUBLISHED_FOLLOW_UP.0),
    ));
    checks.push(Check::at_most(
        "follow-up RMSE",
        follow_up.mean_rmse,
        bound(FOLLOW_UP_BOUNDS.1, PUBLISHED_FOLLOW_UP.1),
    ));

    Ok(ReproductionReport {
        rows: records.len(),
        config: *cfg,
        naive,
        selections,
        rankings,
        follow_up,
        checks,
    })
}
