//! Fitted approximants and the interpretability machinery built on their
//! coefficients: variance, global sensitivity indices, superposition
//! dimension, attribute ranking and active-set selection.
//!
//! Since the basis is orthonormal, the variance of an ANOVA term `f_u` is the
//! sum of squared coefficients whose frequency support is exactly `u`, and the
//! total variance is the sum over every nonzero frequency.

use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::basis::{cosine_1d, FrequencyIndex};
use crate::dataset::Preprocessing;
use crate::error::{Error, Result};
use crate::operator::{GroupedOperator, NodeSet};
use crate::solver::{solve_ridge, RidgeProblem, SolverConfig, SolverResult};
use crate::terms::{IndexSet, TermSet, TermSubset};
use crate::transform::{psi_inv, Point};

/// Slack on the superposition-dimension threshold so that `α = 1` is reached
/// despite rounding in the cumulative sums.
const SHARE_SLACK: f64 = 1e-12;

/// A truncated ANOVA expansion `Σ_{k ∈ I(U)} f̂_k φ_k^trafo`.
#[derive(Debug, Clone, PartialEq)]
pub struct Approximant {
    index_set: Arc<IndexSet>,
    coefficients: Vec<f64>,
    preprocessing: Option<Preprocessing>,
}

/// Result of [`Approximant::fit`].
#[derive(Debug, Clone)]
pub struct Fit {
    pub approximant: Approximant,
    pub solver: SolverResult,
}

impl Approximant {
    pub fn new(index_set: Arc<IndexSet>, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.len() != index_set.len() {
            return Err(Error::DimensionMismatch {
                expected: index_set.len(),
                found: coefficients.len(),
            });
        }
        if index_set.indices().first().is_none_or(|k| !k.is_zero()) {
            return Err(Error::InvalidArgument(
                "index set must start with the zero frequency".into(),
            ));
        }
        Ok(Self {
            index_set,
            coefficients,
            preprocessing: None,
        })
    }

    /// Solves the ridge problem on `nodes`/`y` and wraps the coefficients.
    pub fn fit(
        nodes: NodeSet,
        y: &[f64],
        index_set: Arc<IndexSet>,
        lambda: f64,
        cfg: &SolverConfig,
    ) -> Result<Fit> {
        let op = GroupedOperator::new(nodes, index_set.clone())?;
        Self::fit_operator(&op, y, lambda, cfg)
    }

    /// As [`Approximant::fit`] with an already assembled operator.
    pub fn fit_operator(
        op: &GroupedOperator,
        y: &[f64],
        lambda: f64,
        cfg: &SolverConfig,
    ) -> Result<Fit> {
        let solver = solve_ridge(
            &RidgeProblem {
                operator: op,
                y,
                lambda,
            },
            cfg,
        )?;
        let approximant = Self::new(op.index_set().clone(), solver.coefficients.clone())?;
        Ok(Fit {
            approximant,
            solver,
        })
    }

    pub fn with_preprocessing(mut self, preprocessing: Preprocessing) -> Self {
        self.preprocessing = Some(preprocessing);
        self
    }

    pub fn preprocessing(&self) -> Option<&Preprocessing> {
        self.preprocessing.as_ref()
    }

    pub fn index_set(&self) -> &Arc<IndexSet> {
        &self.index_set
    }

    pub fn term_set(&self) -> &TermSet {
        self.index_set.term_set()
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn dim(&self) -> usize {
        self.index_set.dim()
    }

    /// Highest interaction order present.
    pub fn max_order(&self) -> usize {
        self.term_set().max_order()
    }

    pub fn coefficient(&self, k: &FrequencyIndex) -> Option<f64> {
        self.index_set
            .indices()
            .iter()
            .position(|j| j == k)
            .map(|p| self.coefficients[p])
    }

    /// Multiplies every coefficient by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            index_set: self.index_set.clone(),
            coefficients: self.coefficients.iter().map(|v| v * c).collect(),
            preprocessing: self.preprocessing.clone(),
        }
    }

    /// Pointwise evaluation.
    pub fn evaluate(&self, x: &Point) -> Result<f64> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.dim(),
            });
        }
        let t = psi_inv(x);
        let t = t.coordinates();
        Ok(self
            .index_set
            .indices()
            .iter()
            .zip(&self.coefficients)
            .map(|(k, c)| {
                let phi: f64 = k
                    .components()
                    .iter()
                    .zip(t)
                    .filter(|(&ki, _)| ki != 0)
                    .map(|(&ki, &ti)| cosine_1d(ki, ti))
                    .product();
                c * phi
            })
            .sum())
    }

    /// Evaluates at every node of a row-major `M × d` buffer through the
    /// grouped operator.
    pub fn evaluate_many(&self, points: &[f64]) -> Result<Vec<f64>> {
        let nodes = NodeSet::new(self.dim(), points.to_vec())?;
        let op = GroupedOperator::new(nodes, self.index_set.clone())?;
        op.apply(&self.coefficients)
    }

    /// `σ²(f) = Σ_{k ≠ 0} |f̂_k|²`.
    pub fn variance(&self) -> f64 {
        self.index_set
            .indices()
            .iter()
            .zip(&self.coefficients)
            .filter(|(k, _)| !k.is_zero())
            .map(|(_, c)| c * c)
            .sum()
    }

    /// `‖f_u‖²` for every nonempty term, in term order.
    pub fn term_variances(&self) -> Vec<(TermSubset, f64)> {
        self.index_set
            .groups()
            .iter()
            .filter(|g| !g.term.is_empty())
            .map(|g| {
                let v = self.coefficients[g.range.clone()]
                    .iter()
                    .map(|c| c * c)
                    .sum();
                (g.term.clone(), v)
            })
            .collect()
    }

    fn nonzero_variance(&self) -> Result<f64> {
        let v = self.variance();
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(Error::ZeroVariance)
        }
    }

    /// Global sensitivity indices `‖f_u‖² / σ²(f)` for all nonempty terms.
    pub fn gsi(&self) -> Result<Vec<(TermSubset, f64)>> {
        let total = self.nonzero_variance()?;
        Ok(self
            .term_variances()
            .into_iter()
            .map(|(u, v)| (u, v / total))
            .collect())
    }

    /// Smallest `s` such that terms of order `≤ s` explain an `alpha` share of
    /// the variance.
    pub fn superposition_dimension(&self, alpha: f64) -> Result<usize> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidArgument(format!(
                "alpha must lie in [0,1], got {alpha}"
            )));
        }
        let gsi = self.gsi()?;
        let d = self.dim();
        let mut by_order = vec![0.0; d + 1];
        for (u, g) in &gsi {
            by_order[u.order()] += g;
        }
        let mut share = 0.0;
        for (s, g) in by_order.iter().enumerate().skip(1) {
            share += g;
            if share + SHARE_SLACK >= alpha {
                return Ok(s);
            }
        }
        Ok(d)
    }

    /// Attribute ranking scores `r(i)`, normalized to sum to one.
    ///
    /// A term `u` containing `i` contributes its GSI divided by the number of
    /// terms of the same order in the model's term set that contain `i`.
    pub fn attribute_ranking(&self) -> Result<Vec<f64>> {
        let gsi = self.gsi()?;
        Ok(ranking_from_gsi(self.term_set(), &gsi))
    }

    /// `U*(ε) = {u : gsi(u) > ε_{|u|}}` plus the empty term.
    pub fn active_set_threshold(&self, eps: &[f64]) -> Result<TermSet> {
        let max_order = self.max_order();
        if eps.len() < max_order {
            return Err(Error::InvalidArgument(format!(
                "need a threshold for every order up to {max_order}, got {}",
                eps.len()
            )));
        }
        if let Some(e) = eps.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
            return Err(Error::InvalidArgument(format!(
                "thresholds must lie in (0,1), got {e}"
            )));
        }
        let gsi = self.gsi()?;
        let keep: Vec<TermSubset> = gsi
            .into_iter()
            .filter(|(u, g)| *g > eps[u.order() - 1])
            .map(|(u, _)| u)
            .collect();
        TermSet::new(self.dim(), keep)
    }

    /// Bundles variance, GSI, ranking and superposition dimension.
    pub fn sensitivity_report(&self, alpha: f64) -> Result<SensitivityReport> {
        let gsi = self.gsi()?;
        let ranking = ranking_from_gsi(self.term_set(), &gsi);
        Ok(SensitivityReport {
            variance: self.variance(),
            gsi: gsi
                .into_iter()
                .map(|(u, value)| TermGsi {
                    attributes: u.attributes(),
                    order: u.order(),
                    value,
                })
                .collect(),
            ranking,
            alpha,
            superposition_dimension: self.superposition_dimension(alpha)?,
        })
    }

    pub fn coefficient_report(&self) -> CoefficientReport {
        CoefficientReport {
            d: self.dim(),
            shape: self.index_set.schedule().shape().to_string(),
            bandwidths: self.index_set.schedule().bandwidths().to_vec(),
            coefficients: self
                .index_set
                .indices()
                .iter()
                .zip(&self.coefficients)
                .map(|(k, &value)| CoefficientEntry {
                    frequency: k.components().to_vec(),
                    value,
                })
                .collect(),
            preprocessing: self.preprocessing.clone(),
        }
    }
}

fn ranking_from_gsi(terms: &TermSet, gsi: &[(TermSubset, f64)]) -> Vec<f64> {
    let d = terms.dim();
    let max_order = terms.max_order();
    // count[o][i] = |{v ∈ U : |v| = o, i ∈ v}|
    let mut count = vec![vec![0usize; d]; max_order + 1];
    for v in terms.terms() {
        for &i in v.coords() {
            count[v.order()][i] += 1;
        }
    }
    let mut score = vec![0.0; d];
    for (u, g) in gsi {
        for &i in u.coords() {
            score[i] += g / count[u.order()][i] as f64;
        }
    }
    let total: f64 = score.iter().sum();
    if total > 0.0 {
        score.iter_mut().for_each(|s| *s /= total);
    }
    score
}

/// Removes every term containing coordinate `i`.
pub fn drop_variable(terms: &TermSet, i: usize) -> Result<TermSet> {
    terms.without_variable(i)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermGsi {
    /// 1-based attribute numbers.
    pub attributes: Vec<usize>,
    pub order: usize,
    pub value: f64,
}

/// Interpretability summary of one approximant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub variance: f64,
    pub gsi: Vec<TermGsi>,
    /// `ranking[i]` is the score of attribute `i + 1`.
    pub ranking: Vec<f64>,
    pub alpha: f64,
    pub superposition_dimension: usize,
}

impl SensitivityReport {
    /// `index,value` rows, one per attribute (1-based).
    pub fn ranking_csv(&self) -> String {
        let mut out = String::from("index,value\n");
        for (i, r) in self.ranking.iter().enumerate() {
            let _ = writeln!(out, "{},{}", i + 1, r);
        }
        out
    }

    /// GSI values sorted in descending order, numbered from 1, with the term
    /// they belong to.
    pub fn gsi_csv(&self) -> String {
        let mut sorted: Vec<&TermGsi> = self.gsi.iter().collect();
        sorted.sort_by(|a, b| b.value.total_cmp(&a.value));
        let mut out = String::from("index,value,term\n");
        for (n, t) in sorted.iter().enumerate() {
            let term: Vec<String> = t.attributes.iter().map(usize::to_string).collect();
            let _ = writeln!(out, "{},{},{}", n + 1, t.value, term.join("-"));
        }
        out
    }

    /// Attributes (1-based) ordered by decreasing score.
    pub fn ranked_attributes(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.ranking.len()).collect();
        idx.sort_by(|&a, &b| self.ranking[b].total_cmp(&self.ranking[a]).then(a.cmp(&b)));
        idx.into_iter().map(|i| i + 1).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientEntry {
    pub frequency: Vec<u32>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientReport {
    pub d: usize,
    pub shape: String,
    pub bandwidths: Vec<usize>,
    pub coefficients: Vec<CoefficientEntry>,
    pub preprocessing: Option<Preprocessing>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::terms::{build_index_set, build_term_set, BandwidthSchedule, IndexShape};
    use approx::assert_abs_diff_eq;

    fn index_set(d: usize, d_s: usize, n: usize) -> Arc<IndexSet> {
        let s = BandwidthSchedule::new(vec![n; d_s], IndexShape::FullGrid).unwrap();
        Arc::new(build_index_set(&build_term_set(d, d_s).unwrap(), &s).unwrap())
    }

    fn with_coeffs(iset: &Arc<IndexSet>, entries: &[(&[u32], f64)]) -> Approximant {
        let mut c = vec![0.0; iset.len()];
        for (k, v) in entries {
            let pos = iset
                .indices()
                .iter()
                .position(|j| j.components() == *k)
                .unwrap();
            c[pos] = *v;
        }
        Approximant::new(iset.clone(), c).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let iset = index_set(2, 2, 3);
        let a = with_coeffs(&iset, &[(&[0, 0], 1.0)]);
        let x = Point::new(vec![0.7, -2.0]).unwrap();
        assert_eq!(a.evaluate(&x).unwrap(), 1.0);
        let b = with_coeffs(&iset, &[(&[2, 0], 1.0)]);
        let x = Point::new(vec![0.0, 1.234]).unwrap();
        assert_abs_diff_eq!(
            b.evaluate(&x).unwrap(),
            -std::f64::consts::SQRT_2,
            epsilon = 1e-15
        );
        assert!(b.evaluate(&Point::new(vec![0.0]).unwrap()).is_err());
    }

    #[test]
    fn evaluate_many_matches_pointwise() {
        let iset = index_set(3, 2, 3);
        let c: Vec<f64> = (0..iset.len()).map(|j| ((j * 7) as f64).cos()).collect();
        let a = Approximant::new(iset, c).unwrap();
        let pts = vec![0.1, -0.5, 2.0, 1.5, 0.0, -1.0];
        let batch = a.evaluate_many(&pts).unwrap();
        for (m, b) in batch.iter().enumerate() {
            let p = Point::new(pts[m * 3..m * 3 + 3].to_vec()).unwrap();
            assert_abs_diff_eq!(*b, a.evaluate(&p).unwrap(), epsilon = 1e-12);
        }
    }

    #[test]
    fn variance_examples() {
        let iset = index_set(2, 1, 2);
        let constant = with_coeffs(&iset, &[(&[0, 0], 3.0)]);
        assert_eq!(constant.variance(), 0.0);
        assert!(matches!(constant.gsi(), Err(Error::ZeroVariance)));
        assert!(matches!(
            constant.attribute_ranking(),
            Err(Error::ZeroVariance)
        ));
        let a = with_coeffs(&iset, &[(&[0, 0], 3.0), (&[1, 0], 2.0)]);
        assert_eq!(a.variance(), 4.0);
        let parts: f64 = a.term_variances().iter().map(|(_, v)| v).sum();
        assert_eq!(parts, 4.0);
    }

    #[test]
    fn gsi_examples() {
        let iset = index_set(2, 1, 2);
        let single = with_coeffs(&iset, &[(&[0, 1], 0.4)]);
        let g = single.gsi().unwrap();
        assert_eq!(g[1], (TermSubset::new(vec![1]), 1.0));
        let a = with_coeffs(&iset, &[(&[1, 0], 1.0), (&[0, 1], 3f64.sqrt())]);
        let g = a.gsi().unwrap();
        assert_abs_diff_eq!(g[0].1, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(g[1].1, 0.75, epsilon = 1e-15);
    }

    #[test]
    fn superposition_dimension_examples() {
        let iset = index_set(2, 2, 2);
        let additive = with_coeffs(&iset, &[(&[1, 0], 1.0), (&[0, 1], 2.0)]);
        assert_eq!(additive.superposition_dimension(1.0).unwrap(), 1);
        assert_eq!(additive.superposition_dimension(0.0).unwrap(), 1);
        let mixed = with_coeffs(&iset, &[(&[1, 0], 1.0), (&[1, 1], 1.0)]);
        assert_eq!(mixed.superposition_dimension(0.9).unwrap(), 2);
        assert_eq!(mixed.superposition_dimension(0.5).unwrap(), 1);
        assert!(mixed.superposition_dimension(1.5).is_err());
    }

    #[test]
    fn ranking_examples() {
        let iset = index_set(2, 2, 2);
        let only_first = with_coeffs(&iset, &[(&[1, 0], 1.0)]);
        assert_eq!(only_first.attribute_ranking().unwrap(), vec![1.0, 0.0]);
        let symmetric = with_coeffs(&iset, &[(&[1, 0], 1.0), (&[0, 1], 1.0), (&[1, 1], 0.5)]);
        let r = symmetric.attribute_ranking().unwrap();
        assert_eq!(r[0], r[1]);
        assert_abs_diff_eq!(r.iter().sum::<f64>(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn ranking_weights_follow_term_counts() {
        // d = 3, U(3,2): each variable appears in 2 of the 3 pairs.
        let iset = index_set(3, 2, 2);
        let a = with_coeffs(&iset, &[(&[1, 1, 0], 1.0)]);
        // Only {1,2} carries variance: both get 1/2 of it, variable 3 none.
        let r = a.attribute_ranking().unwrap();
        assert_abs_diff_eq!(r[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(r[1], 0.5, epsilon = 1e-15);
        assert_eq!(r[2], 0.0);
        // Mixing orders: gsi({1}) = 0.5, gsi({1,2}) = 0.5
        // numerators: r1 ∝ 0.5 + 0.5/2, r2 ∝ 0.5/2.
        let b = with_coeffs(&iset, &[(&[1, 0, 0], 1.0), (&[1, 1, 0], 1.0)]);
        let r = b.attribute_ranking().unwrap();
        assert_abs_diff_eq!(r[0], 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(r[1], 0.25, epsilon = 1e-15);
    }

    #[test]
    fn active_set_examples() {
        let iset = index_set(3, 1, 2);
        let a = with_coeffs(
            &iset,
            &[
                (&[1, 0, 0], 0.6f64.sqrt()),
                (&[0, 1, 0], 0.3f64.sqrt()),
                (&[0, 0, 1], 0.1f64.sqrt()),
            ],
        );
        let kept = a.active_set_threshold(&[0.2]).unwrap();
        assert_eq!(
            kept.terms(),
            &[
                TermSubset::empty(),
                TermSubset::new(vec![0]),
                TermSubset::new(vec![1])
            ]
        );
        let all = a.active_set_threshold(&[0.099]).unwrap();
        assert_eq!(all.len(), 4);
        let none = a.active_set_threshold(&[1.0 - 1e-9]).unwrap();
        assert_eq!(none.terms(), &[TermSubset::empty()]);
        assert!(a.active_set_threshold(&[0.0]).is_err());
        assert!(a.active_set_threshold(&[]).is_err());
    }

    #[test]
    fn report_csv_layout() {
        let iset = index_set(2, 2, 2);
        let a = with_coeffs(&iset, &[(&[1, 0], 1.0), (&[1, 1], 2.0)]);
        let rep = a.sensitivity_report(0.9).unwrap();
        assert!(rep.ranking_csv().starts_with("index,value\n1,"));
        let gsi_csv = rep.gsi_csv();
        let second = gsi_csv.lines().nth(1).unwrap();
        assert_eq!(second, "1,0.8,1-2");
        assert_eq!(rep.ranked_attributes(), vec![1, 2]);
    }
}
