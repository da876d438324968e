//! Matrix-free grouped basis matrix `F(X, I(U)) = (φ_k^trafo(x))_{x, k}`.
//!
//! Every node is mapped to the cube once and the one-dimensional values
//! `cosine_1d(k, tᵢ)` are tabulated for all frequencies up to the largest one
//! in the index set. Products over a term's coordinates are then formed on the
//! fly, one ANOVA term (group) at a time.

use std::sync::Arc;

use rayon::prelude::*;

use crate::basis::{cosine_1d, eval_trafo};
use crate::error::{Error, Result};
use crate::terms::IndexSet;
use crate::transform::{psi_inv_scalar, Point};

/// Scattered nodes `X ⊂ R^d` with their cube images.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSet {
    d: usize,
    points: Vec<f64>,
    cube: Vec<f64>,
}

impl NodeSet {
    /// `points` is row-major `M × d`.
    pub fn new(d: usize, points: Vec<f64>) -> Result<Self> {
        if d == 0 || points.is_empty() || !points.len().is_multiple_of(d) {
            return Err(Error::InvalidArgument(format!(
                "node buffer of length {} does not hold a positive number of {d}-dimensional points",
                points.len()
            )));
        }
        if let Some(i) = points.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!(
                "node {} coordinate {} is not finite",
                i / d,
                i % d
            )));
        }
        let cube = points.iter().map(|&x| psi_inv_scalar(x)).collect();
        Ok(Self { d, points, cube })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if let Some(r) = rows.iter().find(|r| r.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: r.len(),
            });
        }
        Self::new(d, rows.concat())
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.d
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, m: usize) -> &[f64] {
        &self.points[m * self.d..(m + 1) * self.d]
    }

    pub fn cube_point(&self, m: usize) -> &[f64] {
        &self.cube[m * self.d..(m + 1) * self.d]
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }
}

struct GroupPlan {
    coords: Vec<usize>,
    /// Row-major `len × coords.len()` local frequencies.
    freqs: Vec<u32>,
    offset: usize,
    len: usize,
}

/// The grouped operator. Immutable after construction.
pub struct GroupedOperator {
    nodes: NodeSet,
    index_set: Arc<IndexSet>,
    /// `table[(m·d + i)·K + k] = cosine_1d(k, t_{m,i})`.
    table: Vec<f64>,
    stride: usize,
    plans: Vec<GroupPlan>,
}

/// Upper limit on `rows · cols` for [`GroupedOperator::dense_materialize`].
pub const DENSE_LIMIT: usize = 10_000_000;

impl GroupedOperator {
    pub fn new(nodes: NodeSet, index_set: Arc<IndexSet>) -> Result<Self> {
        if nodes.dim() != index_set.dim() {
            return Err(Error::DimensionMismatch {
                expected: index_set.dim(),
                found: nodes.dim(),
            });
        }
        let stride = index_set.max_frequency() as usize + 1;
        let mut table = Vec::with_capacity(nodes.cube.len() * stride);
        for &t in &nodes.cube {
            table.extend((0..stride).map(|k| cosine_1d(k as u32, t)));
        }
        let plans = index_set
            .groups()
            .iter()
            .map(|g| {
                let coords = g.term.coords().to_vec();
                let freqs = index_set.indices()[g.range.clone()]
                    .iter()
                    .flat_map(|k| coords.iter().map(move |&i| k.components()[i]))
                    .collect();
                GroupPlan {
                    coords,
                    freqs,
                    offset: g.range.start,
                    len: g.range.len(),
                }
            })
            .collect();
        Ok(Self {
            nodes,
            index_set,
            table,
            stride,
            plans,
        })
    }

    pub fn nodes(&self) -> &NodeSet {
        &self.nodes
    }

    pub fn index_set(&self) -> &Arc<IndexSet> {
        &self.index_set
    }

    pub fn rows(&self) -> usize {
        self.nodes.len()
    }

    pub fn cols(&self) -> usize {
        self.index_set.len()
    }

    #[inline]
    fn entry(&self, plan: &GroupPlan, m: usize, j: usize) -> f64 {
        let order = plan.coords.len();
        let base = m * self.nodes.d;
        let local = &plan.freqs[j * order..(j + 1) * order];
        plan.coords
            .iter()
            .zip(local)
            .map(|(&i, &k)| self.table[(base + i) * self.stride + k as usize])
            .product()
    }

    fn group_apply(&self, plan: &GroupPlan, coeffs: &[f64]) -> Vec<f64> {
        let c = &coeffs[plan.offset..plan.offset + plan.len];
        (0..self.rows())
            .map(|m| {
                if plan.coords.is_empty() {
                    return c[0];
                }
                (0..plan.len).map(|j| c[j] * self.entry(plan, m, j)).sum()
            })
            .collect()
    }

    fn check_len(expected: usize, found: usize) -> Result<()> {
        if expected == found {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, found })
        }
    }

    /// `F · coeffs`. Groups are evaluated in parallel and summed in group
    /// order, so the result is bit-identical across thread counts.
    pub fn apply(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        Self::check_len(self.cols(), coeffs.len())?;
        let partials: Vec<Vec<f64>> = self
            .plans
            .par_iter()
            .map(|plan| self.group_apply(plan, coeffs))
            .collect();
        let mut out = vec![0.0; self.rows()];
        for p in &partials {
            for (o, v) in out.iter_mut().zip(p) {
                *o += v;
            }
        }
        Ok(out)
    }

    /// Contribution of group `g` alone to `F · coeffs`.
    pub fn partial_apply(&self, g: usize, coeffs: &[f64]) -> Result<Vec<f64>> {
        Self::check_len(self.cols(), coeffs.len())?;
        let plan = self.plans.get(g).ok_or_else(|| {
            Error::InvalidArgument(format!("group {g} out of range 0..{}", self.plans.len()))
        })?;
        Ok(self.group_apply(plan, coeffs))
    }

    /// `Fᵀ · residual`. Each group writes its own disjoint block of the output.
    pub fn apply_transpose(&self, residual: &[f64]) -> Result<Vec<f64>> {
        Self::check_len(self.rows(), residual.len())?;
        let blocks: Vec<Vec<f64>> = self
            .plans
            .par_iter()
            .map(|plan| {
                if plan.coords.is_empty() {
                    return vec![residual.iter().sum()];
                }
                let mut block = vec![0.0; plan.len];
                for (m, &r) in residual.iter().enumerate() {
                    for (j, b) in block.iter_mut().enumerate() {
                        *b += r * self.entry(plan, m, j);
                    }
                }
                block
            })
            .collect();
        Ok(blocks.concat())
    }

    /// Explicit `M × |I(U)|` matrix, built entry by entry from
    /// [`eval_trafo`]. Meant as a test oracle and for diagnostics.
    pub fn dense_materialize(&self) -> Result<DenseMatrix> {
        let (rows, cols) = (self.rows(), self.cols());
        if rows.saturating_mul(cols) > DENSE_LIMIT {
            return Err(Error::TooLarge {
                rows,
                cols,
                limit: DENSE_LIMIT,
            });
        }
        let mut data = Vec::with_capacity(rows * cols);
        for m in 0..rows {
            let x = Point::new(self.nodes.point(m).to_vec())?;
            for k in self.index_set.indices() {
                data.push(eval_trafo(k, &x)?);
            }
        }
        Ok(DenseMatrix { rows, cols, data })
    }
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl DenseMatrix {
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        self.data
            .chunks(self.cols)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn transpose_mul_vec(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for (row, &yr) in self.data.chunks(self.cols).zip(y) {
            for (o, a) in out.iter_mut().zip(row) {
                *o += a * yr;
            }
        }
        out
    }

    pub fn to_nalgebra(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    /// Ratio of the extreme singular values; infinite for rank-deficient
    /// matrices.
    pub fn condition_number(&self) -> f64 {
        let sv = self.to_nalgebra().singular_values();
        let max = sv.max();
        let min = sv.min();
        if min > 0.0 {
            max / min
        } else {
            f64::INFINITY
        }
    }
}
