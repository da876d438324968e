//! Half-period cosine basis on the cube and its transformed counterpart on
//! `R^d`.
//!
//! For a frequency `k ∈ N_0^d` the cube function is
//! `√2^{‖k‖₀} ∏ cos(π kᵢ tᵢ)` and the transformed function evaluates the same
//! product at `psi_inv(x)`.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::transform::{psi_inv, psi_inv_scalar, CubePoint, Point};

/// A multi-index `k ∈ N_0^d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FrequencyIndex(Vec<u32>);

impl FrequencyIndex {
    pub fn new(k: Vec<u32>) -> Self {
        Self(k)
    }

    pub fn zero(d: usize) -> Self {
        Self(vec![0; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[u32] {
        &self.0
    }

    /// Coordinates with nonzero frequency, ascending.
    pub fn support(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter_map(|(i, &k)| (k != 0).then_some(i))
            .collect()
    }

    /// `‖k‖₀`, the size of the support.
    pub fn norm0(&self) -> usize {
        self.0.iter().filter(|&&k| k != 0).count()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&k| k == 0)
    }
}

impl fmt::Display for FrequencyIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, k) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{k}")?;
        }
        write!(f, ")")
    }
}

/// One-dimensional normalized cosine `1` for `k = 0`, else `√2·cos(πkt)`.
#[inline]
pub fn cosine_1d(k: u32, t: f64) -> f64 {
    if k == 0 {
        1.0
    } else {
        SQRT_2 * (PI * k as f64 * t).cos()
    }
}

fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Half-period cosine basis function on the cube.
pub fn eval_cosine(k: &FrequencyIndex, t: &CubePoint) -> Result<f64> {
    check_dims(k.dim(), t.dim())?;
    Ok(cosine_product(k.components(), t.coordinates()))
}

#[inline]
fn cosine_product(k: &[u32], t: &[f64]) -> f64 {
    k.iter()
        .zip(t)
        .filter(|(&ki, _)| ki != 0)
        .map(|(&ki, &ti)| cosine_1d(ki, ti))
        .product()
}

/// Transformed basis function `φ_k^trafo(x) = φ_k^cos(psi_inv(x))`.
pub fn eval_trafo(k: &FrequencyIndex, x: &Point) -> Result<f64> {
    check_dims(k.dim(), x.dim())?;
    eval_cosine(k, &psi_inv(x))
}

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub samples: usize,
}

const MC_CHUNK: usize = 1 << 14;

/// Monte Carlo estimate of `⟨φ_k^trafo, φ_l^trafo⟩` over the standard normal
/// density, from `n_samples` normal draws.
pub fn orthonormality_check(
    k: &FrequencyIndex,
    l: &FrequencyIndex,
    n_samples: usize,
    seed: u64,
) -> Result<f64> {
    Ok(mc_inner_product(k, l, n_samples, seed)?.estimate)
}

/// Like [`orthonormality_check`] but also reports the standard error.
pub fn mc_inner_product(
    k: &FrequencyIndex,
    l: &FrequencyIndex,
    n_samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    check_dims(k.dim(), l.dim())?;
    let gram = mc_gram(&[k.clone(), l.clone()], n_samples, seed)?;
    Ok(gram.entry(0, 1))
}

/// Monte Carlo Gram matrix of a family of transformed basis functions.
#[derive(Debug, Clone)]
pub struct McGram {
    size: usize,
    samples: usize,
    mean: Vec<f64>,
    std_error: Vec<f64>,
}

impl McGram {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn entry(&self, i: usize, j: usize) -> McEstimate {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        let idx = a * self.size + b;
        McEstimate {
            estimate: self.mean[idx],
            std_error: self.std_error[idx],
            samples: self.samples,
        }
    }
}

/// Estimates all pairwise inner products of `family` with shared normal draws.
///
/// Draws are generated in fixed-size chunks, each from its own generator keyed
/// by `(seed, chunk)`, so the result does not depend on the thread count.
pub fn mc_gram(family: &[FrequencyIndex], n_samples: usize, seed: u64) -> Result<McGram> {
    if n_samples == 0 {
        return Err(Error::InvalidArgument(
            "n_samples must be at least 1".into(),
        ));
    }
    let size = family.len();
    let d = family.first().map_or(0, FrequencyIndex::dim);
    for k in family {
        check_dims(d, k.dim())?;
    }
    let n_chunks = n_samples.div_ceil(MC_CHUNK);
    let partials: Vec<(Vec<f64>, Vec<f64>)> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk as u64);
            let count = MC_CHUNK.min(n_samples - chunk * MC_CHUNK);
            let mut sum = vec![0.0; size * size];
            let mut sum_sq = vec![0.0; size * size];
            let mut t = vec![0.0; d];
            let mut values = vec![0.0; size];
            for _ in 0..count {
                for ti in t.iter_mut() {
                    let x: f64 = StandardNormal.sample(&mut rng);
                    *ti = psi_inv_scalar(x);
                }
                for (v, k) in values.iter_mut().zip(family) {
                    *v = cosine_product(k.components(), &t);
                }
                for a in 0..size {
                    for b in a..size {
                        let p = values[a] * values[b];
                        sum[a * size + b] += p;
                        sum_sq[a * size + b] += p * p;
                    }
                }
            }
            (sum, sum_sq)
        })
        .collect();

    let mut sum = vec![0.0; size * size];
    let mut sum_sq = vec![0.0; size * size];
    for (s, q) in &partials {
        for i in 0..sum.len() {
            sum[i] += s[i];
            sum_sq[i] += q[i];
        }
    }
    let n = n_samples as f64;
    let mean: Vec<f64> = sum.iter().map(|s| s / n).collect();
    let std_error = sum_sq
        .iter()
        .zip(&mean)
        .map(|(q, m)| {
            if n_samples < 2 {
                return f64::INFINITY;
            }
            let var = ((q / n - m * m) * n / (n - 1.0)).max(0.0);
            (var / n).sqrt()
        })
        .collect();
    Ok(McGram {
        size,
        samples: n_samples,
        mean,
        std_error,
    })
}

/// Gauss–Legendre nodes and weights on `[0,1]`.
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Chebyshev-type starting value for the i-th root on [-1, 1].
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = 0.5 * (1.0 - x);
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// `⟨φ_k^cos, φ_l^cos⟩` on `[0,1]^d` by tensor Gauss–Legendre quadrature.
///
/// The integrand factorizes, so the `d`-dimensional integral is the product
/// of one-dimensional ones; `nodes` points integrate cosines of frequency
/// below roughly `nodes/2` to machine precision.
pub fn cube_inner_product(k: &FrequencyIndex, l: &FrequencyIndex, nodes: usize) -> Result<f64> {
    check_dims(k.dim(), l.dim())?;
    let (t, w) = gauss_legendre_unit(nodes);
    Ok(k.components()
        .iter()
        .zip(l.components())
        .map(|(&a, &b)| {
            t.iter()
                .zip(&w)
                .map(|(&ti, &wi)| wi * cosine_1d(a, ti) * cosine_1d(b, ti))
                .sum::<f64>()
        })
        .product())
}
