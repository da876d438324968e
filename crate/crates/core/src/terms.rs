//! ANOVA term sets and the frequency index sets built on them.
//!
//! Coordinates are 0-based throughout the API. Serialized reports list them
//! 1-based under an `attributes` key so they line up with attribute numbers.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::basis::FrequencyIndex;
use crate::error::{Error, Result};

/// A sorted, duplicate-free set of coordinate indices `u ⊂ {0, …, d−1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TermSubset(Vec<usize>);

impl TermSubset {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    /// Builds a subset from arbitrary indices; sorts and removes duplicates.
    pub fn new(mut coords: Vec<usize>) -> Self {
        coords.sort_unstable();
        coords.dedup();
        Self(coords)
    }

    pub fn coords(&self) -> &[usize] {
        &self.0
    }

    pub fn order(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    /// 1-based attribute numbers.
    pub fn attributes(&self) -> Vec<usize> {
        self.0.iter().map(|i| i + 1).collect()
    }
}

impl PartialOrd for TermSubset {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Order by size first, then lexicographically.
impl Ord for TermSubset {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl fmt::Display for TermSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, a) in self.attributes().iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, "}}")
    }
}

/// A collection `U` of ANOVA terms over `d` coordinates. Always contains the
/// empty term; ordered by `(|u|, lexicographic)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermSet {
    d: usize,
    terms: Vec<TermSubset>,
}

impl TermSet {
    pub fn new(d: usize, terms: impl IntoIterator<Item = TermSubset>) -> Result<Self> {
        let mut set: BTreeSet<TermSubset> = BTreeSet::new();
        set.insert(TermSubset::empty());
        for u in terms {
            if let Some(&bad) = u.coords().iter().find(|&&i| i >= d) {
                return Err(Error::InvalidArgument(format!(
                    "term {u} uses coordinate {} but d = {d}",
                    bad + 1
                )));
            }
            set.insert(u);
        }
        Ok(Self {
            d,
            terms: set.into_iter().collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn terms(&self) -> &[TermSubset] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn contains(&self, u: &TermSubset) -> bool {
        self.terms.binary_search(u).is_ok()
    }

    pub fn max_order(&self) -> usize {
        self.terms.last().map_or(0, TermSubset::order)
    }

    /// Terms not involving coordinate `i`.
    pub fn without_variable(&self, i: usize) -> Result<Self> {
        if i >= self.d {
            return Err(Error::InvalidArgument(format!(
                "variable {} out of range 1..={}",
                i + 1,
                self.d
            )));
        }
        Ok(Self {
            d: self.d,
            terms: self
                .terms
                .iter()
                .filter(|u| !u.contains(i))
                .cloned()
                .collect(),
        })
    }

    /// Keeps only terms for which `keep` holds; the empty term always stays.
    pub fn filter(&self, mut keep: impl FnMut(&TermSubset) -> bool) -> Self {
        Self {
            d: self.d,
            terms: self
                .terms
                .iter()
                .filter(|u| u.is_empty() || keep(u))
                .cloned()
                .collect(),
        }
    }
}

/// `U(d, d_s) = {u ⊂ [d] : |u| ≤ d_s}`.
pub fn build_term_set(d: usize, d_s: usize) -> Result<TermSet> {
    if d_s < 1 || d_s > d {
        return Err(Error::InvalidArgument(format!(
            "superposition threshold must satisfy 1 <= d_s <= d, got d_s = {d_s}, d = {d}"
        )));
    }
    let mut terms = Vec::new();
    for order in 1..=d_s {
        let mut combo: Vec<usize> = (0..order).collect();
        loop {
            terms.push(TermSubset(combo.clone()));
            // advance to the next combination in lexicographic order
            let Some(pos) = (0..order).rev().find(|&p| combo[p] < d - order + p) else {
                break;
            };
            combo[pos] += 1;
            for q in pos + 1..order {
                combo[q] = combo[q - 1] + 1;
            }
        }
    }
    TermSet::new(d, terms)
}

/// Upper bound `(e·d/d_s)^{d_s}` on `|U(d, d_s)|`.
pub fn cardinality_bound(d: usize, d_s: usize) -> f64 {
    (std::f64::consts::E * d as f64 / d_s as f64).powi(d_s as i32)
}

/// Shape of the per-term frequency sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum IndexShape {
    /// `I_u = {1, …, N_{|u|} − 1}^{|u|}`.
    #[default]
    FullGrid,
    /// `I_u = {(k, …, k) : 1 ≤ k ≤ N_{|u|} − 1}`; identical to the full grid
    /// for single-variable terms.
    Diagonal,
}

impl fmt::Display for IndexShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::FullGrid => "fullgrid",
            Self::Diagonal => "diagonal",
        })
    }
}

impl std::str::FromStr for IndexShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fullgrid" | "full" | "full-grid" => Ok(Self::FullGrid),
            "diagonal" | "diag" => Ok(Self::Diagonal),
            other => Err(Error::InvalidArgument(format!(
                "unknown index shape `{other}`"
            ))),
        }
    }
}

/// Order-dependent bandwidths `N_1, …, N_{d_s}` plus the set shape.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BandwidthSchedule {
    bandwidths: Vec<usize>,
    shape: IndexShape,
}

impl BandwidthSchedule {
    /// `bandwidths[j]` is `N_{j+1}`. Every entry must be at least 2.
    pub fn new(bandwidths: Vec<usize>, shape: IndexShape) -> Result<Self> {
        if let Some((j, &n)) = bandwidths.iter().enumerate().find(|(_, &n)| n < 2) {
            return Err(Error::InvalidArgument(format!(
                "bandwidth N_{} = {n} must be at least 2",
                j + 1
            )));
        }
        Ok(Self { bandwidths, shape })
    }

    pub fn bandwidth(&self, order: usize) -> Option<usize> {
        order
            .checked_sub(1)
            .and_then(|j| self.bandwidths.get(j))
            .copied()
    }

    pub fn bandwidths(&self) -> &[usize] {
        &self.bandwidths
    }

    pub fn shape(&self) -> IndexShape {
        self.shape
    }
}

/// One term's contiguous slice of an [`IndexSet`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermGroup {
    pub term: TermSubset,
    pub range: Range<usize>,
}

/// The frequency index set `I(U) = ∪_u P_u I_u`, stored term-major.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexSet {
    terms: TermSet,
    schedule: BandwidthSchedule,
    indices: Vec<FrequencyIndex>,
    groups: Vec<TermGroup>,
}

/// Builds `I(U)` for the given schedule.
pub fn build_index_set(terms: &TermSet, schedule: &BandwidthSchedule) -> Result<IndexSet> {
    let d = terms.dim();
    let mut indices = Vec::new();
    let mut groups = Vec::with_capacity(terms.len());
    for u in terms.terms() {
        let start = indices.len();
        if u.is_empty() {
            indices.push(FrequencyIndex::zero(d));
        } else {
            let n = schedule
                .bandwidth(u.order())
                .ok_or(Error::MissingOrder(u.order()))?;
            for local in local_frequencies(u.order(), n, schedule.shape()) {
                let mut k = vec![0u32; d];
                for (&coord, &freq) in u.coords().iter().zip(&local) {
                    k[coord] = freq;
                }
                indices.push(FrequencyIndex::new(k));
            }
        }
        groups.push(TermGroup {
            term: u.clone(),
            range: start..indices.len(),
        });
    }
    Ok(IndexSet {
        terms: terms.clone(),
        schedule: schedule.clone(),
        indices,
        groups,
    })
}

/// Frequencies of an order-`m` term in lexicographic order.
fn local_frequencies(m: usize, n: usize, shape: IndexShape) -> Vec<Vec<u32>> {
    let top = (n - 1) as u32;
    match shape {
        IndexShape::Diagonal => (1..=top).map(|k| vec![k; m]).collect(),
        IndexShape::FullGrid => {
            let mut out = Vec::new();
            let mut cur = vec![1u32; m];
            loop {
                out.push(cur.clone());
                let Some(pos) = (0..m).rev().find(|&p| cur[p] < top) else {
                    break;
                };
                cur[pos] += 1;
                for c in cur.iter_mut().skip(pos + 1) {
                    *c = 1;
                }
            }
            out
        }
    }
}

impl IndexSet {
    pub fn dim(&self) -> usize {
        self.terms.dim()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[FrequencyIndex] {
        &self.indices
    }

    pub fn groups(&self) -> &[TermGroup] {
        &self.groups
    }

    pub fn term_set(&self) -> &TermSet {
        &self.terms
    }

    pub fn schedule(&self) -> &BandwidthSchedule {
        &self.schedule
    }

    /// Position of `u` in the grouping.
    pub fn group_of(&self, u: &TermSubset) -> Result<&TermGroup> {
        self.groups
            .binary_search_by(|g| g.term.cmp(u))
            .map(|i| &self.groups[i])
            .map_err(|_| Error::UnknownTerm(u.to_string()))
    }

    /// All frequencies whose support is exactly `u`.
    pub fn gsi_slice(&self, u: &TermSubset) -> Result<&[FrequencyIndex]> {
        let g = self.group_of(u)?;
        Ok(&self.indices[g.range.clone()])
    }

    /// Largest one-dimensional frequency used by any index.
    pub fn max_frequency(&self) -> u32 {
        self.indices
            .iter()
            .flat_map(|k| k.components().iter().copied())
            .max()
            .unwrap_or(0)
    }

    pub fn report(&self) -> IndexSetReport {
        IndexSetReport {
            d: self.dim(),
            shape: self.schedule.shape(),
            bandwidths: self.schedule.bandwidths().to_vec(),
            total: self.len(),
            terms: self
                .groups
                .iter()
                .map(|g| TermSliceReport {
                    attributes: g.term.attributes(),
                    order: g.term.order(),
                    offset: g.range.start,
                    len: g.range.len(),
                })
                .collect(),
        }
    }
}

/// Debug view of an index set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexSetReport {
    pub d: usize,
    pub shape: IndexShape,
    pub bandwidths: Vec<usize>,
    pub total: usize,
    pub terms: Vec<TermSliceReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermSliceReport {
    pub attributes: Vec<usize>,
    pub order: usize,
    pub offset: usize,
    pub len: usize,
}
