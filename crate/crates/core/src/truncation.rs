//! Multi-index truncation sets and the variable-subset bookkeeping used for
//! index extraction.
//!
//! A truncation set is an ordered list of distinct multi-indices containing
//! the zero index first. The canonical ordering is graded lexicographic
//! (total degree ascending, ties broken with the leading component largest
//! first), which makes coefficient vectors and CSV output reproducible. Sets
//! built from the same scheme with growing parameters are nested, and shared
//! elements keep their relative order.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

/// Per-dimension degree cap; keeps the evaluation recurrences well inside
/// their accuracy budget.
pub const MAX_COMPONENT_DEGREE: u32 = 60;

/// Default cap on the number of multi-indices a builder may enumerate.
pub const DEFAULT_INDEX_CAP: usize = 1_000_000;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum TruncationError {
    #[error("dimension must be at least 1")]
    EmptyDimension,
    #[error("maximum degree must be at least 1")]
    ZeroDegree,
    #[error("hyperbolic exponent q must lie in (0, 1], got {0}")]
    InvalidExponent(f64),
    #[error("truncation set would exceed the cap of {cap} multi-indices")]
    TooManyIndices { cap: usize },
    #[error("component degree {0} exceeds the per-dimension cap {MAX_COMPONENT_DEGREE}")]
    DegreeCapExceeded(u32),
    #[error("multi-index has dimension {got}, set has dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("explicit truncation sets must contain the zero multi-index")]
    MissingZeroIndex,
    #[error("explicit truncation sets must not contain duplicates")]
    DuplicateIndex,
    #[error("variable subsets must be nonempty")]
    EmptySubset,
    #[error("variable {0} is outside 1..={1}")]
    VariableOutOfRange(usize, usize),
    #[error("variable subsets support at most 64 dimensions")]
    DimensionTooLarge,
    #[error("cannot parse multi-index line {line}: {reason}")]
    ParseError { line: usize, reason: String },
}

/// A d-dimensional multi-index of nonnegative degrees.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    comps: Vec<u32>,
}

impl MultiIndex {
    pub fn new(comps: Vec<u32>) -> Self {
        Self { comps }
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            comps: vec![0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn components(&self) -> &[u32] {
        &self.comps
    }

    pub fn component(&self, i: usize) -> u32 {
        self.comps[i]
    }

    pub fn total_degree(&self) -> u32 {
        self.comps.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|&a| a == 0)
    }

    /// Bit i set iff component i is nonzero.
    pub fn support_mask(&self) -> u64 {
        let mut mask = 0u64;
        for (i, &a) in self.comps.iter().enumerate() {
            if a > 0 {
                mask |= 1 << i;
            }
        }
        mask
    }

    fn cmp_graded(&self, other: &Self) -> Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            // Larger leading component first, matching e.g. (1,0) before (0,1).
            .then_with(|| other.comps.cmp(&self.comps))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.comps.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

/// How a truncation set was built.
#[derive(Debug, Clone, PartialEq)]
pub enum TruncationScheme {
    /// max_i alpha_i <= alpha_max.
    MaxDegree { alpha_max: u32 },
    /// (sum_i alpha_i^q)^(1/q) <= t.
    Hyperbolic { q: f64, t: u32 },
    /// Caller-provided list.
    Explicit,
}

impl fmt::Display for TruncationScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TruncationScheme::MaxDegree { alpha_max } => write!(f, "max_degree({alpha_max})"),
            TruncationScheme::Hyperbolic { q, t } => write!(f, "hyperbolic(q={q}, t={t})"),
            TruncationScheme::Explicit => write!(f, "explicit"),
        }
    }
}

/// An ordered set of N distinct multi-indices, zero first.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncationSet {
    dim: usize,
    scheme: TruncationScheme,
    indices: Vec<MultiIndex>,
}

impl TruncationSet {
    /// All multi-indices with every component at most `alpha_max`;
    /// N = (alpha_max + 1)^d.
    pub fn max_degree(dim: usize, alpha_max: u32) -> Result<Self, TruncationError> {
        Self::max_degree_capped(dim, alpha_max, DEFAULT_INDEX_CAP)
    }

    pub fn max_degree_capped(
        dim: usize,
        alpha_max: u32,
        cap: usize,
    ) -> Result<Self, TruncationError> {
        if dim == 0 {
            return Err(TruncationError::EmptyDimension);
        }
        if alpha_max == 0 {
            return Err(TruncationError::ZeroDegree);
        }
        if alpha_max > MAX_COMPONENT_DEGREE {
            return Err(TruncationError::DegreeCapExceeded(alpha_max));
        }
        let n = (alpha_max as u128 + 1)
            .checked_pow(dim as u32)
            .ok_or(TruncationError::TooManyIndices { cap })?;
        if n > cap as u128 {
            return Err(TruncationError::TooManyIndices { cap });
        }
        let mut indices = Vec::with_capacity(n as usize);
        let mut current = vec![0u32; dim];
        loop {
            indices.push(MultiIndex::new(current.clone()));
            // Odometer over {0..alpha_max}^d.
            let mut i = dim;
            loop {
                if i == 0 {
                    return Ok(Self::from_sorted(
                        dim,
                        TruncationScheme::MaxDegree { alpha_max },
                        indices,
                    ));
                }
                i -= 1;
                if current[i] < alpha_max {
                    current[i] += 1;
                    current[i + 1..].iter_mut().for_each(|c| *c = 0);
                    break;
                }
            }
        }
    }

    /// All multi-indices with (sum_i alpha_i^q)^(1/q) <= t.
    ///
    /// Membership is evaluated as sum alpha_i^q <= t^q with a 1e-12 slack
    /// toward inclusion, so boundary indices classify deterministically.
    pub fn hyperbolic(dim: usize, q: f64, t: u32) -> Result<Self, TruncationError> {
        Self::hyperbolic_capped(dim, q, t, DEFAULT_INDEX_CAP)
    }

    pub fn hyperbolic_capped(
        dim: usize,
        q: f64,
        t: u32,
        cap: usize,
    ) -> Result<Self, TruncationError> {
        if dim == 0 {
            return Err(TruncationError::EmptyDimension);
        }
        if !(q > 0.0 && q <= 1.0) {
            return Err(TruncationError::InvalidExponent(q));
        }
        if t == 0 {
            return Err(TruncationError::ZeroDegree);
        }
        if t > MAX_COMPONENT_DEGREE {
            return Err(TruncationError::DegreeCapExceeded(t));
        }
        let budget = (t as f64).powf(q) + 1e-12;
        let mut indices = Vec::new();
        let mut current = vec![0u32; dim];
        enumerate_hyperbolic(dim, q, budget, cap, 0, 0.0, &mut current, &mut indices)?;
        Ok(Self::from_sorted(
            dim,
            TruncationScheme::Hyperbolic { q, t },
            indices,
        ))
    }

    /// Build from an explicit list. The list must contain the zero index and
    /// no duplicates; it is reordered canonically.
    pub fn explicit(dim: usize, indices: Vec<MultiIndex>) -> Result<Self, TruncationError> {
        if dim == 0 {
            return Err(TruncationError::EmptyDimension);
        }
        for idx in &indices {
            if idx.dim() != dim {
                return Err(TruncationError::DimensionMismatch {
                    expected: dim,
                    got: idx.dim(),
                });
            }
            if let Some(&a) = idx.components().iter().find(|&&a| a > MAX_COMPONENT_DEGREE) {
                return Err(TruncationError::DegreeCapExceeded(a));
            }
        }
        if !indices.iter().any(|i| i.is_zero()) {
            return Err(TruncationError::MissingZeroIndex);
        }
        let set = Self::from_sorted(dim, TruncationScheme::Explicit, indices);
        if set.indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(TruncationError::DuplicateIndex);
        }
        Ok(set)
    }

    fn from_sorted(dim: usize, scheme: TruncationScheme, mut indices: Vec<MultiIndex>) -> Self {
        indices.sort_by(|a, b| a.cmp_graded(b));
        Self {
            dim,
            scheme,
            indices,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn scheme(&self) -> &TruncationScheme {
        &self.scheme
    }

    /// Number of retained regressors, N.
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn multi_index(&self, pos: usize) -> &MultiIndex {
        &self.indices[pos]
    }

    pub fn max_component(&self) -> u32 {
        self.indices
            .iter()
            .flat_map(|i| i.components().iter().copied())
            .max()
            .unwrap_or(0)
    }

    pub fn contains(&self, idx: &MultiIndex) -> bool {
        self.indices
            .binary_search_by(|probe| probe.cmp_graded(idx))
            .is_ok()
    }

    /// Positions of multi-indices whose support is exactly `u`: alpha_i > 0
    /// for all i in u and alpha_i = 0 elsewhere. These carry the variance
    /// attributed exclusively to the interaction of `u`.
    pub fn sobol_positions(&self, u: &VariableSubset) -> Vec<usize> {
        assert_eq!(u.dim(), self.dim, "subset dimension mismatch");
        let mask = u.mask();
        self.indices
            .iter()
            .enumerate()
            .filter(|(_, idx)| idx.support_mask() == mask)
            .map(|(p, _)| p)
            .collect()
    }

    /// Positions of multi-indices with at least one nonzero degree on a
    /// variable in `u`; these carry the total effect of `u`.
    pub fn total_positions(&self, u: &VariableSubset) -> Vec<usize> {
        assert_eq!(u.dim(), self.dim, "subset dimension mismatch");
        let mask = u.mask();
        self.indices
            .iter()
            .enumerate()
            .filter(|(_, idx)| idx.support_mask() & mask != 0)
            .map(|(p, _)| p)
            .collect()
    }

    /// One multi-index per line, components space-separated, in canonical
    /// order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for idx in &self.indices {
            out.push_str(&idx.to_string());
            out.push('\n');
        }
        out
    }

    /// Parse the [`to_text`](Self::to_text) format back into an explicit set.
    pub fn parse_text(text: &str) -> Result<Self, TruncationError> {
        let mut indices = Vec::new();
        let mut dim = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let comps: Result<Vec<u32>, _> = line.split_whitespace().map(str::parse).collect();
            let comps = comps.map_err(|e| TruncationError::ParseError {
                line: lineno + 1,
                reason: e.to_string(),
            })?;
            match dim {
                None => dim = Some(comps.len()),
                Some(d) if d != comps.len() => {
                    return Err(TruncationError::DimensionMismatch {
                        expected: d,
                        got: comps.len(),
                    })
                }
                _ => {}
            }
            indices.push(MultiIndex::new(comps));
        }
        let dim = dim.ok_or(TruncationError::EmptyDimension)?;
        Self::explicit(dim, indices)
    }
}

#[allow(clippy::too_many_arguments)]
fn enumerate_hyperbolic(
    dim: usize,
    q: f64,
    budget: f64,
    cap: usize,
    pos: usize,
    partial: f64,
    current: &mut Vec<u32>,
    out: &mut Vec<MultiIndex>,
) -> Result<(), TruncationError> {
    if pos == dim {
        if out.len() >= cap {
            return Err(TruncationError::TooManyIndices { cap });
        }
        out.push(MultiIndex::new(current.clone()));
        return Ok(());
    }
    let mut a = 0u32;
    loop {
        let term = if a == 0 { 0.0 } else { (a as f64).powf(q) };
        if partial + term > budget {
            break;
        }
        current[pos] = a;
        enumerate_hyperbolic(dim, q, budget, cap, pos + 1, partial + term, current, out)?;
        a += 1;
    }
    current[pos] = 0;
    Ok(())
}

/// A nonempty subset of the input variables {1, ..., d}, stored as a bit
/// mask (bit i for variable i+1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VariableSubset {
    dim: usize,
    mask: u64,
}

impl VariableSubset {
    /// Build from 1-based variable numbers.
    pub fn new(dim: usize, vars: &[usize]) -> Result<Self, TruncationError> {
        if dim == 0 {
            return Err(TruncationError::EmptyDimension);
        }
        if dim > 64 {
            return Err(TruncationError::DimensionTooLarge);
        }
        if vars.is_empty() {
            return Err(TruncationError::EmptySubset);
        }
        let mut mask = 0u64;
        for &v in vars {
            if v == 0 || v > dim {
                return Err(TruncationError::VariableOutOfRange(v, dim));
            }
            let bit = 1u64 << (v - 1);
            if mask & bit != 0 {
                return Err(TruncationError::DuplicateIndex);
            }
            mask |= bit;
        }
        Ok(Self { dim, mask })
    }

    pub fn from_mask(dim: usize, mask: u64) -> Result<Self, TruncationError> {
        if dim == 0 {
            return Err(TruncationError::EmptyDimension);
        }
        if dim > 64 {
            return Err(TruncationError::DimensionTooLarge);
        }
        if mask == 0 {
            return Err(TruncationError::EmptySubset);
        }
        if mask >> dim != 0 {
            return Err(TruncationError::VariableOutOfRange(64, dim));
        }
        Ok(Self { dim, mask })
    }

    pub fn singleton(dim: usize, var: usize) -> Result<Self, TruncationError> {
        Self::new(dim, &[var])
    }

    pub fn full(dim: usize) -> Result<Self, TruncationError> {
        if dim == 0 {
            return Err(TruncationError::EmptyDimension);
        }
        if dim > 64 {
            return Err(TruncationError::DimensionTooLarge);
        }
        Ok(Self {
            dim,
            mask: if dim == 64 { u64::MAX } else { (1 << dim) - 1 },
        })
    }

    /// All 2^d - 1 nonempty subsets, ordered by cardinality then by mask.
    pub fn enumerate_all(dim: usize) -> Result<Vec<Self>, TruncationError> {
        if dim == 0 {
            return Err(TruncationError::EmptyDimension);
        }
        if dim > 12 {
            return Err(TruncationError::DimensionTooLarge);
        }
        let mut all: Vec<Self> = (1..(1u64 << dim)).map(|mask| Self { dim, mask }).collect();
        all.sort_by_key(|s| (s.cardinality(), s.mask));
        Ok(all)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    pub fn cardinality(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn contains(&self, var: usize) -> bool {
        var >= 1 && var <= self.dim && self.mask & (1 << (var - 1)) != 0
    }

    pub fn intersects(&self, other: &Self) -> bool {
        self.mask & other.mask != 0
    }

    /// 1-based member variables, ascending.
    pub fn vars(&self) -> Vec<usize> {
        (1..=self.dim).filter(|&v| self.contains(v)).collect()
    }
}

impl fmt::Display for VariableSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let vars = self.vars();
        for (i, v) in vars.iter().enumerate() {
            if i > 0 {
                write!(f, "|")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}


#[cfg(test)]
mod prop_tests {
    use super::*;
    use proptest::prelude::*;

    fn is_subsequence(small: &TruncationSet, large: &TruncationSet) -> bool {
        let mut it = large.indices().iter();
        small.indices().iter().all(|idx| it.any(|l| l == idx))
    }

    proptest! {
        #[test]
        fn max_degree_sets_nest(dim in 1usize..=3, lo in 1u32..=3, extra in 0u32..=3) {
            let small = TruncationSet::max_degree(dim, lo).unwrap();
            let large = TruncationSet::max_degree(dim, lo + extra).unwrap();
            prop_assert!(small.multi_index(0).is_zero());
            prop_assert!(is_subsequence(&small, &large));
        }

        #[test]
        fn hyperbolic_sets_nest(dim in 1usize..=3, q in 0.3f64..=1.0, lo in 1u32..=3, extra in 0u32..=3) {
            let small = TruncationSet::hyperbolic(dim, q, lo).unwrap();
            let large = TruncationSet::hyperbolic(dim, q, lo + extra).unwrap();
            prop_assert!(small.multi_index(0).is_zero());
            prop_assert!(is_subsequence(&small, &large));
        }

        #[test]
        fn sobol_positions_partition_everything(dim in 1usize..=3, q in 0.3f64..=1.0, t in 1u32..=4) {
            let set = TruncationSet::hyperbolic(dim, q, t).unwrap();
            let mut seen = vec![false; set.len()];
            seen[0] = true;
            for u in VariableSubset::enumerate_all(dim).unwrap() {
                for p in set.sobol_positions(&u) {
                    prop_assert!(!seen[p]);
                    seen[p] = true;
                }
                let sob = set.sobol_positions(&u);
                let tot = set.total_positions(&u);
                prop_assert!(sob.iter().all(|p| tot.contains(p)));
            }
            prop_assert!(seen.iter().all(|&s| s));
        }
    }
}
