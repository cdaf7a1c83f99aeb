//! Sobol and total-effect indices: closed-form extraction from metamodel
//! coefficients, analytic values for the benchmark functions, and a
//! pick-freeze Monte Carlo oracle used as an independent check in tests.

use std::io::{self, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::fitting::Metamodel;
use crate::measure::ProductMeasure;
use crate::truncation::{TruncationError, VariableSubset};

/// Full 2^d - 1 subset enumeration is limited to this many dimensions;
/// beyond it, callers must supply an explicit subset list.
pub const MAX_ENUMERATED_DIM: usize = 12;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum IndexError {
    #[error(transparent)]
    Subset(#[from] TruncationError),
    #[error("enumerating all subsets is supported up to dimension {MAX_ENUMERATED_DIM}, got {0}")]
    DimensionTooLarge(usize),
    #[error("subset list contains duplicates")]
    DuplicateSubset,
    #[error("subset has dimension {got}, model has dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("g-function coefficients must be nonnegative, got {0}")]
    NegativeCoefficient(f64),
    #[error("function variance is zero; indices are undefined")]
    ZeroVariance,
    #[error("Monte Carlo oracle needs at least {min} points, got {got}")]
    SampleTooSmall { min: usize, got: usize },
    #[error("oracle function evaluation failed: {0}")]
    Evaluation(String),
}

/// Per-subset Sobol and total-effect estimates with the underlying variance.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexReport {
    dim: usize,
    variance: f64,
    degenerate: bool,
    subsets: Vec<VariableSubset>,
    sobol: Vec<f64>,
    total: Vec<f64>,
}

impl IndexReport {
    pub fn from_parts(
        dim: usize,
        variance: f64,
        degenerate: bool,
        subsets: Vec<VariableSubset>,
        sobol: Vec<f64>,
        total: Vec<f64>,
    ) -> Self {
        assert_eq!(subsets.len(), sobol.len());
        assert_eq!(subsets.len(), total.len());
        Self {
            dim,
            variance,
            degenerate,
            subsets,
            sobol,
            total,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn subsets(&self) -> &[VariableSubset] {
        &self.subsets
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VariableSubset, f64, f64)> {
        self.subsets
            .iter()
            .zip(self.sobol.iter().zip(&self.total))
            .map(|(u, (&s, &t))| (u, s, t))
    }

    pub fn sobol(&self, u: &VariableSubset) -> Option<f64> {
        self.position(u).map(|p| self.sobol[p])
    }

    pub fn total(&self, u: &VariableSubset) -> Option<f64> {
        self.position(u).map(|p| self.total[p])
    }

    fn position(&self, u: &VariableSubset) -> Option<usize> {
        self.subsets.iter().position(|s| s == u)
    }

    pub fn sum_sobol(&self) -> f64 {
        self.sobol.iter().sum()
    }

    /// Largest |S_u - S'_u| and |T_u - T'_u| over the shared subsets.
    pub fn max_abs_difference(&self, other: &IndexReport) -> f64 {
        let mut worst: f64 = 0.0;
        for (u, s, t) in self.iter() {
            if let (Some(os), Some(ot)) = (other.sobol(u), other.total(u)) {
                worst = worst.max((s - os).abs()).max((t - ot).abs());
            }
        }
        worst
    }

    /// CSV with a metadata line carrying the variance and degenerate flag,
    /// then one row per subset.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "variance={},degenerate={}", self.variance, self.degenerate)?;
        writeln!(w, "subset,sobol,total")?;
        for (u, s, t) in self.iter() {
            writeln!(w, "{u},{s},{t}")?;
        }
        Ok(())
    }
}

/// Partial variances of a coefficient expansion grouped by support mask.
/// Entry 0 (the empty mask) is always zero.
fn partial_variances(model: &Metamodel) -> Vec<f64> {
    let dim = model.basis().dim();
    let mut by_mask = vec![0.0; 1 << dim];
    for (alpha, &c) in model
        .truncation()
        .indices()
        .iter()
        .zip(model.coefficients())
    {
        let mask = alpha.support_mask() as usize;
        if mask != 0 {
            by_mask[mask] += c * c;
        }
    }
    by_mask
}

/// Closed-form Sobol and total-effect indices of a fitted expansion.
///
/// A degenerate model (zero variance or singular OLS system) reports the
/// 2^-d convention for every index, Sobol and total alike.
pub fn indices_from_coeffs(model: &Metamodel) -> Result<IndexReport, IndexError> {
    let dim = model.basis().dim();
    if dim > MAX_ENUMERATED_DIM {
        return Err(IndexError::DimensionTooLarge(dim));
    }
    let subsets = VariableSubset::enumerate_all(dim)?;
    indices_for_subsets(model, &subsets)
}

/// Same as [`indices_from_coeffs`] for an explicit subset list (required
/// above dimension 12).
pub fn indices_for_subsets(
    model: &Metamodel,
    subsets: &[VariableSubset],
) -> Result<IndexReport, IndexError> {
    let dim = model.basis().dim();
    for u in subsets {
        if u.dim() != dim {
            return Err(IndexError::DimensionMismatch {
                expected: dim,
                got: u.dim(),
            });
        }
    }
    let mut seen = std::collections::HashSet::new();
    if !subsets.iter().all(|u| seen.insert(u.mask())) {
        return Err(IndexError::DuplicateSubset);
    }

    let variance = model.variance();
    if model.is_degenerate() || variance == 0.0 {
        let value = 0.5f64.powi(dim as i32);
        return Ok(IndexReport::from_parts(
            dim,
            0.0,
            true,
            subsets.to_vec(),
            vec![value; subsets.len()],
            vec![value; subsets.len()],
        ));
    }

    if dim <= MAX_ENUMERATED_DIM {
        // Subset-sum table over support masks: zeta[w] = sum_{m subseteq w} D_m.
        let mut zeta = partial_variances(model);
        let full = zeta.len();
        for bit in 0..dim {
            for mask in 0..full {
                if mask & (1 << bit) != 0 {
                    zeta[mask] += zeta[mask ^ (1 << bit)];
                }
            }
        }
        let by_mask = partial_variances(model);
        let full_mask = full - 1;
        let mut sobol = Vec::with_capacity(subsets.len());
        let mut total = Vec::with_capacity(subsets.len());
        for u in subsets {
            let m = u.mask() as usize;
            sobol.push(by_mask[m] / variance);
            // T_u = 1 - sum over masks disjoint from u.
            total.push(1.0 - zeta[full_mask & !m] / variance);
        }
        Ok(IndexReport::from_parts(
            dim,
            variance,
            false,
            subsets.to_vec(),
            sobol,
            total,
        ))
    } else {
        // Direct scans; no 2^d table above the enumeration cap.
        let trunc = model.truncation();
        let coeffs = model.coefficients();
        let mut sobol = Vec::with_capacity(subsets.len());
        let mut total = Vec::with_capacity(subsets.len());
        for u in subsets {
            let s: f64 = trunc
                .sobol_positions(u)
                .into_iter()
                .map(|p| coeffs[p] * coeffs[p])
                .sum();
            let t: f64 = trunc
                .total_positions(u)
                .into_iter()
                .map(|p| coeffs[p] * coeffs[p])
                .sum();
            sobol.push(s / variance);
            total.push(t / variance);
        }
        Ok(IndexReport::from_parts(
            dim,
            variance,
            false,
            subsets.to_vec(),
            sobol,
            total,
        ))
    }
}

/// General subset-group index: the sum of the Sobol indices over a
/// collection of distinct subsets. Specializes to S_u for a single subset
/// and to T_u for the collection of all subsets intersecting u.
pub fn general_index(model: &Metamodel, groups: &[VariableSubset]) -> Result<f64, IndexError> {
    let report = indices_for_subsets(model, groups)?;
    Ok(report.sum_sobol())
}

/// Analytic indices of the g-function prod_i (|4 x_i - 2| + c_i) / (1 + c_i)
/// under the uniform measure on [0,1]^d.
pub fn analytic_gfunction_indices(c: &[f64]) -> Result<IndexReport, IndexError> {
    let dim = c.len();
    if dim == 0 || dim > MAX_ENUMERATED_DIM {
        return Err(IndexError::DimensionTooLarge(dim));
    }
    if let Some(&bad) = c.iter().find(|&&ci| ci < 0.0) {
        return Err(IndexError::NegativeCoefficient(bad));
    }
    // Per-factor variance a_i = (1/3)(c_i + 1)^-2; D = prod (1 + a_i) - 1.
    let a: Vec<f64> = c.iter().map(|ci| (ci + 1.0).powi(-2) / 3.0).collect();
    let variance = a.iter().map(|ai| 1.0 + ai).product::<f64>() - 1.0;
    if variance == 0.0 {
        return Err(IndexError::ZeroVariance);
    }
    let subsets = VariableSubset::enumerate_all(dim)?;
    let mut sobol = Vec::with_capacity(subsets.len());
    let mut total = Vec::with_capacity(subsets.len());
    for u in &subsets {
        let d_u: f64 = u.vars().iter().map(|&v| a[v - 1]).product();
        sobol.push(d_u / variance);
        // 1 - (prod over the complement of (1 + a_i) - 1) / D.
        let complement: f64 = (1..=dim)
            .filter(|v| !u.contains(*v))
            .map(|v| 1.0 + a[v - 1])
            .product();
        total.push(1.0 - (complement - 1.0) / variance);
    }
    Ok(IndexReport::from_parts(
        dim, variance, false, subsets, sobol, total,
    ))
}

/// Analytic indices of the Ishigami function sin x1 + a sin^2 x2 +
/// b x3^4 sin x1 under the uniform measure on [-pi, pi]^3.
pub fn analytic_ishigami_indices(a: f64, b: f64) -> Result<IndexReport, IndexError> {
    let pi4 = std::f64::consts::PI.powi(4);
    let pi8 = pi4 * pi4;
    let v = a * a / 8.0 + b * pi4 / 5.0 + b * b * pi8 / 18.0 + 0.5;
    if v <= 0.0 {
        return Err(IndexError::ZeroVariance);
    }
    let s1 = b * pi4 / (5.0 * v) + b * b * pi8 / (50.0 * v) + 1.0 / (2.0 * v);
    let s2 = a * a / (8.0 * v);
    let s13 = 8.0 * b * b * pi8 / (225.0 * v);
    let subsets = VariableSubset::enumerate_all(3)?;
    let mut sobol = Vec::with_capacity(subsets.len());
    let mut total = Vec::with_capacity(subsets.len());
    let value = |u: &VariableSubset| -> f64 {
        match (u.contains(1), u.contains(2), u.contains(3)) {
            (true, false, false) => s1,
            (false, true, false) => s2,
            (true, false, true) => s13,
            _ => 0.0,
        }
    };
    for u in &subsets {
        sobol.push(value(u));
        // Totals by summation over intersecting subsets.
        let t = subsets
            .iter()
            .filter(|v| v.intersects(u))
            .map(&value)
            .sum::<f64>();
        total.push(t);
    }
    Ok(IndexReport::from_parts(
        3, v, false, subsets, sobol, total,
    ))
}

/// Pick-freeze estimate of one subset's Sobol and total-effect index with
/// block-based standard errors.
#[derive(Debug, Clone, Copy)]
pub struct OracleEstimate {
    pub sobol: f64,
    pub total: f64,
    pub sobol_se: f64,
    pub total_se: f64,
}

impl OracleEstimate {
    pub fn sobol_agrees(&self, reference: f64, n_se: f64) -> bool {
        (self.sobol - reference).abs() <= n_se * self.sobol_se
    }

    pub fn total_agrees(&self, reference: f64, n_se: f64) -> bool {
        (self.total - reference).abs() <= n_se * self.total_se
    }
}

const ORACLE_BLOCKS: usize = 50;
const ORACLE_MIN_POINTS: usize = 1000;

/// Brute-force Monte Carlo oracle for (S_u, T_u) of a black-box `f` under a
/// product measure.
///
/// The closed index of each w subseteq u is estimated pick-freeze style and
/// combined by inclusion-exclusion into the interaction-only S_u; T_u uses
/// the squared-difference (Jansen) form. Estimates and standard errors come
/// from 50 independent blocks. Intended as a test oracle, not a production
/// estimator.
pub fn mc_oracle_indices<F: Fn(&[f64]) -> f64>(
    f: F,
    measure: &ProductMeasure,
    u: &VariableSubset,
    n_mc: usize,
    seed: u64,
) -> Result<OracleEstimate, IndexError> {
    if n_mc < ORACLE_MIN_POINTS {
        return Err(IndexError::SampleTooSmall {
            min: ORACLE_MIN_POINTS,
            got: n_mc,
        });
    }
    if u.dim() != measure.dim() {
        return Err(IndexError::DimensionMismatch {
            expected: measure.dim(),
            got: u.dim(),
        });
    }
    let dim = measure.dim();
    let per_block = n_mc / ORACLE_BLOCKS;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);

    // Proper nonempty sub-subsets of u for the inclusion-exclusion, plus u
    // itself, as masks.
    let u_mask = u.mask();
    let sub_masks: Vec<u64> = submasks(u_mask).filter(|&m| m != 0).collect();

    let mut sobol_blocks = Vec::with_capacity(ORACLE_BLOCKS);
    let mut total_blocks = Vec::with_capacity(ORACLE_BLOCKS);
    let mut grand_values: Vec<f64> = Vec::with_capacity(2 * per_block.min(4096));

    let mut x_point = vec![0.0; dim];
    let mut z_point = vec![0.0; dim];
    let mut hybrid = vec![0.0; dim];

    for _ in 0..ORACLE_BLOCKS {
        let x = measure.sample_with_rng(per_block, &mut rng).unwrap();
        let z = measure.sample_with_rng(per_block, &mut rng).unwrap();
        let mut fx = Vec::with_capacity(per_block);
        for row in x.rows() {
            fx.push(f(row));
        }
        // Closed indices of each w: hybrid keeps x on w, redraws elsewhere.
        let mut closed = vec![0.0; sub_masks.len()];
        for (slot, &w) in closed.iter_mut().zip(&sub_masks) {
            let mut sum_prod = 0.0;
            let mut sum_mean = 0.0;
            let mut sum_sq = 0.0;
            for ((x_row, z_row), &fxi) in x.rows().zip(z.rows()).zip(&fx) {
                x_point.copy_from_slice(x_row);
                z_point.copy_from_slice(z_row);
                for j in 0..dim {
                    hybrid[j] = if w & (1 << j) != 0 {
                        x_point[j]
                    } else {
                        z_point[j]
                    };
                }
                let fh = f(&hybrid);
                sum_prod += fxi * fh;
                sum_mean += 0.5 * (fxi + fh);
                sum_sq += 0.5 * (fxi * fxi + fh * fh);
            }
            let m = per_block as f64;
            let mean = sum_mean / m;
            let var = sum_sq / m - mean * mean;
            if var <= 0.0 {
                return Err(IndexError::ZeroVariance);
            }
            *slot = (sum_prod / m - mean * mean) / var;
        }
        // Inclusion-exclusion down to the interaction-only index.
        let mut s_u = 0.0;
        let u_card = u_mask.count_ones();
        for (&w, &closed_w) in sub_masks.iter().zip(&closed) {
            let sign = if (u_card - w.count_ones()).is_multiple_of(2) {
                1.0
            } else {
                -1.0
            };
            s_u += sign * closed_w;
        }
        sobol_blocks.push(s_u);

        // Jansen form for the total effect: redraw exactly the u variables.
        let mut sum_diff_sq = 0.0;
        let mut sum_fx = 0.0;
        let mut sum_fx_sq = 0.0;
        for ((x_row, z_row), &fxi) in x.rows().zip(z.rows()).zip(&fx) {
            x_point.copy_from_slice(x_row);
            z_point.copy_from_slice(z_row);
            for j in 0..dim {
                hybrid[j] = if u_mask & (1 << j) != 0 {
                    z_point[j]
                } else {
                    x_point[j]
                };
            }
            let fh = f(&hybrid);
            sum_diff_sq += (fxi - fh) * (fxi - fh);
            sum_fx += fxi;
            sum_fx_sq += fxi * fxi;
        }
        let m = per_block as f64;
        let mean = sum_fx / m;
        let var = sum_fx_sq / m - mean * mean;
        if var <= 0.0 {
            return Err(IndexError::ZeroVariance);
        }
        total_blocks.push(sum_diff_sq / (2.0 * m * var));

        if grand_values.len() < 4096 {
            let room = 4096 - grand_values.len();
            grand_values.extend(fx.iter().copied().take(room));
        }
    }

    let overall_var = {
        let n = grand_values.len() as f64;
        let mean = grand_values.iter().sum::<f64>() / n;
        grand_values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n
    };
    if overall_var <= 0.0 {
        return Err(IndexError::ZeroVariance);
    }

    let (sobol, sobol_se) = block_mean_se(&sobol_blocks);
    let (total, total_se) = block_mean_se(&total_blocks);
    Ok(OracleEstimate {
        sobol,
        total,
        sobol_se,
        total_se,
    })
}

fn block_mean_se(blocks: &[f64]) -> (f64, f64) {
    let b = blocks.len() as f64;
    let mean = blocks.iter().sum::<f64>() / b;
    let var = blocks.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (b - 1.0);
    (mean, (var / b).sqrt())
}

/// Iterate all submasks of `mask`, including 0 and the mask itself.
fn submasks(mask: u64) -> impl Iterator<Item = u64> {
    let mut current = mask;
    let mut done = false;
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let out = current;
        if current == 0 {
            done = true;
        } else {
            current = (current - 1) & mask;
        }
        Some(out)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::BasisSpec;
    use crate::fitting::FitMethod;
    use crate::truncation::{MultiIndex, TruncationSet};

    fn model_with(coeff_map: &[(&[u32], f64)], dim: usize, alpha_max: u32) -> Metamodel {
        let basis = BasisSpec::legendre(dim);
        let trunc = TruncationSet::max_degree(dim, alpha_max).unwrap();
        let mut coeffs = vec![0.0; trunc.len()];
        for (comps, value) in coeff_map {
            let alpha = MultiIndex::new(comps.to_vec());
            let pos = trunc.indices().iter().position(|i| *i == alpha).unwrap();
            coeffs[pos] = *value;
        }
        Metamodel::from_coefficients(basis, trunc, coeffs, FitMethod::Projection).unwrap()
    }

    fn subset(dim: usize, vars: &[usize]) -> VariableSubset {
        VariableSubset::new(dim, vars).unwrap()
    }

    #[test]
    fn ratio_example() {
        let model = model_with(
            &[(&[0, 0], 5.0), (&[1, 0], 2.0), (&[0, 1], 1.0), (&[1, 1], 0.0)],
            2,
            1,
        );
        let report = indices_from_coeffs(&model).unwrap();
        assert!((report.sobol(&subset(2, &[1])).unwrap() - 0.8).abs() < 1e-15);
        assert!((report.sobol(&subset(2, &[2])).unwrap() - 0.2).abs() < 1e-15);
        assert!(report.sobol(&subset(2, &[1, 2])).unwrap().abs() < 1e-15);
        assert!((report.total(&subset(2, &[1])).unwrap() - 0.8).abs() < 1e-15);
        assert!((report.total(&subset(2, &[2])).unwrap() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn degenerate_convention() {
        let model = model_with(&[], 2, 1);
        let report = indices_from_coeffs(&model).unwrap();
        assert!(report.is_degenerate());
        for (_, s, t) in report.iter() {
            assert_eq!(s, 0.25);
            assert_eq!(t, 0.25);
        }
    }

    #[test]
    fn single_interaction_term() {
        let model = model_with(&[(&[1, 1], 3.0)], 2, 1);
        let report = indices_from_coeffs(&model).unwrap();
        assert_eq!(report.sobol(&subset(2, &[1, 2])).unwrap(), 1.0);
        assert_eq!(report.total(&subset(2, &[1])).unwrap(), 1.0);
        assert_eq!(report.total(&subset(2, &[2])).unwrap(), 1.0);
        assert_eq!(report.sobol(&subset(2, &[1])).unwrap(), 0.0);
        assert_eq!(report.sobol(&subset(2, &[2])).unwrap(), 0.0);
    }

    #[test]
    fn indices_sum_to_one_and_totals_dominate() {
        let model = model_with(
            &[
                (&[0, 0, 0], 4.0),
                (&[1, 0, 0], 1.0),
                (&[0, 2, 0], -0.5),
                (&[1, 1, 0], 0.25),
                (&[1, 1, 1], 0.1),
                (&[0, 0, 3], 0.7),
            ],
            3,
            3,
        );
        let report = indices_from_coeffs(&model).unwrap();
        assert!((report.sum_sobol() - 1.0).abs() < 1e-10);
        for (u, s, t) in report.iter() {
            assert!(t >= s - 1e-12, "{u}: {t} < {s}");
        }
        let full = subset(3, &[1, 2, 3]);
        assert!((report.total(&full).unwrap() - 1.0).abs() < 1e-12);
        // T_u = 1 - sum of Sobol indices over disjoint subsets.
        for (u, _, t) in report.iter() {
            let disjoint: f64 = report
                .iter()
                .filter(|(v, _, _)| !v.intersects(u))
                .map(|(_, s, _)| s)
                .sum();
            assert!((t - (1.0 - disjoint)).abs() < 1e-10);
        }
    }

    #[test]
    fn scale_and_shift_invariance() {
        let base = &[
            (&[0, 0][..], 5.0),
            (&[1, 0][..], 2.0),
            (&[0, 1][..], 1.0),
            (&[2, 2][..], 0.5),
        ];
        let model = model_with(base, 2, 2);
        let scaled: Vec<(&[u32], f64)> = base
            .iter()
            .map(|&(c, v)| {
                let v = if c.iter().all(|&a| a == 0) {
                    -3.0 * v + 7.0
                } else {
                    -3.0 * v
                };
                (c, v)
            })
            .collect();
        let scaled_model = model_with(&scaled, 2, 2);
        let a = indices_from_coeffs(&model).unwrap();
        let b = indices_from_coeffs(&scaled_model).unwrap();
        assert!(a.max_abs_difference(&b) < 1e-12);
    }

    #[test]
    fn general_index_examples() {
        let model = model_with(
            &[(&[0, 0], 5.0), (&[1, 0], 2.0), (&[0, 1], 1.0), (&[1, 1], 0.0)],
            2,
            1,
        );
        let all = VariableSubset::enumerate_all(2).unwrap();
        assert!((general_index(&model, &all).unwrap() - 1.0).abs() < 1e-12);
        let single = [subset(2, &[1])];
        assert!((general_index(&model, &single).unwrap() - 0.8).abs() < 1e-12);
        // All subsets meeting {1}: recovers the total effect.
        let meeting: Vec<_> = all
            .iter()
            .copied()
            .filter(|v| v.contains(1))
            .collect();
        assert!((general_index(&model, &meeting).unwrap() - 0.8).abs() < 1e-12);
        let dup = [subset(2, &[1]), subset(2, &[1])];
        assert!(matches!(
            general_index(&model, &dup),
            Err(IndexError::DuplicateSubset)
        ));
    }

    #[test]
    fn gfunction_reference_values() {
        let report = analytic_gfunction_indices(&[0.0, 4.0]).unwrap();
        assert!((report.sobol(&subset(2, &[1])).unwrap() - 75.0 / 79.0).abs() < 1e-12);
        assert!((report.sobol(&subset(2, &[2])).unwrap() - 3.0 / 79.0).abs() < 1e-12);
        assert!((report.sobol(&subset(2, &[1, 2])).unwrap() - 1.0 / 79.0).abs() < 1e-12);
        assert!((report.sum_sobol() - 1.0).abs() < 1e-12);

        let single = analytic_gfunction_indices(&[0.0]).unwrap();
        assert!((single.sobol(&subset(1, &[1])).unwrap() - 1.0).abs() < 1e-14);

        let any = analytic_gfunction_indices(&[1.3, 0.2, 7.0]).unwrap();
        assert!((any.sum_sobol() - 1.0).abs() < 1e-12);

        assert!(matches!(
            analytic_gfunction_indices(&[-1.0]),
            Err(IndexError::NegativeCoefficient(_))
        ));
    }

    #[test]
    fn ishigami_reference_values() {
        let report = analytic_ishigami_indices(7.0, 0.1).unwrap();
        let s1 = report.sobol(&subset(3, &[1])).unwrap();
        let s2 = report.sobol(&subset(3, &[2])).unwrap();
        let s13 = report.sobol(&subset(3, &[1, 3])).unwrap();
        assert!((s1 - 0.3139).abs() < 5e-4, "S1 = {s1}");
        assert!((s2 - 0.4424).abs() < 5e-4, "S2 = {s2}");
        assert!((s13 - 0.2437).abs() < 5e-4, "S13 = {s13}");
        assert_eq!(report.sobol(&subset(3, &[3])).unwrap(), 0.0);
        assert!((report.sum_sobol() - 1.0).abs() < 1e-12);
        // T1 = S1 + S13 and T3 = S13.
        assert!((report.total(&subset(3, &[1])).unwrap() - (s1 + s13)).abs() < 1e-12);
        assert!((report.total(&subset(3, &[3])).unwrap() - s13).abs() < 1e-12);

        let pure_sine = analytic_ishigami_indices(0.0, 0.0).unwrap();
        assert_eq!(pure_sine.sobol(&subset(3, &[1])).unwrap(), 1.0);
        assert_eq!(pure_sine.sobol(&subset(3, &[2])).unwrap(), 0.0);
        assert!((pure_sine.variance() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn oracle_on_pure_basis_function() {
        let basis = BasisSpec::legendre(2);
        let alpha = MultiIndex::new(vec![1, 0]);
        let f = |x: &[f64]| basis.eval_multivariate(&alpha, x).unwrap();
        let est = mc_oracle_indices(
            f,
            &ProductMeasure::uniform_sym(2),
            &subset(2, &[1]),
            20_000,
            3,
        )
        .unwrap();
        assert!(est.sobol_agrees(1.0, 3.0), "S = {} +- {}", est.sobol, est.sobol_se);
        assert!(est.total_agrees(1.0, 3.0), "T = {} +- {}", est.total, est.total_se);
    }

    #[test]
    fn oracle_rejects_constant_functions() {
        let f = |_: &[f64]| 2.5;
        let err = mc_oracle_indices(
            f,
            &ProductMeasure::uniform_unit(2),
            &subset(2, &[1]),
            2_000,
            1,
        );
        assert!(matches!(err, Err(IndexError::ZeroVariance)));
    }

    #[test]
    fn oracle_rejects_tiny_samples() {
        let f = |x: &[f64]| x[0];
        let err = mc_oracle_indices(
            f,
            &ProductMeasure::uniform_unit(1),
            &subset(1, &[1]),
            10,
            1,
        );
        assert!(matches!(err, Err(IndexError::SampleTooSmall { .. })));
    }

    #[test]
    fn csv_format() {
        let model = model_with(&[(&[0, 0], 5.0), (&[1, 0], 2.0)], 2, 1);
        let report = indices_from_coeffs(&model).unwrap();
        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "variance=4,degenerate=false");
        assert_eq!(lines.next().unwrap(), "subset,sobol,total");
        assert_eq!(lines.next().unwrap(), "1,1,1");
        assert!(text.lines().count() == 2 + 3);
    }
}
