//! Error bounds for index estimates: the per-index and max bounds driven by
//! the relative approximation error, the sample-based quality-control method
//! built on holdout RMSE, the bootstrap baseline, and the coefficient pairs
//! that attain the bounds with equality.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use thiserror::Error;

use crate::basis::BasisSpec;
use crate::fitting::{fit, rmse_holdout, FitError, FitMethod, Metamodel, TrainingSample};
use crate::indices::{indices_from_coeffs, IndexError, IndexReport};
use crate::seed::derive_seed;
use crate::truncation::{TruncationSet, VariableSubset};

/// Bootstrap error bounds use this multiple of the resample standard
/// deviation.
pub const BOOTSTRAP_MULTIPLIER: f64 = 3.0;

/// Default holdout fraction for the quality-control split.
pub const DEFAULT_HOLDOUT_FRACTION: f64 = 0.15;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum QualityError {
    #[error("relative error must be nonnegative and finite, got {0}")]
    InvalidEpsilon(f64),
    #[error("the reference function has zero variance")]
    ZeroVariance,
    #[error("coefficient vectors must have equal length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("metamodels must share one truncation set")]
    TruncationMismatch,
    #[error("bootstrap needs at least 2 resamples, got {0}")]
    TooFewResamples(usize),
    #[error("scaled witnesses need a target in (0, 1], got {0}")]
    InvalidWitnessTarget(f64),
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error(transparent)]
    Index(#[from] IndexError),
}

/// The relative approximation error ||f - f_hat|| / sqrt(V[f]) (or its
/// symmetrized sample variant).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativeError(f64);

impl RelativeError {
    pub fn new(value: f64) -> Result<Self, QualityError> {
        if value.is_nan() || value < 0.0 {
            return Err(QualityError::InvalidEpsilon(value));
        }
        Ok(Self(value))
    }

    pub fn value(&self) -> f64 {
        self.0
    }

    /// Exact epsilon of two expansions over a shared orthonormal set, with
    /// coefficient index 0 holding the mean: the squared distance sums every
    /// coefficient difference, the variance omits the mean.
    pub fn from_coefficients(truth: &[f64], approx: &[f64]) -> Result<Self, QualityError> {
        if truth.len() != approx.len() {
            return Err(QualityError::LengthMismatch(truth.len(), approx.len()));
        }
        let dist_sq: f64 = truth
            .iter()
            .zip(approx)
            .map(|(c, h)| (c - h) * (c - h))
            .sum();
        let variance: f64 = truth[1..].iter().map(|c| c * c).sum();
        if variance <= 0.0 {
            return Err(QualityError::ZeroVariance);
        }
        Self::new((dist_sq / variance).sqrt())
    }

    pub fn from_metamodels(truth: &Metamodel, approx: &Metamodel) -> Result<Self, QualityError> {
        if truth.truncation().indices() != approx.truncation().indices() {
            return Err(QualityError::TruncationMismatch);
        }
        Self::from_coefficients(truth.coefficients(), approx.coefficients())
    }
}

/// Resolved per-index bound min(1, eps + 2 sqrt(S), eps + 2 sqrt(1-S)) * eps,
/// capped at one since index differences cannot exceed one.
pub fn bound_per_index(eps: RelativeError, s: f64) -> f64 {
    debug_assert!((-1e-12..=1.0 + 1e-12).contains(&s), "index {s} out of range");
    let s = s.clamp(0.0, 1.0);
    let e = eps.value();
    let inner = 1f64
        .min(e + 2.0 * s.sqrt())
        .min(e + 2.0 * (1.0 - s).sqrt());
    (inner * e).min(1.0)
}

/// Two-sided bound (sqrt(S(1-S_hat)) + sqrt(S_hat(1-S))) * eps; never
/// exceeds eps.
pub fn bound_symmetric(s: f64, s_hat: f64, eps: RelativeError) -> f64 {
    debug_assert!((-1e-12..=1.0 + 1e-12).contains(&s));
    debug_assert!((-1e-12..=1.0 + 1e-12).contains(&s_hat));
    let s = s.clamp(0.0, 1.0);
    let s_hat = s_hat.clamp(0.0, 1.0);
    ((s * (1.0 - s_hat)).sqrt() + (s_hat * (1.0 - s)).sqrt()) * eps.value()
}

/// Bounds on the sum of absolute index errors and the sum of squared index
/// errors over all variable subsets: (2 eps, 2 eps^2).
pub fn bound_sums(eps: RelativeError) -> (f64, f64) {
    let e = eps.value();
    (2.0 * e, 2.0 * e * e)
}

/// One subset's estimates and sample-based bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct QualityRow {
    pub subset: VariableSubset,
    pub sobol_estimate: f64,
    pub sobol_bound: f64,
    pub total_estimate: f64,
    pub total_bound: f64,
}

/// Output of the sample-based quality-control method.
#[derive(Debug, Clone, PartialEq)]
pub struct QualityReport {
    pub rmse: f64,
    /// Unbiased response variance of the holdout sample.
    pub response_variance: f64,
    /// Coefficient variance of the fitted model.
    pub model_variance: f64,
    /// The symmetrized relative-error estimate; infinite when both variance
    /// estimates vanish.
    pub eps2: f64,
    /// True when both variance estimates vanished and every bound is the
    /// uninformative 1.
    pub undefined: bool,
    pub rows: Vec<QualityRow>,
}

impl QualityReport {
    pub fn max_sobol_bound(&self) -> f64 {
        self.rows.iter().map(|r| r.sobol_bound).fold(0.0, f64::max)
    }

    pub fn row(&self, u: &VariableSubset) -> Option<&QualityRow> {
        self.rows.iter().find(|r| &r.subset == u)
    }
}

/// Sample-based error bounds for every index of a fitted model, from holdout
/// control.
///
/// eps2_hat = RMSE * min(V_test[f]^-1/2, V[f_hat]^-1/2), with the unbiased
/// sample variance on the test responses and the coefficient variance on the
/// model side; the per-index bound is evaluated at the estimated index. When
/// both variance estimates vanish the bound is undefined and reported as 1.
pub fn quality_control(
    model: &Metamodel,
    test: &TrainingSample,
) -> Result<QualityReport, QualityError> {
    let rmse = rmse_holdout(model, test)?;
    let response_variance = test.response_variance();
    let model_variance = model.variance();
    let inv_f = if response_variance > 0.0 {
        response_variance.sqrt().recip()
    } else {
        f64::INFINITY
    };
    let inv_model = if model_variance > 0.0 {
        model_variance.sqrt().recip()
    } else {
        f64::INFINITY
    };
    let factor = inv_f.min(inv_model);
    let undefined = !factor.is_finite();
    let eps2_value = if undefined { f64::INFINITY } else { rmse * factor };
    let report = indices_from_coeffs(model)?;
    let eps2 = RelativeError::new(if undefined { 0.0 } else { eps2_value })?;
    let rows = report
        .iter()
        .map(|(u, s, t)| QualityRow {
            subset: *u,
            sobol_estimate: s,
            sobol_bound: if undefined { 1.0 } else { bound_per_index(eps2, s) },
            total_estimate: t,
            total_bound: if undefined { 1.0 } else { bound_per_index(eps2, t) },
        })
        .collect();
    Ok(QualityReport {
        rmse,
        response_variance,
        model_variance,
        eps2: eps2_value,
        undefined,
        rows,
    })
}

/// One subset's bootstrap error bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapRow {
    pub subset: VariableSubset,
    pub sobol_mean: f64,
    pub sobol_err: f64,
    pub total_mean: f64,
    pub total_err: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapReport {
    pub n_resamples: usize,
    pub multiplier: f64,
    /// Resamples whose refit came out degenerate; they enter the statistics
    /// through the 2^-d index convention.
    pub n_degenerate: usize,
    /// False when every resample degenerated, leaving the bound meaningless.
    pub defined: bool,
    pub rows: Vec<BootstrapRow>,
}

/// Bootstrap error bounds: refit on `n_s` resamples drawn with replacement
/// and report `multiplier` times the resample standard deviation per index.
///
/// Resample streams derive from (seed, resample index), so results are
/// independent of scheduling order.
pub fn bootstrap_bound(
    sample: &TrainingSample,
    basis: &BasisSpec,
    trunc: &TruncationSet,
    method: FitMethod,
    n_s: usize,
    seed: u64,
) -> Result<BootstrapReport, QualityError> {
    bootstrap_bound_with_multiplier(sample, basis, trunc, method, n_s, seed, BOOTSTRAP_MULTIPLIER)
}

pub fn bootstrap_bound_with_multiplier(
    sample: &TrainingSample,
    basis: &BasisSpec,
    trunc: &TruncationSet,
    method: FitMethod,
    n_s: usize,
    seed: u64,
    multiplier: f64,
) -> Result<BootstrapReport, QualityError> {
    if n_s < 2 {
        return Err(QualityError::TooFewResamples(n_s));
    }
    let reports: Vec<IndexReport> = (0..n_s)
        .into_par_iter()
        .map(|j| {
            let resample = sample.resample_with_replacement(derive_seed(seed, j as u64));
            let model = fit(method, basis, trunc, &resample);
            indices_from_coeffs(&model)
        })
        .collect::<Result<_, _>>()?;
    let n_degenerate = reports.iter().filter(|r| r.is_degenerate()).count();
    let subsets: Vec<VariableSubset> = reports[0].subsets().to_vec();
    let m = n_s as f64;
    let mut rows = Vec::with_capacity(subsets.len());
    for u in &subsets {
        let sobols: Vec<f64> = reports.iter().map(|r| r.sobol(u).unwrap()).collect();
        let totals: Vec<f64> = reports.iter().map(|r| r.total(u).unwrap()).collect();
        let stat = |vals: &[f64]| {
            let mean = vals.iter().sum::<f64>() / m;
            let sd = (vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / m).sqrt();
            (mean, multiplier * sd)
        };
        let (sobol_mean, sobol_err) = stat(&sobols);
        let (total_mean, total_err) = stat(&totals);
        rows.push(BootstrapRow {
            subset: *u,
            sobol_mean,
            sobol_err,
            total_mean,
            total_err,
        });
    }
    Ok(BootstrapReport {
        n_resamples: n_s,
        multiplier,
        n_degenerate,
        defined: n_degenerate < n_s,
        rows,
    })
}

/// Which bound-attaining coefficient pair to construct.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WitnessKind {
    /// S_1 = 1/4 versus 3/4 with eps = 1/2; attains the max, sum and
    /// sum-of-squares bounds with equality.
    EqualityPair,
    /// Index gap equal to target * eps, realized by padding the second
    /// function with a constant term.
    EpsilonScaled(f64),
}

/// A pair of two-term expansions over {Psi_(1,0,..), Psi_(0,1,..), Psi_0}.
/// Coefficients are stored in that order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TightnessWitness {
    pub truth: [f64; 3],
    pub approx: [f64; 3],
}

impl TightnessWitness {
    /// Relative error between the two members.
    pub fn epsilon(&self) -> f64 {
        let dist_sq: f64 = self
            .truth
            .iter()
            .zip(&self.approx)
            .map(|(c, h)| (c - h) * (c - h))
            .sum();
        let variance = self.truth[0] * self.truth[0] + self.truth[1] * self.truth[1];
        (dist_sq / variance).sqrt()
    }

    fn first_index(coeffs: &[f64; 3]) -> f64 {
        let v = coeffs[0] * coeffs[0] + coeffs[1] * coeffs[1];
        coeffs[0] * coeffs[0] / v
    }

    /// max_u |S_u - S_hat_u|; the two-term structure concentrates it on the
    /// first variable (the second carries the same gap, interactions none).
    pub fn max_index_gap(&self) -> f64 {
        (Self::first_index(&self.truth) - Self::first_index(&self.approx)).abs()
    }

    /// Sum of absolute index differences over all subsets.
    pub fn sum_abs_gap(&self) -> f64 {
        2.0 * self.max_index_gap()
    }

    /// Sum of squared index differences over all subsets.
    pub fn sum_sq_gap(&self) -> f64 {
        2.0 * self.max_index_gap() * self.max_index_gap()
    }
}

/// Construct coefficient pairs that attain the error bounds.
pub fn tightness_witness(kind: WitnessKind) -> Result<TightnessWitness, QualityError> {
    let s3 = 3f64.sqrt();
    let base = TightnessWitness {
        truth: [0.5, s3 / 2.0, 0.0],
        approx: [0.75, s3 / 4.0, 0.0],
    };
    match kind {
        WitnessKind::EqualityPair => Ok(base),
        WitnessKind::EpsilonScaled(target) => {
            if !(target > 0.0 && target <= 1.0) {
                return Err(QualityError::InvalidWitnessTarget(target));
            }
            // Padding the constant term inflates eps without moving any
            // index, scaling the attained fraction of the bound.
            let pad = 0.5 * (1.0 - target * target).sqrt() / target;
            Ok(TightnessWitness {
                approx: [base.approx[0], base.approx[1], pad],
                ..base
            })
        }
    }
}

/// Result of a randomized soundness sweep of the index error bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoundnessOutcome {
    pub pairs: usize,
    pub violations: usize,
    /// Largest bound slack used (max over pairs of lhs - rhs); negative
    /// when every bound held strictly.
    pub worst_margin: f64,
}

/// Draw random coefficient pairs over a shared Legendre span and verify all
/// index error bounds on each: the symmetric and resolved per-index bounds,
/// the max bound, and the two sum bounds (Sobol indices only). Tolerance
/// 1e-12 on every comparison.
pub fn bound_soundness_sweep(
    dim: usize,
    alpha_max: u32,
    n_pairs: usize,
    seed: u64,
) -> Result<SoundnessOutcome, QualityError> {
    let basis = BasisSpec::legendre(dim);
    let trunc = TruncationSet::max_degree(dim, alpha_max).map_err(IndexError::Subset)?;
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let tol = 1e-12;
    let mut violations = 0usize;
    let mut worst_margin = f64::NEG_INFINITY;
    for _ in 0..n_pairs {
        let draw = |rng: &mut ChaCha12Rng| -> Vec<f64> {
            (0..trunc.len()).map(|_| normal.sample(rng)).collect()
        };
        let truth_coeffs = draw(&mut rng);
        let approx_coeffs = draw(&mut rng);
        let truth = Metamodel::from_coefficients(
            basis.clone(),
            trunc.clone(),
            truth_coeffs,
            FitMethod::Projection,
        )?;
        let approx = Metamodel::from_coefficients(
            basis.clone(),
            trunc.clone(),
            approx_coeffs,
            FitMethod::Projection,
        )?;
        if truth.variance() == 0.0 || approx.variance() == 0.0 {
            continue;
        }
        let eps = RelativeError::from_metamodels(&truth, &approx)?;
        let truth_report = indices_from_coeffs(&truth)?;
        let approx_report = indices_from_coeffs(&approx)?;

        let mut pair_margin = f64::NEG_INFINITY;
        let mut sum_abs = 0.0;
        let mut sum_sq = 0.0;
        for ((_, s, t), (_, s_hat, t_hat)) in truth_report.iter().zip(approx_report.iter()) {
            for (true_val, est_val) in [(s, s_hat), (t, t_hat)] {
                let diff = (true_val - est_val).abs();
                pair_margin = pair_margin
                    .max(diff - bound_symmetric(true_val, est_val, eps))
                    .max(diff - bound_per_index(eps, true_val))
                    .max(diff - eps.value());
            }
            let diff_s = (s - s_hat).abs();
            sum_abs += diff_s;
            sum_sq += diff_s * diff_s;
        }
        let (sum_bound, sum_sq_bound) = bound_sums(eps);
        pair_margin = pair_margin
            .max(sum_abs - sum_bound)
            .max(sum_sq - sum_sq_bound);
        if pair_margin > tol {
            violations += 1;
        }
        worst_margin = worst_margin.max(pair_margin);
    }
    Ok(SoundnessOutcome {
        pairs: n_pairs,
        violations,
        worst_margin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::ProductMeasure;
    use crate::testfuncs::{make_training_sample, TestFunction};
    use crate::truncation::MultiIndex;

    fn eps(v: f64) -> RelativeError {
        RelativeError::new(v).unwrap()
    }

    #[test]
    fn per_index_bound_reference_values() {
        // S = 0: the bound collapses to eps^2 for eps <= 1.
        assert!((bound_per_index(eps(0.3), 0.0) - 0.09).abs() < 1e-15);
        // eps = 0.1 never exceeds 0.1, and attains it at S = 1/4.
        for s in [0.0, 0.1, 0.25, 0.5, 0.9, 1.0] {
            assert!(bound_per_index(eps(0.1), s) <= 0.1 + 1e-15);
        }
        assert!((bound_per_index(eps(0.1), 0.25) - 0.1).abs() < 1e-15);
        assert_eq!(bound_per_index(eps(0.0), 0.7), 0.0);
        // Capped at one for huge errors.
        assert_eq!(bound_per_index(eps(5.0), 0.5), 1.0);
    }

    #[test]
    fn symmetric_bound_reference_values() {
        let b = bound_symmetric(0.25, 0.75, eps(0.5));
        assert!((b - 0.5).abs() < 1e-15);
        assert_eq!(bound_symmetric(0.0, 0.0, eps(0.3)), 0.0);
        assert!((bound_symmetric(0.5, 0.5, eps(0.3)) - 0.3).abs() < 1e-15);
        // Never exceeds eps.
        for s in [0.0, 0.3, 0.6, 1.0] {
            for s_hat in [0.0, 0.2, 0.8, 1.0] {
                assert!(bound_symmetric(s, s_hat, eps(0.4)) <= 0.4 + 1e-15);
            }
        }
    }

    #[test]
    fn sum_bounds_reference_values() {
        let (a, b) = bound_sums(eps(0.1));
        assert!((a - 0.2).abs() < 1e-15 && (b - 0.02).abs() < 1e-15);
        assert_eq!(bound_sums(eps(0.0)), (0.0, 0.0));
    }

    #[test]
    fn equality_witness_attains_all_bounds() {
        let w = tightness_witness(WitnessKind::EqualityPair).unwrap();
        assert!((w.epsilon() - 0.5).abs() < 1e-15);
        assert!((w.max_index_gap() - 0.5).abs() < 1e-15);
        // Sum bounds attained with equality at eps = 1/2.
        assert!((w.sum_abs_gap() - 1.0).abs() < 1e-15);
        assert!((w.sum_sq_gap() - 0.5).abs() < 1e-15);
        // And the indices are the advertised quarters.
        assert!((TightnessWitness::first_index(&w.truth) - 0.25).abs() < 1e-15);
        assert!((TightnessWitness::first_index(&w.approx) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn scaled_witness_hits_target_fraction() {
        let w = tightness_witness(WitnessKind::EpsilonScaled(1.0)).unwrap();
        assert_eq!(w, tightness_witness(WitnessKind::EqualityPair).unwrap());

        let w = tightness_witness(WitnessKind::EpsilonScaled(0.5)).unwrap();
        assert!((w.approx[2] - 0.8660254037844386).abs() < 1e-12);
        let gap = w.max_index_gap();
        assert!((gap - 0.5 * w.epsilon()).abs() < 1e-10, "gap {gap}");

        assert!(tightness_witness(WitnessKind::EpsilonScaled(0.0)).is_err());
        assert!(tightness_witness(WitnessKind::EpsilonScaled(1.5)).is_err());
    }

    #[test]
    fn epsilon_from_coefficients_matches_witness() {
        let w = tightness_witness(WitnessKind::EqualityPair).unwrap();
        // Reorder into canonical coefficient layout: mean first.
        let truth = [0.0, w.truth[0], w.truth[1]];
        let approx = [0.0, w.approx[0], w.approx[1]];
        let e = RelativeError::from_coefficients(&truth, &approx).unwrap();
        assert!((e.value() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn quality_control_perfect_model() {
        let basis = BasisSpec::legendre(2);
        let trunc = TruncationSet::max_degree(2, 1).unwrap();
        let mut coeffs = vec![0.0; trunc.len()];
        coeffs[0] = 1.0;
        coeffs[1] = 2.0;
        let model =
            Metamodel::from_coefficients(basis.clone(), trunc, coeffs, FitMethod::Ols).unwrap();
        let design = basis.measure().sample(200, 3).unwrap();
        let responses = model.predict_design(&design).unwrap();
        let test = TrainingSample::new(design, responses).unwrap();
        let report = quality_control(&model, &test).unwrap();
        assert!(report.rmse < 1e-12);
        assert!(!report.undefined);
        for row in &report.rows {
            assert!(row.sobol_bound < 1e-12, "{row:?}");
            assert!(row.total_bound < 1e-12);
        }
    }

    #[test]
    fn quality_control_zero_index_threshold() {
        // A subset estimated at zero with eps2 = 0.1 gets bound 0.01.
        let basis = BasisSpec::legendre(2);
        let trunc = TruncationSet::max_degree(2, 1).unwrap();
        // Model: variance 1 concentrated on x1.
        let mut coeffs = vec![0.0; trunc.len()];
        coeffs[1] = 1.0;
        let model =
            Metamodel::from_coefficients(basis.clone(), trunc.clone(), coeffs, FitMethod::Ols)
                .unwrap();
        // Test responses: the model plus a perturbation of norm 0.1.
        let design = basis.measure().sample(40_000, 8).unwrap();
        let alpha = MultiIndex::new(vec![0, 2]);
        let responses: Vec<f64> = design
            .rows()
            .map(|p| {
                model.predict(p).unwrap() + 0.1 * basis.eval_multivariate(&alpha, p).unwrap()
            })
            .collect();
        let test = TrainingSample::new(design, responses).unwrap();
        let report = quality_control(&model, &test).unwrap();
        assert!((report.eps2 - 0.1).abs() < 0.01, "eps2 {}", report.eps2);
        let u12 = VariableSubset::new(2, &[1, 2]).unwrap();
        let row = report.row(&u12).unwrap();
        assert_eq!(row.sobol_estimate, 0.0);
        let expect = report.eps2 * report.eps2;
        assert!(
            (row.sobol_bound - expect).abs() < 0.2 * expect,
            "bound {} vs eps2^2 {expect}",
            row.sobol_bound
        );
    }

    #[test]
    fn quality_control_undefined_when_everything_is_flat() {
        let basis = BasisSpec::legendre(1);
        let trunc = TruncationSet::max_degree(1, 1).unwrap();
        let model = Metamodel::from_coefficients(
            basis.clone(),
            trunc,
            vec![0.0, 0.0],
            FitMethod::Projection,
        )
        .unwrap();
        let design = basis.measure().sample(10, 2).unwrap();
        let test = TrainingSample::new(design, vec![0.0; 10]).unwrap();
        let report = quality_control(&model, &test).unwrap();
        assert!(report.undefined);
        assert!(report.rows.iter().all(|r| r.sobol_bound == 1.0));
    }

    #[test]
    fn bootstrap_zero_spread_for_deterministic_span_function() {
        let basis = BasisSpec::legendre(2);
        let trunc = TruncationSet::max_degree(2, 1).unwrap();
        let mut coeffs = vec![0.0; trunc.len()];
        coeffs[1] = 1.0;
        coeffs[2] = 0.5;
        let truth =
            Metamodel::from_coefficients(basis.clone(), trunc.clone(), coeffs, FitMethod::Ols)
                .unwrap();
        let design = basis.measure().sample(400, 5).unwrap();
        let responses = truth.predict_design(&design).unwrap();
        let sample = TrainingSample::new(design, responses).unwrap();
        let report =
            bootstrap_bound(&sample, &basis, &trunc, FitMethod::Ols, 30, 11).unwrap();
        assert!(report.defined);
        assert_eq!(report.n_degenerate, 0);
        for row in &report.rows {
            assert!(row.sobol_err < 1e-8, "{row:?}");
            assert!(row.total_err < 1e-8);
        }
    }

    #[test]
    fn bootstrap_rejects_single_resample() {
        let basis = BasisSpec::legendre(1);
        let trunc = TruncationSet::max_degree(1, 1).unwrap();
        let design = basis.measure().sample(10, 1).unwrap();
        let sample = TrainingSample::new(design, vec![1.0; 10]).unwrap();
        assert!(matches!(
            bootstrap_bound(&sample, &basis, &trunc, FitMethod::Ols, 1, 0),
            Err(QualityError::TooFewResamples(1))
        ));
    }

    #[test]
    fn bootstrap_is_deterministic_and_finite_on_gfunction() {
        let f = TestFunction::gfunction(vec![0.0, 4.0]).unwrap();
        let basis = BasisSpec::legendre(2);
        let trunc = TruncationSet::hyperbolic(2, 0.5, 20).unwrap();
        let sample = make_training_sample(&f, basis.measure(), 200, 0.0, 21).unwrap();
        let a = bootstrap_bound(&sample, &basis, &trunc, FitMethod::Ols, 100, 7).unwrap();
        let b = bootstrap_bound(&sample, &basis, &trunc, FitMethod::Ols, 100, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.rows.iter().all(|r| r.sobol_err.is_finite() && r.total_err.is_finite()));
    }

    #[test]
    fn bootstrap_reports_all_degenerate_as_undefined() {
        // Fewer points than regressors: every OLS refit is rank-deficient.
        let basis = BasisSpec::legendre(1);
        let trunc = TruncationSet::max_degree(1, 3).unwrap();
        let design = basis.measure().sample(3, 3).unwrap();
        let sample = TrainingSample::new(design, vec![4.0, 1.0, 2.0]).unwrap();
        let report = bootstrap_bound(&sample, &basis, &trunc, FitMethod::Ols, 10, 2).unwrap();
        assert!(!report.defined);
        assert_eq!(report.n_degenerate, 10);
    }

    #[test]
    fn soundness_sweep_small() {
        let out = bound_soundness_sweep(2, 2, 500, 99).unwrap();
        assert_eq!(out.violations, 0, "worst margin {}", out.worst_margin);
    }

    #[test]
    fn eps2_is_symmetric_between_model_pairs() {
        // Swapping which metamodel is "the model" leaves eps2 unchanged when
        // the holdout responses come from the other one.
        let basis = BasisSpec::legendre(2);
        let trunc = TruncationSet::max_degree(2, 2).unwrap();
        let mk = |seed: u64| {
            let normal = Normal::new(0.0, 1.0).unwrap();
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let coeffs: Vec<f64> = (0..trunc.len()).map(|_| normal.sample(&mut rng)).collect();
            Metamodel::from_coefficients(basis.clone(), trunc.clone(), coeffs, FitMethod::Ols)
                .unwrap()
        };
        let (m1, m2) = (mk(1), mk(2));
        let design = ProductMeasure::uniform_sym(2).sample(50_000, 17).unwrap();
        let eval = |m: &Metamodel| m.predict_design(&design).unwrap();
        let t1 = TrainingSample::new(design.clone(), eval(&m1)).unwrap();
        let t2 = TrainingSample::new(design.clone(), eval(&m2)).unwrap();
        let a = quality_control(&m1, &t2).unwrap();
        let b = quality_control(&m2, &t1).unwrap();
        // Same distance; the min of the two variance estimates differs only
        // through sampling error of the response variance.
        assert!((a.eps2 - b.eps2).abs() / a.eps2 < 0.05, "{} vs {}", a.eps2, b.eps2);
    }
}
