//! Non-asymptotic risk bounds for index estimates under random designs: the
//! general, projection and least-squares bounds, the stability condition
//! machinery (kappa_r, K_N, r), the best-approximation-error estimator, and
//! empirical risk over replicated designs.

use rayon::prelude::*;
use thiserror::Error;

use crate::basis::{BasisError, BasisSpec};
use crate::fitting::{fit, fit_ols, rmse_holdout, FitError, FitMethod};
use crate::indices::{indices_from_coeffs, IndexError, IndexReport};
use crate::seed::derive_seed;
use crate::testfuncs::{make_training_sample, TestFnError, TestFunction};
use crate::truncation::{TruncationError, TruncationSet, VariableSubset};

#[derive(Error, Debug, Clone, PartialEq)]
pub enum RiskError {
    #[error("the stability exponent r must be positive, got {0}")]
    NonPositiveR(f64),
    #[error("sample size must be at least 2 for the stability condition, got {0}")]
    SampleTooSmall(usize),
    #[error("function variance must be positive")]
    NonPositiveVariance,
    #[error("the reference fit for the best-approximation error came out degenerate")]
    DegenerateReference,
    #[error("empirical risk needs at least 2 replicates, got {0}")]
    TooFewReplicates(usize),
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error(transparent)]
    TestFn(#[from] TestFnError),
    #[error(transparent)]
    Truncation(#[from] TruncationError),
}

/// 3 ln(3/2) - 1, the numerator of the stability constant.
fn stability_numerator() -> f64 {
    3.0 * 1.5f64.ln() - 1.0
}

/// kappa_r = (3 ln(3/2) - 1) / (2 + 2r), the constant of the stability
/// condition K_N <= kappa_r n / ln n.
pub fn kappa_r(r: f64) -> Result<f64, RiskError> {
    if r.is_nan() || r <= 0.0 {
        return Err(RiskError::NonPositiveR(r));
    }
    Ok(stability_numerator() / (2.0 + 2.0 * r))
}

/// Largest r for which the stability condition holds at the given K_N and n:
/// max(0, (3 ln(3/2) - 1)/2 * n / (K_N ln n) - 1).
pub fn r_from_sample(k_n: f64, n: usize) -> Result<f64, RiskError> {
    if n < 2 {
        return Err(RiskError::SampleTooSmall(n));
    }
    let nf = n as f64;
    Ok((stability_numerator() / 2.0 * nf / (k_n * nf.ln()) - 1.0).max(0.0))
}

/// Whether K_N <= kappa_r n / ln n. Equality counts as satisfied; a 1e-12
/// relative slack keeps the algebraic inverse of [`r_from_sample`] exact in
/// floating point.
pub fn stability_satisfied(k_n: f64, n: usize, r: f64) -> Result<bool, RiskError> {
    if n < 2 {
        return Err(RiskError::SampleTooSmall(n));
    }
    let kappa = kappa_r(r)?;
    let rhs = kappa * n as f64 / (n as f64).ln();
    Ok(k_n <= rhs * (1.0 + 1e-12))
}

/// Smallest sample size with r_from_sample(k_n, n) > 0, by bisection on the
/// monotone map n -> n / ln n.
pub fn min_sample_for_positive_r(k_n: f64) -> Result<usize, RiskError> {
    let positive = |n: usize| -> Result<bool, RiskError> { Ok(r_from_sample(k_n, n)? > 0.0) };
    let mut lo = 3usize; // n / ln n increases from here on
    let mut hi = 8usize;
    while !positive(hi)? {
        hi = hi.saturating_mul(2);
        if hi > 1 << 60 {
            return Err(RiskError::SampleTooSmall(hi));
        }
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if positive(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Inputs to the risk-bound formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskBoundInputs {
    /// Best-approximation error ||e_N||^2 of the target in the span.
    pub best_error_sq: f64,
    /// Variance of the target function.
    pub variance: f64,
    /// Sup-norm bound L = sup |f|.
    pub sup_bound: f64,
    /// Observation noise variance sigma^2.
    pub noise_var: f64,
    /// Number of regressors N.
    pub n_regressors: usize,
    /// Sample size n.
    pub n_sample: usize,
    /// Stability exponent r (0 when the condition cannot hold).
    pub r: f64,
    /// K_N of the basis/truncation pair, for the stability check.
    pub k_n: f64,
}

/// A quadratic/absolute risk bound in the shared shape
/// quad + lin * sqrt(S) + extra, reported with a cap at one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskBound {
    quad: f64,
    lin: f64,
    extra: f64,
    applicable: bool,
}

impl RiskBound {
    /// Bound on max_u E (S_u - S_hat_u)^2.
    pub fn mse_bound(&self) -> f64 {
        (self.quad + self.extra).min(1.0)
    }

    /// Bound on E |S_u - S_hat_u| at a given true index value.
    pub fn mae_bound(&self, s: f64) -> f64 {
        (self.quad + self.lin * s.sqrt() + self.extra).min(1.0)
    }

    /// False when the stability condition required by the bound fails; the
    /// numbers are still computed but carry no guarantee.
    pub fn is_applicable(&self) -> bool {
        self.applicable
    }

    /// The n^-r remainder term (zero for bounds that have none).
    pub fn remainder(&self) -> f64 {
        self.extra
    }
}

/// Risk bound for an arbitrary approximation: ris^2 = E||f - f_hat||^2 / V,
/// quadratic risk <= 2 ris^2, absolute risk <= 2 ris (ris + sqrt(S)).
pub fn risk_bound_general(err_sq: f64, variance: f64) -> Result<RiskBound, RiskError> {
    if variance.is_nan() || variance <= 0.0 {
        return Err(RiskError::NonPositiveVariance);
    }
    let ris_sq = err_sq / variance;
    let ris = ris_sq.sqrt();
    Ok(RiskBound {
        quad: 2.0 * ris_sq,
        lin: 2.0 * ris,
        extra: 0.0,
        applicable: true,
    })
}

/// Projection-method risk bound:
/// ris_p^2 = ||e_N||^2 / V + (L^2 + sigma^2) / V * N / n.
pub fn risk_bound_projection(inputs: &RiskBoundInputs) -> Result<RiskBound, RiskError> {
    if inputs.variance.is_nan() || inputs.variance <= 0.0 {
        return Err(RiskError::NonPositiveVariance);
    }
    let sampling = (inputs.sup_bound * inputs.sup_bound + inputs.noise_var) / inputs.variance
        * inputs.n_regressors as f64
        / inputs.n_sample as f64;
    let ris_sq = inputs.best_error_sq / inputs.variance + sampling;
    let ris = ris_sq.sqrt();
    Ok(RiskBound {
        quad: 2.0 * ris_sq,
        lin: 2.0 * ris,
        extra: 0.0,
        applicable: true,
    })
}

/// Least-squares risk bound under the stability condition.
///
/// Noisy path: ris_LS^2 = 1.2 ||e_N||^2 / V + 4 sigma^2 / V * N / n with
/// bounds 2 ris_LS^2 + 2 n^-r. The noiseless path uses the sharper printed
/// constant: 3 ||e_N||^2 / V + 2 n^-r for the quadratic risk and
/// 3 eps_N^2 + 3 eps_N sqrt(S) + 2 n^-r for the absolute one.
///
/// When the stability condition fails for the supplied r, the bound is
/// computed anyway and flagged inapplicable.
pub fn risk_bound_ols(inputs: &RiskBoundInputs) -> Result<RiskBound, RiskError> {
    if inputs.variance.is_nan() || inputs.variance <= 0.0 {
        return Err(RiskError::NonPositiveVariance);
    }
    let applicable = inputs.r > 0.0
        && stability_satisfied(inputs.k_n, inputs.n_sample, inputs.r)?;
    let remainder = if inputs.r > 0.0 {
        2.0 * (inputs.n_sample as f64).powf(-inputs.r)
    } else {
        2.0
    };
    if inputs.noise_var == 0.0 {
        let eps_n_sq = inputs.best_error_sq / inputs.variance;
        Ok(RiskBound {
            quad: 3.0 * eps_n_sq,
            lin: 3.0 * eps_n_sq.sqrt(),
            extra: remainder,
            applicable,
        })
    } else {
        let ris_sq = 1.2 * inputs.best_error_sq / inputs.variance
            + 4.0 * inputs.noise_var / inputs.variance * inputs.n_regressors as f64
                / inputs.n_sample as f64;
        let ris = ris_sq.sqrt();
        Ok(RiskBound {
            quad: 2.0 * ris_sq,
            lin: 2.0 * ris,
            extra: remainder,
            applicable,
        })
    }
}

/// Estimate the best-approximation error ||e_N||^2 by a noiseless OLS fit on
/// one large sample, scored on an independent one of the same size.
pub fn estimate_best_error(
    f: &TestFunction,
    basis: &BasisSpec,
    trunc: &TruncationSet,
    n_big: usize,
    seed: u64,
) -> Result<f64, RiskError> {
    let train = make_training_sample(f, basis.measure(), n_big, 0.0, derive_seed(seed, 0))?;
    let model = fit_ols(basis, trunc, &train);
    if model.is_degenerate() {
        return Err(RiskError::DegenerateReference);
    }
    let test = make_training_sample(f, basis.measure(), n_big, 0.0, derive_seed(seed, 1))?;
    let rmse = rmse_holdout(&model, &test)?;
    Ok(rmse * rmse)
}

/// Reference indices for risk estimation: the analytic formulas for the
/// benchmark functions, the exact coefficient indices for span elements.
pub fn reference_indices(f: &TestFunction) -> Result<IndexReport, RiskError> {
    match f {
        TestFunction::GFunction { .. } | TestFunction::Ishigami { .. } => {
            Ok(f.analytic_indices().expect("analytic formulas exist"))
        }
        TestFunction::SpanElement(model) => Ok(indices_from_coeffs(model)?),
    }
}

/// Empirical risk of index estimation over replicated random designs.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalRisk {
    pub subsets: Vec<VariableSubset>,
    pub sobol_mse: Vec<f64>,
    pub sobol_mae: Vec<f64>,
    pub total_mse: Vec<f64>,
    pub total_mae: Vec<f64>,
    /// max over subsets and both index kinds of the mean squared error.
    pub max_mse: f64,
    /// Bootstrap standard error of `max_mse` over replicates.
    pub max_mse_se: f64,
    /// max over subsets and both index kinds of the mean absolute error.
    pub max_mae: f64,
    pub n_runs: usize,
    pub n_degenerate: usize,
}

/// Estimate per-subset quadratic and absolute index risks by refitting on
/// `n_runs` fresh designs (and noise draws). Degenerate fits contribute
/// through the 2^-d convention. Replicates run in parallel with seeds
/// derived from (seed, replicate), so results are scheduling-independent.
#[allow(clippy::too_many_arguments)]
pub fn empirical_risk(
    f: &TestFunction,
    basis: &BasisSpec,
    trunc: &TruncationSet,
    method: FitMethod,
    n: usize,
    sigma: f64,
    n_runs: usize,
    seed: u64,
    reference: &IndexReport,
) -> Result<EmpiricalRisk, RiskError> {
    if n_runs < 2 {
        return Err(RiskError::TooFewReplicates(n_runs));
    }
    let per_replicate: Vec<(Vec<f64>, Vec<f64>, bool)> = (0..n_runs)
        .into_par_iter()
        .map(|k| -> Result<_, RiskError> {
            let sample =
                make_training_sample(f, basis.measure(), n, sigma, derive_seed(seed, k as u64))?;
            let model = fit(method, basis, trunc, &sample);
            let report = indices_from_coeffs(&model)?;
            let mut sobol_err = Vec::with_capacity(reference.subsets().len());
            let mut total_err = Vec::with_capacity(reference.subsets().len());
            for (u, s_ref, t_ref) in reference.iter() {
                sobol_err.push(report.sobol(u).expect("same subset enumeration") - s_ref);
                total_err.push(report.total(u).expect("same subset enumeration") - t_ref);
            }
            Ok((sobol_err, total_err, report.is_degenerate()))
        })
        .collect::<Result<_, _>>()?;

    let subsets = reference.subsets().to_vec();
    let n_sub = subsets.len();
    let m = n_runs as f64;
    let mut sobol_mse = vec![0.0; n_sub];
    let mut sobol_mae = vec![0.0; n_sub];
    let mut total_mse = vec![0.0; n_sub];
    let mut total_mae = vec![0.0; n_sub];
    for (sobol_err, total_err, _) in &per_replicate {
        for i in 0..n_sub {
            sobol_mse[i] += sobol_err[i] * sobol_err[i];
            sobol_mae[i] += sobol_err[i].abs();
            total_mse[i] += total_err[i] * total_err[i];
            total_mae[i] += total_err[i].abs();
        }
    }
    for v in [&mut sobol_mse, &mut sobol_mae, &mut total_mse, &mut total_mae] {
        v.iter_mut().for_each(|x| *x /= m);
    }
    let max_mse = sobol_mse
        .iter()
        .chain(&total_mse)
        .fold(0.0f64, |a, &b| a.max(b));
    let max_mae = sobol_mae
        .iter()
        .chain(&total_mae)
        .fold(0.0f64, |a, &b| a.max(b));
    let n_degenerate = per_replicate.iter().filter(|r| r.2).count();

    // Replicate-level bootstrap of the max-over-subsets statistic.
    let max_mse_se = {
        let resamples = 200;
        let mut rng = <rand_chacha::ChaCha12Rng as rand::SeedableRng>::seed_from_u64(
            derive_seed(seed, (1 << 32) + 1),
        );
        let mut stats = Vec::with_capacity(resamples);
        for _ in 0..resamples {
            let mut acc_s = vec![0.0; n_sub];
            let mut acc_t = vec![0.0; n_sub];
            for _ in 0..n_runs {
                let k: usize = rand::Rng::random_range(&mut rng, 0..n_runs);
                let (sobol_err, total_err, _) = &per_replicate[k];
                for i in 0..n_sub {
                    acc_s[i] += sobol_err[i] * sobol_err[i];
                    acc_t[i] += total_err[i] * total_err[i];
                }
            }
            let stat = acc_s
                .iter()
                .chain(&acc_t)
                .fold(0.0f64, |a, &b| a.max(b / m));
            stats.push(stat);
        }
        let mean = stats.iter().sum::<f64>() / resamples as f64;
        (stats.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (resamples - 1) as f64)
            .sqrt()
    };

    Ok(EmpiricalRisk {
        subsets,
        sobol_mse,
        sobol_mae,
        total_mse,
        total_mae,
        max_mse,
        max_mse_se,
        max_mae,
        n_runs,
        n_degenerate,
    })
}
