//! Metamodel-based global sensitivity analysis.
//!
//! Fits tensor-product orthonormal expansions (Legendre, Chebyshev,
//! trigonometric) to black-box functions under random designs, extracts Sobol
//! and total-effect indices in closed form from the coefficients, and
//! evaluates sample-based quality-control bounds and non-asymptotic risk
//! bounds for the index estimates.

pub mod basis;
pub mod fitting;
pub mod indices;
pub mod linalg;
pub mod measure;
pub mod quadrature;
pub mod quality;
pub mod risk;
pub mod seed;
pub mod testfuncs;
pub mod truncation;

pub use basis::{BasisError, BasisFamily, BasisSpec};
pub use fitting::{
    design_matrix, fit, fit_ols, fit_projection, rmse_holdout, stability_gap, FitError, FitMethod,
    Metamodel, TrainingSample,
};
pub use indices::{
    analytic_gfunction_indices, analytic_ishigami_indices, general_index, indices_for_subsets,
    indices_from_coeffs, mc_oracle_indices, IndexError, IndexReport, OracleEstimate,
};
pub use measure::{ComponentMeasure, Design, MeasureError, ProductMeasure};
pub use quality::{
    bootstrap_bound, bound_per_index, bound_sums, bound_symmetric, quality_control,
    tightness_witness, BootstrapReport, QualityError, QualityReport, RelativeError,
    TightnessWitness, WitnessKind,
};
pub use risk::{
    empirical_risk, estimate_best_error, kappa_r, min_sample_for_positive_r, r_from_sample,
    reference_indices, risk_bound_general, risk_bound_ols, risk_bound_projection,
    stability_satisfied, EmpiricalRisk, RiskBound, RiskBoundInputs, RiskError,
};
pub use seed::derive_seed;
pub use testfuncs::{make_training_sample, MappedFunction, NoisyFunction, TestFnError, TestFunction};
pub use truncation::{
    MultiIndex, TruncationError, TruncationScheme, TruncationSet, VariableSubset,
};
