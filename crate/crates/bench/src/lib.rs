//! Benchmark-only crate; see `benches/pipeline.rs`.

use gsa_core::{make_training_sample, BasisSpec, TestFunction, TrainingSample, TruncationSet};

/// Shared fixture: the g-function quality-control setup (hyperbolic set over
/// a 2-d Legendre basis) at a given sample size.
pub fn gfunction_fixture(n: usize) -> (BasisSpec, TruncationSet, TrainingSample) {
    let f = TestFunction::gfunction(vec![0.0, 4.0]).expect("valid coefficients");
    let basis = BasisSpec::legendre(2);
    let trunc = TruncationSet::hyperbolic(2, 0.5, 20).expect("small set");
    let sample = make_training_sample(&f, basis.measure(), n, 0.0, 7).expect("sampling");
    (basis, trunc, sample)
}
