//! Benchmark black-box functions with analytic ground truth: the Sobol
//! g-function, the Ishigami function and arbitrary span elements of a fitted
//! basis, plus affine domain adapters and seeded Gaussian noise wrappers.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::fitting::{FitError, Metamodel, TrainingSample};
use crate::indices::{analytic_gfunction_indices, analytic_ishigami_indices, IndexReport};
use crate::measure::ProductMeasure;
use crate::seed::derive_seed;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum TestFnError {
    #[error("g-function coefficients must be nonnegative, got {0}")]
    NegativeCoefficient(f64),
    #[error("g-function needs at least one coefficient")]
    EmptyCoefficients,
    #[error("point has dimension {got}, function has dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("coordinate {value} of dimension {dim} is outside the function domain")]
    OutOfDomain { dim: usize, value: f64 },
    #[error("noise standard deviation must be nonnegative, got {0}")]
    NegativeNoise(f64),
    #[error(transparent)]
    Fit(#[from] FitError),
}

/// A benchmark function together with its canonical box domain.
#[derive(Debug, Clone)]
pub enum TestFunction {
    /// prod_i (|4 x_i - 2| + c_i) / (1 + c_i) on [0, 1]^d.
    GFunction { c: Vec<f64> },
    /// sin x1 + a sin^2 x2 + b x3^4 sin x1 on [-pi, pi]^3.
    Ishigami { a: f64, b: f64 },
    /// A fixed element of a metamodel span, on its basis box.
    SpanElement(Box<Metamodel>),
}

impl TestFunction {
    pub fn gfunction(c: Vec<f64>) -> Result<Self, TestFnError> {
        if c.is_empty() {
            return Err(TestFnError::EmptyCoefficients);
        }
        if let Some(&bad) = c.iter().find(|&&ci| ci < 0.0) {
            return Err(TestFnError::NegativeCoefficient(bad));
        }
        Ok(TestFunction::GFunction { c })
    }

    pub fn ishigami(a: f64, b: f64) -> Self {
        TestFunction::Ishigami { a, b }
    }

    pub fn span_element(model: Metamodel) -> Self {
        TestFunction::SpanElement(Box::new(model))
    }

    pub fn dim(&self) -> usize {
        match self {
            TestFunction::GFunction { c } => c.len(),
            TestFunction::Ishigami { .. } => 3,
            TestFunction::SpanElement(m) => m.basis().dim(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            TestFunction::GFunction { .. } => "gfunction",
            TestFunction::Ishigami { .. } => "ishigami",
            TestFunction::SpanElement(_) => "span_element",
        }
    }

    /// The canonical per-dimension domain the formula is written on.
    pub fn canonical_domain(&self) -> Vec<(f64, f64)> {
        match self {
            TestFunction::GFunction { c } => vec![(0.0, 1.0); c.len()],
            TestFunction::Ishigami { .. } => {
                vec![(-std::f64::consts::PI, std::f64::consts::PI); 3]
            }
            TestFunction::SpanElement(m) => m.basis().measure().support(),
        }
    }

    /// Evaluate at a point of the canonical domain.
    pub fn eval(&self, x: &[f64]) -> Result<f64, TestFnError> {
        if x.len() != self.dim() {
            return Err(TestFnError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        for (i, (&xi, (lo, hi))) in x.iter().zip(self.canonical_domain()).enumerate() {
            if !(xi >= lo && xi <= hi) {
                return Err(TestFnError::OutOfDomain { dim: i, value: xi });
            }
        }
        Ok(self.eval_unchecked(x))
    }

    fn eval_unchecked(&self, x: &[f64]) -> f64 {
        match self {
            TestFunction::GFunction { c } => x
                .iter()
                .zip(c)
                .map(|(&xi, &ci)| ((4.0 * xi - 2.0).abs() + ci) / (1.0 + ci))
                .product(),
            TestFunction::Ishigami { a, b } => {
                x[0].sin() + a * x[1].sin().powi(2) + b * x[2].powi(4) * x[0].sin()
            }
            TestFunction::SpanElement(m) => m.predict(x).expect("point inside the basis box"),
        }
    }

    /// sup over the domain of |f|, used for noise scaling.
    pub fn sup_abs(&self) -> f64 {
        match self {
            // Each factor peaks at x_i in {0, 1}: (2 + c_i) / (1 + c_i).
            TestFunction::GFunction { c } => {
                c.iter().map(|ci| (2.0 + ci) / (1.0 + ci)).product()
            }
            // Terms maximized at x1 = pi/2, x2 = pi/2, x3 = +-pi for a, b >= 0;
            // nonpositive coefficients flip signs without growing the sup.
            TestFunction::Ishigami { a, b } => {
                1.0 + a.abs() + b.abs() * std::f64::consts::PI.powi(4)
            }
            TestFunction::SpanElement(m) => {
                let d = m.basis().dim();
                let per_axis = match d {
                    1 | 2 => 2001usize,
                    3 => 201,
                    _ => 51,
                };
                let support = m.basis().measure().support();
                let mut grid = vec![0usize; d];
                let mut point = vec![0.0; d];
                let mut sup: f64 = 0.0;
                loop {
                    for i in 0..d {
                        let (lo, hi) = support[i];
                        point[i] = lo + (hi - lo) * grid[i] as f64 / (per_axis - 1) as f64;
                    }
                    sup = sup.max(m.predict(&point).expect("grid point in support").abs());
                    let mut i = d;
                    loop {
                        if i == 0 {
                            return sup;
                        }
                        i -= 1;
                        if grid[i] + 1 < per_axis {
                            grid[i] += 1;
                            grid[i + 1..].iter_mut().for_each(|g| *g = 0);
                            break;
                        }
                    }
                }
            }
        }
    }

    /// Analytic index report, when one exists for this function kind.
    pub fn analytic_indices(&self) -> Option<IndexReport> {
        match self {
            TestFunction::GFunction { c } => analytic_gfunction_indices(c).ok(),
            TestFunction::Ishigami { a, b } => analytic_ishigami_indices(*a, *b).ok(),
            TestFunction::SpanElement(_) => None,
        }
    }

    /// View this function through an affine map from the measure's box onto
    /// the canonical domain, so designs drawn from the measure can be fed in
    /// directly. Uniform measures stay uniform under the map, so indices are
    /// unchanged.
    pub fn on_measure(&self, measure: &ProductMeasure) -> Result<MappedFunction<'_>, TestFnError> {
        if measure.dim() != self.dim() {
            return Err(TestFnError::DimensionMismatch {
                expected: self.dim(),
                got: measure.dim(),
            });
        }
        let domain = self.canonical_domain();
        let mut scale = Vec::with_capacity(domain.len());
        let mut offset = Vec::with_capacity(domain.len());
        for ((lo_from, hi_from), (lo_to, hi_to)) in
            measure.support().into_iter().zip(domain.iter().copied())
        {
            let s = (hi_to - lo_to) / (hi_from - lo_from);
            scale.push(s);
            offset.push(lo_to - s * lo_from);
        }
        Ok(MappedFunction {
            f: self,
            scale,
            offset,
            domain,
        })
    }
}

/// A test function precomposed with an affine change of box.
#[derive(Debug, Clone)]
pub struct MappedFunction<'a> {
    f: &'a TestFunction,
    scale: Vec<f64>,
    offset: Vec<f64>,
    domain: Vec<(f64, f64)>,
}

impl MappedFunction<'_> {
    pub fn dim(&self) -> usize {
        self.scale.len()
    }

    /// Evaluate at a point of the measure box. The mapped coordinate is
    /// clamped to the canonical domain to absorb end-point rounding.
    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim());
        let mut mapped = vec![0.0; x.len()];
        for (i, &xi) in x.iter().enumerate() {
            let (lo, hi) = self.domain[i];
            mapped[i] = (self.offset[i] + self.scale[i] * xi).clamp(lo, hi);
        }
        self.f.eval_unchecked(&mapped)
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }
}

impl<'a> MappedFunction<'a> {
    pub fn with_noise(self, sigma: f64, seed: u64) -> Result<NoisyFunction<'a>, TestFnError> {
        NoisyFunction::new(self, sigma, seed)
    }
}

/// An observable wrapping a mapped function with additive Gaussian noise.
/// Owns its RNG stream: deterministic given the seed and the call order, and
/// deliberately not shareable across threads.
pub struct NoisyFunction<'a> {
    inner: MappedFunction<'a>,
    sigma: f64,
    rng: ChaCha12Rng,
    normal: Normal<f64>,
}

impl<'a> NoisyFunction<'a> {
    pub fn new(inner: MappedFunction<'a>, sigma: f64, seed: u64) -> Result<Self, TestFnError> {
        if sigma < 0.0 {
            return Err(TestFnError::NegativeNoise(sigma));
        }
        Ok(Self {
            inner,
            sigma,
            rng: ChaCha12Rng::seed_from_u64(seed),
            normal: Normal::new(0.0, 1.0).expect("unit normal"),
        })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn observe(&mut self, x: &[f64]) -> f64 {
        let y = self.inner.eval(x);
        if self.sigma == 0.0 {
            y
        } else {
            y + self.sigma * self.normal.sample(&mut self.rng)
        }
    }
}

/// Draw a design from the measure and observe the function on it, with
/// independent derived streams for the design and the noise.
pub fn make_training_sample(
    f: &TestFunction,
    measure: &ProductMeasure,
    n: usize,
    sigma: f64,
    seed: u64,
) -> Result<TrainingSample, TestFnError> {
    let design = measure
        .sample(n, derive_seed(seed, 0))
        .map_err(|_| TestFnError::DimensionMismatch {
            expected: f.dim(),
            got: 0,
        })?;
    let mapped = f.on_measure(measure)?;
    let mut noisy = NoisyFunction::new(mapped, sigma, derive_seed(seed, 1))?;
    let responses: Vec<f64> = design.rows().map(|p| noisy.observe(p)).collect();
    Ok(TrainingSample::new(design, responses)?.with_noise_sd(sigma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::BasisSpec;
    use crate::fitting::FitMethod;
    use crate::truncation::{MultiIndex, TruncationSet};

    #[test]
    fn gfunction_reference_points() {
        let f = TestFunction::gfunction(vec![0.0, 4.0]).unwrap();
        // |4 * 0.5 - 2| = 0 kills the first factor.
        assert_eq!(f.eval(&[0.5, 0.5]).unwrap(), 0.0);
        // |4 * 0.25 - 2| = 1 makes any factor equal one.
        let g = TestFunction::gfunction(vec![2.7, 0.3]).unwrap();
        let v = g.eval(&[0.25, 0.25]).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ishigami_reference_point() {
        let f = TestFunction::ishigami(7.0, 0.1);
        let v = f.eval(&[std::f64::consts::FRAC_PI_2, 0.0, 0.0]).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ishigami_extends_to_a_periodic_function() {
        // The formula is 2 pi periodic in x1 and x2 outright, and its values
        // agree on the two x3 faces, so the periodic extension from the box
        // is well defined (and continuous) in every argument.
        let f = TestFunction::ishigami(7.0, 0.1);
        let formula = |x: [f64; 3]| {
            x[0].sin() + 7.0 * x[1].sin().powi(2) + 0.1 * x[2].powi(4) * x[0].sin()
        };
        let x = [0.37, -1.2, 2.0];
        let base = f.eval(&x).unwrap();
        for i in 0..2 {
            let mut shifted = x;
            shifted[i] += 2.0 * std::f64::consts::PI;
            assert!((formula(shifted) - base).abs() < 1e-12, "dimension {i}");
        }
        let pi = std::f64::consts::PI;
        for (x1, x2) in [(0.4, -0.9), (-2.0, 3.0), (1.3, 0.0)] {
            let lo = f.eval(&[x1, x2, -pi]).unwrap();
            let hi = f.eval(&[x1, x2, pi]).unwrap();
            assert!((lo - hi).abs() < 1e-12);
        }
    }

    #[test]
    fn sup_abs_values() {
        let f = TestFunction::gfunction(vec![0.0, 4.0]).unwrap();
        assert!((f.sup_abs() - 2.4).abs() < 1e-12);

        let ishigami = TestFunction::ishigami(7.0, 0.1);
        let sup = ishigami.sup_abs();
        assert!((sup - (8.0 + 0.1 * std::f64::consts::PI.powi(4))).abs() < 1e-12);
        assert!((sup - 17.741).abs() < 1e-3);

        let basis = BasisSpec::legendre(2);
        let trunc = TruncationSet::max_degree(2, 1).unwrap();
        let alpha = MultiIndex::new(vec![1, 0]);
        let pos = trunc.indices().iter().position(|i| *i == alpha).unwrap();
        let mut coeffs = vec![0.0; trunc.len()];
        coeffs[pos] = 1.0;
        let span = TestFunction::span_element(
            Metamodel::from_coefficients(basis, trunc, coeffs, FitMethod::Ols).unwrap(),
        );
        assert!((span.sup_abs() - 3f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn ishigami_sup_cross_checked_by_grid() {
        let f = TestFunction::ishigami(7.0, 0.1);
        let closed = f.sup_abs();
        let mut grid_sup: f64 = 0.0;
        let n = 101;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let map = |g: usize| -std::f64::consts::PI
                        + 2.0 * std::f64::consts::PI * g as f64 / (n - 1) as f64;
                    let v = f.eval(&[map(i), map(j), map(k)]).unwrap().abs();
                    grid_sup = grid_sup.max(v);
                }
            }
        }
        assert!(grid_sup <= closed + 1e-9);
        assert!((closed - grid_sup) / closed < 0.005, "{closed} vs {grid_sup}");
    }

    #[test]
    fn domain_checks() {
        let f = TestFunction::gfunction(vec![0.0]).unwrap();
        assert!(matches!(
            f.eval(&[1.5]),
            Err(TestFnError::OutOfDomain { .. })
        ));
        assert!(matches!(
            f.eval(&[0.5, 0.5]),
            Err(TestFnError::DimensionMismatch { .. })
        ));
        assert!(TestFunction::gfunction(vec![-0.1]).is_err());
    }

    #[test]
    fn mapping_onto_symmetric_box() {
        // Legendre box [-1,1] mapped onto the g-function's [0,1].
        let f = TestFunction::gfunction(vec![0.0, 4.0]).unwrap();
        let measure = ProductMeasure::uniform_sym(2);
        let mapped = f.on_measure(&measure).unwrap();
        let direct = f.eval(&[0.5, 0.75]).unwrap();
        let via_map = mapped.eval(&[0.0, 0.5]);
        assert!((direct - via_map).abs() < 1e-12);
        // End points map exactly.
        assert!((mapped.eval(&[1.0, 1.0]) - f.eval(&[1.0, 1.0]).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn ishigami_mapped_reference_point() {
        // x = (pi/2, 0, 0) in canonical coordinates is (0.75, 0.5, 0.5) on
        // the trigonometric box.
        let f = TestFunction::ishigami(7.0, 0.1);
        let mapped = f.on_measure(&ProductMeasure::uniform_unit(3)).unwrap();
        assert!((mapped.eval(&[0.75, 0.5, 0.5]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn noise_is_deterministic_and_scaled() {
        let f = TestFunction::gfunction(vec![0.0, 4.0]).unwrap();
        let measure = ProductMeasure::uniform_unit(2);
        let sigma = f.sup_abs() / 10.0;
        assert!((sigma - 0.24).abs() < 1e-12);

        let a = make_training_sample(&f, &measure, 50, sigma, 9).unwrap();
        let b = make_training_sample(&f, &measure, 50, sigma, 9).unwrap();
        assert_eq!(a, b);

        // sigma = 0 reproduces the exact evaluations.
        let clean = make_training_sample(&f, &measure, 50, 0.0, 9).unwrap();
        let mapped = f.on_measure(&measure).unwrap();
        for (point, &y) in clean.design().rows().zip(clean.responses()) {
            assert_eq!(y, mapped.eval(point));
        }
    }

    #[test]
    fn noise_empirical_sd() {
        let f = TestFunction::gfunction(vec![0.0]).unwrap();
        let mapped = f.on_measure(&ProductMeasure::uniform_unit(1)).unwrap();
        let mut noisy = NoisyFunction::new(mapped, 2.0, 4).unwrap();
        let x = [0.3];
        let n = 100_000;
        let draws: Vec<f64> = (0..n).map(|_| noisy.observe(&x)).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let sd = (draws.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (n - 1) as f64)
            .sqrt();
        assert!((sd - 2.0).abs() / 2.0 < 0.01, "sd = {sd}");
    }
}
