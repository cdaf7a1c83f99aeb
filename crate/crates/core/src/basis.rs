//! Univariate orthonormal families, tensor-product regressors and the design
//! quantity K_N = sup_x sum_alpha Psi_alpha^2(x).
//!
//! Each family is orthonormal for exactly one component measure:
//! Legendre for uniform[-1,1], Chebyshev for arcsine[-1,1], trigonometric for
//! uniform[0,1]. Any other pairing is rejected at construction.

use thiserror::Error;

use crate::measure::{ComponentMeasure, ProductMeasure};
use crate::quadrature;
use crate::truncation::{MultiIndex, TruncationScheme, TruncationSet, MAX_COMPONENT_DEGREE};

#[derive(Error, Debug, Clone, PartialEq)]
pub enum BasisError {
    #[error("{family:?} is orthonormal for {expected}, not {got} (dimension {dim})")]
    MeasureMismatch {
        family: BasisFamily,
        expected: &'static str,
        got: &'static str,
        dim: usize,
    },
    #[error("basis has {families} families but the measure has {dims} dimensions")]
    FamilyCountMismatch { families: usize, dims: usize },
    #[error("point has dimension {got}, basis has dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("x = {x} is outside the support of {family:?}")]
    OutOfSupport { family: BasisFamily, x: f64 },
    #[error("degree {0} exceeds the cap {MAX_COMPONENT_DEGREE}")]
    DegreeTooLarge(u32),
    #[error("truncation set has dimension {got}, basis has dimension {expected}")]
    TruncationMismatch { expected: usize, got: usize },
    #[error("K_N grid search supports at most 3 dimensions, got {0}; use a max-degree scheme")]
    GridSearchUnsupported(usize),
}

/// The univariate orthonormal family used along one input dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisFamily {
    Legendre,
    Chebyshev,
    Trigonometric,
}

impl BasisFamily {
    /// The component measure this family is orthonormal against.
    pub fn matching_measure(&self) -> ComponentMeasure {
        match self {
            BasisFamily::Legendre => ComponentMeasure::UniformSym,
            BasisFamily::Chebyshev => ComponentMeasure::Arcsine,
            BasisFamily::Trigonometric => ComponentMeasure::UniformUnit,
        }
    }

    pub fn support(&self) -> (f64, f64) {
        self.matching_measure().support()
    }

    pub fn name(&self) -> &'static str {
        match self {
            BasisFamily::Legendre => "legendre",
            BasisFamily::Chebyshev => "chebyshev",
            BasisFamily::Trigonometric => "trigonometric",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "legendre" => Some(BasisFamily::Legendre),
            "chebyshev" => Some(BasisFamily::Chebyshev),
            "trigonometric" => Some(BasisFamily::Trigonometric),
            _ => None,
        }
    }
}

/// Evaluate the unit-norm univariate basis function of the given degree.
pub fn eval_univariate(family: BasisFamily, degree: u32, x: f64) -> Result<f64, BasisError> {
    if degree > MAX_COMPONENT_DEGREE {
        return Err(BasisError::DegreeTooLarge(degree));
    }
    let (lo, hi) = family.support();
    if !(lo..=hi).contains(&x) {
        return Err(BasisError::OutOfSupport { family, x });
    }
    Ok(eval_univariate_unchecked(family, degree, x))
}

fn eval_univariate_unchecked(family: BasisFamily, degree: u32, x: f64) -> f64 {
    match family {
        BasisFamily::Legendre => legendre_normalized(degree, x),
        BasisFamily::Chebyshev => {
            if degree == 0 {
                1.0
            } else {
                std::f64::consts::SQRT_2 * (degree as f64 * x.acos()).cos()
            }
        }
        BasisFamily::Trigonometric => trigonometric(degree, x),
    }
}

/// Three-term recurrence for the Legendre polynomial, scaled to unit norm
/// under the uniform probability measure on [-1,1]: psi_a = P_a * sqrt(2a+1).
fn legendre_normalized(degree: u32, x: f64) -> f64 {
    let p = legendre_raw(degree, x);
    p * ((2 * degree + 1) as f64).sqrt()
}

fn legendre_raw(degree: u32, x: f64) -> f64 {
    match degree {
        0 => 1.0,
        1 => x,
        _ => {
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 1..degree {
                let kf = k as f64;
                let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
                p0 = p1;
                p1 = p2;
            }
            p1
        }
    }
}

/// psi_0 = 1, psi_{2k-1} = sqrt(2) sin(2 pi k x), psi_{2k} = sqrt(2) cos(2 pi k x).
fn trigonometric(degree: u32, x: f64) -> f64 {
    if degree == 0 {
        return 1.0;
    }
    let k = degree.div_ceil(2) as f64;
    let arg = 2.0 * std::f64::consts::PI * k * x;
    let v = if degree.is_multiple_of(2) { arg.cos() } else { arg.sin() };
    std::f64::consts::SQRT_2 * v
}

/// Fill `out[a] = psi_a(x)` for a = 0..out.len(). Used on hot paths so the
/// recurrence runs once per (point, dimension).
fn univariate_table(family: BasisFamily, x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    match family {
        BasisFamily::Legendre => {
            if out.len() > 1 {
                out[1] = x * 3f64.sqrt();
            }
            let mut p0 = 1.0;
            let mut p1 = x;
            for (a, slot) in out.iter_mut().enumerate().skip(2) {
                let kf = (a - 1) as f64;
                let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
                p0 = p1;
                p1 = p2;
                *slot = p2 * ((2 * a + 1) as f64).sqrt();
            }
        }
        BasisFamily::Chebyshev => {
            // Chebyshev recurrence T_{k+1} = 2x T_k - T_{k-1} on the raw
            // polynomials, then the sqrt(2) normalization.
            let mut t0 = 1.0;
            let mut t1 = x;
            for slot in out.iter_mut().skip(1) {
                *slot = std::f64::consts::SQRT_2 * t1;
                let t2 = 2.0 * x * t1 - t0;
                t0 = t1;
                t1 = t2;
            }
        }
        BasisFamily::Trigonometric => {
            for (a, slot) in out.iter_mut().enumerate().skip(1) {
                *slot = trigonometric(a as u32, x);
            }
        }
    }
}

/// A product measure paired with its orthonormal family per dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisSpec {
    families: Vec<BasisFamily>,
    measure: ProductMeasure,
}

impl BasisSpec {
    pub fn new(families: Vec<BasisFamily>, measure: ProductMeasure) -> Result<Self, BasisError> {
        if families.len() != measure.dim() {
            return Err(BasisError::FamilyCountMismatch {
                families: families.len(),
                dims: measure.dim(),
            });
        }
        for (dim, (&family, &component)) in
            families.iter().zip(measure.components()).enumerate()
        {
            if family.matching_measure() != component {
                return Err(BasisError::MeasureMismatch {
                    family,
                    expected: family.matching_measure().name(),
                    got: component.name(),
                    dim,
                });
            }
        }
        Ok(Self { families, measure })
    }

    /// Same family on every dimension, with the matching product measure.
    pub fn homogeneous(family: BasisFamily, dim: usize) -> Self {
        let measure = ProductMeasure::new(vec![family.matching_measure(); dim])
            .expect("dim must be positive");
        Self {
            families: vec![family; dim],
            measure,
        }
    }

    pub fn legendre(dim: usize) -> Self {
        Self::homogeneous(BasisFamily::Legendre, dim)
    }

    pub fn chebyshev(dim: usize) -> Self {
        Self::homogeneous(BasisFamily::Chebyshev, dim)
    }

    pub fn trigonometric(dim: usize) -> Self {
        Self::homogeneous(BasisFamily::Trigonometric, dim)
    }

    pub fn dim(&self) -> usize {
        self.families.len()
    }

    pub fn families(&self) -> &[BasisFamily] {
        &self.families
    }

    pub fn family(&self, i: usize) -> BasisFamily {
        self.families[i]
    }

    pub fn measure(&self) -> &ProductMeasure {
        &self.measure
    }

    fn check_truncation(&self, trunc: &TruncationSet) -> Result<(), BasisError> {
        if trunc.dim() != self.dim() {
            return Err(BasisError::TruncationMismatch {
                expected: self.dim(),
                got: trunc.dim(),
            });
        }
        Ok(())
    }

    /// Psi_alpha(x) = prod_i psi_{alpha_i}(x_i); Psi_0 = 1.
    pub fn eval_multivariate(&self, alpha: &MultiIndex, x: &[f64]) -> Result<f64, BasisError> {
        if alpha.dim() != self.dim() {
            return Err(BasisError::DimensionMismatch {
                expected: self.dim(),
                got: alpha.dim(),
            });
        }
        if x.len() != self.dim() {
            return Err(BasisError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        let mut prod = 1.0;
        for ((&family, &degree), &xi) in self
            .families
            .iter()
            .zip(alpha.components())
            .zip(x.iter())
        {
            prod *= eval_univariate(family, degree, xi)?;
        }
        Ok(prod)
    }

    /// Per-dimension tables of psi_0..psi_max at one point; reused across all
    /// regressors of a truncation set.
    pub(crate) fn tables_for(&self, max_degree: u32) -> BasisTables {
        BasisTables::new(self, max_degree)
    }

    /// sup over the design space of sum_{alpha in trunc} Psi_alpha^2(x).
    ///
    /// Max-degree schemes use the exact closed form (a product of per-family
    /// factors); other schemes fall back to a dense grid search, available
    /// for dimension <= 3.
    pub fn k_n(&self, trunc: &TruncationSet) -> Result<f64, BasisError> {
        self.check_truncation(trunc)?;
        match trunc.scheme() {
            TruncationScheme::MaxDegree { alpha_max } => Ok(self.k_n_max_degree(*alpha_max)),
            _ => self.k_n_grid(trunc),
        }
    }

    fn k_n_max_degree(&self, alpha_max: u32) -> f64 {
        let mut prod = 1.0;
        for &family in &self.families {
            let a = alpha_max as f64;
            let factor = match family {
                // sum_{a<=amax} (2a+1), attained at x = 1.
                BasisFamily::Legendre => (a + 1.0) * (a + 1.0),
                // 1 + 2*amax, attained at x = 1.
                BasisFamily::Chebyshev => 2.0 * a + 1.0,
                // Full sin/cos pairs sum to a constant; an unpaired sine
                // contributes its peak of 2.
                BasisFamily::Trigonometric => {
                    if alpha_max.is_multiple_of(2) {
                        a + 1.0
                    } else {
                        a + 2.0
                    }
                }
            };
            prod *= factor;
        }
        prod
    }

    /// Grid-search value of K_N: 2001 points per axis for d <= 2, 201 for
    /// d = 3, refused above that.
    pub fn k_n_grid(&self, trunc: &TruncationSet) -> Result<f64, BasisError> {
        self.check_truncation(trunc)?;
        let d = self.dim();
        let per_axis = match d {
            1 | 2 => 2001usize,
            3 => 201,
            _ => return Err(BasisError::GridSearchUnsupported(d)),
        };
        let max_degree = trunc.max_component();
        // Per-axis value tables: axis_tables[i][g][a] = psi_a(grid_g on axis i).
        let mut axis_tables: Vec<Vec<Vec<f64>>> = Vec::with_capacity(d);
        for i in 0..d {
            let (lo, hi) = self.families[i].support();
            let mut per_point = Vec::with_capacity(per_axis);
            for g in 0..per_axis {
                let x = lo + (hi - lo) * g as f64 / (per_axis - 1) as f64;
                let mut table = vec![0.0; max_degree as usize + 1];
                univariate_table(self.families[i], x, &mut table);
                per_point.push(table);
            }
            axis_tables.push(per_point);
        }
        let mut sup = f64::NEG_INFINITY;
        let mut grid = vec![0usize; d];
        loop {
            let mut total = 0.0;
            for alpha in trunc.indices() {
                let mut prod = 1.0;
                for i in 0..d {
                    prod *= axis_tables[i][grid[i]][alpha.component(i) as usize];
                }
                total += prod * prod;
            }
            if total > sup {
                sup = total;
            }
            let mut i = d;
            loop {
                if i == 0 {
                    return Ok(sup);
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

    /// Largest deviation of the quadrature inner products <psi_a, psi_b> from
    /// the Kronecker delta, over all degrees up to `max_degree`, across the
    /// families present in this basis.
    pub fn orthonormality_defect(&self, max_degree: u32) -> f64 {
        let mut families = self.families.clone();
        families.dedup();
        families
            .into_iter()
            .map(|f| family_orthonormality_defect(f, max_degree))
            .fold(0.0, f64::max)
    }
}

/// Quadrature check of <psi_a, psi_b> = delta_ab for a single family.
pub fn family_orthonormality_defect(family: BasisFamily, max_degree: u32) -> f64 {
    let order = 2 * max_degree as usize + 4;
    let (nodes, weights) = match family {
        BasisFamily::Legendre => quadrature::gauss_legendre(order),
        BasisFamily::Chebyshev => quadrature::gauss_chebyshev(order),
        BasisFamily::Trigonometric => quadrature::periodic_midpoint(order),
    };
    let m = max_degree as usize + 1;
    let mut tables = vec![vec![0.0; m]; nodes.len()];
    for (table, &x) in tables.iter_mut().zip(&nodes) {
        univariate_table(family, x, table);
    }
    let mut worst: f64 = 0.0;
    for a in 0..m {
        for b in a..m {
            let inner: f64 = tables
                .iter()
                .zip(&weights)
                .map(|(t, &w)| w * t[a] * t[b])
                .sum();
            let target = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((inner - target).abs());
        }
    }
    worst
}

/// Tabulated per-dimension univariate values, and the regressor row they
/// induce for a truncation set.
pub(crate) struct BasisTables {
    families: Vec<BasisFamily>,
    max_degree: u32,
    // tables[i * (max_degree+1) + a] = psi_a at the current x_i
    values: Vec<f64>,
}

impl BasisTables {
    fn new(basis: &BasisSpec, max_degree: u32) -> Self {
        let d = basis.dim();
        Self {
            families: basis.families.clone(),
            max_degree,
            values: vec![0.0; d * (max_degree as usize + 1)],
        }
    }

    /// Retabulate for a new point.
    pub fn load_point(&mut self, x: &[f64]) {
        let stride = self.max_degree as usize + 1;
        for (i, &family) in self.families.iter().enumerate() {
            univariate_table(family, x[i], &mut self.values[i * stride..(i + 1) * stride]);
        }
    }

    /// Psi_alpha at the loaded point.
    pub fn regressor(&self, alpha: &MultiIndex) -> f64 {
        let stride = self.max_degree as usize + 1;
        let mut prod = 1.0;
        for (i, &a) in alpha.components().iter().enumerate() {
            prod *= self.values[i * stride + a as usize];
        }
        prod
    }

    /// Fill a full regressor row for the truncation set at the loaded point.
    pub fn regressor_row(&self, trunc: &TruncationSet, out: &mut [f64]) {
        debug_assert_eq!(out.len(), trunc.len());
        for (slot, alpha) in out.iter_mut().zip(trunc.indices()) {
            *slot = self.regressor(alpha);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn univariate_reference_values() {
        // psi_0 is identically one.
        assert_eq!(
            eval_univariate(BasisFamily::Legendre, 0, 0.37).unwrap(),
            1.0
        );
        // psi_a(1) = sqrt(2a+1) for Legendre.
        let v = eval_univariate(BasisFamily::Legendre, 1, 1.0).unwrap();
        assert!((v - 3f64.sqrt()).abs() < 1e-12);
        // sqrt(2) cos(3 arccos 1/2) = sqrt(2) cos(pi) = -sqrt(2).
        let v = eval_univariate(BasisFamily::Chebyshev, 3, 0.5).unwrap();
        assert!((v + std::f64::consts::SQRT_2).abs() < 1e-12);
        // sqrt(2) cos(pi/2) = 0.
        let v = eval_univariate(BasisFamily::Trigonometric, 2, 0.25).unwrap();
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn univariate_rejects_bad_input() {
        assert!(matches!(
            eval_univariate(BasisFamily::Legendre, 1, 1.5),
            Err(BasisError::OutOfSupport { .. })
        ));
        assert!(matches!(
            eval_univariate(BasisFamily::Trigonometric, 1, -0.1),
            Err(BasisError::OutOfSupport { .. })
        ));
        assert!(matches!(
            eval_univariate(BasisFamily::Legendre, 61, 0.0),
            Err(BasisError::DegreeTooLarge(61))
        ));
    }

    #[test]
    fn pairing_is_enforced() {
        let err = BasisSpec::new(
            vec![BasisFamily::Legendre],
            ProductMeasure::uniform_unit(1),
        );
        assert!(matches!(err, Err(BasisError::MeasureMismatch { .. })));
        assert!(BasisSpec::new(
            vec![BasisFamily::Trigonometric, BasisFamily::Legendre],
            ProductMeasure::new(vec![
                ComponentMeasure::UniformUnit,
                ComponentMeasure::UniformSym,
            ])
            .unwrap(),
        )
        .is_ok());
    }

    #[test]
    fn multivariate_reference_values() {
        let leg = BasisSpec::legendre(2);
        let one = leg
            .eval_multivariate(&MultiIndex::zero(2), &[0.3, -0.8])
            .unwrap();
        assert_eq!(one, 1.0);
        let v = leg
            .eval_multivariate(&MultiIndex::new(vec![1, 1]), &[1.0, 1.0])
            .unwrap();
        assert!((v - 3.0).abs() < 1e-12);

        let trig = BasisSpec::trigonometric(2);
        let v = trig
            .eval_multivariate(&MultiIndex::new(vec![1, 0]), &[0.25, 0.9])
            .unwrap();
        assert!((v - std::f64::consts::SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn multivariate_dimension_mismatch() {
        let leg = BasisSpec::legendre(2);
        assert!(leg
            .eval_multivariate(&MultiIndex::zero(3), &[0.0, 0.0])
            .is_err());
        assert!(leg.eval_multivariate(&MultiIndex::zero(2), &[0.0]).is_err());
    }

    #[test]
    fn tables_agree_with_direct_evaluation() {
        for family in [
            BasisFamily::Legendre,
            BasisFamily::Chebyshev,
            BasisFamily::Trigonometric,
        ] {
            let (lo, hi) = family.support();
            for g in 0..17 {
                let x = lo + (hi - lo) * g as f64 / 16.0;
                let mut table = vec![0.0; 9];
                univariate_table(family, x, &mut table);
                for (a, &got) in table.iter().enumerate() {
                    let want = eval_univariate(family, a as u32, x).unwrap();
                    assert!(
                        (got - want).abs() < 1e-12,
                        "{family:?} degree {a} at {x}: {got} vs {want}"
                    );
                }
            }
        }
    }

    #[test]
    fn orthonormality_to_degree_six() {
        for family in [
            BasisFamily::Legendre,
            BasisFamily::Chebyshev,
            BasisFamily::Trigonometric,
        ] {
            let defect = family_orthonormality_defect(family, 6);
            assert!(defect < 1e-8, "{family:?} defect {defect}");
        }
    }

    #[test]
    fn k_n_closed_forms() {
        // Legendre: (alpha_max + 1)^(2d) = N^2.
        let leg = BasisSpec::legendre(2);
        let t = TruncationSet::max_degree(2, 2).unwrap();
        assert_eq!(leg.k_n(&t).unwrap(), 81.0);
        // Trigonometric with even degree: K_N = N.
        let trig = BasisSpec::trigonometric(3);
        let t = TruncationSet::max_degree(3, 2).unwrap();
        assert_eq!(trig.k_n(&t).unwrap(), 27.0);
        // Chebyshev: (2 alpha_max + 1)^d, within the 2^d N bound.
        let cheb = BasisSpec::chebyshev(2);
        let t = TruncationSet::max_degree(2, 1).unwrap();
        let k = cheb.k_n(&t).unwrap();
        assert_eq!(k, 9.0);
        assert!(k <= 4.0 * t.len() as f64);
    }

    #[test]
    fn k_n_closed_form_matches_grid() {
        for (basis, family) in [
            (BasisSpec::legendre(2), "legendre"),
            (BasisSpec::chebyshev(2), "chebyshev"),
            (BasisSpec::trigonometric(2), "trigonometric"),
        ] {
            for alpha_max in [1, 2, 3] {
                let t = TruncationSet::max_degree(2, alpha_max).unwrap();
                let closed = basis.k_n(&t).unwrap();
                let grid = basis.k_n_grid(&t).unwrap();
                let rel = (closed - grid).abs() / closed;
                assert!(
                    rel < 1e-6,
                    "{family} alpha_max={alpha_max}: closed {closed} grid {grid}"
                );
            }
        }
    }

    #[test]
    fn k_n_is_at_least_n() {
        for basis in [
            BasisSpec::legendre(2),
            BasisSpec::chebyshev(2),
            BasisSpec::trigonometric(2),
        ] {
            let t = TruncationSet::hyperbolic(2, 0.5, 5).unwrap();
            let k = basis.k_n(&t).unwrap();
            assert!(k >= t.len() as f64 - 1e-9, "K_N = {k}, N = {}", t.len());
        }
    }

    #[test]
    fn k_n_grid_refuses_high_dimension() {
        let basis = BasisSpec::legendre(4);
        let t = TruncationSet::hyperbolic(4, 0.5, 3).unwrap();
        assert!(matches!(
            basis.k_n(&t),
            Err(BasisError::GridSearchUnsupported(4))
        ));
    }
}
