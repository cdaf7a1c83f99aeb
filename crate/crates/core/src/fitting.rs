//! Coefficient estimation for tensor-product metamodels: the projection
//! method (empirical inner products) and ordinary least squares, plus the
//! spectral-norm stability diagnostic and holdout RMSE.

use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::basis::{BasisError, BasisSpec};
use crate::linalg::{spectral_norm_symmetric, LeastSquaresBuilder, Matrix};
use crate::measure::Design;
use crate::truncation::{MultiIndex, TruncationScheme, TruncationSet};

/// Condition-number threshold (for Phi^T Phi / n) beyond which an OLS fit is
/// declared singular. The estimate comes from the R-factor diagonal.
pub const OLS_CONDITION_LIMIT: f64 = 1e12;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum FitError {
    #[error("design has {design} points but {responses} responses")]
    LengthMismatch { design: usize, responses: usize },
    #[error("training sample must contain at least one point")]
    EmptySample,
    #[error("test sample must be nonempty")]
    EmptyTestSample,
    #[error("holdout split would leave an empty part (n = {n}, holdout = {holdout})")]
    DegenerateSplit { n: usize, holdout: usize },
    #[error("coefficient vector has length {got}, truncation set has {expected}")]
    CoefficientMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error("cannot parse metamodel record at line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

/// Which estimator produced a metamodel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitMethod {
    /// c_alpha = (1/n) sum_i y_i Psi_alpha(x_i).
    Projection,
    /// c = argmin ||y - Phi c||, solved through QR.
    Ols,
}

impl FitMethod {
    pub fn name(&self) -> &'static str {
        match self {
            FitMethod::Projection => "projection",
            FitMethod::Ols => "ols",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "projection" => Some(FitMethod::Projection),
            "ols" => Some(FitMethod::Ols),
            _ => None,
        }
    }
}

impl fmt::Display for FitMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Design points with observed responses y_i = f(x_i) + eta_i.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSample {
    design: Design,
    responses: Vec<f64>,
    noise_sd: Option<f64>,
}

impl TrainingSample {
    pub fn new(design: Design, responses: Vec<f64>) -> Result<Self, FitError> {
        if design.n_points() != responses.len() {
            return Err(FitError::LengthMismatch {
                design: design.n_points(),
                responses: responses.len(),
            });
        }
        if responses.is_empty() {
            return Err(FitError::EmptySample);
        }
        Ok(Self {
            design,
            responses,
            noise_sd: None,
        })
    }

    pub fn with_noise_sd(mut self, sd: f64) -> Self {
        self.noise_sd = Some(sd);
        self
    }

    pub fn n(&self) -> usize {
        self.responses.len()
    }

    pub fn design(&self) -> &Design {
        &self.design
    }

    pub fn responses(&self) -> &[f64] {
        &self.responses
    }

    pub fn noise_sd(&self) -> Option<f64> {
        self.noise_sd
    }

    /// Unbiased sample variance of the responses.
    pub fn response_variance(&self) -> f64 {
        let n = self.n();
        if n < 2 {
            return 0.0;
        }
        let mean = self.responses.iter().sum::<f64>() / n as f64;
        self.responses
            .iter()
            .map(|y| (y - mean) * (y - mean))
            .sum::<f64>()
            / (n - 1) as f64
    }

    /// Split into (training, holdout) parts with a seeded shuffle. The
    /// holdout gets round(n * fraction) points, at least one on each side.
    pub fn split_holdout(&self, fraction: f64, seed: u64) -> Result<(Self, Self), FitError> {
        let n = self.n();
        let holdout = ((n as f64 * fraction).round() as usize).max(1);
        if holdout >= n {
            return Err(FitError::DegenerateSplit { n, holdout });
        }
        let mut order: Vec<usize> = (0..n).collect();
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        order.shuffle(&mut rng);
        let (hold_idx, train_idx) = order.split_at(holdout);
        let take = |idx: &[usize]| {
            let design = self.design.take_rows(idx);
            let responses = idx.iter().map(|&i| self.responses[i]).collect();
            let mut s = TrainingSample::new(design, responses).expect("nonempty by construction");
            s.noise_sd = self.noise_sd;
            s
        };
        Ok((take(train_idx), take(hold_idx)))
    }

    /// Resample n rows with replacement (bootstrap draw).
    pub fn resample_with_replacement(&self, seed: u64) -> Self {
        let n = self.n();
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let idx: Vec<usize> = (0..n)
            .map(|_| rand::Rng::random_range(&mut rng, 0..n))
            .collect();
        let design = self.design.take_rows(&idx);
        let responses = idx.iter().map(|&i| self.responses[i]).collect();
        let mut s = TrainingSample::new(design, responses).expect("nonempty by construction");
        s.noise_sd = self.noise_sd;
        s
    }
}

/// A fitted expansion over a truncation set: coefficients aligned to the
/// canonical multi-index ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct Metamodel {
    basis: BasisSpec,
    trunc: TruncationSet,
    coeffs: Vec<f64>,
    method: FitMethod,
    degenerate: bool,
}

impl Metamodel {
    pub fn from_coefficients(
        basis: BasisSpec,
        trunc: TruncationSet,
        coeffs: Vec<f64>,
        method: FitMethod,
    ) -> Result<Self, FitError> {
        if trunc.dim() != basis.dim() {
            return Err(FitError::Basis(BasisError::TruncationMismatch {
                expected: basis.dim(),
                got: trunc.dim(),
            }));
        }
        if coeffs.len() != trunc.len() {
            return Err(FitError::CoefficientMismatch {
                expected: trunc.len(),
                got: coeffs.len(),
            });
        }
        let mut model = Self {
            basis,
            trunc,
            coeffs,
            method,
            degenerate: false,
        };
        model.degenerate = model.variance() == 0.0;
        Ok(model)
    }

    fn degenerate_fit(basis: BasisSpec, trunc: TruncationSet, method: FitMethod) -> Self {
        let n = trunc.len();
        Self {
            basis,
            trunc,
            coeffs: vec![0.0; n],
            method,
            degenerate: true,
        }
    }

    pub fn basis(&self) -> &BasisSpec {
        &self.basis
    }

    pub fn truncation(&self) -> &TruncationSet {
        &self.trunc
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn method(&self) -> FitMethod {
        self.method
    }

    /// True when the fit has zero variance or the OLS normal matrix was
    /// deemed singular; index extraction then applies the 2^-d convention.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// The estimated mean, c_0.
    pub fn mean(&self) -> f64 {
        self.coeffs[0]
    }

    /// V[f_hat] = sum_{alpha != 0} c_alpha^2.
    pub fn variance(&self) -> f64 {
        debug_assert!(self.trunc.multi_index(0).is_zero());
        self.coeffs[1..].iter().map(|c| c * c).sum()
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64, BasisError> {
        if x.len() != self.basis.dim() {
            return Err(BasisError::DimensionMismatch {
                expected: self.basis.dim(),
                got: x.len(),
            });
        }
        for (i, &xi) in x.iter().enumerate() {
            let family = self.basis.family(i);
            let (lo, hi) = family.support();
            if !(lo..=hi).contains(&xi) {
                return Err(BasisError::OutOfSupport { family, x: xi });
            }
        }
        let mut tables = self.basis.tables_for(self.trunc.max_component());
        tables.load_point(x);
        let mut row = vec![0.0; self.trunc.len()];
        tables.regressor_row(&self.trunc, &mut row);
        Ok(row.iter().zip(&self.coeffs).map(|(r, c)| r * c).sum())
    }

    /// Predictions over a whole design, tabulating once per point.
    pub fn predict_design(&self, design: &Design) -> Result<Vec<f64>, BasisError> {
        if design.dim() != self.basis.dim() {
            return Err(BasisError::DimensionMismatch {
                expected: self.basis.dim(),
                got: design.dim(),
            });
        }
        let mut tables = self.basis.tables_for(self.trunc.max_component());
        let mut row = vec![0.0; self.trunc.len()];
        let mut out = Vec::with_capacity(design.n_points());
        for point in design.rows() {
            tables.load_point(point);
            tables.regressor_row(&self.trunc, &mut row);
            out.push(row.iter().zip(&self.coeffs).map(|(r, c)| r * c).sum());
        }
        Ok(out)
    }

    /// Structured text record, round-trippable bit-exactly via
    /// [`Metamodel::parse`]. Floats use the shortest representation that
    /// parses back to the identical value.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        out.push_str("gsa-metamodel v1\n");
        out.push_str(&format!("dim {}\n", self.basis.dim()));
        out.push_str("families");
        for f in self.basis.families() {
            out.push(' ');
            out.push_str(f.name());
        }
        out.push('\n');
        match self.trunc.scheme() {
            TruncationScheme::MaxDegree { alpha_max } => {
                out.push_str(&format!("scheme max_degree {alpha_max}\n"));
            }
            TruncationScheme::Hyperbolic { q, t } => {
                out.push_str(&format!("scheme hyperbolic {q} {t}\n"));
            }
            TruncationScheme::Explicit => out.push_str("scheme explicit\n"),
        }
        out.push_str(&format!("method {}\n", self.method.name()));
        out.push_str(&format!("degenerate {}\n", self.degenerate));
        out.push_str(&format!("n {}\n", self.trunc.len()));
        out.push_str("indices\n");
        out.push_str(&self.trunc.to_text());
        out.push_str("coefficients\n");
        for c in &self.coeffs {
            out.push_str(&format!("{c}\n"));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, FitError> {
        let err = |line: usize, reason: &str| FitError::Parse {
            line,
            reason: reason.to_string(),
        };
        let mut reader = RecordReader {
            lines: text.lines().collect(),
            pos: 0,
        };
        reader.expect_prefixed("gsa-metamodel v1")?;
        let dim: usize = reader
            .expect_prefixed("dim ")?
            .parse()
            .map_err(|_| err(reader.pos, "bad dimension"))?;
        let families: Vec<_> = reader
            .expect_prefixed("families")?
            .split_whitespace()
            .map(crate::basis::BasisFamily::parse)
            .collect::<Option<_>>()
            .ok_or_else(|| err(reader.pos, "unknown family"))?;
        if families.len() != dim {
            return Err(err(reader.pos, "family count does not match dimension"));
        }
        let scheme_line = reader.expect_prefixed("scheme ")?.to_string();
        let method = FitMethod::parse(reader.expect_prefixed("method ")?)
            .ok_or_else(|| err(reader.pos, "bad method"))?;
        let degenerate: bool = reader
            .expect_prefixed("degenerate ")?
            .parse()
            .map_err(|_| err(reader.pos, "bad degenerate flag"))?;
        let n: usize = reader
            .expect_prefixed("n ")?
            .parse()
            .map_err(|_| err(reader.pos, "bad size"))?;
        reader.expect_prefixed("indices")?;
        let mut indices = Vec::with_capacity(n);
        for _ in 0..n {
            let line = reader.next_line("missing multi-index")?;
            let comps: Result<Vec<u32>, _> = line.split_whitespace().map(str::parse).collect();
            indices.push(MultiIndex::new(
                comps.map_err(|_| err(reader.pos, "bad multi-index"))?,
            ));
        }
        reader.expect_prefixed("coefficients")?;
        let mut coeffs = Vec::with_capacity(n);
        for _ in 0..n {
            let line = reader.next_line("missing coefficient")?;
            coeffs.push(
                line.trim()
                    .parse()
                    .map_err(|_| err(reader.pos, "bad coefficient"))?,
            );
        }

        let parts: Vec<&str> = scheme_line.split_whitespace().collect();
        let trunc = match parts.as_slice() {
            ["max_degree", a] => {
                let alpha_max = a.parse().map_err(|_| err(0, "bad alpha_max"))?;
                TruncationSet::max_degree(dim, alpha_max)
            }
            ["hyperbolic", q, t] => {
                let q = q.parse().map_err(|_| err(0, "bad q"))?;
                let t = t.parse().map_err(|_| err(0, "bad t"))?;
                TruncationSet::hyperbolic(dim, q, t)
            }
            ["explicit"] => TruncationSet::explicit(dim, indices.clone()),
            _ => return Err(err(0, "unknown scheme")),
        }
        .map_err(|e| err(0, &e.to_string()))?;
        if trunc.indices() != indices.as_slice() {
            return Err(err(0, "listed multi-indices disagree with the scheme"));
        }
        let measure = crate::measure::ProductMeasure::new(
            families
                .iter()
                .map(|f: &crate::basis::BasisFamily| f.matching_measure())
                .collect(),
        )
        .map_err(|e| err(0, &e.to_string()))?;
        let basis = BasisSpec::new(families, measure).map_err(|e| err(0, &e.to_string()))?;
        let mut model = Self::from_coefficients(basis, trunc, coeffs, method)?;
        // The stored flag wins: an OLS singularity is not recoverable from
        // the coefficients alone.
        model.degenerate = degenerate || model.degenerate;
        Ok(model)
    }
}

struct RecordReader<'a> {
    lines: Vec<&'a str>,
    pos: usize,
}

impl<'a> RecordReader<'a> {
    fn next_line(&mut self, missing: &str) -> Result<&'a str, FitError> {
        let line = self.lines.get(self.pos).ok_or(FitError::Parse {
            line: self.pos + 1,
            reason: missing.to_string(),
        })?;
        self.pos += 1;
        Ok(line)
    }

    fn expect_prefixed(&mut self, prefix: &str) -> Result<&'a str, FitError> {
        let line = self.next_line("unexpected end of record")?;
        line.strip_prefix(prefix)
            .map(str::trim)
            .ok_or(FitError::Parse {
                line: self.pos,
                reason: format!("expected `{prefix}`"),
            })
    }
}

fn check_fit_inputs(basis: &BasisSpec, trunc: &TruncationSet, design: &Design) {
    assert_eq!(
        basis.dim(),
        trunc.dim(),
        "basis and truncation dimensions differ"
    );
    assert_eq!(
        basis.dim(),
        design.dim(),
        "basis and design dimensions differ"
    );
    debug_assert!(
        design.rows().all(|p| basis.measure().contains(p)),
        "design points must lie in the measure support"
    );
}

/// The n x N design matrix Phi[i][j] = Psi_{alpha_j}(x_i).
pub fn design_matrix(
    basis: &BasisSpec,
    trunc: &TruncationSet,
    design: &Design,
) -> Result<Matrix, FitError> {
    if basis.dim() != trunc.dim() {
        return Err(FitError::Basis(BasisError::TruncationMismatch {
            expected: basis.dim(),
            got: trunc.dim(),
        }));
    }
    if basis.dim() != design.dim() {
        return Err(FitError::Basis(BasisError::DimensionMismatch {
            expected: basis.dim(),
            got: design.dim(),
        }));
    }
    for point in design.rows() {
        if !basis.measure().contains(point) {
            for (i, &xi) in point.iter().enumerate() {
                if !basis.measure().component(i).contains(xi) {
                    return Err(FitError::Basis(BasisError::OutOfSupport {
                        family: basis.family(i),
                        x: xi,
                    }));
                }
            }
        }
    }
    let mut tables = basis.tables_for(trunc.max_component());
    let mut matrix = Matrix::zeros(design.n_points(), trunc.len());
    for (i, point) in design.rows().enumerate() {
        tables.load_point(point);
        tables.regressor_row(trunc, matrix.row_mut(i));
    }
    Ok(matrix)
}

/// Projection estimate c = Phi^T y / n. Never fails; a zero-variance result
/// is marked degenerate.
pub fn fit_projection(
    basis: &BasisSpec,
    trunc: &TruncationSet,
    sample: &TrainingSample,
) -> Metamodel {
    check_fit_inputs(basis, trunc, sample.design());
    let n = sample.n();
    let mut tables = basis.tables_for(trunc.max_component());
    let mut row = vec![0.0; trunc.len()];
    let mut coeffs = vec![0.0; trunc.len()];
    for (point, &y) in sample.design().rows().zip(sample.responses()) {
        tables.load_point(point);
        tables.regressor_row(trunc, &mut row);
        for (c, r) in coeffs.iter_mut().zip(&row) {
            *c += r * y;
        }
    }
    let scale = 1.0 / n as f64;
    coeffs.iter_mut().for_each(|c| *c *= scale);
    Metamodel::from_coefficients(basis.clone(), trunc.clone(), coeffs, FitMethod::Projection)
        .expect("dimensions checked above")
}

/// Ordinary least squares through a streaming QR of [Phi | y].
///
/// A rank-deficient or ill-conditioned system (condition estimate of
/// Phi^T Phi / n above [`OLS_CONDITION_LIMIT`]) yields the all-zero
/// coefficient vector with the degenerate flag set, not an error.
pub fn fit_ols(basis: &BasisSpec, trunc: &TruncationSet, sample: &TrainingSample) -> Metamodel {
    check_fit_inputs(basis, trunc, sample.design());
    let mut tables = basis.tables_for(trunc.max_component());
    let mut row = vec![0.0; trunc.len()];
    let mut builder = LeastSquaresBuilder::new(trunc.len());
    for (point, &y) in sample.design().rows().zip(sample.responses()) {
        tables.load_point(point);
        tables.regressor_row(trunc, &mut row);
        builder.push_row(&row, y);
    }
    let factor = builder.finish();
    if factor.condition_sq_estimate() > OLS_CONDITION_LIMIT {
        return Metamodel::degenerate_fit(basis.clone(), trunc.clone(), FitMethod::Ols);
    }
    match factor.solve() {
        Some(coeffs) if coeffs.iter().all(|c| c.is_finite()) => {
            Metamodel::from_coefficients(basis.clone(), trunc.clone(), coeffs, FitMethod::Ols)
                .expect("dimensions checked above")
        }
        _ => Metamodel::degenerate_fit(basis.clone(), trunc.clone(), FitMethod::Ols),
    }
}

pub fn fit(
    method: FitMethod,
    basis: &BasisSpec,
    trunc: &TruncationSet,
    sample: &TrainingSample,
) -> Metamodel {
    match method {
        FitMethod::Projection => fit_projection(basis, trunc, sample),
        FitMethod::Ols => fit_ols(basis, trunc, sample),
    }
}

/// Spectral norm ||| Phi^T Phi / n - I_N |||, the least-squares stability
/// diagnostic for a given design.
pub fn stability_gap(basis: &BasisSpec, trunc: &TruncationSet, design: &Design) -> f64 {
    check_fit_inputs(basis, trunc, design);
    let n_reg = trunc.len();
    let n = design.n_points() as f64;
    let mut tables = basis.tables_for(trunc.max_component());
    let mut row = vec![0.0; n_reg];
    let mut gram = vec![0.0; n_reg * n_reg];
    for point in design.rows() {
        tables.load_point(point);
        tables.regressor_row(trunc, &mut row);
        for i in 0..n_reg {
            let ri = row[i];
            for j in i..n_reg {
                gram[i * n_reg + j] += ri * row[j];
            }
        }
    }
    let mut dev = Matrix::zeros(n_reg, n_reg);
    for i in 0..n_reg {
        for j in i..n_reg {
            let mut v = gram[i * n_reg + j] / n;
            if i == j {
                v -= 1.0;
            }
            dev.set(i, j, v);
            dev.set(j, i, v);
        }
    }
    spectral_norm_symmetric(dev)
}

/// Holdout RMSE of a fitted model: sqrt of the mean squared prediction error
/// on an independent test sample.
pub fn rmse_holdout(model: &Metamodel, test: &TrainingSample) -> Result<f64, FitError> {
    if test.n() == 0 {
        return Err(FitError::EmptyTestSample);
    }
    let predictions = model.predict_design(test.design())?;
    let mse = predictions
        .iter()
        .zip(test.responses())
        .map(|(p, y)| (y - p) * (y - p))
        .sum::<f64>()
        / test.n() as f64;
    Ok(mse.sqrt())
}
