//! Product probability measures on box domains and seeded sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum MeasureError {
    #[error("a product measure needs at least one dimension")]
    EmptyDimension,
    #[error("point has dimension {got}, measure has dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("sample size must be at least 1")]
    EmptySample,
}

/// One factor of a product measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComponentMeasure {
    /// Uniform on [-1, 1].
    UniformSym,
    /// Uniform on [0, 1].
    UniformUnit,
    /// Arcsine on [-1, 1], density 1 / (pi * sqrt(1 - x^2)).
    Arcsine,
}

impl ComponentMeasure {
    pub fn support(&self) -> (f64, f64) {
        match self {
            ComponentMeasure::UniformSym | ComponentMeasure::Arcsine => (-1.0, 1.0),
            ComponentMeasure::UniformUnit => (0.0, 1.0),
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        let (lo, hi) = self.support();
        x >= lo && x <= hi
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        match self {
            ComponentMeasure::UniformUnit => u,
            ComponentMeasure::UniformSym => 2.0 * u - 1.0,
            // Cosine transform of a uniform variable; exact and branch-free.
            ComponentMeasure::Arcsine => (std::f64::consts::PI * u).cos(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ComponentMeasure::UniformSym => "uniform[-1,1]",
            ComponentMeasure::UniformUnit => "uniform[0,1]",
            ComponentMeasure::Arcsine => "arcsine[-1,1]",
        }
    }
}

/// Tensor product of independent component measures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductMeasure {
    components: Vec<ComponentMeasure>,
}

impl ProductMeasure {
    pub fn new(components: Vec<ComponentMeasure>) -> Result<Self, MeasureError> {
        if components.is_empty() {
            return Err(MeasureError::EmptyDimension);
        }
        Ok(Self { components })
    }

    pub fn uniform_sym(dim: usize) -> Self {
        Self::new(vec![ComponentMeasure::UniformSym; dim]).expect("dim must be positive")
    }

    pub fn uniform_unit(dim: usize) -> Self {
        Self::new(vec![ComponentMeasure::UniformUnit; dim]).expect("dim must be positive")
    }

    pub fn arcsine(dim: usize) -> Self {
        Self::new(vec![ComponentMeasure::Arcsine; dim]).expect("dim must be positive")
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[ComponentMeasure] {
        &self.components
    }

    pub fn component(&self, i: usize) -> ComponentMeasure {
        self.components[i]
    }

    pub fn support(&self) -> Vec<(f64, f64)> {
        self.components.iter().map(|c| c.support()).collect()
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.dim()
            && point
                .iter()
                .zip(&self.components)
                .all(|(&x, c)| c.contains(x))
    }

    /// Draw `n` i.i.d. points. Identical (measure, n, seed) triples produce
    /// bit-identical point sets.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Design, MeasureError> {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        self.sample_with_rng(n, &mut rng)
    }

    pub fn sample_with_rng<R: Rng>(&self, n: usize, rng: &mut R) -> Result<Design, MeasureError> {
        if n == 0 {
            return Err(MeasureError::EmptySample);
        }
        let d = self.dim();
        let mut data = Vec::with_capacity(n * d);
        for _ in 0..n {
            for c in &self.components {
                data.push(c.draw(rng));
            }
        }
        Ok(Design { dim: d, data })
    }
}

/// A set of design points, stored flat in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    dim: usize,
    data: Vec<f64>,
}

impl Design {
    pub fn from_flat(dim: usize, data: Vec<f64>) -> Result<Self, MeasureError> {
        if dim == 0 {
            return Err(MeasureError::EmptyDimension);
        }
        if data.is_empty() || !data.len().is_multiple_of(dim) {
            return Err(MeasureError::EmptySample);
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows(dim: usize, rows: &[&[f64]]) -> Result<Self, MeasureError> {
        let mut data = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            if r.len() != dim {
                return Err(MeasureError::DimensionMismatch {
                    expected: dim,
                    got: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Self::from_flat(dim, data)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_points(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    /// Select rows by index (with repetition allowed), e.g. for bootstrap
    /// resampling.
    pub fn take_rows(&self, idx: &[usize]) -> Design {
        let mut data = Vec::with_capacity(idx.len() * self.dim);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Design {
            dim: self.dim,
            data,
        }
    }
}
