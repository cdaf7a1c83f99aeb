//! Minimal dense linear algebra for the fitting pipeline: a row-streaming
//! Householder QR for tall least-squares problems and a Jacobi eigenvalue
//! solver for small symmetric matrices.
//!
//! The streaming factorization processes the design in row blocks and keeps
//! only the (N+1) x (N+1) triangular factor of the augmented system [Phi | y],
//! so sample sizes in the millions never materialize the full matrix.

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Self { rows: r, cols: c, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    // Four partial sums; fixed association keeps results deterministic.
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    let mut s3 = 0.0;
    let chunks = a.len() / 4;
    for i in 0..chunks {
        let k = 4 * i;
        s0 += a[k] * b[k];
        s1 += a[k + 1] * b[k + 1];
        s2 += a[k + 2] * b[k + 2];
        s3 += a[k + 3] * b[k + 3];
    }
    let mut s = (s0 + s1) + (s2 + s3);
    for i in 4 * chunks..a.len() {
        s += a[i] * b[i];
    }
    s
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Streaming least-squares accumulator over the augmented system [Phi | y].
///
/// Rows are pushed one at a time; blocks are absorbed into the triangular
/// factor with Householder reflections. After `finish`, the factor holds the
/// R of a QR factorization of the full augmented matrix (up to column signs),
/// from which the solution, the column condition estimate and the residual
/// norm are read off.
pub struct LeastSquaresBuilder {
    n_regressors: usize,
    k: usize, // n_regressors + 1 (response column)
    tri: Vec<f64>,
    block: Vec<f64>, // column-major scratch, block_cap rows per column
    block_cap: usize,
    block_fill: usize,
    rows_seen: usize,
}

impl LeastSquaresBuilder {
    pub fn new(n_regressors: usize) -> Self {
        let k = n_regressors + 1;
        // Blocks at least as tall as the factor keep the per-block
        // triangularization overhead below a factor of two.
        let block_cap = k.max(1024);
        Self {
            n_regressors,
            k,
            tri: vec![0.0; k * k],
            block: vec![0.0; block_cap * k],
            block_cap,
            block_fill: 0,
            rows_seen: 0,
        }
    }

    pub fn push_row(&mut self, regressors: &[f64], y: f64) {
        debug_assert_eq!(regressors.len(), self.n_regressors);
        let i = self.block_fill;
        for (c, &v) in regressors.iter().enumerate() {
            self.block[c * self.block_cap + i] = v;
        }
        self.block[self.n_regressors * self.block_cap + i] = y;
        self.block_fill += 1;
        self.rows_seen += 1;
        if self.block_fill == self.block_cap {
            self.absorb_block();
        }
    }

    /// Absorb the filled part of the block into the triangular factor.
    fn absorb_block(&mut self) {
        let b = self.block_fill;
        if b == 0 {
            return;
        }
        let k = self.k;
        let cap = self.block_cap;
        for j in 0..k {
            let (head, tail) = self.block.split_at_mut((j + 1) * cap);
            let col_j = &mut head[j * cap..j * cap + b];
            let diag = self.tri[j * k + j];
            let sumsq = dot(col_j, col_j);
            if sumsq == 0.0 {
                continue;
            }
            let norm = (diag * diag + sumsq).sqrt();
            let sign = if diag >= 0.0 { 1.0 } else { -1.0 };
            let v0 = diag + sign * norm;
            let tau = 2.0 / (v0 * v0 + sumsq);
            for c in j + 1..k {
                let col_c = &mut tail[(c - j - 1) * cap..(c - j - 1) * cap + b];
                let s = tau * (v0 * self.tri[j * k + c] + dot(col_j, col_c));
                self.tri[j * k + c] -= s * v0;
                axpy(-s, col_j, col_c);
            }
            self.tri[j * k + j] = -sign * norm;
        }
        self.block_fill = 0;
    }

    pub fn finish(mut self) -> LeastSquaresFactor {
        self.absorb_block();
        LeastSquaresFactor {
            n_regressors: self.n_regressors,
            k: self.k,
            tri: self.tri,
            n_rows: self.rows_seen,
        }
    }
}

/// Triangular factor of the augmented least-squares system.
pub struct LeastSquaresFactor {
    n_regressors: usize,
    k: usize,
    tri: Vec<f64>,
    n_rows: usize,
}

impl LeastSquaresFactor {
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    /// Squared condition-number estimate of Phi^T Phi / n from the R
    /// diagonal: (max |r_ii| / min |r_ii|)^2. Infinite when a pivot is zero
    /// or the system is rank-deficient by row count.
    pub fn condition_sq_estimate(&self) -> f64 {
        if self.n_rows < self.n_regressors {
            return f64::INFINITY;
        }
        let mut min = f64::INFINITY;
        let mut max: f64 = 0.0;
        for j in 0..self.n_regressors {
            let d = self.tri[j * self.k + j].abs();
            min = min.min(d);
            max = max.max(d);
        }
        if min == 0.0 {
            return f64::INFINITY;
        }
        let ratio = max / min;
        ratio * ratio
    }

    /// Back-substitute R c = Q^T y. Returns None on a zero pivot.
    pub fn solve(&self) -> Option<Vec<f64>> {
        let n = self.n_regressors;
        if self.n_rows < n {
            return None;
        }
        let k = self.k;
        let mut c = vec![0.0; n];
        for j in (0..n).rev() {
            let mut s = self.tri[j * k + n]; // Q^T y component
            for (t, cl) in self.tri[j * k + j + 1..j * k + n].iter().zip(&c[j + 1..n]) {
                s -= t * cl;
            }
            let d = self.tri[j * k + j];
            if d == 0.0 {
                return None;
            }
            c[j] = s / d;
        }
        Some(c)
    }

    /// Euclidean norm of the least-squares residual ||y - Phi c||.
    pub fn residual_norm(&self) -> f64 {
        let n = self.n_regressors;
        self.tri[n * self.k + n].abs()
    }
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
///
/// The input is consumed. Suitable for the moderate sizes (N up to a few
/// hundred) that stability diagnostics work with.
pub fn symmetric_eigenvalues(mut a: Matrix) -> Vec<f64> {
    assert_eq!(a.rows(), a.cols(), "matrix must be square");
    let n = a.rows();
    if n == 1 {
        return vec![a.get(0, 0)];
    }
    let scale: f64 = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| a.get(i, j).abs())
        .fold(0.0, f64::max)
        .max(1.0);
    let tol = 1e-14 * scale;
    for _sweep in 0..60 {
        let mut off: f64 = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                off = off.max(a.get(i, j).abs());
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a.get(p, q);
                if apq.abs() <= tol * 1e-2 {
                    continue;
                }
                let app = a.get(p, p);
                let aqq = a.get(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    1.0 / (theta - (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for i in 0..n {
                    let aip = a.get(i, p);
                    let aiq = a.get(i, q);
                    a.set(i, p, c * aip - s * aiq);
                    a.set(i, q, s * aip + c * aiq);
                }
                for i in 0..n {
                    let api = a.get(p, i);
                    let aqi = a.get(q, i);
                    a.set(p, i, c * api - s * aqi);
                    a.set(q, i, s * api + c * aqi);
                }
            }
        }
    }
    (0..n).map(|i| a.get(i, i)).collect()
}

/// Largest absolute eigenvalue of a symmetric matrix.
pub fn spectral_norm_symmetric(a: Matrix) -> f64 {
    symmetric_eigenvalues(a)
        .into_iter()
        .map(f64::abs)
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solve_dense(rows: &[(&[f64], f64)]) -> Option<Vec<f64>> {
        let n = rows[0].0.len();
        let mut b = LeastSquaresBuilder::new(n);
        for (r, y) in rows {
            b.push_row(r, *y);
        }
        b.finish().solve()
    }

    #[test]
    fn exact_square_system() {
        // x + 2y = 5, 3x - y = 1  =>  x = 1, y = 2.
        let c = solve_dense(&[(&[1.0, 2.0], 5.0), (&[3.0, -1.0], 1.0)]).unwrap();
        assert!((c[0] - 1.0).abs() < 1e-12);
        assert!((c[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn overdetermined_regression() {
        // y = 2 + 3x at x = 0, 1, 2; exact fit.
        let c = solve_dense(&[
            (&[1.0, 0.0], 2.0),
            (&[1.0, 1.0], 5.0),
            (&[1.0, 2.0], 8.0),
        ])
        .unwrap();
        assert!((c[0] - 2.0).abs() < 1e-12);
        assert!((c[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn least_squares_residual_and_orthogonality() {
        // Four points, y = x^2 fitted by a line: residual must be Phi-orthogonal.
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| x * x).collect();
        let mut b = LeastSquaresBuilder::new(2);
        for (x, y) in xs.iter().zip(&ys) {
            b.push_row(&[1.0, *x], *y);
        }
        let f = b.finish();
        let c = f.solve().unwrap();
        let resid: Vec<f64> = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| y - (c[0] + c[1] * x))
            .collect();
        let g0: f64 = resid.iter().sum();
        let g1: f64 = xs.iter().zip(&resid).map(|(x, r)| x * r).sum();
        assert!(g0.abs() < 1e-10 && g1.abs() < 1e-10);
        let norm = f.residual_norm();
        let want = resid.iter().map(|r| r * r).sum::<f64>().sqrt();
        assert!((norm - want).abs() < 1e-10);
    }

    #[test]
    fn streaming_matches_single_block() {
        // More rows than the block capacity forces multiple absorb passes.
        let n = 3;
        let mut small = LeastSquaresBuilder::new(n);
        small.block_cap = 7;
        small.block = vec![0.0; 7 * (n + 1)];
        let mut big = LeastSquaresBuilder::new(n);
        let mut state = 1u64;
        let mut next = || {
            // xorshift, just to generate a deterministic spread of values
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state % 1000) as f64 / 500.0 - 1.0
        };
        for _ in 0..100 {
            let row = [next(), next(), next()];
            let y = next();
            small.push_row(&row, y);
            big.push_row(&row, y);
        }
        let cs = small.finish().solve().unwrap();
        let cb = big.finish().solve().unwrap();
        for (a, b) in cs.iter().zip(&cb) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn rank_deficiency_is_detected() {
        let f = {
            let mut b = LeastSquaresBuilder::new(2);
            b.push_row(&[1.0, 2.0], 1.0);
            b.push_row(&[2.0, 4.0], 2.0);
            b.push_row(&[3.0, 6.0], 3.0);
            b.finish()
        };
        assert!(f.condition_sq_estimate() > 1e20);
        // Underdetermined by row count.
        let mut b = LeastSquaresBuilder::new(3);
        b.push_row(&[1.0, 0.0, 0.0], 1.0);
        let f = b.finish();
        assert_eq!(f.condition_sq_estimate(), f64::INFINITY);
        assert!(f.solve().is_none());
    }

    #[test]
    fn jacobi_eigenvalues_2x2() {
        // [[0, sqrt(3)], [sqrt(3), 2]] has eigenvalues 3 and -1.
        let s3 = 3f64.sqrt();
        let a = Matrix::from_rows(&[&[0.0, s3], &[s3, 2.0]]);
        let mut ev = symmetric_eigenvalues(a);
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((ev[0] + 1.0).abs() < 1e-12);
        assert!((ev[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn spectral_norm_of_diagonal() {
        let mut a = Matrix::zeros(3, 3);
        a.set(0, 0, -5.0);
        a.set(1, 1, 2.0);
        a.set(2, 2, 4.0);
        assert!((spectral_norm_symmetric(a) - 5.0).abs() < 1e-12);
    }
}
