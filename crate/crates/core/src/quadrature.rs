//! Fixed-order quadrature rules, used to verify basis orthonormality.
//!
//! All rules return (nodes, weights) normalized against the *probability*
//! measure of the matching component, so weights sum to one.

/// Gauss-Legendre rule on [-1, 1] for the uniform probability measure.
///
/// Exact for polynomials up to degree 2*order - 1.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1);
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    // Newton iteration on P_n, symmetric pairs filled from one half.
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 1.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss-Chebyshev rule on [-1, 1] for the arcsine probability measure.
///
/// Nodes cos(pi (2k-1) / 2m) with equal weights 1/m; exact for Chebyshev
/// expansions up to degree 2*order - 1.
pub fn gauss_chebyshev(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1);
    let m = order as f64;
    let nodes = (1..=order)
        .map(|k| (std::f64::consts::PI * (2.0 * k as f64 - 1.0) / (2.0 * m)).cos())
        .collect();
    (nodes, vec![1.0 / m; order])
}

/// Midpoint rule on [0, 1] for the uniform probability measure.
///
/// Exact for trigonometric polynomials with frequency below `order`.
pub fn periodic_midpoint(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1);
    let m = order as f64;
    let nodes = (0..order).map(|k| (k as f64 + 0.5) / m).collect();
    (nodes, vec![1.0 / m; order])
}
