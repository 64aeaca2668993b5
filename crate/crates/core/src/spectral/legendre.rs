//! Gauss–Legendre quadrature and the normalized Legendre basis.

use nalgebra::DMatrix;

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    (p1, n as f64 * (x * p1 - p0) / (x * x - 1.0))
}

/// Nodes in ascending order and weights summing to 2.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, z);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, z);
        x[n - 1 - i] = z;
        w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// Values and derivatives of `sqrt((2l+1)/2) P_l(x)` for `l < n`.
pub fn normalized_legendre(n: usize, x: f64) -> (Vec<f64>, Vec<f64>) {
    let mut p = vec![0.0; n];
    let mut dp = vec![0.0; n];
    p[0] = 1.0;
    if n > 1 {
        p[1] = x;
        dp[1] = 1.0;
    }
    for l in 2..n {
        let lf = l as f64;
        p[l] = ((2.0 * lf - 1.0) * x * p[l - 1] - (lf - 1.0) * p[l - 2]) / lf;
        dp[l] = dp[l - 2] + (2.0 * lf - 1.0) * p[l - 1];
    }
    for l in 0..n {
        let c = ((2 * l + 1) as f64 / 2.0).sqrt();
        p[l] *= c;
        dp[l] *= c;
    }
    (p, dp)
}

/// Orthogonal matrix `T[k][l] = sqrt(w_k) P~_l(x_k)` mapping Legendre
/// coefficients to weighted quadrature values.
pub fn transform(n: usize) -> DMatrix<f64> {
    let (x, w) = gauss_legendre(n);
    DMatrix::from_fn(n, n, |k, l| w[k].sqrt() * normalized_legendre(n, x[k]).0[l])
}

/// Matrix of `-d/dtau (1 - tau^2) d/dtau` in the normalized Legendre basis,
/// assembled by quadrature of the weak form.
pub fn angular_operator_matrix(n: usize) -> DMatrix<f64> {
    let (x, w) = gauss_legendre(n);
    let mut m = DMatrix::zeros(n, n);
    for (xk, wk) in x.iter().zip(&w) {
        let (_, dp) = normalized_legendre(n, *xk);
        for a in 0..n {
            for b in 0..n {
                m[(a, b)] += wk * (1.0 - xk * xk) * dp[a] * dp[b];
            }
        }
    }
    m
}
