//! Finite-difference check that the Jacobi-space Laplacian becomes the
//! weighted sum of Eckart-space Laplacians.
//!
//! The Laplacian of `g(f1, f2, tau)` composed with the Eckart vectors is
//! differenced in double-double arithmetic so the `O(h^2)` truncation error
//! stays visible down to `h = 1e-5`.

use rand::Rng;
use twofloat::TwoFloat;

use crate::equilibrium::EquilibriumGeometry;
use crate::error::{Error, Result};
use crate::frame::eckart_vectors;
use crate::geometry::JacobiPair;
use crate::hamiltonian::H0Pairing;
use crate::internal::InternalCoordsEckart;

/// Step sizes used for the observed-order estimate.
pub const STEPS: [f64; 3] = [1e-3, 1e-4, 1e-5];

/// `sum_k c_k f1^a f2^b tau^c`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestPolynomial {
    pub terms: Vec<(f64, [u32; 3])>,
}

impl TestPolynomial {
    /// Random coefficients in `[-1, 1]` on every monomial of total degree
    /// 2 to `max_degree`.
    pub fn random<R: Rng>(rng: &mut R, max_degree: u32) -> Self {
        let mut terms = Vec::new();
        for a in 0..=max_degree {
            for b in 0..=max_degree - a {
                for c in 0..=max_degree - a - b {
                    if a + b + c >= 2 {
                        terms.push((rng.gen_range(-1.0..1.0), [a, b, c]));
                    }
                }
            }
        }
        Self { terms }
    }

    fn eval_dd(&self, x: [TwoFloat; 3]) -> TwoFloat {
        let mut acc = TwoFloat::from(0.0);
        for (c, p) in &self.terms {
            let mut m = TwoFloat::from(*c);
            for k in 0..3 {
                for _ in 0..p[k] {
                    m = m * x[k];
                }
            }
            acc = acc + m;
        }
        acc
    }

    /// `d^{n0+n1+n2} g / df1^n0 df2^n1 dtau^n2`.
    pub fn derivative(&self, x: [f64; 3], n: [u32; 3]) -> f64 {
        self.terms
            .iter()
            .map(|(c, p)| {
                let mut v = *c;
                for k in 0..3 {
                    if p[k] < n[k] {
                        return 0.0;
                    }
                    for j in 0..n[k] {
                        v *= (p[k] - j) as f64;
                    }
                    v *= x[k].powi((p[k] - n[k]) as i32);
                }
                v
            })
            .sum()
    }
}

/// `g_ff + (2/f) g_f + (1/f^2)((1 - tau^2) g_tautau - 2 tau g_tau)` for `f = f_i`.
pub fn eckart_laplacian(g: &TestPolynomial, ic: &InternalCoordsEckart, i: usize) -> f64 {
    let x = [ic.f1, ic.f2, ic.tau];
    let f = x[i];
    let mut n2 = [0; 3];
    n2[i] = 2;
    let mut n1 = [0; 3];
    n1[i] = 1;
    let t = ic.tau;
    g.derivative(x, n2)
        + 2.0 / f * g.derivative(x, n1)
        + ((1.0 - t * t) * g.derivative(x, [0, 0, 2]) - 2.0 * t * g.derivative(x, [0, 0, 1])) / (f * f)
}

/// `a1 Lap_f1 g + a2 Lap_f2 g`.
pub fn weighted_eckart_laplacian(g: &TestPolynomial, ic: &InternalCoordsEckart, a: [f64; 2]) -> f64 {
    a[0] * eckart_laplacian(g, ic, 0) + a[1] * eckart_laplacian(g, ic, 1)
}

/// Quotient refined by two Newton corrections; plain `TwoFloat` division
/// is only accurate to about one ulp of the high word.
fn div_dd(a: TwoFloat, b: TwoFloat) -> TwoFloat {
    let mut q = TwoFloat::from(a.hi() / b.hi());
    for _ in 0..2 {
        q = q + (a - b * q).hi() / b.hi();
    }
    q
}

fn composed_dd(g: &TestPolynomial, eq: &EquilibriumGeometry, r: [[TwoFloat; 3]; 2]) -> TwoFloat {
    let lin = |a: f64, b: f64| -> [TwoFloat; 3] { std::array::from_fn(|k| r[0][k] * a + r[1][k] * b) };
    let f1 = lin(eq.x1, eq.x2);
    let f2 = lin(eq.y1, eq.y2);
    let dot = |u: &[TwoFloat; 3], v: &[TwoFloat; 3]| u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
    let n1 = dot(&f1, &f1).sqrt();
    let n2 = dot(&f2, &f2).sqrt();
    let tau = div_dd(dot(&f1, &f2), n1 * n2);
    g.eval_dd([n1, n2, tau])
}

/// Central-difference Laplacian in the six Jacobi components.
pub fn jacobi_laplacian_fd(g: &TestPolynomial, j: &JacobiPair, eq: &EquilibriumGeometry, h: f64) -> f64 {
    let base: [[TwoFloat; 3]; 2] =
        [std::array::from_fn(|k| TwoFloat::from(j.r1[k])), std::array::from_fn(|k| TwoFloat::from(j.r2[k]))];
    let hh = TwoFloat::from(h);
    let centre = composed_dd(g, eq, base);
    let mut acc = TwoFloat::from(0.0);
    for a in 0..2 {
        for k in 0..3 {
            let mut p = base;
            p[a][k] = p[a][k] + hh;
            let mut m = base;
            m[a][k] = m[a][k] - hh;
            acc = acc + composed_dd(g, eq, p) + composed_dd(g, eq, m) - centre * 2.0;
        }
    }
    f64::from(div_dd(acc, hh * hh))
}

#[derive(Debug, Clone, PartialEq)]
pub struct KineticCheck {
    pub analytic: f64,
    pub steps: [f64; 3],
    pub errors: [f64; 3],
    /// Orders observed between consecutive step sizes.
    pub orders: [f64; 2],
}

impl KineticCheck {
    pub fn orders_within(&self, lo: f64, hi: f64) -> bool {
        self.orders.iter().all(|p| (lo..=hi).contains(p))
    }
}

fn eckart_point(j: &JacobiPair, eq: &EquilibriumGeometry) -> Result<InternalCoordsEckart> {
    let ic = InternalCoordsEckart::from_vectors(&eckart_vectors(j, eq)?);
    if ic.has_zero_length() || ic.sin_phi() < 1e-3 {
        return Err(Error::SingularCoordinate { coordinate: "sin_phi", value: ic.sin_phi() });
    }
    Ok(ic)
}

/// Compares the finite-difference Jacobi Laplacian with
/// `I2 Lap_f1 + I1 Lap_f2`.
pub fn kinetic_identity_check(g: &TestPolynomial, j: &JacobiPair, eq: &EquilibriumGeometry) -> Result<KineticCheck> {
    let ic = eckart_point(j, eq)?;
    let analytic = weighted_eckart_laplacian(g, &ic, [eq.i2, eq.i1]);
    let errors = STEPS.map(|h| (jacobi_laplacian_fd(g, j, eq, h) - analytic).abs());
    let order = |a: usize, b: usize| (errors[a] / errors[b]).log10() / (STEPS[a] / STEPS[b]).log10();
    Ok(KineticCheck { analytic, steps: STEPS, errors, orders: [order(0, 1), order(1, 2)] })
}

/// Residual of each radial pairing against the finite-difference
/// Laplacian at the smallest step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairingDiagnostic {
    pub as_printed: f64,
    pub kinetic_identity: f64,
}

impl PairingDiagnostic {
    pub fn preferred(&self) -> H0Pairing {
        if self.as_printed <= self.kinetic_identity {
            H0Pairing::AsPrinted
        } else {
            H0Pairing::KineticIdentity
        }
    }
}

pub fn pairing_diagnostic(g: &TestPolynomial, j: &JacobiPair, eq: &EquilibriumGeometry) -> Result<PairingDiagnostic> {
    let ic = eckart_point(j, eq)?;
    let fd = jacobi_laplacian_fd(g, j, eq, STEPS[2]);
    let res = |p: H0Pairing| {
        let (a, _) = p.weights(eq.i1, eq.i2);
        (weighted_eckart_laplacian(g, &ic, a) - fd).abs()
    };
    Ok(PairingDiagnostic { as_printed: res(H0Pairing::AsPrinted), kinetic_identity: res(H0Pairing::KineticIdentity) })
}
