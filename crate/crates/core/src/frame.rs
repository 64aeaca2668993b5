//! Eckart vectors and the closed-form Eckart frame.

use crate::equilibrium::EquilibriumGeometry;
use crate::error::{Error, Result};
use crate::geometry::{JacobiPair, Vec3};

/// Relative collinearity threshold on `|f1 x f2| / (f1 f2)`.
pub const EPS_LIN: f64 = 1e-12;

/// `f1 = x1 r1 + x2 r2`, `f2 = y1 r1 + y2 r2` in the lab frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EckartVectors {
    pub f1: Vec3,
    pub f2: Vec3,
}

impl EckartVectors {
    pub fn cross_norm(&self) -> f64 {
        self.f1.cross(&self.f2).norm()
    }

    /// `sqrt(f1^2 + f2^2 + 2 |f1 x f2|)`.
    pub fn eckart_parameter(&self) -> f64 {
        (self.f1.norm_squared() + self.f2.norm_squared() + 2.0 * self.cross_norm()).sqrt()
    }
}

/// Orthonormal Eckart axes in the lab frame and the Eckart parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EckartFrame {
    pub e1: Vec3,
    pub e2: Vec3,
    pub e3: Vec3,
    pub big_f: f64,
}

impl EckartFrame {
    pub fn axes(&self) -> [Vec3; 3] {
        [self.e1, self.e2, self.e3]
    }

    /// Largest deviation from orthonormality among the three axes.
    pub fn orthonormality_error(&self) -> f64 {
        let a = self.axes();
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in i..3 {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((a[i].dot(&a[j]) - target).abs());
            }
        }
        worst
    }

    /// Equilibrium vectors `rho_k = x_k e1 + y_k e2` embedded with this frame.
    pub fn embedded_equilibrium(&self, eq: &EquilibriumGeometry) -> [Vec3; 2] {
        [self.e1 * eq.x1 + self.e2 * eq.y1, self.e1 * eq.x2 + self.e2 * eq.y2]
    }
}

pub fn eckart_vectors(j: &JacobiPair, eq: &EquilibriumGeometry) -> Result<EckartVectors> {
    if !j.is_scaled() {
        return Err(Error::NotScaled);
    }
    if eq.is_collinear() {
        return Err(Error::CollinearEquilibrium { i2: eq.i2 });
    }
    Ok(EckartVectors { f1: j.r1 * eq.x1 + j.r2 * eq.x2, f2: j.r1 * eq.y1 + j.r2 * eq.y2 })
}

pub fn build_frame(f: &EckartVectors) -> Result<EckartFrame> {
    let n1 = f.f1.norm();
    let n2 = f.f2.norm();
    if n1 == 0.0 || n2 == 0.0 {
        return Err(Error::DegenerateConfiguration(format!("zero-length Eckart vector (f1 = {n1:e}, f2 = {n2:e})")));
    }
    let c = f.f1.cross(&f.f2);
    let cn = c.norm();
    if cn <= EPS_LIN * n1 * n2 {
        return Err(Error::FrameSingularity { ratio: cn / (n1 * n2) });
    }
    let big_f = f.eckart_parameter();
    let e1 = (f.f1 + f.f2.cross(&c) / cn) / big_f;
    let e2 = (f.f2 - f.f1.cross(&c) / cn) / big_f;
    Ok(EckartFrame { e1, e2, e3: e1.cross(&e2), big_f })
}

/// `[e1 x f1] + [e2 x f2]`; vanishes for an Eckart frame.
pub fn eckart_residual(frame: &EckartFrame, f: &EckartVectors) -> Vec3 {
    frame.e1.cross(&f.f1) + frame.e2.cross(&f.f2)
}

/// Triangle areas spanned by `(rho_1, r_1)` and `(rho_2, r_2)` with the
/// equilibrium embedded by `frame`. The Eckart condition makes them equal.
pub fn area_diagnostic(j: &JacobiPair, eq: &EquilibriumGeometry, frame: &EckartFrame) -> (f64, f64) {
    let [rho1, rho2] = frame.embedded_equilibrium(eq);
    (0.5 * rho1.cross(&j.r1).norm(), 0.5 * rho2.cross(&j.r2).norm())
}

/// Result of the numerical Eckart-frame search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleFrame {
    pub frame: EckartFrame,
    /// `|[rho_1 x r_1] + [rho_2 x r_2]|^2` at the returned frame.
    pub objective: f64,
}

const ORACLE_SCAN: usize = 720;

/// Finds the Eckart frame by a direct search over in-plane rotations.
///
/// Every three-body configuration is planar, so the frame is `e1`, `e2` in
/// the configuration plane with `e3` along its normal. For each handedness
/// the in-plane angle is scanned for the largest projection
/// `e1.f1 + e2.f2` and the Eckart condition `sum rho_a x r_a = 0` is then
/// solved by bisection around that maximum. Nothing from [`build_frame`] is
/// used.
pub fn frame_oracle(j: &JacobiPair, eq: &EquilibriumGeometry) -> Result<OracleFrame> {
    if !j.is_scaled() {
        return Err(Error::NotScaled);
    }
    if eq.is_collinear() {
        return Err(Error::CollinearEquilibrium { i2: eq.i2 });
    }
    let normal = j.r1.cross(&j.r2);
    let scale = j.r1.norm() * j.r2.norm();
    if normal.norm() <= EPS_LIN * scale || scale == 0.0 {
        return Err(Error::OracleFailure("configuration is collinear; plane undefined".into()));
    }
    let n = normal.normalize();
    let u = j.r1.normalize();
    let v = n.cross(&u);

    let axes_at = |alpha: f64, hand: f64| {
        let (s, c) = alpha.sin_cos();
        let e1 = u * c + v * s;
        let e2 = (-u * s + v * c) * hand;
        (e1, e2)
    };
    let condition = |alpha: f64, hand: f64| {
        let (e1, e2) = axes_at(alpha, hand);
        let rho1 = e1 * eq.x1 + e2 * eq.y1;
        let rho2 = e1 * eq.x2 + e2 * eq.y2;
        rho1.cross(&j.r1) + rho2.cross(&j.r2)
    };
    let projection = |alpha: f64, hand: f64| {
        let (e1, e2) = axes_at(alpha, hand);
        let rho1 = e1 * eq.x1 + e2 * eq.y1;
        let rho2 = e1 * eq.x2 + e2 * eq.y2;
        rho1.dot(&j.r1) + rho2.dot(&j.r2)
    };

    let mut best: Option<(f64, f64, f64)> = None;
    for hand in [1.0, -1.0] {
        let step = std::f64::consts::TAU / ORACLE_SCAN as f64;
        let (imax, _) = (0..ORACLE_SCAN)
            .map(|i| (i, projection(i as f64 * step, hand)))
            .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
        // the in-plane condition is a scalar along n; it changes sign across the maximum
        let signed = |alpha: f64| condition(alpha, hand).dot(&n);
        let mut lo = (imax as f64 - 1.0) * step;
        let mut hi = (imax as f64 + 1.0) * step;
        let (mut glo, ghi) = (signed(lo), signed(hi));
        if glo.signum() == ghi.signum() && glo != 0.0 && ghi != 0.0 {
            return Err(Error::OracleFailure("Eckart condition not bracketed around the projection maximum".into()));
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let gm = signed(mid);
            if gm == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if gm.signum() == glo.signum() {
                lo = mid;
                glo = gm;
            } else {
                hi = mid;
            }
        }
        let alpha = 0.5 * (lo + hi);
        let p = projection(alpha, hand);
        if best.is_none_or(|b| p > b.1) {
            best = Some((alpha, p, hand));
        }
    }
    let (alpha, big_f, hand) = best.expect("two handedness candidates");
    let (e1, e2) = axes_at(alpha, hand);
    let objective = condition(alpha, hand).norm_squared();
    if objective > 1e-16 * big_f * big_f {
        return Err(Error::OracleFailure(format!(
            "objective {objective:e} above 1e-16 F^2 = {:e}",
            1e-16 * big_f * big_f
        )));
    }
    Ok(OracleFrame { frame: EckartFrame { e1, e2, e3: e1.cross(&e2), big_f }, objective })
}
