//! Coefficient fields of `H = H0 + H_cor + H_rot` in Eckart internal
//! variables.
//!
//! Operators are not represented; each function returns the scalar fields
//! that multiply the ordered operator products. The Coriolis part is written
//! as
//!
//! ```text
//! H_cor = i L3 (d_f1 d/df1 + d_f2 d/df2 + d_tau d/dtau + free)
//! ```
//!
//! and the rotational part as `H_rot = (1/2) sum_ij I_ij L_i L_j`.

use nalgebra::Matrix3;
use rayon::prelude::*;

use crate::equilibrium::{degeneracy_check, EquilibriumGeometry, DEFAULT_EPS_DEG};
use crate::error::{Error, Result};
use crate::frame::{build_frame, eckart_vectors, EckartVectors};
use crate::geometry::{JacobiPair, Vec3};
use crate::internal::{eckart_internal, InternalCoordsEckart, InternalCoordsJacobi};

/// `sin(phi)` at or below this value is a coordinate singularity.
pub const SIN_SINGULAR: f64 = 1e-12;

/// Which equilibrium moment multiplies which Eckart coordinate in `H0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum H0Pairing {
    /// `I_i` multiplies the `f_i` radial term, angular prefactor
    /// `I1/f1^2 + I2/f2^2`, exactly as the vibrational operator is usually
    /// printed.
    #[default]
    AsPrinted,
    /// Pairing implied by `Lap_1 + Lap_2 = I2 Lap_f1 + I1 Lap_f2`: `I2` with
    /// `f1` and `I1` with `f2`.
    KineticIdentity,
}

impl H0Pairing {
    /// `([a1, a2], [c1, c2])` so that
    /// `H0 = -sum a_i/(2 f_i^2) d f_i^2 d - (1/2)(c1/f1^2 + c2/f2^2) d(1-tau^2)d + U`.
    pub fn weights(self, i1: f64, i2: f64) -> ([f64; 2], [f64; 2]) {
        match self {
            H0Pairing::AsPrinted => ([i1, i2], [i1, i2]),
            H0Pairing::KineticIdentity => ([i2, i1], [i2, i1]),
        }
    }
}

/// Coefficients of the vibrational operator at one point:
/// `H0 = -sum radial_i/(2 f_i^2) d/df_i f_i^2 d/df_i - (angular/2) d/dtau (1-tau^2) d/dtau + U`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct H0Coefficients {
    pub radial_1: f64,
    pub radial_2: f64,
    pub angular: f64,
}

fn check_lengths(ic: &InternalCoordsEckart) -> Result<()> {
    let scale = ic.f1.max(ic.f2);
    if ic.f1 <= 1e-300 * scale || ic.f1 == 0.0 {
        return Err(Error::SingularCoordinate { coordinate: "f1", value: ic.f1 });
    }
    if ic.f2 <= 1e-300 * scale || ic.f2 == 0.0 {
        return Err(Error::SingularCoordinate { coordinate: "f2", value: ic.f2 });
    }
    Ok(())
}

fn check_sine(ic: &InternalCoordsEckart) -> Result<f64> {
    let s = ic.sin_phi();
    if s <= SIN_SINGULAR {
        return Err(Error::SingularCoordinate { coordinate: "sin_phi", value: s });
    }
    Ok(s)
}

pub fn h0_coefficients(ic: &InternalCoordsEckart, i1: f64, i2: f64) -> Result<H0Coefficients> {
    h0_coefficients_with(ic, i1, i2, H0Pairing::AsPrinted)
}

pub fn h0_coefficients_with(ic: &InternalCoordsEckart, i1: f64, i2: f64, pairing: H0Pairing) -> Result<H0Coefficients> {
    check_lengths(ic)?;
    let ([a1, a2], [c1, c2]) = pairing.weights(i1, i2);
    Ok(H0Coefficients { radial_1: a1, radial_2: a2, angular: c1 / (ic.f1 * ic.f1) + c2 / (ic.f2 * ic.f2) })
}

/// `B3 = (I2 - I1) cot(phi) / F^2`; `B1 = B2 = 0`.
pub fn coriolis_b3(ic: &InternalCoordsEckart, i1: f64, i2: f64) -> Result<f64> {
    let s = check_sine(ic)?;
    Ok((i2 - i1) * (ic.tau / s) / ic.big_f_sq())
}

/// The 3x3 matrix `U^-1` built from the Eckart vectors.
pub fn u_inverse(f: &EckartVectors) -> Result<Matrix3<f64>> {
    let n1 = f.f1.norm();
    let n2 = f.f2.norm();
    let c = f.cross_norm();
    if c <= crate::frame::EPS_LIN * n1 * n2 || c == 0.0 {
        return Err(Error::FrameSingularity { ratio: if n1 * n2 > 0.0 { c / (n1 * n2) } else { 0.0 } });
    }
    let big_f = f.eckart_parameter();
    let d = f.f1.dot(&f.f2);
    let m = Matrix3::new(c + n1 * n1, d, 0.0, d, c + n2 * n2, 0.0, 0.0, 0.0, c);
    Ok(m / (big_f * c))
}

/// Closed-form `(C13, C23, C33)`; every `C_{gamma 1}` and `C_{gamma 2}` vanishes.
pub fn coriolis_c(ic: &InternalCoordsEckart, i1: f64, i2: f64) -> Result<[f64; 3]> {
    coriolis_c_impl(ic, i1, i2, false)
}

/// `flip_c13` reverses the sign of `C13`; used only to prove the
/// invariant battery catches a wrong formula.
pub(crate) fn coriolis_c_impl(ic: &InternalCoordsEckart, i1: f64, i2: f64, flip_c13: bool) -> Result<[f64; 3]> {
    check_lengths(ic)?;
    let s = check_sine(ic)?;
    let f_sq = ic.big_f_sq();
    let (f1, f2, tau) = (ic.f1, ic.f2, ic.tau);
    let mut c13 = -i2 * f2 * tau / f_sq;
    if flip_c13 {
        c13 = -c13;
    }
    let c23 = i1 * f1 * tau / f_sq;
    let c33 = -(s / f_sq) * (i2 - i1 + s * (i2 * f2 / f1 - i1 * f1 / f2));
    Ok([c13, c23, c33])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoriolisCoefficients {
    pub c13: f64,
    pub c23: f64,
    pub c33: f64,
    pub b3: f64,
}

impl CoriolisCoefficients {
    pub fn evaluate(ic: &InternalCoordsEckart, i1: f64, i2: f64) -> Result<Self> {
        let [c13, c23, c33] = coriolis_c(ic, i1, i2)?;
        Ok(Self { c13, c23, c33, b3: coriolis_b3(ic, i1, i2)? })
    }

    /// Regrouped as multipliers of `i L3 d/dxi` and `i L3`.
    pub fn to_operator(&self) -> CoriolisOperator {
        CoriolisOperator { d_f1: self.c13, d_f2: self.c23, d_tau: self.c33, free: self.b3 }
    }

    pub fn max_abs(&self) -> f64 {
        self.c13.abs().max(self.c23.abs()).max(self.c33.abs()).max(self.b3.abs())
    }
}

/// `H_cor = i L3 (d_f1 d/df1 + d_f2 d/df2 + d_tau d/dtau + free)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoriolisOperator {
    pub d_f1: f64,
    pub d_f2: f64,
    pub d_tau: f64,
    pub free: f64,
}

impl CoriolisOperator {
    pub fn max_abs(&self) -> f64 {
        self.d_f1.abs().max(self.d_f2.abs()).max(self.d_tau.abs()).max(self.free.abs())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.d_f1 - other.d_f1)
            .abs()
            .max((self.d_f2 - other.d_f2).abs())
            .max((self.d_tau - other.d_tau).abs())
            .max((self.free - other.free).abs())
    }
}

/// Coriolis multipliers grouped as
/// `-i L3/F^2 (cos(phi)(I2 f2 d1 - I1 f1 d2) + (I2 - I1 + sin(phi)[I2 f2/f1 - I1 f1/f2]) sin(phi) d_tau + (I1 - I2) cot(phi))`,
/// or its equal-moment specialization when `I1 = I2`.
pub fn coriolis_operator_coefficients(ic: &InternalCoordsEckart, i1: f64, i2: f64) -> Result<CoriolisOperator> {
    check_lengths(ic)?;
    let s = check_sine(ic)?;
    let c = ic.tau;
    let f_sq = ic.big_f_sq();
    let (f1, f2) = (ic.f1, ic.f2);
    if degeneracy_check(i1, i2, DEFAULT_EPS_DEG) {
        let i = 0.5 * (i1 + i2);
        return Ok(CoriolisOperator {
            d_f1: -i * c * f2 / f_sq,
            d_f2: i * c * f1 / f_sq,
            d_tau: -i * (f2 / f1 - f1 / f2) * s * s / f_sq,
            free: 0.0,
        });
    }
    Ok(CoriolisOperator {
        d_f1: -c * i2 * f2 / f_sq,
        d_f2: c * i1 * f1 / f_sq,
        d_tau: -(i2 - i1 + s * (i2 * f2 / f1 - i1 * f1 / f2)) * s / f_sq,
        free: -(i1 - i2) * (c / s) / f_sq,
    })
}

/// Fourth-order finite-difference evaluation of the full `C_{gamma k}` matrix (rows
/// `gamma = f1, f2, tau`, columns `k = 1, 2, 3`) from its defining
/// expression `-sum_q U^-1_{kq} sum_a (e_q . [rho_a x grad_a]) xi_gamma`.
pub fn coriolis_c_numeric(j: &JacobiPair, eq: &EquilibriumGeometry) -> Result<Matrix3<f64>> {
    let f = eckart_vectors(j, eq)?;
    let frame = build_frame(&f)?;
    let uinv = u_inverse(&f)?;
    let rho = frame.embedded_equilibrium(eq);
    let axes = frame.axes();

    let scale = (j.r1.norm_squared() + j.r2.norm_squared()).sqrt();
    let h = 5e-5 * scale;
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::OracleFailure(format!("finite-difference step {h:e} underflowed")));
    }
    let xi = |r1: Vec3, r2: Vec3| -> Result<[f64; 3]> {
        let ic = InternalCoordsEckart::from_vectors(&eckart_vectors(&JacobiPair::scaled(r1, r2), eq)?);
        Ok([ic.f1, ic.f2, ic.tau])
    };

    // grads[a][gamma] = gradient of xi_gamma with respect to r_a
    let mut grads = [[Vec3::zeros(); 3]; 2];
    for a in 0..2 {
        for comp in 0..3 {
            let mut d = Vec3::zeros();
            d[comp] = h;
            let at = |t: f64| if a == 0 { xi(j.r1 + d * t, j.r2) } else { xi(j.r1, j.r2 + d * t) };
            let (p2, p1, m1, m2) = (at(2.0)?, at(1.0)?, at(-1.0)?, at(-2.0)?);
            for g in 0..3 {
                grads[a][g][comp] = (-p2[g] + 8.0 * p1[g] - 8.0 * m1[g] + m2[g]) / (12.0 * h);
            }
        }
    }

    // s[(q, gamma)] = sum_a e_q . (rho_a x grad_a xi_gamma)
    let mut s = Matrix3::zeros();
    for q in 0..3 {
        for g in 0..3 {
            s[(q, g)] = (0..2).map(|a| axes[q].dot(&rho[a].cross(&grads[a][g]))).sum();
        }
    }
    Ok(-(uinv * s).transpose())
}

/// Non-zero components of the symmetric effective inverse inertia tensor;
/// `I13 = I23 = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseInertiaTensor {
    pub i11: f64,
    pub i22: f64,
    pub i12: f64,
    pub i33: f64,
}

impl InverseInertiaTensor {
    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::new(self.i11, self.i12, 0.0, self.i12, self.i22, 0.0, 0.0, 0.0, self.i33)
    }

    pub fn in_plane_block_positive_definite(&self) -> bool {
        self.i11 > 0.0 && self.i11 * self.i22 - self.i12 * self.i12 > 0.0
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.i11 - other.i11)
            .abs()
            .max((self.i22 - other.i22).abs())
            .max((self.i12 - other.i12).abs())
            .max((self.i33 - other.i33).abs())
    }

    pub fn max_abs(&self) -> f64 {
        self.i11.abs().max(self.i22.abs()).max(self.i12.abs()).max(self.i33.abs())
    }
}

/// Effective inverse inertia tensor for arbitrary equilibrium moments.
pub fn rotational_tensor(ic: &InternalCoordsEckart, i1: f64, i2: f64) -> Result<InverseInertiaTensor> {
    check_lengths(ic)?;
    let s = check_sine(ic)?;
    let c = ic.tau;
    let f_sq = ic.big_f_sq();
    let (f1, f2) = (ic.f1, ic.f2);
    let cot_sq = (c / s).powi(2);
    Ok(InverseInertiaTensor {
        i11: i1 / f_sq * (1.0 + f1 / (f2 * s)).powi(2) + i2 * cot_sq / f_sq,
        i22: i2 / f_sq * (1.0 + f2 / (f1 * s)).powi(2) + i1 * cot_sq / f_sq,
        i12: c / (f_sq * s * s) * ((i1 + i2) * s + i1 * f1 / f2 + i2 * f2 / f1),
        i33: (i1 + i2) / f_sq,
    })
}

/// The same tensor when both equilibrium moments equal `i`.
pub fn rotational_tensor_equal_moments(ic: &InternalCoordsEckart, i: f64) -> Result<InverseInertiaTensor> {
    check_lengths(ic)?;
    let s = check_sine(ic)?;
    let (f1, f2) = (ic.f1, ic.f2);
    Ok(InverseInertiaTensor {
        i11: i / (f2 * s).powi(2),
        i22: i / (f1 * s).powi(2),
        i12: i * ic.tau / (f1 * f2 * s * s),
        i33: 2.0 * i / ic.big_f_sq(),
    })
}

/// Planar rigid rotor: `diag(1/I1, 1/I2, 1/(I1 + I2))`.
pub fn rigid_rotational_tensor(i1: f64, i2: f64) -> Result<InverseInertiaTensor> {
    if !(i1 > 0.0 && i2 > 0.0) {
        return Err(Error::InvalidInput(format!("moments must be positive, got ({i1}, {i2})")));
    }
    Ok(InverseInertiaTensor { i11: 1.0 / i1, i22: 1.0 / i2, i12: 0.0, i33: 1.0 / (i1 + i2) })
}

/// The `L1 L2` coefficient of `H_rot` obtained two ways for equal moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossTermDiagnostic {
    /// From `(1/2) sum_ij I_ij L_i L_j` with a symmetric tensor: `I12`.
    pub from_tensor: f64,
    /// From the compact equal-moment display
    /// `I/(2 sin^2 phi) (... + cos(phi)/(f1 f2) L1 L2)`.
    pub compact_display: f64,
}

impl CrossTermDiagnostic {
    pub fn ratio(&self) -> f64 {
        self.from_tensor / self.compact_display
    }
}

pub fn rotational_cross_term_diagnostic(ic: &InternalCoordsEckart, i: f64) -> Result<CrossTermDiagnostic> {
    let t = rotational_tensor_equal_moments(ic, i)?;
    let s = ic.sin_phi();
    Ok(CrossTermDiagnostic { from_tensor: t.i12, compact_display: i / (2.0 * s * s) * ic.tau / (ic.f1 * ic.f2) })
}

/// Coriolis and rotational coefficients in mass-scaled Jacobi-bond
/// variables for the equal-moment family. `coriolis.d_f1`, `d_f2` and
/// `d_tau` multiply `d/dr1`, `d/dr2` and `d/dcos(theta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiCombinedCoefficients {
    /// `r1^2 + r2^2 + 2 r1 r2 sin(theta)`.
    pub big_f: f64,
    pub coriolis: CoriolisOperator,
    pub tensor: InverseInertiaTensor,
}

impl JacobiCombinedCoefficients {
    /// Coefficient of `L3^2` in `H_rot`.
    pub fn l3_squared(&self) -> f64 {
        0.5 * self.tensor.i33
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.coriolis.max_abs_diff(&other.coriolis).max(self.tensor.max_abs_diff(&other.tensor))
    }
}

pub fn combined_jacobi_coefficients(ic: &InternalCoordsJacobi) -> Result<JacobiCombinedCoefficients> {
    let (r1, r2, c) = (ic.r1, ic.r2, ic.cos_theta);
    if r1 == 0.0 {
        return Err(Error::SingularCoordinate { coordinate: "r1", value: r1 });
    }
    if r2 == 0.0 {
        return Err(Error::SingularCoordinate { coordinate: "r2", value: r2 });
    }
    let s = ic.sin_theta();
    if s <= SIN_SINGULAR {
        return Err(Error::SingularCoordinate { coordinate: "sin_theta", value: s });
    }
    let big_f = r1 * r1 + r2 * r2 + 2.0 * r1 * r2 * s;
    Ok(JacobiCombinedCoefficients {
        big_f,
        coriolis: CoriolisOperator {
            d_f1: -c * r2 / big_f,
            d_f2: c * r1 / big_f,
            d_tau: -(r2 / r1 - r1 / r2) * s * s / big_f,
            free: 0.0,
        },
        tensor: InverseInertiaTensor {
            i11: 1.0 / (r2 * s).powi(2),
            i22: 1.0 / (r1 * s).powi(2),
            i12: c / (r1 * r2 * s * s),
            i33: 2.0 / big_f,
        },
    })
}

/// The Jacobi-variable coefficients obtained through the Eckart pipeline
/// with `f = rho r` and `I1 = I2 = rho^2`.
pub fn combined_via_eckart(ic: &InternalCoordsJacobi, rho: f64) -> Result<JacobiCombinedCoefficients> {
    let e = crate::internal::equal_moment_coords(ic, rho);
    let i = rho * rho;
    let op = coriolis_operator_coefficients(&e, i, i)?;
    let tensor = rotational_tensor(&e, i, i)?;
    Ok(JacobiCombinedCoefficients {
        big_f: e.big_f_sq() / i,
        // d/df = (1/rho) d/dr
        coriolis: CoriolisOperator { d_f1: op.d_f1 / rho, d_f2: op.d_f2 / rho, d_tau: op.d_tau, free: op.free },
        tensor,
    })
}

/// Every coefficient field at one Jacobi-bond point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientRow {
    pub jacobi: InternalCoordsJacobi,
    pub eckart: InternalCoordsEckart,
    pub big_f: f64,
    pub coriolis: CoriolisCoefficients,
    pub tensor: InverseInertiaTensor,
}

/// Collinear Jacobi input is singular even when rounding in the conversion
/// leaves `sin(phi)` slightly above [`SIN_SINGULAR`].
pub fn coefficient_row(ic: &InternalCoordsJacobi, eq: &EquilibriumGeometry) -> Result<CoefficientRow> {
    if ic.sin_theta() <= SIN_SINGULAR {
        return Err(Error::SingularCoordinate { coordinate: "sin_theta", value: ic.sin_theta() });
    }
    let e = eckart_internal(ic, eq)?;
    Ok(CoefficientRow {
        jacobi: *ic,
        eckart: e,
        big_f: e.big_f_sq().sqrt(),
        coriolis: CoriolisCoefficients::evaluate(&e, eq.i1, eq.i2)?,
        tensor: rotational_tensor(&e, eq.i1, eq.i2)?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScanPoint {
    Regular(CoefficientRow),
    Singular { jacobi: InternalCoordsJacobi, eckart: Option<InternalCoordsEckart>, error: Error },
}

/// Evaluates every point in parallel; the output order matches `points`.
pub fn scan(points: &[InternalCoordsJacobi], eq: &EquilibriumGeometry) -> Vec<ScanPoint> {
    points
        .par_iter()
        .map(|ic| match coefficient_row(ic, eq) {
            Ok(row) => ScanPoint::Regular(row),
            Err(error) => ScanPoint::Singular { jacobi: *ic, eckart: eckart_internal(ic, eq).ok(), error },
        })
        .collect()
}
