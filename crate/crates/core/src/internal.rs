//! Eckart internal variables `(f1, f2, tau = cos phi)` and their relation to
//! Jacobi-bond variables `(r1, r2, cos theta)`.

use crate::equilibrium::EquilibriumGeometry;
use crate::error::{Error, Result};
use crate::frame::EckartVectors;
use crate::geometry::JacobiPair;

/// Negative squared lengths within this fraction of the scale are rounding.
const NEGATIVE_SQUARE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InternalCoordsEckart {
    pub f1: f64,
    pub f2: f64,
    pub tau: f64,
}

impl InternalCoordsEckart {
    pub fn new(f1: f64, f2: f64, tau: f64) -> Result<Self> {
        if !(f1 >= 0.0 && f2 >= 0.0 && f1.is_finite() && f2.is_finite()) {
            return Err(Error::InvalidInput(format!("Eckart lengths must be nonnegative, got ({f1}, {f2})")));
        }
        if !(-1.0..=1.0).contains(&tau) {
            return Err(Error::InvalidInput(format!("tau = {tau} outside [-1, 1]")));
        }
        Ok(Self { f1, f2, tau })
    }

    /// `sin phi` with `phi` in `[0, pi]`.
    pub fn sin_phi(&self) -> f64 {
        (1.0 - self.tau * self.tau).max(0.0).sqrt()
    }

    pub fn big_f_sq(&self) -> f64 {
        self.f1 * self.f1 + self.f2 * self.f2 + 2.0 * self.f1 * self.f2 * self.sin_phi()
    }

    /// Set when either Eckart vector vanished and `tau` carries no information.
    pub fn has_zero_length(&self) -> bool {
        self.f1 == 0.0 || self.f2 == 0.0
    }

    pub fn from_vectors(f: &EckartVectors) -> Self {
        let f1 = f.f1.norm();
        let f2 = f.f2.norm();
        let tau = if f1 == 0.0 || f2 == 0.0 { 0.0 } else { clamp_cosine(f.f1.dot(&f.f2) / (f1 * f2)) };
        Self { f1, f2, tau }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InternalCoordsJacobi {
    pub r1: f64,
    pub r2: f64,
    pub cos_theta: f64,
}

impl InternalCoordsJacobi {
    pub fn new(r1: f64, r2: f64, cos_theta: f64) -> Result<Self> {
        if !(r1 >= 0.0 && r2 >= 0.0 && r1.is_finite() && r2.is_finite()) {
            return Err(Error::InvalidInput(format!("Jacobi lengths must be nonnegative, got ({r1}, {r2})")));
        }
        if !(-1.0..=1.0).contains(&cos_theta) {
            return Err(Error::InvalidInput(format!("cos_theta = {cos_theta} outside [-1, 1]")));
        }
        Ok(Self { r1, r2, cos_theta })
    }

    pub fn from_pair(j: &JacobiPair) -> Self {
        let r1 = j.r1.norm();
        let r2 = j.r2.norm();
        let cos_theta = if r1 == 0.0 || r2 == 0.0 { 0.0 } else { clamp_cosine(j.r1.dot(&j.r2) / (r1 * r2)) };
        Self { r1, r2, cos_theta }
    }

    pub fn sin_theta(&self) -> f64 {
        (1.0 - self.cos_theta * self.cos_theta).max(0.0).sqrt()
    }

    pub fn dot(&self) -> f64 {
        self.r1 * self.r2 * self.cos_theta
    }
}

fn clamp_cosine(c: f64) -> f64 {
    debug_assert!(c.abs() <= 1.0 + 1e-12, "cosine {c} far outside [-1, 1]");
    c.clamp(-1.0, 1.0)
}

/// `f1^2`, `f2^2` and `f1 . f2` expressed through Jacobi-bond variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EckartSquares {
    pub f1_sq: f64,
    pub f2_sq: f64,
    pub f1_dot_f2: f64,
}

impl EckartSquares {
    pub fn to_internal(&self) -> InternalCoordsEckart {
        let f1 = self.f1_sq.sqrt();
        let f2 = self.f2_sq.sqrt();
        let tau = if f1 == 0.0 || f2 == 0.0 { 0.0 } else { clamp_cosine(self.f1_dot_f2 / (f1 * f2)) };
        InternalCoordsEckart { f1, f2, tau }
    }
}

/// Eckart variables from Jacobi-bond variables for a non-degenerate
/// equilibrium, using only the equilibrium invariants `rho1^2`, `rho2^2`,
/// `rho1 . rho2` and `|rho1 x rho2|`.
pub fn eckart_from_jacobi(ic: &InternalCoordsJacobi, eq: &EquilibriumGeometry) -> Result<EckartSquares> {
    let (i1, i2) = (eq.i1, eq.i2);
    let gap = i1 - i2;
    if eq.degenerate || gap.abs() <= crate::equilibrium::DEFAULT_EPS_DEG * (i1 + i2) {
        return Err(Error::DegenerateBranch { relative_gap: gap.abs() / (i1 + i2) });
    }
    let (p1, p2, pd, pc) = (eq.rho1_sq(), eq.rho2_sq(), eq.rho_dot(), eq.rho_cross_norm());
    let r1s = ic.r1 * ic.r1;
    let r2s = ic.r2 * ic.r2;
    let rd = ic.dot();

    let f1_sq = i2 / gap * (r1s * (i1 - p1) + r2s * (i1 - p2) - 2.0 * rd * pd);
    let f2_sq = -i1 / gap * (r1s * (i2 - p1) + r2s * (i2 - p2) - 2.0 * rd * pd);
    let f1_dot_f2 = pc / gap * (pd * (r1s - r2s) - rd * (p1 - p2));

    let scale = (i1 + i2) * (r1s + r2s);
    Ok(EckartSquares {
        f1_sq: clamp_square("f1^2", f1_sq, scale)?,
        f2_sq: clamp_square("f2^2", f2_sq, scale)?,
        f1_dot_f2,
    })
}

fn clamp_square(quantity: &'static str, value: f64, scale: f64) -> Result<f64> {
    if value >= 0.0 {
        Ok(value)
    } else if value >= -NEGATIVE_SQUARE_TOLERANCE * scale {
        Ok(0.0)
    } else {
        Err(Error::NumericalInconsistency { quantity, value })
    }
}

/// `(f1, f2, tau) = (I2, I1, 0)` at the equilibrium configuration.
pub fn rigid_body_limit(eq: &EquilibriumGeometry) -> InternalCoordsEckart {
    InternalCoordsEckart { f1: eq.i2, f2: eq.i1, tau: 0.0 }
}

/// `(f1, f2, tau) = (rho r1, rho r2, cos theta)`.
pub fn equal_moment_coords(ic: &InternalCoordsJacobi, rho: f64) -> InternalCoordsEckart {
    InternalCoordsEckart { f1: rho * ic.r1, f2: rho * ic.r2, tau: ic.cos_theta }
}

/// Eckart variables for an equal-moment equilibrium, where `f_k = rho r_k`.
pub fn equal_moment_branch(ic: &InternalCoordsJacobi, eq: &EquilibriumGeometry) -> Result<InternalCoordsEckart> {
    let eps = crate::equilibrium::DEFAULT_EPS_DEG;
    if !eq.degenerate {
        return Err(Error::BranchMisuse(format!("I1 = {}, I2 = {}", eq.i1, eq.i2)));
    }
    let (a, b) = (eq.rho1.norm(), eq.rho2.norm());
    if (a - b).abs() > eps * (a + b) {
        return Err(Error::BranchMisuse(format!("rho1 = {a} and rho2 = {b} differ")));
    }
    Ok(equal_moment_coords(ic, 0.5 * (a + b)))
}

/// Eckart variables at a Jacobi-bond point, choosing the general or the
/// equal-moment conversion from the equilibrium.
pub fn eckart_internal(ic: &InternalCoordsJacobi, eq: &EquilibriumGeometry) -> Result<InternalCoordsEckart> {
    if eq.degenerate {
        equal_moment_branch(ic, eq)
    } else {
        Ok(eckart_from_jacobi(ic, eq)?.to_internal())
    }
}

/// `F = sqrt(f1^2 + f2^2 + 2 f1 f2 sqrt(1 - tau^2))`.
pub fn eckart_parameter(ic: &InternalCoordsEckart) -> f64 {
    ic.big_f_sq().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::eckart_vectors;
    use crate::geometry::Vec3;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn simple_eq() -> EquilibriumGeometry {
        EquilibriumGeometry::from_scaled(Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 2.0, 0.0)).unwrap()
    }

    fn random_vec(rng: &mut ChaCha8Rng, s: f64) -> Vec3 {
        Vec3::new(rng.gen_range(-s..s), rng.gen_range(-s..s), rng.gen_range(-s..s))
    }

    /// Direct evaluation through the Eckart vectors, built from explicit
    /// Jacobi vectors with the requested lengths and angle.
    fn direct(ic: &InternalCoordsJacobi, eq: &EquilibriumGeometry) -> EckartSquares {
        let r1 = Vec3::new(ic.r1, 0.0, 0.0);
        let r2 = Vec3::new(ic.r2 * ic.cos_theta, ic.r2 * ic.sin_theta(), 0.0);
        let f = eckart_vectors(&JacobiPair::scaled(r1, r2), eq).unwrap();
        EckartSquares { f1_sq: f.f1.norm_squared(), f2_sq: f.f2.norm_squared(), f1_dot_f2: f.f1.dot(&f.f2) }
    }

    #[test]
    fn from_vectors_examples() {
        let a = InternalCoordsEckart::from_vectors(&EckartVectors { f1: Vec3::x(), f2: Vec3::y() * 4.0 });
        assert_eq!((a.f1, a.f2, a.tau), (1.0, 4.0, 0.0));
        let v = Vec3::new(1.0, 1.0, 0.0);
        let b = InternalCoordsEckart::from_vectors(&EckartVectors { f1: v, f2: v });
        assert_relative_eq!(b.f1, 2f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(b.f2, 2f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(b.tau, 1.0, epsilon = 1e-15);
        let z = InternalCoordsEckart::from_vectors(&EckartVectors { f1: Vec3::zeros(), f2: v });
        assert!(z.has_zero_length());
        assert_eq!(z.tau, 0.0);
    }

    #[test]
    fn sine_from_tau_matches_cross_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..500 {
            let f = EckartVectors { f1: random_vec(&mut rng, 2.0), f2: random_vec(&mut rng, 2.0) };
            let ic = InternalCoordsEckart::from_vectors(&f);
            assert!((f.cross_norm() - ic.f1 * ic.f2 * ic.sin_phi()).abs() <= 1e-12 * ic.f1 * ic.f2);
            assert_relative_eq!(eckart_parameter(&ic), f.eckart_parameter(), max_relative = 1e-12);
        }
    }

    #[test]
    fn eckart_parameter_examples() {
        assert_relative_eq!(eckart_parameter(&InternalCoordsEckart::new(1.0, 4.0, 0.0).unwrap()), 5.0, epsilon = 1e-15);
        assert_relative_eq!(
            eckart_parameter(&InternalCoordsEckart::new(1.0, 1.0, 1.0).unwrap()),
            2f64.sqrt(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn conversion_at_equilibrium() {
        let eq = simple_eq();
        let s = eckart_from_jacobi(&InternalCoordsJacobi::new(1.0, 2.0, 0.0).unwrap(), &eq).unwrap();
        assert_relative_eq!(s.f1_sq, 1.0, epsilon = 1e-14);
        assert_relative_eq!(s.f2_sq, 16.0, epsilon = 1e-14);
        assert_eq!(s.f1_dot_f2, 0.0);
    }

    #[test]
    fn conversion_matches_vectors_near_equilibrium() {
        let eq = simple_eq();
        let ic = InternalCoordsJacobi::new(1.1, 2.0, 0.05).unwrap();
        let s = eckart_from_jacobi(&ic, &eq).unwrap();
        let d = direct(&ic, &eq);
        assert_relative_eq!(s.f1_sq, d.f1_sq, max_relative = 1e-12);
        assert_relative_eq!(s.f2_sq, d.f2_sq, max_relative = 1e-12);
        assert_relative_eq!(s.f1_dot_f2, d.f1_dot_f2, max_relative = 1e-12);
    }

    #[test]
    fn conversion_matches_vectors_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut checked = 0;
        while checked < 1000 {
            let eq = EquilibriumGeometry::from_scaled(random_vec(&mut rng, 2.0), random_vec(&mut rng, 2.0)).unwrap();
            if eq.degenerate || (eq.i1 - eq.i2) < 1e-3 * (eq.i1 + eq.i2) || eq.is_collinear() {
                continue;
            }
            let ic =
                InternalCoordsJacobi::new(rng.gen_range(0.1..3.0), rng.gen_range(0.1..3.0), rng.gen_range(-1.0..1.0))
                    .unwrap();
            let s = eckart_from_jacobi(&ic, &eq).unwrap();
            let d = direct(&ic, &eq);
            let scale = (eq.i1 + eq.i2) * (ic.r1 * ic.r1 + ic.r2 * ic.r2);
            assert!((s.f1_sq - d.f1_sq).abs() <= 1e-10 * scale);
            assert!((s.f2_sq - d.f2_sq).abs() <= 1e-10 * scale);
            assert!((s.f1_dot_f2 - d.f1_dot_f2).abs() <= 1e-10 * scale);
            checked += 1;
        }
    }

    #[test]
    fn degenerate_equilibrium_requires_branch() {
        let eq = EquilibriumGeometry::from_scaled(Vec3::x(), Vec3::y()).unwrap();
        let ic = InternalCoordsJacobi::new(1.0, 1.0, 0.0).unwrap();
        assert!(matches!(eckart_from_jacobi(&ic, &eq), Err(Error::DegenerateBranch { .. })));
        assert!(matches!(equal_moment_branch(&ic, &simple_eq()), Err(Error::BranchMisuse(_))));
    }

    #[test]
    fn rigid_body_limit_examples() {
        let eq = simple_eq();
        assert_eq!(rigid_body_limit(&eq), InternalCoordsEckart { f1: eq.i2, f2: eq.i1, tau: 0.0 });
        assert_relative_eq!(eq.i2, 1.0, epsilon = 1e-14);
        assert_relative_eq!(eq.i1, 4.0, epsilon = 1e-14);
        let deg = EquilibriumGeometry::from_scaled(Vec3::x() * 1.5, Vec3::z() * 1.5).unwrap();
        let r = rigid_body_limit(&deg);
        assert_relative_eq!(r.f1, 2.25, epsilon = 1e-14);
        assert_relative_eq!(r.f2, 2.25, epsilon = 1e-14);
    }

    #[test]
    fn rigid_body_limit_matches_vectors_at_equilibrium() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let eq = EquilibriumGeometry::from_scaled(random_vec(&mut rng, 2.0), random_vec(&mut rng, 2.0)).unwrap();
            let ic = InternalCoordsEckart::from_vectors(&eckart_vectors(&eq.as_pair(), &eq).unwrap());
            let r = rigid_body_limit(&eq);
            let s = eq.i1 + eq.i2;
            assert!((ic.f1 - r.f1).abs() <= 1e-12 * s);
            assert!((ic.f2 - r.f2).abs() <= 1e-12 * s);
            assert!(ic.tau.abs() <= 1e-12);
        }
    }

    #[test]
    fn rigid_body_limit_is_approached_linearly() {
        let eq = EquilibriumGeometry::from_scaled(Vec3::new(1.2, 0.1, 0.0), Vec3::new(-0.3, 0.9, 0.2)).unwrap();
        let d1 = Vec3::new(0.3, -0.2, 0.5);
        let d2 = Vec3::new(-0.1, 0.4, 0.2);
        let r = rigid_body_limit(&eq);
        let err = |t: f64| {
            let j = JacobiPair::scaled(eq.rho1 + d1 * t, eq.rho2 + d2 * t);
            let ic = InternalCoordsEckart::from_vectors(&eckart_vectors(&j, &eq).unwrap());
            (ic.f1 - r.f1).abs() + (ic.f2 - r.f2).abs() + ic.tau.abs()
        };
        let (a, b) = (err(1e-2), err(1e-3));
        assert!(a > 0.0);
        let ratio = a / b;
        assert!((8.0..12.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn equal_moment_branch_examples() {
        let eq = EquilibriumGeometry::from_scaled(Vec3::x(), Vec3::y()).unwrap();
        let a = equal_moment_branch(&InternalCoordsJacobi::new(1.0, 1.0, 0.0).unwrap(), &eq).unwrap();
        assert_relative_eq!(a.f1, 1.0, epsilon = 1e-15);
        assert_relative_eq!(a.f2, 1.0, epsilon = 1e-15);
        assert_eq!(a.tau, 0.0);
        assert_relative_eq!(a.big_f_sq(), 4.0, epsilon = 1e-14);

        let b = equal_moment_coords(&InternalCoordsJacobi::new(1.0, 3.0, 0.5).unwrap(), 2.0);
        assert_eq!((b.f1, b.f2, b.tau), (2.0, 6.0, 0.5));
        assert_relative_eq!(b.big_f_sq(), 4.0 * (10.0 + 3.0 * 3f64.sqrt()), max_relative = 1e-14);
    }

    #[test]
    fn equal_moment_branch_matches_vectors() {
        let eq = EquilibriumGeometry::from_scaled(Vec3::new(0.0, 1.3, 0.0), Vec3::new(0.0, 0.0, 1.3)).unwrap();
        assert!(eq.degenerate);
        let j = JacobiPair::scaled(Vec3::new(0.2, 1.1, 0.3), Vec3::new(0.1, -0.4, 1.4));
        let from_vec = InternalCoordsEckart::from_vectors(&eckart_vectors(&j, &eq).unwrap());
        let from_branch = equal_moment_branch(&InternalCoordsJacobi::from_pair(&j), &eq).unwrap();
        assert_relative_eq!(from_vec.f1, from_branch.f1, max_relative = 1e-14);
        assert_relative_eq!(from_vec.f2, from_branch.f2, max_relative = 1e-14);
        assert_relative_eq!(from_vec.tau, from_branch.tau, epsilon = 1e-14);
    }

    #[test]
    fn near_degenerate_general_branch_is_stable() {
        // |I1 - I2| / (I1 + I2) = 1e-6: general formulas still agree with the vectors
        let delta: f64 = 1e-6;
        let rho2 = ((1.0 - delta) / (1.0 + delta)).sqrt();
        let eq = EquilibriumGeometry::from_scaled(Vec3::x(), Vec3::y() * rho2).unwrap();
        assert!(!eq.degenerate);
        assert_relative_eq!((eq.i1 - eq.i2) / (eq.i1 + eq.i2), delta, max_relative = 1e-6);
        let ic = InternalCoordsJacobi::new(1.05, 0.97, 0.1).unwrap();
        let g = eckart_from_jacobi(&ic, &eq).unwrap().to_internal();
        let d = direct(&ic, &eq);
        assert_relative_eq!(g.f1, d.f1_sq.sqrt(), max_relative = 1e-4);
        assert_relative_eq!(g.f2, d.f2_sq.sqrt(), max_relative = 1e-4);
    }

    #[test]
    fn clamping_of_tiny_negative_squares() {
        assert_eq!(clamp_square("f1^2", -1e-14, 1.0), Ok(0.0));
        assert!(matches!(clamp_square("f1^2", -1e-6, 1.0), Err(Error::NumericalInconsistency { .. })));
    }
}
