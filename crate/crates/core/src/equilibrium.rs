//! Equilibrium principal moments and principal-axis coordinates.

use crate::error::{Error, Result};
use crate::geometry::{JacobiPair, Vec3};

/// Relative gap `|I1 - I2| / (I1 + I2)` below which the equilibrium is
/// treated as having equal moments.
pub const DEFAULT_EPS_DEG: f64 = 1e-9;

/// Equilibrium configuration in mass-scaled Jacobi vectors, decomposed on
/// its principal axes.
///
/// `rho_k = x_k e1 + y_k e2` with `x1 y1 + x2 y2 = 0`, `I1 = y1^2 + y2^2`
/// and `I2 = x1^2 + x2^2`, labelled so that `I1 >= I2`. Signs are fixed by
/// `x1 >= 0` (or `x2 >= 0` when `x1 = 0`) and `y2 >= 0` (or `y1 >= 0` when
/// `y2 = 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumGeometry {
    pub rho1: Vec3,
    pub rho2: Vec3,
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
    pub i1: f64,
    pub i2: f64,
    pub theta_e: f64,
    pub degenerate: bool,
    /// Principal axes `e1`, `e2` expressed in the frame of `rho1`, `rho2`.
    pub axes: [Vec3; 2],
}

/// Principal moments of the planar pair, larger first.
pub fn principal_moments(rho1: &Vec3, rho2: &Vec3) -> Result<(f64, f64)> {
    let a = rho1.norm_squared();
    let b = rho2.norm_squared();
    if a + b == 0.0 {
        return Err(Error::DegenerateGeometry("both equilibrium vectors are zero".into()));
    }
    let dot = rho1.dot(rho2);
    let half_trace = 0.5 * (a + b);
    let radical = 0.5 * ((a - b).powi(2) + 4.0 * dot * dot).sqrt();
    // the smaller root cancels; recover it from the determinant instead
    let i1 = half_trace + radical;
    let det = rho1.cross(rho2).norm_squared();
    let i2 = if i1 > 0.0 { det / i1 } else { 0.0 };
    Ok((i1, i2))
}

pub fn degeneracy_check(i1: f64, i2: f64, eps_deg: f64) -> bool {
    (i1 - i2).abs() <= eps_deg * (i1 + i2)
}

fn any_perpendicular(u: &Vec3) -> Vec3 {
    let (ax, ay, az) = (u.x.abs(), u.y.abs(), u.z.abs());
    let helper = if ax <= ay && ax <= az {
        Vec3::x()
    } else if ay <= az {
        Vec3::y()
    } else {
        Vec3::z()
    };
    u.cross(&helper).normalize()
}

impl EquilibriumGeometry {
    /// Principal-axis decomposition with the default degeneracy threshold.
    pub fn from_scaled(rho1: Vec3, rho2: Vec3) -> Result<Self> {
        Self::with_eps(rho1, rho2, DEFAULT_EPS_DEG)
    }

    pub fn from_pair(pair: &JacobiPair) -> Result<Self> {
        if !pair.is_scaled() {
            return Err(Error::NotScaled);
        }
        Self::from_scaled(pair.r1, pair.r2)
    }

    pub fn with_eps(rho1: Vec3, rho2: Vec3, eps_deg: f64) -> Result<Self> {
        let n1 = rho1.norm();
        let n2 = rho2.norm();
        if n1 + n2 == 0.0 {
            return Err(Error::DegenerateGeometry("both equilibrium vectors are zero".into()));
        }
        let (i1_eig, i2_eig) = principal_moments(&rho1, &rho2)?;
        let degenerate = degeneracy_check(i1_eig, i2_eig, eps_deg);

        // orthonormal basis (u, v) of the equilibrium plane
        let u = if n1 > 0.0 { rho1 / n1 } else { rho2 / n2 };
        let w = rho2 - u * rho2.dot(&u);
        let v = if w.norm() > 1e-14 * (n1 + n2) { w.normalize() } else { any_perpendicular(&u) };

        let (mut e1, mut e2) = if degenerate {
            // any in-plane pair is principal; align e1 with rho1 so that f_k = rho r_k
            (u, v)
        } else {
            let (a1, b1) = (rho1.dot(&u), rho1.dot(&v));
            let (a2, b2) = (rho2.dot(&u), rho2.dot(&v));
            let m00 = a1 * a1 + a2 * a2;
            let m11 = b1 * b1 + b2 * b2;
            let m01 = a1 * b1 + a2 * b2;
            // direction of the largest second moment
            let angle = 0.5 * (2.0 * m01).atan2(m00 - m11);
            let (s, c) = angle.sin_cos();
            (-u * s + v * c, u * c + v * s)
        };

        let (x1, x2) = (rho1.dot(&e1), rho2.dot(&e1));
        if x1 < 0.0 || (x1 == 0.0 && x2 < 0.0) {
            e1 = -e1;
        }
        let (y1, y2) = (rho1.dot(&e2), rho2.dot(&e2));
        if y2 < 0.0 || (y2 == 0.0 && y1 < 0.0) {
            e2 = -e2;
        }
        let (x1, x2) = (rho1.dot(&e1), rho2.dot(&e1));
        let (y1, y2) = (rho1.dot(&e2), rho2.dot(&e2));

        let i1 = y1 * y1 + y2 * y2;
        let i2 = x1 * x1 + x2 * x2;
        let theta_e = rho1.cross(&rho2).norm().atan2(rho1.dot(&rho2));

        Ok(Self { rho1, rho2, x1, y1, x2, y2, i1, i2, theta_e, degenerate, axes: [e1, e2] })
    }

    /// Equilibrium given in unscaled Jacobi vectors.
    pub fn from_unscaled(pair: &JacobiPair, rm: &crate::geometry::ReducedMasses) -> Result<Self> {
        Self::from_pair(&pair.mass_scale(rm)?)
    }

    /// `x1 y1 + x2 y2`, zero for a principal-axis decomposition.
    pub fn principal_axis_residual(&self) -> f64 {
        self.x1 * self.y1 + self.x2 * self.y2
    }

    pub fn rho1_sq(&self) -> f64 {
        self.rho1.norm_squared()
    }

    pub fn rho2_sq(&self) -> f64 {
        self.rho2.norm_squared()
    }

    pub fn rho_dot(&self) -> f64 {
        self.rho1.dot(&self.rho2)
    }

    pub fn rho_cross_norm(&self) -> f64 {
        self.rho1.cross(&self.rho2).norm()
    }

    pub fn is_collinear(&self) -> bool {
        self.i2 <= 1e-14 * (self.i1 + self.i2)
    }

    /// Common length `rho = rho1 = rho2` of an equal-moment equilibrium.
    pub fn equal_moment_rho(&self) -> f64 {
        (0.5 * (self.i1 + self.i2)).sqrt()
    }

    /// The equilibrium itself as a mass-scaled Jacobi pair.
    pub fn as_pair(&self) -> JacobiPair {
        JacobiPair::scaled(self.rho1, self.rho2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{reduced_masses, JacobiPair};
    use approx::assert_relative_eq;
    use nalgebra::{Matrix2, Rotation3, Unit};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Eigenvalues of the in-plane second-moment matrix, computed in the
    /// plane's own coordinates and sorted descending.
    fn moments_by_eigensolve(rho1: &Vec3, rho2: &Vec3) -> (f64, f64) {
        let n = rho1.cross(rho2).normalize();
        let u = rho1.normalize();
        let v = n.cross(&u);
        let p = [(rho1.dot(&u), rho1.dot(&v)), (rho2.dot(&u), rho2.dot(&v))];
        let m = Matrix2::new(
            p[0].0 * p[0].0 + p[1].0 * p[1].0,
            p[0].0 * p[0].1 + p[1].0 * p[1].1,
            p[0].0 * p[0].1 + p[1].0 * p[1].1,
            p[0].1 * p[0].1 + p[1].1 * p[1].1,
        );
        let ev = m.symmetric_eigenvalues();
        (ev.max(), ev.min())
    }

    fn random_vec(rng: &mut ChaCha8Rng) -> Vec3 {
        Vec3::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))
    }

    #[test]
    fn perpendicular_moments() {
        let (i1, i2) = principal_moments(&Vec3::new(1.0, 0.0, 0.0), &Vec3::new(0.0, 2.0, 0.0)).unwrap();
        assert_relative_eq!(i1, 4.0, epsilon = 1e-15);
        assert_relative_eq!(i2, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn collinear_moments() {
        let (i1, i2) = principal_moments(&Vec3::x(), &Vec3::x()).unwrap();
        assert_relative_eq!(i1, 2.0, epsilon = 1e-15);
        assert_eq!(i2, 0.0);
    }

    #[test]
    fn sixty_degree_moments_match_eigensolve() {
        let t = std::f64::consts::FRAC_PI_3;
        let rho1 = Vec3::x();
        let rho2 = Vec3::new(t.cos(), t.sin(), 0.0);
        let (i1, i2) = principal_moments(&rho1, &rho2).unwrap();
        let (a, b) = moments_by_eigensolve(&rho1, &rho2);
        assert_relative_eq!(i1, a, max_relative = 1e-12);
        assert_relative_eq!(i2, b, max_relative = 1e-12);
        // the 2x2 form here is [[1 + 1/4, sqrt3/4], [sqrt3/4, 3/4]]: roots 1 +- 1/2
        assert_relative_eq!(i1, 1.5, max_relative = 1e-12);
        assert_relative_eq!(i2, 0.5, max_relative = 1e-12);
    }

    #[test]
    fn zero_vectors_rejected() {
        assert!(matches!(principal_moments(&Vec3::zeros(), &Vec3::zeros()), Err(Error::DegenerateGeometry(_))));
        assert!(matches!(
            EquilibriumGeometry::from_scaled(Vec3::zeros(), Vec3::zeros()),
            Err(Error::DegenerateGeometry(_))
        ));
    }

    #[test]
    fn already_principal_coordinates() {
        let eq = EquilibriumGeometry::from_scaled(Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 2.0, 0.0)).unwrap();
        assert_relative_eq!(eq.x1, 1.0, epsilon = 1e-15);
        assert_relative_eq!(eq.y1, 0.0, epsilon = 1e-15);
        assert_relative_eq!(eq.x2, 0.0, epsilon = 1e-15);
        assert_relative_eq!(eq.y2, 2.0, epsilon = 1e-15);
        assert_relative_eq!(eq.i1, 4.0, epsilon = 1e-14);
        assert_relative_eq!(eq.i2, 1.0, epsilon = 1e-14);
        assert!(!eq.degenerate);
    }

    #[test]
    fn relabelled_axes() {
        let eq = EquilibriumGeometry::from_scaled(Vec3::new(0.0, 1.0, 0.0), Vec3::new(2.0, 0.0, 0.0)).unwrap();
        assert_relative_eq!(eq.x1, 1.0, epsilon = 1e-15);
        assert_relative_eq!(eq.y1, 0.0, epsilon = 1e-15);
        assert_relative_eq!(eq.x2, 0.0, epsilon = 1e-15);
        assert_relative_eq!(eq.y2, 2.0, epsilon = 1e-15);
        assert_relative_eq!(eq.i1, 4.0, epsilon = 1e-14);
        assert_relative_eq!(eq.i2, 1.0, epsilon = 1e-14);
        // e1 is the axis of the smaller moment
        assert_relative_eq!(eq.axes[0], Vec3::y(), epsilon = 1e-15);
    }

    #[test]
    fn degeneracy_examples() {
        assert!(!degeneracy_check(4.0, 1.0, DEFAULT_EPS_DEG));
        assert!(degeneracy_check(2.0, 2.0, DEFAULT_EPS_DEG));
    }

    #[test]
    fn equal_moment_condition_in_unscaled_variables() {
        // perpendicular unscaled Jacobi vectors with mu1 rho1^2 = mu2 rho2^2
        let rm = reduced_masses(1.0, 2.0, 3.0).unwrap();
        let rho1 = 1.3;
        let rho2 = rho1 * (rm.mu1 / rm.mu2).sqrt();
        let pair = JacobiPair::unscaled(Vec3::new(rho1, 0.0, 0.0), Vec3::new(0.0, 0.0, rho2));
        let eq = EquilibriumGeometry::from_unscaled(&pair, &rm).unwrap();
        assert!(eq.degenerate);
        assert_relative_eq!(eq.i1, eq.i2, max_relative = 1e-14);
        // in the degenerate case e1 points along rho1 and f_k = rho r_k
        assert_relative_eq!(eq.x1, eq.equal_moment_rho(), max_relative = 1e-14);
        assert_eq!(eq.y1, 0.0);
        assert!(eq.x2.abs() < 1e-15);
        // unequal weighted lengths break the degeneracy
        let pair = JacobiPair::unscaled(Vec3::new(rho1, 0.0, 0.0), Vec3::new(0.0, 0.0, 1.01 * rho2));
        assert!(!EquilibriumGeometry::from_unscaled(&pair, &rm).unwrap().degenerate);
    }

    #[test]
    fn random_pairs_satisfy_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let rho1 = random_vec(&mut rng);
            let rho2 = random_vec(&mut rng);
            let eq = EquilibriumGeometry::from_scaled(rho1, rho2).unwrap();
            let scale = eq.i1 + eq.i2;
            if eq.degenerate {
                continue;
            }
            assert!(eq.principal_axis_residual().abs() <= 1e-12 * scale);
            assert!(eq.i1 >= eq.i2);
            assert_relative_eq!(rho1.norm_squared() + rho2.norm_squared(), scale, max_relative = 1e-12);
            let (a, b) = principal_moments(&rho1, &rho2).unwrap();
            assert_relative_eq!(eq.i1, a, max_relative = 1e-12);
            assert!((eq.i2 - b).abs() <= 1e-12 * scale);
            let (ea, eb) = moments_by_eigensolve(&rho1, &rho2);
            assert_relative_eq!(a, ea, max_relative = 1e-12);
            assert!((b - eb).abs() <= 1e-12 * scale);
            // reconstruction from principal-axis components
            let [e1, e2] = eq.axes;
            assert!((e1 * eq.x1 + e2 * eq.y1 - rho1).norm() <= 1e-12 * scale.sqrt());
            assert!((e1 * eq.x2 + e2 * eq.y2 - rho2).norm() <= 1e-12 * scale.sqrt());
            // sign convention
            assert!(eq.x1 >= 0.0 && eq.y2 >= 0.0);
        }
    }

    #[test]
    fn rotation_invariance_of_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let rho1 = random_vec(&mut rng);
            let rho2 = random_vec(&mut rng);
            let axis = Unit::new_normalize(random_vec(&mut rng));
            let rot = Rotation3::from_axis_angle(&axis, rng.gen_range(0.0..6.3));
            let (a, b) = principal_moments(&rho1, &rho2).unwrap();
            let (c, d) = principal_moments(&(rot * rho1), &(rot * rho2)).unwrap();
            assert_relative_eq!(a, c, max_relative = 1e-12);
            assert!((b - d).abs() <= 1e-12 * (a + b));
        }
    }

    #[test]
    fn collinear_equilibrium_has_zero_minor_moment() {
        let eq = EquilibriumGeometry::from_scaled(Vec3::new(1.0, 1.0, 0.0), Vec3::new(-2.0, -2.0, 0.0)).unwrap();
        assert!(eq.is_collinear());
        assert_relative_eq!(eq.i1, 10.0, max_relative = 1e-14);
    }
}
