//! Masses, Jacobi vectors and mass scaling.

use crate::error::{Error, Result};

pub type Vec3 = nalgebra::Vector3<f64>;

/// Builds a vector from an array, rejecting non-finite components.
pub fn vec3_checked(v: [f64; 3]) -> Result<Vec3> {
    if v.iter().all(|c| c.is_finite()) {
        Ok(Vec3::new(v[0], v[1], v[2]))
    } else {
        Err(Error::InvalidInput(format!("non-finite vector component in {v:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassTriple {
    m1: f64,
    m2: f64,
    m3: f64,
}

impl MassTriple {
    pub fn new(m1: f64, m2: f64, m3: f64) -> Result<Self> {
        for (name, m) in [("m1", m1), ("m2", m2), ("m3", m3)] {
            if !(m.is_finite() && m > 0.0) {
                return Err(Error::InvalidInput(format!("mass {name} = {m} must be positive and finite")));
            }
        }
        Ok(Self { m1, m2, m3 })
    }

    pub fn m1(&self) -> f64 {
        self.m1
    }

    pub fn m2(&self) -> f64 {
        self.m2
    }

    pub fn m3(&self) -> f64 {
        self.m3
    }

    pub fn reduced(&self) -> ReducedMasses {
        ReducedMasses::from_masses(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedMasses {
    pub mu1: f64,
    pub mu2: f64,
}

impl ReducedMasses {
    /// `1/mu1 = 1/m2 + 1/m3`, `1/mu2 = 1/m1 + 1/(m2 + m3)`.
    pub fn from_masses(m: &MassTriple) -> Self {
        let m23 = m.m2 + m.m3;
        Self { mu1: m.m2 * m.m3 / m23, mu2: m.m1 * m23 / (m.m1 + m23) }
    }
}

/// Validating shorthand for `MassTriple::new(..)?.reduced()`.
pub fn reduced_masses(m1: f64, m2: f64, m3: f64) -> Result<ReducedMasses> {
    Ok(MassTriple::new(m1, m2, m3)?.reduced())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scaling {
    Unscaled,
    MassScaled,
}

/// A pair of Jacobi vectors tagged with its scaling state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiPair {
    pub r1: Vec3,
    pub r2: Vec3,
    pub scaling: Scaling,
}

impl JacobiPair {
    pub fn new(r1: Vec3, r2: Vec3, scaling: Scaling) -> Self {
        Self { r1, r2, scaling }
    }

    pub fn scaled(r1: Vec3, r2: Vec3) -> Self {
        Self::new(r1, r2, Scaling::MassScaled)
    }

    pub fn unscaled(r1: Vec3, r2: Vec3) -> Self {
        Self::new(r1, r2, Scaling::Unscaled)
    }

    pub fn is_scaled(&self) -> bool {
        self.scaling == Scaling::MassScaled
    }

    /// Stores `sqrt(mu_i) * r_i`.
    pub fn mass_scale(&self, rm: &ReducedMasses) -> Result<Self> {
        if self.is_scaled() {
            return Err(Error::AlreadyScaled);
        }
        Ok(Self::scaled(self.r1 * rm.mu1.sqrt(), self.r2 * rm.mu2.sqrt()))
    }

    pub fn unscale(&self, rm: &ReducedMasses) -> Result<Self> {
        if !self.is_scaled() {
            return Err(Error::NotScaled);
        }
        Ok(Self::unscaled(self.r1 / rm.mu1.sqrt(), self.r2 / rm.mu2.sqrt()))
    }

    /// Applies the same rigid rotation to both vectors.
    pub fn rotated(&self, rot: &nalgebra::Rotation3<f64>) -> Self {
        Self::new(rot * self.r1, rot * self.r2, self.scaling)
    }
}

/// Unscaled Jacobi vectors from lab-frame positions.
///
/// `r1` points from particle 2 to particle 3, `r2` from particle 1 to the
/// centre of mass of the (2, 3) pair.
pub fn jacobi_from_lab(positions: &[Vec3; 3], m: &MassTriple) -> JacobiPair {
    let [p1, p2, p3] = positions;
    let cm23 = (p2 * m.m2 + p3 * m.m3) / (m.m2 + m.m3);
    JacobiPair::unscaled(p3 - p2, cm23 - p1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn reduced_masses_of_equal_masses() {
        let rm = reduced_masses(1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(rm.mu1, 0.5, epsilon = 1e-15);
        assert_relative_eq!(rm.mu2, 2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn reduced_masses_heavy_pair_limit() {
        let rm = reduced_masses(1.0, 1e12, 1e12).unwrap();
        assert_relative_eq!(rm.mu1, 5e11, max_relative = 1e-12);
        assert_relative_eq!(rm.mu2, 1.0, max_relative = 1e-11);
    }

    #[test]
    fn reduced_masses_one_two_three() {
        let rm = reduced_masses(1.0, 2.0, 3.0).unwrap();
        assert_relative_eq!(rm.mu1, 6.0 / 5.0, epsilon = 1e-15);
        assert_relative_eq!(rm.mu2, 5.0 / 6.0, epsilon = 1e-15);
    }

    #[test]
    fn nonpositive_mass_rejected() {
        assert!(matches!(reduced_masses(0.0, 1.0, 1.0), Err(Error::InvalidInput(_))));
        assert!(matches!(MassTriple::new(1.0, -2.0, 1.0), Err(Error::InvalidInput(_))));
        assert!(MassTriple::new(1.0, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn jacobi_of_coincident_points_is_zero() {
        let m = MassTriple::new(1.0, 2.0, 3.0).unwrap();
        let j = jacobi_from_lab(&[Vec3::zeros(); 3], &m);
        assert_eq!(j.r1, Vec3::zeros());
        assert_eq!(j.r2, Vec3::zeros());
        assert!(!j.is_scaled());
    }

    #[test]
    fn jacobi_right_triangle() {
        let m = MassTriple::new(1.0, 1.0, 1.0).unwrap();
        let pos = [Vec3::zeros(), Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0)];
        let j = jacobi_from_lab(&pos, &m);
        assert_relative_eq!(j.r1, Vec3::new(-1.0, 1.0, 0.0), epsilon = 1e-15);
        assert_relative_eq!(j.r2, Vec3::new(0.5, 0.5, 0.0), epsilon = 1e-15);
    }

    #[test]
    fn identity_scaling() {
        let rm = ReducedMasses { mu1: 1.0, mu2: 1.0 };
        let j = JacobiPair::unscaled(Vec3::new(1.0, 2.0, 3.0), Vec3::new(-1.0, 0.5, 2.0));
        let s = j.mass_scale(&rm).unwrap();
        assert_eq!(s.r1, j.r1);
        assert_eq!(s.r2, j.r2);
    }

    #[test]
    fn scaling_arithmetic() {
        let rm = ReducedMasses { mu1: 0.25, mu2: 4.0 };
        let j = JacobiPair::unscaled(Vec3::new(2.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0));
        let s = j.mass_scale(&rm).unwrap();
        assert_relative_eq!(s.r1, Vec3::new(1.0, 0.0, 0.0), epsilon = 1e-15);
        assert_relative_eq!(s.r2, Vec3::new(2.0, 0.0, 0.0), epsilon = 1e-15);
    }

    #[test]
    fn double_scaling_is_a_state_error() {
        let rm = ReducedMasses { mu1: 0.5, mu2: 2.0 };
        let s = JacobiPair::scaled(Vec3::x(), Vec3::y());
        assert_eq!(s.mass_scale(&rm), Err(Error::AlreadyScaled));
        assert_eq!(JacobiPair::unscaled(Vec3::x(), Vec3::y()).unscale(&rm), Err(Error::NotScaled));
    }

    fn arb_vec() -> impl Strategy<Value = Vec3> {
        (-10.0..10.0f64, -10.0..10.0f64, -10.0..10.0f64).prop_map(|(x, y, z)| Vec3::new(x, y, z))
    }

    proptest! {
        #[test]
        fn translation_invariance(p1 in arb_vec(), p2 in arb_vec(), p3 in arb_vec(), t in arb_vec(),
                                  m1 in 0.1..50.0f64, m2 in 0.1..50.0f64, m3 in 0.1..50.0f64) {
            let m = MassTriple::new(m1, m2, m3).unwrap();
            let a = jacobi_from_lab(&[p1, p2, p3], &m);
            let b = jacobi_from_lab(&[p1 + t, p2 + t, p3 + t], &m);
            prop_assert!((a.r1 - b.r1).norm() <= 1e-12 * (1.0 + t.norm()));
            prop_assert!((a.r2 - b.r2).norm() <= 1e-12 * (1.0 + t.norm()));
        }

        #[test]
        fn scale_round_trip(r1 in arb_vec(), r2 in arb_vec(),
                            m1 in 0.01..100.0f64, m2 in 0.01..100.0f64, m3 in 0.01..100.0f64) {
            let rm = reduced_masses(m1, m2, m3).unwrap();
            let j = JacobiPair::unscaled(r1, r2);
            let back = j.mass_scale(&rm).unwrap().unscale(&rm).unwrap();
            prop_assert!((back.r1 - r1).norm() <= 1e-14 * (1.0 + r1.norm()));
            prop_assert!((back.r2 - r2).norm() <= 1e-14 * (1.0 + r2.norm()));
            prop_assert_eq!(back.scaling, Scaling::Unscaled);
        }
    }

    /// `(1/mu1) d^2/dr1^2 + (1/mu2) d^2/dr2^2` in unscaled coordinates equals
    /// the plain Laplacian in scaled coordinates.
    #[test]
    fn kinetic_energy_consistency() {
        let rm = reduced_masses(1.0, 2.0, 3.5).unwrap();
        // smooth test function of the scaled coordinates with known Laplacian
        let g = |s1: &Vec3, s2: &Vec3| {
            (0.3 * s1.x - 0.2 * s2.y).sin() * (0.1 * s1.dot(s2)).exp() + s1.norm_squared() * s2.z
        };
        let unscaled_g = |r1: &Vec3, r2: &Vec3| g(&(r1 * rm.mu1.sqrt()), &(r2 * rm.mu2.sqrt()));
        let r1 = Vec3::new(0.4, -0.7, 1.1);
        let r2 = Vec3::new(-0.3, 0.9, 0.5);
        let lap = |f: &dyn Fn(&Vec3, &Vec3) -> f64, a: &Vec3, b: &Vec3, w1: f64, w2: f64, h: f64| {
            let c = f(a, b);
            let mut acc = 0.0;
            for k in 0..3 {
                let mut d = Vec3::zeros();
                d[k] = h;
                acc += w1 * (f(&(a + d), b) - 2.0 * c + f(&(a - d), b)) / (h * h);
                acc += w2 * (f(a, &(b + d)) - 2.0 * c + f(a, &(b - d))) / (h * h);
            }
            acc
        };
        let h = 1e-4;
        let lhs = lap(&unscaled_g, &r1, &r2, 1.0 / rm.mu1, 1.0 / rm.mu2, h);
        let s1 = r1 * rm.mu1.sqrt();
        let s2 = r2 * rm.mu2.sqrt();
        let rhs = lap(&g, &s1, &s2, 1.0, 1.0, h);
        assert_relative_eq!(lhs, rhs, max_relative = 1e-5);
    }
}
