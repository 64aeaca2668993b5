//! Model potentials `U(q1, q2, tau)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialKind {
    /// `[omega]`: `omega^2 (q1^2 + q2^2) / 2`.
    IsotropicHarmonic,
    /// `[k1, k2, a1, a2, k_tau, tau0]`:
    /// `k1 (q1-a1)^2/2 + k2 (q2-a2)^2/2 + k_tau (tau-tau0)^2/2`.
    DisplacedHarmonic,
    /// Flattened `(coef, p1, p2, p_tau)` quadruples:
    /// `sum coef q1^p1 q2^p2 tau^p_tau`.
    Custom,
}

fn unit() -> f64 {
    1.0
}

/// A potential evaluated at `(s q1, s q2, tau)` where `s` is
/// `coordinate_scale`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelPotential {
    pub kind: PotentialKind,
    pub parameters: Vec<f64>,
    #[serde(default = "unit")]
    pub coordinate_scale: f64,
}

impl ModelPotential {
    pub fn new(kind: PotentialKind, parameters: Vec<f64>) -> Result<Self> {
        let p = Self { kind, parameters, coordinate_scale: 1.0 };
        p.validate()?;
        Ok(p)
    }

    pub fn isotropic_harmonic(omega: f64) -> Self {
        Self { kind: PotentialKind::IsotropicHarmonic, parameters: vec![omega], coordinate_scale: 1.0 }
    }

    /// Same physical potential read in coordinates scaled by `1/factor`.
    pub fn rescaled(&self, factor: f64) -> Self {
        Self { coordinate_scale: self.coordinate_scale * factor, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.parameters.iter().all(|p| p.is_finite()) {
            return Err(Error::InvalidInput("potential parameters must be finite".into()));
        }
        if !(self.coordinate_scale.is_finite() && self.coordinate_scale > 0.0) {
            return Err(Error::InvalidInput(format!("coordinate_scale = {} must be positive", self.coordinate_scale)));
        }
        let n = self.parameters.len();
        match self.kind {
            PotentialKind::IsotropicHarmonic if n != 1 => {
                Err(Error::InvalidInput(format!("isotropic_harmonic takes 1 parameter, got {n}")))
            }
            PotentialKind::DisplacedHarmonic if n != 6 => {
                Err(Error::InvalidInput(format!("displaced_harmonic takes 6 parameters, got {n}")))
            }
            PotentialKind::Custom => {
                if n == 0 || !n.is_multiple_of(4) {
                    return Err(Error::InvalidInput(format!(
                        "custom takes (coef, p1, p2, p_tau) quadruples, got {n} numbers"
                    )));
                }
                for q in self.parameters.chunks(4) {
                    if q[1..].iter().any(|&p| p < 0.0 || p.fract() != 0.0 || p > 32.0) {
                        return Err(Error::InvalidInput(format!(
                            "custom exponents must be integers in 0..=32, got {:?}",
                            &q[1..]
                        )));
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn is_tau_independent(&self) -> bool {
        match self.kind {
            PotentialKind::IsotropicHarmonic => true,
            PotentialKind::DisplacedHarmonic => self.parameters[4] == 0.0,
            PotentialKind::Custom => self.parameters.chunks(4).all(|q| q[3] == 0.0 || q[0] == 0.0),
        }
    }

    pub fn eval(&self, q1: f64, q2: f64, tau: f64) -> f64 {
        let (x1, x2) = (q1 * self.coordinate_scale, q2 * self.coordinate_scale);
        let p = &self.parameters;
        match self.kind {
            PotentialKind::IsotropicHarmonic => 0.5 * p[0] * p[0] * (x1 * x1 + x2 * x2),
            PotentialKind::DisplacedHarmonic => {
                0.5 * p[0] * (x1 - p[2]).powi(2) + 0.5 * p[1] * (x2 - p[3]).powi(2) + 0.5 * p[4] * (tau - p[5]).powi(2)
            }
            PotentialKind::Custom => {
                p.chunks(4).map(|q| q[0] * x1.powi(q[1] as i32) * x2.powi(q[2] as i32) * tau.powi(q[3] as i32)).sum()
            }
        }
    }

    /// Evaluates and rejects non-finite samples.
    pub fn sample(&self, q1: f64, q2: f64, tau: f64) -> Result<f64> {
        let v = self.eval(q1, q2, tau);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::UnboundedPotential { q1, q2, tau })
        }
    }
}
