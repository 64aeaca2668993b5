//! JSON run configuration.

use serde::{Deserialize, Serialize};

use crate::equilibrium::EquilibriumGeometry;
use crate::error::{Error, Result};
use crate::geometry::{jacobi_from_lab, vec3_checked, JacobiPair, MassTriple};
use crate::hamiltonian::H0Pairing;
use crate::spectral::{GridSpec, ModelPotential};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JacobiInput {
    pub r1: [f64; 3],
    pub r2: [f64; 3],
    /// When false the vectors are mass-scaled on load.
    pub mass_scaled: bool,
}

/// Either three lab-frame positions or a Jacobi pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum GeometryInput {
    Lab([[f64; 3]; 3]),
    Jacobi(JacobiInput),
}

impl GeometryInput {
    /// Mass-scaled Jacobi pair.
    pub fn scaled_pair(&self, masses: &MassTriple) -> Result<JacobiPair> {
        let rm = masses.reduced();
        match self {
            GeometryInput::Lab(p) => {
                let pos = [vec3_checked(p[0])?, vec3_checked(p[1])?, vec3_checked(p[2])?];
                jacobi_from_lab(&pos, masses).mass_scale(&rm)
            }
            GeometryInput::Jacobi(j) => {
                let (r1, r2) = (vec3_checked(j.r1)?, vec3_checked(j.r2)?);
                if j.mass_scaled {
                    Ok(JacobiPair::scaled(r1, r2))
                } else {
                    JacobiPair::unscaled(r1, r2).mass_scale(&rm)
                }
            }
        }
    }

    pub fn from_scaled(pair: &JacobiPair) -> Self {
        GeometryInput::Jacobi(JacobiInput { r1: pair.r1.into(), r2: pair.r2.into(), mass_scaled: true })
    }
}

/// `start:stop:n`, inclusive of both ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanRange {
    pub start: f64,
    pub stop: f64,
    pub n: usize,
}

impl ScanRange {
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::InvalidInput(format!("scan range {s:?} is not start:stop:n"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let r = Self {
            start: parts[0].trim().parse().map_err(|_| bad())?,
            stop: parts[1].trim().parse().map_err(|_| bad())?,
            n: parts[2].trim().parse().map_err(|_| bad())?,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn single(x: f64) -> Self {
        Self { start: x, stop: x, n: 1 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || !self.start.is_finite() || !self.stop.is_finite() {
            return Err(Error::InvalidInput(format!("scan range {self:?} needs finite ends and n >= 1")));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.n - 1) as f64;
        (0..self.n).map(|i| if i + 1 == self.n { self.stop } else { self.start + step * i as f64 }).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSettings {
    pub r1: ScanRange,
    pub r2: ScanRange,
    pub cos_theta: ScanRange,
}

fn default_k() -> usize {
    8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSettings {
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub pairing: H0Pairing,
    /// Runs the Jacobi/Eckart comparison at this `rho`.
    #[serde(default)]
    pub compare_rho: Option<f64>,
}

impl Default for SpectrumSettings {
    fn default() -> Self {
        Self { k: default_k(), pairing: H0Pairing::default(), compare_rho: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub masses: [f64; 3],
    pub equilibrium: GeometryInput,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub configuration: Option<GeometryInput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub units: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<ModelPotential>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanSettings>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumSettings>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        c.mass_triple()?;
        if let Some(g) = &c.grid {
            g.validate()?;
        }
        if let Some(p) = &c.potential {
            p.validate()?;
        }
        Ok(c)
    }

    pub fn mass_triple(&self) -> Result<MassTriple> {
        MassTriple::new(self.masses[0], self.masses[1], self.masses[2])
    }

    pub fn equilibrium_pair(&self) -> Result<JacobiPair> {
        self.equilibrium.scaled_pair(&self.mass_triple()?)
    }

    pub fn equilibrium_geometry(&self) -> Result<EquilibriumGeometry> {
        EquilibriumGeometry::from_pair(&self.equilibrium_pair()?)
    }

    pub fn configuration_pair(&self) -> Result<Option<JacobiPair>> {
        let m = self.mass_triple()?;
        self.configuration.as_ref().map(|c| c.scaled_pair(&m)).transpose()
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
