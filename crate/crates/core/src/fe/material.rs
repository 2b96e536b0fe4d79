use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Linear elastic plane-stress material with Rayleigh damping coefficients.
///
/// All values are SI: Pa, kg/m³, m, 1/s and s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub youngs_modulus: f64,
    pub poisson_ratio: f64,
    pub density: f64,
    pub thickness: f64,
    /// Mass-proportional damping `a0` (1/s).
    pub rayleigh_a0: f64,
    /// Stiffness-proportional damping `a1` (s).
    pub rayleigh_a1: f64,
}

impl Material {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(Error::InvalidArgument(format!("{what} = {v}")));
        if !(self.youngs_modulus > 0.0) || !self.youngs_modulus.is_finite() {
            return bad("Young's modulus must be positive", self.youngs_modulus);
        }
        if !(0.0..0.5).contains(&self.poisson_ratio) {
            return bad("Poisson ratio must lie in [0, 0.5)", self.poisson_ratio);
        }
        if !(self.density > 0.0) || !self.density.is_finite() {
            return bad("density must be positive", self.density);
        }
        if !(self.thickness > 0.0) || !self.thickness.is_finite() {
            return bad("thickness must be positive", self.thickness);
        }
        if !(self.rayleigh_a0 >= 0.0) || !(self.rayleigh_a1 >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "Rayleigh coefficients must be non-negative, got a0 = {}, a1 = {}",
                self.rayleigh_a0, self.rayleigh_a1
            )));
        }
        Ok(())
    }

    /// Plane-stress constitutive matrix, Voigt order (xx, yy, xy).
    pub fn plane_stress_d(&self) -> [[f64; 3]; 3] {
        let e = self.youngs_modulus;
        let nu = self.poisson_ratio;
        let c = e / (1.0 - nu * nu);
        [
            [c, c * nu, 0.0],
            [c * nu, c, 0.0],
            [0.0, 0.0, c * (1.0 - nu) / 2.0],
        ]
    }
}
