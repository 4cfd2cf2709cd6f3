//! Barotropic pressure laws and viscosity coefficients.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::paraproduct::ScalarMap;

/// `P(ρ) = coeff · ρ^γ / γ`, so `P'(1) = coeff`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PressureLaw {
    pub gamma: f64,
    pub coeff: f64,
}

impl Default for PressureLaw {
    fn default() -> Self {
        PressureLaw { gamma: 1.4, coeff: 1.0 }
    }
}

impl PressureLaw {
    pub fn new(gamma: f64, coeff: f64) -> Result<Self> {
        if !(gamma >= 1.0 && coeff > 0.0) {
            return Err(Error::Domain(format!("pressure law needs γ ≥ 1 and a positive coefficient, got {gamma}, {coeff}")));
        }
        Ok(PressureLaw { gamma, coeff })
    }

    pub fn pressure(&self, rho: f64) -> f64 {
        self.coeff * rho.powf(self.gamma) / self.gamma
    }

    pub fn dpressure(&self, rho: f64) -> f64 {
        self.coeff * rho.powf(self.gamma - 1.0)
    }

    /// Enthalpy-type potential with `G(0) = 0` and `G'(a) = P'(1+a)/(1+a)`.
    pub fn g(&self, a: f64) -> f64 {
        let e = self.gamma - 1.0;
        if e.abs() < 1e-12 {
            self.coeff * a.ln_1p()
        } else {
            self.coeff * ((e * a.ln_1p()).exp_m1()) / e
        }
    }

    /// Same law with the coefficient multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        PressureLaw { coeff: self.coeff * factor, ..*self }
    }
}

impl ScalarMap for PressureLaw {
    fn eval(&self, a: f64) -> f64 {
        self.g(a)
    }

    fn domain_ok(&self, a: f64) -> bool {
        1.0 + a > 0.0
    }
}

/// Shear and bulk coefficients of the Lamé operator `μΔ + (μ+λ)∇div`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Viscosity {
    pub mu: f64,
    pub lambda: f64,
}

impl Default for Viscosity {
    fn default() -> Self {
        Viscosity { mu: 1.0, lambda: 0.0 }
    }
}

impl Viscosity {
    pub fn check(&self) -> Result<()> {
        if !(self.mu > 0.0 && 2.0 * self.mu + self.lambda > 0.0) {
            return Err(Error::Ellipticity(format!("μ={}, λ={}", self.mu, self.lambda)));
        }
        Ok(())
    }

    /// Decay coefficient of the gradient part, `2μ + λ`.
    pub fn compressive(&self) -> f64 {
        2.0 * self.mu + self.lambda
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_and_potential() {
        for gamma in [1.0, 1.4, 2.0] {
            let law = PressureLaw::new(gamma, 1.0).unwrap();
            assert!((law.dpressure(1.0) - 1.0).abs() < 1e-12);
            assert_eq!(law.g(0.0), 0.0);
            for a in [-0.3, 0.05, 0.4] {
                let h = 1e-6;
                let dg = (law.g(a + h) - law.g(a - h)) / (2.0 * h);
                assert!((dg - law.dpressure(1.0 + a) / (1.0 + a)).abs() < 1e-8);
            }
        }
        assert!(PressureLaw::new(0.5, 1.0).is_err());
    }

    #[test]
    fn ellipticity() {
        assert!(Viscosity { mu: 1.0, lambda: -1.5 }.check().is_ok());
        assert!(matches!(Viscosity { mu: 1.0, lambda: -2.0 }.check(), Err(Error::Ellipticity(_))));
        assert!(Viscosity { mu: 0.0, lambda: 1.0 }.check().is_err());
    }
}
