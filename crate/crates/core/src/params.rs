use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

pub const DEFAULT_A: f64 = 0.5;
pub const DEFAULT_PHI: f64 = FRAC_PI_2;

/// The three effective Planck constants used for the published heatmaps.
pub const HBAR_PRESETS: [f64; 3] = [0.412, 0.137, 0.046];

/// Constants of the dissipative modified kicked rotator.
///
/// `k` is the per-kick increment of the integer momentum `n`, `tau` is the
/// kick period and doubles as the effective Planck constant. The friction
/// rate `nu`, coupling `g` and scaled kick `K = k * tau` are derived.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    k: f64,
    gamma: f64,
    a: f64,
    phi: f64,
    tau: f64,
    diffusion_d: f64,
}

impl ModelParams {
    pub fn new(k: f64, gamma: f64, tau: f64) -> Result<Self> {
        Self::with_all(k, gamma, DEFAULT_A, DEFAULT_PHI, tau, 0.0)
    }

    /// Parameters from the scaled kick `K = k * tau`, which is the quantity
    /// held fixed when comparing different effective Planck constants.
    pub fn from_scaled_kick(scaled_k: f64, gamma: f64, tau: f64) -> Result<Self> {
        if !(tau > 0.0) {
            return Err(Error::Config(format!("tau must be positive, got {tau}")));
        }
        Self::new(scaled_k / tau, gamma, tau)
    }

    pub fn with_all(k: f64, gamma: f64, a: f64, phi: f64, tau: f64, diffusion_d: f64) -> Result<Self> {
        if !k.is_finite() {
            return Err(Error::Config(format!("k must be finite, got {k}")));
        }
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::Config(format!("gamma must lie in [0, 1], got {gamma}")));
        }
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::Config(format!("tau must be positive, got {tau}")));
        }
        if !a.is_finite() || !phi.is_finite() {
            return Err(Error::Config(format!("a and phi must be finite, got {a}, {phi}")));
        }
        if !(diffusion_d >= 0.0) || !diffusion_d.is_finite() {
            return Err(Error::Config(format!(
                "thermal diffusion constant must be finite and nonnegative, got {diffusion_d}"
            )));
        }
        Ok(Self {
            k,
            gamma,
            a,
            phi,
            tau,
            diffusion_d,
        })
    }

    pub fn with_harmonic(self, a: f64, phi: f64) -> Result<Self> {
        Self::with_all(self.k, self.gamma, a, phi, self.tau, self.diffusion_d)
    }

    pub fn with_diffusion(self, diffusion_d: f64) -> Result<Self> {
        Self::with_all(self.k, self.gamma, self.a, self.phi, self.tau, diffusion_d)
    }

    pub fn with_gamma(self, gamma: f64) -> Result<Self> {
        Self::with_all(self.k, gamma, self.a, self.phi, self.tau, self.diffusion_d)
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn hbar_eff(&self) -> f64 {
        self.tau
    }

    pub fn diffusion_d(&self) -> f64 {
        self.diffusion_d
    }

    /// `nu = -ln(gamma) / 2`; infinite at `gamma = 0`.
    pub fn nu(&self) -> f64 {
        -0.5 * self.gamma.ln()
    }

    /// `g = sqrt(2 nu)`.
    pub fn g(&self) -> f64 {
        (2.0 * self.nu()).sqrt()
    }

    pub fn scaled_kick(&self) -> f64 {
        self.k * self.tau
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_constants() {
        for &gamma in &[1.0, 0.99, 0.56, 0.34, 0.1, 0.01] {
            let p = ModelParams::new(5.0, gamma, 0.137).unwrap();
            assert!(((-2.0 * p.nu()).exp() - gamma).abs() < 1e-12);
            assert!((p.g() * p.g() - 2.0 * p.nu()).abs() < 1e-12);
            assert!((p.scaled_kick() - 5.0 * 0.137).abs() < 1e-12);
        }
        assert_eq!(ModelParams::new(1.0, 1.0, 1.0).unwrap().nu(), 0.0);
        assert!(ModelParams::new(1.0, 0.0, 1.0).unwrap().nu().is_infinite());
    }

    #[test]
    fn scaled_kick_round_trip() {
        let p = ModelParams::from_scaled_kick(4.56, 0.56, 0.137).unwrap();
        assert!((p.scaled_kick() - 4.56).abs() < 1e-12);
    }

    #[test]
    fn rejects_invalid() {
        assert!(ModelParams::new(1.0, 1.2, 0.1).is_err());
        assert!(ModelParams::new(1.0, -0.1, 0.1).is_err());
        assert!(ModelParams::new(1.0, 0.5, 0.0).is_err());
        assert!(ModelParams::new(f64::NAN, 0.5, 0.1).is_err());
        assert!(ModelParams::new(1.0, 0.5, 0.1).unwrap().with_diffusion(-1.0).is_err());
    }
}
