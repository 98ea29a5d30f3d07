use serde::{Deserialize, Serialize};

use crate::error::{check_finite, check_fraction, Error, Result};

/// Operating point of the recycled interferometer.
///
/// `phi` is the probed phase, `theta0` the phase picked up in the recycling
/// arm and `loss` the fraction of power lost there. The input is a coherent
/// state `alpha_mag * exp(i alpha_phase)`, so `alpha_mag^2` is the mean
/// number of input photons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopParameters {
    pub phi: f64,
    pub theta0: f64,
    pub loss: f64,
    pub alpha_mag: f64,
    pub alpha_phase: f64,
}

impl LoopParameters {
    /// Unit-amplitude, zero-phase coherent input.
    pub fn new(phi: f64, theta0: f64, loss: f64) -> Result<Self> {
        Self {
            phi,
            theta0,
            loss,
            alpha_mag: 1.0,
            alpha_phase: 0.0,
        }
        .validated()
    }

    pub fn with_alpha(mut self, alpha_mag: f64, alpha_phase: f64) -> Result<Self> {
        self.alpha_mag = alpha_mag;
        self.alpha_phase = alpha_phase;
        self.validated()
    }

    pub fn with_phi(mut self, phi: f64) -> Self {
        self.phi = phi;
        self
    }

    pub fn validated(self) -> Result<Self> {
        check_finite("phi", self.phi)?;
        check_finite("theta0", self.theta0)?;
        check_fraction("loss", self.loss)?;
        check_finite("alpha_phase", self.alpha_phase)?;
        if !(self.alpha_mag.is_finite() && self.alpha_mag >= 0.0) {
            return Err(Error::Domain {
                name: "alpha",
                value: self.alpha_mag,
                expected: "[0, inf)",
            });
        }
        Ok(self)
    }

    /// Transmission amplitude of the recycling arm, `sqrt(1 - L)`.
    pub fn transmission(&self) -> f64 {
        (1.0 - self.loss).sqrt()
    }
}
