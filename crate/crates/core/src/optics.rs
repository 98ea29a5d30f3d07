//! Two-mode scattering matrices of the passive elements.
//!
//! Phase convention: the phase shifter applies `exp(-i phi)` to the upper arm
//! and leaves the lower arm untouched, so that
//! `S_MZI = S_BS S_phi S_BS` has entries
//!
//! ```text
//! s11 = (e^{-i phi} - 1) / 2     s12 = i (e^{-i phi} + 1) / 2
//! s21 = i (e^{-i phi} + 1) / 2   s22 = (1 - e^{-i phi}) / 2
//! ```

use std::ops::Mul;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_fraction, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// A 2x2 complex scattering matrix acting on `(a, b)` mode operators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scattering2 {
    pub s11: Complex64,
    pub s12: Complex64,
    pub s21: Complex64,
    pub s22: Complex64,
}

impl Scattering2 {
    pub const fn new(s11: Complex64, s12: Complex64, s21: Complex64, s22: Complex64) -> Self {
        Self { s11, s12, s21, s22 }
    }

    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Self::new(one, zero, zero, one)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::new(
            self.s11.conj(),
            self.s21.conj(),
            self.s12.conj(),
            self.s22.conj(),
        )
    }

    pub fn det(&self) -> Complex64 {
        self.s11 * self.s22 - self.s12 * self.s21
    }

    pub fn entries(&self) -> [Complex64; 4] {
        [self.s11, self.s12, self.s21, self.s22]
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.entries()
            .iter()
            .zip(other.entries())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |(S^dagger S - I)_{jk}|`.
    pub fn unitarity_defect(&self) -> f64 {
        (self.adjoint() * *self).max_abs_diff(&Self::identity())
    }

    /// Apply to a column vector `(a, b)`.
    pub fn apply(&self, a: Complex64, b: Complex64) -> (Complex64, Complex64) {
        (self.s11 * a + self.s12 * b, self.s21 * a + self.s22 * b)
    }
}

impl Mul for Scattering2 {
    type Output = Scattering2;

    fn mul(self, rhs: Scattering2) -> Scattering2 {
        Scattering2::new(
            self.s11 * rhs.s11 + self.s12 * rhs.s21,
            self.s11 * rhs.s12 + self.s12 * rhs.s22,
            self.s21 * rhs.s11 + self.s22 * rhs.s21,
            self.s21 * rhs.s12 + self.s22 * rhs.s22,
        )
    }
}

/// Balanced beam splitter `(1/sqrt 2) [[1, i], [i, 1]]`.
pub fn beam_splitter_matrix() -> Scattering2 {
    let t = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let r = Complex64::new(0.0, std::f64::consts::FRAC_1_SQRT_2);
    Scattering2::new(t, r, r, t)
}

/// `diag(exp(-i phi), 1)`.
pub fn phase_matrix(phi: f64) -> Scattering2 {
    let zero = Complex64::new(0.0, 0.0);
    Scattering2::new(
        Complex64::from_polar(1.0, -phi),
        zero,
        zero,
        Complex64::new(1.0, 0.0),
    )
}

/// Conventional interferometer as the product `S_BS S_phi S_BS`.
pub fn compose_mzi(phi: f64) -> Scattering2 {
    let bs = beam_splitter_matrix();
    bs * phase_matrix(phi) * bs
}

/// Entries of the conventional interferometer evaluated from their closed forms.
pub fn mzi_closed_form(phi: f64) -> Scattering2 {
    let e = Complex64::from_polar(1.0, -phi);
    let one = Complex64::new(1.0, 0.0);
    Scattering2::new(
        0.5 * (e - one),
        0.5 * I * (e + one),
        0.5 * I * (e + one),
        0.5 * (one - e),
    )
}

/// Fictitious beam splitter modelling loss `L`: `b' = sqrt(1-L) b + sqrt(L) v`.
///
/// Returns the rescaled signal coefficient and the (real) coefficient of the
/// injected vacuum mode.
pub fn loss_transform(amplitude_coef: Complex64, loss: f64) -> Result<(Complex64, f64)> {
    let loss = check_fraction("loss", loss)?;
    Ok(((1.0 - loss).sqrt() * amplitude_coef, loss.sqrt()))
}
