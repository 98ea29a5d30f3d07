//! Figures of merit of the recycled interferometer.
//!
//! All three enhancement factors are ratios against the conventional
//! interferometer fed with the same coherent state:
//!
//! * `lambda1`: homodyne sensitivity on output `a` against the shot-noise
//!   limit `1/|alpha|`.
//! * `lambda2`: quantum Cramér-Rao bound against the conventional bound
//!   `1/|alpha|`.
//! * `lambda3`: mean photon number inside the interferometer against
//!   `|alpha|^2`.
//!
//! Each factor has two independent routes: a closed rational form in
//! `(phi, theta0, L)` and an assembly from the output coefficients. The
//! homodyne local oscillator is locked to the input phase, so none of the
//! factors depend on `alpha_phase`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::params::LoopParameters;
use crate::recycling::{check_pole, closed_form_coefficients};

/// Default central-difference step, in radians.
pub const DEFAULT_STEP: f64 = 1e-6;

/// Mean quadratures `(<x_a>, <p_a>)` and symmetrised covariance of output `a`,
/// with `x = a + a^dagger`, `p = i (a^dagger - a)` (vacuum variance 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianMoments {
    pub mean_x: f64,
    pub mean_p: f64,
    pub covariance: [[f64; 2]; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhotonNumbers {
    pub n_a_out: f64,
    pub n_b_out: f64,
    pub n_total_inside: f64,
}

/// Every figure of merit at one operating point.
///
/// Sensitivities are `+inf` where the corresponding factor vanishes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeritReport {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    #[serde(serialize_with = "serialize_sentinel")]
    pub dphi_hd: f64,
    #[serde(serialize_with = "serialize_sentinel")]
    pub dphi_qcrb: f64,
    pub n_a_out: f64,
    pub n_b_out: f64,
    pub n_total_inside: f64,
}

/// JSON has no infinity; write it as the string `"inf"`.
fn serialize_sentinel<S: Serializer>(value: &f64, serializer: S) -> std::result::Result<S::Ok, S::Error> {
    if value.is_finite() {
        serializer.serialize_f64(*value)
    } else if value.is_nan() {
        serializer.serialize_str("nan")
    } else if *value > 0.0 {
        serializer.serialize_str("inf")
    } else {
        serializer.serialize_str("-inf")
    }
}

/// Selects one of the enhancement factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Lambda1,
    Lambda2,
    Lambda3,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Lambda1, Metric::Lambda2, Metric::Lambda3];

    pub fn as_str(&self) -> &'static str {
        match self {
            Metric::Lambda1 => "lambda1",
            Metric::Lambda2 => "lambda2",
            Metric::Lambda3 => "lambda3",
        }
    }

    /// Closed-form value of the factor.
    pub fn evaluate(&self, params: &LoopParameters) -> Result<f64> {
        match self {
            Metric::Lambda1 => lambda1(params),
            Metric::Lambda2 => lambda2(params),
            Metric::Lambda3 => lambda3(params),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Metric::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown metric `{s}` (expected lambda1, lambda2 or lambda3)"))
    }
}

fn check_step(step: f64) -> Result<f64> {
    if step > 0.0 && step <= 1e-3 {
        Ok(step)
    } else {
        Err(Error::Domain {
            name: "step",
            value: step,
            expected: "(0, 1e-3]",
        })
    }
}

/// Output-`a` moments for the coherent input `alpha`.
pub fn homodyne_moments(params: &LoopParameters) -> Result<GaussianMoments> {
    let c = closed_form_coefficients(params)?;
    let alpha = Complex64::from_polar(params.alpha_mag, params.alpha_phase);
    let mean = c.upsilon * alpha;
    // coherent and vacuum inputs carry no phase-sensitive noise, so the
    // covariance is isotropic with the total weight of the output mode
    let variance = c.upsilon.norm_sqr() + c.vac_a.norm_sqr();
    Ok(GaussianMoments {
        mean_x: 2.0 * mean.re,
        mean_p: 2.0 * mean.im,
        covariance: [[variance, 0.0], [0.0, variance]],
    })
}

/// `d upsilon / d phi`, differentiating the rational form of `upsilon`.
pub fn upsilon_phase_derivative(params: &LoopParameters) -> Result<Complex64> {
    check_pole(params)?;
    let t = params.transmission();
    let i = Complex64::i();
    let ep = Complex64::from_polar(1.0, params.phi);
    let et = Complex64::from_polar(1.0, params.theta0);
    let num = et * (1.0 - ep) - 2.0 * t;
    let dnum = -i * et * ep;
    let den = 2.0 * ep * et + t - ep * t;
    let dden = 2.0 * i * ep * et - i * t * ep;
    Ok((dnum * den - num * dden) / (den * den))
}

/// Homodyne enhancement factor, closed rational form.
pub fn lambda1(params: &LoopParameters) -> Result<f64> {
    check_pole(params)?;
    let (l, t) = (params.loss, params.transmission());
    let (phi, th) = (params.phi, params.theta0);
    let bracket = (2.0 - l - 2.0 * t * th.cos()) * phi.sin() - t * (phi.cos() + 1.0) * th.sin();
    let num = (t * th.cos() - 1.0) * bracket;
    let base = -l - (1.0 - l) * phi.cos() - 2.0 * t * th.cos() + 2.0 * t * (phi + th).cos() + 3.0;
    Ok((4.0 * num / (base * base)).abs())
}

/// Homodyne enhancement factor from the analytic `d upsilon / d phi`.
pub fn lambda1_from_upsilon(params: &LoopParameters) -> Result<f64> {
    Ok(2.0 * upsilon_phase_derivative(params)?.re.abs())
}

/// Homodyne enhancement factor by linear error propagation,
/// `|d<x_a>/d phi| / (|alpha| <Delta x_a>)`, with a central difference.
///
/// Evaluated for a unit amplitude with the local oscillator locked to the
/// input phase; the ratio is independent of both.
pub fn lambda1_numeric(params: &LoopParameters, step: f64) -> Result<f64> {
    let step = check_step(step)?;
    let unit = LoopParameters {
        alpha_mag: 1.0,
        alpha_phase: 0.0,
        ..*params
    };
    let plus = homodyne_moments(&unit.with_phi(unit.phi + step))?;
    let minus = homodyne_moments(&unit.with_phi(unit.phi - step))?;
    let noise = homodyne_moments(&unit)?.covariance[0][0].sqrt();
    let slope = (plus.mean_x - minus.mean_x) / (2.0 * step);
    Ok(slope.abs() / noise)
}

/// `cos(theta0 + phi) - cos(theta0)`.
fn theta_term(params: &LoopParameters) -> f64 {
    (params.theta0 + params.phi).cos() - params.theta0.cos()
}

/// `2 sqrt(1-L) Theta - (1-L) cos(phi) - L + 3`, i.e. half of
/// `|2 e^{i(phi+theta0)} + sqrt(1-L) - sqrt(1-L) e^{i phi}|^2`.
fn loop_gain_denominator(params: &LoopParameters) -> f64 {
    let (l, t) = (params.loss, params.transmission());
    2.0 * t * theta_term(params) - (1.0 - l) * params.phi.cos() - l + 3.0
}

/// QCRB enhancement factor, closed rational form.
pub fn lambda2(params: &LoopParameters) -> Result<f64> {
    check_pole(params)?;
    let (l, t) = (params.loss, params.transmission());
    let num = 2.0 * (-2.0 * t * params.theta0.cos() - l + 2.0);
    Ok((num / loop_gain_denominator(params)).abs())
}

/// QCRB enhancement factor `2 |d upsilon / d phi|` from the analytic derivative.
pub fn lambda2_from_upsilon(params: &LoopParameters) -> Result<f64> {
    Ok(2.0 * upsilon_phase_derivative(params)?.norm())
}

/// `2 |d upsilon / d phi|` with `upsilon` differentiated by central differences.
pub fn lambda2_numeric(params: &LoopParameters, step: f64) -> Result<f64> {
    let step = check_step(step)?;
    let plus = closed_form_coefficients(&params.with_phi(params.phi + step))?.upsilon;
    let minus = closed_form_coefficients(&params.with_phi(params.phi - step))?.upsilon;
    Ok(((plus - minus) / (2.0 * step)).norm())
}

/// Pure-Gaussian quantum Cramér-Rao bound on `phi`, in radians:
///
/// ```text
/// dphi = ( X'^T G^-1 X' + tr[(G' G^-1)^2] / 4 )^(-1/2)
/// ```
///
/// with `X` the mean quadratures and `G` the covariance of output `a`, both
/// differentiated by central differences.
pub fn qcrb_general(params: &LoopParameters, step: f64) -> Result<f64> {
    let step = check_step(step)?;
    let at = homodyne_moments(params)?;
    let plus = homodyne_moments(&params.with_phi(params.phi + step))?;
    let minus = homodyne_moments(&params.with_phi(params.phi - step))?;

    let h2 = 2.0 * step;
    let dx = [(plus.mean_x - minus.mean_x) / h2, (plus.mean_p - minus.mean_p) / h2];
    let norm = dx[0].hypot(dx[1]);
    if norm.is_nan() || norm < 1e-12 {
        return Err(Error::ZeroInformation { norm });
    }

    let g = at.covariance;
    let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    let inv = [
        [g[1][1] / det, -g[0][1] / det],
        [-g[1][0] / det, g[0][0] / det],
    ];
    let mut dg = [[0.0; 2]; 2];
    for (r, row) in dg.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v = (plus.covariance[r][c] - minus.covariance[r][c]) / h2;
        }
    }

    let mut mean_term = 0.0;
    for r in 0..2 {
        for c in 0..2 {
            mean_term += dx[r] * inv[r][c] * dx[c];
        }
    }
    let m = mat_mul(&dg, &inv);
    let mm = mat_mul(&m, &m);
    let cov_term = (mm[0][0] + mm[1][1]) / 4.0;
    Ok((mean_term + cov_term).powf(-0.5))
}

fn mat_mul(a: &[[f64; 2]; 2], b: &[[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let mut out = [[0.0; 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            out[r][c] = a[r][0] * b[0][c] + a[r][1] * b[1][c];
        }
    }
    out
}

/// Mean photon numbers of the two outputs and inside the interferometer.
///
/// A lossless beam splitter conserves photon number, so the population
/// inside equals that of the two outputs taken before the loss.
pub fn photon_numbers(params: &LoopParameters) -> Result<PhotonNumbers> {
    let c = closed_form_coefficients(params)?;
    let n_in = params.alpha_mag * params.alpha_mag;
    let n_a_out = c.upsilon.norm_sqr() * n_in;
    let n_b_out = c.xi.norm_sqr() * n_in;
    Ok(PhotonNumbers {
        n_a_out,
        n_b_out,
        n_total_inside: n_a_out + n_b_out,
    })
}

/// Photon-number enhancement factor, closed rational form:
///
/// ```text
/// (2 sqrt(1-L) Theta - 2L + 4) / (2 sqrt(1-L) Theta - (1-L) cos(phi) - L + 3)
/// ```
pub fn lambda3(params: &LoopParameters) -> Result<f64> {
    check_pole(params)?;
    let (l, t) = (params.loss, params.transmission());
    let num = 2.0 * t * theta_term(params) - 2.0 * l + 4.0;
    Ok(num / loop_gain_denominator(params))
}

/// Photon-number enhancement factor `|upsilon|^2 + |xi|^2`.
pub fn lambda3_from_coefficients(params: &LoopParameters) -> Result<f64> {
    let c = closed_form_coefficients(params)?;
    Ok(c.upsilon.norm_sqr() + c.xi.norm_sqr())
}

pub fn merit_report(params: &LoopParameters) -> Result<MeritReport> {
    let params = params.validated()?;
    let lambda1 = lambda1(&params)?;
    let lambda2 = lambda2(&params)?;
    let lambda3 = lambda3(&params)?;
    let photons = photon_numbers(&params)?;
    let sensitivity = |factor: f64| {
        let scale = factor * params.alpha_mag;
        if scale > 0.0 {
            1.0 / scale
        } else {
            f64::INFINITY
        }
    };
    Ok(MeritReport {
        lambda1,
        lambda2,
        lambda3,
        dphi_hd: sensitivity(lambda1),
        dphi_qcrb: sensitivity(lambda2),
        n_a_out: photons.n_a_out,
        n_b_out: photons.n_b_out,
        n_total_inside: photons.n_total_inside,
    })
}
