use thiserror::Error;

/// Errors raised by the interferometer model and its drivers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} = {value} is outside {expected}")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    /// The recycling loop has no steady state (lossless resonance).
    #[error("loop denominator |e^(i theta0) - s22 sqrt(1-L)| = {modulus:.3e} is below 1e-8")]
    ResonantPole { modulus: f64 },

    #[error("loop ratio |gamma| = {ratio} >= 1, series does not converge")]
    NonConvergence { ratio: f64 },

    /// The phase derivative of the mean quadratures vanishes.
    #[error("mean-quadrature derivative {norm:.3e} carries no phase information")]
    ZeroInformation { norm: f64 },

    #[error("grid of {points} points exceeds the 1e8 limit")]
    GridTooLarge { points: u64 },
}

impl Error {
    /// Stable machine-readable kind, used in CLI diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain { .. } => "domain",
            Error::ResonantPole { .. } => "resonant_pole",
            Error::NonConvergence { .. } => "nonconvergence",
            Error::ZeroInformation { .. } => "zero_information",
            Error::GridTooLarge { .. } => "grid_too_large",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_fraction(name: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::Domain {
            name,
            value,
            expected: "[0, 1]",
        })
    }
}

pub(crate) fn check_finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Domain {
            name,
            value,
            expected: "the finite reals",
        })
    }
}
