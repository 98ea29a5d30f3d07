//! Photon-recycled Mach-Zehnder interferometer with coherent-state input.
//!
//! Output `b` of a balanced interferometer is sent back into input `b`
//! through an arm with phase `theta0` and loss `L`. The crate computes the
//! steady-state output modes, the homodyne phase sensitivity on output `a`,
//! the quantum Cramér-Rao bound, and the photon number inside the
//! interferometer, each relative to the conventional interferometer, and
//! sweeps and maximises these factors over `(phi, theta0)`.
//!
//! ```
//! use recycled_mzi::{metrology, LoopParameters};
//!
//! let params = LoopParameters::new(2.5702, 0.3524, 0.10).unwrap();
//! let l1 = metrology::lambda1(&params).unwrap();
//! assert!((l1 - 9.32).abs() < 0.01);
//! ```

pub mod cli;
pub mod error;
pub mod format;
pub mod landscape;
pub mod metrology;
pub mod optics;
pub mod params;
pub mod recycling;
pub mod verify;

pub use error::{Error, Result};
pub use landscape::{loss_curve, maximize, sweep, OptimumRecord, SweepGrid};
pub use metrology::{merit_report, GaussianMoments, MeritReport, Metric};
pub use optics::Scattering2;
pub use params::LoopParameters;
pub use recycling::{closed_form_coefficients, iterate_series, RecycledCoefficients};
