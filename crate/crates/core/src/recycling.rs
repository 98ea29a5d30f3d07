//! Closing the recycling loop.
//!
//! Output `b` of the interferometer passes a phase `theta0` and a loss `L`
//! and is fed back into input `b`:
//!
//! ```text
//! b_in = sqrt(1-L) e^{-i theta0} b_out + sqrt(L) v
//! ```
//!
//! The steady state is solved in closed form. As an independent check the
//! loop is also unrolled into a cascade of conventional interferometers where
//! stage `k` output `b` feeds stage `k+1` input `b`; the cascade converges to
//! the steady state at the geometric rate `|gamma|`, with
//! `gamma = sqrt(1-L) e^{-i theta0} s22`.
//!
//! Every stage of the cascade sees the same vacuum mode `v`. A physical
//! cascade would use independent vacua, but vacuum terms only enter first
//! and second moments through their total weight, so both pictures agree on
//! everything computed here.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optics::{compose_mzi, Scattering2};
use crate::params::LoopParameters;

/// Below this the loop denominator is treated as a pole.
pub const POLE_THRESHOLD: f64 = 1e-8;

/// Stage cap for [`stages_for_tolerance`].
pub const MAX_STAGES: usize = 1_000_000;

/// Steady-state coefficients of the two outputs on `(a_in, v)`.
///
/// `a_out = upsilon a_in + vac_a v` and `b_out = xi a_in + vac_b v`, where
/// `b_out` is taken directly after the second beam splitter, inside the loop.
/// `a_out` is a free output mode, so `|upsilon|^2 + |vac_a|^2 = 1`. `b_out`
/// circulates and builds up: `|xi|^2 + |vac_b|^2` is not normalised.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecycledCoefficients {
    pub upsilon: Complex64,
    pub vac_a: Complex64,
    pub xi: Complex64,
    pub vac_b: Complex64,
}

impl RecycledCoefficients {
    /// `|upsilon|^2 + |vac_a|^2 - 1`; zero for a properly normalised mode.
    pub fn commutator_defect_a(&self) -> f64 {
        self.upsilon.norm_sqr() + self.vac_a.norm_sqr() - 1.0
    }

    /// `|upsilon|^2 + L |xi|^2 - 1`: photons either leave through `a` or are
    /// lost in the recycling arm.
    pub fn energy_defect(&self, loss: f64) -> f64 {
        self.upsilon.norm_sqr() + loss * self.xi.norm_sqr() - 1.0
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        [
            self.upsilon - other.upsilon,
            self.vac_a - other.vac_a,
            self.xi - other.xi,
            self.vac_b - other.vac_b,
        ]
        .iter()
        .map(|d| d.norm())
        .fold(0.0, f64::max)
    }
}

/// Loop ratio `gamma = sqrt(1-L) e^{-i theta0} s22`.
pub fn loop_ratio(params: &LoopParameters) -> Complex64 {
    let s = compose_mzi(params.phi);
    params.transmission() * Complex64::from_polar(1.0, -params.theta0) * s.s22
}

/// `e^{i theta0} - s22 sqrt(1-L)`, rejecting the lossless resonance.
pub(crate) fn loop_denominator(params: &LoopParameters, s: &Scattering2) -> Result<Complex64> {
    let den = Complex64::from_polar(1.0, params.theta0) - s.s22 * params.transmission();
    let modulus = den.norm();
    if modulus < POLE_THRESHOLD {
        return Err(Error::ResonantPole { modulus });
    }
    Ok(den)
}

/// Fails with [`Error::ResonantPole`] when the loop has no steady state.
pub fn check_pole(params: &LoopParameters) -> Result<()> {
    loop_denominator(params, &compose_mzi(params.phi)).map(|_| ())
}

/// Steady-state output coefficients assembled from the interferometer entries.
pub fn closed_form_coefficients(params: &LoopParameters) -> Result<RecycledCoefficients> {
    let s = compose_mzi(params.phi);
    let den = loop_denominator(params, &s)?;
    let t = params.transmission();
    let v = params.loss.sqrt();

    let upsilon = s.s11 + s.s12 * s.s21 * t / den;
    let vac_a = (1.0 + s.s22 * t / den) * s.s12 * v;

    let one_minus_gamma = 1.0 - t * Complex64::from_polar(1.0, -params.theta0) * s.s22;
    let xi = s.s21 / one_minus_gamma;
    let vac_b = s.s22 * v / one_minus_gamma;

    Ok(RecycledCoefficients {
        upsilon,
        vac_a,
        xi,
        vac_b,
    })
}

/// `upsilon` as a single rational expression in `e^{i phi}`, `e^{i theta0}`.
pub fn rational_upsilon(params: &LoopParameters) -> Result<Complex64> {
    check_pole(params)?;
    let t = params.transmission();
    let ep = Complex64::from_polar(1.0, params.phi);
    let et = Complex64::from_polar(1.0, params.theta0);
    let num = et * (1.0 - ep) - 2.0 * t;
    let den = 2.0 * ep * et + t - ep * t;
    Ok(num / den)
}

/// `xi` as a single rational expression in `e^{i phi}`, `e^{i theta0}`.
pub fn rational_xi(params: &LoopParameters) -> Result<Complex64> {
    check_pole(params)?;
    let t = params.transmission();
    let ep = Complex64::from_polar(1.0, params.phi);
    let et = Complex64::from_polar(1.0, params.theta0);
    let num = Complex64::i() * et * (1.0 + ep);
    let den = 2.0 * et * ep - t * ep + t;
    Ok(num / den)
}

/// Coefficients of a mode on `(a_1_in, b_1_in, v)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ModeExpansion {
    pub a_in: Complex64,
    pub b1_in: Complex64,
    pub vacuum: Complex64,
}

impl ModeExpansion {
    fn scaled(self, k: Complex64) -> Self {
        Self {
            a_in: k * self.a_in,
            b1_in: k * self.b1_in,
            vacuum: k * self.vacuum,
        }
    }

    fn plus(self, other: Self) -> Self {
        Self {
            a_in: self.a_in + other.a_in,
            b1_in: self.b1_in + other.b1_in,
            vacuum: self.vacuum + other.vacuum,
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        [
            self.a_in - other.a_in,
            self.b1_in - other.b1_in,
            self.vacuum - other.vacuum,
        ]
        .iter()
        .map(|d| d.norm())
        .fold(0.0, f64::max)
    }

    /// Merge the `b_1` and `v` vacuum coefficients into one, adding their
    /// weights in quadrature. The phase of the larger term is kept.
    fn folded_vacuum(&self) -> Complex64 {
        let (v, b) = (self.vacuum, self.b1_in);
        if b == Complex64::new(0.0, 0.0) {
            return v;
        }
        if v == Complex64::new(0.0, 0.0) {
            return b;
        }
        let total = v.norm().hypot(b.norm());
        let dominant = if v.norm() >= b.norm() { v } else { b };
        dominant * (total / dominant.norm())
    }
}

/// Output modes of stage `m` of the unrolled cascade.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesState {
    pub stage: usize,
    pub gamma: Complex64,
    pub out_a: ModeExpansion,
    pub out_b: ModeExpansion,
    mzi: Scattering2,
    feedback: Complex64,
    vacuum_in: f64,
}

impl SeriesState {
    /// A single conventional interferometer fed by `a_1` and `b_1`.
    pub fn first(params: &LoopParameters) -> Self {
        let mzi = compose_mzi(params.phi);
        let feedback = params.transmission() * Complex64::from_polar(1.0, -params.theta0);
        let zero = Complex64::new(0.0, 0.0);
        Self {
            stage: 1,
            gamma: feedback * mzi.s22,
            out_a: ModeExpansion {
                a_in: mzi.s11,
                b1_in: mzi.s12,
                vacuum: zero,
            },
            out_b: ModeExpansion {
                a_in: mzi.s21,
                b1_in: mzi.s22,
                vacuum: zero,
            },
            mzi,
            feedback,
            vacuum_in: params.loss.sqrt(),
        }
    }

    /// Feed output `b` through the lossy arm into the next stage.
    pub fn advance(&self) -> Self {
        let b_in = self.out_b.scaled(self.feedback).plus(ModeExpansion {
            vacuum: Complex64::new(self.vacuum_in, 0.0),
            ..Default::default()
        });
        let a_in = ModeExpansion {
            a_in: Complex64::new(1.0, 0.0),
            ..Default::default()
        };
        let s = &self.mzi;
        Self {
            stage: self.stage + 1,
            out_a: a_in.scaled(s.s11).plus(b_in.scaled(s.s12)),
            out_b: a_in.scaled(s.s21).plus(b_in.scaled(s.s22)),
            ..*self
        }
    }

    /// Stage `m` from the geometric-sum expression
    /// `a_m = s11 a_1 + s12 gamma^{m-1} b_1 + s12 (1 - gamma^{m-1}) / (1 - gamma) kappa`
    /// with `kappa = sqrt(1-L) e^{-i theta0} s21 a_1 + sqrt(L) v`.
    pub fn geometric(params: &LoopParameters, stage: usize) -> Result<Self> {
        if stage == 0 {
            return Err(Error::Domain {
                name: "stages",
                value: 0.0,
                expected: "[1, inf)",
            });
        }
        let base = Self::first(params);
        let s = base.mzi;
        let gamma = base.gamma;
        let power = pow_usize(gamma, stage - 1);
        let one = Complex64::new(1.0, 0.0);
        let weight = if gamma == one {
            Complex64::new((stage - 1) as f64, 0.0)
        } else {
            (one - power) / (one - gamma)
        };
        let kappa = ModeExpansion {
            a_in: base.feedback * s.s21,
            b1_in: Complex64::new(0.0, 0.0),
            vacuum: Complex64::new(base.vacuum_in, 0.0),
        };
        let expand = |direct: Complex64, via_b: Complex64| {
            ModeExpansion {
                a_in: direct,
                b1_in: via_b * power,
                vacuum: Complex64::new(0.0, 0.0),
            }
            .plus(kappa.scaled(via_b * weight))
        };
        Ok(Self {
            stage,
            out_a: expand(s.s11, s.s12),
            out_b: expand(s.s21, s.s22),
            ..base
        })
    }

    /// Treat `b_1` as vacuum and express the outputs on `(a_in, v)`.
    pub fn coefficients(&self) -> RecycledCoefficients {
        RecycledCoefficients {
            upsilon: self.out_a.a_in,
            vac_a: self.out_a.folded_vacuum(),
            xi: self.out_b.a_in,
            vac_b: self.out_b.folded_vacuum(),
        }
    }
}

fn pow_usize(z: Complex64, n: usize) -> Complex64 {
    match i32::try_from(n) {
        Ok(n) => z.powi(n),
        Err(_) => z.powf(n as f64),
    }
}

/// Unroll the loop into `stages` cascaded interferometers, stage by stage.
pub fn iterate_series(params: &LoopParameters, stages: usize) -> Result<RecycledCoefficients> {
    let params = params.validated()?;
    if stages == 0 {
        return Err(Error::Domain {
            name: "stages",
            value: 0.0,
            expected: "[1, inf)",
        });
    }
    let mut state = SeriesState::first(&params);
    while state.stage < stages {
        state = state.advance();
    }
    Ok(state.coefficients())
}

/// Smallest `m` with `|gamma|^m < tol`, capped at [`MAX_STAGES`].
pub fn stages_for_tolerance(params: &LoopParameters, tol: f64) -> Result<usize> {
    stages_for_ratio(loop_ratio(params).norm(), tol)
}

/// Smallest `m` with `ratio^m < tol`, capped at [`MAX_STAGES`].
pub fn stages_for_ratio(ratio: f64, tol: f64) -> Result<usize> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::Domain {
            name: "tol",
            value: tol,
            expected: "(0, inf)",
        });
    }
    if ratio.is_nan() || ratio >= 1.0 {
        return Err(Error::NonConvergence { ratio });
    }
    if ratio == 0.0 {
        return Ok(1);
    }
    let mut stage = 1;
    let mut power = ratio;
    while power >= tol && stage < MAX_STAGES {
        power *= ratio;
        stage += 1;
    }
    Ok(stage)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, TAU};

    fn p(phi: f64, theta0: f64, loss: f64) -> LoopParameters {
        LoopParameters::new(phi, theta0, loss).unwrap()
    }

    #[test]
    fn fully_blocked_loop_is_conventional() {
        for k in 0..20 {
            let phi = 0.37 * k as f64;
            let theta0 = 1.1 * k as f64;
            let c = closed_form_coefficients(&p(phi, theta0, 1.0)).unwrap();
            let expect = 0.5 * (Complex64::from_polar(1.0, -phi) - 1.0);
            assert!((c.upsilon - expect).norm() < 1e-14);
            let s = compose_mzi(phi);
            assert!((c.upsilon - s.s11).norm() < 1e-14);
            assert!((c.xi - s.s21).norm() < 1e-14);
        }
        let c = closed_form_coefficients(&p(0.0, 0.0, 1.0)).unwrap();
        assert!(c.upsilon.norm() < 1e-15);
        assert!((c.xi - Complex64::i()).norm() < 1e-15);
        let single = iterate_series(&p(0.0, 0.0, 1.0), 1).unwrap();
        assert!(single.max_abs_diff(&c) < 1e-15);
    }

    #[test]
    fn energy_balance_at_headline_point() {
        let c = closed_form_coefficients(&p(2.5702, 0.3524, 0.10)).unwrap();
        assert!(c.energy_defect(0.10).abs() < 1e-12);
        assert!(c.commutator_defect_a().abs() < 1e-12);
        // the circulating mode is amplified by the loop
        assert!(c.xi.norm_sqr() + c.vac_b.norm_sqr() > 10.0);
    }

    #[test]
    fn rational_forms_agree_with_assembly() {
        for k in 0..200 {
            let phi = 0.113 * k as f64;
            let theta0 = 0.291 * k as f64 - 3.0;
            for loss in [0.01, 0.1, 0.5, 1.0] {
                let params = p(phi, theta0, loss);
                let c = closed_form_coefficients(&params).unwrap();
                assert!((c.upsilon - rational_upsilon(&params).unwrap()).norm() < 1e-12);
                assert!((c.xi - rational_xi(&params).unwrap()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn lossless_resonance_is_rejected() {
        let err = closed_form_coefficients(&p(PI, 0.0, 0.0)).unwrap_err();
        assert!(matches!(err, Error::ResonantPole { .. }));
        assert!(closed_form_coefficients(&p(PI + TAU, -TAU, 0.0)).is_err());
        // lossless but off resonance is fine
        let c = closed_form_coefficients(&p(1.0, 0.5, 0.0)).unwrap();
        assert!(c.energy_defect(0.0).abs() < 1e-12);
        assert!(rational_upsilon(&p(PI, 0.0, 0.0)).is_err());
    }

    #[test]
    fn single_stage_is_conventional() {
        let params = p(1.3, 2.2, 0.2);
        let c = iterate_series(&params, 1).unwrap();
        let s = compose_mzi(1.3);
        assert_eq!(c.upsilon, s.s11);
        assert_eq!(c.xi, s.s21);
        assert_eq!(c.vac_a, s.s12);
        assert_eq!(c.vac_b, s.s22);
    }

    #[test]
    fn blocked_loop_stops_after_first_stage() {
        let params = p(0.8, 1.9, 1.0);
        assert_eq!(
            iterate_series(&params, 5).unwrap(),
            iterate_series(&params, 1).unwrap()
        );
    }

    #[test]
    fn recursion_matches_geometric_sum() {
        let params = p(2.1, 0.4, 0.15);
        let mut state = SeriesState::first(&params);
        for m in 1..60 {
            let closed = SeriesState::geometric(&params, m).unwrap();
            assert_eq!(state.stage, m);
            assert!(state.out_a.max_abs_diff(&closed.out_a) < 1e-13, "stage {m}");
            assert!(state.out_b.max_abs_diff(&closed.out_b) < 1e-13, "stage {m}");
            let s = compose_mzi(2.1);
            let expect_b1 = s.s12 * state.gamma.powi(m as i32 - 1);
            assert!((state.out_a.b1_in - expect_b1).norm() < 1e-14);
            state = state.advance();
        }
    }

    #[test]
    fn loop_ratio_modulus() {
        for k in 0..50 {
            let phi = 0.21 * k as f64;
            for loss in [0.0, 0.3, 1.0] {
                let g = loop_ratio(&p(phi, 0.9, loss)).norm();
                let expect = (1.0 - loss).sqrt() * (phi / 2.0).sin().abs();
                assert!((g - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn series_converges_to_closed_form() {
        let params = p(2.5702, 0.3524, 0.10);
        let m = stages_for_tolerance(&params, 1e-14).unwrap();
        let it = iterate_series(&params, m).unwrap();
        let cf = closed_form_coefficients(&params).unwrap();
        assert!(it.max_abs_diff(&cf) < 1e-10);
        // far from converged at a handful of stages
        assert!(iterate_series(&params, 3).unwrap().max_abs_diff(&cf) > 1e-3);
    }

    #[test]
    fn stage_counts() {
        assert_eq!(stages_for_tolerance(&p(1.0, 2.0, 1.0), 1e-12).unwrap(), 1);
        assert_eq!(stages_for_ratio(0.5, 1e-12).unwrap(), 40);
        assert_eq!(stages_for_ratio(0.9, 1e-9).unwrap(), 197);
        // |gamma| = |sin(pi/6)| = 0.5 at L = 0
        assert_eq!(stages_for_tolerance(&p(PI / 3.0, 0.0, 0.0), 1e-12).unwrap(), 40);
        assert_eq!(stages_for_ratio(1.0 - 1e-12, 1e-14).unwrap(), MAX_STAGES);
        assert!(matches!(
            stages_for_tolerance(&p(PI, 0.3, 0.0), 1e-12),
            Err(Error::NonConvergence { .. })
        ));
        assert!(stages_for_ratio(0.5, 0.0).is_err());
    }

    #[test]
    fn stage_count_oracle_by_brute_force() {
        // independent check: smallest m with 0.9^m < 1e-9 using powi
        let brute = (1..).find(|&m| 0.9f64.powi(m) < 1e-9).unwrap();
        assert_eq!(brute, 197);
    }

    #[test]
    fn zero_stages_rejected() {
        assert!(iterate_series(&p(1.0, 1.0, 0.5), 0).is_err());
    }
}
