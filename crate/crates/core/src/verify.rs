//! Self-consistency suites: the unrolled cascade against the steady state,
//! mode normalisation, photon balance, and each closed-form factor against
//! an independent numerical route.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::landscape::periodic_grid;
use crate::metrology::{
    homodyne_moments, lambda1, lambda1_numeric, lambda2, lambda2_numeric, lambda3,
    lambda3_from_coefficients, qcrb_general,
};
use crate::params::LoopParameters;
use crate::recycling::{closed_form_coefficients, iterate_series, stages_for_tolerance};

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Random `(phi, theta0)` draws per loss in `losses`.
    pub points: usize,
    pub losses: Vec<f64>,
    /// Fixed cascade length; by default chosen per point from `stage_tol`.
    pub stages: Option<usize>,
    pub stage_tol: f64,
    /// Side of the regular grid used by the finite-difference suites.
    pub grid: usize,
    pub grid_losses: Vec<f64>,
    pub step: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: 2022,
            points: 1000,
            losses: vec![0.05, 0.10, 0.15, 0.20, 0.5, 0.9],
            stages: None,
            stage_tol: 1e-14,
            grid: 50,
            grid_losses: vec![0.05, 0.10, 0.15, 0.20],
            step: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub check: &'static str,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub samples: usize,
}

impl Check {
    fn new(check: &'static str, deviations: Deviation, tolerance: f64) -> Self {
        Self {
            check,
            max_deviation: deviations.max,
            tolerance,
            pass: deviations.max <= tolerance,
            samples: deviations.samples,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Deviation {
    max: f64,
    samples: usize,
}

impl Deviation {
    fn of(value: f64) -> Self {
        Self {
            // NaN must register as a failure
            max: if value.is_nan() { f64::INFINITY } else { value },
            samples: 1,
        }
    }

    fn skipped() -> Self {
        Self::default()
    }

    fn merge(self, other: Self) -> Self {
        Self {
            max: self.max.max(other.max),
            samples: self.samples + other.samples,
        }
    }
}

fn collect<F>(points: &[LoopParameters], f: F) -> Deviation
where
    F: Fn(&LoopParameters) -> Result<Deviation> + Sync,
{
    points
        .par_iter()
        .map(|p| f(p).unwrap_or(Deviation::of(f64::INFINITY)))
        .reduce(Deviation::default, Deviation::merge)
}

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

/// Pseudo-random `(phi, theta0)` draws, repeated for every loss.
pub fn random_points(seed: u64, points: usize, losses: &[f64]) -> Vec<LoopParameters> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let angles: Vec<(f64, f64)> = (0..points)
        .map(|_| (rng.gen_range(0.0..TAU), rng.gen_range(0.0..TAU)))
        .collect();
    losses
        .iter()
        .flat_map(|&loss| {
            angles.iter().map(move |&(phi, theta0)| LoopParameters {
                phi,
                theta0,
                loss,
                alpha_mag: 1.0,
                alpha_phase: 0.0,
            })
        })
        .collect()
}

/// Regular `n x n` grid over `[0, 2 pi)^2` for every loss.
pub fn grid_points(n: usize, losses: &[f64]) -> Vec<LoopParameters> {
    let axis = periodic_grid(n);
    let mut out = Vec::with_capacity(n * n * losses.len());
    for &loss in losses {
        for &phi in &axis {
            for &theta0 in &axis {
                out.push(LoopParameters {
                    phi,
                    theta0,
                    loss,
                    alpha_mag: 1.0,
                    alpha_phase: 0.0,
                });
            }
        }
    }
    out
}

fn oracle(points: &[LoopParameters], stages: Option<usize>, stage_tol: f64) -> Deviation {
    collect(points, |p| {
        let m = match stages {
            Some(m) => m,
            None => stages_for_tolerance(p, stage_tol)?,
        };
        let iterated = iterate_series(p, m)?;
        Ok(Deviation::of(iterated.max_abs_diff(&closed_form_coefficients(p)?)))
    })
}

/// Largest difference between the unrolled cascade and the steady state.
pub fn oracle_deviation(points: &[LoopParameters], stages: Option<usize>, stage_tol: f64) -> f64 {
    oracle(points, stages, stage_tol).max
}

/// Run every suite.
pub fn run_checks(config: &VerifyConfig) -> Vec<Check> {
    let random = random_points(config.seed, config.points, &config.losses);
    let grid = grid_points(config.grid, &config.grid_losses);
    let step = config.step;

    let oracle = oracle(&random, config.stages, config.stage_tol);
    let commutator_a = collect(&random, |p| {
        Ok(Deviation::of(closed_form_coefficients(p)?.commutator_defect_a().abs()))
    });
    let energy = collect(&random, |p| {
        Ok(Deviation::of(closed_form_coefficients(p)?.energy_defect(p.loss).abs()))
    });
    let covariance = collect(&random, |p| {
        let g = homodyne_moments(p)?.covariance;
        let dev = (g[0][0] - 1.0)
            .abs()
            .max((g[1][1] - 1.0).abs())
            .max(g[0][1].abs())
            .max(g[1][0].abs());
        Ok(Deviation::of(dev))
    });

    let lambda1_fd = collect(&grid, |p| {
        let closed = lambda1(p)?;
        if closed < 1e-3 {
            return Ok(Deviation::skipped());
        }
        Ok(Deviation::of(relative(closed, lambda1_numeric(p, step)?)))
    });
    let lambda2_fd = collect(&grid, |p| {
        let closed = lambda2(p)?;
        if closed < 1e-3 {
            return Ok(Deviation::skipped());
        }
        Ok(Deviation::of(relative(closed, 2.0 * lambda2_numeric(p, step)?)))
    });
    let qcrb = collect(&grid, |p| {
        let l2 = lambda2(p)?;
        if l2 <= 1e-3 {
            return Ok(Deviation::skipped());
        }
        Ok(Deviation::of((qcrb_general(p, step)? * l2 * p.alpha_mag - 1.0).abs()))
    });
    let ordering = collect(&grid, |p| Ok(Deviation::of((lambda1(p)? - lambda2(p)?).max(0.0))));
    let lambda3_floor = collect(&grid, |p| Ok(Deviation::of((1.0 - lambda3(p)?).max(0.0))));
    let lambda3_routes = collect(&grid, |p| {
        Ok(Deviation::of(relative(lambda3(p)?, lambda3_from_coefficients(p)?)))
    });

    vec![
        Check::new("oracle_equivalence", oracle, 1e-10),
        Check::new("commutator_a", commutator_a, 1e-12),
        Check::new("energy_balance", energy, 1e-12),
        Check::new("covariance_identity", covariance, 1e-12),
        Check::new("lambda1_finite_difference", lambda1_fd, 1e-6),
        Check::new("lambda2_finite_difference", lambda2_fd, 1e-6),
        Check::new("qcrb_consistency", qcrb, 1e-6),
        Check::new("bound_ordering", ordering, 1e-9),
        Check::new("lambda3_floor", lambda3_floor, 1e-12),
        Check::new("lambda3_two_routes", lambda3_routes, 1e-12),
    ]
}
