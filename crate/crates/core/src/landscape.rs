//! Sweeps of the enhancement factors over `(phi, theta0)` and their
//! maximisation at fixed loss.
//!
//! The maximiser is deterministic: a coarse periodic grid, then a compass
//! search (eight directions, step doubled on success and halved on failure)
//! from the five best grid cells. The high-enhancement region is a narrow
//! horn, so several starts are refined rather than only the best cell.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrology::Metric;
use crate::params::LoopParameters;

pub const MAX_GRID_POINTS: u64 = 100_000_000;

/// Coarse grid side used when none is given.
pub const DEFAULT_GRID_SEED: usize = 200;

/// Number of coarse cells refined by [`maximize`].
pub const REFINED_STARTS: usize = 5;

/// Relative gap under which two refined maxima count as tied.
const TIE_TOLERANCE: f64 = 1e-10;

const MAX_POLLS_PER_START: usize = 200_000;

/// Values of one factor on a regular `(phi, theta0)` grid over `[0, 2 pi)^2`.
///
/// `values[i][j]` belongs to `(phi_points[i], theta0_points[j])`. Cells where
/// the model has no steady state hold `+inf`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub metric: Metric,
    pub loss: f64,
    pub phi_points: Vec<f64>,
    pub theta0_points: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl SweepGrid {
    /// Largest finite value and its `(row, column)`; earliest cell wins ties.
    pub fn argmax(&self) -> Option<(usize, usize, f64)> {
        let mut best: Option<(usize, usize, f64)> = None;
        for (i, row) in self.values.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v.is_finite() && best.is_none_or(|(_, _, b)| v > b) {
                    best = Some((i, j, v));
                }
            }
        }
        best
    }

    pub fn min(&self) -> f64 {
        self.finite_values().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.finite_values().fold(f64::NEG_INFINITY, f64::max)
    }

    fn finite_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().flatten().copied().filter(|v| v.is_finite())
    }

    /// Sizes of the connected regions where the value exceeds `threshold`,
    /// largest first. Cells connect through shared edges and the grid wraps
    /// around in both angles.
    pub fn superlevel_regions(&self, threshold: f64) -> Vec<usize> {
        let rows = self.values.len();
        let cols = self.theta0_points.len();
        let above = |i: usize, j: usize| {
            let v = self.values[i][j];
            v.is_finite() && v > threshold
        };
        let mut seen = vec![false; rows * cols];
        let mut sizes = Vec::new();
        let mut stack = Vec::new();
        for start in 0..rows * cols {
            if seen[start] || !above(start / cols, start % cols) {
                continue;
            }
            seen[start] = true;
            stack.push(start);
            let mut size = 0;
            while let Some(cell) = stack.pop() {
                size += 1;
                let (i, j) = (cell / cols, cell % cols);
                let neighbours = [
                    ((i + 1) % rows, j),
                    ((i + rows - 1) % rows, j),
                    (i, (j + 1) % cols),
                    (i, (j + cols - 1) % cols),
                ];
                for (ni, nj) in neighbours {
                    let idx = ni * cols + nj;
                    if !seen[idx] && above(ni, nj) {
                        seen[idx] = true;
                        stack.push(idx);
                    }
                }
            }
            sizes.push(size);
        }
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        sizes
    }
}

/// A located maximum of one factor at fixed loss.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimumRecord {
    pub loss: f64,
    pub metric: Metric,
    pub lambda_max: f64,
    pub phi_star: f64,
    pub theta0_star: f64,
    /// Factor evaluations spent, including the coarse grid.
    pub evaluations: usize,
}

fn check_sweep_loss(loss: f64) -> Result<f64> {
    if loss > 0.0 && loss <= 1.0 {
        Ok(loss)
    } else {
        Err(Error::Domain {
            name: "loss",
            value: loss,
            expected: "(0, 1]",
        })
    }
}

/// `n` equally spaced angles in `[0, 2 pi)`.
pub fn periodic_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| TAU * k as f64 / n as f64).collect()
}

/// Angle reduced into `[0, 2 pi)`.
pub fn wrap_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

fn evaluate(metric: Metric, loss: f64, phi: f64, theta0: f64) -> Option<f64> {
    let params = LoopParameters {
        phi,
        theta0,
        loss,
        alpha_mag: 1.0,
        alpha_phase: 0.0,
    };
    metric.evaluate(&params).ok().filter(|v| v.is_finite())
}

/// Evaluate `metric` on an `n_phi x n_theta0` periodic grid.
pub fn sweep(metric: Metric, loss: f64, n_phi: usize, n_theta0: usize) -> Result<SweepGrid> {
    let loss = check_sweep_loss(loss)?;
    for (name, n) in [("n_phi", n_phi), ("n_theta0", n_theta0)] {
        if n < 2 {
            return Err(Error::Domain {
                name,
                value: n as f64,
                expected: "[2, inf)",
            });
        }
    }
    let points = (n_phi as u64).saturating_mul(n_theta0 as u64);
    if points > MAX_GRID_POINTS {
        return Err(Error::GridTooLarge { points });
    }
    let phi_points = periodic_grid(n_phi);
    let theta0_points = periodic_grid(n_theta0);
    let values = phi_points
        .par_iter()
        .map(|&phi| {
            theta0_points
                .iter()
                .map(|&th| evaluate(metric, loss, phi, th).unwrap_or(f64::INFINITY))
                .collect()
        })
        .collect();
    Ok(SweepGrid {
        metric,
        loss,
        phi_points,
        theta0_points,
        values,
    })
}

struct Refined {
    phi: f64,
    theta0: f64,
    evaluations: usize,
}

const DIRECTIONS: [(f64, f64); 8] = [
    (1.0, 0.0),
    (-1.0, 0.0),
    (0.0, 1.0),
    (0.0, -1.0),
    (1.0, 1.0),
    (-1.0, -1.0),
    (1.0, -1.0),
    (-1.0, 1.0),
];

/// Compass search on the factor starting from a grid cell.
fn refine(metric: Metric, loss: f64, start: (f64, f64, f64), initial_step: f64, tol: f64) -> Refined {
    let (mut phi, mut theta0, mut value) = start;
    let mut step = initial_step;
    let mut evaluations = 0;
    let mut polls = 0;
    while step >= tol && polls < MAX_POLLS_PER_START {
        polls += 1;
        let mut best: Option<(f64, f64, f64)> = None;
        for (dp, dt) in DIRECTIONS {
            let (cp, ct) = (phi + step * dp, theta0 + step * dt);
            evaluations += 1;
            if let Some(v) = evaluate(metric, loss, cp, ct) {
                if v > value && best.is_none_or(|(_, _, b)| v > b) {
                    best = Some((cp, ct, v));
                }
            }
        }
        match best {
            Some((cp, ct, v)) => {
                phi = cp;
                theta0 = ct;
                value = v;
                step = (2.0 * step).min(initial_step);
            }
            None => step *= 0.5,
        }
    }
    Refined {
        phi,
        theta0,
        evaluations,
    }
}

/// Locate the maximum of `metric` over `(phi, theta0)` at fixed `loss`.
///
/// `grid_seed` is the side of the coarse grid and `tol` the final compass
/// step in radians. Near-equal maxima (the landscape is symmetric under
/// `(phi, theta0) -> (-phi, -theta0)`) resolve to the lexicographically
/// smallest `(phi*, theta0*)` in `[0, 2 pi)`.
pub fn maximize(metric: Metric, loss: f64, grid_seed: usize, tol: f64) -> Result<OptimumRecord> {
    let loss = check_sweep_loss(loss)?;
    if !(1e-10..=1e-2).contains(&tol) {
        return Err(Error::Domain {
            name: "tol",
            value: tol,
            expected: "[1e-10, 1e-2]",
        });
    }
    let grid = sweep(metric, loss, grid_seed, grid_seed)?;
    let mut evaluations = grid_seed * grid_seed;

    let mut cells: Vec<(usize, usize, f64)> = grid
        .values
        .iter()
        .enumerate()
        .flat_map(|(i, row)| row.iter().enumerate().map(move |(j, &v)| (i, j, v)))
        .filter(|(_, _, v)| v.is_finite())
        .collect();
    // stable sort keeps row-major order among equal values
    cells.sort_by(|a, b| b.2.total_cmp(&a.2));
    cells.truncate(REFINED_STARTS);
    if cells.is_empty() {
        return Err(Error::Domain {
            name: "loss",
            value: loss,
            expected: "a loss with at least one regular grid cell",
        });
    }

    let step = TAU / grid_seed as f64;
    let refined: Vec<Refined> = cells
        .par_iter()
        .map(|&(i, j, v)| refine(metric, loss, (grid.phi_points[i], grid.theta0_points[j], v), step, tol))
        .collect();

    let mut candidates = Vec::with_capacity(refined.len());
    for r in &refined {
        evaluations += r.evaluations;
        let (phi, theta0) = (wrap_angle(r.phi), wrap_angle(r.theta0));
        evaluations += 1;
        if let Some(value) = evaluate(metric, loss, phi, theta0) {
            candidates.push((phi, theta0, value));
        }
    }

    let top = candidates.iter().map(|c| c.2).fold(f64::NEG_INFINITY, f64::max);
    let (phi_star, theta0_star, lambda_max) = candidates
        .into_iter()
        .filter(|c| top - c.2 <= TIE_TOLERANCE * top.abs())
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)))
        .expect("at least one refined start");

    Ok(OptimumRecord {
        loss,
        metric,
        lambda_max,
        phi_star,
        theta0_star,
        evaluations,
    })
}

/// One independent [`maximize`] per loss, in input order.
pub fn loss_curve(metric: Metric, losses: &[f64], grid_seed: usize, tol: f64) -> Vec<Result<OptimumRecord>> {
    losses
        .par_iter()
        .map(|&loss| maximize(metric, loss, grid_seed, tol))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn grid_validation() {
        assert!(sweep(Metric::Lambda1, 0.1, 1, 10).is_err());
        assert!(sweep(Metric::Lambda1, 0.0, 10, 10).is_err());
        assert!(sweep(Metric::Lambda1, 1.5, 10, 10).is_err());
        assert!(matches!(
            sweep(Metric::Lambda1, 0.1, 20_000, 20_000),
            Err(Error::GridTooLarge { points: 400_000_000 })
        ));
    }

    #[test]
    fn sweep_layout() {
        let g = sweep(Metric::Lambda2, 0.2, 7, 5).unwrap();
        assert_eq!(g.values.len(), 7);
        assert!(g.values.iter().all(|r| r.len() == 5));
        assert_eq!(g.phi_points[0], 0.0);
        assert!(g.phi_points[6] < TAU);
        let params = LoopParameters::new(g.phi_points[3], g.theta0_points[2], 0.2).unwrap();
        assert_eq!(g.values[3][2], Metric::Lambda2.evaluate(&params).unwrap());
    }

    #[test]
    fn blocked_loop_rows_follow_sine() {
        let g = sweep(Metric::Lambda1, 1.0, 100, 100).unwrap();
        for (i, row) in g.values.iter().enumerate() {
            let expect = g.phi_points[i].sin().abs();
            assert!(row.iter().all(|v| (v - expect).abs() < 1e-12));
        }
    }

    #[test]
    fn lambda3_sweep_bounded_below() {
        let g = sweep(Metric::Lambda3, 0.05, 200, 200).unwrap();
        assert!(g.min() >= 1.0 - 1e-12);
    }

    #[test]
    fn fine_sweep_peak_near_headline() {
        let g = sweep(Metric::Lambda1, 0.10, 400, 400).unwrap();
        assert!((g.max() - 9.32).abs() / 9.32 < 0.02);
    }

    #[test]
    fn regions_wrap_around() {
        let mut g = sweep(Metric::Lambda1, 1.0, 4, 4).unwrap();
        for row in g.values.iter_mut() {
            row.iter_mut().for_each(|v| *v = 0.0);
        }
        g.values[0][0] = 2.0;
        g.values[3][0] = 2.0;
        g.values[0][3] = 2.0;
        g.values[2][2] = 2.0;
        assert_eq!(g.superlevel_regions(1.0), vec![3, 1]);
    }

    #[test]
    fn headline_optimum() {
        let r = maximize(Metric::Lambda1, 0.10, 200, 1e-8).unwrap();
        assert!((r.lambda_max - 9.32).abs() < 0.05, "{r:?}");
        assert!((r.phi_star - 2.5702).abs() < 1e-3, "{r:?}");
        assert!((r.theta0_star - 0.3524).abs() < 1e-3, "{r:?}");
    }

    #[test]
    fn blocked_loop_optima() {
        let r = maximize(Metric::Lambda1, 1.0, 100, 1e-8).unwrap();
        assert!((r.lambda_max - 1.0).abs() < 1e-12);
        assert!((r.phi_star - FRAC_PI_2).abs() < 1e-6, "{r:?}");

        let r = maximize(Metric::Lambda2, 1.0, 100, 1e-8).unwrap();
        assert!((r.lambda_max - 1.0).abs() < 1e-12);
    }

    #[test]
    fn optimum_dominates_seed_grid_and_neighbourhood() {
        for metric in [Metric::Lambda1, Metric::Lambda2] {
            let r = maximize(metric, 0.15, 120, 1e-9).unwrap();
            let g = sweep(metric, 0.15, 120, 120).unwrap();
            assert!(r.lambda_max >= g.max());
            let eps = 1e-4;
            for (dp, dt) in DIRECTIONS {
                let v = evaluate(metric, 0.15, r.phi_star + eps * dp, r.theta0_star + eps * dt).unwrap();
                assert!(r.lambda_max >= v, "{metric}: {v} > {}", r.lambda_max);
            }
            let again = evaluate(metric, 0.15, r.phi_star, r.theta0_star).unwrap();
            assert_eq!(again, r.lambda_max);
        }
    }

    #[test]
    fn optimisation_is_reproducible() {
        let a = maximize(Metric::Lambda2, 0.07, 80, 1e-8).unwrap();
        let b = maximize(Metric::Lambda2, 0.07, 80, 1e-8).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn maximize_validation() {
        assert!(maximize(Metric::Lambda1, 0.0, 50, 1e-8).is_err());
        assert!(maximize(Metric::Lambda1, 0.1, 50, 1e-12).is_err());
        assert!(maximize(Metric::Lambda1, 0.1, 50, 0.1).is_err());
    }

    #[test]
    fn loss_curve_keeps_order_and_errors() {
        let out = loss_curve(Metric::Lambda1, &[0.2, 0.0, 0.1], 60, 1e-6);
        assert_eq!(out.len(), 3);
        assert_eq!(out[0].as_ref().unwrap().loss, 0.2);
        assert!(out[1].is_err());
        assert_eq!(out[2].as_ref().unwrap().loss, 0.1);
    }

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(0.0), 0.0);
        assert!((wrap_angle(-PI / 2.0) - 1.5 * PI).abs() < 1e-15);
        assert!(wrap_angle(-1e-300) < TAU);
        assert!((wrap_angle(7.0) - (7.0 - TAU)).abs() < 1e-15);
    }
}
