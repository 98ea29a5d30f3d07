//! Optimiser checks against maxima located independently with a
//! Nelder-Mead search on the closed forms (five starts, xatol 1e-12).

use recycled_mzi::landscape::{loss_curve, maximize, sweep};
use recycled_mzi::Metric;

const LAMBDA1_MAX: [(f64, f64); 4] = [
    (0.02, 38.25776705807716),
    (0.10, 9.322773507433473),
    (0.20, 5.366329045006687),
    (0.50, 2.7414197720461853),
];

#[test]
fn lambda1_maxima_match_reference() {
    for (loss, expect) in LAMBDA1_MAX {
        let r = maximize(Metric::Lambda1, loss, 200, 1e-8).unwrap();
        assert!((r.lambda_max - expect).abs() < 1e-8 * expect, "L={loss}: {} vs {expect}", r.lambda_max);
    }
}

#[test]
fn lambda2_maxima_follow_inverse_loss() {
    // reference maxima equal 1 + 1/L to about 1e-12
    for loss in [0.02, 0.06, 0.1, 0.3, 0.5] {
        let r = maximize(Metric::Lambda2, loss, 200, 1e-8).unwrap();
        assert!((r.lambda_max - (1.0 + 1.0 / loss)).abs() < 1e-8 * r.lambda_max, "{r:?}");
    }
}

#[test]
fn optimum_beats_fine_sweep() {
    for loss in [0.05, 0.10, 0.15, 0.20] {
        for metric in [Metric::Lambda1, Metric::Lambda2] {
            let r = maximize(metric, loss, 200, 1e-8).unwrap();
            let fine = sweep(metric, loss, 400, 400).unwrap().max();
            assert!(r.lambda_max >= fine - 1e-9, "{metric} L={loss}");
        }
    }
}

#[test]
fn figure_losses_strictly_decrease() {
    let losses = [0.05, 0.10, 0.15, 0.20];
    for metric in [Metric::Lambda1, Metric::Lambda2] {
        let values: Vec<f64> = loss_curve(metric, &losses, 200, 1e-8)
            .into_iter()
            .map(|r| r.unwrap().lambda_max)
            .collect();
        assert!(values.windows(2).all(|w| w[1] < w[0]), "{metric}: {values:?}");
    }
    let hd = loss_curve(Metric::Lambda1, &losses, 200, 1e-8);
    let qcrb = loss_curve(Metric::Lambda2, &losses, 200, 1e-8);
    for (h, q) in hd.iter().zip(&qcrb) {
        assert!(q.as_ref().unwrap().lambda_max >= h.as_ref().unwrap().lambda_max);
    }
}

#[test]
fn headline_location() {
    let r = maximize(Metric::Lambda1, 0.10, 200, 1e-8).unwrap();
    // reference maximiser (2.57021993, 0.35240494)
    assert!((r.phi_star - 2.57021993).abs() < 1e-5, "{r:?}");
    assert!((r.theta0_star - 0.35240494).abs() < 1e-5, "{r:?}");
}
