//! Maximum homodyne and QCRB enhancement against recycling-arm loss.

use recycled_mzi::{loss_curve, Metric};

fn main() {
    let losses: Vec<f64> = (0..25).map(|k| 0.02 + 0.02 * k as f64).collect();
    let hd = loss_curve(Metric::Lambda1, &losses, 200, 1e-8);
    let qcrb = loss_curve(Metric::Lambda2, &losses, 200, 1e-8);

    println!("loss,lambda1_max,phi_star,theta0_star,lambda2_max");
    for ((loss, h), q) in losses.iter().zip(hd).zip(qcrb) {
        match (h, q) {
            (Ok(h), Ok(q)) => println!(
                "{loss:.2},{:.6},{:.6},{:.6},{:.6}",
                h.lambda_max, h.phi_star, h.theta0_star, q.lambda_max
            ),
            (h, q) => eprintln!("{loss}: {:?} {:?}", h.err(), q.err()),
        }
    }
}
