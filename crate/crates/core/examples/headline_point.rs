//! All figures of merit at the best homodyne operating point for 10% loss.

use recycled_mzi::metrology::{homodyne_moments, lambda1_numeric, qcrb_general};
use recycled_mzi::{closed_form_coefficients, merit_report, LoopParameters};

fn main() -> recycled_mzi::Result<()> {
    let params = LoopParameters::new(2.5702, 0.3524, 0.10)?.with_alpha(10.0, 0.0)?;

    let c = closed_form_coefficients(&params)?;
    println!("upsilon = {:.6}, xi = {:.6}", c.upsilon, c.xi);

    let m = homodyne_moments(&params)?;
    println!("<x_a> = {:.6}, <p_a> = {:.6}, covariance = {:?}", m.mean_x, m.mean_p, m.covariance);

    let report = merit_report(&params)?;
    println!("{}", serde_json::to_string_pretty(&report).unwrap());

    println!("lambda1 by finite differences: {:.6}", lambda1_numeric(&params, 1e-6)?);
    println!("general QCRB: {:.6} rad (closed form {:.6})", qcrb_general(&params, 1e-6)?, report.dphi_qcrb);
    Ok(())
}
