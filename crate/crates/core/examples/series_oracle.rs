//! Unroll the recycling loop into a cascade of interferometers and watch it
//! converge to the steady state.

use recycled_mzi::recycling::{loop_ratio, stages_for_tolerance};
use recycled_mzi::{closed_form_coefficients, iterate_series, LoopParameters};

fn main() -> recycled_mzi::Result<()> {
    let params = LoopParameters::new(2.5702, 0.3524, 0.10)?;
    let steady = closed_form_coefficients(&params)?;
    println!("|gamma| = {:.6}", loop_ratio(&params).norm());

    println!("stages,max_deviation");
    for stages in [1, 2, 5, 10, 20, 50, 100, 200] {
        let cascade = iterate_series(&params, stages)?;
        println!("{stages},{:.3e}", cascade.max_abs_diff(&steady));
    }

    let m = stages_for_tolerance(&params, 1e-14)?;
    let converged = iterate_series(&params, m)?;
    println!("converged after {m} stages: deviation {:.3e}", converged.max_abs_diff(&steady));
    Ok(())
}
