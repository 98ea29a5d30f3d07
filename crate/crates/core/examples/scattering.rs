//! Building blocks: beam splitter, phase shifter and the composed interferometer.

use std::f64::consts::PI;

use recycled_mzi::optics::{beam_splitter_matrix, compose_mzi, loss_transform, mzi_closed_form, phase_matrix};

fn main() {
    let bs = beam_splitter_matrix();
    println!("beam splitter: {bs:?}");
    println!("phase shifter at pi/2: {:?}", phase_matrix(PI / 2.0));

    for phi in [0.0, PI / 2.0, PI, 2.5702] {
        let s = compose_mzi(phi);
        println!(
            "phi = {phi:.4}: s11 = {:.4}, s21 = {:.4}, unitarity defect {:.1e}, closed-form gap {:.1e}",
            s.s11,
            s.s21,
            s.unitarity_defect(),
            s.max_abs_diff(&mzi_closed_form(phi))
        );
    }

    let (signal, vacuum) = loss_transform(num_complex::Complex64::new(1.0, 0.0), 0.19).unwrap();
    println!("19% loss: signal {signal}, vacuum weight {vacuum:.5}");
}
