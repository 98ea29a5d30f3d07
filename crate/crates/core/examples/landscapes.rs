//! Write the three enhancement landscapes for several losses as CSV.
//!
//! `cargo run --release --example landscapes -- [out_dir] [n]`

use std::fmt::Write as _;
use std::path::PathBuf;

use recycled_mzi::format::g12;
use recycled_mzi::{sweep, Metric};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let dir = PathBuf::from(args.next().unwrap_or_else(|| "landscapes".into()));
    let n: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(200);
    std::fs::create_dir_all(&dir)?;

    for metric in Metric::ALL {
        for loss in [0.05, 0.10, 0.15, 0.20] {
            let grid = sweep(metric, loss, n, n)?;
            let mut csv = String::from("phi,theta0,value\n");
            for (phi, row) in grid.phi_points.iter().zip(&grid.values) {
                for (theta0, v) in grid.theta0_points.iter().zip(row) {
                    writeln!(csv, "{},{},{}", g12(*phi), g12(*theta0), g12(*v))?;
                }
            }
            let path = dir.join(format!("{metric}_L{loss:.2}.csv"));
            std::fs::write(&path, csv)?;
            let regions = grid.superlevel_regions(1.0);
            println!(
                "{}: max {:.4}, min {:.4}, largest region above 1: {} cells",
                path.display(),
                grid.max(),
                grid.min(),
                regions.first().unwrap_or(&0)
            );
        }
    }
    Ok(())
}
