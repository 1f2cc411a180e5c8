//! Criticality of the I1 regime over (C_beta/C_delta, C_delta/(C_gamma - C_alpha))
//! for C_gamma - C_alpha = 0.1 and 1, phi_r = 1, x0 = 1.
//!
//!     cargo run --release --example phase_diagram [n_per_cell] [grid]
//!
//! Writes `phase_gap_<g>.csv` per panel and prints the estimated boundary.

use std::fs::File;
use std::io::BufWriter;

use allopdmp::stats::{phase_diagram_sweep_with, PhaseGrid, PhaseOptions};
use allopdmp::AllometricParams;

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1).max(1) as f64).collect()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(20_000);
    let size: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(12);
    let grid = PhaseGrid { ratios: linspace(1.1, 3.3, size), columns: linspace(0.1, 1.5, size) };

    for gap in [0.1, 1.0] {
        let mut p = AllometricParams::baseline().with_phi(1.0);
        p.c_alpha = 1.0;
        p.c_gamma = 1.0 + gap;
        let d = phase_diagram_sweep_with(&grid, &p, 7, &PhaseOptions { n, ..PhaseOptions::default() })?;
        d.write_csv(&mut BufWriter::new(File::create(format!("phase_gap_{gap}.csv"))?))?;
        println!("C_gamma - C_alpha = {gap}");
        for b in &d.boundary {
            match b.xi_hat {
                Some(x) => println!("  C_delta/gap = {:.3}: boundary at C_beta/C_delta ~ {x:.3}", b.column),
                None => println!("  C_delta/gap = {:.3}: no supercritical cell", b.column),
            }
        }
    }
    Ok(())
}
