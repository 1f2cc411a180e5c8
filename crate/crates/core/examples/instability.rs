//! Running Monte Carlo means of the offspring number for beta in I2
//! (0.26, 1, 3) at x0 = 1, with the heavy-tail diagnostic of each run.
//!
//!     cargo run --release --example instability [n] [phi_r]
//!
//! Writes `running_means.csv` (beta,n,mean) to the working directory.

use std::fs::File;
use std::io::{BufWriter, Write};

use allopdmp::stats::{estimate_from_paths, heavy_tail_diagnostic, sample_paths, McOptions};
use allopdmp::AllometricParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(100_000);
    let phi: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(2.0 / 3.0);

    let mut w = BufWriter::new(File::create("running_means.csv")?);
    writeln!(w, "beta,n,mean")?;
    for beta in [0.26, 1.0, 3.0] {
        let p = AllometricParams::baseline().with_beta(beta).with_phi(phi);
        let paths = sample_paths(&p, 1.0, n, 6, &McOptions::default())?;
        let est = estimate_from_paths(&paths, 3.0);
        for r in &est.running_means {
            writeln!(w, "{beta},{},{}", r.n, r.mean)?;
        }
        let births: Vec<f64> = paths.iter().map(|s| s.n_births as f64).collect();
        let tail = heavy_tail_diagnostic(&births)?;
        println!(
            "beta = {beta}: m_hat = {:.4} ± {:.4}, max births {}, hill(5%) {:?}, plateau flag {} (deviation {:.3})",
            est.mean,
            est.stderr,
            paths.iter().map(|s| s.n_births).max().unwrap_or(0),
            tail.hill_estimate,
            tail.plateau_flag,
            tail.window_deviation
        );
    }
    Ok(())
}
