//! Six individual lives at x0 = xi0 = 1, beta = -0.2, C_beta = 2, C_delta = 0.5.
//! Writes one event CSV per path and prints a one-line summary of each.
//!
//!     cargo run --release --example trajectories [out_dir] [seed]

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use allopdmp::pdmp::{simulate_trajectory, Caps};
use allopdmp::{AllometricParams, PathStreams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "out/trajectories".into()));
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(4);
    std::fs::create_dir_all(&out)?;

    let p = AllometricParams::baseline().with_beta(-0.2);
    for i in 0..6 {
        let t = simulate_trajectory(&p, 1.0, &PathStreams::new(seed, i), &Caps::natural(&p))?;
        let mut w = BufWriter::new(File::create(out.join(format!("path_{i:04}.csv")))?);
        t.write_csv(i as usize, &mut w, true)?;
        let peak = t.events.iter().map(|e| e.energy_before).fold(1.0, f64::max);
        println!(
            "path {i}: {:>3} births, death at t = {:.3}, peak energy {:.3}",
            t.n_births,
            t.t_death.unwrap_or(f64::NAN),
            peak
        );
    }
    Ok(())
}
