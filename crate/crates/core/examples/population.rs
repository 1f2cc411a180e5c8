//! A population grown from two founders, its generation sizes and lineage
//! table, then survival frequencies to generation 20.
//!
//!     cargo run --release --example population [runs] [phi_r]

use std::fs::File;
use std::io::BufWriter;

use allopdmp::population::{simulate_population, survives_to_generation, PopulationCaps};
use allopdmp::AllometricParams;

fn main() -> allopdmp::Result<()> {
    let mut args = std::env::args().skip(1);
    let runs: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1000);
    let phi: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1.0);

    let p = AllometricParams::baseline().with_beta(-0.2);
    let caps = PopulationCaps { max_individuals: 5_000, ..PopulationCaps::default() };
    let run = simulate_population(&[1.0, 2.0], &p, 3, &caps)?;
    println!(
        "{} individuals, generation sizes {:?}, extinct {}",
        run.individuals.len(),
        run.generation_sizes.counts,
        run.extinct
    );
    run.write_lineage_csv(&mut BufWriter::new(File::create("lineage.csv")?))?;

    let i1 = AllometricParams::baseline().with_constants(0.55, 0.3).with_phi(phi);
    let caps = PopulationCaps { max_individuals: 20_000, ..PopulationCaps::default() };
    let (mut alive, mut known) = (0, 0);
    for s in 0..runs {
        if let Some(v) = survives_to_generation(&[1.0], &i1, 20, s, &caps)? {
            known += 1;
            alive += v as u32;
        }
    }
    println!(
        "C_beta = 0.55, C_delta = 0.3, phi_r = {phi}: reached generation 20 in {alive}/{known} runs \
         ({} runs outgrew the individual cap first)",
        runs - known
    );
    Ok(())
}
