//! Shared-clock coupling: an individual without birth cost started higher
//! never has fewer births than one paying x0 per birth.
//!
//!     cargo run --release --example coupling [pairs]

use allopdmp::pdmp::{simulate_coupled_family, Caps, FamilyMember};
use allopdmp::{AllometricParams, PathStreams};

fn main() -> allopdmp::Result<()> {
    let pairs: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(10_000);
    let p = AllometricParams::baseline().with_beta(0.1);
    let free = FamilyMember::new(p.with_x0(0.0), 2.0);
    let paying = FamilyMember::new(p.with_x0(1.5), 1.2);
    let caps = Caps::natural(&p.with_x0(1.5));
    let (mut violations, mut gap, mut used) = (0, 0u64, 0);
    for i in 0..pairs {
        let fam = simulate_coupled_family(&[free, paying], &PathStreams::new(9, i), &caps)?;
        if fam.iter().any(|t| t.censored) {
            continue;
        }
        used += 1;
        if fam[0].n_births < fam[1].n_births {
            violations += 1;
        }
        gap += fam[0].n_births.saturating_sub(fam[1].n_births);
    }
    println!("{used} uncensored pairs, {violations} violations, mean extra births {:.3}", gap as f64 / used as f64);
    Ok(())
}
