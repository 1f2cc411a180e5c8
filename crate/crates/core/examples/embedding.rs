//! Generation sizes of the population against the individual offspring law.
//!
//!     cargo run --release --example embedding [runs] [repetitions]

use allopdmp::population::{embedding_test, offspring_law_mc};
use allopdmp::AllometricParams;

fn main() -> allopdmp::Result<()> {
    let mut args = std::env::args().skip(1);
    let runs: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(2000);
    let reps: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(5);
    let p = AllometricParams::baseline().with_beta(-0.2);

    let nu = offspring_law_mc(&p, runs, 1)?;
    let law: Vec<String> = (0..=nu.max_value().unwrap_or(0).min(8)).map(|k| format!("{k}:{:.3}", nu.probability(k))).collect();
    println!("offspring law {}", law.join(" "));

    let report = embedding_test(&p, runs, reps, 2, 0.01)?;
    for (i, r) in report.repetitions.iter().enumerate() {
        println!("rep {i}: p(first) {:.3} p(second) {:.3} tv {:.4}/{:.4}", r.p_first, r.p_second, r.tv_first, r.tv_second);
    }
    println!("{}/{} repetitions pass at level {}", report.n_pass, reps, report.level);
    Ok(())
}
