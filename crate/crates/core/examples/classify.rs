//! Admissibility of allometric exponents around the I1/I2 boundaries.
//!
//!     cargo run --example classify

use allopdmp::{classify_regime, AllometricParams, Verdict};

fn main() {
    println!("{:>6} {:>6} {:>6}  verdict", "beta", "delta", "gamma");
    for (b, d, g) in [
        (-0.25, -0.25, 0.75),
        (-0.3, -0.25, 0.75),
        (-0.2, -0.25, 0.75),
        (0.24, -0.25, 0.75),
        (0.25, -0.25, 0.75),
        (1.0, -0.25, 0.75),
        (-0.25, -0.3, 0.75),
        (-0.25, -0.25, 0.8),
    ] {
        let r = classify_regime(&AllometricParams::baseline().with_beta(b).with_delta(d).with_gamma(g));
        let v = match &r.verdict {
            Verdict::NecessaryConditionsViolated(why) => format!("violates {}", why.join("; ")),
            other => format!("{other:?}"),
        };
        println!("{b:>6} {d:>6} {g:>6}  {v}");
    }
}
