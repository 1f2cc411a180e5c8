//! Mean offspring number m(x0) against x0 over 200 decades.
//!
//!     cargo run --release --example offspring_vs_x0 -- <beta> <c_beta> <c_delta> [n] [phi_r]
//!
//! `-0.2 2 0.5` gives a panel of the beta sweep (beta outside I2: subcritical
//! for small x0); `-0.25 0.55 0.3` a panel of the I1 sweep, where m does not
//! depend on x0 and stays below C_beta/C_delta. Output is CSV on stdout.

use allopdmp::stats::criticality_test;
use allopdmp::{estimate_m_mc, AllometricParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let a: Vec<String> = std::env::args().skip(1).collect();
    let num = |i: usize, d: f64| a.get(i).map(|s| s.parse::<f64>()).transpose().map(|v| v.unwrap_or(d));
    let beta = num(0, -0.25)?;
    let c_beta = num(1, 0.55)?;
    let c_delta = num(2, 0.3)?;
    let n = num(3, 50_000.0)? as usize;
    let phi = num(4, 2.0 / 3.0)?;

    let base = AllometricParams::baseline().with_beta(beta).with_constants(c_beta, c_delta).with_phi(phi);
    println!("x0,m_hat,stderr,verdict,bound");
    for k in 0..41 {
        let x0 = 10f64.powf(-100.0 + 5.0 * k as f64);
        let p = base.with_x0(x0);
        let est = estimate_m_mc(&p, x0, n, k as u64)?;
        println!(
            "{x0:e},{:.5},{:.5},{},{}",
            est.mean,
            est.stderr,
            criticality_test(&est, 3.0).as_str(),
            c_beta / c_delta
        );
    }
    Ok(())
}
