//! The operator K: iterates K^k 1 against the closed form 0.8^k, the series
//! for m against Monte Carlo, and the no-jump probability when the total
//! hazard is finite.
//!
//!     cargo run --release --example k_operator

use allopdmp::operator::{mean_offspring_no_loss, mean_offspring_series, survival_exponent, KOperator};
use allopdmp::{estimate_m_mc, AllometricParams};

fn main() -> allopdmp::Result<()> {
    let p = AllometricParams::baseline();
    let iterates = KOperator::new(&p)?.iterates_at(10.0, 10)?;
    for (k, v) in iterates.iter().enumerate() {
        println!("K^{} 1(10) = {v:.12}   0.8^k = {:.12}", k + 1, 0.8f64.powi(k as i32 + 1));
    }

    for (cb, cd) in [(2.0, 0.5), (0.55, 0.3), (0.31, 0.3)] {
        let q = p.with_constants(cb, cd);
        let s = mean_offspring_series(&q, 1.0, 1e-6)?;
        let mc = estimate_m_mc(&q, 1.0, 50_000, 1)?;
        println!(
            "C_beta = {cb}, C_delta = {cd}: series {:.5} ({} terms), MC {:.5} ± {:.5}, no-loss {:.3}",
            s.value,
            s.truncation_k,
            mc.mean,
            mc.stderr,
            mean_offspring_no_loss(&q, 1.0)?
        );
    }

    let thin = p.with_beta(-0.75).with_delta(-0.75).with_constants(0.05, 0.05);
    for xi in [0.1, 1.0, 10.0, 1e3] {
        println!("P(no jump from {xi}) = {:.5}", survival_exponent(&thin, xi)?);
    }
    Ok(())
}
