//! Martingale residual of two bounded test functions at horizon 5: the
//! means should sit inside a few standard errors of zero.
//!
//!     cargo run --release --example martingale [n]

use allopdmp::pdmp::{martingale_residual, HyperbolicFn, SaturatingFn};
use allopdmp::AllometricParams;

fn main() -> allopdmp::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(100_000);
    let p = AllometricParams::baseline().with_beta(-0.2);
    let a = martingale_residual(&p, &SaturatingFn { m: 3.0 }, 5.0, n, 1)?;
    let b = martingale_residual(&p, &HyperbolicFn { scale: 1.0 }, 5.0, n, 2)?;
    println!("m(1 - exp(-x/m)), m = 3: {:+.3e} ± {:.3e}", a.mean, a.stderr);
    println!("x/(x + 1):                {:+.3e} ± {:.3e}", b.mean, b.stderr);
    Ok(())
}
