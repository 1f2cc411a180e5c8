//! Dormand-Prince 5(4) integrator for scalar autonomous ODEs.

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OdeOutcome {
    /// Reached the requested end time with this state.
    Reached(f64),
    /// The state left `[lo, hi]` at approximately this time.
    Escaped { time: f64, state: f64 },
    /// Step size collapsed below round-off.
    Stalled { time: f64, state: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { rtol: 1e-10, atol: 1e-12, lo: 1e-300, hi: 1e300 }
    }
}

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrate `y' = f(y)` from `y0` over `[0, t_end]`.
pub fn solve<F: Fn(f64) -> f64>(f: F, y0: f64, t_end: f64, opts: OdeOptions) -> OdeOutcome {
    let mut t = 0.0;
    let mut y = y0;
    if t_end <= 0.0 {
        return OdeOutcome::Reached(y0);
    }
    let f0 = f(y0);
    let scale0 = opts.atol + opts.rtol * y0.abs();
    let mut h = if f0 == 0.0 { t_end } else { (0.01 * scale0 / f0.abs()).max(1e-6 * t_end) }.min(t_end);
    let mut k = [0.0f64; 7];
    loop {
        if t + h > t_end {
            h = t_end - t;
        }
        k[0] = f(y);
        for s in 1..7 {
            let mut acc = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                acc += h * A[s][j] * kj;
            }
            k[s] = f(acc);
        }
        let y5 = y + h * (0..7).map(|j| B5[j] * k[j]).sum::<f64>();
        let y4 = y + h * (0..7).map(|j| B4[j] * k[j]).sum::<f64>();
        let sc = opts.atol + opts.rtol * y.abs().max(y5.abs());
        let err = ((y5 - y4) / sc).abs();
        if err <= 1.0 && y5.is_finite() {
            t += h;
            y = y5;
            if y < opts.lo || y > opts.hi {
                return OdeOutcome::Escaped { time: t, state: y };
            }
            if t >= t_end {
                return OdeOutcome::Reached(y);
            }
        }
        let fac = if err == 0.0 || !err.is_finite() {
            if y5.is_finite() { 5.0 } else { 0.2 }
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= fac;
        if h < 1e-15 * t.max(1e-300) || h == 0.0 {
            return OdeOutcome::Stalled { time: t, state: y };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_growth() {
        match solve(|y| y, 1.0, 2.0, OdeOptions::default()) {
            OdeOutcome::Reached(y) => assert!((y / 2f64.exp() - 1.0).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn blow_up_is_detected() {
        // y' = y^2, y(0) = 1 explodes at t = 1
        match solve(|y| y * y, 1.0, 2.0, OdeOptions { hi: 1e12, ..OdeOptions::default() }) {
            OdeOutcome::Escaped { time, .. } => assert!((time - 1.0).abs() < 1e-6),
            other => panic!("{other:?}"),
        }
    }
}
