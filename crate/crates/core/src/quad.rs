//! Adaptive Gauss-Kronrod (7/15) quadrature on finite intervals.

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct Quad {
    pub value: f64,
    pub abs_error: f64,
    pub converged: bool,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Integrate `f` over `[a, b]` until the estimated error is below
/// `max(abs_tol, rel_tol * |I|)` or the subdivision budget runs out.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> Quad {
    if a == b {
        return Quad { value: 0.0, abs_error: 0.0, converged: true };
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let (v, e) = gk15(&f, lo, hi);
    let mut parts = vec![(lo, hi, v, e)];
    let mut total = v;
    let mut err = e;
    let max_parts = 4000;
    while err > abs_tol.max(rel_tol * total.abs()) && parts.len() < max_parts {
        // bisect the interval with the largest error estimate
        let (idx, _) = parts
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, p)| if p.3 > acc.1 { (i, p.3) } else { acc });
        let (pa, pb, pv, pe) = parts.swap_remove(idx);
        let mid = 0.5 * (pa + pb);
        if mid <= pa || mid >= pb {
            parts.push((pa, pb, pv, 0.0));
            err -= pe;
            continue;
        }
        let (v1, e1) = gk15(&f, pa, mid);
        let (v2, e2) = gk15(&f, mid, pb);
        total += v1 + v2 - pv;
        err += e1 + e2 - pe;
        parts.push((pa, mid, v1, e1));
        parts.push((mid, pb, v2, e2));
    }
    // re-sum to shed accumulated rounding from the running updates
    let value: f64 = parts.iter().map(|p| p.2).sum();
    let abs_error: f64 = parts.iter().map(|p| p.3).sum();
    Quad {
        value: sign * value,
        abs_error,
        converged: abs_error <= abs_tol.max(rel_tol * value.abs()) * 1.0001,
    }
}

/// Integrate over consecutive pieces `[points[i], points[i+1]]`.
pub fn integrate_pieces<F: Fn(f64) -> f64>(f: F, points: &[f64], rel_tol: f64, abs_tol: f64) -> Quad {
    let mut out = Quad { value: 0.0, abs_error: 0.0, converged: true };
    for w in points.windows(2) {
        let q = integrate(&f, w[0], w[1], rel_tol, abs_tol);
        out.value += q.value;
        out.abs_error += q.abs_error;
        out.converged &= q.converged;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let q = integrate(|x| 3.0 * x * x, 0.0, 2.0, 1e-12, 1e-14);
        assert!((q.value - 8.0).abs() < 1e-13);
    }

    #[test]
    fn reversed_bounds_flip_sign() {
        let q = integrate(f64::exp, 1.0, 0.0, 1e-12, 1e-14);
        assert!((q.value + (1f64.exp() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn endpoint_singularity_converges() {
        let q = integrate(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, 1e-10, 1e-12);
        assert!((q.value - 2.0).abs() < 1e-8, "{}", q.value);
    }
}
