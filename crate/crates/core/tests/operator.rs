use allopdmp::operator::*;
use allopdmp::pdmp::{simulate_trajectory, Caps, EventKind};
use allopdmp::rates::AllometricParams;
use allopdmp::rng::PathStreams;
use allopdmp::stats::estimate_m_mc;
use approx::assert_relative_eq;

fn base() -> AllometricParams {
    AllometricParams::baseline()
}

fn coarse() -> OperatorOptions {
    OperatorOptions { grid: GridSpec { n_geometric: 512, ..GridSpec::default() }, ..OperatorOptions::default() }
}

#[test]
fn zero_maps_to_zero() {
    let op = KOperator::with_options(&base(), coarse()).unwrap();
    let zero = GridFunction::constant(op.grid(&[]), 0.0).unwrap();
    let k = op.apply(&zero).unwrap();
    assert!(k.values().iter().all(|v| *v == 0.0));
}

#[test]
fn one_step_is_birth_probability_above_x0() {
    let op = KOperator::new(&base()).unwrap();
    for xi in [1.0, 1.5, 40.0, 1e4] {
        assert_relative_eq!(op.eval(|_| 1.0, xi).unwrap(), 0.8, epsilon = 1e-9);
    }
}

#[test]
fn rejects_environments_with_negative_growth() {
    assert!(KOperator::new(&base().with_phi(0.4)).is_err());
    let g = GridFunction::constant(vec![1.0, 2.0], 1.0).unwrap();
    assert!(apply_k(&g, &base().with_phi(0.5)).is_err());
}

#[test]
fn powers_of_k() {
    let p = base();
    assert_eq!(k_power_one(&p, 1.0, 0).unwrap(), 1.0);
    assert_relative_eq!(k_power_one(&p, 2.0, 2).unwrap(), 0.64, epsilon = 1e-9);
    let v = k_power_one(&p, 1.0, 3).unwrap();
    let lower = 0.8f64.powi(3) * 3f64.powf(-(p.c_beta + p.c_delta) / p.c_r());
    assert!(v >= lower && v <= 0.512 + 1e-9, "{v}");
}

#[test]
fn iterates_stay_in_unit_interval_and_decrease() {
    let p = base().with_beta(0.3);
    let op = KOperator::with_options(&p, coarse()).unwrap();
    let mut fs = vec![op.apply(&GridFunction::constant(op.grid(&[]), 1.0).unwrap()).unwrap()];
    for _ in 0..3 {
        fs.push(op.apply(fs.last().unwrap()).unwrap());
    }
    let mut prev: Vec<f64> = vec![1.0; fs[0].values().len()];
    for f in &fs {
        for (v, q) in f.values().iter().zip(&prev) {
            assert!((0.0..=1.0 + 1e-12).contains(v));
            assert!(*v <= q + 1e-9);
        }
        prev = f.values().to_vec();
    }
}

#[test]
fn k_is_linear() {
    let p = base().with_beta(0.1);
    let op = KOperator::new(&p).unwrap();
    let f = |x: f64| 1.0 / (1.0 + x);
    let g = |x: f64| (-x).exp();
    for xi in [0.5, 1.0, 2.0, 7.0] {
        let lhs = op.eval(|x| 0.3 * f(x) + 2.0 * g(x), xi).unwrap();
        let rhs = 0.3 * op.eval(f, xi).unwrap() + 2.0 * op.eval(g, xi).unwrap();
        assert_relative_eq!(lhs, rhs, max_relative = 1e-7, epsilon = 1e-12);
    }
}

#[test]
fn k_matches_first_jump_monte_carlo() {
    let p = base().with_beta(0.3).with_x0(1.0);
    let f = |x: f64| 1.0 / (1.0 + x);
    let xi0 = 0.7;
    let exact = KOperator::new(&p).unwrap().eval(f, xi0).unwrap();
    let n = 100_000u64;
    let caps = Caps { max_events: 2, max_time: 1e9 };
    let samples: Vec<f64> = (0..n)
        .map(|i| {
            let t = simulate_trajectory(&p, xi0, &PathStreams::new(13, i), &caps).unwrap();
            let e = &t.events[0];
            if e.kind == EventKind::Birth {
                f(e.energy_before - p.x0)
            } else {
                0.0
            }
        })
        .collect();
    let mean = samples.iter().sum::<f64>() / n as f64;
    let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let se = (var / n as f64).sqrt();
    assert!((mean - exact).abs() < 3.0 * se, "{mean} vs {exact} ± {se}");
}

#[test]
fn survival_exponent_cases() {
    assert_eq!(survival_exponent(&base(), 1.0).unwrap(), 0.0);
    let p = base().with_beta(-0.75).with_delta(-0.75).with_constants(0.05, 0.05);
    let mut prev = 0.0;
    for xi in [0.5, 1.0, 4.0, 100.0, 1e6] {
        let s = survival_exponent(&p, xi).unwrap();
        assert!(s > prev && s < 1.0);
        prev = s;
    }
    assert!(prev > 0.9);

    let xi0 = 1.0;
    let sigma = survival_exponent(&p, xi0).unwrap();
    let n = 20_000u64;
    let caps = Caps { max_events: 2, max_time: 1e12 };
    let no_jump = (0..n)
        .filter(|&i| {
            let t = simulate_trajectory(&p, xi0, &PathStreams::new(3, i), &caps).unwrap();
            t.events[0].kind == EventKind::CensoredCap
        })
        .count() as f64
        / n as f64;
    let se = (sigma * (1.0 - sigma) / n as f64).sqrt();
    assert!((no_jump - sigma).abs() < 3.5 * se, "{no_jump} vs {sigma}");
}

#[test]
fn series_bounds_in_i1() {
    let s = mean_offspring_series(&base(), 1.0, 1e-6).unwrap();
    assert!(!s.diverged && s.value < 4.0 && s.value > 0.0);
    let p = base().with_constants(0.31, 0.3);
    let s = mean_offspring_series(&p, 1.0, 1e-6).unwrap();
    let q = 0.31 / 0.61;
    assert!(s.value <= 0.31 / 0.3 - 5.0 / 18.0 * q * q);
    assert!(s.value <= 1.0);
}

#[test]
fn series_supercritical_under_sufficient_condition() {
    // C_β > (e − 1) C_δ and C_β + C_δ < C_R, β on the I₂ threshold
    // partial sums are lower bounds for m
    let p = base().with_phi(1.0).with_constants(0.5, 0.2).with_beta(-0.05);
    let terms = KOperator::with_options(&p, coarse()).unwrap().iterates_at(1.0, 12).unwrap();
    let partial: f64 = terms.iter().sum();
    assert!(partial > 1.0, "{terms:?}");
}

#[test]
fn no_loss_mean() {
    let p = base();
    for x in [1e-3, 1.0, 1e3] {
        assert_relative_eq!(mean_offspring_no_loss(&p, x).unwrap(), 4.0, max_relative = 1e-6);
    }
    let beta = 0.25;
    let q = p.with_beta(beta);
    let (cr, cd, cb, a) = (q.c_r(), q.c_delta, q.c_beta, q.alpha);
    for x in [0.5f64, 2.0] {
        let bound = cb * cd / (cr * cr * (beta - a + 1.0) * (a + cd / cr - beta - 1.0)) * x.powf(beta - a + 1.0);
        let v = mean_offspring_no_loss(&q, x).unwrap();
        assert!(v <= bound * (1.0 + 1e-9), "{v} > {bound}");
        let mc = estimate_m_mc(&q.with_x0(x), x, 20_000, 1).unwrap();
        assert!(v >= mc.mean - 3.0 * mc.stderr);
    }
    // lifetime infinite with positive probability
    assert!(mean_offspring_no_loss(&p.with_delta(-0.75), 1.0).is_err());
}

#[test]
fn grid_function_csv_and_json() {
    let g = GridFunction::new(vec![1.0, 2.0, 4.0], vec![0.1, 0.2, 0.4]).unwrap();
    let mut buf = Vec::new();
    g.write_csv(&mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap(), "energy,value\n1,0.1\n2,0.2\n4,0.4\n");
    let back: GridFunction = serde_json::from_str(&serde_json::to_string(&g).unwrap()).unwrap();
    assert_eq!(back, g);
    assert_relative_eq!(back.eval(2.0), 0.2);
    assert!(serde_json::from_str::<GridFunction>(r#"{"nodes":[2,1],"values":[0,0]}"#).is_err());
}

#[test]
fn series_json_shape() {
    let s = SeriesResult { value: 1.5, truncation_k: 12, diverged: false, terms: vec![1.0] };
    let v: serde_json::Value = serde_json::to_value(&s).unwrap();
    assert_eq!(v, serde_json::json!({"value": 1.5, "truncation_k": 12, "diverged": false}));
}
