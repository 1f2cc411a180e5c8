use allopdmp::pdmp::*;
use allopdmp::rates::{eval_rates, AllometricParams};
use allopdmp::rng::PathStreams;
use approx::assert_relative_eq;
use proptest::prelude::*;

fn base() -> AllometricParams {
    AllometricParams::baseline()
}

fn fig4() -> AllometricParams {
    base().with_beta(-0.2)
}

// ∫_a^b (b+d)/g du by composite Simpson in ln u
fn hazard_oracle(p: &AllometricParams, a: f64, b: f64) -> f64 {
    let r = eval_rates(p).unwrap();
    let f = |w: f64| {
        let u = w.exp();
        (r.birth(u) + r.death(u)) / r.net_growth(u) * u
    };
    let mut total = 0.0;
    // split at x0 where the integrand jumps
    let mut cuts = vec![a.ln()];
    if p.x0 > a && p.x0 < b {
        cuts.push(p.x0.ln());
    }
    cuts.push(b.ln());
    for w in cuts.windows(2) {
        let n = 20_000;
        let h = (w[1] - w[0]) / n as f64;
        // endpoints nudged inside so the indicator takes its one-sided limit
        let mut s = f(w[0] + 1e-6 * h) + f(w[1] - 1e-6 * h);
        for i in 1..n {
            s += f(w[0] + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        total += s * h / 3.0;
    }
    total
}

fn bisect_oracle(p: &AllometricParams, xi0: f64, target: f64) -> f64 {
    let (mut lo, mut hi) = (xi0, xi0 * 2.0);
    while hazard_oracle(p, xi0, hi) < target {
        hi *= 2.0;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if hazard_oracle(p, xi0, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn i1_inversion_closed_form_and_oracle() {
    let p = base();
    let bundle = eval_rates(&p).unwrap();
    for (xi0, target) in [(1.0, 0.3), (2.5, 1.7), (10.0, 4.0)] {
        let HazardInversion::Jump { jump_energy, jump_time } = invert_hazard(&bundle, xi0, target).unwrap() else {
            panic!("expected a jump");
        };
        let closed = xi0 * (p.c_r() * target / (p.c_beta + p.c_delta)).exp();
        assert_relative_eq!(jump_energy, closed, max_relative = 1e-10);
        assert_relative_eq!(jump_energy, bisect_oracle(&p, xi0, target), max_relative = 1e-8);
        assert_relative_eq!(allopdmp::rates::flow(&p, xi0, jump_time).unwrap(), jump_energy, max_relative = 1e-10);
    }
}

#[test]
fn inversion_across_birth_threshold_matches_oracle() {
    let p = base().with_beta(0.4).with_x0(3.0);
    let bundle = eval_rates(&p).unwrap();
    for target in [0.05, 0.8, 2.5] {
        let HazardInversion::Jump { jump_energy, .. } = invert_hazard(&bundle, 1.0, target).unwrap() else {
            panic!("expected a jump");
        };
        assert_relative_eq!(jump_energy, bisect_oracle(&p, 1.0, target), max_relative = 1e-7);
    }
}

#[test]
fn tiny_target_barely_moves() {
    let bundle = eval_rates(&base()).unwrap();
    let HazardInversion::Jump { jump_energy, jump_time } = invert_hazard(&bundle, 2.0, 1e-12).unwrap() else {
        panic!()
    };
    assert!(jump_time < 1e-9);
    assert_relative_eq!(jump_energy, 2.0, max_relative = 1e-10);
}

#[test]
fn starving_individual_always_jumps() {
    let p = base().with_phi(0.0);
    let bundle = eval_rates(&p).unwrap();
    for target in [0.1, 10.0, 100.0] {
        assert!(matches!(invert_hazard(&bundle, 1.0, target).unwrap(), HazardInversion::Jump { .. }));
    }
}

#[test]
fn starving_life_is_one_death() {
    let p = base().with_phi(0.0);
    for seed in 0..20 {
        let t = simulate_trajectory(&p, p.x0, &PathStreams::new(seed, 0), &Caps::default()).unwrap();
        assert_eq!(t.events.len(), 1);
        assert_eq!(t.terminal, EventKind::Death);
        assert_eq!(t.n_births, 0);
        assert!(t.biologically_relevant());
    }
}

#[test]
fn figure4_lives_mostly_have_few_births() {
    let p = fig4();
    let caps = Caps::natural(&p);
    let mut low = 0;
    let n = 4000;
    for i in 0..n {
        let s = simulate_summary(&p, 1.0, &PathStreams::new(11, i), &caps, Construction::Gillespie).unwrap();
        assert_eq!(s.terminal, EventKind::Death);
        if s.n_births <= 1 {
            low += 1;
        }
    }
    assert!(low as f64 > 0.6 * n as f64, "{low}");
}

#[test]
fn finite_tail_hazard_gives_censored_paths() {
    // β = δ = α − 1 − 0.5: the total hazard to infinity is finite
    let p = base().with_beta(-0.75).with_delta(-0.75).with_constants(0.05, 0.05);
    let caps = Caps::natural(&p);
    let censored = (0..2000)
        .filter(|&i| {
            simulate_summary(&p, p.x0, &PathStreams::new(5, i), &caps, Construction::Gillespie).unwrap().censored
        })
        .count();
    assert!(censored > 0);
}

#[test]
fn same_seed_same_events() {
    let p = fig4();
    let s = PathStreams::new(99, 3);
    let a = simulate_trajectory(&p, 1.0, &s, &Caps::default()).unwrap();
    let b = simulate_trajectory(&p, 1.0, &s, &Caps::default()).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.seed_path, "99:3");
}

#[test]
fn first_jump_is_birth_with_i1_probability() {
    let p = base();
    let n = 100_000u64;
    let births = (0..n)
        .filter(|&i| {
            let t = simulate_trajectory(&p, 1.0, &PathStreams::new(17, i), &Caps { max_events: 2, max_time: 1e6 })
                .unwrap();
            t.events[0].kind == EventKind::Birth
        })
        .count() as f64;
    let q = 0.8;
    let se = (q * (1.0 - q) / n as f64).sqrt();
    assert!((births / n as f64 - q).abs() < 3.0 * se, "{}", births / n as f64);
}

#[test]
fn family_of_one_is_split_clock() {
    let p = base();
    let s = PathStreams::new(4, 4);
    let fam = simulate_coupled_family(&[FamilyMember::new(p, 2.0)], &s, &Caps::default()).unwrap();
    let one = simulate_split_clock(&p, 2.0, &s, &Caps::default()).unwrap();
    assert_eq!(fam[0], one);
}

#[test]
fn family_rejects_mismatched_environment() {
    let a = FamilyMember::new(base(), 1.0);
    let b = FamilyMember::new(base().with_phi(0.9), 1.0);
    assert!(simulate_coupled_family(&[a, b], &PathStreams::new(0, 0), &Caps::default()).is_err());
}

#[test]
fn no_loss_individual_dominates_on_shared_clocks() {
    let p = base().with_beta(0.1);
    let zero = FamilyMember::new(p.with_x0(0.0), 2.0);
    let hat = FamilyMember::new(p.with_x0(1.5), 1.2);
    let caps = Caps::natural(&p);
    for i in 0..2000 {
        let fam = simulate_coupled_family(&[zero, hat], &PathStreams::new(21, i), &caps).unwrap();
        if !fam[0].censored && !fam[1].censored {
            assert!(fam[0].n_births >= fam[1].n_births, "path {i}");
        }
    }
}

#[test]
fn first_birth_inclusion_on_shared_clocks() {
    let p = base().with_beta(0.1);
    let big = FamilyMember::new(p.with_x0(0.5), 3.0);
    let hat = FamilyMember::new(p.with_x0(1.0), 2.0);
    for i in 0..3000 {
        let fam = simulate_coupled_family(&[big, hat], &PathStreams::new(8, i), &Caps::natural(&p)).unwrap();
        if fam[1].events[0].kind == EventKind::Birth {
            assert_eq!(fam[0].events[0].kind, EventKind::Birth, "path {i}");
        }
    }
}

#[test]
fn frozen_rates_agree_until_the_freeze_level() {
    let p = base().with_beta(0.1);
    let level = 6.0;
    let caps = Caps::natural(&p);
    for i in 0..500 {
        let s = PathStreams::new(31, i);
        let fam = simulate_coupled_family(
            &[FamilyMember::new(p, 1.0), FamilyMember::new(p, 1.0).frozen_at(level)],
            &s,
            &caps,
        )
        .unwrap();
        let (a, b) = (&fam[0], &fam[1]);
        for (k, (ea, eb)) in a.events.iter().zip(&b.events).enumerate() {
            if max_energy_at_jumps(a, k + 1).unwrap() > level {
                break;
            }
            assert_eq!(ea.kind, eb.kind, "path {i} event {k}");
            assert_relative_eq!(ea.energy_before, eb.energy_before, max_relative = 1e-9);
        }
    }
}

#[test]
fn max_energy_statistic() {
    let p = fig4();
    let t = simulate_trajectory(&p, 1.0, &PathStreams::new(2, 9), &Caps::default()).unwrap();
    assert_eq!(max_energy_at_jumps(&t, 1), Some(t.events[0].energy_before));
    let mut prev = 0.0;
    for k in 1..=t.events.len() {
        let s = max_energy_at_jumps(&t, k).unwrap();
        assert!(s >= prev);
        prev = s;
    }
}

#[test]
fn constant_test_function_has_zero_residual() {
    let p = fig4();
    let est = martingale_residual(&p, &ConstantFn(2.5), 5.0, 500, 1).unwrap();
    assert_eq!(est.mean, 0.0);
    assert_eq!(est.stderr, 0.0);
}

#[test]
fn martingale_residual_is_centred() {
    let p = fig4();
    let est = martingale_residual(&p, &SaturatingFn { m: 3.0 }, 5.0, 20_000, 3).unwrap();
    assert!(est.mean.abs() < 3.0 * est.stderr, "{} ± {}", est.mean, est.stderr);
    let bigger = martingale_residual(&p, &SaturatingFn { m: 3.0 }, 5.0, 40_000, 3).unwrap();
    let ratio = est.stderr / bigger.stderr;
    assert!((ratio - std::f64::consts::SQRT_2).abs() < 0.15, "{ratio}");
}

#[test]
fn martingale_rejects_non_admissible_tails() {
    let p = base().with_beta(-0.75).with_delta(-0.75);
    assert!(martingale_residual(&p, &ConstantFn(1.0), 1.0, 10, 0).is_err());
}

#[test]
fn csv_rows() {
    let p = base().with_phi(0.0);
    let t = simulate_trajectory(&p, 1.0, &PathStreams::new(0, 0), &Caps::default()).unwrap();
    let mut buf = Vec::new();
    t.write_csv(7, &mut buf, true).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("path_id,time,kind,energy_before,energy_after"));
    let row = lines.next().unwrap();
    assert!(row.starts_with("7,") && row.contains(",death,") && row.ends_with(','));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn trajectory_invariants(seed in 0u64..1_000_000, beta in -0.25f64..0.6, xi0 in 0.2f64..20.0, phi in 0.5f64..1.0) {
        let p = base().with_beta(beta).with_phi(phi);
        let t = simulate_trajectory(&p, xi0, &PathStreams::new(seed, 0), &Caps::natural(&p)).unwrap();
        let mut last = -1.0;
        for (i, e) in t.events.iter().enumerate() {
            prop_assert!(e.time > last || (i == 0 && e.time >= 0.0));
            last = e.time;
            prop_assert!(e.energy_before > 0.0);
            if e.kind == EventKind::Birth {
                prop_assert!(e.energy_before > p.x0);
                let after = e.energy_after.unwrap();
                prop_assert!(after > 0.0);
                prop_assert!((after - (e.energy_before - p.x0)).abs() <= 1e-12 * e.energy_before);
            } else {
                prop_assert!(e.energy_after.is_none());
                prop_assert_eq!(i, t.events.len() - 1);
            }
        }
        prop_assert_eq!(t.n_births as usize, t.events.iter().filter(|e| e.kind == EventKind::Birth).count());
        prop_assert_eq!(t.terminal, t.events.last().unwrap().kind);
        if t.terminal == EventKind::Death {
            prop_assert_eq!(t.t_death, Some(last));
        }
    }
}
