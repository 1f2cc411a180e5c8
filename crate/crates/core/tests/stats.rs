use allopdmp::pdmp::{Caps, Construction};
use allopdmp::rates::AllometricParams;
use allopdmp::stats::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn base() -> AllometricParams {
    AllometricParams::baseline()
}

fn est(mean: f64, stderr: f64, n_censored: usize) -> EstimateResult {
    EstimateResult {
        mean,
        stderr,
        n: 1000,
        n_censored,
        running_means: vec![],
        tail_index: None,
        ci_low: mean - 3.0 * stderr,
        ci_high: mean + 3.0 * stderr,
        z: 3.0,
    }
}

#[test]
fn starving_mean_is_zero() {
    let e = estimate_m_mc(&base().with_phi(0.0), 1.0, 1000, 1).unwrap();
    assert_eq!(e.mean, 0.0);
    assert_eq!(e.stderr, 0.0);
    assert_eq!(e.n_censored, 0);
    assert_eq!(criticality_test(&e, 3.0), Criticality::Subcritical);
}

#[test]
fn baseline_mean_below_birth_death_ratio() {
    // with phi_r = 2/3 (C_R = 1/3) the mean is about 0.86; with C_R = 1 it is in (1, 4)
    let e = estimate_m_mc(&base(), 1.0, 20_000, 1).unwrap();
    assert!(e.mean > 0.8 && e.mean < 1.0, "{}", e.mean);
    let f = estimate_m_mc(&base().with_phi(1.0), 1.0, 20_000, 1).unwrap();
    assert!(f.mean - 3.0 * f.stderr > 1.0 && f.mean < 4.0, "{}", f.mean);
    assert!(e.ci_low < e.mean && e.mean < e.ci_high);
    assert_eq!(e.running_means.last().unwrap().n, 20_000);
    assert!(estimate_m_mc(&base(), 1.0, 99, 1).is_err());
}

#[test]
fn criticality_cases() {
    assert_eq!(criticality_test(&est(1.5, 0.1, 0), 3.0), Criticality::Supercritical);
    assert_eq!(criticality_test(&est(1.5, 0.2, 0), 3.0), Criticality::Inconclusive);
    assert_eq!(criticality_test(&est(0.5, 0.1, 0), 3.0), Criticality::Subcritical);
    // censoring never allows a subcritical call
    assert_eq!(criticality_test(&est(0.5, 0.1, 3), 3.0), Criticality::Inconclusive);
    assert_eq!(criticality_test(&est(1.5, 0.1, 3), 3.0), Criticality::Supercritical);
    assert_eq!(Criticality::Subcritical.as_str(), "subcritical");
}

#[test]
fn stderr_excludes_censored_paths() {
    let samples = [0.0, 2.0, 0.0, 2.0];
    let e = EstimateResult::from_samples(&samples, 2, 3.0);
    // sd = sqrt(4/3), effective n = 2
    assert!((e.stderr - (4.0f64 / 3.0).sqrt() / 2f64.sqrt()).abs() < 1e-14);
}

#[test]
fn estimates_are_unbiased_across_seeds() {
    // the grand mean over independent seeds stays within 3σ of a long run
    let p = base().with_constants(0.55, 0.3);
    let long = estimate_m_mc(&p, 1.0, 200_000, 1234).unwrap();
    let per: Vec<f64> = (0..10).map(|s| estimate_m_mc(&p, 1.0, 10_000, 500 + s).unwrap().mean).collect();
    let grand = per.iter().sum::<f64>() / per.len() as f64;
    let se = (long.stderr.powi(2) * 20.0 / 10.0 + long.stderr.powi(2)).sqrt();
    assert!((grand - long.mean).abs() < 3.0 * se, "{grand} vs {}", long.mean);
}

#[test]
fn constructions_give_the_same_mean() {
    let p = base().with_beta(0.1);
    let a = estimate_m_mc(&p, 1.0, 20_000, 3).unwrap();
    let opts = McOptions { construction: Construction::SplitClock, ..McOptions::default() };
    let b = estimate_m_mc_with(&p, 1.0, 20_000, 4, &opts).unwrap();
    assert!((a.mean - b.mean).abs() < 3.0 * (a.stderr.powi(2) + b.stderr.powi(2)).sqrt());
}

#[test]
fn tight_caps_are_reported() {
    let opts = McOptions { caps: Some(Caps { max_events: 3, max_time: 1e6 }), ..McOptions::default() };
    let e = estimate_m_mc_with(&base(), 1.0, 2000, 1, &opts).unwrap();
    assert!(e.n_censored > 0);
    assert_ne!(criticality_test(&e, 3.0), Criticality::Subcritical);
}

#[test]
fn light_tail_has_no_plateau_problem() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    // geometric(1/2) counts
    let v: Vec<f64> = (0..20_000)
        .map(|_| {
            let mut k = 0.0;
            while rng.random::<f64>() < 0.5 {
                k += 1.0;
            }
            k
        })
        .collect();
    let h = heavy_tail_diagnostic(&v).unwrap();
    assert!(!h.plateau_flag);
    assert!(h.hill_estimate.unwrap() > 2.0);
    assert!(heavy_tail_diagnostic(&v[..999]).is_err());
}

#[test]
fn pareto_tail_index_is_recovered() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let a = 1.5;
    let v: Vec<f64> = (0..50_000).map(|_| (1.0 - rng.random::<f64>()).powf(-1.0 / a)).collect();
    let h = heavy_tail_diagnostic(&v).unwrap();
    for est in [h.hill_estimate, h.hill_top_1pct, h.hill_top_10pct] {
        let e = est.unwrap();
        assert!((e - a).abs() < 0.2 * a, "{e}");
    }
}

#[test]
fn infinite_mean_sample_trips_the_plateau_flag() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let v: Vec<f64> = (0..20_000).map(|_| (1.0 - rng.random::<f64>()).powf(-1.0 / 0.7)).collect();
    assert!(heavy_tail_diagnostic(&v).unwrap().plateau_flag);
}

#[test]
fn identical_and_disjoint_histograms() {
    let a = Histogram::from_values([0, 1, 1, 2, 2, 2, 3, 0, 1, 2].repeat(20));
    let c = compare_distributions(&a, &a).unwrap();
    assert_eq!(c.tv_distance, 0.0);
    assert!((c.p_value - 1.0).abs() < 1e-12);
    let b = Histogram::from_values([10, 11, 12, 13].repeat(50));
    let c = compare_distributions(&a, &b).unwrap();
    assert!((c.tv_distance - 1.0).abs() < 1e-12);
    assert!(c.p_value < 1e-10);
    assert!(compare_distributions(&a, &Histogram::default()).is_err());
}

#[test]
fn histogram_summaries() {
    let h = Histogram::from_values([0, 0, 0, 1, 4]);
    assert_eq!(h.total(), 5);
    assert_eq!(h.mode(), Some(0));
    assert_eq!(h.max_value(), Some(4));
    assert!((h.mean() - 1.0).abs() < 1e-15);
    assert!((h.probability(0) - 0.6).abs() < 1e-15);
}

#[test]
fn one_cell_phase_grid() {
    let grid = PhaseGrid { ratios: vec![1.2], columns: vec![0.5] };
    let p = base().with_beta(-0.25).with_delta(-0.25);
    let d = phase_diagram_sweep(&grid, &p, 2000, 1).unwrap();
    assert_eq!(d.cells.len(), 1);
    let cell = d.cells[0];
    assert!((cell.c_delta - 0.5 * p.gap()).abs() < 1e-15);
    assert!((cell.c_beta - 1.2 * cell.c_delta).abs() < 1e-15);
    assert_eq!(d.boundary.len(), 1);
    let mut buf = Vec::new();
    d.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.starts_with("c_beta_over_c_delta,c_delta_over_gap,verdict,m_hat,stderr"));
    assert!(phase_diagram_sweep(&grid, &base().with_beta(0.3), 200, 1).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tv_is_symmetric_and_bounded(a in prop::collection::vec(0u64..6, 20..200), b in prop::collection::vec(0u64..6, 20..200)) {
        let ha = Histogram::from_values(a);
        let hb = Histogram::from_values(b);
        let x = compare_distributions(&ha, &hb).unwrap();
        let y = compare_distributions(&hb, &ha).unwrap();
        prop_assert!((x.tv_distance - y.tv_distance).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&x.tv_distance));
        prop_assert!((0.0..=1.0).contains(&x.p_value));
    }

    #[test]
    fn ci_brackets_mean(v in prop::collection::vec(0.0f64..50.0, 2..300)) {
        let e = EstimateResult::from_samples(&v, 0, 3.0);
        prop_assert!(e.ci_low <= e.mean && e.mean <= e.ci_high);
        prop_assert!(e.running_means.windows(2).all(|w| w[0].n < w[1].n));
    }
}
