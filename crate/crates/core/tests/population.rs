use allopdmp::population::*;
use allopdmp::rates::AllometricParams;
use allopdmp::stats::compare_distributions;
use std::collections::HashSet;

fn base() -> AllometricParams {
    AllometricParams::baseline()
}

fn small_caps() -> PopulationCaps {
    PopulationCaps { max_individuals: 2000, max_time: 1e4, max_generation: None, max_events: 10_000 }
}

#[test]
fn no_founders_is_extinct() {
    let run = simulate_population(&[], &base(), 1, &small_caps()).unwrap();
    assert!(run.individuals.is_empty() && run.extinct && !run.censored);
    assert!(run.generation_sizes.counts.is_empty());
}

#[test]
fn starving_founder_dies_alone() {
    let run = simulate_population(&[1.0], &base().with_phi(0.0), 4, &small_caps()).unwrap();
    assert_eq!(run.individuals.len(), 1);
    assert_eq!(run.generation_sizes.counts, vec![1]);
    assert!(run.extinct);
    let mut buf = Vec::new();
    run.write_lineage_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("label,parent,birth_time,death_time,n_births"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "1");
    assert_eq!(row[1], "");
    assert_eq!(row[4], "0");
}

#[test]
fn labels_are_consistent() {
    let p = base().with_beta(-0.2);
    for seed in 0..10 {
        let run = simulate_population(&[1.0, 2.0, 0.5], &p, seed, &small_caps()).unwrap();
        let labels: HashSet<Vec<u32>> = run.individuals.iter().map(|i| i.label.clone()).collect();
        assert_eq!(labels.len(), run.individuals.len());
        for ind in &run.individuals {
            match &ind.parent {
                None => assert_eq!(ind.label.len(), 1),
                Some(parent) => {
                    assert!(labels.contains(parent));
                    assert_eq!(&ind.label[..ind.label.len() - 1], parent.as_slice());
                    let par = run.individuals.iter().find(|q| &q.label == parent).unwrap();
                    assert!(ind.birth_time >= par.birth_time);
                    assert_eq!(ind.start_energy, p.x0);
                }
            }
        }
        // children of each complete parent are numbered 1..=n_births
        for ind in run.individuals.iter().filter(|i| i.complete()) {
            let kids = run.individuals.iter().filter(|c| c.parent.as_ref() == Some(&ind.label)).count() as u64;
            assert_eq!(kids, ind.n_births().unwrap());
        }
    }
}

#[test]
fn first_generation_counts_founder_births() {
    let p = base().with_beta(-0.2);
    let founders = [1.0, 3.0];
    for seed in 0..10 {
        let run = simulate_population(&founders, &p, seed, &small_caps()).unwrap();
        if run.generation_sizes.truncated_at.is_some_and(|t| t <= 1) {
            continue;
        }
        let births: u64 = run.individuals.iter().filter(|i| i.generation() == 0).map(|i| i.n_births().unwrap()).sum();
        assert_eq!(run.generation_sizes.counts.get(1).copied().unwrap_or(0), births);
        assert_eq!(run.generation_sizes, generation_sizes(&run));
    }
}

#[test]
fn same_seed_same_population_and_bigger_caps_only_add() {
    let p = base().with_beta(-0.2);
    let tight = PopulationCaps { max_individuals: 50, ..small_caps() };
    let a = simulate_population(&[1.0], &p, 21, &tight).unwrap();
    let b = simulate_population(&[1.0], &p, 21, &tight).unwrap();
    assert_eq!(a, b);
    let loose = simulate_population(&[1.0], &p, 21, &small_caps()).unwrap();
    let done = |r: &PopulationRun| -> HashSet<Vec<u32>> {
        r.individuals.iter().filter(|i| i.complete()).map(|i| i.label.clone()).collect()
    };
    assert!(done(&a).is_subset(&done(&loose)));
    let sa = &a.generation_sizes.counts;
    let sl = &loose.generation_sizes.counts;
    let upto = a.generation_sizes.truncated_at.unwrap_or(sa.len()).min(sa.len());
    assert_eq!(&sa[..upto], &sl[..upto]);
}

#[test]
fn bad_founder_energy_is_rejected() {
    assert!(simulate_population(&[1.0, -2.0], &base(), 1, &small_caps()).is_err());
    assert!(simulate_population(&[f64::INFINITY], &base(), 1, &small_caps()).is_err());
}

#[test]
fn offspring_law_is_point_mass_without_intake() {
    let nu = offspring_law_mc(&base().with_phi(0.0), 500, 2).unwrap();
    assert_eq!(nu.total(), 500);
    assert_eq!(nu.probability(0), 1.0);
    assert_eq!(nu.mean(), 0.0);
}

#[test]
fn offspring_law_matches_population_first_generation() {
    let p = base().with_beta(-0.2);
    let nu = offspring_law_mc(&p, 3000, 8).unwrap();
    let caps = PopulationCaps { max_generation: Some(0), ..small_caps() };
    let mut y1 = allopdmp::stats::Histogram::default();
    for i in 0..3000u64 {
        let run = simulate_population(&[p.x0], &p, 1000 + i, &caps).unwrap();
        y1.add(run.generation_sizes.counts.get(1).copied().unwrap_or(0));
    }
    assert!(compare_distributions(&y1, &nu).unwrap().p_value > 1e-3);
}

#[test]
fn survival_depends_on_criticality() {
    let dead = survives_to_generation(&[1.0], &base().with_phi(0.0), 1, 3, &small_caps()).unwrap();
    assert_eq!(dead, Some(false));
    assert_eq!(survives_to_generation(&[1.0], &base(), 0, 3, &small_caps()).unwrap(), Some(true));
    assert_eq!(survives_to_generation(&[], &base(), 2, 3, &small_caps()).unwrap(), Some(false));
}

#[test]
fn embedding_passes_on_a_small_run() {
    let report = embedding_test(&base().with_beta(-0.2), 800, 2, 5, 0.01).unwrap();
    assert_eq!(report.repetitions.len(), 2);
    for r in &report.repetitions {
        assert!((0.0..=1.0).contains(&r.p_value));
        assert!(r.p_value >= r.p_first.min(r.p_second));
    }
    assert!(report.n_pass >= 1);
}

#[test]
fn figure8_lineages_reach_generation_twenty() {
    let p = base().with_constants(0.55, 0.3);
    let caps = PopulationCaps { max_individuals: 20_000, ..PopulationCaps::default() };
    let mut survived = 0;
    for seed in 0..1000 {
        if survives_to_generation(&[p.x0], &p, 20, seed, &caps).unwrap() == Some(true) {
            survived += 1;
        }
    }
    assert!(survived > 0);
}
