//! Branching population built from independent individual lives, with
//! Ulam-Harris labels and the embedded generation process.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::dynamics::Dynamics;
use crate::error::{Error, Result};
use crate::pdmp::{summary_with, trajectory_with, Caps, Construction, EventKind, Trajectory};
use crate::rates::AllometricParams;
use crate::rng::PathStreams;
use crate::stats::{compare_distributions, sample_paths, Histogram, McOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    /// Founders are `[i]`; the `j`-th child of `u` is `u` followed by `j`.
    pub label: Vec<u32>,
    pub birth_time: f64,
    pub parent: Option<Vec<u32>>,
    pub start_energy: f64,
    /// `None` when caps stopped the run before this life was simulated.
    pub trajectory: Option<Trajectory>,
}

impl Individual {
    pub fn generation(&self) -> usize {
        self.label.len() - 1
    }

    /// Life ran to a terminal event (death or absorption) inside the caps.
    pub fn complete(&self) -> bool {
        self.trajectory.as_ref().is_some_and(|t| !t.censored)
    }

    pub fn death_time(&self) -> Option<f64> {
        let t = self.trajectory.as_ref()?;
        (!t.censored).then(|| self.birth_time + t.events.last().map_or(0.0, |e| e.time))
    }

    pub fn n_births(&self) -> Option<u64> {
        self.trajectory.as_ref().map(|t| t.n_births)
    }
}

pub fn format_label(label: &[u32]) -> String {
    label.iter().map(u32::to_string).collect::<Vec<_>>().join(".")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PopulationCaps {
    pub max_individuals: usize,
    pub max_time: f64,
    /// Simulate lives up to this generation; their children are recorded
    /// but not simulated.
    pub max_generation: Option<usize>,
    /// Per-life event cap.
    pub max_events: u64,
}

impl Default for PopulationCaps {
    fn default() -> Self {
        PopulationCaps { max_individuals: 100_000, max_time: 1e6, max_generation: None, max_events: 1_000_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationSizes {
    pub counts: Vec<u64>,
    /// First generation whose count may be short because a parent's life
    /// was cut by a cap.
    pub truncated_at: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationRun {
    pub individuals: Vec<Individual>,
    pub generation_sizes: GenerationSizes,
    pub extinct: bool,
    pub censored: bool,
    pub master_seed: u64,
}

impl PopulationRun {
    /// Rows `label,parent,birth_time,death_time,n_births`; empty fields for
    /// unknown values.
    pub fn write_lineage_csv<W: std::io::Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "label,parent,birth_time,death_time,n_births")?;
        for ind in &self.individuals {
            writeln!(
                out,
                "{},{},{},{},{}",
                format_label(&ind.label),
                ind.parent.as_deref().map(format_label).unwrap_or_default(),
                ind.birth_time,
                ind.death_time().map(|t| t.to_string()).unwrap_or_default(),
                ind.n_births().map(|n| n.to_string()).unwrap_or_default(),
            )?;
        }
        Ok(())
    }
}

struct Pending {
    birth_time: f64,
    index: usize,
}

impl PartialEq for Pending {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Pending {}
impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Pending {
    // min-heap on birth time, ties by creation order
    fn cmp(&self, other: &Self) -> Ordering {
        other.birth_time.total_cmp(&self.birth_time).then_with(|| other.index.cmp(&self.index))
    }
}

/// Event-driven population started from `initial_energies`; lives are
/// simulated in order of birth time, each with streams keyed by its label.
pub fn simulate_population(
    initial_energies: &[f64],
    params: &AllometricParams,
    seed: u64,
    caps: &PopulationCaps,
) -> Result<PopulationRun> {
    params.validate()?;
    if let Some(bad) = initial_energies.iter().find(|e| !(**e > 0.0) || !e.is_finite()) {
        return Err(Error::Domain(format!("initial energies must be positive and finite, got {bad}")));
    }
    if caps.max_individuals == 0 || !(caps.max_time > 0.0) || caps.max_events == 0 {
        return Err(Error::Config("population caps must be positive".into()));
    }
    let dynamics = Dynamics::new(params)?;
    let mut individuals: Vec<Individual> = Vec::new();
    let mut heap = BinaryHeap::new();
    let mut overflow = false;
    for (i, &e) in initial_energies.iter().enumerate() {
        if individuals.len() >= caps.max_individuals {
            overflow = true;
            break;
        }
        individuals.push(Individual {
            label: vec![i as u32 + 1],
            birth_time: 0.0,
            parent: None,
            start_energy: e,
            trajectory: None,
        });
        heap.push(Pending { birth_time: 0.0, index: i });
    }

    while let Some(Pending { birth_time, index }) = heap.pop() {
        let gen = individuals[index].generation();
        if caps.max_generation.is_some_and(|g| gen > g) {
            continue;
        }
        let remaining = caps.max_time - birth_time;
        if !(remaining > 0.0) {
            continue;
        }
        let label = individuals[index].label.clone();
        let streams = PathStreams::for_label(seed, &label);
        let life_caps = Caps { max_events: caps.max_events, max_time: remaining };
        let traj = trajectory_with(&dynamics, individuals[index].start_energy, &streams, &life_caps, Construction::Gillespie)
            .map_err(|cause| Error::Lineage { label: format_label(&label), cause: Box::new(cause) })?;
        let mut j = 0u32;
        for ev in traj.events.iter().filter(|e| e.kind == EventKind::Birth) {
            j += 1;
            if individuals.len() >= caps.max_individuals {
                overflow = true;
                break;
            }
            let mut child = label.clone();
            child.push(j);
            let t = birth_time + ev.time;
            let idx = individuals.len();
            individuals.push(Individual {
                label: child,
                birth_time: t,
                parent: Some(label.clone()),
                start_energy: params.x0,
                trajectory: None,
            });
            heap.push(Pending { birth_time: t, index: idx });
        }
        individuals[index].trajectory = Some(traj);
    }

    let mut run = PopulationRun {
        individuals,
        generation_sizes: GenerationSizes { counts: Vec::new(), truncated_at: None },
        extinct: false,
        censored: false,
        master_seed: seed,
    };
    run.generation_sizes = generation_sizes(&run);
    let incomplete = run.individuals.iter().any(|i| !i.complete());
    run.censored = overflow || incomplete;
    run.extinct = !run.censored;
    if overflow {
        // a dropped child belongs at least one generation below its parent
        let last_gen = run.individuals.iter().filter(|i| i.trajectory.is_some()).map(|i| i.generation() + 1).min();
        let t = &mut run.generation_sizes.truncated_at;
        *t = match (*t, last_gen) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
    }
    Ok(run)
}

/// `Υ_n` as the number of labels of length `n + 1`.
pub fn generation_sizes(run: &PopulationRun) -> GenerationSizes {
    let mut counts: Vec<u64> = Vec::new();
    let mut truncated_at: Option<usize> = None;
    for ind in &run.individuals {
        let g = ind.generation();
        if counts.len() <= g {
            counts.resize(g + 1, 0);
        }
        counts[g] += 1;
        if !ind.complete() {
            truncated_at = Some(truncated_at.map_or(g + 1, |t: usize| t.min(g + 1)));
        }
    }
    GenerationSizes { counts, truncated_at }
}

/// Empirical law `ν` of the number of births of lives started at `x₀`.
pub fn offspring_law_mc(params: &AllometricParams, n_paths: usize, seed: u64) -> Result<Histogram> {
    offspring_law_mc_with(params, n_paths, seed, &McOptions::default())
}

pub fn offspring_law_mc_with(params: &AllometricParams, n_paths: usize, seed: u64, opts: &McOptions) -> Result<Histogram> {
    if n_paths == 0 {
        return Err(Error::Config("offspring_law_mc needs at least one path".into()));
    }
    let paths = sample_paths(params, params.x0, n_paths, seed, opts)?;
    let mut h = Histogram::default();
    for p in paths {
        if p.censored {
            h.censored += 1;
        } else {
            h.add(p.n_births);
        }
    }
    Ok(h)
}

/// Whether a single population reaches generation `g`, processing whole
/// generations at a time. `None` when `max_individuals` is hit first.
pub fn survives_to_generation(
    initial_energies: &[f64],
    params: &AllometricParams,
    g: usize,
    seed: u64,
    caps: &PopulationCaps,
) -> Result<Option<bool>> {
    params.validate()?;
    let dynamics = Dynamics::new(params)?;
    let life_caps = Caps { max_events: caps.max_events, max_time: caps.max_time };
    let mut current: Vec<(Vec<u32>, f64)> =
        initial_energies.iter().enumerate().map(|(i, &e)| (vec![i as u32 + 1], e)).collect();
    let mut total = current.len();
    for _ in 0..g {
        if current.is_empty() {
            return Ok(Some(false));
        }
        let mut next = Vec::new();
        for (label, e) in &current {
            let streams = PathStreams::for_label(seed, label);
            let traj = trajectory_with(&dynamics, *e, &streams, &life_caps, Construction::Gillespie)
                .map_err(|cause| Error::Lineage { label: format_label(label), cause: Box::new(cause) })?;
            if traj.censored {
                return Ok(None);
            }
            for j in 1..=traj.n_births as u32 {
                let mut child = label.clone();
                child.push(j);
                next.push((child, params.x0));
            }
        }
        total += next.len();
        if total > caps.max_individuals {
            return Ok(if next.is_empty() { Some(false) } else { None });
        }
        current = next;
    }
    Ok(Some(!current.is_empty()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingRepetition {
    /// `Υ₁` against `ν`.
    pub p_first: f64,
    /// `Υ₂` against sums of `Υ₁`-many independent `ν` draws.
    pub p_second: f64,
    /// Bonferroni combination of both.
    pub p_value: f64,
    pub tv_first: f64,
    pub tv_second: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingReport {
    pub repetitions: Vec<EmbeddingRepetition>,
    pub level: f64,
    pub n_pass: usize,
}

/// Galton-Watson embedding check: single founders at `x₀`, two generations
/// per run, compared with the individual offspring law.
pub fn embedding_test(
    params: &AllometricParams,
    runs: usize,
    repetitions: usize,
    seed: u64,
    level: f64,
) -> Result<EmbeddingReport> {
    params.validate()?;
    let dynamics = Dynamics::new(params)?;
    let natural = Caps::natural(params);
    let caps = PopulationCaps {
        max_generation: Some(1),
        max_time: natural.max_time,
        max_events: natural.max_events,
        ..PopulationCaps::default()
    };
    let mut reps = Vec::with_capacity(repetitions);
    for r in 0..repetitions {
        let rep_seed = crate::rng::child_seed(seed, r as u64);
        let nu = offspring_law_mc(params, runs, rep_seed ^ 0x0FF5_99A1)?;
        let mut y1 = Histogram::default();
        let mut y2 = Histogram::default();
        // Σ_{j ≤ N} N_j built from fresh independent lives, so both samples are exact
        let mut synthetic = Histogram::default();
        let synth_seed = rep_seed ^ 0x5EED_0002;
        let mut next_life = 0u64;
        let mut fresh = || -> Result<Option<u64>> {
            let s = summary_with(&dynamics, params.x0, &PathStreams::new(synth_seed, next_life), &natural, Construction::Gillespie)?;
            next_life += 1;
            Ok((!s.censored).then_some(s.n_births))
        };
        for i in 0..runs {
            let run = simulate_population(&[params.x0], params, crate::rng::child_seed(rep_seed, i as u64), &caps)?;
            let gs = &run.generation_sizes;
            // lives hitting their own caps leave Υ₁ or Υ₂ unknown
            if gs.truncated_at.is_some_and(|t| t <= 2) {
                continue;
            }
            y1.add(gs.counts.get(1).copied().unwrap_or(0));
            y2.add(gs.counts.get(2).copied().unwrap_or(0));
            let Some(k) = fresh()? else { continue };
            let mut total = Some(0u64);
            for _ in 0..k {
                total = match (total, fresh()?) {
                    (Some(t), Some(c)) => Some(t + c),
                    _ => None,
                };
            }
            if let Some(t) = total {
                synthetic.add(t);
            }
        }
        let c1 = compare_distributions(&y1, &nu)?;
        let c2 = compare_distributions(&y2, &synthetic)?;
        reps.push(EmbeddingRepetition {
            p_first: c1.p_value,
            p_second: c2.p_value,
            p_value: (2.0 * c1.p_value.min(c2.p_value)).min(1.0),
            tv_first: c1.tv_distance,
            tv_second: c2.tv_distance,
        });
    }
    let n_pass = reps.iter().filter(|r| r.p_value > level).count();
    Ok(EmbeddingReport { repetitions: reps, level, n_pass })
}
