//! Monte Carlo estimation of offspring means, criticality calls, tail
//! diagnostics, two-sample comparisons and the I₁ phase-diagram sweep.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::dynamics::Dynamics;
use crate::error::{Error, Result};
use crate::pdmp::{summary_with, Caps, Construction, PathSummary};
use crate::rates::{AllometricParams, EXPONENT_EPS};
use crate::rng::{child_seed, PathStreams};

pub const DEFAULT_Z: f64 = 3.0;

/// Relative width of the Cauchy window used by the plateau test.
pub const PLATEAU_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunningMean {
    pub n: usize,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
    pub n_censored: usize,
    pub running_means: Vec<RunningMean>,
    pub tail_index: Option<f64>,
    pub ci_low: f64,
    pub ci_high: f64,
    pub z: f64,
}

impl EstimateResult {
    /// Mean over all samples; the standard error divides the sample standard
    /// deviation by `√(n − n_censored)`.
    pub fn from_samples(samples: &[f64], n_censored: usize, z: f64) -> Self {
        let n = samples.len();
        let stride = (n / 500).max(1);
        let mut running_means = Vec::with_capacity(n / stride + 1);
        let mut sum = 0.0;
        for (i, &v) in samples.iter().enumerate() {
            sum += v;
            if (i + 1) % stride == 0 || i + 1 == n {
                running_means.push(RunningMean { n: i + 1, mean: sum / (i + 1) as f64 });
            }
        }
        let mean = if n > 0 { sum / n as f64 } else { f64::NAN };
        let var = if n > 1 {
            samples.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64
        } else {
            f64::NAN
        };
        let effective = n.saturating_sub(n_censored);
        let stderr = if effective > 0 { var.sqrt() / (effective as f64).sqrt() } else { f64::INFINITY };
        EstimateResult {
            mean,
            stderr,
            n,
            n_censored,
            running_means,
            tail_index: None,
            ci_low: mean - z * stderr,
            ci_high: mean + z * stderr,
            z,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McOptions {
    /// `None` means [`Caps::natural`] for the parameters at hand.
    pub caps: Option<Caps>,
    pub z: f64,
    pub construction: Construction,
}

impl Default for McOptions {
    fn default() -> Self {
        McOptions { caps: None, z: DEFAULT_Z, construction: Construction::Gillespie }
    }
}

/// `n` independent path summaries from `xi0`, path `i` keyed by `(seed, i)`.
pub fn sample_paths(
    params: &AllometricParams,
    xi0: f64,
    n: usize,
    seed: u64,
    opts: &McOptions,
) -> Result<Vec<PathSummary>> {
    params.validate()?;
    let caps = opts.caps.unwrap_or_else(|| Caps::natural(params));
    let dynamics = Dynamics::new(params)?;
    (0..n)
        .into_par_iter()
        .map(|i| summary_with(&dynamics, xi0, &PathStreams::new(seed, i as u64), &caps, opts.construction))
        .collect()
}

pub fn estimate_from_paths(paths: &[PathSummary], z: f64) -> EstimateResult {
    let counts: Vec<f64> = paths.iter().map(|p| p.n_births as f64).collect();
    let censored = paths.iter().filter(|p| p.censored).count();
    let mut est = EstimateResult::from_samples(&counts, censored, z);
    est.tail_index = hill(&counts, 0.05);
    est
}

/// Mean number of births of individuals started at `xi0`.
pub fn estimate_m_mc(params: &AllometricParams, xi0: f64, n: usize, seed: u64) -> Result<EstimateResult> {
    estimate_m_mc_with(params, xi0, n, seed, &McOptions::default())
}

pub fn estimate_m_mc_with(
    params: &AllometricParams,
    xi0: f64,
    n: usize,
    seed: u64,
    opts: &McOptions,
) -> Result<EstimateResult> {
    if n < 100 {
        return Err(Error::Config(format!("estimate_m_mc needs n >= 100, got {n}")));
    }
    let paths = sample_paths(params, xi0, n, seed, opts)?;
    Ok(estimate_from_paths(&paths, opts.z))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criticality {
    Supercritical,
    Subcritical,
    Inconclusive,
}

impl Criticality {
    pub fn as_str(&self) -> &'static str {
        match self {
            Criticality::Supercritical => "supercritical",
            Criticality::Subcritical => "subcritical",
            Criticality::Inconclusive => "inconclusive",
        }
    }
}

/// Compare the `level`-σ interval with 1. Censored paths only undercount
/// births, so they can never support a subcritical call.
pub fn criticality_test(est: &EstimateResult, level: f64) -> Criticality {
    let lo = est.mean - level * est.stderr;
    let hi = est.mean + level * est.stderr;
    if lo > 1.0 {
        Criticality::Supercritical
    } else if hi < 1.0 && est.n_censored == 0 {
        Criticality::Subcritical
    } else {
        Criticality::Inconclusive
    }
}

/// Hill estimate of the tail index from the top `fraction` of the sample.
pub fn hill(samples: &[f64], fraction: f64) -> Option<f64> {
    let mut v: Vec<f64> = samples.iter().copied().filter(|x| *x > 0.0 && x.is_finite()).collect();
    v.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let k = ((samples.len() as f64 * fraction).floor() as usize).min(v.len().saturating_sub(1));
    if k < 2 {
        return None;
    }
    let threshold = v[k];
    let h = v[..k].iter().map(|x| (x / threshold).ln()).sum::<f64>() / k as f64;
    (h > 0.0).then(|| 1.0 / h)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeavyTail {
    /// Hill tail index on the top 5%.
    pub hill_estimate: Option<f64>,
    pub hill_top_1pct: Option<f64>,
    pub hill_top_10pct: Option<f64>,
    /// Running mean fails to settle over the second half of the sample.
    pub plateau_flag: bool,
    /// Largest relative gap between a running mean of the second half and
    /// the final mean.
    pub window_deviation: f64,
}

pub fn heavy_tail_diagnostic(samples: &[f64]) -> Result<HeavyTail> {
    if samples.len() < 1000 {
        return Err(Error::Config(format!("heavy-tail diagnostic needs >= 1000 samples, got {}", samples.len())));
    }
    let n = samples.len();
    let total: f64 = samples.iter().sum();
    let final_mean = total / n as f64;
    let mut sum = 0.0;
    let mut worst: f64 = 0.0;
    for (i, v) in samples.iter().enumerate() {
        sum += v;
        if i + 1 >= n / 2 {
            worst = worst.max((sum / (i + 1) as f64 - final_mean).abs());
        }
    }
    let window_deviation = if final_mean != 0.0 { worst / final_mean.abs() } else { 0.0 };
    Ok(HeavyTail {
        hill_estimate: hill(samples, 0.05),
        hill_top_1pct: hill(samples, 0.01),
        hill_top_10pct: hill(samples, 0.10),
        plateau_flag: window_deviation > PLATEAU_TOLERANCE,
        window_deviation,
    })
}

/// Counts of non-negative integer outcomes, with censored outcomes kept apart.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Histogram {
    pub counts: BTreeMap<u64, u64>,
    pub censored: u64,
}

impl Histogram {
    pub fn from_values<I: IntoIterator<Item = u64>>(values: I) -> Self {
        let mut h = Histogram::default();
        for v in values {
            h.add(v);
        }
        h
    }

    pub fn add(&mut self, v: u64) {
        *self.counts.entry(v).or_insert(0) += 1;
    }

    /// Uncensored total.
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn mean(&self) -> f64 {
        let t = self.total();
        self.counts.iter().map(|(k, c)| *k as f64 * *c as f64).sum::<f64>() / t as f64
    }

    pub fn mode(&self) -> Option<u64> {
        self.counts.iter().max_by_key(|(k, c)| (**c, std::cmp::Reverse(**k))).map(|(k, _)| *k)
    }

    pub fn max_value(&self) -> Option<u64> {
        self.counts.keys().next_back().copied()
    }

    pub fn probability(&self, v: u64) -> f64 {
        *self.counts.get(&v).unwrap_or(&0) as f64 / self.total() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub tv_distance: f64,
    pub p_value: f64,
    pub chi_square: f64,
    pub dof: usize,
}

/// Total-variation distance and a two-sample chi-square test with cells
/// pooled until every expected count is at least 5.
pub fn compare_distributions(a: &Histogram, b: &Histogram) -> Result<Comparison> {
    let (na, nb) = (a.total() as f64, b.total() as f64);
    if na == 0.0 || nb == 0.0 {
        return Err(Error::Config("compare_distributions needs two non-empty histograms".into()));
    }
    let support: Vec<u64> = a.counts.keys().chain(b.counts.keys()).copied().collect::<std::collections::BTreeSet<_>>().into_iter().collect();
    let get = |h: &Histogram, k: u64| *h.counts.get(&k).unwrap_or(&0) as f64;
    let tv = 0.5 * support.iter().map(|&k| (get(a, k) / na - get(b, k) / nb).abs()).sum::<f64>();

    let n = na + nb;
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let mut cur = (0.0, 0.0);
    for &k in &support {
        cur.0 += get(a, k);
        cur.1 += get(b, k);
        let pooled = cur.0 + cur.1;
        if pooled * na.min(nb) / n >= 5.0 {
            cells.push(cur);
            cur = (0.0, 0.0);
        }
    }
    if cur.0 + cur.1 > 0.0 {
        match cells.last_mut() {
            Some(last) => {
                last.0 += cur.0;
                last.1 += cur.1;
            }
            None => cells.push(cur),
        }
    }
    if cells.len() < 2 {
        return Ok(Comparison { tv_distance: tv, p_value: 1.0, chi_square: 0.0, dof: 0 });
    }
    let mut stat = 0.0;
    for &(oa, ob) in &cells {
        let pooled = oa + ob;
        let (ea, eb) = (pooled * na / n, pooled * nb / n);
        stat += (oa - ea).powi(2) / ea + (ob - eb).powi(2) / eb;
    }
    let dof = cells.len() - 1;
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::Numeric(e.to_string()))?;
    Ok(Comparison { tv_distance: tv, p_value: dist.sf(stat), chi_square: stat, dof })
}

/// Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    if a.is_empty() || b.is_empty() {
        return (0.0, 1.0);
    }
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(|p, q| p.partial_cmp(q).unwrap());
    y.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let (n, m) = (x.len(), y.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let v = x[i].min(y[j]);
        while i < n && x[i] <= v {
            i += 1;
        }
        while j < m && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n * m) as f64 / (n + m) as f64;
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    (d, kolmogorov_q(lambda))
}

fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=200 {
        let term = sign * (-2.0 * (j * j) as f64 * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Grid of the I₁ phase diagram: rows are `C_β/C_δ`, columns `C_δ/(C_γ − C_α)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub ratios: Vec<f64>,
    pub columns: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseOptions {
    pub n: usize,
    pub z: f64,
    /// Extra Monte Carlo evaluations per column to refine the boundary.
    pub bisection_steps: usize,
    pub caps: Option<Caps>,
}

impl Default for PhaseOptions {
    fn default() -> Self {
        PhaseOptions { n: 20_000, z: DEFAULT_Z, bisection_steps: 5, caps: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseCell {
    pub c_beta_over_c_delta: f64,
    pub c_delta_over_gap: f64,
    pub c_beta: f64,
    pub c_delta: f64,
    pub verdict: Criticality,
    pub m_hat: f64,
    pub stderr: f64,
    pub n_censored: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub column: f64,
    /// Midpoint of the final bisection bracket; absent without any
    /// supercritical cell in the column.
    pub xi_hat: Option<f64>,
    pub bracket: Option<(f64, f64)>,
    /// Verdicts never go from supercritical back to subcritical as the
    /// ratio grows (inconclusive cells ignored).
    pub monotone: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseDiagram {
    pub base: AllometricParams,
    pub cells: Vec<PhaseCell>,
    pub boundary: Vec<BoundaryPoint>,
}

impl PhaseDiagram {
    pub fn write_csv<W: std::io::Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "c_beta_over_c_delta,c_delta_over_gap,verdict,m_hat,stderr,n_censored,c_beta,c_delta")?;
        for c in &self.cells {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                c.c_beta_over_c_delta,
                c.c_delta_over_gap,
                c.verdict.as_str(),
                c.m_hat,
                c.stderr,
                c.n_censored,
                c.c_beta,
                c.c_delta
            )?;
        }
        Ok(())
    }

    /// `[[column, xi_hat], ...]` with `null` where no boundary was found.
    pub fn boundary_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.boundary.iter().map(|b| serde_json::json!([b.column, b.xi_hat])).collect(),
        )
    }
}

fn phase_cell(
    base: &AllometricParams,
    ratio: f64,
    column: f64,
    seed: u64,
    opts: &PhaseOptions,
) -> Result<PhaseCell> {
    let c_delta = column * base.gap();
    let c_beta = ratio * c_delta;
    let p = base.with_constants(c_beta, c_delta);
    let mc = McOptions { caps: opts.caps, z: opts.z, construction: Construction::Gillespie };
    let est = estimate_m_mc_with(&p, p.x0, opts.n, seed, &mc)?;
    Ok(PhaseCell {
        c_beta_over_c_delta: ratio,
        c_delta_over_gap: column,
        c_beta,
        c_delta,
        verdict: criticality_test(&est, opts.z),
        m_hat: est.mean,
        stderr: est.stderr,
        n_censored: est.n_censored,
    })
}

pub fn phase_diagram_sweep(grid: &PhaseGrid, base: &AllometricParams, n: usize, seed: u64) -> Result<PhaseDiagram> {
    phase_diagram_sweep_with(grid, base, seed, &PhaseOptions { n, ..PhaseOptions::default() })
}

pub fn phase_diagram_sweep_with(
    grid: &PhaseGrid,
    base: &AllometricParams,
    seed: u64,
    opts: &PhaseOptions,
) -> Result<PhaseDiagram> {
    base.validate()?;
    let am1 = base.alpha - 1.0;
    if (base.beta - am1).abs() > EXPONENT_EPS || (base.delta - am1).abs() > EXPONENT_EPS || !base.is_power_flow() {
        return Err(Error::Config("phase diagram sweeps need beta = delta = alpha - 1 and gamma = alpha".into()));
    }
    if base.gap() <= 0.0 || base.c_r() <= 0.0 {
        return Err(Error::Config("phase diagram sweeps need c_gamma > c_alpha and C_R > 0".into()));
    }
    let mut ratios = grid.ratios.clone();
    ratios.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let jobs: Vec<(usize, usize)> =
        (0..grid.columns.len()).flat_map(|c| (0..ratios.len()).map(move |r| (c, r))).collect();
    let cells: Vec<PhaseCell> = jobs
        .iter()
        .map(|&(c, r)| {
            let s = child_seed(seed, (c * ratios.len() + r) as u64);
            phase_cell(base, ratios[r], grid.columns[c], s, opts)
        })
        .collect::<Result<_>>()?;

    let mut boundary = Vec::with_capacity(grid.columns.len());
    for (c, &column) in grid.columns.iter().enumerate() {
        let col: Vec<&PhaseCell> = cells[c * ratios.len()..(c + 1) * ratios.len()].iter().collect();
        let mut seen_super = false;
        let mut monotone = true;
        for cell in &col {
            match cell.verdict {
                Criticality::Supercritical => seen_super = true,
                Criticality::Subcritical if seen_super => monotone = false,
                _ => {}
            }
        }
        let first_super = col.iter().position(|x| x.verdict == Criticality::Supercritical);
        let Some(hi_idx) = first_super else {
            boundary.push(BoundaryPoint { column, xi_hat: None, bracket: None, monotone });
            continue;
        };
        let mut hi = col[hi_idx].c_beta_over_c_delta;
        // m ≤ C_β/C_δ, so a ratio of 1 is never supercritical
        let mut lo = col[..hi_idx]
            .iter()
            .rev()
            .find(|x| x.verdict == Criticality::Subcritical)
            .map_or(1.0f64, |x| x.c_beta_over_c_delta)
            .min(hi);
        for step in 0..opts.bisection_steps {
            let mid = 0.5 * (lo + hi);
            let s = child_seed(seed ^ 0xB15E_C7ED, (c * 1000 + step) as u64);
            match phase_cell(base, mid, column, s, opts)?.verdict {
                Criticality::Supercritical => hi = mid,
                Criticality::Subcritical => lo = mid,
                Criticality::Inconclusive => break,
            }
        }
        boundary.push(BoundaryPoint { column, xi_hat: Some(0.5 * (lo + hi)), bracket: Some((lo, hi)), monotone });
    }
    Ok(PhaseDiagram { base: *base, cells, boundary })
}
