//! The next-generation operator `K`, its iterates on `1`, survival exponents
//! and mean offspring numbers, for environments where `g > 0` everywhere.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{Dynamics, Inversion, RateKind};
use crate::error::{Error, Result};
use crate::quad::{integrate, integrate_pieces};
use crate::rates::{resource_set_membership, AllometricParams};

/// Function of energy known at nodes, monotone cubic in `ln x` between them
/// and constant outside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid", into = "RawGrid")]
pub struct GridFunction {
    nodes: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawGrid {
    nodes: Vec<f64>,
    values: Vec<f64>,
}

impl TryFrom<RawGrid> for GridFunction {
    type Error = Error;
    fn try_from(r: RawGrid) -> Result<Self> {
        GridFunction::new(r.nodes, r.values)
    }
}

impl From<GridFunction> for RawGrid {
    fn from(g: GridFunction) -> Self {
        RawGrid { nodes: g.nodes, values: g.values }
    }
}

impl GridFunction {
    pub fn new(nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != values.len() {
            return Err(Error::Config("grid function needs matching, non-empty nodes and values".into()));
        }
        if nodes[0] <= 0.0 || nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config("grid nodes must be positive and strictly increasing".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("grid function values must be finite".into()));
        }
        let slopes = pchip_slopes(&nodes, &values);
        Ok(GridFunction { nodes, values, slopes })
    }

    pub fn constant(nodes: Vec<f64>, c: f64) -> Result<Self> {
        let values = vec![c; nodes.len()];
        Self::new(nodes, values)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.nodes.len();
        if x <= self.nodes[0] || n == 1 {
            return self.values[0];
        }
        if x >= self.nodes[n - 1] {
            return self.values[n - 1];
        }
        let i = self.nodes.partition_point(|&v| v <= x) - 1;
        let slopes = &self.slopes;
        let (t0, t1) = (self.nodes[i].ln(), self.nodes[i + 1].ln());
        let h = t1 - t0;
        let u = (x.ln() - t0) / h;
        let (u2, u3) = (u * u, u * u * u);
        let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
        let h10 = u3 - 2.0 * u2 + u;
        let h01 = -2.0 * u3 + 3.0 * u2;
        let h11 = u3 - u2;
        h00 * self.values[i] + h10 * h * slopes[i] + h01 * self.values[i + 1] + h11 * h * slopes[i + 1]
    }

    /// Two columns, `energy,value`.
    pub fn write_csv<W: std::io::Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "energy,value")?;
        for (x, v) in self.nodes.iter().zip(&self.values) {
            writeln!(out, "{x},{v}")?;
        }
        Ok(())
    }
}

fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n < 2 {
        return vec![0.0; n];
    }
    let t: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let h: Vec<f64> = t.windows(2).map(|w| w[1] - w[0]).collect();
    let d: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    let mut m = vec![0.0; n];
    m[0] = d[0];
    m[n - 1] = d[n - 2];
    for i in 1..n - 1 {
        if d[i - 1] * d[i] > 0.0 {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            m[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
        }
    }
    // clip the end slopes so the end intervals stay monotone
    for (e, di) in [(0, 0), (n - 1, n - 2)] {
        if m[e] * d[di] <= 0.0 {
            m[e] = 0.0;
        } else if m[e].abs() > 3.0 * d[di].abs() {
            m[e] = 3.0 * d[di];
        }
    }
    m
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Geometric nodes between `lo_factor·x₀` and `hi_factor·x₀`.
    pub n_geometric: usize,
    pub lo_factor: f64,
    pub hi_factor: f64,
    /// Nodes at `j·x₀` for `j = 1..=multiples`.
    pub multiples: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { n_geometric: 2048, lo_factor: 1e-4, hi_factor: 1e6, multiples: 64 }
    }
}

impl GridSpec {
    pub fn nodes(&self, x0: f64, extra: &[f64]) -> Vec<f64> {
        let n = self.n_geometric.max(2);
        let (lo, hi) = ((x0 * self.lo_factor).ln(), (x0 * self.hi_factor).ln());
        let mut v: Vec<f64> = (0..n).map(|i| (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp()).collect();
        v.extend((1..=self.multiples).map(|j| j as f64 * x0));
        v.extend(extra.iter().copied().filter(|x| *x > 0.0 && x.is_finite()));
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v.dedup_by(|b, a| (*b - *a).abs() <= 1e-12 * a.abs());
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorOptions {
    pub grid: GridSpec,
    pub rel_tol: f64,
    /// Hazard truncation; the neglected mass is below `e^{-s_trunc}`.
    pub s_trunc: f64,
}

impl Default for OperatorOptions {
    fn default() -> Self {
        OperatorOptions { grid: GridSpec::default(), rel_tol: 1e-8, s_trunc: 40.0 }
    }
}

/// `K` for fixed parameters.
#[derive(Debug, Clone)]
pub struct KOperator {
    dynamics: Dynamics,
    opts: OperatorOptions,
}

fn require_r0(params: &AllometricParams) -> Result<()> {
    params.validate()?;
    if !resource_set_membership(params).in_r0 {
        return Err(Error::Unsupported(
            "the operator is only available when net growth is positive at every energy".into(),
        ));
    }
    Ok(())
}

impl KOperator {
    pub fn new(params: &AllometricParams) -> Result<Self> {
        Self::with_options(params, OperatorOptions::default())
    }

    pub fn with_options(params: &AllometricParams, opts: OperatorOptions) -> Result<Self> {
        require_r0(params)?;
        Ok(KOperator { dynamics: Dynamics::new(params)?, opts })
    }

    pub fn params(&self) -> &AllometricParams {
        &self.dynamics.p
    }

    pub fn grid(&self, extra: &[f64]) -> Vec<f64> {
        self.opts.grid.nodes(self.dynamics.p.x0, extra)
    }

    /// `(Kf)(ξ)`: probability-weighted value of `f` at the offspring-adjusted
    /// energy of the first jump, counting births only.
    pub fn eval<F: Fn(f64) -> f64>(&self, f: F, xi: f64) -> Result<f64> {
        let d = &self.dynamics;
        let x0 = d.p.x0;
        let s_end = d.hazard_to_boundary(RateKind::Total, xi).min(self.opts.s_trunc);
        let s_start = if xi < x0 { d.hazard(RateKind::Total, xi, x0, 0.0) } else { 0.0 };
        if !(s_start < s_end) {
            return Ok(0.0);
        }
        let mut points = vec![s_start];
        for j in 2..=self.opts.grid.multiples + 1 {
            let e = j as f64 * x0;
            if e > xi {
                let s = d.hazard(RateKind::Total, xi, e, 0.0);
                if s >= s_end {
                    break;
                }
                if s > s_start {
                    points.push(s);
                }
            }
        }
        points.push(s_end);
        let integrand = |s: f64| -> f64 {
            let x = match d.invert(RateKind::Total, xi, s) {
                Ok(Inversion::Jump { energy, .. }) => energy,
                Ok(Inversion::NoJump { .. }) => return 0.0,
                Err(_) => return f64::NAN,
            };
            let b = d.birth(x);
            if b == 0.0 {
                return 0.0;
            }
            b / (b + d.death(x)) * (-s).exp() * f(x - x0)
        };
        let q = integrate_pieces(integrand, &points, self.opts.rel_tol, 1e-15);
        if !q.value.is_finite() {
            return Err(Error::Numeric(format!("operator quadrature failed at energy {xi}")));
        }
        Ok(q.value)
    }

    pub fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        let values: Vec<f64> =
            f.nodes.par_iter().map(|&xi| self.eval(|x| f.eval(x), xi)).collect::<Result<_>>()?;
        GridFunction::new(f.nodes.clone(), values)
    }

    /// `Kᵏ1(ξ₀)` for `k = 1..=kmax`; the last application of each iterate is
    /// evaluated exactly at `ξ₀`.
    pub fn iterates_at(&self, xi0: f64, kmax: usize) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(kmax);
        let mut f = GridFunction::constant(self.grid(&[xi0]), 1.0)?;
        for k in 1..=kmax {
            out.push(self.eval(|x| f.eval(x), xi0)?);
            if k < kmax {
                f = self.apply(&f)?;
            }
        }
        Ok(out)
    }
}

/// `Kf` on the nodes of `f`.
pub fn apply_k(f: &GridFunction, params: &AllometricParams) -> Result<GridFunction> {
    KOperator::new(params)?.apply(f)
}

/// `Kᵏ1(ξ₀)`: probability that the first `k` jumps are births.
pub fn k_power_one(params: &AllometricParams, xi0: f64, k: usize) -> Result<f64> {
    let op = KOperator::new(params)?;
    if k == 0 {
        return Ok(1.0);
    }
    Ok(*op.iterates_at(xi0, k)?.last().unwrap())
}

/// Grid functions `K¹1, …, Kᵏ1`.
pub fn k_iterate_functions(params: &AllometricParams, kmax: usize, extra_nodes: &[f64]) -> Result<Vec<GridFunction>> {
    let op = KOperator::new(params)?;
    let mut f = GridFunction::constant(op.grid(extra_nodes), 1.0)?;
    let mut out = Vec::with_capacity(kmax);
    for _ in 0..kmax {
        f = op.apply(&f)?;
        out.push(f.clone());
    }
    Ok(out)
}

/// Probability of never jumping, `exp(-∫ (b+d)/g)` from `ξ₀` to infinity.
pub fn survival_exponent(params: &AllometricParams, xi0: f64) -> Result<f64> {
    require_r0(params)?;
    let h = Dynamics::new(params)?.hazard_to_boundary(RateKind::Total, xi0);
    Ok(if h.is_finite() { (-h).exp() } else { 0.0 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesResult {
    pub value: f64,
    pub truncation_k: usize,
    pub diverged: bool,
    #[serde(skip, default)]
    pub terms: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesOptions {
    pub tol: f64,
    /// Consecutive slowly-decaying terms above `tol` that count as divergence.
    pub plateau_run: usize,
    pub max_terms: usize,
    pub operator: OperatorOptions,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        SeriesOptions { tol: 1e-6, plateau_run: 50, max_terms: 1000, operator: OperatorOptions::default() }
    }
}

/// `m(ξ₀) = Σ_{k≥1} Kᵏ1(ξ₀)`, the expected number of births.
pub fn mean_offspring_series(params: &AllometricParams, xi0: f64, tol: f64) -> Result<SeriesResult> {
    mean_offspring_series_with(params, xi0, &SeriesOptions { tol, ..SeriesOptions::default() })
}

pub fn mean_offspring_series_with(params: &AllometricParams, xi0: f64, opts: &SeriesOptions) -> Result<SeriesResult> {
    let op = KOperator::with_options(params, opts.operator)?;
    let mut f = GridFunction::constant(op.grid(&[xi0]), 1.0)?;
    let mut terms: Vec<f64> = Vec::new();
    let mut sum = 0.0;
    let mut plateau = 0usize;
    for k in 1..=opts.max_terms {
        let term = op.eval(|x| f.eval(x), xi0)?;
        sum += term;
        terms.push(term);
        if term == 0.0 {
            return Ok(SeriesResult { value: sum, truncation_k: k, diverged: false, terms });
        }
        if k >= 2 {
            let ratio = term / terms[k - 2];
            if ratio < 1.0 && term < opts.tol * (1.0 - ratio) {
                let tail = term * ratio / (1.0 - ratio);
                return Ok(SeriesResult { value: sum + tail, truncation_k: k, diverged: false, terms });
            }
            // decay no faster than 1/k is the signature of a divergent sum
            if term > opts.tol && ratio >= 1.0 - 1.0 / k as f64 {
                plateau += 1;
            } else {
                plateau = 0;
            }
            if plateau >= opts.plateau_run {
                return Ok(SeriesResult { value: sum, truncation_k: k, diverged: true, terms });
            }
        }
        f = op.apply(&f)?;
    }
    Ok(SeriesResult { value: sum, truncation_k: opts.max_terms, diverged: true, terms })
}

/// Mean number of births when reproduction costs no energy, from energy `x`:
/// births along the deterministic path until the death clock rings.
pub fn mean_offspring_no_loss(params: &AllometricParams, x: f64) -> Result<f64> {
    require_r0(params)?;
    if !(x > 0.0) {
        return Err(Error::Domain(format!("starting energy must be positive, got {x}")));
    }
    let d = Dynamics::new(&params.with_x0(0.0))?;
    if d.hazard_to_boundary(RateKind::Death, x).is_finite() {
        return Err(Error::Domain(
            "death hazard stays finite along the path: lifetime is infinite with positive probability".into(),
        ));
    }
    let births_until = |s: f64| -> f64 {
        match d.invert(RateKind::Death, x, s) {
            Ok(Inversion::Jump { energy, .. }) => d.hazard(RateKind::Birth, x, energy, 0.0),
            _ => f64::NAN,
        }
    };
    let integrand = |s: f64| births_until(s) * (-s).exp();
    let mut total = 0.0;
    let mut a = 0.0;
    let mut b = 1.0;
    while a < 745.0 {
        let q = integrate(integrand, a, b, 1e-10, 1e-300);
        if !q.value.is_finite() {
            return Ok(f64::INFINITY);
        }
        total += q.value;
        if q.value <= 1e-13 * total && a >= 32.0 {
            return Ok(total);
        }
        a = b;
        b *= 2.0;
    }
    Ok(f64::INFINITY)
}

pub use crate::rates::i2_threshold;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pchip_reproduces_monotone_data_without_overshoot() {
        let nodes: Vec<f64> = (1..=20).map(|i| i as f64).collect();
        let values: Vec<f64> = nodes.iter().map(|x| if *x < 10.0 { 0.0 } else { 1.0 }).collect();
        let g = GridFunction::new(nodes, values).unwrap();
        for i in 0..400 {
            let x = 1.0 + i as f64 * 0.05;
            let v = g.eval(x);
            assert!((0.0..=1.0).contains(&v), "{x} -> {v}");
        }
        assert_eq!(g.eval(0.1), 0.0);
        assert_eq!(g.eval(1e9), 1.0);
    }

    #[test]
    fn grid_contains_multiples_and_extra() {
        let nodes = GridSpec::default().nodes(2.0, &[3.3]);
        for j in 1..=64 {
            assert!(nodes.iter().any(|x| (*x - 2.0 * j as f64).abs() < 1e-9));
        }
        assert!(nodes.contains(&3.3));
    }
}
