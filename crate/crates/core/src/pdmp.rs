//! Exact simulation of one individual's life: deterministic energy flow
//! between jumps, births that hand `x₀` to a child, and death.

use rand::Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{Boundary, Dynamics, Inversion, RateKind};
use crate::error::{Error, Result};
use crate::quad;
use crate::rates::{classify_regime, AllometricParams, RateBundle};
use crate::rng::{PathStreams, Stream};
use crate::stats::EstimateResult;

pub use crate::dynamics::RateKind as HazardKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Birth,
    Death,
    AbsorbZero,
    AbsorbInfinity,
    CensoredCap,
}

impl EventKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EventKind::Birth => "birth",
            EventKind::Death => "death",
            EventKind::AbsorbZero => "absorb_zero",
            EventKind::AbsorbInfinity => "absorb_infinity",
            EventKind::CensoredCap => "censored_cap",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryEvent {
    pub time: f64,
    pub kind: EventKind,
    /// Energy just before the event. For absorption this is the energy at
    /// the start of the final flow segment.
    pub energy_before: f64,
    pub energy_after: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub xi0: f64,
    pub events: Vec<TrajectoryEvent>,
    pub terminal: EventKind,
    pub n_births: u64,
    pub t_death: Option<f64>,
    pub censored: bool,
    pub seed_path: String,
    /// Several consecutive jumps closer than 1e-12 in time.
    pub jump_accumulation: bool,
}

impl Trajectory {
    /// The individual died (as opposed to reaching 0, +∞ or a cap).
    pub fn biologically_relevant(&self) -> bool {
        self.terminal == EventKind::Death
    }

    pub fn summary(&self) -> PathSummary {
        PathSummary {
            n_births: self.n_births,
            terminal: self.terminal,
            t_death: self.t_death,
            censored: self.censored,
            n_events: self.events.len() as u64,
            end_time: self.events.last().map_or(0.0, |e| e.time),
        }
    }

    /// Per-event CSV rows `path_id,time,kind,energy_before,energy_after`.
    pub fn write_csv<W: std::io::Write>(&self, path_id: usize, out: &mut W, header: bool) -> std::io::Result<()> {
        if header {
            writeln!(out, "path_id,time,kind,energy_before,energy_after")?;
        }
        for ev in &self.events {
            let after = ev.energy_after.map(|e| format!("{e:e}")).unwrap_or_default();
            writeln!(out, "{path_id},{:e},{},{:e},{after}", ev.time, ev.kind.as_str(), ev.energy_before)?;
        }
        Ok(())
    }
}

/// Outcome of one path without the event log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathSummary {
    pub n_births: u64,
    pub terminal: EventKind,
    pub t_death: Option<f64>,
    pub censored: bool,
    pub n_events: u64,
    pub end_time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Caps {
    pub max_events: u64,
    pub max_time: f64,
}

impl Default for Caps {
    fn default() -> Self {
        Caps { max_events: 1_000_000, max_time: 1e6 }
    }
}

impl Caps {
    /// Characteristic flow time at energy `x`: `x^(1-α)/|C_R|` when γ = α, else 1.
    pub fn time_unit(params: &AllometricParams, x: f64) -> f64 {
        let cr = params.c_r().abs();
        if params.is_power_flow() && cr > 0.0 && x > 0.0 {
            let u = x.powf(1.0 - params.alpha) / cr;
            if u.is_finite() && u > 0.0 {
                return u;
            }
        }
        1.0
    }

    /// Default caps with the time cap measured in units of
    /// [`time_unit`](Self::time_unit) at `x₀`, so that sweeps over many
    /// decades of `x₀` are censored consistently.
    pub fn natural(params: &AllometricParams) -> Self {
        let d = Caps::default();
        Caps { max_events: d.max_events, max_time: d.max_time * Self::time_unit(params, params.x0) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    /// Joint clock at rate `b + d`, uniform thinning at each jump.
    #[default]
    Gillespie,
    /// Birth clocks at rate `b` and a single death clock on `∫ d`.
    SplitClock,
}

/// Result of one hazard inversion from `xi0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HazardInversion {
    Jump { jump_time: f64, jump_energy: f64 },
    NoJump,
}

/// Time and energy at which `∫ (b + d)` along the flow from `xi0` reaches
/// `target`, or `NoJump` if the flow never accumulates that much.
pub fn invert_hazard(bundle: &RateBundle, xi0: f64, target: f64) -> Result<HazardInversion> {
    if !(xi0 > 0.0) || !(target > 0.0) {
        return Err(Error::Domain(format!("invert_hazard needs xi0 > 0 and target > 0 (got {xi0}, {target})")));
    }
    let dynamics = Dynamics::new(bundle.params())?;
    Ok(match dynamics.invert(RateKind::Total, xi0, target)? {
        Inversion::Jump { energy, time } if energy.is_finite() => {
            HazardInversion::Jump { jump_time: time, jump_energy: energy }
        }
        _ => HazardInversion::NoJump,
    })
}

struct Recorder<'a> {
    events: Option<&'a mut Vec<TrajectoryEvent>>,
    n_events: u64,
    n_births: u64,
    last_time: f64,
    short_gaps: u32,
    accumulation: bool,
}

impl Recorder<'_> {
    fn push(&mut self, ev: TrajectoryEvent) {
        if ev.time - self.last_time < 1e-12 && self.n_events > 0 {
            self.short_gaps += 1;
            if self.short_gaps >= 8 {
                self.accumulation = true;
            }
        } else {
            self.short_gaps = 0;
        }
        self.last_time = ev.time;
        self.n_events += 1;
        if ev.kind == EventKind::Birth {
            self.n_births += 1;
        }
        if let Some(v) = self.events.as_deref_mut() {
            v.push(ev);
        }
    }
}

fn finish(rec: &mut Recorder<'_>, kind: EventKind, time: f64, energy: f64) -> PathSummary {
    rec.push(TrajectoryEvent { time, kind, energy_before: energy, energy_after: None });
    PathSummary {
        n_births: rec.n_births,
        terminal: kind,
        t_death: (kind == EventKind::Death).then_some(time),
        censored: kind == EventKind::CensoredCap,
        n_events: rec.n_events,
        end_time: time,
    }
}

fn censor_energy(dynamics: &Dynamics, x: f64, dt: f64) -> Result<f64> {
    if dt.is_finite() {
        return dynamics.flow(x, dt);
    }
    Ok(match dynamics.boundary(x) {
        Boundary::Equilibrium(xs) => xs,
        Boundary::Fixed => x,
        Boundary::Zero => f64::MIN_POSITIVE,
        Boundary::Infinity => f64::INFINITY,
    })
}

/// The flow from `x` at time `t` carries no further jump.
fn no_jump(dynamics: &Dynamics, rec: &mut Recorder<'_>, x: f64, t: f64, caps: &Caps) -> Result<PathSummary> {
    let tm = dynamics.t_max(x);
    let absorbing = match dynamics.boundary(x) {
        Boundary::Infinity => Some(EventKind::AbsorbInfinity),
        Boundary::Zero => Some(EventKind::AbsorbZero),
        _ => None,
    };
    match absorbing {
        Some(kind) if tm.is_finite() && t + tm <= caps.max_time => Ok(finish(rec, kind, t + tm, x)),
        _ => {
            let e = censor_energy(dynamics, x, caps.max_time - t)?;
            Ok(finish(rec, EventKind::CensoredCap, caps.max_time, e))
        }
    }
}

fn run_path(
    dynamics: &Dynamics,
    xi0: f64,
    streams: &PathStreams,
    caps: &Caps,
    construction: Construction,
    rec: &mut Recorder<'_>,
) -> Result<PathSummary> {
    let x0 = dynamics.p.x0;
    let mut x = xi0;
    let mut t = 0.0;
    match construction {
        Construction::Gillespie => {
            let mut clock = streams.stream(Stream::JumpClock);
            let mut thin = streams.stream(Stream::Thinning);
            loop {
                if rec.n_events >= caps.max_events.saturating_sub(1) {
                    return Ok(finish(rec, EventKind::CensoredCap, t, x));
                }
                let e: f64 = clock.sample(Exp1);
                match dynamics.invert(RateKind::Total, x, e)? {
                    Inversion::Jump { energy: y, time: dt } if y.is_finite() => {
                        if t + dt > caps.max_time {
                            let e = censor_energy(dynamics, x, caps.max_time - t)?;
                            return Ok(finish(rec, EventKind::CensoredCap, caps.max_time, e));
                        }
                        t += dt;
                        let u: f64 = thin.random();
                        let (b, d) = (dynamics.birth(y), dynamics.death(y));
                        if y <= x0 || u * (b + d) <= d {
                            return Ok(finish(rec, EventKind::Death, t, y));
                        }
                        let after = y - x0;
                        rec.push(TrajectoryEvent { time: t, kind: EventKind::Birth, energy_before: y, energy_after: Some(after) });
                        x = after;
                    }
                    _ => return no_jump(dynamics, rec, x, t, caps),
                }
            }
        }
        Construction::SplitClock => {
            let mut births = streams.stream(Stream::BirthClock);
            let mut deaths = streams.stream(Stream::DeathClock);
            let mut death_left: f64 = deaths.sample(Exp1);
            loop {
                if rec.n_events >= caps.max_events.saturating_sub(1) {
                    return Ok(finish(rec, EventKind::CensoredCap, t, x));
                }
                let fb: f64 = births.sample(Exp1);
                let jb = dynamics.invert(RateKind::Birth, x, fb)?;
                let jd = dynamics.invert(RateKind::Death, x, death_left)?;
                let when = |j: &Inversion| match *j {
                    Inversion::Jump { energy, time } if energy.is_finite() => Some((time, energy)),
                    _ => None,
                };
                match (when(&jb), when(&jd)) {
                    (None, None) => return no_jump(dynamics, rec, x, t, caps),
                    (b, Some((td, yd))) if b.is_none_or(|(tb, _)| td <= tb) => {
                        if t + td > caps.max_time {
                            let e = censor_energy(dynamics, x, caps.max_time - t)?;
                            return Ok(finish(rec, EventKind::CensoredCap, caps.max_time, e));
                        }
                        return Ok(finish(rec, EventKind::Death, t + td, yd));
                    }
                    (Some((tb, yb)), _) => {
                        if t + tb > caps.max_time {
                            let e = censor_energy(dynamics, x, caps.max_time - t)?;
                            return Ok(finish(rec, EventKind::CensoredCap, caps.max_time, e));
                        }
                        death_left = (death_left - dynamics.hazard(RateKind::Death, x, yb, tb)).max(0.0);
                        t += tb;
                        let after = yb - x0;
                        rec.push(TrajectoryEvent { time: t, kind: EventKind::Birth, energy_before: yb, energy_after: Some(after) });
                        x = after;
                    }
                    (None, Some(_)) => unreachable!(),
                }
            }
        }
    }
}

fn check_start(xi0: f64, caps: &Caps) -> Result<()> {
    if !(xi0 > 0.0) || !xi0.is_finite() {
        return Err(Error::Domain(format!("initial energy must be positive and finite, got {xi0}")));
    }
    if caps.max_events == 0 || !(caps.max_time > 0.0) {
        return Err(Error::Config("caps must be positive".into()));
    }
    Ok(())
}

pub(crate) fn trajectory_with(
    dynamics: &Dynamics,
    xi0: f64,
    streams: &PathStreams,
    caps: &Caps,
    construction: Construction,
) -> Result<Trajectory> {
    check_start(xi0, caps)?;
    let mut events = Vec::new();
    let mut rec = Recorder { events: Some(&mut events), n_events: 0, n_births: 0, last_time: 0.0, short_gaps: 0, accumulation: false };
    let outcome = run_path(dynamics, xi0, streams, caps, construction, &mut rec);
    let accumulation = rec.accumulation;
    match outcome {
        Ok(s) => Ok(Trajectory {
            xi0,
            events,
            terminal: s.terminal,
            n_births: s.n_births,
            t_death: s.t_death,
            censored: s.censored,
            seed_path: streams.token(),
            jump_accumulation: accumulation,
        }),
        Err(cause) => Err(Error::Trajectory { cause: Box::new(cause), prefix: events }),
    }
}

/// One life following the joint-clock construction.
pub fn simulate_trajectory(params: &AllometricParams, xi0: f64, seed: &PathStreams, caps: &Caps) -> Result<Trajectory> {
    params.validate()?;
    trajectory_with(&Dynamics::new(params)?, xi0, seed, caps, Construction::Gillespie)
}

/// One life following the split-clock construction; `x₀ = 0` is allowed.
pub fn simulate_split_clock(params: &AllometricParams, xi0: f64, clocks: &PathStreams, caps: &Caps) -> Result<Trajectory> {
    trajectory_with(&Dynamics::new(params)?, xi0, clocks, caps, Construction::SplitClock)
}

/// Outcome of one life without storing its events.
pub fn simulate_summary(
    params: &AllometricParams,
    xi0: f64,
    seed: &PathStreams,
    caps: &Caps,
    construction: Construction,
) -> Result<PathSummary> {
    let dynamics = Dynamics::new(params)?;
    summary_with(&dynamics, xi0, seed, caps, construction)
}

pub(crate) fn summary_with(
    dynamics: &Dynamics,
    xi0: f64,
    seed: &PathStreams,
    caps: &Caps,
    construction: Construction,
) -> Result<PathSummary> {
    check_start(xi0, caps)?;
    let mut rec = Recorder { events: None, n_events: 0, n_births: 0, last_time: 0.0, short_gaps: 0, accumulation: false };
    run_path(dynamics, xi0, seed, caps, construction, &mut rec)
        .map_err(|cause| Error::Trajectory { cause: Box::new(cause), prefix: Vec::new() })
}

/// Member of a coupled family: its own parameters and starting energy,
/// optionally with rates frozen above `freeze`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyMember {
    pub params: AllometricParams,
    pub xi0: f64,
    pub freeze: Option<f64>,
}

impl FamilyMember {
    pub fn new(params: AllometricParams, xi0: f64) -> Self {
        FamilyMember { params, xi0, freeze: None }
    }
    pub fn frozen_at(mut self, level: f64) -> Self {
        self.freeze = Some(level);
        self
    }
}

/// Run every member on the same birth and death clocks.
pub fn simulate_coupled_family(members: &[FamilyMember], shared: &PathStreams, caps: &Caps) -> Result<Vec<Trajectory>> {
    let Some(first) = members.first() else {
        return Ok(Vec::new());
    };
    for m in members {
        let (a, b) = (&first.params, &m.params);
        if a.phi_r != b.phi_r || a.gamma != b.gamma || a.alpha != b.alpha {
            return Err(Error::Config("coupled family members must share phi_r, gamma and alpha".into()));
        }
        if !(m.params.is_power_flow() && m.params.c_r() > 0.0) {
            return Err(Error::Unsupported("coupled families need gamma = alpha and C_R > 0".into()));
        }
    }
    members
        .iter()
        .map(|m| {
            let d = Dynamics::with_freeze(&m.params, m.freeze)?;
            trajectory_with(&d, m.xi0, shared, caps, Construction::SplitClock)
        })
        .collect()
}

/// Largest pre-jump energy over the first `k` events (`Sᵏ`).
pub fn max_energy_at_jumps(traj: &Trajectory, k: usize) -> Option<f64> {
    traj.events.iter().take(k).map(|e| e.energy_before).reduce(f64::max)
}

/// A bounded test function for the martingale identity.
pub trait TestFunction: Sync {
    fn value(&self, x: f64) -> f64;
    fn derivative(&self, x: f64) -> f64;
    /// Value at the cemetery state (after death).
    fn at_cemetery(&self) -> f64;
}

#[derive(Debug, Clone, Copy)]
pub struct ConstantFn(pub f64);

impl TestFunction for ConstantFn {
    fn value(&self, _: f64) -> f64 {
        self.0
    }
    fn derivative(&self, _: f64) -> f64 {
        0.0
    }
    fn at_cemetery(&self) -> f64 {
        self.0
    }
}

/// Smoothed `min(x, m)`: `m (1 − e^{−x/m})`, zero after death.
#[derive(Debug, Clone, Copy)]
pub struct SaturatingFn {
    pub m: f64,
}

impl TestFunction for SaturatingFn {
    fn value(&self, x: f64) -> f64 {
        -self.m * (-x / self.m).exp_m1()
    }
    fn derivative(&self, x: f64) -> f64 {
        (-x / self.m).exp()
    }
    fn at_cemetery(&self) -> f64 {
        0.0
    }
}

/// `x / (x + scale)`, zero after death.
#[derive(Debug, Clone, Copy)]
pub struct HyperbolicFn {
    pub scale: f64,
}

impl TestFunction for HyperbolicFn {
    fn value(&self, x: f64) -> f64 {
        x / (x + self.scale)
    }
    fn derivative(&self, x: f64) -> f64 {
        self.scale / ((x + self.scale) * (x + self.scale))
    }
    fn at_cemetery(&self) -> f64 {
        0.0
    }
}

/// Generator applied to a test function at energy `x`:
/// `g φ' + b (φ(x − x₀) − φ(x)) + d (φ(∂) − φ(x))`.
pub fn generator<T: TestFunction + ?Sized>(params: &AllometricParams, f: &T, x: f64) -> f64 {
    let r = RateBundle::from_params_unchecked(*params);
    let jump_part = jump_generator(&r, f, x);
    r.net_growth(x) * f.derivative(x) + jump_part
}

fn jump_generator<T: TestFunction + ?Sized>(r: &RateBundle, f: &T, x: f64) -> f64 {
    let x0 = r.params().x0;
    let b = r.birth(x);
    let birth = if b > 0.0 { b * (f.value(x - x0) - f.value(x)) } else { 0.0 };
    birth + r.death(x) * (f.at_cemetery() - f.value(x))
}

/// `φ(ξ_T) − φ(ξ₀) − ∫₀ᵀ Lφ(ξ_s) ds` along one recorded trajectory.
pub fn residual_along<T: TestFunction + ?Sized>(
    params: &AllometricParams,
    f: &T,
    traj: &Trajectory,
    horizon: f64,
) -> Result<f64> {
    let dynamics = Dynamics::new(params)?;
    let r = RateBundle::from_params_unchecked(*params);
    let x0 = params.x0;
    let jumps_over = |a: f64, b: f64, dt: f64| -> f64 {
        if dynamics.direction(a) == crate::dynamics::Dir::Still {
            return jump_generator(&r, f, a) * dt;
        }
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        if lo == hi {
            return 0.0;
        }
        let mut pts = vec![lo.ln()];
        if x0 > lo && x0 < hi {
            pts.push(x0.ln());
        }
        pts.push(hi.ln());
        let h = |w: f64| {
            let u = w.exp();
            jump_generator(&r, f, u) * u / dynamics.g(u).abs()
        };
        quad::integrate_pieces(h, &pts, 1e-10, 1e-13).value
    };
    let mut x = traj.xi0;
    let mut t = 0.0;
    let mut integral = 0.0;
    let mut end_value = None;
    for ev in &traj.events {
        if ev.time > horizon {
            break;
        }
        // flow part of the generator integrates exactly to a difference of φ
        integral += f.value(ev.energy_before) - f.value(x) + jumps_over(x, ev.energy_before, ev.time - t);
        t = ev.time;
        match ev.kind {
            EventKind::Birth => {
                x = ev.energy_after.unwrap_or(ev.energy_before - x0);
            }
            EventKind::Death => {
                end_value = Some(f.at_cemetery());
                break;
            }
            EventKind::CensoredCap if (ev.time - horizon).abs() <= 1e-9 * horizon.max(1.0) => {
                x = ev.energy_before;
                end_value = Some(f.value(x));
                break;
            }
            _ => {
                return Err(Error::Domain(format!(
                    "trajectory ended with {} before the horizon",
                    ev.kind.as_str()
                )))
            }
        }
    }
    let end = match end_value {
        Some(v) => v,
        None => return Err(Error::Domain("trajectory does not reach the horizon".into())),
    };
    Ok(end - f.value(traj.xi0) - integral)
}

/// Monte Carlo mean of the martingale residual at `horizon`, paths started
/// at `x₀`.
pub fn martingale_residual<T: TestFunction + ?Sized>(
    params: &AllometricParams,
    test_fn: &T,
    horizon: f64,
    n_paths: usize,
    seed: u64,
) -> Result<EstimateResult> {
    let report = classify_regime(params);
    if !report.avoids_zero || !report.avoids_infinity_integral {
        return Err(Error::Unsupported(
            "martingale test needs delta <= alpha - 1 and a divergent (b + d)/g tail".into(),
        ));
    }
    if !(horizon > 0.0) {
        return Err(Error::Domain("horizon must be positive".into()));
    }
    let caps = Caps { max_events: 10_000_000, max_time: horizon };
    let values: Vec<Result<f64>> = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let streams = PathStreams::new(seed, i as u64);
            let traj = simulate_trajectory(params, params.x0, &streams, &caps)?;
            residual_along(params, test_fn, &traj, horizon)
        })
        .collect();
    let values: Vec<f64> = values.into_iter().collect::<Result<_>>()?;
    Ok(EstimateResult::from_samples(&values, 0, 3.0))
}
