//! Allometric rate functions, the deterministic energy flow, and the
//! admissibility classifier for exponent/constant combinations.

use serde::{Deserialize, Serialize};

use crate::dynamics::Dynamics;
use crate::error::{Error, Result};

/// Tolerance used when comparing exponents for equality (`δ = α − 1` etc.).
pub const EXPONENT_EPS: f64 = 1e-9;

/// The eight allometric constants, the energy at birth and the value of the
/// functional response at the (fixed) resource level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AllometricParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub c_alpha: f64,
    pub c_beta: f64,
    pub c_gamma: f64,
    pub c_delta: f64,
    pub x0: f64,
    pub phi_r: f64,
}

impl Default for AllometricParams {
    fn default() -> Self {
        Self::baseline()
    }
}

impl AllometricParams {
    pub const KEYS: [&'static str; 10] = [
        "alpha", "beta", "gamma", "delta", "c_alpha", "c_beta", "c_gamma", "c_delta", "x0", "phi_r",
    ];

    /// α = 0.75, γ = α, δ = β = α − 1, φ(R) = 2/3, C_γ = 2, C_α = 1,
    /// C_β = 2, C_δ = 0.5, x₀ = 1.
    pub fn baseline() -> Self {
        AllometricParams {
            alpha: 0.75,
            beta: -0.25,
            gamma: 0.75,
            delta: -0.25,
            c_alpha: 1.0,
            c_beta: 2.0,
            c_gamma: 2.0,
            c_delta: 0.5,
            x0: 1.0,
            phi_r: 2.0 / 3.0,
        }
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }
    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }
    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }
    pub fn with_constants(mut self, c_beta: f64, c_delta: f64) -> Self {
        self.c_beta = c_beta;
        self.c_delta = c_delta;
        self
    }
    pub fn with_x0(mut self, x0: f64) -> Self {
        self.x0 = x0;
        self
    }
    pub fn with_phi(mut self, phi_r: f64) -> Self {
        self.phi_r = phi_r;
        self
    }

    /// Net growth constant `φ(R)C_γ − C_α` (meaningful when γ = α).
    pub fn c_r(&self) -> f64 {
        self.phi_r * self.c_gamma - self.c_alpha
    }

    /// `C_γ − C_α`, the growth constant at unlimited resources.
    pub fn gap(&self) -> f64 {
        self.c_gamma - self.c_alpha
    }

    /// Intake and loss share an exponent, so the flow has a closed form.
    pub fn is_power_flow(&self) -> bool {
        (self.gamma - self.alpha).abs() <= EXPONENT_EPS
    }

    pub fn validate(&self) -> Result<()> {
        self.check(false)
    }

    /// Like [`validate`](Self::validate) but admits `x0 = 0`, the
    /// no-energy-loss individual used in couplings.
    pub fn validate_allow_zero_x0(&self) -> Result<()> {
        self.check(true)
    }

    fn check(&self, zero_x0: bool) -> Result<()> {
        let fields = [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("delta", self.delta),
            ("c_alpha", self.c_alpha),
            ("c_beta", self.c_beta),
            ("c_gamma", self.c_gamma),
            ("c_delta", self.c_delta),
            ("x0", self.x0),
            ("phi_r", self.phi_r),
        ];
        for (field, value) in fields {
            if !value.is_finite() {
                return Err(Error::InvalidParameter { field, value, reason: "must be finite" });
            }
        }
        for (field, value) in [
            ("alpha", self.alpha),
            ("gamma", self.gamma),
            ("c_alpha", self.c_alpha),
            ("c_beta", self.c_beta),
            ("c_gamma", self.c_gamma),
            ("c_delta", self.c_delta),
        ] {
            if value <= 0.0 {
                return Err(Error::InvalidParameter { field, value, reason: "must be strictly positive" });
            }
        }
        if self.x0 < 0.0 || (!zero_x0 && self.x0 == 0.0) {
            return Err(Error::InvalidParameter {
                field: "x0",
                value: self.x0,
                reason: "must be strictly positive",
            });
        }
        if !(0.0..=1.0).contains(&self.phi_r) {
            return Err(Error::InvalidParameter { field: "phi_r", value: self.phi_r, reason: "must lie in [0, 1]" });
        }
        Ok(())
    }

    /// Set one field by its config key.
    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        match key {
            "alpha" => self.alpha = value,
            "beta" => self.beta = value,
            "gamma" => self.gamma = value,
            "delta" => self.delta = value,
            "c_alpha" => self.c_alpha = value,
            "c_beta" => self.c_beta = value,
            "c_gamma" => self.c_gamma = value,
            "c_delta" => self.c_delta = value,
            "x0" => self.x0 = value,
            "phi_r" => self.phi_r = value,
            other => return Err(Error::Config(format!("unknown parameter key `{other}`"))),
        }
        Ok(())
    }

    /// Overlay `key = value` lines on `self`. Blank lines and `#` comments are
    /// skipped; `R = ...` sets φ(R) through the Holling type II response.
    /// Keys that are not model parameters are returned untouched so callers
    /// can interpret them.
    pub fn apply_kv(&mut self, text: &str) -> Result<Vec<(String, String)>> {
        let mut rest = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value", lineno + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if Self::KEYS.contains(&k) || k == "R" {
                let value: f64 = v
                    .parse()
                    .map_err(|_| Error::Config(format!("line {}: `{v}` is not a number", lineno + 1)))?;
                if k == "R" {
                    self.phi_r = holling_ii(value);
                } else {
                    self.set(k, value)?;
                }
            } else {
                rest.push((k.to_string(), v.to_string()));
            }
        }
        Ok(rest)
    }
}

/// Holling type II functional response `R / (1 + R)`.
pub fn holling_ii(resource: f64) -> f64 {
    if resource <= 0.0 {
        0.0
    } else {
        resource / (1.0 + resource)
    }
}

/// Rate functions of one parameter set.
#[derive(Debug, Clone, Copy)]
pub struct RateBundle {
    params: AllometricParams,
}

impl RateBundle {
    pub(crate) fn from_params_unchecked(params: AllometricParams) -> Self {
        RateBundle { params }
    }
    pub fn params(&self) -> &AllometricParams {
        &self.params
    }
    /// `1{x > x₀} C_β x^β`
    pub fn birth(&self, x: f64) -> f64 {
        if x > self.params.x0 {
            self.birth_tilde(x)
        } else {
            0.0
        }
    }
    /// Birth rate without the energy indicator, `C_β x^β`.
    pub fn birth_tilde(&self, x: f64) -> f64 {
        self.params.c_beta * x.powf(self.params.beta)
    }
    pub fn death(&self, x: f64) -> f64 {
        self.params.c_delta * x.powf(self.params.delta)
    }
    pub fn loss(&self, x: f64) -> f64 {
        self.params.c_alpha * x.powf(self.params.alpha)
    }
    pub fn intake(&self, x: f64) -> f64 {
        self.params.phi_r * self.params.c_gamma * x.powf(self.params.gamma)
    }
    pub fn net_growth(&self, x: f64) -> f64 {
        self.intake(x) - self.loss(x)
    }
}

pub fn eval_rates(params: &AllometricParams) -> Result<RateBundle> {
    params.validate()?;
    Ok(RateBundle { params: *params })
}

/// Energy at time `t` of the deterministic flow started at `xi0`.
pub fn flow(params: &AllometricParams, xi0: f64, t: f64) -> Result<f64> {
    params.validate_allow_zero_x0()?;
    if !(xi0 > 0.0) || !(t >= 0.0) {
        return Err(Error::Domain(format!("flow needs xi0 > 0 and t >= 0, got xi0={xi0}, t={t}")));
    }
    Dynamics::new(params)?.flow(xi0, t)
}

/// Deterministic time at which the flow from `xi0` reaches 0 or +∞
/// (`f64::INFINITY` if it never does).
pub fn t_max(params: &AllometricParams, xi0: f64) -> Result<f64> {
    params.validate_allow_zero_x0()?;
    if !(xi0 > 0.0) {
        return Err(Error::Domain(format!("t_max needs xi0 > 0, got {xi0}")));
    }
    Ok(Dynamics::new(params)?.t_max(xi0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceFlags {
    /// g(x) > 0 for every x > 0.
    pub in_r0: bool,
    /// g < 0 on some interval (0, x].
    pub in_frak_r0: bool,
    /// g > 0 on some interval [x, ∞).
    pub in_frak_rinf: bool,
}

pub fn resource_set_membership(params: &AllometricParams) -> ResourceFlags {
    let p = params;
    let intake = p.phi_r * p.c_gamma;
    if p.is_power_flow() {
        let cr = p.c_r();
        return ResourceFlags { in_r0: cr > 0.0, in_frak_r0: cr < 0.0, in_frak_rinf: cr > 0.0 };
    }
    if intake == 0.0 {
        return ResourceFlags { in_r0: false, in_frak_r0: true, in_frak_rinf: false };
    }
    // the smaller exponent dominates near 0, the larger one near infinity
    let intake_wins_low = p.gamma < p.alpha;
    ResourceFlags { in_r0: false, in_frak_r0: !intake_wins_low, in_frak_rinf: !intake_wins_low }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionSet {
    /// The eight necessary points for `α ≤ 1`.
    SublinearLoss,
    /// The five necessary points for `α > 1`.
    SuperlinearLoss,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCheck {
    pub point: u8,
    pub statement: std::borrow::Cow<'static, str>,
    /// `None` when the statement involves an undefined threshold.
    pub holds: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "violated", rename_all = "snake_case")]
pub enum Verdict {
    AdmissibleI1,
    AdmissibleI2,
    /// Every necessary point holds but the exponents are in neither I₁ nor
    /// I₂ (only possible when α > 1).
    Admissible,
    NecessaryConditionsViolated(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    /// `δ ≤ α − 1`: energy cannot drift to 0 without dying.
    pub avoids_zero: bool,
    /// Divergence of `∫^∞ (b + d)/g`, decided from the dominant exponents.
    pub avoids_infinity_integral: bool,
    /// `γ = α` and `C_γ > C_α`: every species can grow with enough resource.
    pub gains_energy: bool,
    pub condition_set: ConditionSet,
    pub points: Vec<PointCheck>,
    pub i1: bool,
    pub i2: bool,
    pub i2_threshold: Option<f64>,
    pub verdict: Verdict,
}

fn eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= EXPONENT_EPS
}
fn ge(a: f64, b: f64) -> bool {
    a >= b - EXPONENT_EPS
}
fn gt(a: f64, b: f64) -> bool {
    a > b + EXPONENT_EPS
}
fn implies(antecedent: bool, consequent: Option<bool>) -> Option<bool> {
    if antecedent {
        consequent
    } else {
        Some(true)
    }
}

/// `α − 1 + C_δ/(C_γ − C_α)`, defined when `C_γ > C_α`.
pub fn i2_threshold(params: &AllometricParams) -> Option<f64> {
    let gap = params.gap();
    (gap > 0.0).then(|| params.alpha - 1.0 + params.c_delta / gap)
}

pub fn classify_regime(params: &AllometricParams) -> RegimeReport {
    let p = params;
    let am1 = p.alpha - 1.0;
    let thr = i2_threshold(p);
    let gamma_eq = eq(p.gamma, p.alpha);
    let gains_energy = gamma_eq && p.c_gamma > p.c_alpha;
    let avoids_zero = p.delta <= am1 + EXPONENT_EPS;
    let growth_exp = if p.gamma > p.alpha { p.gamma } else { p.alpha };
    let avoids_infinity_integral = if p.gamma < p.alpha - EXPONENT_EPS {
        // loss dominates at large energy: no R makes g positive near infinity
        true
    } else {
        ge(p.beta.max(p.delta), growth_exp - 1.0)
    };

    let delta_crit = eq(p.delta, am1);
    let beta_crit = eq(p.beta, am1);
    let beta_above = gt(p.beta, am1);
    let beta_reaches_thr = thr.map(|t| ge(p.beta, t));
    let i1 = gamma_eq && delta_crit && beta_crit;
    let i2 = gamma_eq && delta_crit && beta_reaches_thr == Some(true);

    let (condition_set, points) = if p.alpha <= 1.0 {
        (
            ConditionSet::SublinearLoss,
            vec![
                PointCheck { point: 1, statement: "gamma = alpha and c_gamma > c_alpha".into(), holds: Some(gains_energy) },
                PointCheck { point: 2, statement: "delta <= alpha - 1".into(), holds: Some(avoids_zero) },
                PointCheck {
                    point: 3,
                    statement: "max(beta, delta) >= alpha - 1".into(),
                    holds: Some(ge(p.beta.max(p.delta), am1)),
                },
                PointCheck {
                    point: 4,
                    statement: "beta >= alpha - 1, and c_beta > c_delta if beta = delta = alpha - 1".into(),
                    holds: Some(ge(p.beta, am1) && (!(beta_crit && delta_crit) || p.c_beta > p.c_delta)),
                },
                PointCheck {
                    point: 5,
                    statement: "if delta = alpha - 1 < beta then beta >= alpha - 1 + c_delta/(c_gamma - c_alpha)".into(),
                    holds: implies(delta_crit && beta_above, beta_reaches_thr),
                },
                PointCheck {
                    point: 6,
                    statement: "if beta > alpha then delta >= alpha - 1".into(),
                    holds: implies(gt(p.beta, p.alpha), Some(ge(p.delta, am1))),
                },
                PointCheck {
                    point: 7,
                    statement: "if delta = alpha - 1 < beta then c_delta <= c_gamma - c_alpha".into(),
                    holds: implies(delta_crit && beta_above, Some(p.c_delta <= p.gap())),
                },
                PointCheck {
                    point: 8,
                    statement: "if beta <= alpha then delta >= alpha - 1".into(),
                    holds: implies(!gt(p.beta, p.alpha), Some(ge(p.delta, am1))),
                },
            ],
        )
    } else {
        let beta_big = gt(p.beta, p.alpha);
        (
            ConditionSet::SuperlinearLoss,
            vec![
                PointCheck { point: 1, statement: "gamma = alpha and c_gamma > c_alpha".into(), holds: Some(gains_energy) },
                PointCheck {
                    point: 2,
                    statement: "delta <= alpha - 1 <= beta".into(),
                    holds: Some(avoids_zero && ge(p.beta, am1)),
                },
                PointCheck {
                    point: 3,
                    statement: "if beta = delta = alpha - 1 then c_beta > c_delta".into(),
                    holds: implies(beta_crit && delta_crit, Some(p.c_beta > p.c_delta)),
                },
                PointCheck {
                    point: 4,
                    statement: "if delta = alpha - 1 < beta then beta >= alpha - 1 + c_delta/(c_gamma - c_alpha)".into(),
                    holds: implies(delta_crit && beta_above, beta_reaches_thr),
                },
                PointCheck {
                    point: 5,
                    statement: "if beta > alpha then delta >= alpha - 1, and c_delta <= c_gamma - c_alpha when delta = alpha - 1".into(),
                    holds: implies(
                        beta_big,
                        Some(ge(p.delta, am1) && (!delta_crit || p.c_delta <= p.gap())),
                    ),
                },
            ],
        )
    };

    let violated: Vec<String> = points
        .iter()
        .filter(|c| c.holds == Some(false))
        .map(|c| format!("point {}: {}", c.point, c.statement))
        .collect();
    let verdict = if !violated.is_empty() {
        Verdict::NecessaryConditionsViolated(violated)
    } else if i1 {
        Verdict::AdmissibleI1
    } else if i2 {
        Verdict::AdmissibleI2
    } else {
        Verdict::Admissible
    };

    RegimeReport {
        avoids_zero,
        avoids_infinity_integral,
        gains_energy,
        condition_set,
        points,
        i1,
        i2,
        i2_threshold: thr,
        verdict,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kv_overlay_reads_parameters_and_returns_the_rest() {
        let mut p = AllometricParams::baseline();
        let rest = p.apply_kv("beta = 0.3 # comment\n\nc_delta=0.1\npaths = 6\n").unwrap();
        assert_eq!(p.beta, 0.3);
        assert_eq!(p.c_delta, 0.1);
        assert_eq!(rest, vec![("paths".to_string(), "6".to_string())]);
    }

    #[test]
    fn kv_rejects_garbage() {
        let mut p = AllometricParams::baseline();
        assert!(p.apply_kv("beta 0.3").is_err());
        assert!(p.apply_kv("beta = abc").is_err());
    }

    #[test]
    fn holling_maps_resource_into_unit_interval() {
        assert_eq!(holling_ii(0.0), 0.0);
        assert_eq!(holling_ii(1.0), 0.5);
        assert!(holling_ii(1e12) < 1.0);
    }
}
