//! Parameters and primitive functions of the supervision model.
//!
//! A worker chooses effort `e ∈ [0, 1]` each period. With probability `p` the
//! employer evaluates the worker and resets the wage from the deserved wage
//! `ŵ(e) = s·e` (with `s` the wage scale, `λ·k`); otherwise the previous wage
//! carries over. Everything here is a pure function of its arguments.

use serde::{Deserialize, Serialize};

use crate::error::{check_range, ModelError, Result};

/// The employer's offer: evaluation probability, bonus/penalty rate and base wage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ContractFields")]
pub struct ContractParams {
    p: f64,
    alpha: f64,
    w0: f64,
}

#[derive(Deserialize)]
struct ContractFields {
    p: f64,
    alpha: f64,
    w0: f64,
}

impl TryFrom<ContractFields> for ContractParams {
    type Error = ModelError;

    fn try_from(f: ContractFields) -> Result<Self> {
        Self::new(f.p, f.alpha, f.w0)
    }
}

impl ContractParams {
    pub fn new(p: f64, alpha: f64, w0: f64) -> Result<Self> {
        first(Self::violations(p, alpha, w0))?;
        Ok(Self { p, alpha, w0 })
    }

    /// Every bound the arguments break.
    pub fn violations(p: f64, alpha: f64, w0: f64) -> Vec<ModelError> {
        [
            check_range("p", p, (0.0..=1.0).contains(&p), "[0, 1]"),
            check_range("alpha", alpha, (0.0..=1.0).contains(&alpha), "[0, 1]"),
            check_range("w0", w0, w0 >= 0.0, "[0, inf)"),
        ]
        .into_iter()
        .filter_map(Result::err)
        .collect()
    }

    /// Probability of being evaluated in any period.
    pub fn p(&self) -> f64 {
        self.p
    }

    /// Bonus/penalty rate.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Base wage.
    pub fn w0(&self) -> f64 {
        self.w0
    }

    pub fn with_w0(&self, w0: f64) -> Result<Self> {
        Self::new(self.p, self.alpha, w0)
    }
}

/// Which utility family a worker uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UtilityFamily {
    Additive,
    CobbDouglas,
}

/// Worker preferences. Each family carries only its own parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", try_from = "PrefsFields")]
pub enum WorkerPrefs {
    /// `U = ln(c) − b·e`
    Additive { b: f64, delta: f64 },
    /// `U = (1 − e)^γ · c^β`
    CobbDouglas { gamma: f64, beta: f64, delta: f64 },
}

#[derive(Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
enum PrefsFields {
    Additive { b: f64, delta: f64 },
    CobbDouglas { gamma: f64, beta: f64, delta: f64 },
}

impl TryFrom<PrefsFields> for WorkerPrefs {
    type Error = ModelError;

    fn try_from(f: PrefsFields) -> Result<Self> {
        match f {
            PrefsFields::Additive { b, delta } => Self::additive(b, delta),
            PrefsFields::CobbDouglas { gamma, beta, delta } => Self::cobb_douglas(gamma, beta, delta),
        }
    }
}

impl WorkerPrefs {
    pub const DEFAULT_B: f64 = 1.0;

    pub fn additive(b: f64, delta: f64) -> Result<Self> {
        first(Self::additive_violations(b, delta))?;
        Ok(Self::Additive { b, delta })
    }

    pub fn additive_violations(b: f64, delta: f64) -> Vec<ModelError> {
        [check_range("b", b, b > 0.0, "(0, inf)"), check_delta(delta)]
            .into_iter()
            .filter_map(Result::err)
            .collect()
    }

    pub fn cobb_douglas(gamma: f64, beta: f64, delta: f64) -> Result<Self> {
        first(Self::cobb_douglas_violations(gamma, beta, delta))?;
        Ok(Self::CobbDouglas { gamma, beta, delta })
    }

    pub fn cobb_douglas_violations(gamma: f64, beta: f64, delta: f64) -> Vec<ModelError> {
        [
            check_range("gamma", gamma, gamma > 0.0, "(0, inf)"),
            check_range("beta", beta, beta > 0.0, "(0, inf)"),
            check_delta(delta),
        ]
        .into_iter()
        .filter_map(Result::err)
        .collect()
    }

    pub fn family(&self) -> UtilityFamily {
        match self {
            Self::Additive { .. } => UtilityFamily::Additive,
            Self::CobbDouglas { .. } => UtilityFamily::CobbDouglas,
        }
    }

    /// Worker time-discount factor.
    pub fn delta(&self) -> f64 {
        match *self {
            Self::Additive { delta, .. } | Self::CobbDouglas { delta, .. } => delta,
        }
    }

    /// Disutility-of-effort coefficient of the additive family.
    pub fn additive_b(&self) -> Result<f64> {
        match *self {
            Self::Additive { b, .. } => Ok(b),
            _ => Err(ModelError::WrongFamily {
                expected: "additive",
            }),
        }
    }

    /// `(gamma, beta)` of the Cobb-Douglas family.
    pub fn cobb_douglas_exponents(&self) -> Result<(f64, f64)> {
        match *self {
            Self::CobbDouglas { gamma, beta, .. } => Ok((gamma, beta)),
            _ => Err(ModelError::WrongFamily {
                expected: "cobb_douglas",
            }),
        }
    }
}

fn first(errors: Vec<ModelError>) -> Result<()> {
    errors.into_iter().next().map_or(Ok(()), Err)
}

fn check_delta(delta: f64) -> Result<()> {
    check_range("delta", delta, delta > 0.0 && delta < 1.0, "(0, 1)")
}

/// Production, revenue sharing and monitoring parameters of the firm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FirmFields")]
pub struct FirmParams {
    k: f64,
    lambda: f64,
    c: f64,
    eta: f64,
}

#[derive(Deserialize)]
struct FirmFields {
    k: f64,
    lambda: f64,
    c: f64,
    eta: f64,
}

impl TryFrom<FirmFields> for FirmParams {
    type Error = ModelError;

    fn try_from(f: FirmFields) -> Result<Self> {
        Self::new(f.k, f.lambda, f.c, f.eta)
    }
}

impl FirmParams {
    pub fn new(k: f64, lambda: f64, c: f64, eta: f64) -> Result<Self> {
        first(Self::violations(k, lambda, c, eta))?;
        Ok(Self { k, lambda, c, eta })
    }

    pub fn violations(k: f64, lambda: f64, c: f64, eta: f64) -> Vec<ModelError> {
        [
            check_range("k", k, k > 0.0, "(0, inf)"),
            check_range("lambda", lambda, lambda > 0.0 && lambda <= 1.0, "(0, 1]"),
            check_range("c", c, c >= 0.0, "[0, inf)"),
            check_range("eta", eta, eta > 0.0 && eta <= 1.0, "(0, 1]"),
        ]
        .into_iter()
        .filter_map(Result::err)
        .collect()
    }

    /// Marginal product per unit of effort.
    pub fn k(&self) -> f64 {
        self.k
    }

    /// Worker share of revenue.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Cost of one evaluation.
    pub fn c(&self) -> f64 {
        self.c
    }

    /// Employer discount factor.
    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Deserved wage per unit of effort, `λ·k`.
    pub fn wage_scale(&self) -> f64 {
        self.lambda * self.k
    }

    pub fn with_k(&self, k: f64) -> Result<Self> {
        Self::new(k, self.lambda, self.c, self.eta)
    }
}

/// Number of work periods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize")]
pub struct Horizon(usize);

impl TryFrom<usize> for Horizon {
    type Error = ModelError;

    fn try_from(periods: usize) -> Result<Self> {
        Self::new(periods)
    }
}

impl Horizon {
    pub fn new(periods: usize) -> Result<Self> {
        if periods == 0 {
            return Err(ModelError::OutOfRange {
                name: "T",
                value: 0.0,
                bound: "[1, inf)",
            });
        }
        Ok(Self(periods))
    }

    pub fn periods(&self) -> usize {
        self.0
    }
}

/// Wage after one period. Unevaluated workers keep `prev_wage`; evaluated
/// workers get `max{ŵ(e) + α(ŵ(e) − prev_wage), 0}` with `ŵ(e) = wage_scale·e`.
pub fn wage_update(
    prev_wage: f64,
    effort: f64,
    contract: &ContractParams,
    evaluated: bool,
    wage_scale: f64,
) -> f64 {
    if !evaluated {
        return prev_wage;
    }
    let deserved = wage_scale * effort;
    (deserved + contract.alpha() * (deserved - prev_wage)).max(0.0)
}

/// Nonrecurrent bonus paid on evaluation: `α·(e − prev_wage)`.
///
/// `effort` is measured in wage units; pass `s·e` when the wage scale `s` is
/// not one.
pub fn bonus(prev_wage: f64, effort: f64, alpha: f64, evaluated: bool) -> f64 {
    if evaluated {
        alpha * (effort - prev_wage)
    } else {
        0.0
    }
}

/// Consumption from wage plus bonus.
pub fn consumption(wage: f64, bonus: f64) -> Result<f64> {
    let c = wage + bonus;
    if c < 0.0 {
        return Err(ModelError::Domain(format!(
            "negative consumption {c} (wage {wage}, bonus {bonus})"
        )));
    }
    Ok(c)
}

/// Single-period utility.
pub fn period_utility(consumption: f64, effort: f64, prefs: &WorkerPrefs) -> Result<f64> {
    match *prefs {
        WorkerPrefs::Additive { b, .. } => {
            if consumption <= 0.0 {
                return Err(ModelError::Domain(format!(
                    "log utility needs positive consumption, got {consumption}"
                )));
            }
            Ok(consumption.ln() - b * effort)
        }
        WorkerPrefs::CobbDouglas { gamma, beta, .. } => {
            if consumption < 0.0 || !(0.0..=1.0).contains(&effort) {
                return Err(ModelError::Domain(format!(
                    "Cobb-Douglas utility needs c >= 0 and e in [0, 1], got c={consumption}, e={effort}"
                )));
            }
            Ok(cobb_douglas_utility(consumption, effort, gamma, beta))
        }
    }
}

#[inline]
pub(crate) fn cobb_douglas_utility(consumption: f64, effort: f64, gamma: f64, beta: f64) -> f64 {
    (1.0 - effort).powf(gamma) * consumption.powf(beta)
}

/// Output of one worker, `k·e`.
pub fn production(effort: f64, firm: &FirmParams) -> f64 {
    firm.k() * effort
}
