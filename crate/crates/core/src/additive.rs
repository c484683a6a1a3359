//! Worker problem under log-additive utility `U = ln(c) − b·e`.
//!
//! With a linear deserved wage the Bellman objective separates: the wage a
//! worker earns when evaluated, `x = (1+α)·s·e − α·w`, enters the objective
//! only through terms that do not involve the previous wage `w`. The optimal
//! evaluated wage `W_t` is therefore the same for every `w`, and effort is
//! affine in the previous wage:
//!
//! ```text
//! e_t(w) = (p/b)·φ_t + α/(1+α) · w/s,      W_t = (p/b)·(1+α)·s·φ_t
//! ```
//!
//! Three routes are provided:
//! * [`solve_backward_induction`]: a grid oracle that maximizes the Bellman
//!   objective state by state, with linear interpolation of continuation
//!   values. It never uses the separable structure, and `φ_t` is fitted from
//!   its output.
//! * [`solve_exact`]: one scalar maximization per period over `W_t`, with
//!   continuation values evaluated exactly by recursion. Handles the effort
//!   cap `e ≤ 1` and is cheap enough for the employer's outer search.
//! * closed-form single-period results and the printed coefficient formula,
//!   kept as a diagnostic.

use rayon::prelude::*;
use serde::Serialize;

use crate::distribution::{WageDistribution, WagePolicy};
use crate::error::{ModelError, Result};
use crate::model::{wage_update, ContractParams, Horizon, WorkerPrefs};
use crate::optimize::{bisect_decreasing, maximize_with_slope};

/// Effort policy and wages of a solved additive worker.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdditiveSolution {
    pub contract: ContractParams,
    pub b: f64,
    pub wage_scale: f64,
    /// `φ_t` for `t = 1..=T`; NaN when `p = 0` (no evaluation ever happens).
    pub phi: Vec<f64>,
    /// Wage if evaluated in period `t`, `W_t`.
    pub evaluated_wage: Vec<f64>,
    /// Effort at the base wage, `e_t(w0)`.
    pub effort_at_w0: Vec<f64>,
}

impl AdditiveSolution {
    fn from_phi(contract: ContractParams, b: f64, wage_scale: f64, phi: Vec<f64>) -> Self {
        let mut sol = Self {
            contract,
            b,
            wage_scale,
            phi,
            evaluated_wage: Vec::new(),
            effort_at_w0: Vec::new(),
        };
        let periods = sol.phi.len();
        sol.evaluated_wage = (1..=periods)
            .map(|t| {
                if contract.p() == 0.0 {
                    f64::NAN
                } else {
                    sol.evaluated_wage_at(t, contract.w0())
                }
            })
            .collect();
        sol.effort_at_w0 = (1..=periods)
            .map(|t| sol.closed_form_effort(t, contract.w0()))
            .collect();
        sol
    }

    pub fn periods(&self) -> usize {
        self.phi.len()
    }

    /// `e_t(w) = (p/b)·φ_t + α/(1+α)·w/s`, clamped to `[0, 1]`; zero when `p = 0`.
    pub fn closed_form_effort(&self, t: usize, prev_wage: f64) -> f64 {
        let p = self.contract.p();
        if p == 0.0 {
            return 0.0;
        }
        let alpha = self.contract.alpha();
        let e = p / self.b * self.phi[t - 1] + alpha / (1.0 + alpha) * prev_wage / self.wage_scale;
        e.clamp(0.0, 1.0)
    }

    fn evaluated_wage_at(&self, t: usize, prev_wage: f64) -> f64 {
        let e = self.closed_form_effort(t, prev_wage);
        wage_update(prev_wage, e, &self.contract, true, self.wage_scale)
    }

    /// `t, phi, evaluated_wage, effort_at_w0` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,phi,evaluated_wage,effort_at_w0\n");
        for t in 0..self.periods() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                t + 1,
                self.phi[t],
                self.evaluated_wage[t],
                self.effort_at_w0[t]
            ));
        }
        out
    }
}

impl WagePolicy for AdditiveSolution {
    fn periods(&self) -> usize {
        self.phi.len()
    }

    fn effort(&self, period: usize, prev_wage: f64) -> f64 {
        self.closed_form_effort(period, prev_wage)
    }

    fn evaluated_wage(&self, period: usize, prev_wage: f64) -> f64 {
        self.evaluated_wage_at(period, prev_wage)
    }

    fn merge_tolerance(&self) -> f64 {
        1e-9
    }
}

fn additive_b(prefs: &WorkerPrefs) -> Result<f64> {
    prefs.additive_b()
}

fn check_base_wage(contract: &ContractParams) -> Result<()> {
    if contract.p() < 1.0 && contract.w0() <= 0.0 {
        return Err(ModelError::Domain(
            "additive worker needs w0 > 0 when p < 1 (zero consumption when never evaluated)".into(),
        ));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Grid oracle
// ---------------------------------------------------------------------------

/// Settings of the grid oracle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleOptions {
    pub grid_points: usize,
    /// Upper end of the wage grid; `None` uses `max(1.5, (1+α)·s)`.
    pub wage_max: Option<f64>,
    pub effort_tolerance: f64,
    pub wage_scale: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            grid_points: 1001,
            wage_max: None,
            effort_tolerance: 1e-6,
            wage_scale: 1.0,
        }
    }
}

/// Piecewise-linear function on a uniform grid; `-inf` nodes poison their segments.
#[derive(Debug, Clone)]
struct LinearTable {
    step: f64,
    values: Vec<f64>,
}

impl LinearTable {
    fn segment(&self, x: f64) -> (usize, f64) {
        let last = self.values.len() - 2;
        let pos = x / self.step;
        let k = (pos.floor().max(0.0) as usize).min(last);
        (k, pos - k as f64)
    }

    fn value(&self, x: f64) -> f64 {
        let (k, theta) = self.segment(x);
        let (lo, hi) = (self.values[k], self.values[k + 1]);
        if theta == 0.0 {
            return lo;
        }
        if theta == 1.0 {
            return hi;
        }
        if lo == f64::NEG_INFINITY || hi == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        lo + theta * (hi - lo)
    }

    fn slope(&self, x: f64) -> f64 {
        let (k, _) = self.segment(x);
        let (lo, hi) = (self.values[k], self.values[k + 1]);
        match (lo == f64::NEG_INFINITY, hi == f64::NEG_INFINITY) {
            (false, false) => (hi - lo) / self.step,
            (true, false) => f64::INFINITY,
            _ => f64::NEG_INFINITY,
        }
    }
}

/// Output of the grid oracle.
#[derive(Debug, Clone)]
pub struct OracleSolution {
    pub contract: ContractParams,
    pub prefs: WorkerPrefs,
    pub options: OracleOptions,
    /// Wage grid `0, h, 2h, …, wage_max`.
    pub grid: Vec<f64>,
    /// `effort[t-1][i]`: optimal effort at grid wage `i` in period `t`; NaN where
    /// no choice gives positive consumption.
    pub effort: Vec<Vec<f64>>,
    /// `value[t-1][i]`: value function; `value[T]` is the zero terminal value.
    pub value: Vec<Vec<f64>>,
    /// Wage if evaluated at the optimum, same layout as `effort`.
    pub evaluated_wage: Vec<Vec<f64>>,
    /// Solution with `φ_t` fitted from the grid state nearest `w0`.
    pub fitted: AdditiveSolution,
}

impl OracleSolution {
    pub fn periods(&self) -> usize {
        self.effort.len()
    }

    fn table(&self, t: usize) -> LinearTable {
        LinearTable {
            step: self.grid[1] - self.grid[0],
            values: self.value[t].clone(),
        }
    }

    /// Bellman objective of period `t` at grid state `i` for effort `e`.
    pub fn objective(&self, t: usize, i: usize, e: f64) -> f64 {
        let b = self.prefs.additive_b().expect("oracle is built for additive prefs");
        let next = self.table(t);
        bellman_objective(
            &self.contract,
            b,
            self.prefs.delta(),
            self.options.wage_scale,
            &next,
            self.grid[i],
            self.value[t][i],
            e,
        )
    }

    /// Grid indices whose state admits positive consumption.
    pub fn feasible_states(&self, t: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.grid.len()).filter(move |&i| self.effort[t - 1][i].is_finite())
    }

    /// `max_i |W_t(w_i) − W_t(w_j)|` over feasible states with interior effort.
    pub fn evaluated_wage_spread(&self, t: usize) -> f64 {
        let vals: Vec<f64> = self
            .feasible_states(t)
            .filter(|&i| self.effort[t - 1][i] < 1.0)
            .map(|i| self.evaluated_wage[t - 1][i])
            .collect();
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    }
}

#[allow(clippy::too_many_arguments)]
fn bellman_objective(
    contract: &ContractParams,
    b: f64,
    delta: f64,
    wage_scale: f64,
    next: &LinearTable,
    w: f64,
    next_value_at_w: f64,
    e: f64,
) -> f64 {
    let p = contract.p();
    let alpha = contract.alpha();
    let mut total = -b * e;
    if p < 1.0 {
        total += (1.0 - p) * (w.ln() + delta * next_value_at_w);
    }
    if p > 0.0 {
        let x = (1.0 + alpha) * wage_scale * e - alpha * w;
        if x <= 0.0 {
            return f64::NEG_INFINITY;
        }
        total += p * (x.ln() + delta * next.value(x));
    }
    total
}

fn bellman_slope(
    contract: &ContractParams,
    b: f64,
    delta: f64,
    wage_scale: f64,
    next: &LinearTable,
    w: f64,
    e: f64,
) -> f64 {
    let p = contract.p();
    if p == 0.0 {
        return -b;
    }
    let alpha = contract.alpha();
    let x = (1.0 + alpha) * wage_scale * e - alpha * w;
    if x <= 0.0 {
        return f64::INFINITY;
    }
    (1.0 + alpha) * wage_scale * p * (1.0 / x + delta * next.slope(x)) - b
}

/// Numerical backward induction on a wage grid.
///
/// For every period (from `T` back to 1) and grid wage, the effort in `[0, 1]`
/// maximizing
/// `p·ln(x) + (1−p)·ln(w) − b·e + δ·[p·V(x) + (1−p)·V(w)]`, `x = (1+α)·s·e − α·w`,
/// is found by golden-section search to `effort_tolerance` followed by a
/// slope bisection; `V` is the linearly interpolated next-period value.
pub fn solve_backward_induction(
    contract: &ContractParams,
    prefs: &WorkerPrefs,
    horizon: Horizon,
    options: &OracleOptions,
) -> Result<OracleSolution> {
    let b = additive_b(prefs)?;
    check_base_wage(contract)?;
    if options.grid_points < 3 {
        return Err(ModelError::Grid("oracle needs at least 3 grid points".into()));
    }
    let s = options.wage_scale;
    if !(s > 0.0) {
        return Err(ModelError::Grid(format!("wage scale must be positive, got {s}")));
    }
    let alpha = contract.alpha();
    let wage_max = options
        .wage_max
        .unwrap_or_else(|| 1.5f64.max((1.0 + alpha) * s));
    if !(wage_max > 0.0) {
        return Err(ModelError::Grid(format!("wage_max must be positive, got {wage_max}")));
    }
    let n = options.grid_points;
    let grid: Vec<f64> = (0..n).map(|i| wage_max * i as f64 / (n - 1) as f64).collect();
    let step = grid[1];
    let delta = prefs.delta();
    let periods = horizon.periods();

    let mut value = vec![vec![0.0; n]; periods + 1];
    let mut effort = vec![vec![f64::NAN; n]; periods];
    let mut evaluated = vec![vec![f64::NAN; n]; periods];

    for t in (1..=periods).rev() {
        let next = LinearTable {
            step,
            values: value[t].clone(),
        };
        let solved: Vec<(f64, f64, f64)> = grid
            .par_iter()
            .enumerate()
            .map(|(i, &w)| {
                let v_next_w = next.values[i];
                let f = |e: f64| bellman_objective(contract, b, delta, s, &next, w, v_next_w, e);
                let df = |e: f64| bellman_slope(contract, b, delta, s, &next, w, e);
                let best = maximize_with_slope(f, df, 0.0, 1.0, options.effort_tolerance);
                if best.value == f64::NEG_INFINITY {
                    (f64::NAN, f64::NEG_INFINITY, f64::NAN)
                } else {
                    let wage = wage_update(w, best.x, contract, true, s);
                    (best.x, best.value, wage)
                }
            })
            .collect();
        for (i, (e, v, wage)) in solved.into_iter().enumerate() {
            effort[t - 1][i] = e;
            value[t - 1][i] = v;
            evaluated[t - 1][i] = wage;
        }
    }

    let anchor = grid
        .iter()
        .enumerate()
        .filter(|&(i, _)| effort.iter().all(|row| row[i].is_finite()))
        .min_by(|a, b| (a.1 - contract.w0()).abs().total_cmp(&(b.1 - contract.w0()).abs()))
        .map(|(i, _)| i)
        .ok_or_else(|| ModelError::Domain("no feasible wage state on the grid".into()))?;
    let phi: Vec<f64> = (0..periods)
        .map(|t| {
            if contract.p() == 0.0 {
                f64::NAN
            } else {
                evaluated[t][anchor] * b / (contract.p() * (1.0 + alpha) * s)
            }
        })
        .collect();
    let fitted = AdditiveSolution::from_phi(*contract, b, s, phi);

    Ok(OracleSolution {
        contract: *contract,
        prefs: *prefs,
        options: OracleOptions {
            wage_max: Some(wage_max),
            ..*options
        },
        grid,
        effort,
        value,
        evaluated_wage: evaluated,
        fitted,
    })
}

// ---------------------------------------------------------------------------
// Separable exact solver
// ---------------------------------------------------------------------------

/// Continuation values of the separable problem, evaluated by recursion.
struct SeparableValues<'a> {
    p: f64,
    alpha: f64,
    b: f64,
    delta: f64,
    /// `(1+α)·s`, the evaluated wage at full effort from a zero wage.
    x_full: f64,
    /// Optimal evaluated wages for periods `t+1..=T` once solved, indexed by period - 1.
    x_star: &'a [f64],
    periods: usize,
}

impl SeparableValues<'_> {
    /// Evaluated wage actually chosen at state `w` in period `t`.
    fn chosen(&self, t: usize, w: f64) -> (f64, bool) {
        let cap = self.x_full - self.alpha * w;
        let target = self.x_star[t - 1];
        if target <= cap {
            (target, false)
        } else {
            (cap, true)
        }
    }

    fn value(&self, t: usize, w: f64) -> f64 {
        if t > self.periods {
            return 0.0;
        }
        let p = self.p;
        let mut total = 0.0;
        if p < 1.0 {
            total += (1.0 - p) * (w.ln() + self.delta * self.value(t + 1, w));
        }
        if p == 0.0 {
            return total;
        }
        let (x, _) = self.chosen(t, w);
        if x <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let e = (x + self.alpha * w) / self.x_full;
        total + p * (x.ln() + self.delta * self.value(t + 1, x)) - self.b * e
    }

    fn slope(&self, t: usize, w: f64) -> f64 {
        if t > self.periods {
            return 0.0;
        }
        let p = self.p;
        let mut total = 0.0;
        if p < 1.0 {
            total += (1.0 - p) * (1.0 / w + self.delta * self.slope(t + 1, w));
        }
        if p == 0.0 {
            return total;
        }
        let (x, capped) = self.chosen(t, w);
        if x <= 0.0 {
            return f64::NEG_INFINITY;
        }
        if capped {
            total - self.alpha * p * (1.0 / x + self.delta * self.slope(t + 1, x))
        } else {
            total - self.b * self.alpha / self.x_full
        }
    }
}

/// Solves the additive worker exactly by one maximization per period.
///
/// Period `t` maximizes `p·ln(x) − b·x/((1+α)s) + δ·p·V_{t+1}(x)` over the
/// evaluated wage `x ∈ (0, (1+α)s]`; the objective is concave, so a slope
/// bisection finds the maximizer to machine precision. States where full
/// effort cannot reach that wage take the capped wage `(1+α)s − α·w`.
pub fn solve_exact(
    contract: &ContractParams,
    prefs: &WorkerPrefs,
    horizon: Horizon,
    wage_scale: f64,
) -> Result<AdditiveSolution> {
    let b = additive_b(prefs)?;
    check_base_wage(contract)?;
    if !(wage_scale > 0.0) {
        return Err(ModelError::Domain(format!(
            "wage scale must be positive, got {wage_scale}"
        )));
    }
    let p = contract.p();
    let alpha = contract.alpha();
    let periods = horizon.periods();
    let x_full = (1.0 + alpha) * wage_scale;
    if p > 0.0 && x_full - alpha * contract.w0() <= 0.0 {
        return Err(ModelError::Domain(format!(
            "base wage {} too high: no effort gives positive evaluated pay",
            contract.w0()
        )));
    }
    let mut x_star = vec![f64::NAN; periods];
    if p > 0.0 {
        for t in (1..=periods).rev() {
            let x = if t == periods {
                (p * x_full / b).min(x_full)
            } else {
                let values = SeparableValues {
                    p,
                    alpha,
                    b,
                    delta: prefs.delta(),
                    x_full,
                    x_star: &x_star,
                    periods,
                };
                let slope = |x: f64| {
                    p / x - b / x_full + prefs.delta() * p * values.slope(t + 1, x)
                };
                if slope(x_full) >= 0.0 {
                    x_full
                } else {
                    bisect_decreasing(slope, 0.0, x_full)
                }
            };
            x_star[t - 1] = x;
        }
    }
    let phi = x_star
        .iter()
        .map(|&x| if p == 0.0 { f64::NAN } else { x * b / (p * x_full) })
        .collect();
    Ok(AdditiveSolution::from_phi(*contract, b, wage_scale, phi))
}

/// Value `V_1(w0)` of the exact solution (expected discounted lifetime utility).
pub fn exact_lifetime_value(
    solution: &AdditiveSolution,
    prefs: &WorkerPrefs,
) -> f64 {
    let p = solution.contract.p();
    let x_full = (1.0 + solution.contract.alpha()) * solution.wage_scale;
    let x_star: Vec<f64> = solution
        .phi
        .iter()
        .map(|&phi| p / solution.b * x_full * phi)
        .collect();
    let values = SeparableValues {
        p,
        alpha: solution.contract.alpha(),
        b: solution.b,
        delta: prefs.delta(),
        x_full,
        x_star: &x_star,
        periods: solution.periods(),
    };
    values.value(1, solution.contract.w0())
}

// ---------------------------------------------------------------------------
// Single-period closed forms
// ---------------------------------------------------------------------------

/// One-period optimal effort `p/b + α/(1+α)·w0`, clamped to `[0, 1]`; zero when `p = 0`.
pub fn single_period_effort(contract: &ContractParams, b: f64) -> f64 {
    if contract.p() == 0.0 {
        return 0.0;
    }
    let alpha = contract.alpha();
    (contract.p() / b + alpha / (1.0 + alpha) * contract.w0()).clamp(0.0, 1.0)
}

/// Wages at the end of a single period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WagePair {
    pub unevaluated: f64,
    pub evaluated: f64,
    /// The evaluated wage needs effort above 1 (`p/b > 1`).
    pub exceeds_effort_cap: bool,
}

/// `(w0, p·(1+α)/b)`.
pub fn single_period_wage_pair(contract: &ContractParams, b: f64) -> WagePair {
    let evaluated = contract.p() * (1.0 + contract.alpha()) / b;
    WagePair {
        unevaluated: contract.w0(),
        evaluated,
        exceeds_effort_cap: evaluated > 1.0 + contract.alpha(),
    }
}

/// `p(1−p)·[p(1+α)/b − w0]²`.
pub fn single_period_variance(contract: &ContractParams, b: f64) -> f64 {
    let p = contract.p();
    let gap = p * (1.0 + contract.alpha()) / b - contract.w0();
    p * (1.0 - p) * gap * gap
}

/// One support point of the additive wage distribution at the horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupportPoint {
    pub wage: f64,
    /// Period of the last evaluation; `None` if never evaluated.
    pub last_evaluated: Option<usize>,
    pub probability: f64,
}

/// The `T + 1` wages at the horizon, keyed by the period of last evaluation.
pub fn additive_wage_support(solution: &AdditiveSolution) -> Vec<SupportPoint> {
    let p = solution.contract.p();
    let periods = solution.periods();
    let mut out = Vec::with_capacity(periods + 1);
    out.push(SupportPoint {
        wage: solution.contract.w0(),
        last_evaluated: None,
        probability: (1.0 - p).powi(periods as i32),
    });
    for t in 1..=periods {
        out.push(SupportPoint {
            wage: p / solution.b * (1.0 + solution.contract.alpha()) * solution.wage_scale * solution.phi[t - 1],
            last_evaluated: Some(t),
            probability: p * (1.0 - p).powi((periods - t) as i32),
        });
    }
    out
}

/// Support points as a distribution (merging coincident wages).
pub fn support_distribution(points: &[SupportPoint]) -> Result<WageDistribution> {
    WageDistribution::from_atoms(
        points.iter().map(|s| (s.wage, s.probability)).collect(),
        1e-9,
    )
}

/// Wage path of a worker evaluated every period with the given efforts.
pub fn deterministic_path(contract: &ContractParams, efforts: &[f64], wage_scale: f64) -> Vec<f64> {
    efforts
        .iter()
        .scan(contract.w0(), |w, &e| {
            *w = wage_update(*w, e, contract, true, wage_scale);
            Some(*w)
        })
        .collect()
}

/// Efforts growing geometrically from `e0` by `growth` per period, capped at 1.
pub fn growing_efforts(e0: f64, growth: f64, periods: usize) -> Vec<f64> {
    (0..periods)
        .map(|t| (e0 * (1.0 + growth).powi(t as i32 + 1)).min(1.0))
        .collect()
}

/// Coefficient formula as printed, read as `S = Σ_{s=t}^{T} (δ(1−p))^{s−t}`,
/// `φ_t = S / (1 + α·δ·p·S − α·p/(1−p))`. Kept as a diagnostic: it does not
/// give 1 at `t = T`. `None` at `p = 1`.
pub fn printed_phi(contract: &ContractParams, delta: f64, horizon: Horizon, t: usize) -> Option<f64> {
    let p = contract.p();
    if p >= 1.0 {
        return None;
    }
    let alpha = contract.alpha();
    let r = delta * (1.0 - p);
    let sum: f64 = (t..=horizon.periods()).map(|s| r.powi((s - t) as i32)).sum();
    Some(sum / (1.0 + alpha * delta * p * sum - alpha * p / (1.0 - p)))
}
