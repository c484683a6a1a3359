//! The firm's choice of contract `(p, α, w0)`.
//!
//! Profit per worker is `Σ_t η^{t−1}·[E(k·e_t) − E(pay_t) − p·c]`, with the
//! worker's best response solved exactly and expectations taken over the
//! exact wage distribution.

use rayon::prelude::*;
use serde::Serialize;

use crate::additive::{solve_exact, AdditiveSolution};
use crate::cobb_douglas::{solve_policy_with, DpGrid, DpOptions, EffortPolicy};
use crate::distribution::{
    enumerate_expectation, profile, propagate, ProfileSeries, WageDistribution, WagePolicy,
};
use crate::error::{ModelError, Result};
use crate::model::{ContractParams, FirmParams, Horizon, WorkerPrefs};

/// A worker's solved best response.
#[derive(Debug, Clone)]
pub enum WorkerSolution {
    Additive(AdditiveSolution),
    CobbDouglas(EffortPolicy),
}

impl WorkerSolution {
    pub fn policy(&self) -> &dyn WagePolicy {
        match self {
            WorkerSolution::Additive(s) => s,
            WorkerSolution::CobbDouglas(s) => s,
        }
    }
}

/// Best response of the worker to `contract` when the deserved wage is `wage_scale·e`.
pub fn solve_worker(
    contract: &ContractParams,
    prefs: &WorkerPrefs,
    horizon: Horizon,
    wage_scale: f64,
) -> Result<WorkerSolution> {
    match prefs {
        WorkerPrefs::Additive { .. } => {
            solve_exact(contract, prefs, horizon, wage_scale).map(WorkerSolution::Additive)
        }
        WorkerPrefs::CobbDouglas { .. } => {
            let options = DpOptions {
                wage_scale,
                ..DpOptions::default()
            };
            solve_policy_with(contract, prefs, horizon, &DpGrid::default(), &options)
                .map(WorkerSolution::CobbDouglas)
        }
    }
}

/// Expected flows in one period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeriodFlows {
    pub output: f64,
    pub pay: f64,
    pub monitoring: f64,
}

impl PeriodFlows {
    pub fn profit(&self) -> f64 {
        self.output - self.pay - self.monitoring
    }

    /// Cost of employing the worker: pay minus output.
    pub fn employment_cost(&self) -> f64 {
        self.pay - self.output
    }
}

/// Per-period expected output, pay and monitoring cost, from wage distributions
/// `dists[t-1]` at the start of each period.
pub fn period_flows(
    policy: &dyn WagePolicy,
    contract: &ContractParams,
    firm: &FirmParams,
    dists: &[WageDistribution],
) -> Vec<PeriodFlows> {
    let p = contract.p();
    (1..=policy.periods())
        .map(|t| {
            let start = &dists[t - 1];
            let output = start.expect(|w| firm.k() * policy.effort(t, w));
            let pay = start.expect(|w| {
                let evaluated = if p > 0.0 { policy.evaluated_pay(t, w) } else { 0.0 };
                (1.0 - p) * w + p * evaluated
            });
            PeriodFlows {
                output,
                pay,
                monitoring: p * firm.c(),
            }
        })
        .collect()
}

fn discounted(flows: &[PeriodFlows], eta: f64) -> f64 {
    flows
        .iter()
        .enumerate()
        .map(|(t, f)| eta.powi(t as i32) * f.profit())
        .sum()
}

/// Discounted expected profit of one worker under `contract`.
pub fn expected_profit(
    contract: &ContractParams,
    firm: &FirmParams,
    prefs: &WorkerPrefs,
    horizon: Horizon,
) -> Result<f64> {
    let worker = solve_worker(contract, prefs, horizon, firm.wage_scale())?;
    let policy = worker.policy();
    let dists = propagate(policy, contract, horizon, &WageDistribution::point(contract.w0()));
    let value = discounted(&period_flows(policy, contract, firm, &dists), firm.eta());
    if value.is_finite() {
        Ok(value)
    } else {
        Err(ModelError::Domain(format!("profit is not finite for {contract:?}")))
    }
}

/// Profit by summing over every evaluation history.
pub fn enumerated_profit(
    contract: &ContractParams,
    firm: &FirmParams,
    prefs: &WorkerPrefs,
    horizon: Horizon,
) -> Result<f64> {
    let worker = solve_worker(contract, prefs, horizon, firm.wage_scale())?;
    let policy = worker.policy();
    let per_period = enumerate_expectation(policy, contract, horizon, |t, w, evaluated| {
        let output = firm.k() * policy.effort(t, w);
        if evaluated {
            output - policy.evaluated_pay(t, w) - firm.c()
        } else {
            output - w
        }
    })?;
    Ok(per_period
        .iter()
        .enumerate()
        .map(|(t, v)| firm.eta().powi(t as i32) * v)
        .sum())
}

/// How an optimal contract was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    Analytic,
    GridSearch,
}

/// A profit-maximizing contract.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimalContract {
    pub contract: ContractParams,
    pub profit: f64,
    pub method: SolveMethod,
    /// Coordinates sitting on the edge of their range, e.g. `"p=1"`.
    pub at_bounds: Vec<String>,
}

fn bounds_hit(contract: &ContractParams, w0_max: Option<f64>) -> Vec<String> {
    let mut out = Vec::new();
    for (name, v) in [("p", contract.p()), ("alpha", contract.alpha())] {
        if v == 0.0 {
            out.push(format!("{name}=0"));
        } else if v == 1.0 {
            out.push(format!("{name}=1"));
        }
    }
    if contract.w0() == 0.0 {
        out.push("w0=0".into());
    }
    if let Some(max) = w0_max {
        if (contract.w0() - max).abs() < 1e-12 {
            out.push("w0=max".into());
        }
    }
    out
}

/// Closed-form one-period optimum for `b = 1` and unit wage scale, in both
/// printed forms where two are given.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticFormulas {
    pub alpha: f64,
    /// `1 − k·α/(1+α)`.
    pub p: f64,
    /// `(1−k)(√c − √k)/√c`.
    pub p_alt: f64,
    /// `[(1+α)·p]²/k`.
    pub w0: f64,
    /// `(√k − √c)²`.
    pub w0_alt: f64,
    pub admissible: bool,
}

/// Evaluates the one-period formulas. Fails only where they are undefined.
pub fn analytic_formulas(firm: &FirmParams) -> Result<AnalyticFormulas> {
    let (k, c) = (firm.k(), firm.c());
    if k == 1.0 {
        return Err(ModelError::ParameterRange("analytic optimum undefined at k = 1".into()));
    }
    if c == 0.0 {
        return Err(ModelError::ParameterRange("analytic optimum undefined at c = 0".into()));
    }
    let alpha = (k * c).sqrt() / (k - 1.0) - 1.0;
    let p = 1.0 - alpha / (1.0 + alpha) * k;
    let p_alt = (1.0 - k) * (c.sqrt() - k.sqrt()) / c.sqrt();
    let w0 = ((1.0 + alpha) * p).powi(2) / k;
    let w0_alt = (k.sqrt() - c.sqrt()).powi(2);
    let admissible = (0.0..=1.0).contains(&alpha)
        && (0.0..=1.0).contains(&p)
        && w0 >= 0.0
        && w0.is_finite();
    Ok(AnalyticFormulas {
        alpha,
        p,
        p_alt,
        w0,
        w0_alt,
        admissible,
    })
}

fn one_period_additive(firm: &FirmParams, contract: ContractParams, method: SolveMethod) -> Result<OptimalContract> {
    let prefs = WorkerPrefs::additive(1.0, firm.eta())?;
    let profit = expected_profit(&contract, firm, &prefs, Horizon::new(1)?)?;
    Ok(OptimalContract {
        at_bounds: bounds_hit(&contract, None),
        contract,
        profit,
        method,
    })
}

/// One-period optimum from the closed-form rules (unit wage scale, `b = 1`).
pub fn analytic_one_period_optimum(firm: &FirmParams) -> Result<OptimalContract> {
    let f = analytic_formulas(firm)?;
    if !f.admissible {
        return Err(ModelError::ParameterRange(format!(
            "analytic optimum outside the admissible range: alpha={}, p={}, w0={}",
            f.alpha, f.p, f.w0
        )));
    }
    let unit = FirmParams::new(firm.k(), 1.0 / firm.k(), firm.c(), firm.eta())?;
    one_period_additive(&unit, ContractParams::new(f.p, f.alpha, f.w0)?, SolveMethod::Analytic)
}

/// Stationary point of one-period profit for wage scale `s = λ·k` and `b = 1`.
///
/// With `r = √(c/k)` and `u = α/(1+α)`: `u = (s/k − 1 + r)/r`, `p = 1 − u·k/s`,
/// `w0 = (√k − √c)²`. Reduces to the closed-form rules when `s = 1`.
pub fn stationary_contract(firm: &FirmParams) -> Result<ContractParams> {
    let (k, c) = (firm.k(), firm.c());
    if c == 0.0 {
        return Err(ModelError::ParameterRange("stationary point undefined at c = 0".into()));
    }
    let share = firm.wage_scale() / k;
    let r = (c / k).sqrt();
    let u = (share - 1.0 + r) / r;
    let alpha = u / (1.0 - u);
    let p = 1.0 - u / share;
    let w0 = (k.sqrt() - c.sqrt()).powi(2);
    ContractParams::new(p, alpha, w0).map_err(|_| {
        ModelError::ParameterRange(format!(
            "stationary contract outside the admissible range at k={k}: alpha={alpha}, p={p}, w0={w0}"
        ))
    })
}

/// One-period stationary contract at the firm's wage scale.
pub fn stationary_one_period_optimum(firm: &FirmParams) -> Result<OptimalContract> {
    one_period_additive(firm, stationary_contract(firm)?, SolveMethod::Analytic)
}

/// Outer search grid over `(p, α, w0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(default)]
pub struct SearchGrid {
    pub p_step: f64,
    pub alpha_step: f64,
    pub w0_step: f64,
    /// Upper end of the base-wage range; `None` uses `λ·k·2`.
    pub w0_max: Option<f64>,
    /// Steps are halved around the incumbent until at or below this.
    pub min_step: f64,
}

impl Default for SearchGrid {
    fn default() -> Self {
        Self {
            p_step: 0.05,
            alpha_step: 0.05,
            w0_step: 0.05,
            w0_max: None,
            min_step: 1e-3,
        }
    }
}

fn axis(max: f64, step: f64) -> Vec<f64> {
    let n = (max / step).ceil().max(1.0) as usize;
    (0..=n).map(|i| max * i as f64 / n as f64).collect()
}

fn local_axis(center: f64, step: f64, max: f64) -> Vec<f64> {
    let mut out: Vec<f64> = (-2..=2)
        .map(|j| (center + j as f64 * step).clamp(0.0, max))
        .collect();
    out.dedup();
    out
}

fn best_of<F>(candidates: Vec<(f64, f64, f64)>, profit: &F) -> Option<(ContractParams, f64)>
where
    F: Fn(&ContractParams) -> Result<f64> + Sync,
{
    let scored: Vec<Option<(ContractParams, f64)>> = candidates
        .par_iter()
        .map(|&(p, a, w0)| {
            let c = ContractParams::new(p, a, w0).ok()?;
            profit(&c).ok().map(|v| (c, v))
        })
        .collect();
    let mut best: Option<(ContractParams, f64)> = None;
    for (c, v) in scored.into_iter().flatten() {
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((c, v));
        }
    }
    best
}

/// Maximizes `profit` over the search grid; ties go to the lexicographically
/// smallest `(p, α, w0)`.
pub fn grid_search_with<F>(profit: F, grid: &SearchGrid, w0_max: f64) -> Result<OptimalContract>
where
    F: Fn(&ContractParams) -> Result<f64> + Sync,
{
    for (name, step) in [("p", grid.p_step), ("alpha", grid.alpha_step), ("w0", grid.w0_step)] {
        if !(step > 0.0) {
            return Err(ModelError::Grid(format!("{name} step must be positive, got {step}")));
        }
    }
    if !(grid.min_step > 0.0) {
        return Err(ModelError::Grid(format!("min_step must be positive, got {}", grid.min_step)));
    }
    let lattice = |ps: &[f64], alphas: &[f64], w0s: &[f64]| {
        let mut out = Vec::with_capacity(ps.len() * alphas.len() * w0s.len());
        for &p in ps {
            for &a in alphas {
                for &w in w0s {
                    out.push((p, a, w));
                }
            }
        }
        out
    };
    let coarse = lattice(
        &axis(1.0, grid.p_step),
        &axis(1.0, grid.alpha_step),
        &axis(w0_max, grid.w0_step),
    );
    let (mut incumbent, mut value) = best_of(coarse, &profit)
        .ok_or_else(|| ModelError::Domain("no feasible contract on the search grid".into()))?;

    let spacing = |max: f64, step: f64| max / (axis(max, step).len() - 1) as f64;
    let mut steps = [
        spacing(1.0, grid.p_step),
        spacing(1.0, grid.alpha_step),
        spacing(w0_max, grid.w0_step),
    ];
    while steps.iter().any(|&s| s > grid.min_step) {
        for s in steps.iter_mut() {
            if *s > grid.min_step {
                *s *= 0.5;
            }
        }
        let refined = lattice(
            &local_axis(incumbent.p(), steps[0], 1.0),
            &local_axis(incumbent.alpha(), steps[1], 1.0),
            &local_axis(incumbent.w0(), steps[2], w0_max),
        );
        if let Some((c, v)) = best_of(refined, &profit) {
            if v > value {
                incumbent = c;
                value = v;
            }
        }
    }
    Ok(OptimalContract {
        at_bounds: bounds_hit(&incumbent, Some(w0_max)),
        contract: incumbent,
        profit: value,
        method: SolveMethod::GridSearch,
    })
}

/// Grid search on [`expected_profit`].
pub fn grid_search_optimum(
    firm: &FirmParams,
    prefs: &WorkerPrefs,
    horizon: Horizon,
    grid: &SearchGrid,
) -> Result<OptimalContract> {
    let w0_max = grid.w0_max.unwrap_or(2.0 * firm.wage_scale());
    grid_search_with(|c| expected_profit(c, firm, prefs, horizon), grid, w0_max)
}

/// Worker outcomes under a contract.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractOutcome {
    /// Profiles over periods `1..=T` (wage at the end of each period).
    pub profile: ProfileSeries,
    pub flows: Vec<PeriodFlows>,
}

pub fn contract_outcome(
    contract: &ContractParams,
    firm: &FirmParams,
    prefs: &WorkerPrefs,
    horizon: Horizon,
) -> Result<ContractOutcome> {
    let worker = solve_worker(contract, prefs, horizon, firm.wage_scale())?;
    let policy = worker.policy();
    let dists = propagate(policy, contract, horizon, &WageDistribution::point(contract.w0()));
    Ok(ContractOutcome {
        profile: profile(&dists[1..]),
        flows: period_flows(policy, contract, firm, &dists),
    })
}

/// One row of a marginal-product sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub k: f64,
    pub optimum: OptimalContract,
    /// Mean over periods of the wage expectancy.
    pub expectancy: f64,
    pub variance: f64,
    pub std_over_mean: Option<f64>,
    pub mean_effort: f64,
}

/// Re-solves the employer problem at each `k` and reports worker outcomes.
pub fn tech_sweep(
    ks: &[f64],
    firm: &FirmParams,
    prefs: &WorkerPrefs,
    horizon: Horizon,
    method: SolveMethod,
    grid: &SearchGrid,
) -> Result<Vec<SweepPoint>> {
    ks.iter()
        .map(|&k| {
            let firm = firm.with_k(k)?;
            let optimum = match method {
                SolveMethod::Analytic => {
                    if horizon.periods() != 1 {
                        return Err(ModelError::ParameterRange(
                            "analytic sweep needs a single period".into(),
                        ));
                    }
                    stationary_one_period_optimum(&firm)?
                }
                SolveMethod::GridSearch => grid_search_optimum(&firm, prefs, horizon, grid)?,
            };
            let outcome = contract_outcome(&optimum.contract, &firm, prefs, horizon)?;
            let n = outcome.profile.len() as f64;
            let expectancy = outcome.profile.expectancy.iter().sum::<f64>() / n;
            let variance = outcome.profile.variance.iter().sum::<f64>() / n;
            let mean_effort = outcome.flows.iter().map(|f| f.output / k).sum::<f64>() / n;
            Ok(SweepPoint {
                k,
                optimum,
                expectancy,
                variance,
                std_over_mean: (expectancy != 0.0).then(|| variance.sqrt() / expectancy),
                mean_effort,
            })
        })
        .collect()
}

/// `k, p, alpha, w0, profit, expectancy, variance, std_over_mean, mean_effort` rows.
pub fn sweep_csv(points: &[SweepPoint]) -> String {
    let mut out = String::from("k,p,alpha,w0,profit,expectancy,variance,std_over_mean,mean_effort\n");
    for s in points {
        let c = &s.optimum.contract;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            s.k,
            c.p(),
            c.alpha(),
            c.w0(),
            s.optimum.profit,
            s.expectancy,
            s.variance,
            s.std_over_mean.map_or(String::new(), |v| v.to_string()),
            s.mean_effort
        ));
    }
    out
}

/// Wage profiles and employment costs before and after a rise in `k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TechShockReport {
    pub before: OptimalContract,
    pub after: OptimalContract,
    pub before_profile: ProfileSeries,
    pub after_profile: ProfileSeries,
    /// `E(pay_t) − E(k·e_t)` per period.
    pub before_cost: Vec<f64>,
    pub after_cost: Vec<f64>,
    /// Cost in period `t` minus cost in period 1.
    pub before_relative_cost: Vec<f64>,
    pub after_relative_cost: Vec<f64>,
    /// Under the new technology, whether an incumbent in period `t` costs more
    /// over the remaining periods than a newly hired worker would over as many.
    pub turnover: Vec<bool>,
}

impl TechShockReport {
    pub fn periods(&self) -> usize {
        self.before_cost.len()
    }

    /// `period, before_expectancy, after_expectancy, before_variance,
    /// after_variance, before_cost, after_cost, before_relative_cost,
    /// after_relative_cost, turnover` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "period,before_expectancy,after_expectancy,before_variance,after_variance,before_cost,after_cost,before_relative_cost,after_relative_cost,turnover\n",
        );
        for t in 0..self.periods() {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                t + 1,
                self.before_profile.expectancy[t],
                self.after_profile.expectancy[t],
                self.before_profile.variance[t],
                self.after_profile.variance[t],
                self.before_cost[t],
                self.after_cost[t],
                self.before_relative_cost[t],
                self.after_relative_cost[t],
                self.turnover[t]
            ));
        }
        out
    }
}

fn relative(cost: &[f64]) -> Vec<f64> {
    cost.iter().map(|c| c - cost[0]).collect()
}

/// Solves both technologies by grid search and compares the worker profiles.
pub fn tech_shock(
    before: &FirmParams,
    after: &FirmParams,
    prefs: &WorkerPrefs,
    horizon: Horizon,
    grid: &SearchGrid,
) -> Result<TechShockReport> {
    if !(after.k() > before.k()) {
        return Err(ModelError::ParameterRange(format!(
            "shock must raise k: before {}, after {}",
            before.k(),
            after.k()
        )));
    }
    let opt_before = grid_search_optimum(before, prefs, horizon, grid)?;
    let opt_after = grid_search_optimum(after, prefs, horizon, grid)?;
    let out_before = contract_outcome(&opt_before.contract, before, prefs, horizon)?;
    let out_after = contract_outcome(&opt_after.contract, after, prefs, horizon)?;
    let before_cost: Vec<f64> = out_before.flows.iter().map(PeriodFlows::employment_cost).collect();
    let after_cost: Vec<f64> = out_after.flows.iter().map(PeriodFlows::employment_cost).collect();
    let periods = horizon.periods();
    let turnover = (0..periods)
        .map(|t| {
            let remaining = periods - t;
            let incumbent: f64 = after_cost[t..].iter().sum();
            let fresh: f64 = after_cost[..remaining].iter().sum();
            incumbent > fresh
        })
        .collect();
    Ok(TechShockReport {
        before_relative_cost: relative(&before_cost),
        after_relative_cost: relative(&after_cost),
        before: opt_before,
        after: opt_after,
        before_profile: out_before.profile,
        after_profile: out_after.profile,
        before_cost,
        after_cost,
        turnover,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn unit_firm(k: f64, c: f64) -> FirmParams {
        FirmParams::new(k, 1.0 / k, c, 0.9).unwrap()
    }

    #[test]
    fn never_evaluated_worker_costs_base_wage() {
        let firm = FirmParams::new(1.5, 0.8, 0.3, 0.9).unwrap();
        let prefs = WorkerPrefs::additive(1.0, 0.9).unwrap();
        let c = ContractParams::new(0.0, 0.5, 0.4).unwrap();
        let profit = expected_profit(&c, &firm, &prefs, Horizon::new(4).unwrap()).unwrap();
        let expected: f64 = (0..4).map(|t| -0.9f64.powi(t) * 0.4).sum();
        assert_abs_diff_eq!(profit, expected, epsilon = 1e-12);
    }

    #[test]
    fn one_period_profit_closed_form() {
        let firm = FirmParams::new(1.0, 1.0, 0.3, 0.9).unwrap();
        let prefs = WorkerPrefs::additive(1.0, 0.9).unwrap();
        let c = ContractParams::new(0.3, 0.5, 0.4).unwrap();
        let e = 0.3 + 0.5 / 1.5 * 0.4;
        let expected = e - (0.3 * 0.3 * 1.5 + 0.7 * 0.4 + 0.3 * 0.3);
        let profit = expected_profit(&c, &firm, &prefs, Horizon::new(1).unwrap()).unwrap();
        assert_abs_diff_eq!(profit, expected, epsilon = 1e-12);
    }

    #[test]
    fn analytic_values() {
        let f = analytic_formulas(&unit_firm(1.5, 0.3)).unwrap();
        assert_abs_diff_eq!(f.alpha, 0.341641, epsilon = 1e-6);
        assert_abs_diff_eq!(f.p, 0.618034, epsilon = 1e-6);
        assert_abs_diff_eq!(f.w0, 0.458359, epsilon = 1e-6);
        assert_abs_diff_eq!(f.p, f.p_alt, epsilon = 1e-9);
        assert_abs_diff_eq!(f.w0, f.w0_alt, epsilon = 1e-9);
        assert!(f.admissible);
        assert!(f.w0 < (1.0 + f.alpha) * f.p);
    }

    #[test]
    fn analytic_boundary_case_is_exact() {
        let opt = analytic_one_period_optimum(&unit_firm(2.0, 0.5)).unwrap();
        assert_eq!(opt.contract.alpha(), 0.0);
        assert_eq!(opt.contract.p(), 1.0);
        assert_eq!(opt.contract.w0(), 0.5);
        assert!(opt.at_bounds.contains(&"alpha=0".to_string()));
    }

    #[test]
    fn analytic_errors() {
        assert!(matches!(
            analytic_formulas(&unit_firm(1.0, 0.3)),
            Err(ModelError::ParameterRange(_))
        ));
        let f = analytic_formulas(&unit_firm(2.0, 0.2)).unwrap();
        assert!(f.alpha < 0.0 && !f.admissible);
        assert!(analytic_one_period_optimum(&unit_firm(2.0, 0.2)).is_err());
    }

    #[test]
    fn stationary_contract_reduces_to_closed_form() {
        let firm = unit_firm(1.5, 0.3);
        let s = stationary_contract(&firm).unwrap();
        let f = analytic_formulas(&firm).unwrap();
        assert_abs_diff_eq!(s.alpha(), f.alpha, epsilon = 1e-12);
        assert_abs_diff_eq!(s.p(), f.p, epsilon = 1e-12);
        assert_abs_diff_eq!(s.w0(), f.w0, epsilon = 1e-12);
    }

    #[test]
    fn stationary_contract_has_zero_gradient() {
        let firm = FirmParams::new(2.0, 0.8, 0.2, 0.9).unwrap();
        let prefs = WorkerPrefs::additive(1.0, 0.9).unwrap();
        let h = Horizon::new(1).unwrap();
        let c = stationary_contract(&firm).unwrap();
        let f = |p: f64, a: f64, w: f64| {
            expected_profit(&ContractParams::new(p, a, w).unwrap(), &firm, &prefs, h).unwrap()
        };
        let d = 1e-6;
        let gp = (f(c.p() + d, c.alpha(), c.w0()) - f(c.p() - d, c.alpha(), c.w0())) / (2.0 * d);
        let ga = (f(c.p(), c.alpha() + d, c.w0()) - f(c.p(), c.alpha() - d, c.w0())) / (2.0 * d);
        let gw = (f(c.p(), c.alpha(), c.w0() + d) - f(c.p(), c.alpha(), c.w0() - d)) / (2.0 * d);
        assert!(gp.abs() < 1e-6 && ga.abs() < 1e-6 && gw.abs() < 1e-6, "{gp} {ga} {gw}");
    }

    #[test]
    fn grid_search_ties_go_to_smallest() {
        let opt = grid_search_with(|_| Ok(1.0), &SearchGrid::default(), 1.0).unwrap();
        assert_eq!(opt.contract.p(), 0.0);
        assert_eq!(opt.contract.alpha(), 0.0);
        assert_eq!(opt.contract.w0(), 0.0);
    }

    #[test]
    fn grid_search_finds_smooth_peak() {
        let target = (0.3137, 0.7712, 0.4421);
        let opt = grid_search_with(
            |c| {
                Ok(-(c.p() - target.0).powi(2) - (c.alpha() - target.1).powi(2) - (c.w0() - target.2).powi(2))
            },
            &SearchGrid::default(),
            2.0,
        )
        .unwrap();
        assert!((opt.contract.p() - target.0).abs() <= 1e-3);
        assert!((opt.contract.alpha() - target.1).abs() <= 1e-3);
        assert!((opt.contract.w0() - target.2).abs() <= 1e-3);
    }

    #[test]
    fn profit_matches_history_enumeration() {
        let firm = FirmParams::new(1.5, 0.8, 0.2, 0.9).unwrap();
        let c = ContractParams::new(0.3, 0.4, 0.5).unwrap();
        for prefs in [
            WorkerPrefs::additive(1.0, 0.9).unwrap(),
            WorkerPrefs::cobb_douglas(0.3, 0.7, 0.9).unwrap(),
        ] {
            for t in [1, 4, 8] {
                let h = Horizon::new(t).unwrap();
                let a = expected_profit(&c, &firm, &prefs, h).unwrap();
                let b = enumerated_profit(&c, &firm, &prefs, h).unwrap();
                assert_abs_diff_eq!(a, b, epsilon = 1e-12);
            }
        }
    }
}
