//! Grid dynamic programming for the Cobb-Douglas worker,
//! `U = (1 − e)^γ · c^β`.
//!
//! An evaluated worker's next wage is the deserved wage `s·e`, so with the
//! effort grid nested in the wage grid the state space stays on grid points
//! and no interpolation is needed. The bonus `α·(s·e − w)` is paid once and
//! enters consumption only.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distribution::WagePolicy;
use crate::error::{ModelError, Result};
use crate::model::{cobb_douglas_utility, ContractParams, Horizon, WorkerPrefs};

const STATE_TOL: f64 = 1e-9;

/// Wage and effort grids.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DpGrid {
    pub wage_step: f64,
    pub effort_step: f64,
    pub wage_max: f64,
}

impl Default for DpGrid {
    fn default() -> Self {
        Self {
            wage_step: 0.1,
            effort_step: 0.1,
            wage_max: 1.0,
        }
    }
}

fn divisions(span: f64, step: f64, what: &str) -> Result<usize> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(ModelError::Grid(format!("{what} step must be positive, got {step}")));
    }
    let n = span / step;
    let rounded = n.round();
    if rounded < 1.0 || (n - rounded).abs() > 1e-9 * rounded.max(1.0) {
        return Err(ModelError::Grid(format!(
            "{what} step {step} does not divide [0, {span}] evenly"
        )));
    }
    Ok(rounded as usize)
}

impl DpGrid {
    pub fn validate(&self) -> Result<()> {
        if !(self.wage_max >= 1.0) || !self.wage_max.is_finite() {
            return Err(ModelError::Grid(format!(
                "wage_max must be at least 1, got {}",
                self.wage_max
            )));
        }
        divisions(self.wage_max, self.wage_step, "wage")?;
        divisions(1.0, self.wage_step, "wage")?;
        divisions(1.0, self.effort_step, "effort")?;
        Ok(())
    }

    /// `0, h, …, wage_max`, each point computed as `j·wage_max/n`.
    pub fn wages(&self) -> Result<Vec<f64>> {
        let n = divisions(self.wage_max, self.wage_step, "wage")?;
        Ok((0..=n).map(|j| j as f64 * self.wage_max / n as f64).collect())
    }

    pub fn efforts(&self) -> Result<Vec<f64>> {
        let n = divisions(1.0, self.effort_step, "effort")?;
        Ok((0..=n).map(|j| j as f64 / n as f64).collect())
    }
}

/// When the evaluated worker is paid for the new effort.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PayTiming {
    /// Pay in the evaluated period is `s·e + α·(s·e − w)`.
    #[default]
    Concurrent,
    /// Pay in the evaluated period is `w + α·(s·e − w)`; the new wage `s·e`
    /// starts next period.
    Lagged,
}

/// Solver settings beyond the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpOptions {
    pub wage_scale: f64,
    pub timing: PayTiming,
}

impl Default for DpOptions {
    fn default() -> Self {
        Self {
            wage_scale: 1.0,
            timing: PayTiming::Concurrent,
        }
    }
}

/// Solved policy: optimal grid effort and value for every period and state.
#[derive(Debug, Clone, PartialEq)]
pub struct EffortPolicy {
    contract: ContractParams,
    gamma: f64,
    beta: f64,
    delta: f64,
    options: DpOptions,
    grid: DpGrid,
    /// Sorted union of grid wages, deserved wages `s·e_j` and `w0`.
    states: Vec<f64>,
    efforts: Vec<f64>,
    /// State index reached by choosing effort `j` when evaluated.
    next_state: Vec<usize>,
    /// Indices of the wage-grid rows inside `states`.
    rows: Vec<usize>,
    /// `choice[t-1][i]`: index into `efforts`.
    choice: Vec<Vec<usize>>,
    /// `value[t-1][i]`; `value[T]` is the zero terminal value.
    value: Vec<Vec<f64>>,
}

fn merge_states(mut points: Vec<f64>) -> Vec<f64> {
    points.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(points.len());
    for w in points {
        match out.last() {
            Some(&last) if (w - last).abs() <= STATE_TOL => {}
            _ => out.push(w),
        }
    }
    out
}

fn find_state(states: &[f64], w: f64) -> Option<usize> {
    let i = states.partition_point(|&s| s < w - STATE_TOL);
    (i < states.len() && (states[i] - w).abs() <= STATE_TOL).then_some(i)
}

struct Stage<'a> {
    p: f64,
    alpha: f64,
    gamma: f64,
    beta: f64,
    delta: f64,
    scale: f64,
    timing: PayTiming,
    efforts: &'a [f64],
    next_state: &'a [usize],
}

impl Stage<'_> {
    fn evaluated_consumption(&self, w: f64, e: f64) -> f64 {
        let deserved = self.scale * e;
        let base = match self.timing {
            PayTiming::Concurrent => deserved,
            PayTiming::Lagged => w,
        };
        (base + self.alpha * (deserved - w)).max(0.0)
    }

    fn objective(&self, w: f64, i: usize, j: usize, next: &[f64]) -> f64 {
        let e = self.efforts[j];
        let p = self.p;
        let c = self.evaluated_consumption(w, e);
        p * cobb_douglas_utility(c, e, self.gamma, self.beta)
            + (1.0 - p) * cobb_douglas_utility(w, e, self.gamma, self.beta)
            + self.delta * (p * next[self.next_state[j]] + (1.0 - p) * next[i])
    }

    /// Best effort index, ties to the smallest effort.
    fn argmax(&self, w: f64, i: usize, next: &[f64]) -> (usize, f64) {
        let mut best = (0, self.objective(w, i, 0, next));
        for j in 1..self.efforts.len() {
            let v = self.objective(w, i, j, next);
            if v > best.1 {
                best = (j, v);
            }
        }
        best
    }
}

/// Backward induction with the default wage scale and pay timing.
pub fn solve_policy(
    contract: &ContractParams,
    prefs: &WorkerPrefs,
    horizon: Horizon,
    grid: &DpGrid,
) -> Result<EffortPolicy> {
    solve_policy_with(contract, prefs, horizon, grid, &DpOptions::default())
}

/// Backward induction over the effort grid.
///
/// `V_t(w) = max_e { p·U(c_eval, e) + (1−p)·U(w, e) + δ·[p·V_{t+1}(s·e) + (1−p)·V_{t+1}(w)] }`
/// with `V_{T+1} ≡ 0`. Evaluated consumption is clamped at zero.
pub fn solve_policy_with(
    contract: &ContractParams,
    prefs: &WorkerPrefs,
    horizon: Horizon,
    grid: &DpGrid,
    options: &DpOptions,
) -> Result<EffortPolicy> {
    let (gamma, beta) = prefs.cobb_douglas_exponents()?;
    grid.validate()?;
    let scale = options.wage_scale;
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(ModelError::Grid(format!("wage scale must be positive, got {scale}")));
    }
    let wages = grid.wages()?;
    let efforts = grid.efforts()?;
    let mut points = wages.clone();
    points.extend(efforts.iter().map(|e| scale * e));
    points.push(contract.w0());
    let states = merge_states(points);
    let lookup = |w: f64| find_state(&states, w).expect("state set is closed");
    let next_state: Vec<usize> = efforts.iter().map(|&e| lookup(scale * e)).collect();
    let rows: Vec<usize> = wages.iter().map(|&w| lookup(w)).collect();

    let stage = Stage {
        p: contract.p(),
        alpha: contract.alpha(),
        gamma,
        beta,
        delta: prefs.delta(),
        scale,
        timing: options.timing,
        efforts: &efforts,
        next_state: &next_state,
    };

    let periods = horizon.periods();
    let mut value = vec![vec![0.0; states.len()]; periods + 1];
    let mut choice = vec![vec![0usize; states.len()]; periods];
    for t in (1..=periods).rev() {
        let next = &value[t];
        let solved: Vec<(usize, f64)> = states
            .par_iter()
            .enumerate()
            .map(|(i, &w)| stage.argmax(w, i, next))
            .collect();
        for (i, (j, v)) in solved.into_iter().enumerate() {
            choice[t - 1][i] = j;
            value[t - 1][i] = v;
        }
    }

    Ok(EffortPolicy {
        contract: *contract,
        gamma,
        beta,
        delta: prefs.delta(),
        options: *options,
        grid: *grid,
        states,
        efforts,
        next_state,
        rows,
        choice,
        value,
    })
}

impl EffortPolicy {
    pub fn contract(&self) -> &ContractParams {
        &self.contract
    }

    pub fn grid(&self) -> &DpGrid {
        &self.grid
    }

    pub fn options(&self) -> &DpOptions {
        &self.options
    }

    pub fn periods(&self) -> usize {
        self.choice.len()
    }

    /// Every wage the solver tracks.
    pub fn states(&self) -> &[f64] {
        &self.states
    }

    pub fn effort_grid(&self) -> &[f64] {
        &self.efforts
    }

    fn state(&self, w: f64) -> usize {
        find_state(&self.states, w)
            .unwrap_or_else(|| panic!("wage {w} is not a state of this policy"))
    }

    /// Whether `w` is a tracked state.
    pub fn has_state(&self, w: f64) -> bool {
        find_state(&self.states, w).is_some()
    }

    /// Optimal effort in period `t` after previous wage `w`. Panics if `w` is not a state.
    pub fn effort_at(&self, t: usize, w: f64) -> f64 {
        self.efforts[self.choice[t - 1][self.state(w)]]
    }

    /// `V_t(w)`; `t = T + 1` gives the zero terminal value.
    pub fn value_at(&self, t: usize, w: f64) -> f64 {
        self.value[t - 1][self.state(w)]
    }

    /// Efforts on the wage-grid rows: `table()[row][t-1]`.
    pub fn table(&self) -> Vec<Vec<f64>> {
        self.rows
            .iter()
            .map(|&i| (0..self.periods()).map(|t| self.efforts[self.choice[t][i]]).collect())
            .collect()
    }

    /// Wage-grid rows, matching [`EffortPolicy::table`].
    pub fn row_wages(&self) -> Vec<f64> {
        self.rows.iter().map(|&i| self.states[i]).collect()
    }

    /// Objective of period `t` at state `w` for grid effort index `j`.
    pub fn objective(&self, t: usize, w: f64, j: usize) -> f64 {
        let i = self.state(w);
        self.stage().objective(self.states[i], i, j, &self.value[t])
    }

    fn stage(&self) -> Stage<'_> {
        Stage {
            p: self.contract.p(),
            alpha: self.contract.alpha(),
            gamma: self.gamma,
            beta: self.beta,
            delta: self.delta,
            scale: self.options.wage_scale,
            timing: self.options.timing,
            efforts: &self.efforts,
            next_state: &self.next_state,
        }
    }

    /// Largest gap between the stored value and a fresh maximization of the
    /// objective over the effort grid.
    pub fn bellman_residual(&self) -> f64 {
        let stage = self.stage();
        let mut worst: f64 = 0.0;
        for t in 1..=self.periods() {
            for (i, &w) in self.states.iter().enumerate() {
                let best = (0..self.efforts.len())
                    .map(|j| stage.objective(w, i, j, &self.value[t]))
                    .fold(f64::NEG_INFINITY, f64::max);
                worst = worst.max((best - self.value[t - 1][i]).abs());
            }
        }
        worst
    }

    /// `prev_wage, t1, …, tT` rows on the wage grid.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("prev_wage");
        for t in 1..=self.periods() {
            out.push_str(&format!(",t{t}"));
        }
        out.push('\n');
        for (w, row) in self.row_wages().iter().zip(self.table()) {
            out.push_str(&w.to_string());
            for e in row {
                out.push_str(&format!(",{e}"));
            }
            out.push('\n');
        }
        out
    }
}

impl WagePolicy for EffortPolicy {
    fn periods(&self) -> usize {
        self.choice.len()
    }

    fn effort(&self, period: usize, prev_wage: f64) -> f64 {
        self.effort_at(period, prev_wage)
    }

    fn evaluated_wage(&self, period: usize, prev_wage: f64) -> f64 {
        self.states[self.next_state[self.choice[period - 1][self.state(prev_wage)]]]
    }

    fn evaluated_pay(&self, period: usize, prev_wage: f64) -> f64 {
        let e = self.effort_at(period, prev_wage);
        self.stage().evaluated_consumption(prev_wage, e)
    }

    fn merge_tolerance(&self) -> f64 {
        0.0
    }
}

/// One period of the always-evaluated path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathStep {
    pub period: usize,
    pub effort: f64,
    pub wage: f64,
    pub bonus: f64,
    pub total: f64,
}

/// Path of a worker evaluated every period, starting from wage `w0`.
pub fn always_sampled_path(policy: &EffortPolicy, w0: f64) -> Result<Vec<PathStep>> {
    if !policy.has_state(w0) {
        return Err(ModelError::Grid(format!("starting wage {w0} is not on the policy grid")));
    }
    let alpha = policy.contract.alpha();
    let mut prev = w0;
    let mut out = Vec::with_capacity(policy.periods());
    for t in 1..=policy.periods() {
        let effort = policy.effort_at(t, prev);
        let wage = policy.evaluated_wage(t, prev);
        let bonus = alpha * (wage - prev);
        out.push(PathStep {
            period: t,
            effort,
            wage,
            bonus,
            total: wage + bonus,
        });
        prev = wage;
    }
    Ok(out)
}

/// `period, effort, wage, bonus, total` rows.
pub fn path_csv(path: &[PathStep]) -> String {
    let mut out = String::from("period,effort,wage,bonus,total\n");
    for s in path {
        out.push_str(&format!("{},{},{},{},{}\n", s.period, s.effort, s.wage, s.bonus, s.total));
    }
    out
}

/// Monotonicity of a solved policy on the wage-grid rows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicityReport {
    /// Per period: effort weakly decreasing in the previous wage.
    pub decreasing_in_wage: Vec<bool>,
    /// Per wage row: effort weakly decreasing from period to period.
    pub decreasing_over_time: Vec<bool>,
    pub row_wages: Vec<f64>,
}

pub fn policy_monotonicity_report(policy: &EffortPolicy) -> MonotonicityReport {
    let table = policy.table();
    let decreasing_in_wage = (0..policy.periods())
        .map(|t| table.windows(2).all(|rows| rows[1][t] <= rows[0][t]))
        .collect();
    let decreasing_over_time = table
        .iter()
        .map(|row| row.windows(2).all(|w| w[1] <= w[0]))
        .collect();
    MonotonicityReport {
        decreasing_in_wage,
        decreasing_over_time,
        row_wages: policy.row_wages(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table_params(w0: f64) -> (ContractParams, WorkerPrefs, Horizon) {
        (
            ContractParams::new(0.2, 0.1, w0).unwrap(),
            WorkerPrefs::cobb_douglas(0.3, 0.7, 0.95).unwrap(),
            Horizon::new(10).unwrap(),
        )
    }

    #[test]
    fn grid_points_are_exact_decimals() {
        let wages = DpGrid::default().wages().unwrap();
        assert_eq!(wages.len(), 11);
        assert_eq!(wages[3], 0.3);
        assert_eq!(wages[7], 0.7);
        assert_eq!(wages[10], 1.0);
    }

    #[test]
    fn rejects_uneven_grids() {
        let bad = DpGrid {
            wage_step: 0.3,
            ..DpGrid::default()
        };
        assert!(bad.validate().is_err());
        let bad = DpGrid {
            effort_step: 0.0,
            ..DpGrid::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn rejects_additive_prefs() {
        let (c, _, h) = table_params(0.4);
        let prefs = WorkerPrefs::additive(1.0, 0.9).unwrap();
        assert!(matches!(
            solve_policy(&c, &prefs, h, &DpGrid::default()),
            Err(ModelError::WrongFamily { .. })
        ));
    }

    #[test]
    fn terminal_period_examples() {
        let (c, prefs, h) = table_params(0.4);
        let policy = solve_policy(&c, &prefs, h, &DpGrid::default()).unwrap();
        assert!(policy.effort_at(10, 0.0) > 0.0);
        // effort falls toward the horizon at every wage
        let table = policy.table();
        assert!(table.iter().all(|row| row[9] <= row[0]));
        assert_eq!(policy.value_at(11, 0.3), 0.0);
    }

    #[test]
    fn bellman_recomputation_is_exact() {
        let (c, prefs, h) = table_params(0.4);
        let policy = solve_policy(&c, &prefs, h, &DpGrid::default()).unwrap();
        assert!(policy.bellman_residual() <= 1e-12);
        for t in 1..=10 {
            for &w in policy.states() {
                assert!(policy.value_at(t, w).is_finite());
                let e = policy.effort_at(t, w);
                assert!(policy.effort_grid().contains(&e));
            }
        }
    }

    #[test]
    fn resolving_is_bit_identical() {
        let (c, prefs, h) = table_params(0.4);
        let a = solve_policy(&c, &prefs, h, &DpGrid::default()).unwrap();
        let b = solve_policy(&c, &prefs, h, &DpGrid::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn finer_effort_grid_never_lowers_value() {
        let (c, prefs, h) = table_params(0.4);
        let coarse = solve_policy(&c, &prefs, h, &DpGrid::default()).unwrap();
        let fine = solve_policy(
            &c,
            &prefs,
            h,
            &DpGrid {
                effort_step: 0.05,
                ..DpGrid::default()
            },
        )
        .unwrap();
        for &w in coarse.states() {
            assert!(fine.value_at(1, w) >= coarse.value_at(1, w) - 1e-9);
        }
    }

    #[test]
    fn never_evaluated_worker_exerts_no_effort() {
        let c = ContractParams::new(0.0, 0.1, 0.4).unwrap();
        let prefs = WorkerPrefs::cobb_douglas(0.3, 0.7, 0.95).unwrap();
        let policy = solve_policy(&c, &prefs, Horizon::new(10).unwrap(), &DpGrid::default()).unwrap();
        for t in 1..=10 {
            for &w in &policy.row_wages()[1..10] {
                assert_eq!(policy.effort_at(t, w), 0.0);
            }
        }
    }

    #[test]
    fn lower_leisure_weight_raises_effort() {
        let (c, prefs, h) = table_params(0.4);
        let base = solve_policy(&c, &prefs, h, &DpGrid::default()).unwrap();
        let eager = WorkerPrefs::cobb_douglas(0.05, 0.7, 0.95).unwrap();
        let eager = solve_policy(&c, &eager, h, &DpGrid::default()).unwrap();
        for (a, b) in base.table().iter().zip(eager.table()) {
            for (x, y) in a.iter().zip(b) {
                assert!(y >= *x);
            }
        }
    }

    #[test]
    fn constant_policy_path_has_no_bonus() {
        let (c, prefs, _) = table_params(0.4);
        let policy = solve_policy(&c, &prefs, Horizon::new(1).unwrap(), &DpGrid::default()).unwrap();
        let report = policy_monotonicity_report(&policy);
        assert_eq!(report.decreasing_in_wage.len(), 1);
        let w0 = policy.effort_at(1, 0.4);
        // choose a start at the one-period fixed point if one exists
        if let Some(&w) = policy
            .row_wages()
            .iter()
            .find(|&&w| policy.effort_at(1, w) == w)
        {
            let path = always_sampled_path(&policy, w).unwrap();
            assert_eq!(path[0].bonus, 0.0);
            assert_eq!(path[0].wage, w);
        }
        assert!(w0 >= 0.0);
    }

    #[test]
    fn off_grid_base_wage_becomes_a_state() {
        let (c, prefs, h) = table_params(0.45);
        let policy = solve_policy(&c, &prefs, h, &DpGrid::default()).unwrap();
        assert!(policy.has_state(0.45));
        assert!(policy.bellman_residual() <= 1e-12);
    }

    #[test]
    fn scaled_wages_stay_closed() {
        let (c, prefs, h) = table_params(0.4);
        let options = DpOptions {
            wage_scale: 1.2,
            timing: PayTiming::Concurrent,
        };
        let policy = solve_policy_with(&c, &prefs, h, &DpGrid::default(), &options).unwrap();
        for t in 1..=10 {
            for &w in policy.states() {
                assert!(policy.has_state(policy.evaluated_wage(t, w)));
            }
        }
    }
}
