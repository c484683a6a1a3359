//! Bundled scenarios and the reproduction checks behind `reproduce-all`.

use std::fmt::Write as _;
use std::path::Path;
use std::time::{Duration, Instant};

use serde::Serialize;
use supervision_wage::additive::{
    single_period_effort, single_period_variance, solve_backward_induction, solve_exact, OracleOptions,
};
use supervision_wage::cobb_douglas::{always_sampled_path, solve_policy, solve_policy_with, DpOptions, PayTiming};
use supervision_wage::distribution::{
    enumerate_histories, propagate, simulate, total_variation, WageDistribution, WagePolicy,
};
use supervision_wage::employer::{
    analytic_formulas, analytic_one_period_optimum, grid_search_optimum, tech_shock, tech_sweep, SearchGrid,
};
use supervision_wage::model::wage_update;
use supervision_wage::reference::{compare_brackets, compare_path, compare_policy, QUOTED_CELL};
use supervision_wage::statics::{effort_sensitivity, single_period_optimum, Regime};
use supervision_wage::{ContractParams, FirmParams, Horizon, Result, WorkerPrefs};

use crate::commands::{execute, write_artifacts, Format};
use crate::config::{parse_config, Experiment, Scenario};
use crate::RunError;

/// A scenario file shipped with the tool.
#[derive(Debug, Clone, Copy)]
pub struct Bundled {
    pub name: &'static str,
    pub text: &'static str,
}

macro_rules! bundled {
    ($($name:literal),* $(,)?) => {
        [$(Bundled {
            name: $name,
            text: include_str!(concat!("../../../scenarios/", $name, ".json")),
        }),*]
    };
}

pub const BUNDLED: [Bundled; 10] = bundled!(
    "fig3_1", "fig3_2", "fig3_3", "table3_2", "table3_3", "table3_4", "fig3_4", "fig4_1", "fig4_2", "appendix1",
);

pub fn bundled(name: &str) -> Option<Scenario> {
    BUNDLED
        .iter()
        .find(|b| b.name == name)
        .map(|b| parse_config(b.text, None).expect("bundled scenarios are valid"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    /// Known discrepancies that do not fail the criterion unless `--strict`.
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReproduceReport {
    pub strict: bool,
    pub criteria: Vec<CriterionResult>,
}

impl ReproduceReport {
    pub fn passed(&self) -> bool {
        self.criteria
            .iter()
            .all(|c| c.passed && (!self.strict || c.warnings.is_empty()))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.criteria {
            let status = match (c.passed, c.warnings.is_empty()) {
                (false, _) => "FAIL",
                (true, false) if self.strict => "FAIL",
                (true, false) => "WARN",
                (true, true) => "PASS",
            };
            let _ = writeln!(out, "criterion {} [{status}] {}: {}", c.id, c.title, c.detail);
            for w in &c.warnings {
                let _ = writeln!(out, "    warning: {w}");
            }
        }
        let passed = self.criteria.iter().filter(|c| c.passed).count();
        let _ = writeln!(
            out,
            "{passed}/{} criteria passed{}",
            self.criteria.len(),
            if self.strict { " (strict)" } else { "" }
        );
        out
    }
}

/// Runs every bundled scenario into `out/<name>/`, then the reproduction
/// checks, and writes `report.txt` and `report.json` into `out`.
pub fn reproduce_all(out: &Path, seed: Option<u64>, format: Format, strict: bool) -> std::result::Result<ReproduceReport, RunError> {
    let scenarios = load_bundled(seed);
    for (name, scenario) in &scenarios {
        let artifacts = execute(scenario)?;
        write_artifacts(&out.join(name), &artifacts, format)?;
    }
    let report = ReproduceReport {
        strict,
        criteria: run_checks(&scenarios),
    };
    std::fs::write(out.join("report.txt"), report.to_text())?;
    let mut json = serde_json::to_string_pretty(&report).expect("report serializes");
    json.push('\n');
    std::fs::write(out.join("report.json"), json)?;
    Ok(report)
}

fn load_bundled(seed: Option<u64>) -> Vec<(&'static str, Scenario)> {
    BUNDLED
        .iter()
        .map(|b| {
            let mut s = parse_config(b.text, None).expect("bundled scenarios are valid");
            if let Some(seed) = seed {
                s.simulation.seed = seed;
            }
            (b.name, s)
        })
        .collect()
}

fn find<'a>(scenarios: &'a [(&str, Scenario)], name: &str) -> &'a Scenario {
    &scenarios.iter().find(|(n, _)| *n == name).expect("bundled scenario").1
}

/// All ten checks, in order.
pub fn run_checks(scenarios: &[(&'static str, Scenario)]) -> Vec<CriterionResult> {
    type Check = fn(&[(&'static str, Scenario)]) -> Result<(bool, String, Vec<String>)>;
    let checks: [(&'static str, Check); 10] = [
        ("policy table", policy_table),
        ("always-evaluated path", evaluated_path),
        ("bracket distribution", bracket_distribution),
        ("additive closed form vs oracle", additive_oracle),
        ("single-period formulas", single_period),
        ("distribution engine", distribution_engine),
        ("employer analytic optimum", employer_optimum),
        ("technology properties", technology),
        ("comparative statics", statics),
        ("determinism", determinism),
    ];
    checks
        .iter()
        .enumerate()
        .map(|(i, (title, check))| {
            let (passed, detail, warnings) =
                check(scenarios).unwrap_or_else(|e| (false, format!("error: {e}"), Vec::new()));
            CriterionResult {
                id: i as u8 + 1,
                title,
                passed,
                detail,
                warnings,
            }
        })
        .collect()
}

type Outcome = Result<(bool, String, Vec<String>)>;

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let v = f();
    (v, start.elapsed())
}

fn policy_table(scenarios: &[(&'static str, Scenario)]) -> Outcome {
    let s = find(scenarios, "table3_2");
    let (policy, elapsed) = timed(|| solve_policy(s.contract(), &s.prefs, s.horizon(), &s.grid.dp));
    let policy = policy?;
    let cmp = compare_policy(&policy.table(), s.grid.dp.effort_step);
    let fast = elapsed < Duration::from_secs(1);
    let lagged = solve_policy_with(
        s.contract(),
        &s.prefs,
        s.horizon(),
        &s.grid.dp,
        &DpOptions {
            timing: PayTiming::Lagged,
            ..DpOptions::default()
        },
    )?;
    let lagged_exact = compare_policy(&lagged.table(), s.grid.dp.effort_step).exact;
    let passed = cmp.exact_share() >= 0.9 && cmp.all_within_one_step() && cmp.quoted_cell_matches() && fast;
    let detail = format!(
        "{}/{} cells exact (need 90%), {} more within one step, {} beyond; quoted cell (period {}, wage {}) computed {} vs printed {}; runtime under 1 s: {fast}; lagged-pay variant: {lagged_exact} exact",
        cmp.exact,
        cmp.cells,
        cmp.within_one_step,
        cmp.cells - cmp.exact - cmp.within_one_step,
        QUOTED_CELL.0,
        QUOTED_CELL.1,
        cmp.quoted_cell.computed,
        cmp.quoted_cell.printed,
    );
    Ok((passed, detail, Vec::new()))
}

fn evaluated_path(scenarios: &[(&'static str, Scenario)]) -> Outcome {
    let s = find(scenarios, "table3_3");
    let policy = solve_policy(s.contract(), &s.prefs, s.horizon(), &s.grid.dp)?;
    let path = always_sampled_path(&policy, s.contract().w0())?;
    let cmp = compare_path(&path);
    let passed = cmp.effort_matches && cmp.wage_matches && cmp.bonus_magnitudes_match();
    let detail = format!(
        "effort row matches: {}, wage row matches: {}, bonus magnitudes match: {}; computed effort {:?}",
        cmp.effort_matches,
        cmp.wage_matches,
        cmp.bonus_magnitudes_match(),
        cmp.computed_effort
    );
    let warnings = cmp
        .bonus_sign_mismatches
        .iter()
        .map(|t| format!("bonus sign differs from the printed table in period {t}"))
        .collect();
    Ok((passed, detail, warnings))
}

fn bracket_distribution(scenarios: &[(&'static str, Scenario)]) -> Outcome {
    let s = find(scenarios, "table3_4");
    let policy = solve_policy(s.contract(), &s.prefs, s.horizon(), &s.grid.dp)?;
    let dists = propagate(&policy, s.contract(), s.horizon(), &WageDistribution::point(s.contract().w0()));
    let cmp = compare_brackets(&dists)?;
    let late_ok = (3..=10).all(|t| cmp.period_within(t, 0.05));
    let passed = cmp.period_exact(1) && cmp.period_exact(2) && late_ok;
    let detail = format!(
        "period 1 exact: {}, period 2 exact: {}, periods 3-10 within 0.05: {late_ok}, {} cells deviate",
        cmp.period_exact(1),
        cmp.period_exact(2),
        cmp.deviations.len()
    );
    let warnings = cmp
        .deviations
        .iter()
        .map(|d| {
            format!(
                "period {} bracket from {}: printed {} computed {:.4}",
                d.period, d.row, d.printed, d.computed
            )
        })
        .collect();
    Ok((passed, detail, warnings))
}

fn additive_oracle(scenarios: &[(&'static str, Scenario)]) -> Outcome {
    let s = find(scenarios, "fig3_2");
    let options = OracleOptions {
        grid_points: s.grid.oracle_points,
        ..OracleOptions::default()
    };
    let oracle = solve_backward_induction(s.contract(), &s.prefs, s.horizon(), &options)?;
    let periods = s.horizon().periods();
    let mut gap: f64 = 0.0;
    let mut spread: f64 = 0.0;
    for t in 1..=periods {
        for i in oracle.feasible_states(t) {
            let affine = oracle.fitted.closed_form_effort(t, oracle.grid[i]);
            gap = gap.max((oracle.effort[t - 1][i] - affine).abs());
        }
        spread = spread.max(oracle.evaluated_wage_spread(t));
    }
    let phi = &oracle.fitted.phi;
    let phi_last = (phi[periods - 1] - 1.0).abs();
    let decreasing = phi.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    let passed = gap <= 1e-5 && phi_last <= 1e-9 && spread < 1e-6 && decreasing;
    let detail = format!(
        "max |oracle − affine| = {gap:.3e} (≤ 1e-5), |φ_T − 1| = {phi_last:.3e} (≤ 1e-9), evaluated-wage spread = {spread:.3e} (< 1e-6), φ weakly decreasing: {decreasing}"
    );
    Ok((passed, detail, Vec::new()))
}

fn single_period(_: &[(&'static str, Scenario)]) -> Outcome {
    let prefs = WorkerPrefs::additive(1.0, 0.9)?;
    let mut effort_gap: f64 = 0.0;
    let mut variance_gap: f64 = 0.0;
    let mut capped = 0;
    for p in [0.1, 0.3, 0.5, 0.8] {
        for alpha in [0.0, 0.5, 1.0] {
            for w0 in [0.2, 0.5] {
                let c = ContractParams::new(p, alpha, w0)?;
                let e = single_period_effort(&c, 1.0);
                effort_gap = effort_gap.max((e - single_period_optimum(&c, &prefs, 1.0)?).abs());
                if e >= 1.0 {
                    // the variance formula assumes the effort cap does not bind
                    capped += 1;
                    continue;
                }
                let two_point = WageDistribution::from_atoms(
                    vec![(w0, 1.0 - p), (wage_update(w0, e, &c, true, 1.0), p)],
                    0.0,
                )?;
                variance_gap = variance_gap.max((two_point.variance() - single_period_variance(&c, 1.0)).abs());
            }
        }
    }
    let edges = [0.0, 1.0]
        .iter()
        .map(|&p| ContractParams::new(p, 0.5, 0.4).map(|c| single_period_variance(&c, 1.0)))
        .collect::<Result<Vec<_>>>()?;
    let edges_zero = edges.iter().all(|&v| v == 0.0);
    let passed = effort_gap <= 1e-6 && variance_gap <= 1e-12 && edges_zero;
    let detail = format!(
        "max effort gap {effort_gap:.3e} (≤ 1e-6), max variance gap {variance_gap:.3e} (≤ 1e-12, {capped} capped-effort contracts excluded), variance at p ∈ {{0,1}} zero: {edges_zero}"
    );
    Ok((passed, detail, Vec::new()))
}

/// Propagate-vs-enumerate mismatch, mass error and, when `sampling` is
/// given as `(seed, n_paths)`, the largest Monte Carlo TV distance.
fn engine_checks<P: WagePolicy>(
    policy: &P,
    contract: &ContractParams,
    horizon: Horizon,
    sampling: Option<(u64, usize)>,
) -> Result<(f64, f64, f64)> {
    let dists = propagate(policy, contract, horizon, &WageDistribution::point(contract.w0()));
    let enumerated = enumerate_histories(policy, contract, horizon)?;
    let last = &dists[horizon.periods()];
    let mismatch = total_variation(last, &enumerated, 1e-9)
        .max(if last.len() == enumerated.len() { 0.0 } else { 1.0 });
    let mass = dists.iter().map(|d| (d.total_mass() - 1.0).abs()).fold(0.0, f64::max);
    let tv = match sampling {
        Some((seed, n_paths)) => simulate(policy, contract, horizon, n_paths, seed)?
            .iter()
            .zip(&dists)
            .map(|(m, d)| total_variation(d, m, 1e-9))
            .fold(0.0, f64::max),
        None => 0.0,
    };
    Ok((mismatch, mass, tv))
}

fn distribution_engine(scenarios: &[(&'static str, Scenario)]) -> Outcome {
    let additive = find(scenarios, "fig3_2");
    let cd = find(scenarios, "table3_4");
    let (seed, n_paths) = (additive.simulation.seed, additive.simulation.n_paths);
    let (result, elapsed) = timed(|| -> Result<(f64, f64, f64, bool)> {
        let mut worst = (0.0f64, 0.0f64, 0.0f64);
        let mut support_ok = true;
        for periods in 1..=12 {
            let horizon = Horizon::new(periods)?;
            let a = solve_exact(additive.contract(), &additive.prefs, horizon, 1.0)?;
            let c = solve_policy(cd.contract(), &cd.prefs, horizon, &cd.grid.dp)?;
            let sampling = (periods == 10).then_some((seed, n_paths));
            let (m1, s1, t1) = engine_checks(&a, additive.contract(), horizon, sampling)?;
            let (m2, s2, t2) = engine_checks(&c, cd.contract(), horizon, sampling)?;
            worst = (worst.0.max(m1).max(m2), worst.1.max(s1).max(s2), worst.2.max(t1).max(t2));
            let dists = propagate(&a, additive.contract(), horizon, &WageDistribution::point(additive.contract().w0()));
            support_ok &= dists.iter().enumerate().all(|(t, d)| d.len() == t + 1);
        }
        Ok((worst.0, worst.1, worst.2, support_ok))
    });
    let (mismatch, mass, tv, support_ok) = result?;
    let fast = elapsed < Duration::from_secs(10);
    let passed = mismatch <= 1e-12 && mass <= 1e-12 && support_ok && tv < 0.01 && fast;
    let detail = format!(
        "propagate vs enumerate {mismatch:.3e} (≤ 1e-12), mass error {mass:.3e} (≤ 1e-12), additive support t+1: {support_ok}, Monte Carlo TV {tv:.4} (< 0.01, n={n_paths}), runtime under 10 s: {fast}"
    );
    Ok((passed, detail, Vec::new()))
}

fn employer_optimum(_: &[(&'static str, Scenario)]) -> Outcome {
    let firm = FirmParams::new(1.5, 1.0 / 1.5, 0.3, 0.9)?;
    let f = analytic_formulas(&firm)?;
    let values_ok = (f.alpha - 0.341641).abs() < 1e-6 && (f.p - 0.618034).abs() < 1e-6 && (f.w0 - 0.458359).abs() < 1e-6;
    let forms_agree = (f.p - f.p_alt).abs() <= 1e-9 && (f.w0 - f.w0_alt).abs() <= 1e-9;
    let underpaid = f.w0 < (1.0 + f.alpha) * f.p;
    let prefs = WorkerPrefs::additive(1.0, 0.9)?;
    let grid = SearchGrid::default();
    let best = grid_search_optimum(&firm, &prefs, Horizon::new(1)?, &grid)?;
    let step = grid.min_step;
    let grid_ok = (best.contract.alpha() - f.alpha).abs() <= step
        && (best.contract.p() - f.p).abs() <= step
        && (best.contract.w0() - f.w0).abs() <= step;
    let edge = analytic_one_period_optimum(&FirmParams::new(2.0, 0.5, 0.5, 0.9)?)?.contract;
    let edge_ok = (edge.alpha(), edge.p(), edge.w0()) == (0.0, 1.0, 0.5);
    let passed = values_ok && forms_agree && grid_ok && underpaid && edge_ok;
    let detail = format!(
        "α*={}, p*={}, w0*={} (values ok: {values_ok}); printed forms agree: {forms_agree}; grid search gives (p, α, w0) = ({}, {}, {}) with profit {:.4}, within one step: {grid_ok}; underpayment: {underpaid}; k=2, c=0.5 boundary: {edge_ok}",
        f.alpha,
        f.p,
        f.w0,
        best.contract.p(),
        best.contract.alpha(),
        best.contract.w0(),
        best.profit,
    );
    Ok((passed, detail, Vec::new()))
}

fn weakly_increasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] >= w[0] - 1e-12)
}

fn technology(scenarios: &[(&'static str, Scenario)]) -> Outcome {
    let sweep = find(scenarios, "fig4_1");
    let Experiment::TechSweep { k_values, method, search } = &sweep.experiment else {
        unreachable!("fig4_1 is a tech-sweep scenario")
    };
    let points = tech_sweep(k_values, sweep.firm(), &sweep.prefs, sweep.horizon(), *method, search)?;
    let expectancy: Vec<f64> = points.iter().map(|p| p.expectancy).collect();
    let variance: Vec<f64> = points.iter().map(|p| p.variance).collect();
    let cv: Vec<f64> = points.iter().map(|p| p.std_over_mean.unwrap_or(f64::NAN)).collect();
    let (e_up, v_up, cv_up) = (weakly_increasing(&expectancy), weakly_increasing(&variance), weakly_increasing(&cv));

    let shock = find(scenarios, "fig4_2");
    let Experiment::TechShock { k_after, search } = &shock.experiment else {
        unreachable!("fig4_2 is a tech-shock scenario")
    };
    let report = tech_shock(shock.firm(), &shock.firm().with_k(*k_after)?, &shock.prefs, shock.horizon(), search)?;
    let higher = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(after, before)| after >= before);
    let e_shift = higher(&report.after_profile.expectancy, &report.before_profile.expectancy);
    let v_shift = higher(&report.after_profile.variance, &report.before_profile.variance);
    let last = report.periods() - 1;
    let cost_up = report.after_relative_cost[last] > report.before_relative_cost[last];
    let passed = e_up && v_up && cv_up && e_shift && v_shift && cost_up;
    let detail = format!(
        "sweep ({:?}) expectancy rising: {e_up}, variance rising: {v_up}, std/mean rising: {cv_up} ({:.4} → {:.4}); shock expectancy higher: {e_shift}, variance higher: {v_shift}, late relative cost {:.4} → {:.4} rising: {cost_up}",
        method,
        cv.first().copied().unwrap_or(f64::NAN),
        cv.last().copied().unwrap_or(f64::NAN),
        report.before_relative_cost[last],
        report.after_relative_cost[last],
    );
    Ok((passed, detail, Vec::new()))
}

fn statics(scenarios: &[(&'static str, Scenario)]) -> Outcome {
    let s = find(scenarios, "appendix1");
    let Experiment::Statics {
        p_values,
        alpha_values,
        w0_values,
        relative_step,
        wage_scale,
    } = &s.experiment
    else {
        unreachable!("appendix1 is a statics scenario")
    };
    let (mut interior, mut violations, mut penalty) = (0, Vec::new(), 0);
    let mut worst_residual: f64 = 0.0;
    for &p in p_values {
        for &alpha in alpha_values {
            for &w0 in w0_values {
                let c = ContractParams::new(p, alpha, w0)?;
                let r = effort_sensitivity(&c, &s.prefs, *wage_scale, *relative_step)?;
                if r.boundary_optimum {
                    continue;
                }
                interior += 1;
                worst_residual = worst_residual.max(r.foc_residual.map_or(f64::INFINITY, f64::abs));
                let mut ok = r.d_p.value > 0.0 && r.d_w0.value > 0.0;
                if r.regime == Regime::Penalty {
                    penalty += 1;
                    ok &= r.d_alpha.value > 0.0;
                }
                if !ok {
                    violations.push(format!("(p={p}, α={alpha}, w0={w0})"));
                }
            }
        }
    }
    let passed = violations.is_empty() && worst_residual < 1e-6 && interior > 0;
    let detail = format!(
        "{interior} interior optima ({penalty} in the penalty regime), sign violations: {}, max FOC residual {worst_residual:.3e} (< 1e-6)",
        if violations.is_empty() { "none".to_string() } else { violations.join(" ") }
    );
    Ok((passed, detail, Vec::new()))
}

fn determinism(scenarios: &[(&'static str, Scenario)]) -> Outcome {
    let mut differing = Vec::new();
    for (name, s) in scenarios {
        if execute(s)? != execute(s)? {
            differing.push(*name);
        }
    }
    let cd = find(scenarios, "table3_4");
    let policy = solve_policy(cd.contract(), &cd.prefs, cd.horizon(), &cd.grid.dp)?;
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool")
            .install(|| simulate(&policy, cd.contract(), cd.horizon(), 50_000, cd.simulation.seed))
    };
    let thread_invariant = run(1)? == run(4)?;
    let passed = differing.is_empty() && thread_invariant;
    let detail = format!(
        "repeated runs identical: {}, simulation identical on 1 and 4 threads: {thread_invariant}",
        if differing.is_empty() { "all scenarios".to_string() } else { format!("no ({})", differing.join(", ")) }
    );
    Ok((passed, detail, Vec::new()))
}
