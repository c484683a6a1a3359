//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Reference tables are restated here rather than imported so the checks do
//! not share constants with the code under test.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use supervision_wage::additive::{
    single_period_effort, single_period_variance, solve_backward_induction, solve_exact, OracleOptions,
};
use supervision_wage::cobb_douglas::{always_sampled_path, solve_policy, DpGrid};
use supervision_wage::distribution::{enumerate_histories, propagate, simulate, WageDistribution, WagePolicy};
use supervision_wage::employer::{
    analytic_formulas, analytic_one_period_optimum, grid_search_optimum, tech_shock, tech_sweep, SearchGrid,
    SolveMethod,
};
use supervision_wage::statics::{effort_sensitivity, Regime};
use supervision_wage::{ContractParams, FirmParams, Horizon, WorkerPrefs};

type Check = Result<(bool, String), Box<dyn std::error::Error>>;
type Criterion = (&'static str, fn() -> Check);

const POLICY: [[f64; 10]; 11] = [
    [1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.9, 0.9, 0.6],
    [0.9, 0.9, 0.8, 0.8, 0.8, 0.8, 0.8, 0.7, 0.5, 0.0],
    [0.8, 0.7, 0.7, 0.7, 0.7, 0.7, 0.6, 0.5, 0.3, 0.0],
    [0.7, 0.6, 0.6, 0.6, 0.6, 0.6, 0.5, 0.4, 0.2, 0.0],
    [0.6, 0.6, 0.6, 0.5, 0.5, 0.5, 0.4, 0.3, 0.1, 0.0],
    [0.5, 0.5, 0.5, 0.5, 0.4, 0.4, 0.3, 0.2, 0.1, 0.0],
    [0.4, 0.4, 0.4, 0.4, 0.4, 0.3, 0.3, 0.2, 0.1, 0.0],
    [0.3, 0.3, 0.3, 0.3, 0.3, 0.3, 0.2, 0.2, 0.1, 0.0],
    [0.3, 0.3, 0.3, 0.3, 0.2, 0.2, 0.2, 0.1, 0.1, 0.0],
    [0.2, 0.2, 0.2, 0.2, 0.2, 0.2, 0.1, 0.1, 0.1, 0.0],
    [0.1, 0.2, 0.2, 0.2, 0.2, 0.1, 0.1, 0.1, 0.1, 0.0],
];

const PATH_EFFORT: [f64; 10] = [0.6, 0.4, 0.6, 0.4, 0.5, 0.4, 0.4, 0.3, 0.2, 0.0];
const PATH_WAGE: [f64; 10] = [0.6, 0.4, 0.6, 0.4, 0.5, 0.4, 0.4, 0.3, 0.2, 0.0];
const PATH_BONUS: [Option<f64>; 10] = [
    Some(0.02),
    Some(0.02),
    Some(-0.02),
    Some(0.02),
    Some(0.01),
    Some(-0.01),
    Some(0.0),
    Some(-0.01),
    Some(-0.01),
    None,
];

/// Rows are the brackets `(0, 0.1]` through `(0.5, 0.6]`; columns are periods 1–10.
const BRACKETS: [[f64; 10]; 6] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.15],
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.03, 0.07],
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.05, 0.09, 0.22, 0.18],
    [0.0, 0.0, 0.04, 0.10, 0.16, 0.19, 0.20, 0.30, 0.26, 0.21],
    [1.00, 0.80, 0.64, 0.51, 0.51, 0.54, 0.54, 0.44, 0.35, 0.28],
    [0.0, 0.20, 0.32, 0.39, 0.33, 0.27, 0.21, 0.17, 0.14, 0.11],
];

const EXACT: f64 = 1e-9;

fn table_contract() -> ContractParams {
    ContractParams::new(0.2, 0.1, 0.4).unwrap()
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let v = f();
    (v, start.elapsed())
}

fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (hi - r * (hi - lo), lo + r * (hi - lo));
    let (mut fa, mut fb) = (f(a), f(b));
    for _ in 0..200 {
        if fa < fb {
            lo = a;
            (a, fa) = (b, fb);
            b = lo + r * (hi - lo);
            fb = f(b);
        } else {
            hi = b;
            (b, fb) = (a, fa);
            a = hi - r * (hi - lo);
            fa = f(a);
        }
    }
    (lo + hi) / 2.0
}

/// One-period worker optimum by direct search on `p·ln((1+α)e − αw0) − b·e`.
fn searched_effort(p: f64, alpha: f64, w0: f64, b: f64) -> f64 {
    let floor = alpha * w0 / (1.0 + alpha);
    let u = |e: f64| {
        let pay = (1.0 + alpha) * e - alpha * w0;
        if pay <= 0.0 {
            f64::NEG_INFINITY
        } else {
            p * pay.ln() - b * e
        }
    };
    let e = golden_max(u, floor, 1.0);
    if u(1.0) >= u(e) {
        1.0
    } else {
        e
    }
}

/// Effort coefficients from the uncapped backward recursion.
fn recursion_phi(p: f64, alpha: f64, delta: f64, periods: usize) -> Vec<f64> {
    let r = delta * (1.0 - p);
    (1..=periods)
        .map(|t| {
            let s: f64 = (0..periods - t).map(|j| r.powi(j as i32)).sum();
            (1.0 + r * s) / (1.0 + delta * p * alpha * s)
        })
        .collect()
}

fn moments(d: &WageDistribution) -> (f64, f64) {
    let mean: f64 = d.iter().map(|(w, q)| w * q).sum();
    let var: f64 = d.iter().map(|(w, q)| q * (w - mean).powi(2)).sum();
    (mean, var)
}

/// Bracket masses, `(low, high]` with zero folded into the lowest row.
fn bracket_masses(d: &WageDistribution) -> BTreeMap<usize, f64> {
    let mut out = BTreeMap::new();
    for (w, q) in d.iter() {
        let row = if w <= 0.0 { 0 } else { ((w / 0.1 - 1e-9).ceil() as usize).saturating_sub(1) };
        *out.entry(row).or_insert(0.0) += q;
    }
    out
}

fn max_gap(a: &WageDistribution, b: &WageDistribution) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b.iter())
        .map(|((w1, q1), (w2, q2))| (w1 - w2).abs().max((q1 - q2).abs()))
        .fold(0.0, f64::max)
}

/// Total variation between two finite distributions, pairing wages within 1e-9.
fn tv(a: &WageDistribution, b: &WageDistribution) -> f64 {
    let mut atoms: Vec<(f64, f64)> = a.iter().chain(b.iter().map(|(w, q)| (w, -q))).collect();
    atoms.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut total = 0.0;
    let mut i = 0;
    while i < atoms.len() {
        let mut net = 0.0;
        let anchor = atoms[i].0;
        while i < atoms.len() && atoms[i].0 - anchor <= 1e-9 {
            net += atoms[i].1;
            i += 1;
        }
        total += net.abs();
    }
    total / 2.0
}

fn policy_table() -> Check {
    let prefs = WorkerPrefs::cobb_douglas(0.3, 0.7, 0.95)?;
    let (policy, elapsed) = timed(|| solve_policy(&table_contract(), &prefs, Horizon::new(10)?, &DpGrid::default()));
    let table = policy?.table();
    let (mut exact, mut near, mut far) = (0, 0, 0);
    for (row, printed) in table.iter().zip(POLICY.iter()) {
        for (c, p) in row.iter().zip(printed) {
            match (c - p).abs() {
                d if d <= EXACT => exact += 1,
                d if d <= 0.1 + EXACT => near += 1,
                _ => far += 1,
            }
        }
    }
    let quoted = table[4][4];
    let quoted_ok = (quoted - 0.5).abs() <= EXACT;
    let fast = elapsed < Duration::from_secs(1);
    let passed = exact as f64 >= 0.9 * 110.0 && far == 0 && quoted_ok && fast;
    Ok((
        passed,
        format!(
            "{exact}/110 exact (need 99), {near} within one step, {far} beyond; period 5 at wage 0.4 gives {quoted} (need 0.5); {:.0} ms (need < 1000)",
            elapsed.as_secs_f64() * 1e3
        ),
    ))
}

fn evaluated_path() -> Check {
    let prefs = WorkerPrefs::cobb_douglas(0.3, 0.7, 0.95)?;
    let c = table_contract();
    let policy = solve_policy(&c, &prefs, Horizon::new(10)?, &DpGrid::default())?;
    let path = always_sampled_path(&policy, 0.4)?;
    let effort: Vec<f64> = path.iter().map(|s| s.effort).collect();
    let effort_ok = effort.iter().zip(PATH_EFFORT).all(|(a, b)| (a - b).abs() <= EXACT);
    let wage_ok = path.iter().zip(PATH_WAGE).all(|(s, b)| (s.wage - b).abs() <= EXACT);
    let mut prev = 0.4;
    let mut bonus_ok = true;
    let mut sign_flips = Vec::new();
    for (s, printed) in path.iter().zip(PATH_BONUS) {
        let magnitude = (c.alpha() * (s.effort - prev)).abs();
        bonus_ok &= (s.bonus.abs() - magnitude).abs() <= EXACT;
        if let Some(b) = printed {
            bonus_ok &= (b.abs() - s.bonus.abs()).abs() <= EXACT;
            if b != 0.0 && b.signum() != s.bonus.signum() {
                sign_flips.push(s.period);
            }
        }
        prev = s.wage;
    }
    Ok((
        effort_ok && wage_ok && bonus_ok,
        format!(
            "effort {effort:?}; effort row exact: {effort_ok}, wage row exact: {wage_ok}, bonus magnitudes: {bonus_ok}; bonus sign differs from print in periods {sign_flips:?}"
        ),
    ))
}

fn bracket_distribution() -> Check {
    let prefs = WorkerPrefs::cobb_douglas(0.4, 0.6, 0.95)?;
    let c = table_contract();
    let policy = solve_policy(&c, &prefs, Horizon::new(10)?, &DpGrid::default())?;
    let dists = propagate(&policy, &c, Horizon::new(10)?, &WageDistribution::point(0.4));
    let mut deviation = [0.0f64; 10];
    for t in 0..10 {
        let masses = bracket_masses(&dists[t]);
        let rows = masses.keys().copied().chain(0..BRACKETS.len()).max().unwrap_or(0) + 1;
        for r in 0..rows {
            let printed = BRACKETS.get(r).map_or(0.0, |row| row[t]);
            let computed = masses.get(&r).copied().unwrap_or(0.0);
            deviation[t] = deviation[t].max((computed - printed).abs());
        }
    }
    let first = deviation[0] <= EXACT;
    let second = deviation[1] <= EXACT;
    let late = deviation[2..].iter().all(|&d| d <= 0.05 + EXACT);
    let listed: Vec<String> = deviation
        .iter()
        .enumerate()
        .filter(|(_, &d)| d > EXACT)
        .map(|(t, d)| format!("p{}:{d:.3}", t + 1))
        .collect();
    Ok((
        first && second && late,
        format!(
            "period 1 exact: {first}, period 2 exact: {second}, periods 3-10 within 0.05: {late}; largest cell deviation per period [{}]",
            listed.join(" ")
        ),
    ))
}

fn additive_oracle() -> Check {
    let (p, alpha, delta) = (0.2, 0.5, 0.9);
    let c = ContractParams::new(p, alpha, 0.4)?;
    let prefs = WorkerPrefs::additive(1.0, delta)?;
    let oracle = solve_backward_induction(&c, &prefs, Horizon::new(10)?, &OracleOptions::default())?;
    let slope = alpha / (1.0 + alpha);
    let mut phi = Vec::new();
    let mut gap: f64 = 0.0;
    let mut spread: f64 = 0.0;
    for t in 1..=10 {
        let states: Vec<usize> = oracle
            .feasible_states(t)
            .filter(|&i| oracle.effort[t - 1][i] < 1.0)
            .collect();
        // intercept of e = p·φ + slope·w, taken as the median over states
        let mut intercepts: Vec<f64> = states
            .iter()
            .map(|&i| oracle.effort[t - 1][i] - slope * oracle.grid[i])
            .collect();
        intercepts.sort_by(f64::total_cmp);
        let intercept = intercepts[intercepts.len() / 2];
        phi.push(intercept / p);
        for &i in &states {
            gap = gap.max((oracle.effort[t - 1][i] - intercept - slope * oracle.grid[i]).abs());
        }
        let evaluated: Vec<f64> = states.iter().map(|&i| oracle.evaluated_wage[t - 1][i]).collect();
        let (lo, hi) = evaluated
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &w| (lo.min(w), hi.max(w)));
        spread = spread.max(hi - lo);
    }
    let last = (phi[9] - 1.0).abs();
    let decreasing = phi.windows(2).all(|w| w[1] <= w[0] + EXACT);
    let recursion = recursion_phi(p, alpha, delta, 10);
    let drift = phi.iter().zip(&recursion).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok((
        gap <= 1e-5 && last <= 1e-9 && spread < 1e-6 && decreasing,
        format!(
            "max |effort − affine| {gap:.2e} (≤ 1e-5), |φ_T − 1| {last:.2e} (≤ 1e-9), evaluated wage spread {spread:.2e} (< 1e-6), φ weakly decreasing: {decreasing}; φ vs uncapped recursion {drift:.2e}"
        ),
    ))
}

fn single_period() -> Check {
    let mut effort_gap: f64 = 0.0;
    let mut variance_gap: f64 = 0.0;
    let mut capped = 0;
    for p in [0.05, 0.2, 0.4, 0.6, 0.9] {
        for alpha in [0.0, 0.25, 0.5, 1.0] {
            for w0 in [0.1, 0.4, 0.8] {
                let c = ContractParams::new(p, alpha, w0)?;
                let e = single_period_effort(&c, 1.0);
                effort_gap = effort_gap.max((e - searched_effort(p, alpha, w0, 1.0)).abs());
                if e >= 1.0 {
                    capped += 1;
                    continue;
                }
                let evaluated = (1.0 + alpha) * e - alpha * w0;
                let mean = (1.0 - p) * w0 + p * evaluated;
                let two_point = (1.0 - p) * (w0 - mean).powi(2) + p * (evaluated - mean).powi(2);
                variance_gap = variance_gap.max((two_point - single_period_variance(&c, 1.0)).abs());
                let sol = solve_exact(&c, &WorkerPrefs::additive(1.0, 0.9)?, Horizon::new(1)?, 1.0)?;
                let d = propagate(&sol, &c, Horizon::new(1)?, &WageDistribution::point(w0));
                variance_gap = variance_gap.max((moments(&d[1]).1 - two_point).abs());
            }
        }
    }
    let mut edges = Vec::new();
    for p in [0.0, 1.0] {
        for w0 in [0.2, 0.7] {
            edges.push(single_period_variance(&ContractParams::new(p, 0.5, w0)?, 1.0));
        }
    }
    let edges_zero = edges.iter().all(|&v| v == 0.0);
    Ok((
        effort_gap <= 1e-6 && variance_gap <= 1e-12 && edges_zero,
        format!(
            "effort vs direct search {effort_gap:.2e} (≤ 1e-6), variance vs two-point {variance_gap:.2e} (≤ 1e-12, {capped} capped contracts skipped), zero at p ∈ {{0,1}}: {edges_zero}"
        ),
    ))
}

fn distribution_engine() -> Check {
    let start = Instant::now();
    let additive = ContractParams::new(0.2, 0.5, 0.4)?;
    let additive_prefs = WorkerPrefs::additive(1.0, 0.9)?;
    let cd = table_contract();
    let cd_prefs = WorkerPrefs::cobb_douglas(0.4, 0.6, 0.95)?;
    let mut mismatch: f64 = 0.0;
    let mut mass: f64 = 0.0;
    let mut support_ok = true;
    let mut worst_tv: f64 = 0.0;
    for periods in 1..=12 {
        let h = Horizon::new(periods)?;
        let a = solve_exact(&additive, &additive_prefs, h, 1.0)?;
        let b = solve_policy(&cd, &cd_prefs, h, &DpGrid::default())?;
        let policies: [(&dyn WagePolicy, &ContractParams); 2] = [(&a, &additive), (&b, &cd)];
        for (policy, c) in policies {
            let dists = propagate(policy, c, h, &WageDistribution::point(c.w0()));
            mismatch = mismatch.max(max_gap(&dists[periods], &enumerate_histories(policy, c, h)?));
            for d in &dists {
                mass = mass.max((d.iter().map(|(_, q)| q).sum::<f64>() - 1.0).abs());
            }
            if periods == 10 {
                let sims = simulate(policy, c, h, 100_000, 42)?;
                for (e, s) in dists.iter().zip(&sims) {
                    worst_tv = worst_tv.max(tv(e, s));
                }
            }
        }
        let dists = propagate(&a, &additive, h, &WageDistribution::point(0.4));
        let phi = recursion_phi(0.2, 0.5, 0.9, periods);
        for (t, d) in dists.iter().enumerate() {
            // w0 never evaluated, or last evaluated in period s with wage p(1+α)φ_s
            let mut atoms = vec![(0.4, 0.8f64.powi(t as i32))];
            atoms.extend((1..=t).map(|s| (0.2 * 1.5 * phi[s - 1], 0.2 * 0.8f64.powi((t - s) as i32))));
            let expected = WageDistribution::from_atoms(atoms, 0.0)?;
            support_ok &= d.len() == t + 1 && max_gap(d, &expected) <= 1e-12;
        }
    }
    let elapsed = start.elapsed();
    let fast = elapsed < Duration::from_secs(10);
    Ok((
        mismatch <= 1e-12 && mass <= 1e-12 && support_ok && worst_tv < 0.01 && fast,
        format!(
            "propagate vs enumeration {mismatch:.2e} (≤ 1e-12), mass error {mass:.2e} (≤ 1e-12), additive support t+1 with closed-form atoms: {support_ok}, Monte Carlo TV {worst_tv:.4} (< 0.01), {:.1} s (< 10)",
            elapsed.as_secs_f64()
        ),
    ))
}

/// One-period profit of a unit-scale firm facing the closed-form worker.
fn one_period_profit(k: f64, cost: f64, p: f64, alpha: f64, w0: f64) -> f64 {
    let e = (p + alpha / (1.0 + alpha) * w0).min(1.0);
    let evaluated = (1.0 + alpha) * e - alpha * w0;
    k * e - (p * evaluated + (1.0 - p) * w0 + p * cost)
}

fn employer_optimum() -> Check {
    let (k, cost) = (1.5f64, 0.3f64);
    let alpha = (k * cost).sqrt() / (k - 1.0) - 1.0;
    let p = (1.0 - k) * (cost.sqrt() - k.sqrt()) / cost.sqrt();
    let w0 = (k.sqrt() - cost.sqrt()).powi(2);
    let f = analytic_formulas(&FirmParams::new(k, 1.0 / k, cost, 0.9)?)?;
    let values = (f.alpha - 0.341641).abs() < 1e-6
        && (f.p - 0.618034).abs() < 1e-6
        && (f.w0 - 0.458359).abs() < 1e-6
        && (f.alpha - alpha).abs() < 1e-12
        && (f.p - p).abs() < 1e-12
        && (f.w0 - w0).abs() < 1e-12;
    let forms = (f.p - f.p_alt).abs() <= 1e-9
        && (f.w0 - f.w0_alt).abs() <= 1e-9
        && ((1.0 - alpha / (1.0 + alpha) * k) - p).abs() <= 1e-9
        && (((1.0 + alpha) * p).powi(2) / k - w0).abs() <= 1e-9;
    let underpaid = f.w0 < (1.0 + f.alpha) * f.p;

    let firm = FirmParams::new(k, 1.0 / k, cost, 0.9)?;
    let prefs = WorkerPrefs::additive(1.0, 0.9)?;
    let best = grid_search_optimum(&firm, &prefs, Horizon::new(1)?, &SearchGrid::default())?;
    let (gp, ga, gw) = (best.contract.p(), best.contract.alpha(), best.contract.w0());
    let step = 1e-3 + EXACT;
    let grid_ok = (gp - p).abs() <= step && (ga - alpha).abs() <= step && (gw - w0).abs() <= step;

    let edge = analytic_one_period_optimum(&FirmParams::new(2.0, 0.5, 0.5, 0.9)?)?.contract;
    let edge_ok = edge.alpha() == 0.0 && edge.p() == 1.0 && edge.w0() == 0.5;
    Ok((
        values && forms && grid_ok && underpaid && edge_ok,
        format!(
            "(α*, p*, w0*) = ({:.6}, {:.6}, {:.6}) matches: {values}; printed forms agree: {forms}; underpayment: {underpaid}; k=2, c=0.5 → (0, 1, 0.5): {edge_ok}; grid search (p, α, w0) = ({gp}, {ga}, {gw}) within one step: {grid_ok} (profit {:.4} vs {:.4} at the closed form)",
            f.alpha,
            f.p,
            f.w0,
            one_period_profit(k, cost, gp, ga, gw),
            one_period_profit(k, cost, p, alpha, w0),
        ),
    ))
}

fn weakly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] >= w[0] - 1e-12)
}

fn technology() -> Check {
    let (lambda, cost) = (0.8, 0.2);
    let prefs = WorkerPrefs::additive(1.0, 0.9)?;
    let firm = FirmParams::new(1.5, lambda, cost, 0.9)?;
    let ks: Vec<f64> = (13..=30).map(|i| i as f64 / 10.0).collect();
    let one = Horizon::new(1)?;
    let points = tech_sweep(&ks, &firm, &prefs, one, SolveMethod::Analytic, &SearchGrid::default())?;
    let (mut mean, mut var, mut cv) = (Vec::new(), Vec::new(), Vec::new());
    for pt in &points {
        let c = &pt.optimum.contract;
        let sol = solve_exact(c, &prefs, one, lambda * pt.k)?;
        let (m, v) = moments(&propagate(&sol, c, one, &WageDistribution::point(c.w0()))[1]);
        mean.push(m);
        var.push(v);
        cv.push(v.sqrt() / m);
    }
    let (e_up, v_up, cv_up) = (weakly_increasing(&mean), weakly_increasing(&var), weakly_increasing(&cv));

    let horizon = Horizon::new(5)?;
    let report = tech_shock(&firm, &firm.with_k(2.0)?, &prefs, horizon, &SearchGrid::default())?;
    let mut higher_mean = true;
    let mut higher_var = true;
    let mut profiles = Vec::new();
    for (opt, k) in [(&report.before, 1.5), (&report.after, 2.0)] {
        let c = &opt.contract;
        let sol = solve_exact(c, &prefs, horizon, lambda * k)?;
        let dists = propagate(&sol, c, horizon, &WageDistribution::point(c.w0()));
        profiles.push(dists[1..].iter().map(moments).collect::<Vec<_>>());
    }
    for (before, after) in profiles[0].iter().zip(&profiles[1]) {
        higher_mean &= after.0 >= before.0;
        higher_var &= after.1 >= before.1;
    }
    let last = horizon.periods() - 1;
    let cost_up = report.after_relative_cost[last] > report.before_relative_cost[last];
    Ok((
        e_up && v_up && cv_up && higher_mean && higher_var && cost_up,
        format!(
            "sweep k 1.3..3.0: expectancy rising {e_up}, variance rising {v_up}, std/mean rising {cv_up} ({:.4} → {:.4}); shock 1.5 → 2.0: expectancy higher {higher_mean}, variance higher {higher_var}, late relative cost {:.4} → {:.4} rising {cost_up}",
            cv[0],
            cv[cv.len() - 1],
            report.before_relative_cost[last],
            report.after_relative_cost[last],
        ),
    ))
}

fn statics() -> Check {
    let prefs = WorkerPrefs::additive(1.0, 0.9)?;
    let (mut interior, mut penalty) = (0, 0);
    let mut violations = Vec::new();
    let mut residual: f64 = 0.0;
    for p in [0.1, 0.3, 0.5] {
        for alpha in [0.1, 0.5, 0.9] {
            for w0 in [0.2, 0.5, 0.8] {
                let e = searched_effort(p, alpha, w0, 1.0);
                if e <= 0.0 || e >= 1.0 {
                    continue;
                }
                interior += 1;
                let h = 1e-5;
                let fd = |f: &dyn Fn(f64) -> f64, x: f64| (f(x + h * x) - f(x - h * x)) / (2.0 * h * x);
                let d_p = fd(&|x| searched_effort(x, alpha, w0, 1.0), p);
                let d_w0 = fd(&|x| searched_effort(p, alpha, x, 1.0), w0);
                let d_alpha = fd(&|x| searched_effort(p, x, w0, 1.0), alpha);
                let s = effort_sensitivity(&ContractParams::new(p, alpha, w0)?, &prefs, 1.0, 1e-5)?;
                residual = residual.max(s.foc_residual.map_or(f64::INFINITY, f64::abs));
                let pay = (1.0 + alpha) * s.effort - alpha * w0;
                residual = residual.max((p - pay / (1.0 + alpha)).abs());
                let in_penalty = s.effort <= w0 + EXACT;
                let mut ok = d_p > 0.0 && d_w0 > 0.0 && s.d_p.value > 0.0 && s.d_w0.value > 0.0;
                ok &= in_penalty == (s.regime == Regime::Penalty);
                if in_penalty {
                    penalty += 1;
                    ok &= d_alpha > 0.0 && s.d_alpha.value > 0.0;
                }
                if !ok {
                    violations.push(format!("({p}, {alpha}, {w0})"));
                }
            }
        }
    }
    Ok((
        violations.is_empty() && residual < 1e-6 && interior > 0,
        format!(
            "{interior} interior optima, {penalty} with deserved wage ≤ w0; sign violations: [{}]; max FOC residual {residual:.2e} (< 1e-6)",
            violations.join(" ")
        ),
    ))
}

fn collect_files(root: &Path, dir: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) -> std::io::Result<()> {
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            collect_files(root, &path, out)?;
        } else {
            out.insert(path.strip_prefix(root).unwrap().to_path_buf(), fs::read(&path)?);
        }
    }
    Ok(())
}

fn determinism() -> Check {
    let tmp = tempfile::tempdir()?;
    let mut runs = Vec::new();
    for name in ["first", "second"] {
        let out = tmp.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_supwage"))
            .args(["reproduce-all", "--seed", "42", "--out"])
            .arg(&out)
            .output()?
            .status;
        // exit 2 only signals failed criteria; the outputs are still written
        if !matches!(status.code(), Some(0 | 2)) {
            return Ok((false, format!("reproduce-all exited with {status}")));
        }
        let mut files = BTreeMap::new();
        collect_files(&out, &out, &mut files)?;
        runs.push(files);
    }
    let differing: Vec<String> = runs[0]
        .iter()
        .filter(|(path, bytes)| runs[1].get(*path) != Some(bytes))
        .map(|(path, _)| path.display().to_string())
        .collect();
    let same_files = runs[0].len() == runs[1].len() && differing.is_empty();

    let prefs = WorkerPrefs::cobb_douglas(0.4, 0.6, 0.95)?;
    let c = table_contract();
    let h = Horizon::new(10)?;
    let policy = solve_policy(&c, &prefs, h, &DpGrid::default())?;
    let mut samples = Vec::new();
    for threads in [1, 2, 8] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
        samples.push(pool.install(|| simulate(&policy, &c, h, 40_000, 42))?);
    }
    let thread_invariant = samples.windows(2).all(|w| w[0] == w[1]);
    Ok((
        same_files && thread_invariant && !runs[0].is_empty(),
        format!(
            "{} files byte-identical across two runs: {same_files}{}; simulation equal on 1, 2 and 8 threads: {thread_invariant}",
            runs[0].len(),
            if differing.is_empty() { String::new() } else { format!(" (differ: {})", differing.join(", ")) }
        ),
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
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
    let mut failed = 0;
    for (i, (title, check)) in criteria.iter().enumerate() {
        let (passed, detail) = check().unwrap_or_else(|e| (false, format!("error: {e}")));
        if !passed {
            failed += 1;
        }
        println!("criterion {} [{}] {title}: {detail}", i + 1, if passed { "PASS" } else { "FAIL" });
    }
    println!("{}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
