use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use supervision_wage::additive::{
    single_period_effort, single_period_variance, solve_backward_induction, solve_exact, OracleOptions,
};
use supervision_wage::distribution::{propagate, WageDistribution};
use supervision_wage::{ContractParams, Horizon, WorkerPrefs};

fn fig_params() -> (ContractParams, WorkerPrefs, Horizon) {
    (
        ContractParams::new(0.2, 0.5, 0.4).unwrap(),
        WorkerPrefs::additive(1.0, 0.9).unwrap(),
        Horizon::new(10).unwrap(),
    )
}

/// Effort coefficient by the backward recursion for an uncapped worker:
/// `φ_t = (1 + δ(1−p)·S) / (1 + δ·p·α·S)` with `S = Σ_{j<T−t} (δ(1−p))^j`.
fn recursion_phi(p: f64, alpha: f64, delta: f64, periods: usize) -> Vec<f64> {
    let r = delta * (1.0 - p);
    (1..=periods)
        .map(|t| {
            let s: f64 = (0..periods - t).map(|j| r.powi(j as i32)).sum();
            (1.0 + r * s) / (1.0 + delta * p * alpha * s)
        })
        .collect()
}

#[test]
fn oracle_effort_is_affine_in_previous_wage() {
    let (c, prefs, h) = fig_params();
    let oracle = solve_backward_induction(&c, &prefs, h, &OracleOptions::default()).unwrap();
    for t in 1..=h.periods() {
        for i in oracle.feasible_states(t) {
            let affine = oracle.fitted.closed_form_effort(t, oracle.grid[i]);
            assert!(
                (oracle.effort[t - 1][i] - affine).abs() <= oracle.options.effort_tolerance,
                "t={t} w={}",
                oracle.grid[i]
            );
        }
        assert!(oracle.evaluated_wage_spread(t) < 1e-6, "t={t}");
    }
    let phi = &oracle.fitted.phi;
    assert_abs_diff_eq!(phi[h.periods() - 1], 1.0, epsilon = 1e-9);
    assert!(phi.windows(2).all(|w| w[1] <= w[0] + 1e-9));
}

#[test]
fn oracle_and_exact_solver_agree() {
    let (c, prefs, h) = fig_params();
    let oracle = solve_backward_induction(&c, &prefs, h, &OracleOptions::default()).unwrap();
    let exact = solve_exact(&c, &prefs, h, 1.0).unwrap();
    for (a, b) in oracle.fitted.phi.iter().zip(&exact.phi) {
        assert!((a - b).abs() < 2e-3, "oracle {a} exact {b}");
    }
    for (x, y) in exact.phi.iter().zip(recursion_phi(0.2, 0.5, 0.9, 10)) {
        assert_abs_diff_eq!(*x, y, epsilon = 1e-12);
    }
}

#[test]
fn oracle_optimum_is_stationary() {
    let (c, prefs, h) = fig_params();
    let oracle = solve_backward_induction(&c, &prefs, h, &OracleOptions::default()).unwrap();
    let step = 1e-6;
    for t in 1..=h.periods() {
        for i in oracle.feasible_states(t).step_by(50) {
            let e = oracle.effort[t - 1][i];
            if e <= step || e >= 1.0 - step {
                continue;
            }
            let f0 = oracle.objective(t, i, e);
            let left = (f0 - oracle.objective(t, i, e - step)) / step;
            let right = (oracle.objective(t, i, e + step) - f0) / step;
            // optima can sit on interpolation kinks, so each side is checked separately
            assert!(left > -1e-4 && right < 1e-4, "t={t} i={i} left={left} right={right}");
        }
    }
}

#[test]
fn higher_base_wage_raises_oracle_effort_one_for_one_with_the_bonus_share() {
    let (c, prefs, h) = fig_params();
    let oracle = solve_backward_induction(&c, &prefs, h, &OracleOptions::default()).unwrap();
    let slope = 0.5 / 1.5;
    let states: Vec<usize> = oracle.feasible_states(1).filter(|&i| oracle.effort[0][i] < 1.0).collect();
    let (a, b) = (states[10], states[states.len() / 2]);
    let measured = (oracle.effort[0][b] - oracle.effort[0][a]) / (oracle.grid[b] - oracle.grid[a]);
    assert_abs_diff_eq!(measured, slope, epsilon = 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_solver_matches_recursion_when_uncapped(
        p in 0.05f64..0.6,
        alpha in 0.0f64..1.0,
        delta in 0.5f64..0.99,
        periods in 1usize..15,
    ) {
        let c = ContractParams::new(p, alpha, 0.3).unwrap();
        let prefs = WorkerPrefs::additive(1.0, delta).unwrap();
        let phi = recursion_phi(p, alpha, delta, periods);
        // keep effort and wages away from the cap
        prop_assume!(phi.iter().all(|f| p * f * (1.0 + alpha) < 0.95));
        let exact = solve_exact(&c, &prefs, Horizon::new(periods).unwrap(), 1.0).unwrap();
        for (x, y) in exact.phi.iter().zip(&phi) {
            prop_assert!((x - y).abs() < 1e-9, "exact {} recursion {}", x, y);
        }
        prop_assert!((exact.phi[periods - 1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_period_variance_matches_propagated_distribution(
        p in 0.0f64..=1.0,
        alpha in 0.0f64..=1.0,
        w0 in 0.05f64..1.0,
    ) {
        let c = ContractParams::new(p, alpha, w0).unwrap();
        prop_assume!(single_period_effort(&c, 1.0) < 1.0);
        let prefs = WorkerPrefs::additive(1.0, 0.9).unwrap();
        let h = Horizon::new(1).unwrap();
        let sol = solve_exact(&c, &prefs, h, 1.0).unwrap();
        let dists = propagate(&sol, &c, h, &WageDistribution::point(w0));
        prop_assert!((dists[1].variance() - single_period_variance(&c, 1.0)).abs() < 1e-12);
    }

    #[test]
    fn underpaid_base_wage_widens_the_spread(p in 0.05f64..0.95, alpha in 0.0f64..=1.0, gap in 0.01f64..0.5) {
        let deserved = p * (1.0 + alpha);
        prop_assume!(deserved - gap > 0.0);
        let at = ContractParams::new(p, alpha, deserved).unwrap();
        let below = ContractParams::new(p, alpha, deserved - gap).unwrap();
        prop_assert!(single_period_variance(&below, 1.0) > single_period_variance(&at, 1.0));
    }
}
