//! Runs a resolved scenario and renders its artifacts.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use supervision_wage::additive::{
    additive_wage_support, deterministic_path, growing_efforts, single_period_effort, single_period_variance,
    single_period_wage_pair, solve_backward_induction, solve_exact, OracleOptions,
};
use supervision_wage::cobb_douglas::{
    always_sampled_path, path_csv, policy_monotonicity_report, solve_policy_with, DpOptions, EffortPolicy,
    PayTiming,
};
use supervision_wage::distribution::{
    bracketize, profile, propagate, simulate, total_variation, Bracket, ProfileSeries, WageDistribution,
};
use supervision_wage::employer::{
    analytic_formulas, analytic_one_period_optimum, contract_outcome, grid_search_optimum,
    stationary_one_period_optimum, sweep_csv, tech_shock, tech_sweep, OptimalContract,
};
use supervision_wage::statics::{effort_sensitivity, sensitivity_csv};
use supervision_wage::{ContractParams, Result};

use crate::config::{EffortPath, Experiment, Scenario};
use crate::svg::{line_chart, Series};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArtifactKind {
    Csv,
    Json,
    Svg,
    /// The resolved scenario echo, written in every format.
    Config,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub kind: ArtifactKind,
    pub contents: String,
}

impl Artifact {
    fn csv(name: &str, contents: String) -> Self {
        Self {
            name: format!("{name}.csv"),
            kind: ArtifactKind::Csv,
            contents,
        }
    }

    fn svg(name: &str, contents: String) -> Self {
        Self {
            name: format!("{name}.svg"),
            kind: ArtifactKind::Svg,
            contents,
        }
    }

    fn json<T: Serialize>(name: &str, value: &T) -> Self {
        Self {
            name: format!("{name}.json"),
            kind: ArtifactKind::Json,
            contents: to_json_text(value),
        }
    }
}

fn to_json_text<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("artifacts serialize to JSON");
    text.push('\n');
    text
}

/// Which artifact kinds to write.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    /// CSV tables and SVG charts.
    Csv,
    Json,
    #[default]
    Both,
}

impl Format {
    pub fn includes(self, kind: ArtifactKind) -> bool {
        match kind {
            ArtifactKind::Config => true,
            ArtifactKind::Csv | ArtifactKind::Svg => self != Format::Json,
            ArtifactKind::Json => self != Format::Csv,
        }
    }
}

pub const RESOLVED_CONFIG: &str = "resolved_config.json";

/// All artifacts of a scenario, including the resolved configuration echo.
pub fn execute(scenario: &Scenario) -> Result<Vec<Artifact>> {
    let mut out = vec![Artifact {
        name: RESOLVED_CONFIG.into(),
        kind: ArtifactKind::Config,
        contents: to_json_text(&scenario.to_json()),
    }];
    out.extend(match &scenario.experiment {
        Experiment::AdditiveProfile {
            path,
            w0_values,
            p_values,
            oracle,
        } => additive_profile(scenario, *path, w0_values, p_values, *oracle)?,
        Experiment::CdPolicy { timing } => cd_policy(scenario, *timing)?,
        Experiment::CdPath { timing } => cd_path(scenario, *timing)?,
        Experiment::CdDistribution {
            timing,
            bracket_width,
            monte_carlo,
        } => cd_distribution(scenario, *timing, *bracket_width, *monte_carlo)?,
        Experiment::EmployerOptimum { method, search } => {
            employer_optimum(scenario, method.analytic(), method.grid_search(), search)?
        }
        Experiment::TechSweep {
            k_values,
            method,
            search,
        } => {
            let points = tech_sweep(
                k_values,
                scenario.firm(),
                &scenario.prefs,
                scenario.horizon(),
                *method,
                search,
            )?;
            let series = |name: &str, f: &dyn Fn(&supervision_wage::employer::SweepPoint) -> Option<f64>| {
                Series::new(name, points.iter().filter_map(|p| f(p).map(|y| (p.k, y))).collect())
            };
            let chart = line_chart(
                "Wage moments against marginal product",
                "k",
                "value",
                &[
                    series("expectancy", &|p| Some(p.expectancy)),
                    series("variance", &|p| Some(p.variance)),
                    series("std/mean", &|p| p.std_over_mean),
                ],
            );
            vec![
                Artifact::csv("sweep", sweep_csv(&points)),
                Artifact::svg("sweep", chart),
                Artifact::json("sweep", &points),
            ]
        }
        Experiment::TechShock { k_after, search } => {
            let before = scenario.firm();
            let after = before.with_k(*k_after)?;
            let report = tech_shock(before, &after, &scenario.prefs, scenario.horizon(), search)?;
            let chart = line_chart(
                "Wage profiles before and after the shock",
                "period",
                "value",
                &[
                    period_series("expectancy before", &report.before_profile.expectancy),
                    period_series("expectancy after", &report.after_profile.expectancy),
                    period_series("variance before", &report.before_profile.variance),
                    period_series("variance after", &report.after_profile.variance),
                ],
            );
            vec![
                Artifact::csv("shock", report.to_csv()),
                Artifact::svg("shock", chart),
                Artifact::json("shock", &report),
            ]
        }
        Experiment::Statics {
            p_values,
            alpha_values,
            w0_values,
            relative_step,
            wage_scale,
        } => {
            let mut rows = Vec::new();
            for &p in p_values {
                for &alpha in alpha_values {
                    for &w0 in w0_values {
                        let c = ContractParams::new(p, alpha, w0)?;
                        rows.push(effort_sensitivity(&c, &scenario.prefs, *wage_scale, *relative_step)?);
                    }
                }
            }
            vec![
                Artifact::csv("sensitivity", sensitivity_csv(&rows)),
                Artifact::json("sensitivity", &rows),
            ]
        }
    });
    Ok(out)
}

/// Writes the artifacts selected by `format` into `dir`.
pub fn write_artifacts(dir: &Path, artifacts: &[Artifact], format: Format) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for a in artifacts.iter().filter(|a| format.includes(a.kind)) {
        let path = dir.join(&a.name);
        std::fs::write(&path, &a.contents)?;
        written.push(path);
    }
    Ok(written)
}

fn period_series(name: &str, values: &[f64]) -> Series {
    Series::new(
        name,
        values.iter().enumerate().map(|(t, &v)| ((t + 1) as f64, v)).collect(),
    )
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn moments_csv(moments: &ProfileSeries) -> String {
    let mut out = String::from("period,expectancy,variance,std_over_mean\n");
    for t in 0..moments.len() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            t + 1,
            moments.expectancy[t],
            moments.variance[t],
            opt(moments.std_over_mean[t])
        );
    }
    out
}

fn moments_chart(title: &str, moments: &ProfileSeries) -> String {
    line_chart(
        title,
        "period",
        "value",
        &[
            period_series("expectancy", &moments.expectancy),
            period_series("variance", &moments.variance),
        ],
    )
}

#[derive(Serialize)]
struct OracleRow {
    period: usize,
    phi: f64,
    max_affine_gap: f64,
    evaluated_wage_spread: f64,
}

#[derive(Serialize)]
struct CurvePoint {
    w0: f64,
    p: f64,
    effort: f64,
    evaluated_wage: f64,
    variance: f64,
}

fn additive_profile(
    s: &Scenario,
    path: Option<EffortPath>,
    w0_values: &[f64],
    p_values: &[f64],
    with_oracle: bool,
) -> Result<Vec<Artifact>> {
    let contract = s.contract();
    let horizon = s.horizon();
    let b = s.prefs.additive_b()?;
    let solution = solve_exact(contract, &s.prefs, horizon, 1.0)?;
    let dists = propagate(&solution, contract, horizon, &WageDistribution::point(contract.w0()));
    let moments = profile(&dists[1..]);
    let support = additive_wage_support(&solution);

    let mut support_csv = String::from("last_evaluated,wage,probability\n");
    for sp in &support {
        let last = sp.last_evaluated.map(|t| t.to_string()).unwrap_or_default();
        let _ = writeln!(support_csv, "{last},{},{}", sp.wage, sp.probability);
    }

    let mut out = vec![
        Artifact::csv("solution", solution.to_csv()),
        Artifact::csv("moments", moments_csv(&moments)),
        Artifact::svg("moments", moments_chart("Additive wage expectancy and variance", &moments)),
        Artifact::csv("support", support_csv),
    ];

    let oracle_rows = if with_oracle {
        let options = OracleOptions {
            grid_points: s.grid.oracle_points,
            ..OracleOptions::default()
        };
        let oracle = solve_backward_induction(contract, &s.prefs, horizon, &options)?;
        let rows: Vec<OracleRow> = (1..=horizon.periods())
            .map(|t| OracleRow {
                period: t,
                phi: oracle.fitted.phi[t - 1],
                max_affine_gap: oracle
                    .feasible_states(t)
                    .map(|i| (oracle.effort[t - 1][i] - oracle.fitted.closed_form_effort(t, oracle.grid[i])).abs())
                    .fold(0.0, f64::max),
                evaluated_wage_spread: oracle.evaluated_wage_spread(t),
            })
            .collect();
        let mut csv = String::from("period,phi,max_affine_gap,evaluated_wage_spread\n");
        for r in &rows {
            let _ = writeln!(csv, "{},{},{},{}", r.period, r.phi, r.max_affine_gap, r.evaluated_wage_spread);
        }
        out.push(Artifact::csv("oracle", csv));
        Some(rows)
    } else {
        None
    };

    let path_rows = path.map(|p| {
        let efforts = growing_efforts(p.e0, p.growth, horizon.periods());
        let wages = deterministic_path(contract, &efforts, 1.0);
        let rows: Vec<Value> = efforts
            .iter()
            .zip(&wages)
            .enumerate()
            .map(|(t, (e, w))| json!({"period": t + 1, "effort": e, "wage": w}))
            .collect();
        let mut csv = String::from("period,effort,wage\n");
        for (t, (e, w)) in efforts.iter().zip(&wages).enumerate() {
            let _ = writeln!(csv, "{},{e},{w}", t + 1);
        }
        out.push(Artifact::csv("path", csv));
        out.push(Artifact::svg(
            "path",
            line_chart(
                "Always-evaluated wage path",
                "period",
                "value",
                &[period_series("effort", &efforts), period_series("wage", &wages)],
            ),
        ));
        rows
    });

    let mut curves = Vec::new();
    for &w0 in w0_values {
        for &p in p_values {
            let c = ContractParams::new(p, contract.alpha(), w0)?;
            curves.push(CurvePoint {
                w0,
                p,
                effort: single_period_effort(&c, b),
                evaluated_wage: single_period_wage_pair(&c, b).evaluated,
                variance: single_period_variance(&c, b),
            });
        }
    }
    if !curves.is_empty() {
        let mut csv = String::from("w0,p,effort,evaluated_wage,variance\n");
        for c in &curves {
            let _ = writeln!(csv, "{},{},{},{},{}", c.w0, c.p, c.effort, c.evaluated_wage, c.variance);
        }
        out.push(Artifact::csv("variance_curves", csv));
        let series: Vec<Series> = w0_values
            .iter()
            .map(|&w0| {
                Series::new(
                    format!("w0 = {w0}"),
                    curves.iter().filter(|c| c.w0 == w0).map(|c| (c.p, c.variance)).collect(),
                )
            })
            .collect();
        out.push(Artifact::svg(
            "variance_curves",
            line_chart("One-period wage variance", "p", "variance", &series),
        ));
    }

    out.push(Artifact::json(
        "additive_profile",
        &json!({
            "solution": solution,
            "moments": moments,
            "support": support,
            "oracle": oracle_rows,
            "path": path_rows,
            "variance_curves": curves,
        }),
    ));
    Ok(out)
}

fn solve_cd(s: &Scenario, timing: PayTiming) -> Result<EffortPolicy> {
    let options = DpOptions {
        wage_scale: 1.0,
        timing,
    };
    solve_policy_with(s.contract(), &s.prefs, s.horizon(), &s.grid.dp, &options)
}

fn cd_policy(s: &Scenario, timing: PayTiming) -> Result<Vec<Artifact>> {
    let policy = solve_cd(s, timing)?;
    let json = json!({
        "row_wages": policy.row_wages(),
        "table": policy.table(),
        "bellman_residual": policy.bellman_residual(),
        "monotonicity": policy_monotonicity_report(&policy),
    });
    Ok(vec![
        Artifact::csv("policy", policy.to_csv()),
        Artifact::json("policy", &json),
    ])
}

fn cd_path(s: &Scenario, timing: PayTiming) -> Result<Vec<Artifact>> {
    let policy = solve_cd(s, timing)?;
    let path = always_sampled_path(&policy, s.contract().w0())?;
    Ok(vec![
        Artifact::csv("path", path_csv(&path)),
        Artifact::json("path", &path),
    ])
}

#[derive(Serialize)]
struct MonteCarloRow {
    period: usize,
    exact_mean: f64,
    simulated_mean: f64,
    total_variation: f64,
}

fn cd_distribution(s: &Scenario, timing: PayTiming, width: f64, monte_carlo: bool) -> Result<Vec<Artifact>> {
    let contract = s.contract();
    let horizon = s.horizon();
    let periods = horizon.periods();
    let policy = solve_cd(s, timing)?;
    let dists = propagate(&policy, contract, horizon, &WageDistribution::point(contract.w0()));
    // column t is the wage a worker brings into period t
    let entering = &dists[..periods];
    let histograms = entering
        .iter()
        .map(|d| bracketize(d, width))
        .collect::<Result<Vec<_>>>()?;
    let mut brackets: Vec<Bracket> = histograms.iter().flat_map(|h| h.masses.keys().copied()).collect();
    brackets.sort();
    brackets.dedup();

    let mut csv = String::from("bracket");
    for t in 1..=periods {
        let _ = write!(csv, ",period_{t}");
    }
    csv.push('\n');
    let mut rows = Vec::new();
    for &b in &brackets {
        let masses: Vec<f64> = histograms.iter().map(|h| h.mass(b)).collect();
        let _ = write!(csv, "{}", b.label(width));
        for m in &masses {
            let _ = write!(csv, ",{m}");
        }
        csv.push('\n');
        rows.push(json!({"bracket": b.label(width), "masses": masses}));
    }

    let moments = profile(entering);
    let mut out = vec![
        Artifact::csv("brackets", csv),
        Artifact::csv("moments", moments_csv(&moments)),
        Artifact::svg("moments", moments_chart("Wage expectancy and variance", &moments)),
    ];

    let mc_rows = if monte_carlo {
        let sims = simulate(&policy, contract, horizon, s.simulation.n_paths, s.simulation.seed)?;
        let rows: Vec<MonteCarloRow> = (0..periods)
            .map(|t| MonteCarloRow {
                period: t + 1,
                exact_mean: dists[t].mean(),
                simulated_mean: sims[t].mean(),
                total_variation: total_variation(&dists[t], &sims[t], 1e-9),
            })
            .collect();
        let mut csv = String::from("period,exact_mean,simulated_mean,total_variation\n");
        for r in &rows {
            let _ = writeln!(csv, "{},{},{},{}", r.period, r.exact_mean, r.simulated_mean, r.total_variation);
        }
        out.push(Artifact::csv("monte_carlo", csv));
        Some(rows)
    } else {
        None
    };

    out.push(Artifact::json(
        "distribution",
        &json!({
            "bracket_width": width,
            "brackets": rows,
            "moments": moments,
            "monte_carlo": mc_rows,
        }),
    ));
    Ok(out)
}

fn outcome_or_error<T: Serialize>(r: Result<T>) -> Value {
    match r {
        Ok(v) => serde_json::to_value(v).expect("serializable"),
        Err(e) => json!({"error": e.to_string()}),
    }
}

fn employer_optimum(
    s: &Scenario,
    analytic: bool,
    grid: bool,
    search: &supervision_wage::employer::SearchGrid,
) -> Result<Vec<Artifact>> {
    let firm = s.firm();
    let horizon = s.horizon();
    let mut rows: Vec<(&str, OptimalContract)> = Vec::new();
    let mut json = serde_json::Map::new();
    if analytic {
        // closed forms are one-period results at unit wage scale and b = 1
        json.insert("formulas".into(), outcome_or_error(analytic_formulas(firm)));
        let printed = analytic_one_period_optimum(firm);
        let stationary = stationary_one_period_optimum(firm);
        json.insert("analytic".into(), outcome_or_error(printed.clone()));
        json.insert("stationary".into(), outcome_or_error(stationary.clone()));
        rows.extend(printed.ok().map(|o| ("analytic", o)));
        rows.extend(stationary.ok().map(|o| ("stationary", o)));
    }
    if grid {
        let best = grid_search_optimum(firm, &s.prefs, horizon, search)?;
        let outcome = contract_outcome(&best.contract, firm, &s.prefs, horizon)?;
        json.insert("grid_search".into(), serde_json::to_value(&best).expect("serializable"));
        json.insert("grid_search_outcome".into(), serde_json::to_value(&outcome).expect("serializable"));
        rows.push(("grid_search", best));
    }
    let mut csv = String::from("method,p,alpha,w0,profit,at_bounds\n");
    for (name, o) in &rows {
        let _ = writeln!(
            csv,
            "{name},{},{},{},{},{}",
            o.contract.p(),
            o.contract.alpha(),
            o.contract.w0(),
            o.profit,
            o.at_bounds.join(";")
        );
    }
    Ok(vec![
        Artifact::csv("optimum", csv),
        Artifact::json("optimum", &Value::Object(json)),
    ])
}
