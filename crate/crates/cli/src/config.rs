//! Scenario files: parsing, defaults and validation.
//!
//! A scenario is a JSON object with the sections `contract`, `prefs`, `firm`,
//! `horizon`, `grid`, `simulation` and `experiment`. Every problem found is
//! reported with the dotted key it concerns, e.g. `contract.p`.

use std::fmt;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Map, Value};
use supervision_wage::cobb_douglas::{DpGrid, PayTiming};
use supervision_wage::employer::{SearchGrid, SolveMethod};
use supervision_wage::{ContractParams, FirmParams, Horizon, ModelError, WorkerPrefs};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_N_PATHS: u64 = 100_000;
pub const DEFAULT_ORACLE_POINTS: u64 = 1001;
pub const DEFAULT_RELATIVE_STEP: f64 = 1e-5;
pub const DEFAULT_BRACKET_WIDTH: f64 = 0.1;

/// The subcommands that run a single scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    AdditiveProfile,
    CdPolicy,
    CdPath,
    CdDistribution,
    EmployerOptimum,
    TechSweep,
    TechShock,
    Statics,
}

impl Command {
    pub const ALL: [Command; 8] = [
        Command::AdditiveProfile,
        Command::CdPolicy,
        Command::CdPath,
        Command::CdDistribution,
        Command::EmployerOptimum,
        Command::TechSweep,
        Command::TechShock,
        Command::Statics,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::AdditiveProfile => "additive-profile",
            Command::CdPolicy => "cd-policy",
            Command::CdPath => "cd-path",
            Command::CdDistribution => "cd-distribution",
            Command::EmployerOptimum => "employer-optimum",
            Command::TechSweep => "tech-sweep",
            Command::TechShock => "tech-shock",
            Command::Statics => "statics",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == name)
    }

    fn needs_contract(self) -> bool {
        matches!(
            self,
            Command::AdditiveProfile | Command::CdPolicy | Command::CdPath | Command::CdDistribution
        )
    }

    fn needs_firm(self) -> bool {
        matches!(self, Command::EmployerOptimum | Command::TechSweep | Command::TechShock)
    }

    fn needs_horizon(self) -> bool {
        self != Command::Statics
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One problem in a scenario file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConfigIssue {
    pub key: String,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{}`: {}", self.key, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path} is not valid JSON: {source}")]
    Json {
        path: String,
        source: serde_json::Error,
    },
    #[error("invalid scenario ({} problem(s)):{}", .0.len(), list_issues(.0))]
    Invalid(Vec<ConfigIssue>),
}

fn list_issues(issues: &[ConfigIssue]) -> String {
    issues.iter().map(|i| format!("\n  {i}")).collect()
}

impl ConfigError {
    pub fn issues(&self) -> &[ConfigIssue] {
        match self {
            ConfigError::Invalid(issues) => issues,
            _ => &[],
        }
    }
}

/// Grid settings shared by the solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    pub dp: DpGrid,
    pub oracle_points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimulationConfig {
    pub seed: u64,
    pub n_paths: usize,
}

/// Exogenous effort path for the always-evaluated additive worker.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffortPath {
    pub e0: f64,
    pub growth: f64,
}

/// Which employer solutions to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmployerMethod {
    Analytic,
    GridSearch,
    Both,
}

impl EmployerMethod {
    fn name(self) -> &'static str {
        match self {
            EmployerMethod::Analytic => "analytic",
            EmployerMethod::GridSearch => "grid_search",
            EmployerMethod::Both => "both",
        }
    }

    pub fn analytic(self) -> bool {
        self != EmployerMethod::GridSearch
    }

    pub fn grid_search(self) -> bool {
        self != EmployerMethod::Analytic
    }
}

/// Settings specific to each subcommand.
#[derive(Debug, Clone, PartialEq)]
pub enum Experiment {
    AdditiveProfile {
        path: Option<EffortPath>,
        w0_values: Vec<f64>,
        p_values: Vec<f64>,
        oracle: bool,
    },
    CdPolicy {
        timing: PayTiming,
    },
    CdPath {
        timing: PayTiming,
    },
    CdDistribution {
        timing: PayTiming,
        bracket_width: f64,
        monte_carlo: bool,
    },
    EmployerOptimum {
        method: EmployerMethod,
        search: SearchGrid,
    },
    TechSweep {
        k_values: Vec<f64>,
        method: SolveMethod,
        search: SearchGrid,
    },
    TechShock {
        k_after: f64,
        search: SearchGrid,
    },
    Statics {
        p_values: Vec<f64>,
        alpha_values: Vec<f64>,
        w0_values: Vec<f64>,
        relative_step: f64,
        wage_scale: f64,
    },
}

impl Experiment {
    pub fn command(&self) -> Command {
        match self {
            Experiment::AdditiveProfile { .. } => Command::AdditiveProfile,
            Experiment::CdPolicy { .. } => Command::CdPolicy,
            Experiment::CdPath { .. } => Command::CdPath,
            Experiment::CdDistribution { .. } => Command::CdDistribution,
            Experiment::EmployerOptimum { .. } => Command::EmployerOptimum,
            Experiment::TechSweep { .. } => Command::TechSweep,
            Experiment::TechShock { .. } => Command::TechShock,
            Experiment::Statics { .. } => Command::Statics,
        }
    }
}

/// A fully resolved scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub contract: Option<ContractParams>,
    pub prefs: WorkerPrefs,
    pub firm: Option<FirmParams>,
    pub horizon: Option<Horizon>,
    pub grid: GridConfig,
    pub simulation: SimulationConfig,
    pub experiment: Experiment,
}

impl Scenario {
    pub fn command(&self) -> Command {
        self.experiment.command()
    }

    /// The contract; present for every command that needs one.
    pub fn contract(&self) -> &ContractParams {
        self.contract.as_ref().expect("validated scenario has a contract")
    }

    pub fn firm(&self) -> &FirmParams {
        self.firm.as_ref().expect("validated scenario has a firm")
    }

    pub fn horizon(&self) -> Horizon {
        self.horizon.expect("validated scenario has a horizon")
    }

    /// The scenario with every default filled in, in the input schema.
    pub fn to_json(&self) -> Value {
        let mut root = Map::new();
        if let Some(c) = &self.contract {
            root.insert("contract".into(), json!({"p": c.p(), "alpha": c.alpha(), "w0": c.w0()}));
        }
        let prefs = match self.prefs {
            WorkerPrefs::Additive { b, delta } => json!({"family": "additive", "b": b, "delta": delta}),
            WorkerPrefs::CobbDouglas { gamma, beta, delta } => {
                json!({"family": "cobb_douglas", "gamma": gamma, "beta": beta, "delta": delta})
            }
        };
        root.insert("prefs".into(), prefs);
        if let Some(f) = &self.firm {
            root.insert(
                "firm".into(),
                json!({"k": f.k(), "lambda": f.lambda(), "c": f.c(), "eta": f.eta()}),
            );
        }
        if let Some(h) = self.horizon {
            root.insert("horizon".into(), json!({"periods": h.periods()}));
        }
        root.insert(
            "grid".into(),
            json!({
                "wage_step": self.grid.dp.wage_step,
                "effort_step": self.grid.dp.effort_step,
                "wage_max": self.grid.dp.wage_max,
                "oracle_points": self.grid.oracle_points,
            }),
        );
        root.insert(
            "simulation".into(),
            json!({"seed": self.simulation.seed, "n_paths": self.simulation.n_paths}),
        );
        root.insert("experiment".into(), self.experiment_json());
        Value::Object(root)
    }

    fn experiment_json(&self) -> Value {
        let mut out = match &self.experiment {
            Experiment::AdditiveProfile {
                path,
                w0_values,
                p_values,
                oracle,
            } => json!({
                "path": path.map(|p| json!({"e0": p.e0, "growth": p.growth})),
                "w0_values": w0_values,
                "p_values": p_values,
                "oracle": oracle,
            }),
            Experiment::CdPolicy { timing } | Experiment::CdPath { timing } => {
                json!({"timing": timing})
            }
            Experiment::CdDistribution {
                timing,
                bracket_width,
                monte_carlo,
            } => json!({
                "timing": timing,
                "bracket_width": bracket_width,
                "monte_carlo": monte_carlo,
            }),
            Experiment::EmployerOptimum { method, search } => {
                json!({"method": method.name(), "search": search})
            }
            Experiment::TechSweep {
                k_values,
                method,
                search,
            } => json!({"k_values": k_values, "method": method, "search": search}),
            Experiment::TechShock { k_after, search } => json!({"k_after": k_after, "search": search}),
            Experiment::Statics {
                p_values,
                alpha_values,
                w0_values,
                relative_step,
                wage_scale,
            } => json!({
                "p_values": p_values,
                "alpha_values": alpha_values,
                "w0_values": w0_values,
                "relative_step": relative_step,
                "wage_scale": wage_scale,
            }),
        };
        out.as_object_mut()
            .expect("experiment is an object")
            .insert("command".into(), json!(self.command().name()));
        out
    }
}

/// Reads and validates a scenario file.
pub fn load_config(path: &Path, command: Option<Command>) -> Result<Scenario, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text, command).map_err(|e| match e {
        ConfigError::Json { source, .. } => ConfigError::Json {
            path: path.display().to_string(),
            source,
        },
        other => other,
    })
}

pub fn parse_config(text: &str, command: Option<Command>) -> Result<Scenario, ConfigError> {
    let value: Value = serde_json::from_str(text).map_err(|source| ConfigError::Json {
        path: "<input>".into(),
        source,
    })?;
    validate_config(&value, command)
}

/// Checks every parameter, fills defaults and collects all problems.
///
/// `command` is the subcommand being run; when `None` the scenario must name
/// it in `experiment.command`.
pub fn validate_config(value: &Value, command: Option<Command>) -> Result<Scenario, ConfigError> {
    let mut r = Reader::default();
    let Some(root) = value.as_object() else {
        return Err(ConfigError::Invalid(vec![ConfigIssue {
            key: "<root>".into(),
            message: "scenario must be a JSON object".into(),
        }]));
    };
    r.unknown_keys(
        "",
        root,
        &["contract", "prefs", "firm", "horizon", "grid", "simulation", "experiment"],
    );
    let experiment_section = r.section(root, "experiment");
    let command = resolve_command(&mut r, experiment_section, command);

    let contract = match command {
        Some(c) if c.needs_contract() => read_contract(&mut r, root),
        _ => root.get("contract").and_then(|_| read_contract(&mut r, root)),
    };
    let prefs = read_prefs(&mut r, root);
    let firm = match command {
        Some(c) if c.needs_firm() => read_firm(&mut r, root, prefs.as_ref()),
        _ => root.get("firm").and_then(|_| read_firm(&mut r, root, prefs.as_ref())),
    };
    let horizon = match command {
        Some(c) if c.needs_horizon() => read_horizon(&mut r, root),
        _ => root.get("horizon").and_then(|_| read_horizon(&mut r, root)),
    };
    let grid = read_grid(&mut r, root);
    let simulation = read_simulation(&mut r, root);
    let experiment = command.and_then(|c| read_experiment(&mut r, experiment_section, c, firm.as_ref()));

    if let (Some(Command::AdditiveProfile), Some(p)) = (command, &prefs) {
        if p.additive_b().is_err() {
            r.issue("prefs.family", "additive-profile needs the additive family");
        }
    }
    if let (Some(Command::CdPolicy | Command::CdPath | Command::CdDistribution), Some(p)) = (command, &prefs) {
        if p.cobb_douglas_exponents().is_err() {
            r.issue("prefs.family", format!("{} needs the cobb_douglas family", command.unwrap()));
        }
    }
    if let (Some(Command::CdPath | Command::CdDistribution), Some(c), Some(g)) = (command, &contract, &grid) {
        let on_grid = g
            .dp
            .wages()
            .map(|ws| ws.iter().any(|w| (w - c.w0()).abs() < 1e-9))
            .unwrap_or(true);
        if !on_grid {
            r.issue("contract.w0", format!("{} is not on the wage grid", c.w0()));
        }
    }

    match (r.issues.is_empty(), prefs, grid, simulation, experiment) {
        (true, Some(prefs), Some(grid), Some(simulation), Some(experiment)) => Ok(Scenario {
            contract,
            prefs,
            firm,
            horizon,
            grid,
            simulation,
            experiment,
        }),
        _ => Err(ConfigError::Invalid(r.issues)),
    }
}

fn resolve_command(r: &mut Reader, experiment: Option<&Map<String, Value>>, given: Option<Command>) -> Option<Command> {
    let named = match experiment.and_then(|e| e.get("command")) {
        None => None,
        Some(Value::String(s)) => match Command::from_name(s) {
            Some(c) => Some(c),
            None => {
                r.issue("experiment.command", format!("unknown command {s:?}"));
                return given;
            }
        },
        Some(_) => {
            r.issue("experiment.command", "must be a string");
            return given;
        }
    };
    match (given, named) {
        (Some(g), Some(n)) if g != n => {
            r.issue(
                "experiment.command",
                format!("scenario is for {n} but the subcommand is {g}"),
            );
            Some(g)
        }
        (Some(g), _) => Some(g),
        (None, Some(n)) => Some(n),
        (None, None) => {
            r.issue("experiment.command", "missing required key");
            None
        }
    }
}

fn model_issue(r: &mut Reader, section: &str, err: ModelError) {
    match err {
        ModelError::OutOfRange { name, value, bound } => {
            let key = if name == "T" { "periods" } else { name };
            r.issue(format!("{section}.{key}"), format!("{value} is outside {bound}"));
        }
        other => r.issue(section, other.to_string()),
    }
}

fn read_contract(r: &mut Reader, root: &Map<String, Value>) -> Option<ContractParams> {
    let s = r.section(root, "contract");
    if let Some(m) = s {
        r.unknown_keys("contract", m, &["p", "alpha", "w0"]);
    }
    let p = r.number(s, "contract", "p", None);
    let alpha = r.number(s, "contract", "alpha", None);
    let w0 = r.number(s, "contract", "w0", None);
    let (p, alpha, w0) = (p?, alpha?, w0?);
    let errors = ContractParams::violations(p, alpha, w0);
    let ok = errors.is_empty();
    errors.into_iter().for_each(|e| model_issue(r, "contract", e));
    ok.then(|| ContractParams::new(p, alpha, w0).expect("violations checked"))
}

fn read_prefs(r: &mut Reader, root: &Map<String, Value>) -> Option<WorkerPrefs> {
    let s = r.section(root, "prefs");
    let family = r.string(s, "prefs", "family", None);
    match family.as_deref() {
        Some("additive") => {
            r.unknown_keys("prefs", s?, &["family", "b", "delta"]);
            let b = r.number(s, "prefs", "b", Some(WorkerPrefs::DEFAULT_B));
            let delta = r.number(s, "prefs", "delta", None);
            let (b, delta) = (b?, delta?);
            let errors = WorkerPrefs::additive_violations(b, delta);
            let ok = errors.is_empty();
            errors.into_iter().for_each(|e| model_issue(r, "prefs", e));
            ok.then(|| WorkerPrefs::additive(b, delta).expect("violations checked"))
        }
        Some("cobb_douglas") => {
            r.unknown_keys("prefs", s?, &["family", "gamma", "beta", "delta"]);
            let gamma = r.number(s, "prefs", "gamma", None);
            let beta = r.number(s, "prefs", "beta", None);
            let delta = r.number(s, "prefs", "delta", None);
            let (gamma, beta, delta) = (gamma?, beta?, delta?);
            let errors = WorkerPrefs::cobb_douglas_violations(gamma, beta, delta);
            let ok = errors.is_empty();
            errors.into_iter().for_each(|e| model_issue(r, "prefs", e));
            ok.then(|| WorkerPrefs::cobb_douglas(gamma, beta, delta).expect("violations checked"))
        }
        Some(other) => {
            r.issue("prefs.family", format!("unknown family {other:?}, expected additive or cobb_douglas"));
            None
        }
        None => None,
    }
}

fn read_firm(r: &mut Reader, root: &Map<String, Value>, prefs: Option<&WorkerPrefs>) -> Option<FirmParams> {
    let s = r.section(root, "firm");
    if let Some(m) = s {
        r.unknown_keys("firm", m, &["k", "lambda", "c", "eta"]);
    }
    let k = r.number(s, "firm", "k", None);
    let lambda = r.number(s, "firm", "lambda", None);
    let c = r.number(s, "firm", "c", None);
    let eta = match prefs {
        Some(p) => r.number(s, "firm", "eta", Some(p.delta())),
        // the default comes from prefs.delta, which is already reported
        None => s.and_then(|m| m.get("eta")).and_then(Value::as_f64),
    };
    let (k, lambda, c, eta) = (k?, lambda?, c?, eta?);
    let errors = FirmParams::violations(k, lambda, c, eta);
    let ok = errors.is_empty();
    errors.into_iter().for_each(|e| model_issue(r, "firm", e));
    ok.then(|| FirmParams::new(k, lambda, c, eta).expect("violations checked"))
}

fn read_horizon(r: &mut Reader, root: &Map<String, Value>) -> Option<Horizon> {
    let s = r.section(root, "horizon");
    if let Some(m) = s {
        r.unknown_keys("horizon", m, &["periods"]);
    }
    let periods = r.integer(s, "horizon", "periods", None)?;
    match Horizon::new(periods as usize) {
        Ok(h) => Some(h),
        Err(e) => {
            model_issue(r, "horizon", e);
            None
        }
    }
}

fn read_grid(r: &mut Reader, root: &Map<String, Value>) -> Option<GridConfig> {
    let s = r.section(root, "grid");
    if let Some(m) = s {
        r.unknown_keys("grid", m, &["wage_step", "effort_step", "wage_max", "oracle_points"]);
    }
    let d = DpGrid::default();
    let wage_step = r.number(s, "grid", "wage_step", Some(d.wage_step));
    let effort_step = r.number(s, "grid", "effort_step", Some(d.effort_step));
    let wage_max = r.number(s, "grid", "wage_max", Some(d.wage_max));
    let oracle_points = r.integer(s, "grid", "oracle_points", Some(DEFAULT_ORACLE_POINTS));
    let dp = DpGrid {
        wage_step: wage_step?,
        effort_step: effort_step?,
        wage_max: wage_max?,
    };
    let mut ok = true;
    if let Err(e) = dp.validate() {
        r.issue("grid", e.to_string());
        ok = false;
    }
    let oracle_points = oracle_points?;
    if oracle_points < 3 {
        r.issue("grid.oracle_points", format!("{oracle_points} is below the minimum of 3"));
        ok = false;
    }
    ok.then_some(GridConfig {
        dp,
        oracle_points: oracle_points as usize,
    })
}

fn read_simulation(r: &mut Reader, root: &Map<String, Value>) -> Option<SimulationConfig> {
    let s = r.section(root, "simulation");
    if let Some(m) = s {
        r.unknown_keys("simulation", m, &["seed", "n_paths"]);
    }
    let seed = r.integer(s, "simulation", "seed", Some(DEFAULT_SEED));
    let n_paths = r.integer(s, "simulation", "n_paths", Some(DEFAULT_N_PATHS));
    let (seed, n_paths) = (seed?, n_paths?);
    if n_paths == 0 {
        r.issue("simulation.n_paths", "must be at least 1");
        return None;
    }
    Some(SimulationConfig {
        seed,
        n_paths: n_paths as usize,
    })
}

fn read_timing(r: &mut Reader, s: Option<&Map<String, Value>>) -> Option<PayTiming> {
    match r.string(s, "experiment", "timing", Some("concurrent"))?.as_str() {
        "concurrent" => Some(PayTiming::Concurrent),
        "lagged" => Some(PayTiming::Lagged),
        other => {
            r.issue("experiment.timing", format!("unknown timing {other:?}, expected concurrent or lagged"));
            None
        }
    }
}

fn read_search(r: &mut Reader, s: Option<&Map<String, Value>>) -> Option<SearchGrid> {
    match s.and_then(|m| m.get("search")) {
        None => Some(SearchGrid::default()),
        Some(v) => match serde_json::from_value::<SearchGrid>(v.clone()) {
            Ok(g) => {
                let steps = [
                    ("p_step", g.p_step),
                    ("alpha_step", g.alpha_step),
                    ("w0_step", g.w0_step),
                    ("min_step", g.min_step),
                ];
                let mut ok = true;
                for (name, step) in steps {
                    if !(step > 0.0) {
                        r.issue(format!("experiment.search.{name}"), format!("{step} must be positive"));
                        ok = false;
                    }
                }
                if let Some(max) = g.w0_max.filter(|m| !(*m > 0.0)) {
                    r.issue("experiment.search.w0_max", format!("{max} must be positive"));
                    ok = false;
                }
                ok.then_some(g)
            }
            Err(e) => {
                r.issue("experiment.search", e.to_string());
                None
            }
        },
    }
}

fn read_experiment(
    r: &mut Reader,
    s: Option<&Map<String, Value>>,
    command: Command,
    firm: Option<&FirmParams>,
) -> Option<Experiment> {
    let allowed: &[&str] = match command {
        Command::AdditiveProfile => &["command", "path", "w0_values", "p_values", "oracle"],
        Command::CdPolicy | Command::CdPath => &["command", "timing"],
        Command::CdDistribution => &["command", "timing", "bracket_width", "monte_carlo"],
        Command::EmployerOptimum => &["command", "method", "search"],
        Command::TechSweep => &["command", "k_values", "method", "search"],
        Command::TechShock => &["command", "k_after", "search"],
        Command::Statics => &["command", "p_values", "alpha_values", "w0_values", "relative_step", "wage_scale"],
    };
    if let Some(m) = s {
        r.unknown_keys("experiment", m, allowed);
    }
    match command {
        Command::AdditiveProfile => {
            let path = match s.and_then(|m| m.get("path")) {
                None | Some(Value::Null) => Some(None),
                Some(Value::Object(m)) => {
                    r.unknown_keys("experiment.path", m, &["e0", "growth"]);
                    let e0 = r.number(Some(m), "experiment.path", "e0", None);
                    let growth = r.number(Some(m), "experiment.path", "growth", None);
                    if let Some(e0) = e0.filter(|e| !(0.0..=1.0).contains(e)) {
                        r.issue("experiment.path.e0", format!("{e0} is outside [0, 1]"));
                    }
                    if let Some(g) = growth.filter(|g| !(*g > -1.0)) {
                        r.issue("experiment.path.growth", format!("{g} is outside (-1, inf)"));
                    }
                    Some(Some(EffortPath { e0: e0?, growth: growth? }))
                }
                Some(_) => {
                    r.issue("experiment.path", "must be an object or null");
                    None
                }
            };
            let w0_values = r.numbers(s, "experiment", "w0_values", Some(&[]));
            let p_values = r.numbers(s, "experiment", "p_values", Some(&[]));
            let oracle = r.boolean(s, "experiment", "oracle", Some(true));
            if let Some(ps) = &p_values {
                r.check_all(ps, "experiment.p_values", "[0, 1]", |p| (0.0..=1.0).contains(&p));
            }
            if let Some(ws) = &w0_values {
                r.check_all(ws, "experiment.w0_values", "(0, inf)", |w| w > 0.0);
            }
            Some(Experiment::AdditiveProfile {
                path: path?,
                w0_values: w0_values?,
                p_values: p_values?,
                oracle: oracle?,
            })
        }
        Command::CdPolicy => Some(Experiment::CdPolicy {
            timing: read_timing(r, s)?,
        }),
        Command::CdPath => Some(Experiment::CdPath {
            timing: read_timing(r, s)?,
        }),
        Command::CdDistribution => {
            let timing = read_timing(r, s);
            let width = r.number(s, "experiment", "bracket_width", Some(DEFAULT_BRACKET_WIDTH));
            let monte_carlo = r.boolean(s, "experiment", "monte_carlo", Some(true));
            if let Some(w) = width.filter(|w| !(*w > 0.0)) {
                r.issue("experiment.bracket_width", format!("{w} must be positive"));
                return None;
            }
            Some(Experiment::CdDistribution {
                timing: timing?,
                bracket_width: width?,
                monte_carlo: monte_carlo?,
            })
        }
        Command::EmployerOptimum => {
            let method = match r.string(s, "experiment", "method", Some("both")).as_deref() {
                Some("analytic") => Some(EmployerMethod::Analytic),
                Some("grid_search") => Some(EmployerMethod::GridSearch),
                Some("both") => Some(EmployerMethod::Both),
                Some(other) => {
                    r.issue(
                        "experiment.method",
                        format!("unknown method {other:?}, expected analytic, grid_search or both"),
                    );
                    None
                }
                None => None,
            };
            let search = read_search(r, s);
            Some(Experiment::EmployerOptimum {
                method: method?,
                search: search?,
            })
        }
        Command::TechSweep => {
            let k_values = r.numbers(s, "experiment", "k_values", None);
            if let Some(ks) = &k_values {
                if ks.is_empty() {
                    r.issue("experiment.k_values", "must not be empty");
                }
                r.check_all(ks, "experiment.k_values", "(0, inf)", |k| k > 0.0);
            }
            let method = match r.string(s, "experiment", "method", Some("analytic")).as_deref() {
                Some("analytic") => Some(SolveMethod::Analytic),
                Some("grid_search") => Some(SolveMethod::GridSearch),
                Some(other) => {
                    r.issue(
                        "experiment.method",
                        format!("unknown method {other:?}, expected analytic or grid_search"),
                    );
                    None
                }
                None => None,
            };
            let search = read_search(r, s);
            Some(Experiment::TechSweep {
                k_values: k_values.filter(|ks| !ks.is_empty())?,
                method: method?,
                search: search?,
            })
        }
        Command::TechShock => {
            let k_after = r.number(s, "experiment", "k_after", None);
            if let (Some(after), Some(f)) = (k_after, firm) {
                if !(after > f.k()) {
                    r.issue("experiment.k_after", format!("{after} must exceed firm.k = {}", f.k()));
                    return None;
                }
            }
            let search = read_search(r, s);
            Some(Experiment::TechShock {
                k_after: k_after?,
                search: search?,
            })
        }
        Command::Statics => {
            let p_values = r.numbers(s, "experiment", "p_values", None);
            let alpha_values = r.numbers(s, "experiment", "alpha_values", None);
            let w0_values = r.numbers(s, "experiment", "w0_values", None);
            let relative_step = r.number(s, "experiment", "relative_step", Some(DEFAULT_RELATIVE_STEP));
            let wage_scale = r.number(s, "experiment", "wage_scale", Some(1.0));
            for (key, values) in [
                ("experiment.p_values", &p_values),
                ("experiment.alpha_values", &alpha_values),
                ("experiment.w0_values", &w0_values),
            ] {
                if values.as_ref().is_some_and(Vec::is_empty) {
                    r.issue(key, "must not be empty");
                }
            }
            if let Some(v) = &p_values {
                r.check_all(v, "experiment.p_values", "[0, 1]", |p| (0.0..=1.0).contains(&p));
            }
            if let Some(v) = &alpha_values {
                r.check_all(v, "experiment.alpha_values", "[0, 1]", |a| (0.0..=1.0).contains(&a));
            }
            if let Some(v) = &w0_values {
                r.check_all(v, "experiment.w0_values", "[0, inf)", |w| w >= 0.0);
            }
            for (key, v) in [("experiment.relative_step", relative_step), ("experiment.wage_scale", wage_scale)] {
                if let Some(x) = v.filter(|x| !(*x > 0.0)) {
                    r.issue(key, format!("{x} must be positive"));
                    return None;
                }
            }
            Some(Experiment::Statics {
                p_values: p_values.filter(|v| !v.is_empty())?,
                alpha_values: alpha_values.filter(|v| !v.is_empty())?,
                w0_values: w0_values.filter(|v| !v.is_empty())?,
                relative_step: relative_step?,
                wage_scale: wage_scale?,
            })
        }
    }
}

/// Typed access to JSON sections that records every problem it meets.
#[derive(Default)]
struct Reader {
    issues: Vec<ConfigIssue>,
}

type Section<'a> = Option<&'a Map<String, Value>>;

impl Reader {
    fn issue(&mut self, key: impl Into<String>, message: impl Into<String>) {
        self.issues.push(ConfigIssue {
            key: key.into(),
            message: message.into(),
        });
    }

    fn section<'a>(&mut self, root: &'a Map<String, Value>, name: &str) -> Section<'a> {
        match root.get(name) {
            None => None,
            Some(Value::Object(m)) => Some(m),
            Some(_) => {
                self.issue(name, "must be an object");
                None
            }
        }
    }

    fn unknown_keys(&mut self, section: &str, map: &Map<String, Value>, allowed: &[&str]) {
        for key in map.keys().filter(|k| !allowed.contains(&k.as_str())) {
            let full = if section.is_empty() {
                key.clone()
            } else {
                format!("{section}.{key}")
            };
            self.issue(full, "unknown key");
        }
    }

    fn get<'a>(&mut self, s: Section<'a>, section: &str, key: &str, has_default: bool) -> Option<&'a Value> {
        match s.and_then(|m| m.get(key)) {
            Some(v) => Some(v),
            None => {
                if !has_default {
                    self.issue(format!("{section}.{key}"), "missing required key");
                }
                None
            }
        }
    }

    fn number(&mut self, s: Section, section: &str, key: &str, default: Option<f64>) -> Option<f64> {
        match self.get(s, section, key, default.is_some()) {
            None => default,
            Some(v) => match v.as_f64() {
                Some(x) if x.is_finite() => Some(x),
                _ => {
                    self.issue(format!("{section}.{key}"), format!("expected a number, got {v}"));
                    None
                }
            },
        }
    }

    fn integer(&mut self, s: Section, section: &str, key: &str, default: Option<u64>) -> Option<u64> {
        match self.get(s, section, key, default.is_some()) {
            None => default,
            Some(v) => match v.as_u64() {
                Some(x) => Some(x),
                None => {
                    self.issue(
                        format!("{section}.{key}"),
                        format!("expected a nonnegative integer, got {v}"),
                    );
                    None
                }
            },
        }
    }

    fn boolean(&mut self, s: Section, section: &str, key: &str, default: Option<bool>) -> Option<bool> {
        match self.get(s, section, key, default.is_some()) {
            None => default,
            Some(Value::Bool(b)) => Some(*b),
            Some(v) => {
                self.issue(format!("{section}.{key}"), format!("expected true or false, got {v}"));
                None
            }
        }
    }

    fn string(&mut self, s: Section, section: &str, key: &str, default: Option<&str>) -> Option<String> {
        match self.get(s, section, key, default.is_some()) {
            None => default.map(str::to_string),
            Some(Value::String(x)) => Some(x.clone()),
            Some(v) => {
                self.issue(format!("{section}.{key}"), format!("expected a string, got {v}"));
                None
            }
        }
    }

    fn numbers(&mut self, s: Section, section: &str, key: &str, default: Option<&[f64]>) -> Option<Vec<f64>> {
        match self.get(s, section, key, default.is_some()) {
            None => default.map(<[f64]>::to_vec),
            Some(Value::Array(items)) => {
                let values: Option<Vec<f64>> = items.iter().map(|v| v.as_f64().filter(|x| x.is_finite())).collect();
                if values.is_none() {
                    self.issue(format!("{section}.{key}"), "expected an array of numbers");
                }
                values
            }
            Some(v) => {
                self.issue(format!("{section}.{key}"), format!("expected an array, got {v}"));
                None
            }
        }
    }

    fn check_all(&mut self, values: &[f64], key: &str, bound: &str, ok: impl Fn(f64) -> bool) {
        for (i, &v) in values.iter().enumerate() {
            if !ok(v) {
                self.issue(format!("{key}[{i}]"), format!("{v} is outside {bound}"));
            }
        }
    }
}
