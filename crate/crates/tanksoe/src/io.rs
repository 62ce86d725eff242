//! Configuration parsing, experiment orchestration, CSV artifacts, and run
//! manifests for the command-line interface.
//!
//! The config format is deliberately flat — `key = value`, one per line,
//! `#` starts a comment — so calibration variants diff cleanly. Keys are
//! either model parameters (exactly the [`ModelParameters`] field names) or
//! experiment settings ([`SETTING_KEYS`]); anything else is a hard error
//! that names the offending key. Later lines win when a key repeats.
//!
//! Every successful run writes a `manifest.txt` into the output directory
//! in that same format: the full resolved parameter set, the experiment
//! settings, and (as comments) versions, timings, and the artifact list.
//! Feeding the manifest back in as `--config` therefore reproduces the
//! run's CSVs byte for byte.
//!
//! Exit-code contract (see [`IoError::exit_code`]): 0 success, 2 config
//! error, 3 steady-state failure, 4 determinacy (Blanchard-Kahn) failure,
//! 1 anything else.

use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use thiserror::Error;

use crate::diff::{
    hessians_with, jacobians_with, stacked_coord_name, DerivativeBundle, DiffError, DiffOptions,
};
use crate::linalg::Mat;
use crate::params::{ModelParameters, ParamError};
use crate::perturbation::{
    shock_covariance, solve_first_order, solve_second_order, PerturbationError,
    PerturbationSolution,
};
use crate::simulation::{
    compare_irf, impulse_response, simulate_moments, SimulationError, DEFAULT_HORIZON,
};
use crate::steady_state::{solve_steady_state, steady_state_report, SsError, SteadyState};
use crate::vectors::{ModelVectors, EQUATIONS, N_ENDO, SHOCKS};
use crate::welfare::{
    default_phi_grid, default_tau_grid, grid_search, homotheticity_comparison,
    optimal_policy_search, HomotheticityComparison, HouseholdOptimum, PolicyPoint, WelfareError,
};

pub const DEFAULT_SEED: u64 = 12345;
pub const DEFAULT_ORDER: usize = 1;
pub const DEFAULT_SIZE_SIGMA: f64 = 1.0;
pub const DEFAULT_SIM_T_PERIODS: usize = 100_000;
pub const DEFAULT_SIM_BURN_IN: usize = 2_000;
pub const DEFAULT_OUT_DIR: &str = "tanksoe_out";
pub const MANIFEST_NAME: &str = "manifest.txt";

/// Experiment-setting keys accepted in a config file, next to the model
/// parameter keys ([`ModelParameters::KEYS`]).
pub const SETTING_KEYS: &[&str] = &[
    "command",
    "seed",
    "order",
    "shock",
    "size_sigma",
    "horizon",
    "grid_tau",
    "grid_phis",
    "sim_t_periods",
    "sim_burn_in",
    "allow_flagged_derivatives",
    "dump_derivatives",
    "dump_solution",
];

#[derive(Debug, Error)]
pub enum IoError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("steady-state failure: {0}")]
    SteadyState(#[from] SsError),
    #[error("determinacy failure: {0}")]
    BlanchardKahn(String),
    #[error("{0}")]
    Other(String),
}

impl IoError {
    /// The documented process exit code for this failure class.
    pub fn exit_code(&self) -> u8 {
        match self {
            IoError::Config(_) => 2,
            IoError::SteadyState(_) => 3,
            IoError::BlanchardKahn(_) => 4,
            IoError::Io(_) | IoError::Other(_) => 1,
        }
    }
}

impl From<ParamError> for IoError {
    fn from(e: ParamError) -> Self {
        IoError::Config(e.to_string())
    }
}

impl From<PerturbationError> for IoError {
    fn from(e: PerturbationError) -> Self {
        match &e {
            PerturbationError::BKViolationTooFew { .. }
            | PerturbationError::BKViolationTooMany { .. }
            | PerturbationError::RankCondition(_)
            | PerturbationError::EffectiveUnitRoot { .. } => {
                IoError::BlanchardKahn(e.to_string())
            }
            _ => IoError::Other(e.to_string()),
        }
    }
}

impl From<DiffError> for IoError {
    fn from(e: DiffError) -> Self {
        IoError::Other(e.to_string())
    }
}

impl From<SimulationError> for IoError {
    fn from(e: SimulationError) -> Self {
        match e {
            SimulationError::SteadyState(inner) => inner.into(),
            SimulationError::Perturbation(inner) => inner.into(),
            SimulationError::Differentiation(inner) => inner.into(),
            SimulationError::UnknownShock { .. } | SimulationError::UnsupportedOrder { .. } => {
                IoError::Config(e.to_string())
            }
            other => IoError::Other(other.to_string()),
        }
    }
}

impl From<WelfareError> for IoError {
    fn from(e: WelfareError) -> Self {
        match e {
            WelfareError::SteadyState(inner) => inner.into(),
            WelfareError::Perturbation(inner) => inner.into(),
            WelfareError::Differentiation(inner) => inner.into(),
            WelfareError::PolicyOutOfBounds { .. } | WelfareError::EmptyGrid => {
                IoError::Config(e.to_string())
            }
            other => IoError::Other(other.to_string()),
        }
    }
}

/// The six experiments the binary can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    SteadyState,
    Irf,
    CompareIrf,
    Moments,
    WelfareGrid,
    HomotheticCompare,
}

impl Command {
    pub const NAMES: &'static [&'static str] = &[
        "steady-state",
        "irf",
        "compare-irf",
        "moments",
        "welfare-grid",
        "homothetic-compare",
    ];

    pub fn parse(s: &str) -> Result<Self, IoError> {
        match s {
            "steady-state" => Ok(Command::SteadyState),
            "irf" => Ok(Command::Irf),
            "compare-irf" => Ok(Command::CompareIrf),
            "moments" => Ok(Command::Moments),
            "welfare-grid" => Ok(Command::WelfareGrid),
            "homothetic-compare" => Ok(Command::HomotheticCompare),
            _ => Err(IoError::Config(format!(
                "unknown command `{s}` (expected one of: {})",
                Self::NAMES.join(", ")
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        Self::NAMES[self as usize]
    }

    fn needs_shock(self) -> bool {
        matches!(self, Command::Irf | Command::CompareIrf)
    }
}

/// Raw invocation pieces as collected by the binary's argument parser.
/// Everything is optional; [`assemble`] merges them with the config file
/// and the defaults (flags beat config, config beats defaults).
#[derive(Debug, Clone, Default)]
pub struct Invocation {
    pub command: Option<String>,
    pub config: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub order: Option<usize>,
    pub shock: Option<String>,
    pub size: Option<f64>,
    pub horizon: Option<usize>,
    pub grid_tau: Option<String>,
    pub grid_phis: Option<String>,
}

/// A fully resolved, validated experiment: what [`run`] executes.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub command: Command,
    /// Benchmark calibration with all config overrides applied.
    pub params: ModelParameters,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub order: usize,
    pub shock: Option<String>,
    pub size_sigma: f64,
    pub horizon: usize,
    /// Explicit grids; `None` means "use the default grids plus the
    /// refinement pass" for `welfare-grid`.
    pub grid_tau: Option<Vec<f64>>,
    pub grid_phis: Option<Vec<f64>>,
    pub sim_t_periods: usize,
    pub sim_burn_in: usize,
    /// Downgrade finite-difference cross-check failures to warnings.
    pub allow_flagged_derivatives: bool,
    pub dump_derivatives: bool,
    pub dump_solution: bool,
}

/// Values read from a config file, before merging with CLI flags.
#[derive(Debug, Default, PartialEq)]
pub struct ConfigValues {
    pub command: Option<String>,
    pub seed: Option<u64>,
    pub order: Option<usize>,
    pub shock: Option<String>,
    pub size_sigma: Option<f64>,
    pub horizon: Option<usize>,
    pub grid_tau: Option<Vec<f64>>,
    pub grid_phis: Option<Vec<f64>>,
    pub sim_t_periods: Option<usize>,
    pub sim_burn_in: Option<usize>,
    pub allow_flagged_derivatives: Option<bool>,
    pub dump_derivatives: Option<bool>,
    pub dump_solution: Option<bool>,
    /// Model-parameter overrides in file order.
    pub overrides: Vec<(String, f64)>,
}

fn parse_number<T: std::str::FromStr>(key: &str, raw: &str, line: usize) -> Result<T, IoError> {
    raw.parse().map_err(|_| {
        IoError::Config(format!(
            "line {line}: cannot parse value `{raw}` for key `{key}`"
        ))
    })
}

fn parse_bool(key: &str, raw: &str, line: usize) -> Result<bool, IoError> {
    match raw {
        "1" | "true" => Ok(true),
        "0" | "false" => Ok(false),
        _ => Err(IoError::Config(format!(
            "line {line}: key `{key}` expects 0/1 or true/false, got `{raw}`"
        ))),
    }
}

/// Parses a comma-separated float list, e.g. `-1, -0.5, 0, 0.5, 1`.
fn parse_list(key: &str, raw: &str, line: usize) -> Result<Vec<f64>, IoError> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>().map_err(|_| {
                IoError::Config(format!(
                    "line {line}: cannot parse `{s}` in list for key `{key}`"
                ))
            })
        })
        .collect()
}

/// Parses flat `key = value` config text. Unknown keys are a hard error.
pub fn parse_config(text: &str) -> Result<ConfigValues, IoError> {
    let mut out = ConfigValues::default();
    for (idx, raw_line) in text.lines().enumerate() {
        let n = idx + 1;
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            IoError::Config(format!("line {n}: expected `key = value`, got `{line}`"))
        })?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "command" => out.command = Some(value.to_string()),
            "seed" => out.seed = Some(parse_number(key, value, n)?),
            "order" => out.order = Some(parse_number(key, value, n)?),
            "shock" => out.shock = Some(value.to_string()),
            "size_sigma" => out.size_sigma = Some(parse_number(key, value, n)?),
            "horizon" => out.horizon = Some(parse_number(key, value, n)?),
            "grid_tau" => out.grid_tau = Some(parse_list(key, value, n)?),
            "grid_phis" => out.grid_phis = Some(parse_list(key, value, n)?),
            "sim_t_periods" => out.sim_t_periods = Some(parse_number(key, value, n)?),
            "sim_burn_in" => out.sim_burn_in = Some(parse_number(key, value, n)?),
            "allow_flagged_derivatives" => {
                out.allow_flagged_derivatives = Some(parse_bool(key, value, n)?)
            }
            "dump_derivatives" => out.dump_derivatives = Some(parse_bool(key, value, n)?),
            "dump_solution" => out.dump_solution = Some(parse_bool(key, value, n)?),
            k if ModelParameters::KEYS.contains(&k) => {
                let v: f64 = parse_number(k, value, n)?;
                out.overrides.push((k.to_string(), v));
            }
            other => {
                return Err(IoError::Config(format!(
                    "line {n}: unknown config key `{other}`"
                )))
            }
        }
    }
    Ok(out)
}

/// Merges CLI pieces, the config file (if any), and the defaults into a
/// validated [`ExperimentConfig`].
pub fn assemble(inv: &Invocation) -> Result<ExperimentConfig, IoError> {
    let file = match &inv.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| {
                IoError::Config(format!("cannot read config file {}: {e}", path.display()))
            })?;
            parse_config(&text)?
        }
        None => ConfigValues::default(),
    };

    let command_name = inv
        .command
        .clone()
        .or_else(|| file.command.clone())
        .ok_or_else(|| {
            IoError::Config(format!(
                "no command given (pass one of {} or set `command` in the config)",
                Command::NAMES.join(", ")
            ))
        })?;
    let command = Command::parse(&command_name)?;

    let mut params = ModelParameters::benchmark();
    for (key, value) in &file.overrides {
        params.set(key, *value)?;
    }
    params.validate()?;

    let order = inv.order.or(file.order).unwrap_or(DEFAULT_ORDER);
    if !(order == 1 || order == 2) {
        return Err(IoError::Config(format!(
            "order must be 1 or 2, got {order}"
        )));
    }

    let shock = inv.shock.clone().or_else(|| file.shock.clone());
    if let Some(name) = &shock {
        if !SHOCKS.contains(&name.as_str()) {
            return Err(IoError::Config(format!(
                "unknown shock `{name}` (declared shocks: {})",
                SHOCKS.join(", ")
            )));
        }
    } else if command.needs_shock() {
        return Err(IoError::Config(format!(
            "command {} requires --shock (one of: {})",
            command.name(),
            SHOCKS.join(", ")
        )));
    }

    let parse_flag_list = |key: &str, raw: &Option<String>| -> Result<Option<Vec<f64>>, IoError> {
        match raw {
            Some(s) => Ok(Some(parse_list(key, s, 0)?)),
            None => Ok(None),
        }
    };
    let grid_tau = parse_flag_list("grid_tau", &inv.grid_tau)?.or(file.grid_tau);
    let grid_phis = parse_flag_list("grid_phis", &inv.grid_phis)?.or(file.grid_phis);
    if command == Command::WelfareGrid {
        // bounds-check the requested grid up front so a bad grid is a
        // config error, not a mid-run failure
        let taus = grid_tau.clone().unwrap_or_else(default_tau_grid);
        let phis = grid_phis.clone().unwrap_or_else(default_phi_grid);
        for &t in &taus {
            for &p in &phis {
                PolicyPoint::new(t, p)?;
            }
        }
    }

    let horizon = inv.horizon.or(file.horizon).unwrap_or(DEFAULT_HORIZON);
    if horizon == 0 {
        return Err(IoError::Config("horizon must be at least 1".into()));
    }
    let sim_t_periods = file.sim_t_periods.unwrap_or(DEFAULT_SIM_T_PERIODS);
    let sim_burn_in = file.sim_burn_in.unwrap_or(DEFAULT_SIM_BURN_IN);
    if command == Command::Moments && sim_t_periods <= sim_burn_in {
        return Err(IoError::Config(format!(
            "sim_t_periods ({sim_t_periods}) must exceed sim_burn_in ({sim_burn_in})"
        )));
    }

    Ok(ExperimentConfig {
        command,
        params,
        out_dir: inv
            .out
            .clone()
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR)),
        seed: inv.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
        order,
        shock,
        size_sigma: inv.size.or(file.size_sigma).unwrap_or(DEFAULT_SIZE_SIGMA),
        horizon,
        grid_tau,
        grid_phis,
        sim_t_periods,
        sim_burn_in,
        allow_flagged_derivatives: file.allow_flagged_derivatives.unwrap_or(false),
        dump_derivatives: file.dump_derivatives.unwrap_or(false),
        dump_solution: file.dump_solution.unwrap_or(false),
    })
}

/// 12-significant-digit fixed scientific format, the artifact-wide number
/// format backing the bit-exact reproducibility contract.
pub fn sig12(x: f64) -> String {
    format!("{x:.11e}")
}

/// What [`run`] produced: artifact paths (manifest last) and total wall time.
#[derive(Debug)]
pub struct RunReport {
    pub artifacts: Vec<PathBuf>,
    pub elapsed_ms: u128,
}

struct Stopwatch {
    t0: Instant,
    laps: Vec<(&'static str, u128)>,
}

impl Stopwatch {
    fn new() -> Self {
        Stopwatch {
            t0: Instant::now(),
            laps: Vec::new(),
        }
    }

    fn lap<T, E, F: FnOnce() -> Result<T, E>>(
        &mut self,
        stage: &'static str,
        f: F,
    ) -> Result<T, E> {
        let start = Instant::now();
        let out = f()?;
        self.laps.push((stage, start.elapsed().as_millis()));
        Ok(out)
    }
}

/// Executes one experiment: solves the pipeline the command needs, then
/// writes every artifact plus the run manifest into `out_dir` (the only
/// directory a run ever writes to).
pub fn run(cfg: &ExperimentConfig) -> Result<RunReport, IoError> {
    cfg.params.validate()?;
    let mut watch = Stopwatch::new();
    // (file name, contents) pairs; buffered so all writes happen together
    let mut artifacts: Vec<(String, String)> = Vec::new();

    let ss = watch.lap("steady_state", || solve_steady_state(&cfg.params))?;

    match cfg.command {
        Command::SteadyState => {
            artifacts.push(("steady_state.csv".into(), steady_state_csv(&ss)));
        }
        Command::Irf => {
            let shock = cfg.shock.as_deref().expect("validated at assembly");
            let (sol, bundle) = solve_at_order(&ss, cfg, &mut watch)?;
            let irf = watch.lap("impulse_response", || {
                impulse_response(&sol, &ss, shock, cfg.size_sigma, cfg.horizon)
            })?;
            artifacts.push((format!("irf_{shock}.csv"), irf.to_csv()));
            push_dumps(cfg, &bundle, Some(&sol), &mut artifacts);
        }
        Command::CompareIrf => {
            let shock = cfg.shock.as_deref().expect("validated at assembly");
            let mut homothetic = cfg.params.clone();
            homothetic.phi_Co = 0.0;
            let cmp = watch.lap("compare_irf", || {
                compare_irf(
                    &cfg.params,
                    &homothetic,
                    shock,
                    cfg.size_sigma,
                    cfg.horizon,
                    cfg.order,
                )
            })?;
            artifacts.push((format!("irf_{shock}.csv"), cmp.a.to_csv()));
            artifacts.push((format!("irf_{shock}_homothetic.csv"), cmp.b.to_csv()));
            artifacts.push((
                format!("amplification_{shock}.csv"),
                amplification_csv(&cmp.a.names, &cmp.amplification),
            ));
        }
        Command::Moments => {
            let (sol, bundle) = solve_at_order(&ss, cfg, &mut watch)?;
            let cov = shock_covariance(&ss.params);
            let table = watch.lap("simulate_moments", || {
                simulate_moments(&sol, cfg.sim_t_periods, cfg.sim_burn_in, cfg.seed, &cov)
            })?;
            artifacts.push(("moments.csv".into(), table.to_csv()));
            push_dumps(cfg, &bundle, Some(&sol), &mut artifacts);
        }
        Command::WelfareGrid => {
            match (&cfg.grid_tau, &cfg.grid_phis) {
                (None, None) => {
                    let (coarse, refined) =
                        watch.lap("welfare_grid", || optimal_policy_search(&cfg.params))?;
                    artifacts.push(("welfare_grid.csv".into(), coarse.to_csv()));
                    artifacts.push(("welfare_refined.csv".into(), refined.to_csv()));
                }
                (tau, phi) => {
                    let taus = tau.clone().unwrap_or_else(default_tau_grid);
                    let phis = phi.clone().unwrap_or_else(default_phi_grid);
                    let res =
                        watch.lap("welfare_grid", || grid_search(&cfg.params, &taus, &phis))?;
                    artifacts.push(("welfare_grid.csv".into(), res.to_csv()));
                }
            }
        }
        Command::HomotheticCompare => {
            let cmp = watch.lap("homothetic_compare", || {
                homotheticity_comparison(&cfg.params)
            })?;
            artifacts.push(("homothetic_compare.csv".into(), comparison_csv(&cmp)));
            artifacts.push((
                "welfare_nonhomothetic.csv".into(),
                cmp.non_homothetic.to_csv(),
            ));
            artifacts.push(("welfare_homothetic.csv".into(), cmp.homothetic.to_csv()));
        }
    }

    fs::create_dir_all(&cfg.out_dir)?;
    let mut paths = Vec::with_capacity(artifacts.len() + 1);
    for (name, contents) in &artifacts {
        let path = cfg.out_dir.join(name);
        fs::write(&path, contents)?;
        paths.push(path);
    }
    let elapsed_ms = watch.t0.elapsed().as_millis();
    let manifest = manifest_text(cfg, &ss.params, &watch.laps, elapsed_ms, &artifacts);
    let manifest_path = cfg.out_dir.join(MANIFEST_NAME);
    fs::write(&manifest_path, manifest)?;
    paths.push(manifest_path);

    Ok(RunReport {
        artifacts: paths,
        elapsed_ms,
    })
}

/// Derivatives plus the perturbation solution at the configured order.
fn solve_at_order(
    ss: &SteadyState,
    cfg: &ExperimentConfig,
    watch: &mut Stopwatch,
) -> Result<(PerturbationSolution, DerivativeBundle), IoError> {
    let opts = DiffOptions {
        allow_flagged: cfg.allow_flagged_derivatives,
    };
    let vectors = ModelVectors::new();
    let bundle = watch.lap("derivatives", || {
        if cfg.order == 1 {
            jacobians_with(&ss.params, ss, &opts)
        } else {
            hessians_with(&ss.params, ss, &opts)
        }
    })?;
    if !bundle.flags.is_empty() {
        eprintln!(
            "tanksoe: warning: {} finite-difference entr{} failed the \
             cross-check but were kept (allow_flagged_derivatives = 1)",
            bundle.flags.len(),
            if bundle.flags.len() == 1 { "y" } else { "ies" }
        );
    }
    let first = watch.lap("first_order", || {
        solve_first_order(&bundle, &vectors, &ss.params)
    })?;
    let sol = if cfg.order == 1 {
        PerturbationSolution::First(first)
    } else {
        let cov = shock_covariance(&ss.params);
        let second = watch.lap("second_order", || solve_second_order(&bundle, &first, &cov))?;
        PerturbationSolution::Second(second)
    };
    Ok((sol, bundle))
}

/// Appends the optional derivative / solution-matrix dumps.
fn push_dumps(
    cfg: &ExperimentConfig,
    bundle: &DerivativeBundle,
    sol: Option<&PerturbationSolution>,
    artifacts: &mut Vec<(String, String)>,
) {
    if cfg.dump_derivatives {
        artifacts.push(("jacobian.csv".into(), jacobian_csv(bundle)));
        if bundle.hessian.is_some() {
            artifacts.push(("hessian.csv".into(), hessian_csv(bundle)));
        }
    }
    if cfg.dump_solution {
        if let Some(sol) = sol {
            let vectors = ModelVectors::new();
            let first = sol.first();
            artifacts.push((
                "solution_t.csv".into(),
                matrix_csv(&first.t, &vectors.endogenous_names, &vectors.endogenous_names),
            ));
            artifacts.push((
                "solution_r.csv".into(),
                matrix_csv(&first.r, &vectors.endogenous_names, &vectors.shock_names),
            ));
            if let PerturbationSolution::Second(so) = sol {
                let mut csv = String::from("variable,g_ss\n");
                for v in 0..N_ENDO {
                    csv.push_str(&format!(
                        "{},{}\n",
                        vectors.endogenous_names[v],
                        sig12(so.g_ss[v])
                    ));
                }
                artifacts.push(("solution_gss.csv".into(), csv));
            }
        }
    }
}

/// `variable,value` table: all endogenous steady-state levels followed by
/// the calibration-facing ratio/share report.
fn steady_state_csv(ss: &SteadyState) -> String {
    let vectors = ModelVectors::new();
    let mut out = String::from("variable,value\n");
    for v in 0..N_ENDO {
        out.push_str(&format!(
            "{},{}\n",
            vectors.endogenous_names[v],
            sig12(ss.values[v])
        ));
    }
    for (name, value) in steady_state_report(ss) {
        out.push_str(&format!("{name},{}\n", sig12(value)));
    }
    out
}

fn amplification_csv(names: &[&'static str], ratios: &[f64]) -> String {
    let mut out = String::from("variable,peak_abs_ratio\n");
    for (name, r) in names.iter().zip(ratios) {
        out.push_str(&format!("{name},{}\n", sig12(*r)));
    }
    out
}

/// Sparse `equation,coordinate,value` listing of the four Jacobian blocks.
fn jacobian_csv(bundle: &DerivativeBundle) -> String {
    let mut out = String::from("equation,coordinate,value\n");
    let blocks = [&bundle.j_prev, &bundle.j_curr, &bundle.j_next, &bundle.j_eps];
    for eq in 0..N_ENDO {
        for (b, block) in blocks.iter().enumerate() {
            for c in 0..block.ncols {
                let v = block[(eq, c)];
                if v != 0.0 {
                    out.push_str(&format!(
                        "{},{},{}\n",
                        EQUATIONS[eq],
                        stacked_coord_name(b * N_ENDO + c),
                        sig12(v)
                    ));
                }
            }
        }
    }
    out
}

/// Sparse upper-triangle `equation,coord_a,coord_b,value` Hessian listing.
fn hessian_csv(bundle: &DerivativeBundle) -> String {
    let mut out = String::from("equation,coord_a,coord_b,value\n");
    if let Some(h) = &bundle.hessian {
        for (eq, entries) in h.entries.iter().enumerate() {
            for &(a, b, v) in entries {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    EQUATIONS[eq],
                    stacked_coord_name(a),
                    stacked_coord_name(b),
                    sig12(v)
                ));
            }
        }
    }
    out
}

/// Dense matrix with row and column name headers.
fn matrix_csv(m: &Mat, row_names: &[&'static str], col_names: &[&'static str]) -> String {
    let mut out = String::from("variable");
    for c in col_names {
        out.push(',');
        out.push_str(c);
    }
    out.push('\n');
    for r in 0..m.nrows {
        out.push_str(row_names[r]);
        for c in 0..m.ncols {
            out.push(',');
            out.push_str(&sig12(m[(r, c)]));
        }
        out.push('\n');
    }
    out
}

fn optimum_csv_row(household: &str, regime: &str, opt: &HouseholdOptimum) -> String {
    format!(
        "{household},{regime},{},{},{},{},{},{},{},{}\n",
        opt.point.tau_c(),
        opt.point.phi_s(),
        sig12(opt.std_ratio_c),
        sig12(opt.std_ratio_l),
        sig12(opt.mean_change_c_pct),
        sig12(opt.mean_change_l_pct),
        sig12(opt.welfare_gain),
        sig12(opt.consumption_equivalent_pct),
    )
}

/// The optimal-policy comparison table: one row per household × preference
/// regime, then the per-household welfare-gain ratios.
fn comparison_csv(cmp: &HomotheticityComparison) -> String {
    let mut out = String::from(
        "household,preferences,tau_C,phi_s,std_ratio_c,std_ratio_l,\
         mean_change_c_pct,mean_change_l_pct,welfare_gain,consumption_equivalent_pct\n",
    );
    for (regime, grid) in [
        ("non_homothetic", &cmp.non_homothetic),
        ("homothetic", &cmp.homothetic),
    ] {
        out.push_str(&optimum_csv_row("ricardian", regime, &grid.ricardian));
        out.push_str(&optimum_csv_row("hand_to_mouth", regime, &grid.hand_to_mouth));
    }
    out.push_str("household,gain_ratio_nonhomothetic_over_homothetic\n");
    out.push_str(&format!("ricardian,{}\n", sig12(cmp.gain_ratio_r)));
    out.push_str(&format!("hand_to_mouth,{}\n", sig12(cmp.gain_ratio_h)));
    out
}

fn format_list(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// The manifest: resolved settings and parameters as re-runnable config
/// lines, with versions, timings, and the artifact list as comments.
fn manifest_text(
    cfg: &ExperimentConfig,
    resolved: &ModelParameters,
    laps: &[(&'static str, u128)],
    elapsed_ms: u128,
    artifacts: &[(String, String)],
) -> String {
    let mut out = String::new();
    out.push_str("# run manifest — reproduce with: tanksoe --config manifest.txt --out <dir>\n");
    out.push_str(&format!(
        "# tanksoe_version = {}\n",
        env!("CARGO_PKG_VERSION")
    ));
    out.push_str(&format!("# elapsed_ms_total = {elapsed_ms}\n"));
    for (stage, ms) in laps {
        out.push_str(&format!("# elapsed_ms_{stage} = {ms}\n"));
    }
    for (name, _) in artifacts {
        out.push_str(&format!("# artifact = {name}\n"));
    }
    out.push('\n');
    out.push_str(&format!("command = {}\n", cfg.command.name()));
    out.push_str(&format!("seed = {}\n", cfg.seed));
    out.push_str(&format!("order = {}\n", cfg.order));
    if let Some(shock) = &cfg.shock {
        out.push_str(&format!("shock = {shock}\n"));
        out.push_str(&format!("size_sigma = {}\n", cfg.size_sigma));
        out.push_str(&format!("horizon = {}\n", cfg.horizon));
    }
    if let Some(taus) = &cfg.grid_tau {
        out.push_str(&format!("grid_tau = {}\n", format_list(taus)));
    }
    if let Some(phis) = &cfg.grid_phis {
        out.push_str(&format!("grid_phis = {}\n", format_list(phis)));
    }
    if cfg.command == Command::Moments {
        out.push_str(&format!("sim_t_periods = {}\n", cfg.sim_t_periods));
        out.push_str(&format!("sim_burn_in = {}\n", cfg.sim_burn_in));
    }
    if cfg.allow_flagged_derivatives {
        out.push_str("allow_flagged_derivatives = 1\n");
    }
    if cfg.dump_derivatives {
        out.push_str("dump_derivatives = 1\n");
    }
    if cfg.dump_solution {
        out.push_str("dump_solution = 1\n");
    }
    out.push('\n');
    out.push_str("# resolved parameters (solver-derived constants included)\n");
    for (key, value) in resolved.entries() {
        out.push_str(&format!("{key} = {value}\n"));
    }
    out
}

/// Convenience used by the binary: assemble, run, and map any failure to
/// its documented exit code with a one-line diagnostic.
pub fn assemble_and_run(inv: &Invocation) -> Result<(ExperimentConfig, RunReport), IoError> {
    let cfg = assemble(inv)?;
    let report = run(&cfg)?;
    Ok((cfg, report))
}
