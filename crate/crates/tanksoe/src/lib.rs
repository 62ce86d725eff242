//! Solver toolkit for a two-agent New Keynesian small open economy with a
//! commodity sector and non-homothetic (subsistence) preferences in
//! commodities.
//!
//! The pipeline, in dependency order:
//!
//! 1. [`params`] — calibration container and validation.
//! 2. [`vectors`] — the variable/shock catalogue and vector layouts.
//! 3. [`model`] — stationarized equilibrium conditions as residual functions.
//! 4. [`steady_state`] — deterministic balanced-growth steady state.
//! 5. [`diff`] — finite-difference Jacobians/Hessians of the residuals.
//! 6. [`perturbation`] — first- and second-order perturbation solutions.
//! 7. [`simulation`] — impulse responses, pruned simulation, moments.
//! 8. [`welfare`] — welfare evaluation and the policy-rule grid search.
//! 9. [`io`] — config parsing, CSV output, run manifests for the CLI.

pub mod linalg;
pub mod model;
pub mod params;
pub mod diff;
pub mod perturbation;
pub mod simulation;
pub mod welfare;
pub mod steady_state;
pub mod vectors;
pub mod io;

pub use linalg::{LinAlgError, Mat};
pub use model::{residuals, ModelError};
pub use params::{ModelParameters, ParamError};
pub use diff::{hessians, jacobians, DerivativeBundle, DiffError, DiffOptions, SparseHessian};
pub use perturbation::{
    shock_covariance, solve_first_order, solve_second_order, FirstOrderSolution,
    PerturbationError, PerturbationSolution, SecondOrderSolution, SolverWarning,
};
pub use simulation::{
    compare_irf, impulse_response, simulate_moments, simulate_path, ImpulseResponse,
    IrfComparison, MomentTable, Scheme, SimulationError, DEFAULT_HORIZON,
};
pub use welfare::{
    default_phi_grid, default_tau_grid, evaluate_welfare, grid_search, grid_search_points,
    homotheticity_comparison, optimal_policy_search, HomotheticityComparison, HouseholdOptimum,
    PolicyGridResult, PolicyPoint, WelfareError, WelfareSummary,
};
pub use steady_state::{solve_steady_state, steady_state_report, SsError, SteadyState};
pub use vectors::{ModelVectors, StackedPoint};
pub use io::{assemble, parse_config, run, Command, ExperimentConfig, Invocation, IoError};
