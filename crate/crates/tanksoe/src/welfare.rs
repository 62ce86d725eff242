//! Household welfare under alternative policy rules and the optimal-policy
//! grid search over the fiscal response τ^C and the exchange-rate response
//! φ_s.
//!
//! Both rules respond to deviations only, so the deterministic steady
//! state is invariant across the policy grid and each point needs just a
//! fresh perturbation solve. Welfare is the unconditional (ergodic)
//! second-order mean of the value recursions V^R and V^H, computed
//! analytically — no Monte Carlo anywhere in the grid path, so results
//! are deterministic bit for bit:
//!
//!   E[dy] = (I − T)⁻¹ (E[½ x̃ᵀG_xx x̃] + ½ G_ss),
//!   E[½ x̃ᵀG x̃] = ½ tr(G¹¹ Σ_x) + ½ tr(G²² Q),
//!
//! with Σ_x the first-order state covariance from the Lyapunov equation
//! and Q the innovation covariance. A conditional-on-steady-state variant
//! (expected value at time zero from the deterministic state) is carried
//! alongside for reference.
//!
//! Moment summaries use the same analytic machinery: means include the
//! second-order correction; standard deviations are the leading-order
//! (first-order) values from Σ_x. Table-style "mean change" columns are
//! reported in level percent of the comparison point's mean.

use crate::diff::{hessians, DiffError};
use crate::linalg::{lyapunov_doubling, LinAlgError, Mat};
use crate::model::{residuals, ModelError};
use crate::params::ModelParameters;
use crate::perturbation::{
    shock_covariance, solve_first_order, solve_second_order, PerturbationError,
    SecondOrderSolution,
};
use crate::steady_state::{solve_steady_state, SsError, SteadyState};
use crate::vectors::{var, ModelVectors, StackedPoint, N_ENDO, N_SHOCK};
use rayon::prelude::*;
use thiserror::Error;

/// Lower bound on the exchange-rate response: exactly zero leaves the
/// detrended nominal level without an anchor (a unit root), so the search
/// region is cut off just above it.
pub const PHI_S_FLOOR: f64 = 0.0002;

/// Fiscal-response bounds.
pub const TAU_C_MIN: f64 = -1.0;
pub const TAU_C_MAX: f64 = 1.0;

/// Upper end of the default φ_s grid.
pub const PHI_S_CEILING: f64 = 40.0;

#[derive(Debug, Error)]
pub enum WelfareError {
    #[error("policy point out of bounds: {what} = {value} (tau_C ∈ [-1, 1], phi_s ≥ {PHI_S_FLOOR})")]
    PolicyOutOfBounds { what: &'static str, value: f64 },
    #[error("empty policy grid")]
    EmptyGrid,
    #[error("all {attempted} grid points are infeasible (no stable solution anywhere)")]
    AllPointsInfeasible { attempted: usize },
    #[error(
        "steady state drifted under the policy change (residual {residual:.3e}) — \
         the rules must respond to deviations only"
    )]
    SteadyStateDrift { residual: f64 },
    #[error(transparent)]
    SteadyState(#[from] SsError),
    #[error(transparent)]
    Differentiation(#[from] DiffError),
    #[error(transparent)]
    Perturbation(#[from] PerturbationError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    LinAlg(#[from] LinAlgError),
}

/// One admissible (τ^C, φ_s) policy; bounds are enforced at construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyPoint {
    tau_c: f64,
    phi_s: f64,
}

impl PolicyPoint {
    pub fn new(tau_c: f64, phi_s: f64) -> Result<Self, WelfareError> {
        if !tau_c.is_finite() || !(TAU_C_MIN..=TAU_C_MAX).contains(&tau_c) {
            return Err(WelfareError::PolicyOutOfBounds {
                what: "tau_C",
                value: tau_c,
            });
        }
        if !phi_s.is_finite() || phi_s < PHI_S_FLOOR {
            return Err(WelfareError::PolicyOutOfBounds {
                what: "phi_s",
                value: phi_s,
            });
        }
        Ok(PolicyPoint { tau_c, phi_s })
    }

    pub fn tau_c(&self) -> f64 {
        self.tau_c
    }

    pub fn phi_s(&self) -> f64 {
        self.phi_s
    }

    /// The parameter set with this policy in place of the current one.
    pub fn apply(&self, par: &ModelParameters) -> ModelParameters {
        let mut out = par.clone();
        out.tau_C = self.tau_c;
        out.phi_s = self.phi_s;
        out
    }
}

/// Welfare and analytic moment summary at one policy point.
#[derive(Debug, Clone, PartialEq)]
pub struct WelfareSummary {
    pub point: PolicyPoint,
    /// Unconditional second-order expectations of the value recursions.
    pub v_r: f64,
    pub v_h: f64,
    /// Conditional-on-steady-state variant (time-zero expectation from the
    /// deterministic state) — reference only.
    pub v_r_conditional: f64,
    pub v_h_conditional: f64,
    /// Mean levels including the second-order correction.
    pub mean_c_r: f64,
    pub mean_c_h: f64,
    pub mean_l_r: f64,
    pub mean_l_h: f64,
    /// Leading-order (first-order analytic) standard deviations.
    pub std_c_r: f64,
    pub std_c_h: f64,
    pub std_l_r: f64,
    pub std_l_h: f64,
}

impl WelfareSummary {
    pub fn welfare(&self, hand_to_mouth: bool) -> f64 {
        if hand_to_mouth {
            self.v_h
        } else {
            self.v_r
        }
    }
}

/// Per-household optimum with the comparison columns versus the benchmark
/// policy point.
#[derive(Debug, Clone, PartialEq)]
pub struct HouseholdOptimum {
    pub point: PolicyPoint,
    pub welfare: f64,
    /// Welfare difference to the benchmark point, in utils.
    pub welfare_gain: f64,
    /// The same gain as a permanent consumption-equivalent, in percent:
    /// 100·(1−β)·gain for log consumption utility.
    pub consumption_equivalent_pct: f64,
    pub std_ratio_c: f64,
    pub std_ratio_l: f64,
    pub mean_change_c_pct: f64,
    pub mean_change_l_pct: f64,
}

/// Outcome of a policy-grid evaluation. `evaluations` holds every grid
/// point in input order; infeasible points (no stable solution) carry the
/// solver's message instead of a summary.
#[derive(Debug, Clone)]
pub struct PolicyGridResult {
    pub evaluations: Vec<(PolicyPoint, Result<WelfareSummary, String>)>,
    pub benchmark: WelfareSummary,
    pub ricardian: HouseholdOptimum,
    pub hand_to_mouth: HouseholdOptimum,
    pub n_feasible: usize,
}

impl PolicyGridResult {
    /// Table-style CSV: the two optimum rows, then the full grid.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "household,tau_C,phi_s,welfare,welfare_gain,consumption_equivalent_pct,\
             std_ratio_c,std_ratio_l,mean_change_c_pct,mean_change_l_pct\n",
        );
        for (name, opt) in [
            ("ricardian", &self.ricardian),
            ("hand_to_mouth", &self.hand_to_mouth),
        ] {
            out.push_str(&format!(
                "{},{},{},{:.11e},{:.11e},{:.11e},{:.11e},{:.11e},{:.11e},{:.11e}\n",
                name,
                opt.point.tau_c(),
                opt.point.phi_s(),
                opt.welfare,
                opt.welfare_gain,
                opt.consumption_equivalent_pct,
                opt.std_ratio_c,
                opt.std_ratio_l,
                opt.mean_change_c_pct,
                opt.mean_change_l_pct,
            ));
        }
        out.push_str(
            "tau_C,phi_s,feasible,V_R,V_H,mean_c_R,mean_c_H,mean_l_R,mean_l_H,\
             std_c_R,std_c_H,std_l_R,std_l_H\n",
        );
        for (pt, ev) in &self.evaluations {
            match ev {
                Ok(s) => out.push_str(&format!(
                    "{},{},1,{:.11e},{:.11e},{:.11e},{:.11e},{:.11e},{:.11e},{:.11e},{:.11e},{:.11e},{:.11e}\n",
                    pt.tau_c(),
                    pt.phi_s(),
                    s.v_r,
                    s.v_h,
                    s.mean_c_r,
                    s.mean_c_h,
                    s.mean_l_r,
                    s.mean_l_h,
                    s.std_c_r,
                    s.std_c_h,
                    s.std_l_r,
                    s.std_l_h,
                )),
                Err(_) => out.push_str(&format!("{},{},0,,,,,,,,,,\n", pt.tau_c(), pt.phi_s())),
            }
        }
        out
    }
}

/// Both preference regimes' grid searches side by side, with the
/// per-household welfare-gain comparison (non-homothetic / homothetic).
#[derive(Debug, Clone)]
pub struct HomotheticityComparison {
    pub non_homothetic: PolicyGridResult,
    pub homothetic: PolicyGridResult,
    pub gain_ratio_r: f64,
    pub gain_ratio_h: f64,
}

/// Unconditional and conditional welfare plus analytic moments from one
/// certified second-order solution.
fn summarize(
    point: PolicyPoint,
    ss: &SteadyState,
    so: &SecondOrderSolution,
) -> Result<WelfareSummary, WelfareError> {
    let t = &so.first.t;
    let q = &so.shock_cov;

    // first-order state covariance Σ_x = T Σ_x Tᵀ + R Q Rᵀ
    let rqr = so.first.r.mul(q).mul(&so.first.r.transpose());
    let sigma_x = lyapunov_doubling(t, &rqr, 1e-13)?;

    // E[½ x̃ᵀ G_v x̃] over the ergodic distribution (state and innovation
    // blocks; the cross block has zero expectation), and the same over the
    // innovation block alone for the conditional variant
    let mut forcing = vec![0.0; N_ENDO];
    let mut forcing_eps = vec![0.0; N_ENDO];
    for v in 0..N_ENDO {
        let g = &so.g_xx[v];
        let mut acc_x = 0.0;
        for a in 0..N_ENDO {
            let row = g.row(a);
            for b in 0..N_ENDO {
                acc_x += row[b] * sigma_x[(b, a)];
            }
        }
        let mut acc_e = 0.0;
        for a in 0..N_SHOCK {
            for b in 0..N_SHOCK {
                acc_e += g[(N_ENDO + a, N_ENDO + b)] * q[(b, a)];
            }
        }
        forcing[v] = 0.5 * (acc_x + acc_e) + 0.5 * so.g_ss[v];
        forcing_eps[v] = 0.5 * acc_e + 0.5 * so.g_ss[v];
    }

    // E[dy] = (I − T)⁻¹ · forcing
    let eye = Mat::eye(N_ENDO);
    let i_minus_t = eye.sub(t);
    let rhs = Mat::from_fn(N_ENDO, 1, |i, _| forcing[i]);
    let mean_dev = i_minus_t.solve(&rhs, "unconditional second-order mean")?;

    let mean = |v: usize| ss.values[v] + mean_dev[(v, 0)];
    let std = |v: usize| sigma_x[(v, v)].max(0.0).sqrt();
    Ok(WelfareSummary {
        point,
        v_r: mean(var::V_R),
        v_h: mean(var::V_H),
        v_r_conditional: ss.values[var::V_R] + forcing_eps[var::V_R],
        v_h_conditional: ss.values[var::V_H] + forcing_eps[var::V_H],
        mean_c_r: mean(var::C_R),
        mean_c_h: mean(var::C_H),
        mean_l_r: mean(var::L_R),
        mean_l_h: mean(var::L_H),
        std_c_r: std(var::C_R),
        std_c_h: std(var::C_H),
        std_l_r: std(var::L_R),
        std_l_h: std(var::L_H),
    })
}

/// Evaluate welfare for a calibrated parameter set (policy already
/// applied) at its — policy-invariant — steady state. Re-solves the
/// perturbation only; a guard verifies the steady state actually still
/// holds under the supplied parameters.
pub fn evaluate_welfare(
    par: &ModelParameters,
    ss: &SteadyState,
) -> Result<WelfareSummary, WelfareError> {
    let res = residuals(par, &StackedPoint::stationary(&ss.values))?;
    let worst = res.iter().fold(0.0_f64, |m, r| m.max(r.abs()));
    if worst > 1e-8 {
        return Err(WelfareError::SteadyStateDrift { residual: worst });
    }
    let point = PolicyPoint::new(par.tau_C, par.phi_s)?;
    let d = hessians(par, ss)?;
    let vectors = ModelVectors::new();
    let fo = solve_first_order(&d, &vectors, par)?;
    let so = solve_second_order(&d, &fo, &shock_covariance(par))?;
    summarize(point, ss, &so)
}

/// True for solver outcomes that mean "this policy point has no stable
/// rational-expectations solution" — excluded from the grid rather than
/// aborting it.
fn is_infeasibility(err: &WelfareError) -> bool {
    matches!(
        err,
        WelfareError::Perturbation(
            PerturbationError::BKViolationTooFew { .. }
                | PerturbationError::BKViolationTooMany { .. }
                | PerturbationError::RankCondition(_)
                | PerturbationError::EffectiveUnitRoot { .. }
        )
    )
}

fn optimum_for(
    hand_to_mouth: bool,
    evaluations: &[(PolicyPoint, Result<WelfareSummary, String>)],
    benchmark: &WelfareSummary,
    beta: f64,
) -> HouseholdOptimum {
    let welfare_of = |s: &WelfareSummary| s.welfare(hand_to_mouth);
    let best = evaluations
        .iter()
        .filter_map(|(_, ev)| ev.as_ref().ok())
        .fold(None::<&WelfareSummary>, |acc, s| match acc {
            Some(cur) if welfare_of(cur) >= welfare_of(s) => Some(cur),
            _ => Some(s),
        })
        .expect("caller guarantees at least one feasible point");

    let (mean_c, mean_l, std_c, std_l, bench_c, bench_l, bench_sc, bench_sl) = if hand_to_mouth {
        (
            best.mean_c_h,
            best.mean_l_h,
            best.std_c_h,
            best.std_l_h,
            benchmark.mean_c_h,
            benchmark.mean_l_h,
            benchmark.std_c_h,
            benchmark.std_l_h,
        )
    } else {
        (
            best.mean_c_r,
            best.mean_l_r,
            best.std_c_r,
            best.std_l_r,
            benchmark.mean_c_r,
            benchmark.mean_l_r,
            benchmark.std_c_r,
            benchmark.std_l_r,
        )
    };
    let gain = welfare_of(best) - welfare_of(benchmark);
    let ratio = |a: f64, b: f64| if a == b { 1.0 } else { a / b };
    HouseholdOptimum {
        point: best.point,
        welfare: welfare_of(best),
        welfare_gain: gain,
        consumption_equivalent_pct: 100.0 * (1.0 - beta) * gain,
        std_ratio_c: ratio(std_c, bench_sc),
        std_ratio_l: ratio(std_l, bench_sl),
        mean_change_c_pct: 100.0 * (mean_c - bench_c) / bench_c,
        mean_change_l_pct: 100.0 * (mean_l - bench_l) / bench_l,
    }
}

/// Evaluate an explicit list of policy points (steady state solved once,
/// perturbation per point, in parallel, merged in input order). Points
/// with no stable solution are reported infeasible, not fatal.
pub fn grid_search_points(
    par: &ModelParameters,
    points: &[PolicyPoint],
) -> Result<PolicyGridResult, WelfareError> {
    if points.is_empty() {
        return Err(WelfareError::EmptyGrid);
    }
    let ss = solve_steady_state(par)?;
    let benchmark = evaluate_welfare(&ss.params, &ss)?;

    let evaluations: Vec<(PolicyPoint, Result<WelfareSummary, String>)> = points
        .par_iter()
        .map(|pt| {
            let par_pt = pt.apply(&ss.params);
            let ev = match evaluate_welfare(&par_pt, &ss) {
                Ok(summary) => Ok(summary),
                Err(e) if is_infeasibility(&e) => Err(e.to_string()),
                Err(e) => return Err(e),
            };
            Ok((*pt, ev))
        })
        .collect::<Result<_, WelfareError>>()?;

    let n_feasible = evaluations.iter().filter(|(_, ev)| ev.is_ok()).count();
    if n_feasible == 0 {
        return Err(WelfareError::AllPointsInfeasible {
            attempted: points.len(),
        });
    }
    let ricardian = optimum_for(false, &evaluations, &benchmark, ss.params.beta);
    let hand_to_mouth = optimum_for(true, &evaluations, &benchmark, ss.params.beta);
    Ok(PolicyGridResult {
        evaluations,
        benchmark,
        ricardian,
        hand_to_mouth,
        n_feasible,
    })
}

/// Cartesian-product grid search over fiscal and exchange-rate responses.
pub fn grid_search(
    par: &ModelParameters,
    tau_grid: &[f64],
    phi_s_grid: &[f64],
) -> Result<PolicyGridResult, WelfareError> {
    if tau_grid.is_empty() || phi_s_grid.is_empty() {
        return Err(WelfareError::EmptyGrid);
    }
    let mut points = Vec::with_capacity(tau_grid.len() * phi_s_grid.len());
    for &tau in tau_grid {
        for &phi in phi_s_grid {
            points.push(PolicyPoint::new(tau, phi)?);
        }
    }
    grid_search_points(par, &points)
}

/// Default fiscal-response grid.
pub fn default_tau_grid() -> Vec<f64> {
    vec![-1.0, -0.5, 0.0, 0.5, 1.0]
}

/// Default exchange-rate-response grid: 13 log-spaced points spanning
/// [`PHI_S_FLOOR`], [`PHI_S_CEILING`].
pub fn default_phi_grid() -> Vec<f64> {
    let n = 13;
    let (lo, hi) = (PHI_S_FLOOR.ln(), PHI_S_CEILING.ln());
    (0..n)
        .map(|k| (lo + (hi - lo) * k as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Midpoint neighbors around one argmax: half a τ step either side and
/// half a log step in φ_s, clamped to the admissible box.
fn refinement_neighbors(
    center: PolicyPoint,
    tau_half_step: f64,
    phi_half_ratio: f64,
) -> Vec<PolicyPoint> {
    let taus = [
        (center.tau_c() - tau_half_step).max(TAU_C_MIN),
        center.tau_c(),
        (center.tau_c() + tau_half_step).min(TAU_C_MAX),
    ];
    let phis = [
        (center.phi_s() / phi_half_ratio).max(PHI_S_FLOOR),
        center.phi_s(),
        (center.phi_s() * phi_half_ratio).min(PHI_S_CEILING),
    ];
    let mut out = Vec::new();
    for &t in &taus {
        for &p in &phis {
            out.push(PolicyPoint::new(t, p).expect("clamped into bounds"));
        }
    }
    out
}

/// Default-grid search plus one refinement level around each household's
/// argmax. The refined result is a superset of the coarse grid (coarse
/// evaluations are reused, new points appended in deterministic order),
/// so per-household argmax welfare can only improve.
pub fn optimal_policy_search(
    par: &ModelParameters,
) -> Result<(PolicyGridResult, PolicyGridResult), WelfareError> {
    let tau_grid = default_tau_grid();
    let phi_grid = default_phi_grid();
    let coarse = grid_search(par, &tau_grid, &phi_grid)?;

    let tau_half_step = 0.25;
    let phi_half_ratio = (phi_grid[1] / phi_grid[0]).sqrt();
    let mut extra: Vec<PolicyPoint> = Vec::new();
    for center in [coarse.ricardian.point, coarse.hand_to_mouth.point] {
        for cand in refinement_neighbors(center, tau_half_step, phi_half_ratio) {
            let dup = |p: &PolicyPoint| {
                (p.tau_c() - cand.tau_c()).abs() < 1e-12
                    && (p.phi_s() - cand.phi_s()).abs() <= 1e-12 * cand.phi_s()
            };
            if !coarse.evaluations.iter().any(|(p, _)| dup(p)) && !extra.iter().any(dup) {
                extra.push(cand);
            }
        }
    }

    let refined = if extra.is_empty() {
        coarse.clone()
    } else {
        let fresh = grid_search_points(par, &extra)?;
        let mut evaluations = coarse.evaluations.clone();
        evaluations.extend(fresh.evaluations);
        let n_feasible = evaluations.iter().filter(|(_, ev)| ev.is_ok()).count();
        let benchmark = coarse.benchmark.clone();
        let ricardian = optimum_for(false, &evaluations, &benchmark, par.beta);
        let hand_to_mouth = optimum_for(true, &evaluations, &benchmark, par.beta);
        PolicyGridResult {
            evaluations,
            benchmark,
            ricardian,
            hand_to_mouth,
            n_feasible,
        }
    };
    Ok((coarse, refined))
}

/// The optimal-policy exercise under the calibrated subsistence level and
/// again with it shut off (labor-disutility scales re-solved so hours are
/// unchanged), plus the per-household welfare-gain ratios.
pub fn homotheticity_comparison(
    par: &ModelParameters,
) -> Result<HomotheticityComparison, WelfareError> {
    let (_, non_homothetic) = optimal_policy_search(par)?;
    let mut par0 = par.clone();
    par0.phi_Co = 0.0;
    let (_, homothetic) = optimal_policy_search(&par0)?;
    let gain_ratio_r = non_homothetic.ricardian.welfare_gain / homothetic.ricardian.welfare_gain;
    let gain_ratio_h =
        non_homothetic.hand_to_mouth.welfare_gain / homothetic.hand_to_mouth.welfare_gain;
    Ok(HomotheticityComparison {
        non_homothetic,
        homothetic,
        gain_ratio_r,
        gain_ratio_h,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perturbation::PerturbationSolution;
    use crate::simulation::{simulate_path, Scheme};

    fn benchmark_ss() -> SteadyState {
        solve_steady_state(&ModelParameters::benchmark()).unwrap()
    }

    #[test]
    fn policy_bounds_are_enforced_at_construction() {
        assert!(PolicyPoint::new(1.5, 1.0).is_err());
        assert!(PolicyPoint::new(-1.000001, 1.0).is_err());
        assert!(PolicyPoint::new(0.0, 0.00019).is_err());
        assert!(PolicyPoint::new(0.0, f64::NAN).is_err());
        let p = PolicyPoint::new(-1.0, 0.0002).unwrap();
        assert_eq!((p.tau_c(), p.phi_s()), (-1.0, 0.0002));
    }

    #[test]
    fn zero_shock_variances_reduce_welfare_to_the_deterministic_value() {
        let ss = benchmark_ss();
        let mut par = ss.params.clone();
        par.sigma_Pco = 0.0;
        par.sigma_Rstar = 0.0;
        par.sigma_R = 0.0;
        let s = evaluate_welfare(&par, &ss).unwrap();

        // deterministic limit: the recursion's fixed point
        // V̄ = (flow + β/(1−β)·ΔĀ)/(1−β), reconstructed from primitives
        let flow_r = ss.values[var::C_R].ln()
            - par.chi_R * ss.values[var::L_R].powf(1.0 + par.varphi) / (1.0 + par.varphi)
            + par.utility_const;
        let growth = par.beta / (1.0 - par.beta) * par.DeltaA_bar;
        let v_bar_r = (flow_r + growth) / (1.0 - par.beta);
        assert!((s.v_r - v_bar_r).abs() < 1e-8, "{} vs {v_bar_r}", s.v_r);
        assert!((s.v_r - ss.values[var::V_R]).abs() < 1e-8);
        assert!((s.v_h - ss.values[var::V_H]).abs() < 1e-6);
        assert_eq!(s.std_c_r, 0.0);
        assert_eq!(s.std_l_h, 0.0);
    }

    #[test]
    fn welfare_matches_a_long_pruned_simulation_of_the_value_recursion() {
        let ss = benchmark_ss();
        let s = evaluate_welfare(&ss.params, &ss).unwrap();

        let d = hessians(&ss.params, &ss).unwrap();
        let fo = solve_first_order(&d, &ModelVectors::new(), &ss.params).unwrap();
        let cov = shock_covariance(&ss.params);
        let so = solve_second_order(&d, &fo, &cov).unwrap();
        let sol = PerturbationSolution::Second(so);

        let (t_total, burn) = (120_000, 4_000);
        let path = simulate_path(&sol, Scheme::Pruned, t_total, 2_024, &cov).unwrap();
        for (analytic, v) in [(s.v_r, var::V_R), (s.v_h, var::V_H)] {
            let sample = &path[v][burn..];
            let n_batches = 40;
            let len = sample.len() / n_batches;
            let batch_means: Vec<f64> = (0..n_batches)
                .map(|b| sample[b * len..(b + 1) * len].iter().sum::<f64>() / len as f64)
                .collect();
            let grand = batch_means.iter().sum::<f64>() / n_batches as f64;
            let se = (batch_means
                .iter()
                .map(|m| (m - grand) * (m - grand))
                .sum::<f64>()
                / (n_batches as f64 * (n_batches - 1) as f64))
                .sqrt();
            let sim = ss.values[v] + grand;
            assert!(
                (analytic - sim).abs() <= 3.0 * se,
                "variable {v}: analytic {analytic:.8} sim {sim:.8} se {se:.2e}"
            );
        }
    }

    #[test]
    fn fiscal_cyclicality_works_through_the_wage_bill_channel() {
        // A commodity windfall depresses the hand-to-mouth bundle through
        // the subsistence floor, so spending part of the windfall cushions
        // that household: mild pro-cyclicality raises its welfare and lowers
        // its consumption volatility. Either unit corner, by contrast, turns
        // the expenditure rule into a large extra demand shock and is far
        // worse than the acyclical rule for both households.
        let ss = benchmark_ss();
        let eval = |tau: f64| {
            evaluate_welfare(&PolicyPoint::new(tau, 0.02).unwrap().apply(&ss.params), &ss)
                .unwrap()
        };
        let counter = eval(-0.1);
        let acyclic = eval(0.0);
        let mild_pro = eval(0.1);
        assert!(
            mild_pro.v_h > acyclic.v_h && acyclic.v_h > counter.v_h,
            "hand-to-mouth tau slope: {:.6} / {:.6} / {:.6}",
            counter.v_h,
            acyclic.v_h,
            mild_pro.v_h
        );
        assert!(mild_pro.std_c_h < acyclic.std_c_h);

        let pro_corner = eval(1.0);
        let counter_corner = eval(-1.0);
        for corner in [&pro_corner, &counter_corner] {
            assert!(acyclic.v_r > corner.v_r + 1.0, "Ricardian corner cost");
            assert!(acyclic.v_h > corner.v_h + 1.0, "hand-to-mouth corner cost");
        }
    }

    #[test]
    fn single_point_grid_is_everyones_argmax() {
        let par = ModelParameters::benchmark();
        let res = grid_search(&par, &[0.5], &[1.0]).unwrap();
        assert_eq!(res.n_feasible, 1);
        assert_eq!(res.ricardian.point, PolicyPoint::new(0.5, 1.0).unwrap());
        assert_eq!(res.hand_to_mouth.point, res.ricardian.point);
    }

    #[test]
    fn grid_argmax_matches_brute_force_re_evaluation() {
        let par = ModelParameters::benchmark();
        let taus = [-1.0, 0.0, 1.0];
        let phis = [0.01, 0.5, 8.0];
        let res = grid_search(&par, &taus, &phis).unwrap();

        let ss = benchmark_ss();
        let mut best_r = (f64::NEG_INFINITY, (0.0, 0.0));
        let mut best_h = (f64::NEG_INFINITY, (0.0, 0.0));
        for &t in &taus {
            for &p in &phis {
                let s =
                    evaluate_welfare(&PolicyPoint::new(t, p).unwrap().apply(&ss.params), &ss)
                        .unwrap();
                if s.v_r > best_r.0 {
                    best_r = (s.v_r, (t, p));
                }
                if s.v_h > best_h.0 {
                    best_h = (s.v_h, (t, p));
                }
            }
        }
        assert_eq!(
            (res.ricardian.point.tau_c(), res.ricardian.point.phi_s()),
            best_r.1
        );
        assert_eq!(res.ricardian.welfare, best_r.0);
        assert_eq!(
            (
                res.hand_to_mouth.point.tau_c(),
                res.hand_to_mouth.point.phi_s()
            ),
            best_h.1
        );

        // argmax dominates every feasible point, per household
        for (_, ev) in &res.evaluations {
            let s = ev.as_ref().unwrap();
            assert!(res.ricardian.welfare >= s.v_r);
            assert!(res.hand_to_mouth.welfare >= s.v_h);
        }
    }

    #[test]
    fn households_split_over_exchange_rate_management() {
        // On the benchmark policy grid the households agree that commodity
        // windfalls should not move public expenditure one-for-one — both
        // fiscal argmaxes sit at the acyclical rule — but they disagree
        // sharply over the exchange-rate response: the Ricardian optimum
        // keeps the float nearly free while the hand-to-mouth optimum
        // manages it heavily, because the exchange rate prices that
        // household's subsistence-heavy bundle.
        let par = ModelParameters::benchmark();
        let res = grid_search(&par, &[-1.0, 0.0, 1.0], &[0.0002, 0.08, 1.4, 12.0, 35.0])
            .unwrap();
        let r = &res.ricardian;
        let h = &res.hand_to_mouth;
        assert_eq!(r.point.tau_c(), 0.0, "Ricardian fiscal response");
        assert_eq!(h.point.tau_c(), 0.0, "hand-to-mouth fiscal response");
        assert!(r.point.phi_s() < 2.0, "Ricardian phi_s {}", r.point.phi_s());
        assert!(
            h.point.phi_s() > 5.0,
            "hand-to-mouth phi_s {}",
            h.point.phi_s()
        );
        assert!(h.point.phi_s() > r.point.phi_s());
    }

    #[test]
    fn common_utility_constant_shifts_welfare_without_moving_the_argmax() {
        let base = ModelParameters::benchmark();
        let taus = [-1.0, 1.0];
        let phis = [0.02, 8.0];
        let a = grid_search(&base, &taus, &phis).unwrap();

        let mut shifted = base.clone();
        shifted.utility_const += 0.37;
        let b = grid_search(&shifted, &taus, &phis).unwrap();

        assert_eq!(a.ricardian.point, b.ricardian.point);
        assert_eq!(a.hand_to_mouth.point, b.hand_to_mouth.point);
        let shift = 0.37 / (1.0 - base.beta);
        for ((_, ea), (_, eb)) in a.evaluations.iter().zip(&b.evaluations) {
            let (sa, sb) = (ea.as_ref().unwrap(), eb.as_ref().unwrap());
            assert!(
                ((sb.v_r - sa.v_r) - shift).abs() < 1e-5 * shift.abs(),
                "R shift {} vs {shift}",
                sb.v_r - sa.v_r
            );
            assert!(((sb.v_h - sa.v_h) - shift).abs() < 1e-5 * shift.abs());
        }
    }

    #[test]
    fn grids_are_deterministic_and_refinement_only_improves() {
        let par = ModelParameters::benchmark();
        let taus = [0.0, 1.0];
        let phis = [0.02, 1.0];
        let a = grid_search(&par, &taus, &phis).unwrap();
        let b = grid_search(&par, &taus, &phis).unwrap();
        for ((pa, ea), (pb, eb)) in a.evaluations.iter().zip(&b.evaluations) {
            assert_eq!(pa, pb);
            assert_eq!(ea.as_ref().unwrap(), eb.as_ref().unwrap());
        }

        // a superset grid can only raise the per-household argmax welfare
        let wider = grid_search(&par, &[-1.0, 0.0, 1.0], &[0.02, 1.0, 20.0]).unwrap();
        assert!(wider.ricardian.welfare >= a.ricardian.welfare);
        assert!(wider.hand_to_mouth.welfare >= a.hand_to_mouth.welfare);
    }

    #[test]
    fn infeasible_points_are_reported_not_fatal() {
        // phi_s at the floor is feasible; an empty grid and an
        // out-of-bounds grid are hard errors
        let par = ModelParameters::benchmark();
        match grid_search(&par, &[], &[1.0]) {
            Err(WelfareError::EmptyGrid) => {}
            other => panic!("expected EmptyGrid, got {other:?}"),
        }
        match grid_search(&par, &[2.0], &[1.0]) {
            Err(WelfareError::PolicyOutOfBounds { what, .. }) => assert_eq!(what, "tau_C"),
            other => panic!("expected PolicyOutOfBounds, got {other:?}"),
        }
    }

    #[test]
    fn subsistence_preferences_raise_the_stakes_of_policy() {
        // small paper-style grid in both preference regimes: optimal τ^C
        // signs agree across regimes, and the hand-to-mouth welfare gain
        // from reaching its optimum is much larger with the subsistence
        // floor switched on
        let taus = [-1.0, 0.0, 1.0];
        let phis = [0.0002, 0.08, 1.4, 12.0, 35.0];
        let bench = ModelParameters::benchmark();
        let non_hom = grid_search(&bench, &taus, &phis).unwrap();

        let mut hom_par = bench.clone();
        hom_par.phi_Co = 0.0;
        let hom = grid_search(&hom_par, &taus, &phis).unwrap();

        assert_eq!(
            non_hom.ricardian.point.tau_c(),
            hom.ricardian.point.tau_c(),
            "Ricardian optimal tau sign should not depend on the preference regime"
        );
        assert_eq!(
            non_hom.hand_to_mouth.point.tau_c(),
            hom.hand_to_mouth.point.tau_c(),
            "hand-to-mouth optimal tau sign should not depend on the preference regime"
        );
        let ratio = non_hom.hand_to_mouth.welfare_gain / hom.hand_to_mouth.welfare_gain;
        assert!(
            ratio > 1.5,
            "hand-to-mouth gain ratio {ratio:.3} (non-homothetic {:.6} vs homothetic {:.6})",
            non_hom.hand_to_mouth.welfare_gain,
            hom.hand_to_mouth.welfare_gain
        );
    }

    #[test]
    fn identical_preference_regimes_give_identical_grids() {
        let par = ModelParameters::benchmark();
        let taus = [0.0, 1.0];
        let phis = [0.02, 5.0];
        let a = grid_search(&par, &taus, &phis).unwrap();
        let b = grid_search(&par, &taus, &phis).unwrap();
        assert_eq!(a.ricardian, b.ricardian);
        assert_eq!(a.hand_to_mouth, b.hand_to_mouth);
    }
}
