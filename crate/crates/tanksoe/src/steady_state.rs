//! Deterministic (zero-shock) steady state via nested scalar root-finding.
//!
//! The outer loop scans one scalar unknown — the relative import price
//! p̄^m — over a log-spaced grid, verifies that the market-clearing
//! residual for the domestically produced good switches sign exactly
//! once, and bisects the bracket. The inner loop solves the
//! capital-market Euler equation for R̄^k. (That equation turns out not
//! to involve the outer unknown at all: no-arbitrage with the domestic
//! bond pins R̄^k outright, so the inner solve runs once and the
//! diagnostics record the decoupling.) Conditional on (p̄^m, R̄^k)
//! everything else follows in closed form:
//!
//! * the CES price aggregators give p̄^N, p̄^I, p̄^Co, and P̃;
//! * the rental rate and the firm's factor demands give k̄, ȳ, w̄ at the
//!   hours normalization l̄;
//! * government scales and the hand-to-mouth budget give ḡ, τ̄^H, c̄^H;
//! * the economy-wide resource identity gives c̄^R — the net foreign
//!   asset position Υ z̄ p̄^{c,R} feeds back into the required trade
//!   balance, which makes that step a quadratic in c̄^R rather than a
//!   linear solve;
//! * the demand schedules then price out every expenditure component,
//!   and the clearing gap in the domestic good is the outer residual.
//!
//! The solver also fills in the derived parameters (χ_R, χ_H from the
//! hours-matching step, ψ_S, ḡ, τ̄^H, ȳ) and certifies the result by
//! substituting it back into the full residual system.

use crate::model::{self, gdp, residuals, walras_residual, ModelError};
use crate::params::{ModelParameters, ParamError};
use crate::vectors::{var, StackedPoint, EQUATIONS, N_ENDO};
use thiserror::Error;

/// Points in the log-spaced scan grid (spanning ±2 orders of magnitude).
pub const SCAN_GRID_POINTS: usize = 2000;

/// Bracketed refinement stops once the scalar residual is below this.
pub const ROOT_TOLERANCE: f64 = 1e-12;

/// Residual certification bound applied to the assembled solution.
pub const RESIDUAL_BOUND: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum SsError {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(
        "no sign switch for {unknown} on [{lo:.3e}, {hi:.3e}] \
         ({valid} of {total} grid points admissible) — parameters are \
         inconsistent with an interior steady state"
    )]
    NoSignSwitch {
        unknown: &'static str,
        lo: f64,
        hi: f64,
        valid: usize,
        total: usize,
    },
    #[error(
        "residual for {unknown} switches sign in {} brackets {brackets:?} — \
         refusing to pick among candidate equilibria",
        brackets.len()
    )]
    MultipleSignSwitches {
        unknown: &'static str,
        brackets: Vec<(f64, f64)>,
    },
    #[error(
        "subsistence violation: {what} = {value:.6e} — income cannot cover \
         the commodity subsistence bundle anywhere on the scan grid"
    )]
    SubsistenceViolation { what: &'static str, value: f64 },
    #[error(
        "steady state is not a commodity net exporter: endowment {endowment:.6} \
         ≤ household commodity use {consumption:.6}"
    )]
    NotNetExporter { endowment: f64, consumption: f64 },
    #[error("steady-state certification failed: max |residual| = {0:.3e} in equation `{1}`")]
    ResidualCheck(f64, &'static str),
}

/// How the nested solve went: which unknowns were searched, where the
/// brackets sat, how many refinement steps each took, and how well the
/// assembled solution satisfies the full system.
#[derive(Debug, Clone)]
pub struct SsDiagnostics {
    pub outer_unknown: &'static str,
    pub inner_unknown: &'static str,
    pub outer_bracket: (f64, f64),
    pub inner_bracket: (f64, f64),
    pub outer_iterations: usize,
    pub inner_iterations: usize,
    pub scan_points: usize,
    /// Grid points of the outer scan where the closed-form chain produced
    /// an admissible (positive-consumption) allocation.
    pub scan_admissible_points: usize,
    pub residual_max: f64,
    pub walras_residual: f64,
}

/// A solved steady state: the full variable vector (in `ModelVectors`
/// order), the parameter set with all solver-derived constants filled in,
/// and the solve diagnostics.
#[derive(Debug, Clone)]
pub struct SteadyState {
    pub values: Vec<f64>,
    pub params: ModelParameters,
    pub diagnostics: SsDiagnostics,
}

/// Steady-state objects that depend only on rates and the Calvo block,
/// not on the outer unknown.
struct Anchors {
    /// Gross quarterly inflation (all sectoral rates coincide).
    pi: f64,
    /// Gross trend growth e^{ΔĀ}.
    growth: f64,
    /// Gross nominal depreciation s̄ = π̄/π^f; also the solved ψ_S.
    s: f64,
    rd: f64,
    rstar: f64,
    /// z̄ = 1 under the growth-centered scale-factor law.
    z: f64,
    mc: f64,
    p_star: f64,
    /// 1 − βθπ̄^ε and 1 − βθπ̄^{ε−1}, the Calvo recursion denominators.
    denom_k: f64,
    denom_f: f64,
}

fn domain(what: &'static str, value: f64) -> SsError {
    SsError::Model(ModelError::Domain { what, value })
}

fn anchors(par: &ModelParameters) -> Result<Anchors, SsError> {
    let pi = par.pi_bar;
    let theta = par.theta;
    let epsi = par.epsilon;
    let beta = par.beta;

    // trend inflation must stay below the Calvo reset bound, otherwise the
    // pricing recursions have no finite fixed point
    let kernel = 1.0 - theta * pi.powf(epsi - 1.0);
    if kernel <= 0.0 {
        return Err(domain("1 - theta*pi_bar^(eps-1)", kernel));
    }
    let disp = 1.0 - theta * pi.powf(epsi);
    if disp <= 0.0 {
        return Err(domain("1 - theta*pi_bar^eps", disp));
    }
    let denom_k = 1.0 - beta * theta * pi.powf(epsi);
    let denom_f = 1.0 - beta * theta * pi.powf(epsi - 1.0);
    if denom_k <= 0.0 {
        return Err(domain("1 - beta*theta*pi_bar^eps", denom_k));
    }

    // reset-to-average price ratio, marginal cost, and price dispersion at
    // trend inflation; at pi_bar = 1 these collapse to 1, (ε−1)/ε, 1
    let reset_ratio = (kernel / (1.0 - theta)).powf(1.0 / (1.0 - epsi));
    let mc = (epsi - 1.0) / epsi * reset_ratio * denom_k / denom_f;
    let p_star = disp / ((1.0 - theta) * (kernel / (1.0 - theta)).powf(epsi / (epsi - 1.0)));

    Ok(Anchors {
        pi,
        growth: par.DeltaA_bar.exp(),
        s: pi / par.pi_f,
        rd: par.rd_bar(),
        rstar: par.rstar_bar(),
        z: par.zbar(),
        mc,
        p_star,
        denom_k,
        denom_f,
    })
}

/// Everything downstream of the two scanned unknowns.
struct Chain {
    values: Vec<f64>,
    /// Market-clearing gap in the domestically produced good — the outer
    /// scan residual. By construction of c̄^R it equals the balance-of-
    /// payments gap, so driving it to zero closes the external block too.
    clearing: f64,
    chi_r: f64,
    chi_h: f64,
    gbar: f64,
    tau_h: f64,
}

/// Closed-form steady-state chain conditional on (R̄^k, p̄^m). Returns the
/// offending variable when the point implies non-positive consumption —
/// income short of the subsistence bundle — so the scan can skip it.
fn chain(
    par: &ModelParameters,
    a: &Anchors,
    r_k: f64,
    p_m: f64,
) -> Result<Chain, (&'static str, f64)> {
    let lam = par.lambda_R;
    let nu = par.nu_subsidy;

    // relative prices implied by the import price
    let p_n = (par.omega_D + (1.0 - par.omega_D) * p_m.powf(1.0 - par.eta_c))
        .powf(1.0 / (1.0 - par.eta_c));
    let p_i = (par.gamma_I + (1.0 - par.gamma_I) * p_m.powf(1.0 - par.nu_I))
        .powf(1.0 / (1.0 - par.nu_I));
    let p_co = p_m * par.Pbar_Co;
    let p_tilde = model::p_tilde(par, p_co, p_n);
    let p_x = 1.0 / p_m;

    // factor block conditional on the capital return: rental rate from the
    // return decomposition, then capital per hour from the firm's demand
    let r_rent = p_i * (r_k / a.pi - (1.0 - par.delta_K));
    if r_rent <= 0.0 {
        return Err(("rental rate", r_rent));
    }
    let l = par.hours_target;
    let k_per_l = (par.alpha * a.mc / r_rent).powf(1.0 / (1.0 - par.alpha));
    let k_services = k_per_l * l;
    let y = a.p_star * k_services.powf(par.alpha) * l.powf(1.0 - par.alpha);
    let w = (1.0 - par.alpha) * a.mc * k_per_l.powf(par.alpha) / (1.0 - nu);
    let k = k_services * a.growth;
    let i = k * (1.0 - (1.0 - par.delta_K) * (-par.DeltaA_bar).exp());

    // trade and fiscal scales
    let x = par.export_demand_scale * p_x.powf(-par.eta_f) * par.Ybar_f * a.z;
    let gdp_ss = y + p_co * a.z * par.Ybar_Co;
    let gbar = par.eta_g * gdp_ss / a.z;
    let gz = gbar * a.z;
    let tau_h = par.tax_share_H * (gz + nu * w * l);

    // hand-to-mouth consumption from the flow budget: what is left of
    // labor income after taxes buys the subsistence bundle first
    let ch_spend = w * l - tau_h;
    let c_h = (ch_spend - p_co * par.phi_Co) / p_tilde;
    if c_h <= 0.0 {
        return Err(("c_H", c_h));
    }
    let p_ch = p_tilde + p_co * par.phi_Co / c_h;

    // Ricardian consumption from the aggregate resource identity
    //   λ p̄^{c,R} c̄^R + (1−λ) p̄^{c,H} c̄^H + p̄^I ī + ḡ z̄ + (1−1/β) f̄^O = GDP,
    // with f̄^O = Υ z̄ p̄^{c,R} and p̄^{c,R} = P̃ + p̄^Co φ_Co / c̄^R; collecting
    // powers of c̄^R gives a quadratic whose positive root is unique
    let nfa_coef = (1.0 - 1.0 / par.beta) * par.Upsilon * a.z;
    let rhs = gdp_ss - p_i * i - gz - (1.0 - lam) * ch_spend;
    let qa = lam * p_tilde;
    let qb = lam * p_co * par.phi_Co + nfa_coef * p_tilde - rhs;
    let qc = nfa_coef * p_co * par.phi_Co;
    // qc ≤ 0, so the discriminant is at least qb² and the root is real
    let c_r = (-qb + (qb * qb - 4.0 * qa * qc).sqrt()) / (2.0 * qa);
    if c_r <= 0.0 {
        return Err(("c_R", c_r));
    }
    let p_cr = p_tilde + p_co * par.phi_Co / c_r;
    let q = p_m / p_cr;
    let f_o = par.Upsilon * a.z * p_cr;

    // demand systems
    let c_co_r = par.alpha_Co * p_tilde * c_r / p_co + par.phi_Co;
    let c_n_r = (1.0 - par.alpha_Co) * p_tilde * c_r / p_n;
    let c_d_r = par.omega_D * p_n.powf(par.eta_c) * c_n_r;
    let c_f_r = (1.0 - par.omega_D) * (p_n / p_m).powf(par.eta_c) * c_n_r;
    let c_co_h = par.alpha_Co * p_tilde * c_h / p_co + par.phi_Co;
    let c_n_h = (1.0 - par.alpha_Co) * p_tilde * c_h / p_n;
    let c_d_h = par.omega_D * p_n.powf(par.eta_c) * c_n_h;
    let c_f_h = (1.0 - par.omega_D) * (p_n / p_m).powf(par.eta_c) * c_n_h;
    let c_n = lam * c_n_r + (1.0 - lam) * c_n_h;

    let clearing = y
        - par.gamma_I * p_i.powf(par.nu_I) * i
        - lam * c_d_r
        - (1.0 - lam) * c_d_h
        - x
        - gz;

    // Calvo recursion levels at trend inflation
    let sales_ratio = y / (p_cr * c_r);
    let calvo_f = sales_ratio / a.denom_f;
    let calvo_k = par.epsilon / (par.epsilon - 1.0) * sales_ratio * a.mc / a.denom_k;

    // hours-matching labor-disutility scales, then lifetime utilities
    let chi_r = w / (p_cr * c_r * l.powf(par.varphi));
    let chi_h = w / (p_ch * c_h * l.powf(par.varphi));
    let growth_utility = par.beta / (1.0 - par.beta) * par.DeltaA_bar;
    let flow_r = c_r.ln() - chi_r * l.powf(1.0 + par.varphi) / (1.0 + par.varphi)
        + par.utility_const
        + growth_utility;
    let flow_h = c_h.ln() - chi_h * l.powf(1.0 + par.varphi) / (1.0 + par.varphi)
        + par.utility_const
        + growth_utility;
    let v_r = flow_r / (1.0 - par.beta);
    let v_h = flow_h / (1.0 - par.beta);

    let mut v = vec![0.0; N_ENDO];
    v[var::C_R] = c_r;
    v[var::C_H] = c_h;
    v[var::L_R] = l;
    v[var::L_H] = l;
    v[var::L] = l;
    v[var::W] = w;
    v[var::K] = k;
    v[var::I] = i;
    v[var::Y] = y;
    v[var::P_STAR] = a.p_star;
    v[var::CALVO_K] = calvo_k;
    v[var::CALVO_F] = calvo_f;
    v[var::MC] = a.mc;
    v[var::PI] = a.pi;
    v[var::PI_N] = a.pi;
    v[var::PI_CO] = a.pi;
    v[var::PI_CR] = a.pi;
    v[var::PI_CH] = a.pi;
    v[var::P_N] = p_n;
    v[var::P_M] = p_m;
    v[var::P_CO] = p_co;
    v[var::P_CR] = p_cr;
    v[var::P_CH] = p_ch;
    v[var::P_X] = p_x;
    v[var::P_I] = p_i;
    v[var::P_K] = p_i; // Tobin's condition with zero adjustment costs
    v[var::Q] = q;
    v[var::S] = a.s;
    v[var::S_TILDE] = 1.0;
    v[var::R_D] = a.rd;
    v[var::R_K] = r_k;
    v[var::R_RENT] = r_rent;
    v[var::D_STAR] = f_o;
    v[var::F_O] = f_o;
    v[var::Z] = a.z;
    v[var::G] = gbar;
    v[var::X] = x;
    v[var::C_CO_R] = c_co_r;
    v[var::C_N_R] = c_n_r;
    v[var::C_D_R] = c_d_r;
    v[var::C_F_R] = c_f_r;
    v[var::C_CO_H] = c_co_h;
    v[var::C_N_H] = c_n_h;
    v[var::C_D_H] = c_d_h;
    v[var::C_F_H] = c_f_h;
    v[var::C_N] = c_n;
    v[var::P_CO_STAR] = par.Pbar_Co;
    v[var::R_STAR] = a.rstar;
    v[var::Y_CO] = par.Ybar_Co;
    v[var::DA] = par.DeltaA_bar;
    v[var::V_R] = v_r;
    v[var::V_H] = v_h;

    Ok(Chain {
        values: v,
        clearing,
        chi_r,
        chi_h,
        gbar,
        tau_h,
    })
}

#[derive(Debug)]
struct ScalarRoot {
    root: f64,
    iterations: usize,
    bracket: (f64, f64),
    valid: usize,
}

/// Grid-scan → single-sign-switch verification → bisection, for a scalar
/// residual on a log grid around `guess`. Grid points where the residual
/// is inadmissible (the chain reports non-positive consumption) are
/// skipped, and no bracket is formed across such a gap.
fn scan_and_bisect<F>(mut f: F, guess: f64, unknown: &'static str) -> Result<ScalarRoot, SsError>
where
    F: FnMut(f64) -> Result<f64, (&'static str, f64)>,
{
    let lo = guess * 1e-2;
    let hi = guess * 1e2;
    let ratio = hi / lo;

    let mut prev: Option<(f64, f64)> = None;
    let mut brackets: Vec<(f64, f64)> = Vec::new();
    let mut valid = 0usize;
    let mut last_invalid: Option<(&'static str, f64)> = None;

    for idx in 0..SCAN_GRID_POINTS {
        let t = idx as f64 / (SCAN_GRID_POINTS as f64 - 1.0);
        let xg = lo * ratio.powf(t);
        match f(xg) {
            Err(inv) => {
                last_invalid = Some(inv);
                prev = None;
            }
            Ok(h) if !h.is_finite() => {
                last_invalid = Some((unknown, h));
                prev = None;
            }
            Ok(h) => {
                valid += 1;
                if h == 0.0 {
                    return Ok(ScalarRoot {
                        root: xg,
                        iterations: 1,
                        bracket: (xg, xg),
                        valid,
                    });
                }
                if let Some((xp, hp)) = prev {
                    if hp.signum() != h.signum() {
                        brackets.push((xp, xg));
                    }
                }
                prev = Some((xg, h));
            }
        }
    }

    match brackets.len() {
        0 => {
            if valid == 0 {
                let (what, value) =
                    last_invalid.expect("scan grid is non-empty, some evaluation happened");
                Err(SsError::SubsistenceViolation { what, value })
            } else {
                Err(SsError::NoSignSwitch {
                    unknown,
                    lo,
                    hi,
                    valid,
                    total: SCAN_GRID_POINTS,
                })
            }
        }
        1 => {
            let (mut xa, mut xb) = brackets[0];
            let subsist =
                |(what, value)| SsError::SubsistenceViolation { what, value };
            let mut ha = f(xa).map_err(subsist)?;
            let mut iterations = 1usize;
            loop {
                let mid = 0.5 * (xa + xb);
                let hm = f(mid).map_err(subsist)?;
                iterations += 1;
                let width_exhausted = (xb - xa) < 4.0 * f64::EPSILON * mid.abs();
                if hm.abs() < ROOT_TOLERANCE || width_exhausted || iterations > 300 {
                    return Ok(ScalarRoot {
                        root: mid,
                        iterations,
                        bracket: brackets[0],
                        valid,
                    });
                }
                if ha.signum() != hm.signum() {
                    xb = mid;
                } else {
                    xa = mid;
                    ha = hm;
                }
            }
        }
        _ => Err(SsError::MultipleSignSwitches { unknown, brackets }),
    }
}

/// Solves the steady state from the built-in analytic initial guess
/// (symmetric relative prices, p̄^m = 1; the ±2-order scan width does the
/// real work of locating the equilibrium).
pub fn solve_steady_state(par: &ModelParameters) -> Result<SteadyState, SsError> {
    solve_impl(par, None)
}

/// Warm-started variant: when `outer_guess` already satisfies the clearing
/// residual to tolerance — re-running from a previous solution — the scan
/// is skipped and the solve confirms the root in one outer iteration.
pub fn solve_steady_state_from(
    par: &ModelParameters,
    outer_guess: f64,
) -> Result<SteadyState, SsError> {
    solve_impl(par, Some(outer_guess))
}

fn solve_impl(par_in: &ModelParameters, warm: Option<f64>) -> Result<SteadyState, SsError> {
    par_in.validate()?;
    let a = anchors(par_in)?;

    // inner loop: capital-market Euler in R^k; a priori the nominal rate
    // is the natural magnitude, so the grid centers there
    let mut euler_gap =
        |r_k: f64| -> Result<f64, (&'static str, f64)> {
            Ok(1.0 - par_in.beta * r_k / (a.pi * a.growth))
        };
    let inner = scan_and_bisect(&mut euler_gap, par_in.rd_bar(), "R_k")?;
    let r_k = inner.root;

    // outer loop: domestic-good market clearing over the import price
    let mut clearing_gap = |p_m: f64| chain(par_in, &a, r_k, p_m).map(|c| c.clearing);
    let outer = match warm {
        Some(guess) => match clearing_gap(guess) {
            Ok(h) if h.abs() < ROOT_TOLERANCE => ScalarRoot {
                root: guess,
                iterations: 1,
                bracket: (guess, guess),
                valid: 1,
            },
            _ => scan_and_bisect(&mut clearing_gap, guess, "p_m")?,
        },
        None => scan_and_bisect(&mut clearing_gap, 1.0, "p_m")?,
    };

    let ch = chain(par_in, &a, r_k, outer.root)
        .map_err(|(what, value)| SsError::SubsistenceViolation { what, value })?;

    let endowment = ch.values[var::Y_CO];
    let consumption = par_in.lambda_R * ch.values[var::C_CO_R]
        + (1.0 - par_in.lambda_R) * ch.values[var::C_CO_H];
    if endowment <= consumption {
        return Err(SsError::NotNetExporter {
            endowment,
            consumption,
        });
    }

    let mut par = par_in.clone();
    par.chi_R = ch.chi_r;
    par.chi_H = ch.chi_h;
    par.psi_S = a.s;
    par.gbar = ch.gbar;
    par.tau_H_bar = ch.tau_h;
    par.ybar = ch.values[var::Y];

    // certification: substitute the solution back into the full system
    let pt = StackedPoint::stationary(&ch.values);
    let res = residuals(&par, &pt)?;
    let (worst_eq, residual_max) = res
        .iter()
        .enumerate()
        .map(|(i, r)| (i, r.abs()))
        .fold((0, 0.0_f64), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
    if residual_max > RESIDUAL_BOUND {
        return Err(SsError::ResidualCheck(residual_max, EQUATIONS[worst_eq]));
    }
    let walras = walras_residual(&par, &pt)?;

    Ok(SteadyState {
        values: ch.values,
        params: par,
        diagnostics: SsDiagnostics {
            outer_unknown: "p_m",
            inner_unknown: "R_k",
            outer_bracket: outer.bracket,
            inner_bracket: inner.bracket,
            outer_iterations: outer.iterations,
            inner_iterations: inner.iterations,
            scan_points: SCAN_GRID_POINTS,
            scan_admissible_points: outer.valid,
            residual_max,
            walras_residual: walras,
        },
    })
}

/// The calibration-facing summary: expenditure shares, trade ratios,
/// annualized rates, and relative prices as a flat name/value table
/// (also what the CLI serializes to CSV).
pub fn steady_state_report(ss: &SteadyState) -> Vec<(&'static str, f64)> {
    let v = &ss.values;
    let par = &ss.params;
    let lam = par.lambda_R;

    let total_gdp = gdp(v);
    let commodity_net_exports = v[var::P_CO]
        * (v[var::Z] * v[var::Y_CO] - lam * v[var::C_CO_R] - (1.0 - lam) * v[var::C_CO_H]);
    let exports = v[var::X] + commodity_net_exports;
    let imports = v[var::P_M]
        * (lam * v[var::C_F_R]
            + (1.0 - lam) * v[var::C_F_H]
            + (1.0 - par.gamma_I) * (v[var::P_I] / v[var::P_M]).powf(par.nu_I) * v[var::I]);
    let gz = v[var::G] * v[var::Z];

    let share_r = v[var::P_CO] * v[var::C_CO_R] / (v[var::P_CR] * v[var::C_R]);
    let share_h = v[var::P_CO] * v[var::C_CO_H] / (v[var::P_CH] * v[var::C_H]);

    let annual_pct = |gross: f64| (gross.powi(4) - 1.0) * 100.0;

    vec![
        ("share_Co_R", share_r),
        ("share_Co_H", share_h),
        ("exports_over_gdp", exports / total_gdp),
        ("commodity_share_of_exports", commodity_net_exports / exports),
        ("imports_over_gdp", imports / total_gdp),
        ("gov_over_gdp", gz / total_gdp),
        ("trade_balance_over_gdp", (exports - imports) / total_gdp),
        ("nfa_over_gdp", v[var::F_O] / total_gdp),
        ("gdp", total_gdp),
        ("y", v[var::Y]),
        ("c_R", v[var::C_R]),
        ("c_H", v[var::C_H]),
        ("k_over_annual_gdp", v[var::K] / (4.0 * total_gdp)),
        ("w", v[var::W]),
        ("p_m", v[var::P_M]),
        ("p_N", v[var::P_N]),
        ("p_Co", v[var::P_CO]),
        ("p_I", v[var::P_I]),
        ("p_cR", v[var::P_CR]),
        ("p_cH", v[var::P_CH]),
        ("q", v[var::Q]),
        ("mc", v[var::MC]),
        ("price_dispersion", v[var::P_STAR]),
        ("R_d_annual_pct", annual_pct(v[var::R_D])),
        ("R_star_annual_pct", annual_pct(v[var::R_STAR])),
        ("pi_annual_pct", annual_pct(par.pi_bar)),
        ("real_rate_annual_pct", annual_pct(1.0 / par.beta)),
        ("growth_annual_pct", annual_pct(par.DeltaA_bar.exp())),
    ]
}
