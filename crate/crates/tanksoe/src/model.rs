//! The stacked nonlinear equilibrium conditions.
//!
//! One residual per endogenous variable, evaluated at a [`StackedPoint`]
//! (values at t−1, t, and the certainty-equivalent expectation point for
//! t+1, plus date-t innovations). Every residual is zero at an exact
//! equilibrium. Conventions:
//!
//! * flows dated t are deflated by the productivity level A_t; the capital
//!   stock k_{t−1} is carried as K_{t−1}/A_{t−1};
//! * all prices are relative to the domestic final good (the numeraire), so
//!   only gross inflation/depreciation rates and relative prices appear;
//! * `s_tilde` is the detrended nominal exchange-rate *level* (steady state
//!   1); the gross depreciation rate satisfies s_t = ψ_S · S̃_t/S̃_{t−1};
//! * the scale factor z_t = Z_t/A_t follows the growth-centered law
//!   z_t = exp(−δ_Z(ΔA_t − ΔĀ)) z_{t−1}^{δ_Z}, so z̄ = 1;
//! * per-capita consumption and hours carry R/H suffixes; investment,
//!   capital, net foreign assets, and exports are economy-wide aggregates.

use crate::params::ModelParameters;
use crate::vectors::{shock, var, StackedPoint, N_ENDO, N_SHOCK};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("non-positive argument for {what} ({value:.6e}) — invalid evaluation point")]
    Domain { what: &'static str, value: f64 },
    #[error("parameters are missing solver-derived constants ({0}); run the steady-state solver first")]
    NotCalibrated(&'static str),
}

fn pos(value: f64, what: &'static str) -> Result<f64, ModelError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(ModelError::Domain { what, value })
    }
}

/// Stone-Geary price aggregate P̃ = (p^Co/α_Co)^{α_Co} (p^N/(1−α_Co))^{1−α_Co}.
/// Marginal cost of one unit of the consumption bundle; the subsistence
/// wedge p^Co φ_Co/c makes the average index p^{c,j} exceed it.
pub(crate) fn p_tilde(par: &ModelParameters, p_co: f64, p_n: f64) -> f64 {
    (p_co / par.alpha_Co).powf(par.alpha_Co)
        * (p_n / (1.0 - par.alpha_Co)).powf(1.0 - par.alpha_Co)
}

/// Investment adjustment cost S(g) = κ_I/2 (g − e^{ΔĀ})²; zero level and
/// slope on the balanced growth path.
fn adj_cost(par: &ModelParameters, g: f64) -> f64 {
    0.5 * par.kappa_I * (g - par.DeltaA_bar.exp()).powi(2)
}

fn adj_cost_slope(par: &ModelParameters, g: f64) -> f64 {
    par.kappa_I * (g - par.DeltaA_bar.exp())
}

/// Evaluates all equilibrium-condition residuals at `pt`.
///
/// Requires calibrated parameters (the Taylor rule references ȳ, the
/// hand-to-mouth budget references τ̄^H, and so on).
pub fn residuals(par: &ModelParameters, pt: &StackedPoint) -> Result<Vec<f64>, ModelError> {
    if !par.is_calibrated() {
        return Err(ModelError::NotCalibrated(
            "chi_R/chi_H/psi_S/gbar/tau_H_bar/ybar",
        ));
    }
    assert_eq!(pt.y_prev.len(), N_ENDO);
    assert_eq!(pt.y_curr.len(), N_ENDO);
    assert_eq!(pt.y_next.len(), N_ENDO);
    assert_eq!(pt.eps.len(), N_SHOCK);

    let yp = &pt.y_prev;
    let yc = &pt.y_curr;
    let yn = &pt.y_next;
    let eps = &pt.eps;

    // -- date-t values ------------------------------------------------------
    let c_r = pos(yc[var::C_R], "c_R")?;
    let c_h = pos(yc[var::C_H], "c_H")?;
    let l_r = pos(yc[var::L_R], "l_R")?;
    let l_h = pos(yc[var::L_H], "l_H")?;
    let l = pos(yc[var::L], "l")?;
    let w = yc[var::W];
    let k = yc[var::K];
    let i = pos(yc[var::I], "i")?;
    let y = pos(yc[var::Y], "y")?;
    let p_star = pos(yc[var::P_STAR], "p_star")?;
    let calvo_k = yc[var::CALVO_K];
    let calvo_f = pos(yc[var::CALVO_F], "calvo_F")?;
    let mc = yc[var::MC];
    let pi = pos(yc[var::PI], "pi")?;
    let pi_n = yc[var::PI_N];
    let pi_co = yc[var::PI_CO];
    let pi_cr = pos(yc[var::PI_CR], "pi_cR")?;
    let pi_ch = pos(yc[var::PI_CH], "pi_cH")?;
    let p_n = pos(yc[var::P_N], "p_N")?;
    let p_m = pos(yc[var::P_M], "p_m")?;
    let p_co = pos(yc[var::P_CO], "p_Co")?;
    let p_cr = pos(yc[var::P_CR], "p_cR")?;
    let p_ch = pos(yc[var::P_CH], "p_cH")?;
    let p_x = pos(yc[var::P_X], "p_x")?;
    let p_i = pos(yc[var::P_I], "p_I")?;
    let p_k = yc[var::P_K];
    let q = pos(yc[var::Q], "q")?;
    let s = pos(yc[var::S], "s")?;
    let s_tilde = pos(yc[var::S_TILDE], "s_tilde")?;
    let r_d = pos(yc[var::R_D], "R_d")?;
    let r_k = yc[var::R_K];
    let r_rent = yc[var::R_RENT];
    let d_star = yc[var::D_STAR];
    let f_o = yc[var::F_O];
    let z = pos(yc[var::Z], "z")?;
    let g = yc[var::G];
    let x = yc[var::X];
    let c_co_r = yc[var::C_CO_R];
    let c_n_r = yc[var::C_N_R];
    let c_d_r = yc[var::C_D_R];
    let c_f_r = yc[var::C_F_R];
    let c_co_h = yc[var::C_CO_H];
    let c_n_h = yc[var::C_N_H];
    let c_d_h = yc[var::C_D_H];
    let c_f_h = yc[var::C_F_H];
    let c_n = yc[var::C_N];
    let p_co_star = pos(yc[var::P_CO_STAR], "P_Co_star")?;
    let r_star = pos(yc[var::R_STAR], "R_star")?;
    let y_co = pos(yc[var::Y_CO], "y_Co")?;
    let da = yc[var::DA];
    let v_r = yc[var::V_R];
    let v_h = yc[var::V_H];

    // -- lagged values ------------------------------------------------------
    let k_lag = pos(yp[var::K], "k_{t-1}")?;
    let i_lag = pos(yp[var::I], "i_{t-1}")?;
    let p_star_lag = pos(yp[var::P_STAR], "p_star_{t-1}")?;
    let p_n_lag = pos(yp[var::P_N], "p_N_{t-1}")?;
    let p_co_lag = pos(yp[var::P_CO], "p_Co_{t-1}")?;
    let p_cr_lag = pos(yp[var::P_CR], "p_cR_{t-1}")?;
    let p_ch_lag = pos(yp[var::P_CH], "p_cH_{t-1}")?;
    let p_k_lag = pos(yp[var::P_K], "p_k_{t-1}")?;
    let q_lag = pos(yp[var::Q], "q_{t-1}")?;
    let s_tilde_lag = pos(yp[var::S_TILDE], "s_tilde_{t-1}")?;
    let r_d_lag = pos(yp[var::R_D], "R_d_{t-1}")?;
    let r_star_lag = pos(yp[var::R_STAR], "R_star_{t-1}")?;
    let f_o_lag = yp[var::F_O];
    let z_lag = pos(yp[var::Z], "z_{t-1}")?;
    let p_co_star_lag = pos(yp[var::P_CO_STAR], "P_Co_star_{t-1}")?;
    let y_co_lag = pos(yp[var::Y_CO], "y_Co_{t-1}")?;
    let da_lag = yp[var::DA];

    // -- expected t+1 values -------------------------------------------------
    let c_r_next = pos(yn[var::C_R], "c_R_{t+1}")?;
    let i_next = pos(yn[var::I], "i_{t+1}")?;
    let calvo_k_next = yn[var::CALVO_K];
    let calvo_f_next = yn[var::CALVO_F];
    let pi_next = pos(yn[var::PI], "pi_{t+1}")?;
    let pi_cr_next = pos(yn[var::PI_CR], "pi_cR_{t+1}")?;
    let p_k_next = yn[var::P_K];
    let s_next = pos(yn[var::S], "s_{t+1}")?;
    let r_k_next = yn[var::R_K];
    let da_next = yn[var::DA];
    let v_r_next = yn[var::V_R];
    let v_h_next = yn[var::V_H];

    // -- shared pieces --------------------------------------------------------
    let beta = par.beta;
    let lam = par.lambda_R;
    let nu = par.nu_subsidy;
    let theta = par.theta;
    let epsi = par.epsilon;
    // reset-price kernel 1 − θπ^{ε−1}; in the Calvo block inflation must stay
    // below the resetting bound for the recursion to have a solution
    let kernel = pos(
        1.0 - theta * pi.powf(epsi - 1.0),
        "1 - theta*pi^(eps-1)",
    )?;
    let p_tilde_t = p_tilde(par, p_co, p_n);
    let growth = da.exp();
    let growth_next = da_next.exp();
    // investment growth in levels, I_t/I_{t−1} = (i_t/i_{t−1}) e^{ΔA_t}
    let g_inv = (i / i_lag) * growth;
    let g_inv_next = (i_next / i) * growth_next;
    let s_g = adj_cost(par, g_inv);
    let sp_g = adj_cost_slope(par, g_inv);
    let sp_g_next = adj_cost_slope(par, g_inv_next);
    let rd_bar = par.rd_bar();
    let rstar_bar = par.rstar_bar();

    let mut res = vec![0.0; N_ENDO];

    // ---- Calvo pricing (5) --------------------------------------------------
    res[0] = calvo_k
        - (epsi / (epsi - 1.0)) * (y / (p_cr * c_r)) * mc
        - beta * theta * pi_next.powf(epsi) * calvo_k_next;
    res[1] = calvo_f
        - y / (p_cr * c_r)
        - beta * theta * pi_next.powf(epsi - 1.0) * calvo_f_next;
    res[2] = calvo_k / calvo_f - (kernel / (1.0 - theta)).powf(1.0 / (1.0 - epsi));
    // dispersion in inverse form: 1/p* aggregates reset and carried prices
    res[3] = 1.0 / p_star
        - (1.0 - theta) * (kernel / (1.0 - theta)).powf(epsi / (epsi - 1.0))
        - theta * pi.powf(epsi) / p_star_lag;
    res[4] = mc
        - (1.0 - nu) * w * (par.alpha * da).exp()
            / ((1.0 - par.alpha) * (k_lag / l).powf(par.alpha));

    // ---- Ricardian Euler equations (3) --------------------------------------
    res[5] = 1.0 - beta * (c_r / (growth_next * c_r_next)) * r_d / pi_cr_next;
    res[6] = 1.0 / c_r + par.gamma_portfolio * (d_star / (z * p_cr) - par.Upsilon)
        - beta * s_next * r_star / (pi_cr_next * c_r_next * growth_next);
    res[7] = 1.0 - beta * (c_r / (growth_next * c_r_next)) * r_k_next / pi_cr_next;

    // ---- Production & market clearing (3) -----------------------------------
    res[8] = y - p_star * (k_lag / growth).powf(par.alpha) * l.powf(1.0 - par.alpha);
    res[9] = y
        - par.gamma_I * p_i.powf(par.nu_I) * i
        - lam * c_d_r
        - (1.0 - lam) * c_d_h
        - x
        - g * z;
    res[10] = c_n - lam * c_n_r - (1.0 - lam) * c_n_h;

    // ---- Price relationships (5) --------------------------------------------
    res[11] = p_n
        - (par.omega_D + (1.0 - par.omega_D) * p_m.powf(1.0 - par.eta_c))
            .powf(1.0 / (1.0 - par.eta_c));
    res[12] = p_m - q * p_cr;
    res[13] = p_co - p_m * p_co_star;
    res[14] = p_cr - p_tilde_t - p_co * par.phi_Co / c_r;
    res[15] = p_ch - p_tilde_t - p_co * par.phi_Co / c_h;

    // ---- Inflation relationships (4) ----------------------------------------
    res[16] = pi_n - pi * p_n / p_n_lag;
    res[17] = pi_co - pi * p_co / p_co_lag;
    res[18] = pi_cr - pi * p_cr / p_cr_lag;
    res[19] = pi_ch - pi * p_ch / p_ch_lag;

    // ---- Demand schedules, Ricardian (4) ------------------------------------
    res[20] = c_co_r - par.alpha_Co * p_tilde_t * c_r / p_co - par.phi_Co;
    res[21] = c_n_r - (1.0 - par.alpha_Co) * p_tilde_t * c_r / p_n;
    res[22] = c_d_r - par.omega_D * p_n.powf(par.eta_c) * c_n_r;
    res[23] = c_f_r - (1.0 - par.omega_D) * (p_n / p_m).powf(par.eta_c) * c_n_r;

    // ---- Demand schedules, hand-to-mouth (4) --------------------------------
    res[24] = c_co_h - par.alpha_Co * p_tilde_t * c_h / p_co - par.phi_Co;
    res[25] = c_n_h - (1.0 - par.alpha_Co) * p_tilde_t * c_h / p_n;
    res[26] = c_d_h - par.omega_D * p_n.powf(par.eta_c) * c_n_h;
    res[27] = c_f_h - (1.0 - par.omega_D) * (p_n / p_m).powf(par.eta_c) * c_n_h;

    // ---- Exchange-rate conditions (3) ---------------------------------------
    res[28] = 1.0 - q * p_x * p_cr;
    res[29] = q / q_lag - s * par.pi_f / pi_cr;
    res[30] = s - par.psi_S * s_tilde / s_tilde_lag;

    // ---- Investment conditions (5) ------------------------------------------
    res[31] = p_i
        - p_k * (1.0 - s_g - sp_g * g_inv)
        - beta * (c_r * pi_next / (pi_cr_next * c_r_next * growth_next))
            * p_k_next
            * sp_g_next
            * g_inv_next.powi(2);
    res[32] = k - (1.0 - par.delta_K) * (-da).exp() * k_lag - (1.0 - s_g) * i;
    res[33] = r_rent
        - (par.alpha / (1.0 - par.alpha)) * (1.0 - nu) * w * l * growth / k_lag;
    res[34] = r_k - pi * (r_rent + (1.0 - par.delta_K) * p_k) / p_k_lag;
    res[35] = p_i
        - (par.gamma_I + (1.0 - par.gamma_I) * p_m.powf(1.0 - par.nu_I))
            .powf(1.0 / (1.0 - par.nu_I));

    // ---- Labor market & export demand (4) -----------------------------------
    res[36] = l - lam * l_r - (1.0 - lam) * l_h;
    res[37] = w - par.chi_R * p_cr * c_r * l_r.powf(par.varphi);
    res[38] = w - par.chi_H * p_ch * c_h * l_h.powf(par.varphi);
    res[39] = x - par.export_demand_scale * p_x.powf(-par.eta_f) * par.Ybar_f * z;

    // ---- Scale factor (1) ----------------------------------------------------
    res[40] = z - (-par.delta_Z * (da - par.DeltaA_bar)).exp() * z_lag.powf(par.delta_Z);

    // ---- External balance (2) -------------------------------------------------
    let commodity_net_exports = p_co * (z * y_co - lam * c_co_r - (1.0 - lam) * c_co_h);
    let import_bill = p_m
        * (lam * c_f_r
            + (1.0 - lam) * c_f_h
            + (1.0 - par.gamma_I) * (p_i / p_m).powf(par.nu_I) * i);
    res[41] = f_o
        - (s * r_star_lag / (pi * growth)) * f_o_lag
        - commodity_net_exports
        - x
        + import_bill;
    res[42] = d_star - f_o;

    // ---- Policy (2) -------------------------------------------------------------
    let pi_c_avg = lam * pi_cr + (1.0 - lam) * pi_ch;
    res[43] = (r_d / rd_bar).ln()
        - par.rho_R * (r_d_lag / rd_bar).ln()
        - (1.0 - par.rho_R)
            * (par.phi_pi * (pi_c_avg / par.pi_bar).ln()
                + par.phi_y * (y / par.ybar).ln()
                + par.phi_s * s_tilde.ln())
        - eps[shock::EPS_R];
    res[44] = g
        - par.gbar
        - par.tau_C * (p_co_star * y_co / (par.Pbar_Co * par.Ybar_Co) - 1.0);

    // ---- Hand-to-mouth budget (1) ------------------------------------------------
    res[45] = p_ch * c_h - w * l_h + par.tau_H_bar;

    // ---- Exogenous AR(1) laws (4) --------------------------------------------------
    res[46] = (p_co_star / par.Pbar_Co).ln()
        - par.rho_Pco * (p_co_star_lag / par.Pbar_Co).ln()
        - eps[shock::EPS_P];
    res[47] = (r_star / rstar_bar).ln()
        - par.rho_Rstar * (r_star_lag / rstar_bar).ln()
        - eps[shock::EPS_RSTAR];
    res[48] = (y_co / par.Ybar_Co).ln()
        - par.rho_yCo * (y_co_lag / par.Ybar_Co).ln()
        - eps[shock::EPS_C];
    res[49] = (da - par.DeltaA_bar) - par.rho_A * (da_lag - par.DeltaA_bar) - eps[shock::EPS_A];

    // ---- Welfare recursions (2) -------------------------------------------------------
    // the (β/(1−β))·ΔA_{t+1} term restores the discounted trend-growth
    // contribution lost in deflation
    let growth_utility = beta / (1.0 - beta) * da_next;
    res[50] = v_r
        - c_r.ln()
        + par.chi_R * l_r.powf(1.0 + par.varphi) / (1.0 + par.varphi)
        - par.utility_const
        - growth_utility
        - beta * v_r_next;
    res[51] = v_h
        - c_h.ln()
        + par.chi_H * l_h.powf(1.0 + par.varphi) / (1.0 + par.varphi)
        - par.utility_const
        - growth_utility
        - beta * v_h_next;

    for (idx, r) in res.iter().enumerate() {
        if !r.is_finite() {
            return Err(ModelError::Domain {
                what: crate::vectors::EQUATIONS[idx],
                value: *r,
            });
        }
    }
    Ok(res)
}

/// Gross domestic product at date-t relative prices: non-commodity value
/// added plus the commodity endowment's value.
pub fn gdp(y_curr: &[f64]) -> f64 {
    y_curr[var::Y] + y_curr[var::P_CO] * y_curr[var::Z] * y_curr[var::Y_CO]
}

/// The Ricardian household's flow budget residual, with the Ricardian
/// lump-sum tax read off the consolidated government budget. At any point
/// satisfying the hand-to-mouth budget, market clearing, the demand
/// schedules, and the balance of payments, this is zero up to rounding —
/// the Walras redundancy of the one dropped budget constraint.
pub fn walras_residual(par: &ModelParameters, pt: &StackedPoint) -> Result<f64, ModelError> {
    if !par.is_calibrated() {
        return Err(ModelError::NotCalibrated("tau_H_bar"));
    }
    let yc = &pt.y_curr;
    let yp = &pt.y_prev;
    let lam = par.lambda_R;
    let nu = par.nu_subsidy;
    let growth = yc[var::DA].exp();

    // government: spending + employment subsidy financed by commodity
    // revenue and lump-sum taxes; the Ricardian tax balances the budget
    let outlays = yc[var::G] * yc[var::Z] + nu * yc[var::W] * yc[var::L];
    let commodity_revenue = yc[var::P_CO] * yc[var::Z] * yc[var::Y_CO];
    let tax_r_total = outlays - commodity_revenue - (1.0 - lam) * par.tau_H_bar;

    // firm profits: revenue net of subsidized wages and capital rental
    let rental_bill = yc[var::R_RENT] * yp[var::K] / growth;
    let profits = yc[var::Y] - (1.0 - nu) * yc[var::W] * yc[var::L] - rental_bill;

    // Ricardian uses minus resources (aggregate over the λ-measure)
    let nfa_return = yp[var::R_STAR] * yc[var::S] / (yc[var::PI] * growth) * yp[var::F_O];
    let uses = lam * yc[var::P_CR] * yc[var::C_R] + yc[var::P_I] * yc[var::I]
        + yc[var::D_STAR]
        + tax_r_total;
    let resources = lam * yc[var::W] * yc[var::L_R] + rental_bill + nfa_return + profits;
    Ok(uses - resources)
}
