//! Variable, shock, and equation catalogues.
//!
//! Everything downstream (residuals, Jacobians, the QZ solver, simulation,
//! CSV headers) indexes into vectors laid out here, so the ordering in this
//! file is the single source of truth. All quantities are deflated by the
//! productivity trend (flows dated t by A_t, the capital stock k_{t-1} by
//! A_{t-1}) and all prices are relative to the domestic final good.

/// Indices of the endogenous variables. The mnemonic scheme: `c_*` per-capita
/// consumption objects, `p_*` relative prices, `pi_*` gross inflation rates,
/// `l_*` hours, capital-letter suffixes R/H for the Ricardian and
/// hand-to-mouth household types.
pub mod var {
    pub const C_R: usize = 0; // Ricardian consumption bundle
    pub const C_H: usize = 1; // hand-to-mouth consumption bundle
    pub const L_R: usize = 2; // Ricardian hours
    pub const L_H: usize = 3; // hand-to-mouth hours
    pub const L: usize = 4; // aggregate hours
    pub const W: usize = 5; // real wage
    pub const K: usize = 6; // capital stock (end of period)
    pub const I: usize = 7; // investment
    pub const Y: usize = 8; // non-commodity gross output
    pub const P_STAR: usize = 9; // Calvo price-dispersion index
    pub const CALVO_K: usize = 10; // Calvo numerator recursion
    pub const CALVO_F: usize = 11; // Calvo denominator recursion
    pub const MC: usize = 12; // real marginal cost
    pub const PI: usize = 13; // domestic final-good inflation
    pub const PI_N: usize = 14; // non-commodity bundle inflation
    pub const PI_CO: usize = 15; // commodity-price inflation
    pub const PI_CR: usize = 16; // Ricardian CPI inflation
    pub const PI_CH: usize = 17; // hand-to-mouth CPI inflation
    pub const P_N: usize = 18; // non-commodity bundle price
    pub const P_M: usize = 19; // import price
    pub const P_CO: usize = 20; // commodity price (domestic units)
    pub const P_CR: usize = 21; // Ricardian CPI (average, incl. subsistence)
    pub const P_CH: usize = 22; // hand-to-mouth CPI
    pub const P_X: usize = 23; // terms of trade (export price in f.c.)
    pub const P_I: usize = 24; // investment bundle price
    pub const P_K: usize = 25; // shadow price of installed capital
    pub const Q: usize = 26; // real exchange rate
    pub const S: usize = 27; // gross nominal depreciation rate
    pub const S_TILDE: usize = 28; // detrended nominal exchange-rate level
    pub const R_D: usize = 29; // gross nominal policy rate
    pub const R_K: usize = 30; // gross nominal return on capital
    pub const R_RENT: usize = 31; // real capital rental rate
    pub const D_STAR: usize = 32; // net foreign assets (household side)
    pub const F_O: usize = 33; // net foreign assets (balance-of-payments side)
    pub const Z: usize = 34; // sluggish scale factor Z_t/A_t
    pub const G: usize = 35; // government expenditure (per unit of z)
    pub const X: usize = 36; // non-commodity exports
    pub const C_CO_R: usize = 37; // Ricardian commodity consumption
    pub const C_N_R: usize = 38; // Ricardian non-commodity bundle
    pub const C_D_R: usize = 39; // Ricardian domestic-good consumption
    pub const C_F_R: usize = 40; // Ricardian imported-good consumption
    pub const C_CO_H: usize = 41; // hand-to-mouth commodity consumption
    pub const C_N_H: usize = 42; // hand-to-mouth non-commodity bundle
    pub const C_D_H: usize = 43; // hand-to-mouth domestic-good consumption
    pub const C_F_H: usize = 44; // hand-to-mouth imported-good consumption
    pub const C_N: usize = 45; // aggregate non-commodity consumption
    pub const P_CO_STAR: usize = 46; // world commodity price (AR state)
    pub const R_STAR: usize = 47; // world interest rate (AR state)
    pub const Y_CO: usize = 48; // commodity endowment (AR state)
    pub const DA: usize = 49; // productivity growth ΔA_t (AR state)
    pub const V_R: usize = 50; // Ricardian welfare recursion
    pub const V_H: usize = 51; // hand-to-mouth welfare recursion
}

/// Indices of the shock innovations.
pub mod shock {
    pub const EPS_P: usize = 0; // world commodity price
    pub const EPS_RSTAR: usize = 1; // world interest rate
    pub const EPS_R: usize = 2; // domestic monetary policy
    pub const EPS_C: usize = 3; // commodity endowment
    pub const EPS_A: usize = 4; // productivity growth
}

pub const N_ENDO: usize = 52;
pub const N_SHOCK: usize = 5;

/// Timing classification, declared per variable (never inferred). Used for
/// diagnostics and the Blanchard-Kahn report; the solver itself works on the
/// full stacked system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarClass {
    /// Lagged value enters at least one equilibrium condition.
    Predetermined,
    /// Expected t+1 value enters at least one condition (and no lag does).
    NonPredetermined,
    /// Appears only at time t.
    Static,
}

/// How a variable should be reported in impulse-response output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IrfUnit {
    /// 100 × deviation / steady state (percent).
    PctOfSs,
    /// 400 × log deviation (annualized percentage points; gross rates).
    AnnualizedPp,
    /// 100 × log deviation (percent; the exchange-rate level).
    LogPct,
    /// Raw deviation (welfare recursions, net foreign assets).
    Raw,
}

pub struct VarDef {
    pub name: &'static str,
    pub class: VarClass,
    pub unit: IrfUnit,
}

use IrfUnit::*;
use VarClass::*;

/// The endogenous catalogue, in index order. `debug_assert`s in
/// `ModelVectors::new` keep this table aligned with the `var` constants.
pub const ENDOGENOUS: [VarDef; N_ENDO] = [
    VarDef { name: "c_R", class: NonPredetermined, unit: PctOfSs },
    VarDef { name: "c_H", class: Static, unit: PctOfSs },
    VarDef { name: "l_R", class: Static, unit: PctOfSs },
    VarDef { name: "l_H", class: Static, unit: PctOfSs },
    VarDef { name: "l", class: Static, unit: PctOfSs },
    VarDef { name: "w", class: Static, unit: PctOfSs },
    VarDef { name: "k", class: Predetermined, unit: PctOfSs },
    VarDef { name: "i", class: Predetermined, unit: PctOfSs },
    VarDef { name: "y", class: Static, unit: PctOfSs },
    VarDef { name: "p_star", class: Predetermined, unit: PctOfSs },
    VarDef { name: "calvo_K", class: NonPredetermined, unit: PctOfSs },
    VarDef { name: "calvo_F", class: NonPredetermined, unit: PctOfSs },
    VarDef { name: "mc", class: Static, unit: PctOfSs },
    VarDef { name: "pi", class: NonPredetermined, unit: AnnualizedPp },
    VarDef { name: "pi_N", class: Static, unit: AnnualizedPp },
    VarDef { name: "pi_Co", class: Static, unit: AnnualizedPp },
    VarDef { name: "pi_cR", class: NonPredetermined, unit: AnnualizedPp },
    VarDef { name: "pi_cH", class: Static, unit: AnnualizedPp },
    VarDef { name: "p_N", class: Predetermined, unit: PctOfSs },
    VarDef { name: "p_m", class: Static, unit: PctOfSs },
    VarDef { name: "p_Co", class: Predetermined, unit: PctOfSs },
    VarDef { name: "p_cR", class: Predetermined, unit: PctOfSs },
    VarDef { name: "p_cH", class: Predetermined, unit: PctOfSs },
    VarDef { name: "p_x", class: Static, unit: PctOfSs },
    VarDef { name: "p_I", class: Static, unit: PctOfSs },
    VarDef { name: "p_k", class: Predetermined, unit: PctOfSs },
    VarDef { name: "q", class: Predetermined, unit: PctOfSs },
    VarDef { name: "s", class: NonPredetermined, unit: AnnualizedPp },
    VarDef { name: "s_tilde", class: Predetermined, unit: LogPct },
    VarDef { name: "R_d", class: Predetermined, unit: AnnualizedPp },
    VarDef { name: "R_k", class: NonPredetermined, unit: AnnualizedPp },
    VarDef { name: "r_rent", class: Static, unit: PctOfSs },
    VarDef { name: "d_star", class: Static, unit: Raw },
    VarDef { name: "f_O", class: Predetermined, unit: Raw },
    VarDef { name: "z", class: Predetermined, unit: PctOfSs },
    VarDef { name: "g", class: Static, unit: PctOfSs },
    VarDef { name: "x", class: Static, unit: PctOfSs },
    VarDef { name: "c_Co_R", class: Static, unit: PctOfSs },
    VarDef { name: "c_N_R", class: Static, unit: PctOfSs },
    VarDef { name: "c_D_R", class: Static, unit: PctOfSs },
    VarDef { name: "c_F_R", class: Static, unit: PctOfSs },
    VarDef { name: "c_Co_H", class: Static, unit: PctOfSs },
    VarDef { name: "c_N_H", class: Static, unit: PctOfSs },
    VarDef { name: "c_D_H", class: Static, unit: PctOfSs },
    VarDef { name: "c_F_H", class: Static, unit: PctOfSs },
    VarDef { name: "c_N", class: Static, unit: PctOfSs },
    VarDef { name: "P_Co_star", class: Predetermined, unit: PctOfSs },
    VarDef { name: "R_star", class: Predetermined, unit: AnnualizedPp },
    VarDef { name: "y_Co", class: Predetermined, unit: PctOfSs },
    VarDef { name: "dA", class: Predetermined, unit: Raw },
    VarDef { name: "V_R", class: NonPredetermined, unit: Raw },
    VarDef { name: "V_H", class: NonPredetermined, unit: Raw },
];

pub const SHOCKS: [&str; N_SHOCK] = ["eps_P", "eps_Rstar", "eps_R", "eps_C", "eps_A"];

/// Equation identifiers, in residual order. Groupings follow the
/// equilibrium-condition catalogue: Calvo pricing (5), Ricardian Euler
/// equations (3), production & clearing (3), price relationships (5),
/// inflation relationships (4), demand schedules (4+4), exchange-rate
/// conditions (3), investment (5), labor & exports (4), scale factor (1),
/// external balance (2), policy (2), hand-to-mouth budget (1), exogenous
/// AR(1) laws (4), welfare recursions (2).
pub const EQUATIONS: [&str; N_ENDO] = [
    "calvo_K_recursion",
    "calvo_F_recursion",
    "calvo_reset_ratio",
    "price_dispersion",
    "marginal_cost",
    "euler_bond",
    "euler_foreign",
    "euler_capital",
    "production",
    "clearing_domestic",
    "aggregation_c_N",
    "price_index_N",
    "price_import",
    "price_commodity",
    "price_cpi_R",
    "price_cpi_H",
    "inflation_N",
    "inflation_Co",
    "inflation_cpi_R",
    "inflation_cpi_H",
    "demand_Co_R",
    "demand_N_R",
    "demand_D_R",
    "demand_F_R",
    "demand_Co_H",
    "demand_N_H",
    "demand_D_H",
    "demand_F_H",
    "terms_of_trade",
    "rer_evolution",
    "depreciation_map",
    "tobin_q",
    "capital_accumulation",
    "rental_rate",
    "capital_return",
    "price_index_I",
    "labor_aggregation",
    "labor_supply_R",
    "labor_supply_H",
    "export_demand",
    "scale_factor",
    "balance_of_payments",
    "nfa_consistency",
    "taylor_rule",
    "fiscal_rule",
    "budget_hand_to_mouth",
    "ar_commodity_price",
    "ar_world_rate",
    "ar_endowment",
    "ar_productivity",
    "welfare_R",
    "welfare_H",
];

/// Index maps plus name-based lookup. Cheap to construct; treat as immutable.
pub struct ModelVectors {
    pub endogenous_names: Vec<&'static str>,
    pub shock_names: Vec<&'static str>,
    pub equation_names: Vec<&'static str>,
}

impl ModelVectors {
    pub fn new() -> Self {
        debug_assert_eq!(ENDOGENOUS[var::C_R].name, "c_R");
        debug_assert_eq!(ENDOGENOUS[var::P_STAR].name, "p_star");
        debug_assert_eq!(ENDOGENOUS[var::S_TILDE].name, "s_tilde");
        debug_assert_eq!(ENDOGENOUS[var::F_O].name, "f_O");
        debug_assert_eq!(ENDOGENOUS[var::P_CO_STAR].name, "P_Co_star");
        debug_assert_eq!(ENDOGENOUS[var::V_H].name, "V_H");
        ModelVectors {
            endogenous_names: ENDOGENOUS.iter().map(|v| v.name).collect(),
            shock_names: SHOCKS.to_vec(),
            equation_names: EQUATIONS.to_vec(),
        }
    }

    pub fn n_endo(&self) -> usize {
        N_ENDO
    }

    pub fn n_shock(&self) -> usize {
        N_SHOCK
    }

    pub fn endo_index(&self, name: &str) -> Option<usize> {
        self.endogenous_names.iter().position(|n| *n == name)
    }

    pub fn shock_index(&self, name: &str) -> Option<usize> {
        self.shock_names.iter().position(|n| *n == name)
    }

    pub fn class(&self, idx: usize) -> VarClass {
        ENDOGENOUS[idx].class
    }

    pub fn unit(&self, idx: usize) -> IrfUnit {
        ENDOGENOUS[idx].unit
    }

    pub fn predetermined_indices(&self) -> Vec<usize> {
        (0..N_ENDO)
            .filter(|&i| ENDOGENOUS[i].class == VarClass::Predetermined)
            .collect()
    }
}

impl Default for ModelVectors {
    fn default() -> Self {
        Self::new()
    }
}

/// One evaluation point of the stacked system: the model's equilibrium
/// conditions relate three consecutive dates plus the date-t innovations,
/// with t+1 values at their certainty-equivalent expectation point.
#[derive(Debug, Clone)]
pub struct StackedPoint {
    pub y_prev: Vec<f64>,
    pub y_curr: Vec<f64>,
    pub y_next: Vec<f64>,
    pub eps: Vec<f64>,
}

impl StackedPoint {
    /// Replicates one vector at all three dates with zero innovations — the
    /// layout of a steady state.
    pub fn stationary(y: &[f64]) -> Self {
        assert_eq!(y.len(), N_ENDO);
        StackedPoint {
            y_prev: y.to_vec(),
            y_curr: y.to_vec(),
            y_next: y.to_vec(),
            eps: vec![0.0; N_SHOCK],
        }
    }
}
