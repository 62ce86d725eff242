//! Rational-expectations perturbation solver: first order (QZ / generalized
//! Schur with stable-first ordering) and second order (Sylvester-type
//! systems for the quadratic coefficients, then the variance correction).
//!
//! The model is kept in the stacked form
//! `E_t[f(y_{t−1}, y_t, y_{t+1}, ε_t)] = 0` with Jacobian blocks
//! `A = ∂f/∂y_{t+1}`, `B = ∂f/∂y_t`, `C = ∂f/∂y_{t−1}`, `D = ∂f/∂ε`.
//! All endogenous variables are carried in the state, so the first-order
//! solution is `dy_t = T·dy_{t−1} + R·ε_t`, found from the 2n companion
//! pencil and certified by the solvent property `‖A T² + B T + C‖ < 1e−8`.
//!
//! At second order the policy is written over the extended state
//! `x̃ = [dy_{t−1}; ε_t]`:
//!
//!   `dy_t = T̃ x̃ + ½ x̃ᵀ G_xx x̃ + ½ G_ss σ²`,  `T̃ = [T R]`,
//!
//! which turns the cross (state × innovation) and innovation-quadratic
//! coefficients into blocks of one symmetric `G_xx` and yields a single
//! generalized Sylvester equation, solved column-wise on the complex Schur
//! form of the extended transition.

use crate::diff::DerivativeBundle;
use crate::linalg::{
    lu_factor, schur_complex, zlu_factor, C64, LinAlgError, Mat, ZMat,
};
use crate::params::ModelParameters;
use crate::vectors::{ModelVectors, VarClass, N_ENDO, N_SHOCK};
use thiserror::Error;

/// Moduli within this distance of the unit circle are classified as
/// non-stable (conservative tie handling), so an exact unit root is a
/// Blanchard-Kahn failure rather than a 50/50 rounding coin flip.
const UNIT_CIRCLE_BAND: f64 = 1e-9;

/// First-order certification bound on the solvent and impact residuals.
const FIRST_ORDER_BOUND: f64 = 1e-8;

/// Second-order certification bound on the plugged-back expansion.
const SECOND_ORDER_BOUND: f64 = 1e-7;

/// Near-unit-root advisory band (excluding the built-in scale root).
const NEAR_UNIT_LO: f64 = 0.999;
const NEAR_UNIT_HI: f64 = 1.001;

#[derive(Debug, Error)]
pub enum PerturbationError {
    #[error(
        "Blanchard-Kahn violation: {stable} stable generalized eigenvalues, \
         {required} required (too few — explosive dynamics; policy point \
         tau_C = {tau_c}, phi_s = {phi_s}).{diagnostic}"
    )]
    BKViolationTooFew {
        stable: usize,
        required: usize,
        tau_c: f64,
        phi_s: f64,
        diagnostic: String,
    },
    #[error(
        "Blanchard-Kahn violation: {stable} stable generalized eigenvalues, \
         {required} required (too many — indeterminacy; policy point \
         tau_C = {tau_c}, phi_s = {phi_s}).{diagnostic}"
    )]
    BKViolationTooMany {
        stable: usize,
        required: usize,
        tau_c: f64,
        phi_s: f64,
        diagnostic: String,
    },
    #[error(
        "rank condition failed: the stable subspace does not map onto the \
         lagged variables (Z11 singular) — no unique saddle path"
    )]
    RankCondition(#[source] LinAlgError),
    #[error(
        "transition matrix has spectral radius {spectral_radius:.12} — \
         deviations are not stationary despite the eigenvalue count"
    )]
    EffectiveUnitRoot { spectral_radius: f64 },
    #[error("{what} residual {residual:.3e} exceeds the certification bound {bound:.1e}")]
    CertificationFailed {
        what: &'static str,
        residual: f64,
        bound: f64,
    },
    #[error(
        "singular resolvent in the {context} — the second-order linear system \
         has no unique solution (typically a unit root)"
    )]
    SingularSylvester {
        context: &'static str,
        #[source]
        source: LinAlgError,
    },
    #[error("derivative bundle carries no Hessian — call hessians(), not jacobians()")]
    HessianMissing,
    #[error("derivative bundle contains non-finite entries")]
    NonFiniteInput,
    #[error(transparent)]
    LinAlg(#[from] LinAlgError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolverWarning {
    /// A generalized eigenvalue modulus inside (0.999, 1.001) that is not
    /// the built-in commodity-scale root.
    NearUnitRoot { modulus: f64 },
}

/// Certified linear policy `dy_t = T dy_{t−1} + R ε_t` plus the eigenvalue
/// report from the QZ step.
#[derive(Debug, Clone)]
pub struct FirstOrderSolution {
    pub t: Mat,
    pub r: Mat,
    /// Moduli of all generalized eigenvalues of the companion pencil,
    /// ascending; infinite roots come out as `f64::INFINITY`.
    pub eigen_moduli: Vec<f64>,
    pub n_stable: usize,
    pub n_unstable: usize,
    pub warnings: Vec<SolverWarning>,
    /// max(‖A T² + B T + C‖_max, ‖(A T + B) R + D‖_max)
    pub lin_residual: f64,
    pub spectral_radius: f64,
}

/// Second-order policy coefficients over the extended state `[dy_{t−1}; ε_t]`.
#[derive(Debug, Clone)]
pub struct SecondOrderSolution {
    pub first: FirstOrderSolution,
    /// One symmetric (n+n_ε)×(n+n_ε) matrix per endogenous variable.
    pub g_xx: Vec<Mat>,
    /// Variance correction: the σ²-coefficient vector (enters as ½·G_ss).
    pub g_ss: Vec<f64>,
    pub shock_cov: Mat,
    pub sylvester_residual: f64,
    pub sigma_residual: f64,
}

impl SecondOrderSolution {
    /// Extended-state dimension n + n_ε.
    pub fn n_state(&self) -> usize {
        self.first.t.nrows + self.first.r.ncols
    }

    /// Quadratic part ½ x̃ᵀ G_xx[v] x̃ for every variable (no σ² term).
    pub fn quadratic(&self, xtilde: &[f64], out: &mut [f64]) {
        let nn = self.n_state();
        assert_eq!(xtilde.len(), nn);
        assert_eq!(out.len(), self.g_xx.len());
        for (v, g) in self.g_xx.iter().enumerate() {
            let mut acc = 0.0;
            for a in 0..nn {
                let xa = xtilde[a];
                if xa == 0.0 {
                    continue;
                }
                let row = g.row(a);
                let mut inner = 0.0;
                for b in 0..nn {
                    inner += row[b] * xtilde[b];
                }
                acc += xa * inner;
            }
            out[v] = 0.5 * acc;
        }
    }
}

/// A solution of either order, as consumed by the simulators.
#[derive(Debug, Clone)]
pub enum PerturbationSolution {
    First(FirstOrderSolution),
    Second(SecondOrderSolution),
}

impl PerturbationSolution {
    pub fn first(&self) -> &FirstOrderSolution {
        match self {
            PerturbationSolution::First(f) => f,
            PerturbationSolution::Second(s) => &s.first,
        }
    }

    pub fn order(&self) -> usize {
        match self {
            PerturbationSolution::First(_) => 1,
            PerturbationSolution::Second(_) => 2,
        }
    }
}

/// Diagonal innovation covariance from the calibrated shock scales.
pub fn shock_covariance(par: &ModelParameters) -> Mat {
    let sd = [
        par.sigma_Pco,
        par.sigma_Rstar,
        par.sigma_R,
        par.sigma_yCo,
        par.sigma_A,
    ];
    Mat::from_fn(N_SHOCK, N_SHOCK, |i, j| {
        if i == j {
            sd[i] * sd[i]
        } else {
            0.0
        }
    })
}

/// Lead/lag incidence per variable versus the declared classification —
/// attached to Blanchard-Kahn failures so misdeclared timing is visible.
fn incidence_diagnostic(d: &DerivativeBundle, v: &ModelVectors) -> String {
    let n = d.j_curr.ncols;
    let col_used = |m: &Mat, c: usize| (0..m.nrows).any(|r| m[(r, c)] != 0.0);
    let mut lagged = Vec::new();
    let mut led = Vec::new();
    let mut missing_lag = Vec::new();
    for c in 0..n {
        let name = if n == N_ENDO {
            v.endogenous_names[c]
        } else {
            "?"
        };
        let has_lag = col_used(&d.j_prev, c);
        if has_lag {
            lagged.push(name);
        }
        if col_used(&d.j_next, c) {
            led.push(name);
        }
        if n == N_ENDO && v.class(c) == VarClass::Predetermined && !has_lag {
            missing_lag.push(name);
        }
    }
    let mut s = format!(
        "\n  lagged variables ({}): {}\n  led variables ({}): {}",
        lagged.len(),
        lagged.join(", "),
        led.len(),
        led.join(", ")
    );
    if !missing_lag.is_empty() {
        s.push_str(&format!(
            "\n  declared predetermined but never lagged: {}",
            missing_lag.join(", ")
        ));
    }
    s
}

/// First-order rational-expectations solution via the ordered QZ of the
/// companion pencil, certified against the original Jacobian blocks.
pub fn solve_first_order(
    d: &DerivativeBundle,
    v: &ModelVectors,
    par: &ModelParameters,
) -> Result<FirstOrderSolution, PerturbationError> {
    let n = d.j_curr.nrows;
    assert_eq!(d.j_curr.ncols, n);
    let (a, b, c) = (&d.j_next, &d.j_curr, &d.j_prev);
    if !(a.is_finite() && b.is_finite() && c.is_finite() && d.j_eps.is_finite()) {
        return Err(PerturbationError::NonFiniteInput);
    }

    // companion pencil over s_t = [dy_{t−1}; dy_t]:
    //   [[I,0],[0,A]] s_{t+1} = [[0,I],[−C,−B]] s_t
    let two_n = 2 * n;
    let mut pa = Mat::zeros(two_n, two_n);
    let mut pb = Mat::zeros(two_n, two_n);
    for i in 0..n {
        pa[(i, i)] = 1.0;
        pb[(i, n + i)] = 1.0;
        for j in 0..n {
            pa[(n + i, n + j)] = a[(i, j)];
            pb[(n + i, j)] = -c[(i, j)];
            pb[(n + i, n + j)] = -b[(i, j)];
        }
    }

    let qz = crate::linalg::qz_ordered(&pb, &pa)?;
    let mut moduli = qz.moduli();

    // conservative classification: the open band around the unit circle
    // counts as non-stable, whichever side LAPACK's strict test put it on
    let stable = moduli.iter().filter(|&&m| m < 1.0 - UNIT_CIRCLE_BAND).count();
    let bk = |too_many: bool| {
        let diagnostic = incidence_diagnostic(d, v);
        if too_many {
            PerturbationError::BKViolationTooMany {
                stable,
                required: n,
                tau_c: par.tau_C,
                phi_s: par.phi_s,
                diagnostic,
            }
        } else {
            PerturbationError::BKViolationTooFew {
                stable,
                required: n,
                tau_c: par.tau_C,
                phi_s: par.phi_s,
                diagnostic,
            }
        }
    };
    if stable < n {
        return Err(bk(false));
    }
    if stable > n || qz.n_stable != n {
        return Err(bk(true));
    }

    // dy_t = Z21 · Z11⁻¹ · dy_{t−1} on the stable deflating subspace
    let z11t = Mat::from_fn(n, n, |i, j| qz.z[(j, i)]);
    let z21t = Mat::from_fn(n, n, |i, j| qz.z[(n + j, i)]);
    let lu_z11t = lu_factor(&z11t, "Z11 (stable-subspace rank condition)")
        .map_err(PerturbationError::RankCondition)?;
    let t = lu_z11t.solve(&z21t)?.transpose();

    // impact matrix and certification against the untransformed system
    let at_b = a.mul(&t).add(b);
    let lu_atb = lu_factor(&at_b, "A·T + B (impact system)")?;
    let r = lu_atb.solve(&d.j_eps.scale(-1.0))?;

    let solvent_res = a.mul(&t).mul(&t).add(&b.mul(&t)).add(c).max_abs();
    let impact_res = at_b.mul(&r).add(&d.j_eps).max_abs();
    let lin_residual = solvent_res.max(impact_res);
    if !(lin_residual < FIRST_ORDER_BOUND) {
        return Err(PerturbationError::CertificationFailed {
            what: "first-order (T, R)",
            residual: lin_residual,
            bound: FIRST_ORDER_BOUND,
        });
    }

    let spectral_radius = t.spectral_radius()?;
    if spectral_radius >= 1.0 - UNIT_CIRCLE_BAND {
        return Err(PerturbationError::EffectiveUnitRoot { spectral_radius });
    }

    let warnings = moduli
        .iter()
        .filter(|&&m| {
            m > NEAR_UNIT_LO && m < NEAR_UNIT_HI && (m - par.delta_Z).abs() >= 1e-6
        })
        .map(|&m| SolverWarning::NearUnitRoot { modulus: m })
        .collect();

    moduli.sort_by(|x, y| x.total_cmp(y));
    Ok(FirstOrderSolution {
        t,
        r,
        n_stable: stable,
        n_unstable: two_n - stable,
        eigen_moduli: moduli,
        warnings,
        lin_residual,
        spectral_radius,
    })
}

/// Multiply a real matrix into a complex vector: out = m · x.
fn real_mul_cvec(m: &Mat, x: &[C64]) -> Vec<C64> {
    assert_eq!(m.ncols, x.len());
    let mut out = vec![C64::ZERO; m.nrows];
    for i in 0..m.nrows {
        let row = m.row(i);
        let mut re = 0.0;
        let mut im = 0.0;
        for (j, &mij) in row.iter().enumerate() {
            if mij != 0.0 {
                re += mij * x[j].re;
                im += mij * x[j].im;
            }
        }
        out[i] = C64::new(re, im);
    }
    out
}

fn zconj(m: &ZMat) -> ZMat {
    let mut out = ZMat::zeros(m.nrows, m.ncols);
    for i in 0..m.nrows {
        for j in 0..m.ncols {
            out[(i, j)] = m[(i, j)].conj();
        }
    }
    out
}

/// Second-order coefficients by the Schmitt-Grohé–Uribe construction on the
/// extended state, plus the σ² correction; both plugged back and certified.
pub fn solve_second_order(
    d: &DerivativeBundle,
    first: &FirstOrderSolution,
    shock_cov: &Mat,
) -> Result<SecondOrderSolution, PerturbationError> {
    let hess = d.hessian.as_ref().ok_or(PerturbationError::HessianMissing)?;
    let n = first.t.nrows;
    let ne = first.r.ncols;
    let nn = n + ne;
    assert_eq!(shock_cov.nrows, ne);
    assert_eq!(shock_cov.ncols, ne);
    assert_eq!(hess.dim, 3 * n + ne);
    let (a, b) = (&d.j_next, &d.j_curr);
    let p = |i: usize, j: usize| i * nn + j;

    // extended transition M = [[T, R], [0, 0]] and policy row block T̃ = [T R]
    let t_ext = Mat::from_fn(n, nn, |i, j| {
        if j < n {
            first.t[(i, j)]
        } else {
            first.r[(i, j - n)]
        }
    });
    let m_ext = Mat::from_fn(nn, nn, |i, j| if i < n { t_ext[(i, j)] } else { 0.0 });

    // stacked-argument sensitivity to the extended state:
    // y_prev picks x, y_curr responds T̃, y_next responds T̃·M, ε picks ε
    let tm = t_ext.mul(&m_ext);
    let dim = 3 * n + ne;
    let mut z = Mat::zeros(dim, nn);
    for i in 0..n {
        z[(i, i)] = 1.0;
        for j in 0..nn {
            z[(n + i, j)] = t_ext[(i, j)];
            z[(2 * n + i, j)] = tm[(i, j)];
        }
    }
    for k in 0..ne {
        z[(3 * n + k, n + k)] = 1.0;
    }

    // model curvature contracted onto the extended state, one nn×nn
    // symmetric matrix per equation
    let htilde: Vec<Mat> = (0..n).map(|eq| hess.quad_form(eq, &z, &z)).collect();

    // The unknown solves  L·G + A·G·(M ⊗ M) = −H̃  with L = A·T + B.
    // On the complex Schur form M = U S Uᴴ the columns of Ĝ = G·(U⊗U)
    // decouple: with S upper triangular, column (i,j) only needs columns
    // (a,b) with a ≤ i, b ≤ j, so one small complex solve each suffices.
    let l = a.mul(&first.t).add(b);
    let (u, s) = schur_complex(&m_ext)?;
    let u_transpose = zconj(&u.herm());
    let hhat: Vec<ZMat> = htilde
        .iter()
        .map(|h| u_transpose.mul(&ZMat::from_real(h)).mul(&u))
        .collect();

    let mut ghat: Vec<Vec<C64>> = vec![Vec::new(); nn * nn];
    for j in 0..nn {
        for i in 0..=j {
            // accumulated influence of already-solved columns
            let mut w = vec![C64::ZERO; n];
            for acol in 0..=i {
                let s_ai = s[(acol, i)];
                if s_ai.abs() == 0.0 {
                    continue;
                }
                for bcol in 0..=j {
                    if acol == i && bcol == j {
                        continue;
                    }
                    let coef = s_ai.mul(s[(bcol, j)]);
                    if coef.abs() == 0.0 {
                        continue;
                    }
                    let g = &ghat[p(acol, bcol)];
                    for (wv, gv) in w.iter_mut().zip(g) {
                        *wv = wv.add(coef.mul(*gv));
                    }
                }
            }
            let aw = real_mul_cvec(a, &w);
            let rhs: Vec<C64> = (0..n)
                .map(|eq| hhat[eq][(i, j)].add(aw[eq]).mul(C64::new(-1.0, 0.0)))
                .collect();

            let coef_diag = s[(i, i)].mul(s[(j, j)]);
            let mut lhs = ZMat::zeros(n, n);
            for r_ in 0..n {
                for c_ in 0..n {
                    lhs[(r_, c_)] = C64::new(l[(r_, c_)], 0.0).add(coef_diag.mul(C64::new(
                        a[(r_, c_)],
                        0.0,
                    )));
                }
            }
            let lu = zlu_factor(&lhs, "quadratic-coefficient resolvent").map_err(|e| {
                PerturbationError::SingularSylvester {
                    context: "quadratic-coefficient system",
                    source: e,
                }
            })?;
            let x = lu.solve_vec(&rhs);
            ghat[p(j, i)] = x.clone();
            ghat[p(i, j)] = x;
        }
    }

    // back to the original coordinates: G_v = Ū Ĝ_v Ūᵀ, imaginary parts
    // must cancel; exact symmetry is then enforced entry-wise
    let u_conj = zconj(&u);
    let u_conj_t = u.herm();
    let mut g_xx = Vec::with_capacity(n);
    for v_ in 0..n {
        let mut gv = ZMat::zeros(nn, nn);
        for i in 0..nn {
            for j in 0..nn {
                gv[(i, j)] = ghat[p(i, j)][v_];
            }
        }
        let real = u_conj
            .mul(&gv)
            .mul(&u_conj_t)
            .real_part(1e-7)
            .map_err(PerturbationError::LinAlg)?;
        let sym = Mat::from_fn(nn, nn, |i, j| {
            if i <= j {
                0.5 * (real[(i, j)] + real[(j, i)])
            } else {
                0.5 * (real[(j, i)] + real[(i, j)])
            }
        });
        g_xx.push(sym);
    }

    // σ² correction: (A(I + T) + B)·G_ss = −A·(G_ee : Σ) − (H_u'u' : Σ)
    let mut gee_sigma = vec![0.0; n];
    for v_ in 0..n {
        let mut acc = 0.0;
        for k in 0..ne {
            for l_ in 0..ne {
                let c = shock_cov[(k, l_)];
                if c != 0.0 {
                    acc += c * g_xx[v_][(n + k, n + l_)];
                }
            }
        }
        gee_sigma[v_] = acc;
    }
    let zu: Vec<Vec<f64>> = (0..ne)
        .map(|k| {
            let mut col = vec![0.0; dim];
            for v_ in 0..n {
                col[2 * n + v_] = first.r[(v_, k)];
            }
            col
        })
        .collect();
    let mut huu_sigma = vec![0.0; n];
    for eq in 0..n {
        let mut acc = 0.0;
        for k in 0..ne {
            for l_ in 0..ne {
                let c = shock_cov[(k, l_)];
                if c != 0.0 {
                    acc += c * hess.bilinear(eq, &zu[k], &zu[l_]);
                }
            }
        }
        huu_sigma[eq] = acc;
    }
    let t_plus_i = Mat::from_fn(n, n, |i, j| first.t[(i, j)] + if i == j { 1.0 } else { 0.0 });
    let l2 = a.mul(&t_plus_i).add(b);
    let lu_l2 = lu_factor(&l2, "variance-correction resolvent").map_err(|e| {
        PerturbationError::SingularSylvester {
            context: "variance-correction system",
            source: e,
        }
    })?;
    let a_gee = a.mul_vec(&gee_sigma);
    let rhs_ss: Vec<f64> = (0..n).map(|eq| -a_gee[eq] - huu_sigma[eq]).collect();
    let g_ss = lu_l2.solve_vec(&rhs_ss)?;

    // plug-back certification of both linear systems
    let m_t = m_ext.transpose();
    let mgm: Vec<Mat> = g_xx.iter().map(|g| m_t.mul(g).mul(&m_ext)).collect();
    let mut sylvester_residual = 0.0_f64;
    for eq in 0..n {
        let mut res = htilde[eq].clone();
        for v_ in 0..n {
            let (lw, aw) = (l[(eq, v_)], a[(eq, v_)]);
            if lw == 0.0 && aw == 0.0 {
                continue;
            }
            for i in 0..nn {
                for j in 0..nn {
                    res[(i, j)] += lw * g_xx[v_][(i, j)] + aw * mgm[v_][(i, j)];
                }
            }
        }
        sylvester_residual = sylvester_residual.max(res.max_abs());
    }
    let mut sigma_residual = 0.0_f64;
    let l2_gss = l2.mul_vec(&g_ss);
    for eq in 0..n {
        sigma_residual = sigma_residual.max((l2_gss[eq] + a_gee[eq] + huu_sigma[eq]).abs());
    }
    let worst = sylvester_residual.max(sigma_residual);
    if !(worst < SECOND_ORDER_BOUND) {
        return Err(PerturbationError::CertificationFailed {
            what: "second-order expansion",
            residual: worst,
            bound: SECOND_ORDER_BOUND,
        });
    }

    Ok(SecondOrderSolution {
        first: first.clone(),
        g_xx,
        g_ss,
        shock_cov: shock_cov.clone(),
        sylvester_residual,
        sigma_residual,
    })
}
