//! Finite-difference derivatives of the stacked residual system.
//!
//! The residuals are treated as a smooth map F(y_{t−1}, y_t, y_{t+1}, ε)
//! over one stacked argument of length `STACKED_DIM`. First derivatives
//! use central differences with a per-coordinate step, each entry
//! cross-validated by one Richardson extrapolation step; second
//! derivatives use the four-point cross stencil on coordinate pairs that
//! a structural pass says can interact. Differentiation is column-wise
//! parallel (residual evaluation is pure).
//!
//! Denominators always use the actually-representable difference
//! (x+h) − (x−h) rather than 2h, which makes derivatives of linear
//! equations exact in floating point — the AR(1) innovation loadings
//! come out as exactly −1, for instance.

use crate::linalg::Mat;
use crate::model::residuals;
use crate::params::ModelParameters;
use crate::steady_state::SteadyState;
use crate::vectors::{ModelVectors, StackedPoint, EQUATIONS, N_ENDO, N_SHOCK};
use rayon::prelude::*;
use thiserror::Error;

/// Length of the stacked argument: three copies of the endogenous block
/// plus the innovations.
pub const STACKED_DIM: usize = 3 * N_ENDO + N_SHOCK;

/// First-derivative step for stacked coordinate value `x`.
fn jac_step(x: f64) -> f64 {
    (1e-7 * x.abs()).max(1e-6)
}

/// Second-derivative step; larger than the Jacobian step because the
/// four-point stencil divides rounding noise by h², not h.
fn hess_step(x: f64) -> f64 {
    (2e-4 * x.abs()).max(2e-4)
}

/// Large displacement used only to detect structural dependence; wide
/// enough to catch terms whose first derivative vanishes at the expansion
/// point (the investment adjustment cost is purely quadratic there).
fn probe_step(x: f64) -> f64 {
    (1e-2 * x.abs()).max(1e-2)
}

/// Entries whose Richardson cross-check disagrees by more than this
/// (relative, with a small absolute guard for near-zero entries) are
/// flagged.
const RICHARDSON_RTOL: f64 = 1e-5;
const RICHARDSON_ATOL: f64 = 1e-8;

/// Hessian entries below this magnitude are treated as rounding noise of
/// the stencil and dropped from the sparse storage.
const HESSIAN_DROP: f64 = 5e-8;

const MAX_STEP_SHRINKS: usize = 3;

#[derive(Debug, Error)]
pub enum DiffError {
    #[error(
        "parameters are not calibrated — solve the steady state first and \
         differentiate under its parameter set"
    )]
    Uncalibrated,
    #[error(
        "non-finite derivative at stacked coordinate {coord} ({name}) — model \
         left its domain even after {MAX_STEP_SHRINKS} step reductions"
    )]
    NonFiniteDerivative { coord: usize, name: String },
    #[error(
        "{count} Jacobian entries failed the Richardson cross-check \
         (worst: equation `{equation}`, coordinate {coord} ({name}), \
         relative disagreement {disagreement:.3e}); rerun with the \
         allow-flagged switch to downgrade this to a warning"
    )]
    RichardsonDisagreement {
        count: usize,
        equation: &'static str,
        coord: usize,
        name: String,
        disagreement: f64,
    },
}

/// A Jacobian entry whose plain central-difference estimate and Richardson
/// extrapolation disagree beyond tolerance.
#[derive(Debug, Clone)]
pub struct FdFlag {
    pub equation: usize,
    pub coordinate: usize,
    pub disagreement: f64,
}

#[derive(Debug, Clone, Default)]
pub struct DiffOptions {
    /// Keep flagged entries as warnings instead of aborting.
    pub allow_flagged: bool,
}

/// Symmetric second derivatives, stored sparse per equation as
/// (a, b, value) with a ≤ b over stacked coordinates.
#[derive(Debug, Clone)]
pub struct SparseHessian {
    pub dim: usize,
    pub entries: Vec<Vec<(usize, usize, f64)>>,
}

impl SparseHessian {
    pub fn nnz(&self) -> usize {
        self.entries.iter().map(Vec::len).sum()
    }

    /// H_eq[a,b] (symmetric lookup; zero when not stored).
    pub fn value(&self, eq: usize, a: usize, b: usize) -> f64 {
        let (lo, hi) = (a.min(b), a.max(b));
        self.entries[eq]
            .binary_search_by(|probe| (probe.0, probe.1).cmp(&(lo, hi)))
            .map(|idx| self.entries[eq][idx].2)
            .unwrap_or(0.0)
    }

    /// Quadratic form Σ_{a,b} H_eq[a,b] u[a,i] v[b,j] for u: dim×p,
    /// v: dim×q, returning p×q. The off-diagonal entries contribute both
    /// orientations, so `u` and `v` may differ.
    pub fn quad_form(&self, eq: usize, u: &Mat, v: &Mat) -> Mat {
        assert_eq!(u.nrows, self.dim);
        assert_eq!(v.nrows, self.dim);
        let mut out = Mat::zeros(u.ncols, v.ncols);
        for &(a, b, h) in &self.entries[eq] {
            for i in 0..u.ncols {
                let ua_i = u[(a, i)];
                let ub_i = u[(b, i)];
                for j in 0..v.ncols {
                    let mut acc = ua_i * h * v[(b, j)];
                    if a != b {
                        acc += ub_i * h * v[(a, j)];
                    }
                    out[(i, j)] += acc;
                }
            }
        }
        out
    }

    /// Scalar contraction Σ_{a,b} H_eq[a,b] du[a] dv[b].
    pub fn bilinear(&self, eq: usize, du: &[f64], dv: &[f64]) -> f64 {
        let mut acc = 0.0;
        for &(a, b, h) in &self.entries[eq] {
            acc += h * du[a] * dv[b];
            if a != b {
                acc += h * du[b] * dv[a];
            }
        }
        acc
    }
}

/// First- and optionally second-order derivatives of the stacked residual
/// map at a point, with the per-coordinate steps actually used and any
/// Richardson flags raised along the way.
#[derive(Debug, Clone)]
pub struct DerivativeBundle {
    pub j_prev: Mat,
    pub j_curr: Mat,
    pub j_next: Mat,
    pub j_eps: Mat,
    pub steps: Vec<f64>,
    pub flags: Vec<FdFlag>,
    pub hessian: Option<SparseHessian>,
    /// Largest association-order discrepancy observed in the cross
    /// stencils before symmetrization (0 when no Hessian was computed).
    pub hessian_max_asymmetry: f64,
}

/// Lays the steady state out as the stacked argument (t−1, t, t+1 copies
/// plus zero innovations).
pub fn stack_values(values: &[f64]) -> Vec<f64> {
    assert_eq!(values.len(), N_ENDO);
    let mut x = Vec::with_capacity(STACKED_DIM);
    for _ in 0..3 {
        x.extend_from_slice(values);
    }
    x.extend_from_slice(&[0.0; N_SHOCK]);
    x
}

fn unstack(x: &[f64]) -> StackedPoint {
    StackedPoint {
        y_prev: x[..N_ENDO].to_vec(),
        y_curr: x[N_ENDO..2 * N_ENDO].to_vec(),
        y_next: x[2 * N_ENDO..3 * N_ENDO].to_vec(),
        eps: x[3 * N_ENDO..].to_vec(),
    }
}

/// Human-readable name of a stacked coordinate, e.g. `y_next[pi]`.
pub fn stacked_coord_name(coord: usize) -> String {
    let mv = ModelVectors::new();
    match coord {
        c if c < N_ENDO => format!("y_prev[{}]", mv.endogenous_names[c]),
        c if c < 2 * N_ENDO => format!("y_curr[{}]", mv.endogenous_names[c - N_ENDO]),
        c if c < 3 * N_ENDO => format!("y_next[{}]", mv.endogenous_names[c - 2 * N_ENDO]),
        c => format!("eps[{}]", mv.shock_names[c - 3 * N_ENDO]),
    }
}

/// One differentiated column: entries, the settled step, and flags.
struct Column {
    coord: usize,
    values: Vec<f64>,
    step: f64,
    flags: Vec<FdFlag>,
}

/// Central difference of one coordinate with shrink-and-retry on domain
/// failures and a Richardson cross-check per entry.
fn diff_column<F>(f: &F, x0: &[f64], n_out: usize, coord: usize) -> Result<Column, DiffError>
where
    F: Fn(&[f64]) -> Option<Vec<f64>> + Sync,
{
    let mut h = jac_step(x0[coord]);
    let mut x = x0.to_vec();

    for _shrink in 0..=MAX_STEP_SHRINKS {
        let eval = |xi: f64, x: &mut [f64]| -> Option<Vec<f64>> {
            x[coord] = xi;
            let out = f(x);
            x[coord] = x0[coord];
            out
        };
        let xp = x0[coord] + h;
        let xm = x0[coord] - h;
        let (fp, fm) = match (eval(xp, &mut x), eval(xm, &mut x)) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                h *= 0.1;
                continue;
            }
        };
        // half-step pair for the Richardson check; it lies inside
        // [xm, xp], so the domain retry above already covers it
        let xp2 = x0[coord] + 0.5 * h;
        let xm2 = x0[coord] - 0.5 * h;
        let (fp2, fm2) = match (eval(xp2, &mut x), eval(xm2, &mut x)) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                h *= 0.1;
                continue;
            }
        };

        let denom = xp - xm;
        let denom2 = xp2 - xm2;
        let mut values = Vec::with_capacity(n_out);
        let mut flags = Vec::new();
        for eq in 0..n_out {
            let d = (fp[eq] - fm[eq]) / denom;
            let d2 = (fp2[eq] - fm2[eq]) / denom2;
            let richardson = (4.0 * d2 - d) / 3.0;
            let disagreement = (d - richardson).abs();
            if disagreement > RICHARDSON_ATOL
                && disagreement > RICHARDSON_RTOL * d.abs().max(richardson.abs())
            {
                flags.push(FdFlag {
                    equation: eq,
                    coordinate: coord,
                    disagreement: disagreement / d.abs().max(richardson.abs()).max(1e-300),
                });
            }
            values.push(d);
        }
        if values.iter().any(|v| !v.is_finite()) {
            h *= 0.1;
            continue;
        }
        return Ok(Column {
            coord,
            values,
            step: h,
            flags,
        });
    }
    Err(DiffError::NonFiniteDerivative {
        coord,
        name: stacked_coord_name(coord),
    })
}

/// Dense Jacobian of `f` at `x0` over all coordinates (n_out × dim), plus
/// per-coordinate steps and flags; parallel over columns.
fn central_jacobian<F>(
    f: &F,
    x0: &[f64],
    n_out: usize,
    options: &DiffOptions,
) -> Result<(Mat, Vec<f64>, Vec<FdFlag>), DiffError>
where
    F: Fn(&[f64]) -> Option<Vec<f64>> + Sync,
{
    let dim = x0.len();
    let columns: Result<Vec<Column>, DiffError> = (0..dim)
        .into_par_iter()
        .map(|coord| diff_column(f, x0, n_out, coord))
        .collect();
    let columns = columns?;

    let mut jac = Mat::zeros(n_out, dim);
    let mut steps = vec![0.0; dim];
    let mut flags = Vec::new();
    for col in columns {
        for eq in 0..n_out {
            jac[(eq, col.coord)] = col.values[eq];
        }
        steps[col.coord] = col.step;
        flags.extend(col.flags);
    }

    if !flags.is_empty() && !options.allow_flagged {
        let worst = flags
            .iter()
            .max_by(|a, b| a.disagreement.total_cmp(&b.disagreement))
            .expect("non-empty");
        return Err(DiffError::RichardsonDisagreement {
            count: flags.len(),
            equation: EQUATIONS.get(worst.equation).copied().unwrap_or("?"),
            coord: worst.coordinate,
            name: stacked_coord_name(worst.coordinate),
            disagreement: worst.disagreement,
        });
    }
    Ok((jac, steps, flags))
}

/// Coordinates that each equation structurally depends on: nonzero
/// Jacobian entry, or any movement under a large two-sided displacement.
/// (Residual evaluation is deterministic, so equations that do not read a
/// coordinate reproduce bit-identical values and drop out exactly.)
fn participation<F>(
    f: &F,
    x0: &[f64],
    f0: &[f64],
    jac: &Mat,
) -> Result<Vec<Vec<usize>>, DiffError>
where
    F: Fn(&[f64]) -> Option<Vec<f64>> + Sync,
{
    let dim = x0.len();
    let n_out = f0.len();
    let moved: Result<Vec<Vec<bool>>, DiffError> = (0..dim)
        .into_par_iter()
        .map(|coord| {
            let mut delta = probe_step(x0[coord]);
            let mut x = x0.to_vec();
            for _ in 0..=MAX_STEP_SHRINKS {
                x[coord] = x0[coord] + delta;
                let fp = f(&x);
                x[coord] = x0[coord] - delta;
                let fm = f(&x);
                x[coord] = x0[coord];
                if let (Some(fp), Some(fm)) = (fp, fm) {
                    return Ok((0..n_out)
                        .map(|eq| {
                            jac[(eq, coord)] != 0.0 || fp[eq] != f0[eq] || fm[eq] != f0[eq]
                        })
                        .collect());
                }
                delta *= 0.1;
            }
            Err(DiffError::NonFiniteDerivative {
                coord,
                name: stacked_coord_name(coord),
            })
        })
        .collect();
    let moved = moved?;

    Ok((0..n_out)
        .map(|eq| (0..dim).filter(|&c| moved[c][eq]).collect())
        .collect())
}

/// Four-point cross stencils over co-occurring coordinate pairs; returns
/// the sparse symmetric Hessian and the largest association-order
/// discrepancy seen before symmetrization.
fn central_hessian<F>(
    f: &F,
    x0: &[f64],
    f0: &[f64],
    participants: &[Vec<usize>],
) -> Result<(SparseHessian, f64), DiffError>
where
    F: Fn(&[f64]) -> Option<Vec<f64>> + Sync,
{
    let dim = x0.len();
    let n_out = f0.len();

    // global pair list: (a, b) with a ≤ b needed by at least one equation
    let mut needed = vec![false; dim * dim];
    for coords in participants {
        for (i, &a) in coords.iter().enumerate() {
            for &b in &coords[i..] {
                needed[a * dim + b] = true;
            }
        }
    }
    let pairs: Vec<(usize, usize)> = (0..dim)
        .flat_map(|a| (a..dim).map(move |b| (a, b)))
        .filter(|&(a, b)| needed[a * dim + b])
        .collect();

    struct PairResult {
        a: usize,
        b: usize,
        values: Vec<(usize, f64)>,
        asymmetry: f64,
    }

    let results: Result<Vec<PairResult>, DiffError> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let mut scale = 1.0;
            for _ in 0..=MAX_STEP_SHRINKS {
                let ha = scale * hess_step(x0[a]);
                let hb = scale * hess_step(x0[b]);
                let mut x = x0.to_vec();
                let mut eval = |da: f64, db: f64| -> Option<Vec<f64>> {
                    x[a] = x0[a] + da;
                    x[b] += db; // `+=` so the diagonal a == b accumulates
                    let out = f(&x);
                    x[a] = x0[a];
                    x[b] = x0[b];
                    out
                };
                if a == b {
                    let (fp, fm) = match (eval(ha, 0.0), eval(-ha, 0.0)) {
                        (Some(p), Some(m)) => (p, m),
                        _ => {
                            scale *= 0.1;
                            continue;
                        }
                    };
                    let values = (0..n_out)
                        .map(|eq| (eq, (fp[eq] - 2.0 * f0[eq] + fm[eq]) / (ha * ha)))
                        .collect();
                    return Ok(PairResult {
                        a,
                        b,
                        values,
                        asymmetry: 0.0,
                    });
                }
                let stencil = (
                    eval(ha, hb),
                    eval(ha, -hb),
                    eval(-ha, hb),
                    eval(-ha, -hb),
                );
                let (fpp, fpm, fmp, fmm) = match stencil {
                    (Some(pp), Some(pm), Some(mp), Some(mm)) => (pp, pm, mp, mm),
                    _ => {
                        scale *= 0.1;
                        continue;
                    }
                };
                let denom = 4.0 * ha * hb;
                let mut values = Vec::new();
                let mut asymmetry = 0.0_f64;
                for eq in 0..n_out {
                    // both association orders — equal in exact arithmetic,
                    // so their gap measures the stencil's rounding noise
                    let o1 = (fpp[eq] - fpm[eq]) - (fmp[eq] - fmm[eq]);
                    let o2 = (fpp[eq] - fmp[eq]) - (fpm[eq] - fmm[eq]);
                    asymmetry = asymmetry.max((o1 - o2).abs() / denom);
                    values.push((eq, 0.5 * (o1 + o2) / denom));
                }
                return Ok(PairResult {
                    a,
                    b,
                    values,
                    asymmetry,
                });
            }
            Err(DiffError::NonFiniteDerivative {
                coord: a,
                name: stacked_coord_name(a),
            })
        })
        .collect();
    let results = results?;

    let mut entries = vec![Vec::new(); n_out];
    let mut max_asymmetry = 0.0_f64;
    for r in &results {
        max_asymmetry = max_asymmetry.max(r.asymmetry);
        for &(eq, v) in &r.values {
            if v.abs() > HESSIAN_DROP && participants[eq].contains(&r.a) {
                entries[eq].push((r.a, r.b, v));
            }
        }
    }
    for row in &mut entries {
        row.sort_unstable_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
    }

    Ok((SparseHessian { dim, entries }, max_asymmetry))
}

fn residual_closure<'a>(
    par: &'a ModelParameters,
) -> impl Fn(&[f64]) -> Option<Vec<f64>> + Sync + 'a {
    move |x: &[f64]| residuals(par, &unstack(x)).ok()
}

fn split_blocks(jac: &Mat) -> (Mat, Mat, Mat, Mat) {
    let n = N_ENDO;
    let block = |col0: usize, ncols: usize| {
        Mat::from_fn(jac.nrows, ncols, |r, c| jac[(r, col0 + c)])
    };
    (
        block(0, n),
        block(n, n),
        block(2 * n, n),
        block(3 * n, N_SHOCK),
    )
}

/// First derivatives of the residual system at the steady state, split
/// into lag/current/lead/innovation blocks.
pub fn jacobians(par: &ModelParameters, ss: &SteadyState) -> Result<DerivativeBundle, DiffError> {
    jacobians_with(par, ss, &DiffOptions::default())
}

pub fn jacobians_with(
    par: &ModelParameters,
    ss: &SteadyState,
    options: &DiffOptions,
) -> Result<DerivativeBundle, DiffError> {
    if !par.is_calibrated() {
        return Err(DiffError::Uncalibrated);
    }
    let x0 = stack_values(&ss.values);
    let f = residual_closure(par);
    let (jac, steps, flags) = central_jacobian(&f, &x0, N_ENDO, options)?;
    let (j_prev, j_curr, j_next, j_eps) = split_blocks(&jac);
    Ok(DerivativeBundle {
        j_prev,
        j_curr,
        j_next,
        j_eps,
        steps,
        flags,
        hessian: None,
        hessian_max_asymmetry: 0.0,
    })
}

/// First and second derivatives at the steady state.
pub fn hessians(par: &ModelParameters, ss: &SteadyState) -> Result<DerivativeBundle, DiffError> {
    hessians_with(par, ss, &DiffOptions::default())
}

pub fn hessians_with(
    par: &ModelParameters,
    ss: &SteadyState,
    options: &DiffOptions,
) -> Result<DerivativeBundle, DiffError> {
    if !par.is_calibrated() {
        return Err(DiffError::Uncalibrated);
    }
    let x0 = stack_values(&ss.values);
    let f = residual_closure(par);
    let f0 = f(&x0).expect("steady state must be inside the model domain");

    let (jac, steps, flags) = central_jacobian(&f, &x0, N_ENDO, options)?;
    let participants = participation(&f, &x0, &f0, &jac)?;
    let (hessian, max_asym) = central_hessian(&f, &x0, &f0, &participants)?;

    let (j_prev, j_curr, j_next, j_eps) = split_blocks(&jac);
    Ok(DerivativeBundle {
        j_prev,
        j_curr,
        j_next,
        j_eps,
        steps,
        flags,
        hessian: Some(hessian),
        hessian_max_asymmetry: max_asym,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::steady_state::solve_steady_state;
    use crate::vectors::{shock, var};

    fn strict() -> DiffOptions {
        DiffOptions::default()
    }

    #[test]
    fn linear_equation_is_differentiated_exactly() {
        // r = 2·x1 − x0; at the origin the stencil arithmetic is exact in
        // floating point, so the slopes must come out bit-for-bit
        let f = |x: &[f64]| Some(vec![2.0 * x[1] - x[0]]);
        let x0 = [0.0, 0.0];
        let (jac, steps, flags) = central_jacobian(&f, &x0, 1, &strict()).unwrap();
        assert_eq!(jac[(0, 0)], -1.0);
        assert_eq!(jac[(0, 1)], 2.0);
        assert!(flags.is_empty());
        assert_eq!(steps.len(), 2);

        // a linear map has no curvature: the sparse Hessian stays empty
        let f0 = f(&x0).unwrap();
        let participants = participation(&f, &x0, &f0, &jac).unwrap();
        let (h, asym) = central_hessian(&f, &x0, &f0, &participants).unwrap();
        assert_eq!(h.nnz(), 0);
        assert!(asym < 1e-7);
    }

    #[test]
    fn quadratic_slope_at_three_is_six() {
        let f = |x: &[f64]| Some(vec![x[0] * x[0]]);
        let (jac, ..) = central_jacobian(&f, &[3.0], 1, &strict()).unwrap();
        assert!((jac[(0, 0)] - 6.0).abs() < 1e-9, "slope {}", jac[(0, 0)]);
    }

    #[test]
    fn bilinear_cross_partial() {
        let f = |x: &[f64]| Some(vec![x[0] * x[1]]);
        let x0 = [1.3, -0.4];
        let f0 = f(&x0).unwrap();
        let (jac, ..) = central_jacobian(&f, &x0, 1, &strict()).unwrap();
        let participants = participation(&f, &x0, &f0, &jac).unwrap();
        let (h, asym) = central_hessian(&f, &x0, &f0, &participants).unwrap();
        assert!((h.value(0, 0, 1) - 1.0).abs() < 1e-6);
        assert_eq!(h.value(0, 0, 1), h.value(0, 1, 0), "symmetric lookup");
        // pure-diagonal curvature is zero and must be dropped, not stored
        assert_eq!(h.nnz(), 1);
        assert!(asym < 1e-7);
    }

    #[test]
    fn domain_failures_shrink_the_step() {
        // defined only on x > 0, differentiated very close to the boundary;
        // the default step overshoots and must shrink, after which the
        // linear slope is exact
        let f = |x: &[f64]| {
            if x[0] > 0.0 {
                Some(vec![3.0 * x[0]])
            } else {
                None
            }
        };
        let x0 = [5e-7];
        let (jac, steps, _) = central_jacobian(&f, &x0, 1, &strict()).unwrap();
        assert_eq!(jac[(0, 0)], 3.0);
        assert!(steps[0] < 1e-6, "step was not shrunk: {}", steps[0]);
    }

    #[test]
    fn unrecoverable_domain_failure_is_an_error() {
        let f = |x: &[f64]| if x[0] == 0.25 { Some(vec![1.0]) } else { None };
        match central_jacobian(&f, &[0.25], 1, &strict()) {
            Err(DiffError::NonFiniteDerivative { coord: 0, .. }) => {}
            other => panic!("expected NonFiniteDerivative, got {other:?}"),
        }
    }

    #[test]
    fn kinks_are_flagged_by_the_richardson_check() {
        // |x − c| with the kink inside the stencil: the two step sizes see
        // different slopes, so the cross-check must fire
        let f = |x: &[f64]| Some(vec![(x[0] - 3.0000005).abs()]);
        match central_jacobian(&f, &[3.0], 1, &strict()) {
            Err(DiffError::RichardsonDisagreement { count, .. }) => assert!(count >= 1),
            other => panic!("expected RichardsonDisagreement, got {other:?}"),
        }

        // the poor estimate is kept (with its flag) when downgraded
        let lenient = DiffOptions {
            allow_flagged: true,
        };
        let (_, _, flags) = central_jacobian(&f, &[3.0], 1, &lenient).unwrap();
        assert!(!flags.is_empty());
        assert!(flags[0].disagreement > 1e-5);
    }

    #[test]
    fn benchmark_jacobians_are_clean_and_structured() {
        let ss = solve_steady_state(&ModelParameters::benchmark()).unwrap();
        let bundle = jacobians(&ss.params, &ss).unwrap();
        assert!(bundle.flags.is_empty());

        // innovation loadings: −1 on the own equation at the stencil's
        // rounding floor, bit-exact 0 elsewhere (those equations never
        // read the innovation, so the stencil evaluations are identical)
        let own = [
            (shock::EPS_P, 46),
            (shock::EPS_RSTAR, 47),
            (shock::EPS_R, 43),
            (shock::EPS_C, 48),
            (shock::EPS_A, 49),
        ];
        for eq in 0..N_ENDO {
            for sh in 0..N_SHOCK {
                let got = bundle.j_eps[(eq, sh)];
                if own.contains(&(sh, eq)) {
                    assert!((got + 1.0).abs() < 1e-12, "eps loading eq {eq}: {got}");
                } else {
                    assert_eq!(got, 0.0, "eps loading eq {eq} shock {sh}");
                }
            }
        }

        // the lag block only sees predetermined-style variables: columns for
        // contemporaneous-only objects like c_R are structurally zero
        for eq in 0..N_ENDO {
            assert_eq!(bundle.j_prev[(eq, var::C_R)], 0.0);
            assert_eq!(bundle.j_prev[(eq, var::W)], 0.0);
        }
        // market clearing reads current output with unit weight
        assert!((bundle.j_curr[(9, var::Y)] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn benchmark_jacobian_matches_wide_step_richardson_oracle() {
        // independent oracle: Richardson extrapolation over steps (4h, 2h),
        // a disjoint step ladder from the bundle's (h, h/2)
        let ss = solve_steady_state(&ModelParameters::benchmark()).unwrap();
        let bundle = jacobians(&ss.params, &ss).unwrap();

        let x0 = stack_values(&ss.values);
        let f = residual_closure(&ss.params);
        let mut worst = 0.0_f64;
        for coord in 0..STACKED_DIM {
            let h = 2.0 * jac_step(x0[coord]);
            let mut x = x0.clone();
            let mut d_at = |step: f64| -> Vec<f64> {
                x[coord] = x0[coord] + step;
                let fp = f(&x).unwrap();
                x[coord] = x0[coord] - step;
                let fm = f(&x).unwrap();
                x[coord] = x0[coord];
                fp.iter()
                    .zip(&fm)
                    .map(|(p, m)| (p - m) / (2.0 * step))
                    .collect()
            };
            let d2h = d_at(2.0 * h);
            let dh = d_at(h);
            for eq in 0..N_ENDO {
                let oracle = (4.0 * dh[eq] - d2h[eq]) / 3.0;
                let got = match coord / N_ENDO {
                    0 => bundle.j_prev[(eq, coord)],
                    1 => bundle.j_curr[(eq, coord - N_ENDO)],
                    2 => bundle.j_next[(eq, coord - 2 * N_ENDO)],
                    _ => bundle.j_eps[(eq, coord - 3 * N_ENDO)],
                };
                let err = (got - oracle).abs();
                if err > 1e-8 {
                    worst = worst.max(err / oracle.abs().max(got.abs()));
                }
            }
        }
        assert!(worst < 1e-5, "worst relative disagreement {worst:.3e}");
    }

    #[test]
    fn benchmark_hessian_is_symmetric_and_matches_analytic_entries() {
        let ss = solve_steady_state(&ModelParameters::benchmark()).unwrap();
        let par = &ss.params;
        let bundle = hessians(par, &ss).unwrap();
        let h = bundle.hessian.as_ref().unwrap();
        assert!(h.nnz() > 0);
        assert!(
            bundle.hessian_max_asymmetry < 1e-7,
            "asymmetry {:.3e}",
            bundle.hessian_max_asymmetry
        );

        // scale-factor law: ∂²r/∂z_{t−1}² = −δ_Z(δ_Z − 1) z̄^{δ_Z−2} at z̄ = 1
        let z_lag = var::Z; // y_prev block offset is zero
        let analytic = -par.delta_Z * (par.delta_Z - 1.0);
        let got = h.value(40, z_lag, z_lag);
        assert!(
            (got - analytic).abs() < 1e-6,
            "z-law curvature: got {got}, want {analytic}"
        );

        // production: cross-partial in (k_{t−1}, l_t) of −p*(k/e^{ΔA})^α l^{1−α}
        let k_lag = var::K;
        let l_curr = N_ENDO + var::L;
        let (alpha, g) = (par.alpha, par.DeltaA_bar.exp());
        let (kbar, lbar) = (ss.values[var::K], ss.values[var::L]);
        let analytic = -ss.values[var::P_STAR]
            * alpha
            * (1.0 - alpha)
            * (kbar / g).powf(alpha - 1.0)
            * lbar.powf(-alpha)
            / g;
        let got = h.value(8, k_lag, l_curr);
        assert!(
            (got - analytic).abs() < 1e-6 * analytic.abs(),
            "production cross-partial: got {got}, want {analytic}"
        );

        // the adjustment cost is purely quadratic at the steady state: the
        // capital accumulation equation must carry curvature in lagged
        // investment even though its first derivative there vanishes
        // (vanishes analytically, that is — the stencil leaves an
        // O(h²·S‴) residue)
        let i_lag = var::I;
        assert!(bundle.j_prev[(32, var::I)].abs() < 1e-9);
        assert!(h.value(32, i_lag, i_lag).abs() > 1e-3);
    }

    #[test]
    fn quad_form_contracts_like_the_dense_formula() {
        let f = |x: &[f64]| {
            Some(vec![
                x[0] * x[0] + 3.0 * x[0] * x[2] - x[1] * x[2],
                x[1] * x[1] * 0.5,
            ])
        };
        let x0 = [0.4, 1.1, -0.3];
        let f0 = f(&x0).unwrap();
        let (jac, ..) = central_jacobian(&f, &x0, 2, &strict()).unwrap();
        let participants = participation(&f, &x0, &f0, &jac).unwrap();
        let (h, _) = central_hessian(&f, &x0, &f0, &participants).unwrap();

        // dense reference for equation 0: H = [[2,0,3],[0,0,-1],[3,-1,0]]
        let dense = [[2.0, 0.0, 3.0], [0.0, 0.0, -1.0], [3.0, -1.0, 0.0]];
        let u = Mat::from_rows(&[&[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0]]);
        let expect = |i: usize, j: usize| -> f64 {
            let mut acc = 0.0;
            for a in 0..3 {
                for b in 0..3 {
                    acc += dense[a][b] * u[(a, i)] * u[(b, j)];
                }
            }
            acc
        };
        let got = h.quad_form(0, &u, &u);
        for i in 0..2 {
            for j in 0..2 {
                assert!(
                    (got[(i, j)] - expect(i, j)).abs() < 1e-5,
                    "quad form ({i},{j})"
                );
            }
        }
        let du = [1.0, 2.0, -1.0];
        let bilinear = h.bilinear(0, &du, &du);
        let mut dense_bilinear = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                dense_bilinear += dense[a][b] * du[a] * du[b];
            }
        }
        assert!((bilinear - dense_bilinear).abs() < 1e-5);
    }
}
