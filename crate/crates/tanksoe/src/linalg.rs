//! Dense linear algebra kernels for the solver.
//!
//! The model is small (~50 endogenous variables, a ~100x100 QZ pencil), so
//! everything here works on plain row-major `Vec<f64>` matrices. The only
//! operations delegated to LAPACK (via OpenBLAS) are the two factorizations
//! nobody should hand-roll: the ordered generalized real Schur decomposition
//! (`dgges`, used by the rational-expectations solver) and the complex Schur
//! decomposition (`zgees`, used by the quadratic-coefficient solver).
//!
//! Row-major data is converted to column-major at the FFI boundary.

use std::fmt;
use std::ops::{Index, IndexMut};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinAlgError {
    #[error("singular matrix encountered in {context} (pivot {pivot:.3e} at column {col})")]
    Singular {
        context: &'static str,
        col: usize,
        pivot: f64,
    },
    #[error("LAPACK {routine} failed with info = {info}")]
    Lapack { routine: &'static str, info: i32 },
    #[error("non-finite value produced in {0}")]
    NonFinite(&'static str),
}

// ---------------------------------------------------------------------------
// Real matrices
// ---------------------------------------------------------------------------

/// Dense row-major matrix of `f64`.
#[derive(Clone, PartialEq)]
pub struct Mat {
    pub nrows: usize,
    pub ncols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} [", self.nrows, self.ncols)?;
        for i in 0..self.nrows.min(8) {
            write!(f, "  ")?;
            for j in 0..self.ncols.min(8) {
                write!(f, "{:>12.5e} ", self[(i, j)])?;
            }
            writeln!(f, "{}", if self.ncols > 8 { "..." } else { "" })?;
        }
        if self.nrows > 8 {
            writeln!(f, "  ...")?;
        }
        write!(f, "]")
    }
}

impl Mat {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Mat {
            nrows,
            ncols,
            data: vec![0.0; nrows * ncols],
        }
    }

    pub fn eye(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        let mut m = Mat::zeros(nrows, ncols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), ncols, "ragged rows");
            m.data[i * ncols..(i + 1) * ncols].copy_from_slice(r);
        }
        m
    }

    pub fn from_fn(nrows: usize, ncols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Mat::zeros(nrows, ncols);
        for i in 0..nrows {
            for j in 0..ncols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.ncols, self.nrows, |i, j| self[(j, i)])
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.ncols, other.nrows, "matmul dimension mismatch");
        let mut out = Mat::zeros(self.nrows, other.ncols);
        // ikj loop order keeps the inner traversal contiguous for row-major data.
        for i in 0..self.nrows {
            for k in 0..self.ncols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let src = &other.data[k * other.ncols..(k + 1) * other.ncols];
                let dst = &mut out.data[i * other.ncols..(i + 1) * other.ncols];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.ncols, v.len(), "matvec dimension mismatch");
        (0..self.nrows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn add(&self, other: &Mat) -> Mat {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let mut out = self.clone();
        for (d, s) in out.data.iter_mut().zip(&other.data) {
            *d += s;
        }
        out
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let mut out = self.clone();
        for (d, s) in out.data.iter_mut().zip(&other.data) {
            *d -= s;
        }
        out
    }

    pub fn scale(&self, c: f64) -> Mat {
        let mut out = self.clone();
        for d in out.data.iter_mut() {
            *d *= c;
        }
        out
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Kronecker product, row-major index convention:
    /// `(a ⊗ b)[(i1*br + i2, j1*bc + j2)] = a[(i1,j1)] * b[(i2,j2)]`.
    pub fn kron(&self, b: &Mat) -> Mat {
        let mut out = Mat::zeros(self.nrows * b.nrows, self.ncols * b.ncols);
        for i1 in 0..self.nrows {
            for j1 in 0..self.ncols {
                let a = self[(i1, j1)];
                if a == 0.0 {
                    continue;
                }
                for i2 in 0..b.nrows {
                    for j2 in 0..b.ncols {
                        out[(i1 * b.nrows + i2, j1 * b.ncols + j2)] = a * b[(i2, j2)];
                    }
                }
            }
        }
        out
    }

    /// Solve `self * X = rhs` by LU with partial pivoting.
    pub fn solve(&self, rhs: &Mat, context: &'static str) -> Result<Mat, LinAlgError> {
        lu_factor(self, context)?.solve(rhs)
    }

    pub fn inverse(&self, context: &'static str) -> Result<Mat, LinAlgError> {
        self.solve(&Mat::eye(self.nrows), context)
    }

    /// Spectral radius estimate via the eigenvalue moduli of the complex
    /// Schur form (exact up to LAPACK accuracy).
    pub fn spectral_radius(&self) -> Result<f64, LinAlgError> {
        let (_, s) = schur_complex(self)?;
        let mut rho: f64 = 0.0;
        for i in 0..s.nrows {
            rho = rho.max(s[(i, i)].abs());
        }
        Ok(rho)
    }

    fn to_col_major(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.nrows * self.ncols];
        for i in 0..self.nrows {
            for j in 0..self.ncols {
                v[j * self.nrows + i] = self[(i, j)];
            }
        }
        v
    }

    fn from_col_major(nrows: usize, ncols: usize, v: &[f64]) -> Mat {
        Mat::from_fn(nrows, ncols, |i, j| v[j * nrows + i])
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.nrows && j < self.ncols);
        &self.data[i * self.ncols + j]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.nrows && j < self.ncols);
        &mut self.data[i * self.ncols + j]
    }
}

// ---------------------------------------------------------------------------
// LU with partial pivoting
// ---------------------------------------------------------------------------

pub struct LuFactors {
    lu: Mat,
    piv: Vec<usize>,
    context: &'static str,
}

pub fn lu_factor(a: &Mat, context: &'static str) -> Result<LuFactors, LinAlgError> {
    assert_eq!(a.nrows, a.ncols, "LU needs a square matrix");
    let n = a.nrows;
    let mut lu = a.clone();
    let mut piv: Vec<usize> = (0..n).collect();
    for col in 0..n {
        // pivot search
        let (mut p, mut best) = (col, lu[(col, col)].abs());
        for r in col + 1..n {
            let v = lu[(r, col)].abs();
            if v > best {
                best = v;
                p = r;
            }
        }
        if best < 1e-300 || !best.is_finite() {
            return Err(LinAlgError::Singular {
                context,
                col,
                pivot: best,
            });
        }
        if p != col {
            piv.swap(p, col);
            for j in 0..n {
                let tmp = lu[(p, j)];
                lu[(p, j)] = lu[(col, j)];
                lu[(col, j)] = tmp;
            }
        }
        let d = lu[(col, col)];
        for r in col + 1..n {
            let f = lu[(r, col)] / d;
            lu[(r, col)] = f;
            if f != 0.0 {
                for j in col + 1..n {
                    let s = lu[(col, j)];
                    lu[(r, j)] -= f * s;
                }
            }
        }
    }
    Ok(LuFactors { lu, piv, context })
}

impl LuFactors {
    pub fn solve_vec(&self, b: &[f64]) -> Result<Vec<f64>, LinAlgError> {
        let n = self.lu.nrows;
        assert_eq!(b.len(), n);
        let mut x: Vec<f64> = self.piv.iter().map(|&p| b[p]).collect();
        // forward (unit lower)
        for i in 1..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s;
        }
        // backward (upper)
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s / self.lu[(i, i)];
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(LinAlgError::NonFinite(self.context));
        }
        Ok(x)
    }

    pub fn solve(&self, rhs: &Mat) -> Result<Mat, LinAlgError> {
        assert_eq!(rhs.nrows, self.lu.nrows);
        let mut out = Mat::zeros(rhs.nrows, rhs.ncols);
        // column-by-column; rhs columns are independent
        let mut col = vec![0.0; rhs.nrows];
        for j in 0..rhs.ncols {
            for i in 0..rhs.nrows {
                col[i] = rhs[(i, j)];
            }
            let x = self.solve_vec(&col)?;
            for i in 0..rhs.nrows {
                out[(i, j)] = x[i];
            }
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// Complex matrices (needed only around zgees)
// ---------------------------------------------------------------------------

/// Bit-compatible with LAPACK's `complex*16`.
#[derive(Clone, Copy, PartialEq, Default)]
#[repr(C)]
pub struct C64 {
    pub re: f64,
    pub im: f64,
}

impl C64 {
    pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
    pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

    pub fn new(re: f64, im: f64) -> C64 {
        C64 { re, im }
    }

    pub fn abs(self) -> f64 {
        self.re.hypot(self.im)
    }

    pub fn conj(self) -> C64 {
        C64::new(self.re, -self.im)
    }

    pub fn add(self, o: C64) -> C64 {
        C64::new(self.re + o.re, self.im + o.im)
    }

    pub fn sub(self, o: C64) -> C64 {
        C64::new(self.re - o.re, self.im - o.im)
    }

    pub fn mul(self, o: C64) -> C64 {
        C64::new(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )
    }

    pub fn div(self, o: C64) -> C64 {
        let d = o.re * o.re + o.im * o.im;
        C64::new(
            (self.re * o.re + self.im * o.im) / d,
            (self.im * o.re - self.re * o.im) / d,
        )
    }
}

impl fmt::Debug for C64 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.5e}{:+.5e}i", self.re, self.im)
    }
}

/// Dense row-major complex matrix.
#[derive(Clone)]
pub struct ZMat {
    pub nrows: usize,
    pub ncols: usize,
    data: Vec<C64>,
}

impl ZMat {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        ZMat {
            nrows,
            ncols,
            data: vec![C64::ZERO; nrows * ncols],
        }
    }

    pub fn from_real(m: &Mat) -> Self {
        let mut z = ZMat::zeros(m.nrows, m.ncols);
        for i in 0..m.nrows {
            for j in 0..m.ncols {
                z[(i, j)] = C64::new(m[(i, j)], 0.0);
            }
        }
        z
    }

    /// Real part, with a check that the imaginary residue is negligible.
    pub fn real_part(&self, tol: f64) -> Result<Mat, LinAlgError> {
        let mut m = Mat::zeros(self.nrows, self.ncols);
        let mut scale: f64 = 1.0;
        for v in &self.data {
            scale = scale.max(v.re.abs());
        }
        for i in 0..self.nrows {
            for j in 0..self.ncols {
                let v = self[(i, j)];
                if v.im.abs() > tol * scale.max(1.0) {
                    return Err(LinAlgError::NonFinite(
                        "complex result with non-negligible imaginary part",
                    ));
                }
                m[(i, j)] = v.re;
            }
        }
        Ok(m)
    }

    /// Conjugate transpose.
    pub fn herm(&self) -> ZMat {
        let mut out = ZMat::zeros(self.ncols, self.nrows);
        for i in 0..self.nrows {
            for j in 0..self.ncols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn mul(&self, other: &ZMat) -> ZMat {
        assert_eq!(self.ncols, other.nrows, "zmatmul dimension mismatch");
        let mut out = ZMat::zeros(self.nrows, other.ncols);
        for i in 0..self.nrows {
            for k in 0..self.ncols {
                let a = self[(i, k)];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for j in 0..other.ncols {
                    out[(i, j)] = out[(i, j)].add(a.mul(other[(k, j)]));
                }
            }
        }
        out
    }

    fn to_col_major(&self) -> Vec<C64> {
        let mut v = vec![C64::ZERO; self.nrows * self.ncols];
        for i in 0..self.nrows {
            for j in 0..self.ncols {
                v[j * self.nrows + i] = self[(i, j)];
            }
        }
        v
    }

    fn from_col_major(nrows: usize, ncols: usize, v: &[C64]) -> ZMat {
        let mut m = ZMat::zeros(nrows, ncols);
        for i in 0..nrows {
            for j in 0..ncols {
                m[(i, j)] = v[j * nrows + i];
            }
        }
        m
    }
}

impl Index<(usize, usize)> for ZMat {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.ncols + j]
    }
}

impl IndexMut<(usize, usize)> for ZMat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.ncols + j]
    }
}

/// Complex LU with partial pivoting; same layout as the real `LuFactors`.
pub struct ZLuFactors {
    lu: ZMat,
    perm: Vec<usize>,
}

pub fn zlu_factor(a: &ZMat, context: &'static str) -> Result<ZLuFactors, LinAlgError> {
    assert_eq!(a.nrows, a.ncols, "LU of a non-square matrix");
    let n = a.nrows;
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let mut p = k;
        let mut best = lu[(k, k)].abs();
        for i in (k + 1)..n {
            let cand = lu[(i, k)].abs();
            if cand > best {
                best = cand;
                p = i;
            }
        }
        if !(best > 0.0) || !best.is_finite() {
            return Err(LinAlgError::Singular {
                context,
                col: k,
                pivot: best,
            });
        }
        if p != k {
            for j in 0..n {
                let tmp = lu[(k, j)];
                lu[(k, j)] = lu[(p, j)];
                lu[(p, j)] = tmp;
            }
            perm.swap(k, p);
        }
        let pivot = lu[(k, k)];
        for i in (k + 1)..n {
            let factor = lu[(i, k)].div(pivot);
            lu[(i, k)] = factor;
            for j in (k + 1)..n {
                let delta = factor.mul(lu[(k, j)]);
                lu[(i, j)] = lu[(i, j)].sub(delta);
            }
        }
    }
    Ok(ZLuFactors { lu, perm })
}

impl ZLuFactors {
    pub fn solve_vec(&self, b: &[C64]) -> Vec<C64> {
        let n = self.lu.nrows;
        assert_eq!(b.len(), n);
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            let mut acc = x[i];
            for j in 0..i {
                acc = acc.sub(self.lu[(i, j)].mul(x[j]));
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in (i + 1)..n {
                acc = acc.sub(self.lu[(i, j)].mul(x[j]));
            }
            x[i] = acc.div(self.lu[(i, i)]);
        }
        x
    }
}

// ---------------------------------------------------------------------------
// LAPACK bindings
// ---------------------------------------------------------------------------

type DggesSelect = extern "C" fn(*const f64, *const f64, *const f64) -> i32;

extern "C" {
    fn dgges_(
        jobvsl: *const u8,
        jobvsr: *const u8,
        sort: *const u8,
        selctg: Option<DggesSelect>,
        n: *const i32,
        a: *mut f64,
        lda: *const i32,
        b: *mut f64,
        ldb: *const i32,
        sdim: *mut i32,
        alphar: *mut f64,
        alphai: *mut f64,
        beta: *mut f64,
        vsl: *mut f64,
        ldvsl: *const i32,
        vsr: *mut f64,
        ldvsr: *const i32,
        work: *mut f64,
        lwork: *const i32,
        bwork: *mut i32,
        info: *mut i32,
    );

    fn zgees_(
        jobvs: *const u8,
        sort: *const u8,
        select: Option<extern "C" fn(*const C64) -> i32>,
        n: *const i32,
        a: *mut C64,
        lda: *const i32,
        sdim: *mut i32,
        w: *mut C64,
        vs: *mut C64,
        ldvs: *const i32,
        work: *mut C64,
        lwork: *const i32,
        rwork: *mut f64,
        bwork: *mut i32,
        info: *mut i32,
    );
}

/// Eigenvalue selector for the ordered QZ: keep |alpha/beta| < 1 strictly, so
/// moduli exactly on the unit circle are classified as unstable.
extern "C" fn select_inside_unit_circle(ar: *const f64, ai: *const f64, b: *const f64) -> i32 {
    unsafe {
        let (ar, ai, b) = (*ar, *ai, *b);
        i32::from(ar * ar + ai * ai < b * b)
    }
}

/// Ordered generalized real Schur decomposition of the pencil `(A, B)`:
/// `A = Q S Zᵀ`, `B = Q T Zᵀ`, generalized eigenvalues `w_j = alpha_j/beta_j`
/// (those make `A - w B` singular), reordered so all `|w| < 1` come first.
pub struct Qz {
    pub s: Mat,
    pub t: Mat,
    pub q: Mat,
    pub z: Mat,
    pub alpha_re: Vec<f64>,
    pub alpha_im: Vec<f64>,
    pub beta: Vec<f64>,
    /// Number of eigenvalues with modulus strictly below one.
    pub n_stable: usize,
}

impl Qz {
    /// Moduli of the generalized eigenvalues; `beta = 0` maps to infinity.
    pub fn moduli(&self) -> Vec<f64> {
        self.alpha_re
            .iter()
            .zip(&self.alpha_im)
            .zip(&self.beta)
            .map(|((&ar, &ai), &b)| {
                if b == 0.0 {
                    f64::INFINITY
                } else {
                    ar.hypot(ai) / b.abs()
                }
            })
            .collect()
    }
}

pub fn qz_ordered(a: &Mat, b: &Mat) -> Result<Qz, LinAlgError> {
    assert_eq!(a.nrows, a.ncols);
    assert_eq!(b.nrows, b.ncols);
    assert_eq!(a.nrows, b.nrows);
    let n = a.nrows as i32;
    let mut af = a.to_col_major();
    let mut bf = b.to_col_major();
    let mut alphar = vec![0.0; n as usize];
    let mut alphai = vec![0.0; n as usize];
    let mut beta = vec![0.0; n as usize];
    let mut vsl = vec![0.0; (n * n) as usize];
    let mut vsr = vec![0.0; (n * n) as usize];
    let mut bwork = vec![0i32; n as usize];
    let mut sdim: i32 = 0;
    let mut info: i32 = 0;

    // workspace query
    let mut work_query = [0.0f64];
    let lwork_query: i32 = -1;
    unsafe {
        dgges_(
            b"V".as_ptr(),
            b"V".as_ptr(),
            b"S".as_ptr(),
            Some(select_inside_unit_circle),
            &n,
            af.as_mut_ptr(),
            &n,
            bf.as_mut_ptr(),
            &n,
            &mut sdim,
            alphar.as_mut_ptr(),
            alphai.as_mut_ptr(),
            beta.as_mut_ptr(),
            vsl.as_mut_ptr(),
            &n,
            vsr.as_mut_ptr(),
            &n,
            work_query.as_mut_ptr(),
            &lwork_query,
            bwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(LinAlgError::Lapack {
            routine: "dgges (workspace query)",
            info,
        });
    }
    let lwork = (work_query[0] as i32).max(8 * n + 16);
    let mut work = vec![0.0f64; lwork as usize];
    unsafe {
        dgges_(
            b"V".as_ptr(),
            b"V".as_ptr(),
            b"S".as_ptr(),
            Some(select_inside_unit_circle),
            &n,
            af.as_mut_ptr(),
            &n,
            bf.as_mut_ptr(),
            &n,
            &mut sdim,
            alphar.as_mut_ptr(),
            alphai.as_mut_ptr(),
            beta.as_mut_ptr(),
            vsl.as_mut_ptr(),
            &n,
            vsr.as_mut_ptr(),
            &n,
            work.as_mut_ptr(),
            &lwork,
            bwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(LinAlgError::Lapack {
            routine: "dgges",
            info,
        });
    }
    let nu = n as usize;
    Ok(Qz {
        s: Mat::from_col_major(nu, nu, &af),
        t: Mat::from_col_major(nu, nu, &bf),
        q: Mat::from_col_major(nu, nu, &vsl),
        z: Mat::from_col_major(nu, nu, &vsr),
        alpha_re: alphar,
        alpha_im: alphai,
        beta,
        n_stable: sdim as usize,
    })
}

/// Complex Schur decomposition of a real matrix: `M = U S Uᴴ` with `S` upper
/// triangular and `U` unitary. Returns `(U, S)`.
pub fn schur_complex(m: &Mat) -> Result<(ZMat, ZMat), LinAlgError> {
    assert_eq!(m.nrows, m.ncols);
    let n = m.nrows as i32;
    let zm = ZMat::from_real(m);
    let mut af = zm.to_col_major();
    let mut w = vec![C64::ZERO; n as usize];
    let mut vs = vec![C64::ZERO; (n * n) as usize];
    let mut rwork = vec![0.0f64; n as usize];
    let mut bwork = vec![0i32; n as usize];
    let mut sdim: i32 = 0;
    let mut info: i32 = 0;

    let mut work_query = [C64::ZERO];
    let lwork_query: i32 = -1;
    unsafe {
        zgees_(
            b"V".as_ptr(),
            b"N".as_ptr(),
            None,
            &n,
            af.as_mut_ptr(),
            &n,
            &mut sdim,
            w.as_mut_ptr(),
            vs.as_mut_ptr(),
            &n,
            work_query.as_mut_ptr(),
            &lwork_query,
            rwork.as_mut_ptr(),
            bwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(LinAlgError::Lapack {
            routine: "zgees (workspace query)",
            info,
        });
    }
    let lwork = (work_query[0].re as i32).max(2 * n);
    let mut work = vec![C64::ZERO; lwork as usize];
    unsafe {
        zgees_(
            b"V".as_ptr(),
            b"N".as_ptr(),
            None,
            &n,
            af.as_mut_ptr(),
            &n,
            &mut sdim,
            w.as_mut_ptr(),
            vs.as_mut_ptr(),
            &n,
            work.as_mut_ptr(),
            &lwork,
            rwork.as_mut_ptr(),
            bwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(LinAlgError::Lapack {
            routine: "zgees",
            info,
        });
    }
    let nu = n as usize;
    Ok((
        ZMat::from_col_major(nu, nu, &vs),
        ZMat::from_col_major(nu, nu, &af),
    ))
}

// ---------------------------------------------------------------------------
// Discrete Lyapunov equation
// ---------------------------------------------------------------------------

/// Solve `X = T X Tᵀ + Q` by doubling. Requires the spectral radius of `T`
/// to be below one; with the slowest model root at 0.999 the iteration needs
/// roughly 25 doublings, each O(n³).
pub fn lyapunov_doubling(t: &Mat, q: &Mat, tol: f64) -> Result<Mat, LinAlgError> {
    assert_eq!(t.nrows, t.ncols);
    assert_eq!(q.nrows, q.ncols);
    assert_eq!(t.nrows, q.nrows);
    let mut a = t.clone();
    let mut x = q.clone();
    for _ in 0..60 {
        // X_{k+1} = X_k + A_k X_k A_kᵀ ; A_{k+1} = A_k²
        let delta = a.mul(&x).mul(&a.transpose());
        let inc = delta.max_abs();
        x = x.add(&delta);
        if !x.is_finite() {
            return Err(LinAlgError::NonFinite("lyapunov_doubling"));
        }
        if inc <= tol * x.max_abs().max(1e-300) {
            return Ok(x);
        }
        a = a.mul(&a);
    }
    Err(LinAlgError::NonFinite(
        "lyapunov_doubling did not converge (unit root?)",
    ))
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn lu_solves_known_system() {
        let a = Mat::from_rows(&[&[2.0, 1.0, 1.0], &[4.0, -6.0, 0.0], &[-2.0, 7.0, 2.0]]);
        let b = Mat::from_rows(&[&[5.0], &[-2.0], &[9.0]]);
        let x = a.solve(&b, "test").unwrap();
        // residual check
        let r = a.mul(&x).sub(&b);
        assert!(r.max_abs() < 1e-12);
        // also the known solution (1, 1, 2)
        assert_close(x[(0, 0)], 1.0, 1e-12);
        assert_close(x[(1, 0)], 1.0, 1e-12);
        assert_close(x[(2, 0)], 2.0, 1e-12);
    }

    #[test]
    fn inverse_roundtrip() {
        let a = Mat::from_rows(&[&[1.0, 2.0, 3.0], &[0.0, 1.0, 4.0], &[5.0, 6.0, 0.0]]);
        let inv = a.inverse("test").unwrap();
        let id = a.mul(&inv);
        assert!(id.sub(&Mat::eye(3)).max_abs() < 1e-12);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = Mat::from_rows(&[&[1.0, 2.0], &[2.0, 4.0]]);
        match a.solve(&Mat::eye(2), "test") {
            Err(LinAlgError::Singular { .. }) => {}
            other => panic!("expected Singular, got {other:?}"),
        }
    }

    #[test]
    fn kron_small_case() {
        let a = Mat::from_rows(&[&[1.0, 2.0]]);
        let b = Mat::from_rows(&[&[0.0, 3.0], &[4.0, 5.0]]);
        let k = a.kron(&b);
        assert_eq!((k.nrows, k.ncols), (2, 4));
        assert_eq!(k[(0, 0)], 0.0);
        assert_eq!(k[(0, 1)], 3.0);
        assert_eq!(k[(1, 0)], 4.0);
        assert_eq!(k[(0, 3)], 6.0);
        assert_eq!(k[(1, 2)], 8.0);
        assert_eq!(k[(1, 3)], 10.0);
    }

    #[test]
    fn qz_orders_stable_eigenvalues_first() {
        // Pencil (A, I): eigenvalues are simply the eigenvalues of A.
        let a = Mat::from_rows(&[&[2.0, 1.0], &[0.0, 0.5]]);
        let b = Mat::eye(2);
        let qz = qz_ordered(&a, &b).unwrap();
        assert_eq!(qz.n_stable, 1);
        let moduli = qz.moduli();
        assert_close(moduli[0], 0.5, 1e-10); // stable first
        assert_close(moduli[1], 2.0, 1e-10);
        // reconstruction A = Q S Zᵀ
        let rec = qz.q.mul(&qz.s).mul(&qz.z.transpose());
        assert!(rec.sub(&a).max_abs() < 1e-12);
        let recb = qz.q.mul(&qz.t).mul(&qz.z.transpose());
        assert!(recb.sub(&b).max_abs() < 1e-12);
    }

    #[test]
    fn qz_handles_infinite_eigenvalues() {
        // B singular => one infinite generalized eigenvalue.
        let a = Mat::from_rows(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let b = Mat::from_rows(&[&[2.0, 0.0], &[0.0, 0.0]]);
        let qz = qz_ordered(&a, &b).unwrap();
        assert_eq!(qz.n_stable, 1);
        let moduli = qz.moduli();
        assert_close(moduli[0], 0.5, 1e-12);
        assert!(moduli[1].is_infinite());
    }

    #[test]
    fn complex_schur_reconstructs_rotation() {
        // Eigenvalues of a rotation-like matrix are ±i.
        let m = Mat::from_rows(&[&[0.0, -1.0], &[1.0, 0.0]]);
        let (u, s) = schur_complex(&m).unwrap();
        let mut eigs: Vec<f64> = (0..2).map(|i| s[(i, i)].im).collect();
        eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_close(eigs[0], -1.0, 1e-12);
        assert_close(eigs[1], 1.0, 1e-12);
        // M = U S U^H
        let rec = u.mul(&s).mul(&u.herm());
        let recr = rec.real_part(1e-10).unwrap();
        assert!(recr.sub(&m).max_abs() < 1e-12);
    }

    #[test]
    fn complex_lu_solves_and_flags_singularity() {
        // (1+i)x + 2y = 5+3i ; ix + (1-i)y = 2 — verify by substitution
        let mut a = ZMat::zeros(2, 2);
        a[(0, 0)] = C64::new(1.0, 1.0);
        a[(0, 1)] = C64::new(2.0, 0.0);
        a[(1, 0)] = C64::new(0.0, 1.0);
        a[(1, 1)] = C64::new(1.0, -1.0);
        let b = vec![C64::new(5.0, 3.0), C64::new(2.0, 0.0)];
        let lu = zlu_factor(&a, "test").unwrap();
        let x = lu.solve_vec(&b);
        for i in 0..2 {
            let mut acc = C64::ZERO;
            for j in 0..2 {
                acc = acc.add(a[(i, j)].mul(x[j]));
            }
            assert!(acc.sub(b[i]).abs() < 1e-12, "row {i} residual");
        }

        // rank-one complex matrix must be rejected with the pivot column
        let mut s = ZMat::zeros(2, 2);
        s[(0, 0)] = C64::new(1.0, 2.0);
        s[(0, 1)] = C64::new(2.0, 4.0);
        s[(1, 0)] = C64::new(0.5, 1.0);
        s[(1, 1)] = C64::new(1.0, 2.0);
        match zlu_factor(&s, "test") {
            Err(LinAlgError::Singular { col: 1, .. }) => {}
            other => panic!("expected singular at column 1, got {:?}", other.err()),
        }
    }

    #[test]
    fn lyapunov_scalar_and_matrix() {
        // scalar: x = 0.25 x + 1 -> x = 4/3
        let t = Mat::from_rows(&[&[0.5]]);
        let q = Mat::from_rows(&[&[1.0]]);
        let x = lyapunov_doubling(&t, &q, 1e-15).unwrap();
        assert_close(x[(0, 0)], 4.0 / 3.0, 1e-12);

        // 2x2: verify the fixed point property directly
        let t = Mat::from_rows(&[&[0.9, 0.2], &[0.0, 0.5]]);
        let q = Mat::from_rows(&[&[1.0, 0.1], &[0.1, 2.0]]);
        let x = lyapunov_doubling(&t, &q, 1e-15).unwrap();
        let rhs = t.mul(&x).mul(&t.transpose()).add(&q);
        assert!(x.sub(&rhs).max_abs() < 1e-10);
    }
}
