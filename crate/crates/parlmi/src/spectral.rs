//! Symmetric-definite generalized eigenvalue computations.
//!
//! Everything here works on the pencil `(A, B)` with `B` symmetric positive
//! definite. Two execution paths share one entry point: a dense Cholesky
//! reduction to a standard symmetric eigenproblem (default for small
//! dimensions) and a Lanczos iteration with full reorthogonalization on
//! `L^-1 A L^-T` for large ones. The `B = L L^T` factorization is computed
//! once per problem and reused across solves.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::ParametricLMI;
use crate::sparse::SparseSymMatrix;

/// Dimension at or below which the dense reduction path is used.
pub const DEFAULT_DENSE_CUTOFF: usize = 400;

/// Which end of the spectrum to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extremal {
    Smallest,
    Largest,
}

/// Extremal generalized eigenvalue of a symmetric-definite pencil, with its
/// `B`-normalized eigenvector and the certified residual
/// `||A v - lambda B v||_2 / ||v||_2`.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: f64,
    pub vector: DVector<f64>,
    pub residual: f64,
}

/// Componentwise bounds of the Rayleigh-quotient set: `lo_q` and `hi_q` are
/// the smallest and largest generalized eigenvalues of `(F_q, F_S)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxBounds {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxBounds {
    pub fn contains(&self, y: &[f64], slack: f64) -> bool {
        y.len() == self.lo.len()
            && y.iter()
                .zip(self.lo.iter().zip(self.hi.iter()))
                .all(|(&v, (&lo, &hi))| v >= lo - slack && v <= hi + slack)
    }
}

#[derive(Debug, Clone)]
pub struct SpectralOptions {
    /// Use the dense reduction when the pencil dimension is at most this.
    pub dense_cutoff: usize,
    /// Target for the relative residual ||Av - lambda Bv|| /
    /// (||A||_F + |lambda| ||B||_F).
    pub residual_tol: f64,
    /// Maximum Lanczos subspace dimension per restart.
    pub max_subspace: usize,
    /// Maximum number of Lanczos restarts.
    pub max_restarts: usize,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        SpectralOptions {
            dense_cutoff: DEFAULT_DENSE_CUTOFF,
            residual_tol: 1e-10,
            max_subspace: 400,
            max_restarts: 10,
        }
    }
}

/// Result of the coercivity evaluation at one `(x, mu)`.
#[derive(Debug, Clone)]
pub struct AlphaResult {
    /// Smallest generalized eigenvalue of `(F(x; mu), F_S)`.
    pub alpha: f64,
    /// Rayleigh-quotient vector `y_q = v^T F_q v / v^T F_S v`.
    pub y: Vec<f64>,
    /// The infimizing eigenvector.
    pub vector: DVector<f64>,
}

// ---------------------------------------------------------------------------
// Cholesky factorizations of the right-hand matrix
// ---------------------------------------------------------------------------

/// Banded lower Cholesky factor, stored by diagonals: `data[i * (bw + 1) + d]`
/// holds `L[i][i - d]`.
#[derive(Debug, Clone)]
pub struct BandCholesky {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl BandCholesky {
    fn new(b: &SparseSymMatrix) -> Option<Self> {
        let n = b.dim();
        let bw = b.lower_bandwidth();
        let stride = bw + 1;
        let mut data = vec![0.0; n * stride];
        for (i, j, v) in b.iter() {
            if j <= i && i - j <= bw {
                data[i * stride + (i - j)] = v;
            }
        }
        for i in 0..n {
            let jlo = i.saturating_sub(bw);
            for j in jlo..=i {
                let klo = jlo.max(j.saturating_sub(bw));
                let mut sum = data[i * stride + (i - j)];
                for k in klo..j {
                    sum -= data[i * stride + (i - k)] * data[j * stride + (j - k)];
                }
                if j < i {
                    data[i * stride + (i - j)] = sum / data[j * stride];
                } else {
                    if sum <= 0.0 || !sum.is_finite() {
                        return None;
                    }
                    data[i * stride] = sum.sqrt();
                }
            }
        }
        Some(BandCholesky { n, bw, data })
    }

    fn solve_lower(&self, x: &mut [f64]) {
        let stride = self.bw + 1;
        for i in 0..self.n {
            let jlo = i.saturating_sub(self.bw);
            let mut acc = x[i];
            for j in jlo..i {
                acc -= self.data[i * stride + (i - j)] * x[j];
            }
            x[i] = acc / self.data[i * stride];
        }
    }

    fn solve_upper(&self, x: &mut [f64]) {
        let stride = self.bw + 1;
        for i in (0..self.n).rev() {
            let jhi = (i + self.bw).min(self.n - 1);
            let mut acc = x[i];
            for j in (i + 1)..=jhi {
                acc -= self.data[j * stride + (j - i)] * x[j];
            }
            x[i] = acc / self.data[i * stride];
        }
    }
}

/// Cholesky factorization of an SPD matrix, dense or banded depending on the
/// dimension at construction time.
#[derive(Debug, Clone)]
pub enum SpdFactor {
    Dense { l: DMatrix<f64> },
    Band { chol: BandCholesky },
}

impl SpdFactor {
    /// Factors `b`; fails with `NotPositiveDefinite` naming `field`.
    pub fn new(b: &SparseSymMatrix, dense_cutoff: usize, field: &str) -> Result<Self> {
        if b.dim() <= dense_cutoff {
            let chol = nalgebra::Cholesky::new(b.to_dense()).ok_or_else(|| {
                Error::NotPositiveDefinite {
                    field: field.to_string(),
                }
            })?;
            Ok(SpdFactor::Dense { l: chol.l() })
        } else {
            let chol = BandCholesky::new(b).ok_or_else(|| Error::NotPositiveDefinite {
                field: field.to_string(),
            })?;
            Ok(SpdFactor::Band { chol })
        }
    }

    pub fn is_dense(&self) -> bool {
        matches!(self, SpdFactor::Dense { .. })
    }

    /// Solves `L x = rhs` in place.
    pub fn solve_lower(&self, x: &mut DVector<f64>) {
        match self {
            SpdFactor::Dense { l } => {
                assert!(l.solve_lower_triangular_mut(x));
            }
            SpdFactor::Band { chol } => chol.solve_lower(x.as_mut_slice()),
        }
    }

    /// Solves `L^T x = rhs` in place.
    pub fn solve_upper(&self, x: &mut DVector<f64>) {
        match self {
            SpdFactor::Dense { l } => {
                assert!(l.tr_solve_lower_triangular_mut(x));
            }
            SpdFactor::Band { chol } => chol.solve_upper(x.as_mut_slice()),
        }
    }
}

// ---------------------------------------------------------------------------
// Linear combinations of the constraint matrices
// ---------------------------------------------------------------------------

/// Operator `sum_q coefs[q] * mats[q]` applied without forming the sum.
pub(crate) struct ComboOp<'a> {
    mats: Vec<&'a SparseSymMatrix>,
    coefs: Vec<f64>,
    dim: usize,
}

impl<'a> ComboOp<'a> {
    pub(crate) fn new(mats: Vec<&'a SparseSymMatrix>, coefs: Vec<f64>) -> Self {
        assert_eq!(mats.len(), coefs.len());
        assert!(!mats.is_empty());
        let dim = mats[0].dim();
        ComboOp { mats, coefs, dim }
    }

    fn single(mat: &'a SparseSymMatrix) -> Self {
        ComboOp {
            dim: mat.dim(),
            mats: vec![mat],
            coefs: vec![1.0],
        }
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for (mat, &c) in self.mats.iter().zip(self.coefs.iter()) {
            if c != 0.0 {
                mat.mul_vec_add(c, v, out);
            }
        }
    }

    fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.dim, self.dim);
        for (mat, &c) in self.mats.iter().zip(self.coefs.iter()) {
            if c != 0.0 {
                mat.add_scaled_to_dense(c, &mut d);
            }
        }
        d
    }

    /// Upper bound on the Frobenius norm of the combination.
    fn frob_bound(&self) -> f64 {
        self.mats
            .iter()
            .zip(self.coefs.iter())
            .map(|(m, c)| c.abs() * m.frobenius_norm())
            .sum()
    }
}

// ---------------------------------------------------------------------------
// Public operations
// ---------------------------------------------------------------------------

/// Extremal generalized eigenpair of the pencil `(a, b)`.
pub fn extremal_eigpair(
    a: &SparseSymMatrix,
    b: &SparseSymMatrix,
    which: Extremal,
    opts: &SpectralOptions,
) -> Result<EigenPair> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            context: "pencil (A, B)".to_string(),
            expected: a.dim(),
            got: b.dim(),
        });
    }
    let factor = SpdFactor::new(b, opts.dense_cutoff, "F_S")?;
    extremal_of_combo(&ComboOp::single(a), b, &factor, which, opts)
}

/// Coercivity constant `alpha(x; mu)` together with the Rayleigh-quotient
/// vector of the infimizing eigenvector.
pub fn alpha(problem: &ParametricLMI, x: &[f64], mu: &[f64]) -> Result<AlphaResult> {
    alpha_with(problem, x, mu, &SpectralOptions::default())
}

pub fn alpha_with(
    problem: &ParametricLMI,
    x: &[f64],
    mu: &[f64],
    opts: &SpectralOptions,
) -> Result<AlphaResult> {
    let theta = problem.functions().eval(mu)?;
    let g = theta.combine(x)?;
    let op = ComboOp::new(problem.f_matrices().iter().collect(), g);
    let pair = extremal_of_combo(&op, problem.f_s(), problem.fs_factor(), Extremal::Smallest, opts)?;
    let y = rayleigh_map(problem, &pair.vector);
    Ok(AlphaResult {
        alpha: pair.value,
        y,
        vector: pair.vector,
    })
}

/// Rayleigh-quotient vector `y_q = v^T F_q v / v^T F_S v`.
pub fn rayleigh_map(problem: &ParametricLMI, v: &DVector<f64>) -> Vec<f64> {
    let vs = v.as_slice();
    let denom = problem.f_s().quad_form(vs);
    problem
        .f_matrices()
        .iter()
        .map(|f| f.quad_form(vs) / denom)
        .collect()
}

/// Componentwise bounds of the Rayleigh set: `2 Q_F` eigensolves on the
/// pencils `(F_q, F_S)`.
pub fn box_bounds(problem: &ParametricLMI) -> Result<BoxBounds> {
    box_bounds_with(problem, &SpectralOptions::default())
}

pub fn box_bounds_with(problem: &ParametricLMI, opts: &SpectralOptions) -> Result<BoxBounds> {
    let mut lo = Vec::with_capacity(problem.num_terms());
    let mut hi = Vec::with_capacity(problem.num_terms());
    for f in problem.f_matrices() {
        let op = ComboOp::single(f);
        let small = extremal_of_combo(&op, problem.f_s(), problem.fs_factor(), Extremal::Smallest, opts)?;
        let large = extremal_of_combo(&op, problem.f_s(), problem.fs_factor(), Extremal::Largest, opts)?;
        lo.push(small.value);
        hi.push(large.value);
    }
    Ok(BoxBounds { lo, hi })
}

pub(crate) fn extremal_of_combo(
    op: &ComboOp,
    b: &SparseSymMatrix,
    factor: &SpdFactor,
    which: Extremal,
    opts: &SpectralOptions,
) -> Result<EigenPair> {
    let pair = if factor.is_dense() {
        dense_extremal(op, b, factor, which)?
    } else {
        lanczos_extremal(op, b, factor, which, opts)?
    };
    Ok(pair)
}

// ---------------------------------------------------------------------------
// Dense path: Cholesky reduction to a standard symmetric eigenproblem
// ---------------------------------------------------------------------------

fn dense_extremal(
    op: &ComboOp,
    b: &SparseSymMatrix,
    factor: &SpdFactor,
    which: Extremal,
) -> Result<EigenPair> {
    let l = match factor {
        SpdFactor::Dense { l } => l,
        SpdFactor::Band { .. } => unreachable!("dense path requires a dense factor"),
    };
    let a = op.to_dense();
    // C = L^-1 A L^-T
    let x = l
        .solve_lower_triangular(&a)
        .ok_or_else(|| Error::InternalConsistency("singular Cholesky factor".to_string()))?;
    let c = l
        .solve_lower_triangular(&x.transpose())
        .ok_or_else(|| Error::InternalConsistency("singular Cholesky factor".to_string()))?;
    let c = (&c + c.transpose()) * 0.5;
    let eig = c.symmetric_eigen();
    let idx = match which {
        Extremal::Smallest => {
            let mut best = 0;
            for i in 1..eig.eigenvalues.len() {
                if eig.eigenvalues[i] < eig.eigenvalues[best] {
                    best = i;
                }
            }
            best
        }
        Extremal::Largest => {
            let mut best = 0;
            for i in 1..eig.eigenvalues.len() {
                if eig.eigenvalues[i] > eig.eigenvalues[best] {
                    best = i;
                }
            }
            best
        }
    };
    let value = eig.eigenvalues[idx];
    let mut v = DVector::from(eig.eigenvectors.column(idx).into_owned());
    factor.solve_upper(&mut v);
    // w was unit, so v is already B-normalized up to rounding.
    let residual = finish_residual(op, b, &v, value);
    Ok(EigenPair {
        value,
        vector: v,
        residual,
    })
}

fn finish_residual(op: &ComboOp, b: &SparseSymMatrix, v: &DVector<f64>, lambda: f64) -> f64 {
    let n = v.len();
    let mut av = vec![0.0; n];
    op.apply(v.as_slice(), &mut av);
    let mut bv = vec![0.0; n];
    b.mul_vec(v.as_slice(), &mut bv);
    let mut num = 0.0;
    for i in 0..n {
        let r = av[i] - lambda * bv[i];
        num += r * r;
    }
    (num.sqrt()) / v.norm()
}

// ---------------------------------------------------------------------------
// Iterative path: Lanczos with full reorthogonalization on L^-1 A L^-T
// ---------------------------------------------------------------------------

/// Deterministic pseudo-random start vector (splitmix64 stream).
fn seeded_vector(n: usize, seed: u64) -> DVector<f64> {
    let mut state = seed ^ 0x9e37_79b9_7f4a_7c15;
    let mut next = move || {
        state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    };
    let mut v = DVector::zeros(n);
    for i in 0..n {
        v[i] = (next() >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
    }
    let norm = v.norm();
    v / norm
}

fn lanczos_extremal(
    op: &ComboOp,
    b: &SparseSymMatrix,
    factor: &SpdFactor,
    which: Extremal,
    opts: &SpectralOptions,
) -> Result<EigenPair> {
    let n = op.dim;
    let max_dim = opts.max_subspace.min(n);
    let scale = op.frob_bound() + b.frobenius_norm();
    let tol = opts.residual_tol;

    let apply_c = |v: &DVector<f64>, tmp: &mut DVector<f64>, out: &mut DVector<f64>| {
        tmp.copy_from(v);
        factor.solve_upper(tmp);
        op.apply(tmp.as_slice(), out.as_mut_slice());
        factor.solve_lower(out);
    };

    let mut start = seeded_vector(n, 0x517e_c7a1 ^ n as u64);
    let mut best: Option<EigenPair> = None;
    let mut total_iters = 0usize;

    for restart in 0..opts.max_restarts {
        let mut basis: Vec<DVector<f64>> = Vec::with_capacity(max_dim);
        let mut alphas: Vec<f64> = Vec::with_capacity(max_dim);
        let mut betas: Vec<f64> = Vec::with_capacity(max_dim);
        let mut v = start.clone();
        let norm = v.norm();
        if norm < 1e-300 {
            start = seeded_vector(n, 0xabcd_ef01 + restart as u64);
            continue;
        }
        v /= norm;
        let mut tmp = DVector::zeros(n);
        let mut w = DVector::zeros(n);
        let mut broke_down = false;

        for k in 0..max_dim {
            apply_c(&v, &mut tmp, &mut w);
            let a_k = v.dot(&w);
            w.axpy(-a_k, &v, 1.0);
            if k > 0 {
                let beta_prev = betas[k - 1];
                w.axpy(-beta_prev, &basis[k - 1], 1.0);
            }
            basis.push(v.clone());
            alphas.push(a_k);
            // Full reorthogonalization, twice.
            for _ in 0..2 {
                for q in &basis {
                    let proj = q.dot(&w);
                    w.axpy(-proj, q, 1.0);
                }
            }
            let beta_k = w.norm();
            total_iters += 1;

            let last = k + 1 == max_dim;
            let breakdown = beta_k < 1e-14 * scale.max(1.0);
            let check = breakdown || last || (k + 1) % 8 == 0;
            if check {
                let (theta, s) = tridiag_extremal(&alphas, &betas, which);
                let est = if breakdown { 0.0 } else { beta_k * s[s.len() - 1].abs() };
                if est <= 0.1 * tol * scale || breakdown || last {
                    // Assemble the Ritz vector and verify the true residual.
                    let mut w_c = DVector::zeros(n);
                    for (i, q) in basis.iter().enumerate() {
                        w_c.axpy(s[i], q, 1.0);
                    }
                    let mut vec = w_c.clone();
                    factor.solve_upper(&mut vec);
                    let bnorm = b.quad_form(vec.as_slice()).sqrt();
                    if bnorm > 0.0 {
                        vec /= bnorm;
                    }
                    let residual = finish_residual(op, b, &vec, theta);
                    let candidate = EigenPair {
                        value: theta,
                        vector: vec,
                        residual,
                    };
                    let better = match &best {
                        None => true,
                        Some(p) => candidate.residual < p.residual,
                    };
                    if better {
                        best = Some(candidate);
                    }
                    if best.as_ref().unwrap().residual <= tol * scale {
                        return Ok(best.unwrap());
                    }
                    if breakdown {
                        broke_down = true;
                        break;
                    }
                    if last {
                        break;
                    }
                }
            }
            if beta_k < 1e-14 * scale.max(1.0) {
                broke_down = true;
                break;
            }
            betas.push(beta_k);
            v = w.clone();
            v /= beta_k;
        }

        // Restart from the best Ritz vector so far (in C coordinates), or from
        // a fresh random vector after a breakdown that failed the residual check.
        start = match &best {
            Some(p) if !broke_down => {
                let mut w_c = p.vector.clone();
                // back to C coordinates: w = L^T v
                w_c = match factor {
                    SpdFactor::Dense { l } => l.transpose() * w_c,
                    SpdFactor::Band { .. } => {
                        // multiply by L^T via B v = L L^T v: compute L^T v directly
                        band_lt_mul(factor, &p.vector)
                    }
                };
                w_c
            }
            _ => seeded_vector(n, 0x1234_5678 + (restart as u64 + 1) * 0x9e37),
        };
    }

    let best = best.ok_or(Error::EigNonConvergence {
        iterations: total_iters,
        best_value: f64::NAN,
        residual: f64::INFINITY,
    })?;
    if best.residual <= 1e-8 * scale {
        // Acceptable under the certificate tolerance even though the target
        // tolerance was missed.
        return Ok(best);
    }
    Err(Error::EigNonConvergence {
        iterations: total_iters,
        best_value: best.value,
        residual: best.residual,
    })
}

fn band_lt_mul(factor: &SpdFactor, v: &DVector<f64>) -> DVector<f64> {
    match factor {
        SpdFactor::Dense { l } => l.transpose() * v,
        SpdFactor::Band { chol } => {
            let n = chol.n;
            let stride = chol.bw + 1;
            let mut out = DVector::zeros(n);
            for i in 0..n {
                // (L^T v)_i = sum_{j >= i} L[j][i] v[j]
                let jhi = (i + chol.bw).min(n - 1);
                let mut acc = 0.0;
                for j in i..=jhi {
                    acc += chol.data[j * stride + (j - i)] * v[j];
                }
                out[i] = acc;
            }
            out
        }
    }
}

// ---------------------------------------------------------------------------
// Symmetric tridiagonal extremal eigenpair (bisection + inverse iteration)
// ---------------------------------------------------------------------------

/// Number of eigenvalues of the tridiagonal `(diag, off)` strictly below `x`.
fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0f64;
    for i in 0..diag.len() {
        let off2 = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] };
        d = diag[i] - x - if d != 0.0 { off2 / d } else { off2 / 1e-300 };
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Extremal eigenvalue and unit eigenvector of the symmetric tridiagonal
/// matrix with diagonal `diag` and off-diagonal `off`.
fn tridiag_extremal(diag: &[f64], off: &[f64], which: Extremal) -> (f64, Vec<f64>) {
    let k = diag.len();
    if k == 1 {
        return (diag[0], vec![1.0]);
    }
    let off = &off[..k - 1];
    // Gershgorin bracket.
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..k {
        let r = (if i > 0 { off[i - 1].abs() } else { 0.0 })
            + (if i + 1 < k { off[i].abs() } else { 0.0 });
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    let width = (hi - lo).max(1e-300);
    let (mut a, mut b) = (lo - 1e-12 * width, hi + 1e-12 * width);
    // Bisect for the first (or last) eigenvalue.
    let target = match which {
        Extremal::Smallest => 1,
        Extremal::Largest => k,
    };
    for _ in 0..90 {
        let mid = 0.5 * (a + b);
        if sturm_count(diag, off, mid) >= target {
            b = mid;
        } else {
            a = mid;
        }
        if b - a <= 1e-15 * width {
            break;
        }
    }
    let theta = 0.5 * (a + b);

    // Inverse iteration on (T - theta I) with a tiny regularizing shift.
    let shift = theta + 1e-12 * width * if which == Extremal::Smallest { -1.0 } else { 1.0 };
    let mut s = vec![1.0; k];
    for (i, item) in s.iter_mut().enumerate() {
        // deterministic, mildly varying start
        *item = 1.0 + 0.01 * ((i * 2654435761usize) % 97) as f64 / 97.0;
    }
    normalize(&mut s);
    for _ in 0..3 {
        tridiag_solve_shifted(diag, off, shift, &mut s);
        normalize(&mut s);
    }
    (theta, s)
}

fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 && n.is_finite() {
        for x in v.iter_mut() {
            *x /= n;
        }
    }
}

/// Solves `(T - shift I) x = rhs` in place by LU with partial pivoting on the
/// tridiagonal structure.
fn tridiag_solve_shifted(diag: &[f64], off: &[f64], shift: f64, x: &mut [f64]) {
    let k = diag.len();
    // Working bands: sub (length k-1), main, sup1, sup2 (fill-in from pivoting).
    let mut main: Vec<f64> = diag.iter().map(|d| d - shift).collect();
    let mut sup1: Vec<f64> = off.to_vec();
    sup1.resize(k, 0.0);
    let mut sup2 = vec![0.0; k];
    let mut sub: Vec<f64> = off.to_vec();
    let tiny = 1e-300;
    for i in 0..k - 1 {
        if sub[i].abs() > main[i].abs() {
            // Swap rows i and i+1 (row i has entries at columns i..i+2,
            // row i+1 at columns i..i+2 before elimination).
            let (mi, s1i, s2i) = (main[i], sup1[i], sup2[i]);
            main[i] = sub[i];
            sup1[i] = main[i + 1];
            sup2[i] = if i + 1 < k - 1 { sup1[i + 1] } else { 0.0 };
            sub[i] = mi;
            main[i + 1] = s1i;
            if i + 1 < k - 1 {
                sup1[i + 1] = s2i;
            }
            x.swap(i, i + 1);
        }
        let denom = if main[i].abs() < tiny { tiny } else { main[i] };
        let m = sub[i] / denom;
        main[i + 1] -= m * sup1[i];
        if i + 1 < k - 1 {
            sup1[i + 1] -= m * sup2[i];
        }
        x[i + 1] -= m * x[i];
        sub[i] = 0.0;
    }
    // Back substitution.
    for i in (0..k).rev() {
        let mut acc = x[i];
        if i + 1 < k {
            acc -= sup1[i] * x[i + 1];
        }
        if i + 2 < k {
            acc -= sup2[i] * x[i + 2];
        }
        let denom = if main[i].abs() < tiny { tiny } else { main[i] };
        x[i] = acc / denom;
    }
}
