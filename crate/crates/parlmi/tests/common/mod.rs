//! Shared test oracles, kept independent of the implementation paths they
//! check: a vertex-enumeration LP oracle and a Jacobi-rotation eigensolver.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};

/// Raw LP data for oracle comparison: `min c.x` subject to `eq` rows,
/// `ge` rows, and finite box bounds on every variable.
#[derive(Debug, Clone)]
pub struct RawLp {
    pub c: Vec<f64>,
    pub eq: Vec<(Vec<f64>, f64)>,
    pub ge: Vec<(Vec<f64>, f64)>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum OracleOutcome {
    Optimal(f64),
    Infeasible,
}

/// Exhaustive vertex enumeration: every vertex of the feasible polytope is
/// the intersection of `n` active constraints (all equality rows are always
/// active), so trying all subsets and keeping the best feasible one gives
/// the exact optimum. The box bounds guarantee boundedness.
pub fn vertex_enumeration(lp: &RawLp) -> OracleOutcome {
    let n = lp.c.len();
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    for (a, b) in &lp.ge {
        rows.push((a.clone(), *b));
    }
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        rows.push((e.clone(), lp.lo[j]));
        for v in e.iter_mut() {
            *v = -*v;
        }
        rows.push((e, -lp.hi[j]));
    }
    let n_eq = lp.eq.len();
    assert!(n_eq <= n, "over-determined equality system");
    let need = n - n_eq;

    let feas_tol = 1e-7;
    let mut best: Option<f64> = None;

    let mut subset = vec![0usize; need];
    let mut check_subset = |subset: &[usize]| {
        let mut a = DMatrix::zeros(n, n);
        let mut b = DVector::zeros(n);
        for (i, (row, rhs)) in lp.eq.iter().enumerate() {
            for j in 0..n {
                a[(i, j)] = row[j];
            }
            b[i] = *rhs;
        }
        for (k, &ri) in subset.iter().enumerate() {
            let (row, rhs) = &rows[ri];
            for j in 0..n {
                a[(n_eq + k, j)] = row[j];
            }
            b[n_eq + k] = *rhs;
        }
        let lu = a.lu();
        let Some(x) = lu.solve(&b) else {
            return;
        };
        if !x.iter().all(|v| v.is_finite()) {
            return;
        }
        // Feasibility of every constraint.
        for (row, rhs) in &lp.eq {
            let ax: f64 = row.iter().zip(x.iter()).map(|(p, q)| p * q).sum();
            if (ax - rhs).abs() > feas_tol {
                return;
            }
        }
        for (row, rhs) in &rows {
            let ax: f64 = row.iter().zip(x.iter()).map(|(p, q)| p * q).sum();
            if ax < rhs - feas_tol {
                return;
            }
        }
        let obj: f64 = lp.c.iter().zip(x.iter()).map(|(p, q)| p * q).sum();
        best = Some(match best {
            None => obj,
            Some(cur) => cur.min(obj),
        });
    };

    // Iterate over all `need`-subsets of rows.
    fn combos(
        rows_len: usize,
        need: usize,
        start: usize,
        subset: &mut Vec<usize>,
        depth: usize,
        f: &mut impl FnMut(&[usize]),
    ) {
        if depth == need {
            f(subset);
            return;
        }
        for i in start..rows_len {
            subset[depth] = i;
            combos(rows_len, need, i + 1, subset, depth + 1, f);
        }
    }
    combos(rows.len(), need, 0, &mut subset, 0, &mut check_subset);

    match best {
        Some(v) => OracleOutcome::Optimal(v),
        None => OracleOutcome::Infeasible,
    }
}

/// All eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub fn jacobi_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    let mut m = a.clone();
    let scale: f64 = m.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
    for _sweep in 0..100 {
        let mut off: f64 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[(i, j)] * m[(i, j)];
            }
        }
        if off.sqrt() < 1e-14 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq.abs() < 1e-18 * scale {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
            }
        }
    }
    (0..n).map(|i| m[(i, i)]).collect()
}

/// Hand-rolled lower Cholesky (independent of nalgebra's).
pub fn plain_cholesky(b: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = b.nrows();
    let mut l = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut sum = b[(i, j)];
            for k in 0..j {
                sum -= l[(i, k)] * l[(j, k)];
            }
            if i == j {
                if sum <= 0.0 {
                    return None;
                }
                l[(i, j)] = sum.sqrt();
            } else {
                l[(i, j)] = sum / l[(j, j)];
            }
        }
    }
    Some(l)
}

/// Extremal generalized eigenvalues of `(A, B)` via the hand-rolled Cholesky
/// reduction and Jacobi rotations: returns `(smallest, largest)`.
pub fn jacobi_pencil_extremes(a: &DMatrix<f64>, b: &DMatrix<f64>) -> (f64, f64) {
    let n = a.nrows();
    let l = plain_cholesky(b).expect("oracle pencil requires SPD B");
    // C = L^-1 A L^-T by forward/backward substitution, column by column.
    let mut c = DMatrix::zeros(n, n);
    for col in 0..n {
        // y = L^-1 a_col
        let mut y = DVector::zeros(n);
        for i in 0..n {
            let mut acc = a[(i, col)];
            for k in 0..i {
                acc -= l[(i, k)] * y[k];
            }
            y[i] = acc / l[(i, i)];
        }
        for i in 0..n {
            c[(i, col)] = y[i];
        }
    }
    let mut c2 = DMatrix::zeros(n, n);
    for row in 0..n {
        // z^T = row of C L^-T  <=>  z = L^-1 c_row
        let mut z = DVector::zeros(n);
        for i in 0..n {
            let mut acc = c[(row, i)];
            for k in 0..i {
                acc -= l[(i, k)] * z[k];
            }
            z[i] = acc / l[(i, i)];
        }
        for i in 0..n {
            c2[(row, i)] = z[i];
        }
    }
    let c2 = (&c2 + c2.transpose()) * 0.5;
    let evs = jacobi_eigenvalues(&c2);
    let lo = evs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = evs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}
