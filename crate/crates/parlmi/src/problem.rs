//! Parametric LMI problem instances: data types, validation, evaluation,
//! and the on-disk format (one JSON document plus Matrix Market sidecars).
//!
//! A problem is the constraint `F(x; mu) = sum_q [theta0_q(mu) +
//! thetaL_q(mu) x] F_q >= 0` over a box parameter domain, together with the
//! scaling matrix `F_S` and the cost functional `c(mu)^T x`.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::sparse::{read_matrix_market, write_matrix_market, SparseSymMatrix};
use crate::spectral::{SpdFactor, DEFAULT_DENSE_CUTOFF};

const PROBLEM_FORMAT: &str = "parlmi-problem";
const PROBLEM_VERSION: u32 = 1;

/// Multivariate polynomial in the parameter vector, stored as a sparse list
/// of `(exponents, coefficient)` terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialMap {
    pub num_params: usize,
    pub terms: Vec<(Vec<u32>, f64)>,
}

impl PolynomialMap {
    pub fn constant(num_params: usize, value: f64) -> Self {
        let terms = if value == 0.0 {
            Vec::new()
        } else {
            vec![(vec![0; num_params], value)]
        };
        PolynomialMap { num_params, terms }
    }

    pub fn zero(num_params: usize) -> Self {
        PolynomialMap {
            num_params,
            terms: Vec::new(),
        }
    }

    /// `coefficient * mu_index`.
    pub fn linear(num_params: usize, index: usize, coefficient: f64) -> Self {
        let mut exps = vec![0; num_params];
        exps[index] = 1;
        PolynomialMap {
            num_params,
            terms: vec![(exps, coefficient)],
        }
    }

    pub fn add_term(mut self, exponents: Vec<u32>, coefficient: f64) -> Self {
        self.terms.push((exponents, coefficient));
        self
    }

    pub fn validate(&self, field: &str) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for (exps, coef) in &self.terms {
            if exps.len() != self.num_params {
                return Err(Error::DimensionMismatch {
                    context: format!("{field} exponent tuple"),
                    expected: self.num_params,
                    got: exps.len(),
                });
            }
            if !coef.is_finite() {
                return Err(Error::InvalidParameter {
                    name: field.to_string(),
                    reason: "non-finite coefficient".to_string(),
                });
            }
            if !seen.insert(exps.clone()) {
                return Err(Error::InvalidParameter {
                    name: field.to_string(),
                    reason: format!("duplicate exponent tuple {exps:?}"),
                });
            }
        }
        Ok(())
    }

    pub fn eval(&self, mu: &[f64]) -> f64 {
        debug_assert_eq!(mu.len(), self.num_params);
        self.terms
            .iter()
            .map(|(exps, coef)| {
                coef
                    * exps
                        .iter()
                        .zip(mu.iter())
                        .map(|(&e, &m)| if e == 0 { 1.0 } else { m.powi(e as i32) })
                        .product::<f64>()
            })
            .sum()
    }
}

/// Values of all parameter maps at one `mu`.
#[derive(Debug, Clone)]
pub struct ThetaEval {
    /// `theta0(mu)`, length `Q_F`.
    pub theta0: Vec<f64>,
    /// `thetaL(mu)` as `Q_F` rows of length `n`.
    pub theta_l: Vec<Vec<f64>>,
    /// `c(mu)`, length `n`.
    pub cost: Vec<f64>,
}

impl ThetaEval {
    /// `theta0(mu) + thetaL(mu) x`, the coefficient vector of `F(x; mu)`.
    pub fn combine(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cost.len() {
            return Err(Error::DimensionMismatch {
                context: "decision vector x".to_string(),
                expected: self.cost.len(),
                got: x.len(),
            });
        }
        Ok(self
            .theta0
            .iter()
            .zip(self.theta_l.iter())
            .map(|(&t0, row)| t0 + row.iter().zip(x.iter()).map(|(a, b)| a * b).sum::<f64>())
            .collect())
    }
}

/// The parameter-dependent scalar data of a problem: everything needed to
/// build and solve the reduced problems, with no matrix of the full order
/// anywhere inside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemFunctions {
    pub num_terms: usize,
    pub num_decision: usize,
    pub domain: Vec<(f64, f64)>,
    pub theta0: Vec<PolynomialMap>,
    pub theta_l: Vec<Vec<PolynomialMap>>,
    pub cost: Vec<PolynomialMap>,
}

impl ProblemFunctions {
    pub fn num_params(&self) -> usize {
        self.domain.len()
    }

    pub fn domain_contains(&self, mu: &[f64]) -> bool {
        mu.len() == self.domain.len()
            && mu
                .iter()
                .zip(self.domain.iter())
                .all(|(&m, &(lo, hi))| m >= lo && m <= hi)
    }

    pub fn validate(&self) -> Result<()> {
        let q = self.num_terms;
        let n = self.num_decision;
        let p = self.domain.len();
        if self.theta0.len() != q {
            return Err(Error::DimensionMismatch {
                context: "theta0".to_string(),
                expected: q,
                got: self.theta0.len(),
            });
        }
        if self.theta_l.len() != q {
            return Err(Error::DimensionMismatch {
                context: "thetaL".to_string(),
                expected: q,
                got: self.theta_l.len(),
            });
        }
        for (qi, row) in self.theta_l.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    context: format!("thetaL row {qi}"),
                    expected: n,
                    got: row.len(),
                });
            }
        }
        if self.cost.len() != n {
            return Err(Error::DimensionMismatch {
                context: "cost c".to_string(),
                expected: n,
                got: self.cost.len(),
            });
        }
        for (lo, hi) in &self.domain {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::InvalidParameter {
                    name: "domain".to_string(),
                    reason: format!("invalid interval [{lo}, {hi}]"),
                });
            }
        }
        for (i, pm) in self.theta0.iter().enumerate() {
            pm.validate(&format!("theta0[{i}]"))?;
            if pm.num_params != p {
                return Err(Error::DimensionMismatch {
                    context: format!("theta0[{i}] num_params"),
                    expected: p,
                    got: pm.num_params,
                });
            }
        }
        for (qi, row) in self.theta_l.iter().enumerate() {
            for (j, pm) in row.iter().enumerate() {
                pm.validate(&format!("thetaL[{qi}][{j}]"))?;
                if pm.num_params != p {
                    return Err(Error::DimensionMismatch {
                        context: format!("thetaL[{qi}][{j}] num_params"),
                        expected: p,
                        got: pm.num_params,
                    });
                }
            }
        }
        for (j, pm) in self.cost.iter().enumerate() {
            pm.validate(&format!("cost[{j}]"))?;
            if pm.num_params != p {
                return Err(Error::DimensionMismatch {
                    context: format!("cost[{j}] num_params"),
                    expected: p,
                    got: pm.num_params,
                });
            }
        }
        Ok(())
    }

    /// Evaluates every map at `mu`. Points outside the domain are allowed;
    /// use [`Self::domain_contains`] to warn.
    pub fn eval(&self, mu: &[f64]) -> Result<ThetaEval> {
        if mu.len() != self.domain.len() {
            return Err(Error::DimensionMismatch {
                context: "parameter vector mu".to_string(),
                expected: self.domain.len(),
                got: mu.len(),
            });
        }
        Ok(ThetaEval {
            theta0: self.theta0.iter().map(|p| p.eval(mu)).collect(),
            theta_l: self
                .theta_l
                .iter()
                .map(|row| row.iter().map(|p| p.eval(mu)).collect())
                .collect(),
            cost: self.cost.iter().map(|p| p.eval(mu)).collect(),
        })
    }
}

/// A validated parametric LMI / SDP instance. Immutable after construction;
/// safe for concurrent reads.
#[derive(Debug, Clone)]
pub struct ParametricLMI {
    dim_n: usize,
    functions: ProblemFunctions,
    f_mats: Vec<SparseSymMatrix>,
    f_s: SparseSymMatrix,
    fs_factor: SpdFactor,
}

impl ParametricLMI {
    pub fn new(
        f_mats: Vec<SparseSymMatrix>,
        f_s: SparseSymMatrix,
        functions: ProblemFunctions,
    ) -> Result<Self> {
        Self::with_dense_cutoff(f_mats, f_s, functions, DEFAULT_DENSE_CUTOFF)
    }

    pub fn with_dense_cutoff(
        f_mats: Vec<SparseSymMatrix>,
        f_s: SparseSymMatrix,
        functions: ProblemFunctions,
        dense_cutoff: usize,
    ) -> Result<Self> {
        if f_mats.is_empty() {
            return Err(Error::InvalidParameter {
                name: "F_q".to_string(),
                reason: "at least one constraint matrix is required".to_string(),
            });
        }
        let dim_n = f_s.dim();
        for (q, f) in f_mats.iter().enumerate() {
            if f.dim() != dim_n {
                return Err(Error::DimensionMismatch {
                    context: format!("F_q[{q}]"),
                    expected: dim_n,
                    got: f.dim(),
                });
            }
        }
        if functions.num_terms != f_mats.len() {
            return Err(Error::DimensionMismatch {
                context: "num_terms vs F_q list".to_string(),
                expected: f_mats.len(),
                got: functions.num_terms,
            });
        }
        functions.validate()?;
        let fs_factor = SpdFactor::new(&f_s, dense_cutoff, "F_S")?;
        Ok(ParametricLMI {
            dim_n,
            functions,
            f_mats,
            f_s,
            fs_factor,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim_n
    }

    pub fn num_terms(&self) -> usize {
        self.f_mats.len()
    }

    pub fn num_decision(&self) -> usize {
        self.functions.num_decision
    }

    pub fn num_params(&self) -> usize {
        self.functions.domain.len()
    }

    pub fn functions(&self) -> &ProblemFunctions {
        &self.functions
    }

    pub fn f_matrices(&self) -> &[SparseSymMatrix] {
        &self.f_mats
    }

    pub fn f_s(&self) -> &SparseSymMatrix {
        &self.f_s
    }

    pub(crate) fn fs_factor(&self) -> &SpdFactor {
        &self.fs_factor
    }

    /// Evaluates `theta0`, `thetaL`, and `c` at `mu`.
    pub fn eval_theta(&self, mu: &[f64]) -> Result<ThetaEval> {
        self.functions.eval(mu)
    }

    /// Assembles the dense `F(x; mu) = sum_q [theta0_q + thetaL_q x] F_q`.
    /// Intended for verification at modest dimensions.
    pub fn assemble_f(&self, x: &[f64], mu: &[f64]) -> Result<DMatrix<f64>> {
        let theta = self.eval_theta(mu)?;
        let coefs = theta.combine(x)?;
        let mut dense = DMatrix::zeros(self.dim_n, self.dim_n);
        for (f, &c) in self.f_mats.iter().zip(coefs.iter()) {
            if c != 0.0 {
                f.add_scaled_to_dense(c, &mut dense);
            }
        }
        Ok(dense)
    }

    /// SHA-256 over the complete problem content; used to bind trained
    /// models to the problem they were built from.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        let push_usize = |h: &mut Sha256, v: usize| h.update((v as u64).to_le_bytes());
        push_usize(&mut h, self.dim_n);
        push_usize(&mut h, self.f_mats.len());
        push_usize(&mut h, self.functions.num_decision);
        push_usize(&mut h, self.functions.domain.len());
        for &(lo, hi) in &self.functions.domain {
            h.update(lo.to_le_bytes());
            h.update(hi.to_le_bytes());
        }
        let push_poly = |h: &mut Sha256, p: &PolynomialMap| {
            h.update((p.terms.len() as u64).to_le_bytes());
            for (exps, coef) in &p.terms {
                for &e in exps {
                    h.update((e as u64).to_le_bytes());
                }
                h.update(coef.to_le_bytes());
            }
        };
        for p in &self.functions.theta0 {
            push_poly(&mut h, p);
        }
        for row in &self.functions.theta_l {
            for p in row {
                push_poly(&mut h, p);
            }
        }
        for p in &self.functions.cost {
            push_poly(&mut h, p);
        }
        let push_matrix = |h: &mut Sha256, m: &SparseSymMatrix| {
            h.update((m.nnz() as u64).to_le_bytes());
            for (i, j, v) in m.iter() {
                h.update((i as u64).to_le_bytes());
                h.update((j as u64).to_le_bytes());
                h.update(v.to_le_bytes());
            }
        };
        for m in &self.f_mats {
            push_matrix(&mut h, m);
        }
        push_matrix(&mut h, &self.f_s);
        let digest = h.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Finite training surrogate of the parameter domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSet {
    pub points: Vec<Vec<f64>>,
    /// Per-dimension widths used by the nearest-neighbor metric.
    pub scaling: Vec<f64>,
}

impl TrainSet {
    /// Validates that every point lies inside `domain` and that points are
    /// pairwise distinct. The metric scaling defaults to the domain widths.
    pub fn new(points: Vec<Vec<f64>>, domain: &[(f64, f64)]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParameter {
                name: "Xi".to_string(),
                reason: "training set is empty".to_string(),
            });
        }
        let p = domain.len();
        for (idx, pt) in points.iter().enumerate() {
            if pt.len() != p {
                return Err(Error::DimensionMismatch {
                    context: format!("Xi[{idx}]"),
                    expected: p,
                    got: pt.len(),
                });
            }
            for (d, &v) in pt.iter().enumerate() {
                let (lo, hi) = domain[d];
                if !(v >= lo && v <= hi) {
                    return Err(Error::InvalidParameter {
                        name: format!("Xi[{idx}]"),
                        reason: format!("coordinate {d} = {v} outside [{lo}, {hi}]"),
                    });
                }
            }
        }
        for i in 0..points.len() {
            for j in (i + 1)..points.len() {
                if points[i] == points[j] {
                    return Err(Error::InvalidParameter {
                        name: "Xi".to_string(),
                        reason: format!("points {i} and {j} coincide"),
                    });
                }
            }
        }
        let scaling = domain
            .iter()
            .map(|&(lo, hi)| if hi > lo { hi - lo } else { 1.0 })
            .collect();
        Ok(TrainSet { points, scaling })
    }

    /// Uniformly spaced points. One parameter gives a line; several give a
    /// tensor grid with `floor(count^(1/p))` points per dimension.
    pub fn uniform(domain: &[(f64, f64)], count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidParameter {
                name: "count".to_string(),
                reason: "must be positive".to_string(),
            });
        }
        let p = domain.len();
        let points = if p == 1 {
            let (lo, hi) = domain[0];
            (0..count)
                .map(|i| {
                    let t = if count == 1 {
                        0.5
                    } else {
                        i as f64 / (count - 1) as f64
                    };
                    vec![lo + t * (hi - lo)]
                })
                .collect()
        } else {
            let per_dim = (count as f64).powf(1.0 / p as f64).floor().max(2.0) as usize;
            let mut pts = vec![Vec::new()];
            for &(lo, hi) in domain {
                let mut next = Vec::new();
                for base in &pts {
                    for i in 0..per_dim {
                        let t = i as f64 / (per_dim - 1) as f64;
                        let mut pt = base.clone();
                        pt.push(lo + t * (hi - lo));
                        next.push(pt);
                    }
                }
                pts = next;
            }
            pts
        };
        TrainSet::new(points, domain)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

// ---------------------------------------------------------------------------
// File format
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct ProblemDoc {
    format: String,
    version: u32,
    dim: usize,
    num_decision: usize,
    num_terms: usize,
    num_params: usize,
    domain: Vec<(f64, f64)>,
    f_matrices: Vec<String>,
    f_s: String,
    theta0: Vec<PolynomialMap>,
    theta_l: Vec<Vec<PolynomialMap>>,
    cost: Vec<PolynomialMap>,
}

/// Writes `problem` as `<path>` (JSON) plus one `.mtx` sidecar per matrix in
/// the same directory.
pub fn save_problem(problem: &ParametricLMI, path: &Path) -> Result<()> {
    let display = path.display().to_string();
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("problem")
        .to_string();
    let dir = path.parent().map(|p| p.to_path_buf()).unwrap_or_default();
    let mut f_names = Vec::new();
    for (q, m) in problem.f_mats.iter().enumerate() {
        let name = format!("{stem}_f{}.mtx", q + 1);
        write_matrix_market(m, &dir.join(&name))?;
        f_names.push(name);
    }
    let fs_name = format!("{stem}_fs.mtx");
    write_matrix_market(&problem.f_s, &dir.join(&fs_name))?;
    let doc = ProblemDoc {
        format: PROBLEM_FORMAT.to_string(),
        version: PROBLEM_VERSION,
        dim: problem.dim_n,
        num_decision: problem.functions.num_decision,
        num_terms: problem.f_mats.len(),
        num_params: problem.functions.domain.len(),
        domain: problem.functions.domain.clone(),
        f_matrices: f_names,
        f_s: fs_name,
        theta0: problem.functions.theta0.clone(),
        theta_l: problem.functions.theta_l.clone(),
        cost: problem.functions.cost.clone(),
    };
    let json = serde_json::to_string_pretty(&doc).map_err(|e| Error::Json {
        path: display.clone(),
        source: e,
    })?;
    fs::write(path, json).map_err(|e| Error::Io {
        path: display,
        source: e,
    })
}

/// Loads and fully validates a problem file.
pub fn load_problem(path: &Path) -> Result<ParametricLMI> {
    let display = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|e| Error::Io {
        path: display.clone(),
        source: e,
    })?;
    let doc: ProblemDoc = serde_json::from_str(&text).map_err(|e| Error::Json {
        path: display.clone(),
        source: e,
    })?;
    if doc.format != PROBLEM_FORMAT {
        return Err(Error::MalformedProblem {
            path: display,
            reason: format!("unknown format '{}'", doc.format),
        });
    }
    if doc.version != PROBLEM_VERSION {
        return Err(Error::MalformedProblem {
            path: display,
            reason: format!("unsupported version {}", doc.version),
        });
    }
    if doc.f_matrices.len() != doc.num_terms {
        return Err(Error::DimensionMismatch {
            context: "f_matrices list vs num_terms".to_string(),
            expected: doc.num_terms,
            got: doc.f_matrices.len(),
        });
    }
    if doc.domain.len() != doc.num_params {
        return Err(Error::DimensionMismatch {
            context: "domain vs num_params".to_string(),
            expected: doc.num_params,
            got: doc.domain.len(),
        });
    }
    let dir = path.parent().map(|p| p.to_path_buf()).unwrap_or_default();
    let mut f_mats = Vec::with_capacity(doc.f_matrices.len());
    for (q, name) in doc.f_matrices.iter().enumerate() {
        let coo = read_matrix_market(&dir.join(name))?;
        if coo.dim() != doc.dim {
            return Err(Error::DimensionMismatch {
                context: format!("F_q[{q}] ({name})"),
                expected: doc.dim,
                got: coo.dim(),
            });
        }
        f_mats.push(SparseSymMatrix::from_coo(&coo, &format!("F_q[{q}]"))?);
    }
    let fs_coo = read_matrix_market(&dir.join(&doc.f_s))?;
    if fs_coo.dim() != doc.dim {
        return Err(Error::DimensionMismatch {
            context: "F_S".to_string(),
            expected: doc.dim,
            got: fs_coo.dim(),
        });
    }
    let f_s = SparseSymMatrix::from_coo(&fs_coo, "F_S")?;
    let functions = ProblemFunctions {
        num_terms: doc.num_terms,
        num_decision: doc.num_decision,
        domain: doc.domain,
        theta0: doc.theta0,
        theta_l: doc.theta_l,
        cost: doc.cost,
    };
    ParametricLMI::new(f_mats, f_s, functions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::CooMatrix;
    use tempfile::tempdir;

    fn sym(entries: &[(usize, usize, f64)], n: usize) -> SparseSymMatrix {
        let mut coo = CooMatrix::new(n);
        for &(i, j, v) in entries {
            coo.push_sym(i, j, v);
        }
        SparseSymMatrix::from_coo(&coo, "test").unwrap()
    }

    fn tiny_problem() -> ParametricLMI {
        // Q_F = 2, n = 1, p = 1 on [0, 2].
        let f1 = sym(&[(0, 0, 2.0), (1, 1, 1.0), (1, 0, 0.3)], 2);
        let f2 = sym(&[(0, 0, 1.0), (1, 1, 3.0)], 2);
        let f_s = sym(&[(0, 0, 1.0), (1, 1, 1.0)], 2);
        let functions = ProblemFunctions {
            num_terms: 2,
            num_decision: 1,
            domain: vec![(0.0, 2.0)],
            theta0: vec![
                PolynomialMap::constant(1, 1.0),
                PolynomialMap::linear(1, 0, -1.0),
            ],
            theta_l: vec![
                vec![PolynomialMap::zero(1)],
                vec![PolynomialMap::constant(1, 1.0)],
            ],
            cost: vec![PolynomialMap::constant(1, 1.0)],
        };
        ParametricLMI::new(vec![f1, f2], f_s, functions).unwrap()
    }

    #[test]
    fn constant_map_evaluates_to_constant() {
        let p = PolynomialMap::constant(3, 4.25);
        assert_eq!(p.eval(&[1.0, -7.0, 100.0]), 4.25);
    }

    #[test]
    fn monomial_mu1_mu2() {
        let p = PolynomialMap {
            num_params: 2,
            terms: vec![(vec![1, 1], 1.0)],
        };
        assert_eq!(p.eval(&[2.0, 3.0]), 6.0);
    }

    #[test]
    fn eval_theta_dimension_mismatch_is_hard_error() {
        let problem = tiny_problem();
        assert!(problem.eval_theta(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn assemble_constant_combination_returns_f1() {
        // Q_F = 1, theta0 = 1, thetaL = 0.
        let f1 = sym(&[(0, 0, 2.0), (1, 1, 5.0), (1, 0, -1.0)], 2);
        let f_s = sym(&[(0, 0, 1.0), (1, 1, 1.0)], 2);
        let functions = ProblemFunctions {
            num_terms: 1,
            num_decision: 1,
            domain: vec![(0.0, 1.0)],
            theta0: vec![PolynomialMap::constant(1, 1.0)],
            theta_l: vec![vec![PolynomialMap::zero(1)]],
            cost: vec![PolynomialMap::constant(1, 1.0)],
        };
        let p = ParametricLMI::new(vec![f1.clone()], f_s, functions).unwrap();
        for (x, mu) in [(0.0, 0.3), (5.0, 0.9), (-2.0, 0.0)] {
            let f = p.assemble_f(&[x], &[mu]).unwrap();
            for (i, j, v) in f1.iter() {
                assert_eq!(f[(i, j)], v);
            }
        }
    }

    #[test]
    fn assemble_zero_theta_gives_zero_matrix() {
        let f1 = sym(&[(0, 0, 2.0)], 2);
        let f_s = sym(&[(0, 0, 1.0), (1, 1, 1.0)], 2);
        let functions = ProblemFunctions {
            num_terms: 1,
            num_decision: 1,
            domain: vec![(0.0, 1.0)],
            theta0: vec![PolynomialMap::zero(1)],
            theta_l: vec![vec![PolynomialMap::constant(1, 1.0)]],
            cost: vec![PolynomialMap::constant(1, 1.0)],
        };
        let p = ParametricLMI::new(vec![f1], f_s, functions).unwrap();
        let f = p.assemble_f(&[0.0], &[0.7]).unwrap();
        assert_eq!(f.abs().max(), 0.0);
    }

    #[test]
    fn assemble_matches_entrywise_brute_force() {
        // Random-ish 5x5 instance with Q_F = 3; oracle sums entries directly.
        let n = 5;
        let mats: Vec<SparseSymMatrix> = (0..3)
            .map(|k| {
                let mut entries = Vec::new();
                for i in 0..n {
                    for j in 0..=i {
                        let v = ((i * 7 + j * 3 + k * 11) % 13) as f64 / 13.0 - 0.4;
                        if v.abs() > 0.1 {
                            entries.push((i, j, v));
                        }
                    }
                }
                sym(&entries, n)
            })
            .collect();
        let f_s = sym(&[(0, 0, 1.0), (1, 1, 1.0), (2, 2, 1.0), (3, 3, 1.0), (4, 4, 1.0)], n);
        let functions = ProblemFunctions {
            num_terms: 3,
            num_decision: 2,
            domain: vec![(0.0, 1.0), (0.0, 1.0)],
            theta0: vec![
                PolynomialMap::constant(2, 0.5),
                PolynomialMap::linear(2, 0, 2.0),
                PolynomialMap::linear(2, 1, -1.0),
            ],
            theta_l: vec![
                vec![PolynomialMap::constant(2, 1.0), PolynomialMap::zero(2)],
                vec![PolynomialMap::zero(2), PolynomialMap::linear(2, 0, 1.0)],
                vec![PolynomialMap::constant(2, -0.5), PolynomialMap::constant(2, 0.25)],
            ],
            cost: vec![PolynomialMap::constant(2, 1.0), PolynomialMap::constant(2, 1.0)],
        };
        let p = ParametricLMI::new(mats.clone(), f_s, functions).unwrap();
        let x = [0.7, -1.3];
        let mu = [0.4, 0.9];
        let f = p.assemble_f(&x, &mu).unwrap();
        let theta = p.eval_theta(&mu).unwrap();
        // brute-force oracle: per-entry sum over q of coefficient * entry
        for i in 0..n {
            for j in 0..n {
                let mut expect = 0.0;
                for (q, m) in mats.iter().enumerate() {
                    let coef = theta.theta0[q]
                        + theta.theta_l[q][0] * x[0]
                        + theta.theta_l[q][1] * x[1];
                    expect += coef * m.get(i, j);
                }
                assert!((f[(i, j)] - expect).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn affine_in_x_property() {
        let p = tiny_problem();
        let mu = [1.3];
        let f0 = p.assemble_f(&[0.0], &mu).unwrap();
        for (x1, x2) in [(0.5, 1.0), (-2.0, 3.0), (0.0, 0.0)] {
            let fa = p.assemble_f(&[x1], &mu).unwrap();
            let fb = p.assemble_f(&[x2], &mu).unwrap();
            let fsum = p.assemble_f(&[x1 + x2], &mu).unwrap();
            let lhs = &fa + &fb - &f0;
            let diff = (&lhs - &fsum).abs().max();
            assert!(diff < 1e-12);
        }
    }

    #[test]
    fn save_load_round_trip_is_identity() {
        let p = tiny_problem();
        let dir = tempdir().unwrap();
        let path = dir.path().join("tiny.json");
        save_problem(&p, &path).unwrap();
        let q = load_problem(&path).unwrap();
        assert_eq!(p.dim(), q.dim());
        assert_eq!(p.functions(), q.functions());
        assert_eq!(p.f_matrices(), q.f_matrices());
        assert_eq!(p.f_s(), q.f_s());
        assert_eq!(p.fingerprint(), q.fingerprint());
    }

    #[test]
    fn negative_definite_fs_is_rejected() {
        let p = tiny_problem();
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.json");
        save_problem(&p, &path).unwrap();
        // Overwrite the F_S sidecar with -I.
        let neg = SparseSymMatrix::scaled_identity(2, -1.0);
        write_matrix_market(&neg, &dir.path().join("bad_fs.mtx")).unwrap();
        let err = load_problem(&path).unwrap_err();
        assert!(matches!(err, Error::NotPositiveDefinite { field } if field == "F_S"));
    }

    #[test]
    fn term_count_mismatch_is_rejected() {
        let p = tiny_problem();
        let dir = tempdir().unwrap();
        let path = dir.path().join("mm.json");
        save_problem(&p, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
        // Drop one theta0 entry: Q_F mismatch between theta0 and F_q list.
        doc["theta0"].as_array_mut().unwrap().pop();
        std::fs::write(&path, serde_json::to_string(&doc).unwrap()).unwrap();
        let err = load_problem(&path).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn train_set_rejects_outside_and_duplicate_points() {
        let domain = vec![(0.0, 1.0)];
        assert!(TrainSet::new(vec![vec![0.5], vec![1.5]], &domain).is_err());
        assert!(TrainSet::new(vec![vec![0.5], vec![0.5]], &domain).is_err());
        let ts = TrainSet::uniform(&domain, 5).unwrap();
        assert_eq!(ts.len(), 5);
        assert_eq!(ts.points[0], vec![0.0]);
        assert_eq!(ts.points[4], vec![1.0]);
        assert_eq!(ts.scaling, vec![1.0]);
    }

    #[test]
    fn fingerprint_changes_with_content() {
        let p = tiny_problem();
        let mut f_mats = p.f_matrices().to_vec();
        f_mats[0] = sym(&[(0, 0, 2.0), (1, 1, 1.0), (1, 0, 0.301)], 2);
        let q = ParametricLMI::new(f_mats, p.f_s().clone(), p.functions().clone()).unwrap();
        assert_ne!(p.fingerprint(), q.fingerprint());
    }
}
