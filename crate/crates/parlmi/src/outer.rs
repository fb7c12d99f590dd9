//! Outer approximation of the Rayleigh-quotient set: the bounding box plus
//! half-space cuts collected from solved samples, the lower bound
//! `alpha_out`, and the reduced feasibility / SDP problems.
//!
//! Everything in this module works on `Q_F`-sized data only: cut records,
//! box bounds, and polynomial evaluations. No operation receives an object
//! whose size grows with the matrix dimension, which is what makes the
//! online stage cheap.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpCertificate, LpStatus, Sense};
use crate::problem::{ProblemFunctions, TrainSet};
use crate::spectral::BoxBounds;

/// Serialize `-inf` (the pre-initialization marker) as JSON null.
mod neg_inf_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_some(v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NEG_INFINITY))
    }
}

/// One training-point record: the stored approximate solution `x_bar` and the
/// certified lower bound `alpha_bar <= alpha(x_bar; mu_bar)` it contributes
/// as a cut. Exact records come from full-order solves and also carry the
/// Rayleigh vector seed (and, in SDP mode, the accurate objective).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutRecord {
    pub mu_bar: Vec<f64>,
    pub x_bar: Vec<f64>,
    #[serde(with = "neg_inf_as_null")]
    pub alpha_bar: f64,
    pub exact: bool,
    pub y_bar: Option<Vec<f64>>,
    pub j_accurate: Option<f64>,
}

impl CutRecord {
    fn fresh(mu_bar: Vec<f64>, num_decision: usize) -> Self {
        CutRecord {
            mu_bar,
            x_bar: vec![0.0; num_decision],
            alpha_bar: f64::NEG_INFINITY,
            exact: false,
            y_bar: None,
            j_accurate: None,
        }
    }
}

/// The trained outer model: box bounds, one record per training point, the
/// exact index set `C_k`, and the cut-selection parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OuterModel {
    pub box_bounds: BoxBounds,
    pub records: Vec<CutRecord>,
    /// Indices (into `records`) solved at full order.
    pub exact_set: Vec<usize>,
    /// Number of exact cuts selected per query.
    pub m_c: usize,
    /// Number of inexact cuts selected per query.
    pub m_xi: usize,
    /// Per-dimension widths of the nearest-neighbor metric.
    pub scaling: Vec<f64>,
}

impl OuterModel {
    pub fn new(
        box_bounds: BoxBounds,
        xi: &TrainSet,
        num_decision: usize,
        m_c: usize,
        m_xi: usize,
    ) -> Self {
        OuterModel {
            box_bounds,
            records: xi
                .points
                .iter()
                .map(|mu| CutRecord::fresh(mu.clone(), num_decision))
                .collect(),
            exact_set: Vec::new(),
            m_c,
            m_xi,
            scaling: xi.scaling.clone(),
        }
    }

    pub fn num_terms(&self) -> usize {
        self.box_bounds.lo.len()
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for &idx in &self.exact_set {
            if idx >= self.records.len() || !seen.insert(idx) {
                return Err(Error::InternalConsistency(format!(
                    "exact set contains invalid or duplicate index {idx}"
                )));
            }
            if !self.records[idx].exact {
                return Err(Error::InternalConsistency(format!(
                    "record {idx} is in the exact set but not marked exact"
                )));
            }
        }
        for (idx, r) in self.records.iter().enumerate() {
            if r.exact && !self.exact_set.contains(&idx) {
                return Err(Error::InternalConsistency(format!(
                    "record {idx} is marked exact but missing from the exact set"
                )));
            }
        }
        if self.box_bounds.lo.len() != self.box_bounds.hi.len() {
            return Err(Error::InternalConsistency(
                "box bound lengths differ".to_string(),
            ));
        }
        for (q, (&lo, &hi)) in self
            .box_bounds
            .lo
            .iter()
            .zip(self.box_bounds.hi.iter())
            .enumerate()
        {
            if lo > hi {
                return Err(Error::InternalConsistency(format!(
                    "box bound {q} has lo {lo} > hi {hi}"
                )));
            }
        }
        Ok(())
    }

    /// Overwrites an inexact record after a reduced solve.
    pub fn update_inexact(&mut self, idx: usize, x_bar: Vec<f64>, alpha_bar: f64) {
        let r = &mut self.records[idx];
        debug_assert!(!r.exact);
        r.x_bar = x_bar;
        r.alpha_bar = alpha_bar;
    }

    /// Promotes a record to exact after a full-order solve and adds it to
    /// `C_k`.
    pub fn promote_exact(
        &mut self,
        idx: usize,
        x_bar: Vec<f64>,
        alpha_bar: f64,
        y_bar: Vec<f64>,
        j_accurate: Option<f64>,
    ) {
        let r = &mut self.records[idx];
        r.x_bar = x_bar;
        r.alpha_bar = alpha_bar;
        r.exact = true;
        r.y_bar = Some(y_bar);
        r.j_accurate = j_accurate;
        if !self.exact_set.contains(&idx) {
            self.exact_set.push(idx);
        }
    }

    fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b.iter())
            .zip(self.scaling.iter())
            .map(|((&p, &q), &s)| {
                let d = (p - q) / s;
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Indices of the `m_c` nearest exact records followed by the `m_xi`
    /// nearest inexact records under the scaled Euclidean metric. Records
    /// still at `alpha_bar = -inf` contribute no cut and are skipped; when
    /// fewer than `m_c` exact records exist, all of them are used. Distance
    /// ties break toward the lower index.
    pub fn select_cuts(&self, mu: &[f64]) -> Vec<usize> {
        let pick = |exact: bool, count: usize| -> Vec<(f64, usize)> {
            let mut cands: Vec<(f64, usize)> = self
                .records
                .iter()
                .enumerate()
                .filter(|(_, r)| r.exact == exact && r.alpha_bar > f64::NEG_INFINITY)
                .map(|(i, r)| (self.distance(&r.mu_bar, mu), i))
                .collect();
            cands.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            cands.truncate(count);
            cands
        };
        let mut out: Vec<usize> = pick(true, self.m_c).into_iter().map(|(_, i)| i).collect();
        out.extend(pick(false, self.m_xi).into_iter().map(|(_, i)| i));
        out
    }
}

/// The constraint system `A_out y >= b_out` of the outer set at one query.
#[derive(Debug, Clone)]
pub struct Polytope {
    /// `l x Q_F` rows.
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
}

impl Polytope {
    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }
}

/// Box rows (`y_q >= lo_q`, then `-y_q >= -hi_q`) followed by one row
/// `[theta0(mu_bar) + thetaL(mu_bar) x_bar]^T y >= alpha_bar` per selected
/// cut.
pub fn build_polytope(
    model: &OuterModel,
    funcs: &ProblemFunctions,
    mu: &[f64],
) -> Result<Polytope> {
    let q = model.num_terms();
    let mut rows = Vec::with_capacity(2 * q + model.m_c + model.m_xi);
    let mut rhs = Vec::with_capacity(2 * q + model.m_c + model.m_xi);
    for i in 0..q {
        let mut row = vec![0.0; q];
        row[i] = 1.0;
        rows.push(row);
        rhs.push(model.box_bounds.lo[i]);
    }
    for i in 0..q {
        let mut row = vec![0.0; q];
        row[i] = -1.0;
        rows.push(row);
        rhs.push(-model.box_bounds.hi[i]);
    }
    for idx in model.select_cuts(mu) {
        let r = &model.records[idx];
        let theta = funcs.eval(&r.mu_bar)?;
        rows.push(theta.combine(&r.x_bar)?);
        rhs.push(r.alpha_bar);
    }
    Ok(Polytope { rows, rhs })
}

/// Lower bound `alpha_out(x; mu)`: the minimum of `[theta0 + thetaL x]^T y`
/// over the outer polytope.
pub fn alpha_out(
    model: &OuterModel,
    funcs: &ProblemFunctions,
    x: &[f64],
    mu: &[f64],
) -> Result<f64> {
    let theta = funcs.eval(mu)?;
    let phi = theta.combine(x)?;
    let poly = build_polytope(model, funcs, mu)?;
    let mut lp = LinearProgram::new(Sense::Minimize, phi);
    for (row, b) in poly.rows.into_iter().zip(poly.rhs.into_iter()) {
        lp.add_ge(row, b);
    }
    let r = lp.solve()?;
    match r.status {
        LpStatus::Optimal => Ok(r.objective_value),
        LpStatus::Infeasible => Err(Error::InternalConsistency(
            "outer polytope is empty: some stored cut is invalid".to_string(),
        )),
        LpStatus::Unbounded => Err(Error::InternalConsistency(
            "outer polytope is unbounded despite box rows".to_string(),
        )),
    }
}

/// Result of the reduced feasibility problem.
#[derive(Debug, Clone)]
pub struct RfSolution {
    pub x: Vec<f64>,
    /// `b_out^T p` at the optimum; positive values certify strict
    /// feasibility of `x`, and the value never exceeds the cap.
    pub value: f64,
}

/// Reduced feasibility problem: maximize `b_out^T p` over `p >= 0` and free
/// `x` subject to `A_out^T p - thetaL(mu) x = theta0(mu)`, with the
/// additional cap `b_out^T p <= cap` so an unbounded margin still returns a
/// usable `x`.
pub fn solve_rf(
    model: &OuterModel,
    funcs: &ProblemFunctions,
    mu: &[f64],
    cap: f64,
) -> Result<RfSolution> {
    let theta = funcs.eval(mu)?;
    let poly = build_polytope(model, funcs, mu)?;
    let l = poly.num_rows();
    let n = funcs.num_decision;
    let q = funcs.num_terms;

    let mut objective = vec![0.0; l + n];
    objective[..l].copy_from_slice(&poly.rhs);
    let mut lp = LinearProgram::new(Sense::Maximize, objective.clone());
    for i in 0..l {
        lp.set_bounds(i, Some(0.0), None);
    }
    for qi in 0..q {
        let mut row = vec![0.0; l + n];
        for (i, prow) in poly.rows.iter().enumerate() {
            row[i] = prow[qi];
        }
        for j in 0..n {
            row[l + j] = -theta.theta_l[qi][j];
        }
        lp.add_eq(row, theta.theta0[qi]);
    }
    lp.add_le(objective, cap);
    let r = lp.solve()?;
    match r.status {
        LpStatus::Optimal => Ok(RfSolution {
            x: r.x_opt[l..].to_vec(),
            value: r.objective_value,
        }),
        LpStatus::Infeasible => Err(Error::InternalConsistency(
            "reduced feasibility problem reported infeasible; it is feasible \
             by duality for any valid model"
                .to_string(),
        )),
        LpStatus::Unbounded => Err(Error::InternalConsistency(
            "reduced feasibility problem unbounded despite the cap row".to_string(),
        )),
    }
}

/// Outcome of the reduced SDP.
#[derive(Debug, Clone)]
pub enum RsOutcome {
    Optimal {
        x: Vec<f64>,
        j_out: f64,
    },
    /// No `(p, x)` satisfies the model constraints; the caller decides
    /// whether a feasibility phase must run first.
    Infeasible,
    /// Decision-space ray along which the cost decreases without bound.
    Unbounded {
        ray: Vec<f64>,
    },
}

/// Reduced SDP: minimize `c(mu)^T x` subject to
/// `A_out^T p - thetaL(mu) x = theta0(mu)`, `p >= 0`, `b_out^T p >= 0`.
/// The sign constraint on `b_out^T p` certifies `alpha_out(x; mu) >= 0`, so
/// the returned `x` is feasible for the original SDP and `j_out` bounds its
/// optimum from above.
pub fn solve_rs(model: &OuterModel, funcs: &ProblemFunctions, mu: &[f64]) -> Result<RsOutcome> {
    let theta = funcs.eval(mu)?;
    let poly = build_polytope(model, funcs, mu)?;
    let l = poly.num_rows();
    let n = funcs.num_decision;
    let q = funcs.num_terms;

    let mut objective = vec![0.0; l + n];
    objective[l..].copy_from_slice(&theta.cost);
    let mut lp = LinearProgram::new(Sense::Minimize, objective);
    for i in 0..l {
        lp.set_bounds(i, Some(0.0), None);
    }
    for qi in 0..q {
        let mut row = vec![0.0; l + n];
        for (i, prow) in poly.rows.iter().enumerate() {
            row[i] = prow[qi];
        }
        for j in 0..n {
            row[l + j] = -theta.theta_l[qi][j];
        }
        lp.add_eq(row, theta.theta0[qi]);
    }
    let mut sign_row = vec![0.0; l + n];
    sign_row[..l].copy_from_slice(&poly.rhs);
    lp.add_ge(sign_row, 0.0);

    let r = lp.solve()?;
    Ok(match r.status {
        LpStatus::Optimal => RsOutcome::Optimal {
            x: r.x_opt[l..].to_vec(),
            j_out: r.objective_value,
        },
        LpStatus::Infeasible => RsOutcome::Infeasible,
        LpStatus::Unbounded => {
            let ray = match r.certificate {
                Some(LpCertificate::Ray(full)) => full[l..].to_vec(),
                _ => vec![0.0; n],
            };
            RsOutcome::Unbounded { ray }
        }
    })
}
