//! Inner approximation of the Rayleigh-quotient set: a finite collection of
//! genuine Rayleigh vectors giving the upper bound `alpha_in`, the online
//! error-bound problem, and the two full-order solvers (strict feasibility
//! and the accurate SDP) that grow the collection one eigensolve at a time.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpStatus, Sense};
use crate::problem::{ParametricLMI, ProblemFunctions, ThetaEval};
use crate::spectral::{alpha_with, SpectralOptions};

/// A member of the inner set: a Rayleigh vector `y` tagged with the
/// `(x, mu)` whose infimizing eigenvector produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InnerPoint {
    pub y: Vec<f64>,
    pub x: Vec<f64>,
    pub mu: Vec<f64>,
}

/// Finite subset of the Rayleigh set. Every stored vector was produced by an
/// actual eigenvector, so `alpha_in` computed from it is always an upper
/// bound on the coercivity constant.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InnerSet {
    points: Vec<InnerPoint>,
}

impl InnerSet {
    pub fn new() -> Self {
        InnerSet { points: Vec::new() }
    }

    pub fn from_points(points: Vec<InnerPoint>) -> Self {
        InnerSet { points }
    }

    /// Appends a Rayleigh vector unless an equal one (within `1e-12`
    /// componentwise) is already stored. Returns whether it was added.
    pub fn push(&mut self, y: Vec<f64>, x: Vec<f64>, mu: Vec<f64>) -> bool {
        let dup = self.points.iter().any(|p| {
            p.y.len() == y.len()
                && p.y
                    .iter()
                    .zip(y.iter())
                    .all(|(a, b)| (a - b).abs() <= 1e-12)
        });
        if dup {
            return false;
        }
        self.points.push(InnerPoint { y, x, mu });
        true
    }

    pub fn points(&self) -> &[InnerPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn last(&self) -> Option<&InnerPoint> {
        self.points.last()
    }
}

/// Upper bound `alpha_in(x; mu)`: the minimum of `[theta0 + thetaL x]^T y`
/// over the stored vectors. The empty set yields `+inf` (check
/// [`InnerSet::is_empty`] when the distinction matters).
pub fn alpha_in(inner: &InnerSet, funcs: &ProblemFunctions, x: &[f64], mu: &[f64]) -> Result<f64> {
    let theta = funcs.eval(mu)?;
    let phi = theta.combine(x)?;
    Ok(alpha_in_from_phi(inner, &phi))
}

fn alpha_in_from_phi(inner: &InnerSet, phi: &[f64]) -> f64 {
    inner
        .points
        .iter()
        .map(|p| phi.iter().zip(p.y.iter()).map(|(a, b)| a * b).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
}

/// One constraint row per stored vector: coefficient `thetaL^T y` on `x` and
/// offset `theta0^T y`.
fn inner_rows(inner: &InnerSet, theta: &ThetaEval) -> Vec<(Vec<f64>, f64)> {
    let n = theta.cost.len();
    inner
        .points
        .iter()
        .map(|p| {
            let mut row = vec![0.0; n];
            for (j, r) in row.iter_mut().enumerate() {
                *r = theta
                    .theta_l
                    .iter()
                    .zip(p.y.iter())
                    .map(|(tl, &yq)| tl[j] * yq)
                    .sum();
            }
            let offset: f64 = theta
                .theta0
                .iter()
                .zip(p.y.iter())
                .map(|(&t, &yq)| t * yq)
                .sum();
            (row, offset)
        })
        .collect()
}

/// Maximizes `alpha_in(x; mu)` over the trust box `|x_j| <= x_box`.
/// Returns `(x, value)`; an empty inner set returns `(0, +inf)`.
fn maximize_alpha_in(
    inner: &InnerSet,
    funcs: &ProblemFunctions,
    mu: &[f64],
    x_box: f64,
) -> Result<(Vec<f64>, f64)> {
    let n = funcs.num_decision;
    if inner.is_empty() {
        return Ok((vec![0.0; n], f64::INFINITY));
    }
    let theta = funcs.eval(mu)?;
    // Variables [x, t]: maximize t subject to row . x - t >= -offset.
    let mut objective = vec![0.0; n + 1];
    objective[n] = 1.0;
    let mut lp = LinearProgram::new(Sense::Maximize, objective);
    for j in 0..n {
        lp.set_bounds(j, Some(-x_box), Some(x_box));
    }
    for (mut row, offset) in inner_rows(inner, &theta) {
        row.push(-1.0);
        lp.add_ge(row, -offset);
    }
    let r = lp.solve()?;
    match r.status {
        LpStatus::Optimal => Ok((r.x_opt[..n].to_vec(), r.objective_value)),
        status => Err(Error::InternalConsistency(format!(
            "max alpha_in over a trust box cannot be {status:?}"
        ))),
    }
}

/// Options shared by the two full-order solvers.
#[derive(Debug, Clone)]
pub struct FullOrderOptions {
    /// Margin at which the feasibility solver declares success.
    pub eps_alpha: f64,
    /// Relative gap `alpha_in - alpha <= tol_gap * (1 + |alpha_in|)` at
    /// which iteration stops.
    pub tol_gap: f64,
    /// Trust box half-width on each decision coordinate.
    pub x_box: f64,
    pub max_iter: usize,
    pub spectral: SpectralOptions,
}

impl Default for FullOrderOptions {
    fn default() -> Self {
        FullOrderOptions {
            eps_alpha: 1e-6,
            tol_gap: 1e-8,
            x_box: 1e6,
            max_iter: 200,
            spectral: SpectralOptions::default(),
        }
    }
}

/// Per-iteration log of a full-order solve.
#[derive(Debug, Clone)]
pub struct IterRecord {
    /// `alpha_in` at the iterate under the set before the new vector.
    pub alpha_in: f64,
    /// Exact coercivity constant at the iterate.
    pub alpha: f64,
    /// Cost at the iterate (SDP solver only; NaN for feasibility solves).
    pub j: f64,
}

#[derive(Debug, Clone)]
pub struct FullOrderSolve {
    pub x: Vec<f64>,
    pub alpha: f64,
    /// Cost `c(mu)^T x` (SDP solver; NaN for feasibility solves).
    pub j: f64,
    /// Rayleigh vector of the final iterate, the seed stored per exact
    /// sample.
    pub final_y: Vec<f64>,
    pub iterations: usize,
    pub history: Vec<IterRecord>,
}

/// Strict-feasibility solver: alternately maximize `alpha_in` over the trust
/// box and evaluate the exact `alpha` there, adding the minimizing Rayleigh
/// vector each round. Stops once `alpha >= eps_alpha` or the bound gap
/// closes. The grown inner set keeps every vector, ending with the one from
/// the final iterate.
pub fn solve_feas_fullorder(
    problem: &ParametricLMI,
    mu: &[f64],
    inner: &mut InnerSet,
    opts: &FullOrderOptions,
) -> Result<FullOrderSolve> {
    let funcs = problem.functions();
    let mut history = Vec::new();
    for iter in 0..opts.max_iter {
        let (x, a_in) = maximize_alpha_in(inner, funcs, mu, opts.x_box)?;
        let exact = alpha_with(problem, &x, mu, &opts.spectral)?;
        history.push(IterRecord {
            alpha_in: a_in,
            alpha: exact.alpha,
            j: f64::NAN,
        });
        inner.push(exact.y.clone(), x.clone(), mu.to_vec());
        let gap_closed =
            a_in.is_finite() && a_in - exact.alpha <= opts.tol_gap * (1.0 + a_in.abs());
        if exact.alpha >= opts.eps_alpha || gap_closed {
            return Ok(FullOrderSolve {
                x,
                alpha: exact.alpha,
                j: f64::NAN,
                final_y: exact.y,
                iterations: iter + 1,
                history,
            });
        }
    }
    let best = history
        .iter()
        .map(|h| h.alpha)
        .fold(f64::NEG_INFINITY, f64::max);
    let gap = history
        .last()
        .map(|h| h.alpha_in - h.alpha)
        .unwrap_or(f64::INFINITY);
    Err(Error::SolverNonConvergence {
        iterations: opts.max_iter,
        best_alpha: best,
        gap,
    })
}

/// Outcome of the error-bound problem.
#[derive(Debug, Clone)]
pub enum ErOutcome {
    Optimal { x: Vec<f64>, j_in: f64 },
    /// The cost decreases without bound under the current inner set; the
    /// online error bound is `+inf` until the set grows.
    Unbounded,
    /// Some stored vector forbids every `x`; the underlying SDP admits no
    /// feasible point at this parameter.
    Infeasible,
}

/// Error-bound problem: minimize `c(mu)^T x` subject to
/// `alpha_in(x; mu) >= 0`, one inequality row per stored vector. Its value
/// bounds the true optimum from below.
pub fn solve_er(inner: &InnerSet, funcs: &ProblemFunctions, mu: &[f64]) -> Result<ErOutcome> {
    let theta = funcs.eval(mu)?;
    let mut lp = LinearProgram::new(Sense::Minimize, theta.cost.clone());
    for (row, offset) in inner_rows(inner, &theta) {
        lp.add_ge(row, -offset);
    }
    let r = lp.solve()?;
    Ok(match r.status {
        LpStatus::Optimal => ErOutcome::Optimal {
            x: r.x_opt,
            j_in: r.objective_value,
        },
        LpStatus::Unbounded => ErOutcome::Unbounded,
        LpStatus::Infeasible => ErOutcome::Infeasible,
    })
}

/// Default tolerance for the accurate SDP solver: a small multiple of the
/// parameter-map scale at `mu`.
pub fn default_alpha_min(theta: &ThetaEval) -> f64 {
    let scale = theta.theta0.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    1e-6 * scale.max(1e-6)
}

/// Accurate full-order SDP solver: minimize the cost subject to
/// `alpha_in(x; mu) >= alpha_min` (the LP relaxation of strictness), then
/// verify the exact `alpha` at the minimizer and add its Rayleigh vector;
/// repeat until `alpha > 0`.
///
/// `run_to_gap`: instead of stopping at the first strictly feasible iterate,
/// continue until `alpha_in - alpha <= tol * (1 + |alpha_in|)`; used to
/// study the solver's convergence.
pub fn solve_sdp_fullorder(
    problem: &ParametricLMI,
    mu: &[f64],
    inner: &mut InnerSet,
    alpha_min: f64,
    opts: &FullOrderOptions,
    run_to_gap: Option<f64>,
) -> Result<FullOrderSolve> {
    if !(alpha_min > 0.0) {
        return Err(Error::InvalidParameter {
            name: "alpha_min".to_string(),
            reason: format!("must be strictly positive, got {alpha_min}"),
        });
    }
    let funcs = problem.functions();
    let n = funcs.num_decision;
    let mut history: Vec<IterRecord> = Vec::new();
    for iter in 0..opts.max_iter {
        let theta = funcs.eval(mu)?;
        let mut lp = LinearProgram::new(Sense::Minimize, theta.cost.clone());
        for j in 0..n {
            lp.set_bounds(j, Some(-opts.x_box), Some(opts.x_box));
        }
        for (row, offset) in inner_rows(inner, &theta) {
            lp.add_ge(row, alpha_min - offset);
        }
        let r = lp.solve()?;
        let x = match r.status {
            LpStatus::Optimal => r.x_opt,
            LpStatus::Infeasible => {
                return Err(Error::InvalidParameter {
                    name: "alpha_min".to_string(),
                    reason: format!(
                        "accurate SDP infeasible at mu = {mu:?}: alpha_min = {alpha_min} \
                         exceeds the achievable margin (or the problem is infeasible here)"
                    ),
                })
            }
            LpStatus::Unbounded => {
                return Err(Error::InternalConsistency(
                    "accurate SDP unbounded inside the trust box".to_string(),
                ))
            }
        };
        let a_in = alpha_in(inner, funcs, &x, mu)?;
        let exact = alpha_with(problem, &x, mu, &opts.spectral)?;
        let j = r.objective_value;
        history.push(IterRecord {
            alpha_in: a_in,
            alpha: exact.alpha,
            j,
        });
        inner.push(exact.y.clone(), x.clone(), mu.to_vec());
        let done = match run_to_gap {
            None => exact.alpha > 0.0,
            Some(tol) => a_in.is_finite() && a_in - exact.alpha <= tol * (1.0 + a_in.abs()),
        };
        if done {
            return Ok(FullOrderSolve {
                x,
                alpha: exact.alpha,
                j,
                final_y: exact.y,
                iterations: iter + 1,
                history,
            });
        }
    }
    let best = history
        .iter()
        .map(|h| h.alpha)
        .fold(f64::NEG_INFINITY, f64::max);
    let gap = history
        .last()
        .map(|h| h.alpha_in - h.alpha)
        .unwrap_or(f64::INFINITY);
    Err(Error::SolverNonConvergence {
        iterations: opts.max_iter,
        best_alpha: best,
        gap,
    })
}
