//! Offline greedy training, model persistence, and the online query path.
//!
//! Training walks the discrete parameter set: every sweep solves the reduced
//! problem at each unsampled point (in parallel, reduced in index order),
//! picks the worst point, solves it at full order, and stores the resulting
//! cut and Rayleigh seed. The trained model is a small JSON artifact bound
//! to the generating problem by a content fingerprint; online queries touch
//! only box bounds, cut records, seeds, and polynomial evaluations, so their
//! cost does not depend on the matrix dimension.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inner::{
    default_alpha_min, solve_er, solve_feas_fullorder, solve_sdp_fullorder, ErOutcome,
    FullOrderOptions, InnerPoint, InnerSet,
};
use crate::outer::{alpha_out, solve_rf, solve_rs, OuterModel, RsOutcome};
use crate::problem::{ParametricLMI, ProblemFunctions, TrainSet};
use crate::spectral::{box_bounds_with, SpectralOptions};

const MODEL_FORMAT: &str = "parlmi-model";
const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelMode {
    Feasibility,
    Sdp,
}

/// How the error of an SDP model is measured during training and online.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GapKind {
    /// Relative when every observed lower bound is strictly positive,
    /// absolute otherwise; resolved on the first sweep.
    Auto,
    Absolute,
    Relative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainStatus {
    Converged,
    /// The addition budget ran out before the tolerance was met; the model
    /// is usable but its guarantees are partial.
    BudgetExhausted,
}

mod nonfinite_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_some(v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

/// One greedy iteration: the worst training point and its criterion value
/// (smallest reduced margin in feasibility mode, largest error gap in SDP
/// mode). The final entry records the sweep that met the tolerance, so its
/// point was not added.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub iteration: usize,
    pub selected: usize,
    pub mu: Vec<f64>,
    #[serde(with = "nonfinite_as_null")]
    pub criterion: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOptions {
    /// Cap on the reduced feasibility objective.
    pub cap: f64,
    /// Margin at which training full-order feasibility solves stop early;
    /// infinite by default, so they run until the bound gap closes and
    /// store the strongest available cut.
    pub eps_alpha: f64,
    /// Bound-gap stop for full-order solves.
    pub tol_gap: f64,
    /// Trust box for the full-order solvers.
    pub x_box: f64,
    /// Greedy addition budget; defaults to the training-set size.
    pub max_additions: Option<usize>,
    pub gap_kind: GapKind,
    /// Worker threads for the per-point sweep (None: rayon default).
    pub threads: Option<usize>,
    /// Tolerance of the accurate SDP solver; None derives it from the
    /// parameter scale at each point.
    pub alpha_min: Option<f64>,
    /// Start SDP training directly from full-order solves at `c0` instead
    /// of running a feasibility phase first.
    pub skip_feas_phase: bool,
    /// Tolerance of the internal feasibility phase when it runs.
    pub feas_tol: f64,
    pub spectral: SpectralOptions,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            cap: 1.0,
            eps_alpha: f64::INFINITY,
            tol_gap: 1e-8,
            x_box: 1e6,
            max_additions: None,
            gap_kind: GapKind::Auto,
            threads: None,
            alpha_min: None,
            skip_feas_phase: false,
            feas_tol: 1e-6,
            spectral: SpectralOptions::default(),
        }
    }
}

/// The offline product: everything the online stage needs, and nothing of
/// the full order. Matrices are never stored; the largest member is one
/// `Q_F`-vector per training point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub format: String,
    pub version: u32,
    pub fingerprint: String,
    pub mode: ModelMode,
    pub functions: ProblemFunctions,
    pub xi: TrainSet,
    pub outer: OuterModel,
    /// Rayleigh seeds, one per exact sample in promotion order.
    pub inner_seeds: Vec<InnerPoint>,
    /// Tolerance the training loop targeted.
    pub tolerance: f64,
    /// Gap flavor actually used (Auto is resolved during training).
    pub gap_kind: GapKind,
    pub cap: f64,
    pub status: TrainStatus,
    pub log: Vec<LogEntry>,
}

impl TrainedModel {
    /// Refuses models trained on different problem content.
    pub fn check_problem(&self, problem: &ParametricLMI) -> Result<()> {
        let fp = problem.fingerprint();
        if fp != self.fingerprint {
            return Err(Error::FingerprintMismatch {
                model: self.fingerprint.clone(),
                problem: fp,
            });
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.format != MODEL_FORMAT {
            return Err(Error::InternalConsistency(format!(
                "unknown model format '{}'",
                self.format
            )));
        }
        if self.version != MODEL_VERSION {
            return Err(Error::VersionMismatch {
                expected: MODEL_VERSION,
                found: self.version,
            });
        }
        self.outer.validate()?;
        for seed in &self.inner_seeds {
            if seed.y.len() != self.functions.num_terms {
                return Err(Error::InternalConsistency(
                    "seed vector length does not match the term count".to_string(),
                ));
            }
        }
        Ok(())
    }

    fn seed_set(&self) -> InnerSet {
        InnerSet::from_points(self.inner_seeds.clone())
    }

    /// Online query against the stored functions.
    pub fn online(&self, mu: &[f64]) -> Result<OnlineResult> {
        online_solve(self, &self.functions, mu)
    }
}

/// Answer of an online query.
#[derive(Debug, Clone)]
pub enum OnlineAnswer {
    Feasibility {
        x: Vec<f64>,
        /// Positive values certify strict feasibility of `x`.
        rf_value: f64,
    },
    Sdp {
        x: Vec<f64>,
        /// Upper bound on the SDP optimum (cost of the returned feasible x).
        j_out: f64,
        /// Lower bound, absent when the error-bound problem is unbounded.
        j_in: Option<f64>,
        /// Error bound in the model's gap flavor; infinite when `j_in` is
        /// absent.
        gap: f64,
    },
}

#[derive(Debug, Clone)]
pub struct OnlineResult {
    pub answer: OnlineAnswer,
    /// The query lay outside the trained domain; the answer is best-effort.
    pub outside_domain: bool,
}

/// Solves a query using only the trained model and the parameter maps;
/// no full-order object is reachable from these inputs.
pub fn online_solve(
    model: &TrainedModel,
    funcs: &ProblemFunctions,
    mu: &[f64],
) -> Result<OnlineResult> {
    let outside_domain = !funcs.domain_contains(mu);
    let answer = match model.mode {
        ModelMode::Feasibility => {
            let sol = solve_rf(&model.outer, funcs, mu, model.cap)?;
            OnlineAnswer::Feasibility {
                x: sol.x,
                rf_value: sol.value,
            }
        }
        ModelMode::Sdp => {
            let (x, j_out) = match solve_rs(&model.outer, funcs, mu)? {
                RsOutcome::Optimal { x, j_out } => (x, j_out),
                RsOutcome::Infeasible => {
                    return Err(Error::RsInfeasible { mu: mu.to_vec() });
                }
                RsOutcome::Unbounded { .. } => {
                    return Err(Error::InternalConsistency(format!(
                        "reduced SDP unbounded at mu = {mu:?}; the underlying SDP \
                         appears unbounded"
                    )));
                }
            };
            let seeds = model.seed_set();
            let j_in = match solve_er(&seeds, funcs, mu)? {
                ErOutcome::Optimal { j_in, .. } => Some(j_in),
                ErOutcome::Unbounded | ErOutcome::Infeasible => None,
            };
            let gap = error_gap(model.gap_kind, j_out, j_in);
            OnlineAnswer::Sdp {
                x,
                j_out,
                j_in,
                gap,
            }
        }
    };
    Ok(OnlineResult {
        answer,
        outside_domain,
    })
}

fn error_gap(kind: GapKind, j_out: f64, j_in: Option<f64>) -> f64 {
    match j_in {
        None => f64::INFINITY,
        Some(j_in) => match kind {
            GapKind::Relative | GapKind::Auto => {
                if j_in > 0.0 {
                    (j_out - j_in) / j_in
                } else {
                    f64::INFINITY
                }
            }
            GapKind::Absolute => j_out - j_in,
        },
    }
}

/// Indices of the training points closest to each corner of the domain box,
/// the default initial exact set.
pub fn default_initial_set(xi: &TrainSet, domain: &[(f64, f64)]) -> Vec<usize> {
    let mut corners: Vec<Vec<f64>> = vec![Vec::new()];
    for &(lo, hi) in domain {
        let mut next = Vec::new();
        for base in &corners {
            for v in [lo, hi] {
                let mut c = base.clone();
                c.push(v);
                next.push(c);
            }
        }
        corners = next;
    }
    let mut out: Vec<usize> = Vec::new();
    for corner in corners {
        let mut best = 0usize;
        let mut best_d = f64::INFINITY;
        for (i, pt) in xi.points.iter().enumerate() {
            let d: f64 = pt
                .iter()
                .zip(corner.iter())
                .zip(xi.scaling.iter())
                .map(|((&a, &b), &s)| ((a - b) / s).powi(2))
                .sum();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        if !out.contains(&best) {
            out.push(best);
        }
    }
    out.sort_unstable();
    out
}

fn full_order_opts(opts: &TrainOptions) -> FullOrderOptions {
    FullOrderOptions {
        eps_alpha: opts.eps_alpha,
        tol_gap: opts.tol_gap,
        x_box: opts.x_box,
        max_iter: 200,
        spectral: opts.spectral.clone(),
    }
}

fn validate_c0(c0: &[usize], xi: &TrainSet) -> Result<()> {
    if c0.is_empty() {
        return Err(Error::InvalidParameter {
            name: "c0".to_string(),
            reason: "initial exact set is empty".to_string(),
        });
    }
    let mut seen = std::collections::HashSet::new();
    for &idx in c0 {
        if idx >= xi.len() || !seen.insert(idx) {
            return Err(Error::InvalidParameter {
                name: "c0".to_string(),
                reason: format!("invalid or duplicate index {idx}"),
            });
        }
    }
    Ok(())
}

fn run_in_pool<T: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> Result<T> + Send,
) -> Result<T> {
    match threads {
        None => f(),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t.max(1))
                .build()
                .map_err(|e| Error::InvalidParameter {
                    name: "threads".to_string(),
                    reason: e.to_string(),
                })?;
            pool.install(f)
        }
    }
}

/// Greedy feasibility training: full-order solves at `c0`, then repeated
/// sweeps of the reduced feasibility problem over the unsampled points,
/// each time adding the point with the smallest certified margin, until
/// that margin exceeds `tol_feas`.
pub fn train_feasibility(
    problem: &ParametricLMI,
    xi: TrainSet,
    m_c: usize,
    m_xi: usize,
    tol_feas: f64,
    c0: &[usize],
    opts: &TrainOptions,
) -> Result<TrainedModel> {
    if !(tol_feas > 0.0) {
        return Err(Error::InvalidParameter {
            name: "tol_feas".to_string(),
            reason: "must be strictly positive".to_string(),
        });
    }
    validate_c0(c0, &xi)?;
    run_in_pool(opts.threads, || {
        train_feasibility_inner(problem, xi, m_c, m_xi, tol_feas, c0, opts)
    })
}

fn train_feasibility_inner(
    problem: &ParametricLMI,
    xi: TrainSet,
    m_c: usize,
    m_xi: usize,
    tol_feas: f64,
    c0: &[usize],
    opts: &TrainOptions,
) -> Result<TrainedModel> {
    let funcs = problem.functions().clone();
    let fo = full_order_opts(opts);
    let bb = box_bounds_with(problem, &opts.spectral)?;
    let mut outer = OuterModel::new(bb, &xi, problem.num_decision(), m_c, m_xi);
    let mut seeds: Vec<InnerPoint> = Vec::new();
    let mut log: Vec<LogEntry> = Vec::new();

    let solve_exact =
        |outer: &mut OuterModel, seeds: &mut Vec<InnerPoint>, idx: usize| -> Result<()> {
            let mu = xi.points[idx].clone();
            let mut inner = InnerSet::from_points(seeds.clone());
            let sol = solve_feas_fullorder(problem, &mu, &mut inner, &fo)?;
            outer.promote_exact(idx, sol.x.clone(), sol.alpha, sol.final_y.clone(), None);
            seeds.push(InnerPoint {
                y: sol.final_y,
                x: sol.x,
                mu,
            });
            Ok(())
        };

    let mut c0_sorted = c0.to_vec();
    c0_sorted.sort_unstable();
    for &idx in &c0_sorted {
        solve_exact(&mut outer, &mut seeds, idx)?;
    }

    let budget = opts.max_additions.unwrap_or(xi.len());
    let mut additions = 0usize;
    let mut status = TrainStatus::Converged;
    for iteration in 1.. {
        let pending: Vec<usize> = (0..xi.len())
            .filter(|i| !outer.records[*i].exact)
            .collect();
        if pending.is_empty() {
            break;
        }
        let sweep: Result<Vec<(usize, Vec<f64>, f64)>> = pending
            .par_iter()
            .map(|&idx| {
                let sol = solve_rf(&outer, &funcs, &xi.points[idx], opts.cap)?;
                Ok((idx, sol.x, sol.value))
            })
            .collect();
        let sweep = sweep?;
        let mut worst_idx = usize::MAX;
        let mut worst_val = f64::INFINITY;
        for (idx, x_bar, value) in sweep {
            if value < worst_val {
                worst_val = value;
                worst_idx = idx;
            }
            outer.update_inexact(idx, x_bar, value);
        }
        log.push(LogEntry {
            iteration,
            selected: worst_idx,
            mu: xi.points[worst_idx].clone(),
            criterion: worst_val,
        });
        if worst_val > tol_feas {
            status = TrainStatus::Converged;
            break;
        }
        if additions >= budget {
            status = TrainStatus::BudgetExhausted;
            break;
        }
        solve_exact(&mut outer, &mut seeds, worst_idx)?;
        additions += 1;
    }

    let model = TrainedModel {
        format: MODEL_FORMAT.to_string(),
        version: MODEL_VERSION,
        fingerprint: problem.fingerprint(),
        mode: ModelMode::Feasibility,
        functions: funcs,
        xi,
        outer,
        inner_seeds: seeds,
        tolerance: tol_feas,
        gap_kind: GapKind::Absolute,
        cap: opts.cap,
        status,
        log,
    };
    model.validate()?;
    Ok(model)
}

/// Greedy SDP training. Either bootstraps from an internal feasibility
/// phase (keeping its records as cuts, emptying the exact set) or, with
/// `skip_feas_phase`, starts directly from full-order SDP solves at `c0`.
/// Every sweep solves the reduced SDP and the error-bound problem at each
/// unsampled point and adds the point with the largest error gap.
pub fn train_sdp(
    problem: &ParametricLMI,
    xi: TrainSet,
    m_c: usize,
    m_xi: usize,
    tol_gap: f64,
    c0: &[usize],
    opts: &TrainOptions,
) -> Result<TrainedModel> {
    if !(tol_gap > 0.0) {
        return Err(Error::InvalidParameter {
            name: "tol_gap".to_string(),
            reason: "must be strictly positive".to_string(),
        });
    }
    validate_c0(c0, &xi)?;
    run_in_pool(opts.threads, || {
        train_sdp_inner(problem, xi, m_c, m_xi, tol_gap, c0, opts)
    })
}

fn train_sdp_inner(
    problem: &ParametricLMI,
    xi: TrainSet,
    m_c: usize,
    m_xi: usize,
    tol_gap: f64,
    c0: &[usize],
    opts: &TrainOptions,
) -> Result<TrainedModel> {
    let funcs = problem.functions().clone();
    let fo = full_order_opts(opts);
    let mut seeds: Vec<InnerPoint> = Vec::new();
    let mut outer;

    if opts.skip_feas_phase {
        let bb = box_bounds_with(problem, &opts.spectral)?;
        outer = OuterModel::new(bb, &xi, problem.num_decision(), m_c, m_xi);
    } else {
        // Feasibility phase: its records (both exact and reduced) remain
        // valid cuts; the exact set restarts empty and the stored solutions
        // become plain approximations.
        let feas =
            train_feasibility_inner(problem, xi.clone(), m_c, m_xi, opts.feas_tol, c0, opts)?;
        outer = feas.outer;
        outer.exact_set.clear();
        for r in outer.records.iter_mut() {
            r.exact = false;
            r.y_bar = None;
            r.j_accurate = None;
        }
    }

    let solve_exact =
        |outer: &mut OuterModel, seeds: &mut Vec<InnerPoint>, idx: usize| -> Result<()> {
            let mu = xi.points[idx].clone();
            let mut inner = InnerSet::from_points(seeds.clone());
            let alpha_min = match opts.alpha_min {
                Some(v) => v,
                None => default_alpha_min(&funcs.eval(&mu)?),
            };
            let sol = solve_sdp_fullorder(problem, &mu, &mut inner, alpha_min, &fo, None)?;
            outer.promote_exact(
                idx,
                sol.x.clone(),
                sol.alpha,
                sol.final_y.clone(),
                Some(sol.j),
            );
            seeds.push(InnerPoint {
                y: sol.final_y,
                x: sol.x,
                mu,
            });
            Ok(())
        };

    if opts.skip_feas_phase {
        let mut c0_sorted = c0.to_vec();
        c0_sorted.sort_unstable();
        for &idx in &c0_sorted {
            solve_exact(&mut outer, &mut seeds, idx)?;
        }
    }

    let budget = opts.max_additions.unwrap_or(xi.len());
    let mut additions = 0usize;
    let mut status = TrainStatus::Converged;
    let mut gap_kind = opts.gap_kind;
    let mut log: Vec<LogEntry> = Vec::new();

    struct SweepItem {
        idx: usize,
        x_bar: Vec<f64>,
        alpha_bar: f64,
        j_out: f64,
        j_in: Option<f64>,
    }

    for iteration in 1.. {
        let pending: Vec<usize> = (0..xi.len())
            .filter(|i| !outer.records[*i].exact)
            .collect();
        if pending.is_empty() {
            break;
        }
        let seed_set = InnerSet::from_points(seeds.clone());
        let sweep: Result<Vec<SweepItem>> = pending
            .par_iter()
            .map(|&idx| {
                let mu = &xi.points[idx];
                let (x_bar, j_out) = match solve_rs(&outer, &funcs, mu)? {
                    RsOutcome::Optimal { x, j_out } => (x, j_out),
                    RsOutcome::Infeasible => {
                        return Err(Error::RsInfeasible { mu: mu.clone() });
                    }
                    RsOutcome::Unbounded { .. } => {
                        return Err(Error::InternalConsistency(format!(
                            "reduced SDP unbounded at mu = {mu:?}; the underlying SDP \
                             appears unbounded"
                        )));
                    }
                };
                let alpha_bar = alpha_out(&outer, &funcs, &x_bar, mu)?;
                let j_in = match solve_er(&seed_set, &funcs, mu)? {
                    ErOutcome::Optimal { j_in, .. } => Some(j_in),
                    ErOutcome::Unbounded | ErOutcome::Infeasible => None,
                };
                Ok(SweepItem {
                    idx,
                    x_bar,
                    alpha_bar,
                    j_out,
                    j_in,
                })
            })
            .collect();
        let sweep = sweep?;

        if gap_kind == GapKind::Auto {
            let all_positive = sweep
                .iter()
                .all(|s| s.j_in.map(|j| j > 0.0).unwrap_or(false));
            gap_kind = if all_positive {
                GapKind::Relative
            } else {
                GapKind::Absolute
            };
        }

        let mut worst_idx = usize::MAX;
        let mut worst_gap = f64::NEG_INFINITY;
        for item in &sweep {
            let gap = error_gap(gap_kind, item.j_out, item.j_in);
            if gap > worst_gap {
                worst_gap = gap;
                worst_idx = item.idx;
            }
        }
        for item in sweep {
            outer.update_inexact(item.idx, item.x_bar, item.alpha_bar);
        }
        log.push(LogEntry {
            iteration,
            selected: worst_idx,
            mu: xi.points[worst_idx].clone(),
            criterion: worst_gap,
        });
        if worst_gap <= tol_gap {
            status = TrainStatus::Converged;
            break;
        }
        if additions >= budget {
            status = TrainStatus::BudgetExhausted;
            break;
        }
        solve_exact(&mut outer, &mut seeds, worst_idx)?;
        additions += 1;
    }

    let model = TrainedModel {
        format: MODEL_FORMAT.to_string(),
        version: MODEL_VERSION,
        fingerprint: problem.fingerprint(),
        mode: ModelMode::Sdp,
        functions: funcs,
        xi,
        outer,
        inner_seeds: seeds,
        tolerance: tol_gap,
        gap_kind: match gap_kind {
            GapKind::Auto => GapKind::Relative,
            k => k,
        },
        cap: opts.cap,
        status,
        log,
    };
    model.validate()?;
    Ok(model)
}

/// Non-greedy baseline: the exact set is `k` evenly spaced training points
/// solved at full order, followed by two record-population sweeps of the
/// reduced SDP (no further additions). Used to compare greedy selection
/// against uniform placement.
pub fn train_sdp_uniform(
    problem: &ParametricLMI,
    xi: TrainSet,
    m_c: usize,
    m_xi: usize,
    k: usize,
    opts: &TrainOptions,
) -> Result<TrainedModel> {
    if k == 0 || k > xi.len() {
        return Err(Error::InvalidParameter {
            name: "k".to_string(),
            reason: format!("exact-set size {k} outside 1..={}", xi.len()),
        });
    }
    let funcs = problem.functions().clone();
    let fo = full_order_opts(opts);
    let bb = box_bounds_with(problem, &opts.spectral)?;
    let mut outer = OuterModel::new(bb, &xi, problem.num_decision(), m_c, m_xi);
    let mut seeds: Vec<InnerPoint> = Vec::new();

    let mut picks: Vec<usize> = if k == 1 {
        vec![0]
    } else {
        (0..k)
            .map(|i| (i as f64 * (xi.len() - 1) as f64 / (k - 1) as f64).round() as usize)
            .collect()
    };
    picks.dedup();
    for idx in picks {
        let mu = xi.points[idx].clone();
        let mut inner = InnerSet::from_points(seeds.clone());
        let alpha_min = match opts.alpha_min {
            Some(v) => v,
            None => default_alpha_min(&funcs.eval(&mu)?),
        };
        let sol = solve_sdp_fullorder(problem, &mu, &mut inner, alpha_min, &fo, None)?;
        outer.promote_exact(
            idx,
            sol.x.clone(),
            sol.alpha,
            sol.final_y.clone(),
            Some(sol.j),
        );
        seeds.push(InnerPoint {
            y: sol.final_y,
            x: sol.x,
            mu,
        });
    }

    for _ in 0..2 {
        let pending: Vec<usize> = (0..xi.len())
            .filter(|i| !outer.records[*i].exact)
            .collect();
        let sweep: Result<Vec<(usize, Vec<f64>, f64)>> = pending
            .par_iter()
            .map(|&idx| {
                let mu = &xi.points[idx];
                match solve_rs(&outer, &funcs, mu)? {
                    RsOutcome::Optimal { x, .. } => {
                        let ab = alpha_out(&outer, &funcs, &x, mu)?;
                        Ok((idx, x, ab))
                    }
                    RsOutcome::Infeasible => Err(Error::RsInfeasible { mu: mu.clone() }),
                    RsOutcome::Unbounded { .. } => Err(Error::InternalConsistency(format!(
                        "reduced SDP unbounded at mu = {mu:?}"
                    ))),
                }
            })
            .collect();
        for (idx, x_bar, alpha_bar) in sweep? {
            outer.update_inexact(idx, x_bar, alpha_bar);
        }
    }

    let model = TrainedModel {
        format: MODEL_FORMAT.to_string(),
        version: MODEL_VERSION,
        fingerprint: problem.fingerprint(),
        mode: ModelMode::Sdp,
        functions: funcs,
        xi,
        outer,
        inner_seeds: seeds,
        tolerance: f64::NAN,
        gap_kind: GapKind::Relative,
        cap: opts.cap,
        status: TrainStatus::Converged,
        log: Vec::new(),
    };
    model.validate()?;
    Ok(model)
}

/// Writes the model as versioned JSON.
pub fn save_model(model: &TrainedModel, path: &Path) -> Result<()> {
    let display = path.display().to_string();
    let json = serde_json::to_string_pretty(model).map_err(|e| Error::Json {
        path: display.clone(),
        source: e,
    })?;
    fs::write(path, json).map_err(|e| Error::Io {
        path: display,
        source: e,
    })
}

/// Reads and validates a model file. Binding against a specific problem is
/// a separate step ([`TrainedModel::check_problem`]).
pub fn load_model(path: &Path) -> Result<TrainedModel> {
    let display = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|e| Error::Io {
        path: display.clone(),
        source: e,
    })?;
    let model: TrainedModel = serde_json::from_str(&text).map_err(|e| Error::CorruptModel {
        path: display.clone(),
        reason: e.to_string(),
    })?;
    model.validate()?;
    Ok(model)
}

/// Loads a model and refuses it unless it was trained on `problem`.
pub fn load_model_for(path: &Path, problem: &ParametricLMI) -> Result<TrainedModel> {
    let model = load_model(path)?;
    model.check_problem(problem)?;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::example_rd::{build_problem, GridSpec};
    use crate::spectral::alpha;
    use tempfile::tempdir;

    fn rd_setup(m: usize, xi_count: usize) -> (ParametricLMI, TrainSet) {
        let problem = build_problem(&GridSpec::with_nodes(m)).unwrap();
        let xi = TrainSet::uniform(&problem.functions().domain, xi_count).unwrap();
        (problem, xi)
    }

    #[test]
    fn default_initial_set_picks_domain_corners() {
        let (_, xi) = rd_setup(5, 11);
        let c0 = default_initial_set(&xi, &[(0.0, 3.0)]);
        assert_eq!(c0, vec![0, 10]);
    }

    #[test]
    fn feasibility_training_certifies_every_point() {
        let (problem, xi) = rd_setup(7, 20);
        let c0 = default_initial_set(&xi, &problem.functions().domain);
        let model = train_feasibility(
            &problem,
            xi.clone(),
            4,
            3,
            1e-6,
            &c0,
            &TrainOptions::default(),
        )
        .unwrap();
        assert_eq!(model.status, TrainStatus::Converged);
        assert!(model.outer.exact_set.len() < xi.len());
        // Certification sweep: every training point gets a strictly
        // feasible x from the online path.
        for mu in &xi.points {
            let res = model.online(mu).unwrap();
            let OnlineAnswer::Feasibility { x, rf_value } = res.answer else {
                panic!("wrong mode");
            };
            assert!(rf_value > 1e-6, "rf value {rf_value} at mu {mu:?}");
            let check = alpha(&problem, &x, mu).unwrap();
            assert!(check.alpha > 0.0, "alpha {} at mu {mu:?}", check.alpha);
        }
    }

    #[test]
    fn training_set_equal_to_c0_needs_no_iterations() {
        let (problem, _) = rd_setup(5, 11);
        let xi = TrainSet::new(vec![vec![0.0], vec![3.0]], &problem.functions().domain).unwrap();
        let model =
            train_feasibility(&problem, xi, 4, 3, 1e-6, &[0, 1], &TrainOptions::default())
                .unwrap();
        assert_eq!(model.status, TrainStatus::Converged);
        assert!(model.log.is_empty());
        assert_eq!(model.outer.exact_set.len(), 2);
    }

    #[test]
    fn feasibility_log_min_margin_is_nondecreasing() {
        let (problem, xi) = rd_setup(7, 15);
        let c0 = default_initial_set(&xi, &problem.functions().domain);
        let model =
            train_feasibility(&problem, xi, 4, 3, 1e-6, &c0, &TrainOptions::default()).unwrap();
        for w in model.log.windows(2) {
            assert!(
                w[1].criterion >= w[0].criterion - 1e-9,
                "min margin decreased: {} then {}",
                w[0].criterion,
                w[1].criterion
            );
        }
    }

    #[test]
    fn budget_exhaustion_returns_partial_model() {
        let (problem, xi) = rd_setup(5, 15);
        let c0 = default_initial_set(&xi, &problem.functions().domain);
        let mut opts = TrainOptions::default();
        opts.max_additions = Some(0);
        // An unreachable tolerance forces the budget path.
        let model = train_feasibility(&problem, xi, 4, 3, 1e3, &c0, &opts).unwrap();
        assert_eq!(model.status, TrainStatus::BudgetExhausted);
    }

    #[test]
    fn sdp_training_brackets_the_optimum() {
        let (problem, xi) = rd_setup(7, 25);
        let c0 = default_initial_set(&xi, &problem.functions().domain);
        let mut opts = TrainOptions::default();
        opts.skip_feas_phase = true;
        let model = train_sdp(&problem, xi.clone(), 4, 3, 1e-2, &c0, &opts).unwrap();
        assert_eq!(model.status, TrainStatus::Converged);
        assert_eq!(model.gap_kind, GapKind::Relative);
        // Every trained point: j_in <= j_out, gap under tolerance.
        for mu in &xi.points {
            let res = model.online(mu).unwrap();
            let OnlineAnswer::Sdp {
                x,
                j_out,
                j_in,
                gap,
            } = res.answer
            else {
                panic!("wrong mode");
            };
            let j_in = j_in.expect("lower bound exists after training");
            assert!(j_in <= j_out + 1e-9);
            assert!(gap <= 1e-2 + 1e-9, "gap {gap} at mu {mu:?}");
            // The returned x is genuinely feasible.
            let check = alpha(&problem, &x, mu).unwrap();
            assert!(check.alpha >= -1e-9, "alpha {} at mu {mu:?}", check.alpha);
        }
    }

    #[test]
    fn sdp_training_via_feasibility_bootstrap() {
        let (problem, xi) = rd_setup(5, 12);
        let c0 = default_initial_set(&xi, &problem.functions().domain);
        let model = train_sdp(&problem, xi, 4, 3, 1e-2, &c0, &TrainOptions::default()).unwrap();
        assert_eq!(model.status, TrainStatus::Converged);
        assert!(!model.outer.exact_set.is_empty());
        let res = model.online(&[1.234]).unwrap();
        let OnlineAnswer::Sdp { j_out, j_in, .. } = res.answer else {
            panic!("wrong mode");
        };
        assert!(j_in.unwrap() <= j_out + 1e-9);
    }

    #[test]
    fn save_load_round_trip_preserves_answers_bytewise() {
        let (problem, xi) = rd_setup(5, 12);
        let c0 = default_initial_set(&xi, &problem.functions().domain);
        let mut opts = TrainOptions::default();
        opts.skip_feas_phase = true;
        let model = train_sdp(&problem, xi, 4, 3, 1e-2, &c0, &opts).unwrap();
        let dir = tempdir().unwrap();
        let path = dir.path().join("model.json");
        save_model(&model, &path).unwrap();
        let loaded = load_model_for(&path, &problem).unwrap();
        assert_eq!(model, loaded);
        for i in 0..10 {
            let mu = [0.3 * i as f64];
            let a = model.online(&mu).unwrap();
            let b = loaded.online(&mu).unwrap();
            match (a.answer, b.answer) {
                (
                    OnlineAnswer::Sdp {
                        j_out: ja,
                        j_in: ia,
                        ..
                    },
                    OnlineAnswer::Sdp {
                        j_out: jb,
                        j_in: ib,
                        ..
                    },
                ) => {
                    assert_eq!(ja, jb);
                    assert_eq!(ia, ib);
                }
                _ => panic!("wrong mode"),
            }
        }
        // Determinism: retraining yields byte-identical JSON.
        let model2 = train_sdp(
            &problem,
            TrainSet::uniform(&problem.functions().domain, 12).unwrap(),
            4,
            3,
            1e-2,
            &c0,
            &opts,
        )
        .unwrap();
        assert_eq!(
            serde_json::to_string(&model).unwrap(),
            serde_json::to_string(&model2).unwrap()
        );
    }

    #[test]
    fn fingerprint_mismatch_is_refused() {
        let (problem, xi) = rd_setup(5, 8);
        let c0 = default_initial_set(&xi, &problem.functions().domain);
        let model =
            train_feasibility(&problem, xi, 4, 3, 1e-6, &c0, &TrainOptions::default()).unwrap();
        let dir = tempdir().unwrap();
        let path = dir.path().join("model.json");
        save_model(&model, &path).unwrap();
        let other = build_problem(&GridSpec::with_nodes(7)).unwrap();
        let err = load_model_for(&path, &other);
        assert!(matches!(err, Err(Error::FingerprintMismatch { .. })));
    }

    #[test]
    fn truncated_model_file_is_corrupt() {
        let (problem, xi) = rd_setup(5, 8);
        let c0 = default_initial_set(&xi, &problem.functions().domain);
        let model =
            train_feasibility(&problem, xi, 4, 3, 1e-6, &c0, &TrainOptions::default()).unwrap();
        let dir = tempdir().unwrap();
        let path = dir.path().join("model.json");
        save_model(&model, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        std::fs::write(&path, &text[..text.len() / 2]).unwrap();
        assert!(matches!(load_model(&path), Err(Error::CorruptModel { .. })));
    }

    #[test]
    fn version_mismatch_is_refused() {
        let (problem, xi) = rd_setup(5, 8);
        let c0 = default_initial_set(&xi, &problem.functions().domain);
        let model =
            train_feasibility(&problem, xi, 4, 3, 1e-6, &c0, &TrainOptions::default()).unwrap();
        let dir = tempdir().unwrap();
        let path = dir.path().join("model.json");
        save_model(&model, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        std::fs::write(&path, text.replace("\"version\": 1", "\"version\": 99")).unwrap();
        assert!(matches!(
            load_model(&path),
            Err(Error::VersionMismatch { .. })
        ));
    }

    #[test]
    fn online_flags_out_of_domain_queries() {
        let (problem, xi) = rd_setup(5, 8);
        let c0 = default_initial_set(&xi, &problem.functions().domain);
        let model =
            train_feasibility(&problem, xi, 4, 3, 1e-6, &c0, &TrainOptions::default()).unwrap();
        let res = model.online(&[3.5]).unwrap();
        assert!(res.outside_domain);
        let res = model.online(&[1.0]).unwrap();
        assert!(!res.outside_domain);
    }
}
