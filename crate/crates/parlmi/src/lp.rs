//! Dense two-phase primal simplex for the small linear programs that drive
//! every reduced and full-order solve in this crate.
//!
//! The solver is deterministic: entering variables are chosen by most
//! negative reduced cost with lowest-index tie-breaks, the ratio test breaks
//! ties by lowest basic variable index, and after a run of degenerate pivots
//! it switches permanently to Bland's rule, which cannot cycle. Free
//! variables are split into differences of nonnegative parts.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Certificate attached to non-optimal outcomes: an improving feasible ray
/// for unbounded problems, or phase-one multipliers witnessing infeasibility
/// (one per equality row, then one per inequality row).
#[derive(Debug, Clone)]
pub enum LpCertificate {
    Ray(Vec<f64>),
    Farkas(Vec<f64>),
}

#[derive(Debug, Clone)]
pub struct LpResult {
    pub status: LpStatus,
    /// Optimal point (empty unless optimal; for unbounded problems the
    /// feasible point the ray starts from).
    pub x_opt: Vec<f64>,
    /// Objective at `x_opt` in the original sense (NaN when infeasible).
    pub objective_value: f64,
    /// Row duals (equality rows then inequality rows) such that, for
    /// problems whose only bounds are `x >= 0`, `b^T dual` reproduces the
    /// objective value. Empty unless optimal.
    pub dual: Vec<f64>,
    pub certificate: Option<LpCertificate>,
}

#[derive(Debug, Clone)]
pub struct LpOptions {
    /// Absolute feasibility tolerance.
    pub feas_tol: f64,
    /// Smallest acceptable pivot magnitude.
    pub pivot_tol: f64,
    /// Reduced-cost optimality tolerance.
    pub opt_tol: f64,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub stall_switch: usize,
    pub max_iter: usize,
}

impl Default for LpOptions {
    fn default() -> Self {
        LpOptions {
            feas_tol: 1e-9,
            pivot_tol: 1e-11,
            opt_tol: 1e-10,
            stall_switch: 64,
            max_iter: 50_000,
        }
    }
}

/// Dense linear program over variables `x_0 .. x_{m-1}`.
///
/// Constraints are equality rows `row . x = rhs`, inequality rows
/// `row . x >= rhs`, and optional per-variable bounds. Variables are free by
/// default.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    sense: Sense,
    objective: Vec<f64>,
    eq_rows: Vec<(Vec<f64>, f64)>,
    ge_rows: Vec<(Vec<f64>, f64)>,
    bounds: Vec<(Option<f64>, Option<f64>)>,
}

impl LinearProgram {
    pub fn new(sense: Sense, objective: Vec<f64>) -> Self {
        let n = objective.len();
        LinearProgram {
            sense,
            objective,
            eq_rows: Vec::new(),
            ge_rows: Vec::new(),
            bounds: vec![(None, None); n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_eq(&mut self, row: Vec<f64>, rhs: f64) {
        assert_eq!(row.len(), self.num_vars());
        self.eq_rows.push((row, rhs));
    }

    /// Adds `row . x >= rhs`.
    pub fn add_ge(&mut self, row: Vec<f64>, rhs: f64) {
        assert_eq!(row.len(), self.num_vars());
        self.ge_rows.push((row, rhs));
    }

    /// Adds `row . x <= rhs` by negation.
    pub fn add_le(&mut self, row: Vec<f64>, rhs: f64) {
        let neg: Vec<f64> = row.iter().map(|v| -v).collect();
        self.ge_rows.push((neg, -rhs));
    }

    pub fn set_bounds(&mut self, var: usize, lo: Option<f64>, hi: Option<f64>) {
        self.bounds[var] = (lo, hi);
    }

    fn validate(&self) -> Result<()> {
        let check = |v: f64, what: &str| -> Result<()> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    name: "LinearProgram".to_string(),
                    reason: format!("non-finite coefficient in {what}"),
                })
            }
        };
        for &c in &self.objective {
            check(c, "objective")?;
        }
        for (row, rhs) in self.eq_rows.iter().chain(self.ge_rows.iter()) {
            for &c in row {
                check(c, "constraint row")?;
            }
            check(*rhs, "right-hand side")?;
        }
        for (i, &(lo, hi)) in self.bounds.iter().enumerate() {
            if let (Some(l), Some(h)) = (lo, hi) {
                if l > h {
                    return Err(Error::InvalidParameter {
                        name: format!("bounds[{i}]"),
                        reason: format!("lower {l} exceeds upper {h}"),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn solve(&self) -> Result<LpResult> {
        self.solve_with(&LpOptions::default())
    }

    pub fn solve_with(&self, opts: &LpOptions) -> Result<LpResult> {
        self.validate()?;
        Simplex::build(self, opts).run()
    }
}

/// Mapping from an original variable to standard-form columns.
#[derive(Debug, Clone, Copy)]
enum VarMap {
    /// `x = lo + u`.
    ShiftLo { col: usize, lo: f64 },
    /// `x = hi - u`.
    FlipHi { col: usize, hi: f64 },
    /// `x = u_pos - u_neg`.
    Split { pos: usize, neg: usize },
}

struct Simplex<'a> {
    lp: &'a LinearProgram,
    opts: LpOptions,
    var_map: Vec<VarMap>,
    n_art: usize,
    /// Constraint rows `[A | I_art | b]`, rhs >= 0.
    tableau: Vec<Vec<f64>>,
    /// Phase-2 reduced-cost row (last cell holds minus the objective).
    cost2: Vec<f64>,
    /// Phase-1 reduced-cost row.
    cost1: Vec<f64>,
    basis: Vec<usize>,
    /// +1/-1 per row: sign applied to make rhs nonnegative.
    row_sign: Vec<f64>,
    /// Number of user-facing rows (eq then ge); range rows for two-sided
    /// bounds follow and stay internal.
    n_user_rows: usize,
    bland: bool,
    stall: usize,
}

impl<'a> Simplex<'a> {
    fn build(lp: &'a LinearProgram, opts: &LpOptions) -> Self {
        let n = lp.num_vars();
        // Assign standard columns.
        let mut var_map = Vec::with_capacity(n);
        let mut n_cols = 0usize;
        let mut range_rows: Vec<(usize, f64)> = Vec::new(); // (col, width)
        for j in 0..n {
            match lp.bounds[j] {
                (Some(lo), None) => {
                    var_map.push(VarMap::ShiftLo { col: n_cols, lo });
                    n_cols += 1;
                }
                (None, Some(hi)) => {
                    var_map.push(VarMap::FlipHi { col: n_cols, hi });
                    n_cols += 1;
                }
                (Some(lo), Some(hi)) => {
                    var_map.push(VarMap::ShiftLo { col: n_cols, lo });
                    range_rows.push((n_cols, hi - lo));
                    n_cols += 1;
                }
                (None, None) => {
                    var_map.push(VarMap::Split {
                        pos: n_cols,
                        neg: n_cols + 1,
                    });
                    n_cols += 2;
                }
            }
        }
        let n_eq = lp.eq_rows.len();
        let n_ge = lp.ge_rows.len();
        let n_range = range_rows.len();
        let m = n_eq + n_ge + n_range;
        let n_surplus = n_ge + n_range; // surplus per ge row, slack per range row
        let n_std = n_cols + n_surplus;
        let n_art = m;
        let width = n_std + n_art + 1;

        // Internal minimization objective over standard columns.
        let sign = match lp.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        let mut cost = vec![0.0; width];
        for (j, &vm) in var_map.iter().enumerate() {
            let c = sign * lp.objective[j];
            match vm {
                VarMap::ShiftLo { col, .. } => cost[col] += c,
                VarMap::FlipHi { col, .. } => cost[col] -= c,
                VarMap::Split { pos, neg } => {
                    cost[pos] += c;
                    cost[neg] -= c;
                }
            }
        }

        // Expand one original row into standard columns and the shifted rhs.
        let expand = |row: &[f64], rhs: f64| -> (Vec<f64>, f64) {
            let mut out = vec![0.0; width];
            let mut r = rhs;
            for (j, &vm) in var_map.iter().enumerate() {
                let a = row[j];
                if a == 0.0 {
                    continue;
                }
                match vm {
                    VarMap::ShiftLo { col, lo } => {
                        out[col] += a;
                        r -= a * lo;
                    }
                    VarMap::FlipHi { col, hi } => {
                        out[col] -= a;
                        r -= a * hi;
                    }
                    VarMap::Split { pos, neg } => {
                        out[pos] += a;
                        out[neg] -= a;
                    }
                }
            }
            (out, r)
        };

        let mut tableau = Vec::with_capacity(m);
        let mut row_sign = Vec::with_capacity(m);
        let mut surplus_col = n_cols;
        for (row, rhs) in &lp.eq_rows {
            let (mut out, r) = expand(row, *rhs);
            let s = if r < 0.0 { -1.0 } else { 1.0 };
            if s < 0.0 {
                for v in out.iter_mut() {
                    *v = -*v;
                }
            }
            out[width - 1] = r * s;
            tableau.push(out);
            row_sign.push(s);
        }
        for (row, rhs) in &lp.ge_rows {
            let (mut out, r) = expand(row, *rhs);
            out[surplus_col] = -1.0;
            let s = if r < 0.0 { -1.0 } else { 1.0 };
            if s < 0.0 {
                for v in out.iter_mut() {
                    *v = -*v;
                }
            }
            out[width - 1] = r * s;
            tableau.push(out);
            row_sign.push(s);
            surplus_col += 1;
        }
        for &(col, range) in &range_rows {
            // u_col + slack = range; range >= 0 by bound validation.
            let mut out = vec![0.0; width];
            out[col] = 1.0;
            out[surplus_col] = 1.0;
            out[width - 1] = range;
            tableau.push(out);
            row_sign.push(1.0);
            surplus_col += 1;
        }
        debug_assert_eq!(surplus_col, n_std);

        // Artificial columns and the initial basis.
        let mut basis = Vec::with_capacity(m);
        for (i, row) in tableau.iter_mut().enumerate() {
            row[n_std + i] = 1.0;
            basis.push(n_std + i);
        }

        // Phase-2 reduced costs start as the raw costs: every basic variable
        // is artificial with zero phase-2 cost.
        let cost2 = cost;
        // Phase 1 minimizes the artificial sum; price out the basis.
        let mut cost1 = vec![0.0; width];
        for row in &tableau {
            for j in 0..width {
                cost1[j] -= row[j];
            }
        }
        for i in 0..m {
            cost1[n_std + i] = 0.0;
        }

        Simplex {
            lp,
            opts: opts.clone(),
            var_map,
            n_art,
            tableau,
            cost2,
            cost1,
            basis,
            row_sign,
            n_user_rows: n_eq + n_ge,
            bland: false,
            stall: 0,
        }
    }

    fn width(&self) -> usize {
        self.cost2.len()
    }

    fn n_std(&self) -> usize {
        self.width() - 1 - self.n_art
    }

    fn m(&self) -> usize {
        self.tableau.len()
    }

    fn is_artificial(&self, col: usize) -> bool {
        col >= self.n_std()
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let width = self.width();
        let piv = self.tableau[row][col];
        let inv = 1.0 / piv;
        for v in self.tableau[row].iter_mut() {
            *v *= inv;
        }
        let pivot_row = self.tableau[row].clone();
        for (i, r) in self.tableau.iter_mut().enumerate() {
            if i != row {
                let factor = r[col];
                if factor != 0.0 {
                    for j in 0..width {
                        r[j] -= factor * pivot_row[j];
                    }
                    r[col] = 0.0;
                }
            }
        }
        for costs in [&mut self.cost1, &mut self.cost2] {
            let factor = costs[col];
            if factor != 0.0 {
                for j in 0..width {
                    costs[j] -= factor * pivot_row[j];
                }
                costs[col] = 0.0;
            }
        }
        self.basis[row] = col;
    }

    /// One simplex phase on the given cost row. Returns `None` at optimality
    /// or `Some(col)` for an entering column with no blocking row.
    fn phase(&mut self, phase_one: bool) -> Result<Option<usize>> {
        let mut in_basis = vec![false; self.width() - 1];
        for &b in &self.basis {
            in_basis[b] = true;
        }
        let mut iters = 0usize;
        loop {
            iters += 1;
            if iters > self.opts.max_iter {
                return Err(Error::InternalConsistency(format!(
                    "simplex iteration limit {} exceeded",
                    self.opts.max_iter
                )));
            }
            let costs = if phase_one { &self.cost1 } else { &self.cost2 };
            // Entering column.
            let mut entering: Option<usize> = None;
            let mut best = -self.opts.opt_tol;
            for j in 0..self.width() - 1 {
                if in_basis[j] || self.is_artificial(j) {
                    continue;
                }
                let c = costs[j];
                if self.bland {
                    if c < -self.opts.opt_tol {
                        entering = Some(j);
                        break;
                    }
                } else if c < best {
                    best = c;
                    entering = Some(j);
                }
            }
            let Some(col) = entering else {
                return Ok(None);
            };
            // Ratio test.
            let mut leave: Option<usize> = None;
            let mut best_ratio = f64::INFINITY;
            for i in 0..self.m() {
                let a = self.tableau[i][col];
                if a > self.opts.pivot_tol {
                    let ratio = self.tableau[i][self.width() - 1] / a;
                    let better = ratio < best_ratio - 1e-12
                        || ((ratio - best_ratio).abs() <= 1e-12
                            && leave.is_none_or(|l| self.basis[i] < self.basis[l]));
                    if better {
                        best_ratio = ratio;
                        leave = Some(i);
                    }
                }
            }
            let Some(row) = leave else {
                return Ok(Some(col));
            };
            if best_ratio <= self.opts.feas_tol {
                self.stall += 1;
                if self.stall >= self.opts.stall_switch {
                    self.bland = true;
                }
            } else {
                self.stall = 0;
            }
            in_basis[self.basis[row]] = false;
            in_basis[col] = true;
            self.pivot(row, col);
        }
    }

    fn current_u(&self) -> Vec<f64> {
        let mut u = vec![0.0; self.width() - 1];
        for (i, &b) in self.basis.iter().enumerate() {
            u[b] = self.tableau[i][self.width() - 1];
        }
        u
    }

    fn to_original(&self, u: &[f64]) -> Vec<f64> {
        self.var_map
            .iter()
            .map(|vm| match *vm {
                VarMap::ShiftLo { col, lo } => lo + u[col],
                VarMap::FlipHi { col, hi } => hi - u[col],
                VarMap::Split { pos, neg } => u[pos] - u[neg],
            })
            .collect()
    }

    fn direction_to_original(&self, d: &[f64]) -> Vec<f64> {
        self.var_map
            .iter()
            .map(|vm| match *vm {
                VarMap::ShiftLo { col, .. } => d[col],
                VarMap::FlipHi { col, .. } => -d[col],
                VarMap::Split { pos, neg } => d[pos] - d[neg],
            })
            .collect()
    }

    fn objective_at(&self, x: &[f64]) -> f64 {
        self.lp
            .objective
            .iter()
            .zip(x.iter())
            .map(|(c, v)| c * v)
            .sum()
    }

    /// Row duals for the user rows from the reduced costs of the artificial
    /// columns: `y_i = art_cost - cbar_art_i`, undoing row negation and the
    /// sense flip.
    fn duals(&self, costs: &[f64], art_cost: f64) -> Vec<f64> {
        let sense = match self.lp.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        (0..self.n_user_rows)
            .map(|i| {
                let cbar = costs[self.n_std() + i];
                sense * self.row_sign[i] * (art_cost - cbar)
            })
            .collect()
    }

    fn run(mut self) -> Result<LpResult> {
        // Phase 1.
        let unb = self.phase(true)?;
        debug_assert!(unb.is_none(), "phase one is bounded below by zero");
        let infeas = -self.cost1[self.width() - 1];
        if infeas > self.opts.feas_tol {
            let farkas = self.duals(&self.cost1, 1.0);
            return Ok(LpResult {
                status: LpStatus::Infeasible,
                x_opt: Vec::new(),
                objective_value: f64::NAN,
                dual: Vec::new(),
                certificate: Some(LpCertificate::Farkas(farkas)),
            });
        }
        // Drive basic artificials out where possible; rows where no pivot
        // exists are redundant and keep a zero-valued artificial.
        for i in 0..self.m() {
            if self.is_artificial(self.basis[i]) {
                let col =
                    (0..self.n_std()).find(|&j| self.tableau[i][j].abs() > self.opts.pivot_tol);
                if let Some(col) = col {
                    self.pivot(i, col);
                }
            }
        }
        // Phase 2.
        self.stall = 0;
        self.bland = false;
        match self.phase(false)? {
            Some(col) => {
                // Unbounded: build the ray in standard coordinates.
                let mut d = vec![0.0; self.width() - 1];
                d[col] = 1.0;
                for (i, &b) in self.basis.iter().enumerate() {
                    if b < d.len() {
                        d[b] = -self.tableau[i][col];
                    }
                }
                let x = self.to_original(&self.current_u());
                let ray = self.direction_to_original(&d);
                let objective_value = self.objective_at(&x);
                Ok(LpResult {
                    status: LpStatus::Unbounded,
                    x_opt: x,
                    objective_value,
                    dual: Vec::new(),
                    certificate: Some(LpCertificate::Ray(ray)),
                })
            }
            None => {
                let u = self.current_u();
                let x = self.to_original(&u);
                let objective_value = self.objective_at(&x);
                // Residual check guards against a numerically degenerate basis.
                let mut worst: f64 = 0.0;
                for (row, rhs) in &self.lp.eq_rows {
                    let ax: f64 = row.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
                    worst = worst.max((ax - rhs).abs());
                }
                for (row, rhs) in &self.lp.ge_rows {
                    let ax: f64 = row.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
                    worst = worst.max((rhs - ax).max(0.0));
                }
                let scale = 1.0
                    + self
                        .lp
                        .eq_rows
                        .iter()
                        .chain(self.lp.ge_rows.iter())
                        .map(|(_, r)| r.abs())
                        .fold(0.0, f64::max);
                if worst > 1e-6 * scale {
                    return Err(Error::SingularBasis {
                        columns: self.basis.clone(),
                    });
                }
                let dual = self.duals(&self.cost2, 0.0);
                Ok(LpResult {
                    status: LpStatus::Optimal,
                    x_opt: x,
                    objective_value,
                    dual,
                    certificate: None,
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn max_x_with_upper_bound_row() {
        let mut lp = LinearProgram::new(Sense::Maximize, vec![1.0]);
        lp.add_le(vec![1.0], 1.0);
        let r = lp.solve().unwrap();
        assert_eq!(r.status, LpStatus::Optimal);
        assert!((r.x_opt[0] - 1.0).abs() < 1e-9);
        assert!((r.objective_value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn contradictory_rows_are_infeasible() {
        let mut lp = LinearProgram::new(Sense::Minimize, vec![0.0]);
        lp.add_ge(vec![1.0], 1.0);
        lp.add_ge(vec![-1.0], 0.0);
        let r = lp.solve().unwrap();
        assert_eq!(r.status, LpStatus::Infeasible);
        assert!(matches!(r.certificate, Some(LpCertificate::Farkas(_))));
    }

    #[test]
    fn unbounded_reports_improving_ray() {
        let mut lp = LinearProgram::new(Sense::Maximize, vec![1.0, 0.0]);
        lp.set_bounds(0, Some(0.0), None);
        lp.set_bounds(1, Some(0.0), None);
        lp.add_ge(vec![0.0, 1.0], 1.0);
        let r = lp.solve().unwrap();
        assert_eq!(r.status, LpStatus::Unbounded);
        let Some(LpCertificate::Ray(ray)) = r.certificate else {
            panic!("missing ray");
        };
        // Ray improves the (maximize) objective and preserves feasibility.
        assert!(ray[0] > 0.0);
        assert!(ray[1] >= -1e-12);
    }

    #[test]
    fn equality_and_free_variables() {
        // min x + y st x - y = 3 with both free: unbounded.
        let mut lp = LinearProgram::new(Sense::Minimize, vec![1.0, 1.0]);
        lp.add_eq(vec![1.0, -1.0], 3.0);
        let r = lp.solve().unwrap();
        assert_eq!(r.status, LpStatus::Unbounded);

        // With y >= 0 it attains x = 3, y = 0.
        let mut lp = LinearProgram::new(Sense::Minimize, vec![1.0, 1.0]);
        lp.add_eq(vec![1.0, -1.0], 3.0);
        lp.set_bounds(1, Some(0.0), None);
        let r = lp.solve().unwrap();
        assert_eq!(r.status, LpStatus::Optimal);
        assert!((r.objective_value - 3.0).abs() < 1e-9);
    }

    #[test]
    fn two_sided_bounds() {
        // max x + 2y, -1 <= x <= 2, 0 <= y <= 0.5
        let mut lp = LinearProgram::new(Sense::Maximize, vec![1.0, 2.0]);
        lp.set_bounds(0, Some(-1.0), Some(2.0));
        lp.set_bounds(1, Some(0.0), Some(0.5));
        let r = lp.solve().unwrap();
        assert_eq!(r.status, LpStatus::Optimal);
        assert!((r.x_opt[0] - 2.0).abs() < 1e-9);
        assert!((r.x_opt[1] - 0.5).abs() < 1e-9);
        assert!((r.objective_value - 3.0).abs() < 1e-9);
    }

    #[test]
    fn weak_duality_reconstructs_objective() {
        // min 2x + 3y st x + y >= 2, x + 3y >= 3, x, y >= 0
        let mut lp = LinearProgram::new(Sense::Minimize, vec![2.0, 3.0]);
        lp.set_bounds(0, Some(0.0), None);
        lp.set_bounds(1, Some(0.0), None);
        lp.add_ge(vec![1.0, 1.0], 2.0);
        lp.add_ge(vec![1.0, 3.0], 3.0);
        let r = lp.solve().unwrap();
        assert_eq!(r.status, LpStatus::Optimal);
        let by: f64 = 2.0 * r.dual[0] + 3.0 * r.dual[1];
        assert!(
            (by - r.objective_value).abs() < 1e-8,
            "duality gap {by} vs {}",
            r.objective_value
        );
        // Dual feasibility for a minimization with ge rows: A^T y <= c, y >= 0.
        assert!(r.dual.iter().all(|&y| y >= -1e-9));
        assert!(r.dual[0] + r.dual[1] <= 2.0 + 1e-8);
        assert!(r.dual[0] + 3.0 * r.dual[1] <= 3.0 + 1e-8);
    }

    #[test]
    fn objective_scaling_preserves_argmin() {
        let build = |scale: f64| {
            let mut lp = LinearProgram::new(Sense::Minimize, vec![scale, scale * -2.0]);
            lp.set_bounds(0, Some(0.0), Some(4.0));
            lp.set_bounds(1, Some(0.0), Some(4.0));
            lp.add_ge(vec![1.0, -1.0], -2.0);
            lp
        };
        let a = build(1.0).solve().unwrap();
        let b = build(2.0).solve().unwrap();
        assert_eq!(a.status, LpStatus::Optimal);
        assert_eq!(b.status, LpStatus::Optimal);
        assert_eq!(a.x_opt, b.x_opt);
        assert!((b.objective_value - 2.0 * a.objective_value).abs() < 1e-9);
    }

    #[test]
    fn deterministic_repeat() {
        let mut lp = LinearProgram::new(Sense::Maximize, vec![3.0, 5.0, -1.0]);
        for j in 0..3 {
            lp.set_bounds(j, Some(0.0), None);
        }
        lp.add_le(vec![1.0, 2.0, 1.0], 10.0);
        lp.add_le(vec![3.0, 1.0, 0.0], 15.0);
        lp.add_ge(vec![0.0, 1.0, 1.0], 1.0);
        let a = lp.solve().unwrap();
        let b = lp.solve().unwrap();
        assert_eq!(a.x_opt, b.x_opt);
        assert_eq!(a.objective_value, b.objective_value);
    }

    #[test]
    fn degenerate_problem_terminates() {
        // Beale's cycling example; the Bland switch must prevent cycling.
        let mut lp = LinearProgram::new(Sense::Minimize, vec![-0.75, 150.0, -0.02, 6.0]);
        for j in 0..4 {
            lp.set_bounds(j, Some(0.0), None);
        }
        lp.add_le(vec![0.25, -60.0, -0.04, 9.0], 0.0);
        lp.add_le(vec![0.5, -90.0, -0.02, 3.0], 0.0);
        lp.add_le(vec![0.0, 0.0, 1.0, 0.0], 1.0);
        let r = lp.solve().unwrap();
        assert_eq!(r.status, LpStatus::Optimal);
        assert!((r.objective_value - (-0.05)).abs() < 1e-9);
    }
}
