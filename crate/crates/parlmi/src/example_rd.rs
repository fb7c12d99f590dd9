//! Reaction-diffusion stabilization instance: P1 finite elements on the unit
//! square with homogeneous Neumann boundary, packaged as a parametric LMI.
//!
//! The semi-discrete system is `M ydot + A(x; mu) y = 0` with
//! `A(x; mu) = A0 - mu A1 + x A2`, where `A0` is the stiffness matrix, `A1`
//! the mass matrix restricted to the reaction region, and `A2 = b b^T` the
//! rank-one feedback term from the actuation region. Strict stability with a
//! margin `rho` becomes the LMI `F(x; mu) = (1 - rho) A0 + (-mu - rho) A1 +
//! x A2 >= 0` scaled against `F_S = A0 + A1`, and the minimal stabilizing
//! gain is the SDP with cost `c = 1`.

use crate::error::{Error, Result};
use crate::problem::{ParametricLMI, PolynomialMap, ProblemFunctions};
use crate::sparse::{CooMatrix, SparseSymMatrix};

/// Axis-aligned rectangle inside the unit square.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Rect { x0, x1, y0, y1 }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }

    pub fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }

    fn inside_unit_square(&self) -> bool {
        self.x0 >= 0.0
            && self.x1 <= 1.0
            && self.y0 >= 0.0
            && self.y1 <= 1.0
            && self.x0 < self.x1
            && self.y0 < self.y1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    /// Nodes per side `m`; the system dimension is `m^2`.
    pub nodes_per_side: usize,
    /// Reaction region (characteristic function multiplies `mu y`).
    pub omega1: Rect,
    /// Actuation region (both sensing and forcing).
    pub omega2: Rect,
    /// Stability margin.
    pub rho: f64,
    pub mu_range: (f64, f64),
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            nodes_per_side: 51,
            omega1: Rect::new(0.0, 0.5, 0.0, 0.5),
            omega2: Rect::new(0.5, 1.0, 0.5, 1.0),
            rho: 0.01,
            mu_range: (0.0, 3.0),
        }
    }
}

impl GridSpec {
    /// Default regions and margin at another grid size.
    pub fn with_nodes(m: usize) -> Self {
        GridSpec {
            nodes_per_side: m,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes_per_side < 3 {
            return Err(Error::InvalidParameter {
                name: "nodes_per_side".to_string(),
                reason: "must be at least 3".to_string(),
            });
        }
        if !self.omega1.inside_unit_square() || !self.omega2.inside_unit_square() {
            return Err(Error::InvalidParameter {
                name: "omega1/omega2".to_string(),
                reason: "regions must be nonempty rectangles inside the unit square".to_string(),
            });
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::InvalidParameter {
                name: "rho".to_string(),
                reason: format!("must be in (0, 1), got {}", self.rho),
            });
        }
        if self.mu_range.0 > self.mu_range.1 {
            return Err(Error::InvalidParameter {
                name: "mu_range".to_string(),
                reason: "empty interval".to_string(),
            });
        }
        Ok(())
    }
}

/// The assembled finite-element matrices.
#[derive(Debug, Clone)]
pub struct AssembledSystem {
    /// Full mass matrix `M` (SPD).
    pub mass: SparseSymMatrix,
    /// Neumann stiffness matrix `A0` (PSD, constants in the null space).
    pub stiffness: SparseSymMatrix,
    /// Mass matrix restricted to elements whose centroid lies in omega1.
    pub omega1_mass: SparseSymMatrix,
    /// Rank-one feedback matrix `A2 = b b^T`.
    pub feedback: SparseSymMatrix,
    /// Load vector `b_i = integral over omega2 of phi_i`.
    pub b_vector: Vec<f64>,
}

/// P1 assembly on a uniform square mesh: each grid square is split into two
/// triangles, characteristic functions are evaluated at element centroids,
/// and no boundary rows are eliminated (homogeneous Neumann).
pub fn assemble(spec: &GridSpec) -> Result<AssembledSystem> {
    spec.validate()?;
    let m = spec.nodes_per_side;
    let n = m * m;
    let h = 1.0 / (m - 1) as f64;
    let node = |ix: usize, iy: usize| iy * m + ix;

    let mut stiff = CooMatrix::new(n);
    let mut mass = CooMatrix::new(n);
    let mut mass1 = CooMatrix::new(n);
    let mut b = vec![0.0; n];

    let mut add_triangle = |verts: [(usize, f64, f64); 3]| {
        let (x1, y1) = (verts[0].1, verts[0].2);
        let (x2, y2) = (verts[1].1, verts[1].2);
        let (x3, y3) = (verts[2].1, verts[2].2);
        let det = (x2 - x1) * (y3 - y1) - (x3 - x1) * (y2 - y1);
        let area = 0.5 * det.abs();
        let bq = [y2 - y3, y3 - y1, y1 - y2];
        let cq = [x3 - x2, x1 - x3, x2 - x1];
        let cx = (x1 + x2 + x3) / 3.0;
        let cy = (y1 + y2 + y3) / 3.0;
        let in_omega1 = spec.omega1.contains(cx, cy);
        let in_omega2 = spec.omega2.contains(cx, cy);
        for a in 0..3 {
            for c in 0..3 {
                let k = (bq[a] * bq[c] + cq[a] * cq[c]) / (4.0 * area);
                stiff.push(verts[a].0, verts[c].0, k);
                let mloc = area / 12.0 * if a == c { 2.0 } else { 1.0 };
                mass.push(verts[a].0, verts[c].0, mloc);
                if in_omega1 {
                    mass1.push(verts[a].0, verts[c].0, mloc);
                }
            }
            if in_omega2 {
                b[verts[a].0] += area / 3.0;
            }
        }
    };

    for cy in 0..m - 1 {
        for cx in 0..m - 1 {
            let p = |ix: usize, iy: usize| (node(ix, iy), ix as f64 * h, iy as f64 * h);
            let n00 = p(cx, cy);
            let n10 = p(cx + 1, cy);
            let n01 = p(cx, cy + 1);
            let n11 = p(cx + 1, cy + 1);
            add_triangle([n00, n10, n11]);
            add_triangle([n00, n11, n01]);
        }
    }

    let mut feedback = CooMatrix::new(n);
    for (i, &bi) in b.iter().enumerate() {
        if bi == 0.0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate().take(i + 1) {
            if bj != 0.0 {
                feedback.push_sym(i, j, bi * bj);
            }
        }
    }

    Ok(AssembledSystem {
        mass: SparseSymMatrix::from_coo(&mass, "M")?,
        stiffness: SparseSymMatrix::from_coo(&stiff, "A0")?,
        omega1_mass: SparseSymMatrix::from_coo(&mass1, "A1")?,
        feedback: SparseSymMatrix::from_coo(&feedback, "A2")?,
        b_vector: b,
    })
}

/// Packages the assembled system as a parametric LMI with `Q_F = 3`,
/// `theta0(mu) = (1 - rho, -mu - rho, 0)`, `thetaL = (0, 0, 1)`, unit cost
/// (minimal stabilizing gain), and `F_S = A0 + A1`.
pub fn to_parametric_lmi(
    sys: &AssembledSystem,
    rho: f64,
    mu_range: (f64, f64),
) -> Result<ParametricLMI> {
    let n = sys.stiffness.dim();
    let mut fs_coo = CooMatrix::new(n);
    for (i, j, v) in sys.stiffness.iter().chain(sys.omega1_mass.iter()) {
        fs_coo.push(i, j, v);
    }
    let f_s = SparseSymMatrix::from_coo(&fs_coo, "F_S")?;
    let functions = ProblemFunctions {
        num_terms: 3,
        num_decision: 1,
        domain: vec![mu_range],
        theta0: vec![
            PolynomialMap::constant(1, 1.0 - rho),
            PolynomialMap::constant(1, -rho).add_term(vec![1], -1.0),
            PolynomialMap::zero(1),
        ],
        theta_l: vec![
            vec![PolynomialMap::zero(1)],
            vec![PolynomialMap::zero(1)],
            vec![PolynomialMap::constant(1, 1.0)],
        ],
        cost: vec![PolynomialMap::constant(1, 1.0)],
    };
    ParametricLMI::new(
        vec![
            sys.stiffness.clone(),
            sys.omega1_mass.clone(),
            sys.feedback.clone(),
        ],
        f_s,
        functions,
    )
}

/// Assembles and packages in one step.
pub fn build_problem(spec: &GridSpec) -> Result<ParametricLMI> {
    let sys = assemble(spec)?;
    to_parametric_lmi(&sys, spec.rho, spec.mu_range)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{alpha, extremal_eigpair, Extremal, SpectralOptions};

    #[test]
    fn stiffness_row_sums_vanish() {
        for m in [5, 11] {
            let sys = assemble(&GridSpec::with_nodes(m)).unwrap();
            let n = sys.stiffness.dim();
            let ones = vec![1.0; n];
            let mut out = vec![0.0; n];
            sys.stiffness.mul_vec(&ones, &mut out);
            let worst = out.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
            assert!(worst < 1e-12, "m = {m}: worst row sum {worst}");
        }
    }

    #[test]
    fn total_mass_is_unit_area() {
        for m in [5, 11] {
            let sys = assemble(&GridSpec::with_nodes(m)).unwrap();
            let n = sys.mass.dim();
            let ones = vec![1.0; n];
            let total = sys.mass.quad_form(&ones);
            assert!((total - 1.0).abs() < 1e-12, "m = {m}: total mass {total}");
        }
    }

    #[test]
    fn load_vector_integrates_omega2_area() {
        let sys = assemble(&GridSpec::with_nodes(11)).unwrap();
        let total: f64 = sys.b_vector.iter().sum();
        assert!((total - 0.25).abs() < 1e-12, "sum b = {total}");
    }

    #[test]
    fn feedback_matrix_is_rank_one_outer_product() {
        let sys = assemble(&GridSpec::with_nodes(7)).unwrap();
        let n = sys.feedback.dim();
        // A2 v = b (b . v) for a spread of v.
        for seed in 0..5u64 {
            let v: Vec<f64> = (0..n)
                .map(|i| ((i as u64 * 2654435761 + seed * 97) % 1000) as f64 / 500.0 - 1.0)
                .collect();
            let dot: f64 = sys.b_vector.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
            let mut out = vec![0.0; n];
            sys.feedback.mul_vec(&v, &mut out);
            for i in 0..n {
                assert!((out[i] - sys.b_vector[i] * dot).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn scaling_matrix_is_spd() {
        // ParametricLMI::new factors F_S = A0 + A1; success is the SPD check.
        for m in [5, 11] {
            let p = build_problem(&GridSpec::with_nodes(m)).unwrap();
            assert_eq!(p.dim(), m * m);
            assert_eq!(p.num_terms(), 3);
        }
    }

    #[test]
    fn theta_values_on_default_instance() {
        let p = build_problem(&GridSpec::with_nodes(5)).unwrap();
        let t = p.eval_theta(&[3.0]).unwrap();
        assert!((t.theta0[0] - 0.99).abs() < 1e-15);
        assert!((t.theta0[1] + 3.01).abs() < 1e-15);
        assert_eq!(t.theta0[2], 0.0);
        assert_eq!(t.theta_l[0][0], 0.0);
        assert_eq!(t.theta_l[1][0], 0.0);
        assert_eq!(t.theta_l[2][0], 1.0);
        assert_eq!(t.cost[0], 1.0);
    }

    #[test]
    fn lmi_matches_shifted_stability_matrix() {
        // F(x; mu) equals A(x; mu) - rho F_S entrywise on a 5x5 grid.
        let spec = GridSpec::with_nodes(5);
        let sys = assemble(&spec).unwrap();
        let p = to_parametric_lmi(&sys, spec.rho, spec.mu_range).unwrap();
        let n = p.dim();
        for (x, mu) in [(0.3, 1.0), (2.0, 2.7), (0.0, 0.0)] {
            let f = p.assemble_f(&[x], &[mu]).unwrap();
            let mut shifted = nalgebra::DMatrix::zeros(n, n);
            sys.stiffness.add_scaled_to_dense(1.0 - spec.rho, &mut shifted);
            sys.omega1_mass
                .add_scaled_to_dense(-mu - spec.rho, &mut shifted);
            sys.feedback.add_scaled_to_dense(x, &mut shifted);
            assert!((&f - &shifted).abs().max() < 1e-13);
        }
    }

    #[test]
    fn open_loop_is_unstable_at_large_mu() {
        // x = 0, mu = 3: the constant vector has negative Rayleigh quotient.
        let p = build_problem(&GridSpec::with_nodes(7)).unwrap();
        let r = alpha(&p, &[0.0], &[3.0]).unwrap();
        assert!(r.alpha < -1e-3, "alpha = {}", r.alpha);
    }

    #[test]
    fn large_gain_stabilizes_at_mu_zero() {
        // mu = 0, x = 1000 rho: F is positive semidefinite on small grids.
        let p = build_problem(&GridSpec::with_nodes(7)).unwrap();
        let r = alpha(&p, &[10.0], &[0.0]).unwrap();
        assert!(r.alpha > -1e-9, "alpha = {}", r.alpha);
    }

    #[test]
    fn alpha_at_origin_equals_minus_rho() {
        // x = 0, mu = 0: the infimum is attained by the constant vector,
        // where the quotient is exactly -rho; alpha is strictly negative.
        let spec = GridSpec::with_nodes(11);
        let p = build_problem(&spec).unwrap();
        let r = alpha(&p, &[0.0], &[0.0]).unwrap();
        assert!(r.alpha < 0.0);
        assert!((r.alpha + spec.rho).abs() < 1e-8, "alpha = {}", r.alpha);
    }

    #[test]
    fn box_bounds_for_stiffness_term() {
        // lo_1 = 0 (constants in the null space of A0) and hi_1 = 1
        // (A0 <= F_S with equality direction supported away from omega1).
        let p = build_problem(&GridSpec::with_nodes(7)).unwrap();
        let opts = SpectralOptions::default();
        let small = extremal_eigpair(&p.f_matrices()[0], p.f_s(), Extremal::Smallest, &opts).unwrap();
        let large = extremal_eigpair(&p.f_matrices()[0], p.f_s(), Extremal::Largest, &opts).unwrap();
        assert!(small.value.abs() < 1e-10, "lo = {}", small.value);
        assert!((large.value - 1.0).abs() < 1e-10, "hi = {}", large.value);
    }
}
