//! Utility under perfect privacy.
//!
//! A release `U` with `X - Y - U` is perfectly private when `U ⊥ X`. Every
//! conditional `p_{Y|u}` must then lie in the polytope `S`, and optimal
//! mechanisms can be assembled from the vertices of `S`. Maximizing `I(Y;U)`,
//! minimizing `E[(Y - U)²]` or minimizing `Pr(Y ≠ U)` each becomes a
//! standard-form LP over vertex weights because all three objectives are
//! concave in `p_{Y|u}`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::lp::{solve, LpSolution, LpStatus, StandardLp};
use crate::math::log2;
use crate::numerics::{null_space, Matrix, DEFAULT_RANK_TOL};
use crate::polytope::{
    build_polytope, identical_column_groups, ColumnGroups, PrivacyPolytope, DEFAULT_COL_TOL,
    DEFAULT_MAX_Y,
};
use crate::probability::{conditional_channel, entropy, Channel, JointPmf, JointPmf3, ProbVector};

/// Atoms with LP weight below this are dropped from mechanisms.
pub const WEIGHT_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrivacyOptions {
    /// Relative singular-value threshold for the null space.
    pub rank_tol: f64,
    /// L∞ threshold for identical channel columns.
    pub col_tol: f64,
    /// Largest alphabet for which vertices are enumerated.
    pub max_y: usize,
}

impl Default for PrivacyOptions {
    fn default() -> Self {
        PrivacyOptions {
            rank_tol: DEFAULT_RANK_TOL,
            col_tol: DEFAULT_COL_TOL,
            max_y: DEFAULT_MAX_Y,
        }
    }
}

/// A finite release variable described by its mass and conditionals.
#[derive(Debug, Clone, PartialEq)]
pub struct Mechanism {
    pub p_u: ProbVector,
    /// `p_{Y|u}` per atom (for the general model, `p_{W|u}`).
    pub conditionals: Vec<ProbVector>,
    /// `P_{U|Y}`, |U| × |Y|.
    pub channel_u_given_y: Matrix,
    /// Released value per atom, when the utility assigns one.
    pub realizations: Option<Vec<f64>>,
    /// Index of the polytope vertex each atom came from.
    pub vertex_index: Vec<usize>,
}

impl Mechanism {
    fn from_weights(poly: &PrivacyPolytope, weights: &[f64], center: &[f64]) -> Mechanism {
        let kept: Vec<usize> = (0..weights.len())
            .filter(|&i| weights[i] >= WEIGHT_FLOOR)
            .collect();
        let total: f64 = kept.iter().map(|&i| weights[i]).sum();
        let p_u: Vec<f64> = kept.iter().map(|&i| weights[i] / total).collect();
        let conditionals: Vec<ProbVector> = kept
            .iter()
            .map(|&i| poly.extreme_points[i].point.clone())
            .collect();
        let n = center.len();
        let mut ch = Matrix::zeros(kept.len(), n);
        for (u, c) in conditionals.iter().enumerate() {
            for y in 0..n {
                ch[(u, y)] = p_u[u] * c[y] / center[y];
            }
        }
        Mechanism {
            p_u: ProbVector::from_raw(p_u),
            conditionals,
            channel_u_given_y: ch,
            realizations: None,
            vertex_index: kept,
        }
    }

    pub fn support_size(&self) -> usize {
        self.p_u.len()
    }

    /// `max_u ‖P p_{Y|u} − p_X‖∞`; zero for a perfectly private mechanism.
    pub fn independence_residual(&self, channel: &Channel, p_x: &[f64]) -> f64 {
        self.conditionals
            .iter()
            .map(|c| {
                channel
                    .apply(c)
                    .iter()
                    .zip(p_x)
                    .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
            })
            .fold(0.0, f64::max)
    }

    /// `‖Σ_u p_U(u) p_{Y|u} − center‖∞`.
    pub fn marginal_error(&self, center: &[f64]) -> f64 {
        let mut mix = vec![0.0; center.len()];
        for (w, c) in self.p_u.iter().zip(&self.conditionals) {
            for (m, v) in mix.iter_mut().zip(c.iter()) {
                *m += w * v;
            }
        }
        mix.iter()
            .zip(center)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// `p(u, y)` as a |U| × |Y| table.
    pub fn joint_table(&self) -> Matrix {
        let n = self.conditionals.first().map_or(0, |c| c.len());
        let mut m = Matrix::zeros(self.support_size(), n);
        for (u, c) in self.conditionals.iter().enumerate() {
            for y in 0..n {
                m[(u, y)] = self.p_u[u] * c[y];
            }
        }
        m
    }
}

/// Outcome of one of the perfect-privacy LPs.
#[derive(Debug, Clone)]
pub struct PrivacyLp {
    pub polytope: PrivacyPolytope,
    /// Per-vertex cost as handed to the solver.
    pub costs: Vec<f64>,
    pub lp: LpSolution,
    pub mechanism: Mechanism,
}

fn solve_over_vertices(
    poly: PrivacyPolytope,
    costs: Vec<f64>,
    center: &[f64],
) -> Result<PrivacyLp> {
    let e = poly.vertex_matrix();
    let lp = solve(&StandardLp::new(costs.clone(), e, center.to_vec())?)?;
    if lp.status != LpStatus::Optimal {
        return Err(Error::Numerical(format!(
            "vertex LP ended with status {:?}; the center must be a convex combination of the vertices",
            lp.status
        )));
    }
    let mechanism = Mechanism::from_weights(&poly, &lp.weights, center);
    Ok(PrivacyLp {
        polytope: poly,
        costs,
        lp,
        mechanism,
    })
}

/// True when the channel has a nontrivial null space.
pub fn perfect_privacy_feasible(channel: &Channel, rank_tol: f64) -> Result<bool> {
    Ok(null_space(channel.matrix(), rank_tol)?.cols() > 0)
}

#[derive(Debug, Clone)]
pub struct G0Result {
    /// `max I(Y;U)` in bits.
    pub value: f64,
    /// `min H(Y|U)`, the LP optimum.
    pub min_cond_entropy: f64,
    pub h_y: f64,
    pub solution: PrivacyLp,
}

impl G0Result {
    pub fn mechanism(&self) -> &Mechanism {
        &self.solution.mechanism
    }
}

/// Largest `I(Y;U)` over perfectly private releases.
///
/// When the channel is injective the polytope is the single point `p_Y` and
/// the result is `0` with a one-atom mechanism.
pub fn g0(j: &JointPmf, opts: &PrivacyOptions) -> Result<G0Result> {
    let channel = conditional_channel(j);
    let poly = build_polytope(&channel, j.p_y(), opts.rank_tol, opts.max_y)?;
    let costs = poly
        .extreme_points
        .iter()
        .map(|e| entropy(&e.point))
        .collect();
    let solution = solve_over_vertices(poly, costs, j.p_y())?;
    let h_y = entropy(j.p_y());
    let min_cond_entropy = solution.lp.objective;
    Ok(G0Result {
        value: (h_y - min_cond_entropy).max(0.0),
        min_cond_entropy,
        h_y,
        solution,
    })
}

pub fn mean(p: &[f64], values: &[f64]) -> f64 {
    p.iter().zip(values).map(|(a, b)| a * b).sum()
}

pub fn variance(p: &[f64], values: &[f64]) -> f64 {
    let m = mean(p, values);
    let s: f64 = p
        .iter()
        .zip(values)
        .map(|(a, b)| a * (b - m) * (b - m))
        .sum();
    s.max(0.0)
}

/// `1, 2, …, n`.
pub fn default_y_values(n: usize) -> Vec<f64> {
    (1..=n).map(|v| v as f64).collect()
}

#[derive(Debug, Clone)]
pub struct MmseResult {
    pub mmse: f64,
    pub variance_y: f64,
    pub solution: PrivacyLp,
}

impl MmseResult {
    pub fn mechanism(&self) -> &Mechanism {
        &self.solution.mechanism
    }
}

/// Smallest `E[(Y − U)²]` over perfectly private releases, with `Y` taking
/// the values `y_values`. Each atom releases `E[Y | U = u]`.
pub fn mmse_perfect_privacy(
    j: &JointPmf,
    y_values: &[f64],
    opts: &PrivacyOptions,
) -> Result<MmseResult> {
    if y_values.len() != j.y_len() {
        return Err(Error::invalid(format!(
            "{} y values given for an alphabet of size {}",
            y_values.len(),
            j.y_len()
        )));
    }
    if y_values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("y values must be finite"));
    }
    let channel = conditional_channel(j);
    let poly = build_polytope(&channel, j.p_y(), opts.rank_tol, opts.max_y)?;
    let costs = poly
        .extreme_points
        .iter()
        .map(|e| variance(&e.point, y_values))
        .collect();
    let mut solution = solve_over_vertices(poly, costs, j.p_y())?;
    let mech = &mut solution.mechanism;
    mech.realizations = Some(
        mech.conditionals
            .iter()
            .map(|c| mean(c, y_values))
            .collect(),
    );
    Ok(MmseResult {
        mmse: solution.lp.objective.max(0.0),
        variance_y: variance(j.p_y(), y_values),
        solution,
    })
}

#[derive(Debug, Clone)]
pub struct MinErrorResult {
    pub p_err: f64,
    /// Zero-based guess per atom; `mechanism.realizations` holds the same
    /// guesses as one-based symbol numbers.
    pub guesses: Vec<usize>,
    pub solution: PrivacyLp,
}

impl MinErrorResult {
    pub fn mechanism(&self) -> &Mechanism {
        &self.solution.mechanism
    }
}

fn argmax_first(p: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in p.iter().enumerate() {
        if v > p[best] {
            best = i;
        }
    }
    best
}

/// Smallest `Pr(Y ≠ U)` over perfectly private releases. Each atom guesses
/// the most likely symbol of its conditional (smallest index on ties).
pub fn min_error_perfect_privacy(j: &JointPmf, opts: &PrivacyOptions) -> Result<MinErrorResult> {
    let channel = conditional_channel(j);
    let poly = build_polytope(&channel, j.p_y(), opts.rank_tol, opts.max_y)?;
    let costs = poly
        .extreme_points
        .iter()
        .map(|e| -e.point.iter().copied().fold(0.0, f64::max))
        .collect();
    let mut solution = solve_over_vertices(poly, costs, j.p_y())?;
    let guesses: Vec<usize> = solution
        .mechanism
        .conditionals
        .iter()
        .map(|c| argmax_first(c))
        .collect();
    solution.mechanism.realizations = Some(guesses.iter().map(|&g| (g + 1) as f64).collect());
    Ok(MinErrorResult {
        p_err: (1.0 + solution.lp.objective).max(0.0),
        guesses,
        solution,
    })
}

#[derive(Debug, Clone)]
pub struct NonPrivateInfo {
    /// `H(Y) − H(T)` where `T` is the posterior `p_{X|Y}(·|Y)`.
    pub d_x: f64,
    /// `H(T)`.
    pub c_x: f64,
    /// Distribution of `T`: group masses, then singletons.
    pub t_pmf: ProbVector,
    pub groups: ColumnGroups,
}

pub fn non_private_information(j: &JointPmf, col_tol: f64) -> NonPrivateInfo {
    let groups = identical_column_groups(&conditional_channel(j), col_tol);
    let t = groups.grouped_masses(j.p_y());
    let c_x = entropy(&t);
    NonPrivateInfo {
        d_x: (entropy(j.p_y()) - c_x).max(0.0),
        c_x,
        t_pmf: ProbVector::from_raw(t),
        groups,
    }
}

/// Whether `g0` equals the non-private information.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EqualityClass {
    /// No perfectly private release exists; both sides are zero.
    NotFeasible,
    /// `g0 = D_X(Y)`.
    Equality,
    /// `g0 > D_X(Y)`.
    Strict,
}

impl EqualityClass {
    pub fn as_str(self) -> &'static str {
        match self {
            EqualityClass::NotFeasible => "not_feasible",
            EqualityClass::Equality => "equality",
            EqualityClass::Strict => "strict",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Classification {
    pub class: EqualityClass,
    pub null_dim: usize,
    /// Null-space dimension after collapsing identical columns.
    pub reduced_null_dim: usize,
}

/// Structural test: equality holds iff collapsing identical columns leaves
/// an injective channel.
pub fn classify_dx_bound(j: &JointPmf, opts: &PrivacyOptions) -> Result<Classification> {
    let channel = conditional_channel(j);
    let null_dim = null_space(channel.matrix(), opts.rank_tol)?.cols();
    let groups = identical_column_groups(&channel, opts.col_tol);
    let reduced_null_dim = null_space(groups.reduced_channel.matrix(), opts.rank_tol)?.cols();
    let class = if null_dim == 0 {
        EqualityClass::NotFeasible
    } else if reduced_null_dim == 0 {
        EqualityClass::Equality
    } else {
        EqualityClass::Strict
    };
    Ok(Classification {
        class,
        null_dim,
        reduced_null_dim,
    })
}

#[derive(Debug, Clone)]
pub struct PrivacyDiagnostics {
    pub rank_tol: f64,
    pub col_tol: f64,
    pub rank: usize,
    pub null_dim: usize,
    pub reduced_null_dim: usize,
    pub vertex_count: usize,
    pub rejected_bases: usize,
    /// `g0 − D_X`; nonnegative up to rounding.
    pub g0_minus_dx: f64,
    pub independence_residual: f64,
    pub marginal_error: f64,
}

#[derive(Debug, Clone)]
pub struct PrivacyReport {
    pub feasible: bool,
    pub g0_bits: f64,
    pub min_cond_entropy_bits: f64,
    pub mechanism: Mechanism,
    pub d_x_bits: f64,
    pub c_x_bits: f64,
    pub t_pmf: ProbVector,
    pub equality_class: EqualityClass,
    pub diagnostics: PrivacyDiagnostics,
}

pub fn privacy_report(j: &JointPmf, opts: &PrivacyOptions) -> Result<PrivacyReport> {
    let g = g0(j, opts)?;
    let npi = non_private_information(j, opts.col_tol);
    let cls = classify_dx_bound(j, opts)?;
    let channel = conditional_channel(j);
    let mech = g.solution.mechanism.clone();
    let diagnostics = PrivacyDiagnostics {
        rank_tol: opts.rank_tol,
        col_tol: opts.col_tol,
        rank: g.solution.polytope.rank,
        null_dim: g.solution.polytope.null_dim,
        reduced_null_dim: cls.reduced_null_dim,
        vertex_count: g.solution.polytope.extreme_points.len(),
        rejected_bases: g.solution.polytope.rejected.len(),
        g0_minus_dx: g.value - npi.d_x,
        independence_residual: mech.independence_residual(&channel, j.p_x()),
        marginal_error: mech.marginal_error(j.p_y()),
    };
    Ok(PrivacyReport {
        feasible: g.solution.polytope.null_dim > 0,
        g0_bits: g.value,
        min_cond_entropy_bits: g.min_cond_entropy,
        mechanism: mech,
        d_x_bits: npi.d_x,
        c_x_bits: npi.c_x,
        t_pmf: npi.t_pmf,
        equality_class: cls.class,
        diagnostics,
    })
}

/// Perfect privacy is feasible in the model `(X, Y) - W - U` iff some
/// direction in the null space of `P_{X|W}` moves `p_Y`.
pub fn feasible_general(ch_x_w: &Channel, ch_y_w: &Channel, rank_tol: f64) -> Result<bool> {
    if ch_x_w.inputs() != ch_y_w.inputs() {
        return Err(Error::invalid(format!(
            "P_X|W has {} columns but P_Y|W has {}",
            ch_x_w.inputs(),
            ch_y_w.inputs()
        )));
    }
    let ns = null_space(ch_x_w.matrix(), rank_tol)?;
    if ns.cols() == 0 {
        return Ok(false);
    }
    Ok(ch_y_w.matrix().matmul(&ns).max_abs() > 1e-8)
}

#[derive(Debug, Clone)]
pub struct G0GeneralResult {
    pub value: f64,
    pub feasible: bool,
    pub h_y: f64,
    /// Mechanism over `W`: conditionals are `p_{W|u}`, the channel is `P_{U|W}`.
    pub solution: PrivacyLp,
    /// `P_{Y|W} p_{W|u}` per atom.
    pub y_conditionals: Vec<ProbVector>,
}

/// `g0` when the mechanism observes `W` and `(X, Y) - W - U`.
pub fn g0_general(j3: &JointPmf3, opts: &PrivacyOptions) -> Result<G0GeneralResult> {
    let pxw = j3.channel_x_given_w();
    let pyw = j3.channel_y_given_w();
    let feasible = feasible_general(&pxw, &pyw, opts.rank_tol)?;
    let poly = build_polytope(&pxw, j3.p_w(), opts.rank_tol, opts.max_y)?;
    let costs = poly
        .extreme_points
        .iter()
        .map(|e| entropy(&pyw.apply(&e.point)))
        .collect();
    let solution = solve_over_vertices(poly, costs, j3.p_w())?;
    let h_y = entropy(j3.joint_xy().p_y());
    let y_conditionals = solution
        .mechanism
        .conditionals
        .iter()
        .map(|c| ProbVector::from_raw(pyw.apply(c)))
        .collect();
    Ok(G0GeneralResult {
        value: (h_y - solution.lp.objective).max(0.0),
        feasible,
        h_y,
        solution,
        y_conditionals,
    })
}

/// Two-atom release in the full-data model built by shifting `eps` of mass
/// between two cells of one row.
#[derive(Debug, Clone)]
pub struct FullDataPerturbation {
    /// `p(x, y, u)` with `u ∈ {0, 1}` on the last axis.
    pub joint: JointPmf3,
    pub row: usize,
    /// The two perturbed columns, `y1 < y2`.
    pub cols: (usize, usize),
    pub eps: f64,
    pub eps_max: f64,
}

/// Builds `p_{X,Y|u₁} = p_{X,Y} + eps (δ(x₁,y₁) − δ(x₁,y₂))` and
/// `p_{X,Y|u₂} = 2 p_{X,Y} − p_{X,Y|u₁}` with `p_U` uniform, for the first row
/// `x₁` having two positive cells `y₁ < y₂`.
pub fn full_data_perturbation(j: &JointPmf, eps: f64) -> Result<FullDataPerturbation> {
    let t = j.table();
    let found = (0..j.x_len()).find_map(|x| {
        let pos: Vec<usize> = (0..j.y_len())
            .filter(|&y| t[(x, y)] > 0.0)
            .take(2)
            .collect();
        (pos.len() == 2).then(|| (x, pos[0], pos[1]))
    });
    let Some((row, y1, y2)) = found else {
        return Err(Error::NotApplicable(
            "Y is a deterministic function of X; no row has two positive cells".into(),
        ));
    };
    let eps_max = t[(row, y1)].min(t[(row, y2)]);
    if !eps.is_finite() || eps < 0.0 {
        return Err(Error::invalid(format!(
            "eps = {eps} must be a nonnegative number"
        )));
    }
    if eps > eps_max {
        return Err(Error::OutOfRange {
            name: "eps",
            value: eps,
            max: eps_max,
        });
    }
    let (nx, ny) = (j.x_len(), j.y_len());
    let mut data = vec![0.0; nx * ny * 2];
    for x in 0..nx {
        for y in 0..ny {
            let mut c1 = t[(x, y)];
            if x == row && y == y1 {
                c1 += eps;
            } else if x == row && y == y2 {
                c1 -= eps;
            }
            let c2 = 2.0 * t[(x, y)] - c1;
            data[(x * ny + y) * 2] = 0.5 * c1;
            data[(x * ny + y) * 2 + 1] = 0.5 * c2;
        }
    }
    Ok(FullDataPerturbation {
        joint: JointPmf3::new((nx, ny, 2), data)?,
        row,
        cols: (y1, y2),
        eps,
        eps_max,
    })
}

/// Full-data perfect-privacy utility for jointly Gaussian `(X, Y)` with
/// correlation `rho`: `−log₂|rho|` bits.
pub fn gaussian_full_data_bound(rho: f64) -> Result<f64> {
    if rho == 0.0 {
        return Err(Error::UndefinedRatio(
            "correlation coefficient is zero".into(),
        ));
    }
    if !rho.is_finite() || rho.abs() > 1.0 {
        return Err(Error::invalid(format!(
            "correlation {rho} is outside [-1, 1]"
        )));
    }
    Ok(-log2(rho.abs()))
}
