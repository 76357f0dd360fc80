//! Maximal correlation, KL-divergence ratios and the slope of the
//! utility-privacy curve at zero leakage.
//!
//! With `Q = P_X^{-1/2} P_{X,Y} P_Y^{-1/2}` the largest singular value is 1
//! (left/right vectors `√p_X`, `√p_Y`) and the second one is the maximal
//! correlation `ρ_m`. The ratio `D(q_X‖p_X)/D(q_Y‖p_Y)` has, near `p_Y`,
//! stationary values `σ₂², σ₃², …`, so the reciprocal ratio is at least
//! `1/ρ_m²` in the limit.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::extended::Extended;
use crate::math::{ln, sqrt};
use crate::numerics::{
    null_space, orthogonal_complement, svd, symmetric_eigen, symmetrize, Matrix,
};
use crate::privacy::{g0, perfect_privacy_feasible, PrivacyOptions};
use crate::probability::{conditional_channel, entropy, mutual_information, JointPmf, ProbVector};
use crate::search::{maximize, KlRatio, RatioValue};

/// Settings for the multi-start searches behind [`v_star`] and [`psi`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    pub seed: u64,
    /// Number of Dirichlet(1) starting points on top of corners and midpoints.
    pub interior_starts: usize,
    /// Iteration cap per start.
    pub max_iters: usize,
}

pub const DEFAULT_SEED: u64 = 0xC0FFEE;

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            seed: DEFAULT_SEED,
            interior_starts: 64,
            max_iters: 500,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StartKind {
    /// Simplex corner at the given symbol.
    Corner(usize),
    /// Midpoint of two corners.
    Midpoint(usize, usize),
    /// n-th pseudo-random interior point.
    Interior(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StartTrace {
    pub kind: StartKind,
    pub iterations: usize,
    /// Best value reached; `None` if the start sat on the reference point.
    pub value: Option<Extended>,
}

#[derive(Debug, Clone)]
pub struct SpectralReport {
    pub q_matrix: Matrix,
    /// Singular values of `Q`, one per symbol of `Y`, nonincreasing.
    pub singular_values: Vec<f64>,
    pub rho_m: f64,
    /// Eigenvalues of `R = QᵀQ` restricted to the complement of `√p_Y`,
    /// nonincreasing (`|Y| − 1` values, the first being `ρ_m²`).
    pub stationary_values: Vec<f64>,
    /// `P_Y^{1/2} v_i` for the matching eigenvectors; each sums to zero.
    pub directions: Vec<Vec<f64>>,
    /// `√p_Y`, the eigenvector of `R` for eigenvalue 1.
    pub c_vector: Vec<f64>,
}

pub fn spectral_report(j: &JointPmf) -> Result<SpectralReport> {
    let sx: Vec<f64> = j.p_x().iter().map(|v| 1.0 / sqrt(*v)).collect();
    let sy: Vec<f64> = j.p_y().iter().map(|v| 1.0 / sqrt(*v)).collect();
    let q = j.table().scale_rows(&sx).scale_columns(&sy);
    let dec = svd(&q)?;
    let singular_values = dec.singular_values.clone();
    let rho_m = singular_values.get(1).copied().unwrap_or(0.0).min(1.0);

    let c_vector: Vec<f64> = j.p_y().iter().map(|v| sqrt(*v)).collect();
    let r = symmetrize(&q.transpose().matmul(&q));
    let (stationary_values, directions) = if j.y_len() < 2 {
        (Vec::new(), Vec::new())
    } else {
        let b = orthogonal_complement(&c_vector)?;
        let restricted = symmetrize(&b.transpose().matmul(&r).matmul(&b));
        let eig = symmetric_eigen(&restricted)?;
        let dirs = (0..eig.eigenvalues.len())
            .map(|i| {
                let v = b.mul_vec(&eig.eigenvectors.column(i));
                v.iter().zip(&c_vector).map(|(a, c)| a * c).collect()
            })
            .collect();
        (eig.eigenvalues, dirs)
    };
    Ok(SpectralReport {
        q_matrix: q,
        singular_values,
        rho_m,
        stationary_values,
        directions,
        c_vector,
    })
}

/// `D(q_Y‖p_Y) / D(q_X‖p_X)` with `q_X = P_{X|Y} q_Y`.
///
/// Infinite when `q_X` matches `p_X` but `q_Y` differs from `p_Y`. Within
/// `1e-6` of `p_Y` the second-order limit along `q_Y − p_Y` is returned.
pub fn kl_ratio(q_y: &ProbVector, j: &JointPmf) -> Result<Extended> {
    if q_y.len() != j.y_len() {
        return Err(Error::invalid(format!(
            "q_Y has {} entries, expected {}",
            q_y.len(),
            j.y_len()
        )));
    }
    let channel = conditional_channel(j);
    let support: Vec<usize> = (0..j.y_len()).collect();
    let obj = KlRatio {
        channel: channel.matrix(),
        p_x: j.p_x(),
        reference: j.p_y(),
        support: &support,
    };
    match obj.evaluate(q_y) {
        RatioValue::Finite(v) => Ok(Extended::Finite(v)),
        RatioValue::Infinite => Ok(Extended::Infinite),
        RatioValue::Undefined => Err(Error::UndefinedRatio(
            "q_Y equals p_Y, the ratio is 0/0".into(),
        )),
    }
}

#[derive(Debug, Clone)]
pub struct VStarReport {
    pub value: Extended,
    /// Whether perfect privacy is feasible (then the value is infinite and
    /// no search runs).
    pub feasible: bool,
    /// Maximizing `q_Y`; equals `p_Y` when the supremum is the limit at the
    /// center.
    pub argmax: Option<Vec<f64>>,
    /// Supremum of the second-order limit at `p_Y`, i.e. `1/ρ_m²`.
    pub center_limit: Option<f64>,
    pub trace: Vec<StartTrace>,
}

/// `sup D(q_Y‖p_Y)/D(q_X‖p_X)` over `q_Y ≠ p_Y`.
///
/// The search result is a lower bound on the supremum: best value over
/// corners, midpoints and random interior starts after projected gradient
/// ascent, and the exact limit at `p_Y`.
pub fn v_star(j: &JointPmf, opts: &SearchOptions, rank_tol: f64) -> Result<VStarReport> {
    let channel = conditional_channel(j);
    if perfect_privacy_feasible(&channel, rank_tol)? {
        return Ok(VStarReport {
            value: Extended::Infinite,
            feasible: true,
            argmax: None,
            center_limit: None,
            trace: Vec::new(),
        });
    }
    if j.y_len() < 2 {
        return Err(Error::NotApplicable(
            "|Y| = 1 leaves no q_Y other than p_Y".into(),
        ));
    }
    let support: Vec<usize> = (0..j.y_len()).collect();
    let obj = KlRatio {
        channel: channel.matrix(),
        p_x: j.p_x(),
        reference: j.p_y(),
        support: &support,
    };
    let out = maximize(&obj, opts)?;
    Ok(VStarReport {
        value: out.best,
        feasible: false,
        argmax: Some(out.argmax),
        center_limit: out.center_limit,
        trace: out.trace,
    })
}

#[derive(Debug, Clone)]
pub struct PsiResult {
    pub value: f64,
    pub argmax: ProbVector,
    pub center_limit: Option<f64>,
    pub trace: Vec<StartTrace>,
}

/// `sup D(q_Y‖x)/D(q_X‖p_X)` over `q_Y ≠ x` supported inside the support of
/// the vertex `x` of the privacy polytope. Zero when `x` is a corner.
pub fn psi(
    j: &JointPmf,
    extreme_pt: &[f64],
    opts: &SearchOptions,
    rank_tol: f64,
) -> Result<PsiResult> {
    if extreme_pt.len() != j.y_len() {
        return Err(Error::contract(format!(
            "point has {} entries, expected {}",
            extreme_pt.len(),
            j.y_len()
        )));
    }
    if extreme_pt.iter().any(|&v| !v.is_finite() || v < -1e-9) {
        return Err(Error::contract("point has negative entries"));
    }
    let channel = conditional_channel(j);
    let px = channel.apply(extreme_pt);
    let off = px
        .iter()
        .zip(j.p_x().iter())
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    if off > 1e-8 {
        return Err(Error::contract(format!(
            "point is not in the privacy polytope: ‖P x − p_X‖∞ = {off:e}"
        )));
    }
    let x: Vec<f64> = extreme_pt.iter().map(|v| v.max(0.0)).collect();
    let support: Vec<usize> = (0..x.len()).filter(|&i| x[i] > 1e-9).collect();
    let sub = channel.matrix().select_columns(&support);
    if null_space(&sub, rank_tol)?.cols() > 0 {
        return Err(Error::contract(
            "point is not an extreme point of the privacy polytope: its support columns are dependent",
        ));
    }
    if support.len() == 1 {
        return Ok(PsiResult {
            value: 0.0,
            argmax: ProbVector::from_raw(x),
            center_limit: None,
            trace: Vec::new(),
        });
    }
    let obj = KlRatio {
        channel: channel.matrix(),
        p_x: j.p_x(),
        reference: &x,
        support: &support,
    };
    let out = maximize(&obj, opts)?;
    let value = out
        .best
        .finite()
        .ok_or_else(|| Error::Numerical("ψ search produced an infinite ratio".into()))?;
    Ok(PsiResult {
        value,
        argmax: ProbVector::from_raw(out.argmax),
        center_limit: out.center_limit,
        trace: out.trace,
    })
}

#[derive(Debug, Clone)]
pub struct PsiEntry {
    /// Index of the mechanism atom.
    pub atom: usize,
    pub conditional: ProbVector,
    pub result: PsiResult,
}

#[derive(Debug, Clone)]
pub struct SlopeReport {
    pub g0: f64,
    pub h_y: f64,
    pub mutual_information: f64,
    pub v_star: Extended,
    /// ψ for every atom of the `g0`-optimal mechanism; empty when `g0 = 0`.
    pub psi_values: Vec<PsiEntry>,
    pub l_value: Option<f64>,
    /// `(H(Y) − g0) / I(X;Y)`.
    pub entropy_term: f64,
    pub lower_bound: Extended,
    /// Search trace of `v_star` when it ran.
    pub optimizer_trace: Vec<StartTrace>,
}

/// Lower bound on the slope of `g_ε` at `ε = 0`.
///
/// With `g0 > 0` this is `max(L, (H(Y) − g0)/I(X;Y))` where `L` is the
/// largest ψ over the atoms of the optimal mechanism. With `g0 = 0` the
/// slope equals `V*`.
pub fn slope_lower_bound(
    j: &JointPmf,
    popts: &PrivacyOptions,
    sopts: &SearchOptions,
) -> Result<SlopeReport> {
    let mi = mutual_information(j);
    if mi <= 1e-12 {
        return Err(Error::IndependentPair);
    }
    let g = g0(j, popts)?;
    let h_y = entropy(j.p_y());
    let entropy_term = (h_y - g.value) / mi;
    let feasible = g.solution.polytope.null_dim > 0;

    if feasible {
        let mut psi_values = Vec::new();
        for (atom, c) in g.mechanism().conditionals.iter().enumerate() {
            let result = psi(j, c, sopts, popts.rank_tol)?;
            psi_values.push(PsiEntry {
                atom,
                conditional: c.clone(),
                result,
            });
        }
        let l_value = psi_values
            .iter()
            .map(|p| p.result.value)
            .fold(0.0, f64::max);
        Ok(SlopeReport {
            g0: g.value,
            h_y,
            mutual_information: mi,
            v_star: Extended::Infinite,
            psi_values,
            l_value: Some(l_value),
            entropy_term,
            lower_bound: Extended::Finite(l_value.max(entropy_term)),
            optimizer_trace: Vec::new(),
        })
    } else {
        let vs = v_star(j, sopts, popts.rank_tol)?;
        Ok(SlopeReport {
            g0: g.value,
            h_y,
            mutual_information: mi,
            v_star: vs.value,
            psi_values: Vec::new(),
            l_value: None,
            entropy_term,
            lower_bound: vs.value.max(Extended::Finite(entropy_term)),
            optimizer_trace: vs.trace,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BscAnalysis {
    /// `p_x` after mapping into `(0, 1/2]`.
    pub p_x: f64,
    pub alpha: f64,
    pub p_y: f64,
    /// Closed form for `ρ_m²`.
    pub rho_m_sq: f64,
    /// `σ₂²` of the constructed joint, for cross-checking.
    pub rho_m_sq_spectral: f64,
    /// The conjectured upper bound on the slope.
    pub slope_upper: f64,
    /// `1/ρ_m²`, the actual slope.
    pub slope_actual: Extended,
    pub bound_violated: bool,
}

/// Binary symmetric channel with crossover `alpha` and input
/// `X ~ Bernoulli(p_x)`: compares `1/ρ_m²` against
/// `(1 − 2α) log((1 − p_y)/p_y) / log((1 − p_x)/p_x)`.
pub fn bsc_analysis(p_x: f64, alpha: f64) -> Result<BscAnalysis> {
    if !(p_x > 0.0 && p_x < 1.0) {
        return Err(Error::invalid(format!("p_x = {p_x} must lie in (0, 1)")));
    }
    if !(alpha > 0.0 && alpha <= 0.5) {
        return Err(Error::invalid(format!(
            "alpha = {alpha} must lie in (0, 1/2]"
        )));
    }
    let p_x = if p_x > 0.5 { 1.0 - p_x } else { p_x };
    let p_y = p_x * (1.0 - alpha) + alpha * (1.0 - p_x);
    let rho_m_sq = ((alpha * alpha + (1.0 - 2.0 * alpha) * (p_x + p_y - 2.0 * p_x * p_y))
        / (p_y * (1.0 - p_y))
        - 1.0)
        .max(0.0);

    let joint = JointPmf::from_rows(&[
        [(1.0 - p_x) * (1.0 - alpha), (1.0 - p_x) * alpha],
        [p_x * alpha, p_x * (1.0 - alpha)],
    ])?;
    let s = spectral_report(&joint)?;
    let rho_m_sq_spectral = s.rho_m * s.rho_m;

    let slope_upper = if (p_x - 0.5).abs() < 1e-12 {
        (1.0 - 2.0 * alpha) * (1.0 - 2.0 * alpha)
    } else {
        (1.0 - 2.0 * alpha) * ln((1.0 - p_y) / p_y) / ln((1.0 - p_x) / p_x)
    };
    let slope_actual = if rho_m_sq <= 1e-15 {
        Extended::Infinite
    } else {
        Extended::Finite(1.0 / rho_m_sq)
    };
    Ok(BscAnalysis {
        p_x,
        alpha,
        p_y,
        rho_m_sq,
        rho_m_sq_spectral,
        slope_upper,
        bound_violated: slope_actual > Extended::Finite(slope_upper),
        slope_actual,
    })
}

/// Correlation-side quantities that do not depend on the search.
pub fn inverse_rho_sq(rho_m: f64) -> Extended {
    if rho_m * rho_m <= 1e-15 {
        Extended::Infinite
    } else {
        Extended::Finite(1.0 / (rho_m * rho_m))
    }
}
