//! The set `S` of conditionals `p_{Y|u}` compatible with perfect privacy,
//! its vertices, and the duplicate-column structure of a channel.
//!
//! `S = {x ≥ 0 : A x = A p_Y}` where the rows of `A` are the right singular
//! vectors of the channel with nonzero singular value. Vertices are found by
//! brute force over basic index sets, which is fine for the alphabet sizes we
//! accept (|Y| is capped, see [`DEFAULT_MAX_Y`]).

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::numerics::{svd, Matrix};
use crate::probability::{Channel, ProbVector};

/// Default cap on `|Y|` for vertex enumeration.
pub const DEFAULT_MAX_Y: usize = 20;
/// Default L∞ tolerance for treating two channel columns as identical.
pub const DEFAULT_COL_TOL: f64 = 1e-9;

/// A basic index set is rejected as singular when its smallest singular
/// value is at most this fraction of its largest.
const BASIS_COND_TOL: f64 = 1e-10;
/// Entries in `(-NEG_CLAMP, 0)` are rounded to zero; anything below rejects.
const NEG_CLAMP: f64 = 1e-9;
/// Two vertices closer than this (L∞) are the same vertex.
const DEDUP_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub struct ExtremePoint {
    pub point: ProbVector,
    /// Lexicographically smallest basic index set producing this vertex.
    pub basis: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rejection {
    /// `A_B` is numerically singular.
    Singular,
    /// `A_B⁻¹ b` has an entry below the clamp band.
    Negative { min_entry: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RejectedBasis {
    pub basis: Vec<usize>,
    pub reason: Rejection,
}

#[derive(Debug, Clone)]
pub struct PrivacyPolytope {
    /// `rank × n` matrix with orthonormal rows.
    pub a_matrix: Matrix,
    /// `A · center`.
    pub b: Vec<f64>,
    pub extreme_points: Vec<ExtremePoint>,
    /// Dimension of the channel's null space.
    pub null_dim: usize,
    /// Numerical rank of the channel (number of rows of `A`).
    pub rank: usize,
    /// Candidates that did not yield a vertex, in enumeration order.
    pub rejected: Vec<RejectedBasis>,
}

impl PrivacyPolytope {
    pub fn points(&self) -> Vec<&[f64]> {
        self.extreme_points
            .iter()
            .map(|e| e.point.as_slice())
            .collect()
    }

    /// Matrix whose columns are the vertices.
    pub fn vertex_matrix(&self) -> Matrix {
        let n = self.a_matrix.cols();
        Matrix::from_columns(n, &self.points())
    }
}

/// Builds `S` for `channel` around `center`.
///
/// For the output-perturbation model `channel = P_{X|Y}` and `center = p_Y`;
/// for the general model they are `P_{X|W}` and `p_W`.
pub fn build_polytope(
    channel: &Channel,
    center: &ProbVector,
    rank_tol: f64,
    max_y: usize,
) -> Result<PrivacyPolytope> {
    let n = channel.inputs();
    if center.len() != n {
        return Err(Error::invalid(format!(
            "channel has {n} columns but the center distribution has {} entries",
            center.len()
        )));
    }
    if !(rank_tol > 0.0) {
        return Err(Error::contract("rank_tol must be positive"));
    }
    let dec = svd(channel.matrix())?;
    let rank = dec.rank(rank_tol);
    let null_dim = n - rank;
    let a_matrix = dec.right_vectors.transpose().leading_rows(rank);
    let b = a_matrix.mul_vec(center);

    if null_dim == 0 {
        return Ok(PrivacyPolytope {
            a_matrix,
            b,
            extreme_points: vec![ExtremePoint {
                point: center.clone(),
                basis: (0..n).collect(),
            }],
            null_dim,
            rank,
            rejected: Vec::new(),
        });
    }
    if n > max_y {
        return Err(Error::SizeCap {
            size: n,
            cap: max_y,
        });
    }

    let (extreme_points, rejected) = enumerate_vertices(&a_matrix, &b)?;
    if extreme_points.is_empty() {
        return Err(Error::Numerical(
            "no basic feasible solution found; the center should always lie in S".into(),
        ));
    }
    Ok(PrivacyPolytope {
        a_matrix,
        b,
        extreme_points,
        null_dim,
        rank,
        rejected,
    })
}

/// All vertices of `{x ≥ 0 : A x = b}` for full-row-rank `A`, visiting basic
/// index sets in lexicographic order.
pub fn enumerate_vertices(
    a: &Matrix,
    b: &[f64],
) -> Result<(Vec<ExtremePoint>, Vec<RejectedBasis>)> {
    let (r, n) = (a.rows(), a.cols());
    let mut points: Vec<ExtremePoint> = Vec::new();
    let mut rejected = Vec::new();
    for basis in Combinations::new(n, r) {
        let ab = a.select_columns(&basis);
        let dec = svd(&ab)?;
        let smax = dec.singular_values[0];
        let smin = dec.singular_values[r - 1];
        if smax == 0.0 || smin <= BASIS_COND_TOL * smax {
            rejected.push(RejectedBasis {
                basis,
                reason: Rejection::Singular,
            });
            continue;
        }
        // x_B = V Σ⁻¹ Uᵀ b
        let utb = dec.left_vectors.transpose().mul_vec(b);
        let scaled: Vec<f64> = utb
            .iter()
            .zip(&dec.singular_values)
            .map(|(u, s)| u / s)
            .collect();
        let xb = dec.right_vectors.mul_vec(&scaled);
        let min_entry = xb.iter().copied().fold(f64::INFINITY, f64::min);
        if min_entry < -NEG_CLAMP {
            rejected.push(RejectedBasis {
                basis,
                reason: Rejection::Negative { min_entry },
            });
            continue;
        }
        let mut x = vec![0.0; n];
        for (&k, &v) in basis.iter().zip(&xb) {
            x[k] = v.max(0.0);
        }
        let duplicate = points.iter().any(|p| linf(&p.point, &x) <= DEDUP_TOL);
        if !duplicate {
            points.push(ExtremePoint {
                point: ProbVector::from_raw(x),
                basis,
            });
        }
    }
    Ok((points, rejected))
}

pub(crate) fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Lexicographic `k`-subsets of `0..n`.
pub struct Combinations {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Combinations {
    pub fn new(n: usize, k: usize) -> Self {
        let current = if k <= n { Some((0..k).collect()) } else { None };
        Combinations { n, current }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.take()?;
        let k = out.len();
        let mut nxt = out.clone();
        let mut i = k;
        while i > 0 {
            i -= 1;
            if nxt[i] < self.n - k + i {
                nxt[i] += 1;
                for j in (i + 1)..k {
                    nxt[j] = nxt[j - 1] + 1;
                }
                self.current = Some(nxt);
                break;
            }
        }
        Some(out)
    }
}

/// Groups of identical channel columns.
#[derive(Debug, Clone)]
pub struct ColumnGroups {
    /// Each group has at least two members, members ascending, groups
    /// ordered by their smallest member.
    pub groups: Vec<Vec<usize>>,
    /// Columns not in any group, ascending.
    pub singletons: Vec<usize>,
    /// Original indices of the columns kept in `reduced_channel`.
    pub kept_columns: Vec<usize>,
    /// The channel with every group collapsed to its first column.
    pub reduced_channel: Channel,
}

impl ColumnGroups {
    /// Number of groups.
    pub fn b_count(&self) -> usize {
        self.groups.len()
    }

    /// Number of columns that belong to some group.
    pub fn g_count(&self) -> usize {
        self.groups.iter().map(Vec::len).sum()
    }

    /// Distribution of the posterior `p_{X|Y}(·|Y)` as a random variable:
    /// one mass per group (in group order) followed by one per singleton.
    pub fn grouped_masses(&self, p_y: &[f64]) -> Vec<f64> {
        self.groups
            .iter()
            .map(|g| g.iter().map(|&k| p_y[k]).sum())
            .chain(self.singletons.iter().map(|&k| p_y[k]))
            .collect()
    }
}

pub fn identical_column_groups(channel: &Channel, col_tol: f64) -> ColumnGroups {
    let n = channel.inputs();
    let cols = channel.matrix().columns();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if linf(&cols[i], &cols[j]) <= col_tol {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    let (lo, hi) = (ri.min(rj), ri.max(rj));
                    parent[hi] = lo;
                }
            }
        }
    }
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        let r = find(&mut parent, i);
        members[r].push(i);
    }
    // roots are the smallest members, so iterating roots in order sorts groups
    let mut groups = Vec::new();
    let mut singletons = Vec::new();
    for m in members.into_iter().filter(|m| !m.is_empty()) {
        if m.len() == 1 {
            singletons.push(m[0]);
        } else {
            groups.push(m);
        }
    }
    singletons.sort_unstable();
    let mut kept_columns: Vec<usize> = groups
        .iter()
        .map(|g| g[0])
        .chain(singletons.iter().copied())
        .collect();
    kept_columns.sort_unstable();
    let reduced_channel = Channel::from_raw(channel.matrix().select_columns(&kept_columns));
    ColumnGroups {
        groups,
        singletons,
        kept_columns,
        reduced_channel,
    }
}

/// The vectors `s` obtained by moving each group's total mass onto one chosen
/// member, and the weights `α` with `Σ α s = p_Y`.
#[derive(Debug, Clone, Default)]
pub struct SPrime {
    /// Chosen member of each group, per vector.
    pub choices: Vec<Vec<usize>>,
    pub vectors: Vec<ProbVector>,
    pub weights: Vec<f64>,
}

/// Empty when there are no groups.
pub fn build_s_prime(groups: &ColumnGroups, p_y: &ProbVector) -> SPrime {
    if groups.groups.is_empty() {
        return SPrime::default();
    }
    let totals: Vec<f64> = groups
        .groups
        .iter()
        .map(|g| g.iter().map(|&k| p_y[k]).sum())
        .collect();
    let mut out = SPrime::default();
    let mut pick = vec![0usize; groups.groups.len()];
    loop {
        let choice: Vec<usize> = pick
            .iter()
            .zip(&groups.groups)
            .map(|(&i, g)| g[i])
            .collect();
        let mut s = p_y.to_vec();
        let mut alpha = 1.0;
        for ((g, &m), &total) in groups.groups.iter().zip(&choice).zip(&totals) {
            for &k in g {
                s[k] = 0.0;
            }
            s[m] = total;
            alpha *= p_y[m] / total;
        }
        out.choices.push(choice);
        out.vectors.push(ProbVector::from_raw(s));
        out.weights.push(alpha);

        // odometer, last group fastest
        let mut i = pick.len();
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            pick[i] += 1;
            if pick[i] < groups.groups[i].len() {
                break;
            }
            pick[i] = 0;
        }
    }
}
