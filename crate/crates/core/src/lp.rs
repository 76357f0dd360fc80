//! Standard-form linear programs `min cᵀw s.t. E w = b, w ≥ 0`.
//!
//! Dense two-phase tableau simplex with Bland's rule. The privacy LPs have
//! rank-deficient `E` (the vertices live in an affine subspace), so after
//! phase 1 any artificial left in the basis is pivoted out and truly
//! redundant rows are dropped.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Smallest magnitude accepted as a pivot element or improving reduced cost.
pub const PIVOT_TOL: f64 = 1e-10;
/// Phase 1 optimum above this means the LP is infeasible.
pub const FEASIBILITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct StandardLp {
    cost: Vec<f64>,
    eq_matrix: Matrix,
    eq_rhs: Vec<f64>,
}

impl StandardLp {
    pub fn new(cost: Vec<f64>, eq_matrix: Matrix, eq_rhs: Vec<f64>) -> Result<Self> {
        if cost.len() != eq_matrix.cols() || eq_rhs.len() != eq_matrix.rows() {
            return Err(Error::invalid(format!(
                "LP dimensions disagree: {} costs, {}x{} constraints, {} right-hand sides",
                cost.len(),
                eq_matrix.rows(),
                eq_matrix.cols(),
                eq_rhs.len()
            )));
        }
        if cost.iter().chain(&eq_rhs).any(|v| !v.is_finite()) {
            return Err(Error::invalid("LP data must be finite"));
        }
        Ok(StandardLp {
            cost,
            eq_matrix,
            eq_rhs,
        })
    }

    pub fn cost(&self) -> &[f64] {
        &self.cost
    }

    pub fn eq_matrix(&self) -> &Matrix {
        &self.eq_matrix
    }

    pub fn eq_rhs(&self) -> &[f64] {
        &self.eq_rhs
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Primal solution; meaningful only when optimal.
    pub weights: Vec<f64>,
    pub objective: f64,
    /// Dual certificate `y` with `Eᵀy ≤ c` and `bᵀy = objective` at optimality.
    pub dual: Vec<f64>,
    /// Structural columns in the final basis, ascending.
    pub basis: Vec<usize>,
    pub pivots: usize,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    width: usize,
    pivots: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.rows[i][self.width - 1]
    }

    fn reduced_cost(&self, cost: &[f64], j: usize) -> f64 {
        let cb: f64 = self
            .rows
            .iter()
            .zip(&self.basis)
            .map(|(r, &b)| cost[b] * r[j])
            .sum();
        cost[j] - cb
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let prow = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&prow) {
                    *v -= f * pv;
                }
                row[c] = 0.0;
            }
        }
        let last = self.width - 1;
        for row in self.rows.iter_mut() {
            if row[last] < 0.0 && row[last] > -1e-12 {
                row[last] = 0.0;
            }
        }
        self.basis[r] = c;
        self.pivots += 1;
    }

    /// Runs Bland's rule to optimality. Returns `false` if unbounded.
    fn optimize(
        &mut self,
        cost: &[f64],
        may_enter: impl Fn(usize) -> bool,
        cap: usize,
    ) -> Result<bool> {
        loop {
            if self.pivots > cap {
                return Err(Error::Numerical(format!("simplex exceeded {cap} pivots")));
            }
            let entering = (0..self.width - 1)
                .filter(|&j| may_enter(j) && !self.basis.contains(&j))
                .find(|&j| self.reduced_cost(cost, j) < -PIVOT_TOL);
            let Some(c) = entering else {
                return Ok(true);
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][c];
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.rhs(i) / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        if ratio < br - 1e-12
                            || ((ratio - br).abs() <= 1e-12 && self.basis[i] < self.basis[bi])
                        {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
            match leave {
                Some((r, _)) => self.pivot(r, c),
                None => return Ok(false),
            }
        }
    }
}

pub fn solve(lp: &StandardLp) -> Result<LpSolution> {
    let (m, n) = (lp.eq_matrix.rows(), lp.eq_matrix.cols());
    let width = n + m + 1;
    let sign: Vec<f64> = lp
        .eq_rhs
        .iter()
        .map(|&b| if b < 0.0 { -1.0 } else { 1.0 })
        .collect();
    let rows: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            let mut r = vec![0.0; width];
            for j in 0..n {
                r[j] = sign[i] * lp.eq_matrix[(i, j)];
            }
            r[n + i] = 1.0;
            r[width - 1] = sign[i] * lp.eq_rhs[i];
            r
        })
        .collect();
    let mut t = Tableau {
        rows,
        basis: (n..n + m).collect(),
        width,
        pivots: 0,
    };
    let cap = 1000 + 50 * (n + m) * (m + 1);

    // phase 1
    let mut c1 = vec![0.0; width - 1];
    for v in c1[n..].iter_mut() {
        *v = 1.0;
    }
    t.optimize(&c1, |_| true, cap)?;
    let infeas: f64 = (0..t.rows.len())
        .filter(|&i| t.basis[i] >= n)
        .map(|i| t.rhs(i))
        .sum();
    if infeas > FEASIBILITY_TOL {
        return Ok(LpSolution {
            status: LpStatus::Infeasible,
            weights: vec![0.0; n],
            objective: f64::NAN,
            dual: vec![0.0; m],
            basis: Vec::new(),
            pivots: t.pivots,
        });
    }

    // drive remaining artificials out; drop rows that are all zero
    let mut i = 0;
    while i < t.rows.len() {
        if t.basis[i] < n {
            i += 1;
            continue;
        }
        let best = (0..n)
            .filter(|j| !t.basis.contains(j))
            .map(|j| (j, t.rows[i][j].abs()))
            .filter(|&(_, a)| a > PIVOT_TOL)
            .fold(None, |acc: Option<(usize, f64)>, (j, a)| match acc {
                Some((_, ba)) if ba >= a => acc,
                _ => Some((j, a)),
            });
        match best {
            Some((j, _)) => {
                t.pivot(i, j);
                i += 1;
            }
            None => {
                t.rows.remove(i);
                t.basis.remove(i);
            }
        }
    }

    // phase 2; artificial columns stay in the tableau to read off duals
    let mut c2 = vec![0.0; width - 1];
    c2[..n].copy_from_slice(&lp.cost);
    let bounded = t.optimize(&c2, |j| j < n, cap)?;

    let mut weights = vec![0.0; n];
    for (r, &b) in t.rows.iter().zip(&t.basis) {
        weights[b] = r[width - 1].max(0.0);
    }
    let dual: Vec<f64> = (0..m)
        .map(|k| -t.reduced_cost(&c2, n + k) * sign[k])
        .collect();
    let mut basis = t.basis.clone();
    basis.sort_unstable();

    if !bounded {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            weights,
            objective: f64::NEG_INFINITY,
            dual,
            basis,
            pivots: t.pivots,
        });
    }
    let objective = lp.cost.iter().zip(&weights).map(|(c, w)| c * w).sum();
    Ok(LpSolution {
        status: LpStatus::Optimal,
        weights,
        objective,
        dual,
        basis,
        pivots: t.pivots,
    })
}
