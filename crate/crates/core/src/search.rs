// Multi-start projected gradient ascent for KL-divergence ratios
//
//     q ↦ D(q‖r) / D(P q‖p_X)
//
// over the face of the simplex spanned by `support`. `r` is p_Y for V* and an
// extreme point of S for ψ. At q = r both divergences vanish; there the ratio
// is replaced by its second-order limit, and the supremum of that limit over
// directions is a generalized Rayleigh quotient, computed separately.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::correlation::{SearchOptions, StartKind, StartTrace};
use crate::error::Result;
use crate::extended::Extended;
use crate::math::{ln, log2, sqrt};
use crate::numerics::{max_generalized_rayleigh, orthogonal_complement, Matrix};
use crate::probability::kl_divergence;

const CENTER_RADIUS: f64 = 1e-6;
const SMALL_NUMERATOR: f64 = 1e-9;
const ZERO_DENOMINATOR: f64 = 1e-12;
const LOG_FLOOR: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum RatioValue {
    Finite(f64),
    Infinite,
    /// q coincides with the reference point.
    Undefined,
}

pub(crate) struct KlRatio<'a> {
    /// `P_{X|Y}`, |X| × |Y|.
    pub channel: &'a Matrix,
    pub p_x: &'a [f64],
    pub reference: &'a [f64],
    pub support: &'a [usize],
}

impl KlRatio<'_> {
    fn embed(&self, z: &[f64]) -> Vec<f64> {
        let mut q = vec![0.0; self.reference.len()];
        for (&k, &v) in self.support.iter().zip(z) {
            q[k] = v;
        }
        q
    }

    fn quadratic_parts(&self, eps: &[f64]) -> (f64, f64) {
        let nq: f64 = eps
            .iter()
            .zip(self.reference)
            .filter(|(_, &r)| r > 0.0)
            .map(|(e, r)| e * e / r)
            .sum();
        let pe = self.channel.mul_vec(eps);
        let dq: f64 = pe.iter().zip(self.p_x).map(|(v, p)| v * v / p).sum();
        (nq, dq)
    }

    fn in_quadratic_regime(&self, q: &[f64], eps: &[f64]) -> bool {
        let norm = sqrt(eps.iter().map(|e| e * e).sum());
        norm < CENTER_RADIUS || kl_divergence(q, self.reference).to_f64() <= SMALL_NUMERATOR
    }

    pub fn evaluate(&self, q: &[f64]) -> RatioValue {
        let eps: Vec<f64> = q.iter().zip(self.reference).map(|(a, b)| a - b).collect();
        if eps.iter().all(|&e| e == 0.0) {
            return RatioValue::Undefined;
        }
        if self.in_quadratic_regime(q, &eps) {
            let (nq, dq) = self.quadratic_parts(&eps);
            return if dq <= 1e-24 * nq.max(f64::MIN_POSITIVE) {
                RatioValue::Infinite
            } else {
                RatioValue::Finite(nq / dq)
            };
        }
        let n = match kl_divergence(q, self.reference) {
            Extended::Finite(v) => v,
            Extended::Infinite => return RatioValue::Infinite,
        };
        let d = kl_divergence(&self.channel.mul_vec(q), self.p_x).to_f64();
        if d < ZERO_DENOMINATOR {
            RatioValue::Infinite
        } else {
            RatioValue::Finite(n / d)
        }
    }

    /// Gradient with respect to the support coordinates, at a point where the
    /// ratio is finite with value `value`.
    fn gradient(&self, q: &[f64], value: f64) -> Vec<f64> {
        let eps: Vec<f64> = q.iter().zip(self.reference).map(|(a, b)| a - b).collect();
        if self.in_quadratic_regime(q, &eps) {
            let (_, dq) = self.quadratic_parts(&eps);
            let pe = self.channel.mul_vec(&eps);
            let w: Vec<f64> = pe.iter().zip(self.p_x).map(|(v, p)| v / p).collect();
            return self
                .support
                .iter()
                .map(|&k| {
                    let ptw: f64 = (0..self.channel.rows())
                        .map(|x| self.channel[(x, k)] * w[x])
                        .sum();
                    2.0 * (eps[k] / self.reference[k] - value * ptw) / dq
                })
                .collect();
        }
        let qf: Vec<f64> = q.iter().map(|v| v.max(LOG_FLOOR)).collect();
        let qx = self.channel.mul_vec(q);
        let lx: Vec<f64> = qx
            .iter()
            .zip(self.p_x)
            .map(|(a, p)| log2(a.max(LOG_FLOOR) / p))
            .collect();
        let d = kl_divergence(&qx, self.p_x).to_f64();
        self.support
            .iter()
            .map(|&k| {
                let gn = log2(qf[k] / self.reference[k]);
                let gd: f64 = (0..self.channel.rows())
                    .map(|x| self.channel[(x, k)] * lx[x])
                    .sum();
                (gn - value * gd) / d
            })
            .collect()
    }

    /// Supremum of the second-order limit at the reference point, i.e. the
    /// largest `εᵀ diag(1/r) ε / εᵀ Pᵀ diag(1/p_X) P ε` over `1ᵀε = 0`
    /// supported on `support`. `None` when the denominator form is singular.
    pub fn center_limit(&self) -> Result<Option<f64>> {
        let k = self.support.len();
        if k < 2 {
            return Ok(None);
        }
        let ps = self.channel.select_columns(self.support);
        let inv_px: Vec<f64> = self.p_x.iter().map(|p| 1.0 / p).collect();
        let den = ps.transpose().matmul(&ps.scale_rows(&inv_px));
        let num = Matrix::from_diagonal(
            &self
                .support
                .iter()
                .map(|&i| 1.0 / self.reference[i])
                .collect::<Vec<_>>(),
        );
        let basis = orthogonal_complement(&vec![1.0; k])?;
        let bt = basis.transpose();
        let num_r = bt.matmul(&num).matmul(&basis);
        let den_r = bt.matmul(&den).matmul(&basis);
        max_generalized_rayleigh(
            &crate::numerics::symmetrize(&num_r),
            &crate::numerics::symmetrize(&den_r),
        )
    }
}

/// Euclidean projection onto the probability simplex.
pub(crate) fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut css = 0.0;
    let mut theta = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        css += ui;
        let t = (css - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

fn sample_dirichlet(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let g: Vec<f64> = (0..k).map(|_| -ln(1.0 - rng.gen::<f64>())).collect();
    let s: f64 = g.iter().sum();
    g.into_iter().map(|v| v / s).collect()
}

pub(crate) struct SearchOutcome {
    pub best: Extended,
    /// Full-length maximizing point. Equals the reference when the supremum
    /// is the center limit.
    pub argmax: Vec<f64>,
    pub center_limit: Option<f64>,
    pub trace: Vec<StartTrace>,
}

fn finite(v: RatioValue) -> Option<f64> {
    match v {
        RatioValue::Finite(x) => Some(x),
        _ => None,
    }
}

/// Projected gradient ascent with backtracking from `z0` (support
/// coordinates). Returns the final point, its value and the iteration count.
fn ascend(obj: &KlRatio<'_>, z0: Vec<f64>, max_iters: usize) -> (Vec<f64>, RatioValue, usize) {
    let mut z = z0;
    let mut val = obj.evaluate(&obj.embed(&z));
    let Some(mut v) = finite(val) else {
        return (z, val, 0);
    };
    let mut step = 0.1;
    let mut iters = 0;
    while iters < max_iters {
        iters += 1;
        let g = obj.gradient(&obj.embed(&z), v);
        let gmax = g.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if !(gmax > 0.0) || !gmax.is_finite() {
            break;
        }
        let mut improved = false;
        let mut t = step;
        while t >= 1e-12 {
            let trial: Vec<f64> = z.iter().zip(&g).map(|(a, b)| a + t * b / gmax).collect();
            let trial = project_to_simplex(&trial);
            match obj.evaluate(&obj.embed(&trial)) {
                RatioValue::Finite(nv) if nv > v + 1e-13 * v.abs().max(1.0) => {
                    z = trial;
                    v = nv;
                    improved = true;
                    break;
                }
                RatioValue::Infinite => {
                    return (trial, RatioValue::Infinite, iters);
                }
                _ => t *= 0.5,
            }
        }
        if !improved {
            break;
        }
        step = (t * 2.0).min(1.0);
    }
    val = RatioValue::Finite(v);
    (z, val, iters)
}

pub(crate) fn maximize(obj: &KlRatio<'_>, opts: &SearchOptions) -> Result<SearchOutcome> {
    let k = obj.support.len();
    let mut starts: Vec<(StartKind, Vec<f64>)> = Vec::new();
    for i in 0..k {
        let mut z = vec![0.0; k];
        z[i] = 1.0;
        starts.push((StartKind::Corner(obj.support[i]), z));
    }
    for i in 0..k {
        for j in (i + 1)..k {
            let mut z = vec![0.0; k];
            z[i] = 0.5;
            z[j] = 0.5;
            starts.push((StartKind::Midpoint(obj.support[i], obj.support[j]), z));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for n in 0..opts.interior_starts {
        starts.push((StartKind::Interior(n), sample_dirichlet(&mut rng, k)));
    }

    let mut best = Extended::Finite(f64::NEG_INFINITY);
    let mut argmax = obj.reference.to_vec();
    let mut trace = Vec::with_capacity(starts.len());
    for (kind, z0) in starts {
        let (z, val, iterations) = ascend(obj, z0, opts.max_iters);
        let value = match val {
            RatioValue::Finite(v) => Some(Extended::Finite(v)),
            RatioValue::Infinite => Some(Extended::Infinite),
            RatioValue::Undefined => None,
        };
        if let Some(v) = value {
            if v > best {
                best = v;
                argmax = obj.embed(&z);
            }
        }
        trace.push(StartTrace {
            kind,
            iterations,
            value,
        });
    }

    let center_limit = obj.center_limit()?;
    if let Some(c) = center_limit {
        if Extended::Finite(c) > best {
            best = Extended::Finite(c);
            argmax = obj.reference.to_vec();
        }
    }
    Ok(SearchOutcome {
        best,
        argmax,
        center_limit,
        trace,
    })
}
