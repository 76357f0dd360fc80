//! Dense 1-D grid checks reported next to the LP and search results
//! (`--grid-step`). They only apply when the answer lives on a segment:
//! a one-dimensional null space for the privacy LPs, or |Y| = 2 for V*.

use perfpriv_core::numerics::null_space;
use perfpriv_core::privacy::variance;
use perfpriv_core::probability::{conditional_channel, entropy, kl_divergence};
use perfpriv_core::JointPmf;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentCheck {
    pub g0_bits: f64,
    pub mmse: f64,
    pub p_err: f64,
    /// Grid points on each side of `p_Y`.
    pub points: (usize, usize),
}

/// Minimizes each cost over two-point splits `{p_Y + a z, p_Y + b z}`,
/// `a < 0 < b`, with `a`, `b` on a grid of relative spacing `step` that
/// includes the segment ends.
pub fn segment_check(
    j: &JointPmf,
    y_values: &[f64],
    rank_tol: f64,
    step: f64,
) -> Result<Option<SegmentCheck>, CliError> {
    let z = null_space(conditional_channel(j).matrix(), rank_tol)?;
    if z.cols() != 1 {
        return Ok(None);
    }
    let z = z.column(0);
    let p = j.p_y();
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for (pk, zk) in p.iter().zip(&z) {
        if *zk > 0.0 {
            lo = lo.max(-pk / zk);
        } else if *zk < 0.0 {
            hi = hi.min(-pk / zk);
        }
    }
    let at = |t: f64| -> Vec<f64> {
        p.iter()
            .zip(&z)
            .map(|(a, b)| (a + t * b).max(0.0))
            .collect()
    };
    let len = hi - lo;
    let n_lo = ((-lo) / (len * step)).ceil().max(1.0) as usize;
    let n_hi = (hi / (len * step)).ceil().max(1.0) as usize;
    let side = |end: f64, n: usize| -> Vec<(f64, Vec<f64>)> {
        (0..n)
            .map(|i| {
                let t = end * (1.0 - i as f64 / n as f64);
                (t, at(t))
            })
            .collect()
    };
    let left = side(lo, n_lo);
    let right = side(hi, n_hi);

    let best = |f: &dyn Fn(&[f64]) -> f64| -> f64 {
        let fl: Vec<f64> = left.iter().map(|(_, q)| f(q)).collect();
        let fr: Vec<f64> = right.iter().map(|(_, q)| f(q)).collect();
        let mut m = f(p);
        for ((a, _), fa) in left.iter().zip(&fl) {
            for ((b, _), fb) in right.iter().zip(&fr) {
                let lam = b / (b - a);
                m = m.min(lam * fa + (1.0 - lam) * fb);
            }
        }
        m
    };
    let h_min = best(&|q| entropy(q));
    let mmse = best(&|q| variance(q, y_values));
    let p_err = best(&|q| 1.0 - q.iter().copied().fold(0.0, f64::max));
    Ok(Some(SegmentCheck {
        g0_bits: entropy(p) - h_min,
        mmse,
        p_err,
        points: (n_lo, n_hi),
    }))
}

/// Largest `D(q‖p_Y)/D(P q‖p_X)` over `q = (s, 1 − s)`, `s` on a grid of
/// spacing `step`. `None` unless |Y| = 2.
pub fn vstar_check(j: &JointPmf, step: f64) -> Option<f64> {
    if j.y_len() != 2 {
        return None;
    }
    let ch = conditional_channel(j);
    let p = j.p_y();
    let n = (1.0 / step).round() as usize;
    let mut best = 0.0f64;
    for i in 0..=n {
        let s = (i as f64 * step).min(1.0);
        if (s - p[0]).abs() < 0.5 * step {
            continue;
        }
        let q = [s, 1.0 - s];
        let num = kl_divergence(&q, p).to_f64();
        let den = kl_divergence(&ch.apply(&q), j.p_x()).to_f64();
        let r = num / den;
        if r.is_finite() {
            best = best.max(r);
        }
    }
    Some(best)
}
