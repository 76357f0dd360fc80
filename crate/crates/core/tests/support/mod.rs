// Test-only oracles and generators. Nothing here calls into the library's
// linear algebra, so agreement with it is meaningful.
#![allow(dead_code)]

use perfpriv_core::{JointPmf, Matrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Strictly positive pmf with entries bounded away from 0.
pub fn random_pmf(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    let s: f64 = v.iter().sum();
    v.into_iter().map(|x| x / s).collect()
}

pub fn joint_from_channel(cols: &[Vec<f64>], p_y: &[f64]) -> JointPmf {
    let nx = cols[0].len();
    let rows: Vec<Vec<f64>> = (0..nx)
        .map(|x| cols.iter().zip(p_y).map(|(c, p)| c[x] * p).collect())
        .collect();
    JointPmf::from_rows(&rows).unwrap()
}

pub fn random_joint(rng: &mut ChaCha8Rng, nx: usize, ny: usize) -> JointPmf {
    let cols: Vec<Vec<f64>> = (0..ny).map(|_| random_pmf(rng, nx)).collect();
    let p_y = random_pmf(rng, ny);
    joint_from_channel(&cols, &p_y)
}

/// Random joint whose channel has some columns repeated exactly.
pub fn random_joint_with_duplicates(rng: &mut ChaCha8Rng, nx: usize, ny: usize) -> JointPmf {
    let distinct = rng.gen_range(1..=ny);
    let base: Vec<Vec<f64>> = (0..distinct).map(|_| random_pmf(rng, nx)).collect();
    let mut cols: Vec<Vec<f64>> = base.clone();
    while cols.len() < ny {
        let k = rng.gen_range(0..distinct);
        cols.push(base[k].clone());
    }
    // shuffle so duplicates are not always trailing
    for i in (1..cols.len()).rev() {
        let j = rng.gen_range(0..=i);
        cols.swap(i, j);
    }
    let p_y = random_pmf(rng, ny);
    joint_from_channel(&cols, &p_y)
}

pub fn h(p: &[f64]) -> f64 {
    p.iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| -v * v.ln())
        .sum::<f64>()
        / std::f64::consts::LN_2
}

pub fn kl(q: &[f64], p: &[f64]) -> f64 {
    q.iter()
        .zip(p)
        .filter(|(&a, _)| a > 0.0)
        .map(|(&a, &b)| a * (a / b).ln())
        .sum::<f64>()
        / std::f64::consts::LN_2
}

pub fn channel_columns(j: &JointPmf) -> Vec<Vec<f64>> {
    let t = j.table();
    (0..j.y_len())
        .map(|y| (0..j.x_len()).map(|x| t[(x, y)] / j.p_y()[y]).collect())
        .collect()
}

pub fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// The segment `S = {p_Y + t z}` for a 2×3 joint, with `z` the cross product
/// of the two channel rows.
pub struct Segment {
    pub p_y: Vec<f64>,
    pub z: Vec<f64>,
    pub t_min: f64,
    pub t_max: f64,
}

impl Segment {
    pub fn point(&self, t: f64) -> Vec<f64> {
        self.p_y
            .iter()
            .zip(&self.z)
            .map(|(p, z)| (p + t * z).max(0.0))
            .collect()
    }
}

pub fn segment_2x3(j: &JointPmf) -> Segment {
    assert_eq!((j.x_len(), j.y_len()), (2, 3));
    let c = channel_columns(j);
    let r0 = [c[0][0], c[1][0], c[2][0]];
    let r1 = [c[0][1], c[1][1], c[2][1]];
    let z = vec![
        r0[1] * r1[2] - r0[2] * r1[1],
        r0[2] * r1[0] - r0[0] * r1[2],
        r0[0] * r1[1] - r0[1] * r1[0],
    ];
    let p_y = j.p_y().to_vec();
    let mut t_min = f64::NEG_INFINITY;
    let mut t_max = f64::INFINITY;
    for k in 0..3 {
        if z[k] > 0.0 {
            t_min = t_min.max(-p_y[k] / z[k]);
        } else if z[k] < 0.0 {
            t_max = t_max.min(-p_y[k] / z[k]);
        }
    }
    Segment {
        p_y,
        z,
        t_min,
        t_max,
    }
}

/// Best value of `λ f(q₁) + (1−λ) f(q₂)` (minimized) over pairs of grid
/// points on either side of `p_Y` whose mixture is `p_Y`. `step` is relative
/// to the segment length; grid endpoints are always included.
pub fn grid_min_mixture(seg: &Segment, step: f64, f: impl Fn(&[f64]) -> f64) -> f64 {
    let n_left = ((-seg.t_min) / ((seg.t_max - seg.t_min) * step))
        .ceil()
        .max(1.0) as usize;
    let n_right = (seg.t_max / ((seg.t_max - seg.t_min) * step))
        .ceil()
        .max(1.0) as usize;
    let left: Vec<(f64, f64)> = (0..n_left)
        .map(|i| {
            let t = seg.t_min * (1.0 - i as f64 / n_left as f64);
            (t, f(&seg.point(t)))
        })
        .collect();
    let right: Vec<(f64, f64)> = (0..n_right)
        .map(|i| {
            let t = seg.t_max * (1.0 - i as f64 / n_right as f64);
            (t, f(&seg.point(t)))
        })
        .collect();
    let center = f(&seg.p_y);
    let mut best = center;
    for &(a, fa) in &left {
        for &(b, fb) in &right {
            let lam = b / (b - a);
            let v = lam * fa + (1.0 - lam) * fb;
            if v < best {
                best = v;
            }
        }
    }
    best
}

/// Largest `D(q‖p_Y)/D(P q‖p_X)` over `q = (s, 1−s)` on a grid of `s`.
pub fn grid_vstar_binary(j: &JointPmf, step: f64) -> f64 {
    assert_eq!(j.y_len(), 2);
    let c = channel_columns(j);
    let p_y = j.p_y().to_vec();
    let p_x = j.p_x().to_vec();
    let n = (1.0 / step).round() as usize;
    let mut best: f64 = 0.0;
    for i in 0..=n {
        let s = i as f64 * step;
        if (s - p_y[0]).abs() < 0.5 * step {
            continue;
        }
        let q = [s, 1.0 - s];
        let qx: Vec<f64> = (0..j.x_len())
            .map(|x| c[0][x] * q[0] + c[1][x] * q[1])
            .collect();
        let r = kl(&q, &p_y) / kl(&qx, &p_x);
        if r.is_finite() {
            best = best.max(r);
        }
    }
    best
}

/// Solves `M x = b` in the least-squares sense through the normal equations
/// and Gaussian elimination. `None` when singular.
pub fn lstsq(m: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let k = m[0].len();
    let mut a = vec![vec![0.0; k + 1]; k];
    for i in 0..k {
        for j in 0..k {
            a[i][j] = m.iter().map(|r| r[i] * r[j]).sum();
        }
        a[i][k] = m.iter().zip(b).map(|(r, bv)| r[i] * bv).sum();
    }
    for col in 0..k {
        let piv = (col..k).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        for r in 0..k {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..=k {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    Some((0..k).map(|i| a[i][k] / a[i][i]).collect())
}

pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Minimum of `cᵀw` over `E w = b, w ≥ 0` by trying every column subset.
pub fn brute_force_lp(c: &[f64], e: &Matrix, b: &[f64]) -> Option<f64> {
    let (m, n) = (e.rows(), e.cols());
    let mut best: Option<f64> = None;
    for k in 1..=m.min(n) {
        for s in subsets(n, k) {
            let rows: Vec<Vec<f64>> = (0..m)
                .map(|i| s.iter().map(|&j| e[(i, j)]).collect())
                .collect();
            let Some(x) = lstsq(&rows, b) else { continue };
            if x.iter().any(|&v| v < -1e-9) {
                continue;
            }
            let resid = (0..m)
                .map(|i| (rows[i].iter().zip(&x).map(|(a, v)| a * v).sum::<f64>() - b[i]).abs())
                .fold(0.0, f64::max);
            if resid > 1e-9 {
                continue;
            }
            let v: f64 = s.iter().zip(&x).map(|(&j, xv)| c[j] * xv).sum();
            best = Some(best.map_or(v, |bv: f64| bv.min(v)));
        }
    }
    best
}

/// Vertices of `{x ≥ 0 : P x = p_X}` by trying every column subset of size
/// `rank` and keeping exact nonnegative solutions.
pub fn exhaustive_vertices(j: &JointPmf, rank: usize) -> Vec<Vec<f64>> {
    let cols = channel_columns(j);
    let p_x = j.p_x().to_vec();
    let ny = j.y_len();
    let mut out: Vec<Vec<f64>> = Vec::new();
    for s in subsets(ny, rank) {
        let rows: Vec<Vec<f64>> = (0..j.x_len())
            .map(|x| s.iter().map(|&k| cols[k][x]).collect())
            .collect();
        let Some(xb) = lstsq(&rows, &p_x) else {
            continue;
        };
        let resid = (0..j.x_len())
            .map(|x| (rows[x].iter().zip(&xb).map(|(a, v)| a * v).sum::<f64>() - p_x[x]).abs())
            .fold(0.0, f64::max);
        if resid > 1e-9 || xb.iter().any(|&v| v < -1e-9) {
            continue;
        }
        let mut x = vec![0.0; ny];
        for (&k, &v) in s.iter().zip(&xb) {
            x[k] = v.max(0.0);
        }
        if !out.iter().any(|o| linf(o, &x) <= 1e-7) {
            out.push(x);
        }
    }
    out
}

/// Every point of `a` is within `tol` of some point of `b` and vice versa.
pub fn same_point_sets(a: &[Vec<f64>], b: &[Vec<f64>], tol: f64) -> bool {
    a.len() == b.len()
        && a.iter().all(|p| b.iter().any(|q| linf(p, q) <= tol))
        && b.iter().all(|p| a.iter().any(|q| linf(p, q) <= tol))
}
