//! Probability vectors, channels, joint tables and the usual information
//! measures. Logarithms are base 2 throughout.

use alloc::format;
use alloc::vec::Vec;
use core::ops::Deref;

use crate::error::{Error, Result};
use crate::extended::Extended;
use crate::math::log2;
use crate::numerics::Matrix;

/// Tolerance on total mass when validating inputs.
pub const MASS_TOL: f64 = 1e-9;

fn check_masses(masses: &[f64], what: &str) -> Result<()> {
    if masses.is_empty() {
        return Err(Error::invalid(format!("{what} is empty")));
    }
    if let Some(i) = masses.iter().position(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::invalid(format!(
            "{what} entry {i} = {} is not a nonnegative finite number",
            masses[i]
        )));
    }
    let total: f64 = masses.iter().sum();
    if (total - 1.0).abs() > MASS_TOL {
        return Err(Error::invalid(format!(
            "{what} sums to {total}, expected 1 within {MASS_TOL:e}"
        )));
    }
    Ok(())
}

/// A point of the probability simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    pub fn new(masses: Vec<f64>) -> Result<Self> {
        check_masses(&masses, "probability vector")?;
        Ok(ProbVector(masses))
    }

    /// Skips validation; for vectors that are distributions by construction.
    pub(crate) fn from_raw(masses: Vec<f64>) -> Self {
        ProbVector(masses)
    }

    /// Uniform distribution over `n` symbols.
    pub fn uniform(n: usize) -> Self {
        ProbVector(alloc::vec![1.0 / n as f64; n])
    }

    /// Point mass on symbol `i` of an `n`-symbol alphabet.
    pub fn corner(n: usize, i: usize) -> Self {
        let mut v = alloc::vec![0.0; n];
        v[i] = 1.0;
        ProbVector(v)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn entropy(&self) -> f64 {
        entropy(&self.0)
    }

    /// Indices with mass above `tol`.
    pub fn support(&self, tol: f64) -> Vec<usize> {
        (0..self.0.len()).filter(|&i| self.0[i] > tol).collect()
    }
}

impl Deref for ProbVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl AsRef<[f64]> for ProbVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Column-stochastic matrix: entry `(i, j)` is `p(i | j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel(Matrix);

impl Channel {
    pub fn new(matrix: Matrix) -> Result<Self> {
        for j in 0..matrix.cols() {
            check_masses(&matrix.column(j), &format!("channel column {j}"))?;
        }
        Ok(Channel(matrix))
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        Channel::new(Matrix::from_rows(rows)?)
    }

    pub(crate) fn from_raw(matrix: Matrix) -> Self {
        Channel(matrix)
    }

    pub fn identity(n: usize) -> Self {
        Channel(Matrix::identity(n))
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    /// Number of input symbols (columns).
    pub fn inputs(&self) -> usize {
        self.0.cols()
    }

    /// Number of output symbols (rows).
    pub fn outputs(&self) -> usize {
        self.0.rows()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.0.column(j)
    }

    /// Output distribution for input distribution `q`.
    pub fn apply(&self, q: &[f64]) -> Vec<f64> {
        self.0.mul_vec(q)
    }
}

/// Joint distribution of `(X, Y)` as an `|X| × |Y|` table with strictly
/// positive marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf {
    table: Matrix,
    p_x: ProbVector,
    p_y: ProbVector,
}

impl JointPmf {
    pub fn new(table: Matrix) -> Result<Self> {
        check_masses(table.as_slice(), "joint table")?;
        let p_x: Vec<f64> = (0..table.rows())
            .map(|i| table.row(i).iter().sum())
            .collect();
        let p_y: Vec<f64> = (0..table.cols())
            .map(|j| (0..table.rows()).map(|i| table[(i, j)]).sum())
            .collect();
        if let Some(index) = p_x.iter().position(|&v| v <= 0.0) {
            return Err(Error::ZeroMarginal { axis: 'X', index });
        }
        if let Some(index) = p_y.iter().position(|&v| v <= 0.0) {
            return Err(Error::ZeroMarginal { axis: 'Y', index });
        }
        Ok(JointPmf {
            table,
            p_x: ProbVector(p_x),
            p_y: ProbVector(p_y),
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        JointPmf::new(Matrix::from_rows(rows)?)
    }

    /// `P_{X,Y} = P_{X|Y} diag(p_Y)`.
    pub fn from_channel(channel: &Channel, p_y: &ProbVector) -> Result<Self> {
        if channel.inputs() != p_y.len() {
            return Err(Error::invalid(format!(
                "channel has {} columns but p_Y has {} entries",
                channel.inputs(),
                p_y.len()
            )));
        }
        JointPmf::new(channel.matrix().scale_columns(p_y))
    }

    pub fn table(&self) -> &Matrix {
        &self.table
    }

    pub fn x_len(&self) -> usize {
        self.table.rows()
    }

    pub fn y_len(&self) -> usize {
        self.table.cols()
    }

    pub fn p_x(&self) -> &ProbVector {
        &self.p_x
    }

    pub fn p_y(&self) -> &ProbVector {
        &self.p_y
    }

    /// Joint of `(Y, X)`.
    pub fn transpose(&self) -> JointPmf {
        JointPmf {
            table: self.table.transpose(),
            p_x: self.p_y.clone(),
            p_y: self.p_x.clone(),
        }
    }
}

pub fn marginals(j: &JointPmf) -> (ProbVector, ProbVector) {
    (j.p_x.clone(), j.p_y.clone())
}

/// `P_{X|Y}`: column `y` is the joint column divided by `p_Y(y)`.
pub fn conditional_channel(j: &JointPmf) -> Channel {
    let inv: Vec<f64> = j.p_y.iter().map(|v| 1.0 / v).collect();
    Channel(j.table.scale_columns(&inv))
}

/// Shannon entropy in bits, with `0 log 0 = 0`.
pub fn entropy(p: &[f64]) -> f64 {
    let h: f64 = p.iter().filter(|&&v| v > 0.0).map(|&v| -v * log2(v)).sum();
    h.max(0.0)
}

/// `D(q‖p)` in bits; infinite when `q` puts mass where `p` has none.
pub fn kl_divergence(q: &[f64], p: &[f64]) -> Extended {
    assert_eq!(q.len(), p.len(), "kl_divergence length mismatch");
    let mut d = 0.0;
    for (&qi, &pi) in q.iter().zip(p) {
        if qi <= 0.0 {
            continue;
        }
        if pi <= 0.0 {
            return Extended::Infinite;
        }
        d += qi * log2(qi / pi);
    }
    Extended::Finite(d.max(0.0))
}

pub fn mutual_information(j: &JointPmf) -> f64 {
    let mut mi = 0.0;
    for x in 0..j.x_len() {
        for y in 0..j.y_len() {
            let v = j.table[(x, y)];
            if v > 0.0 {
                mi += v * log2(v / (j.p_x[x] * j.p_y[y]));
            }
        }
    }
    mi.max(0.0)
}

/// `H(Y|X)` from the joint table.
pub fn conditional_entropy_y_given_x(j: &JointPmf) -> f64 {
    (entropy(j.table.as_slice()) - entropy(&j.p_x)).max(0.0)
}

/// Joint distribution of `(X, Y, W)`, stored `[x][y][w]`, with strictly
/// positive marginals on all three axes.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf3 {
    dims: (usize, usize, usize),
    data: Vec<f64>,
    p_w: ProbVector,
}

impl JointPmf3 {
    pub fn new(dims: (usize, usize, usize), data: Vec<f64>) -> Result<Self> {
        let (nx, ny, nw) = dims;
        if nx == 0 || ny == 0 || nw == 0 {
            return Err(Error::invalid("three-way table has an empty axis"));
        }
        if data.len() != nx * ny * nw {
            return Err(Error::invalid(format!(
                "expected {} entries for a {nx}x{ny}x{nw} table, got {}",
                nx * ny * nw,
                data.len()
            )));
        }
        check_masses(&data, "joint table")?;
        let at = |x: usize, y: usize, w: usize| data[(x * ny + y) * nw + w];
        for x in 0..nx {
            let m: f64 = (0..ny)
                .flat_map(|y| (0..nw).map(move |w| (y, w)))
                .map(|(y, w)| at(x, y, w))
                .sum();
            if m <= 0.0 {
                return Err(Error::ZeroMarginal {
                    axis: 'X',
                    index: x,
                });
            }
        }
        for y in 0..ny {
            let m: f64 = (0..nx)
                .flat_map(|x| (0..nw).map(move |w| (x, w)))
                .map(|(x, w)| at(x, y, w))
                .sum();
            if m <= 0.0 {
                return Err(Error::ZeroMarginal {
                    axis: 'Y',
                    index: y,
                });
            }
        }
        let p_w: Vec<f64> = (0..nw)
            .map(|w| {
                (0..nx)
                    .flat_map(|x| (0..ny).map(move |y| (x, y)))
                    .map(|(x, y)| at(x, y, w))
                    .sum()
            })
            .collect();
        if let Some(index) = p_w.iter().position(|&v| v <= 0.0) {
            return Err(Error::ZeroMarginal { axis: 'W', index });
        }
        Ok(JointPmf3 {
            dims,
            data,
            p_w: ProbVector(p_w),
        })
    }

    /// Builds `p(x, y, w)` from nested `[x][y][w]` vectors.
    pub fn from_nested(t: &[Vec<Vec<f64>>]) -> Result<Self> {
        let nx = t.len();
        let ny = t.first().map_or(0, |r| r.len());
        let nw = t.first().and_then(|r| r.first()).map_or(0, |c| c.len());
        if t.iter()
            .any(|r| r.len() != ny || r.iter().any(|c| c.len() != nw))
        {
            return Err(Error::invalid("three-way table is ragged"));
        }
        JointPmf3::new(
            (nx, ny, nw),
            t.iter().flatten().flatten().copied().collect(),
        )
    }

    /// `(|X|, |Y|, |W|)`.
    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize, w: usize) -> f64 {
        let (_, ny, nw) = self.dims;
        self.data[(x * ny + y) * nw + w]
    }

    pub fn p_w(&self) -> &ProbVector {
        &self.p_w
    }

    fn channel_given_w(&self, axis_len: usize, pick: impl Fn(usize, usize) -> f64) -> Channel {
        let nw = self.dims.2;
        let mut m = Matrix::zeros(axis_len, nw);
        for a in 0..axis_len {
            for w in 0..nw {
                m[(a, w)] = pick(a, w) / self.p_w[w];
            }
        }
        Channel(m)
    }

    /// `P_{X|W}`, an `|X| × |W|` channel.
    pub fn channel_x_given_w(&self) -> Channel {
        let (nx, ny, _) = self.dims;
        self.channel_given_w(nx, |x, w| (0..ny).map(|y| self.get(x, y, w)).sum())
    }

    /// `P_{Y|W}`, a `|Y| × |W|` channel.
    pub fn channel_y_given_w(&self) -> Channel {
        let (nx, ny, _) = self.dims;
        self.channel_given_w(ny, |y, w| (0..nx).map(|x| self.get(x, y, w)).sum())
    }

    /// The `(X, Y)` marginal.
    pub fn joint_xy(&self) -> JointPmf {
        let (nx, ny, nw) = self.dims;
        let mut m = Matrix::zeros(nx, ny);
        for x in 0..nx {
            for y in 0..ny {
                m[(x, y)] = (0..nw).map(|w| self.get(x, y, w)).sum();
            }
        }
        JointPmf::new(m).expect("marginal of a valid three-way table")
    }
}
