//! Dense storage for arrays of small complex `d x d` blocks.
//!
//! Blocks are stored row-major in flat `Complex64` buffers. The lower
//! triangle of an `N x N` block array is stored column by column so that the
//! rows `j..N` of column `j` are contiguous; column-parallel kernels can then
//! build each column independently.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

pub type C64 = Complex64;
/// Dense complex matrix used at the public API boundary.
pub type Mat = DMatrix<C64>;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// `out += alpha * a * b` for row-major `d x d` blocks.
#[inline]
pub(crate) fn gemm_acc(out: &mut [C64], a: &[C64], b: &[C64], d: usize, alpha: f64) {
    if d == 2 {
        let (a00, a01, a10, a11) = (a[0], a[1], a[2], a[3]);
        let (b00, b01, b10, b11) = (b[0], b[1], b[2], b[3]);
        out[0] += (a00 * b00 + a01 * b10) * alpha;
        out[1] += (a00 * b01 + a01 * b11) * alpha;
        out[2] += (a10 * b00 + a11 * b10) * alpha;
        out[3] += (a10 * b01 + a11 * b11) * alpha;
        return;
    }
    for r in 0..d {
        let row = &a[r * d..(r + 1) * d];
        let dst = &mut out[r * d..(r + 1) * d];
        for (l, &arl) in row.iter().enumerate() {
            if arl == ZERO {
                continue;
            }
            let s = arl * alpha;
            let brow = &b[l * d..(l + 1) * d];
            for (o, &blc) in dst.iter_mut().zip(brow) {
                *o += s * blc;
            }
        }
    }
}

/// `a * b` as a fresh block.
#[inline]
pub(crate) fn gemm(a: &[C64], b: &[C64], d: usize) -> Vec<C64> {
    let mut out = vec![ZERO; d * d];
    gemm_acc(&mut out, a, b, d, 1.0);
    out
}

#[inline]
pub(crate) fn axpy(out: &mut [C64], x: &[C64], alpha: f64) {
    for (o, &v) in out.iter_mut().zip(x) {
        *o += v * alpha;
    }
}

pub(crate) fn identity_block(d: usize) -> Vec<C64> {
    let mut out = vec![ZERO; d * d];
    for k in 0..d {
        out[k * d + k] = ONE;
    }
    out
}

pub(crate) fn block_to_mat(block: &[C64], d: usize) -> Mat {
    Mat::from_row_slice(d, d, block)
}

pub(crate) fn mat_to_block(m: &Mat) -> Vec<C64> {
    let d = m.nrows();
    let mut out = Vec::with_capacity(d * d);
    for r in 0..d {
        for c in 0..d {
            out.push(m[(r, c)]);
        }
    }
    out
}

/// Squared Frobenius norm of a flat block.
pub(crate) fn norm_sqr(block: &[C64]) -> f64 {
    block.iter().map(|z| z.norm_sqr()).sum()
}

/// One `d x d` block per grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSeq {
    n: usize,
    d: usize,
    data: Vec<C64>,
}

impl BlockSeq {
    pub fn zeros(n: usize, d: usize) -> Self {
        Self {
            n,
            d,
            data: vec![ZERO; n * d * d],
        }
    }

    pub fn identity(n: usize, d: usize) -> Self {
        let id = identity_block(d);
        let mut data = Vec::with_capacity(n * d * d);
        for _ in 0..n {
            data.extend_from_slice(&id);
        }
        Self { n, d, data }
    }

    pub fn from_mats(mats: &[Mat]) -> Self {
        let n = mats.len();
        let d = mats.first().map_or(0, |m| m.nrows());
        let mut data = Vec::with_capacity(n * d * d);
        for m in mats {
            data.extend(mat_to_block(m));
        }
        Self { n, d, data }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn block(&self, i: usize) -> &[C64] {
        let s = self.d * self.d;
        &self.data[i * s..(i + 1) * s]
    }

    #[inline]
    pub fn block_mut(&mut self, i: usize) -> &mut [C64] {
        let s = self.d * self.d;
        &mut self.data[i * s..(i + 1) * s]
    }

    pub fn mat(&self, i: usize) -> Mat {
        block_to_mat(self.block(i), self.d)
    }

    pub fn to_mats(&self) -> Vec<Mat> {
        (0..self.n).map(|i| self.mat(i)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|z| *z == ZERO)
    }
}

/// Lower-triangular `N x N` array of `d x d` blocks, entries `(i, j)` with `i >= j`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockTriangle {
    n: usize,
    d: usize,
    data: Vec<C64>,
}

impl BlockTriangle {
    pub fn zeros(n: usize, d: usize) -> Self {
        Self {
            n,
            d,
            data: vec![ZERO; n * (n + 1) / 2 * d * d],
        }
    }

    /// Assemble from per-column buffers; column `j` holds rows `j..n`.
    pub(crate) fn from_columns(n: usize, d: usize, columns: Vec<Vec<C64>>) -> Self {
        debug_assert_eq!(columns.len(), n);
        let mut data = Vec::with_capacity(n * (n + 1) / 2 * d * d);
        for (j, col) in columns.into_iter().enumerate() {
            debug_assert_eq!(col.len(), (n - j) * d * d);
            data.extend(col);
        }
        Self { n, d, data }
    }

    /// Build every column with `f(j)`, in parallel when the global rayon pool allows.
    pub(crate) fn build_columns<F>(n: usize, d: usize, f: F) -> Self
    where
        F: Fn(usize) -> Vec<C64> + Sync + Send,
    {
        let columns: Vec<Vec<C64>> = (0..n).into_par_iter().map(f).collect();
        Self::from_columns(n, d, columns)
    }

    /// Build from a function of `(i, j)`.
    pub fn from_fn<F>(n: usize, d: usize, f: F) -> Self
    where
        F: Fn(usize, usize) -> Mat + Sync + Send,
    {
        Self::build_columns(n, d, |j| {
            let mut col = Vec::with_capacity((n - j) * d * d);
            for i in j..n {
                col.extend(mat_to_block(&f(i, j)));
            }
            col
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    #[inline]
    fn col_offset(&self, j: usize) -> usize {
        j * self.n - j * j.saturating_sub(1) / 2
    }

    #[inline]
    fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(
            i >= j && i < self.n,
            "block ({i}, {j}) outside lower triangle"
        );
        (self.col_offset(j) + (i - j)) * self.d * self.d
    }

    #[inline]
    pub fn block(&self, i: usize, j: usize) -> &[C64] {
        let k = self.index(i, j);
        &self.data[k..k + self.d * self.d]
    }

    #[inline]
    pub fn block_mut(&mut self, i: usize, j: usize) -> &mut [C64] {
        let k = self.index(i, j);
        let s = self.d * self.d;
        &mut self.data[k..k + s]
    }

    /// Rows `j..n` of column `j`, contiguous.
    #[inline]
    pub fn column(&self, j: usize) -> &[C64] {
        let start = self.col_offset(j) * self.d * self.d;
        let len = (self.n - j) * self.d * self.d;
        &self.data[start..start + len]
    }

    pub fn mat(&self, i: usize, j: usize) -> Mat {
        block_to_mat(self.block(i, j), self.d)
    }

    pub fn set(&mut self, i: usize, j: usize, m: &Mat) {
        self.block_mut(i, j).copy_from_slice(&mat_to_block(m));
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|z| *z == ZERO)
    }

    pub(crate) fn raw(&self) -> &[C64] {
        &self.data
    }

    pub(crate) fn raw_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }
}
