//! Discretized ★-algebra on the subclass `c(t) δ(t - s) + f(t, s) Θ(t - s)`.
//!
//! An element stores a δ-coefficient block `D_i` per node and a lower-triangular
//! Θ-kernel `F_ij = f(t_i, t_j)`, `i >= j`. The product is
//!
//! ```text
//! (X ★ Y): D_i  = DX_i DY_i
//!          F_ij = DX_i FY_ij + FX_ij DY_j + Σ_{k=j..i} w_k FX_ik FY_kj
//! ```
//!
//! with composite-trapezoid weights `w_k = h/2` at `k = i` or `k = j` and `h`
//! in between. A degenerate interval (`i = j`) keeps the single weight `h/2`.
//! With that convention the discrete product is the ordinary product of
//! block lower-triangular matrices whose diagonal blocks carry half weight, so
//! it is exactly associative and every resolvent identity of matrix algebra
//! carries over to the grid without quadrature defect.

use crate::block::{
    axpy, block_to_mat, gemm, gemm_acc, identity_block, mat_to_block, norm_sqr, BlockSeq,
    BlockTriangle, Mat, C64, ZERO,
};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;

/// Sampled coefficient matrix `A(t_i)` of `dU/dt = A(t) U`.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    grid: TimeGrid,
    samples: BlockSeq,
}

impl Generator {
    pub fn new(grid: &TimeGrid, samples: &[Mat]) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::Dimension(format!(
                "generator has {} samples for a grid of {} nodes",
                samples.len(),
                grid.len()
            )));
        }
        let d = samples[0].nrows();
        if d == 0 {
            return Err(Error::Dimension(
                "generator dimension must be positive".into(),
            ));
        }
        for (i, m) in samples.iter().enumerate() {
            if m.nrows() != d || m.ncols() != d {
                return Err(Error::Dimension(format!(
                    "sample {i} is {}x{}, expected {d}x{d}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::Argument(format!(
                    "generator sample {i} is not finite"
                )));
            }
        }
        Ok(Self {
            grid: grid.clone(),
            samples: BlockSeq::from_mats(samples),
        })
    }

    /// Sample a callable `t -> A(t)` on every node.
    pub fn sample<F>(grid: &TimeGrid, f: F) -> Result<Self>
    where
        F: Fn(f64) -> Mat,
    {
        let mats: Vec<Mat> = grid.nodes().iter().map(|&t| f(t)).collect();
        Self::new(grid, &mats)
    }

    pub fn zeros(grid: &TimeGrid, d: usize) -> Self {
        Self {
            grid: grid.clone(),
            samples: BlockSeq::zeros(grid.len(), d),
        }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.samples.dim()
    }

    pub fn sample_at(&self, i: usize) -> Mat {
        self.samples.mat(i)
    }

    pub fn samples(&self) -> Vec<Mat> {
        self.samples.to_mats()
    }

    pub(crate) fn blocks(&self) -> &BlockSeq {
        &self.samples
    }

    pub fn is_zero(&self) -> bool {
        self.samples.is_zero()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mats: Vec<Mat> = self
            .samples()
            .into_iter()
            .map(|m| m * C64::from(factor))
            .collect();
        Self {
            grid: self.grid.clone(),
            samples: BlockSeq::from_mats(&mats),
        }
    }

    pub fn add(&self, other: &Generator) -> Result<Self> {
        if !self.grid.compatible(&other.grid) || self.dim() != other.dim() {
            return Err(Error::Dimension(
                "generators live on different grids or dims".into(),
            ));
        }
        let mats: Vec<Mat> = self
            .samples()
            .into_iter()
            .zip(other.samples())
            .map(|(a, b)| a + b)
            .collect();
        Self::new(&self.grid, &mats)
    }
}

/// Element `D(t) δ(t - s) + F(t, s) Θ(t - s)` sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct StarElement {
    grid: TimeGrid,
    delta: BlockSeq,
    theta: BlockTriangle,
}

impl StarElement {
    pub fn from_parts(grid: &TimeGrid, delta: BlockSeq, theta: BlockTriangle) -> Result<Self> {
        let n = grid.len();
        if delta.len() != n || theta.len() != n {
            return Err(Error::Dimension(format!(
                "parts sized {} / {} for a grid of {n} nodes",
                delta.len(),
                theta.len()
            )));
        }
        if delta.dim() != theta.dim() || delta.dim() == 0 {
            return Err(Error::Dimension(
                "delta and theta block sizes differ".into(),
            ));
        }
        Ok(Self {
            grid: grid.clone(),
            delta,
            theta,
        })
    }

    /// Zero δ-part and Θ-kernel `F_ij = f(i, j)` for `i >= j`.
    pub fn from_kernel<F>(grid: &TimeGrid, d: usize, f: F) -> Self
    where
        F: Fn(usize, usize) -> Mat + Sync + Send,
    {
        Self {
            grid: grid.clone(),
            delta: BlockSeq::zeros(grid.len(), d),
            theta: BlockTriangle::from_fn(grid.len(), d, f),
        }
    }

    pub fn zero(grid: &TimeGrid, d: usize) -> Self {
        Self {
            grid: grid.clone(),
            delta: BlockSeq::zeros(grid.len(), d),
            theta: BlockTriangle::zeros(grid.len(), d),
        }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.delta.dim()
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn delta(&self, i: usize) -> Mat {
        self.delta.mat(i)
    }

    /// Θ-kernel block `F_ij`; panics for `i < j`.
    pub fn kernel(&self, i: usize, j: usize) -> Mat {
        self.theta.mat(i, j)
    }

    pub fn delta_part(&self) -> &BlockSeq {
        &self.delta
    }

    pub fn theta_part(&self) -> &BlockTriangle {
        &self.theta
    }

    pub fn has_zero_delta(&self) -> bool {
        self.delta.is_zero()
    }

    fn check_compatible(&self, other: &StarElement) -> Result<()> {
        if !self.grid.compatible(&other.grid) {
            return Err(Error::Dimension("operands live on different grids".into()));
        }
        if self.dim() != other.dim() {
            return Err(Error::Dimension(format!(
                "operand dims {} and {} differ",
                self.dim(),
                other.dim()
            )));
        }
        Ok(())
    }

    fn zip_with(&self, other: &StarElement, alpha: f64) -> Result<StarElement> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for i in 0..self.len() {
            axpy(out.delta.block_mut(i), other.delta.block(i), alpha);
        }
        axpy(out.theta.raw_mut(), other.theta.raw(), alpha);
        Ok(out)
    }

    pub fn add(&self, other: &StarElement) -> Result<StarElement> {
        self.zip_with(other, 1.0)
    }

    pub fn sub(&self, other: &StarElement) -> Result<StarElement> {
        self.zip_with(other, -1.0)
    }

    pub fn scale(&self, factor: C64) -> StarElement {
        let mut out = self.clone();
        for i in 0..self.len() {
            out.delta.block_mut(i).iter_mut().for_each(|z| *z *= factor);
        }
        out.theta.raw_mut().iter_mut().for_each(|z| *z *= factor);
        out
    }

    /// Largest per-block Frobenius deviation, relative to the larger block norm
    /// (absolute when both blocks are below `floor`).
    pub fn max_block_deviation(&self, other: &StarElement, floor: f64) -> Result<f64> {
        self.check_compatible(other)?;
        let d2 = self.dim() * self.dim();
        let rel = |a: &[C64], b: &[C64]| {
            let diff: f64 = a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y).norm_sqr())
                .sum::<f64>();
            let scale = norm_sqr(a).max(norm_sqr(b)).sqrt().max(floor);
            diff.sqrt() / scale
        };
        let mut worst: f64 = 0.0;
        for i in 0..self.len() {
            worst = worst.max(rel(self.delta.block(i), other.delta.block(i)));
        }
        for (a, b) in self
            .theta
            .raw()
            .chunks(d2)
            .zip(other.theta.raw().chunks(d2))
        {
            worst = worst.max(rel(a, b));
        }
        Ok(worst)
    }

    /// Column `j = 0` of the element (δ block at node 0 and `F_{i0}`).
    pub fn first_column(&self) -> StarColumn {
        let n = self.len();
        let d = self.dim();
        let mut theta = BlockSeq::zeros(n, d);
        for i in 0..n {
            theta.block_mut(i).copy_from_slice(self.theta.block(i, 0));
        }
        StarColumn {
            grid: self.grid.clone(),
            delta0: self.delta.block(0).to_vec(),
            theta,
        }
    }
}

/// Column `s = t_0` of a ★-element; enough to carry `U(t_i, t_0)` through
/// right-to-left products at `O(N^2)` cost per product.
#[derive(Debug, Clone, PartialEq)]
pub struct StarColumn {
    grid: TimeGrid,
    delta0: Vec<C64>,
    theta: BlockSeq,
}

impl StarColumn {
    pub fn dim(&self) -> usize {
        self.theta.dim()
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn delta0(&self) -> Mat {
        block_to_mat(&self.delta0, self.dim())
    }

    pub fn kernel(&self, i: usize) -> Mat {
        self.theta.mat(i)
    }

    pub fn identity(grid: &TimeGrid, d: usize) -> Self {
        Self {
            grid: grid.clone(),
            delta0: identity_block(d),
            theta: BlockSeq::zeros(grid.len(), d),
        }
    }

    pub fn add(&self, other: &StarColumn) -> Result<StarColumn> {
        if !self.grid.compatible(&other.grid) || self.dim() != other.dim() {
            return Err(Error::Dimension(
                "columns live on different grids or dims".into(),
            ));
        }
        let mut out = self.clone();
        axpy(&mut out.delta0, &other.delta0, 1.0);
        for i in 0..self.grid.len() {
            axpy(out.theta.block_mut(i), other.theta.block(i), 1.0);
        }
        Ok(out)
    }
}

/// Evolution operator on the grid: bivariate `U(t_i, t_j)` (optional) and the
/// univariate restriction `U(t_i) = U(t_i, t_0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionTable {
    grid: TimeGrid,
    bivariate: Option<BlockTriangle>,
    univariate: BlockSeq,
}

impl EvolutionTable {
    /// Table from a full lower-triangular array; diagonal blocks are reset to the
    /// identity (`U(s, s) = Id`).
    pub fn from_triangle(grid: &TimeGrid, mut table: BlockTriangle) -> Result<Self> {
        let n = grid.len();
        if table.len() != n {
            return Err(Error::Dimension("table size does not match grid".into()));
        }
        let d = table.dim();
        let id = identity_block(d);
        for i in 0..n {
            table.block_mut(i, i).copy_from_slice(&id);
        }
        let mut univariate = BlockSeq::zeros(n, d);
        for i in 0..n {
            univariate.block_mut(i).copy_from_slice(table.block(i, 0));
        }
        Ok(Self {
            grid: grid.clone(),
            bivariate: Some(table),
            univariate,
        })
    }

    /// Table whose bivariate values are the Θ-kernel of a ★-element representing `U Θ`.
    pub fn from_element(element: &StarElement) -> Result<Self> {
        if !element.has_zero_delta() {
            return Err(Error::Argument(
                "an evolution operator element carries no δ-part".into(),
            ));
        }
        Self::from_triangle(element.grid(), element.theta.clone())
    }

    /// Univariate-only table from the first column of a ★-element `U Θ`.
    pub fn from_column(column: &StarColumn) -> Self {
        let n = column.grid.len();
        let d = column.dim();
        let mut univariate = column.theta.clone();
        univariate.block_mut(0).copy_from_slice(&identity_block(d));
        debug_assert_eq!(univariate.len(), n);
        Self {
            grid: column.grid.clone(),
            bivariate: None,
            univariate,
        }
    }

    /// Univariate-only table from samples `U(t_i)`.
    pub fn from_univariate(grid: &TimeGrid, samples: &[Mat]) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::Dimension("sample count does not match grid".into()));
        }
        Ok(Self {
            grid: grid.clone(),
            bivariate: None,
            univariate: BlockSeq::from_mats(samples),
        })
    }

    /// Full table from univariate samples through `U(t, s) = U(t) U(s)^{-1}`.
    pub fn from_semigroup(grid: &TimeGrid, samples: &[Mat]) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::Dimension("sample count does not match grid".into()));
        }
        let inverses = invert_all(samples)?;
        let d = samples[0].nrows();
        let table = BlockTriangle::from_fn(grid.len(), d, |i, j| &samples[i] * &inverses[j]);
        let mut out = Self::from_triangle(grid, table)?;
        out.univariate = BlockSeq::from_mats(samples);
        Ok(out)
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.univariate.dim()
    }

    pub fn has_bivariate(&self) -> bool {
        self.bivariate.is_some()
    }

    pub fn bivariate(&self) -> Option<&BlockTriangle> {
        self.bivariate.as_ref()
    }

    /// `U(t_i, t_j)`; panics if the table is univariate-only.
    pub fn at(&self, i: usize, j: usize) -> Mat {
        self.bivariate
            .as_ref()
            .expect("evolution table carries no bivariate data")
            .mat(i, j)
    }

    /// `U(t_i) = U(t_i, t_0)`.
    pub fn u(&self, i: usize) -> Mat {
        self.univariate.mat(i)
    }

    pub fn univariate(&self) -> Vec<Mat> {
        self.univariate.to_mats()
    }

    /// `max_{i>=j} ||U_ij - U_i U_j^{-1}||_F`.
    pub fn semigroup_defect(&self) -> Result<f64> {
        let table = self
            .bivariate
            .as_ref()
            .ok_or_else(|| Error::Argument("semigroup check needs bivariate data".into()))?;
        let us = self.univariate();
        let inv = invert_all(&us)?;
        let mut worst: f64 = 0.0;
        for (j, inv_j) in inv.iter().enumerate() {
            for (i, u_i) in us.iter().enumerate().skip(j) {
                worst = worst.max((table.mat(i, j) - u_i * inv_j).norm());
            }
        }
        Ok(worst)
    }

    /// Largest Frobenius distance between univariate samples.
    pub fn max_univariate_deviation(&self, other: &EvolutionTable) -> f64 {
        (0..self.grid.len().min(other.grid.len()))
            .map(|i| (self.u(i) - other.u(i)).norm())
            .fold(0.0, f64::max)
    }

    /// Largest per-block deviation relative to the block norm, over the bivariate tables.
    pub fn max_relative_deviation(&self, other: &EvolutionTable) -> Result<f64> {
        let (a, b) = match (&self.bivariate, &other.bivariate) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                return Err(Error::Argument(
                    "relative deviation needs bivariate data on both tables".into(),
                ))
            }
        };
        let d2 = self.dim() * self.dim();
        let mut worst: f64 = 0.0;
        for (x, y) in a.raw().chunks(d2).zip(b.raw().chunks(d2)) {
            let diff: f64 = x.iter().zip(y).map(|(p, q)| (p - q).norm_sqr()).sum();
            let scale = norm_sqr(x).max(norm_sqr(y)).sqrt().max(1e-300);
            worst = worst.max(diff.sqrt() / scale);
        }
        Ok(worst)
    }
}

pub(crate) fn invert(m: &Mat) -> Option<Mat> {
    let inv = m.clone().try_inverse()?;
    inv.iter()
        .all(|z| z.re.is_finite() && z.im.is_finite())
        .then_some(inv)
}

pub(crate) fn invert_all(mats: &[Mat]) -> Result<Vec<Mat>> {
    mats.iter()
        .enumerate()
        .map(|(i, m)| {
            invert(m)
                .ok_or_else(|| Error::Singular(format!("matrix at node {i} is not invertible")))
        })
        .collect()
}

/// The unit `I★ = Id δ(t - s)`.
pub fn identity_element(grid: &TimeGrid, d: usize) -> StarElement {
    StarElement {
        grid: grid.clone(),
        delta: BlockSeq::identity(grid.len(), d),
        theta: BlockTriangle::zeros(grid.len(), d),
    }
}

/// `Id Θ(t - s)`.
pub fn theta_element(grid: &TimeGrid, d: usize) -> StarElement {
    let id = Mat::identity(d, d);
    StarElement::from_kernel(grid, d, move |_, _| id.clone())
}

/// `A(t) Θ(t - s)`.
pub fn from_generator(gen: &Generator) -> StarElement {
    let grid = gen.grid();
    let n = grid.len();
    let d = gen.dim();
    let samples = gen.blocks();
    let theta = BlockTriangle::build_columns(n, d, |j| {
        let mut col = Vec::with_capacity((n - j) * d * d);
        for i in j..n {
            col.extend_from_slice(samples.block(i));
        }
        col
    });
    StarElement {
        grid: grid.clone(),
        delta: BlockSeq::zeros(n, d),
        theta,
    }
}

#[inline]
fn weight(k: usize, i: usize, j: usize, h: f64) -> f64 {
    if k == i || k == j {
        0.5 * h
    } else {
        h
    }
}

/// Discrete ★-product `X ★ Y`.
pub fn star_product(x: &StarElement, y: &StarElement) -> Result<StarElement> {
    x.check_compatible(y)?;
    let n = x.len();
    let d = x.dim();
    let s = d * d;
    let h = x.grid.step();
    let x_delta = !x.delta.is_zero();
    let y_delta = !y.delta.is_zero();
    let x_theta = !x.theta.is_zero();
    let y_theta = !y.theta.is_zero();

    let mut delta = BlockSeq::zeros(n, d);
    if x_delta && y_delta {
        for i in 0..n {
            let p = gemm(x.delta.block(i), y.delta.block(i), d);
            delta.block_mut(i).copy_from_slice(&p);
        }
    }

    let theta = BlockTriangle::build_columns(n, d, |j| {
        let mut col = vec![ZERO; (n - j) * s];
        if x_delta && y_theta {
            let ycol = y.theta.column(j);
            for i in j..n {
                let r = (i - j) * s;
                gemm_acc(
                    &mut col[r..r + s],
                    x.delta.block(i),
                    &ycol[r..r + s],
                    d,
                    1.0,
                );
            }
        }
        if x_theta && y_delta {
            let xcol = x.theta.column(j);
            let dy = y.delta.block(j);
            for i in j..n {
                let r = (i - j) * s;
                gemm_acc(&mut col[r..r + s], &xcol[r..r + s], dy, d, 1.0);
            }
        }
        if x_theta && y_theta {
            let ycol = y.theta.column(j);
            for k in j..n {
                let yk = &ycol[(k - j) * s..(k - j + 1) * s];
                if yk.iter().all(|z| *z == ZERO) {
                    continue;
                }
                let xcol = x.theta.column(k);
                for i in k..n {
                    let r = (i - j) * s;
                    let xik = &xcol[(i - k) * s..(i - k + 1) * s];
                    gemm_acc(&mut col[r..r + s], xik, yk, d, weight(k, i, j, h));
                }
            }
        }
        col
    });

    Ok(StarElement {
        grid: x.grid.clone(),
        delta,
        theta,
    })
}

/// `X ★ c` for a single column `c` (the `s = t_0` column of some element).
pub fn star_apply(x: &StarElement, c: &StarColumn) -> Result<StarColumn> {
    if !x.grid.compatible(&c.grid) || x.dim() != c.dim() {
        return Err(Error::Dimension("column and element do not match".into()));
    }
    let n = x.len();
    let d = x.dim();
    let h = x.grid.step();
    let delta0 = gemm(x.delta.block(0), &c.delta0, d);
    let mut theta = BlockSeq::zeros(n, d);
    let x_delta = !x.delta.is_zero();
    let c_delta = c.delta0.iter().any(|z| *z != ZERO);
    for i in 0..n {
        let out = theta.block_mut(i);
        if x_delta {
            gemm_acc(out, x.delta.block(i), c.theta.block(i), d, 1.0);
        }
        if c_delta {
            gemm_acc(out, x.theta.block(i, 0), &c.delta0, d, 1.0);
        }
    }
    for k in 0..n {
        let ck = c.theta.block(k);
        if ck.iter().all(|z| *z == ZERO) {
            continue;
        }
        let xcol = x.theta.column(k);
        let s = d * d;
        for i in k..n {
            gemm_acc(
                theta.block_mut(i),
                &xcol[(i - k) * s..(i - k + 1) * s],
                ck,
                d,
                weight(k, i, 0, h),
            );
        }
    }
    Ok(StarColumn {
        grid: x.grid.clone(),
        delta0,
        theta,
    })
}

/// `X^{★k}`, with `X^{★0} = I★`.
pub fn star_power(x: &StarElement, k: i64) -> Result<StarElement> {
    if k < 0 {
        return Err(Error::Argument(format!(
            "star power must be non-negative (got {k})"
        )));
    }
    let mut acc = identity_element(&x.grid, x.dim());
    for _ in 0..k {
        acc = star_product(x, &acc)?;
    }
    Ok(acc)
}

/// `Σ_{k=0..m} X^{★k}` by Horner accumulation `S <- I★ + X ★ S`.
pub fn neumann_partial_sum(x: &StarElement, m: usize) -> Result<StarElement> {
    let id = identity_element(&x.grid, x.dim());
    let mut acc = id.clone();
    for _ in 0..m {
        acc = id.add(&star_product(x, &acc)?)?;
    }
    Ok(acc)
}

/// Column form of [`neumann_partial_sum`] applied to `c`: returns the partial
/// sums `Σ_{k<=m} X^{★k} ★ c` for every `m` in `0..=max_order`.
pub fn neumann_columns(
    x: &StarElement,
    c: &StarColumn,
    max_order: usize,
) -> Result<Vec<StarColumn>> {
    let mut term = c.clone();
    let mut sum = c.clone();
    let mut out = Vec::with_capacity(max_order + 1);
    out.push(sum.clone());
    for _ in 0..max_order {
        term = star_apply(x, &term)?;
        sum = sum.add(&term)?;
        out.push(sum.clone());
    }
    Ok(out)
}

/// `(I★ - X)^{★-1}` for an element `X = F Θ` with no δ-part.
///
/// Returns `I★ + K Θ` where `K = F + F ★ K` is solved column by column with
/// the implicit trapezoid step `(I - h/2 F_ii) K_ij = F_ij + Σ_{k<i} w_k F_ik K_kj`.
pub fn exact_resolvent(x: &StarElement) -> Result<StarElement> {
    if !x.has_zero_delta() {
        return Err(Error::Argument(
            "exact_resolvent expects an element with zero δ-part".into(),
        ));
    }
    let n = x.len();
    let d = x.dim();
    let s = d * d;
    let h = x.grid.step();

    let mut implicit = Vec::with_capacity(n);
    for k in 0..n {
        let fkk = block_to_mat(x.theta.block(k, k), d);
        let lhs = Mat::identity(d, d) - fkk * C64::from(0.5 * h);
        let inv = invert(&lhs).ok_or(Error::StepTooLarge { node: k })?;
        implicit.push(mat_to_block(&inv));
    }

    let theta = BlockTriangle::build_columns(n, d, |j| {
        let mut col = x.theta.column(j).to_vec();
        for k in j..n {
            let r = (k - j) * s;
            let kkj = gemm(&implicit[k], &col[r..r + s], d);
            col[r..r + s].copy_from_slice(&kkj);
            let w = if k == j { 0.5 * h } else { h };
            let fcol = x.theta.column(k);
            for i in k + 1..n {
                let ri = (i - j) * s;
                gemm_acc(
                    &mut col[ri..ri + s],
                    &fcol[(i - k) * s..(i - k + 1) * s],
                    &kkj,
                    d,
                    w,
                );
            }
        }
        col
    });

    Ok(StarElement {
        grid: x.grid.clone(),
        delta: BlockSeq::identity(n, d),
        theta,
    })
}

/// `U(t, s) = ∫_s^t G(τ, s) dτ` for `G = I★ + K Θ`, integrated by cumulative trapezoid.
pub fn evolution_from_green(g: &StarElement) -> Result<EvolutionTable> {
    let n = g.len();
    let d = g.dim();
    let s = d * d;
    let id = identity_block(d);
    for i in 0..n {
        let dev: f64 = g
            .delta
            .block(i)
            .iter()
            .zip(&id)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if dev > 1e-12 {
            return Err(Error::MalformedGreen(format!(
                "δ-part at node {i} deviates from the identity by {dev:.3e}"
            )));
        }
    }
    let h = g.grid.step();
    let table = BlockTriangle::build_columns(n, d, |j| {
        let kcol = g.theta.column(j);
        let mut col = Vec::with_capacity((n - j) * s);
        col.extend_from_slice(&id);
        let mut acc = id.clone();
        for i in j + 1..n {
            axpy(&mut acc, &kcol[(i - 1 - j) * s..(i - j) * s], 0.5 * h);
            axpy(&mut acc, &kcol[(i - j) * s..(i - j + 1) * s], 0.5 * h);
            col.extend_from_slice(&acc);
        }
        col
    });
    EvolutionTable::from_triangle(&g.grid, table)
}
