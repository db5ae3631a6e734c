//! Frame changes for a generator split into parts with known evolutions.
//!
//! Every frame is a resolvent identity of ordinary matrix algebra read in the
//! ★-algebra. With `U̇_i := A_i Θ ★ G_i`:
//!
//! ```text
//! standard  U = U_1 ★ (I★ - A_0 Θ ★ G_1)^{-1}
//! biframe   U = U_0 ★ (I★ - U̇_1 ★ U̇_0)^{-1} ★ G_1
//!           U = U_0 ★ G_1 ★ (I★ - (A_1 Θ ★ G_0) ★ (A_0 Θ ★ G_1))^{-1}
//! triframe  U = U_0 ★ (I★ - U̇_1 ★ U̇_0)^{-1} ★ G_1
//!               ★ (I★ - U̇_2 ★ (U̇_0 ★ (I★ - U̇_1 ★ U̇_0)^{-1} ★ G_1
//!                             + U̇_1 ★ (I★ - U̇_0 ★ U̇_1)^{-1} ★ G_0))^{-1} ★ G_2
//! ```
//!
//! Kernels can be produced two ways. [`KernelRoute::Star`] evaluates the
//! products above in the discrete algebra; when the part Green's functions are
//! themselves discrete resolvents ([`SplitGenerator::computed`]) every frame
//! reproduces the lab-frame resolvent to rounding. [`KernelRoute::Quadrature`]
//! evaluates the closed integrals (e.g. `ℬ(t,s) = A_1 U_1(t) ∫ U_1^{-1} A_0 U_0 dτ U_0^{-1}(s)`)
//! with cumulative trapezoid sums from the univariate part evolutions, at
//! `O(N^2)` cost per kernel.

use crate::block::{gemm, gemm_acc, mat_to_block, BlockSeq, BlockTriangle, Mat, C64, ZERO};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::star::{
    evolution_from_green, exact_resolvent, from_generator, identity_element, invert,
    neumann_columns, neumann_partial_sum, star_apply, star_product, theta_element, EvolutionTable,
    Generator, StarColumn, StarElement,
};

/// How the part evolutions and Green's functions were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartSource {
    /// Discrete resolvents of `A_i Θ`; satisfy `G_i - I★ = A_i Θ ★ G_i` to rounding.
    Computed,
    /// Sampled from closed-form evolutions `U_i(t)`; consistent to `O(h^2)`.
    ClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelRoute {
    Star,
    Quadrature,
}

/// The two equivalent presentations of the biframe.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BiframeForm {
    /// `U = U_0 ★ 𝒯e^{ℬ} ★ G_1`
    Blue,
    /// `U = U_0 ★ G_1 ★ 𝒯e^{ℬ_2}`
    Red,
}

/// Frame in which a Dyson series is truncated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    Lab,
    /// Standard frame moving with the given part; the other part drives.
    Std {
        frame_part: usize,
    },
    Biframe,
}

impl Frame {
    pub fn from_tag(tag: &str) -> Option<Frame> {
        match tag {
            "lab" => Some(Frame::Lab),
            "std0" => Some(Frame::Std { frame_part: 0 }),
            "std1" | "std" => Some(Frame::Std { frame_part: 1 }),
            "biframe" => Some(Frame::Biframe),
            _ => None,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Frame::Lab => "lab",
            Frame::Std { frame_part: 0 } => "std0",
            Frame::Std { .. } => "std1",
            Frame::Biframe => "biframe",
        }
    }
}

#[derive(Debug, Clone)]
struct Part {
    generator: Generator,
    green: StarElement,
    /// `U_i(t, s) Θ` as a ★-element.
    evolution: StarElement,
    table: EvolutionTable,
    u: Vec<Mat>,
    u_inv: Vec<Mat>,
}

/// Generator `A = Σ A_i` together with the evolutions and Green's functions of each part.
#[derive(Debug, Clone)]
pub struct SplitGenerator {
    grid: TimeGrid,
    full: Generator,
    parts: Vec<Part>,
    source: PartSource,
}

fn check_parts(parts: &[Generator]) -> Result<(TimeGrid, usize)> {
    let first = parts
        .first()
        .ok_or_else(|| Error::Argument("a split needs at least one part".into()))?;
    let grid = first.grid().clone();
    let d = first.dim();
    for (i, p) in parts.iter().enumerate() {
        if !p.grid().compatible(&grid) || p.dim() != d {
            return Err(Error::Dimension(format!(
                "part {i} does not share grid and dim"
            )));
        }
    }
    Ok((grid, d))
}

fn sum_parts(parts: &[Generator]) -> Result<Generator> {
    let mut full = parts[0].clone();
    for p in &parts[1..] {
        full = full.add(p)?;
    }
    Ok(full)
}

fn adjoint_or_inverse(m: &Mat, unitary: bool, node: usize) -> Result<Mat> {
    if unitary {
        Ok(m.adjoint())
    } else {
        invert(m)
            .ok_or_else(|| Error::Singular(format!("part evolution not invertible at node {node}")))
    }
}

impl SplitGenerator {
    /// Part Green's functions from the discrete resolvent of each `A_i Θ`.
    pub fn computed(parts: Vec<Generator>) -> Result<Self> {
        let (grid, d) = check_parts(&parts)?;
        let full = sum_parts(&parts)?;
        let theta = theta_element(&grid, d);
        let mut out = Vec::with_capacity(parts.len());
        for (idx, generator) in parts.into_iter().enumerate() {
            let green = exact_resolvent(&from_generator(&generator))?;
            let evolution = star_product(&theta, &green)?;
            let table = evolution_from_green(&green)?;
            let u = table.univariate();
            let u_inv = u
                .iter()
                .enumerate()
                .map(|(k, m)| {
                    invert(m).ok_or_else(|| {
                        Error::Singular(format!("evolution of part {idx} singular at node {k}"))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            out.push(Part {
                generator,
                green,
                evolution,
                table,
                u,
                u_inv,
            });
        }
        Ok(Self {
            grid,
            full,
            parts: out,
            source: PartSource::Computed,
        })
    }

    /// Part Green's functions sampled from closed-form evolutions `U_i(t_k)`,
    /// via `U_i(t, s) = U_i(t) U_i(s)^{-1}` and `G_i = I★ + A_i(t) U_i(t, s) Θ`.
    /// With `unitary` set, inverses are taken as adjoints.
    pub fn closed_form(
        parts: Vec<Generator>,
        evolutions: Vec<Vec<Mat>>,
        unitary: bool,
    ) -> Result<Self> {
        let (grid, d) = check_parts(&parts)?;
        if evolutions.len() != parts.len() {
            return Err(Error::Dimension(
                "one evolution per part is required".into(),
            ));
        }
        let full = sum_parts(&parts)?;
        let n = grid.len();
        let mut out = Vec::with_capacity(parts.len());
        for (generator, u) in parts.into_iter().zip(evolutions) {
            if u.len() != n || u.iter().any(|m| m.nrows() != d || m.ncols() != d) {
                return Err(Error::Dimension(
                    "evolution samples do not match grid/dim".into(),
                ));
            }
            let u_inv = u
                .iter()
                .enumerate()
                .map(|(k, m)| adjoint_or_inverse(m, unitary, k))
                .collect::<Result<Vec<_>>>()?;
            let evolution = StarElement::from_kernel(&grid, d, |i, j| &u[i] * &u_inv[j]);
            let a = generator.samples();
            let kernel = StarElement::from_kernel(&grid, d, |i, j| &a[i] * &u[i] * &u_inv[j]);
            let green = identity_element(&grid, d).add(&kernel)?;
            let table = EvolutionTable::from_element(&evolution)?;
            out.push(Part {
                generator,
                green,
                evolution,
                table,
                u,
                u_inv,
            });
        }
        Ok(Self {
            grid,
            full,
            parts: out,
            source: PartSource::ClosedForm,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.full.dim()
    }

    pub fn n_parts(&self) -> usize {
        self.parts.len()
    }

    pub fn source(&self) -> PartSource {
        self.source
    }

    pub fn full_generator(&self) -> &Generator {
        &self.full
    }

    pub fn part(&self, i: usize) -> &Generator {
        &self.parts[i].generator
    }

    pub fn part_green(&self, i: usize) -> &StarElement {
        &self.parts[i].green
    }

    /// `U_i(t, s) Θ` as a ★-element.
    pub fn part_evolution_element(&self, i: usize) -> &StarElement {
        &self.parts[i].evolution
    }

    pub fn part_evolution(&self, i: usize) -> &EvolutionTable {
        &self.parts[i].table
    }

    /// Univariate samples `U_i(t_k)`.
    pub fn part_u(&self, i: usize) -> &[Mat] {
        &self.parts[i].u
    }

    /// Same split with parts reordered: part `k` of the result is part `order[k]` of `self`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.parts.len()];
        if order.len() != self.parts.len() {
            return Err(Error::Argument(
                "permutation length differs from part count".into(),
            ));
        }
        for &k in order {
            if k >= seen.len() || std::mem::replace(&mut seen[k], true) {
                return Err(Error::Argument(format!("{order:?} is not a permutation")));
            }
        }
        Ok(Self {
            grid: self.grid.clone(),
            full: self.full.clone(),
            parts: order.iter().map(|&k| self.parts[k].clone()).collect(),
            source: self.source,
        })
    }

    /// Largest block deviation of `G_i - I★` from `A_i Θ ★ G_i`.
    pub fn green_residual(&self, i: usize) -> Result<f64> {
        let p = &self.parts[i];
        let lhs = p.green.sub(&identity_element(&self.grid, self.dim()))?;
        let rhs = star_product(&from_generator(&p.generator), &p.green)?;
        lhs.max_block_deviation(&rhs, 1.0)
    }

    /// Largest deviation of `Σ A_i(t_k)` from the full generator.
    pub fn sum_defect(&self) -> f64 {
        let n = self.grid.len();
        (0..n)
            .map(|k| {
                let s = self
                    .parts
                    .iter()
                    .fold(Mat::zeros(self.dim(), self.dim()), |acc, p| {
                        acc + p.generator.sample_at(k)
                    });
                (s - self.full.sample_at(k)).norm()
            })
            .fold(0.0, f64::max)
    }

    /// `U̇_i = A_i Θ ★ G_i`.
    pub fn udot(&self, i: usize) -> Result<StarElement> {
        star_product(
            &from_generator(&self.parts[i].generator),
            &self.parts[i].green,
        )
    }

    /// `A_i Θ ★ G_j`.
    fn drive_in(&self, i: usize, j: usize) -> Result<StarElement> {
        star_product(
            &from_generator(&self.parts[i].generator),
            &self.parts[j].green,
        )
    }

    fn require_parts(&self, n: usize) -> Result<()> {
        if self.parts.len() != n {
            return Err(Error::Argument(format!(
                "operation needs a {n}-part split (got {})",
                self.parts.len()
            )));
        }
        Ok(())
    }
}

/// Bivariate driving kernel `ℬ(t_i, t_j)` of the biframe, `i >= j`.
#[derive(Debug, Clone, PartialEq)]
pub struct BiframeOperator {
    grid: TimeGrid,
    kernel: BlockTriangle,
}

impl BiframeOperator {
    pub fn from_triangle(grid: &TimeGrid, kernel: BlockTriangle) -> Self {
        Self {
            grid: grid.clone(),
            kernel,
        }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.kernel.dim()
    }

    pub fn kernel(&self, i: usize, j: usize) -> Mat {
        self.kernel.mat(i, j)
    }

    /// `ℬ Θ` as a ★-element.
    pub fn to_element(&self) -> StarElement {
        StarElement::from_parts(
            &self.grid,
            BlockSeq::zeros(self.grid.len(), self.dim()),
            self.kernel.clone(),
        )
        .expect("operator shape matches its grid")
    }

    /// Largest entrywise deviation relative to the largest kernel entry.
    pub fn max_relative_deviation(&self, other: &BiframeOperator) -> f64 {
        let n = self.grid.len();
        let mut diff: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for j in 0..n {
            for i in j..n {
                let a = self.kernel(i, j);
                let b = other.kernel(i, j);
                scale = scale.max(a.camax()).max(b.camax());
                diff = diff.max((a - b).camax());
            }
        }
        if scale == 0.0 {
            diff
        } else {
            diff / scale
        }
    }
}

/// `L(t) P(t) [∫_s^t Q(τ) dτ] R(s)` with the integral from cumulative trapezoid
/// sums; the diagonal (empty integral) is zero.
fn sandwich_kernel(
    grid: &TimeGrid,
    left: &[Mat],
    integrand: &[Mat],
    right: &[Mat],
) -> BlockTriangle {
    let n = grid.len();
    let d = left[0].nrows();
    let s = d * d;
    let h = grid.step();
    let mut prefix = vec![vec![ZERO; s]; n];
    for k in 1..n {
        let mut acc = prefix[k - 1].clone();
        let a = mat_to_block(&integrand[k - 1]);
        let b = mat_to_block(&integrand[k]);
        for ((o, x), y) in acc.iter_mut().zip(&a).zip(&b) {
            *o += (x + y) * (0.5 * h);
        }
        prefix[k] = acc;
    }
    let left: Vec<Vec<C64>> = left.iter().map(mat_to_block).collect();
    let right: Vec<Vec<C64>> = right.iter().map(mat_to_block).collect();
    BlockTriangle::build_columns(n, d, |j| {
        let mut col = vec![ZERO; (n - j) * s];
        for i in j + 1..n {
            let inner: Vec<C64> = prefix[i]
                .iter()
                .zip(&prefix[j])
                .map(|(a, b)| a - b)
                .collect();
            let li = gemm(&left[i], &inner, d);
            let r = (i - j) * s;
            gemm_acc(&mut col[r..r + s], &li, &right[j], d, 1.0);
        }
        col
    })
}

/// Transformed generator `U_p^{-1}(t) A_q(t) U_p(t)` of the standard frame moving with part `p`,
/// returned as a Θ-element.
pub fn std_frame_operator_in(split: &SplitGenerator, frame_part: usize) -> Result<StarElement> {
    split.require_parts(2)?;
    if frame_part > 1 {
        return Err(Error::Argument("frame part must be 0 or 1".into()));
    }
    let p = &split.parts[frame_part];
    let a = split.parts[1 - frame_part].generator.samples();
    let samples: Vec<Mat> = (0..split.grid.len())
        .map(|k| &p.u_inv[k] * &a[k] * &p.u[k])
        .collect();
    Ok(from_generator(&Generator::new(&split.grid, &samples)?))
}

/// `U_1^{-1}(t) A_0(t) U_1(t) Θ`, whose resolvent time-orders `ℱ(t,s) = ∫_s^t U_1^{-1} A_0 U_1 dτ`.
pub fn std_frame_operator(split: &SplitGenerator) -> Result<StarElement> {
    std_frame_operator_in(split, 1)
}

/// `U(t, s) = U_p(t) 𝒯e^{ℱ(t,s)} U_p^{-1}(s)`.
pub fn std_frame_u_in(split: &SplitGenerator, frame_part: usize) -> Result<EvolutionTable> {
    let op = std_frame_operator_in(split, frame_part)?;
    let inner = evolution_from_green(&exact_resolvent(&op)?)?;
    let p = &split.parts[frame_part];
    let w = inner.bivariate().expect("resolvent tables are bivariate");
    let table = BlockTriangle::from_fn(split.grid.len(), split.dim(), |i, j| {
        &p.u[i] * w.mat(i, j) * &p.u_inv[j]
    });
    EvolutionTable::from_triangle(&split.grid, table)
}

/// Standard frame moving with part 1.
#[allow(non_snake_case)]
pub fn std_frame_U(split: &SplitGenerator) -> Result<EvolutionTable> {
    std_frame_u_in(split, 1)
}

/// `U_1 ★ (I★ - A_0 Θ ★ G_1)^{-1}` evaluated in the discrete algebra.
#[allow(non_snake_case)]
pub fn std_frame_U_star(split: &SplitGenerator) -> Result<EvolutionTable> {
    split.require_parts(2)?;
    let r = exact_resolvent(&split.drive_in(0, 1)?)?;
    EvolutionTable::from_element(&star_product(&split.parts[1].evolution, &r)?)
}

/// Biframe kernel from the closed integral, trapezoid inner integral.
pub fn biframe_operator(split: &SplitGenerator, form: BiframeForm) -> Result<BiframeOperator> {
    split.require_parts(2)?;
    let (p0, p1) = (&split.parts[0], &split.parts[1]);
    let a0 = p0.generator.samples();
    let a1 = p1.generator.samples();
    let n = split.grid.len();
    // blue: A_1 U_1(t) ∫ U_1^{-1} A_0 U_0 dτ U_0^{-1}(s)
    // red:  A_1 U_0(t) ∫ U_0^{-1} A_0 U_1 dτ U_1^{-1}(s)
    let (outer, inner_left, inner_right, right) = match form {
        BiframeForm::Blue => (&p1.u, &p1.u_inv, &p0.u, &p0.u_inv),
        BiframeForm::Red => (&p0.u, &p0.u_inv, &p1.u, &p1.u_inv),
    };
    let left: Vec<Mat> = (0..n).map(|k| &a1[k] * &outer[k]).collect();
    let integrand: Vec<Mat> = (0..n)
        .map(|k| &inner_left[k] * &a0[k] * &inner_right[k])
        .collect();
    Ok(BiframeOperator::from_triangle(
        &split.grid,
        sandwich_kernel(&split.grid, &left, &integrand, right),
    ))
}

/// Biframe kernel as a ★-product: blue `U̇_1 ★ U̇_0`, red `(A_1 Θ ★ G_0) ★ (A_0 Θ ★ G_1)`.
pub fn biframe_operator_star(split: &SplitGenerator, form: BiframeForm) -> Result<BiframeOperator> {
    split.require_parts(2)?;
    let prod = match form {
        BiframeForm::Blue => star_product(&split.udot(1)?, &split.udot(0)?)?,
        BiframeForm::Red => star_product(&split.drive_in(1, 0)?, &split.drive_in(0, 1)?)?,
    };
    Ok(BiframeOperator::from_triangle(
        &split.grid,
        prod.theta_part().clone(),
    ))
}

fn biframe_kernel(
    split: &SplitGenerator,
    form: BiframeForm,
    route: KernelRoute,
) -> Result<BiframeOperator> {
    match route {
        KernelRoute::Star => biframe_operator_star(split, form),
        KernelRoute::Quadrature => biframe_operator(split, form),
    }
}

/// Biframe evolution; `𝒯e^{ℬ}` is the ★-resolvent of `ℬ Θ`.
#[allow(non_snake_case)]
pub fn biframe_U(
    split: &SplitGenerator,
    form: BiframeForm,
    route: KernelRoute,
) -> Result<EvolutionTable> {
    let b = biframe_kernel(split, form, route)?;
    let r = exact_resolvent(&b.to_element())?;
    let u0 = &split.parts[0].evolution;
    let g1 = &split.parts[1].green;
    let u = match form {
        BiframeForm::Blue => star_product(&star_product(u0, &r)?, g1)?,
        BiframeForm::Red => star_product(&star_product(u0, g1)?, &r)?,
    };
    EvolutionTable::from_element(&u)
}

/// Triframe evolution assembled from ★-products of the three parts.
#[allow(non_snake_case)]
pub fn triframe_U(split: &SplitGenerator) -> Result<EvolutionTable> {
    split.require_parts(3)?;
    let ud: Vec<StarElement> = (0..3).map(|i| split.udot(i)).collect::<Result<_>>()?;
    let (g0, g1, g2) = (
        &split.parts[0].green,
        &split.parts[1].green,
        &split.parts[2].green,
    );
    let r10 = exact_resolvent(&star_product(&ud[1], &ud[0])?)?;
    let r01 = exact_resolvent(&star_product(&ud[0], &ud[1])?)?;
    let left = star_product(&r10, g1)?;
    let branch0 = star_product(&ud[0], &left)?;
    let branch1 = star_product(&ud[1], &star_product(&r01, g0)?)?;
    let coupling = star_product(&ud[2], &branch0.add(&branch1)?)?;
    let outer = exact_resolvent(&coupling)?;
    let u = star_product(&split.parts[0].evolution, &left)?;
    let u = star_product(&star_product(&u, &outer)?, g2)?;
    EvolutionTable::from_element(&u)
}

/// Direct lab-frame solution `Θ ★ (I★ - A Θ)^{-1}`.
#[allow(non_snake_case)]
pub fn lab_U(split: &SplitGenerator) -> Result<EvolutionTable> {
    evolution_from_green(&exact_resolvent(&from_generator(&split.full))?)
}

struct DysonPlan {
    driver: StarElement,
    seed: StarColumn,
    left: StarElement,
}

fn dyson_plan(split: &SplitGenerator, frame: Frame, route: KernelRoute) -> Result<DysonPlan> {
    let grid = &split.grid;
    let d = split.dim();
    match frame {
        Frame::Lab => Ok(DysonPlan {
            driver: from_generator(&split.full),
            seed: StarColumn::identity(grid, d),
            left: theta_element(grid, d),
        }),
        Frame::Std { frame_part } => {
            split.require_parts(2)?;
            if frame_part > 1 {
                return Err(Error::Argument("frame part must be 0 or 1".into()));
            }
            let q = 1 - frame_part;
            let p = &split.parts[frame_part];
            let driver = match route {
                KernelRoute::Star => split.drive_in(q, frame_part)?,
                KernelRoute::Quadrature => {
                    let a = split.parts[q].generator.samples();
                    StarElement::from_kernel(grid, d, |i, j| &a[i] * &p.u[i] * &p.u_inv[j])
                }
            };
            Ok(DysonPlan {
                driver,
                seed: StarColumn::identity(grid, d),
                left: p.evolution.clone(),
            })
        }
        Frame::Biframe => {
            split.require_parts(2)?;
            Ok(DysonPlan {
                driver: biframe_kernel(split, BiframeForm::Blue, route)?.to_element(),
                seed: split.parts[1].green.first_column(),
                left: split.parts[0].evolution.clone(),
            })
        }
    }
}

/// Order-`m` Dyson approximant in the given frame (full bivariate table):
///
/// ```text
/// lab      Θ ★ Σ_{k<=m} (A Θ)^{★k}
/// std      U_p ★ Σ_{k<=m} (A_q Θ ★ G_p)^{★k}
/// biframe  U_0 ★ Σ_{k<=m} (ℬ Θ)^{★k} ★ G_1
/// ```
pub fn dyson_truncated(split: &SplitGenerator, frame: Frame, m: usize) -> Result<EvolutionTable> {
    let plan = dyson_plan(split, frame, KernelRoute::Star)?;
    let sum = neumann_partial_sum(&plan.driver, m)?;
    let u = match frame {
        Frame::Biframe => star_product(&star_product(&plan.left, &sum)?, &split.parts[1].green)?,
        _ => star_product(&plan.left, &sum)?,
    };
    EvolutionTable::from_element(&u)
}

/// Univariate Dyson approximants `U^{[m]}(t_i, t_0)` for every `m` in `orders`,
/// propagated column-wise at `O(N^2)` cost per order.
pub fn dyson_series(
    split: &SplitGenerator,
    frame: Frame,
    orders: &[usize],
    route: KernelRoute,
) -> Result<Vec<EvolutionTable>> {
    let Some(&max_order) = orders.iter().max() else {
        return Ok(Vec::new());
    };
    let plan = dyson_plan(split, frame, route)?;
    let sums = neumann_columns(&plan.driver, &plan.seed, max_order)?;
    orders
        .iter()
        .map(|&m| {
            Ok(EvolutionTable::from_column(&star_apply(
                &plan.left, &sums[m],
            )?))
        })
        .collect()
}

/// Untruncated counterpart of [`dyson_series`]: the frame's driving kernel is resolved
/// exactly, so the only error left is discretization (the quadrature floor).
pub fn dyson_limit(
    split: &SplitGenerator,
    frame: Frame,
    route: KernelRoute,
) -> Result<EvolutionTable> {
    let plan = dyson_plan(split, frame, route)?;
    let r = exact_resolvent(&plan.driver)?;
    let col = star_apply(&r, &plan.seed)?;
    Ok(EvolutionTable::from_column(&star_apply(&plan.left, &col)?))
}

/// `Σ` over all alternating words in `{U̇_0, U̇_1}` of length `1..=m`.
pub fn udot_alternating_series(split: &SplitGenerator, m: usize) -> Result<StarElement> {
    split.require_parts(2)?;
    if m == 0 {
        return Err(Error::Argument("word length cap must be at least 1".into()));
    }
    let u0 = split.udot(0)?;
    let u1 = split.udot(1)?;
    let mut start0 = u0.clone();
    let mut start1 = u1.clone();
    let mut total = start0.add(&start1)?;
    for _ in 1..m {
        let next0 = star_product(&u0, &start1)?;
        let next1 = star_product(&u1, &start0)?;
        start0 = next0;
        start1 = next1;
        total = total.add(&start0.add(&start1)?)?;
    }
    Ok(total)
}

/// `U = Θ ★ (I★ + U̇)` for a derivative series `U̇`.
pub fn evolution_from_udot(udot: &StarElement) -> Result<EvolutionTable> {
    let g = identity_element(udot.grid(), udot.dim()).add(udot)?;
    evolution_from_green(&g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pauli() -> (Mat, Mat, Mat) {
        let i = C64::i();
        let o = C64::from(1.0);
        let z = C64::from(0.0);
        (
            Mat::from_row_slice(2, 2, &[z, o, o, z]),
            Mat::from_row_slice(2, 2, &[z, -i, i, z]),
            Mat::from_row_slice(2, 2, &[o, z, z, -o]),
        )
    }

    fn smooth_split(n: usize) -> SplitGenerator {
        let grid = TimeGrid::new(1.5, n).unwrap();
        let (sx, sy, sz) = pauli();
        let mi = -C64::i();
        let a0 = Generator::sample(&grid, |t| {
            (&sz * C64::from(0.8) + &sx * C64::from(0.3 * t)) * mi
        })
        .unwrap();
        let a1 = Generator::sample(&grid, |t| &sy * C64::from(0.9 * (2.0 * t).cos()) * mi).unwrap();
        SplitGenerator::computed(vec![a0, a1]).unwrap()
    }

    #[test]
    fn split_invariants_hold() {
        let split = smooth_split(41);
        assert!(split.sum_defect() < 1e-15);
        for i in 0..2 {
            assert!(split.green_residual(i).unwrap() < 1e-12);
        }
    }

    #[test]
    fn biframe_star_equals_lab_to_rounding() {
        let split = smooth_split(61);
        let lab = lab_U(&split).unwrap();
        for form in [BiframeForm::Blue, BiframeForm::Red] {
            let u = biframe_U(&split, form, KernelRoute::Star).unwrap();
            assert!(u.max_relative_deviation(&lab).unwrap() < 1e-11, "{form:?}");
        }
        let s = std_frame_U_star(&split).unwrap();
        assert!(s.max_relative_deviation(&lab).unwrap() < 1e-11);
    }

    #[test]
    fn quadrature_routes_agree_to_grid_order() {
        let split = smooth_split(201);
        let lab = lab_U(&split).unwrap();
        let h2 = split.grid().step().powi(2);
        let std = std_frame_U(&split).unwrap();
        assert!(std.max_relative_deviation(&lab).unwrap() < 10.0 * h2);
        for form in [BiframeForm::Blue, BiframeForm::Red] {
            let u = biframe_U(&split, form, KernelRoute::Quadrature).unwrap();
            assert!(
                u.max_relative_deviation(&lab).unwrap() < 10.0 * h2,
                "{form:?}"
            );
        }
    }

    #[test]
    fn zero_parts_collapse() {
        let grid = TimeGrid::new(1.0, 31).unwrap();
        let (sx, _, sz) = pauli();
        let a = Generator::sample(&grid, |t| {
            &sz * C64::new(0.0, -1.0 - t) + &sx * C64::new(0.0, -0.4)
        })
        .unwrap();
        let z = Generator::zeros(&grid, 2);
        let only0 = SplitGenerator::computed(vec![a.clone(), z.clone()]).unwrap();
        let only1 = SplitGenerator::computed(vec![z, a]).unwrap();
        let u0 = only0.part_evolution(0);
        let u1 = only1.part_evolution(1);
        for split in [&only0, &only1] {
            assert!(biframe_operator(split, BiframeForm::Blue)
                .unwrap()
                .to_element()
                .theta_part()
                .is_zero());
            assert!(biframe_operator(split, BiframeForm::Red)
                .unwrap()
                .to_element()
                .theta_part()
                .is_zero());
        }
        // A_1 = 0 -> U = U_0, A_0 = 0 -> U = U_1
        for route in [KernelRoute::Star, KernelRoute::Quadrature] {
            let b = biframe_U(&only0, BiframeForm::Blue, route).unwrap();
            assert!(b.max_relative_deviation(u0).unwrap() < 1e-13);
            let b = biframe_U(&only1, BiframeForm::Blue, route).unwrap();
            assert!(b.max_relative_deviation(u1).unwrap() < 1e-13);
        }
        assert!(std_frame_U(&only1).unwrap().max_univariate_deviation(u1) < 1e-13);
        assert!(
            std_frame_U(&only0)
                .unwrap()
                .max_relative_deviation(u0)
                .unwrap()
                < 1e-12
        );
        assert!(std_frame_operator(&only1).unwrap().theta_part().is_zero());
    }

    #[test]
    fn std_operator_with_trivial_frame_is_lab() {
        let grid = TimeGrid::new(1.0, 11).unwrap();
        let (sx, _, _) = pauli();
        let a0 = Generator::sample(&grid, |t| &sx * C64::new(0.0, t)).unwrap();
        let split = SplitGenerator::computed(vec![a0.clone(), Generator::zeros(&grid, 2)]).unwrap();
        let op = std_frame_operator(&split).unwrap();
        assert_eq!(op, from_generator(&a0));
    }

    #[test]
    fn dyson_low_orders() {
        let split = smooth_split(21);
        let lab0 = dyson_truncated(&split, Frame::Lab, 0).unwrap();
        for j in 0..21 {
            for i in j..21 {
                assert_eq!(lab0.at(i, j), Mat::identity(2, 2));
            }
        }
        let bi0 = dyson_truncated(&split, Frame::Biframe, 0).unwrap();
        let want = EvolutionTable::from_element(
            &star_product(split.part_evolution_element(0), split.part_green(1)).unwrap(),
        )
        .unwrap();
        assert_eq!(bi0, want);
    }

    #[test]
    fn column_series_matches_full_truncation() {
        let split = smooth_split(31);
        for frame in [
            Frame::Lab,
            Frame::Std { frame_part: 1 },
            Frame::Std { frame_part: 0 },
            Frame::Biframe,
        ] {
            let cols = dyson_series(&split, frame, &[0, 2, 3], KernelRoute::Star).unwrap();
            for (table, m) in cols.iter().zip([0, 2, 3]) {
                let full = dyson_truncated(&split, frame, m).unwrap();
                assert!(
                    table.max_univariate_deviation(&full) < 1e-12,
                    "{frame:?} m={m}"
                );
            }
        }
    }

    #[test]
    fn alternating_series_length_one() {
        let split = smooth_split(21);
        let s = udot_alternating_series(&split, 1).unwrap();
        let want = split.udot(0).unwrap().add(&split.udot(1).unwrap()).unwrap();
        assert_eq!(s, want);
        assert!(matches!(
            udot_alternating_series(&split, 0),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn part_count_is_checked() {
        let split = smooth_split(11);
        assert!(matches!(triframe_U(&split), Err(Error::Argument(_))));
        assert!(split.permuted(&[0, 0]).is_err());
    }
}
