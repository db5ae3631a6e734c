//! Driven two-level system `H(t) = (ω0/2) σz + 2β cos(ωt) σx`.
//!
//! Split into `H_0 = (ω0/2) σz` and `H_1 = 2β cos(ωt) σx`, both parts have
//! closed-form evolutions, so every frame operator also has a closed form.
//! Generators carry the Schrödinger factor: `A_i = -i H_i`.

use crate::block::BlockTriangle;
use crate::error::{Error, Result};
use crate::frames::{
    dyson_limit, dyson_series, BiframeOperator, Frame, KernelRoute, PartSource, SplitGenerator,
};
use crate::grid::TimeGrid;
use crate::reference::{epsilon_error, rk_reference, ReferenceSolution};
use crate::star::Generator;
use crate::{Mat, C64};

const I: C64 = C64::new(0.0, 1.0);

pub fn sigma_x() -> Mat {
    Mat::from_row_slice(2, 2, &[C64::ZERO, C64::ONE, C64::ONE, C64::ZERO])
}

pub fn sigma_y() -> Mat {
    Mat::from_row_slice(2, 2, &[C64::ZERO, -I, I, C64::ZERO])
}

pub fn sigma_z() -> Mat {
    Mat::from_row_slice(2, 2, &[C64::ONE, C64::ZERO, C64::ZERO, -C64::ONE])
}

/// Physical parameters and the discretization of one run.
///
/// The defaults `ω = 3, ω0 = 2, β = 1.6, T = 2` give `ω0/ω = 2/3`, `β/ω = 0.533`
/// and `ωT = 6`; only these ratios matter.
#[derive(Debug, Clone, PartialEq)]
pub struct RabiParams {
    pub omega0: f64,
    pub beta: f64,
    pub omega: f64,
    pub t_total: f64,
    pub n_grid: usize,
    pub orders: Vec<usize>,
}

impl Default for RabiParams {
    fn default() -> Self {
        Self {
            omega0: 2.0,
            beta: 1.6,
            omega: 3.0,
            t_total: 2.0,
            n_grid: 601,
            orders: (0..=12).collect(),
        }
    }
}

impl RabiParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("omega0", self.omega0),
            ("omega", self.omega),
            ("t_total", self.t_total),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!(
                    "{name} must be positive and finite (got {v})"
                )));
            }
        }
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(Error::Config(format!(
                "beta must be non-negative (got {})",
                self.beta
            )));
        }
        if self.orders.is_empty() {
            return Err(Error::Config("orders must not be empty".into()));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<TimeGrid> {
        self.validate()?;
        TimeGrid::new(self.t_total, self.n_grid)
    }

    /// Parameters of the generator `λ A(t)`: both amplitudes scale, the drive frequency does not.
    pub fn scaled(&self, lambda: f64) -> Self {
        Self {
            omega0: self.omega0 * lambda,
            beta: self.beta * lambda,
            ..self.clone()
        }
    }

    /// `φ(t) = (2β/ω) sin(ωt)`, the phase of the drive-part evolution.
    pub fn phase(&self, t: f64) -> f64 {
        2.0 * self.beta / self.omega * (self.omega * t).sin()
    }

    pub fn h0(&self) -> Mat {
        sigma_z() * C64::from(0.5 * self.omega0)
    }

    pub fn h1(&self, t: f64) -> Mat {
        sigma_x() * C64::from(2.0 * self.beta * (self.omega * t).cos())
    }

    pub fn hamiltonian(&self, t: f64) -> Mat {
        self.h0() + self.h1(t)
    }

    /// `A(t) = -i H(t)`.
    pub fn generator(&self, t: f64) -> Mat {
        self.hamiltonian(t) * -I
    }

    /// `U_0(t) = diag(e^{-iω0 t/2}, e^{iω0 t/2})`.
    pub fn u0(&self, t: f64) -> Mat {
        let z = (-I * (0.5 * self.omega0 * t)).exp();
        Mat::from_row_slice(2, 2, &[z, C64::ZERO, C64::ZERO, z.conj()])
    }

    /// `U_1(t) = exp(-i φ(t) σx) = cos φ I - i sin φ σx`.
    pub fn u1(&self, t: f64) -> Mat {
        let p = self.phase(t);
        Mat::identity(2, 2) * C64::from(p.cos()) - sigma_x() * (I * p.sin())
    }
}

fn sampled(grid: &TimeGrid, f: impl Fn(f64) -> Mat) -> Vec<Mat> {
    grid.nodes().iter().map(|&t| f(t)).collect()
}

fn two_parts(p: &RabiParams, grid: &TimeGrid) -> Result<Vec<Generator>> {
    let h0 = p.h0();
    Ok(vec![
        Generator::sample(grid, |_| &h0 * -I)?,
        Generator::sample(grid, |t| p.h1(t) * -I)?,
    ])
}

/// Two-part split with closed-form part evolutions and Green's kernels.
pub fn rabi_split(p: &RabiParams) -> Result<SplitGenerator> {
    let grid = p.grid()?;
    let parts = two_parts(p, &grid)?;
    let evolutions = vec![sampled(&grid, |t| p.u0(t)), sampled(&grid, |t| p.u1(t))];
    SplitGenerator::closed_form(parts, evolutions, true)
}

/// Two-part split with part evolutions from discrete resolvents.
pub fn rabi_split_computed(p: &RabiParams) -> Result<SplitGenerator> {
    let grid = p.grid()?;
    SplitGenerator::computed(two_parts(p, &grid)?)
}

pub fn rabi_split_with(p: &RabiParams, source: PartSource) -> Result<SplitGenerator> {
    match source {
        PartSource::ClosedForm => rabi_split(p),
        PartSource::Computed => rabi_split_computed(p),
    }
}

/// Three parts `(ω0/2) σz`, `β cos(ωt) σx`, `β cos(ωt) σx`, each with a closed-form evolution.
pub fn rabi_three_part_split(p: &RabiParams) -> Result<SplitGenerator> {
    rabi_three_part_split_with(p, PartSource::ClosedForm)
}

pub fn rabi_three_part_split_with(p: &RabiParams, source: PartSource) -> Result<SplitGenerator> {
    let grid = p.grid()?;
    let h0 = p.h0();
    let half = |t: f64| p.h1(t) * C64::from(0.5);
    let u_half = |t: f64| {
        let q = 0.5 * p.phase(t);
        Mat::identity(2, 2) * C64::from(q.cos()) - sigma_x() * (I * q.sin())
    };
    let parts = vec![
        Generator::sample(&grid, |_| &h0 * -I)?,
        Generator::sample(&grid, |t| half(t) * -I)?,
        Generator::sample(&grid, |t| half(t) * -I)?,
    ];
    if source == PartSource::Computed {
        return SplitGenerator::computed(parts);
    }
    let evolutions = vec![
        sampled(&grid, |t| p.u0(t)),
        sampled(&grid, u_half),
        sampled(&grid, u_half),
    ];
    SplitGenerator::closed_form(parts, evolutions, true)
}

/// Closed-form transformed Hamiltonian `U_i^† H U_i` for `which` in `{0, 1}`.
pub fn h_std(p: &RabiParams, which: usize, t: f64) -> Result<Mat> {
    let drive = 2.0 * p.beta * (p.omega * t).cos();
    let half = 0.5 * p.omega0;
    match which {
        0 => {
            let e = (I * (p.omega0 * t)).exp();
            Ok(Mat::from_row_slice(
                2,
                2,
                &[
                    C64::from(half),
                    e * drive,
                    e.conj() * drive,
                    C64::from(-half),
                ],
            ))
        }
        1 => {
            let a = 2.0 * p.phase(t);
            Ok(sigma_x() * C64::from(drive)
                + sigma_y() * C64::from(half * a.sin())
                + sigma_z() * C64::from(half * a.cos()))
        }
        _ => Err(Error::Argument(format!(
            "frame index must be 0 or 1 (got {which})"
        ))),
    }
}

/// How the cumulative integrals behind `S` and `C` are summed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SumRule {
    /// Composite trapezoid; matches the quadrature used by the generic frame pipeline.
    Trapezoid,
    /// Trapezoid with the `-h^2/12 [f']` endpoint correction, fourth order for smooth integrands.
    EndCorrected,
}

/// `S(t,s) = e^{iω0 s/2} ∫_s^t e^{-iω0 τ/2} sin φ(τ) dτ` and `C` (with `cos φ`), for all `i >= j`.
///
/// Stored as prefix sums, so each entry costs `O(1)`.
#[derive(Debug, Clone)]
pub struct SCIntegrals {
    grid: TimeGrid,
    omega0: f64,
    s_prefix: Vec<C64>,
    c_prefix: Vec<C64>,
}

impl SCIntegrals {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    fn entry(&self, prefix: &[C64], i: usize, j: usize) -> C64 {
        assert!(i >= j, "S and C are defined for t >= s only");
        (I * (0.5 * self.omega0 * self.grid.node(j))).exp() * (prefix[i] - prefix[j])
    }

    pub fn s(&self, i: usize, j: usize) -> C64 {
        self.entry(&self.s_prefix, i, j)
    }

    pub fn c(&self, i: usize, j: usize) -> C64 {
        self.entry(&self.c_prefix, i, j)
    }

    pub fn s_bar(&self, i: usize, j: usize) -> C64 {
        self.s(i, j).conj()
    }

    pub fn c_bar(&self, i: usize, j: usize) -> C64 {
        self.c(i, j).conj()
    }
}

pub fn sc_integrals(p: &RabiParams, grid: &TimeGrid) -> SCIntegrals {
    sc_integrals_with(p, grid, SumRule::Trapezoid)
}

pub fn sc_integrals_with(p: &RabiParams, grid: &TimeGrid, rule: SumRule) -> SCIntegrals {
    let w0 = p.omega0;
    let rot = |t: f64| (-I * (0.5 * w0 * t)).exp();
    let f_s = |t: f64| rot(t) * p.phase(t).sin();
    let f_c = |t: f64| rot(t) * p.phase(t).cos();
    // derivatives for the endpoint correction
    let dphi = |t: f64| 2.0 * p.beta * (p.omega * t).cos();
    let df_s = |t: f64| rot(t) * (-0.5 * I * w0 * p.phase(t).sin() + dphi(t) * p.phase(t).cos());
    let df_c = |t: f64| rot(t) * (-0.5 * I * w0 * p.phase(t).cos() - dphi(t) * p.phase(t).sin());
    let h = grid.step();
    let prefix = |f: &dyn Fn(f64) -> C64, df: &dyn Fn(f64) -> C64| {
        let nodes = grid.nodes();
        let vals: Vec<C64> = nodes.iter().map(|&t| f(t)).collect();
        let mut out = Vec::with_capacity(nodes.len());
        let mut acc = C64::ZERO;
        out.push(acc);
        for k in 1..nodes.len() {
            acc += (vals[k - 1] + vals[k]) * (0.5 * h);
            out.push(acc);
        }
        if rule == SumRule::EndCorrected {
            // the correction telescopes, so it can be folded into each prefix value
            let d0 = df(nodes[0]);
            for (o, &t) in out.iter_mut().zip(nodes) {
                *o -= (df(t) - d0) * (h * h / 12.0);
            }
        }
        out
    };
    SCIntegrals {
        grid: grid.clone(),
        omega0: w0,
        s_prefix: prefix(&f_s, &df_s),
        c_prefix: prefix(&f_c, &df_c),
    }
}

/// Closed-form biframe kernel of the `A = -iH` split:
///
/// ```text
/// ℬ(t,s) = βω0 cos(ωt) cos φ(t) [[-iS, C̄], [-C, iS̄]] + βω0 cos(ωt) sin φ(t) [[iC, S̄], [-S, -iC̄]]
/// ```
pub fn biframe_closed_form(p: &RabiParams, grid: &TimeGrid) -> BiframeOperator {
    biframe_from_sc(p, &sc_integrals(p, grid))
}

pub fn biframe_from_sc(p: &RabiParams, sc: &SCIntegrals) -> BiframeOperator {
    let grid = sc.grid();
    let kernel = BlockTriangle::from_fn(grid.len(), 2, |i, j| {
        let t = grid.node(i);
        let k = p.beta * p.omega0 * (p.omega * t).cos();
        let (cw, sw) = (k * p.phase(t).cos(), k * p.phase(t).sin());
        let (s, c) = (sc.s(i, j), sc.c(i, j));
        let (sb, cb) = (s.conj(), c.conj());
        Mat::from_row_slice(
            2,
            2,
            &[
                -I * s * cw + I * c * sw,
                cb * cw + sb * sw,
                -c * cw - s * sw,
                I * sb * cw - I * cb * sw,
            ],
        )
    });
    BiframeOperator::from_triangle(grid, kernel)
}

/// Reference solution of the full Rabi generator on the run grid.
pub fn rabi_reference(p: &RabiParams, substeps: usize) -> Result<ReferenceSolution> {
    rk_reference(|t| p.generator(t), &p.grid()?, substeps)
}

/// One point of a convergence curve.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRecord {
    pub frame: String,
    pub m: usize,
    pub epsilon: f64,
}

impl ConvergenceRecord {
    pub fn log10_epsilon(&self) -> f64 {
        self.epsilon.log10()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Figure1Options {
    pub frames: Vec<Frame>,
    pub parts: PartSource,
    pub route: KernelRoute,
    pub substeps: usize,
}

impl Default for Figure1Options {
    fn default() -> Self {
        Self {
            frames: figure1_frames(false),
            parts: PartSource::ClosedForm,
            route: KernelRoute::Quadrature,
            substeps: 20,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Figure1Report {
    pub records: Vec<ConvergenceRecord>,
    /// `ε` of the untruncated frame result, per frame tag.
    pub floors: Vec<(String, f64)>,
    pub reference_error: f64,
}

impl Figure1Report {
    pub fn epsilon(&self, frame: &str, m: usize) -> Option<f64> {
        self.records
            .iter()
            .find(|r| r.frame == frame && r.m == m)
            .map(|r| r.epsilon)
    }

    pub fn floor(&self, frame: &str) -> Option<f64> {
        self.floors
            .iter()
            .find(|(f, _)| f == frame)
            .map(|(_, e)| *e)
    }

    /// Largest floor over all frames.
    pub fn worst_floor(&self) -> f64 {
        self.floors.iter().map(|(_, e)| *e).fold(0.0, f64::max)
    }
}

/// Lab, standard (moving with `U_1`), optionally standard moving with `U_0`, biframe.
pub fn figure1_frames(include_std0: bool) -> Vec<Frame> {
    let mut frames = vec![Frame::Lab, Frame::Std { frame_part: 1 }];
    if include_std0 {
        frames.push(Frame::Std { frame_part: 0 });
    }
    frames.push(Frame::Biframe);
    frames
}

/// Truncated Dyson approximants in each frame scored against the RK reference.
pub fn figure1_report(p: &RabiParams, opts: &Figure1Options) -> Result<Figure1Report> {
    let split = rabi_split_with(p, opts.parts)?;
    let reference = rabi_reference(p, opts.substeps)?;
    let mut records = Vec::new();
    let mut floors = Vec::new();
    for &frame in &opts.frames {
        let tables = dyson_series(&split, frame, &p.orders, opts.route)?;
        for (table, &m) in tables.iter().zip(&p.orders) {
            records.push(ConvergenceRecord {
                frame: frame.tag().to_string(),
                m,
                epsilon: epsilon_error(&reference, table)?,
            });
        }
        let limit = dyson_limit(&split, frame, opts.route)?;
        floors.push((frame.tag().to_string(), epsilon_error(&reference, &limit)?));
    }
    records.sort_by(|a, b| a.frame.cmp(&b.frame).then(a.m.cmp(&b.m)));
    Ok(Figure1Report {
        records,
        floors,
        reference_error: reference.est_error,
    })
}

pub fn run_figure1(p: &RabiParams) -> Result<Vec<ConvergenceRecord>> {
    figure1_report(p, &Figure1Options::default()).map(|r| r.records)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_scaled_ratios() {
        let p = RabiParams::default();
        assert!((p.omega * p.t_total - 6.0).abs() < 1e-15);
        assert!((p.omega0 / p.omega - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(p.orders.len(), 13);
    }

    #[test]
    fn invalid_params_rejected() {
        let p = RabiParams {
            omega: 0.0,
            ..Default::default()
        };
        assert!(matches!(p.validate(), Err(Error::Config(_))));
        let p = RabiParams {
            orders: vec![],
            ..Default::default()
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn generator_at_zero() {
        let p = RabiParams::default();
        let want = (p.h0() + sigma_x() * C64::from(2.0 * p.beta)) * -I;
        assert!((p.generator(0.0) - want).norm() < 1e-15);
    }

    #[test]
    fn h_std_at_zero() {
        let p = RabiParams::default();
        let want = sigma_x() * C64::from(2.0 * p.beta) + p.h0();
        assert!((h_std(&p, 1, 0.0).unwrap() - want).norm() < 1e-15);
        assert!(h_std(&p, 2, 0.0).is_err());
        for t in [0.1, 0.7, 1.9] {
            let h = h_std(&p, 0, t).unwrap();
            assert_eq!(h[(0, 0)], C64::from(1.0));
            assert_eq!(h[(1, 1)], C64::from(-1.0));
        }
    }

    #[test]
    fn sc_diagonal_vanishes() {
        let p = RabiParams {
            n_grid: 41,
            ..Default::default()
        };
        let sc = sc_integrals(&p, &p.grid().unwrap());
        for i in 0..41 {
            assert_eq!(sc.s(i, i), C64::ZERO);
            assert_eq!(sc.c(i, i), C64::ZERO);
        }
    }

    #[test]
    fn zero_drive_kills_biframe_kernel() {
        let p = RabiParams {
            beta: 0.0,
            n_grid: 31,
            ..Default::default()
        };
        let b = biframe_closed_form(&p, &p.grid().unwrap());
        assert!(b.to_element().theta_part().is_zero());
    }
}
