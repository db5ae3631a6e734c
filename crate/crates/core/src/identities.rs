//! Resolvent identities behind the frame changes, checked on plain matrices.
//!
//! With `R = (I - M)^{-1}`, `M = M_0 + M_1 (+ M_2)` and `R_i = (I - M_i)^{-1}`:
//!
//! ```text
//! simple     R = R_1 (I - M_0 R_1)^{-1}
//! symmetric  R = R_0 (I - M_1 R_1 M_0 R_0)^{-1} R_1
//! square     R = (I + M) (I - M^2)^{-1}
//! cube       R = (I + M + M^2) (I - M^3)^{-1}
//! ```

use std::cell::Cell;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::{Mat, C64};

/// Squarings used for spectral radius estimates (`ρ ≈ ‖M^{2^k}‖^{2^{-k}}`).
pub const SQUARINGS: usize = 60;

/// Scale factors used for order fits.
pub const LAMBDAS: [f64; 3] = [0.5, 0.25, 0.125];

/// Two or three parts whose sum has spectral radius `rho < 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractionPair {
    pub dim: usize,
    pub parts: Vec<Mat>,
    pub rho: f64,
}

impl ContractionPair {
    pub fn new(parts: Vec<Mat>) -> Result<Self> {
        let dim = parts.first().map_or(0, |m| m.nrows());
        if dim == 0 || parts.iter().any(|m| m.nrows() != dim || m.ncols() != dim) {
            return Err(Error::Dimension(
                "parts must be square and of equal size".into(),
            ));
        }
        let rho = spectral_radius(&sum(&parts));
        Ok(Self { dim, parts, rho })
    }

    pub fn m0(&self) -> &Mat {
        &self.parts[0]
    }

    pub fn m1(&self) -> &Mat {
        &self.parts[1]
    }

    pub fn m2(&self) -> Option<&Mat> {
        self.parts.get(2)
    }

    pub fn sum(&self) -> Mat {
        sum(&self.parts)
    }

    /// Every part multiplied by `lambda`.
    pub fn scaled(&self, lambda: f64) -> Self {
        Self {
            dim: self.dim,
            parts: self.parts.iter().map(|m| m * C64::from(lambda)).collect(),
            rho: self.rho * lambda,
        }
    }

    /// Same parts in the given order.
    pub fn permuted(&self, order: &[usize]) -> Self {
        Self {
            dim: self.dim,
            parts: order.iter().map(|&k| self.parts[k].clone()).collect(),
            rho: self.rho,
        }
    }

    fn require(&self, n: usize) -> Result<()> {
        if self.parts.len() < n {
            return Err(Error::Argument(format!(
                "check needs {n} parts (got {})",
                self.parts.len()
            )));
        }
        Ok(())
    }
}

fn sum(parts: &[Mat]) -> Mat {
    parts
        .iter()
        .skip(1)
        .fold(parts[0].clone(), |acc, m| acc + m)
}

fn eye(d: usize) -> Mat {
    Mat::identity(d, d)
}

/// Spectral radius from Gelfand's formula `ρ = lim ‖M^k‖^{1/k}` at `k = 2^SQUARINGS`,
/// reached by repeated normalized squaring.
///
/// Deterministic and homogeneous of degree one in `m`. Unlike vector power iteration it
/// does not stall when the leading eigenvalues are close in modulus.
pub fn spectral_radius(m: &Mat) -> f64 {
    let n0 = m.norm();
    if n0 == 0.0 {
        return 0.0;
    }
    let mut b = m / C64::from(n0);
    // log ‖M^{2^j}‖ = 2^j * log_rate
    let mut log_rate = n0.ln();
    let mut weight = 1.0;
    for _ in 0..SQUARINGS {
        b = &b * &b;
        let n = b.norm();
        if n == 0.0 {
            return 0.0;
        }
        b /= C64::from(n);
        weight *= 0.5;
        log_rate += weight * n.ln();
    }
    log_rate.exp()
}

/// Seeded parts with independent complex normal entries, jointly rescaled so that the
/// estimated spectral radius of their sum equals `target_rho`.
pub fn random_contraction(
    seed: u64,
    dim: usize,
    parts: usize,
    target_rho: f64,
) -> Result<ContractionPair> {
    if !(target_rho > 0.0 && target_rho < 1.0) {
        return Err(Error::Argument(format!(
            "target_rho must lie in (0, 1) (got {target_rho})"
        )));
    }
    if dim == 0 {
        return Err(Error::Argument("dim must be at least 1".into()));
    }
    if !(2..=3).contains(&parts) {
        return Err(Error::Argument(format!(
            "parts must be 2 or 3 (got {parts})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        C64::new(re, im)
    };
    let mut mats: Vec<Mat> = (0..parts)
        .map(|_| Mat::from_fn(dim, dim, |_, _| draw()))
        .collect();
    let rho = spectral_radius(&sum(&mats));
    if rho == 0.0 {
        return Err(Error::Singular("sampled sum is nilpotent".into()));
    }
    let scale = C64::from(target_rho / rho);
    for m in &mut mats {
        *m *= scale;
    }
    let rho = spectral_radius(&sum(&mats));
    Ok(ContractionPair {
        dim,
        parts: mats,
        rho,
    })
}

fn condition_estimate(m: &Mat) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    max / min
}

/// `(I - m)^{-1}`, failing with a condition estimate when singular.
pub fn resolvent(m: &Mat) -> Result<Mat> {
    let a = eye(m.nrows()) - m;
    let cond = condition_estimate(&a);
    if !cond.is_finite() || cond > 1e14 {
        return Err(Error::Singular(format!(
            "I - M is singular (condition estimate {cond:e})"
        )));
    }
    a.try_inverse()
        .ok_or_else(|| Error::Singular(format!("I - M is singular (condition estimate {cond:e})")))
}

fn relative(lhs: &Mat, rhs: &Mat) -> f64 {
    let scale = lhs.norm();
    let diff = (lhs - rhs).norm();
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

/// `‖R - R_1 (I - M_0 R_1)^{-1}‖_F / ‖R‖_F`.
pub fn check_simple_split(pair: &ContractionPair) -> Result<f64> {
    pair.require(2)?;
    let r = resolvent(&(pair.m0() + pair.m1()))?;
    let r1 = resolvent(pair.m1())?;
    let rhs = &r1 * resolvent(&(pair.m0() * &r1))?;
    Ok(relative(&r, &rhs))
}

fn symmetric_rhs(m0: &Mat, m1: &Mat) -> Result<Mat> {
    let r0 = resolvent(m0)?;
    let r1 = resolvent(m1)?;
    Ok(&r0 * resolvent(&(m1 * &r1 * m0 * &r0))? * r1)
}

/// `‖R - R_0 (I - M_1 R_1 M_0 R_0)^{-1} R_1‖_F / ‖R‖_F`.
pub fn check_symmetric_split(pair: &ContractionPair) -> Result<f64> {
    pair.require(2)?;
    let r = resolvent(&(pair.m0() + pair.m1()))?;
    Ok(relative(&r, &symmetric_rhs(pair.m0(), pair.m1())?))
}

/// Three-part formula:
/// `R_0 (I - M_1R_1M_0R_0)^{-1} R_1 (I - M_2R_2 (M_0R_0 (I - M_1R_1M_0R_0)^{-1} R_1
///  + M_1R_1 (I - M_0R_0M_1R_1)^{-1} R_0))^{-1} R_2`.
pub fn triframe_rhs(pair: &ContractionPair) -> Result<Mat> {
    pair.require(3)?;
    let m2 = pair.m2().expect("three parts checked");
    let r: Vec<Mat> = pair.parts.iter().map(resolvent).collect::<Result<_>>()?;
    let d: Vec<Mat> = pair.parts.iter().zip(&r).map(|(m, r)| m * r).collect();
    let inner10 = resolvent(&(&d[1] * &d[0]))?;
    let inner01 = resolvent(&(&d[0] * &d[1]))?;
    let left = &inner10 * &r[1];
    let coupling = m2 * &r[2] * (&d[0] * &left + &d[1] * &inner01 * &r[0]);
    Ok(&r[0] * left * resolvent(&coupling)? * &r[2])
}

pub fn check_triframe_identity(pair: &ContractionPair) -> Result<f64> {
    let r = resolvent(&pair.sum())?;
    Ok(relative(&r, &triframe_rhs(pair)?))
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    num / den
}

/// `Σ_{k<=m} x^k` by repeated multiplication.
fn power_sum(x: &Mat, m: usize) -> Mat {
    let d = x.nrows();
    let mut term = eye(d);
    let mut acc = eye(d);
    for _ in 0..m {
        term = &term * x;
        acc += &term;
    }
    acc
}

/// Outcome of an order-matching check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderCheck {
    /// Residual of the exact (untruncated) identity.
    pub identity_residual: f64,
    /// Residual of the polynomial identity against the truncated Neumann series.
    pub polynomial_residual: f64,
    /// Fitted exponent of `‖R^[m](λM) - R(λM)‖` over [`LAMBDAS`].
    pub slope: f64,
}

fn order_check(m_mat: &Mat, m: usize, power: usize) -> Result<OrderCheck> {
    // prefix = I + M + ... + M^{power-1}
    let prefix = |x: &Mat| power_sum(x, power - 1);
    let truncated = |x: &Mat| prefix(x) * power_sum(&x.pow(power as u32), m);
    let r = resolvent(m_mat)?;
    let exact = prefix(m_mat) * resolvent(&m_mat.pow(power as u32))?;
    let identity_residual = relative(&r, &exact);
    let neumann = power_sum(m_mat, power * m + power - 1);
    let polynomial_residual = relative(&neumann, &truncated(m_mat));
    let errs: Vec<f64> = LAMBDAS
        .iter()
        .map(|&l| {
            let x = m_mat * C64::from(l);
            Ok((truncated(&x) - resolvent(&x)?).norm())
        })
        .collect::<Result<_>>()?;
    let slope = if errs.iter().all(|e| *e > 0.0) {
        loglog_slope(&LAMBDAS, &errs)
    } else {
        f64::NAN
    };
    Ok(OrderCheck {
        identity_residual,
        polynomial_residual,
        slope,
    })
}

/// `R^[m] = (I + M) Σ_{k<=m} M^{2k}`: exact identity, polynomial match with
/// `Σ_{k<=2m+1} M^k`, and the order `2m+2` of the remainder.
pub fn check_square_trick(m_mat: &Mat, m: usize) -> Result<OrderCheck> {
    order_check(m_mat, m, 2)
}

/// `R^[m] = (I + M + M^2) Σ_{k<=m} M^{3k}`: polynomial match through order `3m+2`,
/// remainder of order `3m+3`.
pub fn check_cube_trick(m_mat: &Mat, m: usize) -> Result<OrderCheck> {
    order_check(m_mat, m, 3)
}

/// Counts matrix-matrix products.
#[derive(Debug, Default)]
pub struct ProductCounter(Cell<usize>);

impl ProductCounter {
    pub fn mul(&self, a: &Mat, b: &Mat) -> Mat {
        self.0.set(self.0.get() + 1);
        a * b
    }

    pub fn count(&self) -> usize {
        self.0.get()
    }
}

/// Part-level quantities computed once per pair, independent of the truncation order.
#[derive(Debug, Clone)]
pub struct PartResolvents {
    pub r0: Mat,
    pub r1: Mat,
    /// `M_1 R_1 M_0 R_0`
    pub driver: Mat,
}

impl PartResolvents {
    pub fn new(pair: &ContractionPair) -> Result<Self> {
        pair.require(2)?;
        let r0 = resolvent(pair.m0())?;
        let r1 = resolvent(pair.m1())?;
        let driver = pair.m1() * &r1 * pair.m0() * &r0;
        Ok(Self { r0, r1, driver })
    }
}

/// `R^[m] = R_0 Σ_{k<=m} (M_1 R_1 M_0 R_0)^k R_1`; the counter sees the `m + 1`
/// products spent beyond the part resolvents.
pub fn accelerated_from_parts(parts: &PartResolvents, m: usize, counter: &ProductCounter) -> Mat {
    if m == 0 {
        return counter.mul(&parts.r0, &parts.r1);
    }
    let d = parts.r0.nrows();
    // Horner: S = I + X (I + X (... (I + X)))
    let mut s = eye(d) + &parts.driver;
    for _ in 1..m {
        s = eye(d) + counter.mul(&parts.driver, &s);
    }
    let left = counter.mul(&parts.r0, &s);
    counter.mul(&left, &parts.r1)
}

pub fn accelerated_partial_sum(pair: &ContractionPair, m: usize) -> Result<Mat> {
    let parts = PartResolvents::new(pair)?;
    Ok(accelerated_from_parts(
        &parts,
        m,
        &ProductCounter::default(),
    ))
}

/// Fitted exponent of `‖R^[m](λ) - Σ_{k<=2m+1} (λM)^k‖` over [`LAMBDAS`].
pub fn accelerated_slope(pair: &ContractionPair, m: usize) -> Result<f64> {
    let errs: Vec<f64> = LAMBDAS
        .iter()
        .map(|&l| {
            let p = pair.scaled(l);
            let acc = accelerated_partial_sum(&p, m)?;
            Ok((acc - power_sum(&p.sum(), 2 * m + 1)).norm())
        })
        .collect::<Result<_>>()?;
    Ok(loglog_slope(&LAMBDAS, &errs))
}

/// Trial grid for the identity suite.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub seed: u64,
    pub trials: usize,
    pub dims: Vec<usize>,
    pub rhos: Vec<f64>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 20240601,
            trials: 100,
            dims: vec![2, 4, 8],
            rhos: vec![0.5, 0.9],
        }
    }
}

/// Tolerance on every identity residual.
pub const RESIDUAL_TOL: f64 = 1e-11;
/// Tolerance on polynomial identity residuals.
pub const POLYNOMIAL_TOL: f64 = 1e-13;
/// Allowed deviation of a fitted order from its target.
pub const SLOPE_TOL: f64 = 0.2;

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteRow {
    pub check: String,
    pub seed: u64,
    pub dim: usize,
    pub rho: f64,
    pub residual: f64,
    pub slope: Option<f64>,
    pub pass: bool,
}

fn trial_seed(base: u64, dim: usize, rho: f64, trial: usize) -> u64 {
    // distinct, reproducible stream per cell of the trial grid
    base.wrapping_mul(1_000_003)
        .wrapping_add((dim as u64) << 40)
        .wrapping_add(((rho * 1e6).round() as u64) << 20)
        .wrapping_add(trial as u64)
}

fn row(check: &str, seed: u64, pair: &ContractionPair, residual: Result<f64>) -> SuiteRow {
    let residual = residual.unwrap_or(f64::INFINITY);
    SuiteRow {
        check: check.to_string(),
        seed,
        dim: pair.dim,
        rho: pair.rho,
        residual,
        slope: None,
        pass: residual <= RESIDUAL_TOL,
    }
}

/// Identity residuals for every trial; rows appear in trial-grid order.
pub fn run_identity_suite(cfg: &SuiteConfig) -> Result<Vec<SuiteRow>> {
    use rayon::prelude::*;
    let mut jobs = Vec::new();
    for &dim in &cfg.dims {
        for &rho in &cfg.rhos {
            for trial in 0..cfg.trials {
                jobs.push((trial_seed(cfg.seed, dim, rho, trial), dim, rho));
            }
        }
    }
    let rows: Vec<Vec<SuiteRow>> = jobs
        .par_iter()
        .map(|&(seed, dim, rho)| {
            let pair = random_contraction(seed, dim, 2, rho)?;
            let triple = random_contraction(seed, dim, 3, rho)?;
            Ok(vec![
                row("simple_split", seed, &pair, check_simple_split(&pair)),
                row("symmetric_split", seed, &pair, check_symmetric_split(&pair)),
                row("triframe", seed, &triple, check_triframe_identity(&triple)),
            ])
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().flatten().collect())
}
