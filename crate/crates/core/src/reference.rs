//! RK4 reference propagator and the overlap error metric.

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::star::EvolutionTable;
use crate::{Mat, C64};

/// Richardson estimates above this are flagged.
pub const WARN_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceStatus {
    Converged,
    /// The a posteriori estimate exceeded [`WARN_THRESHOLD`].
    Warning,
}

#[derive(Debug, Clone)]
pub struct ReferenceSolution {
    pub grid: TimeGrid,
    pub u_ref: Vec<Mat>,
    /// Richardson estimate of the largest Frobenius error over the grid.
    pub est_error: f64,
    pub status: ReferenceStatus,
}

impl ReferenceSolution {
    pub fn as_table(&self) -> EvolutionTable {
        EvolutionTable::from_univariate(&self.grid, &self.u_ref).expect("one sample per node")
    }

    /// `max_i ||U_r(t_i)^† U_r(t_i) - I||_F`.
    pub fn unitarity_defect(&self) -> f64 {
        self.u_ref
            .iter()
            .map(|u| {
                let d = u.nrows();
                (u.adjoint() * u - Mat::identity(d, d)).norm()
            })
            .fold(0.0, f64::max)
    }
}

fn rk4_step<F: Fn(f64) -> Mat>(f: &F, t: f64, dt: f64, u: &Mat) -> Mat {
    let a0 = f(t);
    let am = f(t + 0.5 * dt);
    let a1 = f(t + dt);
    let k1 = &a0 * u;
    let k2 = &am * (u + &k1 * C64::from(0.5 * dt));
    let k3 = &am * (u + &k2 * C64::from(0.5 * dt));
    let k4 = &a1 * (u + &k3 * C64::from(dt));
    u + (k1 + (k2 + k3) * C64::from(2.0) + k4) * C64::from(dt / 6.0)
}

/// `U(t_i)` at every node from classical RK4 with `substeps` equal steps per interval.
pub fn rk4_propagate<F: Fn(f64) -> Mat>(
    f: &F,
    grid: &TimeGrid,
    d: usize,
    substeps: usize,
) -> Vec<Mat> {
    let mut u = Mat::identity(d, d);
    let mut out = Vec::with_capacity(grid.len());
    out.push(u.clone());
    for w in grid.nodes().windows(2) {
        let dt = (w[1] - w[0]) / substeps as f64;
        for s in 0..substeps {
            u = rk4_step(f, w[0] + s as f64 * dt, dt, &u);
        }
        out.push(u.clone());
    }
    out
}

/// Reference evolution of `dU/dt = A(t) U`, `U(t_0) = I`, with `A` evaluated at arbitrary
/// times. The returned samples come from the run with `2 * substeps`; the error estimate is
/// the Richardson difference to the `substeps` run divided by 15.
pub fn rk_reference<F: Fn(f64) -> Mat>(
    f: F,
    grid: &TimeGrid,
    substeps: usize,
) -> Result<ReferenceSolution> {
    if substeps == 0 {
        return Err(Error::Argument("substeps must be at least 1".into()));
    }
    let d = f(grid.t_start()).nrows();
    let coarse = rk4_propagate(&f, grid, d, substeps);
    let fine = rk4_propagate(&f, grid, d, 2 * substeps);
    let est_error = coarse
        .iter()
        .zip(&fine)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
        / 15.0;
    let status = if est_error > WARN_THRESHOLD || !est_error.is_finite() {
        ReferenceStatus::Warning
    } else {
        ReferenceStatus::Converged
    };
    Ok(ReferenceSolution {
        grid: grid.clone(),
        u_ref: fine,
        est_error,
        status,
    })
}

/// The error functional together with the integrated imaginary part of the trace ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonReport {
    pub epsilon: f64,
    pub imaginary: f64,
}

/// `(1/T) ∫ [1 - Re Tr(U_r^† U) / sqrt(Tr(U_r^† U_r) Tr(U^† U))] dτ` by composite trapezoid.
pub fn epsilon_report(
    reference: &ReferenceSolution,
    test: &EvolutionTable,
) -> Result<EpsilonReport> {
    let grid = &reference.grid;
    if !grid.compatible(test.grid()) {
        return Err(Error::Dimension("reference and test grids differ".into()));
    }
    let n = grid.len();
    let mut re = Vec::with_capacity(n);
    let mut im = Vec::with_capacity(n);
    for (i, ur) in reference.u_ref.iter().enumerate() {
        let u = test.u(i);
        let nr = ur.norm_squared();
        let nu = u.norm_squared();
        if nu == 0.0 || nr == 0.0 {
            return Err(Error::UndefinedMetric(format!(
                "zero Frobenius norm at node {i}"
            )));
        }
        let ratio = (ur.adjoint() * &u).trace() / (nr * nu).sqrt();
        re.push(1.0 - ratio.re);
        im.push(ratio.im);
    }
    let h = grid.step();
    let trap = |v: &[f64]| {
        let inner: f64 = v[1..n - 1].iter().sum();
        h * (inner + 0.5 * (v[0] + v[n - 1])) / grid.span()
    };
    Ok(EpsilonReport {
        epsilon: trap(&re),
        imaginary: trap(&im),
    })
}

/// `ε` with the univariate samples of `reference` standing in for the reference solution.
pub fn epsilon_between(reference: &EvolutionTable, test: &EvolutionTable) -> Result<f64> {
    let r = ReferenceSolution {
        grid: reference.grid().clone(),
        u_ref: reference.univariate(),
        est_error: 0.0,
        status: ReferenceStatus::Converged,
    };
    epsilon_error(&r, test)
}

pub fn epsilon_error(reference: &ReferenceSolution, test: &EvolutionTable) -> Result<f64> {
    epsilon_report(reference, test).map(|r| r.epsilon)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_generator_is_identity() {
        let grid = TimeGrid::new(1.0, 11).unwrap();
        let r = rk_reference(|_| Mat::zeros(2, 2), &grid, 3).unwrap();
        assert!(r.u_ref.iter().all(|u| *u == Mat::identity(2, 2)));
        assert_eq!(r.est_error, 0.0);
        assert_eq!(r.status, ReferenceStatus::Converged);
    }

    #[test]
    fn scalar_phase() {
        let grid = TimeGrid::new(1.0, 101).unwrap();
        let r = rk_reference(|_| Mat::from_element(1, 1, C64::new(0.0, -0.5)), &grid, 20).unwrap();
        for (t, u) in grid.nodes().iter().zip(&r.u_ref) {
            assert!((u[(0, 0)] - C64::new(0.0, -0.5 * t).exp()).norm() < 1e-12);
        }
        assert!(r.est_error <= 1e-12);
    }

    #[test]
    fn zero_substeps_rejected() {
        let grid = TimeGrid::new(1.0, 3).unwrap();
        assert!(rk_reference(|_| Mat::zeros(1, 1), &grid, 0).is_err());
    }

    #[test]
    fn epsilon_of_self_and_phase_flip() {
        let grid = TimeGrid::new(2.0, 51).unwrap();
        let r = rk_reference(
            |t| {
                Mat::from_row_slice(
                    2,
                    2,
                    &[
                        C64::new(0.0, -1.0),
                        C64::new(0.0, -t),
                        C64::new(0.0, -t),
                        C64::new(0.0, 1.0),
                    ],
                )
            },
            &grid,
            4,
        )
        .unwrap();
        let same = r.as_table();
        assert!(epsilon_error(&r, &same).unwrap().abs() < 1e-12);
        let flipped: Vec<Mat> = r.u_ref.iter().map(|u| -u).collect();
        let flipped = EvolutionTable::from_univariate(&grid, &flipped).unwrap();
        assert!((epsilon_error(&r, &flipped).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_test_matrix_is_undefined() {
        let grid = TimeGrid::new(1.0, 3).unwrap();
        let r = rk_reference(|_| Mat::zeros(2, 2), &grid, 1).unwrap();
        let z = EvolutionTable::from_univariate(&grid, &vec![Mat::zeros(2, 2); 3]).unwrap();
        assert!(matches!(
            epsilon_error(&r, &z),
            Err(Error::UndefinedMetric(_))
        ));
    }
}
