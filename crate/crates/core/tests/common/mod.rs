//! Test-only oracles, independent of the trapezoid code paths under test.
#![allow(dead_code)]

use starframe::{Mat, TimeGrid, C64};

fn simpson(a: f64, b: f64, fa: C64, fm: C64, fb: C64) -> C64 {
    (fa + fm * 4.0 + fb) * ((b - a) / 6.0)
}

#[allow(clippy::too_many_arguments)]
fn adapt<F: Fn(f64) -> C64>(
    f: &F,
    a: f64,
    b: f64,
    fa: C64,
    fm: C64,
    fb: C64,
    whole: C64,
    tol: f64,
    depth: u32,
) -> C64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.norm() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adapt(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + adapt(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson quadrature of a complex integrand on `[a, b]`.
pub fn integrate<F: Fn(f64) -> C64>(f: F, a: f64, b: f64, tol: f64) -> C64 {
    if a == b {
        return C64::new(0.0, 0.0);
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(a, b, fa, fm, fb);
    adapt(&f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Entrywise adaptive quadrature of a matrix-valued integrand.
pub fn integrate_mat<F: Fn(f64) -> Mat>(f: F, a: f64, b: f64, tol: f64) -> Mat {
    let shape = f(a).shape();
    Mat::from_fn(shape.0, shape.1, |r, c| {
        integrate(|t| f(t)[(r, c)], a, b, tol)
    })
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn pauli() -> [Mat; 3] {
    let (o, z, i) = (c(1.0, 0.0), c(0.0, 0.0), c(0.0, 1.0));
    [
        Mat::from_row_slice(2, 2, &[z, o, o, z]),
        Mat::from_row_slice(2, 2, &[z, -i, i, z]),
        Mat::from_row_slice(2, 2, &[o, z, z, -o]),
    ]
}

/// `exp(-i (a σx + b σy + c σz))`, closed form.
pub fn su2(a: f64, b: f64, cz: f64) -> Mat {
    let [sx, sy, sz] = pauli();
    let n = (a * a + b * b + cz * cz).sqrt();
    let id = Mat::identity(2, 2);
    if n == 0.0 {
        return id;
    }
    let axis = (sx * c(a, 0.0) + sy * c(b, 0.0) + sz * c(cz, 0.0)) / c(n, 0.0);
    id * c(n.cos(), 0.0) - axis * c(0.0, n.sin())
}

pub fn max_entry(m: &Mat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Least-squares slope of `log y` against `log x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    num / den
}

pub fn grid(t: f64, n: usize) -> TimeGrid {
    TimeGrid::new(t, n).unwrap()
}
