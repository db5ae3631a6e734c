use std::fs;
use std::path::{Path, PathBuf};

use starframe::frames::PartSource;
use starframe::frames::{
    biframe_U, dyson_series, lab_U, std_frame_U, triframe_U, BiframeForm, Frame, KernelRoute,
    SplitGenerator,
};
use starframe::identities::{
    accelerated_slope, check_cube_trick, check_square_trick, loglog_slope, random_contraction,
    run_identity_suite, LAMBDAS, POLYNOMIAL_TOL, RESIDUAL_TOL, SLOPE_TOL,
};
use starframe::rabi::{
    figure1_report, rabi_reference, rabi_split, rabi_split_computed, rabi_three_part_split,
    rabi_three_part_split_with, RabiParams,
};
use starframe::reference::{epsilon_between, epsilon_error};
use starframe::{EvolutionTable, Generator, TimeGrid};

use crate::config::{check_writable, RunConfig};
use crate::svg;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_FAILED: i32 = 2;

/// A failure that maps to exit code 1.
#[derive(Debug)]
pub struct CmdError(pub String);

impl<E: std::fmt::Display> From<E> for CmdError {
    fn from(e: E) -> Self {
        CmdError(e.to_string())
    }
}

type CmdResult = Result<bool, CmdError>;

/// Fixed-width scientific notation, 17 significant digits.
pub fn sci(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), CmdError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

fn prepare_output(out: &Path) -> Result<(), CmdError> {
    check_writable(out).map_err(|e| CmdError(e.0))
}

/// Identity residuals over the trial grid plus order fits on a fixed pair.
pub fn cmd_identities(cfg: &RunConfig, out: &Path) -> CmdResult {
    prepare_output(out)?;
    let suite = cfg.suite();
    let mut rows = Vec::new();
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for r in run_identity_suite(&suite)? {
        ok &= r.pass;
        worst = worst.max(r.residual);
        rows.push(vec![
            r.check,
            r.seed.to_string(),
            r.dim.to_string(),
            sci(r.rho),
            sci(r.residual),
            String::new(),
        ]);
    }
    if suite.trials > 0 {
        let pair = random_contraction(suite.seed, 4, 2, 0.8)?;
        let m_sum = pair.sum();
        let mut push = |name: String, residual: f64, slope: f64, target: f64| {
            let pass = residual <= POLYNOMIAL_TOL && (slope - target).abs() <= SLOPE_TOL;
            ok &= pass;
            rows.push(vec![
                name,
                suite.seed.to_string(),
                "4".into(),
                sci(pair.rho),
                sci(residual),
                sci(slope),
            ]);
        };
        for m in [1usize, 2] {
            let c = check_square_trick(&m_sum, m)?;
            push(
                format!("square_trick_m{m}"),
                c.polynomial_residual.max(c.identity_residual),
                c.slope,
                (2 * m + 2) as f64,
            );
        }
        for m in [0usize, 1] {
            let c = check_cube_trick(&m_sum, m)?;
            push(
                format!("cube_trick_m{m}"),
                c.polynomial_residual.max(c.identity_residual),
                c.slope,
                (3 * m + 3) as f64,
            );
        }
        for m in [1usize, 2] {
            push(
                format!("accelerated_m{m}"),
                0.0,
                accelerated_slope(&pair, m)?,
                (2 * m + 2) as f64,
            );
        }
    }
    write_csv(
        out,
        &["check", "seed", "dim", "rho", "residual", "slope_if_any"],
        &rows,
    )?;
    println!(
        "identities: {} rows, max residual {worst:.3e} (tolerance {RESIDUAL_TOL:e}) -> {}",
        rows.len(),
        if ok { "ok" } else { "FAILED" }
    );
    Ok(ok)
}

fn svg_path(out: &Path) -> PathBuf {
    out.with_extension("svg")
}

/// Truncation error against order for each configured frame.
pub fn cmd_figure1(cfg: &RunConfig, out: &Path) -> CmdResult {
    prepare_output(out)?;
    let opts = cfg.figure1_options().map_err(|e| CmdError(e.0))?;
    if cfg.emit_svg {
        prepare_output(&svg_path(out))?;
    }
    let report = figure1_report(&cfg.rabi(), &opts)?;
    let rows: Vec<Vec<String>> = report
        .records
        .iter()
        .map(|r| {
            vec![
                r.frame.clone(),
                r.m.to_string(),
                sci(r.epsilon),
                sci(r.log10_epsilon()),
            ]
        })
        .collect();
    write_csv(out, &["frame", "m", "epsilon", "log10_epsilon"], &rows)?;
    if cfg.emit_svg {
        fs::write(
            svg_path(out),
            svg::render(&report.records, Some(report.worst_floor())),
        )?;
    }
    for (frame, floor) in &report.floors {
        println!("figure1: {frame} floor {floor:.3e}");
    }
    println!(
        "figure1: {} records, reference estimate {:.3e}",
        rows.len(),
        report.reference_error
    );
    Ok(true)
}

/// Property names run by `verify`, in order.
pub const PROPERTIES: [&str; 5] = [
    "frame_equivalence",
    "blue_red",
    "triframe_permutation",
    "constant_generator",
    "convergence_order",
];

/// Grid used by the grid-independent algebraic properties.
const ALGEBRA_GRID: usize = 201;

struct Row {
    property: &'static str,
    detail: String,
    value: f64,
    tolerance: Option<f64>,
    pass: bool,
}

impl Row {
    fn at_most(property: &'static str, detail: impl Into<String>, value: f64, tol: f64) -> Self {
        Row {
            property,
            detail: detail.into(),
            value,
            tolerance: Some(tol),
            pass: value <= tol,
        }
    }

    fn info(property: &'static str, detail: impl Into<String>, value: f64) -> Self {
        Row {
            property,
            detail: detail.into(),
            value,
            tolerance: None,
            pass: true,
        }
    }

    fn near(
        property: &'static str,
        detail: impl Into<String>,
        value: f64,
        target: f64,
        tol: f64,
    ) -> Self {
        Row {
            property,
            detail: format!("{} (target {target})", detail.into()),
            value,
            tolerance: Some(tol),
            pass: (value - target).abs() <= tol,
        }
    }
}

fn frame_equivalence(cfg: &RunConfig) -> Result<Vec<Row>, CmdError> {
    const P: &str = "frame_equivalence";
    let p = cfg.rabi();
    let split = rabi_split(&p)?;
    let reference = rabi_reference(&p, cfg.substeps)?;
    let pipelines: Vec<(&str, EvolutionTable)> = vec![
        ("lab", lab_U(&split)?),
        ("std", std_frame_U(&split)?),
        (
            "biframe_blue",
            biframe_U(&split, BiframeForm::Blue, KernelRoute::Quadrature)?,
        ),
        (
            "biframe_red",
            biframe_U(&split, BiframeForm::Red, KernelRoute::Quadrature)?,
        ),
        ("triframe", triframe_U(&rabi_three_part_split(&p)?)?),
    ];
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for (name, u) in &pipelines {
        let e = epsilon_error(&reference, u)?;
        worst = worst.max(e);
        rows.push(Row::at_most(P, format!("epsilon {name}"), e, 1e-4));
    }
    let mut pair_worst: f64 = 0.0;
    for (a, (_, ua)) in pipelines.iter().enumerate() {
        for (_, ub) in &pipelines[a + 1..] {
            pair_worst = pair_worst.max(epsilon_between(ua, ub)?.abs());
        }
    }
    rows.push(Row::at_most(
        P,
        "pairwise epsilon / worst epsilon",
        pair_worst / worst,
        10.0,
    ));
    Ok(rows)
}

fn blue_red(cfg: &RunConfig) -> Result<Vec<Row>, CmdError> {
    const P: &str = "blue_red";
    let p = cfg.rabi();
    let split = rabi_split_computed(&p)?;
    let blue = biframe_U(&split, BiframeForm::Blue, KernelRoute::Star)?;
    let red = biframe_U(&split, BiframeForm::Red, KernelRoute::Star)?;
    let closed = rabi_split(&p)?;
    let qb = biframe_U(&closed, BiframeForm::Blue, KernelRoute::Quadrature)?;
    let qr = biframe_U(&closed, BiframeForm::Red, KernelRoute::Quadrature)?;
    Ok(vec![
        Row::at_most(
            P,
            "relative deviation (star route)",
            blue.max_relative_deviation(&red)?,
            1e-8,
        ),
        Row::info(
            P,
            "relative deviation (quadrature route)",
            qb.max_relative_deviation(&qr)?,
        ),
    ])
}

const PERMUTATIONS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

fn triframe_permutation(cfg: &RunConfig) -> Result<Vec<Row>, CmdError> {
    let p = RabiParams {
        n_grid: ALGEBRA_GRID,
        ..cfg.rabi()
    };
    let split = rabi_three_part_split_with(&p, PartSource::Computed)?;
    let base = triframe_U(&split)?;
    let mut worst: f64 = 0.0;
    for perm in &PERMUTATIONS[1..] {
        worst = worst.max(base.max_relative_deviation(&triframe_U(&split.permuted(perm)?)?)?);
    }
    Ok(vec![Row::at_most(
        "triframe_permutation",
        "max relative deviation over 6 orders",
        worst,
        1e-8,
    )])
}

fn constant_generator(cfg: &RunConfig) -> Result<Vec<Row>, CmdError> {
    let grid = TimeGrid::new(2.0, ALGEBRA_GRID)?;
    let pair = random_contraction(cfg.seed, 2, 2, 0.5)?;
    let parts = pair
        .parts
        .iter()
        .map(|m| Generator::sample(&grid, |_| m.clone()))
        .collect::<Result<Vec<_>, _>>()?;
    let split = SplitGenerator::computed(parts)?;
    let bi = biframe_U(&split, BiframeForm::Blue, KernelRoute::Star)?;
    let lab = lab_U(&split)?;
    Ok(vec![Row::at_most(
        "constant_generator",
        "biframe vs lab, max relative block deviation",
        bi.max_relative_deviation(&lab)?,
        1e-10,
    )])
}

fn convergence_order(cfg: &RunConfig) -> Result<Vec<Row>, CmdError> {
    let base = RabiParams {
        n_grid: ALGEBRA_GRID,
        ..cfg.rabi()
    };
    let mut rows = Vec::new();
    for m in [1usize, 2] {
        let mut diffs = Vec::new();
        for &l in &LAMBDAS {
            let split = rabi_split_computed(&base.scaled(l))?;
            let bi = dyson_series(&split, Frame::Biframe, &[m], KernelRoute::Star)?;
            let std = dyson_series(
                &split,
                Frame::Std { frame_part: 1 },
                &[2 * m + 1],
                KernelRoute::Star,
            )?;
            diffs.push(bi[0].max_univariate_deviation(&std[0]));
        }
        rows.push(Row::near(
            "convergence_order",
            format!("slope biframe[{m}] - std[{}]", 2 * m + 1),
            loglog_slope(&LAMBDAS, &diffs),
            (2 * m + 2) as f64,
            0.3,
        ));
    }
    Ok(rows)
}

fn run_property(name: &str, cfg: &RunConfig) -> Result<Vec<Row>, CmdError> {
    match name {
        "frame_equivalence" => frame_equivalence(cfg),
        "blue_red" => blue_red(cfg),
        "triframe_permutation" => triframe_permutation(cfg),
        "constant_generator" => constant_generator(cfg),
        "convergence_order" => convergence_order(cfg),
        _ => unreachable!("unknown property {name}"),
    }
}

/// End-to-end property suites.
pub fn cmd_verify(cfg: &RunConfig, out: &Path) -> CmdResult {
    prepare_output(out)?;
    let mut rows = Vec::new();
    for name in PROPERTIES {
        match run_property(name, cfg) {
            Ok(r) => rows.extend(r),
            Err(e) => rows.push(Row {
                property: PROPERTIES.iter().find(|p| **p == name).unwrap(),
                detail: format!("error: {}", e.0),
                value: f64::NAN,
                tolerance: None,
                pass: false,
            }),
        }
    }
    let ok = rows.iter().all(|r| r.pass);
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.property.to_string(),
                r.detail.clone(),
                sci(r.value),
                r.tolerance.map(sci).unwrap_or_default(),
                r.pass.to_string(),
            ]
        })
        .collect();
    write_csv(
        out,
        &["property", "detail", "value", "tolerance", "pass"],
        &table,
    )?;
    for r in &rows {
        println!(
            "{} {}: {} = {:.3e}",
            if r.pass { "PASS" } else { "FAIL" },
            r.property,
            r.detail,
            r.value
        );
    }
    Ok(ok)
}
