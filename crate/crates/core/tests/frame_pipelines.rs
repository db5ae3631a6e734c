mod common;

use common::{c, grid, pauli};
use starframe::frames::{
    biframe_U, dyson_limit, dyson_series, dyson_truncated, evolution_from_udot, lab_U, std_frame_U,
    triframe_U, udot_alternating_series, BiframeForm, Frame, KernelRoute, SplitGenerator,
};
use starframe::reference::{epsilon_between, epsilon_error, rk_reference};
use starframe::{star_product, Generator, Mat, TimeGrid};

fn a0(t: f64) -> Mat {
    let [_, sy, sz] = pauli();
    (sz * c(1.0, 0.0) + sy * c(0.3 * t, 0.0)) * c(0.0, -1.0)
}

fn a1(t: f64) -> Mat {
    let [sx, _, _] = pauli();
    sx * c(0.0, -0.8 * (2.0 * t).cos())
}

fn a2(t: f64) -> Mat {
    let [_, sy, _] = pauli();
    sy * c(0.0, -0.5 * (1.0 + t).sin())
}

fn smooth_split(g: &TimeGrid, parts: &[fn(f64) -> Mat]) -> SplitGenerator {
    SplitGenerator::computed(
        parts
            .iter()
            .map(|f| Generator::sample(g, f).unwrap())
            .collect(),
    )
    .unwrap()
}

#[test]
fn alternating_series_is_blind_to_part_order() {
    let g = grid(1.0, 41);
    let split = smooth_split(&g, &[a0, a1]);
    let swapped = split.permuted(&[1, 0]).unwrap();
    for m in 1..5 {
        assert_eq!(
            udot_alternating_series(&split, m).unwrap(),
            udot_alternating_series(&swapped, m).unwrap()
        );
    }
    let first = split.udot(0).unwrap().add(&split.udot(1).unwrap()).unwrap();
    assert_eq!(udot_alternating_series(&split, 1).unwrap(), first);
}

#[test]
fn alternating_series_approaches_biframe() {
    let g = grid(1.5, 101);
    let split = smooth_split(&g, &[a0, a1]);
    let target = biframe_U(&split, BiframeForm::Blue, KernelRoute::Star).unwrap();
    let devs: Vec<f64> = (1..=10)
        .map(|m| {
            evolution_from_udot(&udot_alternating_series(&split, m).unwrap())
                .unwrap()
                .max_univariate_deviation(&target)
        })
        .collect();
    for w in devs[2..].windows(2) {
        assert!(w[1] < w[0], "{devs:?}");
    }
    assert!(devs[9] <= 1e-6, "{devs:?}");
}

#[test]
fn zeroth_orders() {
    let g = grid(1.0, 31);
    let split = smooth_split(&g, &[a0, a1]);
    let lab0 = dyson_truncated(&split, Frame::Lab, 0).unwrap();
    for i in 0..31 {
        assert!((lab0.u(i) - Mat::identity(2, 2)).norm() <= 1e-15);
    }
    let bi0 = dyson_truncated(&split, Frame::Biframe, 0).unwrap();
    let want = star_product(split.part_evolution_element(0), split.part_green(1)).unwrap();
    let want = starframe::EvolutionTable::from_element(&want).unwrap();
    assert!(bi0.max_relative_deviation(&want).unwrap() <= 1e-15);
}

#[test]
fn column_series_matches_full_truncation() {
    let g = grid(1.0, 41);
    let split = smooth_split(&g, &[a0, a1]);
    for frame in [Frame::Lab, Frame::Std { frame_part: 1 }, Frame::Biframe] {
        let cols = dyson_series(&split, frame, &[0, 2, 4], KernelRoute::Star).unwrap();
        for (k, m) in [0, 2, 4].into_iter().enumerate() {
            let full = dyson_truncated(&split, frame, m).unwrap();
            assert!(
                cols[k].max_univariate_deviation(&full) <= 1e-12,
                "{frame:?} m = {m}"
            );
        }
    }
}

#[test]
fn high_orders_reach_the_untruncated_result() {
    let g = grid(2.0, 201);
    let split = smooth_split(&g, &[a0, a1]);
    for frame in [Frame::Lab, Frame::Std { frame_part: 1 }, Frame::Biframe] {
        let limit = dyson_limit(&split, frame, KernelRoute::Star).unwrap();
        let series = dyson_series(&split, frame, &[30], KernelRoute::Star).unwrap();
        assert!(
            series[0].max_univariate_deviation(&limit) <= 1e-12,
            "{frame:?}"
        );
    }
}

#[test]
fn frames_agree_on_a_generic_split() {
    let g = grid(2.0, 401);
    let split = smooth_split(&g, &[a0, a1]);
    let reference = rk_reference(|t| a0(t) + a1(t), &g, 20).unwrap();
    let us = [
        lab_U(&split).unwrap(),
        std_frame_U(&split).unwrap(),
        biframe_U(&split, BiframeForm::Blue, KernelRoute::Star).unwrap(),
        biframe_U(&split, BiframeForm::Red, KernelRoute::Star).unwrap(),
        biframe_U(&split, BiframeForm::Blue, KernelRoute::Quadrature).unwrap(),
    ];
    let worst = us
        .iter()
        .map(|u| epsilon_error(&reference, u).unwrap())
        .fold(0.0, f64::max);
    assert!(worst <= 1e-4);
    for a in 0..us.len() {
        for b in a + 1..us.len() {
            assert!(epsilon_between(&us[a], &us[b]).unwrap().abs() <= 10.0 * worst);
        }
    }
}

#[test]
fn triframe_collapses_and_permutes() {
    let g = grid(1.5, 81);
    let three = smooth_split(&g, &[a0, a1, a2]);
    let base = triframe_U(&three).unwrap();
    for order in [[0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
        let other = triframe_U(&three.permuted(&order).unwrap()).unwrap();
        assert!(
            base.max_relative_deviation(&other).unwrap() <= 1e-8,
            "{order:?}"
        );
    }
    let zero: fn(f64) -> Mat = |_| Mat::zeros(2, 2);
    let collapsed = triframe_U(&smooth_split(&g, &[a0, a1, zero])).unwrap();
    let pair = biframe_U(
        &smooth_split(&g, &[a0, a1]),
        BiframeForm::Blue,
        KernelRoute::Star,
    )
    .unwrap();
    assert!(collapsed.max_relative_deviation(&pair).unwrap() <= 1e-10);
}
