#![allow(dead_code)]

use biham_euler_so4::leaf::LeafChart;
use biham_euler_so4::verify::Guards;
use biham_euler_so4::xxz::XxzModel;
use biham_euler_so4::{Chart, PhasePoint, C};
use proptest::prelude::*;

pub fn complex() -> impl Strategy<Value = C> {
    (-1.0..=1.0f64, -1.0..=1.0f64).prop_map(|(a, b)| C::new(a, b))
}

pub fn complex6() -> impl Strategy<Value = Vec<C>> {
    prop::collection::vec(complex(), 6)
}

pub fn m_point() -> impl Strategy<Value = PhasePoint> {
    complex6().prop_map(|x| PhasePoint::new(Chart::M, x).unwrap())
}

pub fn real6() -> impl Strategy<Value = [f64; 6]> {
    prop::array::uniform6(-1.0..=1.0f64)
}

/// uv points with `|u1|, |u2| > 0.1` only.
pub fn uv_point() -> impl Strategy<Value = PhasePoint> {
    complex6()
        .prop_filter("u guard", |x| x[0].norm() > 0.1 && x[3].norm() > 0.1)
        .prop_map(|x| PhasePoint::new(Chart::Uv, x).unwrap())
}

/// uv points satisfying every leaf guard for `model`.
pub fn admissible_uv(model: XxzModel) -> impl Strategy<Value = PhasePoint> {
    complex6()
        .prop_filter("leaf guards", move |x| Guards::leaf(model).admits(x))
        .prop_map(|x| PhasePoint::new(Chart::Uv, x).unwrap())
}

pub fn admissible_leaf(model: XxzModel) -> impl Strategy<Value = LeafChart> {
    admissible_uv(model).prop_map(|p| LeafChart::project(&p).unwrap())
}

/// Symmetric parameters away from the degenerate loci.
pub fn model() -> impl Strategy<Value = XxzModel> {
    (-3.0..3.0f64, -3.0..3.0f64, 0.5..3.0f64, prop::bool::ANY)
        .prop_filter("mu1 + mu2 away from 0", |(a, b, _, _)| (a + b).abs() > 0.2)
        .prop_map(|(a, b, c, neg)| XxzModel::new(a, b, if neg { -c } else { c }).unwrap())
}

pub fn mu123() -> XxzModel {
    XxzModel::new(1.0, 2.0, 3.0).unwrap()
}
