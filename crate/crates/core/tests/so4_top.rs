mod common;

use biham_euler_so4::so4::{self, ModelParams, ScalarMode};
use biham_euler_so4::{Chart, PhasePoint, C};
use common::*;
use proptest::prelude::*;

fn params_strategy() -> impl Strategy<Value = ModelParams> {
    prop::array::uniform4(-5.0..5.0f64).prop_map(|mu| ModelParams::new(mu).unwrap())
}

fn positive_j() -> impl Strategy<Value = ModelParams> {
    prop::array::uniform4(0.5..4.0f64).prop_map(|j| {
        ModelParams::from_jsq([j[0] * j[0], j[1] * j[1], j[2] * j[2], j[3] * j[3]]).unwrap()
    })
}

#[test]
fn squared_inertia_of_reference_parameters() {
    assert_eq!(
        ModelParams::symmetric(10.0, 1.0, 2.0).unwrap().jsq(),
        [5.0, 11.0, 11.0, 13.0]
    );
    assert_eq!(
        ModelParams::new([1.0, 2.0, 3.0, 4.0]).unwrap().jsq(),
        [-8.0, 2.0, 4.0, 6.0]
    );
}

#[test]
fn non_finite_parameters_rejected() {
    assert!(ModelParams::new([1.0, f64::NAN, 0.0, 0.0]).is_err());
}

#[test]
fn complex_split_point_is_not_real() {
    let pt = PhasePoint::new(Chart::M, vec![C::new(0.1, 0.4); 6]).unwrap();
    let e = so4::chart_map(&pt, Chart::Split, ScalarMode::Real).unwrap_err();
    assert!(e.to_string().contains("non-real point"));
}

#[test]
fn real_m_point_maps_to_real_split_point() {
    let pt = PhasePoint::from_real(Chart::M, &[0.3, -0.2, 0.8, 0.1, 0.5, -0.9]).unwrap();
    let s = so4::chart_map(&pt, Chart::Split, ScalarMode::Real).unwrap();
    assert_eq!(s.max_imag(), 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mu_and_jsq_are_inverse(p in params_strategy()) {
        let q = ModelParams::from_jsq(p.jsq()).unwrap();
        for (a, b) in p.mu().iter().zip(q.mu()) {
            prop_assert!((a - b).abs() <= 1e-13 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn lenard_chain_holds_for_any_parameters(p in params_strategy(), pt in m_point()) {
        let r = so4::lenard_residuals_m(&p, &pt).unwrap();
        prop_assert!(r.worst().normalized() <= 1e-12, "{:?}", r.worst());
    }

    #[test]
    fn characteristic_polynomial_closed_form(
        p in params_strategy(), pt in m_point(), l in complex(), r in complex()
    ) {
        let res = so4::char_poly_residual(&p, l * 3.0, r * 3.0, &pt).unwrap();
        prop_assert!(res.normalized() <= 1e-10);
    }

    #[test]
    fn lax_equation_along_manakov_flow(p in positive_j(), pt in m_point(), l in complex()) {
        let r = so4::lax_flow_residual(&p, l, &pt).unwrap().unwrap();
        prop_assert!(r.normalized() <= 1e-9);
        let (_, fit) = so4::manakov_span_fit(&p).unwrap();
        prop_assert!(fit <= 1e-12);
    }

    #[test]
    fn charts_round_trip(pt in m_point()) {
        let mut q = pt.clone();
        for c in [Chart::Uv, Chart::Split, Chart::M] {
            q = so4::chart_map(&q, c, ScalarMode::Complex).unwrap();
        }
        for (a, b) in pt.coords().iter().zip(q.coords()) {
            prop_assert!((a - b).norm() <= 1e-14);
        }
    }

    #[test]
    fn energy_agrees_in_split_chart(p in params_strategy(), pt in m_point()) {
        let s = so4::chart_map(&pt, Chart::Split, ScalarMode::Complex).unwrap();
        let a: C = so4::energy(&p, pt.coords());
        let b: C = so4::energy_split(&p, s.coords());
        prop_assert!((a - b).norm() <= 1e-12 * (1.0 + a.norm()));
    }
}
