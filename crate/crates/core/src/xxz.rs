//! Rotationally symmetric model (`mu4 = mu3`) in the uv-chart, ordering
//! `(u1, v1, z1, u2, v2, z2)`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Jet, Scalar, C};
use crate::so4::{
    self, apply_linear, char_poly, char_poly_grad, chart_matrix, energy, h0, p4, pfaffian,
    second_integral, ModelParams,
};
use crate::tensor::{
    bracket_scaled, column_space_defect, ham_field_scaled, k, lie_bivector_scaled, lie_scalar_iter,
    singular_values, BivectorField, Chart, PhasePoint, Residual, ScalarField, VectorField,
};

/// Guard on `|u1|`, `|u2|`, `|G|`, `|F|`, `|theta1|`.
pub const EPS_DEG: f64 = 1e-8;

pub const U1: usize = 0;
pub const V1: usize = 1;
pub const Z1: usize = 2;
pub const U2: usize = 3;
pub const V2: usize = 4;
pub const Z2: usize = 5;

/// Single-sign corruptions used to probe the sensitivity of the checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mutation {
    /// `Q = P2 + X1 ^ Z`.
    QWedgeSign,
    /// `H2` with `+2 mu3^2 (z1 - z2)^2`.
    H2LastTermSign,
    /// `N*` with the `(1,3)` entry negated.
    NijenhuisEntrySign,
}

impl Mutation {
    pub const ALL: [Mutation; 3] = [
        Mutation::QWedgeSign,
        Mutation::H2LastTermSign,
        Mutation::NijenhuisEntrySign,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mutation::QWedgeSign => "q-wedge-sign",
            Mutation::H2LastTermSign => "h2-last-term-sign",
            Mutation::NijenhuisEntrySign => "nijenhuis-entry-sign",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Mutation::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown mutation {s:?}")))
    }
}

/// Symmetric model parameters plus an optional deliberate corruption.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct XxzModel {
    pub mu1: f64,
    pub mu2: f64,
    pub mu3: f64,
    pub mutation: Option<Mutation>,
}

impl XxzModel {
    pub fn new(mu1: f64, mu2: f64, mu3: f64) -> Result<Self> {
        ModelParams::symmetric(mu1, mu2, mu3)?;
        Ok(XxzModel {
            mu1,
            mu2,
            mu3,
            mutation: None,
        })
    }

    pub fn from_params(p: &ModelParams) -> Result<Self> {
        if !p.is_symmetric() {
            return Err(Error::InvalidParams(format!(
                "symmetric model needs mu4 = mu3, got {:?}",
                p.mu()
            )));
        }
        let [m1, m2, m3, _] = p.mu();
        Self::new(m1, m2, m3)
    }

    pub fn with_mutation(mut self, m: Option<Mutation>) -> Self {
        self.mutation = m;
        self
    }

    pub fn mutated(&self, m: Mutation) -> bool {
        self.mutation == Some(m)
    }

    pub fn params(&self) -> ModelParams {
        ModelParams::symmetric(self.mu1, self.mu2, self.mu3).expect("finite by construction")
    }

    /// The constant eigenvalue `lambda1 = mu1 + mu2`.
    pub fn lambda1(&self) -> f64 {
        self.mu1 + self.mu2
    }
}

pub fn h0_uv<T: Scalar>(x: &[T]) -> T {
    x[U1] * x[V1] + x[U2] * x[V2] + x[Z1].square() + x[Z2].square()
}

pub fn c2_uv<T: Scalar>(x: &[T]) -> T {
    x[U2] * x[V2] + x[Z2].square() - x[U1] * x[V1] - x[Z1].square()
}

pub fn h1_uv<T: Scalar>(m: &XxzModel, x: &[T]) -> T {
    let cross = x[U2] * x[V1] + x[V2] * x[U1];
    -k::<T>(2.0 * m.mu3) * cross
        - k::<T>(4.0 * m.mu2) * x[Z1] * x[Z2]
        - k::<T>(2.0 * m.mu1) * h0_uv(x)
}

fn h2_last_coeff(m: &XxzModel) -> f64 {
    let s = if m.mutated(Mutation::H2LastTermSign) {
        1.0
    } else {
        -1.0
    };
    2.0 * s * m.mu3 * m.mu3
}

pub fn h2_uv<T: Scalar>(m: &XxzModel, x: &[T]) -> T {
    let (m1, m2, m3) = (m.mu1, m.mu2, m.mu3);
    let cross = x[V2] * x[U1] + x[U2] * x[V1];
    let zz = x[Z1].square() + x[Z2].square() - x[U1] * x[V1] - x[U2] * x[V2];
    k::<T>(m1 * m1) * h0_uv(x)
        + k::<T>(4.0 * m1 * m2) * x[Z1] * x[Z2]
        + k::<T>(2.0 * m3 * (m1 + m2)) * cross
        + k::<T>(m2 * m2) * zz
        + k::<T>(h2_last_coeff(m)) * (x[Z1] - x[Z2]).square()
}

fn grad_h0(x: &[C]) -> DVector<C> {
    DVector::from_vec(vec![x[V1], x[U1], x[Z1] * 2.0, x[V2], x[U2], x[Z2] * 2.0])
}

fn grad_c2(x: &[C]) -> DVector<C> {
    DVector::from_vec(vec![
        -x[V1],
        -x[U1],
        x[Z1] * -2.0,
        x[V2],
        x[U2],
        x[Z2] * 2.0,
    ])
}

fn grad_cross(x: &[C]) -> DVector<C> {
    DVector::from_vec(vec![
        x[V2],
        x[U2],
        C::new(0.0, 0.0),
        x[V1],
        x[U1],
        C::new(0.0, 0.0),
    ])
}

fn grad_z1z2(x: &[C]) -> DVector<C> {
    let z = C::new(0.0, 0.0);
    DVector::from_vec(vec![z, z, x[Z2], z, z, x[Z1]])
}

fn grad_h1(m: &XxzModel, x: &[C]) -> DVector<C> {
    grad_cross(x) * C::from(-2.0 * m.mu3)
        + grad_z1z2(x) * C::from(-4.0 * m.mu2)
        + grad_h0(x) * C::from(-2.0 * m.mu1)
}

fn grad_h2(m: &XxzModel, x: &[C]) -> DVector<C> {
    let (m1, m2, m3) = (m.mu1, m.mu2, m.mu3);
    let z = C::new(0.0, 0.0);
    let zz = DVector::from_vec(vec![
        -x[V1],
        -x[U1],
        x[Z1] * 2.0,
        -x[V2],
        -x[U2],
        x[Z2] * 2.0,
    ]);
    let d = (x[Z1] - x[Z2]) * (2.0 * h2_last_coeff(m));
    let last = DVector::from_vec(vec![z, z, d, z, z, -d]);
    grad_h0(x) * C::from(m1 * m1)
        + grad_z1z2(x) * C::from(4.0 * m1 * m2)
        + grad_cross(x) * C::from(2.0 * m3 * (m1 + m2))
        + zz * C::from(m2 * m2)
        + last
}

#[derive(Clone)]
pub struct UvObservables {
    pub h0: ScalarField,
    pub c2: ScalarField,
    pub h1: ScalarField,
    pub h2: ScalarField,
}

pub fn uv_observables(model: &XxzModel) -> UvObservables {
    let m = *model;
    UvObservables {
        h0: ScalarField::new(Chart::Uv, h0_uv, grad_h0),
        c2: ScalarField::new(Chart::Uv, c2_uv, grad_c2),
        h1: ScalarField::new(Chart::Uv, move |x| h1_uv(&m, x), move |x| grad_h1(&m, x)),
        h2: ScalarField::new(Chart::Uv, move |x| h2_uv(&m, x), move |x| grad_h2(&m, x)),
    }
}

/// Entries of `P1` in the uv-chart.
pub fn p1_uv_entries<T: Scalar>(x: &[T]) -> [[T; 6]; 6] {
    let mut p = [[T::zero(); 6]; 6];
    for (off, sign) in [(0usize, 1.0), (3usize, -1.0)] {
        let (u, v, z) = (x[off], x[off + 1], x[off + 2]);
        let s = k::<T>(sign);
        let upper = [(0, 1, z.scale(2.0)), (0, 2, -u), (1, 2, v)];
        for (i, j, e) in upper {
            p[off + i][off + j] = s * e;
            p[off + j][off + i] = -(s * e);
        }
    }
    p
}

/// Entries of `P2 = mu1 P1 + mu2 D2 + mu3 D3` in the uv-chart.
pub fn p2_uv_entries<T: Scalar>(m: &XxzModel, x: &[T]) -> [[T; 6]; 6] {
    let [u1, v1, z1, u2, v2, z2] = [x[U1], x[V1], x[Z1], x[U2], x[V2], x[Z2]];
    let two = k::<T>(2.0);
    let d2 = [
        (0, 1, two * z2),
        (0, 5, u1),
        (1, 5, -v1),
        (2, 3, u2),
        (2, 4, -v2),
        (3, 4, -(two * z1)),
    ];
    let d3 = [
        (0, 2, -u2),
        (0, 4, two * (z2 - z1)),
        (0, 5, -u2),
        (1, 2, v2),
        (1, 3, two * (z1 - z2)),
        (1, 5, v2),
        (2, 3, -u1),
        (2, 4, v1),
        (3, 5, u1),
        (4, 5, -v1),
    ];
    let mut p = p1_uv_entries(x);
    for row in p.iter_mut() {
        for e in row.iter_mut() {
            *e = *e * k::<T>(m.mu1);
        }
    }
    for (coef, block) in [(m.mu2, &d2[..]), (m.mu3, &d3[..])] {
        for &(i, j, e) in block {
            let t = k::<T>(coef) * e;
            p[i][j] = p[i][j] + t;
            p[j][i] = p[j][i] - t;
        }
    }
    p
}

fn linear_uv(entries: impl Fn(&[C]) -> [[C; 6]; 6]) -> BivectorField {
    let basis = (0..6)
        .map(|l| {
            let mut e = [C::new(0.0, 0.0); 6];
            e[l] = C::new(1.0, 0.0);
            let p = entries(&e);
            DMatrix::from_fn(6, 6, |i, j| p[i][j])
        })
        .collect();
    BivectorField::linear(Chart::Uv, basis)
}

pub fn p1_uv() -> BivectorField {
    linear_uv(p1_uv_entries)
}

pub fn p2_uv(model: &XxzModel) -> BivectorField {
    let m = *model;
    linear_uv(move |x| p2_uv_entries(&m, x))
}

/// Components of the Euler field `X1` in the uv-chart.
pub fn x1_components<T: Scalar>(m: &XxzModel, x: &[T]) -> Vec<T> {
    let [u1, v1, z1, u2, v2, z2] = [x[U1], x[V1], x[Z1], x[U2], x[V2], x[Z2]];
    let (m2, m3) = (k::<T>(m.mu2), k::<T>(m.mu3));
    let four = k::<T>(4.0);
    let zc = k::<T>(2.0) * m3 * (u2 * v1 - u1 * v2);
    vec![
        four * (m2 * u1 * z2 - m3 * u2 * z1),
        -(four * (m2 * v1 * z2 - m3 * v2 * z1)),
        zc,
        -(four * (m2 * u2 * z1 - m3 * u1 * z2)),
        four * (m2 * v2 * z1 - m3 * v1 * z2),
        zc,
    ]
}

fn x1_jacobian(m: &XxzModel, x: &[C]) -> DMatrix<C> {
    let [u1, v1, z1, u2, v2, z2] = [x[U1], x[V1], x[Z1], x[U2], x[V2], x[Z2]];
    let (m2, m3) = (m.mu2, m.mu3);
    let mut j = DMatrix::zeros(6, 6);
    j[(0, U1)] = z2 * (4.0 * m2);
    j[(0, Z1)] = u2 * (-4.0 * m3);
    j[(0, U2)] = z1 * (-4.0 * m3);
    j[(0, Z2)] = u1 * (4.0 * m2);
    j[(1, V1)] = z2 * (-4.0 * m2);
    j[(1, Z1)] = v2 * (4.0 * m3);
    j[(1, V2)] = z1 * (4.0 * m3);
    j[(1, Z2)] = v1 * (-4.0 * m2);
    for row in [2, 5] {
        j[(row, U1)] = v2 * (-2.0 * m3);
        j[(row, V1)] = u2 * (2.0 * m3);
        j[(row, U2)] = v1 * (2.0 * m3);
        j[(row, V2)] = u1 * (-2.0 * m3);
    }
    j[(3, U1)] = z2 * (4.0 * m3);
    j[(3, Z1)] = u2 * (-4.0 * m2);
    j[(3, U2)] = z1 * (-4.0 * m2);
    j[(3, Z2)] = u1 * (4.0 * m3);
    j[(4, V1)] = z2 * (-4.0 * m3);
    j[(4, Z1)] = v2 * (4.0 * m2);
    j[(4, V2)] = z1 * (4.0 * m2);
    j[(4, Z2)] = v1 * (-4.0 * m3);
    j
}

pub fn x1_field(model: &XxzModel) -> VectorField {
    let m = *model;
    VectorField::new(
        Chart::Uv,
        move |x| x1_components(&m, x),
        move |x| x1_jacobian(&m, x),
    )
}

/// The transversal field `Z = 1/(2 u1) d/dv1 + 1/(2 u2) d/dv2`. Undefined
/// where `u1 u2 = 0`; see [`check_uv_domain`].
pub fn z_field() -> VectorField {
    VectorField::new(
        Chart::Uv,
        |x: &[Jet]| {
            let z = Jet::zero();
            let half = Jet::from_f64(0.5);
            vec![z, half / x[U1], z, z, half / x[U2], z]
        },
        |x| {
            let mut j = DMatrix::zeros(6, 6);
            j[(V1, U1)] = -0.5 / (x[U1] * x[U1]);
            j[(V2, U2)] = -0.5 / (x[U2] * x[U2]);
            j
        },
    )
}

/// Rejects uv points with `|u1|` or `|u2|` below [`EPS_DEG`].
pub fn check_uv_domain(pt: &PhasePoint) -> Result<()> {
    if pt.chart() != Chart::Uv {
        return Err(Error::ChartMismatch {
            expected: Chart::Uv,
            found: pt.chart(),
        });
    }
    for (name, idx) in [("u1", U1), ("u2", U2)] {
        let a = pt.coords()[idx].norm();
        if a < EPS_DEG {
            return Err(Error::DegeneratePoint(format!("|{name}| = {a:e}")));
        }
    }
    Ok(())
}

/// `Q = P2 - X1 ^ Z`.
pub fn q_uv(model: &XxzModel) -> BivectorField {
    let sign = if model.mutated(Mutation::QWedgeSign) {
        1.0
    } else {
        -1.0
    };
    let w = BivectorField::wedge_of(&x1_field(model), &z_field());
    p2_uv(model).combine(C::new(1.0, 0.0), &w, C::new(sign, 0.0))
}

/// `Q` at a point, with the domain guard applied.
pub fn q_at(model: &XxzModel, pt: &PhasePoint) -> Result<DMatrix<C>> {
    check_uv_domain(pt)?;
    q_uv(model).eval(pt)
}

/// The uv-chart point of an m-chart point (complex mode).
pub fn to_uv(pt: &PhasePoint) -> Result<PhasePoint> {
    so4::chart_map(pt, Chart::Uv, so4::ScalarMode::Complex)
}

/// `Det(L(lambda) - rho lambda 1)` pulled back to the uv-chart.
pub fn char_poly_uv(model: &XxzModel, lambda: C, rho: C) -> ScalarField {
    let jsq = model.params().jsq();
    let a = chart_matrix(Chart::Uv, Chart::M).expect("linear chart map");
    let a_val = a.clone();
    ScalarField::new(
        Chart::Uv,
        move |x| {
            let m = apply_linear(&a_val, x);
            char_poly(jsq, Jet::constant(lambda), Jet::constant(rho), &m)
        },
        move |x| {
            let m = apply_linear(&a, x);
            a.transpose() * char_poly_grad(jsq, lambda, rho, &m)
        },
    )
}

/// `[D, L_Z D, L_Z^2 D]` for the transported characteristic polynomial `D`.
pub fn stackel_derivatives(model: &XxzModel, lambda: C, rho: C, pt: &PhasePoint) -> Result<Vec<C>> {
    check_uv_domain(pt)?;
    lie_scalar_iter(&z_field(), &char_poly_uv(model, lambda, rho), pt, 2)
}

/// `L_Z L_Z Det(L(lambda) - rho lambda 1)`, normalized by the largest term of
/// the expanded characteristic polynomial and by `|L_Z D|`.
pub fn stackel_condition(model: &XxzModel, lambda: C, rho: C, pt: &PhasePoint) -> Result<Residual> {
    let d = stackel_derivatives(model, lambda, rho, pt)?;
    let p = model.params();
    let m = apply_linear(&chart_matrix(Chart::Uv, Chart::M)?, pt.coords());
    let l2 = lambda * lambda;
    let terms = [
        l2 * l2 * p4(p.jsq(), rho),
        l2 * rho * rho * h0(&m),
        l2 * rho * energy(&p, &m) * 2.0,
        l2 * second_integral(&p, &m),
        pfaffian(&m) * pfaffian(&m),
        d[0],
        d[1],
    ];
    let scale = terms.iter().map(|t| t.norm()).fold(0.0, f64::max);
    Ok(Residual::new(d[2].norm(), scale))
}

/// `|P dH|` for `H0`, `H1`, `C2` under `Q`: which are Casimirs.
pub fn q_casimir_residuals(model: &XxzModel, pt: &PhasePoint) -> Result<[Residual; 3]> {
    check_uv_domain(pt)?;
    let q = q_uv(model);
    let obs = uv_observables(model);
    let zero = DVector::zeros(6);
    let r = |f: &ScalarField| -> Result<Residual> {
        let (v, s) = ham_field_scaled(&q, f, pt)?;
        Ok(Residual::vector(&v, &zero, s))
    };
    Ok([r(&obs.h0)?, r(&obs.h1)?, r(&obs.c2)?])
}

/// Worst `{Hi, Hj}` over `i < j` in `{0, 1, 2}` for `P1` and `Q`.
pub fn involution_residual(model: &XxzModel, pt: &PhasePoint) -> Result<Residual> {
    check_uv_domain(pt)?;
    let obs = uv_observables(model);
    let hs = [&obs.h0, &obs.h1, &obs.h2];
    let mut worst = Residual::zero();
    for p in [p1_uv(), q_uv(model)] {
        for i in 0..3 {
            for j in i + 1..3 {
                let (b, s) = bracket_scaled(&p, hs[i], hs[j], pt)?;
                worst = worst.worst(Residual::new(b.norm(), s));
            }
        }
    }
    Ok(worst)
}

/// Transversality condition (ii): `L_Z P2` has rank at most two and contains
/// `Z` in its column space. Returns the third singular value against the
/// largest summand, and the column-space defect of `Z`.
pub fn transversality_ii(model: &XxzModel, pt: &PhasePoint) -> Result<(Residual, f64)> {
    check_uv_domain(pt)?;
    let z = z_field();
    let (lz, s) = lie_bivector_scaled(&z, &p2_uv(model), pt)?;
    let sv = singular_values(&lz);
    let defect = column_space_defect(&lz, &z.eval(pt)?, 2);
    Ok((Residual::new(sv[2], s.max(sv[0])), defect))
}

/// Singular values of `Q` at `pt`, decreasing.
pub fn q_singular_values(model: &XxzModel, pt: &PhasePoint) -> Result<Vec<f64>> {
    Ok(singular_values(&q_at(model, pt)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{bracket, fd_check_scalar, fd_check_vector, ham_field, lie_scalar};

    fn model() -> XxzModel {
        XxzModel::new(1.0, 2.0, 3.0).unwrap()
    }

    fn uv(x: [f64; 6]) -> PhasePoint {
        PhasePoint::from_real(Chart::Uv, &x).unwrap()
    }

    fn generic() -> PhasePoint {
        PhasePoint::new(
            Chart::Uv,
            vec![
                C::new(0.7, 0.2),
                C::new(-0.3, 0.5),
                C::new(0.4, -0.6),
                C::new(-0.8, 0.1),
                C::new(0.2, 0.9),
                C::new(-0.5, -0.3),
            ],
        )
        .unwrap()
    }

    fn values(m: &XxzModel, p: &PhasePoint) -> [C; 4] {
        let o = uv_observables(m);
        [&o.h0, &o.c2, &o.h1, &o.h2].map(|f| f.eval(p).unwrap())
    }

    #[test]
    fn worked_observable_points() {
        let m = model();
        let cases = [
            ([1.0, 1.0, 0.0, 1.0, 1.0, 0.0], [2.0, 0.0, -16.0, 30.0]),
            ([0.0, 0.0, 1.0, 0.0, 0.0, 1.0], [2.0, 0.0, -12.0, 18.0]),
            ([0.0, 0.0, 1.0, 0.0, 0.0, 0.0], [1.0, -1.0, -2.0, -13.0]),
        ];
        for (x, expect) in cases {
            let v = values(&m, &uv(x));
            for (a, e) in v.iter().zip(expect) {
                assert!((a - C::from(e)).norm() < 1e-13, "{x:?}: {v:?}");
            }
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let m = model();
        let o = uv_observables(&m);
        for f in [&o.h0, &o.c2, &o.h1, &o.h2] {
            assert!(fd_check_scalar(f, &generic()).unwrap() < 1e-6);
        }
        assert!(fd_check_vector(&x1_field(&m), &generic()).unwrap() < 1e-6);
        assert!(fd_check_vector(&z_field(), &generic()).unwrap() < 1e-6);
    }

    #[test]
    fn p1_uv_brackets() {
        let p = generic();
        let f = |i| ScalarField::coordinate(Chart::Uv, i);
        let b1 = bracket(&p1_uv(), &f(U1), &f(Z1), &p).unwrap();
        let b2 = bracket(&p1_uv(), &f(U2), &f(Z2), &p).unwrap();
        assert!((b1 + p.coords()[U1]).norm() < 1e-15);
        assert!((b2 - p.coords()[U2]).norm() < 1e-15);
        assert!(p1_uv()
            .eval(&uv([0.0; 6]))
            .unwrap()
            .iter()
            .all(|c| c.norm() == 0.0));
    }

    #[test]
    fn x1_is_hamiltonian_for_h1() {
        let m = model();
        let p = generic();
        let x = x1_field(&m).eval(&p).unwrap();
        let h = ham_field(&p1_uv(), &uv_observables(&m).h1, &p).unwrap();
        assert!((x - h).camax() < 1e-13);
    }

    #[test]
    fn z_normalization() {
        let m = model();
        let o = uv_observables(&m);
        let p = generic();
        assert!((lie_scalar(&z_field(), &o.h0, &p).unwrap() - 1.0).norm() < 1e-14);
        assert!(lie_scalar(&z_field(), &o.c2, &p).unwrap().norm() < 1e-14);
    }

    #[test]
    fn degenerate_u_rejected() {
        let m = model();
        let p = uv([0.0, 1.0, 0.3, 1.0, 1.0, 0.0]);
        let e = q_at(&m, &p).unwrap_err();
        assert!(e.to_string().contains("degenerate point"));
    }

    #[test]
    fn stackel_first_derivative_nonzero_second_zero() {
        let m = model();
        let (l, r) = (C::new(0.6, -0.4), C::new(1.1, 0.3));
        let d = stackel_derivatives(&m, l, r, &generic()).unwrap();
        assert!(d[1].norm() > 1e-3);
        let res = stackel_condition(&m, l, r, &generic()).unwrap();
        assert!(res.normalized() < 1e-12, "{res:?}");
        let zero = stackel_condition(&m, C::new(0.0, 0.0), r, &generic()).unwrap();
        assert!(zero.abs < 1e-14);
    }

    #[test]
    fn uv_tensors_are_push_forwards() {
        let m = model();
        let p = generic();
        let a = chart_matrix(Chart::M, Chart::Uv).unwrap();
        let mp = so4::chart_map(&p, Chart::M, so4::ScalarMode::Complex).unwrap();
        let f = so4::uv_tensor_factor();
        let t1 = so4::push_forward(&so4::p1_m().eval(&mp).unwrap(), &a) * f;
        let t2 = so4::push_forward(&so4::p2_m(&m.params()).eval(&mp).unwrap(), &a) * f;
        assert!((t1 - p1_uv().eval(&p).unwrap()).camax() < 1e-13);
        assert!((t2 - p2_uv(&m).eval(&p).unwrap()).camax() < 1e-13);
    }

    #[test]
    fn q_is_poisson_with_h0_and_c2_casimirs() {
        use crate::tensor::schouten_residual;
        let m = model();
        let p = generic();
        let q = q_uv(&m);
        assert!(schouten_residual(&q, &q, &p).unwrap().normalized() < 1e-12);
        assert!(schouten_residual(&p1_uv(), &q, &p).unwrap().normalized() < 1e-12);
        let [h0, h1, c2] = q_casimir_residuals(&m, &p).unwrap();
        assert!(h0.normalized() < 1e-13 && c2.normalized() < 1e-13);
        assert!(h1.normalized() > 1e-3);
        let sv = q_singular_values(&m, &p).unwrap();
        assert!(sv[3] > 1e-3 && sv[4] < 1e-12 * sv[0]);
        assert!(involution_residual(&m, &p).unwrap().normalized() < 1e-12);
        let (r, d) = transversality_ii(&m, &p).unwrap();
        assert!(r.normalized() < 1e-12 && d < 1e-12, "{r:?} {d}");
    }

    #[test]
    fn mutation_names_round_trip() {
        for m in Mutation::ALL {
            assert_eq!(Mutation::parse(m.name()).unwrap(), m);
        }
        assert!(Mutation::parse("nope").is_err());
    }
}
