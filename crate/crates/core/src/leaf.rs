//! Generic symplectic leaf in coordinates `(u1, z1, u2, z2)`: restricted
//! tensors, the Nijenhuis operator, Darboux-Nijenhuis coordinates and the
//! separation relations.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{Jet, Scalar, C};
use crate::tensor::{
    bracket_scaled, lie_scalar_iter, matvec_scaled, BivectorField, Chart, PhasePoint, Residual,
    ScalarField, VectorField,
};
use crate::xxz::{self, uv_observables, Mutation, XxzModel, EPS_DEG};

/// Guard on `|lambda2 - lambda1|`.
pub const EPS_COLL: f64 = 1e-6;

/// Tolerance for declaring an iterated Lie derivative identically zero.
pub const DEFORMATION_TOL: f64 = 1e-10;

pub const LU1: usize = 0;
pub const LZ1: usize = 1;
pub const LU2: usize = 2;
pub const LZ2: usize = 3;

/// A point of the leaf `{H0 = h0, C2 = c2}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LeafChart {
    pub coords: [C; 4],
    pub h0: C,
    pub c2: C,
}

impl LeafChart {
    pub fn new(coords: [C; 4], h0: C, c2: C) -> Result<Self> {
        for (name, idx) in [("u1", LU1), ("u2", LU2)] {
            let a = coords[idx].norm();
            if a < EPS_DEG {
                return Err(Error::DegeneratePoint(format!("|{name}| = {a:e}")));
            }
        }
        Ok(LeafChart { coords, h0, c2 })
    }

    /// The leaf through a uv point.
    pub fn project(pt: &PhasePoint) -> Result<Self> {
        xxz::check_uv_domain(pt)?;
        let x = pt.coords();
        LeafChart::new(
            [x[xxz::U1], x[xxz::Z1], x[xxz::U2], x[xxz::Z2]],
            xxz::h0_uv(x),
            xxz::c2_uv(x),
        )
    }

    pub fn point(&self) -> PhasePoint {
        PhasePoint::new(Chart::Leaf, self.coords.to_vec()).expect("four coordinates")
    }

    pub fn embed(&self) -> PhasePoint {
        PhasePoint::new(Chart::Uv, embed_coords(&self.coords, self.h0, self.c2))
            .expect("six coordinates")
    }

    pub fn u1(&self) -> C {
        self.coords[LU1]
    }

    pub fn u2(&self) -> C {
        self.coords[LU2]
    }
}

/// `(u1, v1, z1, u2, v2, z2)` with `v` eliminated through the levels.
pub fn embed_coords<T: Scalar>(y: &[T], h0: T, c2: T) -> Vec<T> {
    let [u1, z1, u2, z2] = [y[LU1], y[LZ1], y[LU2], y[LZ2]];
    let two = T::from_f64(2.0);
    let v1 = (h0 - c2 - two * z1 * z1) / (two * u1);
    let v2 = (h0 + c2 - two * z2 * z2) / (two * u2);
    vec![u1, v1, z1, u2, v2, z2]
}

/// `d(u1, v1, z1, u2, v2, z2) / d(u1, z1, u2, z2)`.
fn embed_jacobian(y: &[C], h0: C, c2: C) -> DMatrix<C> {
    let x = embed_coords(y, h0, c2);
    let mut j = DMatrix::zeros(6, 4);
    j[(xxz::U1, LU1)] = C::new(1.0, 0.0);
    j[(xxz::Z1, LZ1)] = C::new(1.0, 0.0);
    j[(xxz::U2, LU2)] = C::new(1.0, 0.0);
    j[(xxz::Z2, LZ2)] = C::new(1.0, 0.0);
    j[(xxz::V1, LU1)] = -x[xxz::V1] / y[LU1];
    j[(xxz::V1, LZ1)] = y[LZ1] * -2.0 / y[LU1];
    j[(xxz::V2, LU2)] = -x[xxz::V2] / y[LU2];
    j[(xxz::V2, LZ2)] = y[LZ2] * -2.0 / y[LU2];
    j
}

/// Pull-back of a uv-chart function to the leaf with the given levels.
pub fn pullback(f: &ScalarField, h0: C, c2: C) -> ScalarField {
    let (fv, fg) = (f.clone(), f.clone());
    ScalarField::new(
        Chart::Leaf,
        move |y: &[Jet]| fv.jet(&embed_coords(y, Jet::constant(h0), Jet::constant(c2))),
        move |y: &[C]| embed_jacobian(y, h0, c2).transpose() * fg.grad_at(&embed_coords(y, h0, c2)),
    )
}

fn leaf_linear(entries: impl Fn(C, C) -> [(usize, usize, C); 4]) -> BivectorField {
    let basis = (0..4)
        .map(|l| {
            let u1 = C::from(if l == LU1 { 1.0 } else { 0.0 });
            let u2 = C::from(if l == LU2 { 1.0 } else { 0.0 });
            let mut m = DMatrix::zeros(4, 4);
            for (i, j, e) in entries(u1, u2) {
                m[(i, j)] += e;
                m[(j, i)] -= e;
            }
            m
        })
        .collect();
    BivectorField::linear(Chart::Leaf, basis)
}

/// Restriction of `P1` to the leaf.
pub fn leaf_p() -> BivectorField {
    let z = C::new(0.0, 0.0);
    leaf_linear(move |u1, u2| [(0, 1, -u1), (2, 3, u2), (0, 2, z), (1, 3, z)])
}

/// Restriction of `Q` to the leaf.
pub fn leaf_q(model: &XxzModel) -> BivectorField {
    let (m1, m2, m3) = (model.mu1, model.mu2, model.mu3);
    leaf_linear(move |u1, u2| {
        [
            (0, 1, -(u2 * m3 + u1 * m1)),
            (0, 3, u1 * m2 - u2 * m3),
            (1, 2, u2 * m2 - u1 * m3),
            (2, 3, u2 * m1 + u1 * m3),
        ]
    })
}

/// Closed-form restricted `(P, Q)` at a leaf point.
pub fn restricted_tensors(model: &XxzModel, leaf: &LeafChart) -> (DMatrix<C>, DMatrix<C>) {
    let y = leaf.coords;
    (leaf_p().at(&y), leaf_q(model).at(&y))
}

/// Restricted tensors as sub-brackets of the uv-chart `P1` and `Q` among
/// the leaf coordinate functions at the embedded point.
pub fn restricted_tensors_oracle(
    model: &XxzModel,
    leaf: &LeafChart,
) -> Result<(DMatrix<C>, DMatrix<C>)> {
    let pt = leaf.embed();
    let p1 = xxz::p1_uv().eval(&pt)?;
    let q = xxz::q_at(model, &pt)?;
    let idx = [xxz::U1, xxz::Z1, xxz::U2, xxz::Z2];
    let sub = |m: &DMatrix<C>| DMatrix::from_fn(4, 4, |i, j| m[(idx[i], idx[j])]);
    Ok((sub(&p1), sub(&q)))
}

#[derive(Clone, Debug)]
pub struct Nijenhuis {
    /// `N* = P^{-1} Q` in closed form, acting on gradient column vectors.
    pub n_star: DMatrix<C>,
    pub lambda1: C,
    pub lambda2: C,
}

pub fn lambda2_of<T: Scalar>(model: &XxzModel, u1: T, u2: T) -> T {
    T::from_f64(model.mu1 - model.mu2) + T::from_f64(model.mu3) * (u1 / u2 + u2 / u1)
}

/// Closed-form `N*`.
pub fn n_star_closed(model: &XxzModel, u1: C, u2: C) -> DMatrix<C> {
    let (m1, m2, m3) = (model.mu1, model.mu2, model.mu3);
    let r = u2 / u1;
    let s = u1 / u2;
    let z = C::new(0.0, 0.0);
    let e02 = if model.mutated(Mutation::NijenhuisEntrySign) {
        -(r * m2 - m3)
    } else {
        r * m2 - m3
    };
    #[rustfmt::skip]
    let rows = [
        [r * m3 + m1, z, e02, z],
        [z, r * m3 + m1, z, r * m3 - m2],
        [s * m2 - m3, z, s * m3 + m1, z],
        [z, s * m3 - m2, z, s * m3 + m1],
    ];
    DMatrix::from_fn(4, 4, |i, j| rows[i][j])
}

pub fn nijenhuis(model: &XxzModel, leaf: &LeafChart) -> Result<Nijenhuis> {
    let (u1, u2) = (leaf.u1(), leaf.u2());
    let lambda1 = C::from(model.lambda1());
    let lambda2 = lambda2_of(model, u1, u2);
    let gap = (lambda2 - lambda1).norm();
    if gap < EPS_COLL {
        return Err(Error::EigenvalueCollision(gap));
    }
    Ok(Nijenhuis {
        n_star: n_star_closed(model, u1, u2),
        lambda1,
        lambda2,
    })
}

/// `P^{-1} Q` from the restricted tensors.
pub fn n_star_numeric(model: &XxzModel, leaf: &LeafChart) -> Result<DMatrix<C>> {
    let (p, q) = restricted_tensors(model, leaf);
    let pinv = p
        .try_inverse()
        .ok_or_else(|| Error::Singular("restricted P".into()))?;
    Ok(pinv * q)
}

/// Largest distance between the numerical eigenvalues of `n` and the
/// multiset `{l1, l1, l2, l2}`, relative to `1 + max |l|`.
pub fn spectrum_defect(n: &DMatrix<C>, l1: C, l2: C) -> Result<f64> {
    let ev = n
        .clone()
        .schur()
        .eigenvalues()
        .ok_or_else(|| Error::Singular("Schur form did not converge".into()))?;
    let mut pool: Vec<C> = ev.iter().copied().collect();
    let mut worst: f64 = 0.0;
    for target in [l1, l1, l2, l2] {
        let (idx, d) = pool
            .iter()
            .enumerate()
            .map(|(i, e)| (i, (e - target).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("four eigenvalues");
        pool.swap_remove(idx);
        worst = worst.max(d);
    }
    Ok(worst / (1.0 + l1.norm().max(l2.norm())))
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct AuxFunctions {
    pub g: C,
    pub f: C,
    pub l: C,
    pub theta1: C,
    pub p1sum: C,
}

pub fn g_of<T: Scalar>(u1: T, u2: T) -> T {
    u2 / u1 - u1 / u2
}

pub fn f_of<T: Scalar>(model: &XxzModel, u1: T, u2: T) -> T {
    T::from_f64(-2.0 * model.mu2) + T::from_f64(model.mu3) * (u1 / u2 + u2 / u1)
}

pub fn l_of<T: Scalar>(model: &XxzModel, y: &[T]) -> T {
    let [u1, z1, u2, z2] = [y[LU1], y[LZ1], y[LU2], y[LZ2]];
    T::from_f64(model.mu3) * (z2 * u1 * u1 + z1 * u2 * u2)
        - T::from_f64(model.mu2) * u1 * u2 * (z1 + z2)
}

pub fn theta1_of<T: Scalar>(model: &XxzModel, u1: T, u2: T) -> T {
    (T::from_f64(model.mu3) * (u1 * u1 + u2 * u2)).scale(0.5) - T::from_f64(model.mu2) * u1 * u2
}

pub fn p1sum_of<T: Scalar>(model: &XxzModel, u1: T, u2: T) -> T {
    T::from_f64(2.0 * model.mu1) + T::from_f64(model.mu3) * (u1 / u2 + u2 / u1)
}

pub fn aux(model: &XxzModel, leaf: &LeafChart) -> AuxFunctions {
    let (u1, u2) = (leaf.u1(), leaf.u2());
    AuxFunctions {
        g: g_of(u1, u2),
        f: f_of(model, u1, u2),
        l: l_of(model, &leaf.coords),
        theta1: theta1_of(model, u1, u2),
        p1sum: p1sum_of(model, u1, u2),
    }
}

fn grad4(d: [C; 4]) -> DVector<C> {
    DVector::from_row_slice(&d)
}

/// `d/du1` and `d/du2` of `u1/u2 + u2/u1`.
fn d_ratio_sum(u1: C, u2: C) -> (C, C) {
    (1.0 / u2 - u2 / (u1 * u1), 1.0 / u1 - u1 / (u2 * u2))
}

/// The Darboux-Nijenhuis coordinates as leaf-chart fields.
#[derive(Clone)]
pub struct DnFields {
    pub zeta1: ScalarField,
    pub xi1: ScalarField,
    pub lambda2: ScalarField,
    pub xi2: ScalarField,
    pub theta1: ScalarField,
}

pub fn dn_fields(model: &XxzModel) -> DnFields {
    let m = *model;
    let (m2, m3) = (m.mu2, m.mu3);
    let z = C::new(0.0, 0.0);
    let zeta1 = ScalarField::new(
        Chart::Leaf,
        |y| y[LZ2] - y[LZ1],
        move |_| grad4([z, C::from(-1.0), z, C::from(1.0)]),
    );
    let dtheta = move |y: &[C]| grad4([y[LU1] * m3 - y[LU2] * m2, z, y[LU2] * m3 - y[LU1] * m2, z]);
    let theta1 = ScalarField::new(Chart::Leaf, move |y| theta1_of(&m, y[LU1], y[LU2]), dtheta);
    let xi1 = ScalarField::new(
        Chart::Leaf,
        move |y| theta1_of(&m, y[LU1], y[LU2]).ln().scale(-0.5),
        move |y| dtheta(y) * (-0.5 / theta1_of(&m, y[LU1], y[LU2])),
    );
    let lambda2 = ScalarField::new(
        Chart::Leaf,
        move |y| lambda2_of(&m, y[LU1], y[LU2]),
        move |y| {
            let (a, b) = d_ratio_sum(y[LU1], y[LU2]);
            grad4([a * m3, z, b * m3, z])
        },
    );
    let xi2 = ScalarField::new(
        Chart::Leaf,
        move |y| xi2_closed(&m, y),
        move |y| {
            let [u1, z1, u2, z2] = [y[LU1], y[LZ1], y[LU2], y[LZ2]];
            let f = f_of(&m, u1, u2);
            let (a, b) = d_ratio_sum(u1, u2);
            let (fu1, fu2) = (a * m3, b * m3);
            let diff = u2 * u2 - u1 * u1;
            let d = diff * f * m3;
            let dd_u1 = (u1 * f * -2.0 + diff * fu1) * m3;
            let dd_u2 = (u2 * f * 2.0 + diff * fu2) * m3;
            let l = l_of(&m, y);
            let dl = [
                z2 * u1 * (2.0 * m3) - u2 * (z1 + z2) * m2,
                u2 * u2 * m3 - u1 * u2 * m2,
                z1 * u2 * (2.0 * m3) - u1 * (z1 + z2) * m2,
                u1 * u1 * m3 - u1 * u2 * m2,
            ];
            let q = l / d;
            grad4([
                (dl[0] - q * dd_u1) / d,
                dl[1] / d,
                (dl[2] - q * dd_u2) / d,
                dl[3] / d,
            ])
        },
    );
    DnFields {
        zeta1,
        xi1,
        lambda2,
        xi2,
        theta1,
    }
}

/// `xi2 = L / (mu3 u1 u2 G F)`.
pub fn xi2_closed<T: Scalar>(model: &XxzModel, y: &[T]) -> T {
    let (u1, u2) = (y[LU1], y[LU2]);
    l_of(model, y) / (T::from_f64(model.mu3) * u1 * u2 * g_of(u1, u2) * f_of(model, u1, u2))
}

/// Guards shared by the DN chart and the second separation relation.
pub fn check_separation_domain(model: &XxzModel, u1: C, u2: C) -> Result<()> {
    if model.mu3.abs() < EPS_DEG {
        return Err(Error::SeparationChartDegenerate(format!(
            "|mu3| = {:e}",
            model.mu3.abs()
        )));
    }
    let g = g_of(u1, u2).norm();
    if g < EPS_DEG {
        return Err(Error::SeparationChartDegenerate(format!("|G| = {g:e}")));
    }
    let f = f_of(model, u1, u2).norm();
    if f < EPS_DEG {
        return Err(Error::SeparationChartDegenerate(format!("|F| = {f:e}")));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct DnChart {
    pub zeta1: C,
    pub xi1: C,
    pub lambda2: C,
    pub xi2: C,
}

pub fn dn_chart(model: &XxzModel, leaf: &LeafChart) -> Result<DnChart> {
    check_dn_domain(model, leaf)?;
    let f = dn_fields(model);
    let p = leaf.point();
    Ok(DnChart {
        zeta1: f.zeta1.eval(&p)?,
        xi1: f.xi1.eval(&p)?,
        lambda2: f.lambda2.eval(&p)?,
        xi2: f.xi2.eval(&p)?,
    })
}

/// Guards on `G`, `F`, `theta1` and the eigenvalue gap.
pub fn check_dn_domain(model: &XxzModel, leaf: &LeafChart) -> Result<()> {
    check_separation_domain(model, leaf.u1(), leaf.u2())?;
    let th = theta1_of(model, leaf.u1(), leaf.u2()).norm();
    if th < EPS_DEG {
        return Err(Error::ThetaDegenerate(th));
    }
    nijenhuis(model, leaf).map(|_| ())
}

/// Bracket matrices of `(zeta1, xi1, lambda2, xi2)` under the restricted
/// `P` and `Q`, with the largest summand of each.
pub fn dn_brackets(model: &XxzModel, leaf: &LeafChart) -> Result<[(DMatrix<C>, f64); 2]> {
    check_dn_domain(model, leaf)?;
    let f = dn_fields(model);
    let fs = [&f.zeta1, &f.xi1, &f.lambda2, &f.xi2];
    let p = leaf.point();
    let mut out = Vec::new();
    for t in [leaf_p(), leaf_q(model)] {
        let mut m = DMatrix::zeros(4, 4);
        let mut s: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                let (b, sc) = bracket_scaled(&t, fs[i], fs[j], &p)?;
                m[(i, j)] = b;
                s = s.max(sc);
            }
        }
        out.push((m, s));
    }
    let q = out.pop().expect("two");
    let pm = out.pop().expect("two");
    Ok([pm, q])
}

/// Expected bracket matrix `diag(l1 J, l2 J)` with `J = [[0, 1], [-1, 0]]`.
pub fn canonical_form(l1: C, l2: C) -> DMatrix<C> {
    let mut m = DMatrix::zeros(4, 4);
    m[(0, 1)] = l1;
    m[(1, 0)] = -l1;
    m[(2, 3)] = l2;
    m[(3, 2)] = -l2;
    m
}

/// Worst `N* grad f - lambda grad f` over the four DN coordinates.
pub fn eigenform_residual(model: &XxzModel, leaf: &LeafChart) -> Result<Residual> {
    let n = nijenhuis(model, leaf)?;
    check_dn_domain(model, leaf)?;
    let f = dn_fields(model);
    let p = leaf.point();
    let mut worst = Residual::zero();
    for (field, lam) in [
        (&f.zeta1, n.lambda1),
        (&f.xi1, n.lambda1),
        (&f.lambda2, n.lambda2),
        (&f.xi2, n.lambda2),
    ] {
        let g = field.gradient(&p)?;
        let (ng, s) = matvec_scaled(&n.n_star, &g);
        let rhs = &g * lam;
        worst = worst.worst(Residual::vector(&ng, &rhs, s));
    }
    Ok(worst)
}

/// `Y = mu3 G (d/dz1 + d/dz2)`.
pub fn y_field(model: &XxzModel) -> VectorField {
    let m3 = model.mu3;
    VectorField::new(
        Chart::Leaf,
        move |y: &[Jet]| {
            let g = g_of(y[LU1], y[LU2]).scale(m3);
            let z = Jet::zero();
            vec![z, g, z, g]
        },
        move |y| {
            let (u1, u2) = (y[LU1], y[LU2]);
            let gu1 = (-u2 / (u1 * u1) - 1.0 / u2) * m3;
            let gu2 = (1.0 / u1 + u1 / (u2 * u2)) * m3;
            let mut j = DMatrix::zeros(4, 4);
            for row in [LZ1, LZ2] {
                j[(row, LU1)] = gu1;
                j[(row, LU2)] = gu2;
            }
            j
        },
    )
}

/// `-P d(p1sum)` against the closed-form `Y`.
pub fn y_identity_residual(model: &XxzModel, leaf: &LeafChart) -> Result<Residual> {
    let m = *model;
    let p1sum = ScalarField::new(
        Chart::Leaf,
        move |y| p1sum_of(&m, y[LU1], y[LU2]),
        move |y| {
            let (a, b) = d_ratio_sum(y[LU1], y[LU2]);
            grad4([a * m.mu3, C::new(0.0, 0.0), b * m.mu3, C::new(0.0, 0.0)])
        },
    );
    let p = leaf.point();
    let (v, s) = matvec_scaled(&leaf_p().eval(&p)?, &p1sum.gradient(&p)?);
    Ok(Residual::vector(&(-v), &y_field(model).eval(&p)?, s))
}

/// `H(rho) = rho^2 H0 + rho H1 + H2` on the leaf.
pub fn h_rho_leaf(model: &XxzModel, leaf: &LeafChart, rho: C) -> ScalarField {
    let o = uv_observables(model);
    let pb = |f: &ScalarField| pullback(f, leaf.h0, leaf.c2);
    pb(&o.h0)
        .scale(rho * rho)
        .add(&pb(&o.h1).scale(rho))
        .add(&pb(&o.h2))
}

#[derive(Clone, Debug, Serialize)]
pub struct Deformation {
    /// `-P d(p1sum)` against the closed-form `Y`.
    pub y_identity: Residual,
    /// `L_Y H` against `4 mu3 (rho - lambda1) G L / (u1 u2)` at `rho = lambda2`.
    pub factorization: Residual,
    /// Number `n` of Lie derivatives after which `L_Y^n H` vanishes in `rho`.
    pub order: usize,
    /// Largest `L_Y^n H` seen at the sampled `rho`.
    pub termination: Residual,
    pub xi2_algorithmic: C,
    pub xi2_closed: C,
}

/// Builds `xi2` by the deformation recipe: differentiate `H(rho)` along `Y`
/// until it vanishes identically in `rho`, then take the ratio of the last
/// two nonvanishing derivatives at `rho = lambda2`.
pub fn deformation_xi2(model: &XxzModel, leaf: &LeafChart) -> Result<Deformation> {
    check_dn_domain(model, leaf)?;
    let y = y_field(model);
    let p = leaf.point();
    let l1 = model.lambda1();
    let l2 = lambda2_of(model, leaf.u1(), leaf.u2());
    let max_order = crate::scalar::JET_LEN - 1;

    // H is quadratic in rho, so three samples decide vanishing identically.
    let rhos = [l2, C::from(l1), C::new(0.37, -1.21)];
    let mut series = Vec::new();
    for &rho in &rhos {
        series.push(lie_scalar_iter(
            &y,
            &h_rho_leaf(model, leaf, rho),
            &p,
            max_order,
        )?);
    }
    let scale = series
        .iter()
        .flat_map(|s| s.iter().map(|c| c.norm()))
        .fold(0.0, f64::max);
    let vanishes = |k: usize| {
        series
            .iter()
            .all(|s| Residual::new(s[k].norm(), scale).normalized() <= DEFORMATION_TOL)
    };
    let order = (2..=max_order)
        .find(|&k| vanishes(k))
        .ok_or(Error::DeformationDidNotTerminate(max_order))?;
    let termination =
        Residual::worst_of(series.iter().map(|s| Residual::new(s[order].norm(), scale)));
    let at_l2 = &series[0];
    let xi2_algorithmic = at_l2[order - 2] / at_l2[order - 1];

    let a = aux(model, leaf);
    let expected = (l2 - l1) * (4.0 * model.mu3) * a.g * a.l / (leaf.u1() * leaf.u2());
    let factorization = Residual::new((at_l2[1] - expected).norm(), scale.max(expected.norm()));

    Ok(Deformation {
        y_identity: y_identity_residual(model, leaf)?,
        factorization,
        order,
        termination,
        xi2_algorithmic,
        xi2_closed: xi2_closed(model, &leaf.coords),
    })
}

/// `L_Y(u1 u2)`, `L_Y G` and `L_Y L - mu3 G u1 u2 F`.
pub fn y_derivative_identities(model: &XxzModel, leaf: &LeafChart) -> Result<[Residual; 3]> {
    let m = *model;
    let y = y_field(model);
    let p = leaf.point();
    let z = C::new(0.0, 0.0);
    let uu = ScalarField::new(
        Chart::Leaf,
        |y| y[LU1] * y[LU2],
        move |y| grad4([y[LU2], z, y[LU1], z]),
    );
    let g = ScalarField::new(
        Chart::Leaf,
        |y| g_of(y[LU1], y[LU2]),
        move |y| {
            let (u1, u2) = (y[LU1], y[LU2]);
            grad4([-u2 / (u1 * u1) - 1.0 / u2, z, 1.0 / u1 + u1 / (u2 * u2), z])
        },
    );
    let l = ScalarField::new(
        Chart::Leaf,
        move |y| l_of(&m, y),
        move |y| {
            let [u1, z1, u2, z2] = [y[LU1], y[LZ1], y[LU2], y[LZ2]];
            grad4([
                z2 * u1 * (2.0 * m.mu3) - u2 * (z1 + z2) * m.mu2,
                u2 * u2 * m.mu3 - u1 * u2 * m.mu2,
                z1 * u2 * (2.0 * m.mu3) - u1 * (z1 + z2) * m.mu2,
                u1 * u1 * m.mu3 - u1 * u2 * m.mu2,
            ])
        },
    );
    let d = |f: &ScalarField| lie_scalar_iter(&y, f, &p, 1).map(|v| (v[0], v[1]));
    let (uu0, luu) = d(&uu)?;
    let (g0, lg) = d(&g)?;
    let (_, ll) = d(&l)?;
    let a = aux(model, leaf);
    let expect = a.g * uu0 * a.f * m.mu3;
    Ok([
        Residual::new(luu.norm(), uu0.norm()),
        Residual::new(lg.norm(), g0.norm()),
        Residual::scalar(ll, expect),
    ])
}

/// Coefficients `(alpha, beta, gamma1, gamma2)` of the first separation
/// relation.
pub fn phi1_coefficients(model: &XxzModel) -> Result<[f64; 4]> {
    let l1 = model.lambda1();
    if l1.abs() < EPS_DEG {
        return Err(Error::DegenerateConstantEigenvalue(l1));
    }
    let (m2, m3) = (model.mu2, model.mu3);
    Ok([2.0 * (m3 * m3 - m2 * m2) / l1, 1.0 / l1, l1, 0.0])
}

/// `Phi1 = alpha zeta1^2 + H1 + beta H2 + gamma1 H0 + gamma2 C2`.
pub fn phi1(model: &XxzModel, pt: &PhasePoint) -> Result<Residual> {
    let [alpha, beta, g1, g2] = phi1_coefficients(model)?;
    let x = require_uv(pt)?;
    let zeta = x[xxz::Z2] - x[xxz::Z1];
    let terms = [
        zeta * zeta * alpha,
        xxz::h1_uv(model, x),
        xxz::h2_uv(model, x) * beta,
        xxz::h0_uv(x) * g1,
        xxz::c2_uv(x) * g2,
    ];
    Ok(sum_residual(&terms))
}

/// `Phi2 = p xi2^2 + H(lambda2) - mu3 F G C2` with `p = -2 mu3^2 F^2 G^2`.
pub fn phi2(model: &XxzModel, pt: &PhasePoint) -> Result<Residual> {
    phi1_coefficients(model)?;
    let x = require_uv(pt)?;
    xxz::check_uv_domain(pt)?;
    let (u1, u2) = (x[xxz::U1], x[xxz::U2]);
    check_separation_domain(model, u1, u2)?;
    let y = [u1, x[xxz::Z1], u2, x[xxz::Z2]];
    let (g, f) = (g_of(u1, u2), f_of(model, u1, u2));
    let l2 = lambda2_of(model, u1, u2);
    let xi2 = xi2_closed(model, &y);
    let m3 = model.mu3;
    let terms = [
        f * f * g * g * xi2 * xi2 * (-2.0 * m3 * m3),
        l2 * l2 * xxz::h0_uv(x),
        l2 * xxz::h1_uv(model, x),
        xxz::h2_uv(model, x),
        -(f * g * xxz::c2_uv(x) * m3),
    ];
    Ok(sum_residual(&terms))
}

pub fn separation_residuals(model: &XxzModel, pt: &PhasePoint) -> Result<(Residual, Residual)> {
    Ok((phi1(model, pt)?, phi2(model, pt)?))
}

fn sum_residual(terms: &[C]) -> Residual {
    let total: C = terms.iter().sum();
    let scale = terms.iter().map(|t| t.norm()).fold(0.0, f64::max);
    Residual::new(total.norm(), scale)
}

fn require_uv(pt: &PhasePoint) -> Result<&[C]> {
    if pt.chart() != Chart::Uv {
        return Err(Error::ChartMismatch {
            expected: Chart::Uv,
            found: pt.chart(),
        });
    }
    Ok(pt.coords())
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct GeneralizedLenard {
    /// Least-squares `c` in `Q dH1 - P dH2 = c P dH1`.
    pub c1: C,
    pub c1_residual: Residual,
    /// Least-squares `c` in `Q dH2 = c P dH1`.
    pub c2: C,
    pub c2_residual: Residual,
    pub lambda1: C,
    pub lambda2: C,
}

/// Fitted coefficients of the generalized Lenard relations on the leaf;
/// expected `c1 = lambda1 + lambda2`, `c2 = -lambda1 lambda2`.
pub fn generalized_lenard(model: &XxzModel, leaf: &LeafChart) -> Result<GeneralizedLenard> {
    let o = uv_observables(model);
    let p = leaf.point();
    let dh1 = pullback(&o.h1, leaf.h0, leaf.c2).gradient(&p)?;
    let dh2 = pullback(&o.h2, leaf.h0, leaf.c2).gradient(&p)?;
    let pm = leaf_p().eval(&p)?;
    let qm = leaf_q(model).eval(&p)?;
    let (pdh1, s1) = matvec_scaled(&pm, &dh1);
    let (pdh2, s2) = matvec_scaled(&pm, &dh2);
    let (qdh1, s3) = matvec_scaled(&qm, &dh1);
    let (qdh2, s4) = matvec_scaled(&qm, &dh2);
    let fit = |target: &DVector<C>, s: f64| {
        let c = pdh1.dotc(target) / pdh1.dotc(&pdh1);
        (c, Residual::vector(target, &(&pdh1 * c), s))
    };
    let (c1, c1_residual) = fit(&(qdh1 - pdh2), s1.max(s2).max(s3));
    let (c2, c2_residual) = fit(&qdh2, s1.max(s4));
    Ok(GeneralizedLenard {
        c1,
        c1_residual,
        c2,
        c2_residual,
        lambda1: C::from(model.lambda1()),
        lambda2: lambda2_of(model, leaf.u1(), leaf.u2()),
    })
}
