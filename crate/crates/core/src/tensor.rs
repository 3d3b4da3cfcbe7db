//! Differential-tensor calculus on a single chart.
//!
//! Fields are immutable handles bundling a value map with an exact,
//! hand-coded first-derivative map. Scalar and vector fields evaluate on
//! [`Jet`]s as well, which gives exact iterated Lie derivatives along a flow
//! (see [`lie_scalar_iter`]). Finite differences are only used by the
//! `fd_check_*` cross-checks.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Jet, Scalar, C, JET_LEN};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Chart {
    /// `(m12, m13, m14, m23, m24, m34)` on so(4).
    M,
    /// `(x1, y1, z1, x2, y2, z2)` on so(3) + so(3).
    Split,
    /// `(u1, v1, z1, u2, v2, z2)` with `u = x + i y`, `v = x - i y`.
    Uv,
    /// `(u1, z1, u2, z2)` on a symplectic leaf.
    Leaf,
}

impl Chart {
    pub fn dim(self) -> usize {
        match self {
            Chart::Leaf => 4,
            _ => 6,
        }
    }
}

impl fmt::Display for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Chart::M => "M",
            Chart::Split => "SPLIT",
            Chart::Uv => "UV",
            Chart::Leaf => "LEAF",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhasePoint {
    chart: Chart,
    coords: Vec<C>,
}

impl PhasePoint {
    pub fn new(chart: Chart, coords: Vec<C>) -> Result<Self> {
        if coords.len() != chart.dim() {
            return Err(Error::DimensionMismatch(coords.len(), chart.dim()));
        }
        Ok(PhasePoint { chart, coords })
    }

    pub fn from_real(chart: Chart, coords: &[f64]) -> Result<Self> {
        Self::new(chart, coords.iter().map(|&x| C::new(x, 0.0)).collect())
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn coords(&self) -> &[C] {
        &self.coords
    }

    pub fn max_imag(&self) -> f64 {
        self.coords.iter().map(|c| c.im.abs()).fold(0.0, f64::max)
    }

    pub fn norm_inf(&self) -> f64 {
        self.coords.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.coords.iter().map(|c| c.re).collect()
    }
}

fn check_chart(expected: Chart, found: Chart) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::ChartMismatch { expected, found })
    }
}

pub(crate) fn lift(x: &[C]) -> Vec<Jet> {
    x.iter().map(|&c| Jet::constant(c)).collect()
}

type JetScalarMap = Arc<dyn Fn(&[Jet]) -> Jet + Send + Sync>;
type GradMap = Arc<dyn Fn(&[C]) -> DVector<C> + Send + Sync>;
type JetVectorMap = Arc<dyn Fn(&[Jet]) -> Vec<Jet> + Send + Sync>;
type JacMap = Arc<dyn Fn(&[C]) -> DMatrix<C> + Send + Sync>;
type BivectorMap = Arc<dyn Fn(&[C]) -> DMatrix<C> + Send + Sync>;
type BivectorJacMap = Arc<dyn Fn(&[C]) -> Vec<DMatrix<C>> + Send + Sync>;

/// Scalar function with exact gradient.
#[derive(Clone)]
pub struct ScalarField {
    chart: Chart,
    value: JetScalarMap,
    grad: GradMap,
}

impl ScalarField {
    pub fn new<V, G>(chart: Chart, value: V, grad: G) -> Self
    where
        V: Fn(&[Jet]) -> Jet + Send + Sync + 'static,
        G: Fn(&[C]) -> DVector<C> + Send + Sync + 'static,
    {
        ScalarField {
            chart,
            value: Arc::new(value),
            grad: Arc::new(grad),
        }
    }

    pub fn constant(chart: Chart, c: C) -> Self {
        let n = chart.dim();
        Self::new(chart, move |_| Jet::constant(c), move |_| DVector::zeros(n))
    }

    /// The i-th coordinate function of the chart.
    pub fn coordinate(chart: Chart, i: usize) -> Self {
        let n = chart.dim();
        Self::new(
            chart,
            move |x| x[i],
            move |_| {
                let mut g = DVector::zeros(n);
                g[i] = C::new(1.0, 0.0);
                g
            },
        )
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn at(&self, x: &[C]) -> C {
        (self.value)(&lift(x)).value()
    }

    pub fn grad_at(&self, x: &[C]) -> DVector<C> {
        (self.grad)(x)
    }

    pub fn jet(&self, x: &[Jet]) -> Jet {
        (self.value)(x)
    }

    pub fn eval(&self, pt: &PhasePoint) -> Result<C> {
        check_chart(self.chart, pt.chart)?;
        Ok(self.at(&pt.coords))
    }

    pub fn gradient(&self, pt: &PhasePoint) -> Result<DVector<C>> {
        check_chart(self.chart, pt.chart)?;
        Ok(self.grad_at(&pt.coords))
    }

    pub fn add(&self, other: &ScalarField) -> ScalarField {
        let (a, b) = (self.clone(), other.clone());
        let (ga, gb) = (self.clone(), other.clone());
        ScalarField::new(
            self.chart,
            move |x| a.jet(x) + b.jet(x),
            move |x| ga.grad_at(x) + gb.grad_at(x),
        )
    }

    pub fn scale(&self, k: C) -> ScalarField {
        let (a, ga) = (self.clone(), self.clone());
        ScalarField::new(
            self.chart,
            move |x| a.jet(x) * Jet::constant(k),
            move |x| ga.grad_at(x) * k,
        )
    }

    /// Pointwise product, gradient by the product rule.
    pub fn mul(&self, other: &ScalarField) -> ScalarField {
        let (a, b) = (self.clone(), other.clone());
        let (ga, gb) = (self.clone(), other.clone());
        ScalarField::new(
            self.chart,
            move |x| a.jet(x) * b.jet(x),
            move |x| ga.grad_at(x) * gb.at(x) + gb.grad_at(x) * ga.at(x),
        )
    }
}

/// Vector field with exact Jacobian `jac[(i, l)] = d_l X^i`.
#[derive(Clone)]
pub struct VectorField {
    chart: Chart,
    value: JetVectorMap,
    jac: JacMap,
}

impl VectorField {
    pub fn new<V, J>(chart: Chart, value: V, jac: J) -> Self
    where
        V: Fn(&[Jet]) -> Vec<Jet> + Send + Sync + 'static,
        J: Fn(&[C]) -> DMatrix<C> + Send + Sync + 'static,
    {
        VectorField {
            chart,
            value: Arc::new(value),
            jac: Arc::new(jac),
        }
    }

    pub fn constant(chart: Chart, v: Vec<C>) -> Self {
        let n = chart.dim();
        VectorField::new(
            chart,
            move |_| v.iter().map(|&c| Jet::constant(c)).collect(),
            move |_| DMatrix::zeros(n, n),
        )
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn at(&self, x: &[C]) -> DVector<C> {
        DVector::from_iterator(x.len(), (self.value)(&lift(x)).iter().map(|j| j.value()))
    }

    pub fn jac_at(&self, x: &[C]) -> DMatrix<C> {
        (self.jac)(x)
    }

    pub fn jet(&self, x: &[Jet]) -> Vec<Jet> {
        (self.value)(x)
    }

    pub fn eval(&self, pt: &PhasePoint) -> Result<DVector<C>> {
        check_chart(self.chart, pt.chart)?;
        Ok(self.at(&pt.coords))
    }

    pub fn jacobian(&self, pt: &PhasePoint) -> Result<DMatrix<C>> {
        check_chart(self.chart, pt.chart)?;
        Ok(self.jac_at(&pt.coords))
    }
}

/// Bivector field with exact first partials `jac[l][(i, j)] = d_l P^{ij}`.
#[derive(Clone)]
pub struct BivectorField {
    chart: Chart,
    value: BivectorMap,
    jac: BivectorJacMap,
}

impl BivectorField {
    pub fn new<V, J>(chart: Chart, value: V, jac: J) -> Self
    where
        V: Fn(&[C]) -> DMatrix<C> + Send + Sync + 'static,
        J: Fn(&[C]) -> Vec<DMatrix<C>> + Send + Sync + 'static,
    {
        BivectorField {
            chart,
            value: Arc::new(value),
            jac: Arc::new(jac),
        }
    }

    /// Field whose entries are linear in the coordinates: `P(x) = sum_l x_l B_l`.
    pub fn linear(chart: Chart, basis: Vec<DMatrix<C>>) -> Self {
        let b = Arc::new(basis);
        let b2 = b.clone();
        let n = chart.dim();
        BivectorField::new(
            chart,
            move |x| {
                let mut p = DMatrix::zeros(n, n);
                for (xl, bl) in x.iter().zip(b.iter()) {
                    p += bl * *xl;
                }
                p
            },
            move |_| b2.as_ref().clone(),
        )
    }

    pub fn constant(chart: Chart, p: DMatrix<C>) -> Self {
        let n = chart.dim();
        BivectorField::new(
            chart,
            move |_| p.clone(),
            move |_| vec![DMatrix::zeros(n, n); n],
        )
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn at(&self, x: &[C]) -> DMatrix<C> {
        (self.value)(x)
    }

    pub fn jac_at(&self, x: &[C]) -> Vec<DMatrix<C>> {
        (self.jac)(x)
    }

    pub fn eval(&self, pt: &PhasePoint) -> Result<DMatrix<C>> {
        check_chart(self.chart, pt.chart)?;
        Ok(self.at(&pt.coords))
    }

    pub fn jacobian(&self, pt: &PhasePoint) -> Result<Vec<DMatrix<C>>> {
        check_chart(self.chart, pt.chart)?;
        Ok(self.jac_at(&pt.coords))
    }

    /// `a P + b Q`.
    pub fn combine(&self, a: C, other: &BivectorField, b: C) -> BivectorField {
        let (p, q) = (self.clone(), other.clone());
        let (pj, qj) = (self.clone(), other.clone());
        BivectorField::new(
            self.chart,
            move |x| p.at(x) * a + q.at(x) * b,
            move |x| {
                pj.jac_at(x)
                    .into_iter()
                    .zip(qj.jac_at(x))
                    .map(|(dp, dq)| dp * a + dq * b)
                    .collect()
            },
        )
    }

    pub fn scale(&self, a: C) -> BivectorField {
        let (p, pj) = (self.clone(), self.clone());
        BivectorField::new(
            self.chart,
            move |x| p.at(x) * a,
            move |x| pj.jac_at(x).into_iter().map(|d| d * a).collect(),
        )
    }

    /// The bivector field `X ^ Z`.
    pub fn wedge_of(x_field: &VectorField, z_field: &VectorField) -> BivectorField {
        let (xv, zv) = (x_field.clone(), z_field.clone());
        let (xj, zj) = (x_field.clone(), z_field.clone());
        let n = x_field.chart.dim();
        BivectorField::new(
            x_field.chart,
            move |x| wedge_vectors(&xv.at(x), &zv.at(x)),
            move |x| {
                let (xa, za) = (xj.at(x), zj.at(x));
                let (dx, dz) = (xj.jac_at(x), zj.jac_at(x));
                (0..n)
                    .map(|l| {
                        DMatrix::from_fn(n, n, |i, j| {
                            dx[(i, l)] * za[j] + xa[i] * dz[(j, l)]
                                - dx[(j, l)] * za[i]
                                - xa[j] * dz[(i, l)]
                        })
                    })
                    .collect()
            },
        )
    }
}

/// Residual of an identity: `abs` is the raw mismatch, `scale` the largest
/// absolute value among the summands forming it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub abs: f64,
    pub scale: f64,
}

impl Residual {
    pub fn new(abs: f64, scale: f64) -> Self {
        Residual { abs, scale }
    }

    pub fn zero() -> Self {
        Residual::new(0.0, 0.0)
    }

    /// `|r| / (1 + s)`.
    pub fn normalized(&self) -> f64 {
        if self.abs.is_nan() || self.scale.is_nan() {
            return f64::INFINITY;
        }
        self.abs / (1.0 + self.scale)
    }

    pub fn scalar(lhs: C, rhs: C) -> Self {
        Residual::new((lhs - rhs).norm(), lhs.norm().max(rhs.norm()))
    }

    pub fn vector(lhs: &DVector<C>, rhs: &DVector<C>, scale: f64) -> Self {
        let abs = (lhs - rhs).iter().map(|c| c.norm()).fold(0.0, f64::max);
        let s = lhs
            .iter()
            .chain(rhs.iter())
            .map(|c| c.norm())
            .fold(scale, f64::max);
        Residual::new(abs, s)
    }

    pub fn matrix(lhs: &DMatrix<C>, rhs: &DMatrix<C>, scale: f64) -> Self {
        let abs = (lhs - rhs).iter().map(|c| c.norm()).fold(0.0, f64::max);
        let s = lhs
            .iter()
            .chain(rhs.iter())
            .map(|c| c.norm())
            .fold(scale, f64::max);
        Residual::new(abs, s)
    }

    /// Keeps whichever residual is worse after normalization.
    pub fn worst(self, other: Residual) -> Residual {
        if other.normalized() > self.normalized() {
            other
        } else {
            self
        }
    }

    pub fn worst_of<I: IntoIterator<Item = Residual>>(it: I) -> Residual {
        it.into_iter().fold(Residual::zero(), Residual::worst)
    }
}

/// `P v` together with the largest single product `|P_ij v_j|`.
pub fn matvec_scaled(p: &DMatrix<C>, v: &DVector<C>) -> (DVector<C>, f64) {
    let mut s: f64 = 0.0;
    for i in 0..p.nrows() {
        for j in 0..p.ncols() {
            s = s.max((p[(i, j)] * v[j]).norm());
        }
    }
    (p * v, s)
}

pub fn wedge_vectors(x: &DVector<C>, z: &DVector<C>) -> DMatrix<C> {
    let n = x.len();
    DMatrix::from_fn(n, n, |i, j| x[i] * z[j] - x[j] * z[i])
}

pub fn antisymmetry_defect(p: &DMatrix<C>) -> f64 {
    (p + p.transpose())
        .iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max)
}

/// `{f, g}_P = df . P dg` together with its largest summand.
pub fn bracket_scaled(
    p: &BivectorField,
    f: &ScalarField,
    g: &ScalarField,
    pt: &PhasePoint,
) -> Result<(C, f64)> {
    check_chart(p.chart, f.chart)?;
    check_chart(p.chart, g.chart)?;
    let pm = p.eval(pt)?;
    let df = f.gradient(pt)?;
    let dg = g.gradient(pt)?;
    let mut total = C::new(0.0, 0.0);
    let mut s: f64 = 0.0;
    for i in 0..pm.nrows() {
        for j in 0..pm.ncols() {
            let t = df[i] * pm[(i, j)] * dg[j];
            s = s.max(t.norm());
            total += t;
        }
    }
    Ok((total, s))
}

pub fn bracket(p: &BivectorField, f: &ScalarField, g: &ScalarField, pt: &PhasePoint) -> Result<C> {
    bracket_scaled(p, f, g, pt).map(|(v, _)| v)
}

pub fn ham_field_scaled(
    p: &BivectorField,
    f: &ScalarField,
    pt: &PhasePoint,
) -> Result<(DVector<C>, f64)> {
    check_chart(p.chart, f.chart)?;
    let pm = p.eval(pt)?;
    let df = f.gradient(pt)?;
    Ok(matvec_scaled(&pm, &df))
}

/// Hamiltonian vector field `P df`.
pub fn ham_field(p: &BivectorField, f: &ScalarField, pt: &PhasePoint) -> Result<DVector<C>> {
    ham_field_scaled(p, f, pt).map(|(v, _)| v)
}

/// Max over index triples of the Schouten bracket `[P, Q]` components.
/// With `P = Q` this is the Jacobi residual of `P`.
pub fn schouten_residual(
    p: &BivectorField,
    q: &BivectorField,
    pt: &PhasePoint,
) -> Result<Residual> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch(p.dim(), q.dim()));
    }
    check_chart(p.chart, q.chart)?;
    let n = p.dim();
    let pm = p.eval(pt)?;
    let qm = q.eval(pt)?;
    let dp = p.jacobian(pt)?;
    let dq = q.jacobian(pt)?;
    let mut scale: f64 = 0.0;
    let mut max_abs: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut sum = C::new(0.0, 0.0);
                for (a, b, c) in [(i, j, k), (j, k, i), (k, i, j)] {
                    for l in 0..n {
                        let t1 = pm[(l, b)] * dq[l][(a, c)];
                        let t2 = qm[(l, b)] * dp[l][(a, c)];
                        scale = scale.max(t1.norm()).max(t2.norm());
                        sum += t1 + t2;
                    }
                }
                max_abs = max_abs.max(sum.norm());
            }
        }
    }
    Ok(Residual::new(max_abs, scale))
}

/// `L_Z f = df . Z`.
pub fn lie_scalar(z: &VectorField, f: &ScalarField, pt: &PhasePoint) -> Result<C> {
    check_chart(z.chart, f.chart)?;
    let zv = z.eval(pt)?;
    let df = f.gradient(pt)?;
    Ok(df.dot(&zv))
}

/// Iterated Lie derivatives `[f, L_Y f, L_Y^2 f, ..., L_Y^order f]` at `pt`,
/// exact up to rounding: the integral curve of `Y` through `pt` is expanded
/// as a Taylor series by Picard iteration on jets, then `f` is evaluated on it.
pub fn lie_scalar_iter(
    y: &VectorField,
    f: &ScalarField,
    pt: &PhasePoint,
    order: usize,
) -> Result<Vec<C>> {
    check_chart(y.chart, f.chart)?;
    check_chart(y.chart, pt.chart)?;
    if order >= JET_LEN {
        return Err(Error::InvalidInput(format!(
            "Lie derivative order {order} exceeds jet length {JET_LEN}"
        )));
    }
    let curve = integral_curve(y, pt.coords());
    let fj = f.jet(&curve);
    Ok((0..=order).map(|k| fj.derivative(k)).collect())
}

/// Taylor expansion of the integral curve of `y` starting at `x0`.
pub fn integral_curve(y: &VectorField, x0: &[C]) -> Vec<Jet> {
    let mut curve = lift(x0);
    for _ in 0..JET_LEN {
        let rhs = y.jet(&curve);
        curve = x0
            .iter()
            .zip(rhs)
            .map(|(&c, r)| r.integrate() + Jet::constant(c))
            .collect();
    }
    curve
}

/// `(L_Z P)^{ij} = Z^l d_l P^{ij} - P^{lj} d_l Z^i - P^{il} d_l Z^j`, with
/// the largest summand.
pub fn lie_bivector_scaled(
    z: &VectorField,
    p: &BivectorField,
    pt: &PhasePoint,
) -> Result<(DMatrix<C>, f64)> {
    check_chart(z.chart, p.chart)?;
    let n = p.dim();
    let zv = z.eval(pt)?;
    let dz = z.jacobian(pt)?;
    let pm = p.eval(pt)?;
    let dp = p.jacobian(pt)?;
    let mut s: f64 = 0.0;
    let out = DMatrix::from_fn(n, n, |i, j| {
        let mut acc = C::new(0.0, 0.0);
        for l in 0..n {
            let t1 = zv[l] * dp[l][(i, j)];
            let t2 = pm[(l, j)] * dz[(i, l)];
            let t3 = pm[(i, l)] * dz[(j, l)];
            s = s.max(t1.norm()).max(t2.norm()).max(t3.norm());
            acc += t1 - t2 - t3;
        }
        acc
    });
    Ok((out, s))
}

pub fn lie_bivector(z: &VectorField, p: &BivectorField, pt: &PhasePoint) -> Result<DMatrix<C>> {
    lie_bivector_scaled(z, p, pt).map(|(m, _)| m)
}

/// `(X ^ Z)^{ij} = X^i Z^j - X^j Z^i` at `pt`.
pub fn wedge(x: &VectorField, z: &VectorField, pt: &PhasePoint) -> Result<DMatrix<C>> {
    check_chart(x.chart, z.chart)?;
    Ok(wedge_vectors(&x.eval(pt)?, &z.eval(pt)?))
}

/// Singular values in decreasing order.
pub fn singular_values(m: &DMatrix<C>) -> Vec<f64> {
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Numerical rank with relative cutoff `tol * sigma_max`.
pub fn numerical_rank(m: &DMatrix<C>, tol: f64) -> usize {
    let s = singular_values(m);
    let top = s.first().copied().unwrap_or(0.0);
    s.iter()
        .filter(|&&x| x > tol * top.max(f64::MIN_POSITIVE))
        .count()
}

/// Distance of `v` from the span of the leading `k` left singular vectors of
/// `m`, relative to `1 + |v|`.
pub fn column_space_defect(m: &DMatrix<C>, v: &DVector<C>, k: usize) -> f64 {
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let mut resid = v.clone();
    for &idx in order.iter().take(k) {
        let col = u.column(idx).into_owned();
        let coeff = col.dotc(v);
        resid -= col * coeff;
    }
    resid.norm() / (1.0 + v.norm())
}

const FD_STEP: f64 = 1e-5;

fn fd_step(x: C) -> f64 {
    FD_STEP * (1.0 + x.norm())
}

fn fd_err(exact: C, approx: C) -> f64 {
    (exact - approx).norm() / (1.0 + exact.norm().max(approx.norm()))
}

/// Largest normalized mismatch between the exact gradient and central
/// differences (real-direction steps).
pub fn fd_check_scalar(f: &ScalarField, pt: &PhasePoint) -> Result<f64> {
    let x = pt.coords();
    let g = f.gradient(pt)?;
    let mut worst: f64 = 0.0;
    for i in 0..x.len() {
        let h = fd_step(x[i]);
        let (mut xp, mut xm) = (x.to_vec(), x.to_vec());
        xp[i] += h;
        xm[i] -= h;
        let d = (f.at(&xp) - f.at(&xm)) / (2.0 * h);
        worst = worst.max(fd_err(g[i], d));
    }
    Ok(worst)
}

pub fn fd_check_vector(v: &VectorField, pt: &PhasePoint) -> Result<f64> {
    let x = pt.coords();
    let jac = v.jacobian(pt)?;
    let mut worst: f64 = 0.0;
    for l in 0..x.len() {
        let h = fd_step(x[l]);
        let (mut xp, mut xm) = (x.to_vec(), x.to_vec());
        xp[l] += h;
        xm[l] -= h;
        let d = (v.at(&xp) - v.at(&xm)) / C::new(2.0 * h, 0.0);
        for i in 0..x.len() {
            worst = worst.max(fd_err(jac[(i, l)], d[i]));
        }
    }
    Ok(worst)
}

pub fn fd_check_bivector(p: &BivectorField, pt: &PhasePoint) -> Result<f64> {
    let x = pt.coords();
    let jac = p.jacobian(pt)?;
    let mut worst: f64 = 0.0;
    for l in 0..x.len() {
        let h = fd_step(x[l]);
        let (mut xp, mut xm) = (x.to_vec(), x.to_vec());
        xp[l] += h;
        xm[l] -= h;
        let d = (p.at(&xp) - p.at(&xm)) / C::new(2.0 * h, 0.0);
        for (e, a) in jac[l].iter().zip(d.iter()) {
            worst = worst.max(fd_err(*e, *a));
        }
    }
    Ok(worst)
}

/// Helper for generic formulas: lift an `f64` constant.
pub(crate) fn k<T: Scalar>(x: f64) -> T {
    T::from_f64(x)
}
