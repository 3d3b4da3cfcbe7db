//! The full SO(4) Euler-Manakov top in `m`-coordinates.

use nalgebra::{DMatrix, DVector, Matrix4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{ComplexScalar, Scalar, C, I};
use crate::tensor::{k, matvec_scaled, BivectorField, Chart, PhasePoint, Residual, ScalarField};

/// Index pairs `(i, j)`, `i < j`, in the coordinate ordering
/// `(m12, m13, m14, m23, m24, m34)` (zero-based).
pub const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// The complementary pair `{l, k}` of `{i, j}` within `{0, 1, 2, 3}`.
pub fn complement(i: usize, j: usize) -> (usize, usize) {
    let mut rest = (0..4).filter(|&t| t != i && t != j);
    (rest.next().unwrap(), rest.next().unwrap())
}

fn pair_index(i: usize, j: usize) -> usize {
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    PAIRS.iter().position(|&p| p == (a, b)).expect("valid pair")
}

/// Sign convention of the Lax equation along the Manakov flow:
/// `dL/dt = LAX_SIGN [L, B]`.
pub const LAX_SIGN: f64 = -1.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    mu: [f64; 4],
}

impl ModelParams {
    pub fn new(mu: [f64; 4]) -> Result<Self> {
        if mu.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParams(format!("non-finite mu {mu:?}")));
        }
        Ok(ModelParams { mu })
    }

    /// Rotationally symmetric case `mu4 = mu3`.
    pub fn symmetric(mu1: f64, mu2: f64, mu3: f64) -> Result<Self> {
        Self::new([mu1, mu2, mu3, mu3])
    }

    /// Inverse of the affine map `mu -> J^2`.
    pub fn from_jsq(jsq: [f64; 4]) -> Result<Self> {
        let [j1, j2, j3, j4] = jsq;
        Self::new([
            (j1 + j2 + j3 + j4) / 4.0,
            (j2 + j3 - j1 - j4) / 4.0,
            (j2 + j4 - j1 - j3) / 4.0,
            (j3 + j4 - j1 - j2) / 4.0,
        ])
    }

    pub fn mu(&self) -> [f64; 4] {
        self.mu
    }

    pub fn jsq(&self) -> [f64; 4] {
        let [m1, m2, m3, m4] = self.mu;
        [
            -m4 + m1 - m3 - m2,
            m3 - m4 + m1 + m2,
            m1 - m3 + m4 + m2,
            -m2 + m1 + m3 + m4,
        ]
    }

    pub fn is_symmetric(&self) -> bool {
        self.mu[3] == self.mu[2]
    }

    /// `a_ij = J_l^2 + J_k^2` (zero-based indices).
    pub fn a(&self, i: usize, j: usize) -> f64 {
        let jsq = self.jsq();
        let (l, k) = complement(i, j);
        jsq[l] + jsq[k]
    }

    /// `b_ij = J_l^2 J_k^2`.
    pub fn b(&self, i: usize, j: usize) -> f64 {
        let jsq = self.jsq();
        let (l, k) = complement(i, j);
        jsq[l] * jsq[k]
    }

    pub fn a_coeffs(&self) -> [f64; 6] {
        PAIRS.map(|(i, j)| self.a(i, j))
    }

    pub fn b_coeffs(&self) -> [f64; 6] {
        PAIRS.map(|(i, j)| self.b(i, j))
    }

    /// Principal square roots `J_i` when every `J_i^2 > 0`.
    pub fn j_positive(&self) -> Option<[f64; 4]> {
        let jsq = self.jsq();
        if jsq.iter().all(|&x| x > 0.0) {
            Some(jsq.map(f64::sqrt))
        } else {
            None
        }
    }
}

/// Lie-Poisson tensor of so(4), entries as a function of `m`.
pub fn p1_entries<T: Scalar>(m: &[T]) -> [[T; 6]; 6] {
    let z = T::zero();
    let [m12, m13, m14, m23, m24, m34] = [m[0], m[1], m[2], m[3], m[4], m[5]];
    [
        [z, -m23, -m24, m13, m14, z],
        [m23, z, -m34, -m12, z, m14],
        [m24, m34, z, z, -m12, -m13],
        [-m13, m12, z, z, -m34, m24],
        [-m14, z, m12, m34, z, -m23],
        [z, -m14, m13, -m24, m23, z],
    ]
}

/// Lie-Poisson tensor of the `J^2`-deformed commutator.
pub fn p2_entries<T: Scalar>(jsq: [f64; 4], m: &[T]) -> [[T; 6]; 6] {
    let z = T::zero();
    let [j1, j2, j3, j4] = jsq.map(k::<T>);
    let [m12, m13, m14, m23, m24, m34] = [m[0], m[1], m[2], m[3], m[4], m[5]];
    [
        [z, -j1 * m23, -j1 * m24, j2 * m13, j2 * m14, z],
        [j1 * m23, z, -j1 * m34, -m12 * j3, z, m14 * j3],
        [j1 * m24, j1 * m34, z, z, -m12 * j4, -m13 * j4],
        [-j2 * m13, m12 * j3, z, z, -j2 * m34, m24 * j3],
        [-j2 * m14, z, m12 * j4, j2 * m34, z, -m23 * j4],
        [z, -m14 * j3, m13 * j4, -m24 * j3, m23 * j4, z],
    ]
}

fn to_dmatrix(e: [[C; 6]; 6]) -> DMatrix<C> {
    DMatrix::from_fn(6, 6, |i, j| e[i][j])
}

fn linear_basis(entries: impl Fn(&[C]) -> [[C; 6]; 6]) -> Vec<DMatrix<C>> {
    (0..6)
        .map(|l| {
            let mut e = [C::new(0.0, 0.0); 6];
            e[l] = C::new(1.0, 0.0);
            to_dmatrix(entries(&e))
        })
        .collect()
}

pub fn p1_m() -> BivectorField {
    BivectorField::linear(Chart::M, linear_basis(p1_entries))
}

pub fn p2_m(params: &ModelParams) -> BivectorField {
    let jsq = params.jsq();
    BivectorField::linear(Chart::M, linear_basis(move |m| p2_entries(jsq, m)))
}

pub fn h0<T: Scalar>(m: &[T]) -> T {
    m.iter().fold(T::zero(), |acc, &x| acc + x * x)
}

/// Pfaffian of `M`.
pub fn pfaffian<T: Scalar>(m: &[T]) -> T {
    m[0] * m[5] + m[2] * m[3] - m[1] * m[4]
}

fn diag_quadratic<T: Scalar>(w: [f64; 6], m: &[T]) -> T {
    w.iter()
        .zip(m)
        .fold(T::zero(), |acc, (&wi, &x)| acc + T::from_f64(wi) * x * x)
}

/// `H_E = 1/2 sum a_ij m_ij^2`.
pub fn energy<T: Scalar>(params: &ModelParams, m: &[T]) -> T {
    diag_quadratic(params.a_coeffs(), m).scale(0.5)
}

/// `K_E = sum b_ij m_ij^2`.
pub fn second_integral<T: Scalar>(params: &ModelParams, m: &[T]) -> T {
    diag_quadratic(params.b_coeffs(), m)
}

/// `H_M = 1/2 sum m_ij^2 / (J_i + J_j)`, the Hamiltonian generated by the
/// Manakov Lax pair `B = Omega + lambda J`.
pub fn manakov_energy<T: Scalar>(j: [f64; 4], m: &[T]) -> T {
    diag_quadratic(PAIRS.map(|(a, b)| 0.5 / (j[a] + j[b])), m)
}

fn diag_quadratic_field(w: [f64; 6]) -> ScalarField {
    ScalarField::new(
        Chart::M,
        move |m| diag_quadratic(w, m),
        move |m| DVector::from_fn(6, |i, _| m[i] * (2.0 * w[i])),
    )
}

/// Hamiltonians and Casimirs on the `m`-chart.
#[derive(Clone)]
pub struct MObservables {
    pub h0: ScalarField,
    pub c: ScalarField,
    pub he: ScalarField,
    pub ke: ScalarField,
    /// `-2 H_E`.
    pub h1: ScalarField,
    /// `K_E`.
    pub h2: ScalarField,
}

pub fn observables_m(params: &ModelParams) -> MObservables {
    let h0 = diag_quadratic_field([1.0; 6]);
    let c = ScalarField::new(Chart::M, pfaffian, |m| {
        DVector::from_vec(vec![m[5], -m[4], m[3], m[2], -m[1], m[0]])
    });
    let he = diag_quadratic_field(params.a_coeffs().map(|a| 0.5 * a));
    let ke = diag_quadratic_field(params.b_coeffs());
    let h1 = he.scale(C::new(-2.0, 0.0));
    let h2 = ke.clone();
    MObservables {
        h0,
        c,
        he,
        ke,
        h1,
        h2,
    }
}

pub fn manakov_field(j: [f64; 4]) -> ScalarField {
    diag_quadratic_field(PAIRS.map(|(a, b)| 0.5 / (j[a] + j[b])))
}

/// Antisymmetric 4x4 matrix `M = sum m_ij (E_ij - E_ji)`.
pub fn m_matrix<T: Scalar>(m: &[T]) -> [[T; 4]; 4] {
    let mut out = [[T::zero(); 4]; 4];
    for (idx, &(i, j)) in PAIRS.iter().enumerate() {
        out[i][j] = m[idx];
        out[j][i] = -m[idx];
    }
    out
}

/// `L(lambda) = lambda J^2 + M`.
pub fn lax(params: &ModelParams, lambda: C, pt: &PhasePoint) -> Result<Matrix4<C>> {
    require_chart(pt, Chart::M)?;
    let jsq = params.jsq();
    let m = m_matrix(pt.coords());
    Ok(Matrix4::from_fn(|i, j| {
        let d = if i == j {
            lambda * jsq[i]
        } else {
            C::new(0.0, 0.0)
        };
        d + m[i][j]
    }))
}

/// 4x4 determinant by cofactor expansion along the first row.
pub fn det4<T: Scalar>(a: &[[T; 4]; 4]) -> T {
    let minor = |r: [usize; 3], c: [usize; 3]| {
        a[r[0]][c[0]] * (a[r[1]][c[1]] * a[r[2]][c[2]] - a[r[1]][c[2]] * a[r[2]][c[1]])
            - a[r[0]][c[1]] * (a[r[1]][c[0]] * a[r[2]][c[2]] - a[r[1]][c[2]] * a[r[2]][c[0]])
            + a[r[0]][c[2]] * (a[r[1]][c[0]] * a[r[2]][c[1]] - a[r[1]][c[1]] * a[r[2]][c[0]])
    };
    let rows = [1, 2, 3];
    a[0][0] * minor(rows, [1, 2, 3]) - a[0][1] * minor(rows, [0, 2, 3])
        + a[0][2] * minor(rows, [0, 1, 3])
        - a[0][3] * minor(rows, [0, 1, 2])
}

/// `Det(L(lambda) - rho lambda 1)` as a function of `m`.
pub fn char_poly<T: Scalar>(jsq: [f64; 4], lambda: T, rho: T, m: &[T]) -> T {
    let mut a = m_matrix(m);
    for (i, row) in a.iter_mut().enumerate() {
        row[i] = row[i] + lambda * T::from_f64(jsq[i]) - rho * lambda;
    }
    det4(&a)
}

/// Gradient of `char_poly` with respect to `m`: `d det / d m_ij = adj_ji - adj_ij`.
pub fn char_poly_grad(jsq: [f64; 4], lambda: C, rho: C, m: &[C]) -> DVector<C> {
    let mut a = m_matrix(m);
    for (i, row) in a.iter_mut().enumerate() {
        row[i] += lambda * jsq[i] - rho * lambda;
    }
    let cof = |r: usize, c: usize| {
        let rows: Vec<usize> = (0..4).filter(|&x| x != r).collect();
        let cols: Vec<usize> = (0..4).filter(|&x| x != c).collect();
        let e = |i: usize, j: usize| a[rows[i]][cols[j]];
        let d = e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1))
            - e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0))
            + e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0));
        if (r + c).is_multiple_of(2) {
            d
        } else {
            -d
        }
    };
    DVector::from_fn(6, |idx, _| {
        let (i, j) = PAIRS[idx];
        cof(i, j) - cof(j, i)
    })
}

/// `P_4(rho) = prod (J_i^2 - rho)`.
pub fn p4<T: Scalar>(jsq: [f64; 4], rho: T) -> T {
    jsq.iter()
        .fold(T::one(), |acc, &j| acc * (T::from_f64(j) - rho))
}

/// Determinant minus `lambda^4 P4 + lambda^2 (rho^2 H0 + rho H1 + H2) + C^2`.
pub fn char_poly_residual(
    params: &ModelParams,
    lambda: C,
    rho: C,
    pt: &PhasePoint,
) -> Result<Residual> {
    require_chart(pt, Chart::M)?;
    let m = pt.coords();
    let jsq = params.jsq();
    let lhs = char_poly(jsq, lambda, rho, m);
    let l2 = lambda * lambda;
    let terms = [
        l2 * l2 * p4(jsq, rho),
        l2 * rho * rho * h0(m),
        l2 * rho * energy(params, m) * -2.0,
        l2 * second_integral(params, m),
        pfaffian(m) * pfaffian(m),
    ];
    let rhs: C = terms.iter().sum();
    let scale = terms.iter().map(|t| t.norm()).fold(lhs.norm(), f64::max);
    Ok(Residual::new((lhs - rhs).norm(), scale))
}

#[derive(Clone, Copy, Debug)]
pub struct LenardResiduals {
    /// `P1 dH0`, `P2 dH0 - P1 dH1`, `P2 dH1 - P1 dH2`, `P2 dH2`.
    pub chain: [Residual; 4],
    /// `P1 dC`, `P2 dC`.
    pub casimir: [Residual; 2],
}

impl LenardResiduals {
    pub fn worst(&self) -> Residual {
        Residual::worst_of(self.chain.iter().chain(self.casimir.iter()).copied())
    }
}

/// Anchored chain residuals for an arbitrary triple `(H0, H1, H2)` and common
/// Casimir `C` of the pair `(P1, P2)`.
pub fn lenard_residuals(
    p1: &BivectorField,
    p2: &BivectorField,
    hs: [&ScalarField; 3],
    casimir: &ScalarField,
    pt: &PhasePoint,
) -> Result<LenardResiduals> {
    let p1m = p1.eval(pt)?;
    let p2m = p2.eval(pt)?;
    let g: Vec<DVector<C>> = hs.iter().map(|h| h.gradient(pt)).collect::<Result<_>>()?;
    let gc = casimir.gradient(pt)?;
    let zero = DVector::zeros(p1m.nrows());
    let pair = |a: (&DMatrix<C>, &DVector<C>), b: Option<(&DMatrix<C>, &DVector<C>)>| {
        let (va, sa) = matvec_scaled(a.0, a.1);
        match b {
            Some(b) => {
                let (vb, sb) = matvec_scaled(b.0, b.1);
                Residual::vector(&va, &vb, sa.max(sb))
            }
            None => Residual::vector(&va, &zero, sa),
        }
    };
    Ok(LenardResiduals {
        chain: [
            pair((&p1m, &g[0]), None),
            pair((&p2m, &g[0]), Some((&p1m, &g[1]))),
            pair((&p2m, &g[1]), Some((&p1m, &g[2]))),
            pair((&p2m, &g[2]), None),
        ],
        casimir: [pair((&p1m, &gc), None), pair((&p2m, &gc), None)],
    })
}

pub fn lenard_residuals_m(params: &ModelParams, pt: &PhasePoint) -> Result<LenardResiduals> {
    require_chart(pt, Chart::M)?;
    let obs = observables_m(params);
    lenard_residuals(
        &p1_m(),
        &p2_m(params),
        [&obs.h0, &obs.h1, &obs.h2],
        &obs.c,
        pt,
    )
}

/// Residual of `dL/dt = LAX_SIGN [L, B]` along the flow `P1 dH_M`, with
/// `Omega_ij = m_ij / (J_i + J_j)` and `B = Omega + lambda J`. `None` when
/// some `J_i^2 <= 0`.
pub fn lax_flow_residual(
    params: &ModelParams,
    lambda: C,
    pt: &PhasePoint,
) -> Result<Option<Residual>> {
    require_chart(pt, Chart::M)?;
    let Some(j) = params.j_positive() else {
        return Ok(None);
    };
    let m = pt.coords();
    let (mdot, s_flow) = matvec_scaled(&p1_m().at(m), &manakov_field(j).grad_at(m));
    let mdot_mat = Matrix4::from(m_matrix(mdot.as_slice())).transpose();
    let l = lax(params, lambda, pt)?;
    let mut b = Matrix4::<C>::zeros();
    for (idx, &(a, c)) in PAIRS.iter().enumerate() {
        let w = m[idx] / (j[a] + j[c]);
        b[(a, c)] = w;
        b[(c, a)] = -w;
    }
    for i in 0..4 {
        b[(i, i)] = lambda * j[i];
    }
    let lb = l * b;
    let bl = b * l;
    let comm = (lb - bl) * C::new(LAX_SIGN, 0.0);
    let abs = (mdot_mat - comm)
        .iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max);
    let scale = lb
        .iter()
        .chain(bl.iter())
        .map(|c| c.norm())
        .fold(s_flow, f64::max);
    Ok(Some(Residual::new(abs, scale)))
}

/// Least-squares coefficients `(alpha, beta, gamma)` with
/// `1/(2(J_i+J_j)) = alpha + beta a_ij/2 + gamma b_ij`, i.e.
/// `H_M = alpha H0 + beta H_E + gamma K_E`, and the fit residual.
pub fn manakov_span_fit(params: &ModelParams) -> Option<([f64; 3], f64)> {
    let j = params.j_positive()?;
    let a = params.a_coeffs();
    let b = params.b_coeffs();
    let design = DMatrix::from_fn(6, 3, |r, c| match c {
        0 => 1.0,
        1 => 0.5 * a[r],
        _ => b[r],
    });
    let target = DVector::from_fn(6, |r, _| {
        let (p, q) = PAIRS[r];
        0.5 / (j[p] + j[q])
    });
    let svd = design.clone().svd(true, true);
    let x = svd.solve(&target, 1e-14).ok()?;
    let resid = (&design * &x - &target).amax() / (1.0 + target.amax());
    Some(([x[0], x[1], x[2]], resid))
}

/// `H_E` written in the so(3)+so(3) chart.
pub fn energy_split<T: Scalar>(params: &ModelParams, s: &[T]) -> T {
    let [m1, m2, m3, m4] = params.mu.map(k::<T>);
    let [x1, y1, z1, x2, y2, z2] = [s[0], s[1], s[2], s[3], s[4], s[5]];
    k::<T>(2.0) * (m4 * x1 * x2 + m3 * y1 * y2 + m2 * z1 * z2)
        + m1 * (y1 * y1 + y2 * y2 + x2 * x2 + x1 * x1 + z1 * z1 + z2 * z2)
}

/// Whether chart maps may land on complex points of the real charts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScalarMode {
    Real,
    Complex,
}

/// Linear map `M -> SPLIT`.
pub fn m_to_split_matrix() -> DMatrix<C> {
    let s = 1.0 / 2f64.sqrt();
    #[rustfmt::skip]
    let rows = [
        [1.0, 0.0, 0.0, 0.0, 0.0, -1.0],
        [0.0, 1.0, 0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0, -1.0, 0.0, 0.0],
        [1.0, 0.0, 0.0, 0.0, 0.0, 1.0],
        [0.0, 1.0, 0.0, 0.0, -1.0, 0.0],
        [0.0, 0.0, 1.0, 1.0, 0.0, 0.0],
    ];
    DMatrix::from_fn(6, 6, |i, j| C::new(rows[i][j] * s, 0.0))
}

/// Inverse of [`m_to_split_matrix`] (its transpose: the map is orthogonal).
pub fn split_to_m_matrix() -> DMatrix<C> {
    m_to_split_matrix().transpose()
}

/// Linear map `SPLIT -> UV`, `u = x + i y`, `v = x - i y`.
pub fn split_to_uv_matrix() -> DMatrix<C> {
    let mut b = DMatrix::zeros(6, 6);
    let one = C::new(1.0, 0.0);
    for blk in [0, 3] {
        b[(blk, blk)] = one;
        b[(blk, blk + 1)] = I;
        b[(blk + 1, blk)] = one;
        b[(blk + 1, blk + 1)] = -I;
        b[(blk + 2, blk + 2)] = one;
    }
    b
}

/// Inverse of [`split_to_uv_matrix`]: `x = (u + v)/2`, `y = (u - v)/(2i)`.
pub fn uv_to_split_matrix() -> DMatrix<C> {
    let mut b = DMatrix::zeros(6, 6);
    let half = C::new(0.5, 0.0);
    let mhi = C::new(0.0, -0.5);
    for blk in [0, 3] {
        b[(blk, blk)] = half;
        b[(blk, blk + 1)] = half;
        b[(blk + 1, blk)] = mhi;
        b[(blk + 1, blk + 1)] = -mhi;
        b[(blk + 2, blk + 2)] = C::new(1.0, 0.0);
    }
    b
}

/// Matrix of the linear chart change `from -> to`.
pub fn chart_matrix(from: Chart, to: Chart) -> Result<DMatrix<C>> {
    use Chart::*;
    Ok(match (from, to) {
        (a, b) if a == b && a != Leaf => DMatrix::identity(6, 6),
        (M, Split) => m_to_split_matrix(),
        (Split, M) => split_to_m_matrix(),
        (Split, Uv) => split_to_uv_matrix(),
        (Uv, Split) => uv_to_split_matrix(),
        (M, Uv) => split_to_uv_matrix() * m_to_split_matrix(),
        (Uv, M) => split_to_m_matrix() * uv_to_split_matrix(),
        _ => {
            return Err(Error::InvalidInput(format!(
                "no linear chart map {from} -> {to}"
            )))
        }
    })
}

pub fn apply_linear<T: ComplexScalar>(a: &DMatrix<C>, x: &[T]) -> Vec<T> {
    (0..a.nrows())
        .map(|i| {
            x.iter()
                .enumerate()
                .fold(T::zero(), |acc, (j, &xj)| acc + T::from_c(a[(i, j)]) * xj)
        })
        .collect()
}

const REALITY_TOL: f64 = 1e-12;

pub fn chart_map(pt: &PhasePoint, target: Chart, mode: ScalarMode) -> Result<PhasePoint> {
    let a = chart_matrix(pt.chart(), target)?;
    let out = PhasePoint::new(target, apply_linear(&a, pt.coords()))?;
    if mode == ScalarMode::Real
        && target != Chart::Uv
        && out.max_imag() > REALITY_TOL * (1.0 + out.norm_inf())
    {
        return Err(Error::NonRealPoint(format!(
            "{} -> {} leaves an imaginary part {:e}",
            pt.chart(),
            target,
            out.max_imag()
        )));
    }
    Ok(out)
}

/// Push-forward `A P A^T` of a bivector under a linear chart map.
pub fn push_forward(p: &DMatrix<C>, a: &DMatrix<C>) -> DMatrix<C> {
    a * p * a.transpose()
}

/// Constant relating the uv-chart tensors to push-forwards of the
/// `m`-chart ones: `P_uv = UV_TENSOR_FACTOR * A P_m A^T`.
pub fn uv_tensor_factor() -> C {
    I / 2f64.sqrt()
}

fn require_chart(pt: &PhasePoint, chart: Chart) -> Result<()> {
    if pt.chart() != chart {
        return Err(Error::ChartMismatch {
            expected: chart,
            found: pt.chart(),
        });
    }
    Ok(())
}

/// Pair index helper used by tests and the CLI.
pub fn index_of_pair(i: usize, j: usize) -> usize {
    pair_index(i, j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{bracket, ham_field, schouten_residual};

    fn pt(m: [f64; 6]) -> PhasePoint {
        PhasePoint::from_real(Chart::M, &m).unwrap()
    }

    fn c(x: f64) -> C {
        C::new(x, 0.0)
    }

    #[test]
    fn jsq_from_mu_example() {
        let p = ModelParams::new([10.0, 1.0, 2.0, 2.0]).unwrap();
        assert_eq!(p.jsq(), [5.0, 11.0, 11.0, 13.0]);
        let back = ModelParams::from_jsq(p.jsq()).unwrap();
        assert_eq!(back.mu(), p.mu());
        assert!(p.is_symmetric());
    }

    #[test]
    fn a_and_b_use_complementary_pair() {
        let p = ModelParams::new([10.0, 1.0, 2.0, 2.0]).unwrap();
        assert_eq!(p.a(0, 1), 11.0 + 13.0);
        assert_eq!(p.b(0, 1), 143.0);
        assert_eq!(p.a(2, 3), 5.0 + 11.0);
    }

    #[test]
    fn observables_at_unit_points() {
        let p = ModelParams::new([10.0, 1.0, 2.0, 2.0]).unwrap();
        let obs = observables_m(&p);
        let e12 = pt([1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(obs.h0.eval(&e12).unwrap(), c(1.0));
        assert_eq!(obs.c.eval(&e12).unwrap(), c(0.0));
        assert_eq!(obs.he.eval(&e12).unwrap(), c(12.0));
        assert_eq!(obs.ke.eval(&e12).unwrap(), c(143.0));
        let e1234 = pt([1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        assert_eq!(obs.c.eval(&e1234).unwrap(), c(1.0));
    }

    #[test]
    fn p1_pattern_of_m12() {
        let p = p1_m().eval(&pt([1.0, 0.0, 0.0, 0.0, 0.0, 0.0])).unwrap();
        let expect = [(1, 3, -1.0), (3, 1, 1.0), (2, 4, -1.0), (4, 2, 1.0)];
        for i in 0..6 {
            for j in 0..6 {
                let e = expect
                    .iter()
                    .find(|(a, b, _)| *a == i && *b == j)
                    .map_or(0.0, |t| t.2);
                assert_eq!(p[(i, j)], c(e), "({i},{j})");
            }
        }
        assert!(p1_m()
            .eval(&pt([0.0; 6]))
            .unwrap()
            .iter()
            .all(|x| x.norm() == 0.0));
    }

    #[test]
    fn bracket_m12_m13() {
        let f = ScalarField::coordinate(Chart::M, 0);
        let g = ScalarField::coordinate(Chart::M, 1);
        let b = bracket(&p1_m(), &f, &g, &pt([0.3, 0.1, 0.2, 0.5, -0.4, 0.9])).unwrap();
        assert_eq!(b, c(-0.5));
    }

    #[test]
    fn p2_with_unit_jsq_is_p1() {
        let p = ModelParams::from_jsq([1.0; 4]).unwrap();
        let x = pt([0.3, -0.1, 0.2, 0.5, -0.4, 0.9]);
        assert_eq!(p2_m(&p).eval(&x).unwrap(), p1_m().eval(&x).unwrap());
    }

    #[test]
    fn lax_basics() {
        let p = ModelParams::new([1.0, 2.0, 3.0, 3.0]).unwrap();
        let x = pt([0.3, -0.1, 0.2, 0.5, -0.4, 0.9]);
        let l0 = lax(&p, c(0.0), &x).unwrap();
        assert_eq!(l0 + l0.transpose(), Matrix4::zeros());
        let l1 = lax(&p, c(1.0), &pt([0.0; 6])).unwrap();
        let jsq = p.jsq();
        assert_eq!(l1, Matrix4::from_diagonal(&jsq.map(c).into()));
        let lam = C::new(0.7, -0.2);
        let tr = lax(&p, lam, &x).unwrap().trace();
        assert!((tr - lam * jsq.iter().sum::<f64>()).norm() < 1e-14);
    }

    #[test]
    fn char_poly_at_zero_lambda_is_pfaffian_squared() {
        let p = ModelParams::new([1.0, 2.0, 3.0, 4.0]).unwrap();
        let x = pt([0.3, -0.1, 0.2, 0.5, -0.4, 0.9]);
        let r = char_poly_residual(&p, c(0.0), C::new(0.3, 1.0), &x).unwrap();
        assert!(r.normalized() < 1e-15);
        let r0 = char_poly_residual(&p, C::new(1.3, 0.2), c(0.4), &pt([0.0; 6])).unwrap();
        assert!(r0.normalized() < 1e-14, "{r0:?}");
    }

    #[test]
    fn lenard_at_zero_is_exact() {
        let p = ModelParams::new([1.0, 2.0, 3.0, 4.0]).unwrap();
        let r = lenard_residuals_m(&p, &pt([0.0; 6])).unwrap();
        assert_eq!(r.worst().abs, 0.0);
    }

    #[test]
    fn casimirs_of_p1() {
        let p = ModelParams::new([1.0, 2.0, 3.0, 4.0]).unwrap();
        let obs = observables_m(&p);
        let x = pt([0.3, -0.1, 0.2, 0.5, -0.4, 0.9]);
        for f in [&obs.h0, &obs.c] {
            let v = ham_field(&p1_m(), f, &x).unwrap();
            assert!(v.iter().all(|z| z.norm() < 1e-15));
        }
    }

    #[test]
    fn chart_map_examples() {
        let s2 = 2f64.sqrt();
        let split = chart_map(
            &pt([s2, 0.0, 0.0, 0.0, 0.0, 0.0]),
            Chart::Split,
            ScalarMode::Real,
        )
        .unwrap();
        let expect = [1.0, 0.0, 0.0, 1.0, 0.0, 0.0];
        for (a, e) in split.coords().iter().zip(expect) {
            assert!((a - c(e)).norm() < 1e-15);
        }
        let uv = chart_map(&split, Chart::Uv, ScalarMode::Real).unwrap();
        for (a, e) in uv.coords().iter().zip([1.0, 1.0, 0.0, 1.0, 1.0, 0.0]) {
            assert!((a - c(e)).norm() < 1e-15);
        }
    }

    #[test]
    fn non_real_uv_point_is_rejected_in_real_mode() {
        let uv = PhasePoint::new(
            Chart::Uv,
            vec![c(1.0), c(2.0), c(0.0), c(1.0), c(1.0), c(0.0)],
        )
        .unwrap();
        let err = chart_map(&uv, Chart::M, ScalarMode::Real).unwrap_err();
        assert!(err.to_string().contains("non-real point"));
        assert!(chart_map(&uv, Chart::M, ScalarMode::Complex).is_ok());
    }

    #[test]
    fn jacobi_of_p1() {
        let x = pt([0.3, -0.1, 0.2, 0.5, -0.4, 0.9]);
        assert!(
            schouten_residual(&p1_m(), &p1_m(), &x)
                .unwrap()
                .normalized()
                < 1e-15
        );
    }

    #[test]
    fn lax_sign_is_negative_along_manakov_flow() {
        let p = ModelParams::from_jsq([1.0, 2.0, 3.5, 5.0]).unwrap();
        let x = pt([0.3, -0.1, 0.2, 0.5, -0.4, 0.9]);
        let r = lax_flow_residual(&p, C::new(0.4, 0.3), &x)
            .unwrap()
            .unwrap();
        assert!(r.normalized() < 1e-13, "{r:?}");
        let skip = ModelParams::new([1.0, 2.0, 3.0, 3.0]).unwrap();
        assert!(lax_flow_residual(&skip, c(1.0), &x).unwrap().is_none());
    }

    #[test]
    fn manakov_energy_is_in_the_integrable_span() {
        let p = ModelParams::from_jsq([1.0, 2.0, 3.5, 5.0]).unwrap();
        let (_, resid) = manakov_span_fit(&p).unwrap();
        assert!(resid < 1e-13);
    }
}
