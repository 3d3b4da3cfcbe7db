//! Seeded verification suite: every identity of the model evaluated over
//! random point ensembles, collected into a JSON-serializable report.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{euler_rhs, Flow};
use crate::error::{Error, Result};
use crate::leaf::{self, LeafChart, EPS_COLL};
use crate::scalar::C;
use crate::so4::{self, ModelParams, ScalarMode};
use crate::tensor::{
    fd_check_bivector, fd_check_scalar, fd_check_vector, ham_field_scaled, lie_bivector_scaled,
    lie_scalar, schouten_residual, Chart, PhasePoint, Residual,
};
use crate::xxz::{self, Mutation, XxzModel, EPS_DEG};

pub const SCHEMA: &str = "biham-euler-so4/v1";

/// Fraction of degenerate skips above which a check is inconclusive.
pub const MAX_SKIP_FRACTION: f64 = 0.05;

/// Consecutive guard failures tolerated by the sampler.
pub const MAX_CONSECUTIVE_REJECTS: usize = 1000;

pub const DEFAULT_U_MIN: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleKind {
    MReal,
    MComplex,
    UvComplex,
    Leaf,
}

/// Predicates a sampled point must satisfy.
#[derive(Clone, Copy, Debug)]
pub struct Guards {
    /// Lower bound on `|u1|`, `|u2|` (uv and leaf kinds).
    pub u_min: f64,
    /// When set, also require `|G|, |F|, |theta1| > EPS_DEG` and
    /// `|lambda2 - lambda1| > EPS_COLL` for this model.
    pub leaf_model: Option<XxzModel>,
}

impl Guards {
    pub fn none() -> Self {
        Guards {
            u_min: 0.0,
            leaf_model: None,
        }
    }

    pub fn leaf(model: XxzModel) -> Self {
        Guards {
            u_min: DEFAULT_U_MIN,
            leaf_model: Some(model),
        }
    }

    pub fn admits(&self, x: &[C]) -> bool {
        let (u1, u2) = (x[xxz::U1], x[xxz::U2]);
        if u1.norm() <= self.u_min || u2.norm() <= self.u_min {
            return false;
        }
        let Some(m) = &self.leaf_model else {
            return true;
        };
        leaf::g_of(u1, u2).norm() > EPS_DEG
            && leaf::f_of(m, u1, u2).norm() > EPS_DEG
            && leaf::theta1_of(m, u1, u2).norm() > EPS_DEG
            && (leaf::lambda2_of(m, u1, u2) - m.lambda1()).norm() > EPS_COLL
    }
}

#[derive(Clone, Debug)]
pub enum Sample {
    Point(PhasePoint),
    Leaf(LeafChart),
}

impl Sample {
    pub fn point(&self) -> &PhasePoint {
        match self {
            Sample::Point(p) => p,
            Sample::Leaf(_) => panic!("leaf sample has no phase point"),
        }
    }

    pub fn leaf(&self) -> &LeafChart {
        match self {
            Sample::Leaf(l) => l,
            Sample::Point(_) => panic!("phase point sample is not a leaf"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Sampled {
    pub points: Vec<Sample>,
    pub resampled: usize,
}

fn uniform_c(rng: &mut ChaCha8Rng) -> C {
    C::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0))
}

/// Deterministic guarded sampling: coordinates (real and imaginary parts)
/// uniform in `[-1, 1]`, resampled until the guards hold.
pub fn sample_points(
    kind: SampleKind,
    n: usize,
    rng: &mut ChaCha8Rng,
    guards: &Guards,
) -> Result<Sampled> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be at least 1".into()));
    }
    let mut points = Vec::with_capacity(n);
    let mut resampled = 0;
    while points.len() < n {
        let mut rejects = 0;
        let sample = loop {
            let candidate = match kind {
                SampleKind::MReal => {
                    let x: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                    Some(Sample::Point(PhasePoint::from_real(Chart::M, &x)?))
                }
                SampleKind::MComplex => {
                    let x = (0..6).map(|_| uniform_c(rng)).collect();
                    Some(Sample::Point(PhasePoint::new(Chart::M, x)?))
                }
                SampleKind::UvComplex | SampleKind::Leaf => {
                    let x: Vec<C> = (0..6).map(|_| uniform_c(rng)).collect();
                    if guards.admits(&x) {
                        let pt = PhasePoint::new(Chart::Uv, x)?;
                        Some(if kind == SampleKind::Leaf {
                            Sample::Leaf(LeafChart::project(&pt)?)
                        } else {
                            Sample::Point(pt)
                        })
                    } else {
                        None
                    }
                }
            };
            match candidate {
                Some(s) => break s,
                None => {
                    rejects += 1;
                    resampled += 1;
                    if rejects > MAX_CONSECUTIVE_REJECTS {
                        return Err(Error::SamplerStarved(MAX_CONSECUTIVE_REJECTS));
                    }
                }
            }
        };
        points.push(sample);
    }
    Ok(Sampled { points, resampled })
}

/// [`sample_points`] on a fresh generator seeded with `seed`.
pub fn sample_points_seeded(
    kind: SampleKind,
    n: usize,
    seed: u64,
    guards: &Guards,
) -> Result<Sampled> {
    sample_points(kind, n, &mut ChaCha8Rng::seed_from_u64(seed), guards)
}

/// Per-run adjustments to the default registry.
#[derive(Clone, Copy, Debug, Default)]
pub struct Overrides {
    /// Replaces every check's default point count.
    pub n_points: Option<usize>,
    /// Multiplies every tolerance (default 1).
    pub tol_scale: Option<f64>,
    pub mutation: Option<Mutation>,
    pub threads: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `|r| / (1 + s)` with `s` the largest summand.
    Relative,
    Absolute,
}

/// Static description of one named check.
#[derive(Clone, Copy, Debug)]
pub struct CheckSpec {
    pub name: &'static str,
    pub tolerance: f64,
    pub n_points: usize,
    pub normalization: Normalization,
    pub kind: SampleKind,
    pub symmetric_only: bool,
    /// Reported but excluded from the overall verdict.
    pub diagnostic: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    Inconclusive,
    Skipped,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    /// `None` when no point was evaluated or a residual was not finite.
    pub max_residual: Option<f64>,
    pub tolerance: f64,
    pub normalization: Normalization,
    pub pass: bool,
    pub status: CheckStatus,
    pub diagnostic: bool,
    pub n_evaluated: usize,
    pub n_skipped_degenerate: usize,
    pub n_resampled: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ParamsRecord {
    pub mu: [f64; 4],
    pub jsq: [f64; 4],
    pub symmetric: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema: String,
    pub seed: u64,
    pub params: ParamsRecord,
    pub tol_scale: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mutation: Option<Mutation>,
    pub checks: Vec<CheckResult>,
    pub overall: CheckStatus,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.overall == CheckStatus::Pass
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Largest residual over all checks, treating unevaluable ones as infinite.
    pub fn worst_residual(&self) -> f64 {
        self.checks
            .iter()
            .filter(|c| c.status != CheckStatus::Skipped)
            .map(|c| c.max_residual.unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max)
    }

    pub fn summary_table(&self) -> String {
        let mut s = format!(
            "{:<34} {:>12} {:>10} {:>6} {:>6}  status\n",
            "check", "residual", "tol", "n", "skip"
        );
        for c in &self.checks {
            let r = c
                .max_residual
                .map_or_else(|| "-".to_string(), |r| format!("{r:.3e}"));
            let tag = if c.diagnostic { " (diagnostic)" } else { "" };
            s.push_str(&format!(
                "{:<34} {:>12} {:>10.1e} {:>6} {:>6}  {:?}{}\n",
                c.name, r, c.tolerance, c.n_evaluated, c.n_skipped_degenerate, c.status, tag
            ));
        }
        s.push_str(&format!("overall: {:?}\n", self.overall));
        s
    }
}

struct Ctx {
    params: ModelParams,
    model: Option<XxzModel>,
}

impl Ctx {
    fn model(&self) -> &XxzModel {
        self.model.as_ref().expect("symmetric-only check")
    }
}

type Eval = fn(&Ctx, &Sample, &mut ChaCha8Rng) -> Result<f64>;

struct Check {
    spec: CheckSpec,
    eval: Eval,
}

fn is_degeneracy(e: &Error) -> bool {
    matches!(
        e,
        Error::DegeneratePoint(_)
            | Error::EigenvalueCollision(_)
            | Error::SeparationChartDegenerate(_)
            | Error::ThetaDegenerate(_)
            | Error::Singular(_)
    )
}

fn spec(
    name: &'static str,
    tolerance: f64,
    n_points: usize,
    kind: SampleKind,
    symmetric_only: bool,
) -> CheckSpec {
    CheckSpec {
        name,
        tolerance,
        n_points,
        normalization: Normalization::Relative,
        kind,
        symmetric_only,
        diagnostic: false,
    }
}

fn worst(rs: impl IntoIterator<Item = Residual>) -> f64 {
    Residual::worst_of(rs).normalized()
}

fn rand_c(rng: &mut ChaCha8Rng) -> C {
    uniform_c(rng) * 2.0
}

fn m_of(uv: &PhasePoint) -> Result<PhasePoint> {
    so4::chart_map(uv, Chart::M, ScalarMode::Complex)
}

// General-model checks (m-chart).

fn jacobi_p1_m(_: &Ctx, s: &Sample, _: &mut ChaCha8Rng) -> Result<f64> {
    let p = so4::p1_m();
    Ok(schouten_residual(&p, &p, s.point())?.normalized())
}

fn jacobi_p2_m(c: &Ctx, s: &Sample, _: &mut ChaCha8Rng) -> Result<f64> {
    let p = so4::p2_m(&c.params);
    Ok(schouten_residual(&p, &p, s.point())?.normalized())
}

fn compat_p1_p2_m(c: &Ctx, s: &Sample, _: &mut ChaCha8Rng) -> Result<f64> {
    Ok(schouten_residual(&so4::p1_m(), &so4::p2_m(&c.params), s.point())?.normalized())
}

fn pencil_m(c: &Ctx, s: &Sample, rng: &mut ChaCha8Rng) -> Result<f64> {
    let t = rand_c(rng);
    let p = so4::p1_m().combine(C::new(1.0, 0.0), &so4::p2_m(&c.params), t);
    Ok(schouten_residual(&p, &p, s.point())?.normalized())
}

fn lenard_m(c: &Ctx, s: &Sample, _: &mut ChaCha8Rng) -> Result<f64> {
    Ok(so4::lenard_residuals_m(&c.params, s.point())?
        .worst()
        .normalized())
}

fn charpoly(c: &Ctx, s: &Sample, rng: &mut ChaCha8Rng) -> Result<f64> {
    let (l, r) = (rand_c(rng), rand_c(rng));
    Ok(so4::char_poly_residual(&c.params, l, r, s.point())?.normalized())
}

fn lax_flow(c: &Ctx, s: &Sample, rng: &mut ChaCha8Rng) -> Result<f64> {
    let l = rand_c(rng);
    so4::lax_flow_residual(&c.params, l, s.point())?
        .map(|r| r.normalized())
        .ok_or_else(|| Error::InvalidParams("Lax check needs every J_i^2 > 0".into()))
}

fn manakov_span(c: &Ctx, _: &Sample, _: &mut ChaCha8Rng) -> Result<f64> {
    so4::manakov_span_fit(&c.params)
        .map(|(_, r)| r)
        .ok_or_else(|| Error::InvalidParams("Lax check needs every J_i^2 > 0".into()))
}

fn chart_roundtrip(_: &Ctx, s: &Sample, _: &mut ChaCha8Rng) -> Result<f64> {
    let p = s.point();
    let mut q = p.clone();
    for target in [Chart::Split, Chart::Uv, Chart::Split, Chart::M] {
        q = so4::chart_map(&q, target, ScalarMode::Complex)?;
    }
    let a = DVector::from_column_slice(p.coords());
    let b = DVector::from_column_slice(q.coords());
    Ok(Residual::vector(&a, &b, 0.0).normalized())
}

fn he_split(c: &Ctx, s: &Sample, _: &mut ChaCha8Rng) -> Result<f64> {
    let p = s.point();
    let sp = so4::chart_map(p, Chart::Split, ScalarMode::Complex)?;
    let a: C = so4::energy(&c.params, p.coords());
    let b: C = so4::energy_split(&c.params, sp.coords());
    Ok(Residual::scalar(a, b).normalized())
}

fn fd_m(c: &Ctx, s: &Sample, _: &mut ChaCha8Rng) -> Result<f64> {
    let p = s.point();
    let o = so4::observables_m(&c.params);
    let mut w: f64 = 0.0;
    for f in [&o.h0, &o.c, &o.he, &o.ke] {
        w = w.max(fd_check_scalar(f, p)?);
    }
    w = w.max(fd_check_bivector(&so4::p1_m(), p)?);
    w = w.max(fd_check_bivector(&so4::p2_m(&c.params), p)?);
    Ok(w)
}

fn euler_rhs_consistency(c: &Ctx, s: &Sample, _: &mut ChaCha8Rng) -> Result<f64> {
    let p = s.point();
    let o = so4::observables_m(&c.params);
    let (v, sc) = ham_field_scaled(&so4::p1_m(), &o.he, p)?;
    let m: [f64; 6] = std::array::from_fn(|i| p.coords()[i].re);
    let rhs = DVector::from_iterator(6, euler_rhs(&c.params, &m, Flow::He).map(C::from));
    Ok(Residual::vector(&v, &rhs, sc).normalized())
}

// Symmetric-model checks (uv-chart).

fn jacobi_uv(c: &Ctx, s: &Sample, _: &mut ChaCha8Rng) -> Result<f64> {
    let (p1, p2) = (xxz::p1_uv(), xxz::p2_uv(c.model()));
    let pt = s.point();
    Ok(worst([
        schouten_residual(&p1, &p1, pt)?,
        schouten_residual(&p2, &p2, pt)?,
        schouten_residual(&p1, &p2, pt)?,
    ]))
}

fn jacobi_q(c: &Ctx, s: &Sample, _: &mut ChaCha8Rng) -> Result<f64> {
    xxz::check_uv_domain(s.point())?;
    let q = xxz::q_uv(c.model());
    Ok(schouten_residual(&q, &q, s.point())?.normalized())
}

fn compat_p1_q(c: &Ctx, s: &Sample, _: &mut ChaCha8Rng) -> Result<f64> {
    xxz::check_uv_domain(s.point())?;
    Ok(schouten_residual(&xxz::p1_uv(), &xxz::q_uv(c.model()), s.point())?.normalized())
}

fn tensor_transport(c: &Ctx, s: &Sample, _: &mut ChaCha8Rng) -> Result<f64> {
    let pt = s.point();
    let mp = m_of(pt)?;
    let a = so4::chart_matrix(Chart::M, Chart::Uv)?;
    let f = so4::uv_tensor_factor();
    let t1 = so4::push_forward(&so4::p1_m().eval(&mp)?, &a) * f;
    let t2 = so4::push_forward(&so4::p2_m(&c.params).eval(&mp)?, &a) * f;
    Ok(worst([
        Residual::matrix(&t1, &xxz::p1_uv().eval(pt)?, 0.0),
        Residual::matrix(&t2, &xxz::p2_uv(c.model()).eval(pt)?, 0.0),
    ]))
}

fn observable_transport(c: &Ctx, s: &Sample, _: &mut ChaCha8Rng) -> Result<f64> {
    let pt = s.point();
    let m = m_of(pt)?;
    let mc = m.coords();
    let x = pt.coords();
    let model = c.model();
    Ok(worst([
        Residual::scalar(xxz::h0_uv(x), so4::h0(mc)),
        Residual::scalar(xxz::c2_uv(x), so4::pfaffian(mc) * 2.0),
        Residual::scalar(xxz::h1_uv(model, x), so4::energy(&c.params, mc) * -2.0),
        Residual::scalar(xxz::h2_uv(model, x), so4::second_integral(&c.params, mc)),
    ]))
}

fn x1_field_check(c: &Ctx, s: &Sample, _: &mut ChaCha8Rng) -> Result<f64> {
    let pt = s.point();
    let model = c.model();
    let o = xxz::uv_observables(model);
    let x1 = xxz::x1_field(model).eval(pt)?;
    let (a, sa) = ham_field_scaled(&xxz::p1_uv(), &o.h1, pt)?;
    let (b, sb) = ham_field_scaled(&xxz::p2_uv(model), &o.h0, pt)?;
    // zeta1 = z2 - z1 is a first integral of X1.
    let lz = x1[xxz::Z2] - x1[xxz::Z1];
    Ok(worst([
        Residual::vector(&x1, &a, sa),
        Residual::vector(&x1, &b, sb),
        Residual::new(lz.norm(), x1[xxz::Z1].norm()),
    ]))
}

fn transversality_i(c: &Ctx, s: &Sample, _: &mut ChaCha8Rng) -> Result<f64> {
    let pt = s.point();
    xxz::check_uv_domain(pt)?;
    let z = xxz::z_field();
    let o = xxz::uv_observables(c.model());
    let (lp1, sc) = lie_bivector_scaled(&z, &xxz::p1_uv(), pt)?;
    let zero = nalgebra::DMatrix::zeros(6, 6);
    Ok(worst([
        Residual::matrix(&lp1, &zero, sc),
        Residual::scalar(lie_scalar(&z, &o.h0, pt)?, C::new(1.0, 0.0)),
        Residual::scalar(lie_scalar(&z, &o.c2, pt)?, C::new(0.0, 0.0)),
    ]))
}

fn transversality_ii(c: &Ctx, s: &Sample, _: &mut ChaCha8Rng) -> Result<f64> {
    let (r, defect) = xxz::transversality_ii(c.model(), s.point())?;
    Ok(r.normalized().max(defect))
}

fn stackel(c: &Ctx, s: &Sample, rng: &mut ChaCha8Rng) -> Result<f64> {
    let (l, r) = (rand_c(rng), rand_c(rng));
    Ok(xxz::stackel_condition(c.model(), l, r, s.point())?.normalized())
}

fn q_casimirs(c: &Ctx, s: &Sample, _: &mut ChaCha8Rng) -> Result<f64> {
    let [h0, _, c2] = xxz::q_casimir_residuals(c.model(), s.point())?;
    Ok(worst([h0, c2]))
}

fn q_h1_casimir(c: &Ctx, s: &Sample, _: &mut ChaCha8Rng) -> Result<f64> {
    let [_, h1, _] = xxz::q_casimir_residuals(c.model(), s.point())?;
    Ok(h1.normalized())
}

fn q_rank(c: &Ctx, s: &Sample, _: &mut ChaCha8Rng) -> Result<f64> {
    let sv = xxz::q_singular_values(c.model(), s.point())?;
    let top = sv[0];
    // Rank exactly four: sigma_5 negligible, sigma_4 not.
    if sv[3] <= 1e-6 * top {
        return Ok(f64::INFINITY);
    }
    Ok(sv[4] / (1.0 + top))
}

fn involution(c: &Ctx, s: &Sample, _: &mut ChaCha8Rng) -> Result<f64> {
    Ok(xxz::involution_residual(c.model(), s.point())?.normalized())
}

fn fd_uv(c: &Ctx, s: &Sample, _: &mut ChaCha8Rng) -> Result<f64> {
    let pt = s.point();
    let model = c.model();
    let o = xxz::uv_observables(model);
    let mut w: f64 = 0.0;
    for f in [&o.h0, &o.c2, &o.h1, &o.h2] {
        w = w.max(fd_check_scalar(f, pt)?);
    }
    w = w.max(fd_check_vector(&xxz::x1_field(model), pt)?);
    w = w.max(fd_check_vector(&xxz::z_field(), pt)?);
    w = w.max(fd_check_bivector(&xxz::q_uv(model), pt)?);
    Ok(w)
}

fn phi1(c: &Ctx, s: &Sample, _: &mut ChaCha8Rng) -> Result<f64> {
    Ok(leaf::phi1(c.model(), s.point())?.normalized())
}

fn phi2(c: &Ctx, s: &Sample, _: &mut ChaCha8Rng) -> Result<f64> {
    Ok(leaf::phi2(c.model(), s.point())?.normalized())
}

// Leaf checks.

fn embed_roundtrip(_: &Ctx, s: &Sample, _: &mut ChaCha8Rng) -> Result<f64> {
    let l = s.leaf();
    let back = LeafChart::project(&l.embed())?;
    let mut w = Residual::zero();
    for (a, b) in back.coords.iter().zip(l.coords) {
        w = w.worst(Residual::scalar(*a, b));
    }
    w = w.worst(Residual::scalar(back.h0, l.h0));
    w = w.worst(Residual::scalar(back.c2, l.c2));
    Ok(w.normalized())
}

fn restricted(c: &Ctx, s: &Sample, _: &mut ChaCha8Rng) -> Result<f64> {
    let (p, q) = leaf::restricted_tensors(c.model(), s.leaf());
    let (po, qo) = leaf::restricted_tensors_oracle(c.model(), s.leaf())?;
    Ok(worst([
        Residual::matrix(&p, &po, 0.0),
        Residual::matrix(&q, &qo, 0.0),
    ]))
}

fn nijenhuis_closed(c: &Ctx, s: &Sample, _: &mut ChaCha8Rng) -> Result<f64> {
    let n = leaf::nijenhuis(c.model(), s.leaf())?;
    let num = leaf::n_star_numeric(c.model(), s.leaf())?;
    Ok(Residual::matrix(&n.n_star, &num, 0.0).normalized())
}

fn spectrum(c: &Ctx, s: &Sample, _: &mut ChaCha8Rng) -> Result<f64> {
    let n = leaf::nijenhuis(c.model(), s.leaf())?;
    let l1 = C::from(c.model().lambda1());
    leaf::spectrum_defect(&n.n_star, l1, n.lambda2)
}

fn aux_identities(c: &Ctx, s: &Sample, _: &mut ChaCha8Rng) -> Result<f64> {
    let model = c.model();
    let l = s.leaf();
    let a = leaf::aux(model, l);
    let l2 = leaf::lambda2_of(model, l.u1(), l.u2());
    let k = (l2 - model.mu1 + model.mu2) / model.mu3;
    Ok(worst([
        Residual::new(
            (a.g * a.g - (k * k - 4.0)).norm(),
            (a.g * a.g).norm().max((k * k).norm()),
        ),
        Residual::scalar(a.f, l2 - model.lambda1()),
    ]))
}

fn y_identities(c: &Ctx, s: &Sample, _: &mut ChaCha8Rng) -> Result<f64> {
    let model = c.model();
    let mut rs = leaf::y_derivative_identities(model, s.leaf())?.to_vec();
    rs.push(leaf::y_identity_residual(model, s.leaf())?);
    Ok(worst(rs))
}

fn deformation_factorization(c: &Ctx, s: &Sample, _: &mut ChaCha8Rng) -> Result<f64> {
    Ok(leaf::deformation_xi2(c.model(), s.leaf())?
        .factorization
        .normalized())
}

fn deformation_termination(c: &Ctx, s: &Sample, _: &mut ChaCha8Rng) -> Result<f64> {
    let d = leaf::deformation_xi2(c.model(), s.leaf())?;
    if d.order != 3 {
        return Ok(f64::INFINITY);
    }
    Ok(d.termination.normalized())
}

fn deformation_xi2(c: &Ctx, s: &Sample, _: &mut ChaCha8Rng) -> Result<f64> {
    let d = leaf::deformation_xi2(c.model(), s.leaf())?;
    Ok(Residual::scalar(d.xi2_algorithmic, d.xi2_closed).normalized())
}

fn dn_canonical_p(c: &Ctx, s: &Sample, _: &mut ChaCha8Rng) -> Result<f64> {
    let [(bp, sp), _] = leaf::dn_brackets(c.model(), s.leaf())?;
    let one = C::new(1.0, 0.0);
    Ok(Residual::matrix(&bp, &leaf::canonical_form(one, one), sp).normalized())
}

fn dn_canonical_q(c: &Ctx, s: &Sample, _: &mut ChaCha8Rng) -> Result<f64> {
    let n = leaf::nijenhuis(c.model(), s.leaf())?;
    let [_, (bq, sq)] = leaf::dn_brackets(c.model(), s.leaf())?;
    Ok(Residual::matrix(&bq, &leaf::canonical_form(n.lambda1, n.lambda2), sq).normalized())
}

fn dn_eigenforms(c: &Ctx, s: &Sample, _: &mut ChaCha8Rng) -> Result<f64> {
    Ok(leaf::eigenform_residual(c.model(), s.leaf())?.normalized())
}

fn dn_theta(c: &Ctx, s: &Sample, _: &mut ChaCha8Rng) -> Result<f64> {
    let f = leaf::dn_fields(c.model());
    let p = s.leaf().point();
    let (b, sc) = crate::tensor::bracket_scaled(&leaf::leaf_p(), &f.zeta1, &f.theta1, &p)?;
    let th = f.theta1.eval(&p)?;
    Ok(Residual::new((b + th * 2.0).norm(), sc).normalized())
}

fn fd_leaf(c: &Ctx, s: &Sample, _: &mut ChaCha8Rng) -> Result<f64> {
    leaf::check_dn_domain(c.model(), s.leaf())?;
    let f = leaf::dn_fields(c.model());
    let p = s.leaf().point();
    let mut w: f64 = 0.0;
    for g in [&f.zeta1, &f.xi1, &f.lambda2, &f.xi2, &f.theta1] {
        w = w.max(fd_check_scalar(g, &p)?);
    }
    Ok(w)
}

fn generalized_lenard(c: &Ctx, s: &Sample, _: &mut ChaCha8Rng) -> Result<f64> {
    let g = leaf::generalized_lenard(c.model(), s.leaf())?;
    Ok(worst([
        g.c1_residual,
        g.c2_residual,
        Residual::scalar(g.c1, g.lambda1 + g.lambda2),
        Residual::scalar(g.c2, -(g.lambda1 * g.lambda2)),
    ]))
}

fn registry() -> Vec<Check> {
    use SampleKind::*;
    let c = |spec: CheckSpec, eval: Eval| Check { spec, eval };
    let diag = |mut s: CheckSpec| {
        s.diagnostic = true;
        s
    };
    let abs = |mut s: CheckSpec| {
        s.normalization = Normalization::Absolute;
        s
    };
    vec![
        c(spec("jacobi.p1_m", 1e-11, 50, MComplex, false), jacobi_p1_m),
        c(spec("jacobi.p2_m", 1e-11, 50, MComplex, false), jacobi_p2_m),
        c(
            spec("compat.p1_p2_m", 1e-11, 50, MComplex, false),
            compat_p1_p2_m,
        ),
        c(spec("pencil.p1_p2_m", 1e-11, 50, MComplex, false), pencil_m),
        c(spec("lenard.chain_m", 1e-12, 50, MComplex, false), lenard_m),
        c(
            spec("charpoly.identity", 1e-10, 100, MComplex, false),
            charpoly,
        ),
        c(spec("lax.flow", 1e-9, 50, MComplex, false), lax_flow),
        c(
            spec("lax.manakov_span", 1e-12, 1, MReal, false),
            manakov_span,
        ),
        c(
            spec("charts.roundtrip", 1e-14, 100, MComplex, false),
            chart_roundtrip,
        ),
        c(
            spec("transport.he_split", 1e-12, 50, MComplex, false),
            he_split,
        ),
        c(abs(spec("fd.gradients_m", 1e-6, 50, MComplex, false)), fd_m),
        c(
            spec("dynamics.euler_rhs", 1e-13, 50, MReal, false),
            euler_rhs_consistency,
        ),
        c(spec("jacobi.uv", 1e-11, 50, UvComplex, true), jacobi_uv),
        c(spec("jacobi.q", 1e-11, 50, UvComplex, true), jacobi_q),
        c(spec("compat.p1_q", 1e-11, 50, UvComplex, true), compat_p1_q),
        c(
            spec("transport.tensors_uv", 1e-12, 50, UvComplex, true),
            tensor_transport,
        ),
        c(
            spec("transport.observables_uv", 1e-12, 100, UvComplex, true),
            observable_transport,
        ),
        c(
            spec("x1.hamiltonian", 1e-12, 50, UvComplex, true),
            x1_field_check,
        ),
        c(
            spec("transversality.i", 1e-12, 50, UvComplex, true),
            transversality_i,
        ),
        c(
            spec("transversality.ii", 1e-12, 50, UvComplex, true),
            transversality_ii,
        ),
        c(
            spec("stackel.second_lie_derivative", 1e-9, 50, UvComplex, true),
            stackel,
        ),
        c(
            spec("q.casimirs_h0_c2", 1e-12, 50, UvComplex, true),
            q_casimirs,
        ),
        c(
            diag(spec("q.h1_not_casimir", 1e-12, 50, UvComplex, true)),
            q_h1_casimir,
        ),
        c(spec("q.rank4", 1e-10, 50, UvComplex, true), q_rank),
        c(
            spec("involution.p1_q", 1e-11, 50, UvComplex, true),
            involution,
        ),
        c(
            abs(spec("fd.gradients_uv", 1e-6, 50, UvComplex, true)),
            fd_uv,
        ),
        c(spec("separation.phi1", 1e-12, 100, UvComplex, true), phi1),
        c(spec("separation.phi2", 1e-9, 100, UvComplex, true), phi2),
        c(
            spec("leaf.embed_roundtrip", 1e-13, 100, Leaf, true),
            embed_roundtrip,
        ),
        c(
            spec("leaf.restricted_tensors", 1e-11, 50, Leaf, true),
            restricted,
        ),
        c(
            spec("nijenhuis.closed_form", 1e-12, 50, Leaf, true),
            nijenhuis_closed,
        ),
        c(spec("nijenhuis.spectrum", 1e-9, 50, Leaf, true), spectrum),
        c(
            spec("leaf.aux_identities", 1e-12, 50, Leaf, true),
            aux_identities,
        ),
        c(
            spec("leaf.y_identities", 1e-11, 50, Leaf, true),
            y_identities,
        ),
        c(
            spec("deformation.factorization", 1e-11, 50, Leaf, true),
            deformation_factorization,
        ),
        c(
            spec("deformation.termination", 1e-10, 50, Leaf, true),
            deformation_termination,
        ),
        c(
            spec("deformation.xi2_agreement", 1e-10, 50, Leaf, true),
            deformation_xi2,
        ),
        c(
            spec("dn.canonical_p", 1e-10, 50, Leaf, true),
            dn_canonical_p,
        ),
        c(
            spec("dn.canonical_q", 1e-10, 50, Leaf, true),
            dn_canonical_q,
        ),
        c(spec("dn.eigenforms", 1e-9, 50, Leaf, true), dn_eigenforms),
        c(
            spec("dn.zeta_theta_bracket", 1e-10, 50, Leaf, true),
            dn_theta,
        ),
        c(
            abs(spec("fd.gradients_leaf", 1e-6, 50, Leaf, true)),
            fd_leaf,
        ),
        c(
            diag(spec("lenard.generalized_leaf", 1e-10, 20, Leaf, true)),
            generalized_lenard,
        ),
    ]
}

/// Names and default settings of every registered check.
pub fn check_specs() -> Vec<CheckSpec> {
    registry().into_iter().map(|c| c.spec).collect()
}

/// Points appended to the first separation relation: the three worked
/// uv-chart points `u = v = (1, 1), z = 0`; `z = (1, 1)`; `z = (1, 0)`.
fn phi1_worked_points() -> Vec<Sample> {
    [
        [1.0, 1.0, 0.0, 1.0, 1.0, 0.0],
        [0.0, 0.0, 1.0, 0.0, 0.0, 1.0],
        [0.0, 0.0, 1.0, 0.0, 0.0, 0.0],
    ]
    .iter()
    .map(|x| Sample::Point(PhasePoint::from_real(Chart::Uv, x).expect("six coordinates")))
    .collect()
}

fn run_check(ctx: &Ctx, check: &Check, idx: usize, seed: u64, ov: &Overrides) -> CheckResult {
    let spec = check.spec;
    let tol = spec.tolerance * ov.tol_scale.unwrap_or(1.0);
    let n = ov.n_points.unwrap_or(spec.n_points);
    let mut res = CheckResult {
        name: spec.name.to_string(),
        max_residual: None,
        tolerance: tol,
        normalization: spec.normalization,
        pass: false,
        status: CheckStatus::Skipped,
        diagnostic: spec.diagnostic,
        n_evaluated: 0,
        n_skipped_degenerate: 0,
        n_resampled: 0,
        note: None,
    };
    if spec.symmetric_only && ctx.model.is_none() {
        res.note = Some("requires mu4 = mu3".into());
        return res;
    }
    if spec.name.starts_with("lax.") && ctx.params.j_positive().is_none() {
        res.note = Some("requires every J_i^2 > 0".into());
        return res;
    }
    if spec.name == "lax.flow" {
        res.note = Some(format!(
            "flow of H_M = sum m_ij^2 / (2 (J_i + J_j)) under P1; dL/dt = {:+} [L, B]",
            so4::LAX_SIGN
        ));
    }
    if spec.name == "q.h1_not_casimir" {
        res.note = Some("expected nonzero: the Casimirs of Q are H0 and C2 only".into());
    }
    if spec.name == "lenard.generalized_leaf" {
        res.note = Some("Q dH1 = P dH2 + (l1 + l2) P dH1, Q dH2 = -l1 l2 P dH1".into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(idx as u64);
    let guards = match (spec.kind, &ctx.model) {
        (SampleKind::UvComplex | SampleKind::Leaf, Some(m)) if spec.name != "separation.phi1" => {
            Guards::leaf(*m)
        }
        _ => Guards::none(),
    };
    let sampled = match sample_points(spec.kind, n, &mut rng, &guards) {
        Ok(s) => s,
        Err(e) => {
            res.status = CheckStatus::Inconclusive;
            res.note = Some(e.to_string());
            return res;
        }
    };
    res.n_resampled = sampled.resampled;
    let mut points = sampled.points;
    if spec.name == "separation.phi1" {
        points.extend(phi1_worked_points());
    }
    let mut worst: f64 = 0.0;
    for s in &points {
        match (check.eval)(ctx, s, &mut rng) {
            Ok(r) => {
                res.n_evaluated += 1;
                worst = if r.is_nan() {
                    f64::INFINITY
                } else {
                    worst.max(r)
                };
            }
            Err(e) if is_degeneracy(&e) => res.n_skipped_degenerate += 1,
            Err(e) => {
                res.n_evaluated += 1;
                worst = f64::INFINITY;
                res.note.get_or_insert_with(|| e.to_string());
            }
        }
    }
    res.max_residual = (res.n_evaluated > 0 && worst.is_finite()).then_some(worst);
    res.pass = res.n_evaluated > 0 && worst <= tol;
    let skip_frac = res.n_skipped_degenerate as f64 / points.len() as f64;
    res.status = if skip_frac > MAX_SKIP_FRACTION || res.n_evaluated == 0 {
        CheckStatus::Inconclusive
    } else if res.pass {
        CheckStatus::Pass
    } else {
        CheckStatus::Fail
    };
    res
}

/// Rejects parameters for which the construction is undefined.
pub fn validate_params(params: &ModelParams) -> Result<()> {
    let [m1, m2, ..] = params.mu();
    if (m1 + m2).abs() < EPS_DEG {
        return Err(Error::DegenerateConstantEigenvalue(m1 + m2));
    }
    Ok(())
}

/// Runs the full registry. Symmetric-only checks are skipped when
/// `mu4 != mu3`; diagnostics do not enter the overall verdict.
pub fn run_suite(params: &ModelParams, seed: u64, ov: &Overrides) -> Result<VerificationReport> {
    run_selected(params, seed, ov, |_| true)
}

/// Runs the checks whose names satisfy `select`. Each check keeps the
/// random stream it has in the full suite, so results coincide.
pub fn run_selected(
    params: &ModelParams,
    seed: u64,
    ov: &Overrides,
    select: impl Fn(&str) -> bool + Sync,
) -> Result<VerificationReport> {
    validate_params(params)?;
    if let Some(n) = ov.n_points {
        if n == 0 {
            return Err(Error::InvalidInput("points must be at least 1".into()));
        }
    }
    if let Some(t) = ov.tol_scale {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::InvalidInput(format!(
                "tol-scale must be positive, got {t}"
            )));
        }
    }
    let model = if params.is_symmetric() {
        Some(XxzModel::from_params(params)?.with_mutation(ov.mutation))
    } else {
        None
    };
    let ctx = Ctx {
        params: *params,
        model,
    };
    let checks = registry();
    let run = || -> Vec<CheckResult> {
        checks
            .par_iter()
            .enumerate()
            .filter(|(_, c)| select(c.spec.name))
            .map(|(i, c)| run_check(&ctx, c, i, seed, ov))
            .collect()
    };
    let mut results = match ov.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map_err(|e| Error::InvalidInput(e.to_string()))?
            .install(run),
        None => run(),
    };
    results.sort_by(|a, b| a.name.cmp(&b.name));
    let ok = results
        .iter()
        .filter(|r| !r.diagnostic && r.status != CheckStatus::Skipped)
        .all(|r| r.status == CheckStatus::Pass);
    Ok(VerificationReport {
        schema: SCHEMA.into(),
        seed,
        params: ParamsRecord {
            mu: params.mu(),
            jsq: params.jsq(),
            symmetric: params.is_symmetric(),
        },
        tol_scale: ov.tol_scale.unwrap_or(1.0),
        mutation: ov.mutation,
        checks: results,
        overall: if ok {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn sampling_is_deterministic() {
        let g = Guards::none();
        let a = sample_points(SampleKind::MComplex, 10, &mut rng(7), &g).unwrap();
        let b = sample_points(SampleKind::MComplex, 10, &mut rng(7), &g).unwrap();
        for (x, y) in a.points.iter().zip(&b.points) {
            assert_eq!(x.point().coords(), y.point().coords());
        }
    }

    #[test]
    fn real_samples_in_unit_box() {
        let s = sample_points(SampleKind::MReal, 100, &mut rng(1), &Guards::none()).unwrap();
        assert_eq!(s.points.len(), 100);
        for p in &s.points {
            assert_eq!(p.point().max_imag(), 0.0);
            assert!(p.point().norm_inf() <= 1.0);
        }
    }

    #[test]
    fn leaf_samples_respect_guards() {
        let m = XxzModel::new(1.0, 2.0, 3.0).unwrap();
        let s = sample_points(SampleKind::Leaf, 50, &mut rng(3), &Guards::leaf(m)).unwrap();
        for p in &s.points {
            let l = p.leaf();
            assert!(l.u1().norm() > 0.1 && l.u2().norm() > 0.1);
            let a = leaf::aux(&m, l);
            assert!(a.g.norm() > EPS_DEG && a.f.norm() > EPS_DEG && a.theta1.norm() > EPS_DEG);
        }
    }

    #[test]
    fn impossible_guard_starves() {
        let g = Guards {
            u_min: 10.0,
            leaf_model: None,
        };
        let e = sample_points(SampleKind::UvComplex, 1, &mut rng(0), &g).unwrap_err();
        assert!(e.to_string().contains("sampler starved"));
    }

    #[test]
    fn degenerate_constant_eigenvalue_rejected_up_front() {
        let p = ModelParams::symmetric(1.0, -1.0, 3.0).unwrap();
        let e = run_suite(&p, 1, &Overrides::default()).unwrap_err();
        assert!(e.to_string().contains("degenerate constant eigenvalue"));
    }

    #[test]
    fn check_names_are_unique() {
        let mut names: Vec<_> = check_specs().iter().map(|s| s.name).collect();
        let n = names.len();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), n);
    }
}
