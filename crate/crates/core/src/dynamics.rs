//! Real-coordinate RK4 integration of the Euler flow with invariant monitoring.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::so4::{energy, h0, p1_entries, pfaffian, second_integral, ModelParams};

pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_T_END: f64 = 10.0;
pub const DEFAULT_RECORD_EVERY: usize = 100;

pub type State = [f64; 6];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Flow {
    /// Generated by `H_E` under `P1`.
    He,
    /// Generated by `H1 = -2 H_E` under `P1`.
    H1,
}

/// `P1(m) dH` for the chosen Hamiltonian.
pub fn euler_rhs(params: &ModelParams, m: &State, flow: Flow) -> State {
    let a = params.a_coeffs();
    let p = p1_entries(m);
    let factor = match flow {
        Flow::He => 1.0,
        Flow::H1 => -2.0,
    };
    let mut out = [0.0; 6];
    for (i, o) in out.iter_mut().enumerate() {
        *o = factor * (0..6).map(|j| p[i][j] * a[j] * m[j]).sum::<f64>();
    }
    out
}

fn axpy(y: &State, h: f64, k: &State) -> State {
    std::array::from_fn(|i| y[i] + h * k[i])
}

/// One classical Runge-Kutta step along the `H_E` flow.
pub fn rk4_step(params: &ModelParams, m: &State, dt: f64) -> State {
    let f = |x: &State| euler_rhs(params, x, Flow::He);
    let k1 = f(m);
    let k2 = f(&axpy(m, dt / 2.0, &k1));
    let k3 = f(&axpy(m, dt / 2.0, &k2));
    let k4 = f(&axpy(m, dt, &k3));
    std::array::from_fn(|i| m[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

/// `n` RK4 steps of size `dt` (negative `dt` runs backwards).
pub fn propagate(params: &ModelParams, m0: &State, dt: f64, n: usize) -> State {
    (0..n).fold(*m0, |m, _| rk4_step(params, &m, dt))
}

/// Monitored quantities at one sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Invariants {
    pub h0: f64,
    pub c: f64,
    pub he: f64,
    pub ke: f64,
    /// `z2 - z1 = sqrt(2) m23`, conserved in the symmetric case.
    pub zeta1: f64,
}

impl Invariants {
    pub fn at(params: &ModelParams, m: &State) -> Self {
        Invariants {
            h0: h0(m),
            c: pfaffian(m),
            he: energy(params, m),
            ke: second_integral(params, m),
            zeta1: 2f64.sqrt() * m[3],
        }
    }

    pub fn as_array(&self) -> [f64; 5] {
        [self.h0, self.c, self.he, self.ke, self.zeta1]
    }

    pub const NAMES: [&'static str; 5] = ["H0", "C", "HE", "KE", "zeta1"];

    /// Largest absolute summand of each invariant, used to normalize drift.
    fn scales(params: &ModelParams, m: &State) -> [f64; 5] {
        let maxabs = |it: &mut dyn Iterator<Item = f64>| it.map(f64::abs).fold(0.0, f64::max);
        let a = params.a_coeffs();
        let b = params.b_coeffs();
        [
            maxabs(&mut m.iter().map(|x| x * x)),
            maxabs(&mut [m[0] * m[5], m[2] * m[3], m[1] * m[4]].into_iter()),
            maxabs(&mut (0..6).map(|i| 0.5 * a[i] * m[i] * m[i])),
            maxabs(&mut (0..6).map(|i| b[i] * m[i] * m[i])),
            (2f64.sqrt() * m[3]).abs(),
        ]
    }
}

/// Largest relative deviation of each invariant from its initial value,
/// normalized by `max(|I(0)|, largest summand of I(0))`; zero when both vanish.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Drift {
    pub h0: f64,
    pub c: f64,
    pub he: f64,
    pub ke: f64,
    pub zeta1: f64,
}

impl Drift {
    pub fn as_array(&self) -> [f64; 5] {
        [self.h0, self.c, self.he, self.ke, self.zeta1]
    }

    pub fn max(&self) -> f64 {
        self.as_array().into_iter().fold(0.0, f64::max)
    }

    fn from_array(a: [f64; 5]) -> Self {
        Drift {
            h0: a[0],
            c: a[1],
            he: a[2],
            ke: a[3],
            zeta1: a[4],
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub invariants: Vec<Invariants>,
    /// Drift over every step, not only the recorded samples.
    pub drift: Drift,
    /// Set when a nonfinite state stopped the integration early.
    pub aborted: bool,
}

/// Fixed-step RK4 from `m0` to `t_end`, recording every `record_every` steps
/// and at the final step.
pub fn integrate(
    params: &ModelParams,
    m0: &State,
    dt: f64,
    t_end: f64,
    record_every: usize,
) -> Result<Trajectory> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidInput(format!(
            "dt must be positive, got {dt}"
        )));
    }
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(Error::InvalidInput(format!(
            "t_end must be positive, got {t_end}"
        )));
    }
    if record_every == 0 {
        return Err(Error::InvalidInput(
            "record_every must be at least 1".into(),
        ));
    }
    if m0.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("m0 must be finite".into()));
    }
    let n = (t_end / dt).round().max(1.0) as usize;
    let inv0 = Invariants::at(params, m0).as_array();
    let scales = Invariants::scales(params, m0);
    let denom: [f64; 5] = std::array::from_fn(|i| inv0[i].abs().max(scales[i]));
    let mut drift = [0.0f64; 5];
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![*m0],
        invariants: vec![Invariants::at(params, m0)],
        drift: Drift::default(),
        aborted: false,
    };
    let mut m = *m0;
    for step in 1..=n {
        m = rk4_step(params, &m, dt);
        if m.iter().any(|x| !x.is_finite()) {
            traj.aborted = true;
            break;
        }
        let inv = Invariants::at(params, &m);
        for (i, v) in inv.as_array().iter().enumerate() {
            let d = (v - inv0[i]).abs();
            let rel = if denom[i] > 0.0 { d / denom[i] } else { d };
            drift[i] = drift[i].max(rel);
        }
        if step % record_every == 0 || step == n {
            traj.times.push(step as f64 * dt);
            traj.states.push(m);
            traj.invariants.push(inv);
        }
    }
    traj.drift = Drift::from_array(drift);
    Ok(traj)
}
