//! Fixed-step RK4 integration of the linear, perturbed linear and nonlinear
//! systems, plus helpers that compare trajectories against decay envelopes.

use std::ops::{Add, Mul};

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::floquet_lyapunov::PeriodicLyapunovSolution;
use crate::model::{LinearizedSystem, MathieuModel, Nonlinearity};
use crate::periodic_signal::PeriodicSignal;
use crate::robustness::{Perturbation, ScaledPerturbation};

pub type State = Vector2<f64>;

pub const MIN_STEPS_PER_PERIOD: usize = 256;
pub const DEFAULT_STEPS_PER_PERIOD: usize = 4096;
/// States whose norm exceeds this are reported as divergent.
pub const DIVERGENCE_CUTOFF: f64 = 1e12;

/// One classical Runge–Kutta step for `y' = f(t, y)`.
pub fn rk4_step<T>(f: impl Fn(f64, &T) -> T, t: f64, y: &T, h: f64) -> T
where
    T: Copy + Add<Output = T> + Mul<f64, Output = T>,
{
    let half = 0.5 * h;
    let k1 = f(t, y);
    let k2 = f(t + half, &(*y + k1 * half));
    let k3 = f(t + half, &(*y + k2 * half));
    let k4 = f(t + h, &(*y + k3 * h));
    *y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemTag {
    Linear,
    PerturbedLinear,
    Nonlinear,
    PerturbedNonlinear,
    Custom,
}

/// Right-hand side of a planar first-order system in `(y, y')`.
pub trait PlanarSystem {
    fn rhs(&self, t: f64, state: &State) -> State;

    fn period(&self) -> f64;

    fn mu(&self) -> f64;

    fn tag(&self) -> SystemTag;
}

/// `v' = A(t,μ)v`, optionally with the perturbation `ΔA`.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    lin: LinearizedSystem,
    mu: f64,
    pert: Option<ScaledPerturbation>,
}

impl LinearSystem {
    pub fn new(lin: &LinearizedSystem, mu: f64) -> Self {
        Self {
            lin: lin.clone(),
            mu,
            pert: None,
        }
    }

    pub fn perturbed(lin: &LinearizedSystem, mu: f64, pert: &ScaledPerturbation) -> Self {
        Self {
            lin: lin.clone(),
            mu,
            pert: Some(pert.clone()),
        }
    }
}

impl PlanarSystem for LinearSystem {
    fn rhs(&self, t: f64, v: &State) -> State {
        let mut m = self.lin.matrix(t, self.mu);
        if let Some(p) = &self.pert {
            m += p.delta_a(t, self.mu);
        }
        m * v
    }

    fn period(&self) -> f64 {
        self.lin.period()
    }

    fn mu(&self) -> f64 {
        self.mu
    }

    fn tag(&self) -> SystemTag {
        if self.pert.is_some() {
            SystemTag::PerturbedLinear
        } else {
            SystemTag::Linear
        }
    }
}

/// `y'' + (α+Δα)μy' + ((β+Δβ)μ² + μ(φ(t)+Δφ(t))) f(y) = 0`.
#[derive(Debug, Clone)]
pub struct NonlinearSystem {
    alpha: f64,
    beta: f64,
    phi: PeriodicSignal,
    f: Nonlinearity,
    mu: f64,
    pert: Option<Perturbation>,
}

impl NonlinearSystem {
    /// Uses the model's own `f`; states are absolute `(y, y')`.
    pub fn new(model: &MathieuModel, mu: f64) -> Self {
        Self::with_nonlinearity(model, model.f.clone(), mu)
    }

    /// Same coefficients with a different `f`, e.g. the shifted `g(z) = f(γ+z)`.
    pub fn with_nonlinearity(model: &MathieuModel, f: Nonlinearity, mu: f64) -> Self {
        Self {
            alpha: model.alpha,
            beta: model.beta,
            phi: model.phi.clone(),
            f,
            mu,
            pert: None,
        }
    }

    pub fn perturbed(mut self, pert: &Perturbation) -> Self {
        self.pert = Some(pert.clone());
        self
    }
}

impl PlanarSystem for NonlinearSystem {
    fn rhs(&self, t: f64, x: &State) -> State {
        let (da, db, dphi) = match &self.pert {
            Some(p) => (p.d_alpha, p.d_beta, p.d_phi_at(t)),
            None => (0.0, 0.0, 0.0),
        };
        let mu = self.mu;
        let coeff = (self.beta + db) * mu * mu + mu * (self.phi.eval(t) + dphi);
        State::new(x[1], -(self.alpha + da) * mu * x[1] - coeff * self.f.value(x[0]))
    }

    fn period(&self) -> f64 {
        self.phi.period()
    }

    fn mu(&self) -> f64 {
        self.mu
    }

    fn tag(&self) -> SystemTag {
        if self.pert.is_some() {
            SystemTag::PerturbedNonlinear
        } else {
            SystemTag::Nonlinear
        }
    }
}

/// Ad-hoc system from a closure, mainly for harness checks.
pub struct FnSystem<F> {
    pub f: F,
    pub period: f64,
    pub mu: f64,
}

impl<F: Fn(f64, &State) -> State> PlanarSystem for FnSystem<F> {
    fn rhs(&self, t: f64, x: &State) -> State {
        (self.f)(t, x)
    }

    fn period(&self) -> f64 {
        self.period
    }

    fn mu(&self) -> f64 {
        self.mu
    }

    fn tag(&self) -> SystemTag {
        SystemTag::Custom
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub mu: f64,
    pub system_tag: SystemTag,
    /// Set when the state norm crossed [`DIVERGENCE_CUTOFF`]; the trajectory
    /// stops at the last finite sample.
    pub diverged: bool,
}

impl Trajectory {
    pub fn last_state(&self) -> State {
        *self.states.last().expect("trajectory has samples")
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationOptions {
    pub steps_per_period: usize,
    /// Record every `stride`-th step (the final state is always recorded).
    pub stride: usize,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        Self {
            steps_per_period: DEFAULT_STEPS_PER_PERIOD,
            stride: 1,
        }
    }
}

/// Integrates from `(y0, y1)` over `[0, t_end]` with fixed steps `T/steps_per_period`.
pub fn integrate(
    system: &impl PlanarSystem,
    y0: f64,
    y1: f64,
    t_end: f64,
    opts: IntegrationOptions,
) -> Result<Trajectory> {
    if opts.steps_per_period < MIN_STEPS_PER_PERIOD {
        return Err(Error::InvalidParameter(format!(
            "need at least {MIN_STEPS_PER_PERIOD} steps per period, got {}",
            opts.steps_per_period
        )));
    }
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(Error::InvalidParameter(format!("t_end must be > 0, got {t_end}")));
    }
    let stride = opts.stride.max(1);
    let h = system.period() / opts.steps_per_period as f64;
    let full = (t_end / h).floor() as usize;
    let rem = t_end - full as f64 * h;
    let n_steps = if rem > 1e-9 * h { full + 1 } else { full };

    let mut times = vec![0.0];
    let mut states = vec![State::new(y0, y1)];
    let mut x = states[0];
    let mut diverged = false;
    for i in 0..n_steps {
        let t = i as f64 * h;
        let dt = if i == full { rem } else { h };
        let next = rk4_step(|s, v: &State| system.rhs(s, v), t, &x, dt);
        if !(next.iter().all(|c| c.is_finite()) && next.norm() <= DIVERGENCE_CUTOFF) {
            diverged = true;
            break;
        }
        x = next;
        let t_next = if i == full { t_end } else { (i + 1) as f64 * h };
        if (i + 1) % stride == 0 || i + 1 == n_steps {
            times.push(t_next);
            states.push(x);
        }
    }
    Ok(Trajectory {
        times,
        states,
        mu: system.mu(),
        system_tag: system.tag(),
        diverged,
    })
}

/// `⟨H(t mod T)v(t), v(t)⟩` with `H` extended periodically.
pub fn lyapunov_value(sol: &PeriodicLyapunovSolution, traj: &Trajectory, t_index: usize) -> f64 {
    let v = traj.states[t_index];
    let h = sol.at(traj.times[t_index]);
    v.dot(&(h * v))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeReport {
    /// `max_t (‖v(t)‖² − envelope(t))`.
    pub max_excess: f64,
    pub worst_time: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub pass: bool,
}

/// Checks `‖v(t)‖² ≤ envelope(t)` with slack `1e-9 (1 + envelope(0))`.
pub fn verify_envelope(traj: &Trajectory, envelope: impl Fn(f64) -> f64) -> EnvelopeReport {
    let tolerance = 1e-9 * (1.0 + envelope(0.0));
    verify_envelope_with(traj, envelope, tolerance)
}

/// Same check with an explicit absolute tolerance, for trajectories whose
/// scale is far from one.
pub fn verify_envelope_with(traj: &Trajectory, envelope: impl Fn(f64) -> f64, tolerance: f64) -> EnvelopeReport {
    let mut max_excess = f64::NEG_INFINITY;
    let mut worst_time = 0.0;
    for (t, v) in traj.times.iter().zip(&traj.states) {
        let excess = v.norm_squared() - envelope(*t);
        if excess > max_excess {
            max_excess = excess;
            worst_time = *t;
        }
    }
    EnvelopeReport {
        max_excess,
        worst_time,
        tolerance,
        samples: traj.len(),
        pass: !traj.diverged && max_excess <= tolerance,
    }
}
