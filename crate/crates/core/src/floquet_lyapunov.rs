//! Matrizants, monodromy spectra and the periodic Lyapunov boundary value
//! problem `H' + HA + AᵀH = −I`, `H(0) = H(T)`.
//!
//! The periodic solution is `H(t) = Y⁻ᵀ(t) (∫_t^∞ YᵀY ds) Y⁻¹(t)`. Summing the
//! tail period by period turns `H(0)` into the solution of the discrete
//! Lyapunov equation `X = MᵀXM + Q`, `M = Y(T)`, `Q = ∫_0^T YᵀY`; the rest of
//! the period follows from `H(t) = Y⁻ᵀ(t)(H(0) − ∫_0^t YᵀY)Y⁻¹(t)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Mat2};
use crate::periodic_signal::cumulative_simpson;
use crate::simulate::rk4_step;

pub const MIN_MATRIZANT_STEPS: usize = 64;

/// Multipliers within this distance of the unit circle are treated as
/// neutral; it sits above RK4's numerical damping of a pure rotation at
/// the default step counts.
pub const STABILITY_MARGIN: f64 = 1e-12;

/// Fundamental matrix `Y(t)`, `Y(0) = I`, sampled on a uniform grid of one period.
///
/// Integrated as `Z = Y − I` so that multipliers close to one keep their
/// distance from one; `y` holds `I + Z`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrizant {
    pub times: Vec<f64>,
    pub y: Vec<Mat2>,
    pub step: f64,
    deviation: Mat2,
}

impl Matrizant {
    pub fn period(&self) -> f64 {
        *self.times.last().expect("matrizant has nodes")
    }

    pub fn monodromy(&self) -> Mat2 {
        *self.y.last().expect("matrizant has nodes")
    }

    /// `Y(T) − I` without the rounding of the explicit sum.
    pub fn monodromy_deviation(&self) -> Mat2 {
        self.deviation
    }

    pub fn n_steps(&self) -> usize {
        self.y.len() - 1
    }
}

/// Classical RK4 for `Y' = A(t)Y` with `n_steps` fixed steps over `[0, T]`.
pub fn matrizant(a: impl Fn(f64) -> Mat2, period: f64, n_steps: usize) -> Result<Matrizant> {
    if n_steps < MIN_MATRIZANT_STEPS {
        return Err(Error::InvalidParameter(format!(
            "matrizant needs at least {MIN_MATRIZANT_STEPS} steps, got {n_steps}"
        )));
    }
    if !(period.is_finite() && period > 0.0) {
        return Err(Error::InvalidParameter(format!("period must be > 0, got {period}")));
    }
    let step = period / n_steps as f64;
    let mut times = Vec::with_capacity(n_steps + 1);
    let mut y = Vec::with_capacity(n_steps + 1);
    let mut z = Mat2::zeros();
    times.push(0.0);
    y.push(Mat2::identity());
    for i in 0..n_steps {
        let t = i as f64 * step;
        z = rk4_step(
            |s, m: &Mat2| {
                let am = a(s);
                am + am * m
            },
            t,
            &z,
            step,
        );
        times.push((i + 1) as f64 * step);
        y.push(Mat2::identity() + z);
    }
    Ok(Matrizant {
        times,
        y,
        step,
        deviation: z,
    })
}

/// Largest Floquet multiplier modulus, `max |λ(Y(T))|`.
pub fn spectral_radius_monodromy(m: &Matrizant) -> f64 {
    linalg::shifted_spectral_radius(&m.monodromy_deviation())
}

/// `H₁U₁ + U₁ᵀH₁ = −I` for Hurwitz `U₁`.
pub fn solve_constant_lyapunov(u1: &Mat2) -> Result<Mat2> {
    let (trace, det) = (u1.trace(), u1.determinant());
    if !(trace < 0.0 && det > 0.0) {
        return Err(Error::NotHurwitz { trace, det });
    }
    linalg::continuous_lyapunov(u1, &Mat2::identity())
}

/// `X = MᵀXM + Q`.
pub fn solve_discrete_lyapunov(m: &Mat2, q: &Mat2) -> Result<Mat2> {
    linalg::discrete_lyapunov(m, q)
}

/// Grid-sampled periodic solution of the Lyapunov BVP with `C = I`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicLyapunovSolution {
    pub mu: f64,
    pub period: f64,
    pub step: f64,
    pub times: Vec<f64>,
    pub h: Vec<Mat2>,
    /// `‖H(t_i)‖` (spectral norm).
    pub norms: Vec<f64>,
    /// Smallest eigenvalue of `H(t_i)`.
    pub min_eigs: Vec<f64>,
    pub h_min: f64,
    pub h_max: f64,
    pub spectral_radius: f64,
    pub monodromy: Mat2,
    /// Sup over nodes of `‖H' + HA + AᵀH + I‖`, `H'` by periodic fourth-order central differences.
    pub bvp_residual: f64,
    /// `‖H(0) − H(T)‖`.
    pub periodicity_defect: f64,
}

pub fn solve_periodic_lyapunov(
    a: impl Fn(f64) -> Mat2,
    period: f64,
    n_steps: usize,
) -> Result<PeriodicLyapunovSolution> {
    let mat = matrizant(&a, period, n_steps)?;
    solve_from_matrizant(&a, &mat)
}

pub fn solve_from_matrizant(a: impl Fn(f64) -> Mat2, mat: &Matrizant) -> Result<PeriodicLyapunovSolution> {
    let monodromy = mat.monodromy();
    let rho = spectral_radius_monodromy(mat);
    if !(rho < 1.0 - STABILITY_MARGIN) {
        return Err(Error::NotAsymptoticallyStable(rho));
    }
    let gram: Vec<Mat2> = mat.y.iter().map(|y| y.transpose() * y).collect();
    let running = cumulative_simpson(&gram, mat.step);
    let q = *running.last().expect("non-empty");
    let h0 = solve_discrete_lyapunov(&monodromy, &q)?;

    let mut h = Vec::with_capacity(mat.y.len());
    for (y, w) in mat.y.iter().zip(&running) {
        let y_inv = linalg::inverse(y)?;
        h.push(linalg::symmetrize(&(y_inv.transpose() * (h0 - w) * y_inv)));
    }

    let norms: Vec<f64> = h.iter().map(linalg::spectral_norm).collect();
    let min_eigs: Vec<f64> = h.iter().map(linalg::min_eigenvalue).collect();
    let h_min = min_eigs.iter().copied().fold(f64::INFINITY, f64::min);
    let h_max = norms.iter().copied().fold(0.0, f64::max);

    let n = h.len() - 1;
    let mut bvp_residual: f64 = 0.0;
    let wrap = |k: isize| h[k.rem_euclid(n as isize) as usize];
    for i in 0..n {
        let k = i as isize;
        let dh = (wrap(k - 2) - wrap(k + 2) + (wrap(k + 1) - wrap(k - 1)) * 8.0) / (12.0 * mat.step);
        let ai = a(mat.times[i]);
        let r = dh + h[i] * ai + ai.transpose() * h[i] + Mat2::identity();
        bvp_residual = bvp_residual.max(linalg::spectral_norm(&r));
    }
    let periodicity_defect = linalg::spectral_norm(&(h[0] - h[n]));

    Ok(PeriodicLyapunovSolution {
        mu: f64::NAN,
        period: mat.period(),
        step: mat.step,
        times: mat.times.clone(),
        h,
        norms,
        min_eigs,
        h_min,
        h_max,
        spectral_radius: rho,
        monodromy,
        bvp_residual,
        periodicity_defect,
    })
}

impl PeriodicLyapunovSolution {
    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = mu;
        self
    }

    pub fn n_steps(&self) -> usize {
        self.h.len() - 1
    }

    pub fn h0(&self) -> Mat2 {
        self.h[0]
    }

    /// `(step index, offset within the step)` of `t` reduced modulo the period.
    pub(crate) fn locate(&self, t: f64) -> (usize, f64) {
        let tau = t.rem_euclid(self.period);
        let n = self.n_steps();
        let j = ((tau / self.step).floor() as usize).min(n - 1);
        (j, tau - j as f64 * self.step)
    }

    /// Periodic piecewise-linear interpolation of `H`.
    pub fn at(&self, t: f64) -> Mat2 {
        let (j, off) = self.locate(t);
        let w = off / self.step;
        self.h[j] * (1.0 - w) + self.h[j + 1] * w
    }

    pub fn norm_at(&self, t: f64) -> f64 {
        linalg::spectral_norm(&self.at(t))
    }

    /// Largest `‖H‖` at the two ends of step `j`.
    pub fn step_norm_max(&self, j: usize) -> f64 {
        self.norms[j].max(self.norms[j + 1])
    }

    /// Smallest eigenvalue of `H` at the two ends of step `j`.
    pub fn step_min_eig(&self, j: usize) -> f64 {
        self.min_eigs[j].min(self.min_eigs[j + 1])
    }

    /// Relative BVP residual, `bvp_residual / h_max`.
    pub fn relative_residual(&self) -> f64 {
        self.bvp_residual / self.h_max
    }
}

/// `∫_0^t r(s) ds` for a periodic rate that is constant on each grid step.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    period: f64,
    step: f64,
    rates: Vec<f64>,
    cumulative: Vec<f64>,
}

impl RateTable {
    pub fn new(period: f64, rates: Vec<f64>) -> Self {
        let step = period / rates.len() as f64;
        let mut cumulative = Vec::with_capacity(rates.len() + 1);
        let mut acc = 0.0;
        cumulative.push(acc);
        for r in &rates {
            acc += r * step;
            cumulative.push(acc);
        }
        Self {
            period,
            step,
            rates,
            cumulative,
        }
    }

    pub fn integral(&self, t: f64) -> f64 {
        debug_assert!(t >= 0.0);
        let periods = (t / self.period).floor();
        let tau = t - periods * self.period;
        let n = self.rates.len();
        let j = ((tau / self.step).floor() as usize).min(n - 1);
        let within = (tau - j as f64 * self.step).max(0.0);
        periods * self.cumulative[n] + self.cumulative[j] + self.rates[j] * within
    }

    /// Mean rate over one period.
    pub fn mean(&self) -> f64 {
        self.cumulative[self.rates.len()] / self.period
    }
}

/// Decay bound `‖y(t)‖² ≤ (‖H(0)‖/h_min(t)) ‖y(0)‖² exp(−∫_0^t ds/‖H(s)‖)`
/// for `y' = A(t)y` (here `C = I`, so `c_min ≡ 1`).
///
/// On each grid step `‖H‖` is replaced by the larger and `h_min` by the
/// smaller of the two endpoint values.
#[derive(Debug, Clone, PartialEq)]
pub struct KreinEnvelope {
    h0_norm: f64,
    step_min_eigs: Vec<f64>,
    rate: RateTable,
    sol_step: f64,
    period: f64,
}

impl KreinEnvelope {
    pub fn new(sol: &PeriodicLyapunovSolution) -> Self {
        let n = sol.n_steps();
        let rates = (0..n).map(|j| 1.0 / sol.step_norm_max(j)).collect();
        Self {
            h0_norm: sol.norms[0],
            step_min_eigs: (0..n).map(|j| sol.step_min_eig(j)).collect(),
            rate: RateTable::new(sol.period, rates),
            sol_step: sol.step,
            period: sol.period,
        }
    }

    pub fn eval(&self, y0_norm_sq: f64, t: f64) -> f64 {
        if y0_norm_sq == 0.0 {
            return 0.0;
        }
        let tau = t.rem_euclid(self.period);
        let j = ((tau / self.sol_step).floor() as usize).min(self.step_min_eigs.len() - 1);
        self.h0_norm / self.step_min_eigs[j] * y0_norm_sq * (-self.rate.integral(t)).exp()
    }
}

pub fn krein_envelope(sol: &PeriodicLyapunovSolution, y0_norm_sq: f64, t: f64) -> f64 {
    KreinEnvelope::new(sol).eval(y0_norm_sq, t)
}
