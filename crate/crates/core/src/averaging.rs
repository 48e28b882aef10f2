//! Averaging change of variables for the linearized system.
//!
//! With `v₁ = (1 + μa)u₁`, `v₂ = μ(b u₁ + u₂)` the system `v' = A(t,μ)v`
//! becomes `u' = μ(U₁ + U₂(t,μ) + μ²U₃(t,μ))u`, where `U₁` is constant and
//! `U₂` has zero mean over a period.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Mat2;
use crate::model::LinearizedSystem;
use crate::periodic_signal::{cumulative_simpson, integrate, simpson_samples, PeriodicSignal, QuadratureGrid};

/// The periodic functions `a(t)`, `b(t)` (and `c ≡ 1`) of the transform.
///
/// `b = −∫φ̂` and `a = ∫b`, both normalized to zero mean; `a' = b`, `b' = −φ̂`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AveragingTransform {
    pub a_fn: PeriodicSignal,
    pub b_fn: PeriodicSignal,
    pub grid: QuadratureGrid,
}

impl AveragingTransform {
    pub const C_CONST: f64 = 1.0;

    pub fn a(&self, t: f64) -> f64 {
        self.a_fn.eval(t)
    }

    pub fn b(&self, t: f64) -> f64 {
        self.b_fn.eval(t)
    }

    pub fn period(&self) -> f64 {
        self.a_fn.period()
    }
}

pub fn build_transform(lin: &LinearizedSystem, grid: &QuadratureGrid) -> AveragingTransform {
    let b_fn = lin.phi_hat.antiderivative().scaled(-1.0);
    let a_fn = b_fn.antiderivative();
    AveragingTransform {
        a_fn,
        b_fn,
        grid: *grid,
    }
}

/// `(1/T)∫_0^T φ̂(τ)a(τ)dτ` by Simpson quadrature.
pub fn mean_phi_a(lin: &LinearizedSystem, tr: &AveragingTransform) -> f64 {
    let t_per = lin.period();
    integrate(|t| lin.phi_hat.eval(t) * tr.a(t), 0.0, t_per, &tr.grid) / t_per
}

/// `U₁ = [[0, 1], [−β̂ − m, −α]]`, `m = (1/T)∫φ̂a`.
pub fn build_u1(lin: &LinearizedSystem, tr: &AveragingTransform) -> Mat2 {
    let m = mean_phi_a(lin, tr);
    Mat2::new(0.0, 1.0, -lin.beta_hat - m, -lin.alpha)
}

/// Exact 2×2 Routh–Hurwitz test.
pub fn u1_is_hurwitz(u1: &Mat2) -> bool {
    u1.trace() < 0.0 && u1.determinant() > 0.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BogolyubovCheck {
    pub holds: bool,
    pub lhs: f64,
    pub rhs: f64,
}

/// Averaged stability inequality
/// `(1/T)∫_0^T (∫_0^τ φ̂)² dτ > ((1/T)∫_0^T τφ̂(τ)dτ)² − β̂`.
///
/// The inner integral is accumulated numerically on a doubled grid, so this
/// does not share code with the analytic antiderivatives of the transform.
pub fn bogolyubov_condition(lin: &LinearizedSystem, grid: &QuadratureGrid) -> BogolyubovCheck {
    let t_per = lin.period();
    let n = 2 * grid.n_points();
    let h = t_per / n as f64;
    let phi: Vec<f64> = (0..=n).map(|i| lin.phi_hat.eval(i as f64 * h)).collect();
    let inner = cumulative_simpson(&phi, h);
    let squares: Vec<f64> = inner.iter().map(|p| p * p).collect();
    let lhs = simpson_samples(&squares, h) / t_per;
    let moment = integrate(|t| t * lin.phi_hat.eval(t), 0.0, t_per, grid) / t_per;
    let rhs = moment * moment - lin.beta_hat;
    BogolyubovCheck {
        holds: lhs > rhs,
        lhs,
        rhs,
    }
}

/// `U₁`, `U₂(·,μ)` and `U₃(·,μ)` for one value of `μ`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformedSystem {
    pub mu: f64,
    pub u1: Mat2,
    pub mean_phi_a: f64,
    lin: LinearizedSystem,
    tr: AveragingTransform,
}

pub fn build_u2_u3(lin: &LinearizedSystem, tr: &AveragingTransform, mu: f64) -> Result<TransformedSystem> {
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::InvalidParameter(format!("mu must be > 0, got {mu}")));
    }
    let t_per = lin.period();
    for t in tr.grid.nodes(t_per) {
        let value = 1.0 + mu * tr.a(t);
        if value <= 0.0 {
            return Err(Error::DegenerateTransform { t, value });
        }
    }
    let m = mean_phi_a(lin, tr);
    Ok(TransformedSystem {
        mu,
        u1: Mat2::new(0.0, 1.0, -lin.beta_hat - m, -lin.alpha),
        mean_phi_a: m,
        lin: lin.clone(),
        tr: tr.clone(),
    })
}

impl TransformedSystem {
    pub fn period(&self) -> f64 {
        self.lin.period()
    }

    pub fn u2(&self, t: f64) -> Mat2 {
        let (mu, a, b) = (self.mu, self.tr.a(t), self.tr.b(t));
        let phi = self.lin.phi_hat.eval(t);
        Mat2::new(
            0.0,
            -mu * a,
            -self.lin.alpha * b - mu * self.lin.beta_hat * a - phi * a + self.mean_phi_a,
            (mu * a - 1.0) * b,
        )
    }

    pub fn u3(&self, t: f64) -> Mat2 {
        let (a, b) = (self.tr.a(t), self.tr.b(t));
        let denom = 1.0 + self.mu * a;
        Mat2::new(0.0, a * a / denom, 0.0, -a * a * b / denom)
    }

    /// Full `U(t,μ) = U₁ + U₂ + μ²U₃`; the transformed system is `u' = μUu`.
    pub fn u(&self, t: f64) -> Mat2 {
        self.u1 + self.u2(t) + self.mu * self.mu * self.u3(t)
    }

    /// Maps `u` to the original coordinates `v = (y, y')`.
    pub fn to_original(&self, t: f64, u: &nalgebra::Vector2<f64>) -> nalgebra::Vector2<f64> {
        let (mu, a, b) = (self.mu, self.tr.a(t), self.tr.b(t));
        nalgebra::Vector2::new((1.0 + mu * a) * u[0], mu * (b * u[0] + u[1]))
    }

    pub fn from_original(&self, t: f64, v: &nalgebra::Vector2<f64>) -> nalgebra::Vector2<f64> {
        let (mu, a, b) = (self.mu, self.tr.a(t), self.tr.b(t));
        let u1 = v[0] / (1.0 + mu * a);
        nalgebra::Vector2::new(u1, v[1] / mu - b * u1)
    }

    pub fn u2_samples(&self) -> Vec<(f64, Mat2)> {
        self.tr.grid.nodes(self.period()).map(|t| (t, self.u2(t))).collect()
    }

    pub fn u3_samples(&self) -> Vec<(f64, Mat2)> {
        self.tr.grid.nodes(self.period()).map(|t| (t, self.u3(t))).collect()
    }

    /// Running integrals `∫_0^{t_i} U₂(s,μ)ds` at the grid nodes.
    pub fn u2_running_integral(&self) -> Vec<Mat2> {
        let values: Vec<Mat2> = self.u2_samples().into_iter().map(|(_, m)| m).collect();
        cumulative_simpson(&values, self.tr.grid.step(self.period()))
    }

    pub fn linearized(&self) -> &LinearizedSystem {
        &self.lin
    }

    pub fn transform(&self) -> &AveragingTransform {
        &self.tr
    }
}
