//! Perturbation budgets, attraction-set radii and decay envelopes built on a
//! periodic Lyapunov solution of the unperturbed linearized system.

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::floquet_lyapunov::{PeriodicLyapunovSolution, RateTable};
use crate::linalg::Mat2;
use crate::model::MathieuModel;
use crate::periodic_signal::{sup_abs, PeriodicSignal, QuadratureGrid};

/// Model-level coefficient perturbations `α ↦ α+Δα`, `β ↦ β+Δβ`, `φ ↦ φ+Δφ`.
///
/// `Δφ` is a periodic signal plus an optional constant offset; it need not
/// have zero mean but must share the model's period.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    #[serde(default)]
    pub d_alpha: f64,
    #[serde(default)]
    pub d_beta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_phi: Option<PeriodicSignal>,
    #[serde(default)]
    pub d_phi_offset: f64,
}

impl Perturbation {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn validate(&self, period: f64) -> Result<()> {
        for (name, v) in [("d_alpha", self.d_alpha), ("d_beta", self.d_beta), ("d_phi_offset", self.d_phi_offset)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite")));
            }
        }
        if let Some(s) = &self.d_phi {
            if (s.period() - period).abs() > 1e-12 * period {
                return Err(Error::InvalidParameter(format!(
                    "d_phi period {} differs from model period {period}",
                    s.period()
                )));
            }
        }
        Ok(())
    }

    pub fn d_phi_at(&self, t: f64) -> f64 {
        self.d_phi_offset + self.d_phi.as_ref().map_or(0.0, |s| s.eval(t))
    }

    /// Converts to the linearized form `Δβ̂ = Δβ·f'(γ)`, `Δφ̂ = Δφ·f'(γ)`.
    pub fn scaled(&self, slope: f64) -> ScaledPerturbation {
        ScaledPerturbation {
            d_alpha: self.d_alpha,
            d_beta_hat: self.d_beta * slope,
            d_phi_hat: self.d_phi.as_ref().map(|s| s.scaled(slope)),
            d_phi_hat_offset: self.d_phi_offset * slope,
        }
    }
}

/// Perturbation of the linearized coefficients `(Δα, Δβ̂, Δφ̂)`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScaledPerturbation {
    pub d_alpha: f64,
    pub d_beta_hat: f64,
    pub d_phi_hat: Option<PeriodicSignal>,
    pub d_phi_hat_offset: f64,
}

impl ScaledPerturbation {
    pub fn d_phi_hat_at(&self, t: f64) -> f64 {
        self.d_phi_hat_offset + self.d_phi_hat.as_ref().map_or(0.0, |s| s.eval(t))
    }

    /// `ΔA(t,μ) = [[0, 0], [−Δβ̂μ² − μΔφ̂(t), −Δαμ]]`.
    pub fn delta_a(&self, t: f64, mu: f64) -> Mat2 {
        Mat2::new(
            0.0,
            0.0,
            -self.d_beta_hat * mu * mu - mu * self.d_phi_hat_at(t),
            -self.d_alpha * mu,
        )
    }

    pub fn sup_abs_d_phi_hat(&self, period: f64, grid: &QuadratureGrid) -> f64 {
        match &self.d_phi_hat {
            Some(_) => sup_abs(|t| self.d_phi_hat_at(t), period, grid),
            None => self.d_phi_hat_offset.abs(),
        }
    }

    /// `μ(|Δβ̂|μ + |Δα|)`
    pub fn coeff_term(&self, mu: f64) -> f64 {
        mu * (self.d_beta_hat.abs() * mu + self.d_alpha.abs())
    }
}

/// `‖ΔA(t,μ)‖ = μ √((Δβ̂μ + Δφ̂(t))² + Δα²)`.
pub fn delta_a_norm(pert: &ScaledPerturbation, mu: f64, t: f64) -> f64 {
    mu * (pert.d_beta_hat * mu + pert.d_phi_hat_at(t)).hypot(pert.d_alpha)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BudgetLevel {
    /// Keeps the perturbed linear system stable: denominators `4 h_max`.
    Linear,
    /// Needed for the nonlinear attraction estimate: denominators `8 h_max`.
    Nonlinear,
}

impl BudgetLevel {
    pub fn fraction(self) -> f64 {
        match self {
            Self::Linear => 0.25,
            Self::Nonlinear => 0.125,
        }
    }
}

/// Admissible perturbation sizes at one `μ`; both inequalities are strict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobustnessBudget {
    pub mu: f64,
    pub h_max: f64,
    pub level: BudgetLevel,
    /// Bound on `μ·sup|Δφ̂|`.
    pub budget_phi_sup: f64,
    /// Bound on `μ(|Δβ̂|μ + |Δα|)`.
    pub budget_coeff: f64,
}

impl RobustnessBudget {
    fn new(sol: &PeriodicLyapunovSolution, mu: f64, level: BudgetLevel) -> Self {
        let b = level.fraction() / sol.h_max;
        Self {
            mu,
            h_max: sol.h_max,
            level,
            budget_phi_sup: b,
            budget_coeff: b,
        }
    }

    /// Largest admissible `sup|Δφ̂|` (exclusive).
    pub fn max_sup_d_phi_hat(&self) -> f64 {
        self.budget_phi_sup / self.mu
    }

    pub fn admits_values(&self, sup_d_phi_hat: f64, d_beta_hat: f64, d_alpha: f64) -> bool {
        let mu = self.mu;
        mu * sup_d_phi_hat < self.budget_phi_sup && mu * (d_beta_hat.abs() * mu + d_alpha.abs()) < self.budget_coeff
    }

    pub fn admits(&self, pert: &ScaledPerturbation, period: f64, grid: &QuadratureGrid) -> bool {
        self.admits_values(pert.sup_abs_d_phi_hat(period, grid), pert.d_beta_hat, pert.d_alpha)
    }
}

/// Budget for perturbations of the linearized system, `1/(4 h_max)`.
pub fn linear_budget(sol: &PeriodicLyapunovSolution, mu: f64) -> RobustnessBudget {
    RobustnessBudget::new(sol, mu, BudgetLevel::Linear)
}

/// Budget for the nonlinear attraction estimate, `1/(8 h_max)`.
pub fn nonlinear_budget(sol: &PeriodicLyapunovSolution, mu: f64) -> RobustnessBudget {
    RobustnessBudget::new(sol, mu, BudgetLevel::Nonlinear)
}

/// `ε(t,μ) = 1 − 2‖H(t,μ)‖‖ΔA(t,μ)‖`.
pub fn epsilon_fn(sol: &PeriodicLyapunovSolution, pert: &ScaledPerturbation, mu: f64, t: f64) -> f64 {
    1.0 - 2.0 * sol.norm_at(t) * delta_a_norm(pert, mu, t)
}

/// `q(μ) = sup_t (|β+Δβ|μ² + |φ(t)+Δφ(t)|μ) p`, grid supremum over one period.
pub fn q_of_mu(model: &MathieuModel, pert: &Perturbation, p: f64, mu: f64, grid: &QuadratureGrid) -> f64 {
    let beta_term = (model.beta + pert.d_beta).abs() * mu * mu;
    let sup_phi = sup_abs(|t| model.phi.eval(t) + pert.d_phi_at(t), model.period(), grid);
    (beta_term + sup_phi * mu) * p
}

/// `q̃(μ) = 2 q(μ) h_max(μ)`.
pub fn q_tilde(q_mu: f64, h_max: f64) -> f64 {
    2.0 * q_mu * h_max
}

/// Initial data guaranteed to be attracted to the stationary point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttractionCertificate {
    pub mu: f64,
    pub p: f64,
    pub rho: Option<f64>,
    pub q_mu: f64,
    pub q_tilde: f64,
    pub h_min: f64,
    pub h_max: f64,
    /// `h_min³ / (64 h_max⁴ q²)`; `None` when `q = 0` (no bound needed).
    pub lyapunov_radius_sq: Option<f64>,
    /// `ρ h_min / (4 h_max)`, present when the remainder bound is local.
    pub euclid_radius: Option<f64>,
    #[serde(skip)]
    h0: Mat2,
}

impl AttractionCertificate {
    pub fn lyapunov_value(&self, v: &Vector2<f64>) -> f64 {
        v.dot(&(self.h0 * v))
    }

    pub fn contains(&self, v: &Vector2<f64>) -> bool {
        let in_level = self.lyapunov_radius_sq.is_none_or(|r| self.lyapunov_value(v) <= r);
        let in_ball = self.euclid_radius.is_none_or(|r| v.norm() <= r);
        in_level && in_ball
    }

    pub fn h0(&self) -> Mat2 {
        self.h0
    }
}

pub fn attraction_certificate(
    sol: &PeriodicLyapunovSolution,
    q_mu: f64,
    p: f64,
    rho: Option<f64>,
) -> AttractionCertificate {
    let (h_min, h_max) = (sol.h_min, sol.h_max);
    let lyapunov_radius_sq = (q_mu > 0.0).then(|| h_min.powi(3) / (64.0 * h_max.powi(4) * q_mu * q_mu));
    AttractionCertificate {
        mu: sol.mu,
        p,
        rho,
        q_mu,
        q_tilde: q_tilde(q_mu, h_max),
        h_min,
        h_max,
        lyapunov_radius_sq,
        euclid_radius: rho.map(|r| r * h_min / (4.0 * h_max)),
        h0: sol.h0(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvelopeVariant {
    /// `(‖H(0)‖/h_min)‖v(0)‖² exp(−∫(1/‖H‖ − 2‖ΔA‖))`
    Linear,
    /// `(4/h_min)⟨H(0)v(0),v(0)⟩ exp(−∫ε/(2‖H‖))`
    Nonlinear,
}

/// Exponential envelope for `‖v(t)‖²`, evaluated with step-wise conservative
/// rates: the larger endpoint `‖H‖` and the largest sampled `‖ΔA‖` per step.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayEnvelope {
    pub variant: EnvelopeVariant,
    pub prefactor: f64,
    rate: RateTable,
    uniform_rate: RateTable,
}

impl DecayEnvelope {
    pub fn new(sol: &PeriodicLyapunovSolution, pert: &ScaledPerturbation, mu: f64, variant: EnvelopeVariant) -> Self {
        let n = sol.n_steps();
        let mut rates = Vec::with_capacity(n);
        let mut uniform = Vec::with_capacity(n);
        for j in 0..n {
            let t0 = sol.times[j];
            let da = [t0, t0 + 0.5 * sol.step, sol.times[j + 1]]
                .into_iter()
                .map(|t| delta_a_norm(pert, mu, t))
                .fold(0.0, f64::max);
            let h = sol.step_norm_max(j);
            match variant {
                EnvelopeVariant::Linear => rates.push(1.0 / h - 2.0 * da),
                EnvelopeVariant::Nonlinear => {
                    let eps = 1.0 - 2.0 * h * da;
                    rates.push(eps / (2.0 * h));
                }
            }
            uniform.push(1.0 / (2.0 * h));
        }
        let prefactor = match variant {
            EnvelopeVariant::Linear => sol.norms[0] / sol.h_min,
            EnvelopeVariant::Nonlinear => 4.0 / sol.h_min,
        };
        Self {
            variant,
            prefactor,
            rate: RateTable::new(sol.period, rates),
            uniform_rate: RateTable::new(sol.period, uniform),
        }
    }

    /// `v0` is `‖v(0)‖²` for the linear variant and `⟨H(0)v(0),v(0)⟩` for
    /// the nonlinear one.
    pub fn eval(&self, v0: f64, t: f64) -> f64 {
        if v0 == 0.0 {
            return 0.0;
        }
        self.prefactor * v0 * (-self.rate.integral(t)).exp()
    }

    pub fn mean_rate(&self) -> f64 {
        self.rate.mean()
    }

    /// Mean of `1/(2‖H‖)` over a period, the perturbation-free rate.
    pub fn uniform_mean_rate(&self) -> f64 {
        self.uniform_rate.mean()
    }

    pub fn eval_uniform_rate(&self, v0: f64, t: f64) -> f64 {
        self.prefactor * v0 * (-self.uniform_rate.integral(t)).exp()
    }
}

pub fn decay_envelope(
    sol: &PeriodicLyapunovSolution,
    pert: &ScaledPerturbation,
    mu: f64,
    v0: f64,
    t: f64,
    variant: EnvelopeVariant,
) -> f64 {
    DecayEnvelope::new(sol, pert, mu, variant).eval(v0, t)
}
