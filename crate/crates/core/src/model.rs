//! The nonlinear model `y'' + αμy' + (βμ² + μφ(t)) f(y) = 0`, its pendulum
//! special case, and linearization about a stationary point.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Mat2;
use crate::periodic_signal::PeriodicSignal;

/// Tolerance on `|f(γ)|` for a point to count as stationary.
pub const STATIONARY_TOL: f64 = 1e-12;

/// Restoring nonlinearity `f`. Closed set so that remainder constants can be
/// derived analytically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Nonlinearity {
    /// `f(y) = sin y`
    PendulumSine,
    /// `f(y) = sin(y + shift)`
    ShiftedSine { shift: f64 },
    /// `f(y) = Σ_{j≥1} c_j y^j`; `coeffs[0]` is `c_1`.
    Polynomial { coeffs: Vec<f64> },
}

impl Nonlinearity {
    pub fn value(&self, y: f64) -> f64 {
        match self {
            Self::PendulumSine => y.sin(),
            Self::ShiftedSine { shift } => match pi_multiple(*shift) {
                Some(k) => parity_sign(k) * y.sin(),
                None => (y + shift).sin(),
            },
            Self::Polynomial { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| (acc + c) * y),
        }
    }

    pub fn derivative(&self, y: f64) -> f64 {
        match self {
            Self::PendulumSine => y.cos(),
            Self::ShiftedSine { shift } => match pi_multiple(*shift) {
                Some(k) => parity_sign(k) * y.cos(),
                None => (y + shift).cos(),
            },
            Self::Polynomial { coeffs } => coeffs
                .iter()
                .enumerate()
                .rev()
                .fold(0.0, |acc, (j, c)| acc * y + (j + 1) as f64 * c),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::PendulumSine => "pendulum_sine",
            Self::ShiftedSine { .. } => "shifted_sine",
            Self::Polynomial { .. } => "polynomial",
        }
    }

    /// `g(z) = f(γ + z)`, dropping the (vanishing) constant term.
    ///
    /// For sine kinds a total shift within [`STATIONARY_TOL`] of `kπ` is
    /// snapped to `kπ`, so that `g(0) = 0` holds exactly.
    pub fn shifted(&self, gamma: f64) -> Self {
        if gamma == 0.0 {
            return self.clone();
        }
        match self {
            Self::PendulumSine => Self::ShiftedSine {
                shift: snap_to_pi_multiple(gamma),
            },
            Self::ShiftedSine { shift } => Self::ShiftedSine {
                shift: snap_to_pi_multiple(shift + gamma),
            },
            Self::Polynomial { coeffs } => {
                // g_m = Σ_{j≥m} c_j C(j, m) γ^{j−m}
                let d = coeffs.len();
                let mut out = vec![0.0; d];
                for (idx, c) in coeffs.iter().enumerate() {
                    let j = idx + 1;
                    let mut binom = 1.0;
                    for m in 0..=j {
                        if m >= 1 {
                            out[m - 1] += c * binom * gamma.powi((j - m) as i32);
                        }
                        binom = binom * (j - m) as f64 / (m + 1) as f64;
                    }
                }
                Self::Polynomial { coeffs: out }
            }
        }
    }
}

/// `Some(k)` when `shift` is the double nearest to `kπ`.
fn pi_multiple(shift: f64) -> Option<i64> {
    let k = (shift / PI).round();
    (k * PI == shift).then_some(k as i64)
}

fn parity_sign(k: i64) -> f64 {
    if k.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

fn snap_to_pi_multiple(shift: f64) -> f64 {
    let k = (shift / PI).round();
    if (shift - k * PI).abs() <= STATIONARY_TOL {
        k * PI
    } else {
        shift
    }
}

/// Model coefficients and the chosen stationary point `γ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MathieuModel {
    pub alpha: f64,
    pub beta: f64,
    pub phi: PeriodicSignal,
    pub f: Nonlinearity,
    pub gamma: f64,
}

impl MathieuModel {
    pub fn new(alpha: f64, beta: f64, phi: PeriodicSignal, f: Nonlinearity, gamma: f64) -> Result<Self> {
        let m = Self {
            alpha,
            beta,
            phi,
            f,
            gamma,
        };
        m.validate()?;
        Ok(m)
    }

    /// Checks everything except positivity of `α`, which is deferred to
    /// [`linearize`] so that undamped pendulum data can still be reduced.
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::InvalidModel(format!("alpha must be >= 0, got {}", self.alpha)));
        }
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(Error::InvalidModel(format!("beta must be > 0, got {}", self.beta)));
        }
        if !self.gamma.is_finite() {
            return Err(Error::InvalidModel("gamma must be finite".into()));
        }
        let fg = self.f.value(self.gamma);
        if fg.abs() >= STATIONARY_TOL {
            return Err(Error::InvalidModel(format!(
                "gamma = {} is not stationary: f(gamma) = {fg:e}",
                self.gamma
            )));
        }
        let slope = self.f.derivative(self.gamma);
        if slope >= 0.0 {
            return Err(Error::InvalidModel(format!(
                "need f'(gamma) < 0, got {slope}"
            )));
        }
        Ok(())
    }

    pub fn period(&self) -> f64 {
        self.phi.period()
    }

    pub fn slope_at_gamma(&self) -> f64 {
        self.f.derivative(self.gamma)
    }
}

/// Physical parameters of a pendulum with a vertically vibrating pivot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PendulumParams {
    /// l, metres
    pub length_l: f64,
    /// g, m/s²
    pub gravity_g: f64,
    /// λ, 1/s
    pub friction_lambda: f64,
    /// a, metres
    pub amplitude_a: f64,
    /// ω, rad/s
    pub frequency_omega: f64,
}

impl PendulumParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("length_l", self.length_l),
            ("gravity_g", self.gravity_g),
            ("amplitude_a", self.amplitude_a),
            ("frequency_omega", self.frequency_omega),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be > 0, got {v}")));
            }
        }
        if !(self.friction_lambda.is_finite() && self.friction_lambda >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "friction_lambda must be >= 0, got {}",
                self.friction_lambda
            )));
        }
        Ok(())
    }
}

/// Fast-time rescaling `t = ωτ` of the vibrating-pivot pendulum.
///
/// Returns the model about the upper equilibrium `γ = π` together with
/// `μ = a/l`, using `β = gl/(a²ω²)`, `α = λl/(aω)` and `φ(t) = −sin t`.
pub fn pendulum_reduce(p: &PendulumParams) -> Result<(MathieuModel, f64)> {
    p.validate()?;
    if p.amplitude_a >= p.length_l {
        return Err(Error::AmplitudeTooLarge {
            a: p.amplitude_a,
            l: p.length_l,
        });
    }
    let (a, l, w) = (p.amplitude_a, p.length_l, p.frequency_omega);
    let mu = a / l;
    let beta = p.gravity_g * l / (a * a * w * w);
    let alpha = p.friction_lambda * l / (a * w);
    let phi = PeriodicSignal::single(TAU, 1, 0.0, -1.0)?;
    let model = MathieuModel::new(alpha, beta, phi, Nonlinearity::PendulumSine, PI)?;
    Ok((model, mu))
}

/// `y'' + αμy' + (β̂μ² + μφ̂(t)) y = 0` with `β̂ = βf'(γ)`, `φ̂ = φf'(γ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearizedSystem {
    pub alpha: f64,
    pub beta_hat: f64,
    pub phi_hat: PeriodicSignal,
}

impl LinearizedSystem {
    pub fn period(&self) -> f64 {
        self.phi_hat.period()
    }

    /// First-order matrix `A(t, μ)` acting on `(y, y')`.
    pub fn matrix(&self, t: f64, mu: f64) -> Mat2 {
        Mat2::new(
            0.0,
            1.0,
            -(self.beta_hat * mu * mu + mu * self.phi_hat.eval(t)),
            -self.alpha * mu,
        )
    }

    pub fn with_beta_hat(&self, beta_hat: f64) -> Self {
        Self {
            beta_hat,
            ..self.clone()
        }
    }
}

pub fn linearize(m: &MathieuModel) -> Result<LinearizedSystem> {
    m.validate()?;
    if m.alpha <= 0.0 {
        return Err(Error::InvalidModel(format!(
            "damping alpha must be > 0 for stability certificates, got {}",
            m.alpha
        )));
    }
    let slope = m.slope_at_gamma();
    Ok(LinearizedSystem {
        alpha: m.alpha,
        beta_hat: m.beta * slope,
        phi_hat: m.phi.scaled(slope),
    })
}

/// Moves the stationary point to the origin: `g(z) = f(γ + z)`.
pub fn shift_to_zero(m: &MathieuModel) -> Nonlinearity {
    m.f.shifted(m.gamma)
}

/// Constant `p` with `|g(ξ) − g'(0)ξ| ≤ p ξ²`, globally (`rho = None`) or on
/// `|ξ| ≤ ρ`.
///
/// Sine kinds use the Taylor remainder `|ξ − sin ξ| ≤ |ξ|³/6`, giving `ρ/6`;
/// they have no global constant. Polynomials use `Σ_{j≥2} |c_j| ρ^{j−2}`.
pub fn quadratic_remainder_bound(g: &Nonlinearity, rho: Option<f64>) -> Result<f64> {
    if let Some(r) = rho {
        if !(r.is_finite() && r >= 0.0) {
            return Err(Error::InvalidParameter(format!("rho must be >= 0, got {r}")));
        }
    }
    match g {
        Nonlinearity::PendulumSine | Nonlinearity::ShiftedSine { .. } => match rho {
            Some(r) => Ok(r / 6.0),
            None => Err(Error::NoGlobalRemainderBound(g.kind_name())),
        },
        Nonlinearity::Polynomial { coeffs } => {
            let higher = coeffs.iter().skip(1);
            match rho {
                Some(r) => Ok(higher
                    .enumerate()
                    .map(|(i, c)| c.abs() * r.powi(i as i32))
                    .sum()),
                None => {
                    let mut nonzero = coeffs.iter().enumerate().skip(2).filter(|(_, c)| **c != 0.0);
                    if nonzero.next().is_some() {
                        Err(Error::NoGlobalRemainderBound("polynomial of degree > 2"))
                    } else {
                        Ok(coeffs.get(1).map_or(0.0, |c| c.abs()))
                    }
                }
            }
        }
    }
}
