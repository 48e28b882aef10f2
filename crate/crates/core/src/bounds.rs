//! Explicit constants that turn "stable for sufficiently small μ" into a
//! concrete range `(0, μ₀]`.

use serde::{Deserialize, Serialize};

use crate::averaging::{build_u2_u3, u1_is_hurwitz, AveragingTransform, TransformedSystem};
use crate::error::{Error, Result};
use crate::floquet_lyapunov::solve_constant_lyapunov;
use crate::linalg::{self, Mat2};
use crate::model::LinearizedSystem;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundConfig {
    /// Replaces `μ̄ = 1/(φ_max T²)` when the forcing vanishes identically.
    pub mu_cap: f64,
}

impl Default for BoundConfig {
    fn default() -> Self {
        Self { mu_cap: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundChain {
    pub period: f64,
    pub phi_max: f64,
    /// `max{α, |β̂|}`, used by every norm bound.
    pub a_const: f64,
    /// `max{α, β̂}` read literally; always equals `α` because `β̂ < 0`.
    pub a_const_literal: f64,
    pub mu_bar: f64,
    pub mu_bar_capped: bool,
    pub norm_u1: f64,
    pub norm_h1: f64,
    /// `sup ‖U₂‖ ≤ (1 + a + T)(1/2 + φ_max T)`
    pub u2_bound: f64,
    /// `sup ‖U₃‖ ≤ φ_max² T⁴ (1 + φ_max T)/2`
    pub u3_bound: f64,
    /// `sup ‖H₂‖ ≤ 2‖H₁‖T · u2_bound`
    pub h2_bound: f64,
    pub l1: f64,
    pub mu1: f64,
    pub l2: f64,
    pub mu0: f64,
}

pub fn compute_bound_chain(
    lin: &LinearizedSystem,
    tr: &AveragingTransform,
    u1: &Mat2,
    h1: &Mat2,
) -> Result<BoundChain> {
    compute_bound_chain_with(lin, tr, u1, h1, BoundConfig::default())
}

pub fn compute_bound_chain_with(
    lin: &LinearizedSystem,
    tr: &AveragingTransform,
    u1: &Mat2,
    h1: &Mat2,
    cfg: BoundConfig,
) -> Result<BoundChain> {
    if !u1_is_hurwitz(u1) {
        return Err(Error::NotHurwitz {
            trace: u1.trace(),
            det: u1.determinant(),
        });
    }
    let t = lin.period();
    let phi_max = lin.phi_hat.sup_norm(&tr.grid);
    let a_const = lin.alpha.max(lin.beta_hat.abs());
    let a_const_literal = lin.alpha.max(lin.beta_hat);
    let (mu_bar, mu_bar_capped) = if phi_max > 0.0 {
        (1.0 / (phi_max * t * t), false)
    } else {
        (cfg.mu_cap, true)
    };
    let norm_u1 = linalg::spectral_norm(u1);
    let norm_h1 = linalg::spectral_norm(h1);

    let u2_bound = (1.0 + a_const + t) * (0.5 + phi_max * t);
    let u3_bound = phi_max * phi_max * t.powi(4) * (1.0 + phi_max * t) / 2.0;
    let h2_bound = 2.0 * norm_h1 * t * u2_bound;

    let l1 = h2_bound * (norm_u1 + u2_bound);
    let mu1 = mu_bar.min(1.0 / (8.0 * l1));
    let l2 = norm_h1 * t.powi(4) * phi_max * phi_max * (1.0 + phi_max * t) * (1.0 + 2.0 * mu1 * t * u2_bound);
    let mu0 = if l2 > 0.0 {
        mu1.min(1.0 / (2.0 * l2.sqrt()))
    } else {
        mu1
    };

    Ok(BoundChain {
        period: t,
        phi_max,
        a_const,
        a_const_literal,
        mu_bar,
        mu_bar_capped,
        norm_u1,
        norm_h1,
        u2_bound,
        u3_bound,
        h2_bound,
        l1,
        mu1,
        l2,
        mu0,
    })
}

fn constant_lyapunov_for(sys: &TransformedSystem) -> Result<Mat2> {
    solve_constant_lyapunov(&sys.u1)
}

/// `C(t,μ) = I + μ(H₂(U₁+U₂) + (U₁+U₂)ᵀH₂)` with
/// `H₂(t,μ) = H₁∫_0^t U₂ + (∫_0^t U₂)ᵀH₁`.
pub fn c_matrix(lin: &LinearizedSystem, tr: &AveragingTransform, mu: f64, t: f64) -> Result<Mat2> {
    let sys = build_u2_u3(lin, tr, mu)?;
    let h1 = constant_lyapunov_for(&sys)?;
    let j = simpson_mat(|s| sys.u2(s), 0.0, t, tr.grid.n_points());
    let h2 = h1 * j + j.transpose() * h1;
    let u = sys.u1 + sys.u2(t);
    Ok(Mat2::identity() + (h2 * u + u.transpose() * h2) * mu)
}

fn simpson_mat(f: impl Fn(f64) -> Mat2, a: f64, b: f64, n: usize) -> Mat2 {
    let h = (b - a) / n as f64;
    if h == 0.0 {
        return Mat2::zeros();
    }
    let mut acc = f(a) + f(b);
    for i in 1..n {
        acc += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * (h / 3.0)
}

/// Grid extrema of the matrices behind the `μ₁` and `μ₀` thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CSweep {
    pub mu: f64,
    /// `min_t λ_min(C(t,μ))`
    pub min_eig_c: f64,
    /// `min_t λ_min(C(t,μ) − μ³(ℋU₃ + U₃ᵀℋ))`, `ℋ = H₁/μ − H₂`
    pub min_eig_script_c: f64,
    /// `max_t μ‖H₂(U₁+U₂) + (U₁+U₂)ᵀH₂‖`
    pub max_coupling: f64,
    /// `max_t μ³‖ℋU₃ + U₃ᵀℋ‖`
    pub max_cubic: f64,
    pub max_u2_norm: f64,
    pub max_u3_norm: f64,
    pub max_h2_norm: f64,
}

pub fn c_sweep(lin: &LinearizedSystem, tr: &AveragingTransform, mu: f64) -> Result<CSweep> {
    let sys = build_u2_u3(lin, tr, mu)?;
    let h1 = constant_lyapunov_for(&sys)?;
    let running = sys.u2_running_integral();
    let mut out = CSweep {
        mu,
        min_eig_c: f64::INFINITY,
        min_eig_script_c: f64::INFINITY,
        max_coupling: 0.0,
        max_cubic: 0.0,
        max_u2_norm: 0.0,
        max_u3_norm: 0.0,
        max_h2_norm: 0.0,
    };
    for (t, j) in tr.grid.nodes(lin.period()).zip(&running) {
        let h2 = h1 * j + j.transpose() * h1;
        let u2 = sys.u2(t);
        let u3 = sys.u3(t);
        let u = sys.u1 + u2;
        let coupling = (h2 * u + u.transpose() * h2) * mu;
        let c = Mat2::identity() + coupling;
        let big_h = h1 / mu - h2;
        let cubic = (big_h * u3 + u3.transpose() * big_h) * mu.powi(3);
        let script_c = c - cubic;
        out.min_eig_c = out.min_eig_c.min(linalg::min_eigenvalue(&c));
        out.min_eig_script_c = out.min_eig_script_c.min(linalg::min_eigenvalue(&script_c));
        out.max_coupling = out.max_coupling.max(linalg::spectral_norm(&coupling));
        out.max_cubic = out.max_cubic.max(linalg::spectral_norm(&cubic));
        out.max_u2_norm = out.max_u2_norm.max(linalg::spectral_norm(&u2));
        out.max_u3_norm = out.max_u3_norm.max(linalg::spectral_norm(&u3));
        out.max_h2_norm = out.max_h2_norm.max(linalg::spectral_norm(&h2));
    }
    Ok(out)
}

/// `(ok, min_eig)` where `ok` means `𝒞(t,μ) ⪰ I/2` at every grid node
/// (to within `1e-9`).
pub fn script_c_positivity(lin: &LinearizedSystem, tr: &AveragingTransform, mu: f64) -> Result<(bool, f64)> {
    let sweep = c_sweep(lin, tr, mu)?;
    Ok((sweep.min_eig_script_c >= 0.5 - 1e-9, sweep.min_eig_script_c))
}
