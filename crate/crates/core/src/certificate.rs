//! End-to-end certification pipeline shared by the CLI and the tests.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::averaging::{bogolyubov_condition, build_transform, build_u1, BogolyubovCheck};
use crate::bounds::{compute_bound_chain_with, BoundChain, BoundConfig};
use crate::error::{Error, Result};
use crate::floquet_lyapunov::{
    matrizant, solve_constant_lyapunov, solve_periodic_lyapunov, spectral_radius_monodromy, PeriodicLyapunovSolution,
};
use crate::linalg::Mat2;
use crate::model::{linearize, quadratic_remainder_bound, shift_to_zero, LinearizedSystem, MathieuModel, Nonlinearity};
use crate::periodic_signal::QuadratureGrid;
use crate::robustness::{
    attraction_certificate, linear_budget, nonlinear_budget, q_of_mu, AttractionCertificate, DecayEnvelope,
    EnvelopeVariant, Perturbation, RobustnessBudget, ScaledPerturbation,
};
use crate::simulate::{integrate, IntegrationOptions, NonlinearSystem, State, Trajectory, DEFAULT_STEPS_PER_PERIOD};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertifyOptions {
    pub grid: QuadratureGrid,
    pub steps_per_period: usize,
    /// Radius of the local remainder bound; sine nonlinearities default to `π/2`.
    pub rho: Option<f64>,
    pub bounds: BoundConfig,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            grid: QuadratureGrid::default(),
            steps_per_period: DEFAULT_STEPS_PER_PERIOD,
            rho: None,
            bounds: BoundConfig::default(),
        }
    }
}

impl CertifyOptions {
    pub fn effective_rho(&self, g: &Nonlinearity) -> Option<f64> {
        match (self.rho, g) {
            (Some(r), _) => Some(r),
            (None, Nonlinearity::PendulumSine | Nonlinearity::ShiftedSine { .. }) => Some(FRAC_PI_2),
            (None, Nonlinearity::Polynomial { .. }) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateStatus {
    Certified,
    OutsideRange,
    BogolyubovFails,
}

impl CertificateStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            Self::Certified => 0,
            Self::OutsideRange => 2,
            Self::BogolyubovFails => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSizes {
    pub quadrature_points: usize,
    pub steps_per_period: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovSummary {
    pub h_min: f64,
    pub h_max: f64,
    pub bvp_residual: f64,
    pub relative_bvp_residual: f64,
    pub periodicity_defect: f64,
    /// `H(0, μ)` row-major.
    pub h0: [[f64; 2]; 2],
}

impl LyapunovSummary {
    fn new(sol: &PeriodicLyapunovSolution) -> Self {
        let h = sol.h0();
        Self {
            h_min: sol.h_min,
            h_max: sol.h_max,
            bvp_residual: sol.bvp_residual,
            relative_bvp_residual: sol.relative_residual(),
            periodicity_defect: sol.periodicity_defect,
            h0: [[h[(0, 0)], h[(0, 1)]], [h[(1, 0)], h[(1, 1)]]],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BudgetPair {
    pub linear: RobustnessBudget,
    pub nonlinear: RobustnessBudget,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Admissibility {
    pub sup_d_phi_hat: f64,
    pub d_beta_hat: f64,
    pub d_alpha: f64,
    pub linear: bool,
    pub nonlinear: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeParams {
    pub linear_prefactor: f64,
    pub linear_mean_rate: f64,
    pub nonlinear_prefactor: f64,
    /// Mean of `ε/(2‖H‖)`, the rate used by the nonlinear envelope.
    pub nonlinear_mean_rate: f64,
    /// Mean of `1/(2‖H‖)`, reported for comparison only.
    pub uniform_mean_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub schema: u32,
    pub tool_version: String,
    pub status: CertificateStatus,
    pub model: MathieuModel,
    pub perturbation: Perturbation,
    pub grid: GridSizes,
    pub mu_requested: f64,
    pub bogolyubov: BogolyubovCheck,
    pub bound_chain: Option<BoundChain>,
    pub spectral_radius_at_mu: f64,
    pub lyapunov: Option<LyapunovSummary>,
    pub budgets: Option<BudgetPair>,
    pub admissibility: Option<Admissibility>,
    pub attraction: Option<AttractionCertificate>,
    /// Why `attraction` is absent although the certificate holds.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub attraction_note: Option<String>,
    pub envelope: Option<EnvelopeParams>,
}

impl Certificate {
    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }
}

/// `μ₀` and everything it depends on, for one model.
#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub lin: LinearizedSystem,
    pub bogolyubov: BogolyubovCheck,
    pub u1: Mat2,
    pub h1: Option<Mat2>,
    pub chain: Option<BoundChain>,
}

pub fn analyze(model: &MathieuModel, opts: &CertifyOptions) -> Result<Analysis> {
    model.validate()?;
    let lin = linearize(model)?;
    let bogolyubov = bogolyubov_condition(&lin, &opts.grid);
    let tr = build_transform(&lin, &opts.grid);
    let u1 = build_u1(&lin, &tr);
    if !bogolyubov.holds {
        return Ok(Analysis {
            lin,
            bogolyubov,
            u1,
            h1: None,
            chain: None,
        });
    }
    let h1 = solve_constant_lyapunov(&u1)?;
    let chain = compute_bound_chain_with(&lin, &tr, &u1, &h1, opts.bounds)?;
    Ok(Analysis {
        lin,
        bogolyubov,
        u1,
        h1: Some(h1),
        chain: Some(chain),
    })
}

pub fn spectral_radius_at(lin: &LinearizedSystem, mu: f64, steps_per_period: usize) -> Result<f64> {
    let m = matrizant(|t| lin.matrix(t, mu), lin.period(), steps_per_period)?;
    Ok(spectral_radius_monodromy(&m))
}

pub fn lyapunov_at(lin: &LinearizedSystem, mu: f64, steps_per_period: usize) -> Result<PeriodicLyapunovSolution> {
    Ok(solve_periodic_lyapunov(|t| lin.matrix(t, mu), lin.period(), steps_per_period)?.with_mu(mu))
}

fn check_mu(mu: f64) -> Result<()> {
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::InvalidParameter(format!("mu must be > 0, got {mu}")));
    }
    Ok(())
}

/// Runs the whole chain: Bogolyubov check, `μ₀`, periodic Lyapunov matrix,
/// budgets, attraction set and envelope parameters.
pub fn certify(model: &MathieuModel, mu: f64, pert: &Perturbation, opts: &CertifyOptions) -> Result<Certificate> {
    check_mu(mu)?;
    pert.validate(model.period())?;
    let analysis = analyze(model, opts)?;
    let lin = &analysis.lin;
    let spectral_radius_at_mu = spectral_radius_at(lin, mu, opts.steps_per_period)?;

    let mut cert = Certificate {
        schema: SCHEMA_VERSION,
        tool_version: TOOL_VERSION.to_string(),
        status: CertificateStatus::BogolyubovFails,
        model: model.clone(),
        perturbation: pert.clone(),
        grid: GridSizes {
            quadrature_points: opts.grid.n_points(),
            steps_per_period: opts.steps_per_period,
        },
        mu_requested: mu,
        bogolyubov: analysis.bogolyubov,
        bound_chain: analysis.chain,
        spectral_radius_at_mu,
        lyapunov: None,
        budgets: None,
        admissibility: None,
        attraction: None,
        attraction_note: None,
        envelope: None,
    };
    let Some(chain) = analysis.chain else {
        return Ok(cert);
    };
    if mu > chain.mu0 {
        cert.status = CertificateStatus::OutsideRange;
        return Ok(cert);
    }

    let sol = lyapunov_at(lin, mu, opts.steps_per_period)?;
    let budgets = BudgetPair {
        linear: linear_budget(&sol, mu),
        nonlinear: nonlinear_budget(&sol, mu),
    };
    let scaled = pert.scaled(model.slope_at_gamma());
    let sup_d_phi_hat = scaled.sup_abs_d_phi_hat(model.period(), &opts.grid);
    let admissibility = Admissibility {
        sup_d_phi_hat,
        d_beta_hat: scaled.d_beta_hat,
        d_alpha: scaled.d_alpha,
        linear: budgets.linear.admits_values(sup_d_phi_hat, scaled.d_beta_hat, scaled.d_alpha),
        nonlinear: budgets.nonlinear.admits_values(sup_d_phi_hat, scaled.d_beta_hat, scaled.d_alpha),
    };

    let g = shift_to_zero(model);
    let rho = opts.effective_rho(&g);
    if admissibility.nonlinear {
        match quadratic_remainder_bound(&g, rho) {
            Ok(p) => {
                let q = q_of_mu(model, pert, p, mu, &opts.grid);
                cert.attraction = Some(attraction_certificate(&sol, q, p, rho));
            }
            Err(e) => cert.attraction_note = Some(e.to_string()),
        }
    } else {
        cert.attraction_note = Some("perturbation exceeds the nonlinear budget".to_string());
    }

    let lin_env = DecayEnvelope::new(&sol, &scaled, mu, EnvelopeVariant::Linear);
    let non_env = DecayEnvelope::new(&sol, &scaled, mu, EnvelopeVariant::Nonlinear);
    cert.envelope = Some(EnvelopeParams {
        linear_prefactor: lin_env.prefactor,
        linear_mean_rate: lin_env.mean_rate(),
        nonlinear_prefactor: non_env.prefactor,
        nonlinear_mean_rate: non_env.mean_rate(),
        uniform_mean_rate: non_env.uniform_mean_rate(),
    });
    cert.lyapunov = Some(LyapunovSummary::new(&sol));
    cert.budgets = Some(budgets);
    cert.admissibility = Some(admissibility);
    cert.status = CertificateStatus::Certified;
    Ok(cert)
}

/// One row of a `(β, μ)` stability chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub beta: f64,
    pub mu: f64,
    pub spectral_radius: f64,
    pub certified_by_mu0: bool,
}

/// `μ₀` for `model` with `β` replaced, or `None` when the Bogolyubov
/// condition fails.
pub fn mu0_for_beta(model: &MathieuModel, beta: f64, opts: &CertifyOptions) -> Result<Option<f64>> {
    let mut m = model.clone();
    m.beta = beta;
    Ok(analyze(&m, opts)?.chain.map(|c| c.mu0))
}

pub fn sweep_row(model: &MathieuModel, beta: f64, mu: f64, mu0: Option<f64>, opts: &CertifyOptions) -> Result<SweepRow> {
    check_mu(mu)?;
    let mut m = model.clone();
    m.beta = beta;
    m.validate()?;
    let lin = linearize(&m)?;
    Ok(SweepRow {
        beta,
        mu,
        spectral_radius: spectral_radius_at(&lin, mu, opts.steps_per_period)?,
        certified_by_mu0: mu0.is_some_and(|m0| mu <= m0),
    })
}

/// Trajectory of the (perturbed) nonlinear deviation equation together with
/// its envelope and Lyapunov values.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    pub trajectory: Trajectory,
    pub lyapunov_values: Vec<f64>,
    pub envelope: Vec<f64>,
    pub in_attraction_set: bool,
    pub nonlinear_admissible: bool,
}

impl SimulationReport {
    /// `envelope − ‖v‖²` per sample.
    pub fn margins(&self) -> Vec<f64> {
        self.trajectory
            .states
            .iter()
            .zip(&self.envelope)
            .map(|(v, e)| e - v.norm_squared())
            .collect()
    }
}

/// Simulates the deviation `z = y − γ` from `(z(0), z'(0)) = (y0, y1)`.
///
/// Requires `μ ≤ μ₀`; the caller decides how to report a certificate with a
/// different status.
pub fn simulate_certified(
    model: &MathieuModel,
    mu: f64,
    pert: &Perturbation,
    y0: f64,
    y1: f64,
    t_end: f64,
    opts: &CertifyOptions,
    cert: &Certificate,
) -> Result<SimulationReport> {
    if cert.status != CertificateStatus::Certified {
        return Err(Error::InvalidParameter(format!("no certificate at mu = {mu}")));
    }
    let lin = linearize(model)?;
    let sol = lyapunov_at(&lin, mu, opts.steps_per_period)?;
    let scaled: ScaledPerturbation = pert.scaled(model.slope_at_gamma());
    let env = DecayEnvelope::new(&sol, &scaled, mu, EnvelopeVariant::Nonlinear);

    let sys = NonlinearSystem::with_nonlinearity(model, shift_to_zero(model), mu).perturbed(pert);
    let io = IntegrationOptions {
        steps_per_period: opts.steps_per_period,
        stride: 1,
    };
    let trajectory = integrate(&sys, y0, y1, t_end, io)?;
    let v0 = State::new(y0, y1);
    let psi0 = v0.dot(&(sol.h0() * v0));
    let lyapunov_values = trajectory
        .states
        .iter()
        .zip(&trajectory.times)
        .map(|(v, &t)| v.dot(&(sol.at(t) * v)))
        .collect();
    let envelope = trajectory.times.iter().map(|&t| env.eval(psi0, t)).collect();
    Ok(SimulationReport {
        in_attraction_set: cert.attraction.as_ref().is_some_and(|a| a.contains(&v0)),
        nonlinear_admissible: cert.admissibility.is_some_and(|a| a.nonlinear),
        trajectory,
        lyapunov_values,
        envelope,
    })
}
