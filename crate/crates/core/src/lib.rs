//! Explicit asymptotic-stability certificates for Mathieu-type equations
//!
//! ```text
//! y'' + αμy' + (βμ² + μφ(t)) f(y) = 0
//! ```
//!
//! with `φ` periodic and zero-mean: the admissible range `(0, μ₀]`,
//! perturbation budgets, attraction-set radii and decay envelopes, each of
//! which can be checked against direct simulation.

pub mod averaging;
pub mod bounds;
pub mod certificate;
pub mod error;
pub mod floquet_lyapunov;
pub mod linalg;
pub mod model;
pub mod periodic_signal;
pub mod robustness;
pub mod simulate;

pub use averaging::{
    bogolyubov_condition, build_transform, build_u1, build_u2_u3, AveragingTransform, BogolyubovCheck,
    TransformedSystem,
};
pub use bounds::{c_matrix, c_sweep, compute_bound_chain, script_c_positivity, BoundChain, BoundConfig, CSweep};
pub use certificate::{certify, Certificate, CertificateStatus, CertifyOptions, SweepRow};
pub use error::{Error, Result};
pub use floquet_lyapunov::{
    krein_envelope, matrizant, solve_constant_lyapunov, solve_periodic_lyapunov, spectral_radius_monodromy,
    KreinEnvelope, Matrizant, PeriodicLyapunovSolution,
};
pub use linalg::Mat2;
pub use model::{
    linearize, pendulum_reduce, quadratic_remainder_bound, LinearizedSystem, MathieuModel, Nonlinearity,
    PendulumParams,
};
pub use periodic_signal::{Harmonic, PeriodicSignal, QuadratureGrid};
pub use robustness::{
    attraction_certificate, decay_envelope, delta_a_norm, epsilon_fn, linear_budget, nonlinear_budget, q_of_mu,
    AttractionCertificate, DecayEnvelope, EnvelopeVariant, Perturbation, RobustnessBudget, ScaledPerturbation,
};
pub use simulate::{integrate, verify_envelope, verify_envelope_with, IntegrationOptions, State, Trajectory};
