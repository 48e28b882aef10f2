//! Shared fixtures for the benchmarks.

use std::f64::consts::{PI, TAU};

use mathieu_core::{MathieuModel, Nonlinearity, PeriodicSignal};

/// Inverted pendulum with `φ(t) = −sin t` about `γ = π`.
pub fn pendulum(alpha: f64, beta: f64) -> MathieuModel {
    let phi = PeriodicSignal::single(TAU, 1, 0.0, -1.0).expect("valid signal");
    MathieuModel::new(alpha, beta, phi, Nonlinearity::PendulumSine, PI).expect("valid model")
}
