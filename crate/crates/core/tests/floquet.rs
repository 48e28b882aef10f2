use std::f64::consts::TAU;

use mathieu_core::floquet_lyapunov::{matrizant, solve_periodic_lyapunov, spectral_radius_monodromy};
use mathieu_core::linalg::Mat2;
use mathieu_core::model::LinearizedSystem;
use mathieu_core::periodic_signal::{Harmonic, PeriodicSignal};
use mathieu_core::simulate::{integrate, IntegrationOptions, LinearSystem};
use proptest::prelude::*;

fn system_strategy() -> impl Strategy<Value = (LinearizedSystem, f64)> {
    (
        0.05f64..1.0,
        -0.4f64..-0.05,
        -1.0f64..1.0,
        0.5f64..1.5,
        0.05f64..0.3,
    )
        .prop_map(|(alpha, beta_hat, c, s, mu)| {
            let phi_hat = PeriodicSignal::new(
                TAU,
                vec![
                    Harmonic { k: 1, cos_coeff: c * 0.3, sin_coeff: s },
                    Harmonic { k: 2, cos_coeff: 0.2 * c, sin_coeff: 0.0 },
                ],
            )
            .unwrap();
            (LinearizedSystem { alpha, beta_hat, phi_hat }, mu)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn liouville_formula(sys in system_strategy()) {
        let (lin, mu) = sys;
        let m = matrizant(|t| lin.matrix(t, mu), TAU, 2048).unwrap();
        for (t, y) in m.times.iter().zip(&m.y) {
            prop_assert!((y.determinant() - (-lin.alpha * mu * t).exp()).abs() < 1e-8);
        }
    }

    #[test]
    fn stable_systems_give_positive_periodic_solutions(sys in system_strategy()) {
        let (lin, mu) = sys;
        let a = |t: f64| lin.matrix(t, mu);
        let m = matrizant(a, TAU, 2048).unwrap();
        if spectral_radius_monodromy(&m) < 1.0 - 1e-6 {
            let sol = solve_periodic_lyapunov(a, TAU, 2048).unwrap();
            prop_assert!(sol.min_eigs.iter().all(|&e| e > 0.0));
            prop_assert!(sol.relative_residual() < 1e-8);
            prop_assert!(sol.periodicity_defect <= 1e-10 * sol.h_max);
        }
    }
}

#[test]
fn monodromy_columns_match_simulation() {
    let lin = LinearizedSystem {
        alpha: 0.1,
        beta_hat: -0.25,
        phi_hat: PeriodicSignal::single(TAU, 1, 0.0, 1.0).unwrap(),
    };
    let mu = 0.1;
    let m = matrizant(|t| lin.matrix(t, mu), TAU, 4096).unwrap().monodromy();
    let sys = LinearSystem::new(&lin, mu);
    for (j, (y0, y1)) in [(1.0, 0.0), (0.0, 1.0)].into_iter().enumerate() {
        let traj = integrate(&sys, y0, y1, TAU, IntegrationOptions::default()).unwrap();
        let end = traj.last_state();
        assert!((end - m.column(j)).norm() < 1e-8);
    }
}

#[test]
fn periodic_solution_satisfies_bvp_with_constant_coefficients() {
    // A = [[−1, 2], [0, −3]]: H solves HA + AᵀH = −I exactly
    let a = Mat2::new(-1.0, 2.0, 0.0, -3.0);
    let sol = solve_periodic_lyapunov(|_| a, 1.0, 1024).unwrap();
    let h = sol.h0();
    let r = h * a + a.transpose() * h + Mat2::identity();
    assert!(r.norm() < 1e-10);
    assert!(sol.bvp_residual < 1e-8);
}
