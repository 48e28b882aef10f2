//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::f64::consts::{PI, TAU};
use std::time::{Duration, Instant};

use mathieu_core::averaging::{bogolyubov_condition, build_transform};
use mathieu_core::bounds::c_sweep;
use mathieu_core::certificate::{analyze, certify, lyapunov_at, spectral_radius_at, CertifyOptions};
use mathieu_core::floquet_lyapunov::{solve_periodic_lyapunov, KreinEnvelope};
use mathieu_core::linalg::{spectral_norm, Mat2};
use mathieu_core::model::{linearize, shift_to_zero, LinearizedSystem, MathieuModel, Nonlinearity};
use mathieu_core::periodic_signal::{Harmonic, PeriodicSignal, QuadratureGrid};
use mathieu_core::robustness::{
    linear_budget, nonlinear_budget, DecayEnvelope, EnvelopeVariant, Perturbation, RobustnessBudget,
};
use mathieu_core::simulate::{
    integrate, verify_envelope, verify_envelope_with, IntegrationOptions, LinearSystem, NonlinearSystem, State,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pendulum(alpha: f64, beta: f64) -> MathieuModel {
    MathieuModel::new(
        alpha,
        beta,
        PeriodicSignal::single(TAU, 1, 0.0, -1.0).unwrap(),
        Nonlinearity::PendulumSine,
        PI,
    )
    .unwrap()
}

fn mu0_of(model: &MathieuModel, opts: &CertifyOptions) -> f64 {
    analyze(model, opts).unwrap().chain.unwrap().mu0
}

fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

fn bogolyubov_threshold() -> Outcome {
    let grid = QuadratureGrid::default();
    let lin = |beta: f64| LinearizedSystem {
        alpha: 0.1,
        beta_hat: -beta,
        phi_hat: PeriodicSignal::single(TAU, 1, 0.0, 1.0).unwrap(),
    };
    let mut worst: f64 = 0.0;
    for beta in [0.1, 0.25, 0.4, 0.499999, 0.500001, 0.6] {
        let c = bogolyubov_condition(&lin(beta), &grid);
        worst = worst.max((c.lhs - 1.5).abs()).max((c.rhs - (1.0 + beta)).abs());
    }
    let below = bogolyubov_condition(&lin(0.499999), &grid).holds;
    let above = bogolyubov_condition(&lin(0.500001), &grid).holds;
    Outcome::new(
        worst <= 1e-9 && below && !above,
        format!("max |lhs-1.5|,|rhs-(1+β)| = {worst:.2e}; holds(0.499999)={below}, holds(0.500001)={above}"),
    )
}

fn certified_range() -> Outcome {
    let opts = CertifyOptions::default();
    let mut worst_radius: f64 = 0.0;
    let mut all = true;
    for beta in [0.1, 0.25, 0.4] {
        for alpha in [0.05, 0.1, 0.5] {
            let model = pendulum(alpha, beta);
            let mu0 = mu0_of(&model, &opts);
            let lin = linearize(&model).unwrap();
            for i in 0..10 {
                // log-spaced over [1e-3 μ₀, μ₀]
                let mu = mu0 * 10f64.powf(-3.0 + i as f64 / 3.0);
                let r = spectral_radius_at(&lin, mu, opts.steps_per_period).unwrap();
                // Liouville: the multipliers' product is exp(−αμT)
                let m = mathieu_core::floquet_lyapunov::matrizant(|t| lin.matrix(t, mu), TAU, 4096).unwrap();
                let liouville = rel_diff(m.monodromy().determinant(), (-alpha * mu * TAU).exp());
                all &= r < 1.0 && liouville < 1e-10;
                worst_radius = worst_radius.max(r);
            }
        }
    }
    Outcome::new(all, format!("90 (β, α, μ) points, max spectral radius = {worst_radius:.15}"))
}

/// `∫_0^{KT} YᵀY` by direct RK4 integration of `Y` and Simpson's rule with
/// cubic-Hermite midpoints.
fn truncated_integral_oracle(lin: &LinearizedSystem, mu: f64, periods: usize, steps: usize) -> Mat2 {
    let h = lin.period() / steps as f64;
    let f = |t: f64, y: &Mat2| lin.matrix(t, mu) * y;
    let mut y = Mat2::identity();
    let mut acc = Mat2::zeros();
    let total = periods * steps;
    let gram = |y: &Mat2| y.transpose() * y;
    let mut prev = gram(&y);
    for i in 0..total {
        let t = i as f64 * h;
        let k1 = f(t, &y);
        let k2 = f(t + h / 2.0, &(y + k1 * (h / 2.0)));
        let k3 = f(t + h / 2.0, &(y + k2 * (h / 2.0)));
        let k4 = f(t + h, &(y + k3 * h));
        let next = y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        // Simpson on [t, t+h] with a cubic-Hermite midpoint value of Y
        let y_mid = (y + next) * 0.5 + (f(t, &y) - f(t + h, &next)) * (h / 8.0);
        let g_next = gram(&next);
        acc += (prev + gram(&y_mid) * 4.0 + g_next) * (h / 6.0);
        prev = g_next;
        y = next;
    }
    acc
}

fn periodic_lyapunov_correctness() -> Outcome {
    let mut lines = Vec::new();
    let mut all = true;
    for (alpha, beta, mu) in [(0.1, 0.25, 0.05), (0.5, 0.25, 0.1)] {
        let model = pendulum(alpha, beta);
        let lin = linearize(&model).unwrap();
        let sol = lyapunov_at(&lin, mu, 4096).unwrap();
        let positive = sol.min_eigs.iter().all(|&e| e > 0.0);
        let rho = sol.spectral_radius;
        let periods = ((1e-12f64).ln() / (2.0 * rho.ln())).ceil() as usize;
        let oracle = truncated_integral_oracle(&lin, mu, periods, 4096);
        let rel = spectral_norm(&(oracle - sol.h0())) / spectral_norm(&sol.h0());
        let ok = sol.bvp_residual <= 1e-6 && sol.periodicity_defect <= 1e-8 && positive && rel <= 1e-6;
        all &= ok;
        lines.push(format!(
            "α={alpha} β={beta} μ={mu}: residual {:.2e}, defect {:.2e}, H≻0 {positive}, oracle rel {rel:.2e} (K={periods})",
            sol.bvp_residual, sol.periodicity_defect
        ));
    }
    Outcome::new(all, lines.join("; "))
}

fn krein_envelope_checks() -> Outcome {
    let sol = solve_periodic_lyapunov(|_| -Mat2::identity(), 1.0, 4096).unwrap();
    let env = KreinEnvelope::new(&sol);
    let y0_sq: f64 = 0.3f64.powi(2) + 0.4f64.powi(2);
    let analytic = (0..=100)
        .map(|i| {
            let t = i as f64 * 0.05;
            let exact = (-2.0 * t).exp() * y0_sq;
            (env.eval(y0_sq, t) - exact).abs()
        })
        .fold(0.0, f64::max);

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let model = pendulum(0.1, 0.25);
    let opts = CertifyOptions::default();
    let lin = linearize(&model).unwrap();
    let mut worst_ratio: f64 = 0.0;
    let mut all = analytic <= 1e-8;
    for mu in [0.5 * mu0_of(&model, &opts), 0.05] {
        let sol = lyapunov_at(&lin, mu, 4096).unwrap();
        let env = KreinEnvelope::new(&sol);
        let sys = LinearSystem::new(&lin, mu);
        for _ in 0..100 {
            let th: f64 = rng.gen_range(0.0..TAU);
            let (y0, y1) = (th.cos(), th.sin());
            let traj = integrate(&sys, y0, y1, 20.0 * TAU, IntegrationOptions::default()).unwrap();
            let rep = verify_envelope(&traj, |t| env.eval(1.0, t));
            all &= rep.pass;
            for (t, v) in traj.times.iter().zip(&traj.states) {
                worst_ratio = worst_ratio.max(v.norm_squared() / env.eval(1.0, *t));
            }
        }
    }
    Outcome::new(
        all,
        format!("A≡−I max abs error {analytic:.2e}; 200 pendulum trajectories, max ‖y‖²/envelope = {worst_ratio:.4}"),
    )
}

fn random_signal(rng: &mut ChaCha8Rng) -> PeriodicSignal {
    let harmonics = (1..=3)
        .map(|k| Harmonic {
            k,
            cos_coeff: rng.gen_range(-1.0..1.0),
            sin_coeff: rng.gen_range(-1.0..1.0),
        })
        .collect();
    PeriodicSignal::new(TAU, harmonics).unwrap()
}

/// Random model-level perturbation using `scale` of both budget inequalities.
fn perturbation_at(
    rng: &mut ChaCha8Rng,
    budget: &RobustnessBudget,
    scale: f64,
    slope: f64,
    grid: &QuadratureGrid,
) -> Perturbation {
    let mu = budget.mu;
    let base = random_signal(rng);
    let sup = base.sup_norm(grid);
    let d_phi_hat = base.scaled(scale * budget.budget_phi_sup / (mu * sup));
    let w: f64 = rng.gen_range(0.0..1.0);
    let coeff = scale * budget.budget_coeff;
    let sign = |r: &mut ChaCha8Rng| if r.gen_bool(0.5) { 1.0 } else { -1.0 };
    let d_alpha = sign(rng) * w * coeff / mu;
    let d_beta_hat = sign(rng) * (1.0 - w) * coeff / (mu * mu);
    Perturbation {
        d_alpha,
        d_beta: d_beta_hat / slope,
        d_phi: Some(d_phi_hat.scaled(1.0 / slope)),
        d_phi_offset: 0.0,
    }
}

fn linear_robustness() -> Outcome {
    let grid = QuadratureGrid::default();
    let model = pendulum(0.1, 0.25);
    let opts = CertifyOptions::default();
    let lin = linearize(&model).unwrap();
    let slope = model.slope_at_gamma();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut all = true;
    let mut worst_radius: f64 = 0.0;
    let mut lines = Vec::new();
    for mu in [0.5 * mu0_of(&model, &opts), 0.05] {
        let sol = lyapunov_at(&lin, mu, 4096).unwrap();
        let budget = linear_budget(&sol, mu);
        let mut perts = Vec::new();
        for _ in 0..20 {
            for scale in [0.5, 0.99] {
                let scaled = perturbation_at(&mut rng, &budget, scale, slope, &grid).scaled(slope);
                all &= budget.admits(&scaled, TAU, &grid);
                let m = mathieu_core::floquet_lyapunov::matrizant(
                    |t| lin.matrix(t, mu) + scaled.delta_a(t, mu),
                    TAU,
                    4096,
                )
                .unwrap();
                let r = mathieu_core::linalg::spectral_radius(&m.monodromy());
                all &= r < 1.0;
                worst_radius = worst_radius.max(r);
                perts.push(scaled);
            }
        }
        let mut worst_ratio: f64 = 0.0;
        for j in 0..50 {
            let scaled = &perts[j % perts.len()];
            let env = DecayEnvelope::new(&sol, scaled, mu, EnvelopeVariant::Linear);
            let sys = LinearSystem::perturbed(&lin, mu, scaled);
            let th: f64 = rng.gen_range(0.0..TAU);
            let traj = integrate(&sys, th.cos(), th.sin(), 20.0 * TAU, IntegrationOptions::default()).unwrap();
            all &= verify_envelope(&traj, |t| env.eval(1.0, t)).pass;
            for (t, v) in traj.times.iter().zip(&traj.states) {
                worst_ratio = worst_ratio.max(v.norm_squared() / env.eval(1.0, *t));
            }
        }
        lines.push(format!(
            "μ={mu:.3e}: budget {:.3e}, max ‖v‖²/envelope {worst_ratio:.4}",
            budget.budget_phi_sup
        ));
    }
    Outcome::new(
        all,
        format!(
            "{}; 80 perturbed systems, max radius {worst_radius:.15}; 100 trajectories",
            lines.join(", ")
        ),
    )
}

fn attraction() -> Outcome {
    let grid = QuadratureGrid::default();
    let model = pendulum(0.1, 0.25);
    let opts = CertifyOptions {
        rho: Some(0.5),
        ..Default::default()
    };
    let mu = 0.5 * mu0_of(&model, &opts);
    let lin = linearize(&model).unwrap();
    let sol = lyapunov_at(&lin, mu, opts.steps_per_period).unwrap();
    let slope = model.slope_at_gamma();
    let budget = nonlinear_budget(&sol, mu);
    let mut rng = ChaCha8Rng::seed_from_u64(6);

    let mut envelope_ok = true;
    let mut decay_ok = true;
    let mut worst_decay: f64 = 0.0;
    let mut worst_ratio: f64 = 0.0;
    for i in 0..50 {
        let pert = if i % 2 == 0 {
            Perturbation::zero()
        } else {
            perturbation_at(&mut rng, &budget, 0.5, slope, &grid)
        };
        let cert = certify(&model, mu, &pert, &opts).unwrap();
        let att = cert.attraction.expect("admissible perturbation yields an attraction set");
        assert_eq!(att.p, 0.5 / 6.0);
        let th: f64 = rng.gen_range(0.0..TAU);
        let u = State::new(th.cos(), th.sin());
        let h0 = att.h0();
        let mut t_max = att.euclid_radius.unwrap();
        if let Some(r2) = att.lyapunov_radius_sq {
            t_max = t_max.min((r2 / u.dot(&(h0 * u))).sqrt());
        }
        let s = if i < 25 { 1.0 - 1e-12 } else { rng.gen_range(0.0..1.0) };
        let v0 = u * (t_max * s);
        envelope_ok &= att.contains(&v0);

        let scaled = pert.scaled(slope);
        let env = DecayEnvelope::new(&sol, &scaled, mu, EnvelopeVariant::Nonlinear);
        let psi0 = v0.dot(&(h0 * v0));
        let sys = NonlinearSystem::with_nonlinearity(&model, shift_to_zero(&model), mu).perturbed(&pert);
        let traj = integrate(&sys, v0[0], v0[1], 50.0 * TAU, IntegrationOptions::default()).unwrap();
        let scale = v0.norm_squared();
        let rep = verify_envelope_with(&traj, |t| env.eval(psi0, t), 1e-9 * scale);
        envelope_ok &= rep.pass;
        for (t, v) in traj.times.iter().zip(&traj.states) {
            worst_ratio = worst_ratio.max(v.norm_squared() / env.eval(psi0, *t));
        }
        let decay = traj.last_state().norm() / v0.norm();
        worst_decay = worst_decay.max(decay);
        decay_ok &= decay < 1e-4;
    }
    Outcome::new(
        envelope_ok && decay_ok,
        format!(
            "μ={mu:.3e}; (a) envelope {} (max ‖v‖²/envelope {worst_ratio:.3e}); (b) decay {} (max ‖v(50T)‖/‖v(0)‖ = {worst_decay:.9})",
            if envelope_ok { "holds" } else { "violated" },
            if decay_ok { "holds" } else { "violated" },
        ),
    )
}

fn c_matrix_checks() -> Outcome {
    let opts = CertifyOptions::default();
    let mut all = true;
    let (mut min_c, mut min_sc) = (f64::INFINITY, f64::INFINITY);
    for beta in [0.1, 0.25, 0.4] {
        for alpha in [0.05, 0.1, 0.5] {
            let model = pendulum(alpha, beta);
            let an = analyze(&model, &opts).unwrap();
            let chain = an.chain.unwrap();
            let tr = build_transform(&an.lin, &opts.grid);
            for mu in [chain.mu1, chain.mu0] {
                let s = c_sweep(&an.lin, &tr, mu).unwrap();
                all &= s.min_eig_c >= 0.75 - 1e-9 && s.min_eig_script_c >= 0.5 - 1e-9;
                min_c = min_c.min(s.min_eig_c);
                min_sc = min_sc.min(s.min_eig_script_c);
            }
        }
    }
    Outcome::new(all, format!("9 models at μ₁ and μ₀: min λ(C) = {min_c:.9}, min λ(𝒞) = {min_sc:.9}"))
}

fn discretization_robustness() -> Outcome {
    let model = pendulum(0.1, 0.25);
    let coarse = CertifyOptions::default();
    let fine = CertifyOptions {
        grid: QuadratureGrid::new(4096).unwrap(),
        steps_per_period: 8192,
        ..Default::default()
    };
    let mu = 0.5 * mu0_of(&model, &coarse);
    let a = certify(&model, mu, &Perturbation::zero(), &coarse).unwrap();
    let b = certify(&model, mu, &Perturbation::zero(), &fine).unwrap();
    let (la, lb) = (a.lyapunov.unwrap(), b.lyapunov.unwrap());
    let (ba, bb) = (a.budgets.unwrap(), b.budgets.unwrap());
    let pairs = [
        ("mu0", a.bound_chain.unwrap().mu0, b.bound_chain.unwrap().mu0),
        ("h_min", la.h_min, lb.h_min),
        ("h_max", la.h_max, lb.h_max),
        ("linear.phi", ba.linear.budget_phi_sup, bb.linear.budget_phi_sup),
        ("linear.coeff", ba.linear.budget_coeff, bb.linear.budget_coeff),
        ("nonlinear.phi", ba.nonlinear.budget_phi_sup, bb.nonlinear.budget_phi_sup),
        ("nonlinear.coeff", ba.nonlinear.budget_coeff, bb.nonlinear.budget_coeff),
    ];
    let (name, worst) = pairs
        .iter()
        .map(|(n, x, y)| (*n, rel_diff(*x, *y)))
        .fold(("", 0.0), |acc, p| if p.1 > acc.1 { p } else { acc });
    Outcome::new(worst < 1e-6, format!("max relative change {worst:.2e} ({name})"))
}

type Criterion = (&'static str, Duration, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 8] = [
        ("Bogolyubov threshold", Duration::from_secs(1), bogolyubov_threshold),
        ("certified range (0, mu0]", Duration::from_secs(10), certified_range),
        ("periodic Lyapunov solution", Duration::from_secs(5), periodic_lyapunov_correctness),
        ("Krein envelope", Duration::from_secs(10), krein_envelope_checks),
        ("linear robustness budget", Duration::from_secs(20), linear_robustness),
        ("attraction set and nonlinear decay", Duration::from_secs(30), attraction),
        ("C and script-C positivity", Duration::from_secs(5), c_matrix_checks),
        ("discretization robustness", Duration::from_secs(30), discretization_robustness),
    ];
    let mut failures = 0;
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let pass = out.pass && elapsed < *limit;
        if !pass {
            failures += 1;
        }
        println!(
            "criterion {}: {} {name} [{:.2}s / {}s] {}",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            limit.as_secs(),
            out.detail
        );
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
