use anyhow::{bail, Result};
use mathieu_core::averaging::build_transform;
use mathieu_core::bounds::c_sweep;
use mathieu_core::certificate::{
    analyze, certify as run_certify, lyapunov_at, mu0_for_beta, simulate_certified, sweep_row, Certificate,
    CertificateStatus, SCHEMA_VERSION,
};
use serde::Serialize;

use crate::input::{load_model, load_perturbation, options, parse_grid, resolve_mu, LoadedModel};
use crate::output::{emit, json, num, Csv};
use crate::{CertifyArgs, CommonArgs, Format, SimulateArgs, SweepArgs};

fn exit_code(status: CertificateStatus) -> u8 {
    status.exit_code() as u8
}

fn run(common: &CommonArgs) -> Result<(LoadedModel, Certificate)> {
    let loaded = load_model(&common.model.model)?;
    let opts = options(&common.model)?;
    let mu = resolve_mu(common.mu.as_deref(), &loaded, &opts)?;
    let pert = load_perturbation(common.model.pert.as_deref(), loaded.model.period())?;
    let cert = run_certify(&loaded.model, mu, &pert, &opts)?;
    Ok((loaded, cert))
}

pub fn certify(args: &CertifyArgs) -> Result<u8> {
    let (loaded, cert) = run(&args.common)?;
    emit(args.common.model.out.as_deref(), &json(&cert)?)?;
    let opts = options(&args.common.model)?;
    if let Some(path) = &args.dump_lyapunov {
        if cert.status != CertificateStatus::Certified {
            bail!("no Lyapunov matrix to dump: status {:?}", cert.status);
        }
        let lin = mathieu_core::linearize(&loaded.model)?;
        let sol = lyapunov_at(&lin, cert.mu_requested, opts.steps_per_period)?;
        let mut csv = Csv::new();
        csv.comment("mu", num(cert.mu_requested));
        csv.row(["t", "h11", "h12", "h22", "norm", "min_eig"]);
        for (i, (t, h)) in sol.times.iter().zip(&sol.h).enumerate() {
            csv.row([
                num(*t),
                num(h[(0, 0)]),
                num(h[(0, 1)]),
                num(h[(1, 1)]),
                num(sol.norms[i]),
                num(sol.min_eigs[i]),
            ]);
        }
        emit(Some(path), &csv.finish())?;
    }
    if let Some(path) = &args.dump_averaging {
        #[derive(Serialize)]
        struct AveragingDump {
            mu: f64,
            u1: [[f64; 2]; 2],
            h1: Option<[[f64; 2]; 2]>,
            c_sweep: Option<mathieu_core::CSweep>,
        }
        let an = analyze(&loaded.model, &opts)?;
        let rows = |m: &mathieu_core::Mat2| [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]];
        let sweep = if an.h1.is_some() {
            let tr = build_transform(&an.lin, &opts.grid);
            Some(c_sweep(&an.lin, &tr, cert.mu_requested)?)
        } else {
            None
        };
        let dump = AveragingDump {
            mu: cert.mu_requested,
            u1: rows(&an.u1),
            h1: an.h1.as_ref().map(rows),
            c_sweep: sweep,
        };
        emit(Some(path), &json(&dump)?)?;
    }
    Ok(exit_code(cert.status))
}

pub fn margins(args: &CommonArgs) -> Result<u8> {
    #[derive(Serialize)]
    struct Margins<'a> {
        schema: u32,
        status: CertificateStatus,
        mu: f64,
        mu0: Option<f64>,
        spectral_radius_at_mu: f64,
        h_max: Option<f64>,
        budgets: Option<&'a mathieu_core::certificate::BudgetPair>,
        admissibility: Option<&'a mathieu_core::certificate::Admissibility>,
    }
    let (_, cert) = run(args)?;
    let m = Margins {
        schema: SCHEMA_VERSION,
        status: cert.status,
        mu: cert.mu_requested,
        mu0: cert.bound_chain.map(|c| c.mu0),
        spectral_radius_at_mu: cert.spectral_radius_at_mu,
        h_max: cert.lyapunov.map(|l| l.h_max),
        budgets: cert.budgets.as_ref(),
        admissibility: cert.admissibility.as_ref(),
    };
    emit(args.model.out.as_deref(), &json(&m)?)?;
    Ok(exit_code(cert.status))
}

pub fn simulate(args: &SimulateArgs) -> Result<u8> {
    if !(args.t_end.is_finite() && args.t_end > 0.0) {
        bail!("--t-end must be > 0");
    }
    if args.stride == 0 {
        bail!("--stride must be >= 1");
    }
    let (loaded, cert) = run(&args.common)?;
    let opts = options(&args.common.model)?;
    let mut csv = Csv::new();
    csv.comment("schema", SCHEMA_VERSION);
    csv.comment("status", format!("{:?}", cert.status).to_lowercase());
    csv.comment("mu", num(cert.mu_requested));
    csv.comment("gamma", num(loaded.model.gamma));
    csv.comment("columns", "y and y_prime are deviations from gamma; margin = envelope - (y^2 + y_prime^2)");
    if cert.status != CertificateStatus::Certified {
        csv.row(["t", "y", "y_prime", "lyapunov_value", "envelope", "margin"]);
        emit(args.common.model.out.as_deref(), &csv.finish())?;
        return Ok(exit_code(cert.status));
    }
    let report = simulate_certified(
        &loaded.model,
        cert.mu_requested,
        &cert.perturbation,
        args.y0,
        args.y1,
        args.t_end,
        &opts,
        &cert,
    )?;
    csv.comment("nonlinear_admissible", report.nonlinear_admissible);
    csv.comment("in_attraction_set", report.in_attraction_set);
    csv.comment("diverged", report.trajectory.diverged);
    csv.row(["t", "y", "y_prime", "lyapunov_value", "envelope", "margin"]);
    let margins = report.margins();
    let traj = &report.trajectory;
    let last = traj.len() - 1;
    for i in (0..traj.len()).filter(|&i| i % args.stride == 0 || i == last) {
        let v = traj.states[i];
        csv.row([
            num(traj.times[i]),
            num(v[0]),
            num(v[1]),
            num(report.lyapunov_values[i]),
            num(report.envelope[i]),
            num(margins[i]),
        ]);
    }
    emit(args.common.model.out.as_deref(), &csv.finish())?;
    Ok(0)
}

pub fn sweep(args: &SweepArgs) -> Result<u8> {
    use rayon::prelude::*;

    let loaded = load_model(&args.model.model)?;
    let opts = options(&args.model)?;
    let mus = parse_grid(&args.mu_grid)?;
    let betas = parse_grid(&args.beta_grid)?;
    let mu0s: Vec<Option<f64>> = betas
        .par_iter()
        .map(|&b| mu0_for_beta(&loaded.model, b, &opts))
        .collect::<mathieu_core::Result<_>>()?;
    let points: Vec<(f64, Option<f64>, f64)> = betas
        .iter()
        .zip(&mu0s)
        .flat_map(|(&b, &m0)| mus.iter().map(move |&mu| (b, m0, mu)))
        .collect();
    let mut rows = points
        .par_iter()
        .map(|&(b, m0, mu)| sweep_row(&loaded.model, b, mu, m0, &opts))
        .collect::<mathieu_core::Result<Vec<_>>>()?;
    rows.sort_by(|x, y| x.beta.total_cmp(&y.beta).then(x.mu.total_cmp(&y.mu)));

    let text = match args.format {
        Format::Csv => {
            let mut csv = Csv::new();
            csv.comment("schema", SCHEMA_VERSION);
            csv.row(["beta", "mu", "spectral_radius", "certified_by_mu0"]);
            for r in &rows {
                csv.row([num(r.beta), num(r.mu), num(r.spectral_radius), r.certified_by_mu0.to_string()]);
            }
            csv.finish()
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Sweep<'a> {
                schema: u32,
                rows: &'a [mathieu_core::SweepRow],
            }
            json(&Sweep {
                schema: SCHEMA_VERSION,
                rows: &rows,
            })?
        }
    };
    emit(args.model.out.as_deref(), &text)?;
    Ok(0)
}
