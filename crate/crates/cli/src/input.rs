use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use mathieu_core::certificate::{analyze, CertifyOptions};
use mathieu_core::{pendulum_reduce, MathieuModel, PendulumParams, Perturbation, QuadratureGrid};
use serde::Deserialize;

use crate::ModelArgs;

#[derive(Deserialize)]
#[serde(untagged)]
enum ModelFile {
    Pendulum(PendulumParams),
    Model(MathieuModel),
}

/// The model plus the physical `μ` when the file held pendulum parameters.
pub struct LoadedModel {
    pub model: MathieuModel,
    pub physical_mu: Option<f64>,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path, what: &str) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {what} file {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {what} file {}", path.display()))
}

pub fn load_model(path: &Path) -> Result<LoadedModel> {
    match read_json::<ModelFile>(path, "model")? {
        ModelFile::Pendulum(p) => {
            let (model, mu) = pendulum_reduce(&p)?;
            Ok(LoadedModel {
                model,
                physical_mu: Some(mu),
            })
        }
        ModelFile::Model(model) => {
            model.validate()?;
            Ok(LoadedModel {
                model,
                physical_mu: None,
            })
        }
    }
}

pub fn load_perturbation(path: Option<&Path>, period: f64) -> Result<Perturbation> {
    let pert = match path {
        Some(p) => read_json::<Perturbation>(p, "perturbation")?,
        None => Perturbation::zero(),
    };
    pert.validate(period)?;
    Ok(pert)
}

pub fn options(args: &ModelArgs) -> Result<CertifyOptions> {
    Ok(CertifyOptions {
        grid: QuadratureGrid::new(args.grid)?,
        steps_per_period: args.steps,
        rho: args.rho,
        ..Default::default()
    })
}

/// Parses `0.001`, `1e-8`, `0.5*mu0` or `mu0`.
pub fn resolve_mu(text: Option<&str>, loaded: &LoadedModel, opts: &CertifyOptions) -> Result<f64> {
    let Some(text) = text else {
        return loaded
            .physical_mu
            .context("--mu is required unless the model file holds pendulum parameters");
    };
    let s = text.trim();
    let factor = if s == "mu0" {
        Some(1.0)
    } else if let Some(k) = s.strip_suffix("*mu0") {
        Some(k.trim().parse::<f64>().with_context(|| format!("bad --mu factor {k:?}"))?)
    } else {
        None
    };
    let mu = match factor {
        Some(k) => {
            let chain = analyze(&loaded.model, opts)?.chain;
            let Some(chain) = chain else {
                bail!("mu0 is undefined: the Bogolyubov condition fails for this model");
            };
            k * chain.mu0
        }
        None => s.parse::<f64>().with_context(|| format!("bad --mu value {s:?}"))?,
    };
    if !(mu.is_finite() && mu > 0.0) {
        bail!("--mu must be > 0, got {mu}");
    }
    Ok(mu)
}

/// Comma list, `log:START:STOP:N` or `lin:START:STOP:N`; empty string gives
/// an empty grid.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let s = text.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 4 && (parts[0] == "log" || parts[0] == "lin") {
        let a: f64 = parts[1].parse().with_context(|| format!("bad grid start in {s:?}"))?;
        let b: f64 = parts[2].parse().with_context(|| format!("bad grid stop in {s:?}"))?;
        let n: usize = parts[3].parse().with_context(|| format!("bad grid count in {s:?}"))?;
        if n == 0 {
            return Ok(Vec::new());
        }
        let frac = |i: usize| if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
        return if parts[0] == "log" {
            if !(a > 0.0 && b > 0.0) {
                bail!("log grid needs positive bounds in {s:?}");
            }
            let (la, lb) = (a.log10(), b.log10());
            Ok((0..n)
                .map(|i| match i {
                    0 => a,
                    _ if i == n - 1 => b,
                    _ => 10f64.powf(la + (lb - la) * frac(i)),
                })
                .collect())
        } else {
            Ok((0..n).map(|i| a + (b - a) * frac(i)).collect())
        };
    }
    s.split(',')
        .map(|x| x.trim().parse::<f64>().with_context(|| format!("bad grid value {x:?}")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert!(parse_grid("").unwrap().is_empty());
        assert_eq!(parse_grid("0.1, 0.2").unwrap(), vec![0.1, 0.2]);
        let g = parse_grid("log:1e-3:1e-1:3").unwrap();
        assert_eq!(g[0], 1e-3);
        assert_eq!(g[2], 1e-1);
        assert!((g[1] - 1e-2).abs() < 1e-15);
        assert_eq!(parse_grid("lin:0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert!(parse_grid("log:0:1:3").is_err());
        assert!(parse_grid("a,b").is_err());
    }
}
