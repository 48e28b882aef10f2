//! Zero-mean periodic forcing signals and uniform-grid quadrature.
//!
//! A [`PeriodicSignal`] is a finite trigonometric series without a constant
//! term, so its mean over one period vanishes by construction. Antiderivatives
//! are computed analytically and are again zero-mean series.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Harmonic {
    pub k: u32,
    #[serde(rename = "cos", default)]
    pub cos_coeff: f64,
    #[serde(rename = "sin", default)]
    pub sin_coeff: f64,
}

#[derive(Deserialize)]
struct SignalRepr {
    period: f64,
    #[serde(default)]
    harmonics: Vec<Harmonic>,
}

/// `φ(t) = Σ_k (c_k cos(2πkt/T) + s_k sin(2πkt/T))`, `k ≥ 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SignalRepr")]
pub struct PeriodicSignal {
    period: f64,
    harmonics: Vec<Harmonic>,
}

impl TryFrom<SignalRepr> for PeriodicSignal {
    type Error = Error;

    fn try_from(r: SignalRepr) -> Result<Self> {
        PeriodicSignal::new(r.period, r.harmonics)
    }
}

impl PeriodicSignal {
    pub fn new(period: f64, harmonics: Vec<Harmonic>) -> Result<Self> {
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::InvalidSignal(format!("period must be positive, got {period}")));
        }
        let mut seen: Vec<u32> = Vec::with_capacity(harmonics.len());
        for h in &harmonics {
            if h.k == 0 {
                return Err(Error::InvalidSignal(
                    "harmonic index 0 would add a constant term".into(),
                ));
            }
            if !(h.cos_coeff.is_finite() && h.sin_coeff.is_finite()) {
                return Err(Error::InvalidSignal(format!("non-finite coefficient at k = {}", h.k)));
            }
            if seen.contains(&h.k) {
                return Err(Error::InvalidSignal(format!("duplicate harmonic k = {}", h.k)));
            }
            seen.push(h.k);
        }
        Ok(Self { period, harmonics })
    }

    pub fn zero(period: f64) -> Result<Self> {
        Self::new(period, Vec::new())
    }

    /// Single harmonic `c cos(2πkt/T) + s sin(2πkt/T)`.
    pub fn single(period: f64, k: u32, cos_coeff: f64, sin_coeff: f64) -> Result<Self> {
        Self::new(
            period,
            vec![Harmonic {
                k,
                cos_coeff,
                sin_coeff,
            }],
        )
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn harmonics(&self) -> &[Harmonic] {
        &self.harmonics
    }

    pub fn is_zero(&self) -> bool {
        self.harmonics
            .iter()
            .all(|h| h.cos_coeff == 0.0 && h.sin_coeff == 0.0)
    }

    fn omega(&self) -> f64 {
        TAU / self.period
    }

    pub fn eval(&self, t: f64) -> f64 {
        let w = self.omega();
        self.harmonics
            .iter()
            .map(|h| {
                let (s, c) = (w * f64::from(h.k) * t).sin_cos();
                h.cos_coeff * c + h.sin_coeff * s
            })
            .sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            period: self.period,
            harmonics: self
                .harmonics
                .iter()
                .map(|h| Harmonic {
                    k: h.k,
                    cos_coeff: factor * h.cos_coeff,
                    sin_coeff: factor * h.sin_coeff,
                })
                .collect(),
        }
    }

    /// The unique zero-mean antiderivative `B` with `B' = self`.
    pub fn antiderivative(&self) -> Self {
        let w = self.omega();
        Self {
            period: self.period,
            harmonics: self
                .harmonics
                .iter()
                .map(|h| {
                    let wk = w * f64::from(h.k);
                    Harmonic {
                        k: h.k,
                        cos_coeff: -h.sin_coeff / wk,
                        sin_coeff: h.cos_coeff / wk,
                    }
                })
                .collect(),
        }
    }

    /// Grid approximation of `max_t |φ(t)|` over nodes and midpoints.
    pub fn sup_norm(&self, grid: &QuadratureGrid) -> f64 {
        sup_abs(|t| self.eval(t), self.period, grid)
    }
}

/// `B(t) = ∫_0^t s − (1/T)∫_0^T ∫_0^τ s`, i.e. the zero-mean antiderivative.
pub fn zero_mean_antiderivative(s: &PeriodicSignal) -> PeriodicSignal {
    s.antiderivative()
}

/// Uniform partition of one period into an even number of Simpson panels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadratureGrid {
    n_points: usize,
}

impl Default for QuadratureGrid {
    fn default() -> Self {
        Self { n_points: 2048 }
    }
}

impl QuadratureGrid {
    pub const MIN_POINTS: usize = 16;

    pub fn new(n_points: usize) -> Result<Self> {
        if n_points < Self::MIN_POINTS || n_points % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "need an even number of intervals >= {}, got {n_points}",
                Self::MIN_POINTS
            )));
        }
        Ok(Self { n_points })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn step(&self, period: f64) -> f64 {
        period / self.n_points as f64
    }

    /// Nodes `0, T/N, …, T` (N + 1 values).
    pub fn nodes(&self, period: f64) -> impl Iterator<Item = f64> + '_ {
        let h = self.step(period);
        (0..=self.n_points).map(move |i| i as f64 * h)
    }

    pub fn refined(&self) -> Self {
        Self {
            n_points: 2 * self.n_points,
        }
    }
}

/// Composite Simpson rule for `∫_a^b f` with `grid.n_points()` panels.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, grid: &QuadratureGrid) -> f64 {
    debug_assert!(a <= b);
    let n = grid.n_points();
    let h = (b - a) / n as f64;
    if h == 0.0 {
        return 0.0;
    }
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// Simpson over uniformly spaced samples `v_0..v_n` (n even) with spacing `h`.
pub fn simpson_samples(values: &[f64], h: f64) -> f64 {
    let n = values.len() - 1;
    debug_assert!(n % 2 == 0);
    let mut acc = values[0] + values[n];
    for (i, v) in values.iter().enumerate().take(n).skip(1) {
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * v;
    }
    acc * h / 3.0
}

/// Running integrals `∫_0^{t_i}` at every node of a uniform sample.
///
/// Even nodes use composite Simpson; odd nodes add the single-interval
/// quadratic rule `h/12 (5f₀ + 8f₁ − f₂)` to the preceding even node.
pub fn cumulative_simpson<T>(values: &[T], h: f64) -> Vec<T>
where
    T: Copy + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
{
    let n = values.len() - 1;
    debug_assert!(n >= 2 && n % 2 == 0);
    let zero = values[0] * 0.0;
    let mut out = Vec::with_capacity(n + 1);
    out.push(zero);
    let mut acc = zero;
    let mut i = 0;
    while i < n {
        let (f0, f1, f2) = (values[i], values[i + 1], values[i + 2]);
        out.push(acc + (f0 * 5.0 + f1 * 8.0 + f2 * -1.0) * (h / 12.0));
        acc = acc + (f0 + f1 * 4.0 + f2) * (h / 3.0);
        out.push(acc);
        i += 2;
    }
    out
}

/// Max of `|f|` over grid nodes and midpoints of `[0, period]`, with each
/// sampled local peak polished by a golden-section search on its bracket.
///
/// The result never falls below the plain sample maximum.
pub fn sup_abs(f: impl Fn(f64) -> f64, period: f64, grid: &QuadratureGrid) -> f64 {
    let n = 2 * grid.n_points();
    let h = period / n as f64;
    let samples: Vec<f64> = (0..=n).map(|i| f(i as f64 * h).abs()).collect();
    let mut best = samples.iter().copied().fold(0.0, f64::max);
    for i in 0..n {
        let left = samples[if i == 0 { n - 1 } else { i - 1 }];
        let right = samples[i + 1];
        if samples[i] > 0.0 && samples[i] >= left && samples[i] >= right {
            let t = i as f64 * h;
            best = best.max(golden_max(|x| f(x).abs(), t - h, t + h));
        }
    }
    best
}

fn golden_max(g: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    for _ in 0..40 {
        if gc > gd {
            b = d;
            d = c;
            gd = gc;
            c = b - INV_PHI * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + INV_PHI * (b - a);
            gd = g(d);
        }
    }
    gc.max(gd)
}
