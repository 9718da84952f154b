use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{run, SimConfig};
use crate::error::Error;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LifetimePoint {
    pub n: usize,
    pub beta: usize,
    /// Mean lifetime over delivered bits, averaged across seeds.
    pub mean: f64,
    /// Largest lifetime, averaged across seeds.
    pub worst: f64,
}

/// `value ~ a * n^q + b`, plus the `k * sqrt(n) + b` fit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LifetimeFit {
    pub exponent: f64,
    pub a: f64,
    pub b: f64,
    pub sse: f64,
    pub sqrt_coeff: f64,
    pub sqrt_offset: f64,
}

/// Runs `base` at each `n` (with `beta_of(n)`) over all seeds.
pub fn lifetime_series(
    base: &SimConfig,
    ns: &[usize],
    beta_of: impl Fn(usize) -> usize + Sync,
    seeds: &[u64],
) -> Result<Vec<LifetimePoint>, Error> {
    ns.par_iter()
        .map(|&n| {
            let beta = beta_of(n);
            let runs: Result<Vec<_>, Error> =
                seeds.iter().map(|&s| run(&SimConfig { n, beta, seed: s, ..base.clone() })).collect();
            let runs = runs?;
            let k = runs.len() as f64;
            Ok(LifetimePoint {
                n,
                beta,
                mean: runs.iter().map(|r| r.mean_lifetime()).sum::<f64>() / k,
                worst: runs.iter().map(|r| r.max_lifetime() as f64).sum::<f64>() / k,
            })
        })
        .collect()
}

/// Least squares for `y = a * x + b`; returns `(a, b, sse)`.
fn linear(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let m = x.len() as f64;
    let (sx, sy) = (x.iter().sum::<f64>(), y.iter().sum::<f64>());
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let den = m * sxx - sx * sx;
    let a = if den.abs() < 1e-300 { 0.0 } else { (m * sxy - sx * sy) / den };
    let b = (sy - a * sx) / m;
    let sse = x.iter().zip(y).map(|(xi, yi)| (yi - a * xi - b).powi(2)).sum();
    (a, b, sse)
}

/// Fits `y = a * n^q + b` by scanning `q` and refining the best bracket.
pub fn lifetime_fit(ns: &[usize], values: &[f64]) -> Result<LifetimeFit, Error> {
    if ns.len() != values.len() || ns.len() < 4 {
        return Err(Error::DegenerateFit(format!("need at least 4 points, got {}", ns.len())));
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    if values.iter().all(|v| (v - mean).abs() <= 1e-12 * mean.abs().max(1.0)) {
        return Err(Error::DegenerateFit("constant series".into()));
    }
    let nf: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let sse_at = |q: f64| {
        let x: Vec<f64> = nf.iter().map(|n| n.powf(q)).collect();
        linear(&x, values).2
    };
    let (lo, hi, step) = (0.01, 2.0, 1e-3);
    let mut best = lo;
    let mut best_sse = f64::INFINITY;
    let mut q = lo;
    while q <= hi + 1e-12 {
        let s = sse_at(q);
        if s < best_sse {
            best_sse = s;
            best = q;
        }
        q += step;
    }
    // Golden-section refinement inside the neighbouring grid cells.
    let (mut a, mut b) = ((best - step).max(lo), (best + step).min(hi));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..80 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if sse_at(c) < sse_at(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let q = (a + b) / 2.0;
    let x: Vec<f64> = nf.iter().map(|n| n.powf(q)).collect();
    let (ca, cb, sse) = linear(&x, values);
    let xs: Vec<f64> = nf.iter().map(|n| n.sqrt()).collect();
    let (k, k0, _) = linear(&xs, values);
    Ok(LifetimeFit { exponent: q, a: ca, b: cb, sse, sqrt_coeff: k, sqrt_offset: k0 })
}
