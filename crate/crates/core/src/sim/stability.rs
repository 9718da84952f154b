use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{run, SimConfig, SimResult};
use crate::error::Error;
use crate::region::{outer_bound, RatePair};

/// `l_i (1 - eps) < d_i` for both users; a zero rate needs nothing delivered.
pub fn meets_rate_test(lambda: RatePair, delivered: RatePair, eps: f64) -> bool {
    (0..2).all(|i| {
        let l = lambda.get(i);
        l == 0.0 || l * (1.0 - eps) < delivered.get(i)
    })
}

/// Stability against the realised arrival rate `arrivals / n`, so that
/// Poisson fluctuations of the offered load do not decide the verdict.
pub fn is_stable(config: &SimConfig, result: &SimResult) -> bool {
    let n = result.n as f64;
    let offered = RatePair::new(result.users[0].arrivals as f64 / n, result.users[1].arrivals as f64 / n);
    meets_rate_test(offered, result.delivered_rates(), config.eps)
}

/// Stability against the nominal arrival rates of the configuration.
pub fn is_stable_nominal(config: &SimConfig, result: &SimResult) -> bool {
    meets_rate_test(config.rates, result.delivered_rates(), config.eps)
}

/// Majority verdict over `seeds` runs of the same configuration.
pub fn is_stable_majority(config: &SimConfig, seeds: &[u64]) -> Result<(bool, Vec<SimResult>), Error> {
    let results: Result<Vec<SimResult>, Error> = seeds.iter().map(|&s| run(&config.clone().with_seed(s))).collect();
    let results = results?;
    let votes = results.iter().filter(|r| is_stable(config, r)).count();
    Ok((2 * votes > results.len(), results))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub l1: (f64, f64),
    pub l2: (f64, f64),
    pub step: f64,
}

impl GridSpec {
    /// Grid from `step` up to the individual caps.
    pub fn up_to_caps(profile: &crate::channel::ErasureProfile, step: f64) -> Self {
        let b = outer_bound(profile);
        GridSpec { l1: (step, b.caps[0]), l2: (step, b.caps[1]), step }
    }

    fn axis(range: (f64, f64), step: f64) -> Vec<f64> {
        let k0 = (range.0 / step - 1e-9).ceil() as i64;
        let k1 = (range.1 / step + 1e-9).floor() as i64;
        (k0..=k1).map(|k| round(k as f64 * step)).collect()
    }

    pub fn points(&self) -> Vec<RatePair> {
        let a = Self::axis(self.l1, self.step);
        let b = Self::axis(self.l2, self.step);
        a.iter().flat_map(|&x| b.iter().map(move |&y| RatePair::new(x, y))).collect()
    }
}

fn round(x: f64) -> f64 {
    (x * 1e9).round() / 1e9
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub rates: RatePair,
    /// Mean delivered rates over the seeds.
    pub delivered: RatePair,
    pub stable: bool,
    pub votes: usize,
    pub runs: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    /// Largest stable `l2` per `l1` row, `None` when no point in the row is stable.
    pub frontier: Vec<(f64, Option<f64>)>,
    /// Rows where a stable point sits above an unstable one.
    pub non_monotone_rows: Vec<f64>,
}

fn pool(workers: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(workers).build().expect("thread pool")
}

fn evaluate(base: &SimConfig, rates: RatePair, seeds: &[u64]) -> Result<SweepPoint, Error> {
    let cfg = SimConfig { rates, ..base.clone() };
    let (stable, results) = is_stable_majority(&cfg, seeds)?;
    let k = results.len() as f64;
    let delivered = RatePair::new(
        results.iter().map(|r| r.users[0].delivered_rate).sum::<f64>() / k,
        results.iter().map(|r| r.users[1].delivered_rate).sum::<f64>() / k,
    );
    let votes = results.iter().filter(|r| is_stable(&cfg, r)).count();
    Ok(SweepPoint { rates, delivered, stable, votes, runs: results.len() })
}

/// Evaluates every grid point; `workers = 0` uses all cores.
pub fn sweep(base: &SimConfig, grid: &GridSpec, seeds: &[u64], workers: usize) -> Result<SweepResult, Error> {
    let pts = grid.points();
    let points: Result<Vec<SweepPoint>, Error> =
        pool(workers).install(|| pts.par_iter().map(|&p| evaluate(base, p, seeds)).collect());
    let points = points?;
    let mut rows: Vec<f64> = points.iter().map(|p| p.rates.l1).collect();
    rows.dedup();
    let mut frontier = Vec::new();
    let mut non_monotone_rows = Vec::new();
    for &l1 in &rows {
        let row: Vec<&SweepPoint> = points.iter().filter(|p| p.rates.l1 == l1).collect();
        let best = row
            .iter()
            .filter(|p| p.stable)
            .map(|p| p.rates.l2)
            .fold(None, |m: Option<f64>, x| Some(m.map_or(x, |m| m.max(x))));
        let first_bad = row.iter().filter(|p| !p.stable).map(|p| p.rates.l2).fold(f64::INFINITY, f64::min);
        if best.is_some_and(|b| b > first_bad) {
            non_monotone_rows.push(l1);
        }
        frontier.push((l1, best));
    }
    Ok(SweepResult { points, frontier, non_monotone_rows })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrontierRow {
    pub l1: f64,
    /// Largest `l2` the outer bound allows at this `l1`.
    pub bound_l2: f64,
    /// Largest stable grid point found scanning down from the bound.
    pub frontier_l2: Option<f64>,
    /// Verdict of the first grid point above the bound, if inside the unit box.
    pub above_bound_stable: Option<bool>,
}

/// Per `l1` grid row, scans `l2` downward from the bound until a stable point
/// appears (at most `max_steps` points).
pub fn frontier_scan(
    base: &SimConfig,
    step: f64,
    seeds: &[u64],
    workers: usize,
    max_steps: usize,
) -> Result<Vec<FrontierRow>, Error> {
    let bound = outer_bound(&base.profile);
    let rows = GridSpec::axis((step, bound.caps[0]), step);
    let out: Result<Vec<FrontierRow>, Error> = pool(workers).install(|| {
        rows.par_iter()
            .map(|&l1| {
                let bound_l2 = bound.max_l2_at(l1).unwrap_or(0.0);
                let top = ((bound_l2 / step) + 1e-9).floor() as i64;
                let mut frontier_l2 = None;
                for k in 0..max_steps as i64 {
                    let j = top - k;
                    if j < 1 {
                        break;
                    }
                    let l2 = round(j as f64 * step);
                    if evaluate(base, RatePair::new(l1, l2), seeds)?.stable {
                        frontier_l2 = Some(l2);
                        break;
                    }
                }
                let above = round((top + 1) as f64 * step);
                let above_bound_stable =
                    if above <= 1.0 { Some(evaluate(base, RatePair::new(l1, above), seeds)?.stable) } else { None };
                Ok(FrontierRow { l1, bound_l2, frontier_l2, above_bound_stable })
            })
            .collect()
    });
    out
}

/// Largest scale `s` such that `s * target` is stable, by bisection on
/// `[lo, hi]` down to `resolution`.
pub fn diagonal_frontier(
    base: &SimConfig,
    target: RatePair,
    seeds: &[u64],
    lo: f64,
    hi: f64,
    resolution: f64,
) -> Result<f64, Error> {
    let test = |s: f64| -> Result<bool, Error> {
        let cfg = SimConfig { rates: RatePair::new(target.l1 * s, target.l2 * s), ..base.clone() };
        Ok(is_stable_majority(&cfg, seeds)?.0)
    };
    let (mut lo, mut hi) = (lo, hi);
    while hi - lo > resolution {
        let mid = (lo + hi) / 2.0;
        if test(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}
