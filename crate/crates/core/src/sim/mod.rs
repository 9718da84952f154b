//! End-to-end simulation, stability checks, sweeps and metrics.

mod config;
mod lifetime;
mod stability;

use std::sync::Arc;

use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

pub use config::{default_beta, parse_config, SimConfig, DEFAULT_UPDATE_INTERVAL};
pub use lifetime::{lifetime_fit, lifetime_series, LifetimeFit, LifetimePoint};
pub use stability::{
    diagonal_frontier, frontier_scan, is_stable, is_stable_majority, is_stable_nominal, sweep, FrontierRow, GridSpec,
    SweepPoint, SweepResult,
};

use crate::channel::{owner_of, received, sample_state, ChannelState};
use crate::error::Error;
use crate::protocol::{derive_control_table, regime_of, ControlTable, Protocol, ProtocolConfig, QueueKind, Regime};
use crate::receiver::{replica_close, replica_step, EquationLog, TrackerReplica, UpdateMessage};
use crate::region::{cornerpoints, mix_probabilities, outer_bound, MixProbabilities, RatePair};
use crate::rng::{stream, Stream};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UserMetrics {
    /// Source bits that arrived.
    pub arrivals: usize,
    /// Own source bits decodable at the intended receiver by slot n.
    pub delivered: usize,
    /// Source bits whose queue disposition reached Final.
    pub final_disposition: usize,
    /// `delivered / n`.
    pub delivered_rate: f64,
    pub mean_lifetime: f64,
    pub max_lifetime: usize,
    /// Index k counts delivered bits that took part in k XOR combinations.
    pub xor_histogram: Vec<usize>,
    /// Delivered bits that were part of a combination of more than 3 bits.
    pub deep_combined: usize,
    /// Queue occupancy at the end, in the order Initial, CommonInterest,
    /// SideAtUnintended, SideAtIntended, Special, pending.
    pub residual: [usize; 6],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub n: usize,
    pub regime: Regime,
    pub mix: MixProbabilities,
    pub users: [UserMetrics; 2],
    /// Tracker replica matched the transmitters at every slot.
    pub replica_consistent: bool,
    pub flexible_slots: usize,
    pub xor_combines: usize,
    /// Slots per origin pair `[Tx1 kind][Tx2 kind]`; `Final` means silent.
    pub origins: [[usize; 6]; 6],
    /// Non-empty receptions per receiver.
    pub rx_rows: [usize; 2],
    /// Rank of each receiver's equation set at the end.
    pub rx_rank: [usize; 2],
    /// Per-bit lifetimes, one list per user, in arrival order.
    #[serde(skip)]
    pub lifetimes: [Vec<u32>; 2],
}

impl SimResult {
    pub fn delivered_rates(&self) -> RatePair {
        RatePair::new(self.users[0].delivered_rate, self.users[1].delivered_rate)
    }

    /// Fraction of delivered bits (both users) that took part in an XOR.
    pub fn xor_fraction(&self) -> f64 {
        let (mut hit, mut total) = (0usize, 0usize);
        for u in &self.users {
            total += u.xor_histogram.iter().sum::<usize>();
            hit += u.xor_histogram.iter().skip(1).sum::<usize>();
        }
        if total == 0 {
            0.0
        } else {
            hit as f64 / total as f64
        }
    }

    /// Fraction of delivered bits that sat in a combination of more than 3 bits.
    pub fn deep_fraction(&self) -> f64 {
        let total: usize = self.users.iter().map(|u| u.delivered).sum();
        let deep: usize = self.users.iter().map(|u| u.deep_combined).sum();
        if total == 0 {
            0.0
        } else {
            deep as f64 / total as f64
        }
    }

    /// Mean lifetime over both users' delivered bits.
    pub fn mean_lifetime(&self) -> f64 {
        let total: usize = self.users.iter().map(|u| u.delivered).sum();
        if total == 0 {
            return 0.0;
        }
        self.users.iter().map(|u| u.mean_lifetime * u.delivered as f64).sum::<f64>() / total as f64
    }

    pub fn max_lifetime(&self) -> usize {
        self.users.iter().map(|u| u.max_lifetime).max().unwrap_or(0)
    }
}

/// Policy mix used for a rate pair. Points outside the bound use the mix of
/// their radial projection onto the boundary.
pub fn policy_mix(profile: &crate::channel::ErasureProfile, rates: RatePair) -> MixProbabilities {
    let bound = outer_bound(profile);
    let corners = cornerpoints(&bound);
    let mut p = rates;
    if !bound.contains(p) {
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..60 {
            let mid = (lo + hi) / 2.0;
            if bound.contains(RatePair::new(rates.l1 * mid, rates.l2 * mid)) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        p = RatePair::new(rates.l1 * lo, rates.l2 * lo);
    }
    mix_probabilities(&bound, p, &corners).unwrap_or(MixProbabilities::pure_c())
}

pub fn protocol_config(config: &SimConfig) -> Result<(ProtocolConfig, Arc<ControlTable>), Error> {
    let regime = regime_of(&config.profile)?;
    let pc = ProtocolConfig {
        profile: config.profile,
        regime,
        mix: policy_mix(&config.profile, config.rates),
        update_interval: config.update_interval,
        special: config.special,
        seed: config.seed,
    };
    Ok((pc, Arc::new(derive_control_table(regime))))
}

/// Final is absorbing: archived bits and Final sources never decrease.
fn check_absorbing(truth: &Protocol, last: &mut [usize; 4], slot: usize) -> Result<(), Error> {
    let f = truth.final_sources();
    let now = [f[0], f[1], truth.banks()[0].archive().len(), truth.banks()[1].archive().len()];
    if now.iter().zip(last.iter()).any(|(a, b)| a < b) {
        return Err(Error::Invariant(format!("slot {slot}: a bit left Final ({last:?} -> {now:?})")));
    }
    *last = now;
    Ok(())
}

/// Runs one simulation.
pub fn run(config: &SimConfig) -> Result<SimResult, Error> {
    config.validate()?;
    let (pcfg, table) = protocol_config(config)?;
    let n = config.n;
    let mut truth = Protocol::new(pcfg.clone(), table.clone());
    let mut replica = config.track_replica.then(|| TrackerReplica::new(pcfg.clone(), table.clone()));
    if let Some(f) = &config.corrupt_replica_seed {
        replica = Some(TrackerReplica::new(ProtocolConfig { seed: *f, ..pcfg.clone() }, table.clone()));
    }

    let mut channel_rng = stream(config.seed, Stream::Channel);
    let mut arrival_rng = [stream(config.seed, Stream::Arrivals1), stream(config.seed, Stream::Arrivals2)];
    let poisson =
        [config.rates.l1, config.rates.l2]
            .map(|l| if l > 0.0 { Some(Poisson::new(l).expect("rate > 0")) } else { None });

    let mut logs = [EquationLog::without_history(0), EquationLog::without_history(1)];
    let mut arrival_slot: [Vec<u32>; 2] = [Vec::new(), Vec::new()];
    let mut delivered_slot: [Vec<u32>; 2] = [Vec::new(), Vec::new()];
    let mut prev: Option<ChannelState> = None;
    let arrivals_end = n - config.beta;
    let mut absorbed = [0usize; 4];

    for t in 0..n {
        if let Some(s) = prev {
            truth.apply_feedback(s, t);
        }
        truth.xor_step(t);
        let released = truth.update(t);
        let update = (config.update_interval == 0 || t % config.update_interval == 0)
            .then_some(UpdateMessage { slot: t, counts: released });
        if t < arrivals_end {
            for o in 0..2 {
                if let Some(p) = &poisson[o] {
                    let k = p.sample(&mut arrival_rng[o]) as usize;
                    truth.arrive(o, k, t);
                    arrival_slot[o].extend(std::iter::repeat_n(t as u32, k));
                    delivered_slot[o].extend(std::iter::repeat_n(u32::MAX, k));
                }
            }
        }
        let tx = truth.transmit();
        if let Some(r) = replica.as_mut() {
            let expect = replica_step(r, t, prev, update);
            let v = if expect != tx {
                Err(Error::ReplicaDivergence { slot: t, detail: "transmitted bits differ".into() })
            } else {
                r.verify(&truth, t)
            };
            v?;
        }
        let s = sample_state(&config.profile, &mut channel_rng);
        let obs = received(s, tx[0].as_ref(), tx[1].as_ref());
        for (rx, o) in [obs.0, obs.1].iter().enumerate() {
            for id in logs[rx].record(t, o) {
                if owner_of(id) == rx {
                    delivered_slot[rx][(id >> 1) as usize] = t as u32;
                }
            }
        }
        if config.check_invariants {
            truth.check_conservation().map_err(Error::Invariant)?;
            check_absorbing(&truth, &mut absorbed, t)?;
        }
        prev = Some(s);
    }
    if let Some(s) = prev {
        truth.apply_feedback(s, n);
        if let Some(r) = replica.as_mut() {
            replica_close(r, n, s);
            r.verify(&truth, n)?;
            r.protocol().same_archive(&truth).map_err(|detail| Error::ReplicaDivergence { slot: n, detail })?;
        }
    }
    if config.check_invariants {
        truth.check_conservation().map_err(Error::Invariant)?;
        check_absorbing(&truth, &mut absorbed, n)?;
    }

    let mut lifetimes: [Vec<u32>; 2] = [Vec::new(), Vec::new()];
    let users = [0, 1].map(|o| {
        let mut hist = Vec::new();
        let mut deep = 0;
        let mut sum = 0u64;
        let mut max = 0usize;
        for seq in 0..arrival_slot[o].len() {
            let d = delivered_slot[o][seq];
            if d == u32::MAX {
                continue;
            }
            let life = d - arrival_slot[o][seq];
            lifetimes[o].push(life);
            sum += life as u64;
            max = max.max(life as usize);
            let ops = truth.stats.ops[o][seq] as usize;
            if hist.len() <= ops {
                hist.resize(ops + 1, 0);
            }
            hist[ops] += 1;
            if truth.stats.max_size[o][seq] > 3 {
                deep += 1;
            }
        }
        let delivered = lifetimes[o].len();
        let bank = &truth.banks()[o];
        let residual = [
            bank.len(QueueKind::Initial),
            bank.len(QueueKind::CommonInterest),
            bank.len(QueueKind::SideAtUnintended),
            bank.len(QueueKind::SideAtIntended),
            bank.len(QueueKind::Special),
            bank.pending().len(),
        ];
        UserMetrics {
            arrivals: arrival_slot[o].len(),
            delivered,
            final_disposition: truth.final_sources()[o],
            delivered_rate: delivered as f64 / n as f64,
            mean_lifetime: if delivered == 0 { 0.0 } else { sum as f64 / delivered as f64 },
            max_lifetime: max,
            xor_histogram: hist,
            deep_combined: deep,
            residual,
        }
    });
    let xor_combines = truth.combines();
    Ok(SimResult {
        n,
        regime: pcfg.regime,
        mix: pcfg.mix,
        users,
        replica_consistent: replica.is_some(),
        flexible_slots: truth.flexible_slots(),
        xor_combines,
        origins: *truth.origin_histogram(),
        rx_rows: [logs[0].received(), logs[1].received()],
        rx_rank: [logs[0].rank(), logs[1].rank()],
        lifetimes,
    })
}
