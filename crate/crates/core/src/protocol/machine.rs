use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::bank::{apply_combine, priority_select, xor_scan, Bit, QueueBank};
use super::engine::{Action, ControlTable, Move};
use super::flexible::flexible_lookup;
use super::policy::{draw_p, Policy};
use super::regime::Regime;
use super::QueueKind;
use crate::channel::{sn_of, source_id, ChannelState, Composition, ErasureProfile, SituationNumber, SourceId};
use crate::region::MixProbabilities;
use crate::rng::{stream, Stream};

/// Realisation of the `(Special, Special)` flexible destination.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpecialPolicy {
    /// Alternate between `(CommonInterest, Final)` and `(Final, CommonInterest)`.
    Alternate,
    /// Store both bits in Special.
    Pair,
    /// Store both bits in Special and split the pair the alternate way once a
    /// transmitter would send from Special.
    Lazy,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub profile: ErasureProfile,
    pub regime: Regime,
    pub mix: MixProbabilities,
    pub update_interval: usize,
    pub special: SpecialPolicy,
    /// Common seed of the policy stream.
    pub seed: u64,
}

#[derive(Clone, Debug)]
struct InFlight {
    origin: [QueueKind; 2],
    comps: [Option<Composition>; 2],
    policy: Policy,
}

/// Per source bit XOR bookkeeping, indexed by per-owner sequence number.
#[derive(Clone, Debug, Default, PartialEq)]
pub(crate) struct XorStats {
    pub ops: [Vec<u16>; 2],
    pub max_size: [Vec<u32>; 2],
}

/// Queue state of both transmitters, as every node sees it.
#[derive(Clone, Debug)]
pub struct Protocol {
    cfg: ProtocolConfig,
    table: Arc<ControlTable>,
    banks: [QueueBank; 2],
    policy_rng: ChaCha8Rng,
    toggle: bool,
    next_seq: [u32; 2],
    in_flight: Option<InFlight>,
    pub(crate) stats: XorStats,
    final_sources: [usize; 2],
    flexible_slots: usize,
    combines: usize,
    origins: [[usize; 6]; 6],
    clock: usize,
}

/// Destination of an origin pair for a realised SN and policy value.
pub fn destination(
    table: &ControlTable,
    origin: [QueueKind; 2],
    sn: SituationNumber,
    p: Policy,
    profile: &ErasureProfile,
) -> Move {
    match table.get(origin, sn) {
        Action::Fixed(m) => m,
        Action::Flexible(case) => flexible_lookup(case, p, table.regime, profile),
    }
}

/// Makes pending arrivals eligible when `t` is an update slot. Returns the
/// number released.
pub fn apply_update(bank: &mut QueueBank, t: usize, interval: usize) -> usize {
    if interval == 0 || t.is_multiple_of(interval) {
        bank.release_pending()
    } else {
        0
    }
}

/// Comparable view of the live queues.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Snapshot {
    pub queues: [[Vec<Composition>; 5]; 2],
    pub archived: [usize; 2],
}

impl Protocol {
    pub fn new(cfg: ProtocolConfig, table: Arc<ControlTable>) -> Self {
        let mut policy_rng = stream(cfg.seed, Stream::Policy);
        let toggle = policy_rng.random::<bool>();
        Protocol {
            cfg,
            table,
            banks: [QueueBank::new(0), QueueBank::new(1)],
            policy_rng,
            toggle,
            next_seq: [0, 0],
            in_flight: None,
            stats: XorStats::default(),
            final_sources: [0, 0],
            flexible_slots: 0,
            combines: 0,
            origins: [[0; 6]; 6],
            clock: 0,
        }
    }

    pub fn config(&self) -> &ProtocolConfig {
        &self.cfg
    }

    pub fn banks(&self) -> &[QueueBank; 2] {
        &self.banks
    }

    pub fn table(&self) -> &ControlTable {
        &self.table
    }

    /// Source bits of each transmitter that reached Final.
    pub fn final_sources(&self) -> [usize; 2] {
        self.final_sources
    }

    /// XOR combines applied so far.
    pub fn combines(&self) -> usize {
        self.combines
    }

    /// Slots whose move resolved through a flexible case.
    pub fn flexible_slots(&self) -> usize {
        self.flexible_slots
    }

    /// Slots spent on each origin pair, indexed by queue kind.
    pub fn origin_histogram(&self) -> &[[usize; 6]; 6] {
        &self.origins
    }

    pub fn arrived(&self, owner: usize) -> u32 {
        self.next_seq[owner]
    }

    fn new_bit(&mut self, owner: usize, slot: usize) -> Bit {
        let seq = self.next_seq[owner];
        self.next_seq[owner] += 1;
        self.stats.ops[owner].push(0);
        self.stats.max_size[owner].push(1);
        Bit::raw(source_id(owner, seq), owner, slot)
    }

    /// New arrivals wait for the next update.
    pub fn arrive(&mut self, owner: usize, count: usize, slot: usize) {
        for _ in 0..count {
            let b = self.new_bit(owner, slot);
            self.banks[owner].add_pending(b);
        }
    }

    /// Runs the update if `slot` is an update slot; returns released counts.
    pub fn update(&mut self, slot: usize) -> [usize; 2] {
        let l = self.cfg.update_interval;
        [0, 1].map(|o| apply_update(&mut self.banks[o], slot, l))
    }

    /// Replica side of the update: creates announced bits directly in Initial.
    pub fn announce(&mut self, counts: [usize; 2], slot: usize) {
        for (owner, &n) in counts.iter().enumerate() {
            for _ in 0..n {
                let b = self.new_bit(owner, slot);
                self.banks[owner].push(QueueKind::Initial, b, slot);
            }
        }
    }

    /// Moves last slot's transmitted bits using its channel state.
    pub fn apply_feedback(&mut self, state: ChannelState, slot: usize) {
        let Some(f) = self.in_flight.take() else { return };
        let sn = sn_of(state);
        let mut mv = destination(&self.table, f.origin, sn, f.policy, &self.cfg.profile);
        if matches!(self.table.get(f.origin, sn), Action::Flexible(_)) {
            self.flexible_slots += 1;
            if mv.dest == [QueueKind::Special; 2] && self.cfg.special == SpecialPolicy::Alternate {
                mv.dest = self.split();
            }
        }
        for tx in 0..2 {
            let origin = f.origin[tx];
            if origin == QueueKind::Final || mv.dest[tx] == origin {
                continue;
            }
            let bit = self.banks[tx].pop(origin).expect("transmitted bit still at head");
            debug_assert_eq!(Some(&bit.composition), f.comps[tx].as_ref());
            self.place(tx, mv.dest[tx], bit, slot);
        }
        if let Some(kind) = mv.partner {
            if kind != QueueKind::Special {
                let ptx = if f.origin[0] == QueueKind::Special { 1 } else { 0 };
                if let Some(bit) = self.banks[ptx].pop(QueueKind::Special) {
                    self.place(ptx, kind, bit, slot);
                }
            }
        }
        debug_assert_eq!(self.banks[0].len(QueueKind::Special), self.banks[1].len(QueueKind::Special));
    }

    /// Next destination pair for a split Special pair.
    fn split(&mut self) -> [QueueKind; 2] {
        let d = if self.toggle {
            [QueueKind::CommonInterest, QueueKind::Final]
        } else {
            [QueueKind::Final, QueueKind::CommonInterest]
        };
        self.toggle = !self.toggle;
        d
    }

    /// Lazy policy: splits head pairs while a transmitter would send Special.
    fn split_before_send(&mut self) {
        while (0..2).any(|o| priority_select(&self.banks[o]) == Some(QueueKind::Special)) {
            let d = self.split();
            for (tx, kind) in d.into_iter().enumerate() {
                let bit = self.banks[tx].pop(QueueKind::Special).expect("Special queues stay aligned");
                self.place(tx, kind, bit, self.clock);
            }
        }
    }

    fn place(&mut self, tx: usize, kind: QueueKind, bit: Bit, slot: usize) {
        if kind == QueueKind::Final {
            self.final_sources[tx] += bit.composition.len();
        }
        self.banks[tx].push(kind, bit, slot);
    }

    /// Applies this slot's XOR combines; returns how many fired.
    pub fn xor_step(&mut self, slot: usize) -> usize {
        self.clock = slot;
        let acts = xor_scan(&self.banks);
        let mut fired = 0;
        for a in acts.into_iter().flatten() {
            let c = apply_combine(&mut self.banks[a.owner], a, slot);
            let size = c.composition.len() as u32;
            for &id in c.composition.ids() {
                let seq = (id >> 1) as usize;
                self.stats.ops[a.owner][seq] += 1;
                let m = &mut self.stats.max_size[a.owner][seq];
                *m = (*m).max(size);
            }
            fired += 1;
        }
        self.combines += fired;
        fired
    }

    /// Picks each transmitter's head by priority and draws this slot's policy
    /// value. `None` marks a silent transmitter.
    pub fn transmit(&mut self) -> [Option<Composition>; 2] {
        let policy = draw_p(&self.cfg.mix, &mut self.policy_rng);
        if self.cfg.special == SpecialPolicy::Lazy {
            self.split_before_send();
        }
        let origin = [0, 1].map(|o| priority_select(&self.banks[o]).unwrap_or(QueueKind::Final));
        let comps = [0, 1].map(|o| {
            (origin[o] != QueueKind::Final).then(|| self.banks[o].head(origin[o]).unwrap().composition.clone())
        });
        self.origins[origin[0].index()][origin[1].index()] += 1;
        if origin != [QueueKind::Final; 2] {
            self.in_flight = Some(InFlight { origin, comps: comps.clone(), policy });
        }
        comps
    }

    pub fn snapshot(&self) -> Snapshot {
        let q = |o: usize| {
            let b = &self.banks[o];
            [
                QueueKind::Initial,
                QueueKind::CommonInterest,
                QueueKind::SideAtUnintended,
                QueueKind::SideAtIntended,
                QueueKind::Special,
            ]
            .map(|k| b.queue(k).iter().map(|x| x.composition.clone()).collect())
        };
        Snapshot { queues: [q(0), q(1)], archived: [self.banks[0].archive().len(), self.banks[1].archive().len()] }
    }

    /// Compares live queue contents with another instance without allocating.
    pub fn same_state(&self, other: &Protocol) -> Result<(), String> {
        for o in 0..2 {
            for k in QueueKind::ALL {
                if k == QueueKind::Final {
                    if self.banks[o].archive().len() != other.banks[o].archive().len() {
                        return Err(format!("{} sizes differ", k.label(o)));
                    }
                    continue;
                }
                let (a, b) = (self.banks[o].queue(k), other.banks[o].queue(k));
                if a.len() != b.len() || a.iter().zip(b).any(|(x, y)| x.composition != y.composition) {
                    return Err(format!("{} differs", k.label(o)));
                }
            }
        }
        Ok(())
    }

    /// Compares Final archives entry by entry.
    pub fn same_archive(&self, other: &Protocol) -> Result<(), String> {
        for o in 0..2 {
            let (a, b) = (self.banks[o].archive(), other.banks[o].archive());
            if a.len() != b.len() || a.iter().zip(b).any(|(x, y)| x.composition != y.composition) {
                return Err(format!("{} differs", QueueKind::Final.label(o)));
            }
        }
        Ok(())
    }

    /// Every arrived source id sits in exactly one pending, live or archived bit.
    pub fn check_conservation(&self) -> Result<(), String> {
        for o in 0..2 {
            let n = self.next_seq[o] as usize;
            let mut seen = vec![0u8; n];
            let bank = &self.banks[o];
            let mut mark = |ids: &[SourceId]| -> Result<(), String> {
                for &id in ids {
                    if crate::channel::owner_of(id) != o {
                        return Err(format!("foreign id {id} in Tx{}", o + 1));
                    }
                    let s = (id >> 1) as usize;
                    if s >= n {
                        return Err(format!("unknown id {id}"));
                    }
                    seen[s] += 1;
                }
                Ok(())
            };
            for b in bank.pending() {
                mark(b.composition.ids())?;
            }
            for (_, b) in bank.live() {
                mark(b.composition.ids())?;
            }
            for b in bank.archive() {
                mark(b.composition.ids())?;
            }
            if let Some(s) = seen.iter().position(|&c| c != 1) {
                return Err(format!("source {} of Tx{} appears {} times", source_id(o, s as u32), o + 1, seen[s]));
            }
        }
        Ok(())
    }

    /// True when nothing is queued, pending or in flight.
    pub fn drained(&self) -> bool {
        self.banks.iter().all(|b| b.is_idle() && b.pending().is_empty())
    }
}
