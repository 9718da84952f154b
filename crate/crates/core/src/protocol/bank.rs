use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::QueueKind;
use crate::channel::{Composition, SourceId};

/// A queued payload: a raw source bit or a GF(2) combination of them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bit {
    /// Smallest constituent id.
    pub id: SourceId,
    pub owner: usize,
    /// Latest arrival slot among the constituents.
    pub arrival_slot: usize,
    pub composition: Composition,
    pub delivered_slot: Option<usize>,
}

impl Bit {
    pub fn raw(id: SourceId, owner: usize, arrival_slot: usize) -> Self {
        Bit { id, owner, arrival_slot, composition: Composition::single(id), delivered_slot: None }
    }

    pub fn combine(&self, other: &Bit) -> Bit {
        debug_assert_eq!(self.owner, other.owner);
        let composition = self.composition.xor(&other.composition);
        assert!(!composition.is_empty(), "combined bit cancelled to zero");
        Bit {
            id: composition.ids()[0],
            owner: self.owner,
            arrival_slot: self.arrival_slot.max(other.arrival_slot),
            composition,
            delivered_slot: None,
        }
    }
}

/// Virtual queues of one transmitter.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueueBank {
    pub owner: usize,
    queues: [VecDeque<Bit>; 5],
    archive: Vec<Bit>,
    /// Arrived since the last update; not yet transmit-eligible.
    pending: Vec<Bit>,
}

impl QueueBank {
    pub fn new(owner: usize) -> Self {
        QueueBank { owner, queues: Default::default(), archive: Vec::new(), pending: Vec::new() }
    }

    /// Live queue contents. Panics for `Final`; use [`QueueBank::archive`].
    pub fn queue(&self, kind: QueueKind) -> &VecDeque<Bit> {
        assert!(kind != QueueKind::Final, "Final is an archive, not a FIFO");
        &self.queues[kind.index()]
    }

    pub fn archive(&self) -> &[Bit] {
        &self.archive
    }

    pub fn pending(&self) -> &[Bit] {
        &self.pending
    }

    pub fn len(&self, kind: QueueKind) -> usize {
        if kind == QueueKind::Final {
            self.archive.len()
        } else {
            self.queues[kind.index()].len()
        }
    }

    pub fn head(&self, kind: QueueKind) -> Option<&Bit> {
        self.queue(kind).front()
    }

    pub fn is_idle(&self) -> bool {
        self.queues.iter().all(|q| q.is_empty())
    }

    /// Bits in live queues, excluding pending arrivals.
    pub fn live(&self) -> impl Iterator<Item = (QueueKind, &Bit)> {
        self.queues.iter().enumerate().flat_map(|(k, q)| q.iter().map(move |b| (QueueKind::from_index(k), b)))
    }

    pub fn live_count(&self) -> usize {
        self.queues.iter().map(|q| q.len()).sum()
    }

    pub(crate) fn add_pending(&mut self, bit: Bit) {
        self.pending.push(bit);
    }

    /// Moves pending arrivals into Initial and returns how many moved.
    pub(crate) fn release_pending(&mut self) -> usize {
        let n = self.pending.len();
        self.queues[QueueKind::Initial.index()].extend(self.pending.drain(..));
        n
    }

    pub(crate) fn push(&mut self, kind: QueueKind, mut bit: Bit, slot: usize) {
        if kind == QueueKind::Final {
            bit.delivered_slot = Some(slot);
            self.archive.push(bit);
        } else {
            self.queues[kind.index()].push_back(bit);
        }
    }

    pub(crate) fn pop(&mut self, kind: QueueKind) -> Option<Bit> {
        assert!(kind != QueueKind::Final, "bits never leave Final");
        self.queues[kind.index()].pop_front()
    }
}

/// Highest-priority non-empty queue: CommonInterest, Initial,
/// SideAtUnintended, SideAtIntended, Special.
pub fn priority_select(bank: &QueueBank) -> Option<QueueKind> {
    [
        QueueKind::CommonInterest,
        QueueKind::Initial,
        QueueKind::SideAtUnintended,
        QueueKind::SideAtIntended,
        QueueKind::Special,
    ]
    .into_iter()
    .find(|&k| !bank.queue(k).is_empty())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum XorModel {
    /// Special with SideAtUnintended; fires on both transmitters together.
    SpecialUnintended,
    /// Special with SideAtIntended; fires on both transmitters together.
    SpecialIntended,
    /// SideAtUnintended with SideAtIntended; per transmitter.
    SideSide,
}

impl XorModel {
    pub fn sources(self) -> (QueueKind, QueueKind) {
        match self {
            XorModel::SpecialUnintended => (QueueKind::Special, QueueKind::SideAtUnintended),
            XorModel::SpecialIntended => (QueueKind::Special, QueueKind::SideAtIntended),
            XorModel::SideSide => (QueueKind::SideAtUnintended, QueueKind::SideAtIntended),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CombineAction {
    pub owner: usize,
    pub model: XorModel,
}

/// Combining opportunities for this slot, at most one per transmitter.
///
/// Special bits pair across transmitters, so the two Special models only fire
/// when both transmitters can apply the same model at once.
pub fn xor_scan(banks: &[QueueBank; 2]) -> [Option<CombineAction>; 2] {
    let has = |o: usize, k: QueueKind| !banks[o].queue(k).is_empty();
    for model in [XorModel::SpecialUnintended, XorModel::SpecialIntended] {
        let (p, q) = model.sources();
        if (0..2).all(|o| has(o, p) && has(o, q)) {
            return [Some(CombineAction { owner: 0, model }), Some(CombineAction { owner: 1, model })];
        }
    }
    let side = |o: usize| {
        (has(o, QueueKind::SideAtUnintended) && has(o, QueueKind::SideAtIntended))
            .then_some(CombineAction { owner: o, model: XorModel::SideSide })
    };
    [side(0), side(1)]
}

/// Applies one combine; the result joins CommonInterest.
pub(crate) fn apply_combine(bank: &mut QueueBank, action: CombineAction, slot: usize) -> Bit {
    let (p, q) = action.model.sources();
    let a = bank.pop(p).expect("combine source present");
    let b = bank.pop(q).expect("combine source present");
    let c = a.combine(&b);
    bank.push(QueueKind::CommonInterest, c.clone(), slot);
    c
}
