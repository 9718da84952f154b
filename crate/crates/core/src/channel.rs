//! Binary intermittent interference channel.
//!
//! Payloads are symbolic: a transmitted symbol is a set of source-bit ids
//! combined under GF(2), so reception yields exact equations instead of bit
//! values.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Identifier of a source bit. The low bit encodes the owner (0 = Tx1).
pub type SourceId = u32;

/// Returns the owner index (0 or 1) of a source id.
pub fn owner_of(id: SourceId) -> usize {
    (id & 1) as usize
}

/// Builds a source id from an owner index and a per-owner sequence number.
pub fn source_id(owner: usize, seq: u32) -> SourceId {
    debug_assert!(owner < 2);
    seq * 2 + owner as u32
}

/// A GF(2) combination of source bits, kept as a sorted id set.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Composition(Vec<SourceId>);

impl Composition {
    pub fn empty() -> Self {
        Composition(Vec::new())
    }

    pub fn single(id: SourceId) -> Self {
        Composition(vec![id])
    }

    /// Builds from arbitrary ids; duplicates cancel in pairs.
    pub fn from_ids<I: IntoIterator<Item = SourceId>>(ids: I) -> Self {
        let mut v: Vec<SourceId> = ids.into_iter().collect();
        v.sort_unstable();
        let mut out = Vec::with_capacity(v.len());
        let mut i = 0;
        while i < v.len() {
            let mut j = i;
            while j < v.len() && v[j] == v[i] {
                j += 1;
            }
            if (j - i) % 2 == 1 {
                out.push(v[i]);
            }
            i = j;
        }
        Composition(out)
    }

    pub fn ids(&self) -> &[SourceId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, id: SourceId) -> bool {
        self.0.binary_search(&id).is_ok()
    }

    /// Symmetric difference.
    pub fn xor(&self, other: &Composition) -> Composition {
        Composition(sym_diff(&self.0, &other.0))
    }

    pub fn into_ids(self) -> Vec<SourceId> {
        self.0
    }
}

/// Symmetric difference of two sorted, duplicate-free slices.
pub(crate) fn sym_diff(a: &[SourceId], b: &[SourceId]) -> Vec<SourceId> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Erasure probabilities; `dij` is the erasure probability of Tx_i -> Rx_j.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErasureProfile {
    pub d11: f64,
    pub d12: f64,
    pub d21: f64,
    pub d22: f64,
}

impl ErasureProfile {
    pub fn new(d11: f64, d12: f64, d21: f64, d22: f64) -> Result<Self, Error> {
        let p = ErasureProfile { d11, d12, d21, d22 };
        p.validate()?;
        Ok(p)
    }

    pub fn homogeneous(d: f64) -> Result<Self, Error> {
        Self::new(d, d, d, d)
    }

    /// Direct links `d` and cross links `c`.
    pub fn symmetric(direct: f64, cross: f64) -> Result<Self, Error> {
        Self::new(direct, cross, cross, direct)
    }

    pub fn validate(&self) -> Result<(), Error> {
        for (name, v) in [("d11", self.d11), ("d12", self.d12), ("d21", self.d21), ("d22", self.d22)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidProfile(format!("{name}={v} outside [0, 1]")));
            }
        }
        Ok(())
    }

    /// Erasure probability of Tx_(from+1) -> Rx_(to+1), zero-based indices.
    pub fn erasure(&self, from: usize, to: usize) -> f64 {
        match (from, to) {
            (0, 0) => self.d11,
            (0, 1) => self.d12,
            (1, 0) => self.d21,
            (1, 1) => self.d22,
            _ => panic!("link index out of range"),
        }
    }

    /// Swaps user labels.
    pub fn transposed(&self) -> Self {
        ErasureProfile { d11: self.d22, d12: self.d21, d21: self.d12, d22: self.d11 }
    }
}

/// The four link indicators, ordered as `[s11, s21, s22, s12]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChannelState {
    pub s11: bool,
    pub s21: bool,
    pub s22: bool,
    pub s12: bool,
}

impl ChannelState {
    pub fn from_bits(bits: [u8; 4]) -> Result<Self, Error> {
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::InvalidState(bits));
        }
        Ok(ChannelState { s11: bits[0] == 1, s21: bits[1] == 1, s22: bits[2] == 1, s12: bits[3] == 1 })
    }

    pub fn bits(&self) -> [u8; 4] {
        [self.s11 as u8, self.s21 as u8, self.s22 as u8, self.s12 as u8]
    }

    /// Indicator of Tx_(from+1) -> Rx_(to+1), zero-based indices.
    pub fn link(&self, from: usize, to: usize) -> bool {
        match (from, to) {
            (0, 0) => self.s11,
            (0, 1) => self.s12,
            (1, 0) => self.s21,
            (1, 1) => self.s22,
            _ => panic!("link index out of range"),
        }
    }

    /// Swaps user labels.
    pub fn transposed(&self) -> Self {
        ChannelState { s11: self.s22, s21: self.s12, s22: self.s11, s12: self.s21 }
    }
}

/// Situation number in `1..=16`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SituationNumber(u8);

// Index k holds the state bits [s11, s21, s22, s12] of SN k+1.
const SN_TABLE: [[u8; 4]; 16] = [
    [1, 1, 1, 1],
    [1, 0, 1, 1],
    [1, 1, 1, 0],
    [1, 0, 1, 0],
    [1, 0, 0, 0],
    [1, 0, 0, 1],
    [1, 1, 0, 0],
    [1, 1, 0, 1],
    [0, 0, 1, 0],
    [0, 1, 1, 0],
    [0, 0, 1, 1],
    [0, 1, 1, 1],
    [0, 1, 0, 0],
    [0, 0, 0, 1],
    [0, 1, 0, 1],
    [0, 0, 0, 0],
];

impl SituationNumber {
    pub fn new(sn: u8) -> Result<Self, Error> {
        if (1..=16).contains(&sn) {
            Ok(SituationNumber(sn))
        } else {
            Err(Error::InvalidSituation(sn))
        }
    }

    pub fn get(&self) -> u8 {
        self.0
    }

    /// Zero-based index.
    pub fn index(&self) -> usize {
        self.0 as usize - 1
    }

    pub fn all() -> impl Iterator<Item = SituationNumber> {
        (1..=16).map(SituationNumber)
    }
}

pub fn sn_of(state: ChannelState) -> SituationNumber {
    let bits = state.bits();
    let k = SN_TABLE.iter().position(|row| *row == bits).expect("table covers all 16 states");
    SituationNumber(k as u8 + 1)
}

pub fn state_of(sn: SituationNumber) -> ChannelState {
    let b = SN_TABLE[sn.index()];
    ChannelState { s11: b[0] == 1, s21: b[1] == 1, s22: b[2] == 1, s12: b[3] == 1 }
}

/// Draws one slot of link indicators. Order of draws is fixed: s11, s21, s22, s12.
pub fn sample_state<R: Rng + ?Sized>(profile: &ErasureProfile, rng: &mut R) -> ChannelState {
    let mut on = |d: f64| rng.random::<f64>() >= d;
    let s11 = on(profile.d11);
    let s21 = on(profile.d21);
    let s22 = on(profile.d22);
    let s12 = on(profile.d12);
    ChannelState { s11, s21, s22, s12 }
}

/// What a receiver hears in one slot.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Payload {
    Nothing,
    Sum(Composition),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observation {
    /// Zero-based receiver index.
    pub receiver: usize,
    pub payload: Payload,
}

/// Computes both observations. `None` marks a silent transmitter.
///
/// The payload is `Nothing` when no on-link carries a non-silent input. A
/// `Sum` may be empty when two identical compositions cancel.
pub fn received(state: ChannelState, x1: Option<&Composition>, x2: Option<&Composition>) -> (Observation, Observation) {
    let obs = |rx: usize| {
        let a = if state.link(0, rx) { x1 } else { None };
        let b = if state.link(1, rx) { x2 } else { None };
        let payload = match (a, b) {
            (None, None) => Payload::Nothing,
            (Some(a), None) => Payload::Sum(a.clone()),
            (None, Some(b)) => Payload::Sum(b.clone()),
            (Some(a), Some(b)) => Payload::Sum(a.xor(b)),
        };
        Observation { receiver: rx, payload }
    };
    (obs(0), obs(1))
}
