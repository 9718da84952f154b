use std::collections::{BTreeSet, HashMap};

use crate::channel::{sym_diff, Composition, Observation, Payload, SourceId};

/// Received equations of one receiver, kept in fully reduced row-echelon
/// form over GF(2).
#[derive(Clone, Debug, Default)]
pub struct EquationLog {
    pub receiver: usize,
    recorded: Vec<(usize, Composition)>,
    rows: Vec<Vec<SourceId>>,
    pivot_row: HashMap<SourceId, usize>,
    /// Column -> rows that may contain it. Entries go stale and are checked on use.
    occurs: HashMap<SourceId, Vec<usize>>,
    decoded: Vec<SourceId>,
    keep_rows: bool,
    received: usize,
}

impl EquationLog {
    pub fn new(receiver: usize) -> Self {
        EquationLog { receiver, keep_rows: true, ..Default::default() }
    }

    /// Skips storing the raw rows; decodability is unaffected.
    pub fn without_history(receiver: usize) -> Self {
        EquationLog { receiver, keep_rows: false, ..Default::default() }
    }

    /// Raw recorded rows with their slots.
    pub fn recorded(&self) -> &[(usize, Composition)] {
        &self.recorded
    }

    /// Equations inserted so far, independent or not.
    pub fn received(&self) -> usize {
        self.received
    }

    pub fn rank(&self) -> usize {
        self.pivot_row.len()
    }

    /// Appends an observation; returns the source ids that became decodable.
    pub fn record(&mut self, slot: usize, obs: &Observation) -> Vec<SourceId> {
        debug_assert_eq!(obs.receiver, self.receiver);
        match &obs.payload {
            Payload::Nothing => Vec::new(),
            Payload::Sum(c) => self.insert(slot, c),
        }
    }

    /// Adds one equation directly.
    pub fn insert(&mut self, slot: usize, c: &Composition) -> Vec<SourceId> {
        self.received += 1;
        if self.keep_rows {
            self.recorded.push((slot, c.clone()));
        }
        let mut r: Vec<SourceId> = c.ids().to_vec();
        for &col in c.ids() {
            if let Some(&pr) = self.pivot_row.get(&col) {
                r = sym_diff(&r, &self.rows[pr]);
            }
        }
        if r.is_empty() {
            return Vec::new();
        }
        let pivot = *r.iter().min_by_key(|c| (self.occurs.get(c).map_or(0, |v| v.len()), **c)).expect("non-empty row");
        let new_idx = self.rows.len();
        let mut fresh = Vec::new();

        let mut hits: Vec<usize> = self.occurs.remove(&pivot).unwrap_or_default();
        hits.sort_unstable();
        hits.dedup();
        for k in hits {
            if self.rows[k].binary_search(&pivot).is_err() {
                continue;
            }
            let before = std::mem::take(&mut self.rows[k]);
            let after = sym_diff(&before, &r);
            for &col in &after {
                if col != pivot && before.binary_search(&col).is_err() {
                    self.occurs.entry(col).or_default().push(k);
                }
            }
            if after.len() == 1 {
                fresh.push(after[0]);
            }
            self.rows[k] = after;
        }
        for &col in &r {
            self.occurs.entry(col).or_default().push(new_idx);
        }
        if r.len() == 1 {
            fresh.push(r[0]);
        }
        self.pivot_row.insert(pivot, new_idx);
        self.rows.push(r);
        self.decoded.extend_from_slice(&fresh);
        fresh
    }

    pub fn is_decodable(&self, id: SourceId) -> bool {
        self.pivot_row.get(&id).is_some_and(|&r| self.rows[r].len() == 1)
    }

    /// Decoded ids in the order they became decodable.
    pub fn decoded(&self) -> &[SourceId] {
        &self.decoded
    }

    pub fn decodable_set(&self) -> BTreeSet<SourceId> {
        self.decoded.iter().copied().collect()
    }
}

/// Exhaustive decodability over all row subsets. Intended for small logs.
pub fn brute_force_decodable(rows: &[Composition]) -> BTreeSet<SourceId> {
    assert!(rows.len() <= 20, "brute force limited to 20 rows");
    let mut out = BTreeSet::new();
    for mask in 1u32..(1 << rows.len()) {
        let mut acc = Composition::empty();
        for (i, r) in rows.iter().enumerate() {
            if mask >> i & 1 == 1 {
                acc = acc.xor(r);
            }
        }
        if acc.len() == 1 {
            out.insert(acc.ids()[0]);
        }
    }
    out
}
