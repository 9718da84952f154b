//! Control-table derivation.
//!
//! Every queue kind is a contract on what each receiver knows and still
//! needs about a bit. A cell is solved on a local GF(2) model holding the two
//! transmitted bits plus, when only one transmitter sends from Special, the
//! untransmitted partner. A destination assignment is admissible when its
//! contract claims are backed by what the receivers actually hold and the
//! receivers' outstanding needs span the same space as before. Among
//! admissible assignments the engine prefers, in order: more bits in Final,
//! more bits left in queues that the XOR models draw from, fewer moves, and
//! Final for a bit its own receiver already holds cleanly.

use serde::{Deserialize, Serialize};

use super::flexible::{flexible_case_of, FlexibleCase};
use super::regime::Regime;
use super::QueueKind;
use crate::channel::{state_of, ChannelState, SituationNumber};

/// Destinations of both transmitted bits plus the partner of a lone Special
/// transmission. A silent transmitter keeps `Final` as its destination.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Move {
    pub dest: [QueueKind; 2],
    pub partner: Option<QueueKind>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Action {
    Fixed(Move),
    Flexible(FlexibleCase),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlTable {
    pub regime: Regime,
    /// Indexed by `6 * kind1 + kind2`, then by SN index.
    cells: Vec<[Action; 16]>,
}

impl ControlTable {
    pub fn get(&self, origin: [QueueKind; 2], sn: SituationNumber) -> Action {
        self.cells[origin[0].index() * 6 + origin[1].index()][sn.index()]
    }

    /// The 35 origin pairs with at least one active transmitter.
    pub fn origins() -> impl Iterator<Item = [QueueKind; 2]> {
        QueueKind::ALL
            .into_iter()
            .flat_map(|a| QueueKind::ALL.into_iter().map(move |b| [a, b]))
            .filter(|o| *o != [QueueKind::Final, QueueKind::Final])
    }

    pub fn row(&self, origin: [QueueKind; 2]) -> [Action; 16] {
        self.cells[origin[0].index() * 6 + origin[1].index()]
    }
}

/// Builds the 35 x 16 table. Panics if a cell has no admissible assignment.
pub fn derive_control_table(regime: Regime) -> ControlTable {
    let stay = Action::Fixed(Move { dest: [QueueKind::Final; 2], partner: None });
    let mut cells = vec![[stay; 16]; 36];
    for origin in ControlTable::origins() {
        for sn in SituationNumber::all() {
            let action = match flexible_case_of(origin, sn) {
                Some(case) => Action::Flexible(case),
                None => {
                    let cands = candidates(origin, sn);
                    assert!(!cands.is_empty(), "no admissible assignment for {origin:?} at SN {}", sn.get());
                    Action::Fixed(cands[0].mv)
                }
            };
            cells[origin[0].index() * 6 + origin[1].index()][sn.index()] = action;
        }
    }
    ControlTable { regime, cells }
}

/// An admissible assignment with its preference score (higher is better).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Candidate {
    pub mv: Move,
    /// Final count, XOR-source count, unchanged count, clean-Final count.
    pub score: [i32; 4],
    /// Sorted `(origin kind, partner flag, destination rank)` codes; smaller wins among
    /// equal scores. Invariant under swapping the users.
    tie: [u8; 3],
    /// Destination ranks, lead transmitter's variables first; larger wins.
    lead_tie: [u8; 3],
}

/// All admissible assignments of a cell, best first.
pub fn candidates(origin: [QueueKind; 2], sn: SituationNumber) -> Vec<Candidate> {
    let cell = Cell::new(origin, state_of(sn));
    let mut out = cell.solve();
    // Stable sort keeps enumeration order among full ties.
    out.sort_by(|a, b| b.score.cmp(&a.score).then(a.tie.cmp(&b.tie)).then(b.lead_tie.cmp(&a.lead_tie)));
    out
}

/// Candidates sharing the best score on the first three criteria.
pub fn top_tier(origin: [QueueKind; 2], sn: SituationNumber) -> Vec<Move> {
    let c = candidates(origin, sn);
    let Some(best) = c.first().map(|x| x.score) else { return Vec::new() };
    c.iter().filter(|x| x.score[..3] == best[..3]).map(|x| x.mv).collect()
}

/// Order in which destination kinds are tried; decides exact ties.
const TRY_ORDER: [QueueKind; 6] = [
    QueueKind::Final,
    QueueKind::SideAtUnintended,
    QueueKind::SideAtIntended,
    QueueKind::Special,
    QueueKind::CommonInterest,
    QueueKind::Initial,
];

#[derive(Clone, Copy, Debug)]
struct Var {
    owner: usize,
    kind: QueueKind,
    mask: u8,
}

/// Local model of one cell.
struct Cell {
    vars: Vec<Var>,
    /// Variable indices (Tx1 side first) of the transmitter whose bit sits in
    /// slot 0 / 1 of `Move::dest`, and of the partner.
    slots: [Option<usize>; 2],
    partner: Option<usize>,
    /// Special pair present before the move.
    pair: Option<(usize, usize)>,
    obs: [u8; 2],
    /// Transmitter listed first by the mirror-safe tie-break.
    lead: usize,
}

#[derive(Clone, Copy, Default)]
struct Span {
    rows: [u8; 8],
}

impl Span {
    fn of(vs: &[u8]) -> Span {
        let mut s = Span::default();
        for &v in vs {
            s.insert(v);
        }
        s
    }

    fn insert(&mut self, mut v: u8) -> bool {
        while v != 0 {
            let h = 7 - v.leading_zeros() as usize;
            if self.rows[h] == 0 {
                self.rows[h] = v;
                return true;
            }
            v ^= self.rows[h];
        }
        false
    }

    fn contains(&self, v: u8) -> bool {
        let mut s = *self;
        !s.insert(v)
    }

    fn rank(&self) -> usize {
        self.rows.iter().filter(|&&r| r != 0).count()
    }

    fn extended(&self, vs: &[u8]) -> Span {
        let mut s = *self;
        for &v in vs {
            s.insert(v);
        }
        s
    }
}

/// Knowledge and needs per receiver.
struct Contract {
    known: [Vec<u8>; 2],
    wants: [Vec<u8>; 2],
}

impl Cell {
    fn new(origin: [QueueKind; 2], state: ChannelState) -> Cell {
        let mut vars = Vec::new();
        let mut slots = [None, None];
        for tx in 0..2 {
            if origin[tx] != QueueKind::Final {
                slots[tx] = Some(vars.len());
                vars.push(Var { owner: tx, kind: origin[tx], mask: 1 << tx });
            }
        }
        let mut partner = None;
        let mut pair = None;
        let special = |tx: usize| origin[tx] == QueueKind::Special;
        if special(0) && special(1) {
            pair = Some((slots[0].unwrap(), slots[1].unwrap()));
        } else if let Some(tx) = (0..2).find(|&tx| special(tx)) {
            partner = Some(vars.len());
            vars.push(Var { owner: 1 - tx, kind: QueueKind::Special, mask: 4 });
            pair = Some((slots[tx].unwrap(), vars.len() - 1));
        }
        let mut obs = [0u8; 2];
        for (rx, o) in obs.iter_mut().enumerate() {
            for (tx, slot) in slots.iter().enumerate() {
                if let Some(v) = *slot {
                    if state.link(tx, rx) {
                        *o ^= vars[v].mask;
                    }
                }
            }
        }
        let out_links = |tx: usize| (0..2).filter(|&rx| state.link(tx, rx)).count();
        let lead = match out_links(0).cmp(&out_links(1)) {
            std::cmp::Ordering::Less => 1,
            std::cmp::Ordering::Greater => 0,
            std::cmp::Ordering::Equal => usize::from(!state.link(0, 0) && state.link(1, 1)),
        };
        Cell { vars, slots, partner, pair, obs, lead }
    }

    fn contract(&self, kinds: &[QueueKind], pair: Option<(usize, usize)>) -> Contract {
        let mut c = Contract { known: [Vec::new(), Vec::new()], wants: [Vec::new(), Vec::new()] };
        for (i, v) in self.vars.iter().enumerate() {
            let (own, other) = (v.owner, 1 - v.owner);
            match kinds[i] {
                QueueKind::Initial => c.wants[own].push(v.mask),
                QueueKind::CommonInterest => {
                    c.wants[own].push(v.mask);
                    c.wants[other].push(v.mask);
                }
                QueueKind::SideAtUnintended => {
                    c.wants[own].push(v.mask);
                    c.known[other].push(v.mask);
                }
                QueueKind::SideAtIntended => {
                    c.known[own].push(v.mask);
                    c.wants[other].push(v.mask);
                }
                QueueKind::Special | QueueKind::Final => {}
            }
        }
        if let Some((u, w)) = pair {
            let (mu, mw) = (self.vars[u].mask, self.vars[w].mask);
            for k in &mut c.known {
                k.push(mu ^ mw);
            }
            c.wants[self.vars[u].owner].push(mu);
            c.wants[self.vars[w].owner].push(mw);
        }
        c
    }

    /// Special pair after the move, or `Err` when the Special placements
    /// cannot form a valid pair.
    fn new_pair(&self, kinds: &[QueueKind]) -> Result<Option<(usize, usize)>, ()> {
        let specials: Vec<usize> = (0..kinds.len()).filter(|&i| kinds[i] == QueueKind::Special).collect();
        match self.pair {
            Some((u, w)) => match specials.as_slice() {
                [] => Ok(None),
                [a, b] if (*a, *b) == (u.min(w), u.max(w)) => Ok(Some((u, w))),
                _ => Err(()),
            },
            None => match (specials.as_slice(), self.slots) {
                ([], _) => Ok(None),
                ([a, b], [Some(x), Some(y)]) if (*a, *b) == (x, y) => Ok(Some((x, y))),
                _ => Err(()),
            },
        }
    }

    /// A bit is observed when it, or its Special partner, enters some
    /// received sum. Unobserved bits keep their queue.
    fn observed(&self, i: usize) -> bool {
        let seen = self.obs[0] | self.obs[1];
        let group = match self.pair {
            Some((u, w)) if i == u || i == w => self.vars[u].mask | self.vars[w].mask,
            _ => self.vars[i].mask,
        };
        seen & group != 0
    }

    fn solve(&self) -> Vec<Candidate> {
        let origin_kinds: Vec<QueueKind> = self.vars.iter().map(|v| v.kind).collect();
        let before = self.contract(&origin_kinds, self.pair);
        let known_after: [Span; 2] = [0, 1].map(|rx| {
            let mut s = Span::of(&before.known[rx]);
            s.insert(self.obs[rx]);
            s
        });
        let goal: [Span; 2] = [0, 1].map(|rx| known_after[rx].extended(&before.wants[rx]));

        let n = self.vars.len();
        let mut out = Vec::new();
        let mut idx = vec![0usize; n];
        loop {
            let kinds: Vec<QueueKind> = idx.iter().map(|&i| TRY_ORDER[i]).collect();
            if let Some(c) = self.evaluate(&kinds, &origin_kinds, &known_after, &goal) {
                out.push(c);
            }
            // Odometer over TRY_ORDER, first variable fastest.
            let mut k = 0;
            loop {
                if k == n {
                    return out;
                }
                idx[k] += 1;
                if idx[k] < TRY_ORDER.len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }

    fn evaluate(
        &self,
        kinds: &[QueueKind],
        origin_kinds: &[QueueKind],
        known_after: &[Span; 2],
        goal: &[Span; 2],
    ) -> Option<Candidate> {
        let pair = self.new_pair(kinds).ok()?;
        if (0..kinds.len()).any(|i| kinds[i] != origin_kinds[i] && !self.observed(i)) {
            return None;
        }
        let after = self.contract(kinds, pair);
        for rx in 0..2 {
            if after.known[rx].iter().any(|&v| !known_after[rx].contains(v)) {
                return None;
            }
            let reach = known_after[rx].extended(&after.wants[rx]);
            if reach.rank() != goal[rx].rank() || reach.extended(&goal[rx].rows).rank() != reach.rank() {
                return None;
            }
            if reach.rank() - known_after[rx].rank() != after.wants[rx].len() {
                return None;
            }
        }
        let mut score = [0i32; 4];
        for (i, v) in self.vars.iter().enumerate() {
            let k = kinds[i];
            if k == QueueKind::Final {
                score[0] += 1;
                if known_after[v.owner].contains(v.mask) {
                    score[3] += 1;
                }
            }
            if matches!(k, QueueKind::SideAtUnintended | QueueKind::SideAtIntended | QueueKind::Special) {
                score[1] += 1;
            }
            if k == origin_kinds[i] {
                score[2] += 1;
            }
        }
        let mut tie = [u8::MAX; 3];
        for (i, &k) in kinds.iter().enumerate() {
            let rank = TRY_ORDER.iter().position(|&t| t == k).unwrap_or(0) as u8;
            let untransmitted = u8::from(self.partner == Some(i));
            tie[i] = origin_kinds[i].index() as u8 * 16 + untransmitted * 8 + rank;
        }
        tie.sort_unstable();
        let mut order: Vec<usize> = (0..kinds.len()).collect();
        order.sort_by_key(|&i| (self.vars[i].owner != self.lead, origin_kinds[i].index()));
        let mut lead_tie = [0u8; 3];
        for (slot, &i) in order.iter().enumerate() {
            lead_tie[slot] = TRY_ORDER.iter().position(|&t| t == kinds[i]).unwrap_or(0) as u8;
        }
        let dest = [0, 1].map(|tx| self.slots[tx].map_or(QueueKind::Final, |v| kinds[v]));
        let partner = self.partner.map(|p| kinds[p]);
        Some(Candidate { mv: Move { dest, partner }, score, tie, lead_tie })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use QueueKind::{CommonInterest as CI, Final as F, Initial as I, SideAtUnintended as SU, Special as C1};

    fn sn(k: u8) -> SituationNumber {
        SituationNumber::new(k).unwrap()
    }

    fn fixed(a: QueueKind, b: QueueKind) -> Move {
        Move { dest: [a, b], partner: None }
    }

    #[test]
    fn silent_pair_is_stay() {
        let t = derive_control_table(Regime::HomLow);
        for s in SituationNumber::all() {
            assert_eq!(t.get([F, F], s), Action::Fixed(fixed(F, F)));
        }
    }

    #[test]
    fn nothing_received_stays() {
        for o in ControlTable::origins() {
            let c = candidates(o, sn(16));
            assert_eq!(c[0].mv.dest, o, "{o:?}");
            if let Some(p) = c[0].mv.partner {
                assert_eq!(p, C1);
            }
        }
    }

    #[test]
    fn lone_initial_clean_goes_final() {
        // Only Tx1 active, its own link on.
        let c = candidates([I, F], sn(5));
        assert_eq!(c[0].mv, fixed(F, F));
    }

    #[test]
    fn interference_only_at_other_receiver() {
        // SN 14: only Tx1 -> Rx2 is on. Rx2 now holds a cleanly.
        let c = candidates([CI, I], sn(14));
        assert_eq!(c[0].mv, fixed(SU, I));
    }

    #[test]
    fn special_pair_both_sent() {
        // Both receivers hold a^b already; SN 5 gives Rx1 a cleanly.
        let c = candidates([C1, C1], sn(5));
        let m = c[0].mv;
        // Rx1 is done with a; Rx2 still needs a or b.
        assert_eq!(m.dest[0], F);
        assert!(m.partner.is_none());
    }

    #[test]
    fn lone_special_moves_partner() {
        // Tx1 sends its Special bit alone to both receivers.
        let c = candidates([C1, F], sn(6));
        let m = c[0].mv;
        assert_eq!(m.dest[0], F);
        assert_eq!(m.partner, Some(F));
    }
}
