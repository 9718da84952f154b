//! Transmitter-side protocol: virtual queues, priority policy, control table,
//! XOR combining, update cadence and the shared policy variable.

mod bank;
pub mod engine;
pub mod flexible;
mod machine;
pub mod policy;
pub mod regime;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use bank::{priority_select, xor_scan, Bit, CombineAction, QueueBank, XorModel};
pub use engine::{derive_control_table, Action, ControlTable, Move};
pub use flexible::{flexible_case_of, flexible_lookup, FlexibleCase};
pub use machine::{apply_update, destination, Protocol, ProtocolConfig, Snapshot, SpecialPolicy};
pub use policy::{draw_p, Policy};
pub use regime::{regime_of, Regime};

/// The six virtual queues of a transmitter.
///
/// As an origin, `Final` stands for a silent transmitter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum QueueKind {
    /// Fresh bits, wanted by the own receiver only.
    Initial,
    /// Wanted by both receivers.
    CommonInterest,
    /// Wanted by the own receiver, known at the other one.
    SideAtUnintended,
    /// Known at the own receiver, wanted by the other one.
    SideAtIntended,
    /// One half of a pair whose sum both receivers hold.
    Special,
    Final,
}

impl QueueKind {
    pub const ALL: [QueueKind; 6] = [
        QueueKind::Initial,
        QueueKind::CommonInterest,
        QueueKind::SideAtUnintended,
        QueueKind::SideAtIntended,
        QueueKind::Special,
        QueueKind::Final,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> QueueKind {
        Self::ALL[i]
    }

    /// Queue notation for transmitter `owner` (zero-based), e.g. `Q1^{2|1}`.
    pub fn label(self, owner: usize) -> String {
        let i = owner + 1;
        let o = 2 - owner;
        match self {
            QueueKind::Initial => format!("Q{i}^{{{i}|-}}"),
            QueueKind::CommonInterest => format!("Q{i}^{{1,2|-}}"),
            QueueKind::SideAtUnintended => format!("Q{i}^{{{i}|{o}}}"),
            QueueKind::SideAtIntended => format!("Q{i}^{{{o}|{i}}}"),
            QueueKind::Special => format!("Q{i}^{{c1}}"),
            QueueKind::Final => format!("Q{i}^F"),
        }
    }

    /// Inverse of [`QueueKind::label`]; returns the owner and kind.
    pub fn parse_label(s: &str) -> Option<(usize, QueueKind)> {
        (0..2).flat_map(|o| QueueKind::ALL.iter().map(move |&k| (o, k))).find(|&(o, k)| k.label(o) == s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QueueId {
    /// Zero-based transmitter index.
    pub owner: usize,
    pub kind: QueueKind,
}

impl fmt::Display for QueueId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.kind.label(self.owner))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_round_trip() {
        for o in 0..2 {
            for k in QueueKind::ALL {
                assert_eq!(QueueKind::parse_label(&k.label(o)), Some((o, k)));
            }
        }
        assert_eq!(QueueKind::SideAtIntended.label(0), "Q1^{2|1}");
        assert_eq!(QueueKind::SideAtUnintended.label(1), "Q2^{2|1}");
    }
}
