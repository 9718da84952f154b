//! Cells whose destination depends on the shared policy variable.

use serde::{Deserialize, Serialize};

use super::engine::Move;
use super::policy::Policy;
use super::regime::Regime;
use super::QueueKind;
use crate::channel::{ErasureProfile, SituationNumber};

use QueueKind::{
    CommonInterest as CI, Final as F, Initial as I, SideAtIntended as SI, SideAtUnintended as SU, Special as C1,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FlexibleCase {
    F1,
    F2,
    F3,
    F4,
    F5,
    F6,
    F7,
    F8,
}

impl FlexibleCase {
    pub const ALL: [FlexibleCase; 8] = [
        FlexibleCase::F1,
        FlexibleCase::F2,
        FlexibleCase::F3,
        FlexibleCase::F4,
        FlexibleCase::F5,
        FlexibleCase::F6,
        FlexibleCase::F7,
        FlexibleCase::F8,
    ];

    pub fn name(self) -> &'static str {
        ["F1", "F2", "F3", "F4", "F5", "F6", "F7", "F8"][self as usize]
    }

    pub fn sn(self) -> u8 {
        match self {
            FlexibleCase::F5 => 2,
            FlexibleCase::F6 => 3,
            FlexibleCase::F7 => 8,
            FlexibleCase::F8 => 12,
            _ => 1,
        }
    }

    /// Origin pairs `(Tx1 kind, Tx2 kind)` that trigger this case.
    pub fn origins(self) -> &'static [[QueueKind; 2]] {
        match self {
            FlexibleCase::F1 => &[[I, I]],
            FlexibleCase::F2 => &[[I, SU], [SI, I], [SI, SU], [SI, CI], [CI, SU]],
            FlexibleCase::F3 => &[[I, CI], [CI, I], [CI, CI]],
            FlexibleCase::F4 => &[[I, SI], [SU, I], [SU, SI], [SU, CI], [CI, SI]],
            FlexibleCase::F5 => &[[I, SU], [CI, SU]],
            FlexibleCase::F6 => &[[SU, I], [SU, CI]],
            FlexibleCase::F7 => &[[I, SI], [CI, SI]],
            FlexibleCase::F8 => &[[SI, I], [SI, CI]],
        }
    }

    fn group(self) -> Group {
        match self {
            FlexibleCase::F1 | FlexibleCase::F3 => Group::Pair,
            FlexibleCase::F2 | FlexibleCase::F5 | FlexibleCase::F8 => Group::ToRx2,
            FlexibleCase::F4 | FlexibleCase::F6 | FlexibleCase::F7 => Group::ToRx1,
        }
    }
}

/// Cases sharing one destination row.
enum Group {
    Pair,
    /// Choice between an Rx2-bound side bit at Tx2 or at Tx1.
    ToRx2,
    /// Choice between an Rx1-bound side bit at Tx2 or at Tx1.
    ToRx1,
}

pub fn flexible_case_of(origin: [QueueKind; 2], sn: SituationNumber) -> Option<FlexibleCase> {
    FlexibleCase::ALL.into_iter().find(|c| c.sn() == sn.get() && c.origins().contains(&origin))
}

fn mv(a: QueueKind, b: QueueKind) -> Move {
    Move { dest: [a, b], partner: None }
}

/// Base destinations for P = A, P = B and the two P = C variants.
fn base(case: FlexibleCase, p: Policy, favour_intended: bool) -> Move {
    match (case.group(), p) {
        (Group::Pair, Policy::A) => mv(F, CI),
        (Group::Pair, Policy::B) => mv(CI, F),
        (Group::Pair, Policy::C) => mv(C1, C1),
        (Group::ToRx2, Policy::A) => mv(F, SU),
        (Group::ToRx2, Policy::B) => mv(SI, F),
        (Group::ToRx2, Policy::C) => {
            if favour_intended {
                mv(SI, F)
            } else {
                mv(F, SU)
            }
        }
        (Group::ToRx1, Policy::A) => mv(F, SI),
        (Group::ToRx1, Policy::B) => mv(SU, F),
        (Group::ToRx1, Policy::C) => {
            if favour_intended {
                mv(F, SI)
            } else {
                mv(SU, F)
            }
        }
    }
}

/// Destination pair of a flexible cell.
///
/// The P = C column of the Pair group is `(Special, Special)`; how that is
/// realised is left to the caller.
pub fn flexible_lookup(case: FlexibleCase, p: Policy, regime: Regime, profile: &ErasureProfile) -> Move {
    match regime {
        Regime::HomLow | Regime::SymLowCrossHigh => base(case, p, false),
        Regime::HomMid | Regime::SymLowCrossLow => base(case, p, true),
        Regime::HomHigh => base(case, Policy::C, true),
        Regime::NonHom => {
            if p != Policy::C {
                return base(case, p, false);
            }
            // Pick the option whose remaining bit travels the better link.
            let favour_intended = match case.group() {
                Group::Pair => false,
                // (F, SU at Tx2) uses Tx2->Rx2; (SI at Tx1, F) uses Tx1->Rx2.
                Group::ToRx2 => profile.d12 < profile.d22,
                // (F, SI at Tx2) uses Tx2->Rx1; (SU at Tx1, F) uses Tx1->Rx1.
                Group::ToRx1 => profile.d21 < profile.d11,
            };
            base(case, p, favour_intended)
        }
    }
}
