use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::region::MixProbabilities;

/// Value of the shared policy variable for one slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Policy {
    A,
    B,
    C,
}

/// Draws one policy value. Consumes exactly one uniform per call so that
/// every node reading the same stream stays in lockstep.
pub fn draw_p<R: Rng + ?Sized>(probs: &MixProbabilities, rng: &mut R) -> Policy {
    let u: f64 = rng.random();
    if u < probs.pa {
        Policy::A
    } else if u < probs.pa + probs.pb {
        Policy::B
    } else {
        Policy::C
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Stream};

    #[test]
    fn pure_policies() {
        let mut r = stream(1, Stream::Policy);
        for _ in 0..1000 {
            assert_eq!(draw_p(&MixProbabilities::pure_a(), &mut r), Policy::A);
            assert_eq!(draw_p(&MixProbabilities::pure_c(), &mut r), Policy::C);
        }
    }

    #[test]
    fn frequency() {
        let mut r = stream(5, Stream::Policy);
        let m = MixProbabilities { pa: 0.5, pb: 0.0, pc: 0.5 };
        let n = 1_000_000;
        let a = (0..n).filter(|_| draw_p(&m, &mut r) == Policy::A).count();
        assert!((a as f64 / n as f64 - 0.5).abs() < 0.002);
    }

    #[test]
    fn common_seed_agrees() {
        let m = MixProbabilities { pa: 0.3, pb: 0.0, pc: 0.7 };
        let mut r1 = stream(77, Stream::Policy);
        let mut r2 = stream(77, Stream::Policy);
        for _ in 0..10_000 {
            assert_eq!(draw_p(&m, &mut r1), draw_p(&m, &mut r2));
        }
    }
}
