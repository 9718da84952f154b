//! Named random substreams derived from one master seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stream {
    Channel,
    Arrivals1,
    Arrivals2,
    /// Shared policy stream; every node derives it from the common seed.
    Policy,
}

impl Stream {
    fn number(self) -> u64 {
        match self {
            Stream::Channel => 1,
            Stream::Arrivals1 => 2,
            Stream::Arrivals2 => 3,
            Stream::Policy => 4,
        }
    }

    pub fn arrivals(owner: usize) -> Stream {
        if owner == 0 {
            Stream::Arrivals1
        } else {
            Stream::Arrivals2
        }
    }
}

pub fn stream(master: u64, which: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(which.number());
    rng
}
