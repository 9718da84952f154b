use serde::{Deserialize, Serialize};

use crate::channel::ErasureProfile;
use crate::error::Error;
use crate::protocol::SpecialPolicy;
use crate::region::RatePair;

/// Default update cadence in slots.
pub const DEFAULT_UPDATE_INTERVAL: usize = 100;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub profile: ErasureProfile,
    /// Poisson arrival rates.
    pub rates: RatePair,
    pub n: usize,
    pub eps: f64,
    pub update_interval: usize,
    /// Final slots with arrivals halted.
    pub beta: usize,
    pub seed: u64,
    pub special: SpecialPolicy,
    pub track_replica: bool,
    /// Check bit conservation every slot.
    pub check_invariants: bool,
    /// Runs the replica with a different policy seed; for negative tests.
    #[serde(default)]
    pub corrupt_replica_seed: Option<u64>,
}

/// `ceil(1.4 * sqrt(n))`.
pub fn default_beta(n: usize) -> usize {
    (1.4 * (n as f64).sqrt()).ceil() as usize
}

impl SimConfig {
    pub fn new(profile: ErasureProfile, rates: RatePair, n: usize, seed: u64) -> Self {
        SimConfig {
            profile,
            rates,
            n,
            eps: 0.01,
            update_interval: DEFAULT_UPDATE_INTERVAL,
            beta: default_beta(n),
            seed,
            special: SpecialPolicy::Lazy,
            track_replica: true,
            check_invariants: false,
            corrupt_replica_seed: None,
        }
    }

    pub fn with_beta(mut self, beta: usize) -> Self {
        self.beta = beta;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), Error> {
        self.profile.validate()?;
        if self.n == 0 {
            return Err(Error::Config("n must be positive".into()));
        }
        if self.beta >= self.n {
            return Err(Error::Config(format!("beta {} must be below n {}", self.beta, self.n)));
        }
        if !(0.0..1.0).contains(&self.eps) {
            return Err(Error::Config(format!("eps {} outside [0, 1)", self.eps)));
        }
        for (name, r) in [("l1", self.rates.l1), ("l2", self.rates.l2)] {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::Config(format!("rate {name}={r} outside [0, 1]")));
            }
        }
        if self.update_interval == 0 {
            return Err(Error::Config("update interval must be positive".into()));
        }
        Ok(())
    }
}

fn parse_list(key: &str, v: &str, len: usize) -> Result<Vec<f64>, Error> {
    let xs: Result<Vec<f64>, _> = v.split(',').map(|s| s.trim().parse::<f64>()).collect();
    match xs {
        Ok(xs) if xs.len() == len => Ok(xs),
        _ => Err(Error::Config(format!("{key}: expected {len} comma-separated numbers, got {v:?}"))),
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, Error> {
    v.parse().map_err(|_| Error::Config(format!("{key}: cannot parse {v:?}")))
}

/// Parses `key = value` lines. `#` starts a comment. Keys: `profile`
/// (d11,d12,d21,d22), `rates` (l1,l2), `n`, `eps`, `update_interval`, `beta`,
/// `seed`, `special` (lazy|alternate|pair). `profile`, `rates`, `n` and `seed` are
/// required; `beta` defaults to `ceil(1.4 sqrt n)`.
pub fn parse_config(text: &str) -> Result<SimConfig, Error> {
    let mut profile = None;
    let mut rates = None;
    let mut n = None;
    let mut seed = None;
    let mut eps = None;
    let mut interval = None;
    let mut beta = None;
    let mut special = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) =
            line.split_once('=').ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
        let (k, v) = (k.trim().replace('-', "_"), v.trim());
        match k.as_str() {
            "profile" => {
                let d = parse_list("profile", v, 4)?;
                profile = Some(ErasureProfile::new(d[0], d[1], d[2], d[3])?);
            }
            "rates" => {
                let r = parse_list("rates", v, 2)?;
                rates = Some(RatePair::new(r[0], r[1]));
            }
            "n" => n = Some(parse_num::<usize>("n", v)?),
            "seed" => seed = Some(parse_num::<u64>("seed", v)?),
            "eps" => eps = Some(parse_num::<f64>("eps", v)?),
            "update_interval" => interval = Some(parse_num::<usize>("update_interval", v)?),
            "beta" => beta = Some(parse_num::<usize>("beta", v)?),
            "special" => {
                special = Some(match v {
                    "alternate" => SpecialPolicy::Alternate,
                    "pair" => SpecialPolicy::Pair,
                    "lazy" => SpecialPolicy::Lazy,
                    _ => return Err(Error::Config(format!("special: unknown policy {v:?}"))),
                })
            }
            other => return Err(Error::Config(format!("line {}: unknown key {other:?}", lineno + 1))),
        }
    }
    let missing = |k: &str| Error::Config(format!("missing required key {k:?}"));
    let n = n.ok_or_else(|| missing("n"))?;
    let mut c = SimConfig::new(
        profile.ok_or_else(|| missing("profile"))?,
        rates.ok_or_else(|| missing("rates"))?,
        n,
        seed.ok_or_else(|| missing("seed"))?,
    );
    if let Some(e) = eps {
        c.eps = e;
    }
    if let Some(l) = interval {
        c.update_interval = l;
    }
    if let Some(b) = beta {
        c.beta = b;
    }
    if let Some(s) = special {
        c.special = s;
    }
    c.validate()?;
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_file() {
        let c = parse_config(
            "# run\nprofile = 0.4, 0.6, 0.5, 0.2\nrates = 0.1,0.2\nn = 1000\nseed = 3\nbeta = 10\nupdate-interval = 5\n",
        )
        .unwrap();
        assert_eq!(c.profile.d21, 0.5);
        assert_eq!(c.rates.l2, 0.2);
        assert_eq!((c.n, c.seed, c.beta, c.update_interval), (1000, 3, 10, 5));
    }

    #[test]
    fn seed_required() {
        let e = parse_config("profile = 0,0,0,0\nrates = 0,0\nn = 10\n").unwrap_err();
        assert!(e.to_string().contains("seed"));
    }

    #[test]
    fn rejects_bad_values() {
        assert!(parse_config("profile = 0,0,0\nrates=0,0\nn=10\nseed=1").is_err());
        assert!(parse_config("profile = 0,0,0,0\nrates=0,0\nn=10\nseed=1\nbeta=10").is_err());
        assert!(parse_config("bogus = 1").is_err());
    }

    #[test]
    fn default_beta_values() {
        assert_eq!(default_beta(10_000), 140);
        assert_eq!(default_beta(20_000), 198);
    }
}
