use serde::{Deserialize, Serialize};

use crate::channel::ErasureProfile;
use crate::error::Error;

/// `(3 - sqrt 5) / 2`.
pub const PHI_PRIME: f64 = 0.381_966_011_250_105_1;

const EQ: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    HomLow,
    HomMid,
    HomHigh,
    /// Equal direct links, equal cross links, cross stronger than direct.
    SymLowCrossLow,
    /// Equal direct links, equal cross links, direct stronger than cross.
    SymLowCrossHigh,
    NonHom,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::HomLow => "HomLow",
            Regime::HomMid => "HomMid",
            Regime::HomHigh => "HomHigh",
            Regime::SymLowCrossLow => "SymLowCrossLow",
            Regime::SymLowCrossHigh => "SymLowCrossHigh",
            Regime::NonHom => "NonHom",
        }
    }
}

/// Homogeneous profiles split at PHI_PRIME and 0.5. Symmetric profiles need
/// a direct erasure below 0.5. Other profiles must satisfy the
/// non-homogeneous corner for one user labelling.
pub fn regime_of(profile: &ErasureProfile) -> Result<Regime, Error> {
    profile.validate()?;
    let p = profile;
    let same = |a: f64, b: f64| (a - b).abs() < EQ;
    if same(p.d11, p.d12) && same(p.d11, p.d21) && same(p.d11, p.d22) {
        let d = p.d11;
        return Ok(if d < PHI_PRIME {
            Regime::HomLow
        } else if d < 0.5 {
            Regime::HomMid
        } else {
            Regime::HomHigh
        });
    }
    if same(p.d11, p.d22) && same(p.d12, p.d21) {
        let (dd, dc) = (p.d11, p.d12);
        if dd >= 0.5 {
            return Err(Error::Unsupported(format!("symmetric profile with direct erasure {dd} >= 0.5")));
        }
        return Ok(if dc < dd { Regime::SymLowCrossLow } else { Regime::SymLowCrossHigh });
    }
    if non_hom_user(p).is_some() {
        return Ok(Regime::NonHom);
    }
    Err(Error::Unsupported(format!(
        "profile ({}, {}, {}, {}) is neither homogeneous, symmetric, nor inside the non-homogeneous corner",
        p.d11, p.d12, p.d21, p.d22
    )))
}

/// User index for which the non-homogeneous inequality set holds.
pub fn non_hom_user(p: &ErasureProfile) -> Option<usize> {
    (0..2).find(|&i| {
        let o = 1 - i;
        let dii = p.erasure(i, i);
        let doo = p.erasure(o, o);
        let dio = p.erasure(i, o);
        let doi = p.erasure(o, i);
        PHI_PRIME < dii
            && dii <= 0.5
            && doo <= PHI_PRIME
            && 0.5 <= dio
            && dio < 1.0 / (2.0 - dii)
            && dii < doi
            && doi <= 0.5
    })
}
