//! Outer bound, cornerpoints, stability zones and mixing probabilities.

use serde::{Deserialize, Serialize};

use crate::channel::ErasureProfile;
use crate::error::Error;

const TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatePair {
    pub l1: f64,
    pub l2: f64,
}

impl RatePair {
    pub fn new(l1: f64, l2: f64) -> Self {
        RatePair { l1, l2 }
    }

    pub fn get(&self, user: usize) -> f64 {
        if user == 0 {
            self.l1
        } else {
            self.l2
        }
    }

    pub fn sum(&self) -> f64 {
        self.l1 + self.l2
    }

    pub fn transposed(&self) -> Self {
        RatePair { l1: self.l2, l2: self.l1 }
    }
}

/// `l_own + coeff * l_other <= rhs`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SumConstraint {
    pub coeff: f64,
    pub rhs: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OuterBound {
    pub profile: ErasureProfile,
    pub caps: [f64; 2],
    /// Index i constrains `l_i + coeff * l_other`. `None` when the cross
    /// link of user i never delivers.
    pub constraints: [Option<SumConstraint>; 2],
}

pub fn outer_bound(profile: &ErasureProfile) -> OuterBound {
    let caps = [1.0 - profile.d11, 1.0 - profile.d22];
    let mk = |i: usize| {
        let o = 1 - i;
        let dii = profile.erasure(i, i);
        let dio = profile.erasure(i, o);
        let doo = profile.erasure(o, o);
        if dio >= 1.0 {
            return None;
        }
        let coeff = (1.0 - dii * dio) / (1.0 - dio);
        let rhs = (1.0 - dii * dio) * (1.0 - doo * dio) / (1.0 - dio);
        Some(SumConstraint { coeff, rhs })
    };
    OuterBound { profile: *profile, caps, constraints: [mk(0), mk(1)] }
}

impl OuterBound {
    /// Largest violation of any constraint at `p` (non-positive when feasible).
    pub fn violation(&self, p: RatePair) -> f64 {
        let l = [p.l1, p.l2];
        let mut v = f64::NEG_INFINITY;
        for i in 0..2 {
            v = v.max(l[i] - self.caps[i]).max(-l[i]);
            if let Some(c) = self.constraints[i] {
                v = v.max(l[i] + c.coeff * l[1 - i] - c.rhs);
            }
        }
        v
    }

    pub fn contains(&self, p: RatePair) -> bool {
        self.violation(p) <= TOL
    }

    /// Largest feasible `l2` at the given `l1`, or `None` if `l1` exceeds its cap.
    pub fn max_l2_at(&self, l1: f64) -> Option<f64> {
        self.max_other_at(0, l1)
    }

    /// Largest feasible rate of the other user given user `user`'s rate.
    pub fn max_other_at(&self, user: usize, rate: f64) -> Option<f64> {
        if rate < -TOL || rate > self.caps[user] + TOL {
            return None;
        }
        let o = 1 - user;
        let mut m = self.caps[o];
        if let Some(c) = self.constraints[user] {
            m = m.min((c.rhs - rate) / c.coeff);
        }
        if let Some(c) = self.constraints[o] {
            m = m.min(c.rhs - c.coeff * rate);
        }
        if m < -TOL {
            None
        } else {
            Some(m.max(0.0))
        }
    }

    /// Feasible vertices, counter-clockwise from the `l1` axis, origin excluded.
    pub fn vertices(&self) -> Vec<RatePair> {
        // Lines a*l1 + b*l2 = c.
        let mut lines: Vec<(f64, f64, f64)> =
            vec![(1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (1.0, 0.0, self.caps[0]), (0.0, 1.0, self.caps[1])];
        if let Some(c) = self.constraints[0] {
            lines.push((1.0, c.coeff, c.rhs));
        }
        if let Some(c) = self.constraints[1] {
            lines.push((c.coeff, 1.0, c.rhs));
        }
        let mut pts: Vec<RatePair> = Vec::new();
        for i in 0..lines.len() {
            for j in i + 1..lines.len() {
                let (a1, b1, c1) = lines[i];
                let (a2, b2, c2) = lines[j];
                let det = a1 * b2 - a2 * b1;
                if det.abs() < 1e-15 {
                    continue;
                }
                let p = RatePair::new((c1 * b2 - c2 * b1) / det, (a1 * c2 - a2 * c1) / det);
                if self.contains(p) && p.l1.hypot(p.l2) > TOL {
                    let p = RatePair::new(p.l1.max(0.0), p.l2.max(0.0));
                    if !pts.iter().any(|q| (q.l1 - p.l1).abs() < TOL && (q.l2 - p.l2).abs() < TOL) {
                        pts.push(p);
                    }
                }
            }
        }
        pts.sort_by(|a, b| a.l2.atan2(a.l1).total_cmp(&b.l2.atan2(b.l1)));
        pts
    }
}

/// True iff `(l1 + eps, l2 + eps)` lies in the bound.
pub fn contains_eps(bound: &OuterBound, p: RatePair, eps: f64) -> bool {
    bound.contains(RatePair::new(p.l1 + eps, p.l2 + eps))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CornerPoints {
    pub a: RatePair,
    pub b: RatePair,
    pub c: RatePair,
}

/// A sits at `l1 = 1 - d11`, B at `l2 = 1 - d22`, C maximizes the sum rate.
/// When the sum is maximal along a whole face, C is the face midpoint.
pub fn cornerpoints(bound: &OuterBound) -> CornerPoints {
    let a = RatePair::new(bound.caps[0], bound.max_other_at(0, bound.caps[0]).unwrap_or(0.0));
    let b = RatePair::new(bound.max_other_at(1, bound.caps[1]).unwrap_or(0.0), bound.caps[1]);
    let verts = bound.vertices();
    let best = verts.iter().map(|p| p.sum()).fold(0.0_f64, f64::max);
    let face: Vec<&RatePair> = verts.iter().filter(|p| p.sum() >= best - TOL).collect();
    let c = if face.is_empty() {
        RatePair::new(0.0, 0.0)
    } else {
        let lo = face.iter().min_by(|x, y| x.l1.total_cmp(&y.l1)).unwrap();
        let hi = face.iter().max_by(|x, y| x.l1.total_cmp(&y.l1)).unwrap();
        RatePair::new((lo.l1 + hi.l1) / 2.0, (lo.l2 + hi.l2) / 2.0)
    };
    CornerPoints { a, b, c }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Zone {
    Z1,
    Z2,
    Z3,
    Z4,
    Z5,
}

/// Zone of a rate pair inside the bound.
///
/// Z1 is the closed box below C. To the right of C, points with
/// `l2 >= l2(A)` belong to Z4 and the rest to Z2; above C, points with
/// `l1 >= l1(B)` belong to Z5 and the rest to Z3. All other shared edges
/// go to the lower-numbered zone.
pub fn classify_zone(bound: &OuterBound, p: RatePair, corners: &CornerPoints) -> Result<Zone, Error> {
    if !bound.contains(p) {
        return Err(Error::OutsideRegion(p.l1, p.l2));
    }
    let CornerPoints { a, b, c } = *corners;
    let z = if p.l1 <= c.l1 + TOL && p.l2 <= c.l2 + TOL {
        Zone::Z1
    } else if p.l1 > c.l1 + TOL {
        if p.l2 < a.l2 - TOL {
            Zone::Z2
        } else {
            Zone::Z4
        }
    } else if p.l1 < b.l1 - TOL {
        Zone::Z3
    } else {
        Zone::Z5
    };
    Ok(z)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixProbabilities {
    pub pa: f64,
    pub pb: f64,
    pub pc: f64,
}

impl MixProbabilities {
    pub fn pure_a() -> Self {
        MixProbabilities { pa: 1.0, pb: 0.0, pc: 0.0 }
    }
    pub fn pure_b() -> Self {
        MixProbabilities { pa: 0.0, pb: 1.0, pc: 0.0 }
    }
    pub fn pure_c() -> Self {
        MixProbabilities { pa: 0.0, pb: 0.0, pc: 1.0 }
    }

    pub fn is_valid(&self) -> bool {
        let ok = |x: f64| (0.0..=1.0).contains(&x);
        let nonzero = [self.pa, self.pb, self.pc].iter().filter(|&&x| x > 0.0).count();
        ok(self.pa) && ok(self.pb) && ok(self.pc) && (self.pa + self.pb + self.pc - 1.0).abs() < 1e-12 && nonzero <= 2
    }
}

/// Mixing probabilities of the policy variable at a rate pair.
///
/// Uses the signed difference `l2 - l1` so that the interpolation stays in
/// `[0, 1]` on asymmetric profiles.
pub fn mix_probabilities(bound: &OuterBound, p: RatePair, corners: &CornerPoints) -> Result<MixProbabilities, Error> {
    let zone = classify_zone(bound, p, corners)?;
    let CornerPoints { a, b, c } = *corners;
    let dist = |x: RatePair, y: RatePair| (x.l1 - y.l1).hypot(x.l2 - y.l2);
    let interpolate = |z: RatePair| -> (f64, bool) {
        let dz = z.l2 - z.l1;
        let dc = c.l2 - c.l1;
        let den = dz - dc;
        if den.abs() < 1e-12 {
            let pc = if dist(p, c) <= dist(p, z) { 1.0 } else { 0.0 };
            return (pc, true);
        }
        let pc = ((dz - (p.l2 - p.l1)) / den).clamp(0.0, 1.0);
        (pc, false)
    };
    let m = match zone {
        Zone::Z1 => MixProbabilities::pure_c(),
        Zone::Z2 => MixProbabilities::pure_a(),
        Zone::Z3 => MixProbabilities::pure_b(),
        Zone::Z4 => {
            let (pc, _) = interpolate(a);
            MixProbabilities { pa: 1.0 - pc, pb: 0.0, pc }
        }
        Zone::Z5 => {
            let (pc, _) = interpolate(b);
            MixProbabilities { pa: 0.0, pb: 1.0 - pc, pc }
        }
    };
    Ok(m)
}
