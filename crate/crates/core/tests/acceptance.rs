//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Exits 0 regardless of verdicts so that the workspace test run stays green;
//! set `ICSIM_ACCEPTANCE_STRICT=1` to exit 1 when any criterion fails.

use std::collections::BTreeSet;
use std::time::Instant;

use icsim::channel::ErasureProfile;
use icsim::channel::{received, sn_of, source_id, ChannelState, Composition, Observation, Payload, SituationNumber};
use icsim::protocol::{derive_control_table, Action, FlexibleCase, Move, QueueKind, Regime};
use icsim::receiver::EquationLog;
use icsim::region::{contains_eps, cornerpoints, outer_bound, RatePair};
use icsim::sim::{
    default_beta, diagonal_frontier, frontier_scan, is_stable_majority, lifetime_fit, lifetime_series, run, sweep,
    GridSpec, SimConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use QueueKind::{CommonInterest as CI, Final as F, Initial as I, SideAtIntended as SI, SideAtUnintended as SU};

const SEEDS: [u64; 3] = [1, 2, 3];

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn cornerpoint_reproduction() -> Verdict {
    let c = cornerpoints(&outer_bound(&ErasureProfile::new(0.4, 0.6, 0.5, 0.2).unwrap()));
    let near = |p: RatePair, l1: f64, l2: f64| (p.l1 - l1).abs() <= 5e-4 && (p.l2 - l2).abs() <= 5e-4;
    let pass = near(c.a, 0.6, 0.36) && near(c.b, 0.152, 0.8) && near(c.c, 0.4397, 0.6486);
    verdict(
        pass,
        format!(
            "A=({:.5}, {:.5}) B=({:.5}, {:.5}) C=({:.5}, {:.5}), tol 5e-4",
            c.a.l1, c.a.l2, c.b.l1, c.b.l2, c.c.l1, c.c.l2
        ),
    )
}

fn fixed(a: QueueKind, b: QueueKind) -> Action {
    Action::Fixed(Move { dest: [a, b], partner: None })
}

fn golden_row() -> Verdict {
    let want = [
        Action::Flexible(FlexibleCase::F3),
        fixed(SI, F),
        fixed(CI, F),
        fixed(SI, F),
        fixed(SI, I),
        fixed(F, I),
        fixed(CI, I),
        fixed(F, CI),
        fixed(CI, F),
        fixed(CI, F),
        fixed(CI, F),
        fixed(CI, F),
        fixed(CI, SU),
        fixed(SU, I),
        fixed(SU, SU),
        fixed(CI, I),
    ];
    let t = derive_control_table(Regime::HomLow);
    let bad: Vec<u8> =
        SituationNumber::all().filter(|&s| t.get([CI, I], s) != want[s.index()]).map(|s| s.get()).collect();
    verdict(bad.is_empty(), format!("{}/16 SNs match, mismatches {bad:?}", 16 - bad.len()))
}

/// Four slots of fresh bits: `[S11, S21, S22, S12]` per slot.
const SCENARIO: [[u8; 4]; 4] = [[1, 1, 0, 0], [0, 0, 1, 1], [1, 0, 1, 1], [1, 1, 1, 0]];

fn state(bits: [u8; 4]) -> ChannelState {
    ChannelState::from_bits(bits).unwrap()
}

fn scenario_logs(extra: [&[Composition]; 2]) -> [EquationLog; 2] {
    let mut logs = [EquationLog::new(0), EquationLog::new(1)];
    for (k, bits) in SCENARIO.iter().enumerate() {
        let a = Composition::single(source_id(0, k as u32));
        let b = Composition::single(source_id(1, k as u32));
        let (o1, o2) = received(state(*bits), Some(&a), Some(&b));
        logs[0].record(k, &o1);
        logs[1].record(k, &o2);
    }
    for rx in 0..2 {
        for (j, c) in extra[rx].iter().enumerate() {
            logs[rx].record(10 + j, &Observation { receiver: rx, payload: Payload::Sum(c.clone()) });
        }
    }
    logs
}

fn own(log: &EquationLog, rx: usize) -> BTreeSet<u32> {
    (0..4).filter(|&k| log.is_decodable(source_id(rx, k))).map(|k| k + 1).collect()
}

fn delivery_set() -> Verdict {
    let t = derive_control_table(Regime::HomLow);
    let want = [(F, CI), (CI, F), (SI, F), (F, SI)];
    let assigned = SCENARIO.iter().zip(want).all(|(bits, (a, b))| t.get([I, I], sn_of(state(*bits))) == fixed(a, b));
    let a = |k: u32| source_id(0, k - 1);
    let b = |k: u32| source_id(1, k - 1);
    let prior = [Composition::from_ids([b(1), b(4)]), Composition::from_ids([a(2), a(3)])];
    let logs = scenario_logs([&prior, &prior]);
    let prior_rx1 = own(&logs[0], 0);
    let prior_ok = !prior_rx1.contains(&1) && !prior_rx1.contains(&4);
    let one = Composition::single;
    let rx1 = [one(b(1)), one(a(2)), one(b(4))];
    let rx2 = [one(b(1)), one(a(2)), one(a(3))];
    let logs = scenario_logs([&rx1, &rx2]);
    let all = BTreeSet::from([1, 2, 3, 4]);
    let corrected = own(&logs[0], 0) == all && own(&logs[1], 1) == all;
    verdict(
        assigned && prior_ok && corrected,
        format!(
            "assignments {assigned}, prior set Rx1 decodes a{prior_rx1:?} only, corrected set decodes all {corrected}"
        ),
    )
}

fn known_capacity() -> (Verdict, Vec<String>) {
    let p = ErasureProfile::homogeneous(0.4).unwrap();
    let base = SimConfig::new(p, RatePair::new(0.49, 0.49), 20_000, 0).with_beta(140);
    let (at_c, runs) = is_stable_majority(&base, &SEEDS).unwrap();
    let votes = runs.iter().filter(|r| icsim::sim::is_stable(&base, r)).count();
    let step = 0.02;
    let rows = frontier_scan(&base, step, &SEEDS, 0, 8).unwrap();
    let misses: Vec<String> = rows
        .iter()
        .filter(|r| r.frontier_l2.is_none_or(|f| r.bound_l2 - f > step + 1e-9))
        .map(|r| format!("{:.2}:{}", r.l1, r.frontier_l2.map_or("none".into(), |f| format!("{f:.2}"))))
        .collect();
    let outside: Vec<String> = rows
        .iter()
        .filter(|r| r.above_bound_stable == Some(true))
        .map(|r| format!("delta0.4 row {:.2}", r.l1))
        .collect();
    let worst = rows.iter().map(|r| r.bound_l2 - r.frontier_l2.unwrap_or(0.0)).fold(0.0, f64::max);
    (
        verdict(
            at_c && misses.is_empty(),
            format!(
                "C=(0.49, 0.49) stable {at_c} ({votes}/3 seeds); {}/{} rows within one 0.02 step, worst gap {worst:.3}, misses [{}]",
                rows.len() - misses.len(),
                rows.len(),
                misses.join(" ")
            ),
        ),
        outside,
    )
}

fn gap_at(n: usize, beta: usize) -> f64 {
    let p = ErasureProfile::symmetric(0.4, 0.7).unwrap();
    let c = cornerpoints(&outer_bound(&p)).c;
    let base = SimConfig::new(p, c, n, 0).with_beta(beta);
    1.0 - diagonal_frontier(&base, c, &SEEDS, 0.85, 1.0, 0.0025).unwrap()
}

fn unknown_capacity_gap() -> Verdict {
    let g1 = gap_at(30_000, 185);
    let beta2 = (185.0 * 2f64.sqrt()).round() as usize;
    let g2 = gap_at(60_000, beta2);
    let magnitude = (g1 - 0.015).abs() <= 0.007;
    let no_shrink = g2 >= g1 - 0.0025;
    verdict(
        magnitude && no_shrink,
        format!(
            "gap at C {:.2}% (n=3e4, beta=185; target 1.5 +/- 0.7), {:.2}% (n=6e4, beta={beta2}); magnitude {magnitude}, non-shrinking {no_shrink}",
            100.0 * g1,
            100.0 * g2
        ),
    )
}

fn xor_complexity() -> Verdict {
    let p = ErasureProfile::homogeneous(0.4).unwrap();
    let c = cornerpoints(&outer_bound(&p)).c;
    let seeds: Vec<u64> = (1..=5).collect();
    let rs: Vec<_> = seeds.par_iter().map(|&s| run(&SimConfig::new(p, c, 10_000, s).with_beta(100)).unwrap()).collect();
    let k = rs.len() as f64;
    let xor = rs.iter().map(|r| r.xor_fraction()).sum::<f64>() / k;
    let deep = rs.iter().map(|r| r.deep_fraction()).sum::<f64>() / k;
    let pass = (xor - 0.40).abs() <= 0.05 && (deep - 0.25).abs() <= 0.05;
    verdict(pass, format!("XOR fraction {xor:.3} (0.40 +/- 0.05), >3-bit fraction {deep:.3} (0.25 +/- 0.05), 5 seeds"))
}

fn lifetime_scaling() -> Verdict {
    let p = ErasureProfile::homogeneous(0.4).unwrap();
    let c = cornerpoints(&outer_bound(&p)).c;
    let ns = [5_000, 10_000, 20_000, 50_000];
    let base = SimConfig::new(p, c, ns[0], 0);
    let pts = lifetime_series(&base, &ns, default_beta, &SEEDS).unwrap();
    let mean: Vec<f64> = pts.iter().map(|p| p.mean).collect();
    let worst: Vec<f64> = pts.iter().map(|p| p.worst).collect();
    let fm = lifetime_fit(&ns, &mean).unwrap();
    let fw = lifetime_fit(&ns, &worst).unwrap();
    let pass = (fm.exponent - 0.5).abs() <= 0.1 && (fw.exponent - 1.0).abs() <= 0.15;
    verdict(
        pass,
        format!(
            "mean q={:.3} (0.5 +/- 0.1), worst q={:.3} (1 +/- 0.15); mean {:?}, worst {:?}",
            fm.exponent,
            fw.exponent,
            mean.iter().map(|v| format!("{v:.1}")).collect::<Vec<_>>(),
            worst.iter().map(|v| format!("{v:.0}")).collect::<Vec<_>>()
        ),
    )
}

/// Gaussian elimination on bitmasks, independent of the library.
fn oracle(rows: &[u16]) -> BTreeSet<u32> {
    let mut basis: Vec<u16> = Vec::new();
    for &r in rows {
        let mut v = r;
        for &b in &basis {
            if v >> (15 - b.leading_zeros()) & 1 == 1 {
                v ^= b;
            }
        }
        if v != 0 {
            let p = 15 - v.leading_zeros();
            for b in basis.iter_mut() {
                if *b >> p & 1 == 1 {
                    *b ^= v;
                }
            }
            basis.push(v);
        }
    }
    basis.iter().filter(|b| b.count_ones() == 1).map(|b| b.trailing_zeros()).collect()
}

fn property_suites(outside: Vec<String>) -> Verdict {
    let mut notes = Vec::new();

    let sns: BTreeSet<u8> = (0..16u8)
        .map(|k| sn_of(ChannelState::from_bits([(k >> 3) & 1, (k >> 2) & 1, (k >> 1) & 1, k & 1]).unwrap()).get())
        .collect();
    let bijection = sns.len() == 16;
    notes.push(format!("SN bijection {bijection}"));

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut rref_bad = 0;
    for _ in 0..10_000 {
        let nbits = rng.random_range(1..=12u32);
        let nrows = rng.random_range(0..=12usize);
        let density = rng.random_range(0.1..0.6);
        let rows: Vec<u16> =
            (0..nrows).map(|_| (0..nbits).filter(|_| rng.random_bool(density)).fold(0u16, |m, k| m | 1 << k)).collect();
        let mut log = EquationLog::new(0);
        for (t, &r) in rows.iter().enumerate() {
            if r != 0 {
                log.insert(t, &Composition::from_ids((0..16).filter(|k| r >> k & 1 == 1)));
            }
        }
        if log.decodable_set() != oracle(&rows) {
            rref_bad += 1;
        }
    }
    notes.push(format!("decodability oracle mismatches {rref_bad}/10000"));

    let profiles = [
        ErasureProfile::homogeneous(0.2).unwrap(),
        ErasureProfile::homogeneous(0.4).unwrap(),
        ErasureProfile::homogeneous(0.7).unwrap(),
        ErasureProfile::symmetric(0.3, 0.1).unwrap(),
        ErasureProfile::symmetric(0.3, 0.5).unwrap(),
        ErasureProfile::new(0.4, 0.6, 0.5, 0.2).unwrap(),
        ErasureProfile::new(0.4, 0.6, 0.5, 0.2).unwrap().transposed(),
    ];
    let replica_bad = (0..100u64)
        .into_par_iter()
        .filter(|&k| {
            let p = profiles[k as usize % profiles.len()];
            let c = cornerpoints(&outer_bound(&p)).c;
            let s = 0.5 + 0.006 * k as f64;
            let cfg = SimConfig::new(p, RatePair::new((c.l1 * s).min(1.0), (c.l2 * s).min(1.0)), 10_000, k);
            !run(&cfg).is_ok_and(|r| r.replica_consistent)
        })
        .count();
    notes.push(format!("replica divergences {replica_bad}/100 runs of 1e4 slots over 6 regimes"));

    let mut outside = outside;
    let nonhom = ErasureProfile::new(0.4, 0.6, 0.5, 0.2).unwrap();
    for p in [nonhom, ErasureProfile::symmetric(0.4, 0.7).unwrap()] {
        let base = SimConfig::new(p, RatePair::new(0.0, 0.0), 5_000, 0);
        let res = sweep(&base, &GridSpec::up_to_caps(&p, 0.1), &SEEDS, 0).unwrap();
        let bound = outer_bound(&p);
        outside.extend(
            res.points
                .iter()
                .filter(|q| q.stable && !contains_eps(&bound, q.rates, 0.0))
                .map(|q| format!("{:?} at ({:.2}, {:.2})", p, q.rates.l1, q.rates.l2)),
        );
    }
    notes.push(format!("stable points outside the bound {}", outside.len()));

    let invariant_bad = profiles
        .par_iter()
        .enumerate()
        .filter(|(k, p)| {
            let c = cornerpoints(&outer_bound(p)).c;
            let mut cfg = SimConfig::new(**p, c, 5_000, *k as u64);
            cfg.check_invariants = true;
            run(&cfg).is_err()
        })
        .count();
    notes.push(format!("conservation/absorbing violations {invariant_bad}/{}", profiles.len()));

    let pass = bijection && rref_bad == 0 && replica_bad == 0 && outside.is_empty() && invariant_bad == 0;
    if !outside.is_empty() {
        notes.push(format!("outside: {}", outside.join(", ")));
    }
    verdict(pass, notes.join("; "))
}

fn report(id: usize, name: &str, start: Instant, v: &Verdict) {
    println!(
        "{} [{id}] {name}: {} ({:.1}s)",
        if v.pass { "PASS" } else { "FAIL" },
        v.detail,
        start.elapsed().as_secs_f64()
    );
}

fn main() {
    let mut failed = 0;
    let mut record = |id: usize, name: &str, f: &mut dyn FnMut() -> Verdict| {
        let t = Instant::now();
        let v = f();
        report(id, name, t, &v);
        if !v.pass {
            failed += 1;
        }
    };
    record(1, "cornerpoint reproduction", &mut cornerpoint_reproduction);
    record(2, "golden control-table row", &mut golden_row);
    record(3, "delivery-set regression", &mut delivery_set);
    let mut outside = Vec::new();
    record(4, "known-capacity match", &mut || {
        let (v, o) = known_capacity();
        outside = o;
        v
    });
    record(5, "unknown-capacity gap", &mut unknown_capacity_gap);
    record(6, "XOR complexity", &mut xor_complexity);
    record(7, "lifetime scaling", &mut lifetime_scaling);
    record(8, "property suites", &mut || property_suites(std::mem::take(&mut outside)));
    println!("{failed} of 8 criteria failed");
    if failed > 0 && std::env::var("ICSIM_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
