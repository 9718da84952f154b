use icsim::channel::ErasureProfile;
use icsim::error::Error;
use icsim::protocol::{regime_of, Regime, SpecialPolicy};
use icsim::region::{contains_eps, cornerpoints, outer_bound, RatePair};
use icsim::sim::{is_stable, is_stable_majority, run, sweep, GridSpec, SimConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

fn profiles() -> Vec<ErasureProfile> {
    vec![
        ErasureProfile::homogeneous(0.2).unwrap(),
        ErasureProfile::homogeneous(0.4).unwrap(),
        ErasureProfile::homogeneous(0.7).unwrap(),
        ErasureProfile::symmetric(0.3, 0.1).unwrap(),
        ErasureProfile::symmetric(0.3, 0.5).unwrap(),
        ErasureProfile::symmetric(0.4, 0.7).unwrap(),
        ErasureProfile::new(0.4, 0.6, 0.5, 0.2).unwrap(),
        ErasureProfile::new(0.2, 0.5, 0.6, 0.4).unwrap(),
    ]
}

#[test]
fn profiles_span_all_regimes() {
    let mut seen: Vec<Regime> = profiles().iter().map(|p| regime_of(p).unwrap()).collect();
    seen.dedup();
    for r in [
        Regime::HomLow,
        Regime::HomMid,
        Regime::HomHigh,
        Regime::SymLowCrossLow,
        Regime::SymLowCrossHigh,
        Regime::NonHom,
    ] {
        assert!(seen.contains(&r), "{r:?} missing");
    }
}

/// Random rates between 30% and 105% of the sum-rate point.
fn random_config(k: u64) -> SimConfig {
    let ps = profiles();
    let p = ps[k as usize % ps.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(1000 + k);
    let c = cornerpoints(&outer_bound(&p)).c;
    let (s1, s2) = (rng.random_range(0.3..1.05), rng.random_range(0.3..1.05));
    let mut cfg = SimConfig::new(p, RatePair::new((c.l1 * s1).min(1.0), (c.l2 * s2).min(1.0)), 10_000, k);
    cfg.special = [SpecialPolicy::Lazy, SpecialPolicy::Alternate, SpecialPolicy::Pair][k as usize % 3];
    cfg.update_interval = [1, 7, 100][(k / 3) as usize % 3];
    cfg
}

#[test]
fn replica_matches_over_100_runs() {
    let bad: Vec<(u64, String)> = (0..100u64)
        .into_par_iter()
        .filter_map(|k| match run(&random_config(k)) {
            Ok(r) if r.replica_consistent => None,
            Ok(_) => Some((k, "replica not tracked".to_string())),
            Err(e) => Some((k, e.to_string())),
        })
        .collect();
    assert!(bad.is_empty(), "{bad:?}");
}

#[test]
fn conservation_and_absorbing_every_slot() {
    (0..16u64).into_par_iter().for_each(|k| {
        let mut cfg = random_config(k);
        cfg.n = 4000;
        cfg.beta = 89;
        cfg.check_invariants = true;
        run(&cfg).unwrap_or_else(|e| panic!("run {k}: {e}"));
    });
}

#[test]
fn corrupted_seed_diverges() {
    let mut cfg = SimConfig::new(ErasureProfile::homogeneous(0.4).unwrap(), RatePair::new(0.45, 0.45), 5000, 3);
    cfg.corrupt_replica_seed = Some(4);
    match run(&cfg) {
        Err(Error::ReplicaDivergence { .. }) => {}
        other => panic!("expected divergence, got {other:?}"),
    }
}

#[test]
fn seed_reproducibility() {
    let cfg = random_config(5);
    let a = run(&cfg).unwrap();
    let b = run(&cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.lifetimes, b.lifetimes);
    let c = run(&cfg.clone().with_seed(cfg.seed + 1)).unwrap();
    assert_ne!(a.users, c.users);
}

#[test]
fn zero_rates_deliver_nothing_and_are_stable() {
    let cfg = SimConfig::new(ErasureProfile::homogeneous(0.4).unwrap(), RatePair::new(0.0, 0.0), 1000, 1);
    let r = run(&cfg).unwrap();
    assert_eq!(r.delivered_rates(), RatePair::new(0.0, 0.0));
    assert_eq!(r.users[0].arrivals + r.users[1].arrivals, 0);
    assert!(is_stable(&cfg, &r));
}

/// A drained run delivers every arrived bit to its receiver.
#[test]
fn drained_runs_decode_everything() {
    let cases = [
        (ErasureProfile::homogeneous(0.2).unwrap(), 0.35),
        (ErasureProfile::homogeneous(0.4).unwrap(), 0.3),
        (ErasureProfile::homogeneous(0.7).unwrap(), 0.15),
        (ErasureProfile::symmetric(0.3, 0.5).unwrap(), 0.3),
        (ErasureProfile::new(0.4, 0.6, 0.5, 0.2).unwrap(), 0.3),
    ];
    for (p, l) in cases {
        let cfg = SimConfig::new(p, RatePair::new(l, l), 8000, 9).with_beta(3000);
        let r = run(&cfg).unwrap();
        for u in &r.users {
            assert_eq!(u.residual, [0; 6], "{p:?}");
            assert_eq!(u.delivered, u.arrivals, "{p:?}");
            assert_eq!(u.final_disposition, u.arrivals, "{p:?}");
        }
    }
}

/// Counters never exceed arrivals.
#[test]
fn counters_bounded_by_arrivals() {
    for k in 0..8u64 {
        let r = run(&random_config(k)).unwrap();
        for u in &r.users {
            assert!(u.delivered <= u.arrivals && u.final_disposition <= u.arrivals, "run {k}: {u:?}");
            assert_eq!(u.xor_histogram.iter().sum::<usize>(), u.delivered, "run {k}");
        }
    }
}

#[test]
fn sweep_stays_inside_bound() {
    for p in [ErasureProfile::homogeneous(0.4).unwrap(), ErasureProfile::new(0.4, 0.6, 0.5, 0.2).unwrap()] {
        let base = SimConfig::new(p, RatePair::new(0.0, 0.0), 3000, 1);
        let grid = GridSpec { l1: (0.05, 0.9), l2: (0.05, 0.9), step: 0.05 };
        let res = sweep(&base, &grid, &[1, 2, 3], 0).unwrap();
        let bound = outer_bound(&p);
        assert!(res.points.iter().any(|q| q.stable));
        for q in &res.points {
            if q.stable {
                assert!(contains_eps(&bound, q.rates, 0.0), "{p:?}: stable outside {:?}", q.rates);
            }
        }
    }
}

#[test]
fn grid_outside_bound_is_unstable() {
    let p = ErasureProfile::homogeneous(0.4).unwrap();
    let base = SimConfig::new(p, RatePair::new(0.0, 0.0), 4000, 1);
    let grid = GridSpec { l1: (0.55, 0.6), l2: (0.55, 0.6), step: 0.05 };
    let res = sweep(&base, &grid, &[1, 2, 3], 0).unwrap();
    assert!(res.points.iter().all(|q| !q.stable));
}

#[test]
fn label_swap_preserves_verdicts() {
    let p = ErasureProfile::new(0.4, 0.6, 0.5, 0.2).unwrap();
    for rates in [RatePair::new(0.3, 0.5), RatePair::new(0.5, 0.3), RatePair::new(0.55, 0.55), RatePair::new(0.2, 0.7)]
    {
        let a = SimConfig::new(p, rates, 6000, 1);
        let b = SimConfig::new(p.transposed(), rates.transposed(), 6000, 1);
        let va = is_stable_majority(&a, &[1, 2, 3]).unwrap();
        let vb = is_stable_majority(&b, &[1, 2, 3]).unwrap();
        assert_eq!(va.0, vb.0, "{rates:?}");
        let (ra, rb) = (&va.1[0], &vb.1[0]);
        assert!((ra.users[0].delivered_rate - rb.users[1].delivered_rate).abs() < 0.03);
        assert_eq!(ra.regime, rb.regime);
    }
}

#[test]
fn invalid_configs_rejected() {
    let p = ErasureProfile::homogeneous(0.4).unwrap();
    let mut cfg = SimConfig::new(p, RatePair::new(0.1, 0.1), 100, 1);
    cfg.beta = 100;
    assert!(matches!(run(&cfg), Err(Error::Config(_))));
    let unsupported = SimConfig::new(ErasureProfile::new(0.1, 0.2, 0.3, 0.4).unwrap(), RatePair::new(0.1, 0.1), 100, 1);
    assert!(matches!(run(&unsupported), Err(Error::Unsupported(_))));
}
