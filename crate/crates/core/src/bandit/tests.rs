use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;

fn small_tm(o: usize) -> TmConfig {
    TmConfig::new(10, 5, 3.0, 8, o)
}

fn random_bits(rng: &mut ChaCha8Rng, o: usize) -> BinarySample {
    BinarySample::from_bools(&(0..o).map(|_| rng.random::<bool>()).collect::<Vec<_>>())
}

fn history_of(x: &BinarySample, reward: u8, n: usize) -> ArmHistory {
    let mut h = ArmHistory::new();
    for _ in 0..n {
        h.push(x, reward).unwrap();
    }
    h
}

/// Plays `rounds` rounds where only `good` pays; returns the chosen arms.
fn play(policy: &mut Policy, good: usize, rounds: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let o = policy.config().tm.num_features;
    let mut arms = Vec::with_capacity(rounds);
    for id in 0..rounds {
        let bits = random_bits(&mut rng, o);
        let raw: Vec<f64> = bits.bits().iter().map(|&b| b as f64).collect();
        let ctx = Context { id, raw: &raw, bits: &bits };
        let arm = policy.select(&ctx).unwrap();
        policy.update(arm, &ctx, (arm == good) as u8).unwrap();
        arms.push(arm);
    }
    arms
}

#[test]
fn exact_cold_start_is_uniform() {
    let histories = vec![ArmHistory::new(); 3];
    let x = BinarySample::zeros(4);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut counts = [0usize; 3];
    let n = 30_000;
    for r in 0..n {
        counts[thompson_step_exact(&histories, &x, &small_tm(4), 1, r, &mut rng).unwrap()] += 1;
    }
    let sd = (n as f64 * (1.0 / 3.0) * (2.0 / 3.0)).sqrt();
    assert!(counts.iter().all(|&c| (c as f64 - n as f64 / 3.0).abs() < 3.0 * sd), "{counts:?}");
}

#[test]
fn exact_prefers_unexplored_arms() {
    let x = BinarySample::from_bits(&[1, 0, 1, 1]);
    let histories = vec![history_of(&x, 1, 20), ArmHistory::new(), ArmHistory::new()];
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for r in 0..50 {
        let arm = thompson_step_exact(&histories, &x, &small_tm(4), 1, r, &mut rng).unwrap();
        assert_ne!(arm, 0);
    }
}

#[test]
fn exact_prefers_rewarding_arm() {
    let x = BinarySample::from_bits(&[1, 0, 1, 1]);
    let histories = vec![history_of(&x, 1, 20), history_of(&x, 0, 20)];
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let hits = (0..200)
        .filter(|&r| thompson_step_exact(&histories, &x, &small_tm(4), 1, r, &mut rng).unwrap() == 0)
        .count();
    assert!(hits >= 190, "{hits}/200");
}

#[test]
fn exact_trace_shape() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x = random_bits(&mut rng, 4);
    let mut h = ArmHistory::new();
    for i in 0..7 {
        h.push(&random_bits(&mut rng, 4), (i % 2) as u8).unwrap();
    }
    let histories = vec![h, ArmHistory::new()];
    let trace = thompson_step_exact_traced(&histories, &x, &small_tm(4), 2, 9, &mut rng).unwrap();
    let fit = trace.fits[0].as_ref().unwrap();
    assert_eq!(fit.bootstrap.len(), 7);
    assert!(fit.bootstrap.iter().all(|&i| i < 7));
    assert_eq!(fit.train_steps, 14);
    assert!(trace.fits[1].is_none());
    assert_eq!(trace.scores[1], f64::INFINITY);
    assert_eq!(trace.arm, 1);
}

#[test]
fn exact_cold_start_covers_all_arms() {
    for seed in 0..10 {
        let cfg = PolicyConfig::new(PolicyKind::TmThompsonExact, small_tm(4)).with_seed(seed);
        let mut p = Policy::new(cfg, 4, 4).unwrap();
        let mut arms = play(&mut p, 0, 4, seed);
        arms.sort();
        assert_eq!(arms, vec![0, 1, 2, 3]);
    }
}

#[test]
fn online_multiplicity_zero_skips_training() {
    let cfg = PolicyConfig::new(PolicyKind::TmThompsonOnline, small_tm(4)).with_seed(4);
    let mut p = Policy::new(cfg, 2, 4).unwrap();
    let bits = BinarySample::from_bits(&[1, 1, 0, 0]);
    let raw = [1.0, 1.0, 0.0, 0.0];
    let ctx = Context { id: 0, raw: &raw, bits: &bits };
    let mut skipped = 0;
    let mut total = 0u64;
    for i in 0..400 {
        let before = p.arm_tm(0).unwrap().steps();
        p.update(0, &ctx, 1).unwrap();
        let delta = p.arm_tm(0).unwrap().steps() - before;
        assert_eq!(p.histories()[0].len(), i + 1);
        skipped += (delta == 0) as usize;
        total += delta;
    }
    // P(k = 0) = e^-1
    assert!((100..200).contains(&skipped), "{skipped}");
    assert!((300..500).contains(&total), "{total}");
    assert_eq!(p.arm_tm(1).unwrap().steps(), 0);
}

#[test]
fn online_and_exact_find_paying_arm() {
    for kind in [PolicyKind::TmThompsonOnline, PolicyKind::TmThompsonExact] {
        let cfg = PolicyConfig::new(kind, small_tm(4)).with_seed(5);
        let mut p = Policy::new(cfg, 2, 4).unwrap();
        let arms = play(&mut p, 1, 1200, 6);
        let tail = &arms[200..];
        let hits = tail.iter().filter(|&&a| a == 1).count();
        assert!(hits as f64 >= 0.95 * tail.len() as f64, "{kind:?}: {hits}/{}", tail.len());
    }
}

#[test]
fn update_appends_and_checks() {
    let cfg = PolicyConfig::new(PolicyKind::TmEpsGreedy, small_tm(4));
    let mut p = Policy::new(cfg, 3, 4).unwrap();
    let bits = BinarySample::from_bits(&[0, 1, 0, 1]);
    let raw = [0.0, 1.0, 0.0, 1.0];
    let ctx = Context { id: 0, raw: &raw, bits: &bits };
    p.update(2, &ctx, 1).unwrap();
    assert_eq!(p.histories()[2].len(), 1);
    assert_eq!(p.histories()[2].iter().next().unwrap().1, 1);
    assert!(matches!(p.update(2, &ctx, 2), Err(Error::Contract(_))));
    assert!(matches!(p.update(3, &ctx, 1), Err(Error::Index { .. })));
    assert_eq!(p.histories()[2].len(), 1);
    let short = BinarySample::zeros(3);
    let bad = Context { id: 0, raw: &raw, bits: &short };
    assert!(matches!(p.select(&bad), Err(Error::Width { .. })));
}

#[test]
fn exact_selection_sees_new_observations() {
    let cfg = PolicyConfig::new(PolicyKind::TmThompsonExact, small_tm(4)).with_seed(7);
    let mut p = Policy::new(cfg, 1, 4).unwrap();
    let bits = BinarySample::from_bits(&[1, 0, 0, 1]);
    let raw = [1.0, 0.0, 0.0, 1.0];
    let ctx = Context { id: 0, raw: &raw, bits: &bits };
    for _ in 0..10 {
        p.update(0, &ctx, 1).unwrap();
    }
    let mut q = p.clone();
    for _ in 0..30 {
        q.update(0, &ctx, 0).unwrap();
    }
    p.select(&ctx).unwrap();
    q.select(&ctx).unwrap();
    assert!(q.last_scores()[0] < p.last_scores()[0]);
}

#[test]
fn refit_interval_reuses_fits() {
    let mut cfg = PolicyConfig::new(PolicyKind::TmThompsonExact, small_tm(4)).with_seed(8);
    cfg.refit_interval = 5;
    let mut p = Policy::new(cfg, 1, 4).unwrap();
    let bits = BinarySample::from_bits(&[1, 0, 0, 1]);
    let raw = [1.0, 0.0, 0.0, 1.0];
    let ctx = Context { id: 0, raw: &raw, bits: &bits };
    p.update(0, &ctx, 1).unwrap();
    p.select(&ctx).unwrap();
    let first = p.arm_tm(0).unwrap().clone();
    for _ in 0..4 {
        p.update(0, &ctx, 1).unwrap();
        p.select(&ctx).unwrap();
        assert_eq!(p.arm_tm(0).unwrap(), &first);
    }
    p.select(&ctx).unwrap();
    assert_ne!(p.arm_tm(0).unwrap(), &first);
}

#[test]
fn identical_seeds_identical_arms() {
    let kinds = [
        PolicyKind::TmEpsGreedy,
        PolicyKind::TmThompsonExact,
        PolicyKind::TmThompsonOnline,
        PolicyKind::Linucb,
        PolicyKind::LogisticEpsGreedy,
    ];
    for kind in kinds {
        let cfg = PolicyConfig::new(kind, small_tm(4)).with_seed(11);
        let a = play(&mut Policy::new(cfg.clone(), 3, 4).unwrap(), 2, 150, 12);
        let b = play(&mut Policy::new(cfg, 3, 4).unwrap(), 2, 150, 12);
        assert_eq!(a, b, "{kind:?}");
    }
}

#[test]
fn state_round_trips_through_json() {
    let dir = tempfile::tempdir().unwrap();
    for kind in [PolicyKind::TmThompsonOnline, PolicyKind::TmThompsonExact, PolicyKind::Linucb] {
        let cfg = PolicyConfig::new(kind, small_tm(4)).with_seed(13);
        let mut p = Policy::new(cfg, 2, 4).unwrap();
        play(&mut p, 0, 40, 14);
        let path = dir.path().join("policy.json");
        p.save(&path).unwrap();
        let mut q = Policy::load(&path).unwrap();
        assert_eq!(serde_json::to_string(&p).unwrap(), serde_json::to_string(&q).unwrap());
        // resuming continues identically
        assert_eq!(play(&mut p, 0, 20, 15), play(&mut q, 0, 20, 15));
    }
}

#[test]
fn config_validation() {
    let ok = PolicyConfig::new(PolicyKind::TmEpsGreedy, small_tm(4));
    assert!(ok.validate().is_ok());
    assert!(ok.clone().with_epsilon(1.5).validate().is_err());
    let mut c = ok.clone();
    c.refit_interval = 0;
    assert!(c.validate().is_err());
    let mut c = ok.clone();
    c.tm.num_clauses = 3;
    assert!(c.validate().is_err());
    // baselines do not care about the machine
    c.kind = PolicyKind::Linucb;
    assert!(c.validate().is_ok());
    assert!(Policy::new(ok, 0, 4).is_err());
}

#[test]
fn kind_names() {
    assert_eq!(serde_json::to_string(&PolicyKind::TmThompsonOnline).unwrap(), "\"tm_thompson_online\"");
    use clap::ValueEnum;
    assert_eq!(
        PolicyKind::from_str("tm-thompson-online", false).unwrap(),
        PolicyKind::TmThompsonOnline
    );
}
