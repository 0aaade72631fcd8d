//! Cross-module invariants: transcript replay, epsilon independence of the
//! combinatorial behavior, Monte-Carlo consistency of the exact analyzer, and
//! the engine-level transformer equivalence.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rwcake::engine::{
    check_proportional, replay_transcript, Engine, EngineMode, QueryRecord, Transcript,
};
use rwcake::harness::exact_expected_depth;
use rwcake::protocols::{run_protocol, ProtocolKind, SeqScan};
use rwcake::rational::Rational;
use rwcake::ws::{
    default_epsilon, exact_instance_distribution, j_count, run_primitive_on_adversary,
    run_primitive_on_engine, sample_j, transform_eval_to_cut, AdversaryState,
    JInstance, WsInstance,
};

fn sample(n: usize, eps: &Rational, seed: u64) -> JInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_j(n, eps, &mut rng)
}

#[test]
fn transcripts_replay_identically() {
    for (kind, n) in [
        (ProtocolKind::EvenPaz, 5),
        (ProtocolKind::LastDiminisher, 5),
        (ProtocolKind::SeqScan, 5),
        (ProtocolKind::CutChoose, 2),
    ] {
        let eps = default_epsilon(n);
        let inst = sample(n, &eps, 1000 + n as u64);
        let measures = inst.measures();
        let mut engine = Engine::new(measures.clone(), EngineMode::WoegingerSgall);
        run_protocol(kind, &mut engine, Some(&eps)).unwrap();
        let transcript = engine.into_transcript();
        transcript.validate().unwrap();
        replay_transcript(measures, EngineMode::WoegingerSgall, &transcript).unwrap();
    }
}

#[test]
fn cut_answers_reproduce_alpha_points() {
    let n = 4;
    let eps = default_epsilon(n);
    let inst = sample(n, &eps, 77);
    let measures = inst.measures();
    let mut engine = Engine::new(measures.clone(), EngineMode::WoegingerSgall);
    run_protocol(ProtocolKind::EvenPaz, &mut engine, None).unwrap();
    for rec in &engine.transcript().records {
        if let QueryRecord::Cut { player, alpha, answer } = rec {
            assert_eq!(&measures[player - 1].alpha_point(alpha).unwrap(), answer);
        }
    }
}

/// Normalize a transcript to its combinatorial skeleton. Cut answers may lie
/// strictly inside a mass-bearing segment, so a position maps to its chunk,
/// the nearest slot, and the intra-segment offset as a fraction of epsilon;
/// that fraction is determined by the masses alone, not by epsilon.
fn skeleton(t: &Transcript, n: usize, eps: &Rational) -> Vec<String> {
    let point = |x: &Rational| -> String {
        if x.is_zero() {
            "start".into()
        } else if *x == Rational::one() {
            "end".into()
        } else {
            let chunk_base = |c: usize| Rational::new(c as i64, n as i64 + 1);
            let c = (1..=n)
                .rev()
                .find(|&c| *x > chunk_base(c))
                .expect("positions lie beyond the filler");
            let u = (x - &chunk_base(c)) / eps;
            // Nearest slot; exact ties resolve upward deterministically.
            let mut k = 0i64;
            while Rational::new(2 * k + 1, 2) <= u {
                k += 1;
            }
            let frac = u - Rational::from_integer(k);
            format!("g{c}.{k}@{frac}")
        }
    };
    t.records
        .iter()
        .map(|rec| match rec {
            QueryRecord::Cut { player, alpha, answer } => {
                format!("cut p{player} a{alpha} -> {}", point(answer))
            }
            QueryRecord::Eval { player, x, answer } => {
                format!("eval p{player} {} -> {answer}", point(x))
            }
            QueryRecord::Assign { player, lo, hi } => {
                format!("assign p{player} {}..{}", point(lo), point(hi))
            }
        })
        .collect()
}

#[test]
fn epsilon_does_not_change_combinatorial_behavior() {
    let n = 4usize;
    let n4 = (n * n * n * n) as i64;
    let eps_a = Rational::new(1, 2 * n4);
    let eps_b = Rational::new(1, 3 * n4);
    for seed in [5u64, 6, 7] {
        // Same chunk string under both epsilons.
        let inst_a = sample(n, &eps_a, seed);
        let inst_b = JInstance::new(
            WsInstance::new(eps_b.clone(), inst_a.base().chunks().clone()).unwrap(),
            inst_a.pi().to_vec(),
        )
        .unwrap();
        for kind in [ProtocolKind::EvenPaz, ProtocolKind::LastDiminisher, ProtocolKind::SeqScan] {
            let run = |inst: &JInstance, eps: &Rational| {
                let measures = inst.measures();
                let mut engine = Engine::new(measures.clone(), EngineMode::WoegingerSgall);
                let alloc = run_protocol(kind, &mut engine, Some(eps)).unwrap();
                let owners: Vec<usize> =
                    alloc.ordered_pieces().iter().map(|(p, _)| *p).collect();
                let proportional = check_proportional(&alloc, &measures).all_proportional;
                (skeleton(engine.transcript(), inst.n(), eps), owners, proportional)
            };
            let (sk_a, owners_a, prop_a) = run(&inst_a, &eps_a);
            let (sk_b, owners_b, prop_b) = run(&inst_b, &eps_b);
            assert_eq!(sk_a, sk_b, "{} transcript skeleton differs", kind.name());
            assert_eq!(owners_a, owners_b);
            assert!(prop_a && prop_b);
        }
    }
}

#[test]
fn monte_carlo_agrees_with_exact_analyzer() {
    let n = 3usize;
    let eps = default_epsilon(n);
    let exact = exact_expected_depth(&SeqScan::new(), n, &eps).unwrap();
    let exact_mean = exact.expected_cuts.to_f64();
    let trials = 100_000usize;
    let mut rng = ChaCha8Rng::seed_from_u64(314159);
    let mut sum = 0.0f64;
    let mut sum_sq = 0.0f64;
    for _ in 0..trials {
        let mut state = AdversaryState::new(n, &eps, &mut rng).unwrap();
        let out = run_primitive_on_adversary(&SeqScan::new(), &mut state, &mut rng).unwrap();
        let cuts = out.cuts as f64;
        sum += cuts;
        sum_sq += cuts * cuts;
    }
    let mean = sum / trials as f64;
    let variance = (sum_sq / trials as f64 - mean * mean).max(0.0);
    let stderr = (variance / trials as f64).sqrt();
    assert!(
        (mean - exact_mean).abs() <= 3.0 * stderr,
        "monte carlo mean {mean} vs exact {exact_mean} (3se = {})",
        3.0 * stderr
    );
}

#[test]
fn transformer_equivalence_on_the_engine() {
    // Beyond the exhaustive n=3 criterion: spot-check n=4 through the live
    // referee, including the allocation and the exact count identity.
    let n = 4usize;
    let eps = default_epsilon(n);
    for seed in [21u64, 22, 23] {
        let inst = sample(n, &eps, seed);
        let measures = inst.measures();

        let mut engine_a = Engine::new(measures.clone(), EngineMode::WoegingerSgall);
        let wrapped = SeqScan::with_confirmation();
        let (alloc_a, _) = run_primitive_on_engine(&&wrapped, &mut engine_a, &eps).unwrap();
        let (cuts_a, evals_a) = engine_a.transcript().query_counts();

        let mut engine_b = Engine::new(measures.clone(), EngineMode::WoegingerSgall);
        let transformed = transform_eval_to_cut(SeqScan::with_confirmation());
        let (alloc_b, _) = run_primitive_on_engine(&&transformed, &mut engine_b, &eps).unwrap();
        let (cuts_b, evals_b) = engine_b.transcript().query_counts();

        assert_eq!(alloc_a, alloc_b);
        assert!(evals_a > 0);
        assert_eq!(evals_b, 0);
        assert_eq!(cuts_b, cuts_a + evals_a);
        assert!(check_proportional(&alloc_b, &measures).all_proportional);
    }
}

#[test]
fn partial_query_prefix_keeps_the_distribution_uniform() {
    // The adversary remains uniform no matter when it is frozen: answer two
    // queries, then complete; every instance still has probability 1/|J|.
    let n = 3usize;
    let eps = default_epsilon(n);
    let prefix = [(1usize, 2usize), (3, 1)];
    let dist = exact_instance_distribution(n, &eps, &prefix).unwrap();
    let expected = Rational::one() / Rational::from_bigint(j_count(n));
    assert_eq!(num_bigint::BigInt::from(dist.len()), j_count(n));
    for (_, p) in dist {
        assert_eq!(p, expected);
    }
}

#[test]
fn ws_mode_rejects_leftover_gaps_from_misbehaving_protocols() {
    // A protocol that forgets the last piece faults at finalize; the failure
    // is a protocol fault, not an unfairness verdict.
    let n = 2;
    let eps = default_epsilon(n);
    let inst = sample(n, &eps, 3);
    let mut engine = Engine::new(inst.measures(), EngineMode::WoegingerSgall);
    let z = engine.cut(1, &Rational::new(1, 2)).unwrap();
    engine.assign(1, &Rational::zero(), &z).unwrap();
    assert!(engine.finalize().is_err());
}
