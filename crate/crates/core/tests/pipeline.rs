use proptest::prelude::*;

use streamwalk::graph_stream::{DirectedGraph, EdgeOrder, EdgeStream, Sign, Update};
use streamwalk::instance_gen::{gen_complete, gen_random_graph};
use streamwalk::oracle::{exact_walk_distribution, tv_distance, EmpiricalWalks};
use streamwalk::rng::derive_seed;
use streamwalk::turnstile::turnstile_pipeline;
use streamwalk::two_pass::{run_pipeline, TwoPassConfig};
use streamwalk::WalkOutcome;

fn is_walk_on(g: &DirectedGraph, walk: &[usize]) -> bool {
    walk.windows(2).all(|e| g.contains((e[0], e[1])))
}

#[test]
fn turnstile_matches_exact_law_after_deletions() {
    let g = gen_complete(3, false);
    let mut updates: Vec<Update> = Vec::new();
    // self-loops come and go before the real edges arrive
    for v in 0..3 {
        updates.push(Update { edge: (v, v), sign: Sign::Insert });
    }
    updates.extend(g.edges().iter().map(|&edge| Update { edge, sign: Sign::Insert }));
    for v in 0..3 {
        updates.push(Update { edge: (v, v), sign: Sign::Delete });
    }
    let stream = EdgeStream::turnstile(3, updates).unwrap();
    let steps = 3;
    let delta = 0.1;
    let exact = exact_walk_distribution(&g, 0, steps).unwrap();
    let mut walks = EmpiricalWalks::new();
    let runs = 4000;
    let mut failures = 0u64;
    for r in 0..runs {
        let config = TwoPassConfig::new(steps, delta, derive_seed(40, &[r]));
        let (outcome, _) = turnstile_pipeline(&stream, 0, &config).unwrap();
        match outcome {
            WalkOutcome::Walk(w) => walks.record(w.vertices()),
            WalkOutcome::Failure { .. } => failures += 1,
        }
    }
    let fail = failures as f64 / runs as f64;
    let tv = tv_distance(&exact, &walks);
    let total = tv.estimate * (1.0 - fail) + fail;
    assert!(total <= delta + tv.radius, "tv {total} radius {}", tv.radius);
}

#[test]
fn two_pass_law_on_complete_graph() {
    let g = gen_complete(4, false);
    let stream = EdgeStream::from_graph(&g, &EdgeOrder::AsGiven, 0).unwrap();
    let exact = exact_walk_distribution(&g, 1, 3).unwrap();
    let mut walks = EmpiricalWalks::new();
    let mut failures = 0;
    for r in 0..20_000u64 {
        let run = run_pipeline(&stream.handle(), 1, &TwoPassConfig::new(3, 0.05, derive_seed(41, &[r]))).unwrap();
        match run.outcome {
            WalkOutcome::Walk(w) => walks.record(w.vertices()),
            WalkOutcome::Failure { .. } => failures += 1,
        }
    }
    let fail = failures as f64 / 20_000.0;
    let tv = tv_distance(&exact, &walks);
    assert!(tv.estimate * (1.0 - fail) + fail <= 0.05 + tv.radius);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn two_pass_walks_follow_edges(n in 1usize..7, d in 1usize..7, steps in 0usize..12, seed: u64) {
        let d = d.min(n);
        let g = gen_random_graph(n, d, seed).unwrap();
        let stream = EdgeStream::from_graph(&g, &EdgeOrder::AsGiven, 0).unwrap();
        let start = (seed % n as u64) as usize;
        let run = run_pipeline(&stream.handle(), start, &TwoPassConfig::new(steps.max(1), 0.1, seed)).unwrap();
        if let WalkOutcome::Walk(w) = run.outcome {
            let v = w.vertices();
            prop_assert_eq!(v.len(), steps.max(1) + 1);
            prop_assert_eq!(v[0], start);
            prop_assert!(is_walk_on(&g, v));
        }
        prop_assert_eq!(run.report.pass_count, 2);
    }

    #[test]
    fn turnstile_walks_follow_net_edges(n in 1usize..6, d in 1usize..6, seed: u64) {
        let d = d.min(n);
        let g = gen_random_graph(n, d, seed).unwrap();
        let mut updates: Vec<Update> = g.edges().iter().map(|&edge| Update { edge, sign: Sign::Insert }).collect();
        for u in 0..n {
            for v in 0..n {
                if !g.contains((u, v)) {
                    updates.insert(0, Update { edge: (u, v), sign: Sign::Insert });
                    updates.push(Update { edge: (u, v), sign: Sign::Delete });
                }
            }
        }
        let stream = EdgeStream::turnstile(n, updates).unwrap();
        let config = TwoPassConfig { c1: 4.0, ..TwoPassConfig::new(4, 0.1, seed) };
        let (outcome, pre) = turnstile_pipeline(&stream, 0, &config).unwrap();
        if let WalkOutcome::Walk(w) = outcome {
            prop_assert!(is_walk_on(&g, w.vertices()));
        }
        prop_assert_eq!(pre.report.pass_count, 2);
    }
}
