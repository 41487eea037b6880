mod common;

use std::collections::VecDeque;

use mrflow::frontend::Event;
use mrflow::graph::{build_ssa_graph, compile, insert_resamplers, NodeRef, PipelineGraph};
use mrflow::reference::{compare_outputs, run_bufferwise};
use mrflow::sim::{min_fifo_depths, simulate, Capacities, SimOptions};
use mrflow::ElementKind;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn acyclic(g: &PipelineGraph) -> bool {
    let ns = g.spaces().len();
    let n = ns + g.processes().len();
    let index = |r: NodeRef| match r {
        NodeRef::Space(s) => s.0,
        NodeRef::Process(p) => ns + p.0,
    };
    let mut indegree = vec![0usize; n];
    let mut succ = vec![Vec::new(); n];
    for e in g.edges() {
        indegree[index(e.to)] += 1;
        succ[index(e.from)].push(index(e.to));
    }
    let mut queue: VecDeque<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut seen = 0;
    while let Some(i) = queue.pop_front() {
        seen += 1;
        for &j in &succ[i] {
            indegree[j] -= 1;
            if indegree[j] == 0 {
                queue.push_back(j);
            }
        }
    }
    seen == n
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn graph_invariants(seed in any::<u64>()) {
        let prog = common::random_program(&mut ChaCha8Rng::seed_from_u64(seed));
        let writes = prog
            .trace
            .events()
            .iter()
            .filter(|e| matches!(e, Event::Launch { .. } | Event::TransferIn { .. }))
            .count();
        prop_assert_eq!(build_ssa_graph(&prog.trace).unwrap().spaces().len(), writes);

        let mut g = compile(&prog.trace).unwrap();
        for e in g.edges() {
            let bipartite = matches!(
                (e.from, e.to),
                (NodeRef::Space(_), NodeRef::Process(_)) | (NodeRef::Process(_), NodeRef::Space(_))
            );
            prop_assert!(bipartite);
        }
        prop_assert!(acyclic(&g));
        for s in g.spaces() {
            prop_assert_eq!(g.producers(s.id).len(), 1);
            prop_assert_eq!(g.consumers(s.id).len(), 1);
        }
        for p in g.processes() {
            prop_assert_eq!(p.ii, 4u64.pow(p.level.unwrap() as u32));
        }
        let before = g.to_json();
        prop_assert_eq!(insert_resamplers(&mut g).unwrap(), 0);
        prop_assert_eq!(g.to_json(), before);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn streamed_equals_buffered(seed in any::<u64>()) {
        let prog = common::random_program(&mut ChaCha8Rng::seed_from_u64(seed));
        let g = compile(&prog.trace).unwrap();
        let depths = min_fifo_depths(&g, 10_000_000).unwrap();
        let report = simulate(
            &g,
            &SimOptions {
                capacities: depths.as_capacities(),
                inputs: Some(&prog.inputs),
                ..SimOptions::default()
            },
        )
        .unwrap();
        prop_assert!(report.deadlock.is_none());
        let want = run_bufferwise(&prog.trace, &prog.inputs).unwrap();
        prop_assert_eq!(report.outputs.len(), want.len());
        for (a, b) in report.outputs.iter().zip(&want) {
            prop_assert_eq!(a.event, b.event);
            let c = compare_outputs(&a.image, &b.image).unwrap();
            match a.image.kind() {
                ElementKind::U8 => prop_assert!(c.elementwise_equal, "{:?}", c),
                ElementKind::F32 => prop_assert!(c.max_rel <= 1e-5, "{:?}", c),
            }
        }
    }

    #[test]
    fn enlarging_a_channel_never_hurts(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let prog = common::random_program(&mut rng);
        let g = compile(&prog.trace).unwrap();
        let depths = min_fifo_depths(&g, 10_000_000).unwrap();
        let mut caps: Vec<Option<usize>> = depths
            .depths
            .iter()
            .map(|&d| Some(rng.gen_range(1..=d.max(1))))
            .collect();
        let run = |caps: &[Option<usize>]| {
            simulate(
                &g,
                &SimOptions {
                    capacities: Capacities::PerSpace(caps.to_vec()),
                    max_cycles: 10_000_000,
                    ..SimOptions::default()
                },
            )
            .unwrap()
        };
        let base = run(&caps);
        let ch = rng.gen_range(0..caps.len());
        caps[ch] = caps[ch].map(|c| c + rng.gen_range(1..=8));
        let grown = run(&caps);
        if base.deadlock.is_none() {
            prop_assert!(grown.deadlock.is_none());
            prop_assert!(grown.makespan_cycles <= base.makespan_cycles);
        }
        prop_assert!(grown.makespan_cycles >= depths.makespan_cycles || grown.deadlock.is_some());
    }
}
