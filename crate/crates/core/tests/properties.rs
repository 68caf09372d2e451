mod common;

use bidb::compact::{rank_chains, find_candidates, list_ranking_transform, simplify, simplify_with, RankStrategy};
use bidb::extsort::{ooc_biconstruct, ExtConfig};
use bidb::graph::brute_force_build;
use bidb::io::{gfa_string, read_gfa, read_graph, write_graph};
use bidb::parsim::par_biconstruct;
use bidb::{biconstruct, ReadSet};
use proptest::prelude::*;

fn reads() -> impl Strategy<Value = (usize, Vec<String>)> {
    (prop::sample::select(vec![3usize, 5, 7, 9]), 1usize..12).prop_flat_map(|(k, n)| {
        let read = prop::collection::vec(prop::sample::select(vec!['A', 'C', 'G', 'T']), k + 1..40)
            .prop_map(|v| v.into_iter().collect::<String>());
        (Just(k), prop::collection::vec(read, n))
    })
}

fn small_ext(dir: &std::path::Path) -> ExtConfig {
    ExtConfig::new(2048, 128).with_spill_dir(dir)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn every_build_mode_equals_the_definition((k, seqs) in reads(), p in 1usize..6) {
        let rs = ReadSet::from_seqs(&seqs);
        let want = brute_force_build(&rs, k).unwrap();
        prop_assert_eq!(&biconstruct(&rs, k).unwrap().0, &want);
        prop_assert_eq!(&par_biconstruct(&rs, k, p).unwrap().0, &want);
        let d = tempfile::tempdir().unwrap();
        prop_assert_eq!(&ooc_biconstruct(&rs, k, &small_ext(d.path())).unwrap().0, &want);
        prop_assert_eq!(std::fs::read_dir(d.path()).unwrap().count(), 0);
    }

    #[test]
    fn rankers_agree_and_simplify_is_idempotent((k, seqs) in reads()) {
        let g = biconstruct(&ReadSet::from_seqs(&seqs), k).unwrap().0;
        let c = find_candidates(&list_ranking_transform(&g));
        let d = tempfile::tempdir().unwrap();
        let strategies = [
            RankStrategy::Sequential,
            RankStrategy::Parallel { workers: 4 },
            RankStrategy::OutOfCore(small_ext(d.path())),
        ];
        let base = rank_chains(&g, &c, &strategies[0]).unwrap().0;
        let s = simplify(&g);
        for st in &strategies[1..] {
            prop_assert_eq!(&rank_chains(&g, &c, st).unwrap().0, &base);
            prop_assert_eq!(&simplify_with(&g, st).unwrap().0, &s);
        }
        prop_assert_eq!(&simplify(&s), &s);
        prop_assert!(s.node_count() <= g.node_count());
        let members: u64 = s.member_counts().iter().map(|&m| m as u64).sum();
        prop_assert_eq!(members, g.node_count() as u64);
    }

    #[test]
    fn files_round_trip((k, seqs) in reads()) {
        let g = biconstruct(&ReadSet::from_seqs(&seqs), k).unwrap().0;
        let d = tempfile::tempdir().unwrap();
        for h in [g.clone(), simplify(&g)] {
            let gfa = d.path().join("g.gfa");
            std::fs::write(&gfa, gfa_string(&h)).unwrap();
            prop_assert_eq!(&read_gfa(&gfa).unwrap(), &h);
            let bin = d.path().join("g.bdbg");
            write_graph(&h, &bin).unwrap();
            prop_assert_eq!(&read_graph(&bin).unwrap(), &h);
        }
    }
}
