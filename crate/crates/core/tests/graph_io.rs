mod common;

use ocd_core::cover::cover_to_string;
use ocd_core::{load_cover, load_edge_list, Cover, Error, IdMap};
use proptest::prelude::*;

#[test]
fn karate_shape() {
    let g = common::karate();
    assert_eq!((g.n(), g.m()), (34, 78));
    assert!(!g.is_directed() && g.is_weakly_connected());
    let degrees: usize = (0..34).map(|u| g.degree(u)).sum();
    assert_eq!(degrees, 156);
    assert_eq!(g.degree(33), 17);
    assert_eq!(g.degree(0), 16);
}

#[test]
fn undirected_adjacency_is_symmetric() {
    let g = common::karate();
    for u in 0..g.n() {
        for v in 0..g.n() {
            assert_eq!(g.adjacency(u, v), g.adjacency(v, u));
        }
    }
}

#[test]
fn self_loop_reports_line() {
    let err = load_edge_list("0 1\n# note\n2 2\n".as_bytes(), false, false).unwrap_err();
    assert!(matches!(err, Error::SelfLoop { line: 3, .. }));
}

#[test]
fn weight_column_rejected() {
    assert!(matches!(load_edge_list("0 1 0.5\n".as_bytes(), false, false), Err(Error::Parse { line: 1, .. })));
}

#[test]
fn sparse_ids_reindexed_in_order() {
    let g = load_edge_list("10 30\n30 20\n".as_bytes(), true, false).unwrap();
    assert_eq!(g.n(), 3);
    assert_eq!(g.ids().external(0), 10);
    assert_eq!(g.ids().lookup(30), Some(2));
    assert!(g.has_arc(2, 1) && !g.has_arc(1, 2));
}

#[test]
fn duplicate_edges_collapse() {
    let g = load_edge_list("0 1\n1 0\n0 1\n1 2\n".as_bytes(), false, false).unwrap();
    assert_eq!(g.m(), 2);
    let d = load_edge_list("0 1\n1 0\n0 1\n".as_bytes(), true, false).unwrap();
    assert_eq!(d.m(), 2);
}

fn edge_lines() -> impl Strategy<Value = Vec<(u8, u8)>> {
    prop::collection::vec((0u8..15, 0u8..15), 1..40)
        .prop_map(|v| v.into_iter().filter(|(a, b)| a != b).collect::<Vec<_>>())
        .prop_filter("needs an edge", |v| !v.is_empty())
}

proptest! {
    #[test]
    fn line_order_irrelevant(edges in edge_lines(), directed in any::<bool>(), seed in any::<u64>()) {
        let text: String = edges.iter().map(|(a, b)| format!("{a} {b}\n")).collect();
        let mut shuffled = edges.clone();
        use rand::seq::SliceRandom;
        shuffled.shuffle(&mut common::rng(seed));
        let other: String = shuffled.iter().map(|(a, b)| format!("{a}\t{b}\n")).collect();
        let g1 = load_edge_list(text.as_bytes(), directed, false).unwrap();
        let g2 = load_edge_list(other.as_bytes(), directed, false).unwrap();
        prop_assert_eq!(g1, g2);
    }

    #[test]
    fn cover_round_trip(
        groups in prop::collection::vec(prop::collection::btree_set(0usize..20, 1..8), 1..6),
        one_indexed in any::<bool>(),
    ) {
        let n = 20;
        let mut groups: Vec<Vec<usize>> = groups.into_iter().map(|s| s.into_iter().collect()).collect();
        // every vertex in some community so the reloaded universe matches
        groups.push((0..n).collect());
        let cover = Cover::new(n, groups).unwrap();
        let text = cover_to_string(&cover, &IdMap::contiguous(n, one_indexed), one_indexed);
        let back = load_cover(text.as_bytes(), one_indexed).unwrap();
        prop_assert_eq!(back, cover);
    }
}
