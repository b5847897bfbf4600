//! Cross-checks between the exact matchers, the greedy/random-greedy
//! oracles, and their local simulations.

use matchest::exact::{greedy_maximal_matching, hopcroft_karp, rgmm_global};
use matchest::graph::Graph;
use matchest::instances::{gen_gnm, gen_random_bipartite, shuffle_adjacency};
use matchest::local::rgmm_local_matched;
use proptest::prelude::*;

/// Independent brute-force maximum matching for tiny graphs.
fn brute_force_mu(n: usize, edges: &[(u32, u32)]) -> usize {
    fn go(edges: &[(u32, u32)], used: &mut [bool]) -> usize {
        for (i, &(u, v)) in edges.iter().enumerate() {
            if !used[u as usize] && !used[v as usize] {
                used[u as usize] = true;
                used[v as usize] = true;
                let take = 1 + go(&edges[i + 1..], used);
                used[u as usize] = false;
                used[v as usize] = false;
                return take.max(go(&edges[i + 1..], used));
            }
        }
        0
    }
    go(edges, &mut vec![false; n])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn exact_matcher_equals_brute_force(
        n in 2usize..11,
        seed in any::<u64>(),
        density in 0usize..5,
    ) {
        let max = n * (n - 1) / 2;
        let g = gen_gnm(n, max * density / 5, seed).unwrap();
        let edges = g.edges();
        prop_assert_eq!(hopcroft_karp(&g).size(), brute_force_mu(n, &edges));
    }

    #[test]
    fn greedy_is_maximal_and_half_optimal(n in 4usize..30, seed in any::<u64>()) {
        let max = n * (n - 1) / 2;
        let g = gen_gnm(n, max / 3, seed).unwrap();
        let edges = g.edges();
        let mv = greedy_maximal_matching(&edges, n);
        for &(u, v) in &edges {
            prop_assert!(mv.is_matched(u) || mv.is_matched(v));
        }
        prop_assert!(2 * mv.size() >= hopcroft_karp(&g).size());
    }

    #[test]
    fn rgmm_local_matches_global(n in 4usize..120, seed in any::<u64>()) {
        let g = gen_gnm(n, (n * 3).min(n * (n - 1) / 2), seed).unwrap();
        let global = rgmm_global(&g, seed ^ 0xABCD);
        for v in 0..n as u32 {
            prop_assert_eq!(
                rgmm_local_matched(&g, v, seed ^ 0xABCD).unwrap(),
                global.is_matched(v),
                "vertex {} (seed {})", v, seed
            );
        }
    }
}

/// Random-greedy results are a function of the edge set and seed only; the
/// stored adjacency order is irrelevant for both the global run and the
/// local oracle.
#[test]
fn rgmm_is_storage_order_invariant() {
    let g = gen_gnm(80, 240, 5).unwrap();
    for seed in 0..6u64 {
        let shuffled = shuffle_adjacency(&g, 900 + seed);
        let a = rgmm_global(&g, seed);
        let b = rgmm_global(&shuffled, seed);
        assert_eq!(a.edges(), b.edges());
        for v in 0..80u32 {
            assert_eq!(
                rgmm_local_matched(&g, v, seed).unwrap(),
                rgmm_local_matched(&shuffled, v, seed).unwrap()
            );
        }
    }
}

#[test]
fn bipartite_cover_certifies_on_random_graphs() {
    for seed in 0..10u64 {
        let g = gen_random_bipartite(20, 25, 0.15, seed).unwrap();
        let (mv, cover) = matchest::exact::hopcroft_karp_with_cover(&g).unwrap();
        assert_eq!(cover.len(), mv.size());
        assert!(matchest::exact::verify_vertex_cover(&g, &cover));
        mv.validate_in(&g).unwrap();
    }
}

#[test]
fn matcher_handles_structured_graphs() {
    // Odd cycle: floor(n/2).
    let n = 9u32;
    let edges: Vec<(u32, u32)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    let g = Graph::from_edges(n as usize, &edges).unwrap();
    assert_eq!(hopcroft_karp(&g).size(), 4);

    // Two triangles joined by a bridge: matching 3.
    let g =
        Graph::from_edges(6, &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (2, 3)]).unwrap();
    assert_eq!(hopcroft_karp(&g).size(), 3);
}
