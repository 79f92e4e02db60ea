//! Randomized invariants across graph operations, centralities, sweeps
//! and transition analysis.

use popcent::analysis;
use popcent::centrality::{self, Measure};
use popcent::graph::{self, Graph, NodeMeta, NodeTable};
use popcent::spectral;
use popcent::sweep::{self, SweepOptions};
use proptest::prelude::*;

fn arb_graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (1..=max_n).prop_flat_map(|n| {
        prop::collection::vec((0..n as u32, 0..n as u32), 0..3 * n).prop_map(move |e| Graph::from_edges(n, e).0)
    })
}

fn arb_graph_with_pops(max_n: usize) -> impl Strategy<Value = (Graph, Vec<f64>)> {
    arb_graph(max_n).prop_flat_map(|g| {
        let n = g.node_count();
        // whole numbers make threshold boundaries common
        let pop = prop_oneof![(0u32..=100).prop_map(f64::from), 0.0f64..=100.0];
        (Just(g), prop::collection::vec(pop, n))
    })
}

fn permute(g: &Graph, perm: &[usize]) -> Graph {
    Graph::from_edges(g.node_count(), g.edges().map(|(u, v)| (perm[u] as u32, perm[v] as u32))).0
}

fn labelled(pops: &[f64]) -> NodeTable {
    NodeTable::new(
        pops.iter()
            .enumerate()
            .map(|(i, &p)| NodeMeta::new(i.to_string(), p).with_group(["a", "b", "c"][i % 3]))
            .collect(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn built_graphs_satisfy_invariants(g in arb_graph(40)) {
        prop_assert!(g.check_invariants().is_ok());
        let total: usize = (0..g.node_count()).map(|i| g.degree(i)).sum();
        prop_assert_eq!(total, 2 * g.edge_count());
    }

    #[test]
    fn threshold_zero_is_identity((g, pops) in arb_graph_with_pops(30)) {
        let (sub, map) = graph::induce_by_popularity(&g, &NodeTable::from_popularity(&pops), 0.0);
        prop_assert_eq!(&sub, &g);
        prop_assert!((0..g.node_count()).all(|i| map.to_old(i) == i));
    }

    #[test]
    fn threshold_composition((g, pops) in arb_graph_with_pops(30), t1 in 0.0f64..100.0, dt in 0.0f64..50.0) {
        let meta = NodeTable::from_popularity(&pops);
        let t2 = t1 + dt;
        let (s1, m1) = graph::induce_by_popularity(&g, &meta, t1);
        let (s12, m12) = graph::induce_by_popularity(&s1, &meta.restrict(&m1), t2);
        let (s2, m2) = graph::induce_by_popularity(&g, &meta, t2);
        prop_assert_eq!(&s12, &s2);
        let composed = m1.compose(&m12);
        prop_assert_eq!(composed.new_to_old().collect::<Vec<_>>(), m2.new_to_old().collect::<Vec<_>>());
    }

    #[test]
    fn snowball_finds_the_component(g in arb_graph(30), seed in 0usize..30) {
        let seed = seed % g.node_count();
        let (sub, map) = graph::snowball_sample(&g, seed, None).unwrap();
        let (labels, _) = g.components();
        let members: Vec<usize> = (0..g.node_count()).filter(|&i| labels[i] == labels[seed]).collect();
        prop_assert_eq!(map.new_to_old().collect::<Vec<_>>(), members);
        prop_assert!(sub.is_connected());
    }

    #[test]
    fn lcc_is_connected_and_largest(g in arb_graph(30)) {
        let (lcc, _) = graph::largest_connected_component(&g);
        let (labels, count) = g.components();
        let largest = (0..count as u32).map(|c| labels.iter().filter(|&&l| l == c).count()).max().unwrap_or(0);
        prop_assert_eq!(lcc.node_count(), largest);
        prop_assert!(lcc.is_connected());
    }

    #[test]
    fn homophily_is_affine_invariant((g, pops) in arb_graph_with_pops(25), scale in 0.01f64..100.0, shift in -50.0f64..50.0) {
        let moved: Vec<f64> = pops.iter().map(|p| scale * p + shift).collect();
        match (graph::attribute_assortativity(&g, &pops), graph::attribute_assortativity(&g, &moved)) {
            (Ok(a), Ok(b)) => prop_assert!((a - b).abs() < 1e-9),
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "{:?} vs {:?}", a, b),
        }
    }

    #[test]
    fn centralities_are_permutation_equivariant(g in arb_graph(16), perm_seed in any::<u64>()) {
        let n = g.node_count();
        let mut perm: Vec<usize> = (0..n).collect();
        // Fisher–Yates from a splitmix stream
        let mut s = perm_seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        let h = permute(&g, &perm);
        let close_ok = g.is_connected();
        for m in Measure::ALL {
            let run = |x: &Graph| -> Option<Vec<f64>> {
                match m {
                    Measure::Degree => Some(centrality::degree_centrality(x).scores),
                    Measure::Closeness if close_ok => Some(centrality::closeness_centrality(x, 100).unwrap().scores),
                    Measure::Closeness => None,
                    Measure::Betweenness => Some(centrality::betweenness_centrality(x, 100).unwrap().scores),
                    Measure::Pagerank => Some(centrality::pagerank(x, 0.85, 1e-13, 10_000).unwrap().scores),
                    // the dominant eigenvector is only unique on connected graphs
                    Measure::Eigenvector if close_ok && x.edge_count() > 0 => {
                        Some(centrality::eigenvector_centrality(x, 1e-12, 100_000).unwrap().scores)
                    }
                    Measure::Eigenvector => None,
                }
            };
            if let (Some(a), Some(b)) = (run(&g), run(&h)) {
                for i in 0..n {
                    prop_assert!((a[i] - b[perm[i]]).abs() < 1e-8, "{} node {}", m, i);
                }
            }
        }
    }

    #[test]
    fn pagerank_is_a_distribution(g in arb_graph(40), d in 0.05f64..0.95) {
        let pr = centrality::pagerank(&g, d, 1e-12, 10_000).unwrap();
        prop_assert!((pr.scores.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!(pr.scores.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn detect_transition_is_scale_invariant(
        pairs in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 1..30),
        c in 0.001f64..1000.0,
    ) {
        let grid: Vec<u32> = (0..pairs.len() as u32).collect();
        let (a, b): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let a2: Vec<f64> = a.iter().map(|x| x * c).collect();
        let b2: Vec<f64> = b.iter().map(|x| x * c).collect();
        prop_assert_eq!(
            analysis::detect_transition(&grid, &a, &b, None).unwrap(),
            analysis::detect_transition(&grid, &a2, &b2, None).unwrap()
        );
    }

    #[test]
    fn curvature_is_nonnegative(ga in -50.0f64..50.0, gb in -50.0f64..50.0, present in any::<bool>()) {
        let fit = |g: f64| analysis::LogisticFit { amplitude: 1.0, growth: g, midpoint: 0.0, residual: 0.0, converged: true, evaluations: 1 };
        let c = analysis::curvature(&fit(ga), &fit(gb), present).unwrap();
        prop_assert!(c >= 0.0);
        if !present {
            prop_assert_eq!(c, 0.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn sweep_invariants((g, pops) in arb_graph_with_pops(30)) {
        let meta = labelled(&pops);
        let groups: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let opts = SweepOptions::default().with_measures([Measure::Eigenvector, Measure::Degree]);
        let grid: Vec<u32> = (0..=100).step_by(10).collect();
        let res = sweep::threshold_sweep(&g, &meta, &groups, &grid, &opts).unwrap();
        for w in res.records.windows(2) {
            prop_assert!(w[1].node_count <= w[0].node_count);
            prop_assert!(w[1].edge_count <= w[0].edge_count);
        }
        for (i, r) in res.records.iter().enumerate() {
            if let Some(&l1) = r.eigenvalues.first() {
                if l1 > 0.0 {
                    prop_assert_eq!(r.normalized_eigenvalues[0], 1.0);
                }
            }
            if r.normalized_eigenvalues.len() >= 2 {
                let ratio = r.normalized_eigenvalues[1];
                prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&ratio));
                let (sub, _) = graph::induce_by_popularity(&g, &meta, grid[i] as f64);
                let (lcc, _) = graph::largest_connected_component(&sub);
                let s = spectral::top_k_spectrum(&lcc, opts.k_eigs.min(lcc.node_count()), opts.tol, opts.max_iter).unwrap();
                prop_assert_eq!(spectral::eigen_gap(&s).unwrap(), ratio);
            }
            // Σ_groups |group| · mean = Σ over the LCC of the centrality vector
            let weighted: f64 = r.groups.iter().map(|s| s.get("size").unwrap() * s.get("mean_eigencentrality").unwrap()).sum();
            let (sub, _) = graph::induce_by_popularity(&g, &meta, grid[i] as f64);
            let (lcc, _) = graph::largest_connected_component(&sub);
            let direct: f64 = centrality::eigenvector_centrality(&lcc, opts.tol, opts.max_iter)
                .map(|c| c.scores.iter().sum())
                .unwrap_or(0.0);
            prop_assert!((weighted - direct).abs() < 1e-9, "{} vs {}", weighted, direct);
        }
        // records are threshold-local
        for &t in &[0u32, 50, 100] {
            let single = sweep::threshold_sweep(&g, &meta, &groups, &[t], &opts).unwrap();
            prop_assert_eq!(&single.records[0], res.record(t).unwrap());
        }
    }
}

#[test]
fn star_degree_assortativity_is_minus_one() {
    for leaves in 2..30u32 {
        let g = Graph::from_edges(leaves as usize + 1, (1..=leaves).map(|l| (0, l))).0;
        assert!((graph::degree_assortativity(&g).unwrap() + 1.0).abs() < 1e-12);
    }
}

#[test]
fn vertex_transitive_graphs_score_uniformly() {
    let cycle = |n: u32| Graph::from_edges(n as usize, (0..n).map(|i| (i, (i + 1) % n))).0;
    let complete = |n: u32| Graph::from_edges(n as usize, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)))).0;
    for g in [cycle(5), cycle(8), complete(4), complete(7)] {
        let n = g.node_count();
        for m in Measure::ALL {
            let s = match m {
                Measure::Degree => centrality::degree_centrality(&g).scores,
                Measure::Closeness => centrality::closeness_centrality(&g, 100).unwrap().scores,
                Measure::Betweenness => centrality::betweenness_centrality(&g, 100).unwrap().scores,
                Measure::Eigenvector => centrality::eigenvector_centrality(&g, 1e-12, 100_000).unwrap().scores,
                Measure::Pagerank => {
                    let pr = centrality::pagerank(&g, 0.85, 1e-13, 10_000).unwrap().scores;
                    assert!(pr.iter().all(|&x| (x - 1.0 / n as f64).abs() < 1e-9));
                    pr
                }
            };
            assert!(s.iter().all(|&x| (x - s[0]).abs() < 1e-9), "{m} on n = {n}");
        }
    }
}
