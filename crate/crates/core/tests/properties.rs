use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sdglab_core::decomposition::{decompose, lightness_trace_from, max_rounds, verify_certificate, HamMode};
use sdglab_core::disk_graph::{build_sdg, build_sdg_graph, RangeAssignment};
use sdglab_core::graph::{kruskal_msf, tree_parameters, Edge, Forest, RootedTree, WeightedGraph};
use sdglab_core::hamiltonian::{Exactness, HamPath};
use sdglab_core::instances::{gen_random_euclidean, gen_random_matrix_metric};
use sdglab_core::metric::{Metric, Norm};
use sdglab_core::range_assignment::bounded_assignment;

fn metric(seed: u64, n: usize, kind: u8) -> Metric {
    match kind % 4 {
        0 => gen_random_euclidean(n, 2, Norm::P(2.0), seed).unwrap(),
        1 => gen_random_euclidean(n, 1, Norm::P(1.0), seed).unwrap(),
        2 => gen_random_euclidean(n, 3, Norm::Max, seed).unwrap(),
        _ => gen_random_matrix_metric(n, seed).unwrap(),
    }
}

/// Ranges anywhere in `[0, diameter]`, so that most path edges fall outside the disk graph.
fn wild_ranges(m: &Metric, rng: &mut ChaCha8Rng) -> RangeAssignment {
    let hi = m.diameter().unwrap();
    RangeAssignment::new((0..m.n()).map(|_| if rng.gen_bool(0.1) { 0.0 } else { rng.gen_range(0.0..=hi) }).collect())
        .unwrap()
}

fn random_path(m: &Metric, rng: &mut ChaCha8Rng) -> HamPath {
    let mut order: Vec<usize> = (0..m.n()).collect();
    order.shuffle(rng);
    HamPath::from_order(m, order, Exactness::Approx).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn certificates_verify_for_any_path(seed: u64, n in 2usize..48, kind: u8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = metric(seed, n, kind);
        let r = wild_ranges(&m, &mut rng);
        let h = random_path(&m, &mut rng);
        let f = kruskal_msf(&build_sdg(&m, &r).unwrap());
        let cert = decompose(&m, &r, &f, &h).unwrap();
        prop_assert_eq!(verify_certificate(&m, &r, &f, &h, &cert), vec![]);
        prop_assert!(cert.isolated.len() >= n.div_ceil(5));
    }

    #[test]
    fn traces_check_for_any_path(seed: u64, n in 1usize..60, kind: u8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = if n == 1 { Metric::from_matrix(vec![vec![0.0]]).unwrap() } else { metric(seed, n, kind) };
        let r = if n == 1 { RangeAssignment::constant(1, 0.0).unwrap() } else { wild_ranges(&m, &mut rng) };
        let t = lightness_trace_from(&m, &r, random_path(&m, &mut rng)).unwrap();
        prop_assert!(t.rounds.len() <= max_rounds(n));
        prop_assert_eq!(t.check(&m, &r), vec![]);
    }

    #[test]
    fn larger_ranges_only_add_edges(seed: u64, n in 2usize..30, kind: u8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = metric(seed, n, kind);
        let small = wild_ranges(&m, &mut rng);
        let big = RangeAssignment::new(small.radii().iter().map(|r| r + rng.gen_range(0.0..1.0)).collect()).unwrap();
        let (gs, gb) = (build_sdg(&m, &small).unwrap(), build_sdg(&m, &big).unwrap());
        prop_assert!(gs.edge_keys().is_subset(&gb.edge_keys()));
    }

    #[test]
    fn metric_and_graph_modes_agree(seed: u64, n in 2usize..30, kind: u8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = metric(seed, n, kind);
        let r = wild_ranges(&m, &mut rng);
        prop_assert_eq!(build_sdg(&m, &r).unwrap(), build_sdg_graph(&WeightedGraph::complete(&m), &r).unwrap());
    }

    #[test]
    fn assignment_feasible_and_double_counted(seed: u64, n in 2usize..40, kind: u8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = metric(seed, n, kind);
        let bounds = wild_ranges(&m, &mut rng);
        let rep = bounded_assignment(&m, &bounds).unwrap();
        let t = kruskal_msf(&build_sdg(&m, &bounds).unwrap());
        let mine = kruskal_msf(&build_sdg(&m, &rep.ranges).unwrap());
        prop_assert!(rep.feasible);
        prop_assert!(rep.ranges.radii().iter().zip(bounds.radii()).all(|(a, b)| a <= b));
        prop_assert_eq!(mine.components(), t.components());
        prop_assert!(rep.cost <= 2.0 * rep.w_t);
        // Equality exactly when every tree edge is the maximum at both of its ends.
        let tight = t.edges().iter().all(|e| rep.ranges.get(e.u) == e.w && rep.ranges.get(e.v) == e.w);
        let sum = sdglab_core::weight::exact_total(t.edges().iter().flat_map(|e| [e.w, e.w]));
        prop_assert_eq!(tight, rep.cost == sum);
    }

    #[test]
    fn tree_parameters_match_all_pairs(seed: u64, n in 2usize..24, root_pick: usize) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let edges: Vec<Edge> = (1..n).map(|v| Edge::new(rng.gen_range(0..v), v, rng.gen_range(1..=100) as f64)).collect();
        let mut labels: Vec<usize> = (0..n).collect();
        labels.shuffle(&mut rng);
        let edges: Vec<Edge> = edges.into_iter().map(|e| Edge::new(labels[e.u], labels[e.v], e.w)).collect();
        let root = root_pick % n;
        let tree = RootedTree::new(Forest::from_edges(n, edges.clone()).unwrap(), root).unwrap();
        let p = tree_parameters(&tree);

        // All-pairs distances by repeated relaxation over tree edges.
        let mut dist = vec![vec![f64::INFINITY; n]; n];
        let mut hops = vec![vec![f64::INFINITY; n]; n];
        for v in 0..n {
            dist[v][v] = 0.0;
            hops[v][v] = 0.0;
        }
        for _ in 0..n {
            for e in &edges {
                for s in 0..n {
                    for (a, b) in [(e.u, e.v), (e.v, e.u)] {
                        dist[s][b] = dist[s][b].min(dist[s][a] + e.w);
                        hops[s][b] = hops[s][b].min(hops[s][a] + 1.0);
                    }
                }
            }
        }
        let mut degree = vec![0usize; n];
        for e in &edges {
            degree[e.u] += 1;
            degree[e.v] += 1;
        }
        let max = |rows: &Vec<Vec<f64>>| rows.iter().flatten().copied().fold(0.0, f64::max);
        let pair_sum = |rows: &Vec<Vec<f64>>| {
            (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).map(|(a, b)| rows[a][b]).sum::<f64>()
        };
        prop_assert_eq!(p.degree, degree.into_iter().max().unwrap());
        prop_assert_eq!(p.radius, dist[root].iter().copied().fold(0.0, f64::max));
        prop_assert_eq!(p.depth, hops[root].iter().copied().fold(0.0, f64::max));
        prop_assert_eq!(p.diameter, max(&dist));
        prop_assert_eq!(p.hop_diameter, max(&hops));
        prop_assert_eq!(p.sum_pairwise, pair_sum(&dist));
        prop_assert_eq!(p.sum_pairwise_unweighted, pair_sum(&hops));
        prop_assert_eq!(p.sum_single, dist[root].iter().sum::<f64>());
        prop_assert_eq!(p.sum_single_unweighted, hops[root].iter().sum::<f64>());
    }
}

#[test]
fn hundred_point_trace_stays_within_round_limit() {
    let m = gen_random_euclidean(100, 2, Norm::P(2.0), 100).unwrap();
    let r = RangeAssignment::constant(100, m.diameter().unwrap()).unwrap();
    let t = sdglab_core::decomposition::lightness_trace(&m, &r, HamMode::Approx).unwrap();
    assert!(t.rounds.len() <= 21);
    assert!(t.check(&m, &r).is_empty());
}
