//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::collections::HashSet;
use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use sdglab_core::decomposition::{
    decompose, ham_path, lightness_bound, lightness_trace_from, log54, max_rounds, verify_certificate,
    weight_coefficient, HamMode,
};
use sdglab_core::disk_graph::{build_sdg, udg_msf_containment, RangeAssignment};
use sdglab_core::experiments::{run_sweep, write_csv, SweepConfig};
use sdglab_core::graph::{
    cycle_property_check, kruskal_msf, metric_mst, tree_parameters, Edge, Forest, RootedTree, UnionFind,
    WeightedGraph,
};
use sdglab_core::hamiltonian::{approx_ham_path, exact_min_ham_path};
use sdglab_core::instances::{
    gen_c3, gen_chain_metric, gen_line_graph, gen_random_euclidean, gen_random_instance, gen_random_matrix_metric,
    gen_star_metric, line_coordinates, mix_seed, RangeMode, Space,
};
use sdglab_core::metric::{Metric, Norm};
use sdglab_core::range_assignment::bounded_assignment;
use sdglab_core::weight::{exact_total, ExactSum};

const BASE_SEED: u64 = 0x5D6_2024;
const SUITE_SIZE: u64 = 1040;

struct Outcome {
    failures: Vec<String>,
    detail: String,
}

impl Outcome {
    fn new() -> Self {
        Outcome { failures: Vec::new(), detail: String::new() }
    }

    fn fail(&mut self, msg: String) {
        self.failures.push(msg);
    }
}

fn spaces() -> Vec<Space> {
    let mut out = Vec::new();
    for d in [1, 2, 3, 5] {
        for p in [Norm::P(1.0), Norm::P(2.0), Norm::Max] {
            out.push(Space::Euclidean { d, p });
        }
    }
    out.push(Space::Matrix);
    out
}

struct Case {
    label: String,
    m: Metric,
    r: RangeAssignment,
}

/// Random metric instances: every space, both range modes, `n` in `5..=128`.
fn random_suite() -> Vec<Case> {
    let spaces = spaces();
    (0..SUITE_SIZE)
        .into_par_iter()
        .map(|i| {
            let seed = mix_seed(BASE_SEED, i);
            let k = i as usize;
            let space = spaces[k % spaces.len()];
            let mode = if (k / spaces.len()).is_multiple_of(2) { RangeMode::Uniform } else { RangeMode::Biased };
            let n = 5 + (mix_seed(seed, 1) % 124) as usize;
            let b = gen_random_instance(n, space, mode, seed).unwrap();
            Case { label: format!("random #{i} seed {seed} n={n} {space:?} {mode}"), m: b.metric().unwrap().clone(), r: b.ranges }
        })
        .collect()
}

/// The four fixed families over a range of sizes. The two graph families
/// are run on metrics containing them: the 1-D points of the line family and
/// the triangle at its metric boundary `W = 3`.
fn family_suite() -> Vec<Case> {
    let mut out = Vec::new();
    for n in 3..=40 {
        for b in [gen_star_metric(n).unwrap(), gen_chain_metric(n).unwrap()] {
            out.push(Case { label: format!("{:?} n={n}", b.family.unwrap()), m: b.metric().unwrap().clone(), r: b.ranges });
        }
    }
    for n in 4..=40 {
        let (w, eps) = (1000.0 * n as f64, 1.0 / (1000.0 * n as f64));
        let b = gen_line_graph(n, w, eps).unwrap();
        let pts = line_coordinates(n, w, eps).into_iter().map(|x| vec![x]).collect();
        out.push(Case { label: format!("line n={n}"), m: Metric::from_points(pts, Norm::P(2.0)).unwrap(), r: b.ranges });
    }
    let c3 = gen_c3(3.0).unwrap();
    let m = Metric::from_matrix(c3.graph().unwrap().as_complete_matrix().unwrap()).unwrap();
    out.push(Case { label: "c3 W=3".into(), m, r: c3.ranges });
    out
}

fn criterion_1(suite: &[Case]) -> Outcome {
    let mut o = Outcome::new();
    let mut worst: f64 = 0.0;
    for c in suite {
        let rep = weight_coefficient(&c.m, &c.r).unwrap();
        let bound = lightness_bound(c.m.n());
        worst = worst.max(rep.coefficient / bound);
        if rep.coefficient.is_nan() || rep.coefficient > bound {
            o.fail(format!("{}: coefficient {} > {bound}", c.label, rep.coefficient));
        }
    }
    o.detail = format!("{} instances, max coefficient/bound = {worst:.4}", suite.len());
    o
}

fn criterion_2(cases: &[&Case]) -> Outcome {
    let mut o = Outcome::new();
    let results: Vec<Option<String>> = cases
        .par_iter()
        .map(|c| {
            let h = ham_path(&c.m, HamMode::Auto).unwrap();
            let f = kruskal_msf(&build_sdg(&c.m, &c.r).unwrap());
            let cert = decompose(&c.m, &c.r, &f, &h).unwrap();
            let v = verify_certificate(&c.m, &c.r, &f, &h, &cert);
            // Independent restatement of the headline claims.
            let w = |list: &[[usize; 2]]| list.iter().map(|p| c.m.d(p[0], p[1])).collect::<Vec<_>>();
            let mut slack = ExactSum::new();
            slack.add_all(h.edges(&c.m).iter().map(|e| e.w));
            slack.sub_all(w(&cert.tilde_e));
            let mut star = ExactSum::new();
            star.add_all(w(&cert.star_h));
            star.sub_all(w(&cert.star_f));
            let per_index = cert.e2.iter().zip(&cert.tilde_e2).all(|(a, b)| c.m.d(b[0], b[1]) <= c.m.d(a[0], a[1]));
            let quota = cert.isolated.len() >= c.m.n().div_ceil(5);
            if !v.is_empty() {
                Some(format!("{}: {:?}", c.label, v))
            } else if slack.sign() == std::cmp::Ordering::Less || star.sign() == std::cmp::Ordering::Less || !per_index || !quota {
                Some(format!("{}: headline inequality failed", c.label))
            } else {
                None
            }
        })
        .collect();
    for f in results.into_iter().flatten() {
        o.fail(f);
    }
    o.detail = format!("{} certificates", cases.len());
    o
}

fn criterion_3(cases: &[&Case]) -> Outcome {
    let mut o = Outcome::new();
    let results: Vec<(usize, Option<String>)> = cases
        .par_iter()
        .map(|c| {
            let n = c.m.n();
            let t = lightness_trace_from(&c.m, &c.r, ham_path(&c.m, HamMode::Auto).unwrap()).unwrap();
            let v = t.check(&c.m, &c.r);
            let rounds_ok = t.rounds.len() <= max_rounds(n);
            let bound_ok = t.w_forest <= log54(n) * t.w_ham;
            let basis_ok = exact_total(t.basis.forest.iter().map(|e| e.w)) <= 3.0 * t.basis.w_path;
            let msg = (!v.is_empty() || !rounds_ok || !bound_ok || !basis_ok)
                .then(|| format!("{}: rounds {} max {} violations {:?}", c.label, t.rounds.len(), max_rounds(n), v));
            (t.rounds.len(), msg)
        })
        .collect();
    let most = results.iter().map(|r| r.0).max().unwrap_or(0);
    for f in results.into_iter().filter_map(|r| r.1) {
        o.fail(f);
    }
    o.detail = format!("{} traces, most rounds {most}", cases.len());
    o
}

fn random_graph(rng: &mut ChaCha8Rng, n: usize, density: f64, ties: bool) -> WeightedGraph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(density) {
                let w = if ties { rng.gen_range(1..=4) as f64 } else { rng.gen_range(1..=1u32 << 20) as f64 / 1024.0 };
                edges.push(Edge::new(u, v, w));
            }
        }
    }
    WeightedGraph::new(n, edges).unwrap()
}

/// Minimum spanning-tree weight over all `(n-1)`-edge subsets.
fn exhaustive_mst_weight(g: &WeightedGraph) -> f64 {
    let (n, edges) = (g.n(), g.edges());
    let mut best = f64::INFINITY;
    let mut pick = Vec::with_capacity(n - 1);
    fn rec(edges: &[Edge], n: usize, start: usize, pick: &mut Vec<usize>, best: &mut f64) {
        if pick.len() == n - 1 {
            let mut uf = UnionFind::new(n);
            if pick.iter().all(|&i| uf.union(edges[i].u, edges[i].v)) {
                *best = best.min(exact_total(pick.iter().map(|&i| edges[i].w)));
            }
            return;
        }
        for i in start..edges.len() {
            pick.push(i);
            rec(edges, n, i + 1, pick, best);
            pick.pop();
        }
    }
    rec(edges, n, 0, &mut pick, &mut best);
    best
}

fn criterion_4() -> Outcome {
    let mut o = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(BASE_SEED, 4));
    let mut done = 0;
    while done < 100 {
        let n = rng.gen_range(2..=7);
        let g = random_graph(&mut rng, n, 0.7, done % 2 == 0);
        if !g.is_connected() {
            continue;
        }
        let (got, want) = (kruskal_msf(&g).weight(), exhaustive_mst_weight(&g));
        if got != want {
            o.fail(format!("graph {done} (n={n}): kruskal {got} vs exhaustive {want}"));
        }
        done += 1;
    }
    o.detail = "100 connected graphs, n <= 7".into();
    o
}

/// Every simple cycle of `g`, as edge-index lists, each found from its smallest vertex.
fn all_cycles(g: &WeightedGraph) -> Vec<Vec<usize>> {
    let n = g.n();
    let mut adj = vec![Vec::new(); n];
    for (i, e) in g.edges().iter().enumerate() {
        adj[e.u].push((e.v, i));
        adj[e.v].push((e.u, i));
    }
    let mut out = Vec::new();
    for s in 0..n {
        let mut on_path = vec![false; n];
        on_path[s] = true;
        let mut path = Vec::new();
        fn dfs(
            x: usize,
            s: usize,
            adj: &[Vec<(usize, usize)>],
            on_path: &mut [bool],
            path: &mut Vec<usize>,
            out: &mut Vec<Vec<usize>>,
        ) {
            for &(y, i) in &adj[x] {
                if y == s && path.len() >= 2 && path[0] < i {
                    let mut c = path.clone();
                    c.push(i);
                    out.push(c);
                } else if y > s && !on_path[y] {
                    on_path[y] = true;
                    path.push(i);
                    dfs(y, s, adj, on_path, path, out);
                    path.pop();
                    on_path[y] = false;
                }
            }
        }
        dfs(s, s, &adj, &mut on_path, &mut path, &mut out);
    }
    out
}

fn criterion_5() -> Outcome {
    let mut o = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(BASE_SEED, 5));
    let mut cycles_seen = 0usize;
    for k in 0..200 {
        let n = rng.gen_range(3..=10);
        let g = random_graph(&mut rng, n, 0.5, k % 2 == 0);
        let f = kruskal_msf(&g);
        if let Err(v) = cycle_property_check(&g, &f) {
            o.fail(format!("graph {k}: {v:?}"));
        }
        let in_forest = f.edge_keys();
        for c in all_cycles(&g) {
            cycles_seen += 1;
            let heaviest = c.iter().map(|&i| g.edges()[i]).max().unwrap();
            if in_forest.contains(&heaviest.key()) {
                o.fail(format!("graph {k}: cycle maximum {heaviest:?} is in the forest"));
            }
        }
        // A non-minimal spanning forest must be rejected.
        if !f.edges().is_empty() && g.edges().len() > f.edges().len() {
            let mut keys: HashSet<_> = in_forest.clone();
            let heavy = g.edges().iter().filter(|e| !keys.contains(&e.key())).max().copied().unwrap();
            let cycle = sdglab_core::graph::forest_cycle(&f, heavy).unwrap();
            let lightest = cycle.iter().filter(|e| e.key() != heavy.key()).min().copied().unwrap();
            if lightest < heavy {
                keys.remove(&lightest.key());
                keys.insert(heavy.key());
                let swapped: Vec<Edge> = g.edges().iter().filter(|e| keys.contains(&e.key())).copied().collect();
                let worse = Forest::from_edges(n, swapped).unwrap();
                if cycle_property_check(&g, &worse).is_ok() {
                    o.fail(format!("graph {k}: swapped forest not rejected"));
                }
            }
        }
    }
    o.detail = format!("200 graphs, {cycles_seen} cycles enumerated");
    o
}

fn permutation_minimum(m: &Metric) -> f64 {
    fn rec(m: &Metric, order: &mut Vec<usize>, used: &mut [bool], best: &mut f64) {
        if order.len() == used.len() {
            *best = best.min(exact_total(order.windows(2).map(|w| m.d(w[0], w[1]))));
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                order.push(v);
                rec(m, order, used, best);
                order.pop();
                used[v] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    rec(m, &mut Vec::new(), &mut vec![false; m.n()], &mut best);
    best
}

fn criterion_6(suite: &[Case]) -> Outcome {
    let mut o = Outcome::new();
    let spaces = spaces();
    let failures: Vec<String> = (0..50u64)
        .into_par_iter()
        .filter_map(|i| {
            let seed = mix_seed(BASE_SEED ^ 6, i);
            let n = 2 + (i as usize % 8);
            let m = match spaces[i as usize % spaces.len()] {
                Space::Euclidean { d, p } => gen_random_euclidean(n, d, p, seed).unwrap(),
                Space::Matrix => gen_random_matrix_metric(n, seed).unwrap(),
            };
            let (got, want) = (exact_min_ham_path(&m).unwrap().weight(), permutation_minimum(&m));
            (got != want).then(|| format!("metric {i} (n={n}): exact {got} vs enumeration {want}"))
        })
        .collect();
    for f in failures {
        o.fail(f);
    }
    let mut worst: f64 = 0.0;
    for c in suite {
        let (h, mst) = (approx_ham_path(&c.m).unwrap().weight(), metric_mst(&c.m).weight());
        worst = worst.max(h / mst);
        if h > 2.0 * mst {
            o.fail(format!("{}: approximate path {h} > 2·{mst}", c.label));
        }
    }
    o.detail = format!("50 exact checks n <= 9; {} approximations, worst ratio {worst:.4}", suite.len());
    o
}

fn criterion_7() -> Outcome {
    let mut o = Outcome::new();
    let c3 = gen_c3(1000.0).unwrap();
    let (sdg, mst) = (kruskal_msf(&c3.sdg().unwrap()).weight(), kruskal_msf(&c3.host_graph()).weight());
    if (sdg, mst) != (1001.0, 3.0) {
        o.fail(format!("C3: SDG {sdg}, MST {mst}"));
    }

    let line = gen_line_graph(5, 1000.0, 1e-4).unwrap();
    let (ls, lm) = (kruskal_msf(&line.sdg().unwrap()).weight(), kruskal_msf(&line.host_graph()).weight());
    let coefficient = ls / lm;
    let derived = 3000.9997 / 1003.0001;
    if (coefficient - derived).abs() > 1e-9 || ((coefficient - 3.0) / 3.0).abs() > 0.01 {
        o.fail(format!("line: coefficient {coefficient} vs {derived}"));
    }

    let star = gen_star_metric(5).unwrap();
    let degree = star.sdg().unwrap().degrees().into_iter().max().unwrap();
    if degree != 4 {
        o.fail(format!("star: SDG degree {degree}"));
    }

    let chain = gen_chain_metric(5).unwrap();
    let m = chain.metric().unwrap();
    let s = tree_parameters(&RootedTree::new(kruskal_msf(&chain.sdg().unwrap()), 0).unwrap());
    let t_edges = (1..5).map(|j| Edge::new(0, j, m.d(0, j))).collect();
    let t = tree_parameters(&RootedTree::new(Forest::from_edges(5, t_edges).unwrap(), 0).unwrap());
    let table = [
        ("radius", s.radius, 4.0, t.radius, 2.0),
        ("sum_single", s.sum_single, 10.0, t.sum_single, 7.0),
        ("sum_pairwise", s.sum_pairwise, 20.0, t.sum_pairwise, 28.0),
    ];
    for (name, sv, sw, tv, tw) in table {
        if sv != sw || tv != tw {
            o.fail(format!("chain {name}: S {sv} (want {sw}), T {tv} (want {tw})"));
        }
    }
    // The star spends at most 4 per pair; the path's per-pair average grows with n.
    if t.sum_pairwise > 4.0 * 10.0 {
        o.fail("chain: star pairwise sum exceeds 4 per pair".into());
    }
    o.detail = format!("C3 {sdg}/{mst}, line {coefficient:.9}, star degree {degree}, chain radius 4/2");
    o
}

fn criterion_8() -> Outcome {
    let mut o = Outcome::new();
    let spaces = spaces();
    let mut connected = 0;
    for i in 0..100u64 {
        let seed = mix_seed(BASE_SEED ^ 8, i);
        let n = 5 + (i as usize * 7) % 60;
        let m = match spaces[i as usize % spaces.len()] {
            Space::Euclidean { d, p } => gen_random_euclidean(n, d, p, seed).unwrap(),
            Space::Matrix => gen_random_matrix_metric(n, seed).unwrap(),
        };
        let (lo, hi) = (m.min_distance().unwrap(), m.diameter().unwrap());
        let c = ChaCha8Rng::seed_from_u64(seed).gen_range(lo..=hi);
        let udg = kruskal_msf(&build_sdg(&m, &RangeAssignment::constant(n, c).unwrap()).unwrap());
        let mst = metric_mst(&m);
        let keys = mst.edge_keys();
        if udg.edges().iter().any(|e| !keys.contains(&e.key())) {
            o.fail(format!("instance {i}: UDG forest edge outside the MST"));
        }
        match udg_msf_containment(&m, c).unwrap() {
            Ok(rep) if rep.connected => {
                connected += 1;
                if udg.edges() != mst.edges() || rep.coefficient != Some(1.0) {
                    o.fail(format!("instance {i}: connected but coefficient {:?}", rep.coefficient));
                }
            }
            Ok(_) => {}
            Err(v) => o.fail(format!("instance {i}: {v:?}")),
        }
    }
    o.detail = format!("100 instances, {connected} connected");
    o
}

fn criterion_9() -> Outcome {
    let mut o = Outcome::new();
    let spaces = spaces();
    let failures: Vec<String> = (0..500u64)
        .into_par_iter()
        .filter_map(|i| {
            let seed = mix_seed(BASE_SEED ^ 9, i);
            let n = 2 + (mix_seed(seed, 2) % 127) as usize;
            let b = gen_random_instance(n, spaces[i as usize % spaces.len()], RangeMode::Biased, seed).unwrap();
            let (m, bounds) = (b.metric().unwrap(), &b.ranges);
            let rep = bounded_assignment(m, bounds).unwrap();
            let t = kruskal_msf(&build_sdg(m, bounds).unwrap());
            let mut problems = Vec::new();
            if !t.is_spanning_tree() {
                problems.push("bounding disk graph disconnected".to_string());
            }
            if rep.ranges.radii().iter().zip(bounds.radii()).any(|(r, b)| r > b) {
                problems.push("r exceeds r′".into());
            }
            if !build_sdg(m, &rep.ranges).unwrap().is_connected() {
                problems.push("SDG(M, r) disconnected".into());
            }
            let mut double = ExactSum::new();
            double.add_all(t.edges().iter().flat_map(|e| [e.w, e.w]));
            double.sub_all(rep.ranges.radii().iter().copied());
            if double.sign() == std::cmp::Ordering::Less {
                problems.push("cost > 2·w(T)".into());
            }
            let cost = exact_total(rep.ranges.radii().iter().copied());
            if cost > 4.0 * log54(n) * metric_mst(m).weight() {
                problems.push("cost > 4·log_5/4(n)·w(MST)".into());
            }
            (!problems.is_empty()).then(|| format!("instance {i} seed {seed}: {problems:?}"))
        })
        .collect();
    for f in failures {
        o.fail(f);
    }
    o.detail = "500 connected instances".into();
    o
}

fn criterion_10() -> Outcome {
    let mut o = Outcome::new();
    let csv_for = |threads: usize| {
        let config = SweepConfig {
            base_seed: BASE_SEED,
            trials: 120,
            sizes: vec![5, 8, 13, 21, 34],
            spaces: spaces(),
            range_modes: vec![RangeMode::Uniform, RangeMode::Biased],
            ham: HamMode::Auto,
            threads,
        };
        let mut buf = Vec::new();
        write_csv(&run_sweep(&config).unwrap(), &mut buf).unwrap();
        buf
    };
    let one = csv_for(1);
    for threads in [2, 8] {
        if csv_for(threads) != one {
            o.fail(format!("CSV with {threads} workers differs from 1 worker"));
        }
    }
    let again = csv_for(1);
    if again != one {
        o.fail("repeated 1-worker sweep differs".into());
    }
    o.detail = format!("120 rows, {} bytes, workers 1/2/8", one.len());
    o
}

fn main() {
    let start = Instant::now();
    let suite = random_suite();
    let families = family_suite();
    let all: Vec<&Case> = suite.iter().chain(&families).collect();

    type Run<'a> = Box<dyn Fn() -> Outcome + 'a>;
    let criteria: Vec<(&str, Run)> = vec![
        ("lightness bound 2·log_5/4 n", Box::new(|| criterion_1(&suite))),
        ("decomposition certificates", Box::new(|| criterion_2(&all))),
        ("peeling trace", Box::new(|| criterion_3(&all))),
        ("MSF vs exhaustive search", Box::new(criterion_4)),
        ("cycle property", Box::new(criterion_5)),
        ("Hamiltonian path oracles", Box::new(|| criterion_6(&suite))),
        ("fixed-family numbers", Box::new(criterion_7)),
        ("UDG containment", Box::new(criterion_8)),
        ("bounded range assignment", Box::new(criterion_9)),
        ("sweep determinism", Box::new(criterion_10)),
    ];

    let mut failed = 0;
    let mut err = std::io::stderr().lock();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = run();
        let status = if o.failures.is_empty() { "PASS" } else { "FAIL" };
        writeln!(err, "{status} criterion {:>2}: {name} ({}; {:.1}s)", i + 1, o.detail, t.elapsed().as_secs_f64()).unwrap();
        for f in o.failures.iter().take(5) {
            writeln!(err, "    {f}").unwrap();
        }
        if !o.failures.is_empty() {
            failed += 1;
        }
    }
    writeln!(err, "acceptance: {} of {} criteria passed in {:.1}s", criteria.len() - failed, criteria.len(), start.elapsed().as_secs_f64())
        .unwrap();
    if failed > 0 {
        std::process::exit(1);
    }
}
