use std::collections::BTreeSet;

use meshbench::topology::{
    gen_benchmark_suite, gen_delaunay, gen_delaunay_with_points, gen_scale_free, gen_small_world, is_connected, metrics, parse_topology,
    serialize_topology, FamilyParams, GraphFamily, SuiteSpec, Topology,
};
use proptest::prelude::*;

/// Components by union-find, independent of the BFS used by the library.
fn component_count(t: &Topology) -> usize {
    let n = t.node_count();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    for &(u, v) in t.edges() {
        let (a, b) = (find(&mut parent, u), find(&mut parent, v));
        parent[a] = b;
    }
    (0..n).filter(|&v| find(&mut parent, v) == v).count()
}

/// Diameter by Floyd-Warshall.
fn brute_diameter(t: &Topology) -> usize {
    let n = t.node_count();
    let inf = usize::MAX / 4;
    let mut d = vec![vec![inf; n]; n];
    for (v, row) in d.iter_mut().enumerate() {
        row[v] = 0;
    }
    for &(u, v) in t.edges() {
        d[u][v] = 1;
        d[v][u] = 1;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d.iter().flatten().copied().max().unwrap()
}

fn family_strategy() -> impl Strategy<Value = GraphFamily> {
    prop_oneof![
        Just(GraphFamily::SmallWorld),
        Just(GraphFamily::ScaleFree),
        Just(GraphFamily::Delaunay)
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn generation_is_deterministic(family in family_strategy(), n in 4usize..40, seed in any::<u64>()) {
        let p = FamilyParams::default();
        let a = p.generate(family, n, seed).unwrap();
        let b = p.generate(family, n, seed).unwrap();
        prop_assert_eq!(serialize_topology(&a), serialize_topology(&b));
    }

    #[test]
    fn generated_graphs_are_connected_and_simple(family in family_strategy(), n in 4usize..40, seed in any::<u64>()) {
        let t = FamilyParams::default().generate(family, n, seed).unwrap();
        prop_assert_eq!(t.node_count(), n);
        prop_assert_eq!(t.family(), family);
        prop_assert_eq!(component_count(&t), 1);
        prop_assert!(is_connected(&t));
        let set: BTreeSet<(usize, usize)> = t.edges().iter().copied().collect();
        prop_assert_eq!(set.len(), t.edge_count());
        prop_assert!(t.edges().iter().all(|&(u, v)| u < v && v < n));
    }

    #[test]
    fn metrics_match_brute_force(family in family_strategy(), n in 4usize..24, seed in any::<u64>()) {
        let t = FamilyParams::default().generate(family, n, seed).unwrap();
        let m = metrics(&t).unwrap();
        prop_assert_eq!(m.diameter, brute_diameter(&t));
        let mut deg = vec![0usize; n];
        for &(u, v) in t.edges() {
            deg[u] += 1;
            deg[v] += 1;
        }
        prop_assert_eq!(m.max_degree, *deg.iter().max().unwrap());
        prop_assert_eq!(&m.degree_sequence, &deg);
    }

    #[test]
    fn exchange_format_roundtrips(family in family_strategy(), n in 4usize..30, seed in any::<u64>()) {
        let t = FamilyParams::default().generate(family, n, seed).unwrap();
        let text = serialize_topology(&t);
        let back = parse_topology(&text).unwrap();
        prop_assert_eq!(&back, &t);
        prop_assert_eq!(serialize_topology(&back), text);
    }

    #[test]
    fn delaunay_graphs_are_planar_by_edge_bound(n in 3usize..60, seed in any::<u64>()) {
        let t = gen_delaunay(n, seed).unwrap();
        prop_assert!(t.edge_count() <= 3 * n - 6 || n == 3);
        prop_assert!(t.edge_count() >= n - 1);
    }

    #[test]
    fn small_world_keeps_ring_edge_count(n in 6usize..40, seed in any::<u64>()) {
        let t = gen_small_world(n, 4, 0.3, seed).unwrap();
        prop_assert_eq!(t.edge_count(), 2 * n);
    }

    #[test]
    fn scale_free_edge_count(n in 5usize..40, seed in any::<u64>()) {
        // A seed star on m + 1 nodes, then m edges per later node.
        let t = gen_scale_free(n, 2, seed).unwrap();
        prop_assert_eq!(t.edge_count(), 2 + 2 * (n - 3));
    }
}

/// Delaunay triangulation by exhaustive empty-circumcircle search: a
/// triangle is kept when no other point lies strictly inside its
/// circumcircle. For points in general position the union of the kept
/// triangles' edges is the Delaunay graph.
fn brute_delaunay_edges(points: &[(f64, f64)]) -> BTreeSet<(usize, usize)> {
    let n = points.len();
    let mut edges = BTreeSet::new();
    let orient = |a: usize, b: usize, c: usize| {
        let (ax, ay) = points[a];
        let (bx, by) = points[b];
        let (cx, cy) = points[c];
        (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    };
    let in_circle = |a: usize, b: usize, c: usize, d: usize| {
        let row = |p: usize| {
            let (x, y) = (points[p].0 - points[d].0, points[p].1 - points[d].1);
            (x, y, x * x + y * y)
        };
        let (ax, ay, a2) = row(a);
        let (bx, by, b2) = row(b);
        let (cx, cy, c2) = row(c);
        let det = ax * (by * c2 - b2 * cy) - ay * (bx * c2 - b2 * cx) + a2 * (bx * cy - by * cx);
        if orient(a, b, c) > 0.0 {
            det > 0.0
        } else {
            det < 0.0
        }
    };
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                if orient(a, b, c) == 0.0 {
                    continue;
                }
                if (0..n).all(|d| d == a || d == b || d == c || !in_circle(a, b, c, d)) {
                    edges.extend([(a, b), (a, c), (b, c)]);
                }
            }
        }
    }
    edges
}

fn segments_cross(p: (f64, f64), q: (f64, f64), r: (f64, f64), s: (f64, f64)) -> bool {
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
    let d1 = cross(r, s, p);
    let d2 = cross(r, s, q);
    let d3 = cross(p, q, r);
    let d4 = cross(p, q, s);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

#[test]
fn delaunay_matches_empty_circle_oracle() {
    for n in [4usize, 8, 12, 16, 25] {
        for seed in 0..20u64 {
            let (t, points) = gen_delaunay_with_points(n, seed).unwrap();
            assert_eq!(t.family(), GraphFamily::Delaunay);
            let expected = brute_delaunay_edges(&points);
            let got: BTreeSet<(usize, usize)> = t.edges().iter().copied().collect();
            assert_eq!(got, expected, "n={n} seed={seed}");
        }
    }
}

#[test]
fn delaunay_edges_do_not_cross() {
    for seed in 0..30u64 {
        let (t, pts) = gen_delaunay_with_points(20, seed).unwrap();
        let e = t.edges();
        for (i, &(a, b)) in e.iter().enumerate() {
            for &(c, d) in &e[i + 1..] {
                if a == c || a == d || b == c || b == d {
                    continue;
                }
                assert!(
                    !segments_cross(pts[a], pts[b], pts[c], pts[d]),
                    "seed {seed}: edges {a}-{b} and {c}-{d} cross"
                );
            }
        }
    }
}

#[test]
fn benchmark_suite_cells_and_references() {
    let suite = gen_benchmark_suite(&SuiteSpec::benchmark(0)).unwrap();
    assert_eq!(suite.len(), 27);
    let refs: BTreeSet<String> = suite.iter().map(|s| s.reference()).collect();
    assert_eq!(refs.len(), 27);
    for s in &suite {
        assert_eq!(s.topology.node_count(), s.size);
        assert!(is_connected(&s.topology));
    }
    let sizes: Vec<usize> = suite.iter().map(|s| s.size).collect();
    let mut sorted = sizes.clone();
    sorted.sort();
    assert_eq!(sizes, sorted, "suite is size-major");
    let again = gen_benchmark_suite(&SuiteSpec::benchmark(0)).unwrap();
    assert_eq!(suite, again);
    let other = gen_benchmark_suite(&SuiteSpec::benchmark(1)).unwrap();
    assert_ne!(suite, other);
}

#[test]
fn scaling_suite_shape() {
    let suite = gen_benchmark_suite(&SuiteSpec::scaling(0)).unwrap();
    assert_eq!(suite.len(), 81);
    let sizes: BTreeSet<usize> = suite.iter().map(|s| s.size).collect();
    assert_eq!(sizes, (2..=10).map(|k| k * 10).collect());
}
