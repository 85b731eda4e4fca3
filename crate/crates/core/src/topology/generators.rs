use std::collections::{BTreeSet, HashSet};

use rand::Rng;

use super::metrics::is_connected;
use super::{GraphFamily, Topology, TopologyError};
use crate::seed;

/// Resampling budget for generators that may produce disconnected graphs.
pub const MAX_CONNECT_ATTEMPTS: u64 = 64;

fn key(u: usize, v: usize) -> (usize, usize) {
    (u.min(v), u.max(v))
}

fn watts_strogatz_once(n: usize, k: usize, p: f64, attempt_seed: u64) -> Vec<(usize, usize)> {
    let mut rng = seed::rng(attempt_seed, &[]);
    let mut edges: HashSet<(usize, usize)> = HashSet::new();
    let mut degree = vec![0usize; n];
    for j in 1..=k / 2 {
        for u in 0..n {
            edges.insert(key(u, (u + j) % n));
        }
    }
    for &(u, v) in &edges {
        degree[u] += 1;
        degree[v] += 1;
    }
    // Rewire the ring lattice one "distance class" at a time, in node order.
    for j in 1..=k / 2 {
        for u in 0..n {
            let v = (u + j) % n;
            if rng.gen::<f64>() >= p {
                continue;
            }
            if !edges.contains(&key(u, v)) || degree[u] >= n - 1 {
                continue;
            }
            let mut w = rng.gen_range(0..n);
            while w == u || edges.contains(&key(u, w)) {
                w = rng.gen_range(0..n);
            }
            edges.remove(&key(u, v));
            degree[v] -= 1;
            edges.insert(key(u, w));
            degree[w] += 1;
        }
    }
    let mut out: Vec<_> = edges.into_iter().collect();
    out.sort_unstable();
    out
}

/// Watts-Strogatz small-world graph, resampled until connected.
///
/// Attempt `a` draws from a stream derived from `(seed, a)`, so the result is
/// a pure function of the arguments.
pub fn gen_small_world(n: usize, k: usize, p: f64, seed: u64) -> Result<Topology, TopologyError> {
    if n < 4 {
        return Err(TopologyError::Parameter(format!("small-world needs n >= 4, got {n}")));
    }
    if k < 2 || k >= n || k % 2 != 0 {
        return Err(TopologyError::Parameter(format!(
            "small-world needs even k with 2 <= k < n, got k={k}, n={n}"
        )));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(TopologyError::Parameter(format!("rewiring probability {p} outside [0, 1]")));
    }
    for attempt in 0..MAX_CONNECT_ATTEMPTS {
        let edges = watts_strogatz_once(n, k, p, seed::derive(seed, &[attempt]));
        let t = Topology::from_edges(n, edges, GraphFamily::SmallWorld, seed)?;
        if is_connected(&t) {
            return Ok(t);
        }
        log::debug!("small-world attempt {attempt} disconnected (n={n}, k={k}, p={p}, seed={seed})");
    }
    Err(TopologyError::Generation(format!(
        "no connected small-world graph after {MAX_CONNECT_ATTEMPTS} attempts (n={n}, k={k}, p={p})"
    )))
}

/// Barabási-Albert preferential attachment starting from `m` isolated seed
/// nodes; every later node attaches to `m` distinct existing nodes, giving
/// exactly `m * (n - m)` edges.
pub fn gen_scale_free(n: usize, m: usize, seed: u64) -> Result<Topology, TopologyError> {
    if m < 1 || m >= n {
        return Err(TopologyError::Parameter(format!(
            "scale-free needs 1 <= m < n, got m={m}, n={n}"
        )));
    }
    let mut rng = seed::rng(seed, &[0]);
    let mut edges = Vec::with_capacity(m * (n - m));
    let mut targets: Vec<usize> = (0..m).collect();
    let mut repeated: Vec<usize> = Vec::new();
    for source in m..n {
        for &t in &targets {
            edges.push((t, source));
        }
        repeated.extend_from_slice(&targets);
        repeated.extend(std::iter::repeat(source).take(m));
        let mut chosen = BTreeSet::new();
        while chosen.len() < m {
            chosen.insert(repeated[rng.gen_range(0..repeated.len())]);
        }
        targets = chosen.into_iter().collect();
    }
    Topology::from_edges(n, edges, GraphFamily::ScaleFree, seed)
}
