use delaunator::{triangulate, Point};
use rand::Rng;

use super::generators::MAX_CONNECT_ATTEMPTS;
use super::metrics::is_connected;
use super::{GraphFamily, Topology, TopologyError};
use crate::seed;

fn sample_points(n: usize, attempt_seed: u64) -> Vec<Point> {
    let mut rng = seed::rng(attempt_seed, &[]);
    (0..n)
        .map(|_| Point {
            x: rng.gen::<f64>(),
            y: rng.gen::<f64>(),
        })
        .collect()
}

fn triangulation_edges(points: &[Point]) -> Vec<(usize, usize)> {
    let tri = triangulate(points);
    let mut edges = Vec::with_capacity(tri.triangles.len());
    for t in tri.triangles.chunks_exact(3) {
        edges.push((t[0], t[1]));
        edges.push((t[1], t[2]));
        edges.push((t[2], t[0]));
    }
    edges
}

/// Delaunay triangulation of `n` points drawn uniformly from the unit square,
/// together with the sampled coordinates.
pub fn gen_delaunay_with_points(
    n: usize,
    seed: u64,
) -> Result<(Topology, Vec<(f64, f64)>), TopologyError> {
    if n < 3 {
        return Err(TopologyError::Parameter(format!("delaunay needs n >= 3, got {n}")));
    }
    for attempt in 0..MAX_CONNECT_ATTEMPTS {
        let points = sample_points(n, seed::derive(seed, &[attempt]));
        let t = Topology::from_edges(n, triangulation_edges(&points), GraphFamily::Delaunay, seed)?;
        // Collinear or duplicate samples leave points out of every triangle.
        if t.degrees().iter().all(|&d| d > 0) && is_connected(&t) {
            return Ok((t, points.iter().map(|p| (p.x, p.y)).collect()));
        }
        log::debug!("delaunay attempt {attempt} degenerate (n={n}, seed={seed})");
    }
    Err(TopologyError::Generation(format!(
        "no non-degenerate point set after {MAX_CONNECT_ATTEMPTS} attempts (n={n})"
    )))
}

/// Delaunay triangulation over uniformly random points in the unit square.
pub fn gen_delaunay(n: usize, seed: u64) -> Result<Topology, TopologyError> {
    gen_delaunay_with_points(n, seed).map(|(t, _)| t)
}
