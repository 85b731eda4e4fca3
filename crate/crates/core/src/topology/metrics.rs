use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{Topology, TopologyError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphMetrics {
    pub max_degree: usize,
    pub diameter: usize,
    pub degree_sequence: Vec<usize>,
}

fn bfs(adj: &[Vec<usize>], src: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; adj.len()];
    dist[src] = Some(0);
    let mut queue = VecDeque::from([src]);
    while let Some(u) = queue.pop_front() {
        let d = dist[u].unwrap_or(0);
        for &w in &adj[u] {
            if dist[w].is_none() {
                dist[w] = Some(d + 1);
                queue.push_back(w);
            }
        }
    }
    dist
}

pub fn is_connected(t: &Topology) -> bool {
    bfs(&t.adjacency(), 0).iter().all(Option::is_some)
}

/// Exact maximum degree and diameter (all-pairs BFS).
pub fn metrics(t: &Topology) -> Result<GraphMetrics, TopologyError> {
    let adj = t.adjacency();
    let mut diameter = 0;
    for src in 0..t.node_count() {
        for d in bfs(&adj, src) {
            match d {
                Some(d) => diameter = diameter.max(d),
                None => {
                    return Err(TopologyError::Structure(
                        "graph is disconnected; diameter undefined".into(),
                    ))
                }
            }
        }
    }
    let degree_sequence = t.degrees();
    Ok(GraphMetrics {
        max_degree: degree_sequence.iter().copied().max().unwrap_or(0),
        diameter,
        degree_sequence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::GraphFamily;

    fn graph(n: usize, edges: &[(usize, usize)]) -> Topology {
        Topology::from_edges(n, edges.iter().copied(), GraphFamily::Delaunay, 0).unwrap()
    }

    #[test]
    fn path_graph() {
        let m = metrics(&graph(4, &[(0, 1), (1, 2), (2, 3)])).unwrap();
        assert_eq!((m.diameter, m.max_degree), (3, 2));
    }

    #[test]
    fn complete_graph() {
        let m = metrics(&graph(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])).unwrap();
        assert_eq!((m.diameter, m.max_degree), (1, 3));
    }

    #[test]
    fn star_graph() {
        let m = metrics(&graph(4, &[(0, 1), (0, 2), (0, 3)])).unwrap();
        assert_eq!((m.diameter, m.max_degree), (2, 3));
        assert_eq!(m.degree_sequence, vec![3, 1, 1, 1]);
    }

    #[test]
    fn disconnected_is_error() {
        let t = graph(4, &[(0, 1), (2, 3)]);
        assert!(!is_connected(&t));
        assert!(matches!(metrics(&t), Err(TopologyError::Structure(_))));
    }

    #[test]
    fn single_node() {
        let m = metrics(&graph(1, &[])).unwrap();
        assert_eq!((m.diameter, m.max_degree), (0, 0));
    }
}
