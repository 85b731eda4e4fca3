//! Network topologies: the three random-graph families, graph metrics, the
//! benchmark suite and the plain-text exchange format.

mod delaunay;
mod format;
mod generators;
mod metrics;
mod suite;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use delaunay::{gen_delaunay, gen_delaunay_with_points};
pub use format::{parse_topology, serialize_topology};
pub use generators::{gen_scale_free, gen_small_world, MAX_CONNECT_ATTEMPTS};
pub use metrics::{is_connected, metrics, GraphMetrics};
pub use suite::{gen_benchmark_suite, FamilyParams, SuiteSpec, SuiteTopology};

#[derive(Debug, Error, PartialEq)]
pub enum TopologyError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("generation failed: {0}")]
    Generation(String),
    #[error("structural error: {0}")]
    Structure(String),
    #[error("malformed topology file: {0}")]
    Format(String),
}

/// Random-graph family a topology was drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphFamily {
    SmallWorld,
    ScaleFree,
    Delaunay,
}

impl GraphFamily {
    pub const ALL: [GraphFamily; 3] = [
        GraphFamily::SmallWorld,
        GraphFamily::ScaleFree,
        GraphFamily::Delaunay,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            GraphFamily::SmallWorld => "small_world",
            GraphFamily::ScaleFree => "scale_free",
            GraphFamily::Delaunay => "delaunay",
        }
    }

    pub(crate) fn index(self) -> u64 {
        match self {
            GraphFamily::SmallWorld => 0,
            GraphFamily::ScaleFree => 1,
            GraphFamily::Delaunay => 2,
        }
    }
}

impl fmt::Display for GraphFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GraphFamily {
    type Err = TopologyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "small_world" | "smallworld" | "ws" => Ok(GraphFamily::SmallWorld),
            "scale_free" | "scalefree" | "ba" => Ok(GraphFamily::ScaleFree),
            "delaunay" | "dt" => Ok(GraphFamily::Delaunay),
            other => Err(TopologyError::Parameter(format!("unknown graph family `{other}`"))),
        }
    }
}

/// Undirected simple graph on nodes `0..node_count`.
///
/// Edges are stored normalized (`u < v`) and sorted, which makes equality and
/// serialization canonical.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topology {
    node_count: usize,
    edges: Vec<(usize, usize)>,
    family: GraphFamily,
    seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<BTreeMap<usize, String>>,
}

impl Topology {
    /// Builds a topology from an arbitrary edge list, normalizing and
    /// validating it. Self-loops and out-of-range endpoints are rejected;
    /// duplicate edges are merged.
    pub fn from_edges(
        node_count: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        family: GraphFamily,
        seed: u64,
    ) -> Result<Self, TopologyError> {
        if node_count == 0 {
            return Err(TopologyError::Parameter("node count must be positive".into()));
        }
        let mut norm = Vec::new();
        for (u, v) in edges {
            if u == v {
                return Err(TopologyError::Structure(format!("self-loop at node {u}")));
            }
            if u >= node_count || v >= node_count {
                return Err(TopologyError::Structure(format!(
                    "edge ({u}, {v}) out of range for {node_count} nodes"
                )));
            }
            norm.push((u.min(v), u.max(v)));
        }
        norm.sort_unstable();
        norm.dedup();
        Ok(Topology {
            node_count,
            edges: norm,
            family,
            seed,
            labels: None,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn family(&self) -> GraphFamily {
        self.family
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn labels(&self) -> Option<&BTreeMap<usize, String>> {
        self.labels.as_ref()
    }

    /// Attaches agent names. Every node must receive a distinct name.
    pub fn with_labels(mut self, names: &[String]) -> Result<Self, TopologyError> {
        if names.len() != self.node_count {
            return Err(TopologyError::Parameter(format!(
                "{} labels for {} nodes",
                names.len(),
                self.node_count
            )));
        }
        let mut seen = std::collections::BTreeSet::new();
        for n in names {
            if !seen.insert(n.as_str()) {
                return Err(TopologyError::Parameter(format!("duplicate label `{n}`")));
            }
        }
        self.labels = Some(names.iter().cloned().enumerate().collect());
        Ok(self)
    }

    /// Name of node `v`: its label when labelled, otherwise the decimal index.
    pub fn name_of(&self, v: usize) -> String {
        self.labels
            .as_ref()
            .and_then(|l| l.get(&v).cloned())
            .unwrap_or_else(|| v.to_string())
    }

    /// All node names in index order.
    pub fn names(&self) -> Vec<String> {
        (0..self.node_count).map(|v| self.name_of(v)).collect()
    }

    /// Sorted adjacency lists.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.node_count];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.node_count];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }

    pub fn max_degree(&self) -> usize {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.binary_search(&(u.min(v), u.max(v))).is_ok()
    }

    /// Returns a copy with node `v` renamed to `perm[v]`. Labels follow their
    /// nodes.
    pub fn relabeled(&self, perm: &[usize]) -> Result<Self, TopologyError> {
        if perm.len() != self.node_count {
            return Err(TopologyError::Parameter("permutation length mismatch".into()));
        }
        let mut t = Topology::from_edges(
            self.node_count,
            self.edges.iter().map(|&(u, v)| (perm[u], perm[v])),
            self.family,
            self.seed,
        )?;
        if let Some(labels) = &self.labels {
            t.labels = Some(labels.iter().map(|(&v, n)| (perm[v], n.clone())).collect());
        }
        Ok(t)
    }
}
