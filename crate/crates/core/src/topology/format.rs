//! Graph exchange format.
//!
//! ```text
//! <n> <family> <seed>
//! <u> <v>
//! ...
//! ```
//!
//! One edge per line with `u < v`, lines sorted lexicographically by `(u, v)`,
//! trailing newline after every line.

use std::fmt::Write as _;

use super::{Topology, TopologyError};

pub fn serialize_topology(t: &Topology) -> String {
    let mut out = String::with_capacity(16 + t.edge_count() * 8);
    let _ = writeln!(out, "{} {} {}", t.node_count(), t.family(), t.seed());
    for &(u, v) in t.edges() {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}

pub fn parse_topology(text: &str) -> Result<Topology, TopologyError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| TopologyError::Format("empty file".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let [n, family, seed] = fields.as_slice() else {
        return Err(TopologyError::Format(format!("bad header `{header}`")));
    };
    let n: usize = n
        .parse()
        .map_err(|_| TopologyError::Format(format!("bad node count `{n}`")))?;
    let family = family.parse()?;
    let seed: u64 = seed
        .parse()
        .map_err(|_| TopologyError::Format(format!("bad seed `{seed}`")))?;
    let mut edges = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let mut it = line.split_whitespace().map(str::parse::<usize>);
        match (it.next(), it.next(), it.next()) {
            (Some(Ok(u)), Some(Ok(v)), None) => edges.push((u, v)),
            _ => {
                return Err(TopologyError::Format(format!(
                    "bad edge line {}: `{line}`",
                    lineno + 2
                )))
            }
        }
    }
    Topology::from_edges(n, edges, family, seed)
}
