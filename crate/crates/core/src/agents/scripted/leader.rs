use std::collections::BTreeMap;

use super::{broadcast, format_kv, rank_of, Algorithm, Kv, Rank, View};

/// Flooding of the maximum (priority, name) rank. Neighbor ranks are known
/// from their names, so after `T` rounds an agent has seen every rank within
/// distance `T`.
pub(crate) struct MaxFlood {
    view: View,
    seed: u64,
    best: (Rank, String),
}

impl Algorithm for MaxFlood {
    fn start(view: &View, seed: u64) -> Self {
        let best = std::iter::once(&view.name)
            .chain(&view.neighbors)
            .map(|n| (rank_of(seed, n), n.clone()))
            .max()
            .expect("own name is present");
        MaxFlood {
            view: view.clone(),
            seed,
            best,
        }
    }

    fn round(&mut self, _round: usize, incoming: &BTreeMap<String, Kv>) -> BTreeMap<String, String> {
        for kv in incoming.values() {
            if let Some(name) = kv.get("best") {
                let cand = (rank_of(self.seed, name), name.clone());
                if cand > self.best {
                    self.best = cand;
                }
            }
        }
        broadcast(
            &self.view,
            &format_kv(&[("best", self.best.1.clone()), ("prio", self.best.0 .0.to_string())]),
        )
    }

    fn answer(&self) -> String {
        if self.best.1 == self.view.name { "Yes" } else { "No" }.to_string()
    }

    fn summary(&self) -> String {
        format!("The highest priority I know of belongs to {}.", self.best.1)
    }
}
