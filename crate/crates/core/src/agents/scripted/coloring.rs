use std::collections::{BTreeMap, BTreeSet};

use super::{broadcast, format_kv, rank_of, Algorithm, Kv, Rank, View};

/// Priority-greedy coloring: an agent fixes the smallest group not used by
/// its higher-ranked neighbors once all of them have fixed theirs.
pub(crate) struct PriorityColoring {
    view: View,
    rank: Rank,
    higher: BTreeSet<String>,
    known: BTreeMap<String, usize>,
    color: Option<usize>,
}

impl PriorityColoring {
    fn try_fix(&mut self) {
        if self.color.is_some() || !self.higher.iter().all(|h| self.known.contains_key(h)) {
            return;
        }
        let used: BTreeSet<usize> = self.higher.iter().map(|h| self.known[h]).collect();
        self.color = Some((1..).find(|g| !used.contains(g)).expect("unbounded range"));
    }
}

impl Algorithm for PriorityColoring {
    fn start(view: &View, seed: u64) -> Self {
        let rank = rank_of(seed, &view.name);
        let higher = view
            .neighbors
            .iter()
            .filter(|n| rank_of(seed, n) > rank)
            .cloned()
            .collect();
        let mut alg = PriorityColoring {
            view: view.clone(),
            rank,
            higher,
            known: BTreeMap::new(),
            color: None,
        };
        alg.try_fix();
        alg
    }

    fn round(&mut self, _round: usize, incoming: &BTreeMap<String, Kv>) -> BTreeMap<String, String> {
        for (sender, kv) in incoming {
            if let Some(g) = kv.get("color").and_then(|c| c.parse().ok()) {
                self.known.insert(sender.clone(), g);
            }
        }
        self.try_fix();
        let color = self.color.map_or("-".to_string(), |g| g.to_string());
        broadcast(&self.view, &format_kv(&[("prio", self.rank.0.to_string()), ("color", color)]))
    }

    fn answer(&self) -> String {
        let g = self.color.unwrap_or_else(|| {
            let used: BTreeSet<usize> = self.known.values().copied().collect();
            (1..).find(|g| !used.contains(g)).expect("unbounded range")
        });
        format!("Group {g}")
    }

    fn summary(&self) -> String {
        match self.color {
            Some(g) => format!(
                "My priority is {}. All {} higher-priority neighbors have fixed their groups, so I keep Group {g}.",
                self.rank.0,
                self.higher.len()
            ),
            None => format!(
                "My priority is {}. Waiting for {} of {} higher-priority neighbors to fix their groups.",
                self.rank.0,
                self.higher.iter().filter(|h| !self.known.contains_key(*h)).count(),
                self.higher.len()
            ),
        }
    }
}
