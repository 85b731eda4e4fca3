use std::collections::{BTreeMap, BTreeSet};

use super::{broadcast, format_kv, Algorithm, Kv, View};
use crate::seed::{derive, hash_str};

/// Mutual-proposal matching. Every free agent proposes to one free neighbor:
/// preferably one that proposed to it in the previous round (accepting a
/// proposal), otherwise the one across its heaviest edge (seeded random edge
/// weights, known to both endpoints). Two agents that propose to each other
/// in the same round lock as partners. Locked agents announce their partner
/// and stop proposing.
pub(crate) struct MutualMatching {
    view: View,
    seed: u64,
    free: BTreeSet<String>,
    partner: Option<String>,
    pick: Option<String>,
}

impl MutualMatching {
    fn weight(&self, other: &str) -> (u64, String, String) {
        let (a, b) = if self.view.name.as_str() < other {
            (self.view.name.clone(), other.to_string())
        } else {
            (other.to_string(), self.view.name.clone())
        };
        (derive(self.seed, &[hash_str(&a), hash_str(&b)]), a, b)
    }
}

impl Algorithm for MutualMatching {
    fn start(view: &View, seed: u64) -> Self {
        MutualMatching {
            view: view.clone(),
            seed,
            free: view.neighbors.iter().cloned().collect(),
            partner: None,
            pick: None,
        }
    }

    fn round(&mut self, _round: usize, incoming: &BTreeMap<String, Kv>) -> BTreeMap<String, String> {
        let mut suitors = Vec::new();
        for (sender, kv) in incoming {
            if kv.get("st").map(String::as_str) == Some("locked") {
                self.free.remove(sender);
            }
            if kv.get("pick") == Some(&self.view.name) {
                if self.partner.is_none() && self.pick.as_ref() == Some(sender) {
                    self.partner = Some(sender.clone());
                }
                suitors.push(sender.clone());
            }
        }
        let text = match &self.partner {
            Some(p) => {
                self.pick = None;
                format_kv(&[("st", "locked".into()), ("with", p.clone())])
            }
            None => {
                let heaviest = |c: &mut dyn Iterator<Item = &String>| c.max_by_key(|n| self.weight(n)).cloned();
                self.pick = heaviest(&mut suitors.iter().filter(|s| self.free.contains(*s)))
                    .or_else(|| heaviest(&mut self.free.iter()));
                format_kv(&[
                    ("st", "free".into()),
                    ("pick", self.pick.clone().unwrap_or_else(|| "-".into())),
                ])
            }
        };
        broadcast(&self.view, &text)
    }

    fn answer(&self) -> String {
        self.partner.clone().unwrap_or_else(|| "None".to_string())
    }

    fn summary(&self) -> String {
        match (&self.partner, &self.pick) {
            (Some(p), _) => format!("{p} and I proposed to each other, so we are paired."),
            (None, Some(p)) => format!("I am still unpaired and propose to {p}."),
            (None, None) => "All my neighbors are paired with someone else.".to_string(),
        }
    }
}
