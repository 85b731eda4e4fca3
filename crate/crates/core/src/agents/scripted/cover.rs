use std::collections::{BTreeMap, BTreeSet};

use super::{broadcast, format_kv, rank_of, Algorithm, Kv, Rank, View};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Undecided,
    In,
    Out,
}

impl State {
    fn as_str(self) -> &'static str {
        match self {
            State::Undecided => "u",
            State::In => "in",
            State::Out => "out",
        }
    }
}

/// Randomized maximal independent set. An undecided agent joins once every
/// higher-ranked neighbor has dropped out and drops out as soon as a
/// neighbor joins. Members of the set are exactly the agents outside the
/// vertex cover.
pub(crate) struct LubyCover {
    view: View,
    rank: Rank,
    higher: BTreeSet<String>,
    status: BTreeMap<String, State>,
    state: State,
}

impl LubyCover {
    fn step(&mut self) {
        if self.state != State::Undecided {
            return;
        }
        if self.status.values().any(|s| *s == State::In) {
            self.state = State::Out;
        } else if self.higher.iter().all(|h| self.status.get(h) == Some(&State::Out)) {
            self.state = State::In;
        }
    }

    /// Undecided at budget end: join iff the name precedes every neighbor
    /// that has not dropped out.
    fn fallback_in(&self) -> bool {
        self.view
            .neighbors
            .iter()
            .filter(|n| self.status.get(*n) != Some(&State::Out))
            .all(|n| self.view.name < *n)
    }
}

impl Algorithm for LubyCover {
    fn start(view: &View, seed: u64) -> Self {
        let rank = rank_of(seed, &view.name);
        let higher = view
            .neighbors
            .iter()
            .filter(|n| rank_of(seed, n) > rank)
            .cloned()
            .collect();
        let mut alg = LubyCover {
            view: view.clone(),
            rank,
            higher,
            status: BTreeMap::new(),
            state: State::Undecided,
        };
        alg.step();
        alg
    }

    fn round(&mut self, _round: usize, incoming: &BTreeMap<String, Kv>) -> BTreeMap<String, String> {
        for (sender, kv) in incoming {
            let s = match kv.get("st").map(String::as_str) {
                Some("in") => State::In,
                Some("out") => State::Out,
                _ => State::Undecided,
            };
            self.status.insert(sender.clone(), s);
        }
        self.step();
        broadcast(
            &self.view,
            &format_kv(&[("prio", self.rank.0.to_string()), ("st", self.state.as_str().to_string())]),
        )
    }

    fn answer(&self) -> String {
        let in_set = match self.state {
            State::In => true,
            State::Out => false,
            State::Undecided => self.fallback_in(),
        };
        if in_set { "No" } else { "Yes" }.to_string()
    }

    fn summary(&self) -> String {
        match self.state {
            State::In => "All higher-priority neighbors dropped out, so I joined the independent set and stay out of the cover.".to_string(),
            State::Out => "A neighbor joined the independent set, so I am a coordinator.".to_string(),
            State::Undecided => format!("My priority is {}; still undecided.", self.rank.0),
        }
    }
}
