use std::collections::BTreeMap;

use super::{broadcast, format_kv, Algorithm, Kv, View};
use crate::seed::{derive, hash_str};

/// Seeded initial bit of an agent.
pub(crate) fn initial_bit(seed: u64, name: &str) -> u8 {
    (derive(seed, &[hash_str(name), 1]) & 1) as u8
}

/// OR-flooding: everyone ends with 1 iff some agent started with 1.
pub(crate) struct BitFlood {
    view: View,
    bit: u8,
}

impl Algorithm for BitFlood {
    fn start(view: &View, seed: u64) -> Self {
        let bit = std::iter::once(&view.name)
            .chain(&view.neighbors)
            .map(|n| initial_bit(seed, n))
            .max()
            .expect("own name is present");
        BitFlood { view: view.clone(), bit }
    }

    fn round(&mut self, _round: usize, incoming: &BTreeMap<String, Kv>) -> BTreeMap<String, String> {
        for kv in incoming.values() {
            if kv.get("bit").map(String::as_str) == Some("1") {
                self.bit = 1;
            }
        }
        broadcast(&self.view, &format_kv(&[("bit", self.bit.to_string())]))
    }

    fn answer(&self) -> String {
        self.bit.to_string()
    }

    fn summary(&self) -> String {
        format!("The largest value I have seen so far is {}.", self.bit)
    }
}
