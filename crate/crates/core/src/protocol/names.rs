use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::ProtocolError;
use crate::seed;
use crate::topology::Topology;

/// Built-in pool of distinct first names.
pub const NAME_POOL: &[&str] = &[
    "Aaron", "Abigail", "Adam", "Adrian", "Aiden", "Alan", "Albert", "Alexa", "Alice", "Allison",
    "Amanda", "Amber", "Amelia", "Andrea", "Andrew", "Angela", "Anna", "Anthony", "Arthur", "Ashley",
    "Ava", "Barbara", "Benjamin", "Beth", "Betty", "Bobby", "Brandon", "Brenda", "Brian", "Brittany",
    "Bruce", "Caleb", "Carl", "Carol", "Caroline", "Catherine", "Charles", "Charlotte", "Chloe", "Christian",
    "Christina", "Christopher", "Cynthia", "Daniel", "Danielle", "David", "Deborah", "Dennis", "Diana", "Donald",
    "Dorothy", "Douglas", "Dylan", "Edward", "Eleanor", "Elijah", "Elizabeth", "Ella", "Emily", "Emma",
    "Eric", "Ethan", "Evelyn", "Frances", "Frank", "Gabriel", "Gary", "George", "Gerald", "Grace",
    "Gregory", "Hannah", "Harold", "Harper", "Heather", "Helen", "Henry", "Isaac", "Isabella", "Jack",
    "Jacob", "Jacqueline", "James", "Janet", "Jason", "Jeffrey", "Jennifer", "Jeremy", "Jessica", "Joan",
    "John", "Jonathan", "Jordan", "Joseph", "Joshua", "Joyce", "Judith", "Julia", "Justin", "Karen",
    "Katherine", "Kayla", "Keith", "Kelly", "Kenneth", "Kevin", "Kimberly", "Kyle", "Larry", "Laura",
    "Lauren", "Leah", "Liam", "Lily", "Linda", "Logan", "Lucas", "Madison", "Margaret", "Maria",
    "Marie", "Mark", "Martha", "Mary", "Mason", "Matthew", "Megan", "Melissa", "Mia", "Michael",
    "Michelle", "Nancy", "Natalie", "Nathan", "Nicholas", "Nicole", "Noah", "Olivia", "Owen", "Pamela",
    "Patricia", "Patrick", "Paul", "Peter", "Rachel", "Raymond", "Rebecca", "Richard", "Robert", "Ronald",
    "Rose", "Ruth", "Ryan", "Samantha", "Samuel", "Sandra", "Sarah", "Scott", "Sharon", "Sophia",
    "Stephanie", "Stephen", "Steven", "Susan", "Teresa", "Thomas", "Timothy", "Tyler", "Victoria", "Walter",
    "William", "Zach", "Zoe",
];

/// An agent's view of itself: its node, its name and its neighbors' names
/// (sorted).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentIdentity {
    pub node_index: usize,
    pub name: String,
    pub neighbor_names: Vec<String>,
}

/// Seeded sampling of `n` distinct names from `pool`.
pub fn assign_names(
    t: &Topology,
    pool: &[&str],
    seed: u64,
) -> Result<Vec<AgentIdentity>, ProtocolError> {
    let n = t.node_count();
    if pool.len() < n {
        return Err(ProtocolError::Parameter(format!(
            "name pool has {} entries, need {n}",
            pool.len()
        )));
    }
    let mut uniq: Vec<&str> = pool.to_vec();
    uniq.sort_unstable();
    uniq.dedup();
    if uniq.len() != pool.len() {
        return Err(ProtocolError::Parameter("name pool contains duplicates".into()));
    }
    let mut rng = seed::rng(seed, &[seed::hash_str("names")]);
    let mut shuffled: Vec<&str> = pool.to_vec();
    shuffled.shuffle(&mut rng);
    let names: Vec<String> = shuffled.into_iter().take(n).map(String::from).collect();
    Ok(identities(t, &names))
}

/// Identities for an explicit node-index -> name assignment.
pub fn identities(t: &Topology, names: &[String]) -> Vec<AgentIdentity> {
    t.adjacency()
        .into_iter()
        .enumerate()
        .map(|(v, adj)| {
            let mut neighbor_names: Vec<String> = adj.iter().map(|&w| names[w].clone()).collect();
            neighbor_names.sort();
            AgentIdentity {
                node_index: v,
                name: names[v].clone(),
                neighbor_names,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{gen_delaunay, gen_small_world};

    #[test]
    fn pool_is_large_and_unique() {
        let mut p = NAME_POOL.to_vec();
        p.sort_unstable();
        p.dedup();
        assert_eq!(p.len(), NAME_POOL.len());
        assert!(NAME_POOL.len() >= 128);
        assert!(NAME_POOL.iter().all(|n| n.chars().all(|c| c.is_ascii_alphabetic())));
    }

    #[test]
    fn deterministic_and_distinct() {
        let t = gen_delaunay(3, 4).unwrap();
        let a = assign_names(&t, NAME_POOL, 17).unwrap();
        let b = assign_names(&t, NAME_POOL, 17).unwrap();
        assert_eq!(a, b);
        let mut names: Vec<_> = a.iter().map(|i| i.name.clone()).collect();
        names.dedup();
        assert_eq!(names.len(), 3);
    }

    #[test]
    fn seeds_change_assignment() {
        let t = gen_small_world(16, 4, 0.3, 1).unwrap();
        let a = assign_names(&t, NAME_POOL, 1).unwrap();
        let b = assign_names(&t, NAME_POOL, 2).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn neighbors_match_adjacency() {
        let t = gen_small_world(8, 4, 0.3, 9).unwrap();
        let ids = assign_names(&t, NAME_POOL, 3).unwrap();
        for id in &ids {
            let mut expect: Vec<String> = t.adjacency()[id.node_index]
                .iter()
                .map(|&w| ids[w].name.clone())
                .collect();
            expect.sort();
            assert_eq!(id.neighbor_names, expect);
        }
    }

    #[test]
    fn pool_too_small() {
        let t = gen_delaunay(5, 0).unwrap();
        assert!(assign_names(&t, &["A", "B"], 0).is_err());
        assert!(assign_names(&t, &["A", "A", "B", "C", "D"], 0).is_err());
    }
}
