use super::answer::FINAL_ANSWER_MARKER;
use super::TaskKind;

/// The two task fragments spliced into the system prompt: `task1` near the
/// top, `task2` in the last rule. `groups` (max degree + 1) only affects
/// coloring.
pub fn task_prompts(kind: TaskKind, groups: usize) -> (String, String) {
    match kind {
        TaskKind::Coloring => (
            "Your task is to partition yourselves into groups such that agents who are neighbors are never in the same group.".to_string(),
            format!(
                "You will be requested to state which group you assign yourself to. There are exactly {groups} groups available: Group 1,...,Group {groups}. You should assign yourself to exactly one of these groups. The final result should be such that any two agents who are neighbors are in different groups. In particular, you should assign yourself to a group that is different from all of your neighbors' groups."
            ),
        ),
        TaskKind::VertexCover => (
            "Your task is to select, among all agents, a group of coordinators such that whenever two agents communicate at least one of them is a coordinator. The group of coordinators should be selected such that every coordinator has at least one neighbor who is not a coordinator.".to_string(),
            "You will be requested to state whether you are a coordinator. The response should either be 'Yes' or 'No'.".to_string(),
        ),
        TaskKind::Matching => (
            "Your task is to find build groups of two agents each which can communicate with each other.".to_string(),
            "You will be requested to name one of your neighbors that you build a group with or 'None' if all your neighbors are already assigned to other groups and cannot be in a group with you. In the end, every agent should only be in at most one group and agents in the same group have to name each other as the second group member consistently.".to_string(),
        ),
        TaskKind::LeaderElection => (
            "Your task is to collaboratively solve the problem of electing a single leader.".to_string(),
            "You will be requested to state whether or not you are the leader. The response should either be 'Yes' or 'No'. The final result should be such that exactly one agent responds with 'Yes' and all others say 'No' as there should be exactly one leader.".to_string(),
        ),
        TaskKind::Consensus => (
            "Your goal is to agree on a single value with the other agents. The possible values that you can decide on are either 0 or 1.".to_string(),
            "After the last round, each agent must decide on a single value.".to_string(),
        ),
    }
}

fn quoted_options<I: IntoIterator<Item = String>>(opts: I) -> String {
    opts.into_iter()
        .map(|o| format!("'{o}'"))
        .collect::<Vec<_>>()
        .join(", ")
}

/// The result prompt sent after the last round of message passing.
pub fn final_request(kind: TaskKind, groups: usize, neighbors: &[String]) -> String {
    let (question, options) = match kind {
        TaskKind::Coloring => (
            "Which group do you assign yourself to?",
            quoted_options((1..=groups).map(|g| format!("Group {g}"))),
        ),
        TaskKind::VertexCover => (
            "Are you a coordinator?",
            quoted_options(["Yes".to_string(), "No".to_string()]),
        ),
        TaskKind::Matching => (
            "Which of your neighbors do you build a group with?",
            quoted_options(neighbors.iter().cloned().chain(["None".to_string()])),
        ),
        TaskKind::LeaderElection => (
            "Are you the leader?",
            quoted_options(["Yes".to_string(), "No".to_string()]),
        ),
        TaskKind::Consensus => (
            "Which value do you decide on?",
            quoted_options(["0".to_string(), "1".to_string()]),
        ),
    };
    format!(
        "{question} Format your answer as follows: '{FINAL_ANSWER_MARKER}', followed by your final answer. Don't use any text for your final answer except one of these valid options: {options}."
    )
}
