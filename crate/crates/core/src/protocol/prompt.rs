//! Prompt text for every turn the engine injects into an agent's history.

use super::AgentIdentity;
use crate::tasks::TaskSpec;

/// Closing instruction of every round prompt. Backends that replay their
/// history use it to recognize round boundaries.
pub const ROUND_INSTRUCTION: &str = "Elaborate your chain of thought step-by-step first, then output the messages for your neighbors. Output your messages in JSON format as specified earlier.";

pub const INCOMING_HEADER: &str = "These are the messages from your neighbors:";

pub const MESSAGE_PREFIX: &str = "Message from ";

pub const FIRST_ROUND_NOTE: &str = "This is the first round of message passing. You have not received any messages yet.";

pub const NO_MESSAGES_NOTE: &str = "You did not receive any messages from your neighbors in this round.";

pub const RETRY_PREFIX: &str = "Your previous response could not be processed";

/// Fragments already end in a period and the template adds its own.
fn fragment(s: &str) -> &str {
    s.trim_end().trim_end_matches('.')
}

/// Renders the system prompt for one agent.
pub fn build_system_prompt(task: &TaskSpec, agent: &AgentIdentity, n: usize, rounds: usize) -> String {
    let (task1, task2) = task.prompts();
    let neighbors = agent.neighbor_names.join(", ");
    let name = &agent.name;
    format!(
        "You are an agent that is connected with other agents (your neighbors), who you communicate with. Your neighbors can in turn communicate with their neighbors and so forth. {task1}.\n\
The rules are as follows:\n\
1. There are {n} agents in total. Everybody has a unique name. Your name is {name}.\n\
2. You can only communicate with your immediate neighbors ({neighbors}). You cannot see or directly communicate with anyone else, unless information is relayed by intermediate agents.\n\
3. You can exchange text-based messages with your neighbors in rounds. In each round, you will first receive the last messages sent by your neighbors and then be asked to generate your response messages which your neighbors receive in the next round. This process repeats for {rounds} rounds of message passing. Importantly, the process is synchronous: Every agent decides on which messages to send at the same time and sees the messages from other agents only in the next round.\n\
4. Everybody (including you) decides what to share or request from neighbors. In every round, think step-by-step about the next set of messages you want to send. Output a JSON string that contains your response messages.\n\
5. The messages you send to your neighbors are formatted as JSON. For example, if your neighbors are Alan and Bob, your output should look as follows: ```{{\"Alan\": \"Message that will be sent to Alan.\", \"Bob\": \"Message that will be sent to Bob.\"}}``` It is not mandatory to send a message to every neighbor in every round. If you do not want to send a message to a particular neighbor, you may omit their name from the JSON.\n\
6. After {rounds} message passes, you have to solve the following task: {task2}.",
        task1 = fragment(&task1),
        task2 = fragment(&task2),
    )
}

/// The user turn opening round `round`. `incoming` must already be sorted by
/// sender name.
pub fn round_prompt(round: usize, incoming: &[(String, String)]) -> String {
    let mut out = String::new();
    if round == 0 {
        out.push_str(FIRST_ROUND_NOTE);
    } else if incoming.is_empty() {
        out.push_str(NO_MESSAGES_NOTE);
    } else {
        out.push_str(INCOMING_HEADER);
        for (sender, text) in incoming {
            out.push('\n');
            out.push_str(MESSAGE_PREFIX);
            out.push_str(sender);
            out.push_str(": ");
            out.push_str(text);
        }
    }
    out.push('\n');
    out.push_str(ROUND_INSTRUCTION);
    out
}

pub fn envelope_retry_prompt(error: &str) -> String {
    format!(
        "{RETRY_PREFIX}: {error}. Please try again. Output your messages for your neighbors as a single flat JSON object whose keys are neighbor names and whose values are the message texts."
    )
}

pub fn answer_retry_prompt() -> String {
    format!(
        "{RETRY_PREFIX}: the final answer was missing or not one of the valid options. Please try again and follow the requested answer format exactly."
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tasks::TaskKind;

    fn ava() -> AgentIdentity {
        AgentIdentity {
            node_index: 0,
            name: "Ava".into(),
            neighbor_names: vec!["Bo".into()],
        }
    }

    #[test]
    fn leader_prompt() {
        let task = TaskSpec {
            kind: TaskKind::LeaderElection,
            groups: 2,
        };
        let p = build_system_prompt(&task, &ava(), 2, 3);
        assert!(p.contains("exactly one agent responds with 'Yes'"));
        assert!(p.contains("electing a single leader.\nThe rules"));
        assert!(p.contains("immediate neighbors (Bo)"));
        assert!(p.contains("This process repeats for 3 rounds"));
        assert!(p.contains("There are 2 agents in total."));
        assert!(!p.contains(".."));
        assert_eq!(p.matches("Ava").count(), 1);
        assert!(p.contains("Your name is Ava."));
    }

    #[test]
    fn coloring_groups() {
        let task = TaskSpec {
            kind: TaskKind::Coloring,
            groups: 4,
        };
        let p = build_system_prompt(&task, &ava(), 4, 5);
        assert!(p.contains("exactly 4 groups available"));
        assert!(p.ends_with("different from all of your neighbors' groups."));
    }

    #[test]
    fn round_prompts() {
        assert!(round_prompt(0, &[]).starts_with(FIRST_ROUND_NOTE));
        assert!(round_prompt(2, &[]).starts_with(NO_MESSAGES_NOTE));
        let p = round_prompt(1, &[("Bo".into(), "hi".into()), ("Cy".into(), "yo".into())]);
        assert_eq!(
            p,
            format!("{INCOMING_HEADER}\nMessage from Bo: hi\nMessage from Cy: yo\n{ROUND_INSTRUCTION}")
        );
    }
}
