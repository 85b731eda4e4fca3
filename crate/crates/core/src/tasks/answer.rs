use serde::{Deserialize, Serialize};

use super::TaskKind;

pub const FINAL_ANSWER_MARKER: &str = "### Final Answer ###";

const INVALID: &str = "<invalid>";

/// One agent's verdict after message passing.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum FinalAnswer {
    /// 1-based group index.
    GroupChoice(usize),
    YesNo(bool),
    /// Named partner, or `None` when the agent stays unmatched.
    PartnerChoice(Option<String>),
    Bit(u8),
    Invalid,
}

impl FinalAnswer {
    pub fn is_valid(&self) -> bool {
        !matches!(self, FinalAnswer::Invalid)
    }

    /// Surface form that `parse_answer_body` maps back to the same value.
    pub fn canonical(&self) -> String {
        match self {
            FinalAnswer::GroupChoice(g) => format!("Group {g}"),
            FinalAnswer::YesNo(true) => "Yes".into(),
            FinalAnswer::YesNo(false) => "No".into(),
            FinalAnswer::PartnerChoice(Some(n)) => n.clone(),
            FinalAnswer::PartnerChoice(None) => "None".into(),
            FinalAnswer::Bit(b) => b.to_string(),
            FinalAnswer::Invalid => INVALID.into(),
        }
    }
}

/// What counts as a well-formed answer for one run.
#[derive(Debug, Clone, Default)]
pub struct AnswerGrammar {
    /// Number of available groups (max degree + 1).
    pub groups: usize,
    /// All agent names in the run; matching answers are mapped onto these
    /// case-insensitively.
    pub names: Vec<String>,
}

fn strip_decoration(s: &str) -> &str {
    s.trim()
        .trim_matches(|c: char| matches!(c, '\'' | '"' | '`' | '*' | '_' | '[' | ']' | '(' | ')'))
        .trim_end_matches(['.', '!', ','])
        .trim()
}

/// Parses the text following the marker (or a canonical answer string).
pub fn parse_answer_body(kind: TaskKind, body: &str, grammar: &AnswerGrammar) -> FinalAnswer {
    let line = body.lines().map(str::trim).find(|l| !l.is_empty()).unwrap_or("");
    let raw = strip_decoration(line);
    if raw == INVALID {
        return FinalAnswer::Invalid;
    }
    let folded = raw.to_lowercase();
    match kind {
        TaskKind::Coloring => {
            let digits = folded.strip_prefix("group").unwrap_or(&folded).trim();
            match digits.parse::<usize>() {
                Ok(g) if (1..=grammar.groups).contains(&g) => FinalAnswer::GroupChoice(g),
                _ => FinalAnswer::Invalid,
            }
        }
        TaskKind::VertexCover | TaskKind::LeaderElection => match folded.as_str() {
            "yes" => FinalAnswer::YesNo(true),
            "no" => FinalAnswer::YesNo(false),
            _ => FinalAnswer::Invalid,
        },
        TaskKind::Matching => {
            if folded == "none" {
                FinalAnswer::PartnerChoice(None)
            } else if let Some(n) = grammar.names.iter().find(|n| n.to_lowercase() == folded) {
                FinalAnswer::PartnerChoice(Some(n.clone()))
            } else if !raw.is_empty() && !raw.contains(char::is_whitespace) {
                // Unknown names stay representable so scoring can flag them.
                FinalAnswer::PartnerChoice(Some(raw.to_string()))
            } else {
                FinalAnswer::Invalid
            }
        }
        TaskKind::Consensus => match folded.as_str() {
            "0" => FinalAnswer::Bit(0),
            "1" => FinalAnswer::Bit(1),
            _ => FinalAnswer::Invalid,
        },
    }
}

/// Parses a model's final response: the text after the last
/// `### Final Answer ###` marker, normalized and checked against the task's
/// grammar. A response without the marker is invalid.
pub fn parse_final_answer(kind: TaskKind, raw: &str, grammar: &AnswerGrammar) -> FinalAnswer {
    let marker = FINAL_ANSWER_MARKER.to_lowercase();
    // Lowercasing ASCII keeps byte offsets aligned; fall back to an exact search otherwise.
    let pos = if raw.is_ascii() {
        raw.to_ascii_lowercase().rfind(&marker)
    } else {
        raw.rfind(FINAL_ANSWER_MARKER)
    };
    match pos {
        Some(p) => parse_answer_body(kind, &raw[p + FINAL_ANSWER_MARKER.len()..], grammar),
        None => FinalAnswer::Invalid,
    }
}
