//! Chain-of-thought decomposition of functions into knowledge-annotated steps.
//!
//! A knowledge state is written into code as comment lines directly above the
//! statement it describes:
//!
//! ```text
//! {indent}// [API] gin.Context.Query
//! {indent}// [TASK] get the request parameter
//! ```
//!
//! The `[TASK]` line is present only when at least one API of the step has a
//! knowledge-base entry. [`strip_states`] removes exactly these lines, so stripping an
//! annotated body gives back the original bytes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::FunctionRecord;
use crate::knowledge::KnowledgeBase;
use crate::metrics::token_count;
use crate::SubjectLanguage;

pub const API_MARKER: &str = "// [API] ";
pub const TASK_MARKER: &str = "// [TASK] ";

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnowledgeState {
    pub api_state: Vec<String>,
    pub task_state: String,
}

impl KnowledgeState {
    /// State for `apis`, with task texts of the APIs found in `kb` joined by `"; "`.
    pub fn for_apis(apis: Vec<String>, kb: Option<&KnowledgeBase>) -> Self {
        let task_state = kb
            .map(|kb| {
                apis.iter()
                    .filter_map(|a| kb.lookup(a))
                    .map(|e| e.task_text())
                    .filter(|t| !t.is_empty())
                    .collect::<Vec<_>>()
                    .join("; ")
            })
            .unwrap_or_default();
        Self {
            api_state: apis,
            task_state,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.api_state.is_empty()
    }

    /// The comment lines for this state, each newline-terminated; empty for an
    /// empty state.
    pub fn annotation(&self, indent: &str) -> String {
        if self.api_state.is_empty() {
            return String::new();
        }
        let mut out = format!("{indent}{API_MARKER}{}\n", self.api_state.join(", "));
        if !self.task_state.is_empty() {
            out.push_str(&format!("{indent}{TASK_MARKER}{}\n", self.task_state));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CotStep {
    pub knowledge: KnowledgeState,
    pub code: String,
}

impl CotStep {
    pub fn annotated(&self) -> String {
        format!(
            "{}{}",
            self.knowledge.annotation(leading_indent(&self.code)),
            self.code
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CotSequence {
    /// The function signature, including the whitespace before the body.
    pub input: String,
    pub steps: Vec<CotStep>,
}

impl CotSequence {
    /// Signature followed by every step's annotation lines and code.
    pub fn to_text(&self) -> String {
        let mut out = self.input.clone();
        for step in &self.steps {
            out.push_str(&step.annotated());
        }
        out
    }

    pub fn body(&self) -> String {
        self.steps.iter().map(|s| s.code.as_str()).collect()
    }
}

pub(crate) fn leading_indent(line: &str) -> &str {
    let end = line.find(|c| c != ' ' && c != '\t').unwrap_or(line.len());
    &line[..end]
}

fn line_start(text: &str, offset: usize) -> usize {
    text[..offset].rfind('\n').map_or(0, |i| i + 1)
}

/// Partitions the body at the starts of lines holding API-bearing statements.
///
/// Calls are grouped by the line their enclosing statement starts on, so chained
/// calls and multi-line statements form one step. Lines before the first API
/// statement form a leading empty-state step.
pub fn decompose_steps(record: &FunctionRecord, kb: Option<&KnowledgeBase>) -> Vec<CotStep> {
    let body = &record.body;
    if body.is_empty() {
        return Vec::new();
    }
    let offset = record.body_offset();
    let mut groups: Vec<(usize, Vec<String>)> = Vec::new();
    let mut calls: Vec<_> = record
        .api_calls
        .iter()
        .filter(|c| {
            c.stmt_byte_span.start >= offset && c.stmt_byte_span.start - offset <= body.len()
        })
        .collect();
    calls.sort_by_key(|c| {
        (
            c.stmt_byte_span.start,
            c.call_byte_span.start,
            c.call_byte_span.end,
        )
    });
    for call in calls {
        let start = line_start(body, call.stmt_byte_span.start - offset);
        match groups.iter_mut().find(|(s, _)| *s == start) {
            Some((_, apis)) => {
                if !apis.contains(&call.qualified_name) {
                    apis.push(call.qualified_name.clone());
                }
            }
            None => groups.push((start, vec![call.qualified_name.clone()])),
        }
    }
    groups.sort_by_key(|(s, _)| *s);

    let mut steps = Vec::new();
    if groups.first().is_none_or(|(s, _)| *s > 0) {
        let end = groups.first().map_or(body.len(), |(s, _)| *s);
        steps.push(CotStep {
            knowledge: KnowledgeState::default(),
            code: body[..end].to_string(),
        });
    }
    for (i, (start, apis)) in groups.iter().enumerate() {
        let end = groups.get(i + 1).map_or(body.len(), |(s, _)| *s);
        steps.push(CotStep {
            knowledge: KnowledgeState::for_apis(apis.clone(), kb),
            code: body[*start..end].to_string(),
        });
    }
    steps
}

/// The body with knowledge-state comment lines above every API-bearing statement.
pub fn annotate_function(record: &FunctionRecord, kb: Option<&KnowledgeBase>) -> String {
    decompose_steps(record, kb)
        .iter()
        .map(CotStep::annotated)
        .collect()
}

fn is_state_line(line: &str) -> bool {
    let rest = line.trim_start_matches([' ', '\t']);
    rest.starts_with(API_MARKER) || rest.starts_with(TASK_MARKER)
}

/// Removes every knowledge-state comment line (with its newline).
pub fn strip_states(annotated: &str) -> String {
    annotated
        .split_inclusive('\n')
        .filter(|line| !is_state_line(line))
        .collect()
}

pub fn build_training_sequence(record: &FunctionRecord, kb: Option<&KnowledgeBase>) -> CotSequence {
    CotSequence {
        input: record.signature.clone(),
        steps: decompose_steps(record, kb),
    }
}

/// One line of the fine-tuning export (`train.jsonl`).
///
/// * `text`: signature followed by the annotated body; the string a causal LM trains on.
/// * `annotated_body`: the body alone with state comment lines.
/// * `cot_sequence`: the same content as structured steps.
/// * `tokens_with_states` / `tokens_without_states`: token counts of `text` and of the
///   plain function, so a trainer can budget either way.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingExample {
    pub id: String,
    pub library: String,
    pub subject_language: SubjectLanguage,
    pub text: String,
    pub annotated_body: String,
    pub cot_sequence: CotSequence,
    pub tokens_with_states: usize,
    pub tokens_without_states: usize,
}

pub fn training_example(record: &FunctionRecord, kb: Option<&KnowledgeBase>) -> TrainingExample {
    let seq = build_training_sequence(record, kb);
    let text = seq.to_text();
    let annotated_body = text[seq.input.len()..].to_string();
    TrainingExample {
        id: record.id.clone(),
        library: record.library.clone(),
        subject_language: record.subject_language,
        tokens_with_states: token_count(&text),
        tokens_without_states: token_count(&record.full_text()),
        text,
        annotated_body,
        cot_sequence: seq,
    }
}

pub fn annotate_dataset(
    records: &[FunctionRecord],
    kb: Option<&KnowledgeBase>,
) -> Vec<TrainingExample> {
    records
        .par_iter()
        .map(|r| training_example(r, kb))
        .collect()
}
