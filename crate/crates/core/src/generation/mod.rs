//! Completion strategies over pluggable backends and API inquirers.
//!
//! * plain: the signature prompt alone,
//! * kg: a `// [API] ...` line of recommended APIs above the signature prompt,
//! * CoT-PT: alternate between asking the inquirer for the next API and letting the
//!   backend write one statement under that API's knowledge state.
//!
//! Generated code is cut where the function's opening brace is balanced, and all
//! token budgets use [`crate::metrics::token_count`]. Knowledge-state lines do not
//! count against the budget.

pub mod backend;
pub mod inquirer;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cot::{leading_indent, strip_states, KnowledgeState, API_MARKER};
use crate::knowledge::KnowledgeBase;
use crate::metrics::{token_count, token_spans};
use crate::prompts::{render_prompt, PromptKind, PromptSpec};
use crate::{Error, Result, SubjectLanguage};

pub use backend::{
    apply_stop, backend_from_spec, prompt_key, CompletionBackend, CompletionParams, MockBackend,
    RemoteBackend, WireFormat, DEFAULT_MAX_NEW_TOKENS, TOKEN_ENV,
};
pub use inquirer::{identifier_tokens, ApiInquirer, FixedInquirer, LeaveOneOut, RetrievalInquirer};

/// Upper bound on CoT-PT iterations.
pub const MAX_COT_STEPS: usize = 32;
const MAX_CONTINUATIONS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    Plain,
    Kg,
    CotPt,
}

impl Strategy {
    pub fn as_str(&self) -> &'static str {
        match self {
            Strategy::Plain => "plain",
            Strategy::Kg => "kg",
            Strategy::CotPt => "cot-pt",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "plain" => Ok(Strategy::Plain),
            "kg" => Ok(Strategy::Kg),
            "cot-pt" | "cot" => Ok(Strategy::CotPt),
            _ => Err(Error::Config(format!(
                "unknown strategy `{s}` (plain, kg, cot-pt)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenStep {
    pub knowledge: KnowledgeState,
    pub chunk: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenCounts {
    pub generated: usize,
    pub knowledge_state: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationResult {
    pub code: String,
    pub prompt_used: String,
    /// CoT-PT transcript: each step's knowledge state and the code it produced.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<Vec<GenStep>>,
    /// APIs the strategy committed to (recommendations for kg, history for CoT-PT).
    pub predicted_apis: Vec<String>,
    pub token_counts: TokenCounts,
    /// Output cut by the token budget or never reached the end of the function.
    pub truncated: bool,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl GenerationResult {
    /// Annotated code: every step's state lines followed by its chunk.
    pub fn transcript(&self) -> Option<String> {
        self.steps.as_ref().map(|steps| {
            steps
                .iter()
                .map(|s| {
                    format!(
                        "{}{}",
                        s.knowledge.annotation(leading_indent(&s.chunk)),
                        s.chunk
                    )
                })
                .collect()
        })
    }
}

/// Brace depth outside comments and string/char literals.
#[derive(Debug, Clone, Copy, Default)]
struct Depths {
    brace: i64,
    /// Byte offset just past the brace that closed the first opened brace.
    closed_at: Option<usize>,
}

fn scan(text: &str, lang: SubjectLanguage) -> Depths {
    let b = text.as_bytes();
    let mut d = Depths::default();
    let mut opened = false;
    let mut i = 0;
    while i < b.len() {
        match b[i] {
            b'/' if b.get(i + 1) == Some(&b'/') => {
                i = text[i..].find('\n').map_or(b.len(), |n| i + n);
                continue;
            }
            b'/' if b.get(i + 1) == Some(&b'*') => {
                i = text[i + 2..].find("*/").map_or(b.len(), |n| i + 2 + n + 2);
                continue;
            }
            b'R' if lang == SubjectLanguage::Cpp && b.get(i + 1) == Some(&b'"') => {
                let open = i + 2;
                if let Some(p) = text[open..].find('(') {
                    let delim = &text[open..open + p];
                    let close = format!("){delim}\"");
                    i = text[open + p..]
                        .find(&close)
                        .map_or(b.len(), |n| open + p + n + close.len());
                    continue;
                }
            }
            b'`' if lang == SubjectLanguage::Go => {
                i = text[i + 1..].find('`').map_or(b.len(), |n| i + 1 + n + 1);
                continue;
            }
            q @ (b'"' | b'\'') => {
                let mut j = i + 1;
                while j < b.len() && b[j] != q && b[j] != b'\n' {
                    j += if b[j] == b'\\' { 2 } else { 1 };
                }
                i = (j + 1).min(b.len());
                continue;
            }
            b'{' => {
                d.brace += 1;
                opened = true;
            }
            b'}' => {
                d.brace -= 1;
                if opened && d.brace == 0 && d.closed_at.is_none() {
                    d.closed_at = Some(i + 1);
                }
            }
            _ => {}
        }
        i += 1;
    }
    d
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Truncation {
    pub text: String,
    /// False when the opening brace was never balanced; `text` is then the input.
    pub complete: bool,
}

/// The prefix of `text` through the brace balancing the first `{`, ignoring braces
/// in comments and literals.
pub fn truncate_to_function(text: &str, lang: SubjectLanguage) -> Truncation {
    match scan(text, lang).closed_at {
        Some(end) => Truncation {
            text: text[..end].to_string(),
            complete: true,
        },
        None => Truncation {
            text: text.to_string(),
            complete: false,
        },
    }
}

/// Keeps at most `max_tokens` tokens; returns whether anything was cut.
fn cut_to_budget(text: &mut String, max_tokens: usize) -> bool {
    let spans = token_spans(text);
    if spans.len() <= max_tokens {
        return false;
    }
    let end = if max_tokens == 0 {
        0
    } else {
        spans[max_tokens - 1].end
    };
    text.truncate(end);
    true
}

fn signature_prompt(signature: &str) -> Result<String> {
    render_prompt(&PromptSpec::new(PromptKind::Signature, signature))
}

fn finish(raw: &str, lang: SubjectLanguage, params: &CompletionParams) -> (String, bool) {
    let stopped = apply_stop(raw, &params.stop);
    let t = truncate_to_function(stopped, lang);
    let mut code = t.text.trim_start().to_string();
    let cut = cut_to_budget(&mut code, params.max_new_tokens);
    (code, cut || !t.complete)
}

pub fn generate_plain(
    signature: &str,
    lang: SubjectLanguage,
    backend: &dyn CompletionBackend,
    params: &CompletionParams,
) -> Result<GenerationResult> {
    let prompt = signature_prompt(signature)?;
    complete_prompt(prompt, lang, backend, params)
}

fn complete_prompt(
    prompt: String,
    lang: SubjectLanguage,
    backend: &dyn CompletionBackend,
    params: &CompletionParams,
) -> Result<GenerationResult> {
    let raw = backend.complete(&prompt, params)?;
    let (code, truncated) = finish(&raw, lang, params);
    Ok(GenerationResult {
        token_counts: TokenCounts {
            generated: token_count(&code),
            knowledge_state: 0,
        },
        code,
        prompt_used: prompt,
        steps: None,
        predicted_apis: Vec::new(),
        truncated,
        warnings: Vec::new(),
    })
}

/// Prompt with the recommended APIs as a comment line above the signature prompt.
pub fn kg_prompt(signature: &str, apis: &[String]) -> Result<String> {
    Ok(format!(
        "{API_MARKER}{}\n{}",
        apis.join(", "),
        signature_prompt(signature)?
    ))
}

pub fn generate_kg(
    signature: &str,
    lang: SubjectLanguage,
    inquirer: &dyn ApiInquirer,
    backend: &dyn CompletionBackend,
    params: &CompletionParams,
) -> Result<GenerationResult> {
    let apis = inquirer.recommend(signature, &[]);
    if apis.is_empty() {
        let mut plain = generate_plain(signature, lang, backend, params)?;
        plain
            .warnings
            .push("inquirer recommended no APIs; used the plain prompt".into());
        return Ok(plain);
    }
    let prompt = kg_prompt(signature, &apis)?;
    let mut result = complete_prompt(prompt, lang, backend, params)?;
    result.predicted_apis = apis;
    Ok(result)
}

fn needs_continuation(chunk: &str) -> bool {
    let t = chunk.trim_end();
    t.ends_with(['(', ',', '+', '-', '*', '/', '|', '&', '=', '.', ':'])
}

struct CotRun<'a> {
    signature: &'a str,
    lang: SubjectLanguage,
    backend: &'a dyn CompletionBackend,
    params: &'a CompletionParams,
    header: String,
    /// Annotated code so far.
    transcript: String,
    /// Plain code so far; always `strip_states(transcript)`.
    code: String,
    steps: Vec<GenStep>,
    knowledge_tokens: usize,
    budget_hit: bool,
}

impl CotRun<'_> {
    fn done(&self) -> bool {
        self.budget_hit || scan(&self.code, self.lang).closed_at.is_some()
    }

    fn prompt(&self, annotation: &str) -> String {
        format!("{} {}{}", self.header, self.transcript, annotation)
    }

    /// Asks for one statement under `state` (or the rest of the function when
    /// `to_end`), trims it to the function end and the budget, and appends it.
    fn step(&mut self, state: KnowledgeState, to_end: bool) -> Result<bool> {
        // indent of the last code line, one level deeper if that line opens a block
        let indent = match self
            .code
            .lines()
            .rev()
            .find(|l| !l.trim().is_empty() && l.trim() != "{")
        {
            Some(line) if line.trim_end().ends_with('{') => {
                format!("{}{}", leading_indent(line), self.lang.default_indent())
            }
            Some(line) if !leading_indent(line).is_empty() => leading_indent(line).to_string(),
            _ => self.lang.default_indent().to_string(),
        };
        let annotation = state.annotation(&indent);
        let params = if to_end {
            self.params.clone()
        } else {
            self.params.with_stop(&["\n"])
        };
        let base = self.prompt(&annotation);
        let mut chunk = String::new();
        for _ in 0..=MAX_CONTINUATIONS {
            let raw = self.backend.complete(&format!("{base}{chunk}"), &params)?;
            let piece = apply_stop(&raw, &params.stop);
            chunk.push_str(piece);
            if to_end || piece.is_empty() {
                break;
            }
            chunk.push('\n');
            if !needs_continuation(piece) {
                break;
            }
        }
        if chunk.trim().is_empty() {
            return Ok(false);
        }
        let mut combined = format!("{}{}", self.code, chunk);
        if let Some(end) = scan(&combined, self.lang).closed_at {
            combined.truncate(end);
        }
        if cut_to_budget(&mut combined, self.params.max_new_tokens) {
            self.budget_hit = true;
        }
        let Some(chunk) = combined.get(self.code.len()..).map(str::to_string) else {
            self.budget_hit = true;
            return Ok(false);
        };
        // Model output that imitates a state line would break the transcript law.
        let chunk = strip_states(&chunk);
        self.knowledge_tokens += token_count(&annotation);
        self.transcript.push_str(&annotation);
        self.transcript.push_str(&chunk);
        self.code.push_str(&chunk);
        self.steps.push(GenStep {
            knowledge: state,
            chunk,
        });
        Ok(true)
    }
}

/// CoT-PT loop: per step, take the inquirer's next API, attach its task text from
/// `kb`, and let the backend write one line below the state comments. When the
/// inquirer runs dry the backend completes the function without further states.
/// If it has nothing to recommend from the start, this is [`generate_plain`].
pub fn generate_cot_pt(
    signature: &str,
    lang: SubjectLanguage,
    inquirer: &dyn ApiInquirer,
    kb: Option<&KnowledgeBase>,
    backend: &dyn CompletionBackend,
    params: &CompletionParams,
) -> Result<GenerationResult> {
    let first = inquirer.recommend(signature, &[]);
    if first.is_empty() {
        let mut plain = generate_plain(signature, lang, backend, params)?;
        plain
            .warnings
            .push("inquirer recommended no APIs; used the plain prompt".into());
        return Ok(plain);
    }
    let mut run = CotRun {
        signature,
        lang,
        backend,
        params,
        header: signature_prompt(signature)?,
        transcript: "{\n".into(),
        code: "{\n".into(),
        steps: vec![GenStep {
            knowledge: KnowledgeState::default(),
            chunk: "{\n".into(),
        }],
        knowledge_tokens: 0,
        budget_hit: false,
    };
    let mut history: Vec<String> = Vec::new();
    let mut warnings = Vec::new();
    let mut next = first;
    for i in 0..MAX_COT_STEPS {
        if run.done() {
            break;
        }
        if i > 0 {
            next = inquirer.recommend(run.signature, &history);
        }
        let Some(api) = next.first().cloned() else {
            break;
        };
        history.push(api.clone());
        let state = KnowledgeState::for_apis(vec![api.clone()], kb);
        if kb.is_some() && state.task_state.is_empty() {
            warnings.push(format!("no knowledge entry for {api}; task state omitted"));
        }
        if !run.step(state, false)? {
            warnings.push(format!("backend produced no code for {api}"));
            break;
        }
    }
    if !run.done() {
        run.step(KnowledgeState::default(), true)?;
    }
    let closed = scan(&run.code, lang).closed_at.is_some();
    let prompt_used = run.prompt("");
    Ok(GenerationResult {
        token_counts: TokenCounts {
            generated: token_count(&run.code),
            knowledge_state: run.knowledge_tokens,
        },
        code: run.code,
        prompt_used,
        steps: Some(run.steps),
        predicted_apis: history,
        truncated: run.budget_hit || !closed,
        warnings,
    })
}
