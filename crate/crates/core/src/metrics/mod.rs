//! Similarity metrics for generated code.
//!
//! BLEU uses orders 1..=4 with uniform weights and the brevity penalty
//! `exp(1 - r/c)` when the candidate is shorter than the reference. A zero
//! precision at order 2 or above is smoothed to `1 / (total + 1)`; a zero unigram
//! precision yields 0.
//!
//! CodeBLEU is the weighted sum of four components: token BLEU, keyword-weighted
//! n-gram match, AST subtree match and dataflow match. When the reference has no
//! variables the dataflow component is dropped and the remaining weights are
//! renormalized.

mod bleu;
mod dataflow;
mod fragment;
mod syntax_match;
mod tokenize;

use std::collections::{HashMap, HashSet};
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, SubjectLanguage};

pub use bleu::{bleu, corpus_bleu, weighted_ngram_match};
pub use dataflow::{dataflow_edges, dataflow_match, FlowEdge};
pub use syntax_match::syntax_match;
pub use tokenize::{token_count, token_spans, tokenize_code};

pub const DEFAULT_MAX_N: usize = 4;

const GO_KEYWORDS: &str = include_str!("../../assets/keywords/go.txt");
const CPP_KEYWORDS: &str = include_str!("../../assets/keywords/cpp.txt");

/// Reserved words of the language, used by the weighted n-gram component.
pub fn keywords(lang: SubjectLanguage) -> &'static HashSet<&'static str> {
    static GO: OnceLock<HashSet<&'static str>> = OnceLock::new();
    static CPP: OnceLock<HashSet<&'static str>> = OnceLock::new();
    let parse = |text: &'static str| {
        text.lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect()
    };
    match lang {
        SubjectLanguage::Go => GO.get_or_init(|| parse(GO_KEYWORDS)),
        SubjectLanguage::Cpp => CPP.get_or_init(|| parse(CPP_KEYWORDS)),
    }
}

/// |multiset intersection| / |predicted|; 0 when nothing was predicted.
pub fn hit_ratio<S: AsRef<str>>(predicted: &[S], reference: &[S]) -> f64 {
    if predicted.is_empty() {
        return 0.0;
    }
    let mut pool: HashMap<&str, usize> = HashMap::new();
    for r in reference {
        *pool.entry(r.as_ref()).or_insert(0) += 1;
    }
    let mut hit = 0;
    for p in predicted {
        if let Some(n) = pool.get_mut(p.as_ref()).filter(|n| **n > 0) {
            *n -= 1;
            hit += 1;
        }
    }
    hit as f64 / predicted.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeBleuWeights {
    pub ngram: f64,
    pub weighted_ngram: f64,
    pub syntax: f64,
    pub dataflow: f64,
}

impl Default for CodeBleuWeights {
    fn default() -> Self {
        Self {
            ngram: 0.25,
            weighted_ngram: 0.25,
            syntax: 0.25,
            dataflow: 0.25,
        }
    }
}

impl CodeBleuWeights {
    pub fn validate(&self) -> Result<()> {
        let all = [self.ngram, self.weighted_ngram, self.syntax, self.dataflow];
        let sum: f64 = all.iter().sum();
        if all.iter().any(|w| !w.is_finite() || *w < 0.0) || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Weights(sum));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Components {
    pub ngram: f64,
    pub weighted_ngram: f64,
    pub syntax: f64,
    /// Absent when the reference defines no variables.
    pub dataflow: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CodeBleu {
    pub score: f64,
    pub components: Components,
}

pub fn codebleu(
    candidate: &str,
    reference: &str,
    lang: SubjectLanguage,
    weights: &CodeBleuWeights,
) -> Result<CodeBleu> {
    codebleu_with(candidate, reference, lang, weights, DEFAULT_MAX_N)
}

pub fn codebleu_with(
    candidate: &str,
    reference: &str,
    lang: SubjectLanguage,
    weights: &CodeBleuWeights,
    max_n: usize,
) -> Result<CodeBleu> {
    weights.validate()?;
    let cand = tokenize_code(candidate);
    let refs = tokenize_code(reference);
    let components = Components {
        ngram: bleu(&cand, &refs, max_n),
        weighted_ngram: weighted_ngram_match(&cand, &refs, keywords(lang), max_n),
        syntax: syntax_match(candidate, reference, lang),
        dataflow: dataflow_match(candidate, reference, lang),
    };
    let mut num = weights.ngram * components.ngram
        + weights.weighted_ngram * components.weighted_ngram
        + weights.syntax * components.syntax;
    let mut den = weights.ngram + weights.weighted_ngram + weights.syntax;
    if let Some(df) = components.dataflow {
        num += weights.dataflow * df;
        den += weights.dataflow;
    }
    let score = if den > 0.0 {
        (num / den).clamp(0.0, 1.0)
    } else {
        0.0
    };
    Ok(CodeBleu { score, components })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalPair {
    pub id: String,
    pub candidate: String,
    pub reference: String,
    pub subject_language: SubjectLanguage,
    #[serde(default)]
    pub predicted_apis: Vec<String>,
    #[serde(default)]
    pub reference_apis: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalConfig {
    #[serde(default)]
    pub weights: CodeBleuWeights,
    #[serde(default = "default_max_n")]
    pub max_n: usize,
    /// Also report pooled-count corpus BLEU.
    #[serde(default)]
    pub corpus_bleu: bool,
}

fn default_max_n() -> usize {
    DEFAULT_MAX_N
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            weights: CodeBleuWeights::default(),
            max_n: DEFAULT_MAX_N,
            corpus_bleu: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleScores {
    pub id: String,
    pub bleu: f64,
    pub codebleu: f64,
    pub components: Components,
    pub hit_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub samples: usize,
    pub bleu: f64,
    pub codebleu: f64,
    pub ngram: f64,
    pub weighted_ngram: f64,
    pub syntax: f64,
    /// Mean over the samples whose reference has dataflow.
    pub dataflow: Option<f64>,
    pub hit_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalFailure {
    pub id: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub config: EvalConfig,
    pub per_sample: Vec<SampleScores>,
    pub aggregate: Option<Aggregate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corpus_bleu: Option<f64>,
    pub failures: Vec<EvalFailure>,
}

impl EvalReport {
    /// Aggregate scores on a 0-100 scale, one `name: value` per line.
    pub fn summary(&self) -> String {
        let Some(a) = &self.aggregate else {
            return format!("no scored samples ({} failures)\n", self.failures.len());
        };
        let mut out = format!(
            "samples: {} (failures: {})\n",
            a.samples,
            self.failures.len()
        );
        let mut line = |name: &str, v: f64| out.push_str(&format!("{name}: {:.2}\n", v * 100.0));
        line("BLEU", a.bleu);
        line("CodeBLEU", a.codebleu);
        line("ngram", a.ngram);
        line("weighted_ngram", a.weighted_ngram);
        line("syntax", a.syntax);
        if let Some(df) = a.dataflow {
            line("dataflow", df);
        }
        line("HitRatio", a.hit_ratio);
        if let Some(c) = self.corpus_bleu {
            line("corpus BLEU", c);
        }
        out
    }
}

fn score_pair(pair: &EvalPair, config: &EvalConfig) -> Result<SampleScores> {
    if pair.reference.trim().is_empty() {
        return Err(Error::Config(format!(
            "pair `{}` has an empty reference",
            pair.id
        )));
    }
    let cb = codebleu_with(
        &pair.candidate,
        &pair.reference,
        pair.subject_language,
        &config.weights,
        config.max_n,
    )?;
    Ok(SampleScores {
        id: pair.id.clone(),
        bleu: cb.components.ngram,
        codebleu: cb.score,
        components: cb.components,
        hit_ratio: hit_ratio(&pair.predicted_apis, &pair.reference_apis),
    })
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Scores every pair in parallel; results and failures are ordered by id.
pub fn evaluate_corpus(pairs: &[EvalPair], config: &EvalConfig) -> Result<EvalReport> {
    config.weights.validate()?;
    let results: Vec<(String, Result<SampleScores>)> = pairs
        .par_iter()
        .map(|p| (p.id.clone(), score_pair(p, config)))
        .collect();
    let mut per_sample = Vec::new();
    let mut failures = Vec::new();
    for (id, r) in results {
        match r {
            Ok(s) => per_sample.push(s),
            Err(e) => failures.push(EvalFailure {
                id,
                error: e.to_string(),
            }),
        }
    }
    per_sample.sort_by(|a, b| a.id.cmp(&b.id));
    failures.sort_by(|a, b| a.id.cmp(&b.id));

    let aggregate = (!per_sample.is_empty()).then(|| Aggregate {
        samples: per_sample.len(),
        bleu: mean(per_sample.iter().map(|s| s.bleu)).unwrap_or(0.0),
        codebleu: mean(per_sample.iter().map(|s| s.codebleu)).unwrap_or(0.0),
        ngram: mean(per_sample.iter().map(|s| s.components.ngram)).unwrap_or(0.0),
        weighted_ngram: mean(per_sample.iter().map(|s| s.components.weighted_ngram)).unwrap_or(0.0),
        syntax: mean(per_sample.iter().map(|s| s.components.syntax)).unwrap_or(0.0),
        dataflow: mean(per_sample.iter().filter_map(|s| s.components.dataflow)),
        hit_ratio: mean(per_sample.iter().map(|s| s.hit_ratio)).unwrap_or(0.0),
    });

    let corpus = config.corpus_bleu.then(|| {
        let mut ordered: Vec<&EvalPair> = pairs
            .iter()
            .filter(|p| !p.reference.trim().is_empty())
            .collect();
        ordered.sort_by(|a, b| a.id.cmp(&b.id));
        let toks: Vec<(Vec<String>, Vec<String>)> = ordered
            .iter()
            .map(|p| (tokenize_code(&p.candidate), tokenize_code(&p.reference)))
            .collect();
        corpus_bleu(&toks, config.max_n)
    });

    Ok(EvalReport {
        config: config.clone(),
        per_sample,
        aggregate,
        corpus_bleu: corpus,
        failures,
    })
}
