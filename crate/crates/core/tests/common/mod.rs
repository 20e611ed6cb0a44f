#![allow(dead_code)]

use std::path::{Path, PathBuf};

use domforge::corpus::FunctionRecord;
use domforge::cot::strip_states;
use domforge::generation::backend::{CompletionBackend, CompletionParams};
use domforge::pipeline::PipelineConfig;
use domforge::{Result, SubjectLanguage};

pub fn minicorpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/minicorpus")
}

/// Fixture pipeline config `name`, writing into `out_dir`.
pub fn fixture_config(name: &str, out_dir: &Path) -> PipelineConfig {
    let mut cfg = PipelineConfig::load(&minicorpus().join(name)).unwrap();
    cfg.out_dir = out_dir.to_path_buf();
    cfg
}

pub fn blessing() -> bool {
    std::env::var("BLESS").is_ok_and(|v| v == "1")
}

/// Stand-in for a knowledge-conditioned model: it knows every reference function and
/// writes it out only when the prompt mentions the function's first API. Otherwise
/// it answers with a stub body.
pub struct ReferenceBackend {
    records: Vec<FunctionRecord>,
}

impl ReferenceBackend {
    pub fn new(records: &[FunctionRecord]) -> Self {
        let mut records = records.to_vec();
        // longest signature first so a prefix never shadows a longer match
        records.sort_by_key(|r| std::cmp::Reverse(r.prompt_signature().len()));
        Self { records }
    }

    fn stub(lang: SubjectLanguage) -> &'static str {
        match lang {
            SubjectLanguage::Go => " {\n\tpanic(\"not implemented\")\n}\n",
            SubjectLanguage::Cpp => " {\n    return;\n}\n",
        }
    }
}

impl CompletionBackend for ReferenceBackend {
    fn complete(&self, prompt: &str, params: &CompletionParams) -> Result<String> {
        let Some((rec, at)) = self
            .records
            .iter()
            .find_map(|r| prompt.find(r.prompt_signature()).map(|i| (r, i)))
        else {
            return Ok(" {\n}\n".into());
        };
        let conditioned = rec
            .api_names()
            .first()
            .is_some_and(|api| prompt.contains(api.as_str()));
        let stepwise = params.stop.iter().any(|s| s == "\n");
        if !conditioned {
            return Ok(if stepwise {
                "}".into()
            } else {
                Self::stub(rec.subject_language).into()
            });
        }
        // continue the reference from whatever code the prompt already holds
        let after = &prompt[at + rec.prompt_signature().len()..];
        let so_far = strip_states(after.strip_prefix(' ').unwrap_or(after));
        let Some(rest) = rec.body.strip_prefix(so_far.as_str()) else {
            return Ok("}".into());
        };
        Ok(match (stepwise, so_far.is_empty()) {
            (true, _) => rest.to_string(),
            (false, true) => format!(" {rest}\n\nfunc trailing() {{}}\n"),
            (false, false) => format!("{rest}\n\nfunc trailing() {{}}\n"),
        })
    }
}
