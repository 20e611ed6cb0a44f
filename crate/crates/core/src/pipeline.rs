//! Stage runner: mine → kb → annotate → generate → eval, driven by one JSON config.
//!
//! Every stage reads and writes fixed file names under `out_dir`:
//!
//! | stage      | reads                          | writes                             |
//! |------------|--------------------------------|------------------------------------|
//! | `mine`     | manifest + checkouts           | `dataset.jsonl`, `mine_report.json` |
//! | `kb`       | `lib_src`                      | `kb.json`, `kb_report.json`        |
//! | `annotate` | `dataset.jsonl`, `kb.json`     | `train.jsonl`                      |
//! | `generate` | `dataset.jsonl` (+ `kb.json`)  | `gen.jsonl`                        |
//! | `eval`     | `dataset.jsonl`, `gen.jsonl`   | `report.json`                      |
//!
//! Each run also writes `run_manifest.json` with hashes of the config, the inputs and
//! the outputs. No timestamps are written, so a rerun on unchanged inputs with a
//! replay backend reproduces every file byte for byte.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{DateTime, Utc};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{
    deduplicate, filter_functions, read_dataset, read_jsonl, records_from_source,
    sample_eval_split, scan_repositories, write_dataset, write_jsonl, FunctionRecord, RepoManifest,
    ScanOptions, ScanReport, DEFAULT_MIN_STARS,
};
use crate::cot::annotate_dataset;
use crate::generation::{
    backend_from_spec, generate_cot_pt, generate_kg, generate_plain, CompletionBackend,
    CompletionParams, GenStep, GenerationResult, RetrievalInquirer, Strategy, TokenCounts,
    DEFAULT_MAX_NEW_TOKENS,
};
use crate::knowledge::{build_kb_from_library_source, KnowledgeBase};
use crate::metrics::{evaluate_corpus, EvalConfig, EvalFailure, EvalPair, EvalReport};
use crate::{Error, LibrarySpec, Result, SubjectLanguage};

pub const DATASET: &str = "dataset.jsonl";
pub const MINE_REPORT: &str = "mine_report.json";
pub const KB: &str = "kb.json";
pub const KB_REPORT: &str = "kb_report.json";
pub const TRAIN: &str = "train.jsonl";
pub const GEN: &str = "gen.jsonl";
pub const REPORT: &str = "report.json";
pub const RUN_MANIFEST: &str = "run_manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Mine,
    Kb,
    Annotate,
    Generate,
    Eval,
}

impl Stage {
    pub const ALL: [Stage; 5] = [
        Stage::Mine,
        Stage::Kb,
        Stage::Annotate,
        Stage::Generate,
        Stage::Eval,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Stage::Mine => "mine",
            Stage::Kb => "kb",
            Stage::Annotate => "annotate",
            Stage::Generate => "generate",
            Stage::Eval => "eval",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Stage::ALL
            .into_iter()
            .find(|st| st.as_str() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown stage `{s}`")))
    }
}

fn default_min_stars() -> u64 {
    DEFAULT_MIN_STARS
}

fn default_blocklist() -> Vec<String> {
    crate::corpus::default_blocklist().into_iter().collect()
}

fn default_true() -> bool {
    true
}

fn default_max_new_tokens() -> usize {
    DEFAULT_MAX_NEW_TOKENS
}

fn default_built_at() -> DateTime<Utc> {
    DateTime::<Utc>::UNIX_EPOCH
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    /// Name of the library to mine; builtin or defined in `libraries`.
    pub library: String,
    /// Additional library definitions; they shadow builtins of the same name.
    #[serde(default)]
    pub libraries: Vec<LibrarySpec>,
    #[serde(default)]
    pub manifest: Option<PathBuf>,
    /// Library source files or directories for the knowledge base.
    #[serde(default)]
    pub lib_src: Vec<PathBuf>,
    pub out_dir: PathBuf,
    #[serde(default = "default_min_stars")]
    pub min_stars: u64,
    #[serde(default)]
    pub exclude_globs: Vec<String>,
    #[serde(default = "default_blocklist")]
    pub blocklist: Vec<String>,
    #[serde(default = "default_true")]
    pub dedup: bool,
    /// Number of records to generate for; all records when absent.
    #[serde(default)]
    pub eval_size: Option<usize>,
    #[serde(default = "default_strategy")]
    pub strategy: Strategy,
    /// `mock:FILE` or an endpoint URL.
    #[serde(default)]
    pub backend: Option<String>,
    #[serde(default = "default_max_new_tokens")]
    pub max_new_tokens: usize,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default)]
    pub metrics: EvalConfig,
    #[serde(default)]
    pub seed: u64,
    /// Timestamp recorded in `kb.json`; fixed so reruns are byte-identical.
    #[serde(default = "default_built_at")]
    pub built_at: DateTime<Utc>,
}

fn default_strategy() -> Strategy {
    Strategy::Plain
}

impl PipelineConfig {
    pub fn new(library: impl Into<String>, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            library: library.into(),
            libraries: Vec::new(),
            manifest: None,
            lib_src: Vec::new(),
            out_dir: out_dir.into(),
            min_stars: DEFAULT_MIN_STARS,
            exclude_globs: Vec::new(),
            blocklist: default_blocklist(),
            dedup: true,
            eval_size: None,
            strategy: Strategy::Plain,
            backend: None,
            max_new_tokens: DEFAULT_MAX_NEW_TOKENS,
            temperature: 0.0,
            metrics: EvalConfig::default(),
            seed: 0,
            built_at: default_built_at(),
        }
    }

    /// Reads a config; relative paths (and `mock:` backend files) are resolved
    /// against the config file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: PipelineConfig =
            serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(m) = self.manifest.as_mut() {
            fix(m);
        }
        self.lib_src.iter_mut().for_each(fix);
        fix(&mut self.out_dir);
        if let Some(file) = self
            .backend
            .as_deref()
            .and_then(|b| b.strip_prefix("mock:"))
        {
            let p = PathBuf::from(file);
            if p.is_relative() {
                self.backend = Some(format!("mock:{}", base.join(p).display()));
            }
        }
    }

    pub fn library_spec(&self) -> Result<LibrarySpec> {
        let spec = self
            .libraries
            .iter()
            .find(|l| l.name == self.library)
            .cloned()
            .or_else(|| LibrarySpec::builtin(&self.library))
            .ok_or_else(|| Error::Library(format!("unknown library `{}`", self.library)))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn completion_params(&self) -> CompletionParams {
        CompletionParams {
            max_new_tokens: self.max_new_tokens,
            stop: Vec::new(),
            temperature: self.temperature,
        }
    }

    pub fn artifact(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    /// Checks every input the requested stages need that is not produced by an
    /// earlier requested stage.
    pub fn validate_for(&self, stages: &[Stage]) -> Result<()> {
        self.validate_inputs(stages, false)
    }

    fn validate_inputs(&self, stages: &[Stage], backend_given: bool) -> Result<()> {
        self.library_spec()?;
        self.metrics.weights.validate()?;
        let has = |s: Stage| stages.contains(&s);
        let need = |stage: Stage, artifact: &str, produced_by: Stage| -> Result<()> {
            let path = self.artifact(artifact);
            if has(produced_by) || path.is_file() {
                Ok(())
            } else {
                Err(Error::MissingArtifact {
                    stage: stage.to_string(),
                    artifact: path,
                })
            }
        };
        if has(Stage::Mine) {
            match &self.manifest {
                Some(m) if m.is_file() => {}
                Some(m) => {
                    return Err(Error::Config(format!(
                        "manifest {} does not exist",
                        m.display()
                    )))
                }
                None => return Err(Error::Config("stage `mine` needs `manifest`".into())),
            }
        }
        if has(Stage::Kb) {
            if self.lib_src.is_empty() {
                return Err(Error::Config("stage `kb` needs `lib_src`".into()));
            }
            if let Some(p) = self.lib_src.iter().find(|p| !p.exists()) {
                return Err(Error::Config(format!(
                    "library source {} does not exist",
                    p.display()
                )));
            }
        }
        if has(Stage::Annotate) {
            need(Stage::Annotate, DATASET, Stage::Mine)?;
            need(Stage::Annotate, KB, Stage::Kb)?;
        }
        if has(Stage::Generate) {
            need(Stage::Generate, DATASET, Stage::Mine)?;
            if self.strategy == Strategy::CotPt {
                need(Stage::Generate, KB, Stage::Kb)?;
            }
            match self.backend.as_deref() {
                _ if backend_given => {}
                None => return Err(Error::Config("stage `generate` needs `backend`".into())),
                Some(b) => {
                    if let Some(file) = b.strip_prefix("mock:") {
                        if !Path::new(file).is_file() {
                            return Err(Error::Config(format!(
                                "replay file {file} does not exist"
                            )));
                        }
                    }
                }
            }
        }
        if has(Stage::Eval) {
            need(Stage::Eval, DATASET, Stage::Mine)?;
            need(Stage::Eval, GEN, Stage::Generate)?;
        }
        Ok(())
    }
}

/// One line of `gen.jsonl`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenRecord {
    pub id: String,
    pub strategy: Strategy,
    pub prompt: String,
    pub code: String,
    pub predicted_apis: Vec<String>,
    pub reference_apis: Vec<String>,
    pub truncated: bool,
    pub token_counts: TokenCounts,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<Vec<GenStep>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl GenRecord {
    pub fn new(record: &FunctionRecord, strategy: Strategy, result: GenerationResult) -> Self {
        Self {
            id: record.id.clone(),
            strategy,
            prompt: result.prompt_used,
            code: result.code,
            predicted_apis: result.predicted_apis,
            reference_apis: record.api_names(),
            truncated: result.truncated,
            token_counts: result.token_counts,
            steps: result.steps,
            warnings: result.warnings,
        }
    }
}

/// Runs `strategy` for one record. The retrieval index is queried with the record
/// itself left out.
pub fn generate_for_record(
    record: &FunctionRecord,
    lib: &LibrarySpec,
    strategy: Strategy,
    index: &RetrievalInquirer,
    kb: Option<&KnowledgeBase>,
    backend: &dyn CompletionBackend,
    params: &CompletionParams,
) -> Result<GenRecord> {
    let sig = record.prompt_signature();
    let lang = record.subject_language;
    let inquirer = index.excluding(&record.id);
    let result = match strategy {
        Strategy::Plain => {
            let mut r = generate_plain(sig, lang, backend, params)?;
            r.predicted_apis = apis_in_generated(&r.code, sig, lib);
            r
        }
        Strategy::Kg => generate_kg(sig, lang, &inquirer, backend, params)?,
        Strategy::CotPt => generate_cot_pt(sig, lang, &inquirer, kb, backend, params)?,
    };
    Ok(GenRecord::new(record, strategy, result))
}

/// APIs found in generated code, for plain generations that predict none explicitly.
pub fn apis_in_generated(code: &str, signature: &str, lib: &LibrarySpec) -> Vec<String> {
    let header = match lib.subject_language {
        SubjectLanguage::Go => "package p\n\n",
        SubjectLanguage::Cpp => "",
    };
    let text = format!("{header}{signature} {code}\n");
    records_from_source(&text, "gen", "gen", lib)
        .into_iter()
        .next()
        .map(|r| r.api_names())
        .unwrap_or_default()
}

/// Pairs generations with their dataset records; generations without a record
/// become failures.
pub fn build_eval_pairs(
    gens: &[GenRecord],
    records: &[FunctionRecord],
) -> (Vec<EvalPair>, Vec<EvalFailure>) {
    let by_id: HashMap<&str, &FunctionRecord> =
        records.iter().map(|r| (r.id.as_str(), r)).collect();
    let mut pairs = Vec::new();
    let mut missing = Vec::new();
    for g in gens {
        match by_id.get(g.id.as_str()) {
            Some(r) => pairs.push(EvalPair {
                id: g.id.clone(),
                candidate: g.code.clone(),
                reference: r.body.clone(),
                subject_language: r.subject_language,
                predicted_apis: g.predicted_apis.clone(),
                reference_apis: r.api_names(),
            }),
            None => missing.push(EvalFailure {
                id: g.id.clone(),
                error: "no dataset record with this id".into(),
            }),
        }
    }
    (pairs, missing)
}

/// Scans, filters and (if `cfg.dedup`) deduplicates the repositories in `manifest`.
pub fn mine_dataset(
    cfg: &PipelineConfig,
    manifest: &RepoManifest,
    lib: &LibrarySpec,
) -> Result<(Vec<FunctionRecord>, MineReport)> {
    let opts = ScanOptions {
        min_stars: cfg.min_stars,
        exclude_globs: cfg.exclude_globs.clone(),
    };
    let scan = scan_repositories(manifest, lib, &opts)?;
    let extracted = scan.records.len();
    let blocklist: BTreeSet<String> = cfg.blocklist.iter().cloned().collect();
    let mut records = filter_functions(scan.records, &blocklist);
    let after_filter = records.len();
    if cfg.dedup {
        records = deduplicate(records);
    }
    let report = MineReport {
        scan: scan.report,
        extracted,
        after_filter,
        after_dedup: records.len(),
    };
    Ok((records, report))
}

/// Generates for `cfg.eval_size` records sampled with `cfg.seed` (all of them when
/// unset), using `cfg.strategy`. Output is ordered by id.
pub fn generate_dataset(
    cfg: &PipelineConfig,
    records: &[FunctionRecord],
    lib: &LibrarySpec,
    kb: Option<&KnowledgeBase>,
    backend: &dyn CompletionBackend,
) -> Result<Vec<GenRecord>> {
    let targets = match cfg.eval_size {
        Some(n) if n < records.len() => sample_eval_split(records, n, cfg.seed)?,
        _ => records.to_vec(),
    };
    let index = RetrievalInquirer::build(records);
    let params = cfg.completion_params();
    let mut gens = targets
        .par_iter()
        .map(|r| generate_for_record(r, lib, cfg.strategy, &index, kb, backend, &params))
        .collect::<Result<Vec<_>>>()?;
    gens.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(gens)
}

/// Scores `gens` against their dataset records.
pub fn evaluate_generations(
    gens: &[GenRecord],
    records: &[FunctionRecord],
    config: &EvalConfig,
) -> Result<EvalReport> {
    let (pairs, missing) = build_eval_pairs(gens, records);
    let mut report = evaluate_corpus(&pairs, config)?;
    report.failures.extend(missing);
    report.failures.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MineReport {
    pub scan: ScanReport,
    pub extracted: usize,
    pub after_filter: usize,
    pub after_dedup: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub config_sha256: String,
    pub stages: Vec<Stage>,
    /// Input file → sha256, keyed by path relative to the config's `out_dir` parent.
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::json(path, e))?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::json(path, e))
}

#[derive(Debug, Clone, Default)]
pub struct PipelineOutcome {
    pub artifacts: Vec<PathBuf>,
    pub report: Option<EvalReport>,
}

fn load_kb(cfg: &PipelineConfig) -> Result<KnowledgeBase> {
    KnowledgeBase::load(&cfg.artifact(KB))
}

fn run_stage(
    cfg: &PipelineConfig,
    lib: &LibrarySpec,
    stage: Stage,
    backend: Option<&dyn CompletionBackend>,
    out: &mut PipelineOutcome,
) -> Result<()> {
    log::info!("stage {stage}");
    match stage {
        Stage::Mine => {
            let manifest = RepoManifest::load(cfg.manifest.as_deref().expect("validated"))?;
            let (records, report) = mine_dataset(cfg, &manifest, lib)?;
            write_dataset(&records, &cfg.artifact(DATASET))?;
            write_json(&cfg.artifact(MINE_REPORT), &report)?;
            out.artifacts
                .extend([cfg.artifact(DATASET), cfg.artifact(MINE_REPORT)]);
        }
        Stage::Kb => {
            let (kb, report) = build_kb_from_library_source(&cfg.lib_src, lib, cfg.built_at)?;
            kb.save(&cfg.artifact(KB))?;
            write_json(&cfg.artifact(KB_REPORT), &report)?;
            out.artifacts
                .extend([cfg.artifact(KB), cfg.artifact(KB_REPORT)]);
        }
        Stage::Annotate => {
            let records = read_dataset(&cfg.artifact(DATASET))?;
            let kb = load_kb(cfg)?;
            let examples = annotate_dataset(&records, Some(&kb));
            write_jsonl(&examples, &cfg.artifact(TRAIN))?;
            out.artifacts.push(cfg.artifact(TRAIN));
        }
        Stage::Generate => {
            let records = read_dataset(&cfg.artifact(DATASET))?;
            let kb = if cfg.artifact(KB).is_file() {
                Some(load_kb(cfg)?)
            } else {
                None
            };
            let owned;
            let backend = match backend {
                Some(b) => b,
                None => {
                    owned = backend_from_spec(cfg.backend.as_deref().expect("validated"))?;
                    owned.as_ref()
                }
            };
            let gens = generate_dataset(cfg, &records, lib, kb.as_ref(), backend)?;
            write_jsonl(&gens, &cfg.artifact(GEN))?;
            out.artifacts.push(cfg.artifact(GEN));
        }
        Stage::Eval => {
            let records = read_dataset(&cfg.artifact(DATASET))?;
            let gens: Vec<GenRecord> = read_jsonl(&cfg.artifact(GEN))?;
            let report = evaluate_generations(&gens, &records, &cfg.metrics)?;
            write_json(&cfg.artifact(REPORT), &report)?;
            out.artifacts.push(cfg.artifact(REPORT));
            out.report = Some(report);
        }
    }
    Ok(())
}

/// Runs `stages` in pipeline order. Inputs are validated up front; a failing stage
/// stops the run and leaves earlier artifacts in place.
pub fn run_pipeline(cfg: &PipelineConfig, stages: &[Stage]) -> Result<PipelineOutcome> {
    run(cfg, stages, None)
}

/// Like [`run_pipeline`], but `generate` uses `backend` instead of `cfg.backend`.
pub fn run_pipeline_with_backend(
    cfg: &PipelineConfig,
    stages: &[Stage],
    backend: &dyn CompletionBackend,
) -> Result<PipelineOutcome> {
    run(cfg, stages, Some(backend))
}

fn run(
    cfg: &PipelineConfig,
    stages: &[Stage],
    backend: Option<&dyn CompletionBackend>,
) -> Result<PipelineOutcome> {
    let mut stages: Vec<Stage> = stages.to_vec();
    stages.sort();
    stages.dedup();
    cfg.validate_inputs(&stages, backend.is_some())?;
    let lib = cfg.library_spec()?;
    std::fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::io(&cfg.out_dir, e))?;
    let mut out = PipelineOutcome::default();
    for &stage in &stages {
        run_stage(cfg, &lib, stage, backend, &mut out)?;
    }
    write_run_manifest(cfg, &stages, &out)?;
    out.artifacts.push(cfg.artifact(RUN_MANIFEST));
    Ok(out)
}

fn display_path(cfg: &PipelineConfig, path: &Path) -> String {
    let base = cfg.out_dir.parent().unwrap_or(Path::new(""));
    path.strip_prefix(base)
        .unwrap_or(path)
        .display()
        .to_string()
}

fn write_run_manifest(cfg: &PipelineConfig, stages: &[Stage], out: &PipelineOutcome) -> Result<()> {
    let mut inputs = BTreeMap::new();
    let mut add_input = |path: &Path| -> Result<()> {
        if path.is_file() {
            inputs.insert(display_path(cfg, path), sha256_file(path)?);
        }
        Ok(())
    };
    if stages.contains(&Stage::Mine) {
        if let Some(m) = &cfg.manifest {
            add_input(m)?;
        }
    }
    if stages.contains(&Stage::Kb) {
        for p in &cfg.lib_src {
            if p.is_file() {
                add_input(p)?;
            } else {
                let mut files: Vec<PathBuf> = walkdir::WalkDir::new(p)
                    .into_iter()
                    .filter_map(|e| e.ok())
                    .filter(|e| e.file_type().is_file())
                    .map(|e| e.into_path())
                    .collect();
                files.sort();
                for f in files {
                    add_input(&f)?;
                }
            }
        }
    }
    if let Some(file) = cfg.backend.as_deref().and_then(|b| b.strip_prefix("mock:")) {
        if stages.contains(&Stage::Generate) {
            add_input(Path::new(file))?;
        }
    }
    let mut outputs = BTreeMap::new();
    for a in &out.artifacts {
        outputs.insert(display_path(cfg, a), sha256_file(a)?);
    }
    let config_json =
        serde_json::to_vec(cfg).map_err(|e| Error::json(cfg.artifact(RUN_MANIFEST), e))?;
    write_json(
        &cfg.artifact(RUN_MANIFEST),
        &RunManifest {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config_sha256: hex::encode(Sha256::digest(&config_json)),
            stages: stages.to_vec(),
            inputs,
            outputs,
        },
    )
}

/// Loads a previously written evaluation report.
pub fn load_report(path: &Path) -> Result<EvalReport> {
    read_json(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = PipelineConfig::new("gin", "out");
        cfg.manifest = Some("manifest.json".into());
        cfg.backend = Some("mock:replay.json".into());
        let path = dir.path().join("cfg.json");
        cfg.save(&path).unwrap();
        let loaded = PipelineConfig::load(&path).unwrap();
        assert_eq!(loaded.out_dir, dir.path().join("out"));
        assert_eq!(
            loaded.backend.as_deref(),
            Some(format!("mock:{}", dir.path().join("replay.json").display()).as_str())
        );
        loaded.save(&path).unwrap();
        assert_eq!(PipelineConfig::load(&path).unwrap(), loaded);
    }

    #[test]
    fn minimal_config_uses_defaults() {
        let cfg: PipelineConfig =
            serde_json::from_str(r#"{"library": "gin", "out_dir": "o"}"#).unwrap();
        assert_eq!(cfg.max_new_tokens, 256);
        assert_eq!(cfg.min_stars, 50);
        assert_eq!(cfg.metrics.max_n, 4);
        assert_eq!(cfg.blocklist, ["init", "main"]);
        assert!(serde_json::from_str::<PipelineConfig>(
            r#"{"library": "gin", "out_dir": "o", "x": 1}"#
        )
        .is_err());
    }

    #[test]
    fn eval_without_generate_output_is_a_dependency_error() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = PipelineConfig::new("gin", dir.path().join("out"));
        match run_pipeline(&cfg, &[Stage::Eval]) {
            Err(Error::MissingArtifact { stage, artifact }) => {
                assert_eq!(stage, "eval");
                assert!(artifact.ends_with(DATASET) || artifact.ends_with(GEN));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn apis_found_in_generated_body() {
        let lib = LibrarySpec::builtin("gin").unwrap();
        let apis = apis_in_generated("{\n\tc.JSON(200, nil)\n}", "func H(c *gin.Context)", &lib);
        assert_eq!(apis, ["gin.Context.JSON"]);
        assert!(apis_in_generated("garbage {{", "func H(c *gin.Context)", &lib).is_empty());
    }

    #[test]
    fn unknown_library_rejected() {
        let cfg = PipelineConfig::new("nope", "o");
        assert!(matches!(cfg.library_spec(), Err(Error::Library(_))));
    }
}
