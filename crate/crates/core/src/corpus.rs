//! Repository scanning and the function dataset.
//!
//! Repositories are local checkouts listed in a [`RepoManifest`]. Every source file
//! that imports the target library contributes its top-level functions as
//! [`FunctionRecord`]s. Records are stored one JSON object per line.

use std::collections::{BTreeSet, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use globset::{Glob, GlobSet, GlobSetBuilder};
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use walkdir::WalkDir;

use crate::syntax::{self, ApiCall};
use crate::{Error, LibrarySpec, Result, SubjectLanguage};

pub const DEFAULT_MIN_STARS: u64 = 50;

pub fn default_blocklist() -> BTreeSet<String> {
    ["main", "init"].into_iter().map(String::from).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub repo_id: String,
    pub local_path: PathBuf,
    pub stargazers: u64,
    pub subject_language: SubjectLanguage,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepoManifest {
    pub entries: Vec<ManifestEntry>,
}

impl RepoManifest {
    /// Loads a manifest; relative `local_path`s are resolved against the manifest's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut manifest: RepoManifest =
            serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for entry in &mut manifest.entries {
            if entry.local_path.is_relative() {
                entry.local_path = base.join(&entry.local_path);
            }
        }
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for e in &self.entries {
            if !seen.insert(e.repo_id.as_str()) {
                return Err(Error::Manifest(format!(
                    "duplicate repo_id `{}`",
                    e.repo_id
                )));
            }
        }
        Ok(())
    }
}

/// One mined function.
///
/// `signature` runs from the first token of the definition up to the body's opening
/// brace and keeps the separating whitespace, so `signature + body` is the original
/// function text. API-call spans are byte offsets into that text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionRecord {
    pub id: String,
    pub repo_id: String,
    pub path: String,
    pub subject_language: SubjectLanguage,
    pub library: String,
    pub name: String,
    pub signature: String,
    pub body: String,
    pub api_calls: Vec<ApiCall>,
}

impl FunctionRecord {
    /// Signature as shown to a model: no trailing whitespace.
    pub fn prompt_signature(&self) -> &str {
        self.signature.trim_end()
    }

    pub fn full_text(&self) -> String {
        format!("{}{}", self.signature, self.body)
    }

    /// Offset of the body within the function text.
    pub fn body_offset(&self) -> usize {
        self.signature.len()
    }

    pub fn api_names(&self) -> Vec<String> {
        self.api_calls
            .iter()
            .map(|c| c.qualified_name.clone())
            .collect()
    }

    pub fn has_empty_body(&self) -> bool {
        let inner = self
            .body
            .trim()
            .strip_prefix('{')
            .and_then(|b| b.strip_suffix('}'))
            .unwrap_or(&self.body);
        inner.trim().is_empty()
    }
}

pub fn record_id(repo_id: &str, path: &str, start: usize, end: usize) -> String {
    let mut h = Sha256::new();
    h.update(repo_id.as_bytes());
    h.update([0]);
    h.update(path.as_bytes());
    h.update([0]);
    h.update(format!("{start}-{end}").as_bytes());
    hex::encode(&h.finalize()[..8])
}

#[derive(Debug, Clone, Default)]
pub struct ScanOptions {
    pub min_stars: u64,
    /// Globs over repository-relative paths; matching files are not scanned.
    pub exclude_globs: Vec<String>,
}

impl ScanOptions {
    pub fn with_min_stars(min_stars: u64) -> Self {
        Self {
            min_stars,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanIssue {
    pub repo_id: String,
    pub path: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanReport {
    pub repos_scanned: usize,
    pub repos_below_threshold: usize,
    pub repos_other_language: usize,
    pub files_scanned: usize,
    pub files_importing_library: usize,
    pub files_excluded: usize,
    /// Functions lost to unrecoverable parse-error regions.
    pub functions_dropped: usize,
    pub issues: Vec<ScanIssue>,
}

#[derive(Debug, Clone, Default)]
pub struct ScanOutput {
    pub records: Vec<FunctionRecord>,
    pub report: ScanReport,
}

fn build_globset(globs: &[String]) -> Result<GlobSet> {
    let mut builder = GlobSetBuilder::new();
    for g in globs {
        builder.add(Glob::new(g).map_err(|e| Error::Config(format!("bad glob `{g}`: {e}")))?);
    }
    builder
        .build()
        .map_err(|e| Error::Config(format!("bad glob set: {e}")))
}

enum FileOutcome {
    Skipped,
    Unreadable(String),
    Scanned {
        imports: bool,
        records: Vec<FunctionRecord>,
        dropped: usize,
    },
}

fn scan_file(repo_id: &str, rel: &str, abs: &Path, lib: &LibrarySpec) -> FileOutcome {
    let bytes = match std::fs::read(abs) {
        Ok(b) => b,
        Err(e) => return FileOutcome::Unreadable(e.to_string()),
    };
    let tree = match syntax::parse_bytes(&bytes, lib.subject_language) {
        Ok(t) => t,
        Err(e) => {
            log::warn!("skipping {repo_id}/{rel}: {e}");
            return FileOutcome::Skipped;
        }
    };
    if !syntax::uses_library(&tree, lib) {
        return FileOutcome::Scanned {
            imports: false,
            records: Vec::new(),
            dropped: 0,
        };
    }
    let (records, dropped) = records_from_tree(&tree, repo_id, rel, lib);
    FileOutcome::Scanned {
        imports: true,
        records,
        dropped,
    }
}

/// Function records of an already parsed file, plus the number of functions
/// dropped because of syntax errors. Does not check the file's imports.
pub fn records_from_tree(
    tree: &syntax::SyntaxTree,
    repo_id: &str,
    path: &str,
    lib: &LibrarySpec,
) -> (Vec<FunctionRecord>, usize) {
    let source = tree.source();
    let extraction = syntax::extract_functions_detailed(tree);
    let records = extraction
        .functions
        .iter()
        .map(|f| {
            let vars = syntax::collect_typed_variables(f, tree, lib);
            let api_calls = syntax::extract_api_calls(f, tree, lib, &vars)
                .into_iter()
                .map(|c| ApiCall {
                    receiver_var: None,
                    ..c.rebased(f.span.start)
                })
                .collect();
            FunctionRecord {
                id: record_id(repo_id, path, f.span.start, f.span.end),
                repo_id: repo_id.to_string(),
                path: path.to_string(),
                subject_language: lib.subject_language,
                library: lib.name.clone(),
                name: f.name.clone(),
                signature: f.signature(source).to_string(),
                body: f.body(source).to_string(),
                api_calls,
            }
        })
        .collect();
    (records, extraction.dropped)
}

/// Parses `text` as a file of `lib`'s language and extracts its function records.
pub fn records_from_source(
    text: &str,
    repo_id: &str,
    path: &str,
    lib: &LibrarySpec,
) -> Vec<FunctionRecord> {
    let tree = syntax::parse_source(text, lib.subject_language);
    records_from_tree(&tree, repo_id, path, lib).0
}

/// Extracts every function from files importing `lib`, in repositories with at least
/// `options.min_stars` stargazers. Unreadable entries are reported, not fatal.
///
/// Output is ordered by (repo_id, path, byte offset) regardless of scan parallelism.
pub fn scan_repositories(
    manifest: &RepoManifest,
    lib: &LibrarySpec,
    options: &ScanOptions,
) -> Result<ScanOutput> {
    lib.validate()?;
    manifest.validate()?;
    let excludes = build_globset(&options.exclude_globs)?;
    let mut out = ScanOutput::default();

    let mut entries: Vec<&ManifestEntry> = manifest.entries.iter().collect();
    entries.sort_by(|a, b| a.repo_id.cmp(&b.repo_id));

    for entry in entries {
        if entry.subject_language != lib.subject_language {
            out.report.repos_other_language += 1;
            continue;
        }
        if entry.stargazers < options.min_stars {
            out.report.repos_below_threshold += 1;
            continue;
        }
        if !entry.local_path.is_dir() {
            out.report.issues.push(ScanIssue {
                repo_id: entry.repo_id.clone(),
                path: entry.local_path.display().to_string(),
                message: "local_path is not a readable directory".into(),
            });
            continue;
        }
        out.report.repos_scanned += 1;

        let mut files: Vec<(String, PathBuf)> = Vec::new();
        for item in WalkDir::new(&entry.local_path).sort_by_file_name() {
            let item = match item {
                Ok(i) => i,
                Err(e) => {
                    out.report.issues.push(ScanIssue {
                        repo_id: entry.repo_id.clone(),
                        path: e
                            .path()
                            .map(|p| p.display().to_string())
                            .unwrap_or_default(),
                        message: e.to_string(),
                    });
                    continue;
                }
            };
            if !item.file_type().is_file() || !lib.subject_language.matches_extension(item.path()) {
                continue;
            }
            let rel = item
                .path()
                .strip_prefix(&entry.local_path)
                .unwrap_or(item.path())
                .components()
                .map(|c| c.as_os_str().to_string_lossy())
                .collect::<Vec<_>>()
                .join("/");
            if excludes.is_match(&rel) {
                out.report.files_excluded += 1;
                continue;
            }
            files.push((rel, item.path().to_path_buf()));
        }

        let outcomes: Vec<(String, FileOutcome)> = files
            .par_iter()
            .map(|(rel, abs)| (rel.clone(), scan_file(&entry.repo_id, rel, abs, lib)))
            .collect();
        for (rel, outcome) in outcomes {
            match outcome {
                FileOutcome::Skipped => {}
                FileOutcome::Unreadable(message) => out.report.issues.push(ScanIssue {
                    repo_id: entry.repo_id.clone(),
                    path: rel,
                    message,
                }),
                FileOutcome::Scanned {
                    imports,
                    records,
                    dropped,
                } => {
                    out.report.files_scanned += 1;
                    if imports {
                        out.report.files_importing_library += 1;
                    }
                    out.report.functions_dropped += dropped;
                    out.records.extend(records);
                }
            }
        }
    }
    // stable: records from one file stay in source order
    out.records.sort_by(|a, b| {
        (a.repo_id.as_str(), a.path.as_str()).cmp(&(b.repo_id.as_str(), b.path.as_str()))
    });
    Ok(out)
}

/// Drops records with empty bodies or blocklisted names. Order is preserved.
pub fn filter_functions(
    records: Vec<FunctionRecord>,
    blocklist: &BTreeSet<String>,
) -> Vec<FunctionRecord> {
    records
        .into_iter()
        .filter(|r| !r.name.is_empty() && !r.has_empty_body() && !blocklist.contains(&r.name))
        .collect()
}

/// Dedup key: SHA-256 of the body with whitespace runs collapsed to one space.
/// Comments are part of the key.
pub fn dedup_key(body: &str) -> [u8; 32] {
    let mut normalized = String::with_capacity(body.len());
    let mut in_space = false;
    for c in body.chars() {
        if c.is_whitespace() {
            if !in_space {
                normalized.push(' ');
            }
            in_space = true;
        } else {
            normalized.push(c);
            in_space = false;
        }
    }
    Sha256::digest(normalized.as_bytes()).into()
}

/// Keeps the first record per dedup key.
pub fn deduplicate(records: Vec<FunctionRecord>) -> Vec<FunctionRecord> {
    let mut seen = HashSet::new();
    records
        .into_iter()
        .filter(|r| seen.insert(dedup_key(&r.body)))
        .collect()
}

pub fn write_dataset(records: &[FunctionRecord], path: &Path) -> Result<()> {
    write_jsonl(records, path)
}

pub fn read_dataset(path: &Path) -> Result<Vec<FunctionRecord>> {
    read_jsonl(path)
}

pub fn write_jsonl<T: Serialize>(items: &[T], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for item in items {
        serde_json::to_writer(&mut w, item).map_err(|e| Error::json(path, e))?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(&line).map_err(|e| Error::MalformedLine {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(item);
    }
    Ok(out)
}

/// Deterministic sample of `n` records for evaluation.
pub fn sample_eval_split(
    records: &[FunctionRecord],
    n: usize,
    seed: u64,
) -> Result<Vec<FunctionRecord>> {
    if n > records.len() {
        return Err(Error::SampleTooLarge {
            requested: n,
            available: records.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(index::sample(&mut rng, records.len(), n)
        .into_iter()
        .map(|i| records[i].clone())
        .collect())
}
