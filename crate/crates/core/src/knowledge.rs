//! API knowledge base: qualified API name → docstring.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

use crate::syntax::{self, documented_apis, embedded_types};
use crate::{Error, LibrarySpec, Result};

/// Longest docstring text used in prompts and task states.
pub const PROMPT_DOC_LIMIT: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KnowledgeSource {
    LibrarySource,
    /// Copied from a method of an embedded or base type.
    Inherited,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KnowledgeEntry {
    pub api_name: String,
    /// Full doc comment with comment markers stripped, otherwise verbatim.
    pub docstring: String,
    pub source: KnowledgeSource,
}

impl KnowledgeEntry {
    pub fn new(api_name: impl Into<String>, docstring: impl Into<String>) -> Self {
        Self {
            api_name: api_name.into(),
            docstring: docstring.into(),
            source: KnowledgeSource::LibrarySource,
        }
    }

    fn simple_name(&self) -> &str {
        self.api_name.rsplit('.').next().unwrap_or(&self.api_name)
    }

    /// One-sentence description, e.g. `Prevents pending handlers from being called`.
    ///
    /// Takes the first sentence, drops a leading repetition of the function name (the
    /// Go `Name does X` convention) and a trailing "see ..." cross-reference clause,
    /// capitalizes, removes the final period and caps the length at [`PROMPT_DOC_LIMIT`].
    pub fn summary(&self) -> String {
        let flat = self
            .docstring
            .split_whitespace()
            .collect::<Vec<_>>()
            .join(" ");
        let flat = flat
            .strip_prefix("@brief ")
            .or_else(|| flat.strip_prefix("\\brief "))
            .unwrap_or(&flat);
        let mut sentence = first_sentence(flat).to_string();
        if let Some(rest) = sentence.strip_prefix(self.simple_name()) {
            if rest.starts_with(' ') && rest.trim().len() > 1 {
                sentence = rest.trim_start().to_string();
            }
        }
        if let Some(i) = [", see ", "; see ", " (see "]
            .iter()
            .filter_map(|m| sentence.find(m))
            .min()
        {
            sentence.truncate(i);
        }
        let sentence = sentence.trim_end().trim_end_matches('.').trim_end();
        let sentence = truncate_chars(sentence, PROMPT_DOC_LIMIT);
        capitalize(&sentence)
    }

    /// Task-state text: the summary with a lowercase first letter.
    pub fn task_text(&self) -> String {
        lowercase_first(&self.summary())
    }
}

fn first_sentence(text: &str) -> &str {
    let bytes = text.as_bytes();
    for (i, &b) in bytes.iter().enumerate() {
        if matches!(b, b'.' | b'!' | b'?') {
            let rest = &text[i + 1..];
            if rest.is_empty() {
                return text;
            }
            if rest.starts_with(' ') {
                let next = rest.trim_start().chars().next();
                if next.is_none_or(|c| c.is_uppercase()) {
                    return &text[..=i];
                }
            }
        }
    }
    text
}

fn truncate_chars(text: &str, limit: usize) -> String {
    if text.chars().count() <= limit {
        return text.to_string();
    }
    let cut: String = text.chars().take(limit).collect();
    match cut.rfind(' ') {
        Some(i) if i > 0 => cut[..i].to_string(),
        _ => cut,
    }
}

pub(crate) fn capitalize(text: &str) -> String {
    let mut chars = text.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

pub(crate) fn lowercase_first(text: &str) -> String {
    let mut chars = text.chars();
    match chars.next() {
        Some(c) => c.to_lowercase().chain(chars).collect(),
        None => String::new(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnowledgeBase {
    pub library: String,
    pub built_at: DateTime<Utc>,
    entries: BTreeMap<String, KnowledgeEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct KnowledgeBaseFile {
    library: String,
    built_at: DateTime<Utc>,
    entries: Vec<KnowledgeEntry>,
}

impl Serialize for KnowledgeBase {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        KnowledgeBaseFile {
            library: self.library.clone(),
            built_at: self.built_at,
            entries: self.entries.values().cloned().collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for KnowledgeBase {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let file = KnowledgeBaseFile::deserialize(d)?;
        let mut kb = KnowledgeBase::new(file.library, file.built_at);
        for e in file.entries {
            if kb.entries.contains_key(&e.api_name) {
                return Err(serde::de::Error::custom(format!(
                    "duplicate api_name `{}`",
                    e.api_name
                )));
            }
            kb.insert(e);
        }
        Ok(kb)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct KbBuildReport {
    pub files_parsed: usize,
    pub documented: usize,
    pub undocumented: usize,
    /// Documented APIs whose name was already present (first one wins).
    pub duplicates: usize,
    /// Entries copied onto embedding or derived types.
    pub inherited: usize,
}

impl KnowledgeBase {
    pub fn new(library: impl Into<String>, built_at: DateTime<Utc>) -> Self {
        Self {
            library: library.into(),
            built_at,
            entries: BTreeMap::new(),
        }
    }

    /// Exact, case-sensitive lookup.
    pub fn lookup(&self, api_name: &str) -> Option<&KnowledgeEntry> {
        self.entries.get(api_name)
    }

    /// Inserts an entry unless its name is taken or its docstring is blank.
    /// Returns whether the entry was stored.
    pub fn insert(&mut self, entry: KnowledgeEntry) -> bool {
        if entry.docstring.trim().is_empty() || self.entries.contains_key(&entry.api_name) {
            return false;
        }
        self.entries.insert(entry.api_name.clone(), entry);
        true
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = &KnowledgeEntry> {
        self.entries.values()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self).map_err(|e| Error::json(path, e))?;
        text.push('\n');
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(path, e))
    }
}

fn source_files(paths: &[PathBuf], lib: &LibrarySpec) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for root in paths {
        if !root.exists() {
            return Err(Error::io(
                root,
                std::io::Error::from(std::io::ErrorKind::NotFound),
            ));
        }
        for item in WalkDir::new(root).sort_by_file_name() {
            let item = item.map_err(|e| {
                let path = e
                    .path()
                    .map(Path::to_path_buf)
                    .unwrap_or_else(|| root.clone());
                Error::io(path, e.into())
            })?;
            let p = item.path();
            let is_test = p
                .file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.ends_with("_test.go"));
            if item.file_type().is_file() && lib.subject_language.matches_extension(p) && !is_test {
                files.push(p.to_path_buf());
            }
        }
    }
    Ok(files)
}

/// Builds a knowledge base from documented functions in the library's own sources.
pub fn build_kb_from_library_source(
    paths: &[PathBuf],
    lib: &LibrarySpec,
    built_at: DateTime<Utc>,
) -> Result<(KnowledgeBase, KbBuildReport)> {
    lib.validate()?;
    let mut kb = KnowledgeBase::new(lib.name.clone(), built_at);
    let mut report = KbBuildReport::default();
    let mut embeds = Vec::new();
    for file in source_files(paths, lib)? {
        let bytes = std::fs::read(&file).map_err(|e| Error::io(&file, e))?;
        let tree = match syntax::parse_bytes(&bytes, lib.subject_language) {
            Ok(t) => t,
            Err(e) => {
                log::warn!("skipping {}: {e}", file.display());
                continue;
            }
        };
        report.files_parsed += 1;
        for api in documented_apis(&tree, lib) {
            if !lib.is_api_name(&api.api_name) {
                continue;
            }
            match api.docstring {
                Some(doc) => {
                    if kb.insert(KnowledgeEntry::new(api.api_name, doc)) {
                        report.documented += 1;
                    } else {
                        report.duplicates += 1;
                    }
                }
                None => report.undocumented += 1,
            }
        }
        embeds.extend(embedded_types(&tree, lib));
    }
    report.inherited = inherit_methods(&mut kb, &embeds);
    Ok((kb, report))
}

/// Gives every embedding/derived type the documented methods of the types it
/// embeds, transitively, without overriding its own methods.
fn inherit_methods(kb: &mut KnowledgeBase, embeds: &[(String, String)]) -> usize {
    let mut added = 0;
    // each pass resolves one more level of embedding
    for _ in 0..embeds.len() {
        let mut new = Vec::new();
        for (outer, inner) in embeds {
            let prefix = format!("{inner}.");
            for e in kb.entries.values() {
                if let Some(method) = e
                    .api_name
                    .strip_prefix(&prefix)
                    .filter(|m| !m.contains('.'))
                {
                    let name = format!("{outer}.{method}");
                    if !kb.entries.contains_key(&name) {
                        new.push(KnowledgeEntry {
                            api_name: name,
                            docstring: e.docstring.clone(),
                            source: KnowledgeSource::Inherited,
                        });
                    }
                }
            }
        }
        if new.is_empty() {
            break;
        }
        for e in new {
            if kb.insert(e) {
                added += 1;
            }
        }
    }
    added
}

/// Union of two knowledge bases; `a` wins on conflicting names. Returns the merged
/// base and the number of names present in both.
pub fn merge(a: &KnowledgeBase, b: &KnowledgeBase) -> Result<(KnowledgeBase, usize)> {
    if a.library != b.library {
        return Err(Error::LibraryMismatch {
            left: a.library.clone(),
            right: b.library.clone(),
        });
    }
    let mut merged = a.clone();
    merged.built_at = a.built_at.max(b.built_at);
    let mut conflicts = 0;
    for e in b.entries() {
        if !merged.insert(e.clone()) {
            conflicts += 1;
        }
    }
    Ok((merged, conflicts))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn epoch() -> DateTime<Utc> {
        DateTime::<Utc>::UNIX_EPOCH
    }

    fn kb(entries: &[(&str, &str)]) -> KnowledgeBase {
        let mut kb = KnowledgeBase::new("gin", epoch());
        for (k, v) in entries {
            kb.insert(KnowledgeEntry::new(*k, *v));
        }
        kb
    }

    #[test]
    fn summaries_match_table_style() {
        let e = KnowledgeEntry::new(
            "gin.Context.Abort",
            "Abort prevents pending handlers from being called. Note that this will not stop the current handler.",
        );
        assert_eq!(e.summary(), "Prevents pending handlers from being called");
        assert_eq!(e.task_text(), "prevents pending handlers from being called");

        let e = KnowledgeEntry::new("gin.Context.JSON", "JSON serializes the given struct as JSON into the response body.\nIt also sets the Content-Type.");
        assert_eq!(
            e.summary(),
            "Serializes the given struct as JSON into the response body"
        );

        let e = KnowledgeEntry::new(
            "cocos2d.Sprite.create",
            "@brief Creates a sprite, e.g. from a file.",
        );
        assert_eq!(e.summary(), "Creates a sprite, e.g. from a file");

        let e = KnowledgeEntry::new(
            "gin.RouterGroup.Use",
            "Use adds middleware to the group, see example code in GitHub.",
        );
        assert_eq!(e.task_text(), "adds middleware to the group");
    }

    #[test]
    fn summary_is_capped() {
        let long = format!("Does {} thing.", "very ".repeat(200));
        let e = KnowledgeEntry::new("gin.X", long);
        assert!(e.summary().chars().count() <= PROMPT_DOC_LIMIT);
    }

    #[test]
    fn lookup_is_exact_and_case_sensitive() {
        let kb = kb(&[(
            "gin.Context.Abort",
            "Prevents pending handlers from being called",
        )]);
        assert!(kb.lookup("gin.Context.Abort").is_some());
        assert!(kb.lookup("gin.context.abort").is_none());
        assert!(kb.lookup("gin.Nope").is_none());
    }

    #[test]
    fn merge_rules() {
        let a = kb(&[("gin.A", "a"), ("gin.B", "b")]);
        let b = kb(&[("gin.C", "c"), ("gin.D", "d"), ("gin.E", "e")]);
        let (m, conflicts) = merge(&a, &b).unwrap();
        assert_eq!((m.len(), conflicts), (5, 0));

        let (m, conflicts) = merge(&a, &a).unwrap();
        assert_eq!(m, a);
        assert_eq!(conflicts, a.len());

        let b2 = kb(&[("gin.A", "other")]);
        let (m, conflicts) = merge(&a, &b2).unwrap();
        assert_eq!(m.lookup("gin.A").unwrap().docstring, "a");
        assert_eq!(conflicts, 1);

        let mut other = kb(&[]);
        other.library = "grpc-go".into();
        assert!(matches!(
            merge(&a, &other),
            Err(Error::LibraryMismatch { .. })
        ));
    }

    #[test]
    fn file_is_sorted_and_round_trips() {
        let kb = kb(&[("gin.Z", "z"), ("gin.A", "a")]);
        let json = serde_json::to_value(&kb).unwrap();
        assert_eq!(json["entries"][0]["api_name"], "gin.A");
        assert_eq!(json["entries"][0]["source"], "library_source");
        let back: KnowledgeBase = serde_json::from_value(json).unwrap();
        assert_eq!(back, kb);
    }

    #[test]
    fn blank_docstrings_not_stored() {
        let mut kb = kb(&[]);
        assert!(!kb.insert(KnowledgeEntry::new("gin.A", "  ")));
        assert!(kb.is_empty());
    }

    #[test]
    fn missing_source_path_errors() {
        let lib = LibrarySpec::builtin("gin").unwrap();
        let res =
            build_kb_from_library_source(&[PathBuf::from("/definitely/not/here")], &lib, epoch());
        assert!(res.is_err());
    }
}
