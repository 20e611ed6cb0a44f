mod common;

use std::path::PathBuf;

use chrono::{DateTime, Utc};
use domforge::corpus::{
    deduplicate, filter_functions, read_dataset, scan_repositories, write_dataset, ManifestEntry,
    RepoManifest, ScanOptions,
};
use domforge::knowledge::{build_kb_from_library_source, KnowledgeSource};
use domforge::{Error, LibrarySpec, SubjectLanguage};

use common::minicorpus;

fn manifest() -> RepoManifest {
    RepoManifest::load(&minicorpus().join("manifest.json")).unwrap()
}

#[test]
fn scan_report_counts_thresholds_and_excludes() {
    let gin = LibrarySpec::builtin("gin").unwrap();
    let opts = ScanOptions {
        exclude_globs: vec!["**/vendor/**".into()],
        ..ScanOptions::with_min_stars(50)
    };
    let out = scan_repositories(&manifest(), &gin, &opts).unwrap();
    assert_eq!(out.report.repos_scanned, 2);
    assert_eq!(out.report.repos_below_threshold, 1);
    assert_eq!(out.report.repos_other_language, 1);
    assert_eq!(out.report.files_excluded, 1);
    assert!(out.records.iter().all(|r| r.repo_id != "someone/tinyrepo"));
    assert!(out.records.iter().all(|r| !r.path.contains("vendor")));
    for r in &out.records {
        assert!(r.full_text().starts_with("func"), "{}", r.name);
    }

    let lower = scan_repositories(&manifest(), &gin, &ScanOptions::with_min_stars(0)).unwrap();
    assert!(lower.records.iter().any(|r| r.name == "Hello"));
    assert!(lower.records.iter().any(|r| r.name == "Vendored"));
}

#[test]
fn output_order_is_stable() {
    let gin = LibrarySpec::builtin("gin").unwrap();
    let a = scan_repositories(&manifest(), &gin, &ScanOptions::with_min_stars(50)).unwrap();
    let b = scan_repositories(&manifest(), &gin, &ScanOptions::with_min_stars(50)).unwrap();
    assert_eq!(a.records, b.records);
    let keys: Vec<_> = a
        .records
        .iter()
        .map(|r| (r.repo_id.clone(), r.path.clone()))
        .collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
}

#[test]
fn copied_repository_is_deduplicated() {
    let dir = tempfile::tempdir().unwrap();
    let src = minicorpus().join("repos/blogsvc");
    for name in ["a", "b"] {
        let dst = dir.path().join(name);
        std::fs::create_dir_all(&dst).unwrap();
        for f in std::fs::read_dir(&src).unwrap() {
            let f = f.unwrap().path();
            std::fs::copy(&f, dst.join(f.file_name().unwrap())).unwrap();
        }
    }
    let entry = |id: &str, dir: PathBuf| ManifestEntry {
        repo_id: id.into(),
        local_path: dir,
        stargazers: 100,
        subject_language: SubjectLanguage::Go,
    };
    let manifest = RepoManifest {
        entries: vec![
            entry("x/a", dir.path().join("a")),
            entry("x/b", dir.path().join("b")),
        ],
    };
    let gin = LibrarySpec::builtin("gin").unwrap();
    let out = scan_repositories(&manifest, &gin, &ScanOptions::with_min_stars(50)).unwrap();
    let filtered = filter_functions(out.records, &domforge::corpus::default_blocklist());
    let unique = deduplicate(filtered.clone());
    assert_eq!(unique.len() * 2, filtered.len());
    assert!(unique.iter().all(|r| r.repo_id == "x/a"));

    let path = dir.path().join("dataset.jsonl");
    write_dataset(&unique, &path).unwrap();
    assert_eq!(read_dataset(&path).unwrap(), unique);
}

#[test]
fn duplicate_repo_ids_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    std::fs::write(
        &path,
        r#"{"entries": [
            {"repo_id": "a", "local_path": ".", "stargazers": 1, "subject_language": "go"},
            {"repo_id": "a", "local_path": ".", "stargazers": 1, "subject_language": "go"}]}"#,
    )
    .unwrap();
    assert!(matches!(RepoManifest::load(&path), Err(Error::Manifest(_))));
}

#[test]
fn kb_inherits_embedded_methods() {
    let gin = LibrarySpec::builtin("gin").unwrap();
    let (kb, report) = build_kb_from_library_source(
        &[minicorpus().join("libsrc/gin")],
        &gin,
        DateTime::<Utc>::UNIX_EPOCH,
    )
    .unwrap();
    // Engine embeds RouterGroup: GET, POST, DELETE and Group come through, Use is its own
    let get = kb.lookup("gin.Engine.GET").unwrap();
    assert_eq!(get.source, KnowledgeSource::Inherited);
    assert_eq!(
        get.docstring,
        kb.lookup("gin.RouterGroup.GET").unwrap().docstring
    );
    assert_eq!(report.inherited, 4);
    let own = kb.lookup("gin.Engine.Use").unwrap();
    assert_eq!(own.source, KnowledgeSource::LibrarySource);
    assert!(own
        .docstring
        .starts_with("Use attaches a global middleware"));
    assert!(kb.lookup("gin.TestOnlyHelper").is_none());
    assert!(kb.lookup("gin.Engine.ServeHTTP").is_none());
    assert_eq!(report.undocumented, 1);
    assert_eq!(
        kb.lookup("gin.RouterGroup.Use").unwrap().task_text(),
        "adds middleware to the group"
    );
}

#[test]
fn kb_follows_cpp_base_classes() {
    let cocos = LibrarySpec::builtin("cocos2d-x").unwrap();
    let (kb, report) = build_kb_from_library_source(
        &[minicorpus().join("libsrc/cocos2d")],
        &cocos,
        DateTime::<Utc>::UNIX_EPOCH,
    )
    .unwrap();
    assert_eq!(report.files_parsed, 3);
    let pos = kb.lookup("cocos2d.Label.setPosition").unwrap();
    assert_eq!(pos.source, KnowledgeSource::Inherited);
    assert_eq!(
        pos.task_text(),
        "sets the position (x,y) of the node in its parent's coordinate system"
    );
    assert_eq!(
        kb.lookup("cocos2d.Label.setColor").unwrap().source,
        KnowledgeSource::LibrarySource
    );
    assert!(kb.lookup("cocos2d.Sprite.setScale").is_some());
    assert!(kb.lookup("cocos2d.Director.getWinSize").is_none());
}
