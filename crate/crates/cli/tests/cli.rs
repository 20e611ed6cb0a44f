use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn minicorpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/minicorpus")
}

fn domforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_domforge"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = domforge(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn fail(args: &[&str]) -> String {
    let out = domforge(args);
    assert_eq!(out.status.code(), Some(1), "{args:?} should fail");
    String::from_utf8(out.stderr).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn pipeline_subcommand_matches_golden() {
    let dir = tempfile::tempdir().unwrap();
    let config = minicorpus().join("pipeline_gin_kg.json");
    let stdout = ok(&[
        "pipeline",
        "--config",
        s(&config),
        "--out-dir",
        s(dir.path()),
    ]);
    assert!(stdout.contains("samples: 25"), "{stdout}");
    let golden = minicorpus().join("golden/pipeline_gin_kg");
    for name in ["gen.jsonl", "report.json"] {
        assert_eq!(
            read(&dir.path().join(name)),
            read(&golden.join(name)),
            "{name}"
        );
    }
    assert!(dir.path().join("run_manifest.json").is_file());
}

#[test]
fn separate_subcommands_reproduce_the_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let [ds, kb, train, gen, report] = [
        "ds.jsonl",
        "kb.json",
        "train.jsonl",
        "gen.jsonl",
        "report.json",
    ]
    .map(|n| dir.path().join(n));
    let config = minicorpus().join("pipeline_gin_cot-pt.json");
    let cfg = s(&config);
    ok(&["mine", "--config", cfg, "--out", s(&ds)]);
    ok(&["kb", "build", "--config", cfg, "--out", s(&kb)]);
    ok(&[
        "annotate",
        "--dataset",
        s(&ds),
        "--kb",
        s(&kb),
        "--out",
        s(&train),
    ]);
    ok(&[
        "generate",
        "--config",
        cfg,
        "--dataset",
        s(&ds),
        "--kb",
        s(&kb),
        "--out",
        s(&gen),
    ]);
    ok(&[
        "eval",
        "--gen",
        s(&gen),
        "--refs",
        s(&ds),
        "--out",
        s(&report),
    ]);

    let golden = minicorpus().join("golden/pipeline_gin_cot-pt");
    assert_eq!(read(&gen), read(&golden.join("gen.jsonl")));
    assert_eq!(read(&report), read(&golden.join("report.json")));
    assert_eq!(read(&train).lines().count(), 25);
}

#[test]
fn flags_work_without_a_config() {
    let dir = tempfile::tempdir().unwrap();
    let mc = minicorpus();
    let ds = dir.path().join("ds.jsonl");
    let kb = dir.path().join("kb.json");
    ok(&[
        "mine",
        "--manifest",
        s(&mc.join("manifest.json")),
        "--library",
        "cocos2d-x",
        "--min-stars",
        "50",
        "--out",
        s(&ds),
    ]);
    assert_eq!(read(&ds).lines().count(), 8);
    ok(&[
        "kb",
        "build",
        "--lib-src",
        s(&mc.join("libsrc/cocos2d")),
        "--library",
        "cocos2d-x",
        "--out",
        s(&kb),
    ]);
    let shown = ok(&[
        "kb",
        "lookup",
        "--kb",
        s(&kb),
        "--api",
        "cocos2d.Director.getInstance",
    ]);
    let entry: serde_json::Value = serde_json::from_str(&shown).unwrap();
    assert_eq!(entry["api_name"], "cocos2d.Director.getInstance");
    assert!(entry["docstring"].as_str().is_some_and(|d| !d.is_empty()));
}

#[test]
fn prompt_renders_templates() {
    let sig = "func Routes(r *gin.Engine)";
    assert_eq!(
        ok(&["prompt", "--kind", "signature", "--signature", sig]),
        "Complete this function: func Routes(r *gin.Engine)\n"
    );
    assert_eq!(
        ok(&[
            "prompt",
            "--kind",
            "api",
            "--signature",
            sig,
            "--apis",
            "gin.RouterGroup.Use"
        ]),
        "Complete this function using gin.RouterGroup.Use: func Routes(r *gin.Engine)\n"
    );
    let err = fail(&[
        "prompt",
        "--kind",
        "docstring",
        "--signature",
        sig,
        "--apis",
        "gin.Nope",
    ]);
    assert!(err.contains("gin.Nope"), "{err}");
}

#[test]
fn seed_selects_the_eval_split() {
    let dir = tempfile::tempdir().unwrap();
    let config = minicorpus().join("pipeline_gin_kg.json");
    let cfg = s(&config);
    let ds = dir.path().join("ds.jsonl");
    ok(&["mine", "--config", cfg, "--out", s(&ds)]);
    let ids = |seed: &str, name: &str| -> Vec<String> {
        let out = dir.path().join(name);
        ok(&[
            "generate",
            "--config",
            cfg,
            "--seed",
            seed,
            "--eval-size",
            "5",
            "--dataset",
            s(&ds),
            "--out",
            s(&out),
        ]);
        read(&out)
            .lines()
            .map(|l| {
                serde_json::from_str::<serde_json::Value>(l).unwrap()["id"]
                    .as_str()
                    .unwrap()
                    .to_string()
            })
            .collect()
    };
    let a = ids("0", "a.jsonl");
    assert_eq!(a.len(), 5);
    assert_eq!(a, ids("0", "b.jsonl"));
    assert_ne!(a, ids("7", "c.jsonl"));
}

#[test]
fn failures_exit_nonzero_with_a_reason() {
    let dir = tempfile::tempdir().unwrap();
    let config = minicorpus().join("pipeline_gin_kg.json");
    let err = fail(&[
        "pipeline",
        "--config",
        s(&config),
        "--out-dir",
        s(dir.path()),
        "--stages",
        "eval",
    ]);
    assert!(
        err.contains("eval") && err.contains("dataset.jsonl"),
        "{err}"
    );
    assert!(std::fs::read_dir(dir.path()).unwrap().next().is_none());

    let missing = dir.path().join("nope.jsonl");
    let err = fail(&["eval", "--gen", s(&missing), "--refs", s(&missing)]);
    assert!(err.contains("nope.jsonl"), "{err}");
    assert_eq!(err.matches("os error 2").count(), 1, "{err}");

    let kb = minicorpus().join("golden/none.json");
    assert!(fail(&["kb", "lookup", "--kb", s(&kb), "--api", "x"]).contains("none.json"));
    assert!(fail(&["pipeline"]).contains("--config"));
}
