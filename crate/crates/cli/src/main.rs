use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use domforge::corpus::{read_dataset, read_jsonl, write_dataset, write_jsonl, RepoManifest};
use domforge::cot::annotate_dataset;
use domforge::generation::{backend_from_spec, Strategy};
use domforge::knowledge::{build_kb_from_library_source, KnowledgeBase};
use domforge::metrics::EvalReport;
use domforge::pipeline::{
    evaluate_generations, generate_dataset, mine_dataset, run_pipeline, GenRecord, PipelineConfig,
    Stage, DATASET, GEN, KB, REPORT, TRAIN,
};
use domforge::prompts::{render_prompt, PromptKind, PromptSpec};
use domforge::SubjectLanguage;

/// Mine domain-specific functions, build API knowledge, generate and score code.
#[derive(Parser)]
#[command(name = "domforge", version)]
struct Cli {
    /// Pipeline config (JSON); flags given on the command line override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for sampling the evaluation split [default: 0].
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// More log output on stderr (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract library-using functions from the repositories in a manifest.
    Mine {
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long)]
        library: Option<String>,
        #[arg(long)]
        min_stars: Option<u64>,
        #[arg(long = "exclude-glob")]
        exclude_globs: Vec<String>,
        #[arg(long)]
        no_dedup: bool,
        /// Dataset to write.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build or query the API knowledge base.
    Kb {
        #[command(subcommand)]
        command: KbCommand,
    },
    /// Render a prompt for one dataset record or a bare signature.
    Prompt {
        #[arg(long)]
        kind: PromptKind,
        /// Record id in the dataset.
        #[arg(long, conflicts_with = "signature")]
        record: Option<String>,
        #[arg(long, required_unless_present = "record")]
        signature: Option<String>,
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long)]
        kb: Option<PathBuf>,
        /// APIs for the prompt; defaults to the record's own.
        #[arg(long, value_delimiter = ',')]
        apis: Vec<String>,
        #[arg(long)]
        library: Option<String>,
    },
    /// Write knowledge-annotated training examples.
    Annotate {
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long)]
        kb: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate function bodies with a completion backend.
    Generate {
        #[arg(long)]
        strategy: Option<Strategy>,
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long)]
        kb: Option<PathBuf>,
        /// `mock:FILE` or an endpoint URL.
        #[arg(long)]
        backend: Option<String>,
        #[arg(long)]
        library: Option<String>,
        #[arg(long)]
        eval_size: Option<usize>,
        #[arg(long)]
        max_new_tokens: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score generations against the dataset.
    Eval {
        #[arg(long)]
        gen: Option<PathBuf>,
        /// Dataset holding the reference functions.
        #[arg(long)]
        refs: Option<PathBuf>,
        /// Only score functions in this language.
        #[arg(long)]
        lang: Option<SubjectLanguage>,
        #[arg(long)]
        corpus_bleu: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run pipeline stages from a config.
    Pipeline {
        /// Comma-separated subset of mine,kb,annotate,generate,eval.
        #[arg(long, value_delimiter = ',')]
        stages: Vec<Stage>,
        #[arg(long)]
        backend: Option<String>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum KbCommand {
    Build {
        #[arg(long = "lib-src")]
        lib_src: Vec<PathBuf>,
        #[arg(long)]
        library: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Lookup {
        #[arg(long)]
        kb: Option<PathBuf>,
        #[arg(long)]
        api: String,
    },
}

fn base_config(cli: &Cli) -> Result<PipelineConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            PipelineConfig::load(path).with_context(|| format!("loading {}", path.display()))?
        }
        None => PipelineConfig::new("", "."),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn pick(flag: &Option<PathBuf>, cfg: &PipelineConfig, artifact: &str) -> PathBuf {
    flag.clone().unwrap_or_else(|| cfg.artifact(artifact))
}

fn set_library(cfg: &mut PipelineConfig, flag: &Option<String>) -> Result<()> {
    if let Some(l) = flag {
        cfg.library = l.clone();
    }
    if cfg.library.is_empty() {
        bail!("no library given; pass --library or --config");
    }
    Ok(())
}

fn ensure_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
        }
        _ => Ok(()),
    }
}

fn write_report(path: &Path, value: &EvalReport) -> Result<()> {
    ensure_parent(path)?;
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

/// KB from an explicit flag, else from the config's out_dir if one was built there.
fn optional_kb(flag: &Option<PathBuf>, cfg: &PipelineConfig) -> Result<Option<KnowledgeBase>> {
    let path = pick(flag, cfg, KB);
    if flag.is_none() && !path.is_file() {
        return Ok(None);
    }
    Ok(Some(KnowledgeBase::load(&path)?))
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = base_config(&cli)?;
    match cli.command {
        Command::Mine {
            manifest,
            library,
            min_stars,
            exclude_globs,
            no_dedup,
            out,
        } => {
            set_library(&mut cfg, &library)?;
            if let Some(m) = manifest {
                cfg.manifest = Some(m);
            }
            if let Some(k) = min_stars {
                cfg.min_stars = k;
            }
            cfg.exclude_globs.extend(exclude_globs);
            cfg.dedup &= !no_dedup;
            let Some(manifest_path) = cfg.manifest.clone() else {
                bail!("no manifest given; pass --manifest or --config");
            };
            let lib = cfg.library_spec()?;
            let manifest = RepoManifest::load(&manifest_path)?;
            let (records, report) = mine_dataset(&cfg, &manifest, &lib)?;
            let out = pick(&out, &cfg, DATASET);
            ensure_parent(&out)?;
            write_dataset(&records, &out)?;
            log::info!(
                "{} repos scanned, {} functions extracted, {} after filtering, {} written to {}",
                report.scan.repos_scanned,
                report.extracted,
                report.after_filter,
                report.after_dedup,
                out.display()
            );
        }
        Command::Kb {
            command:
                KbCommand::Build {
                    lib_src,
                    library,
                    out,
                },
        } => {
            set_library(&mut cfg, &library)?;
            if !lib_src.is_empty() {
                cfg.lib_src = lib_src;
            }
            if cfg.lib_src.is_empty() {
                bail!("no library sources given; pass --lib-src or --config");
            }
            let lib = cfg.library_spec()?;
            let (kb, report) = build_kb_from_library_source(&cfg.lib_src, &lib, cfg.built_at)?;
            let out = pick(&out, &cfg, KB);
            ensure_parent(&out)?;
            kb.save(&out)?;
            log::info!(
                "{} entries from {} files written to {}",
                kb.len(),
                report.files_parsed,
                out.display()
            );
        }
        Command::Kb {
            command: KbCommand::Lookup { kb, api },
        } => {
            let kb = KnowledgeBase::load(&pick(&kb, &cfg, KB))?;
            let Some(entry) = kb.lookup(&api) else {
                bail!("no knowledge entry for {api}");
            };
            let shown = serde_json::json!({
                "api_name": entry.api_name,
                "docstring": entry.docstring,
                "source": entry.source,
                "summary": entry.summary(),
            });
            println!("{}", serde_json::to_string_pretty(&shown)?);
        }
        Command::Prompt {
            kind,
            record,
            signature,
            dataset,
            kb,
            apis,
            library,
        } => {
            let kb = optional_kb(&kb, &cfg)?;
            let rec = match &record {
                Some(id) => {
                    let records = read_dataset(&pick(&dataset, &cfg, DATASET))?;
                    let found = records.into_iter().find(|r| &r.id == id);
                    Some(found.with_context(|| format!("no record with id {id}"))?)
                }
                None => None,
            };
            let sig = match (&rec, &signature) {
                (Some(r), _) => r.prompt_signature().to_string(),
                (None, Some(s)) => s.clone(),
                (None, None) => unreachable!("clap requires one of --record and --signature"),
            };
            let apis = match (&rec, apis.is_empty()) {
                (Some(r), true) => r.api_names(),
                _ => apis,
            };
            let library = library
                .or_else(|| rec.as_ref().map(|r| r.library.clone()))
                .unwrap_or_else(|| cfg.library.clone());
            let mut spec = PromptSpec::new(kind, &sig).apis(apis);
            if !library.is_empty() {
                spec = spec.library(&library);
            }
            if let Some(kb) = &kb {
                spec = spec.kb(kb);
            }
            println!("{}", render_prompt(&spec)?);
        }
        Command::Annotate { dataset, kb, out } => {
            let records = read_dataset(&pick(&dataset, &cfg, DATASET))?;
            let kb = optional_kb(&kb, &cfg)?;
            if kb.is_none() {
                log::warn!("no knowledge base; states carry API names only");
            }
            let examples = annotate_dataset(&records, kb.as_ref());
            let out = pick(&out, &cfg, TRAIN);
            ensure_parent(&out)?;
            write_jsonl(&examples, &out)?;
            log::info!("{} examples written to {}", examples.len(), out.display());
        }
        Command::Generate {
            strategy,
            dataset,
            kb,
            backend,
            library,
            eval_size,
            max_new_tokens,
            out,
        } => {
            let records = read_dataset(&pick(&dataset, &cfg, DATASET))?;
            if let Some(l) = library.or_else(|| records.first().map(|r| r.library.clone())) {
                cfg.library = l;
            }
            set_library(&mut cfg, &None)?;
            if let Some(s) = strategy {
                cfg.strategy = s;
            }
            if let Some(n) = eval_size {
                cfg.eval_size = Some(n);
            }
            if let Some(n) = max_new_tokens {
                cfg.max_new_tokens = n;
            }
            let Some(spec) = backend.or_else(|| cfg.backend.clone()) else {
                bail!("no backend given; pass --backend or --config");
            };
            let backend = backend_from_spec(&spec)?;
            let kb = optional_kb(&kb, &cfg)?;
            if cfg.strategy == Strategy::CotPt && kb.is_none() {
                log::warn!("cot-pt without a knowledge base; states carry API names only");
            }
            let lib = cfg.library_spec()?;
            let gens = generate_dataset(&cfg, &records, &lib, kb.as_ref(), backend.as_ref())?;
            let out = pick(&out, &cfg, GEN);
            ensure_parent(&out)?;
            write_jsonl(&gens, &out)?;
            log::info!("{} generations written to {}", gens.len(), out.display());
        }
        Command::Eval {
            gen,
            refs,
            lang,
            corpus_bleu,
            out,
        } => {
            let mut records = read_dataset(&pick(&refs, &cfg, DATASET))?;
            let mut gens: Vec<GenRecord> = read_jsonl(&pick(&gen, &cfg, GEN))?;
            if let Some(lang) = lang {
                records.retain(|r| r.subject_language == lang);
                let ids: std::collections::HashSet<&str> =
                    records.iter().map(|r| r.id.as_str()).collect();
                gens.retain(|g| ids.contains(g.id.as_str()));
            }
            cfg.metrics.corpus_bleu |= corpus_bleu;
            let report = evaluate_generations(&gens, &records, &cfg.metrics)?;
            let out = pick(&out, &cfg, REPORT);
            write_report(&out, &report)?;
            print!("{}", report.summary());
        }
        Command::Pipeline {
            stages,
            backend,
            out_dir,
        } => {
            if cli.config.is_none() {
                bail!("`pipeline` needs --config");
            }
            if let Some(b) = backend {
                cfg.backend = Some(b);
            }
            if let Some(d) = out_dir {
                cfg.out_dir = d;
            }
            let stages = if stages.is_empty() {
                Stage::ALL.to_vec()
            } else {
                stages
            };
            let outcome = run_pipeline(&cfg, &stages)?;
            for a in &outcome.artifacts {
                log::info!("wrote {}", a.display());
            }
            if let Some(report) = &outcome.report {
                print!("{}", report.summary());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // library errors already spell out their cause; skip repeats in the chain
            let mut msg = e.to_string();
            for cause in e.chain().skip(1).map(|c| c.to_string()) {
                if !msg.contains(&cause) {
                    msg = format!("{msg}: {cause}");
                }
            }
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
