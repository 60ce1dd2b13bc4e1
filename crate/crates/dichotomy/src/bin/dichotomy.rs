use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use dichotomy::config::{parse_kinds, Settings};
use dichotomy::fsio::{write_all_atomic, write_atomic};
use dichotomy::manifest::parse_manifest;
use dichotomy::pipeline::{
    extract_examples, loocv_outputs, report_outputs, restrict_examples, run_loocv, thread_pool, train_model, ModelFile,
};
use dichotomy::sidecar::read_sidecar;
use dichotomy::store::{read_store, store_to_string};
use dichotomy::tables::{contrast_csv, percent, read_log_csv, read_matrix_csv};
use dichotomy_core::corpus::{CorpusManifest, Kind};
use dichotomy_core::eval::{contrast, Example, Grouping, Unit};
use dichotomy_core::fingerprint::fnv1a64;
use dichotomy_core::representation::Mode;

#[derive(Parser)]
#[command(name = "dichotomy", version, about = "Multistage SVM emotion categorization from speech")]
struct Cli {
    /// `key = value` settings file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyse every utterance of a manifest into a feature store.
    Extract {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        mode: Option<Mode>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Train a tree on every admitted utterance and write the model file.
    Train {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Leave-one-out evaluation: prediction log and confusion matrices.
    Loocv {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Machine minus listener percentages.
    Contrast {
        #[arg(long)]
        machine: PathBuf,
        #[arg(long)]
        human: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Group recognition rates from a prediction log.
    Report {
        #[arg(long)]
        log: PathBuf,
        /// Repeatable; all groupings when absent.
        #[arg(long)]
        grouping: Vec<Grouping>,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Input {
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    sidecar: Option<PathBuf>,
    /// Read representations from a store written by `extract`.
    #[arg(long = "from-store", alias = "store")]
    store: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Inline spec such as `((a | b) | c)`, a file holding one, or `generalized`.
    #[arg(long)]
    tree: Option<String>,
    #[arg(long)]
    mode: Option<Mode>,
    /// `full`, `universal`, a subset name or file, or `UTT,SEG`.
    #[arg(long)]
    subset: Option<String>,
    #[arg(long = "C")]
    c: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Pick C and gamma per node by inner cross-validation.
    #[arg(long)]
    grid: bool,
    #[arg(long)]
    unit: Option<Unit>,
    /// Repeatable or comma separated, e.g. `passage`.
    #[arg(long = "exclude-kind", value_parser = parse_kinds)]
    exclude_kind: Vec<Vec<Kind>>,
    /// Weight of the utterance margin in combination mode.
    #[arg(long = "utterance-weight")]
    utterance_weight: Option<f64>,
}

impl Input {
    fn settings(self) -> Settings {
        Settings {
            manifest: self.manifest,
            sidecar: self.sidecar,
            store: self.store,
            ..Settings::default()
        }
    }
}

impl ExperimentArgs {
    fn apply(self, s: Settings) -> Settings {
        Settings {
            tree: self.tree,
            mode: self.mode,
            subset: self.subset,
            c: self.c,
            gamma: self.gamma,
            grid: self.grid.then_some(true),
            unit: self.unit,
            exclude_kind: (!self.exclude_kind.is_empty()).then(|| self.exclude_kind.concat()),
            utterance_weight: self.utterance_weight,
            ..s
        }
    }
}

fn require<'a, T>(v: &'a Option<T>, what: &str) -> Result<&'a T> {
    v.as_ref().with_context(|| format!("missing --{what} (flag or config key)"))
}

/// The manifest and representations named by the settings, in `mode`.
fn load_examples(s: &Settings, mode: Mode, pool: &rayon::ThreadPool) -> Result<(CorpusManifest, Vec<Example>)> {
    if let Some(store) = &s.store {
        if s.manifest.is_some() || s.sidecar.is_some() {
            bail!("--from-store replaces --manifest and --sidecar");
        }
        let st = read_store(store)?;
        let examples = restrict_examples(st.examples, mode)?;
        return Ok((st.manifest, examples));
    }
    let manifest_path = require(&s.manifest, "manifest")?;
    let manifest = parse_manifest(manifest_path)?;
    let sidecars = s.sidecar.as_deref().map(read_sidecar).transpose()?;
    let examples = extract_examples(manifest_path, &manifest, sidecars.as_ref(), mode, pool)?;
    Ok((manifest, examples))
}

fn run(cli: Cli) -> Result<()> {
    let file = match &cli.config {
        Some(p) => Settings::from_file(p)?,
        None => Settings::default(),
    };
    match cli.command {
        Command::Extract {
            input,
            mode,
            out,
            workers,
        } => {
            let flags = Settings {
                mode,
                out,
                workers,
                ..input.settings()
            };
            let s = file.overridden_by(flags);
            if s.store.is_some() {
                bail!("extract reads a manifest, not a store");
            }
            let out = require(&s.out, "out")?;
            let pool = thread_pool(s.workers)?;
            let (manifest, examples) = load_examples(&s, s.mode.unwrap_or(Mode::Combination), &pool)?;
            write_atomic(out, store_to_string(manifest.label_set(), &examples)?)?;
            println!("{} utterances -> {}", examples.len(), out.display());
        }
        Command::Train {
            input,
            exp,
            out,
            workers,
        } => {
            let flags = exp.apply(Settings {
                out,
                workers,
                ..input.settings()
            });
            let s = file.overridden_by(flags);
            let out = require(&s.out, "out")?;
            let pool = thread_pool(s.workers)?;
            let mode = s.mode.unwrap_or(Mode::Utterance);
            let (manifest, examples) = load_examples(&s, mode, &pool)?;
            let exp = s.experiment(manifest.label_set(), mode)?;
            let tree = train_model(&exp, &examples)?;
            write_atomic(out, ModelFile::new(tree, &exp.config_hash).to_json())?;
            println!("model {} -> {}", exp.config_hash, out.display());
        }
        Command::Loocv {
            input,
            exp,
            out,
            workers,
        } => {
            let flags = exp.apply(Settings {
                out,
                workers,
                ..input.settings()
            });
            let s = file.overridden_by(flags);
            let out = require(&s.out, "out")?;
            let pool = thread_pool(s.workers)?;
            let mode = s.mode.unwrap_or(Mode::Utterance);
            let (manifest, examples) = load_examples(&s, mode, &pool)?;
            let exp = s.experiment(manifest.label_set(), mode)?;
            let log = run_loocv(&exp, &examples, &pool)?;
            std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
            let files = loocv_outputs(&log, &exp.config_hash, out)?;
            write_all_atomic(&files)?;
            println!(
                "{} utterances, accuracy {}% ({} files in {})",
                log.len(),
                percent(100.0 * log.accuracy()),
                files.len(),
                out.display()
            );
        }
        Command::Contrast { machine, human, out } => {
            let out = out.or(file.out).context("missing --out (flag or config key)")?;
            let m = read_matrix_csv(&machine)?;
            let h = read_matrix_csv(&human)?;
            let c = contrast(&m, &h)?;
            let bytes = [read_bytes(&machine)?, read_bytes(&human)?].concat();
            let hash = format!("{:016x}", fnv1a64(&bytes));
            write_atomic(&out, contrast_csv(&c, &hash))?;
            println!("contrast -> {}", out.display());
        }
        Command::Report { log, grouping, out } => {
            let out = out.or(file.out).context("missing --out (flag or config key)")?;
            let (log, hash) = read_log_csv(&log)?;
            let groupings = if grouping.is_empty() {
                Grouping::ALL.to_vec()
            } else {
                grouping
            };
            std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            let files = report_outputs(&log, hash.as_deref().unwrap_or("unknown"), &out, &groupings);
            write_all_atomic(&files)?;
            for (path, text) in &files {
                println!("== {}", path.display());
                print!("{}", text.lines().skip(1).map(|l| format!("{l}\n")).collect::<String>());
            }
        }
    }
    Ok(())
}

fn read_bytes(p: &Path) -> Result<Vec<u8>> {
    std::fs::read(p).with_context(|| format!("reading {}", p.display()))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dichotomy: {e:#}");
            ExitCode::FAILURE
        }
    }
}
