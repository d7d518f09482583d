//! The `sesa` command line. Exit codes: 0 success, 1 usage error, 2 runtime
//! error.

use std::{
    ffi::OsString,
    io::Write,
    path::{Path, PathBuf},
};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use sesa_core::{
    baseline::{DEFAULT_LOGREG_ITERS, DEFAULT_LOGREG_LAMBDA},
    byproducts::{job2skill, nearest_skills},
    synth::{gen_dataset, GenConfig},
};

use crate::{
    config::{digest_of, RunConfigFile},
    dataset::{read_records, write_skill_vocab},
    embeddings::save_embeddings,
    model_file::{file_digest, ModelFile},
    parallel::default_threads,
    pipeline,
    report::{write_json, EvalReport, HistoryFile},
    synth_io::write_dataset,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

fn config_help() -> String {
    format!(
        "Configuration files are TOML with optional [train] and [gen] tables; \
         missing keys take the defaults below and unknown keys are rejected.\n\n{}",
        RunConfigFile::defaults_toml()
    )
}

#[derive(Debug, Parser)]
#[command(name = "sesa", version, about = "Explicit skill-space relevance models for job texts and profiles")]
#[command(after_long_help = config_help())]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic corpus with planted skills.
    GenData(GenDataArgs),
    /// Train a model with early stopping on validation AUC.
    Train(TrainArgs),
    /// Score a dataset and write an evaluation report.
    Eval(EvalArgs),
    /// Tag a job text with its highest and lowest scoring skills.
    Tag(TagArgs),
    /// List the skills whose embeddings are closest to a skill.
    Nn(NnArgs),
    /// Write the skill embeddings (rows of the projection) as a text file.
    ExportEmbeddings(ExportArgs),
    /// Train and evaluate the similarity-feature logistic regression.
    BaselineLogreg(BaselineArgs),
}

#[derive(Debug, Args)]
pub struct GenDataArgs {
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// TOML file whose [gen] table sets the generator; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub n_examples: Option<usize>,
    #[arg(long)]
    pub n_skills: Option<usize>,
    #[arg(long)]
    pub pos_rate: Option<f64>,
    #[arg(long)]
    pub label_noise: Option<f64>,
    /// Start from the heavily imbalanced preset instead of the defaults.
    #[arg(long)]
    pub imbalanced: bool,
    /// Also write aligned word embeddings of this dimension.
    #[arg(long)]
    pub embedding_dim: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub valid: PathBuf,
    /// TOML file whose [train] table sets the run.
    #[arg(long)]
    pub config: PathBuf,
    /// Pretrained word embeddings in the textual format.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Output directory for model.json, history.json and skills.tsv.
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides the configured seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Validation scoring threads (results do not depend on it).
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
    #[arg(long)]
    pub report: PathBuf,
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TagArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, required_unless_present = "file", conflicts_with = "file")]
    pub text: Option<String>,
    /// Read the job text from a file.
    #[arg(long)]
    pub file: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub top_k: usize,
}

#[derive(Debug, Args)]
pub struct NnArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub skill: String,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
    #[arg(long)]
    pub report: PathBuf,
    #[arg(long, default_value_t = DEFAULT_LOGREG_ITERS)]
    pub iters: usize,
    #[arg(long, default_value_t = DEFAULT_LOGREG_LAMBDA)]
    pub lambda: f64,
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().ansi().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_RUNTIME
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<()> {
    match command {
        Command::GenData(a) => gen_data(a, out),
        Command::Train(a) => train(a, out, err),
        Command::Eval(a) => eval(a, out, err),
        Command::Tag(a) => tag(a, out),
        Command::Nn(a) => nn(a, out),
        Command::ExportEmbeddings(a) => export(a, out),
        Command::BaselineLogreg(a) => baseline(a, out),
    }
}

fn gen_data(a: GenDataArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let mut cfg = match (&a.config, a.imbalanced) {
        (Some(path), _) => RunConfigFile::load(path)?.gen,
        (None, true) => GenConfig::imbalanced(),
        (None, false) => GenConfig::default(),
    };
    if a.imbalanced {
        cfg.pos_rate = GenConfig::imbalanced().pos_rate;
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    if let Some(v) = a.n_examples {
        cfg.n_examples = v;
    }
    if let Some(v) = a.n_skills {
        cfg.n_skills = v;
    }
    if let Some(v) = a.pos_rate {
        cfg.pos_rate = v;
    }
    if let Some(v) = a.label_noise {
        cfg.label_noise = v;
    }
    let data = gen_dataset(&cfg)?;
    write_dataset(&data, &a.out, a.embedding_dim)?;
    writeln!(
        out,
        "wrote {} train, {} valid, {} test examples to {}",
        data.train.len(),
        data.valid.len(),
        data.test.len(),
        a.out.display()
    )?;
    Ok(())
}

fn train(a: TrainArgs, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<()> {
    let mut cfg = RunConfigFile::load(&a.config)?.train;
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    let threads = a.threads.unwrap_or_else(default_threads);
    let run = pipeline::train_files(&cfg, &a.train, &a.valid, a.embeddings.as_deref(), threads)?;
    if run.dropped_valid_skills > 0 {
        writeln!(
            err,
            "warning: dropped {} validation skill mentions outside the skill vocabulary",
            run.dropped_valid_skills
        )?;
    }
    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let model_path = a.out.join("model.json");
    run.model.save(&model_path)?;
    write_skill_vocab(&a.out.join("skills.tsv"), &run.model.skills)?;
    let history = HistoryFile::new(&cfg, &run.history, &run.timestamps, run.coverage);
    write_json(&a.out.join("history.json"), &history)?;
    writeln!(
        out,
        "best validation AUC {:.4} at iteration {} of {} ({:?}); model written to {}",
        run.history.best_auc,
        run.history.best_iteration,
        run.history.iterations,
        run.history.stop_reason,
        model_path.display()
    )?;
    Ok(())
}

fn eval(a: EvalArgs, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<()> {
    let model = ModelFile::load(&a.model)?;
    let records = read_records(&a.test)?;
    let threads = a.threads.unwrap_or_else(default_threads);
    let (metrics, dropped) = pipeline::evaluate_records(&model, &records, threads)?;
    if dropped > 0 {
        writeln!(err, "warning: dropped {dropped} skill mentions outside the skill vocabulary")?;
    }
    let mut report = EvalReport::new(
        "sesa",
        metrics,
        serde_json::to_value(&model.config)?,
        model.config_digest(),
        &a.test,
    );
    report.model_digest = Some(file_digest(&a.model)?);
    report.dropped_skills = dropped;
    write_json(&a.report, &report)?;
    writeln!(out, "auc {:.6} mse {:.6} (n_pos {}, n_neg {})", metrics.auc, metrics.mse, metrics.n_pos, metrics.n_neg)?;
    Ok(())
}

fn read_text(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn tag(a: TagArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let model = ModelFile::load(&a.model)?;
    let text = match (a.text, a.file) {
        (Some(t), _) => t,
        (None, Some(p)) => read_text(&p)?,
        (None, None) => bail!("one of --text or --file is required"),
    };
    let k = a.top_k.min(model.skills.len());
    let r = job2skill(&model.params, &model.words, &model.skills, &text, k, model.config.max_seq_len)?;
    for (name, s) in &r.positive {
        writeln!(out, "+\t{name}\t{s}")?;
    }
    for (name, s) in &r.negative {
        writeln!(out, "-\t{name}\t{s}")?;
    }
    Ok(())
}

fn nn(a: NnArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let model = ModelFile::load(&a.model)?;
    let Some(id) = model.skills.id(&sesa_core::text::normalize_skill(&a.skill)) else {
        bail!("unknown skill `{}`", a.skill);
    };
    let k = a.k.min(model.skills.len().saturating_sub(1));
    for (j, c) in nearest_skills(&model.params, id, k)? {
        writeln!(out, "{}\t{c}", model.skills.name(j).unwrap_or_default())?;
    }
    Ok(())
}

/// Skill names with whitespace replaced by `_` so they fit the format's
/// word column.
pub fn export_name(skill: &str) -> String {
    skill.replace(char::is_whitespace, "_")
}

fn export(a: ExportArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let model = ModelFile::load(&a.model)?;
    let p = &model.params.projection;
    let names: Vec<String> = model.skills.names().iter().map(|s| export_name(s)).collect();
    save_embeddings(
        &a.out,
        p.cols(),
        names.iter().enumerate().map(|(i, n)| (n.as_str(), p.row(i))),
    )?;
    writeln!(out, "wrote {} skill embeddings to {}", names.len(), a.out.display())?;
    Ok(())
}

fn baseline(a: BaselineArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let train = read_records(&a.train)?;
    let test = read_records(&a.test)?;
    let run = pipeline::run_logreg(&train, &test, a.iters, a.lambda)?;
    let config = serde_json::json!({ "iters": a.iters, "lambda": a.lambda, "train": a.train });
    let digest = digest_of(&config);
    let report = EvalReport::new("logreg", run.metrics, config, digest, &a.test);
    write_json(&a.report, &report)?;
    writeln!(out, "auc {:.6} mse {:.6}", run.metrics.auc, run.metrics.mse)?;
    Ok(())
}
