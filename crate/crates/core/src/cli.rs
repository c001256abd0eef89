//! The `mst` command line.
//!
//! Exit status: 0 on success, 1 when a command fails at runtime (bad data,
//! oracle mismatch, divergence), 2 on invalid usage.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::datagen::{
    build_splits, dataset_stats, read_jsonl, verify_sample, EntityTable, GenConfig, MstSample, PromptSet, Split,
    TaskKind,
};
use crate::measure_text::{annotate, rule_convert_text, DEFAULT_SCALE_CAP};
use crate::model::checkpoint;
use crate::model::{
    evaluate, prepare, render_table, run_seeds, Encoder, EvalReport, ModelConfig, SplitResult, TrainConfig, Vocab,
    EVAL_SPLITS,
};
use crate::numerics::{convert_notation, Notation};
use crate::units::{compare_measurements, Measurement, UnitInventory};

#[derive(Debug, Parser)]
#[command(name = "mst", version, about = "Measuring-skill test generator, converter and probe")]
pub struct Cli {
    /// Worker threads; 0 uses all cores.
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate all splits of one task, prompt set and notation.
    Gen(GenArgs),
    /// Normalize text, convert a number's notation or compare two measurements.
    #[command(subcommand)]
    Convert(ConvertCmd),
    /// Print tokens, numeric flags and scale indices, one token per line.
    ScaleIndex {
        text: String,
        #[arg(long, default_value_t = DEFAULT_SCALE_CAP)]
        cap: usize,
    },
    /// Train the probe on a generated dataset and evaluate it.
    Train(TrainArgs),
    /// Evaluate checkpoints, or verify every sample with the label oracle.
    Eval(EvalArgs),
    /// Render report CSVs as an accuracy table.
    Report {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Label distribution of JSONL files.
    Stats {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub task: TaskKind,
    #[arg(long, default_value = "base")]
    pub prompt_set: PromptSet,
    #[arg(long, default_value = "decimal")]
    pub notation: Notation,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Multiplier on the full split sizes.
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    #[arg(long, default_value_t = 3)]
    pub list_length: usize,
    /// Entity CSV with entity_name,unit,range_low,range_high.
    #[arg(long)]
    pub entities: Option<PathBuf>,
    #[arg(long, env = "MST_OUT", default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum ConvertCmd {
    /// Rewrite every measurement in the text to its family head unit.
    Text { text: String },
    /// Render a number in the other notation.
    Number {
        value: String,
        #[arg(long)]
        to: Notation,
    },
    /// Compare two measurements such as `3.5g` and `3500mg`.
    Compare { left: String, right: String },
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// `desk` (2x128, 20k training samples) or `full` (12x768, all data).
    #[arg(long, default_value = "desk")]
    pub preset: String,
    #[arg(long)]
    pub scale_embedding: bool,
    #[arg(long, default_value_t = DEFAULT_SCALE_CAP)]
    pub scale_cap: usize,
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub scale_lr: Option<f64>,
    #[arg(long)]
    pub train_limit: Option<usize>,
    #[arg(long)]
    pub valid_limit: Option<usize>,
    #[arg(long)]
    pub layers: Option<usize>,
    #[arg(long)]
    pub hidden: Option<usize>,
    #[arg(long)]
    pub heads: Option<usize>,
    #[arg(long)]
    pub ffn: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Directory holding the split JSONL files.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, env = "MST_OUT", default_value = "out")]
    pub out: PathBuf,
    #[arg(long, default_value = "scratch")]
    pub model_name: String,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Check every sample's label, candidates, spans and ranges instead.
    #[arg(long, conflicts_with = "checkpoint")]
    pub oracle: bool,
    #[arg(long, required_unless_present = "oracle")]
    pub checkpoint: Vec<PathBuf>,
    #[arg(long, default_value = "scratch")]
    pub model_name: String,
    /// Report CSV destination; printed to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

type CliResult<T> = Result<T, Box<dyn std::error::Error>>;

impl ModelArgs {
    pub fn configs(&self) -> CliResult<(ModelConfig, TrainConfig)> {
        let (mut m, mut t) = match self.preset.as_str() {
            "desk" => (ModelConfig::desk(), TrainConfig::desk()),
            "full" => (ModelConfig::full(), TrainConfig::full()),
            other => return Err(format!("unknown preset {other:?}").into()),
        };
        if self.scale_embedding {
            m = m.with_scale(self.scale_cap);
        }
        m.layers = self.layers.unwrap_or(m.layers);
        m.hidden = self.hidden.unwrap_or(m.hidden);
        m.heads = self.heads.unwrap_or(m.heads);
        m.ffn = self.ffn.unwrap_or(m.ffn);
        if let Some(s) = &self.seeds {
            t.seeds = s.clone();
        }
        t.epochs = self.epochs.unwrap_or(t.epochs);
        t.batch_size = self.batch_size.unwrap_or(t.batch_size);
        t.learning_rate = self.lr.unwrap_or(t.learning_rate);
        t.scale_learning_rate = self.scale_lr.unwrap_or(t.scale_learning_rate);
        if self.train_limit.is_some() {
            t.train_limit = self.train_limit;
        }
        if self.valid_limit.is_some() {
            t.valid_limit = self.valid_limit;
        }
        m.validate()?;
        t.validate()?;
        Ok((m, t))
    }
}

fn load_split(dir: &Path, split: Split) -> CliResult<Vec<MstSample>> {
    Ok(read_jsonl(&dir.join(split.file_name()))?)
}

fn write_json(path: &Path, value: &serde_json::Value) -> CliResult<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)? + "\n").map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(())
}

fn cmd_gen(a: &GenArgs) -> CliResult<()> {
    let mut cfg = GenConfig::new(a.task, a.prompt_set, a.notation, a.seed).with_scale(a.scale);
    cfg.list_length = a.list_length;
    if let Some(p) = &a.entities {
        cfg.entities = EntityTable::from_file(p)?;
    }
    let manifest = build_splits(&cfg, &a.out)?;
    let dir = crate::datagen::splits::dataset_dir(&a.out, &cfg);
    for (name, s) in &manifest.splits {
        println!("{name:<10} {:>8}  {}", s.count, dir.join(&s.file).display());
    }
    Ok(())
}

fn cmd_convert(c: &ConvertCmd) -> CliResult<()> {
    match c {
        ConvertCmd::Text { text } => println!("{}", rule_convert_text(text)),
        ConvertCmd::Number { value, to } => println!("{}", convert_notation(value, *to)?),
        ConvertCmd::Compare { left, right } => {
            let (a, b) = (Measurement::parse(left)?, Measurement::parse(right)?);
            let word = match compare_measurements(&a, &b)? {
                std::cmp::Ordering::Less => "less",
                std::cmp::Ordering::Equal => "equal",
                std::cmp::Ordering::Greater => "greater",
            };
            println!("{word}");
        }
    }
    Ok(())
}

fn vocab() -> Vocab {
    Vocab::standard(UnitInventory::builtin(), &EntityTable::bundled())
}

fn cmd_train(a: &TrainArgs) -> CliResult<()> {
    let (model_cfg, train_cfg) = a.model.configs()?;
    let train = load_split(&a.data, Split::Train)?;
    let valid = load_split(&a.data, Split::ValidIn)?;
    let evals: Vec<(Split, Vec<MstSample>)> =
        EVAL_SPLITS.iter().map(|&s| Ok((s, load_split(&a.data, s)?))).collect::<CliResult<_>>()?;
    let eval_refs: Vec<(Split, &[MstSample])> = evals.iter().map(|(s, v)| (*s, v.as_slice())).collect();
    let vocab = vocab();
    std::fs::create_dir_all(&a.out).map_err(|e| format!("{}: {e}", a.out.display()))?;
    write_json(
        &a.out.join("run_config.json"),
        &json!({
            "version": env!("CARGO_PKG_VERSION"),
            "data": a.data,
            "model_name": a.model_name,
            "model": model_cfg,
            "train": train_cfg,
            "vocab_size": vocab.len(),
        }),
    )?;
    let out = run_seeds(&a.model_name, &train, &valid, &eval_refs, &vocab, &model_cfg, &train_cfg)?;
    for (run, model) in out.seeds.iter().zip(&out.models) {
        checkpoint::save(model, &vocab, &a.out.join(format!("seed-{}.ckpt", run.seed)))?;
        let accs: Vec<String> = run.accuracies.iter().map(|(s, x)| format!("{s} {x:.4}")).collect();
        println!("seed {:>3}  best epoch {}  {}", run.seed, run.history.best_epoch, accs.join("  "));
    }
    write_json(&a.out.join("history.json"), &serde_json::to_value(&out.seeds)?)?;
    out.report.write_csv(&a.out.join("report.csv"))?;
    print!("{}", render_table(std::slice::from_ref(&out.report)));
    Ok(())
}

fn seed_from_path(p: &Path, fallback: u64) -> u64 {
    p.file_stem()
        .and_then(|s| s.to_str())
        .and_then(|s| s.strip_prefix("seed-"))
        .and_then(|s| s.parse().ok())
        .unwrap_or(fallback)
}

fn cmd_eval(a: &EvalArgs) -> CliResult<()> {
    if a.oracle {
        let inv = UnitInventory::builtin();
        let mut bad = 0usize;
        for split in Split::ALL {
            let samples = load_split(&a.data, split)?;
            let failures: Vec<String> = samples
                .iter()
                .filter_map(|s| verify_sample(s, inv).err().map(|e| e.to_string()))
                .collect();
            println!("{split:<10} {:>8} checked  {:>6} mismatches", samples.len(), failures.len());
            for f in failures.iter().take(5) {
                eprintln!("  {f}");
            }
            bad += failures.len();
        }
        return if bad == 0 { Ok(()) } else { Err(format!("{bad} samples failed the oracle").into()) };
    }
    let evals: Vec<(Split, Vec<MstSample>)> =
        EVAL_SPLITS.iter().map(|&s| Ok((s, load_split(&a.data, s)?))).collect::<CliResult<_>>()?;
    let mut per_split: Vec<Vec<(u64, f64)>> = vec![Vec::new(); evals.len()];
    let mut counts = vec![0; evals.len()];
    let mut scale = false;
    let mut fp = Vec::new();
    for (i, path) in a.checkpoint.iter().enumerate() {
        let (model, vocab): (Encoder<f32>, Vocab) = checkpoint::load(path)?;
        scale = model.scale_enabled();
        fp.push(std::fs::read(path).map(|b| b.len().to_string()).unwrap_or_default());
        let seed = seed_from_path(path, i as u64 + 1);
        for (k, (_, samples)) in evals.iter().enumerate() {
            let ex = prepare(samples, &vocab, model.config.scale_cap)?;
            counts[k] = ex.len();
            per_split[k].push((seed, evaluate(&model, &ex)));
        }
    }
    let first = &evals[0].1.first().ok_or("empty evaluation split")?;
    let report = EvalReport {
        model: a.model_name.clone(),
        task: first.task,
        prompt_set: first.prompt_set,
        notation: first.notation,
        scale_embedding: scale,
        fingerprint: crate::model::fingerprint(&fp.iter().map(String::as_str).collect::<Vec<_>>()),
        splits: evals
            .iter()
            .zip(per_split)
            .zip(counts)
            .map(|(((s, _), seeds), n)| SplitResult::new(*s, n, seeds))
            .collect(),
    };
    match &a.out {
        Some(p) => report.write_csv(p)?,
        None => print!("{}", report.to_csv()),
    }
    Ok(())
}

fn cmd_report(files: &[PathBuf]) -> CliResult<()> {
    let mut reports = Vec::new();
    for f in files {
        let text = std::fs::read_to_string(f).map_err(|e| format!("{}: {e}", f.display()))?;
        reports.extend(EvalReport::from_csv(&text)?);
    }
    print!("{}", render_table(&reports));
    Ok(())
}

pub fn execute(cli: &Cli) -> CliResult<()> {
    if cli.jobs > 0 {
        // Ignore the error raised when a pool already exists (repeat calls in one process).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global();
    }
    match &cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Convert(c) => cmd_convert(c),
        Command::ScaleIndex { text, cap } => {
            print!("{}", annotate(text, *cap).to_dump());
            Ok(())
        }
        Command::Train(a) => cmd_train(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Report { files } => cmd_report(files),
        Command::Stats { files } => {
            print!("{}", dataset_stats(files)?.render());
            Ok(())
        }
    }
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
