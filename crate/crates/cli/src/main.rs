use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use kmfold::dataset::{parse_program, LoadOptions};
use kmfold::evalcv::{confusion_metrics, SummaryTable};
use kmfold::fold::InductionConfig;
use kmfold::hypothesis::{parse_asp, render_asp};
use kmfold::pipeline::{config_seed, learn, sweep_select, Algorithm, SweepConfig, SweepOutcome};
use kmfold::translate::{parse_pred_file, translate_hypothesis};
use kmfold::{Dataset, Example, Hypothesis};

#[derive(Parser, Debug)]
#[command(name = "kmfold", version, about = "Learn, evaluate and explain default theories with exceptions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Learn a hypothesis and write it as an answer set program.
    Learn(LearnArgs),
    /// Cross-validate an algorithm, or score a saved hypothesis.
    Eval(EvalArgs),
    /// Render a hypothesis in English using `#pred` directives.
    Translate(TranslateArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
struct DataArgs {
    /// CSV file with a header row, or a logic program (`.lp`).
    data: PathBuf,
    /// Target column (or example predicate for `.lp` input).
    #[arg(long)]
    target: String,
    #[arg(long, default_value = "true")]
    positive_label: String,
    /// Column of example identifiers. By default the first text column with
    /// all-distinct values is used, else row numbers.
    #[arg(long)]
    id_column: Option<String>,
}

#[derive(Args, Debug, Clone, Serialize)]
struct ModelArgs {
    #[arg(long, value_enum, default_value = "fold")]
    algo: Algo,
    /// Number of clusters; without it the clustering algorithms sweep k.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    k: Option<u64>,
    /// Demotion factor.
    #[arg(long, default_value_t = 0.5)]
    f: f64,
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..))]
    max_clause_len: u64,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    bins: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Algo {
    Fold,
    Foldr,
    KmeansFold,
    KmeansFoldr,
}

impl From<Algo> for Algorithm {
    fn from(a: Algo) -> Self {
        match a {
            Algo::Fold => Algorithm::Fold,
            Algo::Foldr => Algorithm::FoldR,
            Algo::KmeansFold => Algorithm::KmeansFold,
            Algo::KmeansFoldr => Algorithm::KmeansFoldR,
        }
    }
}

#[derive(Args, Debug, Serialize)]
struct LearnArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// Output file; stdout otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Markdown,
}

#[derive(Args, Debug, Serialize)]
struct EvalArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// Score this saved hypothesis on the whole dataset instead of training.
    #[arg(long)]
    hypothesis: Option<PathBuf>,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(2..))]
    folds: u64,
    /// Cluster counts to sweep, as `lo..hi` (inclusive).
    #[arg(long, value_parser = parse_k_range)]
    sweep_k: Option<(usize, usize)>,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
    repeats: u64,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Include per-fold rows in CSV output.
    #[arg(long)]
    with_folds: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct TranslateArgs {
    /// Hypothesis in answer set program form.
    hypothesis: PathBuf,
    /// File of `#pred` directives.
    #[arg(long)]
    preds: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_k_range(s: &str) -> Result<(usize, usize), String> {
    let (lo, hi) = s.split_once("..").ok_or("expected `lo..hi`")?;
    let lo: usize = lo.trim().parse().map_err(|_| format!("bad lower bound `{lo}`"))?;
    let hi: usize = hi.trim().trim_start_matches('=').parse().map_err(|_| format!("bad upper bound `{hi}`"))?;
    if lo == 0 || hi < lo {
        return Err(format!("empty or zero-based range {lo}..{hi}"));
    }
    Ok((lo, hi))
}

enum Failure {
    Usage(String),
    Data(anyhow::Error),
    Invariant(String),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Data(e)
    }
}

type Outcome<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Learn(args) => cmd_learn(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Translate(args) => cmd_translate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Invariant(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn load_dataset(args: &DataArgs) -> Outcome<Dataset> {
    let is_program = args.data.extension().is_some_and(|e| e == "lp");
    if is_program {
        let text = read(&args.data)?;
        let program = parse_program(&text).with_context(|| format!("parsing {}", args.data.display()))?;
        let ds = program.to_dataset().with_context(|| format!("loading {}", args.data.display()))?;
        if ds.schema.target != args.target {
            return Err(Failure::Data(anyhow::anyhow!(
                "{} has examples of `{}`, not `{}`",
                args.data.display(),
                ds.schema.target,
                args.target
            )));
        }
        return Ok(ds);
    }
    let mut options = LoadOptions::new(&args.target, &args.positive_label).detecting_id();
    if let Some(id) = &args.id_column {
        options = options.with_id_column(id);
    }
    Ok(Dataset::from_csv(&args.data, &options).with_context(|| format!("loading {}", args.data.display()))?)
}

fn read(path: &Path) -> Outcome<String> {
    Ok(fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?)
}

fn induction_config(model: &ModelArgs) -> InductionConfig {
    let mut cfg = InductionConfig {
        max_clause_length: model.max_clause_len as usize,
        f: model.f,
        seed: model.seed,
        ..InductionConfig::default()
    };
    cfg.encoding.bins = model.bins as usize;
    cfg
}

fn check_model(model: &ModelArgs) -> Outcome<Algorithm> {
    let algorithm = Algorithm::from(model.algo);
    if model.k.is_some() && !algorithm.uses_clustering() {
        return Err(Failure::Usage(format!("--k only applies to kmeans algorithms, not {algorithm}")));
    }
    if !(0.0..=1.0).contains(&model.f) {
        return Err(Failure::Usage(format!("--f must lie in [0, 1], got {}", model.f)));
    }
    Ok(algorithm)
}

fn dataset_name(path: &Path) -> String {
    path.file_stem().map_or_else(|| "data".to_string(), |s| s.to_string_lossy().into_owned())
}

/// Render, then make sure the text reads back as the same program.
fn render_checked(hyp: &Hypothesis) -> Outcome<String> {
    hyp.validate().map_err(|e| Failure::Invariant(format!("learned hypothesis is malformed: {e}")))?;
    let text = render_asp(hyp);
    let again = parse_asp(&text, Some(&hyp.schema))
        .map_err(|e| Failure::Invariant(format!("rendered hypothesis does not parse: {e}")))?;
    if render_asp(&again) != text {
        return Err(Failure::Invariant("rendered hypothesis does not round-trip".into()));
    }
    Ok(text)
}

fn cmd_learn(args: &LearnArgs) -> Outcome<()> {
    let algorithm = check_model(&args.model)?;
    let ds = load_dataset(&args.data)?;
    let cfg = induction_config(&args.model);
    let (hyp, chosen_k) = match (algorithm.uses_clustering(), args.model.k) {
        (true, None) => {
            let sweep = SweepConfig { f: args.model.f, seed: args.model.seed, ..SweepConfig::default() };
            let out: SweepOutcome = sweep_select(&ds, &dataset_name(&args.data.data), algorithm, &sweep, &cfg)
                .context("selecting k")?;
            let k = out.report.best_row().k;
            (out.hypothesis, k)
        }
        (_, k) => {
            let k = k.map(|k| k as usize);
            let hyp = learn(algorithm, ds.schema.clone(), &ds.positives(), &ds.negatives(), k.unwrap_or(1), &cfg);
            (hyp, k)
        }
    };
    let text = render_checked(&hyp)?;
    let mut extra = BTreeMap::new();
    if let Some(k) = chosen_k {
        extra.insert("k".to_string(), k.to_string());
    }
    emit("learn", args, &[&args.data.data], &text, args.out.as_deref(), extra)
}

fn cmd_eval(args: &EvalArgs) -> Outcome<()> {
    let algorithm = check_model(&args.model)?;
    if args.sweep_k.is_some() && !algorithm.uses_clustering() {
        return Err(Failure::Usage(format!("--sweep-k only applies to kmeans algorithms, not {algorithm}")));
    }
    if args.sweep_k.is_some() && args.model.k.is_some() {
        return Err(Failure::Usage("--k and --sweep-k are mutually exclusive".into()));
    }
    let ds = load_dataset(&args.data)?;
    let name = dataset_name(&args.data.data);

    if let Some(path) = &args.hypothesis {
        let hyp = parse_asp(&read(path)?, Some(&ds.schema)).with_context(|| format!("parsing {}", path.display()))?;
        let all: Vec<&Example> = ds.examples.iter().collect();
        let m = confusion_metrics(&hyp, &all);
        let mut table = SummaryTable::default();
        table.insert(&name, "hypothesis", kmfold::evalcv::MeanMetrics::of([(&m, hyp.rule_count(), hyp.literal_count())]));
        let text = match args.format {
            Format::Csv => table.to_csv(),
            Format::Markdown => table.quality_markdown(),
        };
        return emit("eval", args, &[&args.data.data, path], &text, args.out.as_deref(), BTreeMap::new());
    }

    let (lo, hi) = match (args.sweep_k, args.model.k) {
        (Some(range), _) => range,
        (None, Some(k)) => (k as usize, k as usize),
        (None, None) => (1, 10),
    };
    let sweep = SweepConfig {
        k_range: lo..=hi,
        repeats: args.repeats as usize,
        f: args.model.f,
        folds: args.folds as usize,
        seed: args.model.seed,
        ..SweepConfig::default()
    };
    let cfg = induction_config(&args.model);
    let out = sweep_select(&ds, &name, algorithm, &sweep, &cfg).context("cross-validation")?;
    let report = &out.report;
    let text = match args.format {
        Format::Csv => report.to_csv(args.with_folds),
        Format::Markdown => {
            let mut table = SummaryTable::default();
            table.insert(&name, algorithm.name(), report.best_row().mean());
            let mut s = table.quality_markdown();
            s.push('\n');
            s.push_str(&table.rule_count_markdown());
            s
        }
    };
    if report.degenerate_folds > 0 {
        eprintln!("warning: {} folds had no training positives and were left out", report.degenerate_folds);
    }
    let mut extra = BTreeMap::new();
    let best = report.best_row();
    if let Some(k) = best.k {
        extra.insert("best_k".to_string(), k.to_string());
        extra.insert("best_repeat".to_string(), best.repeat.to_string());
        extra.insert("best_cluster_seed".to_string(), config_seed(sweep.seed, k, best.repeat).to_string());
    }
    emit("eval", args, &[&args.data.data], &text, args.out.as_deref(), extra)
}

fn cmd_translate(args: &TranslateArgs) -> Outcome<()> {
    let directives = parse_pred_file(&read(&args.preds)?).with_context(|| format!("parsing {}", args.preds.display()))?;
    let hyp = parse_asp(&read(&args.hypothesis)?, None).with_context(|| format!("parsing {}", args.hypothesis.display()))?;
    let text = translate_hypothesis(&hyp, &directives).context("translating")?;
    emit("translate", args, &[&args.hypothesis, &args.preds], &text, args.out.as_deref(), BTreeMap::new())
}

#[derive(Serialize)]
struct FileDigest {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct RunManifest<'a, A: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    args: &'a A,
    inputs: Vec<FileDigest>,
    output: FileDigest,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    selected: BTreeMap<String, String>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Write to `out` plus a manifest beside it, or print to stdout.
fn emit<A: Serialize>(
    command: &'static str,
    args: &A,
    inputs: &[&Path],
    text: &str,
    out: Option<&Path>,
    selected: BTreeMap<String, String>,
) -> Outcome<()> {
    let Some(out) = out else {
        print!("{text}");
        return Ok(());
    };
    fs::write(out, text).with_context(|| format!("writing {}", out.display()))?;
    let mut digests = Vec::new();
    for path in inputs {
        let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        digests.push(FileDigest { path: path.display().to_string(), sha256: sha256_hex(&bytes) });
    }
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command,
        args,
        inputs: digests,
        output: FileDigest { path: out.display().to_string(), sha256: sha256_hex(text.as_bytes()) },
        selected,
    };
    let mut json = serde_json::to_string_pretty(&manifest).map_err(|e| Failure::Invariant(e.to_string()))?;
    let _ = writeln!(json);
    let mut manifest_path = out.as_os_str().to_owned();
    manifest_path.push(".manifest.json");
    fs::write(&manifest_path, json).with_context(|| format!("writing {}", PathBuf::from(&manifest_path).display()))?;
    Ok(())
}
