use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{Context, Result};
use log::{info, warn};

use pvqa_core::dataset::{dataset_stats, read_manifest, write_manifest};
use pvqa_core::eval::{
    infer_remote_blocking, make_shuffled_variant, read_predictions, report_table, score, write_predictions,
    EndpointConfig, EvalError, ImageMode, ReportRow, ReportTable, ScoreReport, TaskId,
};
use pvqa_core::pipeline::{self, kind_counts, GeneratedItem};
use pvqa_core::Corpus;

use crate::args::{Cli, Command, GenArgs, InferArgs, ReportArgs, ScoreArgs, ShuffleArgs, StatsArgs, VerifyArgs};
use crate::settings::{resolve, CorpusFormat, CorpusSource, FileConfig, RUN_CONFIG};
use crate::{Usage, EXIT_INVALID};

const MANIFEST: &str = "manifest.jsonl";
const SPECS: &str = "specs.jsonl";
const PREDICTIONS: &str = "predictions.jsonl";
const SCORE: &str = "score.json";

const AVG_LEGEND: &str = "Avg(macro): unweighted mean over tasks. Avg(micro): mean over items.";

/// Global options after merging flags and the config file.
struct Ctx {
    seed: Option<u64>,
    out: PathBuf,
    jobs: usize,
    file: FileConfig,
    config_given: bool,
}

impl Ctx {
    fn manifest(&self, explicit: Option<PathBuf>) -> PathBuf {
        explicit.unwrap_or_else(|| self.out.join(MANIFEST))
    }

    fn create_out(&self) -> Result<()> {
        fs::create_dir_all(&self.out).with_context(|| format!("creating {}", self.out.display()))
    }
}

pub fn run(cli: Cli) -> Result<ExitCode> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let jobs = cli
        .jobs
        .or(file.jobs)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if jobs == 0 {
        return Err(Usage("--jobs must be at least 1".into()).into());
    }
    let ctx = Ctx {
        seed: cli.seed.or(file.seed),
        out: cli
            .out
            .or_else(|| file.out.clone())
            .unwrap_or_else(|| PathBuf::from("out")),
        jobs,
        config_given: cli.config.is_some(),
        file,
    };
    match cli.command {
        Command::Generate(a) => generate(&ctx, &a),
        Command::Verify(a) => verify(&ctx, a),
        Command::Stats(a) => stats(&ctx, a),
        Command::Shuffle(a) => shuffle(&ctx, a),
        Command::Infer(a) => infer(&ctx, a),
        Command::Score(a) => score_cmd(&ctx, a),
        Command::Report(a) => report(&ctx, a),
    }
}

fn load_corpus(src: &CorpusSource) -> Result<Corpus> {
    let corpus = match src.format {
        CorpusFormat::Coco => Corpus::load_coco_captions(&src.path, &src.image_root),
        CorpusFormat::Generic => Corpus::load_generic(&src.path, &src.image_root),
    }
    .with_context(|| format!("loading corpus {}", src.path.display()))?;
    info!(
        "corpus: {} samples, {} distinct captions",
        corpus.len(),
        corpus.distinct_caption_count()
    );
    Ok(corpus)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn generate(ctx: &Ctx, args: &GenArgs) -> Result<ExitCode> {
    let r = resolve(args, ctx.seed, &ctx.file)?;
    let src = r
        .corpus
        .as_ref()
        .ok_or_else(|| Usage("generate needs --corpus".into()))?;
    let corpus = load_corpus(src)?;
    if !r.spec_only {
        let report = corpus.validate();
        if !report.missing_images.is_empty() {
            warn!("{} corpus images are missing on disk", report.missing_images.len());
        }
    }
    ctx.create_out()?;

    let started = Instant::now();
    let items = pipeline::generate(&r.generation, &corpus, r.count, ctx.jobs)?;
    info!("sampled {} items in {:.1?}", items.len(), started.elapsed());

    let records: Vec<_> = items.iter().map(GeneratedItem::record).collect();
    let manifest = ctx.out.join(MANIFEST);
    write_manifest(&records, &manifest)?;

    if r.spec_only {
        let path = ctx.out.join(SPECS);
        let io = |e: std::io::Error| anyhow::Error::new(e).context(format!("writing {}", path.display()));
        let mut w = BufWriter::new(File::create(&path).map_err(io)?);
        for g in &items {
            serde_json::to_writer(&mut w, &g.spec).context("serializing spec")?;
            w.write_all(b"\n").map_err(io)?;
        }
        w.flush().map_err(io)?;
    } else {
        let started = Instant::now();
        pipeline::render_all(&items, &corpus, &ctx.out, &r.generation, ctx.jobs)?;
        info!("rendered frames in {:.1?}", started.elapsed());
    }
    r.file.save(&ctx.out.join(RUN_CONFIG))?;

    let mut counts: Vec<_> = kind_counts(&items).into_iter().collect();
    counts.sort();
    let summary: Vec<String> = counts.iter().map(|(k, n)| format!("{k}={n}")).collect();
    println!(
        "wrote {} items to {} ({})",
        records.len(),
        manifest.display(),
        summary.join(" ")
    );
    Ok(ExitCode::SUCCESS)
}

fn verify(ctx: &Ctx, args: VerifyArgs) -> Result<ExitCode> {
    let path = ctx.manifest(args.manifest);
    // Without --config, reuse the settings the manifest was generated with.
    let sidecar = path.parent().unwrap_or(Path::new(".")).join(RUN_CONFIG);
    let file = if !ctx.config_given && sidecar.is_file() {
        info!("using generation settings from {}", sidecar.display());
        FileConfig::load(&sidecar)?
    } else {
        ctx.file.clone()
    };
    let r = resolve(&args.generation, ctx.seed, &file)?;
    let src = r.corpus.as_ref().ok_or_else(|| Usage("verify needs --corpus".into()))?;
    let corpus = load_corpus(src)?;
    let records = read_manifest(&path)?;

    let report = pipeline::verify(&records, &corpus, &r.generation, ctx.jobs)?;
    for v in &report.violations {
        println!("line {}: {}: {}", v.line, v.id, v.reason);
    }
    for (line, id, src) in &report.unknown_sources {
        println!("line {line}: {id}: source {src:?} is not in the corpus");
    }
    println!(
        "checked {} items: {} violations, {} unknown sources",
        report.checked,
        report.violations.len(),
        report.unknown_sources.len()
    );
    Ok(if report.is_clean() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_INVALID)
    })
}

fn stats(ctx: &Ctx, args: StatsArgs) -> Result<ExitCode> {
    let records = read_manifest(&ctx.manifest(args.manifest))?;
    let stats = dataset_stats(&records);
    print!("{}", stats.to_text());
    if let Some(csv) = args.csv {
        write_text(&csv, &stats.to_csv())?;
    }
    Ok(ExitCode::SUCCESS)
}

fn shuffle(ctx: &Ctx, args: ShuffleArgs) -> Result<ExitCode> {
    let records = read_manifest(&ctx.manifest(args.manifest))?;
    let seed = args.variant_seed.or(ctx.seed).unwrap_or(0);
    let shuffled = make_shuffled_variant(&records, seed);
    let output = match args.output {
        Some(p) => p,
        None => {
            ctx.create_out()?;
            ctx.out.join("manifest_shuffled.jsonl")
        }
    };
    write_manifest(&shuffled, &output)?;
    println!(
        "wrote {} shuffled items to {} (variant seed {seed})",
        shuffled.len(),
        output.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn infer(ctx: &Ctx, args: InferArgs) -> Result<ExitCode> {
    let path = ctx.manifest(args.manifest);
    let records = read_manifest(&path)?;
    if !(args.timeout.is_finite() && args.timeout > 0.0) {
        return Err(Usage("--timeout must be positive".into()).into());
    }
    let config = EndpointConfig {
        token_env: args.token_env,
        max_in_flight: args.max_in_flight.max(1),
        timeout: Duration::from_secs_f64(args.timeout),
        retries: args.retries,
        backoff: Duration::from_millis(args.backoff_ms),
        image_mode: if args.inline_images {
            ImageMode::Inline
        } else {
            ImageMode::Paths
        },
        frame_root: args
            .frame_root
            .unwrap_or_else(|| path.parent().map(Path::to_path_buf).unwrap_or_default()),
        ..EndpointConfig::new(args.url)
    };
    let output = match args.output {
        Some(p) => p,
        None => {
            ctx.create_out()?;
            ctx.out.join(PREDICTIONS)
        }
    };
    match infer_remote_blocking(&records, &config) {
        Ok(preds) => {
            write_predictions(&preds, &output)?;
            let failed = preds.iter().filter(|p| p.error.is_some()).count();
            println!(
                "wrote {} predictions to {} ({failed} failed)",
                preds.len(),
                output.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Err(EvalError::TooManyFailures { failed, total, partial }) => {
            write_predictions(&partial, &output)?;
            Err(anyhow::anyhow!(
                "endpoint failed for {failed} of {total} items; aborted with {} partial predictions saved to {}",
                partial.len(),
                output.display()
            ))
        }
        Err(e) => Err(e.into()),
    }
}

fn print_table(table: &ReportTable, csv: Option<&Path>) -> Result<()> {
    print!("{}", table.to_text());
    println!("{AVG_LEGEND}");
    if let Some(csv) = csv {
        write_text(csv, &table.to_csv())?;
    }
    Ok(())
}

fn score_cmd(ctx: &Ctx, args: ScoreArgs) -> Result<ExitCode> {
    let records = read_manifest(&ctx.manifest(args.manifest))?;
    let preds_path = args.predictions.unwrap_or_else(|| ctx.out.join(PREDICTIONS));
    let preds = read_predictions(&preds_path)?;
    let report = score(&records, &preds)?;
    for w in &report.warnings {
        warn!("{w}");
    }
    print_table(&report_table(&report, &args.label), args.csv.as_deref())?;
    println!(
        "items {}  correct {}  unparseable {}  missing {}",
        report.n_items(),
        report.n_correct(),
        report.n_unparseable,
        report.n_missing
    );
    ctx.create_out()?;
    let json = serde_json::to_string_pretty(&report).context("serializing score report")?;
    write_text(&ctx.out.join(SCORE), &json)?;
    Ok(ExitCode::SUCCESS)
}

/// Parses `AC=31.0,OC=59.4,...` into per-task accuracies.
fn parse_accuracies(text: &str) -> Result<Vec<(TaskId, f64)>, Usage> {
    let mut values: Vec<(TaskId, f64)> = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (task, value) = part
            .split_once('=')
            .ok_or_else(|| Usage(format!("expected TASK=VALUE, got {part:?}")))?;
        let task: TaskId = task.trim().parse().map_err(|e| Usage(format!("{e}")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Usage(format!("bad accuracy in {part:?}")))?;
        if values.iter().any(|(t, _)| *t == task) {
            return Err(Usage(format!("{task} given twice")));
        }
        values.push((task, value));
    }
    if values.is_empty() {
        return Err(Usage("no accuracies given".into()));
    }
    values.sort_by_key(|(t, _)| *t);
    Ok(values)
}

/// Table for published per-task numbers, with a chance row when every
/// column is a TVBench task.
fn accuracy_table(values: Vec<(TaskId, f64)>, label: &str) -> ReportTable {
    let columns: Vec<TaskId> = values.iter().map(|(t, _)| *t).collect();
    let mut rows = Vec::new();
    let chance: Option<Vec<(TaskId, f64)>> = columns
        .iter()
        .map(|t| t.tvbench_option_count().map(|n| (*t, 100.0 / n as f64)))
        .collect();
    if let Some(chance) = chance {
        rows.push(ReportRow::from_accuracies("Chance level", chance));
    }
    rows.push(ReportRow::from_accuracies(label, values));
    ReportTable { columns, rows }
}

fn report(ctx: &Ctx, args: ReportArgs) -> Result<ExitCode> {
    let table = match &args.accuracies {
        Some(text) => accuracy_table(parse_accuracies(text)?, &args.label),
        None => {
            let path = args.score.unwrap_or_else(|| ctx.out.join(SCORE));
            let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            let report: ScoreReport =
                serde_json::from_str(&text).with_context(|| format!("parsing score report {}", path.display()))?;
            report_table(&report, &args.label)
        }
    };
    print_table(&table, args.csv.as_deref())?;
    Ok(ExitCode::SUCCESS)
}
