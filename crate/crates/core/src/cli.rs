//! The `gridvad` command line.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::{Manifest, RunConfig};
use crate::error::{Error, Result};
use crate::explain::explain_object;
use crate::featurize::{BoxMode, ModelKind};
use crate::ingest::{read_ground_truth, read_tracks, TrackFormat};
use crate::metrics::{evaluate, MetricsReport};
use crate::pipeline::{prepare_test, read_scores, train, write_scores, Fusion, ModelBundle};
use crate::synth::{generate_scene, write_scene, SceneScript};

#[derive(Debug, Parser)]
#[command(name = "gridvad", version, about = "Anomaly detection on tracked bounding boxes")]
pub struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(1..))]
    pub threads: Option<u32>,
    /// More log output; repeat for debug.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic scene: train/test tracks and ground truth.
    Synth(SynthArgs),
    /// Fit a model bundle on training tracks.
    Train(TrainArgs),
    /// Score test tracks per object and per frame.
    Score(ScoreArgs),
    /// Compute frame AUC, RBDC and TBDC from scores and ground truth.
    Eval(EvalArgs),
    /// Per-attribute breakdown of one object's score.
    Explain(ExplainArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Scene script (JSON).
    #[arg(long, conflicts_with = "preset")]
    pub script: Option<PathBuf>,
    /// Built-in scene used when no script is given.
    #[arg(long, value_parser = ["reference", "temporal", "occlusion"])]
    pub preset: Option<String>,
    /// Overrides the script's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Directory for train.jsonl, test.jsonl, gt.jsonl and scene.json
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Training tracks (default: data.train from the config)
    #[arg(long)]
    pub tracks: Option<PathBuf>,
    /// Track file format (default: data.format, else jsonl)
    #[arg(long)]
    pub format: Option<TrackFormat>,
    /// Comma-separated grid cell sizes in pixels.
    #[arg(long, value_delimiter = ',', value_parser = cell_size, value_name = "SIZES")]
    pub cells: Option<Vec<u32>>,
    /// Spatial or spatio-temporal network
    #[arg(long)]
    pub mode: Option<ModelKind>,
    #[arg(long)]
    pub box_mode: Option<BoxMode>,
    #[arg(long)]
    pub fusion: Option<Fusion>,
    /// Frame-score smoothing σ in frames; 0 disables smoothing.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Keep every k-th training frame.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub slice: Option<u32>,
    /// Skip the confidence filter.
    #[arg(long)]
    pub no_filter: bool,
    /// Model bundle to write
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// Model bundle from `train`
    #[arg(long)]
    pub model: PathBuf,
    /// Test tracks (default: data.test from the config)
    #[arg(long)]
    pub tracks: Option<PathBuf>,
    /// Track file format (default: data.format, else jsonl)
    #[arg(long)]
    pub format: Option<TrackFormat>,
    /// Scores file to write (JSONL)
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Scores file from `score`
    #[arg(long)]
    pub scores: PathBuf,
    /// Ground-truth regions (default: data.gt from the config)
    #[arg(long)]
    pub gt: Option<PathBuf>,
    /// Metrics report to write (JSON)
    #[arg(long)]
    pub report: PathBuf,
    /// IoU for a detection to cover a ground-truth region.
    #[arg(long)]
    pub iou: Option<f64>,
    /// Fraction of a track's regions that must be detected.
    #[arg(long)]
    pub track_coverage: Option<f64>,
    /// Upper end of the false-positive axis for RBDC and TBDC.
    #[arg(long)]
    pub max_fp_rate: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ExplainArgs {
    /// Model bundle from `train`
    #[arg(long)]
    pub model: PathBuf,
    /// Tracks containing the object (default: data.test from the config)
    #[arg(long)]
    pub tracks: Option<PathBuf>,
    /// Track file format (default: data.format, else jsonl)
    #[arg(long)]
    pub format: Option<TrackFormat>,
    #[arg(long)]
    pub frame: u32,
    #[arg(long)]
    pub track_id: u64,
    /// Granularity to break down (default: the finest).
    #[arg(long, conflicts_with = "all_granularities")]
    pub cell_size: Option<u32>,
    /// Break down every granularity.
    #[arg(long)]
    pub all_granularities: bool,
    /// Explanation JSON; plot data goes next to it as .plot.json
    #[arg(long)]
    pub out: PathBuf,
}

fn cell_size(s: &str) -> std::result::Result<u32, String> {
    let v: u32 = s.trim().parse().map_err(|e| format!("{e}"))?;
    if v == 0 {
        return Err("cell sizes must be at least 1".into());
    }
    Ok(v)
}

fn required(flag: Option<PathBuf>, fallback: &Option<PathBuf>, name: &str, key: &str) -> Result<PathBuf> {
    flag.or_else(|| fallback.clone())
        .ok_or_else(|| Error::Config(format!("--{name} is required (or set {key} in the config file)")))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).map_err(|e| Error::io(path, e))?))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}

fn save_manifest(m: &Manifest, artifact: &Path) -> Result<()> {
    let path = Manifest::path_for(artifact);
    m.save(&path)?;
    log::info!("manifest written to {}", path.display());
    Ok(())
}

/// Runs a parsed command line with an already loaded configuration.
pub fn run(cli: Cli, mut config: RunConfig) -> Result<()> {
    match cli.command {
        Command::Synth(a) => synth(a, &config),
        Command::Train(a) => {
            let m = &mut config.model;
            if let Some(c) = a.cells.clone() {
                m.cell_sizes = c;
            }
            if let Some(k) = a.mode {
                m.kind = k;
            }
            if let Some(b) = a.box_mode {
                m.box_mode = b;
            }
            if let Some(f) = a.fusion {
                m.fusion = f;
            }
            if let Some(s) = a.sigma {
                m.smoothing_sigma = s;
            }
            if let Some(s) = a.slice {
                m.slice = s;
            }
            if a.no_filter {
                m.confidence_filter = false;
            }
            if let Some(f) = a.format {
                config.data.format = f;
            }
            config.validate()?;
            train_cmd(a, &config)
        }
        Command::Score(a) => {
            if let Some(f) = a.format {
                config.data.format = f;
            }
            score_cmd(a, &config)
        }
        Command::Eval(a) => {
            let p = &mut config.metrics;
            if let Some(v) = a.iou {
                p.iou = v;
            }
            if let Some(v) = a.track_coverage {
                p.track_coverage = v;
            }
            if let Some(v) = a.max_fp_rate {
                p.max_fp_rate = v;
            }
            config.validate()?;
            eval_cmd(a, &config)
        }
        Command::Explain(a) => {
            if let Some(f) = a.format {
                config.data.format = f;
            }
            explain_cmd(a, &config)
        }
    }
}

fn synth(a: SynthArgs, config: &RunConfig) -> Result<()> {
    let started = Instant::now();
    let mut script = match (&a.script, &a.preset) {
        (Some(path), _) => serde_json::from_reader(open(path)?)
            .map_err(|e| Error::Script(format!("{}: {e}", path.display())))?,
        (None, Some(name)) => SceneScript::preset(name).expect("preset names are checked by clap"),
        (None, None) => SceneScript::reference(),
    };
    if let Some(seed) = a.seed.or(config.seed) {
        script.seed = seed;
    }
    let scene = generate_scene(&script)?;
    let paths = write_scene(&script, &scene, &a.out_dir)?;

    let mut m = Manifest::new("synth", &script)?;
    if let Some(p) = &a.script {
        m.input("script", p);
    }
    m.output("train", &paths.train)
        .output("test", &paths.test)
        .output("gt", &paths.gt)
        .output("script", &paths.script)
        .timing("total", started.elapsed().as_secs_f64());
    m.stat("train_detections", scene.train.len())?
        .stat("test_detections", scene.test.len())?
        .stat("gt_regions", scene.gt.regions().len())?;
    save_manifest(&m, &a.out_dir)
}

fn train_cmd(a: TrainArgs, config: &RunConfig) -> Result<()> {
    let tracks_path = required(a.tracks, &config.data.train, "tracks", "data.train")?;
    let started = Instant::now();
    let raw = read_tracks(&tracks_path, config.data.format)?;
    let load_seconds = started.elapsed().as_secs_f64();

    let (bundle, report) = train(&config.model, &raw)?;
    bundle.save(&a.out)?;

    let mut m = Manifest::new("train", config)?;
    m.input("tracks", &tracks_path)
        .output("model", &a.out)
        .timing("load", load_seconds)
        .timing("total", started.elapsed().as_secs_f64());
    for g in &report.granularities {
        m.timing(&format!("fit.cell_{}", g.cell_size), g.fit_seconds)
            .timing(&format!("featurize.cell_{}", g.cell_size), g.featurize_seconds);
    }
    m.stat("raw_detections", raw.len())?
        .stat("confidence_thresholds", bundle.confidence)?
        .stat("training", &report)?;
    save_manifest(&m, &a.out)
}

fn score_cmd(a: ScoreArgs, config: &RunConfig) -> Result<()> {
    let tracks_path = required(a.tracks, &config.data.test, "tracks", "data.test")?;
    let bundle = ModelBundle::load(&a.model)?;
    let raw = read_tracks(&tracks_path, config.data.format)?;
    let tracks = prepare_test(&bundle, &raw);
    let scorer = bundle.scorer()?;

    let started = Instant::now();
    let (objects, frames) = scorer.score_frames(&tracks)?;
    let seconds = started.elapsed().as_secs_f64();

    let dets = tracks.detections();
    let prev = tracks.predecessors();
    let cells: usize = (0..dets.len())
        .map(|k| {
            (0..bundle.granularities.len())
                .filter_map(|g| scorer.evidence(g, &dets[k], prev[k].map(|p| &dets[p])))
                .map(|e| e.len())
                .sum::<usize>()
        })
        .sum();

    let echo = serde_json::json!({ "model": bundle.config, "confidence": bundle.confidence });
    let mut out = create(&a.out)?;
    write_scores(Some(&echo), &objects, &frames, &mut out)?;

    let per = |n: usize| if n == 0 { 0.0 } else { seconds / n as f64 };
    let mut m = Manifest::new("score", &echo)?;
    m.input("model", &a.model)
        .input("tracks", &tracks_path)
        .output("scores", &a.out)
        .timing("score", seconds)
        .timing("per_frame", per(frames.frames.len()))
        .timing("per_object", per(objects.len()))
        .timing("per_cell", per(cells));
    m.stat("raw_detections", raw.len())?
        .stat("scored_objects", objects.len())?
        .stat("frames", frames.frames.len())?
        .stat("cell_queries", cells)?;
    save_manifest(&m, &a.out)
}

#[derive(Serialize)]
struct ReportFile<'a> {
    config: &'a Option<serde_json::Value>,
    #[serde(flatten)]
    report: &'a MetricsReport,
}

fn eval_cmd(a: EvalArgs, config: &RunConfig) -> Result<()> {
    let gt_path = required(a.gt, &config.data.gt, "gt", "data.gt")?;
    let started = Instant::now();
    let scores = read_scores(open(&a.scores)?)?;
    let gt = read_ground_truth(&gt_path)?;
    let report = evaluate(&scores.objects, &scores.frames, &gt, &config.metrics);
    write_json(
        &a.report,
        &ReportFile {
            config: &scores.config,
            report: &report,
        },
    )?;
    for (k, v) in &report.summary {
        println!("{k}: {v}");
    }
    for note in &report.notes {
        println!("note: {note}");
    }

    let mut m = Manifest::new("eval", &config.metrics)?;
    m.input("scores", &a.scores)
        .input("gt", &gt_path)
        .output("report", &a.report)
        .timing("total", started.elapsed().as_secs_f64());
    m.stat("summary", &report.summary)?;
    save_manifest(&m, &a.report)
}

fn explain_cmd(a: ExplainArgs, config: &RunConfig) -> Result<()> {
    let tracks_path = required(a.tracks, &config.data.test, "tracks", "data.test")?;
    let started = Instant::now();
    let bundle = ModelBundle::load(&a.model)?;
    let raw = read_tracks(&tracks_path, config.data.format)?;
    let tracks = prepare_test(&bundle, &raw);
    let Some(idx) = tracks.find(a.frame, a.track_id) else {
        let why = if raw.find(a.frame, a.track_id).is_some() {
            "it was removed by the confidence filter"
        } else {
            "no such detection"
        };
        return Err(Error::Config(format!(
            "cannot explain track {} in frame {}: {why}",
            a.track_id, a.frame
        )));
    };
    let selected: Option<Vec<usize>> = match (a.cell_size, a.all_granularities) {
        (_, true) => None,
        (Some(s), false) => Some(vec![bundle.granularity(s).ok_or_else(|| {
            Error::Config(format!("--cell-size {s}: the model has no such granularity"))
        })?]),
        (None, false) => Some(vec![0]),
    };
    let scorer = bundle.scorer()?;
    let dets = tracks.detections();
    let prev = tracks.predecessors()[idx].map(|p| &dets[p]);
    let explanation = explain_object(&scorer, &dets[idx], prev, selected.as_deref())?;
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    explanation.save(&a.out)?;

    let mut m = Manifest::new("explain", &serde_json::json!({ "model": bundle.config }))?;
    m.input("model", &a.model)
        .input("tracks", &tracks_path)
        .output("explanation", &a.out)
        .output("plot", &a.out.with_extension("plot.json"))
        .timing("total", started.elapsed().as_secs_f64());
    m.stat("frame", a.frame)?
        .stat("track_id", a.track_id)?
        .stat("score", explanation.score)?;
    save_manifest(&m, &a.out)
}

/// Exit status of a failed run: 2 for configuration and usage problems,
/// 1 for everything else.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Script(_) => 2,
        _ => 1,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Io { .. } => "io",
        Error::Parse { .. } => "parse",
        Error::Validation { .. } | Error::DuplicateTrack { .. } => "validation",
        Error::Config(_) => "config",
        Error::Script(_) => "script",
        Error::Fit { .. } | Error::Network(_) => "network",
        Error::Bundle(_) => "bundle",
        Error::Json(_) => "json",
        Error::Other(_) => "other",
    }
}

/// Parses `args`, runs the command and returns the process exit code.
/// Failures are reported on stderr as one JSON object.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .try_init();

    let result = (|| {
        if let Some(n) = cli.threads {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n as usize)
                .build_global()
                .map_err(|e| Error::Other(format!("thread pool: {e}")))?;
        }
        let config = match &cli.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        run(cli, config)
    })();
    match result {
        Ok(()) => 0,
        Err(e) => {
            let code = exit_code(&e);
            let report = serde_json::json!({
                "error": error_kind(&e),
                "message": e.to_string(),
                "exit_code": code,
            });
            eprintln!("{report}");
            code
        }
    }
}

pub fn main() -> i32 {
    main_with_args(std::env::args_os())
}
