//! Training across grid granularities, per-object scoring, fusion and
//! frame-level smoothing.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use gridvad_bn::{fit_mle, BayesNet};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::featurize::{
    build_grid, cell_intersections, fit_discretizer, generate_observations, object_features,
    BoxMode, DiscretizationModel, DiscretizerParams, GridSpec, ModelKind,
};
use crate::geometry::BBox;
use crate::ingest::{
    compute_confidence_thresholds, filter_detections, slice_frames, ConfidenceThresholds,
    TrackSet, TrackedDetection,
};
use crate::network::{class_cpt_query, default_edges, fitted_structure, to_data_table, CellEvidence, NodeMap};

pub const BUNDLE_FORMAT_VERSION: u32 = 1;

/// How per-granularity object scores are combined.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Fusion {
    #[default]
    Mean,
    Min,
}

impl Fusion {
    pub fn fuse(self, values: &[f64]) -> f64 {
        match self {
            Fusion::Mean => mean(values),
            Fusion::Min => values.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }
}

/// Arithmetic mean kept within the range of its inputs, so identical
/// values fuse to themselves exactly.
pub fn mean(values: &[f64]) -> f64 {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if lo == hi {
        return lo;
    }
    (values.iter().sum::<f64>() / values.len() as f64).clamp(lo, hi)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub cell_sizes: Vec<u32>,
    pub kind: ModelKind,
    pub box_mode: BoxMode,
    pub fusion: Fusion,
    /// Gaussian σ in frames for frame-score smoothing; 0 disables it.
    pub smoothing_sigma: f64,
    /// Keep every k-th training frame.
    pub slice: u32,
    /// Drop low-confidence detections before training and scoring.
    pub confidence_filter: bool,
    pub discretizer: DiscretizerParams,
    /// Replaces the default network edges when set.
    pub edges: Option<Vec<(String, String)>>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            cell_sizes: vec![20, 40],
            kind: ModelKind::SpatioTemporal,
            box_mode: BoxMode::Bottom,
            fusion: Fusion::Mean,
            smoothing_sigma: 5.0,
            slice: 1,
            confidence_filter: true,
            discretizer: DiscretizerParams::default(),
            edges: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.cell_sizes.is_empty() {
            return Err(Error::Config("at least one cell size is required".into()));
        }
        if self.cell_sizes.contains(&0) {
            return Err(Error::Config("cell sizes must be at least 1".into()));
        }
        if self.slice == 0 {
            return Err(Error::Config("slice factor must be at least 1".into()));
        }
        if !(self.smoothing_sigma >= 0.0 && self.smoothing_sigma.is_finite()) {
            return Err(Error::Config("smoothing sigma must be a finite non-negative number".into()));
        }
        let d = &self.discretizer;
        if !(d.square_tolerance >= 0.0 && d.idle_speed >= 0.0) {
            return Err(Error::Config("square tolerance and idle speed must be non-negative".into()));
        }
        Ok(())
    }
}

/// A fitted network at one cell size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Granularity {
    pub grid: GridSpec,
    pub discretizer: DiscretizationModel,
    pub net: BayesNet,
}

impl Granularity {
    pub fn cell_size(&self) -> u32 {
        self.grid.cell_size
    }
}

/// Everything needed to score new tracks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelBundle {
    pub format_version: u32,
    pub kind: ModelKind,
    pub box_mode: BoxMode,
    pub fusion: Fusion,
    pub smoothing_sigma: f64,
    /// Thresholds learned from the training tracks; `None` when filtering
    /// was disabled.
    pub confidence: Option<ConfidenceThresholds>,
    /// Finest cell size first.
    pub granularities: Vec<Granularity>,
    /// The configuration the bundle was trained with.
    pub config: TrainConfig,
}

/// Per-granularity training statistics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GranularityReport {
    pub cell_size: u32,
    pub cells: u32,
    pub observations: usize,
    pub featurize_seconds: f64,
    pub fit_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub detections: usize,
    pub frames_kept: usize,
    pub granularities: Vec<GranularityReport>,
}

/// Confidence thresholds come from the full training set; slicing happens
/// after filtering.
pub fn prepare_training(
    config: &TrainConfig,
    raw: &TrackSet,
) -> (TrackSet, Option<ConfidenceThresholds>) {
    let thresholds = config
        .confidence_filter
        .then(|| compute_confidence_thresholds(raw));
    let filtered = match &thresholds {
        Some(c) => filter_detections(raw, c),
        None => raw.clone(),
    };
    (slice_frames(&filtered, config.slice), thresholds)
}

/// Filters test tracks with the thresholds stored in the bundle.
pub fn prepare_test(bundle: &ModelBundle, raw: &TrackSet) -> TrackSet {
    match &bundle.confidence {
        Some(c) => filter_detections(raw, c),
        None => raw.clone(),
    }
}

/// Preprocesses raw training tracks and fits one network per cell size.
pub fn train(config: &TrainConfig, raw: &TrackSet) -> Result<(ModelBundle, TrainReport)> {
    config.validate()?;
    let (tracks, thresholds) = prepare_training(config, raw);
    let edges = config
        .edges
        .clone()
        .unwrap_or_else(|| default_edges(config.kind));

    let mut cell_sizes = config.cell_sizes.clone();
    cell_sizes.sort_unstable();
    cell_sizes.dedup();

    let mut granularities = Vec::new();
    let mut reports = Vec::new();
    for &cell_size in &cell_sizes {
        let started = Instant::now();
        let grid = build_grid(tracks.resolution(), cell_size)?;
        let discretizer = fit_discretizer(&tracks, config.discretizer);
        let table = generate_observations(&tracks, &grid, &discretizer, config.kind, config.box_mode);
        let data = to_data_table(&table);
        let featurize_seconds = started.elapsed().as_secs_f64();

        let started = Instant::now();
        let fit = |source| Error::Fit { cell_size, source };
        let dag = fitted_structure(config.kind, grid.cell_count(), &edges).map_err(|e| match e {
            Error::Network(source) => fit(source),
            other => other,
        })?;
        let net = fit_mle(&dag, &data).map_err(fit)?;
        let fit_seconds = started.elapsed().as_secs_f64();
        log::info!(
            "cell size {cell_size}: {} observations, fit in {fit_seconds:.3}s",
            table.len()
        );

        reports.push(GranularityReport {
            cell_size,
            cells: grid.cell_count(),
            observations: table.len(),
            featurize_seconds,
            fit_seconds,
        });
        granularities.push(Granularity {
            grid,
            discretizer,
            net,
        });
    }

    let bundle = ModelBundle {
        format_version: BUNDLE_FORMAT_VERSION,
        kind: config.kind,
        box_mode: config.box_mode,
        fusion: config.fusion,
        smoothing_sigma: config.smoothing_sigma,
        confidence: thresholds,
        granularities,
        config: config.clone(),
    };
    let report = TrainReport {
        detections: tracks.len(),
        frames_kept: tracks.by_frame().len(),
        granularities: reports,
    };
    Ok((bundle, report))
}

/// Why an object got probability zero without a regular query.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Reason {
    #[serde(rename = "unseen-class")]
    UnseenClass,
    #[serde(rename = "impossible-evidence")]
    ImpossibleEvidence,
}

/// Result of the class query in one cell.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellScore {
    pub evidence: CellEvidence,
    /// `P(C = class | evidence)`, 0 when the evidence is impossible.
    pub probability: f64,
    pub impossible: bool,
}

/// Scores of one object at one cell size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GranularityScore {
    pub cell_size: u32,
    pub cells: Vec<CellScore>,
    /// Mean over `cells`.
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScoredObject {
    pub frame: u32,
    pub track_id: u64,
    pub class_id: u16,
    pub bbox: BBox,
    pub per_granularity: Vec<f64>,
    pub score: f64,
    pub reason: Option<Reason>,
}

impl ModelBundle {
    pub fn validate(&self) -> Result<()> {
        if self.format_version != BUNDLE_FORMAT_VERSION {
            return Err(Error::Bundle(format!(
                "format version {} is not supported (expected {BUNDLE_FORMAT_VERSION})",
                self.format_version
            )));
        }
        let first = self
            .granularities
            .first()
            .ok_or_else(|| Error::Bundle("no granularities".into()))?;
        for g in &self.granularities {
            if g.grid.resolution != first.grid.resolution {
                return Err(Error::Bundle("granularities disagree on resolution".into()));
            }
            let nodes = NodeMap::of(&g.net)?;
            if nodes.v.is_some() != self.kind.is_temporal() {
                return Err(Error::Bundle("network does not match the model kind".into()));
            }
            if g.net.dag().cardinality(nodes.g) != g.grid.cell_count() as usize {
                return Err(Error::Bundle("grid and network disagree on cell count".into()));
            }
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        serde_json::to_writer(&mut out, self)?;
        out.write_all(b"\n")
            .and_then(|_| out.flush())
            .map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<ModelBundle> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let bundle: ModelBundle = serde_json::from_reader(BufReader::new(file))
            .map_err(|e| Error::Bundle(format!("{}: {e}", path.display())))?;
        bundle.validate()?;
        Ok(bundle)
    }

    /// Index of a granularity by cell size.
    pub fn granularity(&self, cell_size: u32) -> Option<usize> {
        self.granularities.iter().position(|g| g.cell_size() == cell_size)
    }

    /// Prepares the per-network lookups needed for scoring.
    pub fn scorer(&self) -> Result<Scorer<'_>> {
        let nodes = self
            .granularities
            .iter()
            .map(|g| NodeMap::of(&g.net))
            .collect::<Result<_>>()?;
        Ok(Scorer {
            bundle: self,
            nodes,
        })
    }
}

/// A bundle with resolved network variable indices.
pub struct Scorer<'a> {
    bundle: &'a ModelBundle,
    nodes: Vec<NodeMap>,
}

impl Scorer<'_> {
    pub fn bundle(&self) -> &ModelBundle {
        self.bundle
    }

    pub fn nodes(&self, granularity: usize) -> &NodeMap {
        &self.nodes[granularity]
    }

    /// Evidence in every covered cell at one granularity; `None` for an
    /// unseen class.
    pub fn evidence(
        &self,
        granularity: usize,
        det: &TrackedDetection,
        prev: Option<&TrackedDetection>,
    ) -> Option<Vec<CellEvidence>> {
        let g = &self.bundle.granularities[granularity];
        let temporal = self.bundle.kind.is_temporal();
        let f = object_features(det, prev, &g.discretizer)?;
        Some(
            cell_intersections(det, &g.grid, self.bundle.box_mode)
                .into_iter()
                .map(|(cell, intersection)| CellEvidence {
                    cell,
                    intersection,
                    size: f.size,
                    aspect: f.aspect,
                    velocity: temporal.then_some(f.velocity),
                    direction: temporal.then_some(f.direction),
                })
                .collect(),
        )
    }

    pub fn cell_score(&self, granularity: usize, e: &CellEvidence, class_id: u16) -> Result<CellScore> {
        let net = &self.bundle.granularities[granularity].net;
        let posterior = class_cpt_query(net, &self.nodes[granularity], e)?;
        Ok(CellScore {
            evidence: *e,
            probability: if posterior.impossible {
                0.0
            } else {
                posterior.probs[class_id as usize - 1]
            },
            impossible: posterior.impossible,
        })
    }

    /// Per-cell breakdown at every granularity; `None` for an unseen class.
    pub fn score_detailed(
        &self,
        det: &TrackedDetection,
        prev: Option<&TrackedDetection>,
    ) -> Result<Option<Vec<GranularityScore>>> {
        let mut out = Vec::with_capacity(self.nodes.len());
        for (k, g) in self.bundle.granularities.iter().enumerate() {
            let Some(evidence) = self.evidence(k, det, prev) else {
                return Ok(None);
            };
            let cells = evidence
                .iter()
                .map(|e| self.cell_score(k, e, det.class_id))
                .collect::<Result<Vec<_>>>()?;
            let probs: Vec<f64> = cells.iter().map(|c| c.probability).collect();
            out.push(GranularityScore {
                cell_size: g.cell_size(),
                score: mean(&probs),
                cells,
            });
        }
        Ok(Some(out))
    }

    pub fn score_object(
        &self,
        det: &TrackedDetection,
        prev: Option<&TrackedDetection>,
    ) -> Result<ScoredObject> {
        let n = self.bundle.granularities.len();
        let (per_granularity, reason) = match self.score_detailed(det, prev)? {
            None => (vec![0.0; n], Some(Reason::UnseenClass)),
            Some(scores) => {
                let impossible = scores.iter().flat_map(|g| &g.cells).any(|c| c.impossible);
                (
                    scores.iter().map(|g| g.score).collect(),
                    impossible.then_some(Reason::ImpossibleEvidence),
                )
            }
        };
        Ok(ScoredObject {
            frame: det.frame,
            track_id: det.track_id,
            class_id: det.class_id,
            bbox: det.bbox,
            score: self.bundle.fusion.fuse(&per_granularity),
            per_granularity,
            reason,
        })
    }

    /// Scores every detection (predecessors taken from `tracks`) and reduces
    /// them to frame scores over frames `1..=frame_count`.
    pub fn score_frames(&self, tracks: &TrackSet) -> Result<(Vec<ScoredObject>, FrameScores)> {
        let dets = tracks.detections();
        let prev = tracks.predecessors();
        let objects = (0..dets.len())
            .into_par_iter()
            .map(|k| self.score_object(&dets[k], prev[k].map(|p| &dets[p])))
            .collect::<Result<Vec<_>>>()?;

        let mut raw = vec![1.0f64; tracks.frame_count() as usize];
        for o in &objects {
            let slot = &mut raw[o.frame as usize - 1];
            *slot = slot.min(o.score);
        }
        let smoothed = gaussian_smooth(&raw, self.bundle.smoothing_sigma);
        let frames = raw
            .iter()
            .zip(&smoothed)
            .enumerate()
            .map(|(i, (&raw, &smoothed))| FrameScore {
                frame: i as u32 + 1,
                raw,
                smoothed,
            })
            .collect();
        Ok((objects, FrameScores { frames }))
    }
}

/// Convenience wrapper around [`Scorer::score_object`].
pub fn score_object(
    bundle: &ModelBundle,
    det: &TrackedDetection,
    prev: Option<&TrackedDetection>,
) -> Result<ScoredObject> {
    bundle.scorer()?.score_object(det, prev)
}

/// Convenience wrapper around [`Scorer::score_frames`].
pub fn score_frames(bundle: &ModelBundle, tracks: &TrackSet) -> Result<(Vec<ScoredObject>, FrameScores)> {
    bundle.scorer()?.score_frames(tracks)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameScore {
    pub frame: u32,
    pub raw: f64,
    pub smoothed: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FrameScores {
    pub frames: Vec<FrameScore>,
}

/// Gaussian kernel over `±ceil(3σ)` frames with edge replication. Each output
/// is kept inside the range of the values it was computed from, so constant
/// runs come out exactly constant.
pub fn gaussian_smooth(values: &[f64], sigma: f64) -> Vec<f64> {
    if sigma <= 0.0 || values.is_empty() {
        return values.to_vec();
    }
    let radius = (3.0 * sigma).ceil() as i64;
    let weights: Vec<f64> = (-radius..=radius)
        .map(|k| (-(k * k) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = weights.iter().sum();
    let last = values.len() as i64 - 1;
    (0..values.len() as i64)
        .map(|i| {
            let mut acc = 0.0;
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for (w, k) in weights.iter().zip(-radius..=radius) {
                let v = values[(i + k).clamp(0, last) as usize];
                acc += w * v;
                lo = lo.min(v);
                hi = hi.max(v);
            }
            (acc / total).clamp(lo, hi)
        })
        .collect()
}

/// One line of `scores.jsonl`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ScoreLine {
    Config(serde_json::Value),
    Object(ObjectLine),
    Frame(FrameScore),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectLine {
    pub frame: u32,
    pub id: u64,
    pub class: u16,
    #[serde(rename = "box")]
    pub bbox: BBox,
    pub score: f64,
    pub per_granularity: Vec<f64>,
    pub reason: Option<Reason>,
}

impl From<&ScoredObject> for ObjectLine {
    fn from(o: &ScoredObject) -> Self {
        ObjectLine {
            frame: o.frame,
            id: o.track_id,
            class: o.class_id,
            bbox: o.bbox,
            score: o.score,
            per_granularity: o.per_granularity.clone(),
            reason: o.reason,
        }
    }
}

impl From<ObjectLine> for ScoredObject {
    fn from(o: ObjectLine) -> Self {
        ScoredObject {
            frame: o.frame,
            track_id: o.id,
            class_id: o.class,
            bbox: o.bbox,
            per_granularity: o.per_granularity,
            score: o.score,
            reason: o.reason,
        }
    }
}

/// Object and frame scores as read back from `scores.jsonl`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScoreFile {
    pub config: Option<serde_json::Value>,
    pub objects: Vec<ScoredObject>,
    pub frames: FrameScores,
}

/// Writes an optional config header, all objects, then all frames.
pub fn write_scores(
    config: Option<&serde_json::Value>,
    objects: &[ScoredObject],
    frames: &FrameScores,
    mut out: impl Write,
) -> Result<()> {
    let io = |e| Error::io("<scores>", e);
    let line = |l: &ScoreLine, out: &mut dyn Write| -> Result<()> {
        serde_json::to_writer(&mut *out, l)?;
        out.write_all(b"\n").map_err(io)
    };
    if let Some(c) = config {
        line(&ScoreLine::Config(c.clone()), &mut out)?;
    }
    for o in objects {
        line(&ScoreLine::Object(o.into()), &mut out)?;
    }
    for f in &frames.frames {
        line(&ScoreLine::Frame(*f), &mut out)?;
    }
    out.flush().map_err(io)
}

pub fn read_scores(reader: impl BufRead) -> Result<ScoreFile> {
    let mut file = ScoreFile::default();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: ScoreLine = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        match parsed {
            ScoreLine::Config(c) => file.config = Some(c),
            ScoreLine::Object(o) => file.objects.push(o.into()),
            ScoreLine::Frame(f) => file.frames.frames.push(f),
        }
    }
    Ok(file)
}
