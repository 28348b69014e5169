//! Frame-level AUC and the region/track based detection criteria.
//!
//! All metrics work on an anomaly signal `a = 1 - p`, where `p` is the
//! normality probability produced by scoring: low probability means high
//! anomaly. Because only the order of the signal matters, every metric is
//! invariant under strictly monotone transforms of the scores.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::ingest::GroundTruth;
use crate::pipeline::{FrameScores, ScoredObject};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricParams {
    /// Minimum IoU for a detection to hit a ground-truth region.
    pub iou: f64,
    /// Share of a ground-truth track's regions that must be hit.
    pub track_coverage: f64,
    /// Right end of the false-positives-per-frame axis.
    pub max_fp_rate: f64,
}

impl Default for MetricParams {
    fn default() -> Self {
        MetricParams {
            iou: 0.1,
            track_coverage: 0.1,
            max_fp_rate: 1.0,
        }
    }
}

/// One point of a threshold sweep. `threshold` is on the anomaly signal;
/// `None` stands for the sentinel above every score, where nothing is flagged.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub threshold: Option<f64>,
    pub tpr: f64,
    /// Classical false-positive rate for the frame ROC, false positives per
    /// frame for the detection criteria.
    pub fp_rate: f64,
}

/// Area under a curve traversed left to right, integrated over
/// `[0, x_max]` only. Segments crossing `x_max` are cut by interpolation;
/// the curve is not extended past its last point.
pub fn area_under(points: &[RocPoint], x_max: f64) -> f64 {
    let mut area = 0.0;
    for w in points.windows(2) {
        let (x0, y0, x1, y1) = (w[0].fp_rate, w[0].tpr, w[1].fp_rate, w[1].tpr);
        if x0 >= x_max {
            break;
        }
        if x1 <= x_max {
            area += (x1 - x0) * (y0 + y1) / 2.0;
        } else {
            let y = y0 + (y1 - y0) * (x_max - x0) / (x1 - x0);
            area += (x_max - x0) * (y0 + y) / 2.0;
        }
    }
    area / x_max
}

/// Frame ROC with the anomaly signal `1 - smoothed`; ties share a point.
/// `None` when all frames carry the same label.
pub fn frame_roc(frames: &FrameScores, gt: &GroundTruth) -> Option<Vec<RocPoint>> {
    let mut scored: Vec<(f64, bool)> = frames
        .frames
        .iter()
        .map(|f| (1.0 - f.smoothed, gt.is_anomalous(f.frame)))
        .collect();
    let pos = scored.iter().filter(|s| s.1).count();
    let neg = scored.len() - pos;
    if pos == 0 || neg == 0 {
        return None;
    }
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut points = vec![RocPoint {
        threshold: None,
        tpr: 0.0,
        fp_rate: 0.0,
    }];
    let (mut tp, mut fp) = (0usize, 0usize);
    for group in scored.chunk_by(|a, b| a.0 == b.0) {
        tp += group.iter().filter(|s| s.1).count();
        fp += group.iter().filter(|s| !s.1).count();
        points.push(RocPoint {
            threshold: Some(group[0].0),
            tpr: tp as f64 / pos as f64,
            fp_rate: fp as f64 / neg as f64,
        });
    }
    Some(points)
}

pub fn frame_auc(frames: &FrameScores, gt: &GroundTruth) -> Option<f64> {
    frame_roc(frames, gt).map(|points| area_under(&points, 1.0))
}

/// Shared sweep over object scores. `hits[k]` lists the ground-truth regions
/// detection `k` overlaps enough to detect.
fn detection_sweep(
    objects: &[ScoredObject],
    gt: &GroundTruth,
    num_frames: usize,
    params: &MetricParams,
    mut tpr: impl FnMut(&[bool]) -> f64,
) -> Vec<RocPoint> {
    let regions = gt.regions();
    let hits: Vec<Vec<usize>> = objects
        .iter()
        .map(|o| {
            let start = regions.partition_point(|r| r.frame < o.frame);
            gt.regions_in(o.frame)
                .iter()
                .enumerate()
                .filter(|(_, r)| o.bbox.iou(&r.bbox) >= params.iou)
                .map(|(i, _)| start + i)
                .collect()
        })
        .collect();

    let mut order: Vec<usize> = (0..objects.len()).collect();
    let signal = |k: usize| 1.0 - objects[k].score;
    order.sort_by(|&a, &b| signal(b).total_cmp(&signal(a)).then(a.cmp(&b)));

    let frames = num_frames.max(1) as f64;
    let mut detected = vec![false; regions.len()];
    let mut false_positives = 0usize;
    let mut points = vec![RocPoint {
        threshold: None,
        tpr: tpr(&detected),
        fp_rate: 0.0,
    }];
    for group in order.chunk_by(|&a, &b| signal(a) == signal(b)) {
        for &k in group {
            if hits[k].is_empty() {
                false_positives += 1;
            }
            for &r in &hits[k] {
                detected[r] = true;
            }
        }
        points.push(RocPoint {
            threshold: Some(signal(group[0])),
            tpr: tpr(&detected),
            fp_rate: false_positives as f64 / frames,
        });
    }
    points
}

/// Region-based sweep; `None` without ground-truth regions.
pub fn rbdc_curve(
    objects: &[ScoredObject],
    gt: &GroundTruth,
    num_frames: usize,
    params: &MetricParams,
) -> Option<Vec<RocPoint>> {
    if gt.is_empty() {
        return None;
    }
    let total = gt.regions().len() as f64;
    Some(detection_sweep(objects, gt, num_frames, params, |d| {
        d.iter().filter(|&&x| x).count() as f64 / total
    }))
}

/// Track-based sweep; `None` without ground-truth tracks.
pub fn tbdc_curve(
    objects: &[ScoredObject],
    gt: &GroundTruth,
    num_frames: usize,
    params: &MetricParams,
) -> Option<Vec<RocPoint>> {
    if gt.is_empty() {
        return None;
    }
    let tracks: BTreeMap<u64, Vec<usize>> = gt.tracks();
    let total = tracks.len() as f64;
    let coverage = params.track_coverage;
    Some(detection_sweep(objects, gt, num_frames, params, |d| {
        let found = tracks
            .values()
            .filter(|regions| {
                let hit = regions.iter().filter(|&&r| d[r]).count();
                track_detected(hit, regions.len(), coverage)
            })
            .count();
        found as f64 / total
    }))
}

/// `hit / total >= coverage`, tolerant to the rounding of `coverage`.
pub fn track_detected(hit: usize, total: usize, coverage: f64) -> bool {
    hit > 0 && hit as f64 >= coverage * total as f64 - 1e-9
}

pub fn rbdc(objects: &[ScoredObject], gt: &GroundTruth, num_frames: usize, params: &MetricParams) -> Option<f64> {
    rbdc_curve(objects, gt, num_frames, params).map(|c| area_under(&c, params.max_fp_rate))
}

pub fn tbdc(objects: &[ScoredObject], gt: &GroundTruth, num_frames: usize, params: &MetricParams) -> Option<f64> {
    tbdc_curve(objects, gt, num_frames, params).map(|c| area_under(&c, params.max_fp_rate))
}

/// All four numbers plus the curves behind them. Undefined metrics are
/// `None` and explained in `notes`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub frame_auc: Option<f64>,
    pub rbdc: Option<f64>,
    pub tbdc: Option<f64>,
    pub mean_rt: Option<f64>,
    /// The same four numbers printed with six decimals.
    pub summary: BTreeMap<String, String>,
    pub params: MetricParams,
    pub frame_roc: Vec<RocPoint>,
    pub rbdc_curve: Vec<RocPoint>,
    pub tbdc_curve: Vec<RocPoint>,
    pub notes: Vec<String>,
}

pub fn evaluate(
    objects: &[ScoredObject],
    frames: &FrameScores,
    gt: &GroundTruth,
    params: &MetricParams,
) -> MetricsReport {
    let num_frames = frames.frames.len();
    let mut notes = Vec::new();
    let roc = frame_roc(frames, gt);
    if roc.is_none() {
        notes.push("frame AUC undefined: every frame has the same label".to_string());
    }
    let rb = rbdc_curve(objects, gt, num_frames, params);
    let tb = tbdc_curve(objects, gt, num_frames, params);
    if rb.is_none() {
        notes.push("RBDC and TBDC undefined: ground truth has no regions".to_string());
    }
    let frame_auc = roc.as_ref().map(|c| area_under(c, 1.0));
    let rbdc = rb.as_ref().map(|c| area_under(c, params.max_fp_rate));
    let tbdc = tb.as_ref().map(|c| area_under(c, params.max_fp_rate));
    let mean_rt = rbdc.zip(tbdc).map(|(r, t)| (r + t) / 2.0);
    let summary = [
        ("frame_auc", frame_auc),
        ("rbdc", rbdc),
        ("tbdc", tbdc),
        ("mean_rt", mean_rt),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v.map_or("undefined".into(), |v| format!("{v:.6}"))))
    .collect();
    MetricsReport {
        frame_auc,
        rbdc,
        tbdc,
        mean_rt,
        summary,
        params: *params,
        frame_roc: roc.unwrap_or_default(),
        rbdc_curve: rb.unwrap_or_default(),
        tbdc_curve: tb.unwrap_or_default(),
        notes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BBox;
    use crate::ingest::GtRegion;
    use crate::pipeline::FrameScore;

    fn frames(scores: &[f64]) -> FrameScores {
        FrameScores {
            frames: scores
                .iter()
                .enumerate()
                .map(|(i, &s)| FrameScore {
                    frame: i as u32 + 1,
                    raw: s,
                    smoothed: s,
                })
                .collect(),
        }
    }

    fn gt_frames(anomalous: &[u32]) -> GroundTruth {
        GroundTruth::new(
            anomalous
                .iter()
                .map(|&f| GtRegion {
                    frame: f,
                    gt_id: 1,
                    bbox: BBox::new(0.0, 0.0, 10.0, 10.0),
                })
                .collect(),
        )
        .unwrap()
    }

    fn obj(frame: u32, bbox: BBox, score: f64) -> ScoredObject {
        ScoredObject {
            frame,
            track_id: 0,
            class_id: 1,
            bbox,
            per_granularity: vec![score],
            score,
            reason: None,
        }
    }

    #[test]
    fn frame_auc_cases() {
        let gt = gt_frames(&[3, 4]);
        assert_eq!(frame_auc(&frames(&[0.9, 0.8, 0.2, 0.1]), &gt), Some(1.0));
        assert_eq!(frame_auc(&frames(&[0.5; 4]), &gt), Some(0.5));
        assert_eq!(frame_auc(&frames(&[0.1, 0.2, 0.8, 0.9]), &gt), Some(0.0));
        assert_eq!(frame_auc(&frames(&[0.5; 4]), &gt_frames(&[])), None);
    }

    #[test]
    fn rbdc_hand_scenario() {
        let region = BBox::new(0.0, 0.0, 10.0, 10.0);
        let gt = GroundTruth::new(vec![GtRegion {
            frame: 1,
            gt_id: 1,
            bbox: region,
        }])
        .unwrap();
        let objects = vec![
            obj(1, BBox::new(0.0, 0.0, 10.0, 20.0), 0.1),
            obj(2, BBox::new(50.0, 50.0, 60.0, 60.0), 0.2),
        ];
        assert_eq!(objects[0].bbox.iou(&region), 0.5);
        let p = MetricParams::default();
        assert_eq!(rbdc(&objects, &gt, 2, &p), Some(0.5));
        assert_eq!(tbdc(&objects, &gt, 2, &p), Some(0.5));
        let curve = rbdc_curve(&objects, &gt, 2, &p).unwrap();
        assert_eq!(curve.len(), 3);
        assert_eq!((curve[1].fp_rate, curve[1].tpr), (0.0, 1.0));
        assert_eq!((curve[2].fp_rate, curve[2].tpr), (0.5, 1.0));
    }

    #[test]
    fn detection_extremes() {
        let region = BBox::new(0.0, 0.0, 10.0, 10.0);
        let gt = GroundTruth::new(vec![GtRegion {
            frame: 1,
            gt_id: 1,
            bbox: region,
        }])
        .unwrap();
        let mut objects = vec![obj(1, region, 0.0)];
        objects.extend((1..=4).map(|f| obj(f, BBox::new(100.0, 100.0, 110.0, 110.0), 1.0)));
        let p = MetricParams::default();
        assert_eq!(rbdc(&objects, &gt, 4, &p), Some(1.0));
        assert_eq!(tbdc(&objects, &gt, 4, &p), Some(1.0));

        let misses = vec![obj(1, BBox::new(20.0, 20.0, 30.0, 30.0), 0.0)];
        assert_eq!(rbdc(&misses, &gt, 4, &p), Some(0.0));
        assert_eq!(rbdc(&misses, &GroundTruth::default(), 4, &p), None);
    }

    #[test]
    fn track_coverage_boundary() {
        assert!(track_detected(1, 1, 0.1));
        assert!(track_detected(1, 10, 0.1));
        assert!(!track_detected(1, 11, 0.1));
        assert!(!track_detected(0, 10, 0.0));
    }

    #[test]
    fn area_is_cut_at_x_max() {
        let pt = |x: f64, y: f64| RocPoint {
            threshold: None,
            tpr: y,
            fp_rate: x,
        };
        let curve = [pt(0.0, 0.0), pt(2.0, 1.0)];
        assert_eq!(area_under(&curve, 1.0), 0.25);
        assert_eq!(area_under(&[pt(0.0, 0.0)], 1.0), 0.0);
    }

    #[test]
    fn report_mean() {
        let gt = gt_frames(&[2]);
        let objects = vec![obj(2, BBox::new(0.0, 0.0, 10.0, 10.0), 0.1)];
        let r = evaluate(&objects, &frames(&[0.9, 0.1, 0.9]), &gt, &MetricParams::default());
        assert_eq!(r.mean_rt, Some((r.rbdc.unwrap() + r.tbdc.unwrap()) / 2.0));
        assert_eq!(r.summary["frame_auc"], "1.000000");
        assert!(r.notes.is_empty());
    }
}
