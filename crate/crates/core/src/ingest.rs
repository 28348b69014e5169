//! Tracker output and ground truth: parsing, validation, confidence
//! filtering and frame slicing.
//!
//! Two track formats are read:
//!
//! - `jsonl`: a header line `{"width":W,"height":H,"frames":N}` followed by one
//!   detection per line, `{"frame":1,"id":7,"class":1,"box":[x1,y1,x2,y2],"conf":0.91}`.
//! - `mot`: MOTChallenge-style CSV rows `frame,id,left,top,width,height,conf,class[,...]`
//!   preceded by a comment header `# width=W height=H frames=N`.
//!
//! Frames are 1-based. Boxes poking out of the frame are clamped to it.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::BBox;
use crate::stats::mean_std;
use crate::vocab::{NUM_CLASSES, PERSON_CLASS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Resolution {
    pub width: u32,
    pub height: u32,
}

impl Resolution {
    pub fn new(width: u32, height: u32) -> Self {
        Resolution { width, height }
    }
}

/// One tracker output row.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrackedDetection {
    pub frame: u32,
    pub track_id: u64,
    pub class_id: u16,
    pub bbox: BBox,
    pub confidence: f64,
}

impl TrackedDetection {
    pub fn new(frame: u32, track_id: u64, class_id: u16, bbox: BBox, confidence: f64) -> Self {
        TrackedDetection {
            frame,
            track_id,
            class_id,
            bbox,
            confidence,
        }
    }
}

/// Detections of one video, sorted by `(frame, track_id)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrackSet {
    resolution: Resolution,
    frame_count: u32,
    detections: Vec<TrackedDetection>,
}

/// Checks a single detection against the frame; returns the clamped box.
fn validate_detection(
    det: &TrackedDetection,
    resolution: Resolution,
    frame_count: u32,
) -> std::result::Result<BBox, String> {
    if det.frame == 0 || det.frame > frame_count {
        return Err(format!(
            "frame {} outside 1..={frame_count}",
            det.frame
        ));
    }
    if det.class_id == 0 || det.class_id as usize > NUM_CLASSES {
        return Err(format!("class id {} outside 1..={NUM_CLASSES}", det.class_id));
    }
    if !(0.0..=1.0).contains(&det.confidence) {
        return Err(format!("confidence {} outside [0, 1]", det.confidence));
    }
    if !det.bbox.is_valid() {
        return Err(format!(
            "box [{}, {}, {}, {}] needs x1 < x2 and y1 < y2",
            det.bbox.x1, det.bbox.y1, det.bbox.x2, det.bbox.y2
        ));
    }
    let clamped = det
        .bbox
        .clamp_to(resolution.width as f64, resolution.height as f64);
    if !clamped.is_valid() {
        return Err("box lies outside the frame".to_string());
    }
    Ok(clamped)
}

impl TrackSet {
    /// Validates, clamps and sorts the detections.
    pub fn new(
        resolution: Resolution,
        frame_count: u32,
        mut detections: Vec<TrackedDetection>,
    ) -> Result<TrackSet> {
        if resolution.width == 0 || resolution.height == 0 {
            return Err(Error::Config("resolution must be positive".into()));
        }
        for (i, det) in detections.iter_mut().enumerate() {
            det.bbox = validate_detection(det, resolution, frame_count).map_err(|message| {
                Error::Validation {
                    line: i + 1,
                    message,
                }
            })?;
        }
        Self::from_validated(resolution, frame_count, detections)
    }

    fn from_validated(
        resolution: Resolution,
        frame_count: u32,
        mut detections: Vec<TrackedDetection>,
    ) -> Result<TrackSet> {
        detections.sort_by_key(|d| (d.frame, d.track_id));
        if let Some(w) = detections
            .windows(2)
            .find(|w| (w[0].frame, w[0].track_id) == (w[1].frame, w[1].track_id))
        {
            return Err(Error::DuplicateTrack {
                frame: w[0].frame,
                track_id: w[0].track_id,
            });
        }
        Ok(TrackSet {
            resolution,
            frame_count,
            detections,
        })
    }

    pub fn resolution(&self) -> Resolution {
        self.resolution
    }

    pub fn frame_count(&self) -> u32 {
        self.frame_count
    }

    pub fn detections(&self) -> &[TrackedDetection] {
        &self.detections
    }

    pub fn len(&self) -> usize {
        self.detections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.detections.is_empty()
    }

    /// Keeps the detections for which `keep` holds.
    pub fn retain(&self, mut keep: impl FnMut(&TrackedDetection) -> bool) -> TrackSet {
        TrackSet {
            resolution: self.resolution,
            frame_count: self.frame_count,
            detections: self.detections.iter().copied().filter(|d| keep(d)).collect(),
        }
    }

    /// Detections grouped by frame, in frame order. Frames without
    /// detections are absent.
    pub fn by_frame(&self) -> Vec<(u32, &[TrackedDetection])> {
        self.detections
            .chunk_by(|a, b| a.frame == b.frame)
            .map(|chunk| (chunk[0].frame, chunk))
            .collect()
    }

    /// For each detection, the index of the same track's latest detection in
    /// an earlier frame.
    pub fn predecessors(&self) -> Vec<Option<usize>> {
        let mut last: BTreeMap<u64, usize> = BTreeMap::new();
        self.detections
            .iter()
            .enumerate()
            .map(|(i, d)| last.insert(d.track_id, i))
            .collect()
    }

    pub fn find(&self, frame: u32, track_id: u64) -> Option<usize> {
        self.detections
            .binary_search_by_key(&(frame, track_id), |d| (d.frame, d.track_id))
            .ok()
    }

    /// Appends another video of the same resolution after this one. Frames
    /// and track ids of `other` are shifted past ours so tracks stay distinct.
    pub fn concat(&self, other: &TrackSet) -> Result<TrackSet> {
        if self.resolution != other.resolution {
            return Err(Error::Config(
                "cannot concatenate track sets of different resolutions".into(),
            ));
        }
        let id_offset = self
            .detections
            .iter()
            .map(|d| d.track_id + 1)
            .max()
            .unwrap_or(0);
        let mut detections = self.detections.clone();
        detections.extend(other.detections.iter().map(|d| TrackedDetection {
            frame: d.frame + self.frame_count,
            track_id: d.track_id + id_offset,
            ..*d
        }));
        Self::from_validated(
            self.resolution,
            self.frame_count + other.frame_count,
            detections,
        )
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum TrackFormat {
    #[default]
    Jsonl,
    Mot,
}

impl FromStr for TrackFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jsonl" => Ok(TrackFormat::Jsonl),
            "mot" | "mot-csv" => Ok(TrackFormat::Mot),
            other => Err(Error::Config(format!("unknown track format `{other}`"))),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct JsonHeader {
    width: u32,
    height: u32,
    frames: u32,
}

#[derive(Serialize, Deserialize)]
struct JsonRow {
    frame: u32,
    id: u64,
    class: i64,
    #[serde(rename = "box")]
    bbox: [f64; 4],
    conf: f64,
}

fn parse_err(line: usize, message: impl ToString) -> Error {
    Error::Parse {
        line,
        message: message.to_string(),
    }
}

fn class_id(line: usize, raw: i64) -> Result<u16> {
    if (1..=NUM_CLASSES as i64).contains(&raw) {
        Ok(raw as u16)
    } else {
        Err(Error::Validation {
            line,
            message: format!("unknown class id {raw}, expected 1..={NUM_CLASSES}"),
        })
    }
}

fn parse_mot_header(line: usize, text: &str) -> Result<JsonHeader> {
    let mut fields = BTreeMap::new();
    for part in text.trim_start_matches('#').split_whitespace() {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| parse_err(line, format!("malformed header field `{part}`")))?;
        let v: u32 = v
            .parse()
            .map_err(|_| parse_err(line, format!("header `{k}` is not an integer")))?;
        fields.insert(k.to_string(), v);
    }
    let get = |k: &str| {
        fields
            .get(k)
            .copied()
            .ok_or_else(|| parse_err(line, format!("header is missing `{k}`")))
    };
    Ok(JsonHeader {
        width: get("width")?,
        height: get("height")?,
        frames: get("frames")?,
    })
}

fn parse_mot_row(line: usize, text: &str) -> Result<TrackedDetection> {
    let cols: Vec<&str> = text.split(',').map(str::trim).collect();
    if cols.len() < 8 {
        return Err(parse_err(
            line,
            format!("expected at least 8 columns, found {}", cols.len()),
        ));
    }
    fn num<T: FromStr>(line: usize, name: &str, s: &str) -> Result<T> {
        s.parse()
            .map_err(|_| parse_err(line, format!("`{name}` is not a number: `{s}`")))
    }
    let frame: u32 = num(line, "frame", cols[0])?;
    let id: u64 = num(line, "id", cols[1])?;
    let left: f64 = num(line, "left", cols[2])?;
    let top: f64 = num(line, "top", cols[3])?;
    let w: f64 = num(line, "width", cols[4])?;
    let h: f64 = num(line, "height", cols[5])?;
    let conf: f64 = num(line, "conf", cols[6])?;
    let class: i64 = num(line, "class", cols[7])?;
    Ok(TrackedDetection::new(
        frame,
        id,
        class_id(line, class)?,
        BBox::from_xywh(left, top, w, h),
        conf,
    ))
}

/// Reads a track set from any buffered reader.
pub fn parse_tracks(reader: impl BufRead, format: TrackFormat) -> Result<TrackSet> {
    let mut header: Option<JsonHeader> = None;
    let mut detections = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| parse_err(lineno, e))?;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        let Some(hdr) = &header else {
            header = Some(match format {
                TrackFormat::Jsonl => serde_json::from_str(text)
                    .map_err(|e| parse_err(lineno, format!("bad header: {e}")))?,
                TrackFormat::Mot if text.starts_with('#') => parse_mot_header(lineno, text)?,
                TrackFormat::Mot => {
                    return Err(parse_err(
                        lineno,
                        "expected `# width=W height=H frames=N` header",
                    ))
                }
            });
            continue;
        };
        let det = match format {
            TrackFormat::Jsonl => {
                let row: JsonRow = serde_json::from_str(text).map_err(|e| parse_err(lineno, e))?;
                let [x1, y1, x2, y2] = row.bbox;
                TrackedDetection::new(
                    row.frame,
                    row.id,
                    class_id(lineno, row.class)?,
                    BBox::new(x1, y1, x2, y2),
                    row.conf,
                )
            }
            TrackFormat::Mot if text.starts_with('#') => continue,
            TrackFormat::Mot => parse_mot_row(lineno, text)?,
        };
        let resolution = Resolution::new(hdr.width, hdr.height);
        let bbox = validate_detection(&det, resolution, hdr.frames).map_err(|message| {
            Error::Validation {
                line: lineno,
                message,
            }
        })?;
        detections.push(TrackedDetection { bbox, ..det });
    }
    let header = header.ok_or_else(|| parse_err(1, "missing header line"))?;
    let resolution = Resolution::new(header.width, header.height);
    if resolution.width == 0 || resolution.height == 0 {
        return Err(parse_err(1, "resolution must be positive"));
    }
    TrackSet::from_validated(resolution, header.frames, detections)
}

pub fn read_tracks(path: impl AsRef<Path>, format: TrackFormat) -> Result<TrackSet> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_tracks(BufReader::new(file), format)
}

/// Writes the JSONL track format.
pub fn write_tracks_jsonl(tracks: &TrackSet, mut out: impl Write) -> Result<()> {
    let header = JsonHeader {
        width: tracks.resolution.width,
        height: tracks.resolution.height,
        frames: tracks.frame_count,
    };
    let io = |e| Error::io("<tracks>", e);
    serde_json::to_writer(&mut out, &header)?;
    out.write_all(b"\n").map_err(io)?;
    for d in &tracks.detections {
        let row = JsonRow {
            frame: d.frame,
            id: d.track_id,
            class: d.class_id as i64,
            bbox: d.bbox.into(),
            conf: d.confidence,
        };
        serde_json::to_writer(&mut out, &row)?;
        out.write_all(b"\n").map_err(io)?;
    }
    out.flush().map_err(io)
}

/// Writes the MOT CSV track format.
pub fn write_tracks_mot(tracks: &TrackSet, mut out: impl Write) -> Result<()> {
    let io = |e| Error::io("<tracks>", e);
    writeln!(
        out,
        "# width={} height={} frames={}",
        tracks.resolution.width, tracks.resolution.height, tracks.frame_count
    )
    .map_err(io)?;
    for d in &tracks.detections {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            d.frame,
            d.track_id,
            d.bbox.x1,
            d.bbox.y1,
            d.bbox.width(),
            d.bbox.height(),
            d.confidence,
            d.class_id
        )
        .map_err(io)?;
    }
    out.flush().map_err(io)
}

pub fn save_tracks(tracks: &TrackSet, path: impl AsRef<Path>, format: TrackFormat) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let out = BufWriter::new(file);
    match format {
        TrackFormat::Jsonl => write_tracks_jsonl(tracks, out),
        TrackFormat::Mot => write_tracks_mot(tracks, out),
    }
}

/// Confidence cut-offs for the `person` class and for every other class.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceThresholds {
    pub person: f64,
    pub other: f64,
}

impl ConfidenceThresholds {
    pub const NONE: ConfidenceThresholds = ConfidenceThresholds {
        person: 0.0,
        other: 0.0,
    };

    pub fn for_class(&self, class_id: u16) -> f64 {
        if class_id == PERSON_CLASS {
            self.person
        } else {
            self.other
        }
    }
}

/// Two standard deviations below the mean confidence, per class group,
/// clamped at zero. An empty group gets threshold zero.
pub fn compute_confidence_thresholds(tracks: &TrackSet) -> ConfidenceThresholds {
    let (person, other): (Vec<_>, Vec<_>) = tracks
        .detections
        .iter()
        .partition(|d| d.class_id == PERSON_CLASS);
    let threshold = |group: &[&TrackedDetection], name: &str| {
        let confs: Vec<f64> = group.iter().map(|d| d.confidence).collect();
        match mean_std(&confs) {
            Some((mu, sigma)) => (mu - 2.0 * sigma).max(0.0),
            None => {
                log::info!("no {name} detections; confidence threshold set to 0");
                0.0
            }
        }
    };
    ConfidenceThresholds {
        person: threshold(&person, "person"),
        other: threshold(&other, "non-person"),
    }
}

/// Keeps detections whose confidence reaches their group's threshold.
pub fn filter_detections(tracks: &TrackSet, thresholds: &ConfidenceThresholds) -> TrackSet {
    tracks.retain(|d| d.confidence >= thresholds.for_class(d.class_id))
}

/// Keeps frames `f` with `(f - 1) % factor == 0`. Frame numbers are kept as
/// they are so motion can be normalized by the true frame gap.
pub fn slice_frames(tracks: &TrackSet, factor: u32) -> TrackSet {
    let factor = factor.max(1);
    tracks.retain(|d| (d.frame - 1) % factor == 0)
}

/// One anomalous region of the ground truth.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GtRegion {
    pub frame: u32,
    pub gt_id: u64,
    #[serde(rename = "box")]
    pub bbox: BBox,
}

/// Anomalous regions, sorted by `(frame, gt_id)`. A frame is anomalous iff it
/// has at least one region; regions sharing a `gt_id` form one anomaly track.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GroundTruth {
    regions: Vec<GtRegion>,
}

impl GroundTruth {
    pub fn new(mut regions: Vec<GtRegion>) -> Result<GroundTruth> {
        for (i, r) in regions.iter().enumerate() {
            if r.frame == 0 || !r.bbox.is_valid() {
                return Err(Error::Validation {
                    line: i + 1,
                    message: format!("invalid ground-truth region in frame {}", r.frame),
                });
            }
        }
        regions.sort_by_key(|r| (r.frame, r.gt_id));
        Ok(GroundTruth { regions })
    }

    pub fn regions(&self) -> &[GtRegion] {
        &self.regions
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    pub fn regions_in(&self, frame: u32) -> &[GtRegion] {
        let start = self.regions.partition_point(|r| r.frame < frame);
        let end = self.regions.partition_point(|r| r.frame <= frame);
        &self.regions[start..end]
    }

    pub fn is_anomalous(&self, frame: u32) -> bool {
        !self.regions_in(frame).is_empty()
    }

    /// Region indices per anomaly track.
    pub fn tracks(&self) -> BTreeMap<u64, Vec<usize>> {
        let mut tracks: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
        for (i, r) in self.regions.iter().enumerate() {
            tracks.entry(r.gt_id).or_default().push(i);
        }
        tracks
    }
}

/// Tight bounding box of the set pixels of a row-major mask, for ground truth
/// that ships as pixel masks.
pub fn mask_to_box(mask: &[bool], width: usize) -> Option<BBox> {
    let mut bounds: Option<(usize, usize, usize, usize)> = None;
    for (i, _) in mask.iter().enumerate().filter(|(_, &m)| m) {
        let (x, y) = (i % width, i / width);
        bounds = Some(match bounds {
            None => (x, y, x, y),
            Some((x1, y1, x2, y2)) => (x1.min(x), y1.min(y), x2.max(x), y2.max(y)),
        });
    }
    bounds.map(|(x1, y1, x2, y2)| {
        BBox::new(x1 as f64, y1 as f64, (x2 + 1) as f64, (y2 + 1) as f64)
    })
}

pub fn parse_ground_truth(reader: impl BufRead) -> Result<GroundTruth> {
    let mut regions = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| parse_err(i + 1, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let region: GtRegion =
            serde_json::from_str(line.trim()).map_err(|e| parse_err(i + 1, e))?;
        if region.frame == 0 || !region.bbox.is_valid() {
            return Err(Error::Validation {
                line: i + 1,
                message: "ground-truth region needs frame >= 1 and x1 < x2, y1 < y2".into(),
            });
        }
        regions.push(region);
    }
    GroundTruth::new(regions)
}

pub fn read_ground_truth(path: impl AsRef<Path>) -> Result<GroundTruth> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_ground_truth(BufReader::new(file))
}

pub fn write_ground_truth(gt: &GroundTruth, mut out: impl Write) -> Result<()> {
    for r in &gt.regions {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n").map_err(|e| Error::io("<gt>", e))?;
    }
    out.flush().map_err(|e| Error::io("<gt>", e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = r#"{"width":640,"height":360,"frames":20}"#;

    fn parse(body: &str) -> Result<TrackSet> {
        parse_tracks(format!("{HEADER}\n{body}").as_bytes(), TrackFormat::Jsonl)
    }

    fn det(frame: u32, id: u64, class: u16, conf: f64) -> TrackedDetection {
        TrackedDetection::new(frame, id, class, BBox::new(10.0, 20.0, 30.0, 80.0), conf)
    }

    #[test]
    fn jsonl_row_maps_fields() {
        let t = parse(r#"{"frame":1,"id":7,"class":1,"box":[10,20,30,80],"conf":0.91}"#).unwrap();
        assert_eq!(
            t.detections(),
            &[TrackedDetection::new(1, 7, 1, BBox::new(10.0, 20.0, 30.0, 80.0), 0.91)]
        );
    }

    #[test]
    fn empty_stream_with_header() {
        let t = parse_tracks(
            r#"{"width":640,"height":360,"frames":0}"#.as_bytes(),
            TrackFormat::Jsonl,
        )
        .unwrap();
        assert!(t.is_empty());
        assert_eq!(t.resolution(), Resolution::new(640, 360));
    }

    #[test]
    fn duplicate_track_names_frame() {
        let body = "{\"frame\":3,\"id\":5,\"class\":1,\"box\":[0,0,5,5],\"conf\":0.5}\n\
                    {\"frame\":3,\"id\":5,\"class\":1,\"box\":[1,1,6,6],\"conf\":0.5}";
        let err = parse(body).unwrap_err();
        assert!(matches!(err, Error::DuplicateTrack { frame: 3, track_id: 5 }));
        assert!(err.to_string().contains("frame 3"));
    }

    #[test]
    fn malformed_rows_report_line() {
        let err = parse("{\"frame\":1,\"id\":1,\"class\":1,\"box\":[0,0,5,5],\"conf\":0.5}\nnot json")
            .unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));

        let err = parse(r#"{"frame":1,"id":1,"class":1,"box":[5,0,5,5],"conf":0.5}"#).unwrap_err();
        assert!(matches!(err, Error::Validation { line: 2, .. }));

        let err = parse(r#"{"frame":1,"id":1,"class":81,"box":[0,0,5,5],"conf":0.5}"#).unwrap_err();
        assert!(matches!(err, Error::Validation { line: 2, .. }));
        assert!(err.to_string().contains("class id 81"));

        let err = parse(r#"{"frame":21,"id":1,"class":1,"box":[0,0,5,5],"conf":0.5}"#).unwrap_err();
        assert!(matches!(err, Error::Validation { .. }));
    }

    #[test]
    fn border_boxes_are_clamped() {
        let t = parse(r#"{"frame":1,"id":1,"class":3,"box":[-10,300,50,380],"conf":0.5}"#).unwrap();
        assert_eq!(t.detections()[0].bbox, BBox::new(0.0, 300.0, 50.0, 360.0));
        assert!(parse(r#"{"frame":1,"id":1,"class":3,"box":[700,0,720,10],"conf":0.5}"#).is_err());
    }

    #[test]
    fn mot_format() {
        let text = "# width=640 height=360 frames=5\n1,7,10,20,20,60,0.91,1\n2,7,11,20,20,60,0.9,1,-1,-1\n";
        let t = parse_tracks(text.as_bytes(), TrackFormat::Mot).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.detections()[0].bbox, BBox::new(10.0, 20.0, 30.0, 80.0));
        let mut out = Vec::new();
        write_tracks_mot(&t, &mut out).unwrap();
        assert_eq!(parse_tracks(out.as_slice(), TrackFormat::Mot).unwrap(), t);

        let err = parse_tracks("1,7,10,20,20,60,0.9,1".as_bytes(), TrackFormat::Mot).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn thresholds() {
        let res = Resolution::new(640, 360);
        let same = TrackSet::new(res, 5, (1..=3).map(|f| det(f, 1, 1, 0.9)).collect()).unwrap();
        let c = compute_confidence_thresholds(&same);
        assert_eq!(c.person, 0.9);
        assert_eq!(c.other, 0.0);

        let spread = TrackSet::new(
            res,
            5,
            vec![det(1, 1, 1, 0.5), det(2, 1, 1, 0.7), det(3, 1, 1, 0.9)],
        )
        .unwrap();
        let c = compute_confidence_thresholds(&spread);
        let expected = 0.7 - 2.0 * (0.08f64 / 3.0).sqrt();
        assert!((c.person - expected).abs() < 1e-12);
        assert!((c.person - 0.3734).abs() < 1e-4);
    }

    #[test]
    fn filtering_rules() {
        let res = Resolution::new(640, 360);
        let t = TrackSet::new(
            res,
            5,
            vec![det(1, 1, 1, 0.37), det(1, 2, 1, 0.5), det(1, 3, 3, 0.2)],
        )
        .unwrap();
        let thresholds = ConfidenceThresholds {
            person: 0.3735,
            other: 0.2,
        };
        let kept = filter_detections(&t, &thresholds);
        let ids: Vec<u64> = kept.detections().iter().map(|d| d.track_id).collect();
        assert_eq!(ids, vec![2, 3]);
        assert_eq!(filter_detections(&t, &ConfidenceThresholds::NONE), t);
    }

    #[test]
    fn slicing() {
        let res = Resolution::new(640, 360);
        let t = TrackSet::new(res, 10, (1..=10).map(|f| det(f, 1, 1, 0.5)).collect()).unwrap();
        assert_eq!(slice_frames(&t, 1), t);
        let frames: Vec<u32> = slice_frames(&t, 5).detections().iter().map(|d| d.frame).collect();
        assert_eq!(frames, vec![1, 6]);
    }

    #[test]
    fn predecessors_follow_tracks() {
        let res = Resolution::new(640, 360);
        let t = TrackSet::new(
            res,
            10,
            vec![det(1, 1, 1, 0.5), det(1, 2, 1, 0.5), det(4, 1, 1, 0.5)],
        )
        .unwrap();
        assert_eq!(t.predecessors(), vec![None, None, Some(0)]);
        assert_eq!(t.find(4, 1), Some(2));
        assert_eq!(t.find(4, 2), None);
    }

    #[test]
    fn concat_shifts_frames_and_ids() {
        let res = Resolution::new(640, 360);
        let a = TrackSet::new(res, 3, vec![det(1, 4, 1, 0.5)]).unwrap();
        let both = a.concat(&a).unwrap();
        assert_eq!(both.frame_count(), 6);
        assert_eq!(both.detections()[1].frame, 4);
        assert_eq!(both.detections()[1].track_id, 9);
    }

    #[test]
    fn ground_truth_lookup() {
        let text = "{\"frame\":2,\"gt_id\":1,\"box\":[0,0,10,10]}\n{\"frame\":2,\"gt_id\":2,\"box\":[5,5,10,10]}\n{\"frame\":4,\"gt_id\":1,\"box\":[0,0,10,10]}\n";
        let gt = parse_ground_truth(text.as_bytes()).unwrap();
        assert_eq!(gt.regions_in(2).len(), 2);
        assert!(!gt.is_anomalous(3));
        assert_eq!(gt.tracks()[&1], vec![0, 2]);
        let mut out = Vec::new();
        write_ground_truth(&gt, &mut out).unwrap();
        assert_eq!(parse_ground_truth(out.as_slice()).unwrap(), gt);
    }

    #[test]
    fn mask_boxes() {
        let mut mask = vec![false; 5 * 4];
        mask[5 + 1] = true;
        mask[2 * 5 + 3] = true;
        assert_eq!(mask_to_box(&mask, 5), Some(BBox::new(1.0, 1.0, 4.0, 3.0)));
        assert_eq!(mask_to_box(&[false; 4], 2), None);
    }
}
