use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::discretize::{motion, DiscretizationModel, Motion};
use super::grid::{intersection_category, BoxMode, GridSpec};
use crate::error::{Error, Result};
use crate::ingest::{TrackSet, TrackedDetection};
use crate::vocab::{Aspect, BoxSize, Category, Direction, Intersection, Velocity};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
pub enum ModelKind {
    #[serde(rename = "spatial")]
    #[value(name = "spatial")]
    Spatial,
    #[default]
    #[serde(rename = "spatiotemporal")]
    #[value(name = "spatiotemporal", alias = "spatio-temporal")]
    SpatioTemporal,
}

impl ModelKind {
    pub fn is_temporal(self) -> bool {
        self == ModelKind::SpatioTemporal
    }
}

/// Cell-independent attributes of one detection.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ObjectFeatures {
    pub size: BoxSize,
    pub aspect: Aspect,
    pub velocity: Velocity,
    pub direction: Direction,
}

/// One training row: a detection seen through one grid cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Observation {
    pub frame: u32,
    pub cell: u32,
    pub class_id: u16,
    pub intersection: Intersection,
    pub size: BoxSize,
    pub aspect: Aspect,
    /// Present only for spatio-temporal tables.
    pub velocity: Option<Velocity>,
    pub direction: Option<Direction>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObservationTable {
    pub kind: ModelKind,
    pub rows: Vec<Observation>,
}

/// Motion since the previous detection of the same track.
pub fn motion_from(prev: Option<&TrackedDetection>, det: &TrackedDetection) -> Option<Motion> {
    prev.map(|p| motion(p.bbox.center(), det.bbox.center(), det.frame - p.frame))
}

/// `None` when the class has no statistics in `d`.
pub fn object_features(
    det: &TrackedDetection,
    prev: Option<&TrackedDetection>,
    d: &DiscretizationModel,
) -> Option<ObjectFeatures> {
    let size = d.size_category(&det.bbox, det.class_id)?;
    let (velocity, direction) = d.motion_categories(motion_from(prev, det), det.class_id)?;
    Some(ObjectFeatures {
        size,
        aspect: d.aspect_category(&det.bbox),
        velocity,
        direction,
    })
}

/// `(cell, intersection)` pairs a box contributes to.
pub fn cell_intersections(
    det: &TrackedDetection,
    grid: &GridSpec,
    mode: BoxMode,
) -> Vec<(u32, Intersection)> {
    grid.cells(&det.bbox, mode)
        .into_iter()
        .filter_map(|g| intersection_category(&det.bbox, &grid.cell_box(g)).map(|i| (g, i)))
        .collect()
}

/// One row per (detection, cell). Temporal attributes use each track's
/// previous detection in `tracks`. Detections of classes unknown to `d` are
/// skipped.
pub fn generate_observations(
    tracks: &TrackSet,
    grid: &GridSpec,
    d: &DiscretizationModel,
    kind: ModelKind,
    mode: BoxMode,
) -> ObservationTable {
    let dets = tracks.detections();
    let prev = tracks.predecessors();
    let rows = (0..dets.len())
        .into_par_iter()
        .flat_map_iter(|k| {
            let det = &dets[k];
            let features = object_features(det, prev[k].map(|p| &dets[p]), d);
            if features.is_none() {
                log::debug!("skipping class {} without statistics", det.class_id);
            }
            features
                .map(|f| {
                    cell_intersections(det, grid, mode)
                        .into_iter()
                        .map(move |(cell, intersection)| Observation {
                            frame: det.frame,
                            cell,
                            class_id: det.class_id,
                            intersection,
                            size: f.size,
                            aspect: f.aspect,
                            velocity: kind.is_temporal().then_some(f.velocity),
                            direction: kind.is_temporal().then_some(f.direction),
                        })
                })
                .into_iter()
                .flatten()
        })
        .collect();
    ObservationTable { kind, rows }
}

impl ObservationTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Columnar CSV, header `F,G,C,I,BS,BAR,V,D`. Temporal columns are empty
    /// for spatial tables.
    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        let io = |e| Error::io("<observations>", e);
        writeln!(out, "F,G,C,I,BS,BAR,V,D").map_err(io)?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.frame,
                r.cell,
                r.class_id,
                r.intersection,
                r.size,
                r.aspect,
                r.velocity.map_or("", |v| v.label()),
                r.direction.map_or("", |v| v.label()),
            )
            .map_err(io)?;
        }
        out.flush().map_err(io)
    }
}
