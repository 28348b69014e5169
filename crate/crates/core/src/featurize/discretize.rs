use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::geometry::BBox;
use crate::ingest::TrackSet;
use crate::stats::mean_std;
use crate::vocab::{Aspect, BoxSize, Direction, Velocity};

/// Mean and population standard deviation of one class-wise attribute.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub std: f64,
}

impl Moments {
    pub fn of(values: &[f64]) -> Option<Moments> {
        mean_std(values).map(|(mean, std)| Moments { mean, std })
    }

    /// Bin boundary `k` standard deviations from the mean.
    fn cut(&self, k: f64) -> f64 {
        self.mean + k * self.std
    }
}

/// How a box's "size" is measured before binning.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SizeMeasure {
    /// Area in px².
    #[default]
    Area,
    Height,
    Diagonal,
}

impl SizeMeasure {
    pub fn measure(self, b: &BBox) -> f64 {
        match self {
            SizeMeasure::Area => b.area(),
            SizeMeasure::Height => b.height(),
            SizeMeasure::Diagonal => b.width().hypot(b.height()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DiscretizerParams {
    /// Relative tolerance around aspect ratio 1 that still counts as square.
    pub square_tolerance: f64,
    /// Speeds at or below this many px/frame are idle.
    pub idle_speed: f64,
    pub size_measure: SizeMeasure,
}

impl Default for DiscretizerParams {
    fn default() -> Self {
        DiscretizerParams {
            square_tolerance: 0.1,
            idle_speed: 0.5,
            size_measure: SizeMeasure::Area,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassStats {
    pub size: Moments,
    /// Over non-idle speeds only; zero when the class never moved.
    pub speed: Moments,
}

/// Class-wise statistics that turn raw box measurements into categories.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscretizationModel {
    pub params: DiscretizerParams,
    pub classes: BTreeMap<u16, ClassStats>,
}

/// Displacement of a box center between two sightings of a track.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Motion {
    /// px/frame.
    pub speed: f64,
    /// Degrees counter-clockwise from east with north pointing up the image,
    /// in `(-180, 180]`. `None` for zero displacement.
    pub angle: Option<f64>,
}

pub fn motion(prev: (f64, f64), cur: (f64, f64), frame_gap: u32) -> Motion {
    let dx = cur.0 - prev.0;
    let dy = cur.1 - prev.1;
    let gap = frame_gap.max(1) as f64;
    Motion {
        speed: dx.hypot(dy) / gap,
        angle: (dx != 0.0 || dy != 0.0).then(|| (-dy).atan2(dx).to_degrees()),
    }
}

/// Speed of every detection that has a predecessor in its track.
fn track_speeds(tracks: &TrackSet) -> Vec<Option<f64>> {
    let dets = tracks.detections();
    tracks
        .predecessors()
        .iter()
        .zip(dets)
        .map(|(prev, d)| {
            prev.map(|p| {
                let p = &dets[p];
                motion(p.bbox.center(), d.bbox.center(), d.frame - p.frame).speed
            })
        })
        .collect()
}

pub fn fit_discretizer(train: &TrackSet, params: DiscretizerParams) -> DiscretizationModel {
    let mut sizes: BTreeMap<u16, Vec<f64>> = BTreeMap::new();
    let mut speeds: BTreeMap<u16, Vec<f64>> = BTreeMap::new();
    for (d, speed) in train.detections().iter().zip(track_speeds(train)) {
        sizes
            .entry(d.class_id)
            .or_default()
            .push(params.size_measure.measure(&d.bbox));
        let moving = speeds.entry(d.class_id).or_default();
        if let Some(s) = speed.filter(|&s| s > params.idle_speed) {
            moving.push(s);
        }
    }
    let classes = sizes
        .into_iter()
        .map(|(class, values)| {
            let size = Moments::of(&values).expect("class has at least one box");
            let speed = Moments::of(&speeds[&class]).unwrap_or(Moments {
                mean: 0.0,
                std: 0.0,
            });
            (class, ClassStats { size, speed })
        })
        .collect();
    DiscretizationModel { params, classes }
}

pub fn size_bin(value: f64, m: &Moments) -> BoxSize {
    if value < m.cut(-2.0) {
        BoxSize::XSmall
    } else if value < m.cut(-1.0) {
        BoxSize::Small
    } else if value <= m.cut(1.0) {
        BoxSize::Medium
    } else if value <= m.cut(2.0) {
        BoxSize::Large
    } else {
        BoxSize::XLarge
    }
}

pub fn velocity_bin(speed: f64, m: &Moments, idle_speed: f64) -> Velocity {
    if speed <= idle_speed {
        Velocity::Idle
    } else if speed < m.cut(-1.0) {
        Velocity::Slow
    } else if speed <= m.cut(1.0) {
        Velocity::Normal
    } else if speed <= m.cut(2.0) {
        Velocity::Fast
    } else if speed <= m.cut(3.0) {
        Velocity::VeryFast
    } else if speed <= m.cut(4.0) {
        Velocity::SuperFast
    } else {
        Velocity::LightningFast
    }
}

pub fn aspect_category(b: &BBox, square_tolerance: f64) -> Aspect {
    let r = b.width() / b.height();
    if r > 1.0 + square_tolerance {
        Aspect::Landscape
    } else if r >= 1.0 / (1.0 + square_tolerance) {
        Aspect::Square
    } else {
        Aspect::Portrait
    }
}

/// 45° sectors centered on the compass points; `None` maps to "none".
pub fn direction_category(angle: Option<f64>) -> Direction {
    const SECTORS: [Direction; 8] = [
        Direction::E,
        Direction::NE,
        Direction::N,
        Direction::NW,
        Direction::W,
        Direction::SW,
        Direction::S,
        Direction::SE,
    ];
    match angle {
        Some(a) => SECTORS[((a / 45.0).round() as i64).rem_euclid(8) as usize],
        None => Direction::Stationary,
    }
}

impl DiscretizationModel {
    pub fn knows_class(&self, class_id: u16) -> bool {
        self.classes.contains_key(&class_id)
    }

    /// `None` for classes without training statistics.
    pub fn size_category(&self, b: &BBox, class_id: u16) -> Option<BoxSize> {
        let stats = self.classes.get(&class_id)?;
        Some(size_bin(self.params.size_measure.measure(b), &stats.size))
    }

    pub fn aspect_category(&self, b: &BBox) -> Aspect {
        aspect_category(b, self.params.square_tolerance)
    }

    pub fn velocity_category(&self, speed: f64, class_id: u16) -> Option<Velocity> {
        let stats = self.classes.get(&class_id)?;
        Some(velocity_bin(speed, &stats.speed, self.params.idle_speed))
    }

    /// Velocity and direction of a detection, given the motion since the
    /// track's previous detection. No predecessor means idle and "none".
    pub fn motion_categories(
        &self,
        m: Option<Motion>,
        class_id: u16,
    ) -> Option<(Velocity, Direction)> {
        let v = self.velocity_category(m.map_or(0.0, |m| m.speed), class_id)?;
        let d = match (v, m) {
            (Velocity::Idle, _) | (_, None) => Direction::Stationary,
            (_, Some(m)) => direction_category(m.angle),
        };
        Some((v, d))
    }
}
