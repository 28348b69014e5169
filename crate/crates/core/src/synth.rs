//! Seeded synthetic street scenes with scripted anomalies.
//!
//! A scene has horizontal lanes. Each lane spawns tracks at its left or
//! right frame edge; a track keeps a fixed class, size, speed and bottom-edge
//! height and moves in a straight line until it would leave the frame.
//! Anomalies are extra objects injected into the test split only.
//!
//! Randomness comes from ChaCha8 seeded with `seed`, one stream per purpose:
//! stream `split << 48 | lane << 32 | ordinal`, where `split` is 0 for train
//! and 1 for test, `ordinal` counts the lane's tracks from 0 and
//! `u32::MAX` is the lane's spawn stream. Uniform draws use rand's standard
//! 53-bit `f64` conversion. Because the outputs are plain text files, other
//! implementations can compare against them without sharing PRNG internals.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::BBox;
use crate::ingest::{
    write_ground_truth, write_tracks_jsonl, GroundTruth, GtRegion, Resolution, TrackSet,
    TrackedDetection,
};
use crate::vocab::{Direction, NUM_CLASSES};

/// How a class looks and moves in a lane.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassProfile {
    pub class_id: u16,
    /// Relative spawn weight within the lane.
    #[serde(default = "one")]
    pub weight: f64,
    /// Nominal `[width, height]` in pixels.
    pub size: [f64; 2],
    /// Per-track scale is uniform in `1 ± size_jitter`.
    pub size_jitter: f64,
    /// Nominal speed in px/frame.
    pub speed: f64,
    /// Per-track speed is `speed * (1 - speed_spread * u^4)`, `u` uniform,
    /// so most tracks move near the nominal speed and a few dawdle.
    pub speed_spread: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lane {
    pub name: String,
    /// Range of the bottom-edge y coordinate of tracks in this lane.
    pub band: [f64; 2],
    /// Allowed headings, `E` and/or `W`.
    pub directions: Vec<Direction>,
    /// Probability that a track spawns in a given frame.
    pub spawn_rate: f64,
    pub classes: Vec<ClassProfile>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnomalyKind {
    WrongClass,
    WrongSpeed,
    WrongDirection,
    WrongSize,
    WrongLocation,
}

/// One anomalous object in the test split. Size and speed default to the
/// class's profile in `lane`, or in any other lane carrying the class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Injection {
    pub kind: AnomalyKind,
    pub lane: usize,
    pub class_id: u16,
    /// First test frame showing the object.
    pub start: u32,
    /// Number of frames it stays.
    pub frames: u32,
    #[serde(default)]
    pub direction: Option<Direction>,
    #[serde(default = "one")]
    pub speed_factor: f64,
    #[serde(default = "one")]
    pub size_factor: f64,
    #[serde(default)]
    pub size: Option<[f64; 2]>,
    #[serde(default)]
    pub speed: Option<f64>,
}

impl Injection {
    pub fn new(kind: AnomalyKind, lane: usize, class_id: u16, start: u32, frames: u32) -> Self {
        Injection {
            kind,
            lane,
            class_id,
            start,
            frames,
            direction: None,
            speed_factor: 1.0,
            size_factor: 1.0,
            size: None,
            speed: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneScript {
    pub width: u32,
    pub height: u32,
    pub train_frames: u32,
    pub test_frames: u32,
    pub seed: u64,
    pub lanes: Vec<Lane>,
    #[serde(default)]
    pub injections: Vec<Injection>,
}

/// Train and test tracks plus the ground truth of the test split.
#[derive(Clone, Debug, PartialEq)]
pub struct Scene {
    pub train: TrackSet,
    pub test: TrackSet,
    pub gt: GroundTruth,
}

fn profile(class_id: u16, size: [f64; 2], speed: f64) -> ClassProfile {
    ClassProfile {
        class_id,
        weight: 1.0,
        size,
        size_jitter: 0.15,
        speed,
        speed_spread: 0.5,
    }
}

fn lane(name: &str, band: [f64; 2], directions: &[Direction], rate: f64, c: ClassProfile) -> Lane {
    Lane {
        name: name.to_string(),
        band,
        directions: directions.to_vec(),
        spawn_rate: rate,
        classes: vec![c],
    }
}

const PERSON: u16 = 1;
const BICYCLE: u16 = 2;
const CAR: u16 = 3;

impl SceneScript {
    /// Sidewalk with pedestrians and a bike lane, both two-way, and one
    /// injected anomaly of each kind.
    pub fn reference() -> SceneScript {
        use Direction::{E, N, W};
        let walker = profile(PERSON, [24.0, 60.0], 3.0);
        let cyclist = profile(BICYCLE, [36.0, 54.0], 8.0);
        let mut injections = vec![
            Injection {
                size: Some([90.0, 50.0]),
                speed: Some(3.0),
                ..Injection::new(AnomalyKind::WrongClass, 0, CAR, 100, 80)
            },
            Injection {
                speed_factor: 5.0,
                ..Injection::new(AnomalyKind::WrongSpeed, 0, PERSON, 400, 36)
            },
            Injection {
                direction: Some(N),
                ..Injection::new(AnomalyKind::WrongDirection, 0, PERSON, 700, 40)
            },
            Injection {
                size_factor: 2.2,
                ..Injection::new(AnomalyKind::WrongSize, 0, PERSON, 1000, 80)
            },
            Injection::new(AnomalyKind::WrongLocation, 1, PERSON, 1250, 80),
        ];
        injections[4].direction = Some(W);
        SceneScript {
            width: 640,
            height: 360,
            train_frames: 6000,
            test_frames: 1500,
            seed: 42,
            lanes: vec![
                lane("sidewalk", [288.0, 312.0], &[E, W], 0.02, walker),
                lane("bike lane", [208.0, 232.0], &[E, W], 0.03, cyclist),
            ],
            injections,
        }
    }

    /// One-way lanes whose only anomalies are in speed and heading.
    pub fn temporal() -> SceneScript {
        use Direction::{E, W};
        let mut s = SceneScript::reference();
        s.lanes[0].directions = vec![E];
        s.lanes[1].directions = vec![W];
        s.injections = vec![
            Injection {
                speed_factor: 5.0,
                direction: Some(E),
                ..Injection::new(AnomalyKind::WrongSpeed, 0, PERSON, 200, 36)
            },
            Injection {
                direction: Some(W),
                ..Injection::new(AnomalyKind::WrongDirection, 0, PERSON, 550, 100)
            },
            Injection {
                speed_factor: 4.0,
                direction: Some(W),
                ..Injection::new(AnomalyKind::WrongSpeed, 1, BICYCLE, 900, 16)
            },
            Injection {
                direction: Some(E),
                ..Injection::new(AnomalyKind::WrongDirection, 1, BICYCLE, 1200, 50)
            },
        ];
        s
    }

    /// Tall pedestrians whose upper bodies cover the bike lane, with
    /// pedestrians injected into the bike lane.
    pub fn occlusion() -> SceneScript {
        use Direction::{E, W};
        let walker = profile(PERSON, [30.0, 100.0], 3.0);
        let cyclist = profile(BICYCLE, [36.0, 54.0], 8.0);
        let intruder = |start, direction| Injection {
            direction: Some(direction),
            ..Injection::new(AnomalyKind::WrongLocation, 1, PERSON, start, 90)
        };
        SceneScript {
            width: 640,
            height: 360,
            train_frames: 6000,
            test_frames: 1500,
            seed: 7,
            lanes: vec![
                lane("sidewalk", [250.0, 270.0], &[E, W], 0.02, walker),
                lane("bike lane", [208.0, 232.0], &[E, W], 0.03, cyclist),
            ],
            injections: vec![
                intruder(150, E),
                intruder(500, W),
                intruder(850, E),
                intruder(1200, W),
            ],
        }
    }

    pub fn preset(name: &str) -> Option<SceneScript> {
        match name {
            "reference" => Some(SceneScript::reference()),
            "temporal" => Some(SceneScript::temporal()),
            "occlusion" => Some(SceneScript::occlusion()),
            _ => None,
        }
    }

    pub fn resolution(&self) -> Resolution {
        Resolution::new(self.width, self.height)
    }

    fn class_profile(&self, lane: usize, class_id: u16) -> Option<&ClassProfile> {
        let own = self.lanes.get(lane)?.classes.iter().find(|c| c.class_id == class_id);
        own.or_else(|| {
            self.lanes
                .iter()
                .flat_map(|l| &l.classes)
                .find(|c| c.class_id == class_id)
        })
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(Error::Script(m));
        if self.width == 0 || self.height == 0 {
            return err("resolution must be positive".into());
        }
        if self.lanes.is_empty() {
            return err("a scene needs at least one lane".into());
        }
        let (w, h) = (self.width as f64, self.height as f64);
        for (i, l) in self.lanes.iter().enumerate() {
            let name = &l.name;
            if !(l.band[0] <= l.band[1] && l.band[0] > 0.0 && l.band[1] <= h) {
                return err(format!("lane {i} ({name}): band must lie inside the frame"));
            }
            if l.directions.is_empty()
                || l.directions.iter().any(|d| !matches!(d, Direction::E | Direction::W))
            {
                return err(format!("lane {i} ({name}): directions must be E and/or W"));
            }
            if !(0.0..=1.0).contains(&l.spawn_rate) {
                return err(format!("lane {i} ({name}): spawn rate must be in [0, 1]"));
            }
            if l.classes.is_empty() {
                return err(format!("lane {i} ({name}): no classes"));
            }
            for c in &l.classes {
                if c.class_id == 0 || c.class_id as usize > NUM_CLASSES {
                    return err(format!("lane {i} ({name}): class id {} outside 1..=80", c.class_id));
                }
                let max_w = c.size[0] * (1.0 + c.size_jitter);
                let max_h = c.size[1] * (1.0 + c.size_jitter);
                if !(c.weight > 0.0 && c.size[0] > 0.0 && c.size[1] > 0.0) {
                    return err(format!("lane {i} ({name}): class weight and size must be positive"));
                }
                if !(0.0..1.0).contains(&c.size_jitter) || !(0.0..1.0).contains(&c.speed_spread) {
                    return err(format!("lane {i} ({name}): jitter and spread must be in [0, 1)"));
                }
                if max_w >= w || max_h > l.band[0] {
                    return err(format!(
                        "lane {i} ({name}): class {} does not fit above the lane band",
                        c.class_id
                    ));
                }
                if c.speed <= 0.0 {
                    return err(format!("lane {i} ({name}): speed must be positive"));
                }
            }
        }
        for (k, inj) in self.injections.iter().enumerate() {
            if inj.lane >= self.lanes.len() {
                return err(format!("injection {k}: lane {} does not exist", inj.lane));
            }
            if inj.class_id == 0 || inj.class_id as usize > NUM_CLASSES {
                return err(format!("injection {k}: class id {} outside 1..=80", inj.class_id));
            }
            if inj.frames == 0 || inj.start == 0 || inj.start + inj.frames - 1 > self.test_frames {
                return err(format!("injection {k}: frame span outside the test split"));
            }
            self.injection_path(inj)
                .map_err(|m| Error::Script(format!("injection {k}: {m}")))?;
        }
        Ok(())
    }

    /// Boxes of an injected object, one per frame of its span.
    fn injection_path(&self, inj: &Injection) -> std::result::Result<Vec<BBox>, String> {
        let base = self.class_profile(inj.lane, inj.class_id);
        let size = inj
            .size
            .or(base.map(|p| p.size))
            .ok_or("class has no profile; give `size`")?;
        let speed = inj
            .speed
            .or(base.map(|p| p.speed))
            .ok_or("class has no profile; give `speed`")?
            * inj.speed_factor;
        let (bw, bh) = (size[0] * inj.size_factor, size[1] * inj.size_factor);
        let lane = &self.lanes[inj.lane];
        let heading = inj.direction.unwrap_or(lane.directions[0]);
        let (ux, uy) = unit(heading);
        let travel = speed * (inj.frames - 1) as f64;
        let (w, h) = (self.width as f64, self.height as f64);
        // centered horizontally so the whole path stays in view
        let cx0 = w / 2.0 - ux * travel / 2.0;
        let bottom0 = (lane.band[0] + lane.band[1]) / 2.0;
        let boxes: Vec<BBox> = (0..inj.frames)
            .map(|k| {
                let cx = cx0 + ux * speed * k as f64;
                let bottom = bottom0 + uy * speed * k as f64;
                BBox::new(cx - bw / 2.0, bottom - bh, cx + bw / 2.0, bottom)
            })
            .collect();
        if boxes
            .iter()
            .any(|b| b.x1 < 0.0 || b.y1 < 0.0 || b.x2 > w || b.y2 > h)
        {
            return Err("object leaves the frame; shorten it or slow it down".into());
        }
        Ok(boxes)
    }
}

/// Image-space unit step of a heading, y pointing down.
fn unit(d: Direction) -> (f64, f64) {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    match d {
        Direction::N => (0.0, -1.0),
        Direction::NE => (r, -r),
        Direction::E => (1.0, 0.0),
        Direction::SE => (r, r),
        Direction::S => (0.0, 1.0),
        Direction::SW => (-r, r),
        Direction::W => (-1.0, 0.0),
        Direction::NW => (-r, -r),
        Direction::Stationary => (0.0, 0.0),
    }
}

const SPAWN_STREAM: u64 = u32::MAX as u64;

fn stream(seed: u64, split: u64, lane: usize, ordinal: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(split << 48 | (lane as u64) << 32 | ordinal);
    rng
}

/// A track's fixed attributes, drawn in this order from its stream.
struct TrackPlan {
    class_id: u16,
    heading: Direction,
    width: f64,
    height: f64,
    speed: f64,
    bottom: f64,
}

fn plan_track(lane: &Lane, rng: &mut ChaCha8Rng) -> TrackPlan {
    let total: f64 = lane.classes.iter().map(|c| c.weight).sum();
    let mut pick = rng.random::<f64>() * total;
    let class = lane
        .classes
        .iter()
        .find(|c| {
            pick -= c.weight;
            pick < 0.0
        })
        .unwrap_or(&lane.classes[lane.classes.len() - 1]);
    let heading = lane.directions[(rng.random::<f64>() * lane.directions.len() as f64) as usize];
    let scale = 1.0 + class.size_jitter * (2.0 * rng.random::<f64>() - 1.0);
    let speed = class.speed * (1.0 - class.speed_spread * rng.random::<f64>().powi(4));
    let bottom = lane.band[0] + (lane.band[1] - lane.band[0]) * rng.random::<f64>();
    TrackPlan {
        class_id: class.class_id,
        heading,
        width: class.size[0] * scale,
        height: class.size[1] * scale,
        speed,
        bottom,
    }
}

fn confidence(rng: &mut ChaCha8Rng) -> f64 {
    0.55 + 0.4 * rng.random::<f64>()
}

/// Normal traffic of one split. The simulation starts early enough that the
/// slowest track could cross the frame before frame 1, so the first frames
/// are already populated.
fn simulate(script: &SceneScript, split: u64, frames: u32) -> Vec<TrackedDetection> {
    let w = script.width as f64;
    let slowest = script
        .lanes
        .iter()
        .flat_map(|l| &l.classes)
        .map(|c| c.speed * (1.0 - c.speed_spread))
        .fold(f64::INFINITY, f64::min);
    let warmup = (w / slowest).ceil() as i64;

    let mut spawners: Vec<ChaCha8Rng> = (0..script.lanes.len())
        .map(|l| stream(script.seed, split, l, SPAWN_STREAM))
        .collect();
    let mut ordinals = vec![0u64; script.lanes.len()];
    let mut next_id = 0u64;
    let mut dets = Vec::new();
    for start in (1 - warmup)..=frames as i64 {
        for (l, lane) in script.lanes.iter().enumerate() {
            if spawners[l].random::<f64>() >= lane.spawn_rate {
                continue;
            }
            let mut rng = stream(script.seed, split, l, ordinals[l]);
            ordinals[l] += 1;
            let plan = plan_track(lane, &mut rng);
            let id = next_id;
            next_id += 1;
            let forward = plan.heading == Direction::E;
            for k in 0i64.. {
                let travelled = plan.speed * k as f64;
                if travelled + plan.width > w {
                    break;
                }
                let frame = start + k;
                if frame > frames as i64 {
                    break;
                }
                let conf = confidence(&mut rng);
                if frame < 1 {
                    continue;
                }
                let x1 = if forward { travelled } else { w - plan.width - travelled };
                dets.push(TrackedDetection::new(
                    frame as u32,
                    id,
                    plan.class_id,
                    BBox::new(x1, plan.bottom - plan.height, x1 + plan.width, plan.bottom),
                    conf,
                ));
            }
        }
    }
    dets
}

pub fn generate_scene(script: &SceneScript) -> Result<Scene> {
    script.validate()?;
    let res = script.resolution();
    let train = TrackSet::new(res, script.train_frames, simulate(script, 0, script.train_frames))?;

    let mut test = simulate(script, 1, script.test_frames);
    let mut next_id = test.iter().map(|d| d.track_id + 1).max().unwrap_or(0);
    let mut regions = Vec::new();
    for (k, inj) in script.injections.iter().enumerate() {
        let boxes = script.injection_path(inj).map_err(Error::Script)?;
        for (offset, bbox) in boxes.into_iter().enumerate() {
            let frame = inj.start + offset as u32;
            test.push(TrackedDetection::new(frame, next_id, inj.class_id, bbox, 0.9));
            regions.push(GtRegion {
                frame,
                gt_id: k as u64 + 1,
                bbox,
            });
        }
        next_id += 1;
    }
    Ok(Scene {
        train,
        test: TrackSet::new(res, script.test_frames, test)?,
        gt: GroundTruth::new(regions)?,
    })
}

/// Paths written by [`write_scene`].
#[derive(Clone, Debug, PartialEq)]
pub struct ScenePaths {
    pub train: PathBuf,
    pub test: PathBuf,
    pub gt: PathBuf,
    pub script: PathBuf,
}

impl ScenePaths {
    pub fn in_dir(dir: &Path) -> ScenePaths {
        ScenePaths {
            train: dir.join("train.jsonl"),
            test: dir.join("test.jsonl"),
            gt: dir.join("gt.jsonl"),
            script: dir.join("scene.json"),
        }
    }
}

/// Serialized scene: train tracks, test tracks and ground truth, in that
/// order. This is the byte stream golden checksums are taken over.
pub fn scene_bytes(scene: &Scene) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    write_tracks_jsonl(&scene.train, &mut out)?;
    write_tracks_jsonl(&scene.test, &mut out)?;
    write_ground_truth(&scene.gt, &mut out)?;
    Ok(out)
}

pub fn write_scene(script: &SceneScript, scene: &Scene, dir: &Path) -> Result<ScenePaths> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let paths = ScenePaths::in_dir(dir);
    let create = |p: &Path| -> Result<BufWriter<File>> {
        Ok(BufWriter::new(File::create(p).map_err(|e| Error::io(p, e))?))
    };
    write_tracks_jsonl(&scene.train, create(&paths.train)?)?;
    write_tracks_jsonl(&scene.test, create(&paths.test)?)?;
    write_ground_truth(&scene.gt, create(&paths.gt)?)?;
    let mut f = create(&paths.script)?;
    serde_json::to_writer_pretty(&mut f, script)?;
    f.write_all(b"\n")
        .and_then(|_| f.flush())
        .map_err(|e| Error::io(&paths.script, e))?;
    Ok(paths)
}
