//! Train and evaluate on each built-in synthetic scene, spatial and
//! spatio-temporal, bottom-edge and whole-box.
//!
//!     cargo run --release --example ablations [reference|temporal|occlusion]

use std::time::Instant;

use gridvad::featurize::{BoxMode, ModelKind};
use gridvad::metrics::{evaluate, MetricParams};
use gridvad::pipeline::{prepare_test, score_frames, train, TrainConfig};
use gridvad::synth::{generate_scene, SceneScript};

fn main() -> gridvad::Result<()> {
    let names: Vec<String> = std::env::args().skip(1).collect();
    let names = if names.is_empty() {
        vec!["reference".into(), "temporal".into(), "occlusion".into()]
    } else {
        names
    };
    for name in names {
        let script = SceneScript::preset(&name).expect("unknown preset");
        let scene = generate_scene(&script)?;
        println!(
            "{name}: {} train / {} test detections",
            scene.train.len(),
            scene.test.len()
        );
        for kind in [ModelKind::Spatial, ModelKind::SpatioTemporal] {
            for box_mode in [BoxMode::Bottom, BoxMode::Whole] {
                let start = Instant::now();
                let config = TrainConfig {
                    cell_sizes: vec![40, 80],
                    kind,
                    box_mode,
                    ..TrainConfig::default()
                };
                let (bundle, _) = train(&config, &scene.train)?;
                let test = prepare_test(&bundle, &scene.test);
                let (objects, frames) = score_frames(&bundle, &test)?;
                let r = evaluate(&objects, &frames, &scene.gt, &MetricParams::default());
                println!(
                    "  {kind:?} {box_mode:?}: AUC {} RBDC {} TBDC {} ({:.2}s)",
                    r.summary["frame_auc"],
                    r.summary["rbdc"],
                    r.summary["tbdc"],
                    start.elapsed().as_secs_f64()
                );
            }
        }
    }
    Ok(())
}
