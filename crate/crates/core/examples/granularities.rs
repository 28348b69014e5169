//! Effect of cell size, granularity fusion and training-frame slicing on the
//! reference scene.
//!
//!     cargo run --release --example granularities

use gridvad::metrics::{evaluate, MetricParams};
use gridvad::pipeline::{prepare_test, train, Fusion, TrainConfig};
use gridvad::synth::{generate_scene, SceneScript};

fn main() -> gridvad::Result<()> {
    let scene = generate_scene(&SceneScript::reference())?;
    let runs: Vec<(&str, TrainConfig)> = vec![
        ("20", TrainConfig { cell_sizes: vec![20], ..Default::default() }),
        ("40", TrainConfig { cell_sizes: vec![40], ..Default::default() }),
        ("80", TrainConfig { cell_sizes: vec![80], ..Default::default() }),
        ("40+80 mean", TrainConfig { cell_sizes: vec![40, 80], ..Default::default() }),
        (
            "40+80 min",
            TrainConfig { cell_sizes: vec![40, 80], fusion: Fusion::Min, ..Default::default() },
        ),
        (
            "40+80 slice 3",
            TrainConfig { cell_sizes: vec![40, 80], slice: 3, ..Default::default() },
        ),
        (
            "40+80 no smoothing",
            TrainConfig { cell_sizes: vec![40, 80], smoothing_sigma: 0.0, ..Default::default() },
        ),
    ];
    println!("{:<20} {:>9} {:>9} {:>9}", "cells", "AUC", "RBDC", "TBDC");
    for (name, config) in runs {
        let (bundle, _) = train(&config, &scene.train)?;
        let test = prepare_test(&bundle, &scene.test);
        let (objects, frames) = bundle.scorer()?.score_frames(&test)?;
        let r = evaluate(&objects, &frames, &scene.gt, &MetricParams::default());
        println!(
            "{name:<20} {:>9} {:>9} {:>9}",
            r.summary["frame_auc"], r.summary["rbdc"], r.summary["tbdc"]
        );
    }
    Ok(())
}
