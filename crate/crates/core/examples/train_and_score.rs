//! Train a two-granularity model on synthetic tracks, save and reload it,
//! and score the test split.
//!
//!     cargo run --release --example train_and_score

use gridvad::pipeline::{prepare_test, train, ModelBundle, TrainConfig};
use gridvad::synth::{generate_scene, SceneScript};

fn main() -> gridvad::Result<()> {
    let scene = generate_scene(&SceneScript::reference())?;
    let config = TrainConfig {
        cell_sizes: vec![40, 80],
        ..TrainConfig::default()
    };
    let (bundle, report) = train(&config, &scene.train)?;
    for g in &report.granularities {
        println!(
            "cell {:>3}px: {:>4} cells, {:>6} observations, fit {:.3}s",
            g.cell_size, g.cells, g.observations, g.fit_seconds
        );
    }

    let path = std::env::temp_dir().join("gridvad-example.bundle");
    bundle.save(&path)?;
    let bundle = ModelBundle::load(&path)?;

    let test = prepare_test(&bundle, &scene.test);
    let (objects, frames) = bundle.scorer()?.score_frames(&test)?;

    let mut lowest: Vec<_> = objects.iter().collect();
    lowest.sort_by(|a, b| a.score.total_cmp(&b.score).then(a.frame.cmp(&b.frame)));
    println!("least likely objects:");
    for o in lowest.iter().take(8) {
        println!(
            "  frame {:>4} track {:>4} class {:>2}: {:.4} {:?}",
            o.frame, o.track_id, o.class_id, o.score, o.reason
        );
    }
    let anomalous = frames.frames.iter().filter(|f| scene.gt.is_anomalous(f.frame));
    let (n, sum) = anomalous.fold((0, 0.0), |(n, s), f| (n + 1, s + f.smoothed));
    let normal_mean = frames
        .frames
        .iter()
        .filter(|f| !scene.gt.is_anomalous(f.frame))
        .map(|f| f.smoothed)
        .sum::<f64>()
        / (frames.frames.len() - n) as f64;
    println!(
        "mean smoothed frame score: anomalous {:.3}, normal {:.3}",
        sum / n as f64,
        normal_mean
    );
    Ok(())
}
