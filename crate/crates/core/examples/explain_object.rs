//! Break down the score of the least likely object in the test split.
//!
//!     cargo run --release --example explain_object

use gridvad::explain::explain_object;
use gridvad::pipeline::{prepare_test, train, TrainConfig};
use gridvad::synth::{generate_scene, SceneScript};

fn main() -> gridvad::Result<()> {
    let scene = generate_scene(&SceneScript::reference())?;
    let config = TrainConfig {
        cell_sizes: vec![40, 80],
        ..TrainConfig::default()
    };
    let (bundle, _) = train(&config, &scene.train)?;
    let test = prepare_test(&bundle, &scene.test);
    let scorer = bundle.scorer()?;
    let (objects, _) = scorer.score_frames(&test)?;

    // lowest score among known-class objects that have motion evidence
    let dets = test.detections();
    let preds = test.predecessors();
    let has_prev = |o: &&gridvad::pipeline::ScoredObject| {
        test.find(o.frame, o.track_id).is_some_and(|i| preds[i].is_some())
    };
    let target = objects
        .iter()
        .filter(|o| o.reason.is_none())
        .filter(has_prev)
        .min_by(|a, b| a.score.total_cmp(&b.score))
        .expect("at least one scored object");
    let idx = test.find(target.frame, target.track_id).unwrap();
    let prev = preds[idx].map(|p| &dets[p]);

    let e = explain_object(&scorer, &dets[idx], prev, None)?;
    println!(
        "frame {} track {} ({}): score {:.4}",
        e.frame, e.track_id, e.class_name, e.score
    );
    for step in &e.trace {
        println!(
            "  cell size {}: cells {:?} scores {:?} -> {:.4}",
            step.cell_size, step.cells, step.cell_scores, step.mean
        );
    }
    for cell in &e.cells {
        println!("cell {} at {}px", cell.cell, cell.cell_size);
        for d in &cell.distributions {
            let flag = if d.impossible {
                "  (rest of the evidence is impossible)"
            } else if d.rank > 1 {
                "  <-- not the most likely value"
            } else {
                ""
            };
            println!(
                "  {:<3} observed {:<15} p={:.4} rank {}{flag}",
                d.variable, d.observed, d.observed_probability, d.rank
            );
        }
    }
    let out = std::env::temp_dir().join("gridvad-explanation.json");
    e.save(&out)?;
    println!("written to {} (+ .plot.json)", out.display());
    Ok(())
}
