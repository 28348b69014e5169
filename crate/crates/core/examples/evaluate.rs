//! Frame AUC, RBDC and TBDC on the reference scene, with the start of each
//! sweep curve.
//!
//!     cargo run --release --example evaluate

use gridvad::metrics::{evaluate, MetricParams, RocPoint};
use gridvad::pipeline::{prepare_test, train, TrainConfig};
use gridvad::synth::{generate_scene, SceneScript};

fn show(name: &str, curve: &[RocPoint]) {
    println!("{name}: {} points", curve.len());
    for p in curve.iter().take(5) {
        let t = p.threshold.map_or("+inf".to_string(), |t| format!("{t:.4}"));
        println!("  threshold {t:>7}  tpr {:.3}  x {:.4}", p.tpr, p.fp_rate);
    }
}

fn main() -> gridvad::Result<()> {
    let scene = generate_scene(&SceneScript::reference())?;
    let config = TrainConfig {
        cell_sizes: vec![40, 80],
        ..TrainConfig::default()
    };
    let (bundle, _) = train(&config, &scene.train)?;
    let test = prepare_test(&bundle, &scene.test);
    let (objects, frames) = bundle.scorer()?.score_frames(&test)?;

    let report = evaluate(&objects, &frames, &scene.gt, &MetricParams::default());
    for (k, v) in &report.summary {
        println!("{k:>9}: {v}");
    }
    show("RBDC curve", &report.rbdc_curve);
    show("TBDC curve", &report.tbdc_curve);

    // a stricter overlap requirement
    let strict = MetricParams {
        iou: 0.5,
        ..MetricParams::default()
    };
    let r = evaluate(&objects, &frames, &scene.gt, &strict);
    println!("with IoU 0.5: rbdc {} tbdc {}", r.summary["rbdc"], r.summary["tbdc"]);
    Ok(())
}
