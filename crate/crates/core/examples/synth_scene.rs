//! Generate a synthetic scene and write it to disk in the ingest formats.
//!
//!     cargo run --example synth_scene -- [reference|temporal|occlusion] [out-dir]

use std::path::PathBuf;

use gridvad::synth::{generate_scene, write_scene, SceneScript};
use gridvad::vocab::class_name;

fn main() -> gridvad::Result<()> {
    let mut args = std::env::args().skip(1);
    let preset = args.next().unwrap_or_else(|| "reference".into());
    let out: PathBuf = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join(format!("gridvad-{preset}")));

    let script = SceneScript::preset(&preset).expect("unknown preset");
    let scene = generate_scene(&script)?;
    let paths = write_scene(&script, &scene, &out)?;

    println!("{preset} scene, seed {}", script.seed);
    for lane in &script.lanes {
        let classes: Vec<&str> = lane
            .classes
            .iter()
            .filter_map(|c| class_name(c.class_id))
            .collect();
        println!(
            "  lane {:<10} bottom y {:?}, heading {:?}, classes {classes:?}",
            lane.name, lane.band, lane.directions
        );
    }
    for inj in &script.injections {
        println!(
            "  {:?}: {} in lane {}, frames {}..{}",
            inj.kind,
            class_name(inj.class_id).unwrap_or("?"),
            inj.lane,
            inj.start,
            inj.start + inj.frames - 1
        );
    }
    println!(
        "train: {} detections over {} frames",
        scene.train.len(),
        scene.train.frame_count()
    );
    println!(
        "test:  {} detections over {} frames, {} anomalous regions",
        scene.test.len(),
        scene.test.frame_count(),
        scene.gt.regions().len()
    );
    println!("written to {}", paths.train.parent().unwrap().display());
    Ok(())
}
