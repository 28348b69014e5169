//! Read tracker output in MOT text format, apply the preprocessing steps and
//! write the per-cell observation table.
//!
//! A MOT file starts with a `# width=W height=H frames=N` header followed by
//! `frame,id,left,top,width,height,conf,class` rows.
//!
//!     cargo run --example mot_ingest

use std::io::Cursor;

use gridvad::featurize::{
    build_grid, fit_discretizer, generate_observations, BoxMode, DiscretizerParams, ModelKind,
};
use gridvad::ingest::{
    compute_confidence_thresholds, filter_detections, parse_tracks, slice_frames,
    write_tracks_mot, TrackFormat,
};
use gridvad::synth::{generate_scene, SceneScript};

const SAMPLE: &str = "\
# width=320 height=240 frames=4
1,1,10,100,20,50,0.91,1
1,2,200,150,40,30,0.40,3
2,1,14,101,20,50,0.88,1
2,2,195,150,40,30,0.85,3
3,1,18,102,20,50,0.93,1
4,1,22,103,20,50,0.90,1
";

fn main() -> gridvad::Result<()> {
    let tracks = parse_tracks(Cursor::new(SAMPLE), TrackFormat::Mot)?;
    println!("{} detections in {} frames", tracks.len(), tracks.frame_count());

    let thresholds = compute_confidence_thresholds(&tracks);
    println!(
        "confidence thresholds: person {:.3}, other {:.3}",
        thresholds.person, thresholds.other
    );
    let kept = slice_frames(&filter_detections(&tracks, &thresholds), 1);
    println!("{} detections after filtering", kept.len());

    let grid = build_grid(kept.resolution(), 40)?;
    let d = fit_discretizer(&kept, DiscretizerParams::default());
    let table = generate_observations(&kept, &grid, &d, ModelKind::SpatioTemporal, BoxMode::Bottom);
    table.write_csv(std::io::stdout())?;

    // the converse direction: synthetic tracks exported for other tools
    let scene = generate_scene(&SceneScript::reference())?;
    let mut mot = Vec::new();
    write_tracks_mot(&scene.test, &mut mot)?;
    let back = parse_tracks(Cursor::new(&mot), TrackFormat::Mot)?;
    assert_eq!(back, scene.test);
    println!("round-tripped {} synthetic detections through MOT text", back.len());
    Ok(())
}
