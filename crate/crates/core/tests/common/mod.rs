#![allow(dead_code)]

use gridvad::geometry::BBox;
use gridvad::ingest::{Resolution, TrackSet, TrackedDetection};
use proptest::prelude::*;

/// Quarter-pixel coordinates keep translations and power-of-two scalings exact.
fn quarter(v: f64) -> f64 {
    (v * 4.0).floor() / 4.0
}

/// Random track sets: up to `max_tracks` tracks, each a run of boxes moving
/// by small steps, some with gaps.
pub fn track_set(max_frames: u32, max_tracks: usize) -> impl Strategy<Value = TrackSet> {
    (160u32..=800, 120u32..=600, 1..=max_frames).prop_flat_map(move |(w, h, frames)| {
        let track = (
            1u32..=frames,
            1u32..=frames,
            prop::sample::select(vec![1u16, 1, 2, 3, 17]),
            0.0..(w as f64 - 12.0),
            0.0..(h as f64 - 12.0),
            4.0..60.0f64,
            4.0..80.0f64,
            (-6.0..6.0f64, -6.0..6.0f64),
            prop::collection::vec(0.05..1.0f64, 1..=frames as usize),
        );
        prop::collection::vec(track, 1..=max_tracks).prop_map(move |tracks| {
            let mut dets = Vec::new();
            for (id, (a, b, class, x, y, bw, bh, (dx, dy), confs)) in tracks.into_iter().enumerate() {
                let (start, end) = (a.min(b), a.max(b));
                for (k, f) in (start..=end).enumerate() {
                    if (f + id as u32) % 7 == 3 {
                        continue;
                    }
                    let x1 = quarter((x + dx * k as f64).clamp(0.0, w as f64 - 2.0));
                    let y1 = quarter((y + dy * k as f64).clamp(0.0, h as f64 - 2.0));
                    let x2 = quarter((x1 + bw).min(w as f64));
                    let y2 = quarter((y1 + bh).min(h as f64));
                    let bbox = BBox::new(x1, y1, x2, y2);
                    let conf = confs[k % confs.len()];
                    dets.push(TrackedDetection::new(f, id as u64 + 1, class, bbox, conf));
                }
            }
            TrackSet::new(Resolution::new(w, h), frames, dets).expect("generated tracks are valid")
        })
    })
}
