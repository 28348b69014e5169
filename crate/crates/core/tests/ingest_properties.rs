mod common;

use std::io::Cursor;

use gridvad::ingest::{
    compute_confidence_thresholds, filter_detections, parse_tracks, slice_frames,
    write_tracks_jsonl, write_tracks_mot, TrackFormat, TrackSet, TrackedDetection,
};
use proptest::prelude::*;

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 { a } else { gcd(b, a % b) }
}

fn shifted(t: &TrackSet, c: f64) -> TrackSet {
    let dets: Vec<TrackedDetection> = t
        .detections()
        .iter()
        .map(|d| TrackedDetection { confidence: d.confidence + c, ..*d })
        .collect();
    TrackSet::new(t.resolution(), t.frame_count(), dets).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn jsonl_round_trip_is_exact(t in common::track_set(30, 6)) {
        let mut buf = Vec::new();
        write_tracks_jsonl(&t, &mut buf).unwrap();
        let back = parse_tracks(Cursor::new(&buf), TrackFormat::Jsonl).unwrap();
        prop_assert_eq!(&back, &t);
        let mut again = Vec::new();
        write_tracks_jsonl(&back, &mut again).unwrap();
        prop_assert_eq!(again, buf);
    }

    #[test]
    fn mot_round_trip(t in common::track_set(30, 6)) {
        let mut buf = Vec::new();
        write_tracks_mot(&t, &mut buf).unwrap();
        let back = parse_tracks(Cursor::new(&buf), TrackFormat::Mot).unwrap();
        prop_assert_eq!(back.len(), t.len());
        for (a, b) in back.detections().iter().zip(t.detections()) {
            prop_assert_eq!((a.frame, a.track_id, a.class_id), (b.frame, b.track_id, b.class_id));
            prop_assert_eq!(a.confidence, b.confidence);
            // width and height go through a subtraction
            for (u, v) in [(a.bbox.x1, b.bbox.x1), (a.bbox.y1, b.bbox.y1), (a.bbox.x2, b.bbox.x2), (a.bbox.y2, b.bbox.y2)] {
                prop_assert!((u - v).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn filtering_is_idempotent(t in common::track_set(30, 6)) {
        let th = compute_confidence_thresholds(&t);
        let once = filter_detections(&t, &th);
        prop_assert_eq!(filter_detections(&once, &th), once);
    }

    #[test]
    fn slicing_composes(t in common::track_set(60, 4), a in 1u32..8, b in 1u32..8) {
        let twice = slice_frames(&slice_frames(&t, a), b);
        let lcm = a / gcd(a, b) * b;
        prop_assert_eq!(&twice, &slice_frames(&t, lcm));
        if gcd(a, b) == 1 {
            prop_assert_eq!(&twice, &slice_frames(&t, a * b));
        }
        prop_assert!(twice.detections().iter().all(|d| (d.frame - 1) % lcm == 0));
        let first = t.detections().iter().filter(|d| d.frame == 1).count();
        prop_assert_eq!(twice.detections().iter().filter(|d| d.frame == 1).count(), first);
    }

    #[test]
    fn thresholds_shift_with_confidences(t in common::track_set(30, 6), c in 0.0..0.5f64) {
        let scaled = TrackSet::new(
            t.resolution(),
            t.frame_count(),
            t.detections()
                .iter()
                .map(|d| TrackedDetection { confidence: d.confidence * 0.5, ..*d })
                .collect(),
        )
        .unwrap();
        let base = compute_confidence_thresholds(&scaled);
        let moved = compute_confidence_thresholds(&shifted(&scaled, c));
        // the unclamped threshold moves by c; clamping at zero can only
        // shrink the shift
        for (b, m) in [(base.person, moved.person), (base.other, moved.other)] {
            if b > 0.0 {
                prop_assert!((m - (b + c)).abs() <= 1e-12, "{b} + {c} != {m}");
            } else {
                prop_assert!(m >= 0.0 && m <= c + 1e-12);
            }
        }
    }
}
