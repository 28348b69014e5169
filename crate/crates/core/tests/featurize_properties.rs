mod common;

use std::collections::BTreeMap;

use gridvad::featurize::{
    build_grid, cell_intersections, fit_discretizer, generate_observations, object_features,
    BoxMode, DiscretizerParams, ModelKind, ObjectFeatures,
};
use gridvad::geometry::BBox;
use gridvad::ingest::{Resolution, TrackSet, TrackedDetection};
use gridvad::vocab::{Category, Direction, Velocity, NUM_CLASSES};
use proptest::prelude::*;

fn features(t: &TrackSet) -> Vec<Option<ObjectFeatures>> {
    let d = fit_discretizer(t, DiscretizerParams::default());
    let dets = t.detections();
    t.predecessors()
        .iter()
        .zip(dets)
        .map(|(p, det)| object_features(det, p.map(|p| &dets[p]), &d))
        .collect()
}

fn mapped(t: &TrackSet, res: Resolution, f: impl Fn(&BBox) -> BBox) -> TrackSet {
    let dets = t
        .detections()
        .iter()
        .map(|d| TrackedDetection { bbox: f(&d.bbox), ..*d })
        .collect();
    TrackSet::new(res, t.frame_count(), dets).unwrap()
}

fn in_space<C: Category>(c: C) -> bool {
    C::ALL.get(c.index()) == Some(&c)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 96, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn observations_stay_in_their_value_spaces(
        t in common::track_set(20, 6),
        cell in prop::sample::select(vec![10u32, 20, 40, 80]),
        whole in any::<bool>(),
    ) {
        let mode = if whole { BoxMode::Whole } else { BoxMode::Bottom };
        let Ok(grid) = build_grid(t.resolution(), cell) else { return Ok(()) };
        let d = fit_discretizer(&t, DiscretizerParams::default());
        for kind in [ModelKind::Spatial, ModelKind::SpatioTemporal] {
            let table = generate_observations(&t, &grid, &d, kind, mode);
            prop_assert!(table.len() >= t.len(), "every detection yields at least one row");
            for r in &table.rows {
                prop_assert!(r.cell >= 1 && r.cell <= grid.cell_count());
                prop_assert!(r.class_id >= 1 && r.class_id as usize <= NUM_CLASSES);
                prop_assert!(r.frame >= 1 && r.frame <= t.frame_count());
                prop_assert!(in_space(r.intersection) && in_space(r.size) && in_space(r.aspect));
                match kind {
                    ModelKind::Spatial => prop_assert!(r.velocity.is_none() && r.direction.is_none()),
                    ModelKind::SpatioTemporal => {
                        let (v, dir) = (r.velocity.unwrap(), r.direction.unwrap());
                        prop_assert!(in_space(v) && in_space(dir));
                        prop_assert_eq!(v == Velocity::Idle, dir == Direction::Stationary);
                    }
                }
            }

            // marginal counts of every attribute add up to the row count
            let n = table.len();
            let count = |key: &dyn Fn(&gridvad::featurize::Observation) -> usize| {
                let mut m: BTreeMap<usize, usize> = BTreeMap::new();
                for r in &table.rows {
                    *m.entry(key(r)).or_default() += 1;
                }
                m.values().sum::<usize>()
            };
            prop_assert_eq!(count(&|r| r.cell as usize), n);
            prop_assert_eq!(count(&|r| r.intersection.index()), n);
            prop_assert_eq!(count(&|r| r.size.index()), n);
            prop_assert_eq!(count(&|r| r.aspect.index()), n);
        }
    }

    #[test]
    fn bottom_edge_is_one_row_spanning_the_columns(
        t in common::track_set(5, 6),
        cell in prop::sample::select(vec![10u32, 20, 40, 80]),
    ) {
        let Ok(grid) = build_grid(t.resolution(), cell) else { return Ok(()) };
        let s = cell as f64;
        for det in t.detections() {
            let cells = cell_intersections(det, &grid, BoxMode::Bottom);
            let rows: Vec<u32> = cells.iter().map(|&(g, _)| grid.col_row(g).1).collect();
            prop_assert!(rows.windows(2).all(|w| w[0] == w[1]));
            let first = (det.bbox.x1 / s).floor() as u32;
            let last = (((det.bbox.x2 / s).ceil() as u32).max(first + 1) - 1).min(grid.cols - 1);
            prop_assert_eq!(cells.len() as u32, last - first + 1);
            // the row is the one containing the bottom border
            let row = rows[0] as f64;
            prop_assert!(row * s < det.bbox.y2 && det.bbox.y2 <= (row + 1.0) * s || rows[0] == grid.rows - 1);
        }
    }

    #[test]
    fn whole_box_rows_contain_bottom_rows(
        t in common::track_set(8, 6),
        cell in prop::sample::select(vec![10u32, 20, 40, 80]),
    ) {
        let Ok(grid) = build_grid(t.resolution(), cell) else { return Ok(()) };
        for det in t.detections() {
            let whole = cell_intersections(det, &grid, BoxMode::Whole);
            for row in cell_intersections(det, &grid, BoxMode::Bottom) {
                prop_assert!(whole.contains(&row), "{:?} missing from whole-box rows", row);
            }
        }
    }

    #[test]
    fn translation_keeps_aspect_and_heading(
        t in common::track_set(20, 5),
        dx in 0u32..200,
        dy in 0u32..200,
    ) {
        let r = t.resolution();
        let moved = mapped(&t, Resolution::new(r.width + dx, r.height + dy), |b| {
            BBox::new(b.x1 + dx as f64, b.y1 + dy as f64, b.x2 + dx as f64, b.y2 + dy as f64)
        });
        for (a, b) in features(&t).iter().zip(features(&moved)) {
            let (a, b) = (a.unwrap(), b.unwrap());
            prop_assert_eq!(a.aspect, b.aspect);
            prop_assert_eq!(a.direction, b.direction);
            prop_assert_eq!(a.size, b.size);
        }
    }

    #[test]
    fn scaling_keeps_size_bins(t in common::track_set(20, 5), k in prop::sample::select(vec![2.0f64, 4.0])) {
        let r = t.resolution();
        let scaled = mapped(
            &t,
            Resolution::new(r.width * k as u32, r.height * k as u32),
            |b| b.scaled(k),
        );
        for (a, b) in features(&t).iter().zip(features(&scaled)) {
            let (a, b) = (a.unwrap(), b.unwrap());
            // idle speed is an absolute threshold, so only the box
            // attributes are scale-free
            prop_assert_eq!(a.size, b.size);
            prop_assert_eq!(a.aspect, b.aspect);
        }
    }
}
