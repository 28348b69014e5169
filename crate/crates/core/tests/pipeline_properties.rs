use gridvad::featurize::BoxMode;
use gridvad::metrics::{evaluate, MetricParams};
use gridvad::pipeline::{
    gaussian_smooth, mean, prepare_test, train, write_scores, Fusion, ModelBundle, TrainConfig,
};
use gridvad::synth::{generate_scene, Scene, SceneScript};
use proptest::prelude::*;

fn fused(fusion: Fusion, cells: &[Vec<f64>]) -> f64 {
    let per: Vec<f64> = cells.iter().map(|c| mean(c)).collect();
    fusion.fuse(&per)
}

fn small_reference() -> Scene {
    let mut s = SceneScript::reference();
    s.train_frames = 1500;
    s.test_frames = 500;
    s.injections.retain(|i| i.start + i.frames <= 500);
    generate_scene(&s).unwrap()
}

fn scores_bytes(bundle: &ModelBundle, scene: &Scene) -> Vec<u8> {
    let test = prepare_test(bundle, &scene.test);
    let (objects, frames) = bundle.scorer().unwrap().score_frames(&test).unwrap();
    let mut out = Vec::new();
    write_scores(None, &objects, &frames, &mut out).unwrap();
    out
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn lowering_a_cell_never_raises_the_object_score(
        cells in prop::collection::vec(prop::collection::vec(0.0..=1.0f64, 1..6), 1..4),
        pick in any::<prop::sample::Index>(),
        factor in 0.0..1.0f64,
        min_rule in any::<bool>(),
    ) {
        let fusion = if min_rule { Fusion::Min } else { Fusion::Mean };
        let before = fused(fusion, &cells);
        let mut lowered = cells.clone();
        let g = pick.index(lowered.len());
        let c = pick.index(lowered[g].len());
        lowered[g][c] *= factor;
        prop_assert!(fused(fusion, &lowered) <= before);
    }

    #[test]
    fn fusing_equal_values_returns_the_value(v in 0.0..=1.0f64, k in 1usize..10) {
        prop_assert_eq!(Fusion::Mean.fuse(&vec![v; k]), v);
        prop_assert_eq!(Fusion::Min.fuse(&vec![v; k]), v);
        prop_assert_eq!(mean(&vec![v; k]), v);
    }

    #[test]
    fn smoothing_stays_within_the_raw_range(
        raw in prop::collection::vec(0.0..=1.0f64, 1..200),
        sigma in 0.0..20.0f64,
    ) {
        let lo = raw.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let s = gaussian_smooth(&raw, sigma);
        prop_assert_eq!(s.len(), raw.len());
        prop_assert!(s.iter().all(|&v| lo <= v && v <= hi));
    }
}

#[test]
fn zero_sigma_is_identity() {
    let raw = [0.3, 0.9, 0.1, 1.0];
    assert_eq!(gaussian_smooth(&raw, 0.0), raw.to_vec());
}

#[test]
fn training_and_scoring_are_deterministic() {
    let scene = small_reference();
    let config = TrainConfig {
        cell_sizes: vec![40, 80],
        ..TrainConfig::default()
    };
    let (a, _) = train(&config, &scene.train).unwrap();
    let (b, _) = train(&config, &scene.train).unwrap();
    assert_eq!(serde_json::to_vec(&a).unwrap(), serde_json::to_vec(&b).unwrap());

    let pool = |n| rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
    let one = pool(1).install(|| scores_bytes(&a, &scene));
    let many = pool(4).install(|| scores_bytes(&a, &scene));
    assert_eq!(one, many);
    assert_eq!(one, scores_bytes(&b, &scene));
}

#[test]
fn bundle_file_round_trip_scores_identically() {
    let scene = small_reference();
    let (bundle, _) = train(&TrainConfig::default(), &scene.train).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.bundle");
    bundle.save(&path).unwrap();
    let loaded = ModelBundle::load(&path).unwrap();
    assert_eq!(loaded, bundle);
    assert_eq!(scores_bytes(&loaded, &scene), scores_bytes(&bundle, &scene));
}

#[test]
fn bottom_border_beats_whole_box_under_occlusion() {
    let scene = generate_scene(&SceneScript::occlusion()).unwrap();
    let auc = |box_mode| {
        let config = TrainConfig {
            cell_sizes: vec![40, 80],
            box_mode,
            ..TrainConfig::default()
        };
        let (bundle, _) = train(&config, &scene.train).unwrap();
        let test = prepare_test(&bundle, &scene.test);
        let (objects, frames) = bundle.scorer().unwrap().score_frames(&test).unwrap();
        evaluate(&objects, &frames, &scene.gt, &MetricParams::default())
            .frame_auc
            .unwrap()
    };
    assert!(auc(BoxMode::Bottom) > auc(BoxMode::Whole));
}

#[test]
fn scores_are_probabilities() {
    let scene = small_reference();
    let (bundle, _) = train(&TrainConfig::default(), &scene.train).unwrap();
    let test = prepare_test(&bundle, &scene.test);
    let (objects, frames) = bundle.scorer().unwrap().score_frames(&test).unwrap();
    assert!(objects.iter().all(|o| (0.0..=1.0).contains(&o.score)));
    assert!(objects
        .iter()
        .all(|o| o.per_granularity.iter().all(|p| (0.0..=1.0).contains(p))));
    assert_eq!(frames.frames.len(), scene.test.frame_count() as usize);
    for f in &frames.frames {
        let min = objects
            .iter()
            .filter(|o| o.frame == f.frame)
            .map(|o| o.score)
            .fold(1.0, f64::min);
        assert_eq!(f.raw, min);
    }
}
