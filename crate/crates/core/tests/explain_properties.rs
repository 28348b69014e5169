use gridvad::explain::{explain_cell, explain_object};
use gridvad::pipeline::{prepare_test, train, TrainConfig};
use gridvad::synth::{generate_scene, AnomalyKind, SceneScript};

#[test]
fn class_posterior_is_the_cell_score_and_distributions_normalize() {
    let mut script = SceneScript::reference();
    script.train_frames = 2000;
    script.test_frames = 500;
    script.injections.retain(|i| i.start + i.frames <= 500);
    let scene = generate_scene(&script).unwrap();
    let config = TrainConfig {
        cell_sizes: vec![40, 80],
        ..TrainConfig::default()
    };
    let (bundle, _) = train(&config, &scene.train).unwrap();
    let before = serde_json::to_vec(&bundle).unwrap();
    let scorer = bundle.scorer().unwrap();
    let test = prepare_test(&bundle, &scene.test);
    let dets = test.detections();
    let prev = test.predecessors();

    let mut checked = 0;
    for (k, det) in dets.iter().enumerate() {
        let p = prev[k].map(|i| &dets[i]);
        let Some(detailed) = scorer.score_detailed(det, p).unwrap() else {
            continue;
        };
        for (g, gran) in detailed.iter().enumerate() {
            for cell in &gran.cells {
                let e = explain_cell(&scorer, g, &cell.evidence, det.class_id).unwrap();
                let c = e.distribution("C").unwrap();
                if cell.impossible {
                    assert!(c.impossible);
                } else {
                    assert_eq!(c.observed_probability.to_bits(), cell.probability.to_bits());
                }
                for d in &e.distributions {
                    let total: f64 = d.values.iter().map(|v| v.1).sum();
                    assert!((total - 1.0).abs() <= 1e-9, "{} sums to {total}", d.variable);
                }
                checked += 1;
            }
        }
        let full = explain_object(&scorer, det, p, None).unwrap();
        let scored = scorer.score_object(det, p).unwrap();
        assert_eq!(full.score.to_bits(), scored.score.to_bits());
    }
    assert!(checked > 1000);
    assert_eq!(serde_json::to_vec(&bundle).unwrap(), before, "explaining must not change the bundle");
}

#[test]
fn class_distribution_covers_trained_classes() {
    let scene = generate_scene(&SceneScript::reference()).unwrap();
    let (bundle, _) = train(&TrainConfig::default(), &scene.train).unwrap();
    let scorer = bundle.scorer().unwrap();
    let test = prepare_test(&bundle, &scene.test);
    let det = &test.detections()[test.len() / 2];
    let e = explain_object(&scorer, det, None, None).unwrap();
    for cell in &e.cells {
        let c = cell.distribution("C").unwrap();
        let labels: Vec<&str> = c.values.iter().map(|v| v.0.as_str()).collect();
        assert_eq!(labels, ["person", "bicycle"]);
        if !c.impossible {
            let total: f64 = c.values.iter().map(|v| v.1).sum();
            assert!((total - 1.0).abs() <= 1e-9);
        }
    }
}

#[test]
fn running_person_is_blamed_on_velocity() {
    let script = SceneScript::reference();
    let scene = generate_scene(&script).unwrap();
    let config = TrainConfig {
        cell_sizes: vec![40, 80],
        ..TrainConfig::default()
    };
    let (bundle, _) = train(&config, &scene.train).unwrap();
    let scorer = bundle.scorer().unwrap();
    let test = prepare_test(&bundle, &scene.test);

    let (k, inj) = script
        .injections
        .iter()
        .enumerate()
        .find(|(_, i)| i.kind == AnomalyKind::WrongSpeed)
        .unwrap();
    let region = scene.gt.tracks()[&(k as u64 + 1)][5];
    let r = scene.gt.regions()[region];
    let idx = test
        .detections()
        .iter()
        .position(|d| d.frame == r.frame && d.bbox == r.bbox)
        .unwrap();
    assert_eq!(test.detections()[idx].class_id, inj.class_id);
    let prev = test.predecessors()[idx].map(|p| &test.detections()[p]);
    let e = explain_object(&scorer, &test.detections()[idx], prev, None).unwrap();
    assert!(!e.cells.is_empty());
    for cell in &e.cells {
        let v = cell.distribution("V").unwrap();
        assert_eq!(v.observed, "lightning fast");
        // every value the network considers possible outranks it
        let nonzero = v.values.iter().filter(|x| x.1 > v.observed_probability).count();
        assert_eq!(v.rank, nonzero + 1);
        assert!(v.values.iter().all(|x| x.0 == v.observed || x.1 == 0.0 || x.1 > v.observed_probability));
    }
}
