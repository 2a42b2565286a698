mod common;

use erpsel_core::demo;
use erpsel_core::macbeth::Judgment;
use erpsel_core::project::{
    cached_plan, cached_ranking, cached_scale, cached_weights, load, load_path, parse_project, save, save_path,
    to_canonical_json, validate_project, ProjectFile, Stage, StoreError,
};

/// Fills whatever caches the project can compute.
fn warm(p: &mut ProjectFile) {
    let ids: Vec<_> = p.candidates.iter().map(|c| c.id.clone()).collect();
    for id in ids {
        let _ = cached_plan(p, &id);
    }
    let matrices: Vec<_> = p.matrices.keys().cloned().collect();
    for m in matrices {
        let _ = cached_scale(p, &m);
    }
    let _ = cached_weights(p);
    let _ = cached_ranking(p);
}

#[test]
fn seeded_projects_round_trip_byte_identically() {
    for seed in 0..20 {
        let mut p = common::random_project(seed);
        if seed % 2 == 0 {
            warm(&mut p);
        }
        assert!(validate_project(&p).is_empty(), "seed {seed}: {:?}", validate_project(&p));
        let first = save(&p).unwrap();
        let back = load(&first).unwrap();
        assert_eq!(back, p, "seed {seed}");
        assert_eq!(save(&back).unwrap(), first, "seed {seed}");
    }
}

#[test]
fn demo_round_trips_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("demo.json");
    let mut p = demo::demo_project();
    warm(&mut p);
    save_path(&p, &path).unwrap();
    let bytes = std::fs::read_to_string(&path).unwrap();
    assert_eq!(bytes, to_canonical_json(&p));
    assert!(bytes.ends_with('\n'));
    assert_eq!(load_path(&path).unwrap(), p);
    assert!(!dir.path().join("demo.json.tmp").exists());
}

#[test]
fn validation_is_pure_and_save_does_not_repair() {
    let mut p = common::random_project(7);
    p.requirements.0[0].weight += 0.25;
    let snapshot = p.clone();
    let first = validate_project(&p);
    assert!(first.iter().any(|v| v.code == "weights-not-normalized"));
    assert_eq!(validate_project(&p), first);
    assert_eq!(p, snapshot);
    match save(&p) {
        Err(StoreError::Invalid(v)) => assert_eq!(v, first),
        other => panic!("expected invalid, got {other:?}"),
    }
    assert_eq!(p, snapshot);
    assert!(matches!(load(&to_canonical_json(&p)), Err(StoreError::Invalid(_))));
    assert_eq!(parse_project(&to_canonical_json(&p)).unwrap(), p);
}

#[test]
fn malformed_documents_report_where() {
    let good = to_canonical_json(&demo::demo_project());
    let mut v: serde_json::Value = serde_json::from_str(&good).unwrap();
    v["schema_version"] = 2.into();
    let e = parse_project(&v.to_string()).unwrap_err();
    assert!(matches!(e, StoreError::Version { .. }));
    assert_eq!(e.path().as_deref(), Some("schema_version"));

    let mut v: serde_json::Value = serde_json::from_str(&good).unwrap();
    v["candidates"][1]["id"] = 5.into();
    let e = parse_project(&v.to_string()).unwrap_err();
    assert_eq!(e.path().as_deref(), Some("candidates[1].id"));

    let mut v: serde_json::Value = serde_json::from_str(&good).unwrap();
    v["surprise"] = true.into();
    assert!(matches!(parse_project(&v.to_string()), Err(StoreError::Field { .. })));

    assert!(matches!(parse_project("{ not json"), Err(StoreError::Syntax { .. })));
}

#[test]
fn editing_inputs_marks_caches_stale() {
    let mut p = demo::demo_project();
    warm(&mut p);
    p.refresh_staleness();
    assert!(p.cache.ranking.as_ref().is_some_and(|c| !c.stale));
    let original = p.clone();

    let m = p.matrices.keys().find(|k| k.as_str() != "weighting").unwrap().clone();
    p.matrices.get_mut(&m).unwrap().judgments[0].judgment = Judgment::DontKnow;
    p.refresh_staleness();
    assert!(p.cache.scales[&m].stale);
    assert!(p.cache.ranking.as_ref().unwrap().stale);
    assert!(!p.cache.weights.as_ref().unwrap().stale);

    p.matrices = original.matrices.clone();
    p.refresh_staleness();
    assert_eq!(p, original);
}

#[test]
fn stages_move_one_forward_or_any_back() {
    let mut p = ProjectFile::new();
    assert_eq!(p.stage, Stage::ALL[0]);
    assert!(p.move_to(Stage::ALL[2]).is_err());
    for &s in &Stage::ALL[1..] {
        p.move_to(s).unwrap();
    }
    p.move_to(Stage::ALL[0]).unwrap();
    for s in Stage::ALL {
        assert_eq!(s.as_str().parse::<Stage>().unwrap(), s);
    }
}
