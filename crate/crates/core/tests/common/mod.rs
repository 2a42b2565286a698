//! Seeded generators shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use erpsel_core::adaptation::{AdaptationInstance, AdaptationStrategy, Mismatch};
use erpsel_core::macbeth::{Judgment, JudgmentMatrix, MatrixContext};
use erpsel_core::model::{
    Candidate, CriterionNode, LeafKind, MatchThresholds, Requirement, RequirementSet, ScreeningCriterion,
    TailoringType,
};
use erpsel_core::project::{ProjectFile, Stage};
use erpsel_core::scoring::{Measure, QuantitativeCriterion, ValueFunction};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Requirement weights that sum to one.
pub fn weights(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|w| w / total).collect()
}

/// An adaptation instance with `n` mismatches of `k` strategies each.
pub fn adaptation_instance(rng: &mut ChaCha8Rng, n: usize, k: usize) -> AdaptationInstance {
    let w = weights(rng, n);
    let mismatches = (0..n)
        .map(|j| {
            let a = (rng.random_range(0.0..0.95f64) * 100.0).round() / 100.0;
            let strategies = (0..k)
                .map(|_| {
                    let t = *TailoringType::ALL.choose(rng).unwrap();
                    let b = rng.random_range(a + 0.01..=1.0f64).min(1.0);
                    let r = rng.random_range(0.0..=1.0);
                    let c = (rng.random_range(0.0..40.0f64) * 100.0).round() / 100.0;
                    AdaptationStrategy::new(t, b, r, c)
                })
                .collect();
            Mismatch { requirement: format!("R{j}").as_str().into(), weight: w[j], satisfaction: a, strategies }
        })
        .collect();
    let budget = (rng.random_range(0.0..(20.0 * n as f64 + 1.0)) * 100.0).round() / 100.0;
    AdaptationInstance { candidate: "X".into(), budget, mismatches }
}

pub fn element_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("e{i}")).collect()
}

/// Judgments read off an integer scale (strictly decreasing), so the matrix
/// is consistent by construction: category = difference clamped to 1..=6,
/// optionally widened to a range.
pub fn consistent_matrix(rng: &mut ChaCha8Rng, n: usize) -> JudgmentMatrix {
    let names = element_names(n);
    let mut m = JudgmentMatrix::new(MatrixContext::Weighting, names.iter().map(|s| s.as_str().into()).collect());
    // strictly decreasing values with steps 1..=2 give differences that are
    // reproduced exactly by a category scale with unit 1
    let mut values = vec![0i64; n];
    for i in (0..n.saturating_sub(1)).rev() {
        values[i] = values[i + 1] + rng.random_range(1..=2);
    }
    for x in 0..n {
        for y in x + 1..n {
            let d = values[x] - values[y];
            if d > 6 || rng.random_bool(0.2) {
                continue;
            }
            let k = d as u8;
            let j = if rng.random_bool(0.2) && k < 6 { Judgment::Range(k, k + 1) } else { Judgment::Category(k) };
            m = m.judge(&names[x], &names[y], j);
        }
    }
    m
}

/// A matrix with an embedded contradiction plus random noise judgments.
pub fn inconsistent_matrix(rng: &mut ChaCha8Rng, n: usize) -> JudgmentMatrix {
    assert!(n >= 3);
    let names = element_names(n);
    let mut m = JudgmentMatrix::new(MatrixContext::Weighting, names.iter().map(|s| s.as_str().into()).collect());
    let x = rng.random_range(0..n - 2);
    let y = rng.random_range(x + 1..n - 1);
    let z = rng.random_range(y + 1..n);
    let mut planted = BTreeMap::new();
    match rng.random_range(0..3) {
        // x ≻ y ≻ z but x ~ z
        0 => {
            planted.insert((x, y), Judgment::Category(rng.random_range(1..=6)));
            planted.insert((y, z), Judgment::Category(rng.random_range(1..=6)));
            planted.insert((x, z), Judgment::Category(0));
        }
        // the wider pair judged weaker than one of its parts
        1 => {
            let big = rng.random_range(3..=6);
            planted.insert((y, z), Judgment::Category(big));
            planted.insert((x, z), Judgment::Category(rng.random_range(1..big)));
        }
        // x-y and y-z both large, x-z small
        _ => {
            planted.insert((x, y), Judgment::Category(rng.random_range(3..=6)));
            planted.insert((y, z), Judgment::Category(rng.random_range(3..=6)));
            planted.insert((x, z), Judgment::Category(rng.random_range(1..=3)));
        }
    }
    for a in 0..n {
        for b in a + 1..n {
            let j = match planted.get(&(a, b)) {
                Some(j) => *j,
                None if rng.random_bool(0.4) => Judgment::Category(rng.random_range(1..=6)),
                None => continue,
            };
            m = m.judge(&names[a], &names[b], j);
        }
    }
    m
}

/// A valid project with random content drawn from `seed`.
pub fn random_project(seed: u64) -> ProjectFile {
    let mut rng = rng(seed);
    let mut p = ProjectFile::new();
    p.name = format!("seeded project {seed}");
    p.stage = *Stage::ALL.choose(&mut rng).unwrap();

    let n_req = rng.random_range(1..=8);
    let w = weights(&mut rng, n_req);
    p.requirements = RequirementSet::new(
        (0..n_req)
            .map(|j| {
                let mut r = Requirement::new(format!("R{j}"), format!("requirement {j}"), w[j]);
                r.functional_area = ["finance", "hr", "logistics"][j % 3].into();
                r.description = format!("seed {seed} item {j} ünïcode \"quoted\"");
                r
            })
            .collect(),
    );
    for r in p.requirements.iter() {
        let t = rng.random_range(0.5..=1.0);
        let worst = rng.random_range(0.0..=t);
        p.thresholds.insert(r.id.clone(), MatchThresholds { target_level: t, worst_acceptable: worst });
    }

    let n_cand = rng.random_range(1..=5);
    for i in 0..n_cand {
        let mut c = Candidate::new(format!("C{i}"), format!("Package {i}"));
        c.vendor = format!("Vendor {}", i % 2);
        c.screening.tco_estimate = rng.random_range(100.0..2000.0);
        c.screening.industry_types.insert("retail".into());
        if rng.random_bool(0.5) {
            c.screening.platforms.insert("linux".into());
        }
        p.candidates.push(c);
    }
    if rng.random_bool(0.5) {
        p.screening.push(ScreeningCriterion::TcoCeiling(rng.random_range(500.0..2500.0)));
    }
    p.screening.push(ScreeningCriterion::IndustryType("retail".into()));

    for c in p.candidates.clone() {
        if rng.random_bool(0.2) {
            continue;
        }
        let row: BTreeMap<_, _> = p
            .requirements
            .iter()
            .map(|r| {
                let a = if rng.random_bool(0.3) { 1.0 } else { rng.random_range(0.0..1.0) };
                (r.id.clone(), a)
            })
            .collect();
        let mut mismatches = Vec::new();
        for r in p.requirements.iter() {
            let a = row[&r.id];
            if a >= 1.0 || !rng.random_bool(0.8) {
                continue;
            }
            let strategies = (0..rng.random_range(1..=3))
                .map(|_| {
                    let t = *TailoringType::ALL.choose(&mut rng).unwrap();
                    let b = rng.random_range(a..=1.0f64).max(a + 1e-6).min(1.0);
                    AdaptationStrategy::new(t, b, rng.random_range(0.0..=1.0), rng.random_range(0.0..30.0))
                })
                .collect();
            mismatches.push(Mismatch { requirement: r.id.clone(), weight: r.weight, satisfaction: a, strategies });
        }
        p.assessments.insert(c.id.clone(), row);
        p.adaptation.insert(
            c.id.clone(),
            AdaptationInstance { candidate: c.id.clone(), budget: rng.random_range(0.0..60.0), mismatches },
        );
    }

    let mut leaves = vec![
        CriterionNode::leaf("quality", "Quality", LeafKind::MacbethJudged),
        CriterionNode::leaf("coverage", "Coverage", LeafKind::Quantitative),
    ];
    if rng.random_bool(0.5) {
        leaves.push(CriterionNode::leaf("risk", "Risk", LeafKind::Quantitative));
    }
    let leaf_ids: Vec<String> = leaves.iter().map(|l| l.id.to_string()).collect();
    p.criteria = Some(CriterionNode::group("root", "All", leaves));

    let mut order: Vec<String> = p.candidates.iter().map(|c| c.id.to_string()).collect();
    order.shuffle(&mut rng);
    let mut elements = vec!["good".to_owned()];
    elements.extend(order);
    elements.push("bad".into());
    let mut quality = JudgmentMatrix::new(
        MatrixContext::Criterion("quality".into()),
        elements.iter().map(|s| s.as_str().into()).collect(),
    )
    .with_anchors(true, true);
    for x in 0..elements.len() {
        for y in x + 1..elements.len() {
            if rng.random_bool(0.5) {
                let lo = rng.random_range(1..=5);
                let j = if rng.random_bool(0.3) { Judgment::Range(lo, lo + 1) } else { Judgment::Category(lo) };
                quality = quality.judge(&elements[x], &elements[y], j);
            }
        }
    }
    p.matrices.insert("quality".into(), quality);

    let mut profiles = leaf_ids.clone();
    profiles.shuffle(&mut rng);
    profiles.push("Bad".into());
    let mut weighting =
        JudgmentMatrix::new(MatrixContext::Weighting, profiles.iter().map(|s| s.as_str().into()).collect())
            .with_anchors(false, true);
    for x in 0..profiles.len() - 1 {
        let k = rng.random_range(1..=6);
        weighting = weighting.judge(&profiles[x], "Bad", Judgment::Category(k));
    }
    p.matrices.insert("weighting".into(), weighting);

    p.value_functions.insert(
        "coverage".into(),
        QuantitativeCriterion { measure: Measure::FunctionalCoverage, value_function: ValueFunction::increasing(0.3, 1.0) },
    );
    if leaf_ids.iter().any(|l| l == "risk") {
        p.value_functions.insert(
            "risk".into(),
            QuantitativeCriterion { measure: Measure::AdaptationRisk, value_function: ValueFunction::decreasing(0.0, 0.8) },
        );
    }
    p
}
