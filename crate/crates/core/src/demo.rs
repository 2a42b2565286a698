//! Worked example: three ERP packages judged on functional coverage,
//! adaptation risk, total cost of ownership and technical performance.
//!
//! The matrices below are the judgments as a decision maker entered them; the
//! `PRINTED_*` constants are the scales and weights reported for them by
//! M-MACBETH, rounded to two (scales) or four (weights) decimals.

use std::collections::BTreeMap;

use crate::adaptation::{AdaptationInstance, AdaptationStrategy, Mismatch};
use crate::macbeth::{Judgment, JudgmentMatrix, MatrixContext, Weights};
use crate::model::{
    Candidate, CandidateId, CriterionId, CriterionNode, LeafKind, MatchThresholds, Requirement,
    RequirementSet, ScreeningCriterion, TailoringType,
};
use crate::project::{ProjectFile, Stage};
use crate::scoring::{Measure, PerformanceVector, Provenance, QuantitativeCriterion, ValueFunction};

pub const SAP: &str = "SAP";
pub const ORACLE: &str = "ORACLE";
pub const MICROSOFT: &str = "MICROSOFT";

pub const FC: &str = "FC";
pub const RA: &str = "RA";
pub const TCO: &str = "TCO";
pub const TP: &str = "TP";

/// Leaf criteria in the column order of the scores table.
pub const CRITERIA: [&str; 4] = [FC, RA, TCO, TP];

/// Weights as printed: FC, RA, TCO, TP.
pub const PRINTED_WEIGHTS: [f64; 4] = [0.3231, 0.2769, 0.1692, 0.2308];

/// Per-criterion values (FC, RA, TCO, TP) and overall score as printed.
pub const PRINTED_SCORES: [(&str, [f64; 4], f64); 3] = [
    (SAP, [0.83, 0.73, 0.35, 0.92], 0.74),
    (ORACLE, [0.58, 0.33, 0.71, 0.75], 0.57),
    (MICROSOFT, [0.33, 0.53, 0.88, 0.58], 0.54),
];

/// Security scale in matrix order sup, SAP, Oracle, Microsoft Dyn, inf.
pub const PRINTED_SECURITY_SCALE: [f64; 5] = [1.00, 0.73, 0.45, 0.18, 0.00];

fn a(k: u8) -> Judgment {
    Judgment::Category(k)
}

fn range(lo: u8, hi: u8) -> Judgment {
    Judgment::Range(lo, hi)
}

fn matrix(context: MatrixContext, order: &[&str], anchors: (bool, bool), upper: &[&[Judgment]]) -> JudgmentMatrix {
    let mut m = JudgmentMatrix::new(context, order.iter().map(|&s| s.into()).collect()).with_anchors(anchors.0, anchors.1);
    for (i, row) in upper.iter().enumerate() {
        for (k, &j) in row.iter().enumerate() {
            m = m.judge(order[i], order[i + 1 + k], j);
        }
    }
    m
}

fn criterion(id: &str) -> MatrixContext {
    MatrixContext::Criterion(CriterionId::new(id))
}

/// Security judgments: sup ≻ SAP ≻ Oracle ≻ Microsoft Dyn ≻ inf.
pub fn security_matrix() -> JudgmentMatrix {
    matrix(
        criterion("security"),
        &["sup", "SAP", "Oracle", "Microsoft Dyn", "inf"],
        (true, true),
        &[&[a(3), a(4), a(5), a(5)], &[a(3), a(4), a(4)], &[range(3, 4), a(3)], &[a(2)]],
    )
}

pub fn functional_coverage_matrix() -> JudgmentMatrix {
    matrix(
        criterion(FC),
        &["good", SAP, ORACLE, MICROSOFT, "bad"],
        (true, true),
        &[&[a(2), a(3), a(4), a(6)], &[a(3), a(4), a(6)], &[a(3), a(4)], &[a(3)]],
    )
}

pub fn adaptation_risk_matrix() -> JudgmentMatrix {
    matrix(
        criterion(RA),
        &["good", SAP, MICROSOFT, ORACLE, "bad"],
        (true, true),
        &[&[a(4), a(4), a(5), a(6)], &[a(3), range(4, 5), a(6)], &[range(3, 4), a(4)], &[a(4)]],
    )
}

pub fn tco_matrix() -> JudgmentMatrix {
    matrix(
        criterion(TCO),
        &["good", MICROSOFT, ORACLE, SAP, "bad"],
        (true, true),
        &[&[a(2), a(3), a(4), a(5)], &[a(3), a(4), a(5)], &[a(4), a(5)], &[a(4)]],
    )
}

pub fn technical_performance_matrix() -> JudgmentMatrix {
    matrix(
        criterion(TP),
        &["good", SAP, ORACLE, MICROSOFT, "bad"],
        (true, true),
        &[&[a(1), a(2), a(2), a(6)], &[a(2), a(2), a(5)], &[a(2), a(4)], &[a(4)]],
    )
}

/// Reference profiles [FC] ≻ [RA] ≻ [TP] ≻ [TCO] ≻ [Bad].
pub fn weighting_matrix() -> JudgmentMatrix {
    matrix(
        MatrixContext::Weighting,
        &[FC, RA, TP, TCO, "Bad"],
        (false, true),
        &[&[a(3), a(4), a(4), a(6)], &[a(3), a(4), a(6)], &[a(4), a(5)], &[a(5)]],
    )
}

/// Criterion matrices keyed by criterion id.
pub fn criterion_matrices() -> Vec<(&'static str, JudgmentMatrix)> {
    vec![
        (FC, functional_coverage_matrix()),
        (RA, adaptation_risk_matrix()),
        (TCO, tco_matrix()),
        (TP, technical_performance_matrix()),
    ]
}

pub fn printed_weights() -> Weights {
    CRITERIA.iter().zip(PRINTED_WEIGHTS).map(|(c, w)| (CriterionId::new(*c), w)).collect()
}

pub fn printed_vectors() -> Vec<PerformanceVector> {
    PRINTED_SCORES
        .iter()
        .map(|(id, values, _)| {
            let mut v = PerformanceVector::new(CandidateId::new(*id));
            for (c, &x) in CRITERIA.iter().zip(values) {
                v.insert(CriterionId::new(*c), x, Provenance::Macbeth);
            }
            v
        })
        .collect()
}

/// A complete project around the worked example: all four criteria judged
/// with MACBETH, plus requirements, gap data and adaptation options for each
/// package.
pub fn demo_project() -> ProjectFile {
    let mut p = ProjectFile::new();
    p.name = "ERP selection demo".into();
    p.stage = Stage::GlobalEvaluation;

    let reqs = [
        ("R1", "Multi-site inventory", "logistics", 0.3),
        ("R2", "Consolidated financial reporting", "finance", 0.25),
        ("R3", "Payroll localization", "hr", 0.2),
        ("R4", "Production scheduling", "manufacturing", 0.15),
        ("R5", "Customer portal", "sales", 0.1),
    ];
    p.requirements = RequirementSet::new(
        reqs.iter()
            .map(|&(id, label, area, w)| {
                let mut r = Requirement::new(id, label, w);
                r.functional_area = area.into();
                r
            })
            .collect(),
    );
    for &(id, ..) in &reqs {
        p.thresholds.insert(id.into(), MatchThresholds { target_level: 0.9, worst_acceptable: 0.4 });
    }

    let packages = [
        (SAP, "SAP S/4", "SAP SE", 900.0, [1.0, 0.9, 0.6, 1.0, 0.5]),
        (ORACLE, "Oracle ERP Cloud", "Oracle", 750.0, [0.8, 1.0, 0.5, 0.7, 0.6]),
        (MICROSOFT, "Dynamics 365", "Microsoft", 600.0, [0.7, 0.8, 0.9, 0.4, 1.0]),
    ];
    for &(id, name, vendor, tco, ref levels) in &packages {
        let mut c = Candidate::new(id, name);
        c.vendor = vendor.into();
        c.screening.industry_types.insert("manufacturing".into());
        c.screening.organization_sizes.insert("large".into());
        c.screening.platforms.insert("linux".into());
        c.screening.tco_estimate = tco;
        p.candidates.push(c);
        let row: BTreeMap<_, _> = reqs.iter().zip(levels).map(|(r, &lvl)| (r.0.into(), lvl)).collect();

        let mismatches = reqs
            .iter()
            .zip(levels)
            .filter(|(_, &lvl)| lvl < 1.0)
            .map(|(&(rid, _, _, w), &lvl)| Mismatch {
                requirement: rid.into(),
                weight: w,
                satisfaction: lvl,
                strategies: vec![
                    AdaptationStrategy::new(TailoringType::Configuration, (lvl + 0.15).min(1.0), 0.1, 10.0),
                    AdaptationStrategy::new(TailoringType::ErpProgramming, (lvl + 0.3).min(1.0), 0.3, 25.0),
                    AdaptationStrategy::new(TailoringType::PackageCodeModification, 1.0, 0.6, 40.0),
                ],
            })
            .collect();
        p.assessments.insert(id.into(), row);
        p.adaptation.insert(id.into(), AdaptationInstance { candidate: id.into(), budget: 50.0, mismatches });
    }
    p.screening = vec![
        ScreeningCriterion::IndustryType("manufacturing".into()),
        ScreeningCriterion::TcoCeiling(1000.0),
    ];

    p.criteria = Some(CriterionNode::group(
        "overall",
        "ERP selection",
        vec![
            CriterionNode::group(
                "functional",
                "Functional",
                vec![
                    CriterionNode::leaf(FC, "Functional coverage", LeafKind::MacbethJudged),
                    CriterionNode::leaf(RA, "Adaptation risk", LeafKind::MacbethJudged),
                ],
            ),
            CriterionNode::group(
                "non-functional",
                "Non-functional",
                vec![
                    CriterionNode::leaf(TCO, "Total cost of ownership", LeafKind::MacbethJudged),
                    CriterionNode::leaf(TP, "Technical performance", LeafKind::MacbethJudged),
                ],
            ),
        ],
    ));
    for (id, m) in criterion_matrices() {
        p.matrices.insert(id.into(), m);
    }
    p.matrices.insert("weighting".into(), weighting_matrix());
    p
}

/// The demo project with functional coverage and adaptation risk measured
/// from each package's adaptation plan instead of judged, so budgets matter.
pub fn mixed_project() -> ProjectFile {
    let mut p = demo_project();
    p.name = "ERP selection demo (measured coverage and risk)".into();
    fn retag(node: &mut CriterionNode) {
        if [FC, RA].contains(&node.id.as_str()) {
            node.leaf = Some(LeafKind::Quantitative);
        }
        node.children.iter_mut().for_each(retag);
    }
    retag(p.criteria.as_mut().unwrap());
    p.matrices.remove(&FC.into());
    p.matrices.remove(&RA.into());
    p.value_functions.insert(
        FC.into(),
        QuantitativeCriterion { measure: Measure::FunctionalCoverage, value_function: ValueFunction::increasing(0.6, 1.0) },
    );
    p.value_functions.insert(
        RA.into(),
        QuantitativeCriterion { measure: Measure::AdaptationRisk, value_function: ValueFunction::decreasing(0.0, 0.6) },
    );
    p
}
