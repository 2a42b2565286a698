//! Derived results computed from a project: screening, gap table, adaptation
//! plans, scales, weights and the final ranking.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{input_hash, Cached, PlanRecord, ProjectFile};
use crate::adaptation::{optimize_adaptation, performance_profile, AdaptationError, AdaptationInstance};
use crate::macbeth::{derive_scale, derive_weights, CardinalScale, ConsistencyReport, MacbethError, MatrixContext, Weights};
use crate::model::{
    classify_match, screen_candidates, CandidateId, CriterionId, LeafKind, MatchingPattern, MatrixId, ModelError,
    RequirementId, ScreeningOutcome,
};
use crate::scoring::{rank, to_elementary_value, PerformanceVector, Provenance, RankedResult, ScoringError};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{0}")]
    Precondition(String),
    #[error("no {kind} `{id}`")]
    NotFound { kind: &'static str, id: String },
    #[error("matrix `{matrix}` is inconsistent; conflicting judgments: {}", list(&.report.conflicts))]
    Inconsistent { matrix: MatrixId, report: ConsistencyReport },
    #[error("matrix `{matrix}`: {source}")]
    Macbeth { matrix: MatrixId, source: MacbethError },
    #[error(transparent)]
    Adaptation(#[from] AdaptationError),
    #[error(transparent)]
    Scoring(#[from] ScoringError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn list<T: std::fmt::Display>(items: &[T]) -> String {
    items.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

fn precondition(msg: impl Into<String>) -> PipelineError {
    PipelineError::Precondition(msg.into())
}

pub fn screening(p: &ProjectFile) -> ScreeningOutcome {
    screen_candidates(&p.candidates, &p.screening)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub candidate: CandidateId,
    pub requirement: RequirementId,
    pub satisfaction: f64,
    pub pattern: MatchingPattern,
}

/// Matching pattern of every screened candidate against every requirement.
pub fn gap_table(p: &ProjectFile) -> Result<Vec<GapRow>, PipelineError> {
    let mut rows = Vec::new();
    for c in screening(p).survivors {
        let assessed = p
            .assessments
            .get(&c.id)
            .ok_or_else(|| precondition(format!("candidate `{}` has not been assessed", c.id)))?;
        for r in p.requirements.iter() {
            let t = p
                .thresholds
                .get(&r.id)
                .ok_or_else(|| precondition(format!("requirement `{}` has no match thresholds", r.id)))?;
            let a = *assessed
                .get(&r.id)
                .ok_or_else(|| precondition(format!("`{}` lacks a level for `{}`", c.id, r.id)))?;
            rows.push(GapRow {
                candidate: c.id.clone(),
                requirement: r.id.clone(),
                satisfaction: a,
                pattern: classify_match(a, t)?,
            });
        }
    }
    Ok(rows)
}

/// The stored instance (or an empty one) with the budget optionally replaced.
fn effective_instance(
    p: &ProjectFile,
    candidate: &CandidateId,
    budget: Option<f64>,
) -> Result<AdaptationInstance, PipelineError> {
    let mut inst = p.adaptation.get(candidate).cloned().unwrap_or_else(|| AdaptationInstance {
        candidate: candidate.clone(),
        budget: 0.0,
        mismatches: Vec::new(),
    });
    if let Some(b) = budget {
        if !(b.is_finite() && b >= 0.0) {
            return Err(AdaptationError::InvalidBudget(b).into());
        }
        inst.budget = b;
    }
    Ok(inst)
}

pub(super) fn plan_hash(p: &ProjectFile, candidate: &CandidateId, budget: Option<f64>) -> Option<String> {
    let inst = effective_instance(p, candidate, budget).ok()?;
    p.candidate(candidate)?;
    Some(input_hash(&(&p.requirements, p.assessments.get(candidate), &inst)))
}

/// Optimal adaptation plan and the resulting quantitative performance.
pub fn plan_for(p: &ProjectFile, candidate: &CandidateId, budget: Option<f64>) -> Result<PlanRecord, PipelineError> {
    if p.candidate(candidate).is_none() {
        return Err(PipelineError::NotFound { kind: "candidate", id: candidate.to_string() });
    }
    let row = p
        .assessments
        .get(candidate)
        .ok_or_else(|| precondition(format!("candidate `{candidate}` has not been assessed")))?;
    let inst = effective_instance(p, candidate, budget)?;
    let plan = optimize_adaptation(&inst)?;
    let performance = performance_profile(&p.requirements, row, &inst, &plan)?;
    Ok(PlanRecord { plan, performance })
}

fn matrix<'a>(p: &'a ProjectFile, id: &MatrixId) -> Result<&'a crate::macbeth::JudgmentMatrix, PipelineError> {
    p.matrices.get(id).ok_or_else(|| PipelineError::NotFound { kind: "matrix", id: id.to_string() })
}

fn macbeth_err(matrix: &MatrixId, e: MacbethError) -> PipelineError {
    match e {
        MacbethError::Inconsistent(report) => PipelineError::Inconsistent { matrix: matrix.clone(), report },
        source => PipelineError::Macbeth { matrix: matrix.clone(), source },
    }
}

pub(super) fn scale_hash(p: &ProjectFile, id: &MatrixId) -> Option<String> {
    p.matrices.get(id).map(input_hash)
}

pub fn scale_for(p: &ProjectFile, id: &MatrixId) -> Result<CardinalScale, PipelineError> {
    derive_scale(matrix(p, id)?).map_err(|e| macbeth_err(id, e))
}

pub fn weighting_matrix_id(p: &ProjectFile) -> Option<&MatrixId> {
    p.matrices.iter().find(|(_, m)| m.context == MatrixContext::Weighting).map(|(id, _)| id)
}

pub(super) fn weights_hash(p: &ProjectFile) -> Option<String> {
    weighting_matrix_id(p).and_then(|id| scale_hash(p, id))
}

fn leaves(p: &ProjectFile) -> Result<Vec<(CriterionId, LeafKind)>, PipelineError> {
    let tree = p.criteria.as_ref().ok_or_else(|| precondition("no criteria tree defined"))?;
    Ok(tree.leaves().into_iter().map(|(id, k)| (id.clone(), k)).collect())
}

/// Criteria weights from the weighting matrix; every leaf must have a profile.
pub fn weights(p: &ProjectFile) -> Result<Weights, PipelineError> {
    let id = weighting_matrix_id(p).ok_or_else(|| precondition("no weighting matrix defined"))?;
    let w = derive_weights(matrix(p, id)?).map_err(|e| macbeth_err(id, e))?;
    let missing: Vec<_> = leaves(p)?.into_iter().filter(|(l, _)| w.get(l).is_none()).map(|(l, _)| l).collect();
    if !missing.is_empty() {
        return Err(precondition(format!("weighting matrix lacks profiles for {}", list(&missing))));
    }
    Ok(w)
}

/// Elementary values of every screened candidate on every leaf criterion.
pub fn performance_vectors(p: &ProjectFile, budget: Option<f64>) -> Result<Vec<PerformanceVector>, PipelineError> {
    let leaves = leaves(p)?;
    let survivors = screening(p).survivors;
    let mut scales = BTreeMap::new();
    for (leaf, kind) in &leaves {
        if *kind == LeafKind::MacbethJudged {
            let (mid, _) = p
                .matrices
                .iter()
                .find(|(_, m)| m.context == MatrixContext::Criterion(leaf.clone()))
                .ok_or_else(|| precondition(format!("criterion `{leaf}` has no judgment matrix")))?;
            scales.insert(leaf.clone(), (mid.clone(), scale_for(p, mid)?));
        }
    }
    let mut out = Vec::new();
    for c in &survivors {
        let mut v = PerformanceVector::new(c.id.clone());
        let mut plan = None;
        for (leaf, kind) in &leaves {
            match kind {
                LeafKind::MacbethJudged => {
                    let (mid, scale) = &scales[leaf];
                    let x = scale
                        .value(&c.id.as_str().into())
                        .ok_or_else(|| precondition(format!("candidate `{}` is not in matrix `{mid}`", c.id)))?;
                    v.insert(leaf.clone(), x, Provenance::Macbeth);
                }
                LeafKind::Quantitative => {
                    let q = p
                        .value_functions
                        .get(leaf)
                        .ok_or_else(|| precondition(format!("criterion `{leaf}` has no value function")))?;
                    if plan.is_none() {
                        plan = Some(plan_for(p, &c.id, budget)?);
                    }
                    let raw = q.measure.of(&plan.as_ref().unwrap().performance);
                    v.insert(leaf.clone(), to_elementary_value(raw, &q.value_function)?, Provenance::Quantitative);
                }
            }
        }
        out.push(v);
    }
    Ok(out)
}

pub(super) fn ranking_hash(p: &ProjectFile, budget: Option<f64>) -> String {
    input_hash(&(
        &p.requirements,
        &p.candidates,
        &p.screening,
        &p.assessments,
        &p.adaptation,
        &p.criteria,
        &p.matrices,
        &p.value_functions,
        budget,
    ))
}

/// Overall scores of the screened candidates, best first.
pub fn ranking(p: &ProjectFile, budget: Option<f64>) -> Result<RankedResult, PipelineError> {
    let w = weights(p)?;
    let vectors = performance_vectors(p, budget)?;
    if vectors.is_empty() {
        return Err(precondition("no candidate survives screening"));
    }
    Ok(rank(&vectors, &w)?)
}

fn fresh<'a, T>(entry: Option<&'a Cached<T>>, hash: &str) -> Option<&'a T> {
    entry.filter(|c| !c.stale && c.input_hash == hash).map(|c| &c.value)
}

/// `plan_for` at the stored budget, served from or written to the cache.
pub fn cached_plan(p: &mut ProjectFile, candidate: &CandidateId) -> Result<PlanRecord, PipelineError> {
    let hash = plan_hash(p, candidate, None);
    if let Some(h) = &hash {
        if let Some(v) = fresh(p.cache.plans.get(candidate), h) {
            return Ok(v.clone());
        }
    }
    let value = plan_for(p, candidate, None)?;
    let input_hash = hash.expect("candidate exists");
    p.cache.plans.insert(candidate.clone(), Cached { input_hash, stale: false, value: value.clone() });
    Ok(value)
}

pub fn cached_scale(p: &mut ProjectFile, id: &MatrixId) -> Result<CardinalScale, PipelineError> {
    let hash = scale_hash(p, id).ok_or_else(|| PipelineError::NotFound { kind: "matrix", id: id.to_string() })?;
    if let Some(v) = fresh(p.cache.scales.get(id), &hash) {
        return Ok(v.clone());
    }
    let value = scale_for(p, id)?;
    p.cache.scales.insert(id.clone(), Cached { input_hash: hash, stale: false, value: value.clone() });
    Ok(value)
}

pub fn cached_weights(p: &mut ProjectFile) -> Result<Weights, PipelineError> {
    if let Some(h) = weights_hash(p) {
        if let Some(v) = fresh(p.cache.weights.as_ref(), &h) {
            return Ok(v.clone());
        }
    }
    let value = weights(p)?;
    let input_hash = weights_hash(p).expect("weighting matrix exists");
    p.cache.weights = Some(Cached { input_hash, stale: false, value: value.clone() });
    Ok(value)
}

pub fn cached_ranking(p: &mut ProjectFile) -> Result<RankedResult, PipelineError> {
    let hash = ranking_hash(p, None);
    if let Some(v) = fresh(p.cache.ranking.as_ref(), &hash) {
        return Ok(v.clone());
    }
    let value = ranking(p, None)?;
    p.cache.ranking = Some(Cached { input_hash: hash, stale: false, value: value.clone() });
    Ok(value)
}
