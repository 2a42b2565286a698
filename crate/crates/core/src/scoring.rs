//! Elementary values, weighted-sum aggregation and ranking.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adaptation::QuantitativePerformance;
use crate::macbeth::Weights;
use crate::model::{CandidateId, CriterionId};

#[derive(Debug, Error, PartialEq)]
pub enum ScoringError {
    #[error("raw measure {0} is not finite")]
    NonFiniteMeasure(f64),
    #[error("value function anchors are inconsistent with its direction")]
    InvalidValueFunction,
    #[error("candidate `{candidate}`: criteria do not match the weights (missing {missing:?}, extra {extra:?})")]
    CriteriaMismatch { candidate: CandidateId, missing: Vec<CriterionId>, extra: Vec<CriterionId> },
    #[error("candidate `{candidate}`: value {value} for `{criterion}` is outside [0, 1]")]
    ValueOutOfRange { candidate: CandidateId, criterion: CriterionId, value: f64 },
    #[error("nothing to rank")]
    NoCandidates,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ValueDirection {
    Increasing,
    Decreasing,
}

/// Linear map from a raw measure onto [0, 1]: `bad_level` → 0, `good_level` → 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValueFunction {
    pub direction: ValueDirection,
    pub good_level: f64,
    pub bad_level: f64,
}

impl ValueFunction {
    pub fn increasing(bad_level: f64, good_level: f64) -> Self {
        Self { direction: ValueDirection::Increasing, good_level, bad_level }
    }

    pub fn decreasing(good_level: f64, bad_level: f64) -> Self {
        Self { direction: ValueDirection::Decreasing, good_level, bad_level }
    }

    pub fn validate(&self) -> Result<(), ScoringError> {
        let ok = self.good_level.is_finite()
            && self.bad_level.is_finite()
            && match self.direction {
                ValueDirection::Increasing => self.good_level > self.bad_level,
                ValueDirection::Decreasing => self.good_level < self.bad_level,
            };
        if ok {
            Ok(())
        } else {
            Err(ScoringError::InvalidValueFunction)
        }
    }
}

pub fn to_elementary_value(raw: f64, vf: &ValueFunction) -> Result<f64, ScoringError> {
    vf.validate()?;
    if !raw.is_finite() {
        return Err(ScoringError::NonFiniteMeasure(raw));
    }
    let t = (raw - vf.bad_level) / (vf.good_level - vf.bad_level);
    Ok(t.clamp(0.0, 1.0))
}

/// Which adaptation expression feeds a quantitative criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Measure {
    FunctionalCoverage,
    AdaptationRisk,
    AdaptationCost,
    AdaptationDegree,
}

impl Measure {
    pub fn of(self, p: &QuantitativePerformance) -> f64 {
        match self {
            Measure::FunctionalCoverage => p.functional_coverage,
            Measure::AdaptationRisk => p.adaptation_risk,
            Measure::AdaptationCost => p.adaptation_cost,
            Measure::AdaptationDegree => p.adaptation_degree,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantitativeCriterion {
    pub measure: Measure,
    pub value_function: ValueFunction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Macbeth,
    Quantitative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriterionValue {
    pub value: f64,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformanceVector {
    pub candidate: CandidateId,
    pub values: BTreeMap<CriterionId, CriterionValue>,
}

impl PerformanceVector {
    pub fn new(candidate: CandidateId) -> Self {
        Self { candidate, values: BTreeMap::new() }
    }

    pub fn insert(&mut self, criterion: CriterionId, value: f64, provenance: Provenance) {
        self.values.insert(criterion, CriterionValue { value, provenance });
    }

    pub fn get(&self, criterion: &CriterionId) -> Option<f64> {
        self.values.get(criterion).map(|v| v.value)
    }
}

fn check_cover(v: &PerformanceVector, weights: &Weights) -> Result<(), ScoringError> {
    let missing: Vec<_> = weights.0.keys().filter(|k| !v.values.contains_key(*k)).cloned().collect();
    let extra: Vec<_> = v.values.keys().filter(|k| !weights.0.contains_key(*k)).cloned().collect();
    if !missing.is_empty() || !extra.is_empty() {
        return Err(ScoringError::CriteriaMismatch { candidate: v.candidate.clone(), missing, extra });
    }
    for (c, cv) in &v.values {
        if !(0.0..=1.0).contains(&cv.value) {
            return Err(ScoringError::ValueOutOfRange {
                candidate: v.candidate.clone(),
                criterion: c.clone(),
                value: cv.value,
            });
        }
    }
    Ok(())
}

/// Weighted sum Σ λ_i V_i.
pub fn aggregate(v: &PerformanceVector, weights: &Weights) -> Result<f64, ScoringError> {
    check_cover(v, weights)?;
    Ok(weights.iter().map(|(c, w)| w * v.values[c].value).sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedEntry {
    pub candidate: CandidateId,
    pub overall: f64,
    pub breakdown: BTreeMap<CriterionId, CriterionValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedResult {
    pub entries: Vec<RankedEntry>,
    pub weights: Weights,
}

impl RankedResult {
    pub fn order(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.candidate.as_str()).collect()
    }
}

/// Best first; equal scores fall back to ascending candidate id.
pub fn rank(vectors: &[PerformanceVector], weights: &Weights) -> Result<RankedResult, ScoringError> {
    if vectors.is_empty() {
        return Err(ScoringError::NoCandidates);
    }
    let mut entries = vectors
        .iter()
        .map(|v| {
            Ok(RankedEntry { candidate: v.candidate.clone(), overall: aggregate(v, weights)?, breakdown: v.values.clone() })
        })
        .collect::<Result<Vec<_>, ScoringError>>()?;
    entries.sort_by(|a, b| b.overall.total_cmp(&a.overall).then_with(|| a.candidate.cmp(&b.candidate)));
    Ok(RankedResult { entries, weights: weights.clone() })
}
