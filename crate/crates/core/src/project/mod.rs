//! The persisted project: everything a selection study needs, plus cached
//! derived results keyed by a hash of their inputs.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::adaptation::{AdaptationInstance, AdaptationPlan, QuantitativePerformance};
use crate::macbeth::{CardinalScale, JudgmentMatrix, Weights};
use crate::model::{
    Candidate, CandidateId, CriterionId, CriterionNode, MatchThresholds, MatrixId, RequirementId, RequirementSet,
    SatisfactionAssessment, ScreeningCriterion,
};
use crate::scoring::{QuantitativeCriterion, RankedResult};

mod pipeline;
mod store;
mod validate;

pub use pipeline::{
    cached_plan, cached_ranking, cached_scale, cached_weights, gap_table, performance_vectors, plan_for, ranking,
    scale_for, screening, weighting_matrix_id, weights, GapRow, PipelineError,
};
pub use store::{input_hash, load, load_path, parse_project, parse_project_value, save, save_path, to_canonical_json, StoreError};
pub use validate::{validate_project, Violation};

pub const SCHEMA_VERSION: u32 = 1;

/// Where the study currently is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Requirements,
    Searching,
    Screening,
    GapAnalysis,
    Adaptation,
    ElementaryEvaluation,
    GlobalEvaluation,
    Done,
}

impl Stage {
    pub const ALL: [Stage; 8] = [
        Stage::Requirements,
        Stage::Searching,
        Stage::Screening,
        Stage::GapAnalysis,
        Stage::Adaptation,
        Stage::ElementaryEvaluation,
        Stage::GlobalEvaluation,
        Stage::Done,
    ];

    fn index(self) -> usize {
        Stage::ALL.iter().position(|&s| s == self).unwrap()
    }

    pub fn next(self) -> Option<Stage> {
        Stage::ALL.get(self.index() + 1).copied()
    }

    /// One step forward, or back to any earlier stage (revision).
    pub fn can_move_to(self, to: Stage) -> bool {
        to.index() <= self.index() || Some(to) == self.next()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Requirements => "requirements",
            Stage::Searching => "searching",
            Stage::Screening => "screening",
            Stage::GapAnalysis => "gap-analysis",
            Stage::Adaptation => "adaptation",
            Stage::ElementaryEvaluation => "elementary-evaluation",
            Stage::GlobalEvaluation => "global-evaluation",
            Stage::Done => "done",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Stage::ALL.into_iter().find(|st| st.as_str() == s).ok_or_else(|| format!("unknown stage `{s}`"))
    }
}

/// A derived value together with the hash of the inputs it was computed from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cached<T> {
    pub input_hash: String,
    #[serde(default)]
    pub stale: bool,
    pub value: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanRecord {
    pub plan: AdaptationPlan,
    pub performance: QuantitativePerformance,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Cache {
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub plans: BTreeMap<CandidateId, Cached<PlanRecord>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub scales: BTreeMap<MatrixId, Cached<CardinalScale>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Cached<Weights>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ranking: Option<Cached<RankedResult>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectFile {
    pub schema_version: u32,
    #[serde(default)]
    pub name: String,
    pub stage: Stage,
    #[serde(default)]
    pub requirements: RequirementSet,
    #[serde(default)]
    pub thresholds: BTreeMap<RequirementId, MatchThresholds>,
    #[serde(default)]
    pub candidates: Vec<Candidate>,
    #[serde(default)]
    pub screening: Vec<ScreeningCriterion>,
    #[serde(default)]
    pub assessments: SatisfactionAssessment,
    #[serde(default)]
    pub adaptation: BTreeMap<CandidateId, AdaptationInstance>,
    #[serde(default)]
    pub criteria: Option<CriterionNode>,
    #[serde(default)]
    pub matrices: BTreeMap<MatrixId, JudgmentMatrix>,
    #[serde(default)]
    pub value_functions: BTreeMap<CriterionId, QuantitativeCriterion>,
    #[serde(default)]
    pub cache: Cache,
}

impl Default for ProjectFile {
    fn default() -> Self {
        Self::new()
    }
}

impl ProjectFile {
    pub fn new() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            name: String::new(),
            stage: Stage::Requirements,
            requirements: RequirementSet::default(),
            thresholds: BTreeMap::new(),
            candidates: Vec::new(),
            screening: Vec::new(),
            assessments: BTreeMap::new(),
            adaptation: BTreeMap::new(),
            criteria: None,
            matrices: BTreeMap::new(),
            value_functions: BTreeMap::new(),
            cache: Cache::default(),
        }
    }

    pub fn candidate(&self, id: &CandidateId) -> Option<&Candidate> {
        self.candidates.iter().find(|c| &c.id == id)
    }

    pub fn move_to(&mut self, to: Stage) -> Result<(), PipelineError> {
        if !self.stage.can_move_to(to) {
            return Err(PipelineError::Precondition(format!("cannot move from stage {} to {to}", self.stage)));
        }
        self.stage = to;
        Ok(())
    }

    /// Marks every cache entry whose inputs changed since it was computed.
    pub fn refresh_staleness(&mut self) {
        let plan_hashes: BTreeMap<_, _> =
            self.cache.plans.keys().map(|c| (c.clone(), pipeline::plan_hash(self, c, None))).collect();
        for (c, entry) in self.cache.plans.iter_mut() {
            entry.stale = plan_hashes.get(c).and_then(|h| h.as_ref()) != Some(&entry.input_hash);
        }
        let scale_hashes: BTreeMap<_, _> =
            self.cache.scales.keys().map(|m| (m.clone(), pipeline::scale_hash(self, m))).collect();
        for (m, entry) in self.cache.scales.iter_mut() {
            entry.stale = scale_hashes.get(m).and_then(|h| h.as_ref()) != Some(&entry.input_hash);
        }
        let wh = pipeline::weights_hash(self);
        if let Some(entry) = self.cache.weights.as_mut() {
            entry.stale = wh.as_ref() != Some(&entry.input_hash);
        }
        let rh = pipeline::ranking_hash(self, None);
        if let Some(entry) = self.cache.ranking.as_mut() {
            entry.stale = entry.input_hash != rh;
        }
    }
}
