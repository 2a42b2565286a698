//! Vocabulary of the selection problem: requirements, candidates, satisfaction
//! levels, matching patterns, tailoring types, screening and the criteria tree.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance on Σ w_j = 1.
pub const WEIGHT_SUM_TOL: f64 = 1e-9;

macro_rules! string_id {
    ($(#[$m:meta])* $name:ident) => {
        $(#[$m])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Self {
                Self(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }
    };
}

string_id!(RequirementId);
string_id!(CandidateId);
string_id!(
    /// Identifies a criterion node; leaf ids double as weight keys.
    CriterionId
);
string_id!(
    /// An option or anchor inside a judgment matrix.
    ElementId
);
string_id!(MatrixId);

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("satisfaction level {0} is outside [0, 1]")]
    SatisfactionOutOfRange(f64),
    #[error("invalid thresholds: worst acceptable {worst} must not exceed target {target}, both within range")]
    InvalidThresholds { target: f64, worst: f64 },
    #[error("requirement `{0}` not found")]
    RequirementNotFound(RequirementId),
    #[error("requirement `{0}` already exists")]
    DuplicateRequirement(RequirementId),
    #[error("raw weight {0} must be finite and nonnegative")]
    InvalidWeight(f64),
    #[error("requirement weights are all zero")]
    DegenerateWeights,
    #[error("requirement set would be empty")]
    EmptyRequirementSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Requirement {
    pub id: RequirementId,
    pub label: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub functional_area: String,
    pub weight: f64,
}

impl Requirement {
    pub fn new(id: impl Into<String>, label: impl Into<String>, weight: f64) -> Self {
        Self {
            id: RequirementId::new(id),
            label: label.into(),
            description: String::new(),
            functional_area: String::new(),
            weight,
        }
    }
}

/// Weighted functional requirements. Weights sum to one once the set is
/// nonempty.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RequirementSet(pub Vec<Requirement>);

impl RequirementSet {
    pub fn new(requirements: Vec<Requirement>) -> Self {
        Self(requirements)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Requirement> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, id: &RequirementId) -> Option<&Requirement> {
        self.0.iter().find(|r| &r.id == id)
    }

    pub fn weight_sum(&self) -> f64 {
        self.0.iter().map(|r| r.weight).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.weight_sum() - 1.0).abs() <= WEIGHT_SUM_TOL
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RequirementEdit {
    Add { requirement: Requirement, raw_weight: f64 },
    Remove { id: RequirementId },
    Reweight { id: RequirementId, raw_weight: f64 },
}

/// Applies `edits` in order, then rescales all weights proportionally so they
/// sum to one.
pub fn revise_requirements(
    set: &RequirementSet,
    edits: &[RequirementEdit],
) -> Result<RequirementSet, ModelError> {
    if edits.is_empty() {
        return Ok(set.clone());
    }
    let check = |w: f64| {
        if w.is_finite() && w >= 0.0 {
            Ok(w)
        } else {
            Err(ModelError::InvalidWeight(w))
        }
    };
    let mut reqs = set.0.clone();
    for edit in edits {
        match edit {
            RequirementEdit::Add { requirement, raw_weight } => {
                if reqs.iter().any(|r| r.id == requirement.id) {
                    return Err(ModelError::DuplicateRequirement(requirement.id.clone()));
                }
                let mut r = requirement.clone();
                r.weight = check(*raw_weight)?;
                reqs.push(r);
            }
            RequirementEdit::Remove { id } => {
                let pos = reqs
                    .iter()
                    .position(|r| &r.id == id)
                    .ok_or_else(|| ModelError::RequirementNotFound(id.clone()))?;
                reqs.remove(pos);
            }
            RequirementEdit::Reweight { id, raw_weight } => {
                let w = check(*raw_weight)?;
                let r = reqs
                    .iter_mut()
                    .find(|r| &r.id == id)
                    .ok_or_else(|| ModelError::RequirementNotFound(id.clone()))?;
                r.weight = w;
            }
        }
    }
    if reqs.is_empty() {
        return Err(ModelError::EmptyRequirementSet);
    }
    let total: f64 = reqs.iter().map(|r| r.weight).sum();
    if total <= 0.0 {
        return Err(ModelError::DegenerateWeights);
    }
    for r in &mut reqs {
        r.weight /= total;
    }
    Ok(RequirementSet(reqs))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Impact {
    Neutral,
    Helpful,
    Hurtful,
}

/// A package feature nobody asked for, recorded by the analyst.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtendAnnotation {
    pub feature: String,
    pub impact: Impact,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScreeningAttributes {
    #[serde(default)]
    pub industry_types: BTreeSet<String>,
    #[serde(default)]
    pub organization_sizes: BTreeSet<String>,
    #[serde(default)]
    pub platforms: BTreeSet<String>,
    #[serde(default)]
    pub tco_estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub id: CandidateId,
    pub name: String,
    #[serde(default)]
    pub vendor: String,
    #[serde(default)]
    pub screening: ScreeningAttributes,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extensions: Vec<ExtendAnnotation>,
}

impl Candidate {
    pub fn new(id: impl Into<String>, name: impl Into<String>) -> Self {
        Self {
            id: CandidateId::new(id),
            name: name.into(),
            vendor: String::new(),
            screening: ScreeningAttributes::default(),
            extensions: Vec::new(),
        }
    }
}

/// Satisfaction levels a_ij, candidate by requirement.
pub type SatisfactionAssessment = BTreeMap<CandidateId, BTreeMap<RequirementId, f64>>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchThresholds {
    pub target_level: f64,
    pub worst_acceptable: f64,
}

impl MatchThresholds {
    pub fn new(target_level: f64, worst_acceptable: f64) -> Result<Self, ModelError> {
        let t = Self { target_level, worst_acceptable };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let ok = self.target_level > 0.0
            && self.target_level <= 1.0
            && (0.0..=1.0).contains(&self.worst_acceptable)
            && self.worst_acceptable <= self.target_level;
        if ok {
            Ok(())
        } else {
            Err(ModelError::InvalidThresholds {
                target: self.target_level,
                worst: self.worst_acceptable,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatchingPattern {
    Fulfill,
    Differ,
    Fail,
    Extend { impact: Impact },
}

impl fmt::Display for MatchingPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatchingPattern::Fulfill => f.write_str("fulfill"),
            MatchingPattern::Differ => f.write_str("differ"),
            MatchingPattern::Fail => f.write_str("fail"),
            MatchingPattern::Extend { impact } => write!(f, "extend({impact:?})"),
        }
    }
}

/// Classifies a satisfaction level against per-requirement thresholds.
/// Never returns `Extend`; those come from analyst annotations.
pub fn classify_match(a: f64, thresholds: &MatchThresholds) -> Result<MatchingPattern, ModelError> {
    if !(0.0..=1.0).contains(&a) {
        return Err(ModelError::SatisfactionOutOfRange(a));
    }
    thresholds.validate()?;
    Ok(if a >= thresholds.target_level {
        MatchingPattern::Fulfill
    } else if a >= thresholds.worst_acceptable {
        MatchingPattern::Differ
    } else {
        MatchingPattern::Fail
    })
}

/// The nine tailoring types, in increasing order of implementation risk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailoringType {
    Configuration,
    BoltOns,
    ScreenMasks,
    ExtendedReporting,
    WorkflowProgramming,
    UserExits,
    ErpProgramming,
    InterfaceDevelopment,
    PackageCodeModification,
}

impl TailoringType {
    pub const ALL: [TailoringType; 9] = [
        TailoringType::Configuration,
        TailoringType::BoltOns,
        TailoringType::ScreenMasks,
        TailoringType::ExtendedReporting,
        TailoringType::WorkflowProgramming,
        TailoringType::UserExits,
        TailoringType::ErpProgramming,
        TailoringType::InterfaceDevelopment,
        TailoringType::PackageCodeModification,
    ];

    /// 1 for configuration up to 9 for source-code modification.
    pub fn risk_rank(self) -> u8 {
        Self::ALL.iter().position(|&t| t == self).expect("listed") as u8 + 1
    }

    /// Whether tailoring of this kind is lost on a vendor version update.
    pub fn survives_upgrade(self) -> bool {
        self == TailoringType::Configuration
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "attribute", content = "value", rename_all = "snake_case")]
pub enum ScreeningCriterion {
    IndustryType(String),
    OrganizationSize(String),
    Platform(String),
    TcoCeiling(f64),
}

impl ScreeningCriterion {
    pub fn admits(&self, candidate: &Candidate) -> bool {
        let s = &candidate.screening;
        match self {
            ScreeningCriterion::IndustryType(v) => s.industry_types.contains(v),
            ScreeningCriterion::OrganizationSize(v) => s.organization_sizes.contains(v),
            ScreeningCriterion::Platform(v) => s.platforms.contains(v),
            ScreeningCriterion::TcoCeiling(max) => s.tco_estimate <= *max,
        }
    }
}

impl fmt::Display for ScreeningCriterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScreeningCriterion::IndustryType(v) => write!(f, "industry_type={v}"),
            ScreeningCriterion::OrganizationSize(v) => write!(f, "organization_size={v}"),
            ScreeningCriterion::Platform(v) => write!(f, "platform={v}"),
            ScreeningCriterion::TcoCeiling(v) => write!(f, "tco_ceiling={v}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScreeningOutcome {
    pub survivors: Vec<Candidate>,
    pub exclusions: BTreeMap<CandidateId, Vec<ScreeningCriterion>>,
}

pub fn screen_candidates(candidates: &[Candidate], criteria: &[ScreeningCriterion]) -> ScreeningOutcome {
    let mut survivors = Vec::new();
    let mut exclusions = BTreeMap::new();
    for c in candidates {
        let violated: Vec<_> = criteria.iter().filter(|k| !k.admits(c)).cloned().collect();
        if violated.is_empty() {
            survivors.push(c.clone());
        } else {
            exclusions.insert(c.id.clone(), violated);
        }
    }
    ScreeningOutcome { survivors, exclusions }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LeafKind {
    MacbethJudged,
    Quantitative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionNode {
    pub id: CriterionId,
    pub label: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<CriterionNode>,
    /// Present exactly on leaves.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leaf: Option<LeafKind>,
}

impl CriterionNode {
    pub fn leaf(id: impl Into<String>, label: impl Into<String>, kind: LeafKind) -> Self {
        Self { id: CriterionId::new(id), label: label.into(), children: Vec::new(), leaf: Some(kind) }
    }

    pub fn group(id: impl Into<String>, label: impl Into<String>, children: Vec<CriterionNode>) -> Self {
        Self { id: CriterionId::new(id), label: label.into(), children, leaf: None }
    }

    /// Leaves in depth-first order.
    pub fn leaves(&self) -> Vec<(&CriterionId, LeafKind)> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<(&'a CriterionId, LeafKind)>) {
        if self.children.is_empty() {
            if let Some(kind) = self.leaf {
                out.push((&self.id, kind));
            }
        }
        for c in &self.children {
            c.collect_leaves(out);
        }
    }

    /// Structural problems: duplicate ids, leaf payloads on inner nodes,
    /// childless nodes without payload, or no leaves at all.
    pub fn structural_problems(&self) -> Vec<String> {
        let mut problems = Vec::new();
        let mut seen = BTreeSet::new();
        self.check(&mut seen, &mut problems);
        if self.leaves().is_empty() {
            problems.push("criteria tree has no leaves".to_owned());
        }
        problems
    }

    fn check<'a>(&'a self, seen: &mut BTreeSet<&'a CriterionId>, problems: &mut Vec<String>) {
        if !seen.insert(&self.id) {
            problems.push(format!("duplicate criterion id `{}`", self.id));
        }
        match (self.children.is_empty(), self.leaf.is_some()) {
            (true, false) => problems.push(format!("criterion `{}` has no children and no leaf kind", self.id)),
            (false, true) => problems.push(format!("criterion `{}` has children and a leaf kind", self.id)),
            _ => {}
        }
        for c in &self.children {
            c.check(seen, problems);
        }
    }
}
