//! MACBETH: cardinal value scales and criteria weights from qualitative
//! difference-of-attractiveness judgments.
//!
//! With a unit δ and v(last) = 0 the constraint system is
//!
//! * ordinal: v(e_t) ≥ v(e_{t+1}) for consecutive elements;
//! * A0 pairs: v(x) = v(y);
//! * judged pairs `[lo, hi]` with lo ≥ 1: v(x) - v(y) ≥ lo·δ;
//! * category dominance: for judged pairs p, q with lo(p) > hi(q),
//!   diff(p) ≥ diff(q) + (lo(p) - hi(q))·δ.
//!
//! A matrix is consistent iff the system is feasible. The basic scale fixes
//! δ = 1 and minimizes v(first); scales are then rescaled so the first element
//! (the good anchor, when present) is 1 and the last is 0.

mod judgment;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{CriterionId, ElementId};
use crate::optim::{solve_lp, Direction, LinearProgram, LpError, LpOutcome, Relation, VarId};

pub use judgment::{
    Judgment, JudgmentMatrix, JudgmentRef, MatrixContext, PairJudgment, CATEGORY_NAMES, MAX_CATEGORY,
};
use judgment::IndexedPair;

/// Tolerance on Σ λ = 1.
pub const WEIGHT_SUM_TOL: f64 = 1e-9;

/// Units at or below this are treated as "no positive unit exists".
const MIN_UNIT: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum MacbethError {
    #[error("invalid judgment `{0}`")]
    InvalidJudgment(String),
    #[error("matrix has no elements")]
    EmptyMatrix,
    #[error("element `{0}` listed twice")]
    DuplicateElement(ElementId),
    #[error("unknown element `{0}`")]
    UnknownElement(ElementId),
    #[error("judgment {0} must name an earlier element before a later one")]
    UnorderedPair(JudgmentRef),
    #[error("pair {0} judged twice")]
    DuplicatePair(JudgmentRef),
    #[error("{0}")]
    AnchorPlacement(String),
    #[error("judgments are inconsistent; conflicting pairs: {}", list(&.0.conflicts))]
    Inconsistent(ConsistencyReport),
    #[error("scale is degenerate: the first and last elements are not separated by any positive judgment")]
    DegenerateScale,
    #[error("weight of reference profile `{0}` is zero")]
    DegenerateWeight(ElementId),
    #[error("weighting matrix must have a bad reference as last element and no good anchor")]
    NotAWeightingMatrix,
    #[error("matrix is consistent; there is no conflict to locate")]
    NothingToLocate,
    #[error("{0} values given for {1} elements")]
    ValueCount(usize, usize),
    #[error(transparent)]
    Lp(#[from] LpError),
}

fn list(refs: &[JudgmentRef]) -> String {
    refs.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub consistent: bool,
    #[serde(default)]
    pub conflicts: Vec<JudgmentRef>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleEntry {
    pub element: ElementId,
    pub value: f64,
    /// Basic-scale value in units of δ, before rescaling.
    pub raw: f64,
}

/// Values in matrix order, first element 1 and last 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CardinalScale {
    pub entries: Vec<ScaleEntry>,
}

impl CardinalScale {
    pub fn value(&self, id: &ElementId) -> Option<f64> {
        self.entries.iter().find(|e| &e.element == id).map(|e| e.value)
    }

    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.value).collect()
    }

    pub fn raw(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.raw).collect()
    }
}

/// Criteria weights λ, keyed by leaf criterion id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Weights(pub BTreeMap<CriterionId, f64>);

impl Weights {
    pub fn get(&self, id: &CriterionId) -> Option<f64> {
        self.0.get(id).copied()
    }

    pub fn sum(&self) -> f64 {
        self.0.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&CriterionId, f64)> {
        self.0.iter().map(|(k, &v)| (k, v))
    }
}

impl FromIterator<(CriterionId, f64)> for Weights {
    fn from_iter<T: IntoIterator<Item = (CriterionId, f64)>>(iter: T) -> Self {
        Weights(iter.into_iter().collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Rel {
    Eq,
    Ge,
}

/// Σ terms·v (rel) units·δ
#[derive(Debug, Clone)]
struct Row {
    terms: Vec<(usize, f64)>,
    rel: Rel,
    units: f64,
}

fn diff_terms(out: &mut Vec<(usize, f64)>, x: usize, y: usize, sign: f64) {
    for (idx, c) in [(x, sign), (y, -sign)] {
        match out.iter_mut().find(|(i, _)| *i == idx) {
            Some(t) => t.1 += c,
            None => out.push((idx, c)),
        }
    }
}

/// Constraint rows for `pairs` over `n` elements.
fn system_rows(n: usize, pairs: &[IndexedPair]) -> Vec<Row> {
    let mut rows = Vec::new();
    for t in 1..n {
        rows.push(Row { terms: vec![(t - 1, 1.0), (t, -1.0)], rel: Rel::Ge, units: 0.0 });
    }
    for p in pairs {
        let mut terms = Vec::new();
        diff_terms(&mut terms, p.higher, p.lower, 1.0);
        if p.hi == 0 {
            rows.push(Row { terms, rel: Rel::Eq, units: 0.0 });
        } else {
            rows.push(Row { terms, rel: Rel::Ge, units: f64::from(p.lo) });
        }
    }
    for p in pairs {
        for q in pairs {
            if p.lo > q.hi {
                let mut terms = Vec::new();
                diff_terms(&mut terms, p.higher, p.lower, 1.0);
                diff_terms(&mut terms, q.higher, q.lower, -1.0);
                terms.retain(|t| t.1 != 0.0);
                rows.push(Row { terms, rel: Rel::Ge, units: f64::from(p.lo - q.hi) });
            }
        }
    }
    rows
}

/// Minimal basic scale with δ = 1: `Some(raw values)` or `None` if infeasible.
fn basic_scale(n: usize, pairs: &[IndexedPair]) -> Result<Option<Vec<f64>>, MacbethError> {
    let mut lp = LinearProgram::new();
    let vars: Vec<VarId> = (0..n)
        .map(|i| {
            let upper = (i == n - 1).then_some(0.0);
            lp.add_variable(format!("v{i}"), Some(0.0), upper)
        })
        .collect();
    for row in system_rows(n, pairs) {
        let rel = match row.rel {
            Rel::Eq => Relation::Eq,
            Rel::Ge => Relation::Ge,
        };
        lp.add_constraint(row.terms.iter().map(|&(i, c)| (vars[i], c)).collect(), rel, row.units);
    }
    lp.set_objective(Direction::Minimize, vec![(vars[0], 1.0)]);
    match solve_lp(&lp)? {
        LpOutcome::Optimal { assignment, .. } => Ok(Some(assignment)),
        LpOutcome::Infeasible => Ok(None),
        LpOutcome::Unbounded => unreachable!("objective is bounded below by the ordinal rows"),
    }
}

fn is_feasible(n: usize, pairs: &[IndexedPair]) -> Result<bool, MacbethError> {
    Ok(basic_scale(n, pairs)?.is_some())
}

/// Greedy witness: drop judgments in pair order until the rest is feasible,
/// then put back every dropped judgment that can return without breaking
/// feasibility.
fn conflict_witness(n: usize, pairs: &[IndexedPair]) -> Result<Vec<usize>, MacbethError> {
    let mut keep = vec![true; pairs.len()];
    let subset = |keep: &[bool]| -> Vec<IndexedPair> {
        pairs.iter().zip(keep).filter(|(_, &k)| k).map(|(p, _)| *p).collect()
    };
    let mut removed = Vec::new();
    for i in 0..pairs.len() {
        keep[i] = false;
        removed.push(i);
        if is_feasible(n, &subset(&keep))? {
            break;
        }
    }
    let mut witness = Vec::new();
    for &i in &removed {
        keep[i] = true;
        if !is_feasible(n, &subset(&keep))? {
            keep[i] = false;
            witness.push(i);
        }
    }
    Ok(witness)
}

/// Reports whether some numerical scale honors every judgment in `matrix`;
/// when not, lists a set of judgments whose removal restores consistency.
pub fn check_consistency(matrix: &JudgmentMatrix) -> Result<ConsistencyReport, MacbethError> {
    matrix.validate()?;
    let pairs = matrix.indexed_pairs()?;
    let n = matrix.elements.len();
    if is_feasible(n, &pairs)? {
        return Ok(ConsistencyReport { consistent: true, conflicts: Vec::new() });
    }
    let conflicts = conflict_witness(n, &pairs)?.iter().map(|&i| matrix.reference(&pairs[i])).collect();
    Ok(ConsistencyReport { consistent: false, conflicts })
}

/// A set of judgments whose removal makes `matrix` consistent. Not
/// necessarily minimal.
pub fn locate_conflicts(matrix: &JudgmentMatrix) -> Result<Vec<JudgmentRef>, MacbethError> {
    let report = check_consistency(matrix)?;
    if report.consistent {
        return Err(MacbethError::NothingToLocate);
    }
    Ok(report.conflicts)
}

fn raw_scale(matrix: &JudgmentMatrix) -> Result<Vec<f64>, MacbethError> {
    matrix.validate()?;
    let pairs = matrix.indexed_pairs()?;
    match basic_scale(matrix.elements.len(), &pairs)? {
        Some(raw) => Ok(raw),
        None => {
            let conflicts = conflict_witness(matrix.elements.len(), &pairs)?
                .iter()
                .map(|&i| matrix.reference(&pairs[i]))
                .collect();
            Err(MacbethError::Inconsistent(ConsistencyReport { consistent: false, conflicts }))
        }
    }
}

/// Derives the cardinal scale of a consistent matrix, anchored so the first
/// element scores 1 and the last 0.
pub fn derive_scale(matrix: &JudgmentMatrix) -> Result<CardinalScale, MacbethError> {
    let raw = raw_scale(matrix)?;
    let top = raw[0];
    if top <= MIN_UNIT {
        return Err(MacbethError::DegenerateScale);
    }
    let last = raw.len() - 1;
    let entries = matrix
        .elements
        .iter()
        .zip(&raw)
        .enumerate()
        .map(|(i, (e, &r))| {
            let value = match i {
                0 => 1.0,
                _ if i == last => 0.0,
                _ => r / top,
            };
            ScaleEntry { element: e.clone(), value, raw: r }
        })
        .collect();
    Ok(CardinalScale { entries })
}

/// Derives criteria weights from a matrix over reference profiles (one per
/// leaf criterion, element id = criterion id) followed by the bad reference.
/// Weights are profile values normalized to sum to one.
pub fn derive_weights(profile_matrix: &JudgmentMatrix) -> Result<Weights, MacbethError> {
    profile_matrix.validate()?;
    let n = profile_matrix.elements.len();
    let bad_is_last = profile_matrix.bad.as_ref() == profile_matrix.elements.last();
    if profile_matrix.good.is_some() || profile_matrix.bad.is_none() || !bad_is_last || n < 2 {
        return Err(MacbethError::NotAWeightingMatrix);
    }
    let raw = raw_scale(profile_matrix)?;
    let profiles = &profile_matrix.elements[..n - 1];
    if let Some((e, _)) = profiles.iter().zip(&raw).find(|(_, &r)| r <= MIN_UNIT) {
        return Err(MacbethError::DegenerateWeight(e.clone()));
    }
    let total: f64 = raw[..n - 1].iter().sum();
    Ok(profiles
        .iter()
        .zip(&raw)
        .map(|(e, &r)| (CriterionId::new(e.as_str()), r / total))
        .collect())
}

/// Largest unit δ for which some scale within `tolerance` of `values`
/// (given in matrix order) satisfies the constraint system; `None` when only
/// δ = 0 works, meaning the values contradict the judgments.
pub fn fit_unit(matrix: &JudgmentMatrix, values: &[f64], tolerance: f64) -> Result<Option<f64>, MacbethError> {
    matrix.validate()?;
    let n = matrix.elements.len();
    if values.len() != n {
        return Err(MacbethError::ValueCount(values.len(), n));
    }
    let pairs = matrix.indexed_pairs()?;
    let mut lp = LinearProgram::new();
    let vars: Vec<VarId> = values
        .iter()
        .enumerate()
        .map(|(i, &v)| lp.add_variable(format!("v{i}"), Some(v - tolerance), Some(v + tolerance)))
        .collect();
    let span = values.iter().fold(0.0f64, |m, v| m.max(v.abs())) + tolerance;
    let unit = lp.add_variable("unit", Some(0.0), Some(span.max(1.0)));
    for row in system_rows(n, &pairs) {
        let mut coeffs: Vec<(VarId, f64)> = row.terms.iter().map(|&(i, c)| (vars[i], c)).collect();
        if row.units != 0.0 {
            coeffs.push((unit, -row.units));
        }
        let rel = match row.rel {
            Rel::Eq => Relation::Eq,
            Rel::Ge => Relation::Ge,
        };
        lp.add_constraint(coeffs, rel, 0.0);
    }
    lp.set_objective(Direction::Maximize, vec![(unit, 1.0)]);
    match solve_lp(&lp)? {
        LpOutcome::Optimal { value, .. } if value > MIN_UNIT => Ok(Some(value)),
        _ => Ok(None),
    }
}
