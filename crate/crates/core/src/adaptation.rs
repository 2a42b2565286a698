//! Per-candidate mismatch resolution under a tailoring budget, and the four
//! quantitative performance expressions derived from the chosen plan.
//!
//! Each mismatch j (a requirement with a_ij < 1) offers strategies k with
//! anticipated satisfaction b, implementation risk r and cost c. Choosing
//! strategy k for mismatch j contributes w_j (b - a_ij)(1 - r) to the
//! objective; at most one strategy per mismatch, total cost within budget.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{CandidateId, RequirementId, RequirementSet, TailoringType};
use crate::optim::{solve_mckp, MckpError, MckpInstance, MckpItem};

#[derive(Debug, Error, PartialEq)]
pub enum AdaptationError {
    #[error("mismatch `{0}`: satisfaction must lie in [0, 1)")]
    SatisfactionOutOfRange(RequirementId),
    #[error("mismatch `{0}`: weight must be finite and nonnegative")]
    InvalidWeight(RequirementId),
    #[error("mismatch `{requirement}` strategy {strategy}: {reason}")]
    InvalidStrategy { requirement: RequirementId, strategy: usize, reason: &'static str },
    #[error("requirement `{0}` appears in more than one mismatch")]
    DuplicateMismatch(RequirementId),
    #[error("budget must be nonnegative, got {0}")]
    InvalidBudget(f64),
    #[error("assignment has {got} entries for {expected} mismatches")]
    AssignmentLength { expected: usize, got: usize },
    #[error("mismatch `{requirement}` has no strategy {strategy}")]
    UnknownStrategy { requirement: RequirementId, strategy: usize },
    #[error("plan does not belong to this instance: {0}")]
    PlanMismatch(String),
    #[error(transparent)]
    Solver(#[from] MckpError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptationStrategy {
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub label: String,
    pub tailoring: TailoringType,
    /// Anticipated satisfaction b after tailoring.
    pub satisfaction: f64,
    pub risk: f64,
    pub cost: f64,
}

impl AdaptationStrategy {
    pub fn new(tailoring: TailoringType, satisfaction: f64, risk: f64, cost: f64) -> Self {
        Self { label: String::new(), tailoring, satisfaction, risk, cost }
    }

    /// Ω: 0 for plain configuration, 1 for anything lost on upgrade.
    pub fn omega(&self) -> f64 {
        if self.tailoring.survives_upgrade() {
            0.0
        } else {
            1.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mismatch {
    pub requirement: RequirementId,
    pub weight: f64,
    /// Current satisfaction a_ij, strictly below 1.
    pub satisfaction: f64,
    pub strategies: Vec<AdaptationStrategy>,
}

impl Mismatch {
    /// w_j (b - a)(1 - r) for strategy `k`.
    pub fn gain(&self, k: usize) -> f64 {
        let s = &self.strategies[k];
        self.weight * (s.satisfaction - self.satisfaction) * (1.0 - s.risk)
    }

    /// w_j (b - a) for strategy `k`.
    pub fn weighted_delta(&self, k: usize) -> f64 {
        self.weight * (self.strategies[k].satisfaction - self.satisfaction)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptationInstance {
    pub candidate: CandidateId,
    pub budget: f64,
    pub mismatches: Vec<Mismatch>,
}

impl AdaptationInstance {
    pub fn validate(&self) -> Result<(), AdaptationError> {
        if self.budget.is_nan() || self.budget < 0.0 {
            return Err(AdaptationError::InvalidBudget(self.budget));
        }
        let mut seen = BTreeSet::new();
        for m in &self.mismatches {
            let req = || m.requirement.clone();
            if !seen.insert(&m.requirement) {
                return Err(AdaptationError::DuplicateMismatch(req()));
            }
            if !(0.0..1.0).contains(&m.satisfaction) {
                return Err(AdaptationError::SatisfactionOutOfRange(req()));
            }
            if !(m.weight.is_finite() && m.weight >= 0.0) {
                return Err(AdaptationError::InvalidWeight(req()));
            }
            for (k, s) in m.strategies.iter().enumerate() {
                let bad = |reason| AdaptationError::InvalidStrategy { requirement: req(), strategy: k, reason };
                if !(0.0..=1.0).contains(&s.satisfaction) {
                    return Err(bad("anticipated satisfaction outside [0, 1]"));
                }
                if s.satisfaction <= m.satisfaction {
                    return Err(bad("anticipated satisfaction does not improve on the current level"));
                }
                if !(0.0..=1.0).contains(&s.risk) {
                    return Err(bad("risk outside [0, 1]"));
                }
                if !(s.cost.is_finite() && s.cost >= 0.0) {
                    return Err(bad("cost must be finite and nonnegative"));
                }
            }
        }
        Ok(())
    }

    fn check_assignment(&self, assignment: &[Option<usize>]) -> Result<(), AdaptationError> {
        if assignment.len() != self.mismatches.len() {
            return Err(AdaptationError::AssignmentLength {
                expected: self.mismatches.len(),
                got: assignment.len(),
            });
        }
        for (m, pick) in self.mismatches.iter().zip(assignment) {
            if let Some(k) = *pick {
                if k >= m.strategies.len() {
                    return Err(AdaptationError::UnknownStrategy {
                        requirement: m.requirement.clone(),
                        strategy: k,
                    });
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanChoice {
    pub requirement: RequirementId,
    pub strategy: Option<usize>,
}

/// The x_ijk assignment for one candidate, in mismatch order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptationPlan {
    pub chosen: Vec<PlanChoice>,
    pub objective: f64,
    pub total_cost: f64,
}

impl AdaptationPlan {
    pub fn assignment(&self) -> Vec<Option<usize>> {
        self.chosen.iter().map(|c| c.strategy).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.chosen.iter().all(|c| c.strategy.is_none())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantitativePerformance {
    pub functional_coverage: f64,
    pub adaptation_risk: f64,
    pub adaptation_cost: f64,
    pub adaptation_degree: f64,
}

/// Σ w_j (b - a)(1 - r) over the chosen strategies, summed in mismatch order.
pub fn objective_value(
    instance: &AdaptationInstance,
    assignment: &[Option<usize>],
) -> Result<f64, AdaptationError> {
    instance.check_assignment(assignment)?;
    let mut total = 0.0;
    for (m, pick) in instance.mismatches.iter().zip(assignment) {
        if let Some(k) = *pick {
            total += m.gain(k);
        }
    }
    Ok(total)
}

/// The multiple-choice knapsack view of an instance: one class per mismatch.
pub fn to_mckp(instance: &AdaptationInstance) -> MckpInstance {
    let classes = instance
        .mismatches
        .iter()
        .map(|m| (0..m.strategies.len()).map(|k| MckpItem::new(m.gain(k), m.strategies[k].cost)).collect())
        .collect();
    MckpInstance::new(classes, instance.budget)
}

pub fn optimize_adaptation(instance: &AdaptationInstance) -> Result<AdaptationPlan, AdaptationError> {
    instance.validate()?;
    let selection = solve_mckp(&to_mckp(instance))?;
    let chosen = instance
        .mismatches
        .iter()
        .zip(selection.chosen)
        .map(|(m, strategy)| PlanChoice { requirement: m.requirement.clone(), strategy })
        .collect();
    Ok(AdaptationPlan { chosen, objective: selection.total_gain, total_cost: selection.total_cost })
}

/// Coverage, risk, cost and degree of a plan.
///
/// `row` holds a_ij for every requirement, fully met ones included. Adaptation
/// risk of an empty plan is 0.
pub fn performance_profile(
    requirements: &RequirementSet,
    row: &BTreeMap<RequirementId, f64>,
    instance: &AdaptationInstance,
    plan: &AdaptationPlan,
) -> Result<QuantitativePerformance, AdaptationError> {
    instance.validate()?;
    let assignment = plan.assignment();
    instance.check_assignment(&assignment)?;
    for (m, c) in instance.mismatches.iter().zip(&plan.chosen) {
        if m.requirement != c.requirement {
            return Err(AdaptationError::PlanMismatch(format!(
                "plan lists `{}` where the instance has `{}`",
                c.requirement, m.requirement
            )));
        }
        let req = requirements.get(&m.requirement).ok_or_else(|| {
            AdaptationError::PlanMismatch(format!("unknown requirement `{}`", m.requirement))
        })?;
        if (req.weight - m.weight).abs() > 1e-9 {
            return Err(AdaptationError::PlanMismatch(format!(
                "weight of `{}` differs from the requirement set",
                m.requirement
            )));
        }
        match row.get(&m.requirement) {
            Some(&a) if (a - m.satisfaction).abs() <= 1e-12 => {}
            _ => {
                return Err(AdaptationError::PlanMismatch(format!(
                    "satisfaction of `{}` differs from the assessment",
                    m.requirement
                )))
            }
        }
    }

    let mut chosen_b: BTreeMap<&RequirementId, f64> = BTreeMap::new();
    let mut delta_sum = 0.0;
    let mut gamma_sum = 0.0;
    let mut cost = 0.0;
    let mut degree = 0.0;
    for (m, pick) in instance.mismatches.iter().zip(&assignment) {
        if let Some(k) = *pick {
            let s = &m.strategies[k];
            let wd = m.weighted_delta(k);
            chosen_b.insert(&m.requirement, s.satisfaction);
            delta_sum += wd;
            gamma_sum += wd * (1.0 - s.risk);
            cost += s.cost;
            degree += wd * s.omega();
        }
    }

    let mut coverage = 0.0;
    for r in requirements.iter() {
        let a = *row.get(&r.id).ok_or_else(|| {
            AdaptationError::PlanMismatch(format!("assessment lacks requirement `{}`", r.id))
        })?;
        let b = chosen_b.get(&r.id).copied().unwrap_or(0.0);
        coverage += r.weight * b.max(a);
    }
    let risk = if delta_sum > 0.0 { 1.0 - gamma_sum / delta_sum } else { 0.0 };

    Ok(QuantitativePerformance {
        functional_coverage: coverage,
        adaptation_risk: risk,
        adaptation_cost: cost,
        adaptation_degree: degree,
    })
}
