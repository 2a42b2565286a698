use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::ProjectFile;
use crate::macbeth::MatrixContext;
use crate::model::{CriterionId, LeafKind};

/// One problem found in a project file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub code: String,
    pub location: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}: {}", self.code, self.location, self.message)
    }
}

struct Sink(Vec<Violation>);

impl Sink {
    fn push(&mut self, code: &str, location: impl Into<String>, message: impl Into<String>) {
        self.0.push(Violation { code: code.into(), location: location.into(), message: message.into() });
    }
}

fn finite_unit(x: f64) -> bool {
    (0.0..=1.0).contains(&x)
}

/// Every invariant a saved project must satisfy. An empty list means valid.
pub fn validate_project(p: &ProjectFile) -> Vec<Violation> {
    let mut out = Sink(Vec::new());
    requirements(p, &mut out);
    candidates(p, &mut out);
    assessments(p, &mut out);
    adaptation(p, &mut out);
    criteria(p, &mut out);
    out.0
}

fn requirements(p: &ProjectFile, out: &mut Sink) {
    let mut seen = BTreeSet::new();
    for (i, r) in p.requirements.iter().enumerate() {
        let at = format!("requirements[{i}]");
        if !seen.insert(&r.id) {
            out.push("duplicate-id", &at, format!("requirement `{}` is listed twice", r.id));
        }
        if !(r.weight.is_finite() && r.weight >= 0.0) {
            out.push("invalid-weight", format!("{at}.weight"), format!("weight {} must be finite and nonnegative", r.weight));
        }
    }
    if !p.requirements.is_empty() && !p.requirements.is_normalized() {
        out.push(
            "weights-not-normalized",
            "requirements",
            format!("requirement weights sum to {}, not 1", p.requirements.weight_sum()),
        );
    }
    for (id, t) in &p.thresholds {
        let at = format!("thresholds.{id}");
        if p.requirements.get(id).is_none() {
            out.push("dangling-reference", &at, format!("unknown requirement `{id}`"));
        }
        if let Err(e) = t.validate() {
            out.push("invalid-thresholds", &at, e.to_string());
        }
    }
}

fn candidates(p: &ProjectFile, out: &mut Sink) {
    let mut seen = BTreeSet::new();
    for (i, c) in p.candidates.iter().enumerate() {
        if !seen.insert(&c.id) {
            out.push("duplicate-id", format!("candidates[{i}]"), format!("candidate `{}` is listed twice", c.id));
        }
        let tco = c.screening.tco_estimate;
        if !(tco.is_finite() && tco >= 0.0) {
            out.push(
                "invalid-number",
                format!("candidates[{i}].screening.tco_estimate"),
                format!("{tco} must be finite and nonnegative"),
            );
        }
    }
    for (i, s) in p.screening.iter().enumerate() {
        if let crate::model::ScreeningCriterion::TcoCeiling(x) = s {
            if !(x.is_finite() && *x >= 0.0) {
                out.push("invalid-number", format!("screening[{i}]"), format!("ceiling {x} must be finite and nonnegative"));
            }
        }
    }
}

fn assessments(p: &ProjectFile, out: &mut Sink) {
    for (cid, row) in &p.assessments {
        let at = format!("assessments.{cid}");
        if p.candidate(cid).is_none() {
            out.push("dangling-reference", &at, format!("unknown candidate `{cid}`"));
        }
        for (rid, &a) in row {
            if p.requirements.get(rid).is_none() {
                out.push("dangling-reference", format!("{at}.{rid}"), format!("unknown requirement `{rid}`"));
            }
            if !finite_unit(a) {
                out.push("satisfaction-out-of-range", format!("{at}.{rid}"), format!("{a} is outside [0, 1]"));
            }
        }
        for r in p.requirements.iter() {
            if !row.contains_key(&r.id) {
                out.push("assessment-incomplete", &at, format!("no satisfaction level for requirement `{}`", r.id));
            }
        }
    }
}

fn adaptation(p: &ProjectFile, out: &mut Sink) {
    for (cid, inst) in &p.adaptation {
        let at = format!("adaptation.{cid}");
        if p.candidate(cid).is_none() {
            out.push("dangling-reference", &at, format!("unknown candidate `{cid}`"));
        }
        if &inst.candidate != cid {
            out.push("inconsistent-adaptation", format!("{at}.candidate"), format!("instance names `{}`", inst.candidate));
        }
        if !inst.budget.is_finite() {
            out.push("invalid-budget", format!("{at}.budget"), format!("budget {} must be finite", inst.budget));
        }
        if let Err(e) = inst.validate() {
            out.push("invalid-adaptation", &at, e.to_string());
        }
        let row = p.assessments.get(cid);
        for (j, m) in inst.mismatches.iter().enumerate() {
            let mat = format!("{at}.mismatches[{j}]");
            match p.requirements.get(&m.requirement) {
                None => out.push("dangling-reference", &mat, format!("unknown requirement `{}`", m.requirement)),
                Some(r) if (r.weight - m.weight).abs() > 1e-9 => out.push(
                    "inconsistent-adaptation",
                    format!("{mat}.weight"),
                    format!("weight {} differs from requirement weight {}", m.weight, r.weight),
                ),
                Some(_) => {}
            }
            match row.and_then(|r| r.get(&m.requirement)) {
                Some(&a) if (a - m.satisfaction).abs() <= 1e-12 => {}
                Some(&a) => out.push(
                    "inconsistent-adaptation",
                    format!("{mat}.satisfaction"),
                    format!("satisfaction {} differs from assessed level {a}", m.satisfaction),
                ),
                None => out.push(
                    "inconsistent-adaptation",
                    format!("{mat}.satisfaction"),
                    format!("no assessed level for `{}`", m.requirement),
                ),
            }
        }
    }
}

fn criteria(p: &ProjectFile, out: &mut Sink) {
    let leaves: Vec<(CriterionId, LeafKind)> = match &p.criteria {
        Some(tree) => {
            for problem in tree.structural_problems() {
                out.push("invalid-criteria-tree", "criteria", problem);
            }
            tree.leaves().into_iter().map(|(id, k)| (id.clone(), k)).collect()
        }
        None => Vec::new(),
    };
    let kind_of = |id: &CriterionId| leaves.iter().find(|(l, _)| l == id).map(|(_, k)| *k);
    let mut weighting = Vec::new();
    let mut per_criterion = BTreeSet::new();
    for (mid, m) in &p.matrices {
        let at = format!("matrices.{mid}");
        if let Err(e) = m.validate() {
            out.push("invalid-matrix", &at, e.to_string());
        }
        let anchors = [m.good.as_ref(), m.bad.as_ref()];
        let options = m.elements.iter().filter(|e| !anchors.contains(&Some(*e)));
        match &m.context {
            MatrixContext::Weighting => {
                weighting.push(mid);
                for e in options {
                    let id = CriterionId::new(e.as_str());
                    if kind_of(&id).is_none() {
                        out.push("dangling-reference", &at, format!("profile `{e}` is not a leaf criterion"));
                    }
                }
            }
            MatrixContext::Criterion(c) => {
                match kind_of(c) {
                    Some(LeafKind::MacbethJudged) => {}
                    Some(LeafKind::Quantitative) => {
                        out.push("leaf-kind-mismatch", &at, format!("criterion `{c}` is quantitative"))
                    }
                    None => out.push("dangling-reference", &at, format!("`{c}` is not a leaf criterion")),
                }
                if !per_criterion.insert(c.clone()) {
                    out.push("duplicate-id", &at, format!("criterion `{c}` has more than one matrix"));
                }
                for e in options {
                    if p.candidate(&e.as_str().into()).is_none() {
                        out.push("dangling-reference", &at, format!("option `{e}` is not a candidate"));
                    }
                }
            }
        }
    }
    if weighting.len() > 1 {
        out.push("duplicate-id", "matrices", "more than one weighting matrix");
    }
    for (cid, q) in &p.value_functions {
        let at = format!("value_functions.{cid}");
        match kind_of(cid) {
            Some(LeafKind::Quantitative) => {}
            Some(LeafKind::MacbethJudged) => out.push("leaf-kind-mismatch", &at, format!("criterion `{cid}` is MACBETH-judged")),
            None => out.push("dangling-reference", &at, format!("`{cid}` is not a leaf criterion")),
        }
        if let Err(e) = q.value_function.validate() {
            out.push("invalid-value-function", &at, e.to_string());
        }
    }
}
