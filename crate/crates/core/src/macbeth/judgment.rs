use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::MacbethError;
use crate::model::{CriterionId, ElementId};

/// Highest difference-of-attractiveness category (extreme).
pub const MAX_CATEGORY: u8 = 6;

pub const CATEGORY_NAMES: [&str; 7] =
    ["no", "very weak", "weak", "moderate", "strong", "very strong", "extreme"];

/// A qualitative difference-of-attractiveness answer.
///
/// Kept exactly as entered: `Range(3, 3)` and `Category(3)` mean the same
/// interval but serialize differently.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Judgment {
    Category(u8),
    /// Union of the successive categories `lo..=hi`.
    Range(u8, u8),
    DontKnow,
}

impl Judgment {
    pub fn category(k: u8) -> Result<Self, MacbethError> {
        let j = Judgment::Category(k);
        j.validate()?;
        Ok(j)
    }

    pub fn range(lo: u8, hi: u8) -> Result<Self, MacbethError> {
        let j = Judgment::Range(lo, hi);
        j.validate()?;
        Ok(j)
    }

    /// The closed category interval `[lo, hi]`. "Don't know" is any positive
    /// difference, `[1, 6]`.
    pub fn interval(&self) -> (u8, u8) {
        match *self {
            Judgment::Category(k) => (k, k),
            Judgment::Range(lo, hi) => (lo, hi),
            Judgment::DontKnow => (1, MAX_CATEGORY),
        }
    }

    pub fn validate(&self) -> Result<(), MacbethError> {
        let (lo, hi) = self.interval();
        if hi > MAX_CATEGORY || lo > hi || (lo == 0 && hi != 0) {
            return Err(MacbethError::InvalidJudgment(self.to_string()));
        }
        Ok(())
    }
}

impl fmt::Display for Judgment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Judgment::Category(k) => write!(f, "A{k}"),
            Judgment::Range(lo, hi) => write!(f, "A{lo}-A{hi}"),
            Judgment::DontKnow => f.write_str("?"),
        }
    }
}

impl FromStr for Judgment {
    type Err = MacbethError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || MacbethError::InvalidJudgment(s.to_owned());
        let cat = |t: &str| -> Result<u8, MacbethError> {
            t.strip_prefix('A').and_then(|d| d.parse::<u8>().ok()).ok_or_else(bad)
        };
        let j = match s.trim() {
            "?" => Judgment::DontKnow,
            t => match t.split_once('-') {
                Some((lo, hi)) => Judgment::Range(cat(lo)?, cat(hi)?),
                None => Judgment::Category(cat(t)?),
            },
        };
        j.validate()?;
        Ok(j)
    }
}

impl TryFrom<String> for Judgment {
    type Error = MacbethError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Judgment> for String {
    fn from(j: Judgment) -> String {
        j.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixContext {
    Criterion(CriterionId),
    Weighting,
}

/// A judgment on the ordered pair (`higher`, `lower`); `higher` comes first
/// in the matrix order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairJudgment {
    pub higher: ElementId,
    pub lower: ElementId,
    pub judgment: Judgment,
}

impl PairJudgment {
    pub fn new(higher: impl Into<String>, lower: impl Into<String>, judgment: Judgment) -> Self {
        Self { higher: ElementId::new(higher), lower: ElementId::new(lower), judgment }
    }

    pub fn pair(&self) -> JudgmentRef {
        JudgmentRef { higher: self.higher.clone(), lower: self.lower.clone() }
    }
}

/// Names one judged pair of a matrix.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct JudgmentRef {
    pub higher: ElementId,
    pub lower: ElementId,
}

impl fmt::Display for JudgmentRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.higher, self.lower)
    }
}

/// Elements in decreasing attractiveness, optional anchors and the pairwise
/// judgments entered so far. Missing judgments are allowed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgmentMatrix {
    pub context: MatrixContext,
    pub elements: Vec<ElementId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub good: Option<ElementId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bad: Option<ElementId>,
    #[serde(default)]
    pub judgments: Vec<PairJudgment>,
}

/// A judgment resolved to element positions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct IndexedPair {
    pub higher: usize,
    pub lower: usize,
    pub lo: u8,
    pub hi: u8,
}

impl JudgmentMatrix {
    pub fn new(context: MatrixContext, elements: Vec<ElementId>) -> Self {
        Self { context, elements, good: None, bad: None, judgments: Vec::new() }
    }

    /// Builder used by fixtures: elements by name, anchors by position.
    pub fn with_anchors(mut self, good: bool, bad: bool) -> Self {
        self.good = good.then(|| self.elements[0].clone());
        self.bad = bad.then(|| self.elements[self.elements.len() - 1].clone());
        self
    }

    pub fn judge(mut self, higher: &str, lower: &str, judgment: Judgment) -> Self {
        self.judgments.push(PairJudgment::new(higher, lower, judgment));
        self
    }

    pub fn position(&self, id: &ElementId) -> Option<usize> {
        self.elements.iter().position(|e| e == id)
    }

    pub fn validate(&self) -> Result<(), MacbethError> {
        if self.elements.is_empty() {
            return Err(MacbethError::EmptyMatrix);
        }
        let mut seen = BTreeSet::new();
        for e in &self.elements {
            if !seen.insert(e) {
                return Err(MacbethError::DuplicateElement(e.clone()));
            }
        }
        if let Some(g) = &self.good {
            if self.position(g) != Some(0) {
                return Err(MacbethError::AnchorPlacement(format!("good anchor `{g}` must be the first element")));
            }
        }
        if let Some(b) = &self.bad {
            if self.position(b) != Some(self.elements.len() - 1) {
                return Err(MacbethError::AnchorPlacement(format!("bad anchor `{b}` must be the last element")));
            }
        }
        if self.good.is_some() && self.good == self.bad {
            return Err(MacbethError::AnchorPlacement("good and bad anchors coincide".into()));
        }
        self.indexed_pairs().map(|_| ())
    }

    /// Judgments as positions, sorted by pair order.
    pub(crate) fn indexed_pairs(&self) -> Result<Vec<IndexedPair>, MacbethError> {
        let mut out = Vec::with_capacity(self.judgments.len());
        let mut seen = BTreeSet::new();
        for j in &self.judgments {
            j.judgment.validate()?;
            let x = self.position(&j.higher).ok_or_else(|| MacbethError::UnknownElement(j.higher.clone()))?;
            let y = self.position(&j.lower).ok_or_else(|| MacbethError::UnknownElement(j.lower.clone()))?;
            if x >= y {
                return Err(MacbethError::UnorderedPair(j.pair()));
            }
            if !seen.insert((x, y)) {
                return Err(MacbethError::DuplicatePair(j.pair()));
            }
            let (lo, hi) = j.judgment.interval();
            out.push(IndexedPair { higher: x, lower: y, lo, hi });
        }
        out.sort_by_key(|p| (p.higher, p.lower));
        Ok(out)
    }

    pub(crate) fn reference(&self, p: &IndexedPair) -> JudgmentRef {
        JudgmentRef { higher: self.elements[p.higher].clone(), lower: self.elements[p.lower].clone() }
    }

    /// Copy without the listed pairs.
    pub fn without(&self, removed: &[JudgmentRef]) -> JudgmentMatrix {
        let mut m = self.clone();
        m.judgments.retain(|j| !removed.contains(&j.pair()));
        m
    }

    pub fn judgment(&self, higher: &str, lower: &str) -> Option<Judgment> {
        self.judgments
            .iter()
            .find(|j| j.higher.as_str() == higher && j.lower.as_str() == lower)
            .map(|j| j.judgment)
    }
}
