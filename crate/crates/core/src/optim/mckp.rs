//! Exact multiple-choice knapsack: pick at most one item per class under a
//! shared budget, maximizing total gain.
//!
//! Ties between optimal selections are broken towards the lexicographically
//! smallest chosen-index vector, where "none" sorts before every item.

use std::cmp::Ordering;

use thiserror::Error;

/// Brute force refuses instances with more per-class choice combinations than this.
pub const MAX_BRUTE_FORCE_COMBINATIONS: u64 = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MckpItem {
    pub gain: f64,
    pub cost: f64,
}

impl MckpItem {
    pub fn new(gain: f64, cost: f64) -> Self {
        Self { gain, cost }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MckpInstance {
    pub classes: Vec<Vec<MckpItem>>,
    /// May be `f64::INFINITY`.
    pub budget: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MckpSelection {
    pub chosen: Vec<Option<usize>>,
    pub total_gain: f64,
    pub total_cost: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum MckpError {
    #[error("item {item} of class {class} has a negative or non-finite gain or cost")]
    InvalidItem { class: usize, item: usize },
    #[error("budget must be nonnegative, got {0}")]
    InvalidBudget(f64),
    #[error("instance has {0} choice combinations, brute force is limited to {MAX_BRUTE_FORCE_COMBINATIONS}")]
    TooLarge(u64),
}

impl MckpInstance {
    pub fn new(classes: Vec<Vec<MckpItem>>, budget: f64) -> Self {
        Self { classes, budget }
    }

    pub fn validate(&self) -> Result<(), MckpError> {
        if self.budget.is_nan() || self.budget < 0.0 {
            return Err(MckpError::InvalidBudget(self.budget));
        }
        for (c, class) in self.classes.iter().enumerate() {
            for (i, item) in class.iter().enumerate() {
                let ok = item.gain.is_finite()
                    && item.cost.is_finite()
                    && item.gain >= 0.0
                    && item.cost >= 0.0;
                if !ok {
                    return Err(MckpError::InvalidItem { class: c, item: i });
                }
            }
        }
        Ok(())
    }

    /// Gain and cost of a selection, summed in class order.
    pub fn totals(&self, chosen: &[Option<usize>]) -> (f64, f64) {
        let mut gain = 0.0;
        let mut cost = 0.0;
        for (class, pick) in self.classes.iter().zip(chosen) {
            if let Some(i) = *pick {
                gain += class[i].gain;
                cost += class[i].cost;
            }
        }
        (gain, cost)
    }
}

/// `Less` when `a` beats `b`: higher gain, then lexicographically smaller vector.
fn compare(a_gain: f64, a: &[Option<usize>], b_gain: f64, b: &[Option<usize>]) -> Ordering {
    b_gain.total_cmp(&a_gain).then_with(|| a.cmp(b))
}

/// Exhaustive enumeration of every per-class choice, including "none".
pub fn brute_force_mckp(instance: &MckpInstance) -> Result<MckpSelection, MckpError> {
    instance.validate()?;
    let combos = instance
        .classes
        .iter()
        .try_fold(1u64, |acc, c| acc.checked_mul(c.len() as u64 + 1))
        .unwrap_or(u64::MAX);
    if combos > MAX_BRUTE_FORCE_COMBINATIONS {
        return Err(MckpError::TooLarge(combos));
    }

    let n = instance.classes.len();
    let mut current: Vec<Option<usize>> = vec![None; n];
    let mut best = current.clone();
    let (mut best_gain, mut best_cost) = instance.totals(&best);
    loop {
        // odometer, last class fastest, so combinations come out in lex order
        let mut pos = n;
        loop {
            if pos == 0 {
                return Ok(MckpSelection { chosen: best, total_gain: best_gain, total_cost: best_cost });
            }
            pos -= 1;
            let next = match current[pos] {
                None => Some(0),
                Some(i) => Some(i + 1),
            };
            if next.is_some_and(|i| i < instance.classes[pos].len()) {
                current[pos] = next;
                break;
            }
            current[pos] = None;
        }
        let (gain, cost) = instance.totals(&current);
        if cost <= instance.budget && compare(gain, &current, best_gain, &best) == Ordering::Less {
            best.clone_from(&current);
            best_gain = gain;
            best_cost = cost;
        }
    }
}

/// Upper concave envelope of one class, as a base gain at zero cost plus
/// increments of strictly positive cost and decreasing slope.
fn class_hull(items: &[MckpItem]) -> (f64, Vec<(f64, f64)>) {
    let mut pts: Vec<(f64, f64)> = std::iter::once((0.0, 0.0))
        .chain(items.iter().map(|it| (it.cost, it.gain)))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));
    let mut front: Vec<(f64, f64)> = Vec::new();
    for p in pts {
        if front.last().is_none_or(|last| p.1 > last.1) {
            if front.last().is_some_and(|last| last.0 == p.0) {
                front.pop();
            }
            front.push(p);
        }
    }
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for p in front {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // drop b if it lies on or below segment a -> p
            if (b.1 - a.1) * (p.0 - a.0) <= (p.1 - a.1) * (b.0 - a.0) {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let base = hull[0].1;
    let steps = hull.windows(2).map(|w| (w[1].0 - w[0].0, w[1].1 - w[0].1)).collect();
    (base, steps)
}

struct Bounds {
    /// For each depth d: summed base gain of classes d.. and their increments
    /// sorted by decreasing slope.
    suffix: Vec<(f64, Vec<(f64, f64)>)>,
}

impl Bounds {
    fn new(instance: &MckpInstance) -> Self {
        let hulls: Vec<_> = instance.classes.iter().map(|c| class_hull(c)).collect();
        let mut suffix = Vec::with_capacity(hulls.len() + 1);
        for d in 0..=hulls.len() {
            let base: f64 = hulls[d..].iter().map(|h| h.0).sum();
            let mut steps: Vec<(f64, f64)> =
                hulls[d..].iter().flat_map(|h| h.1.iter().copied()).collect();
            steps.sort_by(|a, b| (b.1 / b.0).total_cmp(&(a.1 / a.0)));
            suffix.push((base, steps));
        }
        Self { suffix }
    }

    /// LP-relaxation bound on the gain obtainable from classes `depth..`.
    fn remaining(&self, depth: usize, mut budget: f64) -> f64 {
        let (base, steps) = &self.suffix[depth];
        let mut bound = *base;
        for &(dc, dg) in steps {
            if dc <= budget {
                budget -= dc;
                bound += dg;
            } else {
                bound += dg * (budget / dc);
                break;
            }
        }
        bound
    }
}

struct Search<'a> {
    instance: &'a MckpInstance,
    bounds: Bounds,
    order: Vec<Vec<usize>>,
    current: Vec<Option<usize>>,
    best: Vec<Option<usize>>,
    best_gain: f64,
    best_cost: f64,
}

impl Search<'_> {
    fn visit(&mut self, depth: usize, gain: f64, cost: f64) {
        if depth == self.instance.classes.len() {
            if compare(gain, &self.current, self.best_gain, &self.best) == Ordering::Less {
                self.best.clone_from(&self.current);
                self.best_gain = gain;
                self.best_cost = cost;
            }
            return;
        }
        let slack = 1e-9 * self.best_gain.abs().max(1.0);
        let bound = gain + self.bounds.remaining(depth, self.instance.budget - cost);
        if bound < self.best_gain - slack {
            return;
        }
        for k in 0..self.order[depth].len() {
            let i = self.order[depth][k];
            let item = self.instance.classes[depth][i];
            let next_cost = cost + item.cost;
            if next_cost <= self.instance.budget {
                self.current[depth] = Some(i);
                self.visit(depth + 1, gain + item.gain, next_cost);
            }
        }
        self.current[depth] = None;
        self.visit(depth + 1, gain, cost);
    }
}

/// Branch and bound over per-class choices, bounded by the fractional
/// relaxation. Exact: returns the same selection as [`brute_force_mckp`].
pub fn solve_mckp(instance: &MckpInstance) -> Result<MckpSelection, MckpError> {
    instance.validate()?;
    let n = instance.classes.len();
    // Try high-gain items first so a strong incumbent appears early.
    let order = instance
        .classes
        .iter()
        .map(|class| {
            let mut idx: Vec<usize> = (0..class.len()).collect();
            idx.sort_by(|&a, &b| class[b].gain.total_cmp(&class[a].gain).then(a.cmp(&b)));
            idx
        })
        .collect();
    let mut search = Search {
        instance,
        bounds: Bounds::new(instance),
        order,
        current: vec![None; n],
        best: vec![None; n],
        best_gain: 0.0,
        best_cost: 0.0,
    };
    search.visit(0, 0.0, 0.0);
    Ok(MckpSelection {
        chosen: search.best,
        total_gain: search.best_gain,
        total_cost: search.best_cost,
    })
}
