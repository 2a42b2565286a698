//! Dense two-phase simplex for small linear programs.
//!
//! Problems in this crate have tens of variables and at most a few thousand
//! rows, so a dense tableau with Bland's pivoting rule is plenty. Bland's rule
//! guarantees termination on degenerate problems, which MACBETH constraint
//! systems produce constantly (many ties at zero).

use thiserror::Error;

/// Feasibility tolerance applied to optimal assignments.
pub const FEASIBILITY_TOL: f64 = 1e-9;

const PIVOT_EPS: f64 = 1e-11;
const MAX_PIVOTS: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<(VarId, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(v, a)| a * x[v.0]).sum()
    }

    /// Whether `x` satisfies this row within `tol`.
    pub fn is_satisfied(&self, x: &[f64], tol: f64) -> bool {
        let lhs = self.activity(x);
        match self.relation {
            Relation::Le => lhs <= self.rhs + tol,
            Relation::Ge => lhs >= self.rhs - tol,
            Relation::Eq => (lhs - self.rhs).abs() <= tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Objective {
    pub direction: Direction,
    pub coeffs: Vec<(VarId, f64)>,
}

/// A linear program over real variables. An absent objective means a pure
/// feasibility problem.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearProgram {
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    pub objective: Option<Objective>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { assignment: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn is_feasible(&self) -> bool {
        !matches!(self, LpOutcome::Infeasible)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum LpError {
    #[error("constraint {constraint} references unknown variable {var}")]
    UnknownVariable { constraint: usize, var: usize },
    #[error("objective references unknown variable {0}")]
    UnknownObjectiveVariable(usize),
    #[error("variable `{0}` has lower bound above upper bound")]
    InvertedBounds(String),
    #[error("non-finite coefficient or right-hand side in {0}")]
    NonFinite(String),
    #[error("simplex exceeded {MAX_PIVOTS} pivots")]
    PivotLimit,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_variable(
        &mut self,
        name: impl Into<String>,
        lower: Option<f64>,
        upper: Option<f64>,
    ) -> VarId {
        self.variables.push(Variable { name: name.into(), lower, upper });
        VarId(self.variables.len() - 1)
    }

    pub fn add_constraint(&mut self, coeffs: Vec<(VarId, f64)>, relation: Relation, rhs: f64) {
        self.constraints.push(Constraint { coeffs, relation, rhs });
    }

    pub fn set_objective(&mut self, direction: Direction, coeffs: Vec<(VarId, f64)>) {
        self.objective = Some(Objective { direction, coeffs });
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.variables.len();
        for v in &self.variables {
            let nan = v.lower.is_some_and(f64::is_nan) || v.upper.is_some_and(f64::is_nan);
            if nan {
                return Err(LpError::NonFinite(format!("bounds of `{}`", v.name)));
            }
            if let (Some(l), Some(u)) = (v.lower, v.upper) {
                if l > u {
                    return Err(LpError::InvertedBounds(v.name.clone()));
                }
            }
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if !c.rhs.is_finite() {
                return Err(LpError::NonFinite(format!("constraint {i}")));
            }
            for &(v, a) in &c.coeffs {
                if v.0 >= n {
                    return Err(LpError::UnknownVariable { constraint: i, var: v.0 });
                }
                if !a.is_finite() {
                    return Err(LpError::NonFinite(format!("constraint {i}")));
                }
            }
        }
        if let Some(obj) = &self.objective {
            for &(v, a) in &obj.coeffs {
                if v.0 >= n {
                    return Err(LpError::UnknownObjectiveVariable(v.0));
                }
                if !a.is_finite() {
                    return Err(LpError::NonFinite("objective".into()));
                }
            }
        }
        Ok(())
    }

    /// Checks an assignment against every row and bound.
    pub fn is_feasible_point(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.variables.len()
            && self.variables.iter().zip(x).all(|(v, &xi)| {
                v.lower.is_none_or(|l| xi >= l - tol) && v.upper.is_none_or(|u| xi <= u + tol)
            })
            && self.constraints.iter().all(|c| c.is_satisfied(x, tol))
    }
}

/// How an original variable is expressed through nonnegative tableau columns.
enum Mapping {
    Fixed(f64),
    /// x = offset + sign * y
    Shifted { offset: f64, sign: f64, col: usize },
    /// x = y_plus - y_minus
    Free { plus: usize, minus: usize },
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn rhs(&self, r: usize) -> f64 {
        self.rows[r][self.ncols]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        self.rows[r][c] = 1.0;
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[c] = 0.0;
            }
        }
        self.basis[r] = c;
    }

    /// Minimizes `cost · y` over columns where `allowed` is true.
    /// Returns `false` when the problem is unbounded.
    fn minimize(&mut self, cost: &[f64], allowed: &[bool]) -> Result<bool, LpError> {
        for _ in 0..MAX_PIVOTS {
            // Bland: lowest-index column with negative reduced cost.
            let entering = (0..self.ncols).find(|&j| {
                if !allowed[j] || self.basis.contains(&j) {
                    return false;
                }
                let reduced: f64 = cost[j]
                    - self
                        .rows
                        .iter()
                        .zip(&self.basis)
                        .map(|(row, &b)| cost[b] * row[j])
                        .sum::<f64>();
                reduced < -PIVOT_EPS
            });
            let Some(c) = entering else {
                return Ok(true);
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows.len() {
                let a = self.rows[r][c];
                if a > PIVOT_EPS {
                    let ratio = self.rhs(r) / a;
                    leave = match leave {
                        None => Some((r, ratio)),
                        Some((lr, lratio)) => {
                            if ratio < lratio - PIVOT_EPS
                                || (ratio <= lratio + PIVOT_EPS && self.basis[r] < self.basis[lr])
                            {
                                Some((r, ratio))
                            } else {
                                Some((lr, lratio))
                            }
                        }
                    };
                }
            }
            match leave {
                None => return Ok(false),
                Some((r, _)) => self.pivot(r, c),
            }
        }
        Err(LpError::PivotLimit)
    }

    fn objective(&self, cost: &[f64]) -> f64 {
        self.basis.iter().enumerate().map(|(r, &b)| cost[b] * self.rhs(r)).sum()
    }
}

/// Solves `lp` with a two-phase dense simplex. Deterministic for identical input.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpOutcome, LpError> {
    lp.validate()?;

    let mut ncols = 0usize;
    let mut mappings = Vec::with_capacity(lp.variables.len());
    // Rows of the form y <= ub coming from doubly bounded variables.
    let mut bound_rows: Vec<(usize, f64)> = Vec::new();
    for v in &lp.variables {
        let m = match (v.lower, v.upper) {
            (Some(l), Some(u)) if l == u => Mapping::Fixed(l),
            (Some(l), u) if l.is_finite() => {
                let col = ncols;
                ncols += 1;
                if let Some(u) = u.filter(|u| u.is_finite()) {
                    bound_rows.push((col, u - l));
                }
                Mapping::Shifted { offset: l, sign: 1.0, col }
            }
            (_, Some(u)) if u.is_finite() => {
                let col = ncols;
                ncols += 1;
                Mapping::Shifted { offset: u, sign: -1.0, col }
            }
            _ => {
                let plus = ncols;
                ncols += 2;
                Mapping::Free { plus, minus: plus + 1 }
            }
        };
        mappings.push(m);
    }
    let nstruct = ncols;

    // Each row: dense coefficients over structural columns, relation, rhs.
    let mut rows: Vec<(Vec<f64>, Relation, f64)> = Vec::new();
    for c in &lp.constraints {
        let mut coeffs = vec![0.0; nstruct];
        let mut rhs = c.rhs;
        for &(v, a) in &c.coeffs {
            match mappings[v.0] {
                Mapping::Fixed(val) => rhs -= a * val,
                Mapping::Shifted { offset, sign, col } => {
                    rhs -= a * offset;
                    coeffs[col] += a * sign;
                }
                Mapping::Free { plus, minus } => {
                    coeffs[plus] += a;
                    coeffs[minus] -= a;
                }
            }
        }
        rows.push((coeffs, c.relation, rhs));
    }
    for &(col, ub) in &bound_rows {
        let mut coeffs = vec![0.0; nstruct];
        coeffs[col] = 1.0;
        rows.push((coeffs, Relation::Le, ub));
    }
    for (coeffs, rel, rhs) in rows.iter_mut() {
        if *rhs < 0.0 {
            coeffs.iter_mut().for_each(|a| *a = -*a);
            *rhs = -*rhs;
            *rel = match *rel {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }

    // Rows with no structural coefficient are either trivially true or a
    // contradiction; resolve them up front.
    let mut kept = Vec::with_capacity(rows.len());
    for (coeffs, rel, rhs) in rows {
        if coeffs.iter().all(|&a| a == 0.0) {
            let ok = match rel {
                Relation::Le => 0.0 <= rhs + FEASIBILITY_TOL,
                Relation::Ge => 0.0 >= rhs - FEASIBILITY_TOL,
                Relation::Eq => rhs.abs() <= FEASIBILITY_TOL,
            };
            if !ok {
                return Ok(LpOutcome::Infeasible);
            }
        } else {
            kept.push((coeffs, rel, rhs));
        }
    }
    let rows = kept;

    let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Relation::Le).count();
    let total = nstruct + n_slack + n_art;
    let art_start = nstruct + n_slack;

    let mut tab = Tableau { rows: Vec::with_capacity(rows.len()), basis: Vec::new(), ncols: total };
    let mut next_slack = nstruct;
    let mut next_art = art_start;
    for (coeffs, rel, rhs) in &rows {
        let mut row = vec![0.0; total + 1];
        row[..nstruct].copy_from_slice(coeffs);
        row[total] = *rhs;
        match rel {
            Relation::Le => {
                row[next_slack] = 1.0;
                tab.basis.push(next_slack);
                next_slack += 1;
            }
            Relation::Ge => {
                row[next_slack] = -1.0;
                next_slack += 1;
                row[next_art] = 1.0;
                tab.basis.push(next_art);
                next_art += 1;
            }
            Relation::Eq => {
                row[next_art] = 1.0;
                tab.basis.push(next_art);
                next_art += 1;
            }
        }
        tab.rows.push(row);
    }

    if n_art > 0 {
        let mut phase1 = vec![0.0; total];
        phase1[art_start..].iter_mut().for_each(|c| *c = 1.0);
        let allowed = vec![true; total];
        tab.minimize(&phase1, &allowed)?;
        let scale = 1.0 + rows.iter().map(|r| r.2).fold(0.0, f64::max);
        if tab.objective(&phase1) > FEASIBILITY_TOL * scale {
            return Ok(LpOutcome::Infeasible);
        }
        // Drive remaining artificials out of the basis; drop redundant rows.
        let mut r = 0;
        while r < tab.rows.len() {
            if tab.basis[r] >= art_start {
                let col = (0..art_start).find(|&j| tab.rows[r][j].abs() > PIVOT_EPS);
                match col {
                    Some(c) => {
                        tab.pivot(r, c);
                        r += 1;
                    }
                    None => {
                        tab.rows.remove(r);
                        tab.basis.remove(r);
                    }
                }
            } else {
                r += 1;
            }
        }
    }

    let mut cost = vec![0.0; total];
    let sense = match &lp.objective {
        Some(obj) => {
            let s = if obj.direction == Direction::Maximize { -1.0 } else { 1.0 };
            for &(v, a) in &obj.coeffs {
                match mappings[v.0] {
                    Mapping::Fixed(_) => {}
                    Mapping::Shifted { sign, col, .. } => cost[col] += s * a * sign,
                    Mapping::Free { plus, minus } => {
                        cost[plus] += s * a;
                        cost[minus] -= s * a;
                    }
                }
            }
            Some(s)
        }
        None => None,
    };
    if sense.is_some() {
        let allowed: Vec<bool> = (0..total).map(|j| j < art_start).collect();
        if !tab.minimize(&cost, &allowed)? {
            return Ok(LpOutcome::Unbounded);
        }
    }

    let mut y = vec![0.0; total];
    for (r, &b) in tab.basis.iter().enumerate() {
        y[b] = tab.rhs(r).max(0.0);
    }
    let assignment: Vec<f64> = mappings
        .iter()
        .map(|m| match *m {
            Mapping::Fixed(val) => val,
            Mapping::Shifted { offset, sign, col } => offset + sign * y[col],
            Mapping::Free { plus, minus } => y[plus] - y[minus],
        })
        .collect();
    let value = match &lp.objective {
        Some(obj) => obj.coeffs.iter().map(|&(v, a)| a * assignment[v.0]).sum(),
        None => 0.0,
    };
    Ok(LpOutcome::Optimal { assignment, value })
}
