//! Solvers shared by the MACBETH engine and the adaptation optimizer.

pub mod lp;
pub mod mckp;

pub use lp::{solve_lp, Direction, LinearProgram, LpError, LpOutcome, Relation, VarId};
pub use mckp::{brute_force_mckp, solve_mckp, MckpError, MckpInstance, MckpItem, MckpSelection};
