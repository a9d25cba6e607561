//! Exact MILP solving: bounded simplex relaxations inside a best-first
//! branch-and-bound.

mod bnb;
pub mod simplex;

use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::milp::{MilpModel, Sense, VarId};
use simplex::{LpData, LpError, LpStatus, Simplex};

pub use bnb::{solve_milp, solve_milp_with, warm_start, WarmStart, WarmStartError};

/// Elapsed-time source. The core crate has no clock of its own.
pub trait Clock {
    /// Seconds since the solve started.
    fn elapsed(&self) -> f64;
}

/// A clock that never advances; time limits never trigger.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn elapsed(&self) -> f64 {
        0.0
    }
}

/// Hooks called during branch-and-bound.
pub trait SolveObserver {
    /// A new incumbent was accepted.
    fn on_incumbent(&mut self, _values: &[f64], _objective: f64) {}
    /// The global lower bound was updated.
    fn on_bound(&mut self, _bound: f64) {}
}

/// Observer that ignores everything.
pub struct Quiet;

impl SolveObserver for Quiet {}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    /// Seconds; checked through the [`Clock`] passed to the solve.
    pub time_limit: f64,
    pub rel_gap_target: f64,
    pub node_limit: Option<u64>,
    /// Accepted for interface stability; solving is single-threaded.
    pub threads: usize,
    pub seed: u64,
    /// Branch on u, then y, then x variables before anything else.
    pub branch_priority: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            time_limit: f64::INFINITY,
            rel_gap_target: 1e-9,
            node_limit: None,
            threads: 1,
            seed: 0,
            branch_priority: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Feasible,
    Infeasible,
    Unbounded,
    LimitReached,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub status: SolveStatus,
    /// Incumbent objective including the model constant.
    pub objective: Option<f64>,
    /// Best proven lower bound.
    pub bound: Option<f64>,
    pub values: Vec<f64>,
    pub nodes: u64,
    pub lp_iterations: u64,
    /// Seconds as reported by the clock.
    pub time: f64,
}

impl SolveResult {
    /// `(UB - LB) / UB`, when both bounds exist.
    pub fn gap(&self) -> Option<f64> {
        Some(relative_gap(self.objective?, self.bound?))
    }
}

/// `(ub - lb) / ub`, with zero for equal bounds.
pub fn relative_gap(ub: f64, lb: f64) -> f64 {
    let diff = ub - lb;
    if diff <= 0.0 {
        0.0
    } else if ub == 0.0 {
        f64::INFINITY
    } else {
        diff / ub.abs()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("invalid solve options: {0}")]
    Options(String),
    #[error("simplex iteration limit reached after {0} iterations")]
    IterationLimit(u64),
    #[error("basis became singular")]
    Singular,
    #[error("numerical drift: primal infeasibility {primal:e}, dual infeasibility {dual:e}")]
    Drift { primal: f64, dual: f64 },
}

impl From<LpError> for SolveError {
    fn from(e: LpError) -> Self {
        match e {
            LpError::IterationLimit(n) => SolveError::IterationLimit(n),
            LpError::Singular => SolveError::Singular,
            LpError::Drift { primal, dual } => SolveError::Drift { primal, dual },
        }
    }
}

pub(crate) fn lp_data(model: &MilpModel) -> LpData {
    let n = model.num_vars();
    let m = model.num_constraints();
    let mut cols = alloc::vec![Vec::new(); n];
    let mut rhs = Vec::with_capacity(m);
    let mut lower: Vec<f64> = model.variables().iter().map(|v| v.lower).collect();
    let mut upper: Vec<f64> = model.variables().iter().map(|v| v.upper).collect();
    for (i, c) in model.constraints().iter().enumerate() {
        for &(j, a) in &c.terms {
            cols[j].push((i, a));
        }
        rhs.push(c.rhs);
        let (l, u) = match c.sense {
            Sense::Le => (0.0, f64::INFINITY),
            Sense::Ge => (f64::NEG_INFINITY, 0.0),
            Sense::Eq => (0.0, 0.0),
        };
        lower.push(l);
        upper.push(u);
    }
    let mut cost = model.objective().to_vec();
    cost.extend(core::iter::repeat_n(0.0, m));
    LpData {
        n,
        m,
        cols,
        rhs,
        cost,
        lower,
        upper,
    }
}

/// Solves the continuous relaxation of `model`.
pub fn solve_lp(model: &MilpModel) -> Result<SolveResult, SolveError> {
    let mut s = Simplex::new(lp_data(model));
    let status = s.solve(&|| false)?;
    let (status, objective, values) = match status {
        LpStatus::Optimal => (
            SolveStatus::Optimal,
            Some(s.objective() + model.objective_constant),
            s.values().to_vec(),
        ),
        LpStatus::Infeasible => (SolveStatus::Infeasible, None, Vec::new()),
        LpStatus::Unbounded => (SolveStatus::Unbounded, None, Vec::new()),
        LpStatus::Interrupted => (SolveStatus::LimitReached, None, Vec::new()),
    };
    Ok(SolveResult {
        status,
        objective,
        bound: objective,
        values,
        nodes: 1,
        lp_iterations: s.iterations,
        time: 0.0,
    })
}

/// Indices of integer variables whose value is fractional beyond `tol`.
pub fn fractional(model: &MilpModel, values: &[f64], tol: f64) -> Vec<VarId> {
    model
        .variables()
        .iter()
        .filter(|v| v.kind.is_integer())
        .filter(|v| {
            let x = values[v.id];
            (x - libm::round(x)).abs() > tol
        })
        .map(|v| v.id)
        .collect()
}
