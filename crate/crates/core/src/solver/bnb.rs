use alloc::collections::BinaryHeap;
use alloc::format;
use alloc::rc::Rc;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::{Ordering, Reverse};

use thiserror::Error;

use super::simplex::{Basis, LpStatus, Simplex};
use super::{
    fractional, lp_data, Clock, NoClock, Quiet, SolveError, SolveObserver, SolveOptions, SolveResult, SolveStatus,
};
use crate::milp::{MilpModel, Symbol, VarId};

const INT_TOL: f64 = 1e-6;

/// An incumbent to seed branch-and-bound with.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WarmStart {
    incumbent: Option<(Vec<f64>, f64)>,
}

impl WarmStart {
    pub fn objective(&self) -> Option<f64> {
        self.incumbent.as_ref().map(|i| i.1)
    }

    pub fn values(&self) -> Option<&[f64]> {
        self.incumbent.as_ref().map(|i| i.0.as_slice())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WarmStartError {
    #[error("start violates {label} by {violation:e}")]
    Rejected { label: String, violation: f64 },
    #[error("start cannot be completed to a feasible solution")]
    Infeasible,
    #[error(transparent)]
    Solver(#[from] SolveError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Key(f64, u64);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

struct Node {
    id: u64,
    parent: u64,
    /// Bound overrides relative to the root, in branching order.
    changes: Vec<(VarId, f64, f64)>,
    basis: Rc<Basis>,
}

fn priority_class(model: &MilpModel, j: VarId) -> u8 {
    match model.variables()[j].tag.symbol {
        Symbol::U => 0,
        Symbol::Y => 1,
        Symbol::X => 2,
        _ => 3,
    }
}

fn branch_variable(model: &MilpModel, values: &[f64], cands: &[VarId], priority: bool) -> VarId {
    let mut best = cands[0];
    for &j in &cands[1..] {
        let key = |v: VarId| {
            let x = values[v];
            let f = x - libm::floor(x);
            let class = if priority { priority_class(model, v) } else { 0 };
            (class, -f.min(1.0 - f))
        };
        let (cb, fb) = key(best);
        let (cj, fj) = key(j);
        let better = match cj.cmp(&cb) {
            Ordering::Less => true,
            Ordering::Greater => false,
            Ordering::Equal => match fj.total_cmp(&fb) {
                Ordering::Less => true,
                Ordering::Greater => false,
                Ordering::Equal => model.variables()[j].tag < model.variables()[best].tag,
            },
        };
        if better {
            best = j;
        }
    }
    best
}

/// Rounds integer variables and recomputes the objective exactly.
fn polish(model: &MilpModel, values: &[f64]) -> (Vec<f64>, f64) {
    let mut v = values.to_vec();
    for var in model.variables() {
        if var.kind.is_integer() {
            v[var.id] = libm::round(v[var.id]);
        }
    }
    let obj = model.evaluate(&v);
    (v, obj)
}

/// Greedy rounding dive from the current LP optimum. Leaves `s` modified.
fn dive(model: &MilpModel, s: &mut Simplex, interrupted: &dyn Fn() -> bool) -> Result<Option<Vec<f64>>, SolveError> {
    let limit = model.variables().iter().filter(|v| v.kind.is_integer()).count() + 1;
    for _ in 0..limit {
        let vals = s.values().to_vec();
        let frac = fractional(model, &vals, INT_TOL);
        if frac.is_empty() {
            return Ok(Some(vals));
        }
        // Fix the variable closest to integrality first.
        let mut pick = frac[0];
        let mut pick_dist = f64::INFINITY;
        for &j in &frac {
            let x = vals[j];
            let dist = (x - libm::round(x)).abs();
            if dist < pick_dist || (dist == pick_dist && model.variables()[j].tag < model.variables()[pick].tag) {
                pick = j;
                pick_dist = dist;
            }
        }
        let x = vals[pick];
        let near = libm::round(x);
        let far = if near > x { libm::floor(x) } else { libm::ceil(x) };
        let (lo, hi) = (s.lp.lower[pick], s.lp.upper[pick]);
        let mut fixed = false;
        for target in [near, far] {
            if target < lo || target > hi {
                continue;
            }
            s.set_bounds(pick, target, target);
            match s.solve(interrupted)? {
                LpStatus::Optimal => {
                    fixed = true;
                    break;
                }
                LpStatus::Interrupted => return Ok(None),
                _ => s.set_bounds(pick, lo, hi),
            }
        }
        if !fixed {
            return Ok(None);
        }
    }
    Ok(None)
}

/// Solves with default options, no clock and no observer.
pub fn solve_milp(model: &MilpModel, opts: &SolveOptions) -> Result<SolveResult, SolveError> {
    solve_milp_with(model, opts, &NoClock, &mut Quiet, None)
}

/// Best-first branch-and-bound.
pub fn solve_milp_with(
    model: &MilpModel,
    opts: &SolveOptions,
    clock: &dyn Clock,
    observer: &mut dyn SolveObserver,
    start: Option<&WarmStart>,
) -> Result<SolveResult, SolveError> {
    if opts.time_limit.is_nan() || opts.time_limit <= 0.0 {
        return Err(SolveError::Options(format!("time limit must be positive, got {}", opts.time_limit)));
    }
    if !(0.0..1.0).contains(&opts.rel_gap_target) {
        return Err(SolveError::Options(format!("gap target must be in [0, 1), got {}", opts.rel_gap_target)));
    }
    let expired = || clock.elapsed() > opts.time_limit;
    let never = || false;
    let root_lp = lp_data(model);
    let root_lower = root_lp.lower.clone();
    let root_upper = root_lp.upper.clone();
    let mut s = Simplex::new(root_lp);

    let mut incumbent: Option<(Vec<f64>, f64)> = None;
    if let Some((v, obj)) = start.and_then(|w| w.incumbent.clone()) {
        observer.on_incumbent(&v, obj);
        incumbent = Some((v, obj));
    }
    let ub = |inc: &Option<(Vec<f64>, f64)>| inc.as_ref().map_or(f64::INFINITY, |i| i.1);
    let prune_tol = |u: f64| (opts.rel_gap_target * u.abs()).max(1e-9 * u.abs().max(1.0));

    let finish = |status: SolveStatus,
                  incumbent: Option<(Vec<f64>, f64)>,
                  bound: Option<f64>,
                  nodes: u64,
                  iters: u64| {
        let (values, objective) = match incumbent {
            Some((v, o)) => (v, Some(o)),
            None => (Vec::new(), None),
        };
        let bound = match (bound, objective) {
            (Some(b), Some(o)) => Some(b.min(o)),
            (b, _) => b,
        };
        SolveResult {
            status,
            objective,
            bound,
            values,
            nodes,
            lp_iterations: iters,
            time: clock.elapsed(),
        }
    };

    // The root relaxation always runs to completion so a bound exists.
    match s.solve(&never)? {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Ok(finish(SolveStatus::Infeasible, None, None, 1, s.iterations)),
        LpStatus::Unbounded => return Ok(finish(SolveStatus::Unbounded, None, None, 1, s.iterations)),
        LpStatus::Interrupted => unreachable!(),
    }
    let root_obj = s.objective() + model.objective_constant;
    let mut best_bound = root_obj;
    observer.on_bound(best_bound);

    if fractional(model, s.values(), INT_TOL).is_empty() {
        let (v, obj) = polish(model, s.values());
        if obj < ub(&incumbent) {
            observer.on_incumbent(&v, obj);
            incumbent = Some((v, obj));
        }
        return Ok(finish(SolveStatus::Optimal, incumbent, Some(root_obj), 1, s.iterations));
    }
    let root_basis = Rc::new(s.snapshot());
    if !expired() {
        let mut diver = Simplex::new(lp_data(model));
        diver.restore(&root_basis)?;
        if let Some(v) = dive(model, &mut diver, &expired)? {
            let (v, obj) = polish(model, &v);
            if obj < ub(&incumbent) && model.first_violation(&v, 1e-6).is_none() {
                observer.on_incumbent(&v, obj);
                incumbent = Some((v, obj));
            }
        }
    }

    let mut heap: BinaryHeap<Reverse<Key>> = BinaryHeap::new();
    let mut nodes: alloc::collections::BTreeMap<u64, Node> = alloc::collections::BTreeMap::new();
    let mut next_id = 1u64;
    nodes.insert(
        0,
        Node {
            id: 0,
            parent: u64::MAX,
            changes: Vec::new(),
            basis: root_basis,
        },
    );
    heap.push(Reverse(Key(root_obj, 0)));
    let mut processed = 0u64;
    let mut last: u64 = u64::MAX;
    let mut current: Vec<(VarId, f64, f64)> = Vec::new();
    let mut first = true;

    while let Some(Reverse(Key(bound, id))) = heap.pop() {
        let node = nodes.remove(&id).expect("queued node");
        if bound > best_bound {
            best_bound = bound;
            observer.on_bound(best_bound);
        }
        let u = ub(&incumbent);
        if bound >= u - prune_tol(u) {
            // Every remaining node is at least as bad.
            heap.clear();
            break;
        }
        if expired() || opts.node_limit.is_some_and(|l| processed >= l) {
            return Ok(finish(SolveStatus::LimitReached, incumbent, Some(best_bound), processed, s.iterations));
        }
        processed += 1;

        if !first {
            for &(j, _, _) in &current {
                s.set_bounds(j, root_lower[j], root_upper[j]);
            }
            for &(j, lo, hi) in &node.changes {
                s.set_bounds(j, lo, hi);
            }
            if node.parent != last {
                s.restore(&node.basis)?;
            }
        }
        first = false;
        current = node.changes.clone();
        last = node.id;

        let status = s.solve(&expired)?;
        match status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded => {
                return Ok(finish(SolveStatus::Unbounded, None, None, processed, s.iterations));
            }
            LpStatus::Interrupted => {
                let lb = best_bound.min(bound);
                return Ok(finish(SolveStatus::LimitReached, incumbent, Some(lb), processed, s.iterations));
            }
        }
        let obj = s.objective() + model.objective_constant;
        let u = ub(&incumbent);
        if obj >= u - prune_tol(u) {
            continue;
        }
        let values = s.values().to_vec();
        let frac = fractional(model, &values, INT_TOL);
        if frac.is_empty() {
            let (v, pobj) = polish(model, &values);
            if pobj < u {
                log::debug!("incumbent {pobj} at node {}", node.id);
                observer.on_incumbent(&v, pobj);
                incumbent = Some((v, pobj));
            }
            continue;
        }
        let j = branch_variable(model, &values, &frac, opts.branch_priority);
        let x = values[j];
        let (lo, hi) = (s.lp.lower[j], s.lp.upper[j]);
        let basis = Rc::new(s.snapshot());
        let children = [(lo, libm::floor(x)), (libm::ceil(x), hi)];
        for (clo, chi) in children {
            if clo > chi {
                continue;
            }
            let mut changes = node.changes.clone();
            changes.retain(|c| c.0 != j);
            changes.push((j, clo, chi));
            let cid = next_id;
            next_id += 1;
            nodes.insert(
                cid,
                Node {
                    id: cid,
                    parent: node.id,
                    changes,
                    basis: basis.clone(),
                },
            );
            heap.push(Reverse(Key(obj, cid)));
        }
    }

    match incumbent {
        Some((_, o)) => {
            if o > best_bound {
                observer.on_bound(o);
            }
            Ok(finish(SolveStatus::Optimal, incumbent, Some(o), processed, s.iterations))
        }
        None => Ok(finish(SolveStatus::Infeasible, None, None, processed, s.iterations)),
    }
}

/// Builds an incumbent from a partial assignment: constraints whose
/// variables are all assigned must hold, the rest is completed by a
/// rounding dive with the assigned variables fixed.
pub fn warm_start(model: &MilpModel, assignment: &[(VarId, f64)]) -> Result<WarmStart, WarmStartError> {
    if assignment.is_empty() {
        return Ok(WarmStart::default());
    }
    let mut assigned = alloc::vec![None; model.num_vars()];
    for &(j, v) in assignment {
        assigned[j] = Some(v);
    }
    for c in model.constraints() {
        if c.terms.iter().all(|&(j, _)| assigned[j].is_some()) {
            let vals: Vec<f64> = (0..model.num_vars()).map(|j| assigned[j].unwrap_or(0.0)).collect();
            let viol = c.violation(&vals);
            if viol > 1e-6 {
                return Err(WarmStartError::Rejected {
                    label: format!("{}", c.label),
                    violation: viol,
                });
            }
        }
    }
    let mut s = Simplex::new(lp_data(model));
    for &(j, v) in assignment {
        s.set_bounds(j, v, v);
    }
    match s.solve(&|| false).map_err(SolveError::from)? {
        LpStatus::Optimal => {}
        _ => return Err(WarmStartError::Infeasible),
    }
    match dive(model, &mut s, &|| false)? {
        Some(v) => {
            let (v, obj) = polish(model, &v);
            if model.first_violation(&v, 1e-6).is_some() {
                return Err(WarmStartError::Infeasible);
            }
            Ok(WarmStart {
                incumbent: Some((v, obj)),
            })
        }
        None => Err(WarmStartError::Infeasible),
    }
}
