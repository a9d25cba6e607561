//! Bounded revised simplex on `A x + s = b` with a product-form inverse.
//!
//! Slack `s_i` bounds encode the row sense: `<=` gives `[0, inf)`, `>=`
//! gives `(-inf, 0]`, `=` gives `[0, 0]`.

use alloc::vec;
use alloc::vec::Vec;

pub const FEAS_TOL: f64 = 1e-7;
pub const DUAL_TOL: f64 = 1e-7;
pub const PIVOT_TOL: f64 = 1e-9;
const REINVERT_EVERY: usize = 100;
const STALL_LIMIT: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    Interrupted,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpError {
    IterationLimit(u64),
    Singular,
    /// Final re-check after reinversion failed repeatedly.
    Drift { primal: f64, dual: f64 },
}

/// Column-wise LP data over structural variables `0..n` and slacks
/// `n..n+m`.
#[derive(Debug, Clone)]
pub struct LpData {
    pub n: usize,
    pub m: usize,
    pub cols: Vec<Vec<(usize, f64)>>,
    pub rhs: Vec<f64>,
    pub cost: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LpData {
    fn column(&self, j: usize) -> ColIter<'_> {
        if j < self.n {
            ColIter::Sparse(self.cols[j].iter())
        } else {
            ColIter::Unit(Some(j - self.n))
        }
    }

    fn dot(&self, y: &[f64], j: usize) -> f64 {
        if j < self.n {
            self.cols[j].iter().map(|&(i, a)| a * y[i]).sum()
        } else {
            y[j - self.n]
        }
    }
}

enum ColIter<'a> {
    Sparse(core::slice::Iter<'a, (usize, f64)>),
    Unit(Option<usize>),
}

impl Iterator for ColIter<'_> {
    type Item = (usize, f64);
    fn next(&mut self) -> Option<(usize, f64)> {
        match self {
            ColIter::Sparse(it) => it.next().copied(),
            ColIter::Unit(r) => r.take().map(|i| (i, 1.0)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum State {
    Basic(usize),
    Lower,
    Upper,
    Free,
}

#[derive(Debug, Clone)]
struct Eta {
    row: usize,
    pivot: f64,
    others: Vec<(usize, f64)>,
}

/// Basis snapshot used to warm start another solve.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    pub state: Vec<State>,
}

pub struct Simplex {
    pub lp: LpData,
    basis: Vec<usize>,
    state: Vec<State>,
    x: Vec<f64>,
    etas: Vec<Eta>,
    since_reinvert: usize,
    pub iterations: u64,
}

fn initial_state(lower: f64, upper: f64, cost: f64) -> State {
    match (lower.is_finite(), upper.is_finite()) {
        (true, true) => {
            if cost >= 0.0 {
                State::Lower
            } else {
                State::Upper
            }
        }
        (true, false) => State::Lower,
        (false, true) => State::Upper,
        (false, false) => State::Free,
    }
}

impl Simplex {
    /// Starts from the slack basis.
    pub fn new(lp: LpData) -> Simplex {
        let (n, m) = (lp.n, lp.m);
        let mut state = Vec::with_capacity(n + m);
        for j in 0..n {
            state.push(initial_state(lp.lower[j], lp.upper[j], lp.cost[j]));
        }
        for i in 0..m {
            state.push(State::Basic(i));
        }
        let basis = (n..n + m).collect();
        let mut s = Simplex {
            lp,
            basis,
            state,
            x: vec![0.0; n + m],
            etas: Vec::new(),
            since_reinvert: 0,
            iterations: 0,
        };
        s.compute_primal();
        s
    }

    pub fn values(&self) -> &[f64] {
        &self.x[..self.lp.n]
    }

    pub fn objective(&self) -> f64 {
        (0..self.lp.n).map(|j| self.lp.cost[j] * self.x[j]).sum()
    }

    pub fn snapshot(&self) -> Basis {
        Basis {
            state: self.state.clone(),
        }
    }

    /// Installs a saved basis and refactorizes.
    pub fn restore(&mut self, basis: &Basis) -> Result<(), LpError> {
        let target: Vec<usize> = basis
            .state
            .iter()
            .enumerate()
            .filter(|(_, s)| matches!(s, State::Basic(_)))
            .map(|(j, _)| j)
            .collect();
        for (j, s) in basis.state.iter().enumerate() {
            if !matches!(s, State::Basic(_)) {
                self.state[j] = *s;
            }
        }
        self.reinvert(&target)?;
        Ok(())
    }

    /// Changes the bounds of a variable, keeping it at the corresponding
    /// bound when nonbasic.
    pub fn set_bounds(&mut self, j: usize, lower: f64, upper: f64) {
        self.lp.lower[j] = lower;
        self.lp.upper[j] = upper;
        match self.state[j] {
            State::Basic(_) => {}
            State::Lower if !lower.is_finite() => {
                self.state[j] = initial_state(lower, upper, self.lp.cost[j]);
            }
            State::Upper if !upper.is_finite() => {
                self.state[j] = initial_state(lower, upper, self.lp.cost[j]);
            }
            State::Free if lower.is_finite() || upper.is_finite() => {
                self.state[j] = initial_state(lower, upper, self.lp.cost[j]);
            }
            _ => {}
        }
    }

    fn nonbasic_value(&self, j: usize) -> f64 {
        match self.state[j] {
            State::Lower => self.lp.lower[j],
            State::Upper => self.lp.upper[j],
            State::Free => 0.0,
            State::Basic(_) => self.x[j],
        }
    }

    fn ftran(&self, v: &mut [f64]) {
        for eta in &self.etas {
            let vr = v[eta.row];
            if vr == 0.0 {
                continue;
            }
            let vr = vr / eta.pivot;
            v[eta.row] = vr;
            for &(i, a) in &eta.others {
                v[i] -= a * vr;
            }
        }
    }

    fn btran(&self, y: &mut [f64]) {
        for eta in self.etas.iter().rev() {
            let mut acc = y[eta.row];
            for &(i, a) in &eta.others {
                acc -= a * y[i];
            }
            y[eta.row] = acc / eta.pivot;
        }
    }

    fn column_dense(&self, j: usize) -> Vec<f64> {
        let mut v = vec![0.0; self.lp.m];
        for (i, a) in self.lp.column(j) {
            v[i] = a;
        }
        self.ftran(&mut v);
        v
    }

    fn push_eta(&mut self, row: usize, alpha: &[f64]) {
        let others = alpha
            .iter()
            .enumerate()
            .filter(|&(i, &a)| i != row && a.abs() > 1e-14)
            .map(|(i, &a)| (i, a))
            .collect();
        self.etas.push(Eta {
            row,
            pivot: alpha[row],
            others,
        });
        self.since_reinvert += 1;
    }

    /// Recomputes basic values from the nonbasic ones.
    fn compute_primal(&mut self) {
        let (n, m) = (self.lp.n, self.lp.m);
        let mut r = self.lp.rhs.clone();
        for j in 0..n + m {
            if matches!(self.state[j], State::Basic(_)) {
                continue;
            }
            let v = self.nonbasic_value(j);
            self.x[j] = v;
            if v != 0.0 {
                for (i, a) in self.lp.column(j) {
                    r[i] -= a * v;
                }
            }
        }
        self.ftran(&mut r);
        for (pos, &j) in self.basis.iter().enumerate() {
            self.x[j] = r[pos];
        }
    }

    fn duals(&self, phase1: bool) -> Vec<f64> {
        let mut y: Vec<f64> = self
            .basis
            .iter()
            .map(|&j| {
                if phase1 {
                    let (l, u, x) = (self.lp.lower[j], self.lp.upper[j], self.x[j]);
                    if x < l - FEAS_TOL {
                        -1.0
                    } else if x > u + FEAS_TOL {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    self.lp.cost[j]
                }
            })
            .collect();
        self.btran(&mut y);
        y
    }

    fn reduced_costs(&self, y: &[f64], phase1: bool) -> Vec<f64> {
        let total = self.lp.n + self.lp.m;
        let mut d = vec![0.0; total];
        for (j, dj) in d.iter_mut().enumerate() {
            if matches!(self.state[j], State::Basic(_)) {
                continue;
            }
            let c = if phase1 { 0.0 } else { self.lp.cost[j] };
            *dj = c - self.lp.dot(y, j);
        }
        d
    }

    /// Rebuilds the inverse for the given basic set, starting from the
    /// slack basis. Columns that turn out dependent are left nonbasic and
    /// replaced by slacks.
    fn reinvert(&mut self, target: &[usize]) -> Result<(), LpError> {
        let (n, m) = (self.lp.n, self.lp.m);
        self.etas.clear();
        self.since_reinvert = 0;
        let mut in_target = vec![false; n + m];
        for &j in target {
            in_target[j] = true;
        }
        let mut basis: Vec<usize> = (n..n + m).collect();
        // Rows whose slack may be evicted.
        let mut free_row: Vec<bool> = (0..m).map(|i| !in_target[n + i]).collect();
        let mut structs: Vec<usize> = target.iter().copied().filter(|&j| j < n).collect();
        structs.sort_by_key(|&j| (self.lp.cols[j].len(), j));
        for j in structs {
            let alpha = self.column_dense(j);
            let mut best = None;
            let mut best_abs = PIVOT_TOL;
            for i in 0..m {
                if free_row[i] && alpha[i].abs() > best_abs {
                    best_abs = alpha[i].abs();
                    best = Some(i);
                }
            }
            match best {
                Some(r) => {
                    self.push_eta(r, &alpha);
                    free_row[r] = false;
                    basis[r] = j;
                }
                None => {
                    let (l, u, c) = (self.lp.lower[j], self.lp.upper[j], self.lp.cost[j]);
                    self.state[j] = initial_state(l, u, c);
                }
            }
        }
        for j in 0..n + m {
            if let State::Basic(_) = self.state[j] {
                self.state[j] = initial_state(self.lp.lower[j], self.lp.upper[j], self.lp.cost[j]);
            }
        }
        for (r, &j) in basis.iter().enumerate() {
            self.state[j] = State::Basic(r);
        }
        self.basis = basis;
        self.since_reinvert = 0;
        self.compute_primal();
        if self.x.iter().any(|v| !v.is_finite()) {
            return Err(LpError::Singular);
        }
        Ok(())
    }

    fn refactor(&mut self) -> Result<(), LpError> {
        let target = self.basis.clone();
        self.reinvert(&target)
    }

    fn pivot(&mut self, q: usize, r: usize, alpha: &[f64], leave_state: State) -> Result<(), LpError> {
        let leaving = self.basis[r];
        self.push_eta(r, alpha);
        self.basis[r] = q;
        self.state[q] = State::Basic(r);
        self.state[leaving] = leave_state;
        self.iterations += 1;
        if self.since_reinvert >= REINVERT_EVERY {
            self.refactor()?;
        }
        Ok(())
    }

    fn max_primal_infeasibility(&self) -> f64 {
        self.basis
            .iter()
            .map(|&j| {
                let (l, u, x) = (self.lp.lower[j], self.lp.upper[j], self.x[j]);
                (l - x).max(x - u).max(0.0)
            })
            .fold(0.0, f64::max)
    }

    fn max_dual_infeasibility(&self, d: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (j, &dj) in d.iter().enumerate() {
            if self.lp.lower[j] == self.lp.upper[j] {
                continue;
            }
            let v = match self.state[j] {
                State::Basic(_) => 0.0,
                State::Lower => -dj,
                State::Upper => dj,
                State::Free => dj.abs(),
            };
            worst = worst.max(v);
        }
        worst
    }

    /// Moves boxed nonbasic variables to the bound their reduced cost
    /// prefers. Returns false when some unboxed variable stays dual
    /// infeasible.
    fn make_dual_feasible(&mut self, d: &[f64]) -> bool {
        let mut ok = true;
        let mut moved = false;
        for (j, &dj) in d.iter().enumerate() {
            let (l, u) = (self.lp.lower[j], self.lp.upper[j]);
            if l == u {
                continue;
            }
            match self.state[j] {
                State::Basic(_) => {}
                State::Lower if dj < -DUAL_TOL => {
                    if u.is_finite() {
                        self.state[j] = State::Upper;
                        moved = true;
                    } else {
                        ok = false;
                    }
                }
                State::Upper if dj > DUAL_TOL => {
                    if l.is_finite() {
                        self.state[j] = State::Lower;
                        moved = true;
                    } else {
                        ok = false;
                    }
                }
                State::Free if dj.abs() > DUAL_TOL => ok = false,
                _ => {}
            }
        }
        if moved {
            self.compute_primal();
        }
        ok
    }

    /// Solves the LP from the current basis. `interrupted` is polled every
    /// few iterations.
    pub fn solve(&mut self, interrupted: &dyn Fn() -> bool) -> Result<LpStatus, LpError> {
        let limit = 50 * (self.lp.n + self.lp.m) as u64 + 10_000;
        let start = self.iterations;
        for _attempt in 0..4 {
            let y = self.duals(false);
            let d = self.reduced_costs(&y, false);
            let mut dual_ok = self.max_dual_infeasibility(&d) <= DUAL_TOL;
            if !dual_ok && self.max_primal_infeasibility() > FEAS_TOL {
                dual_ok = self.make_dual_feasible(&d);
            }
            if dual_ok {
                match self.dual_simplex(interrupted, start + limit)? {
                    LpStatus::Optimal => {}
                    other => return Ok(other),
                }
            }
            if self.max_primal_infeasibility() > FEAS_TOL {
                match self.primal(true, interrupted, start + limit)? {
                    LpStatus::Optimal => {}
                    other => return Ok(other),
                }
                if self.max_primal_infeasibility() > FEAS_TOL {
                    return Ok(LpStatus::Infeasible);
                }
            }
            match self.primal(false, interrupted, start + limit)? {
                LpStatus::Optimal => {}
                other => return Ok(other),
            }
            self.refactor()?;
            let y = self.duals(false);
            let d = self.reduced_costs(&y, false);
            if self.max_primal_infeasibility() <= FEAS_TOL && self.max_dual_infeasibility(&d) <= DUAL_TOL {
                return Ok(LpStatus::Optimal);
            }
        }
        let y = self.duals(false);
        let d = self.reduced_costs(&y, false);
        Err(LpError::Drift {
            primal: self.max_primal_infeasibility(),
            dual: self.max_dual_infeasibility(&d),
        })
    }

    fn dual_simplex(&mut self, interrupted: &dyn Fn() -> bool, limit: u64) -> Result<LpStatus, LpError> {
        let total = self.lp.n + self.lp.m;
        let mut stall = 0usize;
        let mut last_obj = f64::NEG_INFINITY;
        loop {
            if self.iterations >= limit {
                return Err(LpError::IterationLimit(self.iterations));
            }
            if self.iterations % 32 == 0 && interrupted() {
                return Ok(LpStatus::Interrupted);
            }
            let bland = stall > STALL_LIMIT;
            // Leaving row: largest bound violation.
            let mut r = usize::MAX;
            let mut worst = FEAS_TOL;
            for (pos, &j) in self.basis.iter().enumerate() {
                let (l, u, x) = (self.lp.lower[j], self.lp.upper[j], self.x[j]);
                let v = (l - x).max(x - u);
                if v > worst && (!bland || r == usize::MAX) {
                    worst = v;
                    r = pos;
                    if bland {
                        break;
                    }
                }
            }
            if r == usize::MAX {
                return Ok(LpStatus::Optimal);
            }
            let leaving = self.basis[r];
            let (l, u, xr) = (self.lp.lower[leaving], self.lp.upper[leaving], self.x[leaving]);
            let (target, increase) = if xr < l { (l, true) } else { (u, false) };

            let y = self.duals(false);
            let d = self.reduced_costs(&y, false);
            let mut rho = vec![0.0; self.lp.m];
            rho[r] = 1.0;
            self.btran(&mut rho);

            let sign = if increase { 1.0 } else { -1.0 };
            let mut cands: Vec<(usize, f64, f64)> = Vec::new();
            for j in 0..total {
                let st = self.state[j];
                if matches!(st, State::Basic(_)) || self.lp.lower[j] == self.lp.upper[j] {
                    continue;
                }
                let a = self.lp.dot(&rho, j);
                if a.abs() <= PIVOT_TOL {
                    continue;
                }
                let s = sign * a;
                let ok = match st {
                    State::Lower => s < 0.0,
                    State::Upper => s > 0.0,
                    State::Free => true,
                    State::Basic(_) => false,
                };
                if !ok {
                    continue;
                }
                let dj = match st {
                    State::Lower => d[j].max(0.0),
                    State::Upper => (-d[j]).max(0.0),
                    _ => d[j].abs(),
                };
                cands.push((j, a, dj));
            }
            if cands.is_empty() {
                return Ok(LpStatus::Infeasible);
            }
            let q = if bland {
                let min = cands.iter().map(|&(_, a, dj)| dj / a.abs()).fold(f64::INFINITY, f64::min);
                cands
                    .iter()
                    .find(|&&(_, a, dj)| dj / a.abs() <= min + 1e-12)
                    .map(|c| c.0)
                    .unwrap()
            } else {
                let theta = cands
                    .iter()
                    .map(|&(_, a, dj)| (dj + DUAL_TOL) / a.abs())
                    .fold(f64::INFINITY, f64::min);
                let mut best = usize::MAX;
                let mut best_a = 0.0;
                for &(j, a, dj) in &cands {
                    if dj / a.abs() <= theta && a.abs() > best_a {
                        best_a = a.abs();
                        best = j;
                    }
                }
                best
            };

            let alpha = self.column_dense(q);
            if alpha[r].abs() <= PIVOT_TOL {
                self.refactor()?;
                stall += 1;
                continue;
            }
            let delta = (xr - target) / alpha[r];
            self.x[q] += delta;
            for (pos, &j) in self.basis.iter().enumerate() {
                self.x[j] -= alpha[pos] * delta;
            }
            self.x[leaving] = target;
            let leave_state = if target == l { State::Lower } else { State::Upper };
            self.pivot(q, r, &alpha, leave_state)?;
            self.x[leaving] = target;

            let obj = self.objective();
            if obj > last_obj + 1e-9 * last_obj.abs().max(1.0) {
                last_obj = obj;
                stall = 0;
            } else {
                stall += 1;
            }
        }
    }

    fn primal(&mut self, phase1: bool, interrupted: &dyn Fn() -> bool, limit: u64) -> Result<LpStatus, LpError> {
        let total = self.lp.n + self.lp.m;
        let mut stall = 0usize;
        let mut last = f64::INFINITY;
        loop {
            if self.iterations >= limit {
                return Err(LpError::IterationLimit(self.iterations));
            }
            if self.iterations % 32 == 0 && interrupted() {
                return Ok(LpStatus::Interrupted);
            }
            if phase1 && self.max_primal_infeasibility() <= FEAS_TOL {
                return Ok(LpStatus::Optimal);
            }
            let bland = stall > STALL_LIMIT;
            let y = self.duals(phase1);
            let d = self.reduced_costs(&y, phase1);
            let mut q = usize::MAX;
            let mut best = DUAL_TOL;
            for (j, &dj) in d.iter().enumerate().take(total) {
                if self.lp.lower[j] == self.lp.upper[j] {
                    continue;
                }
                let score = match self.state[j] {
                    State::Basic(_) => 0.0,
                    State::Lower => -dj,
                    State::Upper => dj,
                    State::Free => dj.abs(),
                };
                if score > best {
                    best = score;
                    q = j;
                    if bland {
                        break;
                    }
                }
            }
            if q == usize::MAX {
                return Ok(if phase1 { LpStatus::Infeasible } else { LpStatus::Optimal });
            }
            let dir = match self.state[q] {
                State::Lower => 1.0,
                State::Upper => -1.0,
                _ => {
                    if d[q] < 0.0 {
                        1.0
                    } else {
                        -1.0
                    }
                }
            };
            let alpha = self.column_dense(q);

            // Ratio test: step t along dir; basic j moves by rate * t.
            let mut t_best = f64::INFINITY;
            let mut r_best = usize::MAX;
            let mut r_bound = 0.0;
            let mut r_abs = 0.0;
            for (pos, &j) in self.basis.iter().enumerate() {
                let rate = -alpha[pos] * dir;
                if rate.abs() <= PIVOT_TOL {
                    continue;
                }
                let (l, u, x) = (self.lp.lower[j], self.lp.upper[j], self.x[j]);
                let (t, bound) = if rate < 0.0 {
                    if x > u + FEAS_TOL && phase1 {
                        ((x - u) / -rate, u)
                    } else if x >= l - FEAS_TOL && l.is_finite() {
                        (((x - l).max(0.0)) / -rate, l)
                    } else {
                        continue;
                    }
                } else if x < l - FEAS_TOL && phase1 {
                    ((l - x) / rate, l)
                } else if x <= u + FEAS_TOL && u.is_finite() {
                    (((u - x).max(0.0)) / rate, u)
                } else {
                    continue;
                };
                let better = if bland {
                    t < t_best - 1e-12 || (t <= t_best + 1e-12 && r_best != usize::MAX && j < self.basis[r_best])
                } else {
                    t < t_best - 1e-12 || (t <= t_best + 1e-12 && rate.abs() > r_abs)
                };
                if better {
                    t_best = t;
                    r_best = pos;
                    r_bound = bound;
                    r_abs = rate.abs();
                }
            }
            let span = self.lp.upper[q] - self.lp.lower[q];
            if span.is_finite() && span <= t_best {
                // Bound flip, no basis change.
                let t = span;
                self.x[q] += dir * t;
                for (pos, &j) in self.basis.iter().enumerate() {
                    self.x[j] -= alpha[pos] * dir * t;
                }
                self.state[q] = if dir > 0.0 { State::Upper } else { State::Lower };
                self.x[q] = self.nonbasic_value(q);
                self.iterations += 1;
            } else if r_best == usize::MAX {
                if phase1 {
                    return Err(LpError::Singular);
                }
                return Ok(LpStatus::Unbounded);
            } else {
                let t = t_best;
                self.x[q] += dir * t;
                for (pos, &j) in self.basis.iter().enumerate() {
                    self.x[j] -= alpha[pos] * dir * t;
                }
                let leaving = self.basis[r_best];
                let leave_state = if r_bound == self.lp.lower[leaving] {
                    State::Lower
                } else {
                    State::Upper
                };
                self.x[leaving] = r_bound;
                self.pivot(q, r_best, &alpha, leave_state)?;
                self.x[leaving] = r_bound;
            }

            let measure = if phase1 {
                self.basis
                    .iter()
                    .map(|&j| {
                        let (l, u, x) = (self.lp.lower[j], self.lp.upper[j], self.x[j]);
                        (l - x).max(x - u).max(0.0)
                    })
                    .sum()
            } else {
                self.objective()
            };
            if measure < last - 1e-9 * last.abs().max(1.0) {
                last = measure;
                stall = 0;
            } else {
                stall += 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(cols: Vec<Vec<(usize, f64)>>, rhs: Vec<f64>, cost: Vec<f64>, bounds: Vec<(f64, f64)>, senses: &[i8]) -> LpData {
        let n = cols.len();
        let m = rhs.len();
        let mut c = cost;
        c.extend(core::iter::repeat_n(0.0, m));
        let mut lower: Vec<f64> = bounds.iter().map(|b| b.0).collect();
        let mut upper: Vec<f64> = bounds.iter().map(|b| b.1).collect();
        for &s in senses {
            let (l, u) = match s {
                -1 => (0.0, f64::INFINITY),
                1 => (f64::NEG_INFINITY, 0.0),
                _ => (0.0, 0.0),
            };
            lower.push(l);
            upper.push(u);
        }
        LpData {
            n,
            m,
            cols,
            rhs,
            cost: c,
            lower,
            upper,
        }
    }

    const INF: f64 = f64::INFINITY;

    #[test]
    fn single_lower_bound_row() {
        // min x s.t. x >= 3
        let mut s = Simplex::new(lp(vec![vec![(0, 1.0)]], vec![3.0], vec![1.0], vec![(0.0, INF)], &[1]));
        assert_eq!(s.solve(&|| false).unwrap(), LpStatus::Optimal);
        assert!((s.objective() - 3.0).abs() < 1e-9);
    }

    #[test]
    fn small_production_lp() {
        // max 3a + 5b  s.t. a <= 4, 2b <= 12, 3a + 2b <= 18
        let mut s = Simplex::new(lp(
            vec![vec![(0, 1.0), (2, 3.0)], vec![(1, 2.0), (2, 2.0)]],
            vec![4.0, 12.0, 18.0],
            vec![-3.0, -5.0],
            vec![(0.0, INF), (0.0, INF)],
            &[-1, -1, -1],
        ));
        assert_eq!(s.solve(&|| false).unwrap(), LpStatus::Optimal);
        assert!((s.objective() + 36.0).abs() < 1e-9);
        assert!((s.values()[0] - 2.0).abs() < 1e-9);
        assert!((s.values()[1] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        // x + y = 1, x + y >= 3
        let mut s = Simplex::new(lp(
            vec![vec![(0, 1.0), (1, 1.0)], vec![(0, 1.0), (1, 1.0)]],
            vec![1.0, 3.0],
            vec![1.0, 1.0],
            vec![(0.0, INF), (0.0, INF)],
            &[0, 1],
        ));
        assert_eq!(s.solve(&|| false).unwrap(), LpStatus::Infeasible);
        // min -x s.t. x - y <= 1
        let mut s = Simplex::new(lp(
            vec![vec![(0, 1.0)], vec![(0, -1.0)]],
            vec![1.0],
            vec![-1.0, 0.0],
            vec![(0.0, INF), (0.0, INF)],
            &[-1],
        ));
        assert_eq!(s.solve(&|| false).unwrap(), LpStatus::Unbounded);
    }

    #[test]
    fn free_variables_and_equalities() {
        // min x + 2y, x free, x + y = 2, x - y >= -4, y in [0, 10]
        let mut s = Simplex::new(lp(
            vec![vec![(0, 1.0), (1, 1.0)], vec![(0, 1.0), (1, -1.0)]],
            vec![2.0, -4.0],
            vec![1.0, 2.0],
            vec![(f64::NEG_INFINITY, INF), (0.0, 10.0)],
            &[0, 1],
        ));
        assert_eq!(s.solve(&|| false).unwrap(), LpStatus::Optimal);
        // x = 2 - y, x - y >= -4 -> y <= 3; cost = 2 + y -> y = 0
        assert!((s.objective() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn warm_restart_after_bound_change() {
        let mut s = Simplex::new(lp(
            vec![vec![(0, 1.0), (2, 3.0)], vec![(1, 2.0), (2, 2.0)]],
            vec![4.0, 12.0, 18.0],
            vec![-3.0, -5.0],
            vec![(0.0, INF), (0.0, INF)],
            &[-1, -1, -1],
        ));
        s.solve(&|| false).unwrap();
        let snap = s.snapshot();
        s.set_bounds(1, 0.0, 5.0);
        assert_eq!(s.solve(&|| false).unwrap(), LpStatus::Optimal);
        // b = 5, a = 8/3
        assert!((s.objective() + (8.0 + 25.0)).abs() < 1e-9);
        s.set_bounds(1, 0.0, INF);
        s.restore(&snap).unwrap();
        assert_eq!(s.solve(&|| false).unwrap(), LpStatus::Optimal);
        assert!((s.objective() + 36.0).abs() < 1e-9);
    }
}
