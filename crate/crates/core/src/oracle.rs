//! Exhaustive enumeration for tiny instances, and a seeded generator of
//! such instances.
//!
//! The oracle never shares code with the MILP builders: it walks every
//! combination of legal path and block sequence per shipment and keeps the
//! cheapest plan that satisfies every side constraint.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::instance::{Demand, Instance, Link, Params, Yard, YardId};
use crate::pathgen::{enumerate_block_sequences, CatalogOptions, Path, PathCatalog};
use crate::solution::TbspSolution;

const TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_yards: usize,
    pub max_paths: usize,
    pub max_demands: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_yards: 6,
            max_paths: 8,
            max_demands: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("{what} = {value} exceeds the oracle limit {limit}")]
    Limit { what: &'static str, value: usize, limit: usize },
    #[error("invalid oracle limits: every limit must be positive")]
    BadLimits,
    #[error("shipment ({0},{1}) has no legal path")]
    NoPath(YardId, YardId),
    #[error("no plan satisfies the capacity, track and intree constraints")]
    Infeasible,
}

/// Optimum found by enumeration.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleOptimum {
    pub objective: f64,
    pub solution: TbspSolution,
    /// Complete plans reached during the search.
    pub plans_evaluated: u64,
}

/// One way to carry a shipment: a legal path and a block chain over it.
struct Choice {
    path: usize,
    blocks: Vec<(usize, usize)>,
    /// Car-km and reclassification cost, independent of other shipments.
    own_cost: f64,
    order_key: f64,
}

struct Shipment {
    o: usize,
    d: usize,
    cars: f64,
    paths: Vec<Path>,
    choices: Vec<Choice>,
}

#[derive(Clone)]
struct State {
    n: usize,
    /// Route of each pair `p*n+q` fixed so far, as dense nodes.
    route: Vec<Option<Vec<usize>>>,
    /// Outbound block of `(d, p)` at `d*n+p`.
    next: Vec<Option<usize>>,
    flow: Vec<f64>,
    reclass: Vec<f64>,
    link_trains: Vec<f64>,
    cost: f64,
}

impl State {
    fn new(inst: &Instance) -> Self {
        let n = inst.yard_count();
        State {
            n,
            route: vec![None; n * n],
            next: vec![None; n * n],
            flow: vec![0.0; n * n],
            reclass: vec![0.0; n],
            link_trains: vec![0.0; inst.link_count()],
            cost: 0.0,
        }
    }

    fn fix_route(&mut self, p: usize, q: usize, nodes: &[usize]) -> bool {
        let slot = &mut self.route[p * self.n + q];
        match slot {
            Some(r) => r.as_slice() == nodes,
            None => {
                *slot = Some(nodes.to_vec());
                true
            }
        }
    }

    fn tracks_at(&self, p: usize, gamma: f64) -> f64 {
        (0..self.n)
            .map(|q| libm::ceil(self.flow[p * self.n + q] / gamma - 1e-9).max(0.0))
            .sum()
    }

    /// Adds a shipment's choice; `None` when a constraint breaks.
    fn apply(&self, inst: &Instance, s: &Shipment, c: &Choice) -> Option<State> {
        let mut st = self.clone();
        let n = self.n;
        let params = inst.params();
        let path = &s.paths[c.path];
        if !st.fix_route(s.o, s.d, &path.nodes) {
            return None;
        }
        for &(p, q) in &c.blocks {
            let (a, b) = (path.position(p)?, path.position(q)?);
            if !st.fix_route(p, q, &path.nodes[a..=b]) {
                return None;
            }
            match st.next[s.d * n + p] {
                Some(k) if k != q => return None,
                _ => st.next[s.d * n + p] = Some(q),
            }
            let k = p * n + q;
            if st.flow[k] == 0.0 {
                st.cost += params.train_size * inst.accumulation(p, q);
            }
            st.flow[k] += s.cars;
            let trains = s.cars / params.train_size;
            for w in path.nodes[a..=b].windows(2) {
                let e = inst.link_between(w[0], w[1])?;
                st.link_trains[e] += trains;
                if st.link_trains[e] > inst.link(e).train_capacity() + TOL {
                    return None;
                }
            }
            if q != s.d {
                st.reclass[q] += s.cars;
                let y = inst.yard(q);
                if st.reclass[q] > y.class_capacity * y.capacity_ratio + TOL {
                    return None;
                }
            }
            if st.tracks_at(p, params.track_capacity) > inst.yard(p).sort_tracks as f64 + 0.5 {
                return None;
            }
        }
        st.cost += c.own_cost;
        Some(st)
    }
}

fn check_limits(inst: &Instance, limits: &OracleLimits) -> Result<(), OracleError> {
    if limits.max_yards == 0 || limits.max_paths == 0 || limits.max_demands == 0 {
        return Err(OracleError::BadLimits);
    }
    if inst.yard_count() > limits.max_yards {
        return Err(OracleError::Limit {
            what: "yards",
            value: inst.yard_count(),
            limit: limits.max_yards,
        });
    }
    let ships = inst.shipments().len();
    if ships > limits.max_demands {
        return Err(OracleError::Limit {
            what: "demands",
            value: ships,
            limit: limits.max_demands,
        });
    }
    Ok(())
}

fn shipments(inst: &Instance, catalog: &PathCatalog, limits: &OracleLimits) -> Result<Vec<Shipment>, OracleError> {
    let params = inst.params();
    let mut out = Vec::new();
    for (o, d, cars) in inst.shipments() {
        let paths = catalog.paths(o, d).to_vec();
        if paths.is_empty() {
            return Err(OracleError::NoPath(inst.yard_id(o), inst.yard_id(d)));
        }
        if paths.len() > limits.max_paths {
            return Err(OracleError::Limit {
                what: "legal paths of a shipment",
                value: paths.len(),
                limit: limits.max_paths,
            });
        }
        let mut choices = Vec::new();
        for (k, path) in paths.iter().enumerate() {
            for seq in enumerate_block_sequences(&path.nodes) {
                // Every block route is the path segment, which must be legal.
                let legal = seq.blocks.iter().all(|&(p, q)| {
                    let (a, b) = (path.position(p).unwrap(), path.position(q).unwrap());
                    let seg = &path.nodes[a..=b];
                    catalog.paths(p, q).iter().any(|r| r.nodes == seg)
                });
                if !legal {
                    continue;
                }
                let reclass: f64 = seq
                    .blocks
                    .iter()
                    .filter(|&&(_, q)| q != d)
                    .map(|&(_, q)| cars * inst.yard(q).reclass_delay)
                    .sum();
                let own_cost = params.km_factor * cars * path.length + reclass;
                let accum: f64 = seq
                    .blocks
                    .iter()
                    .map(|&(p, q)| params.train_size * inst.accumulation(p, q))
                    .sum();
                choices.push(Choice {
                    path: k,
                    blocks: seq.blocks,
                    own_cost,
                    order_key: own_cost + accum,
                });
            }
        }
        choices.sort_by(|a, b| a.order_key.total_cmp(&b.order_key));
        out.push(Shipment {
            o,
            d,
            cars,
            paths,
            choices,
        });
    }
    Ok(out)
}

struct Search<'a> {
    inst: &'a Instance,
    ships: &'a [Shipment],
    /// Sum of the cheapest own cost of shipments `k..`.
    tail_bound: Vec<f64>,
    best: Option<(f64, Vec<usize>)>,
    picks: Vec<usize>,
    plans: u64,
}

impl Search<'_> {
    fn run(&mut self, k: usize, st: &State) {
        if let Some((best, _)) = &self.best {
            if st.cost + self.tail_bound[k] >= best - 1e-9 * best.abs().max(1.0) {
                return;
            }
        }
        if k == self.ships.len() {
            self.plans += 1;
            self.best = Some((st.cost, self.picks.clone()));
            return;
        }
        let s = &self.ships[k];
        for (i, c) in s.choices.iter().enumerate() {
            if let Some(next) = st.apply(self.inst, s, c) {
                self.picks.push(i);
                self.run(k + 1, &next);
                self.picks.pop();
            }
        }
    }
}

/// Exact optimum of the integrated problem by enumeration.
pub fn oracle_optimum(inst: &Instance, catalog: &PathCatalog, limits: &OracleLimits) -> Result<OracleOptimum, OracleError> {
    check_limits(inst, limits)?;
    let ships = shipments(inst, catalog, limits)?;
    let mut tail_bound = vec![0.0; ships.len() + 1];
    for k in (0..ships.len()).rev() {
        let cheapest = ships[k]
            .choices
            .iter()
            .map(|c| c.own_cost)
            .fold(f64::INFINITY, f64::min);
        tail_bound[k] = tail_bound[k + 1] + cheapest;
    }
    let mut search = Search {
        inst,
        ships: &ships,
        tail_bound,
        best: None,
        picks: Vec::new(),
        plans: 0,
    };
    search.run(0, &State::new(inst));
    let (_, picks) = search.best.ok_or(OracleError::Infeasible)?;

    let mut paths = BTreeMap::new();
    let mut sequences = BTreeMap::new();
    let mut routes = BTreeMap::new();
    for (s, &i) in ships.iter().zip(&picks) {
        let c = &s.choices[i];
        let path = &s.paths[c.path];
        for &(p, q) in &c.blocks {
            let (a, b) = (path.position(p).unwrap(), path.position(q).unwrap());
            routes.insert((p, q), path.segment(inst, a, b));
        }
        paths.insert((s.o, s.d), path.clone());
        sequences.insert((s.o, s.d), c.blocks.clone());
    }
    let solution = TbspSolution::assemble(inst, &paths, &sequences, &routes, &BTreeSet::new());
    Ok(OracleOptimum {
        objective: solution.costs.total,
        solution,
        plans_evaluated: search.plans,
    })
}

/// A strongly connected random instance within `limits`, reproducible from
/// `seed`. Every shipment has between one and `limits.max_paths` legal
/// paths.
pub fn random_instance(seed: u64, limits: &OracleLimits) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        if let Some(inst) = try_random(&mut rng, limits) {
            return inst;
        }
    }
}

fn pick<T: Copy>(rng: &mut ChaCha8Rng, items: &[T]) -> T {
    items[rng.gen_range(0..items.len())]
}

fn try_random(rng: &mut ChaCha8Rng, limits: &OracleLimits) -> Option<Instance> {
    let k = rng.gen_range(3..=limits.max_yards.clamp(3, 6));
    let ids: Vec<YardId> = (1..=k as YardId).collect();

    let mut order = ids.clone();
    order.shuffle(rng);
    let mut arcs: BTreeSet<(YardId, YardId)> = (0..k).map(|i| (order[i], order[(i + 1) % k])).collect();
    let extra = rng.gen_range(0..=3usize);
    for _ in 0..extra {
        let a = pick(rng, &ids);
        let b = pick(rng, &ids);
        if a != b {
            arcs.insert((a, b));
        }
    }

    let yards = ids
        .iter()
        .map(|&id| Yard {
            id,
            reclass_delay: rng.gen_range(1..=3) as f64,
            class_capacity: rng.gen_range(300..=1000) as f64,
            sort_tracks: rng.gen_range(3..=8),
            capacity_ratio: pick(rng, &[0.8, 1.0]),
        })
        .collect();
    let links = arcs
        .iter()
        .map(|&(tail, head)| Link {
            tail,
            head,
            length: rng.gen_range(1..=5) as f64,
            capacity: rng.gen_range(4..=12) as f64,
            remaining_rate: pick(rng, &[0.5, 0.8, 1.0]),
        })
        .collect();

    let want = rng.gen_range(1..=limits.max_demands.min(4));
    let mut pairs = BTreeSet::new();
    let mut demands = Vec::new();
    for _ in 0..want * 4 {
        if demands.len() == want {
            break;
        }
        let o = pick(rng, &ids);
        let d = pick(rng, &ids);
        if o == d || !pairs.insert((o, d)) {
            continue;
        }
        demands.push(Demand {
            origin: o,
            destination: d,
            cars: rng.gen_range(10..=200) as f64,
        });
    }
    if demands.is_empty() {
        return None;
    }

    let params = Params {
        train_size: rng.gen_range(40..=100) as f64,
        track_capacity: rng.gen_range(50..=200) as f64,
        detour_ratio: pick(rng, &[1.0, 1.2, 1.5, 2.0]),
        km_factor: pick(rng, &[0.1, 0.2, 0.5, 1.0]),
        accumulation_default: rng.gen_range(2..=12) as f64,
        accumulation_overrides: Vec::new(),
    };
    let inst = Instance::new(yards, links, demands, params).ok()?;
    let catalog = PathCatalog::build(&inst, CatalogOptions::default()).ok()?;
    let within = inst.shipments().iter().all(|&(o, d, _)| {
        let c = catalog.paths(o, d).len();
        c >= 1 && c <= limits.max_paths
    });
    within.then_some(inst)
}
