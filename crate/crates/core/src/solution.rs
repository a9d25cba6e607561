//! Blocking plans with shipment paths, and their cost breakdown.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use thiserror::Error;

use crate::instance::{Instance, YardId};
use crate::milp::{MilpModel, Symbol, VarId};
use crate::pathgen::{Path, PathCatalog};

/// Objective components in car-km and car-hours.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CostBreakdown {
    pub car_km: f64,
    pub accumulation: f64,
    pub reclassification: f64,
    /// `km_factor * car_km + accumulation + reclassification`
    pub total: f64,
}

impl CostBreakdown {
    pub fn new(km_factor: f64, car_km: f64, accumulation: f64, reclassification: f64) -> Self {
        CostBreakdown {
            car_km,
            accumulation,
            reclassification,
            total: km_factor * car_km + accumulation + reclassification,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShipmentPath {
    pub o: YardId,
    pub d: YardId,
    pub nodes: Vec<YardId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShipmentSequence {
    pub o: YardId,
    pub d: YardId,
    pub blocks: Vec<(YardId, YardId)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProvidedBlock {
    pub p: YardId,
    pub q: YardId,
    pub route: Vec<YardId>,
    /// Train frequency.
    pub z: f64,
    /// Sort tracks.
    pub w: u32,
}

/// A complete plan: paths, block sequences and provided blocks, all keyed
/// by yard ids.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TbspSolution {
    pub paths: Vec<ShipmentPath>,
    pub sequences: Vec<ShipmentSequence>,
    pub blocks: Vec<ProvidedBlock>,
    pub costs: CostBreakdown,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecodeError {
    #[error("no selected route from {from} towards {to} in {symbol}")]
    Broken { symbol: &'static str, from: YardId, to: YardId },
    #[error("values do not match the model ({0} expected)")]
    Length(usize),
}

fn route_length(inst: &Instance, nodes: &[YardId]) -> Option<f64> {
    let mut len = 0.0;
    for w in nodes.windows(2) {
        let (i, j) = (inst.index_of(w[0])?, inst.index_of(w[1])?);
        len += inst.link(inst.link_between(i, j)?).length;
    }
    Some(len)
}

/// Cars on each block, summed over the sequences that use it.
pub fn block_flows(inst: &Instance, sequences: &[ShipmentSequence]) -> BTreeMap<(YardId, YardId), f64> {
    let mut flow = BTreeMap::new();
    for s in sequences {
        let cars = match (inst.index_of(s.o), inst.index_of(s.d)) {
            (Some(o), Some(d)) => inst.cars(o, d),
            _ => 0.0,
        };
        for &b in &s.blocks {
            *flow.entry(b).or_insert(0.0) += cars;
        }
    }
    flow
}

/// Recomputes the cost breakdown from the plan itself.
pub fn compute_costs(inst: &Instance, sol: &TbspSolution) -> CostBreakdown {
    let params = inst.params();
    let cars = |o: YardId, d: YardId| match (inst.index_of(o), inst.index_of(d)) {
        (Some(o), Some(d)) => inst.cars(o, d),
        _ => 0.0,
    };
    let car_km = sol
        .paths
        .iter()
        .map(|p| cars(p.o, p.d) * route_length(inst, &p.nodes).unwrap_or(0.0))
        .sum();
    let accumulation = sol
        .blocks
        .iter()
        .filter_map(|b| Some(params.train_size * inst.accumulation(inst.index_of(b.p)?, inst.index_of(b.q)?)))
        .sum();
    let mut reclassification = 0.0;
    for s in &sol.sequences {
        let n = cars(s.o, s.d);
        for &(_, q) in &s.blocks {
            if q != s.d {
                if let Some(qi) = inst.index_of(q) {
                    reclassification += n * inst.yard(qi).reclass_delay;
                }
            }
        }
    }
    CostBreakdown::new(params.km_factor, car_km, accumulation, reclassification)
}

impl TbspSolution {
    /// Builds a plan from dense paths, sequences and block routes. Every
    /// block used by a sequence is provided, plus any in `extra`; train
    /// frequencies and sort tracks follow from the block flows.
    pub fn assemble(
        inst: &Instance,
        paths: &BTreeMap<(usize, usize), Path>,
        sequences: &BTreeMap<(usize, usize), Vec<(usize, usize)>>,
        routes: &BTreeMap<(usize, usize), Path>,
        extra: &BTreeSet<(usize, usize)>,
    ) -> TbspSolution {
        let id = |i: usize| inst.yard_id(i);
        let params = inst.params();
        let shipment_paths = paths
            .iter()
            .map(|(&(o, d), p)| ShipmentPath {
                o: id(o),
                d: id(d),
                nodes: p.yard_ids(inst),
            })
            .collect();
        let seqs: Vec<ShipmentSequence> = sequences
            .iter()
            .map(|(&(o, d), bl)| ShipmentSequence {
                o: id(o),
                d: id(d),
                blocks: bl.iter().map(|&(p, q)| (id(p), id(q))).collect(),
            })
            .collect();
        let mut provided: BTreeSet<(usize, usize)> = extra.clone();
        for bl in sequences.values() {
            provided.extend(bl.iter().copied());
        }
        let flows = block_flows(inst, &seqs);
        let blocks = provided
            .into_iter()
            .map(|(p, q)| {
                let f = flows.get(&(id(p), id(q))).copied().unwrap_or(0.0);
                ProvidedBlock {
                    p: id(p),
                    q: id(q),
                    route: routes.get(&(p, q)).map(|r| r.yard_ids(inst)).unwrap_or_default(),
                    z: f / params.train_size,
                    w: libm::ceil(f / params.track_capacity - 1e-12).max(0.0) as u32,
                }
            })
            .collect();
        let mut sol = TbspSolution {
            paths: shipment_paths,
            sequences: seqs,
            blocks,
            costs: CostBreakdown::default(),
        };
        sol.costs = compute_costs(inst, &sol);
        sol
    }

    pub fn path_of(&self, o: YardId, d: YardId) -> Option<&ShipmentPath> {
        self.paths.iter().find(|p| p.o == o && p.d == d)
    }

    pub fn sequence_of(&self, o: YardId, d: YardId) -> Option<&ShipmentSequence> {
        self.sequences.iter().find(|s| s.o == o && s.d == d)
    }

    pub fn block(&self, p: YardId, q: YardId) -> Option<&ProvidedBlock> {
        self.blocks.iter().find(|b| b.p == p && b.q == q)
    }

    /// Values for every model variable the plan determines, keyed by tag.
    /// Arc variables of pairs that are neither shipments nor provided
    /// blocks follow the first catalog path of the pair when given.
    pub fn to_assignment(&self, inst: &Instance, model: &MilpModel, catalog: Option<&PathCatalog>) -> Vec<(VarId, f64)> {
        let mut routes: BTreeMap<(YardId, YardId), BTreeSet<(YardId, YardId)>> = BTreeMap::new();
        let arcs_of = |nodes: &[YardId]| nodes.windows(2).map(|w| (w[0], w[1])).collect::<BTreeSet<_>>();
        if let Some(cat) = catalog {
            for (o, d) in cat.pairs() {
                let p = &cat.paths(o, d)[0];
                routes.insert((inst.yard_id(o), inst.yard_id(d)), arcs_of(&p.yard_ids(inst)));
            }
        }
        for b in &self.blocks {
            routes.insert((b.p, b.q), arcs_of(&b.route));
        }
        for p in &self.paths {
            routes.insert((p.o, p.d), arcs_of(&p.nodes));
        }
        let freq: BTreeMap<(YardId, YardId), (f64, u32)> = self.blocks.iter().map(|b| ((b.p, b.q), (b.z, b.w))).collect();
        let used: BTreeMap<(YardId, YardId), BTreeSet<(YardId, YardId)>> = self
            .sequences
            .iter()
            .map(|s| ((s.o, s.d), s.blocks.iter().copied().collect()))
            .collect();
        let mut consolidated: BTreeSet<(YardId, YardId, YardId)> = BTreeSet::new();
        for s in &self.sequences {
            for &(p, q) in &s.blocks {
                consolidated.insert((s.d, p, q));
            }
        }
        let mut out = Vec::new();
        for var in model.variables() {
            let ix = &var.tag.index;
            let value = match (&var.tag.symbol, ix.len()) {
                (Symbol::X, 4) => routes
                    .get(&(ix[0], ix[1]))
                    .map(|r| if r.contains(&(ix[2], ix[3])) { 1.0 } else { 0.0 }),
                (Symbol::Y, 2) => Some(if freq.contains_key(&(ix[0], ix[1])) { 1.0 } else { 0.0 }),
                (Symbol::Z, 2) => Some(freq.get(&(ix[0], ix[1])).map_or(0.0, |f| f.0)),
                (Symbol::W, 2) => Some(freq.get(&(ix[0], ix[1])).map_or(0.0, |f| f.1 as f64)),
                (Symbol::U, 4) => used
                    .get(&(ix[0], ix[1]))
                    .map(|s| if s.contains(&(ix[2], ix[3])) { 1.0 } else { 0.0 }),
                (Symbol::V, 3) => Some(if consolidated.contains(&(ix[0], ix[1], ix[2])) { 1.0 } else { 0.0 }),
                (Symbol::S, 4) => routes.get(&(ix[0], ix[1])).map(|r| {
                    if r.contains(&(ix[2], ix[3])) {
                        freq.get(&(ix[0], ix[1])).map_or(0.0, |f| f.0)
                    } else {
                        0.0
                    }
                }),
                _ => None,
            };
            if let Some(v) = value {
                out.push((var.id, v));
            }
        }
        out
    }
}

/// Follows selected arcs of `symbol[o,d,*,*]` from `o` to `d`.
fn follow(
    model: &MilpModel,
    values: &[f64],
    symbol: Symbol,
    name: &'static str,
    inst: &Instance,
    o: usize,
    d: usize,
    succ: &dyn Fn(usize) -> Vec<usize>,
) -> Result<Vec<usize>, DecodeError> {
    let (oi, di) = (inst.yard_id(o), inst.yard_id(d));
    let mut nodes = alloc::vec![o];
    let mut cur = o;
    while cur != d {
        if nodes.len() > inst.yard_count() {
            return Err(DecodeError::Broken { symbol: name, from: inst.yard_id(cur), to: di });
        }
        let next = succ(cur).into_iter().find(|&j| {
            model
                .lookup(symbol.clone(), &[oi, di, inst.yard_id(cur), inst.yard_id(j)])
                .is_some_and(|v| values[v] > 0.5)
        });
        match next {
            Some(j) => {
                nodes.push(j);
                cur = j;
            }
            None => return Err(DecodeError::Broken { symbol: name, from: inst.yard_id(cur), to: di }),
        }
    }
    Ok(nodes)
}

/// Follows `x[o,d,*,*] = 1` arcs from `o` to `d`.
pub fn decode_path(inst: &Instance, model: &MilpModel, values: &[f64], o: usize, d: usize) -> Result<Path, DecodeError> {
    let succ = |i: usize| inst.out_links(i).iter().map(|&e| inst.link_ends(e).1).collect();
    let nodes = follow(model, values, Symbol::X, "x", inst, o, d, &succ)?;
    Path::from_nodes(inst, &nodes).ok_or(DecodeError::Broken {
        symbol: "x",
        from: inst.yard_id(o),
        to: inst.yard_id(d),
    })
}

/// Follows `u[o,d,*,*] = 1` blocks from `o` to `d`.
pub fn decode_sequence(inst: &Instance, model: &MilpModel, values: &[f64], o: usize, d: usize) -> Result<Vec<(usize, usize)>, DecodeError> {
    let n = inst.yard_count();
    let succ = |_: usize| (0..n).collect();
    let nodes = follow(model, values, Symbol::U, "u", inst, o, d, &succ)?;
    Ok(nodes.windows(2).map(|w| (w[0], w[1])).collect())
}

/// Reads a plan out of integrated-model values. Frequencies and sort
/// tracks are taken from the values as solved.
pub fn decode_integrated(inst: &Instance, model: &MilpModel, values: &[f64]) -> Result<TbspSolution, DecodeError> {
    if values.len() != model.num_vars() {
        return Err(DecodeError::Length(model.num_vars()));
    }
    let mut paths = Vec::new();
    let mut sequences = Vec::new();
    for (o, d, _) in inst.shipments() {
        let path = decode_path(inst, model, values, o, d)?;
        paths.push(ShipmentPath {
            o: inst.yard_id(o),
            d: inst.yard_id(d),
            nodes: path.yard_ids(inst),
        });
        let seq = decode_sequence(inst, model, values, o, d)?;
        sequences.push(ShipmentSequence {
            o: inst.yard_id(o),
            d: inst.yard_id(d),
            blocks: seq.iter().map(|&(p, q)| (inst.yard_id(p), inst.yard_id(q))).collect(),
        });
    }
    let mut blocks = Vec::new();
    for var in model.variables() {
        if var.tag.symbol != Symbol::Y || values[var.id] < 0.5 {
            continue;
        }
        let (p, q) = (var.tag.index[0], var.tag.index[1]);
        let (pi, qi) = (inst.index_of(p).unwrap(), inst.index_of(q).unwrap());
        let route = decode_path(inst, model, values, pi, qi)?;
        let z = model.lookup(Symbol::Z, &[p, q]).map_or(0.0, |v| values[v]);
        let w = model.lookup(Symbol::W, &[p, q]).map_or(0.0, |v| libm::round(values[v]));
        blocks.push(ProvidedBlock {
            p,
            q,
            route: route.yard_ids(inst),
            z,
            w: w.max(0.0) as u32,
        });
    }
    let mut sol = TbspSolution {
        paths,
        sequences,
        blocks,
        costs: CostBreakdown::default(),
    };
    sol.costs = compute_costs(inst, &sol);
    Ok(sol)
}
