//! Two-stage heuristic: route shipments with the path model, then form
//! blocks over the fixed routes with the block model.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use thiserror::Error;

use crate::builders::{build_block_model, build_path_model, BuildError, BuildOptions, Reduction};
use crate::instance::{Instance, YardId};
use crate::milp::{MilpModel, Symbol};
use crate::pathgen::{Path, PathCatalog};
use crate::solution::{
    compute_costs, decode_path, decode_sequence, CostBreakdown, DecodeError, ProvidedBlock, ShipmentPath, ShipmentSequence,
    TbspSolution,
};
use crate::solver::{solve_milp_with, Clock, Quiet, SolveError, SolveOptions, SolveResult, SolveStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Path,
    Block,
}

impl core::fmt::Display for Stage {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            Stage::Path => "path stage",
            Stage::Block => "block stage",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SequentialError {
    #[error("{stage}: {source}")]
    Build { stage: Stage, source: BuildError },
    #[error("{stage}: {source}")]
    Solve { stage: Stage, source: SolveError },
    #[error("{stage}: no solution ({status:?})")]
    NoSolution { stage: Stage, status: SolveStatus },
    #[error("{stage}: {source}")]
    Decode { stage: Stage, source: DecodeError },
}

/// Result of both stages.
#[derive(Debug, Clone, PartialEq)]
pub struct SequentialOutcome {
    pub solution: TbspSolution,
    pub path_stage: SolveResult,
    pub block_stage: SolveResult,
    /// Fixed route of every pair handed to the block stage, dense keys.
    pub routes: BTreeMap<(usize, usize), Path>,
}

struct Offset<'a> {
    clock: &'a dyn Clock,
    start: f64,
}

impl Clock for Offset<'_> {
    fn elapsed(&self) -> f64 {
        self.clock.elapsed() - self.start
    }
}

/// Path of each shipment from a solved path model.
pub fn extract_paths(inst: &Instance, model: &MilpModel, result: &SolveResult) -> Result<BTreeMap<(usize, usize), Path>, DecodeError> {
    if result.values.len() != model.num_vars() {
        return Err(DecodeError::Length(model.num_vars()));
    }
    let mut out = BTreeMap::new();
    for (o, d, _) in inst.shipments() {
        out.insert((o, d), decode_path(inst, model, &result.values, o, d)?);
    }
    Ok(out)
}

/// Train frequency of each provided block: its car flow over the train
/// size. Keys are yard ids.
pub fn derive_frequencies(inst: &Instance, model: &MilpModel, values: &[f64]) -> BTreeMap<(YardId, YardId), f64> {
    let mut flow: BTreeMap<(YardId, YardId), f64> = BTreeMap::new();
    for var in model.variables() {
        if var.tag.symbol == Symbol::Y && values[var.id] > 0.5 {
            flow.insert((var.tag.index[0], var.tag.index[1]), 0.0);
        }
    }
    for var in model.variables() {
        if var.tag.symbol != Symbol::U || values[var.id] < 0.5 {
            continue;
        }
        let ix = &var.tag.index;
        let cars = inst.cars(inst.index_of(ix[0]).unwrap(), inst.index_of(ix[1]).unwrap());
        if let Some(f) = flow.get_mut(&(ix[2], ix[3])) {
            *f += cars;
        }
    }
    let m = inst.params().train_size;
    flow.into_iter().map(|(k, f)| (k, f / m)).collect()
}

/// Trains carried by a link against its train capacity.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkLoad {
    pub i: YardId,
    pub j: YardId,
    pub trains: f64,
    pub capacity: f64,
    /// `capacity - trains`; negative on violation.
    pub slack: f64,
}

impl LinkLoad {
    pub fn violated(&self) -> bool {
        self.slack < -1e-6
    }
}

/// Train load on every link crossed by a provided block route.
pub fn check_link_trains(sol: &TbspSolution, inst: &Instance) -> Vec<LinkLoad> {
    let mut trains: BTreeMap<(YardId, YardId), f64> = BTreeMap::new();
    for b in &sol.blocks {
        for w in b.route.windows(2) {
            *trains.entry((w[0], w[1])).or_insert(0.0) += b.z;
        }
    }
    trains
        .into_iter()
        .filter_map(|((i, j), t)| {
            let e = inst.link_between(inst.index_of(i)?, inst.index_of(j)?)?;
            let cap = inst.link(e).train_capacity();
            Some(LinkLoad {
                i,
                j,
                trains: t,
                capacity: cap,
                slack: cap - t,
            })
        })
        .collect()
}

fn stage_result(stage: Stage, r: Result<SolveResult, SolveError>) -> Result<SolveResult, SequentialError> {
    let r = r.map_err(|source| SequentialError::Solve { stage, source })?;
    if r.objective.is_none() {
        return Err(SequentialError::NoSolution { stage, status: r.status });
    }
    Ok(r)
}

/// Runs both stages. Each stage gets half of `solve.time_limit`.
pub fn solve_sequential(
    inst: &Instance,
    catalog: &PathCatalog,
    solve: &SolveOptions,
    build: &BuildOptions,
    clock: &dyn Clock,
) -> Result<SequentialOutcome, SequentialError> {
    let mut stage_opts = solve.clone();
    stage_opts.time_limit = solve.time_limit / 2.0;

    // Without the detour rows the candidate arcs would cut routes off.
    let mut path_build = *build;
    if !build.include_detour && build.reduction == Reduction::Reduced {
        path_build.reduction = Reduction::Full;
    }
    let path_model = build_path_model(inst, catalog, &path_build).map_err(|source| SequentialError::Build {
        stage: Stage::Path,
        source,
    })?;
    let t0 = clock.elapsed();
    let c1 = Offset { clock, start: t0 };
    let path_stage = stage_result(Stage::Path, solve_milp_with(&path_model, &stage_opts, &c1, &mut Quiet, None))?;
    log::info!("path stage: {:?} {:?}", path_stage.status, path_stage.objective);
    let shipment_paths = extract_paths(inst, &path_model, &path_stage).map_err(|source| SequentialError::Decode {
        stage: Stage::Path,
        source,
    })?;

    let mut routes: BTreeMap<(usize, usize), Path> = BTreeMap::new();
    for (o, d) in catalog.pairs() {
        routes.insert((o, d), catalog.paths(o, d)[0].clone());
    }
    for (&k, p) in &shipment_paths {
        routes.insert(k, p.clone());
    }

    let block_model = build_block_model(inst, &routes, build).map_err(|source| SequentialError::Build {
        stage: Stage::Block,
        source,
    })?;
    let c2 = Offset {
        clock,
        start: clock.elapsed(),
    };
    let block_stage = stage_result(Stage::Block, solve_milp_with(&block_model, &stage_opts, &c2, &mut Quiet, None))?;
    log::info!("block stage: {:?} {:?}", block_stage.status, block_stage.objective);
    let values = &block_stage.values;

    let mut sequences = Vec::new();
    for (o, d, _) in inst.shipments() {
        let seq = decode_sequence(inst, &block_model, values, o, d).map_err(|source| SequentialError::Decode {
            stage: Stage::Block,
            source,
        })?;
        sequences.push(ShipmentSequence {
            o: inst.yard_id(o),
            d: inst.yard_id(d),
            blocks: seq.iter().map(|&(p, q)| (inst.yard_id(p), inst.yard_id(q))).collect(),
        });
    }
    let freq = derive_frequencies(inst, &block_model, values);
    let mut blocks = Vec::new();
    for (&(p, q), &z) in &freq {
        let (pi, qi) = (inst.index_of(p).unwrap(), inst.index_of(q).unwrap());
        let w = block_model.lookup(Symbol::W, &[p, q]).map_or(0.0, |v| libm::round(values[v]));
        blocks.push(ProvidedBlock {
            p,
            q,
            route: routes.get(&(pi, qi)).map(|r| r.yard_ids(inst)).unwrap_or_default(),
            z,
            w: w.max(0.0) as u32,
        });
    }
    let paths = shipment_paths
        .iter()
        .map(|(&(o, d), p)| ShipmentPath {
            o: inst.yard_id(o),
            d: inst.yard_id(d),
            nodes: p.yard_ids(inst),
        })
        .collect();
    let mut solution = TbspSolution {
        paths,
        sequences,
        blocks,
        costs: CostBreakdown::default(),
    };
    solution.costs = compute_costs(inst, &solution);
    Ok(SequentialOutcome {
        solution,
        path_stage,
        block_stage,
        routes,
    })
}
