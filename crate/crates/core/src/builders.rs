//! Construction of the integrated, path and block models.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::instance::{Instance, YardId};
use crate::milp::{ConstraintLabel, MilpModel, ModelError, Sense, Symbol, Tag, VarId, VarKind};
use crate::pathgen::{Path, PathCatalog};

/// How much of the index space gets variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Reduction {
    /// Arc variables restricted to candidate arcs, block sequence variables
    /// to candidate blocks.
    Reduced,
    /// Every reachable pair gets arc variables over all links, every
    /// shipment may use every reachable block.
    Full,
    /// Every index tuple is instantiated literally, diagonal and
    /// unreachable pairs included. Used for size accounting and export;
    /// not meant to be solved.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildOptions {
    pub reduction: Reduction,
    pub include_detour: bool,
    pub big_m: Option<f64>,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            reduction: Reduction::Reduced,
            include_detour: true,
            big_m: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BuildError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("shipment {0}->{1} has no candidate path")]
    NoPath(YardId, YardId),
    #[error("shipment {0}->{1} has no fixed path for the block model")]
    NoBlockChain(YardId, YardId),
    #[error("big-M {given} is below the total train count {required}")]
    BigMTooSmall { given: f64, required: f64 },
}

/// True when every arc of `rpq` is an arc of `rod`.
pub fn containment(rpq: &Path, rod: &Path) -> bool {
    rpq.arcs.iter().all(|a| rod.arcs.contains(a))
}

/// Default big-M: total cars divided by the train size.
pub fn default_big_m(inst: &Instance) -> f64 {
    inst.total_cars() / inst.params().train_size
}

fn big_m(inst: &Instance, opts: &BuildOptions) -> Result<f64, BuildError> {
    let required = default_big_m(inst);
    match opts.big_m {
        None => Ok(required),
        Some(m) if m + 1e-9 * required.max(1.0) >= required => Ok(m),
        Some(m) => Err(BuildError::BigMTooSmall { given: m, required }),
    }
}

fn lab(family: &str, idx: &[u32]) -> ConstraintLabel {
    ConstraintLabel::new(family, idx)
}

/// Shared state of a builder: the model plus yard-id tagging helpers.
struct Ctx<'a> {
    inst: &'a Instance,
    model: MilpModel,
}

impl<'a> Ctx<'a> {
    fn id(&self, i: usize) -> u32 {
        self.inst.yard_id(i)
    }

    fn ids(&self, idx: &[usize]) -> Vec<u32> {
        idx.iter().map(|&i| self.id(i)).collect()
    }

    fn var(&mut self, sym: Symbol, idx: &[usize], kind: VarKind, lo: f64, hi: f64, cost: f64) -> Result<VarId, BuildError> {
        let tag = Tag::new(sym, &self.ids(idx));
        Ok(self.model.add_var(tag, kind, lo, hi, cost)?)
    }

    fn row(&mut self, terms: Vec<(VarId, f64)>, sense: Sense, rhs: f64, family: &str, idx: &[usize]) -> Result<(), BuildError> {
        let label = lab(family, &self.ids(idx));
        self.model.add_constraint(terms, sense, rhs, label)?;
        Ok(())
    }
}

/// Arc-selection layer shared by the integrated and path models.
struct ArcLayer {
    /// `(o,d)` to `(link, var)` in link order.
    x: BTreeMap<(usize, usize), Vec<(usize, VarId)>>,
}

impl ArcLayer {
    fn get(&self, o: usize, d: usize, e: usize) -> Option<VarId> {
        let list = self.x.get(&(o, d))?;
        list.binary_search_by_key(&e, |t| t.0).ok().map(|k| list[k].1)
    }
}

/// Creates x variables for `pairs` and emits flow conservation, the
/// simple-path out-degree rows for `simple` pairs and, optionally, detour.
fn arc_layer(
    ctx: &mut Ctx<'_>,
    catalog: &PathCatalog,
    pairs: &[((usize, usize), Vec<usize>)],
    cost: &dyn Fn(usize, usize, usize) -> f64,
    simple: &BTreeSet<(usize, usize)>,
    opts: &BuildOptions,
) -> Result<ArcLayer, BuildError> {
    let inst = ctx.inst;
    let n = inst.yard_count();
    let literal = opts.reduction == Reduction::Literal;
    let mut x = BTreeMap::new();
    for ((o, d), arcs) in pairs {
        let (o, d) = (*o, *d);
        let mut list = Vec::with_capacity(arcs.len());
        for &e in arcs {
            let (i, j) = inst.link_ends(e);
            let v = ctx.var(Symbol::X, &[o, d, i, j], VarKind::Binary, 0.0, 1.0, cost(o, d, e))?;
            list.push((e, v));
        }
        x.insert((o, d), list);
    }
    let layer = ArcLayer { x };

    let total_length: f64 = inst.links().iter().map(|l| l.length).sum();
    for ((o, d), arcs) in pairs {
        let (o, d) = (*o, *d);
        let vars = &layer.x[&(o, d)];
        let mut out: Vec<Vec<(VarId, f64)>> = vec![Vec::new(); n];
        let mut inn: Vec<Vec<(VarId, f64)>> = vec![Vec::new(); n];
        for &(e, v) in vars {
            let (i, j) = inst.link_ends(e);
            out[i].push((v, 1.0));
            inn[j].push((v, -1.0));
        }
        for i in 0..n {
            let rhs = if o == d {
                0.0
            } else if i == o {
                1.0
            } else if i == d {
                -1.0
            } else {
                0.0
            };
            if !literal && out[i].is_empty() && inn[i].is_empty() && rhs == 0.0 {
                continue;
            }
            let mut terms = out[i].clone();
            terms.extend(inn[i].iter().copied());
            ctx.row(terms, Sense::Eq, rhs, "Eq2-flow", &[o, d, i])?;
        }
        if simple.contains(&(o, d)) {
            for i in 0..n {
                if out[i].len() >= 2 {
                    ctx.row(out[i].clone(), Sense::Le, 1.0, "Eq2-simple", &[o, d, i])?;
                }
                // A cycle through the destination passes the out-degree rows.
                if inn[i].len() >= 2 {
                    let terms = inn[i].iter().map(|&(v, _)| (v, 1.0)).collect();
                    ctx.row(terms, Sense::Le, 1.0, "Eq2-simple", &[o, d, i])?;
                }
            }
        }
        if opts.include_detour {
            let bound = match catalog.distance(o, d) {
                Some(delta) => inst.params().detour_ratio * delta,
                None => inst.params().detour_ratio * total_length,
            };
            let terms = arcs
                .iter()
                .zip(vars)
                .map(|(&e, &(_, v))| (v, inst.link(e).length))
                .collect();
            ctx.row(terms, Sense::Le, bound, "Eq4-detour", &[o, d])?;
        }
    }
    Ok(layer)
}

fn check_paths(inst: &Instance, catalog: &PathCatalog) -> Result<(), BuildError> {
    for (o, d, _) in inst.shipments() {
        if catalog.paths(o, d).is_empty() {
            return Err(BuildError::NoPath(inst.yard_id(o), inst.yard_id(d)));
        }
    }
    Ok(())
}

fn all_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).collect()
}

fn reachable_pairs(inst: &Instance, catalog: &PathCatalog) -> Vec<(usize, usize)> {
    let n = inst.yard_count();
    all_pairs(n)
        .into_iter()
        .filter(|&(a, b)| a != b && catalog.distance(a, b).is_some())
        .collect()
}

/// Dense `(o, d, cars)` rows for which block sequence variables exist.
fn commodity_pairs(inst: &Instance, opts: &BuildOptions) -> Vec<(usize, usize, f64)> {
    if opts.reduction == Reduction::Literal {
        all_pairs(inst.yard_count())
            .into_iter()
            .map(|(o, d)| (o, d, inst.cars(o, d)))
            .collect()
    } else {
        inst.shipments()
    }
}

/// Block-layer variables and rows shared by the integrated and block models.
struct BlockLayer {
    blocks: Vec<(usize, usize)>,
    /// `(o,d,p,q)` to var.
    u: BTreeMap<(usize, usize, usize, usize), VarId>,
}

/// Emits y, w (and z when `with_z`), u and v with the chain, yard, track,
/// intree and (when `provided_family` is set) block-provision rows.
#[allow(clippy::too_many_arguments)]
fn block_layer(
    ctx: &mut Ctx<'_>,
    blocks: Vec<(usize, usize)>,
    commodities: &[(usize, usize, f64)],
    usable: &dyn Fn(usize, usize, usize, usize) -> bool,
    with_z: bool,
    z_upper: f64,
    opts: &BuildOptions,
    provision: &dyn Fn(usize, usize, usize, usize) -> f64,
    provision_family: &str,
) -> Result<(BlockLayer, BTreeMap<(usize, usize), VarId>), BuildError> {
    let inst = ctx.inst;
    let n = inst.yard_count();
    let literal = opts.reduction == Reduction::Literal;
    let params = inst.params().clone();

    let mut y = BTreeMap::new();
    let mut z = BTreeMap::new();
    let mut w = BTreeMap::new();
    for &(p, q) in &blocks {
        let c = params.train_size * inst.accumulation(p, q);
        y.insert((p, q), ctx.var(Symbol::Y, &[p, q], VarKind::Binary, 0.0, 1.0, c)?);
    }
    if with_z {
        for &(p, q) in &blocks {
            z.insert((p, q), ctx.var(Symbol::Z, &[p, q], VarKind::Continuous, 0.0, z_upper, 0.0)?);
        }
    }
    for &(p, q) in &blocks {
        let h = inst.yard(p).sort_tracks as f64;
        w.insert((p, q), ctx.var(Symbol::W, &[p, q], VarKind::Integer, 0.0, h, 0.0)?);
    }

    let mut u = BTreeMap::new();
    for &(o, d, cars) in commodities {
        for &(p, q) in &blocks {
            if !usable(o, d, p, q) {
                continue;
            }
            let cost = if q != d { cars * inst.yard(q).reclass_delay } else { 0.0 };
            u.insert((o, d, p, q), ctx.var(Symbol::U, &[o, d, p, q], VarKind::Binary, 0.0, 1.0, cost)?);
        }
    }

    let mut v = BTreeMap::new();
    if literal {
        for (d, p, q) in (0..n).flat_map(|d| (0..n).flat_map(move |p| (0..n).map(move |q| (d, p, q)))) {
            v.insert((d, p, q), ctx.var(Symbol::V, &[d, p, q], VarKind::Binary, 0.0, 1.0, 0.0)?);
        }
    } else {
        let keys: BTreeSet<(usize, usize, usize)> = u.keys().map(|&(_, d, p, q)| (d, p, q)).collect();
        for (d, p, q) in keys {
            v.insert((d, p, q), ctx.var(Symbol::V, &[d, p, q], VarKind::Binary, 0.0, 1.0, 0.0)?);
        }
    }

    let cars_of: BTreeMap<(usize, usize), f64> = commodities.iter().map(|&(o, d, c)| ((o, d), c)).collect();
    let mut flow: BTreeMap<(usize, usize), Vec<(VarId, f64)>> = BTreeMap::new();
    for (&(o, d, p, q), &var) in &u {
        let c = cars_of[&(o, d)];
        flow.entry((p, q)).or_default().push((var, c));
    }

    if with_z {
        for &(p, q) in &blocks {
            let mut terms = flow.get(&(p, q)).cloned().unwrap_or_default();
            terms.push((z[&(p, q)], -params.train_size));
            ctx.row(terms, Sense::Eq, 0.0, "Eq5-frequency", &[p, q])?;
        }
    }

    // Block-chain conservation per commodity and yard.
    for &(o, d, _) in commodities {
        let mut rows: Vec<Vec<(VarId, f64)>> = vec![Vec::new(); n];
        for &(p, q) in &blocks {
            if let Some(&var) = u.get(&(o, d, p, q)) {
                rows[p].push((var, 1.0));
                rows[q].push((var, -1.0));
            }
        }
        for (p, terms) in rows.into_iter().enumerate() {
            let rhs = if o == d {
                0.0
            } else if p == o {
                1.0
            } else if p == d {
                -1.0
            } else {
                0.0
            };
            if !literal && terms.is_empty() && rhs == 0.0 {
                continue;
            }
            ctx.row(terms, Sense::Eq, rhs, "Eq6-chain", &[o, d, p])?;
        }
    }

    // Reclassification capacity at each yard.
    let mut reclass: Vec<Vec<(VarId, f64)>> = vec![Vec::new(); n];
    for (&(o, d, _, q), &var) in &u {
        if q != d {
            reclass[q].push((var, cars_of[&(o, d)]));
        }
    }
    for (q, terms) in reclass.into_iter().enumerate() {
        if !literal && terms.is_empty() {
            continue;
        }
        let yard = inst.yard(q);
        ctx.row(terms, Sense::Le, yard.class_capacity * yard.capacity_ratio, "Eq7-yard", &[q])?;
    }

    let mut tracks: Vec<Vec<(VarId, f64)>> = vec![Vec::new(); n];
    for (&(p, _), &var) in &w {
        tracks[p].push((var, 1.0));
    }
    for (p, terms) in tracks.into_iter().enumerate() {
        if !literal && terms.is_empty() {
            continue;
        }
        ctx.row(terms, Sense::Le, inst.yard(p).sort_tracks as f64, "Eq8-tracks", &[p])?;
    }

    let gamma = params.track_capacity;
    for &(p, q) in &blocks {
        let f = flow.get(&(p, q)).cloned().unwrap_or_default();
        let mut lower: Vec<(VarId, f64)> = f.iter().map(|&(v, c)| (v, -c)).collect();
        lower.push((w[&(p, q)], gamma));
        ctx.row(lower, Sense::Le, gamma - 1.0, "Eq9-track-lower", &[p, q])?;
        let mut upper = f;
        upper.push((w[&(p, q)], -gamma));
        ctx.row(upper, Sense::Le, 0.0, "Eq10-track-upper", &[p, q])?;
    }

    for (&(o, d, p, q), &var) in &u {
        ctx.row(vec![(var, 1.0), (v[&(d, p, q)], -1.0)], Sense::Le, 0.0, "Eq11-consolidation", &[o, d, p, q])?;
    }
    let mut intree: BTreeMap<(usize, usize), Vec<(VarId, f64)>> = BTreeMap::new();
    for (&(d, p, _), &var) in &v {
        intree.entry((d, p)).or_default().push((var, 1.0));
    }
    for ((d, p), terms) in intree {
        ctx.row(terms, Sense::Le, 1.0, "Eq12-intree", &[d, p])?;
    }

    for (&(o, d, p, q), &var) in &u {
        let coef = provision(o, d, p, q);
        ctx.row(vec![(var, 1.0), (y[&(p, q)], -coef)], Sense::Le, 0.0, provision_family, &[o, d, p, q])?;
    }

    Ok((BlockLayer { blocks, u }, z))
}

/// Integrated model: arc selection, block design, frequencies, block
/// sequences, intree rule, path consistency and the linearized link
/// capacity.
pub fn build_integrated(inst: &Instance, catalog: &PathCatalog, opts: &BuildOptions) -> Result<MilpModel, BuildError> {
    let m_big = big_m(inst, opts)?;
    let params = inst.params().clone();
    let n = inst.yard_count();
    let all_links: Vec<usize> = (0..inst.link_count()).collect();
    if opts.reduction != Reduction::Literal {
        check_paths(inst, catalog)?;
    }

    let shipments = inst.shipments();
    // Block pairs and their arc sets.
    let (blocks, x_pairs): (Vec<(usize, usize)>, Vec<((usize, usize), Vec<usize>)>) = match opts.reduction {
        Reduction::Literal => {
            let pairs = all_pairs(n);
            (pairs.clone(), pairs.into_iter().map(|p| (p, all_links.clone())).collect())
        }
        Reduction::Full => {
            let pairs = reachable_pairs(inst, catalog);
            (pairs.clone(), pairs.into_iter().map(|p| (p, all_links.clone())).collect())
        }
        Reduction::Reduced => {
            let mut blocks = BTreeSet::new();
            for &(o, d, _) in &shipments {
                if let Some(b) = catalog.block_set(o, d) {
                    blocks.extend(b.iter().copied());
                }
            }
            let mut pairs: BTreeSet<(usize, usize)> = blocks.clone();
            pairs.extend(shipments.iter().map(|&(o, d, _)| (o, d)));
            let x_pairs = pairs
                .into_iter()
                .map(|(o, d)| {
                    let arcs = catalog
                        .arc_set(o, d)
                        .map(|s| s.iter().copied().collect())
                        .unwrap_or_default();
                    ((o, d), arcs)
                })
                .collect();
            (blocks.into_iter().collect(), x_pairs)
        }
    };

    let mut ctx = Ctx {
        inst,
        model: MilpModel::new("integrated"),
    };
    let lambda = params.km_factor;
    let cost = |o: usize, d: usize, e: usize| lambda * inst.cars(o, d) * inst.link(e).length;
    let simple: BTreeSet<(usize, usize)> = if opts.reduction == Reduction::Literal {
        BTreeSet::new()
    } else {
        shipments.iter().map(|&(o, d, _)| (o, d)).collect()
    };
    let arcs = arc_layer(&mut ctx, catalog, &x_pairs, &cost, &simple, opts)?;

    let commodities = commodity_pairs(inst, opts);
    let usable = |o: usize, d: usize, p: usize, q: usize| match opts.reduction {
        Reduction::Literal | Reduction::Full => true,
        Reduction::Reduced => catalog.block_set(o, d).is_some_and(|b| b.contains(&(p, q))),
    };
    let (layer, z) = block_layer(
        &mut ctx,
        blocks,
        &commodities,
        &usable,
        true,
        default_big_m(inst),
        opts,
        &|_, _, _, _| 1.0,
        "Eq13-provided",
    )?;

    // Path consistency between each block route and its users' paths.
    for (&(o, d, p, q), &uv) in &layer.u {
        let Some(route) = arcs.x.get(&(p, q)) else { continue };
        for &(e, xpq) in route {
            let (i, j) = inst.link_ends(e);
            let mut terms = vec![(uv, 1.0), (xpq, 1.0)];
            if let Some(xod) = arcs.get(o, d, e) {
                terms.push((xod, -1.0));
            }
            ctx.row(terms, Sense::Le, 1.0, "Eq14-consistency", &[o, d, p, q, i, j])?;
        }
    }
    // Linearized train count per block and link.
    let mut link_rows: Vec<Vec<(VarId, f64)>> = vec![Vec::new(); inst.link_count()];
    for &(p, q) in &layer.blocks {
        let Some(route) = arcs.x.get(&(p, q)) else { continue };
        let zv = z[&(p, q)];
        for &(e, xpq) in route {
            let (i, j) = inst.link_ends(e);
            let s = ctx.var(Symbol::S, &[p, q, i, j], VarKind::Continuous, 0.0, m_big, 0.0)?;
            ctx.row(vec![(s, 1.0), (xpq, -m_big)], Sense::Le, 0.0, "Eq22-linearize", &[p, q, i, j])?;
            ctx.row(vec![(s, 1.0), (zv, -1.0)], Sense::Le, 0.0, "Eq23-linearize", &[p, q, i, j])?;
            ctx.row(vec![(zv, 1.0), (xpq, m_big), (s, -1.0)], Sense::Le, m_big, "Eq24-linearize", &[p, q, i, j])?;
            link_rows[e].push((s, 1.0));
        }
    }
    for (e, terms) in link_rows.into_iter().enumerate() {
        if opts.reduction != Reduction::Literal && terms.is_empty() {
            continue;
        }
        let (i, j) = inst.link_ends(e);
        ctx.row(terms, Sense::Le, inst.link(e).train_capacity(), "Eq26-link", &[i, j])?;
    }
    Ok(ctx.model)
}

/// Path model: car-kilometre minimal routing under car-count link capacity.
pub fn build_path_model(inst: &Instance, catalog: &PathCatalog, opts: &BuildOptions) -> Result<MilpModel, BuildError> {
    let n = inst.yard_count();
    let all_links: Vec<usize> = (0..inst.link_count()).collect();
    let pairs: Vec<((usize, usize), Vec<usize>)> = match opts.reduction {
        Reduction::Literal => all_pairs(n).into_iter().map(|p| (p, all_links.clone())).collect(),
        Reduction::Full => {
            check_paths(inst, catalog)?;
            inst.shipments().into_iter().map(|(o, d, _)| ((o, d), all_links.clone())).collect()
        }
        Reduction::Reduced => {
            check_paths(inst, catalog)?;
            inst.shipments()
                .into_iter()
                .map(|(o, d, _)| {
                    let arcs = catalog
                        .arc_set(o, d)
                        .map(|s| s.iter().copied().collect())
                        .unwrap_or_default();
                    ((o, d), arcs)
                })
                .collect()
        }
    };
    let mut ctx = Ctx {
        inst,
        model: MilpModel::new("path"),
    };
    let cost = |o: usize, d: usize, e: usize| inst.cars(o, d) * inst.link(e).length;
    let simple: BTreeSet<(usize, usize)> = if opts.reduction == Reduction::Literal {
        BTreeSet::new()
    } else {
        pairs.iter().map(|(p, _)| *p).collect()
    };
    let arcs = arc_layer(&mut ctx, catalog, &pairs, &cost, &simple, opts)?;

    let mut link_rows: Vec<Vec<(VarId, f64)>> = vec![Vec::new(); inst.link_count()];
    for (&(o, d), list) in &arcs.x {
        let cars = inst.cars(o, d);
        for &(e, v) in list {
            link_rows[e].push((v, cars));
        }
    }
    let m = inst.params().train_size;
    for (e, terms) in link_rows.into_iter().enumerate() {
        if opts.reduction != Reduction::Literal && terms.is_empty() {
            continue;
        }
        let (i, j) = inst.link_ends(e);
        ctx.row(terms, Sense::Le, m * inst.link(e).train_capacity(), "Eq28-link-cars", &[i, j])?;
    }
    Ok(ctx.model)
}

/// Block model over fixed paths: `paths` must hold the path of every
/// shipment and the route of every pair that may serve as a block.
pub fn build_block_model(
    inst: &Instance,
    paths: &BTreeMap<(usize, usize), Path>,
    opts: &BuildOptions,
) -> Result<MilpModel, BuildError> {
    let n = inst.yard_count();
    let literal = opts.reduction == Reduction::Literal;
    let contains = |o: usize, d: usize, p: usize, q: usize| match (paths.get(&(p, q)), paths.get(&(o, d))) {
        (Some(rpq), Some(rod)) => containment(rpq, rod),
        _ => false,
    };
    let commodities = commodity_pairs(inst, opts);
    let blocks: Vec<(usize, usize)> = if literal {
        all_pairs(n)
    } else {
        let mut set = BTreeSet::new();
        for &(o, d, _) in &commodities {
            let Some(rod) = paths.get(&(o, d)) else {
                return Err(BuildError::NoBlockChain(inst.yard_id(o), inst.yard_id(d)));
            };
            let k = rod.nodes.len();
            for a in 0..k {
                for b in a + 1..k {
                    let (p, q) = (rod.nodes[a], rod.nodes[b]);
                    if contains(o, d, p, q) {
                        set.insert((p, q));
                    }
                }
            }
            if !set.contains(&(o, d)) {
                return Err(BuildError::NoBlockChain(inst.yard_id(o), inst.yard_id(d)));
            }
        }
        set.into_iter().collect()
    };
    let mut ctx = Ctx {
        inst,
        model: MilpModel::new("block"),
    };
    let usable = |o: usize, d: usize, p: usize, q: usize| literal || contains(o, d, p, q);
    let indicator = |o: usize, d: usize, p: usize, q: usize| if contains(o, d, p, q) { 1.0 } else { 0.0 };
    block_layer(
        &mut ctx,
        blocks,
        &commodities,
        &usable,
        false,
        0.0,
        opts,
        &indicator,
        "Eq30-containment",
    )?;
    Ok(ctx.model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::{predicted_size, stats, ModelFamily};
    use crate::pathgen::CatalogOptions;
    use crate::sample::two_route_network;

    fn catalog(inst: &Instance) -> PathCatalog {
        PathCatalog::build(inst, CatalogOptions::default()).unwrap()
    }

    #[test]
    fn reduced_is_smaller_than_full() {
        let inst = two_route_network();
        let cat = catalog(&inst);
        let full = build_integrated(&inst, &cat, &BuildOptions { reduction: Reduction::Full, ..Default::default() }).unwrap();
        let red = build_integrated(&inst, &cat, &BuildOptions::default()).unwrap();
        assert!(red.num_vars() < full.num_vars());
        assert!(red.num_constraints() < full.num_constraints());
    }

    #[test]
    fn literal_build_matches_size_estimates() {
        let inst = two_route_network();
        let cat = catalog(&inst);
        let opts = BuildOptions { reduction: Reduction::Literal, ..Default::default() };
        let integrated = stats(&build_integrated(&inst, &cat, &opts).unwrap());
        let (pv, pc) = predicted_size(6, 6, ModelFamily::Integrated);
        assert_eq!(integrated.variables as u64, pv);
        assert_eq!(integrated.constraints as u64, pc + 6);

        let path = stats(&build_path_model(&inst, &cat, &opts).unwrap());
        assert_eq!((path.variables as u64, path.constraints as u64), predicted_size(6, 6, ModelFamily::Path));

        let mut fixed = BTreeMap::new();
        for (o, d) in cat.pairs() {
            fixed.insert((o, d), cat.paths(o, d)[0].clone());
        }
        let block = stats(&build_block_model(&inst, &fixed, &opts).unwrap());
        assert_eq!((block.variables as u64, block.constraints as u64), predicted_size(6, 6, ModelFamily::Block));
    }

    #[test]
    fn containment_is_arc_subset() {
        let inst = two_route_network();
        let p = |ids: &[u32]| {
            let nodes: Vec<usize> = ids.iter().map(|&i| inst.index_of(i).unwrap()).collect();
            Path::from_nodes(&inst, &nodes).unwrap()
        };
        assert!(containment(&p(&[2, 3, 5]), &p(&[1, 2, 3, 5])));
        assert!(!containment(&p(&[2, 4, 5]), &p(&[1, 2, 3, 5])));
        assert!(containment(&p(&[1, 2, 4, 5]), &p(&[1, 2, 4, 5])));
    }

    #[test]
    fn big_m_must_cover_total_trains() {
        let inst = two_route_network();
        let cat = catalog(&inst);
        let opts = BuildOptions { big_m: Some(1.0), ..Default::default() };
        assert!(matches!(build_integrated(&inst, &cat, &opts), Err(BuildError::BigMTooSmall { .. })));
        let opts = BuildOptions { big_m: Some(5.0), ..Default::default() };
        assert!(build_integrated(&inst, &cat, &opts).is_ok());
    }

    #[test]
    fn objective_coefficients() {
        let inst = two_route_network();
        let cat = catalog(&inst);
        let model = build_integrated(&inst, &cat, &BuildOptions::default()).unwrap();
        let c = model.objective();
        let x = model.lookup(Symbol::X, &[1, 5, 1, 2]).unwrap();
        assert!((c[x] - 0.1 * 100.0).abs() < 1e-12);
        let y = model.lookup(Symbol::Y, &[1, 5]).unwrap();
        assert_eq!(c[y], 500.0);
        let u_mid = model.lookup(Symbol::U, &[1, 5, 1, 2]).unwrap();
        assert_eq!(c[u_mid], 100.0);
        let u_last = model.lookup(Symbol::U, &[1, 5, 2, 5]).unwrap();
        assert_eq!(c[u_last], 0.0);
        // Blocks off every legal path of the shipment are not candidates.
        assert!(model.lookup(Symbol::U, &[1, 5, 5, 6]).is_none());
    }
}
