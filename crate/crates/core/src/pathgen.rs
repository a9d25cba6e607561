//! Shortest distances, detour-bounded path enumeration and the per-pair
//! candidate arc and block sets.
//!
//! All yard references here are dense indices (see [`Instance::index_of`]).
//! Because dense order equals yard-id order, the lexicographic tie-break on
//! node sequences is the same in both numberings.

use alloc::collections::{BTreeMap, BTreeSet, BinaryHeap};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::{Ordering, Reverse};

use thiserror::Error;

use crate::instance::{Instance, YardId};

/// Default hard cap on the number of legal paths per pair.
pub const DEFAULT_PATH_CAP: usize = 10_000;

/// Relative slack used when comparing a length against `epsilon * delta`.
const DETOUR_TOL: f64 = 1e-9;

/// A simple directed path over dense yard indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub nodes: Vec<usize>,
    pub arcs: Vec<usize>,
    pub length: f64,
}

impl Path {
    /// Builds a path from a node sequence, or `None` if two consecutive
    /// nodes are not joined by a link.
    pub fn from_nodes(inst: &Instance, nodes: &[usize]) -> Option<Path> {
        let mut arcs = Vec::with_capacity(nodes.len().saturating_sub(1));
        let mut length = 0.0;
        for w in nodes.windows(2) {
            let e = inst.link_between(w[0], w[1])?;
            length += inst.link(e).length;
            arcs.push(e);
        }
        Some(Path {
            nodes: nodes.to_vec(),
            arcs,
            length,
        })
    }

    pub fn origin(&self) -> usize {
        self.nodes[0]
    }

    pub fn destination(&self) -> usize {
        *self.nodes.last().unwrap()
    }

    pub fn is_simple(&self) -> bool {
        let set: BTreeSet<_> = self.nodes.iter().collect();
        set.len() == self.nodes.len()
    }

    /// Yard ids along the path.
    pub fn yard_ids(&self, inst: &Instance) -> Vec<YardId> {
        self.nodes.iter().map(|&i| inst.yard_id(i)).collect()
    }

    /// The contiguous sub-path from position `from` to position `to`.
    pub fn segment(&self, inst: &Instance, from: usize, to: usize) -> Path {
        Path::from_nodes(inst, &self.nodes[from..=to]).expect("segment of a valid path")
    }

    /// Position of node `v` on the path.
    pub fn position(&self, v: usize) -> Option<usize> {
        self.nodes.iter().position(|&x| x == v)
    }

    fn sort_key(&self) -> (i64, &[usize]) {
        (quantize(self.length), &self.nodes)
    }
}

/// Length key at micro-km resolution; keeps the sort comparator transitive.
fn quantize(len: f64) -> i64 {
    libm::round(len * 1e6) as i64
}

/// Whether a route of `length` satisfies the detour bound for a pair whose
/// shortest distance is `delta`.
pub fn within_detour(length: f64, delta: f64, epsilon: f64) -> bool {
    let bound = epsilon * delta;
    length <= bound + DETOUR_TOL * bound.max(1.0)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PathError {
    #[error("pair ({origin},{destination}) has more than {cap} legal paths")]
    TooManyPaths {
        origin: YardId,
        destination: YardId,
        cap: usize,
    },
}

/// All-pairs directed shortest distances.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceTable {
    n: usize,
    dist: Vec<f64>,
}

impl DistanceTable {
    /// `None` when `d` is unreachable from `o`.
    pub fn get(&self, o: usize, d: usize) -> Option<f64> {
        let v = self.dist[o * self.n + d];
        v.is_finite().then_some(v)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Dist(f64);

impl Eq for Dist {}

impl PartialOrd for Dist {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dist {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

struct SearchResult {
    dist: Vec<f64>,
    pred: Vec<Option<usize>>,
}

fn dijkstra(
    inst: &Instance,
    src: usize,
    banned_nodes: &[bool],
    banned_arcs: &[bool],
    stop_at: Option<usize>,
) -> SearchResult {
    let n = inst.yard_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[src] = 0.0;
    heap.push(Reverse((Dist(0.0), src)));
    while let Some(Reverse((Dist(du), u))) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        if Some(u) == stop_at {
            break;
        }
        for &e in inst.out_links(u) {
            if banned_arcs[e] {
                continue;
            }
            let (_, v) = inst.link_ends(e);
            if banned_nodes[v] || done[v] {
                continue;
            }
            let nd = du + inst.link(e).length;
            if nd < dist[v] {
                dist[v] = nd;
                pred[v] = Some(e);
                heap.push(Reverse((Dist(nd), v)));
            }
        }
    }
    SearchResult { dist, pred }
}

fn trace(inst: &Instance, res: &SearchResult, src: usize, dst: usize) -> Option<Vec<usize>> {
    if !res.dist[dst].is_finite() {
        return None;
    }
    let mut nodes = vec![dst];
    let mut cur = dst;
    while cur != src {
        let e = res.pred[cur]?;
        cur = inst.link_ends(e).0;
        nodes.push(cur);
    }
    nodes.reverse();
    Some(nodes)
}

/// Exact directed shortest-path lengths between all ordered pairs.
pub fn shortest_distances(inst: &Instance) -> DistanceTable {
    let n = inst.yard_count();
    let none_n = vec![false; n];
    let none_e = vec![false; inst.link_count()];
    let mut dist = vec![f64::INFINITY; n * n];
    for o in 0..n {
        let res = dijkstra(inst, o, &none_n, &none_e, None);
        dist[o * n..(o + 1) * n].copy_from_slice(&res.dist);
    }
    DistanceTable { n, dist }
}

/// Stopping rule for [`yen_paths`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PathLimit {
    /// All paths not longer than the bound; more than `cap` is an error.
    MaxLength { bound: f64, cap: usize },
    /// The `k` shortest simple paths.
    Count(usize),
}

/// Yen's k-shortest simple paths, run until the stopping rule fires.
///
/// Output is sorted by (length, node sequence).
pub fn yen_paths(
    inst: &Instance,
    o: usize,
    d: usize,
    limit: PathLimit,
) -> Result<Vec<Path>, PathError> {
    let n = inst.yard_count();
    let m = inst.link_count();
    if o == d {
        return Ok(Vec::new());
    }
    let admissible = |len: f64| match limit {
        PathLimit::MaxLength { bound, .. } => len <= bound,
        PathLimit::Count(_) => true,
    };

    let first = {
        let res = dijkstra(inst, o, &vec![false; n], &vec![false; m], Some(d));
        match trace(inst, &res, o, d) {
            Some(nodes) => Path::from_nodes(inst, &nodes).unwrap(),
            None => return Ok(Vec::new()),
        }
    };
    if !admissible(first.length) || limit == PathLimit::Count(0) {
        return Ok(Vec::new());
    }

    let mut accepted = vec![first];
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    seen.insert(accepted[0].nodes.clone());
    let mut candidates: BTreeMap<(i64, Vec<usize>), Path> = BTreeMap::new();

    loop {
        match limit {
            PathLimit::Count(k) if accepted.len() >= k => break,
            PathLimit::MaxLength { cap, .. } if accepted.len() > cap => {
                return Err(PathError::TooManyPaths {
                    origin: inst.yard_id(o),
                    destination: inst.yard_id(d),
                    cap,
                });
            }
            _ => {}
        }
        let last = accepted.last().unwrap().clone();
        for spur_idx in 0..last.nodes.len() - 1 {
            let spur = last.nodes[spur_idx];
            let root = &last.nodes[..=spur_idx];
            let mut banned_arcs = vec![false; m];
            for p in &accepted {
                if p.nodes.len() > spur_idx + 1 && &p.nodes[..=spur_idx] == root {
                    banned_arcs[p.arcs[spur_idx]] = true;
                }
            }
            let mut banned_nodes = vec![false; n];
            for &v in &root[..spur_idx] {
                banned_nodes[v] = true;
            }
            let res = dijkstra(inst, spur, &banned_nodes, &banned_arcs, Some(d));
            let Some(spur_nodes) = trace(inst, &res, spur, d) else {
                continue;
            };
            let mut nodes = root[..spur_idx].to_vec();
            nodes.extend_from_slice(&spur_nodes);
            if seen.contains(&nodes) {
                continue;
            }
            let path = Path::from_nodes(inst, &nodes).unwrap();
            if !admissible(path.length) {
                continue;
            }
            seen.insert(nodes.clone());
            candidates.insert((quantize(path.length), nodes), path);
        }
        let Some((_, next)) = candidates.pop_first() else {
            break;
        };
        accepted.push(next);
    }
    if let PathLimit::MaxLength { cap, .. } = limit {
        if accepted.len() > cap {
            return Err(PathError::TooManyPaths {
                origin: inst.yard_id(o),
                destination: inst.yard_id(d),
                cap,
            });
        }
    }
    accepted.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    Ok(accepted)
}

/// All simple `o -> d` paths with length at most `epsilon * delta_od`.
/// Unreachable pairs yield an empty list.
pub fn enumerate_legal_paths(
    inst: &Instance,
    dist: &DistanceTable,
    o: usize,
    d: usize,
    epsilon: f64,
    cap: usize,
) -> Result<Vec<Path>, PathError> {
    let Some(delta) = dist.get(o, d) else {
        return Ok(Vec::new());
    };
    let bound = epsilon * delta;
    let bound = bound + DETOUR_TOL * bound.max(1.0);
    yen_paths(inst, o, d, PathLimit::MaxLength { bound, cap })
}

/// How candidate paths are generated for each ordered pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatalogOptions {
    /// Enforce the detour bound. When false, every pair keeps its
    /// `k_without_detour` shortest simple paths instead.
    pub detour: bool,
    pub max_paths_per_pair: usize,
    pub k_without_detour: usize,
}

impl Default for CatalogOptions {
    fn default() -> Self {
        CatalogOptions {
            detour: true,
            max_paths_per_pair: DEFAULT_PATH_CAP,
            k_without_detour: 64,
        }
    }
}

/// Per-pair legal paths with the derived candidate arc sets `E_od` and
/// candidate block sets `B_od`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathCatalog {
    pub options: CatalogOptions,
    pub epsilon: f64,
    distances: DistanceTable,
    paths: BTreeMap<(usize, usize), Vec<Path>>,
    arc_sets: BTreeMap<(usize, usize), BTreeSet<usize>>,
    block_sets: BTreeMap<(usize, usize), BTreeSet<(usize, usize)>>,
}

impl PathCatalog {
    /// Legal paths for every reachable ordered pair; candidate sets are
    /// left empty until [`candidate_sets`] runs.
    pub fn enumerate(inst: &Instance, options: CatalogOptions) -> Result<Self, PathError> {
        let distances = shortest_distances(inst);
        let epsilon = inst.params().detour_ratio;
        let n = inst.yard_count();
        let mut paths = BTreeMap::new();
        for o in 0..n {
            for d in 0..n {
                if o == d || distances.get(o, d).is_none() {
                    continue;
                }
                let list = if options.detour {
                    enumerate_legal_paths(inst, &distances, o, d, epsilon, options.max_paths_per_pair)?
                } else {
                    yen_paths(inst, o, d, PathLimit::Count(options.k_without_detour))?
                };
                paths.insert((o, d), list);
            }
        }
        Ok(PathCatalog {
            options,
            epsilon,
            distances,
            paths,
            arc_sets: BTreeMap::new(),
            block_sets: BTreeMap::new(),
        })
    }

    /// Enumerates paths and completes the candidate sets.
    pub fn build(inst: &Instance, options: CatalogOptions) -> Result<Self, PathError> {
        Ok(candidate_sets(inst, Self::enumerate(inst, options)?))
    }

    pub fn distances(&self) -> &DistanceTable {
        &self.distances
    }

    pub fn distance(&self, o: usize, d: usize) -> Option<f64> {
        self.distances.get(o, d)
    }

    /// Legal paths of the pair, sorted by (length, nodes).
    pub fn paths(&self, o: usize, d: usize) -> &[Path] {
        self.paths.get(&(o, d)).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Pairs with at least one legal path.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.paths
            .iter()
            .filter(|(_, v)| !v.is_empty())
            .map(|(&k, _)| k)
    }

    /// `E_od`: links used by some legal path of the pair.
    pub fn arc_set(&self, o: usize, d: usize) -> Option<&BTreeSet<usize>> {
        self.arc_sets.get(&(o, d))
    }

    /// `B_od`: blocks usable by a shipment of the pair.
    pub fn block_set(&self, o: usize, d: usize) -> Option<&BTreeSet<(usize, usize)>> {
        self.block_sets.get(&(o, d))
    }

    /// Total number of stored paths.
    pub fn path_count(&self) -> usize {
        self.paths.values().map(Vec::len).sum()
    }
}

/// Completes `E_od` and `B_od` for every pair. A block `(p,q)` belongs to
/// `B_od` when some legal `(o,d)` path visits `p` before `q` and its `p..q`
/// segment is itself a listed path of `(p,q)`.
pub fn candidate_sets(_inst: &Instance, mut catalog: PathCatalog) -> PathCatalog {
    let listed: BTreeMap<(usize, usize), BTreeSet<&[usize]>> = catalog
        .paths
        .iter()
        .map(|(&k, v)| (k, v.iter().map(|p| p.nodes.as_slice()).collect()))
        .collect();
    let mut arc_sets = BTreeMap::new();
    let mut block_sets = BTreeMap::new();
    for (&(o, d), list) in &catalog.paths {
        let mut arcs = BTreeSet::new();
        let mut blocks = BTreeSet::new();
        for path in list {
            arcs.extend(path.arcs.iter().copied());
            let k = path.nodes.len();
            for a in 0..k {
                for b in a + 1..k {
                    let (p, q) = (path.nodes[a], path.nodes[b]);
                    if blocks.contains(&(p, q)) {
                        continue;
                    }
                    let seg = &path.nodes[a..=b];
                    if listed.get(&(p, q)).is_some_and(|s| s.contains(seg)) {
                        blocks.insert((p, q));
                    }
                }
            }
        }
        arc_sets.insert((o, d), arcs);
        block_sets.insert((o, d), blocks);
    }
    catalog.arc_sets = arc_sets;
    catalog.block_sets = block_sets;
    catalog
}

/// A chain of blocks carrying a shipment from its origin to its destination.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct BlockSequence {
    pub blocks: Vec<(usize, usize)>,
}

impl BlockSequence {
    /// Yards where the shipment is reclassified: every block head,
    /// destination included.
    pub fn reclassification_yards(&self) -> Vec<usize> {
        self.blocks.iter().map(|&(_, q)| q).collect()
    }
}

/// Every block sequence over a path: one per subset of intermediate yards,
/// ordered by the subset's bitmask (first intermediate = lowest bit).
pub fn enumerate_block_sequences(nodes: &[usize]) -> Vec<BlockSequence> {
    assert!(nodes.len() >= 2, "a path needs at least one arc");
    let inner = &nodes[1..nodes.len() - 1];
    assert!(inner.len() < 32, "too many intermediate yards");
    let (o, d) = (nodes[0], nodes[nodes.len() - 1]);
    (0u32..1 << inner.len())
        .map(|mask| {
            let mut blocks = Vec::new();
            let mut from = o;
            for (k, &v) in inner.iter().enumerate() {
                if mask & (1 << k) != 0 {
                    blocks.push((from, v));
                    from = v;
                }
            }
            blocks.push((from, d));
            BlockSequence { blocks }
        })
        .collect()
}
