//! Small built-in instances.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;

use crate::instance::{Demand, Instance, Link, Params, Yard, YardId};
use crate::pathgen::Path;
use crate::solution::{ProvidedBlock, TbspSolution};

/// Six yards, the six arcs of the two-route example network, a single
/// 100-car shipment from 1 to 5.
pub fn two_route_network() -> Instance {
    let yards = (1..=6)
        .map(|id| Yard {
            id,
            reclass_delay: 1.0,
            class_capacity: 1000.0,
            sort_tracks: 10,
            capacity_ratio: 1.0,
        })
        .collect();
    let links = [(1, 2), (2, 3), (2, 4), (3, 5), (4, 5), (5, 6)]
        .into_iter()
        .map(|(tail, head)| Link {
            tail,
            head,
            length: 1.0,
            capacity: 10.0,
            remaining_rate: 1.0,
        })
        .collect();
    let demands = vec![Demand {
        origin: 1,
        destination: 5,
        cars: 100.0,
    }];
    Instance::new(
        yards,
        links,
        demands,
        Params {
            train_size: 50.0,
            track_capacity: 200.0,
            detour_ratio: 1.2,
            km_factor: 0.1,
            accumulation_default: 10.0,
            accumulation_overrides: Vec::new(),
        },
    )
    .unwrap()
}

/// A plan given per shipment as its path and the yards where its blocks
/// start and end, origin and destination included. Block routes are the
/// path segments; frequencies and tracks follow from the flows.
pub fn plan_from_stops(inst: &Instance, shipments: &[(&[YardId], &[YardId])]) -> TbspSolution {
    let ix = |ids: &[YardId]| -> Vec<usize> { ids.iter().map(|&i| inst.index_of(i).expect("known yard")).collect() };
    let mut paths = BTreeMap::new();
    let mut sequences = BTreeMap::new();
    let mut routes = BTreeMap::new();
    for &(nodes, stops) in shipments {
        let path = Path::from_nodes(inst, &ix(nodes)).expect("path over existing links");
        let stops = ix(stops);
        let blocks: Vec<(usize, usize)> = stops.windows(2).map(|w| (w[0], w[1])).collect();
        for &(p, q) in &blocks {
            let (a, b) = (path.position(p).expect("stop on path"), path.position(q).expect("stop on path"));
            routes.insert((p, q), path.segment(inst, a, b));
        }
        paths.insert((path.origin(), path.destination()), path);
        sequences.insert((stops[0], stops[stops.len() - 1]), blocks);
    }
    TbspSolution::assemble(inst, &paths, &sequences, &routes, &BTreeSet::new())
}

/// A feasible plan with a mutation that breaks exactly one constraint
/// family.
#[derive(Debug, Clone)]
pub struct Mutation {
    pub family: &'static str,
    pub instance: Instance,
    pub feasible: TbspSolution,
    pub mutated_instance: Instance,
    pub mutated: TbspSolution,
}

fn rebuild(inst: &Instance, edit: impl FnOnce(&mut Vec<Yard>, &mut Vec<Link>)) -> Instance {
    let mut yards = inst.yards().to_vec();
    let mut links = inst.links().to_vec();
    edit(&mut yards, &mut links);
    Instance::new(yards, links, inst.demands().to_vec(), inst.params().clone()).expect("valid edit")
}

fn block_mut(sol: &mut TbspSolution, p: YardId, q: YardId) -> &mut ProvidedBlock {
    sol.blocks.iter_mut().find(|b| (b.p, b.q) == (p, q)).expect("provided block")
}

/// One mutation per checked constraint family, on the two-route network.
pub fn constraint_mutations() -> Vec<Mutation> {
    let inst = two_route_network();
    let base = plan_from_stops(&inst, &[(&[1, 2, 4, 5], &[1, 2, 5])]);
    let mut out = Vec::new();
    let mut push = |family, mutated_instance: Instance, mutated: TbspSolution| {
        out.push(Mutation {
            family,
            instance: inst.clone(),
            feasible: base.clone(),
            mutated_instance,
            mutated,
        });
    };

    let mut s = base.clone();
    s.paths[0].nodes = vec![1, 2, 4, 5, 6];
    push("Eq2-flow", inst.clone(), s);

    let tight = rebuild(&inst, |_, links| links[0].capacity = 1.0);
    push("Eq3-link", tight, base.clone());

    let long = rebuild(&inst, |_, links| {
        let l = links.iter_mut().find(|l| (l.tail, l.head) == (4, 5)).unwrap();
        l.length = 2.0;
    });
    push("Eq4-detour", long, base.clone());

    let mut s = base.clone();
    block_mut(&mut s, 1, 2).z += 0.5;
    push("Eq5-frequency", inst.clone(), s);

    let mut s = base.clone();
    s.sequences[0].blocks.remove(0);
    let b = block_mut(&mut s, 1, 2);
    b.z = 0.0;
    b.w = 0;
    push("Eq6-chain", inst.clone(), s);

    let small = rebuild(&inst, |yards, _| yards[1].class_capacity = 50.0);
    push("Eq7-yard", small, base.clone());

    let no_tracks = rebuild(&inst, |yards, _| yards[0].sort_tracks = 0);
    push("Eq8-tracks", no_tracks, base.clone());

    let mut s = base.clone();
    block_mut(&mut s, 1, 2).w += 1;
    push("Eq9-track-lower", inst.clone(), s);

    let mut s = base.clone();
    block_mut(&mut s, 1, 2).w -= 1;
    push("Eq10-track-upper", inst.clone(), s);

    let mut s = base.clone();
    s.blocks.retain(|b| (b.p, b.q) != (2, 5));
    push("Eq13-provided", inst.clone(), s);

    let mut s = base.clone();
    s.paths[0].nodes = vec![1, 2, 3, 5];
    push("Eq14-consistency", inst.clone(), s);

    // The intree rule needs two shipments bound for the same yard.
    let shared = Instance::new(
        inst.yards().to_vec(),
        inst.links().to_vec(),
        vec![
            Demand {
                origin: 1,
                destination: 5,
                cars: 100.0,
            },
            Demand {
                origin: 2,
                destination: 5,
                cars: 50.0,
            },
        ],
        inst.params().clone(),
    )
    .expect("valid instance");
    let feasible = plan_from_stops(&shared, &[(&[1, 2, 4, 5], &[1, 2, 5]), (&[2, 4, 5], &[2, 5])]);
    let mutated = plan_from_stops(&shared, &[(&[1, 2, 4, 5], &[1, 2, 5]), (&[2, 4, 5], &[2, 4, 5])]);
    out.push(Mutation {
        family: "Eq12-intree",
        instance: shared.clone(),
        feasible,
        mutated_instance: shared,
        mutated,
    });
    out
}
