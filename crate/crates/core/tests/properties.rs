use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;

use railblock_core::builders::{build_integrated, build_path_model, BuildOptions};
use railblock_core::instance::{Instance, Link, Params, Yard};
use railblock_core::milp::{MilpModel, Symbol};
use railblock_core::oracle::{oracle_optimum, random_instance, OracleLimits};
use railblock_core::pathgen::{enumerate_block_sequences, CatalogOptions, PathCatalog};
use railblock_core::sequential::solve_sequential;
use railblock_core::solution::{block_flows, decode_integrated};
use railblock_core::solver::{solve_milp, solve_milp_with, NoClock, SolveObserver, SolveOptions};
use railblock_core::validate::validate;

fn network(n: usize, arcs: &[(usize, usize, u8)], epsilon: f64) -> Instance {
    let yards = (1..=n as u32)
        .map(|id| Yard {
            id,
            reclass_delay: 1.0,
            class_capacity: 1000.0,
            sort_tracks: 5,
            capacity_ratio: 1.0,
        })
        .collect();
    let mut seen = BTreeSet::new();
    let links = arcs
        .iter()
        .filter(|&&(a, b, _)| a != b && a < n && b < n && seen.insert((a, b)))
        .map(|&(a, b, len)| Link {
            tail: a as u32 + 1,
            head: b as u32 + 1,
            length: len as f64 * 0.5,
            capacity: 10.0,
            remaining_rate: 1.0,
        })
        .collect();
    let params = Params {
        train_size: 50.0,
        track_capacity: 100.0,
        detour_ratio: epsilon,
        km_factor: 0.1,
        accumulation_default: 5.0,
        accumulation_overrides: Vec::new(),
    };
    Instance::new(yards, links, Vec::new(), params).unwrap()
}

/// Every simple path by depth-first search, with its length.
fn all_simple_paths(inst: &Instance, o: usize, d: usize) -> Vec<(Vec<usize>, f64)> {
    fn go(inst: &Instance, cur: usize, d: usize, stack: &mut Vec<usize>, len: f64, out: &mut Vec<(Vec<usize>, f64)>) {
        if cur == d {
            out.push((stack.clone(), len));
            return;
        }
        for &e in inst.out_links(cur) {
            let (_, j) = inst.link_ends(e);
            if stack.contains(&j) {
                continue;
            }
            stack.push(j);
            go(inst, j, d, stack, len + inst.link(e).length, out);
            stack.pop();
        }
    }
    let mut out = Vec::new();
    go(inst, o, d, &mut vec![o], 0.0, &mut out);
    out
}

fn graph() -> impl Strategy<Value = (usize, Vec<(usize, usize, u8)>)> {
    (3usize..=6).prop_flat_map(|n| (Just(n), prop::collection::vec((0..n, 0..n, 1u8..=10), 2..=12)))
}

fn legal_sets(inst: &Instance) -> BTreeMap<(usize, usize), BTreeSet<Vec<usize>>> {
    let cat = PathCatalog::build(inst, CatalogOptions::default()).unwrap();
    cat.pairs()
        .map(|(o, d)| ((o, d), cat.paths(o, d).iter().map(|p| p.nodes.clone()).collect()))
        .collect()
}

/// `s = x * z` on every block route arc.
fn linearization_gap(model: &MilpModel, values: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for var in model.variables() {
        if var.tag.symbol != Symbol::S {
            continue;
        }
        let ix = &var.tag.index;
        let x = model.lookup(Symbol::X, ix).map_or(0.0, |v| values[v]);
        let z = model.lookup(Symbol::Z, &ix[..2]).map_or(0.0, |v| values[v]);
        worst = worst.max((values[var.id] - x * z).abs());
    }
    worst
}

struct Incumbents<'a> {
    model: &'a MilpModel,
    worst: f64,
    seen: usize,
}

impl SolveObserver for Incumbents<'_> {
    fn on_incumbent(&mut self, values: &[f64], _objective: f64) {
        self.seen += 1;
        self.worst = self.worst.max(linearization_gap(self.model, values));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, ..ProptestConfig::default() })]

    #[test]
    fn catalog_lists_exactly_the_short_simple_paths((n, arcs) in graph()) {
        for eps in [1.0, 1.2, 1.5, 10.0] {
            let inst = network(n, &arcs, eps);
            let cat = PathCatalog::build(&inst, CatalogOptions::default()).unwrap();
            for o in 0..n {
                for d in 0..n {
                    if o == d {
                        continue;
                    }
                    let all = all_simple_paths(&inst, o, d);
                    let delta = all.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
                    let mut want: Vec<(Vec<usize>, f64)> = all.into_iter().filter(|p| p.1 <= eps * delta + 1e-9).collect();
                    want.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
                    let got: Vec<(Vec<usize>, f64)> = cat.paths(o, d).iter().map(|p| (p.nodes.clone(), p.length)).collect();
                    prop_assert_eq!(got, want);
                }
            }
        }
    }

    #[test]
    fn legal_paths_grow_with_the_detour_ratio((n, arcs) in graph()) {
        let tight = legal_sets(&network(n, &arcs, 1.1));
        let loose = legal_sets(&network(n, &arcs, 1.6));
        for (pair, set) in &tight {
            prop_assert!(set.is_subset(&loose[pair]));
        }
    }

    #[test]
    fn block_sequences_double_per_intermediate_yard(k in 0usize..8) {
        let nodes: Vec<usize> = (0..k + 2).collect();
        let seqs = enumerate_block_sequences(&nodes);
        prop_assert_eq!(seqs.len(), 1 << k);
        let distinct: BTreeSet<_> = seqs.iter().collect();
        prop_assert_eq!(distinct.len(), seqs.len());
        for s in &seqs {
            prop_assert_eq!(s.blocks[0].0, 0);
            prop_assert_eq!(s.blocks[s.blocks.len() - 1].1, k + 1);
            prop_assert!(s.blocks.windows(2).all(|w| w[0].1 == w[1].0 && w[0].0 < w[1].0));
        }
    }

    #[test]
    fn oracle_plans_are_feasible(seed in any::<u64>()) {
        let lim = OracleLimits::default();
        let inst = random_instance(seed, &lim);
        let cat = PathCatalog::build(&inst, CatalogOptions::default()).unwrap();
        if let Ok(opt) = oracle_optimum(&inst, &cat, &lim) {
            let report = validate(&inst, &opt.solution).unwrap();
            prop_assert!(report.is_feasible(), "{:?}", report.violations);
            prop_assert!((report.costs.total - opt.objective).abs() <= 1e-9 * opt.objective.max(1.0));
        }
    }

    #[test]
    fn solver_plans_agree_with_the_validator(seed in any::<u64>()) {
        let inst = random_instance(seed, &OracleLimits::default());
        let cat = PathCatalog::build(&inst, CatalogOptions::default()).unwrap();
        let model = build_integrated(&inst, &cat, &BuildOptions::default()).unwrap();
        let mut watch = Incumbents { model: &model, worst: 0.0, seen: 0 };
        let r = solve_milp_with(&model, &SolveOptions::default(), &NoClock, &mut watch, None).unwrap();
        prop_assert!(watch.worst <= 1e-6);
        let Some(obj) = r.objective else { return Ok(()) };
        prop_assert!(watch.seen >= 1);
        let sol = decode_integrated(&inst, &model, &r.values).unwrap();
        let report = validate(&inst, &sol).unwrap();
        prop_assert!(report.is_feasible(), "{:?}", report.violations);
        prop_assert!((report.costs.total - obj).abs() <= 1e-6 * obj.abs().max(1.0));
        // Sort tracks are exactly the rounded-up flow.
        let flows = block_flows(&inst, &sol.sequences);
        for b in &sol.blocks {
            let f = flows.get(&(b.p, b.q)).copied().unwrap_or(0.0);
            prop_assert_eq!(b.w as f64, (f / inst.params().track_capacity).ceil());
        }
    }

    #[test]
    fn sequential_is_an_upper_bound(seed in any::<u64>()) {
        let inst = random_instance(seed, &OracleLimits::default());
        let cat = PathCatalog::build(&inst, CatalogOptions::default()).unwrap();
        let Ok(seq) = solve_sequential(&inst, &cat, &SolveOptions::default(), &BuildOptions::default(), &NoClock) else {
            return Ok(());
        };
        let sol = &seq.solution;
        // Stage one is solved to optimality and fixes the car-km.
        prop_assert!((sol.costs.car_km - seq.path_stage.objective.unwrap()).abs() <= 1e-6 * sol.costs.car_km.max(1.0));
        let report = validate(&inst, sol).unwrap();
        let families = report.families();
        for f in ["Eq5-frequency", "Eq6-chain", "Eq12-intree", "Eq13-provided", "Eq14-consistency"] {
            prop_assert!(!families.contains(f), "{:?}", report.violations);
        }
        let model = build_integrated(&inst, &cat, &BuildOptions::default()).unwrap();
        if let Some(opt) = solve_milp(&model, &SolveOptions::default()).unwrap().objective {
            prop_assert!(sol.costs.total >= opt - 1e-6 * opt.abs().max(1.0));
        }
    }

    #[test]
    fn dropping_the_detour_rows_never_costs_car_km(seed in any::<u64>()) {
        let inst = random_instance(seed, &OracleLimits::default());
        let cat = PathCatalog::build(&inst, CatalogOptions::default()).unwrap();
        let with = build_path_model(&inst, &cat, &BuildOptions { include_detour: true, ..Default::default() }).unwrap();
        let loose = PathCatalog::build(&inst, CatalogOptions { detour: false, ..Default::default() }).unwrap();
        let without = build_path_model(
            &inst,
            &loose,
            &BuildOptions { include_detour: false, reduction: railblock_core::builders::Reduction::Full, ..Default::default() },
        )
        .unwrap();
        let a = solve_milp(&with, &SolveOptions::default()).unwrap().objective;
        let b = solve_milp(&without, &SolveOptions::default()).unwrap().objective;
        if let Some(a) = a {
            let b = b.expect("relaxation stays feasible");
            prop_assert!(b <= a + 1e-6 * a.max(1.0));
        }
    }
}
