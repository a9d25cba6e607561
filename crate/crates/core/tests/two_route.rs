use railblock_core::builders::{build_integrated, build_path_model, BuildOptions, Reduction};
use railblock_core::instance::{Demand, Instance};
use railblock_core::milp::Symbol;
use railblock_core::oracle::{oracle_optimum, OracleLimits};
use railblock_core::pathgen::{enumerate_block_sequences, CatalogOptions, PathCatalog};
use railblock_core::sample::two_route_network;
use railblock_core::sequential::{check_link_trains, solve_sequential};
use railblock_core::solution::decode_integrated;
use railblock_core::solver::{solve_milp, NoClock, SolveOptions, SolveStatus};
use railblock_core::validate::validate;

fn catalog(inst: &Instance) -> PathCatalog {
    PathCatalog::build(inst, CatalogOptions::default()).unwrap()
}

fn with_cars(cars: f64) -> Instance {
    let base = two_route_network();
    let demands = vec![Demand {
        origin: 1,
        destination: 5,
        cars,
    }];
    Instance::new(base.yards().to_vec(), base.links().to_vec(), demands, base.params().clone()).unwrap()
}

#[test]
fn every_method_reaches_530() {
    let inst = two_route_network();
    let cat = catalog(&inst);

    let oracle = oracle_optimum(&inst, &cat, &OracleLimits::default()).unwrap();
    assert_eq!(oracle.objective, 530.0);

    for reduction in [Reduction::Reduced, Reduction::Full] {
        let opts = BuildOptions {
            reduction,
            ..Default::default()
        };
        let model = build_integrated(&inst, &cat, &opts).unwrap();
        let r = solve_milp(&model, &SolveOptions::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!((r.objective.unwrap() - 530.0).abs() < 1e-6, "{reduction:?}: {:?}", r.objective);
        let sol = decode_integrated(&inst, &model, &r.values).unwrap();
        let report = validate(&inst, &sol).unwrap();
        assert!(report.is_feasible(), "{:?}", report.violations);
        assert!((report.costs.total - 530.0).abs() < 1e-6);
    }

    let seq = solve_sequential(&inst, &cat, &SolveOptions::default(), &BuildOptions::default(), &NoClock).unwrap();
    assert_eq!(seq.solution.costs.total, 530.0);
    assert_eq!(seq.solution.costs.car_km, 300.0);
    assert_eq!(seq.solution.costs.accumulation, 500.0);
    assert_eq!(seq.solution.costs.reclassification, 0.0);
    assert!(validate(&inst, &seq.solution).unwrap().is_feasible());
}

#[test]
fn path_stage_and_frequencies() {
    let inst = two_route_network();
    let cat = catalog(&inst);
    let model = build_path_model(&inst, &cat, &BuildOptions::default()).unwrap();
    let r = solve_milp(&model, &SolveOptions::default()).unwrap();
    assert_eq!(r.objective, Some(300.0));

    let seq = solve_sequential(&inst, &cat, &SolveOptions::default(), &BuildOptions::default(), &NoClock).unwrap();
    assert_eq!(seq.path_stage.objective, Some(300.0));
    let block = seq.solution.block(1, 5).unwrap();
    assert_eq!(block.z, 2.0);
    assert_eq!(block.w, 1);
    let loads = check_link_trains(&seq.solution, &inst);
    let first = loads.iter().find(|l| (l.i, l.j) == (1, 2)).unwrap();
    assert_eq!(first.trains, 2.0);
    assert_eq!(first.slack, 8.0);
    assert!(loads.iter().all(|l| !l.violated()));
}

#[test]
fn tight_link_is_reported_not_repaired() {
    let base = two_route_network();
    let mut links = base.links().to_vec();
    links[0].capacity = 1.0;
    let inst = Instance::new(base.yards().to_vec(), links, base.demands().to_vec(), base.params().clone()).unwrap();
    let cat = catalog(&inst);
    // Link (1,2) now takes at most 50 cars, so the path stage has no solution.
    assert!(solve_sequential(&inst, &cat, &SolveOptions::default(), &BuildOptions::default(), &NoClock).is_err());

    let seq = solve_sequential(&base, &catalog(&base), &SolveOptions::default(), &BuildOptions::default(), &NoClock).unwrap();
    let loads = check_link_trains(&seq.solution, &inst);
    assert_eq!(loads.iter().filter(|l| l.violated()).count(), 1);
}

#[test]
fn sort_tracks_follow_the_flow() {
    let inst = with_cars(401.0);
    let cat = catalog(&inst);
    let model = build_integrated(&inst, &cat, &BuildOptions::default()).unwrap();
    let r = solve_milp(&model, &SolveOptions::default()).unwrap();
    let sol = decode_integrated(&inst, &model, &r.values).unwrap();
    let used = sol.block(1, 5).unwrap();
    assert_eq!(used.w, 3);
    for var in model.variables() {
        if var.tag.symbol == Symbol::W && (var.tag.index[0], var.tag.index[1]) != (1, 5) {
            assert_eq!(r.values[var.id].round(), 0.0, "{}", var.tag);
        }
    }
}

#[test]
fn huge_reclassification_delay_keeps_the_direct_block() {
    let base = two_route_network();
    let mut yards = base.yards().to_vec();
    for y in &mut yards {
        y.reclass_delay = 1e6;
    }
    let inst = Instance::new(yards, base.links().to_vec(), base.demands().to_vec(), base.params().clone()).unwrap();
    let seq = solve_sequential(&inst, &catalog(&inst), &SolveOptions::default(), &BuildOptions::default(), &NoClock).unwrap();
    assert_eq!(seq.solution.sequence_of(1, 5).unwrap().blocks, vec![(1, 5)]);
}

#[test]
fn block_sequences_over_both_paths() {
    let inst = two_route_network();
    let ix = |ids: &[u32]| ids.iter().map(|&i| inst.index_of(i).unwrap()).collect::<Vec<_>>();
    let ids = |v: Vec<usize>| v.into_iter().map(|i| inst.yard_id(i)).collect::<Vec<_>>();
    for (path, mid) in [([1, 2, 3, 5], 3), ([1, 2, 4, 5], 4)] {
        let seqs = enumerate_block_sequences(&ix(&path));
        let got: Vec<Vec<(u32, u32)>> = seqs
            .iter()
            .map(|s| s.blocks.iter().map(|&(p, q)| (inst.yard_id(p), inst.yard_id(q))).collect())
            .collect();
        assert_eq!(
            got,
            vec![
                vec![(1, 5)],
                vec![(1, 2), (2, 5)],
                vec![(1, mid), (mid, 5)],
                vec![(1, 2), (2, mid), (mid, 5)],
            ]
        );
        let yards: Vec<Vec<u32>> = seqs.iter().map(|s| ids(s.reclassification_yards())).collect();
        assert_eq!(yards, vec![vec![5], vec![2, 5], vec![mid, 5], vec![2, mid, 5]]);
    }
}
