//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line per
//! criterion and exits non-zero when any of them fails.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use railblock::mps::{read_mps, write_mps};
use railblock_core::builders::{build_block_model, build_integrated, build_path_model, default_big_m, BuildOptions, Reduction};
use railblock_core::instance::{Demand, Instance, Link, Params, Yard};
use railblock_core::milp::{predicted_size, stats, MilpModel, ModelFamily, Symbol};
use railblock_core::oracle::{oracle_optimum, random_instance, OracleLimits};
use railblock_core::pathgen::{enumerate_block_sequences, CatalogOptions, Path, PathCatalog};
use railblock_core::sample::{constraint_mutations, two_route_network};
use railblock_core::sequential::solve_sequential;
use railblock_core::solution::{block_flows, decode_integrated, TbspSolution};
use railblock_core::solver::{relative_gap, solve_milp, solve_milp_with, NoClock, SolveObserver, SolveOptions, SolveStatus};
use railblock_core::validate::{compare_reports, format_percent, validate, RunSummary, FAMILIES};

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-6 * a.abs().max(b.abs()).max(1.0)
}

/// Equal, and exactly equal when the reference is integral.
fn same_optimum(reference: f64, got: f64) -> bool {
    if reference.fract() == 0.0 {
        got.round() == reference && close(reference, got)
    } else {
        close(reference, got)
    }
}

fn catalog(inst: &Instance) -> PathCatalog {
    PathCatalog::build(inst, CatalogOptions::default()).unwrap()
}

fn integrated(inst: &Instance, reduction: Reduction) -> MilpModel {
    let opts = BuildOptions {
        reduction,
        ..Default::default()
    };
    build_integrated(inst, &catalog(inst), &opts).unwrap()
}

fn milp_optimum(model: &MilpModel) -> Option<(f64, Vec<f64>)> {
    let r = solve_milp(model, &SolveOptions::default()).unwrap();
    match r.status {
        SolveStatus::Optimal => Some((r.objective.unwrap(), r.values)),
        SolveStatus::Infeasible => None,
        other => panic!("unexpected status {other:?}"),
    }
}

/// Every block with flow has `w = ceil(flow / gamma)`; blocks without flow
/// have none.
fn track_law(inst: &Instance, sol: &TbspSolution) -> Result<(), String> {
    let flows = block_flows(inst, &sol.sequences);
    for b in &sol.blocks {
        let f = flows.get(&(b.p, b.q)).copied().unwrap_or(0.0);
        let want = (f / inst.params().track_capacity).ceil();
        ensure!(b.w as f64 == want, "block ({},{}) flow {f} has w {} not {want}", b.p, b.q, b.w);
    }
    Ok(())
}

struct Seeds {
    /// Seeds with a feasible optimum, and that optimum.
    feasible: Vec<(u64, f64)>,
}

fn oracle_equivalence(seeds: &mut Seeds) -> Check {
    let lim = OracleLimits::default();
    let mut infeasible = 0;
    let mut seed = 0;
    while seeds.feasible.len() < 200 {
        let inst = random_instance(seed, &lim);
        let cat = catalog(&inst);
        let oracle = oracle_optimum(&inst, &cat, &lim).ok();
        let model = integrated(&inst, Reduction::Reduced);
        let milp = milp_optimum(&model);
        match (oracle, milp) {
            (Some(o), Some((m, values))) => {
                ensure!(same_optimum(o.objective, m), "seed {seed}: oracle {} vs MILP {m}", o.objective);
                let sol = decode_integrated(&inst, &model, &values).unwrap();
                let report = validate(&inst, &sol).unwrap();
                ensure!(report.is_feasible(), "seed {seed}: {:?}", report.violations);
                track_law(&inst, &sol).map_err(|e| format!("seed {seed}: {e}"))?;
                track_law(&inst, &o.solution).map_err(|e| format!("seed {seed} oracle: {e}"))?;
                seeds.feasible.push((seed, o.objective));
            }
            (None, None) => infeasible += 1,
            (o, m) => {
                return Err(format!(
                    "seed {seed}: oracle {:?} vs MILP {:?}",
                    o.map(|o| o.objective),
                    m.map(|m| m.0)
                ))
            }
        }
        seed += 1;
    }
    Ok(format!("{} feasible agreements, {infeasible} infeasible in both", seeds.feasible.len()))
}

fn full_equals_reduced(seeds: &Seeds) -> Check {
    let lim = OracleLimits::default();
    for &(seed, opt) in seeds.feasible.iter().take(60) {
        let inst = random_instance(seed, &lim);
        let full = milp_optimum(&integrated(&inst, Reduction::Full)).map(|r| r.0);
        ensure!(full.is_some_and(|f| same_optimum(opt, f)), "seed {seed}: reduced {opt} vs full {full:?}");
    }
    Ok("60 instances".into())
}

fn sequential_dominance(seeds: &Seeds) -> Check {
    let lim = OracleLimits::default();
    let mut solved = 0;
    let mut worst: f64 = 0.0;
    for &(seed, opt) in &seeds.feasible {
        let inst = random_instance(seed, &lim);
        let Ok(seq) = solve_sequential(&inst, &catalog(&inst), &SolveOptions::default(), &BuildOptions::default(), &NoClock)
        else {
            continue;
        };
        let ub = seq.solution.costs.total;
        ensure!(ub >= opt - 1e-6 * opt.max(1.0), "seed {seed}: sequential {ub} below optimum {opt}");
        let gap = relative_gap(ub, opt);
        ensure!(close(gap, (ub - opt) / ub), "seed {seed}: gap {gap}");
        worst = worst.max(gap);
        solved += 1;
    }
    ensure!(relative_gap(100.0, 99.0) == 0.01, "gap formula");

    let inst = two_route_network();
    let cat = catalog(&inst);
    let oracle = oracle_optimum(&inst, &cat, &OracleLimits::default()).unwrap().objective;
    let milp = milp_optimum(&integrated(&inst, Reduction::Reduced)).unwrap().0;
    let seq = solve_sequential(&inst, &cat, &SolveOptions::default(), &BuildOptions::default(), &NoClock)
        .unwrap()
        .solution
        .costs
        .total;
    ensure!(oracle == 530.0 && milp == 530.0 && seq == 530.0, "two-route: {oracle} {milp} {seq}");
    Ok(format!("{solved} sequential runs, worst gap {:.2}%, two-route 530", worst * 100.0))
}

fn block_sequence_table() -> Check {
    for mid in [3u32, 4] {
        let ids = [1, 2, mid, 5];
        let nodes: Vec<usize> = ids.iter().map(|&i| i as usize).collect();
        let seqs = enumerate_block_sequences(&nodes);
        let got: Vec<Vec<(usize, usize)>> = seqs.iter().map(|s| s.blocks.clone()).collect();
        let m = mid as usize;
        let want = vec![vec![(1, 5)], vec![(1, 2), (2, 5)], vec![(1, m), (m, 5)], vec![(1, 2), (2, m), (m, 5)]];
        ensure!(got == want, "path 1-2-{mid}-5: {got:?}");
        let yards: Vec<Vec<usize>> = seqs.iter().map(|s| s.reclassification_yards()).collect();
        ensure!(yards == vec![vec![5], vec![2, 5], vec![m, 5], vec![2, m, 5]], "yards {yards:?}");
    }
    Ok("both paths".into())
}

/// `v` yards on a directed ring plus chords up to `e` links.
fn ring_network(v: u32, e: usize) -> Instance {
    let yards = (1..=v)
        .map(|id| Yard {
            id,
            reclass_delay: 1.0,
            class_capacity: 1000.0,
            sort_tracks: 10,
            capacity_ratio: 1.0,
        })
        .collect();
    let mut arcs: Vec<(u32, u32)> = (1..=v).map(|i| (i, i % v + 1)).collect();
    let mut extra = (1..=v).flat_map(|i| (1..=v).map(move |j| (i, j))).filter(|&(i, j)| i != j);
    while arcs.len() < e {
        let a = extra.next().unwrap();
        if !arcs.contains(&a) {
            arcs.push(a);
        }
    }
    let links = arcs
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
        destination: v,
        cars: 100.0,
    }];
    let params = Params {
        train_size: 50.0,
        track_capacity: 200.0,
        detour_ratio: 1.2,
        km_factor: 0.1,
        accumulation_default: 10.0,
        accumulation_overrides: Vec::new(),
    };
    Instance::new(yards, links, demands, params).unwrap()
}

fn size_polynomials() -> Check {
    let mut out = Vec::new();
    for (v, e) in [(4u64, 4usize), (5, 6), (6, 6)] {
        let inst = if v == 6 { two_route_network() } else { ring_network(v as u32, e) };
        ensure!(inst.yard_count() as u64 == v && inst.link_count() == e, "network size");
        let e = e as u64;
        let cat = catalog(&inst);
        let opts = BuildOptions {
            reduction: Reduction::Literal,
            ..Default::default()
        };
        let int = stats(&build_integrated(&inst, &cat, &opts).unwrap());
        let (pv, pc) = predicted_size(v, e, ModelFamily::Integrated);
        // The link-capacity rows sit outside the estimate.
        ensure!(
            (int.variables as u64, int.constraints as u64) == (pv, pc + e),
            "integrated ({v},{e}): {int:?} vs ({pv}, {pc} + {e})"
        );
        let path = stats(&build_path_model(&inst, &cat, &opts).unwrap());
        let want = predicted_size(v, e, ModelFamily::Path);
        ensure!((path.variables as u64, path.constraints as u64) == want, "path ({v},{e}): {path:?} vs {want:?}");
        let routes: BTreeMap<(usize, usize), Path> =
            cat.pairs().map(|(o, d)| ((o, d), cat.paths(o, d)[0].clone())).collect();
        let block = stats(&build_block_model(&inst, &routes, &opts).unwrap());
        let want = predicted_size(v, e, ModelFamily::Block);
        ensure!((block.variables as u64, block.constraints as u64) == want, "block ({v},{e}): {block:?} vs {want:?}");
        out.push(format!("({v},{e}) {}/{}", int.variables, int.constraints));
    }
    Ok(out.join(", "))
}

struct Sandwich<'a> {
    model: &'a MilpModel,
    worst: f64,
    incumbents: usize,
}

impl SolveObserver for Sandwich<'_> {
    fn on_incumbent(&mut self, values: &[f64], _objective: f64) {
        self.incumbents += 1;
        for var in self.model.variables() {
            if var.tag.symbol != Symbol::S {
                continue;
            }
            let ix = &var.tag.index;
            let x = self.model.lookup(Symbol::X, ix).map_or(0.0, |v| values[v]);
            let z = self.model.lookup(Symbol::Z, &ix[..2]).map_or(0.0, |v| values[v]);
            self.worst = self.worst.max((values[var.id] - x * z).abs());
        }
    }
}

fn linearization(seeds: &Seeds) -> Check {
    let lim = OracleLimits::default();
    let mut incumbents = 0;
    for &(seed, opt) in seeds.feasible.iter().take(20) {
        let inst = random_instance(seed, &lim);
        let big_m = default_big_m(&inst);
        ensure!(close(big_m, inst.total_cars() / inst.params().train_size), "default M");
        let model = integrated(&inst, Reduction::Reduced);
        let mut watch = Sandwich {
            model: &model,
            worst: 0.0,
            incumbents: 0,
        };
        let r = solve_milp_with(&model, &SolveOptions::default(), &NoClock, &mut watch, None).unwrap();
        ensure!(watch.worst <= 1e-6, "seed {seed}: |s - xz| = {}", watch.worst);
        ensure!(watch.incumbents >= 1, "seed {seed}: no incumbent");
        incumbents += watch.incumbents;
        let values = r.values;
        for var in model.variables().iter().filter(|v| v.tag.symbol == Symbol::Z) {
            ensure!(values[var.id] <= big_m + 1e-6, "seed {seed}: {} above M", var.tag);
        }
        // A larger M leaves the optimum unchanged.
        let loose = BuildOptions {
            big_m: Some(4.0 * big_m),
            ..Default::default()
        };
        let wide = milp_optimum(&build_integrated(&inst, &catalog(&inst), &loose).unwrap()).map(|r| r.0);
        ensure!(wide.is_some_and(|w| same_optimum(opt, w)), "seed {seed}: M binding ({opt} vs {wide:?})");
    }
    Ok(format!("20 instances, {incumbents} incumbents"))
}

fn track_counts(seeds: &Seeds) -> Check {
    // Optimal plans of every seed were checked while establishing
    // equivalence; this adds the flow sweep on the two-route network.
    let base = two_route_network();
    for cars in [1.0, 100.0, 200.0, 201.0, 401.0, 450.0] {
        let inst = Instance::new(
            base.yards().to_vec(),
            base.links().to_vec(),
            vec![Demand {
                origin: 1,
                destination: 5,
                cars,
            }],
            base.params().clone(),
        )
        .unwrap();
        let model = integrated(&inst, Reduction::Reduced);
        let (_, values) = milp_optimum(&model).ok_or(format!("{cars} cars: infeasible"))?;
        let sol = decode_integrated(&inst, &model, &values).unwrap();
        track_law(&inst, &sol).map_err(|e| format!("{cars} cars: {e}"))?;
        for var in model.variables().iter().filter(|v| v.tag.symbol == Symbol::W) {
            let (p, q) = (var.tag.index[0], var.tag.index[1]);
            if sol.block(p, q).is_none() {
                ensure!(values[var.id].round() == 0.0, "{cars} cars: {} positive", var.tag);
            }
        }
    }
    Ok(format!("{} seeds and 6 flow levels", seeds.feasible.len()))
}

fn mutations() -> Check {
    let all = constraint_mutations();
    ensure!(all.len() == 12, "{} mutations", all.len());
    for m in &all {
        let base = validate(&m.instance, &m.feasible).unwrap();
        ensure!(base.is_feasible(), "{}: base plan {:?}", m.family, base.violations);
        let report = validate(&m.mutated_instance, &m.mutated).map_err(|e| format!("{}: {e}", m.family))?;
        let families = report.families();
        ensure!(
            families.len() == 1 && families.contains(m.family),
            "{}: triggered {families:?}",
            m.family
        );
    }
    let covered: Vec<&str> = all.iter().map(|m| m.family).collect();
    ensure!(FAMILIES.iter().all(|f| covered.contains(f)), "uncovered family");
    Ok("12 families".into())
}

fn summary(car_km: f64, accumulation: f64, reclassification: f64, total: f64, time: f64) -> RunSummary {
    let mut s = RunSummary::default();
    s.costs.car_km = car_km;
    s.costs.accumulation = accumulation;
    s.costs.reclassification = reclassification;
    s.costs.total = total;
    s.time = Some(time);
    s
}

fn detour_relaxation(seeds: &Seeds) -> Check {
    let lim = OracleLimits::default();
    let mut compared = 0;
    let mut lower = 0;
    let mut reports = 0;
    for &(seed, _) in seeds.feasible.iter().take(20) {
        let inst = random_instance(seed, &lim);
        let strict = catalog(&inst);
        let loose = PathCatalog::build(
            &inst,
            CatalogOptions {
                detour: false,
                ..Default::default()
            },
        )
        .unwrap();
        // Stage one of the sequential method, with and without the bound.
        let relaxed = BuildOptions {
            include_detour: false,
            reduction: Reduction::Full,
            ..Default::default()
        };
        let with = build_path_model(&inst, &strict, &BuildOptions::default()).unwrap();
        let without = build_path_model(&inst, &loose, &relaxed).unwrap();
        let ka = milp_optimum(&with).ok_or(format!("seed {seed}: path stage infeasible"))?.0;
        let kb = milp_optimum(&without).ok_or(format!("seed {seed}: relaxed path stage infeasible"))?.0;
        ensure!(kb <= ka + 1e-6 * ka.max(1.0), "seed {seed}: without {kb} above with {ka}");
        if kb < ka - 1e-9 {
            lower += 1;
        }
        let relaxed = BuildOptions {
            include_detour: false,
            ..Default::default()
        };
        let a = solve_sequential(&inst, &strict, &SolveOptions::default(), &BuildOptions::default(), &NoClock);
        let b = solve_sequential(&inst, &loose, &SolveOptions::default(), &relaxed, &NoClock);
        if let (Ok(a), Ok(b)) = (a, b) {
            ensure!(close(a.solution.costs.car_km, ka) && close(b.solution.costs.car_km, kb), "seed {seed}: stage one car-km");
            let text = compare_reports(
                &RunSummary {
                    costs: a.solution.costs,
                    time: None,
                },
                &RunSummary {
                    costs: b.solution.costs,
                    time: None,
                },
            )
            .render("With", "Without");
            ensure!(text.lines().count() == 6, "report layout");
            reports += 1;
        }
        compared += 1;
    }
    ensure!(compared == 20, "only {compared} instances");

    let tables = [
        (
            summary(2_119_046.0, 19_700.0, 4_629.0, 236_233.0, 0.26),
            summary(2_119_046.0, 19_700.0, 4_629.0, 236_233.0, 0.39),
            ["0.00%", "0.00%", "0.00%", "0.00%", "50.00%"],
        ),
        (
            summary(12_537_081.0, 99_072.0, 15_585.0, 1_368_365.0, 4.53),
            summary(12_537_163.0, 98_632.0, 15_953.0, 1_368_301.0, 7.02),
            ["0.00%", "-0.44%", "2.36%", "0.00%", "54.97%"],
        ),
        (
            summary(47_999_769.0, 249_125.0, 121_123.0, 5_170_224.0, 2088.0),
            summary(47_999_801.0, 245_330.0, 123_457.0, 5_168_767.0, 2285.0),
            ["0.00%", "-1.52%", "1.93%", "-0.03%", "9.43%"],
        ),
    ];
    for (k, (a, b, want)) in tables.iter().enumerate() {
        let cmp = compare_reports(a, b);
        let got: Vec<String> = cmp.rows.iter().map(|r| format_percent(r.deviation)).collect();
        ensure!(got == want, "data set {}: {got:?}", k + 1);
    }
    let text = compare_reports(&tables[0].0, &tables[0].1).render("With", "Without");
    let line = text.lines().find(|l| l.starts_with("Car mile (car-km)")).ok_or("missing row")?;
    ensure!(line.contains("2,119,046") && line.ends_with("0.00%"), "row text {line:?}");
    Ok(format!("20 instances ({lower} strictly lower, {reports} reports), 15 table deviations"))
}

fn mps_round_trip() -> Check {
    let base = two_route_network();
    let mut family = vec![base.clone()];
    for cars in [250.0, 401.0] {
        let demands = vec![Demand {
            origin: 1,
            destination: 5,
            cars,
        }];
        family.push(Instance::new(base.yards().to_vec(), base.links().to_vec(), demands, base.params().clone()).unwrap());
    }
    let two = vec![
        Demand {
            origin: 1,
            destination: 5,
            cars: 100.0,
        },
        Demand {
            origin: 2,
            destination: 6,
            cars: 60.0,
        },
    ];
    family.push(Instance::new(base.yards().to_vec(), base.links().to_vec(), two, base.params().clone()).unwrap());

    let mut checked = 0;
    for inst in &family {
        let cat = catalog(inst);
        let seq = solve_sequential(inst, &cat, &SolveOptions::default(), &BuildOptions::default(), &NoClock).unwrap();
        let mut models = vec![
            integrated(inst, Reduction::Reduced),
            integrated(inst, Reduction::Full),
            build_path_model(inst, &cat, &BuildOptions::default()).unwrap(),
            build_block_model(inst, &seq.routes, &BuildOptions::default()).unwrap(),
        ];
        let literal = integrated(inst, Reduction::Literal);
        let back = read_mps(&write_mps(&literal)).map_err(|e| e.to_string())?;
        ensure!(back == literal, "literal model changed in round trip");
        for model in models.drain(..) {
            let back = read_mps(&write_mps(&model)).map_err(|e| e.to_string())?;
            ensure!(back == model, "{} changed in round trip", model.name);
            let a = solve_milp(&model, &SolveOptions::default()).unwrap().objective.ok_or("no optimum")?;
            let b = solve_milp(&back, &SolveOptions::default()).unwrap().objective.ok_or("no optimum")?;
            ensure!((a - b).abs() <= 1e-9 * a.abs().max(1.0), "{}: {a} vs {b}", model.name);
            checked += 1;
        }
    }
    Ok(format!("{checked} models solved, {} literal models read back", family.len()))
}

fn main() {
    let mut seeds = Seeds { feasible: Vec::new() };
    let mut failed = 0;
    let mut report = |n: usize, name: &str, f: &mut dyn FnMut() -> Check| {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panic: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS {n:>2} {name}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {n:>2} {name}: {detail} [{secs:.1}s]");
            }
        }
    };
    report(1, "oracle equivalence", &mut || oracle_equivalence(&mut seeds));
    let seeds = seeds;
    report(2, "full and reduced agree", &mut || full_equals_reduced(&seeds));
    report(3, "sequential dominance and gap", &mut || sequential_dominance(&seeds));
    report(4, "block sequence table", &mut block_sequence_table);
    report(5, "model size polynomials", &mut size_polynomials);
    report(6, "linearization sandwich", &mut || linearization(&seeds));
    report(7, "track count law", &mut || track_counts(&seeds));
    report(8, "constraint mutations", &mut mutations);
    report(9, "detour relaxation and comparison table", &mut || detour_relaxation(&seeds));
    report(10, "MPS round trip", &mut mps_round_trip);
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
