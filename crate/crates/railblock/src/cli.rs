//! Command-line front end.
//!
//! Exit codes: 0 optimal or success, 1 feasible with a remaining gap,
//! 2 infeasible or no solution, 3 usage, input or parse error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use railblock_core::builders::{build_block_model, build_integrated, build_path_model, BuildOptions, Reduction};
use railblock_core::instance::Instance;
use railblock_core::milp::{integrated_row_accounting, predicted_size, stats, MilpModel, ModelFamily};
use railblock_core::oracle::{oracle_optimum, OracleError, OracleLimits};
use railblock_core::pathgen::{CatalogOptions, Path as Route, PathCatalog};
use railblock_core::sequential::{check_link_trains, solve_sequential, SequentialError};
use railblock_core::solution::decode_integrated;
use railblock_core::solver::{solve_lp, solve_milp_with, Clock, Quiet, SolveOptions, SolveResult, SolveStatus};
use railblock_core::validate::{compare_reports, format_number, validate, RunSummary};

use crate::clock::WallClock;
use crate::io::{catalog_file, load_instance, load_solution, save_solution, solution_to_json, IoError};
use crate::manifest::{instance_digest, manifest_path_for, ResultSummary, RunManifest, RunOptions, StageTiming};
use crate::mps::write_mps;

pub const EXIT_OK: i32 = 0;
pub const EXIT_GAP: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "railblock", version, about = "Train blocking and shipment path optimizer")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolveMode {
    /// Every reachable pair over every link.
    Integrated,
    /// Candidate arcs and blocks from the legal paths.
    Reduced,
    /// Path stage, then block stage.
    Sequential,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelMode {
    Integrated,
    Reduced,
    Path,
    Block,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve an instance.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "reduced")]
        mode: SolveMode,
        /// Seconds.
        #[arg(long)]
        time_limit: Option<f64>,
        /// Relative gap at which the search stops.
        #[arg(long, default_value_t = 1e-9)]
        gap: f64,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write every built model as MPS into this directory.
        #[arg(long)]
        export_mps: Option<PathBuf>,
        /// Solution JSON output; printed to stdout when absent.
        #[arg(long)]
        solution: Option<PathBuf>,
        /// Drop the detour bound and keep the k shortest paths per pair.
        #[arg(long)]
        no_detour: bool,
        /// Manifest output; defaults to `<solution stem>.manifest.json`.
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// List legal paths.
    Paths {
        #[arg(long)]
        instance: PathBuf,
        /// Origin and destination yard ids, `o,d`.
        #[arg(long, value_parser = parse_od)]
        od: Option<(u32, u32)>,
        /// Override the detour ratio.
        #[arg(long)]
        epsilon: Option<f64>,
        /// Dump the whole catalog as JSON.
        #[arg(long)]
        all: bool,
    },
    /// Compare estimated and actual model sizes.
    Stats {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "integrated")]
        mode: ModelMode,
    },
    /// Exhaustive optimum of a small instance.
    Oracle {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Check a solution against every constraint family.
    Validate {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        solution: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Cost table of one solution, or a comparison of two.
    Report {
        #[arg(long, conflicts_with = "solution", requires = "b")]
        a: Option<PathBuf>,
        #[arg(long, requires = "a")]
        b: Option<PathBuf>,
        #[arg(long)]
        solution: Option<PathBuf>,
    },
    /// Write a model as MPS.
    Export {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "reduced")]
        mode: ModelMode,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        no_detour: bool,
    },
}

fn parse_od(s: &str) -> Result<(u32, u32), String> {
    let (o, d) = s.split_once(',').ok_or("expected o,d")?;
    let o = o.trim().parse().map_err(|e| format!("origin: {e}"))?;
    let d = d.trim().parse().map_err(|e| format!("destination: {e}"))?;
    Ok((o, d))
}

/// Failure carrying its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl ToString) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.to_string(),
        }
    }

    fn infeasible(message: impl ToString) -> Self {
        Failure {
            code: EXIT_INFEASIBLE,
            message: message.to_string(),
        }
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        Failure::usage(e)
    }
}

type Outcome = Result<i32, Failure>;

/// Runs one command; `args` includes the program name.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let command: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    match dispatch(cli.command, &command) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

pub fn init_logging() {
    let env = env_logger::Env::new().filter_or("RAILBLOCK_LOG", "error");
    let _ = env_logger::Builder::from_env(env).format_timestamp(None).try_init();
}

fn dispatch(command: Command, argv: &[String]) -> Outcome {
    match command {
        Command::Solve {
            instance,
            mode,
            time_limit,
            gap,
            threads,
            seed,
            export_mps,
            solution,
            no_detour,
            manifest,
        } => {
            let run = SolveRun {
                instance,
                mode,
                options: RunOptions {
                    time_limit,
                    gap,
                    threads,
                    seed,
                    detour: !no_detour,
                },
                export_mps,
                solution,
                manifest,
            };
            run.execute(argv)
        }
        Command::Paths {
            instance,
            od,
            epsilon,
            all,
        } => paths(&instance, od, epsilon, all),
        Command::Stats { instance, mode } => model_stats(&instance, mode),
        Command::Oracle { instance } => oracle(&instance),
        Command::Validate {
            instance,
            solution,
            json,
        } => check(&instance, &solution, json),
        Command::Report { a, b, solution } => report(a, b, solution),
        Command::Export {
            instance,
            mode,
            out,
            no_detour,
        } => export(&instance, mode, &out, no_detour),
    }
}

fn catalog(inst: &Instance, detour: bool) -> Result<PathCatalog, Failure> {
    let options = CatalogOptions {
        detour,
        ..Default::default()
    };
    PathCatalog::build(inst, options).map_err(Failure::infeasible)
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|source| {
        Failure::usage(IoError::Io {
            path: path.to_path_buf(),
            source,
        })
    })
}

fn status_name(s: SolveStatus) -> &'static str {
    match s {
        SolveStatus::Optimal => "optimal",
        SolveStatus::Feasible => "feasible",
        SolveStatus::Infeasible => "infeasible",
        SolveStatus::Unbounded => "unbounded",
        SolveStatus::LimitReached => "limit reached",
    }
}

fn timing(stage: &str, r: &SolveResult) -> StageTiming {
    StageTiming {
        stage: stage.into(),
        status: status_name(r.status).into(),
        objective: r.objective,
        bound: r.bound,
        nodes: r.nodes,
        seconds: r.time,
    }
}

/// Block routes for models built without a path stage: the first legal
/// path of every pair.
fn first_routes(catalog: &PathCatalog) -> BTreeMap<(usize, usize), Route> {
    catalog.pairs().map(|(o, d)| ((o, d), catalog.paths(o, d)[0].clone())).collect()
}

struct SolveRun {
    instance: PathBuf,
    mode: SolveMode,
    options: RunOptions,
    export_mps: Option<PathBuf>,
    solution: Option<PathBuf>,
    manifest: Option<PathBuf>,
}

impl SolveRun {
    fn solve_options(&self) -> Result<SolveOptions, Failure> {
        let o = &self.options;
        if !(o.gap >= 0.0) {
            return Err(Failure::usage("--gap must be non-negative"));
        }
        if o.time_limit.is_some_and(|t| !(t > 0.0)) {
            return Err(Failure::usage("--time-limit must be positive"));
        }
        if o.threads == 0 {
            return Err(Failure::usage("--threads must be at least 1"));
        }
        Ok(SolveOptions {
            time_limit: o.time_limit.unwrap_or(f64::INFINITY),
            rel_gap_target: o.gap,
            threads: o.threads,
            seed: o.seed,
            ..Default::default()
        })
    }

    fn export(&self, name: &str, model: &MilpModel) -> Result<(), Failure> {
        if let Some(dir) = &self.export_mps {
            fs::create_dir_all(dir).map_err(|source| {
                Failure::usage(IoError::Io {
                    path: dir.clone(),
                    source,
                })
            })?;
            write_file(&dir.join(format!("{name}.mps")), &write_mps(model))?;
        }
        Ok(())
    }

    fn execute(&self, argv: &[String]) -> Outcome {
        let clock = WallClock::start();
        let inst = load_instance(&self.instance)?;
        let digest = instance_digest(&self.instance)?;
        let solve = self.solve_options()?;
        let cat = catalog(&inst, self.options.detour)?;
        let build = BuildOptions {
            reduction: match self.mode {
                SolveMode::Integrated => Reduction::Full,
                _ => Reduction::Reduced,
            },
            include_detour: self.options.detour,
            big_m: None,
        };

        let mut stages = Vec::new();
        let (solution, result, code) = match self.mode {
            SolveMode::Integrated | SolveMode::Reduced => {
                let mut build = build;
                if !self.options.detour {
                    build.reduction = Reduction::Full;
                }
                let model = build_integrated(&inst, &cat, &build).map_err(Failure::infeasible)?;
                self.export(mode_name(self.mode), &model)?;
                log::info!("{} variables, {} rows", model.num_vars(), model.num_constraints());
                let r = solve_milp_with(&model, &solve, &clock, &mut Quiet, None).map_err(Failure::infeasible)?;
                stages.push(timing("integrated", &r));
                let code = match (r.status, r.objective) {
                    (SolveStatus::Optimal, Some(_)) => EXIT_OK,
                    (_, Some(_)) => EXIT_GAP,
                    _ => EXIT_INFEASIBLE,
                };
                let summary = ResultSummary::new(status_name(r.status), r.objective, r.bound, Some("branch and bound"));
                let sol = match r.objective {
                    Some(_) => Some(decode_integrated(&inst, &model, &r.values).map_err(Failure::infeasible)?),
                    None => None,
                };
                (sol, summary, code)
            }
            SolveMode::Sequential => self.sequential(&inst, &cat, &solve, &build, &clock, &mut stages)?,
        };

        let time = clock.elapsed();
        match (&solution, &self.solution) {
            (Some(sol), Some(path)) => save_solution(sol, Some(time), path)?,
            (Some(sol), None) => println!("{}", solution_to_json(sol, Some(time))),
            (None, _) => {}
        }
        let manifest_path = self.manifest.clone().or_else(|| self.solution.as_deref().map(manifest_path_for));
        if let Some(path) = manifest_path {
            let manifest = RunManifest {
                command: argv.to_vec(),
                instance: self.instance.display().to_string(),
                instance_sha256: digest,
                mode: mode_name(self.mode).into(),
                options: self.options.clone(),
                stages,
                result: result.clone(),
                total_seconds: time,
            };
            manifest.save(&path)?;
        }
        match (result.upper_bound, result.gap) {
            (Some(ub), Some(gap)) => eprintln!("{}: {} (gap {:.4}%)", result.status, format_number(ub), gap * 100.0),
            (Some(ub), None) => eprintln!("{}: {}", result.status, format_number(ub)),
            _ => eprintln!("{}", result.status),
        }
        Ok(code)
    }

    fn sequential(
        &self,
        inst: &Instance,
        cat: &PathCatalog,
        solve: &SolveOptions,
        build: &BuildOptions,
        clock: &WallClock,
        stages: &mut Vec<StageTiming>,
    ) -> Result<(Option<railblock_core::solution::TbspSolution>, ResultSummary, i32), Failure> {
        let outcome = match solve_sequential(inst, cat, solve, build, clock) {
            Ok(o) => o,
            Err(SequentialError::NoSolution { stage, status }) => {
                let summary = ResultSummary::new(&format!("{stage}: {}", status_name(status)), None, None, None);
                return Ok((None, summary, EXIT_INFEASIBLE));
            }
            Err(e) => return Err(Failure::infeasible(e)),
        };
        stages.push(timing("path", &outcome.path_stage));
        stages.push(timing("block", &outcome.block_stage));

        if self.export_mps.is_some() {
            let mut path_build = *build;
            if !build.include_detour {
                path_build.reduction = Reduction::Full;
            }
            let path_model = build_path_model(inst, cat, &path_build).map_err(Failure::infeasible)?;
            self.export("path", &path_model)?;
            let block_model = build_block_model(inst, &outcome.routes, build).map_err(Failure::infeasible)?;
            self.export("block", &block_model)?;
        }

        for load in check_link_trains(&outcome.solution, inst).iter().filter(|l| l.violated()) {
            log::warn!(
                "link {}->{} carries {} trains over a capacity of {}",
                load.i,
                load.j,
                load.trains,
                load.capacity
            );
        }

        // Lower bound from the relaxation of the reduced integrated model.
        let reduced = BuildOptions {
            reduction: if build.include_detour { Reduction::Reduced } else { Reduction::Full },
            ..*build
        };
        let lb = build_integrated(inst, cat, &reduced)
            .ok()
            .and_then(|m| solve_lp(&m).ok())
            .filter(|r| r.status == SolveStatus::Optimal)
            .and_then(|r| r.objective);
        let both_optimal =
            outcome.path_stage.status == SolveStatus::Optimal && outcome.block_stage.status == SolveStatus::Optimal;
        let status = if both_optimal { "stages optimal" } else { "stage limit reached" };
        let summary = ResultSummary::new(
            status,
            Some(outcome.solution.costs.total),
            lb,
            Some("linear relaxation of the reduced integrated model"),
        );
        let code = if both_optimal { EXIT_OK } else { EXIT_GAP };
        Ok((Some(outcome.solution), summary, code))
    }
}

fn mode_name(mode: SolveMode) -> &'static str {
    match mode {
        SolveMode::Integrated => "integrated",
        SolveMode::Reduced => "reduced",
        SolveMode::Sequential => "sequential",
    }
}

fn paths(instance: &Path, od: Option<(u32, u32)>, epsilon: Option<f64>, all: bool) -> Outcome {
    let mut inst = load_instance(instance)?;
    if let Some(eps) = epsilon {
        let mut params = inst.params().clone();
        params.detour_ratio = eps;
        inst = Instance::new(inst.yards().to_vec(), inst.links().to_vec(), inst.demands().to_vec(), params)
            .map_err(Failure::usage)?;
    }
    let cat = catalog(&inst, true)?;
    if all {
        let text = serde_json::to_string_pretty(&catalog_file(&inst, &cat)).expect("catalog serializes");
        println!("{text}");
        return Ok(EXIT_OK);
    }
    let (o, d) = od.ok_or_else(|| Failure::usage("either --od or --all is required"))?;
    let ix = |id: u32| inst.index_of(id).ok_or_else(|| Failure::usage(format!("unknown yard {id}")));
    let (oi, di) = (ix(o)?, ix(d)?);
    let list = cat.paths(oi, di);
    if list.is_empty() {
        eprintln!("no path from {o} to {d}");
        return Ok(EXIT_INFEASIBLE);
    }
    let out = std::io::stdout();
    let mut out = out.lock();
    for p in list {
        let nodes: Vec<String> = p.yard_ids(&inst).iter().map(u32::to_string).collect();
        let _ = writeln!(out, "{:>10}  {}", format_number(p.length), nodes.join("-"));
    }
    Ok(EXIT_OK)
}

/// The model a `stats` or `export` mode stands for. `integrated` is the
/// literal enumeration the size estimates count.
fn model_for(inst: &Instance, cat: &PathCatalog, mode: ModelMode, detour: bool) -> Result<MilpModel, Failure> {
    let opts = |reduction| BuildOptions {
        reduction,
        include_detour: detour,
        big_m: None,
    };
    let built = match mode {
        ModelMode::Integrated => build_integrated(inst, cat, &opts(Reduction::Literal)),
        ModelMode::Reduced if detour => build_integrated(inst, cat, &opts(Reduction::Reduced)),
        ModelMode::Reduced => build_integrated(inst, cat, &opts(Reduction::Full)),
        ModelMode::Path => build_path_model(inst, cat, &opts(Reduction::Literal)),
        ModelMode::Block => build_block_model(inst, &first_routes(cat), &opts(Reduction::Literal)),
    };
    built.map_err(Failure::infeasible)
}

fn model_stats(instance: &Path, mode: ModelMode) -> Outcome {
    let inst = load_instance(instance)?;
    let cat = catalog(&inst, true)?;
    let model = model_for(&inst, &cat, mode, true)?;
    let actual = stats(&model);
    let (v, e) = (inst.yard_count() as u64, inst.link_count() as u64);
    let family = match mode {
        ModelMode::Integrated | ModelMode::Reduced => ModelFamily::Integrated,
        ModelMode::Path => ModelFamily::Path,
        ModelMode::Block => ModelFamily::Block,
    };
    let (pv, pc) = predicted_size(v, e, family);
    let name = match mode {
        ModelMode::Integrated => "integrated (complete enumeration)",
        ModelMode::Reduced => "integrated (candidate sets)",
        ModelMode::Path => "path",
        ModelMode::Block => "block",
    };
    println!("model: {name}");
    println!("yards {v}, links {e}");
    println!("{:<14} {:>14} {:>14}", "", "estimate", "actual");
    println!("{:<14} {:>14} {:>14}", "variables", format_number(pv as f64), format_number(actual.variables as f64));
    println!("{:<14} {:>14} {:>14}", "constraints", format_number(pc as f64), format_number(actual.constraints as f64));
    println!("{:<14} {:>14} {:>14}", "nonzeros", "", format_number(actual.nonzeros as f64));
    if family == ModelFamily::Integrated {
        let outside: u64 = integrated_row_accounting(v, e)
            .iter()
            .filter(|r| r.1.starts_with('('))
            .map(|r| r.2)
            .sum();
        println!("rows outside the estimate (link capacity): {outside}");
    }
    Ok(EXIT_OK)
}

fn oracle(instance: &Path) -> Outcome {
    let inst = load_instance(instance)?;
    let cat = catalog(&inst, true)?;
    match oracle_optimum(&inst, &cat, &OracleLimits::default()) {
        Ok(opt) => {
            println!("optimum {}", format_number(opt.objective));
            println!("plans evaluated {}", opt.plans_evaluated);
            println!("{}", solution_to_json(&opt.solution, None));
            Ok(EXIT_OK)
        }
        Err(e @ (OracleError::Limit { .. } | OracleError::BadLimits)) => Err(Failure::usage(e)),
        Err(e) => Err(Failure::infeasible(e)),
    }
}

fn check(instance: &Path, solution: &Path, as_json: bool) -> Outcome {
    let inst = load_instance(instance)?;
    let sol = load_solution(solution)?.to_solution();
    let report = validate(&inst, &sol).map_err(Failure::usage)?;
    if as_json {
        let violations: Vec<_> = report
            .violations
            .iter()
            .map(|v| {
                json!({
                    "family": v.family,
                    "index": v.index,
                    "lhs": v.lhs,
                    "rhs": v.rhs,
                    "magnitude": v.magnitude,
                })
            })
            .collect();
        let c = &report.costs;
        let doc = json!({
            "feasible": report.is_feasible(),
            "violations": violations,
            "costs": {
                "car_km": c.car_km,
                "accumulation": c.accumulation,
                "reclassification": c.reclassification,
                "total": c.total,
            },
        });
        println!("{}", serde_json::to_string_pretty(&doc).expect("report serializes"));
    } else {
        for v in &report.violations {
            println!("{v}");
        }
        let c = &report.costs;
        println!(
            "{}: car-km {}, accumulation {}, reclassification {}, total {}",
            if report.is_feasible() { "feasible" } else { "infeasible" },
            format_number(c.car_km),
            format_number(c.accumulation),
            format_number(c.reclassification),
            format_number(c.total)
        );
    }
    Ok(if report.is_feasible() { EXIT_OK } else { EXIT_INFEASIBLE })
}

fn summary(path: &Path) -> Result<RunSummary, Failure> {
    let file = load_solution(path)?;
    Ok(RunSummary {
        costs: file.to_solution().costs,
        time: file.time,
    })
}

fn label(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn report(a: Option<PathBuf>, b: Option<PathBuf>, solution: Option<PathBuf>) -> Outcome {
    match (a, b, solution) {
        (Some(a), Some(b), None) => {
            let cmp = compare_reports(&summary(&a)?, &summary(&b)?);
            print!("{}", cmp.render(&label(&a), &label(&b)));
            Ok(EXIT_OK)
        }
        (None, None, Some(s)) => {
            let run = summary(&s)?;
            let c = &run.costs;
            println!("{:<32} {:>16}", "", label(&s));
            let mut rows = vec![
                ("Car mile (car-km)", Some(c.car_km)),
                ("Accumulation (car-hour)", Some(c.accumulation)),
                ("Classification cost (car-hour)", Some(c.reclassification)),
                ("Total cost (car-hour)", Some(c.total)),
            ];
            rows.push(("Run time (second)", run.time));
            for (name, value) in rows {
                println!("{name:<32} {:>16}", value.map_or("n/a".into(), format_number));
            }
            Ok(EXIT_OK)
        }
        _ => Err(Failure::usage("report needs --a and --b, or --solution")),
    }
}

fn export(instance: &Path, mode: ModelMode, out: &Path, no_detour: bool) -> Outcome {
    let inst = load_instance(instance)?;
    let cat = catalog(&inst, !no_detour)?;
    let model = model_for(&inst, &cat, mode, !no_detour)?;
    write_file(out, &write_mps(&model))?;
    eprintln!("{} variables, {} rows", model.num_vars(), model.num_constraints());
    Ok(EXIT_OK)
}
