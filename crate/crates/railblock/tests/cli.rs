use std::path::Path;
use std::process::Command;

use railblock::cli::run;
use railblock::io::{load_solution, save_instance};
use railblock::manifest::RunManifest;
use railblock_core::sample::two_route_network;
use railblock_core::validate::validate;

fn instance_file(dir: &Path) -> String {
    let path = dir.join("two_route.json");
    save_instance(&two_route_network(), &path).unwrap();
    path.display().to_string()
}

fn rb(args: &[&str]) -> i32 {
    run(std::iter::once("railblock").chain(args.iter().copied()))
}

#[test]
fn unknown_flag_is_a_usage_error() {
    assert_eq!(rb(&["solve", "--frobnicate"]), 3);
    assert_eq!(rb(&["nonsense"]), 3);
    assert_eq!(rb(&[]), 3);
    let out = Command::new(env!("CARGO_BIN_EXE_railblock")).args(["solve", "--frobnicate"]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn help_exits_cleanly() {
    assert_eq!(rb(&["--help"]), 0);
}

#[test]
fn missing_instance_is_a_usage_error() {
    assert_eq!(rb(&["solve", "--instance", "/nonexistent.json"]), 3);
}

#[test]
fn reduced_solve_writes_solution_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let inst = instance_file(dir.path());
    let out = dir.path().join("plan.json");
    let mps = dir.path().join("mps");
    let code = rb(&[
        "solve",
        "--mode",
        "reduced",
        "--instance",
        &inst,
        "--solution",
        out.to_str().unwrap(),
        "--export-mps",
        mps.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let sol = load_solution(&out).unwrap();
    assert_eq!(sol.costs.total, 530.0);
    assert!(validate(&two_route_network(), &sol.to_solution()).unwrap().is_feasible());
    assert!(mps.join("reduced.mps").exists());

    let manifest = RunManifest::load(&dir.path().join("plan.manifest.json")).unwrap();
    assert_eq!(manifest.mode, "reduced");
    assert_eq!(manifest.result.status, "optimal");
    assert_eq!(manifest.result.upper_bound, Some(530.0));
    assert_eq!(manifest.result.gap, Some(0.0));
    assert_eq!(manifest.instance_sha256.len(), 64);

    assert_eq!(rb(&["validate", "--instance", &inst, "--solution", out.to_str().unwrap()]), 0);
    assert_eq!(rb(&["validate", "--instance", &inst, "--solution", out.to_str().unwrap(), "--json"]), 0);
    assert_eq!(rb(&["report", "--solution", out.to_str().unwrap()]), 0);
}

#[test]
fn manifests_repeat_except_for_timings() {
    let dir = tempfile::tempdir().unwrap();
    let inst = instance_file(dir.path());
    let mut manifests = Vec::new();
    for _ in 0..2 {
        let manifest = dir.path().join("m.json");
        let args = ["solve", "--mode", "sequential", "--seed", "7", "--instance", &inst, "--solution"];
        let out = dir.path().join("s.json");
        let mut all: Vec<&str> = args.to_vec();
        all.extend([out.to_str().unwrap(), "--manifest", manifest.to_str().unwrap()]);
        assert_eq!(rb(&all), 0);
        manifests.push(RunManifest::load(&manifest).unwrap().without_timings());
    }
    assert_eq!(manifests[0], manifests[1]);
    assert_eq!(manifests[0].stages.len(), 2);
    assert_eq!(manifests[0].options.seed, 7);
    assert!(manifests[0].result.lower_bound_source.is_some());
}

#[test]
fn detour_comparison_report() {
    let dir = tempfile::tempdir().unwrap();
    let inst = instance_file(dir.path());
    let a = dir.path().join("detour.json");
    let b = dir.path().join("no_detour.json");
    assert_eq!(rb(&["solve", "--mode", "sequential", "--instance", &inst, "--solution", a.to_str().unwrap()]), 0);
    let args = ["solve", "--mode", "sequential", "--no-detour", "--instance", &inst, "--solution", b.to_str().unwrap()];
    assert_eq!(rb(&args), 0);
    assert_eq!(rb(&["report", "--a", a.to_str().unwrap(), "--b", b.to_str().unwrap()]), 0);
    assert_eq!(rb(&["report", "--a", a.to_str().unwrap()]), 3);
}

#[test]
fn infeasible_instance_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let base = two_route_network();
    let mut links = base.links().to_vec();
    links[0].capacity = 1.0;
    let inst = railblock_core::instance::Instance::new(
        base.yards().to_vec(),
        links,
        base.demands().to_vec(),
        base.params().clone(),
    )
    .unwrap();
    let path = dir.path().join("tight.json");
    save_instance(&inst, &path).unwrap();
    assert_eq!(rb(&["solve", "--mode", "reduced", "--instance", path.to_str().unwrap()]), 2);
    assert_eq!(rb(&["solve", "--mode", "sequential", "--instance", path.to_str().unwrap()]), 2);
}

#[test]
fn other_commands() {
    let dir = tempfile::tempdir().unwrap();
    let inst = instance_file(dir.path());
    assert_eq!(rb(&["paths", "--instance", &inst, "--od", "1,5"]), 0);
    assert_eq!(rb(&["paths", "--instance", &inst, "--od", "1,5", "--epsilon", "1.0"]), 0);
    assert_eq!(rb(&["paths", "--instance", &inst, "--all"]), 0);
    assert_eq!(rb(&["paths", "--instance", &inst, "--od", "1;5"]), 3);
    assert_eq!(rb(&["paths", "--instance", &inst, "--od", "5,1"]), 2);
    for mode in ["integrated", "reduced", "path", "block"] {
        assert_eq!(rb(&["stats", "--instance", &inst, "--mode", mode]), 0);
        let out = dir.path().join(format!("{mode}.mps"));
        assert_eq!(rb(&["export", "--instance", &inst, "--mode", mode, "--out", out.to_str().unwrap()]), 0);
        assert!(out.exists());
    }
    assert_eq!(rb(&["oracle", "--instance", &inst]), 0);
    assert_eq!(rb(&["solve", "--mode", "integrated", "--instance", &inst, "--gap", "-1"]), 3);
}
