//! End-to-end tests of the command-line runner.

use std::fs;
use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fvk-sim"))
}

fn write_config(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_slice(&fs::read(dir.join("manifest.json")).unwrap()).unwrap()
}

const SMALL_RUN: &str = "experiment = single_run\nmesh.h = 0.5\ntheta = 10\nsolver.max_iterations = 5\n";

#[test]
fn successful_run_writes_all_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "run.conf", SMALL_RUN);
    let out = tmp.path().join("out");
    let status = bin().args(["run", "-c"]).arg(&cfg).arg("--out").arg(&out).output().unwrap().status;
    assert_eq!(status.code(), Some(0));
    let m = manifest(&out);
    assert_eq!(m["status"], "ok");
    assert_eq!(m["experiment"], "single_run");
    assert_eq!(m["library_version"], fvk_core::VERSION);
    let csv = fs::read_to_string(out.join("run/iterations.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 6);
    assert!(csv.starts_with("k,tau,"));
    assert!(out.join("run/surface_final.vtk").exists());
    assert!(out.join("sweep.csv").exists());
    let listed: Vec<&str> = m["outputs"].as_array().unwrap().iter().map(|o| o["path"].as_str().unwrap()).collect();
    assert_eq!(listed, ["run/iterations.csv", "run/surface_final.vtk", "sweep.csv"]);
}

#[test]
fn config_errors_exit_with_one_and_name_the_line() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "bad.conf", "experiment = single_run\n# note\nmesh.h = zero\n");
    let out = bin().args(["run", "-c"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3, key `mesh.h`"), "{err}");

    let cfg = write_config(tmp.path(), "kind.conf", "experiment = cardboard\n");
    let out = bin().args(["single-run", "-c"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(1));

    let out = bin().args(["run", "-c"]).arg(tmp.path().join("missing.conf")).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn solver_abort_exits_with_two_and_is_recorded() {
    let tmp = tempfile::tempdir().unwrap();
    // one Newton iteration never meets the tolerance; halving τ hits the floor
    let cfg = write_config(
        tmp.path(),
        "abort.conf",
        "experiment = single_run\nmesh.h = 0.25\ntheta = 1000\nsolver.max_newton = 1\nsolver.tau_min = 0.1\n",
    );
    let out_dir = tmp.path().join("out");
    let out = bin().args(["run", "-c"]).arg(&cfg).arg("-o").arg(&out_dir).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    let m = manifest(&out_dir);
    assert_eq!(m["status"], "solver_abort");
    assert_eq!(m["aborts"][0]["iteration"], 1);
    assert!(m["aborts"][0]["message"].as_str().unwrap().contains("step size"));
    // the initial state is still written
    let csv = fs::read_to_string(out_dir.join("run/iterations.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn identical_configs_give_identical_output_hashes_for_any_thread_count() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "card.conf",
        "experiment = cardboard\nmesh.h = 0.25\nsolver.max_iterations = 12\noutput.snapshots = 5\n# comment only\n",
    );
    let mut hashes = Vec::new();
    for (i, threads) in ["1", "2", "2"].iter().enumerate() {
        let out = tmp.path().join(format!("out{i}"));
        let status = bin()
            .args(["cardboard", "--deterministic", "-j", threads, "-c"])
            .arg(&cfg)
            .arg("-o")
            .arg(&out)
            .output()
            .unwrap()
            .status;
        assert_eq!(status.code(), Some(0));
        let m = manifest(&out);
        assert_eq!(m["deterministic"], true);
        hashes.push((m["config_sha256"].clone(), m["outputs_sha256"].clone()));
    }
    assert!(hashes.windows(2).all(|w| w[0] == w[1]), "{hashes:?}");

    // comments and key order do not change the configuration hash
    let cfg2 = write_config(
        tmp.path(),
        "card2.conf",
        "output.snapshots = 5\nsolver.max_iterations = 12\nmesh.h = 0.25\nexperiment = cardboard\n",
    );
    let out = tmp.path().join("out_reordered");
    assert_eq!(bin().args(["run", "-c"]).arg(&cfg2).arg("-o").arg(&out).output().unwrap().status.code(), Some(0));
    assert_eq!(manifest(&out)["outputs_sha256"], hashes[0].1);
    assert_eq!(manifest(&out)["config_sha256"], hashes[0].0);
}

#[test]
fn overrides_and_check_print_the_canonical_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "run.conf", SMALL_RUN);
    let out = bin()
        .args(["check", "--set", "theta=2.5", "-c"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("theta = 2.5\n"));
    assert!(text.contains("mesh.h = 0.5\n"));
}
