//! Black-box tests of the `qde` binary: exit codes, artifact layout,
//! fault injection through the operator container, and determinism across
//! thread counts.

use qde_core::{baker_unitary, TorusQuantization};
use std::path::Path;
use std::process::{Command, Output};

fn qde() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qde"))
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("binary runs");
    assert!(
        out.status.success(),
        "expected success, got {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn exit_code(cmd: &mut Command) -> i32 {
    cmd.output().expect("binary runs").status.code().expect("exit code")
}

fn preset(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("presets")
        .join(name)
        .display()
        .to_string()
}

#[test]
fn selfcheck_passes_and_reruns_byte_identically() {
    let first = run_ok(qde().arg("selfcheck"));
    let second = run_ok(qde().arg("selfcheck"));
    assert_eq!(first.stdout, second.stdout, "selfcheck reports differ");
    let text = String::from_utf8(first.stdout).unwrap();
    assert!(text.contains("0 failed"), "unexpected report:\n{text}");
    assert!(!text.contains("FAIL"), "unexpected failure in:\n{text}");
}

/// A container holding a slightly non-unitary map must fail the unitarity
/// check and exit 3.
#[test]
fn selfcheck_rejects_corrupted_map_container() {
    let b = baker_unitary(&TorusQuantization::new(8)).unwrap();
    let mut bytes = Vec::new();
    bytes.extend_from_slice(&8u32.to_le_bytes());
    bytes.extend_from_slice(&1u32.to_le_bytes());
    bytes.push(2u8);
    for i in 0..8 {
        for j in 0..8 {
            let z = b[(i, j)];
            let re = if i == 0 && j == 0 { z.re + 1e-3 } else { z.re };
            bytes.extend_from_slice(&re.to_le_bytes());
            bytes.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("corrupted.qpu");
    std::fs::write(&path, &bytes).unwrap();

    let out = qde()
        .arg("selfcheck")
        .arg("--map-file")
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "corrupted map should exit 3");
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("FAIL"), "report should flag the failure:\n{text}");
}

#[test]
fn run_writes_manifest_listing_existing_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(qde().args([
        "run",
        "--out-dir",
        dir.path().to_str().unwrap(),
        "--d",
        "8",
        "--t-max",
        "2",
        "--n-samples",
        "2",
        "--outputs",
        "s_trace,e_trace,husimi",
        "--grid-n",
        "8",
    ]));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap())
            .unwrap();
    let outputs = manifest["outputs"].as_object().unwrap();
    assert!(outputs.contains_key("s_trace"));
    assert!(outputs.contains_key("e_trace"));
    assert!(outputs.contains_key("husimi_momentum_0"));
    for (name, entry) in outputs {
        let path = entry["path"].as_str().unwrap();
        assert!(
            dir.path().join(path).exists(),
            "{name}: listed artifact {path} missing"
        );
    }
    assert!(manifest["inputs_hash"].as_str().unwrap().starts_with("sha256:"));
    assert!(manifest["timings_ms"]["total"].is_u64());
}

#[test]
fn config_shape_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap().to_string();
    // Baker needs even dimension.
    assert_eq!(
        exit_code(qde().args(["run", "--out-dir", &out_dir, "--d", "63"])),
        2
    );
    // Momentum partition needs k | d.
    assert_eq!(
        exit_code(qde().args(["run", "--out-dir", &out_dir, "--k", "3"])),
        2
    );
    // Unknown output name.
    assert_eq!(
        exit_code(qde().args(["run", "--out-dir", &out_dir, "--outputs", "nope"])),
        2
    );
    // Missing config file.
    assert_eq!(
        exit_code(qde().args(["run", "--out-dir", &out_dir, "--config", "/nonexistent.cfg"])),
        2
    );
    // Unknown key inside a config file.
    let bad = dir.path().join("bad.cfg");
    std::fs::write(&bad, "wavelength = 7\n").unwrap();
    assert_eq!(
        exit_code(qde().args(["run", "--out-dir", &out_dir, "--config", bad.to_str().unwrap()])),
        2
    );
    // Malformed QDE_THREADS.
    assert_eq!(
        exit_code(qde().arg("selfcheck").env("QDE_THREADS", "many")),
        2
    );
}

/// A word count beyond the Gram cap with no doubled-space fallback must
/// fail loudly, naming the cap, with exit 4.
#[test]
fn infeasible_word_count_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let out = qde()
        .args([
            "run",
            "--out-dir",
            dir.path().to_str().unwrap(),
            "--d",
            "64",
            "--t-max",
            "13",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4), "cap overflow should exit 4");
    let text = String::from_utf8(out.stderr).unwrap();
    assert!(
        text.contains("4096"),
        "error should name the limiting cap:\n{text}"
    );
}

#[test]
fn preset_with_overrides_echoes_resolved_config() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(qde().args([
        "run",
        "--config",
        &preset("fig1a.cfg"),
        "--out-dir",
        dir.path().to_str().unwrap(),
        "--t-max",
        "2",
        "--n-samples",
        "2",
    ]));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap())
            .unwrap();
    let config = manifest["config"].as_object().unwrap();
    assert_eq!(config["map"], "baker");
    assert_eq!(config["d"], "64");
    assert_eq!(config["t_max"], "2", "override should win over the file");
    assert_eq!(config["n_samples"], "2");
}

#[test]
fn artifacts_are_identical_across_thread_counts() {
    let args = |dir: &str| -> Vec<String> {
        [
            "run", "--out-dir", dir, "--map", "haar_random", "--d", "16", "--k", "2",
            "--t-max", "3", "--n-samples", "4", "--seed", "5", "--outputs",
            "s_trace,e_trace,husimi", "--grid-n", "8",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect()
    };
    let dir_one = tempfile::tempdir().unwrap();
    let dir_many = tempfile::tempdir().unwrap();
    run_ok(qde()
        .args(args(dir_one.path().to_str().unwrap()))
        .env("QDE_THREADS", "1"));
    run_ok(qde()
        .args(args(dir_many.path().to_str().unwrap()))
        .env("QDE_THREADS", "4"));

    let mut names: Vec<String> = std::fs::read_dir(dir_one.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".csv") || n.ends_with(".pgm"))
        .collect();
    names.sort();
    assert!(!names.is_empty());
    for name in names {
        let one = std::fs::read(dir_one.path().join(&name)).unwrap();
        let many = std::fs::read(dir_many.path().join(&name)).unwrap();
        assert_eq!(one, many, "{name} differs between thread counts");
    }
}
