use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use vocdm::harness::record::read_csv;
use vocdm::harness::{ExperimentConfig, ExperimentKind};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_vocdm"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

#[test]
fn verify_passes_and_reports_residuals() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("verify.json");
    let o = run(&["verify", "--seed", "3", "--out", out.to_str().unwrap(), "--format", "json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&fs::read(&out).unwrap()).unwrap();
    let checks = v["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 7);
    assert!(checks.iter().all(|c| c["passed"] == true && c["residual"].is_number()));
    assert!(String::from_utf8_lossy(&o.stderr).contains("PASS commutation_identity"));
}

#[test]
fn papr_table_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("t.toml");
    fs::write(&cfg, "[papr]\nconstellations = [\"qpsk\"]\nn_values = [3, 5]\n").unwrap();
    let o = run(&["papr-table", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let recs = read_csv(o.stdout.as_slice()).unwrap();
    assert_eq!(recs.len(), 4);
    assert!((recs[0].y_value.unwrap() - 2.82).abs() < 0.01);
    assert!((recs[2].y_value.unwrap() - 4.44).abs() < 0.01);
}

#[test]
fn worker_count_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("ber.toml");
    fs::write(
        &cfg,
        "constellation = \"bpsk\"\n[[schemes]]\nm = 2\nn = 3\n[[schemes]]\nm = 1\nn = 6\n[ber]\nsnr_db = [4.0, 8.0]\nblocks = 300\n",
    )
    .unwrap();
    let mut outputs = Vec::new();
    for workers in ["1", "4", "8"] {
        let out = dir.path().join(format!("ber_{workers}.csv"));
        let o = run(&[
            "ber",
            "--config",
            cfg.to_str().unwrap(),
            "--workers",
            workers,
            "--seed",
            "42",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        outputs.push(fs::read(&out).unwrap());
    }
    assert!(outputs.iter().all(|b| *b == outputs[0]));
    let recs = read_csv(outputs[0].as_slice()).unwrap();
    assert_eq!(recs.len(), 4);
    assert!(recs.iter().all(|r| r.seed == 42 && r.trials == 300));
}

#[test]
fn config_errors_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("bad_key.toml", "nonsense = 1\n"),
        ("empty_snr.toml", "[ber]\nsnr_db = []\n"),
        ("mixed_k.toml", "[[schemes]]\nm = 2\nn = 4\n[[schemes]]\nm = 3\nn = 4\n"),
        ("wrong_kind.toml", "experiment = \"papr-table\"\n"),
    ];
    for (name, text) in cases {
        let path = dir.path().join(name);
        fs::write(&path, text).unwrap();
        let o = run(&["ber", "--config", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{name}");
        assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"), "{name}");
    }
    let o = run(&["ber", "--config", "/nonexistent/config.toml"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn over_budget_scheme_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("big.toml");
    fs::write(&path, "[[schemes]]\nm = 2\nn = 8\n[ber]\nbudget = 1000\n").unwrap();
    let o = run(&["ber", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("VOCDM(2,8)") && err.contains("MMSE"), "{err}");
}

#[test]
fn shipped_configs_parse() {
    let mut seen = 0;
    for entry in fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            ExperimentConfig::from_path(&path, None).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            seen += 1;
        }
    }
    assert!(seen >= 4);
    let div = ExperimentConfig::from_path(&configs_dir().join("diversity_scan.toml"), None).unwrap();
    assert_eq!(div.experiment, ExperimentKind::DiversityScan);
    assert_eq!(div.channel.grid(12).unwrap(), (1, 1));
}

#[test]
fn diversity_scan_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("d.toml");
    fs::write(&cfg, "[diversity]\nblocks = 2\nsamples = 20\n").unwrap();
    let o = run(&["diversity-scan", "--config", cfg.to_str().unwrap(), "--format", "json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let recs = v.as_array().unwrap();
    assert_eq!(recs.len(), 3 * 4);
    assert_eq!(recs[0]["y_name"], "order_set_size");
}
