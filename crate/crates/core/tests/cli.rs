use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn pppt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pppt")).args(args).output().expect("binary runs")
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn hash_line(o: &Output) -> String {
    stdout(o).lines().find(|l| l.starts_with("log hash")).expect("hash printed").to_string()
}

#[test]
fn run_writes_artifacts_into_a_fresh_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("nested/out");
    let o = pppt(&["run", scenario("chain7.toml").to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["events.ndjson", "metrics.csv", "manifest.json"] {
        assert!(out.join(f).is_file(), "{f} missing");
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert!(manifest["runs"].as_array().is_some_and(|r| r.len() == 1));
}

#[test]
fn same_seed_same_hash_and_seed_flag_matters() {
    let dir = tempfile::tempdir().unwrap();
    let file = scenario("chain7_drop_attack.toml");
    let go = |sub: &str, seed: &str| {
        let out = dir.path().join(sub);
        pppt(&["run", file.to_str().unwrap(), "--seed", seed, "--out", out.to_str().unwrap()])
    };
    let (a, b, c) = (go("a", "5"), go("b", "5"), go("c", "6"));
    assert_eq!(hash_line(&a), hash_line(&b));
    assert_ne!(hash_line(&a), hash_line(&c));
    assert_eq!(
        fs::read(dir.path().join("a/events.ndjson")).unwrap(),
        fs::read(dir.path().join("b/events.ndjson")).unwrap()
    );
}

#[test]
fn missing_topology_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "scheme = \"pppt\"\n").unwrap();
    let o = pppt(&["run", bad.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("topology"));
}

#[test]
fn unknown_keys_and_bad_rates_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    for body in [
        "bogus = 1\n[topology]\nkind = \"sample\"\n",
        "[topology]\nkind = \"sample\"\n[adversary]\nmalicious_node = 3\nmalicious_drop_rate = 1.5\n",
    ] {
        let bad = dir.path().join("bad.toml");
        fs::write(&bad, body).unwrap();
        let o = pppt(&["run", bad.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{body}");
    }
}

#[test]
fn unknown_preset_names_the_known_ones() {
    let dir = tempfile::tempdir().unwrap();
    let o = pppt(&["grid", "fig99", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("fig11"));
}

#[test]
fn grid_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = pppt(&["grid", "fig11", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("fig11.csv")).unwrap();
    assert!(csv.starts_with("scenario_id,scheme,hops,interval_s,metric,value"));
    assert!(csv.lines().any(|l| l.contains(",pppt,7,") && l.ends_with(",provenance_bytes,2.0")));
    assert!(dir.path().join("manifest.json").is_file());
}

#[test]
fn verify_agrees_on_benign_and_stripped_logs() {
    let dir = tempfile::tempdir().unwrap();
    for (file, label) in [("chain7.toml", "verified"), ("sample_strip.toml", "provenance stripped")] {
        let out = dir.path().join(file);
        assert!(pppt(&["run", scenario(file).to_str().unwrap(), "--out", out.to_str().unwrap()]).status.success());
        let o = pppt(&["verify", out.join("events.ndjson").to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(stdout(&o).contains(label), "{}", stdout(&o));
    }
}

#[test]
fn verify_rejects_a_truncated_log() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    assert!(pppt(&["run", scenario("chain7.toml").to_str().unwrap(), "--out", out.to_str().unwrap()]).status.success());
    let text = fs::read_to_string(out.join("events.ndjson")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    let cut = dir.path().join("cut.ndjson");
    fs::write(&cut, lines[..lines.len() / 2].join("\n")).unwrap();
    let o = pppt(&["verify", cut.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!String::from_utf8_lossy(&o.stderr).is_empty());
}

#[test]
fn verify_catches_a_doctored_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let file = scenario("sample_strip.toml");
    assert!(pppt(&["run", file.to_str().unwrap(), "--out", out.to_str().unwrap()]).status.success());
    let text = fs::read_to_string(out.join("events.ndjson")).unwrap();
    let doctored = text.replacen("\"verdict\":\"stripped\"", "\"verdict\":\"verified\"", 1);
    assert_ne!(doctored, text, "log should contain a stripped verdict");
    let path = dir.path().join("doctored.ndjson");
    fs::write(&path, doctored).unwrap();
    let o = pppt(&["verify", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn presets_lists_every_grid() {
    let o = pppt(&["presets"]);
    assert!(o.status.success());
    let s = stdout(&o);
    for name in ["fig7", "fig8", "fig9", "fig11", "fig12", "fig13", "fig14"] {
        assert!(s.contains(name), "{name} missing");
    }
}
