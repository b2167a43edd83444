use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_hybridcache");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

fn rows(csv_text: &str) -> Vec<csv::StringRecord> {
    csv::Reader::from_reader(csv_text.as_bytes()).records().map(|r| r.unwrap()).collect()
}

const SWEEP: &str = "[experiment]\nn_trials = 400\n[sweep]\naxis = \"zipf_exponent\"\nvalues = [0.1, 0.8, 2.0]\n";

#[test]
fn compare_yields_one_row_per_point_and_strategy() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", SWEEP);
    let out = run(&["compare", "--config", &cfg]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "sweep_value,strategy,analytic_asp,simulated_asp,ci_halfwidth,p_mu_w,optimizer_iterations,wall_time_s"
    );
    let rows = rows(&text);
    assert_eq!(rows.len(), 12);
    for chunk in rows.chunks(4) {
        let labels: Vec<_> = chunk.iter().map(|r| &r[1]).collect();
        assert_eq!(labels, ["PROPOSED", "MC", "UC", "RC"]);
        let asp: Vec<f64> = chunk.iter().map(|r| r[2].parse().unwrap()).collect();
        for (k, &b) in asp[1..].iter().enumerate() {
            assert!(asp[0] >= b - 1e-9, "υ={} PROPOSED {} < {} {}", &chunk[0][0], asp[0], labels[k + 1], b);
        }
        for r in chunk {
            let sim: f64 = r[3].parse().unwrap();
            assert!((0.0..=1.0).contains(&sim));
            assert!(r[7].is_empty());
        }
        assert!(!chunk[0][6].is_empty() && chunk[1][6].is_empty());
    }
}

#[test]
fn same_seed_gives_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", SWEEP);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for (path, workers) in [(&a, "1"), (&b, "3")] {
        let out = run(&["asp-sim", "--config", &cfg, "--seed", "9", "--workers", workers, "--out", path.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let other = run(&["asp-sim", "--config", &cfg, "--seed", "10"]);
    assert_ne!(other.stdout, std::fs::read(&a).unwrap());
}

#[test]
fn associate_without_mmwave_tier() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "[network]\nlambda_mm = 0.0\n");
    let out = run(&["associate", "--config", &cfg]);
    assert!(out.status.success());
    let rows = rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][5].parse::<f64>().unwrap(), 1.0);
}

#[test]
fn effective_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let text = "[network]\nsnr_mm_db = 50.0\nnoise_mu_db = -100.0\nmain_gain_db = 12.0\nbias_mu_db = 3.0\n\
                [experiment]\nregime = \"GENERAL\"\nserving_distance = \"contact_averaged\"\n\
                [sweep]\naxis = \"lambda_mu\"\nvalues = [1e-6, 5e-6, 1e-5]\n";
    let cfg = write(dir.path(), "c.toml", text);
    let first = run(&["--config", &cfg, "--seed", "42", "--dump-effective-config"]);
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));
    let dumped = String::from_utf8(first.stdout).unwrap();
    assert!(dumped.contains("seed = 42"));
    assert!(!dumped.contains("_db"));
    let again = write(dir.path(), "d.toml", &dumped);
    let second = run(&["--config", &again, "--dump-effective-config"]);
    assert_eq!(dumped, String::from_utf8(second.stdout).unwrap());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["compare", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(run(&[]).status.code(), Some(1));

    let typo = write(dir.path(), "typo.toml", "[network]\nbeta = 0.01\nlamda_mu = 1e-5\n");
    let out = run(&["associate", "--config", &typo]);
    assert_eq!(out.status.code(), Some(1));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("line 3") && msg.contains("lamda_mu"), "{msg}");

    let big = write(dir.path(), "big.toml", "[network]\ncache_mm = 11\n");
    let out = run(&["compare", "--config", &big]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());

    // A window holding a fraction of a station leaves the validation far off.
    let tiny = write(dir.path(), "tiny.toml", "[experiment]\nn_trials = 300\n[simulation]\nradius = 20.0\n");
    assert_eq!(run(&["validate", "--config", &tiny]).status.code(), Some(2));
}

#[test]
fn optimizer_commands_write_policies() {
    let dir = tempfile::tempdir().unwrap();
    let policy = dir.path().join("p.json");
    let out = run(&["optimize-nl", "--policy-out", policy.to_str().unwrap(), "--timing"]);
    assert!(out.status.success());
    let rows = rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(rows.len(), 1);
    assert_eq!(&rows[0][1], "PROPOSED");
    assert!(rows[0][7].parse::<f64>().unwrap() >= 0.0);
    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(&policy).unwrap()).unwrap();
    let p_mm: Vec<f64> = serde_json::from_value(json[0]["policy"]["p_mm"].clone()).unwrap();
    assert!((p_mm.iter().sum::<f64>() - 5.0).abs() < 1e-6);
}

#[test]
fn realization_dump_has_one_line_per_trial() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "[experiment]\nn_trials = 25\nstrategies = [\"UC\"]\n");
    let dump = dir.path().join("dump");
    let out = run(&["asp-sim", "--config", &cfg, "--dump-realizations", dump.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(dump.join("point0_UC.jsonl")).unwrap();
    assert_eq!(text.lines().count(), 25);
    let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert!(first["realization"]["mm"].is_array());
}
