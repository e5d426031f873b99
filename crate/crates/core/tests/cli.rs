//! Command-line front end, exercised through the compiled binary.

use std::path::Path;
use std::process::{Command, Output};

fn adaquant(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adaquant"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn field(text: &str, key: &str) -> String {
    text.lines()
        .find_map(|l| l.strip_prefix(key))
        .unwrap_or_else(|| panic!("{key} missing from\n{text}"))
        .trim()
        .to_string()
}

fn data_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn meta(text: &str, key: &str) -> String {
    let prefix = format!("# {key} = ");
    text.lines()
        .find_map(|l| l.strip_prefix(prefix.as_str()))
        .unwrap_or_else(|| panic!("{key} missing"))
        .to_string()
}

#[test]
fn design_reports_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let o = adaquant(
        dir.path(),
        &["design", "--noise", "gg", "--beta", "2", "--nbits", "1"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert_eq!(field(&text, "L_q"), "1.9612 dB");
    let table = dir.path().join("design_gg_b2_nb1.txt");
    assert!(table.exists());
    assert!(dir.path().join("design_gg_b2_nb1.manifest.json").exists());

    let again = adaquant(dir.path(), &["design", "--table", table.to_str().unwrap()]);
    assert!(again.status.success(), "{}", stderr(&again));
    assert_eq!(field(&stdout(&again), "I_q"), field(&text, "I_q"));
    assert_eq!(field(&stdout(&again), "eta"), field(&text, "eta"));
}

#[test]
fn design_examples() {
    let dir = tempfile::tempdir().unwrap();
    let laplace = adaquant(
        dir.path(),
        &["design", "--noise", "gg", "--beta", "1", "--nbits", "3"],
    );
    assert!(laplace.status.success(), "{}", stderr(&laplace));
    assert_eq!(field(&stdout(&laplace), "L_q"), "0.0000 dB");
    let cauchy = adaquant(dir.path(), &["design", "--noise", "st", "--beta", "1"]);
    assert_eq!(field(&stdout(&cauchy), "L_q"), "0.9121 dB");
}

#[test]
fn design_rejects_infinite_fisher_information() {
    let dir = tempfile::tempdir().unwrap();
    let o = adaquant(dir.path(), &["design", "--noise", "gg", "--beta", "0.5"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("Fisher"), "{}", stderr(&o));
}

#[test]
fn loss_table_for_one_noise() {
    let dir = tempfile::tempdir().unwrap();
    let o = adaquant(
        dir.path(),
        &[
            "loss-table",
            "--noise",
            "st",
            "--beta",
            "1",
            "--nbits",
            "1,2,3",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("loss_table.csv")).unwrap();
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 3);
    assert!(dir.path().join("loss_table.manifest.json").exists());
}

const SMALL_WIENER: &str = r#"
name = "small"
[signal]
kind = "wiener"
sigma_w = 0.01
[noise]
family = "st"
beta = 1.0
[estimator]
kind = "quantized"
n_bits = 2
[run]
replications = 300
horizon = 1000
burn_in = 100
seed = 5
[initial]
spread = 0.5
"#;

#[test]
fn simulate_writes_artifacts_and_is_thread_independent() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("small.toml");
    std::fs::write(&config, SMALL_WIENER).unwrap();
    let mut csvs = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.path().join(format!("t{threads}"));
        let o = adaquant(
            &out,
            &[
                "--threads",
                threads,
                "simulate",
                "--config",
                config.to_str().unwrap(),
            ],
        );
        assert!(o.status.success(), "{}", stderr(&o));
        for file in ["small.csv", "small.summary.json", "small.manifest.json"] {
            assert!(out.join(file).exists(), "{file}");
        }
        let summary: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out.join("small.summary.json")).unwrap())
                .unwrap();
        assert!(summary["wall_time_secs"].as_f64().is_some());
        let manifest: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(out.join("small.manifest.json")).unwrap(),
        )
        .unwrap();
        assert_eq!(manifest["threads"].as_u64(), Some(threads.parse().unwrap()));
        csvs.push(std::fs::read(out.join("small.csv")).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
    let text = String::from_utf8(csvs.remove(0)).unwrap();
    assert_eq!(data_rows(&text).len(), 1000);
    assert_eq!(meta(&text, "seed"), "5");
}

#[test]
fn simulate_fails_on_divergence_dominated_runs() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("runaway.toml");
    let text = SMALL_WIENER
        .replace("name = \"small\"", "name = \"runaway\"")
        .replace("spread = 0.5", "offset = 2e6");
    std::fs::write(&config, text).unwrap();
    let o = adaquant(
        dir.path(),
        &["simulate", "--config", config.to_str().unwrap()],
    );
    assert!(!o.status.success());
    assert!(
        stderr(&o).contains("replication 0") || stderr(&o).contains("diverged"),
        "{}",
        stderr(&o)
    );
}

#[test]
fn simulate_rejects_bad_configs() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    std::fs::write(
        &config,
        SMALL_WIENER.replace("burn_in = 100", "burn_in = 5000"),
    )
    .unwrap();
    let o = adaquant(
        dir.path(),
        &["simulate", "--config", config.to_str().unwrap()],
    );
    assert!(!o.status.success());
    let o = adaquant(
        dir.path(),
        &["--threads", "0", "loss-table", "--nbits", "1"],
    );
    assert!(!o.status.success());
}

#[test]
fn figures_at_small_scale() {
    let dir = tempfile::tempdir().unwrap();
    let o = adaquant(dir.path(), &["figures", "--scale", "0.001"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let read = |name: &str| std::fs::read_to_string(dir.path().join(name)).unwrap();

    assert_eq!(data_rows(&read("fig3.csv")).len(), 35);
    let fig6 = read("fig6.csv");
    let sigmas: std::collections::BTreeSet<String> =
        data_rows(&fig6).iter().map(|r| r[2].clone()).collect();
    assert_eq!(sigmas.len(), 2, "{sigmas:?}");
    let fig7 = read("fig7.csv");
    let header = fig7.lines().find(|l| !l.starts_with('#')).unwrap();
    assert!(header.contains("u,sigma_w,drift_gain"), "{header}");
    for row in data_rows(&fig7) {
        assert_eq!(row[3].parse::<f64>().unwrap(), 1e-4);
        assert_eq!(row[4].parse::<f64>().unwrap(), 1e-4);
        assert_eq!(row[5].parse::<f64>().unwrap(), 1e-5);
    }
    for name in ["fig4.csv", "fig5.csv", "figures.manifest.json"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
}
