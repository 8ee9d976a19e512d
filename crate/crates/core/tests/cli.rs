use std::path::Path;
use std::process::{Command, Output};

use mmwpt::harness::{parse_csv, parse_json};

fn mmwpt(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mmwpt"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

#[test]
fn fig1_csv_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = mmwpt(&["fig1", "--densities", "1e-6,1e-4", "--antennas", "16,64", "--trials", "200", "--out", "f1.csv"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("f1.csv")).unwrap();
    assert!(text.starts_with("# tool: \"mmwpt\""));
    let r = parse_csv(text.as_bytes()).unwrap();
    assert_eq!(r.rows.len(), 4);
    assert!(r.rows.iter().all(|row| row.analytic_lower_w <= row.analytic_total_w));
    assert!(text.lines().any(|l| l.starts_with("bs_density,bs_density_km2,")));
}

#[test]
fn same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let args = |name: &'static str| ["fig2", "--densities", "1e-4", "--antennas", "32", "--trials", "300", "--seed", "4", "--out", name];
    assert!(mmwpt(&args("a.csv"), dir.path()).status.success());
    assert!(mmwpt(&args("b.csv"), dir.path()).status.success());
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, std::fs::read(dir.path().join("b.csv")).unwrap());
}

#[test]
fn fig2_json_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let out = mmwpt(&["fig2", "--no-mc", "--json", "--densities", "1e-5,1e-3"], dir.path());
    assert!(out.status.success());
    let r = parse_json(out.stdout.as_slice()).unwrap();
    assert_eq!(r.rows.len(), 6);
    for m in [16, 32] {
        let lo: Vec<_> = r.rows.iter().filter(|x| x.m_bs == m).collect();
        let hi: Vec<_> = r.rows.iter().filter(|x| x.m_bs == 2 * m).collect();
        for (a, b) in lo.iter().zip(&hi) {
            assert!(b.rate_upper.unwrap() > a.rate_upper.unwrap());
        }
    }
}

#[test]
fn eval_text_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = mmwpt(&["eval", "--no-mc"], dir.path());
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("rate upper bound"));
    let out = mmwpt(&["eval", "--json", "--trials", "400", "--densities", "1e-3", "--antennas", "64"], dir.path());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["params"]["m_bs"], 64);
    assert!(v["montecarlo"]["energy"]["total_w"].as_f64().unwrap() > 0.0);
}

#[test]
fn selftest_passes_on_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let out = mmwpt(&["selftest", "--trials", "5000"], dir.path());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["passed"], true, "{}", String::from_utf8_lossy(&out.stdout));
    assert!(out.status.success());
}

#[test]
fn negative_beta_fails_selftest() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "beta_los = -1e-7\n").unwrap();
    let out = mmwpt(&["selftest", "--config", "bad.toml"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["passed"], false);
    assert!(v.to_string().contains("beta_los"));
}

#[test]
fn bad_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), "pmm_dbm = 43\npmm_watts = 20\n").unwrap();
    let out = mmwpt(&["fig1", "--no-mc", "--config", "c.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("pmm_watts"));
}

#[test]
fn config_file_is_echoed_in_metadata() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), "pmm_dbm = 40\nm_bs = 16\ninterferer_model = \"per_cell\"\n").unwrap();
    let out = mmwpt(&["fig1", "--no-mc", "--densities", "1e-4", "--antennas", "16", "--config", "c.toml"], dir.path());
    assert!(out.status.success());
    let r = parse_csv(out.stdout.as_slice()).unwrap();
    assert!((r.metadata.params.pmm_watts - 10.0).abs() < 1e-12);
    assert_eq!(r.metadata.params.interferer_model, mmwpt::params::InterfererModel::PerCell);
}
