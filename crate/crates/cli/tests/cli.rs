use std::path::Path;
use std::process::{Command, Output};

use groverlab::metrics::{read_csv, ExperimentRecord, RECORD_COLUMNS};
use groverlab::transpile::Backend;

fn groverlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_groverlab")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn theory_values() {
    for (plan, n, want) in [("D4D4M4", "4", "0.9084"), ("G2D3M3", "5", "0.1953"), ("D2M2", "2", "1.0000")] {
        let o = groverlab(&["theory", plan, "--n", n]);
        assert!(o.status.success());
        assert!(stdout(&o).contains(&format!("p_theo         {want}")), "{plan}: {}", stdout(&o));
    }
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["theory", "D4Q4", "--n", "4"][..],
        &["optimize", "--n", "4", "--max-oracles", "0"],
        &["optimize", "--n", "4", "--stages", "3"],
        &["run", "D3M3"],
        &["run", "D3M3", "--n", "3", "--fixture", "mine"],
        &["frobnicate"],
    ] {
        let o = groverlab(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
    let o = groverlab(&["theory", "D4Q4", "--n", "4"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("position 2"));
}

#[test]
fn runtime_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.conf");
    let o = groverlab(&["run", "D3M3", "--n", "3", "--backend", missing.to_str().unwrap(), "--trials", "1"]);
    assert_eq!(o.status.code(), Some(1));
    // Five data qubits plus an ancilla do not fit on a five-qubit device.
    let o = groverlab(&["run", "D5M5", "--n", "5", "--backend", "vigo", "--trials", "1", "--shots", "16"]);
    assert_eq!(o.status.code(), Some(1));
    let noise = dir.path().join("bad.noise");
    std::fs::write(&noise, "cx_depolarizing = lots\n").unwrap();
    let o = groverlab(&["run", "D3M3", "--n", "3", "--trials", "1", "--noise", noise.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

fn run_csv(dir: &Path, name: &str, extra: &[&str]) -> Vec<u8> {
    let path = dir.join(name);
    let mut args = vec!["run", "D2M2|D2M2", "--n", "4", "--trials", "4", "--shots", "1024", "--seed", "11", "--csv"];
    args.push(path.to_str().unwrap());
    args.extend_from_slice(extra);
    let o = groverlab(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    std::fs::read(path).unwrap()
}

#[test]
fn seeded_runs_write_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let a = run_csv(dir.path(), "a.csv", &[]);
    let b = run_csv(dir.path(), "b.csv", &[]);
    assert_eq!(a, b);
    let header = String::from_utf8(a.clone()).unwrap();
    assert_eq!(header.lines().next().unwrap(), RECORD_COLUMNS.join(","));
    let rows: Vec<ExperimentRecord> = read_csv(&a[..]).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].circuit_name, "D2M2|D2M2");
    let c = run_csv(dir.path(), "c.csv", &["--chained"]);
    assert_ne!(a, c);
}

#[test]
fn sweep_emits_one_row_per_catalog_circuit() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let o = groverlab(&["sweep", "--n", "3", "--trials", "2", "--shots", "256", "--csv", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("logistic"));
    let rows: Vec<ExperimentRecord> = read_csv(std::fs::File::open(&path).unwrap()).unwrap();
    assert_eq!(rows.len(), 6);
}

#[test]
fn optimize_reports_winner_and_ranking() {
    let o = groverlab(&["optimize", "--n", "4", "--stages", "1", "--max-oracles", "1", "--force-global"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("best D4M4 "));
    let o = groverlab(&["optimize", "--n", "3", "--backend", "athens", "--max-oracles", "2", "--stages", "2", "--top", "3"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 5, "{text}");
}

#[test]
fn random_fixture_and_run_output() {
    let o = groverlab(&["run", "G1D2M2", "--n", "3", "--fixture", "random", "--trials", "3", "--shots", "512", "--seed", "5"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("selectivity"));
    assert!(text.contains("classical one-oracle baseline 0.2500"));
}

#[test]
fn backend_and_circuit_commands() {
    let o = groverlab(&["backend", "athens"]);
    assert!(o.status.success());
    let parsed = Backend::from_text(&stdout(&o)).unwrap();
    assert_eq!(parsed, Backend::builtin("athens").unwrap());

    let o = groverlab(&["circuit", "D3M1|D2M2", "--n", "3", "--target", "101", "--stage", "1"]);
    assert!(o.status.success());
    let o = groverlab(&["circuit", "D3M3", "--n", "3", "--target", "101", "--backend", "vigo"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("# D3M3 on vigo: depth "));
    let o = groverlab(&["circuit", "D3M3", "--n", "3", "--target", "101", "--stage", "1"]);
    assert_eq!(o.status.code(), Some(2));
}
