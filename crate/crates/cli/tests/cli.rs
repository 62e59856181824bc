use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use metapop_hj::{Cell, Table};
use tempfile::TempDir;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_metapop-hj"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("spawn binary")
}

fn cfg(name: &str) -> String {
    configs().join(name).to_string_lossy().into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn ess_dimorphic_example() {
    let dir = TempDir::new().unwrap();
    let o = run(&["ess", "-c", &cfg("dimorphic.cfg")], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let t = Table::read(&dir.path().join("ess.csv")).unwrap();
    assert_eq!(t.get(0, "kind"), Some(&Cell::Text("dimorphic".into())));
    let z2 = t.num(0, "z2").unwrap();
    assert!((z2 - 0.968_245_836_551_854_2).abs() < 1e-10, "z2 = {z2}");
    assert!((t.num(0, "z1").unwrap() + z2).abs() < 1e-12);
}

#[test]
fn no_migration_is_rejected_with_exit_2() {
    let dir = TempDir::new().unwrap();
    let o = run(&["check", "-c", &cfg("monomorphic.cfg"), "--set", "m1=0", "--set", "m2=0"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("as:m"), "{}", stderr(&o));
    // the report is still written
    let t = Table::read(&dir.path().join("check.csv")).unwrap();
    assert_eq!(t.get(0, "violated"), Some(&Cell::Text("as:m".into())));
}

#[test]
fn missing_parameter_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let o = run(&["ess", "--set", "r1=1"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing parameter"));
}

#[test]
fn correctors_on_dimorphic_ess_exit_2() {
    let dir = TempDir::new().unwrap();
    let o = run(&["correctors", "-c", &cfg("dimorphic.cfg")], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("correctors"));
}

#[test]
fn non_convergence_exits_3() {
    let dir = TempDir::new().unwrap();
    let o = run(
        &["solve", "-c", &cfg("monomorphic.cfg"), "--eps", "0.1", "--n-pts", "801", "--max-steps", "10"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("stage `solve`"));
}

#[test]
fn bad_eps_list_rejected() {
    let dir = TempDir::new().unwrap();
    let o = run(&["moments", "-c", &cfg("monomorphic.cfg"), "--eps-list", "0.05,0.1"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("decreasing"));
}

#[test]
fn outputs_round_trip_in_both_formats() {
    for fmt in ["csv", "json"] {
        let dir = TempDir::new().unwrap();
        let c = cfg("asymmetric.cfg");
        let s = cfg("source_sink.cfg");
        let runs: [&[&str]; 4] = [
            &["check", "-c", &c],
            &["ess", "-c", &s],
            &["correctors", "-c", &c],
            &["moments", "-c", &c, "--eps-list", "0.1,0.05"],
        ];
        for args in runs {
            let o = run(&[args, &["--format", fmt]].concat(), dir.path());
            assert!(o.status.success(), "{args:?}: {}", stderr(&o));
        }
        for entry in fs::read_dir(dir.path()).unwrap() {
            let path = entry.unwrap().path();
            let text = fs::read_to_string(&path).unwrap();
            let t = Table::read(&path).unwrap();
            assert!(!t.rows.is_empty());
            let again = t.render(metapop_hj::Format::from_path(&path).unwrap()).unwrap();
            assert_eq!(again, text, "{} does not round-trip", path.display());
        }
    }
}

#[test]
fn moments_match_correctors() {
    let dir = TempDir::new().unwrap();
    let c = cfg("monomorphic.cfg");
    assert!(run(&["correctors", "-c", &c], dir.path()).status.success());
    assert!(run(&["moments", "-c", &c, "--eps", "0.05"], dir.path()).status.success());
    let cs = Table::read(&dir.path().join("correctors.csv")).unwrap();
    let m = Table::read(&dir.path().join("moments.csv")).unwrap();
    let a = cs.num(0, "a").unwrap();
    assert!((a - 0.288_675_134_594_812_9).abs() < 1e-9);
    // leading-order variance eps / A
    let var = m.num(0, "variance").unwrap();
    assert!((var - 0.05 / a).abs() < 1e-12);
}

#[test]
fn reruns_are_byte_identical() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let args = ["compare", "-c", &cfg("monomorphic.cfg"), "--eps-list", "0.2,0.1", "--n-pts", "801", "--half-width", "3"];
    for dir in [&a, &b] {
        let o = run(&args, dir.path());
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let x = fs::read(a.path().join("compare.csv")).unwrap();
    let y = fs::read(b.path().join("compare.csv")).unwrap();
    assert_eq!(x, y);
}

#[test]
fn solve_writes_conserving_densities() {
    let dir = TempDir::new().unwrap();
    let o = run(
        &["solve", "-c", &cfg("asymmetric.cfg"), "--eps", "0.2", "--n-pts", "801", "--half-width", "3", "--init", "-theta", "--format", "json"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let dens = Table::read(&dir.path().join("solution.json")).unwrap();
    let summary = Table::read(&dir.path().join("solve_summary.json")).unwrap();
    assert_eq!(dens.rows.len(), 801);
    let z: Vec<f64> = (0..801).map(|k| dens.num(k, "z").unwrap()).collect();
    let n1: Vec<f64> = (0..801).map(|k| dens.num(k, "n1").unwrap()).collect();
    let h = z[1] - z[0];
    let mass = h * (n1.iter().sum::<f64>() - 0.5 * (n1[0] + n1[800]));
    assert!((mass - summary.num(0, "big_n1").unwrap()).abs() < 1e-12);
    assert!(n1.iter().all(|&v| v >= 0.0));
}
