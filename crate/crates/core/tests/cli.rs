use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_biham-euler-so4"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

#[test]
fn verify_writes_report_and_passes() {
    let dir = tempfile::tempdir().unwrap();
    let rep = path(dir.path(), "r.json");
    let o = run(&[
        "verify", "--mu", "1,2,3", "--points", "10", "--seed", "42", "--report", &rep,
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("overall: Pass"));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&rep).unwrap()).unwrap();
    assert_eq!(v["schema"], "biham-euler-so4/v1");
    assert_eq!(v["overall"], "pass");
}

#[test]
fn verify_rejects_degenerate_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "verify",
        "--mu",
        "1,-1,3",
        "--report",
        &path(dir.path(), "r.json"),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("degenerate constant eigenvalue"));
}

#[test]
fn verify_asymmetric_notes_skips() {
    let dir = tempfile::tempdir().unwrap();
    let rep = path(dir.path(), "r.json");
    let o = run(&[
        "verify", "--mu", "1,2,3,4", "--points", "5", "--report", &rep,
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&rep).unwrap();
    assert!(text.contains("\"skipped\"") && text.contains("requires mu4 = mu3"));
}

#[test]
fn verify_mutation_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "verify",
        "--mu",
        "1,2,3",
        "--points",
        "5",
        "--mutation",
        "h2-last-term-sign",
        "--report",
        &path(dir.path(), "r.json"),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let rep = path(dir.path(), "r.json");
    for args in [
        vec![
            "verify",
            "--mu",
            "1,2,3",
            "--report",
            rep.as_str(),
            "--bogus",
        ],
        vec!["verify", "--mu", "1,2", "--report", rep.as_str()],
        vec!["verify", "--mu", "1,x,3", "--report", rep.as_str()],
        vec![
            "verify",
            "--mu",
            "1,2,3",
            "--points",
            "0",
            "--report",
            rep.as_str(),
        ],
        vec![
            "verify",
            "--mu",
            "1,2,3",
            "--mutation",
            "nope",
            "--report",
            rep.as_str(),
        ],
        vec!["frobnicate"],
    ] {
        assert_eq!(run(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn integrate_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = path(dir.path(), "t.csv");
    let o = run(&[
        "integrate",
        "--mu",
        "10,1,2",
        "--m0",
        "0.3,-0.7,0.5,0.9,-0.2,0.6",
        "--t-end",
        "1",
        "--every",
        "10",
        "--out",
        &csv,
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,m12,m13,m14,m23,m24,m34,H0,C,HE,KE,zeta1"
    );
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 101);
    assert!(rows.iter().all(|r| r.len() == 12));
    assert!(rows.windows(2).all(|w| w[0][0] < w[1][0]));
    let last = stdout(&o).lines().last().unwrap().to_string();
    assert!(
        last.starts_with("max relative drift") && last.contains("HE="),
        "{last}"
    );
}

#[test]
fn integrate_from_rest_is_stationary() {
    let dir = tempfile::tempdir().unwrap();
    let csv = path(dir.path(), "t.csv");
    let o = run(&[
        "integrate",
        "--mu",
        "10,1,2",
        "--m0",
        "0,0,0,0,0,0",
        "--t-end",
        "0.5",
        "--out",
        &csv,
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    let states: Vec<&str> = text
        .lines()
        .skip(1)
        .map(|l| l.split_once(',').unwrap().1)
        .collect();
    assert!(states.windows(2).all(|w| w[0] == w[1]));
    assert!(stdout(&o).lines().last().unwrap().contains("HE=0.000e0"));
}

#[test]
fn integrate_rejects_zero_step() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "integrate",
        "--mu",
        "10,1,2",
        "--m0",
        "0,0,0,0,0,0",
        "--dt",
        "0",
        "--out",
        &path(dir.path(), "t.csv"),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn dn_prints_coordinates_and_json() {
    let args = [
        "dn",
        "--mu",
        "1,2,3",
        "--leaf",
        "1,0,0.3,0,2,0,-0.4,0.1",
        "--h0",
        "1,0",
        "--c2",
        "0.5,0",
    ];
    let o = run(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("lambda2 = +6.5000000000000000e0"));
    let mut j = args.to_vec();
    j.push("--json");
    let o = run(&j);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["chart"]["lambda2"][0], 6.5);
    for m in ["p_bracket_residual", "q_bracket_residual"] {
        for row in v[m].as_array().unwrap() {
            for x in row.as_array().unwrap() {
                assert!(x.as_f64().unwrap() <= 1e-10);
            }
        }
    }
}

#[test]
fn dn_reports_named_guard() {
    let o = run(&[
        "dn",
        "--mu",
        "1,2,3",
        "--leaf",
        "1,0,0.3,0,1,0,-0.4,0.1",
        "--h0",
        "1,0",
        "--c2",
        "0.5,0",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("separation chart degenerate"));
}

#[test]
fn separation_worked_point_and_guard() {
    let o = run(&[
        "separation",
        "--mu",
        "1,2,3",
        "--uv",
        "1,0,1,0,0,0,1,0,1,0,0,0",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("Phi1: raw 0.000e0"));
    let o = run(&[
        "separation",
        "--mu",
        "1,2,3",
        "--uv",
        "0,0,1,0,0,0,1,0,1,0,0,0",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&[
        "separation",
        "--mu",
        "1,2,3",
        "--uv",
        "0.3,0.2,-0.5,0.1,0.7,0,0.9,-0.4,0.2,0.6,-0.3,0.5",
    ]);
    assert_eq!(o.status.code(), Some(0));
    for line in stdout(&o).lines() {
        let norm: f64 = line.rsplit(' ').next().unwrap().parse().unwrap();
        assert!(norm <= 1e-9, "{line}");
    }
}
