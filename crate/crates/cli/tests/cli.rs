use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn rotund(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rotund"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

const L2: &str = r#"{"family":"lp","p":2.0,"dim":2}"#;

#[test]
fn gauge_queries() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "g.json", r#"{"kind":"geometric","a":1.0,"alpha":0.5}"#);
    let eval = rotund(&["gauge", "--spec", "g.json", "--eval", "0.25"], dir.path());
    assert!(eval.status.success());
    assert_eq!(stdout(&eval).trim(), "0.5");
    let slope = rotund(&["gauge", "--spec", "g.json", "--mean-slope", "0.25"], dir.path());
    assert_eq!(stdout(&slope).trim(), "1.0");
    let dini = rotund(&["gauge", "--spec", "g.json", "--dini"], dir.path());
    let verdict: Value = serde_json::from_str(&stdout(&dini)).unwrap();
    assert_eq!(verdict["is_dini"], true);

    write(dir.path(), "li.json", r#"{"kind":"log_inverse","domain_upper":0.5}"#);
    let rejected = rotund(&["gauge", "--spec", "li.json", "--mean-slope", "0.25"], dir.path());
    assert_eq!(rejected.status.code(), Some(2));
}

#[test]
fn malformed_json_names_field_and_position() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "i.json",
        &format!(
            r#"{{"terminals":[[0,0],[1,0]],"weight":{{"kind":"constant","c":1.0}},"norm":{L2},"params":{{"rounds":1}}}}"#
        ),
    );
    let out = rotund(&["solve", "geodesic", "--instance", "i.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("params.rounds") && err.contains("line 1 column"), "{err}");

    write(dir.path(), "t.json", "{} extra");
    let out = rotund(&["gauge", "--spec", "t.json", "--eval", "0.1"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_file_and_bad_arguments_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = rotund(&["modulus", "--norm", "absent.json", "--out", "c.csv"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = rotund(&["gauge", "--spec", "g.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn geodesic_with_svg() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "i.json",
        &format!(r#"{{"terminals":[[0,0],[1,0.5]],"weight":{{"kind":"constant","c":1.0}},"norm":{L2}}}"#),
    );
    let out = rotund(
        &[
            "solve",
            "geodesic",
            "--instance",
            "i.json",
            "--out",
            "r.json",
            "--svg",
            "r.svg",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert!((r["objective"].as_f64().unwrap() - 1.25f64.sqrt()).abs() < 1e-6);
    assert!(std::fs::read_to_string(dir.path().join("r.svg"))
        .unwrap()
        .starts_with("<svg"));
}

#[test]
fn terminal_outside_domain_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "i.json",
        &format!(
            r#"{{"terminals":[[0,0],[2,0.5]],"weight":{{"kind":"constant","c":1.0}},"domain":{{"kind":"box","lo":[-1,-1],"hi":[1,1],"norm":{L2}}},"norm":{L2}}}"#
        ),
    );
    let out = rotund(&["solve", "geodesic", "--instance", "i.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("outside"));
}

#[test]
fn steiner_triangle() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "i.json",
        &format!(
            r#"{{"terminals":[[0,0],[1,0],[0.5,0.8660254037844386]],"weight":{{"kind":"constant","c":1.0}},"norm":{L2}}}"#
        ),
    );
    let out = rotund(&["solve", "steiner", "--instance", "i.json"], dir.path());
    let r: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!((r["objective"].as_f64().unwrap() - 3f64.sqrt()).abs() < 1e-4);
}

#[test]
fn quasihyp_vertical_pair() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "d.json",
        &format!(r#"{{"kind":"half_plane_window","height":40,"width":40,"norm":{L2}}}"#),
    );
    let out = rotund(
        &[
            "quasihyp",
            "--domain",
            "d.json",
            "--from",
            "0,1",
            "--to",
            "0,2.718281828459045",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let r: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!((r["distance"].as_f64().unwrap() - 1.0).abs() < 1e-3);
    assert!(r["geodesic"]["points"].is_array() && r["length_bound"].is_number() && r["eta"].is_number());
    assert!(r.get("regularity").is_none());

    let outside = rotund(
        &["quasihyp", "--domain", "d.json", "--from", "0,-1", "--to", "0,1"],
        dir.path(),
    );
    assert_eq!(outside.status.code(), Some(2));
}

#[test]
fn grid_oracle_needs_a_domain() {
    let dir = tempfile::tempdir().unwrap();
    let base = format!(r#""terminals":[[0.1,0.1],[0.5,0.2]],"weight":{{"kind":"constant","c":1.0}},"norm":{L2}"#);
    write(dir.path(), "free.json", &format!("{{{base}}}"));
    let out = rotund(&["oracle", "grid", "--instance", "free.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));

    write(
        dir.path(),
        "boxed.json",
        &format!(r#"{{{base},"domain":{{"kind":"box","lo":[0,0],"hi":[1,1],"norm":{L2}}}}}"#),
    );
    let out = rotund(
        &[
            "oracle",
            "grid",
            "--instance",
            "boxed.json",
            "--resolution",
            "128",
            "--neighborhood",
            "16",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let r: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let exact = 0.17f64.sqrt();
    let d = r["distance"].as_f64().unwrap();
    assert!(d >= exact - 1e-12 && d <= exact * r["metrication_factor"].as_f64().unwrap() + 1e-12);
}

#[test]
fn modulus_tables() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "n.json", L2);
    let out = rotund(&["modulus", "--norm", "n.json", "--out", "c.csv"], dir.path());
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("c.csv")).unwrap();
    assert!(csv.starts_with("eps,delta\n"));
    let at_one = csv.lines().find(|l| l.starts_with("1,")).expect("eps = 1 row");
    let delta: f64 = at_one.split(',').nth(1).unwrap().parse().unwrap();
    assert!((delta - (1.0 - 3f64.sqrt() / 2.0)).abs() < 1e-6);

    let out = rotund(
        &[
            "modulus", "--norm", "n.json", "--out", "l.csv", "--local", "--sweep", "4",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let local = std::fs::read_to_string(dir.path().join("l.csv")).unwrap();
    assert!(local.starts_with("theta,curvature,in_g,eps,delta\n"));
    assert_eq!(local.lines().count(), 1 + 4 * 8);
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "ok.json",
        &format!(r#"{{"checks":[{{"check":"excess_length","name":"ex","norm":{L2},"trials":50}}]}}"#),
    );
    let out = rotund(&["verify", "all", "--suite", "ok.json", "--report", "rep"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(dir.path().join("rep/summary.json").exists() && dir.path().join("rep/ex.csv").exists());

    write(
        dir.path(),
        "planted.json",
        &format!(
            r#"{{"checks":[{{"check":"height_bound_planted","name":"bump","norm":{L2},"radii":[0.25]}},{{"check":"almost_minimality_planted","name":"zig","norm":{L2},"radii":[0.125],"hubs":"center"}}]}}"#
        ),
    );
    let out = rotund(
        &["verify", "all", "--suite", "planted.json", "--report", "rep2"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));

    // a free end away from the terminals has density 1/2 and fails the dichotomy
    write(
        dir.path(),
        "leaf.json",
        &format!(
            r#"{{"checks":[{{"check":"density_dichotomy","name":"leaf","samples":4,"networks":[{{"kind":"explicit","vertices":[[0,0],[1,0]],"edges":[[0,1]],"terminals":[0],"norm":{L2}}}]}}]}}"#
        ),
    );
    let out = rotund(
        &["verify", "all", "--suite", "leaf.json", "--report", "rep4"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1), "{}", stdout(&out));
    assert!(stdout(&out).contains("FAIL leaf"));

    write(
        dir.path(),
        "dup.json",
        &format!(
            r#"{{"checks":[{{"check":"excess_length","name":"a","norm":{L2},"trials":1}},{{"check":"excess_length","name":"a","norm":{L2},"trials":1}}]}}"#
        ),
    );
    let out = rotund(
        &["verify", "all", "--suite", "dup.json", "--report", "rep3"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}
