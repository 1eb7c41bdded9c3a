use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn ddgp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ddgp"))
        .args(args)
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn example1_data(dir: &Path) -> PathBuf {
    let path = dir.join("ex1.csv");
    let o = ddgp(&[
        "simulate",
        "--model",
        "data/example1.toml",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    path
}

#[test]
fn check_exit_codes_follow_the_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let data = example1_data(dir.path());
    let data = data.to_str().unwrap();
    let cert = dir.path().join("cert.toml");
    let pass = ddgp(&[
        "check",
        "--data",
        data,
        "--model",
        "data/example1.toml",
        "--out",
        cert.to_str().unwrap(),
    ]);
    assert_eq!(code(&pass), 0);
    assert!(std::fs::read_to_string(&cert)
        .unwrap()
        .contains("verdict = \"dissipative\""));
    let fail = ddgp(&[
        "check",
        "--data",
        data,
        "--model",
        "data/example1.toml",
        "--gamma",
        "0.5",
    ]);
    assert_eq!(code(&fail), 1);
    assert!(stdout(&fail).contains("not-certified"));
}

#[test]
fn prefix_below_policy_is_a_precondition_failure() {
    let dir = tempfile::tempdir().unwrap();
    let data = example1_data(dir.path());
    let o = ddgp(&[
        "check",
        "--data",
        data.to_str().unwrap(),
        "--model",
        "data/example1.toml",
        "--nu",
        "1",
    ]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("nu >= max("));
}

#[test]
fn mismatched_data_names_the_block() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("two.csv");
    let mut text = String::from("k,u1,u2,y1\n");
    for k in 0..40 {
        text.push_str(&format!(
            "{k},{},{},{}\n",
            (k as f64).sin(),
            (k as f64 * 0.7).cos(),
            k % 3
        ));
    }
    std::fs::write(&path, text).unwrap();
    let o = ddgp(&[
        "check",
        "--data",
        path.to_str().unwrap(),
        "--model",
        "data/example1.toml",
    ]);
    assert_eq!(code(&o), 4);
    assert!(String::from_utf8_lossy(&o.stderr).contains("model outputs"));
}

#[test]
fn parse_errors_and_missing_files() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[plant]\ntype = \"tf\"\nnum = [[[1.0").unwrap();
    let data = example1_data(dir.path());
    let o = ddgp(&[
        "check",
        "--data",
        data.to_str().unwrap(),
        "--model",
        bad.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
    assert_eq!(
        code(&ddgp(&[
            "diagnose",
            "--data",
            "missing.csv",
            "--L",
            "3",
            "--nx",
            "1"
        ])),
        2
    );
    assert_eq!(code(&ddgp(&["reproduce", "unknown"])), 2);
}

#[test]
fn diagnose_reports_rank_condition() {
    let dir = tempfile::tempdir().unwrap();
    let data = example1_data(dir.path());
    let ok = ddgp(&[
        "diagnose",
        "--data",
        data.to_str().unwrap(),
        "--L",
        "20",
        "--nx",
        "1",
    ]);
    assert_eq!(code(&ok), 0);
    assert!(stdout(&ok).contains("rank condition satisfied"));

    let zero = dir.path().join("zero.csv");
    let text: String = std::iter::once("k,u1,y1\n".to_string())
        .chain((0..50).map(|k| format!("{k},0,0\n")))
        .collect();
    std::fs::write(&zero, text).unwrap();
    let bad = ddgp(&[
        "diagnose",
        "--data",
        zero.to_str().unwrap(),
        "--L",
        "3",
        "--nx",
        "1",
    ]);
    assert_eq!(code(&bad), 3);
    assert!(stdout(&bad).contains("violated"));
}

#[test]
fn gain_sweep_matches_reproduction_report() {
    let dir = tempfile::tempdir().unwrap();
    let data = example1_data(dir.path());
    let sweep = ddgp(&[
        "gain",
        "--data",
        data.to_str().unwrap(),
        "--model",
        "data/example1.toml",
        "--with-oracle",
    ]);
    assert_eq!(code(&sweep), 0);
    let out = dir.path().join("rep");
    let rep = ddgp(&["reproduce", "example1", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&rep), 0);
    assert!(stdout(&rep).contains("H-infinity ≈ 1.0428 reproduced"));
    assert_eq!(
        stdout(&sweep),
        std::fs::read_to_string(out.join("example1.csv")).unwrap()
    );

    let single = ddgp(&[
        "gain",
        "--data",
        data.to_str().unwrap(),
        "--model",
        "data/example1.toml",
        "--L",
        "10",
    ]);
    let text = stdout(&single);
    assert_eq!(text.lines().next(), Some("L,gamma_dd"));
    assert_eq!(text.lines().count(), 2);
}

#[test]
fn unstable_loop_reports_infinite_gain() {
    let dir = tempfile::tempdir().unwrap();
    let data = example1_data(dir.path());
    // u = 0.8 y + w, z = y places the closed-loop pole at 4.5.
    let model = dir.path().join("unstable.toml");
    std::fs::write(
        &model,
        r#"type = "tf"
num = [[[0.8], [1.0]], [[1.0], [0.0]]]
den = [[[1.0], [1.0]], [[1.0], [1.0]]]
outputs = [{ name = "u", dim = 1 }, { name = "z", dim = 1 }]
inputs = [{ name = "y", dim = 1 }, { name = "w", dim = 1 }]
"#,
    )
    .unwrap();
    let o = ddgp(&[
        "gain",
        "--data",
        data.to_str().unwrap(),
        "--model",
        model.to_str().unwrap(),
        "--L",
        "30",
        "--nu",
        "2",
        "--lag-bound",
        "1",
    ]);
    assert_eq!(code(&o), 1, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("30,inf"));
}

#[test]
fn reproduce_is_deterministic() {
    let a = ddgp(&["reproduce", "fig1", "--seed", "3"]);
    let b = ddgp(&["reproduce", "fig1", "--seed", "3"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).contains("crossover confirmed"));
}

#[test]
fn every_subcommand_has_help() {
    for sub in ["diagnose", "check", "gain", "reproduce", "simulate"] {
        let o = ddgp(&[sub, "--help"]);
        assert_eq!(code(&o), 0);
        assert!(stdout(&o).contains("Usage"));
    }
}
