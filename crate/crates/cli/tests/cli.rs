use std::process::{Command, Output as ProcOutput};

use potapprox_cli::{CombOutput, EqOutput, GreenOutput, RateOutput, RemezOutput, VerifyOutput};

fn run(args: &[&str]) -> ProcOutput {
    Command::new(env!("CARGO_BIN_EXE_potapprox"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn segment_capacity_is_one_half() {
    let eq: EqOutput = serde_json::from_str(&stdout(&["eq", "--set", "-1,1"])).unwrap();
    assert!((eq.capacity - 0.5).abs() < 1e-12);
    assert!((eq.total_mass - 1.0).abs() < 1e-12);
}

#[test]
fn green_matches_the_segment_formula() {
    let g: GreenOutput =
        serde_json::from_str(&stdout(&["green", "--set", "-1,1", "--z", "0,1;2,0"])).unwrap();
    // g(z) = log|z + sqrt(z^2 - 1)|
    assert!((g.points[0].green - (1.0 + 2f64.sqrt()).ln()).abs() < 1e-10);
    assert!((g.points[1].green - (2.0 + 3f64.sqrt()).ln()).abs() < 1e-10);
}

#[test]
fn remez_csv_row() {
    let csv = stdout(&[
        "remez", "--set", "-1,1", "--x0", "0", "--alpha", "1", "--n", "2", "--format", "csv",
    ]);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n,error,iterations"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "2");
    assert!((row[1].parse::<f64>().unwrap() - 0.125).abs() < 1e-9);
    assert!(lines.next().is_none());
}

#[test]
fn remez_json_round_trips() {
    let text = stdout(&[
        "remez",
        "--set",
        "-1,-0.5;0.5,1",
        "--x0",
        "0.75",
        "--degrees",
        "4:8:even",
    ]);
    let r: RemezOutput = serde_json::from_str(&text).unwrap();
    assert_eq!(
        r.results.iter().map(|x| x.n).collect::<Vec<_>>(),
        vec![4, 6, 8]
    );
    assert!(r.results.windows(2).all(|w| w[1].error <= w[0].error));
    assert_eq!(serde_json::to_string_pretty(&r).unwrap() + "\n", text);
}

#[test]
fn comb_has_exactly_three_keys() {
    let text = stdout(&["comb", "--set", "-1,-0.5;0.5,1", "--x0", "0.75"]);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let mut keys: Vec<&String> = v.as_object().unwrap().keys().collect();
    keys.sort();
    assert_eq!(keys, ["eta0", "u", "v"]);
    let c: CombOutput = serde_json::from_str(&text).unwrap();
    assert_eq!(c.u.len(), 3);
    assert_eq!(c.v.len(), 1);
    assert!((c.u[2] - std::f64::consts::PI).abs() < 1e-9);
}

#[test]
fn rate_reports_a_ladder() {
    let text = stdout(&[
        "rate",
        "--set",
        "-1,1",
        "--x0",
        "0",
        "--alpha",
        "1",
        "--degrees",
        "20:40:even",
        "--format",
        "csv",
    ]);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,n^alpha_En"));
    assert_eq!(lines.count(), 11);
    let r: RateOutput = serde_json::from_str(&stdout(&[
        "rate",
        "--set",
        "-1,1",
        "--degrees",
        "20:40:even",
        "--vt",
    ]))
    .unwrap();
    assert!((r.extrapolated_limit - 0.2802).abs() < 2e-3);
    assert!(r.vt.unwrap().relative_gap.abs() < 1e-12);
}

#[test]
fn verify_random_trials_pass() {
    let v: VerifyOutput = serde_json::from_str(&stdout(&[
        "verify",
        "--random",
        "2",
        "--seed",
        "7",
        "--samples",
        "50",
    ]))
    .unwrap();
    assert!(v.passed);
    assert_eq!(v.trials.len(), 2);
}

#[test]
fn output_is_deterministic() {
    let args = ["verify", "--random", "2", "--seed", "3", "--samples", "50"];
    assert_eq!(stdout(&args), stdout(&args));
    let args = [
        "remez",
        "--set",
        "-1,-0.2;0.1,1",
        "--x0",
        "0.5",
        "--degrees",
        "3,9,15",
    ];
    assert_eq!(stdout(&args), stdout(&args));
}

#[test]
fn out_flag_writes_a_file() {
    let path = std::env::temp_dir().join(format!("potapprox-cli-{}.json", std::process::id()));
    let p = path.to_str().unwrap();
    assert!(stdout(&["eq", "--set", "0,2", "--out", p]).is_empty());
    let eq: EqOutput = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!((eq.capacity - 0.5).abs() < 1e-12);
    std::fs::remove_file(path).unwrap();
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        vec!["eq", "--set", "1,0"],
        vec!["remez", "--set", "-1,1"],
        vec!["remez", "--set", "-1,1", "--x0", "3", "--n", "4"],
        vec!["rate", "--degrees", "1:2:odd"],
        vec!["rate", "--alpha", "2"],
        vec!["green", "--z", "1"],
        vec!["bogus"],
    ] {
        let out = run(&args);
        assert_eq!(
            out.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(out.stdout.is_empty());
    }
}
