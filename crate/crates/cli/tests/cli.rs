use std::process::{Command, Output};

fn zb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zb")).args(args).output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = zb(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn expand_three_to_the_fifth() {
    assert_eq!(stdout(&["expand", "--block", "1,0", "--n", "243"]).trim(), "100000010010");
}

#[test]
fn probability_of_one_zero_zero() {
    let p: f64 = stdout(&["prob", "--block", "1,0", "--lb", "1,0,0"]).trim().parse().unwrap();
    // log_phi(1 + phi^-2), the Fibonacci successor block 1,0,1 over 1,0,0
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let want = (1.0 + phi.powi(-2)).ln() / phi.ln();
    assert!((p - want).abs() < 1e-11, "{p} vs {want}");
    assert!((p - 0.672).abs() < 1e-3);
}

#[test]
fn synthesized_line_profile() {
    assert_eq!(
        stdout(&["synth", "--block", "1,0", "--profile", "line", "--count", "10"]).trim(),
        "1 2 3 6 11 19 33 36 64 111"
    );
}

#[test]
fn default_precision_is_twelve_significant_digits() {
    let p = stdout(&["prob", "--lb", "1,0,1"]);
    let digits = p.trim().trim_start_matches("0.").trim_start_matches('0');
    assert_eq!(digits.len(), 12, "{p}");
    let p = stdout(&["--digits", "4", "prob", "--lb", "1,0,1"]);
    assert_eq!(p.trim(), "0.3277");
}

#[test]
fn freq_csv_columns() {
    let out = stdout(&["--format", "csv", "freq", "--seq", "power:2", "--s", "3", "--count", "500"]);
    let mut rdr = csv::Reader::from_reader(out.as_bytes());
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, ["block", "count", "empirical", "theoretical", "deviation"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2);
    let total: u64 = rows.iter().map(|r| r[1].parse::<u64>().unwrap()).sum();
    // 2^1 = 2 is below H_3 = 3 and has no leading block of length 3
    assert_eq!(total, 499);
    for r in &rows {
        let (e, t, d): (f64, f64, f64) = (r[2].parse().unwrap(), r[3].parse().unwrap(), r[4].parse().unwrap());
        assert!(((e - t).abs() - d).abs() < 1e-11);
    }
}

#[test]
fn json_is_parseable_and_stable() {
    let args = ["--format", "json", "within", "--lb", "1,0,1", "--t", "20", "--samples", "300", "--seed", "5"];
    let a = stdout(&args);
    let b = stdout(&args);
    assert_eq!(a, b);
    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["samples"], 300);
    assert_eq!(v["block"], "1,0,1");
    let c = stdout(&[
        "--threads",
        "1",
        "--format",
        "json",
        "within",
        "--lb",
        "1,0,1",
        "--t",
        "20",
        "--samples",
        "300",
        "--seed",
        "5",
    ]);
    assert_eq!(a, c);
}

#[test]
fn every_subcommand_runs() {
    let runs: &[&[&str]] = &[
        &["blocks", "--block", "2,1", "--s", "3"],
        &["equidist", "--seq", "lucas", "--count", "200"],
        &["oscillate", "--lb", "1,0,0", "--m-lo", "10", "--m-hi", "12"],
        &["real-expand", "--beta", "0.3", "--depth", "12"],
        &["concentrate", "--a", "1", "--s", "5"],
        &["absolute", "--seq", "power:3", "--system", "1,0", "--system", "9,9", "--count", "300", "--s-max", "2"],
    ];
    for args in runs {
        for format in ["json", "csv", "table"] {
            let mut full = vec!["--format", format];
            full.extend_from_slice(args);
            let out = stdout(&full);
            assert!(!out.trim().is_empty(), "{full:?}");
            if format == "json" {
                serde_json::from_str::<serde_json::Value>(&out).unwrap();
            }
        }
    }
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["frobnicate"][..],
        &["expand", "--n", "12x"],
        &["prob", "--lb", "1,z"],
        &["freq", "--seq", "power:one", "--s", "2"],
    ] {
        let out = zb(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
    let err = String::from_utf8(zb(&["expand", "--n", "12x"]).stderr).unwrap();
    assert!(err.contains("12x"), "{err}");
    let err = String::from_utf8(zb(&["prob", "--lb", "1,z"]).stderr).unwrap();
    assert!(err.contains("`z`"), "{err}");
}

#[test]
fn domain_errors_exit_one() {
    // a principal block must start with a positive entry
    let out = zb(&["expand", "--block", "0,1", "--n", "5"]);
    assert_eq!(out.status.code(), Some(1));
    // 1,1,0 is not a leading block under Fibonacci
    let out = zb(&["prob", "--lb", "1,1,0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn help_names_each_construct() {
    let cases = [
        ("expand", "fundamental sequence"),
        ("blocks", "Benford"),
        ("synth", "continuation profile"),
        ("equidist", "star discrepancy"),
        ("oscillate", "limsup"),
        ("within", "Within-expansion"),
        ("real-expand", "theta"),
        ("concentrate", "psi^n"),
        ("absolute", "Absolute Benford"),
    ];
    for (cmd, phrase) in cases {
        let out = zb(&[cmd, "--help"]);
        assert!(out.status.success());
        let text = String::from_utf8(out.stdout).unwrap();
        assert!(text.contains(phrase), "{cmd}: {text}");
    }
}

#[test]
fn emitted_config_round_trips() {
    let out = stdout(&["--emit-config", "--digits", "7", "synth", "--block", "2,1", "--profile", "power:2"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["digits"], 7);
    assert_eq!(v["command"]["command"], "synth");
    assert_eq!(v["command"]["system"]["block"], "2,1");
}
