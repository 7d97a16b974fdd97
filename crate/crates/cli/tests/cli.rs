use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const B4: &str = "1,0.15,0.05,0.03,0.25,0.5";

fn chaosrate(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chaosrate"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = chaosrate(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    chaosrate(args).status.code().expect("exit code")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn synth(dir: &Path, model: &str, params: &str, dates: &str) {
    ok(&["synth", "--models", model, "--params", params, "--dates", dates, "--out", p(dir)]);
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

fn column(rows: &[Vec<String>], name: &str) -> usize {
    rows[0].iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    assert_eq!(code(&["calibrate-options", "--frobnicate"]), 2);
    assert_eq!(
        code(&["price", "--model", "Q9", "--params", "1", "--instrument", "caplet", "--expiry", "1", "--maturity", "1.25"]),
        2
    );
    let missing = tmp.path().join("missing");
    assert_eq!(
        code(&["calibrate-term", "--data", p(&missing), "--models", "A1", "--out", p(&out)]),
        3
    );
    fs::create_dir_all(tmp.path().join("empty")).unwrap();
    assert_eq!(code(&["report", p(&tmp.path().join("empty"))]), 3);
    // strike outside the bond put range is a pricing failure
    assert_eq!(
        code(&["price", "--model", "B4", "--params", B4, "--instrument", "bond-put", "--expiry", "1", "--maturity", "2", "--strike", "1.5"]),
        5
    );
}

#[test]
fn missing_objective_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    synth(&tmp.path().join("s"), "B4", B4, "1");
    let s = tmp.path().join("s");
    let o = tmp.path().join("o");
    assert_eq!(code(&["calibrate-options", "--data", p(&s), "--models", "B4", "--out", p(&o)]), 2);
}

#[test]
fn term_run_is_deterministic_and_reports_dm_against_svensson() {
    let tmp = tempfile::tempdir().unwrap();
    let s = tmp.path().join("snaps");
    synth(&s, "A1", "1,0.2,0.04", "3");
    let run = |name: &str| {
        let o = tmp.path().join(name);
        ok(&["calibrate-term", "--data", p(&s), "--models", "A1", "--starts", "6", "--seed", "11", "--out", p(&o)]);
        ok(&["report", p(&o)]);
        o
    };
    let (a, b) = (run("a"), run("b"));
    for f in ["per_date.csv", "summary.csv", "msrf.csv", "report.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f} differs");
    }
    let rows = csv_rows(&a.join("summary.csv"));
    let (m, rm) = (column(&rows, "model"), column(&rows, "rmspe_pct"));
    assert_eq!(rows[1][m], "Sv");
    let a1 = rows.iter().find(|r| r[m] == "A1").unwrap();
    assert!(a1[rm].parse::<f64>().unwrap() < 1e-3, "{a1:?}");
}

#[test]
fn caplet_run_forecasts_swaptions_except_for_libor() {
    let tmp = tempfile::tempdir().unwrap();
    let s = tmp.path().join("snaps");
    synth(&s, "B4", B4, "1");
    let o = tmp.path().join("o");
    ok(&["calibrate-options", "--data", p(&s), "--models", "B4,LIBOR", "--objective", "cpl", "--starts", "2", "--out", p(&o)]);
    let rows = csv_rows(&o.join("summary.csv"));
    let (m, sw) = (column(&rows, "model"), column(&rows, "swp_e_pct"));
    let get = |id: &str| rows.iter().find(|r| r[m] == id).unwrap()[sw].clone();
    assert!(get("B4").parse::<f64>().is_ok());
    assert_eq!(get("LIBOR"), "-");
}

#[test]
fn report_dates_are_sorted() {
    let tmp = tempfile::tempdir().unwrap();
    let s = tmp.path().join("snaps");
    synth(&s, "A1", "1,0.2,0.04", "4");
    let o = tmp.path().join("o");
    ok(&["calibrate-term", "--data", p(&s), "--models", "A1", "--starts", "2", "--out", p(&o)]);
    ok(&["report", p(&o)]);
    let rows = csv_rows(&o.join("report.csv"));
    let d = column(&rows, "date");
    let dates: Vec<&str> = rows[1..].iter().map(|r| r[d].as_str()).collect();
    assert!(dates.windows(2).all(|w| w[0] <= w[1]));
    let mut distinct = dates.clone();
    distinct.dedup();
    assert_eq!(distinct.len(), 4);
}

fn json_field(text: &str, key: &str) -> f64 {
    let line = text
        .lines()
        .find(|l| l.trim_start().starts_with(&format!("\"{key}\"")))
        .unwrap_or_else(|| panic!("no {key} in {text}"));
    line.split(':').nth(1).unwrap().trim().trim_end_matches(',').parse().unwrap()
}

#[test]
fn zero_strike_swaption_is_curve_difference() {
    let out = ok(&["price", "--model", "B4", "--params", B4, "--instrument", "swaption", "--expiry", "1", "--tenor", "2", "--strike", "0"]);
    let p1 = ok(&["price", "--model", "B4", "--params", B4, "--instrument", "bond-put", "--expiry", "0", "--maturity", "1", "--strike", "1"]);
    let p3 = ok(&["price", "--model", "B4", "--params", B4, "--instrument", "bond-put", "--expiry", "0", "--maturity", "3", "--strike", "1"]);
    // a unit-strike put at time zero pays 1 - P(T)
    let (d1, d3) = (1.0 - json_field(&p1, "price"), 1.0 - json_field(&p3, "price"));
    assert!((json_field(&out, "price") - (d1 - d3)).abs() < 1e-13);
}

#[test]
fn deterministic_caplet_is_intrinsic() {
    let params = "1,0,0,0.03,0.25,0.5";
    let atm = ok(&["price", "--model", "B4", "--params", params, "--instrument", "caplet", "--expiry", "1", "--maturity", "1.5"]);
    let (f, a) = (json_field(&atm, "forward"), json_field(&atm, "annuity"));
    let k = f - 0.01;
    let out = ok(&[
        "price", "--model", "B4", "--params", params, "--instrument", "caplet", "--expiry", "1", "--maturity", "1.5",
        "--strike", &k.to_string(),
    ]);
    assert!((json_field(&out, "price") - a * 0.01).abs() < 1e-14);
}
