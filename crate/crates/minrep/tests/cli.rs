use std::path::Path;
use std::process::{Command, Output};

fn minrep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_minrep"))
        .args(args)
        .output()
        .expect("running minrep")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> Vec<csv::StringRecord> {
    csv::Reader::from_reader(text.as_bytes())
        .records()
        .map(|r| r.unwrap())
        .collect()
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)).unwrap()
}

#[test]
fn table_csv_has_eleven_rows_and_matches_golden() {
    let o = minrep(&["table", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(csv_rows(&stdout(&o)).len(), 11);
    assert_eq!(stdout(&o), golden("table.csv"));
}

#[test]
fn table_json_matches_golden() {
    let o = minrep(&["table", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), golden("table.json"));
}

#[test]
fn table_family_filter() {
    let o = minrep(&["table", "--format", "csv", "--family", "O_2n2n"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 1);
    assert_eq!((&rows[0][3], &rows[0][4]), ("2", "0"));
    assert_eq!(minrep(&["table", "--family", "nope"]).status.code(), Some(2));
}

fn bessel_table(tau: &str) -> Vec<Vec<f64>> {
    let o = minrep(&["bessel", "--tau", tau, "--zmin", "0.1", "--zmax", "10", "--steps", "100"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    csv_rows(&stdout(&o))
        .iter()
        .map(|r| r.iter().map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn bessel_rows_and_residuals() {
    let rows = bessel_table("0");
    assert_eq!(rows.len(), 100);
    assert_eq!(rows[0][0], 0.1);
    assert!((rows[99][0] - 10.0).abs() < 1e-12);
    for r in &rows {
        assert!(r[3] < 1e-7, "residual {} at z = {}", r[3], r[0]);
    }
}

#[test]
fn bessel_half_order_closed_form_and_evenness() {
    let minus = bessel_table("-1/2");
    let plus = bessel_table("1/2");
    for (m, p) in minus.iter().zip(&plus) {
        let z = m[0];
        let closed = (-z).exp() * (std::f64::consts::PI / (2.0 * z)).sqrt();
        assert!((m[1] - closed).abs() <= 1e-10 * closed, "z = {z}");
        assert_eq!(m[1], p[1], "K column differs at z = {z}");
    }
}

#[test]
fn usage_errors_exit_two() {
    let o = minrep(&["verify", "all", "--model", "opq", "--p", "3", "--q", "5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("O(3,5) excluded"));
    assert_eq!(minrep(&["bessel", "--tau", "0", "--zmin", "0", "--zmax", "1"]).status.code(), Some(2));
    assert_eq!(minrep(&["bessel", "--tau", "1/3", "--zmin", "1", "--zmax", "2"]).status.code(), Some(2));
    assert_eq!(minrep(&["verify", "bogus"]).status.code(), Some(2));
    assert_eq!(minrep(&["model", "dump", "--model", "E_7(7)"]).status.code(), Some(2));
}

#[test]
fn underpowered_spherical_run_is_inconclusive() {
    let o = minrep(&["verify", "spherical", "--samples", "1000"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn tensor_audit_json() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("audit.json");
    let o = minrep(&["tensor", "audit", "--model", "o2n2n", "--n", "3", "--k", "2", "--json", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["dims"]["s_k"], 22);
    assert_eq!(v["dims"]["g_k"], v["expected"]["g_k"]);
    assert_eq!(v["dims"]["h_k"], v["expected"]["h_k"]);
    assert_eq!(v["dual_pair"], "Sp_4(R)/[SL_2(R)]^2");
    assert_eq!(minrep(&["tensor", "audit", "--n", "2", "--k", "2"]).status.code(), Some(2));
}

#[test]
fn model_dump_and_orbit_sample() {
    let o = minrep(&["model", "dump", "--model", "gl2n", "--n", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["dim"], 16);
    assert_eq!(v["basis"].as_array().unwrap().len(), 16);

    let o = minrep(&["orbit", "sample", "--count", "5", "--exact"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| &r[2] == "0"));
}

#[test]
fn json_report_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let p = dir.path().join(name);
        let o = minrep(&["verify", "structural", "--model", "gl2n", "--seed", "3", "--json", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
        let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap();
        v.as_object_mut().unwrap().remove("timestamp");
        v
    };
    assert_eq!(run("a.json"), run("b.json"));
}

#[test]
fn grid_csv_written() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("grid.csv");
    let o = minrep(&["verify", "spherical", "--samples", "20000", "--grid-csv", p.to_str().unwrap()]);
    assert!(matches!(o.status.code(), Some(0) | Some(3)));
    let rows = csv_rows(&std::fs::read_to_string(p).unwrap());
    assert_eq!(rows.len(), 28);
}
