use std::fs;
use std::process::{Command, Output};

fn dicke(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dicke")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Data rows of a CSV document as (column name → cell) lookups.
fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<String> = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap()
}

#[test]
fn gcurve_flags_both_pole_families_for_three_qubits() {
    // Poles of N = 3, g = 0.25 sit at n − 9/16 and n − 1/16.
    let o = dicke(&["gcurve", "--n", "3", "--delta", "0.7", "--g", "0.25", "--e_min", "-1", "--e_max", "2", "--points", "3001"]);
    assert!(o.status.success());
    let (h, rows) = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 3001);
    let (e, pp, pm) = (column(&h, "E"), column(&h, "pole_plus"), column(&h, "pole_minus"));
    let flagged: Vec<f64> = rows.iter().filter(|r| r[pp] == "1" && r[pm] == "1").map(|r| r[e].parse().unwrap()).collect();
    for pole in [-0.5625, -0.0625, 0.4375, 0.9375, 1.4375, 1.9375] {
        assert!(flagged.iter().any(|x| (x - pole).abs() < 1e-3), "pole {pole}");
    }
    // Every flag lies next to some n − 9/16 or n − 1/16.
    for x in &flagged {
        let off = |f: f64| {
            let r = (x - f).rem_euclid(1.0);
            r.min(1.0 - r)
        };
        assert!(off(0.4375) < 1e-3 || off(0.9375) < 1e-3, "{x}");
    }
}

#[test]
fn gcurve_single_qubit_is_the_rabi_curve() {
    let o = dicke(&["gcurve", "--n", "1", "--delta", "0.7", "--g", "0.25", "--e_min", "-0.5", "--e_max", "0.5", "--points", "11"]);
    assert!(o.status.success());
    let (h, rows) = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 11);
    let g = column(&h, "G_plus");
    assert!(rows.iter().all(|r| r[g].parse::<f64>().map_or(false, f64::is_finite)));
}

#[test]
fn empty_range_gives_a_header_only_file() {
    let o = dicke(&["gcurve", "--n", "3", "--delta", "0.7", "--g", "0.25", "--e_min", "2", "--e_max", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let (_, rows) = csv_rows(&stdout(&o));
    assert!(rows.is_empty());
}

#[test]
fn flags_override_config_file_and_config_is_embedded() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let out = dir.path().join("out.csv");
    fs::write(&cfg, "# three qubits\nn = 3\ndelta = 0.5\ng = 0.25\ne_min = -1\ne_max = 1\npoints = 5\n").unwrap();
    let o = dicke(&["gcurve", "--config", cfg.to_str().unwrap(), "--delta", "0.7", "--output", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("# dicke gcurve\n"));
    assert!(text.contains("# delta = 0.7\n"));
    assert!(text.contains("# points = 5\n"));
    assert!(text.contains("# n_c = 20\n"));
}

#[test]
fn output_is_deterministic() {
    let args = ["spectrum", "--n", "3", "--delta", "0.7", "--g", "0.25", "--e_min", "-1", "--e_max", "1"];
    let a = dicke(&args);
    let b = dicke(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn spectrum_json_matches_the_oracle() {
    let o = dicke(&["spectrum", "--n", "3", "--delta", "0.7", "--g", "0.25", "--e_min", "-1", "--e_max", "1"]);
    assert!(o.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["config"]["n"], "3");
    let records = doc["records"].as_array().unwrap();
    assert!(!records.is_empty());
    for r in records {
        assert!(r["oracle_delta"].as_f64().unwrap().abs() < 1e-8);
        assert!(r["residual"].as_f64().unwrap() < 1e-8);
        let s = &r["eigenstate"];
        assert!((s["norm"].as_f64().unwrap() - 1.0).abs() < 1e-10);
        assert!(s["parity_defect"].as_f64().unwrap() < 1e-10);
    }
}

#[test]
fn floats_carry_seventeen_significant_digits() {
    let o = dicke(&["spectrum", "--n", "2", "--delta", "1", "--g", "0.2", "--e_max", "0.5", "--format", "csv"]);
    assert!(o.status.success());
    let (h, rows) = csv_rows(&stdout(&o));
    let e = column(&h, "energy");
    for r in &rows {
        let mant = r[e].trim_start_matches('-').split('e').next().unwrap().replace('.', "");
        assert_eq!(mant.len(), 17, "{}", r[e]);
    }
}

#[test]
fn exceptional_points_are_confirmed_by_the_oracle() {
    let o = dicke(&["exceptional", "--n", "3", "--delta", "0.7", "--m", "3/2", "--n_max", "1", "--g_hi", "0.6"]);
    assert!(o.status.success());
    let (h, rows) = csv_rows(&stdout(&o));
    assert!(!rows.is_empty());
    let dev = column(&h, "oracle_deviation");
    assert!(rows.iter().all(|r| r[dev].parse::<f64>().unwrap() < 1e-6));
}

#[test]
fn convergence_rows_cover_both_bases() {
    let o = dicke(&["convergence", "--n", "3", "--delta", "0.7", "--g", "0.25", "--states", "2", "--c_max", "8", "--format", "json"]);
    assert!(o.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = doc["rows"].as_array().unwrap();
    // 2 bases × 2 parities × 2 states × 8 cutoffs.
    assert_eq!(rows.len(), 64);
}

#[test]
fn gme_starts_at_one_half() {
    let o = dicke(&["gme", "--n", "2", "--delta", "1", "--g", "0.05", "--t_max", "1", "--dt", "0.5"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("# note conservation_holds = true"));
    let (h, rows) = csv_rows(&text);
    assert_eq!(rows.len(), 3);
    let g: f64 = rows[0][column(&h, "gme")].parse().unwrap();
    assert!((g - 0.5).abs() < 1e-3);
}

#[test]
fn exit_codes() {
    assert_eq!(dicke(&["gcurve", "--n", "3"]).status.code(), Some(64));
    assert_eq!(dicke(&["gcurve", "--n", "3", "--delta", "x", "--g", "0.1", "--e_max", "1"]).status.code(), Some(64));
    assert_eq!(dicke(&["spectrum", "--n", "3", "--delta", "0.7", "--g", "0.1", "--lambda", "0.2", "--e_max", "1"]).status.code(), Some(64));
    assert_eq!(dicke(&["nonsense"]).status.code(), Some(64));
    assert_eq!(dicke(&["gme", "--n", "5", "--delta", "1", "--g", "0.1"]).status.code(), Some(64));
    assert_eq!(dicke(&["gcurve", "--config", "/nonexistent/run.cfg"]).status.code(), Some(64));
    assert_eq!(dicke(&["--help"]).status.code(), Some(0));
    // Photon cutoff capped far below what g = 1.5 needs.
    let o = dicke(&["gme", "--n", "2", "--delta", "1", "--g", "1.5", "--t_max", "1", "--max_m_fock", "45"]);
    assert_eq!(o.status.code(), Some(2));
}
