//! The `halfline` binary end to end: exit codes, output files, CSV layout.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = "\
# coarse grids so each command finishes in about a second
potential.kind = square_well
potential.depth = 10
potential.radius = 1
grids.k_max = 10
grids.k_panels = 64
grids.r_max = 30
grids.r_panels = 128
grids.line_N = 16384
grids.line_Emax = 512
grids.evolution_line_N = 16384
grids.evolution_line_Emax = 256
jost.points = 7
evolution.times = 0.5, 1
";

fn halfline(config: &str, args: &[&str], out: &Path) -> Output {
    let dir = out.parent().unwrap();
    let path = dir.join("run.conf");
    fs::write(&path, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_halfline"))
        .arg(&path)
        .args(args)
        .arg("--out")
        .arg(out)
        .env("RUST_LOG", "warn")
        .env_remove("HS_OUTPUT_DIR")
        .output()
        .unwrap()
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(path).unwrap();
    assert!(!text.contains('\r'), "CRLF in {}", path.display());
    text.lines().map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn jost_writes_documented_columns() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = halfline(SMALL, &["jost"], &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let table = rows(&out.join("jost.csv"));
    assert_eq!(table[0].join(","), "E,Re A−,Im A−,Re A+,Im A+,Re W+,Im W+,Re S,Im S");
    assert_eq!(table.len(), 8);
    for row in &table[1..] {
        assert_eq!(row.len(), 9);
        for cell in row {
            let mantissa = cell.split('e').next().unwrap().trim_start_matches('-');
            assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17, "{cell}");
        }
        // |S| = 1 on the real axis
        let (re, im): (f64, f64) = (row[7].parse().unwrap(), row[8].parse().unwrap());
        assert!((re.hypot(im) - 1.0).abs() < 1e-9);
    }
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("jost.json")).unwrap()).unwrap();
    assert_eq!(report["name"], "jost");
}

#[test]
fn zero_energy_in_jost_range_exits_3_with_guard_name() {
    let tmp = tempfile::tempdir().unwrap();
    let o = halfline(&format!("{SMALL}jost.e_min = 0\n"), &["jost"], &tmp.path().join("out"));
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("ZeroEnergy"));
}

#[test]
fn config_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let appended = format!("line {}", SMALL.lines().count() + 1);
    for (config, needle) in [
        (format!("{SMALL}grids.line_N = 1000\n"), "grids.line_N"),
        (format!("{SMALL}grids.k_max = -3\n"), "grids.k_max"),
        (format!("{SMALL}grids.mystery = 1\n"), appended.as_str()),
        (format!("{SMALL}this line is junk\n"), appended.as_str()),
    ] {
        let o = halfline(&config, &["jost"], &out);
        assert_eq!(o.status.code(), Some(2), "{config}");
        assert!(String::from_utf8_lossy(&o.stderr).contains(needle), "{}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn unknown_command_exits_2_with_usage() {
    let tmp = tempfile::tempdir().unwrap();
    let o = halfline(SMALL, &["frobnicate"], &tmp.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("usage:"));
}

#[test]
fn missing_table_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let config = "potential.kind = sampled_table\npotential.table_path = nowhere.csv\n";
    let o = halfline(config, &["jost"], &tmp.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sampled_table_resolves_next_to_config() {
    let tmp = tempfile::tempdir().unwrap();
    let table: String = (0..=40).map(|i| format!("{},{}\n", i as f64 * 0.05, -3.0)).collect();
    fs::write(tmp.path().join("v.csv"), table).unwrap();
    let config = "potential.kind = sampled_table\npotential.table_path = v.csv\njost.points = 3\n";
    let o = halfline(config, &["jost"], &tmp.path().join("out"));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn evolve_method_and_times_flags() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = halfline(SMALL, &["evolve", "--method", "factorized", "--t", "0.25,0.5"], &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let trace = rows(&out.join("evolve_trace.csv"));
    assert_eq!(trace[0].join(","), "t,method,norm,norm_drift,leakage,error_vs_spectral");
    assert_eq!(trace.len(), 3);
    assert!(out.join("evolve_factorized_t0.25.csv").exists());
    assert!(!out.join("evolve_cn_t0.5.csv").exists());
    let state = rows(&out.join("evolve_factorized_t0.5.csv"));
    assert_eq!(state[0].join(","), "r,Re value,Im value");
}

#[test]
fn factorized_past_the_wraparound_limit_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let o = halfline(SMALL, &["evolve", "--method", "factorized", "--t", "1000"], &tmp.path().join("out"));
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("WraparoundGuard"));
}

#[test]
fn hardy_atoms_flag_sets_the_family() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = halfline(SMALL, &["hardy", "--atoms", "plus:2"], &out);
    // coarse line grid: leakage tolerance may fail, but the run completes
    assert!(matches!(o.status.code(), Some(0 | 1)), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("hardy_atom1.csv").exists());
    assert!(!out.join("hardy_atom2.csv").exists());
    assert_eq!(rows(&out.join("hardy_atom0.csv"))[0].join(","), "coordinate,Re,Im");
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("hardy.json")).unwrap()).unwrap();
    assert_eq!(report["parameters"]["halfplane"], "plus");
}

#[test]
fn output_dir_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("run.conf");
    fs::write(&path, SMALL).unwrap();
    let out = tmp.path().join("env_out");
    let o = Command::new(env!("CARGO_BIN_EXE_halfline"))
        .arg(&path)
        .arg("resonances")
        .env("HS_OUTPUT_DIR", &out)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let table = rows(&out.join("resonances.csv"));
    assert_eq!(table[0].join(","), "Re k,Im k,Re E,Im E,residual");
    assert!(table.len() >= 2);
}

#[test]
fn shipped_config_parses() {
    let text = fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/default.conf")).unwrap();
    let config = halfline::config::parse_config(&text).unwrap();
    assert_eq!(config.grids, halfline::experiments::StudyGrids::default());
}
