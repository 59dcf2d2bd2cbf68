//! End-to-end checks of the scenario runner: exit codes, artifact shapes,
//! figure values, and config round-trips.

use actionlab_cli::config::ScenarioConfig;
use actionlab_cli::report::ComparisonReport;
use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_actionlab"))
}

fn scenarios_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("cannot read {}: {e}", path.display()))
        .lines()
        .map(|l| l.split(',').map(|c| c.to_string()).collect())
        .collect()
}

#[test]
fn config_round_trip_all_shipped_scenarios() {
    let mut checked = 0;
    for mode_dir in std::fs::read_dir(scenarios_dir()).unwrap() {
        let mode_dir = mode_dir.unwrap().path();
        if !mode_dir.is_dir() {
            continue;
        }
        for file in std::fs::read_dir(&mode_dir).unwrap() {
            let file = file.unwrap().path();
            if file.extension().map(|e| e != "json").unwrap_or(true) {
                continue;
            }
            let text = std::fs::read_to_string(&file).unwrap();
            let cfg: ScenarioConfig = serde_json::from_str(&text)
                .unwrap_or_else(|e| panic!("{}: {e}", file.display()));
            let serialized = serde_json::to_string(&cfg).unwrap();
            let reloaded: ScenarioConfig = serde_json::from_str(&serialized).unwrap();
            assert_eq!(cfg, reloaded, "round trip differs for {}", file.display());
            checked += 1;
        }
    }
    assert!(checked >= 8, "expected the shipped scenarios, found {checked}");
}

#[test]
fn fig2_reports_the_connecting_velocities() {
    let out = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["figures", "--config"])
        .arg(scenarios_dir().join("figures/fig2_initial_positions.json"))
        .arg("--out")
        .arg(out.path())
        .status()
        .unwrap();
    assert!(status.success());

    let rows = read_csv(&out.path().join("fig2_initial_positions.fig2.csv"));
    assert_eq!(rows[0], vec!["path", "x0", "v0", "s", "x"]);
    // v0 = (x - x0)/t for the free particle: {3, 2, 1}
    let mut seen = std::collections::BTreeMap::new();
    for row in &rows[1..] {
        let x0: f64 = row[1].parse().unwrap();
        let v0: f64 = row[2].parse().unwrap();
        seen.insert(format!("{x0}"), v0);
    }
    assert_eq!(seen.len(), 3);
    assert!((seen["-1"] - 3.0).abs() < 1e-9);
    assert!((seen["0"] - 2.0).abs() < 1e-9);
    assert!((seen["1"] - 1.0).abs() < 1e-9);
}

#[test]
fn fig3_field_probe_values() {
    let out = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["figures", "--config"])
        .arg(scenarios_dir().join("figures/fig3_velocity_field.json"))
        .arg("--out")
        .arg(out.path())
        .status()
        .unwrap();
    assert!(status.success());

    // v(x, t) = v0 + k t / m = 1 + t at every probe x
    let rows = read_csv(&out.path().join("fig3_velocity_field.fig3_field.csv"));
    assert_eq!(rows[0], vec!["t", "x", "v"]);
    for row in &rows[1..] {
        let t: f64 = row[0].parse().unwrap();
        let v: f64 = row[2].parse().unwrap();
        assert_eq!(v, 1.0 + t, "row {row:?}");
    }
    // piloted paths artifact exists alongside
    assert!(out.path().join("fig3_velocity_field.fig3_paths.csv").exists());
}

#[test]
fn empty_initial_point_list_gives_header_only_csv() {
    let dir = tempfile::tempdir().unwrap();
    let config = serde_json::json!({
        "name": "empty_fig2",
        "model": {"mass": 1.0, "dimension": 1, "potential": {"kind": "free"}},
        "mode": "figures",
        "fig2": {"x0_list": [], "x": [2.0], "t": 1.0}
    });
    let cfg_path = dir.path().join("empty_fig2.json");
    std::fs::write(&cfg_path, serde_json::to_string_pretty(&config).unwrap()).unwrap();

    let out = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["figures", "--config"])
        .arg(&cfg_path)
        .arg("--out")
        .arg(out.path())
        .status()
        .unwrap();
    assert!(status.success());
    let body = std::fs::read_to_string(out.path().join("empty_fig2.fig2.csv")).unwrap();
    assert_eq!(body, "path,x0,v0,s,x\n");
}

#[test]
fn empty_batch_exits_zero_without_artifacts() {
    let empty = tempfile::tempdir().unwrap();
    let out = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["el", "--config"])
        .arg(empty.path())
        .arg("--out")
        .arg(out.path())
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(std::fs::read_dir(out.path()).unwrap().count(), 0);
}

#[test]
fn unreadable_config_exits_one_with_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("broken.json");
    std::fs::write(&cfg_path, "{\"name\": \"x\",\n  \"model\": }\n").unwrap();
    let output = bin()
        .args(["el", "--config"])
        .arg(&cfg_path)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("line 2"), "diagnostics missing: {stderr}");
}

#[test]
fn mode_mismatch_exits_one() {
    let output = bin()
        .args(["pde", "--config"])
        .arg(scenarios_dir().join("el/family_uniform_force.json"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("does not match"), "{stderr}");
}

#[test]
fn zero_probe_time_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = serde_json::json!({
        "name": "bad_probe",
        "model": {"mass": 1.0, "dimension": 1, "potential": {"kind": "linear", "k": [1.0]}},
        "mode": "compare",
        "s0": {"kind": "linear-form", "v0": [1.0], "mass": 1.0},
        "probes": [{"x": [1.0], "t": 0.0}],
        "search_box": [[-10.0, 10.0]],
        "tolerances": {}
    });
    let cfg_path = dir.path().join("bad_probe.json");
    std::fs::write(&cfg_path, serde_json::to_string(&config).unwrap()).unwrap();
    let output = bin()
        .args(["compare", "--config"])
        .arg(&cfg_path)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("must be > 0"), "{stderr}");
}

#[test]
fn domain_exit_is_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let config = serde_json::json!({
        "name": "runaway",
        "model": {"mass": 1.0, "dimension": 1, "potential": {"kind": "free"}},
        "mode": "pilot",
        "source": {
            "kind": "grid",
            "s0": {"kind": "linear-form", "v0": [1.0], "mass": 1.0},
            "lo": -8.0, "hi": 8.0, "grid_n": 65, "t_final": 1.0,
            "snapshot_times": [0.0, 0.5, 1.0]
        },
        "starts": [[7.5]],
        "t1": 1.0
    });
    let cfg_path = dir.path().join("runaway.json");
    std::fs::write(&cfg_path, serde_json::to_string(&config).unwrap()).unwrap();
    let out = tempfile::tempdir().unwrap();
    let output = bin()
        .args(["pilot", "--config"])
        .arg(&cfg_path)
        .arg("--out")
        .arg(out.path())
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("left the field domain"), "{stderr}");
}

#[test]
fn comparison_report_is_self_consistent() {
    let out = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["compare", "--config"])
        .arg(scenarios_dir().join("compare/linear_routes.json"))
        .arg("--out")
        .arg(out.path())
        .status()
        .unwrap();
    assert!(status.success());

    let body = std::fs::read_to_string(out.path().join("linear_routes.report.json")).unwrap();
    let report: ComparisonReport = serde_json::from_str(&body).unwrap();
    assert!(report.is_self_consistent());
    assert!(report.all_mandatory_ok);
    assert_eq!(report.probes.len(), 3);

    // anchor: all smooth routes agree on 17/6 at (x=2, t=1)
    let anchor = &report.probes[0];
    let exact = 17.0 / 6.0;
    assert!((anchor.values["analytic"].unwrap() - exact).abs() < 1e-12);
    assert!((anchor.values["hopf_lax"].unwrap() - exact).abs() < 1e-8);
    assert!((anchor.values["nested"].unwrap() - exact).abs() < 2e-3);
    assert!((anchor.values["pde"].unwrap() - exact).abs() < 2e-2);
    for diff in &anchor.diffs {
        assert_eq!(diff.pass, Some(true), "{diff:?}");
    }
}

#[test]
fn singular_comparison_matches_bitwise_and_shooting() {
    let out = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["compare", "--config"])
        .arg(scenarios_dir().join("compare/singular_routes.json"))
        .arg("--out")
        .arg(out.path())
        .status()
        .unwrap();
    assert!(status.success());
    let body = std::fs::read_to_string(out.path().join("singular_routes.report.json")).unwrap();
    let report: ComparisonReport = serde_json::from_str(&body).unwrap();
    assert!(report.all_mandatory_ok);
    let anchor = &report.probes[0];
    let exact = 4.0 / 3.0;
    let hl = anchor.values["hopf_lax"].unwrap();
    assert_eq!(hl, anchor.values["analytic"].unwrap());
    assert!((hl - exact).abs() < 1e-14);
    assert!((anchor.values["shooting"].unwrap() - hl).abs() < 1e-8);
    for diff in &anchor.diffs {
        assert_ne!(diff.pass, Some(false), "{diff:?}");
    }
}

#[test]
fn flag_overrides_change_the_model() {
    let out = tempfile::tempdir().unwrap();
    // k = 0 turns the family into the free particle: optimal action 0.5.
    let output = bin()
        .args(["el", "--config"])
        .arg(scenarios_dir().join("el/family_uniform_force.json"))
        .arg("--out")
        .arg(out.path())
        .args(["--k", "0.0"])
        .output()
        .unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("5.0000"), "stdout: {stdout}");
}

#[test]
fn inapplicable_override_is_rejected() {
    let output = bin()
        .args(["el", "--config"])
        .arg(scenarios_dir().join("el/family_uniform_force.json"))
        .args(["--grid-n", "100"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
}
