use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn hubopt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hubopt"))
        .args(args)
        .env_remove("HUBOPT_OUT")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn two_hub() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/two_hub/two_hub.toml")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// A one-node electricity system over three steps. `extra` is appended to
/// the generator node, `scenario` replaces the scenario block.
fn tiny(dir: &Path, extra: &str, scenario: &str) -> PathBuf {
    std::fs::write(dir.join("load.csv"), "t,load\n0,1.0\n1,2.0\n2,1.5\n").unwrap();
    let text = format!(
        r#"series = ["load.csv"]

[horizon]
steps = 3
demand_cluster = "BE"

[[commodity]]
id = "electricity"
unit = "energy"

[[node]]
id = "plant"
kind = "conversion"
cluster = "BE"
category = "power"
reference = "electricity"
ports.electricity = {{ commodity = "electricity", direction = "out" }}
capex = 1.0
lifetime = 10.0
vom = 0.05
{extra}

[[hyperedge]]
id = "grid"
commodity = "electricity"
producers = ["plant.electricity"]
demand = "load"

{scenario}
"#
    );
    let path = dir.join("tiny.toml");
    std::fs::write(&path, text).unwrap();
    path
}

const PLAIN: &str = "[[scenario]]\nname = \"base\"\n";

#[test]
fn synth_is_deterministic() {
    let a = hubopt(&["synth", "wind_polar_cf", "-T", "48", "--seed", "9"]);
    let b = hubopt(&["synth", "wind_polar_cf", "-T", "48", "--seed", "9"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.starts_with("t,wind_polar_cf\n"));
    assert_eq!(text.lines().count(), 49);
    let c = hubopt(&["synth", "wind_polar_cf", "-T", "48", "--seed", "10"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn synth_renames_and_writes_files() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("sun.csv");
    let out = hubopt(&["synth", "solar_desert_cf", "-T", "24", "--name", "sun", "-o", s(&path)]);
    assert_eq!(code(&out), 0);
    assert!(std::fs::read_to_string(&path).unwrap().starts_with("t,sun\n"));
}

#[test]
fn unknown_synth_kind_is_a_usage_error() {
    let out = hubopt(&["synth", "tidal_cf", "-T", "24"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("tidal_cf"));
}

#[test]
fn bundled_configs_validate() {
    let out = hubopt(&["validate", s(&two_hub())]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("both_hubs: ok"));
    let desk = two_hub().parent().unwrap().join("../desk/desk.toml");
    let out = hubopt(&["validate", s(&desk)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(stdout(&out).matches(": ok").count(), 5);
}

#[test]
fn config_errors_carry_a_line_number() {
    let dir = TempDir::new().unwrap();
    let path = tiny(dir.path(), "colour = \"green\"", PLAIN);
    let out = hubopt(&["validate", s(&path)]);
    assert_eq!(code(&out), 3);
    let err = stderr(&out);
    assert!(err.contains("tiny.toml, line 21"), "{err}");
    assert!(err.contains("colour"), "{err}");
}

#[test]
fn series_length_mismatch_names_the_file() {
    let dir = TempDir::new().unwrap();
    let path = tiny(dir.path(), "", PLAIN);
    std::fs::write(dir.path().join("load.csv"), "t,load\n0,1.0\n1,2.0\n").unwrap();
    let out = hubopt(&["run", s(&path), "--out", s(&dir.path().join("out"))]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("load.csv"), "{}", stderr(&out));
}

#[test]
fn cap_and_price_together_are_rejected() {
    let dir = TempDir::new().unwrap();
    let path = tiny(dir.path(), "", "[[scenario]]\nname = \"both\"\nco2_cap = 0.0\nco2_price = 0.08\n");
    let out = hubopt(&["validate", s(&path)]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("line"), "{}", stderr(&out));
}

#[test]
fn presets_list_and_print() {
    let out = hubopt(&["presets"]);
    assert_eq!(code(&out), 0);
    for name in ["pccc", "dac", "electrolysis", "hvdc"] {
        assert!(stdout(&out).lines().any(|l| l.starts_with(name)), "{name}");
    }
    let out = hubopt(&["presets", "pccc", "--id", "scrubber", "--cluster", "BE"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("id = \"scrubber\""));
    assert!(text.contains("capex = 3150.0"));
    assert_eq!(code(&hubopt(&["presets", "fusion"])), 3);
}

#[test]
fn export_lp_writes_interchange_text() {
    let dir = TempDir::new().unwrap();
    let path = tiny(dir.path(), "", PLAIN);
    let out = hubopt(&["export-lp", s(&path)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let mps = stdout(&out);
    for section in ["NAME", "OBJSENSE", "ROWS", "COLUMNS", "RHS", "ENDATA"] {
        assert!(mps.contains(section), "{section}");
    }
    assert!(mps.contains("plant.cap"));
    let file = dir.path().join("tiny.lp");
    let out = hubopt(&["export-lp", s(&path), "--format", "lp", "-o", s(&file)]);
    assert_eq!(code(&out), 0);
    let lp = std::fs::read_to_string(&file).unwrap();
    assert!(lp.to_lowercase().contains("minimize"));
}

#[test]
fn run_writes_reports_and_they_repeat_byte_for_byte() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let out = hubopt(&["run", s(&two_hub()), "--out", s(&a)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("both_hubs"));
    assert_eq!(code(&hubopt(&["run", s(&two_hub()), "--out", s(&b)])), 0);
    let mut files = 0;
    for scenario in ["both_hubs", "greenland_only"] {
        for name in ["report.json", "capacities.csv", "costs.csv"] {
            let x = std::fs::read(a.join(scenario).join(name)).unwrap();
            let y = std::fs::read(b.join(scenario).join(name)).unwrap();
            assert_eq!(x, y, "{scenario}/{name}");
            files += 1;
        }
    }
    assert_eq!(std::fs::read(a.join("summary.txt")).unwrap(), std::fs::read(b.join("summary.txt")).unwrap());
    assert_eq!(files, 6);
}

#[test]
fn forced_hub_reports_no_excluded_capacity() {
    let dir = TempDir::new().unwrap();
    let out = hubopt(&["run", s(&two_hub()), "--scenario", "greenland_only", "--out", s(dir.path())]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let caps = std::fs::read_to_string(dir.path().join("greenland_only/capacities.csv")).unwrap();
    assert!(!caps.contains("_dz"), "{caps}");
    assert!(caps.contains("wind_gl"));
}

#[test]
fn output_directory_falls_back_to_environment() {
    let dir = TempDir::new().unwrap();
    let path = tiny(dir.path(), "", PLAIN);
    let out_dir = dir.path().join("from_env");
    let out = Command::new(env!("CARGO_BIN_EXE_hubopt"))
        .args(["run", s(&path)])
        .env("HUBOPT_OUT", &out_dir)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(out_dir.join("base/report.json").exists());
}

#[test]
fn infeasible_scenario_exits_with_four() {
    let dir = TempDir::new().unwrap();
    let path = tiny(dir.path(), "max_potential = 1.0", PLAIN);
    let out = hubopt(&["run", s(&path), "--out", s(&dir.path().join("out"))]);
    assert_eq!(code(&out), 4, "{}", stderr(&out));
    assert!(stdout(&out).to_lowercase().contains("infeasible"));
}

#[test]
fn unknown_scenario_is_a_config_error() {
    let out = hubopt(&["run", s(&two_hub()), "--scenario", "nowhere", "--out", "/nonexistent/never"]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("nowhere"));
}
