use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nhlab_cli::checks::{ANCHOR_BENENTI_LAWS, ANCHOR_ROD_ENERGY, ANCHOR_ROD_MOMENTUM};
use nhlab_cli::templates;
use serde_json::Value;

fn nhlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nhlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_template(dir: &Path, name: &str) -> PathBuf {
    let path = dir.join(format!("{name}.toml"));
    std::fs::write(&path, templates::find(name).unwrap().source).unwrap();
    path
}

fn run_in(dir: &Path, config: &Path, extra: &[&str]) -> (Output, PathBuf) {
    let out = dir.join("out");
    let mut args = vec!["run", config.to_str().unwrap(), "--output-dir", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    (nhlab(&args), out)
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn list_shows_templates_with_anchors() {
    let o = nhlab(&["list"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    for name in ["benenti-free", "rod-energy-conservation", "rod-translation-momentum"] {
        assert!(text.contains(name), "{name} missing");
    }
    let line = text
        .lines()
        .find(|l| l.starts_with("rod-translation-momentum"))
        .unwrap();
    assert!(line.contains(ANCHOR_ROD_MOMENTUM));
}

#[test]
fn benenti_free_passes_three_laws() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_template(tmp.path(), "benenti-free");
    let (o, out) = run_in(tmp.path(), &cfg, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = report(&out);
    let laws: Vec<&Value> = r["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["kind"] == "conservation_law")
        .collect();
    assert_eq!(laws.len(), 3);
    for c in laws {
        assert_eq!(c["anchor"], ANCHOR_BENENTI_LAWS);
        assert_eq!(c["pass"], true);
    }
    let header = std::fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert_eq!(
        header.lines().next().unwrap(),
        "t,q1,q2,q3,q4,v1,v2,v3,v4,lambda1,phi_residual1"
    );
    assert_eq!(header.lines().count(), 10_002);
}

#[test]
fn rod_energy_report_and_csv_layout() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_template(tmp.path(), "rod-energy-conservation");
    let (o, out) = run_in(tmp.path(), &cfg, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = report(&out);
    let drift = r["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["kind"] == "energy_drift")
        .expect("energy drift check");
    assert_eq!(drift["anchor"], ANCHOR_ROD_ENERGY);
    let traj = std::fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert_eq!(
        traj.lines().next().unwrap(),
        "t,node,s,x,y,theta,theta_dot,lambda,mu,energy_density"
    );
    let mom = std::fs::read_to_string(out.join("momentum.csv")).unwrap();
    assert_eq!(mom.lines().next().unwrap(), "check,t,max_abs,l2");
}

#[test]
fn zero_step_is_an_input_error() {
    let tmp = tempfile::tempdir().unwrap();
    let text = templates::find("benenti-free").unwrap().source.replace("h = 1e-3", "h = 0.0");
    let cfg = tmp.path().join("bad.toml");
    std::fs::write(&cfg, text).unwrap();
    let (o, _) = run_in(tmp.path(), &cfg, &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("integration.h must be positive"), "{}", stderr(&o));
}

#[test]
fn misspelled_key_is_named() {
    let tmp = tempfile::tempdir().unwrap();
    let text = templates::find("benenti-free")
        .unwrap()
        .source
        .replace("[params]\nm = 1.0", "[params]\nm = 1.0\n[initial_state]\nv = [1.0]");
    let cfg = tmp.path().join("bad.toml");
    std::fs::write(&cfg, text).unwrap();
    let (o, _) = run_in(tmp.path(), &cfg, &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("initial_state"), "{}", stderr(&o));

    let text = templates::find("rod-energy-conservation")
        .unwrap()
        .source
        .replace("K = 1.0", "kappa = 1.0");
    std::fs::write(&cfg, text).unwrap();
    let (o, _) = run_in(tmp.path(), &cfg, &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("params.kappa"), "{}", stderr(&o));
}

#[test]
fn missing_file_is_an_input_error() {
    let o = nhlab(&["run", "/nonexistent/scenario.toml"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn failed_check_exits_two_and_report_stays_honest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_template(tmp.path(), "rod-translation-momentum");
    let (o, out) = run_in(tmp.path(), &cfg, &["--tolerance-scale", "1e-6"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let r = report(&out);
    assert_eq!(r["all_passed"], false);
    assert_eq!(r["environment"]["tolerance_scale"], 1e-6);
    // recompute every verdict from the stored series
    let mom = std::fs::read_to_string(out.join("momentum.csv")).unwrap();
    for c in r["checks"].as_array().unwrap() {
        let name = c["name"].as_str().unwrap();
        let max = mom
            .lines()
            .skip(1)
            .filter(|l| l.split(',').next() == Some(name))
            .map(|l| l.split(',').nth(2).unwrap().parse::<f64>().unwrap())
            .fold(0.0, f64::max);
        assert_eq!(max, c["max"].as_f64().unwrap(), "{name}");
        assert_eq!(c["pass"].as_bool().unwrap(), max <= c["tolerance"].as_f64().unwrap());
    }
}

#[test]
fn seed_flag_and_json_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = templates::find("benenti-symmetry-discovery").unwrap().config().unwrap();
    let path = tmp.path().join("scenario.json");
    std::fs::write(&path, serde_json::to_string(&cfg).unwrap()).unwrap();
    let (o, out) = run_in(tmp.path(), &path, &["--seed", "11"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = report(&out);
    assert_eq!(r["environment"]["seed"], 11);
    assert_eq!(r["checks"][0]["details"]["dim"], 3);
}

#[test]
fn show_prints_template_source() {
    let o = nhlab(&["show", "benenti-forced"]);
    assert!(o.status.success());
    assert_eq!(
        String::from_utf8(o.stdout).unwrap(),
        templates::find("benenti-forced").unwrap().source
    );
    assert_eq!(nhlab(&["show", "no-such-template"]).status.code(), Some(1));
}

#[test]
fn singular_start_is_a_runtime_error() {
    let tmp = tempfile::tempdir().unwrap();
    let text = templates::find("benenti-free")
        .unwrap()
        .source
        .replace("v = [1.0, 0.5, 2.0, 1.0]", "v = [0.0, 0.0, 0.0, 0.0]");
    let cfg = tmp.path().join("rest.toml");
    std::fs::write(&cfg, text).unwrap();
    let (o, out) = run_in(tmp.path(), &cfg, &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("singular"), "{}", stderr(&o));
    assert!(out.join("trajectory.csv").exists());
}
