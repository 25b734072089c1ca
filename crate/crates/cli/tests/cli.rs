use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

fn qtorsion(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_qtorsion"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    if let Some(text) = stdin {
        child.stdin.take().unwrap().write_all(text.as_bytes()).unwrap();
    }
    drop(child.stdin.take());
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn gen(dir: &Path, name: &str, family: &str, lengths: Option<&str>) -> String {
    let mut args = vec!["gen", family];
    if let Some(l) = lengths {
        args.extend(["--lengths", l]);
    }
    let o = qtorsion(&args, None);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let path = dir.join(name);
    fs::write(&path, &o.stdout).unwrap();
    path.display().to_string()
}

#[test]
fn rigidity_of_unit_dirichlet_natural_interval() {
    let dir = tempfile::tempdir().unwrap();
    let j0 = gen(dir.path(), "path_DN.json", "path_DN", None);
    let o = qtorsion(&["rigidity", &j0], None);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "0.333333333333\n");
    let o = qtorsion(&["rigidity", &j0, "--precision", "4"], None);
    assert_eq!(stdout(&o), "0.3333\n");
}

#[test]
fn gen_lasso_matches_the_interchange_format() {
    let o = qtorsion(&["gen", "lasso", "--lengths", "1,2"], None);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["vertices"].as_array().unwrap().len(), 2);
    assert_eq!(v["edges"][1]["from"], v["edges"][1]["to"]);
    assert_eq!(v["edges"][1]["length"], 2.0);
}

#[test]
fn piped_torsion_equals_file_torsion() {
    let dir = tempfile::tempdir().unwrap();
    let file = gen(dir.path(), "stower.json", "stower:2,1", Some("0.3,1.7,0.9"));
    let from_file = qtorsion(&["torsion", &file], None);
    let generated = qtorsion(&["gen", "stower:2,1", "--lengths", "0.3,1.7,0.9"], None);
    let piped = qtorsion(&["torsion", "-"], Some(&stdout(&generated)));
    assert!(from_file.status.success() && piped.status.success());
    assert_eq!(from_file.stdout, piped.stdout);
}

#[test]
fn star_audit_has_no_violations() {
    let dir = tempfile::tempdir().unwrap();
    let star = gen(dir.path(), "star3.json", "star:3", None);
    let o = qtorsion(&["bounds", &star, "--h", "0.01"], None);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let table = stdout(&o);
    assert!(!table.contains("Violated") && !table.contains("Error"));
    assert!(table.lines().any(|l| l.starts_with("polya") && l.ends_with("Holds")));

    let o = qtorsion(&["bounds", &star, "--h", "0.01", "--json"], None);
    let records: Vec<serde_json::Value> = serde_json::from_slice(&o.stdout).unwrap();
    assert!(records.iter().any(|r| r["name"] == "makai_probe" && r["experimental"] == true));
}

#[test]
fn batch_and_random_audits() {
    let dir = tempfile::tempdir().unwrap();
    gen(dir.path(), "a.json", "lasso", Some("1,2"));
    gen(dir.path(), "b.json", "caterpillar:2", Some("0.5,1"));
    let o = qtorsion(&["bounds", "--batch", dir.path().to_str().unwrap(), "--json"], None);
    assert_eq!(o.status.code(), Some(0));
    let entries: Vec<serde_json::Value> = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(entries.len(), 2);
    assert!(entries[1]["source"].as_str().unwrap().ends_with("b.json"));

    let o = qtorsion(&["bounds", "--random", "8", "--seed", "3"], None);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("# 8 graphs, 0 with a violated record"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(qtorsion(&["rigidity", "/nonexistent.json"], None).status.code(), Some(1));
    assert_eq!(qtorsion(&["nonsense"], None).status.code(), Some(1));
    assert_eq!(qtorsion(&["gen", "hexagon"], None).status.code(), Some(1));
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"vertices":[{"id":"a","bc":"natural"}],"edges":[]}"#).unwrap();
    let o = qtorsion(&["rigidity", bad.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(!o.stderr.is_empty());
    assert_eq!(qtorsion(&["--help"], None).status.code(), Some(0));
}

#[test]
fn grad_check_optimize_spectrum_heat() {
    let dir = tempfile::tempdir().unwrap();
    let lasso = gen(dir.path(), "lasso.json", "lasso", Some("1,1"));
    let o = qtorsion(&["grad-check", &lasso, "--json"], None);
    let rows: Vec<serde_json::Value> = serde_json::from_slice(&o.stdout).unwrap();
    assert!((rows[0]["analytic"].as_f64().unwrap() - 4.0).abs() < 1e-12);
    let ratio = rows[0]["halving_ratio"].as_f64().unwrap();
    assert!((3.5..=4.5).contains(&ratio));

    let star = gen(dir.path(), "star.json", "star:3", Some("1.2,1,0.8"));
    let o = qtorsion(&["optimize", &star, "--objective", "max"], None);
    assert!(o.status.success());
    let lines: Vec<serde_json::Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(lines.len() > 1);
    assert!(lines.windows(2).all(|w| w[1]["T"].as_f64() > w[0]["T"].as_f64()));

    let o = qtorsion(&["spectrum", &star, "--modes", "2", "--json"], None);
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["eigenvalues"].as_array().unwrap().len(), 2);

    let out = dir.path().join("heat.json");
    let o = qtorsion(&["heat-check", &lasso, "--modes", "3", "--json", "--out", out.to_str().unwrap()], None);
    assert!(o.status.success() && o.stdout.is_empty());
    let heat: serde_json::Value = serde_json::from_str(&fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(heat["heat"]["partial_sums"].as_array().unwrap().len(), 3);
}
