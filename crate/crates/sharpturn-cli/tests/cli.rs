use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sharpturn"))
        .args(args)
        .env_remove("SHARPTURN_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Data rows without the comment line, split into fields.
fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn one_turn_starts_at_the_closed_form() {
    let o = run(&["one-turn", "--beta", "1.0471975512"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("# {"));
    assert_eq!(text.lines().nth(1), Some("nu,f_closed,f_matching,T,theta"));
    let first = &rows(&text)[0];
    let f: f64 = first[1].parse().unwrap();
    assert!((f - 0.1972246).abs() < 1e-7, "{f}");
    assert_eq!(first[1], first[2]);
}

#[test]
fn tunnel_first_switch_is_to_local4() {
    let o = run(&["tunnel", "--alpha", "0.1047197551", "--beta", "1.0471975512"]);
    assert!(o.status.success());
    let r = rows(&stdout(&o));
    let i = r.iter().rposition(|row| row[3] == "true").expect("a switch");
    assert_eq!(r[i][2], "local4");
    assert_eq!(r[i + 1][2], "global");
}

#[test]
fn validate_passes_on_defaults() {
    let o = run(&["validate"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["passed"], true);
    assert_eq!(doc["criteria"].as_array().unwrap().len(), 9);
}

#[test]
fn output_is_reproducible_and_independent_of_threads() {
    let a = run(&["boundary", "--grid", "60", "--threads", "1"]);
    let b = run(&["boundary", "--grid", "60", "--threads", "1"]);
    let c = run(&["boundary", "--grid", "60", "--threads", "4"]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(rows(&stdout(&a)), rows(&stdout(&c)));
    let seeded = ["oracle", "--grid", "2", "--phases", "200", "--seed", "11"];
    assert_eq!(run(&seeded).stdout, run(&seeded).stdout);
}

#[test]
fn config_errors_exit_with_2() {
    assert_eq!(run(&["one-turn", "--grid", "1"]).status.code(), Some(2));
    assert_eq!(run(&["tunnel", "--physical-units"]).status.code(), Some(2));
    assert_eq!(run(&["nonsense"]).status.code(), Some(2));
    let o = run(&["one-turn", "--config", "/nonexistent/config.toml"]);
    assert_eq!(o.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"], "ConfigError");
}

#[test]
fn solver_errors_exit_with_1_and_json() {
    let o = run(&["sphaleron", "--b", "0.5"]);
    assert_eq!(o.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"], "SmallQ");
}

#[test]
fn files_and_physical_units() {
    let dir = std::env::temp_dir().join(format!("sharpturn-cli-{}", std::process::id()));
    let d = dir.to_str().unwrap();
    let o = run(&["tunnel", "--grid", "200", "--out-dir", d]);
    assert!(o.status.success());
    let glued = std::fs::read_to_string(dir.join("tunnel_glued.csv")).unwrap();
    let branches = std::fs::read_to_string(dir.join("tunnel_branches.csv")).unwrap();
    assert_eq!(branches.lines().nth(1), Some("E,tau,delta_T,F0,T,branch"));

    let scaled = run(&["tunnel", "--grid", "200", "--physical-units", "--L", "10"]);
    let (r1, r2) = (rows(&glued), rows(&stdout(&scaled)));
    assert_eq!(r1.len(), r2.len());
    for (a, b) in r1.iter().zip(&r2) {
        for k in 0..2 {
            let (x, y): (f64, f64) = (a[k].parse().unwrap(), b[k].parse().unwrap());
            assert!((y / (100.0 * x) - 1.0).abs() < 1e-10);
        }
    }
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn json_mirror_and_config_file() {
    let path = std::env::temp_dir().join(format!("sharpturn-cfg-{}.toml", std::process::id()));
    std::fs::write(&path, "beta = 1.0\ngrid = 3\nformat = \"json\"\n").unwrap();
    let o = run(&["one-turn", "--config", path.to_str().unwrap(), "--grid", "5"]);
    std::fs::remove_file(&path).unwrap();
    assert!(o.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["config"]["beta"], 1.0);
    assert_eq!(doc["rows"].as_array().unwrap().len(), 5);
    assert!(doc["rows"][0]["theta"].is_null());
}
