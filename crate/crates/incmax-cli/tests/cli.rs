use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name).display().to_string()
}

fn incmax(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_incmax")).args(args).env_remove("INCMAX_PRECISION").output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn run_to(dir: &Path, name: &str, args: &[&str]) -> (Output, String) {
    let path: PathBuf = dir.join(name);
    let mut all: Vec<&str> = args.to_vec();
    let p = path.display().to_string();
    all.extend(["--out", &p]);
    let o = incmax(&all);
    let body = std::fs::read_to_string(&path).unwrap_or_default();
    (o, body)
}

#[test]
fn roots_prints_thresholds() {
    let o = incmax(&["roots"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["phi_plus_one"].as_f64().unwrap() - 2.618033988749895).abs() < 1e-12);
    let rs = v["rho_star"].as_f64().unwrap();
    assert!((2.245..=2.247).contains(&rs));
    assert!(String::from_utf8_lossy(&o.stderr).contains("phi+1 = 2.618033"));
}

#[test]
fn greedy_on_identity_fixture_is_competitive() {
    let dir = tempfile::tempdir().unwrap();
    let (o, csv) = run_to(dir.path(), "trace.csv", &["greedy", "--instance", &fixture("identity.json"), "--rho", "2.618034", "--c1", "1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(csv.starts_with("i,c_i,d(c_i),v(c_i),p(c_i),prefix_sum\n"));
    let sizes: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(sizes.windows(2).all(|w| w[1] >= 2.618 * w[0]));
    assert_eq!(String::from_utf8_lossy(&o.stdout).lines().count(), 1);
}

#[test]
fn greedy_from_low_density_start_fails_verification() {
    let o = incmax(&["greedy", "--instance", &fixture("identity.json"), "--rho", "2.618034", "--c1", "100000", "--horizon", "1e9"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn yao_verify_reference_certificate() {
    let o = incmax(&["yao", "verify", "--cert", &fixture("n10.json")]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    for class in ["bounded", "generous"] {
        assert!(v[class]["rho_f64"].as_f64().unwrap() >= 1.447 - 1e-3);
    }
}

#[test]
fn yao_verify_rejects_overclaim() {
    let dir = tempfile::tempdir().unwrap();
    let cert = std::fs::read_to_string(fixture("n10.json")).unwrap().replace("\"1.447\"", "\"1.6\"");
    let path = dir.path().join("over.json");
    std::fs::write(&path, cert).unwrap();
    assert_eq!(code(&incmax(&["yao", "verify", "--cert", path.to_str().unwrap()])), 2);
}

#[test]
fn observation_solution_checks_exactly() {
    let pl = fixture("observation_pl.json");
    let ok = incmax(&["check", "--instance", &pl, "--rho", "57/40", "--solution", "40/57,4,644/57", "--exact"]);
    assert_eq!(code(&ok), 0);
    let bad = incmax(&["check", "--instance", &pl, "--rho", "1.4", "--solution", "40/57,4,644/57", "--exact"]);
    assert_eq!(code(&bad), 2);
    let prof = incmax(&["profile", "--instance", &fixture("observation.json")]);
    assert_eq!(code(&prof), 0);
    assert!(String::from_utf8_lossy(&prof.stderr).contains("969/670"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&incmax(&["greedy", "--c1", "1"])), 1);
    assert_eq!(code(&incmax(&["greedy", "--rho", "x", "--c1", "1"])), 1);
    assert_eq!(code(&incmax(&["nonsense"])), 1);
    assert_eq!(code(&incmax(&["roots", "--format", "csv"])), 1);
    assert_eq!(code(&incmax(&["reduce", "--instance", "/nonexistent.json"])), 1);
    assert_eq!(code(&incmax(&["--help"])), 0);
    let bad_env = Command::new(env!("CARGO_BIN_EXE_incmax"))
        .args(["recur", "--variant", "b", "--rho", "2.1"])
        .env("INCMAX_PRECISION", "lots")
        .output()
        .unwrap();
    assert_eq!(code(&bad_env), 1);
}

#[test]
fn precision_modes_agree_on_turn() {
    let run = |p: &str| {
        Command::new(env!("CARGO_BIN_EXE_incmax"))
            .args(["recur", "--variant", "b", "--rho", "1.9", "--steps", "60"])
            .env("INCMAX_PRECISION", p)
            .output()
            .unwrap()
    };
    let a = run("f64");
    let b = run("200");
    assert_eq!(code(&a), 0);
    assert_eq!(code(&b), 0);
    let neg = |o: &Output| String::from_utf8_lossy(&o.stderr).split("first negative at ").nth(1).unwrap().split(',').next().unwrap().to_string();
    assert_eq!(neg(&a), neg(&b));
}

#[test]
fn artifacts_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let obs = fixture("observation.json");
    let cases: Vec<Vec<&str>> = vec![
        vec!["rand", "run", "--instance", &obs, "--seed", "7"],
        vec!["yao", "search", "--n", "5", "--budget", "100", "--seed", "4"],
        vec!["rand", "expectation", "--to", "30"],
        vec!["reduce", "--instance", "MATCHING"],
    ];
    let matching = fixture("matching.json");
    for (i, case) in cases.iter().enumerate() {
        let case: Vec<&str> = case.iter().map(|a| if *a == "MATCHING" { matching.as_str() } else { a }).collect();
        let (o1, a) = run_to(dir.path(), &format!("a{i}"), &case);
        let (o2, b) = run_to(dir.path(), &format!("b{i}"), &case);
        assert_eq!(code(&o1), 0, "{case:?}: {}", String::from_utf8_lossy(&o1.stderr));
        assert_eq!(code(&o2), 0);
        assert!(!a.is_empty());
        assert_eq!(a, b, "{case:?}");
    }
}

#[test]
fn golden_expectation_head() {
    let o = incmax(&["rand", "expectation", "--r", "5", "--to", "3"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "C,expected_ratio_lower_bound");
    // C = 1: c_0 = m on [log_5 m, log_5 (m+1)), value 1/m
    let ln5 = 5f64.ln();
    let hand: f64 = (1..=4).map(|m: i32| (((m + 1) as f64).ln() - (m as f64).ln()) / ln5 / m as f64).sum();
    let got: f64 = rows[1].split(',').nth(1).unwrap().parse().unwrap();
    assert!((got - hand).abs() < 1e-12);
}

#[test]
fn csv_converts_to_json_rows() {
    let o = incmax(&["rand", "expectation", "--to", "2", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 2);
    assert_eq!(v[1]["C"], "2");
}

#[test]
fn reduce_and_discretize_write_separable_json() {
    for fx in ["matching.json", "coverage.json", "modular.json"] {
        let o = incmax(&["reduce", "--instance", &fixture(fx)]);
        assert_eq!(code(&o), 0, "{fx}");
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        assert!(!v["densities"].as_array().unwrap().is_empty());
    }
    let o = incmax(&["discretize", "--instance", &fixture("observation_pl.json"), "--n", "1", "--count", "16"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["densities"][2], "17/40");
}

#[test]
fn exclusion_chain_defeats_default_starts() {
    let o = incmax(&["exclude", "--rho", "2.2"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("4 of 4"));
}

#[test]
fn detlb_certifies_infeasibility() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let (o, cert) = run_to(dir.path(), "cert.json", &["detlb", "--rho", "2.1", "--trace", trace.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&cert).unwrap();
    assert_eq!(v["infeasible"], true);
    assert!(std::fs::read_to_string(trace).unwrap().starts_with("n,t_n,1/t_n\n"));
}

#[test]
fn randomized_bound_grid_passes() {
    let o = incmax(&["rand", "bound", "--k-max", "5"]);
    assert_eq!(code(&o), 0);
}
