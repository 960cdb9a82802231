use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn workdir(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli").join(name);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn frechet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_frechet")).args(args).output().unwrap()
}

fn put(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Rows of a CSV document after the `#` header line.
fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(2).map(|l| l.split(',').map(|s| s.trim_matches('"').to_string()).collect()).collect()
}

#[test]
#[allow(clippy::approx_constant)]
fn comonotone_bound_at_k_4() {
    let out = frechet(&["approx-copula", "--k", "4"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.lines().nth(1).unwrap() == "k,d_bl,bound");
    let row = &csv_rows(&text)[0];
    let (d, bound): (f64, f64) = (row[1].parse().unwrap(), row[2].parse().unwrap());
    assert!(d <= 0.7071 && (bound - 0.7071067811865476).abs() < 1e-15, "{row:?}");
}

#[test]
fn outputs_embed_version_and_config_hash() {
    let out = frechet(&["--seed", "3", "brownian-check", "--points", "2", "--n-steps", "1000"]);
    let first = stdout(&out).lines().next().unwrap().to_string();
    assert!(first.starts_with(&format!("# frechet {} config ", env!("CARGO_PKG_VERSION"))), "{first}");
    let json = frechet(&["--seed", "3", "--format", "json", "brownian-check", "--points", "2", "--n-steps", "1000"]);
    let doc: Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(doc["version"], env!("CARGO_PKG_VERSION"));
    // the output format is not part of the experiment
    assert_eq!(first.rsplit(' ').next().unwrap(), doc["config_hash"].as_str().unwrap());
    // a different seed is a different config
    let other = frechet(&["--seed", "4", "--format", "json", "brownian-check", "--points", "2", "--n-steps", "1000"]);
    let other: Value = serde_json::from_slice(&other.stdout).unwrap();
    assert_ne!(doc["config_hash"], other["config_hash"]);
}

#[test]
fn same_seed_same_bytes() {
    let dir = workdir("same-seed");
    let prior = put(&dir, "prior.json", r#"{"family":"tensor","levels":2,"law":"rademacher"}"#);
    let a = frechet(&["--seed", "8", "sample-data", "--prior", &prior, "--n", "40"]);
    let b = frechet(&["--seed", "8", "sample-data", "--prior", &prior, "--n", "40"]);
    let c = frechet(&["--seed", "9", "sample-data", "--prior", &prior, "--n", "40"]);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn exact_and_importance_sampling_agree() {
    let dir = workdir("methods");
    let prior = put(&dir, "prior.json", r#"{"family":"checkerboard","k":3,"perms":[[0,1,2],[2,1,0],[1,0,2],[0,2,1]],"alpha":[1,0.5,2,1]}"#);
    let data = dir.join("data.csv");
    let status = frechet(&["--seed", "21", "sample-data", "--prior", &prior, "--n", "7", "--out", data.to_str().unwrap()]).status;
    assert!(status.success());
    let data = data.to_str().unwrap();
    let exact = frechet(&["posterior", "--prior", &prior, "--data", data, "--method", "exact", "--format", "json"]);
    let is = frechet(&["posterior", "--prior", &prior, "--data", data, "--method", "is", "--particles", "100000", "--format", "json"]);
    assert!(exact.status.success() && is.status.success());
    let find = |doc: &Value, q: &str| -> (f64, f64) {
        let row = doc["rows"].as_array().unwrap().iter().find(|r| r["quantity"] == q).unwrap();
        (row["mean"].as_f64().unwrap(), row["se"].as_f64().unwrap())
    };
    let (e, i): (Value, Value) = (serde_json::from_slice(&exact.stdout).unwrap(), serde_json::from_slice(&is.stdout).unwrap());
    let (pe, _) = find(&e, "P([0,0.5]x[0,0.5])");
    let (pi, se) = find(&i, "P([0,0.5]x[0,0.5])");
    assert!((pe - pi).abs() <= 3.0 * se, "{pe} vs {pi} +- {se}");
}

#[test]
fn exit_codes() {
    let dir = workdir("exit-codes");
    // invalid config
    let bad = put(&dir, "bad.json", r#"{"experiment":{"kind":"posterior","prior":{"family":"checkerboard"}}}"#);
    assert_eq!(frechet(&["run", "--config", &bad]).status.code(), Some(2));
    let unknown = put(&dir, "unknown.json", r#"{"family":"nonesuch"}"#);
    assert_eq!(frechet(&["sample-prior", "--prior", &unknown]).status.code(), Some(2));
    assert_eq!(frechet(&["sample-prior", "--prior", "/nonexistent/prior.json"]).status.code(), Some(2));
    // zero evidence: the observation misses the only permutation's support
    let prior = put(&dir, "identity.json", r#"{"family":"checkerboard","k":2,"perms":[[0,1]],"alpha":1}"#);
    let data = put(&dir, "data.csv", "x,y\n0.1,0.9\n");
    let out = frechet(&["posterior", "--prior", &prior, "--data", &data, "--method", "exact"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("zero evidence"));
    // a failed check: refining this coupling from k = 1 to k = 2 moves away from it
    let sigma = [4usize, 1, 6, 5, 0, 2, 3, 7];
    let mut mass = vec![vec![0.0; 8]; 8];
    for (j, s) in sigma.iter().enumerate() {
        mass[j][*s] = 0.125;
    }
    let grid = put(&dir, "perm.json", &serde_json::json!({"k_x": 8, "k_y": 8, "mass": mass}).to_string());
    let out = frechet(&["approx-copula", "--input", &grid, "--k", "1,2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.starts_with(b"# frechet"), "results are still written");
}

#[test]
fn report_config_echo_reruns() {
    let dir = workdir("report");
    let prior = put(&dir, "prior.json", r#"{"family":"checkerboard","k":2,"alpha":2}"#);
    let report = dir.join("report.json");
    let first = frechet(&[
        "--seed", "17", "--report", report.to_str().unwrap(), "posterior", "--prior", &prior, "--data",
        &put(&dir, "d.csv", "x,y\n0.2,0.3\n0.7,0.6\n"), "--method", "is", "--particles", "2000",
    ]);
    assert!(first.status.success());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert!(doc["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));
    assert!(doc["elapsed_ms"].as_f64().unwrap() >= 0.0);
    // the echo is self-contained: prior and data are inlined
    let echo = &doc["config"];
    assert!(echo["experiment"]["prior"].is_object() && echo["experiment"]["data"].is_array());
    let mut echo = echo.clone();
    echo.as_object_mut().unwrap().remove("report");
    let config = put(&dir, "echo.json", &echo.to_string());
    let again = frechet(&["run", "--config", &config]);
    assert_eq!(first.stdout, again.stdout);
}

#[test]
fn generated_data_matches_sample_data() {
    let dir = workdir("generate");
    let prior = put(&dir, "prior.json", r#"{"family":"checkerboard","k":3,"perms":"all"}"#);
    let inline = r#"{"family":"checkerboard","k":3,"perms":"all"}"#;
    let config = put(
        &dir,
        "config.json",
        &format!(r#"{{"seed":4,"experiment":{{"kind":"posterior","prior":{inline},"data":{{"generate":{{"prior":{inline},"n":6}}}},"method":"exact"}}}}"#),
    );
    let data = dir.join("data.csv");
    assert!(frechet(&["--seed", "4", "sample-data", "--prior", &prior, "--n", "6", "--out", data.to_str().unwrap()]).status.success());
    let from_file = frechet(&["--seed", "4", "posterior", "--prior", &prior, "--data", data.to_str().unwrap(), "--method", "exact"]);
    let generated = frechet(&["run", "--config", &config]);
    // same numbers, different config hashes
    assert_eq!(csv_rows(&stdout(&from_file)), csv_rows(&stdout(&generated)));
}

#[test]
fn gamma_mu_subcommands() {
    let dir = workdir("gamma-mu");
    let data = put(&dir, "data.csv", "x,y\n0.5,0.1\n0.5,0.3\n0.5,0.8\n");
    let a = put(&dir, "a.json", r#"{"intervals":[[0.0,0.5]]}"#);
    let b = put(&dir, "b.json", r#"{"intervals":[[0.0,0.5]]}"#);
    let out = frechet(&["gamma-mu", "predictive", "--c", "2", "--data", &data, "--A", &a, "--B", &b]);
    assert!(out.status.success());
    // mu(A) (c nu(B) + #{Y in B}) / (c + n) = 0.5 (1 + 2) / 5
    let value: f64 = csv_rows(&stdout(&out))[0][4].parse().unwrap();
    assert!((value - 0.3).abs() < 1e-12, "{value}");

    let out = frechet(&["gamma-mu", "cdf-law", "--copula", "product", "--c", "2", "--x", "0.5", "--y", "0.5", "--a", "0.1,0.25,0.5"]);
    assert!(out.status.success());
    let rows = csv_rows(&stdout(&out));
    // F = G(y) / 2 with G(y) ~ Beta(1, 1): P(F <= a) = 2a
    for (row, want) in rows.iter().zip([0.2, 0.5, 1.0]) {
        let (law, post): (f64, f64) = (row[1].parse().unwrap(), row[2].parse().unwrap());
        assert!((law - want).abs() < 1e-12 && law == post, "{row:?}");
    }
}
