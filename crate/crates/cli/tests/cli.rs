use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use modineq::algebra::leq;
use modineq::inequalities::certify_equality;
use modineq::TolerancePolicy;
use modineq_cli::instance_file::load;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_modineq"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn write_instances(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, format!(r#"{{"format":"modineq-instances","version":1,"instances":[{body}]}}"#)).unwrap();
    p
}

#[test]
fn gen_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let o = run(&["gen", "--seed", "1", "--dims", "2", "--count", "3", "--out", path_str(p)]);
        assert_eq!(code(&o), 0);
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let c = run(&["gen", "--seed", "2", "--dims", "2", "--count", "3"]);
    assert_ne!(c.stdout, fs::read(&a).unwrap());
}

#[test]
fn generated_equality_instance_is_certified() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("eq.json");
    let o = run(&["gen", "--kind", "equality", "--ranks", "1,1,1", "--dims", "3", "--out", path_str(&p)]);
    assert_eq!(code(&o), 0);
    let tol = TolerancePolicy::default();
    let inst = &load(&p, &tol).unwrap()[0];
    let cert = certify_equality(inst.get("eta").unwrap(), inst.get("phi").unwrap(), &tol).unwrap();
    assert!(cert.verdict);

    let v = run(&["verify", path_str(&p), "--format", "csv"]);
    assert_eq!(code(&v), 0);
    let (header, rows) = csv_rows(&stdout(&v));
    let (gap, scale) = (header.iter().position(|h| h == "gap").unwrap(), header.iter().position(|h| h == "scale").unwrap());
    for r in rows.iter().filter(|r| r[1] == "main") {
        let g: f64 = r[gap].parse().unwrap();
        let sc: f64 = r[scale].parse().unwrap();
        assert!(g.abs() <= 1e-9 * sc);
    }
}

#[test]
fn generated_quadruples_are_ordered() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("q.json");
    let o = run(&["gen", "--kind", "ordered-quadruple", "--count", "10", "--seed", "9", "--out", path_str(&p)]);
    assert_eq!(code(&o), 0);
    let tol = TolerancePolicy::default();
    for inst in load(&p, &tol).unwrap() {
        assert!(leq(inst.get("phi1").unwrap(), inst.get("phi2").unwrap(), &tol).unwrap());
        assert!(leq(inst.get("eta").unwrap(), inst.get("psi").unwrap(), &tol).unwrap());
    }
    assert_eq!(code(&run(&["verify", path_str(&p)])), 0);
}

#[test]
fn equal_functionals_give_zero_gaps() {
    let dir = tempfile::tempdir().unwrap();
    let block = r#"[{"re":[[0.6,0.1],[0.1,0.4]],"im":[[0,0.2],[-0.2,0]]}]"#;
    let p = write_instances(dir.path(), "same.json", &format!(r#"{{"id":"same","blocks":[2],"functionals":{{"eta":{block},"phi":{block}}}}}"#));
    let v = run(&["verify", path_str(&p), "--s-grid", "0,0.5,1"]);
    assert_eq!(code(&v), 0);
    let (header, rows) = csv_rows(&stdout(&v));
    let gap = header.iter().position(|h| h == "gap").unwrap();
    for r in rows.iter().filter(|r| r[1] == "main" || r[1] == "corollary") {
        assert!(r[gap].parse::<f64>().unwrap().abs() <= 1e-14, "{r:?}");
    }
}

#[test]
fn thousand_instance_batch_passes_with_summary() {
    let dir = tempfile::tempdir().unwrap();
    let summary = dir.path().join("summary.json");
    let out = dir.path().join("rows.csv");
    let o = run(&[
        "verify", "--seed", "42", "--count", "1000", "--no-continuity", "--out", path_str(&out), "--summary", path_str(&summary),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&summary).unwrap()).unwrap();
    assert_eq!(doc["seed"], 42);
    assert_eq!(doc["summary"]["failures"], 0);
    assert_eq!(doc["results"].as_array().unwrap().len(), 1000 * 19 * 2);
    let first = &doc["results"][0];
    for key in ["id", "claim", "s", "lhs", "rhs", "gap", "pass"] {
        assert!(first.get(key).is_some(), "missing {key}");
    }
    let text = fs::read_to_string(&out).unwrap();
    assert!(!text.contains('\r'));
    assert_eq!(text.lines().count(), 1 + 1000 * 19 * 2);
}

#[test]
fn broken_equality_claim_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_instances(
        dir.path(),
        "fake.json",
        r#"{"id":"fake","blocks":[2],"functionals":{"eta":[{"re":[[0.7,0.2],[0.2,0.3]]}],"phi":[{"re":[[0.5,0],[0,0.5]]}]},"metadata":{"kind":"equality"}}"#,
    );
    let o = run(&["verify", path_str(&p)]);
    assert_eq!(code(&o), 1);
    let (_, rows) = csv_rows(&stdout(&o));
    assert!(rows.iter().any(|r| r[1] == "equality_gap" && r[7] == "false"));
}

#[test]
fn input_errors_exit_two_and_name_the_location() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\n\"format\": \"modineq-instances\",\n\"version\": 1,\n\"instances\": [,]\n}\n").unwrap();
    let o = run(&["verify", path_str(&bad)]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.json:4:"), "{err}");

    let asym = write_instances(dir.path(), "asym.json", r#"{"blocks":[2],"functionals":{"phi":[{"re":[[1,0.5],[0,1]]}]}}"#);
    let o = run(&["verify", path_str(&asym)]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("not Hermitian"));

    assert_eq!(code(&run(&["verify", "--s-grid", "0.5,1.5"])), 2);
    assert_eq!(code(&run(&["gen", "--dims", "0"])), 2);
    assert_eq!(code(&run(&["gen", "--count", "0"])), 2);
    assert_eq!(code(&run(&["nonsense"])), 2);
}

#[test]
fn sweep_matches_commuting_power_sums() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = ([0.2, 0.5, 0.3], [0.6, 0.1, 0.0]);
    let diag = |v: [f64; 3]| format!("[{{\"re\":[[{},0,0],[0,{},0],[0,0,{}]]}}]", v[0], v[1], v[2]);
    let p = write_instances(dir.path(), "c.json", &format!(r#"{{"blocks":[3],"functionals":{{"eta":{},"phi":{}}}}}"#, diag(a), diag(b)));
    let o = run(&["sweep", path_str(&p), "--resolution", "5"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let (header, rows) = csv_rows(&text);
    assert_eq!(header, ["s", "overlap", "main_lhs", "main_gap", "corollary_gap"]);
    assert_eq!(rows.len(), 5);
    // pseudo-power convention: 0^0 = 0
    let f = |s: f64| a.iter().zip(&b).filter(|(x, y)| **x > 0.0 && **y > 0.0).map(|(x, y)| x.powf(s) * y.powf(1.0 - s)).sum::<f64>();
    // eta(1) - (eta - phi)_+(1) = sum min(a, b)
    let lhs: f64 = a.iter().zip(&b).map(|(x, y)| x.min(*y)).sum();
    let l1: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum();
    let mass: f64 = a.iter().chain(&b).sum();
    for r in &rows {
        let v: Vec<f64> = r.iter().map(|x| x.parse().unwrap()).collect();
        assert!((v[1] - f(v[0])).abs() < 1e-14, "{r:?}");
        assert!((v[2] - lhs).abs() < 1e-14);
        assert!((v[3] - (f(v[0]) - lhs)).abs() < 1e-14);
        assert!((v[4] - (2.0 * f(v[0]) - (mass - l1))).abs() < 1e-14);
    }
    // every field carries 17 significant digits
    assert_eq!(rows[2][0], "5.0000000000000000e-1");
}

#[test]
fn chernoff_classical_pair_matches_scalar_minimum() {
    let dir = tempfile::tempdir().unwrap();
    let (p, q) = ([0.8, 0.2], [0.3, 0.7]);
    let diag = |v: [f64; 2]| format!("[{{\"re\":[[{},0],[0,{}]]}}]", v[0], v[1]);
    let f = write_instances(dir.path(), "pq.json", &format!(r#"{{"blocks":[2],"prior":0.5,"functionals":{{"rho":{},"sigma":{}}}}}"#, diag(p), diag(q)));
    let summary = dir.path().join("res.json");
    let o = run(&["chernoff", path_str(&f), "--n-max", "6", "--summary", path_str(&summary)]);
    assert_eq!(code(&o), 0);
    let res: serde_json::Value = serde_json::from_str(&fs::read_to_string(&summary).unwrap()).unwrap();
    let q_of = |s: f64| p.iter().zip(&q).map(|(a, b)| a.powf(s) * b.powf(1.0 - s)).sum::<f64>();
    let brute = (0..=100_000).map(|i| q_of(i as f64 * 1e-5)).fold(f64::INFINITY, f64::min);
    assert_eq!(res["exponent"]["kind"], "finite");
    let e = res["exponent"]["value"].as_f64().unwrap();
    assert!((e + brute.ln()).abs() < 1e-8 * e);

    let (_, rows) = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 6);
    for (n, r) in rows.iter().enumerate() {
        // P_e(n) by enumerating outcome strings
        let n = n + 1;
        let mut want = 0.0;
        for code in 0..(1usize << n) {
            let (mut lp, mut lq) = (0.5, 0.5);
            for k in 0..n {
                let bit = (code >> k) & 1;
                lp *= p[bit];
                lq *= q[bit];
            }
            want += f64::min(lp, lq);
        }
        assert!((r[1].parse::<f64>().unwrap() - want).abs() < 1e-14);
        assert_eq!(r[5], "true");
    }
}

#[test]
fn chernoff_identical_and_orthogonal_states() {
    let dir = tempfile::tempdir().unwrap();
    let f = write_instances(
        dir.path(),
        "orth.json",
        r#"{"blocks":[2],"functionals":{"rho":[{"re":[[1,0],[0,0]]}],"sigma":[{"re":[[0,0],[0,1]]}]}}"#,
    );
    let o = run(&["chernoff", path_str(&f), "--format", "json"]);
    assert_eq!(code(&o), 0);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["result"]["exponent"]["kind"], "infinite");

    let g = write_instances(
        dir.path(),
        "same.json",
        r#"{"blocks":[2],"functionals":{"rho":[{"re":[[0.5,0],[0,0.5]]}],"sigma":[{"re":[[0.5,0],[0,0.5]]}]}}"#,
    );
    let o = run(&["chernoff", path_str(&g), "--format", "json", "--n-max", "3"]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(doc["result"]["exponent"]["value"].as_f64().unwrap().abs() < 1e-12);
    for r in doc["rows"].as_array().unwrap() {
        assert!((r["p_e"].as_f64().unwrap() - 0.5).abs() < 1e-14);
    }

    // a functional of mass 2 is not a state
    let h = write_instances(
        dir.path(),
        "heavy.json",
        r#"{"blocks":[1],"functionals":{"rho":[{"re":[[2]]}],"sigma":[{"re":[[1]]}]}}"#,
    );
    assert_eq!(code(&run(&["chernoff", path_str(&h)])), 2);
}

#[test]
fn chernoff_random_pair_is_deterministic() {
    let a = run(&["chernoff", "--seed", "3", "--dims", "2", "--n-max", "4"]);
    let b = run(&["chernoff", "--seed", "3", "--dims", "2", "--n-max", "4"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn oracle_check_anchors() {
    let dir = tempfile::tempdir().unwrap();
    let f = write_instances(
        dir.path(),
        "anchors.json",
        r#"{"id":"anchors","blocks":[2],"functionals":{"id":[{"re":[[1,0],[0,1]]}],"four":[{"re":[[4,0],[0,4]]}]}}"#,
    );
    let o = run(&["oracle-check", path_str(&f), "--format", "json", "--s-grid", "0.5"]);
    assert_eq!(code(&o), 0);
    let rows: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    for r in rows.as_array().unwrap() {
        assert_eq!(r["status"], "pass");
        assert!(r["rel_diff"].as_f64().unwrap() <= 1e-12, "{r}");
    }

    let o = run(&["oracle-check", "--seed", "5", "--count", "10"]);
    assert_eq!(code(&o), 0);
    let (_, rows) = csv_rows(&stdout(&o));
    assert!(rows.iter().all(|r| r[8] == "pass"));

    // rank-deficient blocks are listed but not judged
    let o = run(&["oracle-check", "--seed", "5", "--count", "10", "--kind", "rank-deficient"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains(",skipped"));
}
