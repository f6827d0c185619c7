mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ivauction::model::{parse_instance, serialize_instance};
use ivauction::money::int;
use ivauction::{Instance, ValuationModel};
use tempfile::TempDir;

use common::{e1, e3};

fn ivauction(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ivauction"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, inst: &Instance) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, serialize_instance(inst)).unwrap();
    p.to_str().unwrap().to_string()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_prints_coin_outcome_and_welfare() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "e1.json", &e1());
    let args = ["run", "--instance", &f, "--mechanism", "binary", "--pricing", "welfare", "--signals", "1,1", "--seed", "0"];
    let o = ivauction(&args);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("coin order="));
    assert!(lines.next().unwrap().starts_with("winner="));
    assert_eq!(ivauction(&args).stdout, o.stdout);
}

#[test]
fn explicit_coin_matches_trace() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "e1.json", &e1());
    let o = ivauction(&[
        "run", "--instance", &f, "--mechanism", "binary", "--signals", "1,1", "--coin", "order=1,0 m=0 g=0 u=0",
        "--trace", "--clock",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("coin order=1,0 m=0 g=0 u=0\n"));
    assert!(text.contains("EVENT "));
    assert!(text.contains("CLOCK "));
    assert!(text.contains("RESULT "));
}

#[test]
fn mechanism_compatibility() {
    let dir = TempDir::new().unwrap();
    let e1f = write(&dir, "e1.json", &e1());
    let e3f = write(&dir, "e3.json", &e3());
    let o = ivauction(&["run", "--instance", &e1f, "--mechanism", "kary", "--signals", "0,1"]);
    assert_eq!(o.status.code(), Some(0));
    let o = ivauction(&["run", "--instance", &e3f, "--mechanism", "binary", "--signals", "0,1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
    let o = ivauction(&["run", "--instance", &e1f, "--mechanism", "binary", "--signals", "0,2"]);
    assert_eq!(o.status.code(), Some(2));
    let o = ivauction(&["run", "--instance", "/nonexistent.json", "--mechanism", "binary", "--signals", "0,1"]);
    assert_eq!(o.status.code(), Some(2));
}

fn worst_row(csv_text: &str) -> (String, String) {
    let mut r = csv::Reader::from_reader(csv_text.as_bytes());
    let row = r
        .records()
        .map(|r| r.unwrap())
        .find(|r| &r[3] == "worst")
        .expect("worst row");
    (row[8].to_string(), row[9].to_string())
}

#[test]
fn evaluate_worst_rows_meet_bounds() {
    let dir = TempDir::new().unwrap();
    let e1f = write(&dir, "e1.json", &e1());
    let e3f = write(&dir, "e3.json", &e3());
    let o = ivauction(&["evaluate", "--instance", &e1f, "--mechanism", "binary"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("instance,mechanism,pricing,profile,opt,e_welfare,e_revenue,p_optimal,welfare_ratio,revenue_ratio\n"));
    assert!(text.contains("e1,binary,welfare,\"1,1\",10,5.5,5.5,0.5,20/11,20/11\n"));
    let (w, _) = worst_row(&text);
    assert_eq!(w, "2");
    let o = ivauction(&["evaluate", "--instance", &e3f, "--mechanism", "kary"]);
    let (w, _) = worst_row(&stdout(&o));
    let w = ivauction::money::parse_money(&w).unwrap();
    assert!(w <= int(10));
}

#[test]
fn evaluate_single_profile_and_samples() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "e3.json", &e3());
    let o = ivauction(&["evaluate", "--instance", &f, "--mechanism", "kary", "--signals", "2,2"]);
    // Two bidders with worths 9 and 2 at quality 4.
    assert!(stdout(&o).contains("e3,kary,welfare,\"2,2\",9,3.25,"));
    let args = ["evaluate", "--instance", &f, "--mechanism", "kary", "--samples", "10000", "--seed", "1"];
    let a = ivauction(&args);
    assert_eq!(a.status.code(), Some(0));
    assert!(stdout(&a).lines().next().unwrap().contains("se_welfare"));
    assert_eq!(a.stdout, ivauction(&args).stdout);
}

#[test]
fn evaluate_over_budget_advises_sampling() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "e1.json", &e1());
    let o = ivauction(&["evaluate", "--instance", &f, "--mechanism", "binary", "--max-runs", "3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--samples"));
    let o = ivauction(&["evaluate", "--instance", &f, "--mechanism", "binary", "--max-runs", "3", "--samples", "50"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn verify_exit_codes() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "e1.json", &e1());
    let o = ivauction(&["verify", "--instance", &f, "--mechanism", "binary", "--check", "all"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = stdout(&o);
    assert!(text.starts_with("check,instance,mechanism,pricing,result,quantity,witness\n"));
    for check in ["icir-universal", "rstar", "equivalence", "oxp"] {
        assert!(text.contains(&format!("{check},e1,binary,welfare,pass,")), "{check}");
    }

    let o = ivauction(&["verify", "--instance", &f, "--mechanism", "fixture-overcharge", "--check", "icir"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains(",fail,"));
    assert!(stdout(&o).contains("profile="));

    let o = ivauction(&["verify", "--instance", &f, "--mechanism", "general", "--check", "all", "--pricing", "revenue"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("feasibility,e1,general,-,pass,"));
    assert!(stdout(&o).contains("icir-expectation,e1,general,revenue,pass,"));
}

#[test]
fn oxp_beyond_budget_exits_two() {
    let dir = TempDir::new().unwrap();
    let big = Instance::new(
        4,
        2,
        vec![vec![0, 1, 2, 3]],
        ValuationModel::BinarySymmetric {
            tables: vec![(0..5).map(int).collect(); 4],
        },
    )
    .unwrap();
    let f = write(&dir, "big.json", &big);
    let o = ivauction(&["verify", "--instance", &f, "--mechanism", "binary", "--check", "oxp"]);
    assert_eq!(o.status.code(), Some(2));
    // `all` skips OXP instead of failing.
    let o = ivauction(&["verify", "--instance", &f, "--mechanism", "binary", "--check", "all"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(!stdout(&o).contains("oxp"));
}

#[test]
fn generate_families() {
    let dir = TempDir::new().unwrap();
    let out: PathBuf = dir.path().join("chain.json");
    let o = ivauction(&["generate", "--family", "thm11", "--l", "2", "--k", "3", "--M", "100", "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("bidders=7\n"));
    let inst = parse_instance(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(inst.n(), 7);
    let side = out.with_extension("designated");
    let o = ivauction(&[
        "verify", "--instance", path(&out), "--mechanism", "general", "--check", "certificate", "--designated",
        path(&side),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("certificate,chain-l2-k3,-,-,pass,bound=1/7,"));

    let out = dir.path().join("weighted.json");
    let o = ivauction(&["generate", "--family", "thm6", "--l", "1", "--k", "2", "--out", path(&out)]);
    assert!(stdout(&o).starts_with("bidders=2\n"));
    let o = ivauction(&["generate", "--family", "weighted", "--l", "2", "--k", "2", "--out", path(&out)]);
    assert!(stdout(&o).starts_with("bidders=3\n"));
}

#[test]
fn generate_random_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let o = ivauction(&["generate", "--family", "random", "--n", "6", "--k", "2", "--seed", "7", "--model", "binary", "--out", path(p)]);
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let o = ivauction(&["generate", "--family", "random", "--k", "2", "--out", path(&a)]);
    assert_eq!(o.status.code(), Some(2));
    let o = ivauction(&["generate", "--family", "thm11", "--l", "1", "--k", "1", "--out", path(&a)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn broken_certificate_fails() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "e1.json", &e1());
    let side = dir.path().join("bad.designated");
    std::fs::write(&side, "1,0;0\n0,1;1\n").unwrap();
    let o = ivauction(&[
        "verify", "--instance", &f, "--mechanism", "binary", "--check", "certificate", "--designated", path(&side),
    ]);
    assert_eq!(o.status.code(), Some(1));
}
