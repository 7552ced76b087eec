use std::path::PathBuf;
use std::process::{Command, Output};

fn dynmis(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dynmis"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("dynmis-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn without_wall_time(s: &str) -> String {
    s.lines()
        .filter(|l| !l.starts_with("wall_time_ms"))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn gen_random_writes_header_and_events() {
    let p = tmp("random.txt");
    let o = dynmis(&["gen", "random", "--n", "200", "--steps", "10000", "--seed", "7", "--out", p.to_str().unwrap()]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&p).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("N 200"));
    assert_eq!(lines.count(), 10000);
}

#[test]
fn gen_adversary_event_count() {
    let o = dynmis(&["gen", "adversary", "--n", "64"]);
    assert!(o.status.success());
    let events = stdout(&o).lines().filter(|l| l.starts_with(['+', '-'])).count();
    // 2 q^2 inserts, 2 (q-1) q deletes, one final insert, with q = 16
    assert_eq!(events, 2 * 256 + 2 * 15 * 16 + 1);
}

#[test]
fn run_and_simulate_verify_succeed() {
    let p = tmp("fuzz.txt");
    let o = dynmis(&["gen", "random", "--n", "60", "--steps", "2000", "--seed", "3", "--insert-bias", "0.6", "--out", p.to_str().unwrap()]);
    assert!(o.status.success());
    for algo in ["delta", "sublinear", "auto"] {
        let o = dynmis(&["run", p.to_str().unwrap(), "--algo", algo, "--verify"]);
        assert!(o.status.success(), "{algo}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(stdout(&o).starts_with(&format!("algo: {algo}\n")));
    }
    let o = dynmis(&["simulate", p.to_str().unwrap(), "--verify", "--per-update"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("rounds: "));
    assert_eq!(out.lines().filter(|l| l.starts_with("index=")).count(), 2000);
}

#[test]
fn auto_reports_engine_per_epoch() {
    let p = tmp("auto.txt");
    dynmis(&["gen", "random", "--n", "100", "--steps", "3000", "--seed", "1", "--insert-bias", "0.55", "--out", p.to_str().unwrap()]);
    let o = dynmis(&["run", p.to_str().unwrap(), "--algo", "auto", "--delta-bound", "100"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains(" delta ") || out.contains(" sublinear "));
    assert!(out.contains("m_snapshot"));
}

#[test]
fn degree_bound_violation_exits_two() {
    let p = tmp("star.txt");
    std::fs::write(&p, "N 6\n+ 0 1\n+ 0 2\n+ 0 3\n+ 0 4\n+ 0 5\n").unwrap();
    let o = dynmis(&["run", p.to_str().unwrap(), "--algo", "delta", "--delta-bound", "4"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("degree bound"));
}

#[test]
fn malformed_input_exits_two() {
    let p = tmp("bad.txt");
    std::fs::write(&p, "N 3\n+ 0 1\n* 1 2\n").unwrap();
    let o = dynmis(&["run", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
    let o = dynmis(&["run", "/nonexistent/stream.txt"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn vertex_ops_rejected_by_sequential_engines() {
    let p = tmp("vert.txt");
    std::fs::write(&p, "N 3\n+ 0 1\n-V 2\n").unwrap();
    assert_eq!(dynmis(&["run", p.to_str().unwrap()]).status.code(), Some(2));
    assert!(dynmis(&["simulate", p.to_str().unwrap(), "--verify"]).status.success());
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(dynmis(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(dynmis(&["run"]).status.code(), Some(1));
    assert_eq!(dynmis(&["gen", "adversary", "--n", "10"]).status.code(), Some(1));
    assert_eq!(dynmis(&["--help"]).status.code(), Some(0));
}

#[test]
fn simulate_adversary_shows_large_update() {
    let p = tmp("adv.txt");
    dynmis(&["gen", "adversary", "--n", "64", "--out", p.to_str().unwrap()]);
    let o = dynmis(&["simulate", p.to_str().unwrap(), "--per-update"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let max: u64 = out
        .lines()
        .find_map(|l| l.strip_prefix("max_adjustments: "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(max >= 16);
}

#[test]
fn empty_stream_simulates_to_zero() {
    let p = tmp("empty.txt");
    std::fs::write(&p, "N 4\n").unwrap();
    let o = dynmis(&["simulate", p.to_str().unwrap()]);
    assert!(o.status.success());
    let out = stdout(&o);
    for key in ["updates: 0", "adjustments: 0", "rounds: 0", "messages: 0"] {
        assert!(out.contains(key), "{key}");
    }
}

#[test]
fn identical_inputs_give_identical_reports() {
    let p = tmp("det.txt");
    dynmis(&["gen", "random", "--n", "50", "--steps", "1500", "--seed", "11", "--out", p.to_str().unwrap()]);
    let q = tmp("det2.txt");
    dynmis(&["gen", "random", "--n", "50", "--steps", "1500", "--seed", "11", "--out", q.to_str().unwrap()]);
    assert_eq!(std::fs::read(&p).unwrap(), std::fs::read(&q).unwrap());
    for args in [
        vec!["run", p.to_str().unwrap(), "--algo", "auto", "--delta-bound", "6", "--per-update"],
        vec!["simulate", p.to_str().unwrap(), "--per-update"],
    ] {
        let a = stdout(&dynmis(&args));
        let b = stdout(&dynmis(&args));
        assert_eq!(without_wall_time(&a), without_wall_time(&b));
    }
}
