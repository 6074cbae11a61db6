//! End-to-end tests driving the compiled binary.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

const SQUARES: &str =
    "while r != 0 if r > 0 r = r - v; v = v + 2 else r = r + u; u = u + 2 end end";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_aligator"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("aligator-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_loop(dir: &PathBuf, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn run_ok(out: &Output) -> &str {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    std::str::from_utf8(&out.stdout).unwrap()
}

#[test]
fn analyze_text_reports_basis_and_verification() {
    let dir = scratch("text");
    let f = write_loop(&dir, "squares.loop", SQUARES);
    let out = bin().args(["analyze", f.to_str().unwrap(), "--verify"]).output().unwrap();
    let stdout = run_ok(&out);
    assert!(stdout.contains("variables: r, v, u"));
    assert!(stdout.contains("invariant basis:"));
    assert!(stdout.contains("4*r_0-u_0^2+2*u_0+v_0^2-2*v_0-4*r+u^2-2*u-v^2+2*v = 0"));
    assert!(stdout.contains("verification: 100 trials x 30 steps: passed"));
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn analyze_reads_stdin_dash() {
    let mut child = bin()
        .args(["analyze", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.as_mut().unwrap().write_all(b"while true x = x end").unwrap();
    let out = child.wait_with_output().unwrap();
    let stdout = run_ok(&out);
    assert!(stdout.contains("x_0-x = 0") || stdout.contains("x-x_0 = 0"));
}

#[test]
fn json_fields_follow_the_documented_order() {
    let dir = scratch("order");
    let f = write_loop(&dir, "squares.loop", SQUARES);
    let out = bin()
        .args(["analyze", f.to_str().unwrap(), "--format", "json", "--verify"])
        .output()
        .unwrap();
    let stdout = run_ok(&out);
    let keys = [
        "\"variables\"",
        "\"initial_variables\"",
        "\"paths\"",
        "\"closed_forms\"",
        "\"invariant_basis\"",
        "\"trivial_ideal\"",
        "\"diagnostics\"",
        "\"timings_ms\"",
        "\"verification\"",
    ];
    let mut last = 0usize;
    for k in keys {
        let at = stdout.find(k).unwrap_or_else(|| panic!("missing {k}"));
        assert!(at > last, "{k} out of order");
        last = at;
    }
    let v: serde_json::Value = serde_json::from_str(stdout).unwrap();
    assert_eq!(v["paths"], 2);
    assert_eq!(v["trivial_ideal"], false);
    assert_eq!(v["verification"]["passed"], true);
    assert_eq!(v["closed_forms"].as_array().unwrap().len(), 2);
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn json_output_is_deterministic_modulo_timings() {
    let dir = scratch("det");
    let f = write_loop(&dir, "squares.loop", SQUARES);
    let args = ["analyze", f.to_str().unwrap(), "--format", "json", "--verify", "--seed", "7"];
    let mut reports = Vec::new();
    for _ in 0..2 {
        let out = bin().args(args).output().unwrap();
        let mut v: serde_json::Value = serde_json::from_str(run_ok(&out)).unwrap();
        v.as_object_mut().unwrap().remove("timings_ms");
        reports.push(serde_json::to_string(&v).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn zero_ideal_gets_a_marker_and_exit_zero() {
    let dir = scratch("zero");
    let f = write_loop(&dir, "inc.loop", "while true x = x + 1 end");
    let out = bin().args(["analyze", f.to_str().unwrap()]).output().unwrap();
    let stdout = run_ok(&out);
    assert!(stdout.contains("invariant ideal: zero"));
    assert!(!stdout.contains("invariant basis:"));
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn syntax_error_exits_one() {
    let dir = scratch("syntax");
    let f = write_loop(&dir, "bad.loop", "while true x = end");
    let out = bin().args(["analyze", f.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("error:"), "stdout: {stdout}");
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn unsupported_update_exits_two() {
    let dir = scratch("unsupported");
    let f = write_loop(&dir, "mul.loop", "while true x = x * y end");
    let out = bin().args(["analyze", f.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn missing_file_exits_one() {
    let out = bin().args(["analyze", "/nonexistent/nowhere.loop"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}

#[test]
fn timeout_exits_three() {
    // three coupled subtractive pairs: the prefix intersections take minutes,
    // far past any plausible two-second machine-speed wobble
    let dir = scratch("timeout");
    let f = write_loop(
        &dir,
        "slow.loop",
        "while true if true a = a - b; p = p - q; r = r - s; m = m - k \
         else b = b - a; q = q - p; s = s - r; k = k - m end end",
    );
    let out = bin()
        .args(["analyze", f.to_str().unwrap(), "--timeout", "2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("exceeded"), "stdout: {stdout}");
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn bench_runs_corpus_as_csv() {
    let dir = scratch("bench");
    write_loop(&dir, "b_ident.loop", "while true x = x end");
    write_loop(&dir, "a_squares.loop", SQUARES);
    let out = bin()
        .args(["bench", dir.to_str().unwrap(), "--format", "csv"])
        .output()
        .unwrap();
    let stdout = run_ok(&out);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines[0], "instance,status,wall_ms,basis_size,nonempty,verified");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("a_squares,ok,"));
    assert!(lines[1].ends_with(",1,true,true"));
    assert!(lines[2].starts_with("b_ident,ok,"));
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn bench_empty_dir_prints_header_only_and_exits_zero() {
    let dir = scratch("bench-empty");
    let out = bin().args(["bench", dir.to_str().unwrap()]).output().unwrap();
    let stdout = run_ok(&out);
    assert_eq!(stdout.lines().count(), 1);
    assert!(stdout.contains("instance"));
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn bench_keeps_going_past_failures() {
    let dir = scratch("bench-fail");
    write_loop(&dir, "bad.loop", "while true x = x * y end");
    write_loop(&dir, "good.loop", "while true x = x end");
    let out = bin()
        .args(["bench", dir.to_str().unwrap(), "--format", "csv"])
        .output()
        .unwrap();
    let stdout = run_ok(&out);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("bad,unsupported-update,"));
    assert!(lines[2].starts_with("good,ok,"));
    let _ = fs::remove_dir_all(&dir);
}
