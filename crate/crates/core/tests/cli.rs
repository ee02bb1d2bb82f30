use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use sfgm::bench::TRACE_CSV_HEADER;
use sfgm::diagnostics::CERTIFICATION_CSV_HEADER;

fn bench(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sfgm-bench"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("SFGM_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> Option<i32> {
    o.status.code()
}

fn columns(path: &Path, keep: &[usize]) -> String {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            keep.iter().map(|&i| f[i]).collect::<Vec<_>>().join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

const SMALL: [&str; 6] = ["--problem", "diag", "--xi", "3", "--m", "50"];

#[test]
fn zero_iterations_give_a_header_only_trace() {
    let dir = tempfile::tempdir().unwrap();
    let o = bench(&[&["solve"], &SMALL[..], &["--method", "gm", "--max-iters", "0"]].concat(), dir.path());
    assert_eq!(code(&o), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let trace = fs::read_to_string(dir.path().join("gm.trace.csv")).unwrap();
    assert_eq!(trace, format!("{TRACE_CSV_HEADER}\n"));
    assert!(dir.path().join("run.json").exists());
}

#[test]
fn zero_memory_schedule_matches_fgm_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let common = [&["solve"], &SMALL[..], &["--max-iters", "300"]].concat();
    let a = bench(&[&common[..], &["--method", "fgm-css3"]].concat(), dir.path());
    let b = bench(&[&common[..], &["--method", "sfgm", "--beta", "zero", "--gamma0", "mu"]].concat(), dir.path());
    assert_eq!((code(&a), code(&b)), (Some(0), Some(0)));
    let fgm = columns(&dir.path().join("fgm-css3.trace.csv"), &[0, 1]);
    let sfgm = columns(&dir.path().join("sfgm-zero.trace.csv"), &[0, 1]);
    assert_eq!(fgm.lines().count(), 301);
    assert_eq!(fgm, sfgm);
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 6] = [
        &["solve", "--no-such-flag"],
        &["solve", "--method", "newton"],
        &["solve", "--problem", "libsvm"],
        &["solve", "--method", "gm", "--beta", "last"],
        &["compare", "--methods", "gm,gm", "--m", "10", "--max-iters", "1"],
        &["solve", "--tol-grad", "-1"],
    ];
    for args in cases {
        assert_eq!(code(&bench(args, dir.path())), Some(2), "{args:?}");
    }
}

#[test]
fn malformed_inputs_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("bad.svm");
    fs::write(&data, "1 1:0.5\n-1 0:2\n").unwrap();
    let o = bench(&["solve", "--problem", "libsvm", "--data", data.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));

    let run = dir.path().join("run");
    let o = bench(&[&["solve"], &SMALL[..], &["--method", "gm", "--max-iters", "5"]].concat(), &run);
    assert_eq!(code(&o), Some(0));
    fs::write(run.join("gm.trace.csv"), "k,f\n1,2\n").unwrap();
    let o = bench(&["certify", "--trace-dir", run.to_str().unwrap()], &dir.path().join("cert"));
    assert_eq!(code(&o), Some(3));
}

#[test]
fn libsvm_problems_run() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("tiny.svm");
    fs::write(&data, "+1 1:1 2:0.5\n-1 1:-0.3 3:1\n+1 2:2\n-1 1:0.1 3:-1\n").unwrap();
    let args = ["--problem", "libsvm", "--data", data.to_str().unwrap(), "--loss", "logistic", "--tau", "0.1"];
    let o = bench(&[&["compare"], &args[..], &["--tol-grad", "1e-8"]].concat(), dir.path());
    assert_eq!(code(&o), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let table = String::from_utf8(o.stdout).unwrap();
    assert_eq!(table.lines().count(), 6);
    assert!(table.lines().skip(1).all(|l| !l.split_whitespace().nth(2).unwrap().starts_with('-')));
}

#[test]
fn compare_writes_summaries_and_a_deterministic_plot() {
    let dir = tempfile::tempdir().unwrap();
    let args = [&["compare"], &SMALL[..], &["--tol-dist", "1e-6"]].concat();
    let first = dir.path().join("a");
    let second = dir.path().join("b");
    assert_eq!(code(&bench(&args, &first)), Some(0));
    assert_eq!(code(&bench(&args, &second)), Some(0));
    for f in ["summary.txt", "summary.csv", "convergence.svg", "run.json", "sfgm-last.trace.csv"] {
        assert!(first.join(f).exists(), "{f}");
    }
    let svg = fs::read(first.join("convergence.svg")).unwrap();
    assert_eq!(svg, fs::read(second.join("convergence.svg")).unwrap());
    assert!(svg.starts_with(b"<?xml"));
    let csv = fs::read_to_string(first.join("summary.csv")).unwrap();
    let fgm = csv.lines().find(|l| l.starts_with("fgm-css3,")).unwrap();
    assert_eq!(fgm.split(',').nth(6), Some("1.0"));
}

#[test]
fn certify_passes_clean_runs_and_flags_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    let o = bench(&[&["compare"], &SMALL[..], &["--max-iters", "200"]].concat(), &run);
    assert_eq!(code(&o), Some(0));

    let cert = dir.path().join("cert");
    let o = bench(&["certify", "--trace-dir", run.to_str().unwrap()], &cert);
    assert_eq!(code(&o), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(cert.join("sfgm-last.cert.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some(CERTIFICATION_CSV_HEADER));
    assert_eq!(csv.lines().count(), 1 + 201);

    // scale one λ entry: the product identity no longer holds
    let path = run.join("sfgm-last.trace.csv");
    let text = fs::read_to_string(&path).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let mut f: Vec<String> = lines[50].split(',').map(String::from).collect();
    f[6] = format!("{:?}", f[6].parse::<f64>().unwrap() * 1.001);
    lines[50] = f.join(",");
    fs::write(&path, lines.join("\n") + "\n").unwrap();
    let o = bench(&["certify", "--trace-dir", run.to_str().unwrap()], &cert);
    assert_eq!(code(&o), Some(5));
}

#[test]
fn solve_with_certification_writes_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = bench(
        &[&["solve"], &SMALL[..], &["--method", "sfgm", "--beta", "window:3", "--tol-dist", "1e-4", "--certify"]].concat(),
        dir.path(),
    );
    assert_eq!(code(&o), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("sfgm-window3.cert.csv").exists());
}

#[test]
fn bounds_prints_full_precision() {
    let dir = tempfile::tempdir().unwrap();
    let o = bench(&["bounds", "--L", "1", "--mu", "1e-3", "--r0", "1", "--eps", "1e-9"], dir.path());
    // `--out` is not a bounds flag
    assert_eq!(code(&o), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_sfgm-bench"))
        .args(["bounds", "--L", "1", "--mu", "1e-3", "--s", "0", "--r0", "1", "--eps", "1e-9"])
        .output()
        .unwrap();
    let stdout = String::from_utf8(o.stdout).unwrap();
    let line = stdout.lines().find(|l| l.starts_with("k_fgm ")).unwrap();
    let v: f64 = line.split_whitespace().last().unwrap().parse().unwrap();
    assert!((v - 479.37742771955693111).abs() <= 1e-12 * v);
}
