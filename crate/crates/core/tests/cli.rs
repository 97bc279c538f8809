use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use iad_core::diagnostics::RateReport;
use iad_core::io::write_matrix_market;
use iad_core::linalg::DenseMatrix;

fn iad(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_iad"))
        .args(args)
        .env("IAD_THREADS", "1")
        .output()
        .expect("run iad binary")
}

fn path(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

#[test]
fn solve_writes_steady_state_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = iad(&["solve", "--partition", "split1d:57", "--out", path(dir.path())]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let mu: Vec<f64> = fs::read_to_string(dir.path().join("mu.txt"))
        .unwrap()
        .lines()
        .map(|l| l.trim().parse().unwrap())
        .collect();
    assert_eq!(mu.len(), 100);
    assert!((mu.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    let trace = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(lines.next(), Some("iter,rel_change,residual,err_invmu"));
    assert!(lines.count() > 100);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = path(dir.path());
    assert_eq!(iad(&["solve", "--model", "fixture:marek", "--out", d]).status.code(), Some(2));
    assert_eq!(iad(&["solve", "--model", "fixture:reducible_coarse", "--out", d]).status.code(), Some(1));
    assert_eq!(iad(&["solve", "--partition", "split1d:999", "--out", d]).status.code(), Some(1));
    assert_eq!(iad(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(iad(&["--version"]).status.code(), Some(0));
}

#[test]
fn report_json_from_matrix_market_input() {
    let dir = tempfile::tempdir().unwrap();
    // Row-stochastic birth-death chain on six states.
    let n = 6;
    let m = DenseMatrix::from_fn(n, n, |i, j| {
        let stay = if i == 0 || i == n - 1 { 0.6 } else { 0.4 };
        if i == j {
            stay
        } else if i.abs_diff(j) == 1 {
            if i == 0 || i == n - 1 {
                0.4
            } else {
                0.3
            }
        } else {
            0.0
        }
    });
    let mtx = dir.path().join("p.mtx");
    write_matrix_market(&m, fs::File::create(&mtx).unwrap()).unwrap();
    let json = dir.path().join("report.json");
    let out = iad(&[
        "report",
        "--matrix",
        path(&mtx),
        "--row-stochastic",
        "--partition",
        "split1d:2",
        "--k-list",
        "2,3,4",
        "--out",
        path(&json),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r: RateReport = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(r.states, 6);
    assert_eq!(r.coarse_states, 2);
    assert!(r.reversible);
    assert!(r.rho_j <= r.norm_bound + 1e-10);
    assert_eq!(r.angle_bounds.len(), 3);
    for ab in r.angle_bounds.values() {
        assert!(r.norm_bound <= ab.bound + 1e-10);
    }
}

#[test]
fn tables_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let out = iad(&["tables", "--skip-2d", "--max-n", "4", "--out", path(d.path())]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for name in ["table1.csv", "table3.csv", "fig2.csv", "fig3.csv", "fig4.csv", "fig5.csv"] {
        let x = fs::read(a.path().join(name)).unwrap();
        let y = fs::read(b.path().join(name)).unwrap();
        assert!(!x.is_empty(), "{name} is empty");
        assert_eq!(x, y, "{name} differs between runs");
    }
    let t1 = fs::read_to_string(a.path().join("table1.csv")).unwrap();
    assert!(t1.contains("0.991441"), "{t1}");
    assert!(!a.path().join("table4.csv").exists());
}
