use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use iad_ffi::*;

fn last_error() -> String {
    let p = iad_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn chain_from(rows: &[&[f64]], row_stochastic: bool) -> (IadStatus, *mut IadChain) {
    let n = rows.len();
    let data: Vec<f64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
    let mut out = ptr::null_mut();
    let status = unsafe { iad_chain_new(data.as_ptr(), n, row_stochastic, &mut out) };
    (status, out)
}

#[test]
fn chain_lifecycle_and_steady_state() {
    let (status, chain) = chain_from(&[&[0.5, 0.25], &[0.5, 0.75]], false);
    assert_eq!(status, IadStatus::Ok);
    unsafe {
        assert_eq!(iad_chain_dim(chain), 2);
        let mut mu = [0.0; 2];
        assert_eq!(iad_steady_state(chain, 1e-12, mu.as_mut_ptr(), 2), IadStatus::Ok);
        assert!((mu[0] - 1.0 / 3.0).abs() < 1e-10);
        assert!((mu[1] - 2.0 / 3.0).abs() < 1e-10);
        let mut short = [0.0; 1];
        assert_eq!(
            iad_steady_state(chain, 1e-12, short.as_mut_ptr(), 1),
            IadStatus::DimensionMismatch
        );
        iad_chain_free(chain);
        iad_chain_free(ptr::null_mut());
    }
}

#[test]
fn row_stochastic_input_is_transposed() {
    let (status, chain) = chain_from(&[&[0.5, 0.5], &[0.25, 0.75]], true);
    assert_eq!(status, IadStatus::Ok);
    let (status, _) = chain_from(&[&[0.5, 0.5], &[0.25, 0.75]], false);
    assert_eq!(status, IadStatus::NotStochastic);
    assert!(last_error().contains("column"));
    unsafe { iad_chain_free(chain) };
}

#[test]
fn null_arguments_are_reported() {
    let mut out = ptr::null_mut();
    let status = unsafe { iad_chain_new(ptr::null(), 2, false, &mut out) };
    assert_eq!(status, IadStatus::NullPointer);
    assert!(last_error().contains("null"));
    assert_eq!(unsafe { iad_chain_dim(ptr::null()) }, 0);
    let mut mu = [0.0; 2];
    let s = unsafe { iad_steady_state(ptr::null(), 1e-9, mu.as_mut_ptr(), 2) };
    assert_eq!(s, IadStatus::NullPointer);
}

#[test]
fn model_partition_solve_and_report() {
    let name = CString::new("1d").unwrap();
    let spec = CString::new("split1d:57").unwrap();
    unsafe {
        let mut chain = ptr::null_mut();
        assert_eq!(iad_chain_from_model(name.as_ptr(), &mut chain), IadStatus::Ok);
        let n = iad_chain_dim(chain);
        assert_eq!(n, 100);
        let mut part = ptr::null_mut();
        assert_eq!(iad_partition_from_spec(spec.as_ptr(), n, &mut part), IadStatus::Ok);
        assert_eq!(iad_partition_coarse_count(part), 2);

        let mut mu = vec![0.0; n];
        let mut iters = 0usize;
        let opts = IadSolveOptions { tau: 1e-10, max_outer: 0 };
        let s = iad_solve(chain, part, ptr::null(), n, opts, mu.as_mut_ptr(), &mut iters);
        assert_eq!(s, IadStatus::Ok);
        assert!(iters > 0);
        let mut exact = vec![0.0; n];
        assert_eq!(iad_steady_state(chain, 1e-9, exact.as_mut_ptr(), n), IadStatus::Ok);
        let err = mu.iter().zip(&exact).map(|(a, b)| ((a - b) / b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-7, "relative error {err}");

        let mut report = IadRateReport::default();
        assert_eq!(iad_rate_report(chain, part, 2, &mut report), IadStatus::Ok);
        assert!(report.reversible);
        assert_eq!(report.k, 2);
        assert!((report.rho_j - report.norm_bound).abs() < 1e-8);
        assert!(report.norm_bound <= report.angle_bound + 1e-8);
        assert!((report.sqrt_lambda2 - 0.999992).abs() < 2e-5);

        iad_partition_free(part);
        iad_chain_free(chain);
    }
}

#[test]
fn non_convergence_returns_last_iterate() {
    // Four-state chain whose aggregated iteration settles into a two-cycle.
    let rows: [&[f64]; 4] = [
        &[0.0, 1.0, 0.0, 0.5],
        &[0.5, 0.0, 0.0, 0.0],
        &[0.5, 0.0, 0.0, 0.5],
        &[0.0, 0.0, 1.0, 0.0],
    ];
    let (status, chain) = chain_from(&rows, false);
    assert_eq!(status, IadStatus::Ok);
    let labels = [0usize, 0, 1, 1];
    unsafe {
        let mut part = ptr::null_mut();
        assert_eq!(iad_partition_new(labels.as_ptr(), 4, &mut part), IadStatus::Ok);
        let start = [0.1, 0.2, 0.3, 0.4];
        let mut out = [0.0; 4];
        let mut iters = 0;
        let opts = IadSolveOptions { tau: 0.0, max_outer: 200 };
        let s = iad_solve(chain, part, start.as_ptr(), 4, opts, out.as_mut_ptr(), &mut iters);
        assert_eq!(s, IadStatus::NotConverged);
        assert_eq!(iters, 200);
        assert!((out.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(last_error().contains("200"));
        iad_partition_free(part);
        iad_chain_free(chain);
    }
}

#[test]
fn bad_partition_spec() {
    let spec = CString::new("split1d:x").unwrap();
    let mut part = ptr::null_mut();
    let s = unsafe { iad_partition_from_spec(spec.as_ptr(), 10, &mut part) };
    assert_eq!(s, IadStatus::InvalidArgument);
    assert!(part.is_null());
}

#[test]
fn status_strings_are_static() {
    let s = unsafe { CStr::from_ptr(iad_status_str(IadStatus::NotConverged)) };
    assert_eq!(s.to_str().unwrap(), "not converged");
    let v = unsafe { CStr::from_ptr(iad_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn generated_header_declares_api() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/iad.h");
    let text = std::fs::read_to_string(&header).expect("build script writes the header");
    for sym in [
        "typedef struct IadChain IadChain;",
        "typedef struct IadPartition IadPartition;",
        "IAD_STATUS_NOT_CONVERGED = 7",
        "iad_chain_new(",
        "iad_solve(",
        "iad_rate_report(",
        "iad_last_error_message(void)",
    ] {
        assert!(text.contains(sym), "header lacks {sym}");
    }
    // Check that the header parses as C when a compiler is present.
    if let Ok(out) = Command::new("cc").args(["-fsyntax-only", "-xc", "-std=c99"]).arg(&header).output() {
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
}
