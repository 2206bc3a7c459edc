use std::fs;
use std::process::Command;

fn wbcip(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_wbcip")).args(args).output().unwrap()
}

#[test]
fn run_writes_solution_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let args = [
        "run", "--test", "super", "--basis", "pgl", "--degree", "2", "--elems", "10", "--tfinal", "0.5", "--out", out,
    ];
    let o = wbcip(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let sol = fs::read_to_string(dir.path().join("solution.csv")).unwrap();
    let lines: Vec<&str> = sol.lines().collect();
    assert_eq!(lines[0], "x,H,q,eta,B");
    assert_eq!(lines.len(), 1 + 21);
    let first: Vec<f64> = lines[1].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(first, vec![0.0, 2.0, 24.0, 2.0, 0.0]);
    let errs = fs::read_to_string(dir.path().join("errors.csv")).unwrap();
    assert!(errs.starts_with("errH_L1,errq_L1\n"));

    // identical configuration, identical bytes
    let dir2 = tempfile::tempdir().unwrap();
    let mut args2 = args;
    args2[args2.len() - 1] = dir2.path().to_str().unwrap();
    assert!(wbcip(&args2).status.success());
    assert_eq!(sol, fs::read_to_string(dir2.path().join("solution.csv")).unwrap());
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("lake.toml");
    fs::write(
        &cfg,
        "[case]\ntest = \"lake\"\nt_final = 0.2\n\n[discretization]\nbasis = \"b\"\ndegree = 3\nelems = [25]\nscheme = \"wbhs\"\nstab = \"jt\"\n",
    )
    .unwrap();
    let o = wbcip(&["wb-check", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("PASS"));

    let o = wbcip(&["wb-check", "--config", cfg.to_str().unwrap(), "--scheme", "nonwb", "--stab", "jc"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}

#[test]
fn converge_emits_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = wbcip(&[
        "converge", "--degree", "1", "--elems", "10,20,40", "--tfinal", "20", "--scheme", "wbhs", "--stab", "jr", "--out",
        out,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "n_elem,h,errH,orderH,errq,orderq");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("10,") && lines[1].ends_with(','));
    let order: f64 = lines[3].split(',').nth(3).unwrap().parse().unwrap();
    assert!(order > 1.5, "{order}");
    assert!(dir.path().join("convergence.dat").exists());
}

#[test]
fn perturb_reports_metric() {
    let o = wbcip(&["perturb", "--degree", "2", "--elems", "30", "--tfinal", "0.2", "--scheme", "wbgf", "--stab", "jg"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = String::from_utf8_lossy(&o.stdout);
    let mut lines = s.lines();
    assert_eq!(lines.next(), Some("t_final,window_left,window_right,metric"));
    let metric: f64 = lines.next().unwrap().split(',').nth(3).unwrap().parse().unwrap();
    assert!(metric < 1e-7, "{metric}");
}

#[test]
fn failures_exit_nonzero_with_diagnostic() {
    let o = wbcip(&["run", "--degree", "7"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("degree"));

    let o = wbcip(&["run", "--stab", "jx"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("jx"));

    // an unbalanced source with time steps far above the stability limit
    let o = wbcip(&[
        "run", "--test", "lake", "--scheme", "nonwb", "--stab", "jc", "--degree", "1", "--elems", "10", "--cfl", "5",
        "--tfinal", "100",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("time step") && err.contains("dof"), "{err}");

    let o = wbcip(&["run", "--config", "/nonexistent/config.toml"]);
    assert_eq!(o.status.code(), Some(2));
}
