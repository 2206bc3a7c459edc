use std::ffi::{c_char, CStr, CString};
use std::ptr;

use wbcip_ffi::*;

const LAKE: &str = r#"
[case]
test = "lake"
t_final = 1.0

[discretization]
basis = "pgl"
degree = 2
elems = [25]
scheme = "wbgf"
stab = "jg"
"#;

fn last_error() -> String {
    let mut buf = [0 as c_char; 256];
    unsafe {
        wbcip_last_error_message(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

fn new_sim(toml: &str) -> (WbcipStatus, *mut WbcipSimulation) {
    let text = CString::new(toml).unwrap();
    let mut sim = ptr::null_mut();
    let st = unsafe { wbcip_simulation_new(text.as_ptr(), &mut sim) };
    (st, sim)
}

#[test]
fn lake_round_trip() {
    let (st, sim) = new_sim(LAKE);
    assert_eq!(st, WbcipStatus::Ok, "{}", last_error());
    unsafe {
        let mut n = 0usize;
        assert_eq!(wbcip_simulation_num_dofs(sim, &mut n), WbcipStatus::Ok);
        assert_eq!(n, 51);
        assert_eq!(wbcip_simulation_advance(sim, 0.5), WbcipStatus::Ok);
        let mut t = 0.0;
        assert_eq!(wbcip_simulation_time(sim, &mut t), WbcipStatus::Ok);
        assert!((t - 0.5).abs() < 1e-12);

        let mut x = vec![0.0; n];
        let mut h = vec![0.0; n];
        let mut q = vec![0.0; n];
        assert_eq!(wbcip_simulation_copy_state(sim, x.as_mut_ptr(), h.as_mut_ptr(), q.as_mut_ptr(), n), WbcipStatus::Ok);
        assert_eq!(x[0], 0.0);
        assert_eq!(x[n - 1], 25.0);
        assert!(q.iter().all(|v| v.abs() < 1e-12));
        assert!((h[0] - 0.5).abs() < 1e-15);

        let (mut eh, mut eq) = (1.0, 1.0);
        assert_eq!(wbcip_simulation_l1_error(sim, &mut eh, &mut eq), WbcipStatus::Ok);
        assert!(eh < 1e-11 && eq < 1e-11, "{eh} {eq}");

        assert_eq!(
            wbcip_simulation_copy_state(sim, ptr::null_mut(), h.as_mut_ptr(), ptr::null_mut(), n - 1),
            WbcipStatus::BufferTooSmall
        );
        wbcip_simulation_free(sim);
    }
}

#[test]
fn errors_are_reported() {
    let (st, sim) = new_sim("[case]\ntest = \"nowhere\"");
    assert_eq!(st, WbcipStatus::Config);
    assert!(sim.is_null());
    assert!(last_error().contains("nowhere"), "{}", last_error());

    let bad_degree = LAKE.replace("degree = 2", "degree = 6");
    assert_eq!(new_sim(&bad_degree).0, WbcipStatus::Config);

    unsafe {
        assert_eq!(wbcip_simulation_advance(ptr::null_mut(), 1.0), WbcipStatus::NullPointer);
        let mut t = 0.0;
        assert_eq!(wbcip_simulation_time(ptr::null(), &mut t), WbcipStatus::NullPointer);
        wbcip_simulation_free(ptr::null_mut());
        assert_eq!(wbcip_simulation_new(ptr::null(), &mut ptr::null_mut()), WbcipStatus::NullPointer);
    }
}

#[test]
fn transcritical_friction_has_no_reference() {
    let toml = LAKE.replace("test = \"lake\"", "test = \"trans\"\nfriction = 0.03");
    let (st, sim) = new_sim(&toml);
    assert_eq!(st, WbcipStatus::Ok, "{}", last_error());
    unsafe {
        let (mut eh, mut eq) = (0.0, 0.0);
        assert_eq!(wbcip_simulation_l1_error(sim, &mut eh, &mut eq), WbcipStatus::NoReference);
        wbcip_simulation_free(sim);
    }
}

#[test]
fn theta_and_flux() {
    let mut buf = [0.0; 9];
    unsafe {
        assert_eq!(wbcip_theta_coefficients(2, buf.as_mut_ptr(), buf.len()), WbcipStatus::Ok);
        assert!((buf[3] - 5.0 / 24.0).abs() < 1e-15);
        assert!((buf[7] - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(wbcip_theta_coefficients(2, buf.as_mut_ptr(), 8), WbcipStatus::BufferTooSmall);
        assert_eq!(wbcip_theta_coefficients(0, buf.as_mut_ptr(), 9), WbcipStatus::InvalidArgument);

        let mut f = [0.0; 2];
        assert_eq!(wbcip_flux(2.0, 24.0, 9.81, f.as_mut_ptr()), WbcipStatus::Ok);
        assert_eq!(f[0], 24.0);
        assert!((f[1] - (288.0 + 19.62)).abs() < 1e-12);
        assert_eq!(wbcip_flux(-1.0, 0.0, 9.81, f.as_mut_ptr()), WbcipStatus::InvalidState);
    }
}

#[test]
fn header_declares_the_interface() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/wbcip.h")).unwrap();
    for name in [
        "typedef struct WbcipSimulation WbcipSimulation;",
        "WBCIP_STATUS_OK = 0",
        "wbcip_simulation_new(",
        "wbcip_simulation_advance(",
        "wbcip_simulation_copy_state(",
        "wbcip_simulation_l1_error(",
        "wbcip_theta_coefficients(",
        "wbcip_last_error_message(",
        "wbcip_simulation_free(",
    ] {
        assert!(header.contains(name), "missing {name}");
    }
}
