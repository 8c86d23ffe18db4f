use std::ptr;

use subdelay::sim::{prbs, simulate_mimo, ExcitationKind, ExcitationSpec, MimoDelayedSystem, RationalChannel, StepSchedule};
use subdelay_ffi::*;

fn siso_data(n: usize, delay: usize) -> (Vec<f64>, Vec<f64>) {
    let ch = RationalChannel::new(vec![1.0], vec![1.0, -0.5], StepSchedule::constant(delay)).unwrap();
    let sys = MimoDelayedSystem::new(1, 1, vec![ch], vec![0.0]).unwrap();
    let spec = ExcitationSpec { kind: ExcitationKind::Prbs { register_length: 7, amplitude: 1.0 }, length: n, seed: 3 };
    let u: Vec<Vec<f64>> = prbs(&spec).unwrap().into_iter().map(|x| vec![x]).collect();
    let samples = simulate_mimo(&sys, &u, 0).unwrap();
    (samples.iter().map(|s| s.u[0]).collect(), samples.iter().map(|s| s.y[0]).collect())
}

fn config() -> SdConfig {
    SdConfig { j: 60, i: 4, h: 6, gamma: 1.0, d_max: 4, ..sd_config_default() }
}

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 256];
    let n = unsafe { sd_last_error_message(buf.as_mut_ptr(), buf.len()) };
    if n == 0 {
        return String::new();
    }
    unsafe { std::ffi::CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

#[test]
fn bootstrap_update_and_query() {
    let cfg = config();
    let (u, y) = siso_data(120, 2);
    let n0 = 69;
    let mut est: *mut SdEstimator = ptr::null_mut();
    let st = unsafe { sd_estimator_bootstrap(&cfg, u.as_ptr(), y.as_ptr(), n0, &mut est) };
    assert_eq!(st, SdStatus::Ok, "{}", last_error());
    assert!(!est.is_null());

    for k in n0..u.len() {
        assert_eq!(unsafe { sd_estimator_update(est, &u[k], &y[k]) }, SdStatus::Ok);
    }
    let mut k = 0usize;
    assert_eq!(unsafe { sd_estimator_time(est, &mut k) }, SdStatus::Ok);
    assert_eq!(k, 119);

    let mut markov = vec![0.0; 6];
    assert_eq!(unsafe { sd_estimator_markov(est, markov.as_mut_ptr(), markov.len()) }, SdStatus::Ok);
    let expected = [0.0, 0.0, 0.0, 1.0, 0.5, 0.25];
    for (a, b) in markov.iter().zip(expected) {
        assert!((a - b).abs() < 1e-8, "{markov:?}");
    }

    let mut d = [99usize; 1];
    let mut v = [9u8; 1];
    let st = unsafe { sd_estimator_delays(est, SD_CRITERION_RATIO, 0.0, d.as_mut_ptr(), v.as_mut_ptr(), 1) };
    assert_eq!(st, SdStatus::Ok);
    assert_eq!((d[0], v[0]), (2, 1));
    let st = unsafe { sd_estimator_delays(est, SD_CRITERION_THRESHOLD, 0.02, d.as_mut_ptr(), v.as_mut_ptr(), 1) };
    assert_eq!(st, SdStatus::Ok);
    assert_eq!(d[0], 2);

    unsafe { sd_estimator_free(est) };
}

#[test]
fn error_codes_and_messages() {
    let cfg = config();
    let (u, y) = siso_data(120, 1);
    let mut est: *mut SdEstimator = ptr::null_mut();

    assert_eq!(
        unsafe { sd_estimator_bootstrap(ptr::null(), u.as_ptr(), y.as_ptr(), 69, &mut est) },
        SdStatus::NullPointer
    );
    assert_eq!(
        unsafe { sd_estimator_bootstrap(&cfg, u.as_ptr(), y.as_ptr(), 10, &mut est) },
        SdStatus::InsufficientData
    );
    assert!(last_error().contains("insufficient data"));

    let zeros = vec![0.0; 120];
    assert_eq!(
        unsafe { sd_estimator_bootstrap(&cfg, zeros.as_ptr(), zeros.as_ptr(), 120, &mut est) },
        SdStatus::Excitation
    );
    assert!(last_error().contains("persistently exciting"));

    let bad = SdConfig { gamma: 1.5, ..cfg };
    assert_eq!(
        unsafe { sd_estimator_bootstrap(&bad, u.as_ptr(), y.as_ptr(), 69, &mut est) },
        SdStatus::InvalidArgument
    );
    assert!(est.is_null());

    assert_eq!(unsafe { sd_estimator_bootstrap(&cfg, u.as_ptr(), y.as_ptr(), 69, &mut est) }, SdStatus::Ok);
    assert_eq!(last_error(), "");

    let nan = f64::NAN;
    assert_eq!(unsafe { sd_estimator_update(est, &nan, &y[70]) }, SdStatus::NonFinite);
    let mut k = 0;
    unsafe { sd_estimator_time(est, &mut k) };
    assert_eq!(k, 68, "failed update must not advance the estimator");

    let mut small = [0.0; 3];
    assert_eq!(unsafe { sd_estimator_markov(est, small.as_mut_ptr(), 3) }, SdStatus::BufferTooSmall);
    let (mut d, mut v) = ([0usize; 1], [0u8; 1]);
    assert_eq!(
        unsafe { sd_estimator_delays(est, 7, 0.0, d.as_mut_ptr(), v.as_mut_ptr(), 1) },
        SdStatus::InvalidArgument
    );
    assert_eq!(
        unsafe { sd_estimator_delays(est, SD_CRITERION_THRESHOLD, -1.0, d.as_mut_ptr(), v.as_mut_ptr(), 1) },
        SdStatus::InvalidArgument
    );
    assert_eq!(unsafe { sd_estimator_update(ptr::null_mut(), &u[0], &y[0]) }, SdStatus::NullPointer);

    unsafe {
        sd_estimator_free(est);
        sd_estimator_free(ptr::null_mut());
    }
}

#[test]
fn truncated_error_message_is_terminated() {
    let cfg = config();
    let (u, y) = siso_data(20, 1);
    let mut est: *mut SdEstimator = ptr::null_mut();
    unsafe { sd_estimator_bootstrap(&cfg, u.as_ptr(), y.as_ptr(), 20, &mut est) };
    let mut buf = [1 as std::ffi::c_char; 8];
    let full = unsafe { sd_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert!(full > buf.len());
    assert_eq!(buf[7], 0);
}

#[test]
fn status_strings() {
    let s = unsafe { std::ffi::CStr::from_ptr(sd_status_string(SdStatus::Excitation)) };
    assert_eq!(s.to_str().unwrap(), "input not persistently exciting");
}

#[test]
fn header_declares_the_api() {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("include/subdelay.h");
    let header = std::fs::read_to_string(&path).expect("generated header");
    for name in [
        "typedef struct SdEstimator SdEstimator",
        "SdConfig sd_config_default(void)",
        "sd_estimator_bootstrap",
        "sd_estimator_update",
        "sd_estimator_delays",
        "sd_estimator_markov",
        "sd_estimator_free",
        "sd_last_error_message",
        "SD_STATUS_EXCITATION",
        "SD_CRITERION_THRESHOLD",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
    // compile the header as C when a compiler is around
    if let Ok(status) = std::process::Command::new("cc")
        .args(["-fsyntax-only", "-x", "c", "-std=c99", "-Wall", "-Werror"])
        .arg(&path)
        .status()
    {
        assert!(status.success(), "header does not compile");
    }
}
