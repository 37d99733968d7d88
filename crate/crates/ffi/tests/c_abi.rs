use disorder_lab_ffi::*;
use std::ffi::{CStr, CString};
use std::ptr;

fn last_error() -> String {
    let p = dl_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn prime_table_round_trip() {
    let mut table = ptr::null_mut();
    assert_eq!(unsafe { dl_prime_table_new(100, 128, &mut table) }, DlStatus::Ok);
    assert_eq!(unsafe { dl_prime_table_len(table) }, 25);
    let mut s = 0.0;
    assert_eq!(unsafe { dl_prime_table_mertens_sum(table, 10.0, &mut s) }, DlStatus::Ok);
    assert!((s - (1.0 / 2.0 + 1.0 / 3.0 + 1.0 / 5.0 + 1.0 / 7.0)).abs() < 1e-15);
    assert_eq!(
        unsafe { dl_prime_table_mertens_sum(table, 1e4, &mut s) },
        DlStatus::OutOfRange
    );
    assert!(last_error().contains("exceeds"));
    unsafe { dl_prime_table_free(table) };
}

#[test]
fn null_handles_are_rejected() {
    let mut s = 0.0;
    assert_eq!(
        unsafe { dl_prime_table_mertens_sum(ptr::null(), 10.0, &mut s) },
        DlStatus::NullPointer
    );
    assert_eq!(unsafe { dl_prime_table_len(ptr::null()) }, 0);
    assert_eq!(unsafe { dl_hardy_z(14.0, ptr::null_mut()) }, DlStatus::NullPointer);
    unsafe { dl_prime_table_free(ptr::null_mut()) };
    unsafe { dl_string_free(ptr::null_mut()) };
}

#[test]
fn prime_sum_and_phase() {
    let (mut table, mut ctx) = (ptr::null_mut(), ptr::null_mut());
    unsafe {
        assert_eq!(dl_phase_context_new(300.0, 1.0, 64, &mut ctx), DlStatus::Ok);
        let bits = dl_phase_context_precision_bits(ctx);
        assert!(bits > 64);
        assert_eq!(dl_prime_table_new(2000, bits, &mut table), DlStatus::Ok);
        let mut phase = 0.0;
        assert_eq!(dl_reduce_phase(ctx, table, 0, 1.5, &mut phase), DlStatus::Ok);
        assert!((0.0..std::f64::consts::TAU).contains(&phase));
        assert_eq!(
            dl_reduce_phase(ctx, table, 10_000, 1.5, &mut phase),
            DlStatus::OutOfRange
        );
        let (mut re, mut im) = (0.0, 0.0);
        assert_eq!(dl_prime_sum(ctx, table, 1, 1, 1.5, &mut re, &mut im), DlStatus::Ok);
        assert!(re.is_finite() && im.is_finite() && (re != 0.0 || im != 0.0));
        assert_eq!(dl_prime_sum(ctx, table, 1, 1, 3.0, &mut re, &mut im), DlStatus::Domain);
        dl_phase_context_free(ctx);
        dl_prime_table_free(table);
    }
}

#[test]
fn zeta_functions() {
    let mut z = 0.0;
    assert_eq!(unsafe { dl_hardy_z(50.0, &mut z) }, DlStatus::Ok);
    assert!((z + 0.340_735_005_955_025).abs() < 1e-9);
    assert_eq!(unsafe { dl_rs_theta(-1.0, &mut z) }, DlStatus::Domain);
}

fn run(name: Option<&str>, config: &str, format: DlFormat) -> (DlStatus, i32, Option<String>) {
    let name = name.map(|n| CString::new(n).unwrap());
    let config = CString::new(config).unwrap();
    let mut report = ptr::null_mut();
    let mut code = -1;
    let status = unsafe {
        dl_run_experiment(
            name.as_ref().map_or(ptr::null(), |n| n.as_ptr()),
            config.as_ptr(),
            5,
            1,
            format,
            &mut report,
            &mut code,
        )
    };
    let text = (!report.is_null()).then(|| {
        let s = unsafe { CStr::from_ptr(report) }.to_string_lossy().into_owned();
        unsafe { dl_string_free(report) };
        s
    });
    (status, code, text)
}

#[test]
fn run_experiment_through_the_abi() {
    let (status, code, text) = run(Some("mertens"), "x = 10", DlFormat::Csv);
    assert_eq!(status, DlStatus::Ok);
    assert_eq!(code, 0);
    assert!(text.unwrap().contains("sum 1/p,1.1761904761904762e0"));

    let (status, code, text) = run(None, "experiment = \"offdiag\"\nmax_int = 50", DlFormat::Json);
    assert_eq!(status, DlStatus::Ok);
    assert_eq!(code, 0);
    assert!(text.unwrap().contains("\"experiment\": \"offdiag\""));

    let (status, code, text) = run(Some("no-such"), "", DlFormat::Csv);
    assert_eq!((status, code, text), (DlStatus::Usage, 2, None));
    assert!(last_error().contains("mertens"));

    let (status, code, _) = run(Some("mertens"), "y = 1", DlFormat::Csv);
    assert_eq!((status, code), (DlStatus::Schema, 2));
}
