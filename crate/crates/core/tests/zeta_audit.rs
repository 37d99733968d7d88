//! Critical-line evaluation against values frozen from an independent
//! 50-digit mpmath computation.
#![allow(clippy::excessive_precision)]

use disorder_lab::zeta::{
    hardy_z, log_abs_zeta, log_zeta_det, riemann_siegel_z, rs_theta, zero_count_scan, zeta_critical, ZeroScan,
};
use std::f64::consts::PI;

/// Truncation bound for the Riemann-Siegel formula with five correction terms.
fn rs_bound(t: f64) -> f64 {
    0.017 * t.powf(-2.75)
}

#[test]
fn theta_reference_values() {
    for (t, want) in [
        (1.0, -1.767_547_952_812_290_4),
        (5.0, -3.459_620_375_363_462_5),
        (10.0, -3.067_074_396_289_895_3),
        (100.0, 87.972_165_231_787_2),
    ] {
        let got = rs_theta(t).unwrap();
        assert!((got - want).abs() < 1e-10, "theta({t}) = {got}, want {want}");
    }
}

#[test]
fn hardy_z_reference_values() {
    for (t, want, tol) in [
        (14.0, -0.105_626_267_779_882_61, 1e-10),
        (14.2, 0.052_045_271_715_564_37, 1e-10),
        (50.0, -0.340_735_005_955_025, 1e-10),
        (123.456, -0.627_391_676_897_800_5, 1e-9 + rs_bound(123.456)),
        (1000.0, 0.997_794_637_521_586_6, 1e-9),
        (1e4, -0.341_394_724_231_208_56, 1e-9),
        (1e6, -2.806_133_878_430_698_5, 1e-7),
    ] {
        let got = hardy_z(t).unwrap();
        assert!((got - want).abs() < tol, "Z({t}) = {got}, want {want}");
    }
}

#[test]
fn riemann_siegel_agrees_with_euler_maclaurin_where_both_apply() {
    for i in 0..40 {
        let t = 60.0 + 23.7 * i as f64;
        let rs = riemann_siegel_z(t);
        let em = (zeta_critical(t) * num_complex::Complex64::from_polar(1.0, rs_theta(t).unwrap())).re;
        assert!((rs - em).abs() < rs_bound(t) + 1e-10, "t = {t}: {rs} vs {em}");
    }
}

#[test]
fn log_abs_zeta_reference_values() {
    for (t, want) in [
        (50.0, -1.076_650_212_440_349_6),
        (123.456, -0.466_184_249_335_548_43),
        (1000.0, -0.002_207_797_871_519_188),
    ] {
        assert!((log_abs_zeta(t).unwrap() - want).abs() < 1e-8, "t = {t}");
    }
}

#[test]
fn zero_scan_counts_and_first_zeros() {
    let scan = zero_count_scan(1e4, 4.0).unwrap();
    assert_eq!(scan.zeros().len(), 10_142);
    assert!(scan.warnings().is_empty());
    for (got, want) in scan
        .zeros()
        .iter()
        .zip([14.134_725_141_734_693, 21.022_039_638_771_555, 25.010_857_580_145_688])
    {
        assert!((got - want).abs() < 1e-6);
    }
    // N(t) = θ(t)/π + 1 + S(t) with |S| small at these heights.
    for t in [500.5, 2000.25, 9000.75] {
        let s = scan.count(t).unwrap() as f64 - rs_theta(t).unwrap() / PI - 1.0;
        assert!(s.abs() < 2.0, "S({t}) = {s}");
        let p = log_zeta_det(t, &scan).unwrap();
        assert!((p.log_zeta.im - PI * s).abs() < 1e-9);
    }
}

#[test]
fn scan_cache_round_trip() {
    let scan = zero_count_scan(300.0, 4.0).unwrap();
    let mut buf = Vec::new();
    scan.write_cache(&mut buf).unwrap();
    assert_eq!(&buf[..5], b"ZSCN1");
    let back = ZeroScan::read_cache(buf.as_slice()).unwrap();
    assert_eq!(back.zeros(), scan.zeros());
    assert_eq!(back.t_max(), scan.t_max());
    buf.truncate(buf.len() - 3);
    assert!(ZeroScan::read_cache(buf.as_slice()).is_err());
}

#[test]
fn height_limits() {
    assert!(zero_count_scan(2e6, 4.0).is_err());
    assert!(hardy_z(2e9).is_err());
    let scan = zero_count_scan(100.0, 4.0).unwrap();
    assert!(scan.count(150.0).is_err());
}
