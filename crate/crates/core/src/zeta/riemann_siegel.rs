//! Hardy's Z-function.

use super::euler_maclaurin::zeta_critical;
use super::rs_coeffs::{C0, C1, C2, C3, C4};
use super::theta::rs_theta;
use crate::error::{LabError, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

pub const DEFAULT_HEIGHT_CAP: f64 = 1e9;

/// Below this height Z comes from Euler–Maclaurin.
pub const RIEMANN_SIEGEL_FROM: f64 = 60.0;

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

/// Riemann–Siegel main sum plus the remainder terms C0..C4. Meaningful for
/// t ≥ 10; absolute error about 3e-6 at t = 20, 3e-7 at t = 50 and below
/// 1e-10 from t = 10^4.
pub fn riemann_siegel_z(t: f64) -> f64 {
    let theta = super::theta::theta_asymptotic(t);
    let a = (t / (2.0 * PI)).sqrt();
    let n = a.floor();
    let p = a - n;
    let n = n as u64;
    let mut main = 0.0;
    for k in 1..=n {
        let kf = k as f64;
        main += (theta - t * kf.ln()).cos() / kf.sqrt();
    }
    let x = p - 0.5;
    let inv = 1.0 / a;
    let series = horner(&C0, x)
        + inv * (horner(&C1, x) + inv * (horner(&C2, x) + inv * (horner(&C3, x) + inv * horner(&C4, x))));
    let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
    2.0 * main + sign * series / a.sqrt()
}

/// Z(t) = e^{iθ(t)} ζ(½ + it) for 0 < t ≤ height cap.
pub fn hardy_z(t: f64) -> Result<f64> {
    hardy_z_capped(t, DEFAULT_HEIGHT_CAP)
}

pub fn hardy_z_capped(t: f64, cap: f64) -> Result<f64> {
    if t > cap {
        return Err(LabError::capacity(format!("height t = {t}"), cap));
    }
    let theta = rs_theta(t)?;
    if t >= RIEMANN_SIEGEL_FROM {
        Ok(riemann_siegel_z(t))
    } else {
        Ok((Complex64::from_polar(1.0, theta) * zeta_critical(t)).re)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_zero_is_bracketed() {
        let a = hardy_z(14.0).unwrap();
        let b = hardy_z(14.2).unwrap();
        assert!(a * b < 0.0);
        assert!((a + 0.105_626_267_779_882_61).abs() < 1e-10);
        assert!((b - 0.052_045_271_715_564_37).abs() < 1e-10);
        // Riemann–Siegel alone also brackets it.
        assert!(riemann_siegel_z(14.0) * riemann_siegel_z(14.2) < 0.0);
    }

    #[test]
    fn riemann_siegel_matches_euler_maclaurin_at_fifty() {
        let rs = riemann_siegel_z(50.0);
        let em = zeta_critical(50.0).norm();
        assert!((rs.abs() - em).abs() < 1e-6, "{rs} vs {em}");
        assert!((rs + 0.340_735_005_955_025).abs() < 1e-6);
    }

    #[test]
    fn reference_values_at_height() {
        let cases = [
            (123.456, -0.627_391_676_897_800_5),
            (1000.0, 0.997_794_637_521_586_6),
            (1e4, -0.341_394_724_231_208_56),
            (1e6, -2.806_133_878_430_698_5),
        ];
        for (t, want) in cases {
            let got = hardy_z(t).unwrap();
            assert!((got - want).abs() < 1e-7, "Z({t}) = {got}, want {want}");
        }
    }

    #[test]
    fn z_is_real() {
        for t in [20.0, 33.3, 57.0, 150.0, 777.7] {
            let theta = rs_theta(t).unwrap();
            let w = Complex64::from_polar(1.0, theta) * zeta_critical(t);
            assert!(w.im.abs() < 1e-6, "t = {t}: {}", w.im);
        }
    }

    #[test]
    fn height_cap() {
        assert!(matches!(hardy_z(2e9), Err(LabError::Capacity { .. })));
    }
}
