//! Euler–Maclaurin evaluation of ζ(s) at moderate heights.
//!
//! Used as the audit oracle for the Riemann–Siegel formula and as the
//! evaluator below the height where the Riemann–Siegel remainder series is
//! accurate to 1e-6.

use num_complex::Complex64;
use std::f64::consts::PI;

const CORRECTION_TERMS: usize = 15;

/// B_{2k} / (2k)! for k = 1..=CORRECTION_TERMS, from
/// B_{2k}/(2k)! = (−1)^{k+1} 2 ζ(2k) / (2π)^{2k}.
fn bernoulli_over_factorial() -> [f64; CORRECTION_TERMS] {
    let mut out = [0.0; CORRECTION_TERMS];
    for (i, slot) in out.iter_mut().enumerate() {
        let k = (i + 1) as i32;
        let zeta_2k = match k {
            1 => PI * PI / 6.0,
            2 => PI.powi(4) / 90.0,
            _ => (1..=200).rev().map(|n| (n as f64).powi(-2 * k)).sum::<f64>(),
        };
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        *slot = sign * 2.0 * zeta_2k / (2.0 * PI).powi(2 * k);
    }
    out
}

/// ζ(s) for Re s > 0, s ≠ 1, |Im s| up to a few thousand.
pub fn zeta_euler_maclaurin(s: Complex64) -> Complex64 {
    let t = s.im.abs();
    let n = (t / 2.0).ceil() as u64 + 20;
    let mut head = Complex64::new(0.0, 0.0);
    for k in (1..n).rev() {
        head += (-s * (k as f64).ln()).exp();
    }
    let nf = n as f64;
    let ln_n = nf.ln();
    let n_pow = (-s * ln_n).exp();
    let mut total = head + n_pow * nf / (s - 1.0) + 0.5 * n_pow;
    // Correction k: B_{2k}/(2k)! · s(s+1)…(s+2k−2) · N^{−s−2k+1}.
    let coeffs = bernoulli_over_factorial();
    let mut rising = s;
    let mut npow = n_pow / nf;
    for (i, c) in coeffs.iter().enumerate() {
        let term = rising * npow * *c;
        total += term;
        if term.norm() < 1e-17 * total.norm() {
            break;
        }
        let m = (2 * i + 1) as f64;
        rising *= (s + m) * (s + m + 1.0);
        npow /= nf * nf;
    }
    total
}

/// ζ(½ + it).
pub fn zeta_critical(t: f64) -> Complex64 {
    zeta_euler_maclaurin(Complex64::new(0.5, t))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_axis_values() {
        let z2 = zeta_euler_maclaurin(Complex64::new(2.0, 0.0));
        assert!((z2.re - PI * PI / 6.0).abs() < 1e-13);
        let zh = zeta_euler_maclaurin(Complex64::new(0.5, 0.0));
        assert!((zh.re + 1.460_354_508_809_586_8).abs() < 1e-13);
    }

    #[test]
    fn critical_line_reference() {
        // ln|ζ(½ + 50i)|.
        let z = zeta_critical(50.0);
        assert!((z.norm().ln() + 1.076_650_212_440_349_6).abs() < 1e-11);
        let z = zeta_critical(1000.0);
        assert!((z.norm().ln() + 0.002_207_797_871_519_188).abs() < 1e-10);
    }
}
