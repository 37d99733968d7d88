//! Riemann–Siegel theta function.

use crate::error::{LabError, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Coefficients of t^{-(2k-1)} in the asymptotic expansion,
/// (1 - 2^{1-2k}) |B_{2k}| / (4k(2k-1)).
const ASYMPTOTIC: [f64; 6] = [
    1.0 / 48.0,
    7.0 / 5760.0,
    31.0 / 80640.0,
    127.0 / 430080.0,
    511.0 / 1216512.0,
    1414477.0 / 1476034560.0,
];

/// Below this height θ comes from log Γ instead of the asymptotic series.
const ASYMPTOTIC_FROM: f64 = 10.0;

/// θ(t) = arg Γ(1/4 + it/2) − (t/2) log π, continuous in t > 0.
pub fn rs_theta(t: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(LabError::Domain(format!("theta needs t > 0, got {t}")));
    }
    Ok(if t >= ASYMPTOTIC_FROM {
        theta_asymptotic(t)
    } else {
        theta_log_gamma(t)
    })
}

pub(crate) fn theta_asymptotic(t: f64) -> f64 {
    let inv = 1.0 / t;
    let inv2 = inv * inv;
    let mut pw = inv;
    let mut tail = 0.0;
    for c in ASYMPTOTIC {
        let term = c * pw;
        tail += term;
        if term.abs() < 1e-17 {
            break;
        }
        pw *= inv2;
    }
    0.5 * t * (t / (2.0 * PI)).ln() - 0.5 * t - PI / 8.0 + tail
}

/// Im log Γ(1/4 + it/2) − (t/2) log π, via upward recurrence and Stirling.
pub(crate) fn theta_log_gamma(t: f64) -> f64 {
    const SHIFT: usize = 12;
    let z = Complex64::new(0.25, 0.5 * t);
    let mut im = 0.0;
    for j in 0..SHIFT {
        let w = z + j as f64;
        im -= w.im.atan2(w.re);
    }
    let w = z + SHIFT as f64;
    // Stirling: (w − ½) log w − w + ½ log 2π + Σ B_{2k} / (2k(2k−1) w^{2k−1}).
    const B: [f64; 6] = [
        1.0 / 6.0,
        -1.0 / 30.0,
        1.0 / 42.0,
        -1.0 / 30.0,
        5.0 / 66.0,
        -691.0 / 2730.0,
    ];
    let mut s = (w - 0.5) * w.ln() - w;
    let winv = w.inv();
    let w2 = winv * winv;
    let mut pw = winv;
    for (i, b) in B.iter().enumerate() {
        let k = (i + 1) as f64;
        s += pw * (b / (2.0 * k * (2.0 * k - 1.0)));
        pw *= w2;
    }
    im + s.im - 0.5 * t * PI.ln()
}
