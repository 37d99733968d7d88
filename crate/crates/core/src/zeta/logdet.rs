//! Continuous determination of log ζ(½ + it) between zeros.

use super::riemann_siegel::hardy_z;
use super::scan::ZeroScan;
use super::theta::rs_theta;
use crate::error::{LabError, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Closer than this to a located zero, log ζ is treated as undefined.
pub const SINGULAR_RADIUS: f64 = 1e-6;
/// Closer than this, the value is kept but flagged.
pub const NEAR_ZERO_RADIUS: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BranchFlag {
    Clean,
    /// Within 1e-3 of a zero; |log ζ| is large.
    NearZero,
    /// The sign of Z disagrees with the parity of N(t).
    ParityMismatch,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CriticalLinePoint {
    pub t: f64,
    pub z: f64,
    pub theta: f64,
    pub zeta: Complex64,
    pub log_zeta: Complex64,
    pub s_count_basis: u64,
    pub flag: BranchFlag,
}

/// log ζ(½ + it) with Re = ln|Z(t)| and Im = π(N(t) − θ(t)/π − 1).
pub fn log_zeta_det(t: f64, scan: &ZeroScan) -> Result<CriticalLinePoint> {
    let count = scan.count(t)?;
    let dist = scan.distance_to_zero(t);
    if dist < SINGULAR_RADIUS {
        return Err(LabError::Singularity(format!(
            "t = {t} lies within {SINGULAR_RADIUS} of a zero"
        )));
    }
    let z = hardy_z(t)?;
    if z == 0.0 {
        return Err(LabError::Singularity(format!("Z({t}) = 0")));
    }
    let theta = rs_theta(t)?;
    // ζ = |Z| (−1)^{N+1} e^{−iθ}, so Z < 0 exactly when N is even.
    let parity_ok = (z < 0.0) == (count % 2 == 0);
    let flag = if dist < NEAR_ZERO_RADIUS {
        BranchFlag::NearZero
    } else if !parity_ok {
        BranchFlag::ParityMismatch
    } else {
        BranchFlag::Clean
    };
    Ok(CriticalLinePoint {
        t,
        z,
        theta,
        zeta: Complex64::from_polar(1.0, -theta) * z,
        log_zeta: Complex64::new(z.abs().ln(), PI * (count as f64 - 1.0) - theta),
        s_count_basis: count,
        flag,
    })
}

/// ln|ζ(½ + it)|; needs no zero count, so it is available up to the height cap.
pub fn log_abs_zeta(t: f64) -> Result<f64> {
    let z = hardy_z(t)?;
    if z == 0.0 {
        return Err(LabError::Singularity(format!("Z({t}) = 0")));
    }
    Ok(z.abs().ln())
}

/// L_λ(N, u) = log ζ(½ + iu e^{N^λ}) / √(log N).
pub fn sample_l(n: f64, lambda: f64, u: f64, scan: &ZeroScan) -> Result<Complex64> {
    if !(1.0..=2.0).contains(&u) {
        return Err(LabError::Domain(format!("u must lie in [1, 2], got {u}")));
    }
    if !(n > 1.0) || !(lambda > 0.0) {
        return Err(LabError::Domain("need N > 1 and lambda > 0".into()));
    }
    let t = u * n.powf(lambda).exp();
    Ok(log_zeta_det(t, scan)?.log_zeta / n.ln().sqrt())
}

/// log ζ over a grid of heights, replacing points that sit on a zero by the
/// adjacent grid point.
#[derive(Clone, Debug, PartialEq)]
pub struct GridLogZeta {
    pub values: Vec<Complex64>,
    pub resampled: usize,
    pub near_zero: usize,
    pub parity_mismatches: usize,
}

pub fn log_zeta_on_grid(ts: &[f64], scan: &ZeroScan) -> Result<GridLogZeta> {
    let mut out = GridLogZeta {
        values: Vec::with_capacity(ts.len()),
        resampled: 0,
        near_zero: 0,
        parity_mismatches: 0,
    };
    for (i, &t) in ts.iter().enumerate() {
        let p = match log_zeta_det(t, scan) {
            Ok(p) => p,
            Err(LabError::Singularity(msg)) => {
                out.resampled += 1;
                let alt = if i + 1 < ts.len() {
                    ts[i + 1]
                } else {
                    ts[i.saturating_sub(1)]
                };
                if alt == t {
                    return Err(LabError::Singularity(msg));
                }
                log_zeta_det(alt, scan)?
            }
            Err(e) => return Err(e),
        };
        match p.flag {
            BranchFlag::NearZero => out.near_zero += 1,
            BranchFlag::ParityMismatch => out.parity_mismatches += 1,
            BranchFlag::Clean => {}
        }
        out.values.push(p.log_zeta);
    }
    Ok(out)
}
