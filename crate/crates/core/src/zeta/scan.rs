//! Zero counting on the critical line by sign changes of Z.

use super::riemann_siegel::hardy_z;
use super::theta::rs_theta;
use crate::error::{LabError, Result};
use std::f64::consts::PI;
use std::io::{Read, Write};

pub const SCAN_HEIGHT_CAP: f64 = 1e6;
pub const MIN_GRID_DENSITY: f64 = 4.0;
/// Zeros are located to this width.
pub const ZERO_TOLERANCE: f64 = 1e-6;
/// The scan starts here; ζ has no zeros on the critical line below 14.
pub const SCAN_START: f64 = 10.0;

const MAGIC: &[u8; 5] = b"ZSCN1";
const VERSION: u8 = 1;
/// Window, in grid points per unit density, over which S(t) is averaged.
const DRIFT_WINDOW_SPACINGS: f64 = 8.0;
const DRIFT_LIMIT: f64 = 1.0;

/// N(t), the number of zeros of ζ(½ + iγ) with 0 < γ ≤ t, for t ≤ t_max.
#[derive(Clone, Debug, PartialEq)]
pub struct ZeroScan {
    t_max: f64,
    density: f64,
    zeros: Vec<f64>,
    warnings: Vec<String>,
}

/// Mean spacing of zeros near height t.
fn mean_spacing(t: f64) -> f64 {
    2.0 * PI / (t / (2.0 * PI)).ln().max(2.0)
}

fn bisect(mut lo: f64, mut hi: f64, mut zlo: f64) -> Result<f64> {
    while hi - lo > ZERO_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        let zm = hardy_z(mid)?;
        if zm == 0.0 {
            return Ok(mid);
        }
        if (zm > 0.0) == (zlo > 0.0) {
            lo = mid;
            zlo = zm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Minimizer of `sign · Z` on [lo, hi] by golden section, with its value.
fn golden_min(lo: f64, hi: f64, sign: f64) -> Result<(f64, f64)> {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = sign * hardy_z(c)?;
    let mut fd = sign * hardy_z(d)?;
    for _ in 0..60 {
        if fc <= 0.0 {
            return Ok((c, fc));
        }
        if fd <= 0.0 {
            return Ok((d, fd));
        }
        if b - a < ZERO_TOLERANCE {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = sign * hardy_z(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = sign * hardy_z(d)?;
        }
    }
    Ok(if fc < fd { (c, fc) } else { (d, fd) })
}

/// Scan Z on (SCAN_START, t_max] with `grid_density` points per mean zero
/// spacing, locating every sign change to 1e-6.
///
/// Where |Z| dips between two grid points of equal sign, the dip is refined;
/// a sign change at its minimum yields a pair of zeros the grid would have
/// missed. A window average of S(t) = N(t) − θ(t)/π − 1 far from zero raises
/// an integrity warning.
pub fn zero_count_scan(t_max: f64, grid_density: f64) -> Result<ZeroScan> {
    if !(t_max > SCAN_START) {
        return Err(LabError::Domain(format!(
            "scan height must exceed {SCAN_START}, got {t_max}"
        )));
    }
    if t_max > SCAN_HEIGHT_CAP {
        return Err(LabError::capacity(format!("scan height {t_max}"), SCAN_HEIGHT_CAP));
    }
    if !(grid_density >= MIN_GRID_DENSITY) {
        return Err(LabError::Domain(format!(
            "grid density must be at least {MIN_GRID_DENSITY} per zero spacing, got {grid_density}"
        )));
    }

    let mut zeros = Vec::new();
    let mut warnings = Vec::new();
    let window = (DRIFT_WINDOW_SPACINGS * grid_density).ceil() as usize;
    let mut s_window: std::collections::VecDeque<f64> = Default::default();
    let mut s_sum = 0.0;
    let mut warned_at = f64::NEG_INFINITY;

    let mut t0 = SCAN_START;
    let mut z0 = hardy_z(t0)?;
    let mut prev: Option<(f64, f64)> = None;
    while t0 < t_max {
        let t1 = (t0 + mean_spacing(t0) / grid_density).min(t_max);
        let z1 = hardy_z(t1)?;
        if z1 == 0.0 || (z0 > 0.0) != (z1 > 0.0) {
            if z1 == 0.0 {
                zeros.push(t1);
            } else {
                zeros.push(bisect(t0, t1, z0)?);
            }
        } else if let Some((tp, zp)) = prev {
            // |Z| at t0 is a local minimum among three same-signed points.
            if (zp > 0.0) == (z0 > 0.0) && z0.abs() < zp.abs() && z0.abs() < z1.abs() {
                let sign = z0.signum();
                let (tm, fm) = golden_min(tp, t1, sign)?;
                if fm <= 0.0 && tm < t1 {
                    let left = bisect(tp, tm, zp)?;
                    let right = bisect(tm, t1, hardy_z(tm)?)?;
                    // Earlier zeros at or beyond `left` are impossible: the
                    // bracket [tp, t1] held no sign change until now.
                    zeros.push(left);
                    zeros.push(right);
                    zeros.sort_by(f64::total_cmp);
                }
            }
        }

        let s = zeros.len() as f64 - rs_theta(t1)? / PI - 1.0;
        s_window.push_back(s);
        s_sum += s;
        if s_window.len() > window {
            s_sum -= s_window.pop_front().unwrap_or(0.0);
        }
        if s_window.len() == window {
            let mean = s_sum / window as f64;
            if mean.abs() >= DRIFT_LIMIT && t1 - warned_at > 10.0 * mean_spacing(t1) {
                warnings.push(format!(
                    "mean S(t) = {mean:.3} over the window ending at t = {t1:.6}; zeros may be missing"
                ));
                warned_at = t1;
            }
        }

        prev = Some((t0, z0));
        t0 = t1;
        z0 = z1;
    }
    Ok(ZeroScan {
        t_max,
        density: grid_density,
        zeros,
        warnings,
    })
}

impl ZeroScan {
    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn density(&self) -> f64 {
        self.density
    }

    /// Located zeros in increasing order.
    pub fn zeros(&self) -> &[f64] {
        &self.zeros
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn covers(&self, t: f64) -> bool {
        t > 0.0 && t <= self.t_max
    }

    /// N(t).
    pub fn count(&self, t: f64) -> Result<u64> {
        if !self.covers(t) {
            return Err(LabError::OutOfRange(format!(
                "t = {t} outside the scanned range (0, {}]",
                self.t_max
            )));
        }
        Ok(self.zeros.partition_point(|&z| z <= t) as u64)
    }

    /// Distance from t to the closest located zero.
    pub fn distance_to_zero(&self, t: f64) -> f64 {
        let i = self.zeros.partition_point(|&z| z < t);
        let right = self.zeros.get(i).map_or(f64::INFINITY, |z| z - t);
        let left = i.checked_sub(1).map_or(f64::INFINITY, |j| t - self.zeros[j]);
        left.min(right)
    }

    pub fn write_cache<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&[VERSION])?;
        w.write_all(&self.t_max.to_le_bytes())?;
        w.write_all(&self.density.to_le_bytes())?;
        w.write_all(&(self.zeros.len() as u64).to_le_bytes())?;
        for z in &self.zeros {
            w.write_all(&z.to_le_bytes())?;
        }
        w.write_all(&(self.warnings.len() as u32).to_le_bytes())?;
        for msg in &self.warnings {
            w.write_all(&(msg.len() as u32).to_le_bytes())?;
            w.write_all(msg.as_bytes())?;
        }
        Ok(())
    }

    pub fn read_cache<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 5];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(LabError::Integrity("not a zero-scan cache".into()));
        }
        let mut version = [0u8; 1];
        r.read_exact(&mut version)?;
        if version[0] != VERSION {
            return Err(LabError::Integrity(format!(
                "unsupported zero-scan cache version {}",
                version[0]
            )));
        }
        let t_max = read_f64(&mut r)?;
        let density = read_f64(&mut r)?;
        let count = read_u64(&mut r)?;
        let mut zeros = Vec::with_capacity(count.min(1 << 24) as usize);
        for _ in 0..count {
            zeros.push(read_f64(&mut r)?);
        }
        if zeros.windows(2).any(|w| w[0] > w[1]) || zeros.last().is_some_and(|&z| z > t_max) {
            return Err(LabError::Integrity("zero list is not sorted within range".into()));
        }
        let n_warn = read_u32(&mut r)?;
        let mut warnings = Vec::new();
        for _ in 0..n_warn {
            let len = read_u32(&mut r)? as usize;
            let mut buf = vec![0u8; len];
            r.read_exact(&mut buf)?;
            warnings.push(String::from_utf8(buf).map_err(|_| LabError::Integrity("warning text is not UTF-8".into()))?);
        }
        Ok(ZeroScan {
            t_max,
            density,
            zeros,
            warnings,
        })
    }
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_at_fifty_and_hundred() {
        let scan = zero_count_scan(100.0, 4.0).unwrap();
        assert_eq!(scan.count(50.0).unwrap(), 10);
        assert_eq!(scan.count(100.0).unwrap(), 29);
        assert!((scan.zeros()[0] - 14.134_725).abs() < 2e-6);
        assert!(scan.warnings().is_empty());
    }

    #[test]
    fn zeros_are_sign_changes() {
        let scan = zero_count_scan(300.0, 4.0).unwrap();
        for &z in scan.zeros() {
            let a = hardy_z(z - 2e-6).unwrap();
            let b = hardy_z(z + 2e-6).unwrap();
            assert!(a * b < 0.0, "no sign change at {z}");
        }
        let mut prev = 0;
        for i in 0..600 {
            let c = scan.count(10.0 + i as f64 * 0.48).unwrap();
            assert!(c >= prev);
            prev = c;
        }
    }

    #[test]
    fn s_stays_small() {
        let scan = zero_count_scan(2000.0, 4.0).unwrap();
        for i in 1..2000 {
            let t = 10.0 + i as f64 * 0.99;
            let s = scan.count(t).unwrap() as f64 - rs_theta(t).unwrap() / PI - 1.0;
            assert!(s.abs() <= 3.0, "S({t}) = {s}");
        }
    }

    #[test]
    fn contract_errors() {
        assert!(matches!(zero_count_scan(2e6, 4.0), Err(LabError::Capacity { .. })));
        assert!(matches!(zero_count_scan(100.0, 2.0), Err(LabError::Domain(_))));
        let scan = zero_count_scan(30.0, 4.0).unwrap();
        assert!(matches!(scan.count(31.0), Err(LabError::OutOfRange(_))));
    }

    #[test]
    fn cache_round_trip() {
        let mut scan = zero_count_scan(60.0, 4.0).unwrap();
        scan.warnings.push("synthetic".into());
        let mut buf = Vec::new();
        scan.write_cache(&mut buf).unwrap();
        assert_eq!(&buf[..5], b"ZSCN1");
        assert_eq!(ZeroScan::read_cache(&buf[..]).unwrap(), scan);
        buf[5] = 9;
        assert!(ZeroScan::read_cache(&buf[..]).is_err());
    }
}
