#![allow(dead_code)]

use astro_float::{BigFloat, Consts, RoundingMode};
use std::io::Write;

const RM: RoundingMode = RoundingMode::ToEven;

/// u·e^{x}·ln p mod 2π with `bits` of working precision, computed with an
/// unrelated arbitrary-precision library.
pub fn reference_phase(u: f64, x: f64, p: u64, bits: usize) -> f64 {
    let mut cc = Consts::new().expect("constants cache");
    let scale = BigFloat::from_f64(x, bits).exp(bits, RM, &mut cc);
    let logp = BigFloat::from_u64(p, bits).ln(bits, RM, &mut cc);
    let v = BigFloat::from_f64(u, bits).mul(&scale, bits, RM).mul(&logp, bits, RM);
    let two_pi = cc.pi(bits, RM).mul(&BigFloat::from_u8(2, bits), bits, RM);
    let q = v.div(&two_pi, bits, RM).floor();
    let r = v.sub(&q.mul(&two_pi, bits, RM), bits, RM);
    to_f64(&r)
}

fn to_f64(x: &BigFloat) -> f64 {
    let s = format!("{x}");
    s.parse().unwrap_or_else(|_| panic!("cannot parse {s}"))
}

/// Distance on the circle of circumference 2π.
pub fn circle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(std::f64::consts::TAU);
    d.min(std::f64::consts::TAU - d)
}

/// Writes straight to the process stdout so the line shows even when the
/// test harness captures output.
pub fn report_line(line: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
}
