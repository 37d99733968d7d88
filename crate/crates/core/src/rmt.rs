//! CUE eigenangles, the log characteristic polynomial and counting
//! statistics.

use crate::error::{LabError, Result};
use crate::rng::{rng_for, LabRng};
use crate::stats::covariance_se;
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use std::f64::consts::{PI, TAU};
use std::io::Write;

pub const MAX_DIMENSION: usize = 1024;
pub const BURN_IN_SWEEPS_PER_N: usize = 50;
pub const THINNING_SWEEPS_PER_N: usize = 1;
/// Retained samples per independent chain.
pub const CHAIN_SAMPLES: usize = 1000;
pub const TARGET_ACCEPTANCE: (f64, f64) = (0.3, 0.5);
pub const ADMISSIBLE_ACCEPTANCE: (f64, f64) = (0.1, 0.9);
/// Closer than this to an eigenangle, log Z_U is undefined.
pub const EIGENANGLE_RADIUS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sampler {
    Metropolis,
    Rejection,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenangleSample {
    pub n: usize,
    /// Sorted, in (−π, π].
    pub angles: Vec<f64>,
    pub sampler: Sampler,
    pub seed: u64,
    pub burn_in_sweeps: usize,
    pub thinning: usize,
}

/// Chain diagnostics returned next to the samples.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct ChainInfo {
    pub chains: usize,
    pub acceptance: f64,
    pub step: Vec<f64>,
}

fn wrap(x: f64) -> f64 {
    let y = x - TAU * ((x + PI) / TAU).floor();
    // y in [−π, π); move −π to π.
    if y <= -PI {
        y + TAU
    } else {
        y
    }
}

/// Metropolis state on the torus, holding the unit vectors of the angles.
struct Chain {
    theta: Vec<f64>,
    c: Vec<f64>,
    s: Vec<f64>,
    step: f64,
    accepted: u64,
    proposed: u64,
}

/// log of ∏_k d(new, k) / d(old, k) over k in `range`, with
/// d(x, k) = |e^{ix} − e^{iθ_k}|² = 2 − 2 cos(x − θ_k).
#[inline]
fn log_ratio_range(c: &[f64], s: &[f64], (oc, os): (f64, f64), (nc, ns): (f64, f64)) -> f64 {
    const BLOCK: usize = 64;
    let mut acc = 0.0;
    let mut cc = c.chunks_exact(BLOCK);
    let mut sc = s.chunks_exact(BLOCK);
    for (cb, sb) in (&mut cc).zip(&mut sc) {
        // Four independent lanes so the products vectorize.
        let mut pn = [1.0f64; 4];
        let mut po = [1.0f64; 4];
        for i in 0..BLOCK / 4 {
            for lane in 0..4 {
                let k = 4 * i + lane;
                pn[lane] *= 2.0 - 2.0 * (nc * cb[k] + ns * sb[k]);
                po[lane] *= 2.0 - 2.0 * (oc * cb[k] + os * sb[k]);
            }
        }
        // Each lane holds 16 factors in [0, 4]; the ratios stay in range.
        acc += ((pn[0] / po[0]) * (pn[1] / po[1]) * (pn[2] / po[2]) * (pn[3] / po[3])).ln();
    }
    let mut pn = 1.0;
    let mut po = 1.0;
    for (ck, sk) in cc.remainder().iter().zip(sc.remainder()) {
        pn *= 2.0 - 2.0 * (nc * ck + ns * sk);
        po *= 2.0 - 2.0 * (oc * ck + os * sk);
    }
    acc + (pn / po).ln()
}

impl Chain {
    fn new(n: usize, rng: &mut LabRng) -> Self {
        let theta: Vec<f64> = (0..n).map(|_| wrap(PI - TAU * rng.random::<f64>())).collect();
        Chain {
            c: theta.iter().map(|t| t.cos()).collect(),
            s: theta.iter().map(|t| t.sin()).collect(),
            theta,
            step: PI,
            accepted: 0,
            proposed: 0,
        }
    }

    fn sweep(&mut self, rng: &mut LabRng) {
        let n = self.theta.len();
        for j in 0..n {
            let new = wrap(self.theta[j] + self.step * (2.0 * rng.random::<f64>() - 1.0));
            let (ns, nc) = new.sin_cos();
            let old = (self.c[j], self.s[j]);
            let lr = log_ratio_range(&self.c[..j], &self.s[..j], old, (nc, ns))
                + log_ratio_range(&self.c[j + 1..], &self.s[j + 1..], old, (nc, ns));
            self.proposed += 1;
            let u: f64 = rng.random();
            if lr >= 0.0 || u.ln() < lr {
                self.theta[j] = new;
                self.c[j] = nc;
                self.s[j] = ns;
                self.accepted += 1;
            }
        }
    }

    fn take_acceptance(&mut self) -> f64 {
        let a = if self.proposed == 0 {
            f64::NAN
        } else {
            self.accepted as f64 / self.proposed as f64
        };
        self.accepted = 0;
        self.proposed = 0;
        a
    }
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

/// `count` approximately Haar-distributed eigenangle configurations of an
/// N×N unitary matrix by Metropolis on the joint density
/// ∏_{j<k} |e^{iθ_j} − e^{iθ_k}|².
///
/// Independent chains of [`CHAIN_SAMPLES`] samples each, seeded per chain.
/// Each chain burns in for 50·N sweeps while tuning the proposal width
/// towards acceptance 0.3–0.5, then keeps one configuration every N sweeps.
pub fn sample_cue(n: usize, count: usize, seed: u64) -> Result<(Vec<EigenangleSample>, ChainInfo)> {
    check_dims(n, count)?;
    let burn_in = BURN_IN_SWEEPS_PER_N * n;
    let thinning = THINNING_SWEEPS_PER_N * n;
    let chains = count.div_ceil(CHAIN_SAMPLES);
    let results: Vec<Result<(Vec<EigenangleSample>, f64, f64)>> = (0..chains)
        .into_par_iter()
        .map(|ci| {
            let mut rng = rng_for(seed, "rmt.metropolis", ci as u64);
            let mut chain = Chain::new(n, &mut rng);
            let window = 10usize.max(burn_in / 50);
            for sweep in 1..=burn_in {
                chain.sweep(&mut rng);
                if sweep % window == 0 {
                    let a = chain.take_acceptance();
                    if a < TARGET_ACCEPTANCE.0 {
                        chain.step *= 0.8;
                    } else if a > TARGET_ACCEPTANCE.1 {
                        chain.step = (chain.step * 1.25).min(PI);
                    }
                }
            }
            chain.take_acceptance();
            let len = CHAIN_SAMPLES.min(count - ci * CHAIN_SAMPLES);
            let mut out = Vec::with_capacity(len);
            for _ in 0..len {
                for _ in 0..thinning {
                    chain.sweep(&mut rng);
                }
                out.push(EigenangleSample {
                    n,
                    angles: sorted(chain.theta.clone()),
                    sampler: Sampler::Metropolis,
                    seed,
                    burn_in_sweeps: burn_in,
                    thinning,
                });
            }
            let acc = chain.take_acceptance();
            // A single angle has a flat density: every proposal is accepted.
            if n > 1 && !(ADMISSIBLE_ACCEPTANCE.0..=ADMISSIBLE_ACCEPTANCE.1).contains(&acc) {
                return Err(LabError::Calibration(format!(
                    "chain {ci}: acceptance {acc:.3} outside [{}, {}] with step {:.3e}",
                    ADMISSIBLE_ACCEPTANCE.0, ADMISSIBLE_ACCEPTANCE.1, chain.step
                )));
            }
            Ok((out, acc, chain.step))
        })
        .collect();
    let mut samples = Vec::with_capacity(count);
    let mut acc_sum = 0.0;
    let mut steps = Vec::with_capacity(chains);
    for r in results {
        let (s, a, st) = r?;
        acc_sum += a * s.len() as f64;
        samples.extend(s);
        steps.push(st);
    }
    Ok((
        samples,
        ChainInfo {
            chains,
            acceptance: acc_sum / count as f64,
            step: steps,
        },
    ))
}

/// Exact samples for N ≤ 3: uniform angles accepted with probability
/// ∏|e^{iθ_j} − e^{iθ_k}|² / N^N (the product is at most N^N).
pub fn sample_cue_rejection(n: usize, count: usize, seed: u64) -> Result<Vec<EigenangleSample>> {
    check_dims(n, count)?;
    if n > 3 {
        return Err(LabError::Domain(format!(
            "rejection sampling is only offered for N <= 3, got {n}"
        )));
    }
    let bound = (n as f64).powi(n as i32);
    let mut rng = rng_for(seed, "rmt.rejection", 0);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let theta: Vec<f64> = (0..n).map(|_| wrap(PI - TAU * rng.random::<f64>())).collect();
        let mut w = 1.0;
        for j in 0..n {
            for k in j + 1..n {
                w *= 2.0 - 2.0 * (theta[j] - theta[k]).cos();
            }
        }
        if rng.random::<f64>() * bound < w {
            out.push(EigenangleSample {
                n,
                angles: sorted(theta),
                sampler: Sampler::Rejection,
                seed,
                burn_in_sweeps: 0,
                thinning: 0,
            });
        }
    }
    Ok(out)
}

fn check_dims(n: usize, count: usize) -> Result<()> {
    if n == 0 || n > MAX_DIMENSION {
        return Err(LabError::Domain(format!("N must lie in 1..={MAX_DIMENSION}, got {n}")));
    }
    if count == 0 {
        return Err(LabError::Domain("count must be >= 1".into()));
    }
    Ok(())
}

/// log Z_U(θ) = Σ_k log(1 − e^{i(θ_k − θ)}), principal branch per factor.
///
/// With φ = (θ_k − θ) mod 2π ∈ (0, 2π), log(1 − e^{iφ}) = log(2 sin(φ/2)) +
/// i(φ − π)/2.
pub fn log_char_poly(sample: &EigenangleSample, theta: f64) -> Result<Complex64> {
    let mut re = 0.0;
    let mut im = 0.0;
    for &a in &sample.angles {
        let phi = (a - theta).rem_euclid(TAU);
        if phi < EIGENANGLE_RADIUS || TAU - phi < EIGENANGLE_RADIUS {
            return Err(LabError::Singularity(format!("theta = {theta} is an eigenangle")));
        }
        re += (2.0 * (0.5 * phi).sin()).ln();
        im += 0.5 * (phi - PI);
    }
    Ok(Complex64::new(re, im))
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct CountingStat {
    pub s: f64,
    pub t: f64,
    pub raw_count: usize,
    /// (C − (t − s)N/2π) / ((1/π)√log N); NaN for N = 1.
    pub normalized: f64,
}

/// Number of angles in (s, t], −π < s < t ≤ π, and its normalization.
pub fn counting_stat(sample: &EigenangleSample, s: f64, t: f64) -> Result<CountingStat> {
    if !(-PI < s && s < t && t <= PI) {
        return Err(LabError::Domain(format!("need -pi < s < t <= pi, got ({s}, {t}]")));
    }
    let raw = sample.angles.iter().filter(|&&a| s < a && a <= t).count();
    let n = sample.n as f64;
    let normalized = if sample.n > 1 {
        (raw as f64 - (t - s) * n / TAU) / (n.ln().sqrt() / PI)
    } else {
        f64::NAN
    };
    Ok(CountingStat {
        s,
        t,
        raw_count: raw,
        normalized,
    })
}

/// C̃ for an ordered pair of endpoints; with s > t this is −C̃(t, s).
pub fn signed_counting_stat(sample: &EigenangleSample, s: f64, t: f64) -> Result<f64> {
    if s > t {
        Ok(-counting_stat(sample, t, s)?.normalized)
    } else {
        Ok(counting_stat(sample, s, t)?.normalized)
    }
}

/// Gauss–Legendre nodes and weights on [−1, 1] (Newton on P_n).
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Var C_U(s, t) under CUE from the sine kernel:
/// N L/2π − 2 ∫_0^L (L − d) g(d) dd, g(d) = sin²(Nd/2) / (4π² sin²(d/2)),
/// L = t − s, by composite Gauss–Legendre with at least 8N nodes per 2π.
pub fn dpp_count_variance(n: usize, s: f64, t: f64) -> Result<f64> {
    if !(-PI < s && s < t && t <= PI) {
        return Err(LabError::Domain(format!("need -pi < s < t <= pi, got ({s}, {t}]")));
    }
    if n == 0 {
        return Err(LabError::Domain("N must be >= 1".into()));
    }
    const ORDER: usize = 8;
    let l = t - s;
    let nf = n as f64;
    let panels = ((nf * l / PI).ceil() as usize).max(8);
    let (x, w) = gauss_legendre(ORDER);
    let h = l / panels as f64;
    let g = |d: f64| {
        let den = (0.5 * d).sin();
        let ratio = if den.abs() < 1e-300 {
            nf
        } else {
            (0.5 * nf * d).sin() / den
        };
        ratio * ratio / (4.0 * PI * PI)
    };
    let mut integral = 0.0;
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * h;
        for (xi, wi) in x.iter().zip(&w) {
            let d = mid + 0.5 * h * xi;
            integral += 0.5 * h * wi * (l - d) * g(d);
        }
    }
    Ok(nf * l / TAU - 2.0 * integral)
}

/// Limit covariance of C(s, t) and C(s', t') in Wieand's case table.
pub fn wieand_prediction((s, t): (f64, f64), (s2, t2): (f64, f64)) -> f64 {
    let same = (s == s2) as u8 + (t == t2) as u8;
    let crossed = (s == t2) as u8 + (t == s2) as u8;
    match (same, crossed) {
        (2, _) => 1.0,
        (_, 2) => -1.0,
        (1, _) => 0.5,
        (_, 1) => -0.5,
        _ => 0.0,
    }
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct WieandEntry {
    pub first: (f64, f64),
    pub second: (f64, f64),
    pub covariance: f64,
    pub std_error: f64,
    pub prediction: f64,
}

/// Two intervals (s, t) whose counts are compared.
pub type IntervalPair = ((f64, f64), (f64, f64));

/// Empirical covariance of C̃ over the samples for each pair of intervals.
/// An interval given as (s, t) with s > t stands for −C̃(t, s).
pub fn wieand_covariance(samples: &[EigenangleSample], pairs: &[IntervalPair]) -> Result<Vec<WieandEntry>> {
    if samples.len() < 2 {
        return Err(LabError::Domain("need at least two samples".into()));
    }
    pairs
        .iter()
        .map(|&(a, b)| {
            let xs: Vec<f64> = samples
                .iter()
                .map(|x| signed_counting_stat(x, a.0, a.1))
                .collect::<Result<_>>()?;
            let ys: Vec<f64> = samples
                .iter()
                .map(|x| signed_counting_stat(x, b.0, b.1))
                .collect::<Result<_>>()?;
            let (covariance, std_error) = covariance_se(&xs, &ys);
            Ok(WieandEntry {
                first: a,
                second: b,
                covariance,
                std_error,
                prediction: wieand_prediction(a, b),
            })
        })
        .collect()
}

/// CSV of (N, seed, sample, index, angle) rows.
pub fn write_angles_csv<W: Write>(mut w: W, samples: &[EigenangleSample]) -> Result<()> {
    writeln!(w, "N,seed,sample,index,angle")?;
    for (i, s) in samples.iter().enumerate() {
        for (j, a) in s.angles.iter().enumerate() {
            writeln!(w, "{},{},{i},{j},{a:.17e}", s.n, s.seed)?;
        }
    }
    Ok(())
}
