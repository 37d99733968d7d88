//! Joint mixed moments over u ∈ [1, 2] and the combinatorics of their
//! diagonal terms.

use crate::disorder::{factorial, target_tensor, MomentSpec, Rectangle};
use crate::error::{LabError, Result};
use crate::primes::PrimeTable;
use crate::stats::{block_jackknife_mean, complex_mean_se, CompensatedSum};
use num_complex::Complex64;
use rayon::prelude::*;
use std::collections::HashMap;

pub const JACKKNIFE_BLOCKS: usize = 32;
pub const ENUMERATION_BUDGET: f64 = 1e8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleMode {
    /// Midpoint grid; error bars by block jackknife.
    Grid,
    /// Independent uniform u; error bars from the sample spread.
    Random,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct JointMomentEstimate {
    pub spec: MomentSpec,
    pub value: Complex64,
    pub std_error: f64,
    pub points: usize,
    pub mode: SampleMode,
    pub target: f64,
    pub finite_n_target: f64,
}

impl JointMomentEstimate {
    pub fn with_finite_n_target(mut self, value: f64) -> Self {
        self.finite_n_target = value;
        self
    }
}

fn check_aligned(cols: &[Vec<Complex64>], k: usize) -> Result<usize> {
    if cols.len() != k {
        return Err(LabError::Alignment(format!(
            "{} sample columns for {k} scales",
            cols.len()
        )));
    }
    let len = cols[0].len();
    if cols.iter().any(|c| c.len() != len) {
        return Err(LabError::Alignment(
            "per-scale sample sequences differ in length".into(),
        ));
    }
    Ok(len)
}

/// ∫_1^2 ∏_j A_j(u)^{m_j} conj(B_j(u))^{n_j} du.
///
/// `m_side[j]` and `n_side[j]` are samples of scale j on a shared u-grid; for
/// log ζ samples both sides are the same sequence, for prime sums they may
/// differ in cutoff. `finite_n_target` defaults to the limit target.
pub fn empirical_joint_moment(
    m_side: &[Vec<Complex64>],
    n_side: &[Vec<Complex64>],
    spec: &MomentSpec,
    mode: SampleMode,
) -> Result<JointMomentEstimate> {
    let len = check_aligned(m_side, spec.k())?;
    if check_aligned(n_side, spec.k())? != len {
        return Err(LabError::Alignment("m-side and n-side grids differ".into()));
    }
    if len < 2 {
        return Err(LabError::Domain("need at least two u-points".into()));
    }
    let integrand: Vec<Complex64> = (0..len)
        .map(|i| {
            let mut v = Complex64::new(1.0, 0.0);
            for j in 0..spec.k() {
                v *= m_side[j][i].powi(spec.m()[j] as i32) * n_side[j][i].conj().powi(spec.n()[j] as i32);
            }
            v
        })
        .collect();
    let (value, std_error) = match mode {
        SampleMode::Grid => block_jackknife_mean(&integrand, JACKKNIFE_BLOCKS),
        SampleMode::Random => complex_mean_se(&integrand),
    };
    let target = target_tensor(spec);
    Ok(JointMomentEstimate {
        spec: spec.clone(),
        value,
        std_error,
        points: len,
        mode,
        target,
        finite_n_target: target,
    })
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct DiagonalResult {
    pub cutoff: f64,
    pub n: u32,
    pub exact: f64,
    pub asymptotic: f64,
    pub ratio: f64,
}

/// Σ over ordered prime n-tuples (p), (q) with ∏p = ∏q of 1/∏q, by brute
/// force, next to n!·(Σ_{q ≤ cutoff} 1/q)^n.
pub fn diagonal_exact(table: &PrimeTable, cutoff: f64, n: u32) -> Result<DiagonalResult> {
    let s1 = table.mertens_sum(cutoff)?;
    let asymptotic = factorial(n) * s1.powi(n as i32);
    let count = table.count_upto(cutoff);
    let tuples = (count as f64).powi(n as i32);
    if tuples > ENUMERATION_BUDGET {
        return Err(LabError::capacity(
            format!("{count}^{n} prime tuples; use a smaller cutoff or n"),
            ENUMERATION_BUDGET,
        ));
    }
    let primes = &table.primes()[..count];
    let exact = if n == 0 {
        1.0
    } else {
        // Number of ordered tuples per product; each product P then
        // contributes c(P) matching p-tuples for each of its c(P) q-tuples.
        let mut counts: HashMap<u128, u64> = HashMap::new();
        let mut idx = vec![0usize; n as usize];
        if count > 0 {
            'outer: loop {
                let mut prod: u128 = 1;
                for &i in &idx {
                    prod = prod
                        .checked_mul(primes[i] as u128)
                        .ok_or_else(|| LabError::capacity("prime tuple product overflows 128 bits", "2^128"))?;
                }
                *counts.entry(prod).or_default() += 1;
                for slot in idx.iter_mut().rev() {
                    *slot += 1;
                    if *slot < count {
                        continue 'outer;
                    }
                    *slot = 0;
                }
                break;
            }
        }
        let mut entries: Vec<(u128, u64)> = counts.into_iter().collect();
        entries.sort_unstable();
        entries
            .iter()
            .rev()
            .map(|&(p, c)| (c * c) as f64 / p as f64)
            .collect::<CompensatedSum>()
            .value()
    };
    Ok(DiagonalResult {
        cutoff,
        n,
        exact,
        asymptotic,
        ratio: if asymptotic > 0.0 { exact / asymptotic } else { f64::NAN },
    })
}

/// The diagonal sum for exponents (m, n): empty, hence 0, unless m = n.
pub fn diagonal_mixed(table: &PrimeTable, cutoff: f64, m: u32, n: u32) -> Result<f64> {
    if m != n {
        return Ok(0.0);
    }
    Ok(diagonal_exact(table, cutoff, n)?.exact)
}

/// The same diagonal sum from power sums S_r = Σ_{q ≤ cutoff} q^{-r}:
/// n!² [z^n] exp(Σ_r a_r S_r z^r), where Σ_r a_r y^r = log Σ_m y^m/(m!)².
/// For n = 2 this is 2S₁² − S₂.
pub fn diagonal_from_power_sums(table: &PrimeTable, cutoff: f64, n: u32) -> Result<f64> {
    let n = n as usize;
    let f: Vec<f64> = (0..=n)
        .map(|m| 1.0 / (factorial(m as u32) * factorial(m as u32)))
        .collect();
    let mut a = vec![0.0; n + 1];
    for r in 1..=n {
        let mut acc = f[r];
        for k in 1..r {
            acc -= k as f64 * a[k] * f[r - k] / r as f64;
        }
        a[r] = acc;
    }
    let mut h = vec![0.0; n + 1];
    for r in 1..=n {
        h[r] = a[r] * table.power_sum(cutoff, r as u32)?;
    }
    let mut e = vec![0.0; n + 1];
    e[0] = 1.0;
    for r in 1..=n {
        let mut acc = 0.0;
        for k in 1..=r {
            acc += k as f64 * h[k] * e[r - k];
        }
        e[r] = acc / r as f64;
    }
    let nf = factorial(n as u32);
    Ok(nf * nf * e[n])
}

/// Finite-N value of a joint moment of the normalized prime sums: per scale,
/// the diagonal sum at that scale's cutoff over (log N)^{n_j}, and 0 if any
/// m_j ≠ n_j.
pub fn finite_n_target(spec: &MomentSpec, big_n: f64, table: &PrimeTable) -> Result<f64> {
    if !spec.is_diagonal() {
        return Ok(0.0);
    }
    let log_n = big_n.ln();
    let mut out = 1.0;
    for (&lambda, &n) in spec.lambdas().iter().zip(spec.n()) {
        if n == 0 {
            continue;
        }
        let cutoff = (big_n.powf(lambda) / (40.0 * spec.k() as f64 * n as f64)).exp();
        out *= diagonal_from_power_sums(table, cutoff, n)? / log_n.powi(n as i32);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct DiagonalAsymptotic {
    /// n!·(λ log N)^n.
    pub leading: f64,
    /// n!·(log N^λ − log(40kn))^n.
    pub finite_n: f64,
    /// The cutoff exp(N^λ/(40kn)) is below 2, so the sum is empty.
    pub degenerate: bool,
}

pub fn diagonal_asymptotic(lambda: f64, big_n: f64, n: u32, k: u32) -> DiagonalAsymptotic {
    if n == 0 {
        return DiagonalAsymptotic {
            leading: 1.0,
            finite_n: 1.0,
            degenerate: false,
        };
    }
    let kn = 40.0 * k as f64 * n as f64;
    if big_n.powf(lambda) <= kn * std::f64::consts::LN_2 {
        return DiagonalAsymptotic {
            leading: 0.0,
            finite_n: 0.0,
            degenerate: true,
        };
    }
    let nf = factorial(n);
    DiagonalAsymptotic {
        leading: nf * (lambda * big_n.ln()).powi(n as i32),
        finite_n: nf * (lambda * big_n.ln() - kn.ln()).powi(n as i32),
        degenerate: false,
    }
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct OffdiagCheck {
    pub holds: bool,
    /// Pair with the smallest |log(m/n)| − 1/(2 min(m, n)).
    pub worst_m: u64,
    pub worst_n: u64,
    pub worst_slack: f64,
    /// |log(m/n)|·2 min(m, n) at that pair.
    pub worst_ratio: f64,
    pub pairs_checked: u64,
}

/// Exhaustive check of |log(m/n)| > 1/(2 min(m, n)) over 1 ≤ m < n ≤ max_int
/// (the inequality is symmetric in m and n).
pub fn offdiag_bound_check(max_int: u64) -> Result<OffdiagCheck> {
    const CAP: u64 = 100_000;
    if max_int > CAP {
        return Err(LabError::capacity(format!("max_int = {max_int}"), CAP));
    }
    if max_int < 2 {
        return Ok(OffdiagCheck {
            holds: true,
            worst_m: 0,
            worst_n: 0,
            worst_slack: f64::INFINITY,
            worst_ratio: f64::INFINITY,
            pairs_checked: 0,
        });
    }
    let per_m: Vec<(bool, u64, u64, f64)> = (1..max_int)
        .into_par_iter()
        .map(|m| {
            let mf = m as f64;
            let bound = 0.5 / mf;
            let mut ok = true;
            let mut worst = (m, m + 1, f64::INFINITY);
            for n in (m + 1)..=max_int {
                let gap = ((n - m) as f64 / mf).ln_1p();
                let slack = gap - bound;
                ok &= slack > 0.0;
                if slack < worst.2 {
                    worst = (m, n, slack);
                }
            }
            (ok, worst.0, worst.1, worst.2)
        })
        .collect();
    let holds = per_m.iter().all(|r| r.0);
    let w = per_m
        .iter()
        .min_by(|a, b| a.3.total_cmp(&b.3))
        .copied()
        .unwrap_or((true, 0, 0, f64::INFINITY));
    let ratio = ((w.2 - w.1) as f64 / w.1 as f64).ln_1p() * 2.0 * w.1 as f64;
    Ok(OffdiagCheck {
        holds,
        worst_m: w.1,
        worst_n: w.2,
        worst_slack: w.3,
        worst_ratio: ratio,
        pairs_checked: max_int * (max_int - 1) / 2,
    })
}

/// One scale of the Hölder step: |A|, |B| with conjugate exponents r, s and
/// |C|, |D| with conjugate exponents t, u. `f64::INFINITY` is allowed.
#[derive(Clone, Debug, PartialEq)]
pub struct HolderBlock {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub d: Vec<f64>,
    pub r: f64,
    pub s: f64,
    pub t: f64,
    pub u: f64,
}

fn norm(xs: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return xs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    }
    let mean = xs.iter().map(|x| x.abs().powf(p)).collect::<CompensatedSum>().value() / xs.len() as f64;
    mean.powf(1.0 / p)
}

/// Left side ∫ ∏_j |A_j||B_j||C_j||D_j| du and right side
/// ∏_j ‖A_j‖_{2kr_j} ‖B_j‖_{2ks_j} ‖C_j‖_{2kt_j} ‖D_j‖_{2ku_j}, both as
/// midpoint quadrature over the shared u-grid.
pub fn holder_check(blocks: &[HolderBlock]) -> Result<(f64, f64)> {
    let k = blocks.len();
    if k == 0 {
        return Err(LabError::Domain("no factors".into()));
    }
    let len = blocks[0].a.len();
    if len == 0 {
        return Err(LabError::Domain("empty sequences".into()));
    }
    for (j, blk) in blocks.iter().enumerate() {
        for (p, q) in [(blk.r, blk.s), (blk.t, blk.u)] {
            if !(p >= 1.0) || !(q >= 1.0) || (1.0 / p + 1.0 / q - 1.0).abs() > 1e-12 {
                return Err(LabError::Contract(format!(
                    "exponents {p} and {q} of block {j} are not conjugate"
                )));
            }
        }
        if [&blk.a, &blk.b, &blk.c, &blk.d].iter().any(|s| s.len() != len) {
            return Err(LabError::Alignment(format!("block {j} sequences differ in length")));
        }
    }
    let lhs = (0..len)
        .map(|i| {
            blocks
                .iter()
                .map(|b| (b.a[i] * b.b[i] * b.c[i] * b.d[i]).abs())
                .product::<f64>()
        })
        .collect::<CompensatedSum>()
        .value()
        / len as f64;
    let two_k = 2.0 * k as f64;
    let rhs = blocks
        .iter()
        .map(|b| norm(&b.a, two_k * b.r) * norm(&b.b, two_k * b.s) * norm(&b.c, two_k * b.t) * norm(&b.d, two_k * b.u))
        .product();
    Ok((lhs, rhs))
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct IndicatorEstimate {
    pub prob: f64,
    pub std_error: f64,
    pub points: usize,
}

/// Fraction of u-points at which every scale's sample lies in its rectangle.
pub fn indicator_prob(samples: &[Vec<Complex64>], rects: &[Rectangle]) -> Result<IndicatorEstimate> {
    if rects.is_empty() {
        return Err(LabError::Domain("no rectangles".into()));
    }
    let len = check_aligned(samples, rects.len())?;
    if len == 0 {
        return Err(LabError::Domain("no samples".into()));
    }
    let hits = (0..len)
        .filter(|&i| samples.iter().zip(rects).all(|(col, r)| r.contains(col[i])))
        .count();
    let p = hits as f64 / len as f64;
    Ok(IndicatorEstimate {
        prob: p,
        std_error: (p * (1.0 - p) / len as f64).sqrt(),
        points: len,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disorder::sample_disorder;
    use crate::primes::sieve_upto;

    #[test]
    fn trivial_integrand_is_one() {
        let spec = MomentSpec::new(vec![0.7, 0.2], vec![0, 0], vec![0, 0]).unwrap();
        let s = sample_disorder(&[0.7, 0.2], 100, 1).unwrap();
        let e = empirical_joint_moment(&s.columns, &s.columns, &spec, SampleMode::Grid).unwrap();
        assert_eq!(e.value, Complex64::new(1.0, 0.0));
        assert_eq!(e.target, 1.0);
    }

    #[test]
    fn swapping_exponents_conjugates() {
        let s = sample_disorder(&[0.7, 0.2], 1000, 2).unwrap();
        let spec = MomentSpec::new(vec![0.7, 0.2], vec![2, 1], vec![1, 0]).unwrap();
        let a = empirical_joint_moment(&s.columns, &s.columns, &spec, SampleMode::Random).unwrap();
        let b = empirical_joint_moment(&s.columns, &s.columns, &spec.swapped(), SampleMode::Random).unwrap();
        assert!((a.value.conj() - b.value).norm() <= 1e-15 * a.value.norm().max(1.0));
    }

    #[test]
    fn misaligned_samples_are_rejected() {
        let spec = MomentSpec::new(vec![0.7, 0.2], vec![1, 1], vec![1, 1]).unwrap();
        let cols = vec![vec![Complex64::new(1.0, 0.0); 10], vec![Complex64::new(1.0, 0.0); 9]];
        assert!(matches!(
            empirical_joint_moment(&cols, &cols, &spec, SampleMode::Grid),
            Err(LabError::Alignment(_))
        ));
    }

    #[test]
    fn diagonal_small_cases() {
        let t = sieve_upto(10).unwrap();
        let d1 = diagonal_exact(&t, 3.0, 1).unwrap();
        assert!((d1.exact - 5.0 / 6.0).abs() < 1e-15);
        let d2 = diagonal_exact(&t, 3.0, 2).unwrap();
        let want = 0.25 + 4.0 / 6.0 + 1.0 / 9.0;
        assert!((d2.exact - want).abs() < 1e-15);
        assert!((d2.exact - (2.0 * (5.0f64 / 6.0).powi(2) - (0.25 + 1.0 / 9.0))).abs() < 1e-15);
        assert_eq!(diagonal_mixed(&t, 3.0, 2, 1).unwrap(), 0.0);
        assert_eq!(diagonal_exact(&t, 1.0, 2).unwrap().exact, 0.0);
    }

    #[test]
    fn brute_force_matches_power_sums() {
        let t = sieve_upto(200).unwrap();
        for (cutoff, n) in [(200.0, 1), (200.0, 2), (60.0, 3), (20.0, 4), (12.0, 6)] {
            let d = diagonal_exact(&t, cutoff, n).unwrap();
            let c = diagonal_from_power_sums(&t, cutoff, n).unwrap();
            assert!(
                (d.exact - c).abs() < 1e-12 * c,
                "cutoff {cutoff}, n {n}: {} vs {c}",
                d.exact
            );
            assert!(d.exact <= d.asymptotic * (1.0 + 1e-15));
        }
    }

    #[test]
    fn enumeration_budget() {
        let t = sieve_upto(100_000).unwrap();
        assert!(matches!(diagonal_exact(&t, 1e5, 3), Err(LabError::Capacity { .. })));
    }

    #[test]
    fn asymptotic_examples() {
        let a = diagonal_asymptotic(0.5, 10f64.exp(), 2, 1);
        assert!((a.leading - 50.0).abs() < 1e-12);
        assert!((a.finite_n - 2.0 * (5.0 - 80f64.ln()).powi(2)).abs() < 1e-12);
        assert_eq!(diagonal_asymptotic(0.5, 100.0, 0, 3).leading, 1.0);
        assert!(diagonal_asymptotic(0.5, 100.0, 2, 3).degenerate);
    }

    #[test]
    fn offdiag_small_cases_and_scan() {
        assert!((2f64 / 3.0).ln().abs() > 0.25);
        let r = offdiag_bound_check(2000).unwrap();
        assert!(r.holds);
        assert_eq!(r.worst_n, r.worst_m + 1);
        assert!(r.worst_ratio > 1.99 && r.worst_ratio < 2.0);
        assert!(offdiag_bound_check(200_000).is_err());
    }

    #[test]
    fn holder_equality_and_contract() {
        let ones = vec![1.0; 64];
        let blk = HolderBlock {
            a: ones.clone(),
            b: ones.clone(),
            c: ones.clone(),
            d: ones.clone(),
            r: 2.0,
            s: 2.0,
            t: 1.0,
            u: f64::INFINITY,
        };
        let (l, r) = holder_check(&[blk.clone(), blk.clone()]).unwrap();
        assert!((l - 1.0).abs() < 1e-12 && (r - 1.0).abs() < 1e-12);
        let bad = HolderBlock { s: 3.0, ..blk.clone() };
        assert!(matches!(holder_check(&[bad]), Err(LabError::Contract(_))));
        let mut single = blk;
        single.a = (0..64).map(|i| 0.1 + i as f64 / 10.0).collect();
        let (l, r) = holder_check(&[single]).unwrap();
        assert!(l <= r);
    }

    #[test]
    fn indicator_basics() {
        let s = sample_disorder(&[0.5], 20_000, 9).unwrap();
        let full = indicator_prob(&s.columns, &[Rectangle::full()]).unwrap();
        assert_eq!(full.prob, 1.0);
        let q = indicator_prob(&s.columns, &[Rectangle::lower_left_quadrant()]).unwrap();
        assert!((q.prob - 0.25).abs() < 3.0 * (0.25f64 * 0.75 / 20_000.0).sqrt());
        let small = Rectangle::new(f64::NEG_INFINITY, -0.2, f64::NEG_INFINITY, 0.0).unwrap();
        assert!(indicator_prob(&s.columns, &[small]).unwrap().prob <= q.prob);
    }
}
