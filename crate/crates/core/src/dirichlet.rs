//! Truncated prime sums
//!
//! ```text
//! P(λ, n; k, N, u) = (log N)^{-1/2} Σ_{p ≤ exp(N^λ / (40 k n))} p^{-iu e^{N^λ}} / √p
//! ```
//!
//! and the mean residual between log ζ and a Dirichlet prime sum.

use crate::error::{LabError, Result};
use crate::phases::{make_phase_context, PhaseContext, ScaledLog};
use crate::primes::{PrimeTable, SieveOptions};
use crate::rng::rng_for;
use crate::stats::{mean_se, ComplexSum};
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use std::io::Write;

/// Cutoff and normalization of one prime sum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrimeSumSpec {
    pub n: f64,
    pub lambda: f64,
    /// Number of scales in the enclosing moment.
    pub k: u32,
    /// Power the sum will be raised to.
    pub exponent: u32,
}

impl PrimeSumSpec {
    pub fn new(n: f64, lambda: f64, k: u32, exponent: u32) -> Result<Self> {
        if !(n > 1.0) {
            return Err(LabError::Domain(format!("N must be > 1, got {n}")));
        }
        if !(lambda > 0.0) {
            return Err(LabError::Domain(format!("lambda must be > 0, got {lambda}")));
        }
        if k == 0 || exponent == 0 {
            return Err(LabError::Domain("k and n must be positive".into()));
        }
        Ok(PrimeSumSpec { n, lambda, k, exponent })
    }

    /// log of the cutoff, N^λ / (40 k n).
    pub fn log_cutoff(&self) -> f64 {
        self.n.powf(self.lambda) / (40.0 * self.k as f64 * self.exponent as f64)
    }

    pub fn cutoff(&self) -> f64 {
        self.log_cutoff().exp()
    }

    pub fn normalization(&self) -> f64 {
        1.0 / self.n.ln().sqrt()
    }

    /// Largest integer the sum runs over.
    pub fn cutoff_floor(&self) -> f64 {
        self.cutoff().floor()
    }
}

fn check_inputs(spec: &PrimeSumSpec, ctx: &PhaseContext, table: &PrimeTable) -> Result<usize> {
    if !ctx.matches(spec.n, spec.lambda) {
        return Err(LabError::Contract(format!(
            "phase context is for (N, λ) = ({}, {}), sum is for ({}, {})",
            ctx.n(),
            ctx.lambda(),
            spec.n,
            spec.lambda
        )));
    }
    let cutoff = spec.cutoff_floor();
    if cutoff < 2.0 {
        return Ok(0);
    }
    if (table.bound() as f64) < cutoff {
        return Err(LabError::OutOfRange(format!(
            "cutoff {cutoff} exceeds prime table bound {}",
            table.bound()
        )));
    }
    Ok(table.count_upto(cutoff))
}

/// Σ w_j e^{-i φ_j}, or Σ w_j e^{+i φ_j} when `conjugate`.
fn unit_sum(terms: impl Iterator<Item = (f64, f64)>, conjugate: bool) -> Complex64 {
    let sign = if conjugate { 1.0 } else { -1.0 };
    let mut acc = ComplexSum::default();
    for (phase, weight) in terms {
        let (s, c) = phase.sin_cos();
        acc.add(Complex64::new(weight * c, sign * weight * s));
    }
    acc.value()
}

/// P(λ, n; k, N, u) at a single `u ∈ [1, 2]`.
pub fn prime_sum_p(spec: &PrimeSumSpec, ctx: &PhaseContext, table: &PrimeTable, u: f64) -> Result<Complex64> {
    let count = check_inputs(spec, ctx, table)?;
    let mut terms = Vec::with_capacity(count);
    for i in 0..count {
        let phase = ctx.reduce_phase(u, table.log(i))?;
        terms.push((phase, table.reciprocals()[i].sqrt()));
    }
    Ok(unit_sum(terms.into_iter(), false) * spec.normalization())
}

/// Elementwise [`prime_sum_p`] over a strictly increasing grid in [1, 2].
///
/// The products `e^{N^λ} log p` are formed once per prime; each grid point
/// is then an exact rescaling, so results equal the pointwise evaluation bit
/// for bit and do not depend on the thread count.
pub fn prime_sum_grid(
    spec: &PrimeSumSpec,
    ctx: &PhaseContext,
    table: &PrimeTable,
    u_grid: &[f64],
) -> Result<Vec<Complex64>> {
    check_grid(u_grid)?;
    let count = check_inputs(spec, ctx, table)?;
    let scaled: Vec<ScaledLog> = (0..count)
        .into_par_iter()
        .map(|i| ctx.scaled_log(table.log(i)))
        .collect::<Result<_>>()?;
    let weights: Vec<f64> = table.reciprocals()[..count].iter().map(|r| r.sqrt()).collect();
    let norm = spec.normalization();
    Ok(u_grid
        .par_iter()
        .map(|&u| {
            let terms = scaled.iter().zip(&weights).map(|(s, &w)| (s.reduce_at(ctx, u), w));
            unit_sum(terms, false) * norm
        })
        .collect())
}

pub fn check_grid(u_grid: &[f64]) -> Result<()> {
    if u_grid.is_empty() {
        return Err(LabError::Ordering("empty u-grid".into()));
    }
    if let Some(&u) = u_grid.iter().find(|u| !(1.0..=2.0).contains(*u)) {
        return Err(LabError::Domain(format!("grid point {u} outside [1, 2]")));
    }
    if let Some(w) = u_grid.windows(2).find(|w| w[0] >= w[1]) {
        return Err(LabError::Ordering(format!(
            "grid is not strictly increasing at {} -> {}",
            w[0], w[1]
        )));
    }
    Ok(())
}

/// Midpoint rule on [1, 2]: u_j = 1 + (j + ½)/M. Every point is dyadic when
/// M is a power of two.
pub fn midpoint_grid(m: usize) -> Vec<f64> {
    (0..m).map(|j| 1.0 + (j as f64 + 0.5) / m as f64).collect()
}

/// M sorted uniform points on [1, 2] from the `dirichlet` substream.
pub fn random_grid(m: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng_for(seed, "dirichlet.grid", 0);
    let mut g: Vec<f64> = (0..m).map(|_| 1.0 + rng.random::<f64>()).collect();
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

/// Σ_{p ≤ x} p^{-it}/√p at moderate heights (plain double-precision phases).
pub fn dirichlet_sum_at(table: &PrimeTable, x: f64, t: f64) -> Result<Complex64> {
    if x > table.bound() as f64 {
        return Err(LabError::OutOfRange(format!(
            "cutoff {x} exceeds table bound {}",
            table.bound()
        )));
    }
    let count = table.count_upto(x);
    let terms = table.primes()[..count]
        .iter()
        .zip(table.reciprocals())
        .map(|(&p, r)| (t * (p as f64).ln(), r.sqrt()));
    Ok(unit_sum(terms, false))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResidualEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub used: usize,
    pub flagged: usize,
}

/// Monte Carlo estimate of
/// `(1/T) ∫_T^{2T} |log ζ(½+it) − Σ_{p≤x} p^{-it}/√p|^{2n} dt`.
///
/// `log_zeta` supplies the continuous determination of log ζ(½+it). Samples
/// on which it reports a singularity are excluded and counted; more than 1%
/// flagged samples aborts the estimate.
pub fn residual_moment<F>(
    log_zeta: F,
    table: &PrimeTable,
    t_height: f64,
    x: f64,
    n: u32,
    samples: usize,
    seed: u64,
) -> Result<ResidualEstimate>
where
    F: Fn(f64) -> Result<Complex64>,
{
    if n == 0 {
        return Err(LabError::Domain("n must be >= 1".into()));
    }
    if samples < 2 {
        return Err(LabError::Domain("need at least two samples".into()));
    }
    let mut rng = rng_for(seed, "dirichlet.residual", 0);
    let mut values = Vec::with_capacity(samples);
    let mut flagged = 0usize;
    for _ in 0..samples {
        let t = t_height * (1.0 + rng.random::<f64>());
        let lz = match log_zeta(t) {
            Ok(z) => z,
            Err(LabError::Singularity(_)) => {
                flagged += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let d = dirichlet_sum_at(table, x, t)?;
        values.push((lz - d).norm_sqr().powi(n as i32));
    }
    if flagged * 100 > samples {
        return Err(LabError::Integrity(format!(
            "{flagged} of {samples} residual samples flagged (limit 1%)"
        )));
    }
    let (mean, std_error) = mean_se(&values);
    Ok(ResidualEstimate {
        mean,
        std_error,
        used: values.len(),
        flagged,
    })
}

/// CSV dump with columns `u` and, per scale, the real and imaginary parts.
pub fn write_samples_csv<W: Write>(mut w: W, u_grid: &[f64], scales: &[(String, Vec<Complex64>)]) -> Result<()> {
    for (label, s) in scales {
        if s.len() != u_grid.len() {
            return Err(LabError::Alignment(format!(
                "scale {label} has {} samples for {} grid points",
                s.len(),
                u_grid.len()
            )));
        }
    }
    write!(w, "u")?;
    for (label, _) in scales {
        write!(w, ",re_P_{label},im_P_{label}")?;
    }
    writeln!(w)?;
    for (j, u) in u_grid.iter().enumerate() {
        write!(w, "{u:.17e}")?;
        for (_, s) in scales {
            write!(w, ",{:.17e},{:.17e}", s[j].re, s[j].im)?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Prime sums P(λ_j, e; k, N, ·) on one u-grid for every scale λ_j and every
/// exponent e in 1..=max_exponent, with k the number of scales.
#[derive(Clone, Debug)]
pub struct MultiScaleSamples {
    pub n: f64,
    pub lambdas: Vec<f64>,
    pub max_exponent: u32,
    pub grid: Vec<f64>,
    /// `samples[j][e - 1]`.
    pub samples: Vec<Vec<Vec<Complex64>>>,
    /// `cutoffs[j][e - 1]`.
    pub cutoffs: Vec<Vec<f64>>,
    pub table: PrimeTable,
    pub precision_bits: Vec<u32>,
}

impl MultiScaleSamples {
    /// Per-scale sequences for exponent `e` (the empty sum when e = 0 is never
    /// needed, so e = 0 maps to e = 1).
    pub fn column(&self, j: usize, e: u32) -> &[Complex64] {
        &self.samples[j][e.max(1) as usize - 1]
    }
}

pub fn multi_scale_samples(
    n: f64,
    lambdas: &[f64],
    max_exponent: u32,
    grid: &[f64],
    guard_bits: u32,
    sieve_cap: u64,
) -> Result<MultiScaleSamples> {
    check_grid(grid)?;
    if max_exponent == 0 {
        return Err(LabError::Domain("max exponent must be >= 1".into()));
    }
    let k = lambdas.len() as u32;
    let mut specs = Vec::new();
    let mut contexts = Vec::new();
    let mut bound = 2.0f64;
    for &l in lambdas {
        let row: Vec<PrimeSumSpec> = (1..=max_exponent)
            .map(|e| PrimeSumSpec::new(n, l, k, e))
            .collect::<Result<_>>()?;
        bound = bound.max(row[0].cutoff_floor());
        specs.push(row);
        contexts.push(make_phase_context(n, l, guard_bits)?);
    }
    let log_bits = contexts.iter().map(PhaseContext::precision_bits).max().unwrap_or(64);
    if bound > sieve_cap as f64 {
        return Err(LabError::capacity(
            format!("prime sums up to {bound:.6e} need a sieve beyond the cap"),
            sieve_cap,
        ));
    }
    let table = PrimeTable::sieve(
        bound as u64,
        &SieveOptions {
            cap: sieve_cap,
            log_bits,
        },
    )?;
    let mut samples = Vec::new();
    for (row, ctx) in specs.iter().zip(&contexts) {
        samples.push(
            row.iter()
                .map(|spec| prime_sum_grid(spec, ctx, &table, grid))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    Ok(MultiScaleSamples {
        n,
        lambdas: lambdas.to_vec(),
        max_exponent,
        grid: grid.to_vec(),
        samples,
        cutoffs: specs
            .iter()
            .map(|r| r.iter().map(PrimeSumSpec::cutoff).collect())
            .collect(),
        table,
        precision_bits: contexts.iter().map(PhaseContext::precision_bits).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table_for(ctx: &PhaseContext, bound: u64) -> PrimeTable {
        PrimeTable::sieve(
            bound,
            &SieveOptions {
                log_bits: ctx.precision_bits(),
                ..SieveOptions::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn cutoff_formula() {
        let s = PrimeSumSpec::new(2000.0, 1.0, 2, 1).unwrap();
        assert!((s.log_cutoff() - 25.0).abs() < 1e-12);
        let s = PrimeSumSpec::new(100.0, 0.5, 1, 2).unwrap();
        assert!((s.log_cutoff() - 10.0 / 80.0).abs() < 1e-15);
        assert!((s.normalization() - 1.0 / 100f64.ln().sqrt()).abs() < 1e-15);
    }

    #[test]
    fn empty_sum_below_two() {
        // N^λ = 50, k = 1, n = 2: cutoff e^{0.625} < 2.
        let ctx = make_phase_context(50.0, 1.0, 64).unwrap();
        let table = table_for(&ctx, 10);
        let spec = PrimeSumSpec::new(50.0, 1.0, 1, 2).unwrap();
        assert_eq!(prime_sum_p(&spec, &ctx, &table, 1.5).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn single_prime_case() {
        // N^λ = 100, k = 3, n = 1: cutoff e^{100/120} ≈ 2.30, only p = 2.
        let ctx = make_phase_context(100.0, 1.0, 64).unwrap();
        let table = table_for(&ctx, 10);
        let spec = PrimeSumSpec::new(100.0, 1.0, 3, 1).unwrap();
        assert!(spec.cutoff() >= 2.0 && spec.cutoff() < 3.0);
        let u = 1.375;
        let phi = ctx.reduce_phase(u, table.log(0)).unwrap();
        let expected = Complex64::new(phi.cos(), -phi.sin()) / 2f64.sqrt() * spec.normalization();
        let got = prime_sum_p(&spec, &ctx, &table, u).unwrap();
        assert!((got - expected).norm() < 1e-15);
    }

    #[test]
    fn triangle_bound_holds() {
        let ctx = make_phase_context(400.0, 1.0, 64).unwrap();
        let spec = PrimeSumSpec::new(400.0, 1.0, 1, 1).unwrap();
        let table = table_for(&ctx, spec.cutoff_floor() as u64);
        let bound: f64 = table.reciprocals().iter().map(|r| r.sqrt()).sum::<f64>() * spec.normalization();
        for u in midpoint_grid(16) {
            let z = prime_sum_p(&spec, &ctx, &table, u).unwrap();
            assert!(z.norm() <= bound + 1e-12);
        }
    }

    #[test]
    fn table_too_small_is_out_of_range() {
        let ctx = make_phase_context(400.0, 1.0, 64).unwrap();
        let spec = PrimeSumSpec::new(400.0, 1.0, 1, 1).unwrap();
        let table = table_for(&ctx, 100);
        assert!(matches!(
            prime_sum_p(&spec, &ctx, &table, 1.5),
            Err(LabError::OutOfRange(_))
        ));
    }

    #[test]
    fn mismatched_context_is_rejected() {
        let ctx = make_phase_context(400.0, 1.0, 64).unwrap();
        let spec = PrimeSumSpec::new(300.0, 1.0, 1, 1).unwrap();
        let table = table_for(&ctx, 100);
        assert!(matches!(
            prime_sum_p(&spec, &ctx, &table, 1.5),
            Err(LabError::Contract(_))
        ));
    }

    #[test]
    fn grid_matches_pointwise_and_rejects_bad_grids() {
        let ctx = make_phase_context(300.0, 1.0, 64).unwrap();
        let spec = PrimeSumSpec::new(300.0, 1.0, 1, 1).unwrap();
        let table = table_for(&ctx, spec.cutoff_floor() as u64);
        let one = prime_sum_grid(&spec, &ctx, &table, &[1.25]).unwrap();
        assert_eq!(one[0], prime_sum_p(&spec, &ctx, &table, 1.25).unwrap());
        assert!(matches!(
            prime_sum_grid(&spec, &ctx, &table, &[1.5, 1.25, 1.25]),
            Err(LabError::Ordering(_))
        ));
        assert!(prime_sum_grid(&spec, &ctx, &table, &[0.5]).is_err());
    }

    #[test]
    fn multi_scale_samples_match_single_sums() {
        let grid = midpoint_grid(8);
        let ms = multi_scale_samples(300.0, &[1.0, 0.8], 2, &grid, 64, 1_000_000).unwrap();
        let ctx = make_phase_context(300.0, 0.8, 64).unwrap();
        let spec = PrimeSumSpec::new(300.0, 0.8, 2, 2).unwrap();
        let direct = prime_sum_p(&spec, &ctx, &ms.table, grid[3]).unwrap();
        assert_eq!(ms.column(1, 2)[3], direct);
        assert!(matches!(
            multi_scale_samples(2000.0, &[1.0], 1, &grid, 64, 1_000_000),
            Err(LabError::Capacity { .. })
        ));
    }

    #[test]
    fn negated_phases_conjugate() {
        let terms = [(0.3, 1.0), (2.0, 0.5), (5.9, 0.25)];
        let a = unit_sum(terms.iter().copied(), false);
        let b = unit_sum(terms.iter().copied(), true);
        assert!((a.conj() - b).norm() < 1e-16);
    }

    #[test]
    fn residual_of_the_prime_sum_itself_is_zero() {
        let table = crate::primes::sieve_upto(1000).unwrap();
        let est = residual_moment(|t| dirichlet_sum_at(&table, 100.0, t), &table, 1e4, 100.0, 1, 64, 3).unwrap();
        assert_eq!(est.mean, 0.0);
        assert_eq!(est.flagged, 0);
    }

    #[test]
    fn residual_aborts_when_too_many_samples_are_flagged() {
        let table = crate::primes::sieve_upto(100).unwrap();
        let err = residual_moment(
            |_| Err(LabError::Singularity("at a zero".into())),
            &table,
            1e4,
            10.0,
            1,
            100,
            3,
        )
        .unwrap_err();
        assert!(matches!(err, LabError::Integrity(_)));
    }

    #[test]
    fn csv_dump_has_one_row_per_grid_point() {
        let grid = midpoint_grid(4);
        let s = vec![("l1".to_string(), vec![Complex64::new(1.0, -1.0); 4])];
        let mut buf = Vec::new();
        write_samples_csv(&mut buf, &grid, &s).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert!(text.starts_with("u,re_P_l1,im_P_l1\n"));
    }
}
