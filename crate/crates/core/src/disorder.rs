//! The limit objects: complex Gaussian mixed moments, the total-disorder
//! target tensor, finite-dimensional disorder samples and rectangle
//! probabilities.

use crate::error::{LabError, Result};
use crate::rng::rng_for;
use crate::stats::{complex_mean_se, normal_cdf};
use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

pub const DEFAULT_EXPONENT_CAP: u32 = 6;
/// Recorded in reports next to the seed.
pub const NORMAL_SAMPLER: &str = "rand_distr::StandardNormal (ziggurat)";
/// Samples drawn from one derived substream.
pub const SAMPLE_CHUNK: usize = 8192;

/// n! exactly, as a float.
pub fn factorial(n: u32) -> f64 {
    (1..=n as u128).product::<u128>() as f64
}

/// E[Z^m Z̄^n] for a centred complex Gaussian whose real and imaginary parts
/// are independent with variance σ² each: n! 2^n σ^{2n} if m = n, else 0.
pub fn gaussian_mixed_moment(m: u32, n: u32, sigma2: f64) -> Result<f64> {
    if !(sigma2 > 0.0) {
        return Err(LabError::Domain(format!("sigma2 must be > 0, got {sigma2}")));
    }
    if m != n {
        return Ok(0.0);
    }
    Ok(factorial(n) * 2f64.powi(n as i32) * sigma2.powi(n as i32))
}

/// A joint mixed moment over k scales λ_1 > … > λ_k > 0.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct MomentSpec {
    lambdas: Vec<f64>,
    m: Vec<u32>,
    n: Vec<u32>,
}

impl MomentSpec {
    pub fn new(lambdas: Vec<f64>, m: Vec<u32>, n: Vec<u32>) -> Result<Self> {
        Self::with_cap(lambdas, m, n, DEFAULT_EXPONENT_CAP)
    }

    pub fn with_cap(lambdas: Vec<f64>, m: Vec<u32>, n: Vec<u32>, cap: u32) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(LabError::Domain("a moment needs at least one scale".into()));
        }
        if m.len() != lambdas.len() || n.len() != lambdas.len() {
            return Err(LabError::Alignment(format!(
                "{} scales but {} m-exponents and {} n-exponents",
                lambdas.len(),
                m.len(),
                n.len()
            )));
        }
        if let Some(l) = lambdas.iter().find(|l| !(**l > 0.0) || !l.is_finite()) {
            return Err(LabError::Domain(format!("scales must be positive, got {l}")));
        }
        if lambdas.windows(2).any(|w| w[0] <= w[1]) {
            return Err(LabError::Ordering(format!(
                "scales must be strictly decreasing: {lambdas:?}"
            )));
        }
        if let Some(e) = m.iter().chain(&n).find(|&&e| e > cap) {
            return Err(LabError::capacity(format!("exponent {e}"), cap));
        }
        Ok(MomentSpec { lambdas, m, n })
    }

    pub fn k(&self) -> usize {
        self.lambdas.len()
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn m(&self) -> &[u32] {
        &self.m
    }

    pub fn n(&self) -> &[u32] {
        &self.n
    }

    /// Every (m_j, n_j) swapped.
    pub fn swapped(&self) -> MomentSpec {
        MomentSpec {
            lambdas: self.lambdas.clone(),
            m: self.n.clone(),
            n: self.m.clone(),
        }
    }

    pub fn is_diagonal(&self) -> bool {
        self.m == self.n
    }
}

/// ∏_j n_j! λ_j^{n_j} δ(m_j, n_j).
pub fn target_tensor(spec: &MomentSpec) -> f64 {
    if !spec.is_diagonal() {
        return 0.0;
    }
    spec.lambdas
        .iter()
        .zip(&spec.n)
        .map(|(&l, &n)| factorial(n) * l.powi(n as i32))
        .product()
}

/// The disorder coordinate G_λ: independent real and imaginary parts of
/// variance λ/2 each.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DisorderParams {
    lambda: f64,
}

impl DisorderParams {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(LabError::Domain(format!("lambda must be > 0, got {lambda}")));
        }
        Ok(DisorderParams { lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn component_variance(&self) -> f64 {
        self.lambda / 2.0
    }
}

/// [re_lo, re_hi] × [im_lo, im_hi]; infinite ends allowed.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Rectangle {
    pub re_lo: f64,
    pub re_hi: f64,
    pub im_lo: f64,
    pub im_hi: f64,
}

impl Rectangle {
    pub fn new(re_lo: f64, re_hi: f64, im_lo: f64, im_hi: f64) -> Result<Self> {
        if [re_lo, re_hi, im_lo, im_hi].iter().any(|x| x.is_nan()) || re_lo > re_hi || im_lo > im_hi {
            return Err(LabError::Domain(format!(
                "invalid rectangle [{re_lo}, {re_hi}] x [{im_lo}, {im_hi}]"
            )));
        }
        Ok(Rectangle {
            re_lo,
            re_hi,
            im_lo,
            im_hi,
        })
    }

    pub fn full() -> Self {
        Rectangle {
            re_lo: f64::NEG_INFINITY,
            re_hi: f64::INFINITY,
            im_lo: f64::NEG_INFINITY,
            im_hi: f64::INFINITY,
        }
    }

    /// (−∞, 0] × (−∞, 0].
    pub fn lower_left_quadrant() -> Self {
        Rectangle {
            re_lo: f64::NEG_INFINITY,
            re_hi: 0.0,
            im_lo: f64::NEG_INFINITY,
            im_hi: 0.0,
        }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        self.re_lo <= z.re && z.re <= self.re_hi && self.im_lo <= z.im && z.im <= self.im_hi
    }

    pub fn is_within(&self, other: &Rectangle) -> bool {
        other.re_lo <= self.re_lo && self.re_hi <= other.re_hi && other.im_lo <= self.im_lo && self.im_hi <= other.im_hi
    }
}

fn interval_prob(lo: f64, hi: f64, sd: f64) -> f64 {
    let cdf = |x: f64| {
        if x == f64::INFINITY {
            1.0
        } else if x == f64::NEG_INFINITY {
            0.0
        } else {
            normal_cdf(x / sd)
        }
    };
    (cdf(hi) - cdf(lo)).max(0.0)
}

/// P{G_λ ∈ rect}.
pub fn rect_prob(params: &DisorderParams, rect: &Rectangle) -> f64 {
    let sd = params.component_variance().sqrt();
    interval_prob(rect.re_lo, rect.re_hi, sd) * interval_prob(rect.im_lo, rect.im_hi, sd)
}

/// Independent draws of (D_{λ_1}, …, D_{λ_k}), stored one column per scale.
#[derive(Clone, Debug, PartialEq)]
pub struct DisorderSamples {
    pub lambdas: Vec<f64>,
    pub columns: Vec<Vec<Complex64>>,
    pub seed: u64,
}

impl DisorderSamples {
    pub fn count(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }
}

/// `count` draws, split into chunks of [`SAMPLE_CHUNK`] with one derived
/// substream per chunk so the output does not depend on the thread count.
pub fn sample_disorder(lambdas: &[f64], count: usize, seed: u64) -> Result<DisorderSamples> {
    let params: Vec<DisorderParams> = lambdas.iter().map(|&l| DisorderParams::new(l)).collect::<Result<_>>()?;
    if count == 0 {
        return Err(LabError::Domain("count must be >= 1".into()));
    }
    let k = params.len();
    let chunks = count.div_ceil(SAMPLE_CHUNK);
    let rows: Vec<Vec<Complex64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = rng_for(seed, "disorder", c as u64);
            let len = SAMPLE_CHUNK.min(count - c * SAMPLE_CHUNK);
            let mut out = Vec::with_capacity(len * k);
            for _ in 0..len {
                for p in &params {
                    let sd = p.component_variance().sqrt();
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    out.push(Complex64::new(sd * re, sd * im));
                }
            }
            out
        })
        .collect();
    let mut columns = vec![Vec::with_capacity(count); k];
    for row in rows {
        for (i, z) in row.into_iter().enumerate() {
            columns[i % k].push(z);
        }
    }
    Ok(DisorderSamples {
        lambdas: lambdas.to_vec(),
        columns,
        seed,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct MgfCheck {
    pub empirical: Complex64,
    pub std_error: f64,
    pub exact: Complex64,
}

/// Monte Carlo E[e^{αZ + βZ̄}] against e^{2αβσ²}, for Z with component
/// variance σ².
pub fn mgf_check(alpha: Complex64, beta: Complex64, sigma2: f64, count: usize, seed: u64) -> Result<MgfCheck> {
    if alpha.norm() > 1.0 || beta.norm() > 1.0 {
        return Err(LabError::Domain("need |alpha|, |beta| <= 1".into()));
    }
    let samples = sample_disorder(&[2.0 * sigma2], count, seed)?;
    let values: Vec<Complex64> = samples.columns[0]
        .iter()
        .map(|z| (alpha * z + beta * z.conj()).exp())
        .collect();
    let (empirical, std_error) = complex_mean_se(&values);
    Ok(MgfCheck {
        empirical,
        std_error,
        exact: (alpha * beta * 2.0 * sigma2).exp(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// E[Z^m Z̄^n] by summing over all pairings of the m + n factors
    /// (Isserlis), with E[ZZ] = E[Z̄Z̄] = 0 and E[ZZ̄] = 2σ².
    fn wick_oracle(m: usize, n: usize, sigma2: f64) -> f64 {
        fn pairings(items: &mut Vec<bool>, sigma2: f64) -> f64 {
            if items.is_empty() {
                return 1.0;
            }
            let first = items.remove(0);
            let mut total = 0.0;
            for j in 0..items.len() {
                let other = items.remove(j);
                if first != other {
                    total += 2.0 * sigma2 * pairings(items, sigma2);
                }
                items.insert(j, other);
            }
            items.insert(0, first);
            total
        }
        if (m + n) % 2 == 1 {
            return 0.0;
        }
        let mut items: Vec<bool> = std::iter::repeat(true)
            .take(m)
            .chain(std::iter::repeat(false).take(n))
            .collect();
        pairings(&mut items, sigma2)
    }

    #[test]
    fn moment_law_examples() {
        assert_eq!(gaussian_mixed_moment(1, 1, 0.5).unwrap(), 1.0);
        assert_eq!(gaussian_mixed_moment(2, 1, 0.5).unwrap(), 0.0);
        assert!((gaussian_mixed_moment(2, 2, 0.15).unwrap() - 0.18).abs() < 1e-15);
        assert!(gaussian_mixed_moment(1, 1, 0.0).is_err());
    }

    #[test]
    fn moment_law_matches_pairing_enumeration() {
        for m in 0..=6u32 {
            for n in 0..=6u32 {
                let closed = gaussian_mixed_moment(m, n, 0.35).unwrap();
                let wick = wick_oracle(m as usize, n as usize, 0.35);
                assert!((closed - wick).abs() <= 1e-12 * wick.abs().max(1.0), "m={m} n={n}");
            }
        }
    }

    #[test]
    fn per_scale_factor_is_n_factorial_lambda_power() {
        for n in 0..=6 {
            let l: f64 = 0.7;
            let a = gaussian_mixed_moment(n, n, l / 2.0).unwrap();
            assert!((a - factorial(n) * l.powi(n as i32)).abs() < 1e-14);
        }
    }

    #[test]
    fn target_tensor_examples() {
        let s = MomentSpec::new(vec![0.5], vec![1], vec![1]).unwrap();
        assert_eq!(target_tensor(&s), 0.5);
        let s = MomentSpec::new(vec![0.9, 0.3], vec![1, 2], vec![1, 2]).unwrap();
        assert!((target_tensor(&s) - 0.162).abs() < 1e-15);
        let s = MomentSpec::new(vec![0.9, 0.3], vec![1, 2], vec![1, 1]).unwrap();
        assert_eq!(target_tensor(&s), 0.0);
    }

    #[test]
    fn target_tensor_is_multiplicative_and_permutation_invariant() {
        let a = MomentSpec::new(vec![0.8], vec![2], vec![2]).unwrap();
        let b = MomentSpec::new(vec![0.4], vec![3], vec![3]).unwrap();
        let ab = MomentSpec::new(vec![0.8, 0.4], vec![2, 3], vec![2, 3]).unwrap();
        assert!((target_tensor(&ab) - target_tensor(&a) * target_tensor(&b)).abs() < 1e-15);
    }

    #[test]
    fn spec_validation() {
        assert!(matches!(
            MomentSpec::new(vec![0.3, 0.9], vec![1, 1], vec![1, 1]),
            Err(LabError::Ordering(_))
        ));
        assert!(matches!(
            MomentSpec::new(vec![0.5, 0.5], vec![1, 1], vec![1, 1]),
            Err(LabError::Ordering(_))
        ));
        assert!(matches!(
            MomentSpec::new(vec![0.5], vec![7], vec![1]),
            Err(LabError::Capacity { .. })
        ));
        assert!(MomentSpec::new(vec![0.5], vec![1, 2], vec![1]).is_err());
    }

    #[test]
    fn rectangle_probabilities() {
        let p = DisorderParams::new(0.5).unwrap();
        assert!((rect_prob(&p, &Rectangle::lower_left_quadrant()) - 0.25).abs() < 1e-15);
        let r = Rectangle::new(f64::NEG_INFINITY, 0.25, f64::NEG_INFINITY, 0.0).unwrap();
        assert!((rect_prob(&p, &r) - 0.345_731_230_637_006_55).abs() < 1e-12);
        assert_eq!(rect_prob(&p, &Rectangle::full()), 1.0);
        // Additive over a split of the real axis.
        let left = Rectangle::new(-1.0, 0.3, -0.5, 2.0).unwrap();
        let right = Rectangle::new(0.3, 1.2, -0.5, 2.0).unwrap();
        let whole = Rectangle::new(-1.0, 1.2, -0.5, 2.0).unwrap();
        assert!((rect_prob(&p, &left) + rect_prob(&p, &right) - rect_prob(&p, &whole)).abs() < 1e-15);
        assert!(left.is_within(&whole) && rect_prob(&p, &left) <= rect_prob(&p, &whole));
        assert!(Rectangle::new(1.0, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn samples_have_the_right_variances_and_are_thread_invariant() {
        let count = 50_000;
        let s = sample_disorder(&[0.9, 0.3], count, 11).unwrap();
        for (j, &l) in s.lambdas.iter().enumerate() {
            let re: Vec<f64> = s.columns[j].iter().map(|z| z.re).collect();
            let v = crate::stats::variance(&re);
            let tol = 3.0 * (2.0 / count as f64).sqrt() * l / 2.0;
            assert!((v - l / 2.0).abs() < tol, "scale {l}: {v}");
        }
        let a: Vec<f64> = s.columns[0].iter().map(|z| z.re).collect();
        let b: Vec<f64> = s.columns[1].iter().map(|z| z.re).collect();
        assert!(crate::stats::correlation(&a, &b).abs() < 3.0 / (count as f64).sqrt());

        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let single = pool.install(|| sample_disorder(&[0.9, 0.3], count, 11).unwrap());
        assert_eq!(single, s);
    }

    #[test]
    fn mgf_trivial_and_closed_form() {
        let zero = Complex64::new(0.0, 0.0);
        let c = mgf_check(zero, zero, 0.5, 10, 1).unwrap();
        assert_eq!(c.empirical, Complex64::new(1.0, 0.0));
        assert_eq!(c.exact, Complex64::new(1.0, 0.0));
        let h = Complex64::new(0.5, 0.0);
        let c = mgf_check(h, h, 0.5, 200_000, 5).unwrap();
        assert!((c.exact.re - 1.284_025_416_687_741_5).abs() < 1e-15);
        assert!((c.empirical - c.exact).norm() < 3.0 * c.std_error + 1e-12);
        assert!(mgf_check(Complex64::new(2.0, 0.0), h, 0.5, 10, 1).is_err());
    }
}
