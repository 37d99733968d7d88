//! Small statistical helpers: compensated sums, moment estimators, the block
//! jackknife, and the two-sample Kolmogorov–Smirnov distance.

use num_complex::Complex64;

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Compensated complex sum (componentwise).
#[derive(Clone, Copy, Debug, Default)]
pub struct ComplexSum {
    re: CompensatedSum,
    im: CompensatedSum,
}

impl ComplexSum {
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().copied().collect::<CompensatedSum>().value() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return f64::NAN;
    }
    let m = mean(xs);
    let ss: CompensatedSum = xs.iter().map(|x| (x - m) * (x - m)).collect();
    ss.value() / (n - 1) as f64
}

/// Mean and its standard error.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    let m = mean(xs);
    if n < 2 {
        return (m, f64::NAN);
    }
    (m, (variance(xs) / n as f64).sqrt())
}

/// Complex mean with the standard error of its modulus-scale fluctuation,
/// i.e. sqrt(E|z - mean|^2 / n).
pub fn complex_mean_se(zs: &[Complex64]) -> (Complex64, f64) {
    let n = zs.len();
    let mut acc = ComplexSum::default();
    for &z in zs {
        acc.add(z);
    }
    let m = acc.value() / n as f64;
    if n < 2 {
        return (m, f64::NAN);
    }
    let ss: CompensatedSum = zs.iter().map(|z| (z - m).norm_sqr()).collect();
    (m, (ss.value() / ((n - 1) as f64) / n as f64).sqrt())
}

/// Sample covariance and its standard error (from the spread of the centred
/// products).
pub fn covariance_se(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    let mx = mean(xs);
    let my = mean(ys);
    let prods: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).collect();
    let (m, se) = mean_se(&prods);
    (m * n as f64 / (n as f64 - 1.0), se)
}

/// Sample variance and its standard error, sqrt((m4 − m2²)/n).
pub fn variance_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = mean(xs);
    let m2 = xs.iter().map(|x| (x - m).powi(2)).collect::<CompensatedSum>().value() / n;
    let m4 = xs.iter().map(|x| (x - m).powi(4)).collect::<CompensatedSum>().value() / n;
    (m2 * n / (n - 1.0), ((m4 - m2 * m2).max(0.0) / n).sqrt())
}

pub fn correlation(xs: &[f64], ys: &[f64]) -> f64 {
    let (c, _) = covariance_se(xs, ys);
    c / (variance(xs) * variance(ys)).sqrt()
}

/// Delete-one-block jackknife of the mean of a complex sequence.
///
/// The sequence is cut into `blocks` contiguous blocks (the last block absorbs
/// the remainder). Returns the full-sample mean and the jackknife standard
/// error, measured on the modulus scale.
pub fn block_jackknife_mean(zs: &[Complex64], blocks: usize) -> (Complex64, f64) {
    let n = zs.len();
    let blocks = blocks.clamp(2, n.max(2));
    let mut acc = ComplexSum::default();
    for &z in zs {
        acc.add(z);
    }
    let total = acc.value();
    let full = total / n as f64;
    if n < 2 {
        return (full, f64::NAN);
    }
    let size = n / blocks;
    let mut leave_out = Vec::with_capacity(blocks);
    for b in 0..blocks {
        let lo = b * size;
        let hi = if b + 1 == blocks { n } else { lo + size };
        let mut bs = ComplexSum::default();
        for &z in &zs[lo..hi] {
            bs.add(z);
        }
        let rest = (total - bs.value()) / (n - (hi - lo)) as f64;
        leave_out.push(rest);
    }
    let g = blocks as f64;
    let jm = leave_out.iter().sum::<Complex64>() / g;
    let ss: f64 = leave_out.iter().map(|z| (z - jm).norm_sqr()).sum();
    (full, ((g - 1.0) / g * ss).sqrt())
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    if x == f64::INFINITY {
        return 1.0;
    }
    if x == f64::NEG_INFINITY {
        return 0.0;
    }
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}

/// Two-sample Kolmogorov–Smirnov distance sup |F_a - F_b|.
pub fn ks_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut a: Vec<f64> = a.to_vec();
    let mut b: Vec<f64> = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}
