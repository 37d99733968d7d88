//! Prime tables and Mertens-type sums.
//!
//! [`PrimeTable`] holds every prime up to a bound together with 1/p and a
//! multiprecision ln p. Logarithms are built incrementally:
//!
//! ```text
//! ln p = ln(p - 1) + 2 atanh(1 / (2p - 1))
//! ```
//!
//! where ln(p - 1) is the sum of the logarithms of its (smaller, already
//! tabulated) prime factors. The atanh series gains about `2 log2(2p)` bits
//! per term and only divides by machine integers.

use crate::error::{LabError, Result};
use crate::phases::fixed::{atanh_ratio, Fixed};
use crate::stats::CompensatedSum;
use num_bigint::Sign;
use std::io::{Read, Write};

pub const DEFAULT_SIEVE_CAP: u64 = 1_000_000_000;
pub const DEFAULT_LOG_BITS: u32 = 256;
const SEGMENT: u64 = 1 << 18;

#[derive(Clone, Copy, Debug)]
pub struct SieveOptions {
    /// Largest admissible bound.
    pub cap: u64,
    /// Fractional bits of the stored logarithms.
    pub log_bits: u32,
}

impl Default for SieveOptions {
    fn default() -> Self {
        SieveOptions {
            cap: DEFAULT_SIEVE_CAP,
            log_bits: DEFAULT_LOG_BITS,
        }
    }
}

/// Immutable table of the primes up to `bound`.
#[derive(Clone, Debug)]
pub struct PrimeTable {
    bound: u64,
    primes: Vec<u64>,
    logs: Vec<Fixed>,
    reciprocals: Vec<f64>,
    log_bits: u32,
}

/// Primes ≤ `bound` by a segmented sieve of Eratosthenes.
pub fn segmented_sieve(bound: u64) -> Vec<u64> {
    if bound < 2 {
        return Vec::new();
    }
    let root = (bound as f64).sqrt() as u64 + 1;
    // base primes up to sqrt(bound) by a plain sieve
    let mut small = vec![true; (root + 1) as usize];
    small[0] = false;
    small[1] = false;
    let mut i = 2usize;
    while i * i <= root as usize {
        if small[i] {
            let mut j = i * i;
            while j <= root as usize {
                small[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    let base: Vec<u64> = (2..=root).filter(|&k| small[k as usize]).collect();

    let mut out = Vec::new();
    let mut lo = 2u64;
    let mut mark = vec![true; SEGMENT as usize];
    while lo <= bound {
        let hi = (lo + SEGMENT - 1).min(bound);
        let len = (hi - lo + 1) as usize;
        mark[..len].iter_mut().for_each(|m| *m = true);
        for &p in &base {
            if p * p > hi {
                break;
            }
            let start = (p * p).max(lo.div_ceil(p) * p);
            let mut j = start;
            while j <= hi {
                mark[(j - lo) as usize] = false;
                j += p;
            }
        }
        out.extend((0..len).filter(|&k| mark[k]).map(|k| lo + k as u64));
        lo = hi + 1;
    }
    out
}

/// Sieve with default options.
pub fn sieve_upto(bound: u64) -> Result<PrimeTable> {
    PrimeTable::sieve(bound, &SieveOptions::default())
}

impl PrimeTable {
    pub fn sieve(bound: u64, opts: &SieveOptions) -> Result<Self> {
        if bound > opts.cap {
            return Err(LabError::capacity(
                format!("sieve bound {bound} exceeds the configured memory cap"),
                opts.cap,
            ));
        }
        let primes = segmented_sieve(bound);
        let logs = log_chain(&primes, opts.log_bits);
        let reciprocals = primes.iter().map(|&p| 1.0 / p as f64).collect();
        Ok(PrimeTable {
            bound,
            primes,
            logs,
            reciprocals,
            log_bits: opts.log_bits,
        })
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    pub fn log(&self, idx: usize) -> &Fixed {
        &self.logs[idx]
    }

    pub fn logs(&self) -> &[Fixed] {
        &self.logs
    }

    pub fn reciprocals(&self) -> &[f64] {
        &self.reciprocals
    }

    pub fn log_bits(&self) -> u32 {
        self.log_bits
    }

    /// Number of primes ≤ x (x may exceed the bound; the count is then that
    /// of the whole table).
    pub fn count_upto(&self, x: f64) -> usize {
        if x < 2.0 {
            return 0;
        }
        let xi = x.floor();
        self.primes.partition_point(|&p| (p as f64) <= xi)
    }

    /// Σ_{p ≤ x} 1/p, summed in ascending order with compensation.
    pub fn mertens_sum(&self, x: f64) -> Result<f64> {
        if x.floor() > self.bound as f64 {
            return Err(LabError::OutOfRange(format!(
                "cutoff {x} exceeds table bound {}",
                self.bound
            )));
        }
        let n = self.count_upto(x);
        Ok(self.reciprocals[..n]
            .iter()
            .copied()
            .collect::<CompensatedSum>()
            .value())
    }

    /// Σ_{p ≤ x} p^{-power}; used for the repeated-prime corrections of
    /// diagonal sums.
    pub fn power_sum(&self, x: f64, power: u32) -> Result<f64> {
        if x.floor() > self.bound as f64 {
            return Err(LabError::OutOfRange(format!(
                "cutoff {x} exceeds table bound {}",
                self.bound
            )));
        }
        let n = self.count_upto(x);
        Ok(self.reciprocals[..n]
            .iter()
            .map(|r| r.powi(power as i32))
            .collect::<CompensatedSum>()
            .value())
    }

    /// Write the table in the `PTBL1` cache format (see `docs/file-formats.md`).
    pub fn write_cache<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(PTBL_MAGIC)?;
        w.write_all(&[PTBL_VERSION])?;
        w.write_all(&self.bound.to_le_bytes())?;
        w.write_all(&(self.primes.len() as u64).to_le_bytes())?;
        w.write_all(&self.log_bits.to_le_bytes())?;
        for p in &self.primes {
            w.write_all(&p.to_le_bytes())?;
        }
        for l in &self.logs {
            let (_, bytes, exponent) = l.to_mantissa_exponent();
            w.write_all(&(bytes.len() as u32).to_be_bytes())?;
            w.write_all(&bytes)?;
            w.write_all(&exponent.to_be_bytes())?;
        }
        Ok(())
    }

    pub fn read_cache<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 5];
        r.read_exact(&mut magic)?;
        if &magic != PTBL_MAGIC {
            return Err(LabError::Integrity("not a PTBL1 prime table".into()));
        }
        let version = read_array::<1, _>(&mut r)?[0];
        if version != PTBL_VERSION {
            return Err(LabError::Integrity(format!(
                "unsupported prime table version {version}"
            )));
        }
        let bound = u64::from_le_bytes(read_array(&mut r)?);
        let count = u64::from_le_bytes(read_array(&mut r)?) as usize;
        let log_bits = u32::from_le_bytes(read_array(&mut r)?);
        let mut primes = Vec::with_capacity(count);
        for _ in 0..count {
            primes.push(u64::from_le_bytes(read_array(&mut r)?));
        }
        let mut logs = Vec::with_capacity(count);
        for _ in 0..count {
            let len = u32::from_be_bytes(read_array(&mut r)?) as usize;
            let mut bytes = vec![0u8; len];
            r.read_exact(&mut bytes)?;
            let exponent = i32::from_be_bytes(read_array(&mut r)?);
            logs.push(Fixed::from_mantissa_exponent(Sign::Plus, &bytes, exponent));
        }
        if primes.windows(2).any(|w| w[0] >= w[1]) || primes.last().is_some_and(|&p| p > bound) {
            return Err(LabError::Integrity(
                "prime table is not sorted or exceeds its bound".into(),
            ));
        }
        let reciprocals = primes.iter().map(|&p| 1.0 / p as f64).collect();
        Ok(PrimeTable {
            bound,
            primes,
            logs,
            reciprocals,
            log_bits,
        })
    }
}

const PTBL_MAGIC: &[u8; 5] = b"PTBL1";
const PTBL_VERSION: u8 = 1;

fn read_array<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)?;
    Ok(buf)
}

/// ln p for every prime of `primes` (ascending, starting at 2, no gaps).
fn log_chain(primes: &[u64], bits: u32) -> Vec<Fixed> {
    let work = bits + 32;
    let mut logs: Vec<Fixed> = Vec::with_capacity(primes.len());
    for (i, &p) in primes.iter().enumerate() {
        // ln(p - 1) from the factorisation of p - 1 over earlier primes
        let mut acc = Fixed::zero(work);
        let mut m = p - 1;
        for (j, &q) in primes[..i].iter().enumerate() {
            if q * q > m {
                break;
            }
            while m % q == 0 {
                acc = &acc + &logs[j];
                m /= q;
            }
        }
        if m > 1 {
            let j = primes[..i]
                .binary_search(&m)
                .expect("cofactor of p - 1 is a smaller prime");
            acc = &acc + &logs[j];
        }
        let step = atanh_ratio(1, 2 * p - 1, work).shl(1);
        logs.push(&acc + &step);
    }
    logs.into_iter().map(|l| l.round_to(bits)).collect()
}
