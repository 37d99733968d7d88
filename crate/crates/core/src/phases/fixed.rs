//! Binary fixed-point numbers on top of `BigInt`.
//!
//! A [`Fixed`] is `mantissa * 2^-frac_bits`. This is all the multiprecision
//! arithmetic phase reduction needs: exact products, floor division by 2π,
//! and a handful of constants (π, ln 2, e^x, logarithms of integers) computed
//! by series whose terms only ever need multiplication or division by
//! machine integers.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::ops::{Add, Neg, Sub};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fixed {
    mant: BigInt,
    frac_bits: u32,
}

/// `x * 2^e` without intermediate overflow or underflow.
fn ldexp(mut x: f64, mut e: i64) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
        if x.is_infinite() {
            return x;
        }
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
        if x == 0.0 {
            return x;
        }
    }
    x * 2f64.powi(e as i32)
}

impl Fixed {
    pub fn from_parts(mant: BigInt, frac_bits: u32) -> Self {
        Fixed { mant, frac_bits }
    }

    pub fn zero(frac_bits: u32) -> Self {
        Fixed::from_parts(BigInt::zero(), frac_bits)
    }

    pub fn from_integer(n: impl Into<BigInt>, frac_bits: u32) -> Self {
        Fixed::from_parts(n.into() << frac_bits, frac_bits)
    }

    /// Exact when `x` has at most `frac_bits` fractional bits, otherwise
    /// rounded toward negative infinity.
    pub fn from_f64(x: f64, frac_bits: u32) -> Self {
        assert!(x.is_finite(), "Fixed::from_f64 needs a finite value");
        if x == 0.0 {
            return Fixed::zero(frac_bits);
        }
        let (m, e) = decompose(x);
        let shift = e + frac_bits as i64;
        let mant = if shift >= 0 {
            m << shift as u64
        } else {
            m >> (-shift) as u64
        };
        Fixed::from_parts(mant, frac_bits)
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mant
    }

    pub fn frac_bits(&self) -> u32 {
        self.frac_bits
    }

    pub fn is_positive(&self) -> bool {
        self.mant.is_positive()
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    /// Number of bits in the integer part of |self|.
    pub fn integer_bits(&self) -> u64 {
        self.mant.bits().saturating_sub(self.frac_bits as u64)
    }

    pub fn to_f64(&self) -> f64 {
        let bits = self.mant.bits() as i64;
        let shift = (bits - 64).max(0);
        let top = (&self.mant >> shift as u64).to_f64().unwrap_or(0.0);
        ldexp(top, shift - self.frac_bits as i64)
    }

    /// Change the number of fractional bits; dropping bits rounds toward
    /// negative infinity.
    pub fn rescale(&self, frac_bits: u32) -> Fixed {
        let mant = match frac_bits.cmp(&self.frac_bits) {
            Ordering::Equal => self.mant.clone(),
            Ordering::Greater => &self.mant << (frac_bits - self.frac_bits),
            Ordering::Less => &self.mant >> (self.frac_bits - frac_bits),
        };
        Fixed::from_parts(mant, frac_bits)
    }

    /// Change the number of fractional bits with round-half-up.
    pub fn round_to(&self, frac_bits: u32) -> Fixed {
        if frac_bits >= self.frac_bits {
            return self.rescale(frac_bits);
        }
        let drop = self.frac_bits - frac_bits;
        let half = BigInt::one() << (drop - 1);
        Fixed::from_parts((&self.mant + half) >> drop, frac_bits)
    }

    /// Product rounded toward negative infinity to `frac_bits` fractional bits.
    pub fn mul(&self, other: &Fixed, frac_bits: u32) -> Fixed {
        let exact = Fixed::from_parts(&self.mant * &other.mant, self.frac_bits + other.frac_bits);
        exact.rescale(frac_bits)
    }

    pub fn mul_u64(&self, k: u64) -> Fixed {
        Fixed::from_parts(&self.mant * k, self.frac_bits)
    }

    /// Quotient by a machine integer, rounded toward negative infinity.
    pub fn div_u64(&self, d: u64) -> Fixed {
        Fixed::from_parts(self.mant.div_floor(&BigInt::from(d)), self.frac_bits)
    }

    pub fn shl(&self, k: u32) -> Fixed {
        Fixed::from_parts(&self.mant << k, self.frac_bits)
    }

    /// Distance in units of the last place after aligning both operands to
    /// the coarser of the two precisions.
    pub fn ulp_distance(&self, other: &Fixed) -> BigInt {
        let bits = self.frac_bits.min(other.frac_bits);
        (self.round_to(bits).mant - other.round_to(bits).mant).abs()
    }

    /// Big-endian magnitude bytes and the binary exponent, so that
    /// `value = ±magnitude * 2^exponent`.
    pub fn to_mantissa_exponent(&self) -> (Sign, Vec<u8>, i32) {
        let (sign, bytes) = self.mant.to_bytes_be();
        (sign, bytes, -(self.frac_bits as i32))
    }

    pub fn from_mantissa_exponent(sign: Sign, bytes: &[u8], exponent: i32) -> Fixed {
        let mant = BigInt::from_bytes_be(sign, bytes);
        if exponent <= 0 {
            Fixed::from_parts(mant, (-exponent) as u32)
        } else {
            Fixed::from_parts(mant << exponent as u32, 0)
        }
    }
}

/// `x = m * 2^e` with integer `m`.
fn decompose(x: f64) -> (BigInt, i64) {
    let bits = x.to_bits();
    let sign = if bits >> 63 == 0 { 1i64 } else { -1 };
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & 0x000f_ffff_ffff_ffff;
    let (m, e) = if exp == 0 {
        (frac, -1074)
    } else {
        (frac | 0x0010_0000_0000_0000, exp - 1075)
    };
    (BigInt::from(sign) * BigInt::from(m), e)
}

/// `f64` as `mantissa * 2^exponent` with an exact integer mantissa.
pub(crate) fn decompose_f64(x: f64) -> (BigInt, i64) {
    decompose(x)
}

impl Add for &Fixed {
    type Output = Fixed;
    fn add(self, rhs: &Fixed) -> Fixed {
        let bits = self.frac_bits.max(rhs.frac_bits);
        Fixed::from_parts(self.rescale(bits).mant + rhs.rescale(bits).mant, bits)
    }
}

impl Sub for &Fixed {
    type Output = Fixed;
    fn sub(self, rhs: &Fixed) -> Fixed {
        let bits = self.frac_bits.max(rhs.frac_bits);
        Fixed::from_parts(self.rescale(bits).mant - rhs.rescale(bits).mant, bits)
    }
}

impl Neg for &Fixed {
    type Output = Fixed;
    fn neg(self) -> Fixed {
        Fixed::from_parts(-&self.mant, self.frac_bits)
    }
}

fn guard_for(bits: u32) -> u32 {
    32 + (32 - bits.leading_zeros())
}

/// atanh(a/b) for 0 < a < b, to `frac_bits` fractional bits.
pub fn atanh_ratio(a: u64, b: u64, frac_bits: u32) -> Fixed {
    assert!(a > 0 && a < b, "atanh_ratio needs 0 < a < b");
    let g = guard_for(frac_bits);
    let work = frac_bits + g;
    let mut power: BigInt = (BigInt::one() << work) * a / b;
    let mut sum = power.clone();
    let mut j: u64 = 1;
    loop {
        power = power * a * a / b / b;
        if power.is_zero() {
            break;
        }
        sum += &power / (2 * j + 1);
        j += 1;
    }
    Fixed::from_parts(sum, work).round_to(frac_bits)
}

/// atan(1/k) for integer k > 1.
fn atan_recip(k: u64, work: u32) -> BigInt {
    let mut power: BigInt = (BigInt::one() << work) / k;
    let mut sum = power.clone();
    let k2 = k * k;
    let mut j: u64 = 1;
    loop {
        power /= k2;
        if power.is_zero() {
            break;
        }
        let term = &power / (2 * j + 1);
        if j % 2 == 1 {
            sum -= term;
        } else {
            sum += term;
        }
        j += 1;
    }
    sum
}

/// π via Machin's formula.
pub fn pi(frac_bits: u32) -> Fixed {
    let work = frac_bits + guard_for(frac_bits);
    let v = atan_recip(5, work) * 16u32 - atan_recip(239, work) * 4u32;
    Fixed::from_parts(v, work).round_to(frac_bits)
}

pub fn two_pi(frac_bits: u32) -> Fixed {
    pi(frac_bits + 2).shl(1).round_to(frac_bits)
}

pub fn ln2(frac_bits: u32) -> Fixed {
    atanh_ratio(1, 3, frac_bits + 1).shl(1).round_to(frac_bits)
}

/// ln n for 1 ≤ n < 2^62.
pub fn ln_u64(n: u64, frac_bits: u32) -> Fixed {
    assert!((1..(1u64 << 62)).contains(&n), "ln_u64 argument out of range");
    let k = 63 - n.leading_zeros();
    let base = 1u64 << k;
    let g = guard_for(frac_bits);
    let work = frac_bits + g;
    let mut acc = ln2(work).mul_u64(k as u64);
    if n != base {
        acc = &acc + &atanh_ratio(n - base, n + base, work).shl(1);
    }
    acc.round_to(frac_bits)
}

/// e^x for finite non-negative `x`, with `frac_bits` fractional bits of
/// absolute precision.
pub fn exp_f64(x: f64, frac_bits: u32) -> Fixed {
    assert!(x.is_finite() && x >= 0.0, "exp_f64 needs finite x >= 0");
    let ln2_f = std::f64::consts::LN_2;
    let k = (x / ln2_f).floor() as i64;
    let int_bits = (k.max(0) as u32) + 2;
    // relative precision needed for `frac_bits` absolute bits
    let rel = frac_bits + int_bits + guard_for(frac_bits + int_bits);
    let halvings: u32 = 32;
    let work = rel + halvings + 16;

    let xf = Fixed::from_f64(x, work);
    let r = &xf - &ln2(work + 16).mul_u64(k.max(0) as u64).rescale(work);
    // y = r / 2^halvings, kept exact by widening the fractional part
    let work = work + halvings;
    let y = Fixed::from_parts(r.mant, work);

    let one = Fixed::from_integer(1, work);
    let mut term = one.clone();
    let mut sum = one;
    let mut n: u64 = 1;
    loop {
        term = term.mul(&y, work).div_u64(n);
        if term.is_zero() {
            break;
        }
        sum = &sum + &term;
        n += 1;
    }
    for _ in 0..halvings {
        sum = sum.mul(&sum, work);
    }
    // multiply by 2^k
    let scaled = if k >= 0 {
        Fixed::from_parts(sum.mant, work).shl(k as u32)
    } else {
        Fixed::from_parts(sum.mant >> (-k) as u32, work)
    };
    scaled.round_to(frac_bits)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_match_f64() {
        assert!((pi(200).to_f64() - std::f64::consts::PI).abs() < 1e-16);
        assert!((two_pi(200).to_f64() - std::f64::consts::TAU).abs() < 1e-15);
        assert!((ln2(200).to_f64() - std::f64::consts::LN_2).abs() < 1e-16);
        assert!((ln_u64(10, 200).to_f64() - 10f64.ln()).abs() < 1e-15);
        assert!((exp_f64(2.0, 200).to_f64() - 2f64.exp()).abs() < 1e-14);
        assert!((exp_f64(0.0, 100).to_f64() - 1.0).abs() < 1e-30);
    }

    #[test]
    fn from_f64_is_exact_for_dyadics() {
        let f = Fixed::from_f64(1.375, 10);
        assert_eq!(f.mantissa(), &BigInt::from(1408));
        let g = Fixed::from_f64(-0.75, 4);
        assert_eq!(g.mantissa(), &BigInt::from(-12));
        assert_eq!(g.to_f64(), -0.75);
    }

    #[test]
    fn rescale_floors_negative_values() {
        let f = Fixed::from_parts(BigInt::from(-3), 1); // -1.5
        assert_eq!(f.rescale(0).mantissa(), &BigInt::from(-2));
    }

    #[test]
    fn ln_is_additive() {
        let bits = 300;
        let lhs = ln_u64(6, bits);
        let rhs = &ln_u64(2, bits) + &ln_u64(3, bits);
        assert!(lhs.ulp_distance(&rhs) <= BigInt::from(2));
    }

    #[test]
    fn exp_of_ln_round_trips() {
        let e = exp_f64(1.0, 256);
        let e_known = std::f64::consts::E;
        assert!((e.to_f64() - e_known).abs() < 1e-15);
        // e^100 has 145 integer bits
        assert_eq!(exp_f64(100.0, 64).integer_bits(), 145);
    }

    #[test]
    fn mantissa_exponent_round_trip() {
        let f = ln_u64(7, 130);
        let (s, bytes, e) = f.to_mantissa_exponent();
        assert_eq!(Fixed::from_mantissa_exponent(s, &bytes, e), f);
    }
}
