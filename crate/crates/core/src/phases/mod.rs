//! Reduction of the phases `u · e^{N^λ} · log p` modulo 2π.
//!
//! For desk-scale parameters e^{N^λ} has hundreds to thousands of bits, so
//! the phase of `p^{-iu e^{N^λ}}` is only meaningful if the product is formed
//! exactly enough that the residue mod 2π survives. A [`PhaseContext`] holds
//! e^{N^λ} and 2π as fixed-point numbers with
//! `precision_bits = bitlen(e^{N^λ}) + guard_bits` fractional bits; the
//! absolute error of a reduced phase is then about `2^{3 - guard_bits}`.
//!
//! `u` enters as an `f64`, i.e. as an exact dyadic rational, so `u · e^{N^λ}`
//! is formed without rounding.

pub mod fixed;

pub use fixed::Fixed;

use crate::error::{LabError, Result};
use num_bigint::BigInt;
use num_integer::Integer;

pub const DEFAULT_GUARD_BITS: u32 = 64;
/// Largest admissible N^λ.
pub const DEFAULT_EXPONENT_CAP: f64 = 4000.0;

#[derive(Clone, Debug)]
pub struct PhaseContext {
    n: f64,
    lambda: f64,
    exponent: f64,
    big_scale: Fixed,
    precision_bits: u32,
    guard_bits: u32,
    two_pi: Fixed,
}

/// Number of bits in the integer part of e^x.
pub fn exp_bit_length(x: f64) -> u32 {
    (x / std::f64::consts::LN_2).floor() as u32 + 1
}

/// Build a context for `(N, λ)` with the default exponent cap.
pub fn make_phase_context(n: f64, lambda: f64, guard_bits: u32) -> Result<PhaseContext> {
    PhaseContext::new(n, lambda, guard_bits, DEFAULT_EXPONENT_CAP)
}

impl PhaseContext {
    pub fn new(n: f64, lambda: f64, guard_bits: u32, exponent_cap: f64) -> Result<Self> {
        if !(n > 1.0) || !n.is_finite() {
            return Err(LabError::Domain(format!("N must be > 1, got {n}")));
        }
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(LabError::Domain(format!("lambda must be > 0, got {lambda}")));
        }
        let exponent = n.powf(lambda);
        if exponent > exponent_cap {
            return Err(LabError::capacity(
                format!("N^lambda = {exponent} exceeds the phase exponent cap"),
                exponent_cap,
            ));
        }
        let precision_bits = exp_bit_length(exponent) + guard_bits;
        let big_scale = fixed::exp_f64(exponent, precision_bits);
        Ok(PhaseContext {
            n,
            lambda,
            exponent,
            big_scale,
            precision_bits,
            guard_bits,
            two_pi: fixed::two_pi(precision_bits),
        })
    }

    /// A context around an arbitrary scale, for synthetic checks. `N` and `λ`
    /// are left undefined (NaN).
    pub fn from_scale(scale: &Fixed, guard_bits: u32) -> Self {
        let precision_bits = scale.integer_bits() as u32 + 1 + guard_bits;
        PhaseContext {
            n: f64::NAN,
            lambda: f64::NAN,
            exponent: f64::NAN,
            big_scale: scale.round_to(precision_bits),
            precision_bits,
            guard_bits,
            two_pi: fixed::two_pi(precision_bits),
        }
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// N^λ as used for the scale (the `f64` value; e^{that} is then exact to
    /// the context precision).
    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn big_scale(&self) -> &Fixed {
        &self.big_scale
    }

    pub fn precision_bits(&self) -> u32 {
        self.precision_bits
    }

    pub fn guard_bits(&self) -> u32 {
        self.guard_bits
    }

    pub fn two_pi(&self) -> &Fixed {
        &self.two_pi
    }

    pub fn matches(&self, n: f64, lambda: f64) -> bool {
        self.n == n && self.lambda == lambda
    }

    /// Exact product `e^{N^λ} · log p`, reusable across many `u`.
    pub fn scaled_log(&self, logp: &Fixed) -> Result<ScaledLog> {
        if logp.frac_bits() < self.precision_bits {
            return Err(LabError::Precision {
                have: logp.frac_bits(),
                need: self.precision_bits,
            });
        }
        if !logp.is_positive() {
            return Err(LabError::Domain("log p must be positive".into()));
        }
        let l = logp.rescale(self.precision_bits);
        Ok(ScaledLog {
            product: self.big_scale.mantissa() * l.mantissa(),
        })
    }

    /// `(u · e^{N^λ} · log p) mod 2π` in `[0, 2π)`.
    pub fn reduce_phase(&self, u: f64, logp: &Fixed) -> Result<f64> {
        check_u(u)?;
        Ok(self.scaled_log(logp)?.reduce_at(self, u))
    }

    /// `value mod 2π` in `[0, 2π)` for any signed fixed-point value.
    pub fn reduce_mod_two_pi(&self, value: &Fixed) -> f64 {
        let v = value.rescale(self.precision_bits);
        self.residue_to_f64(v.mantissa())
    }

    fn residue_to_f64(&self, mant_at_precision: &BigInt) -> f64 {
        let r = mant_at_precision.mod_floor(self.two_pi.mantissa());
        let x = Fixed::from_parts(r, self.precision_bits).to_f64();
        if x >= std::f64::consts::TAU {
            x - std::f64::consts::TAU
        } else {
            x
        }
    }
}

fn check_u(u: f64) -> Result<()> {
    if !(1.0..=2.0).contains(&u) {
        return Err(LabError::Domain(format!("u must lie in [1, 2], got {u}")));
    }
    Ok(())
}

/// `e^{N^λ} · log p` held exactly with `2 · precision_bits` fractional bits.
#[derive(Clone, Debug)]
pub struct ScaledLog {
    product: BigInt,
}

impl ScaledLog {
    /// Phase at `u`. Bit-identical to [`PhaseContext::reduce_phase`].
    pub fn reduce_at(&self, ctx: &PhaseContext, u: f64) -> f64 {
        let (um, ue) = fixed::decompose_f64(u);
        // product * um has 2F - ue fractional bits; bring it to F.
        let full = &self.product * um;
        let shift = ctx.precision_bits as i64 - ue;
        let at_f = if shift >= 0 {
            full >> shift as u64
        } else {
            full << (-shift) as u64
        };
        ctx.residue_to_f64(&at_f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    #[test]
    fn context_for_n100_has_expected_precision() {
        let ctx = make_phase_context(100.0, 1.0, 64).unwrap();
        assert_eq!(ctx.big_scale().integer_bits(), 145);
        assert!(ctx.precision_bits() >= 209);
    }

    #[test]
    fn context_for_n2_is_e_squared() {
        let ctx = make_phase_context(2.0, 1.0, 64).unwrap();
        assert!((ctx.big_scale().to_f64() - 7.389_056_098_930_65).abs() < 1e-12);
    }

    #[test]
    fn context_for_n2000_precision() {
        let ctx = make_phase_context(2000.0, 1.0, 64).unwrap();
        let need = (2000.0 / std::f64::consts::LN_2 + 64.0).floor() as u32;
        assert!(ctx.precision_bits() >= need, "{}", ctx.precision_bits());
        assert!(ctx.precision_bits() >= 2950);
    }

    #[test]
    fn exponent_cap_is_enforced() {
        let err = make_phase_context(5000.0, 1.0, 64).unwrap_err();
        assert!(matches!(err, LabError::Capacity { .. }), "{err}");
        assert!(err.to_string().contains("4000"));
        assert!(make_phase_context(1.0, 1.0, 64).is_err());
        assert!(make_phase_context(10.0, 0.0, 64).is_err());
    }

    #[test]
    fn constructed_residue_is_recovered() {
        let one = Fixed::from_integer(1, 8);
        let ctx = PhaseContext::from_scale(&one, 200);
        let big = ctx.two_pi().mantissa() * BigInt::from(10u128.pow(30));
        let value = Fixed::from_parts(big + (BigInt::from(1) << ctx.precision_bits()), ctx.precision_bits());
        let phase = ctx.reduce_phase(1.0, &value).unwrap();
        assert!((phase - 1.0).abs() < 1e-9, "{phase}");
    }

    #[test]
    fn no_reduction_needed_for_small_product() {
        let one = Fixed::from_integer(1, 8);
        let ctx = PhaseContext::from_scale(&one, 128);
        let l2 = fixed::ln2(ctx.precision_bits());
        let phase = ctx.reduce_phase(1.0, &l2).unwrap();
        assert!((phase - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn insufficient_log_precision_is_rejected() {
        let ctx = make_phase_context(100.0, 1.0, 64).unwrap();
        let l2 = fixed::ln2(100);
        assert!(matches!(
            ctx.reduce_phase(1.5, &l2),
            Err(LabError::Precision { have: 100, .. })
        ));
        let l2 = fixed::ln2(ctx.precision_bits());
        assert!(ctx.reduce_phase(2.5, &l2).is_err());
        assert!(ctx.reduce_phase(0.5, &l2).is_err());
    }

    #[test]
    fn negated_product_gives_complementary_residue() {
        let ctx = make_phase_context(300.0, 1.0, 64).unwrap();
        let l = fixed::ln_u64(13, ctx.precision_bits());
        let prod = ctx.big_scale().mul(&l, ctx.precision_bits());
        let a = ctx.reduce_mod_two_pi(&prod);
        let b = ctx.reduce_mod_two_pi(&-&prod);
        let s = (a + b) % TAU;
        assert!(s.min(TAU - s) < 1e-12, "{a} {b}");
    }

    #[test]
    fn scaled_log_path_is_bit_identical() {
        let ctx = make_phase_context(50.0, 1.0, 64).unwrap();
        let l = fixed::ln_u64(101, ctx.precision_bits());
        let s = ctx.scaled_log(&l).unwrap();
        for &u in &[1.0, 1.25, 1.000_123, 1.999_999_9, 2.0] {
            assert_eq!(s.reduce_at(&ctx, u), ctx.reduce_phase(u, &l).unwrap());
        }
    }
}
