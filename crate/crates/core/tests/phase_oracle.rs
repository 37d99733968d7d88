mod common;

use common::{circle_distance, reference_phase};
use disorder_lab::phases::make_phase_context;
use disorder_lab::primes::{PrimeTable, SieveOptions};
use disorder_lab::rng::rng_for;
use rand::Rng;

fn table_for(bits: u32) -> PrimeTable {
    PrimeTable::sieve(
        10_000,
        &SieveOptions {
            log_bits: bits,
            ..SieveOptions::default()
        },
    )
    .unwrap()
}

#[test]
fn matches_quadruple_precision_reference() {
    let mut rng = rng_for(11, "tests.phase_oracle", 0);
    let mut worst = 0.0f64;
    for case in 0..200 {
        let n = rng.random_range(2.0..2000.0f64);
        let lambda = rng.random_range(0.1..1.0f64);
        let ctx = make_phase_context(n, lambda, 64).unwrap();
        let table = table_for(ctx.precision_bits());
        let i = rng.random_range(0..table.len());
        let u = rng.random_range(1.0..2.0f64);
        let got = ctx.reduce_phase(u, table.log(i)).unwrap();
        let want = reference_phase(u, ctx.exponent(), table.primes()[i], 4 * ctx.precision_bits() as usize);
        let d = circle_distance(got, want);
        assert!(
            d < 1e-12,
            "case {case}: N = {n}, lambda = {lambda}, p = {}, {got} vs {want}",
            table.primes()[i]
        );
        worst = worst.max(d);
    }
    eprintln!("worst phase deviation {worst:e}");
}

#[test]
fn doubling_u_doubles_the_phase() {
    let ctx = make_phase_context(1500.0, 1.0, 64).unwrap();
    let table = table_for(ctx.precision_bits());
    for i in [0, 10, 500] {
        let a = ctx.reduce_phase(1.0, table.log(i)).unwrap();
        let b = ctx.reduce_phase(2.0, table.log(i)).unwrap();
        assert!(circle_distance(b, 2.0 * a) < 1e-12);
    }
}

#[test]
fn phase_of_a_product_is_the_sum_of_phases() {
    let ctx = make_phase_context(800.0, 1.0, 64).unwrap();
    let table = table_for(ctx.precision_bits());
    // log 6 = log 2 + log 3 evaluated through the reference on 6 directly.
    let u = 1.37;
    let sum = ctx.reduce_phase(u, table.log(0)).unwrap() + ctx.reduce_phase(u, table.log(1)).unwrap();
    let want = reference_phase(u, ctx.exponent(), 6, 4 * ctx.precision_bits() as usize);
    assert!(circle_distance(sum, want) < 1e-12);
}

#[test]
fn reference_agrees_with_plain_floats_at_small_scale() {
    // e^2 · ln 7 · 1.25 is small enough for f64 to be accurate to ~1e-15.
    let direct = (1.25 * 2f64.exp() * 7f64.ln()).rem_euclid(std::f64::consts::TAU);
    assert!(circle_distance(reference_phase(1.25, 2.0, 7, 200), direct) < 1e-13);
    // At e^{40} the float product has lost every digit of the phase.
    let naive = (1.25 * 40f64.exp() * 7f64.ln()).rem_euclid(std::f64::consts::TAU);
    assert!(circle_distance(reference_phase(1.25, 40.0, 7, 400), naive) > 1e-6);
}
