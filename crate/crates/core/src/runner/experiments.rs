//! The experiment registry. Each experiment declares its parameter schema and
//! turns validated parameters into report records.

use super::config::{ParamDefault as D, ParamKind as K, ParamSpec as P, Params};
use super::report::Record;
use crate::dirichlet::{
    midpoint_grid, multi_scale_samples, random_grid, residual_moment, write_samples_csv, MultiScaleSamples,
};
use crate::disorder::{rect_prob, sample_disorder, DisorderParams, MomentSpec, Rectangle, NORMAL_SAMPLER};
use crate::error::{LabError, Result};
use crate::moments::{
    diagonal_exact, diagonal_from_power_sums, empirical_joint_moment, finite_n_target, holder_check, indicator_prob,
    offdiag_bound_check, HolderBlock, SampleMode,
};
use crate::primes::{sieve_upto, DEFAULT_SIEVE_CAP};
use crate::rmt::{
    counting_stat, dpp_count_variance, log_char_poly, sample_cue, wieand_covariance, write_angles_csv,
    EigenangleSample, IntervalPair, BURN_IN_SWEEPS_PER_N, CHAIN_SAMPLES, THINNING_SWEEPS_PER_N,
};
use crate::rng::{rng_for, SAMPLER_RNG};
use crate::stats::{complex_mean_se, correlation, mean_se, variance_se};
use crate::zeta::{log_abs_zeta, log_zeta_det, zero_count_scan, ZeroScan};
use num_complex::Complex64;
use rand::Rng;
use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::fs::File;
use std::io::BufWriter;

/// Mertens' constant M in Σ_{p≤x} 1/p = log log x + M + o(1).
pub const MERTENS_CONSTANT: f64 = 0.261_497_212_847_642_8;

/// State shared by an experiment and the runner.
#[derive(Clone, Debug, Default)]
pub struct RunContext {
    pub seed: u64,
    pub phase_guard_bits: u32,
    pub warnings: Vec<String>,
    pub sampler: BTreeMap<String, String>,
}

impl RunContext {
    pub fn new(seed: u64, phase_guard_bits: u32) -> Self {
        let mut sampler = BTreeMap::new();
        sampler.insert("rng".to_string(), SAMPLER_RNG.to_string());
        RunContext {
            seed,
            phase_guard_bits,
            warnings: Vec::new(),
            sampler,
        }
    }

    fn note(&mut self, key: &str, value: impl ToString) {
        self.sampler.insert(key.to_string(), value.to_string());
    }
}

type RunFn = fn(&Params, &mut RunContext) -> Result<Vec<Record>>;

pub struct Experiment {
    pub name: &'static str,
    pub summary: &'static str,
    pub schema: &'static [P],
    run: RunFn,
}

impl Experiment {
    pub fn run(&self, params: &Params, ctx: &mut RunContext) -> Result<Vec<Record>> {
        (self.run)(params, ctx)
    }
}

const QUADRANT: [f64; 4] = [f64::NEG_INFINITY, 0.0, f64::NEG_INFINITY, 0.0];
const HALF_PLANE: [f64; 2] = [-FRAC_PI_2, FRAC_PI_2];
// Shared left endpoint, disjoint, and the same interval reversed.
const WIEAND_PAIRS: [f64; 12] = [
    -FRAC_PI_2,
    -FRAC_PI_2 + 0.3,
    -FRAC_PI_2,
    FRAC_PI_2,
    -2.5,
    -2.0,
    1.0,
    1.5,
    -FRAC_PI_2,
    FRAC_PI_2,
    FRAC_PI_2,
    -FRAC_PI_2,
];

static REGISTRY: [Experiment; 11] = [
    Experiment {
        name: "gauss-oracle",
        summary: "moments and MGF of the complex Gaussian limit, by Monte Carlo",
        schema: &[
            P::new("samples", K::Int, D::Int(1_000_000), "number of draws"),
            P::new("sigma2", K::Real, D::Real(0.5), "variance of each component"),
            P::new(
                "alpha",
                K::Reals,
                D::Reals(&[0.5, 0.0]),
                "MGF argument alpha as [re, im]",
            ),
            P::new("beta", K::Reals, D::Reals(&[0.5, 0.0]), "MGF argument beta as [re, im]"),
        ],
        run: gauss_oracle,
    },
    Experiment {
        name: "diagonal",
        summary: "diagonal prime-tuple sums by enumeration against closed forms",
        schema: &[
            P::new("cutoff", K::Real, D::Real(1e4), "prime cutoff"),
            P::new("n", K::Int, D::Int(2), "tuple length"),
            P::new(
                "ratio_range",
                K::Reals,
                D::Reals(&[0.95, 1.0]),
                "admissible exact/asymptotic ratio",
            ),
        ],
        run: diagonal,
    },
    Experiment {
        name: "prime-sum-clt",
        summary: "joint moments of normalized prime sums at several scales",
        schema: &[
            P::new("n_big", K::Real, D::Required, "N"),
            P::new("lambdas", K::Reals, D::Required, "scales, strictly decreasing"),
            P::new("grid", K::Int, D::Int(4096), "number of u-points"),
            P::new("mode", K::Text, D::Text("grid"), "grid (midpoints) or random"),
            P::new(
                "sieve_cap",
                K::Real,
                D::Real(DEFAULT_SIEVE_CAP as f64),
                "largest admissible prime cutoff",
            ),
            P::new(
                "dump",
                K::Text,
                D::Absent,
                "optional CSV path for the exponent-1 samples",
            ),
        ],
        run: prime_sum_clt,
    },
    Experiment {
        name: "zeta-clt",
        summary: "variance of Re and Im log zeta on the critical line",
        schema: &[
            P::new("t_re", K::Real, D::Real(1e6), "height T for the real part"),
            P::new("t_im", K::Real, D::Real(1e5), "height T for the imaginary part"),
            P::new("samples", K::Int, D::Int(4000), "draws of t in [T, 2T]"),
            P::new("density", K::Real, D::Real(4.0), "zero-scan points per mean spacing"),
            P::new("re_tolerance", K::Real, D::Real(0.25), "relative tolerance on Var Re"),
            P::new("im_tolerance", K::Real, D::Real(0.30), "relative tolerance on Var Im"),
        ],
        run: zeta_clt,
    },
    Experiment {
        name: "residual",
        summary: "moments of log zeta minus its Dirichlet polynomial",
        schema: &[
            P::new("t", K::Real, D::Real(1e5), "height T"),
            P::new("n", K::Int, D::Int(1), "moment order"),
            P::new(
                "cutoffs",
                K::Reals,
                D::Reals(&[1e2, 1e3, 1e4]),
                "polynomial lengths x, increasing",
            ),
            P::new("samples", K::Int, D::Int(4000), "draws of t in [T, 2T]"),
            P::new("density", K::Real, D::Real(4.0), "zero-scan points per mean spacing"),
        ],
        run: residual,
    },
    Experiment {
        name: "indicator",
        summary: "rectangle probabilities for disorder samples and prime sums",
        schema: &[
            P::new("lambdas", K::Reals, D::Reals(&[1.0, 0.6]), "scales"),
            P::new("samples", K::Int, D::Int(100_000), "disorder draws"),
            P::new(
                "rect",
                K::Reals,
                D::Reals(&QUADRANT),
                "rectangle [re_lo, re_hi, im_lo, im_hi]",
            ),
            P::new(
                "factor_tolerance",
                K::Real,
                D::Real(0.03),
                "tolerance on joint − product",
            ),
            P::new(
                "n_big",
                K::Real,
                D::Absent,
                "N for the prime-sum part (skipped when absent)",
            ),
            P::new(
                "grid",
                K::Int,
                D::Int(4096),
                "number of u-points for the prime-sum part",
            ),
        ],
        run: indicator,
    },
    Experiment {
        name: "wieand",
        summary: "CUE counting-function variance and covariances",
        schema: &[
            P::new("n", K::Int, D::Int(256), "matrix dimension"),
            P::new("samples", K::Int, D::Int(8000), "Metropolis samples"),
            P::new(
                "interval",
                K::Reals,
                D::Reals(&HALF_PLANE),
                "interval (s, t] for the variance",
            ),
            P::new(
                "pairs",
                K::Reals,
                D::Reals(&WIEAND_PAIRS),
                "interval pairs, four numbers each",
            ),
            P::new("dump", K::Text, D::Absent, "optional CSV path for the eigenangles"),
        ],
        run: wieand,
    },
    Experiment {
        name: "hko",
        summary: "normalization of Re log of the CUE characteristic polynomial",
        schema: &[
            P::new("n", K::Int, D::Int(256), "matrix dimension"),
            P::new("samples", K::Int, D::Int(8000), "Metropolis samples"),
            P::new("thetas", K::Reals, D::Reals(&[0.0, 1.0]), "two evaluation angles"),
        ],
        run: hko,
    },
    Experiment {
        name: "offdiag",
        summary: "exhaustive check of |log(m/n)| > 1/(2 min(m, n))",
        schema: &[P::new("max_int", K::Int, D::Int(10_000), "largest integer")],
        run: offdiag,
    },
    Experiment {
        name: "holder",
        summary: "randomized Hölder-step instances",
        schema: &[
            P::new("instances", K::Int, D::Int(100), "random instances"),
            P::new("len", K::Int, D::Int(64), "sequence length"),
            P::new("max_k", K::Int, D::Int(3), "largest number of scales"),
        ],
        run: holder,
    },
    Experiment {
        name: "mertens",
        summary: "sum of 1/p over primes up to x",
        schema: &[P::new("x", K::Real, D::Required, "cutoff")],
        run: mertens,
    },
];

pub fn registry() -> &'static [Experiment] {
    &REGISTRY
}

pub fn find(name: &str) -> Option<&'static Experiment> {
    REGISTRY.iter().find(|e| e.name == name)
}

/// Records for a complex estimate: z is |value − target| / SE; the real part
/// is the estimate and the imaginary part is reported alongside.
pub fn complex_records(label: &str, value: Complex64, std_error: f64, target: f64) -> [Record; 2] {
    let dev = (value - target).norm();
    let z = if dev == 0.0 { 0.0 } else { dev / std_error };
    let main = Record {
        label: label.to_string(),
        estimate: value.re,
        std_error,
        target,
        z_score: z,
        pass: z <= super::report::Z_THRESHOLD,
        tolerance: None,
    };
    [main, Record::info(format!("{label}.im"), value.im)]
}

fn relative_within(label: &str, estimate: f64, std_error: f64, target: f64, rel: f64) -> Record {
    Record::within(label, estimate, std_error, target, rel * target.abs())
}

fn complex_param(params: &Params, name: &str) -> Result<Complex64> {
    match params.reals(name)?.as_slice() {
        [re] => Ok(Complex64::new(*re, 0.0)),
        [re, im] => Ok(Complex64::new(*re, *im)),
        _ => Err(LabError::schema(name, "expected [re] or [re, im]")),
    }
}

fn gauss_oracle(params: &Params, ctx: &mut RunContext) -> Result<Vec<Record>> {
    let count = params.count("samples")?;
    let sigma2 = params.real("sigma2")?;
    if !(sigma2 > 0.0) {
        return Err(LabError::schema("sigma2", "must be positive"));
    }
    let alpha = complex_param(params, "alpha")?;
    let beta = complex_param(params, "beta")?;
    ctx.note("normal", NORMAL_SAMPLER);
    let draws = sample_disorder(&[2.0 * sigma2], count, ctx.seed)?;
    let zs = &draws.columns[0];
    let moment = |f: &dyn Fn(Complex64) -> Complex64| {
        let v: Vec<Complex64> = zs.iter().map(|&z| f(z)).collect();
        complex_mean_se(&v)
    };
    let mut out = Vec::new();
    let (v, se) = moment(&|z| z * z.conj());
    out.push(Record::within("E[Z conj Z]", v.re, se, 2.0 * sigma2, 0.01));
    let (v, se) = moment(&|z| z * z);
    out.push(Record::within("|E[Z^2]|", v.norm(), se, 0.0, 0.01));
    let (v, se) = moment(&|z| z * z * (z * z).conj());
    out.push(Record::within("E[Z^2 conj Z^2]", v.re, se, 8.0 * sigma2 * sigma2, 0.05));
    let check = crate::disorder::mgf_check(alpha, beta, sigma2, count, ctx.seed)?;
    out.extend(complex_records("mgf", check.empirical, check.std_error, check.exact.re));
    if check.exact.im != 0.0 {
        out.push(Record::info("mgf.exact.im", check.exact.im));
    }
    Ok(out)
}

fn diagonal(params: &Params, _ctx: &mut RunContext) -> Result<Vec<Record>> {
    let cutoff = params.real("cutoff")?;
    let n = params.count("n")? as u32;
    let range = params.reals("ratio_range")?;
    let [lo, hi] = range[..] else {
        return Err(LabError::schema("ratio_range", "expected [lo, hi]"));
    };
    let table = sieve_upto(cutoff.max(2.0) as u64)?;
    let d = diagonal_exact(&table, cutoff, n)?;
    let closed = diagonal_from_power_sums(&table, cutoff, n)?;
    Ok(vec![
        Record::info("exact", d.exact),
        Record::within("closed form", closed, 0.0, d.exact, 1e-10 * d.exact.abs().max(1.0)),
        Record::info("asymptotic", d.asymptotic),
        Record::in_range("exact/asymptotic", d.ratio, 0.0, lo, hi),
    ])
}

fn sample_grid(params: &Params, ctx: &RunContext) -> Result<(Vec<f64>, SampleMode)> {
    let m = params.count("grid")?;
    match params.text("mode").as_deref().unwrap_or("grid") {
        "grid" => Ok((midpoint_grid(m), SampleMode::Grid)),
        "random" => Ok((random_grid(m, ctx.seed), SampleMode::Random)),
        other => Err(LabError::schema(
            "mode",
            format!("expected grid or random, got {other:?}"),
        )),
    }
}

/// Moment records for prime sums already sampled at every scale.
pub fn prime_sum_records(ms: &MultiScaleSamples, mode: SampleMode) -> Result<Vec<Record>> {
    let k = ms.lambdas.len();
    let mut out = Vec::new();
    let mut moment = |label: String, m: Vec<u32>, n: Vec<u32>| -> Result<()> {
        let spec = MomentSpec::new(ms.lambdas.clone(), m.clone(), n.clone())?;
        let m_side: Vec<Vec<Complex64>> = (0..k).map(|j| ms.column(j, m[j]).to_vec()).collect();
        let n_side: Vec<Vec<Complex64>> = (0..k).map(|j| ms.column(j, n[j]).to_vec()).collect();
        let est = empirical_joint_moment(&m_side, &n_side, &spec, mode)?;
        let target = finite_n_target(&spec, ms.n, &ms.table)?;
        out.extend(complex_records(&label, est.value, est.std_error, target));
        Ok(())
    };
    let unit = |j: usize, e: u32| (0..k).map(|i| if i == j { e } else { 0 }).collect::<Vec<u32>>();
    for j in 0..k {
        let l = ms.lambdas[j];
        for (a, b) in [(1, 1), (2, 2), (1, 0), (2, 0), (2, 1)] {
            if a.max(b) <= ms.max_exponent {
                moment(format!("lambda={l} ({a},{b})"), unit(j, a), unit(j, b))?;
            }
        }
    }
    for i in 0..k {
        for j in (i + 1)..k {
            moment(
                format!("cross lambda={},{} (1,1)", ms.lambdas[i], ms.lambdas[j]),
                unit(i, 1),
                unit(j, 1),
            )?;
        }
    }
    Ok(out)
}

fn prime_sum_clt(params: &Params, ctx: &mut RunContext) -> Result<Vec<Record>> {
    let n_big = params.real("n_big")?;
    let lambdas = params.reals("lambdas")?;
    let (grid, mode) = sample_grid(params, ctx)?;
    let cap = params.real("sieve_cap")?;
    let ms = multi_scale_samples(n_big, &lambdas, 2, &grid, ctx.phase_guard_bits, cap as u64)?;
    ctx.note("u_grid", format!("{mode:?} ({} points)", grid.len()).to_lowercase());
    ctx.note("phase_precision_bits", format!("{:?}", ms.precision_bits));
    let mut out: Vec<Record> = ms
        .lambdas
        .iter()
        .zip(&ms.cutoffs)
        .map(|(l, c)| Record::info(format!("cutoff lambda={l} (exponent 1)"), c[0]))
        .collect();
    if ms.cutoffs.iter().any(|c| c[1] < 2.0) {
        ctx.warnings.push("a scale has an empty prime sum at exponent 2".into());
    }
    out.extend(prime_sum_records(&ms, mode)?);
    if let Ok(path) = params.text("dump") {
        let cols: Vec<(String, Vec<Complex64>)> = (0..ms.lambdas.len())
            .map(|j| (format!("{}", ms.lambdas[j]), ms.column(j, 1).to_vec()))
            .collect();
        write_samples_csv(BufWriter::new(File::create(path)?), &grid, &cols)?;
    }
    Ok(out)
}

fn draw_heights(t: f64, count: usize, seed: u64, stream: &str) -> Vec<f64> {
    let mut rng = rng_for(seed, stream, 0);
    (0..count).map(|_| t * (1.0 + rng.random::<f64>())).collect()
}

fn scan_for(t: f64, density: f64, ctx: &mut RunContext) -> Result<ZeroScan> {
    let scan = zero_count_scan(2.0 * t, density)?;
    ctx.note(
        "zero_scan",
        format!("{} zeros up to {}", scan.zeros().len(), scan.t_max()),
    );
    ctx.warnings.extend(scan.warnings().iter().cloned());
    Ok(scan)
}

fn zeta_clt(params: &Params, ctx: &mut RunContext) -> Result<Vec<Record>> {
    let t_re = params.real("t_re")?;
    let t_im = params.real("t_im")?;
    let count = params.count("samples")?;
    let mut out = Vec::new();

    let heights = draw_heights(t_re, count, ctx.seed, "runner.zeta-clt.re");
    let mut re = Vec::with_capacity(count);
    for &t in &heights {
        match log_abs_zeta(t) {
            Ok(v) => re.push(v),
            Err(LabError::Singularity(_)) => {}
            Err(e) => return Err(e),
        }
    }
    let target = 0.5 * t_re.ln().ln();
    let (m, se) = mean_se(&re);
    out.push(Record::info("mean Re log zeta", m));
    out.push(Record::info("mean Re log zeta.se", se));
    let (v, se) = variance_se(&re);
    out.push(relative_within(
        "Var Re log zeta",
        v,
        se,
        target,
        params.real("re_tolerance")?,
    ));

    let scan = scan_for(t_im, params.real("density")?, ctx)?;
    let heights = draw_heights(t_im, count, ctx.seed, "runner.zeta-clt.im");
    let mut im = Vec::with_capacity(count);
    let (mut singular, mut near, mut parity) = (0usize, 0usize, 0usize);
    for &t in &heights {
        match log_zeta_det(t, &scan) {
            Ok(p) => {
                near += (p.flag == crate::zeta::BranchFlag::NearZero) as usize;
                parity += (p.flag == crate::zeta::BranchFlag::ParityMismatch) as usize;
                im.push(p.log_zeta.im);
            }
            Err(LabError::Singularity(_)) => singular += 1,
            Err(e) => return Err(e),
        }
    }
    if singular + near + parity > 0 {
        ctx.warnings.push(format!(
            "log zeta samples: {singular} singular (dropped), {near} near a zero, {parity} parity mismatches"
        ));
    }
    if parity > 0 {
        return Err(LabError::Integrity(format!(
            "{parity} samples disagree with the zero count"
        )));
    }
    let target = 0.5 * t_im.ln().ln();
    let (m, _) = mean_se(&im);
    out.push(Record::info("mean Im log zeta", m));
    let (v, se) = variance_se(&im);
    out.push(relative_within(
        "Var Im log zeta",
        v,
        se,
        target,
        params.real("im_tolerance")?,
    ));
    Ok(out)
}

fn residual(params: &Params, ctx: &mut RunContext) -> Result<Vec<Record>> {
    let t = params.real("t")?;
    let n = params.count("n")? as u32;
    let cutoffs = params.reals("cutoffs")?;
    if cutoffs.is_empty() || cutoffs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(LabError::schema("cutoffs", "must be non-empty and increasing"));
    }
    let count = params.count("samples")?;
    let scan = scan_for(t, params.real("density")?, ctx)?;
    let table = sieve_upto(cutoffs[cutoffs.len() - 1].max(2.0) as u64)?;
    let mut out = Vec::new();
    let mut means = Vec::new();
    for &x in &cutoffs {
        let est = residual_moment(
            |s| Ok(log_zeta_det(s, &scan)?.log_zeta),
            &table,
            t,
            x,
            n,
            count,
            ctx.seed,
        )?;
        if est.flagged > 0 {
            ctx.warnings.push(format!(
                "x = {x}: dropped {} sample(s) within 1e-6 of a zero",
                est.flagged
            ));
        }
        out.push(Record::info(format!("residual x={x}"), est.mean));
        out.push(Record::info(format!("residual x={x}.se"), est.std_error));
        means.push(est.mean);
    }
    let decreasing = means.windows(2).all(|w| w[1] < w[0]);
    out.push(Record::flag(
        "residual strictly decreasing in x",
        decreasing as u8 as f64,
        decreasing,
    ));
    Ok(out)
}

fn rect_param(params: &Params) -> Result<Rectangle> {
    match params.reals("rect")?[..] {
        [a, b, c, d] => Rectangle::new(a, b, c, d),
        _ => Err(LabError::schema("rect", "expected [re_lo, re_hi, im_lo, im_hi]")),
    }
}

fn binomial_record(label: &str, hits: f64, target: f64, points: usize) -> Record {
    Record::z_test(label, hits, (target * (1.0 - target) / points as f64).sqrt(), target)
}

/// Joint hit frequency of the first two scales against the product of their
/// marginals.
pub fn factorization_record(label: &str, cols: &[Vec<Complex64>], rect: &Rectangle, tolerance: f64) -> Result<Record> {
    let a = indicator_prob(&cols[..1], &[*rect])?;
    let b = indicator_prob(&cols[1..2], &[*rect])?;
    let joint = indicator_prob(&cols[..2], &[*rect, *rect])?;
    Ok(Record::within(
        label,
        joint.prob - a.prob * b.prob,
        joint.std_error,
        0.0,
        tolerance,
    ))
}

fn indicator(params: &Params, ctx: &mut RunContext) -> Result<Vec<Record>> {
    let lambdas = params.reals("lambdas")?;
    let count = params.count("samples")?;
    let rect = rect_param(params)?;
    let tol = params.real("factor_tolerance")?;
    ctx.note("normal", NORMAL_SAMPLER);
    let draws = sample_disorder(&lambdas, count, ctx.seed)?;
    let mut out = Vec::new();
    for (j, &l) in lambdas.iter().enumerate() {
        let est = indicator_prob(&draws.columns[j..j + 1], &[rect])?;
        let target = rect_prob(&DisorderParams::new(l)?, &rect);
        out.push(binomial_record(
            &format!("disorder lambda={l}"),
            est.prob,
            target,
            est.points,
        ));
    }
    if lambdas.len() >= 2 {
        let target: f64 = lambdas
            .iter()
            .map(|&l| Ok(rect_prob(&DisorderParams::new(l)?, &rect)))
            .product::<Result<f64>>()?;
        let joint = indicator_prob(&draws.columns, &vec![rect; lambdas.len()])?;
        out.push(binomial_record("disorder joint", joint.prob, target, joint.points));
    }
    if params.has("n_big") {
        if lambdas.len() < 2 {
            return Err(LabError::schema("lambdas", "the prime-sum part needs two scales"));
        }
        let grid = midpoint_grid(params.count("grid")?);
        let ms = multi_scale_samples(
            params.real("n_big")?,
            &lambdas,
            1,
            &grid,
            ctx.phase_guard_bits,
            DEFAULT_SIEVE_CAP,
        )?;
        let cols: Vec<Vec<Complex64>> = (0..lambdas.len()).map(|j| ms.column(j, 1).to_vec()).collect();
        out.push(factorization_record("prime-sum joint - product", &cols, &rect, tol)?);
    }
    Ok(out)
}

fn cue_params(params: &Params) -> Result<(usize, usize)> {
    Ok((params.count("n")?, params.count("samples")?))
}

/// Draw CUE samples and record the chain diagnostics.
pub fn cue_samples(n: usize, count: usize, ctx: &mut RunContext) -> Result<Vec<EigenangleSample>> {
    let (samples, info) = sample_cue(n, count, ctx.seed)?;
    ctx.note("cue", "metropolis");
    ctx.note("cue_chains", info.chains);
    ctx.note("cue_chain_samples", CHAIN_SAMPLES);
    ctx.note("cue_burn_in_sweeps", BURN_IN_SWEEPS_PER_N * n);
    ctx.note("cue_thinning_sweeps", THINNING_SWEEPS_PER_N * n);
    ctx.note("cue_acceptance", format!("{:.4}", info.acceptance));
    Ok(samples)
}

fn interval_pairs(raw: &[f64]) -> Result<Vec<IntervalPair>> {
    if raw.is_empty() || raw.len() % 4 != 0 {
        return Err(LabError::schema("pairs", "expected a multiple of four numbers"));
    }
    Ok(raw.chunks(4).map(|c| ((c[0], c[1]), (c[2], c[3]))).collect())
}

fn same_set(a: (f64, f64), b: (f64, f64)) -> bool {
    a == b || (a.0 == b.1 && a.1 == b.0)
}

/// Variance, covariance and identity records for Wieand's statistics.
pub fn wieand_records(
    samples: &[EigenangleSample],
    interval: (f64, f64),
    pairs: &[IntervalPair],
) -> Result<Vec<Record>> {
    let n = samples.first().map_or(0, |s| s.n);
    let (s, t) = interval;
    let counts: Vec<f64> = samples
        .iter()
        .map(|x| Ok(counting_stat(x, s, t)?.raw_count as f64))
        .collect::<Result<_>>()?;
    let (v, se) = variance_se(&counts);
    let mut out = vec![relative_within(
        &format!("Var C({s:.6}, {t:.6}]"),
        v,
        se,
        dpp_count_variance(n, s, t)?,
        0.05,
    )];

    let entries = wieand_covariance(samples, pairs)?;
    for e in &entries {
        let label = format!(
            "cov C~({:.6}, {:.6}] C~({:.6}, {:.6}]",
            e.first.0, e.first.1, e.second.0, e.second.1
        );
        if same_set(e.first, e.second) {
            // Exact identity in every sample: ±Var of the statistic itself.
            let xs: Vec<f64> = samples
                .iter()
                .map(|x| crate::rmt::signed_counting_stat(x, e.first.0, e.first.1))
                .collect::<Result<_>>()?;
            let var = variance_se(&xs).0;
            out.push(Record::within(
                label,
                e.covariance,
                e.std_error,
                e.prediction.signum() * var,
                1e-9 * var,
            ));
        } else {
            let tol = if e.prediction == 0.0 { 0.05 } else { 0.1 };
            out.push(Record::within(label, e.covariance, e.std_error, e.prediction, tol));
        }
    }

    let scale = (n as f64).ln().sqrt();
    let mut worst = 0.0f64;
    for x in samples {
        let c = counting_stat(x, s, t)?.normalized;
        let d = (log_char_poly(x, t)?.im - log_char_poly(x, s)?.im) / scale;
        worst = worst.max((c - d).abs());
    }
    out.push(Record::within(
        "max |C~ - dIm log Z / sqrt(log N)|",
        worst,
        0.0,
        0.0,
        1e-8,
    ));
    Ok(out)
}

fn wieand(params: &Params, ctx: &mut RunContext) -> Result<Vec<Record>> {
    let (n, count) = cue_params(params)?;
    let interval = match params.reals("interval")?[..] {
        [s, t] => (s, t),
        _ => return Err(LabError::schema("interval", "expected [s, t]")),
    };
    let pairs = interval_pairs(&params.reals("pairs")?)?;
    let samples = cue_samples(n, count, ctx)?;
    if let Ok(path) = params.text("dump") {
        write_angles_csv(BufWriter::new(File::create(path)?), &samples)?;
    }
    wieand_records(&samples, interval, &pairs)
}

/// Normalization and decorrelation of Re log Z_U at two angles.
pub fn hko_records(samples: &[EigenangleSample], thetas: (f64, f64)) -> Result<Vec<Record>> {
    let n = samples.first().map_or(0, |s| s.n) as f64;
    let scale = (0.5 * n.ln()).sqrt();
    let values = |theta: f64| -> Result<Vec<Complex64>> {
        samples.iter().map(|x| Ok(log_char_poly(x, theta)? / scale)).collect()
    };
    let a = values(thetas.0)?;
    let b = values(thetas.1)?;
    let re_a: Vec<f64> = a.iter().map(|z| z.re).collect();
    let re_b: Vec<f64> = b.iter().map(|z| z.re).collect();
    let im_a: Vec<f64> = a.iter().map(|z| z.im).collect();
    let mut out = Vec::new();
    for (theta, re) in [(thetas.0, &re_a), (thetas.1, &re_b)] {
        let (v, se) = variance_se(re);
        out.push(Record::in_range(
            format!("Var Re log Z({theta})/sqrt(log N / 2)"),
            v,
            se,
            0.8,
            1.2,
        ));
    }
    out.push(Record::info(
        format!("Var Im log Z({})/sqrt(log N / 2)", thetas.0),
        variance_se(&im_a).0,
    ));
    let r = correlation(&re_a, &re_b);
    let se = (1.0 - r * r) / (samples.len() as f64).sqrt();
    let label = format!("corr Re log Z({}), Re log Z({})", thetas.0, thetas.1);
    out.push(Record::within(label, r, se, 0.0, 0.1));
    Ok(out)
}

fn hko(params: &Params, ctx: &mut RunContext) -> Result<Vec<Record>> {
    let (n, count) = cue_params(params)?;
    let thetas = match params.reals("thetas")?[..] {
        [a, b] => (a, b),
        _ => return Err(LabError::schema("thetas", "expected two angles")),
    };
    let samples = cue_samples(n, count, ctx)?;
    hko_records(&samples, thetas)
}

fn offdiag(params: &Params, _ctx: &mut RunContext) -> Result<Vec<Record>> {
    let max_int = params.count("max_int")? as u64;
    let c = offdiag_bound_check(max_int)?;
    Ok(vec![
        Record::flag("bound holds for all pairs", c.pairs_checked as f64, c.holds),
        Record::info(format!("worst slack at ({}, {})", c.worst_m, c.worst_n), c.worst_slack),
        Record::info("worst |log(m/n)| * 2 min(m, n)", c.worst_ratio),
    ])
}

fn conjugate_pair<R: Rng>(rng: &mut R) -> (f64, f64) {
    if rng.random::<f64>() < 0.1 {
        return if rng.random::<bool>() {
            (f64::INFINITY, 1.0)
        } else {
            (1.0, f64::INFINITY)
        };
    }
    let r = 1.0 + 4.0 * rng.random::<f64>() + 1e-3;
    (r, r / (r - 1.0))
}

/// The i-th random Hölder instance.
pub fn holder_instance(seed: u64, i: u64, len: usize, max_k: usize) -> Vec<HolderBlock> {
    let mut rng = rng_for(seed, "runner.holder", i);
    let k = rng.random_range(1..=max_k);
    (0..k)
        .map(|_| {
            let mut seq = || (0..len).map(|_| rng.random::<f64>() * 2.0 + 1e-3).collect::<Vec<f64>>();
            let (a, b, c, d) = (seq(), seq(), seq(), seq());
            let (r, s) = conjugate_pair(&mut rng);
            let (t, u) = conjugate_pair(&mut rng);
            HolderBlock { a, b, c, d, r, s, t, u }
        })
        .collect()
}

fn holder(params: &Params, ctx: &mut RunContext) -> Result<Vec<Record>> {
    let instances = params.count("instances")?;
    let len = params.count("len")?;
    let max_k = params.count("max_k")?;
    let mut violations = 0usize;
    let mut tightest = f64::INFINITY;
    for i in 0..instances {
        let (lhs, rhs) = holder_check(&holder_instance(ctx.seed, i as u64, len, max_k))?;
        if lhs > rhs * (1.0 + 1e-12) {
            violations += 1;
        }
        tightest = tightest.min(rhs / lhs);
    }
    // Constant sequences turn every norm into the constant itself.
    let constant: Vec<HolderBlock> = (0..max_k)
        .map(|j| {
            let v = |x: f64| vec![x + j as f64; len];
            HolderBlock {
                a: v(0.5),
                b: v(1.5),
                c: v(2.0),
                d: v(0.75),
                r: 3.0,
                s: 1.5,
                t: f64::INFINITY,
                u: 1.0,
            }
        })
        .collect();
    let (lhs, rhs) = holder_check(&constant)?;
    Ok(vec![
        Record::flag("lhs <= rhs in every instance", violations as f64, violations == 0),
        Record::info("smallest rhs/lhs", tightest),
        Record::within("constant case (rhs - lhs)/lhs", (rhs - lhs) / lhs, 0.0, 0.0, 1e-12),
    ])
}

fn mertens(params: &Params, _ctx: &mut RunContext) -> Result<Vec<Record>> {
    let x = params.real("x")?;
    if !(x >= 2.0) {
        return Err(LabError::schema("x", "must be at least 2"));
    }
    let table = sieve_upto(x as u64)?;
    let sum = table.mertens_sum(x)?;
    // Rosser–Schoenfeld: |Σ 1/p − log log x − M| < 1/log²x for x > 1.
    let bound = x.ln().powi(-2);
    Ok(vec![Record::within(
        "sum 1/p",
        sum,
        0.0,
        x.ln().ln() + MERTENS_CONSTANT,
        bound,
    )])
}
