use std::collections::HashMap;
use std::time::Instant;

use rayon::prelude::*;

use super::{class_values, ExperimentReport, Mode, Params, MIN_ASYMPTOTIC_Q};
use crate::arith::{necklace_count, partitions, CycleType};
use crate::ensembles::{check_budget, count_monic, enumerate_monic_range, monic_from_index};
use crate::error::{Error, Result};
use crate::factor::{factor, is_irreducible};
use crate::field::FieldCtx;
use crate::poly::Poly;
use crate::sieve::for_each_monic_pattern;

/// Monic polynomials per parallel work item in the irreducibility scan.
const SCAN_CHUNK: u64 = 1 << 14;

/// How π_q(n) is obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrimeCountRoute {
    /// Rabin's test on every monic polynomial, checked against the
    /// necklace formula.
    Exhaustive,
    NecklaceOnly,
}

fn count_irreducible(ctx: &FieldCtx, n: usize, budget: u128) -> Result<u64> {
    let total = count_monic(ctx.p(), n);
    check_budget(total, budget)?;
    let total = total as u64;
    let chunks: Vec<u64> = (0..total.div_ceil(SCAN_CHUNK)).collect();
    chunks
        .par_iter()
        .map(|&c| {
            let it = enumerate_monic_range(ctx, n, c * SCAN_CHUNK, (c + 1) * SCAN_CHUNK, budget)?;
            let mut count = 0;
            for f in it {
                if is_irreducible(&f)? {
                    count += 1;
                }
            }
            Ok(count)
        })
        .collect::<Result<Vec<u64>>>()
        .map(|v| v.iter().sum())
}

/// π_q(n) against q^n/n.
pub fn exp_prime_count(q: u32, n: usize, route: PrimeCountRoute, budget: u128) -> Result<ExperimentReport> {
    let start = Instant::now();
    if n == 0 {
        return Err(Error::DegreeOutOfRange("prime counts need n >= 1".into()));
    }
    let ctx = FieldCtx::new(q as u64)?;
    let necklace = necklace_count(q as u64, n as u32) as f64;
    let predicted = (q as f64).powi(n as i32) / n as f64;
    let scale = (q as f64).powf(n as f64 / 2.0);
    let mut params = Params::new(q);
    params.n = Some(n);
    let report = match route {
        PrimeCountRoute::Exhaustive => {
            params.mode = Some("exhaustive".into());
            let count = count_irreducible(&ctx, n, budget)? as f64;
            ExperimentReport::new("prime-count", params, count, predicted, "Prime Polynomial Theorem")
                .scale(scale)
                .detail("necklace", necklace)
                .check("|exhaustive - necklace|", (count - necklace).abs(), 0.0, true)
        }
        PrimeCountRoute::NecklaceOnly => {
            params.mode = Some("necklace".into());
            ExperimentReport::new("prime-count", params, necklace, predicted, "Prime Polynomial Theorem").scale(scale).detail("necklace", necklace)
        }
    };
    let normalized = report.normalized_error.unwrap();
    Ok(report.check("|pi - q^n/n| / q^(n/2)", normalized, 2.0, true).timed(start))
}

/// Primes in short intervals against H/n.
pub fn exp_interval_primes(q: u32, n: usize, h: usize, mode: Mode, budget: u128) -> Result<ExperimentReport> {
    let start = Instant::now();
    let ctx = FieldCtx::new(q as u64)?;
    let cv = class_values(&ctx, n, h, |p| p.is_prime() as i64, mode, budget)?;
    let predicted = cv.size as f64 / n as f64;
    let max_dev = cv.values.iter().map(|&v| (v as f64 - predicted).abs()).fold(0.0, f64::max);
    let mut params = Params::new(q).with_mode(mode);
    params.n = Some(n);
    params.h = Some(h);
    let in_range = h >= 3 && q >= MIN_ASYMPTOTIC_Q;
    let mut report = ExperimentReport::new("interval-primes", params, cv.mean(), predicted, "Bank-Bary-Soroker-Rosenzweig primes in short intervals");
    report.abs_error = max_dev;
    let mut report = report
        .scale(predicted / (q as f64).sqrt())
        .detail("intervals", cv.count() as f64)
        .detail("total_primes", cv.sum() as f64)
        .series("counts", cv.values.iter().map(|&v| v as f64).collect())
        .check("max_A |count - H/n| / (H/n)", max_dev / predicted, 0.25, in_range);
    if !in_range {
        report = report.note(format!("verdicts need h >= 3 and q >= {MIN_ASYMPTOTIC_Q}"));
    }
    if h == n - 1 {
        report = report.note("h = n - 1: the single interval is all of M_n");
    }
    Ok(report.timed(start))
}

fn parse_cycle_type(lambda: &CycleType, n: usize) -> Result<()> {
    if lambda.n != n {
        return Err(Error::InvalidPartition(format!("{} is not a cycle type of {n}", lambda.label())));
    }
    CycleType::new(lambda.lambda.clone()).map(|_| ())
}

/// Cycle-type census of short intervals against p(λ)·H.
pub fn exp_interval_cycles(q: u32, n: usize, h: usize, lambda: &CycleType, mode: Mode, budget: u128) -> Result<ExperimentReport> {
    let start = Instant::now();
    parse_cycle_type(lambda, n)?;
    let ctx = FieldCtx::new(q as u64)?;
    let cv = class_values(&ctx, n, h, |p| (p.cycle_type() == *lambda) as i64, mode, budget)?;
    let prob = lambda.probability();
    let predicted = prob * cv.size as f64;
    let max_dev = cv.values.iter().map(|&v| (v as f64 - predicted).abs()).fold(0.0, f64::max);
    let mut params = Params::new(q).with_mode(mode);
    params.n = Some(n);
    params.h = Some(h);
    params.partitions = Some(vec![lambda.label()]);
    let in_range = h >= 3 && q >= MIN_ASYMPTOTIC_Q;
    let mut report = ExperimentReport::new("interval-cycles", params, cv.mean(), predicted, "Bank-Bary-Soroker-Rosenzweig cycle-type theorem with Cauchy's formula");
    report.abs_error = max_dev;
    let mut report = report
        .scale(predicted / (q as f64).sqrt())
        .detail("cauchy_probability", prob)
        .detail("intervals", cv.count() as f64)
        .series("counts", cv.values.iter().map(|&v| v as f64).collect())
        .check("max_A |count - p(lambda) H| / (p(lambda) H)", max_dev / predicted, 0.25, in_range);
    if !in_range {
        report = report.note(format!("verdicts need h >= 3 and q >= {MIN_ASYMPTOTIC_Q}"));
    }
    Ok(report.timed(start))
}

/// Exact counts of every cycle type over M_n, in the order of
/// [`partitions`].
pub(crate) fn cycle_counts(ctx: &FieldCtx, n: usize, budget: u128) -> Result<(Vec<CycleType>, Vec<u64>)> {
    let types = partitions(n);
    let index: HashMap<CycleType, usize> = types.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
    let mut counts = vec![0u64; types.len()];
    for_each_monic_pattern(ctx, n, budget, |_, pat| counts[index[&pat.cycle_type()]] += 1)?;
    Ok((types, counts))
}

/// Full cycle-type distribution of M_n against Cauchy's formula.
pub fn exp_cycle_census(q: u32, n: usize, budget: u128) -> Result<ExperimentReport> {
    let start = Instant::now();
    if n == 0 {
        return Err(Error::DegreeOutOfRange("cycle census needs n >= 1".into()));
    }
    let ctx = FieldCtx::new(q as u64)?;
    let (types, counts) = cycle_counts(&ctx, n, budget)?;
    let total = (q as u64).pow(n as u32);
    let freq: Vec<f64> = counts.iter().map(|&c| c as f64 / total as f64).collect();
    let cauchy: Vec<f64> = types.iter().map(|t| t.probability()).collect();
    let max_dev = freq.iter().zip(&cauchy).map(|(f, p)| (f - p).abs()).fold(0.0, f64::max);
    let mut params = Params::new(q);
    params.n = Some(n);
    let mut report = ExperimentReport::new("cycle-census", params, max_dev, 0.0, "Cycle-type distribution of random polynomials (Cauchy's formula)")
        .scale(1.0 / q as f64)
        .detail("counted", counts.iter().sum::<u64>() as f64)
        .series("frequency", freq)
        .series("cauchy", cauchy)
        .series("count", counts.iter().map(|&c| c as f64).collect())
        .check("max_lambda |freq - p(lambda)|", max_dev, 3.0 / q as f64, true)
        .check("|sum of counts - q^n|", (counts.iter().sum::<u64>() as f64 - total as f64).abs(), 0.0, true);
    report.labels = types.iter().map(|t| t.label()).collect();
    Ok(report.timed(start))
}

/// Φ(Q) from the factorization of Q.
pub(crate) fn totient(modulus: &Poly) -> Result<u64> {
    let q = modulus.ctx().p() as u64;
    let fac = factor(modulus)?;
    Ok(fac.factors.iter().map(|(p, e)| {
        let d = p.degree().unwrap() as u32;
        (q.pow(d) - 1) * q.pow(d * (e - 1))
    })
    .product())
}

/// Primes f ≡ A mod Q of degree n against π_q(n)/Φ(Q).
pub fn exp_ap_primes(q: u32, n: usize, modulus: &Poly, residue: &Poly, budget: u128) -> Result<ExperimentReport> {
    let start = Instant::now();
    let ctx = FieldCtx::new(q as u64)?;
    let dq = modulus.degree().ok_or(Error::ZeroPolynomial)?;
    if dq == 0 {
        return Err(Error::ConstantPolynomial);
    }
    let a = residue.rem(modulus)?;
    if a.gcd(modulus)?.degree() != Some(0) {
        return Err(Error::NotCoprime);
    }
    let phi = totient(modulus)?;
    let mut count = 0u64;
    let mut total = 0u64;
    for_each_monic_pattern(&ctx, n, budget, |idx, pat| {
        if pat.is_prime() {
            total += 1;
            if monic_from_index(&ctx, n, idx).rem(modulus).unwrap() == a {
                count += 1;
            }
        }
    })?;
    let predicted = total as f64 / phi as f64;
    let mut params = Params::new(q);
    params.n = Some(n);
    params.modulus = Some(modulus.to_text());
    params.residue = Some(a.to_text());
    let report = ExperimentReport::new("ap-primes", params, count as f64, predicted, "").detail("phi", phi as f64).detail("prime_count", total as f64);
    let report = if dq + 3 <= n {
        let rel = report.abs_error / predicted;
        let judged = q >= MIN_ASYMPTOTIC_Q;
        let mut r = report.scale(predicted / (q as f64).sqrt()).check("|count - pi/Phi| / (pi/Phi)", rel, 0.25, judged);
        r.provenance = "Bank-Bary-Soroker-Rosenzweig theorem for primes in progressions (deg Q <= n - 3)".into();
        r
    } else {
        let scale = dq as f64 * (q as f64).powf(n as f64 / 2.0);
        let norm = report.abs_error / scale;
        let mut r = report.scale(scale).check("|count - pi/Phi| / (deg Q q^(n/2))", norm, 1.0, true);
        r.provenance = "Prime Polynomial Theorem in progressions (Weil range)".into();
        r
    };
    Ok(report.timed(start))
}
