use std::collections::HashMap;
use std::time::Instant;

use super::{require_odd, ExperimentReport, IndexShift, Mode, Params, ShiftTuple, MIN_ASYMPTOTIC_Q};
use crate::arith::{binomial, partitions, CycleType, FactorPattern};
use crate::ensembles::{sample_monic, stream_rng};
use crate::error::{Error, Result};
use crate::factor::factor_pattern;
use crate::field::FieldCtx;
use crate::poly::Poly;
use crate::sieve::for_each_monic_pattern;

/// `f(pattern)` for every member of M_n, by index.
fn table<T: Clone + Default>(ctx: &FieldCtx, n: usize, budget: u128, f: impl Fn(&FactorPattern) -> T) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for_each_monic_pattern(ctx, n, budget, |_, pat| out.push(f(pat)))?;
    Ok(out)
}

fn shift_params(q: u32, n: usize, shifts: &ShiftTuple) -> Params {
    let mut p = Params::new(q);
    p.n = Some(n);
    p.r = Some(shifts.len());
    p.shifts = Some(shifts.texts());
    p
}

/// S = Σ_{F ∈ M_n} Π μ(F + α_i)^{ε_i} against the q^{n-1/2} bound.
pub fn exp_chowla(q: u32, n: usize, shifts: &ShiftTuple, mode: Mode, budget: u128) -> Result<ExperimentReport> {
    let start = Instant::now();
    require_odd(q)?;
    let ctx = FieldCtx::new(q as u64)?;
    if n == 0 {
        return Err(Error::DegreeOutOfRange("need n >= 1".into()));
    }
    let total = (q as f64).powi(n as i32);
    let (s, stderr) = match mode {
        Mode::Exhaustive => {
            let mu: Vec<i8> = table(&ctx, n, budget, |p| p.mobius())?;
            let maps: Vec<IndexShift> = shifts.shifts().iter().map(|a| IndexShift::new(a, n)).collect();
            let mut s = 0i64;
            for idx in 0..mu.len() as u64 {
                let mut prod = 1i64;
                for (m, &e) in maps.iter().zip(shifts.exponents()) {
                    prod *= (mu[m.apply(idx) as usize] as i64).pow(e as u32);
                    if prod == 0 {
                        break;
                    }
                }
                s += prod;
            }
            (s as f64, 0.0)
        }
        Mode::Sampled { samples, seed } => {
            let mut rng = stream_rng(seed, 0);
            let (mut s1, mut s2) = (0.0, 0.0);
            for _ in 0..samples {
                let f = sample_monic(&ctx, n, &mut rng);
                let mut prod = 1.0;
                for (a, &e) in shifts.shifts().iter().zip(shifts.exponents()) {
                    prod *= (factor_pattern(&f.add(a))?.mobius() as f64).powi(e as i32);
                }
                s1 += prod;
                s2 += prod * prod;
            }
            let k = samples as f64;
            let mean = s1 / k;
            let var = if samples > 1 { (s2 - k * mean * mean) / (k - 1.0) } else { 0.0 };
            (mean * total, (var / k).sqrt() * total)
        }
    };
    let scale = (q as f64).powf(n as f64 - 0.5);
    let mut params = shift_params(q, n, shifts).with_mode(mode);
    params.exponents = Some(shifts.exponents().to_vec());
    let mut report = ExperimentReport::new("chowla", params, s, 0.0, "Carmon-Rudnick function-field Chowla theorem").scale(scale).detail("stderr", stderr);
    let normalized = s.abs() / scale;
    if shifts.len() >= 2 && n > 1 {
        report = report.check("|S| / q^(n-1/2)", normalized, 5.0, true);
    } else {
        report = report.note("r = 1 or n = 1 is outside the theorem's range");
        if shifts.len() == 1 && shifts.exponents()[0] == 1 && mode == Mode::Exhaustive {
            let expected = if n == 1 { -(q as f64) } else { 0.0 };
            report = report.detail("exact_sum_mobius", expected).check("|S - sum of mu over M_n|", (s - expected).abs(), 0.0, true);
        }
    }
    Ok(report.timed(start))
}

/// Simultaneous primality of f + a_1, …, f + a_r against q^n / n^r.
pub fn exp_twin(q: u32, n: usize, shifts: &ShiftTuple, budget: u128) -> Result<ExperimentReport> {
    let start = Instant::now();
    let ctx = FieldCtx::new(q as u64)?;
    let prime: Vec<bool> = table(&ctx, n, budget, |p| p.is_prime())?;
    let maps: Vec<IndexShift> = shifts.shifts().iter().map(|a| IndexShift::new(a, n)).collect();
    let count = (0..prime.len() as u64).filter(|&i| maps.iter().all(|m| prime[m.apply(i) as usize])).count() as f64;
    let r = shifts.len();
    let predicted = (q as f64).powi(n as i32) / (n as f64).powi(r as i32);
    let rel = (count / predicted - 1.0).abs();
    let judged = q >= MIN_ASYMPTOTIC_Q;
    let mut report = ExperimentReport::new("twin", shift_params(q, n, shifts), count, predicted, "Bary-Soroker twin prime polynomial asymptotic")
        .scale(predicted / (q as f64).sqrt())
        .check("|count / (q^n/n^r) - 1|", rel, 0.5, judged);
    if !judged {
        report = report.note(format!("q < {MIN_ASYMPTOTIC_Q}: asymptotic not judged"));
    }
    Ok(report.timed(start))
}

/// Mean of d_r(f) d_r(f + h) over M_n against C(n+r-1, r-1)^2.
pub fn exp_divisor_corr(q: u32, n: usize, r: u32, shift: &Poly, budget: u128) -> Result<ExperimentReport> {
    let start = Instant::now();
    require_odd(q)?;
    let ctx = FieldCtx::new(q as u64)?;
    let deg = shift.degree().ok_or(Error::ZeroShift)?;
    if deg >= n {
        return Err(Error::DegreeOutOfRange(format!("need deg h < n, got deg h = {deg}, n = {n}")));
    }
    if r == 0 {
        return Err(Error::InvalidParameter("r must be positive".into()));
    }
    let d: Vec<u64> = table(&ctx, n, budget, |p| p.divisor_k(r))?;
    let map = IndexShift::new(shift, n);
    let sum: u128 = (0..d.len() as u64).map(|i| d[i as usize] as u128 * d[map.apply(i) as usize] as u128).sum();
    let mean = sum as f64 / d.len() as f64;
    let predicted = (binomial((n as u32 + r - 1) as u64, (r - 1) as u64) as f64).powi(2);
    let judged = q >= MIN_ASYMPTOTIC_Q;
    let mut params = Params::new(q);
    params.n = Some(n);
    params.r = Some(r as usize);
    params.shifts = Some(vec![shift.to_text()]);
    let mut report = ExperimentReport::new("divisor-corr", params, mean, predicted, "Andrade-Bary-Soroker-Rudnick additive divisor theorem")
        .scale(predicted / (q as f64).sqrt());
    let abs = report.abs_error;
    report = report.check("|mean - C(n+r-1,r-1)^2|", abs, predicted / 16.0, judged);
    if !judged {
        report = report.note(format!("q < {MIN_ASYMPTOTIC_Q}: asymptotic not judged"));
    }
    Ok(report.timed(start))
}

/// Joint cycle-type distribution of (f, f + α) against the product of the
/// marginal Cauchy probabilities.
pub fn exp_joint_cycles(q: u32, n: usize, alpha: &Poly, pair: Option<(&CycleType, &CycleType)>, budget: u128) -> Result<ExperimentReport> {
    let start = Instant::now();
    require_odd(q)?;
    let ctx = FieldCtx::new(q as u64)?;
    let deg = alpha.degree().ok_or(Error::ZeroShift)?;
    if deg >= n {
        return Err(Error::DegreeOutOfRange(format!("need deg alpha < n, got {deg} with n = {n}")));
    }
    let types = partitions(n);
    let index: HashMap<CycleType, u16> = types.iter().cloned().enumerate().map(|(i, t)| (t, i as u16)).collect();
    if let Some((a, b)) = pair {
        for t in [a, b] {
            if !index.contains_key(t) {
                return Err(Error::InvalidPartition(format!("{} is not a cycle type of {n}", t.label())));
            }
        }
    }
    let ty: Vec<u16> = table(&ctx, n, budget, |p| index[&p.cycle_type()])?;
    let map = IndexShift::new(alpha, n);
    let m = types.len();
    let mut joint = vec![0u64; m * m];
    for i in 0..ty.len() as u64 {
        joint[ty[i as usize] as usize * m + ty[map.apply(i) as usize] as usize] += 1;
    }
    let total = ty.len() as f64;
    let probs: Vec<f64> = types.iter().map(|t| t.probability()).collect();
    let mut max_dev = 0.0f64;
    let mut freq = Vec::with_capacity(m * m);
    for a in 0..m {
        for b in 0..m {
            let f = joint[a * m + b] as f64 / total;
            max_dev = max_dev.max((f - probs[a] * probs[b]).abs());
            freq.push(f);
        }
    }
    let judged = q >= MIN_ASYMPTOTIC_Q;
    let mut params = Params::new(q);
    params.n = Some(n);
    params.shifts = Some(vec![alpha.to_text()]);
    let mut report = ExperimentReport::new("joint-cycles", params, max_dev, 0.0, "Independence of cycle types of f and f + alpha (Andrade-Bary-Soroker-Rudnick)")
        .scale(1.0 / q as f64)
        .series("joint_frequency", freq)
        .series("cauchy", probs.clone())
        .check("max |joint - p(l1) p(l2)|", max_dev, 5.0 / q as f64, judged);
    report.labels = types.iter().map(|t| t.label()).collect();
    if let Some((a, b)) = pair {
        let (ia, ib) = (index[a] as usize, index[b] as usize);
        report.params.partitions = Some(vec![a.label(), b.label()]);
        report = report.detail("pair_joint", joint[ia * m + ib] as f64 / total).detail("pair_product", probs[ia] * probs[ib]);
    }
    if !judged {
        report = report.note(format!("q < {MIN_ASYMPTOTIC_Q}: asymptotic not judged"));
    }
    Ok(report.timed(start))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::necklace_count;
    use crate::ensembles::DEFAULT_BUDGET;

    fn p(ctx: &FieldCtx, s: &str) -> Poly {
        Poly::parse(ctx, s).unwrap()
    }

    #[test]
    fn chowla_single_shift_is_the_mobius_sum() {
        let f3 = FieldCtx::new(3).unwrap();
        for n in 1..=5 {
            let t = ShiftTuple::plain(vec![p(&f3, "0")], n).unwrap();
            let r = exp_chowla(3, n, &t, Mode::Exhaustive, DEFAULT_BUDGET).unwrap();
            assert_eq!(r.empirical, if n == 1 { -3.0 } else { 0.0 });
            assert!(r.passed());
        }
        let f4 = FieldCtx::new(2).unwrap();
        let t = ShiftTuple::plain(vec![p(&f4, "0"), p(&f4, "1")], 2).unwrap();
        assert_eq!(exp_chowla(2, 2, &t, Mode::Exhaustive, DEFAULT_BUDGET).unwrap_err(), Error::EvenCharacteristic);
    }

    #[test]
    fn twin_examples() {
        let f3 = FieldCtx::new(3).unwrap();
        let t = ShiftTuple::plain(vec![p(&f3, "0"), p(&f3, "1")], 2).unwrap();
        assert_eq!(exp_twin(3, 2, &t, DEFAULT_BUDGET).unwrap().empirical, 0.0);
        let f5 = FieldCtx::new(5).unwrap();
        let single = ShiftTuple::plain(vec![p(&f5, "0")], 3).unwrap();
        assert_eq!(exp_twin(5, 3, &single, DEFAULT_BUDGET).unwrap().empirical, necklace_count(5, 3) as f64);
    }

    #[test]
    fn divisor_correlation_of_d1_is_one() {
        let f5 = FieldCtx::new(5).unwrap();
        let r = exp_divisor_corr(5, 3, 1, &p(&f5, "1"), DEFAULT_BUDGET).unwrap();
        assert_eq!(r.empirical, 1.0);
        assert_eq!(exp_divisor_corr(5, 3, 2, &Poly::zero(&f5), DEFAULT_BUDGET).unwrap_err(), Error::ZeroShift);
        assert_eq!(r.predicted, 1.0);
        let r2 = exp_divisor_corr(5, 3, 2, &p(&f5, "1"), DEFAULT_BUDGET).unwrap();
        assert_eq!(r2.predicted, 16.0);
    }

    #[test]
    fn joint_cycles_marginals_and_twin_consistency() {
        let f7 = FieldCtx::new(7).unwrap();
        let alpha = p(&f7, "1");
        let r = exp_joint_cycles(7, 3, &alpha, None, DEFAULT_BUDGET).unwrap();
        let m = r.labels.len();
        let joint = &r.series["joint_frequency"];
        let census = super::super::exp_cycle_census(7, 3, DEFAULT_BUDGET).unwrap();
        for a in 0..m {
            let marginal: f64 = joint[a * m..(a + 1) * m].iter().sum();
            assert!((marginal - census.series["frequency"][a]).abs() < 1e-12);
        }
        let nc = CycleType::n_cycle(3);
        let r = exp_joint_cycles(7, 3, &alpha, Some((&nc, &nc)), DEFAULT_BUDGET).unwrap();
        let twin = exp_twin(7, 3, &ShiftTuple::plain(vec![Poly::zero(&f7), alpha.clone()], 3).unwrap(), DEFAULT_BUDGET).unwrap();
        assert_eq!(r.details["pair_joint"], twin.empirical / 343.0);
    }
}
