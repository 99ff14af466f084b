use rand::Rng;
use rayon::prelude::*;

use super::Mode;
use crate::arith::FactorPattern;
use crate::ensembles::{check_budget, interval_by_index, stream_rng};
use crate::error::{Error, Result};
use crate::field::FieldCtx;
use crate::sieve::{for_each_monic_pattern, PatternSieve, PrimeTable};

/// Sampled classes handled per sieve instance.
const SAMPLE_CHUNK: usize = 64;

/// N_w(A;h) = Σ_{f ∈ I(A;h)} w(f) for a set of interval classes.
#[derive(Clone, Debug)]
pub struct ClassValues {
    pub h: usize,
    /// H = q^{h+1}.
    pub size: u64,
    /// Class indices, aligned with `values`.
    pub classes: Vec<u64>,
    pub values: Vec<i64>,
    /// q^{n-h-1}.
    pub total_classes: u64,
    pub exhaustive: bool,
}

impl ClassValues {
    pub fn count(&self) -> usize {
        self.values.len()
    }

    pub fn sum(&self) -> i128 {
        self.values.iter().map(|&v| v as i128).sum()
    }

    pub fn mean(&self) -> f64 {
        self.sum() as f64 / self.count() as f64
    }

    /// Σ (v - c)^2 / K, exact up to the final division.
    pub fn mean_square_about(&self, c: i64) -> f64 {
        let s: i128 = self.values.iter().map(|&v| (v as i128 - c as i128).pow(2)).sum();
        s as f64 / self.count() as f64
    }

    /// Population variance about the empirical mean.
    pub fn variance(&self) -> f64 {
        let k = self.count() as i128;
        let s = self.sum();
        let s2: i128 = self.values.iter().map(|&v| (v as i128).pow(2)).sum();
        (s2 * k - s * s) as f64 / (k * k) as f64
    }

    /// Standard error of the variance as a mean of squared deviations.
    pub fn variance_stderr(&self) -> f64 {
        let m = self.mean();
        let d: Vec<f64> = self.values.iter().map(|&v| (v as f64 - m).powi(2)).collect();
        let k = d.len() as f64;
        if d.len() < 2 {
            return 0.0;
        }
        let md = d.iter().sum::<f64>() / k;
        let var = d.iter().map(|x| (x - md).powi(2)).sum::<f64>() / (k - 1.0);
        (var / k).sqrt()
    }
}

/// Per-class sums of `weight` over I(A;h), for every class or for a seeded
/// uniform sample of classes.
pub fn class_values<W>(ctx: &FieldCtx, n: usize, h: usize, weight: W, mode: Mode, budget: u128) -> Result<ClassValues>
where
    W: Fn(&FactorPattern) -> i64 + Sync,
{
    if h >= n {
        return Err(Error::InvalidInterval(format!("need 0 <= h < n, got h = {h}, n = {n}")));
    }
    let q = ctx.p() as u64;
    let size = q.pow(h as u32 + 1);
    let total_classes = q.pow((n - h - 1) as u32);
    match mode {
        Mode::Exhaustive => {
            let mut values = vec![0i64; total_classes as usize];
            for_each_monic_pattern(ctx, n, budget, |idx, pat| values[(idx / size) as usize] += weight(pat))?;
            Ok(ClassValues { h, size, classes: (0..total_classes).collect(), values, total_classes, exhaustive: true })
        }
        Mode::Sampled { samples, seed } => {
            if samples == 0 {
                return Err(Error::InvalidParameter("sampled mode needs at least one sample".into()));
            }
            check_budget(samples as u128 * size as u128, budget)?;
            let mut rng = stream_rng(seed, 0);
            let classes: Vec<u64> = (0..samples).map(|_| rng.random_range(0..total_classes)).collect();
            let table = PrimeTable::new(ctx, n / 2, budget)?;
            let chunks: Vec<Result<Vec<i64>>> = classes
                .par_chunks(SAMPLE_CHUNK)
                .map(|chunk| {
                    let mut sieve = PatternSieve::with_primes(table.clone(), n);
                    chunk
                        .iter()
                        .map(|&c| {
                            let spec = interval_by_index(ctx, n, h, c)?;
                            Ok(sieve.sieve(spec.center(), h).iter().map(&weight).sum())
                        })
                        .collect()
                })
                .collect();
            let mut values = Vec::with_capacity(samples);
            for c in chunks {
                values.extend(c?);
            }
            Ok(ClassValues { h, size, classes, values, total_classes, exhaustive: false })
        }
    }
}
