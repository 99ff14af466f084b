//! Haar-random unitary spectra and the matrix integrals that predict the
//! variance experiments.
//!
//! Every statistic here is a class function, so only eigenphases are kept.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::arith::binomial;
use crate::ensembles::stream_rng;
use crate::error::{Error, Result};

/// Samples per independent generator stream in Monte Carlo runs.
const MC_CHUNK: usize = 1000;

/// Eigenphases of a unitary matrix, each in `[0, 2π)`.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitarySpectrum {
    pub angles: Vec<f64>,
}

impl UnitarySpectrum {
    pub fn from_angles(angles: Vec<f64>) -> Self {
        UnitarySpectrum { angles: angles.into_iter().map(wrap_angle).collect() }
    }

    /// Spectrum from (approximately) unimodular eigenvalues.
    pub fn from_eigenvalues(values: &[Complex64]) -> Self {
        Self::from_angles(values.iter().map(|z| z.arg()).collect())
    }

    pub fn dim(&self) -> usize {
        self.angles.len()
    }

    pub fn eigenvalues(&self) -> Vec<Complex64> {
        self.angles.iter().map(|&t| Complex64::from_polar(1.0, t)).collect()
    }

    /// tr U^j.
    pub fn power_trace(&self, j: i64) -> Complex64 {
        self.angles.iter().map(|&t| Complex64::from_polar(1.0, j as f64 * t)).sum()
    }
}

pub fn wrap_angle(t: f64) -> f64 {
    let r = t.rem_euclid(std::f64::consts::TAU);
    if r >= std::f64::consts::TAU {
        0.0
    } else {
        r
    }
}

/// Eigenphases of a Haar-distributed matrix in U(n).
///
/// A complex Ginibre matrix is QR-factored and Q is multiplied by the phases
/// of diag(R); without that correction Q is not Haar distributed.
pub fn haar_spectrum<R: Rng + ?Sized>(n: usize, rng: &mut R) -> UnitarySpectrum {
    assert!(n >= 1);
    if n == 1 {
        return UnitarySpectrum::from_angles(vec![rng.random_range(0.0..std::f64::consts::TAU)]);
    }
    let z = DMatrix::<Complex64>::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    });
    let qr = z.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    let eig = nalgebra::linalg::Schur::new(q).eigenvalues().expect("complex Schur form is triangular");
    UnitarySpectrum::from_eigenvalues(eig.as_slice())
}

/// Power sums, elementary and complete homogeneous symmetric functions of
/// the eigenvalues: tr U^j, tr Λ^j U and tr Sym^j U.
#[derive(Clone, Debug)]
pub struct TraceFunctionals {
    /// `power[j] = p_j` for `j = 0..=m` (`p_0 = N`).
    pub power: Vec<Complex64>,
    /// `elementary[j] = e_j` for `j = 0..=min(m, N)`.
    pub elementary: Vec<Complex64>,
    /// `homogeneous[j] = h_j` for `j = 0..=m`.
    pub homogeneous: Vec<Complex64>,
}

pub fn trace_functionals(spec: &UnitarySpectrum, m: usize) -> TraceFunctionals {
    functionals_of_values(&spec.eigenvalues(), m)
}

/// Newton's identities on arbitrary complex values.
pub fn functionals_of_values(values: &[Complex64], m: usize) -> TraceFunctionals {
    let n = values.len();
    let mut power = vec![Complex64::new(n as f64, 0.0)];
    let mut zk: Vec<Complex64> = values.to_vec();
    for _ in 1..=m {
        power.push(zk.iter().sum());
        for (z, &v) in zk.iter_mut().zip(values) {
            *z *= v;
        }
    }
    let mut e = vec![Complex64::new(1.0, 0.0)];
    let mut h = vec![Complex64::new(1.0, 0.0)];
    for k in 1..=m {
        let mut se = Complex64::new(0.0, 0.0);
        let mut sh = Complex64::new(0.0, 0.0);
        for i in 1..=k {
            let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
            if k - i < e.len() {
                se += e[k - i] * power[i] * sign;
            }
            sh += h[k - i] * power[i];
        }
        if k <= n {
            e.push(se / k as f64);
        }
        h.push(sh / k as f64);
    }
    TraceFunctionals { power, elementary: e, homogeneous: h }
}

/// Mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn exact(v: f64) -> Self {
        Estimate { mean: v, stderr: 0.0 }
    }

    /// |mean - target| <= k·stderr.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.stderr
    }
}

/// Haar average of `statistic` over U(n) by Monte Carlo.
///
/// Samples are drawn in chunks of 1000, chunk `c` from stream `c` of the
/// seed, and partial sums are combined pairwise in chunk order, so the
/// result does not depend on the thread count.
pub fn mc_integral<F>(statistic: F, n: usize, samples: usize, seed: u64) -> Estimate
where
    F: Fn(&UnitarySpectrum) -> f64 + Sync,
{
    let chunks = samples.div_ceil(MC_CHUNK);
    let partial: Vec<(f64, f64, usize)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(seed, c as u64);
            let count = MC_CHUNK.min(samples - c * MC_CHUNK);
            let mut s = 0.0;
            let mut s2 = 0.0;
            for _ in 0..count {
                let v = statistic(&haar_spectrum(n, &mut rng));
                s += v;
                s2 += v * v;
            }
            (s, s2, count)
        })
        .collect();
    let (s, s2, count) = pairwise_sum(&partial);
    summarize(s, s2, count)
}

fn pairwise_sum(v: &[(f64, f64, usize)]) -> (f64, f64, usize) {
    match v.len() {
        0 => (0.0, 0.0, 0),
        1 => v[0],
        len => {
            let (a, b) = v.split_at(len / 2);
            let (x, y) = (pairwise_sum(a), pairwise_sum(b));
            (x.0 + y.0, x.1 + y.1, x.2 + y.2)
        }
    }
}

fn summarize(s: f64, s2: f64, count: usize) -> Estimate {
    let n = count as f64;
    let mean = s / n;
    let var = if count > 1 { ((s2 - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
    Estimate { mean, stderr: (var / n).sqrt() }
}

/// How a matrix integral is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IntegralMode {
    Closed,
    MonteCarlo { samples: usize, seed: u64 },
}

/// Degree-`m` coefficient of det(I + uU)^k, i.e. the sum of
/// tr Λ^{j_1}U ⋯ tr Λ^{j_k}U over j_1 + … + j_k = m.
pub fn secular_power_coefficient(elementary: &[Complex64], k: usize, m: usize) -> Complex64 {
    let mut acc = vec![Complex64::new(1.0, 0.0)];
    for _ in 0..k {
        let mut next = vec![Complex64::new(0.0, 0.0); (acc.len() + elementary.len() - 1).min(m + 1)];
        for (i, &a) in acc.iter().enumerate() {
            for (j, &e) in elementary.iter().enumerate() {
                if i + j <= m {
                    next[i + j] += a * e;
                }
            }
        }
        acc = next;
    }
    acc.get(m).copied().unwrap_or_default()
}

/// I_k(m;N): Haar mean of |Σ_{j_1+…+j_k=m} tr Λ^{j_1}U ⋯ tr Λ^{j_k}U|².
///
/// Closed mode uses binom(m+k²-1, k²-1) for m <= N, reflects once through
/// I_k(m;N) = I_k(kN-m;N), and is 0 beyond kN. In the middle range for k >= 3
/// there is no closed form and the call fails.
pub fn divisor_integral(k: usize, m: usize, n: usize, mode: IntegralMode) -> Result<Estimate> {
    if k == 0 || n == 0 {
        return Err(Error::InvalidParameter("need k >= 1 and N >= 1".into()));
    }
    if m > k * n {
        return Ok(Estimate::exact(0.0));
    }
    match mode {
        IntegralMode::Closed => {
            let kk = (k * k) as u64;
            let value = if m <= n {
                binomial(m as u64 + kk - 1, kk - 1)
            } else if k * n - m <= n {
                binomial((k * n - m) as u64 + kk - 1, kk - 1)
            } else {
                return Err(Error::ClosedFormNotAvailable { k, m, n });
            };
            Ok(Estimate::exact(value as f64))
        }
        IntegralMode::MonteCarlo { samples, seed } => Ok(mc_integral(
            |s| {
                let tf = trace_functionals(s, n);
                secular_power_coefficient(&tf.elementary, k, m).norm_sqr()
            },
            n,
            samples,
            seed,
        )),
    }
}

/// Haar mean of |Σ_{j=1}^{n-1} tr U^j tr U^{n-j} - n tr U^n|² over U(N).
pub fn rodgers_integral(n: usize, dim: usize, mode: IntegralMode) -> Result<Estimate> {
    if n < 2 || dim == 0 {
        return Err(Error::InvalidParameter("need n >= 2 and N >= 1".into()));
    }
    match mode {
        IntegralMode::Closed => Ok(Estimate::exact(rodgers_closed(n, dim) as f64)),
        IntegralMode::MonteCarlo { samples, seed } => Ok(mc_integral(
            |s| {
                let p = trace_functionals(s, n).power;
                let mut acc: Complex64 = (1..n).map(|j| p[j] * p[n - j]).sum();
                acc -= p[n] * n as f64;
                acc.norm_sqr()
            },
            dim,
            samples,
            seed,
        )),
    }
}

/// Σ_{d=1}^{min(n,N)} (d² - (d-1)²)².
pub fn rodgers_closed(n: usize, dim: usize) -> u64 {
    (1..=n.min(dim) as u64).map(|d| (2 * d - 1) * (2 * d - 1)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_spectrum_functionals() {
        let s = UnitarySpectrum::from_angles(vec![0.0; 4]);
        let tf = trace_functionals(&s, 6);
        for j in 0..=4 {
            assert!((tf.elementary[j].re - binomial(4, j as u64) as f64).abs() < 1e-12);
        }
        assert_eq!(tf.elementary.len(), 5);
        for n in 0..=6 {
            assert!((tf.homogeneous[n].re - binomial(n as u64 + 3, 3) as f64).abs() < 1e-9);
        }
    }

    /// Coefficients of Π(1 + u z) and of the truncated Π(1 - u z)^{-1},
    /// expanded directly.
    fn expand(values: &[Complex64], m: usize) -> (Vec<Complex64>, Vec<Complex64>) {
        let mut e = vec![Complex64::new(1.0, 0.0)];
        for &z in values {
            let mut next = vec![Complex64::default(); e.len() + 1];
            for (i, &c) in e.iter().enumerate() {
                next[i] += c;
                next[i + 1] += c * z;
            }
            e = next;
        }
        let mut h = vec![Complex64::default(); m + 1];
        h[0] = Complex64::new(1.0, 0.0);
        for &z in values {
            // multiply by 1/(1 - u z) = Σ z^k u^k
            for i in 1..=m {
                let prev = h[i - 1];
                h[i] += prev * z;
            }
        }
        (e, h)
    }

    #[test]
    fn newton_identities_match_direct_expansion() {
        let mut rng = stream_rng(77, 0);
        for trial in 0..100 {
            let n = 1 + trial % 8;
            let s = haar_spectrum(n, &mut rng);
            let tf = trace_functionals(&s, 10);
            let (e, h) = expand(&s.eigenvalues(), 10);
            for j in 0..=n {
                assert!((tf.elementary[j] - e[j]).norm() < 1e-10, "e_{j}");
            }
            for j in 0..=10 {
                assert!((tf.homogeneous[j] - h[j]).norm() < 1e-8, "h_{j}");
            }
            assert!(tf.power.iter().all(|p| p.norm() <= n as f64 + 1e-9));
        }
    }

    #[test]
    fn spectra_are_unimodular_and_reproducible() {
        let a = haar_spectrum(5, &mut stream_rng(3, 0));
        let b = haar_spectrum(5, &mut stream_rng(3, 0));
        assert_eq!(a, b);
        assert!(a.angles.iter().all(|&t| (0.0..std::f64::consts::TAU).contains(&t)));
        // eigenvalues straight from the matrix, before conversion to angles
        let mut rng = stream_rng(4, 0);
        for _ in 0..20 {
            let s = haar_spectrum(6, &mut rng);
            for z in s.eigenvalues() {
                assert!((z.norm() - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn u1_phase_is_uniform() {
        // Kolmogorov–Smirnov against the uniform law, 1% critical value
        let mut rng = stream_rng(12, 0);
        let n = 100_000;
        let mut v: Vec<f64> = (0..n).map(|_| haar_spectrum(1, &mut rng).angles[0] / std::f64::consts::TAU).collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let d = v
            .iter()
            .enumerate()
            .map(|(i, &x)| ((i + 1) as f64 / n as f64 - x).abs().max((x - i as f64 / n as f64).abs()))
            .fold(0.0, f64::max);
        assert!(d < 1.628 / (n as f64).sqrt(), "KS statistic {d}");
    }

    #[test]
    fn mean_trace_vanishes() {
        let mut rng = stream_rng(13, 0);
        let samples = 100_000;
        let mut acc = Complex64::default();
        for _ in 0..samples {
            acc += haar_spectrum(4, &mut rng).power_trace(1);
        }
        assert!((acc / samples as f64).norm() <= 5.0 / (samples as f64).sqrt());
    }

    #[test]
    fn closed_forms() {
        assert_eq!(divisor_integral(2, 3, 5, IntegralMode::Closed).unwrap().mean, 20.0);
        assert_eq!(divisor_integral(2, 9, 5, IntegralMode::Closed).unwrap().mean, 4.0);
        assert_eq!(divisor_integral(2, 11, 5, IntegralMode::Closed).unwrap().mean, 0.0);
        assert_eq!(divisor_integral(1, 2, 3, IntegralMode::Closed).unwrap().mean, 1.0);
        assert_eq!(
            divisor_integral(3, 5, 3, IntegralMode::Closed).unwrap_err(),
            Error::ClosedFormNotAvailable { k: 3, m: 5, n: 3 }
        );
        assert_eq!(rodgers_closed(6, 2), 10);
        assert_eq!(rodgers_closed(6, 2), (4 * 8 - 2) / 3);
        assert_eq!(rodgers_closed(5, 1), 1);
        assert_eq!(rodgers_closed(7, 3), 35);
        // (4N^3 - N)/3 whenever N <= n
        for n in 2..10 {
            for dim in 1..=n {
                assert_eq!(rodgers_closed(n, dim) as usize, (4 * dim * dim * dim - dim) / 3);
            }
        }
    }

    #[test]
    fn mc_is_thread_count_independent() {
        let stat = |s: &UnitarySpectrum| s.power_trace(1).norm_sqr();
        let a = mc_integral(stat, 3, 5000, 8);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| mc_integral(stat, 3, 5000, 8));
        assert_eq!(a, b);
    }

    #[test]
    fn small_monte_carlo_checks() {
        let e = mc_integral(|s| s.power_trace(3).norm_sqr(), 5, 20_000, 1);
        assert!(e.within(3.0, 4.0), "{e:?}");
        let e = divisor_integral(2, 2, 3, IntegralMode::MonteCarlo { samples: 20_000, seed: 2 }).unwrap();
        assert!(e.within(10.0, 4.0), "{e:?}");
        let e = mc_integral(|s| trace_functionals(s, 4).homogeneous[4].norm_sqr(), 2, 20_000, 3);
        assert!(e.within(1.0, 4.0), "{e:?}");
    }
}
