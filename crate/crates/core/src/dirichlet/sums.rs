use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::character::{l_polynomials, CharacterFilter, DirichletCharacter, LPolynomial};
use super::group::DirichletGroup;
use crate::arith::{binomial, FactorPattern};
use crate::error::{Error, Result};
use crate::field::FieldCtx;
use crate::poly::Poly;
use crate::rmt::{functionals_of_values, mc_integral, Estimate, UnitarySpectrum};
use crate::sieve::for_each_monic_pattern;

/// Arithmetic weight w in M(n; w·χ).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Weight {
    Unit,
    Mobius,
    VonMangoldt,
    DivisorK(u32),
}

impl Weight {
    pub fn of_pattern(self, pat: &FactorPattern) -> i64 {
        match self {
            Weight::Unit => 1,
            Weight::Mobius => pat.mobius() as i64,
            Weight::VonMangoldt => pat.von_mangoldt() as i64,
            Weight::DivisorK(k) => pat.divisor_k(k) as i64,
        }
    }
}

/// `hist[pos] = Σ w(f)` over f ∈ M_n whose residue mod Q has position `pos`.
pub fn weighted_histogram(group: &DirichletGroup, n: usize, weight: Weight, budget: u128) -> Result<Vec<i64>> {
    let q = group.ctx().p() as u64;
    let mut hist = vec![0i64; group.order() as usize];
    let mut digits = vec![0u32; n + 1];
    digits[n] = 1;
    for_each_monic_pattern(group.ctx(), n, budget, |idx, pat| {
        let w = weight.of_pattern(pat);
        if w == 0 {
            return;
        }
        let mut t = idx;
        for d in digits.iter_mut().take(n) {
            *d = (t % q) as u32;
            t /= q;
        }
        if let Some(p) = group.position_of_coeffs(&digits) {
            hist[p as usize] += w;
        }
    })?;
    Ok(hist)
}

/// M(n; w·χ) = Σ_{f ∈ M_n} w(f) χ(f).
pub fn m_sum(chi: &DirichletCharacter, n: usize, weight: Weight, budget: u128) -> Result<Complex64> {
    let hist = weighted_histogram(chi.group(), n, weight, budget)?;
    Ok(pair_with_character(chi, &hist))
}

pub(crate) fn pair_with_character(chi: &DirichletCharacter, hist: &[i64]) -> Complex64 {
    hist.iter().enumerate().filter(|(_, &h)| h != 0).map(|(p, &h)| chi.value_at(p as u64) * h as f64).sum()
}

/// M(n; w·χ) for every character, indexed by character id.
pub fn m_sums_all(group: &DirichletGroup, n: usize, weight: Weight, budget: u128) -> Result<Vec<Complex64>> {
    let hist = weighted_histogram(group, n, weight, budget)?;
    let mut data: Vec<Complex64> = hist.iter().map(|&h| Complex64::new(h as f64, 0.0)).collect();
    group.dft(&mut data);
    Ok(data)
}

/// Both sides of M(n;μχ) = Σ_{k≤n} q^{k/2} h_k(Θ_χ).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ExplicitFormulaCheck {
    pub n: usize,
    pub lhs: (f64, f64),
    pub rhs: (f64, f64),
    pub error: f64,
}

/// Σ_{k≤n} q^{k/2} h_k of the unitarized eigenvalues.
pub fn explicit_formula_rhs(q: u32, frobenius: &[Complex64], n: usize) -> Complex64 {
    let h = functionals_of_values(frobenius, n).homogeneous;
    h.iter().enumerate().map(|(k, &hk)| hk * (q as f64).powf(k as f64 / 2.0)).sum()
}

pub fn explicit_formula_check(chi: &DirichletCharacter, lpoly: &LPolynomial, n: usize, budget: u128) -> Result<ExplicitFormulaCheck> {
    if !(chi.is_even() && chi.is_primitive()) {
        return Err(Error::NotEvenPrimitive);
    }
    let lhs = m_sum(chi, n, Weight::Mobius, budget)?;
    let rhs = explicit_formula_rhs(chi.group().ctx().p(), &lpoly.frobenius, n);
    Ok(ExplicitFormulaCheck { n, lhs: (lhs.re, lhs.im), rhs: (rhs.re, rhs.im), error: (lhs - rhs).norm() })
}

/// Upper bound on |M(n;μχ)| implied by the explicit formula for a
/// `dim`-dimensional unitary Θ: Σ_{k≤n} q^{k/2} C(k+dim-1, dim-1).
pub fn mobius_sum_bound(q: u32, n: usize, dim: usize) -> f64 {
    if dim == 0 {
        return 1.0;
    }
    (0..=n).map(|k| (q as f64).powf(k as f64 / 2.0) * binomial((k + dim - 1) as u64, (dim - 1) as u64) as f64).sum()
}

/// |coefficient of u^k| in (Σ_n M(n;μχ) u^n)·L(u,χ) − 1 for k ≤ `up_to`.
pub fn generating_identity_residuals(chi: &DirichletCharacter, lpoly: &LPolynomial, up_to: usize, budget: u128) -> Result<Vec<f64>> {
    let m: Vec<Complex64> = (0..=up_to).map(|n| m_sum(chi, n, Weight::Mobius, budget)).collect::<Result<_>>()?;
    Ok((0..=up_to)
        .map(|k| {
            let c: Complex64 = (0..=k.min(lpoly.degree())).map(|j| lpoly.coeffs[j] * m[k - j]).sum();
            let target = if k == 0 { 1.0 } else { 0.0 };
            (c - target).norm()
        })
        .collect())
}

/// Average of a class function over Frobenius classes of even primitive
/// characters mod x^{N+2}, with its Haar reference.
#[derive(Clone, Debug, Serialize)]
pub struct KatzAverage {
    pub q: u32,
    pub dim: usize,
    pub characters: usize,
    pub empirical: f64,
    pub reference: Estimate,
    pub caveat: Option<String>,
}

pub fn katz_average<F>(q: u32, dim: usize, statistic: F, samples: usize, seed: u64, budget: u128) -> Result<KatzAverage>
where
    F: Fn(&UnitarySpectrum) -> f64 + Sync,
{
    if dim < 2 {
        return Err(Error::InvalidParameter("Katz averages need N >= 2".into()));
    }
    let ctx = FieldCtx::new(q as u64)?;
    let group = DirichletGroup::new(&Poly::monomial(&ctx, dim + 2), budget)?;
    let lpolys = l_polynomials(&group, CharacterFilter::EvenPrimitive)?;
    let values: Vec<f64> = lpolys.par_iter().map(|l| statistic(&l.spectrum())).collect();
    let empirical = values.iter().sum::<f64>() / values.len() as f64;
    let reference = mc_integral(&statistic, dim, samples, seed);
    let caveat = (dim == 2).then(|| "equidistribution for N = 2 is asserted only when q is coprime to 2 and 5".to_string());
    Ok(KatzAverage { q, dim, characters: values.len(), empirical, reference, caveat })
}
