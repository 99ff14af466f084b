//! Arithmetic functions on F_q[x]: cycle types, μ, Λ, Λ₂ and d_k.
//!
//! Every function here depends only on the degrees and multiplicities of the
//! prime factors, captured by [`FactorPattern`]. The bulk enumerators in
//! [`crate::sieve`] produce patterns directly; single polynomials go through
//! [`crate::factor`].

use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::factor::factor;
use crate::poly::Poly;

/// Multiset of `(degree, multiplicity)` pairs, one per distinct monic prime
/// factor, sorted.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FactorPattern {
    parts: SmallVec<[(u16, u16); 6]>,
}

impl FactorPattern {
    pub fn from_parts<I: IntoIterator<Item = (u16, u16)>>(parts: I) -> Self {
        let mut parts: SmallVec<[(u16, u16); 6]> = parts.into_iter().collect();
        parts.sort_unstable();
        FactorPattern { parts }
    }

    /// Pattern of a single prime of degree `d`.
    pub fn prime(d: u16) -> Self {
        FactorPattern { parts: smallvec::smallvec![(d, 1)] }
    }

    pub(crate) fn clear(&mut self) {
        self.parts.clear();
    }

    #[inline]
    pub(crate) fn push_part(&mut self, d: u16, e: u16) {
        self.parts.push((d, e));
    }

    #[inline]
    pub(crate) fn bump_last(&mut self) {
        if let Some(last) = self.parts.last_mut() {
            last.1 += 1;
        }
    }

    pub(crate) fn normalize(&mut self) {
        if self.parts.len() > 1 {
            self.parts.sort_unstable();
        }
    }

    pub fn parts(&self) -> &[(u16, u16)] {
        &self.parts
    }

    pub fn degree(&self) -> usize {
        self.parts.iter().map(|&(d, e)| d as usize * e as usize).sum()
    }

    pub fn is_squarefree(&self) -> bool {
        self.parts.iter().all(|&(_, e)| e == 1)
    }

    pub fn is_prime(&self) -> bool {
        self.parts.len() == 1 && self.parts[0].1 == 1
    }

    pub fn mobius(&self) -> i8 {
        if self.is_squarefree() {
            if self.parts.len().is_multiple_of(2) {
                1
            } else {
                -1
            }
        } else {
            0
        }
    }

    /// deg P if the polynomial is a power of the prime P, else 0.
    pub fn von_mangoldt(&self) -> u64 {
        match self.parts.as_slice() {
            [(d, _)] => *d as u64,
            _ => 0,
        }
    }

    /// Λ₂ = Λ∗Λ + deg·Λ, by convolution over the divisor lattice.
    pub fn von_mangoldt2(&self) -> u64 {
        let deg = self.degree() as u64;
        let conv: u64 = self.divisor_exponents().map(|e| lambda_of(self, &e) * lambda_of(self, &self.complement(&e))).sum();
        conv + deg * self.von_mangoldt()
    }

    /// Λ₂ = μ∗deg², the second defining expression.
    pub fn von_mangoldt2_mobius(&self) -> i64 {
        self.divisor_exponents()
            .map(|e| {
                let mu = if e.iter().all(|&x| x <= 1) {
                    if e.iter().filter(|&&x| x == 1).count() % 2 == 0 {
                        1
                    } else {
                        -1
                    }
                } else {
                    0
                };
                let rest = self.complement(&e);
                let d: i64 = rest.iter().zip(&self.parts).map(|(&k, &(deg, _))| k as i64 * deg as i64).sum();
                mu * d * d
            })
            .sum()
    }

    /// d_k: Π binom(e + k - 1, k - 1).
    pub fn divisor_k(&self, k: u32) -> u64 {
        assert!(k >= 1, "d_k needs k >= 1");
        self.parts.iter().map(|&(_, e)| binomial(e as u64 + k as u64 - 1, k as u64 - 1) as u64).product()
    }

    /// Cycle type for a polynomial of total degree `self.degree()`.
    pub fn cycle_type(&self) -> CycleType {
        let n = self.degree();
        let mut lambda = vec![0u32; n];
        for &(d, e) in &self.parts {
            lambda[d as usize - 1] += e as u32;
        }
        CycleType { n, lambda }
    }

    /// Exponent vectors of all divisors.
    fn divisor_exponents(&self) -> impl Iterator<Item = Vec<u16>> + '_ {
        let total: usize = self.parts.iter().map(|&(_, e)| e as usize + 1).product();
        (0..total).map(move |mut idx| {
            self.parts
                .iter()
                .map(|&(_, e)| {
                    let r = (idx % (e as usize + 1)) as u16;
                    idx /= e as usize + 1;
                    r
                })
                .collect()
        })
    }

    fn complement(&self, e: &[u16]) -> Vec<u16> {
        e.iter().zip(&self.parts).map(|(&k, &(_, m))| m - k).collect()
    }
}

fn lambda_of(p: &FactorPattern, e: &[u16]) -> u64 {
    let mut nz = e.iter().zip(&p.parts).filter(|(&k, _)| k > 0);
    match (nz.next(), nz.next()) {
        (Some((_, &(d, _))), None) => d as u64,
        _ => 0,
    }
}

/// λ(f): `lambda[j-1]` counts prime factors of degree j, with multiplicity.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CycleType {
    pub n: usize,
    pub lambda: Vec<u32>,
}

impl CycleType {
    pub fn new(lambda: Vec<u32>) -> Result<Self> {
        let n = lambda.len();
        let total: usize = lambda.iter().enumerate().map(|(j, &l)| (j + 1) * l as usize).sum();
        if total != n || n == 0 {
            return Err(Error::InvalidPartition(format!("{lambda:?} does not partition {n}")));
        }
        Ok(CycleType { n, lambda })
    }

    /// The n-cycle class (0, …, 0, 1).
    pub fn n_cycle(n: usize) -> Self {
        let mut lambda = vec![0; n];
        lambda[n - 1] = 1;
        CycleType { n, lambda }
    }

    /// z_λ = Π j^{λ_j} λ_j!, so that p(λ) = 1 / z_λ.
    pub fn centralizer_order(&self) -> u128 {
        self.lambda
            .iter()
            .enumerate()
            .map(|(j, &l)| (j as u128 + 1).pow(l) * factorial(l as u128))
            .product()
    }

    /// Cauchy's formula: probability that a uniform permutation of n letters
    /// has this cycle type.
    pub fn probability(&self) -> f64 {
        1.0 / self.centralizer_order() as f64
    }

    /// Compact label like "1^2 2^1".
    pub fn label(&self) -> String {
        self.lambda
            .iter()
            .enumerate()
            .filter(|(_, &l)| l > 0)
            .map(|(j, l)| format!("{}^{}", j + 1, l))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// All cycle types of n, in a fixed order.
pub fn partitions(n: usize) -> Vec<CycleType> {
    fn rec(rem: usize, max: usize, cur: &mut Vec<u32>, out: &mut Vec<CycleType>, n: usize) {
        if rem == 0 {
            out.push(CycleType { n, lambda: cur.clone() });
            return;
        }
        for part in (1..=max.min(rem)).rev() {
            cur[part - 1] += 1;
            rec(rem - part, part, cur, out, n);
            cur[part - 1] -= 1;
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        rec(n, n, &mut vec![0; n], &mut out, n);
    }
    out
}

pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn factorial(n: u128) -> u128 {
    (1..=n).product()
}

/// Necklace count of monic irreducibles: (1/n) Σ_{d|n} μ(d) q^{n/d}.
pub fn necklace_count(q: u64, n: u32) -> u128 {
    assert!(n >= 1);
    let s: i128 = (1..=n)
        .filter(|d| n.is_multiple_of(*d))
        .map(|d| crate::field::int_mobius(d as u64) as i128 * (q as i128).pow(n / d))
        .sum();
    (s / n as i128) as u128
}

/// Which route computes μ.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MobiusBackend {
    Factorization,
    /// μ(f) = (-1)^{deg f} χ₂(disc f), odd q only.
    Pellet,
}

pub fn mobius(f: &Poly, backend: MobiusBackend) -> Result<i8> {
    if f.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    match backend {
        MobiusBackend::Factorization => Ok(factor(f)?.pattern().mobius()),
        MobiusBackend::Pellet => {
            let ctx = f.ctx();
            if !ctx.is_odd() {
                return Err(Error::EvenCharacteristic);
            }
            let n = f.degree().unwrap();
            let chi = ctx.quadratic_character(f.discriminant()?)?;
            Ok(if n.is_multiple_of(2) { chi } else { -chi })
        }
    }
}

/// Λ(f) = deg P if monic(f) = P^k, else 0. Non-monic input is normalized.
pub fn von_mangoldt(f: &Poly) -> Result<u64> {
    Ok(factor(f)?.pattern().von_mangoldt())
}

pub fn von_mangoldt2(f: &Poly) -> Result<u64> {
    if f.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if !f.is_monic() {
        return Err(Error::NotMonic);
    }
    Ok(factor(f)?.pattern().von_mangoldt2())
}

pub fn divisor_k(f: &Poly, k: u32) -> Result<u64> {
    if f.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if !f.is_monic() {
        return Err(Error::NotMonic);
    }
    if k == 0 {
        return Err(Error::InvalidParameter("d_k needs k >= 1".into()));
    }
    Ok(factor(f)?.pattern().divisor_k(k))
}

pub fn cycle_type(f: &Poly) -> Result<CycleType> {
    match f.degree() {
        None => Err(Error::ZeroPolynomial),
        Some(0) => Err(Error::ConstantPolynomial),
        Some(_) => Ok(factor(f)?.pattern().cycle_type()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldCtx;

    fn poly(ctx: &FieldCtx, c: &[i64]) -> Poly {
        Poly::from_i64s(ctx, c)
    }

    #[test]
    fn cycle_type_examples() {
        let f3 = FieldCtx::new(3).unwrap();
        let f = Poly::x(&f3).mul(&poly(&f3, &[1, 1])).mul(&poly(&f3, &[1, 0, 1]));
        assert_eq!(cycle_type(&f).unwrap().lambda, vec![2, 1, 0, 0]);
        assert_eq!(cycle_type(&poly(&f3, &[1, 0, 1])).unwrap(), CycleType::n_cycle(2));
        assert_eq!(cycle_type(&Poly::x(&f3).pow(2)).unwrap().lambda, vec![2, 0]);
        assert_eq!(cycle_type(&Poly::one(&f3)).unwrap_err(), Error::ConstantPolynomial);
    }

    #[test]
    fn mobius_examples() {
        for p in [3u64, 5, 7] {
            let ctx = FieldCtx::new(p).unwrap();
            let x = Poly::x(&ctx);
            for b in [MobiusBackend::Factorization, MobiusBackend::Pellet] {
                assert_eq!(mobius(&x, b).unwrap(), -1);
                assert_eq!(mobius(&x.pow(2), b).unwrap(), 0);
            }
        }
        let f5 = FieldCtx::new(5).unwrap();
        let f = poly(&f5, &[0, 1, 1]);
        assert_eq!(f.discriminant().unwrap(), 1);
        assert_eq!(mobius(&f, MobiusBackend::Factorization).unwrap(), 1);
        assert_eq!(mobius(&f, MobiusBackend::Pellet).unwrap(), 1);
        let f2 = FieldCtx::new(2).unwrap();
        assert_eq!(mobius(&Poly::x(&f2), MobiusBackend::Pellet).unwrap_err(), Error::EvenCharacteristic);
        assert_eq!(mobius(&Poly::zero(&f5), MobiusBackend::Factorization).unwrap_err(), Error::ZeroPolynomial);
    }

    #[test]
    fn von_mangoldt_examples() {
        let f5 = FieldCtx::new(5).unwrap();
        let x = Poly::x(&f5);
        assert_eq!(von_mangoldt(&x.pow(3)).unwrap(), 1);
        assert_eq!(von_mangoldt(&poly(&f5, &[2, 0, 1])).unwrap(), 2);
        assert_eq!(von_mangoldt(&x.mul(&poly(&f5, &[1, 1]))).unwrap(), 0);
        // non-monic input is normalized first
        assert_eq!(von_mangoldt(&poly(&f5, &[4, 0, 2])).unwrap(), 2);
    }

    #[test]
    fn von_mangoldt2_examples() {
        let f5 = FieldCtx::new(5).unwrap();
        let x = Poly::x(&f5);
        let f = x.mul(&poly(&f5, &[1, 1]));
        assert_eq!(von_mangoldt2(&f).unwrap(), 2);
        let irr = poly(&f5, &[2, 0, 1]);
        assert_eq!(von_mangoldt2(&irr).unwrap(), 4);
        let f3 = f.mul(&poly(&f5, &[2, 1]));
        assert_eq!(von_mangoldt2(&f3).unwrap(), 0);
        assert_eq!(von_mangoldt2(&poly(&f5, &[0, 2])).unwrap_err(), Error::NotMonic);
    }

    #[test]
    fn von_mangoldt2_routes_agree_on_patterns() {
        // both defining expressions, over every pattern of degree <= 8 with up to 3 primes
        for d1 in 1..4u16 {
            for e1 in 1..4u16 {
                assert_eq!(FactorPattern::from_parts([(d1, e1)]).von_mangoldt2() as i64,
                           FactorPattern::from_parts([(d1, e1)]).von_mangoldt2_mobius());
                for d2 in 1..4u16 {
                    for e2 in 1..3u16 {
                        for extra in [None, Some((2u16, 1u16))] {
                            let mut parts = vec![(d1, e1), (d2, e2)];
                            parts.extend(extra);
                            let pat = FactorPattern::from_parts(parts);
                            assert_eq!(pat.von_mangoldt2() as i64, pat.von_mangoldt2_mobius(), "{pat:?}");
                        }
                    }
                }
            }
        }
        // prime power P^a: d^2 (2a - 1)
        assert_eq!(FactorPattern::from_parts([(3, 2)]).von_mangoldt2(), 27);
        // P^a R^b: 2 deg P deg R
        assert_eq!(FactorPattern::from_parts([(2, 3), (5, 1)]).von_mangoldt2(), 20);
    }

    #[test]
    fn divisor_examples() {
        let f7 = FieldCtx::new(7).unwrap();
        let x = Poly::x(&f7);
        assert_eq!(divisor_k(&x.pow(2), 2).unwrap(), 3);
        assert_eq!(divisor_k(&poly(&f7, &[1, 0, 1]), 2).unwrap(), 2);
        assert_eq!(divisor_k(&x, 3).unwrap(), 3);
        assert_eq!(divisor_k(&x, 1).unwrap(), 1);
    }

    #[test]
    fn cauchy_formula() {
        for n in 1..=8 {
            let parts = partitions(n);
            let sum: f64 = parts.iter().map(|l| l.probability()).sum();
            assert!((sum - 1.0).abs() < 1e-12);
            // exact: Σ n!/z_λ = n!
            let nf = factorial(n as u128);
            assert_eq!(parts.iter().map(|l| nf / l.centralizer_order()).sum::<u128>(), nf);
            assert_eq!(CycleType::n_cycle(n).centralizer_order(), n as u128);
            let mut id = vec![0; n];
            id[0] = n as u32;
            assert_eq!(CycleType::new(id).unwrap().centralizer_order(), nf);
        }
        assert_eq!(partitions(5).len(), 7);
        assert!(CycleType::new(vec![1, 1]).is_err());
    }

    #[test]
    fn necklace_values() {
        assert_eq!(necklace_count(2, 3), 2);
        assert_eq!(necklace_count(3, 2), 3);
        assert_eq!(necklace_count(5, 1), 5);
        assert_eq!(necklace_count(2, 4), 3);
    }
}
