//! Factorization over F_p: squarefree decomposition, distinct-degree
//! factorization and Cantor–Zassenhaus equal-degree splitting.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith::FactorPattern;
use crate::error::{Error, Result};
use crate::poly::Poly;

/// Seed used by [`factor`] when the caller does not supply a generator.
pub const DEFAULT_SPLIT_SEED: u64 = 0x5eed;

/// `unit · Π P_i^{e_i}` with monic irreducible `P_i` in canonical order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    pub unit: u32,
    pub factors: Vec<(Poly, u32)>,
}

impl Factorization {
    /// Multiplies the factorization back out.
    pub fn reconstruct(&self, ctx: &crate::field::FieldCtx) -> Poly {
        self.factors
            .iter()
            .fold(Poly::constant(ctx, self.unit), |acc, (p, e)| acc.mul(&p.pow(*e as u64)))
    }

    pub fn pattern(&self) -> FactorPattern {
        FactorPattern::from_parts(self.factors.iter().map(|(p, e)| (p.degree().unwrap() as u16, *e as u16)))
    }
}

/// Factors `f` with the default splitting seed.
pub fn factor(f: &Poly) -> Result<Factorization> {
    factor_with_rng(f, &mut ChaCha8Rng::seed_from_u64(DEFAULT_SPLIT_SEED))
}

pub fn factor_with_rng<R: Rng + ?Sized>(f: &Poly, rng: &mut R) -> Result<Factorization> {
    if f.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let unit = f.lc();
    let f = f.monic()?;
    let mut factors = Vec::new();
    for (part, mult) in squarefree_decomposition(&f)? {
        for (block, d) in distinct_degree(&part)? {
            for p in equal_degree_split(&block, d, rng)? {
                factors.push((p, mult));
            }
        }
    }
    factors.sort_by(|a, b| a.0.canonical_cmp(&b.0).then(a.1.cmp(&b.1)));
    Ok(Factorization { unit, factors })
}

/// Degrees and multiplicities of the prime factors, without splitting
/// equal-degree blocks.
pub fn factor_pattern(f: &Poly) -> Result<FactorPattern> {
    if f.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let f = f.monic()?;
    let mut parts = Vec::new();
    for (part, mult) in squarefree_decomposition(&f)? {
        for (block, d) in distinct_degree(&part)? {
            let count = block.degree().unwrap() / d;
            parts.extend(std::iter::repeat_n((d as u16, mult as u16), count));
        }
    }
    Ok(FactorPattern::from_parts(parts))
}

/// Squarefree decomposition of a monic polynomial: pairs `(g, m)` with each
/// `g` squarefree, pairwise coprime, and `f = Π g^m`.
pub fn squarefree_decomposition(f: &Poly) -> Result<Vec<(Poly, u32)>> {
    let ctx = f.ctx().clone();
    let p = ctx.p();
    let mut out = Vec::new();
    if f.degree().ok_or(Error::ZeroPolynomial)? == 0 {
        return Ok(out);
    }
    let one = Poly::one(&ctx);
    let mut c = f.gcd(&f.derivative())?;
    let mut w = f.divrem(&c)?.0;
    let mut i = 1u32;
    while w != one {
        let y = w.gcd(&c)?;
        let fac = w.divrem(&y)?.0;
        if fac != one {
            out.push((fac, i));
        }
        w = y;
        c = c.divrem(&w)?.0;
        i += 1;
    }
    if c != one {
        // c is a p-th power: coefficients sit at multiples of p, and the
        // p-th root of a prime-field element is itself.
        let root = Poly::from_coeffs(&ctx, c.coeffs().iter().step_by(p as usize).copied().collect());
        for (g, m) in squarefree_decomposition(&root)? {
            out.push((g, m * p));
        }
    }
    out.sort_by_key(|a| a.1);
    Ok(out)
}

/// Distinct-degree factorization of a monic squarefree polynomial: pairs
/// `(g, d)` where `g` is the product of all irreducible factors of degree `d`.
pub fn distinct_degree(f: &Poly) -> Result<Vec<(Poly, usize)>> {
    let ctx = f.ctx().clone();
    let q = ctx.p() as u64;
    let mut out = Vec::new();
    let mut rest = f.clone();
    let x = Poly::x(&ctx);
    let mut h = x.rem(&rest)?;
    let mut d = 1;
    while rest.degree().unwrap_or(0) >= 2 * d {
        h = h.powmod(q, &rest)?;
        let g = h.sub(&x).gcd(&rest)?;
        if !g.is_constant() {
            rest = rest.divrem(&g)?.0;
            h = h.rem(&rest)?;
            out.push((g, d));
        }
        d += 1;
    }
    if let Some(dr) = rest.degree() {
        if dr > 0 {
            out.push((rest, dr));
        }
    }
    Ok(out)
}

/// Splits a monic squarefree product of irreducibles of degree `d` into its
/// factors (Cantor–Zassenhaus; trace map in characteristic 2).
pub fn equal_degree_split<R: Rng + ?Sized>(f: &Poly, d: usize, rng: &mut R) -> Result<Vec<Poly>> {
    let n = f.degree().ok_or(Error::ZeroPolynomial)?;
    if n == d {
        return Ok(vec![f.clone()]);
    }
    let ctx = f.ctx().clone();
    let q = ctx.p() as u64;
    loop {
        let a = Poly::from_coeffs(&ctx, (0..n).map(|_| rng.random_range(0..ctx.p())).collect());
        if a.is_constant() {
            continue;
        }
        let b = if q == 2 {
            // T(a) = a + a^2 + ... + a^{2^{d-1}}
            let mut t = a.rem(f)?;
            let mut acc = t.clone();
            for _ in 1..d {
                t = t.mulmod(&t, f)?;
                acc = acc.add(&t);
            }
            acc
        } else {
            // a^{(q^d - 1)/2} = (a · a^q ⋯ a^{q^{d-1}})^{(q-1)/2}
            let mut conj = a.rem(f)?;
            let mut norm = conj.clone();
            for _ in 1..d {
                conj = conj.powmod(q, f)?;
                norm = norm.mulmod(&conj, f)?;
            }
            norm.powmod((q - 1) / 2, f)?.sub(&Poly::one(&ctx))
        };
        if b.is_zero() {
            continue;
        }
        let g = b.gcd(f)?;
        let dg = g.degree().unwrap();
        if dg > 0 && dg < n {
            let h = f.divrem(&g)?.0;
            let mut out = equal_degree_split(&g, d, rng)?;
            out.extend(equal_degree_split(&h, d, rng)?);
            return Ok(out);
        }
    }
}

/// Rabin's test: `x^{q^n} ≡ x (mod f)` and `gcd(x^{q^{n/r}} - x, f) = 1` for
/// each prime `r | n`. Independent of [`factor`].
pub fn is_irreducible(f: &Poly) -> Result<bool> {
    let n = f.degree().ok_or(Error::ZeroPolynomial)?;
    if n == 0 {
        return Ok(false);
    }
    if n == 1 {
        return Ok(true);
    }
    let f = f.monic()?;
    let ctx = f.ctx().clone();
    let q = ctx.p() as u64;
    let x = Poly::x(&ctx);
    let maximal: Vec<usize> = crate::field::prime_factors(n as u64).into_iter().map(|r| n / r as usize).collect();
    let mut h = x.clone();
    for k in 1..=n {
        h = h.powmod(q, &f)?;
        if maximal.contains(&k) && !h.sub(&x).gcd(&f)?.is_constant() {
            return Ok(false);
        }
    }
    Ok(h == x)
}
