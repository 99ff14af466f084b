//! Dense polynomials over a prime field.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};
use crate::field::FieldCtx;

/// A polynomial over F_p, coefficients lowest degree first.
///
/// The coefficient vector never has a trailing zero, so the zero polynomial
/// is the empty vector and `degree()` returns `None` for it.
#[derive(Clone, PartialEq, Eq)]
pub struct Poly {
    ctx: FieldCtx,
    coeffs: Vec<u32>,
}

impl Poly {
    pub fn zero(ctx: &FieldCtx) -> Self {
        Poly { ctx: ctx.clone(), coeffs: Vec::new() }
    }

    pub fn one(ctx: &FieldCtx) -> Self {
        Self::constant(ctx, 1)
    }

    pub fn constant(ctx: &FieldCtx, c: u32) -> Self {
        Self::from_coeffs(ctx, vec![c])
    }

    /// The monomial x^k.
    pub fn monomial(ctx: &FieldCtx, k: usize) -> Self {
        let mut c = vec![0; k + 1];
        c[k] = 1;
        Poly { ctx: ctx.clone(), coeffs: c }
    }

    pub fn x(ctx: &FieldCtx) -> Self {
        Self::monomial(ctx, 1)
    }

    /// Builds a polynomial from raw coefficients, reducing them mod p.
    pub fn from_coeffs(ctx: &FieldCtx, coeffs: Vec<u32>) -> Self {
        let p = ctx.p();
        let mut coeffs = coeffs;
        for c in coeffs.iter_mut() {
            if *c >= p {
                *c %= p;
            }
        }
        let mut f = Poly { ctx: ctx.clone(), coeffs };
        f.trim();
        f
    }

    pub fn from_i64s(ctx: &FieldCtx, coeffs: &[i64]) -> Self {
        Self::from_coeffs(ctx, coeffs.iter().map(|&c| ctx.from_i64(c)).collect())
    }

    /// Parses the comma-separated text format ("1,0,1" is 1 + x^2).
    pub fn parse(ctx: &FieldCtx, text: &str) -> Result<Self> {
        let err = |reason: &str| Error::Parse { text: text.to_string(), reason: reason.to_string() };
        if text.trim().is_empty() {
            return Err(err("empty coefficient list"));
        }
        let coeffs = text
            .split(',')
            .map(|tok| {
                let tok: String = tok.chars().filter(|c| !c.is_whitespace()).collect();
                tok.parse::<i64>().map(|v| ctx.from_i64(v)).map_err(|_| err("coefficient is not a decimal integer"))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_coeffs(ctx, coeffs))
    }

    /// The comma-separated text format, inverse of [`Poly::parse`].
    pub fn to_text(&self) -> String {
        if self.coeffs.is_empty() {
            return "0".to_string();
        }
        self.coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
    }

    fn trim(&mut self) {
        while self.coeffs.last() == Some(&0) {
            self.coeffs.pop();
        }
    }

    #[inline]
    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }

    #[inline]
    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    /// Coefficient of x^i (zero beyond the degree).
    #[inline]
    pub fn coeff(&self, i: usize) -> u32 {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    #[inline]
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Leading coefficient; zero for the zero polynomial.
    #[inline]
    pub fn lc(&self) -> u32 {
        self.coeffs.last().copied().unwrap_or(0)
    }

    pub fn is_monic(&self) -> bool {
        self.lc() == 1
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    /// |f| = q^deg f for nonzero f, 0 for the zero polynomial.
    pub fn norm(&self) -> u128 {
        match self.degree() {
            None => 0,
            Some(d) => (self.ctx.p() as u128).pow(d as u32),
        }
    }

    /// f scaled by the inverse of its leading coefficient.
    pub fn monic(&self) -> Result<Self> {
        let lc = self.lc();
        let inv = self.ctx.inv(lc).ok_or(Error::ZeroPolynomial)?;
        Ok(self.scale(inv))
    }

    pub fn scale(&self, c: u32) -> Self {
        let c = c % self.ctx.p();
        if c == 0 {
            return Self::zero(&self.ctx);
        }
        Poly { ctx: self.ctx.clone(), coeffs: self.coeffs.iter().map(|&a| self.ctx.mul(a, c)).collect() }
    }

    pub fn add(&self, other: &Poly) -> Self {
        self.check(other);
        let (long, short) = if self.coeffs.len() >= other.coeffs.len() { (self, other) } else { (other, self) };
        let mut c = long.coeffs.clone();
        for (a, &b) in c.iter_mut().zip(short.coeffs.iter()) {
            *a = self.ctx.add(*a, b);
        }
        let mut f = Poly { ctx: self.ctx.clone(), coeffs: c };
        f.trim();
        f
    }

    pub fn neg(&self) -> Self {
        Poly { ctx: self.ctx.clone(), coeffs: self.coeffs.iter().map(|&a| self.ctx.neg(a)).collect() }
    }

    pub fn sub(&self, other: &Poly) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Poly) -> Self {
        self.check(other);
        if self.is_zero() || other.is_zero() {
            return Self::zero(&self.ctx);
        }
        let coeffs = mul_slices(&self.ctx, &self.coeffs, &other.coeffs);
        let mut f = Poly { ctx: self.ctx.clone(), coeffs };
        f.trim();
        f
    }

    /// f · x^k.
    pub fn shift(&self, k: usize) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut c = vec![0; k];
        c.extend_from_slice(&self.coeffs);
        Poly { ctx: self.ctx.clone(), coeffs: c }
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(&self.ctx);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Euclidean division: `self = q·g + r` with `deg r < deg g`.
    pub fn divrem(&self, g: &Poly) -> Result<(Poly, Poly)> {
        self.check(g);
        let dg = g.degree().ok_or(Error::DivisionByZeroPoly)?;
        let ctx = &self.ctx;
        if self.coeffs.len() <= dg {
            return Ok((Self::zero(ctx), self.clone()));
        }
        let inv = ctx.inv(g.lc()).expect("nonzero leading coefficient");
        let mut r = self.coeffs.clone();
        let mut q = vec![0u32; r.len() - dg];
        for i in (dg..r.len()).rev() {
            let c = ctx.mul(r[i], inv);
            q[i - dg] = c;
            if c == 0 {
                continue;
            }
            let nc = ctx.neg(c);
            for (j, &gj) in g.coeffs.iter().enumerate() {
                let k = i - dg + j;
                r[k] = ctx.add(r[k], ctx.mul(nc, gj));
            }
        }
        r.truncate(dg);
        let mut q = Poly { ctx: ctx.clone(), coeffs: q };
        let mut r = Poly { ctx: ctx.clone(), coeffs: r };
        q.trim();
        r.trim();
        Ok((q, r))
    }

    pub fn rem(&self, g: &Poly) -> Result<Poly> {
        let dg = g.degree().ok_or(Error::DivisionByZeroPoly)?;
        if self.coeffs.len() <= dg {
            return Ok(self.clone());
        }
        let mut r = self.coeffs.clone();
        rem_in_place(&self.ctx, &mut r, &g.coeffs);
        let mut r = Poly { ctx: self.ctx.clone(), coeffs: r };
        r.trim();
        Ok(r)
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Poly) -> Result<Poly> {
        self.check(other);
        if self.is_zero() && other.is_zero() {
            return Err(Error::BothZero);
        }
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b)?;
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Inverse of `self` modulo `m`, or `None` when they share a factor.
    pub fn inverse_mod(&self, m: &Poly) -> Result<Option<Poly>> {
        self.check(m);
        if m.degree().ok_or(Error::DivisionByZeroPoly)? == 0 {
            return Ok(Some(Self::zero(&self.ctx)));
        }
        // extended Euclid tracking the coefficient of self
        let (mut r0, mut r1) = (m.clone(), self.rem(m)?);
        let (mut t0, mut t1) = (Self::zero(&self.ctx), Self::one(&self.ctx));
        while !r1.is_zero() {
            let (q, r) = r0.divrem(&r1)?;
            let t = t0.sub(&q.mul(&t1));
            (r0, r1) = (r1, r);
            (t0, t1) = (t1, t);
        }
        if r0.degree() != Some(0) {
            return Ok(None);
        }
        let inv = self.ctx.inv(r0.lc()).unwrap();
        Ok(Some(t0.scale(inv).rem(m)?))
    }

    /// Formal derivative.
    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::zero(&self.ctx);
        }
        let c = self.coeffs[1..]
            .iter()
            .enumerate()
            .map(|(i, &a)| self.ctx.mul(a, self.ctx.reduce(i as u64 + 1)))
            .collect();
        let mut f = Poly { ctx: self.ctx.clone(), coeffs: c };
        f.trim();
        f
    }

    /// Horner evaluation at a field element.
    pub fn eval(&self, x: u32) -> u32 {
        self.coeffs.iter().rev().fold(0, |acc, &c| self.ctx.add(self.ctx.mul(acc, x), c))
    }

    /// `self^e mod m`.
    pub fn powmod(&self, e: u64, m: &Poly) -> Result<Poly> {
        let dm = m.degree().ok_or(Error::DivisionByZeroPoly)?;
        let mut acc = Self::one(&self.ctx).rem(m)?;
        if e == 0 {
            return Ok(acc);
        }
        let mut base = self.rem(m)?;
        let mut e = e;
        let _ = dm;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mulmod(&base, m)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mulmod(&base, m)?;
            }
        }
        Ok(acc)
    }

    pub fn mulmod(&self, other: &Poly, m: &Poly) -> Result<Poly> {
        self.mul(other).rem(m)
    }

    /// Resultant Res(self, g) = lc(self)^deg g · Π g(α) over the roots α of self.
    pub fn resultant(&self, g: &Poly) -> Result<u32> {
        self.check(g);
        let ctx = &self.ctx;
        if self.is_zero() || g.is_zero() {
            return Ok(0);
        }
        let (mut a, mut b) = (self.clone(), g.clone());
        let mut acc = 1u32;
        loop {
            let da = a.degree().unwrap();
            let db = b.degree().unwrap();
            if db == 0 {
                return Ok(ctx.mul(acc, ctx.pow(b.lc(), da as u64)));
            }
            if da == 0 {
                return Ok(ctx.mul(acc, ctx.pow(a.lc(), db as u64)));
            }
            // Res(a, b) = (-1)^{da db} Res(b, a) = (-1)^{da db} lc(b)^{da - deg r} Res(b, r)
            let r = a.rem(&b)?;
            let Some(dr) = r.degree() else {
                return Ok(0);
            };
            if (da * db) % 2 == 1 {
                acc = ctx.neg(acc);
            }
            acc = ctx.mul(acc, ctx.pow(b.lc(), (da - dr) as u64));
            a = b;
            b = r;
        }
    }

    /// disc(f) = (-1)^{n(n-1)/2} Res(f, f′) / lc(f), with f′ taken at formal
    /// degree n - 1.
    pub fn discriminant(&self) -> Result<u32> {
        let n = match self.degree() {
            None => return Err(Error::ZeroPolynomial),
            Some(0) => return Err(Error::ConstantPolynomial),
            Some(n) => n,
        };
        let ctx = &self.ctx;
        let d = self.derivative();
        let Some(dd) = d.degree() else {
            return Ok(0);
        };
        // Sylvester determinant at formal degree n-1 picks up lc(f)^{n-1-deg f′}.
        let res = ctx.mul(self.resultant(&d)?, ctx.pow(self.lc(), (n - 1 - dd) as u64));
        let mut disc = ctx.mul(res, ctx.inv(self.lc()).unwrap());
        if (n * (n - 1) / 2) % 2 == 1 {
            disc = ctx.neg(disc);
        }
        Ok(disc)
    }

    /// Canonical order: by degree, then lexicographically from the leading
    /// coefficient down.
    pub fn canonical_cmp(&self, other: &Poly) -> Ordering {
        self.coeffs
            .len()
            .cmp(&other.coeffs.len())
            .then_with(|| self.coeffs.iter().rev().cmp(other.coeffs.iter().rev()))
    }

    fn check(&self, other: &Poly) {
        assert!(self.ctx == other.ctx, "{}", Error::FieldMismatch(self.ctx.p(), other.ctx.p()));
    }
}

/// Schoolbook product of coefficient slices (neither empty).
pub(crate) fn mul_slices(ctx: &FieldCtx, a: &[u32], b: &[u32]) -> Vec<u32> {
    let p = ctx.p() as u64;
    let mut out = vec![0u64; a.len() + b.len() - 1];
    if p < (1 << 24) && a.len().min(b.len()) < (1 << 15) {
        for (i, &ai) in a.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            let ai = ai as u64;
            for (o, &bj) in out[i..].iter_mut().zip(b) {
                *o += ai * bj as u64;
            }
        }
        out.into_iter().map(|v| (v % p) as u32).collect()
    } else {
        for (i, &ai) in a.iter().enumerate() {
            for (o, &bj) in out[i..].iter_mut().zip(b) {
                *o = (*o + ai as u64 * bj as u64 % p) % p;
            }
        }
        out.into_iter().map(|v| v as u32).collect()
    }
}

/// Reduces `r` modulo the nonzero polynomial `g` in place, truncating to the
/// remainder length (trailing zeros are left in place).
pub(crate) fn rem_in_place(ctx: &FieldCtx, r: &mut Vec<u32>, g: &[u32]) {
    let dg = g.len() - 1;
    if r.len() <= dg {
        return;
    }
    let inv = ctx.inv(g[dg]).expect("nonzero leading coefficient");
    for i in (dg..r.len()).rev() {
        let c = if inv == 1 { r[i] } else { ctx.mul(r[i], inv) };
        if c == 0 {
            continue;
        }
        let nc = ctx.neg(c);
        let base = i - dg;
        for (j, &gj) in g[..dg].iter().enumerate() {
            r[base + j] = ctx.add(r[base + j], ctx.mul(nc, gj));
        }
        r[i] = 0;
    }
    r.truncate(dg);
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} over {:?}", self, self.ctx)
    }
}

impl fmt::Display for Poly {
    /// Human-readable form, highest degree first.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match (i, c) {
                (0, c) => write!(f, "{c}")?,
                (1, 1) => write!(f, "x")?,
                (1, c) => write!(f, "{c}x")?,
                (i, 1) => write!(f, "x^{i}")?,
                (i, c) => write!(f, "{c}x^{i}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(p: u64) -> FieldCtx {
        FieldCtx::new(p).unwrap()
    }

    fn poly(p: &FieldCtx, c: &[i64]) -> Poly {
        Poly::from_i64s(p, c)
    }

    #[test]
    fn divrem_examples() {
        let f3 = ctx(3);
        let (q, r) = poly(&f3, &[1, 0, 0, 1]).divrem(&poly(&f3, &[1, 1])).unwrap();
        assert_eq!(q, poly(&f3, &[1, 2, 1]));
        assert!(r.is_zero());

        let f = poly(&f3, &[2, 1, 0, 2, 1]);
        let (q, r) = f.divrem(&Poly::one(&f3)).unwrap();
        assert_eq!(q, f);
        assert!(r.is_zero());

        let f5 = ctx(5);
        let (q, r) = poly(&f5, &[1, 0, 1]).divrem(&Poly::x(&f5)).unwrap();
        assert_eq!(q, Poly::x(&f5));
        assert_eq!(r, Poly::one(&f5));

        assert_eq!(f.divrem(&Poly::zero(&f3)).unwrap_err(), Error::DivisionByZeroPoly);
    }

    #[test]
    fn gcd_examples() {
        let f5 = ctx(5);
        let f = poly(&f5, &[3, 0, 2]);
        assert_eq!(f.gcd(&Poly::zero(&f5)).unwrap(), f.monic().unwrap());
        assert_eq!(poly(&f5, &[-1, 0, 1]).gcd(&poly(&f5, &[-1, 1])).unwrap(), poly(&f5, &[4, 1]));
        let f3 = ctx(3);
        assert_eq!(poly(&f3, &[1, 0, 1]).gcd(&poly(&f3, &[2, 0, 1])).unwrap(), Poly::one(&f3));
        assert_eq!(Poly::zero(&f3).gcd(&Poly::zero(&f3)).unwrap_err(), Error::BothZero);
    }

    #[test]
    fn quadratic_discriminant_all_coefficients_mod_7() {
        let f7 = ctx(7);
        for b in 0..7 {
            for c in 0..7 {
                let d = poly(&f7, &[c, b, 1]).discriminant().unwrap();
                assert_eq!(d, f7.from_i64(b * b - 4 * c), "b={b} c={c}");
                // non-monic: disc(a f) = a^{2n-2} disc(f)
                let d3 = poly(&f7, &[3 * c, 3 * b, 3]).discriminant().unwrap();
                assert_eq!(d3, f7.mul(d, 9 % 7));
            }
        }
    }

    #[test]
    fn cubic_discriminant_matches_depressed_formula() {
        // disc(x^3 + a x + b) = -4a^3 - 27b^2
        for p in [5u64, 7, 11, 13] {
            let f = ctx(p);
            for a in 0..p as i64 {
                for b in 0..p as i64 {
                    let d = poly(&f, &[b, a, 0, 1]).discriminant().unwrap();
                    assert_eq!(d, f.from_i64(-4 * a * a * a - 27 * b * b), "p={p} a={a} b={b}");
                }
            }
        }
        let f5 = ctx(5);
        assert_eq!(poly(&f5, &[1, 1, 0, 1]).discriminant().unwrap(), 4);
    }

    #[test]
    fn discriminant_vanishes_on_repeated_factor() {
        let f5 = ctx(5);
        let g = poly(&f5, &[1, 1]).mul(&poly(&f5, &[1, 1])).mul(&poly(&f5, &[2, 0, 1]));
        assert_eq!(g.discriminant().unwrap(), 0);
        let f3 = ctx(3);
        // derivative vanishes identically
        assert_eq!(poly(&f3, &[1, 0, 0, 1]).discriminant().unwrap(), 0);
        assert_eq!(Poly::one(&f3).discriminant().unwrap_err(), Error::ConstantPolynomial);
    }

    #[test]
    fn resultant_of_linear_factors() {
        // Res(x - a, x - b) = a - b... as lc^1 * g(a) = a - b
        let f7 = ctx(7);
        for a in 0..7 {
            for b in 0..7 {
                let r = poly(&f7, &[-a, 1]).resultant(&poly(&f7, &[-b, 1])).unwrap();
                assert_eq!(r, f7.from_i64(a - b));
            }
        }
    }

    #[test]
    fn text_format() {
        let f5 = ctx(5);
        let f = Poly::parse(&f5, "1,0,1").unwrap();
        assert_eq!(f, poly(&f5, &[1, 0, 1]));
        assert_eq!(f.to_text(), "1,0,1");
        assert_eq!(Poly::parse(&f5, " 1 , 0, 6 ").unwrap().to_text(), "1,0,1");
        assert_eq!(Poly::parse(&f5, "0").unwrap().to_text(), "0");
        assert_eq!(Poly::parse(&f5, "-1").unwrap().to_text(), "4");
        assert!(Poly::parse(&f5, "1,a").is_err());
        assert!(Poly::parse(&f5, "").is_err());
        assert_eq!(format!("{f}"), "x^2 + 1");
    }

    #[test]
    fn canonical_order() {
        let f3 = ctx(3);
        let a = poly(&f3, &[2, 1]);
        let b = poly(&f3, &[0, 0, 1]);
        let c = poly(&f3, &[1, 0, 1]);
        assert_eq!(a.canonical_cmp(&b), Ordering::Less);
        assert_eq!(b.canonical_cmp(&c), Ordering::Less);
        assert_eq!(c.canonical_cmp(&c), Ordering::Equal);
    }

    #[test]
    fn norm_and_monic() {
        let f5 = ctx(5);
        let f = poly(&f5, &[2, 2]);
        assert_eq!(f.norm(), 5);
        assert_eq!(f.monic().unwrap(), poly(&f5, &[1, 1]));
        assert_eq!(Poly::zero(&f5).monic().unwrap_err(), Error::ZeroPolynomial);
    }

    #[test]
    fn inverse_mod_examples() {
        let f7 = ctx(7);
        let m = poly(&f7, &[3, 1, 0, 2, 1]);
        for c in 1..40i64 {
            let a = poly(&f7, &[c % 7, c / 7, 1]);
            match a.inverse_mod(&m).unwrap() {
                Some(inv) => assert_eq!(a.mulmod(&inv, &m).unwrap(), Poly::one(&f7)),
                None => assert!(!a.gcd(&m).unwrap().is_constant()),
            }
        }
        let x = Poly::x(&f7);
        assert_eq!(x.inverse_mod(&x.pow(2)).unwrap(), None);
    }

    #[test]
    fn powmod_agrees_with_pow() {
        let f7 = ctx(7);
        let m = poly(&f7, &[3, 1, 0, 2, 1]);
        let b = poly(&f7, &[1, 5, 2]);
        for e in 0..20 {
            assert_eq!(b.powmod(e, &m).unwrap(), b.pow(e).rem(&m).unwrap());
        }
    }
}
