//! Monic polynomials, short intervals, arithmetic progressions mod x^k and
//! the reversal map.
//!
//! Monic polynomials of degree n are indexed by the integer whose base-q
//! digits are the coefficients of x^0, …, x^{n-1} (little-endian). Index
//! ranges are the unit of sharding everywhere in the crate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::FieldCtx;
use crate::poly::Poly;

/// Default cap on the number of polynomials a single enumeration may visit.
pub const DEFAULT_BUDGET: u128 = 100_000_000;

/// q^n as u128, saturating.
pub fn count_monic(q: u32, n: usize) -> u128 {
    (q as u128).checked_pow(n as u32).unwrap_or(u128::MAX)
}

pub fn check_budget(needed: u128, budget: u128) -> Result<()> {
    if needed > budget {
        Err(Error::BudgetExceeded { needed, budget })
    } else {
        Ok(())
    }
}

/// Monic polynomial of degree `n` with the given index.
pub fn monic_from_index(ctx: &FieldCtx, n: usize, mut idx: u64) -> Poly {
    let q = ctx.p() as u64;
    let mut c = Vec::with_capacity(n + 1);
    for _ in 0..n {
        c.push((idx % q) as u32);
        idx /= q;
    }
    c.push(1);
    Poly::from_coeffs(ctx, c)
}

/// Index of a monic polynomial among those of its degree.
pub fn index_of_monic(f: &Poly) -> Result<u64> {
    if !f.is_monic() {
        return Err(Error::NotMonic);
    }
    let q = f.ctx().p() as u64;
    let n = f.degree().unwrap();
    Ok(f.coeffs()[..n].iter().rev().fold(0u64, |acc, &c| acc * q + c as u64))
}

/// Every monic polynomial of degree `n`, in index order, starting at `start`.
pub struct MonicIter {
    ctx: FieldCtx,
    digits: Vec<u32>,
    next: u64,
    end: u64,
}

impl Iterator for MonicIter {
    type Item = Poly;

    fn next(&mut self) -> Option<Poly> {
        if self.next >= self.end {
            return None;
        }
        let mut c = self.digits.clone();
        c.push(1);
        let f = Poly::from_coeffs(&self.ctx, c);
        self.next += 1;
        let p = self.ctx.p();
        for d in self.digits.iter_mut() {
            *d += 1;
            if *d < p {
                break;
            }
            *d = 0;
        }
        Some(f)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let r = (self.end - self.next) as usize;
        (r, Some(r))
    }
}

pub fn enumerate_monic(ctx: &FieldCtx, n: usize, budget: u128) -> Result<MonicIter> {
    enumerate_monic_range(ctx, n, 0, u64::MAX, budget)
}

/// The shard `[start, end)` of the index order (clamped to q^n).
pub fn enumerate_monic_range(ctx: &FieldCtx, n: usize, start: u64, end: u64, budget: u128) -> Result<MonicIter> {
    let total = count_monic(ctx.p(), n);
    check_budget(total, budget)?;
    let total = total as u64;
    let start = start.min(total);
    let f = monic_from_index(ctx, n, start.min(total.saturating_sub(1)));
    Ok(MonicIter { ctx: ctx.clone(), digits: f.coeffs()[..n].to_vec(), next: start, end: end.min(total) })
}

/// Uniform monic polynomial of degree `n`.
pub fn sample_monic<R: Rng + ?Sized>(ctx: &FieldCtx, n: usize, rng: &mut R) -> Poly {
    let mut c: Vec<u32> = (0..n).map(|_| rng.random_range(0..ctx.p())).collect();
    c.push(1);
    Poly::from_coeffs(ctx, c)
}

/// Generator for worker `worker` of a run seeded with `seed`: the same
/// ChaCha key with the worker index as stream number.
pub fn stream_rng(seed: u64, worker: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(worker);
    rng
}

/// The short interval I(A;h) = { f monic, deg f = deg A, deg(f - A) <= h }.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntervalSpec {
    center: Poly,
    h: usize,
}

impl IntervalSpec {
    pub fn new(center: Poly, h: usize) -> Result<Self> {
        let n = center.degree().ok_or(Error::ZeroPolynomial)?;
        if !center.is_monic() {
            return Err(Error::InvalidInterval("center must be monic".into()));
        }
        if h >= n {
            return Err(Error::InvalidInterval(format!("need 0 <= h < n, got h = {h}, n = {n}")));
        }
        Ok(IntervalSpec { center, h })
    }

    pub fn center(&self) -> &Poly {
        &self.center
    }

    pub fn h(&self) -> usize {
        self.h
    }

    pub fn n(&self) -> usize {
        self.center.degree().unwrap()
    }

    /// H = q^{h+1}.
    pub fn size(&self) -> u64 {
        (self.center.ctx().p() as u64).pow(self.h as u32 + 1)
    }

    pub fn contains(&self, f: &Poly) -> bool {
        f.is_monic() && f.degree() == self.center.degree() && f.sub(&self.center).degree().is_none_or(|d| d <= self.h)
    }

    /// The canonical class representative: the center with coefficients of
    /// degree 0..=h zeroed.
    pub fn representative(&self) -> Poly {
        let mut c = self.center.coeffs().to_vec();
        for v in c.iter_mut().take(self.h + 1) {
            *v = 0;
        }
        Poly::from_coeffs(self.center.ctx(), c)
    }

    /// Index of the class among the q^{n-h-1} classes of M_n.
    pub fn class_index(&self) -> u64 {
        let q = self.center.ctx().p() as u64;
        self.center.coeffs()[self.h + 1..self.n()].iter().rev().fold(0u64, |acc, &c| acc * q + c as u64)
    }

    /// Members in the order of the low-coefficient index.
    pub fn members(&self) -> impl Iterator<Item = Poly> + '_ {
        let ctx = self.center.ctx().clone();
        let rep = self.representative();
        let h = self.h;
        (0..self.size()).map(move |i| {
            let mut c = rep.coeffs().to_vec();
            let low = monic_from_index(&ctx, h + 1, i);
            c[..=h].copy_from_slice(&low.coeffs()[..=h]);
            Poly::from_coeffs(&ctx, c)
        })
    }
}

/// Alias matching the operation name.
pub fn interval_members(spec: &IntervalSpec) -> impl Iterator<Item = Poly> + '_ {
    spec.members()
}

/// One representative per class of M_n under deg(A - A') <= h, namely
/// x^{h+1}·B for B running over M_{n-h-1}.
pub fn interval_representatives(ctx: &FieldCtx, n: usize, h: usize) -> Result<impl Iterator<Item = IntervalSpec>> {
    if h >= n {
        return Err(Error::InvalidInterval(format!("need 0 <= h < n, got h = {h}, n = {n}")));
    }
    let k = n - h - 1;
    let classes = (ctx.p() as u64).pow(k as u32);
    let ctx = ctx.clone();
    Ok((0..classes).map(move |i| IntervalSpec { center: monic_from_index(&ctx, k, i).shift(h + 1), h }))
}

/// The interval with the given class index.
pub fn interval_by_index(ctx: &FieldCtx, n: usize, h: usize, class: u64) -> Result<IntervalSpec> {
    if h >= n {
        return Err(Error::InvalidInterval(format!("need 0 <= h < n, got h = {h}, n = {n}")));
    }
    IntervalSpec::new(monic_from_index(ctx, n - h - 1, class).shift(h + 1), h)
}

/// θ_n(f) = x^n f(1/x): coefficient j of the result is coefficient n - j of f.
pub fn reversal(f: &Poly, n: usize) -> Result<Poly> {
    if let Some(d) = f.degree() {
        if d > n {
            return Err(Error::DegreeExceedsN { degree: d, n });
        }
    }
    let c: Vec<u32> = (0..=n).map(|j| f.coeff(n - j)).collect();
    Ok(Poly::from_coeffs(f.ctx(), c))
}

/// A residue class `{ g : deg g <= max_degree, g ≡ residue mod modulus }`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ApClass {
    pub modulus: Poly,
    pub residue: Poly,
    pub max_degree: usize,
}

impl ApClass {
    pub fn members(&self) -> impl Iterator<Item = Poly> + '_ {
        let ctx = self.modulus.ctx().clone();
        let dm = self.modulus.degree().unwrap();
        let free = self.max_degree + 1 - dm;
        let count = (ctx.p() as u64).pow(free as u32);
        (0..count).map(move |i| {
            let s = monic_from_index(&ctx, free, i);
            let s = Poly::from_coeffs(&ctx, s.coeffs()[..free].to_vec());
            self.residue.add(&s.mul(&self.modulus))
        })
    }
}

/// Both descriptions of the interval I(x^{h+1}B; h) and its image under θ_n,
/// the progression `g ≡ θ_{n-h-1}(B) mod x^{n-h}` with deg g <= n.
pub fn interval_to_ap(b: &Poly, n: usize, h: usize) -> Result<(IntervalSpec, ApClass)> {
    if h + 2 > n {
        return Err(Error::DegreeMismatch(format!("need 0 <= h <= n - 2, got h = {h}, n = {n}")));
    }
    if !b.is_monic() || b.degree() != Some(n - h - 1) {
        return Err(Error::DegreeMismatch(format!("B must be monic of degree {}", n - h - 1)));
    }
    let ctx = b.ctx();
    let interval = IntervalSpec::new(b.shift(h + 1), h)?;
    let ap = ApClass { modulus: Poly::monomial(ctx, n - h), residue: reversal(b, n - h - 1)?, max_degree: n };
    Ok((interval, ap))
}

/// Checks elementwise that θ_n maps the interval onto the progression.
pub fn verify_interval_ap_bijection(b: &Poly, n: usize, h: usize) -> Result<bool> {
    let (interval, ap) = interval_to_ap(b, n, h)?;
    let mut image: Vec<Vec<u32>> = interval.members().map(|f| reversal(&f, n).map(|g| g.coeffs().to_vec())).collect::<Result<_>>()?;
    let mut target: Vec<Vec<u32>> = ap.members().map(|g| g.coeffs().to_vec()).collect();
    image.sort();
    target.sort();
    let injective = image.windows(2).all(|w| w[0] != w[1]);
    Ok(injective && image == target)
}
