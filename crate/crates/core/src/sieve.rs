//! Bulk factor patterns by sieving.
//!
//! A short interval I(A;h) is the affine space A + P_{<=h}. For a monic
//! modulus M of degree m, the members divisible by M are `r ≡ -A (mod M)`
//! with `deg r <= h`: a coset of M·P_{<=h-m} when `m <= h + 1`, and at most
//! one polynomial otherwise. Sieving every prime power of degree at most
//! `n/2` leaves, for each member, a cofactor that is 1 or a single prime.

use crate::arith::FactorPattern;
use crate::ensembles::{check_budget, count_monic};
use crate::error::Result;
use crate::field::FieldCtx;
use crate::poly::Poly;

/// Largest block handed to the sieve at once when walking all of M_n.
const BLOCK_LIMIT: u64 = 1 << 20;

/// Monic irreducible polynomials by degree, stored flat without the leading 1.
#[derive(Clone, Debug)]
pub struct PrimeTable {
    ctx: FieldCtx,
    by_degree: Vec<Vec<u32>>,
}

impl PrimeTable {
    /// All monic primes of degree `1..=max_degree`.
    pub fn new(ctx: &FieldCtx, max_degree: usize, budget: u128) -> Result<Self> {
        check_budget(count_monic(ctx.p(), max_degree), budget)?;
        let mut table = PrimeTable { ctx: ctx.clone(), by_degree: vec![Vec::new()] };
        for d in 1..=max_degree {
            let mut sieve = PatternSieve::with_primes(table.clone(), d);
            let mut flat = Vec::new();
            let x_d = Poly::monomial(ctx, d);
            let p = ctx.p() as u64;
            sieve.sieve_raw(x_d.coeffs(), d - 1);
            for (idx, pat) in sieve.cells.iter().enumerate() {
                if pat.is_prime() {
                    let mut v = idx as u64;
                    for _ in 0..d {
                        flat.push((v % p) as u32);
                        v /= p;
                    }
                }
            }
            table.by_degree.push(flat);
        }
        Ok(table)
    }

    pub fn max_degree(&self) -> usize {
        self.by_degree.len() - 1
    }

    pub fn count(&self, d: usize) -> usize {
        if d == 0 {
            0
        } else {
            self.by_degree[d].len() / d
        }
    }

    /// Non-leading coefficients of the primes of degree `d`.
    pub fn primes(&self, d: usize) -> impl Iterator<Item = &[u32]> {
        self.by_degree[d].chunks_exact(d.max(1))
    }

    pub fn prime_polys(&self, d: usize) -> Vec<Poly> {
        self.primes(d)
            .map(|c| {
                let mut v = c.to_vec();
                v.push(1);
                Poly::from_coeffs(&self.ctx, v)
            })
            .collect()
    }
}

/// Reusable sieve for intervals of monic degree-`n` polynomials.
pub struct PatternSieve {
    ctx: FieldCtx,
    n: usize,
    primes: PrimeTable,
    cells: Vec<FactorPattern>,
    qpow: Vec<u64>,
    // scratch
    modulus: Vec<u32>,
    residue: Vec<u32>,
    digits: Vec<u32>,
    odometer: Vec<u32>,
}

impl PatternSieve {
    pub fn new(ctx: &FieldCtx, n: usize, budget: u128) -> Result<Self> {
        Ok(Self::with_primes(PrimeTable::new(ctx, n / 2, budget)?, n))
    }

    /// Uses an existing table; it must reach degree `n / 2`.
    pub fn with_primes(primes: PrimeTable, n: usize) -> Self {
        assert!(primes.max_degree() >= n / 2, "prime table too short for degree {n}");
        let ctx = primes.ctx.clone();
        let q = ctx.p() as u64;
        let qpow = (0..=n).map(|i| q.saturating_pow(i as u32)).collect();
        PatternSieve {
            ctx,
            n,
            primes,
            cells: Vec::new(),
            qpow,
            modulus: Vec::new(),
            residue: Vec::new(),
            digits: Vec::new(),
            odometer: Vec::new(),
        }
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn prime_table(&self) -> &PrimeTable {
        &self.primes
    }

    /// Patterns of every member of I(center; h), indexed by the base-q value
    /// of the coefficients of degree `0..=h`. The low coefficients of
    /// `center` are ignored.
    pub fn sieve(&mut self, center: &Poly, h: usize) -> &[FactorPattern] {
        assert!(center.is_monic() && center.degree() == Some(self.n) && h < self.n);
        self.sieve_raw(center.coeffs(), h);
        &self.cells
    }

    fn sieve_raw(&mut self, center: &[u32], h: usize) {
        let n = self.n;
        let size = self.qpow[h + 1] as usize;
        self.cells.resize_with(size, FactorPattern::default);
        for c in self.cells.iter_mut() {
            c.clear();
        }
        let mut rep = center.to_vec();
        for v in rep.iter_mut().take(h + 1) {
            *v = 0;
        }
        let primes = std::mem::take(&mut self.primes.by_degree);
        for d in 1..=n / 2 {
            for pc in primes[d].chunks_exact(d) {
                self.sieve_prime(&rep, pc, h);
            }
        }
        self.primes.by_degree = primes;
        for c in self.cells.iter_mut() {
            let rem = n - c.degree();
            if rem > 0 {
                c.push_part(rem as u16, 1);
            }
            c.normalize();
        }
    }

    fn sieve_prime(&mut self, rep: &[u32], prime: &[u32], h: usize) {
        let ctx = self.ctx.clone();
        let d = prime.len();
        self.modulus.clear();
        self.modulus.extend_from_slice(prime);
        self.modulus.push(1);
        let mut k = 1;
        while k * d <= self.n {
            if k > 1 {
                let next = crate::poly::mul_slices(&ctx, &self.modulus, &{
                    let mut v = prime.to_vec();
                    v.push(1);
                    v
                });
                self.modulus = next;
            }
            let m = k * d;
            neg_rem_monic(&ctx, rep, &self.modulus, &mut self.residue);
            let hit = if m <= h + 1 {
                self.coset_hits(h, k);
                true
            } else if self.residue[h + 1..].iter().all(|&c| c == 0) {
                let idx = self.index(&self.residue[..=h]);
                mark(&mut self.cells[idx], d as u16, k);
                true
            } else {
                false
            };
            if !hit {
                break;
            }
            k += 1;
        }
    }

    fn index(&self, digits: &[u32]) -> usize {
        digits.iter().zip(&self.qpow).map(|(&c, &w)| c as u64 * w).sum::<u64>() as usize
    }

    /// Marks every r = residue + modulus·s with deg s <= h - deg(modulus).
    fn coset_hits(&mut self, h: usize, k: usize) {
        let p = self.ctx.p();
        let m = self.modulus.len() - 1;
        let d = (m / k) as u16;
        let free = h + 1 - m;
        self.digits.clear();
        self.digits.extend_from_slice(&self.residue);
        self.digits.resize(h + 1, 0);
        let mut idx = self.index(&self.digits) as i64;
        self.odometer.clear();
        self.odometer.resize(free, 0);
        loop {
            mark(&mut self.cells[idx as usize], d, k);
            let mut j = 0;
            loop {
                if j == free {
                    return;
                }
                for (i, &mc) in self.modulus.iter().enumerate() {
                    let pos = i + j;
                    let old = self.digits[pos];
                    let mut new = old + mc;
                    if new >= p {
                        new -= p;
                    }
                    self.digits[pos] = new;
                    idx += (new as i64 - old as i64) * self.qpow[pos] as i64;
                }
                self.odometer[j] += 1;
                if self.odometer[j] < p {
                    break;
                }
                self.odometer[j] = 0;
                j += 1;
            }
        }
    }
}

#[inline]
fn mark(cell: &mut FactorPattern, d: u16, k: usize) {
    if k == 1 {
        cell.push_part(d, 1);
    } else {
        cell.bump_last();
    }
}

/// `out = (-a) mod m` for monic `m`, as a vector of length deg m.
fn neg_rem_monic(ctx: &FieldCtx, a: &[u32], m: &[u32], out: &mut Vec<u32>) {
    let dm = m.len() - 1;
    out.clear();
    out.extend_from_slice(a);
    if out.len() > dm {
        for i in (dm..out.len()).rev() {
            let c = out[i];
            if c == 0 {
                continue;
            }
            let nc = ctx.neg(c);
            let base = i - dm;
            for (j, &mj) in m[..dm].iter().enumerate() {
                out[base + j] = ctx.add(out[base + j], ctx.mul(nc, mj));
            }
            out[i] = 0;
        }
    }
    out.resize(dm, 0);
    for v in out.iter_mut() {
        *v = ctx.neg(*v);
    }
}

/// Visits every monic polynomial of degree `n` in index order with its
/// factor pattern.
pub fn for_each_monic_pattern<F: FnMut(u64, &FactorPattern)>(ctx: &FieldCtx, n: usize, budget: u128, mut visit: F) -> Result<()> {
    check_budget(count_monic(ctx.p(), n), budget)?;
    if n == 0 {
        visit(0, &FactorPattern::default());
        return Ok(());
    }
    let mut sieve = PatternSieve::new(ctx, n, budget)?;
    for_each_block(&mut sieve, |base, cells| {
        for (i, c) in cells.iter().enumerate() {
            visit(base + i as u64, c);
        }
    });
    Ok(())
}

/// Walks M_n in blocks of at most [`BLOCK_LIMIT`] members, handing each
/// block's starting index and patterns to `visit`.
pub fn for_each_block<F: FnMut(u64, &[FactorPattern])>(sieve: &mut PatternSieve, mut visit: F) {
    let (ctx, n) = (sieve.ctx.clone(), sieve.n);
    let q = ctx.p() as u64;
    let mut h = n - 1;
    while h > 0 && q.saturating_pow(h as u32 + 1) > BLOCK_LIMIT {
        h -= 1;
    }
    let block = q.pow(h as u32 + 1);
    let blocks = q.pow((n - h - 1) as u32);
    for b in 0..blocks {
        let center = crate::ensembles::monic_from_index(&ctx, n - h - 1, b).shift(h + 1);
        let cells = sieve.sieve(&center, h);
        visit(b * block, cells);
    }
}

/// Number of blocks [`for_each_block`] uses and their size, for callers that
/// shard the walk themselves.
pub fn block_layout(q: u32, n: usize) -> (usize, u64, u64) {
    let q = q as u64;
    let mut h = n - 1;
    while h > 0 && q.saturating_pow(h as u32 + 1) > BLOCK_LIMIT {
        h -= 1;
    }
    (h, q.pow(h as u32 + 1), q.pow((n - h - 1) as u32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::necklace_count;
    use crate::ensembles::{enumerate_monic, sample_monic, stream_rng, DEFAULT_BUDGET};
    use crate::factor::{factor_pattern, is_irreducible};

    #[test]
    fn prime_counts_match_necklace() {
        for (p, d) in [(2u64, 8usize), (3, 6), (5, 4), (7, 3), (31, 2)] {
            let ctx = FieldCtx::new(p).unwrap();
            let t = PrimeTable::new(&ctx, d, DEFAULT_BUDGET).unwrap();
            for k in 1..=d {
                assert_eq!(t.count(k) as u128, necklace_count(p, k as u32), "q={p} d={k}");
            }
            for f in t.prime_polys(d).iter().take(50) {
                assert!(is_irreducible(f).unwrap());
            }
        }
    }

    #[test]
    fn exhaustive_patterns_match_factorization() {
        for (p, n) in [(2u64, 7usize), (3, 5), (5, 4), (7, 3)] {
            let ctx = FieldCtx::new(p).unwrap();
            let all: Vec<Poly> = enumerate_monic(&ctx, n, DEFAULT_BUDGET).unwrap().collect();
            let mut seen = 0;
            for_each_monic_pattern(&ctx, n, DEFAULT_BUDGET, |idx, pat| {
                assert_eq!(pat, &factor_pattern(&all[idx as usize]).unwrap(), "{}", all[idx as usize]);
                seen += 1;
            })
            .unwrap();
            assert_eq!(seen, all.len());
        }
    }

    #[test]
    fn random_intervals_match_factorization() {
        let mut rng = stream_rng(5, 0);
        for (p, n, h) in [(3u64, 9usize, 2usize), (5, 7, 1), (31, 6, 1), (7, 8, 4), (2, 12, 3)] {
            let ctx = FieldCtx::new(p).unwrap();
            let mut sieve = PatternSieve::new(&ctx, n, DEFAULT_BUDGET).unwrap();
            for _ in 0..3 {
                let a = sample_monic(&ctx, n, &mut rng);
                let spec = crate::ensembles::IntervalSpec::new(a.clone(), h).unwrap();
                let cells = sieve.sieve(&a, h).to_vec();
                for (i, f) in spec.members().enumerate() {
                    assert_eq!(cells[i], factor_pattern(&f).unwrap(), "q={p} f={f}");
                }
            }
        }
    }
}
