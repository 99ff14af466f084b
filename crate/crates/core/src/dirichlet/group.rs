use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rand::Rng;

use crate::ensembles::{check_budget, stream_rng};
use crate::error::{Error, Result};
use crate::factor::factor;
use crate::field::{prime_factors, FieldCtx};
use crate::poly::Poly;

/// Seed for the generator search modulo each prime factor.
const GENERATOR_SEED: u64 = 0x6e6e;

/// Largest root-of-unity order for which a value table is kept.
const ROOT_TABLE_LIMIT: u64 = 1 << 20;

/// Sentinel for "not a unit" / "not yet reached".
const NONE: u32 = u32::MAX;

#[derive(Debug)]
enum Shape {
    /// `Q = x^m`: scalar logs (by constant term) and 1-unit positions.
    PowerOfX { m: usize, scalar_log: Vec<u32>, one_units: Vec<u32> },
    /// Squarefree `Q`: one cyclic factor per prime, with a log table each.
    Squarefree { primes: Vec<Poly>, logs: Vec<Vec<u32>> },
}

/// The unit group of F_q[x]/(Q) as a product of cyclic groups.
///
/// Group elements are addressed by their *position*, the mixed-radix
/// integer `Σ e_i · stride_i` of their exponent tuple with the first
/// coordinate varying fastest.
#[derive(Debug)]
pub struct DirichletGroup {
    ctx: FieldCtx,
    modulus: Poly,
    shape: Shape,
    generators: Vec<Poly>,
    orders: Vec<u64>,
    strides: Vec<u64>,
    phi: u64,
    exponent: u64,
    scalar: u64,
    kernels: Vec<Vec<u64>>,
    roots: Option<Arc<[Complex64]>>,
    pub(crate) monic_positions: OnceLock<Vec<Vec<u64>>>,
    pub(crate) coefficient_table: OnceLock<Vec<Vec<Complex64>>>,
}

impl DirichletGroup {
    /// Unit group mod `Q` for `Q = c·x^m` or squarefree `Q`.
    pub fn new(modulus: &Poly, budget: u128) -> Result<Self> {
        let ctx = modulus.ctx().clone();
        let deg = modulus.degree().ok_or(Error::ZeroPolynomial)?;
        if deg == 0 {
            return Err(Error::ConstantPolynomial);
        }
        let modulus = modulus.monic()?;
        let power_of_x = modulus.coeffs()[..deg].iter().all(|&c| c == 0);
        if power_of_x {
            check_budget((ctx.p() as u128).pow(deg as u32 - 1) * (ctx.p() as u128 - 1), budget)?;
            return Ok(Self::power_of_x(ctx, modulus, deg));
        }
        let fac = factor(&modulus)?;
        if fac.factors.iter().any(|(_, e)| *e > 1) {
            return Err(Error::UnsupportedModulusShape("modulus must be x^m or squarefree".into()));
        }
        let phi: u128 = fac.factors.iter().map(|(p, _)| (ctx.p() as u128).pow(p.degree().unwrap() as u32) - 1).product();
        check_budget(phi, budget)?;
        let primes: Vec<Poly> = fac.factors.into_iter().map(|(p, _)| p).collect();
        Self::squarefree(ctx, modulus, primes)
    }

    fn power_of_x(ctx: FieldCtx, modulus: Poly, m: usize) -> Self {
        let p = ctx.p() as u64;
        let g0 = ctx.primitive_root();
        let mut scalar_log = vec![NONE; p as usize];
        let mut c = 1u32;
        for e in 0..p - 1 {
            scalar_log[c as usize] = e as u32;
            c = ctx.mul(c, g0);
        }
        let ring = TruncRing { ctx: ctx.clone(), m };
        let (basis, one_units) = ring.one_unit_basis();
        let mut generators = vec![Poly::constant(&ctx, g0)];
        let mut orders = vec![p - 1];
        for (g, d) in basis {
            generators.push(Poly::from_coeffs(&ctx, g));
            orders.push(d);
        }
        let mut group = Self::assemble(ctx.clone(), modulus, Shape::PowerOfX { m, scalar_log, one_units }, generators, orders);
        group.kernels = if m == 1 {
            vec![(0..group.rank()).map(|i| group.strides[i]).collect()]
        } else {
            let k = Poly::one(&ctx).add(&Poly::monomial(&ctx, m - 1));
            vec![vec![group.position(&k).unwrap()]]
        };
        group
    }

    fn squarefree(ctx: FieldCtx, modulus: Poly, primes: Vec<Poly>) -> Result<Self> {
        let q = ctx.p() as u64;
        let mut rng = stream_rng(GENERATOR_SEED, 0);
        let mut logs = Vec::with_capacity(primes.len());
        let mut generators = Vec::with_capacity(primes.len());
        let mut orders = Vec::with_capacity(primes.len());
        let one = Poly::one(&ctx);
        for p in &primes {
            let d = p.degree().unwrap();
            let order = q.pow(d as u32) - 1;
            let cofactors: Vec<u64> = prime_factors(order).into_iter().map(|r| order / r).collect();
            let gen = loop {
                let c: Vec<u32> = (0..d).map(|_| rng.random_range(0..ctx.p())).collect();
                let a = Poly::from_coeffs(&ctx, c);
                if a.is_zero() {
                    continue;
                }
                if cofactors.iter().all(|&e| a.powmod(e, p).unwrap() != one) {
                    break a;
                }
            };
            let mut table = vec![NONE; (q as usize).pow(d as u32)];
            let mut cur = one.clone();
            for e in 0..order {
                table[residue_index(&cur, q) as usize] = e as u32;
                cur = cur.mulmod(&gen, p)?;
            }
            let cofactor = modulus.divrem(p)?.0;
            let idem = cofactor.mul(&cofactor.inverse_mod(p)?.ok_or(Error::NotSquarefree)?);
            let lifted = one.add(&gen.sub(&one).mul(&idem)).rem(&modulus)?;
            logs.push(table);
            generators.push(lifted);
            orders.push(order);
        }
        let mut group = Self::assemble(ctx, modulus, Shape::Squarefree { primes, logs }, generators, orders);
        group.kernels = if group.rank() == 1 {
            vec![vec![group.strides[0]]]
        } else {
            group.strides.iter().map(|&s| vec![s]).collect()
        };
        Ok(group)
    }

    fn assemble(ctx: FieldCtx, modulus: Poly, shape: Shape, generators: Vec<Poly>, orders: Vec<u64>) -> Self {
        let mut strides = Vec::with_capacity(orders.len());
        let mut phi = 1u64;
        for &d in &orders {
            strides.push(phi);
            phi *= d;
        }
        let exponent = orders.iter().fold(1u64, |l, &d| l / gcd(l, d) * d);
        let roots = (exponent <= ROOT_TABLE_LIMIT).then(|| {
            (0..exponent).map(|k| Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / exponent as f64)).collect()
        });
        let mut group = DirichletGroup {
            ctx,
            modulus,
            shape,
            generators,
            orders,
            strides,
            phi,
            exponent,
            scalar: 0,
            kernels: Vec::new(),
            roots,
            monic_positions: OnceLock::new(),
            coefficient_table: OnceLock::new(),
        };
        let g0 = Poly::constant(&group.ctx, group.ctx.primitive_root());
        group.scalar = group.position(&g0).unwrap();
        group
    }

    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }

    pub fn modulus(&self) -> &Poly {
        &self.modulus
    }

    pub fn degree(&self) -> usize {
        self.modulus.degree().unwrap()
    }

    /// Φ(Q).
    pub fn order(&self) -> u64 {
        self.phi
    }

    pub fn rank(&self) -> usize {
        self.orders.len()
    }

    pub fn generators(&self) -> &[Poly] {
        &self.generators
    }

    pub fn orders(&self) -> &[u64] {
        &self.orders
    }

    /// Least common multiple of the cyclic orders.
    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    /// Position of a primitive-root scalar, which generates the scalars.
    pub fn scalar_position(&self) -> u64 {
        self.scalar
    }

    /// For each maximal proper divisor Q' of Q, positions generating the
    /// kernel of reduction mod Q'.
    pub fn kernel_generators(&self) -> &[Vec<u64>] {
        &self.kernels
    }

    pub fn coords(&self, mut pos: u64) -> Vec<u64> {
        self.orders
            .iter()
            .map(|&d| {
                let e = pos % d;
                pos /= d;
                e
            })
            .collect()
    }

    pub fn position_of_coords(&self, coords: &[u64]) -> u64 {
        coords.iter().zip(&self.strides).zip(&self.orders).map(|((&e, &s), &d)| (e % d) * s).sum()
    }

    pub fn element(&self, pos: u64) -> Poly {
        let mut acc = Poly::one(&self.ctx);
        for (g, e) in self.generators.iter().zip(self.coords(pos)) {
            acc = acc.mulmod(&g.powmod(e, &self.modulus).unwrap(), &self.modulus).unwrap();
        }
        acc
    }

    /// Discrete log of `f mod Q` as a position, `None` for non-units.
    pub fn position(&self, f: &Poly) -> Option<u64> {
        let r = f.rem(&self.modulus).ok()?;
        self.position_of_coeffs(r.coeffs())
    }

    /// Discrete log as an exponent tuple.
    pub fn dlog(&self, f: &Poly) -> Option<Vec<u64>> {
        self.position(f).map(|p| self.coords(p))
    }

    /// Position of the residue with the given coefficients (lowest first).
    /// Coefficients beyond deg Q are reduced away.
    pub fn position_of_coeffs(&self, c: &[u32]) -> Option<u64> {
        match &self.shape {
            Shape::PowerOfX { m, scalar_log, one_units } => {
                let a0 = *c.first()?;
                if a0 == 0 {
                    return None;
                }
                let q = self.ctx.p() as u64;
                let inv = self.ctx.inv(a0).unwrap();
                let mut idx = 0u64;
                for &ci in c.iter().take(*m).skip(1).rev() {
                    idx = idx * q + self.ctx.mul(ci, inv) as u64;
                }
                let s = scalar_log[a0 as usize] as u64;
                Some(s + self.orders[0] * one_units[idx as usize] as u64)
            }
            Shape::Squarefree { primes, logs } => {
                let f = Poly::from_coeffs(&self.ctx, c.to_vec());
                let q = self.ctx.p() as u64;
                let mut pos = 0;
                for ((p, table), &s) in primes.iter().zip(logs).zip(&self.strides) {
                    let e = table[residue_index(&f.rem(p).unwrap(), q) as usize];
                    if e == NONE {
                        return None;
                    }
                    pos += e as u64 * s;
                }
                Some(pos)
            }
        }
    }

    /// exp(2πi k / exponent).
    pub(crate) fn root(&self, k: u64) -> Complex64 {
        match &self.roots {
            Some(t) => t[(k % self.exponent) as usize],
            None => Complex64::from_polar(1.0, std::f64::consts::TAU * (k % self.exponent) as f64 / self.exponent as f64),
        }
    }

    /// Positions of the monic polynomials of degree `n < deg Q` that are
    /// units, for each such `n`.
    pub(crate) fn monic_positions(&self) -> &[Vec<u64>] {
        self.monic_positions.get_or_init(|| {
            let q = self.ctx.p() as u64;
            (0..self.degree())
                .map(|n| {
                    let mut out = Vec::new();
                    let mut c = vec![0u32; n + 1];
                    c[n] = 1;
                    for idx in 0..q.pow(n as u32) {
                        let mut t = idx;
                        for ci in c.iter_mut().take(n) {
                            *ci = (t % q) as u32;
                            t /= q;
                        }
                        if let Some(p) = self.position_of_coeffs(&c) {
                            out.push(p);
                        }
                    }
                    out
                })
                .collect()
        })
    }

    /// In-place multi-dimensional DFT over the group: on return
    /// `data[id] = Σ_pos data_in[pos] · χ_id(pos)`.
    pub fn dft(&self, data: &mut [Complex64]) {
        assert_eq!(data.len() as u64, self.phi);
        let mut buf = Vec::new();
        for (&d, &s) in self.orders.iter().zip(&self.strides) {
            if d == 1 {
                continue;
            }
            let (d, s) = (d as usize, s as usize);
            let twiddle: Vec<Complex64> = (0..d).map(|k| Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / d as f64)).collect();
            let block = d * s;
            for outer in (0..data.len()).step_by(block) {
                for inner in 0..s {
                    let base = outer + inner;
                    buf.clear();
                    buf.extend((0..d).map(|e| data[base + e * s]));
                    for c in 0..d {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for (e, &v) in buf.iter().enumerate() {
                            acc += v * twiddle[(c * e) % d];
                        }
                        data[base + c * s] = acc;
                    }
                }
            }
        }
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Base-q index of a residue's coefficient vector.
pub(crate) fn residue_index(r: &Poly, q: u64) -> u64 {
    r.coeffs().iter().rev().fold(0, |acc, &c| acc * q + c as u64)
}

/// F_q[x]/(x^m) on dense coefficient vectors of length m.
struct TruncRing {
    ctx: FieldCtx,
    m: usize,
}

impl TruncRing {
    fn mul(&self, a: &[u32], b: &[u32]) -> Vec<u32> {
        let p = self.ctx.p() as u64;
        let mut acc = vec![0u64; self.m];
        for (i, &ai) in a.iter().enumerate().filter(|(_, &ai)| ai != 0) {
            for (j, &bj) in b[..self.m - i].iter().enumerate() {
                acc[i + j] = (acc[i + j] + ai as u64 * bj as u64) % p;
            }
        }
        acc.into_iter().map(|v| v as u32).collect()
    }

    fn pow(&self, a: &[u32], mut e: u64) -> Vec<u32> {
        let mut base = a.to_vec();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    fn one(&self) -> Vec<u32> {
        let mut v = vec![0; self.m];
        v[0] = 1;
        v
    }

    /// Index of a 1-unit among the q^(m-1) of them.
    fn index(&self, a: &[u32]) -> usize {
        let q = self.ctx.p() as usize;
        a[1..].iter().rev().fold(0, |acc, &c| acc * q + c as usize)
    }

    fn from_index(&self, mut idx: usize) -> Vec<u32> {
        let q = self.ctx.p() as usize;
        let mut v = self.one();
        for c in v[1..].iter_mut() {
            *c = (idx % q) as u32;
            idx /= q;
        }
        v
    }

    /// A basis of the 1-units with the position table of every 1-unit.
    ///
    /// Greedy p-group basis: take an element of largest order modulo the
    /// span H so far, correct it by an element of H so its order equals its
    /// relative order, and adjoin it.
    fn one_unit_basis(&self) -> (Vec<(Vec<u32>, u64)>, Vec<u32>) {
        let p = self.ctx.p() as u64;
        let size = (p as usize).pow(self.m as u32 - 1);
        let mut pos = vec![NONE; size];
        pos[0] = 0;
        let mut members = vec![0usize];
        let mut basis: Vec<(Vec<u32>, u64)> = Vec::new();
        // exponent bound: (1 + x f)^(p^k) = 1 once p^k >= m
        let mut kmax = 0u32;
        while p.pow(kmax) < self.m as u64 {
            kmax += 1;
        }
        while members.len() < size {
            let mut best = (0u32, 0usize);
            for (cand, _) in pos.iter().enumerate().filter(|(_, &v)| v == NONE) {
                let mut y = self.from_index(cand);
                let mut k = 0;
                while pos[self.index(&y)] == NONE {
                    y = self.pow(&y, p);
                    k += 1;
                }
                if k > best.0 {
                    best = (k, cand);
                    if k == kmax {
                        break;
                    }
                }
            }
            let (k, cand) = best;
            let g = self.from_index(cand);
            let order = p.pow(k);
            let h = self.pow(&g, order);
            let mut coord = pos[self.index(&h)] as u64;
            let mut g_adj = g;
            for (b, d) in &basis {
                let e = coord % d;
                coord /= d;
                assert_eq!(e % order, 0, "greedy basis invariant");
                let corr = self.pow(b, (d - e / order) % d);
                g_adj = self.mul(&g_adj, &corr);
            }
            let stride = members.len() as u64;
            let existing = members.len();
            for mi in 0..existing {
                let base = members[mi];
                let base_pos = pos[base] as u64;
                let mut cur = self.from_index(base);
                for j in 1..order {
                    cur = self.mul(&cur, &g_adj);
                    let idx = self.index(&cur);
                    assert_eq!(pos[idx], NONE, "adjoined generator is independent");
                    pos[idx] = (base_pos + stride * j) as u32;
                    members.push(idx);
                }
            }
            basis.push((g_adj, order));
        }
        (basis, pos)
    }
}

/// Multiset of cyclic orders, for comparing group structures.
pub fn order_profile(orders: &[u64]) -> BTreeMap<u64, usize> {
    let mut m = BTreeMap::new();
    for &d in orders {
        *m.entry(d).or_insert(0) += 1;
    }
    m
}
