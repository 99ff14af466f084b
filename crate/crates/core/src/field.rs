//! Arithmetic in the prime field F_p.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Below this size the quadratic character is read from a table.
const QR_TABLE_LIMIT: u32 = 1 << 16;

/// Context for the prime field F_p.
///
/// Elements are plain `u32` values kept in canonical form `0..p`. The
/// context is immutable and cheap to clone.
#[derive(Clone)]
pub struct FieldCtx {
    p: u32,
    qr: Option<Arc<[i8]>>,
}

impl FieldCtx {
    pub fn new(p: u64) -> Result<Self> {
        if p < 2 {
            return Err(Error::ModulusTooSmall(p));
        }
        if p > u32::MAX as u64 / 2 {
            return Err(Error::InvalidParameter(format!("modulus {p} is too large")));
        }
        if !is_prime(p) {
            return Err(Error::CompositeModulus(p));
        }
        let p = p as u32;
        let qr = (p > 2 && p <= QR_TABLE_LIMIT).then(|| {
            let mut t = vec![-1i8; p as usize];
            t[0] = 0;
            for a in 1..p as u64 {
                t[(a * a % p as u64) as usize] = 1;
            }
            Arc::from(t)
        });
        Ok(FieldCtx { p, qr })
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.p
    }

    /// Whether the quadratic character is available.
    #[inline]
    pub fn is_odd(&self) -> bool {
        self.p != 2
    }

    #[inline]
    pub fn reduce(&self, a: u64) -> u32 {
        (a % self.p as u64) as u32
    }

    /// Canonical representative of a signed integer.
    #[inline]
    pub fn from_i64(&self, a: i64) -> u32 {
        a.rem_euclid(self.p as i64) as u32
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.p as u64) as u32
    }

    pub fn pow(&self, a: u32, mut e: u64) -> u32 {
        let mut base = a;
        let mut acc = 1 % self.p;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, a: u32) -> Option<u32> {
        if a == 0 {
            return None;
        }
        // extended Euclid on (a, p)
        let (mut r0, mut r1) = (self.p as i64, a as i64);
        let (mut t0, mut t1) = (0i64, 1i64);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        Some(self.from_i64(t0))
    }

    /// The quadratic character: 0 at zero, +1 on nonzero squares, -1 otherwise.
    pub fn quadratic_character(&self, a: u32) -> Result<i8> {
        if self.p == 2 {
            return Err(Error::EvenCharacteristic);
        }
        let a = a % self.p;
        if let Some(t) = &self.qr {
            return Ok(t[a as usize]);
        }
        Ok(match self.pow(a, (self.p as u64 - 1) / 2) {
            0 => 0,
            1 => 1,
            _ => -1,
        })
    }

    /// Smallest generator of the multiplicative group.
    pub fn primitive_root(&self) -> u32 {
        if self.p == 2 {
            return 1;
        }
        let order = self.p as u64 - 1;
        let primes = prime_factors(order);
        (2..self.p)
            .find(|&g| primes.iter().all(|&r| self.pow(g, order / r) != 1))
            .expect("prime field has a primitive root")
    }

    /// Square-and-multiply Euler criterion, ignoring the table. Used to
    /// cross-check the table path.
    pub fn euler_criterion(&self, a: u32) -> Result<i8> {
        if self.p == 2 {
            return Err(Error::EvenCharacteristic);
        }
        Ok(match self.pow(a % self.p, (self.p as u64 - 1) / 2) {
            0 => 0,
            1 => 1,
            _ => -1,
        })
    }
}

impl PartialEq for FieldCtx {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p
    }
}

impl Eq for FieldCtx {}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}", self.p)
    }
}

/// Deterministic trial division; moduli here are at most 32 bits.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) {
        return false;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Distinct prime factors of `n`, ascending.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Möbius function of a positive integer.
pub fn int_mobius(n: u64) -> i64 {
    let mut m = n;
    let mut sign = 1;
    let mut d = 2;
    while d * d <= m {
        if m.is_multiple_of(d) {
            m /= d;
            if m.is_multiple_of(d) {
                return 0;
            }
            sign = -sign;
        }
        d += 1;
    }
    if m > 1 {
        sign = -sign;
    }
    sign
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction() {
        let f7 = FieldCtx::new(7).unwrap();
        assert!(f7.is_odd());
        assert_eq!(FieldCtx::new(6).unwrap_err(), Error::CompositeModulus(6));
        let f2 = FieldCtx::new(2).unwrap();
        assert!(!f2.is_odd());
        assert_eq!(f2.quadratic_character(1), Err(Error::EvenCharacteristic));
        assert!(FieldCtx::new(1).is_err());
    }

    #[test]
    fn quadratic_character_mod_7() {
        let f = FieldCtx::new(7).unwrap();
        // squares mod 7 by brute force
        let squares: Vec<u32> = (1..7u32).map(|a| a * a % 7).collect();
        for a in 0..7u32 {
            let expect = if a == 0 {
                0
            } else if squares.contains(&a) {
                1
            } else {
                -1
            };
            assert_eq!(f.quadratic_character(a).unwrap(), expect, "a = {a}");
        }
        assert_eq!(f.quadratic_character(2).unwrap(), 1);
        assert_eq!(f.quadratic_character(0).unwrap(), 0);
        assert_eq!(f.quadratic_character(3).unwrap(), -1);
    }

    #[test]
    fn quadratic_character_is_multiplicative_and_balanced() {
        for p in (3..=101u64).filter(|&p| is_prime(p)) {
            let f = FieldCtx::new(p).unwrap();
            let chi = |a: u32| f.quadratic_character(a).unwrap();
            let mut total = 0i64;
            for a in 0..p as u32 {
                total += chi(a) as i64;
                assert_eq!(chi(a), f.euler_criterion(a).unwrap());
                for b in 0..p as u32 {
                    assert_eq!(chi(f.mul(a, b)), chi(a) * chi(b));
                }
            }
            assert_eq!(total, 0, "p = {p}");
        }
    }

    #[test]
    fn large_prime_uses_euler() {
        let f = FieldCtx::new(65537).unwrap();
        assert_eq!(f.quadratic_character(3).unwrap(), -1);
        assert_eq!(f.quadratic_character(4).unwrap(), 1);
    }

    #[test]
    fn field_axioms_small_primes() {
        for p in [2u64, 3, 5, 7, 11, 13] {
            let f = FieldCtx::new(p).unwrap();
            let p = p as u32;
            for a in 0..p {
                assert_eq!(f.add(a, f.neg(a)), 0);
                if a != 0 {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
                } else {
                    assert_eq!(f.inv(a), None);
                }
                for b in 0..p {
                    assert_eq!(f.add(a, b), f.add(b, a));
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    assert_eq!(f.sub(f.add(a, b), b), a);
                    for c in 0..p {
                        assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                        assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                    }
                }
            }
        }
    }

    #[test]
    fn primitive_roots() {
        for p in [3u64, 5, 7, 11, 31, 101] {
            let f = FieldCtx::new(p).unwrap();
            let g = f.primitive_root();
            let mut seen = std::collections::HashSet::new();
            let mut x = 1;
            for _ in 0..p - 1 {
                seen.insert(x);
                x = f.mul(x, g);
            }
            assert_eq!(seen.len() as u64, p - 1);
        }
    }

    #[test]
    fn integer_helpers() {
        assert_eq!(prime_factors(360), vec![2, 3, 5]);
        assert_eq!(int_mobius(1), 1);
        assert_eq!(int_mobius(6), 1);
        assert_eq!(int_mobius(12), 0);
        assert_eq!(int_mobius(30), -1);
    }
}
