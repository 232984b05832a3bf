//! Prime-field arithmetic with a full discrete-logarithm table.
//!
//! A [`PrimeField`] owns the least primitive root `g` of `p` and a table
//! mapping every unit `x` to `ind_g(x)`. Everything downstream (character
//! evaluation, subgroup generation) reads from that table, so construction is
//! the only place where real work happens.

use std::f64::consts::TAU;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest supported modulus. The dlog table costs 4 bytes per element.
pub const MAX_MODULUS: u64 = 1 << 26;

#[derive(Debug)]
pub struct PrimeField {
    p: u32,
    g: u32,
    dlog: Vec<u32>,
    unit_roots: OnceLock<Vec<Complex64>>,
    additive_roots: OnceLock<Vec<Complex64>>,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self> {
        if p < 3 {
            return Err(Error::ModulusTooSmall(p));
        }
        if p > MAX_MODULUS {
            return Err(Error::ModulusTooLarge(p));
        }
        if !is_prime(p) {
            return Err(Error::CompositeModulus(p));
        }
        let g = least_primitive_root(p);
        let mut dlog = vec![u32::MAX; p as usize];
        let mut x = 1u64;
        for k in 0..(p - 1) as u32 {
            dlog[x as usize] = k;
            x = x * g % p;
        }
        debug_assert_eq!(x, 1);
        Ok(Self {
            p: p as u32,
            g: g as u32,
            dlog,
            unit_roots: OnceLock::new(),
            additive_roots: OnceLock::new(),
        })
    }

    #[inline]
    pub fn modulus(&self) -> u32 {
        self.p
    }

    /// Order of the multiplicative group, `p - 1`.
    #[inline]
    pub fn group_order(&self) -> u32 {
        self.p - 1
    }

    #[inline]
    pub fn generator(&self) -> u32 {
        self.g
    }

    #[inline]
    pub fn reduce(&self, x: u64) -> u32 {
        (x % self.p as u64) as u32
    }

    #[inline]
    pub fn add(&self, x: u32, y: u32) -> u32 {
        let s = x as u64 + y as u64;
        (s % self.p as u64) as u32
    }

    #[inline]
    pub fn sub(&self, x: u32, y: u32) -> u32 {
        let p = self.p as u64;
        ((x as u64 + p - (y as u64 % p)) % p) as u32
    }

    #[inline]
    pub fn neg(&self, x: u32) -> u32 {
        self.sub(0, x)
    }

    #[inline]
    pub fn mul(&self, x: u32, y: u32) -> u32 {
        (x as u64 * y as u64 % self.p as u64) as u32
    }

    pub fn pow(&self, x: u32, e: u64) -> u32 {
        pow_mod(x as u64, e, self.p as u64) as u32
    }

    /// Index of `x` with respect to the primitive root.
    pub fn dlog(&self, x: u32) -> Result<u32> {
        match self.dlog.get(x as usize) {
            Some(&k) if k != u32::MAX => Ok(k),
            Some(_) => Err(Error::ZeroHasNoLog),
            None => self.dlog(self.reduce(x as u64)),
        }
    }

    /// Raw table: entry `x` is `ind_g(x)` for `x != 0`, `u32::MAX` at zero.
    pub fn dlog_table(&self) -> &[u32] {
        &self.dlog
    }

    pub fn inv(&self, x: u32) -> Result<u32> {
        let x = self.reduce(x as u64);
        if x == 0 {
            return Err(Error::DivisionByZero);
        }
        Ok(self.pow(x, self.p as u64 - 2))
    }

    /// The `(p-1)`-th roots of unity, `e^{2 pi i j / (p-1)}` for `j = 0..p-1`.
    pub fn unit_roots(&self) -> &[Complex64] {
        self.unit_roots
            .get_or_init(|| roots_of_unity(self.group_order() as usize))
    }

    /// `e_p(u) = e^{2 pi i u / p}` for `u = 0..p`.
    pub fn additive_roots(&self) -> &[Complex64] {
        self.additive_roots
            .get_or_init(|| roots_of_unity(self.p as usize))
    }
}

fn roots_of_unity(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|j| {
            // Reduce the angle to [-pi, pi] before evaluating.
            let j = if 2 * j > n { j as f64 - n as f64 } else { j as f64 };
            Complex64::from_polar(1.0, TAU * j / n as f64)
        })
        .collect()
}

pub fn pow_mod(base: u64, mut e: u64, m: u64) -> u64 {
    let m128 = m as u128;
    let mut b = (base % m) as u128;
    let mut acc: u128 = 1 % m128;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % m128;
        }
        b = b * b % m128;
        e >>= 1;
    }
    acc as u64
}

/// Deterministic Miller-Rabin, exact for every `n < 2^64`.
pub fn is_prime(n: u64) -> bool {
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &q in &WITNESSES {
        if n.is_multiple_of(q) {
            return n == q;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = (x as u128 * x as u128 % n as u128) as u64;
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Distinct prime factors by trial division.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut q = 2;
    while q * q <= n {
        if n.is_multiple_of(q) {
            out.push(q);
            while n.is_multiple_of(q) {
                n /= q;
            }
        }
        q += if q == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn least_primitive_root(p: u64) -> u64 {
    let order = p - 1;
    let factors = prime_factors(order);
    (2..p)
        .find(|&g| factors.iter().all(|&q| pow_mod(g, order / q, p) != 1))
        .expect("every prime has a primitive root")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_fields_pick_least_root() {
        let f7 = PrimeField::new(7).unwrap();
        assert_eq!(f7.generator(), 3);
        let cycle: Vec<u32> = (0..6).map(|k| f7.pow(3, k)).collect();
        assert_eq!(cycle, vec![1, 3, 2, 6, 4, 5]);
        assert_eq!(PrimeField::new(5).unwrap().generator(), 2);
        assert_eq!(PrimeField::new(3).unwrap().generator(), 2);
        assert_eq!(PrimeField::new(1009).unwrap().generator(), 11);
    }

    #[test]
    fn construction_errors() {
        assert_eq!(PrimeField::new(9).unwrap_err(), Error::CompositeModulus(9));
        assert_eq!(PrimeField::new(91).unwrap_err(), Error::CompositeModulus(91));
        assert_eq!(PrimeField::new(2).unwrap_err(), Error::ModulusTooSmall(2));
        assert!(matches!(
            PrimeField::new((1 << 26) + 15),
            Err(Error::ModulusTooLarge(_))
        ));
    }

    #[test]
    fn dlog_examples() {
        let f = PrimeField::new(7).unwrap();
        assert_eq!(f.dlog(6), Ok(3));
        assert_eq!(f.dlog(1), Ok(0));
        assert_eq!(f.dlog(0), Err(Error::ZeroHasNoLog));
    }

    #[test]
    fn inverse_examples() {
        let f7 = PrimeField::new(7).unwrap();
        let f5 = PrimeField::new(5).unwrap();
        assert_eq!(f7.inv(3), Ok(5));
        assert_eq!(f5.inv(4), Ok(4));
        assert_eq!(f7.inv(0), Err(Error::DivisionByZero));
    }

    #[test]
    fn dlog_table_is_a_permutation() {
        for p in [3u64, 5, 101, 257, 1009, 65537] {
            let f = PrimeField::new(p).unwrap();
            let mut seen = vec![false; (p - 1) as usize];
            for x in 1..p as u32 {
                let k = f.dlog(x).unwrap() as usize;
                assert!(!seen[k]);
                seen[k] = true;
            }
            assert!(seen.iter().all(|&s| s));
        }
    }

    #[test]
    fn miller_rabin_agrees_with_sieve() {
        let n = 20_000usize;
        let mut sieve = vec![true; n];
        sieve[0] = false;
        sieve[1] = false;
        for i in 2..n {
            if sieve[i] {
                for j in (i * i..n).step_by(i) {
                    sieve[j] = false;
                }
            }
        }
        for (i, &s) in sieve.iter().enumerate() {
            assert_eq!(is_prime(i as u64), s, "n = {i}");
        }
        assert!(is_prime(67_108_859));
        assert!(!is_prime(3_215_031_751)); // strong pseudoprime to 2,3,5,7
    }

    #[test]
    fn roots_are_on_the_circle() {
        let f = PrimeField::new(101).unwrap();
        for z in f.unit_roots().iter().chain(f.additive_roots()) {
            assert!((z.norm() - 1.0).abs() < 1e-15);
        }
        assert_eq!(f.unit_roots().len(), 100);
        assert_eq!(f.additive_roots().len(), 101);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;
        use std::sync::LazyLock;

        static F1009: LazyLock<PrimeField> = LazyLock::new(|| PrimeField::new(1009).unwrap());

        proptest! {
            #[test]
            fn dlog_is_a_homomorphism(x in 1u32..1009, y in 1u32..1009) {
                let f = &*F1009;
                let lhs = f.dlog(f.mul(x, y)).unwrap();
                let rhs = (f.dlog(x).unwrap() + f.dlog(y).unwrap()) % 1008;
                prop_assert_eq!(lhs, rhs);
            }

            #[test]
            fn inverse_is_an_involution(x in 1u32..1009) {
                let f = &*F1009;
                let y = f.inv(x).unwrap();
                prop_assert_eq!(f.mul(x, y), 1);
                prop_assert_eq!(f.inv(y).unwrap(), x);
            }
        }
    }
}
