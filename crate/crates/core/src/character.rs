//! Multiplicative characters of `F_p^*` and the additive character `e_p`.
//!
//! A character of exponent `k` sends `x = g^j` to `e^{2 pi i k j / (p-1)}` and
//! zero to zero. Values are carried as exact root-of-unity indices modulo
//! `p - 1` and converted to `Complex64` through the field's root table.

use std::sync::Arc;

use num_complex::Complex64;

use crate::accum::ComplexSum;
use crate::error::{Error, Result};
use crate::field::PrimeField;

/// Binary64 pair holding a character value (zero or a root of unity).
pub type CharacterValue = Complex64;

/// Sentinel in the index table marking the argument zero.
const ZERO: u32 = u32::MAX;

#[derive(Debug, Clone)]
pub struct MultChar {
    field: Arc<PrimeField>,
    k: u32,
    /// `k * ind_g(x) mod (p-1)` for each `x`, [`ZERO`] at `x = 0`.
    index: Arc<[u32]>,
}

impl MultChar {
    pub fn new(field: Arc<PrimeField>, k: u64) -> Result<Self> {
        let n = field.group_order() as u64;
        if k >= n {
            return Err(Error::ExponentOutOfRange { k, max: n - 1 });
        }
        let index: Arc<[u32]> = field
            .dlog_table()
            .iter()
            .map(|&j| {
                if j == u32::MAX {
                    ZERO
                } else {
                    (j as u64 * k % n) as u32
                }
            })
            .collect();
        Ok(Self {
            field,
            k: k as u32,
            index,
        })
    }

    /// The real character of order two.
    pub fn legendre(field: Arc<PrimeField>) -> Self {
        let k = field.group_order() as u64 / 2;
        Self::new(field, k).expect("(p-1)/2 is a valid exponent")
    }

    pub fn field(&self) -> &Arc<PrimeField> {
        &self.field
    }

    pub fn exponent(&self) -> u32 {
        self.k
    }

    pub fn is_trivial(&self) -> bool {
        self.k == 0
    }

    pub fn order(&self) -> u32 {
        let n = self.field.group_order();
        n / gcd(self.k, n)
    }

    pub fn conj(&self) -> Self {
        let n = self.field.group_order() as u64;
        Self::new(self.field.clone(), (n - self.k as u64) % n).expect("reduced exponent")
    }

    pub(crate) fn require_nontrivial(&self) -> Result<()> {
        if self.is_trivial() {
            Err(Error::TrivialCharacter)
        } else {
            Ok(())
        }
    }

    /// Root-of-unity index of `chi(x)`, or `None` when `x == 0 (mod p)`.
    #[inline]
    pub fn root_index(&self, x: u32) -> Option<u32> {
        let x = if (x as usize) < self.index.len() {
            x
        } else {
            self.field.reduce(x as u64)
        };
        match self.index[x as usize] {
            ZERO => None,
            j => Some(j),
        }
    }

    #[inline]
    pub fn eval(&self, x: u32) -> CharacterValue {
        match self.root_index(x) {
            Some(j) => self.field.unit_roots()[j as usize],
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// `sum_{lambda in F_p} chi(u + lambda) * conj(chi(v + lambda))`.
    ///
    /// Equals `p - 1` when `u == v` and `-1` otherwise.
    pub fn orthogonality_sum(&self, u: u32, v: u32) -> Result<CharacterValue> {
        self.require_nontrivial()?;
        let f = &*self.field;
        let n = f.group_order();
        let roots = f.unit_roots();
        let mut acc = ComplexSum::new();
        for lambda in 0..f.modulus() {
            let (Some(i), Some(j)) = (
                self.root_index(f.add(u, lambda)),
                self.root_index(f.add(v, lambda)),
            ) else {
                continue;
            };
            acc.add(roots[((i + n - j) % n) as usize]);
        }
        Ok(acc.value())
    }
}

/// `e_p(u) = exp(2 pi i u / p)`.
#[inline]
pub fn eval_add_char(field: &PrimeField, u: u32) -> CharacterValue {
    field.additive_roots()[field.reduce(u as u64) as usize]
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}
