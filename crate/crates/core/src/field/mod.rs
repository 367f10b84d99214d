//! Arithmetic in `GF(2^m)` for `m <= 128` and dense linear algebra over
//! `GF(2)` and `GF(2^m)`.

mod matrix;

pub use matrix::{invert_gf2m, rank_gf2, rref_gf2m, solve_gf2m, BitMatrix, BitRow};

use std::fmt;
use std::ops::{Add, AddAssign};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Field degree used when none is configured.
pub const DEFAULT_DEGREE: u32 = 128;

/// Supported degrees and the low-order terms of their reduction polynomial
/// (the `x^m` term is implicit).
const MODULI: [(u32, u128); 5] = [
    (8, 0x1b),   // x^8 + x^4 + x^3 + x + 1
    (16, 0x2b),  // x^16 + x^5 + x^3 + x + 1
    (32, 0x8d),  // x^32 + x^7 + x^3 + x^2 + 1
    (64, 0x1b),  // x^64 + x^4 + x^3 + x + 1
    (128, 0x87), // x^128 + x^7 + x^2 + x + 1
];

pub fn supported_degrees() -> impl Iterator<Item = u32> {
    MODULI.iter().map(|&(m, _)| m)
}

/// An element of `GF(2^m)` in the polynomial basis; bit `i` is the
/// coefficient of `x^i`.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FieldElement(pub u128);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn to_le_bytes(self) -> [u8; 16] {
        self.0.to_le_bytes()
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#x}", self.0)
    }
}

impl Add for FieldElement {
    type Output = FieldElement;

    #[allow(clippy::suspicious_arithmetic_impl)]
    fn add(self, rhs: FieldElement) -> FieldElement {
        FieldElement(self.0 ^ rhs.0)
    }
}

impl AddAssign for FieldElement {
    #[allow(clippy::suspicious_op_assign_impl)]
    fn add_assign(&mut self, rhs: FieldElement) {
        self.0 ^= rhs.0;
    }
}

impl std::iter::Sum for FieldElement {
    fn sum<I: Iterator<Item = FieldElement>>(iter: I) -> FieldElement {
        iter.fold(FieldElement::ZERO, |a, b| a + b)
    }
}

/// The field `GF(2^m)` for one of the supported degrees.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Gf2m {
    degree: u32,
    reduction: u128,
    mask: u128,
}

impl fmt::Debug for Gf2m {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF(2^{})", self.degree)
    }
}

impl Default for Gf2m {
    fn default() -> Self {
        Gf2m::new(DEFAULT_DEGREE).expect("default degree is supported")
    }
}

impl Gf2m {
    pub fn new(degree: u32) -> Result<Self> {
        let &(_, reduction) = MODULI
            .iter()
            .find(|&&(m, _)| m == degree)
            .ok_or(Error::UnsupportedField(degree))?;
        let mask = if degree == 128 { u128::MAX } else { (1u128 << degree) - 1 };
        Ok(Gf2m { degree, reduction, mask })
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn contains(&self, a: FieldElement) -> bool {
        a.0 & !self.mask == 0
    }

    pub fn element(&self, value: u128) -> Result<FieldElement> {
        let a = FieldElement(value);
        if self.contains(a) {
            Ok(a)
        } else {
            Err(Error::FieldMismatch { value, degree: self.degree })
        }
    }

    /// `x^i`, the `i`-th polynomial basis element.
    pub fn basis(&self, i: u32) -> FieldElement {
        assert!(i < self.degree, "basis index {i} outside GF(2^{})", self.degree);
        FieldElement(1u128 << i)
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> FieldElement {
        FieldElement(rng.gen::<u128>() & self.mask)
    }

    #[inline]
    fn mul_x(&self, a: u128) -> u128 {
        let carry = (a >> (self.degree - 1)) & 1;
        let shifted = (a << 1) & self.mask;
        shifted ^ (self.reduction & carry.wrapping_neg())
    }

    #[inline]
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        debug_assert!(self.contains(a) && self.contains(b));
        if a.0 == 0 || b.0 == 0 {
            return FieldElement::ZERO;
        }
        // 4-bit window over b, most significant nibble first
        let mut table = [0u128; 16];
        table[1] = a.0;
        table[2] = self.mul_x(table[1]);
        table[4] = self.mul_x(table[2]);
        table[8] = self.mul_x(table[4]);
        for j in 3usize..16 {
            if j & (j - 1) != 0 {
                let low = j & j.wrapping_neg();
                table[j] = table[low] ^ table[j ^ low];
            }
        }
        let mut acc = 0u128;
        let nibbles = (128 - b.0.leading_zeros()).div_ceil(4);
        for i in (0..nibbles).rev() {
            for _ in 0..4 {
                acc = self.mul_x(acc);
            }
            acc ^= table[((b.0 >> (4 * i)) & 0xf) as usize];
        }
        FieldElement(acc)
    }

    /// Product after checking both operands belong to this field.
    pub fn checked_mul(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement> {
        for v in [a, b] {
            if !self.contains(v) {
                return Err(Error::FieldMismatch { value: v.0, degree: self.degree });
            }
        }
        Ok(self.mul(a, b))
    }

    pub fn square(&self, a: FieldElement) -> FieldElement {
        self.mul(a, a)
    }

    /// `a^(2^i)`.
    pub fn frobenius(&self, a: FieldElement, i: u32) -> FieldElement {
        (0..i % self.degree).fold(a, |x, _| self.square(x))
    }

    pub fn pow(&self, a: FieldElement, mut e: u128) -> FieldElement {
        let mut base = a;
        let mut acc = FieldElement::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.square(base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via `a^(2^m - 2)`.
    pub fn inv(&self, a: FieldElement) -> Option<FieldElement> {
        if a.is_zero() {
            return None;
        }
        // 2^m - 2 = 2 + 4 + ... + 2^(m-1)
        let mut acc = FieldElement::ONE;
        let mut sq = self.square(a);
        for _ in 1..self.degree {
            acc = self.mul(acc, sq);
            sq = self.square(sq);
        }
        Some(acc)
    }

    pub fn div(&self, a: FieldElement, b: FieldElement) -> Option<FieldElement> {
        self.inv(b).map(|bi| self.mul(a, bi))
    }
}
