//! Exact scalar arithmetic for correctness checks.
//!
//! Two rings are supported: plain (checked) signed integers, and the
//! integers modulo a prime `q`. Field arithmetic is what the
//! interpolation-based decoders need; peeling decoders only add and
//! subtract and therefore run over either ring.

use crate::error::Error;
use crate::Result;

/// Default prime modulus, the Mersenne prime `2^31 - 1`.
pub const DEFAULT_PRIME: i128 = 2_147_483_647;

/// Scalar ring a matrix lives over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ring {
    /// Exact signed integers (checked `i128` arithmetic).
    Integers,
    /// Integers modulo the prime `q`, canonical representatives `0..q`.
    PrimeField(i128),
}

impl Ring {
    /// The default prime field used by the test pipelines.
    pub fn default_field() -> Ring {
        Ring::PrimeField(DEFAULT_PRIME)
    }

    /// Reduce `x` to its canonical representative.
    pub fn canon(&self, x: i128) -> i128 {
        match self {
            Ring::Integers => x,
            Ring::PrimeField(q) => x.rem_euclid(*q),
        }
    }

    pub fn add(&self, a: i128, b: i128) -> Result<i128> {
        match self {
            Ring::Integers => a.checked_add(b).ok_or(Error::Overflow),
            Ring::PrimeField(q) => Ok((a + b).rem_euclid(*q)),
        }
    }

    pub fn sub(&self, a: i128, b: i128) -> Result<i128> {
        match self {
            Ring::Integers => a.checked_sub(b).ok_or(Error::Overflow),
            Ring::PrimeField(q) => Ok((a - b).rem_euclid(*q)),
        }
    }

    pub fn mul(&self, a: i128, b: i128) -> Result<i128> {
        match self {
            Ring::Integers => a.checked_mul(b).ok_or(Error::Overflow),
            Ring::PrimeField(q) => Ok((a.rem_euclid(*q) * b.rem_euclid(*q)).rem_euclid(*q)),
        }
    }

    /// Multiplicative inverse; only prime fields support division.
    pub fn inv(&self, a: i128) -> Result<i128> {
        let q = match self {
            Ring::Integers => return Err(Error::DivisionUnsupported),
            Ring::PrimeField(q) => *q,
        };
        let a = a.rem_euclid(q);
        if a == 0 {
            return Err(Error::NotInvertible(0));
        }
        // Extended Euclid on (a, q); q prime, so gcd is 1.
        let (mut r0, mut r1) = (a, q);
        let (mut t0, mut t1) = (1i128, 0i128);
        while r1 != 0 {
            let quot = r0 / r1;
            (r0, r1) = (r1, r0 - quot * r1);
            (t0, t1) = (t1, t0 - quot * t1);
        }
        debug_assert_eq!(r0, 1, "modulus must be prime");
        Ok(t0.rem_euclid(q))
    }

    pub fn div(&self, a: i128, b: i128) -> Result<i128> {
        let inv = self.inv(b)?;
        self.mul(a, inv)
    }

    /// `base^exp` by square-and-multiply.
    pub fn pow(&self, base: i128, exp: u64) -> Result<i128> {
        let mut acc = self.canon(1);
        let mut base = self.canon(base);
        let mut exp = exp;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base)?;
            }
            exp >>= 1;
            if exp > 0 {
                base = self.mul(base, base)?;
            }
        }
        Ok(acc)
    }
}
