//! The two number domains a counting recurrence can be evaluated in.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::float::ApproxFloat;

/// Semiring operations used by the counting recurrences.
pub trait CountArith {
    type Value: Clone;

    /// Brings an exact integer scalar into the domain (`fl(x)` when approximate).
    fn lift(&self, x: &BigUint) -> Self::Value;
    fn pow2(&self, e: u64) -> Self::Value;
    fn zero(&self) -> Self::Value;
    fn one(&self) -> Self::Value;
    fn add(&self, a: &Self::Value, b: &Self::Value) -> Self::Value;
    fn mul(&self, a: &Self::Value, b: &Self::Value) -> Self::Value;
    /// Division by a small positive integer that divides the exact value.
    fn div_small(&self, a: &Self::Value, k: u64) -> Self::Value;
    fn is_zero(&self, a: &Self::Value) -> bool;

    /// Integer weights proportional to `values`, for exact sampling.
    fn weights(&self, values: &[Self::Value]) -> Vec<BigUint>;

    /// Left-to-right fold with [`CountArith::add`].
    fn sum<'a, I>(&self, values: I) -> Self::Value
    where
        I: IntoIterator<Item = &'a Self::Value>,
        Self::Value: 'a,
    {
        let mut it = values.into_iter();
        match it.next() {
            None => self.zero(),
            Some(first) => it.fold(first.clone(), |acc, v| self.add(&acc, v)),
        }
    }
}

/// Arbitrary-precision integers.
#[derive(Clone, Copy, Debug, Default)]
pub struct Exact;

impl CountArith for Exact {
    type Value = BigUint;

    fn lift(&self, x: &BigUint) -> BigUint {
        x.clone()
    }

    fn pow2(&self, e: u64) -> BigUint {
        BigUint::one() << e
    }

    fn zero(&self) -> BigUint {
        BigUint::zero()
    }

    fn one(&self) -> BigUint {
        BigUint::one()
    }

    fn add(&self, a: &BigUint, b: &BigUint) -> BigUint {
        a + b
    }

    fn mul(&self, a: &BigUint, b: &BigUint) -> BigUint {
        a * b
    }

    fn div_small(&self, a: &BigUint, k: u64) -> BigUint {
        let (q, r) = num_integer::Integer::div_rem(a, &BigUint::from(k));
        debug_assert!(r.is_zero(), "inexact division of {a} by {k}");
        q
    }

    fn is_zero(&self, a: &BigUint) -> bool {
        a.is_zero()
    }

    fn weights(&self, values: &[BigUint]) -> Vec<BigUint> {
        values.to_vec()
    }
}

/// Truncating floats with a fixed mantissa length.
#[derive(Clone, Copy, Debug)]
pub struct Truncated {
    pub precision: u32,
}

impl CountArith for Truncated {
    type Value = ApproxFloat;

    fn lift(&self, x: &BigUint) -> ApproxFloat {
        ApproxFloat::truncate(x, self.precision)
    }

    fn pow2(&self, e: u64) -> ApproxFloat {
        ApproxFloat::pow2(e, self.precision)
    }

    fn zero(&self) -> ApproxFloat {
        ApproxFloat::zero(self.precision)
    }

    fn one(&self) -> ApproxFloat {
        ApproxFloat::one(self.precision)
    }

    fn add(&self, a: &ApproxFloat, b: &ApproxFloat) -> ApproxFloat {
        a + b
    }

    fn mul(&self, a: &ApproxFloat, b: &ApproxFloat) -> ApproxFloat {
        a * b
    }

    fn div_small(&self, a: &ApproxFloat, k: u64) -> ApproxFloat {
        a.div_exact_small(k)
    }

    fn is_zero(&self, a: &ApproxFloat) -> bool {
        a.is_zero()
    }

    /// `m·2^p` per value; rows holding a negative exponent are shifted up as a whole.
    fn weights(&self, values: &[ApproxFloat]) -> Vec<BigUint> {
        let low = values
            .iter()
            .filter_map(|v| v.exponent())
            .min()
            .unwrap_or(0)
            .min(0);
        values
            .iter()
            .map(|v| match (v.exponent(), v.mantissa()) {
                (Some(p), Some(m)) => m << ((p - low) as u64),
                _ => BigUint::zero(),
            })
            .collect()
    }
}
