//! Truncating floating-point numbers with an exact exponent.
//!
//! A nonzero [`ApproxFloat`] stores the value `m · 2^(p − t)` where `t` is the
//! precision, `m` is a normalized `t`-bit mantissa (`2^(t−1) ≤ m < 2^t`) and
//! `p` is an exact exponent, so `2^(p−1) ≤ value < 2^p`. Every operation
//! computes the exact dyadic result and then drops all but the leading `t`
//! bits, which gives the one-sided bound `(1 − 2^(1−t))·x ≤ fl(x) ≤ x`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FloatError {
    #[error("precision mismatch: {0} vs {1} mantissa bits")]
    PrecisionMismatch(u32, u32),
    #[error("precision must be at least one bit")]
    ZeroPrecision,
    #[error("epsilon must lie in (0, 1], got {0}")]
    EpsilonOutOfRange(String),
    #[error("cannot parse epsilon from {0:?}")]
    EpsilonSyntax(String),
    #[error("problem size must be at least 1")]
    EmptyProblem,
}

#[derive(Clone, Debug)]
struct Normal {
    exponent: i64,
    mantissa: BigUint,
}

/// A nonnegative number with an exact exponent and a `precision`-bit mantissa.
#[derive(Clone, Debug)]
pub struct ApproxFloat {
    precision: u32,
    normal: Option<Normal>,
}

impl ApproxFloat {
    pub fn zero(precision: u32) -> Self {
        assert!(precision >= 1, "precision must be at least one bit");
        ApproxFloat {
            precision,
            normal: None,
        }
    }

    pub fn one(precision: u32) -> Self {
        Self::pow2(0, precision)
    }

    /// Exactly `2^e`.
    pub fn pow2(e: u64, precision: u32) -> Self {
        assert!(precision >= 1, "precision must be at least one bit");
        let exponent = i64::try_from(e)
            .ok()
            .and_then(|e| e.checked_add(1))
            .expect("exponent overflow");
        ApproxFloat {
            precision,
            normal: Some(Normal {
                exponent,
                mantissa: BigUint::one() << (precision - 1),
            }),
        }
    }

    /// `fl(x)`: keeps the leading `precision` bits of `x`.
    pub fn truncate(x: &BigUint, precision: u32) -> Self {
        Self::from_scaled(x.clone(), 0, precision)
    }

    /// Truncation of the exact value `scaled · 2^shift`.
    fn from_scaled(scaled: BigUint, shift: i128, precision: u32) -> Self {
        assert!(precision >= 1, "precision must be at least one bit");
        if scaled.is_zero() {
            return Self::zero(precision);
        }
        let len = scaled.bits();
        let t = u64::from(precision);
        let mantissa = match len.cmp(&t) {
            Ordering::Greater => scaled >> (len - t),
            Ordering::Less => scaled << (t - len),
            Ordering::Equal => scaled,
        };
        let exponent = i64::try_from(i128::from(len) + shift).expect("exponent overflow");
        ApproxFloat {
            precision,
            normal: Some(Normal { exponent, mantissa }),
        }
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn is_zero(&self) -> bool {
        self.normal.is_none()
    }

    /// The exponent `p`, or `None` for zero.
    pub fn exponent(&self) -> Option<i64> {
        self.normal.as_ref().map(|n| n.exponent)
    }

    /// The normalized mantissa `m`, or `None` for zero.
    pub fn mantissa(&self) -> Option<&BigUint> {
        self.normal.as_ref().map(|n| &n.mantissa)
    }

    /// Exponent of the least significant mantissa bit, `p − t`.
    fn ulp_exponent(n: &Normal, precision: u32) -> i128 {
        i128::from(n.exponent) - i128::from(precision)
    }

    fn check(&self, other: &Self) -> Result<(), FloatError> {
        if self.precision == other.precision {
            Ok(())
        } else {
            Err(FloatError::PrecisionMismatch(self.precision, other.precision))
        }
    }

    /// `self ⊕ other`.
    pub fn try_add(&self, other: &Self) -> Result<Self, FloatError> {
        self.check(other)?;
        let t = self.precision;
        let (a, b) = match (&self.normal, &other.normal) {
            (None, _) => return Ok(other.clone()),
            (_, None) => return Ok(self.clone()),
            (Some(a), Some(b)) => {
                if a.exponent >= b.exponent {
                    (a, b)
                } else {
                    (b, a)
                }
            }
        };
        // b < 2^pb ≤ ulp(a): a + b truncates back to a.
        if i128::from(b.exponent) <= i128::from(a.exponent) - i128::from(t) {
            return Ok(ApproxFloat {
                precision: t,
                normal: Some(a.clone()),
            });
        }
        let ea = Self::ulp_exponent(a, t);
        let eb = Self::ulp_exponent(b, t);
        let low = ea.min(eb);
        let sum = (&a.mantissa << ((ea - low) as u64)) + (&b.mantissa << ((eb - low) as u64));
        Ok(Self::from_scaled(sum, low, t))
    }

    /// `self ⊗ other`.
    pub fn try_mul(&self, other: &Self) -> Result<Self, FloatError> {
        self.check(other)?;
        let t = self.precision;
        match (&self.normal, &other.normal) {
            (Some(a), Some(b)) => {
                let shift = Self::ulp_exponent(a, t) + Self::ulp_exponent(b, t);
                Ok(Self::from_scaled(&a.mantissa * &b.mantissa, shift, t))
            }
            _ => Ok(Self::zero(t)),
        }
    }

    /// `fl(self / divisor)` for a positive integer divisor.
    pub fn div_exact_small(&self, divisor: u64) -> Self {
        assert!(divisor > 0, "division by zero");
        let t = self.precision;
        let Some(n) = &self.normal else {
            return self.clone();
        };
        // Widen by bits(divisor) so the integer quotient keeps at least t bits;
        // truncating floor(q) to t bits then equals truncating the exact quotient.
        let widen = u64::from(64 - divisor.leading_zeros());
        let quotient = (&n.mantissa << widen) / BigUint::from(divisor);
        Self::from_scaled(quotient, Self::ulp_exponent(n, t) - i128::from(widen), t)
    }

    /// `value · 2^t`, i.e. `m · 2^p`; `None` if the exponent is negative.
    pub fn scaled_integer(&self) -> Option<BigUint> {
        match &self.normal {
            None => Some(BigUint::zero()),
            Some(n) => u64::try_from(n.exponent).ok().map(|p| &n.mantissa << p),
        }
    }

    /// The exact represented value.
    pub fn to_ratio(&self) -> BigRational {
        match &self.normal {
            None => BigRational::zero(),
            Some(n) => {
                let m = BigInt::from(n.mantissa.clone());
                let e = Self::ulp_exponent(n, self.precision);
                if e >= 0 {
                    BigRational::from_integer(m << (e as u64))
                } else {
                    BigRational::new(m, BigInt::one() << ((-e) as u64))
                }
            }
        }
    }

    /// `p:mantissa-hex`; zero renders as `0:0`.
    pub fn to_hex_string(&self) -> String {
        match &self.normal {
            None => "0:0".to_string(),
            Some(n) => format!("{}:{:x}", n.exponent, n.mantissa),
        }
    }

    /// Parses the `p:mantissa-hex` rendering back at the given precision.
    pub fn from_hex_string(s: &str, precision: u32) -> Option<Self> {
        let (p, m) = s.split_once(':')?;
        let exponent: i64 = p.parse().ok()?;
        let mantissa = BigUint::parse_bytes(m.as_bytes(), 16)?;
        if mantissa.is_zero() {
            return (exponent == 0).then(|| Self::zero(precision));
        }
        if mantissa.bits() != u64::from(precision) {
            return None;
        }
        Some(ApproxFloat {
            precision,
            normal: Some(Normal { exponent, mantissa }),
        })
    }

    /// Exact decimal rendering; dyadic values always terminate.
    pub fn to_decimal_string(&self) -> String {
        let Some(n) = &self.normal else {
            return "0".to_string();
        };
        let e = Self::ulp_exponent(n, self.precision);
        if e >= 0 {
            return (&n.mantissa << (e as u64)).to_string();
        }
        let frac_digits = (-e) as u64;
        // m / 2^d = m · 5^d / 10^d
        let digits = (&n.mantissa * num_traits::pow(BigUint::from(5u8), frac_digits as usize))
            .to_string();
        let d = frac_digits as usize;
        let padded = if digits.len() <= d {
            format!("{}{}", "0".repeat(d - digits.len() + 1), digits)
        } else {
            digits
        };
        let (int, frac) = padded.split_at(padded.len() - d);
        let frac = frac.trim_end_matches('0');
        if frac.is_empty() {
            int.to_string()
        } else {
            format!("{int}.{frac}")
        }
    }
}

impl PartialEq for ApproxFloat {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for ApproxFloat {}

impl PartialOrd for ApproxFloat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Orders by represented value: exponents first, then aligned mantissas.
impl Ord for ApproxFloat {
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.normal, &other.normal) {
            (None, None) => Ordering::Equal,
            (None, Some(_)) => Ordering::Less,
            (Some(_), None) => Ordering::Greater,
            (Some(a), Some(b)) => a.exponent.cmp(&b.exponent).then_with(|| {
                if self.precision == other.precision {
                    a.mantissa.cmp(&b.mantissa)
                } else {
                    (&a.mantissa << other.precision).cmp(&(&b.mantissa << self.precision))
                }
            }),
        }
    }
}

impl Add for &ApproxFloat {
    type Output = ApproxFloat;

    /// Panics on mismatched precisions; use [`ApproxFloat::try_add`] to recover.
    fn add(self, rhs: &ApproxFloat) -> ApproxFloat {
        self.try_add(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Mul for &ApproxFloat {
    type Output = ApproxFloat;

    fn mul(self, rhs: &ApproxFloat) -> ApproxFloat {
        self.try_mul(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl fmt::Display for ApproxFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal_string())
    }
}

/// Error parameter `0 < ε ≤ 1`, held as an exact rational.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Epsilon(BigRational);

impl Epsilon {
    pub fn from_ratio(r: BigRational) -> Result<Self, FloatError> {
        if r.is_positive() && r <= BigRational::one() {
            Ok(Epsilon(r))
        } else {
            Err(FloatError::EpsilonOutOfRange(r.to_string()))
        }
    }

    /// The exact binary value of `x`.
    pub fn from_f64(x: f64) -> Result<Self, FloatError> {
        let r = BigRational::from_float(x).ok_or_else(|| FloatError::EpsilonOutOfRange(x.to_string()))?;
        Self::from_ratio(r)
    }

    pub fn as_ratio(&self) -> &BigRational {
        &self.0
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// `1 − ε`.
    pub fn complement(&self) -> BigRational {
        BigRational::one() - &self.0
    }

    /// Smallest `j ≥ 0` with `2^j · ε ≥ k`, i.e. `⌈log₂(k/ε)⌉` clamped at zero.
    pub fn ceil_log2_over(&self, k: &BigUint) -> u64 {
        let num = self.0.numer().magnitude();
        let target = k * self.0.denom().magnitude();
        if num >= &target {
            return 0;
        }
        // 2^j · num ≥ target
        let mut j = target.bits().saturating_sub(num.bits());
        while (num << j) < target {
            j += 1;
        }
        while j > 0 && (num << (j - 1)) >= target {
            j -= 1;
        }
        j
    }
}

impl FromStr for Epsilon {
    type Err = FloatError;

    /// Accepts plain decimals (`0.01`, `1`, `.5`) and exact scientific forms (`1e-3`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || FloatError::EpsilonSyntax(s.to_string());
        let t = s.trim();
        let (mantissa, exp) = match t.find(['e', 'E']) {
            Some(i) => (&t[..i], t[i + 1..].parse::<i32>().map_err(|_| bad())?),
            None => (t, 0),
        };
        let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
        if (int.is_empty() && frac.is_empty())
            || !int.bytes().all(|b| b.is_ascii_digit())
            || !frac.bytes().all(|b| b.is_ascii_digit())
        {
            return Err(bad());
        }
        let digits = format!("{int}{frac}");
        let numer = BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).map_err(|_| bad())?;
        let scale = i64::from(exp) - frac.len() as i64;
        let ten = BigInt::from(10u8);
        let r = if scale >= 0 {
            BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
        } else {
            BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
        };
        Self::from_ratio(r)
    }
}

impl fmt::Display for Epsilon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The counting problems whose mantissa length is tabulated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Problem {
    DagCount,
    DagGenerate,
    Knapsack,
    /// Weighted s,t-paths with `arcs` arcs, sized from the analytic depth bound.
    DagKnapsack { arcs: u64 },
}

fn ceil_log2(n: u64) -> u64 {
    if n <= 1 {
        0
    } else {
        u64::from(64 - (n - 1).leading_zeros())
    }
}

/// Analytic depth budget factor `max(1, ⌈log₂(m/n)⌉ + 1)` for a graph with `n` vertices and `m` arcs.
pub fn depth_budget_factor(n: u64, arcs: u64) -> u64 {
    if arcs <= n {
        return 1;
    }
    let mut j = 0u64;
    while n.saturating_mul(1u64 << j.min(63)) < arcs {
        j += 1;
    }
    j + 1
}

/// Mantissa length `t` for a problem of size `n` at error `ε`.
///
/// The raw value `1 + ⌈log₂(K/ε)⌉` (with `K` = `3n²`, `3n³`, `n`, or `n·L`) is
/// clamped below by `c·⌈log₂ n⌉` and above by the full-precision width, at
/// which point arithmetic becomes exact.
pub fn mantissa_length(problem: Problem, n: u64, eps: &Epsilon) -> Result<u32, FloatError> {
    if n == 0 {
        return Err(FloatError::EmptyProblem);
    }
    let big = BigUint::from(n);
    let (k, c, full) = match problem {
        Problem::DagCount => (&big * &big * 3u32, 2, n.saturating_mul(n)),
        Problem::DagGenerate => (&big * &big * &big * 3u32, 2, n.saturating_mul(n)),
        Problem::Knapsack => (big.clone(), 1, n),
        Problem::DagKnapsack { arcs } => (&big * depth_budget_factor(n, arcs), 1, arcs.max(1)),
    };
    let raw = 1 + eps.ceil_log2_over(&k);
    let t = raw.max(c * ceil_log2(n)).min(full).max(1);
    Ok(u32::try_from(t).expect("mantissa length fits in u32"))
}

/// Mantissa length for a sequence of at most `depth` dependent additions.
pub fn mantissa_length_for_depth(depth: u64, full_width: u64, eps: &Epsilon) -> u32 {
    let raw = 1 + eps.ceil_log2_over(&BigUint::from(depth.max(1)));
    u32::try_from(raw.min(full_width.max(1)).max(1)).expect("mantissa length fits in u32")
}

/// `(1 − 2^(1−t))^exp`, exactly.
pub fn truncation_factor(precision: u32, exp: u64) -> BigRational {
    let base = BigRational::one() - BigRational::new(BigInt::one(), BigInt::one() << (precision - 1));
    num_traits::pow(base, exp as usize)
}

/// Integer part of a nonnegative rational.
pub fn floor_ratio(r: &BigRational) -> BigInt {
    r.numer().div_floor(r.denom())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int(x: u64) -> BigUint {
        BigUint::from(x)
    }

    fn value(f: &ApproxFloat) -> BigRational {
        f.to_ratio()
    }

    fn rat(x: u64) -> BigRational {
        BigRational::from_integer(BigInt::from(x))
    }

    #[test]
    fn truncate_examples() {
        let f = ApproxFloat::truncate(&int(13), 3);
        assert_eq!(value(&f), rat(12));
        assert_eq!(f.exponent(), Some(4));
        assert_eq!(f.mantissa(), Some(&int(0b110)));
        assert_eq!(value(&ApproxFloat::truncate(&int(5), 3)), rat(5));
        assert!(ApproxFloat::truncate(&int(0), 8).is_zero());
    }

    #[test]
    fn add_and_mul_examples() {
        let seven = ApproxFloat::truncate(&int(7), 3);
        // 14 = 111₂·2 keeps three significant bits
        assert_eq!(value(&(&seven + &seven)), rat(14));
        let six = ApproxFloat::truncate(&int(6), 3);
        assert_eq!(value(&(&seven + &six)), rat(12));
        let three = ApproxFloat::truncate(&int(3), 3);
        assert_eq!(value(&(&three * &three)), rat(8));
        let zero = ApproxFloat::zero(3);
        assert_eq!(&seven + &zero, seven);
        let one = ApproxFloat::one(3);
        assert_eq!(one.exponent(), Some(1));
        assert_eq!(one.mantissa(), Some(&int(0b100)));
        assert_eq!(&seven * &one, seven);
    }

    #[test]
    fn mul_by_pow2_is_a_shift() {
        let x = ApproxFloat::truncate(&int(0b1011_0110), 5);
        let y = &x * &ApproxFloat::pow2(7, 5);
        assert_eq!(y.mantissa(), x.mantissa());
        assert_eq!(y.exponent().unwrap(), x.exponent().unwrap() + 7);
    }

    #[test]
    fn pow2_examples() {
        assert_eq!(value(&ApproxFloat::pow2(0, 4)), rat(1));
        assert_eq!(value(&ApproxFloat::pow2(10, 4)), rat(1024));
        for e in 0..=200u64 {
            for t in 1..=64 {
                assert_eq!(
                    ApproxFloat::truncate(&(BigUint::one() << e), t).to_hex_string(),
                    ApproxFloat::pow2(e, t).to_hex_string()
                );
            }
        }
    }

    #[test]
    fn mismatched_precision_is_an_error() {
        let a = ApproxFloat::one(3);
        let b = ApproxFloat::one(4);
        assert_eq!(a.try_add(&b), Err(FloatError::PrecisionMismatch(3, 4)));
        assert!(a.try_mul(&b).is_err());
    }

    #[test]
    fn ordering() {
        let z = ApproxFloat::zero(3);
        let a = ApproxFloat::truncate(&int(0b1100), 3);
        let b = ApproxFloat::truncate(&int(0b1010), 3);
        assert!(z < ApproxFloat::one(3));
        assert!(a > b);
    }

    #[test]
    fn division_truncates_quotient() {
        let x = ApproxFloat::truncate(&int(100), 8);
        assert_eq!(value(&x.div_exact_small(4)), rat(25));
        // 100/3 = 33.33.., 8 bits keep 33.25
        let q = x.div_exact_small(3);
        assert_eq!(q.to_decimal_string(), "33.25");
        assert!(value(&q) <= BigRational::new(100.into(), 3.into()));
    }

    #[test]
    fn renderings() {
        let x = ApproxFloat::truncate(&int(13), 3);
        assert_eq!(x.to_hex_string(), "4:6");
        assert_eq!(x.to_decimal_string(), "12");
        assert_eq!(ApproxFloat::from_hex_string("4:6", 3), Some(x));
        assert_eq!(ApproxFloat::zero(3).to_hex_string(), "0:0");
        let half = ApproxFloat::one(4).div_exact_small(8);
        assert_eq!(half.to_decimal_string(), "0.125");
    }

    #[test]
    fn epsilon_parsing() {
        let e: Epsilon = "0.1".parse().unwrap();
        assert_eq!(e.as_ratio(), &BigRational::new(1.into(), 10.into()));
        assert!("0".parse::<Epsilon>().is_err());
        assert!("1.5".parse::<Epsilon>().is_err());
        assert!("abc".parse::<Epsilon>().is_err());
        assert_eq!("1e-2".parse::<Epsilon>().unwrap(), "0.01".parse().unwrap());
        assert_eq!("1".parse::<Epsilon>().unwrap().ceil_log2_over(&int(8)), 3);
        assert_eq!("1".parse::<Epsilon>().unwrap().ceil_log2_over(&int(9)), 4);
    }

    #[test]
    fn mantissa_length_examples() {
        let one: Epsilon = "1".parse().unwrap();
        assert_eq!(mantissa_length(Problem::Knapsack, 8, &one).unwrap(), 4);
        assert_eq!(mantissa_length(Problem::DagCount, 4, &one).unwrap(), 7);
        assert_eq!(mantissa_length(Problem::DagGenerate, 4, &one).unwrap(), 9);
        // Clamp to full precision.
        let tiny: Epsilon = "1e-30".parse().unwrap();
        assert_eq!(mantissa_length(Problem::DagCount, 4, &tiny).unwrap(), 16);
        assert_eq!(mantissa_length(Problem::Knapsack, 8, &tiny).unwrap(), 8);
        assert!(mantissa_length(Problem::Knapsack, 0, &one).is_err());
    }

    #[test]
    fn depth_budget() {
        assert_eq!(depth_budget_factor(10, 5), 1);
        assert_eq!(depth_budget_factor(10, 10), 1);
        assert_eq!(depth_budget_factor(10, 11), 2);
        assert_eq!(depth_budget_factor(10, 40), 3);
        assert_eq!(depth_budget_factor(10, 41), 4);
    }
}
