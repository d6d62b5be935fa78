use std::collections::BTreeSet;

use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, Zero};
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SamplingError {
    #[error("every subset of a {0}-element ground set is forbidden")]
    Saturated(usize),
    #[error("forbidden code {0} listed twice")]
    Duplicate(BigUint),
    #[error("forbidden code {code} does not encode a subset of {size} elements")]
    OutOfRange { code: BigUint, size: usize },
}

/// Bit `j` of the code is set iff `ground[j]` is in `subset`.
pub fn encode(ground: &[usize], subset: &BTreeSet<usize>) -> BigUint {
    let mut code = BigUint::zero();
    for (j, v) in ground.iter().enumerate() {
        if subset.contains(v) {
            code.set_bit(j as u64, true);
        }
    }
    code
}

pub fn decode(ground: &[usize], code: &BigUint) -> BTreeSet<usize> {
    ground
        .iter()
        .enumerate()
        .filter(|(j, _)| code.bit(*j as u64))
        .map(|(_, &v)| v)
        .collect()
}

/// A uniform `k`-subset by a partial Fisher–Yates shuffle.
pub fn sample_k_subset<R: Rng + ?Sized>(universe: &[usize], k: usize, rng: &mut R) -> BTreeSet<usize> {
    assert!(k <= universe.len(), "cannot choose {k} of {}", universe.len());
    let mut items = universe.to_vec();
    for i in 0..k {
        let j = rng.gen_range(i..items.len());
        items.swap(i, j);
    }
    items.truncate(k);
    items.into_iter().collect()
}

/// Uniform over the `2^k − 1` nonempty subsets.
pub fn sample_nonempty_subset<R: Rng + ?Sized>(items: &[usize], rng: &mut R) -> BTreeSet<usize> {
    assert!(!items.is_empty(), "no nonempty subset of an empty set");
    let count = (BigUint::one() << items.len()) - 1u32;
    decode(items, &(rng.gen_biguint_below(&count) + 1u32))
}

/// Uniform over all `2^k` subsets.
pub fn sample_any_subset<R: Rng + ?Sized>(items: &[usize], rng: &mut R) -> BTreeSet<usize> {
    decode(items, &rng.gen_biguint(items.len() as u64))
}

/// The `w`-th (0-based) code not in `forbidden`, which must be sorted.
///
/// Iterates `y ← w + #{f ∈ forbidden : f ≤ y}` until it stops moving.
pub fn nth_surviving_code(w: &BigUint, forbidden: &[BigUint]) -> BigUint {
    let mut y = w.clone();
    loop {
        let below = forbidden.partition_point(|f| f <= &y);
        let next = w + below;
        if next == y {
            return y;
        }
        y = next;
    }
}

/// Uniform over the subsets of `ground` whose codes are not forbidden.
pub fn sample_subset_excluding<R: Rng + ?Sized>(
    ground: &[usize],
    forbidden: &[BigUint],
    rng: &mut R,
) -> Result<BTreeSet<usize>, SamplingError> {
    let space = BigUint::one() << ground.len();
    let mut sorted = forbidden.to_vec();
    sorted.sort();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(SamplingError::Duplicate(w[0].clone()));
    }
    if let Some(code) = sorted.last().filter(|&c| c >= &space) {
        return Err(SamplingError::OutOfRange {
            code: code.clone(),
            size: ground.len(),
        });
    }
    let survivors = space - sorted.len();
    if survivors.is_zero() {
        return Err(SamplingError::Saturated(ground.len()));
    }
    let w = rng.gen_biguint_below(&survivors);
    Ok(decode(ground, &nth_surviving_code(&w, &sorted)))
}

/// Uniform over the subsets with at least two elements.
pub fn sample_subset_of_at_least_two<R: Rng + ?Sized>(
    items: &[usize],
    rng: &mut R,
) -> Result<BTreeSet<usize>, SamplingError> {
    let small: Vec<BigUint> = std::iter::once(BigUint::zero())
        .chain((0..items.len()).map(|j| BigUint::one() << j))
        .collect();
    sample_subset_excluding(items, &small, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use std::collections::BTreeMap;

    fn within_4_sigma(counts: &BTreeMap<BTreeSet<usize>, usize>, outcomes: usize, draws: usize) {
        assert_eq!(counts.len(), outcomes);
        let p = 1.0 / outcomes as f64;
        let mean = draws as f64 * p;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        for (s, &c) in counts {
            assert!((c as f64 - mean).abs() <= 4.0 * sigma, "{s:?}: {c} vs {mean}");
        }
    }

    #[test]
    fn trivial_cases() {
        let mut rng = seeded(1);
        let all = [3, 5, 8];
        assert_eq!(sample_k_subset(&all, 3, &mut rng), BTreeSet::from(all));
        assert!(sample_k_subset(&all, 0, &mut rng).is_empty());
        for _ in 0..200 {
            assert_eq!(sample_nonempty_subset(&[7], &mut rng), BTreeSet::from([7]));
            assert!(!sample_nonempty_subset(&all, &mut rng).is_empty());
        }
    }

    #[test]
    fn codes_round_trip() {
        let ground = [2, 4, 9];
        let s = BTreeSet::from([2, 9]);
        assert_eq!(encode(&ground, &s), BigUint::from(5u8));
        assert_eq!(decode(&ground, &BigUint::from(5u8)), s);
    }

    #[test]
    fn fixpoint_rank() {
        let f: Vec<BigUint> = [1u8, 2, 5].iter().map(|&x| x.into()).collect();
        let survivors: Vec<u8> = (0..5u8)
            .map(|w| u8::try_from(nth_surviving_code(&w.into(), &f)).unwrap())
            .collect();
        assert_eq!(survivors, vec![0, 3, 4, 6, 7]);
    }

    #[test]
    fn excluding_errors() {
        let mut rng = seeded(2);
        let all: Vec<BigUint> = (0..4u8).map(BigUint::from).collect();
        assert_eq!(sample_subset_excluding(&[0, 1], &all, &mut rng), Err(SamplingError::Saturated(2)));
        let dup = vec![BigUint::one(), BigUint::one()];
        assert!(matches!(sample_subset_excluding(&[0, 1], &dup, &mut rng), Err(SamplingError::Duplicate(_))));
        let big = vec![BigUint::from(4u8)];
        assert!(matches!(sample_subset_excluding(&[0, 1], &big, &mut rng), Err(SamplingError::OutOfRange { .. })));
    }

    #[test]
    fn k_subsets_are_uniform() {
        let mut rng = seeded(3);
        let mut counts = BTreeMap::new();
        let draws = 100_000;
        for _ in 0..draws {
            *counts.entry(sample_k_subset(&[0, 1, 2, 3], 2, &mut rng)).or_insert(0) += 1;
        }
        within_4_sigma(&counts, 6, draws);
    }

    #[test]
    fn nonempty_subsets_are_uniform() {
        let mut rng = seeded(4);
        let mut counts = BTreeMap::new();
        let draws = 30_000;
        for _ in 0..draws {
            *counts.entry(sample_nonempty_subset(&[0, 1], &mut rng)).or_insert(0) += 1;
        }
        within_4_sigma(&counts, 3, draws);
    }

    #[test]
    fn excluding_single_code() {
        let mut rng = seeded(5);
        let mut counts = BTreeMap::new();
        let draws = 30_000;
        for _ in 0..draws {
            let s = sample_subset_excluding(&[0, 1], &[BigUint::one()], &mut rng).unwrap();
            *counts.entry(s).or_insert(0) += 1;
        }
        assert!(!counts.contains_key(&BTreeSet::from([0])));
        within_4_sigma(&counts, 3, draws);
    }

    #[test]
    fn excluding_random_codes_is_uniform() {
        let mut rng = seeded(6);
        let ground = [0, 1, 2, 3];
        let forbidden: Vec<BigUint> = sample_k_subset(&(0..16).collect::<Vec<_>>(), 5, &mut rng)
            .into_iter()
            .map(BigUint::from)
            .collect();
        let mut counts = BTreeMap::new();
        let draws = 100_000;
        for _ in 0..draws {
            let s = sample_subset_excluding(&ground, &forbidden, &mut rng).unwrap();
            assert!(!forbidden.contains(&encode(&ground, &s)));
            *counts.entry(s).or_insert(0) += 1;
        }
        within_4_sigma(&counts, 11, draws);
    }

    #[test]
    fn at_least_two() {
        let mut rng = seeded(7);
        let mut counts = BTreeMap::new();
        let draws = 40_000;
        for _ in 0..draws {
            let s = sample_subset_of_at_least_two(&[0, 1, 2], &mut rng).unwrap();
            assert!(s.len() >= 2);
            *counts.entry(s).or_insert(0) += 1;
        }
        within_4_sigma(&counts, 4, draws);
    }
}
