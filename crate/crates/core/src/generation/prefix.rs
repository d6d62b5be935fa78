use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, Zero};
use rand::Rng;

use crate::table::{CountTable, Family, Scalars};

/// Integer weights `u_1..u_m` with prefix sums `P_j = u_1 + … + u_j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightRow {
    weights: Vec<BigUint>,
    prefix: Vec<BigUint>,
}

impl WeightRow {
    pub fn new(weights: Vec<BigUint>) -> Self {
        let mut acc = BigUint::zero();
        let prefix = weights
            .iter()
            .map(|w| {
                acc += w;
                acc.clone()
            })
            .collect();
        WeightRow { weights, prefix }
    }

    pub fn weights(&self) -> &[BigUint] {
        &self.weights
    }

    pub fn prefixes(&self) -> &[BigUint] {
        &self.prefix
    }

    pub fn total(&self) -> BigUint {
        self.prefix.last().cloned().unwrap_or_default()
    }

    /// Smallest 1-based `j` with `r ≤ P_j`; requires `1 ≤ r ≤ total`.
    pub fn successor(&self, r: &BigUint) -> usize {
        let j = self.prefix.partition_point(|p| p < r);
        assert!(j < self.prefix.len(), "successor query beyond the row total");
        j + 1
    }

    /// Draws a 1-based position with probability `u_j / total`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = self.total();
        assert!(!total.is_zero(), "cannot sample from an all-zero row");
        let r = rng.gen_biguint_below(&total) + BigUint::one();
        self.successor(&r)
    }
}

/// Sampling weights derived from a [`CountTable`]: for each row `i` the weights
/// `T(i, 1..i)`, and for each pair `(i, k)` the weights of the summands of the
/// recurrence for `T(i, k)` (which drive the next recursive step).
///
/// Approximate entries `m·2^(p−t)` are stored as the integers `m·2^p`, so every
/// ratio equals the ratio of the truncated values exactly.
#[derive(Clone, Debug)]
pub struct PrefixIndex {
    family: Family,
    rows: Vec<WeightRow>,
    transitions: Vec<Vec<WeightRow>>,
}

impl PrefixIndex {
    pub fn build(table: &CountTable) -> Self {
        let mut scalars = Scalars::default();
        let n = table.n();
        let rows = (1..=n).map(|i| WeightRow::new(table.row_weights(i))).collect();
        let transitions = (1..=n)
            .map(|i| {
                (1..=i)
                    .map(|k| WeightRow::new(table.summand_weights_cached(&mut scalars, i, k)))
                    .collect()
            })
            .collect();
        PrefixIndex {
            family: table.family(),
            rows,
            transitions,
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, i: usize) -> &WeightRow {
        &self.rows[i - 1]
    }

    pub fn transition(&self, i: usize, k: usize) -> &WeightRow {
        &self.transitions[i - 1][k - 1]
    }
}

pub fn build_prefix_index(table: &CountTable) -> PrefixIndex {
    PrefixIndex::build(table)
}

/// Draws `k ∈ 1..=i` with probability `T(i, k) / Σ_j T(i, j)`.
pub fn sample_source_count<R: Rng + ?Sized>(index: &PrefixIndex, i: usize, rng: &mut R) -> usize {
    index.row(i).sample(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::exact_dag_table;
    use crate::rng::seeded;

    fn big(xs: &[u64]) -> Vec<BigUint> {
        xs.iter().map(|&x| BigUint::from(x)).collect()
    }

    #[test]
    fn exact_rows() {
        let index = build_prefix_index(&exact_dag_table(3));
        assert_eq!(index.row(2).weights(), big(&[2, 1]).as_slice());
        assert_eq!(index.row(2).prefixes(), big(&[2, 3]).as_slice());
        assert_eq!(index.row(1).prefixes(), big(&[1]).as_slice());
        // a(3,1) = 3 · (1·1·a(2,1) + 1·1·a(2,2))... summands at (3,1): s=1: 1·2^1·2, s=2: 1·1·1
        assert_eq!(index.transition(3, 1).weights(), big(&[4, 1]).as_slice());
    }

    #[test]
    fn successor_queries() {
        let row = WeightRow::new(big(&[2, 1]));
        assert_eq!(row.successor(&BigUint::from(1u8)), 1);
        assert_eq!(row.successor(&BigUint::from(2u8)), 1);
        assert_eq!(row.successor(&BigUint::from(3u8)), 2);
        let zeros = WeightRow::new(big(&[0, 3, 0, 1]));
        assert_eq!(zeros.successor(&BigUint::from(3u8)), 2);
        assert_eq!(zeros.successor(&BigUint::from(4u8)), 4);
    }

    #[test]
    fn single_vertex_row() {
        let index = build_prefix_index(&exact_dag_table(4));
        let mut rng = seeded(3);
        assert!((0..100).all(|_| sample_source_count(&index, 1, &mut rng) == 1));
    }

    #[test]
    fn approx_weights_are_scaled_values() {
        let table = CountTable::approx(Family::Dag, 6, 5).unwrap();
        let index = build_prefix_index(&table);
        for k in 1..=6 {
            let f = table.approx_entry(6, k).unwrap();
            assert_eq!(&index.row(6).weights()[k - 1], &f.scaled_integer().unwrap());
        }
    }
}
