//! Approximate counting of DAG families with truncating floats.

use crate::float::{mantissa_length, ApproxFloat, Epsilon, FloatError, Problem};
use crate::table::{CountTable, Family, TableError};

/// The truncated-float table `T̃(i, k)`, `1 ≤ k ≤ i ≤ n`.
pub fn approx_table(family: Family, n: usize, precision: u32) -> Result<CountTable, TableError> {
    CountTable::approx(family, n, precision)
}

/// A `(1 − ε)`-approximation `Z ≤ F(n)` together with its guarantee.
#[derive(Clone, Debug)]
pub struct ApproxCount {
    pub family: Family,
    pub n: usize,
    pub epsilon: Epsilon,
    pub value: ApproxFloat,
}

impl ApproxCount {
    pub fn precision(&self) -> u32 {
        self.value.precision()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CountError {
    #[error(transparent)]
    Float(#[from] FloatError),
    #[error(transparent)]
    Table(#[from] TableError),
}

/// Row `n` of the approximate table, summed left to right over `k = 1..n`.
pub fn approx_count(family: Family, n: usize, eps: &Epsilon) -> Result<ApproxCount, CountError> {
    let t = mantissa_length(Problem::DagCount, n as u64, eps)?;
    let table = approx_table(family, n, t)?;
    let value = table.approx_total(n).expect("approximate table");
    Ok(ApproxCount {
        family,
        n,
        epsilon: eps.clone(),
        value,
    })
}
