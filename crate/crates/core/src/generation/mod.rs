//! Random generation of labeled DAGs, essential DAGs and extensional DAGs
//! driven by a count table.
//!
//! Each recursive step first draws the size of the next layer with weight
//! equal to the corresponding summand of the recurrence, then recurses with
//! that size prescribed. With an exact table every member of the family is
//! equally likely; with a truncated table the probabilities are the ratios of
//! truncated entries.

mod prefix;
mod probability;
mod subsets;

use std::collections::BTreeSet;

use num_bigint::{BigUint, RandBigInt};
use rand::Rng;
use thiserror::Error;

use crate::graph::LabeledDag;
use crate::table::{ess_branches, CountTable, Family};

pub use prefix::{build_prefix_index, sample_source_count, PrefixIndex, WeightRow};
pub use probability::dag_probability;
pub use subsets::{
    decode, encode, nth_surviving_code, sample_any_subset, sample_k_subset, sample_nonempty_subset,
    sample_subset_excluding, sample_subset_of_at_least_two, SamplingError,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenerationError {
    #[error("expected a {expected} table, got {found}")]
    WrongFamily { expected: Family, found: Family },
    #[error("table covers {table} vertices, asked for {n}")]
    TooLarge { n: usize, table: usize },
    #[error("no {0} graph has {1} vertices")]
    EmptyRow(Family, usize),
    #[error("graph is not a member of the {0} family")]
    NotInFamily(Family),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
}

/// A generated graph with its sources (`dag`, `extdag`) or maximum-depth vertices (`essdag`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sample {
    pub dag: LabeledDag,
    pub top: BTreeSet<usize>,
}

#[derive(Clone, Debug)]
pub struct Generator {
    table: CountTable,
    index: PrefixIndex,
}

fn without(labels: &[usize], drop: &BTreeSet<usize>) -> Vec<usize> {
    labels.iter().copied().filter(|v| !drop.contains(v)).collect()
}

impl Generator {
    pub fn new(table: CountTable) -> Self {
        let index = PrefixIndex::build(&table);
        Generator { table, index }
    }

    pub fn table(&self) -> &CountTable {
        &self.table
    }

    pub fn index(&self) -> &PrefixIndex {
        &self.index
    }

    pub fn family(&self) -> Family {
        self.table.family()
    }

    fn check_size(&self, n: usize) -> Result<(), GenerationError> {
        if n > self.table.n() {
            return Err(GenerationError::TooLarge { n, table: self.table.n() });
        }
        Ok(())
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Sample, GenerationError> {
        self.check_size(n)?;
        let mut dag = LabeledDag::empty(n);
        if n == 0 {
            return Ok(Sample { dag, top: BTreeSet::new() });
        }
        let row = self.index.row(n);
        if row.prefixes().last().is_none_or(|p| p == &BigUint::ZERO) {
            return Err(GenerationError::EmptyRow(self.family(), n));
        }
        let k = row.sample(rng);
        let labels: Vec<usize> = (0..n).collect();
        let top = match self.family() {
            Family::Dag => self.dag_step(&labels, k, &mut dag, rng),
            Family::EssDag => self.essdag_step(&labels, k, &mut dag, rng)?,
            Family::ExtDag => self.extdag_step(&labels, k, &mut dag, rng)?,
        };
        Ok(Sample { dag, top })
    }

    /// Returns the `k` sources placed on `labels`.
    fn dag_step<R: Rng + ?Sized>(&self, labels: &[usize], k: usize, dag: &mut LabeledDag, rng: &mut R) -> BTreeSet<usize> {
        let i = labels.len();
        let sources = sample_k_subset(labels, k, rng);
        if k == i {
            return sources;
        }
        let rest = without(labels, &sources);
        let s = self.index.transition(i, k).sample(rng);
        let next = self.dag_step(&rest, s, dag, rng);
        let layer: Vec<usize> = sources.iter().copied().collect();
        for &v in &rest {
            let ins = if next.contains(&v) {
                sample_nonempty_subset(&layer, rng)
            } else {
                sample_any_subset(&layer, rng)
            };
            for u in ins {
                dag.add_arc(u, v);
            }
        }
        sources
    }

    /// Returns the `k` maximum-depth vertices placed on `labels`.
    fn essdag_step<R: Rng + ?Sized>(
        &self,
        labels: &[usize],
        k: usize,
        dag: &mut LabeledDag,
        rng: &mut R,
    ) -> Result<BTreeSet<usize>, GenerationError> {
        let i = labels.len();
        let top = sample_k_subset(labels, k, rng);
        if k == i {
            return Ok(top);
        }
        let rest = without(labels, &top);
        let s = self.index.transition(i, k).sample(rng);
        let deep_set = self.essdag_step(&rest, s, dag, rng)?;
        let deep: Vec<usize> = deep_set.iter().copied().collect();
        let others = without(&rest, &deep_set);
        let (one, many) = ess_branches(rest.len() as u64, s as u64);
        let total = &one + &many;
        for &v in &top {
            let ins = if rng.gen_biguint_below(&total) < one {
                let x = deep[rng.gen_range(0..deep.len())];
                let old = encode(&others, dag.in_neighbors(x));
                let mut w = sample_subset_excluding(&others, &[old], rng)?;
                w.insert(x);
                w
            } else {
                let mut w = sample_subset_of_at_least_two(&deep, rng)?;
                w.extend(sample_any_subset(&others, rng));
                w
            };
            for u in ins {
                dag.add_arc(u, v);
            }
        }
        Ok(top)
    }

    /// Returns the `k` sources placed on `labels`.
    fn extdag_step<R: Rng + ?Sized>(
        &self,
        labels: &[usize],
        k: usize,
        dag: &mut LabeledDag,
        rng: &mut R,
    ) -> Result<BTreeSet<usize>, GenerationError> {
        let i = labels.len();
        if i == 1 {
            return Ok(BTreeSet::from([labels[0]]));
        }
        let x = labels[rng.gen_range(0..i)];
        let rest = without(labels, &BTreeSet::from([x]));
        let branch = self.index.transition(i, k).sample(rng);
        let mut sources;
        let outs = if branch == 1 {
            sources = self.extdag_step(&rest, k - 1, dag, rng)?;
            let inner = without(&rest, &sources);
            let forbidden: Vec<BigUint> = out_sets(dag, &rest)
                .iter()
                .map(|out| encode(&inner, out))
                .collect();
            sample_subset_excluding(&inner, &forbidden, rng)?
        } else {
            let t = branch - 2;
            sources = self.extdag_step(&rest, k + t, dag, rng)?;
            let inner = without(&rest, &sources);
            let old: Vec<usize> = sources.iter().copied().collect();
            let hit = sample_k_subset(&old, t + 1, rng);
            sources.retain(|v| !hit.contains(v));
            let mut outs = sample_any_subset(&inner, rng);
            outs.extend(hit);
            outs
        };
        for v in outs {
            dag.add_arc(x, v);
        }
        sources.insert(x);
        Ok(sources)
    }

    /// The exact probability that [`sample`](Self::sample) returns `d`.
    pub fn probability(&self, d: &LabeledDag) -> Result<num_rational::BigRational, GenerationError> {
        probability::output_probability(self, d)
    }
}

/// Out-neighbourhoods of `vertices` within `vertices`.
fn out_sets(dag: &LabeledDag, vertices: &[usize]) -> Vec<BTreeSet<usize>> {
    let mut out = vec![BTreeSet::new(); vertices.len()];
    let pos = |v: usize| vertices.binary_search(&v).ok();
    for &v in vertices {
        for &u in dag.in_neighbors(v) {
            if let Some(j) = pos(u) {
                out[j].insert(v);
            }
        }
    }
    out
}

fn expect_family(table: &CountTable, family: Family) -> Result<(), GenerationError> {
    if table.family() != family {
        return Err(GenerationError::WrongFamily {
            expected: family,
            found: table.family(),
        });
    }
    Ok(())
}

pub fn generate_dag<R: Rng + ?Sized>(n: usize, table: &CountTable, rng: &mut R) -> Result<Sample, GenerationError> {
    expect_family(table, Family::Dag)?;
    Generator::new(table.clone()).sample(n, rng)
}

pub fn generate_essdag<R: Rng + ?Sized>(n: usize, table: &CountTable, rng: &mut R) -> Result<Sample, GenerationError> {
    expect_family(table, Family::EssDag)?;
    Generator::new(table.clone()).sample(n, rng)
}

pub fn generate_extdag<R: Rng + ?Sized>(n: usize, table: &CountTable, rng: &mut R) -> Result<Sample, GenerationError> {
    expect_family(table, Family::ExtDag)?;
    Generator::new(table.clone()).sample(n, rng)
}
