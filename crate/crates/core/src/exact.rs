//! Exact ground truth: recurrence tables, brute-force enumeration, and sparse
//! capacity-keyed DPs for knapsack and weighted path counting.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::graph::LabeledDag;
use crate::knapsack::KnapsackInstance;
use crate::paths::{GraphError, WeightedMultiDag};
use crate::table::{CountTable, Family};

/// Largest `n` for which [`enumerate_dags`] will run (2^(n(n−1)) digraphs).
pub const MAX_ENUMERATION: usize = 5;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("enumeration supports 1 ≤ n ≤ {MAX_ENUMERATION}, got {0}")]
    TooLarge(usize),
}

pub fn exact_dag_table(n: usize) -> CountTable {
    CountTable::exact(Family::Dag, n.max(1)).expect("nonempty")
}

pub fn exact_essdag_table(n: usize) -> CountTable {
    CountTable::exact(Family::EssDag, n.max(1)).expect("nonempty")
}

pub fn exact_extdag_table(n: usize) -> CountTable {
    CountTable::exact(Family::ExtDag, n.max(1)).expect("nonempty")
}

pub fn belongs_to(g: &LabeledDag, family: Family) -> bool {
    g.is_acyclic()
        && match family {
            Family::Dag => true,
            Family::EssDag => g.is_essential(),
            Family::ExtDag => g.is_extensional(),
        }
}

/// Every labeled member of `family` on `n` vertices, by filtering all
/// `2^(n(n−1))` arc subsets.
pub fn enumerate_dags(n: usize, family: Family) -> Result<Vec<LabeledDag>, OracleError> {
    if n == 0 || n > MAX_ENUMERATION {
        return Err(OracleError::TooLarge(n));
    }
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (0..n).filter(move |&v| v != u).map(move |v| (u, v)))
        .collect();
    let mut found = Vec::new();
    for mask in 0u64..(1u64 << pairs.len()) {
        // in-neighbour bitmasks
        let mut ins = [0u32; MAX_ENUMERATION];
        for (bit, &(u, v)) in pairs.iter().enumerate() {
            if mask >> bit & 1 == 1 {
                ins[v] |= 1 << u;
            }
        }
        if !bitmask_acyclic(&ins[..n]) {
            continue;
        }
        let g = LabeledDag::from_arcs(
            n,
            pairs
                .iter()
                .enumerate()
                .filter(|(bit, _)| mask >> bit & 1 == 1)
                .map(|(_, &p)| p),
        );
        if belongs_to(&g, family) {
            found.push(g);
        }
    }
    Ok(found)
}

fn bitmask_acyclic(ins: &[u32]) -> bool {
    let all = (1u32 << ins.len()) - 1;
    let mut removed = 0u32;
    loop {
        let ready = (0..ins.len())
            .filter(|&v| removed >> v & 1 == 0 && ins[v] & !removed == 0)
            .fold(0u32, |acc, v| acc | 1 << v);
        if ready == 0 {
            return removed == all;
        }
        removed |= ready;
    }
}

/// Per-prefix subset-sum counts: `rows[i]` maps each achievable exact weight
/// `≤ C` of a subset of the first `i` items to the number of such subsets.
#[derive(Clone, Debug)]
pub struct SubsetSums {
    rows: Vec<BTreeMap<BigUint, BigUint>>,
}

impl SubsetSums {
    pub fn new(inst: &KnapsackInstance) -> Self {
        let cap = inst.capacity();
        let mut rows = Vec::with_capacity(inst.len() + 1);
        rows.push(BTreeMap::from([(BigUint::zero(), BigUint::one())]));
        for w in inst.weights() {
            let prev = rows.last().expect("row 0 exists");
            let mut next = prev.clone();
            for (sum, count) in prev {
                let with = sum + w;
                if &with <= cap {
                    *next.entry(with).or_insert_with(BigUint::zero) += count;
                }
            }
            rows.push(next);
        }
        SubsetSums { rows }
    }

    /// `s(i, c)`: subsets of the first `i` items with weight at most `c`.
    pub fn count_at_most(&self, i: usize, c: &BigUint) -> BigUint {
        self.rows[i].range(..=c.clone()).map(|(_, n)| n).sum()
    }

    /// Distinct achievable sums of row `i`.
    pub fn sums(&self, i: usize) -> impl Iterator<Item = &BigUint> {
        self.rows[i].keys()
    }
}

/// `s(n, C)`, the number of subsets of the items with total weight at most `C`.
pub fn exact_knapsack_count(inst: &KnapsackInstance) -> BigUint {
    SubsetSums::new(inst).count_at_most(inst.len(), inst.capacity())
}

/// Per-vertex path-weight counts: `vertex[v]` maps each exact weight `≤ C` of
/// an `s → v` path to the number of such paths.
#[derive(Clone, Debug)]
pub struct PathSums {
    vertex: Vec<BTreeMap<BigUint, BigUint>>,
}

impl PathSums {
    pub fn new(g: &WeightedMultiDag, capacity: &BigUint) -> Result<Self, GraphError> {
        let order = g.topological_order()?;
        let mut incoming: Vec<Vec<usize>> = vec![Vec::new(); g.n()];
        for (idx, arc) in g.arcs().iter().enumerate() {
            incoming[arc.to].push(idx);
        }
        let mut vertex = vec![BTreeMap::new(); g.n()];
        for v in order {
            let mut here: BTreeMap<BigUint, BigUint> = BTreeMap::new();
            if v == g.source() {
                here.insert(BigUint::zero(), BigUint::one());
            }
            for &idx in &incoming[v] {
                let arc = &g.arcs()[idx];
                for (weight, count) in &vertex[arc.from] {
                    let total = weight + &arc.weight;
                    if &total <= capacity {
                        *here.entry(total).or_insert_with(BigUint::zero) += count;
                    }
                }
            }
            vertex[v] = here;
        }
        Ok(PathSums { vertex })
    }

    /// Number of `s → v` paths of weight at most `c`.
    pub fn count_at_most(&self, v: usize, c: &BigUint) -> BigUint {
        self.vertex[v].range(..=c.clone()).map(|(_, n)| n).sum()
    }
}

/// Number of `s,t`-paths of total weight at most `capacity`.
pub fn exact_path_count(g: &WeightedMultiDag, capacity: &BigUint) -> Result<BigUint, GraphError> {
    Ok(PathSums::new(g, capacity)?.count_at_most(g.sink(), capacity))
}
