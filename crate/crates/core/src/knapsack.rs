//! Counting 0/1 knapsack solutions with bimonotonic capacity lists.
//!
//! `list(i)` holds pairs `(c, s̃(i, c))` strictly increasing in both
//! coordinates; `s̃(i, c)` for an arbitrary `c` is the count of the rightmost
//! pair with capacity `≤ c` (zero if there is none).

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use thiserror::Error;

use crate::float::{mantissa_length, ApproxFloat, Epsilon, FloatError, Problem};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum KnapsackError {
    #[error("an instance needs at least one item")]
    Empty,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KnapsackInstance {
    weights: Vec<BigUint>,
    capacity: BigUint,
}

impl KnapsackInstance {
    pub fn new(weights: Vec<BigUint>, capacity: BigUint) -> Result<Self, KnapsackError> {
        if weights.is_empty() {
            return Err(KnapsackError::Empty);
        }
        Ok(KnapsackInstance { weights, capacity })
    }

    pub fn from_u64(weights: &[u64], capacity: u64) -> Result<Self, KnapsackError> {
        Self::new(weights.iter().map(|&w| BigUint::from(w)).collect(), capacity.into())
    }

    /// Parses `n C` on the first line and the `n` weights on the second.
    pub fn parse(text: &str) -> Result<Self, KnapsackError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (hline, header) = lines.next().ok_or(KnapsackError::Parse {
            line: 1,
            message: "missing header `n C`".into(),
        })?;
        let head = parse_numbers(header, hline + 1)?;
        let [n, capacity] = <[BigUint; 2]>::try_from(head).map_err(|_| KnapsackError::Parse {
            line: hline + 1,
            message: "header must be `n C`".into(),
        })?;
        let n = usize::try_from(n).map_err(|_| KnapsackError::Parse {
            line: hline + 1,
            message: "item count too large".into(),
        })?;
        let (wline, weights) = match lines.next() {
            Some((i, l)) => (i + 1, parse_numbers(l, i + 1)?),
            None => (hline + 2, Vec::new()),
        };
        if weights.len() != n {
            return Err(KnapsackError::Parse {
                line: wline,
                message: format!("expected {n} weights, found {}", weights.len()),
            });
        }
        if let Some((i, _)) = lines.next() {
            return Err(KnapsackError::Parse {
                line: i + 1,
                message: "unexpected trailing content".into(),
            });
        }
        Self::new(weights, capacity)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[BigUint] {
        &self.weights
    }

    pub fn capacity(&self) -> &BigUint {
        &self.capacity
    }
}

fn parse_numbers(line: &str, number: usize) -> Result<Vec<BigUint>, KnapsackError> {
    line.split_whitespace()
        .map(|tok| {
            tok.parse::<BigUint>().map_err(|_| KnapsackError::Parse {
                line: number,
                message: format!("not a nonnegative integer: {tok:?}"),
            })
        })
        .collect()
}

pub type Pair = (BigUint, ApproxFloat);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CapacityList {
    index: usize,
    pairs: Vec<Pair>,
}

impl CapacityList {
    /// `list(0) = [(0, 1)]`.
    pub fn initial(precision: u32) -> Self {
        CapacityList {
            index: 0,
            pairs: vec![(BigUint::zero(), ApproxFloat::one(precision))],
        }
    }

    pub fn from_pairs(index: usize, pairs: Vec<Pair>) -> Self {
        CapacityList { index, pairs }
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn pairs(&self) -> &[Pair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// `s̃(i, c)`; zero when `c` is negative or below the first capacity.
    pub fn lookup(&self, c: &BigInt) -> Option<&ApproxFloat> {
        let c = c.to_biguint()?;
        self.lookup_unsigned(&c)
    }

    pub fn lookup_unsigned(&self, c: &BigUint) -> Option<&ApproxFloat> {
        let j = self.pairs.partition_point(|(cap, _)| cap <= c);
        j.checked_sub(1).map(|j| &self.pairs[j].1)
    }

    /// [`lookup`](Self::lookup) with the empty maximum rendered as a zero value.
    pub fn value_at(&self, c: &BigInt, precision: u32) -> ApproxFloat {
        self.lookup(c).cloned().unwrap_or_else(|| ApproxFloat::zero(precision))
    }

    /// Property (I₁): strictly increasing capacities and counts.
    pub fn is_bimonotonic(&self) -> bool {
        self.pairs.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 < w[1].1)
    }
}

/// The candidate stream for list `a` shifted by `wa` against list `b` shifted
/// by `wb`: for each `(c, x)` in `a`, the pair `[c + wa, x ⊕ s̃_b(c + wa − wb)]`.
fn candidates(a: &[Pair], wa: &BigUint, b: &[Pair], wb: &BigUint, precision: u32) -> Vec<Pair> {
    let mut j = 0;
    a.iter()
        .map(|(c, x)| {
            let at = c + wa;
            while j < b.len() && &b[j].0 + wb <= at {
                j += 1;
            }
            let y = match j {
                0 => ApproxFloat::zero(precision),
                _ => b[j - 1].1.clone(),
            };
            let sum = x.try_add(&y).expect("lists share one precision");
            (at, sum)
        })
        .collect()
}

/// Merges two capacity-sorted candidate streams, drops capacities above `cap`,
/// and keeps only the smallest capacity of each run of equal counts.
fn merge_and_prune(a: Vec<Pair>, b: Vec<Pair>, cap: &BigUint) -> Vec<Pair> {
    let mut out: Vec<Pair> = Vec::with_capacity(a.len() + b.len());
    let mut push = |p: Pair| {
        if &p.0 > cap {
            return;
        }
        match out.last() {
            Some(last) if last.1 >= p.1 => debug_assert!(last.1 == p.1, "counts decrease along capacities"),
            _ => out.push(p),
        }
    };
    let (mut a, mut b) = (a.into_iter().peekable(), b.into_iter().peekable());
    loop {
        let next = match (a.peek(), b.peek()) {
            (None, None) => break,
            (Some(_), None) => a.next(),
            (None, Some(_)) => b.next(),
            (Some(x), Some(y)) => match x.0.cmp(&y.0) {
                Ordering::Less => a.next(),
                Ordering::Greater => b.next(),
                Ordering::Equal => {
                    debug_assert!(x.1 == y.1, "equal capacities carry equal counts");
                    b.next();
                    a.next()
                }
            },
        };
        push(next.expect("peeked"));
    }
    out
}

/// The list for a vertex whose two incoming arcs come from lists `a` and `b`
/// with weights `wa` and `wb`: `s̃(c) = s̃_a(c − wa) ⊕ s̃_b(c − wb)`.
pub(crate) fn combine(a: &[Pair], wa: &BigUint, b: &[Pair], wb: &BigUint, cap: &BigUint, precision: u32) -> Vec<Pair> {
    let first = candidates(a, wa, b, wb, precision);
    let second = candidates(b, wb, a, wa, precision);
    merge_and_prune(first, second, cap)
}

/// `list(i)` from `list(i−1)`: the back stream `[c, s̃(c) ⊕ s̃(c − w)]` and the
/// forward stream `[c + w, s̃(c + w) ⊕ s̃(c)]`, merged, capped at `C`, pruned.
pub fn advance_list(prev: &CapacityList, weight: &BigUint, capacity: &BigUint, precision: u32) -> CapacityList {
    let zero = BigUint::zero();
    let pairs = combine(&prev.pairs, &zero, &prev.pairs, weight, capacity, precision);
    CapacityList {
        index: prev.index + 1,
        pairs,
    }
}

/// Every list `list(0..=n)` of one run at a fixed precision.
#[derive(Clone, Debug)]
pub struct KnapsackRun {
    precision: u32,
    capacity: BigUint,
    lists: Vec<CapacityList>,
}

impl KnapsackRun {
    pub fn new(inst: &KnapsackInstance, precision: u32) -> Self {
        let mut lists = vec![CapacityList::initial(precision)];
        for w in inst.weights() {
            let next = advance_list(lists.last().expect("list(0)"), w, inst.capacity(), precision);
            lists.push(next);
        }
        KnapsackRun {
            precision,
            capacity: inst.capacity().clone(),
            lists,
        }
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn lists(&self) -> &[CapacityList] {
        &self.lists
    }

    /// `s̃(n, C)`.
    pub fn value(&self) -> ApproxFloat {
        let last = self.lists.last().expect("list(0)");
        last.value_at(&BigInt::from(self.capacity.clone()), self.precision)
    }
}

/// `Z` with `(1 − ε)·s(n, C) ≤ Z ≤ s(n, C)`.
pub fn approx_count_knapsack(inst: &KnapsackInstance, eps: &Epsilon) -> Result<ApproxFloat, FloatError> {
    let t = mantissa_length(Problem::Knapsack, inst.len() as u64, eps)?;
    Ok(KnapsackRun::new(inst, t).value())
}
