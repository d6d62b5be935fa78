use std::collections::{BTreeSet, HashMap};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{GenerationError, Generator, WeightRow};
use crate::exact::belongs_to;
use crate::graph::LabeledDag;
use crate::table::{ess_branches, CountTable, Family};

fn ratio(num: BigUint, den: BigUint) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn weight(row: &WeightRow, pos: usize) -> BigRational {
    ratio(row.weights()[pos - 1].clone(), row.total())
}

fn binomial(n: usize, k: usize) -> BigUint {
    num_integer::binomial(BigUint::from(n), BigUint::from(k))
}

fn pow2(e: usize) -> BigUint {
    BigUint::one() << e
}

/// The exact probability that sampling from `table` returns `d`.
pub fn dag_probability(d: &LabeledDag, table: &CountTable) -> Result<BigRational, GenerationError> {
    Generator::new(table.clone()).probability(d)
}

pub(super) fn output_probability(g: &Generator, d: &LabeledDag) -> Result<BigRational, GenerationError> {
    let family = g.family();
    if !belongs_to(d, family) {
        return Err(GenerationError::NotInFamily(family));
    }
    g.check_size(d.n())?;
    if d.n() == 0 {
        return Ok(BigRational::one());
    }
    Ok(match family {
        Family::Dag => dag_layers(g, d),
        Family::EssDag => essdag_layers(g, d),
        Family::ExtDag => extdag_removals(g, d),
    })
}

/// Vertices grouped by depth, shallowest first.
fn layers(d: &LabeledDag) -> Vec<BTreeSet<usize>> {
    let depth = d.depths().expect("acyclic");
    let max = depth.iter().copied().max().unwrap_or(0);
    let mut out = vec![BTreeSet::new(); max + 1];
    for (v, &k) in depth.iter().enumerate() {
        out[k].insert(v);
    }
    out
}

fn dag_layers(g: &Generator, d: &LabeledDag) -> BigRational {
    let layers = layers(d);
    let depth = d.depths().expect("acyclic");
    let mut remaining = d.n();
    let mut p = weight(g.index.row(remaining), layers[0].len());
    for (j, layer) in layers.iter().enumerate() {
        let f = layer.len();
        p /= ratio(binomial(remaining, f), BigUint::one());
        let Some(next) = layers.get(j + 1) else { break };
        p *= weight(g.index.transition(remaining, f), next.len());
        let full = pow2(f);
        for &dv in &depth {
            if dv == j + 1 {
                p /= ratio(&full - 1u32, BigUint::one());
            } else if dv > j + 1 {
                p /= ratio(full.clone(), BigUint::one());
            }
        }
        remaining -= f;
    }
    p
}

fn essdag_layers(g: &Generator, d: &LabeledDag) -> BigRational {
    let mut layers = layers(d);
    layers.reverse();
    let mut remaining = d.n();
    let mut p = weight(g.index.row(remaining), layers[0].len());
    for (j, top) in layers.iter().enumerate() {
        let k = top.len();
        p /= ratio(binomial(remaining, k), BigUint::one());
        let Some(deep) = layers.get(j + 1) else { break };
        let s = deep.len();
        let r = remaining - k;
        let others = r - s;
        p *= weight(g.index.transition(remaining, k), s);
        let (one, many) = ess_branches(r as u64, s as u64);
        let total = &one + &many;
        for &v in top {
            let ins = d.in_neighbors(v);
            let hits: Vec<usize> = ins.intersection(deep).copied().collect();
            match hits.as_slice() {
                [] => return BigRational::zero(),
                [x] => {
                    let rest: BTreeSet<usize> = ins.difference(deep).copied().collect();
                    if &rest == d.in_neighbors(*x) {
                        return BigRational::zero();
                    }
                    p *= ratio(one.clone(), total.clone());
                    p /= ratio(BigUint::from(s) * (pow2(others) - 1u32), BigUint::one());
                }
                _ => {
                    p *= ratio(many.clone(), total.clone());
                    p /= ratio((pow2(s) - s - 1u32) << others, BigUint::one());
                }
            }
        }
        remaining = r;
    }
    p
}

/// Sums over the source removed last, memoized by the remaining vertex set.
/// The number of distinct sets can grow exponentially; intended for small graphs.
fn extdag_removals(g: &Generator, d: &LabeledDag) -> BigRational {
    let out = d.out_neighborhoods();
    let all: BTreeSet<usize> = (0..d.n()).collect();
    let sources_in = |set: &BTreeSet<usize>| -> BTreeSet<usize> {
        set.iter()
            .copied()
            .filter(|&v| d.in_neighbors(v).is_disjoint(set))
            .collect()
    };
    let mut memo: HashMap<BTreeSet<usize>, BigRational> = HashMap::new();

    fn conditional(
        g: &Generator,
        set: BTreeSet<usize>,
        out: &[BTreeSet<usize>],
        sources_in: &dyn Fn(&BTreeSet<usize>) -> BTreeSet<usize>,
        memo: &mut HashMap<BTreeSet<usize>, BigRational>,
    ) -> BigRational {
        let i = set.len();
        if i == 1 {
            return BigRational::one();
        }
        if let Some(p) = memo.get(&set) {
            return p.clone();
        }
        let srcs = sources_in(&set);
        let tr = g.index.transition(i, srcs.len());
        let mut total = BigRational::zero();
        for &x in &srcs {
            let mut rest = set.clone();
            rest.remove(&x);
            let sub_sources = sources_in(&rest);
            let inner = rest.len() - sub_sources.len();
            let hit = out[x].intersection(&sub_sources).count();
            let (pos, choices) = if hit == 0 {
                (1, pow2(inner) - (i - 1))
            } else {
                (hit + 1, binomial(sub_sources.len(), hit) << inner)
            };
            let branch = weight(tr, pos);
            if branch.is_zero() {
                continue;
            }
            let sub = conditional(g, rest, out, sources_in, memo);
            total += branch * sub / ratio(choices * i, BigUint::one());
        }
        memo.insert(set, total.clone());
        total
    }

    let k = sources_in(&all).len();
    weight(g.index.row(d.n()), k) * conditional(g, all, &out, &sources_in, &mut memo)
}
