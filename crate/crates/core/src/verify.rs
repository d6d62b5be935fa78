//! Oracle-backed property suites, sized by a work budget.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, RandBigInt};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::counting::{approx_count, approx_table};
use crate::exact::{enumerate_dags, exact_knapsack_count, exact_path_count, PathSums, SubsetSums};
use crate::float::{mantissa_length, truncation_factor, ApproxFloat, Epsilon, Problem};
use crate::generation::Generator;
use crate::graph::LabeledDag;
use crate::knapsack::{KnapsackInstance, KnapsackRun};
use crate::paths::{approx_count_paths, binarize, prune, DepthBudget, PathRun, WeightedMultiDag};
use crate::rng::seeded;
use crate::table::{CountTable, Family};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Float,
    Tables,
    Knapsack,
    Paths,
    Sampling,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Float, Suite::Tables, Suite::Knapsack, Suite::Paths, Suite::Sampling];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Float => "float",
            Suite::Tables => "tables",
            Suite::Knapsack => "knapsack",
            Suite::Paths => "paths",
            Suite::Sampling => "sampling",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown suite {s:?}"))
    }
}

#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct Report {
    pub suite: Suite,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// One `PASS|FAIL suite/name detail` line per check.
    pub fn lines(&self) -> Vec<String> {
        self.checks
            .iter()
            .map(|c| {
                let status = if c.passed { "PASS" } else { "FAIL" };
                format!("{status} {}/{} {}", self.suite, c.name, c.detail)
            })
            .collect()
    }
}

pub const DEFAULT_BUDGET: u64 = 10_000;

pub fn run_suite(suite: Suite, budget: u64, seed: u64) -> Report {
    let checks = match suite {
        Suite::Float => float_suite(budget, seed),
        Suite::Tables => table_suite(budget),
        Suite::Knapsack => knapsack_suite(budget, seed),
        Suite::Paths => path_suite(budget, seed),
        Suite::Sampling => sampling_suite(budget, seed),
    };
    Report { suite, checks }
}

/// Tracks violations and the smallest observed ratio `approx / exact`.
struct Tally {
    checked: u64,
    violations: u64,
    worst: Option<BigRational>,
}

impl Tally {
    fn new() -> Self {
        Tally {
            checked: 0,
            violations: 0,
            worst: None,
        }
    }

    /// Records `lower·exact ≤ approx ≤ exact`.
    fn bound(&mut self, approx: &BigRational, exact: &BigRational, lower: &BigRational) {
        self.checked += 1;
        if approx > exact || approx < &(lower * exact) {
            self.violations += 1;
        }
        if !exact.is_zero() {
            let r = approx / exact;
            if self.worst.as_ref().is_none_or(|w| &r < w) {
                self.worst = Some(r);
            }
        }
    }

    fn flag(&mut self, ok: bool) {
        self.checked += 1;
        if !ok {
            self.violations += 1;
        }
    }

    fn into_check(self, name: &str, extra: &str) -> Check {
        let worst = self
            .worst
            .map(|w| format!(" min_ratio={:.12}", w.to_f64().unwrap_or(f64::NAN)))
            .unwrap_or_default();
        Check {
            name: name.to_string(),
            passed: self.violations == 0,
            detail: format!("checked={} violations={}{worst}{extra}", self.checked, self.violations),
        }
    }
}

fn int(x: &BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(x.clone()))
}

fn float_suite(budget: u64, seed: u64) -> Vec<Check> {
    let mut rng = seeded(seed);
    let (mut eq1, mut add, mut mul, mut cmp) = (Tally::new(), Tally::new(), Tally::new(), Tally::new());
    for _ in 0..budget {
        let t: u32 = rng.gen_range(2..=64);
        let lower = truncation_factor(t, 1);
        let bits = rng.gen_range(1..=400);
        let x = rng.gen_biguint(bits);
        eq1.bound(&ApproxFloat::truncate(&x, t).to_ratio(), &int(&x), &lower);
        let (abits, bbits) = (rng.gen_range(1..=200), rng.gen_range(1..=200));
        let a = ApproxFloat::truncate(&rng.gen_biguint(abits), t);
        let b = ApproxFloat::truncate(&rng.gen_biguint(bbits), t);
        let (ra, rb) = (a.to_ratio(), b.to_ratio());
        add.bound(&(&a + &b).to_ratio(), &(&ra + &rb), &lower);
        mul.bound(&(&a * &b).to_ratio(), &(&ra * &rb), &lower);
        cmp.flag(a.cmp(&b) == ra.cmp(&rb));
    }
    vec![
        eq1.into_check("truncate", ""),
        add.into_check("add", ""),
        mul.into_check("mul", ""),
        cmp.into_check("compare", ""),
    ]
}

fn table_suite(budget: u64) -> Vec<Check> {
    let max_enum = if budget >= DEFAULT_BUDGET { 5 } else { 4 };
    let mut enumeration = Tally::new();
    for family in Family::ALL {
        let table = CountTable::exact(family, max_enum).expect("nonempty");
        for n in 1..=max_enum {
            let count = enumerate_dags(n, family).expect("small n").len();
            enumeration.flag(table.exact_total(n) == Some(BigUint::from(count)));
        }
    }
    let max_n = (budget / 500).clamp(4, 20) as usize;
    let exact = CountTable::exact(Family::Dag, max_n).expect("nonempty");
    let mut lemma = Tally::new();
    for t in [8u32, 12, 16] {
        let approx = approx_table(Family::Dag, max_n, t).expect("nonempty");
        for n in 1..=max_n {
            let lower = truncation_factor(t, 3 * (n * n) as u64);
            for k in 1..=n {
                lemma.bound(&approx.entry_ratio(n, k), &exact.entry_ratio(n, k), &lower);
            }
        }
    }
    let mut count = Tally::new();
    let max_count = max_n.min(15);
    for family in Family::ALL {
        let exact = CountTable::exact(family, max_count).expect("nonempty");
        for eps in ["1", "0.5", "0.1", "0.01"] {
            let eps: Epsilon = eps.parse().expect("literal");
            for n in 1..=max_count {
                let z = approx_count(family, n, &eps).expect("valid input").value.to_ratio();
                let f = int(&exact.exact_total(n).expect("exact"));
                count.bound(&z, &f, &eps.complement());
            }
        }
    }
    vec![
        enumeration.into_check("rows-match-enumeration", &format!(" n<={max_enum}")),
        lemma.into_check("entrywise-bound", &format!(" n<={max_n} t=8,12,16")),
        count.into_check("count-bound", &format!(" n<={max_count}")),
    ]
}

/// Weights in `0..=max_w`, `1 ≤ n ≤ max_n`, capacity uniform in `[0, Σw]`.
pub fn random_knapsack<R: Rng + ?Sized>(rng: &mut R, max_n: usize, max_w: u64) -> KnapsackInstance {
    let n = rng.gen_range(1..=max_n);
    let weights: Vec<u64> = (0..n).map(|_| rng.gen_range(0..=max_w)).collect();
    let cap = rng.gen_range(0..=weights.iter().sum::<u64>());
    KnapsackInstance::from_u64(&weights, cap).expect("n ≥ 1")
}

/// A random pruned multigraph with `2..=max_n` vertices, at most `max_arcs` arcs
/// (parallel arcs allowed) and weights in `0..=max_w`, source 0 and sink `n−1`.
pub fn random_weighted_dag<R: Rng + ?Sized>(rng: &mut R, max_n: usize, max_arcs: usize, max_w: u64) -> WeightedMultiDag {
    loop {
        let n = rng.gen_range(2..=max_n);
        let m = rng.gen_range(1..=max_arcs);
        let arcs: Vec<(usize, usize, u64)> = (0..m)
            .map(|_| {
                let u = rng.gen_range(0..n - 1);
                let v = rng.gen_range(u + 1..n);
                (u, v, rng.gen_range(0..=max_w))
            })
            .collect();
        let g = WeightedMultiDag::from_u64(n, &arcs, 0, n - 1).expect("valid labels");
        if let Some(p) = prune(&g).expect("acyclic by construction") {
            return p;
        }
    }
}

/// Checks `(1 − 2^(1−t))^i · s(i, c) ≤ s̃(i, c) ≤ s(i, c)` for every listed pair
/// and strict bimonotonicity of every list.
pub fn knapsack_invariants(inst: &KnapsackInstance, run: &KnapsackRun) -> (bool, bool) {
    let sums = SubsetSums::new(inst);
    let mut bimonotone = true;
    let mut bounded = true;
    for (i, list) in run.lists().iter().enumerate() {
        bimonotone &= list.is_bimonotonic();
        let lower = truncation_factor(run.precision(), i as u64);
        for (c, v) in list.pairs() {
            let exact = int(&sums.count_at_most(i, c));
            let approx = v.to_ratio();
            bounded &= approx <= exact && approx >= &lower * &exact;
        }
    }
    (bimonotone, bounded)
}

/// The same per-vertex check on a binarized graph, with exponent `ℓ(v)`.
pub fn path_invariants(run: &PathRun, cap: &BigUint) -> (bool, bool) {
    let sums = PathSums::new(&run.binarized.graph, cap).expect("acyclic");
    let mut bimonotone = true;
    let mut bounded = true;
    for (v, list) in run.lists.iter().enumerate() {
        bimonotone &= list.is_bimonotonic();
        let lower = truncation_factor(run.precision, run.binarized.depth[v] as u64);
        for (c, x) in list.pairs() {
            let exact = int(&sums.count_at_most(v, c));
            let approx = x.to_ratio();
            bounded &= approx <= exact && approx >= &lower * &exact;
        }
    }
    (bimonotone, bounded)
}

fn knapsack_suite(budget: u64, seed: u64) -> Vec<Check> {
    let mut rng = seeded(seed);
    let (mut bound, mut i1, mut i2) = (Tally::new(), Tally::new(), Tally::new());
    for _ in 0..(budget / 50).max(10) {
        let inst = random_knapsack(&mut rng, 12, 100);
        let exact = int(&exact_knapsack_count(&inst));
        for eps in ["1", "0.1", "0.01"] {
            let eps: Epsilon = eps.parse().expect("literal");
            let t = mantissa_length(Problem::Knapsack, inst.len() as u64, &eps).expect("valid");
            let run = KnapsackRun::new(&inst, t);
            bound.bound(&run.value().to_ratio(), &exact, &eps.complement());
            let (mono, within) = knapsack_invariants(&inst, &run);
            i1.flag(mono);
            i2.flag(within);
        }
    }
    vec![
        bound.into_check("count-bound", ""),
        i1.into_check("lists-bimonotonic", ""),
        i2.into_check("per-step-bound", ""),
    ]
}

fn path_suite(budget: u64, seed: u64) -> Vec<Check> {
    let mut rng = seeded(seed);
    let (mut bound, mut binar, mut i1, mut i2) = (Tally::new(), Tally::new(), Tally::new(), Tally::new());
    for _ in 0..(budget / 100).max(10) {
        let g = random_weighted_dag(&mut rng, 10, 30, 50);
        let total: u64 = g.arcs().iter().map(|a| u64::try_from(&a.weight).expect("small")).sum();
        let cap = BigUint::from(rng.gen_range(0..=total));
        let b = binarize(&g).expect("acyclic");
        for c in [BigUint::zero(), cap.clone(), BigUint::from(total)] {
            binar.flag(exact_path_count(&g, &c) == exact_path_count(&b.graph, &c));
        }
        let exact = int(&exact_path_count(&g, &cap).expect("acyclic"));
        for eps in ["1", "0.1"] {
            let eps: Epsilon = eps.parse().expect("literal");
            let z = approx_count_paths(&g, &cap, &eps, DepthBudget::Actual).expect("valid");
            bound.bound(&z.value.to_ratio(), &exact, &eps.complement());
            let run = z.run.expect("connected");
            let (mono, within) = path_invariants(&run, &cap);
            i1.flag(mono);
            i2.flag(within);
        }
    }
    vec![
        bound.into_check("count-bound", ""),
        binar.into_check("binarization-preserves-counts", ""),
        i1.into_check("lists-bimonotonic", ""),
        i2.into_check("per-vertex-bound", ""),
    ]
}

/// Pearson statistic and upper-tail p-value for counts against expected probabilities.
pub fn chi_square(counts: &[u64], probabilities: &[f64]) -> (f64, f64) {
    let total: u64 = counts.iter().sum();
    let stat: f64 = counts
        .iter()
        .zip(probabilities)
        .map(|(&c, &p)| {
            let e = total as f64 * p;
            (c as f64 - e).powi(2) / e
        })
        .sum();
    let df = (counts.len() - 1).max(1) as f64;
    let p = ChiSquared::new(df).expect("positive degrees of freedom").sf(stat);
    (stat, p)
}

/// Draws `draws` graphs on `n` vertices from an exact table and tests
/// uniformity over the enumerated family.
pub fn uniformity_test(family: Family, n: usize, draws: u64, seed: u64) -> (f64, f64, usize) {
    let members = enumerate_dags(n, family).expect("small n");
    let g = Generator::new(CountTable::exact(family, n).expect("nonempty"));
    let mut rng = seeded(seed);
    let mut counts: BTreeMap<LabeledDag, u64> = members.iter().map(|d| (d.clone(), 0)).collect();
    for _ in 0..draws {
        let s = g.sample(n, &mut rng).expect("table covers n");
        *counts.get_mut(&s.dag).expect("sample is a family member") += 1;
    }
    let observed: Vec<u64> = counts.into_values().collect();
    let probs = vec![1.0 / members.len() as f64; members.len()];
    let (stat, p) = chi_square(&observed, &probs);
    (stat, p, members.len())
}

fn sampling_suite(budget: u64, seed: u64) -> Vec<Check> {
    let draws = budget * 25;
    let mut checks: Vec<Check> = Family::ALL
        .into_iter()
        .map(|family| {
            let (stat, p, outcomes) = uniformity_test(family, 3, draws, seed);
            Check {
                name: format!("uniform-{family}-n3"),
                passed: p > 0.001,
                detail: format!("draws={draws} outcomes={outcomes} chi2={stat:.3} p={p:.4}"),
            }
        })
        .collect();
    let mut exactness = Tally::new();
    for family in Family::ALL {
        let g = Generator::new(CountTable::approx(family, 4, 4).expect("nonempty"));
        let sum: BigRational = enumerate_dags(4, family)
            .expect("small n")
            .iter()
            .map(|d| g.probability(d).expect("member"))
            .sum();
        exactness.flag(sum == BigRational::one());
    }
    checks.push(exactness.into_check("probabilities-sum-to-one", " n=4 t=4"));
    checks
}
