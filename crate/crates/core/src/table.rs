//! Triangular count tables `T(i, k)` for the three DAG families.
//!
//! * `dag`: `a(i,k)`, DAGs on `i` labeled vertices with exactly `k` sources.
//! * `essdag`: `d(i,k)`, essential DAGs with exactly `k` vertices of maximum depth.
//! * `extdag`: `e(i,k)`, extensional DAGs with exactly `k` sources.
//!
//! The recurrences are written once against [`CountArith`] and evaluated
//! either exactly or with truncating floats.

use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::arith::{CountArith, Exact, Truncated};
use crate::float::ApproxFloat;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    Dag,
    EssDag,
    ExtDag,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Dag, Family::EssDag, Family::ExtDag];

    pub fn name(self) -> &'static str {
        match self {
            Family::Dag => "dag",
            Family::EssDag => "essdag",
            Family::ExtDag => "extdag",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = TableError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dag" => Ok(Family::Dag),
            "essdag" => Ok(Family::EssDag),
            "extdag" => Ok(Family::ExtDag),
            other => Err(TableError::UnknownFamily(other.to_string())),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TableError {
    #[error("unknown family {0:?} (expected dag, essdag or extdag)")]
    UnknownFamily(String),
    #[error("table needs at least one vertex")]
    Empty,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableMode {
    Exact,
    Approx { precision: u32 },
}

#[derive(Clone, Debug)]
enum Entries {
    Exact(Vec<Vec<BigUint>>),
    Approx {
        precision: u32,
        rows: Vec<Vec<ApproxFloat>>,
    },
}

/// `T(i, k)` for `1 ≤ k ≤ i ≤ n`.
#[derive(Clone, Debug)]
pub struct CountTable {
    family: Family,
    entries: Entries,
}

/// Memoized exact scalars shared by one table build.
#[derive(Default)]
pub(crate) struct Scalars {
    binomials: Vec<Vec<BigUint>>,
    powers: HashMap<(u64, u64), BigUint>,
    ess_powers: HashMap<(u64, u64, u64), BigUint>,
}

impl Scalars {
    pub(crate) fn binomial(&mut self, n: usize, k: usize) -> BigUint {
        if k > n {
            return BigUint::zero();
        }
        while self.binomials.len() <= n {
            let m = self.binomials.len();
            let row = (0..=m)
                .map(|j| {
                    if j == 0 || j == m {
                        BigUint::one()
                    } else {
                        &self.binomials[m - 1][j - 1] + &self.binomials[m - 1][j]
                    }
                })
                .collect();
            self.binomials.push(row);
        }
        self.binomials[n][k].clone()
    }

    /// `(2^k − 1)^s`.
    fn mersenne_power(&mut self, k: u64, s: u64) -> BigUint {
        self.powers
            .entry((k, s))
            .or_insert_with(|| num_traits::pow((BigUint::one() << k) - 1u32, s as usize))
            .clone()
    }

    /// `(s(2^(r−s) − 1) + (2^s − s − 1)·2^(r−s))^k`: in-neighbourhood choices of
    /// one new maximum-depth vertex, raised to the number of such vertices.
    fn ess_power(&mut self, r: u64, s: u64, k: u64) -> BigUint {
        self.ess_powers
            .entry((r, s, k))
            .or_insert_with(|| num_traits::pow(ess_choices(r, s), k as usize))
            .clone()
    }
}

/// The two branch counts for a new maximum-depth vertex, given `r` remaining
/// vertices of which `s` are at maximum depth: exactly one deep in-neighbour,
/// or at least two.
pub(crate) fn ess_branches(r: u64, s: u64) -> (BigUint, BigUint) {
    let rest = r - s;
    let one_deep = BigUint::from(s) * ((BigUint::one() << rest) - 1u32);
    let many_deep = ((BigUint::one() << s) - s - 1u32) << rest;
    (one_deep, many_deep)
}

fn ess_choices(r: u64, s: u64) -> BigUint {
    let (a, b) = ess_branches(r, s);
    a + b
}

/// `2^(i−k) − (i−1)` clamped at zero; where it would be negative the
/// matching `e(i−1, k−1)` is zero anyway.
fn ext_fresh_choices(i: u64, k: u64) -> BigUint {
    let total = BigUint::one() << (i - k);
    let taken = BigUint::from(i - 1);
    if total > taken {
        total - taken
    } else {
        BigUint::zero()
    }
}

fn at<V: Clone>(rows: &[Vec<V>], i: usize, k: usize) -> &V {
    &rows[i - 1][k - 1]
}

/// The summands of the recurrence for `T(i, k)`, in evaluation order.
///
/// * `dag`: index `s−1` holds `(2^k−1)^s · 2^(k(i−k−s)) · a(i−k, s)`.
/// * `essdag`: index `s−1` holds `d(i−k, s) · g(i−k, s)^k`.
/// * `extdag` (`i ≥ 2`): index 0 holds `(2^(i−k) − (i−1)) · e(i−1, k−1)`,
///   index `t+1` holds `C(k+t, t+1) · 2^(i−1−k−t) · e(i−1, k+t)`.
pub(crate) fn summands<A: CountArith>(
    family: Family,
    arith: &A,
    rows: &[Vec<A::Value>],
    scalars: &mut Scalars,
    i: usize,
    k: usize,
) -> Vec<A::Value> {
    let (iu, ku) = (i as u64, k as u64);
    match family {
        Family::Dag => (1..=i - k)
            .map(|s| {
                let coeff = arith.lift(&scalars.mersenne_power(ku, s as u64));
                let shift = arith.pow2(ku * (iu - ku - s as u64));
                arith.mul(&arith.mul(&coeff, &shift), at(rows, i - k, s))
            })
            .collect(),
        Family::EssDag => {
            let r = i - k;
            (1..=r)
                .map(|s| {
                    let coeff = arith.lift(&scalars.ess_power(r as u64, s as u64, ku));
                    arith.mul(at(rows, r, s), &coeff)
                })
                .collect()
        }
        Family::ExtDag => {
            assert!(i >= 2, "extdag summands start at two vertices");
            let mut out = Vec::with_capacity(i - k + 1);
            out.push(if k >= 2 {
                arith.mul(&arith.lift(&ext_fresh_choices(iu, ku)), at(rows, i - 1, k - 1))
            } else {
                arith.zero()
            });
            for t in 0..i - k {
                let coeff = arith.lift(&scalars.binomial(k + t, t + 1));
                let shift = arith.pow2(iu - 1 - ku - t as u64);
                out.push(arith.mul(&arith.mul(&coeff, &shift), at(rows, i - 1, k + t)));
            }
            out
        }
    }
}

fn build_rows<A: CountArith>(family: Family, n: usize, arith: &A) -> Vec<Vec<A::Value>> {
    let mut scalars = Scalars::default();
    let mut rows: Vec<Vec<A::Value>> = Vec::with_capacity(n);
    for i in 1..=n {
        let mut row = Vec::with_capacity(i);
        for k in 1..=i {
            let value = match family {
                Family::Dag | Family::EssDag if k == i => arith.one(),
                Family::Dag | Family::EssDag => {
                    let terms = summands(family, arith, &rows, &mut scalars, i, k);
                    let binom = arith.lift(&scalars.binomial(i, k));
                    arith.mul(&binom, &arith.sum(&terms))
                }
                Family::ExtDag if i == 1 => arith.one(),
                Family::ExtDag => {
                    let terms = summands(family, arith, &rows, &mut scalars, i, k);
                    let scaled = arith.mul(&arith.lift(&BigUint::from(i)), &arith.sum(&terms));
                    arith.div_small(&scaled, k as u64)
                }
            };
            row.push(value);
        }
        rows.push(row);
    }
    rows
}

impl CountTable {
    /// Exact table by the family's recurrence.
    pub fn exact(family: Family, n: usize) -> Result<Self, TableError> {
        if n == 0 {
            return Err(TableError::Empty);
        }
        Ok(CountTable {
            family,
            entries: Entries::Exact(build_rows(family, n, &Exact)),
        })
    }

    /// The same recurrence evaluated with `precision`-bit truncating floats.
    pub fn approx(family: Family, n: usize, precision: u32) -> Result<Self, TableError> {
        if n == 0 {
            return Err(TableError::Empty);
        }
        assert!(precision >= 1, "precision must be at least one bit");
        let arith = Truncated { precision };
        Ok(CountTable {
            family,
            entries: Entries::Approx {
                precision,
                rows: build_rows(family, n, &arith),
            },
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn n(&self) -> usize {
        match &self.entries {
            Entries::Exact(rows) => rows.len(),
            Entries::Approx { rows, .. } => rows.len(),
        }
    }

    pub fn mode(&self) -> TableMode {
        match &self.entries {
            Entries::Exact(_) => TableMode::Exact,
            Entries::Approx { precision, .. } => TableMode::Approx {
                precision: *precision,
            },
        }
    }

    pub fn exact_entry(&self, i: usize, k: usize) -> Option<&BigUint> {
        match &self.entries {
            Entries::Exact(rows) => Some(at(rows, i, k)),
            Entries::Approx { .. } => None,
        }
    }

    pub fn approx_entry(&self, i: usize, k: usize) -> Option<&ApproxFloat> {
        match &self.entries {
            Entries::Approx { rows, .. } => Some(at(rows, i, k)),
            Entries::Exact(_) => None,
        }
    }

    /// `T(i, k)` as an exact rational, whatever the mode.
    pub fn entry_ratio(&self, i: usize, k: usize) -> BigRational {
        match &self.entries {
            Entries::Exact(rows) => BigRational::from_integer(at(rows, i, k).clone().into()),
            Entries::Approx { rows, .. } => at(rows, i, k).to_ratio(),
        }
    }

    /// Exact row sum `Σ_k T(i, k)`; only for exact tables.
    pub fn exact_total(&self, i: usize) -> Option<BigUint> {
        match &self.entries {
            Entries::Exact(rows) => Some(rows[i - 1].iter().sum()),
            Entries::Approx { .. } => None,
        }
    }

    /// `⊕`-fold of row `i` over `k = 1..i`; only for approximate tables.
    pub fn approx_total(&self, i: usize) -> Option<ApproxFloat> {
        match &self.entries {
            Entries::Approx { precision, rows } => Some(
                Truncated {
                    precision: *precision,
                }
                .sum(&rows[i - 1]),
            ),
            Entries::Exact(_) => None,
        }
    }

    /// Integer weights proportional to row `i`.
    pub fn row_weights(&self, i: usize) -> Vec<BigUint> {
        match &self.entries {
            Entries::Exact(rows) => Exact.weights(&rows[i - 1]),
            Entries::Approx { precision, rows } => Truncated {
                precision: *precision,
            }
            .weights(&rows[i - 1]),
        }
    }

    /// Integer weights proportional to the recurrence summands of `T(i, k)`.
    pub fn summand_weights(&self, i: usize, k: usize) -> Vec<BigUint> {
        self.summand_weights_cached(&mut Scalars::default(), i, k)
    }

    pub(crate) fn summand_weights_cached(&self, scalars: &mut Scalars, i: usize, k: usize) -> Vec<BigUint> {
        if self.family == Family::ExtDag && i == 1 {
            return Vec::new();
        }
        match &self.entries {
            Entries::Exact(rows) => {
                let terms = summands(self.family, &Exact, rows, scalars, i, k);
                Exact.weights(&terms)
            }
            Entries::Approx { precision, rows } => {
                let arith = Truncated {
                    precision: *precision,
                };
                let terms = summands(self.family, &arith, rows, scalars, i, k);
                arith.weights(&terms)
            }
        }
    }

    /// Header `family n mode` (mode `exact` or `approx:t`), then `i k value` per entry.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mode = match self.mode() {
            TableMode::Exact => "exact".to_string(),
            TableMode::Approx { precision } => format!("approx:{precision}"),
        };
        let _ = writeln!(out, "{} {} {}", self.family, self.n(), mode);
        for i in 1..=self.n() {
            for k in 1..=i {
                let value = match &self.entries {
                    Entries::Exact(rows) => at(rows, i, k).to_string(),
                    Entries::Approx { rows, .. } => at(rows, i, k).to_hex_string(),
                };
                let _ = writeln!(out, "{i} {k} {value}");
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, TableError> {
        let err = |line: usize, message: &str| TableError::Parse {
            line,
            message: message.to_string(),
        };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (hl, header) = lines.next().ok_or_else(|| err(1, "missing header"))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let [family, n, mode] = fields[..] else {
            return Err(err(hl + 1, "header must be `family n mode`"));
        };
        let family: Family = family.parse().map_err(|e: TableError| err(hl + 1, &e.to_string()))?;
        let n: usize = n.parse().map_err(|_| err(hl + 1, "bad vertex count"))?;
        if n == 0 {
            return Err(err(hl + 1, "table needs at least one vertex"));
        }
        let precision = match mode {
            "exact" => None,
            m => Some(
                m.strip_prefix("approx:")
                    .and_then(|t| t.parse::<u32>().ok())
                    .filter(|&t| t >= 1)
                    .ok_or_else(|| err(hl + 1, "mode must be `exact` or `approx:t`"))?,
            ),
        };
        let mut exact: Vec<Vec<Option<BigUint>>> = (1..=n).map(|i| vec![None; i]).collect();
        let mut approx: Vec<Vec<Option<ApproxFloat>>> = (1..=n).map(|i| vec![None; i]).collect();
        for (ln, line) in lines {
            let f: Vec<&str> = line.split_whitespace().collect();
            let [i, k, v] = f[..] else {
                return Err(err(ln + 1, "entry must be `i k value`"));
            };
            let i: usize = i.parse().map_err(|_| err(ln + 1, "bad row index"))?;
            let k: usize = k.parse().map_err(|_| err(ln + 1, "bad column index"))?;
            if !(1..=n).contains(&i) || !(1..=i).contains(&k) {
                return Err(err(ln + 1, "index out of range"));
            }
            match precision {
                None => {
                    exact[i - 1][k - 1] =
                        Some(v.parse().map_err(|_| err(ln + 1, "bad integer value"))?)
                }
                Some(t) => {
                    approx[i - 1][k - 1] = Some(
                        ApproxFloat::from_hex_string(v, t)
                            .ok_or_else(|| err(ln + 1, "bad p:mantissa value"))?,
                    )
                }
            }
        }
        let missing = || err(0, "table is incomplete");
        let entries = match precision {
            None => Entries::Exact(
                exact
                    .into_iter()
                    .map(|row| row.into_iter().collect::<Option<Vec<_>>>())
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(missing)?,
            ),
            Some(precision) => Entries::Approx {
                precision,
                rows: approx
                    .into_iter()
                    .map(|row| row.into_iter().collect::<Option<Vec<_>>>())
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(missing)?,
            },
        };
        Ok(CountTable { family, entries })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(t: &CountTable, i: usize) -> Vec<u64> {
        (1..=i)
            .map(|k| u64::try_from(t.exact_entry(i, k).unwrap()).unwrap())
            .collect()
    }

    #[test]
    fn dag_rows() {
        let t = CountTable::exact(Family::Dag, 4).unwrap();
        assert_eq!(row(&t, 1), vec![1]);
        assert_eq!(row(&t, 2), vec![2, 1]);
        assert_eq!(row(&t, 3), vec![15, 9, 1]);
        assert_eq!(row(&t, 4), vec![316, 198, 28, 1]);
    }

    #[test]
    fn essdag_and_extdag_rows() {
        let d = CountTable::exact(Family::EssDag, 4).unwrap();
        assert_eq!(row(&d, 2), vec![0, 1]);
        assert_eq!(row(&d, 4), vec![52, 6, 0, 1]);
        let e = CountTable::exact(Family::ExtDag, 5).unwrap();
        assert_eq!(row(&e, 1), vec![1]);
        assert_eq!(row(&e, 2), vec![2, 0]);
        assert_eq!(row(&e, 4), vec![192, 24, 0, 0]);
        assert_eq!(row(&e, 5), vec![8160, 2400, 0, 0, 0]);
    }

    #[test]
    fn full_precision_matches_exact() {
        for family in Family::ALL {
            let n = 7;
            let exact = CountTable::exact(family, n).unwrap();
            let approx = CountTable::approx(family, n, (n * n) as u32).unwrap();
            for i in 1..=n {
                for k in 1..=i {
                    assert_eq!(exact.entry_ratio(i, k), approx.entry_ratio(i, k), "{family} {i} {k}");
                }
            }
        }
    }

    #[test]
    fn text_round_trip() {
        for table in [
            CountTable::exact(Family::EssDag, 5).unwrap(),
            CountTable::approx(Family::Dag, 6, 9).unwrap(),
        ] {
            let text = table.to_text();
            let back = CountTable::from_text(&text).unwrap();
            assert_eq!(back.to_text(), text);
            assert_eq!(back.mode(), table.mode());
        }
        assert!(text_err("dag 2 exact\n1 1 1\n2 1 2\n").contains("incomplete"));
        assert!(text_err("dag 2 exact\n1 1 x\n").contains("line 2"));
        assert!(text_err("tree 2 exact\n").contains("unknown family"));
    }

    fn text_err(s: &str) -> String {
        CountTable::from_text(s).unwrap_err().to_string()
    }

    #[test]
    fn header_format() {
        let t = CountTable::exact(Family::Dag, 2).unwrap();
        assert_eq!(t.to_text(), "dag 2 exact\n1 1 1\n2 1 2\n2 2 1\n");
        let a = CountTable::approx(Family::Dag, 2, 4).unwrap();
        assert_eq!(a.to_text(), "dag 2 approx:4\n1 1 1:8\n2 1 2:8\n2 2 1:8\n");
    }
}
