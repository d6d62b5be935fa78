//! Counting s,t-paths of bounded total weight in an arc-weighted DAG.
//!
//! The graph is pruned to the vertices on some s,t-path, every vertex of
//! in-degree above two is given a balanced binary in-tree with zero-weight
//! internal arcs, and capacity lists are then merged along a topological order.

use std::collections::{BTreeSet, VecDeque};

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use thiserror::Error;

use crate::float::{depth_budget_factor, mantissa_length, mantissa_length_for_depth, ApproxFloat, Epsilon, FloatError, Problem};
use crate::knapsack::{combine, CapacityList, KnapsackInstance, Pair};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("graph contains a directed cycle")]
    Cyclic,
    #[error("vertex {vertex} out of range for {n} vertices")]
    BadVertex { vertex: usize, n: usize },
    #[error("graph needs at least one vertex")]
    Empty,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedArc {
    pub from: usize,
    pub to: usize,
    pub weight: BigUint,
}

/// A multigraph on `0..n` with designated endpoints; parallel arcs are allowed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedMultiDag {
    n: usize,
    arcs: Vec<WeightedArc>,
    source: usize,
    sink: usize,
}

impl WeightedMultiDag {
    pub fn new(n: usize, arcs: Vec<WeightedArc>, source: usize, sink: usize) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let bad = [source, sink]
            .into_iter()
            .chain(arcs.iter().flat_map(|a| [a.from, a.to]))
            .find(|&v| v >= n);
        if let Some(vertex) = bad {
            return Err(GraphError::BadVertex { vertex, n });
        }
        Ok(WeightedMultiDag { n, arcs, source, sink })
    }

    pub fn from_u64(n: usize, arcs: &[(usize, usize, u64)], source: usize, sink: usize) -> Result<Self, GraphError> {
        let arcs = arcs
            .iter()
            .map(|&(from, to, w)| WeightedArc {
                from,
                to,
                weight: w.into(),
            })
            .collect();
        Self::new(n, arcs, source, sink)
    }

    /// Vertices `0..=n`, with a weight-0 arc and a weight-`w_i` arc from `i−1` to `i`.
    pub fn knapsack_chain(inst: &KnapsackInstance) -> Self {
        let arcs = inst
            .weights()
            .iter()
            .enumerate()
            .flat_map(|(i, w)| {
                [
                    WeightedArc {
                        from: i,
                        to: i + 1,
                        weight: BigUint::zero(),
                    },
                    WeightedArc {
                        from: i,
                        to: i + 1,
                        weight: w.clone(),
                    },
                ]
            })
            .collect();
        WeightedMultiDag {
            n: inst.len() + 1,
            arcs,
            source: 0,
            sink: inst.len(),
        }
    }

    /// Header `n m s t C`, then `m` lines `u v w`. Returns the graph and `C`.
    pub fn parse(text: &str) -> Result<(Self, BigUint), GraphError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (hline, header) = lines.next().ok_or(GraphError::Parse {
            line: 1,
            message: "missing header `n m s t C`".into(),
        })?;
        let head = numbers(header, hline + 1)?;
        let [n, m, s, t, cap] = <[BigUint; 5]>::try_from(head).map_err(|_| GraphError::Parse {
            line: hline + 1,
            message: "header must be `n m s t C`".into(),
        })?;
        let small = |x: BigUint| {
            usize::try_from(x).map_err(|_| GraphError::Parse {
                line: hline + 1,
                message: "value too large".into(),
            })
        };
        let (n, m, s, t) = (small(n)?, small(m)?, small(s)?, small(t)?);
        let mut arcs = Vec::with_capacity(m);
        let mut last_line = hline + 1;
        for (i, line) in lines {
            last_line = i + 1;
            if arcs.len() == m {
                return Err(GraphError::Parse {
                    line: i + 1,
                    message: format!("more than the declared {m} arcs"),
                });
            }
            let nums = numbers(line, i + 1)?;
            let [u, v, w] = <[BigUint; 3]>::try_from(nums).map_err(|_| GraphError::Parse {
                line: i + 1,
                message: "arc line must be `u v w`".into(),
            })?;
            let vertex = |x: BigUint| match usize::try_from(x) {
                Ok(x) if x < n => Ok(x),
                _ => Err(GraphError::Parse {
                    line: i + 1,
                    message: format!("vertex out of range for {n} vertices"),
                }),
            };
            arcs.push(WeightedArc {
                from: vertex(u)?,
                to: vertex(v)?,
                weight: w,
            });
        }
        if arcs.len() != m {
            return Err(GraphError::Parse {
                line: last_line,
                message: format!("expected {m} arcs, found {}", arcs.len()),
            });
        }
        let g = Self::new(n, arcs, s, t).map_err(|e| GraphError::Parse {
            line: hline + 1,
            message: e.to_string(),
        })?;
        Ok((g, cap))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn arcs(&self) -> &[WeightedArc] {
        &self.arcs
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn sink(&self) -> usize {
        self.sink
    }

    fn incoming(&self) -> Vec<Vec<usize>> {
        let mut incoming = vec![Vec::new(); self.n];
        for (idx, a) in self.arcs.iter().enumerate() {
            incoming[a.to].push(idx);
        }
        incoming
    }

    /// Kahn's algorithm, smallest label first.
    pub fn topological_order(&self) -> Result<Vec<usize>, GraphError> {
        let mut indeg = vec![0usize; self.n];
        let mut out = vec![Vec::new(); self.n];
        for a in &self.arcs {
            indeg[a.to] += 1;
            out[a.from].push(a.to);
        }
        let mut ready: BTreeSet<usize> = (0..self.n).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(self.n);
        while let Some(u) = ready.pop_first() {
            order.push(u);
            for &v in &out[u] {
                indeg[v] -= 1;
                if indeg[v] == 0 {
                    ready.insert(v);
                }
            }
        }
        if order.len() == self.n {
            Ok(order)
        } else {
            Err(GraphError::Cyclic)
        }
    }

    /// Longest path length (in arcs) from the source to each vertex, or `None` if unreachable.
    pub fn depths(&self) -> Result<Vec<Option<usize>>, GraphError> {
        let order = self.topological_order()?;
        let incoming = self.incoming();
        let mut depth = vec![None; self.n];
        for v in order {
            depth[v] = if v == self.source {
                Some(0)
            } else {
                incoming[v]
                    .iter()
                    .filter_map(|&idx| depth[self.arcs[idx].from].map(|d: usize| d + 1))
                    .max()
            };
        }
        Ok(depth)
    }
}

fn numbers(line: &str, number: usize) -> Result<Vec<BigUint>, GraphError> {
    line.split_whitespace()
        .map(|tok| {
            tok.parse::<BigUint>().map_err(|_| GraphError::Parse {
                line: number,
                message: format!("not a nonnegative integer: {tok:?}"),
            })
        })
        .collect()
}

fn reach(n: usize, start: usize, next: &[Vec<usize>]) -> Vec<bool> {
    let mut seen = vec![false; n];
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        for &v in &next[u] {
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    seen
}

/// Restricts `g` to the vertices on some s,t-path, relabeled in increasing
/// order; `None` when the sink is unreachable.
pub fn prune(g: &WeightedMultiDag) -> Result<Option<WeightedMultiDag>, GraphError> {
    g.topological_order()?;
    let mut fwd = vec![Vec::new(); g.n];
    let mut bwd = vec![Vec::new(); g.n];
    for a in &g.arcs {
        fwd[a.from].push(a.to);
        bwd[a.to].push(a.from);
    }
    let from_s = reach(g.n, g.source, &fwd);
    if !from_s[g.sink] {
        return Ok(None);
    }
    let to_t = reach(g.n, g.sink, &bwd);
    let mut label = vec![None; g.n];
    let mut next = 0;
    for v in 0..g.n {
        if from_s[v] && to_t[v] {
            label[v] = Some(next);
            next += 1;
        }
    }
    let arcs = g
        .arcs
        .iter()
        .filter_map(|a| {
            Some(WeightedArc {
                from: label[a.from]?,
                to: label[a.to]?,
                weight: a.weight.clone(),
            })
        })
        .collect();
    Ok(Some(WeightedMultiDag {
        n: next,
        arcs,
        source: label[g.source].expect("source kept"),
        sink: label[g.sink].expect("sink kept"),
    }))
}

/// A pruned graph with in-degree at most two, a topological order starting at
/// the source and ending at the sink, and longest-path depths `ℓ`.
#[derive(Clone, Debug)]
pub struct BinarizedDag {
    pub graph: WeightedMultiDag,
    pub order: Vec<usize>,
    pub depth: Vec<usize>,
}

impl BinarizedDag {
    pub fn auxiliary_count(&self, original: &WeightedMultiDag) -> usize {
        self.graph.n - original.n
    }

    /// `ℓ` of the sink.
    pub fn sink_depth(&self) -> usize {
        self.depth[self.graph.sink]
    }
}

fn attach(parent: usize, arcs: &[WeightedArc], n: &mut usize, out: &mut Vec<WeightedArc>) {
    if arcs.len() <= 2 {
        out.extend(arcs.iter().map(|a| WeightedArc { to: parent, ..a.clone() }));
        return;
    }
    let (left, right) = arcs.split_at(arcs.len().div_ceil(2));
    for half in [left, right] {
        if half.len() == 1 {
            out.push(WeightedArc {
                to: parent,
                ..half[0].clone()
            });
        } else {
            let aux = *n;
            *n += 1;
            out.push(WeightedArc {
                from: aux,
                to: parent,
                weight: BigUint::zero(),
            });
            attach(aux, half, n, out);
        }
    }
}

/// Replaces each in-star of size `d > 2` by a balanced binary tree of depth
/// `⌈log₂ d⌉` over the in-arcs in input order; new vertices get labels `n, n+1, …`.
pub fn binarize(g: &WeightedMultiDag) -> Result<BinarizedDag, GraphError> {
    let incoming = g.incoming();
    let mut n = g.n;
    let mut arcs = Vec::with_capacity(2 * g.arcs.len());
    for (v, ins) in incoming.iter().enumerate() {
        let star: Vec<WeightedArc> = ins.iter().map(|&idx| g.arcs[idx].clone()).collect();
        attach(v, &star, &mut n, &mut arcs);
    }
    let graph = WeightedMultiDag {
        n,
        arcs,
        source: g.source,
        sink: g.sink,
    };
    let order = graph.topological_order()?;
    let depth = graph
        .depths()?
        .into_iter()
        .map(|d| d.unwrap_or(0))
        .collect();
    Ok(BinarizedDag { graph, order, depth })
}

/// The list of a vertex from the lists of its one or two in-arcs.
///
/// With one in-arc every capacity is shifted by `w1`; with two,
/// `s̃(c) = s̃₁(c − w1) ⊕ s̃₂(c − w2)` over the candidate capacities of both
/// lists. Capacities above `cap` are dropped and equal counts keep the
/// smallest capacity.
pub fn merge_vertex_lists(
    index: usize,
    l1: &CapacityList,
    w1: &BigUint,
    second: Option<(&CapacityList, &BigUint)>,
    cap: &BigUint,
    precision: u32,
) -> CapacityList {
    let pairs: Vec<Pair> = match second {
        None => l1
            .pairs()
            .iter()
            .map(|(c, v)| (c + w1, v.clone()))
            .take_while(|(c, _)| c <= cap)
            .collect(),
        Some((l2, w2)) => combine(l1.pairs(), w1, l2.pairs(), w2, cap, precision),
    };
    CapacityList::from_pairs(index, pairs)
}

/// How the mantissa length is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum DepthBudget {
    /// From the longest path of the binarized graph.
    #[default]
    Actual,
    /// From `n·L` with `L = max(1, ⌈log₂(m/n)⌉ + 1)`, checked against the actual depth.
    Analytic,
}

#[derive(Debug, Error)]
pub enum PathError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Float(#[from] FloatError),
    #[error("longest path {depth} exceeds the analytic depth budget {budget}")]
    DepthBudgetExceeded { depth: usize, budget: u64 },
}

/// The lists of every vertex of a binarized graph at a fixed precision.
#[derive(Clone, Debug)]
pub struct PathRun {
    pub binarized: BinarizedDag,
    pub precision: u32,
    pub lists: Vec<CapacityList>,
}

impl PathRun {
    pub fn new(binarized: BinarizedDag, cap: &BigUint, precision: u32) -> Self {
        let g = &binarized.graph;
        let incoming = g.incoming();
        let mut lists: Vec<Option<CapacityList>> = vec![None; g.n];
        for &v in &binarized.order {
            let list = if v == g.source {
                CapacityList::from_pairs(v, CapacityList::initial(precision).pairs().to_vec())
            } else {
                let arc = |j: usize| &g.arcs[incoming[v][j]];
                let list_of = |a: &WeightedArc| lists[a.from].as_ref().expect("predecessor processed");
                let a1 = arc(0);
                let second = (incoming[v].len() == 2).then(|| (list_of(arc(1)), &arc(1).weight));
                merge_vertex_lists(v, list_of(a1), &a1.weight, second, cap, precision)
            };
            lists[v] = Some(list);
        }
        PathRun {
            binarized,
            precision,
            lists: lists.into_iter().map(|l| l.expect("every vertex processed")).collect(),
        }
    }

    pub fn value_at(&self, v: usize, c: &BigUint) -> ApproxFloat {
        self.lists[v].value_at(&BigInt::from(c.clone()), self.precision)
    }
}

/// Result of [`approx_count_paths`].
#[derive(Clone, Debug)]
pub struct PathCount {
    pub value: ApproxFloat,
    /// `None` when the sink is unreachable from the source.
    pub run: Option<PathRun>,
}

/// `Z` with `(1 − ε)·P ≤ Z ≤ P`, where `P` counts s,t-paths of weight at most `cap`.
pub fn approx_count_paths(
    g: &WeightedMultiDag,
    cap: &BigUint,
    eps: &Epsilon,
    budget: DepthBudget,
) -> Result<PathCount, PathError> {
    let Some(pruned) = prune(g)? else {
        let t = mantissa_length(Problem::DagKnapsack { arcs: g.arcs.len() as u64 }, g.n as u64, eps)?;
        return Ok(PathCount {
            value: ApproxFloat::zero(t),
            run: None,
        });
    };
    let (n, m) = (pruned.n as u64, pruned.arcs.len() as u64);
    let binarized = binarize(&pruned)?;
    let depth = binarized.sink_depth();
    let t = match budget {
        DepthBudget::Actual => mantissa_length_for_depth(depth as u64, m.max(1), eps),
        DepthBudget::Analytic => {
            let limit = n * depth_budget_factor(n, m);
            if depth as u64 > limit {
                return Err(PathError::DepthBudgetExceeded { depth, budget: limit });
            }
            mantissa_length(Problem::DagKnapsack { arcs: m }, n, eps)?
        }
    };
    let sink = binarized.graph.sink;
    let run = PathRun::new(binarized, cap, t);
    Ok(PathCount {
        value: run.value_at(sink, cap),
        run: Some(run),
    })
}
