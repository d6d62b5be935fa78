//! Labeled digraphs on `{0, …, n−1}` and the family predicates.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::Serialize;

/// A digraph stored as in-neighbourhood sets; generators only produce acyclic ones.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LabeledDag {
    in_neighbors: Vec<BTreeSet<usize>>,
}

impl LabeledDag {
    pub fn empty(n: usize) -> Self {
        LabeledDag {
            in_neighbors: vec![BTreeSet::new(); n],
        }
    }

    pub fn from_arcs(n: usize, arcs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut g = Self::empty(n);
        for (u, v) in arcs {
            g.add_arc(u, v);
        }
        g
    }

    pub fn n(&self) -> usize {
        self.in_neighbors.len()
    }

    pub fn add_arc(&mut self, u: usize, v: usize) {
        assert!(u < self.n() && v < self.n(), "arc ({u}, {v}) out of range");
        assert_ne!(u, v, "self-loop at {u}");
        self.in_neighbors[v].insert(u);
    }

    pub fn arc_count(&self) -> usize {
        self.in_neighbors.iter().map(BTreeSet::len).sum()
    }

    /// Arcs `(u, v)` ordered by tail, then head.
    pub fn arcs(&self) -> Vec<(usize, usize)> {
        let mut arcs: Vec<_> = self
            .in_neighbors
            .iter()
            .enumerate()
            .flat_map(|(v, ins)| ins.iter().map(move |&u| (u, v)))
            .collect();
        arcs.sort_unstable();
        arcs
    }

    pub fn in_neighbors(&self, v: usize) -> &BTreeSet<usize> {
        &self.in_neighbors[v]
    }

    pub fn out_neighborhoods(&self) -> Vec<BTreeSet<usize>> {
        let mut out = vec![BTreeSet::new(); self.n()];
        for (v, ins) in self.in_neighbors.iter().enumerate() {
            for &u in ins {
                out[u].insert(v);
            }
        }
        out
    }

    pub fn is_acyclic(&self) -> bool {
        self.topological_order().is_some()
    }

    /// Kahn's algorithm, smallest label first.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let out = self.out_neighborhoods();
        let mut indeg: Vec<usize> = self.in_neighbors.iter().map(BTreeSet::len).collect();
        let mut ready: BTreeSet<usize> = (0..self.n()).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(self.n());
        while let Some(u) = ready.pop_first() {
            order.push(u);
            for &v in &out[u] {
                indeg[v] -= 1;
                if indeg[v] == 0 {
                    ready.insert(v);
                }
            }
        }
        (order.len() == self.n()).then_some(order)
    }

    pub fn sources(&self) -> BTreeSet<usize> {
        (0..self.n()).filter(|&v| self.in_neighbors[v].is_empty()).collect()
    }

    /// Longest path length from a source to each vertex; `None` if cyclic.
    pub fn depths(&self) -> Option<Vec<usize>> {
        let order = self.topological_order()?;
        let mut depth = vec![0usize; self.n()];
        for v in order {
            depth[v] = self.in_neighbors[v]
                .iter()
                .map(|&u| depth[u] + 1)
                .max()
                .unwrap_or(0);
        }
        Some(depth)
    }

    pub fn max_depth_vertices(&self) -> Option<BTreeSet<usize>> {
        let depth = self.depths()?;
        let max = depth.iter().copied().max().unwrap_or(0);
        Some((0..self.n()).filter(|&v| depth[v] == max).collect())
    }

    /// Every arc `(u, v)` has `N⁻(u) ≠ N⁻(v) \ {u}`.
    pub fn is_essential(&self) -> bool {
        self.in_neighbors.iter().enumerate().all(|(_, ins)| {
            ins.iter().all(|&u| {
                let mut rest = ins.clone();
                rest.remove(&u);
                self.in_neighbors[u] != rest
            })
        })
    }

    /// All out-neighbourhoods are pairwise distinct.
    pub fn is_extensional(&self) -> bool {
        let out = self.out_neighborhoods();
        let distinct: BTreeSet<_> = out.iter().collect();
        distinct.len() == out.len()
    }

    /// The subgraph induced by `keep`, relabeled to `0..keep.len()` in increasing order.
    pub fn induced(&self, keep: &BTreeSet<usize>) -> LabeledDag {
        let index: Vec<Option<usize>> = {
            let mut idx = vec![None; self.n()];
            for (i, &v) in keep.iter().enumerate() {
                idx[v] = Some(i);
            }
            idx
        };
        let mut g = LabeledDag::empty(keep.len());
        for &v in keep {
            for &u in &self.in_neighbors[v] {
                if let (Some(a), Some(b)) = (index[u], index[v]) {
                    g.add_arc(a, b);
                }
            }
        }
        g
    }

    /// Header `n m` followed by one `u v` line per arc.
    pub fn to_edge_list(&self) -> String {
        let arcs = self.arcs();
        let mut s = format!("{} {}\n", self.n(), arcs.len());
        for (u, v) in arcs {
            let _ = writeln!(s, "{u} {v}");
        }
        s
    }

    /// One-line JSON object with `nodes`, `arcs` and `sources`.
    pub fn to_json_line(&self, sources: &BTreeSet<usize>) -> String {
        #[derive(Serialize)]
        struct Record<'a> {
            nodes: Vec<usize>,
            arcs: Vec<(usize, usize)>,
            sources: &'a BTreeSet<usize>,
        }
        serde_json::to_string(&Record {
            nodes: (0..self.n()).collect(),
            arcs: self.arcs(),
            sources,
        })
        .expect("graph serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn predicates_on_small_graphs() {
        let single = LabeledDag::from_arcs(2, [(0, 1)]);
        assert!(single.is_acyclic());
        assert!(!single.is_essential());
        assert!(single.is_extensional());
        let empty = LabeledDag::empty(2);
        assert!(empty.is_essential());
        assert!(!empty.is_extensional());
        let cycle = LabeledDag::from_arcs(3, [(0, 1), (1, 2), (2, 0)]);
        assert!(!cycle.is_acyclic());
        assert_eq!(cycle.depths(), None);
    }

    #[test]
    fn depth_and_sources() {
        let g = LabeledDag::from_arcs(4, [(0, 1), (1, 2), (0, 3)]);
        assert_eq!(g.sources(), BTreeSet::from([0]));
        assert_eq!(g.depths().unwrap(), vec![0, 1, 2, 1]);
        assert_eq!(g.max_depth_vertices().unwrap(), BTreeSet::from([2]));
    }

    #[test]
    fn edge_list_and_json() {
        let g = LabeledDag::from_arcs(3, [(1, 2), (0, 2)]);
        assert_eq!(g.to_edge_list(), "3 2\n0 2\n1 2\n");
        assert_eq!(
            g.to_json_line(&g.sources()),
            r#"{"nodes":[0,1,2],"arcs":[[0,2],[1,2]],"sources":[0,1]}"#
        );
    }

    #[test]
    fn induced_relabels() {
        let g = LabeledDag::from_arcs(4, [(0, 3), (1, 3), (0, 1)]);
        let h = g.induced(&BTreeSet::from([1, 3]));
        assert_eq!(h.arcs(), vec![(0, 1)]);
    }
}
