//! Undirected, unweighted graphs in compressed adjacency form.
//!
//! Node `i` owns the neighbor slice `targets[offsets[i]..offsets[i + 1]]`,
//! which is sorted ascending, free of duplicates, and never contains `i`.
//! Every undirected edge is stored once in each endpoint's slice.

mod io;
mod meta;
mod stats;

pub use io::{load_edge_list, parse_edge_list, write_edge_list, EdgeList};
pub use meta::{load_node_meta, parse_node_meta, write_node_meta, Dataset, MetaTable, NodeMeta, NodeTable};
pub use stats::{
    attribute_assortativity, degree_assortativity, degree_popularity_correlation, genre_edge_overlap,
    group_mean_degree, pearson, GenreOverlap,
};

use std::collections::VecDeque;

use crate::error::{Error, Result};

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<u32>,
}

/// Counts of input records discarded while building a [`Graph`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BuildSummary {
    pub self_loops: usize,
    pub duplicates: usize,
}

impl Graph {
    pub fn empty(node_count: usize) -> Self {
        Graph {
            offsets: vec![0; node_count + 1],
            targets: Vec::new(),
        }
    }

    /// Builds a simple graph from an arbitrary edge multiset. Self-loops and
    /// repeated edges (in either orientation) are dropped and counted.
    pub fn from_edges<I>(node_count: usize, edges: I) -> (Graph, BuildSummary)
    where
        I: IntoIterator<Item = (u32, u32)>,
    {
        assert!(node_count < NONE as usize, "node count exceeds u32 index space");
        let mut summary = BuildSummary::default();
        let mut pairs = Vec::new();
        for (u, v) in edges {
            assert!(
                (u as usize) < node_count && (v as usize) < node_count,
                "edge ({u}, {v}) out of range for {node_count} nodes"
            );
            if u == v {
                summary.self_loops += 1;
            } else {
                pairs.push((u, v));
            }
        }
        let input_edges = pairs.len();

        let mut counts = vec![0usize; node_count + 1];
        for &(u, v) in &pairs {
            counts[u as usize + 1] += 1;
            counts[v as usize + 1] += 1;
        }
        for i in 0..node_count {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut raw = vec![0u32; counts[node_count]];
        for (u, v) in pairs {
            raw[fill[u as usize]] = v;
            fill[u as usize] += 1;
            raw[fill[v as usize]] = u;
            fill[v as usize] += 1;
        }

        let mut offsets = Vec::with_capacity(node_count + 1);
        offsets.push(0);
        let mut targets = Vec::with_capacity(raw.len());
        for i in 0..node_count {
            let slice = &mut raw[counts[i]..counts[i + 1]];
            slice.sort_unstable();
            let mut last = NONE;
            for &t in slice.iter() {
                if t != last {
                    targets.push(t);
                    last = t;
                }
            }
            offsets.push(targets.len());
        }
        let graph = Graph { offsets, targets };
        summary.duplicates = input_edges - graph.edge_count();
        (graph, summary)
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Undirected edges, each counted once.
    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn is_empty(&self) -> bool {
        self.node_count() == 0
    }

    #[inline]
    pub fn neighbors(&self, node: usize) -> &[u32] {
        &self.targets[self.offsets[node]..self.offsets[node + 1]]
    }

    #[inline]
    pub fn degree(&self, node: usize) -> usize {
        self.offsets[node + 1] - self.offsets[node]
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.offsets.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn max_degree(&self) -> usize {
        self.offsets.windows(2).map(|w| w[1] - w[0]).max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&(v as u32)).is_ok()
    }

    /// Iterates undirected edges as `(u, v)` with `u < v`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.node_count()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .map(|&v| v as usize)
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    /// Scans the adjacency for symmetry, sortedness, self-loops and duplicates.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let n = self.node_count();
        for u in 0..n {
            let nbrs = self.neighbors(u);
            for w in nbrs.windows(2) {
                if w[0] >= w[1] {
                    return Err(format!("neighbors of {u} not strictly ascending"));
                }
            }
            for &v in nbrs {
                let v = v as usize;
                if v == u {
                    return Err(format!("self-loop at {u}"));
                }
                if v >= n || !self.has_edge(v, u) {
                    return Err(format!("edge {u}->{v} has no reverse"));
                }
            }
        }
        if self.targets.len() % 2 != 0 {
            return Err("odd neighbor-entry count".into());
        }
        Ok(())
    }

    /// Subgraph induced on nodes with `keep[i]`, relabelled densely in
    /// ascending original order.
    pub fn induce(&self, keep: &[bool]) -> (Graph, IndexMap) {
        assert_eq!(keep.len(), self.node_count());
        let map = IndexMap::from_mask(keep);
        let mut offsets = Vec::with_capacity(map.len() + 1);
        offsets.push(0);
        let mut targets = Vec::new();
        for &old in &map.new_to_old {
            for &v in self.neighbors(old as usize) {
                let new = map.old_to_new[v as usize];
                if new != NONE {
                    targets.push(new);
                }
            }
            offsets.push(targets.len());
        }
        (Graph { offsets, targets }, map)
    }

    /// Component label per node plus the number of components. Labels are
    /// assigned in order of each component's smallest node index.
    pub fn components(&self) -> (Vec<u32>, usize) {
        let n = self.node_count();
        let mut label = vec![NONE; n];
        let mut count = 0u32;
        let mut queue = VecDeque::new();
        for s in 0..n {
            if label[s] != NONE {
                continue;
            }
            label[s] = count;
            queue.push_back(s);
            while let Some(u) = queue.pop_front() {
                for &v in self.neighbors(u) {
                    if label[v as usize] == NONE {
                        label[v as usize] = count;
                        queue.push_back(v as usize);
                    }
                }
            }
            count += 1;
        }
        (label, count as usize)
    }

    pub fn is_connected(&self) -> bool {
        self.components().1 <= 1
    }
}

/// Correspondence between a parent graph's node indices and a subgraph's.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexMap {
    old_to_new: Vec<u32>,
    new_to_old: Vec<u32>,
}

impl IndexMap {
    pub fn identity(n: usize) -> Self {
        let ids: Vec<u32> = (0..n as u32).collect();
        IndexMap {
            old_to_new: ids.clone(),
            new_to_old: ids,
        }
    }

    pub fn from_mask(keep: &[bool]) -> Self {
        let mut old_to_new = vec![NONE; keep.len()];
        let mut new_to_old = Vec::new();
        for (old, &k) in keep.iter().enumerate() {
            if k {
                old_to_new[old] = new_to_old.len() as u32;
                new_to_old.push(old as u32);
            }
        }
        IndexMap { old_to_new, new_to_old }
    }

    /// Number of nodes in the subgraph.
    pub fn len(&self) -> usize {
        self.new_to_old.len()
    }

    pub fn is_empty(&self) -> bool {
        self.new_to_old.is_empty()
    }

    pub fn parent_len(&self) -> usize {
        self.old_to_new.len()
    }

    pub fn to_new(&self, old: usize) -> Option<usize> {
        match self.old_to_new.get(old) {
            Some(&n) if n != NONE => Some(n as usize),
            _ => None,
        }
    }

    pub fn to_old(&self, new: usize) -> usize {
        self.new_to_old[new] as usize
    }

    pub fn new_to_old(&self) -> impl Iterator<Item = usize> + '_ {
        self.new_to_old.iter().map(|&o| o as usize)
    }

    /// Maps parent → grandchild, where `next` was taken on this map's subgraph.
    pub fn compose(&self, next: &IndexMap) -> IndexMap {
        assert_eq!(next.parent_len(), self.len());
        let mut old_to_new = vec![NONE; self.parent_len()];
        let new_to_old: Vec<u32> = next.new_to_old.iter().map(|&mid| self.new_to_old[mid as usize]).collect();
        for (new, &old) in new_to_old.iter().enumerate() {
            old_to_new[old as usize] = new as u32;
        }
        IndexMap { old_to_new, new_to_old }
    }

    /// Pulls per-node values of the parent graph onto the subgraph.
    pub fn restrict<T: Clone>(&self, parent: &[T]) -> Vec<T> {
        self.new_to_old.iter().map(|&o| parent[o as usize].clone()).collect()
    }

    /// Pushes subgraph values back to the parent, filling absent nodes.
    pub fn extend<T: Clone>(&self, sub: &[T], fill: T) -> Vec<T> {
        let mut out = vec![fill; self.parent_len()];
        for (new, &old) in self.new_to_old.iter().enumerate() {
            out[old as usize] = sub[new].clone();
        }
        out
    }
}

/// Subgraph on nodes with popularity `>= threshold`.
pub fn induce_by_popularity(g: &Graph, meta: &NodeTable, threshold: f64) -> (Graph, IndexMap) {
    assert_eq!(meta.len(), g.node_count(), "metadata must cover every node");
    let keep: Vec<bool> = meta.iter().map(|m| m.popularity >= threshold).collect();
    g.induce(&keep)
}

/// Removes every node with popularity in the closed band `[lo, hi]`.
pub fn remove_popularity_band(g: &Graph, meta: &NodeTable, lo: f64, hi: f64) -> Result<(Graph, IndexMap)> {
    if lo.is_nan() || hi.is_nan() || lo > hi {
        return Err(Error::InvalidArgument(format!("band lower bound {lo} exceeds upper bound {hi}")));
    }
    assert_eq!(meta.len(), g.node_count(), "metadata must cover every node");
    let keep: Vec<bool> = meta.iter().map(|m| m.popularity < lo || m.popularity > hi).collect();
    Ok(g.induce(&keep))
}

/// Component with the most nodes; ties go to the component containing the
/// smallest original index.
pub fn largest_connected_component(g: &Graph) -> (Graph, IndexMap) {
    let (labels, count) = g.components();
    if count == 0 {
        return g.induce(&[]);
    }
    let mut sizes = vec![0usize; count];
    for &l in &labels {
        sizes[l as usize] += 1;
    }
    // labels follow smallest-member order, so the first maximum wins ties
    let mut best = 0;
    for (c, &s) in sizes.iter().enumerate() {
        if s > sizes[best] {
            best = c;
        }
    }
    let keep: Vec<bool> = labels.iter().map(|&l| l as usize == best).collect();
    g.induce(&keep)
}

/// Breadth-first sample from `seed`. `max_rounds = None` expands until the
/// frontier is exhausted.
pub fn snowball_sample(g: &Graph, seed: usize, max_rounds: Option<usize>) -> Result<(Graph, IndexMap)> {
    if seed >= g.node_count() {
        return Err(Error::InvalidArgument(format!(
            "seed node {seed} out of range for {} nodes",
            g.node_count()
        )));
    }
    let mut visited = vec![false; g.node_count()];
    visited[seed] = true;
    let mut frontier = vec![seed];
    let mut round = 0;
    while !frontier.is_empty() && max_rounds.is_none_or(|m| round < m) {
        let mut next = Vec::new();
        for &u in &frontier {
            for &v in g.neighbors(u) {
                if !visited[v as usize] {
                    visited[v as usize] = true;
                    next.push(v as usize);
                }
            }
        }
        frontier = next;
        round += 1;
    }
    Ok(g.induce(&visited))
}
