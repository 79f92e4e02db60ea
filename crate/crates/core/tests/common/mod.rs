//! Independent oracles shared by the integration tests: dense linear
//! algebra, exhaustive path enumeration and a seeded G(n, p) generator.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use popcent::graph::Graph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// G(n, p): each pair `u < v`, in lexicographic order, is kept when a
/// uniform draw falls below `p`.
pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n as u32 {
        for v in u + 1..n as u32 {
            if rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges).0
}

pub fn dense_adjacency(g: &Graph) -> DMatrix<f64> {
    let n = g.node_count();
    let mut a = DMatrix::zeros(n, n);
    for (u, v) in g.edges() {
        a[(u, v)] = 1.0;
        a[(v, u)] = 1.0;
    }
    a
}

/// All eigenpairs of the adjacency matrix, eigenvalues descending.
pub fn dense_spectrum(g: &Graph) -> Vec<(f64, Vec<f64>)> {
    let eig = SymmetricEigen::new(dense_adjacency(g));
    let mut pairs: Vec<(f64, Vec<f64>)> = (0..g.node_count())
        .map(|i| (eig.eigenvalues[i], eig.eigenvectors.column(i).iter().copied().collect()))
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    pairs
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

/// All-pairs hop distances by Floyd–Warshall; `None` when unreachable.
pub fn floyd_warshall(g: &Graph) -> Vec<Vec<Option<u64>>> {
    let n = g.node_count();
    let mut d = vec![vec![None; n]; n];
    for i in 0..n {
        d[i][i] = Some(0);
    }
    for (u, v) in g.edges() {
        d[u][v] = Some(1);
        d[v][u] = Some(1);
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if let (Some(a), Some(b)) = (d[i][k], d[k][j]) {
                    if d[i][j].is_none_or(|c| a + b < c) {
                        d[i][j] = Some(a + b);
                    }
                }
            }
        }
    }
    d
}

/// `N / Σ_j d(i, j)` from Floyd–Warshall distances.
pub fn closeness_oracle(g: &Graph) -> Vec<f64> {
    let n = g.node_count();
    let d = floyd_warshall(g);
    (0..n)
        .map(|i| {
            let total: u64 = d[i].iter().map(|x| x.expect("connected")).sum();
            if total == 0 {
                0.0
            } else {
                n as f64 / total as f64
            }
        })
        .collect()
}

fn enumerate_paths(g: &Graph, target: usize, len: usize, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    let last = *path.last().unwrap();
    if path.len() - 1 == len {
        if last == target {
            out.push(path.clone());
        }
        return;
    }
    for &w in g.neighbors(last) {
        let w = w as usize;
        if !path.contains(&w) {
            path.push(w);
            enumerate_paths(g, target, len, path, out);
            path.pop();
        }
    }
}

/// Betweenness from an explicit list of every shortest path between every
/// unordered pair.
pub fn betweenness_oracle(g: &Graph) -> Vec<f64> {
    let n = g.node_count();
    let d = floyd_warshall(g);
    let mut score = vec![0.0; n];
    for a in 0..n {
        for b in a + 1..n {
            let Some(len) = d[a][b] else { continue };
            let mut paths = Vec::new();
            enumerate_paths(g, b, len as usize, &mut vec![a], &mut paths);
            let total = paths.len() as f64;
            for i in 0..n {
                if i == a || i == b {
                    continue;
                }
                let through = paths.iter().filter(|p| p.contains(&i)).count() as f64;
                score[i] += through / total;
            }
        }
    }
    score
}

/// PageRank as the solution of `(I - d·M) x = (1 - d)/N · 1 + dangling`
/// where `M` is column-stochastic; dangling columns spread uniformly.
pub fn pagerank_oracle(g: &Graph, damping: f64) -> Vec<f64> {
    let n = g.node_count();
    let mut m = DMatrix::zeros(n, n);
    for j in 0..n {
        let deg = g.degree(j);
        if deg == 0 {
            for i in 0..n {
                m[(i, j)] = 1.0 / n as f64;
            }
        } else {
            for &i in g.neighbors(j) {
                m[(i as usize, j)] = 1.0 / deg as f64;
            }
        }
    }
    let lhs = DMatrix::identity(n, n) - m * damping;
    let rhs = DVector::from_element(n, (1.0 - damping) / n as f64);
    let x = lhs.lu().solve(&rhs).expect("nonsingular");
    x.iter().copied().collect()
}

/// Connected graphs on `n` nodes from consecutive seeds of G(n, 0.5).
pub fn connected_samples(n: usize, seeds: std::ops::Range<u64>) -> Vec<(u64, Graph)> {
    seeds
        .map(|s| (s, erdos_renyi(n, 0.5, s)))
        .filter(|(_, g)| g.is_connected())
        .collect()
}
