//! Node centrality measures with a common score container.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg;
use crate::spectral;

/// Node-count ceiling for closeness and betweenness.
pub const DEFAULT_PATH_LIMIT: usize = 10_000;
pub const DEFAULT_DAMPING: f64 = 0.85;
pub const DEFAULT_PAGERANK_TOL: f64 = 1e-12;
pub const DEFAULT_PAGERANK_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    Degree,
    Closeness,
    Betweenness,
    Eigenvector,
    Pagerank,
}

impl Measure {
    pub const ALL: [Measure; 5] = [
        Measure::Degree,
        Measure::Closeness,
        Measure::Betweenness,
        Measure::Eigenvector,
        Measure::Pagerank,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Measure::Degree => "degree",
            Measure::Closeness => "closeness",
            Measure::Betweenness => "betweenness",
            Measure::Eigenvector => "eigenvector",
            Measure::Pagerank => "pagerank",
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Measure::ALL
            .into_iter()
            .find(|m| m.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| Error::InvalidArgument(format!("unknown measure {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    Raw,
    L2,
    Max1,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralityScores {
    pub measure: Measure,
    pub scores: Vec<f64>,
    pub normalization: Normalization,
    pub converged: bool,
    pub iterations: usize,
    pub diagnostic: Option<String>,
}

impl CentralityScores {
    fn exact(measure: Measure, scores: Vec<f64>) -> Self {
        CentralityScores {
            measure,
            scores,
            normalization: Normalization::Raw,
            converged: true,
            iterations: 0,
            diagnostic: None,
        }
    }

    /// Rescales to the requested normalization. All-zero vectors stay zero.
    pub fn normalized(mut self, to: Normalization) -> Self {
        let factor = match to {
            Normalization::Raw => 1.0,
            Normalization::L2 => linalg::norm(&self.scores),
            Normalization::Max1 => self.scores.iter().fold(0.0f64, |m, &s| m.max(s.abs())),
        };
        if factor > 0.0 && to != Normalization::Raw {
            self.scores.iter_mut().for_each(|s| *s /= factor);
        }
        self.normalization = to;
        self
    }
}

pub fn degree_centrality(g: &Graph) -> CentralityScores {
    CentralityScores::exact(Measure::Degree, g.degrees().into_iter().map(|d| d as f64).collect())
}

fn guard_size(g: &Graph, limit: usize) -> Result<()> {
    if g.node_count() > limit {
        return Err(Error::TooLarge {
            nodes: g.node_count(),
            limit,
        });
    }
    Ok(())
}

fn bfs_distances(g: &Graph, source: usize, dist: &mut [u32], queue: &mut VecDeque<usize>) {
    dist.iter_mut().for_each(|d| *d = u32::MAX);
    dist[source] = 0;
    queue.clear();
    queue.push_back(source);
    while let Some(u) = queue.pop_front() {
        for &v in g.neighbors(u) {
            let v = v as usize;
            if dist[v] == u32::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
}

/// `N / Σ_{j≠i} d(i, j)` from breadth-first distances. Requires a connected
/// graph; a single node scores 0.
pub fn closeness_centrality(g: &Graph, limit: usize) -> Result<CentralityScores> {
    guard_size(g, limit)?;
    let (_, components) = g.components();
    if components > 1 {
        return Err(Error::Disconnected { components });
    }
    let n = g.node_count();
    let scores: Vec<f64> = (0..n)
        .into_par_iter()
        .map_init(
            || (vec![0u32; n], VecDeque::new()),
            |(dist, queue), s| {
                bfs_distances(g, s, dist, queue);
                let total: u64 = dist.iter().map(|&d| d as u64).sum();
                if total == 0 {
                    0.0
                } else {
                    n as f64 / total as f64
                }
            },
        )
        .collect();
    Ok(CentralityScores::exact(Measure::Closeness, scores))
}

/// Brandes accumulation over every source; each unordered pair `{a, b}`
/// contributes `σ_ab(i)/σ_ab` to every interior node `i`.
pub fn betweenness_centrality(g: &Graph, limit: usize) -> Result<CentralityScores> {
    guard_size(g, limit)?;
    let n = g.node_count();
    let chunk = 64;
    let sources: Vec<usize> = (0..n).collect();
    // per-chunk partials are summed in chunk order for schedule-independent rounding
    let partials: Vec<Vec<f64>> = sources
        .par_chunks(chunk)
        .map(|srcs| {
            let mut acc = vec![0.0; n];
            let mut sigma = vec![0.0f64; n];
            let mut dist = vec![u32::MAX; n];
            let mut delta = vec![0.0f64; n];
            let mut order = Vec::with_capacity(n);
            let mut queue = VecDeque::new();
            for &s in srcs {
                sigma.iter_mut().for_each(|x| *x = 0.0);
                dist.iter_mut().for_each(|x| *x = u32::MAX);
                delta.iter_mut().for_each(|x| *x = 0.0);
                order.clear();
                sigma[s] = 1.0;
                dist[s] = 0;
                queue.push_back(s);
                while let Some(u) = queue.pop_front() {
                    order.push(u);
                    for &v in g.neighbors(u) {
                        let v = v as usize;
                        if dist[v] == u32::MAX {
                            dist[v] = dist[u] + 1;
                            queue.push_back(v);
                        }
                        if dist[v] == dist[u] + 1 {
                            sigma[v] += sigma[u];
                        }
                    }
                }
                for &w in order.iter().rev() {
                    for &v in g.neighbors(w) {
                        let v = v as usize;
                        if dist[v] != u32::MAX && dist[v] + 1 == dist[w] {
                            delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
                        }
                    }
                    if w != s {
                        acc[w] += delta[w];
                    }
                }
            }
            acc
        })
        .collect();
    let mut scores = vec![0.0; n];
    for part in partials {
        for (s, p) in scores.iter_mut().zip(part) {
            *s += p;
        }
    }
    // every unordered pair was visited from both ends
    scores.iter_mut().for_each(|s| *s *= 0.5);
    Ok(CentralityScores::exact(Measure::Betweenness, scores))
}

/// Dominant adjacency eigenvector, L2-normalized with nonnegative sign.
pub fn eigenvector_centrality(g: &Graph, tol: f64, max_iter: usize) -> Result<CentralityScores> {
    let pair = spectral::power_iteration(g, tol, max_iter)?;
    Ok(CentralityScores {
        measure: Measure::Eigenvector,
        // power iteration from a positive start on a nonnegative operator
        // stays nonnegative; clamp rounding noise
        scores: pair.vector.into_iter().map(|x| x.max(0.0)).collect(),
        normalization: Normalization::L2,
        converged: pair.converged,
        iterations: pair.iterations,
        diagnostic: pair.diagnostic,
    })
}

/// PageRank with every undirected edge acting as two directed links.
/// Mass held by isolated nodes is spread uniformly. Stops when the L1
/// change drops below `tol`.
pub fn pagerank(g: &Graph, damping: f64, tol: f64, max_iter: usize) -> Result<CentralityScores> {
    if !(damping > 0.0 && damping < 1.0) {
        return Err(Error::InvalidArgument(format!("damping {damping} outside (0, 1)")));
    }
    let n = g.node_count();
    if n == 0 {
        return Ok(CentralityScores::exact(Measure::Pagerank, Vec::new()));
    }
    let inv_deg: Vec<f64> = g
        .degrees()
        .into_iter()
        .map(|d| if d == 0 { 0.0 } else { 1.0 / d as f64 })
        .collect();
    let dangling: Vec<usize> = (0..n).filter(|&i| g.degree(i) == 0).collect();
    let mut rank = vec![1.0 / n as f64; n];
    let mut flow = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iter {
        for i in 0..n {
            flow[i] = rank[i] * inv_deg[i];
        }
        let dangling_mass: f64 = dangling.iter().map(|&i| rank[i]).sum();
        let base = (1.0 - damping) / n as f64 + damping * dangling_mass / n as f64;
        linalg::adj_matvec(g, 0.0, &flow, &mut next);
        for x in next.iter_mut() {
            *x = base + damping * *x;
        }
        // keep the distribution exactly stochastic against rounding drift
        let total = linalg::sum(&next);
        linalg::scale(&mut next, 1.0 / total);
        iterations += 1;
        let change: f64 = linalg::sum(&rank.iter().zip(&next).map(|(a, b)| (a - b).abs()).collect::<Vec<_>>());
        std::mem::swap(&mut rank, &mut next);
        if change < tol {
            converged = true;
            break;
        }
    }
    Ok(CentralityScores {
        measure: Measure::Pagerank,
        scores: rank,
        normalization: Normalization::Raw,
        converged,
        iterations,
        diagnostic: (!converged).then(|| format!("pagerank stopped after {iterations} iterations")),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;
    use approx::assert_relative_eq;

    #[test]
    fn degree_cases() {
        assert_eq!(degree_centrality(&complete(3)).scores, vec![2.0; 3]);
        assert_eq!(degree_centrality(&star(4)).scores, vec![4.0, 1.0, 1.0, 1.0, 1.0]);
        assert_eq!(degree_centrality(&Graph::empty(3)).scores, vec![0.0; 3]);
    }

    #[test]
    fn closeness_cases() {
        let c = closeness_centrality(&path(3), DEFAULT_PATH_LIMIT).unwrap();
        assert_eq!(c.scores, vec![1.0, 1.5, 1.0]);
        let k4 = closeness_centrality(&complete(4), DEFAULT_PATH_LIMIT).unwrap();
        assert!(k4.scores.iter().all(|&s| (s - 4.0 / 3.0).abs() < 1e-15));
        let two = from(4, &[(0, 1), (2, 3)]);
        assert!(matches!(
            closeness_centrality(&two, DEFAULT_PATH_LIMIT),
            Err(Error::Disconnected { components: 2 })
        ));
        assert!(matches!(closeness_centrality(&path(5), 4), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn betweenness_cases() {
        let b = betweenness_centrality(&path(3), DEFAULT_PATH_LIMIT).unwrap();
        assert_eq!(b.scores, vec![0.0, 1.0, 0.0]);
        let c4 = betweenness_centrality(&cycle(4), DEFAULT_PATH_LIMIT).unwrap();
        assert!(c4.scores.iter().all(|&s| (s - 0.5).abs() < 1e-15));
        assert!(betweenness_centrality(&path(5), 4).is_err());
    }

    #[test]
    fn eigenvector_cases() {
        let k3 = eigenvector_centrality(&complete(3), 1e-12, 1000).unwrap();
        for s in &k3.scores {
            assert_relative_eq!(*s, 1.0 / 3f64.sqrt(), epsilon = 1e-12);
        }
        let st = eigenvector_centrality(&star(4), 1e-12, 10_000)
            .unwrap()
            .normalized(Normalization::Max1);
        assert_relative_eq!(st.scores[0], 1.0, epsilon = 1e-10);
        for leaf in 1..5 {
            assert_relative_eq!(st.scores[leaf], 0.5, epsilon = 1e-10);
        }
    }

    #[test]
    fn pagerank_symmetric_cases() {
        let c5 = pagerank(&cycle(5), 0.85, 1e-14, 1000).unwrap();
        assert!(c5.converged);
        assert!(c5.scores.iter().all(|&s| (s - 0.2).abs() < 1e-12));
        for d in [0.1, 0.5, 0.99] {
            let k2 = pagerank(&path(2), d, 1e-14, 10_000).unwrap();
            assert!(k2.scores.iter().all(|&s| (s - 0.5).abs() < 1e-12));
        }
        assert!(pagerank(&path(2), 1.0, 1e-10, 10).is_err());
    }

    #[test]
    fn pagerank_with_isolated_nodes_sums_to_one() {
        let g = from(5, &[(0, 1), (1, 2)]);
        let pr = pagerank(&g, 0.85, 1e-13, 10_000).unwrap();
        assert!((pr.scores.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(pr.scores[3] > 0.0);
    }

    #[test]
    fn measure_names_parse() {
        for m in Measure::ALL {
            assert_eq!(m.name().parse::<Measure>().unwrap(), m);
        }
        assert!("katz".parse::<Measure>().is_err());
    }
}
