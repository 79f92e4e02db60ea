//! Descriptive network statistics. Assortativity follows the mixing
//! convention: each undirected edge contributes both ordered endpoint pairs.

use serde::{Deserialize, Serialize};

use super::{Graph, NodeTable};
use crate::error::{Error, Result};

/// Pearson correlation; zero variance on either side is an error.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    if n == 0 {
        return Err(Error::UndefinedStatistic("no observations".into()));
    }
    if xs.iter().all(|&x| x == xs[0]) || ys.iter().all(|&y| y == ys[0]) {
        return Err(Error::UndefinedStatistic("zero variance".into()));
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

fn endpoint_pairs(g: &Graph, values: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if g.edge_count() == 0 {
        return Err(Error::UndefinedStatistic("graph has no edges".into()));
    }
    let mut xs = Vec::with_capacity(2 * g.edge_count());
    let mut ys = Vec::with_capacity(2 * g.edge_count());
    for (u, v) in g.edges() {
        xs.push(values[u]);
        ys.push(values[v]);
        xs.push(values[v]);
        ys.push(values[u]);
    }
    Ok((xs, ys))
}

pub fn degree_assortativity(g: &Graph) -> Result<f64> {
    let deg: Vec<f64> = g.degrees().into_iter().map(|d| d as f64).collect();
    attribute_assortativity(g, &deg)
}

pub fn attribute_assortativity(g: &Graph, values: &[f64]) -> Result<f64> {
    assert_eq!(values.len(), g.node_count());
    let (xs, ys) = endpoint_pairs(g, values)?;
    pearson(&xs, &ys)
}

/// Pearson correlation of node degree against popularity.
pub fn degree_popularity_correlation(g: &Graph, meta: &NodeTable) -> Result<f64> {
    assert_eq!(meta.len(), g.node_count());
    let deg: Vec<f64> = g.degrees().into_iter().map(|d| d as f64).collect();
    pearson(&deg, &meta.popularity())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenreOverlap {
    pub fraction: f64,
    pub overlapping_edges: usize,
    pub eligible_edges: usize,
}

/// Share of edges whose endpoints share a genre, among edges where both
/// endpoints carry genre tags.
pub fn genre_edge_overlap(g: &Graph, meta: &NodeTable) -> Result<GenreOverlap> {
    assert_eq!(meta.len(), g.node_count());
    let (mut eligible, mut overlapping) = (0usize, 0usize);
    for (u, v) in g.edges() {
        let (a, b) = (&meta.get(u).genres, &meta.get(v).genres);
        if a.is_empty() || b.is_empty() {
            continue;
        }
        eligible += 1;
        if a.intersection(b).next().is_some() {
            overlapping += 1;
        }
    }
    if eligible == 0 {
        return Err(Error::UndefinedStatistic("no edge has genre tags on both endpoints".into()));
    }
    Ok(GenreOverlap {
        fraction: overlapping as f64 / eligible as f64,
        overlapping_edges: overlapping,
        eligible_edges: eligible,
    })
}

pub fn group_mean_degree(g: &Graph, meta: &NodeTable, group: &str) -> Result<f64> {
    let members = meta.members(group);
    if members.is_empty() {
        return Err(Error::InvalidArgument(format!("group {group:?} has no members")));
    }
    Ok(members.iter().map(|&i| g.degree(i) as f64).sum::<f64>() / members.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;
    use crate::graph::NodeMeta;
    use approx::assert_relative_eq;

    #[test]
    fn star_is_disassortative() {
        for leaves in 2..8 {
            assert_relative_eq!(degree_assortativity(&star(leaves)).unwrap(), -1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn regular_graph_undefined() {
        assert!(matches!(degree_assortativity(&cycle(5)), Err(Error::UndefinedStatistic(_))));
        let meta = NodeTable::from_popularity(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        assert!(degree_popularity_correlation(&cycle(5), &meta).is_err());
    }

    #[test]
    fn mixed_components_match_hand_pearson() {
        // two disjoint edges plus P4: ordered endpoint degree pairs are
        // (1,1)x4, (1,2)x2, (2,1)x2, (2,2)x2 -> cov 0.04, var 0.24
        let g = from(8, &[(0, 1), (2, 3), (4, 5), (5, 6), (6, 7)]);
        assert_relative_eq!(degree_assortativity(&g).unwrap(), 1.0 / 6.0, epsilon = 1e-12);
    }

    #[test]
    fn homophily_cases() {
        let g = from(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]);
        let vals = [0.0, 0.0, 0.0, 100.0, 100.0, 100.0];
        assert_relative_eq!(attribute_assortativity(&g, &vals).unwrap(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(
            attribute_assortativity(&path(2), &[0.0, 100.0]).unwrap(),
            -1.0,
            epsilon = 1e-12
        );
        assert!(attribute_assortativity(&g, &[7.0; 6]).is_err());
    }

    #[test]
    fn degree_popularity_fixture() {
        // degrees (1,1,2,2) against popularity (10,20,30,40): r = 20/sqrt(500)
        let g = from(4, &[(0, 2), (2, 3), (3, 1)]);
        let meta = NodeTable::from_popularity(&[10.0, 20.0, 30.0, 40.0]);
        assert_relative_eq!(degree_popularity_correlation(&g, &meta).unwrap(), 2.0 / 5f64.sqrt(), epsilon = 1e-12);

        let s = star(3);
        let meta = NodeTable::from_popularity(&[3.0, 1.0, 1.0, 1.0]);
        assert_relative_eq!(degree_popularity_correlation(&s, &meta).unwrap(), 1.0, epsilon = 1e-12);
    }

    fn tagged(tags: &[&[&str]]) -> NodeTable {
        NodeTable::new(
            tags.iter()
                .enumerate()
                .map(|(i, t)| NodeMeta::new(i.to_string(), 0.0).with_genres(t.iter().copied()))
                .collect(),
        )
    }

    #[test]
    fn genre_overlap_cases() {
        let all_rock = tagged(&[&["rock"], &["rock"], &["rock"]]);
        assert_eq!(genre_edge_overlap(&cycle(3), &all_rock).unwrap().fraction, 1.0);

        let disjoint = tagged(&[&["rock"], &["jazz"]]);
        assert_eq!(genre_edge_overlap(&path(2), &disjoint).unwrap().fraction, 0.0);

        // edges: 0-1 {rock,pop}/{pop} share; 1-2 {pop}/{} ineligible;
        // 2-3 ineligible; 3-4 {jazz}/{rap,jazz} share; 0-4 {rock,pop}/{rap,jazz} no
        let g = from(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)]);
        let meta = tagged(&[&["rock", "pop"], &["pop"], &[], &["jazz"], &["rap", "jazz"]]);
        let o = genre_edge_overlap(&g, &meta).unwrap();
        assert_eq!((o.overlapping_edges, o.eligible_edges), (2, 3));
        assert_relative_eq!(o.fraction, 2.0 / 3.0);

        assert!(genre_edge_overlap(&path(2), &tagged(&[&[], &["x"]])).is_err());
    }

    #[test]
    fn group_degrees() {
        let g = star(4);
        let meta = NodeTable::new(
            (0..5)
                .map(|i| NodeMeta::new(i.to_string(), 0.0).with_group(if i == 0 { "center" } else { "leaf" }))
                .collect(),
        );
        assert_eq!(group_mean_degree(&g, &meta, "center").unwrap(), 4.0);
        assert_eq!(group_mean_degree(&g, &meta, "leaf").unwrap(), 1.0);
        assert!(group_mean_degree(&g, &meta, "none").is_err());
    }
}
