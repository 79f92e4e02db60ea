//! Popularity-threshold sweeps.
//!
//! For every threshold `t` on the grid the graph is cut down to nodes with
//! popularity `>= t`, restricted to its largest connected component, and
//! the requested centralities plus the top of the adjacency spectrum are
//! computed there. Nodes outside that component score zero. Records are
//! independent of each other, so thresholds run in parallel and are
//! assembled in grid order.

mod format;

pub use format::{
    read_sweep_csv, read_sweep_json, write_sweep_csv, write_sweep_json, CSV_SCHEMA, JSON_SCHEMA, SCHEMA_VERSION,
};

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::centrality::{self, CentralityScores, Measure, Normalization};
use crate::error::{Error, Result};
use crate::graph::{self, Graph, NodeTable};
use crate::spectral;

/// Pseudo-group under which whole-graph fields appear in long-form output.
pub const GRAPH_SCOPE: &str = "_graph";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub measures: BTreeSet<Measure>,
    pub k_eigs: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub damping: f64,
    pub pagerank_tol: f64,
    pub pagerank_max_iter: usize,
    pub path_limit: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            measures: BTreeSet::from([Measure::Eigenvector]),
            k_eigs: 3,
            tol: spectral::DEFAULT_TOL,
            max_iter: spectral::DEFAULT_MAX_ITER,
            damping: centrality::DEFAULT_DAMPING,
            pagerank_tol: centrality::DEFAULT_PAGERANK_TOL,
            pagerank_max_iter: centrality::DEFAULT_PAGERANK_MAX_ITER,
            path_limit: centrality::DEFAULT_PATH_LIMIT,
        }
    }
}

impl SweepOptions {
    pub fn with_measures<I: IntoIterator<Item = Measure>>(mut self, measures: I) -> Self {
        self.measures = measures.into_iter().collect();
        self
    }
}

/// Series-name stem for a measure's group aggregates.
pub fn measure_field(m: Measure) -> &'static str {
    match m {
        Measure::Eigenvector => "eigencentrality",
        Measure::Pagerank => "pagerank",
        Measure::Degree => "degree_centrality",
        Measure::Closeness => "closeness",
        Measure::Betweenness => "betweenness",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupStats {
    pub group: String,
    /// Field name → value; see [`group_series`] for the names.
    pub fields: BTreeMap<String, f64>,
}

impl GroupStats {
    pub fn get(&self, field: &str) -> Option<f64> {
        self.fields.get(field).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRecord {
    pub threshold: u32,
    pub node_count: usize,
    pub edge_count: usize,
    pub lcc_node_count: usize,
    pub lcc_edge_count: usize,
    /// No node survived the threshold.
    pub empty: bool,
    pub eigenvalues: Vec<f64>,
    /// Eigenvalues divided by the largest; empty when `λ₁ <= 0`.
    pub normalized_eigenvalues: Vec<f64>,
    pub spectrum_converged: Vec<bool>,
    /// Convergence per iterative measure.
    pub converged: BTreeMap<String, bool>,
    pub groups: Vec<GroupStats>,
    pub diagnostics: Vec<String>,
}

impl ThresholdRecord {
    pub fn group(&self, name: &str) -> Option<&GroupStats> {
        self.groups.iter().find(|g| g.group == name)
    }

    /// Whole-graph scalar fields by name.
    pub fn scalar(&self, field: &str) -> Option<f64> {
        let idx = |prefix: &str| -> Option<usize> {
            field.strip_prefix(prefix)?.parse::<usize>().ok().filter(|&i| i >= 1).map(|i| i - 1)
        };
        match field {
            "node_count" => Some(self.node_count as f64),
            "edge_count" => Some(self.edge_count as f64),
            "lcc_node_count" => Some(self.lcc_node_count as f64),
            "lcc_edge_count" => Some(self.lcc_edge_count as f64),
            "empty" => Some(if self.empty { 1.0 } else { 0.0 }),
            _ => {
                if let Some(i) = idx("lambda_norm_") {
                    self.normalized_eigenvalues.get(i).copied()
                } else if let Some(i) = idx("lambda_") {
                    self.eigenvalues.get(i).copied()
                } else {
                    None
                }
            }
        }
    }

    /// `(name, value)` for every whole-graph scalar, in a fixed order.
    pub fn scalars(&self) -> Vec<(String, f64)> {
        let mut out = vec![
            ("node_count".to_string(), self.node_count as f64),
            ("edge_count".to_string(), self.edge_count as f64),
            ("lcc_node_count".to_string(), self.lcc_node_count as f64),
            ("lcc_edge_count".to_string(), self.lcc_edge_count as f64),
            ("empty".to_string(), if self.empty { 1.0 } else { 0.0 }),
        ];
        for (i, v) in self.eigenvalues.iter().enumerate() {
            out.push((format!("lambda_{}", i + 1), *v));
        }
        for (i, v) in self.normalized_eigenvalues.iter().enumerate() {
            out.push((format!("lambda_norm_{}", i + 1), *v));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub groups: Vec<String>,
    pub grid: Vec<u32>,
    pub options: SweepOptions,
    /// Closed popularity band removed before sweeping, if any.
    pub removed_band: Option<(f64, f64)>,
    pub records: Vec<ThresholdRecord>,
}

impl SweepResult {
    pub fn record(&self, threshold: u32) -> Option<&ThresholdRecord> {
        self.records.iter().find(|r| r.threshold == threshold)
    }

    /// Mask of thresholds whose graph still has nodes.
    pub fn nonempty(&self) -> Vec<bool> {
        self.records.iter().map(|r| !r.empty).collect()
    }
}

/// Parses `lo..hi:step` (inclusive, step defaults to 1), a comma list, or a
/// single threshold. Thresholds must lie in `0..=100`.
pub fn parse_grid(spec: &str) -> Result<Vec<u32>> {
    let bad = |why: &str| Error::InvalidArgument(format!("grid {spec:?}: {why}"));
    let num = |s: &str| -> Result<u32> { s.trim().parse::<u32>().map_err(|_| bad("not an integer")) };
    let spec_t = spec.trim();
    let grid: Vec<u32> = if let Some((lo, rest)) = spec_t.split_once("..") {
        let (hi, step) = match rest.split_once(':') {
            Some((hi, step)) => (num(hi)?, num(step)?),
            None => (num(rest)?, 1),
        };
        let lo = num(lo)?;
        if step == 0 {
            return Err(bad("step must be positive"));
        }
        if lo > hi {
            return Err(bad("lower end exceeds upper end"));
        }
        (lo..=hi).step_by(step as usize).collect()
    } else {
        spec_t.split(',').map(num).collect::<Result<_>>()?
    };
    validate_grid(&grid)?;
    Ok(grid)
}

pub fn validate_grid(grid: &[u32]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("threshold grid is empty".into()));
    }
    if grid.iter().any(|&t| t > 100) {
        return Err(Error::InvalidArgument("thresholds must lie in 0..=100".into()));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("threshold grid must be strictly ascending".into()));
    }
    Ok(())
}

pub fn default_grid() -> Vec<u32> {
    (0..=100).collect()
}

fn compute_measure(g: &Graph, m: Measure, opts: &SweepOptions) -> Result<CentralityScores> {
    match m {
        Measure::Degree => Ok(centrality::degree_centrality(g)),
        Measure::Closeness => centrality::closeness_centrality(g, opts.path_limit),
        Measure::Betweenness => centrality::betweenness_centrality(g, opts.path_limit),
        Measure::Eigenvector => centrality::eigenvector_centrality(g, opts.tol, opts.max_iter),
        Measure::Pagerank => centrality::pagerank(g, opts.damping, opts.pagerank_tol, opts.pagerank_max_iter),
    }
}

/// Analysis of one threshold. `g` and `meta` are the already-thresholded
/// graph and its metadata.
pub fn analyze_threshold(
    threshold: u32,
    g: &Graph,
    meta: &NodeTable,
    groups: &[String],
    opts: &SweepOptions,
) -> ThresholdRecord {
    let n = g.node_count();
    let mut diagnostics = Vec::new();
    let members: Vec<Vec<usize>> = groups.iter().map(|name| meta.members(name)).collect();
    let mut stats: Vec<GroupStats> = groups
        .iter()
        .zip(&members)
        .map(|(name, idx)| {
            let mean_degree = if idx.is_empty() {
                0.0
            } else {
                idx.iter().map(|&i| g.degree(i) as f64).sum::<f64>() / idx.len() as f64
            };
            let mut fields = BTreeMap::new();
            fields.insert("size".to_string(), idx.len() as f64);
            fields.insert("mean_degree".to_string(), mean_degree);
            GroupStats {
                group: name.clone(),
                fields,
            }
        })
        .collect();

    let (lcc, lmap) = graph::largest_connected_component(g);
    let in_lcc: Vec<bool> = (0..n).map(|i| lmap.to_new(i).is_some()).collect();
    for (s, idx) in stats.iter_mut().zip(&members) {
        let c = idx.iter().filter(|&&i| in_lcc[i]).count();
        s.fields.insert("lcc_size".to_string(), c as f64);
    }

    let mut converged = BTreeMap::new();
    for &m in &opts.measures {
        let stem = measure_field(m);
        let scores = if lcc.is_empty() {
            vec![0.0; n]
        } else {
            match compute_measure(&lcc, m, opts) {
                Ok(c) => {
                    if m == Measure::Eigenvector || m == Measure::Pagerank {
                        converged.insert(m.name().to_string(), c.converged);
                    }
                    if let Some(d) = &c.diagnostic {
                        diagnostics.push(format!("{m}: {d}"));
                    }
                    lmap.extend(&c.normalized(Normalization::L2).scores, 0.0)
                }
                Err(e) => {
                    diagnostics.push(format!("{m}: {e}"));
                    vec![0.0; n]
                }
            }
        };
        for (s, idx) in stats.iter_mut().zip(&members) {
            let (mean, max) = if idx.is_empty() {
                (0.0, 0.0)
            } else {
                let sum: f64 = idx.iter().map(|&i| scores[i]).sum();
                let max = idx.iter().map(|&i| scores[i]).fold(0.0f64, f64::max);
                (sum / idx.len() as f64, max)
            };
            s.fields.insert(format!("mean_{stem}"), mean);
            s.fields.insert(format!("max_{stem}"), max);
        }
    }

    let (mut eigenvalues, mut normalized, mut spectrum_converged) = (Vec::new(), Vec::new(), Vec::new());
    if !lcc.is_empty() && opts.k_eigs > 0 {
        let k = opts.k_eigs.min(lcc.node_count());
        match spectral::top_k_spectrum(&lcc, k, opts.tol, opts.max_iter) {
            Ok(s) => {
                eigenvalues = s.values();
                spectrum_converged = s.pairs.iter().map(|p| p.converged).collect();
                if eigenvalues[0] > 0.0 {
                    normalized = eigenvalues.iter().map(|v| v / eigenvalues[0]).collect();
                }
                diagnostics.extend(s.diagnostics.into_iter().map(|d| format!("spectrum: {d}")));
            }
            Err(e) => diagnostics.push(format!("spectrum: {e}")),
        }
    }
    if n == 0 {
        diagnostics.push("no nodes survive this threshold".into());
    }

    ThresholdRecord {
        threshold,
        node_count: n,
        edge_count: g.edge_count(),
        lcc_node_count: lcc.node_count(),
        lcc_edge_count: lcc.edge_count(),
        empty: n == 0,
        eigenvalues,
        normalized_eigenvalues: normalized,
        spectrum_converged,
        converged,
        groups: stats,
        diagnostics,
    }
}

fn check_inputs(g: &Graph, meta: &NodeTable, grid: &[u32], opts: &SweepOptions) -> Result<()> {
    if meta.len() != g.node_count() {
        return Err(Error::Validation(format!(
            "{} nodes but {} metadata rows",
            g.node_count(),
            meta.len()
        )));
    }
    validate_grid(grid)?;
    if opts.k_eigs == 0 {
        return Err(Error::InvalidArgument("k_eigs must be at least 1".into()));
    }
    Ok(())
}

pub fn threshold_sweep(
    g: &Graph,
    meta: &NodeTable,
    groups: &[String],
    grid: &[u32],
    opts: &SweepOptions,
) -> Result<SweepResult> {
    check_inputs(g, meta, grid, opts)?;
    let records = grid
        .par_iter()
        .map(|&t| {
            let (sub, map) = graph::induce_by_popularity(g, meta, t as f64);
            let sub_meta = meta.restrict(&map);
            analyze_threshold(t, &sub, &sub_meta, groups, opts)
        })
        .collect();
    Ok(SweepResult {
        groups: groups.to_vec(),
        grid: grid.to_vec(),
        options: opts.clone(),
        removed_band: None,
        records,
    })
}

/// Deletes nodes with popularity in `[lo, hi]`, then sweeps the rest.
pub fn removal_band_sweep(
    g: &Graph,
    meta: &NodeTable,
    groups: &[String],
    band: (f64, f64),
    grid: &[u32],
    opts: &SweepOptions,
) -> Result<SweepResult> {
    check_inputs(g, meta, grid, opts)?;
    let (rest, map) = graph::remove_popularity_band(g, meta, band.0, band.1)?;
    let mut result = threshold_sweep(&rest, &meta.restrict(&map), groups, grid, opts)?;
    result.removed_band = Some(band);
    Ok(result)
}

fn is_scalar_field(field: &str) -> bool {
    let indexed = |prefix: &str| {
        field
            .strip_prefix(prefix)
            .and_then(|i| i.parse::<usize>().ok())
            .is_some_and(|i| i >= 1)
    };
    ["node_count", "edge_count", "lcc_node_count", "lcc_edge_count", "empty"].contains(&field)
        || indexed("lambda_norm_")
        || indexed("lambda_")
}

/// One plottable series: a group field across the grid. Whole-graph
/// scalars (`node_count`, `lambda_2`, `lambda_norm_2`, ...) are reached
/// with `group = "_graph"`.
pub fn group_series(result: &SweepResult, group: &str, field: &str) -> Result<(Vec<u32>, Vec<f64>)> {
    let mut values = Vec::with_capacity(result.records.len());
    if group == GRAPH_SCOPE {
        if !is_scalar_field(field) {
            return Err(Error::InvalidArgument(format!("unknown field {field:?}")));
        }
        // eigenvalues missing on tiny or empty graphs read as zero
        values.extend(result.records.iter().map(|r| r.scalar(field).unwrap_or(0.0)));
    } else {
        if !result.groups.iter().any(|g| g == group) {
            return Err(Error::InvalidArgument(format!("unknown group {group:?}")));
        }
        for r in &result.records {
            let stats = r
                .group(group)
                .ok_or_else(|| Error::InvalidArgument(format!("group {group:?} missing at t = {}", r.threshold)))?;
            let v = stats
                .get(field)
                .ok_or_else(|| Error::InvalidArgument(format!("unknown field {field:?} for group {group:?}")))?;
            values.push(v);
        }
    }
    Ok((result.grid.clone(), values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;
    use crate::graph::NodeMeta;

    fn labelled(pops: &[f64], groups: &[&str]) -> NodeTable {
        NodeTable::new(
            pops.iter()
                .zip(groups)
                .enumerate()
                .map(|(i, (&p, &g))| NodeMeta::new(i.to_string(), p).with_group(g))
                .collect(),
        )
    }

    #[test]
    fn grid_specs() {
        assert_eq!(parse_grid("0..100:1").unwrap().len(), 101);
        assert_eq!(parse_grid("0..100").unwrap().len(), 101);
        assert_eq!(parse_grid("10..30:10").unwrap(), vec![10, 20, 30]);
        assert_eq!(parse_grid("5, 7,9").unwrap(), vec![5, 7, 9]);
        assert_eq!(parse_grid("42").unwrap(), vec![42]);
        for bad in ["", "0..101", "3..1", "0..10:0", "a..b", "5,3", "1,1"] {
            assert!(parse_grid(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn identity_threshold_matches_direct_analysis() {
        let g = star(4);
        let meta = labelled(&[90.0, 10.0, 20.0, 30.0, 40.0], &["hub", "leaf", "leaf", "leaf", "leaf"]);
        let groups = vec!["hub".to_string(), "leaf".to_string()];
        let opts = SweepOptions::default();
        let res = threshold_sweep(&g, &meta, &groups, &[0], &opts).unwrap();
        let rec = &res.records[0];
        assert_eq!((rec.node_count, rec.lcc_node_count), (5, 5));
        let direct = centrality::eigenvector_centrality(&g, opts.tol, opts.max_iter).unwrap();
        assert!((rec.group("hub").unwrap().get("mean_eigencentrality").unwrap() - direct.scores[0]).abs() < 1e-12);
        assert!((rec.eigenvalues[0] - 2.0).abs() < 1e-9);
        assert_eq!(rec.normalized_eigenvalues[0], 1.0);
    }

    #[test]
    fn empty_thresholds_are_flagged_and_zero() {
        let g = path(3);
        let meta = labelled(&[10.0, 20.0, 30.0], &["a", "a", "b"]);
        let groups = vec!["a".to_string(), "b".to_string()];
        let res = threshold_sweep(&g, &meta, &groups, &[0, 25, 50], &SweepOptions::default()).unwrap();
        assert_eq!(res.nonempty(), vec![true, true, false]);
        let last = &res.records[2];
        assert!(last.eigenvalues.is_empty());
        assert_eq!(last.group("a").unwrap().get("mean_eigencentrality"), Some(0.0));
        let (ts, vals) = group_series(&res, "a", "mean_eigencentrality").unwrap();
        assert_eq!(ts, vec![0, 25, 50]);
        assert_eq!(vals[2], 0.0);
        assert!(group_series(&res, "zzz", "mean_degree").is_err());
        assert!(group_series(&res, "a", "nope").is_err());
        assert!(group_series(&res, GRAPH_SCOPE, "nope").is_err());
        assert_eq!(group_series(&res, GRAPH_SCOPE, "node_count").unwrap().1, vec![3.0, 1.0, 0.0]);
    }

    #[test]
    fn non_lcc_nodes_score_zero() {
        // triangle {0,1,2} plus edge {3,4}
        let g = from(5, &[(0, 1), (1, 2), (0, 2), (3, 4)]);
        let meta = labelled(&[50.0; 5], &["x", "x", "x", "y", "y"]);
        let groups = vec!["x".to_string(), "y".to_string()];
        let opts = SweepOptions::default().with_measures([Measure::Eigenvector, Measure::Pagerank, Measure::Degree]);
        let res = threshold_sweep(&g, &meta, &groups, &[0], &opts).unwrap();
        let y = res.records[0].group("y").unwrap();
        assert_eq!(y.get("mean_eigencentrality"), Some(0.0));
        assert_eq!(y.get("mean_pagerank"), Some(0.0));
        assert_eq!(y.get("mean_degree"), Some(1.0));
        assert_eq!(y.get("lcc_size"), Some(0.0));
    }

    #[test]
    fn removal_band_outside_data_is_identity() {
        let g = cycle(6);
        let meta = labelled(&[5.0, 15.0, 25.0, 35.0, 45.0, 55.0], &["a"; 6]);
        let groups = vec!["a".to_string()];
        let opts = SweepOptions::default();
        let grid = [0, 20, 40];
        let plain = threshold_sweep(&g, &meta, &groups, &grid, &opts).unwrap();
        let banded = removal_band_sweep(&g, &meta, &groups, (200.0, 300.0), &grid, &opts).unwrap();
        assert_eq!(plain.records, banded.records);
        let all = removal_band_sweep(&g, &meta, &groups, (0.0, 100.0), &grid, &opts).unwrap();
        assert!(all.records.iter().all(|r| r.empty));
    }
}
