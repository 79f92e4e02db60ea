//! Social group centrality model.
//!
//! A preferential-attachment population ("masses") with exponentially
//! distributed popularity, joined by two cliques of popularity-100 nodes:
//! community leaders, wired broadly into the low-popularity masses, and
//! celebrities, wired sparsely into the high-popularity masses.

use std::collections::BTreeSet;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Dataset, Graph, NodeMeta, NodeTable};

pub const MASSES: &str = "masses";
pub const LEADER: &str = "leader";
pub const CELEBRITY: &str = "celebrity";

pub type SgcRng = ChaCha8Rng;

/// How community leaders choose mass neighbors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LeaderTarget {
    /// Independent Bernoulli(p_leader) per mass node with popularity below k.
    UniformBelowK,
    /// Target popularities drawn from `100 · Beta(alpha, beta)`.
    Beta { alpha: f64, beta: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SgcConfig {
    pub masses_count: usize,
    pub ba_m: usize,
    /// Mean of the exponential popularity distribution.
    pub popularity_mean: f64,
    pub popularity_cap: f64,
    /// Popularity split between leader and celebrity eligibility.
    pub k: f64,
    pub n_leaders: usize,
    pub n_celebrities: usize,
    pub p_leader: f64,
    pub p_celeb: f64,
    pub leader_target: LeaderTarget,
    /// Draws per leader in Beta mode; defaults to the uniform-mode
    /// expectation `p_leader · |{pop < k}|`.
    pub beta_expected_degree: Option<usize>,
    pub seed: u64,
}

impl Default for SgcConfig {
    fn default() -> Self {
        SgcConfig {
            masses_count: 10_000,
            ba_m: 2,
            popularity_mean: 20.0,
            popularity_cap: 100.0,
            k: 50.0,
            n_leaders: 10,
            n_celebrities: 10,
            p_leader: 0.1,
            p_celeb: 0.01,
            leader_target: LeaderTarget::UniformBelowK,
            beta_expected_degree: None,
            seed: 0,
        }
    }
}

impl SgcConfig {
    /// Full validation, including `p_celeb <= p_leader`.
    pub fn validate(&self) -> Result<()> {
        self.validate_ranges()?;
        if self.p_celeb > self.p_leader {
            return Err(Error::Validation(format!(
                "p_celeb ({}) must not exceed p_leader ({})",
                self.p_celeb, self.p_leader
            )));
        }
        Ok(())
    }

    /// Per-field range checks without the cross-group probability ordering;
    /// experiments that sweep the degree ratio use this.
    pub fn validate_ranges(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Validation(msg));
        if self.ba_m < 1 || self.masses_count <= self.ba_m {
            return bad(format!(
                "need masses_count > ba_m >= 1, got masses_count = {}, ba_m = {}",
                self.masses_count, self.ba_m
            ));
        }
        if !(self.popularity_mean > 0.0) || !(self.popularity_cap > 0.0 && self.popularity_cap <= 100.0) {
            return bad("popularity_mean must be positive and popularity_cap in (0, 100]".into());
        }
        if !(self.k > 0.0 && self.k < 100.0) {
            return bad(format!("k = {} outside (0, 100)", self.k));
        }
        for (name, p) in [("p_leader", self.p_leader), ("p_celeb", self.p_celeb)] {
            if !(p > 0.0 && p < 1.0) {
                return bad(format!("{name} = {p} outside (0, 1)"));
            }
        }
        if self.n_leaders == 0 || self.n_celebrities == 0 {
            return bad("group sizes must be at least 1".into());
        }
        if let LeaderTarget::Beta { alpha, beta } = self.leader_target {
            if !(alpha > 0.0 && beta > 0.0) {
                return bad(format!("Beta parameters must be positive, got ({alpha}, {beta})"));
            }
        }
        if self.beta_expected_degree == Some(0) {
            return bad("beta_expected_degree must be at least 1".into());
        }
        Ok(())
    }

    /// Expected number of masses with popularity below `k`.
    pub fn expected_below_k(&self) -> f64 {
        self.masses_count as f64 * (1.0 - (-self.k / self.popularity_mean).exp())
    }

    /// Expected number of masses with popularity above `k`.
    pub fn expected_above_k(&self) -> f64 {
        self.masses_count as f64 * (-self.k / self.popularity_mean).exp()
    }

    /// Expected initial degree of a leader and of a celebrity (clique edges
    /// included) under uniform attachment.
    pub fn expected_group_degrees(&self) -> (f64, f64) {
        (
            (self.n_leaders - 1) as f64 + self.p_leader * self.expected_below_k(),
            (self.n_celebrities - 1) as f64 + self.p_celeb * self.expected_above_k(),
        )
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Validation(format!("config: {e}")))
    }
}

/// A model graph under construction. Masses occupy indices `0..masses`.
#[derive(Debug, Clone, Default)]
pub struct Fragment {
    pub masses: usize,
    pub edges: Vec<(u32, u32)>,
    pub meta: Vec<NodeMeta>,
    pub warnings: Vec<String>,
}

impl Fragment {
    pub fn node_count(&self) -> usize {
        self.meta.len()
    }

    pub fn build(&self) -> Graph {
        Graph::from_edges(self.meta.len(), self.edges.iter().copied()).0
    }

    fn add_clique(&mut self, group: &str, prefix: &str, size: usize) -> std::ops::Range<usize> {
        let start = self.meta.len();
        for i in 0..size {
            self.meta
                .push(NodeMeta::new(format!("{prefix}{i}"), 100.0).with_group(group));
        }
        for a in start..start + size {
            for b in a + 1..start + size {
                self.edges.push((a as u32, b as u32));
            }
        }
        start..start + size
    }
}

#[derive(Debug, Clone)]
pub struct SgcGraph {
    pub graph: Graph,
    pub meta: NodeTable,
    pub config: SgcConfig,
    pub warnings: Vec<String>,
}

impl SgcGraph {
    pub fn dataset(&self) -> Dataset {
        Dataset {
            graph: self.graph.clone(),
            meta: self.meta.clone(),
        }
    }
}

/// Preferential-attachment masses: a complete core on `ba_m + 1` nodes,
/// then each arrival links to `ba_m` distinct existing nodes chosen with
/// probability proportional to degree. Popularity is exponential with mean
/// `popularity_mean`, clamped at `popularity_cap`.
pub fn generate_masses(cfg: &SgcConfig, rng: &mut SgcRng) -> Result<Fragment> {
    let (n, m) = (cfg.masses_count, cfg.ba_m);
    if m < 1 || n <= m {
        return Err(Error::InvalidArgument(format!(
            "need masses_count > ba_m >= 1, got {n} and {m}"
        )));
    }
    let edges = barabasi_albert_edges(n, m, rng);
    let exp = Exp::new(1.0 / cfg.popularity_mean)
        .map_err(|e| Error::InvalidArgument(format!("popularity distribution: {e}")))?;
    let meta = (0..n)
        .map(|i| {
            let pop = exp.sample(rng).min(cfg.popularity_cap);
            NodeMeta::new(format!("m{i}"), pop).with_group(MASSES)
        })
        .collect();
    Ok(Fragment {
        masses: n,
        edges,
        meta,
        warnings: Vec::new(),
    })
}

/// Edge list of a preferential-attachment graph on `n` nodes.
pub fn barabasi_albert_edges<R: Rng>(n: usize, m: usize, rng: &mut R) -> Vec<(u32, u32)> {
    assert!(m >= 1 && n > m);
    let mut edges = Vec::with_capacity(m * (m + 1) / 2 + (n - m - 1) * m);
    // every edge endpoint once: sampling an entry is degree-proportional
    let mut ends: Vec<u32> = Vec::with_capacity(2 * edges.capacity());
    for a in 0..=m as u32 {
        for b in a + 1..=m as u32 {
            edges.push((a, b));
            ends.push(a);
            ends.push(b);
        }
    }
    let mut chosen: Vec<u32> = Vec::with_capacity(m);
    for u in (m + 1) as u32..n as u32 {
        chosen.clear();
        while chosen.len() < m {
            let t = *ends.choose(rng).expect("core is nonempty");
            if !chosen.contains(&t) {
                chosen.push(t);
            }
        }
        for &t in &chosen {
            edges.push((u, t));
            ends.push(u);
            ends.push(t);
        }
    }
    edges
}

fn check_group(size: usize) -> Result<()> {
    if size == 0 {
        return Err(Error::InvalidArgument("group size must be at least 1".into()));
    }
    Ok(())
}

/// Adds a clique of `size` popularity-100 nodes and links each of them to
/// every eligible mass node independently with probability `p`.
pub fn attach_group<F>(
    frag: &mut Fragment,
    group: &str,
    size: usize,
    eligible: F,
    p: f64,
    rng: &mut SgcRng,
) -> Result<()>
where
    F: Fn(f64) -> bool,
{
    check_group(size)?;
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidArgument(format!("attachment probability {p} outside (0, 1)")));
    }
    let pool: Vec<u32> = (0..frag.masses)
        .filter(|&i| eligible(frag.meta[i].popularity))
        .map(|i| i as u32)
        .collect();
    let prefix = group_prefix(group);
    let members = frag.add_clique(group, &prefix, size);
    if pool.is_empty() {
        let msg = format!("group {group:?}: no eligible mass nodes, attachment skipped");
        log::warn!("{msg}");
        frag.warnings.push(msg);
        return Ok(());
    }
    for g in members {
        for &t in &pool {
            if rng.random_bool(p) {
                frag.edges.push((g as u32, t));
            }
        }
    }
    Ok(())
}

fn group_prefix(group: &str) -> String {
    match group {
        LEADER => "l".into(),
        CELEBRITY => "c".into(),
        other => format!("{other}_"),
    }
}

/// Adds a clique of `size` popularity-100 nodes; each draws
/// `expected_degree` target popularities `100 · Beta(alpha, beta)` and links
/// to a uniformly chosen mass node in the nearest nonempty width-1
/// popularity bucket. Repeated targets collapse to a single edge.
pub fn beta_target_attachment(
    frag: &mut Fragment,
    group: &str,
    size: usize,
    alpha: f64,
    beta: f64,
    expected_degree: usize,
    rng: &mut SgcRng,
) -> Result<()> {
    check_group(size)?;
    if expected_degree == 0 {
        return Err(Error::InvalidArgument("expected_degree must be at least 1".into()));
    }
    let dist = Beta::new(alpha, beta)
        .map_err(|e| Error::InvalidArgument(format!("Beta({alpha}, {beta}): {e}")))?;
    if frag.masses == 0 {
        return Err(Error::InvalidArgument("no mass nodes to attach to".into()));
    }
    let buckets = PopularityBuckets::new(&frag.meta[..frag.masses]);
    let members = frag.add_clique(group, &group_prefix(group), size);
    for g in members {
        let mut targets = BTreeSet::new();
        for _ in 0..expected_degree {
            let want = 100.0 * dist.sample(rng);
            let bucket = buckets.nearest(want);
            let node = *buckets.nodes[bucket].choose(rng).expect("nearest bucket is nonempty");
            targets.insert(node);
        }
        frag.edges.extend(targets.into_iter().map(|t| (g as u32, t)));
    }
    Ok(())
}

/// Mass nodes grouped by `floor(popularity)`, with 100 folded into 99.
pub struct PopularityBuckets {
    pub nodes: Vec<Vec<u32>>,
}

impl PopularityBuckets {
    pub const COUNT: usize = 100;

    pub fn new(masses: &[NodeMeta]) -> Self {
        let mut nodes = vec![Vec::new(); Self::COUNT];
        for (i, m) in masses.iter().enumerate() {
            nodes[Self::index(m.popularity)].push(i as u32);
        }
        PopularityBuckets { nodes }
    }

    pub fn index(pop: f64) -> usize {
        (pop.max(0.0).floor() as usize).min(Self::COUNT - 1)
    }

    /// Nonempty bucket closest to `pop`; ties go to the lower bucket.
    pub fn nearest(&self, pop: f64) -> usize {
        let home = Self::index(pop);
        if !self.nodes[home].is_empty() {
            return home;
        }
        let mut best: Option<(f64, usize)> = None;
        for (b, nodes) in self.nodes.iter().enumerate() {
            if nodes.is_empty() {
                continue;
            }
            let dist = if b < home { pop - (b + 1) as f64 } else { b as f64 - pop };
            if best.is_none_or(|(d, _)| dist < d) {
                best = Some((dist, b));
            }
        }
        best.expect("at least one bucket is nonempty").1
    }
}

/// Generates the full model deterministically from `cfg.seed`.
pub fn generate_sgc(cfg: &SgcConfig) -> Result<SgcGraph> {
    cfg.validate()?;
    generate_unchecked(cfg)
}

/// As [`generate_sgc`] but only range-checks the configuration, so the
/// leader attachment probability may fall below the celebrity one.
pub fn generate_sgc_relaxed(cfg: &SgcConfig) -> Result<SgcGraph> {
    cfg.validate_ranges()?;
    generate_unchecked(cfg)
}

fn generate_unchecked(cfg: &SgcConfig) -> Result<SgcGraph> {
    let mut rng = SgcRng::seed_from_u64(cfg.seed);
    let mut frag = generate_masses(cfg, &mut rng)?;
    let k = cfg.k;
    match cfg.leader_target {
        LeaderTarget::UniformBelowK => {
            attach_group(&mut frag, LEADER, cfg.n_leaders, |p| p < k, cfg.p_leader, &mut rng)?;
        }
        LeaderTarget::Beta { alpha, beta } => {
            let degree = cfg.beta_expected_degree.unwrap_or_else(|| {
                let below = frag.meta[..frag.masses].iter().filter(|m| m.popularity < k).count();
                ((cfg.p_leader * below as f64).round() as usize).max(1)
            });
            beta_target_attachment(&mut frag, LEADER, cfg.n_leaders, alpha, beta, degree, &mut rng)?;
        }
    }
    attach_group(&mut frag, CELEBRITY, cfg.n_celebrities, |p| p > k, cfg.p_celeb, &mut rng)?;
    Ok(SgcGraph {
        graph: frag.build(),
        meta: NodeTable::new(frag.meta),
        config: cfg.clone(),
        warnings: frag.warnings,
    })
}
