//! Transition detection, logistic fits and the model experiments.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sgc::{self, LeaderTarget, SgcConfig, CELEBRITY, LEADER};
use crate::sweep::{self, SweepOptions, SweepResult};

/// Bound on the fitted growth rate. A step between adjacent integer
/// thresholds is already saturated well below this.
pub const MAX_GROWTH: f64 = 100.0;
pub const FIT_DIAMETER_TOL: f64 = 1e-8;
pub const FIT_MAX_EVALS: usize = 10_000;
/// Series field compared between groups by default.
pub const DEFAULT_FIELD: &str = "mean_eigencentrality";

/// Index of the first position after which `b > a` holds at every active
/// position, or `None` if `b <= a` at the last active position.
pub fn detect_transition_index(a: &[f64], b: &[f64], active: Option<&[bool]>) -> Result<Option<usize>> {
    if a.len() != b.len() || active.is_some_and(|m| m.len() != a.len()) {
        return Err(Error::InvalidArgument("series lengths differ".into()));
    }
    let on = |i: usize| active.is_none_or(|m| m[i]);
    let mut start = None;
    for i in (0..a.len()).rev().filter(|&i| on(i)) {
        if b[i] > a[i] {
            start = Some(i);
        } else {
            break;
        }
    }
    Ok(start)
}

/// Threshold at which `b` overtakes `a` for good.
pub fn detect_transition(grid: &[u32], a: &[f64], b: &[f64], active: Option<&[bool]>) -> Result<Option<u32>> {
    if grid.len() != a.len() {
        return Err(Error::InvalidArgument("series and grid lengths differ".into()));
    }
    Ok(detect_transition_index(a, b, active)?.map(|i| grid[i]))
}

/// First threshold at which `b > a`, with no persistence requirement.
pub fn first_crossing(grid: &[u32], a: &[f64], b: &[f64], active: Option<&[bool]>) -> Result<Option<u32>> {
    if grid.len() != a.len() || a.len() != b.len() || active.is_some_and(|m| m.len() != a.len()) {
        return Err(Error::InvalidArgument("series lengths differ".into()));
    }
    Ok((0..a.len())
        .find(|&i| active.is_none_or(|m| m[i]) && b[i] > a[i])
        .map(|i| grid[i]))
}

/// `y(t) = amplitude / (1 + exp(-growth · (t - midpoint)))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticFit {
    pub amplitude: f64,
    pub growth: f64,
    pub midpoint: f64,
    /// Root-mean-square error over the fitted points.
    pub residual: f64,
    pub converged: bool,
    pub evaluations: usize,
}

impl LogisticFit {
    pub fn eval(&self, t: f64) -> f64 {
        logistic(self.amplitude, self.growth, self.midpoint, t)
    }
}

fn logistic(l: f64, g: f64, t0: f64, t: f64) -> f64 {
    let z = -g * (t - t0);
    if z > 700.0 {
        0.0
    } else {
        l / (1.0 + z.exp())
    }
}

struct Simplex {
    points: Vec<[f64; 3]>,
    values: Vec<f64>,
    evals: usize,
}

impl Simplex {
    fn order(&mut self) {
        let mut idx: Vec<usize> = (0..4).collect();
        idx.sort_by(|&i, &j| self.values[i].total_cmp(&self.values[j]));
        self.points = idx.iter().map(|&i| self.points[i]).collect();
        self.values = idx.iter().map(|&i| self.values[i]).collect();
    }

    fn diameter(&self) -> f64 {
        let best = self.points[0];
        self.points[1..]
            .iter()
            .map(|p| (0..3).map(|d| (p[d] - best[d]).powi(2)).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }
}

fn along(from: &[f64; 3], to: &[f64; 3], s: f64) -> [f64; 3] {
    [0, 1, 2].map(|d| from[d] + s * (to[d] - from[d]))
}

/// Nelder–Mead minimization of `f` from `start` with per-axis `steps`.
fn nelder_mead<F: Fn(&[f64; 3]) -> f64>(f: F, start: [f64; 3], steps: [f64; 3]) -> ([f64; 3], f64, bool, usize) {
    let mut s = Simplex {
        points: vec![start],
        values: vec![f(&start)],
        evals: 1,
    };
    for d in 0..3 {
        let mut p = start;
        p[d] += steps[d];
        s.values.push(f(&p));
        s.points.push(p);
        s.evals += 1;
    }
    let mut converged = false;
    loop {
        s.order();
        let spread = s.values[3] - s.values[0];
        if s.diameter() < FIT_DIAMETER_TOL || spread <= 1e-15 + 1e-12 * s.values[0] {
            converged = true;
            break;
        }
        if s.evals >= FIT_MAX_EVALS {
            break;
        }
        let centroid = [0, 1, 2].map(|d| (s.points[0][d] + s.points[1][d] + s.points[2][d]) / 3.0);
        let worst = s.points[3];
        let reflected = along(&centroid, &worst, -1.0);
        let fr = f(&reflected);
        s.evals += 1;
        if fr < s.values[0] {
            let expanded = along(&centroid, &worst, -2.0);
            let fe = f(&expanded);
            s.evals += 1;
            (s.points[3], s.values[3]) = if fe < fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr < s.values[2] {
            (s.points[3], s.values[3]) = (reflected, fr);
        } else {
            let (contracted, fc) = if fr < s.values[3] {
                let c = along(&centroid, &worst, -0.5);
                (c, f(&c))
            } else {
                let c = along(&centroid, &worst, 0.5);
                (c, f(&c))
            };
            s.evals += 1;
            if fc < s.values[3].min(fr) {
                (s.points[3], s.values[3]) = (contracted, fc);
            } else {
                let best = s.points[0];
                for i in 1..4 {
                    s.points[i] = along(&best, &s.points[i], 0.5);
                    s.values[i] = f(&s.points[i]);
                }
                s.evals += 3;
            }
        }
    }
    (s.points[0], s.values[0], converged, s.evals)
}

/// Least-squares logistic fit by simplex search. The growth rate is held
/// within `±MAX_GROWTH`.
pub fn fit_logistic(ts: &[f64], ys: &[f64]) -> Result<LogisticFit> {
    if ts.len() != ys.len() {
        return Err(Error::InvalidArgument("thresholds and values differ in length".into()));
    }
    if ts.len() < 4 {
        return Err(Error::InvalidArgument(format!("need at least 4 points, got {}", ts.len())));
    }
    if ys.iter().chain(ts).any(|v| !v.is_finite()) || ys.iter().any(|&y| y < 0.0) {
        return Err(Error::InvalidArgument("values must be finite and nonnegative".into()));
    }
    let n = ts.len() as f64;
    let top = ys.iter().copied().fold(0.0, f64::max);
    if ys.iter().all(|&y| y == ys[0]) {
        return Ok(LogisticFit {
            amplitude: ys[0],
            growth: 0.0,
            midpoint: ts.iter().sum::<f64>() / n,
            residual: 0.0,
            converged: true,
            evaluations: 0,
        });
    }

    // fit the series scaled to unit height
    let scaled: Vec<f64> = ys.iter().map(|y| y / top).collect();
    let rising = scaled[scaled.len() - 1] >= scaled[0];
    let half = 0.5;
    let t0 = ts
        .iter()
        .zip(&scaled)
        .find(|&(_, &y)| if rising { y >= half } else { y <= half })
        .map_or(ts[ts.len() / 2], |(&t, _)| t);
    let span = (ts[ts.len() - 1] - ts[0]).abs().max(1.0);
    let sse = |p: &[f64; 3]| -> f64 {
        let g = p[1].clamp(-MAX_GROWTH, MAX_GROWTH);
        ts.iter()
            .zip(&scaled)
            .map(|(&t, &y)| (logistic(p[0].abs(), g, p[2], t) - y).powi(2))
            .sum()
    };
    let g0 = if rising { 1.0 } else { -1.0 };
    let (best, value, converged, evaluations) = nelder_mead(sse, [1.0, g0, t0], [0.1, 0.5, 0.05 * span]);
    Ok(LogisticFit {
        amplitude: best[0].abs() * top,
        growth: best[1].clamp(-MAX_GROWTH, MAX_GROWTH),
        midpoint: best[2],
        residual: (value / n).sqrt() * top,
        converged,
        evaluations,
    })
}

/// Mean absolute growth rate of two fits, or 0 without a transition.
pub fn curvature(a: &LogisticFit, b: &LogisticFit, transition: bool) -> Result<f64> {
    if !transition {
        return Ok(0.0);
    }
    if !a.converged || !b.converged {
        return Err(Error::InvalidArgument("curvature needs two converged fits".into()));
    }
    Ok((a.growth.abs() + b.growth.abs()) / 2.0)
}

/// First threshold at which `group_b`'s mean degree exceeds `group_a`'s.
pub fn degree_changeover(result: &SweepResult, group_a: &str, group_b: &str) -> Result<Option<u32>> {
    let (grid, a) = sweep::group_series(result, group_a, "mean_degree")?;
    let (_, b) = sweep::group_series(result, group_b, "mean_degree")?;
    first_crossing(&grid, &a, &b, Some(&result.nonempty()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionReport {
    pub group_a: String,
    pub group_b: String,
    pub field: String,
    pub transition_threshold: Option<u32>,
    /// The first crossing is already the permanent one.
    pub persistent: bool,
    pub first_crossing: Option<u32>,
    /// `λ₂/λ₁` at the grid point before the transition.
    pub gap_at_transition: Option<f64>,
    /// `λ₂/λ₁` at the first grid point.
    pub gap_at_start: Option<f64>,
    pub degree_changeover_threshold: Option<u32>,
    pub curvature: f64,
    pub fit_a: Option<LogisticFit>,
    pub fit_b: Option<LogisticFit>,
}

fn gap(result: &SweepResult, index: usize) -> Option<f64> {
    result.records.get(index)?.normalized_eigenvalues.get(1).copied()
}

/// Fits a logistic to `field` of one group over the nonempty part of the grid.
pub fn fit_group(result: &SweepResult, group: &str, field: &str) -> Result<LogisticFit> {
    let (grid, values) = sweep::group_series(result, group, field)?;
    let active = result.nonempty();
    let (ts, ys): (Vec<f64>, Vec<f64>) = grid
        .iter()
        .zip(&values)
        .zip(&active)
        .filter(|(_, &on)| on)
        .map(|((&t, &y), _)| (t as f64, y))
        .unzip();
    fit_logistic(&ts, &ys)
}

/// Transition, fits, curvature and degree changeover for `b` overtaking `a`.
pub fn transition_report(result: &SweepResult, group_a: &str, group_b: &str, field: &str) -> Result<TransitionReport> {
    let (grid, a) = sweep::group_series(result, group_a, field)?;
    let (_, b) = sweep::group_series(result, group_b, field)?;
    let active = result.nonempty();
    let index = detect_transition_index(&a, &b, Some(&active))?;
    let first = first_crossing(&grid, &a, &b, Some(&active))?;
    let transition = index.map(|i| grid[i]);
    let (fit_a, fit_b, curv) = match index {
        Some(_) => {
            let fa = fit_group(result, group_a, field)?;
            let fb = fit_group(result, group_b, field)?;
            let c = curvature(&fa, &fb, true)?;
            (Some(fa), Some(fb), c)
        }
        None => (None, None, 0.0),
    };
    Ok(TransitionReport {
        group_a: group_a.to_string(),
        group_b: group_b.to_string(),
        field: field.to_string(),
        transition_threshold: transition,
        persistent: transition.is_some() && transition == first,
        first_crossing: first,
        gap_at_transition: index.filter(|&i| i > 0).and_then(|i| gap(result, i - 1)),
        gap_at_start: gap(result, 0),
        degree_changeover_threshold: degree_changeover(result, group_a, group_b)?,
        curvature: curv,
        fit_a,
        fit_b,
    })
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Independent per-job seed from a master seed and job indices.
pub fn derive_seed(master: u64, indices: &[u64]) -> u64 {
    indices.iter().fold(splitmix64(master), |h, &i| splitmix64(h ^ i))
}

/// Settings shared by both experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSettings {
    pub master_seed: u64,
    pub reps: usize,
    pub grid: Vec<u32>,
    pub sweep: SweepOptions,
}

impl Default for ExperimentSettings {
    fn default() -> Self {
        ExperimentSettings {
            master_seed: 0,
            reps: 1,
            grid: sweep::default_grid(),
            sweep: SweepOptions {
                k_eigs: 1,
                ..SweepOptions::default()
            },
        }
    }
}

/// Generates one model graph, sweeps it and reports leader → celebrity.
pub fn run_model(cfg: &SgcConfig, grid: &[u32], opts: &SweepOptions) -> Result<(SweepResult, TransitionReport)> {
    let model = sgc::generate_sgc_relaxed(cfg)?;
    let groups = [sgc::MASSES.to_string(), LEADER.to_string(), CELEBRITY.to_string()];
    let result = sweep::threshold_sweep(&model.graph, &model.meta, &groups, grid, opts)?;
    let report = transition_report(&result, LEADER, CELEBRITY, DEFAULT_FIELD)?;
    Ok((result, report))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaRep {
    pub alpha: f64,
    pub beta: f64,
    pub rep: usize,
    pub seed: u64,
    /// `None` when the run failed; see `diagnostics`.
    pub curvature: Option<f64>,
    pub transition_threshold: Option<u32>,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaCell {
    pub alpha: f64,
    pub beta: f64,
    /// Mean over the reps that produced a curvature.
    pub mean_curvature: Option<f64>,
    pub reps: Vec<BetaRep>,
}

fn validate_settings(s: &ExperimentSettings) -> Result<()> {
    if s.reps == 0 {
        return Err(Error::InvalidArgument("reps must be at least 1".into()));
    }
    sweep::validate_grid(&s.grid)
}

/// Curvature surface over Beta target distributions for leader edges.
pub fn beta_grid_experiment(
    base: &SgcConfig,
    alphas: &[f64],
    betas: &[f64],
    settings: &ExperimentSettings,
) -> Result<Vec<BetaCell>> {
    validate_settings(settings)?;
    if alphas.iter().chain(betas).any(|&v| !(v > 0.0)) {
        return Err(Error::InvalidArgument("Beta parameters must be positive".into()));
    }
    let jobs: Vec<(usize, usize, usize)> = (0..alphas.len())
        .flat_map(|i| (0..betas.len()).flat_map(move |j| (0..settings.reps).map(move |r| (i, j, r))))
        .collect();
    let reps: Vec<BetaRep> = jobs
        .par_iter()
        .map(|&(i, j, r)| {
            let (alpha, beta) = (alphas[i], betas[j]);
            let seed = derive_seed(settings.master_seed, &[i as u64, j as u64, r as u64]);
            let cfg = SgcConfig {
                leader_target: LeaderTarget::Beta { alpha, beta },
                seed,
                ..base.clone()
            };
            let mut rep = BetaRep {
                alpha,
                beta,
                rep: r,
                seed,
                curvature: None,
                transition_threshold: None,
                diagnostics: Vec::new(),
            };
            match run_model(&cfg, &settings.grid, &settings.sweep) {
                Ok((_, report)) => {
                    rep.curvature = Some(report.curvature);
                    rep.transition_threshold = report.transition_threshold;
                }
                Err(e) => rep.diagnostics.push(e.to_string()),
            }
            rep
        })
        .collect();
    Ok(reps
        .chunks(settings.reps)
        .map(|chunk| {
            let values: Vec<f64> = chunk.iter().filter_map(|r| r.curvature).collect();
            BetaCell {
                alpha: chunk[0].alpha,
                beta: chunk[0].beta,
                mean_curvature: (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64),
                reps: chunk.to_vec(),
            }
        })
        .collect())
}

/// Leader attachment probability giving an expected initial leader to
/// celebrity mean-degree ratio of `ratio`, clique edges included.
pub fn p_leader_for_ratio(cfg: &SgcConfig, ratio: f64) -> f64 {
    let (_, celeb) = cfg.expected_group_degrees();
    (ratio * celeb - (cfg.n_leaders - 1) as f64) / cfg.expected_below_k()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioRun {
    pub ratio: f64,
    pub rep: usize,
    pub seed: u64,
    pub p_leader: f64,
    pub changeover_threshold: Option<u32>,
    pub transition_threshold: Option<u32>,
    pub diagnostics: Vec<String>,
}

/// Degree changeover and transition thresholds across initial degree ratios.
pub fn degree_ratio_experiment(base: &SgcConfig, ratios: &[f64], settings: &ExperimentSettings) -> Result<Vec<RatioRun>> {
    validate_settings(settings)?;
    if ratios.iter().any(|&r| !(r > 1.0)) {
        return Err(Error::InvalidArgument("ratios must exceed 1".into()));
    }
    let jobs: Vec<(usize, usize)> = (0..ratios.len())
        .flat_map(|i| (0..settings.reps).map(move |r| (i, r)))
        .collect();
    Ok(jobs
        .par_iter()
        .map(|&(i, r)| {
            let ratio = ratios[i];
            let seed = derive_seed(settings.master_seed, &[i as u64, r as u64]);
            let p_leader = p_leader_for_ratio(base, ratio);
            let mut run = RatioRun {
                ratio,
                rep: r,
                seed,
                p_leader,
                changeover_threshold: None,
                transition_threshold: None,
                diagnostics: Vec::new(),
            };
            if !(p_leader > 0.0 && p_leader < 1.0) {
                run.diagnostics.push(format!("infeasible p_leader = {p_leader}; cell skipped"));
                return run;
            }
            let cfg = SgcConfig {
                p_leader,
                leader_target: LeaderTarget::UniformBelowK,
                seed,
                ..base.clone()
            };
            match run_model(&cfg, &settings.grid, &settings.sweep) {
                Ok((_, report)) => {
                    run.changeover_threshold = report.degree_changeover_threshold;
                    run.transition_threshold = report.transition_threshold;
                }
                Err(e) => run.diagnostics.push(e.to_string()),
            }
            run
        })
        .collect())
}

/// Average ranks, ties sharing the mean of their positions.
pub fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&i, &j| xs[i].total_cmp(&xs[j]));
    let mut out = vec![0.0; xs.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && xs[idx[end]] == xs[idx[start]] {
            end += 1;
        }
        let rank = (start + end - 1) as f64 / 2.0 + 1.0;
        for &i in &idx[start..end] {
            out[i] = rank;
        }
        start = end;
    }
    out
}

/// Spearman rank correlation.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidArgument("series lengths differ".into()));
    }
    crate::graph::pearson(&ranks(xs), &ranks(ys))
}
