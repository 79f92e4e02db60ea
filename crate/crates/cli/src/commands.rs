//! The four commands. Each one reads and computes everything first and
//! returns its output files as bytes; nothing touches the output
//! directory until the command has succeeded.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use popcent::analysis::{self, ExperimentSettings, DEFAULT_FIELD};
use popcent::centrality::Measure;
use popcent::graph::{self, Dataset, Graph, NodeTable};
use popcent::sgc::{self, SgcConfig, CELEBRITY, LEADER};
use popcent::sweep::{self, SweepOptions, SweepResult};
use serde::Serialize;

use crate::config::{AnalyzeMode, RunConfig};
use crate::error::{CliError, CliResult};
use crate::manifest::FileDigest;

pub const BETA_DEFAULTS: [f64; 4] = [0.5, 1.0, 2.0, 4.0];
pub const RATIO_DEFAULTS: [f64; 4] = [2.0, 5.0, 10.0, 20.0];
pub const BETA_DEFAULT_REPS: usize = 10;
pub const RATIO_DEFAULT_REPS: usize = 5;
const SWEEP_K_EIGS: usize = 3;
const BATCH_K_EIGS: usize = 1;
const DEFAULT_GRID: &str = "0..100:1";

/// Files produced by a command, plus digests of what it read.
#[derive(Debug, Default)]
pub struct Produced {
    pub inputs: Vec<FileDigest>,
    pub files: Vec<(String, Vec<u8>)>,
    /// Text for standard output.
    pub stdout: String,
}

fn require<T: Clone>(value: &Option<T>, key: &str) -> CliResult<T> {
    value
        .clone()
        .ok_or_else(|| CliError::Usage(format!("missing --{} (or `{key}` in the config file)", key.replace('_', "-"))))
}

fn read_input(path: &Path, inputs: &mut Vec<FileDigest>) -> CliResult<Vec<u8>> {
    let bytes = fs::read(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    inputs.push(FileDigest::of(path.display().to_string(), &bytes));
    Ok(bytes)
}

fn load_dataset(edges: &Path, meta: &Path, inputs: &mut Vec<FileDigest>) -> CliResult<Dataset> {
    let e = read_input(edges, inputs)?;
    let m = read_input(meta, inputs)?;
    let el = graph::load_edge_list(e.as_slice()).map_err(|err| CliError::data(edges.display(), err))?;
    let table = graph::load_node_meta(m.as_slice()).map_err(|err| CliError::data(meta.display(), err))?;
    Dataset::join(&el, &table).map_err(|err| CliError::data("joining edges with metadata", err))
}

fn internal(e: impl std::fmt::Display) -> CliError {
    CliError::Internal(e.to_string())
}

fn json_bytes<T: Serialize>(value: &T) -> CliResult<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(internal)?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn usage(e: popcent::Error) -> CliError {
    CliError::Usage(e.to_string())
}

fn classify(e: popcent::Error) -> CliError {
    match e {
        popcent::Error::InvalidArgument(_) => usage(e),
        e => CliError::data("experiment", e),
    }
}

/// Fills in grid, measures and k_eigs and builds the sweep options.
fn resolve_sweep(cfg: &mut RunConfig, k_default: usize) -> CliResult<(Vec<u32>, SweepOptions)> {
    let spec = cfg.grid.get_or_insert_with(|| DEFAULT_GRID.to_string()).clone();
    let grid = sweep::parse_grid(&spec).map_err(usage)?;
    let names = cfg.measures.get_or_insert_with(|| vec![Measure::Eigenvector.name().to_string()]);
    if names.is_empty() {
        return Err(CliError::Usage("at least one measure is required".into()));
    }
    let measures = names
        .iter()
        .map(|s| s.parse::<Measure>())
        .collect::<popcent::Result<Vec<_>>>()
        .map_err(usage)?;
    *names = measures.iter().map(|m| m.name().to_string()).collect();
    let k = *cfg.k_eigs.get_or_insert(k_default);
    if k == 0 {
        return Err(CliError::Usage("--k-eigs must be at least 1".into()));
    }
    let opts = SweepOptions {
        k_eigs: k,
        ..SweepOptions::default()
    }
    .with_measures(measures);
    Ok((grid, opts))
}

/// A statistic, or the reason it is undefined on this input.
#[derive(Debug, Serialize)]
pub struct Stat<T> {
    pub value: Option<T>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl<T> Stat<T> {
    fn from(r: popcent::Result<T>) -> CliResult<Self> {
        match r {
            Ok(v) => Ok(Stat {
                value: Some(v),
                reason: None,
            }),
            Err(popcent::Error::UndefinedStatistic(why)) => Ok(Stat::missing(why)),
            Err(e) => Err(CliError::data("statistics", e)),
        }
    }

    fn missing(why: impl Into<String>) -> Self {
        Stat {
            value: None,
            reason: Some(why.into()),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct DegreeSummary {
    pub min: usize,
    pub max: usize,
    pub mean: f64,
    pub median: f64,
}

#[derive(Debug, Serialize)]
pub struct StatsReport {
    pub nodes: usize,
    pub edges: usize,
    pub isolated_nodes: usize,
    pub components: usize,
    pub degree: DegreeSummary,
    pub degree_assortativity: Stat<f64>,
    pub popularity_homophily: Stat<f64>,
    pub degree_popularity_correlation: Stat<f64>,
    pub genre_overlap: Stat<graph::GenreOverlap>,
}

fn degree_summary(g: &Graph) -> DegreeSummary {
    let mut d = g.degrees();
    d.sort_unstable();
    let n = d.len();
    let median = if n == 0 {
        0.0
    } else if n % 2 == 1 {
        d[n / 2] as f64
    } else {
        (d[n / 2 - 1] + d[n / 2]) as f64 / 2.0
    };
    DegreeSummary {
        min: d.first().copied().unwrap_or(0),
        max: d.last().copied().unwrap_or(0),
        mean: if n == 0 { 0.0 } else { 2.0 * g.edge_count() as f64 / n as f64 },
        median,
    }
}

pub fn stats_report(g: &Graph, meta: Option<&NodeTable>) -> CliResult<StatsReport> {
    let no_meta = "no node metadata given";
    let (homophily, correlation, overlap) = match meta {
        Some(m) => (
            Stat::from(graph::attribute_assortativity(g, &m.popularity()))?,
            Stat::from(graph::degree_popularity_correlation(g, m))?,
            Stat::from(graph::genre_edge_overlap(g, m))?,
        ),
        None => (Stat::missing(no_meta), Stat::missing(no_meta), Stat::missing(no_meta)),
    };
    Ok(StatsReport {
        nodes: g.node_count(),
        edges: g.edge_count(),
        isolated_nodes: (0..g.node_count()).filter(|&i| g.degree(i) == 0).count(),
        components: g.components().1,
        degree: degree_summary(g),
        degree_assortativity: Stat::from(graph::degree_assortativity(g))?,
        popularity_homophily: homophily,
        degree_popularity_correlation: correlation,
        genre_overlap: overlap,
    })
}

fn text_stat<T>(out: &mut String, name: &str, s: &Stat<T>, show: impl Fn(&T) -> String) {
    let shown = match (&s.value, &s.reason) {
        (Some(v), _) => show(v),
        (None, Some(why)) => format!("undefined ({why})"),
        (None, None) => "undefined".into(),
    };
    out.push_str(&format!("{name}: {shown}\n"));
}

pub fn stats_text(r: &StatsReport) -> String {
    let mut s = format!(
        "nodes: {}\nedges: {}\nisolated nodes: {}\ncomponents: {}\ndegree: min {} max {} mean {:.4} median {}\n",
        r.nodes, r.edges, r.isolated_nodes, r.components, r.degree.min, r.degree.max, r.degree.mean, r.degree.median
    );
    text_stat(&mut s, "degree assortativity", &r.degree_assortativity, |v| format!("{v:.4}"));
    text_stat(&mut s, "popularity homophily", &r.popularity_homophily, |v| format!("{v:.4}"));
    text_stat(&mut s, "degree-popularity correlation", &r.degree_popularity_correlation, |v| {
        format!("{v:.4}")
    });
    text_stat(&mut s, "genre edge overlap", &r.genre_overlap, |o| {
        format!("{:.4} ({} of {} edges)", o.fraction, o.overlapping_edges, o.eligible_edges)
    });
    s
}

pub fn stats(cfg: &mut RunConfig) -> CliResult<Produced> {
    let edges = require(&cfg.edges, "edges")?;
    let mut p = Produced::default();
    let bytes = read_input(&edges, &mut p.inputs)?;
    let el = graph::load_edge_list(bytes.as_slice()).map_err(|e| CliError::data(edges.display(), e))?;
    let report = match &cfg.meta {
        Some(meta) => {
            let m = read_input(meta, &mut p.inputs)?;
            let table = graph::load_node_meta(m.as_slice()).map_err(|e| CliError::data(meta.display(), e))?;
            let ds = Dataset::join(&el, &table).map_err(|e| CliError::data("joining edges with metadata", e))?;
            stats_report(&ds.graph, Some(&ds.meta))?
        }
        None => stats_report(&el.graph, None)?,
    };
    let text = stats_text(&report);
    p.files.push(("stats.json".into(), json_bytes(&report)?));
    p.files.push(("stats.txt".into(), text.clone().into_bytes()));
    p.stdout = text;
    Ok(p)
}

pub fn generate(cfg: &mut RunConfig) -> CliResult<Produced> {
    require(&cfg.out, "out")?;
    let mut model_cfg = cfg.sgc.clone().unwrap_or_default();
    model_cfg.seed = *cfg.seed.get_or_insert(model_cfg.seed);
    cfg.sgc = Some(model_cfg.clone());
    let model = sgc::generate_sgc(&model_cfg).map_err(|e| CliError::data("model config", e))?;
    for w in &model.warnings {
        log::warn!("{w}");
    }
    let mut edges = Vec::new();
    graph::write_edge_list(&mut edges, &model.graph, &model.meta.ids()).map_err(internal)?;
    let mut meta = Vec::new();
    graph::write_node_meta(&mut meta, &model.meta).map_err(internal)?;
    Ok(Produced {
        inputs: Vec::new(),
        files: vec![("edges.tsv".into(), edges), ("meta.csv".into(), meta)],
        stdout: format!(
            "generated {} nodes and {} edges\n",
            model.graph.node_count(),
            model.graph.edge_count()
        ),
    })
}

pub fn sweep_cmd(cfg: &mut RunConfig) -> CliResult<Produced> {
    let edges = require(&cfg.edges, "edges")?;
    let meta = require(&cfg.meta, "meta")?;
    require(&cfg.out, "out")?;
    let (grid, opts) = resolve_sweep(cfg, SWEEP_K_EIGS)?;
    let band = match cfg.band.as_deref() {
        None => None,
        Some(&[lo, hi]) => Some((lo, hi)),
        Some(_) => return Err(CliError::Usage("--band takes exactly two values, LO,HI".into())),
    };
    let mut p = Produced::default();
    let ds = load_dataset(&edges, &meta, &mut p.inputs)?;
    let labels = ds.meta.group_labels();
    let groups = cfg.groups.get_or_insert_with(|| labels.iter().cloned().collect()).clone();
    if let Some(unknown) = groups.iter().find(|g| !labels.contains(*g)) {
        return Err(CliError::Data(format!("group {unknown:?} does not occur in {}", meta.display())));
    }
    let result = match band {
        Some(b) => sweep::removal_band_sweep(&ds.graph, &ds.meta, &groups, b, &grid, &opts),
        None => sweep::threshold_sweep(&ds.graph, &ds.meta, &groups, &grid, &opts),
    }
    .map_err(|e| CliError::data("sweep", e))?;
    let mut csv = Vec::new();
    sweep::write_sweep_csv(&mut csv, &result).map_err(internal)?;
    let mut json = Vec::new();
    sweep::write_sweep_json(&mut json, &result).map_err(internal)?;
    let empty = result.records.iter().filter(|r| r.empty).count();
    p.stdout = format!("swept {} thresholds ({empty} empty)\n", result.records.len());
    p.files.push(("sweep.csv".into(), csv));
    p.files.push(("sweep.json".into(), json));
    Ok(p)
}

/// Reads a sweep document, JSON or long-form CSV by content.
pub fn parse_sweep_file(bytes: &[u8]) -> popcent::Result<SweepResult> {
    let text = std::str::from_utf8(bytes).map_err(|_| popcent::Error::Parse {
        line: 0,
        message: "sweep file is not valid UTF-8".into(),
    })?;
    if text.trim_start().starts_with('{') {
        sweep::read_sweep_json(text)
    } else {
        sweep::read_sweep_csv(text.as_bytes())
    }
}

fn settings(cfg: &mut RunConfig, reps_default: usize) -> CliResult<ExperimentSettings> {
    let (grid, opts) = resolve_sweep(cfg, BATCH_K_EIGS)?;
    let reps = *cfg.reps.get_or_insert(reps_default);
    Ok(ExperimentSettings {
        master_seed: *cfg.seed.get_or_insert(0),
        reps,
        grid,
        sweep: opts,
    })
}

fn base_model(cfg: &mut RunConfig) -> SgcConfig {
    cfg.sgc.get_or_insert_with(SgcConfig::default).clone()
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_bytes(header: &[&str], rows: Vec<Vec<String>>) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(internal)?;
    for row in rows {
        w.write_record(&row).map_err(internal)?;
    }
    w.into_inner().map_err(internal)
}

#[derive(Debug, Serialize)]
struct BetaSummaryCell {
    alpha: f64,
    beta: f64,
    mean_curvature: Option<f64>,
    completed_reps: usize,
    transitions: usize,
}

#[derive(Debug, Serialize)]
struct RatioSummary {
    runs: usize,
    paired_runs: usize,
    spearman: Stat<f64>,
}

pub fn analyze(cfg: &mut RunConfig) -> CliResult<Produced> {
    let mode = require(&cfg.mode, "mode")?;
    require(&cfg.out, "out")?;
    let mut p = Produced::default();
    match mode {
        AnalyzeMode::Transition => {
            let path = require(&cfg.sweep, "sweep")?;
            let a = cfg.group_a.get_or_insert_with(|| LEADER.to_string()).clone();
            let b = cfg.group_b.get_or_insert_with(|| CELEBRITY.to_string()).clone();
            let field = cfg.field.get_or_insert_with(|| DEFAULT_FIELD.to_string()).clone();
            let bytes = read_input(&path, &mut p.inputs)?;
            let result = parse_sweep_file(&bytes).map_err(|e| CliError::data(path.display(), e))?;
            let report =
                analysis::transition_report(&result, &a, &b, &field).map_err(|e| CliError::data("transition", e))?;
            p.stdout = match report.transition_threshold {
                Some(t) => format!("transition at threshold {t}, curvature {}\n", report.curvature),
                None => "no transition\n".into(),
            };
            p.files.push(("transition.json".into(), json_bytes(&report)?));
        }
        AnalyzeMode::BetaGrid => {
            let alphas = cfg.alphas.get_or_insert_with(|| BETA_DEFAULTS.to_vec()).clone();
            let betas = cfg.betas.get_or_insert_with(|| BETA_DEFAULTS.to_vec()).clone();
            let s = settings(cfg, BETA_DEFAULT_REPS)?;
            let base = base_model(cfg);
            let cells = analysis::beta_grid_experiment(&base, &alphas, &betas, &s).map_err(classify)?;
            let rows = cells
                .iter()
                .flat_map(|c| &c.reps)
                .map(|r| {
                    vec![
                        r.alpha.to_string(),
                        r.beta.to_string(),
                        r.rep.to_string(),
                        opt(r.curvature),
                        r.seed.to_string(),
                        opt(r.transition_threshold),
                        r.diagnostics.join("; "),
                    ]
                })
                .collect();
            let header = ["alpha", "beta", "rep", "curvature", "seed", "transition_threshold", "diagnostics"];
            let summary: Vec<BetaSummaryCell> = cells
                .iter()
                .map(|c| BetaSummaryCell {
                    alpha: c.alpha,
                    beta: c.beta,
                    mean_curvature: c.mean_curvature,
                    completed_reps: c.reps.iter().filter(|r| r.curvature.is_some()).count(),
                    transitions: c.reps.iter().filter(|r| r.transition_threshold.is_some()).count(),
                })
                .collect();
            p.stdout = format!("{} cells, {} reps each\n", cells.len(), s.reps);
            p.files.push(("curvature.csv".into(), csv_bytes(&header, rows)?));
            p.files.push(("curvature_summary.json".into(), json_bytes(&summary)?));
        }
        AnalyzeMode::DegreeRatio => {
            let ratios = cfg.ratios.get_or_insert_with(|| RATIO_DEFAULTS.to_vec()).clone();
            let s = settings(cfg, RATIO_DEFAULT_REPS)?;
            let base = base_model(cfg);
            let runs = analysis::degree_ratio_experiment(&base, &ratios, &s).map_err(classify)?;
            let rows = runs
                .iter()
                .map(|r| {
                    vec![
                        r.ratio.to_string(),
                        r.rep.to_string(),
                        r.seed.to_string(),
                        r.p_leader.to_string(),
                        opt(r.changeover_threshold),
                        opt(r.transition_threshold),
                        r.diagnostics.join("; "),
                    ]
                })
                .collect();
            let header = [
                "ratio",
                "rep",
                "seed",
                "p_leader",
                "changeover_threshold",
                "transition_threshold",
                "diagnostics",
            ];
            let (xs, ys): (Vec<f64>, Vec<f64>) = runs
                .iter()
                .filter_map(|r| Some((r.changeover_threshold? as f64, r.transition_threshold? as f64)))
                .unzip();
            let spearman = if xs.len() < 2 {
                Stat::missing("fewer than two runs have both thresholds")
            } else {
                Stat::from(analysis::spearman(&xs, &ys))?
            };
            let summary = RatioSummary {
                runs: runs.len(),
                paired_runs: xs.len(),
                spearman,
            };
            p.stdout = format!("{} runs, {} with both thresholds\n", summary.runs, summary.paired_runs);
            p.files.push(("degree_ratio.csv".into(), csv_bytes(&header, rows)?));
            p.files.push(("degree_ratio_summary.json".into(), json_bytes(&summary)?));
        }
    }
    Ok(p)
}

/// Writes every file through a temporary name and a rename.
pub fn commit(dir: &Path, files: &[(String, Vec<u8>)]) -> CliResult<()> {
    let io = |path: &PathBuf, e: std::io::Error| CliError::Data(format!("{}: {e}", path.display()));
    fs::create_dir_all(dir).map_err(|e| io(&dir.to_path_buf(), e))?;
    for (name, bytes) in files {
        let target = dir.join(name);
        let tmp = dir.join(format!(".{name}.tmp"));
        let mut f = fs::File::create(&tmp).map_err(|e| io(&tmp, e))?;
        f.write_all(bytes).and_then(|_| f.sync_all()).map_err(|e| io(&tmp, e))?;
        fs::rename(&tmp, &target).map_err(|e| io(&target, e))?;
    }
    Ok(())
}
