//! Command-line flags. Every flag mirrors a key of [`RunConfig`] and wins
//! over the config file.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{AnalyzeMode, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "popcent", version, about = "Popularity-thresholded centrality analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Summary statistics of a graph and its node metadata.
    Stats(StatsArgs),
    /// Write a synthetic graph from the social group centrality model.
    Generate(GenerateArgs),
    /// Sweep popularity thresholds and record group centralities and spectra.
    Sweep(SweepArgs),
    /// Transition report from a sweep file, or a batch model experiment.
    Analyze(AnalyzeArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Stats(_) => "stats",
            Command::Generate(_) => "generate",
            Command::Sweep(_) => "sweep",
            Command::Analyze(_) => "analyze",
        }
    }

    pub fn common(&self) -> &CommonArgs {
        match self {
            Command::Stats(a) => &a.common,
            Command::Generate(a) => &a.common,
            Command::Sweep(a) => &a.common,
            Command::Analyze(a) => &a.common,
        }
    }

    /// The flags given on the command line as a partial config.
    pub fn overlay(&self) -> RunConfig {
        let mut c = self.common().overlay();
        match self {
            Command::Stats(a) => a.input.apply(&mut c),
            Command::Generate(_) => {}
            Command::Sweep(a) => {
                a.input.apply(&mut c);
                a.sweep.apply(&mut c);
                c.band = a.band.clone();
                c.groups = a.groups.clone();
            }
            Command::Analyze(a) => {
                a.sweep.apply(&mut c);
                c.mode = a.mode;
                c.sweep = a.sweep_file.clone();
                c.group_a = a.group_a.clone();
                c.group_b = a.group_b.clone();
                c.field = a.field.clone();
                c.alphas = a.alphas.clone();
                c.betas = a.betas.clone();
                c.ratios = a.ratios.clone();
                c.reps = a.reps;
            }
        }
        c
    }
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// TOML or JSON config file; a manifest from an earlier run also works.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads; outputs do not depend on it.
    #[arg(long, value_name = "N")]
    pub threads: Option<usize>,
}

impl CommonArgs {
    fn overlay(&self) -> RunConfig {
        RunConfig {
            seed: self.seed,
            out: self.out.clone(),
            threads: self.threads,
            ..RunConfig::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Tab-separated edge list.
    #[arg(long, value_name = "PATH")]
    pub edges: Option<PathBuf>,
    /// Node metadata CSV.
    #[arg(long, value_name = "PATH")]
    pub meta: Option<PathBuf>,
}

impl InputArgs {
    fn apply(&self, c: &mut RunConfig) {
        c.edges = self.edges.clone();
        c.meta = self.meta.clone();
    }
}

#[derive(Debug, Args)]
pub struct SweepFlags {
    /// Threshold grid such as "0..100:1", "0..100" or "10,20,30".
    #[arg(long, value_name = "SPEC")]
    pub grid: Option<String>,
    /// Comma-separated centrality measures.
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    pub measures: Option<Vec<String>>,
    /// Number of leading adjacency eigenvalues per threshold.
    #[arg(long, value_name = "N")]
    pub k_eigs: Option<usize>,
}

impl SweepFlags {
    fn apply(&self, c: &mut RunConfig) {
        c.grid = self.grid.clone();
        c.measures = self.measures.clone();
        c.k_eigs = self.k_eigs;
    }
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub input: InputArgs,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub sweep: SweepFlags,
    /// Remove nodes with popularity in [LO, HI] before sweeping.
    #[arg(long, value_name = "LO,HI", value_delimiter = ',')]
    pub band: Option<Vec<f64>>,
    /// Groups to aggregate; defaults to every label in the metadata.
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    pub groups: Option<Vec<String>>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub sweep: SweepFlags,
    #[arg(long, value_enum)]
    pub mode: Option<AnalyzeMode>,
    /// Sweep file (JSON or long-form CSV) for transition mode.
    #[arg(long = "sweep", value_name = "PATH")]
    pub sweep_file: Option<PathBuf>,
    /// Group that starts on top.
    #[arg(long, value_name = "NAME")]
    pub group_a: Option<String>,
    /// Group that takes over.
    #[arg(long, value_name = "NAME")]
    pub group_b: Option<String>,
    /// Per-group field compared between the two groups.
    #[arg(long, value_name = "NAME")]
    pub field: Option<String>,
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    pub alphas: Option<Vec<f64>>,
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    pub betas: Option<Vec<f64>>,
    /// Initial leader to celebrity mean-degree ratios.
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    pub ratios: Option<Vec<f64>>,
    #[arg(long, value_name = "N")]
    pub reps: Option<usize>,
}
