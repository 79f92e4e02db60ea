//! Run configuration. A config file (TOML, or JSON when the text starts
//! with `{`) is merged with command-line flags, flags winning, and then
//! completed with per-command defaults. The completed value is what the
//! manifest records.

use std::path::PathBuf;

use clap::ValueEnum;
use popcent::sgc::SgcConfig;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::manifest::MANIFEST_SCHEMA;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum AnalyzeMode {
    Transition,
    BetaGrid,
    DegreeRatio,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edges: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub meta: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Scheduling hint only, so it is left out of manifests.
    #[serde(skip_serializing)]
    pub threads: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measures: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_eigs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub groups: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub band: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<AnalyzeMode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub group_a: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub group_b: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub betas: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratios: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sgc: Option<SgcConfig>,
}

macro_rules! overlay_fields {
    ($base:ident, $top:ident; $($f:ident),*) => {
        $( if $top.$f.is_some() { $base.$f = $top.$f; } )*
    };
}

impl RunConfig {
    /// Values set in `top` replace those in `self`.
    pub fn overlay(mut self, top: RunConfig) -> RunConfig {
        overlay_fields!(self, top; edges, meta, out, seed, threads, grid, measures, k_eigs, groups, band,
            mode, sweep, group_a, group_b, field, alphas, betas, ratios, reps, sgc);
        self
    }
}

/// Parses a config file. A run manifest is accepted too, in which case
/// its recorded config is used.
pub fn parse_config(text: &str) -> CliResult<RunConfig> {
    let bad = |e: &dyn std::fmt::Display| CliError::Usage(format!("config: {e}"));
    if text.trim_start().starts_with('{') {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| bad(&e))?;
        let value = match value.get("schema").and_then(|s| s.as_str()) {
            Some(MANIFEST_SCHEMA) => value.get("config").cloned().unwrap_or_default(),
            _ => value,
        };
        serde_json::from_value(value).map_err(|e| bad(&e))
    } else {
        toml::from_str(text).map_err(|e| bad(&e))
    }
}
