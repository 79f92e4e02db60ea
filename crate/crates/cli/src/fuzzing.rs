//! Parser entry points driven by the fuzz targets and by the corpus replay
//! test. Each one must return without panicking on any input; the
//! assertions check what a successful parse promises.

use popcent::graph;
use popcent::sgc::SgcConfig;
use popcent::sweep;

use crate::config;

pub fn edge_list(data: &[u8]) {
    if let Ok(el) = graph::load_edge_list(data) {
        assert!(el.graph.check_invariants().is_ok());
        assert_eq!(el.ids.len(), el.graph.node_count());
        assert!(el.graph.edge_count() > 0);
    }
}

pub fn node_meta(data: &[u8]) {
    if let Ok(t) = graph::load_node_meta(data) {
        assert!(t.rows().iter().all(|m| (0.0..=100.0).contains(&m.popularity)));
        assert!(t.rows().iter().all(|m| t.get(&m.external_id).is_some()));
    }
}

pub fn sweep_json(data: &[u8]) {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(r) = sweep::read_sweep_json(s) {
            assert_eq!(r.records.len(), r.grid.len());
        }
    }
}

pub fn sweep_csv(data: &[u8]) {
    if let Ok(r) = sweep::read_sweep_csv(data) {
        assert_eq!(r.records.len(), r.grid.len());
    }
}

pub fn grid_spec(data: &[u8]) {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(grid) = sweep::parse_grid(s) {
            assert!(sweep::validate_grid(&grid).is_ok());
        }
    }
}

pub fn run_config(data: &[u8]) {
    if let Ok(s) = std::str::from_utf8(data) {
        let _ = config::parse_config(s);
    }
}

pub fn sgc_config(data: &[u8]) {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(cfg) = SgcConfig::from_toml_str(s) {
            let _ = cfg.validate();
        }
    }
}

/// Target name → entry point, matching the directories under `fuzz/corpus`.
pub const TARGETS: [(&str, fn(&[u8])); 7] = [
    ("edge_list", edge_list),
    ("node_meta", node_meta),
    ("sweep_json", sweep_json),
    ("sweep_csv", sweep_csv),
    ("grid_spec", grid_spec),
    ("run_config", run_config),
    ("sgc_config", sgc_config),
];
