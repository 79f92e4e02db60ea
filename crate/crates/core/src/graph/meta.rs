use std::collections::{BTreeSet, HashMap};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{EdgeList, Graph, IndexMap};
use crate::error::{Error, Result};

pub const META_HEADER: [&str; 5] = ["id", "name", "popularity", "genres", "group"];
pub const GENRE_DELIMITER: char = '|';

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeMeta {
    pub external_id: String,
    pub name: String,
    pub popularity: f64,
    pub genres: BTreeSet<String>,
    pub group: Option<String>,
}

impl NodeMeta {
    pub fn new(id: impl Into<String>, popularity: f64) -> Self {
        let external_id = id.into();
        NodeMeta {
            name: external_id.clone(),
            external_id,
            popularity,
            genres: BTreeSet::new(),
            group: None,
        }
    }

    pub fn with_group(mut self, group: impl Into<String>) -> Self {
        self.group = Some(group.into());
        self
    }

    pub fn with_genres<I, S>(mut self, genres: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.genres = genres.into_iter().map(Into::into).collect();
        self
    }
}

/// Metadata rows in file order, keyed by external id.
#[derive(Debug, Clone, Default)]
pub struct MetaTable {
    rows: Vec<NodeMeta>,
    index: HashMap<String, usize>,
}

impl MetaTable {
    pub fn rows(&self) -> &[NodeMeta] {
        &self.rows
    }

    pub fn get(&self, id: &str) -> Option<&NodeMeta> {
        self.index.get(id).map(|&i| &self.rows[i])
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

fn parse_popularity(raw: &str, line: usize) -> Result<f64> {
    let p: f64 = raw.trim().parse().map_err(|_| Error::Parse {
        line,
        message: format!("popularity {raw:?} is not a number"),
    })?;
    if !(0.0..=100.0).contains(&p) {
        return Err(Error::Validation(format!(
            "line {line}: popularity {raw} outside [0, 100]"
        )));
    }
    Ok(p)
}

/// Reads a metadata CSV with header `id,name,popularity,genres,group`.
pub fn load_node_meta<R: Read>(reader: R) -> Result<MetaTable> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header = rdr.headers()?.clone();
    let mut cols = [0usize; 5];
    for (slot, name) in cols.iter_mut().zip(META_HEADER) {
        *slot = header
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Parse {
                line: 1,
                message: format!("header lacks column {name:?}"),
            })?;
    }
    let mut table = MetaTable::default();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let field = |i: usize| record.get(cols[i]).unwrap_or("");
        let id = field(0).trim();
        if id.is_empty() {
            return Err(Error::Parse {
                line,
                message: "empty id".into(),
            });
        }
        let popularity = parse_popularity(field(2), line)?;
        let genres = field(3)
            .split(GENRE_DELIMITER)
            .map(str::trim)
            .filter(|g| !g.is_empty())
            .map(String::from)
            .collect();
        let group = Some(field(4).trim()).filter(|g| !g.is_empty()).map(String::from);
        if table.index.contains_key(id) {
            return Err(Error::Validation(format!("line {line}: duplicate id {id:?}")));
        }
        table.index.insert(id.to_string(), table.rows.len());
        table.rows.push(NodeMeta {
            external_id: id.to_string(),
            name: field(1).to_string(),
            popularity,
            genres,
            group,
        });
    }
    Ok(table)
}

pub fn parse_node_meta(text: &str) -> Result<MetaTable> {
    load_node_meta(text.as_bytes())
}

/// Writes rows in index order; popularity is printed with six decimals.
pub fn write_node_meta<W: Write>(w: W, table: &NodeTable) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(META_HEADER)?;
    for m in table.iter() {
        let genres = m.genres.iter().map(String::as_str).collect::<Vec<_>>().join("|");
        wtr.write_record([
            m.external_id.as_str(),
            m.name.as_str(),
            &format!("{:.6}", m.popularity),
            &genres,
            m.group.as_deref().unwrap_or(""),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Metadata aligned with a graph's node indices: row `i` describes node `i`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct NodeTable(Vec<NodeMeta>);

impl NodeTable {
    pub fn new(rows: Vec<NodeMeta>) -> Self {
        NodeTable(rows)
    }

    /// Anonymous rows with the given popularities; handy for fixtures.
    pub fn from_popularity(pops: &[f64]) -> Self {
        NodeTable(pops.iter().enumerate().map(|(i, &p)| NodeMeta::new(i.to_string(), p)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, NodeMeta> {
        self.0.iter()
    }

    pub fn rows(&self) -> &[NodeMeta] {
        &self.0
    }

    pub fn get(&self, i: usize) -> &NodeMeta {
        &self.0[i]
    }

    pub fn push(&mut self, row: NodeMeta) {
        self.0.push(row);
    }

    pub fn popularity(&self) -> Vec<f64> {
        self.0.iter().map(|m| m.popularity).collect()
    }

    pub fn ids(&self) -> Vec<String> {
        self.0.iter().map(|m| m.external_id.clone()).collect()
    }

    pub fn members(&self, group: &str) -> Vec<usize> {
        (0..self.0.len())
            .filter(|&i| self.0[i].group.as_deref() == Some(group))
            .collect()
    }

    pub fn group_labels(&self) -> BTreeSet<String> {
        self.0.iter().filter_map(|m| m.group.clone()).collect()
    }

    pub fn restrict(&self, map: &IndexMap) -> NodeTable {
        NodeTable(map.restrict(&self.0))
    }

    pub fn validate(&self) -> Result<()> {
        for m in &self.0 {
            if !(0.0..=100.0).contains(&m.popularity) {
                return Err(Error::Validation(format!(
                    "node {:?}: popularity {} outside [0, 100]",
                    m.external_id, m.popularity
                )));
            }
        }
        Ok(())
    }
}

/// A graph with one metadata row per node.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub graph: Graph,
    pub meta: NodeTable,
}

impl Dataset {
    pub fn new(graph: Graph, meta: NodeTable) -> Result<Self> {
        if graph.node_count() != meta.len() {
            return Err(Error::Validation(format!(
                "{} nodes but {} metadata rows",
                graph.node_count(),
                meta.len()
            )));
        }
        meta.validate()?;
        Ok(Dataset { graph, meta })
    }

    /// Joins an edge list with its metadata. Node indices follow metadata
    /// row order; rows absent from the edge list become isolated nodes.
    pub fn join(edges: &EdgeList, meta: &MetaTable) -> Result<Self> {
        let mut relabel = Vec::with_capacity(edges.ids.len());
        for id in &edges.ids {
            match meta.index.get(id) {
                Some(&row) => relabel.push(row as u32),
                None => return Err(Error::Validation(format!("no metadata row for node {id:?}"))),
            }
        }
        let g = &edges.graph;
        let (graph, _) = Graph::from_edges(
            meta.len(),
            g.edges().map(|(u, v)| (relabel[u], relabel[v])),
        );
        Ok(Dataset {
            graph,
            meta: NodeTable(meta.rows.clone()),
        })
    }

    pub fn restrict(&self, sub: Graph, map: &IndexMap) -> Dataset {
        Dataset {
            graph: sub,
            meta: self.meta.restrict(map),
        }
    }
}
