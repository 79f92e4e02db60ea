//! Versioned on-disk forms of a [`SweepResult`].
//!
//! JSON is the complete form. The long CSV (`threshold,group,field,value`)
//! carries every numeric field but drops options, convergence flags and
//! diagnostics. Readers refuse documents whose major version differs from
//! [`SCHEMA_VERSION`].

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{GroupStats, SweepOptions, SweepResult, ThresholdRecord, GRAPH_SCOPE};
use crate::error::{Error, Result};

pub const JSON_SCHEMA: &str = "popcent.sweep";
pub const CSV_SCHEMA: &str = "popcent.sweep.long";
pub const SCHEMA_VERSION: &str = "1.0";

fn major(version: &str) -> Option<u32> {
    version.split('.').next()?.parse().ok()
}

fn check_version(found: &str) -> Result<()> {
    let expected = major(SCHEMA_VERSION).expect("valid constant");
    match major(found) {
        Some(m) if m == expected => Ok(()),
        _ => Err(Error::Schema {
            found: found.to_string(),
            expected,
        }),
    }
}

#[derive(Serialize)]
struct DocumentOut<'a> {
    schema: &'a str,
    version: &'a str,
    #[serde(flatten)]
    result: &'a SweepResult,
}

#[derive(Deserialize)]
struct Header {
    schema: String,
    version: String,
}

#[derive(Deserialize)]
struct DocumentIn {
    #[serde(flatten)]
    result: SweepResult,
}

pub fn write_sweep_json<W: Write>(w: W, result: &SweepResult) -> Result<()> {
    let doc = DocumentOut {
        schema: JSON_SCHEMA,
        version: SCHEMA_VERSION,
        result,
    };
    serde_json::to_writer_pretty(w, &doc)?;
    Ok(())
}

pub fn read_sweep_json(text: &str) -> Result<SweepResult> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let header: Header = serde_json::from_value(value.clone())?;
    if header.schema != JSON_SCHEMA {
        return Err(Error::Validation(format!("unexpected schema {:?}", header.schema)));
    }
    check_version(&header.version)?;
    let doc: DocumentIn = serde_json::from_value(value)?;
    if doc.result.records.len() != doc.result.grid.len() {
        return Err(Error::Validation("record count does not match grid".into()));
    }
    Ok(doc.result)
}

pub fn write_sweep_csv<W: Write>(mut w: W, result: &SweepResult) -> Result<()> {
    writeln!(w, "# schema={CSV_SCHEMA} version={SCHEMA_VERSION}")?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["threshold", "group", "field", "value"])?;
    for r in &result.records {
        let t = r.threshold.to_string();
        for (name, v) in r.scalars() {
            out.write_record([t.as_str(), GRAPH_SCOPE, &name, &v.to_string()])?;
        }
        for g in &r.groups {
            for (name, v) in &g.fields {
                out.write_record([t.as_str(), &g.group, name, &v.to_string()])?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

#[derive(Default)]
struct Partial {
    scalars: BTreeMap<String, f64>,
    lambdas: BTreeMap<usize, f64>,
    normalized: BTreeMap<usize, f64>,
    groups: Vec<GroupStats>,
}

fn dense(map: BTreeMap<usize, f64>, what: &str, t: u32) -> Result<Vec<f64>> {
    if map.keys().copied().ne(1..=map.len()) {
        return Err(Error::Validation(format!("{what} indices are not contiguous at t = {t}")));
    }
    Ok(map.into_values().collect())
}

pub fn read_sweep_csv<R: BufRead>(mut r: R) -> Result<SweepResult> {
    let mut first = String::new();
    r.read_line(&mut first)?;
    let parse_err = |line: usize, message: String| Error::Parse { line, message };
    let fields: BTreeMap<&str, &str> = first
        .trim()
        .strip_prefix('#')
        .ok_or_else(|| parse_err(1, "missing schema line".into()))?
        .split_whitespace()
        .filter_map(|kv| kv.split_once('='))
        .collect();
    match fields.get("schema") {
        Some(&s) if s == CSV_SCHEMA => {}
        other => return Err(parse_err(1, format!("unexpected schema {other:?}"))),
    }
    check_version(fields.get("version").copied().unwrap_or(""))?;

    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let header = reader.headers()?.clone();
    if header.iter().ne(["threshold", "group", "field", "value"]) {
        return Err(parse_err(2, "expected header threshold,group,field,value".into()));
    }

    let mut grid: Vec<u32> = Vec::new();
    let mut group_names: Vec<String> = Vec::new();
    let mut partials: Vec<Partial> = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let line = i + 3;
        let row = row?;
        if row.len() != 4 {
            return Err(parse_err(line, "expected 4 columns".into()));
        }
        let t: u32 = row[0].parse().map_err(|_| parse_err(line, format!("bad threshold {:?}", &row[0])))?;
        let value: f64 = row[3].parse().map_err(|_| parse_err(line, format!("bad value {:?}", &row[3])))?;
        if !value.is_finite() {
            return Err(parse_err(line, "non-finite value".into()));
        }
        if grid.last() != Some(&t) {
            if grid.contains(&t) {
                return Err(parse_err(line, format!("rows for threshold {t} are not contiguous")));
            }
            grid.push(t);
            partials.push(Partial::default());
        }
        let p = partials.last_mut().expect("pushed above");
        let (group, field) = (&row[1], &row[2]);
        if group == GRAPH_SCOPE {
            let index = |prefix: &str| field.strip_prefix(prefix).and_then(|s| s.parse::<usize>().ok());
            if let Some(k) = index("lambda_norm_") {
                p.normalized.insert(k, value);
            } else if let Some(k) = index("lambda_") {
                p.lambdas.insert(k, value);
            } else {
                p.scalars.insert(field.to_string(), value);
            }
        } else {
            if !group_names.iter().any(|g| g == group) {
                group_names.push(group.to_string());
            }
            match p.groups.iter_mut().find(|g| g.group == group) {
                Some(g) => {
                    g.fields.insert(field.to_string(), value);
                }
                None => p.groups.push(GroupStats {
                    group: group.to_string(),
                    fields: BTreeMap::from([(field.to_string(), value)]),
                }),
            }
        }
    }

    let mut records = Vec::with_capacity(grid.len());
    for (&t, p) in grid.iter().zip(partials) {
        let count = |name: &str| -> Result<usize> {
            let v = *p
                .scalars
                .get(name)
                .ok_or_else(|| Error::Validation(format!("missing {name} at t = {t}")))?;
            if v < 0.0 || v.fract() != 0.0 {
                return Err(Error::Validation(format!("{name} at t = {t} is not a count")));
            }
            Ok(v as usize)
        };
        records.push(ThresholdRecord {
            threshold: t,
            node_count: count("node_count")?,
            edge_count: count("edge_count")?,
            lcc_node_count: count("lcc_node_count")?,
            lcc_edge_count: count("lcc_edge_count")?,
            empty: count("empty")? != 0,
            eigenvalues: dense(p.lambdas, "lambda", t)?,
            normalized_eigenvalues: dense(p.normalized, "lambda_norm", t)?,
            spectrum_converged: Vec::new(),
            converged: BTreeMap::new(),
            groups: p.groups,
            diagnostics: Vec::new(),
        });
    }
    super::validate_grid(&grid)?;
    Ok(SweepResult {
        groups: group_names,
        grid,
        options: SweepOptions::default(),
        removed_band: None,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;
    use crate::graph::{NodeMeta, NodeTable};

    fn sample() -> SweepResult {
        let g = from(5, &[(0, 1), (1, 2), (2, 0), (2, 3), (3, 4)]);
        let meta = NodeTable::new(
            [10.0, 30.0, 50.0, 70.0, 90.0]
                .iter()
                .enumerate()
                .map(|(i, &p)| NodeMeta::new(i.to_string(), p).with_group(if i < 3 { "lo" } else { "hi" }))
                .collect(),
        );
        let groups = vec!["lo".to_string(), "hi".to_string()];
        super::super::threshold_sweep(&g, &meta, &groups, &[0, 40, 95], &SweepOptions::default()).unwrap()
    }

    #[test]
    fn json_round_trip_is_exact() {
        let res = sample();
        let mut buf = Vec::new();
        write_sweep_json(&mut buf, &res).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("\"version\": \"1.0\""));
        assert_eq!(read_sweep_json(&text).unwrap(), res);
    }

    #[test]
    fn csv_round_trip_keeps_numbers() {
        let res = sample();
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &res).unwrap();
        let back = read_sweep_csv(buf.as_slice()).unwrap();
        assert_eq!(back.grid, res.grid);
        assert_eq!(back.groups, res.groups);
        for (a, b) in back.records.iter().zip(&res.records) {
            assert_eq!(a.eigenvalues, b.eigenvalues);
            assert_eq!(a.normalized_eigenvalues, b.normalized_eigenvalues);
            assert_eq!(a.groups, b.groups);
            assert_eq!((a.node_count, a.empty), (b.node_count, b.empty));
        }
    }

    #[test]
    fn foreign_major_versions_are_rejected() {
        let res = sample();
        let mut buf = Vec::new();
        write_sweep_json(&mut buf, &res).unwrap();
        let text = String::from_utf8(buf).unwrap().replace("\"1.0\"", "\"2.0\"");
        assert!(matches!(read_sweep_json(&text), Err(Error::Schema { .. })));

        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &res).unwrap();
        let text = String::from_utf8(buf).unwrap().replacen("version=1.0", "version=7.3", 1);
        assert!(matches!(read_sweep_csv(text.as_bytes()), Err(Error::Schema { .. })));
        let minor = String::from_utf8({
            let mut b = Vec::new();
            write_sweep_csv(&mut b, &res).unwrap();
            b
        })
        .unwrap()
        .replacen("version=1.0", "version=1.4", 1);
        assert!(read_sweep_csv(minor.as_bytes()).is_ok());
    }

    #[test]
    fn malformed_csv_is_reported() {
        let head = format!("# schema={CSV_SCHEMA} version=1.0\nthreshold,group,field,value\n");
        for body in ["x,_graph,node_count,1\n", "0,_graph,node_count,abc\n", "0,_graph,lambda_2,1\n"] {
            assert!(read_sweep_csv(format!("{head}{body}").as_bytes()).is_err(), "{body}");
        }
        assert!(read_sweep_csv("threshold,group\n".as_bytes()).is_err());
    }
}
