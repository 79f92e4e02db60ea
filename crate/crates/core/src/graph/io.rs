use std::collections::HashMap;
use std::io::{BufRead, Write};

use super::{BuildSummary, Graph};
use crate::error::{Error, Result};

/// A graph loaded from text, with the external id of every node index.
#[derive(Debug, Clone)]
pub struct EdgeList {
    pub graph: Graph,
    pub ids: Vec<String>,
    pub summary: BuildSummary,
}

/// Reads `u<TAB>v` lines. Blank lines and lines starting with `#` are
/// skipped. Node indices follow first appearance.
pub fn load_edge_list<R: BufRead>(reader: R) -> Result<EdgeList> {
    let mut index: HashMap<String, u32> = HashMap::new();
    let mut ids = Vec::new();
    let mut edges = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| match e.kind() {
            std::io::ErrorKind::InvalidData => Error::Parse {
                line: lineno + 1,
                message: "not valid UTF-8".into(),
            },
            _ => Error::Io(e),
        })?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split('\t');
        let (u, v) = match (parts.next(), parts.next(), parts.next()) {
            (Some(u), Some(v), None) if !u.trim().is_empty() && !v.trim().is_empty() => (u.trim(), v.trim()),
            _ => {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: format!("expected two tab-separated ids, got {line:?}"),
                })
            }
        };
        let mut intern = |id: &str| -> u32 {
            if let Some(&i) = index.get(id) {
                return i;
            }
            let i = ids.len() as u32;
            ids.push(id.to_string());
            index.insert(id.to_string(), i);
            i
        };
        let a = intern(u);
        let b = intern(v);
        edges.push((a, b));
    }
    if edges.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let (graph, summary) = Graph::from_edges(ids.len(), edges);
    if summary.self_loops > 0 || summary.duplicates > 0 {
        log::info!(
            "edge list: dropped {} self-loops and {} duplicate edges",
            summary.self_loops,
            summary.duplicates
        );
    }
    Ok(EdgeList { graph, ids, summary })
}

pub fn parse_edge_list(text: &str) -> Result<EdgeList> {
    load_edge_list(text.as_bytes())
}

/// Writes each undirected edge once as `id_u<TAB>id_v`, `u < v` by index.
pub fn write_edge_list<W: Write>(mut w: W, g: &Graph, ids: &[String]) -> Result<()> {
    assert_eq!(ids.len(), g.node_count());
    for (u, v) in g.edges() {
        writeln!(w, "{}\t{}", ids[u], ids[v])?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dedup_and_loops() {
        let el = parse_edge_list("a\tb\nb\ta\na\ta\n").unwrap();
        assert_eq!(el.graph.node_count(), 2);
        assert_eq!(el.graph.edge_count(), 1);
        assert_eq!(el.ids, vec!["a", "b"]);
    }

    #[test]
    fn triangle_degrees() {
        let el = parse_edge_list("# comment\nx\ty\ny\tz\r\n\nz\tx\n").unwrap();
        assert_eq!(el.graph.degrees(), vec![2, 2, 2]);
    }

    #[test]
    fn malformed_line_reports_number() {
        match parse_edge_list("a\tb\nc d\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_edge_list("a\tb\tc\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_edge_list("a\t\n"), Err(Error::Parse { .. })));
    }

    #[test]
    fn empty_input() {
        assert!(matches!(parse_edge_list(""), Err(Error::EmptyGraph)));
        assert!(matches!(parse_edge_list("# only\n\n"), Err(Error::EmptyGraph)));
    }

    #[test]
    fn write_then_read() {
        let el = parse_edge_list("p\tq\nq\tr\nr\tp\nr\ts\n").unwrap();
        let mut buf = Vec::new();
        write_edge_list(&mut buf, &el.graph, &el.ids).unwrap();
        let again = load_edge_list(&buf[..]).unwrap();
        assert_eq!(again.graph, el.graph);
        assert_eq!(again.ids, el.ids);
    }
}
