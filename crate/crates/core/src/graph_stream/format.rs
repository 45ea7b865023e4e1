//! Plain-text edge formats.
//!
//! Edge list: first line `n`, then one `u v` line per edge.
//! Turnstile: first line `n`, then one `+ u v` or `- u v` line per update.
//! Tokens are separated by ASCII whitespace; blank lines are ignored.

use std::fmt::Write as _;

use super::{DirectedGraph, EdgeStream, GraphError, Sign, StreamKind, Update, Vertex};

fn parse_err(line: usize, message: impl Into<String>) -> GraphError {
    GraphError::Parse {
        line,
        message: message.into(),
    }
}

/// Non-blank lines with their 1-based line numbers.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn parse_header<'a>(it: &mut impl Iterator<Item = (usize, &'a str)>) -> Result<usize, GraphError> {
    let (line, text) = it.next().ok_or_else(|| parse_err(1, "missing vertex count"))?;
    text.parse::<usize>()
        .map_err(|_| parse_err(line, format!("expected vertex count, found {text:?}")))
}

fn parse_vertex(line: usize, token: Option<&str>, n: usize) -> Result<Vertex, GraphError> {
    let token = token.ok_or_else(|| parse_err(line, "expected two vertex ids"))?;
    let v = token
        .parse::<Vertex>()
        .map_err(|_| parse_err(line, format!("bad vertex id {token:?}")))?;
    if v >= n {
        return Err(parse_err(line, format!("vertex {v} out of range 0..{n}")));
    }
    Ok(v)
}

fn parse_edges(text: &str) -> Result<(usize, Vec<(Vertex, Vertex)>), GraphError> {
    let mut it = lines(text);
    let n = parse_header(&mut it)?;
    let mut edges = Vec::new();
    for (line, l) in it {
        let mut tok = l.split_ascii_whitespace();
        let u = parse_vertex(line, tok.next(), n)?;
        let v = parse_vertex(line, tok.next(), n)?;
        if tok.next().is_some() {
            return Err(parse_err(line, "trailing tokens"));
        }
        edges.push((u, v));
    }
    Ok((n, edges))
}

pub fn read_edge_list(text: &str) -> Result<DirectedGraph, GraphError> {
    let (n, edges) = parse_edges(text)?;
    DirectedGraph::new(n, edges)
}

/// Reads an edge list as an insertion-only stream in file order.
pub fn read_edge_list_stream(text: &str) -> Result<EdgeStream, GraphError> {
    let (n, edges) = parse_edges(text)?;
    EdgeStream::insertion_only(n, edges)
}

pub fn read_turnstile(text: &str) -> Result<EdgeStream, GraphError> {
    let mut it = lines(text);
    let n = parse_header(&mut it)?;
    let mut updates = Vec::new();
    for (line, l) in it {
        let mut tok = l.split_ascii_whitespace();
        let sign = match tok.next() {
            Some("+") => Sign::Insert,
            Some("-") => Sign::Delete,
            other => return Err(parse_err(line, format!("expected '+' or '-', found {other:?}"))),
        };
        let u = parse_vertex(line, tok.next(), n)?;
        let v = parse_vertex(line, tok.next(), n)?;
        if tok.next().is_some() {
            return Err(parse_err(line, "trailing tokens"));
        }
        updates.push(Update { edge: (u, v), sign });
    }
    EdgeStream::turnstile(n, updates)
}

/// Reads either format, choosing turnstile when the first update line is signed.
pub fn read_stream(text: &str) -> Result<EdgeStream, GraphError> {
    let signed = lines(text)
        .nth(1)
        .is_some_and(|(_, l)| l.starts_with('+') || l.starts_with('-'));
    if signed {
        read_turnstile(text)
    } else {
        read_edge_list_stream(text)
    }
}

pub fn write_edge_list(g: &DirectedGraph) -> String {
    let mut out = format!("{}\n", g.n());
    for &(u, v) in g.edges() {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}

pub fn write_turnstile(s: &EdgeStream) -> String {
    use super::ReplaySource;
    let mut out = format!("{}\n", s.n());
    for up in s.updates() {
        let sign = match up.sign {
            Sign::Insert => '+',
            Sign::Delete => '-',
        };
        let _ = writeln!(out, "{sign} {} {}", up.edge.0, up.edge.1);
    }
    out
}

/// Serializes a stream in its own format, preserving update order.
pub fn write_stream(s: &EdgeStream) -> String {
    use super::ReplaySource;
    match s.kind() {
        StreamKind::InsertionOnly => {
            let mut out = format!("{}\n", s.n());
            for up in s.updates() {
                let _ = writeln!(out, "{} {}", up.edge.0, up.edge.1);
            }
            out
        }
        StreamKind::Turnstile => write_turnstile(s),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph_stream::ReplaySource;

    #[test]
    fn parses_edge_list() {
        let g = read_edge_list("3\n0 1\n1 2").unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
        assert_eq!(read_edge_list("3\n0 1\n1 2\n").unwrap(), g);
    }

    #[test]
    fn edge_list_errors() {
        assert!(matches!(read_edge_list("2\n0 5"), Err(GraphError::Parse { line: 2, .. })));
        assert_eq!(read_edge_list("2\n0 1\n0 1"), Err(GraphError::DuplicateEdge(0, 1)));
        assert!(matches!(read_edge_list(""), Err(GraphError::Parse { .. })));
        assert!(matches!(read_edge_list("x\n"), Err(GraphError::Parse { line: 1, .. })));
        assert!(matches!(read_edge_list("2\n0"), Err(GraphError::Parse { .. })));
        assert!(matches!(read_edge_list("2\n0 1 1"), Err(GraphError::Parse { .. })));
    }

    #[test]
    fn parses_turnstile() {
        let s = read_turnstile("2\n+ 0 1\n- 0 1\n+ 0 1").unwrap();
        assert_eq!(s.kind(), StreamKind::Turnstile);
        assert_eq!(s.materialize().edges(), &[(0, 1)]);
        assert!(matches!(
            read_turnstile("2\n- 0 1"),
            Err(GraphError::InvalidTurnstile { net: -1, .. })
        ));
        assert!(matches!(
            read_turnstile("2\n+ 0 1\n+ 0 1"),
            Err(GraphError::InvalidTurnstile { net: 2, .. })
        ));
        assert!(matches!(read_turnstile("2\n* 0 1"), Err(GraphError::Parse { .. })));
    }

    #[test]
    fn round_trips_are_lossless() {
        let text = "4\n3 0\n0 1\n2 2\n";
        assert_eq!(write_stream(&read_edge_list_stream(text).unwrap()), text);
        assert_eq!(write_edge_list(&read_edge_list(text).unwrap()), text);
        let t = "3\n+ 0 1\n+ 1 2\n- 0 1\n";
        assert_eq!(write_stream(&read_turnstile(t).unwrap()), t);
    }

    #[test]
    fn read_stream_detects_format() {
        assert_eq!(read_stream("2\n0 1\n").unwrap().kind(), StreamKind::InsertionOnly);
        assert_eq!(read_stream("2\n+ 0 1\n").unwrap().kind(), StreamKind::Turnstile);
        assert_eq!(read_stream("2\n").unwrap().len(), 0);
    }
}
