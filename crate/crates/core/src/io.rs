//! graph6 and plain edge-list encodings.
//!
//! graph6 output is header-free. The upper triangle of the adjacency
//! matrix is read column by column (`x(0,1), x(0,2), x(1,2), x(0,3), ..`),
//! packed big-endian into 6-bit groups, each offset by 63.

use crate::graph::{CubicGraph, GraphError, Vertex};

const HEADER: &str = ">>graph6<<";

fn encode_size(n: usize, out: &mut Vec<u8>) {
    if n <= 62 {
        out.push(n as u8 + 63);
    } else if n <= 258_047 {
        out.push(126);
        for shift in [12, 6, 0] {
            out.push(((n >> shift) & 0x3f) as u8 + 63);
        }
    } else {
        out.extend([126, 126]);
        for shift in [30, 24, 18, 12, 6, 0] {
            out.push(((n >> shift) & 0x3f) as u8 + 63);
        }
    }
}

fn decode_size(bytes: &[u8]) -> Result<(usize, &[u8]), GraphError> {
    let sextet = |b: u8| -> Result<usize, GraphError> {
        if (63..=126).contains(&b) {
            Ok((b - 63) as usize)
        } else {
            Err(GraphError::MalformedGraph6(format!("byte {b} out of range")))
        }
    };
    let fold = |chunk: &[u8]| -> Result<usize, GraphError> {
        chunk.iter().try_fold(0usize, |acc, &b| Ok((acc << 6) | sextet(b)?))
    };
    match bytes {
        [] => Err(GraphError::MalformedGraph6("empty input".into())),
        [126, 126, rest @ ..] if rest.len() >= 6 => Ok((fold(&rest[..6])?, &rest[6..])),
        [126, rest @ ..] if rest.len() >= 3 => Ok((fold(&rest[..3])?, &rest[3..])),
        [126, ..] => Err(GraphError::MalformedGraph6("truncated size field".into())),
        [b, rest @ ..] => Ok((sextet(*b)?, rest)),
    }
}

pub fn to_graph6(g: &CubicGraph) -> String {
    let n = g.n();
    let mut out = Vec::with_capacity(4 + n * (n - 1) / 12 + 1);
    encode_size(n, &mut out);
    let mut acc = 0u8;
    let mut filled = 0;
    for j in 1..n as Vertex {
        for i in 0..j {
            acc = (acc << 1) | g.has_edge(i, j) as u8;
            filled += 1;
            if filled == 6 {
                out.push(acc + 63);
                acc = 0;
                filled = 0;
            }
        }
    }
    if filled > 0 {
        out.push((acc << (6 - filled)) + 63);
    }
    String::from_utf8(out).expect("graph6 is printable ascii")
}

pub fn from_graph6(text: &str) -> Result<CubicGraph, GraphError> {
    let text = text.trim_end_matches(['\n', '\r']);
    let text = text.strip_prefix(HEADER).unwrap_or(text);
    let (n, body) = decode_size(text.as_bytes())?;
    let bits = n * n.saturating_sub(1) / 2;
    let expected = bits.div_ceil(6);
    if body.len() != expected {
        return Err(GraphError::MalformedGraph6(format!(
            "expected {expected} data bytes for n = {n}, found {}",
            body.len()
        )));
    }
    let mut edges = Vec::with_capacity(3 * n / 2);
    let mut k = 0;
    for j in 1..n as Vertex {
        for i in 0..j {
            let byte = body[k / 6];
            if !(63..=126).contains(&byte) {
                return Err(GraphError::MalformedGraph6(format!("byte {byte} out of range")));
            }
            if (byte - 63) >> (5 - k % 6) & 1 == 1 {
                edges.push((i, j));
            }
            k += 1;
        }
    }
    if bits % 6 != 0 {
        let last = body[body.len() - 1] - 63;
        if last & ((1 << (6 - bits % 6)) - 1) != 0 {
            return Err(GraphError::MalformedGraph6("non-zero padding bits".into()));
        }
    }
    CubicGraph::from_edges(n, &edges)
}

/// One `u v` pair per line, 0-indexed, `u < v`.
pub fn to_edge_list(g: &CubicGraph) -> String {
    let mut s = String::new();
    for (u, v) in g.edges() {
        s.push_str(&format!("{u} {v}\n"));
    }
    s
}

/// Parses `u v` lines; blank lines and `#` comments are skipped.
/// The vertex count is one more than the largest id seen.
pub fn from_edge_list(text: &str) -> Result<CubicGraph, GraphError> {
    let mut edges = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace().map(str::parse::<Vertex>);
        match (it.next(), it.next(), it.next()) {
            (Some(Ok(u)), Some(Ok(v)), None) => edges.push((u, v)),
            _ => {
                return Err(GraphError::MalformedEdgeList(format!(
                    "line {}: {line:?}",
                    lineno + 1
                )))
            }
        }
    }
    let n = edges.iter().map(|&(u, v)| u.max(v) as usize + 1).max().unwrap_or(0);
    CubicGraph::from_edges(n, &edges)
}
