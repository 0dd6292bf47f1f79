//! Plain-text graph and cover formats.
//!
//! Graph: first non-comment line is the vertex count, then one `u v` edge
//! per line. Cover: one class per line, `weight: v1 v2 ...`. Blank lines and
//! lines starting with `#` are ignored in both.

use std::fmt::Write;

use super::{CoverClass, DependencyGraph, FractionalCover};
use crate::error::{Error, Result};

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_usize(tok: &str, line: usize) -> Result<usize> {
    tok.parse().map_err(|_| Error::Parse { line, message: format!("expected a vertex id, got {tok:?}") })
}

pub fn parse_graph(text: &str) -> Result<DependencyGraph> {
    let mut lines = content_lines(text);
    let (line, first) = lines.next().ok_or(Error::Parse { line: 1, message: "missing vertex count".into() })?;
    let n = first
        .parse::<usize>()
        .map_err(|_| Error::Parse { line, message: format!("expected vertex count, got {first:?}") })?;
    let mut edges = Vec::new();
    for (line, l) in lines {
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.len() != 2 {
            return Err(Error::Parse { line, message: "edge lines must be `u v`".into() });
        }
        let (u, v) = (parse_usize(toks[0], line)?, parse_usize(toks[1], line)?);
        if u >= n || v >= n {
            return Err(Error::Parse { line, message: format!("edge ({u}, {v}) outside 0..{n}") });
        }
        if u == v {
            return Err(Error::Parse { line, message: format!("self-loop on {u}") });
        }
        edges.push((u, v));
    }
    DependencyGraph::new(n, &edges, "")
}

pub fn format_graph(graph: &DependencyGraph) -> String {
    let mut out = format!("{}\n", graph.n_vertices());
    for (u, v) in graph.edges() {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}

/// Parses a cover for a graph on `n_vertices` vertices.
pub fn parse_cover(text: &str, n_vertices: usize) -> Result<FractionalCover> {
    let mut classes = Vec::new();
    for (line, l) in content_lines(text) {
        let (w, rest) = l
            .split_once(':')
            .ok_or(Error::Parse { line, message: "cover lines must be `weight: v1 v2 ...`".into() })?;
        let weight: f64 = w.trim().parse().map_err(|_| Error::Parse { line, message: format!("bad weight {w:?}") })?;
        let vertices = rest.split_whitespace().map(|t| parse_usize(t, line)).collect::<Result<Vec<_>>>()?;
        classes.push(CoverClass { vertices, weight });
    }
    Ok(FractionalCover::new(n_vertices, classes))
}

pub fn format_cover(cover: &FractionalCover) -> String {
    let mut out = String::new();
    for class in cover.classes() {
        let _ = write!(out, "{}:", class.weight);
        for v in &class.vertices {
            let _ = write!(out, " {v}");
        }
        out.push('\n');
    }
    out
}
