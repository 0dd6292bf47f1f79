use std::fmt::Write;
use std::path::Path;

use gdbound_core::graphdep::{
    bipartite_ranking_graph, chromatic_fractional_exact, format_cover, greedy_cover, parse_cover, parse_graph,
    validate_cover, DependencyGraph, EXACT_MAX_VERTICES,
};
use serde_json::json;

use super::{seed, to_value, Context, Leaf, Outcome, SEED};
use crate::config::{key, Settings};
use crate::error::CliError;
use crate::output::{sig6, write_file};

const GRAPH_KEYS: [crate::config::Key; 3] = [
    key("graph", "graph file: vertex count, then one `u v` edge per line"),
    key("bipartite", "NPOS,NNEG for the bipartite ranking graph"),
    key("cycle", "N for the cycle graph C_N"),
];

pub const CHI: Leaf = Leaf {
    path: &["graph", "chi"],
    about: "Fractional chromatic number: exact for small graphs, greedy upper bound otherwise",
    keys: &[
        GRAPH_KEYS[0],
        GRAPH_KEYS[1],
        GRAPH_KEYS[2],
        key("method", "auto | exact | greedy | construction (default auto)"),
        key("cover-out", "write the cover to this file"),
        SEED,
    ],
    run: run_chi,
};

pub const COVER_CHECK: Leaf = Leaf {
    path: &["graph", "cover-check"],
    about: "Validate a fractional cover against a graph",
    keys: &[
        GRAPH_KEYS[0],
        GRAPH_KEYS[1],
        GRAPH_KEYS[2],
        key("cover", "cover file: `weight: v1 v2 ...` per line"),
        SEED,
    ],
    run: run_cover_check,
};

fn read(path: &str) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Dataset(format!("{path}: {e}")))
}

fn pair(v: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::Usage(format!("expected NPOS,NNEG, got {v:?}"));
    let (a, b) = v.split_once(',').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

enum Source {
    File(DependencyGraph),
    Bipartite(usize, usize, DependencyGraph),
    Cycle(DependencyGraph),
}

fn graph(s: &mut Settings) -> Result<Source, CliError> {
    match (s.raw("graph"), s.raw("bipartite"), s.raw("cycle")) {
        (Some(p), None, None) => Ok(Source::File(parse_graph(&read(&p)?).map_err(CliError::dataset)?)),
        (None, Some(b), None) => {
            let (np, nn) = pair(&b)?;
            Ok(Source::Bipartite(np, nn, bipartite_ranking_graph(np, nn).map_err(CliError::usage)?.0))
        }
        (None, None, Some(n)) => {
            let n: usize = n.parse().map_err(|_| CliError::Usage(format!("invalid cycle length {n:?}")))?;
            Ok(Source::Cycle(DependencyGraph::cycle(n).map_err(CliError::usage)?))
        }
        _ => Err(CliError::Usage("give exactly one of graph, bipartite or cycle".into())),
    }
}

fn run_chi(s: &mut Settings, _: &Context) -> Result<Outcome, CliError> {
    let seed = seed(s)?;
    let src = graph(s)?;
    let method: String = s.parse("method", "auto")?;
    let g = match &src {
        Source::File(g) | Source::Bipartite(_, _, g) | Source::Cycle(g) => g,
    };
    let (value, cover, used) = match (method.as_str(), &src) {
        ("construction", Source::Bipartite(np, nn, _)) => {
            let (_, c) = bipartite_ranking_graph(*np, *nn).map_err(CliError::usage)?;
            (c.total_weight(), c, "construction")
        }
        ("construction", _) => return Err(CliError::Usage("the construction method needs bipartite".into())),
        ("exact", _) => {
            let (v, c) = chromatic_fractional_exact(g).map_err(CliError::usage)?;
            (v, c, "exact")
        }
        ("auto", _) if g.n_vertices() <= EXACT_MAX_VERTICES => {
            let (v, c) = chromatic_fractional_exact(g).map_err(CliError::usage)?;
            (v, c, "exact")
        }
        ("auto", Source::Bipartite(np, nn, _)) => {
            let (_, c) = bipartite_ranking_graph(*np, *nn).map_err(CliError::usage)?;
            (c.total_weight(), c, "construction")
        }
        ("auto" | "greedy", _) => {
            let c = greedy_cover(g);
            (c.total_weight(), c, "greedy_upper_bound")
        }
        (other, _) => return Err(CliError::Usage(format!("unknown method {other:?}"))),
    };
    if let Some(path) = s.raw("cover-out") {
        write_file(Path::new(&path), &format_cover(&cover))?;
    }
    let mut out = format!("chi_f = {} ({used}, {} vertices, {} edges)\n", sig6(value), g.n_vertices(), g.n_edges());
    let _ = writeln!(out, "cover classes: {}", cover.classes().len());
    let result =
        json!({ "chi_f": value, "method": used, "n_vertices": g.n_vertices(), "n_edges": g.n_edges(), "cover": cover });
    Ok(Outcome::new(out, Some(seed), result))
}

fn run_cover_check(s: &mut Settings, _: &Context) -> Result<Outcome, CliError> {
    let seed = seed(s)?;
    let src = graph(s)?;
    let g = match &src {
        Source::File(g) | Source::Bipartite(_, _, g) | Source::Cycle(g) => g,
    };
    let cover_path = s.require("cover")?;
    let cover = parse_cover(&read(&cover_path)?, g.n_vertices()).map_err(CliError::dataset)?;
    let report = validate_cover(g, &cover).map_err(CliError::usage)?;
    let mut text = format!("total weight = {}, valid = {}\n", sig6(report.total_weight), report.is_valid());
    for v in &report.violations {
        let _ = writeln!(text, "  {v:?}");
    }
    let mut out = Outcome::new(text, Some(seed), to_value(&report)?);
    if !report.is_valid() {
        out.failure = Some(format!("cover has {} violations", report.violations.len()));
    }
    Ok(out)
}
