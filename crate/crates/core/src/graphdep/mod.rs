//! Dependency graphs and fractional independent vertex covers.
//!
//! A fractional cover is a family of independent sets with weights in
//! `(0, 1]` such that the weights of the sets containing any vertex sum to
//! exactly one. The fractional chromatic number is the smallest achievable
//! total weight.

pub mod lp;
mod text;

pub use text::{format_cover, format_graph, parse_cover, parse_graph};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on per-vertex cover sums.
pub const COVER_TOL: f64 = 1e-12;

/// Largest graph accepted by [`chromatic_fractional_exact`].
pub const EXACT_MAX_VERTICES: usize = 12;

/// Simple undirected graph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DependencyGraph {
    n_vertices: usize,
    adjacency: Vec<Vec<usize>>,
    label: String,
}

impl DependencyGraph {
    pub fn new(n_vertices: usize, edges: &[(usize, usize)], label: impl Into<String>) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); n_vertices];
        for &(u, v) in edges {
            if u >= n_vertices || v >= n_vertices {
                return Err(Error::Structural(format!("edge ({u}, {v}) references a vertex outside 0..{n_vertices}")));
            }
            if u == v {
                return Err(Error::Invariant(format!("self-loop on vertex {u}")));
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }
        Ok(Self { n_vertices, adjacency, label: label.into() })
    }

    pub fn empty(n_vertices: usize) -> Self {
        Self { n_vertices, adjacency: vec![Vec::new(); n_vertices], label: String::new() }
    }

    pub fn complete(n_vertices: usize) -> Self {
        let adjacency = (0..n_vertices).map(|u| (0..n_vertices).filter(|&v| v != u).collect()).collect();
        Self { n_vertices, adjacency, label: String::new() }
    }

    pub fn cycle(n_vertices: usize) -> Result<Self> {
        if n_vertices < 3 {
            return Err(Error::Domain("a cycle needs at least 3 vertices".into()));
        }
        let edges: Vec<_> = (0..n_vertices).map(|i| (i, (i + 1) % n_vertices)).collect();
        Self::new(n_vertices, &edges, format!("C{n_vertices}"))
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n_vertices && self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (u, list) in self.adjacency.iter().enumerate() {
            out.extend(list.iter().filter(|&&v| v > u).map(|&v| (u, v)));
        }
        out
    }

    pub fn n_edges(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Returns a copy with one more edge.
    pub fn with_edge(&self, u: usize, v: usize) -> Result<Self> {
        let mut edges = self.edges();
        edges.push((u, v));
        Self::new(self.n_vertices, &edges, self.label.clone())
    }

    pub fn is_independent(&self, set: &[usize]) -> bool {
        set.iter().enumerate().all(|(i, &u)| set[i + 1..].iter().all(|&v| !self.has_edge(u, v)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverClass {
    pub vertices: Vec<usize>,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractionalCover {
    n_vertices: usize,
    classes: Vec<CoverClass>,
}

impl FractionalCover {
    pub fn new(n_vertices: usize, classes: Vec<CoverClass>) -> Self {
        Self { n_vertices, classes }
    }

    /// Integer cover from a vertex colouring: one unit-weight class per colour.
    pub fn from_coloring(colors: &[usize]) -> Self {
        let n_colors = colors.iter().max().map_or(0, |&c| c + 1);
        let mut classes = vec![CoverClass { vertices: Vec::new(), weight: 1.0 }; n_colors];
        for (v, &c) in colors.iter().enumerate() {
            classes[c].vertices.push(v);
        }
        Self { n_vertices: colors.len(), classes }
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn classes(&self) -> &[CoverClass] {
        &self.classes
    }

    pub fn total_weight(&self) -> f64 {
        self.classes.iter().map(|c| c.weight).sum()
    }

    /// Σ of class weights containing each vertex.
    pub fn vertex_weights(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.n_vertices];
        for class in &self.classes {
            for &v in &class.vertices {
                if v < self.n_vertices {
                    sums[v] += class.weight;
                }
            }
        }
        sums
    }

    pub fn all_unit_weights(&self) -> bool {
        self.classes.iter().all(|c| c.weight == 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CoverViolation {
    VertexOutOfRange { class: usize, vertex: usize },
    NotIndependent { class: usize, u: usize, v: usize },
    WeightOutOfRange { class: usize, weight: f64 },
    VertexWeight { vertex: usize, sum: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverReport {
    pub total_weight: f64,
    pub violations: Vec<CoverViolation>,
}

impl CoverReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every condition of a fractional independent vertex cover.
pub fn validate_cover(graph: &DependencyGraph, cover: &FractionalCover) -> Result<CoverReport> {
    if graph.n_vertices() != cover.n_vertices() {
        return Err(Error::Structural(format!(
            "cover is for {} vertices but graph has {}",
            cover.n_vertices(),
            graph.n_vertices()
        )));
    }
    let mut violations = Vec::new();
    for (ci, class) in cover.classes().iter().enumerate() {
        if !(class.weight > 0.0 && class.weight <= 1.0) {
            violations.push(CoverViolation::WeightOutOfRange { class: ci, weight: class.weight });
        }
        for &v in &class.vertices {
            if v >= graph.n_vertices() {
                violations.push(CoverViolation::VertexOutOfRange { class: ci, vertex: v });
            }
        }
        let vs = &class.vertices;
        'outer: for (i, &u) in vs.iter().enumerate() {
            for &v in &vs[i + 1..] {
                if u == v || graph.has_edge(u, v) {
                    violations.push(CoverViolation::NotIndependent { class: ci, u, v });
                    break 'outer;
                }
            }
        }
    }
    for (vertex, sum) in cover.vertex_weights().into_iter().enumerate() {
        if (sum - 1.0).abs() > COVER_TOL {
            violations.push(CoverViolation::VertexWeight { vertex, sum });
        }
    }
    Ok(CoverReport { total_weight: cover.total_weight(), violations })
}

/// Vertex id of the pair `(p, q)` in the bipartite-ranking graph.
pub fn pair_vertex(p: usize, q: usize, n_neg: usize) -> usize {
    p * n_neg + q
}

/// Equitable unit-weight cover of the bipartite-ranking graph with
/// `max(n_pos, n_neg)` classes. When `n_pos ≥ n_neg`, class `c` holds the
/// pairs with `p ≡ q + c (mod n_pos)`; otherwise the roles swap.
pub fn bipartite_ranking_cover(n_pos: usize, n_neg: usize) -> Result<FractionalCover> {
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::Domain("bipartite ranking needs n_pos ≥ 1 and n_neg ≥ 1".into()));
    }
    let classes = if n_pos >= n_neg {
        (0..n_pos)
            .map(|c| CoverClass {
                vertices: (0..n_neg).map(|q| pair_vertex((q + c) % n_pos, q, n_neg)).collect(),
                weight: 1.0,
            })
            .collect()
    } else {
        (0..n_neg)
            .map(|c| CoverClass {
                vertices: (0..n_pos).map(|p| pair_vertex(p, (p + c) % n_neg, n_neg)).collect(),
                weight: 1.0,
            })
            .collect()
    };
    Ok(FractionalCover::new(n_pos * n_neg, classes))
}

/// Dependency graph of all (positive, negative) pairs: two pairs are
/// adjacent when they share a positive or a negative example.
pub fn bipartite_ranking_graph(n_pos: usize, n_neg: usize) -> Result<(DependencyGraph, FractionalCover)> {
    let cover = bipartite_ranking_cover(n_pos, n_neg)?;
    let n = n_pos * n_neg;
    let mut adjacency = vec![Vec::new(); n];
    for p in 0..n_pos {
        for q in 0..n_neg {
            let list = &mut adjacency[pair_vertex(p, q, n_neg)];
            list.extend((0..n_neg).filter(|&q2| q2 != q).map(|q2| pair_vertex(p, q2, n_neg)));
            list.extend((0..n_pos).filter(|&p2| p2 != p).map(|p2| pair_vertex(p2, q, n_neg)));
            list.sort_unstable();
        }
    }
    let graph = DependencyGraph { n_vertices: n, adjacency, label: format!("bipartite({n_pos},{n_neg})") };
    Ok((graph, cover))
}

/// All maximal independent sets, each sorted, in lexicographic order of
/// their bitmask.
pub fn maximal_independent_sets(graph: &DependencyGraph) -> Result<Vec<Vec<usize>>> {
    let n = graph.n_vertices();
    if n > EXACT_MAX_VERTICES {
        return Err(Error::Size(format!("{n} vertices exceeds exact limit {EXACT_MAX_VERTICES}")));
    }
    let nbr: Vec<u32> = (0..n).map(|v| graph.neighbors(v).iter().fold(0u32, |m, &u| m | (1 << u))).collect();
    let mut out = Vec::new();
    for mask in 0u32..(1u32 << n) {
        let independent = (0..n).all(|v| mask & (1 << v) == 0 || nbr[v] & mask == 0);
        if !independent {
            continue;
        }
        let maximal = (0..n).all(|v| mask & (1 << v) != 0 || nbr[v] & mask != 0);
        if maximal {
            out.push((0..n).filter(|&v| mask & (1 << v) != 0).collect());
        }
    }
    Ok(out)
}

/// Exact fractional chromatic number by the covering LP over maximal
/// independent sets (solved through its packing dual). The returned cover
/// has per-vertex sums of exactly one: over-covered vertices are removed
/// from (or split off) classes, which keeps every class independent and
/// leaves the total weight unchanged.
pub fn chromatic_fractional_exact(graph: &DependencyGraph) -> Result<(f64, FractionalCover)> {
    let n = graph.n_vertices();
    if n > EXACT_MAX_VERTICES {
        return Err(Error::Size(format!(
            "exact mode supports at most {EXACT_MAX_VERTICES} vertices (got {n}); use greedy_cover"
        )));
    }
    if n == 0 {
        return Ok((0.0, FractionalCover::new(0, Vec::new())));
    }
    let sets = maximal_independent_sets(graph)?;
    // Packing LP: max Σ y_v  s.t.  Σ_{v∈I} y_v ≤ 1 for each maximal I.
    let a: Vec<Vec<f64>> = sets
        .iter()
        .map(|s| {
            let mut row = vec![0.0; n];
            for &v in s {
                row[v] = 1.0;
            }
            row
        })
        .collect();
    let sol = lp::maximize(&a, &vec![1.0; sets.len()], &vec![1.0; n])?;

    let mut classes: Vec<CoverClass> = sets
        .into_iter()
        .zip(sol.dual)
        .filter(|(_, w)| *w > 1e-13)
        .map(|(vertices, weight)| CoverClass { vertices, weight: weight.min(1.0) })
        .collect();

    for v in 0..n {
        let mut excess: f64 = classes.iter().filter(|c| c.vertices.contains(&v)).map(|c| c.weight).sum::<f64>() - 1.0;
        let mut i = 0;
        while excess > COVER_TOL / 4.0 && i < classes.len() {
            if let Some(pos) = classes[i].vertices.iter().position(|&u| u == v) {
                if classes[i].weight <= excess + COVER_TOL / 4.0 {
                    excess -= classes[i].weight;
                    classes[i].vertices.remove(pos);
                } else {
                    let mut split = classes[i].clone();
                    split.vertices.remove(pos);
                    split.weight = excess;
                    classes[i].weight -= excess;
                    excess = 0.0;
                    classes.push(split);
                }
            }
            i += 1;
        }
    }
    classes.retain(|c| !c.vertices.is_empty());
    let cover = FractionalCover::new(n, classes);
    Ok((sol.value, cover))
}

/// Greedy proper colouring in largest-degree-first order (ties by vertex
/// id), returned as an integer cover.
pub fn greedy_cover(graph: &DependencyGraph) -> FractionalCover {
    let mut order: Vec<usize> = (0..graph.n_vertices()).collect();
    order.sort_by(|&a, &b| graph.degree(b).cmp(&graph.degree(a)).then(a.cmp(&b)));
    greedy_cover_with_order(graph, &order).expect("order is a permutation")
}

/// Greedy colouring visiting vertices in the given order.
pub fn greedy_cover_with_order(graph: &DependencyGraph, order: &[usize]) -> Result<FractionalCover> {
    let n = graph.n_vertices();
    let mut seen = vec![false; n];
    if order.len() != n || order.iter().any(|&v| v >= n || std::mem::replace(&mut seen[v], true)) {
        return Err(Error::Structural("order must be a permutation of the vertices".into()));
    }
    let mut colors = vec![usize::MAX; n];
    let mut used = Vec::new();
    for &v in order {
        used.clear();
        used.resize(graph.degree(v) + 1, false);
        for &u in graph.neighbors(v) {
            let c = colors[u];
            if c < used.len() {
                used[c] = true;
            }
        }
        colors[v] = used.iter().position(|&b| !b).unwrap_or(used.len());
    }
    Ok(FractionalCover::from_coloring(&colors))
}
