//! Ordered simple graphs on `{1, …, n}`.
//!
//! Vertices are plain `usize` labels starting at 1; the natural integer order
//! is the vertex order used by every ordered pattern in the crate. Adjacency
//! is held as one bitset row per vertex so neighbourhood intersections during
//! clique enumeration are word-parallel.

use std::fmt;
use std::io::{BufRead, Write};

use thiserror::Error;

use crate::bitset::BitSet;
use crate::rng;

pub type Vertex = usize;

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("graph must have at least one vertex")]
    NoVertices,
    #[error("edge probability {0} outside [0, 1]")]
    InvalidProbability(f64),
    #[error("vertex {vertex} outside 1..={n}")]
    VertexOutOfRange { vertex: Vertex, n: usize },
    #[error("loop at vertex {0}")]
    Loop(Vertex),
    #[error("duplicate edge {0}")]
    DuplicateEdge(Edge),
    #[error("clique size {ell} must be at least {min}")]
    CliqueSizeTooSmall { ell: usize, min: usize },
    #[error("clique count overflows 128 bits")]
    CountOverflow,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for GraphError {
    fn from(e: std::io::Error) -> Self {
        GraphError::Io(e.to_string())
    }
}

/// An unordered vertex pair stored with `u < v`. Ordered lexicographically.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Edge {
    pub u: Vertex,
    pub v: Vertex,
}

impl Edge {
    /// Normalises the endpoint order. Panics on a loop.
    pub fn new(a: Vertex, b: Vertex) -> Self {
        assert_ne!(a, b, "loops are not edges");
        if a < b {
            Edge { u: a, v: b }
        } else {
            Edge { u: b, v: a }
        }
    }

    #[inline]
    pub fn low(&self) -> Vertex {
        self.u
    }

    #[inline]
    pub fn high(&self) -> Vertex {
        self.v
    }

    pub fn shares_vertex(&self, other: &Edge) -> bool {
        self.u == other.u || self.u == other.v || self.v == other.u || self.v == other.v
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{},{}}}", self.u, self.v)
    }
}

/// A subset of `{1, …, n}` iterated in increasing order.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct VertexSet {
    n: usize,
    bits: BitSet,
}

impl VertexSet {
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            bits: BitSet::new(n + 1),
        }
    }

    pub fn full(n: usize) -> Self {
        Self::from_range(n, 1..=n)
    }

    /// Builds a set over `{1, …, n}`; rejects members outside the range.
    pub fn new(n: usize, members: impl IntoIterator<Item = Vertex>) -> Result<Self, GraphError> {
        let mut set = Self::empty(n);
        for v in members {
            if v == 0 || v > n {
                return Err(GraphError::VertexOutOfRange { vertex: v, n });
            }
            set.bits.insert(v);
        }
        Ok(set)
    }

    pub fn from_range(n: usize, range: std::ops::RangeInclusive<Vertex>) -> Self {
        let mut set = Self::empty(n);
        for v in range.filter(|&v| v >= 1 && v <= n) {
            set.bits.insert(v);
        }
        set
    }

    /// The size of the ground set `{1, …, n}`.
    pub fn universe(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.bits.contains(v)
    }

    pub fn insert(&mut self, v: Vertex) {
        assert!(v >= 1 && v <= self.n, "vertex {v} outside 1..={}", self.n);
        self.bits.insert(v);
    }

    pub fn remove(&mut self, v: Vertex) {
        if v <= self.n {
            self.bits.remove(v);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.bits.iter()
    }

    pub fn to_vec(&self) -> Vec<Vertex> {
        self.iter().collect()
    }

    pub fn difference(&self, other: &VertexSet) -> VertexSet {
        let mut out = self.clone();
        for v in other.iter() {
            out.remove(v);
        }
        out
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.iter().all(|v| other.contains(v))
    }

    pub(crate) fn bits(&self) -> &BitSet {
        &self.bits
    }
}

/// An immutable simple graph on `{1, …, n}` with the natural vertex order.
#[derive(Clone, PartialEq, Eq)]
pub struct OrderedGraph {
    n: usize,
    /// `adj[v]` is the neighbourhood of `v`; row 0 is unused.
    adj: Vec<BitSet>,
    /// Lexicographically sorted edge list.
    edges: Vec<Edge>,
    /// Edges with minimum endpoint `u` live at `edges[row_start[u]..row_start[u + 1]]`.
    row_start: Vec<usize>,
}

impl fmt::Debug for OrderedGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OrderedGraph")
            .field("n", &self.n)
            .field("edges", &self.edges)
            .finish()
    }
}

impl OrderedGraph {
    pub fn empty(n: usize) -> Self {
        Self::from_rows(n, vec![BitSet::new(n + 1); n + 1])
    }

    pub fn complete(n: usize) -> Self {
        let mut adj = vec![BitSet::new(n + 1); n + 1];
        for (u, row) in adj.iter_mut().enumerate().skip(1) {
            for v in (1..=n).filter(|&v| v != u) {
                row.insert(v);
            }
        }
        Self::from_rows(n, adj)
    }

    /// Builds a graph from an edge list, rejecting loops, duplicates and
    /// out-of-range endpoints. Endpoint order within a pair is irrelevant.
    pub fn from_edges(
        n: usize,
        edges: impl IntoIterator<Item = (Vertex, Vertex)>,
    ) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::NoVertices);
        }
        let mut adj = vec![BitSet::new(n + 1); n + 1];
        for (a, b) in edges {
            for x in [a, b] {
                if x == 0 || x > n {
                    return Err(GraphError::VertexOutOfRange { vertex: x, n });
                }
            }
            if a == b {
                return Err(GraphError::Loop(a));
            }
            if adj[a].contains(b) {
                return Err(GraphError::DuplicateEdge(Edge::new(a, b)));
            }
            adj[a].insert(b);
            adj[b].insert(a);
        }
        Ok(Self::from_rows(n, adj))
    }

    pub(crate) fn from_rows(n: usize, adj: Vec<BitSet>) -> Self {
        let mut edges = Vec::new();
        let mut row_start = Vec::with_capacity(n + 2);
        row_start.push(0);
        for u in 0..=n {
            if u >= 1 {
                for v in adj[u].iter().filter(|&v| v > u) {
                    edges.push(Edge { u, v });
                }
            }
            row_start.push(edges.len());
        }
        Self {
            n,
            adj,
            edges,
            row_start,
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> {
        1..=self.n
    }

    pub fn vertex_set(&self) -> VertexSet {
        VertexSet::full(self.n)
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges in lexicographic order.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    #[inline]
    pub fn has_edge(&self, a: Vertex, b: Vertex) -> bool {
        a <= self.n && self.adj[a].contains(b)
    }

    /// Position of `{a, b}` in [`Self::edges`].
    pub fn edge_index(&self, a: Vertex, b: Vertex) -> Option<usize> {
        if a == b || a == 0 || b == 0 || a > self.n || b > self.n {
            return None;
        }
        let (u, v) = if a < b { (a, b) } else { (b, a) };
        let lo = self.row_start[u];
        let hi = self.row_start[u + 1];
        self.edges[lo..hi]
            .binary_search_by(|e| e.v.cmp(&v))
            .ok()
            .map(|k| lo + k)
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.adj[v].len()
    }

    pub fn neighbours(&self, v: Vertex) -> impl Iterator<Item = Vertex> + '_ {
        self.adj[v].iter()
    }

    pub(crate) fn row(&self, v: Vertex) -> &BitSet {
        &self.adj[v]
    }

    /// `true` iff every pair of `vertices` is adjacent.
    pub fn is_clique(&self, vertices: &[Vertex]) -> bool {
        vertices.iter().enumerate().all(|(i, &a)| {
            vertices[i + 1..].iter().all(|&b| self.has_edge(a, b))
        })
    }

    pub fn is_complete(&self) -> bool {
        self.edges.len() == self.n * (self.n - 1) / 2
    }

    /// Number of ordered pairs `(x, y) ∈ X × Y` with `xy` an edge; an edge
    /// inside `X ∩ Y` is therefore counted twice.
    pub fn edge_count_between(&self, x: &VertexSet, y: &VertexSet) -> usize {
        x.iter()
            .filter(|&v| v <= self.n)
            .map(|v| self.adj[v].intersection_len(y.bits()))
            .sum()
    }

    /// `|N(v) ∩ U|`.
    pub fn degree_into(&self, v: Vertex, u: &VertexSet) -> usize {
        self.adj[v].intersection_len(u.bits())
    }

    /// Streams the vertex sets of all `ell`-cliques, each as an increasing
    /// tuple, in lexicographic order. Restricted to `within` when given.
    pub fn cliques(&self, ell: usize, within: Option<&VertexSet>) -> Result<Cliques<'_>, GraphError> {
        if ell < 2 {
            return Err(GraphError::CliqueSizeTooSmall { ell, min: 2 });
        }
        let root = match within {
            Some(u) => {
                let mut b = BitSet::new(self.n + 1);
                for v in u.iter().filter(|&v| v <= self.n) {
                    b.insert(v);
                }
                b
            }
            None => self.vertex_set().bits,
        };
        Ok(Cliques::new(self, ell, root))
    }

    /// `κ_ℓ(G)`: the number of labelled copies of `K_ℓ`, i.e. `ℓ!` times the
    /// number of `ℓ`-cliques.
    pub fn count_cliques(&self, ell: usize) -> Result<u128, GraphError> {
        let sets = self.count_clique_sets(ell, None)?;
        let fact = (2..=ell as u128).try_fold(1u128, |acc, k| acc.checked_mul(k));
        fact.and_then(|f| sets.checked_mul(f))
            .ok_or(GraphError::CountOverflow)
    }

    /// Number of `ell`-vertex subsets (of `within`, if given) inducing `K_ℓ`.
    pub fn count_clique_sets(&self, ell: usize, within: Option<&VertexSet>) -> Result<u128, GraphError> {
        if ell < 2 {
            return Err(GraphError::CliqueSizeTooSmall { ell, min: 2 });
        }
        let root = match within {
            Some(u) => u.bits.clone(),
            None => self.vertex_set().bits,
        };
        Ok(count_in(self, &root, ell, u128::MAX))
    }

    /// The `ℓ`-clean subgraph: scan the edges in lexicographic order and drop
    /// the current edge whenever, in the current subgraph, it lies in two
    /// distinct `K_ℓ`'s (distinct vertex sets) sharing at least three vertices.
    ///
    /// The result never has two `K_ℓ`'s sharing three vertices. For `ℓ ≥ 4` it
    /// is also `K_{ℓ+1}`-free; for `ℓ = 3` no edge qualifies and the graph is
    /// returned unchanged.
    pub fn clean_subgraph(&self, ell: usize) -> Result<OrderedGraph, GraphError> {
        if ell < 3 {
            return Err(GraphError::CliqueSizeTooSmall { ell, min: 3 });
        }
        let mut adj = self.adj.clone();
        for e in &self.edges {
            if lies_in_overlapping_pair(&adj, e, ell) {
                adj[e.u].remove(e.v);
                adj[e.v].remove(e.u);
            }
        }
        Ok(Self::from_rows(self.n, adj))
    }

    /// Writes the text format: `n m`, then one sorted `u v` line per edge.
    pub fn write_to(&self, mut out: impl Write) -> Result<(), GraphError> {
        writeln!(out, "{} {}", self.n, self.edges.len())?;
        for e in &self.edges {
            writeln!(out, "{} {}", e.u, e.v)?;
        }
        Ok(())
    }

    /// Reads the text format written by [`Self::write_to`]. Edge lines may be
    /// unsorted; loops, duplicates and a wrong edge count are rejected.
    pub fn read_from(input: impl BufRead) -> Result<OrderedGraph, GraphError> {
        let mut lines = numbered_lines(input);
        let (line, header) = lines
            .next()
            .transpose()?
            .ok_or(GraphError::Parse { line: 1, msg: "missing header".into() })?;
        let [n, m] = parse_fields::<2>(&header, line)?;
        if n == 0 {
            return Err(GraphError::NoVertices);
        }
        let mut adj = vec![BitSet::new(n + 1); n + 1];
        let mut seen = 0;
        for item in lines {
            let (line, text) = item?;
            let [a, b] = parse_fields::<2>(&text, line)?;
            let err = |msg: String| GraphError::Parse { line, msg };
            if a == 0 || b == 0 || a > n || b > n {
                return Err(err(format!("vertex outside 1..={n}")));
            }
            if a == b {
                return Err(err(format!("loop at vertex {a}")));
            }
            if adj[a].contains(b) {
                return Err(err(format!("duplicate edge {}", Edge::new(a, b))));
            }
            adj[a].insert(b);
            adj[b].insert(a);
            seen += 1;
        }
        if seen != m {
            return Err(GraphError::Parse {
                line: 1,
                msg: format!("header declares {m} edges, found {seen}"),
            });
        }
        Ok(Self::from_rows(n, adj))
    }
}

/// Non-blank lines with their 1-based line numbers.
pub(crate) fn numbered_lines(
    input: impl BufRead,
) -> impl Iterator<Item = Result<(usize, String), GraphError>> {
    input
        .lines()
        .enumerate()
        .map(|(i, l)| l.map(|s| (i + 1, s)).map_err(GraphError::from))
        .filter(|r| !matches!(r, Ok((_, s)) if s.trim().is_empty()))
}

pub(crate) fn parse_fields<const K: usize>(text: &str, line: usize) -> Result<[usize; K], GraphError> {
    let parts: Vec<&str> = text.split_whitespace().collect();
    if parts.len() != K {
        return Err(GraphError::Parse {
            line,
            msg: format!("expected {K} fields, found {}", parts.len()),
        });
    }
    let mut out = [0usize; K];
    for (slot, p) in out.iter_mut().zip(parts) {
        *slot = p.parse().map_err(|_| GraphError::Parse {
            line,
            msg: format!("not a non-negative integer: {p:?}"),
        })?;
    }
    Ok(out)
}

/// Counts `size`-cliques inside `cand`, stopping once `cap` is reached.
fn count_in(g: &OrderedGraph, cand: &BitSet, size: usize, cap: u128) -> u128 {
    if size == 0 {
        return 1;
    }
    if size == 1 {
        return (cand.len() as u128).min(cap);
    }
    let mut total = 0u128;
    let mut rest = cand.clone();
    while let Some(v) = rest.first() {
        rest.remove(v);
        if rest.len() < size - 1 {
            break;
        }
        let next = rest.intersection(&g.adj[v]);
        if next.len() >= size - 1 {
            total = total.saturating_add(count_in(g, &next, size - 1, cap - total));
            if total >= cap {
                return cap;
            }
        }
    }
    total
}

fn count_in_rows(adj: &[BitSet], cand: &BitSet, size: usize, cap: usize) -> usize {
    if size == 0 {
        return 1;
    }
    if size == 1 {
        return cand.len().min(cap);
    }
    let mut total = 0;
    let mut rest = cand.clone();
    while let Some(v) = rest.first() {
        rest.remove(v);
        if rest.len() < size - 1 {
            break;
        }
        let next = rest.intersection(&adj[v]);
        total += count_in_rows(adj, &next, size - 1, cap - total);
        if total >= cap {
            return cap;
        }
    }
    total
}

/// Whether edge `e` lies in two distinct `K_ℓ`'s sharing a third vertex `w`,
/// i.e. whether some common neighbour `w` of `e` extends to at least two
/// `(ℓ−3)`-cliques inside `N(u) ∩ N(v) ∩ N(w)`.
fn lies_in_overlapping_pair(adj: &[BitSet], e: &Edge, ell: usize) -> bool {
    let common = adj[e.u].intersection(&adj[e.v]);
    if common.len() < ell - 2 {
        return false;
    }
    let hit = common.iter().any(|w| {
        let rest = common.intersection(&adj[w]);
        count_in_rows(adj, &rest, ell - 3, 2) >= 2
    });
    hit
}

struct Frame {
    cand: BitSet,
    cursor: Option<Vertex>,
}

/// Lexicographic stream of `ℓ`-cliques; see [`OrderedGraph::cliques`].
pub struct Cliques<'g> {
    graph: &'g OrderedGraph,
    ell: usize,
    stack: Vec<Frame>,
    current: Vec<Vertex>,
    nodes: u64,
}

impl<'g> Cliques<'g> {
    fn new(graph: &'g OrderedGraph, ell: usize, root: BitSet) -> Self {
        Self {
            graph,
            ell,
            stack: vec![Frame { cand: root, cursor: None }],
            current: Vec::with_capacity(ell),
            nodes: 0,
        }
    }

    /// Number of partial tuples extended so far.
    pub fn nodes_explored(&self) -> u64 {
        self.nodes
    }
}

impl Iterator for Cliques<'_> {
    type Item = Vec<Vertex>;

    fn next(&mut self) -> Option<Vec<Vertex>> {
        loop {
            let depth = self.stack.len().checked_sub(1)?;
            let top = self.stack.last_mut()?;
            let next = match top.cursor {
                None => top.cand.first(),
                Some(c) => top.cand.next_after(c),
            };
            let Some(v) = next else {
                self.stack.pop();
                self.current.pop();
                continue;
            };
            top.cursor = Some(v);
            self.nodes += 1;
            let remaining = self.ell - depth - 1;
            if remaining == 0 {
                let mut out = self.current.clone();
                out.push(v);
                return Some(out);
            }
            let mut cand = top.cand.intersection(&self.graph.adj[v]);
            cand.clear_up_to(v);
            if cand.len() < remaining {
                continue;
            }
            self.current.push(v);
            self.stack.push(Frame { cand, cursor: None });
        }
    }
}

/// A `G(n, p)` draw together with the parameters that reproduce it.
#[derive(Clone, Debug)]
pub struct GnpSample {
    pub graph: OrderedGraph,
    pub p: f64,
    pub seed: u64,
}

/// Samples `G(n, p)`: one Bernoulli(`p`) draw per pair, pairs visited in
/// lexicographic order, from the stream [`rng::stream`]`(seed)`.
pub fn gnp_generate(n: usize, p: f64, seed: u64) -> Result<GnpSample, GraphError> {
    if n == 0 {
        return Err(GraphError::NoVertices);
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(GraphError::InvalidProbability(p));
    }
    let mut rng = rng::stream(seed);
    let mut adj = vec![BitSet::new(n + 1); n + 1];
    for u in 1..=n {
        for v in u + 1..=n {
            if rng::bernoulli(&mut rng, p) {
                adj[u].insert(v);
                adj[v].insert(u);
            }
        }
    }
    Ok(GnpSample {
        graph: OrderedGraph::from_rows(n, adj),
        p,
        seed,
    })
}
