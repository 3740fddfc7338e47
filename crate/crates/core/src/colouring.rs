//! Edge colourings of ordered graphs, colour-degree statistics and the
//! canonical pattern classifier.
//!
//! A colouring is a total map from the host's edge set to opaque `u64`
//! colour ids. Colour ids need not be contiguous.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{BufRead, Write};

use thiserror::Error;

use crate::bitset::BitSet;
use crate::graph::{numbered_lines, parse_fields, Edge, GraphError, OrderedGraph, Vertex, VertexSet};

pub type Colour = u64;

#[derive(Debug, Error, PartialEq)]
pub enum ColouringError {
    #[error("vertices {0:?} do not induce a clique")]
    NotAClique(Vec<Vertex>),
    #[error("vertex tuple {0:?} is not strictly increasing")]
    NotIncreasing(Vec<Vertex>),
    #[error("colouring covers {got} edges but the host has {expected}")]
    WrongLength { got: usize, expected: usize },
    #[error("edge {0} is not an edge of the host graph")]
    NotAHostEdge(Edge),
    #[error("edge {0} coloured twice")]
    DuplicateEdge(Edge),
    #[error("need at least {min} vertex classes, got {got}")]
    TooFewClasses { min: usize, got: usize },
    #[error("vertex classes must be pairwise disjoint")]
    ClassesNotDisjoint,
    #[error("vertex classes must be non-empty")]
    EmptyClass,
    #[error("probability {0} must lie in (0, 1]")]
    InvalidProbability(f64),
    #[error("colour {colour} has weight {weight} above the cap {cap}")]
    WeightExceedsCap { colour: Colour, weight: u64, cap: u64 },
    #[error("cap must be positive")]
    ZeroCap,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// The comparison sign `⋄ ∈ {<, >}` relating a vertex to its neighbour.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Direction {
    /// Neighbours above `v`.
    Less,
    /// Neighbours below `v`.
    Greater,
}

impl Direction {
    /// Whether `v ⋄ w`.
    #[inline]
    pub fn holds(self, v: Vertex, w: Vertex) -> bool {
        match self {
            Direction::Less => v < w,
            Direction::Greater => v > w,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Direction::Less => "<",
            Direction::Greater => ">",
        }
    }
}

/// One of the colour patterns a copy of a clique can display.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum PatternTag {
    Monochromatic,
    Rainbow,
    MinColoured,
    MaxColoured,
    NonStrictMin,
    NonStrictMax,
}

impl PatternTag {
    pub const ALL: [PatternTag; 6] = [
        PatternTag::Monochromatic,
        PatternTag::Rainbow,
        PatternTag::MinColoured,
        PatternTag::MaxColoured,
        PatternTag::NonStrictMin,
        PatternTag::NonStrictMax,
    ];

    /// The four patterns that make a copy canonical.
    pub const STRICT: [PatternTag; 4] = [
        PatternTag::Monochromatic,
        PatternTag::Rainbow,
        PatternTag::MinColoured,
        PatternTag::MaxColoured,
    ];

    pub fn is_strict(self) -> bool {
        Self::STRICT.contains(&self)
    }

    pub fn name(self) -> &'static str {
        match self {
            PatternTag::Monochromatic => "monochromatic",
            PatternTag::Rainbow => "rainbow",
            PatternTag::MinColoured => "min",
            PatternTag::MaxColoured => "max",
            PatternTag::NonStrictMin => "nonstrict_min",
            PatternTag::NonStrictMax => "nonstrict_max",
        }
    }

    fn bit(self) -> u8 {
        1 << (self as u8)
    }
}

impl fmt::Display for PatternTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A set of [`PatternTag`]s.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct TagSet(u8);

impl TagSet {
    pub fn new() -> Self {
        Self(0)
    }

    pub fn insert(&mut self, tag: PatternTag) {
        self.0 |= tag.bit();
    }

    pub fn contains(&self, tag: PatternTag) -> bool {
        self.0 & tag.bit() != 0
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = PatternTag> + '_ {
        PatternTag::ALL.into_iter().filter(|t| self.contains(*t))
    }

    pub fn is_canonical(&self) -> bool {
        self.primary().is_some()
    }

    /// The first strict tag in the order mono, rainbow, min, max.
    pub fn primary(&self) -> Option<PatternTag> {
        PatternTag::STRICT.into_iter().find(|t| self.contains(*t))
    }
}

impl FromIterator<PatternTag> for TagSet {
    fn from_iter<I: IntoIterator<Item = PatternTag>>(iter: I) -> Self {
        let mut s = TagSet::new();
        for t in iter {
            s.insert(t);
        }
        s
    }
}

impl fmt::Debug for TagSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// An increasing vertex tuple inducing a clique, the patterns it displays,
/// and the colours of its edges.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CanonicalWitness {
    pub vertices: Vec<Vertex>,
    pub tags: TagSet,
    pub evidence: Vec<(Edge, Colour)>,
}

impl CanonicalWitness {
    /// Classifies `vertices` under `phi` and packages the result.
    pub fn from_copy(phi: &EdgeColouring<'_>, vertices: Vec<Vertex>) -> Result<Self, ColouringError> {
        let tags = phi.classify_copy(&vertices)?;
        let evidence = phi.copy_evidence(&vertices);
        Ok(Self {
            vertices,
            tags,
            evidence,
        })
    }

    /// Re-checks the witness against `phi`: clique, colour evidence, and tags.
    pub fn verify(&self, phi: &EdgeColouring<'_>) -> bool {
        let Ok(tags) = phi.classify_copy(&self.vertices) else {
            return false;
        };
        tags == self.tags
            && tags.is_canonical()
            && self.evidence == phi.copy_evidence(&self.vertices)
    }
}

/// A total edge colouring of a host graph.
#[derive(Clone, PartialEq, Eq)]
pub struct EdgeColouring<'g> {
    host: &'g OrderedGraph,
    /// Colour of `host.edges()[i]`.
    colours: Vec<Colour>,
}

impl fmt::Debug for EdgeColouring<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map()
            .entries(self.host.edges().iter().zip(&self.colours).map(|(e, c)| (e.to_string(), c)))
            .finish()
    }
}

impl<'g> EdgeColouring<'g> {
    /// Colours aligned with `host.edges()`.
    pub fn from_vec(host: &'g OrderedGraph, colours: Vec<Colour>) -> Result<Self, ColouringError> {
        if colours.len() != host.edge_count() {
            return Err(ColouringError::WrongLength {
                got: colours.len(),
                expected: host.edge_count(),
            });
        }
        Ok(Self { host, colours })
    }

    pub fn from_fn(host: &'g OrderedGraph, mut f: impl FnMut(Edge) -> Colour) -> Self {
        let colours = host.edges().iter().map(|&e| f(e)).collect();
        Self { host, colours }
    }

    pub fn constant(host: &'g OrderedGraph, c: Colour) -> Self {
        Self::from_fn(host, |_| c)
    }

    /// Builds a colouring from explicit `(edge, colour)` pairs that must cover
    /// the host's edge set bijectively.
    pub fn from_pairs(
        host: &'g OrderedGraph,
        pairs: impl IntoIterator<Item = (Edge, Colour)>,
    ) -> Result<Self, ColouringError> {
        let mut colours: Vec<Option<Colour>> = vec![None; host.edge_count()];
        for (e, c) in pairs {
            let i = host.edge_index(e.u, e.v).ok_or(ColouringError::NotAHostEdge(e))?;
            if colours[i].replace(c).is_some() {
                return Err(ColouringError::DuplicateEdge(e));
            }
        }
        let got = colours.iter().filter(|c| c.is_some()).count();
        if got != colours.len() {
            return Err(ColouringError::WrongLength {
                got,
                expected: colours.len(),
            });
        }
        Ok(Self {
            host,
            colours: colours.into_iter().flatten().collect(),
        })
    }

    pub fn host(&self) -> &'g OrderedGraph {
        self.host
    }

    /// Colours aligned with `host().edges()`.
    pub fn colours(&self) -> &[Colour] {
        &self.colours
    }

    /// Colour of the edge `{a, b}`, if it is an edge.
    #[inline]
    pub fn colour(&self, a: Vertex, b: Vertex) -> Option<Colour> {
        self.host.edge_index(a, b).map(|i| self.colours[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (Edge, Colour)> + '_ {
        self.host.edges().iter().copied().zip(self.colours.iter().copied())
    }

    /// Number of distinct colours used.
    pub fn palette_size(&self) -> usize {
        let mut c = self.colours.clone();
        c.sort_unstable();
        c.dedup();
        c.len()
    }

    /// Renames colours to `0..k` preserving their relative order.
    pub fn relabelled_dense(&self) -> EdgeColouring<'g> {
        let mut ids = self.colours.clone();
        ids.sort_unstable();
        ids.dedup();
        let colours = self
            .colours
            .iter()
            .map(|c| ids.binary_search(c).expect("colour present") as Colour)
            .collect();
        Self {
            host: self.host,
            colours,
        }
    }

    fn copy_edges(&self, vertices: &[Vertex]) -> Result<Vec<(Edge, Colour)>, ColouringError> {
        if vertices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ColouringError::NotIncreasing(vertices.to_vec()));
        }
        let mut out = Vec::with_capacity(vertices.len() * vertices.len().saturating_sub(1) / 2);
        for (i, &a) in vertices.iter().enumerate() {
            for &b in &vertices[i + 1..] {
                let c = self
                    .colour(a, b)
                    .ok_or_else(|| ColouringError::NotAClique(vertices.to_vec()))?;
                out.push((Edge { u: a, v: b }, c));
            }
        }
        Ok(out)
    }

    pub(crate) fn copy_evidence(&self, vertices: &[Vertex]) -> Vec<(Edge, Colour)> {
        self.copy_edges(vertices).unwrap_or_default()
    }

    /// All patterns displayed by the copy of `K_ℓ` on the increasing tuple
    /// `vertices`. Strict min/max test the biconditional
    /// `φ(e) = φ(e') ⇔ min(e) = min(e')`; the non-strict variants only the
    /// backward implication.
    pub fn classify_copy(&self, vertices: &[Vertex]) -> Result<TagSet, ColouringError> {
        let edges = self.copy_edges(vertices)?;
        let (mut mono, mut rainbow) = (true, true);
        let (mut min_strict, mut max_strict) = (true, true);
        let (mut min_weak, mut max_weak) = (true, true);
        for (i, (e, c)) in edges.iter().enumerate() {
            for (f, d) in &edges[i + 1..] {
                let same_colour = c == d;
                let same_min = e.low() == f.low();
                let same_max = e.high() == f.high();
                mono &= same_colour;
                rainbow &= !same_colour;
                min_strict &= same_colour == same_min;
                max_strict &= same_colour == same_max;
                min_weak &= !same_min || same_colour;
                max_weak &= !same_max || same_colour;
            }
        }
        let mut tags = TagSet::new();
        for (flag, tag) in [
            (mono, PatternTag::Monochromatic),
            (rainbow, PatternTag::Rainbow),
            (min_strict, PatternTag::MinColoured),
            (max_strict, PatternTag::MaxColoured),
            (min_weak, PatternTag::NonStrictMin),
            (max_weak, PatternTag::NonStrictMax),
        ] {
            if flag {
                tags.insert(tag);
            }
        }
        Ok(tags)
    }

    /// `d_c(v, U)`: neighbours `w ∈ U` of `v` with `φ(vw) = c`.
    pub fn colour_degree(&self, v: Vertex, u: &VertexSet, c: Colour) -> usize {
        self.neighbours_in(v, u)
            .filter(|&w| self.colour(v, w) == Some(c))
            .count()
    }

    /// `d^⋄_c(v, U)`: as [`Self::colour_degree`] but only neighbours `w` with `v ⋄ w`.
    pub fn directed_colour_degree(&self, v: Vertex, u: &VertexSet, c: Colour, dir: Direction) -> usize {
        self.neighbours_in(v, u)
            .filter(|&w| dir.holds(v, w) && self.colour(v, w) == Some(c))
            .count()
    }

    /// Colour-degree profile of `v` into `U`: colour ↦ `d_c(v, U)`.
    pub fn colour_degrees(&self, v: Vertex, u: &VertexSet) -> HashMap<Colour, usize> {
        let mut out = HashMap::new();
        for w in self.neighbours_in(v, u) {
            *out.entry(self.colour(v, w).expect("host edge")).or_insert(0) += 1;
        }
        out
    }

    /// Profile of `d^⋄_c(v, U)` over colours for a fixed direction.
    pub fn directed_colour_degrees(&self, v: Vertex, u: &VertexSet, dir: Direction) -> HashMap<Colour, usize> {
        let mut out = HashMap::new();
        for w in self.neighbours_in(v, u).filter(|&w| dir.holds(v, w)) {
            *out.entry(self.colour(v, w).expect("host edge")).or_insert(0) += 1;
        }
        out
    }

    /// `max_c d_c(v, U)`, zero for a vertex without neighbours in `U`.
    pub fn max_colour_degree(&self, v: Vertex, u: &VertexSet) -> usize {
        self.colour_degrees(v, u).into_values().max().unwrap_or(0)
    }

    fn max_directed_colour_degree(&self, v: Vertex, u: &VertexSet, dir: Direction) -> usize {
        self.directed_colour_degrees(v, u, dir).into_values().max().unwrap_or(0)
    }

    fn neighbours_in<'a>(&'a self, v: Vertex, u: &'a VertexSet) -> impl Iterator<Item = Vertex> + 'a {
        let row = self.host.row(v);
        u.iter().filter(move |&w| row.contains(w))
    }

    /// `φ` is `(δ, p)`-bounded on `U`: every `d_c(u, U) ≤ δ·p·|U|`.
    pub fn is_delta_p_bounded(&self, u: &VertexSet, delta: f64, p: f64) -> bool {
        let bound = delta * p * u.len() as f64;
        u.iter().all(|v| self.max_colour_degree(v, u) as f64 <= bound)
    }

    /// At least half of `U` has some colour degree `≥ 8·δ·p·|U|` into `U`.
    pub fn unbounded_condition_holds(&self, u: &VertexSet, delta: f64, p: f64) -> bool {
        let (heavy, _) = self.bounded_side_split(u, delta, p);
        2 * heavy.len() >= u.len()
    }

    /// `B^⋄(U)`: vertices of `U` with some `d^⋄_c(v, U) ≥ 4·δ·p·|U|`.
    pub fn unbounded_vertices(&self, u: &VertexSet, delta: f64, p: f64, dir: Direction) -> VertexSet {
        let threshold = 4.0 * delta * p * u.len() as f64;
        let mut out = VertexSet::empty(u.universe());
        for v in u.iter() {
            if self.max_directed_colour_degree(v, u, dir) as f64 >= threshold {
                out.insert(v);
            }
        }
        out
    }

    /// Splits `U` into `B(U)`, the vertices with some `d_c(u, U) ≥ 8·δ·p·|U|`,
    /// and the remainder `U \ B(U)`.
    pub fn bounded_side_split(&self, u: &VertexSet, delta: f64, p: f64) -> (VertexSet, VertexSet) {
        let threshold = 8.0 * delta * p * u.len() as f64;
        let mut heavy = VertexSet::empty(u.universe());
        for v in u.iter() {
            if self.max_colour_degree(v, u) as f64 >= threshold {
                heavy.insert(v);
            }
        }
        let rest = u.difference(&heavy);
        (heavy, rest)
    }

    /// `κ^∧_ℓ`: labelled copies of `K_ℓ` with vertex `i` in `classes[i]` whose
    /// edges between classes 1–2 and 1–3 share a colour.
    pub fn nonrainbow_cherry_count(&self, classes: &[VertexSet]) -> Result<u128, ColouringError> {
        check_classes(classes, 3)?;
        let g = self.host;
        let mut total = 0u128;
        for x1 in classes[0].iter() {
            let n1 = g.row(x1);
            for x2 in classes[1].iter().filter(|&x| n1.contains(x)) {
                let c = self.colour(x1, x2).expect("host edge");
                let common12 = n1.intersection(g.row(x2));
                for x3 in classes[2].iter().filter(|&x| common12.contains(x)) {
                    if self.colour(x1, x3) != Some(c) {
                        continue;
                    }
                    let common = common12.intersection(g.row(x3));
                    total += count_completions(g, classes, 3, &common);
                }
            }
        }
        Ok(total)
    }

    /// `κ^‖_ℓ`: labelled copies of `K_ℓ` with vertex `i` in `classes[i]` whose
    /// edges between classes 1–2 and 3–4 share a colour.
    pub fn nonrainbow_matching_count(&self, classes: &[VertexSet]) -> Result<u128, ColouringError> {
        check_classes(classes, 4)?;
        let g = self.host;
        let mut total = 0u128;
        for x1 in classes[0].iter() {
            let n1 = g.row(x1);
            for x2 in classes[1].iter().filter(|&x| n1.contains(x)) {
                let c = self.colour(x1, x2).expect("host edge");
                let common12 = n1.intersection(g.row(x2));
                for x3 in classes[2].iter().filter(|&x| common12.contains(x)) {
                    let common123 = common12.intersection(g.row(x3));
                    for x4 in classes[3].iter().filter(|&x| common123.contains(x)) {
                        if self.colour(x3, x4) != Some(c) {
                            continue;
                        }
                        let common = common123.intersection(g.row(x4));
                        total += count_completions(g, classes, 4, &common);
                    }
                }
            }
        }
        Ok(total)
    }

    /// Writes `n m` then one `u v c` line per edge in lexicographic order.
    pub fn write_to(&self, mut out: impl Write) -> Result<(), ColouringError> {
        let io = |e: std::io::Error| ColouringError::Graph(GraphError::from(e));
        writeln!(out, "{} {}", self.host.n(), self.colours.len()).map_err(io)?;
        for (e, c) in self.iter() {
            writeln!(out, "{} {} {}", e.u, e.v, c).map_err(io)?;
        }
        Ok(())
    }

    /// Reads a colouring of `host`. The lines must cover the host's edge set
    /// exactly once; the first offending line is reported.
    pub fn read_from(host: &'g OrderedGraph, input: impl BufRead) -> Result<Self, ColouringError> {
        let parse = |e: GraphError| match e {
            GraphError::Parse { line, msg } => ColouringError::Parse { line, msg },
            other => ColouringError::Graph(other),
        };
        let mut lines = numbered_lines(input);
        let (line, header) = lines
            .next()
            .transpose()
            .map_err(parse)?
            .ok_or(ColouringError::Parse { line: 1, msg: "missing header".into() })?;
        let [n, m] = parse_fields::<2>(&header, line).map_err(parse)?;
        if n != host.n() || m != host.edge_count() {
            return Err(ColouringError::Parse {
                line,
                msg: format!(
                    "header {n} {m} does not match host graph ({} vertices, {} edges)",
                    host.n(),
                    host.edge_count()
                ),
            });
        }
        let mut colours: Vec<Option<Colour>> = vec![None; host.edge_count()];
        let mut last_line = line;
        for item in lines {
            let (line, text) = item.map_err(parse)?;
            last_line = line;
            let [a, b, c] = parse_fields::<3>(&text, line).map_err(parse)?;
            let err = |msg: String| ColouringError::Parse { line, msg };
            if a >= b {
                return Err(err(format!("expected u < v, got {a} {b}")));
            }
            let i = host
                .edge_index(a, b)
                .ok_or_else(|| err(format!("{{{a},{b}}} is not an edge of the graph")))?;
            if colours[i].replace(c as Colour).is_some() {
                return Err(err(format!("edge {{{a},{b}}} coloured twice")));
            }
        }
        if let Some(i) = colours.iter().position(|c| c.is_none()) {
            return Err(ColouringError::Parse {
                line: last_line,
                msg: format!("edge {} has no colour", host.edges()[i]),
            });
        }
        Ok(Self {
            host,
            colours: colours.into_iter().flatten().collect(),
        })
    }
}

fn check_classes(classes: &[VertexSet], min: usize) -> Result<(), ColouringError> {
    if classes.len() < min {
        return Err(ColouringError::TooFewClasses {
            min,
            got: classes.len(),
        });
    }
    for (i, a) in classes.iter().enumerate() {
        if classes[i + 1..].iter().any(|b| a.iter().any(|v| b.contains(v))) {
            return Err(ColouringError::ClassesNotDisjoint);
        }
    }
    Ok(())
}

/// Labelled ways to pick one vertex from each of `classes[depth..]` so that
/// the picks are pairwise adjacent and all lie in `common`.
fn count_completions(g: &OrderedGraph, classes: &[VertexSet], depth: usize, common: &BitSet) -> u128 {
    if depth == classes.len() {
        return 1;
    }
    let cand = common.intersection(classes[depth].bits());
    if depth + 1 == classes.len() {
        return cand.len() as u128;
    }
    cand.iter()
        .map(|y| count_completions(g, classes, depth + 1, &common.intersection(g.row(y))))
        .sum()
}

fn check_density_args(classes: &[&VertexSet], p: f64) -> Result<(), ColouringError> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(ColouringError::InvalidProbability(p));
    }
    if classes.iter().any(|c| c.is_empty()) {
        return Err(ColouringError::EmptyClass);
    }
    for (i, a) in classes.iter().enumerate() {
        if classes[i + 1..].iter().any(|b| a.iter().any(|v| b.contains(v))) {
            return Err(ColouringError::ClassesNotDisjoint);
        }
    }
    Ok(())
}

/// `e_S(U_i, U_j) / (p·|U_i|·|U_j|)` for disjoint classes.
pub fn pair_density(s: &OrderedGraph, ui: &VertexSet, uj: &VertexSet, p: f64) -> Result<f64, ColouringError> {
    check_density_args(&[ui, uj], p)?;
    let e = s.edge_count_between(ui, uj) as f64;
    Ok(e / (p * ui.len() as f64 * uj.len() as f64))
}

/// `Σ_{u ∈ U₁} d_S(u, U₂)·d_S(u, U₃) / (p²·|U₁|·|U₂|·|U₃|)`.
pub fn cherry_density(
    s: &OrderedGraph,
    u1: &VertexSet,
    u2: &VertexSet,
    u3: &VertexSet,
    p: f64,
) -> Result<f64, ColouringError> {
    check_density_args(&[u1, u2, u3], p)?;
    let sum: u128 = u1
        .iter()
        .map(|u| s.degree_into(u, u2) as u128 * s.degree_into(u, u3) as u128)
        .sum();
    Ok(sum as f64 / (p * p * u1.len() as f64 * u2.len() as f64 * u3.len() as f64))
}

/// Packs colours into classes of total weight at most `cap`, visiting colours
/// in ascending id order and opening a new class whenever the next colour
/// does not fit into the current one. Uses at most `⌈2·total/cap⌉ + 1` classes.
pub fn greedy_colour_partition(
    weights: &BTreeMap<Colour, u64>,
    cap: u64,
) -> Result<Vec<Vec<Colour>>, ColouringError> {
    if cap == 0 {
        return Err(ColouringError::ZeroCap);
    }
    if let Some((&colour, &weight)) = weights.iter().find(|(_, &w)| w > cap) {
        return Err(ColouringError::WeightExceedsCap { colour, weight, cap });
    }
    let mut classes: Vec<Vec<Colour>> = Vec::new();
    let mut load = 0u64;
    for (&c, &w) in weights {
        match classes.last_mut() {
            Some(class) if load + w <= cap => {
                class.push(c);
                load += w;
            }
            _ => {
                classes.push(vec![c]);
                load = w;
            }
        }
    }
    Ok(classes)
}
