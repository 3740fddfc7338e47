//! Weighted graphs, the cut-norm, homomorphism densities and executable forms
//! of the sampling, counting and degree lemmas.
//!
//! The cut-norm here is `n⁻² · max_{U,W} |e_f(U, W)|`, with the absolute value.
//! Every value it reports, exact or heuristic, is computed by the same routine
//! [`best_response_value`] from column sums accumulated in ascending vertex
//! order, so a heuristic result can never exceed the exact one through
//! rounding alone.

use std::io::{BufRead, Write};

use num_rational::Ratio;
use rayon::prelude::*;
use thiserror::Error;

use crate::graph::{numbered_lines, OrderedGraph, Vertex, VertexSet};
use crate::rng;

/// Largest `n` accepted by [`cutnorm_exact`].
pub const EXACT_CUTNORM_MAX_N: usize = 22;
/// Largest pattern accepted by [`is_strictly_balanced`].
pub const BALANCE_SCAN_MAX_VERTICES: usize = 8;
/// Slack added to the right-hand side of every lemma inequality.
pub const LEMMA_SLACK: f64 = 1e-9;

const HEURISTIC_MAX_ROUNDS: usize = 64;
/// Above this size the exact scan is split across threads by smallest vertex.
const PARALLEL_SCAN_FROM: usize = 14;

#[derive(Debug, Error, PartialEq)]
pub enum CutnormError {
    #[error("weighted graph needs at least one vertex")]
    NoVertices,
    #[error("n = {n} exceeds the limit of {max}")]
    TooLarge { n: usize, max: usize },
    #[error("vertex counts differ: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },
    #[error("vertex {0} outside 1..=n")]
    VertexOutOfRange(Vertex),
    #[error("diagonal entry ({0},{0}) is fixed at zero")]
    Diagonal(Vertex),
    #[error("weight of {{{u},{v}}} is not finite")]
    NonFinite { u: Vertex, v: Vertex },
    #[error("weight {w} of {{{u},{v}}} lies outside [0, 1]")]
    RangeViolation { u: Vertex, v: Vertex, w: f64 },
    #[error("|U| = {size} must exceed 2·ε^(1/3)·n = {needed}")]
    HypothesisViolated { size: usize, needed: f64 },
    #[error("cut-norm of f − g is {measured}, above ε = {eps}")]
    EpsilonTooSmall { eps: f64, measured: f64 },
    #[error("pattern needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("invalid pattern graph: {0}")]
    InvalidPattern(String),
    #[error("restarts must be at least 1")]
    NoRestarts,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for CutnormError {
    fn from(e: std::io::Error) -> Self {
        CutnormError::Io(e.to_string())
    }
}

/// Symmetric real weights on the pairs of `{1, …, n}`, zero on the diagonal.
#[derive(Clone, PartialEq, Debug)]
pub struct WeightedGraph {
    n: usize,
    /// Row-major `n × n`, 0-based.
    w: Vec<f64>,
}

impl WeightedGraph {
    pub fn zero(n: usize) -> Self {
        Self { n, w: vec![0.0; n * n] }
    }

    /// `c` on every off-diagonal pair.
    pub fn constant(n: usize, c: f64) -> Self {
        Self::from_fn(n, |_, _| c)
    }

    /// Weights `f(u, v)` for `u < v`, mirrored.
    pub fn from_fn(n: usize, mut f: impl FnMut(Vertex, Vertex) -> f64) -> Self {
        let mut out = Self::zero(n);
        for u in 1..=n {
            for v in u + 1..=n {
                let x = f(u, v);
                out.w[(u - 1) * n + (v - 1)] = x;
                out.w[(v - 1) * n + (u - 1)] = x;
            }
        }
        out
    }

    /// The indicator `1_G`.
    pub fn indicator(g: &OrderedGraph) -> Self {
        Self::from_fn(g.n(), |u, v| if g.has_edge(u, v) { 1.0 } else { 0.0 })
    }

    /// Independent uniform `[0, 1)` weights in lexicographic pair order.
    pub fn random_uniform(n: usize, seed: u64) -> Self {
        use rand::Rng;
        let mut r = rng::stream(seed);
        Self::from_fn(n, |_, _| r.gen::<f64>())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `f(uv)`; zero when `u = v`.
    pub fn get(&self, u: Vertex, v: Vertex) -> f64 {
        self.w[(u - 1) * self.n + (v - 1)]
    }

    pub fn set(&mut self, u: Vertex, v: Vertex, x: f64) -> Result<(), CutnormError> {
        for a in [u, v] {
            if a == 0 || a > self.n {
                return Err(CutnormError::VertexOutOfRange(a));
            }
        }
        if u == v {
            return Err(CutnormError::Diagonal(u));
        }
        if !x.is_finite() {
            return Err(CutnormError::NonFinite { u, v });
        }
        self.w[(u - 1) * self.n + (v - 1)] = x;
        self.w[(v - 1) * self.n + (u - 1)] = x;
        Ok(())
    }

    #[inline]
    fn row(&self, i: usize) -> &[f64] {
        &self.w[i * self.n..(i + 1) * self.n]
    }

    /// Off-diagonal pairs `(u, v, f(uv))` with `u < v`, in lexicographic order.
    pub fn pairs(&self) -> impl Iterator<Item = (Vertex, Vertex, f64)> + '_ {
        (1..=self.n).flat_map(move |u| (u + 1..=self.n).map(move |v| (u, v, self.get(u, v))))
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            n: self.n,
            w: self.w.iter().map(|x| alpha * x).collect(),
        }
    }

    /// `self − other`.
    pub fn difference(&self, other: &Self) -> Result<Self, CutnormError> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn sum(&self, other: &Self) -> Result<Self, CutnormError> {
        self.zip_with(other, |a, b| a + b)
    }

    fn zip_with(&self, other: &Self, op: impl Fn(f64, f64) -> f64) -> Result<Self, CutnormError> {
        if self.n != other.n {
            return Err(CutnormError::SizeMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(Self {
            n: self.n,
            w: self.w.iter().zip(&other.w).map(|(&a, &b)| op(a, b)).collect(),
        })
    }

    /// First pair whose weight leaves `[0, 1]`.
    pub fn check_unit_range(&self) -> Result<(), CutnormError> {
        match self.pairs().find(|&(_, _, w)| !(0.0..=1.0).contains(&w)) {
            Some((u, v, w)) => Err(CutnormError::RangeViolation { u, v, w }),
            None => Ok(()),
        }
    }

    /// `d_f(v, U) = Σ_{u∈U} f(vu)`.
    pub fn degree_into(&self, v: Vertex, u: &VertexSet) -> f64 {
        let mut acc = NeumaierSum::default();
        for x in u.iter() {
            acc.add(self.get(v, x));
        }
        acc.total()
    }

    /// Writes `n`, then one `u v w` line per pair in lexicographic order.
    pub fn write_to(&self, mut out: impl Write) -> Result<(), CutnormError> {
        writeln!(out, "{}", self.n)?;
        for (u, v, w) in self.pairs() {
            writeln!(out, "{u} {v} {w}")?;
        }
        Ok(())
    }

    pub fn read_from(input: impl BufRead) -> Result<Self, CutnormError> {
        let parse_err = |line: usize, msg: String| CutnormError::Parse { line, msg };
        let mut lines = numbered_lines(input).map(|r| r.map_err(|e| CutnormError::Io(e.to_string())));
        let (line, header) = lines.next().transpose()?.ok_or(parse_err(1, "missing header".into()))?;
        let n: usize = header
            .trim()
            .parse()
            .map_err(|_| parse_err(line, format!("bad vertex count {header:?}")))?;
        if n == 0 {
            return Err(CutnormError::NoVertices);
        }
        let mut out = Self::zero(n);
        let mut expected = (1..=n).flat_map(|u| (u + 1..=n).map(move |v| (u, v)));
        for item in lines {
            let (line, text) = item?;
            let parts: Vec<&str> = text.split_whitespace().collect();
            let [a, b, x] = parts[..] else {
                return Err(parse_err(line, format!("expected 3 fields, found {}", parts.len())));
            };
            let (u, v) = match (a.parse::<usize>(), b.parse::<usize>()) {
                (Ok(u), Ok(v)) => (u, v),
                _ => return Err(parse_err(line, format!("bad pair {a:?} {b:?}"))),
            };
            if expected.next() != Some((u, v)) {
                return Err(parse_err(line, format!("pair {{{u},{v}}} out of lexicographic order")));
            }
            let x: f64 = x.parse().map_err(|_| parse_err(line, format!("bad weight {x:?}")))?;
            out.set(u, v, x)?;
        }
        if let Some((u, v)) = expected.next() {
            return Err(parse_err(0, format!("missing pair {{{u},{v}}}")));
        }
        Ok(out)
    }
}

/// Compensated (Neumaier) summation.
#[derive(Clone, Copy, Default, Debug)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// `e_f(U, W) = Σ_{u∈U, w∈W} f(uw)` over ordered pairs; diagonal terms are zero.
pub fn eval_e(f: &WeightedGraph, u: &VertexSet, w: &VertexSet) -> f64 {
    let mut acc = NeumaierSum::default();
    for a in u.iter() {
        for b in w.iter() {
            acc.add(f.get(a, b));
        }
    }
    acc.total()
}

/// Column sums `s_w = Σ_{u∈U} f(uw)` (0-based), accumulated in ascending `u`.
fn column_sums(f: &WeightedGraph, members: impl IntoIterator<Item = usize>) -> Vec<f64> {
    let mut s = vec![0.0; f.n];
    for u in members {
        for (acc, &x) in s.iter_mut().zip(f.row(u)) {
            *acc += x;
        }
    }
    s
}

/// `max_W |e_f(U, W)|` given the column sums of `U`: take every positive
/// column, or every negative one.
fn best_response_value(s: &[f64]) -> f64 {
    let (mut pos, mut neg) = (0.0, 0.0);
    for &x in s {
        if x > 0.0 {
            pos += x;
        } else {
            neg -= x;
        }
    }
    f64::max(pos, neg)
}

/// Best value over every `U` whose smallest member is `first` (0-based).
fn subtree_max(f: &WeightedGraph, first: usize) -> f64 {
    let n = f.n;
    let mut levels = vec![vec![0.0; n]; n + 1];
    levels[1] = column_sums(f, [first]);
    fn rec(f: &WeightedGraph, levels: &mut [Vec<f64>], depth: usize, last: usize) -> f64 {
        let mut best = best_response_value(&levels[depth]);
        for u in last + 1..f.n {
            let (done, rest) = levels.split_at_mut(depth + 1);
            for ((next, &cur), &x) in rest[0].iter_mut().zip(&done[depth]).zip(f.row(u)) {
                *next = cur + x;
            }
            best = best.max(rec(f, levels, depth + 1, u));
        }
        best
    }
    rec(f, &mut levels, 1, first)
}

/// `n⁻² · max_{U,W ⊆ [n]} |e_f(U, W)|` by enumerating all `2ⁿ` sets `U`.
pub fn cutnorm_exact(f: &WeightedGraph) -> Result<f64, CutnormError> {
    let n = f.n;
    if n > EXACT_CUTNORM_MAX_N {
        return Err(CutnormError::TooLarge {
            n,
            max: EXACT_CUTNORM_MAX_N,
        });
    }
    if n == 0 {
        return Ok(0.0);
    }
    let best = if n >= PARALLEL_SCAN_FROM {
        (0..n).into_par_iter().map(|u| subtree_max(f, u)).reduce(|| 0.0, f64::max)
    } else {
        (0..n).map(|u| subtree_max(f, u)).fold(0.0, f64::max)
    };
    Ok(best / (n * n) as f64)
}

/// Alternating local search for the cut-norm; a lower bound on
/// [`cutnorm_exact`].
///
/// Each restart draws a random non-empty `U` and, for each sign `σ`, alternates
/// `W ← {w : σ·s_U(w) > 0}` and `U ← {u : σ·s_W(u) > 0}` until the sets stop
/// changing. Every visited set is scored with its optimal partner.
pub fn cutnorm_heuristic(f: &WeightedGraph, restarts: usize, seed: u64) -> Result<f64, CutnormError> {
    use rand::Rng;
    if restarts == 0 {
        return Err(CutnormError::NoRestarts);
    }
    let n = f.n;
    if n == 0 {
        return Ok(0.0);
    }
    let mut r = rng::stream(seed);
    let mut best = 0.0f64;
    for _ in 0..restarts {
        let mut start: Vec<usize> = (0..n).filter(|_| r.gen::<bool>()).collect();
        if start.is_empty() {
            start.push(r.gen_range(0..n));
        }
        for sign in [1.0, -1.0] {
            let mut u = start.clone();
            for _ in 0..HEURISTIC_MAX_ROUNDS {
                let s = column_sums(f, u.iter().copied());
                best = best.max(best_response_value(&s));
                let w: Vec<usize> = (0..n).filter(|&i| sign * s[i] > 0.0).collect();
                if w.is_empty() {
                    break;
                }
                let t = column_sums(f, w.iter().copied());
                best = best.max(best_response_value(&t));
                let next: Vec<usize> = (0..n).filter(|&i| sign * t[i] > 0.0).collect();
                if next.is_empty() || next == u {
                    break;
                }
                u = next;
            }
        }
    }
    Ok(best / (n * n) as f64)
}

/// A small simple graph `H` on `{1, …, ℓ}`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PatternGraph {
    ell: usize,
    edges: Vec<(usize, usize)>,
}

impl PatternGraph {
    pub fn new(ell: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, CutnormError> {
        let mut out: Vec<(usize, usize)> = Vec::new();
        for (a, b) in edges {
            if a == b {
                return Err(CutnormError::InvalidPattern(format!("loop at {a}")));
            }
            if a == 0 || b == 0 || a > ell || b > ell {
                return Err(CutnormError::InvalidPattern(format!("edge {{{a},{b}}} outside 1..={ell}")));
            }
            let e = (a.min(b), a.max(b));
            if out.contains(&e) {
                return Err(CutnormError::InvalidPattern(format!("duplicate edge {{{},{}}}", e.0, e.1)));
            }
            out.push(e);
        }
        out.sort_unstable();
        Ok(Self { ell, edges: out })
    }

    pub fn complete(ell: usize) -> Self {
        let edges = (1..=ell).flat_map(|a| (a + 1..=ell).map(move |b| (a, b))).collect();
        Self { ell, edges }
    }

    pub fn cycle(ell: usize) -> Result<Self, CutnormError> {
        if ell < 3 {
            return Err(CutnormError::TooFewVertices(ell));
        }
        Self::new(ell, (1..=ell).map(|i| (i, i % ell + 1)))
    }

    pub fn vertex_count(&self) -> usize {
        self.ell
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn is_complete(&self) -> bool {
        self.edges.len() == self.ell * self.ell.saturating_sub(1) / 2
    }
}

/// `Λ_H(f) = n^{−ℓ} Σ_{(v_1,…,v_ℓ)} Π_{ij∈E(H)} f(v_i v_j)` by direct
/// summation over all `n^ℓ` tuples, skipping branches whose partial product
/// is already zero. Intended for weights in `[-1, 1]` and `ℓ ≤ 5`.
pub fn hom_density(f: &WeightedGraph, h: &PatternGraph) -> f64 {
    let n = f.n;
    let ell = h.ell;
    if n == 0 {
        return 0.0;
    }
    // back[i]: earlier positions adjacent to position i (0-based).
    let mut back = vec![Vec::new(); ell];
    for &(a, b) in &h.edges {
        back[b - 1].push(a - 1);
    }
    let mut tuple = vec![0usize; ell];
    let mut acc = NeumaierSum::default();
    fn rec(
        f: &WeightedGraph,
        back: &[Vec<usize>],
        tuple: &mut [usize],
        i: usize,
        partial: f64,
        acc: &mut NeumaierSum,
    ) {
        if i == tuple.len() {
            acc.add(partial);
            return;
        }
        for v in 0..f.n {
            let mut prod = partial;
            for &j in &back[i] {
                prod *= f.w[tuple[j] * f.n + v];
            }
            if prod == 0.0 {
                continue;
            }
            tuple[i] = v;
            rec(f, back, tuple, i + 1, prod, acc);
        }
    }
    rec(f, &back, &mut tuple, 0, 1.0, &mut acc);
    acc.total() / (n as f64).powi(ell as i32)
}

/// `Λ_H(1_G)`; counts cliques directly when `H` is complete.
pub fn hom_density_of_graph(g: &OrderedGraph, h: &PatternGraph) -> f64 {
    if h.is_complete() && h.ell >= 1 {
        if let Ok(count) = g.count_cliques(h.ell) {
            return count as f64 / (g.n() as f64).powi(h.ell as i32);
        }
    }
    hom_density(&WeightedGraph::indicator(g), h)
}

#[derive(Clone, Copy, PartialEq, Debug)]
pub struct LemmaCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// `|Λ_H(f) − Λ_H(g)| ≤ 2|E(H)| · ‖f − g‖□` for `f, g` with entries in `[0, 1]`.
pub fn counting_lemma_check(
    f: &WeightedGraph,
    g: &WeightedGraph,
    h: &PatternGraph,
) -> Result<LemmaCheck, CutnormError> {
    f.check_unit_range()?;
    g.check_unit_range()?;
    let diff = f.difference(g)?;
    let rhs = 2.0 * h.edge_count() as f64 * cutnorm_exact(&diff)?;
    let lhs = (hom_density(f, h) - hom_density(g, h)).abs();
    Ok(LemmaCheck {
        lhs,
        rhs,
        holds: lhs <= rhs + LEMMA_SLACK,
    })
}

/// Includes each pair `e` independently with probability `d(e)`, pairs drawn
/// in lexicographic order from [`rng::stream`]`(seed)`.
pub fn sample_graph_from_weights(d: &WeightedGraph, seed: u64) -> Result<OrderedGraph, CutnormError> {
    d.check_unit_range()?;
    let mut r = rng::stream(seed);
    let kept: Vec<(Vertex, Vertex)> = d
        .pairs()
        .filter(|&(_, _, p)| rng::bernoulli(&mut r, p))
        .map(|(u, v, _)| (u, v))
        .collect();
    OrderedGraph::from_edges(d.n, kept).map_err(|e| CutnormError::InvalidPattern(e.to_string()))
}

#[derive(Clone, Copy, PartialEq, Debug)]
pub struct DegreeCheck {
    /// Vertices with `|d_f(v,U) − d_g(v,U)| > ε^{1/3}|U|`.
    pub violations: usize,
    /// `ε^{1/3} · n`.
    pub bound: f64,
    /// `‖f − g‖□`, measured.
    pub cutnorm: f64,
}

impl DegreeCheck {
    pub fn within_bound(&self) -> bool {
        self.violations as f64 <= self.bound + LEMMA_SLACK
    }
}

/// Counts the vertices whose degree into `U` differs between `f` and `g` by
/// more than `ε^{1/3}|U|`. Requires `‖f − g‖□ ≤ ε` (measured here) and
/// `|U| > 2ε^{1/3}n`.
pub fn degree_lemma_check(
    f: &WeightedGraph,
    g: &WeightedGraph,
    u: &VertexSet,
    eps: f64,
) -> Result<DegreeCheck, CutnormError> {
    let diff = f.difference(g)?;
    let n = f.n;
    let root = eps.max(0.0).cbrt();
    let needed = 2.0 * root * n as f64;
    if u.len() as f64 <= needed {
        return Err(CutnormError::HypothesisViolated { size: u.len(), needed });
    }
    let measured = cutnorm_exact(&diff)?;
    if measured > eps + LEMMA_SLACK {
        return Err(CutnormError::EpsilonTooSmall { eps, measured });
    }
    let limit = root * u.len() as f64 + LEMMA_SLACK;
    let violations = (1..=n)
        .filter(|&v| (f.degree_into(v, u) - g.degree_into(v, u)).abs() > limit)
        .count();
    Ok(DegreeCheck {
        violations,
        bound: root * n as f64,
        cutnorm: measured,
    })
}

/// `m₂(H) = (|E(H)| − 1)/(|V(H)| − 2)`, exactly.
pub fn two_density(h: &PatternGraph) -> Result<Ratio<u64>, CutnormError> {
    if h.ell < 3 {
        return Err(CutnormError::TooFewVertices(h.ell));
    }
    let e = h.edge_count() as u64;
    if e == 0 {
        return Err(CutnormError::InvalidPattern("2-density needs at least one edge".into()));
    }
    Ok(Ratio::new(e - 1, h.ell as u64 - 2))
}

/// Whether every proper subgraph on at least 3 vertices has 2-density strictly
/// below `m₂(H)`.
///
/// On a fixed vertex set the induced subgraph has the largest 2-density, and
/// dropping edges from `H` itself strictly lowers it, so the scan covers the
/// induced subgraphs on proper vertex subsets.
pub fn is_strictly_balanced(h: &PatternGraph) -> Result<bool, CutnormError> {
    if h.ell > BALANCE_SCAN_MAX_VERTICES {
        return Err(CutnormError::TooLarge {
            n: h.ell,
            max: BALANCE_SCAN_MAX_VERTICES,
        });
    }
    let whole = two_density(h)?;
    let full = (1u32 << h.ell) - 1;
    for mask in 1..full {
        let size = mask.count_ones() as u64;
        if size < 3 {
            continue;
        }
        let inside = h
            .edges
            .iter()
            .filter(|&&(a, b)| mask >> (a - 1) & 1 == 1 && mask >> (b - 1) & 1 == 1)
            .count() as u64;
        // (e' − 1)/(v' − 2) ≥ m₂(H); a subgraph with no edges has density below any m₂ ≥ 0.
        if inside >= 1 && Ratio::new(inside - 1, size - 2) >= whole {
            return Ok(false);
        }
    }
    Ok(true)
}
