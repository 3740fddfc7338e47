//! Witness search: canonical and rainbow copies of `K_ℓ` in a coloured graph,
//! the classical arrow `G → (K_ℓ)_r`, and exhaustive canonical-arrow
//! certification for graphs with few edges.

use thiserror::Error;

use crate::colouring::{CanonicalWitness, Colour, EdgeColouring, PatternTag};
use crate::graph::{GraphError, OrderedGraph, Vertex, VertexSet};
use crate::partition::RestrictedGrowth;

/// Default node budget for [`arrows_mono`].
pub const DEFAULT_NODE_BUDGET: u64 = 100_000_000;

/// Edge limit for [`canonical_arrow_exhaustive`]; Bell(12) = 4 213 597.
pub const EXHAUSTIVE_EDGE_LIMIT: usize = 12;

/// Largest palette [`arrows_mono`] handles (domains are `u32` masks).
pub const MAX_ARROW_COLOURS: usize = 32;

#[derive(Debug, Error, PartialEq)]
pub enum SearchError {
    #[error("clique size {0} must be at least 3")]
    CliqueTooSmall(usize),
    #[error("colour count {0} must lie in 2..={MAX_ARROW_COLOURS}")]
    InvalidColourCount(usize),
    #[error("graph has {0} edges; exhaustive search is limited to {EXHAUSTIVE_EDGE_LIMIT}")]
    TooManyEdges(usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Result of a witness search.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchOutcome {
    pub found: bool,
    pub witness: Option<CanonicalWitness>,
    pub nodes_explored: u64,
}

impl SearchOutcome {
    fn not_found(nodes_explored: u64) -> Self {
        Self {
            found: false,
            witness: None,
            nodes_explored,
        }
    }

    fn found(witness: CanonicalWitness, nodes_explored: u64) -> Self {
        Self {
            found: true,
            witness: Some(witness),
            nodes_explored,
        }
    }
}

/// The first (lexicographically) `ℓ`-clique inside `within` that displays a
/// canonical pattern.
pub fn find_canonical_copy(
    phi: &EdgeColouring<'_>,
    ell: usize,
    within: Option<&VertexSet>,
) -> Result<SearchOutcome, SearchError> {
    if ell < 3 {
        return Err(SearchError::CliqueTooSmall(ell));
    }
    let mut cliques = phi.host().cliques(ell, within)?;
    for tuple in cliques.by_ref() {
        let tags = phi.classify_copy(&tuple).expect("clique stream yields cliques");
        if tags.is_canonical() {
            let witness = CanonicalWitness {
                evidence: phi.copy_evidence(&tuple),
                vertices: tuple,
                tags,
            };
            return Ok(SearchOutcome::found(witness, cliques.nodes_explored()));
        }
    }
    Ok(SearchOutcome::not_found(cliques.nodes_explored()))
}

/// The first (lexicographically) rainbow `ℓ`-clique inside `within`. Partial
/// tuples are abandoned as soon as two of their edges share a colour.
pub fn find_rainbow_copy(
    phi: &EdgeColouring<'_>,
    ell: usize,
    within: Option<&VertexSet>,
) -> Result<SearchOutcome, SearchError> {
    if ell < 3 {
        return Err(SearchError::CliqueTooSmall(ell));
    }
    let g = phi.host();
    let root = within.cloned().unwrap_or_else(|| g.vertex_set());
    let mut state = RainbowSearch {
        phi,
        ell,
        chosen: Vec::with_capacity(ell),
        used: Vec::with_capacity(ell * (ell - 1) / 2),
        nodes: 0,
    };
    let hit = state.extend(root.bits().clone());
    let nodes = state.nodes;
    Ok(match hit {
        true => {
            let witness = CanonicalWitness::from_copy(phi, state.chosen).expect("rainbow clique");
            debug_assert!(witness.tags.contains(PatternTag::Rainbow));
            SearchOutcome::found(witness, nodes)
        }
        false => SearchOutcome::not_found(nodes),
    })
}

struct RainbowSearch<'a, 'g> {
    phi: &'a EdgeColouring<'g>,
    ell: usize,
    chosen: Vec<Vertex>,
    used: Vec<Colour>,
    nodes: u64,
}

impl RainbowSearch<'_, '_> {
    fn extend(&mut self, cand: crate::bitset::BitSet) -> bool {
        if self.chosen.len() == self.ell {
            return true;
        }
        let need = self.ell - self.chosen.len();
        if cand.len() < need {
            return false;
        }
        let g = self.phi.host();
        for v in cand.iter() {
            self.nodes += 1;
            let before = self.used.len();
            let mut clash = false;
            for &x in &self.chosen {
                let c = self.phi.colour(x, v).expect("candidate adjacent to prefix");
                if self.used.contains(&c) {
                    clash = true;
                    break;
                }
                self.used.push(c);
            }
            if !clash {
                let mut next = cand.intersection(g.row(v));
                next.clear_up_to(v);
                self.chosen.push(v);
                if self.extend(next) {
                    return true;
                }
                self.chosen.pop();
            }
            self.used.truncate(before);
        }
        false
    }
}

/// Parameters of the arrow relation `G → (K_ℓ)_r`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct ArrowQuery {
    pub ell: usize,
    pub colours: usize,
}

impl ArrowQuery {
    pub fn new(ell: usize, colours: usize) -> Result<Self, SearchError> {
        if ell < 3 {
            return Err(SearchError::CliqueTooSmall(ell));
        }
        if !(2..=MAX_ARROW_COLOURS).contains(&colours) {
            return Err(SearchError::InvalidColourCount(colours));
        }
        Ok(Self { ell, colours })
    }
}

/// Outcome of [`arrows_mono`].
#[derive(Clone, Debug, PartialEq)]
pub enum ArrowVerdict {
    /// Every `r`-colouring has a monochromatic `K_ℓ`.
    Arrows { nodes_explored: u64 },
    /// A colouring (aligned with `host.edges()`) without a monochromatic `K_ℓ`.
    Avoided { colouring: Vec<Colour>, nodes_explored: u64 },
    /// The node budget ran out before the search finished.
    ResourceLimit { nodes_explored: u64 },
}

impl ArrowVerdict {
    /// `Some(true)` for arrows, `Some(false)` for a witness, `None` when undecided.
    pub fn decided(&self) -> Option<bool> {
        match self {
            ArrowVerdict::Arrows { .. } => Some(true),
            ArrowVerdict::Avoided { .. } => Some(false),
            ArrowVerdict::ResourceLimit { .. } => None,
        }
    }

    pub fn nodes_explored(&self) -> u64 {
        match *self {
            ArrowVerdict::Arrows { nodes_explored }
            | ArrowVerdict::Avoided { nodes_explored, .. }
            | ArrowVerdict::ResourceLimit { nodes_explored } => nodes_explored,
        }
    }
}

/// Decides `G → (K_ℓ)_r` by backtracking over edge colours.
///
/// The search always branches on an unassigned edge with the fewest allowed
/// colours (ties: most cliques, then lowest index). Whenever a clique has all
/// but one edge in colour `c`, `c` is removed from the last edge's domain.
/// Colours are interchangeable, so a fresh colour is only ever tried once.
pub fn arrows_mono(g: &OrderedGraph, q: ArrowQuery, budget: u64) -> Result<ArrowVerdict, SearchError> {
    let q = ArrowQuery::new(q.ell, q.colours)?;
    let mut solver = ArrowSolver::new(g, q, budget)?;
    Ok(match solver.solve() {
        Solve::Sat => ArrowVerdict::Avoided {
            colouring: solver
                .assigned
                .iter()
                .map(|c| c.expect("complete assignment") as Colour)
                .collect(),
            nodes_explored: solver.nodes,
        },
        Solve::Unsat => ArrowVerdict::Arrows {
            nodes_explored: solver.nodes,
        },
        Solve::Budget => ArrowVerdict::ResourceLimit {
            nodes_explored: solver.nodes,
        },
    })
}

#[derive(PartialEq)]
enum Solve {
    Sat,
    Unsat,
    Budget,
}

struct ArrowSolver {
    colours: usize,
    per_clique: usize,
    /// Edge indices of each `ℓ`-clique.
    cliques: Vec<Vec<usize>>,
    /// Cliques containing each edge.
    edge_cliques: Vec<Vec<usize>>,
    /// `counts[k * colours + c]`: edges of clique `k` coloured `c`.
    counts: Vec<u32>,
    domains: Vec<u32>,
    assigned: Vec<Option<u8>>,
    /// Colours `0..palette_used` have appeared so far.
    palette_used: usize,
    /// `(edge, previous domain)` for undo.
    trail: Vec<(usize, u32)>,
    nodes: u64,
    budget: u64,
}

impl ArrowSolver {
    fn new(g: &OrderedGraph, q: ArrowQuery, budget: u64) -> Result<Self, SearchError> {
        let m = g.edge_count();
        let mut cliques = Vec::new();
        let mut edge_cliques = vec![Vec::new(); m];
        for tuple in g.cliques(q.ell, None)? {
            let k = cliques.len();
            let mut edges = Vec::with_capacity(q.ell * (q.ell - 1) / 2);
            for (i, &a) in tuple.iter().enumerate() {
                for &b in &tuple[i + 1..] {
                    let e = g.edge_index(a, b).expect("clique edge");
                    edges.push(e);
                    edge_cliques[e].push(k);
                }
            }
            cliques.push(edges);
        }
        let full = if q.colours == 32 { u32::MAX } else { (1u32 << q.colours) - 1 };
        Ok(Self {
            colours: q.colours,
            per_clique: q.ell * (q.ell - 1) / 2,
            counts: vec![0; cliques.len() * q.colours],
            cliques,
            edge_cliques,
            domains: vec![full; m],
            assigned: vec![None; m],
            palette_used: 0,
            trail: Vec::new(),
            nodes: 0,
            budget,
        })
    }

    fn pick_edge(&self) -> Option<usize> {
        (0..self.assigned.len())
            .filter(|&e| self.assigned[e].is_none())
            .min_by_key(|&e| {
                (
                    self.domains[e].count_ones(),
                    std::cmp::Reverse(self.edge_cliques[e].len()),
                    e,
                )
            })
    }

    fn solve(&mut self) -> Solve {
        let Some(e) = self.pick_edge() else {
            return Solve::Sat;
        };
        let domain = self.domains[e];
        let limit = (self.palette_used + 1).min(self.colours);
        for c in 0..limit {
            if domain >> c & 1 == 0 {
                continue;
            }
            if self.nodes >= self.budget {
                return Solve::Budget;
            }
            self.nodes += 1;
            let mark = self.trail.len();
            let palette_before = self.palette_used;
            self.palette_used = self.palette_used.max(c + 1);
            let ok = self.assign(e, c);
            if ok {
                match self.solve() {
                    Solve::Unsat => {}
                    other => return other,
                }
            }
            self.unassign(e, c, mark);
            self.palette_used = palette_before;
        }
        Solve::Unsat
    }

    /// Colours `e` with `c` and propagates; `false` on a wipe-out. State is
    /// left for [`Self::unassign`] to roll back either way.
    fn assign(&mut self, e: usize, c: usize) -> bool {
        self.assigned[e] = Some(c as u8);
        let mut ok = true;
        for i in 0..self.edge_cliques[e].len() {
            let k = self.edge_cliques[e][i];
            let slot = k * self.colours + c;
            self.counts[slot] += 1;
            let count = self.counts[slot] as usize;
            if count == self.per_clique {
                ok = false;
            } else if count + 1 == self.per_clique && ok {
                let last = self.cliques[k]
                    .iter()
                    .copied()
                    .find(|&f| self.assigned[f].is_none());
                if let Some(f) = last {
                    let before = self.domains[f];
                    if before >> c & 1 == 1 {
                        self.trail.push((f, before));
                        self.domains[f] = before & !(1 << c);
                        if self.domains[f] == 0 {
                            ok = false;
                        }
                    }
                }
            }
        }
        ok
    }

    fn unassign(&mut self, e: usize, c: usize, mark: usize) {
        for &k in &self.edge_cliques[e] {
            self.counts[k * self.colours + c] -= 1;
        }
        self.assigned[e] = None;
        while self.trail.len() > mark {
            let (f, d) = self.trail.pop().expect("trail entry");
            self.domains[f] = d;
        }
    }
}

/// Report of [`canonical_arrow_exhaustive`].
#[derive(Clone, Debug, PartialEq)]
pub struct ExhaustiveReport {
    pub arrows: bool,
    /// Edge partitions examined (all of them when `arrows` holds).
    pub partitions_checked: u128,
    /// A colouring with no canonical `K_ℓ`, aligned with `host.edges()`.
    pub counterexample: Option<Vec<Colour>>,
}

/// Decides `G →* (K_ℓ)` by checking every partition of `E(G)` into colour
/// classes, i.e. every colouring up to renaming of colours.
pub fn canonical_arrow_exhaustive(g: &OrderedGraph, ell: usize) -> Result<ExhaustiveReport, SearchError> {
    if ell < 3 {
        return Err(SearchError::CliqueTooSmall(ell));
    }
    if g.edge_count() > EXHAUSTIVE_EDGE_LIMIT {
        return Err(SearchError::TooManyEdges(g.edge_count()));
    }
    let cliques: Vec<Vec<Vertex>> = g.cliques(ell, None)?.collect();
    let mut rgs = RestrictedGrowth::new(g.edge_count());
    let mut checked = 0u128;
    while rgs.advance() {
        checked += 1;
        let colours: Vec<Colour> = rgs.current().iter().map(|&c| c as Colour).collect();
        let phi = EdgeColouring::from_vec(g, colours).expect("one colour per edge");
        let canonical = cliques
            .iter()
            .any(|t| phi.classify_copy(t).expect("clique").is_canonical());
        if !canonical {
            return Ok(ExhaustiveReport {
                arrows: false,
                partitions_checked: checked,
                counterexample: Some(phi.colours().to_vec()),
            });
        }
    }
    Ok(ExhaustiveReport {
        arrows: true,
        partitions_checked: checked,
        counterexample: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::{generate_colouring, AdversaryKind, AdversarySpec};
    use crate::graph::gnp_generate;
    use rand::Rng;

    /// Enumerates all `r^|E|` colourings looking for one without a
    /// monochromatic `K_ℓ`.
    fn brute_arrows(g: &OrderedGraph, ell: usize, r: usize) -> bool {
        let cliques: Vec<Vec<usize>> = g
            .cliques(ell, None)
            .unwrap()
            .map(|t| {
                let mut es = Vec::new();
                for (i, &a) in t.iter().enumerate() {
                    for &b in &t[i + 1..] {
                        es.push(g.edge_index(a, b).unwrap());
                    }
                }
                es
            })
            .collect();
        let m = g.edge_count();
        let total = (r as u64).pow(m as u32);
        let mut colours = vec![0usize; m];
        for code in 0..total {
            let mut x = code;
            for c in colours.iter_mut() {
                *c = (x % r as u64) as usize;
                x /= r as u64;
            }
            let mono = cliques.iter().any(|es| es.iter().all(|&e| colours[e] == colours[es[0]]));
            if !mono {
                return false;
            }
        }
        true
    }

    fn triangle_free_witness_ok(g: &OrderedGraph, ell: usize, colouring: &[Colour]) -> bool {
        g.cliques(ell, None).unwrap().all(|t| {
            let phi = EdgeColouring::from_vec(g, colouring.to_vec()).unwrap();
            !phi.classify_copy(&t).unwrap().contains(PatternTag::Monochromatic)
        })
    }

    #[test]
    fn canonical_search_examples() {
        let k4 = OrderedGraph::complete(4);
        let mono = EdgeColouring::constant(&k4, 7);
        let out = find_canonical_copy(&mono, 4, None).unwrap();
        assert!(out.found);
        assert!(out.witness.unwrap().tags.contains(PatternTag::Monochromatic));

        let c6 = OrderedGraph::from_edges(6, (1..=6).map(|i| (i, i % 6 + 1))).unwrap();
        let phi = EdgeColouring::constant(&c6, 0);
        assert!(!find_canonical_copy(&phi, 3, None).unwrap().found);

        // Edges in order 12,13,14,23,24,34.
        let phi = EdgeColouring::from_vec(&k4, vec![1, 2, 3, 1, 4, 5]).unwrap();
        // Triangles: 123 → (1,2,1) none; 124 → (1,3,4) rainbow.
        let out = find_canonical_copy(&phi, 3, None).unwrap();
        let w = out.witness.unwrap();
        assert_eq!(w.vertices, vec![1, 2, 4]);
        assert!(w.tags.contains(PatternTag::Rainbow));
        assert!(w.verify(&phi));
        assert!(matches!(find_canonical_copy(&phi, 2, None), Err(SearchError::CliqueTooSmall(2))));
    }

    #[test]
    fn canonical_search_respects_subset() {
        let k6 = OrderedGraph::complete(6);
        let phi = EdgeColouring::constant(&k6, 0);
        let u = VertexSet::new(6, [2, 5, 6]).unwrap();
        let w = find_canonical_copy(&phi, 3, Some(&u)).unwrap().witness.unwrap();
        assert_eq!(w.vertices, vec![2, 5, 6]);
    }

    #[test]
    fn rainbow_search_examples() {
        let g = gnp_generate(20, 0.6, 3).unwrap().graph;
        let inj = generate_colouring(&g, &AdversarySpec::new(AdversaryKind::Injective, 0).unwrap());
        let out = find_rainbow_copy(&inj, 4, None).unwrap();
        assert!(out.found);
        let first = g.cliques(4, None).unwrap().next().unwrap();
        assert_eq!(out.witness.as_ref().unwrap().vertices, first);

        let mono = EdgeColouring::constant(&g, 1);
        assert!(!find_rainbow_copy(&mono, 3, None).unwrap().found);
    }

    #[test]
    fn rainbow_search_matches_filtered_enumeration() {
        let mut rng = crate::rng::stream(5);
        for seed in 0..40 {
            let g = gnp_generate(16, 0.6, seed).unwrap().graph;
            let r = rng.gen_range(2..12);
            let phi = EdgeColouring::from_fn(&g, |_| rng.gen_range(0..r));
            for ell in 3..=4 {
                let expected = g
                    .cliques(ell, None)
                    .unwrap()
                    .find(|t| phi.classify_copy(t).unwrap().contains(PatternTag::Rainbow));
                let got = find_rainbow_copy(&phi, ell, None).unwrap();
                assert_eq!(got.witness.map(|w| w.vertices), expected, "seed {seed} ell {ell}");
            }
        }
    }

    #[test]
    fn greedy_proper_rainbow_fixture() {
        let g = gnp_generate(60, 0.5, 2024).unwrap().graph;
        let phi = generate_colouring(&g, &AdversarySpec::new(AdversaryKind::GreedyProper, 0).unwrap());
        let out = find_rainbow_copy(&phi, 4, None).unwrap();
        let w = out.witness.expect("dense graph has a rainbow K4");
        assert!(w.verify(&phi));
        assert!(w.tags.contains(PatternTag::Rainbow));
    }

    #[test]
    fn arrows_small_cliques() {
        let q = ArrowQuery::new(3, 2).unwrap();
        let k6 = OrderedGraph::complete(6);
        assert_eq!(arrows_mono(&k6, q, DEFAULT_NODE_BUDGET).unwrap().decided(), Some(true));
        assert!(brute_arrows(&k6, 3, 2));

        let k5 = OrderedGraph::complete(5);
        match arrows_mono(&k5, q, DEFAULT_NODE_BUDGET).unwrap() {
            ArrowVerdict::Avoided { colouring, .. } => {
                assert!(triangle_free_witness_ok(&k5, 3, &colouring));
            }
            other => panic!("expected a witness, got {other:?}"),
        }
        assert!(!brute_arrows(&k5, 3, 2));

        let c5 = OrderedGraph::from_edges(5, (1..=5).map(|i| (i, i % 5 + 1))).unwrap();
        for r in 2..=4 {
            let v = arrows_mono(&c5, ArrowQuery::new(3, r).unwrap(), 1000).unwrap();
            assert_eq!(v.decided(), Some(false));
        }
    }

    #[test]
    fn arrows_budget_is_reported() {
        let k6 = OrderedGraph::complete(6);
        let v = arrows_mono(&k6, ArrowQuery::new(3, 2).unwrap(), 3).unwrap();
        assert_eq!(v, ArrowVerdict::ResourceLimit { nodes_explored: 3 });
        assert!(ArrowQuery::new(3, 1).is_err());
        assert!(ArrowQuery::new(2, 2).is_err());
    }

    #[test]
    fn arrows_agrees_with_brute_force_on_small_graphs() {
        for seed in 0..60 {
            let g = gnp_generate(7, 0.55, seed).unwrap().graph;
            if g.edge_count() > 12 {
                continue;
            }
            let got = arrows_mono(&g, ArrowQuery::new(3, 2).unwrap(), DEFAULT_NODE_BUDGET).unwrap();
            assert_eq!(got.decided(), Some(brute_arrows(&g, 3, 2)), "seed {seed}");
            if let ArrowVerdict::Avoided { colouring, .. } = got {
                assert!(triangle_free_witness_ok(&g, 3, &colouring));
            }
        }
        for seed in 0..20 {
            let g = gnp_generate(6, 0.5, 100 + seed).unwrap().graph;
            if g.edge_count() > 9 {
                continue;
            }
            let got = arrows_mono(&g, ArrowQuery::new(3, 3).unwrap(), DEFAULT_NODE_BUDGET).unwrap();
            assert_eq!(got.decided(), Some(brute_arrows(&g, 3, 3)), "seed {seed}");
        }
    }

    #[test]
    fn arrows_is_monotone_under_edge_addition() {
        let k6 = OrderedGraph::complete(6);
        let q = ArrowQuery::new(3, 2).unwrap();
        let k6_minus = OrderedGraph::from_edges(6, k6.edges().iter().skip(1).map(|e| (e.u, e.v))).unwrap();
        // K6 minus an edge does not arrow; adding it back does.
        assert_eq!(arrows_mono(&k6_minus, q, DEFAULT_NODE_BUDGET).unwrap().decided(), Some(false));
        let k7 = OrderedGraph::complete(7);
        assert_eq!(arrows_mono(&k7, q, DEFAULT_NODE_BUDGET).unwrap().decided(), Some(true));
    }

    #[test]
    fn exhaustive_canonical_arrow() {
        let k4 = OrderedGraph::complete(4);
        let rep = canonical_arrow_exhaustive(&k4, 3).unwrap();
        assert!(rep.arrows);
        assert_eq!(rep.partitions_checked, 203);

        let k3 = OrderedGraph::complete(3);
        let rep = canonical_arrow_exhaustive(&k3, 3).unwrap();
        assert!(!rep.arrows);
        let bad = rep.counterexample.unwrap();
        // Pattern (a, b, a) on edges 12, 13, 23.
        assert_eq!(bad, vec![0, 1, 0]);

        let empty = OrderedGraph::empty(5);
        assert!(!canonical_arrow_exhaustive(&empty, 3).unwrap().arrows);
        assert_eq!(
            canonical_arrow_exhaustive(&OrderedGraph::complete(6), 3),
            Err(SearchError::TooManyEdges(15))
        );
    }
}
