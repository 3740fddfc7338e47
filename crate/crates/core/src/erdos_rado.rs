//! The constructive Erdős–Rado procedure on complete graphs.
//!
//! Given a colouring of `K_n`, the driver first tries to grow a sequence of
//! nested one-sided monochromatic neighbourhoods `(v_i, c_i, ⋄_i)`. A full
//! sequence of length `L = 2(ℓ−2)² + 2` always contains a monochromatic,
//! min-coloured or max-coloured `K_ℓ`, extracted by pigeonhole. If the
//! sequence stalls, the colouring is bounded on the surviving set and the
//! driver looks for a rainbow `K_ℓ` there by random vertex sampling with
//! conflict deletion. The guarantee behind both branches needs `n` far beyond
//! anything computable, so the driver falls back to exhaustive search and
//! reports which branch produced the witness.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::colouring::{CanonicalWitness, Colour, Direction, EdgeColouring, PatternTag};
use crate::graph::{Vertex, VertexSet};
use crate::rng;
use crate::search::{find_canonical_copy, find_rainbow_copy, SearchError};

/// Default number of sampling rounds in [`rainbow_by_sampling`].
pub const DEFAULT_SAMPLING_ROUNDS: usize = 50;

#[derive(Debug, Error, PartialEq)]
pub enum ErError {
    #[error("host graph is not complete")]
    NotComplete,
    #[error("clique size {0} must be at least 3")]
    CliqueTooSmall(usize),
    #[error("host has {n} vertices, fewer than ell = {ell}")]
    TooFewVertices { n: usize, ell: usize },
    #[error("sequence has {got} steps, extraction needs {needed}")]
    SequenceTooShort { got: usize, needed: usize },
    #[error("final surviving set is empty")]
    EmptyFinalSet,
    #[error("colouring is not {delta}-bounded on the given set: vertex {vertex} has {degree} edges of colour {colour}")]
    NotBounded {
        delta: f64,
        vertex: Vertex,
        colour: Colour,
        degree: usize,
    },
    #[error("extracted copy {vertices:?} does not display {claimed}")]
    WitnessMismatch { vertices: Vec<Vertex>, claimed: PatternTag },
    #[error("no canonical K_{0} exists in this colouring")]
    NoWitness(usize),
    #[error(transparent)]
    Search(#[from] SearchError),
}

/// Parameters of the procedure for target clique size `ell`.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct ErConstants {
    pub ell: usize,
    pub delta: f64,
    /// Number of sequence steps to build.
    pub steps: usize,
}

impl ErConstants {
    /// `δ = 1/(4ℓ³)` and `L = 2(ℓ−2)² + 2`.
    pub fn for_clique(ell: usize) -> Self {
        let l = ell as f64;
        Self {
            ell,
            delta: 1.0 / (4.0 * l * l * l),
            steps: min_sequence_len(ell),
        }
    }

    /// `log₂` of the vertex count `2^{6ℓ²(log₂ℓ+1)}` under which the
    /// procedure is guaranteed to succeed without fallback. Informational.
    pub fn guaranteed_n_log2(&self) -> f64 {
        let l = self.ell as f64;
        6.0 * l * l * (l.log2() + 1.0)
    }
}

/// `2(ℓ−2)² + 2`, the sequence length the pigeonhole extraction needs.
pub fn min_sequence_len(ell: usize) -> usize {
    2 * (ell - 2) * (ell - 2) + 2
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct SequenceStep {
    pub vertex: Vertex,
    pub colour: Colour,
    pub direction: Direction,
    /// `d^⋄_c(v, S)` in the set the step was taken from.
    pub degree: usize,
}

/// Steps `(v_i, c_i, ⋄_i)` with the surviving intersection after each one.
#[derive(Clone, PartialEq, Debug)]
pub struct NeighbourhoodSequence {
    pub n: usize,
    pub delta: f64,
    pub steps: Vec<SequenceStep>,
    /// `surviving[i]` is the set left after step `i + 1`.
    pub surviving: Vec<VertexSet>,
}

impl NeighbourhoodSequence {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn final_set(&self) -> Option<&VertexSet> {
        self.surviving.last()
    }

    /// `|S_i| > (δ/2)^i · n` after every step `i`.
    pub fn satisfies_density_invariant(&self) -> bool {
        self.surviving.iter().enumerate().all(|(i, s)| {
            s.len() as f64 > (self.delta / 2.0).powi(i as i32 + 1) * self.n as f64
        })
    }

    /// Each `v_{i+1}` lies in `S_i`, `S_{i+1} = N^{⋄}_{c}(v_{i+1}) ∩ S_i`, and
    /// `v_i ⋄_i w` for every later survivor `w`.
    pub fn is_consistent(&self, phi: &EdgeColouring<'_>) -> bool {
        let mut current = VertexSet::full(self.n);
        for (step, next) in self.steps.iter().zip(&self.surviving) {
            if !current.contains(step.vertex) {
                return false;
            }
            let expected = directed_neighbourhood(phi, step.vertex, step.colour, step.direction, &current);
            if &expected != next {
                return false;
            }
            current = expected;
        }
        true
    }
}

/// How [`build_sequence`] ended.
#[derive(Clone, PartialEq, Debug)]
pub enum SequenceBuild {
    /// All requested steps were taken.
    Complete(NeighbourhoodSequence),
    /// No `(v, c, ⋄)` cleared the threshold inside `surviving`; on that set
    /// every `d^⋄_c(v, S) ≤ δ|S|/2`, so `φ` is `δ`-bounded there.
    Bounded {
        partial: NeighbourhoodSequence,
        surviving: VertexSet,
    },
}

fn directed_neighbourhood(
    phi: &EdgeColouring<'_>,
    v: Vertex,
    c: Colour,
    dir: Direction,
    within: &VertexSet,
) -> VertexSet {
    let mut out = VertexSet::empty(within.universe());
    for w in within.iter() {
        if dir.holds(v, w) && phi.colour(v, w) == Some(c) {
            out.insert(w);
        }
    }
    out
}

/// Greedily takes `consts.steps` steps, each time choosing inside the current
/// surviving set `S` the triple `(v, c, ⋄)` with the largest `d^⋄_c(v, S)`
/// among those with `d^⋄_c(v, S) > δ|S|/2`. Ties go to the smaller vertex,
/// then the smaller colour, then `<` before `>`.
pub fn build_sequence(phi: &EdgeColouring<'_>, consts: &ErConstants) -> Result<SequenceBuild, ErError> {
    let g = phi.host();
    if !g.is_complete() {
        return Err(ErError::NotComplete);
    }
    let n = g.n();
    let mut seq = NeighbourhoodSequence {
        n,
        delta: consts.delta,
        steps: Vec::with_capacity(consts.steps),
        surviving: Vec::with_capacity(consts.steps),
    };
    let mut current = VertexSet::full(n);
    for _ in 0..consts.steps {
        let threshold = consts.delta * current.len() as f64 / 2.0;
        let mut best: Option<SequenceStep> = None;
        for v in current.iter() {
            for dir in [Direction::Less, Direction::Greater] {
                let profile: BTreeMap<Colour, usize> =
                    phi.directed_colour_degrees(v, &current, dir).into_iter().collect();
                for (&c, &d) in &profile {
                    if d as f64 <= threshold {
                        continue;
                    }
                    let better = match &best {
                        None => true,
                        Some(b) => (d, std::cmp::Reverse((v, c, dir))) > (b.degree, std::cmp::Reverse((b.vertex, b.colour, b.direction))),
                    };
                    if better {
                        best = Some(SequenceStep {
                            vertex: v,
                            colour: c,
                            direction: dir,
                            degree: d,
                        });
                    }
                }
            }
        }
        let Some(step) = best else {
            return Ok(SequenceBuild::Bounded {
                partial: seq,
                surviving: current,
            });
        };
        current = directed_neighbourhood(phi, step.vertex, step.colour, step.direction, &current);
        debug_assert_eq!(current.len(), step.degree);
        seq.steps.push(step);
        seq.surviving.push(current.clone());
        debug_assert!(
            seq.satisfies_density_invariant(),
            "surviving set fell below (δ/2)^i·n after step {}",
            seq.len()
        );
    }
    Ok(SequenceBuild::Complete(seq))
}

/// Pigeonhole extraction of a canonical `K_ℓ` from a full sequence.
///
/// Picks the majority comparator `⋄` (ties to `<`) and its first `(ℓ−2)²+1`
/// steps, plus the smallest vertex `z` of the final surviving set. If a colour
/// repeats `ℓ−1` times among the picked steps, those vertices and `z` form a
/// monochromatic `K_ℓ`; otherwise the first `ℓ−1` distinct colours give a
/// min-coloured (`⋄ = <`) or max-coloured (`⋄ = >`) `K_ℓ`.
pub fn extract_canonical(
    phi: &EdgeColouring<'_>,
    seq: &NeighbourhoodSequence,
    ell: usize,
) -> Result<CanonicalWitness, ErError> {
    if ell < 3 {
        return Err(ErError::CliqueTooSmall(ell));
    }
    let needed = min_sequence_len(ell);
    if seq.len() < needed {
        return Err(ErError::SequenceTooShort {
            got: seq.len(),
            needed,
        });
    }
    let last = seq
        .final_set()
        .and_then(|s| s.iter().next())
        .ok_or(ErError::EmptyFinalSet)?;

    let block = (ell - 2) * (ell - 2) + 1;
    let less = seq.steps.iter().filter(|s| s.direction == Direction::Less).count();
    let dir = if less >= block { Direction::Less } else { Direction::Greater };
    let picked: Vec<&SequenceStep> = seq.steps.iter().filter(|s| s.direction == dir).take(block).collect();
    debug_assert_eq!(picked.len(), block);

    let mut by_colour: BTreeMap<Colour, Vec<Vertex>> = BTreeMap::new();
    for s in &picked {
        by_colour.entry(s.colour).or_default().push(s.vertex);
    }
    let (mut vertices, claimed) = match by_colour.values().find(|vs| vs.len() >= ell - 1) {
        Some(vs) => (vs[..ell - 1].to_vec(), PatternTag::Monochromatic),
        None => {
            let mut seen = Vec::new();
            let mut vs = Vec::new();
            for s in &picked {
                if !seen.contains(&s.colour) {
                    seen.push(s.colour);
                    vs.push(s.vertex);
                }
            }
            vs.truncate(ell - 1);
            let tag = match dir {
                Direction::Less => PatternTag::MinColoured,
                Direction::Greater => PatternTag::MaxColoured,
            };
            (vs, tag)
        }
    };
    vertices.push(last);
    vertices.sort_unstable();
    let witness = CanonicalWitness::from_copy(phi, vertices.clone())
        .map_err(|_| ErError::WitnessMismatch { vertices: vertices.clone(), claimed })?;
    if !witness.tags.contains(claimed) {
        return Err(ErError::WitnessMismatch { vertices, claimed });
    }
    Ok(witness)
}

/// Rainbow `K_ℓ` search for a `δ`-bounded colouring (`d_c(v, U) ≤ δ|U|`).
///
/// Each round keeps every vertex of `U` with probability `2ℓ/|U|`, then, in
/// lexicographic order, deletes the largest vertex of every surviving triple
/// with two same-coloured edges, followed by the largest vertex of every
/// surviving quadruple with two disjoint same-coloured edges. The first
/// rainbow `ℓ`-clique among the survivors is returned. `Ok(None)` after
/// `rounds` failed rounds.
pub fn rainbow_by_sampling(
    phi: &EdgeColouring<'_>,
    u: &VertexSet,
    ell: usize,
    delta: f64,
    seed: u64,
    rounds: usize,
) -> Result<Option<CanonicalWitness>, ErError> {
    if ell < 3 {
        return Err(ErError::CliqueTooSmall(ell));
    }
    let bound = delta * u.len() as f64;
    for v in u.iter() {
        if let Some((&colour, &degree)) = phi
            .colour_degrees(v, u)
            .iter()
            .max_by_key(|(&c, &d)| (d, std::cmp::Reverse(c)))
        {
            if degree as f64 > bound {
                return Err(ErError::NotBounded { delta, vertex: v, colour, degree });
            }
        }
    }
    if u.len() < ell {
        return Ok(None);
    }
    let keep = (2.0 * ell as f64 / u.len() as f64).min(1.0);
    let mut rng = rng::stream(seed);
    for _ in 0..rounds {
        let sample: Vec<Vertex> = u.iter().filter(|_| rng::bernoulli(&mut rng, keep)).collect();
        if sample.len() < ell {
            continue;
        }
        let survivors = delete_conflicts(phi, &sample);
        if survivors.len() < ell {
            continue;
        }
        let within = VertexSet::new(u.universe(), survivors).expect("subset of U");
        if let Some(w) = find_rainbow_copy(phi, ell, Some(&within))?.witness {
            return Ok(Some(w));
        }
    }
    Ok(None)
}

fn delete_conflicts(phi: &EdgeColouring<'_>, sample: &[Vertex]) -> Vec<Vertex> {
    let k = sample.len();
    let mut alive = vec![true; k];
    let col = |i: usize, j: usize| phi.colour(sample[i], sample[j]);
    let same = |a: Option<Colour>, b: Option<Colour>| a.is_some() && a == b;
    for a in 0..k {
        for b in a + 1..k {
            for c in b + 1..k {
                if !(alive[a] && alive[b] && alive[c]) {
                    continue;
                }
                let (ab, ac, bc) = (col(a, b), col(a, c), col(b, c));
                if same(ab, ac) || same(ab, bc) || same(ac, bc) {
                    alive[c] = false;
                }
            }
        }
    }
    for a in 0..k {
        for b in a + 1..k {
            for c in b + 1..k {
                for d in c + 1..k {
                    if !(alive[a] && alive[b] && alive[c] && alive[d]) {
                        continue;
                    }
                    if same(col(a, b), col(c, d)) || same(col(a, c), col(b, d)) || same(col(a, d), col(b, c)) {
                        alive[d] = false;
                    }
                }
            }
        }
    }
    sample
        .iter()
        .zip(alive)
        .filter_map(|(&v, keep)| keep.then_some(v))
        .collect()
}

/// Which part of the procedure produced a witness.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ErBranch {
    /// Pigeonhole extraction from a full neighbourhood sequence.
    Sequence,
    /// Random sampling on the bounded surviving set.
    Sampling,
    /// Exhaustive clique scan after both branches failed.
    Fallback,
}

impl ErBranch {
    pub fn name(self) -> &'static str {
        match self {
            ErBranch::Sequence => "sequence",
            ErBranch::Sampling => "sampling",
            ErBranch::Fallback => "fallback",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Debug)]
pub struct ErConfig {
    pub consts: ErConstants,
    pub seed: u64,
    pub rounds: usize,
}

impl ErConfig {
    pub fn for_clique(ell: usize) -> Self {
        Self {
            consts: ErConstants::for_clique(ell),
            seed: 0,
            rounds: DEFAULT_SAMPLING_ROUNDS,
        }
    }
}

#[derive(Clone, PartialEq, Debug)]
pub struct ErOutcome {
    pub witness: CanonicalWitness,
    pub branch: ErBranch,
    pub build: SequenceBuild,
}

/// Runs the procedure with default constants for `ell`.
pub fn er_find(phi: &EdgeColouring<'_>, ell: usize) -> Result<ErOutcome, ErError> {
    er_find_with(phi, &ErConfig::for_clique(ell))
}

pub fn er_find_with(phi: &EdgeColouring<'_>, config: &ErConfig) -> Result<ErOutcome, ErError> {
    let ell = config.consts.ell;
    if ell < 3 {
        return Err(ErError::CliqueTooSmall(ell));
    }
    let g = phi.host();
    if !g.is_complete() {
        return Err(ErError::NotComplete);
    }
    if g.n() < ell {
        return Err(ErError::TooFewVertices { n: g.n(), ell });
    }
    let build = build_sequence(phi, &config.consts)?;
    let attempt = match &build {
        SequenceBuild::Complete(seq) => Some((extract_canonical(phi, seq, ell)?, ErBranch::Sequence)),
        SequenceBuild::Bounded { surviving, .. } => {
            match rainbow_by_sampling(phi, surviving, ell, config.consts.delta, config.seed, config.rounds) {
                Ok(found) => found.map(|w| (w, ErBranch::Sampling)),
                Err(ErError::NotBounded { .. }) => None,
                Err(e) => return Err(e),
            }
        }
    };
    let (witness, branch) = match attempt {
        Some(hit) => hit,
        None => {
            let w = find_canonical_copy(phi, ell, None)?
                .witness
                .ok_or(ErError::NoWitness(ell))?;
            (w, ErBranch::Fallback)
        }
    };
    debug_assert!(witness.verify(phi));
    Ok(ErOutcome { witness, branch, build })
}
