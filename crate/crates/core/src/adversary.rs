//! Structured edge colourings used as adversaries in threshold experiments.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::colouring::{Colour, EdgeColouring};
use crate::graph::OrderedGraph;
use crate::rng;

/// Draws per edge before `BoundedRandom` falls back to a fresh colour.
pub const BOUNDED_RANDOM_MAX_DRAWS: usize = 100;

#[derive(Debug, Error, PartialEq)]
pub enum AdversaryError {
    #[error("random colouring needs r >= 1")]
    ZeroColours,
    #[error("bounded colouring needs lambda >= 1")]
    ZeroLambda,
    #[error("unknown adversary kind {0:?}")]
    UnknownKind(String),
    #[error("adversary {kind} requires the {field} parameter")]
    MissingParameter { kind: &'static str, field: &'static str },
    #[error("cannot parse adversary {0:?}")]
    Parse(String),
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum AdversaryKind {
    /// i.i.d. uniform colours from `{0, …, r−1}`.
    RandomR(u64),
    /// A fresh colour per edge in lexicographic order.
    Injective,
    /// `φ(uv) = min(u, v)`.
    MinOrder,
    /// `φ(uv) = max(u, v)`.
    MaxOrder,
    /// Lexicographic greedy proper colouring.
    GreedyProper,
    /// Random colouring with at most `lambda` edges of one colour at any
    /// vertex. `palette` defaults to `max(2, ⌈2Δ/λ⌉)`.
    BoundedRandom { lambda: usize, palette: Option<u64> },
}

impl AdversaryKind {
    pub fn name(&self) -> &'static str {
        match self {
            AdversaryKind::RandomR(_) => "random",
            AdversaryKind::Injective => "injective",
            AdversaryKind::MinOrder => "min_order",
            AdversaryKind::MaxOrder => "max_order",
            AdversaryKind::GreedyProper => "greedy_proper",
            AdversaryKind::BoundedRandom { .. } => "bounded_random",
        }
    }
}

impl fmt::Display for AdversaryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AdversaryKind::RandomR(r) => write!(f, "random:{r}"),
            AdversaryKind::BoundedRandom { lambda, palette: None } => write!(f, "bounded_random:{lambda}"),
            AdversaryKind::BoundedRandom { lambda, palette: Some(r) } => {
                write!(f, "bounded_random:{lambda}:{r}")
            }
            other => f.write_str(other.name()),
        }
    }
}

impl FromStr for AdversaryKind {
    type Err = AdversaryError;

    /// Accepts `random:R`, `injective`, `min_order`, `max_order`,
    /// `greedy_proper`, `bounded_random:LAMBDA[:R]` (short forms `min`,
    /// `max`, `greedy`, `bounded` also work).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.trim().split(':');
        let head = parts.next().unwrap_or_default().to_ascii_lowercase();
        let nums: Result<Vec<u64>, _> = parts.map(str::parse::<u64>).collect();
        let nums = nums.map_err(|_| AdversaryError::Parse(s.into()))?;
        let kind = match (head.as_str(), nums.as_slice()) {
            ("random", [r]) => AdversaryKind::RandomR(*r),
            ("injective", []) => AdversaryKind::Injective,
            ("min_order" | "min", []) => AdversaryKind::MinOrder,
            ("max_order" | "max", []) => AdversaryKind::MaxOrder,
            ("greedy_proper" | "greedy", []) => AdversaryKind::GreedyProper,
            ("bounded_random" | "bounded", [l]) => AdversaryKind::BoundedRandom {
                lambda: *l as usize,
                palette: None,
            },
            ("bounded_random" | "bounded", [l, r]) => AdversaryKind::BoundedRandom {
                lambda: *l as usize,
                palette: Some(*r),
            },
            _ => return Err(AdversaryError::Parse(s.into())),
        };
        kind.validate()?;
        Ok(kind)
    }
}

impl AdversaryKind {
    fn validate(&self) -> Result<(), AdversaryError> {
        match *self {
            AdversaryKind::RandomR(0) => Err(AdversaryError::ZeroColours),
            AdversaryKind::BoundedRandom { lambda: 0, .. } => Err(AdversaryError::ZeroLambda),
            AdversaryKind::BoundedRandom { palette: Some(0), .. } => Err(AdversaryError::ZeroColours),
            _ => Ok(()),
        }
    }
}

/// An adversary kind together with the seed for its random choices.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(try_from = "AdversaryConfig", into = "AdversaryConfig")]
pub struct AdversarySpec {
    pub kind: AdversaryKind,
    pub seed: u64,
}

impl AdversarySpec {
    pub fn new(kind: AdversaryKind, seed: u64) -> Result<Self, AdversaryError> {
        kind.validate()?;
        Ok(Self { kind, seed })
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }
}

/// JSON shape `{"kind": "...", "r": .., "lambda": .., "seed": ..}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AdversaryConfig {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

impl TryFrom<AdversaryConfig> for AdversarySpec {
    type Error = AdversaryError;

    fn try_from(c: AdversaryConfig) -> Result<Self, Self::Error> {
        let kind = match c.kind.to_ascii_lowercase().as_str() {
            "random" | "random_r" => AdversaryKind::RandomR(c.r.ok_or(AdversaryError::MissingParameter {
                kind: "random",
                field: "r",
            })?),
            "injective" => AdversaryKind::Injective,
            "min_order" | "min" => AdversaryKind::MinOrder,
            "max_order" | "max" => AdversaryKind::MaxOrder,
            "greedy_proper" | "greedy" => AdversaryKind::GreedyProper,
            "bounded_random" | "bounded" => AdversaryKind::BoundedRandom {
                lambda: c.lambda.ok_or(AdversaryError::MissingParameter {
                    kind: "bounded_random",
                    field: "lambda",
                })?,
                palette: c.r,
            },
            other => return Err(AdversaryError::UnknownKind(other.into())),
        };
        AdversarySpec::new(kind, c.seed)
    }
}

impl From<AdversarySpec> for AdversaryConfig {
    fn from(s: AdversarySpec) -> Self {
        let (r, lambda) = match s.kind {
            AdversaryKind::RandomR(r) => (Some(r), None),
            AdversaryKind::BoundedRandom { lambda, palette } => (palette, Some(lambda)),
            _ => (None, None),
        };
        AdversaryConfig {
            kind: s.kind.name().into(),
            r,
            lambda,
            seed: s.seed,
        }
    }
}

/// Colours `g` according to `spec`. Deterministic in `(g, spec)`.
pub fn generate_colouring<'g>(g: &'g OrderedGraph, spec: &AdversarySpec) -> EdgeColouring<'g> {
    match spec.kind {
        AdversaryKind::RandomR(r) => {
            let mut rng = rng::stream(spec.seed);
            EdgeColouring::from_fn(g, |_| rng.gen_range(0..r))
        }
        AdversaryKind::Injective => {
            let mut next: Colour = 0;
            EdgeColouring::from_fn(g, |_| {
                next += 1;
                next - 1
            })
        }
        AdversaryKind::MinOrder => EdgeColouring::from_fn(g, |e| e.low() as Colour),
        AdversaryKind::MaxOrder => EdgeColouring::from_fn(g, |e| e.high() as Colour),
        AdversaryKind::GreedyProper => greedy_proper(g),
        AdversaryKind::BoundedRandom { lambda, palette } => bounded_random(g, lambda, palette, spec.seed),
    }
}

/// Scans edges lexicographically and gives each the least colour absent at
/// both endpoints.
fn greedy_proper(g: &OrderedGraph) -> EdgeColouring<'_> {
    let mut used: Vec<Vec<bool>> = vec![Vec::new(); g.n() + 1];
    EdgeColouring::from_fn(g, |e| {
        let (a, b) = (&used[e.u], &used[e.v]);
        let c = (0..)
            .find(|&c| !a.get(c).copied().unwrap_or(false) && !b.get(c).copied().unwrap_or(false))
            .expect("unbounded search");
        for v in [e.u, e.v] {
            if used[v].len() <= c {
                used[v].resize(c + 1, false);
            }
            used[v][c] = true;
        }
        c as Colour
    })
}

/// Draws each edge's colour uniformly from the palette, redrawing while an
/// endpoint already has `lambda` edges of that colour. After
/// [`BOUNDED_RANDOM_MAX_DRAWS`] rejected draws the edge gets a fresh colour
/// above the palette.
fn bounded_random(g: &OrderedGraph, lambda: usize, palette: Option<u64>, seed: u64) -> EdgeColouring<'_> {
    let max_degree = g.vertices().map(|v| g.degree(v)).max().unwrap_or(0);
    let palette = palette.unwrap_or_else(|| ((2 * max_degree).div_ceil(lambda) as u64).max(2));
    let mut rng = rng::stream(seed);
    let mut load: HashMap<(usize, Colour), usize> = HashMap::new();
    let mut fresh = palette;
    EdgeColouring::from_fn(g, |e| {
        let fits = |load: &HashMap<(usize, Colour), usize>, c: Colour| {
            [e.u, e.v]
                .iter()
                .all(|&v| load.get(&(v, c)).copied().unwrap_or(0) < lambda)
        };
        let mut chosen = None;
        for _ in 0..BOUNDED_RANDOM_MAX_DRAWS {
            let c = rng.gen_range(0..palette);
            if fits(&load, c) {
                chosen = Some(c);
                break;
            }
        }
        let c = chosen.unwrap_or_else(|| {
            fresh += 1;
            fresh - 1
        });
        for v in [e.u, e.v] {
            *load.entry((v, c)).or_insert(0) += 1;
        }
        c
    })
}

/// No two incident edges share a colour.
pub fn verify_properness(phi: &EdgeColouring<'_>) -> bool {
    max_colour_multiplicity(phi) <= 1
}

/// `max_{v, c} d_c(v, V)`.
pub fn max_colour_multiplicity(phi: &EdgeColouring<'_>) -> usize {
    let mut load: HashMap<(usize, Colour), usize> = HashMap::new();
    for (e, c) in phi.iter() {
        *load.entry((e.u, c)).or_insert(0) += 1;
        *load.entry((e.v, c)).or_insert(0) += 1;
    }
    load.into_values().max().unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{gnp_generate, VertexSet};

    fn spec(kind: AdversaryKind, seed: u64) -> AdversarySpec {
        AdversarySpec::new(kind, seed).unwrap()
    }

    #[test]
    fn min_order_on_triangle() {
        let k3 = OrderedGraph::complete(3);
        let phi = generate_colouring(&k3, &spec(AdversaryKind::MinOrder, 0));
        assert_eq!(phi.colours(), &[1, 1, 2]);
        assert!(!verify_properness(&phi));
        let max = generate_colouring(&k3, &spec(AdversaryKind::MaxOrder, 0));
        assert_eq!(max.colours(), &[2, 3, 3]);
    }

    #[test]
    fn injective_and_greedy_on_small_cliques() {
        let k4 = OrderedGraph::complete(4);
        let inj = generate_colouring(&k4, &spec(AdversaryKind::Injective, 0));
        assert_eq!(inj.palette_size(), 6);
        assert!(verify_properness(&inj));
        assert_eq!(max_colour_multiplicity(&inj), 1);

        let k3 = OrderedGraph::complete(3);
        let gp = generate_colouring(&k3, &spec(AdversaryKind::GreedyProper, 0));
        assert!(verify_properness(&gp));
        assert_eq!(gp.colours(), &[0, 1, 2]);

        let k5 = OrderedGraph::complete(5);
        assert_eq!(max_colour_multiplicity(&EdgeColouring::constant(&k5, 0)), 4);
    }

    #[test]
    fn greedy_proper_is_proper_on_random_graphs() {
        for seed in 0..100 {
            let g = gnp_generate(40, 0.3, seed).unwrap().graph;
            let phi = generate_colouring(&g, &spec(AdversaryKind::GreedyProper, seed));
            assert!(verify_properness(&phi), "seed {seed}");
        }
    }

    #[test]
    fn bounded_random_respects_lambda() {
        for seed in 0..30 {
            let g = gnp_generate(40, 0.5, seed).unwrap().graph;
            for lambda in 1..=3 {
                for palette in [None, Some(3)] {
                    let s = spec(AdversaryKind::BoundedRandom { lambda, palette }, seed);
                    let phi = generate_colouring(&g, &s);
                    assert!(max_colour_multiplicity(&phi) <= lambda);
                    assert_eq!(generate_colouring(&g, &s), phi);
                }
            }
        }
    }

    #[test]
    fn random_r_uses_at_most_r_colours_and_is_deterministic() {
        let g = OrderedGraph::complete(20);
        let s = spec(AdversaryKind::RandomR(3), 11);
        let phi = generate_colouring(&g, &s);
        assert!(phi.colours().iter().all(|&c| c < 3));
        assert_eq!(phi, generate_colouring(&g, &s));
        assert_ne!(phi, generate_colouring(&g, &s.with_seed(12)));
    }

    #[test]
    fn min_order_is_unbounded_at_vertex_one() {
        let n = 30;
        let g = OrderedGraph::complete(n);
        let phi = generate_colouring(&g, &spec(AdversaryKind::MinOrder, 0));
        let u = VertexSet::full(n);
        // δ·p·n = 6 < n − 1.
        assert!(!phi.is_delta_p_bounded(&u, 0.2, 1.0));
        assert_eq!(phi.colour_degree(1, &u, 1), n - 1);
    }

    #[test]
    fn spec_parsing() {
        assert_eq!("random:5".parse::<AdversaryKind>().unwrap(), AdversaryKind::RandomR(5));
        assert_eq!("greedy".parse::<AdversaryKind>().unwrap(), AdversaryKind::GreedyProper);
        assert_eq!(
            "bounded_random:3:10".parse::<AdversaryKind>().unwrap(),
            AdversaryKind::BoundedRandom { lambda: 3, palette: Some(10) }
        );
        assert_eq!("random:0".parse::<AdversaryKind>(), Err(AdversaryError::ZeroColours));
        assert!("rainbowish".parse::<AdversaryKind>().is_err());

        let json = r#"{"kind": "bounded_random", "lambda": 2, "seed": 9}"#;
        let s: AdversarySpec = serde_json::from_str(json).unwrap();
        assert_eq!(s, spec(AdversaryKind::BoundedRandom { lambda: 2, palette: None }, 9));
        let back = serde_json::to_string(&s).unwrap();
        assert_eq!(serde_json::from_str::<AdversarySpec>(&back).unwrap(), s);
        assert!(serde_json::from_str::<AdversarySpec>(r#"{"kind": "random"}"#).is_err());
    }
}
