use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;

use canonical_ramsey::adversary::{generate_colouring, max_colour_multiplicity, verify_properness, AdversaryKind, AdversarySpec};
use canonical_ramsey::cutnorm::{cutnorm_exact, cutnorm_heuristic, hom_density, hom_density_of_graph, PatternGraph, WeightedGraph};
use canonical_ramsey::erdos_rado::er_find;
use canonical_ramsey::search::find_canonical_copy;
use canonical_ramsey::{gnp_generate, Colour, Direction, Edge, EdgeColouring, OrderedGraph, PatternTag, VertexSet};

/// Edges grouped by an endpoint selector; the pattern holds when every group
/// is monochromatic and, for the strict form, groups use distinct colours.
fn grouped_pattern(edges: &[(Edge, Colour)], key: impl Fn(&Edge) -> usize, strict: bool) -> bool {
    let mut groups: BTreeMap<usize, BTreeSet<Colour>> = BTreeMap::new();
    for (e, c) in edges {
        groups.entry(key(e)).or_default().insert(*c);
    }
    if groups.values().any(|s| s.len() > 1) {
        return false;
    }
    let colours: BTreeSet<Colour> = groups.values().flatten().copied().collect();
    !strict || colours.len() == groups.len()
}

fn complete_with_colours(n: usize, colours: &[Colour]) -> (OrderedGraph, Vec<Colour>) {
    let g = OrderedGraph::complete(n);
    let m = g.edge_count();
    (g, colours[..m].to_vec())
}

fn brute_clique_count(g: &OrderedGraph, ell: usize) -> u128 {
    let n = g.n();
    let mut total = 0u128;
    for mask in 0u32..1 << n {
        if mask.count_ones() as usize != ell {
            continue;
        }
        let vs: Vec<usize> = (1..=n).filter(|v| mask >> (v - 1) & 1 == 1).collect();
        if g.is_clique(&vs) {
            total += 1;
        }
    }
    total * (1..=ell as u128).product::<u128>()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn classification_matches_grouping_definitions(
        ell in 3usize..=6,
        colours in prop::collection::vec(0u64..4, 15),
    ) {
        let (g, cols) = complete_with_colours(ell, &colours);
        let phi = EdgeColouring::from_vec(&g, cols).unwrap();
        let vs: Vec<usize> = (1..=ell).collect();
        let tags = phi.classify_copy(&vs).unwrap();
        let edges: Vec<(Edge, Colour)> = phi.iter().collect();
        let distinct: BTreeSet<Colour> = edges.iter().map(|&(_, c)| c).collect();
        prop_assert_eq!(tags.contains(PatternTag::Monochromatic), distinct.len() == 1);
        prop_assert_eq!(tags.contains(PatternTag::Rainbow), distinct.len() == edges.len());
        prop_assert_eq!(tags.contains(PatternTag::MinColoured), grouped_pattern(&edges, Edge::low, true));
        prop_assert_eq!(tags.contains(PatternTag::MaxColoured), grouped_pattern(&edges, Edge::high, true));
        prop_assert_eq!(tags.contains(PatternTag::NonStrictMin), grouped_pattern(&edges, Edge::low, false));
        prop_assert_eq!(tags.contains(PatternTag::NonStrictMax), grouped_pattern(&edges, Edge::high, false));
    }

    #[test]
    fn colour_degrees_partition_degrees(n in 4usize..=14, p in 0.2f64..=1.0, seed: u64, r in 1u64..=5) {
        let g = gnp_generate(n, p, seed).unwrap().graph;
        let phi = generate_colouring(&g, &AdversarySpec::new(AdversaryKind::RandomR(r), seed).unwrap());
        let u = VertexSet::new(n, (1..=n).filter(|v| (seed >> (v % 64)) & 1 == 1)).unwrap();
        for v in 1..=n {
            let total: usize = phi.colour_degrees(v, &u).values().sum();
            prop_assert_eq!(total, g.degree_into(v, &u));
            for c in 0..r {
                let less = phi.directed_colour_degree(v, &u, c, Direction::Less);
                let greater = phi.directed_colour_degree(v, &u, c, Direction::Greater);
                prop_assert_eq!(less + greater, phi.colour_degree(v, &u, c));
            }
        }
    }

    #[test]
    fn clique_counts_match_subset_scan(n in 3usize..=11, p in 0.3f64..=0.9, seed: u64, ell in 3usize..=5) {
        let g = gnp_generate(n, p, seed).unwrap().graph;
        prop_assert_eq!(g.count_cliques(ell).unwrap(), brute_clique_count(&g, ell));
        let density = hom_density_of_graph(&g, &PatternGraph::complete(ell));
        let direct = hom_density(&WeightedGraph::indicator(&g), &PatternGraph::complete(ell));
        prop_assert!((density - direct).abs() < 1e-12);
    }

    #[test]
    fn clean_subgraph_is_idempotent_and_k_free(n in 5usize..=22, p in 0.3f64..=0.9, seed: u64, ell in 3usize..=5) {
        let g = gnp_generate(n, p, seed).unwrap().graph;
        let clean = g.clean_subgraph(ell).unwrap();
        prop_assert!(clean.edges().iter().all(|e| g.has_edge(e.u, e.v)));
        if ell == 3 {
            prop_assert_eq!(&clean, &g);
        } else {
            prop_assert!(clean.cliques(ell + 1, None).unwrap().next().is_none());
        }
        let copies: Vec<Vec<usize>> = clean.cliques(ell, None).unwrap().collect();
        for (i, a) in copies.iter().enumerate() {
            for b in &copies[i + 1..] {
                prop_assert!(a.iter().filter(|v| b.contains(v)).count() < 3);
            }
        }
        prop_assert_eq!(clean.clean_subgraph(ell).unwrap(), clean);
    }

    #[test]
    fn cutnorm_seminorm(n in 2usize..=9, seed: u64, alpha in -3.0f64..3.0) {
        let f = WeightedGraph::random_uniform(n, seed).scaled(2.0).difference(&WeightedGraph::constant(n, 1.0)).unwrap();
        let g = WeightedGraph::random_uniform(n, seed ^ 0xff).scaled(-1.0);
        let nf = cutnorm_exact(&f).unwrap();
        let ng = cutnorm_exact(&g).unwrap();
        prop_assert!(nf >= 0.0);
        prop_assert!((cutnorm_exact(&f.scaled(alpha)).unwrap() - alpha.abs() * nf).abs() < 1e-12);
        prop_assert!(cutnorm_exact(&f.sum(&g).unwrap()).unwrap() <= nf + ng + 1e-12);
        prop_assert!(cutnorm_heuristic(&f, 3, seed).unwrap() <= nf);
    }

    #[test]
    fn hom_density_scales_with_edge_count(n in 3usize..=7, seed: u64, k in 0i32..4) {
        // alpha = 2^-k keeps every product exact.
        let alpha = 0.5f64.powi(k);
        let f = WeightedGraph::random_uniform(n, seed);
        for h in [PatternGraph::complete(3), PatternGraph::cycle(4).unwrap(), PatternGraph::new(3, [(1, 2), (2, 3)]).unwrap()] {
            let lhs = hom_density(&f.scaled(alpha), &h);
            let rhs = alpha.powi(h.edge_count() as i32) * hom_density(&f, &h);
            prop_assert!((lhs - rhs).abs() <= 1e-15 * rhs.abs().max(1.0));
        }
    }

    #[test]
    fn adversaries_respect_their_contracts(n in 3usize..=25, p in 0.1f64..=1.0, seed: u64, lambda in 1usize..=3) {
        let g = gnp_generate(n, p, seed).unwrap().graph;
        let proper = generate_colouring(&g, &AdversarySpec::new(AdversaryKind::GreedyProper, 0).unwrap());
        prop_assert!(verify_properness(&proper));
        let bounded = generate_colouring(
            &g,
            &AdversarySpec::new(AdversaryKind::BoundedRandom { lambda, palette: None }, seed).unwrap(),
        );
        prop_assert!(max_colour_multiplicity(&bounded) <= lambda);
        let inj = generate_colouring(&g, &AdversarySpec::new(AdversaryKind::Injective, 0).unwrap());
        prop_assert_eq!(inj.palette_size(), g.edge_count());
    }

    #[test]
    fn er_find_witnesses_verify(n in 4usize..=18, r in 1u64..=8, seed: u64, ell in 3usize..=4) {
        let k = OrderedGraph::complete(n);
        let phi = generate_colouring(&k, &AdversarySpec::new(AdversaryKind::RandomR(r), seed).unwrap());
        match er_find(&phi, ell) {
            Ok(out) => prop_assert!(out.witness.verify(&phi)),
            Err(e) => {
                // Only possible when no canonical copy exists at all.
                prop_assert!(find_canonical_copy(&phi, ell, None).unwrap().witness.is_none(), "{e}");
            }
        }
    }
}
