use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use dblcat::doublecat::{DoubleCategory, MonadData};
use dblcat::finset::FinSet;
use dblcat::lawcheck::{check_double_axioms, InstanceSampler, Sampling};
use dblcat::mnd::{
    all_hold, build_end, build_mnd, forget_ver, free_monad_adjunction, Endo, VertMap, VertMonadMap, ENUMERATION_LIMIT,
};
use dblcat::poly::{
    composition_comparison, compose_polys, free_poly_monad, poly_instance, random_poly, random_slice, trees,
    Polynomial,
};
use dblcat::span::{
    compose_spans, enumerate_categories_up_to_iso, free_category, named_set, path_edges, random_span, span_instance,
    Graph, SpanDouble,
};

/// An acyclic graph on `n` nodes: edges only go from lower to higher nodes.
fn dag(n: usize, edges: &[(usize, usize)]) -> Graph {
    let names: Vec<String> = (0..n).map(|i| format!("n{i}")).collect();
    let triples: Vec<(String, String, String)> = edges
        .iter()
        .enumerate()
        .filter(|(_, (a, b))| a < b && *b < n)
        .map(|(i, (a, b))| (format!("e{i}"), names[*a].clone(), names[*b].clone()))
        .collect();
    let nodes: Vec<&str> = names.iter().map(String::as_str).collect();
    let t: Vec<(&str, &str, &str)> = triples.iter().map(|(e, a, b)| (e.as_str(), a.as_str(), b.as_str())).collect();
    Graph::from_edges(&nodes, &t).unwrap()
}

fn dag_strategy() -> impl Strategy<Value = Graph> {
    (1usize..=4, prop::collection::vec((0usize..4, 0usize..4), 0..6)).prop_map(|(n, es)| dag(n, &es))
}

/// Nonempty paths by depth-first search, as edge-index sequences.
fn nonempty_paths(g: &Graph) -> BTreeSet<Vec<usize>> {
    let mut out = BTreeSet::new();
    let mut stack: Vec<Vec<usize>> = (0..g.edges.apex().len()).map(|e| vec![e]).collect();
    while let Some(p) = stack.pop() {
        let end = g.edge_tgt(*p.last().unwrap());
        for e in 0..g.edges.apex().len() {
            if g.edge_src(e) == end {
                let mut q = p.clone();
                q.push(e);
                stack.push(q);
            }
        }
        out.insert(p);
    }
    out
}

/// Spans with the same ends are isomorphic iff each pair of ends occurs
/// equally often.
fn leg_multiset(s: &dblcat::span::Span) -> Vec<(usize, usize)> {
    let mut pairs: Vec<_> = (0..s.apex().len()).map(|i| (s.left().at(i), s.right().at(i))).collect();
    pairs.sort_unstable();
    pairs
}

fn span_triple(seed: u64) -> (dblcat::span::Span, dblcat::span::Span, dblcat::span::Span) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = span_instance();
    let xs: Vec<FinSet> = (0..4).map(|i| c.random_object(&mut rng, 3, &format!("x{i}_"))).collect();
    let f = random_span(&mut rng, &xs[0], &xs[1], 3, "f");
    let g = random_span(&mut rng, &xs[1], &xs[2], 3, "g");
    let h = random_span(&mut rng, &xs[2], &xs[3], 3, "h");
    (f, g, h)
}

fn poly_pair(seed: u64) -> (Polynomial, Polynomial, dblcat::finset::SliceObject) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs: Vec<FinSet> = (0..3).map(|i| named_set(&format!("t{i}_"), 1 + (seed as usize + i) % 2)).collect();
    let p = random_poly(&mut rng, &xs[0], &xs[1], 3, 2, "p");
    let q = random_poly(&mut rng, &xs[1], &xs[2], 3, 2, "q");
    let x = random_slice(&mut rng, &xs[0], 3, "s");
    (p, q, x)
}

/// Tree count for a one-sorted signature, by recursion on depth.
fn tree_count(arities: &[usize], depth: usize) -> usize {
    if depth == 0 {
        return 1;
    }
    let below = tree_count(arities, depth - 1);
    1 + arities.iter().map(|&k| below.pow(k as u32)).sum::<usize>()
}

/// Vertical monad maps between two categories: functors, found by brute force.
fn functors(a: &MonadData<SpanDouble>, b: &MonadData<SpanDouble>) -> Vec<VertMonadMap<SpanDouble>> {
    let c = span_instance();
    let mut out = Vec::new();
    for u in c.all_ver(&a.endo.obj, &b.endo.obj) {
        for sq in c.squares_with_boundary(&a.endo.arrow, &b.endo.arrow, &u, &u, ENUMERATION_LIMIT).unwrap() {
            let Ok(v) = VertMap::new(&c, a.clone(), b.clone(), u.clone(), sq) else { continue };
            if all_hold(&c, &v.equations(&c)) {
                out.push(v);
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn span_composition_is_associative_up_to_iso(seed in any::<u64>()) {
        let (f, g, h) = span_triple(seed);
        let left = compose_spans(&h, &compose_spans(&g, &f).unwrap()).unwrap();
        let right = compose_spans(&compose_spans(&h, &g).unwrap(), &f).unwrap();
        prop_assert_eq!(leg_multiset(&left), leg_multiset(&right));
    }

    #[test]
    fn polynomial_composition_is_extensional(seed in any::<u64>()) {
        let (p, q, x) = poly_pair(seed);
        let qp = compose_polys(&q, &p).unwrap();
        let cmp = composition_comparison(&q, &p, &x).unwrap();
        prop_assert!(cmp.is_bijective());
        prop_assert_eq!(qp.src(), p.src());
        prop_assert_eq!(qp.tgt(), q.tgt());
    }

    #[test]
    fn double_axioms_hold_for_any_seed(seed in any::<u64>()) {
        let span = check_double_axioms(&InstanceSampler::new(span_instance(), 3, 3, seed), 3);
        prop_assert!(span.passed(), "{}", span);
        let poly = check_double_axioms(&InstanceSampler::new(poly_instance(), 2, 2, seed), 3);
        prop_assert!(poly.passed(), "{}", poly);
    }

    #[test]
    fn free_category_on_a_dag_is_its_paths(g in dag_strategy()) {
        let free = free_category(&g, 8).unwrap();
        prop_assert!(free.exact);
        let paths = nonempty_paths(&g);
        prop_assert_eq!(free.cat.morphisms().len(), g.nodes.len() + paths.len());
        // composition is concatenation
        let m = free.cat.morphisms();
        for a in m.iter() {
            for b in m.iter() {
                let Some(ab) = free.cat.compose(a, b) else { continue };
                let cat = |p: &dblcat::finset::Elem| path_edges(p).map(|s| s.to_vec()).unwrap_or_default();
                let mut joined = cat(a);
                joined.extend(cat(b));
                prop_assert_eq!(cat(ab), joined);
            }
        }
    }

    #[test]
    fn free_monad_tree_counts(arities in prop::collection::vec(0usize..=2, 1..=3), depth in 1usize..=3) {
        // the multiplication is built on M;M, which grows quickly
        prop_assume!(tree_count(&arities, depth) <= 12);
        let names: Vec<String> = (0..arities.len()).map(|i| format!("o{i}")).collect();
        let mut text = String::from("poly\nbase: y\n");
        for (name, k) in names.iter().zip(&arities) {
            text.push_str(&format!("op {name} {}: -> y\n", "y ".repeat(*k)));
        }
        let q = dblcat::poly::parse_poly(&text).unwrap();
        let free = free_poly_monad(&q, depth).unwrap();
        prop_assert_eq!(trees(&free).len(), tree_count(&arities, depth));
        prop_assert_eq!(free.exact, arities.iter().all(|&k| k == 0));
    }

    /// Extending along the free monad commutes with post-composition by a
    /// functor.
    #[test]
    fn sharp_is_natural_in_the_target(g in dag_strategy(), pick in any::<prop::sample::Index>(), pick2 in any::<prop::sample::Index>()) {
        let c = span_instance();
        let e = Endo { obj: g.nodes.clone(), arrow: g.edges.clone() };
        let bundle = free_monad_adjunction(&c, &e, 8).unwrap();
        let cats: Vec<MonadData<SpanDouble>> = (1..=2)
            .flat_map(|n| enumerate_categories_up_to_iso(&named_set("x", n), 3).unwrap())
            .map(|k| k.to_monad())
            .collect();
        let a = pick.get(&cats);
        let b = pick2.get(&cats);
        let maps: Vec<_> = c
            .all_ver(&e.obj, &a.endo.obj)
            .into_iter()
            .flat_map(|u| {
                c.squares_with_boundary(&e.arrow, &a.endo.arrow, &u, &u, ENUMERATION_LIMIT)
                    .unwrap()
                    .into_iter()
                    .map(move |sq| (u.clone(), sq))
            })
            .collect();
        let fs = functors(a, b);
        prop_assume!(!maps.is_empty() && !fs.is_empty());
        let (u, sq) = pick2.get(&maps).clone();
        let m = VertMap::new(&c, e.clone(), a.endo.clone(), u, sq).unwrap();
        let f = pick.get(&fs);
        let (end, mnd) = (build_end(c), build_mnd(c));
        let lhs = mnd.ver_comp(&bundle.vertical_sharp(&c, &m, a).unwrap(), f).unwrap();
        let rhs = bundle.vertical_sharp(&c, &end.ver_comp(&m, &forget_ver(f)).unwrap(), b).unwrap();
        prop_assert_eq!(lhs, rhs);
    }
}
