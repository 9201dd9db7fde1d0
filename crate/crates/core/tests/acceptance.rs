//! The acceptance run: one line per criterion, non-zero exit if any fails.

use std::collections::BTreeSet;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dblcat::doublecat::{DoubleCategory, MonadData};
use dblcat::finset::{all_functions, Elem, FinSet};
use dblcat::lawcheck::{
    alternatives, check_double_axioms, check_endo_square, check_fibration, check_framed, check_hor_map,
    check_monad_laws, check_theorem_pipeline, check_universal_property, check_vert_map, Fault, Faulty,
    InstanceSampler, LawReport, Sampling,
};
use dblcat::mnd::{
    all_hold, build_end, build_mnd, cofold, free_monad_adjunction, monad_law_equations, uncofold, Endo,
    FreeMonadBundle, VertMap, ENUMERATION_LIMIT,
};
use dblcat::poly::{
    composition_comparison, compose_polys, enumerate_poly_monads, evaluate_poly, free_poly_monad, parse_poly,
    poly_instance, random_poly, random_slice, trees, PolyDouble, Polynomial,
};
use dblcat::span::{
    enumerate_categories_up_to_iso, free_category, named_set, render_path,
    span_instance, FinCategory, Graph, SpanDouble, DEFAULT_MAX_LEN,
};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn passed(r: &LawReport) -> Result<(), String> {
    ensure(r.passed() && !r.partial && r.checks > 0, format!("{r}"))
}

fn chain() -> Graph {
    Graph::from_edges(&["a", "b", "c"], &[("f", "a", "b"), ("g", "b", "c")]).unwrap()
}

/// Categories on at most `objects` objects, one per isomorphism class.
fn small_categories(objects: usize, morphisms: usize) -> Vec<FinCategory> {
    let mut out = Vec::new();
    for n in 1..=objects {
        out.extend(enumerate_categories_up_to_iso(&named_set("x", n), morphisms).unwrap());
    }
    out
}

/// Every path of length at most `max` by depth-first search, as edge-name
/// sequences, with a flag telling whether a longer path exists.
fn paths(g: &Graph, max: usize) -> (BTreeSet<(usize, Vec<String>)>, bool) {
    let mut out = BTreeSet::new();
    let mut longer = false;
    fn walk(g: &Graph, at: usize, path: &mut Vec<String>, max: usize, start: usize, out: &mut BTreeSet<(usize, Vec<String>)>, longer: &mut bool) {
        out.insert((start, path.clone()));
        for e in 0..g.edges.apex().len() {
            if g.edge_src(e) == at {
                if path.len() == max {
                    *longer = true;
                    continue;
                }
                path.push(g.edges.apex().elem(e).to_string());
                walk(g, g.edge_tgt(e), path, max, start, out, longer);
                path.pop();
            }
        }
    }
    for x in 0..g.nodes.len() {
        walk(g, x, &mut Vec::new(), max, x, &mut out, &mut longer);
    }
    (out, longer)
}

fn criterion_1() -> Outcome {
    let g = chain();
    let fc = free_category(&g, DEFAULT_MAX_LEN).map_err(|e| e.to_string())?;
    let (oracle, longer) = paths(&g, DEFAULT_MAX_LEN);
    ensure(fc.cat.morphisms().len() == oracle.len() && oracle.len() == 6, "morphism count")?;
    let got: BTreeSet<String> = fc.cat.morphisms().iter().map(render_path).collect();
    let want: BTreeSet<String> = oracle
        .iter()
        .map(|(x, p)| if p.is_empty() { format!("id({})", g.nodes.elem(*x)) } else { p.join(".") })
        .collect();
    ensure(got == want, format!("paths {got:?} vs {want:?}"))?;
    ensure(fc.exact && !longer, "exactness")?;
    let f = Elem::seq(vec![Elem::atom("f")]);
    let gg = Elem::seq(vec![Elem::atom("g")]);
    ensure(fc.cat.compose(&f, &gg).map(render_path).as_deref() == Some("f.g"), "f then g")?;
    passed(&check_monad_laws(&span_instance(), &fc.cat.to_monad()))?;
    Ok("6 morphisms, exact, monad laws hold".into())
}

fn criterion_2() -> Outcome {
    let g = Graph::from_edges(&["x"], &[("e", "x", "x")]).unwrap();
    let fc = free_category(&g, 3).map_err(|e| e.to_string())?;
    let (oracle, longer) = paths(&g, 3);
    ensure(fc.cat.morphisms().len() == 4 && oracle.len() == 4, "path count")?;
    ensure(!fc.exact && longer, "truncation flag")?;
    let r = check_monad_laws(&span_instance(), &fc.cat.to_monad());
    let assoc = r.failures.iter().find(|f| f.check == "associativity");
    ensure(assoc.is_some_and(|f| !f.cells.is_empty()), format!("expected an associativity counterexample\n{r}"))?;
    Ok(format!("4 paths, truncated, rejected: {}", assoc.unwrap().detail))
}

/// Trees of depth at most `d` over ops of the given arities, and their
/// leaf counts.
fn tree_arities(arities: &[usize], d: usize) -> Vec<usize> {
    if d == 0 {
        return vec![1];
    }
    let below = tree_arities(arities, d - 1);
    let mut out = vec![1];
    for &a in arities {
        let mut acc = vec![0usize];
        for _ in 0..a {
            acc = acc.iter().flat_map(|s| below.iter().map(move |b| s + b)).collect();
        }
        out.extend(acc);
    }
    out
}

fn criterion_3() -> Outcome {
    let c = poly_instance();
    let konst = parse_poly("poly\nbase: y\nop c : -> y\n").unwrap();
    let free = free_poly_monad(&konst, 8).map_err(|e| e.to_string())?;
    let arities: Vec<usize> = (0..free.monad.endo.arrow.ops().len()).map(|b| free.monad.endo.arrow.arity(b)).collect();
    let mut want = tree_arities(&[0], 8);
    ensure(tree_arities(&[0], 9).len() == want.len(), "oracle: constant signature stabilises")?;
    let mut got = arities.clone();
    got.sort();
    want.sort();
    ensure(got == want && arities == vec![1, 0], format!("arities {arities:?}"))?;
    ensure(free.exact, "constant free monad must be exact")?;
    passed(&check_monad_laws(&c, &free.monad))?;
    let succ = parse_poly("poly\nbase: y\nop s y : -> y\n").unwrap();
    let free = free_poly_monad(&succ, 4).map_err(|e| e.to_string())?;
    let n = trees(&free).len();
    ensure(n == 5 && tree_arities(&[1], 4).len() == 5, format!("{n} trees"))?;
    ensure(tree_arities(&[1], 5).len() > 5 && !free.exact, "successor must be truncated")?;
    Ok("constants: 2 trees, arities (1, 0), exact; successor: 5 trees, truncated".into())
}

fn criterion_4() -> Outcome {
    let s = check_framed(&span_instance(), 3);
    passed(&s)?;
    let p = check_framed(&poly_instance(), 2);
    passed(&p)?;
    Ok(format!("span {} checks, poly {} checks, no failures", s.checks, p.checks))
}

fn sample_vert<C: Sampling>(c: &C, rng: &mut ChaCha8Rng, max: usize) -> VertMap<C, Endo<C>> {
    let x = c.random_object(rng, max, "x");
    let x2 = c.random_object(rng, max, "z");
    let p = c.random_hor(rng, &x, &x, max, "p");
    let u = c.random_ver(rng, &x, &x2);
    let sq = c.random_square_from(rng, &p, &u, &u, "q");
    let tgt = Endo { obj: x2, arrow: c.sq_bottom(&sq) };
    VertMap::new(c, Endo { obj: x, arrow: p }, tgt, u, sq).expect("sampled map has the right boundary")
}

fn roundtrips<C: Sampling>(c: &C, seed: u64, max: usize, n: usize) -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut done = 0;
    for _ in 0..n {
        let v = sample_vert(c, &mut rng, max);
        let h = cofold(c, &v).map_err(|e| e.to_string())?;
        ensure(uncofold(c, &h).map_err(|e| e.to_string())? == v, "uncofold after cofold")?;
        done += 1;
    }
    // the reverse direction on horizontal maps sampled directly
    let mut reverse = 0;
    let mut tries = 0;
    while reverse < n && tries < 50 * n {
        tries += 1;
        let x = c.random_object(&mut rng, max, "x");
        let x2 = c.random_object(&mut rng, max, "z");
        let u = c.random_ver(&mut rng, &x, &x2);
        let p = c.random_hor(&mut rng, &x, &x, max, "p");
        let p2 = c.random_hor(&mut rng, &x2, &x2, max, "r");
        let conj = c.framing(&u).map_err(|e| e.to_string())?.conjoint;
        let (top, bottom) = (c.hor_comp(&conj, &p).unwrap(), c.hor_comp(&p2, &conj).unwrap());
        let (i2, i) = (c.ver_id(&x2), c.ver_id(&x));
        let Ok(phis) = c.squares_with_boundary(&top, &bottom, &i2, &i, 4096) else { continue };
        if phis.is_empty() {
            continue;
        }
        let phi = phis[rng.gen_range(0..phis.len())].clone();
        let h = dblcat::mnd::HorMap::new(c, Endo { obj: x2, arrow: p2 }, Endo { obj: x, arrow: p }, conj, phi)
            .map_err(|e| e.to_string())?;
        let v = uncofold(c, &h).map_err(|e| e.to_string())?;
        ensure(cofold(c, &v).map_err(|e| e.to_string())? == h, "cofold after uncofold")?;
        reverse += 1;
    }
    ensure(reverse >= n, format!("only {reverse} horizontal maps sampled"))?;
    Ok(done + reverse)
}

fn poly_monads() -> Vec<MonadData<PolyDouble>> {
    let c = poly_instance();
    enumerate_poly_monads(3, 2, |m| Ok(all_hold(&c, &monad_law_equations(&c, m)))).unwrap()
}

fn monad_maps_cofold<C: Sampling>(c: &C, monads: &[MonadData<C>]) -> Result<usize, String> {
    let mut n = 0;
    for a in monads {
        for b in monads {
            for u in c.all_ver(&a.endo.obj, &b.endo.obj) {
                let sqs = c
                    .squares_with_boundary(&a.endo.arrow, &b.endo.arrow, &u, &u, ENUMERATION_LIMIT)
                    .map_err(|e| e.to_string())?;
                for sq in sqs {
                    let v = VertMap::new(c, a.clone(), b.clone(), u.clone(), sq).unwrap();
                    if !all_hold(c, &v.equations(c)) {
                        continue;
                    }
                    let h = cofold(c, &v).map_err(|e| e.to_string())?;
                    passed(&check_hor_map(c, &h))?;
                    ensure(uncofold(c, &h).map_err(|e| e.to_string())? == v, "monad roundtrip")?;
                    n += 1;
                }
            }
        }
    }
    Ok(n)
}

fn criterion_5() -> Outcome {
    let s = roundtrips(&span_instance(), 5, 3, 100)?;
    let p = roundtrips(&poly_instance(), 5, 2, 100)?;
    let cats: Vec<_> = small_categories(2, 3).iter().map(|c| c.to_monad()).collect();
    let ms = monad_maps_cofold(&span_instance(), &cats)?;
    let pm = poly_monads();
    let mp = monad_maps_cofold(&poly_instance(), &pm[..pm.len().min(12)])?;
    ensure(ms > 0 && mp > 0, "no monad maps sampled")?;
    Ok(format!("{s} span and {p} poly roundtrips; {ms} span and {mp} poly monad maps cofold to monad maps"))
}

/// Fiber cardinalities of `Q(P(x))` over each element of the base,
/// computed by counting.
fn composite_counts(q: &Polynomial, p: &Polynomial, x: &[usize]) -> Vec<usize> {
    let apply = |r: &Polynomial, sizes: &[usize]| -> Vec<usize> {
        let mut out = vec![0; r.tgt().len()];
        for b in 0..r.ops().len() {
            let n: usize = r.fiber(b).iter().map(|&e| sizes[r.sigma().at(e)]).product();
            out[r.tau().at(b)] += n;
        }
        out
    };
    apply(q, &apply(p, x))
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut pairs = 0;
    while pairs < 60 {
        let sets: Vec<FinSet> = (0..3).map(|i| named_set(&format!("y{i}_"), rng.gen_range(1..=2))).collect();
        let p = random_poly(&mut rng, &sets[0], &sets[1], 3, 2, "p");
        let q = random_poly(&mut rng, &sets[1], &sets[2], 3, 2, "q");
        let x = random_slice(&mut rng, &sets[0], 3, "x");
        let map = composition_comparison(&q, &p, &x).map_err(|e| e.to_string())?;
        let lhs = evaluate_poly(&compose_polys(&q, &p).unwrap(), &x).unwrap();
        let rhs = evaluate_poly(&q, &evaluate_poly(&p, &x).unwrap()).unwrap();
        ensure(map.dom() == &lhs.total && map.cod() == &rhs.total, "comparison boundary")?;
        let image: BTreeSet<usize> = (0..map.dom().len()).map(|i| map.at(i)).collect();
        ensure(image.len() == map.dom().len() && image.len() == map.cod().len(), "not a bijection")?;
        ensure((0..map.dom().len()).all(|i| rhs.proj.at(map.at(i)) == lhs.proj.at(i)), "not fiberwise")?;
        let sizes: Vec<usize> = (0..x.base.len()).map(|b| (0..x.total.len()).filter(|&i| x.proj.at(i) == b).count()).collect();
        let counts = composite_counts(&q, &p, &sizes);
        let fib = |s: &dblcat::finset::SliceObject, y: usize| (0..s.total.len()).filter(|&i| s.proj.at(i) == y).count();
        ensure((0..counts.len()).all(|y| fib(&lhs, y) == counts[y]), "fiber sizes disagree with counting")?;
        pairs += 1;
    }
    Ok(format!("{pairs} random pairs, fiberwise bijections exhibited"))
}

/// Functors from `a` to `b`, by trying every assignment on morphisms.
fn count_functors(a: &FinCategory, b: &FinCategory) -> usize {
    let (ga, gb) = (&a.carrier, &b.carrier);
    let ma = a.morphisms();
    let mut n = 0;
    for on_obj in all_functions(&ga.nodes, &gb.nodes) {
        let cands: Vec<Vec<usize>> = (0..ma.len())
            .map(|i| {
                (0..b.morphisms().len())
                    .filter(|&j| gb.edge_src(j) == on_obj.at(ga.edge_src(i)) && gb.edge_tgt(j) == on_obj.at(ga.edge_tgt(i)))
                    .collect()
            })
            .collect();
        for pick in dblcat::finset::product_indices(&cands) {
            let img = |e: &Elem| b.morphisms().elem(pick[ma.index_of(e).unwrap()]).clone();
            let ids = ga.nodes.iter().enumerate().all(|(i, x)| {
                Some(&img(a.identity(x).unwrap())) == b.identity(gb.nodes.elem(on_obj.at(i)))
            });
            let comp = ma.iter().all(|f| {
                ma.iter().all(|g| match a.compose(f, g) {
                    Some(fg) => b.compose(&img(f), &img(g)) == Some(&img(fg)),
                    None => true,
                })
            });
            n += (ids && comp) as usize;
        }
    }
    n
}

fn graph_morphisms(g: &Graph, h: &Graph) -> usize {
    let mut n = 0;
    for on_nodes in all_functions(&g.nodes, &h.nodes) {
        for on_edges in all_functions(g.edges.apex(), h.edges.apex()) {
            n += (0..g.edges.apex().len()).all(|e| {
                let i = on_edges.at(e);
                on_nodes.at(g.edge_src(e)) == h.edge_src(i) && on_nodes.at(g.edge_tgt(e)) == h.edge_tgt(i)
            }) as usize;
        }
    }
    n
}

struct Scenarios {
    span_bundle: FreeMonadBundle<SpanDouble>,
    span_targets: Vec<MonadData<SpanDouble>>,
    poly_bundle: FreeMonadBundle<PolyDouble>,
    poly_targets: Vec<MonadData<PolyDouble>>,
}

fn scenarios() -> Scenarios {
    let g = chain();
    let e = Endo { obj: g.nodes.clone(), arrow: g.edges.clone() };
    let q = parse_poly("poly\nbase: y\nop c : -> y\nop d : -> y\n").unwrap();
    Scenarios {
        span_bundle: free_monad_adjunction(&span_instance(), &e, DEFAULT_MAX_LEN).unwrap(),
        span_targets: small_categories(2, 4).iter().map(|c| c.to_monad()).collect(),
        poly_bundle: free_monad_adjunction(&poly_instance(), &Endo { obj: q.src().clone(), arrow: q }, 8).unwrap(),
        poly_targets: poly_monads(),
    }
}

fn criterion_7(sc: &Scenarios) -> Outcome {
    let c = span_instance();
    let r = check_universal_property(&c, &sc.span_bundle, &sc.span_targets, ENUMERATION_LIMIT);
    passed(&r)?;
    // independent count: functors out of the free category versus graph
    // morphisms out of the graph
    let free = FinCategory::from_monad(sc.span_bundle.monad()).unwrap();
    let g = chain();
    let mut maps = 0;
    for m in &sc.span_targets {
        let target = FinCategory::from_monad(m).unwrap();
        let (f, h) = (count_functors(&free, &target), graph_morphisms(&g, &target.carrier));
        ensure(f == h, format!("{f} functors but {h} graph morphisms"))?;
        maps += h;
    }
    let pc = poly_instance();
    let pr = check_universal_property(&pc, &sc.poly_bundle, &sc.poly_targets, ENUMERATION_LIMIT);
    passed(&pr)?;
    for m in &sc.poly_targets {
        let arrow = &m.endo.arrow;
        let constants = (0..arrow.ops().len()).filter(|&b| arrow.arity(b) == 0).count();
        let u = pc.ver_id(&m.endo.obj);
        let n = pc
            .squares_with_boundary(&sc.poly_bundle.base().arrow, arrow, &u, &u, ENUMERATION_LIMIT)
            .unwrap()
            .len();
        ensure(n == constants * constants, "vertical maps out of two constants")?;
    }
    Ok(format!(
        "{} span targets ({maps} maps), {} poly targets; {} + {} checks",
        sc.span_targets.len(),
        sc.poly_targets.len(),
        r.checks,
        pr.checks
    ))
}

fn criterion_8(sc: &Scenarios) -> Outcome {
    let r = check_theorem_pipeline(&span_instance(), &sc.span_bundle, &sc.span_targets, ENUMERATION_LIMIT);
    passed(&r)?;
    let p = check_theorem_pipeline(&poly_instance(), &sc.poly_bundle, &sc.poly_targets, ENUMERATION_LIMIT);
    passed(&p)?;
    Ok(format!("span {} checks, poly {} checks, theta invertible throughout", r.checks, p.checks))
}

fn criterion_9() -> Outcome {
    let cats: Vec<_> = small_categories(2, 3).iter().map(|c| c.to_monad()).collect();
    let s = check_fibration(&span_instance(), 2, 2, &cats);
    passed(&s)?;
    let pm = poly_monads();
    let p = check_fibration(&poly_instance(), 2, 1, &pm[..pm.len().min(12)]);
    passed(&p)?;
    Ok(format!("span {} checks, poly {} checks", s.checks, p.checks))
}

fn detected(r: &LawReport) -> Result<(), String> {
    ensure(
        !r.passed() && r.failures.iter().any(|f| !f.cells.is_empty()) && r.machine_line().contains(" FAIL "),
        format!("corruption not detected by {}", r.suite),
    )
}

/// `m` with its multiplication swapped for one that breaks the laws.
fn broken_mult<C: DoubleCategory>(c: &C, m: &MonadData<C>) -> Option<MonadData<C>> {
    alternatives(c, &m.mult).ok()?.into_iter().find_map(|mult| {
        let bad = MonadData { mult, ..m.clone() };
        (!all_hold(c, &monad_law_equations(c, &bad))).then_some(bad)
    })
}

fn criterion_10(sc: &Scenarios) -> Outcome {
    let span = span_instance();
    let mut suites = Vec::new();
    for fault in [Fault::UnitSquare, Fault::BrokenComposite, Fault::DroppedCoherence] {
        let r = check_double_axioms(&InstanceSampler::new(Faulty::new(span_instance(), fault), 2, 2, 1), 50);
        detected(&r)?;
        suites.push(format!("double-axioms/{fault:?}"));
    }
    detected(&check_framed(&Faulty::new(span_instance(), Fault::SwappedFraming), 2))?;
    suites.push("framed".into());
    detected(&check_fibration(&Faulty::new(span_instance(), Fault::SwappedFraming), 2, 1, &[]))?;
    suites.push("fibration".into());

    // a two-element monoid, then corrupted
    let monoid = small_categories(1, 2).into_iter().find(|c| c.morphisms().len() == 2).unwrap().to_monad();
    let bad = broken_mult(&span, &monoid).ok_or("no law-breaking multiplication")?;
    detected(&check_monad_laws(&span, &bad))?;
    suites.push("monad-laws".into());

    let end = build_end(span);
    let mnd = build_mnd(span);
    let swap = |s: &dblcat::span::SpanSquare| {
        alternatives(&span, s).unwrap().into_iter().find(|t| span.invert_globular(t).is_ok())
    };
    let mut h = mnd.hor_id(&monoid);
    let id = span.sq_ver_id(&monoid.endo.arrow);
    let transposition = swap(&id).ok_or("no automorphism")?;
    h.phi = span.sq_vcomp(&h.phi, &span.sq_hcomp(&transposition, &span.sq_ver_id(&span.hor_id(&monoid.endo.obj))).unwrap())
        .map_err(|e| e.to_string())?;
    detected(&check_hor_map(&span, &h))?;
    suites.push("hor-map".into());

    let mut v = mnd.ver_id(&monoid);
    v.sq = transposition.clone();
    detected(&check_vert_map(&span, &v))?;
    suites.push("vert-map".into());

    let mut sq = end.sq_ver_id(&end.hor_id(&monoid.endo));
    sq.left.sq = transposition;
    detected(&check_endo_square(&span, &sq))?;
    suites.push("endo-square".into());

    let targets = vec![bad];
    detected(&check_universal_property(&span, &sc.span_bundle, &targets, ENUMERATION_LIMIT))?;
    suites.push("universal-property".into());
    detected(&check_theorem_pipeline(&span, &sc.span_bundle, &targets, ENUMERATION_LIMIT))?;
    suites.push("theorem-pipeline".into());
    Ok(format!("corruptions detected by {}", suites.join(", ")))
}

fn main() {
    let start = Instant::now();
    let mut failed = 0;
    let mut report = |n: usize, out: Outcome, t: Instant| {
        let secs = t.elapsed().as_secs_f64();
        match out {
            Ok(msg) => println!("CRITERION {n} PASS ({secs:.2}s) {msg}"),
            Err(msg) => {
                failed += 1;
                println!("CRITERION {n} FAIL ({secs:.2}s) {msg}");
            }
        }
    };
    let t = Instant::now();
    report(1, criterion_1(), t);
    let t = Instant::now();
    report(2, criterion_2(), t);
    let t = Instant::now();
    report(3, criterion_3(), t);
    let t = Instant::now();
    report(4, criterion_4(), t);
    let t = Instant::now();
    report(5, criterion_5(), t);
    let t = Instant::now();
    report(6, criterion_6(), t);
    let t = Instant::now();
    let sc = scenarios();
    report(7, criterion_7(&sc), t);
    let t = Instant::now();
    report(8, criterion_8(&sc), t);
    let t = Instant::now();
    report(9, criterion_9(), t);
    let t = Instant::now();
    report(10, criterion_10(&sc), t);
    println!("acceptance: {} of 10 criteria passed in {:.2}s", 10 - failed, start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
