//! Brute-force law checking.
//!
//! Suites sample or enumerate small cells of an instance, paste both sides
//! of every law and record each disagreement with the cells involved. A
//! [`Faulty`] wrapper injects single corruptions into an instance so the
//! suites themselves can be tested.

use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::doublecat::{
    Cell, DoubleCategory, FreeMonad, Framing, HorExpr, LocalCoproduct, MonadData,
};
use crate::error::{Error, Result};
use crate::finset::{all_functions, product_indices, Elem, FinFun, FinSet};
use crate::mnd::{
    build_end, build_mnd, framing_equations, is_inverse, monad_law_equations, theorem_pipeline, EndoObject, EndoSq,
    Equation, FreeMonadBundle, HorMap, Verdict, VertMap, ENUMERATION_LIMIT,
};
use crate::poly::{random_poly, random_poly_square_from, PolyDouble, Polynomial};
use crate::span::{named_set, random_fun, random_span, random_square_from, Span, SpanDouble};

/// One failed check with the cells needed to re-check it by hand.
#[derive(Clone, Debug, PartialEq)]
pub struct Failure {
    pub check: String,
    pub detail: String,
    pub cells: Vec<String>,
}

/// The outcome of one suite.
#[derive(Clone, Debug)]
pub struct LawReport {
    pub suite: String,
    pub checks: usize,
    pub failures: Vec<Failure>,
    pub seed: u64,
    pub elapsed: Duration,
    /// Some candidates were skipped because an enumeration bound was hit.
    pub partial: bool,
}

impl LawReport {
    pub fn new(suite: &str, seed: u64) -> Self {
        LawReport {
            suite: suite.to_string(),
            checks: 0,
            failures: Vec::new(),
            seed,
            elapsed: Duration::ZERO,
            partial: false,
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    /// `SUITE <name> PASS|FAIL <checks> <failures> seed=<n>`
    pub fn machine_line(&self) -> String {
        format!(
            "SUITE {} {} {} {} seed={}",
            self.suite,
            if self.passed() { "PASS" } else { "FAIL" },
            self.checks,
            self.failures.len(),
            self.seed
        )
    }

    pub fn check(&mut self, name: &str, ok: bool, detail: impl FnOnce() -> String, cells: impl FnOnce() -> Vec<String>) {
        self.checks += 1;
        if !ok {
            self.failures.push(Failure {
                check: name.to_string(),
                detail: detail(),
                cells: cells(),
            });
        }
    }

    /// Records an equation, attaching both pasted sides and `context` on
    /// failure.
    pub fn equation<C: DoubleCategory>(&mut self, c: &C, eq: &Equation<C>, context: &[String]) {
        self.checks += 1;
        if let Verdict::Fails(why) = eq.verdict(c) {
            let mut cells = context.to_vec();
            cells.push(eq.render(c));
            self.failures.push(Failure {
                check: eq.name.clone(),
                detail: why,
                cells,
            });
        }
    }

    /// Records a result that should be `Ok`.
    pub fn ok<T>(&mut self, name: &str, r: &Result<T>, context: &[String]) -> bool {
        self.checks += 1;
        match r {
            Ok(_) => true,
            Err(e) => {
                self.failures.push(Failure {
                    check: name.to_string(),
                    detail: e.to_string(),
                    cells: context.to_vec(),
                });
                false
            }
        }
    }

    pub fn merge(&mut self, other: LawReport) {
        self.checks += other.checks;
        self.failures.extend(other.failures);
        self.partial |= other.partial;
    }

    fn done(mut self, start: Instant) -> Self {
        self.elapsed = start.elapsed();
        self
    }
}

impl fmt::Display for LawReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{}: {} checks, {} failures in {:.2?}{}",
            self.suite,
            self.checks,
            self.failures.len(),
            self.elapsed,
            if self.partial { " (partial: enumeration bound hit)" } else { "" }
        )?;
        for fail in &self.failures {
            writeln!(f, "  FAIL {}: {}", fail.check, fail.detail)?;
            for cell in &fail.cells {
                for line in cell.lines() {
                    writeln!(f, "    {line}")?;
                }
            }
        }
        write!(f, "{}", self.machine_line())
    }
}

/// Random and exhaustive generation of small cells.
pub trait Sampling: DoubleCategory {
    /// An object with between one and `max` elements.
    fn random_object(&self, rng: &mut ChaCha8Rng, max: usize, tag: &str) -> Self::Obj;
    fn random_hor(&self, rng: &mut ChaCha8Rng, x: &Self::Obj, y: &Self::Obj, max: usize, tag: &str) -> Self::Hor;
    fn random_ver(&self, rng: &mut ChaCha8Rng, x: &Self::Obj, y: &Self::Obj) -> Self::Ver;
    /// A square with the given top and sides and a random bottom.
    fn random_square_from(
        &self,
        rng: &mut ChaCha8Rng,
        top: &Self::Hor,
        u: &Self::Ver,
        v: &Self::Ver,
        tag: &str,
    ) -> Self::Sq;
    /// One object of each size up to `max`, the empty one included.
    fn objects_up_to(&self, max: usize, tag: &str) -> Vec<Self::Obj>;
    fn all_ver(&self, x: &Self::Obj, y: &Self::Obj) -> Vec<Self::Ver>;
    /// Every endomorphism of `x` up to size `max`, with fixed names.
    fn all_endos(&self, x: &Self::Obj, max: usize) -> Vec<Self::Hor>;
    /// A horizontal arrow like `f` with one element removed from its
    /// middle, or `f` itself if there is none.
    fn damage(&self, f: &Self::Hor) -> Self::Hor;
}

fn ordinal_object(n: usize, tag: &str) -> FinSet {
    named_set(tag, n)
}

impl Sampling for SpanDouble {
    fn random_object(&self, rng: &mut ChaCha8Rng, max: usize, tag: &str) -> FinSet {
        named_set(tag, rng.gen_range(1..=max.max(1)))
    }
    fn random_hor(&self, rng: &mut ChaCha8Rng, x: &FinSet, y: &FinSet, max: usize, tag: &str) -> Span {
        random_span(rng, x, y, max, tag)
    }
    fn random_ver(&self, rng: &mut ChaCha8Rng, x: &FinSet, y: &FinSet) -> FinFun {
        random_fun(rng, x, y)
    }
    fn random_square_from(&self, rng: &mut ChaCha8Rng, top: &Span, u: &FinFun, v: &FinFun, tag: &str) -> crate::span::SpanSquare {
        random_square_from(rng, top, u, v, 1, tag)
    }
    fn objects_up_to(&self, max: usize, tag: &str) -> Vec<FinSet> {
        (0..=max).map(|n| ordinal_object(n, tag)).collect()
    }
    fn all_ver(&self, x: &FinSet, y: &FinSet) -> Vec<FinFun> {
        all_functions(x, y)
    }
    fn all_endos(&self, x: &FinSet, max: usize) -> Vec<Span> {
        let mut out = Vec::new();
        for n in 0..=max {
            let apex = named_set("e", n);
            for l in all_functions(&apex, x) {
                for r in all_functions(&apex, x) {
                    out.push(Span::new(l.clone(), r).expect("legs share the apex"));
                }
            }
        }
        out
    }
    fn damage(&self, f: &Span) -> Span {
        let n = f.apex().len();
        if n == 0 {
            return f.clone();
        }
        let apex = FinSet::new(f.apex().iter().take(n - 1).cloned().collect()).expect("subset");
        let keep = |g: &FinFun| FinFun::new(apex.clone(), g.cod().clone(), (0..n - 1).map(|i| g.at(i)).collect());
        Span::new(keep(f.left()).expect("in range"), keep(f.right()).expect("in range")).expect("legs share the apex")
    }
}

impl Sampling for PolyDouble {
    fn random_object(&self, rng: &mut ChaCha8Rng, max: usize, tag: &str) -> FinSet {
        named_set(tag, rng.gen_range(1..=max.max(1)))
    }
    fn random_hor(&self, rng: &mut ChaCha8Rng, x: &FinSet, y: &FinSet, max: usize, tag: &str) -> Polynomial {
        random_poly(rng, x, y, max, 2, tag)
    }
    fn random_ver(&self, rng: &mut ChaCha8Rng, x: &FinSet, y: &FinSet) -> FinFun {
        random_fun(rng, x, y)
    }
    fn random_square_from(
        &self,
        rng: &mut ChaCha8Rng,
        top: &Polynomial,
        u: &FinFun,
        v: &FinFun,
        tag: &str,
    ) -> crate::poly::PolySquare {
        random_poly_square_from(rng, top, u, v, 1, 2, tag)
    }
    fn objects_up_to(&self, max: usize, tag: &str) -> Vec<FinSet> {
        (0..=max).map(|n| ordinal_object(n, tag)).collect()
    }
    fn all_ver(&self, x: &FinSet, y: &FinSet) -> Vec<FinFun> {
        all_functions(x, y)
    }
    /// Polynomials with at most `max` ops of arity at most one.
    fn all_endos(&self, x: &FinSet, max: usize) -> Vec<Polynomial> {
        // each op picks an output and either no input or one input
        let shapes: Vec<(Option<usize>, usize)> = (0..x.len())
            .flat_map(|out| std::iter::once((None, out)).chain((0..x.len()).map(move |i| (Some(i), out))))
            .collect();
        let mut out = Vec::new();
        for n in 0..=max {
            if n > 0 && shapes.is_empty() {
                break;
            }
            for pick in product_indices(&vec![(0..shapes.len()).collect::<Vec<_>>(); n]) {
                let sig: Vec<(Elem, Vec<Elem>, Elem)> = pick
                    .iter()
                    .enumerate()
                    .map(|(i, &k)| {
                        let (input, o) = shapes[k];
                        (
                            Elem::atom(&format!("o{i}")),
                            input.map(|j| x.elem(j).clone()).into_iter().collect(),
                            x.elem(o).clone(),
                        )
                    })
                    .collect();
                out.push(Polynomial::from_ops(x, x, &sig).expect("ops are well formed"));
            }
        }
        out
    }
    fn damage(&self, f: &Polynomial) -> Polynomial {
        let n = f.ops().len();
        if n == 0 {
            return f.clone();
        }
        let sig: Vec<(Elem, Vec<Elem>, Elem)> = (0..n - 1)
            .map(|b| {
                let ins = f.fiber(b).iter().map(|&e| f.src().elem(f.sigma().at(e)).clone()).collect();
                (f.ops().elem(b).clone(), ins, f.tgt().elem(f.tau().at(b)).clone())
            })
            .collect();
        Polynomial::from_ops(f.src(), f.tgt(), &sig).expect("sub-polynomial")
    }
}

/// Size bounds and seed for the random suites.
#[derive(Clone, Debug)]
pub struct InstanceSampler<C> {
    pub instance: C,
    pub max_object: usize,
    pub max_apex: usize,
    pub seed: u64,
}

impl<C: Sampling> InstanceSampler<C> {
    pub fn new(instance: C, max_object: usize, max_apex: usize, seed: u64) -> Self {
        InstanceSampler {
            instance,
            max_object,
            max_apex,
            seed,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

/// A single deliberate corruption of an instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fault {
    /// Vertical identity squares are replaced by other squares.
    UnitSquare,
    /// Horizontal composites lose an element, so they are no longer the
    /// pullback the squares are built on.
    BrokenComposite,
    /// The associator is replaced by an identity square.
    DroppedCoherence,
    /// Framings report the companion where the conjoint belongs.
    SwappedFraming,
}

/// An instance with one [`Fault`] injected.
#[derive(Clone, Debug, PartialEq)]
pub struct Faulty<C> {
    pub inner: C,
    pub fault: Fault,
}

impl<C> Faulty<C> {
    pub fn new(inner: C, fault: Fault) -> Self {
        Faulty { inner, fault }
    }
}

impl<C: Sampling> DoubleCategory for Faulty<C> {
    type Obj = C::Obj;
    type Hor = C::Hor;
    type Ver = C::Ver;
    type Sq = C::Sq;

    fn name(&self) -> String {
        format!("{} with {:?}", self.inner.name(), self.fault)
    }
    fn hor_src(&self, f: &C::Hor) -> C::Obj {
        self.inner.hor_src(f)
    }
    fn hor_tgt(&self, f: &C::Hor) -> C::Obj {
        self.inner.hor_tgt(f)
    }
    fn hor_id(&self, x: &C::Obj) -> C::Hor {
        self.inner.hor_id(x)
    }
    fn hor_comp(&self, f: &C::Hor, g: &C::Hor) -> Result<C::Hor> {
        let fg = self.inner.hor_comp(f, g)?;
        Ok(if self.fault == Fault::BrokenComposite {
            self.inner.damage(&fg)
        } else {
            fg
        })
    }
    fn ver_src(&self, u: &C::Ver) -> C::Obj {
        self.inner.ver_src(u)
    }
    fn ver_tgt(&self, u: &C::Ver) -> C::Obj {
        self.inner.ver_tgt(u)
    }
    fn ver_id(&self, x: &C::Obj) -> C::Ver {
        self.inner.ver_id(x)
    }
    fn ver_comp(&self, u: &C::Ver, v: &C::Ver) -> Result<C::Ver> {
        self.inner.ver_comp(u, v)
    }
    fn sq_top(&self, s: &C::Sq) -> C::Hor {
        self.inner.sq_top(s)
    }
    fn sq_bottom(&self, s: &C::Sq) -> C::Hor {
        self.inner.sq_bottom(s)
    }
    fn sq_left(&self, s: &C::Sq) -> C::Ver {
        self.inner.sq_left(s)
    }
    fn sq_right(&self, s: &C::Sq) -> C::Ver {
        self.inner.sq_right(s)
    }
    fn sq_hor_id(&self, u: &C::Ver) -> C::Sq {
        self.inner.sq_hor_id(u)
    }
    fn sq_ver_id(&self, f: &C::Hor) -> C::Sq {
        let id = self.inner.sq_ver_id(f);
        if self.fault != Fault::UnitSquare {
            return id;
        }
        let x = self.inner.ver_id(&self.inner.hor_src(f));
        let y = self.inner.ver_id(&self.inner.hor_tgt(f));
        let other = self
            .inner
            .squares_with_boundary(f, f, &x, &y, 64)
            .ok()
            .and_then(|v| v.into_iter().find(|s| *s != id));
        other.unwrap_or_else(|| self.inner.sq_hor_id(&x))
    }
    fn sq_hcomp(&self, a: &C::Sq, b: &C::Sq) -> Result<C::Sq> {
        self.inner.sq_hcomp(a, b)
    }
    fn sq_vcomp(&self, a: &C::Sq, b: &C::Sq) -> Result<C::Sq> {
        self.inner.sq_vcomp(a, b)
    }
    fn associator(&self, f: &C::Hor, g: &C::Hor, h: &C::Hor) -> Result<C::Sq> {
        if self.fault == Fault::DroppedCoherence {
            return Ok(self.inner.sq_ver_id(&self.inner.hor_comp(&self.inner.hor_comp(f, g)?, h)?));
        }
        self.inner.associator(f, g, h)
    }
    fn left_unitor(&self, f: &C::Hor) -> C::Sq {
        self.inner.left_unitor(f)
    }
    fn right_unitor(&self, f: &C::Hor) -> C::Sq {
        self.inner.right_unitor(f)
    }
    fn invert_globular(&self, s: &C::Sq) -> Result<C::Sq> {
        self.inner.invert_globular(s)
    }
    fn validate_square(&self, s: &C::Sq) -> Result<()> {
        self.inner.validate_square(s)
    }
    fn squares_with_boundary(
        &self,
        top: &C::Hor,
        bottom: &C::Hor,
        left: &C::Ver,
        right: &C::Ver,
        limit: usize,
    ) -> Result<Vec<C::Sq>> {
        self.inner.squares_with_boundary(top, bottom, left, right, limit)
    }
    fn render_square(&self, s: &C::Sq) -> String {
        self.inner.render_square(s)
    }
    fn describe_hor_mismatch(&self, expected: &C::Hor, actual: &C::Hor) -> String {
        self.inner.describe_hor_mismatch(expected, actual)
    }
    fn framing(&self, u: &C::Ver) -> Result<Framing<Self>> {
        let fr = self.inner.framing(u)?;
        let (companion, conjoint) = if self.fault == Fault::SwappedFraming {
            (fr.conjoint, fr.companion)
        } else {
            (fr.companion, fr.conjoint)
        };
        Ok(Framing {
            arrow: fr.arrow,
            companion,
            conjoint,
            alpha: fr.alpha,
            beta: fr.beta,
            gamma: fr.gamma,
            delta: fr.delta,
        })
    }
    fn conjoint_base(&self, f: &C::Hor) -> Result<Option<C::Ver>> {
        self.inner.conjoint_base(f)
    }
    fn local_coproduct(&self, f: &C::Hor, g: &C::Hor) -> Result<LocalCoproduct<Self>> {
        let s = self.inner.local_coproduct(f, g)?;
        Ok(LocalCoproduct {
            sum: s.sum,
            inl: s.inl,
            inr: s.inr,
        })
    }
    fn equalizer(&self, a: &C::Sq, b: &C::Sq) -> Result<(C::Hor, C::Sq)> {
        self.inner.equalizer(a, b)
    }
    fn factor_through_equalizer(&self, incl: &C::Sq, s: &C::Sq) -> Result<C::Sq> {
        self.inner.factor_through_equalizer(incl, s)
    }
}

impl<C: Sampling> Sampling for Faulty<C> {
    fn random_object(&self, rng: &mut ChaCha8Rng, max: usize, tag: &str) -> C::Obj {
        self.inner.random_object(rng, max, tag)
    }
    fn random_hor(&self, rng: &mut ChaCha8Rng, x: &C::Obj, y: &C::Obj, max: usize, tag: &str) -> C::Hor {
        self.inner.random_hor(rng, x, y, max, tag)
    }
    fn random_ver(&self, rng: &mut ChaCha8Rng, x: &C::Obj, y: &C::Obj) -> C::Ver {
        self.inner.random_ver(rng, x, y)
    }
    fn random_square_from(&self, rng: &mut ChaCha8Rng, top: &C::Hor, u: &C::Ver, v: &C::Ver, tag: &str) -> C::Sq {
        self.inner.random_square_from(rng, top, u, v, tag)
    }
    fn objects_up_to(&self, max: usize, tag: &str) -> Vec<C::Obj> {
        self.inner.objects_up_to(max, tag)
    }
    fn all_ver(&self, x: &C::Obj, y: &C::Obj) -> Vec<C::Ver> {
        self.inner.all_ver(x, y)
    }
    fn all_endos(&self, x: &C::Obj, max: usize) -> Vec<C::Hor> {
        self.inner.all_endos(x, max)
    }
    fn damage(&self, f: &C::Hor) -> C::Hor {
        self.inner.damage(f)
    }
}

fn render_all<C: DoubleCategory>(c: &C, sqs: &[&C::Sq]) -> Vec<String> {
    sqs.iter().map(|s| c.render_square(s)).collect()
}

fn strict<C: DoubleCategory>(
    report: &mut LawReport,
    c: &C,
    name: &str,
    lhs: Result<C::Sq>,
    rhs: Result<C::Sq>,
    inputs: &[&C::Sq],
) {
    let (ok, detail) = match (&lhs, &rhs) {
        (Ok(l), Ok(r)) => (l == r, "the two sides differ".to_string()),
        (Err(e), _) => (false, format!("left side: {e}")),
        (_, Err(e)) => (false, format!("right side: {e}")),
    };
    report.check(
        name,
        ok,
        || detail,
        || {
            let mut cells = render_all(c, inputs);
            for s in [&lhs, &rhs].into_iter().flatten() {
                cells.push(c.render_square(s));
            }
            cells
        },
    );
}

fn mod_coherence<C: DoubleCategory>(
    report: &mut LawReport,
    c: &C,
    name: &str,
    lhs: Result<Cell<C>>,
    rhs: Result<Cell<C>>,
    inputs: &[&C::Sq],
) {
    let eq = Equation::new(name, lhs, rhs);
    report.equation(c, &eq, &render_all(c, inputs));
}

/// Interchange, identity squares, associativity of both compositions (the
/// horizontal one up to coherence), pentagon and triangle on random grids.
pub fn check_double_axioms<C: Sampling>(s: &InstanceSampler<C>, trials: usize) -> LawReport {
    let start = Instant::now();
    let c = &s.instance;
    let mut rng = s.rng();
    let mut report = LawReport::new("double-axioms", s.seed);
    for _ in 0..trials {
        let (m, a) = (s.max_object, s.max_apex);
        let row = |rng: &mut ChaCha8Rng, t: &str| -> Vec<C::Obj> {
            (0..5).map(|i| c.random_object(rng, m, &format!("{t}{i}_"))).collect()
        };
        let (r0, r1, r2) = (row(&mut rng, "a"), row(&mut rng, "b"), row(&mut rng, "c"));
        let fs: Vec<C::Hor> = (0..4).map(|i| c.random_hor(&mut rng, &r0[i], &r0[i + 1], a, &format!("f{i}_"))).collect();
        let us: Vec<C::Ver> = (0..4).map(|i| c.random_ver(&mut rng, &r0[i], &r1[i])).collect();
        let ws: Vec<C::Ver> = (0..3).map(|i| c.random_ver(&mut rng, &r1[i], &r2[i])).collect();
        let s1 = c.random_square_from(&mut rng, &fs[0], &us[0], &us[1], "s");
        let s2 = c.random_square_from(&mut rng, &fs[1], &us[1], &us[2], "t");
        let s3 = c.random_square_from(&mut rng, &fs[2], &us[2], &us[3], "r");
        let t1 = c.random_square_from(&mut rng, &c.sq_bottom(&s1), &ws[0], &ws[1], "p");
        let t2 = c.random_square_from(&mut rng, &c.sq_bottom(&s2), &ws[1], &ws[2], "q");
        let (id0, id1) = (c.ver_id(&r2[0]), c.ver_id(&r2[1]));
        let v1 = c.random_square_from(&mut rng, &c.sq_bottom(&t1), &id0, &id1, "v");

        strict(
            &mut report,
            c,
            "interchange",
            c.sq_hcomp(&s1, &s2).and_then(|top| c.sq_vcomp(&top, &c.sq_hcomp(&t1, &t2)?)),
            c.sq_vcomp(&s1, &t1).and_then(|l| c.sq_hcomp(&l, &c.sq_vcomp(&s2, &t2)?)),
            &[&s1, &s2, &t1, &t2],
        );
        strict(&mut report, c, "vertical identity above", c.sq_vcomp(&c.sq_ver_id(&fs[0]), &s1), Ok(s1.clone()), &[&s1]);
        strict(
            &mut report,
            c,
            "vertical identity below",
            c.sq_vcomp(&s1, &c.sq_ver_id(&c.sq_bottom(&s1))),
            Ok(s1.clone()),
            &[&s1],
        );
        strict(
            &mut report,
            c,
            "vertical associativity",
            c.sq_vcomp(&s1, &t1).and_then(|x| c.sq_vcomp(&x, &v1)),
            c.sq_vcomp(&t1, &v1).and_then(|x| c.sq_vcomp(&s1, &x)),
            &[&s1, &t1, &v1],
        );
        strict(
            &mut report,
            c,
            "horizontal identity on composite vertical",
            c.ver_comp(&us[0], &ws[0]).map(|uw| c.sq_hor_id(&uw)),
            c.sq_vcomp(&c.sq_hor_id(&us[0]), &c.sq_hor_id(&ws[0])),
            &[],
        );
        strict(
            &mut report,
            c,
            "vertical identity on composite horizontal",
            c.sq_hcomp(&c.sq_ver_id(&fs[0]), &c.sq_ver_id(&fs[1])),
            c.hor_comp(&fs[0], &fs[1]).map(|f| c.sq_ver_id(&f)),
            &[],
        );

        let atom = |f: &C::Hor| HorExpr::<C>::atom(f);
        let (g1, g2, g3) = (c.sq_bottom(&s1), c.sq_bottom(&s2), c.sq_bottom(&s3));
        mod_coherence(
            &mut report,
            c,
            "left identity square",
            c.sq_hcomp(&c.sq_hor_id(&us[0]), &s1).map(|sq| {
                Cell::new(
                    sq,
                    HorExpr::comp(HorExpr::id(&r0[0]), atom(&fs[0])),
                    HorExpr::comp(HorExpr::id(&r1[0]), atom(&g1)),
                )
            }),
            Ok(Cell::plain(c, &s1)),
            &[&s1],
        );
        mod_coherence(
            &mut report,
            c,
            "right identity square",
            c.sq_hcomp(&s1, &c.sq_hor_id(&us[1])).map(|sq| {
                Cell::new(
                    sq,
                    HorExpr::comp(atom(&fs[0]), HorExpr::id(&r0[1])),
                    HorExpr::comp(atom(&g1), HorExpr::id(&r1[1])),
                )
            }),
            Ok(Cell::plain(c, &s1)),
            &[&s1],
        );
        let left_nested = |a: &C::Hor, b: &C::Hor, d: &C::Hor| HorExpr::comp(HorExpr::comp(atom(a), atom(b)), atom(d));
        let right_nested = |a: &C::Hor, b: &C::Hor, d: &C::Hor| HorExpr::comp(atom(a), HorExpr::comp(atom(b), atom(d)));
        mod_coherence(
            &mut report,
            c,
            "horizontal associativity",
            c.sq_hcomp(&s1, &s2)
                .and_then(|x| c.sq_hcomp(&x, &s3))
                .map(|sq| Cell::new(sq, left_nested(&fs[0], &fs[1], &fs[2]), left_nested(&g1, &g2, &g3))),
            c.sq_hcomp(&s2, &s3)
                .and_then(|x| c.sq_hcomp(&s1, &x))
                .map(|sq| Cell::new(sq, right_nested(&fs[0], &fs[1], &fs[2]), right_nested(&g1, &g2, &g3))),
            &[&s1, &s2, &s3],
        );

        let (f0, f1, f2, f3) = (&fs[0], &fs[1], &fs[2], &fs[3]);
        let pentagon = || -> Result<(C::Sq, C::Sq)> {
            let f01 = c.hor_comp(f0, f1)?;
            let f12 = c.hor_comp(f1, f2)?;
            let f23 = c.hor_comp(f2, f3)?;
            let lhs = c.sq_vcomp(&c.associator(&f01, f2, f3)?, &c.associator(f0, f1, &f23)?)?;
            let first = c.sq_hcomp(&c.associator(f0, f1, f2)?, &c.sq_ver_id(f3))?;
            let second = c.associator(f0, &f12, f3)?;
            let third = c.sq_hcomp(&c.sq_ver_id(f0), &c.associator(f1, f2, f3)?)?;
            Ok((lhs, c.sq_vcomp(&c.sq_vcomp(&first, &second)?, &third)?))
        };
        let p = pentagon();
        strict(
            &mut report,
            c,
            "pentagon",
            p.as_ref().map(|x| x.0.clone()).map_err(clone_err),
            p.as_ref().map(|x| x.1.clone()).map_err(clone_err),
            &[],
        );
        let triangle = || -> Result<(C::Sq, C::Sq)> {
            let idy = c.hor_id(&r0[1]);
            let lhs = c.sq_vcomp(&c.associator(f0, &idy, f1)?, &c.sq_hcomp(&c.sq_ver_id(f0), &c.left_unitor(f1))?)?;
            Ok((lhs, c.sq_hcomp(&c.right_unitor(f0), &c.sq_ver_id(f1))?))
        };
        let t = triangle();
        strict(
            &mut report,
            c,
            "triangle",
            t.as_ref().map(|x| x.0.clone()).map_err(clone_err),
            t.as_ref().map(|x| x.1.clone()).map_err(clone_err),
            &[],
        );
        let inv = c.associator(f0, f1, f2).and_then(|a| Ok((a.clone(), c.invert_globular(&a)?)));
        let ok = inv.as_ref().map(|(a, b)| is_inverse(c, a, b)).unwrap_or(false);
        report.check(
            "associator invertible",
            ok,
            || match &inv {
                Err(e) => e.to_string(),
                Ok(_) => "inverse does not compose to identities".into(),
            },
            || inv.as_ref().map(|(a, _)| vec![c.render_square(a)]).unwrap_or_default(),
        );
    }
    report.done(start)
}

fn clone_err(e: &Error) -> Error {
    Error::Invalid(e.to_string())
}

/// The companion equalities and triangle identities for every vertical
/// arrow between objects of size at most `max_size`.
pub fn check_framed<C: Sampling>(c: &C, max_size: usize) -> LawReport {
    let start = Instant::now();
    let mut report = LawReport::new("framed", 0);
    let xs = c.objects_up_to(max_size, "x");
    let ys = c.objects_up_to(max_size, "y");
    for x in &xs {
        for y in &ys {
            for u in c.all_ver(x, y) {
                let context = vec![format!("vertical arrow {u:?}")];
                let eqs = framing_equations(c, &u);
                if report.ok("framing", &eqs, &context) {
                    for eq in eqs.unwrap() {
                        report.equation(c, &eq, &context);
                    }
                }
            }
        }
    }
    report.done(start)
}

fn monad_context<C: DoubleCategory>(c: &C, m: &MonadData<C>) -> Vec<String> {
    vec![
        format!("multiplication:\n{}", c.render_square(&m.mult)),
        format!("unit:\n{}", c.render_square(&m.unit)),
    ]
}

/// Associativity and unit laws of one monad.
pub fn check_monad_laws<C: DoubleCategory>(c: &C, m: &MonadData<C>) -> LawReport {
    let start = Instant::now();
    let mut report = LawReport::new("monad-laws", 0);
    let context = monad_context(c, m);
    for eq in monad_law_equations(c, m) {
        report.equation(c, &eq, &context);
    }
    report.done(start)
}

/// The laws of a horizontal monad map.
pub fn check_hor_map<C: DoubleCategory, O: EndoObject<C>>(c: &C, h: &HorMap<C, O>) -> LawReport {
    let start = Instant::now();
    let mut report = LawReport::new("hor-map", 0);
    let context = vec![format!("phi:\n{}", c.render_square(&h.phi))];
    for eq in h.equations(c) {
        report.equation(c, &eq, &context);
    }
    report.done(start)
}

/// The laws of a vertical monad map.
pub fn check_vert_map<C: DoubleCategory, O: EndoObject<C>>(c: &C, v: &VertMap<C, O>) -> LawReport {
    let start = Instant::now();
    let mut report = LawReport::new("vert-map", 0);
    let context = vec![format!("square:\n{}", c.render_square(&v.sq))];
    for eq in v.equations(c) {
        report.equation(c, &eq, &context);
    }
    report.done(start)
}

/// The compatibility condition of an endomorphism or monad square.
pub fn check_endo_square<C: DoubleCategory, O: EndoObject<C>>(c: &C, s: &EndoSq<C, O>) -> LawReport {
    let start = Instant::now();
    let mut report = LawReport::new("endo-square", 0);
    let context = render_all(c, &[&s.top.phi, &s.left.sq, &s.sq, &s.right.sq, &s.bottom.phi]);
    report.equation(c, &s.equation(c), &context);
    report.done(start)
}

/// Every vertical map from the base of `bundle` into each target monad
/// factors through the unit by exactly one vertical monad map.
pub fn check_universal_property<C: Sampling>(
    c: &C,
    bundle: &FreeMonadBundle<C>,
    targets: &[MonadData<C>],
    limit: usize,
) -> LawReport {
    let start = Instant::now();
    let mut report = LawReport::new("universal-property", 0);
    let base = bundle.base();
    for (ti, target) in targets.iter().enumerate() {
        for u in c.all_ver(&base.obj, &target.endo.obj) {
            let ubars = match c.squares_with_boundary(&base.arrow, &target.endo.arrow, &u, &u, limit) {
                Ok(v) => v,
                Err(Error::Bound(_)) => {
                    report.partial = true;
                    continue;
                }
                Err(e) => {
                    report.ok::<()>("enumerate vertical maps", &Err(e), &[]);
                    continue;
                }
            };
            for ubar in ubars {
                let mut context = vec![format!("target monad #{ti}")];
                context.extend(monad_context(c, target));
                context.push(format!("vertical map:\n{}", c.render_square(&ubar)));
                let v = VertMap::new(c, base.clone(), target.endo.clone(), u.clone(), ubar.clone());
                let v = match v {
                    Ok(v) => v,
                    Err(e) => {
                        report.ok::<()>("vertical map", &Err(e), &context);
                        continue;
                    }
                };
                let sharp = bundle.vertical_sharp(c, &v, target);
                if !report.ok("factorization exists", &sharp, &context) {
                    continue;
                }
                let sharp = sharp.unwrap();
                context.push(format!("factorization:\n{}", c.render_square(&sharp.sq)));
                for eq in sharp.equations(c) {
                    report.equation(c, &eq, &context);
                }
                let restricted = c.sq_vcomp(&bundle.free.iota, &sharp.sq).ok();
                report.check(
                    "factorization restricts along the unit",
                    restricted.as_ref() == Some(&ubar),
                    || "unit followed by the factorization is not the given map".into(),
                    || context.clone(),
                );
                match bundle.vertical_factorizations(c, &v, target, limit) {
                    Ok(all) => report.check(
                        "factorization unique",
                        all.len() == 1 && all[0] == sharp,
                        || format!("{} lawful factorizations found", all.len()),
                        || {
                            let mut cells = context.clone();
                            cells.extend(all.iter().map(|m| c.render_square(&m.sq)));
                            cells
                        },
                    ),
                    Err(Error::Bound(_)) => report.partial = true,
                    Err(e) => {
                        report.ok::<()>("factorization unique", &Err(e), &context);
                    }
                }
            }
        }
    }
    report.done(start)
}

/// Runs the construction of `α♯` on the identity square of every vertical
/// map from the base of `bundle` into each target, evaluating each step of
/// the argument and checking that the equalizer inclusion is invertible.
pub fn check_theorem_pipeline<C: Sampling>(
    c: &C,
    bundle: &FreeMonadBundle<C>,
    targets: &[MonadData<C>],
    limit: usize,
) -> LawReport {
    let start = Instant::now();
    let mut report = LawReport::new("theorem-pipeline", 0);
    let end = build_end(c.clone());
    let mnd = build_mnd(c.clone());
    let base = bundle.base();
    for (ti, target) in targets.iter().enumerate() {
        let bottom = mnd.hor_id(target);
        let mut laws = vec![format!("target monad #{ti}")];
        laws.extend(monad_context(c, target));
        for eq in monad_law_equations(c, target) {
            report.equation(c, &eq, &laws);
        }
        for u in c.all_ver(&base.obj, &target.endo.obj) {
            let ubars = match c.squares_with_boundary(&base.arrow, &target.endo.arrow, &u, &u, limit) {
                Ok(v) => v,
                Err(_) => {
                    report.partial = true;
                    continue;
                }
            };
            for ubar in ubars {
                let mut context = vec![format!("target monad #{ti}")];
                context.extend(monad_context(c, target));
                context.push(format!("vertical map:\n{}", c.render_square(&ubar)));
                let v = VertMap {
                    src: base.clone(),
                    tgt: target.endo.clone(),
                    arrow: u.clone(),
                    sq: ubar,
                };
                let alpha = end.sq_hor_id(&v);
                let run = theorem_pipeline(c, bundle, bundle, &alpha, &bottom);
                if !report.ok("pipeline", &run, &context) {
                    continue;
                }
                let run = run.unwrap();
                for eq in &run.equations {
                    report.equation(c, eq, &context);
                }
                let w = &run.witness;
                for eq in [&w.equalizes, &w.unit_case, &w.step_case] {
                    report.equation(c, eq, &context);
                }
                report.check(
                    "algebra structure",
                    w.lambda.is_some() && w.rho.is_some() && w.algebra.is_some(),
                    || "lambda, rho or their copair could not be formed".into(),
                    || context.clone(),
                );
                report.check(
                    "equalizer inclusion invertible",
                    w.theta_inverse.as_ref().is_some_and(|inv| is_inverse(c, &w.theta, inv)),
                    || "no inverse for theta".into(),
                    || {
                        let mut cells = context.clone();
                        cells.push(c.render_square(&w.theta));
                        cells
                    },
                );
                // the only monad square below the identity on F is alpha
                let sq = &run.sharp;
                let cands = c.squares_with_boundary(&sq.top.arrow, &sq.bottom.arrow, &sq.left.arrow, &sq.right.arrow, limit);
                match cands {
                    Ok(all) => {
                        let lifted: Vec<C::Sq> = all
                            .into_iter()
                            .filter(|s| {
                                let cand = EndoSq {
                                    sq: s.clone(),
                                    ..sq.clone()
                                };
                                c.sq_vcomp(&c.sq_ver_id(&alpha.top.arrow), s).ok().as_ref() == Some(&alpha.sq)
                                    && cand.equation(c).verdict(c).holds()
                            })
                            .collect();
                        report.check(
                            "monad square unique",
                            lifted == vec![sq.sq.clone()],
                            || format!("{} candidate monad squares", lifted.len()),
                            || context.clone(),
                        );
                    }
                    Err(_) => report.partial = true,
                }
            }
        }
    }
    report.done(start)
}

/// Base change lifts are cartesian: for every endomorphism `P'` on every
/// object of size at most `max_size`, every `u` into it, and every square
/// `w̄: R ⇒ P'` over `v;u`, there is exactly one `v̄: R ⇒ P` over `v`
/// composing with the lift to `w̄`. Monad targets are checked to give
/// monad lifts that forget to the endomorphism lift.
pub fn check_fibration<C: Sampling>(
    c: &C,
    max_size: usize,
    max_endo: usize,
    monads: &[MonadData<C>],
) -> LawReport {
    let start = Instant::now();
    let mut report = LawReport::new("fibration", 0);
    let objs: Vec<C::Obj> = c.objects_up_to(max_size, "x").into_iter().skip(1).collect();
    for x in &objs {
        for x2 in &objs {
            for u in c.all_ver(x, x2) {
                for p2 in c.all_endos(x2, max_endo) {
                    let target = crate::mnd::Endo {
                        obj: x2.clone(),
                        arrow: p2.clone(),
                    };
                    let context = vec![format!("u = {u:?}"), format!("target {p2:?}")];
                    let lift = crate::mnd::base_change_endo(c, &u, &target);
                    if !report.ok("base change", &lift, &context) {
                        continue;
                    }
                    let lift = lift.unwrap();
                    for z in &objs {
                        for v in c.all_ver(z, x) {
                            let vu = c.ver_comp(&v, &u).expect("composable");
                            for r in c.all_endos(z, max_endo) {
                                let wbars = match c.squares_with_boundary(&r, &p2, &vu, &vu, ENUMERATION_LIMIT) {
                                    Ok(w) => w,
                                    Err(_) => {
                                        report.partial = true;
                                        continue;
                                    }
                                };
                                let rz = crate::mnd::Endo {
                                    obj: z.clone(),
                                    arrow: r.clone(),
                                };
                                for wbar in wbars {
                                    let fs = crate::mnd::factorizations_through(c, &lift, &rz, &v, &wbar, ENUMERATION_LIMIT);
                                    match fs {
                                        Ok(fs) => report.check(
                                            "unique factorization through the lift",
                                            fs.len() == 1,
                                            || format!("{} factorizations", fs.len()),
                                            || {
                                                let mut cells = context.clone();
                                                cells.push(c.render_square(&lift.sq));
                                                cells.push(c.render_square(&wbar));
                                                cells
                                            },
                                        ),
                                        Err(_) => report.partial = true,
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    for m in monads {
        for x in &objs {
            for u in c.all_ver(x, &m.endo.obj) {
                let context = monad_context(c, m);
                let lift = crate::mnd::base_change_monad(c, &u, m);
                if !report.ok("monad base change", &lift, &context) {
                    continue;
                }
                let lift = lift.unwrap();
                for eq in lift.src.own_equations(c).into_iter().chain(lift.equations(c)) {
                    report.equation(c, &eq, &context);
                }
                let endo = crate::mnd::base_change_endo(c, &u, &m.endo);
                report.check(
                    "forgetting preserves the lift",
                    endo.as_ref().ok() == Some(&crate::mnd::forget_ver(&lift)),
                    || "monad lift and endomorphism lift differ".into(),
                    || context.clone(),
                );
            }
        }
    }
    report.done(start)
}

/// Counts monads on `x` with apex at most `max` by filtering every
/// endomorphism, multiplication and unit through the laws.
pub fn brute_force_monad_count<C: Sampling>(c: &C, x: &C::Obj, max: usize) -> Result<usize> {
    let mut n = 0;
    let id = c.ver_id(x);
    for p in c.all_endos(x, max) {
        let pp = c.hor_comp(&p, &p)?;
        let mults = c.squares_with_boundary(&pp, &p, &id, &id, ENUMERATION_LIMIT)?;
        let units = c.squares_with_boundary(&c.hor_id(x), &p, &id, &id, ENUMERATION_LIMIT)?;
        for mult in &mults {
            for unit in &units {
                let m = MonadData {
                    endo: crate::mnd::Endo {
                        obj: x.clone(),
                        arrow: p.clone(),
                    },
                    mult: mult.clone(),
                    unit: unit.clone(),
                };
                if monad_law_equations(c, &m).iter().all(|e| e.verdict(c).holds()) {
                    n += 1;
                }
            }
        }
    }
    Ok(n)
}

/// Squares with the same boundary as `s`, other than `s`.
pub fn alternatives<C: DoubleCategory>(c: &C, s: &C::Sq) -> Result<Vec<C::Sq>> {
    let all = c.squares_with_boundary(&c.sq_top(s), &c.sq_bottom(s), &c.sq_left(s), &c.sq_right(s), ENUMERATION_LIMIT)?;
    Ok(all.into_iter().filter(|t| t != s).collect())
}

/// `free` with its multiplication replaced by `mult`.
pub fn with_mult<C: DoubleCategory>(free: &FreeMonad<C>, mult: C::Sq) -> FreeMonad<C> {
    let mut out = free.clone();
    out.monad.mult = mult;
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::poly_instance;
    use crate::span::{enumerate_categories, span_instance};

    #[test]
    fn span_axioms_pass() {
        let r = check_double_axioms(&InstanceSampler::new(span_instance(), 2, 2, 1), 30);
        assert!(r.passed(), "{r}");
        assert!(r.machine_line().starts_with("SUITE double-axioms PASS"));
    }

    #[test]
    fn poly_axioms_pass() {
        let r = check_double_axioms(&InstanceSampler::new(poly_instance(), 2, 2, 1), 20);
        assert!(r.passed(), "{r}");
    }

    #[test]
    fn faults_are_caught() {
        for fault in [Fault::UnitSquare, Fault::BrokenComposite, Fault::DroppedCoherence] {
            let s = InstanceSampler::new(Faulty::new(span_instance(), fault), 2, 2, 1);
            let r = check_double_axioms(&s, 30);
            assert!(!r.passed(), "{fault:?}");
            assert!(!r.failures[0].cells.is_empty() || !r.failures[0].detail.is_empty());
        }
        let r = check_framed(&Faulty::new(span_instance(), Fault::SwappedFraming), 2);
        assert!(!r.passed());
    }

    #[test]
    fn framed_small() {
        assert!(check_framed(&span_instance(), 2).passed());
        assert!(check_framed(&poly_instance(), 1).passed());
    }

    #[test]
    fn monad_count_on_a_point() {
        let c = span_instance();
        let one = named_set("x", 1);
        let enumerated = enumerate_categories(&one, 2).unwrap().len();
        assert_eq!(brute_force_monad_count(&c, &one, 2).unwrap(), enumerated);
    }
}
