//! The double category of spans of finite sets.
//!
//! Horizontal arrows are spans `X ← F → Y`, vertical arrows are functions
//! and squares are maps of apexes compatible with both legs. Endomorphisms
//! are graphs and monads are small categories. Composition is by pullback,
//! so composite apex elements are named `(a,b)` and the coherence squares
//! just rebracket those names.

use std::fmt;

use rand::Rng;

use crate::doublecat::{DoubleCategory, Endo, Framing, FreeMonad, LocalCoproduct, MonadData};
use crate::error::{boundary, invalid, Error, Result};
use crate::finset::{coproduct, product_indices, pullback, Elem, FinFun, FinSet};
use crate::poly::permutations;

/// Default cut-off for path enumeration.
pub const DEFAULT_MAX_LEN: usize = 16;

/// A span `src ← apex → tgt`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Span {
    src: FinSet,
    tgt: FinSet,
    apex: FinSet,
    left: FinFun,
    right: FinFun,
}

impl Span {
    pub fn new(left: FinFun, right: FinFun) -> Result<Span> {
        if left.dom() != right.dom() {
            return Err(boundary("span legs have different domains"));
        }
        Ok(Span {
            src: left.cod().clone(),
            tgt: right.cod().clone(),
            apex: left.dom().clone(),
            left,
            right,
        })
    }

    pub fn src(&self) -> &FinSet {
        &self.src
    }
    pub fn tgt(&self) -> &FinSet {
        &self.tgt
    }
    pub fn apex(&self) -> &FinSet {
        &self.apex
    }
    pub fn left(&self) -> &FinFun {
        &self.left
    }
    pub fn right(&self) -> &FinFun {
        &self.right
    }

    pub fn is_endo(&self) -> bool {
        self.src == self.tgt
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ← {{", self.src)?;
        for i in 0..self.apex.len() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(
                f,
                "{}: {}→{}",
                self.apex.elem(i),
                self.src.elem(self.left.at(i)),
                self.tgt.elem(self.right.at(i))
            )?;
        }
        write!(f, "}} → {}", self.tgt)
    }
}

/// The identity span on `x`.
pub fn id_span(x: &FinSet) -> Span {
    Span::new(FinFun::identity(x), FinFun::identity(x)).expect("identity legs")
}

/// `g ∘ f`: the span `f` followed by `g`, with apex the pullback.
pub fn compose_spans(g: &Span, f: &Span) -> Result<Span> {
    if f.tgt != g.src {
        return Err(boundary(format!(
            "cannot compose spans: target {} differs from source {}",
            f.tgt, g.src
        )));
    }
    let pb = pullback(&f.right, &g.left)?;
    Span::new(pb.p1.then(&f.left)?, pb.p2.then(&g.right)?)
}

/// A map of spans over `u` and `v`: `mid` commutes with both legs.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SpanSquare {
    top: Span,
    bottom: Span,
    u: FinFun,
    v: FinFun,
    mid: FinFun,
}

impl SpanSquare {
    pub fn new(top: Span, bottom: Span, u: FinFun, v: FinFun, mid: FinFun) -> Result<SpanSquare> {
        let s = SpanSquare {
            top,
            bottom,
            u,
            v,
            mid,
        };
        s.validate()?;
        Ok(s)
    }

    /// A globular square from its apex map.
    pub fn globular(top: Span, bottom: Span, mid: FinFun) -> Result<SpanSquare> {
        let u = FinFun::identity(&top.src);
        let v = FinFun::identity(&top.tgt);
        SpanSquare::new(top, bottom, u, v, mid)
    }

    fn validate(&self) -> Result<()> {
        let (t, b) = (&self.top, &self.bottom);
        if self.u.dom() != &t.src || self.u.cod() != &b.src {
            return Err(boundary("left vertical arrow does not match span sources"));
        }
        if self.v.dom() != &t.tgt || self.v.cod() != &b.tgt {
            return Err(boundary("right vertical arrow does not match span targets"));
        }
        if self.mid.dom() != &t.apex || self.mid.cod() != &b.apex {
            return Err(boundary("apex map does not match the apexes"));
        }
        for i in 0..t.apex.len() {
            let j = self.mid.at(i);
            if b.left.at(j) != self.u.at(t.left.at(i)) {
                return Err(invalid(format!(
                    "apex map breaks the left leg at `{}`",
                    t.apex.elem(i)
                )));
            }
            if b.right.at(j) != self.v.at(t.right.at(i)) {
                return Err(invalid(format!(
                    "apex map breaks the right leg at `{}`",
                    t.apex.elem(i)
                )));
            }
        }
        Ok(())
    }

    pub fn top(&self) -> &Span {
        &self.top
    }
    pub fn bottom(&self) -> &Span {
        &self.bottom
    }
    pub fn u(&self) -> &FinFun {
        &self.u
    }
    pub fn v(&self) -> &FinFun {
        &self.v
    }
    pub fn mid(&self) -> &FinFun {
        &self.mid
    }

    /// The image of the top apex element at index `i`, as an element name.
    pub fn image(&self, i: usize) -> &Elem {
        self.bottom.apex.elem(self.mid.at(i))
    }

    /// The image of a named top apex element.
    pub fn apply(&self, e: &Elem) -> Result<&Elem> {
        self.mid
            .apply(e)
            .ok_or_else(|| invalid(format!("`{e}` is not in the square's domain")))
    }
}

impl fmt::Display for SpanSquare {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "top:    {}", self.top)?;
        writeln!(f, "bottom: {}", self.bottom)?;
        writeln!(f, "left:   {}", self.u)?;
        writeln!(f, "right:  {}", self.v)?;
        write!(f, "mid:    {}", self.mid)
    }
}

fn pair_parts(e: &Elem) -> Result<(&Elem, &Elem)> {
    match e.as_tuple() {
        Some([a, b]) => Ok((a, b)),
        _ => Err(invalid(format!("`{e}` is not a pair"))),
    }
}

/// The double category of spans of finite sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct SpanDouble;

/// Returns the span double category.
pub fn span_instance() -> SpanDouble {
    SpanDouble
}

impl DoubleCategory for SpanDouble {
    type Obj = FinSet;
    type Hor = Span;
    type Ver = FinFun;
    type Sq = SpanSquare;

    fn name(&self) -> String {
        "span".into()
    }

    fn hor_src(&self, f: &Span) -> FinSet {
        f.src.clone()
    }
    fn hor_tgt(&self, f: &Span) -> FinSet {
        f.tgt.clone()
    }
    fn hor_id(&self, x: &FinSet) -> Span {
        id_span(x)
    }
    fn hor_comp(&self, f: &Span, g: &Span) -> Result<Span> {
        compose_spans(g, f)
    }

    fn ver_src(&self, u: &FinFun) -> FinSet {
        u.dom().clone()
    }
    fn ver_tgt(&self, u: &FinFun) -> FinSet {
        u.cod().clone()
    }
    fn ver_id(&self, x: &FinSet) -> FinFun {
        FinFun::identity(x)
    }
    fn ver_comp(&self, u: &FinFun, v: &FinFun) -> Result<FinFun> {
        u.then(v)
    }

    fn sq_top(&self, s: &SpanSquare) -> Span {
        s.top.clone()
    }
    fn sq_bottom(&self, s: &SpanSquare) -> Span {
        s.bottom.clone()
    }
    fn sq_left(&self, s: &SpanSquare) -> FinFun {
        s.u.clone()
    }
    fn sq_right(&self, s: &SpanSquare) -> FinFun {
        s.v.clone()
    }

    fn sq_hor_id(&self, u: &FinFun) -> SpanSquare {
        SpanSquare::new(id_span(u.dom()), id_span(u.cod()), u.clone(), u.clone(), u.clone())
            .expect("identity square on a function")
    }

    fn sq_ver_id(&self, f: &Span) -> SpanSquare {
        SpanSquare::globular(f.clone(), f.clone(), FinFun::identity(&f.apex))
            .expect("identity square on a span")
    }

    fn sq_hcomp(&self, a: &SpanSquare, b: &SpanSquare) -> Result<SpanSquare> {
        if a.v != b.u {
            return Err(boundary("squares do not share a vertical edge"));
        }
        let top = compose_spans(&b.top, &a.top)?;
        let bottom = compose_spans(&b.bottom, &a.bottom)?;
        let mid = FinFun::from_fn(top.apex.clone(), bottom.apex.clone(), |e| {
            let (x, y) = pair_parts(e).ok()?;
            Some(Elem::pair(a.mid.apply(x)?.clone(), b.mid.apply(y)?.clone()))
        })?;
        SpanSquare::new(top, bottom, a.u.clone(), b.v.clone(), mid)
    }

    fn sq_vcomp(&self, a: &SpanSquare, b: &SpanSquare) -> Result<SpanSquare> {
        if a.bottom != b.top {
            return Err(boundary(format!(
                "cannot stack squares: {}",
                self.describe_hor_mismatch(&b.top, &a.bottom)
            )));
        }
        SpanSquare::new(
            a.top.clone(),
            b.bottom.clone(),
            a.u.then(&b.u)?,
            a.v.then(&b.v)?,
            a.mid.then(&b.mid)?,
        )
    }

    fn associator(&self, f: &Span, g: &Span, h: &Span) -> Result<SpanSquare> {
        let top = self.hor_comp(&self.hor_comp(f, g)?, h)?;
        let bottom = self.hor_comp(f, &self.hor_comp(g, h)?)?;
        let mid = FinFun::from_fn(top.apex.clone(), bottom.apex.clone(), |e| {
            let (ab, c) = pair_parts(e).ok()?;
            let (a, b) = pair_parts(ab).ok()?;
            Some(Elem::pair(a.clone(), Elem::pair(b.clone(), c.clone())))
        })?;
        SpanSquare::globular(top, bottom, mid)
    }

    fn left_unitor(&self, f: &Span) -> SpanSquare {
        let top = compose_spans(f, &id_span(&f.src)).expect("unit composite");
        let mid = FinFun::from_fn(top.apex.clone(), f.apex.clone(), |e| {
            Some(pair_parts(e).ok()?.1.clone())
        })
        .expect("left unitor");
        SpanSquare::globular(top, f.clone(), mid).expect("left unitor")
    }

    fn right_unitor(&self, f: &Span) -> SpanSquare {
        let top = compose_spans(&id_span(&f.tgt), f).expect("unit composite");
        let mid = FinFun::from_fn(top.apex.clone(), f.apex.clone(), |e| {
            Some(pair_parts(e).ok()?.0.clone())
        })
        .expect("right unitor");
        SpanSquare::globular(top, f.clone(), mid).expect("right unitor")
    }

    fn invert_globular(&self, s: &SpanSquare) -> Result<SpanSquare> {
        if !self.is_globular(s) {
            return Err(invalid("only globular squares are inverted"));
        }
        let inv = s
            .mid
            .inverse()
            .ok_or_else(|| invalid("apex map is not a bijection"))?;
        SpanSquare::globular(s.bottom.clone(), s.top.clone(), inv)
    }

    fn validate_square(&self, s: &SpanSquare) -> Result<()> {
        s.validate()
    }

    fn squares_with_boundary(
        &self,
        top: &Span,
        bottom: &Span,
        left: &FinFun,
        right: &FinFun,
        limit: usize,
    ) -> Result<Vec<SpanSquare>> {
        let choices = allowed_images(top, bottom, left, right);
        enumerate_mids(top, bottom, left, right, &choices, limit)
    }

    fn lifts_through(
        &self,
        lower: &SpanSquare,
        target: &SpanSquare,
        bottom: &Span,
        left: &FinFun,
        right: &FinFun,
        limit: usize,
    ) -> Result<Vec<SpanSquare>> {
        let top = &lower.bottom;
        if target.top != lower.top || target.bottom != *bottom {
            return Ok(Vec::new());
        }
        let mut choices = allowed_images(top, bottom, left, right);
        for i in 0..lower.top.apex.len() {
            let j = lower.mid.at(i);
            let want = target.mid.at(i);
            if !choices[j].contains(&want) {
                return Ok(Vec::new());
            }
            choices[j] = vec![want];
        }
        enumerate_mids(top, bottom, left, right, &choices, limit)
    }

    fn render_square(&self, s: &SpanSquare) -> String {
        s.to_string()
    }

    fn describe_hor_mismatch(&self, expected: &Span, actual: &Span) -> String {
        if expected.src != actual.src || expected.tgt != actual.tgt {
            return format!(
                "spans {}→{} and {}→{} have different ends",
                expected.src, expected.tgt, actual.src, actual.tgt
            );
        }
        if let Some(e) = expected.apex.iter().find(|e| !actual.apex.contains(e)) {
            return format!("element `{e}` is missing from the apex {}", actual.apex);
        }
        if let Some(e) = actual.apex.iter().find(|e| !expected.apex.contains(e)) {
            return format!("unexpected apex element `{e}`");
        }
        "apexes list the same elements with different order or legs".into()
    }

    fn framing(&self, u: &FinFun) -> Result<Framing<SpanDouble>> {
        let (x, x2) = (u.dom(), u.cod());
        let idx = FinFun::identity(x);
        let idx2 = FinFun::identity(x2);
        let companion = Span::new(idx.clone(), u.clone())?;
        let conjoint = Span::new(u.clone(), idx.clone())?;
        Ok(Framing {
            arrow: u.clone(),
            alpha: SpanSquare::new(companion.clone(), id_span(x2), u.clone(), idx2.clone(), u.clone())?,
            beta: SpanSquare::new(conjoint.clone(), id_span(x2), idx2.clone(), u.clone(), u.clone())?,
            gamma: SpanSquare::new(id_span(x), conjoint.clone(), u.clone(), idx.clone(), idx.clone())?,
            delta: SpanSquare::new(id_span(x), companion.clone(), idx.clone(), u.clone(), idx)?,
            companion,
            conjoint,
        })
    }

    fn conjoint_base(&self, f: &Span) -> Result<Option<FinFun>> {
        if f.apex == f.tgt && f.right.is_identity() {
            Ok(Some(f.left.clone()))
        } else {
            Ok(None)
        }
    }

    fn local_coproduct(&self, f: &Span, g: &Span) -> Result<LocalCoproduct<SpanDouble>> {
        if f.src != g.src || f.tgt != g.tgt {
            return Err(boundary("coproduct of non-parallel spans"));
        }
        let (apex, inl, inr) = coproduct(&f.apex, &g.apex);
        let mut lt = f.left.table().to_vec();
        lt.extend_from_slice(g.left.table());
        let mut rt = f.right.table().to_vec();
        rt.extend_from_slice(g.right.table());
        let sum = Span::new(
            FinFun::new(apex.clone(), f.src.clone(), lt)?,
            FinFun::new(apex, f.tgt.clone(), rt)?,
        )?;
        Ok(LocalCoproduct {
            inl: SpanSquare::globular(f.clone(), sum.clone(), inl)?,
            inr: SpanSquare::globular(g.clone(), sum.clone(), inr)?,
            sum,
        })
    }

    fn copair(&self, sum: &LocalCoproduct<SpanDouble>, a: &SpanSquare, b: &SpanSquare) -> Result<SpanSquare> {
        if a.top != sum.inl.top || b.top != sum.inr.top || a.bottom != b.bottom {
            return Err(boundary("copair of squares with mismatched boundaries"));
        }
        let mut table = a.mid.table().to_vec();
        table.extend_from_slice(b.mid.table());
        let mid = FinFun::new(sum.sum.apex.clone(), a.bottom.apex.clone(), table)?;
        SpanSquare::globular(sum.sum.clone(), a.bottom.clone(), mid)
    }

    fn free_monad(&self, p: &Span, bound: usize) -> Result<FreeMonad<SpanDouble>> {
        let graph = Graph::from_span(p.clone())?;
        Ok(free_category(&graph, bound)?.into_free_monad())
    }

    fn sharp(
        &self,
        free: &FreeMonad<SpanDouble>,
        monad: &MonadData<SpanDouble>,
        f: &Span,
        phi: &SpanSquare,
    ) -> Result<SpanSquare> {
        sharp_lift_span(monad, f, phi, free)
    }

    fn equalizer(&self, a: &SpanSquare, b: &SpanSquare) -> Result<(Span, SpanSquare)> {
        if a.top != b.top || a.bottom != b.bottom || a.u != b.u || a.v != b.v {
            return Err(boundary("equalizer of non-parallel squares"));
        }
        let (e, incl) = crate::finset::equalizer(&a.mid, &b.mid)?;
        let span = Span::new(incl.then(&a.top.left)?, incl.then(&a.top.right)?)?;
        let _ = e;
        let theta = SpanSquare::globular(span.clone(), a.top.clone(), incl)?;
        Ok((span, theta))
    }

    fn factor_through_equalizer(&self, incl: &SpanSquare, s: &SpanSquare) -> Result<SpanSquare> {
        if s.bottom != incl.bottom || !self.is_globular(s) {
            return Err(boundary("square does not land in the equalized arrow"));
        }
        let mid = FinFun::from_fn(s.top.apex.clone(), incl.top.apex.clone(), |e| {
            s.mid.apply(e).cloned()
        })
        .map_err(|_| invalid("square does not factor through the equalizer"))?;
        SpanSquare::globular(s.top.clone(), incl.top.clone(), mid)
    }
}

fn allowed_images(top: &Span, bottom: &Span, left: &FinFun, right: &FinFun) -> Vec<Vec<usize>> {
    (0..top.apex.len())
        .map(|i| {
            let x = left.at(top.left.at(i));
            let y = right.at(top.right.at(i));
            (0..bottom.apex.len())
                .filter(|&j| bottom.left.at(j) == x && bottom.right.at(j) == y)
                .collect()
        })
        .collect()
}

fn enumerate_mids(
    top: &Span,
    bottom: &Span,
    left: &FinFun,
    right: &FinFun,
    choices: &[Vec<usize>],
    limit: usize,
) -> Result<Vec<SpanSquare>> {
    if left.dom() != &top.src || left.cod() != &bottom.src || right.dom() != &top.tgt || right.cod() != &bottom.tgt {
        return Err(boundary("enumeration boundary does not match the spans"));
    }
    let count = choices
        .iter()
        .try_fold(1usize, |acc, c| acc.checked_mul(c.len()))
        .unwrap_or(usize::MAX);
    if count > limit {
        return Err(Error::Bound(format!(
            "{count} candidate squares exceed the limit {limit}"
        )));
    }
    product_indices(choices)
        .into_iter()
        .map(|t| {
            let mid = FinFun::new(top.apex.clone(), bottom.apex.clone(), t)?;
            SpanSquare::new(top.clone(), bottom.clone(), left.clone(), right.clone(), mid)
        })
        .collect()
}

/// A graph: a span from the node set to itself.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Graph {
    pub nodes: FinSet,
    pub edges: Span,
}

impl Graph {
    pub fn from_span(edges: Span) -> Result<Graph> {
        if !edges.is_endo() {
            return Err(boundary("a graph needs a span from a set to itself"));
        }
        Ok(Graph {
            nodes: edges.src.clone(),
            edges,
        })
    }

    /// Builds a graph from `(edge, source, target)` triples.
    pub fn from_edges(nodes: &[&str], edges: &[(&str, &str, &str)]) -> Result<Graph> {
        let nodes = FinSet::from_names(nodes)?;
        let apex = FinSet::new(edges.iter().map(|(e, _, _)| Elem::atom(e)).collect())?;
        let ends = |second: bool| -> Result<FinFun> {
            let pairs: Vec<_> = edges
                .iter()
                .map(|t| (Elem::atom(t.0), Elem::atom(if second { t.2 } else { t.1 })))
                .collect();
            FinFun::from_pairs(apex.clone(), nodes.clone(), &pairs)
        };
        let edges = Span::new(ends(false)?, ends(true)?)?;
        Graph::from_span(edges)
    }

    pub fn edge_src(&self, i: usize) -> usize {
        self.edges.left.at(i)
    }

    pub fn edge_tgt(&self, i: usize) -> usize {
        self.edges.right.at(i)
    }
}

/// A small category: a graph with composition and identities.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FinCategory {
    pub carrier: Graph,
    /// Globular square `M;M ⇒ M` sending `(a,b)` to `a` then `b`.
    pub mult: SpanSquare,
    /// Globular square `id ⇒ M`.
    pub unit: SpanSquare,
}

impl FinCategory {
    pub fn from_monad(m: &MonadData<SpanDouble>) -> Result<FinCategory> {
        Ok(FinCategory {
            carrier: Graph::from_span(m.endo.arrow.clone())?,
            mult: m.mult.clone(),
            unit: m.unit.clone(),
        })
    }

    pub fn to_monad(&self) -> MonadData<SpanDouble> {
        MonadData {
            endo: Endo {
                obj: self.carrier.nodes.clone(),
                arrow: self.carrier.edges.clone(),
            },
            mult: self.mult.clone(),
            unit: self.unit.clone(),
        }
    }

    pub fn morphisms(&self) -> &FinSet {
        &self.carrier.edges.apex
    }

    /// The composite of `a` then `b`, if defined.
    pub fn compose(&self, a: &Elem, b: &Elem) -> Option<&Elem> {
        self.mult.mid.apply(&Elem::pair(a.clone(), b.clone()))
    }

    pub fn identity(&self, x: &Elem) -> Option<&Elem> {
        self.unit.mid.apply(x)
    }

    /// A description of the category that is invariant under renaming
    /// objects and morphisms: the least relabelled table over all
    /// renamings.
    pub fn canonical_form(&self) -> Vec<usize> {
        let g = &self.carrier;
        let (n, m) = (g.nodes.len(), self.morphisms().len());
        let comp: Vec<Option<usize>> = (0..m * m)
            .map(|k| {
                let (a, b) = (self.morphisms().elem(k / m), self.morphisms().elem(k % m));
                self.compose(a, b).and_then(|c| self.morphisms().index_of(c))
            })
            .collect();
        let ids: Vec<usize> = (0..n)
            .map(|x| self.morphisms().index_of(self.identity(g.nodes.elem(x)).expect("total unit")).expect("a morphism"))
            .collect();
        let mut best: Option<Vec<usize>> = None;
        for p in permutations(n) {
            for q in permutations(m) {
                // q sends old morphism i to new index q[i]
                let mut inv = vec![0; m];
                for (i, &j) in q.iter().enumerate() {
                    inv[j] = i;
                }
                let mut key = vec![n, m];
                key.extend(inv.iter().flat_map(|&i| [p[g.edge_src(i)], p[g.edge_tgt(i)]]));
                let mut pinv = vec![0; n];
                for (x, &y) in p.iter().enumerate() {
                    pinv[y] = x;
                }
                key.extend(pinv.iter().map(|&x| q[ids[x]]));
                for a in 0..m {
                    for b in 0..m {
                        key.push(comp[inv[a] * m + inv[b]].map_or(usize::MAX, |c| q[c]));
                    }
                }
                if best.as_ref().is_none_or(|k| key < *k) {
                    best = Some(key);
                }
            }
        }
        best.unwrap_or_default()
    }
}

/// The free category on a graph together with the inclusion of edges.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FreeCategory {
    pub graph: Graph,
    pub cat: FinCategory,
    pub iota: SpanSquare,
    pub exact: bool,
    pub max_len: usize,
}

impl FreeCategory {
    pub fn into_free_monad(self) -> FreeMonad<SpanDouble> {
        FreeMonad {
            base: Endo {
                obj: self.graph.nodes.clone(),
                arrow: self.graph.edges.clone(),
            },
            monad: self.cat.to_monad(),
            iota: self.iota,
            exact: self.exact,
            bound: self.max_len,
        }
    }
}

/// Name of the empty path at `x`.
pub fn empty_path(x: &Elem) -> Elem {
    Elem::tagged("id", x.clone())
}

/// The edges of a path name, or `None` for an empty path.
pub fn path_edges(p: &Elem) -> Option<&[Elem]> {
    p.as_seq()
}

/// Human-readable form of a path: edges joined by `.`, or `id(x)`.
pub fn render_path(p: &Elem) -> String {
    match p.as_seq() {
        Some(edges) => edges.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("."),
        None => p.to_string(),
    }
}

fn concat_paths(a: &Elem, b: &Elem) -> Elem {
    match (a.as_seq(), b.as_seq()) {
        (None, _) => b.clone(),
        (_, None) => a.clone(),
        (Some(x), Some(y)) => Elem::seq(x.iter().chain(y).cloned().collect()),
    }
}

/// All paths of length at most `max_len`: the free category, cut off if the
/// graph has paths of length `max_len + 1`.
///
/// Paths are named by their edge sequences, ordered by length and then by
/// extension order. Composition is concatenation wherever the result fits
/// the bound; when the graph has longer paths the multiplication square is
/// only defined on that part of `M;M` and the result is flagged inexact.
pub fn free_category(g: &Graph, max_len: usize) -> Result<FreeCategory> {
    if max_len < 1 {
        return Err(invalid("max_len must be at least 1"));
    }
    let nodes = &g.nodes;
    let mut names = Vec::new();
    let mut src = Vec::new();
    let mut tgt = Vec::new();
    let mut lens = Vec::new();
    for (i, x) in nodes.iter().enumerate() {
        names.push(empty_path(x));
        src.push(i);
        tgt.push(i);
        lens.push(0);
    }
    // frontier: (edge list, source, target)
    let mut frontier: Vec<(Vec<usize>, usize, usize)> = vec![(Vec::new(), usize::MAX, usize::MAX)];
    let mut exact = true;
    for len in 1..=max_len + 1 {
        let mut next = Vec::new();
        for (path, s, t) in &frontier {
            for e in 0..g.edges.apex.len() {
                if path.is_empty() || g.edge_src(e) == *t {
                    let mut p = path.clone();
                    p.push(e);
                    let s = if path.is_empty() { g.edge_src(e) } else { *s };
                    next.push((p, s, g.edge_tgt(e)));
                }
            }
        }
        if len > max_len {
            exact = next.is_empty();
            break;
        }
        for (p, s, t) in &next {
            names.push(Elem::seq(p.iter().map(|&e| g.edges.apex.elem(e).clone()).collect()));
            src.push(*s);
            tgt.push(*t);
            lens.push(len);
        }
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }
    let apex = FinSet::new(names)?;
    let star = Span::new(
        FinFun::new(apex.clone(), nodes.clone(), src)?,
        FinFun::new(apex.clone(), nodes.clone(), tgt)?,
    )?;
    let full = compose_spans(&star, &star)?;
    let kept: Vec<usize> = (0..full.apex.len())
        .filter(|&i| {
            let (a, b) = pair_parts(full.apex.elem(i)).expect("pullback names are pairs");
            lens[apex.index_of(a).expect("path")] + lens[apex.index_of(b).expect("path")] <= max_len
        })
        .collect();
    let mult_top = if kept.len() == full.apex.len() {
        full
    } else {
        let sub = FinSet::new(kept.iter().map(|&i| full.apex.elem(i).clone()).collect())?;
        let incl = FinFun::new(sub, full.apex.clone(), kept)?;
        Span::new(incl.then(&full.left)?, incl.then(&full.right)?)?
    };
    let mult_mid = FinFun::from_fn(mult_top.apex.clone(), apex.clone(), |e| {
        let (a, b) = pair_parts(e).ok()?;
        Some(concat_paths(a, b))
    })?;
    let mult = SpanSquare::globular(mult_top, star.clone(), mult_mid)?;
    let unit_mid = FinFun::from_fn(nodes.clone(), apex.clone(), |x| Some(empty_path(x)))?;
    let unit = SpanSquare::globular(id_span(nodes), star.clone(), unit_mid)?;
    let iota_mid = FinFun::from_fn(g.edges.apex.clone(), apex.clone(), |e| Some(Elem::seq(vec![e.clone()])))?;
    let iota = SpanSquare::globular(g.edges.clone(), star.clone(), iota_mid)?;
    Ok(FreeCategory {
        graph: g.clone(),
        cat: FinCategory {
            carrier: Graph::from_span(star)?,
            mult,
            unit,
        },
        iota,
        exact,
        max_len,
    })
}

/// The unique monad map extending `phi: F;Q ⇒ M;F` along the free
/// category on `Q`, computed by recursion on paths: the empty path goes to
/// the unit of `M`, and each further edge applies `phi` and multiplies.
pub fn sharp_lift_span(
    monad: &MonadData<SpanDouble>,
    f: &Span,
    phi: &SpanSquare,
    free: &FreeMonad<SpanDouble>,
) -> Result<SpanSquare> {
    if !free.exact {
        return Err(Error::Truncated(format!(
            "free category cut off at length {}",
            free.bound
        )));
    }
    let d = SpanDouble;
    let q = &free.base.arrow;
    let star = &free.monad.endo.arrow;
    let m = &monad.endo.arrow;
    if phi.top != d.hor_comp(f, q)? || phi.bottom != d.hor_comp(m, f)? || !d.is_globular(phi) {
        return Err(boundary("phi must be a globular square F;Q ⇒ M;F"));
    }
    let top = d.hor_comp(f, star)?;
    let bottom = phi.bottom.clone();
    let mult = &monad.mult;
    let unit = &monad.unit;
    let mid = FinFun::from_fn(top.apex.clone(), bottom.apex.clone(), |e| {
        let (fe, path) = pair_parts(e).ok()?;
        let fi = f.apex.index_of(fe)?;
        let mut acc = unit.image(f.left.at(fi)).clone();
        let mut cur = fe.clone();
        for edge in path_edges(path).unwrap_or(&[]) {
            let out = phi.mid.apply(&Elem::pair(cur.clone(), edge.clone()))?;
            let (m2, f2) = pair_parts(out).ok()?;
            acc = mult.mid.apply(&Elem::pair(acc, m2.clone()))?.clone();
            cur = f2.clone();
        }
        Some(Elem::pair(acc, cur))
    })
    .map_err(|e| invalid(format!("sharp recursion failed: {e}")))?;
    SpanSquare::globular(top, bottom, mid)
}

/// All categories with object set `objects` whose morphism set is exactly
/// `morphisms`, in a deterministic order.
///
/// Legs, identities and composition tables are enumerated with the unit
/// laws forced and associativity checked as soon as a triple is defined.
pub fn enumerate_categories_on(objects: &FinSet, morphisms: &FinSet) -> Result<Vec<FinCategory>> {
    let n = morphisms.len();
    let k = objects.len();
    let mut out = Vec::new();
    let ends: Vec<Vec<usize>> = vec![(0..k * k).collect(); n];
    for legs in product_indices(&ends) {
        let src: Vec<usize> = legs.iter().map(|l| l / k).collect();
        let tgt: Vec<usize> = legs.iter().map(|l| l % k).collect();
        // identities: one endomorphism per object
        let id_choices: Vec<Vec<usize>> = (0..k)
            .map(|x| (0..n).filter(|&m| src[m] == x && tgt[m] == x).collect())
            .collect();
        for ids in product_indices(&id_choices) {
            let mut tables = Vec::new();
            composition_tables(&src, &tgt, &ids, &mut tables);
            for table in tables {
                out.push(build_category(objects, morphisms, &src, &tgt, &ids, &table)?);
            }
        }
    }
    Ok(out)
}

// Backtracking over composable pairs; `table[a][b]` is `a` then `b`.
fn composition_tables(src: &[usize], tgt: &[usize], ids: &[usize], out: &mut Vec<Vec<Vec<usize>>>) {
    let n = src.len();
    let is_id = |m: usize| ids.contains(&m);
    let mut table = vec![vec![usize::MAX; n]; n];
    let mut free = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if tgt[a] != src[b] {
                continue;
            }
            if is_id(a) {
                table[a][b] = b;
            } else if is_id(b) {
                table[a][b] = a;
            } else {
                free.push((a, b));
            }
        }
    }
    fn assoc_ok(table: &[Vec<usize>], src: &[usize], tgt: &[usize]) -> bool {
        let n = table.len();
        for a in 0..n {
            for b in 0..n {
                let ab = table[a][b];
                if tgt[a] != src[b] || ab == usize::MAX {
                    continue;
                }
                for c in 0..n {
                    if tgt[b] != src[c] {
                        continue;
                    }
                    let bc = table[b][c];
                    if bc == usize::MAX {
                        continue;
                    }
                    let (l, r) = (table[ab][c], table[a][bc]);
                    if l != usize::MAX && r != usize::MAX && l != r {
                        return false;
                    }
                }
            }
        }
        true
    }
    fn go(
        i: usize,
        free: &[(usize, usize)],
        table: &mut Vec<Vec<usize>>,
        src: &[usize],
        tgt: &[usize],
        out: &mut Vec<Vec<Vec<usize>>>,
    ) {
        if !assoc_ok(table, src, tgt) {
            return;
        }
        if i == free.len() {
            out.push(table.clone());
            return;
        }
        let (a, b) = free[i];
        for c in 0..src.len() {
            if src[c] == src[a] && tgt[c] == tgt[b] {
                table[a][b] = c;
                go(i + 1, free, table, src, tgt, out);
            }
        }
        table[a][b] = usize::MAX;
    }
    go(0, &free, &mut table, src, tgt, out);
}

fn build_category(
    objects: &FinSet,
    morphisms: &FinSet,
    src: &[usize],
    tgt: &[usize],
    ids: &[usize],
    table: &[Vec<usize>],
) -> Result<FinCategory> {
    let span = Span::new(
        FinFun::new(morphisms.clone(), objects.clone(), src.to_vec())?,
        FinFun::new(morphisms.clone(), objects.clone(), tgt.to_vec())?,
    )?;
    let mm = compose_spans(&span, &span)?;
    let mult_mid = FinFun::from_fn(mm.apex.clone(), morphisms.clone(), |e| {
        let (a, b) = pair_parts(e).ok()?;
        let c = table[morphisms.index_of(a)?][morphisms.index_of(b)?];
        Some(morphisms.elem(c).clone())
    })?;
    let unit_mid = FinFun::new(objects.clone(), morphisms.clone(), ids.to_vec())?;
    Ok(FinCategory {
        carrier: Graph::from_span(span.clone())?,
        mult: SpanSquare::globular(mm, span.clone(), mult_mid)?,
        unit: SpanSquare::globular(id_span(objects), span, unit_mid)?,
    })
}

/// All categories on `objects` with between `objects.len()` and
/// `max_morphisms` morphisms, named `m0, m1, ..`.
pub fn enumerate_categories(objects: &FinSet, max_morphisms: usize) -> Result<Vec<FinCategory>> {
    let mut out = Vec::new();
    for n in objects.len().max(if objects.is_empty() { 0 } else { 1 })..=max_morphisms {
        let names: Vec<String> = (0..n).map(|i| format!("m{i}")).collect();
        out.extend(enumerate_categories_on(objects, &FinSet::from_names(&names)?)?);
    }
    Ok(out)
}

/// One representative of each isomorphism class among
/// [`enumerate_categories`].
pub fn enumerate_categories_up_to_iso(objects: &FinSet, max_morphisms: usize) -> Result<Vec<FinCategory>> {
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for cat in enumerate_categories(objects, max_morphisms)? {
        if seen.insert(cat.canonical_form()) {
            out.push(cat);
        }
    }
    Ok(out)
}

/// Parses the graph text format.
///
/// ```text
/// graph
/// nodes: a b c
/// edge f a b
/// ```
pub fn parse_graph(text: &str) -> Result<Graph, ParseError> {
    let mut nodes: Option<Vec<String>> = None;
    let mut edges: Vec<(String, String, String)> = Vec::new();
    let mut seen_header = false;
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = strip_comment(raw);
        if line.trim().is_empty() {
            continue;
        }
        let col = line.len() - line.trim_start().len() + 1;
        let words: Vec<&str> = line.split_whitespace().collect();
        if !seen_header {
            if words != ["graph"] {
                return Err(ParseError::new(line_no, col, "expected `graph` header"));
            }
            seen_header = true;
            continue;
        }
        if words[0] == "nodes:" {
            if nodes.is_some() {
                return Err(ParseError::new(line_no, col, "duplicate `nodes:` line"));
            }
            nodes = Some(words[1..].iter().map(|s| s.to_string()).collect());
        } else if words[0] == "edge" {
            let Some(ns) = nodes.as_ref() else {
                return Err(ParseError::new(line_no, col, "`edge` before `nodes:`"));
            };
            if words.len() != 4 {
                return Err(ParseError::new(line_no, col, "expected `edge <name> <src> <tgt>`"));
            }
            for w in &words[2..] {
                if !ns.iter().any(|x| x == w) {
                    let c = word_column(line, w, 2);
                    return Err(ParseError::new(line_no, c, format!("unknown node `{w}`")));
                }
            }
            edges.push((words[1].into(), words[2].into(), words[3].into()));
        } else {
            return Err(ParseError::new(line_no, col, format!("unexpected `{}`", words[0])));
        }
    }
    if !seen_header {
        return Err(ParseError::new(1, 1, "empty input"));
    }
    let nodes = nodes.ok_or_else(|| ParseError::new(1, 1, "missing `nodes:` line"))?;
    let node_refs: Vec<&str> = nodes.iter().map(String::as_str).collect();
    let edge_refs: Vec<(&str, &str, &str)> = edges
        .iter()
        .map(|(a, b, c)| (a.as_str(), b.as_str(), c.as_str()))
        .collect();
    Graph::from_edges(&node_refs, &edge_refs).map_err(|e| ParseError::new(1, 1, e.to_string()))
}

pub(crate) fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

// 1-based column of the first occurrence of `word` at or after word index
// `skip`.
pub(crate) fn word_column(line: &str, word: &str, skip: usize) -> usize {
    let mut pos = 0;
    for (i, w) in line.split_whitespace().enumerate() {
        let at = line[pos..].find(w).map(|p| p + pos).unwrap_or(pos);
        pos = at + w.len();
        if i >= skip && w == word {
            return at + 1;
        }
    }
    1
}

/// A syntax or reference error in an input file.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("line {line}, column {col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

impl ParseError {
    pub fn new(line: usize, col: usize, msg: impl Into<String>) -> Self {
        ParseError {
            line,
            col,
            msg: msg.into(),
        }
    }
}

/// A random set `{prefix0, ..}` of the given size.
pub fn named_set(prefix: &str, n: usize) -> FinSet {
    FinSet::new((0..n).map(|i| Elem::atom(&format!("{prefix}{i}"))).collect()).expect("distinct names")
}

/// A random function `dom → cod`; `cod` must be non-empty unless `dom` is.
pub fn random_fun<R: Rng>(rng: &mut R, dom: &FinSet, cod: &FinSet) -> FinFun {
    let table = (0..dom.len()).map(|_| rng.gen_range(0..cod.len())).collect();
    FinFun::new(dom.clone(), cod.clone(), table).expect("random table in range")
}

/// A random span `x → y` with at most `max_apex` apex elements.
pub fn random_span<R: Rng>(rng: &mut R, x: &FinSet, y: &FinSet, max_apex: usize, tag: &str) -> Span {
    let n = if x.is_empty() || y.is_empty() {
        0
    } else {
        rng.gen_range(0..=max_apex)
    };
    let apex = named_set(tag, n);
    Span::new(random_fun(rng, &apex, x), random_fun(rng, &apex, y)).expect("random legs")
}

/// A random square with the given top and vertical edges. Apex elements
/// are merged only when their images under the legs agree, and the bottom
/// apex may contain extra elements.
pub fn random_square_from<R: Rng>(
    rng: &mut R,
    top: &Span,
    u: &FinFun,
    v: &FinFun,
    extra: usize,
    tag: &str,
) -> SpanSquare {
    let mut keys: Vec<(usize, usize)> = Vec::new();
    let mut table = Vec::new();
    for i in 0..top.apex.len() {
        let key = (u.at(top.left.at(i)), v.at(top.right.at(i)));
        let same: Vec<usize> = (0..keys.len()).filter(|&j| keys[j] == key).collect();
        if !same.is_empty() && rng.gen_bool(0.5) {
            table.push(same[rng.gen_range(0..same.len())]);
        } else {
            keys.push(key);
            table.push(keys.len() - 1);
        }
    }
    if !u.cod().is_empty() && !v.cod().is_empty() {
        for _ in 0..rng.gen_range(0..=extra) {
            keys.push((rng.gen_range(0..u.cod().len()), rng.gen_range(0..v.cod().len())));
        }
    }
    let apex = named_set(tag, keys.len());
    let bottom = Span::new(
        FinFun::new(apex.clone(), u.cod().clone(), keys.iter().map(|k| k.0).collect()).expect("in range"),
        FinFun::new(apex.clone(), v.cod().clone(), keys.iter().map(|k| k.1).collect()).expect("in range"),
    )
    .expect("random bottom");
    let mid = FinFun::new(top.apex.clone(), apex, table).expect("in range");
    SpanSquare::new(top.clone(), bottom, u.clone(), v.clone(), mid).expect("random square commutes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::doublecat::{paste, Cell, HorExpr};
    use crate::finset::find_commuting_bijection;

    fn set(names: &[&str]) -> FinSet {
        FinSet::from_names(names).unwrap()
    }

    fn chain() -> Graph {
        Graph::from_edges(&["a", "b", "c"], &[("f", "a", "b"), ("g", "b", "c")]).unwrap()
    }

    fn iso(f: &Span, g: &Span) -> bool {
        find_commuting_bijection(f.apex(), g.apex(), &[(f.left.clone(), g.left.clone()), (f.right.clone(), g.right.clone())])
            .unwrap()
            .is_some()
    }

    #[test]
    fn identity_spans() {
        assert!(id_span(&FinSet::empty()).apex().is_empty());
        assert_eq!(id_span(&set(&["a"])).apex().len(), 1);
        let g = chain();
        let c = compose_spans(&g.edges, &id_span(&g.nodes)).unwrap();
        assert!(iso(&c, &g.edges));
        let c = compose_spans(&id_span(&g.nodes), &g.edges).unwrap();
        assert!(iso(&c, &g.edges));
    }

    #[test]
    fn composing_edges() {
        let nodes = set(&["a", "b", "c"]);
        let f = Graph::from_edges(&["a", "b", "c"], &[("f", "a", "b")]).unwrap().edges;
        let g = Graph::from_edges(&["a", "b", "c"], &[("g", "b", "c")]).unwrap().edges;
        let gf = compose_spans(&g, &f).unwrap();
        assert_eq!(gf.apex().len(), 1);
        assert_eq!(gf.apex().elem(0).to_string(), "(f,g)");
        let empty = Span::new(FinFun::from_empty(&nodes), FinFun::from_empty(&nodes)).unwrap();
        assert!(compose_spans(&g, &empty).unwrap().apex().is_empty());
        assert!(compose_spans(&g, &id_span(&set(&["z"]))).is_err());
    }

    #[test]
    fn framing_of_identity_is_trivial() {
        let d = SpanDouble;
        let x = set(&["a", "b"]);
        let fr = d.framing(&FinFun::identity(&x)).unwrap();
        assert_eq!(fr.companion, id_span(&x));
        assert_eq!(fr.conjoint, id_span(&x));
        for s in [&fr.alpha, &fr.beta, &fr.gamma, &fr.delta] {
            assert_eq!(*s, d.sq_ver_id(&id_span(&x)));
        }
    }

    #[test]
    fn framing_of_constant() {
        let d = SpanDouble;
        let x = set(&["a", "b"]);
        let c = set(&["c"]);
        let u = FinFun::new(x.clone(), c, vec![0, 0]).unwrap();
        let fr = d.framing(&u).unwrap();
        assert_eq!(fr.companion.apex(), &x);
        assert_eq!(fr.conjoint.apex(), &x);
        assert_eq!(d.conjoint_base(&fr.conjoint).unwrap(), Some(u));
    }

    #[test]
    fn chain_free_category() {
        let fc = free_category(&chain(), 2).unwrap();
        assert!(fc.exact);
        let names: Vec<String> = fc.cat.morphisms().iter().map(render_path).collect();
        assert_eq!(names, vec!["id(a)", "id(b)", "id(c)", "f", "g", "f.g"]);
        assert!(fc.cat.mult.top() == &compose_spans(&fc.cat.carrier.edges, &fc.cat.carrier.edges).unwrap());
    }

    #[test]
    fn loop_free_category_is_cut_off() {
        let g = Graph::from_edges(&["x"], &[("e", "x", "x")]).unwrap();
        let fc = free_category(&g, 3).unwrap();
        assert!(!fc.exact);
        assert_eq!(fc.cat.morphisms().len(), 4);
    }

    #[test]
    fn empty_graph_gives_discrete_category() {
        let g = Graph::from_edges(&["x", "y"], &[]).unwrap();
        let fc = free_category(&g, 1).unwrap();
        assert!(fc.exact);
        assert_eq!(fc.cat.morphisms().len(), 2);
        assert!(free_category(&g, 0).is_err());
    }

    #[test]
    fn categories_on_one_object() {
        let one = set(&["x"]);
        // monoids of order 1 and 2 with a designated identity
        let cats = enumerate_categories(&one, 2).unwrap();
        assert_eq!(cats.len(), 1 + 2 * 2);
        // the trivial monoid, Z/2 and the idempotent monoid
        assert_eq!(enumerate_categories_up_to_iso(&one, 2).unwrap().len(), 3);
        // monoids of order three
        let three = enumerate_categories_up_to_iso(&one, 3).unwrap();
        assert_eq!(three.iter().filter(|c| c.morphisms().len() == 3).count(), 7);
    }

    #[test]
    fn interchange_on_a_grid() {
        let d = SpanDouble;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        use rand::SeedableRng;
        let a0 = named_set("a", 2);
        let b0 = named_set("b", 2);
        let c0 = named_set("c", 2);
        let f1 = random_span(&mut rng, &a0, &b0, 3, "f");
        let f2 = random_span(&mut rng, &b0, &c0, 3, "g");
        let (a1, b1, c1) = (named_set("p", 2), named_set("q", 2), named_set("r", 2));
        let (u, v, w) = (random_fun(&mut rng, &a0, &a1), random_fun(&mut rng, &b0, &b1), random_fun(&mut rng, &c0, &c1));
        let s1 = random_square_from(&mut rng, &f1, &u, &v, 1, "s");
        let s2 = random_square_from(&mut rng, &f2, &v, &w, 1, "t");
        let (u2, v2, w2) = (FinFun::identity(&a1), FinFun::identity(&b1), FinFun::identity(&c1));
        let s3 = random_square_from(&mut rng, s1.bottom(), &u2, &v2, 1, "x");
        let s4 = random_square_from(&mut rng, s2.bottom(), &v2, &w2, 1, "y");
        let rows = d.sq_vcomp(&d.sq_hcomp(&s1, &s2).unwrap(), &d.sq_hcomp(&s3, &s4).unwrap()).unwrap();
        let cols = d.sq_hcomp(&d.sq_vcomp(&s1, &s3).unwrap(), &d.sq_vcomp(&s2, &s4).unwrap()).unwrap();
        assert_eq!(rows, cols);
        let grid = paste(&d, &[vec![Cell::plain(&d, &s1), Cell::plain(&d, &s2)], vec![Cell::plain(&d, &s3), Cell::plain(&d, &s4)]]).unwrap();
        assert_eq!(grid.sq, rows);
        let _ = HorExpr::<SpanDouble>::atom(&f1);
    }

    #[test]
    fn parse_errors_have_positions() {
        let err = parse_graph("graph\nnodes: a b\nedge f a z\n").unwrap_err();
        assert_eq!((err.line, err.col), (3, 10));
        let err = parse_graph("grph\n").unwrap_err();
        assert_eq!(err.line, 1);
        let g = parse_graph("graph\n# comment\nnodes: a b c\n\nedge f a b\nedge g b c # tail\n").unwrap();
        assert_eq!(g, chain());
    }
}
