//! The category of finite sets.
//!
//! Every construction in the crate bottoms out in [`FinSet`] and [`FinFun`].
//! Elements are structured names ([`Elem`]) so that constructed sets
//! (pullbacks, coproducts, sets of sections) carry deterministic names and
//! repeated constructions produce equal values.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{boundary, invalid, Error, Result};

/// Largest domain accepted by [`find_commuting_bijection`].
pub const MAX_BIJECTION_SEARCH: usize = 8;

/// The name of an element of a finite set.
///
/// Atoms come from user input; the other variants are produced by the
/// constructions in this module and render as `(a,b)`, `[a,b]` and `tag(a)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Elem {
    Atom(Arc<str>),
    Nat(usize),
    Tuple(Arc<[Elem]>),
    Seq(Arc<[Elem]>),
    Tagged(&'static str, Arc<Elem>),
}

impl Elem {
    pub fn atom(name: &str) -> Elem {
        Elem::Atom(Arc::from(name))
    }

    pub fn pair(a: Elem, b: Elem) -> Elem {
        Elem::Tuple(Arc::from(vec![a, b]))
    }

    pub fn tuple(items: Vec<Elem>) -> Elem {
        Elem::Tuple(Arc::from(items))
    }

    pub fn seq(items: Vec<Elem>) -> Elem {
        Elem::Seq(Arc::from(items))
    }

    pub fn tagged(tag: &'static str, e: Elem) -> Elem {
        Elem::Tagged(tag, Arc::new(e))
    }

    /// Components of a tuple element.
    pub fn as_tuple(&self) -> Option<&[Elem]> {
        match self {
            Elem::Tuple(items) => Some(items),
            _ => None,
        }
    }

    /// Components of a sequence element.
    pub fn as_seq(&self) -> Option<&[Elem]> {
        match self {
            Elem::Seq(items) => Some(items),
            _ => None,
        }
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn list(f: &mut fmt::Formatter<'_>, items: &[Elem]) -> fmt::Result {
            for (i, e) in items.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{e}")?;
            }
            Ok(())
        }
        match self {
            Elem::Atom(s) => f.write_str(s),
            Elem::Nat(n) => write!(f, "{n}"),
            Elem::Tuple(items) => {
                f.write_str("(")?;
                list(f, items)?;
                f.write_str(")")
            }
            Elem::Seq(items) => {
                f.write_str("[")?;
                list(f, items)?;
                f.write_str("]")
            }
            Elem::Tagged(tag, e) => write!(f, "{tag}({e})"),
        }
    }
}

impl fmt::Debug for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl From<&str> for Elem {
    fn from(s: &str) -> Self {
        Elem::atom(s)
    }
}

struct SetInner {
    elems: Vec<Elem>,
    index: HashMap<Elem, usize>,
}

/// A finite set: an ordered list of distinct element names.
///
/// Two sets are equal iff their ordered lists are equal. Cloning is cheap.
#[derive(Clone)]
pub struct FinSet(Arc<SetInner>);

impl FinSet {
    pub fn new(elems: Vec<Elem>) -> Result<FinSet> {
        let mut index = HashMap::with_capacity(elems.len());
        for (i, e) in elems.iter().enumerate() {
            if index.insert(e.clone(), i).is_some() {
                return Err(invalid(format!("duplicate element `{e}`")));
            }
        }
        Ok(FinSet(Arc::new(SetInner { elems, index })))
    }

    pub fn from_names<S: AsRef<str>>(names: &[S]) -> Result<FinSet> {
        FinSet::new(names.iter().map(|s| Elem::atom(s.as_ref())).collect())
    }

    pub fn empty() -> FinSet {
        FinSet::new(Vec::new()).expect("empty set is valid")
    }

    /// The set `{0, 1, .., n-1}` with numeric element names.
    pub fn range(n: usize) -> FinSet {
        FinSet::new((0..n).map(Elem::Nat).collect()).expect("distinct naturals")
    }

    pub fn len(&self) -> usize {
        self.0.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.elems.is_empty()
    }

    pub fn elems(&self) -> &[Elem] {
        &self.0.elems
    }

    pub fn elem(&self, i: usize) -> &Elem {
        &self.0.elems[i]
    }

    pub fn index_of(&self, e: &Elem) -> Option<usize> {
        self.0.index.get(e).copied()
    }

    pub fn contains(&self, e: &Elem) -> bool {
        self.0.index.contains_key(e)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Elem> {
        self.0.elems.iter()
    }
}

impl PartialEq for FinSet {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.elems == other.0.elems
    }
}

impl Eq for FinSet {}

impl fmt::Display for FinSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, e) in self.elems().iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for FinSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A total function between finite sets, stored as a table of codomain
/// indices.
#[derive(Clone, PartialEq, Eq)]
pub struct FinFun {
    dom: FinSet,
    cod: FinSet,
    table: Vec<usize>,
}

impl FinFun {
    pub fn new(dom: FinSet, cod: FinSet, table: Vec<usize>) -> Result<FinFun> {
        if table.len() != dom.len() {
            return Err(invalid(format!(
                "function table has {} entries for a domain of size {}",
                table.len(),
                dom.len()
            )));
        }
        if let Some(&bad) = table.iter().find(|&&j| j >= cod.len()) {
            return Err(invalid(format!(
                "function image index {bad} outside codomain of size {}",
                cod.len()
            )));
        }
        Ok(FinFun { dom, cod, table })
    }

    /// Builds a function from explicit `(input, output)` pairs.
    pub fn from_pairs(dom: FinSet, cod: FinSet, pairs: &[(Elem, Elem)]) -> Result<FinFun> {
        let mut table = vec![usize::MAX; dom.len()];
        for (a, b) in pairs {
            let i = dom
                .index_of(a)
                .ok_or_else(|| invalid(format!("`{a}` is not in the domain")))?;
            let j = cod
                .index_of(b)
                .ok_or_else(|| invalid(format!("`{b}` is not in the codomain")))?;
            table[i] = j;
        }
        if let Some(i) = table.iter().position(|&j| j == usize::MAX) {
            return Err(invalid(format!("no image given for `{}`", dom.elem(i))));
        }
        FinFun::new(dom, cod, table)
    }

    /// Builds a function by evaluating `f` on every element of `dom`.
    pub fn from_fn(
        dom: FinSet,
        cod: FinSet,
        mut f: impl FnMut(&Elem) -> Option<Elem>,
    ) -> Result<FinFun> {
        let mut table = Vec::with_capacity(dom.len());
        for a in dom.iter() {
            let b = f(a).ok_or_else(|| invalid(format!("no image for `{a}`")))?;
            let j = cod
                .index_of(&b)
                .ok_or_else(|| invalid(format!("image `{b}` of `{a}` is not in the codomain")))?;
            table.push(j);
        }
        FinFun::new(dom, cod, table)
    }

    pub fn identity(x: &FinSet) -> FinFun {
        FinFun {
            dom: x.clone(),
            cod: x.clone(),
            table: (0..x.len()).collect(),
        }
    }

    /// The unique function out of the empty set.
    pub fn from_empty(cod: &FinSet) -> FinFun {
        FinFun {
            dom: FinSet::empty(),
            cod: cod.clone(),
            table: Vec::new(),
        }
    }

    pub fn dom(&self) -> &FinSet {
        &self.dom
    }

    pub fn cod(&self) -> &FinSet {
        &self.cod
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    /// Image of the element at index `i`, as a codomain index.
    pub fn at(&self, i: usize) -> usize {
        self.table[i]
    }

    pub fn apply(&self, e: &Elem) -> Option<&Elem> {
        self.dom.index_of(e).map(|i| self.cod.elem(self.table[i]))
    }

    pub fn is_identity(&self) -> bool {
        self.dom == self.cod && self.table.iter().enumerate().all(|(i, &j)| i == j)
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = vec![false; self.cod.len()];
        self.table.iter().all(|&j| !std::mem::replace(&mut seen[j], true))
    }

    pub fn is_bijective(&self) -> bool {
        self.dom.len() == self.cod.len() && self.is_injective()
    }

    pub fn inverse(&self) -> Option<FinFun> {
        if !self.is_bijective() {
            return None;
        }
        let mut table = vec![0; self.cod.len()];
        for (i, &j) in self.table.iter().enumerate() {
            table[j] = i;
        }
        Some(FinFun {
            dom: self.cod.clone(),
            cod: self.dom.clone(),
            table,
        })
    }

    /// Diagrammatic composite: first `self`, then `g`.
    pub fn then(&self, g: &FinFun) -> Result<FinFun> {
        compose_fun(g, self)
    }

    /// The same table viewed with a different (but equal-sized) codomain
    /// that contains every image element.
    pub fn corestrict(&self, cod: &FinSet) -> Result<FinFun> {
        FinFun::from_fn(self.dom.clone(), cod.clone(), |a| self.apply(a).cloned())
    }

    /// Indices of the domain elements sent to codomain index `c`.
    pub fn preimage(&self, c: usize) -> Vec<usize> {
        self.table
            .iter()
            .enumerate()
            .filter(|(_, &j)| j == c)
            .map(|(i, _)| i)
            .collect()
    }
}

impl fmt::Display for FinFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, &j) in self.table.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}↦{}", self.dom.elem(i), self.cod.elem(j))?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for FinFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// An object of the slice over `base`: a set with a map down to `base`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SliceObject {
    pub total: FinSet,
    pub base: FinSet,
    pub proj: FinFun,
}

impl SliceObject {
    pub fn new(proj: FinFun) -> SliceObject {
        SliceObject {
            total: proj.dom().clone(),
            base: proj.cod().clone(),
            proj,
        }
    }

    /// Indices of the total-space elements over the base index `b`.
    pub fn fiber_indices(&self, b: usize) -> Vec<usize> {
        self.proj.preimage(b)
    }
}

/// `g ∘ f`: apply `f`, then `g`.
pub fn compose_fun(g: &FinFun, f: &FinFun) -> Result<FinFun> {
    if f.cod != g.dom {
        return Err(boundary(format!(
            "cannot compose: codomain {} differs from domain {}",
            f.cod, g.dom
        )));
    }
    Ok(FinFun {
        dom: f.dom.clone(),
        cod: g.cod.clone(),
        table: f.table.iter().map(|&j| g.table[j]).collect(),
    })
}

/// A pullback cone, with the apex elements named `(a,b)`.
#[derive(Clone, Debug)]
pub struct Pullback {
    pub apex: FinSet,
    pub p1: FinFun,
    pub p2: FinFun,
}

impl Pullback {
    /// Index of the apex element over `(a, b)`, if `f(a) = g(b)`.
    pub fn pair_index(&self, a: usize, b: usize) -> Option<usize> {
        let e = Elem::pair(self.p1.cod().elem(a).clone(), self.p2.cod().elem(b).clone());
        self.apex.index_of(&e)
    }
}

/// Pullback of the cospan `A --f--> C <--g-- B`.
pub fn pullback(f: &FinFun, g: &FinFun) -> Result<Pullback> {
    if f.cod != g.cod {
        return Err(boundary(format!(
            "pullback of maps with different codomains {} and {}",
            f.cod, g.cod
        )));
    }
    let mut elems = Vec::new();
    let mut t1 = Vec::new();
    let mut t2 = Vec::new();
    for (i, &fi) in f.table.iter().enumerate() {
        for (j, &gj) in g.table.iter().enumerate() {
            if fi == gj {
                elems.push(Elem::pair(f.dom.elem(i).clone(), g.dom.elem(j).clone()));
                t1.push(i);
                t2.push(j);
            }
        }
    }
    let apex = FinSet::new(elems)?;
    Ok(Pullback {
        p1: FinFun::new(apex.clone(), f.dom.clone(), t1)?,
        p2: FinFun::new(apex.clone(), g.dom.clone(), t2)?,
        apex,
    })
}

/// Equalizer of two parallel maps: the sublist of the domain on which they
/// agree, together with its inclusion.
pub fn equalizer(f: &FinFun, g: &FinFun) -> Result<(FinSet, FinFun)> {
    if f.dom != g.dom || f.cod != g.cod {
        return Err(boundary("equalizer of non-parallel maps"));
    }
    let keep: Vec<usize> = (0..f.dom.len()).filter(|&i| f.table[i] == g.table[i]).collect();
    let e = FinSet::new(keep.iter().map(|&i| f.dom.elem(i).clone()).collect())?;
    let incl = FinFun::new(e.clone(), f.dom.clone(), keep)?;
    Ok((e, incl))
}

/// Coproduct `A + B`, with elements tagged `inl(a)` and `inr(b)`.
pub fn coproduct(a: &FinSet, b: &FinSet) -> (FinSet, FinFun, FinFun) {
    let elems: Vec<Elem> = a
        .iter()
        .map(|e| Elem::tagged("inl", e.clone()))
        .chain(b.iter().map(|e| Elem::tagged("inr", e.clone())))
        .collect();
    let s = FinSet::new(elems).expect("tags keep summands disjoint");
    let inl = FinFun::new(a.clone(), s.clone(), (0..a.len()).collect()).expect("in range");
    let inr = FinFun::new(b.clone(), s.clone(), (a.len()..a.len() + b.len()).collect())
        .expect("in range");
    (s, inl, inr)
}

/// The sublist of `f`'s domain mapped to `c`, in domain order.
pub fn fiber(f: &FinFun, c: &Elem) -> Result<FinSet> {
    let ci = f
        .cod
        .index_of(c)
        .ok_or_else(|| invalid(format!("`{c}` is not in the codomain")))?;
    FinSet::new(f.preimage(ci).into_iter().map(|i| f.dom.elem(i).clone()).collect())
}

/// Pullback of a slice object along `sigma`: the functor `Δσ`.
pub fn pullback_slice(sigma: &FinFun, x: &SliceObject) -> Result<SliceObject> {
    let pb = pullback(sigma, &x.proj)?;
    Ok(SliceObject::new(pb.p1))
}

/// Dependent product `Π_theta` of a slice over `theta.dom()`.
///
/// The fiber over `b` is the set of sections of `s` over `theta⁻¹(b)`, each
/// named `(b,[(e,t),..])` by its graph.
pub fn dependent_product(theta: &FinFun, s: &SliceObject) -> Result<SliceObject> {
    if s.base != theta.dom {
        return Err(boundary(format!(
            "dependent product: slice base {} differs from {}",
            s.base, theta.dom
        )));
    }
    let mut elems = Vec::new();
    let mut proj = Vec::new();
    for b in 0..theta.cod.len() {
        let slots = theta.preimage(b);
        let choices: Vec<Vec<usize>> = slots.iter().map(|&e| s.fiber_indices(e)).collect();
        for pick in product_indices(&choices) {
            let graph = slots
                .iter()
                .zip(&pick)
                .map(|(&e, &t)| Elem::pair(theta.dom.elem(e).clone(), s.total.elem(t).clone()))
                .collect();
            elems.push(Elem::pair(theta.cod.elem(b).clone(), Elem::seq(graph)));
            proj.push(b);
        }
    }
    let total = FinSet::new(elems)?;
    Ok(SliceObject::new(FinFun::new(total, theta.cod.clone(), proj)?))
}

/// Cartesian product of index lists, first list most significant.
pub fn product_indices(choices: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::with_capacity(choices.len())];
    for options in choices {
        let mut next = Vec::with_capacity(out.len() * options.len());
        for prefix in &out {
            for &o in options {
                let mut p = prefix.clone();
                p.push(o);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// All functions `dom → cod`, in lexicographic table order.
pub fn all_functions(dom: &FinSet, cod: &FinSet) -> Vec<FinFun> {
    let choices = vec![(0..cod.len()).collect::<Vec<_>>(); dom.len()];
    product_indices(&choices)
        .into_iter()
        .map(|t| FinFun::new(dom.clone(), cod.clone(), t).expect("in range"))
        .collect()
}

/// Searches for a bijection `β: A → B` with `g ∘ β = f` for every
/// constraint pair `(f, g)`.
///
/// Refuses domains larger than [`MAX_BIJECTION_SEARCH`].
pub fn find_commuting_bijection(
    a: &FinSet,
    b: &FinSet,
    constraints: &[(FinFun, FinFun)],
) -> Result<Option<FinFun>> {
    if a.len() > MAX_BIJECTION_SEARCH {
        return Err(Error::Bound(format!(
            "bijection search over {} elements (limit {MAX_BIJECTION_SEARCH})",
            a.len()
        )));
    }
    for (f, g) in constraints {
        if f.dom != *a || g.dom != *b || f.cod != g.cod {
            return Err(boundary("bijection constraint with mismatched boundaries"));
        }
    }
    if a.len() != b.len() {
        return Ok(None);
    }
    let candidates: Vec<Vec<usize>> = (0..a.len())
        .map(|i| {
            (0..b.len())
                .filter(|&j| constraints.iter().all(|(f, g)| f.at(i) == g.at(j)))
                .collect()
        })
        .collect();
    let mut used = vec![false; b.len()];
    let mut table = Vec::with_capacity(a.len());
    if assign(&candidates, &mut used, &mut table) {
        Ok(Some(FinFun::new(a.clone(), b.clone(), table)?))
    } else {
        Ok(None)
    }
}

fn assign(candidates: &[Vec<usize>], used: &mut [bool], table: &mut Vec<usize>) -> bool {
    let i = table.len();
    if i == candidates.len() {
        return true;
    }
    for &j in &candidates[i] {
        if !used[j] {
            used[j] = true;
            table.push(j);
            if assign(candidates, used, table) {
                return true;
            }
            table.pop();
            used[j] = false;
        }
    }
    false
}

/// Whether `s` is a subset of `t` (as element names).
pub fn is_subset(s: &FinSet, t: &FinSet) -> bool {
    s.iter().all(|e| t.contains(e))
}
