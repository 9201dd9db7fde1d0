//! The double category of polynomials over finite sets.
//!
//! A polynomial `X ← E → B → Y` has operations `B` with outputs in `Y` and
//! slots `E` typed in `X`. Squares are maps of operations together with
//! maps of slots whose middle region is a pullback, so each operation's
//! slots are carried bijectively onto those of its image.
//!
//! Composite names are structured. In `P;Q` an operation is
//! `(q,[p_1,..,p_n])`, a choice of `P`-operation for every slot of `q`,
//! and a slot is `(op,j,i)` for slot `j` of `q` and slot `i` of `p_j`.
//! Free monads are built from trees: `hole(y)` or `(b,[children])`.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::doublecat::{DoubleCategory, Endo, Framing, FreeMonad, LocalCoproduct, MonadData};
use crate::error::{boundary, invalid, Error, Result};
use crate::finset::{
    coproduct, dependent_product, product_indices, pullback, pullback_slice, Elem, FinFun, FinSet,
    SliceObject,
};
use crate::span::{named_set, random_fun, strip_comment, word_column, ParseError};

/// Default cut-off for tree enumeration.
pub const DEFAULT_MAX_DEPTH: usize = 8;

/// Refuses free-monad enumerations with more trees than this.
pub const MAX_TREES: usize = 20_000;

/// A polynomial `src ←σ slots →θ ops →τ tgt`.
#[derive(Clone, PartialEq, Eq)]
pub struct Polynomial {
    src: FinSet,
    tgt: FinSet,
    slots: FinSet,
    ops: FinSet,
    sigma: FinFun,
    theta: FinFun,
    tau: FinFun,
    // slot indices of each op, and each slot's position in its op
    fibers: Arc<Vec<Vec<usize>>>,
    pos: Arc<Vec<usize>>,
}

impl Polynomial {
    pub fn new(sigma: FinFun, theta: FinFun, tau: FinFun) -> Result<Polynomial> {
        if sigma.dom() != theta.dom() {
            return Err(boundary("sigma and theta have different domains"));
        }
        if theta.cod() != tau.dom() {
            return Err(boundary("theta does not land in the operations"));
        }
        let mut fibers = vec![Vec::new(); tau.dom().len()];
        let mut pos = vec![0; sigma.dom().len()];
        for (e, &b) in theta.table().iter().enumerate() {
            pos[e] = fibers[b].len();
            fibers[b].push(e);
        }
        Ok(Polynomial {
            src: sigma.cod().clone(),
            tgt: tau.cod().clone(),
            slots: sigma.dom().clone(),
            ops: tau.dom().clone(),
            sigma,
            theta,
            tau,
            fibers: Arc::new(fibers),
            pos: Arc::new(pos),
        })
    }

    /// Builds a polynomial from `(op, input types, output type)` triples.
    /// The slots of `op` are named `(op,0)`, `(op,1)`, ...
    pub fn from_ops(src: &FinSet, tgt: &FinSet, ops: &[(Elem, Vec<Elem>, Elem)]) -> Result<Polynomial> {
        let op_set = FinSet::new(ops.iter().map(|o| o.0.clone()).collect())?;
        let mut slots = Vec::new();
        let mut sigma = Vec::new();
        let mut theta = Vec::new();
        let mut tau = Vec::new();
        for (b, (name, ins, out)) in ops.iter().enumerate() {
            tau.push(index(tgt, out)?);
            for (i, x) in ins.iter().enumerate() {
                slots.push(Elem::pair(name.clone(), Elem::Nat(i)));
                sigma.push(index(src, x)?);
                theta.push(b);
            }
        }
        let slots = FinSet::new(slots)?;
        Polynomial::new(
            FinFun::new(slots.clone(), src.clone(), sigma)?,
            FinFun::new(slots, op_set.clone(), theta)?,
            FinFun::new(op_set, tgt.clone(), tau)?,
        )
    }

    pub fn src(&self) -> &FinSet {
        &self.src
    }
    pub fn tgt(&self) -> &FinSet {
        &self.tgt
    }
    pub fn slots(&self) -> &FinSet {
        &self.slots
    }
    pub fn ops(&self) -> &FinSet {
        &self.ops
    }
    pub fn sigma(&self) -> &FinFun {
        &self.sigma
    }
    pub fn theta(&self) -> &FinFun {
        &self.theta
    }
    pub fn tau(&self) -> &FinFun {
        &self.tau
    }

    /// Slot indices of the op at index `b`, in order.
    pub fn fiber(&self, b: usize) -> &[usize] {
        &self.fibers[b]
    }

    pub fn arity(&self, b: usize) -> usize {
        self.fibers[b].len()
    }

    /// Position of slot `e` among the slots of its op.
    pub fn slot_position(&self, e: usize) -> usize {
        self.pos[e]
    }

    pub fn is_endo(&self) -> bool {
        self.src == self.tgt
    }

    fn op_index(&self, b: &Elem) -> Result<usize> {
        index(&self.ops, b)
    }

    fn slot_index(&self, e: &Elem) -> Result<usize> {
        index(&self.slots, e)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} → {} {{", self.src, self.tgt)?;
        for b in 0..self.ops.len() {
            if b > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{} :", self.ops.elem(b))?;
            for &e in self.fiber(b) {
                write!(f, " {}", self.src.elem(self.sigma.at(e)))?;
            }
            write!(f, " -> {}", self.tgt.elem(self.tau.at(b)))?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn index(set: &FinSet, e: &Elem) -> Result<usize> {
    set.index_of(e)
        .ok_or_else(|| invalid(format!("`{e}` is not an element of {set}")))
}

fn parts<const N: usize>(e: &Elem) -> Result<&[Elem; N]> {
    e.as_tuple()
        .and_then(|t| t.try_into().ok())
        .ok_or_else(|| invalid(format!("`{e}` is not a {N}-tuple")))
}

/// The identity polynomial: one unary op per element.
pub fn id_poly(x: &FinSet) -> Polynomial {
    let id = FinFun::identity(x);
    Polynomial::new(id.clone(), id.clone(), id).expect("identity polynomial")
}

/// `q ∘ p`: the polynomial `p` followed by `q`.
pub fn compose_polys(q: &Polynomial, p: &Polynomial) -> Result<Polynomial> {
    if p.tgt != q.src {
        return Err(boundary(format!(
            "cannot compose polynomials: target {} differs from source {}",
            p.tgt, q.src
        )));
    }
    let by_output: Vec<Vec<usize>> = (0..q.src.len()).map(|y| p.tau.preimage(y)).collect();
    let mut ops = Vec::new();
    let mut tau = Vec::new();
    let mut slots = Vec::new();
    let mut sigma = Vec::new();
    let mut theta = Vec::new();
    for qb in 0..q.ops.len() {
        let qslots = q.fiber(qb);
        let choices: Vec<Vec<usize>> = qslots.iter().map(|&j| by_output[q.sigma.at(j)].clone()).collect();
        for pick in product_indices(&choices) {
            let op = Elem::pair(
                q.ops.elem(qb).clone(),
                Elem::seq(pick.iter().map(|&pb| p.ops.elem(pb).clone()).collect()),
            );
            let oi = ops.len();
            for (&j, &pb) in qslots.iter().zip(&pick) {
                for &i in p.fiber(pb) {
                    slots.push(Elem::tuple(vec![op.clone(), q.slots.elem(j).clone(), p.slots.elem(i).clone()]));
                    sigma.push(p.sigma.at(i));
                    theta.push(oi);
                }
            }
            ops.push(op);
            tau.push(q.tau.at(qb));
        }
    }
    let ops = FinSet::new(ops)?;
    let slots = FinSet::new(slots)?;
    Polynomial::new(
        FinFun::new(slots.clone(), p.src.clone(), sigma)?,
        FinFun::new(slots, ops.clone(), theta)?,
        FinFun::new(ops, q.tgt.clone(), tau)?,
    )
}

/// The polynomial functor `Στ Πθ Δσ` applied to a slice over `src`.
///
/// Elements over `y` are named `(b,[(e,(e,x)),..])`: an op with output
/// `y` and a choice of element over the type of each slot.
pub fn evaluate_poly(p: &Polynomial, x: &SliceObject) -> Result<SliceObject> {
    if x.base != p.src {
        return Err(boundary(format!(
            "slice over {} cannot be fed to a polynomial from {}",
            x.base, p.src
        )));
    }
    let pulled = pullback_slice(&p.sigma, x)?;
    let prod = dependent_product(&p.theta, &pulled)?;
    Ok(SliceObject::new(prod.proj.then(&p.tau)?))
}

/// The comparison `evaluate(q∘p, x) → evaluate(q, evaluate(p, x))`,
/// checked to be a bijection over the common base.
pub fn composition_comparison(q: &Polynomial, p: &Polynomial, x: &SliceObject) -> Result<FinFun> {
    let qp = compose_polys(q, p)?;
    let lhs = evaluate_poly(&qp, x)?;
    let inner = evaluate_poly(p, x)?;
    let rhs = evaluate_poly(q, &inner)?;
    // ((q,[p_j]), [((op,j,i),t)]) ↦ (q, [(j, (p_j, [(i,t)]))])
    let map = FinFun::from_fn(lhs.total.clone(), rhs.total.clone(), |e| {
        let [op, graph] = parts::<2>(e).ok()?;
        let [qb, pick] = parts::<2>(op).ok()?;
        let qi = q.ops.index_of(qb)?;
        let mut rows: Vec<(Elem, Vec<Elem>)> =
            q.fiber(qi).iter().map(|&j| (q.slots.elem(j).clone(), Vec::new())).collect();
        for entry in graph.as_seq()? {
            let [slot, chosen] = parts::<2>(entry).ok()?;
            let [_, j, i] = parts::<3>(slot).ok()?;
            let [_, t] = parts::<2>(chosen).ok()?;
            let row = rows.iter_mut().find(|(name, _)| name == j)?;
            row.1.push(Elem::pair(i.clone(), Elem::pair(i.clone(), t.clone())));
        }
        let outer = rows
            .into_iter()
            .zip(pick.as_seq()?)
            .map(|((j, inner), pb)| {
                let w = Elem::pair(pb.clone(), Elem::seq(inner));
                Elem::pair(j.clone(), Elem::pair(j, w))
            })
            .collect();
        Some(Elem::pair(qb.clone(), Elem::seq(outer)))
    })?;
    if !map.is_bijective() {
        return Err(invalid("comparison map is not a bijection"));
    }
    if map.then(&rhs.proj)? != lhs.proj {
        return Err(invalid("comparison map does not respect the base"));
    }
    Ok(map)
}

/// A cartesian map of polynomials over `u` and `v`.
#[derive(Clone, PartialEq, Eq)]
pub struct PolySquare {
    top: Polynomial,
    bottom: Polynomial,
    u: FinFun,
    v: FinFun,
    phi: FinFun,
    phibar: FinFun,
}

impl PolySquare {
    pub fn new(
        top: Polynomial,
        bottom: Polynomial,
        u: FinFun,
        v: FinFun,
        phi: FinFun,
        phibar: FinFun,
    ) -> Result<PolySquare> {
        let s = PolySquare {
            top,
            bottom,
            u,
            v,
            phi,
            phibar,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn globular(top: Polynomial, bottom: Polynomial, phi: FinFun, phibar: FinFun) -> Result<PolySquare> {
        let u = FinFun::identity(&top.src);
        let v = FinFun::identity(&top.tgt);
        PolySquare::new(top, bottom, u, v, phi, phibar)
    }

    fn validate(&self) -> Result<()> {
        let (t, b) = (&self.top, &self.bottom);
        if self.u.dom() != &t.src || self.u.cod() != &b.src {
            return Err(boundary("left vertical arrow does not match polynomial sources"));
        }
        if self.v.dom() != &t.tgt || self.v.cod() != &b.tgt {
            return Err(boundary("right vertical arrow does not match polynomial targets"));
        }
        if self.phi.dom() != &t.ops || self.phi.cod() != &b.ops {
            return Err(boundary("op map does not match the operations"));
        }
        if self.phibar.dom() != &t.slots || self.phibar.cod() != &b.slots {
            return Err(boundary("slot map does not match the slots"));
        }
        for op in 0..t.ops.len() {
            if b.tau.at(self.phi.at(op)) != self.v.at(t.tau.at(op)) {
                return Err(invalid(format!("op map changes the output of `{}`", t.ops.elem(op))));
            }
        }
        for e in 0..t.slots.len() {
            let e2 = self.phibar.at(e);
            if b.theta.at(e2) != self.phi.at(t.theta.at(e)) {
                return Err(invalid(format!("slot `{}` is moved to the wrong op", t.slots.elem(e))));
            }
            if b.sigma.at(e2) != self.u.at(t.sigma.at(e)) {
                return Err(invalid(format!("slot `{}` changes type", t.slots.elem(e))));
            }
        }
        if !self.is_cartesian()? {
            return Err(invalid("middle region is not a pullback"));
        }
        Ok(())
    }

    /// Whether the comparison map from the slots to the pullback of the op
    /// map along the lower `theta` is a bijection.
    pub fn is_cartesian(&self) -> Result<bool> {
        let pb = pullback(&self.phi, &self.bottom.theta)?;
        let mut hit = vec![false; pb.apex.len()];
        for e in 0..self.top.slots.len() {
            let Some(k) = pb.pair_index(self.top.theta.at(e), self.phibar.at(e)) else {
                return Ok(false);
            };
            if hit[k] {
                return Ok(false);
            }
            hit[k] = true;
        }
        Ok(hit.into_iter().all(|h| h))
    }

    pub fn top(&self) -> &Polynomial {
        &self.top
    }
    pub fn bottom(&self) -> &Polynomial {
        &self.bottom
    }
    pub fn u(&self) -> &FinFun {
        &self.u
    }
    pub fn v(&self) -> &FinFun {
        &self.v
    }
    pub fn phi(&self) -> &FinFun {
        &self.phi
    }
    pub fn phibar(&self) -> &FinFun {
        &self.phibar
    }

    /// Builds a square without checking it. Used to corrupt squares in
    /// fault-injection tests.
    #[doc(hidden)]
    pub fn new_unchecked(
        top: Polynomial,
        bottom: Polynomial,
        u: FinFun,
        v: FinFun,
        phi: FinFun,
        phibar: FinFun,
    ) -> PolySquare {
        PolySquare {
            top,
            bottom,
            u,
            v,
            phi,
            phibar,
        }
    }
}

impl fmt::Display for PolySquare {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "top:    {}", self.top)?;
        writeln!(f, "bottom: {}", self.bottom)?;
        writeln!(f, "left:   {}", self.u)?;
        writeln!(f, "right:  {}", self.v)?;
        writeln!(f, "ops:    {}", self.phi)?;
        write!(f, "slots:  {}", self.phibar)
    }
}

impl fmt::Debug for PolySquare {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

// Builds a square from named images of ops and slots.
fn square_from_maps(
    top: Polynomial,
    bottom: Polynomial,
    u: FinFun,
    v: FinFun,
    ops: impl Fn(&Elem) -> Option<Elem>,
    slots: impl Fn(&Elem) -> Option<Elem>,
) -> Result<PolySquare> {
    let phi = FinFun::from_fn(top.ops.clone(), bottom.ops.clone(), ops)?;
    let phibar = FinFun::from_fn(top.slots.clone(), bottom.slots.clone(), slots)?;
    PolySquare::new(top, bottom, u, v, phi, phibar)
}

/// The double category of polynomials over finite sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct PolyDouble;

/// Returns the polynomial double category.
pub fn poly_instance() -> PolyDouble {
    PolyDouble
}

impl DoubleCategory for PolyDouble {
    type Obj = FinSet;
    type Hor = Polynomial;
    type Ver = FinFun;
    type Sq = PolySquare;

    fn name(&self) -> String {
        "poly".into()
    }

    fn hor_src(&self, f: &Polynomial) -> FinSet {
        f.src.clone()
    }
    fn hor_tgt(&self, f: &Polynomial) -> FinSet {
        f.tgt.clone()
    }
    fn hor_id(&self, x: &FinSet) -> Polynomial {
        id_poly(x)
    }
    fn hor_comp(&self, f: &Polynomial, g: &Polynomial) -> Result<Polynomial> {
        compose_polys(g, f)
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

    fn sq_top(&self, s: &PolySquare) -> Polynomial {
        s.top.clone()
    }
    fn sq_bottom(&self, s: &PolySquare) -> Polynomial {
        s.bottom.clone()
    }
    fn sq_left(&self, s: &PolySquare) -> FinFun {
        s.u.clone()
    }
    fn sq_right(&self, s: &PolySquare) -> FinFun {
        s.v.clone()
    }

    fn sq_hor_id(&self, u: &FinFun) -> PolySquare {
        PolySquare::new(id_poly(u.dom()), id_poly(u.cod()), u.clone(), u.clone(), u.clone(), u.clone())
            .expect("identity square on a function")
    }

    fn sq_ver_id(&self, f: &Polynomial) -> PolySquare {
        PolySquare::globular(f.clone(), f.clone(), FinFun::identity(&f.ops), FinFun::identity(&f.slots))
            .expect("identity square on a polynomial")
    }

    fn sq_hcomp(&self, a: &PolySquare, b: &PolySquare) -> Result<PolySquare> {
        if a.v != b.u {
            return Err(boundary("squares do not share a vertical edge"));
        }
        let top = compose_polys(&b.top, &a.top)?;
        let bottom = compose_polys(&b.bottom, &a.bottom)?;
        let image_op = |op: &Elem| -> Option<Elem> {
            let [q, pick] = parts::<2>(op).ok()?;
            let qi = b.top.ops.index_of(q)?;
            let pick = pick.as_seq()?;
            let q2 = b.phi.at(qi);
            // the slots of q2 are the images of the slots of q
            let mut pick2 = vec![None; b.bottom.arity(q2)];
            for (k, &j) in b.top.fiber(qi).iter().enumerate() {
                let j2 = b.phibar.at(j);
                pick2[b.bottom.slot_position(j2)] = Some(a.phi.apply(&pick[k])?.clone());
            }
            let pick2: Option<Vec<Elem>> = pick2.into_iter().collect();
            Some(Elem::pair(b.bottom.ops.elem(q2).clone(), Elem::seq(pick2?)))
        };
        square_from_maps(
            top,
            bottom,
            a.u.clone(),
            b.v.clone(),
            image_op,
            |slot| {
                let [op, j, i] = parts::<3>(slot).ok()?;
                Some(Elem::tuple(vec![
                    image_op(op)?,
                    b.phibar.apply(j)?.clone(),
                    a.phibar.apply(i)?.clone(),
                ]))
            },
        )
    }

    fn sq_vcomp(&self, a: &PolySquare, b: &PolySquare) -> Result<PolySquare> {
        if a.bottom != b.top {
            return Err(boundary(format!(
                "cannot stack squares: {}",
                self.describe_hor_mismatch(&b.top, &a.bottom)
            )));
        }
        PolySquare::new(
            a.top.clone(),
            b.bottom.clone(),
            a.u.then(&b.u)?,
            a.v.then(&b.v)?,
            a.phi.then(&b.phi)?,
            a.phibar.then(&b.phibar)?,
        )
    }

    fn associator(&self, f: &Polynomial, g: &Polynomial, h: &Polynomial) -> Result<PolySquare> {
        let fg = self.hor_comp(f, g)?;
        let gh = self.hor_comp(g, h)?;
        let top = self.hor_comp(&fg, h)?;
        let bottom = self.hor_comp(f, &gh)?;
        // (r,[(q_k,[p_kj])]) ↦ ((r,[q_k]), [p_kj flattened])
        let image_op = |op: &Elem| -> Option<Elem> {
            let [r, inner] = parts::<2>(op).ok()?;
            let mut qs = Vec::new();
            let mut ps = Vec::new();
            for qp in inner.as_seq()? {
                let [q, pick] = parts::<2>(qp).ok()?;
                qs.push(q.clone());
                ps.extend(pick.as_seq()?.iter().cloned());
            }
            Some(Elem::pair(Elem::pair(r.clone(), Elem::seq(qs)), Elem::seq(ps)))
        };
        square_from_maps(
            top,
            bottom,
            FinFun::identity(f.src()),
            FinFun::identity(h.tgt()),
            image_op,
            |slot| {
                let [op, k, inner] = parts::<3>(slot).ok()?;
                let [_, j, i] = parts::<3>(inner).ok()?;
                let op2 = image_op(op)?;
                let [qr, _] = parts::<2>(&op2).ok()?;
                let qr_slot = Elem::tuple(vec![qr.clone(), k.clone(), j.clone()]);
                Some(Elem::tuple(vec![op2, qr_slot, i.clone()]))
            },
        )
    }

    fn left_unitor(&self, f: &Polynomial) -> PolySquare {
        let top = compose_polys(f, &id_poly(&f.src)).expect("unit composite");
        square_from_maps(
            top,
            f.clone(),
            FinFun::identity(&f.src),
            FinFun::identity(&f.tgt),
            |op| Some(parts::<2>(op).ok()?[0].clone()),
            |slot| Some(parts::<3>(slot).ok()?[1].clone()),
        )
        .expect("left unitor")
    }

    fn right_unitor(&self, f: &Polynomial) -> PolySquare {
        let top = compose_polys(&id_poly(&f.tgt), f).expect("unit composite");
        square_from_maps(
            top,
            f.clone(),
            FinFun::identity(&f.src),
            FinFun::identity(&f.tgt),
            |op| parts::<2>(op).ok()?[1].as_seq()?.first().cloned(),
            |slot| Some(parts::<3>(slot).ok()?[2].clone()),
        )
        .expect("right unitor")
    }

    fn invert_globular(&self, s: &PolySquare) -> Result<PolySquare> {
        if !self.is_globular(s) {
            return Err(invalid("only globular squares are inverted"));
        }
        let phi = s.phi.inverse().ok_or_else(|| invalid("op map is not a bijection"))?;
        let phibar = s.phibar.inverse().ok_or_else(|| invalid("slot map is not a bijection"))?;
        PolySquare::globular(s.bottom.clone(), s.top.clone(), phi, phibar)
    }

    fn validate_square(&self, s: &PolySquare) -> Result<()> {
        s.validate()
    }

    fn squares_with_boundary(
        &self,
        top: &Polynomial,
        bottom: &Polynomial,
        left: &FinFun,
        right: &FinFun,
        limit: usize,
    ) -> Result<Vec<PolySquare>> {
        let choices = op_choices(top, bottom, left, right)?;
        enumerate_squares(top, bottom, left, right, &choices, limit)
    }

    fn lifts_through(
        &self,
        lower: &PolySquare,
        target: &PolySquare,
        bottom: &Polynomial,
        left: &FinFun,
        right: &FinFun,
        limit: usize,
    ) -> Result<Vec<PolySquare>> {
        let top = &lower.bottom;
        if target.top != lower.top || target.bottom != *bottom {
            return Ok(Vec::new());
        }
        let mut choices = op_choices(top, bottom, left, right)?;
        for b in 0..lower.top.ops.len() {
            let b1 = lower.phi.at(b);
            let want = target.phi.at(b);
            let fixed: Vec<usize> = top
                .fiber(b1)
                .iter()
                .map(|&e1| {
                    let e = lower.top.fiber(b).iter().find(|&&e| lower.phibar.at(e) == e1);
                    e.map(|&e| target.phibar.at(e)).unwrap_or(usize::MAX)
                })
                .collect();
            choices[b1].retain(|(op, slots)| *op == want && *slots == fixed);
        }
        enumerate_squares(top, bottom, left, right, &choices, limit)
    }

    fn render_square(&self, s: &PolySquare) -> String {
        s.to_string()
    }

    fn describe_hor_mismatch(&self, expected: &Polynomial, actual: &Polynomial) -> String {
        if expected.src != actual.src || expected.tgt != actual.tgt {
            return format!(
                "polynomials {}→{} and {}→{} have different ends",
                expected.src, expected.tgt, actual.src, actual.tgt
            );
        }
        if let Some(b) = expected.ops.iter().find(|b| !actual.ops.contains(b)) {
            return format!("operation `{b}` is missing");
        }
        if let Some(b) = actual.ops.iter().find(|b| !expected.ops.contains(b)) {
            return format!("unexpected operation `{b}`");
        }
        if let Some(e) = expected.slots.iter().find(|e| !actual.slots.contains(e)) {
            return format!("slot `{e}` is missing");
        }
        "polynomials list the same names with different order or structure".into()
    }

    fn framing(&self, u: &FinFun) -> Result<Framing<PolyDouble>> {
        let (x, x2) = (u.dom(), u.cod());
        let idx = FinFun::identity(x);
        let idx2 = FinFun::identity(x2);
        let companion = Polynomial::new(idx.clone(), idx.clone(), u.clone())?;
        let conjoint = Polynomial::new(u.clone(), idx.clone(), idx.clone())?;
        let sq = |top: &Polynomial, bottom: Polynomial, l: &FinFun, r: &FinFun, m: &FinFun| {
            PolySquare::new(top.clone(), bottom, l.clone(), r.clone(), m.clone(), m.clone())
        };
        Ok(Framing {
            arrow: u.clone(),
            alpha: sq(&companion, id_poly(x2), u, &idx2, u)?,
            beta: sq(&conjoint, id_poly(x2), &idx2, u, u)?,
            gamma: sq(&id_poly(x), conjoint.clone(), u, &idx, &idx)?,
            delta: sq(&id_poly(x), companion.clone(), &idx, u, &idx)?,
            companion,
            conjoint,
        })
    }

    fn conjoint_base(&self, f: &Polynomial) -> Result<Option<FinFun>> {
        let ok = f.slots == f.tgt && f.ops == f.tgt && f.theta.is_identity() && f.tau.is_identity();
        Ok(ok.then(|| f.sigma.clone()))
    }

    fn local_coproduct(&self, f: &Polynomial, g: &Polynomial) -> Result<LocalCoproduct<PolyDouble>> {
        if f.src != g.src || f.tgt != g.tgt {
            return Err(boundary("coproduct of non-parallel polynomials"));
        }
        let (ops, opl, opr) = coproduct(&f.ops, &g.ops);
        let (slots, sl, sr) = coproduct(&f.slots, &g.slots);
        let cat = |a: &[usize], b: &[usize], shift: usize| -> Vec<usize> {
            a.iter().copied().chain(b.iter().map(|&i| i + shift)).collect()
        };
        let sum = Polynomial::new(
            FinFun::new(slots.clone(), f.src.clone(), cat(f.sigma.table(), g.sigma.table(), 0))?,
            FinFun::new(slots, ops.clone(), cat(f.theta.table(), g.theta.table(), f.ops.len()))?,
            FinFun::new(ops, f.tgt.clone(), cat(f.tau.table(), g.tau.table(), 0))?,
        )?;
        Ok(LocalCoproduct {
            inl: PolySquare::globular(f.clone(), sum.clone(), opl, sl)?,
            inr: PolySquare::globular(g.clone(), sum.clone(), opr, sr)?,
            sum,
        })
    }

    fn copair(&self, sum: &LocalCoproduct<PolyDouble>, a: &PolySquare, b: &PolySquare) -> Result<PolySquare> {
        if a.top != sum.inl.top || b.top != sum.inr.top || a.bottom != b.bottom {
            return Err(boundary("copair of squares with mismatched boundaries"));
        }
        let cat = |x: &FinFun, y: &FinFun| -> Vec<usize> { x.table().iter().chain(y.table()).copied().collect() };
        let phi = FinFun::new(sum.sum.ops.clone(), a.bottom.ops.clone(), cat(&a.phi, &b.phi))?;
        let phibar = FinFun::new(sum.sum.slots.clone(), a.bottom.slots.clone(), cat(&a.phibar, &b.phibar))?;
        PolySquare::globular(sum.sum.clone(), a.bottom.clone(), phi, phibar)
    }

    fn free_monad(&self, p: &Polynomial, bound: usize) -> Result<FreeMonad<PolyDouble>> {
        free_poly_monad(p, bound)
    }

    fn sharp(
        &self,
        free: &FreeMonad<PolyDouble>,
        monad: &MonadData<PolyDouble>,
        f: &Polynomial,
        phi: &PolySquare,
    ) -> Result<PolySquare> {
        sharp_lift_poly(monad, f, phi, free)
    }

    fn equalizer(&self, a: &PolySquare, b: &PolySquare) -> Result<(Polynomial, PolySquare)> {
        if a.top != b.top || a.bottom != b.bottom || a.u != b.u || a.v != b.v {
            return Err(boundary("equalizer of non-parallel squares"));
        }
        let t = &a.top;
        let keep: Vec<usize> = (0..t.ops.len())
            .filter(|&op| a.phi.at(op) == b.phi.at(op) && t.fiber(op).iter().all(|&e| a.phibar.at(e) == b.phibar.at(e)))
            .collect();
        let kept_slots: Vec<usize> = (0..t.slots.len()).filter(|&e| keep.contains(&t.theta.at(e))).collect();
        let ops = FinSet::new(keep.iter().map(|&i| t.ops.elem(i).clone()).collect())?;
        let slots = FinSet::new(kept_slots.iter().map(|&i| t.slots.elem(i).clone()).collect())?;
        let op_incl = FinFun::new(ops.clone(), t.ops.clone(), keep.clone())?;
        let slot_incl = FinFun::new(slots.clone(), t.slots.clone(), kept_slots.clone())?;
        let theta = FinFun::new(
            slots.clone(),
            ops.clone(),
            kept_slots.iter().map(|&e| keep.iter().position(|&o| o == t.theta.at(e)).expect("kept")).collect(),
        )?;
        let e = Polynomial::new(slot_incl.then(&t.sigma)?, theta, op_incl.then(&t.tau)?)?;
        let incl = PolySquare::globular(e.clone(), t.clone(), op_incl, slot_incl)?;
        Ok((e, incl))
    }

    fn factor_through_equalizer(&self, incl: &PolySquare, s: &PolySquare) -> Result<PolySquare> {
        if s.bottom != incl.bottom || !self.is_globular(s) {
            return Err(boundary("square does not land in the equalized arrow"));
        }
        let e = &incl.top;
        let phi = FinFun::from_fn(s.top.ops.clone(), e.ops.clone(), |b| s.phi.apply(b).cloned());
        let phibar = FinFun::from_fn(s.top.slots.clone(), e.slots.clone(), |x| s.phibar.apply(x).cloned());
        match (phi, phibar) {
            (Ok(phi), Ok(phibar)) => PolySquare::globular(s.top.clone(), e.clone(), phi, phibar),
            _ => Err(invalid("square does not factor through the equalizer")),
        }
    }
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                go(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

// For each top op: the admissible (bottom op, slot images) pairs.
type OpChoice = (usize, Vec<usize>);

fn op_choices(top: &Polynomial, bottom: &Polynomial, u: &FinFun, v: &FinFun) -> Result<Vec<Vec<OpChoice>>> {
    if u.dom() != &top.src || u.cod() != &bottom.src || v.dom() != &top.tgt || v.cod() != &bottom.tgt {
        return Err(boundary("enumeration boundary does not match the polynomials"));
    }
    Ok((0..top.ops.len())
        .map(|b| {
            let fb = top.fiber(b);
            let mut out = Vec::new();
            for b2 in 0..bottom.ops.len() {
                if bottom.tau.at(b2) != v.at(top.tau.at(b)) || bottom.arity(b2) != fb.len() {
                    continue;
                }
                let fb2 = bottom.fiber(b2);
                for perm in permutations(fb.len()) {
                    let img: Vec<usize> = perm.iter().map(|&k| fb2[k]).collect();
                    if fb.iter().zip(&img).all(|(&e, &e2)| bottom.sigma.at(e2) == u.at(top.sigma.at(e))) {
                        out.push((b2, img));
                    }
                }
            }
            out
        })
        .collect())
}

fn enumerate_squares(
    top: &Polynomial,
    bottom: &Polynomial,
    u: &FinFun,
    v: &FinFun,
    choices: &[Vec<OpChoice>],
    limit: usize,
) -> Result<Vec<PolySquare>> {
    let count = choices
        .iter()
        .try_fold(1usize, |acc, c| acc.checked_mul(c.len()))
        .unwrap_or(usize::MAX);
    if count > limit {
        return Err(Error::Bound(format!(
            "{count} candidate squares exceed the limit {limit}"
        )));
    }
    let idx: Vec<Vec<usize>> = choices.iter().map(|c| (0..c.len()).collect()).collect();
    product_indices(&idx)
        .into_iter()
        .map(|pick| {
            let mut phi = vec![0; top.ops.len()];
            let mut phibar = vec![0; top.slots.len()];
            for (b, &k) in pick.iter().enumerate() {
                let (b2, img) = &choices[b][k];
                phi[b] = *b2;
                for (&e, &e2) in top.fiber(b).iter().zip(img) {
                    phibar[e] = e2;
                }
            }
            PolySquare::new(
                top.clone(),
                bottom.clone(),
                u.clone(),
                v.clone(),
                FinFun::new(top.ops.clone(), bottom.ops.clone(), phi)?,
                FinFun::new(top.slots.clone(), bottom.slots.clone(), phibar)?,
            )
        })
        .collect()
}

/// A wellfounded tree: a hole of some type, or an op with one subtree per
/// slot.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Tree {
    Hole(Elem),
    Node(Elem, Vec<Tree>),
}

impl Tree {
    pub fn to_elem(&self) -> Elem {
        match self {
            Tree::Hole(y) => Elem::tagged("hole", y.clone()),
            Tree::Node(b, cs) => Elem::pair(b.clone(), Elem::seq(cs.iter().map(Tree::to_elem).collect())),
        }
    }

    pub fn from_elem(e: &Elem) -> Option<Tree> {
        match e {
            Elem::Tagged("hole", y) => Some(Tree::Hole((**y).clone())),
            _ => {
                let [b, cs] = parts::<2>(e).ok()?;
                let cs = cs.as_seq()?.iter().map(Tree::from_elem).collect::<Option<_>>()?;
                Some(Tree::Node(b.clone(), cs))
            }
        }
    }

    /// Holes have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Tree::Hole(_) => 0,
            Tree::Node(_, cs) => 1 + cs.iter().map(Tree::depth).max().unwrap_or(0),
        }
    }

    /// Hole types from left to right.
    pub fn leaves(&self) -> Vec<Elem> {
        match self {
            Tree::Hole(y) => vec![y.clone()],
            Tree::Node(_, cs) => cs.iter().flat_map(Tree::leaves).collect(),
        }
    }

    /// Replaces the leaves, left to right, by the given trees.
    pub fn graft(&self, subs: &[Tree]) -> Option<Tree> {
        fn go(t: &Tree, subs: &mut std::slice::Iter<'_, Tree>) -> Option<Tree> {
            match t {
                Tree::Hole(_) => subs.next().cloned(),
                Tree::Node(b, cs) => Some(Tree::Node(
                    b.clone(),
                    cs.iter().map(|c| go(c, subs)).collect::<Option<_>>()?,
                )),
            }
        }
        let mut it = subs.iter();
        let out = go(self, &mut it)?;
        it.next().is_none().then_some(out)
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tree::Hole(y) => write!(f, "_{y}"),
            Tree::Node(b, cs) if cs.is_empty() => write!(f, "{b}"),
            Tree::Node(b, cs) => {
                write!(f, "{b}(")?;
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Debug for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Name of the slot of `tree` at leaf `k` in the free monad.
pub fn leaf_slot(tree: &Elem, k: usize) -> Elem {
    Elem::pair(tree.clone(), Elem::Nat(k))
}

/// Trees of profile `q` by depth: `levels[d]` holds the trees of depth
/// exactly `d`, each with its output type index.
fn tree_levels(q: &Polynomial, max_depth: usize) -> Result<Vec<Vec<(Tree, usize)>>> {
    let y = &q.tgt;
    let mut levels: Vec<Vec<(Tree, usize)>> = vec![(0..y.len()).map(|i| (Tree::Hole(y.elem(i).clone()), i)).collect()];
    let mut total = levels[0].len();
    for d in 1..=max_depth {
        // trees of depth < d, grouped by output
        let mut below: Vec<Vec<(usize, &Tree)>> = vec![Vec::new(); y.len()];
        for (lvl, trees) in levels.iter().enumerate() {
            for (t, out) in trees {
                below[*out].push((lvl, t));
            }
        }
        let mut next = Vec::new();
        for b in 0..q.ops.len() {
            let choices: Vec<Vec<usize>> = q.fiber(b).iter().map(|&e| (0..below[q.sigma.at(e)].len()).collect()).collect();
            for pick in product_indices(&choices) {
                let kids: Vec<(usize, &Tree)> = q.fiber(b).iter().zip(&pick).map(|(&e, &k)| below[q.sigma.at(e)][k]).collect();
                let depth = 1 + kids.iter().map(|k| k.0).max().unwrap_or(0);
                if depth != d {
                    continue;
                }
                next.push((Tree::Node(q.ops.elem(b).clone(), kids.iter().map(|k| k.1.clone()).collect()), q.tau.at(b)));
                total += 1;
                if total > MAX_TREES {
                    return Err(Error::Bound(format!("more than {MAX_TREES} trees")));
                }
            }
        }
        levels.push(next);
    }
    Ok(levels)
}

/// The free polynomial monad on an endomorphism: trees of depth at most
/// `max_depth`, ordered by depth.
///
/// Exact iff there is no tree of depth `max_depth + 1`. Otherwise grafting
/// is only defined where the result fits the bound, and the multiplication
/// square has that part of `Q*;Q*` as its top.
pub fn free_poly_monad(q: &Polynomial, max_depth: usize) -> Result<FreeMonad<PolyDouble>> {
    if max_depth < 1 {
        return Err(invalid("max_depth must be at least 1"));
    }
    if !q.is_endo() {
        return Err(boundary("free monads need an endomorphism"));
    }
    let y = &q.tgt;
    let levels = tree_levels(q, max_depth + 1)?;
    let exact = levels[max_depth + 1].is_empty();
    let trees: Vec<&(Tree, usize)> = levels[..=max_depth].iter().flatten().collect();
    let mut ops = Vec::new();
    let mut tau = Vec::new();
    let mut slots = Vec::new();
    let mut sigma = Vec::new();
    let mut theta = Vec::new();
    for (i, (t, out)) in trees.iter().enumerate() {
        let name = t.to_elem();
        for (k, leaf) in t.leaves().iter().enumerate() {
            slots.push(leaf_slot(&name, k));
            sigma.push(index(y, leaf)?);
            theta.push(i);
        }
        ops.push(name);
        tau.push(*out);
    }
    let ops = FinSet::new(ops)?;
    let slots = FinSet::new(slots)?;
    let star = Polynomial::new(
        FinFun::new(slots.clone(), y.clone(), sigma)?,
        FinFun::new(slots, ops.clone(), theta)?,
        FinFun::new(ops, y.clone(), tau)?,
    )?;

    // grafting, restricted to results of bounded depth
    let full = compose_polys(&star, &star)?;
    let graft_of = |op: &Elem| -> Option<(Tree, Vec<usize>)> {
        let [t, pick] = parts::<2>(op).ok()?;
        let t = Tree::from_elem(t)?;
        let subs: Vec<Tree> = pick.as_seq()?.iter().map(Tree::from_elem).collect::<Option<_>>()?;
        let offsets = subs.iter().scan(0, |acc, s| {
            let o = *acc;
            *acc += s.leaves().len();
            Some(o)
        });
        let offsets = offsets.collect();
        Some((t.graft(&subs)?, offsets))
    };
    let keep: Vec<usize> = (0..full.ops.len())
        .filter(|&b| graft_of(full.ops.elem(b)).is_some_and(|(g, _)| g.depth() <= max_depth))
        .collect();
    let mult_top = if keep.len() == full.ops.len() {
        full.clone()
    } else {
        restrict_ops(&full, &keep)?
    };
    let mult = square_from_maps(
        mult_top,
        star.clone(),
        FinFun::identity(y),
        FinFun::identity(y),
        |op| Some(graft_of(op)?.0.to_elem()),
        |slot| {
            let [op, j, i] = parts::<3>(slot).ok()?;
            let (g, offsets) = graft_of(op)?;
            let [_, jk] = parts::<2>(j).ok()?;
            let [_, ik] = parts::<2>(i).ok()?;
            let (Elem::Nat(jk), Elem::Nat(ik)) = (jk, ik) else { return None };
            Some(leaf_slot(&g.to_elem(), offsets[*jk] + ik))
        },
    )?;
    let unit = square_from_maps(
        id_poly(y),
        star.clone(),
        FinFun::identity(y),
        FinFun::identity(y),
        |x| Some(Tree::Hole(x.clone()).to_elem()),
        |x| Some(leaf_slot(&Tree::Hole(x.clone()).to_elem(), 0)),
    )?;
    let corolla = |b: &Elem| -> Option<Elem> {
        let bi = q.ops.index_of(b)?;
        let holes = q.fiber(bi).iter().map(|&e| Tree::Hole(q.src.elem(q.sigma.at(e)).clone())).collect();
        Some(Tree::Node(b.clone(), holes).to_elem())
    };
    let iota = square_from_maps(
        q.clone(),
        star.clone(),
        FinFun::identity(y),
        FinFun::identity(y),
        corolla,
        |e| {
            let ei = q.slots.index_of(e)?;
            Some(leaf_slot(&corolla(q.ops.elem(q.theta.at(ei)))?, q.slot_position(ei)))
        },
    )?;
    Ok(FreeMonad {
        base: Endo {
            obj: y.clone(),
            arrow: q.clone(),
        },
        monad: MonadData {
            endo: Endo {
                obj: y.clone(),
                arrow: star,
            },
            mult,
            unit,
        },
        iota,
        exact,
        bound: max_depth,
    })
}

// The sub-polynomial on the given ops and all their slots.
fn restrict_ops(p: &Polynomial, keep: &[usize]) -> Result<Polynomial> {
    let kept_slots: Vec<usize> = keep.iter().flat_map(|&b| p.fiber(b).iter().copied()).collect();
    let ops = FinSet::new(keep.iter().map(|&i| p.ops.elem(i).clone()).collect())?;
    let slots = FinSet::new(kept_slots.iter().map(|&i| p.slots.elem(i).clone()).collect())?;
    let mut theta = Vec::new();
    for (k, &b) in keep.iter().enumerate() {
        theta.extend(std::iter::repeat_n(k, p.arity(b)));
    }
    Polynomial::new(
        FinFun::new(slots.clone(), p.src.clone(), kept_slots.iter().map(|&e| p.sigma.at(e)).collect())?,
        FinFun::new(slots, ops.clone(), theta)?,
        FinFun::new(ops, p.tgt.clone(), keep.iter().map(|&b| p.tau.at(b)).collect())?,
    )
}

/// The trees of an exact or truncated free monad.
pub fn trees(free: &FreeMonad<PolyDouble>) -> Vec<Tree> {
    free.monad
        .endo
        .arrow
        .ops
        .iter()
        .map(|e| Tree::from_elem(e).expect("free monad ops are trees"))
        .collect()
}

/// The unique monad map extending `phi: F;Q ⇒ M;F` along the free monad on
/// `Q`, by recursion on trees. A hole goes to the unit of `M`; a node
/// applies `phi` at the root to the lifted children and multiplies.
pub fn sharp_lift_poly(
    monad: &MonadData<PolyDouble>,
    f: &Polynomial,
    phi: &PolySquare,
    free: &FreeMonad<PolyDouble>,
) -> Result<PolySquare> {
    if !free.exact {
        return Err(Error::Truncated(format!("free monad cut off at depth {}", free.bound)));
    }
    let d = PolyDouble;
    let q = &free.base.arrow;
    let star = &free.monad.endo.arrow;
    let m = &monad.endo.arrow;
    if phi.top != d.hor_comp(f, q)? || phi.bottom != d.hor_comp(m, f)? || !d.is_globular(phi) {
        return Err(boundary("phi must be a globular square F;Q ⇒ M;F"));
    }
    let lift = Lift { f, m, q, phi, monad };
    let top = d.hor_comp(f, star)?;
    let bottom = phi.bottom.clone();
    let mut op_img: HashMap<Elem, Elem> = HashMap::new();
    let mut slot_img: HashMap<Elem, Elem> = HashMap::new();
    for op in top.ops.iter() {
        let [t, fs] = parts::<2>(op)?;
        let tree = Tree::from_elem(t).ok_or_else(|| invalid(format!("`{t}` is not a tree")))?;
        let out = lift.run(&tree, fs.as_seq().unwrap_or(&[]))?;
        let out_op = Elem::pair(out.f.clone(), Elem::seq(out.ms.clone()));
        for (j, row) in out.slots.iter().enumerate() {
            let fj = &fs.as_seq().unwrap_or(&[])[j];
            let fi = f.op_index(fj)?;
            for (&s, (r, z)) in f.fiber(fi).iter().zip(row) {
                let name = Elem::tuple(vec![op.clone(), leaf_slot(t, j), f.slots.elem(s).clone()]);
                slot_img.insert(name, Elem::tuple(vec![out_op.clone(), r.clone(), z.clone()]));
            }
        }
        op_img.insert(op.clone(), out_op);
    }
    square_from_maps(
        top,
        bottom,
        FinFun::identity(f.src()),
        FinFun::identity(f.tgt()),
        |op| op_img.get(op).cloned(),
        |s| slot_img.get(s).cloned(),
    )
}

struct Lift<'a> {
    f: &'a Polynomial,
    m: &'a Polynomial,
    q: &'a Polynomial,
    phi: &'a PolySquare,
    monad: &'a MonadData<PolyDouble>,
}

// The lift of one F;Q* operation: an F-op, an M-op for each of its slots,
// and for each leaf and each slot of the F-op sitting there, the output
// slot `(slot of f, slot of its M-op)` it is carried to.
struct Lifted {
    f: Elem,
    ms: Vec<Elem>,
    slots: Vec<Vec<(Elem, Elem)>>,
}

impl Lift<'_> {
    fn run(&self, t: &Tree, fs: &[Elem]) -> Result<Lifted> {
        let fail = |what: &str| invalid(format!("lift of `{t}` failed: {what}"));
        match t {
            Tree::Hole(_) => {
                let fe = fs.first().ok_or_else(|| fail("no F-op at the hole"))?;
                let fi = self.f.op_index(fe)?;
                let mut ms = Vec::new();
                let mut row = Vec::new();
                for &s in self.f.fiber(fi) {
                    let x = self.f.src.elem(self.f.sigma.at(s));
                    ms.push(self.monad.unit.phi.apply(x).ok_or_else(|| fail("unit"))?.clone());
                    let z = self.monad.unit.phibar.apply(x).ok_or_else(|| fail("unit slot"))?;
                    row.push((self.f.slots.elem(s).clone(), z.clone()));
                }
                Ok(Lifted {
                    f: fe.clone(),
                    ms,
                    slots: vec![row],
                })
            }
            Tree::Node(b, children) => {
                let bi = self.q.op_index(b)?;
                let mut rest = fs;
                let mut lifted = Vec::new();
                for c in children {
                    let n = c.leaves().len();
                    if rest.len() < n {
                        return Err(fail("too few F-ops"));
                    }
                    lifted.push(self.run(c, &rest[..n])?);
                    rest = &rest[n..];
                }
                let root = Elem::pair(b.clone(), Elem::seq(lifted.iter().map(|l| l.f.clone()).collect()));
                let out = self.phi.phi.apply(&root).ok_or_else(|| fail("phi at the root"))?;
                let [f2, m2s] = parts::<2>(out)?;
                let f2i = self.f.op_index(f2)?;
                let m2s = m2s.as_seq().ok_or_else(|| fail("phi output"))?;
                // where phi sends slot s of the k-th child's F-op: (r, l)
                let mut route: HashMap<(usize, Elem), (Elem, Elem)> = HashMap::new();
                let mut fill: HashMap<(Elem, Elem), (usize, usize)> = HashMap::new();
                for (k, (&e, l)) in self.q.fiber(bi).iter().zip(&lifted).enumerate() {
                    let gi = self.f.op_index(&l.f)?;
                    for (p, &s) in self.f.fiber(gi).iter().enumerate() {
                        let name = Elem::tuple(vec![root.clone(), self.q.slots.elem(e).clone(), self.f.slots.elem(s).clone()]);
                        let img = self.phi.phibar.apply(&name).ok_or_else(|| fail("phi on a slot"))?;
                        let [_, r, lslot] = parts::<3>(img)?;
                        route.insert((k, self.f.slots.elem(s).clone()), (r.clone(), lslot.clone()));
                        fill.insert((r.clone(), lslot.clone()), (k, p));
                    }
                }
                // multiply each M-op of phi's output with the children's M-ops
                let mut ms = Vec::new();
                let mut mm_ops = Vec::new();
                for (&r, m2) in self.f.fiber(f2i).iter().zip(m2s) {
                    let r = self.f.slots.elem(r);
                    let mi = self.m.op_index(m2)?;
                    let xs = self.m.fiber(mi).iter().map(|&l| {
                        let (k, p) = fill.get(&(r.clone(), self.m.slots.elem(l).clone())).ok_or_else(|| fail("unrouted slot"))?;
                        Ok(lifted[*k].ms[*p].clone())
                    });
                    let mm = Elem::pair(m2.clone(), Elem::seq(xs.collect::<Result<_>>()?));
                    ms.push(self.monad.mult.phi.apply(&mm).ok_or_else(|| fail("multiplication"))?.clone());
                    mm_ops.push(mm);
                }
                let r_pos = |r: &Elem| -> Result<usize> { Ok(self.f.slot_position(self.f.slot_index(r)?)) };
                let mut slots = Vec::new();
                for (k, l) in lifted.iter().enumerate() {
                    for row in &l.slots {
                        let mut out_row = Vec::new();
                        for (s, z) in row {
                            let (r, lslot) = route.get(&(k, s.clone())).ok_or_else(|| fail("unrouted slot"))?;
                            let mm = &mm_ops[r_pos(r)?];
                            let name = Elem::tuple(vec![mm.clone(), lslot.clone(), z.clone()]);
                            let w = self.monad.mult.phibar.apply(&name).ok_or_else(|| fail("multiplication slot"))?;
                            out_row.push((r.clone(), w.clone()));
                        }
                        slots.push(out_row);
                    }
                }
                Ok(Lifted {
                    f: f2.clone(),
                    ms,
                    slots,
                })
            }
        }
    }
}

/// `ν: Q*;Q ⇒ Q*`, the composite of `ι` on the last factor with `μ`:
/// grafts a tuple of trees under a root op.
pub fn nu_square(free: &FreeMonad<PolyDouble>) -> Result<PolySquare> {
    if !free.exact {
        return Err(Error::Truncated(format!("free monad cut off at depth {}", free.bound)));
    }
    let d = PolyDouble;
    let star = &free.monad.endo.arrow;
    let whiskered = d.sq_hcomp(&d.sq_ver_id(star), &free.iota)?;
    d.sq_vcomp(&whiskered, &free.monad.mult)
}

/// Parses the polynomial endomorphism text format.
///
/// ```text
/// poly
/// base: y1 y2
/// op c : -> y1
/// op s y1 y2 : -> y2
/// ```
pub fn parse_poly(text: &str) -> Result<Polynomial, ParseError> {
    let mut base: Option<Vec<String>> = None;
    let mut ops: Vec<(String, Vec<String>, String)> = Vec::new();
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
            if words != ["poly"] {
                return Err(ParseError::new(line_no, col, "expected `poly` header"));
            }
            seen_header = true;
            continue;
        }
        if words[0] == "base:" {
            if base.is_some() {
                return Err(ParseError::new(line_no, col, "duplicate `base:` line"));
            }
            base = Some(words[1..].iter().map(|s| s.to_string()).collect());
        } else if words[0] == "op" {
            let Some(ys) = base.as_ref() else {
                return Err(ParseError::new(line_no, col, "`op` before `base:`"));
            };
            let colon = words.iter().position(|w| *w == ":");
            let shape_ok = words.len() >= 5
                && colon == Some(words.len() - 3)
                && words[words.len() - 2] == "->";
            if !shape_ok {
                return Err(ParseError::new(line_no, col, "expected `op <name> <inputs..> : -> <output>`"));
            }
            let types = words[2..words.len() - 3].iter().chain(std::iter::once(&words[words.len() - 1]));
            for w in types {
                if !ys.iter().any(|y| y == w) {
                    let c = word_column(line, w, 2);
                    return Err(ParseError::new(line_no, c, format!("unknown type `{w}`")));
                }
            }
            if ops.iter().any(|o| o.0 == words[1]) {
                return Err(ParseError::new(line_no, word_column(line, words[1], 1), format!("duplicate op `{}`", words[1])));
            }
            ops.push((
                words[1].into(),
                words[2..words.len() - 3].iter().map(|s| s.to_string()).collect(),
                words[words.len() - 1].into(),
            ));
        } else {
            return Err(ParseError::new(line_no, col, format!("unexpected `{}`", words[0])));
        }
    }
    if !seen_header {
        return Err(ParseError::new(1, 1, "empty input"));
    }
    let base = base.ok_or_else(|| ParseError::new(1, 1, "missing `base:` line"))?;
    let y = FinSet::from_names(&base).map_err(|e| ParseError::new(1, 1, e.to_string()))?;
    let sig: Vec<(Elem, Vec<Elem>, Elem)> = ops
        .iter()
        .map(|(b, ins, out)| (Elem::atom(b), ins.iter().map(|s| Elem::atom(s)).collect(), Elem::atom(out)))
        .collect();
    Polynomial::from_ops(&y, &y, &sig).map_err(|e| ParseError::new(1, 1, e.to_string()))
}

/// A random polynomial `x → y` with at most `max_ops` ops of arity at most
/// `max_arity`.
pub fn random_poly<R: Rng>(rng: &mut R, x: &FinSet, y: &FinSet, max_ops: usize, max_arity: usize, tag: &str) -> Polynomial {
    let n = if y.is_empty() { 0 } else { rng.gen_range(0..=max_ops) };
    let sig: Vec<(Elem, Vec<Elem>, Elem)> = (0..n)
        .map(|i| {
            let arity = if x.is_empty() { 0 } else { rng.gen_range(0..=max_arity) };
            let ins = (0..arity).map(|_| x.elem(rng.gen_range(0..x.len())).clone()).collect();
            (Elem::atom(&format!("{tag}{i}")), ins, y.elem(rng.gen_range(0..y.len())).clone())
        })
        .collect();
    Polynomial::from_ops(x, y, &sig).expect("random polynomial")
}

/// A random slice over `base` with at most `max` elements.
pub fn random_slice<R: Rng>(rng: &mut R, base: &FinSet, max: usize, tag: &str) -> SliceObject {
    let n = if base.is_empty() { 0 } else { rng.gen_range(0..=max) };
    SliceObject::new(random_fun(rng, &named_set(tag, n), base))
}

/// A random cartesian square with the given top and vertical edges. Ops are
/// merged only when their outputs and slot types agree after `u` and `v`,
/// and the bottom may gain extra ops.
pub fn random_poly_square_from<R: Rng>(
    rng: &mut R,
    top: &Polynomial,
    u: &FinFun,
    v: &FinFun,
    extra: usize,
    max_arity: usize,
    tag: &str,
) -> PolySquare {
    let mut keys: Vec<(usize, Vec<usize>)> = Vec::new();
    let mut table = Vec::new();
    for b in 0..top.ops.len() {
        let key = (
            v.at(top.tau.at(b)),
            top.fiber(b).iter().map(|&e| u.at(top.sigma.at(e))).collect::<Vec<_>>(),
        );
        let same: Vec<usize> = (0..keys.len()).filter(|&j| keys[j] == key).collect();
        if !same.is_empty() && rng.gen_bool(0.5) {
            table.push(same[rng.gen_range(0..same.len())]);
        } else {
            keys.push(key);
            table.push(keys.len() - 1);
        }
    }
    let (x2, y2) = (u.cod(), v.cod());
    if !y2.is_empty() {
        for _ in 0..rng.gen_range(0..=extra) {
            let arity = if x2.is_empty() { 0 } else { rng.gen_range(0..=max_arity) };
            keys.push((rng.gen_range(0..y2.len()), (0..arity).map(|_| rng.gen_range(0..x2.len())).collect()));
        }
    }
    let sig: Vec<(Elem, Vec<Elem>, Elem)> = keys
        .iter()
        .enumerate()
        .map(|(i, (out, ins))| {
            (
                Elem::atom(&format!("{tag}{i}")),
                ins.iter().map(|&x| x2.elem(x).clone()).collect(),
                y2.elem(*out).clone(),
            )
        })
        .collect();
    let bottom = Polynomial::from_ops(x2, y2, &sig).expect("random bottom");
    let phi = FinFun::new(top.ops.clone(), bottom.ops.clone(), table.clone()).expect("in range");
    let phibar = FinFun::new(
        top.slots.clone(),
        bottom.slots.clone(),
        (0..top.slots.len())
            .map(|e| bottom.fiber(table[top.theta.at(e)])[top.slot_position(e)])
            .collect(),
    )
    .expect("in range");
    PolySquare::new(top.clone(), bottom, u.clone(), v.clone(), phi, phibar).expect("random square is cartesian")
}

/// All polynomial monads on a one-element base with op set `m0, m1, ..` of
/// size at most `max_ops` and arities at most `max_arity`.
///
/// The unit op is a unary op `e`, and the multiplication is forced on
/// composites with `e`. Everything else is enumerated and the remaining
/// laws are checked by `check`.
pub fn enumerate_poly_monads(
    max_ops: usize,
    max_arity: usize,
    check: impl Fn(&MonadData<PolyDouble>) -> Result<bool>,
) -> Result<Vec<MonadData<PolyDouble>>> {
    let y = FinSet::from_names(&["y"])?;
    let yy = y.elem(0).clone();
    let d = PolyDouble;
    let mut out = Vec::new();
    for n in 1..=max_ops {
        let arities: Vec<Vec<usize>> = vec![(0..=max_arity).collect(); n];
        for ar in product_indices(&arities) {
            let sig: Vec<(Elem, Vec<Elem>, Elem)> = ar
                .iter()
                .enumerate()
                .map(|(i, &a)| (Elem::atom(&format!("m{i}")), vec![yy.clone(); a], yy.clone()))
                .collect();
            let m = Polynomial::from_ops(&y, &y, &sig)?;
            let mm = d.hor_comp(&m, &m)?;
            for e in (0..n).filter(|&i| ar[i] == 1) {
                let unit_phi = FinFun::new(y.clone(), m.ops.clone(), vec![e])?;
                let unit_phibar = FinFun::new(y.clone(), m.slots.clone(), vec![m.fiber(e)[0]])?;
                let unit = PolySquare::globular(id_poly(&y), m.clone(), unit_phi, unit_phibar)?;
                let top = &mm;
                let mut choices = op_choices(top, &m, &FinFun::identity(&y), &FinFun::identity(&y))?;
                for (b, c) in choices.iter_mut().enumerate() {
                    let [outer, pick] = parts::<2>(top.ops.elem(b))?;
                    let pick = pick.as_seq().unwrap_or(&[]);
                    let oi = m.op_index(outer)?;
                    let slot_part = |s: usize, k: usize| -> Result<usize> {
                        m.slot_index(&parts::<3>(top.slots.elem(s))?[k])
                    };
                    // (e,[p]) ↦ p and (p,[e,..,e]) ↦ p, slots carried along
                    let forced = if oi == e {
                        let img = top.fiber(b).iter().map(|&s| slot_part(s, 2)).collect::<Result<Vec<_>>>()?;
                        Some((m.op_index(&pick[0])?, img))
                    } else if pick.iter().all(|p| m.op_index(p).ok() == Some(e)) {
                        let img = top.fiber(b).iter().map(|&s| slot_part(s, 1)).collect::<Result<Vec<_>>>()?;
                        Some((oi, img))
                    } else {
                        None
                    };
                    if let Some(w) = forced {
                        c.retain(|choice| *choice == w);
                    }
                }
                for mult in enumerate_squares(top, &m, &FinFun::identity(&y), &FinFun::identity(&y), &choices, usize::MAX)? {
                    let cand = MonadData {
                        endo: Endo {
                            obj: y.clone(),
                            arrow: m.clone(),
                        },
                        mult,
                        unit: unit.clone(),
                    };
                    if check(&cand)? {
                        out.push(cand);
                    }
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn one() -> FinSet {
        FinSet::from_names(&["y"]).unwrap()
    }

    fn poly(text: &str) -> Polynomial {
        parse_poly(text).unwrap()
    }

    fn arities(p: &Polynomial) -> Vec<usize> {
        (0..p.ops().len()).map(|b| p.arity(b)).collect()
    }

    #[test]
    fn parse_and_display() {
        let p = poly("poly\nbase: y1 y2\nop c : -> y1\nop s y1 y2 : -> y2\n");
        assert_eq!(arities(&p), vec![0, 2]);
        assert_eq!(p.to_string(), "{y1, y2} → {y1, y2} {c : -> y1, s : y1 y2 -> y2}");
        let err = parse_poly("poly\nbase: y\nop s z : -> y\n").unwrap_err();
        assert_eq!((err.line, err.col), (3, 6));
        assert!(parse_poly("poly\nbase: y\nop s y -> y\n").is_err());
    }

    #[test]
    fn composite_arities() {
        let q = poly("poly\nbase: y\nop b y y : -> y\n");
        let p = poly("poly\nbase: y\nop z : -> y\nop u y : -> y\n");
        let qp = compose_polys(&q, &p).unwrap();
        assert_eq!(arities(&qp), vec![0, 1, 1, 2]);
    }

    #[test]
    fn evaluation_counts() {
        let q = poly("poly\nbase: y\nop b y y : -> y\n");
        let x = SliceObject::new(FinFun::new(named_set("x", 3), one(), vec![0; 3]).unwrap());
        assert_eq!(evaluate_poly(&q, &x).unwrap().total.len(), 9);
        let c = poly("poly\nbase: y\nop c : -> y\n");
        let empty = SliceObject::new(FinFun::from_empty(&one()));
        assert_eq!(evaluate_poly(&c, &empty).unwrap().total.len(), 1);
    }

    #[test]
    fn composition_is_extensional() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let y = named_set("y", 2);
        for _ in 0..20 {
            let p = random_poly(&mut rng, &y, &y, 3, 2, "p");
            let q = random_poly(&mut rng, &y, &y, 3, 2, "q");
            let x = random_slice(&mut rng, &y, 3, "x");
            composition_comparison(&q, &p, &x).unwrap();
        }
    }

    #[test]
    fn constant_free_monad() {
        let q = poly("poly\nbase: y\nop c : -> y\n");
        let free = free_poly_monad(&q, 1).unwrap();
        assert!(free.exact);
        assert_eq!(arities(&free.monad.endo.arrow), vec![1, 0]);
        let ts: Vec<String> = trees(&free).iter().map(|t| t.to_string()).collect();
        assert_eq!(ts, vec!["_y", "c"]);
    }

    #[test]
    fn successor_free_monad_is_cut_off() {
        let q = poly("poly\nbase: y\nop s y : -> y\n");
        let free = free_poly_monad(&q, 4).unwrap();
        assert!(!free.exact);
        assert_eq!(arities(&free.monad.endo.arrow), vec![1; 5]);
    }

    #[test]
    fn empty_free_monad_is_identity_like() {
        let q = poly("poly\nbase: y1 y2\n");
        let free = free_poly_monad(&q, 1).unwrap();
        assert!(free.exact);
        assert_eq!(free.monad.endo.arrow.ops().len(), 2);
        assert!(nu_square(&free).unwrap().top().ops().is_empty());
    }

    #[test]
    fn nu_grafts_under_the_root() {
        let q = poly("poly\nbase: y\nop c : -> y\n");
        let free = free_poly_monad(&q, 1).unwrap();
        let nu = nu_square(&free).unwrap();
        let c = Elem::pair(Elem::atom("c"), Elem::seq(vec![]));
        assert_eq!(nu.phi().apply(&c), Some(&Tree::Node(Elem::atom("c"), vec![]).to_elem()));
    }

    #[test]
    fn framing_is_cartesian() {
        let d = PolyDouble;
        let x = named_set("x", 2);
        let u = FinFun::new(x.clone(), one(), vec![0, 0]).unwrap();
        let fr = d.framing(&u).unwrap();
        assert_eq!(d.conjoint_base(&fr.conjoint).unwrap(), Some(u));
        let id = d.framing(&FinFun::identity(&x)).unwrap();
        assert_eq!(id.alpha, d.sq_ver_id(&id_poly(&x)));
    }

    #[test]
    fn non_cartesian_square_is_rejected() {
        let p = poly("poly\nbase: y\nop b y y : -> y\n");
        let q = poly("poly\nbase: y\nop b y y : -> y\n");
        let slots = p.slots().clone();
        let both_to_first = FinFun::new(slots.clone(), slots, vec![0, 0]).unwrap();
        let r = PolySquare::globular(p.clone(), q, FinFun::identity(p.ops()), both_to_first);
        assert!(r.is_err());
    }

    #[test]
    fn permutation_count() {
        assert_eq!(permutations(3).len(), 6);
        assert_eq!(permutations(0), vec![Vec::<usize>::new()]);
    }
}
