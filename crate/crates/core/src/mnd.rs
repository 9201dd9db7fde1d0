//! Endomorphisms and monads in a double category.
//!
//! Everything here is generic over [`DoubleCategory`]. A horizontal map
//! `(F, φ): (X,P) → (Y,Q)` has `F: X → Y` and `φ: F;Q ⇒ P;F`; a vertical
//! map `(u, ū): (X,P) → (X',P')` has `ū: P ⇒ P'` over `u` on both sides.
//! Laws are stated as [`Equation`]s whose sides are pasting diagrams, and
//! compared up to the canonical coherence isomorphisms.

use std::fmt::Debug;
use std::marker::PhantomData;

use crate::doublecat::{equal_mod_coherence, paste, paste_to, reshape, Cell, DoubleCategory, FreeMonad, HorExpr};
pub use crate::doublecat::{Endo, MonadData};
use crate::error::{boundary, invalid, Error, Result};

/// Upper bound on candidate squares listed by uniqueness checks.
pub const ENUMERATION_LIMIT: usize = 1 << 16;

/// A displayed equation between two pasting diagrams.
pub struct Equation<C: DoubleCategory> {
    pub name: String,
    pub lhs: Result<Cell<C>>,
    pub rhs: Result<Cell<C>>,
}

/// The outcome of comparing the two sides of an equation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Fails(String),
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }
}

impl<C: DoubleCategory> Equation<C> {
    pub fn new(name: impl Into<String>, lhs: Result<Cell<C>>, rhs: Result<Cell<C>>) -> Self {
        Equation {
            name: name.into(),
            lhs,
            rhs,
        }
    }

    pub fn verdict(&self, c: &C) -> Verdict {
        match (&self.lhs, &self.rhs) {
            (Err(e), _) => Verdict::Fails(format!("left side: {e}")),
            (_, Err(e)) => Verdict::Fails(format!("right side: {e}")),
            (Ok(l), Ok(r)) => match equal_mod_coherence(c, l, r) {
                Ok(true) => Verdict::Holds,
                Ok(false) => Verdict::Fails("the two sides differ".into()),
                Err(e) => Verdict::Fails(e.to_string()),
            },
        }
    }

    /// Both sides, rendered by the instance.
    pub fn render(&self, c: &C) -> String {
        let side = |s: &Result<Cell<C>>| match s {
            Ok(cell) => c.render_square(&cell.sq),
            Err(e) => format!("<{e}>"),
        };
        format!("lhs:\n{}\nrhs:\n{}", side(&self.lhs), side(&self.rhs))
    }
}

/// Whether every equation holds.
pub fn all_hold<C: DoubleCategory>(c: &C, eqs: &[Equation<C>]) -> bool {
    eqs.iter().all(|e| e.verdict(c).holds())
}

fn atom<C: DoubleCategory>(f: &C::Hor) -> HorExpr<C> {
    HorExpr::atom(f)
}

fn comp<C: DoubleCategory>(f: &C::Hor, g: &C::Hor) -> HorExpr<C> {
    HorExpr::comp(atom(f), atom(g))
}

/// `μ` as a cell `P;P ⇒ P`.
pub fn mult_cell<C: DoubleCategory>(m: &MonadData<C>) -> Cell<C> {
    let p = &m.endo.arrow;
    Cell::new(m.mult.clone(), comp(p, p), atom(p))
}

/// `η` as a cell `id ⇒ P`.
pub fn unit_cell<C: DoubleCategory>(m: &MonadData<C>) -> Cell<C> {
    Cell::new(m.unit.clone(), HorExpr::id(&m.endo.obj), atom(&m.endo.arrow))
}

/// `φ` as a cell `F;Q ⇒ P;F`.
pub fn phi_cell<C: DoubleCategory>(f: &C::Hor, q: &C::Hor, p: &C::Hor, phi: &C::Sq) -> Cell<C> {
    Cell::new(phi.clone(), comp(f, q), comp(p, f))
}

/// Associativity and the two unit laws.
pub fn monad_law_equations<C: DoubleCategory>(c: &C, m: &MonadData<C>) -> Vec<Equation<C>> {
    let p = &m.endo.arrow;
    let mu = mult_cell(m);
    let eta = unit_cell(m);
    let idp = Cell::id(c, p);
    vec![
        Equation::new(
            "associativity",
            paste(c, &[vec![mu.clone(), idp.clone()], vec![mu.clone()]]),
            paste(c, &[vec![idp.clone(), mu.clone()], vec![mu.clone()]]),
        ),
        Equation::new(
            "left unit",
            paste(c, &[vec![eta.clone(), idp.clone()], vec![mu.clone()]]),
            Ok(idp.clone()),
        ),
        Equation::new(
            "right unit",
            paste(c, &[vec![idp.clone(), eta], vec![mu]]),
            Ok(idp),
        ),
    ]
}

/// The two laws making `(F, φ): (X,P) → (Y,Q)` a horizontal monad map.
pub fn hor_map_equations<C: DoubleCategory>(
    c: &C,
    src: &MonadData<C>,
    tgt: &MonadData<C>,
    f: &C::Hor,
    phi: &C::Sq,
) -> Vec<Equation<C>> {
    let (p, q) = (&src.endo.arrow, &tgt.endo.arrow);
    let phic = phi_cell(f, q, p, phi);
    let idf = Cell::id(c, f);
    vec![
        Equation::new(
            "horizontal map preserves multiplication",
            paste(c, &[vec![idf.clone(), mult_cell(tgt)], vec![phic.clone()]]),
            paste(
                c,
                &[
                    vec![phic.clone(), Cell::id(c, q)],
                    vec![Cell::id(c, p), phic.clone()],
                    vec![mult_cell(src), idf.clone()],
                ],
            ),
        ),
        Equation::new(
            "horizontal map preserves unit",
            paste(c, &[vec![idf.clone(), unit_cell(tgt)], vec![phic]]),
            paste(c, &[vec![unit_cell(src), idf]]),
        ),
    ]
}

/// The two laws making `(u, ū): (X,P) → (X',P')` a vertical monad map.
pub fn vert_map_equations<C: DoubleCategory>(
    c: &C,
    src: &MonadData<C>,
    tgt: &MonadData<C>,
    u: &C::Ver,
    ubar: &C::Sq,
) -> Vec<Equation<C>> {
    let ub = Cell::plain(c, ubar);
    vec![
        Equation::new(
            "vertical map preserves multiplication",
            paste(c, &[vec![mult_cell(src)], vec![ub.clone()]]),
            paste(c, &[vec![ub.clone(), ub.clone()], vec![mult_cell(tgt)]]),
        ),
        Equation::new(
            "vertical map preserves unit",
            paste(c, &[vec![unit_cell(src)], vec![ub]]),
            paste(c, &[vec![Cell::id_ver(c, u)], vec![unit_cell(tgt)]]),
        ),
    ]
}

/// The compatibility condition of an endomorphism square `α` with top
/// `(F,φ)`, bottom `(F',φ')`, left `ū` and right `v̄`.
pub fn endo_square_equation<C: DoubleCategory>(
    c: &C,
    top: (&C::Hor, &C::Sq),
    bottom: (&C::Hor, &C::Sq),
    ubar: &C::Sq,
    vbar: &C::Sq,
    alpha: &C::Sq,
) -> Equation<C> {
    let (p, q) = (c.sq_top(ubar), c.sq_top(vbar));
    let (p2, q2) = (c.sq_bottom(ubar), c.sq_bottom(vbar));
    let phi = phi_cell(top.0, &q, &p, top.1);
    let phi2 = phi_cell(bottom.0, &q2, &p2, bottom.1);
    let (a, u, v) = (Cell::plain(c, alpha), Cell::plain(c, ubar), Cell::plain(c, vbar));
    Equation::new(
        "endomorphism square compatibility",
        paste(c, &[vec![phi], vec![u, a.clone()]]),
        paste(c, &[vec![a, v], vec![phi2]]),
    )
}

/// Objects of `End(C)` or `Mnd(C)`: endomorphisms, possibly with extra
/// structure that maps must respect.
pub trait EndoObject<C: DoubleCategory>: Clone + PartialEq + Debug {
    fn endo(&self) -> &Endo<C>;

    /// Laws for a horizontal map `(f, phi)` from `src` to `tgt`.
    fn hor_equations(c: &C, src: &Self, tgt: &Self, f: &C::Hor, phi: &C::Sq) -> Vec<Equation<C>>;

    /// Laws for a vertical map `(u, ubar)` from `src` to `tgt`.
    fn ver_equations(c: &C, src: &Self, tgt: &Self, u: &C::Ver, ubar: &C::Sq) -> Vec<Equation<C>>;

    /// Laws for the object itself.
    fn own_equations(&self, c: &C) -> Vec<Equation<C>>;
}

impl<C: DoubleCategory> EndoObject<C> for Endo<C> {
    fn endo(&self) -> &Endo<C> {
        self
    }
    fn hor_equations(_: &C, _: &Self, _: &Self, _: &C::Hor, _: &C::Sq) -> Vec<Equation<C>> {
        Vec::new()
    }
    fn ver_equations(_: &C, _: &Self, _: &Self, _: &C::Ver, _: &C::Sq) -> Vec<Equation<C>> {
        Vec::new()
    }
    fn own_equations(&self, _: &C) -> Vec<Equation<C>> {
        Vec::new()
    }
}

impl<C: DoubleCategory> EndoObject<C> for MonadData<C> {
    fn endo(&self) -> &Endo<C> {
        &self.endo
    }
    fn hor_equations(c: &C, src: &Self, tgt: &Self, f: &C::Hor, phi: &C::Sq) -> Vec<Equation<C>> {
        hor_map_equations(c, src, tgt, f, phi)
    }
    fn ver_equations(c: &C, src: &Self, tgt: &Self, u: &C::Ver, ubar: &C::Sq) -> Vec<Equation<C>> {
        vert_map_equations(c, src, tgt, u, ubar)
    }
    fn own_equations(&self, c: &C) -> Vec<Equation<C>> {
        monad_law_equations(c, self)
    }
}

/// A horizontal map `(F, φ): src → tgt` with `φ: F;Q ⇒ P;F`.
#[derive(Clone, Debug, PartialEq)]
pub struct HorMap<C: DoubleCategory, O> {
    pub src: O,
    pub tgt: O,
    pub arrow: C::Hor,
    pub phi: C::Sq,
}

/// A vertical map `(u, ū): src → tgt` with `ū: P ⇒ P'` over `u`, `u`.
#[derive(Clone, Debug, PartialEq)]
pub struct VertMap<C: DoubleCategory, O> {
    pub src: O,
    pub tgt: O,
    pub arrow: C::Ver,
    pub sq: C::Sq,
}

/// A square `α: F ⇒ F'` between horizontal maps, over two vertical maps.
#[derive(Clone, Debug, PartialEq)]
pub struct EndoSq<C: DoubleCategory, O> {
    pub top: HorMap<C, O>,
    pub bottom: HorMap<C, O>,
    pub left: VertMap<C, O>,
    pub right: VertMap<C, O>,
    pub sq: C::Sq,
}

pub type HorEndoMap<C> = HorMap<C, Endo<C>>;
pub type VertEndoMap<C> = VertMap<C, Endo<C>>;
pub type EndoSquare<C> = EndoSq<C, Endo<C>>;
pub type HorMonadMap<C> = HorMap<C, MonadData<C>>;
pub type VertMonadMap<C> = VertMap<C, MonadData<C>>;
pub type MonadSquare<C> = EndoSq<C, MonadData<C>>;

impl<C: DoubleCategory, O: EndoObject<C>> HorMap<C, O> {
    /// Checks the boundary of `phi`; laws are checked by [`Self::equations`].
    pub fn new(c: &C, src: O, tgt: O, arrow: C::Hor, phi: C::Sq) -> Result<Self> {
        let (p, q) = (&src.endo().arrow, &tgt.endo().arrow);
        if c.hor_src(&arrow) != src.endo().obj || c.hor_tgt(&arrow) != tgt.endo().obj {
            return Err(boundary("horizontal map has the wrong ends"));
        }
        if c.sq_top(&phi) != c.hor_comp(&arrow, q)? || c.sq_bottom(&phi) != c.hor_comp(p, &arrow)? || !c.is_globular(&phi) {
            return Err(boundary("phi must be a globular square F;Q ⇒ P;F"));
        }
        Ok(HorMap { src, tgt, arrow, phi })
    }

    pub fn equations(&self, c: &C) -> Vec<Equation<C>> {
        O::hor_equations(c, &self.src, &self.tgt, &self.arrow, &self.phi)
    }
}

impl<C: DoubleCategory, O: EndoObject<C>> VertMap<C, O> {
    pub fn new(c: &C, src: O, tgt: O, arrow: C::Ver, sq: C::Sq) -> Result<Self> {
        let ok = c.sq_top(&sq) == src.endo().arrow
            && c.sq_bottom(&sq) == tgt.endo().arrow
            && c.sq_left(&sq) == arrow
            && c.sq_right(&sq) == arrow;
        if !ok {
            return Err(boundary("vertical map square has the wrong boundary"));
        }
        Ok(VertMap { src, tgt, arrow, sq })
    }

    pub fn equations(&self, c: &C) -> Vec<Equation<C>> {
        O::ver_equations(c, &self.src, &self.tgt, &self.arrow, &self.sq)
    }
}

impl<C: DoubleCategory, O: EndoObject<C>> EndoSq<C, O> {
    pub fn new(c: &C, top: HorMap<C, O>, bottom: HorMap<C, O>, left: VertMap<C, O>, right: VertMap<C, O>, sq: C::Sq) -> Result<Self> {
        let ok = c.sq_top(&sq) == top.arrow
            && c.sq_bottom(&sq) == bottom.arrow
            && c.sq_left(&sq) == left.arrow
            && c.sq_right(&sq) == right.arrow
            && left.src == top.src
            && left.tgt == bottom.src
            && right.src == top.tgt
            && right.tgt == bottom.tgt;
        if !ok {
            return Err(boundary("endomorphism square has the wrong boundary"));
        }
        Ok(EndoSq { top, bottom, left, right, sq })
    }

    pub fn equation(&self, c: &C) -> Equation<C> {
        endo_square_equation(
            c,
            (&self.top.arrow, &self.top.phi),
            (&self.bottom.arrow, &self.bottom.phi),
            &self.left.sq,
            &self.right.sq,
            &self.sq,
        )
    }
}

/// The forgetful map from monad maps to endomorphism maps.
pub fn forget_hor<C: DoubleCategory>(h: &HorMonadMap<C>) -> HorEndoMap<C> {
    HorMap {
        src: h.src.endo.clone(),
        tgt: h.tgt.endo.clone(),
        arrow: h.arrow.clone(),
        phi: h.phi.clone(),
    }
}

pub fn forget_ver<C: DoubleCategory>(v: &VertMonadMap<C>) -> VertEndoMap<C> {
    VertMap {
        src: v.src.endo.clone(),
        tgt: v.tgt.endo.clone(),
        arrow: v.arrow.clone(),
        sq: v.sq.clone(),
    }
}

pub fn forget_square<C: DoubleCategory>(s: &MonadSquare<C>) -> EndoSquare<C> {
    EndoSq {
        top: forget_hor(&s.top),
        bottom: forget_hor(&s.bottom),
        left: forget_ver(&s.left),
        right: forget_ver(&s.right),
        sq: s.sq.clone(),
    }
}

/// The double category `End(C)` (with `O = Endo<C>`) or `Mnd(C)` (with
/// `O = MonadData<C>`).
#[derive(Clone, Debug, PartialEq)]
pub struct EndCat<C: DoubleCategory, O> {
    pub base: C,
    _obj: PhantomData<O>,
}

pub type End<C> = EndCat<C, Endo<C>>;
pub type Mnd<C> = EndCat<C, MonadData<C>>;

pub fn build_end<C: DoubleCategory>(c: C) -> End<C> {
    EndCat { base: c, _obj: PhantomData }
}

pub fn build_mnd<C: DoubleCategory>(c: C) -> Mnd<C> {
    EndCat { base: c, _obj: PhantomData }
}

impl<C: DoubleCategory, O: EndoObject<C>> EndCat<C, O> {
    fn ver_id_map(&self, o: &O) -> VertMap<C, O> {
        let c = &self.base;
        VertMap {
            src: o.clone(),
            tgt: o.clone(),
            arrow: c.ver_id(&o.endo().obj),
            sq: c.sq_ver_id(&o.endo().arrow),
        }
    }

    // A globular coherence square between composite horizontal maps.
    fn coherence(&self, top: HorMap<C, O>, bottom: HorMap<C, O>, sq: C::Sq) -> EndoSq<C, O> {
        EndoSq {
            left: self.ver_id_map(&top.src),
            right: self.ver_id_map(&top.tgt),
            top,
            bottom,
            sq,
        }
    }
}

impl<C: DoubleCategory, O: EndoObject<C>> DoubleCategory for EndCat<C, O> {
    type Obj = O;
    type Hor = HorMap<C, O>;
    type Ver = VertMap<C, O>;
    type Sq = EndoSq<C, O>;

    fn name(&self) -> String {
        format!("endo({})", self.base.name())
    }

    fn hor_src(&self, f: &Self::Hor) -> O {
        f.src.clone()
    }
    fn hor_tgt(&self, f: &Self::Hor) -> O {
        f.tgt.clone()
    }

    fn hor_id(&self, x: &O) -> Self::Hor {
        let c = &self.base;
        let (obj, p) = (&x.endo().obj, &x.endo().arrow);
        let phi = reshape(
            c,
            &Cell::id(c, p),
            HorExpr::comp(HorExpr::id(obj), atom(p)),
            HorExpr::comp(atom(p), HorExpr::id(obj)),
        )
        .expect("unitors exist for every arrow");
        HorMap {
            src: x.clone(),
            tgt: x.clone(),
            arrow: c.hor_id(obj),
            phi: phi.sq,
        }
    }

    fn hor_comp(&self, f: &Self::Hor, g: &Self::Hor) -> Result<Self::Hor> {
        let c = &self.base;
        if f.tgt != g.src {
            return Err(boundary("horizontal maps do not compose"));
        }
        let (p, q, r) = (&f.src.endo().arrow, &f.tgt.endo().arrow, &g.tgt.endo().arrow);
        let (ff, gg) = (&f.arrow, &g.arrow);
        let rows = [
            vec![Cell::id(c, ff), phi_cell(gg, r, q, &g.phi)],
            vec![phi_cell(ff, q, p, &f.phi), Cell::id(c, gg)],
        ];
        let fg = HorExpr::comp(atom(ff), atom(gg));
        let cell = paste_to(c, &rows, HorExpr::comp(fg.clone(), atom(r)), HorExpr::comp(atom(p), fg))?;
        Ok(HorMap {
            src: f.src.clone(),
            tgt: g.tgt.clone(),
            arrow: c.hor_comp(ff, gg)?,
            phi: cell.sq,
        })
    }

    fn ver_src(&self, u: &Self::Ver) -> O {
        u.src.clone()
    }
    fn ver_tgt(&self, u: &Self::Ver) -> O {
        u.tgt.clone()
    }
    fn ver_id(&self, x: &O) -> Self::Ver {
        self.ver_id_map(x)
    }
    fn ver_comp(&self, u: &Self::Ver, v: &Self::Ver) -> Result<Self::Ver> {
        if u.tgt != v.src {
            return Err(boundary("vertical maps do not compose"));
        }
        let c = &self.base;
        Ok(VertMap {
            src: u.src.clone(),
            tgt: v.tgt.clone(),
            arrow: c.ver_comp(&u.arrow, &v.arrow)?,
            sq: c.sq_vcomp(&u.sq, &v.sq)?,
        })
    }

    fn sq_top(&self, s: &Self::Sq) -> Self::Hor {
        s.top.clone()
    }
    fn sq_bottom(&self, s: &Self::Sq) -> Self::Hor {
        s.bottom.clone()
    }
    fn sq_left(&self, s: &Self::Sq) -> Self::Ver {
        s.left.clone()
    }
    fn sq_right(&self, s: &Self::Sq) -> Self::Ver {
        s.right.clone()
    }

    fn sq_hor_id(&self, u: &Self::Ver) -> Self::Sq {
        EndoSq {
            top: self.hor_id(&u.src),
            bottom: self.hor_id(&u.tgt),
            left: u.clone(),
            right: u.clone(),
            sq: self.base.sq_hor_id(&u.arrow),
        }
    }

    fn sq_ver_id(&self, f: &Self::Hor) -> Self::Sq {
        EndoSq {
            top: f.clone(),
            bottom: f.clone(),
            left: self.ver_id_map(&f.src),
            right: self.ver_id_map(&f.tgt),
            sq: self.base.sq_ver_id(&f.arrow),
        }
    }

    fn sq_hcomp(&self, a: &Self::Sq, b: &Self::Sq) -> Result<Self::Sq> {
        if a.right != b.left {
            return Err(boundary("squares do not share a vertical edge"));
        }
        Ok(EndoSq {
            top: self.hor_comp(&a.top, &b.top)?,
            bottom: self.hor_comp(&a.bottom, &b.bottom)?,
            left: a.left.clone(),
            right: b.right.clone(),
            sq: self.base.sq_hcomp(&a.sq, &b.sq)?,
        })
    }

    fn sq_vcomp(&self, a: &Self::Sq, b: &Self::Sq) -> Result<Self::Sq> {
        if a.bottom != b.top {
            return Err(boundary("cannot stack squares with different middle arrows"));
        }
        Ok(EndoSq {
            top: a.top.clone(),
            bottom: b.bottom.clone(),
            left: self.ver_comp(&a.left, &b.left)?,
            right: self.ver_comp(&a.right, &b.right)?,
            sq: self.base.sq_vcomp(&a.sq, &b.sq)?,
        })
    }

    fn associator(&self, f: &Self::Hor, g: &Self::Hor, h: &Self::Hor) -> Result<Self::Sq> {
        let top = self.hor_comp(&self.hor_comp(f, g)?, h)?;
        let bottom = self.hor_comp(f, &self.hor_comp(g, h)?)?;
        let sq = self.base.associator(&f.arrow, &g.arrow, &h.arrow)?;
        Ok(self.coherence(top, bottom, sq))
    }

    fn left_unitor(&self, f: &Self::Hor) -> Self::Sq {
        let top = self.hor_comp(&self.hor_id(&f.src), f).expect("identity composes");
        let sq = self.base.left_unitor(&f.arrow);
        self.coherence(top, f.clone(), sq)
    }

    fn right_unitor(&self, f: &Self::Hor) -> Self::Sq {
        let top = self.hor_comp(f, &self.hor_id(&f.tgt)).expect("identity composes");
        let sq = self.base.right_unitor(&f.arrow);
        self.coherence(top, f.clone(), sq)
    }

    fn invert_globular(&self, s: &Self::Sq) -> Result<Self::Sq> {
        if !self.is_globular(s) {
            return Err(invalid("only globular squares are inverted"));
        }
        Ok(self.coherence(s.bottom.clone(), s.top.clone(), self.base.invert_globular(&s.sq)?))
    }

    fn validate_square(&self, s: &Self::Sq) -> Result<()> {
        let c = &self.base;
        c.validate_square(&s.sq)?;
        let mut eqs = vec![s.equation(c)];
        eqs.extend(s.top.equations(c));
        eqs.extend(s.bottom.equations(c));
        eqs.extend(s.left.equations(c));
        eqs.extend(s.right.equations(c));
        for e in &eqs {
            if let crate::mnd::Verdict::Fails(why) = e.verdict(c) {
                return Err(invalid(format!("{}: {why}", e.name)));
            }
        }
        Ok(())
    }

    fn squares_with_boundary(
        &self,
        top: &Self::Hor,
        bottom: &Self::Hor,
        left: &Self::Ver,
        right: &Self::Ver,
        limit: usize,
    ) -> Result<Vec<Self::Sq>> {
        let c = &self.base;
        let mut out = Vec::new();
        for sq in c.squares_with_boundary(&top.arrow, &bottom.arrow, &left.arrow, &right.arrow, limit)? {
            let s = EndoSq {
                top: top.clone(),
                bottom: bottom.clone(),
                left: left.clone(),
                right: right.clone(),
                sq,
            };
            if s.equation(c).verdict(c).holds() {
                out.push(s);
            }
        }
        Ok(out)
    }

    fn render_square(&self, s: &Self::Sq) -> String {
        self.base.render_square(&s.sq)
    }
}

/// Base change of an endomorphism along `u: X → X'`: the endomorphism
/// `companion;P';conjoint` on `X` with its cartesian lift to `(X',P')`.
pub fn base_change_endo<C: DoubleCategory>(c: &C, u: &C::Ver, target: &Endo<C>) -> Result<VertEndoMap<C>> {
    if c.ver_tgt(u) != target.obj {
        return Err(boundary("base change along an arrow into a different object"));
    }
    let fr = c.framing(u)?;
    let (x, x2) = (c.ver_src(u), c.ver_tgt(u));
    let p2 = &target.arrow;
    let chain = HorExpr::chain(&[fr.companion.clone(), p2.clone(), fr.conjoint.clone()]);
    let p = chain.eval(c)?;
    let row = vec![
        Cell::new(fr.alpha.clone(), atom(&fr.companion), HorExpr::id(&x2)),
        Cell::id(c, p2),
        Cell::new(fr.beta.clone(), atom(&fr.conjoint), HorExpr::id(&x2)),
    ];
    let lift = paste_to(c, &[row], chain, atom(p2))?;
    VertMap::new(c, Endo { obj: x, arrow: p }, target.clone(), u.clone(), lift.sq)
}

/// `η_u = [δ_u | γ_u]: id ⇒ companion;conjoint`.
pub fn framing_unit<C: DoubleCategory>(c: &C, u: &C::Ver) -> Result<Cell<C>> {
    let fr = c.framing(u)?;
    let x = c.ver_src(u);
    paste_to(
        c,
        &[vec![
            Cell::new(fr.delta, HorExpr::id(&x), atom(&fr.companion)),
            Cell::new(fr.gamma, HorExpr::id(&x), atom(&fr.conjoint)),
        ]],
        HorExpr::id(&x),
        comp(&fr.companion, &fr.conjoint),
    )
}

/// `ε_u = [β_u | α_u]: conjoint;companion ⇒ id`.
pub fn framing_counit<C: DoubleCategory>(c: &C, u: &C::Ver) -> Result<Cell<C>> {
    let fr = c.framing(u)?;
    let x2 = c.ver_tgt(u);
    paste_to(
        c,
        &[vec![
            Cell::new(fr.beta, atom(&fr.conjoint), HorExpr::id(&x2)),
            Cell::new(fr.alpha, atom(&fr.companion), HorExpr::id(&x2)),
        ]],
        comp(&fr.conjoint, &fr.companion),
        HorExpr::id(&x2),
    )
}

/// The equalities binding a companion and conjoint to `u`, followed by
/// the two triangle identities for `η_u` and `ε_u`.
pub fn framing_equations<C: DoubleCategory>(c: &C, u: &C::Ver) -> Result<Vec<Equation<C>>> {
    let fr = c.framing(u)?;
    let (x, x2) = (c.ver_src(u), c.ver_tgt(u));
    let a = Cell::new(fr.alpha.clone(), atom(&fr.companion), HorExpr::id(&x2));
    let b = Cell::new(fr.beta.clone(), atom(&fr.conjoint), HorExpr::id(&x2));
    let g = Cell::new(fr.gamma.clone(), HorExpr::id(&x), atom(&fr.conjoint));
    let d = Cell::new(fr.delta.clone(), HorExpr::id(&x), atom(&fr.companion));
    let id_u = Cell::id_ver(c, u);
    let eta = framing_unit(c, u)?;
    let eps = framing_counit(c, u)?;
    Ok(vec![
        Equation::new("delta over alpha", paste(c, &[vec![d.clone()], vec![a.clone()]]), Ok(id_u.clone())),
        Equation::new("gamma over beta", paste(c, &[vec![g.clone()], vec![b.clone()]]), Ok(id_u)),
        Equation::new(
            "delta alpha equals gamma beta",
            paste(c, &[vec![d.clone()], vec![a.clone()]]),
            paste(c, &[vec![g.clone()], vec![b.clone()]]),
        ),
        Equation::new("delta beside alpha", paste(c, &[vec![d, a]]), Ok(Cell::id(c, &fr.companion))),
        Equation::new("beta beside gamma", paste(c, &[vec![b, g]]), Ok(Cell::id(c, &fr.conjoint))),
        Equation::new(
            "conjoint triangle",
            paste(
                c,
                &[
                    vec![Cell::id(c, &fr.conjoint), eta.clone()],
                    vec![eps.clone(), Cell::id(c, &fr.conjoint)],
                ],
            ),
            Ok(Cell::id(c, &fr.conjoint)),
        ),
        Equation::new(
            "companion triangle",
            paste(
                c,
                &[
                    vec![eta, Cell::id(c, &fr.companion)],
                    vec![Cell::id(c, &fr.companion), eps],
                ],
            ),
            Ok(Cell::id(c, &fr.companion)),
        ),
    ])
}

/// Base change of a monad: the endomorphism `companion;P';conjoint` with
/// multiplication through `ε_u` and unit through `η_u`, and the lift as a
/// vertical monad map.
pub fn base_change_monad<C: DoubleCategory>(c: &C, u: &C::Ver, target: &MonadData<C>) -> Result<VertMonadMap<C>> {
    let lift = base_change_endo(c, u, &target.endo)?;
    let fr = c.framing(u)?;
    let x = c.ver_src(u);
    let p2 = &target.endo.arrow;
    let atoms = [fr.companion.clone(), p2.clone(), fr.conjoint.clone()];
    let chain: HorExpr<C> = HorExpr::chain(&atoms);
    let (idc, idp, idj) = (Cell::id(c, &fr.companion), Cell::id(c, p2), Cell::id(c, &fr.conjoint));
    let mult = paste_to(
        c,
        &[
            vec![idc.clone(), idp.clone(), framing_counit(c, u)?, idp, idj.clone()],
            vec![idc.clone(), mult_cell(target), idj.clone()],
        ],
        HorExpr::comp(chain.clone(), chain.clone()),
        chain.clone(),
    )?;
    let unit = paste_to(
        c,
        &[vec![framing_unit(c, u)?], vec![idc, unit_cell(target), idj]],
        HorExpr::id(&x),
        chain,
    )?;
    let monad = MonadData {
        endo: lift.src.clone(),
        mult: mult.sq,
        unit: unit.sq,
    };
    VertMap::new(c, monad, target.clone(), u.clone(), lift.sq)
}

/// All `v̄: R ⇒ P` over `v` with `v̄` above the lift equal to `w̄`.
pub fn factorizations_through<C: DoubleCategory>(
    c: &C,
    lift: &VertEndoMap<C>,
    r: &Endo<C>,
    v: &C::Ver,
    wbar: &C::Sq,
    limit: usize,
) -> Result<Vec<C::Sq>> {
    let mut out = Vec::new();
    for s in c.squares_with_boundary(&r.arrow, &lift.src.arrow, v, v, limit)? {
        if c.sq_vcomp(&s, &lift.sq).ok().as_ref() == Some(wbar) {
            out.push(s);
        }
    }
    Ok(out)
}

/// The horizontal map `(conjoint u, φ_u): (X',P') → (X,P)` corresponding to
/// a vertical map `(u, ū): (X,P) → (X',P')`, with `φ_u = [β_u | ū | γ_u]`.
pub fn cofold<C: DoubleCategory, O: EndoObject<C>>(c: &C, m: &VertMap<C, O>) -> Result<HorMap<C, O>> {
    let fr = c.framing(&m.arrow)?;
    let (x, x2) = (c.ver_src(&m.arrow), c.ver_tgt(&m.arrow));
    let (p, p2) = (&m.src.endo().arrow, &m.tgt.endo().arrow);
    let row = vec![
        Cell::new(fr.beta, atom(&fr.conjoint), HorExpr::id(&x2)),
        Cell::plain(c, &m.sq),
        Cell::new(fr.gamma, HorExpr::id(&x), atom(&fr.conjoint)),
    ];
    let phi = paste_to(c, &[row], comp(&fr.conjoint, p), comp(p2, &fr.conjoint))?;
    HorMap::new(c, m.tgt.clone(), m.src.clone(), fr.conjoint, phi.sq)
}

/// Inverse of [`cofold`]: `ū_φ = [γ_u | id] ; φ ; [id | β_u]`.
pub fn uncofold<C: DoubleCategory, O: EndoObject<C>>(c: &C, h: &HorMap<C, O>) -> Result<VertMap<C, O>> {
    let u = c
        .conjoint_base(&h.arrow)?
        .ok_or_else(|| invalid("horizontal part is not a conjoint"))?;
    let fr = c.framing(&u)?;
    let (x, x2) = (c.ver_src(&u), c.ver_tgt(&u));
    let (p2, p) = (&h.src.endo().arrow, &h.tgt.endo().arrow);
    let rows = [
        vec![Cell::new(fr.gamma, HorExpr::id(&x), atom(&fr.conjoint)), Cell::id(c, p)],
        vec![phi_cell(&fr.conjoint, p, p2, &h.phi)],
        vec![Cell::id(c, p2), Cell::new(fr.beta, atom(&fr.conjoint), HorExpr::id(&x2))],
    ];
    let sq = paste_to(c, &rows, atom(p), atom(p2))?;
    VertMap::new(c, h.tgt.clone(), h.src.clone(), u, sq.sq)
}

/// The free monad on an endomorphism with the data of its universal
/// properties.
#[derive(Clone, Debug, PartialEq)]
pub struct FreeMonadBundle<C: DoubleCategory> {
    pub free: FreeMonad<C>,
}

/// Builds the bundle, checking that the instance has every capability the
/// construction uses and that the free monad is exact.
pub fn free_monad_adjunction<C: DoubleCategory>(c: &C, e: &Endo<C>, bound: usize) -> Result<FreeMonadBundle<C>> {
    let p = &e.arrow;
    c.framing(&c.ver_id(&e.obj))?;
    c.local_coproduct(p, p)?;
    let idp = c.sq_ver_id(p);
    c.equalizer(&idp, &idp)?;
    let free = c.free_monad(p, bound)?;
    if !free.exact {
        return Err(Error::Truncated(format!("free monad cut off at {bound}")));
    }
    Ok(FreeMonadBundle { free })
}

impl<C: DoubleCategory> FreeMonadBundle<C> {
    pub fn base(&self) -> &Endo<C> {
        &self.free.base
    }

    pub fn monad(&self) -> &MonadData<C> {
        &self.free.monad
    }

    /// `(1_X, ι_P): (X,P) → (X,P*)`.
    pub fn unit_map(&self, c: &C) -> VertEndoMap<C> {
        VertMap {
            src: self.free.base.clone(),
            tgt: self.free.monad.endo.clone(),
            arrow: c.ver_id(&self.free.base.obj),
            sq: self.free.iota.clone(),
        }
    }

    /// `ν: P*;P ⇒ P*`, the composite of `ι` on the last factor with `μ`.
    pub fn nu(&self, c: &C) -> Result<Cell<C>> {
        let (p, star) = (&self.free.base.arrow, &self.free.monad.endo.arrow);
        paste_to(
            c,
            &[
                vec![Cell::id(c, star), Cell::new(self.free.iota.clone(), atom(p), atom(star))],
                vec![mult_cell(&self.free.monad)],
            ],
            comp(star, p),
            atom(star),
        )
    }

    /// The vertical monad map `(u, ū♯): (X,P*) → (X',P')` through which a
    /// vertical map `(u, ū)` into a monad factors, obtained by cofolding,
    /// lifting along the free monad and unfolding.
    pub fn vertical_sharp(&self, c: &C, m: &VertEndoMap<C>, target: &MonadData<C>) -> Result<VertMonadMap<C>> {
        if m.src != self.free.base || m.tgt != target.endo {
            return Err(boundary("vertical map does not run from the base into the target monad"));
        }
        let h = cofold(c, m)?;
        let lifted = c.sharp(&self.free, target, &h.arrow, &h.phi)?;
        let h2 = HorMap::new(c, target.clone(), self.free.monad.clone(), h.arrow, lifted)?;
        uncofold(c, &h2)
    }

    /// Candidate vertical monad maps `(u, s)` with `ι_P` above `s` equal to
    /// `ū`, found by exhaustive search.
    pub fn vertical_factorizations(&self, c: &C, m: &VertEndoMap<C>, target: &MonadData<C>, limit: usize) -> Result<Vec<VertMonadMap<C>>> {
        let star = &self.free.monad.endo.arrow;
        let mut out = Vec::new();
        for s in c.lifts_through(&self.free.iota, &m.sq, &target.endo.arrow, &m.arrow, &m.arrow, limit)? {
            let cand = VertMap::new(c, self.free.monad.clone(), target.clone(), m.arrow.clone(), s)?;
            if c.sq_top(&cand.sq) == *star && all_hold(c, &cand.equations(c)) {
                out.push(cand);
            }
        }
        Ok(out)
    }
}

/// `(F, φ*): (X,P*) → (Y,Q*)` for `(F, φ): (X,P) → (Y,Q)`: the lift of
/// `[φ] ; [ι_P | id_F]` along the free monad on `Q`.
pub fn hor_star<C: DoubleCategory>(
    c: &C,
    src: &FreeMonadBundle<C>,
    tgt: &FreeMonadBundle<C>,
    h: &HorEndoMap<C>,
) -> Result<HorMonadMap<C>> {
    if h.src != src.free.base || h.tgt != tgt.free.base {
        return Err(boundary("horizontal map does not run between the free monads' bases"));
    }
    let (f, p, q) = (&h.arrow, &src.free.base.arrow, &tgt.free.base.arrow);
    let pstar = &src.free.monad.endo.arrow;
    let psi = paste_to(
        c,
        &[
            vec![phi_cell(f, q, p, &h.phi)],
            vec![Cell::new(src.free.iota.clone(), atom(p), atom(pstar)), Cell::id(c, f)],
        ],
        comp(f, q),
        comp(pstar, f),
    )?;
    let phistar = c.sharp(&tgt.free, &src.free.monad, f, &psi.sq)?;
    HorMap::new(c, src.free.monad.clone(), tgt.free.monad.clone(), f.clone(), phistar)
}

/// `ι_(F,φ)`: the identity square on `F`, as an endomorphism square from
/// `(F, φ)` to `(F, φ*)` over the two unit maps.
pub fn iota_square<C: DoubleCategory>(
    c: &C,
    src: &FreeMonadBundle<C>,
    tgt: &FreeMonadBundle<C>,
    h: &HorEndoMap<C>,
    hstar: &HorMonadMap<C>,
) -> Result<EndoSquare<C>> {
    EndoSq::new(c, h.clone(), forget_hor(hstar), src.unit_map(c), tgt.unit_map(c), c.sq_ver_id(&h.arrow))
}

/// `α♯ = α`, as a monad square from `(F, φ*)` to `(F', φ')` over the
/// vertical lifts of its sides.
pub fn general_sharp<C: DoubleCategory>(
    c: &C,
    src: &FreeMonadBundle<C>,
    tgt: &FreeMonadBundle<C>,
    alpha: &EndoSquare<C>,
    bottom: &HorMonadMap<C>,
) -> Result<MonadSquare<C>> {
    if forget_hor(bottom) != alpha.bottom {
        return Err(boundary("bottom monad map does not match the square"));
    }
    let top = hor_star(c, src, tgt, &alpha.top)?;
    let left = src.vertical_sharp(c, &alpha.left, &bottom.src)?;
    let right = tgt.vertical_sharp(c, &alpha.right, &bottom.tgt)?;
    EndoSq::new(c, top, bottom.clone(), left, right, alpha.sq.clone())
}

/// The equalizer `θ: E ⇒ F;Q*` of the two sides of the compatibility
/// condition for `α♯`, with the algebra structure `(λ, ρ)` on `E`.
pub struct EqualizerWitness<C: DoubleCategory> {
    pub e: C::Hor,
    pub theta: C::Sq,
    /// `E` equalizes the two sides.
    pub equalizes: Equation<C>,
    /// `[id_F | η_Q*]` equalizes the two sides.
    pub unit_case: Equation<C>,
    /// `[θ | id_Q] ; [id_F | ν]` equalizes the two sides.
    pub step_case: Equation<C>,
    pub lambda: Option<C::Sq>,
    pub rho: Option<C::Sq>,
    /// The copair `(λ, ρ): F + E;Q ⇒ E`.
    pub algebra: Option<C::Sq>,
    pub theta_inverse: Option<C::Sq>,
}

/// The two sides `[φ*] ; [ū♯ | α]` and `[α | v̄♯] ; [φ']` of the
/// compatibility condition for a monad square, as cells out of `F;Q*`.
pub fn compatibility_sides<C: DoubleCategory>(c: &C, s: &MonadSquare<C>) -> (Result<Cell<C>>, Result<Cell<C>>) {
    let (f, f2) = (&s.top.arrow, &s.bottom.arrow);
    let (p, q) = (&s.top.src.endo.arrow, &s.top.tgt.endo.arrow);
    let (p2, q2) = (&s.bottom.src.endo.arrow, &s.bottom.tgt.endo.arrow);
    let a = Cell::plain(c, &s.sq);
    let lhs = paste(c, &[vec![phi_cell(f, q, p, &s.top.phi)], vec![Cell::plain(c, &s.left.sq), a.clone()]]);
    let rhs = paste(c, &[vec![a, Cell::plain(c, &s.right.sq)], vec![phi_cell(f2, q2, p2, &s.bottom.phi)]]);
    (lhs, rhs)
}

/// Runs the equalizer argument for a monad square whose top is `(F, φ*)`.
pub fn equalizer_witness<C: DoubleCategory>(
    c: &C,
    s: &MonadSquare<C>,
    tgt: &FreeMonadBundle<C>,
) -> Result<EqualizerWitness<C>> {
    let f = &s.top.arrow;
    let qstar = &s.top.tgt.endo.arrow;
    let q = &tgt.free.base.arrow;
    if *qstar != tgt.free.monad.endo.arrow {
        return Err(boundary("square does not start from the free monad"));
    }
    let (a, b) = compatibility_sides(c, s);
    let (a, b) = (a?, b?);
    let (e, theta) = c.equalizer(&a.sq, &b.sq)?;
    let fq = comp(f, qstar);
    let theta_cell = Cell::new(theta.clone(), atom(&e), fq.clone());
    let side = |first: Vec<Vec<Cell<C>>>, rest: &Cell<C>| {
        let mut rows = first;
        rows.push(vec![rest.clone()]);
        paste(c, &rows)
    };
    let a_cell = Cell::new(a.sq.clone(), fq.clone(), a.bottom.clone());
    let b_cell = Cell::new(b.sq.clone(), fq.clone(), b.bottom.clone());
    let equalizes = Equation::new(
        "equalizer commutes",
        side(vec![vec![theta_cell.clone()]], &a_cell),
        side(vec![vec![theta_cell.clone()]], &b_cell),
    );
    let eta_rows = vec![vec![Cell::id(c, f), unit_cell(&tgt.free.monad)]];
    let unit_case = Equation::new(
        "unit equalizes",
        side(eta_rows.clone(), &a_cell),
        side(eta_rows.clone(), &b_cell),
    );
    let nu = tgt.nu(c)?;
    let step_rows = vec![vec![theta_cell.clone(), Cell::id(c, q)], vec![Cell::id(c, f), nu]];
    let step_case = Equation::new(
        "step equalizes",
        side(step_rows.clone(), &a_cell),
        side(step_rows.clone(), &b_cell),
    );
    let eta_f = paste_to(c, &eta_rows, atom(f), fq.clone())?;
    let lambda = c.factor_through_equalizer(&theta, &eta_f.sq).ok();
    let step = paste_to(c, &step_rows, comp(&e, q), fq)?;
    let rho = c.factor_through_equalizer(&theta, &step.sq).ok();
    let algebra = match (&lambda, &rho) {
        (Some(l), Some(r)) => {
            let sum = c.local_coproduct(f, &c.hor_comp(&e, q)?)?;
            c.copair(&sum, l, r).ok()
        }
        _ => None,
    };
    let theta_inverse = c.invert_globular(&theta).ok();
    Ok(EqualizerWitness {
        e,
        theta,
        equalizes,
        unit_case,
        step_case,
        lambda,
        rho,
        algebra,
        theta_inverse,
    })
}

/// Every equation used in showing that `α♯` is a monad square, evaluated
/// on concrete cells, together with the equalizer argument.
pub struct PipelineRun<C: DoubleCategory> {
    pub equations: Vec<Equation<C>>,
    pub sharp: MonadSquare<C>,
    pub witness: EqualizerWitness<C>,
}

fn transpose_equations<C: DoubleCategory>(
    c: &C,
    side: &str,
    bundle: &FreeMonadBundle<C>,
    base: &VertEndoMap<C>,
    sharp: &VertMonadMap<C>,
) -> Result<Vec<Equation<C>>> {
    let s = Cell::plain(c, &sharp.sq);
    let target = &sharp.tgt;
    Ok(vec![
        Equation::new(
            format!("{side} sharp preserves unit"),
            paste(c, &[vec![unit_cell(bundle.monad())], vec![s.clone()]]),
            paste(c, &[vec![Cell::id_ver(c, &sharp.arrow)], vec![unit_cell(target)]]),
        ),
        Equation::new(
            format!("{side} sharp preserves nu"),
            paste(c, &[vec![bundle.nu(c)?], vec![s.clone()]]),
            paste(c, &[vec![s, Cell::plain(c, &base.sq)], vec![mult_cell(target)]]),
        ),
    ])
}

/// Builds `α♯` for an endomorphism square `α` whose bottom is a monad map
/// and evaluates both sides of each step of the argument.
pub fn theorem_pipeline<C: DoubleCategory>(
    c: &C,
    src: &FreeMonadBundle<C>,
    tgt: &FreeMonadBundle<C>,
    alpha: &EndoSquare<C>,
    bottom: &HorMonadMap<C>,
) -> Result<PipelineRun<C>> {
    let sharp = general_sharp(c, src, tgt, alpha, bottom)?;
    let h = &alpha.top;
    let (f, p, q) = (&h.arrow, &src.base().arrow, &tgt.base().arrow);
    let (pstar, qstar) = (&src.monad().endo.arrow, &tgt.monad().endo.arrow);
    let phi = phi_cell(f, q, p, &h.phi);
    let phistar = phi_cell(f, qstar, pstar, &sharp.top.phi);
    let iota_p = Cell::new(src.free.iota.clone(), atom(p), atom(pstar));
    let iota_q = Cell::new(tgt.free.iota.clone(), atom(q), atom(qstar));
    let idf = Cell::id(c, f);
    let mut eqs = transpose_equations(c, "left", src, &alpha.left, &sharp.left)?;
    eqs.extend(transpose_equations(c, "right", tgt, &alpha.right, &sharp.right)?);
    eqs.push(Equation::new(
        "phi star restricts to phi",
        paste(c, &[vec![phi.clone()], vec![iota_p, idf.clone()]]),
        paste(c, &[vec![idf.clone(), iota_q], vec![phistar.clone()]]),
    ));
    eqs.push(Equation::new(
        "phi star preserves unit",
        paste(c, &[vec![idf.clone(), unit_cell(tgt.monad())], vec![phistar.clone()]]),
        paste(c, &[vec![unit_cell(src.monad()), idf.clone()]]),
    ));
    eqs.push(Equation::new(
        "phi star preserves nu",
        paste(c, &[vec![idf.clone(), tgt.nu(c)?], vec![phistar.clone()]]),
        paste(
            c,
            &[
                vec![phistar, Cell::id(c, q)],
                vec![Cell::id(c, pstar), phi],
                vec![src.nu(c)?, idf],
            ],
        ),
    ));
    let hstar = sharp.top.clone();
    let mut iota = iota_square(c, src, tgt, h, &hstar)?.equation(c);
    iota.name = "iota square compatibility".into();
    eqs.push(iota);
    let mut hyp = alpha.equation(c);
    hyp.name = "alpha compatibility".into();
    eqs.push(hyp);
    let mut fin = sharp.equation(c);
    fin.name = "alpha sharp compatibility".into();
    eqs.push(fin);
    let witness = equalizer_witness(c, &sharp, tgt)?;
    Ok(PipelineRun {
        equations: eqs,
        sharp,
        witness,
    })
}

/// Whether `theta_inverse` is a two-sided inverse of `theta`.
pub fn is_inverse<C: DoubleCategory>(c: &C, theta: &C::Sq, inverse: &C::Sq) -> bool {
    let there = c.sq_vcomp(theta, inverse).ok();
    let back = c.sq_vcomp(inverse, theta).ok();
    there == Some(c.sq_ver_id(&c.sq_top(theta))) && back == Some(c.sq_ver_id(&c.sq_bottom(theta)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finset::{all_functions, FinFun, FinSet};
    use crate::poly::{free_poly_monad, parse_poly, poly_instance, PolyDouble};
    use crate::span::{enumerate_categories, free_category, span_instance, Graph, SpanDouble};

    fn chain() -> Graph {
        Graph::from_edges(&["a", "b", "c"], &[("f", "a", "b"), ("g", "b", "c")]).unwrap()
    }

    fn holds<C: DoubleCategory>(c: &C, eqs: &[Equation<C>]) {
        for e in eqs {
            assert_eq!(e.verdict(c), Verdict::Holds, "{}\n{}", e.name, e.render(c));
        }
    }

    // Two-element monoid {e, t} with t·t = t.
    fn idempotent() -> MonadData<SpanDouble> {
        let one = FinSet::from_names(&["x"]).unwrap();
        enumerate_categories(&one, 2)
            .unwrap()
            .into_iter()
            .filter(|c| c.morphisms().len() == 2)
            .find(|c| {
                let e = c.identity(one.elem(0)).unwrap().clone();
                let t = c.morphisms().iter().find(|m| **m != e).unwrap().clone();
                c.compose(&t, &t) == Some(&t)
            })
            .unwrap()
            .to_monad()
    }

    fn graph_morphisms(g: &Graph, h: &Graph) -> usize {
        let mut n = 0;
        for on_nodes in all_functions(&g.nodes, &h.nodes) {
            for on_edges in all_functions(g.edges.apex(), h.edges.apex()) {
                let ok = (0..g.edges.apex().len()).all(|e| {
                    let i = on_edges.at(e);
                    on_nodes.at(g.edge_src(e)) == h.edge_src(i) && on_nodes.at(g.edge_tgt(e)) == h.edge_tgt(i)
                });
                n += ok as usize;
            }
        }
        n
    }

    #[test]
    fn free_category_is_a_monad() {
        let c = span_instance();
        let fc = free_category(&chain(), 4).unwrap();
        holds(&c, &monad_law_equations(&c, &fc.cat.to_monad()));
    }

    #[test]
    fn vertical_endo_maps_are_graph_morphisms() {
        let c = span_instance();
        let g = chain();
        let h = Graph::from_edges(&["p", "q"], &[("k", "p", "q"), ("l", "q", "q"), ("m", "p", "q")]).unwrap();
        let mut n = 0;
        for u in all_functions(&g.nodes, &h.nodes) {
            n += c.squares_with_boundary(&g.edges, &h.edges, &u, &u, ENUMERATION_LIMIT).unwrap().len();
        }
        assert_eq!(n, graph_morphisms(&g, &h));
        assert!(n > 0);
    }

    #[test]
    fn framing_identities() {
        let c = span_instance();
        let x = FinSet::from_names(&["a", "b", "c"]).unwrap();
        let y = FinSet::from_names(&["p", "q"]).unwrap();
        for u in all_functions(&x, &y) {
            holds(&c, &framing_equations(&c, &u).unwrap());
        }
    }

    #[test]
    fn base_change_of_a_monad() {
        let c = span_instance();
        let m = idempotent();
        let x = FinSet::from_names(&["a", "b"]).unwrap();
        let u = FinFun::new(x, m.endo.obj.clone(), vec![0, 0]).unwrap();
        let lift = base_change_monad(&c, &u, &m).unwrap();
        holds(&c, &lift.src.own_equations(&c));
        holds(&c, &lift.equations(&c));
        // the endomorphism lift is the monad lift with structure forgotten
        assert_eq!(base_change_endo(&c, &u, &m.endo).unwrap(), forget_ver(&lift));
        // each square into the lift along the identity factors uniquely
        let fs = factorizations_through(&c, &forget_ver(&lift), &lift.src.endo, &c.ver_id(&lift.src.endo.obj), &lift.sq, ENUMERATION_LIMIT).unwrap();
        assert_eq!(fs, vec![c.sq_ver_id(&lift.src.endo.arrow)]);
    }

    #[test]
    fn cofold_round_trip() {
        let c = span_instance();
        let m = idempotent();
        let g = chain();
        let e = Endo { obj: g.nodes.clone(), arrow: g.edges.clone() };
        let u = FinFun::new(g.nodes.clone(), m.endo.obj.clone(), vec![0; 3]).unwrap();
        for sq in c.squares_with_boundary(&g.edges, &m.endo.arrow, &u, &u, 64).unwrap() {
            let v = VertMap::new(&c, e.clone(), m.endo.clone(), u.clone(), sq).unwrap();
            let h = cofold(&c, &v).unwrap();
            assert_eq!(uncofold(&c, &h).unwrap(), v);
        }
    }

    #[test]
    fn vertical_sharp_is_the_unique_factorization() {
        let c = span_instance();
        let m = idempotent();
        let g = chain();
        let e = Endo { obj: g.nodes.clone(), arrow: g.edges.clone() };
        let bundle = free_monad_adjunction(&c, &e, 4).unwrap();
        let u = FinFun::new(g.nodes.clone(), m.endo.obj.clone(), vec![0; 3]).unwrap();
        let sqs = c.squares_with_boundary(&g.edges, &m.endo.arrow, &u, &u, 64).unwrap();
        assert_eq!(sqs.len(), 4);
        for sq in sqs {
            let v = VertMap::new(&c, e.clone(), m.endo.clone(), u.clone(), sq).unwrap();
            let sharp = bundle.vertical_sharp(&c, &v, &m).unwrap();
            holds(&c, &sharp.equations(&c));
            let above = c.sq_vcomp(&bundle.free.iota, &sharp.sq).unwrap();
            assert_eq!(above, v.sq);
            assert_eq!(bundle.vertical_factorizations(&c, &v, &m, ENUMERATION_LIMIT).unwrap(), vec![sharp]);
        }
    }

    #[test]
    fn truncated_free_monad_is_rejected() {
        let c = span_instance();
        let g = Graph::from_edges(&["x"], &[("e", "x", "x")]).unwrap();
        let e = Endo { obj: g.nodes.clone(), arrow: g.edges.clone() };
        assert!(matches!(free_monad_adjunction(&c, &e, 3), Err(Error::Truncated(_))));
        let free = c.free_monad(&g.edges, 3).unwrap();
        let eqs = monad_law_equations(&c, &free.monad);
        assert!(!eqs[0].verdict(&c).holds());
    }

    fn identity_square_pipeline<C: DoubleCategory>(c: &C, e: &Endo<C>, target: &MonadData<C>, u: &C::Ver, ubar: &C::Sq) {
        let end = build_end(c.clone());
        let mnd = build_mnd(c.clone());
        let bundle = free_monad_adjunction(c, e, 4).unwrap();
        let h = end.hor_id(e);
        let hstar = hor_star(c, &bundle, &bundle, &h).unwrap();
        holds(c, &hstar.equations(c));
        let iota = iota_square(c, &bundle, &bundle, &h, &hstar).unwrap();
        holds(c, &[iota.equation(c)]);
        let v = VertMap::new(c, e.clone(), target.endo.clone(), u.clone(), ubar.clone()).unwrap();
        let alpha = end.sq_hor_id(&v);
        holds(c, &[alpha.equation(c)]);
        let bottom = mnd.hor_id(target);
        holds(c, &bottom.equations(c));
        let sharp = general_sharp(c, &bundle, &bundle, &alpha, &bottom).unwrap();
        holds(c, &[sharp.equation(c)]);
        let run = theorem_pipeline(c, &bundle, &bundle, &alpha, &bottom).unwrap();
        assert_eq!(run.sharp, sharp);
        holds(c, &run.equations);
        let w = run.witness;
        holds(c, &[w.equalizes, w.unit_case, w.step_case]);
        assert!(w.lambda.is_some() && w.rho.is_some() && w.algebra.is_some());
        assert!(is_inverse(c, &w.theta, w.theta_inverse.as_ref().unwrap()));
    }

    #[test]
    fn span_pipeline() {
        let c = span_instance();
        let m = idempotent();
        let g = chain();
        let e = Endo { obj: g.nodes.clone(), arrow: g.edges.clone() };
        let u = FinFun::new(g.nodes.clone(), m.endo.obj.clone(), vec![0; 3]).unwrap();
        let sq = c.squares_with_boundary(&g.edges, &m.endo.arrow, &u, &u, 64).unwrap().pop().unwrap();
        identity_square_pipeline(&c, &e, &m, &u, &sq);
    }

    #[test]
    fn poly_pipeline() {
        let c: PolyDouble = poly_instance();
        let q = parse_poly("poly\nbase: y\nop c : -> y\n").unwrap();
        let e = Endo { obj: q.src().clone(), arrow: q.clone() };
        let target = free_poly_monad(&q, 1).unwrap();
        holds(&c, &monad_law_equations(&c, &target.monad));
        let u = c.ver_id(&e.obj);
        identity_square_pipeline(&c, &e, &target.monad, &u, &target.iota);
    }
}
