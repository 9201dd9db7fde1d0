//! Pseudo double categories, rectangular pasting and coherence.
//!
//! [`DoubleCategory`] is the seam between the generic theory (endomorphisms,
//! monads, the law checker) and the concrete instances. Horizontal
//! composition is written diagrammatically: `hor_comp(f, g)` is `f` followed
//! by `g`. Horizontal composition is only associative and unital up to the
//! coherence squares each instance supplies, so every pasting goes through
//! [`paste`], which inserts those squares where bracketings differ.

use std::fmt::Debug;

use crate::error::{Error, Result};

/// Companion, conjoint and the four binding squares of a vertical arrow
/// `u: X → X'`.
///
/// * `alpha`: top companion, bottom `id X'`, left `u`, right `id`.
/// * `beta`: top conjoint, bottom `id X'`, left `id`, right `u`.
/// * `gamma`: top `id X`, bottom conjoint, left `u`, right `id`.
/// * `delta`: top `id X`, bottom companion, left `id`, right `u`.
#[derive(Clone, Debug, PartialEq)]
pub struct Framing<C: DoubleCategory> {
    pub arrow: C::Ver,
    pub companion: C::Hor,
    pub conjoint: C::Hor,
    pub alpha: C::Sq,
    pub beta: C::Sq,
    pub gamma: C::Sq,
    pub delta: C::Sq,
}

/// Coproduct of two parallel horizontal arrows in a hom-category.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalCoproduct<C: DoubleCategory> {
    pub sum: C::Hor,
    pub inl: C::Sq,
    pub inr: C::Sq,
}

/// A horizontal endomorphism `(X, P)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Endo<C: DoubleCategory> {
    pub obj: C::Obj,
    pub arrow: C::Hor,
}

/// An endomorphism with globular multiplication `P;P ⇒ P` and unit
/// `id ⇒ P`. The laws are not enforced by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct MonadData<C: DoubleCategory> {
    pub endo: Endo<C>,
    pub mult: C::Sq,
    pub unit: C::Sq,
}

/// The free monad on an endomorphism in the horizontal 2-category.
///
/// `iota` is the globular square `P ⇒ P*`. When `exact` is false the
/// construction was cut off at `bound` and the multiplication is partial.
#[derive(Clone, Debug, PartialEq)]
pub struct FreeMonad<C: DoubleCategory> {
    pub base: Endo<C>,
    pub monad: MonadData<C>,
    pub iota: C::Sq,
    pub exact: bool,
    pub bound: usize,
}

fn missing<T>(name: String, capability: &'static str) -> Result<T> {
    Err(Error::MissingCapability {
        instance: name,
        capability,
    })
}

/// A pseudo double category with explicit coherence squares.
///
/// Squares are written with `top: F`, `bottom: G`, `left: u`, `right: v`
/// for `F: X → Y`, `G: X' → Y'`, `u: X → X'`, `v: Y → Y'`.
pub trait DoubleCategory: Clone + Debug + PartialEq {
    type Obj: Clone + PartialEq + Debug;
    type Hor: Clone + PartialEq + Debug;
    type Ver: Clone + PartialEq + Debug;
    type Sq: Clone + PartialEq + Debug;

    fn name(&self) -> String;

    fn hor_src(&self, f: &Self::Hor) -> Self::Obj;
    fn hor_tgt(&self, f: &Self::Hor) -> Self::Obj;
    fn hor_id(&self, x: &Self::Obj) -> Self::Hor;
    /// `f` followed by `g`.
    fn hor_comp(&self, f: &Self::Hor, g: &Self::Hor) -> Result<Self::Hor>;

    fn ver_src(&self, u: &Self::Ver) -> Self::Obj;
    fn ver_tgt(&self, u: &Self::Ver) -> Self::Obj;
    fn ver_id(&self, x: &Self::Obj) -> Self::Ver;
    /// `u` followed by `v`.
    fn ver_comp(&self, u: &Self::Ver, v: &Self::Ver) -> Result<Self::Ver>;

    fn sq_top(&self, s: &Self::Sq) -> Self::Hor;
    fn sq_bottom(&self, s: &Self::Sq) -> Self::Hor;
    fn sq_left(&self, s: &Self::Sq) -> Self::Ver;
    fn sq_right(&self, s: &Self::Sq) -> Self::Ver;

    /// The identity square on a vertical arrow: horizontal identities on
    /// top and bottom, `u` on both sides.
    fn sq_hor_id(&self, u: &Self::Ver) -> Self::Sq;
    /// The identity square on a horizontal arrow.
    fn sq_ver_id(&self, f: &Self::Hor) -> Self::Sq;
    /// `a` beside `b`, sharing `a`'s right edge with `b`'s left edge.
    fn sq_hcomp(&self, a: &Self::Sq, b: &Self::Sq) -> Result<Self::Sq>;
    /// `a` above `b`.
    fn sq_vcomp(&self, a: &Self::Sq, b: &Self::Sq) -> Result<Self::Sq>;

    /// `(f;g);h ⇒ f;(g;h)`.
    fn associator(&self, f: &Self::Hor, g: &Self::Hor, h: &Self::Hor) -> Result<Self::Sq>;
    /// `id;f ⇒ f`.
    fn left_unitor(&self, f: &Self::Hor) -> Self::Sq;
    /// `f;id ⇒ f`.
    fn right_unitor(&self, f: &Self::Hor) -> Self::Sq;
    /// Inverse of an invertible globular square.
    fn invert_globular(&self, s: &Self::Sq) -> Result<Self::Sq>;

    /// Checks the internal invariants of a square.
    fn validate_square(&self, s: &Self::Sq) -> Result<()>;

    /// All squares with the given boundary, refusing to list more than
    /// `limit` of them.
    fn squares_with_boundary(
        &self,
        _top: &Self::Hor,
        _bottom: &Self::Hor,
        _left: &Self::Ver,
        _right: &Self::Ver,
        _limit: usize,
    ) -> Result<Vec<Self::Sq>> {
        missing(self.name(), "enumeration")
    }

    /// All squares `s` with top `lower.bottom` and the given remaining
    /// boundary such that `lower` above `s` equals `target`.
    fn lifts_through(
        &self,
        lower: &Self::Sq,
        target: &Self::Sq,
        bottom: &Self::Hor,
        left: &Self::Ver,
        right: &Self::Ver,
        limit: usize,
    ) -> Result<Vec<Self::Sq>> {
        let top = self.sq_bottom(lower);
        let mut out = Vec::new();
        for s in self.squares_with_boundary(&top, bottom, left, right, limit)? {
            if self.sq_vcomp(lower, &s).ok().as_ref() == Some(target) {
                out.push(s);
            }
        }
        Ok(out)
    }

    /// Invertible globular squares `f ⇒ g`.
    fn hor_isos(&self, f: &Self::Hor, g: &Self::Hor, limit: usize) -> Result<Vec<Self::Sq>> {
        let x = self.ver_id(&self.hor_src(f));
        let y = self.ver_id(&self.hor_tgt(f));
        Ok(self
            .squares_with_boundary(f, g, &x, &y, limit)?
            .into_iter()
            .filter(|s| self.invert_globular(s).is_ok())
            .collect())
    }

    fn render_square(&self, s: &Self::Sq) -> String {
        format!("{s:?}")
    }

    /// A short explanation of why `actual` differs from `expected`.
    fn describe_hor_mismatch(&self, expected: &Self::Hor, actual: &Self::Hor) -> String {
        format!("expected {expected:?}, found {actual:?}")
    }

    fn framing(&self, _u: &Self::Ver) -> Result<Framing<Self>> {
        missing(self.name(), "framed")
    }

    /// If `f` is the conjoint of some vertical arrow, returns that arrow.
    fn conjoint_base(&self, _f: &Self::Hor) -> Result<Option<Self::Ver>> {
        missing(self.name(), "framed")
    }

    fn local_coproduct(&self, _f: &Self::Hor, _g: &Self::Hor) -> Result<LocalCoproduct<Self>> {
        missing(self.name(), "local_coproducts")
    }

    /// The square `sum ⇒ h` restricting to `a` and `b` along the injections.
    fn copair(
        &self,
        _sum: &LocalCoproduct<Self>,
        _a: &Self::Sq,
        _b: &Self::Sq,
    ) -> Result<Self::Sq> {
        missing(self.name(), "local_coproducts")
    }

    /// The free monad on `p`, cut off at `bound` if it does not stabilise.
    fn free_monad(&self, _p: &Self::Hor, _bound: usize) -> Result<FreeMonad<Self>> {
        missing(self.name(), "free_monads")
    }

    /// Given a monad `M` on `A` and a horizontal endomorphism map
    /// `(F, phi)` from `M` to the base of `free`, where `phi: F;Q ⇒ M;F`,
    /// returns the unique `F;Q* ⇒ M;F` making `F` a monad map and
    /// restricting to `phi` along `iota`.
    fn sharp(
        &self,
        _free: &FreeMonad<Self>,
        _monad: &MonadData<Self>,
        _f: &Self::Hor,
        _phi: &Self::Sq,
    ) -> Result<Self::Sq> {
        missing(self.name(), "free_monads")
    }

    /// Equalizer in the category of horizontal arrows and squares of two
    /// parallel squares, returned with its inclusion, which is globular.
    fn equalizer(&self, _a: &Self::Sq, _b: &Self::Sq) -> Result<(Self::Hor, Self::Sq)> {
        missing(self.name(), "equalizers")
    }

    /// Factors a globular square through an equalizer inclusion.
    fn factor_through_equalizer(&self, _incl: &Self::Sq, _s: &Self::Sq) -> Result<Self::Sq> {
        missing(self.name(), "equalizers")
    }

    /// Whether the square is globular.
    fn is_globular(&self, s: &Self::Sq) -> bool {
        let top = self.sq_top(s);
        let bottom = self.sq_bottom(s);
        self.sq_left(s) == self.ver_id(&self.hor_src(&top))
            && self.sq_right(s) == self.ver_id(&self.hor_tgt(&top))
            && self.hor_src(&top) == self.hor_src(&bottom)
            && self.hor_tgt(&top) == self.hor_tgt(&bottom)
    }
}

/// A bracketed composite of horizontal arrows, used to describe the
/// boundary of a cell in a pasting diagram.
#[derive(Clone, Debug, PartialEq)]
pub enum HorExpr<C: DoubleCategory> {
    Atom(C::Hor),
    Id(C::Obj),
    Comp(Box<HorExpr<C>>, Box<HorExpr<C>>),
}

impl<C: DoubleCategory> HorExpr<C> {
    pub fn atom(f: &C::Hor) -> Self {
        HorExpr::Atom(f.clone())
    }

    pub fn id(x: &C::Obj) -> Self {
        HorExpr::Id(x.clone())
    }

    pub fn comp(a: HorExpr<C>, b: HorExpr<C>) -> Self {
        HorExpr::Comp(Box::new(a), Box::new(b))
    }

    /// Left-nested composite of a non-empty list of atoms.
    pub fn chain(atoms: &[C::Hor]) -> Self {
        let mut it = atoms.iter();
        let first = HorExpr::Atom(it.next().expect("non-empty chain").clone());
        it.fold(first, |acc, f| HorExpr::comp(acc, HorExpr::Atom(f.clone())))
    }

    /// The atoms in order, with identities dropped.
    pub fn atoms(&self) -> Vec<C::Hor> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut Vec<C::Hor>) {
        match self {
            HorExpr::Atom(f) => out.push(f.clone()),
            HorExpr::Id(_) => {}
            HorExpr::Comp(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    pub fn src(&self, c: &C) -> C::Obj {
        match self {
            HorExpr::Atom(f) => c.hor_src(f),
            HorExpr::Id(x) => x.clone(),
            HorExpr::Comp(a, _) => a.src(c),
        }
    }

    pub fn tgt(&self, c: &C) -> C::Obj {
        match self {
            HorExpr::Atom(f) => c.hor_tgt(f),
            HorExpr::Id(x) => x.clone(),
            HorExpr::Comp(_, b) => b.tgt(c),
        }
    }

    pub fn eval(&self, c: &C) -> Result<C::Hor> {
        match self {
            HorExpr::Atom(f) => Ok(f.clone()),
            HorExpr::Id(x) => Ok(c.hor_id(x)),
            HorExpr::Comp(a, b) => c.hor_comp(&a.eval(c)?, &b.eval(c)?),
        }
    }

    /// The canonical form: atoms left-nested, identities removed.
    pub fn normal(&self, c: &C) -> HorExpr<C> {
        let atoms = self.atoms();
        if atoms.is_empty() {
            HorExpr::Id(self.src(c))
        } else {
            HorExpr::chain(&atoms)
        }
    }
}

/// A square together with bracketed descriptions of its horizontal
/// boundaries.
#[derive(Clone, Debug, PartialEq)]
pub struct Cell<C: DoubleCategory> {
    pub sq: C::Sq,
    pub top: HorExpr<C>,
    pub bottom: HorExpr<C>,
}

impl<C: DoubleCategory> Cell<C> {
    pub fn new(sq: C::Sq, top: HorExpr<C>, bottom: HorExpr<C>) -> Self {
        Cell { sq, top, bottom }
    }

    /// A cell whose boundaries are single atoms.
    pub fn plain(c: &C, sq: &C::Sq) -> Self {
        Cell {
            top: HorExpr::Atom(c.sq_top(sq)),
            bottom: HorExpr::Atom(c.sq_bottom(sq)),
            sq: sq.clone(),
        }
    }

    /// The vertical identity on `f`.
    pub fn id(c: &C, f: &C::Hor) -> Self {
        Cell::plain(c, &c.sq_ver_id(f))
    }

    /// The horizontal identity on `u`, with identity boundaries.
    pub fn id_ver(c: &C, u: &C::Ver) -> Self {
        Cell {
            sq: c.sq_hor_id(u),
            top: HorExpr::Id(c.ver_src(u)),
            bottom: HorExpr::Id(c.ver_tgt(u)),
        }
    }

    /// The same square with both boundaries read as single atoms.
    pub fn atomize(&self, c: &C) -> Self {
        Cell::plain(c, &self.sq)
    }
}

/// Evaluates a rectangular pasting diagram.
///
/// Each row is composed horizontally left to right; rows are then stacked
/// top to bottom. When the bottom of one row and the top of the next are
/// bracketed differently but have the same atoms, the canonical coherence
/// isomorphism between them is inserted.
pub fn paste<C: DoubleCategory>(c: &C, rows: &[Vec<Cell<C>>]) -> Result<Cell<C>> {
    let mut acc: Option<Cell<C>> = None;
    for (r, row) in rows.iter().enumerate() {
        let row_cell = paste_row(c, r, row)?;
        acc = Some(match acc {
            None => row_cell,
            Some(prev) => stack(c, r, prev, row_cell)?,
        });
    }
    acc.ok_or_else(|| Error::Paste {
        row: 0,
        col: 0,
        detail: "empty grid".into(),
    })
}

fn paste_error(row: usize, col: usize, e: Error) -> Error {
    match e {
        Error::Paste { .. } => e,
        other => Error::Paste {
            row,
            col,
            detail: other.to_string(),
        },
    }
}

fn check_cell<C: DoubleCategory>(c: &C, row: usize, col: usize, cell: &Cell<C>) -> Result<()> {
    for (expr, actual, side) in [
        (&cell.top, c.sq_top(&cell.sq), "top"),
        (&cell.bottom, c.sq_bottom(&cell.sq), "bottom"),
    ] {
        let expected = expr.eval(c).map_err(|e| paste_error(row, col, e))?;
        if expected != actual {
            return Err(Error::Paste {
                row,
                col,
                detail: format!(
                    "{side} boundary does not match its description: {}",
                    c.describe_hor_mismatch(&expected, &actual)
                ),
            });
        }
    }
    Ok(())
}

fn paste_row<C: DoubleCategory>(c: &C, row: usize, cells: &[Cell<C>]) -> Result<Cell<C>> {
    let mut acc: Option<Cell<C>> = None;
    for (col, cell) in cells.iter().enumerate() {
        check_cell(c, row, col, cell)?;
        acc = Some(match acc {
            None => cell.clone(),
            Some(prev) => {
                if c.sq_right(&prev.sq) != c.sq_left(&cell.sq) {
                    return Err(Error::Paste {
                        row,
                        col,
                        detail: "vertical edge does not match the cell to its left".into(),
                    });
                }
                let sq = c
                    .sq_hcomp(&prev.sq, &cell.sq)
                    .map_err(|e| paste_error(row, col, e))?;
                Cell {
                    sq,
                    top: HorExpr::comp(prev.top, cell.top.clone()),
                    bottom: HorExpr::comp(prev.bottom, cell.bottom.clone()),
                }
            }
        });
    }
    acc.ok_or_else(|| Error::Paste {
        row,
        col: 0,
        detail: "empty row".into(),
    })
}

fn stack<C: DoubleCategory>(c: &C, row: usize, upper: Cell<C>, lower: Cell<C>) -> Result<Cell<C>> {
    let upper_sq = if upper.bottom == lower.top {
        upper.sq
    } else {
        let bridge = coherence_between(c, &upper.bottom, &lower.top)
            .map_err(|e| paste_error(row, 0, e))?;
        c.sq_vcomp(&upper.sq, &bridge)
            .map_err(|e| paste_error(row, 0, e))?
    };
    let sq = c
        .sq_vcomp(&upper_sq, &lower.sq)
        .map_err(|e| paste_error(row, 0, e))?;
    Ok(Cell {
        sq,
        top: upper.top,
        bottom: lower.bottom,
    })
}

/// The canonical globular isomorphism `eval(e) ⇒ eval(normal(e))`, built
/// from associators and unitors.
pub fn normalizer<C: DoubleCategory>(c: &C, e: &HorExpr<C>) -> Result<C::Sq> {
    Ok(normalize_expr(c, e)?.0)
}

// Returns the normalizing square and the atoms of `e`.
fn normalize_expr<C: DoubleCategory>(c: &C, e: &HorExpr<C>) -> Result<(C::Sq, Vec<C::Hor>)> {
    match e {
        HorExpr::Atom(f) => Ok((c.sq_ver_id(f), vec![f.clone()])),
        HorExpr::Id(x) => Ok((c.sq_ver_id(&c.hor_id(x)), Vec::new())),
        HorExpr::Comp(a, b) => {
            let (na, la) = normalize_expr(c, a)?;
            let (nb, lb) = normalize_expr(c, b)?;
            let side = c.sq_hcomp(&na, &nb)?;
            let merge = merge_chains(c, &a.tgt(c), &la, &lb)?;
            let mut all = la;
            all.extend(lb);
            Ok((c.sq_vcomp(&side, &merge)?, all))
        }
    }
}

fn chain_value<C: DoubleCategory>(c: &C, x: &C::Obj, atoms: &[C::Hor]) -> Result<C::Hor> {
    if atoms.is_empty() {
        Ok(c.hor_id(x))
    } else {
        HorExpr::<C>::chain(atoms).eval(c)
    }
}

// `chain(l);chain(r) ⇒ chain(l ++ r)`; `mid` is the object between them.
fn merge_chains<C: DoubleCategory>(
    c: &C,
    mid: &C::Obj,
    l: &[C::Hor],
    r: &[C::Hor],
) -> Result<C::Sq> {
    let lv = chain_value(c, mid, l)?;
    let rv = chain_value(c, mid, r)?;
    if l.is_empty() {
        return Ok(c.left_unitor(&rv));
    }
    if r.is_empty() {
        return Ok(c.right_unitor(&lv));
    }
    if r.len() == 1 {
        return Ok(c.sq_ver_id(&c.hor_comp(&lv, &rv)?));
    }
    let (init, last) = r.split_at(r.len() - 1);
    let init_v = chain_value(c, mid, init)?;
    let last_v = &last[0];
    // l;(init;last) ⇒ (l;init);last ⇒ chain(l ++ init);last
    let reassoc = c.invert_globular(&c.associator(&lv, &init_v, last_v)?)?;
    let inner = merge_chains(c, mid, l, init)?;
    let step = c.sq_hcomp(&inner, &c.sq_ver_id(last_v))?;
    c.sq_vcomp(&reassoc, &step)
}

/// The canonical isomorphism `eval(a) ⇒ eval(b)` for two bracketings of
/// the same atoms.
pub fn coherence_between<C: DoubleCategory>(
    c: &C,
    a: &HorExpr<C>,
    b: &HorExpr<C>,
) -> Result<C::Sq> {
    if a.atoms() != b.atoms() {
        return Err(Error::Incomparable(format!(
            "bracketings of different arrows: {} versus {} atoms",
            a.atoms().len(),
            b.atoms().len()
        )));
    }
    let na = normalizer(c, a)?;
    let nb = normalizer(c, b)?;
    c.sq_vcomp(&na, &c.invert_globular(&nb)?)
}

/// Conjugates a cell by coherence isomorphisms so that its boundaries are
/// the given bracketings.
pub fn reshape<C: DoubleCategory>(
    c: &C,
    cell: &Cell<C>,
    top: HorExpr<C>,
    bottom: HorExpr<C>,
) -> Result<Cell<C>> {
    let upper = coherence_between(c, &top, &cell.top)?;
    let lower = coherence_between(c, &cell.bottom, &bottom)?;
    let sq = c.sq_vcomp(&c.sq_vcomp(&upper, &cell.sq)?, &lower)?;
    Ok(Cell { sq, top, bottom })
}

/// Pastes a grid and reshapes the result to the given boundaries.
pub fn paste_to<C: DoubleCategory>(
    c: &C,
    rows: &[Vec<Cell<C>>],
    top: HorExpr<C>,
    bottom: HorExpr<C>,
) -> Result<Cell<C>> {
    reshape(c, &paste(c, rows)?, top, bottom)
}

/// Equality of two cells after both are conjugated to canonical
/// bracketings.
pub fn equal_mod_coherence<C: DoubleCategory>(c: &C, a: &Cell<C>, b: &Cell<C>) -> Result<bool> {
    if a.top.atoms() != b.top.atoms() || a.bottom.atoms() != b.bottom.atoms() {
        return Err(Error::Incomparable(
            "cells have different horizontal boundaries".into(),
        ));
    }
    if c.sq_left(&a.sq) != c.sq_left(&b.sq) || c.sq_right(&a.sq) != c.sq_right(&b.sq) {
        return Err(Error::Incomparable(
            "cells have different vertical boundaries".into(),
        ));
    }
    let na = reshape(c, a, a.top.normal(c), a.bottom.normal(c))?;
    let nb = reshape(c, b, b.top.normal(c), b.bottom.normal(c))?;
    Ok(na.sq == nb.sq)
}

/// Largest number of isomorphism witnesses tried by
/// [`squares_equal_mod_coherence`].
pub const ISO_WITNESS_LIMIT: usize = 5040;

/// Equality of plain squares up to isomorphisms of their horizontal
/// boundaries: true iff some pair of invertible globular squares conjugates
/// `s1` into `s2`.
pub fn squares_equal_mod_coherence<C: DoubleCategory>(c: &C, s1: &C::Sq, s2: &C::Sq) -> Result<bool> {
    if c.sq_left(s1) != c.sq_left(s2) || c.sq_right(s1) != c.sq_right(s2) {
        return Err(Error::Incomparable(
            "squares have different vertical boundaries".into(),
        ));
    }
    if s1 == s2 {
        return Ok(true);
    }
    let (t1, t2) = (c.sq_top(s1), c.sq_top(s2));
    let (b1, b2) = (c.sq_bottom(s1), c.sq_bottom(s2));
    let top_isos = c.hor_isos(&t2, &t1, ISO_WITNESS_LIMIT)?;
    let bottom_isos = c.hor_isos(&b1, &b2, ISO_WITNESS_LIMIT)?;
    if top_isos.is_empty() || bottom_isos.is_empty() {
        return Err(Error::Incomparable(
            "horizontal boundaries are not isomorphic".into(),
        ));
    }
    for i in &top_isos {
        let upper = c.sq_vcomp(i, s1)?;
        for j in &bottom_isos {
            if c.sq_vcomp(&upper, j)? == *s2 {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// A bicategory presented by its cells, with diagrammatic composition of
/// 1-cells.
pub trait TwoCategory: Clone + Debug + PartialEq {
    type Obj: Clone + PartialEq + Debug;
    type Arr: Clone + PartialEq + Debug;
    type Cell: Clone + PartialEq + Debug;

    fn arr_src(&self, f: &Self::Arr) -> Self::Obj;
    fn arr_tgt(&self, f: &Self::Arr) -> Self::Obj;
    fn id_arr(&self, x: &Self::Obj) -> Self::Arr;
    fn comp_arr(&self, f: &Self::Arr, g: &Self::Arr) -> Result<Self::Arr>;

    fn cell_src(&self, a: &Self::Cell) -> Self::Arr;
    fn cell_tgt(&self, a: &Self::Cell) -> Self::Arr;
    fn id_cell(&self, f: &Self::Arr) -> Self::Cell;
    /// `a` followed by `b` within a hom-category.
    fn vcomp(&self, a: &Self::Cell, b: &Self::Cell) -> Result<Self::Cell>;
    /// Horizontal composite of 2-cells along a common object.
    fn hcomp(&self, a: &Self::Cell, b: &Self::Cell) -> Result<Self::Cell>;

    fn associator(&self, f: &Self::Arr, g: &Self::Arr, h: &Self::Arr) -> Result<Self::Cell>;
    fn left_unitor(&self, f: &Self::Arr) -> Self::Cell;
    fn right_unitor(&self, f: &Self::Arr) -> Self::Cell;
    fn invert(&self, a: &Self::Cell) -> Result<Self::Cell>;

    /// All 2-cells `f ⇒ g`, refusing to list more than `limit`.
    fn cells_between(&self, f: &Self::Arr, g: &Self::Arr, limit: usize) -> Result<Vec<Self::Cell>>;

    /// `a ▹ g`: right whiskering.
    fn whisker_right(&self, a: &Self::Cell, g: &Self::Arr) -> Result<Self::Cell> {
        self.hcomp(a, &self.id_cell(g))
    }

    /// `f ◃ b`: left whiskering.
    fn whisker_left(&self, f: &Self::Arr, b: &Self::Cell) -> Result<Self::Cell> {
        self.hcomp(&self.id_cell(f), b)
    }
}

/// The horizontal 2-category of a double category: horizontal arrows and
/// globular squares.
#[derive(Clone, Debug, PartialEq)]
pub struct HorizontalTwoCat<C: DoubleCategory>(pub C);

impl<C: DoubleCategory> TwoCategory for HorizontalTwoCat<C> {
    type Obj = C::Obj;
    type Arr = C::Hor;
    type Cell = C::Sq;

    fn arr_src(&self, f: &C::Hor) -> C::Obj {
        self.0.hor_src(f)
    }
    fn arr_tgt(&self, f: &C::Hor) -> C::Obj {
        self.0.hor_tgt(f)
    }
    fn id_arr(&self, x: &C::Obj) -> C::Hor {
        self.0.hor_id(x)
    }
    fn comp_arr(&self, f: &C::Hor, g: &C::Hor) -> Result<C::Hor> {
        self.0.hor_comp(f, g)
    }
    fn cell_src(&self, a: &C::Sq) -> C::Hor {
        self.0.sq_top(a)
    }
    fn cell_tgt(&self, a: &C::Sq) -> C::Hor {
        self.0.sq_bottom(a)
    }
    fn id_cell(&self, f: &C::Hor) -> C::Sq {
        self.0.sq_ver_id(f)
    }
    fn vcomp(&self, a: &C::Sq, b: &C::Sq) -> Result<C::Sq> {
        self.0.sq_vcomp(a, b)
    }
    fn hcomp(&self, a: &C::Sq, b: &C::Sq) -> Result<C::Sq> {
        self.0.sq_hcomp(a, b)
    }
    fn associator(&self, f: &C::Hor, g: &C::Hor, h: &C::Hor) -> Result<C::Sq> {
        self.0.associator(f, g, h)
    }
    fn left_unitor(&self, f: &C::Hor) -> C::Sq {
        self.0.left_unitor(f)
    }
    fn right_unitor(&self, f: &C::Hor) -> C::Sq {
        self.0.right_unitor(f)
    }
    fn invert(&self, a: &C::Sq) -> Result<C::Sq> {
        self.0.invert_globular(a)
    }
    fn cells_between(&self, f: &C::Hor, g: &C::Hor, limit: usize) -> Result<Vec<C::Sq>> {
        let x = self.0.ver_id(&self.0.hor_src(f));
        let y = self.0.ver_id(&self.0.hor_tgt(f));
        self.0.squares_with_boundary(f, g, &x, &y, limit)
    }
}

/// The terminal 2-category: one object, one 1-cell, one 2-cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct TerminalTwoCat;

impl TwoCategory for TerminalTwoCat {
    type Obj = ();
    type Arr = ();
    type Cell = ();

    fn arr_src(&self, _: &()) {}
    fn arr_tgt(&self, _: &()) {}
    fn id_arr(&self, _: &()) {}
    fn comp_arr(&self, _: &(), _: &()) -> Result<()> {
        Ok(())
    }
    fn cell_src(&self, _: &()) {}
    fn cell_tgt(&self, _: &()) {}
    fn id_cell(&self, _: &()) {}
    fn vcomp(&self, _: &(), _: &()) -> Result<()> {
        Ok(())
    }
    fn hcomp(&self, _: &(), _: &()) -> Result<()> {
        Ok(())
    }
    fn associator(&self, _: &(), _: &(), _: &()) -> Result<()> {
        Ok(())
    }
    fn left_unitor(&self, _: &()) {}
    fn right_unitor(&self, _: &()) {}
    fn invert(&self, _: &()) -> Result<()> {
        Ok(())
    }
    fn cells_between(&self, _: &(), _: &(), _: usize) -> Result<Vec<()>> {
        Ok(vec![()])
    }
}

/// A square of a double category whose vertical arrows are all identities:
/// a 2-cell of the underlying 2-category.
#[derive(Clone, Debug, PartialEq)]
pub struct TrivialSquare<K: TwoCategory> {
    pub cell: K::Cell,
}

/// The double category with `K` as horizontal 2-category and only identity
/// vertical arrows. A vertical arrow is named by its object.
#[derive(Clone, Debug, PartialEq)]
pub struct TrivialVertical<K: TwoCategory>(pub K);

/// Builds the double category with `k` horizontally and identities
/// vertically.
pub fn trivial_vertical_instance<K: TwoCategory>(k: K) -> TrivialVertical<K> {
    TrivialVertical(k)
}

impl<K: TwoCategory> DoubleCategory for TrivialVertical<K> {
    type Obj = K::Obj;
    type Hor = K::Arr;
    type Ver = K::Obj;
    type Sq = K::Cell;

    fn name(&self) -> String {
        "trivial-vertical".into()
    }
    fn hor_src(&self, f: &K::Arr) -> K::Obj {
        self.0.arr_src(f)
    }
    fn hor_tgt(&self, f: &K::Arr) -> K::Obj {
        self.0.arr_tgt(f)
    }
    fn hor_id(&self, x: &K::Obj) -> K::Arr {
        self.0.id_arr(x)
    }
    fn hor_comp(&self, f: &K::Arr, g: &K::Arr) -> Result<K::Arr> {
        self.0.comp_arr(f, g)
    }
    fn ver_src(&self, u: &K::Obj) -> K::Obj {
        u.clone()
    }
    fn ver_tgt(&self, u: &K::Obj) -> K::Obj {
        u.clone()
    }
    fn ver_id(&self, x: &K::Obj) -> K::Obj {
        x.clone()
    }
    fn ver_comp(&self, u: &K::Obj, v: &K::Obj) -> Result<K::Obj> {
        if u == v {
            Ok(u.clone())
        } else {
            Err(Error::Boundary("identity arrows on different objects".into()))
        }
    }
    fn sq_top(&self, s: &K::Cell) -> K::Arr {
        self.0.cell_src(s)
    }
    fn sq_bottom(&self, s: &K::Cell) -> K::Arr {
        self.0.cell_tgt(s)
    }
    fn sq_left(&self, s: &K::Cell) -> K::Obj {
        self.0.arr_src(&self.0.cell_src(s))
    }
    fn sq_right(&self, s: &K::Cell) -> K::Obj {
        self.0.arr_tgt(&self.0.cell_src(s))
    }
    fn sq_hor_id(&self, x: &K::Obj) -> K::Cell {
        self.0.id_cell(&self.0.id_arr(x))
    }
    fn sq_ver_id(&self, f: &K::Arr) -> K::Cell {
        self.0.id_cell(f)
    }
    fn sq_hcomp(&self, a: &K::Cell, b: &K::Cell) -> Result<K::Cell> {
        // (a ▹ g)·(f' ◃ b)
        let left = self.0.whisker_right(a, &self.0.cell_src(b))?;
        let right = self.0.whisker_left(&self.0.cell_tgt(a), b)?;
        self.0.vcomp(&left, &right)
    }
    fn sq_vcomp(&self, a: &K::Cell, b: &K::Cell) -> Result<K::Cell> {
        self.0.vcomp(a, b)
    }
    fn associator(&self, f: &K::Arr, g: &K::Arr, h: &K::Arr) -> Result<K::Cell> {
        self.0.associator(f, g, h)
    }
    fn left_unitor(&self, f: &K::Arr) -> K::Cell {
        self.0.left_unitor(f)
    }
    fn right_unitor(&self, f: &K::Arr) -> K::Cell {
        self.0.right_unitor(f)
    }
    fn invert_globular(&self, s: &K::Cell) -> Result<K::Cell> {
        self.0.invert(s)
    }
    fn validate_square(&self, s: &K::Cell) -> Result<()> {
        let (f, g) = (self.0.cell_src(s), self.0.cell_tgt(s));
        if self.0.arr_src(&f) != self.0.arr_src(&g) || self.0.arr_tgt(&f) != self.0.arr_tgt(&g) {
            return Err(Error::Boundary("2-cell between non-parallel arrows".into()));
        }
        Ok(())
    }
    fn squares_with_boundary(
        &self,
        top: &K::Arr,
        bottom: &K::Arr,
        left: &K::Obj,
        right: &K::Obj,
        limit: usize,
    ) -> Result<Vec<K::Cell>> {
        if *left != self.0.arr_src(top) || *right != self.0.arr_tgt(top) {
            return Ok(Vec::new());
        }
        self.0.cells_between(top, bottom, limit)
    }
}

/// Associativity and unit laws for a monad in a 2-category, written with
/// whiskering and the 2-category's own coherence cells.
pub fn two_cat_monad_laws<K: TwoCategory>(
    k: &K,
    p: &K::Arr,
    mult: &K::Cell,
    unit: &K::Cell,
) -> Result<bool> {
    let pp = k.comp_arr(p, p)?;
    if k.cell_src(mult) != pp || k.cell_tgt(mult) != *p {
        return Ok(false);
    }
    let x = k.arr_src(p);
    if k.cell_src(unit) != k.id_arr(&x) || k.cell_tgt(unit) != *p {
        return Ok(false);
    }
    // μ·(μ ▹ P) = μ·(P ◃ μ)·assoc
    let lhs = k.vcomp(&k.whisker_right(mult, p)?, mult)?;
    let rhs = k.vcomp(
        &k.vcomp(&k.associator(p, p, p)?, &k.whisker_left(p, mult)?)?,
        mult,
    )?;
    if lhs != rhs {
        return Ok(false);
    }
    // μ·(P ◃ η) = ρ
    let right = k.vcomp(&k.whisker_left(p, unit)?, mult)?;
    if right != k.right_unitor(p) {
        return Ok(false);
    }
    // μ·(η ▹ P) = λ
    let left = k.vcomp(&k.whisker_right(unit, p)?, mult)?;
    Ok(left == k.left_unitor(p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn terminal_instance_is_trivial() {
        let d = trivial_vertical_instance(TerminalTwoCat);
        assert_eq!(d.hor_id(&()), ());
        assert_eq!(d.sq_hcomp(&(), &()).unwrap(), ());
        let cell = Cell::plain(&d, &());
        let pasted = paste(&d, &[vec![cell.clone()]]).unwrap();
        assert_eq!(pasted, cell);
        assert!(two_cat_monad_laws(&TerminalTwoCat, &(), &(), &()).unwrap());
        assert!(d.is_globular(&()));
    }

    #[test]
    fn expressions_flatten() {
        type D = TrivialVertical<TerminalTwoCat>;
        let e: HorExpr<D> = HorExpr::comp(HorExpr::id(&()), HorExpr::comp(HorExpr::atom(&()), HorExpr::atom(&())));
        assert_eq!(e.atoms().len(), 2);
        let d = trivial_vertical_instance(TerminalTwoCat);
        assert_eq!(e.normal(&d), HorExpr::comp(HorExpr::atom(&()), HorExpr::atom(&())));
        let only_ids: HorExpr<D> = HorExpr::comp(HorExpr::id(&()), HorExpr::id(&()));
        assert_eq!(only_ids.normal(&d), HorExpr::Id(()));
    }

    #[test]
    fn empty_grid_is_an_error() {
        let d = trivial_vertical_instance(TerminalTwoCat);
        assert!(matches!(paste(&d, &[]), Err(Error::Paste { .. })));
    }
}
