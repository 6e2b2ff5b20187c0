//! Finite-level definable subsets of `A^d((t))`.
//!
//! A cylinder set is a Boolean combination of coefficient conditions on the
//! jets of a point: fixed coefficient values, nonvanishing of a coefficient,
//! order conditions, and rational-coefficient linear relations between
//! coefficient slots.  The language is deliberately restricted so that the
//! class of the truncated set in the Grothendieck ring is computable exactly
//! by linear algebra: conditions are disjointified and every piece becomes an
//! affine-linear system plus non-equations, counted by rank and
//! inclusion-exclusion.  Anything outside the language raises
//! `UnsupportedConstraint` rather than guessing.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::laurent::{Coeff, LaurentVector, OrdVal};
use crate::ring::MotClass;
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Atoms and conditions
// ---------------------------------------------------------------------------

/// One linear relation `sum a_(i,j) * coeff(x_i, j) = rhs` between
/// coefficient slots.
#[derive(Clone, PartialEq, Debug)]
pub struct LinearEq {
    /// (coordinate, index, rational coefficient)
    pub terms: Vec<(usize, i64, BigRational)>,
    pub rhs: BigRational,
}

impl LinearEq {
    pub fn new(terms: Vec<(usize, i64, BigRational)>, rhs: BigRational) -> Self {
        LinearEq { terms, rhs }
    }
}

/// Atomic condition on the coefficients of a point of `A^d((t))`.
#[derive(Clone, PartialEq, Debug)]
pub enum Atom {
    /// coeff(x_i, j) = c
    CoeffEq(usize, i64, BigRational),
    /// coeff(x_i, j) != 0
    CoeffNonzero(usize, i64),
    /// ord(x_i) = e
    OrdExact(usize, i64),
    /// ord(x_i) >= e
    OrdAtLeast(usize, i64),
    /// linear relation between slots
    Linear(LinearEq),
}

impl Atom {
    /// Largest coefficient index an atom constrains (used for the stability
    /// level).
    fn max_index(&self) -> i64 {
        match self {
            Atom::CoeffEq(_, j, _) | Atom::CoeffNonzero(_, j) => *j,
            Atom::OrdExact(_, e) => *e,
            Atom::OrdAtLeast(_, e) => e - 1,
            Atom::Linear(eq) => eq.terms.iter().map(|(_, j, _)| *j).max().unwrap_or(0),
        }
    }

    fn min_index(&self) -> i64 {
        match self {
            Atom::CoeffEq(_, j, _) | Atom::CoeffNonzero(_, j) => *j,
            Atom::OrdExact(_, e) | Atom::OrdAtLeast(_, e) => *e,
            Atom::Linear(eq) => eq.terms.iter().map(|(_, j, _)| *j).min().unwrap_or(0),
        }
    }

    fn shifted(&self, n: i64) -> Atom {
        match self {
            Atom::CoeffEq(i, j, c) => Atom::CoeffEq(*i, j + n, c.clone()),
            Atom::CoeffNonzero(i, j) => Atom::CoeffNonzero(*i, j + n),
            Atom::OrdExact(i, e) => Atom::OrdExact(*i, e + n),
            Atom::OrdAtLeast(i, e) => Atom::OrdAtLeast(*i, e + n),
            Atom::Linear(eq) => Atom::Linear(LinearEq {
                terms: eq
                    .terms
                    .iter()
                    .map(|(i, j, c)| (*i, j + n, c.clone()))
                    .collect(),
                rhs: eq.rhs.clone(),
            }),
        }
    }
}

/// Boolean combination of atoms.
///
/// `DisjointOr` is a union whose branches are pairwise disjoint *by
/// construction* (e.g. distinct order profiles); it lets the class counter
/// skip the exponential disjointification step.  Only internal constructors
/// produce it.
#[derive(Clone, PartialEq, Debug)]
pub enum Cond {
    True,
    False,
    Atom(Atom),
    And(Vec<Cond>),
    Or(Vec<Cond>),
    DisjointOr(Vec<Cond>),
    Not(Box<Cond>),
}

impl Cond {
    pub fn and(parts: Vec<Cond>) -> Cond {
        let mut flat = Vec::new();
        for p in parts {
            match p {
                Cond::True => {}
                Cond::False => return Cond::False,
                Cond::And(cs) => flat.extend(cs),
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => Cond::True,
            1 => flat.pop().unwrap(),
            _ => Cond::And(flat),
        }
    }

    pub fn or(parts: Vec<Cond>) -> Cond {
        let mut flat = Vec::new();
        for p in parts {
            match p {
                Cond::False => {}
                Cond::True => return Cond::True,
                Cond::Or(cs) => flat.extend(cs),
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => Cond::False,
            1 => flat.pop().unwrap(),
            _ => Cond::Or(flat),
        }
    }

    /// Union of branches known to be pairwise disjoint by construction.
    pub fn disjoint_or(parts: Vec<Cond>) -> Cond {
        let mut flat = Vec::new();
        for p in parts {
            match p {
                Cond::False => {}
                Cond::True => return Cond::True,
                Cond::DisjointOr(cs) => flat.extend(cs),
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => Cond::False,
            1 => flat.pop().unwrap(),
            _ => Cond::DisjointOr(flat),
        }
    }

    pub fn not(c: Cond) -> Cond {
        match c {
            Cond::True => Cond::False,
            Cond::False => Cond::True,
            Cond::Not(inner) => *inner,
            other => Cond::Not(Box::new(other)),
        }
    }

    fn for_each_atom<F: FnMut(&Atom)>(&self, f: &mut F) {
        match self {
            Cond::True | Cond::False => {}
            Cond::Atom(a) => f(a),
            Cond::And(cs) | Cond::Or(cs) | Cond::DisjointOr(cs) => {
                for c in cs {
                    c.for_each_atom(f);
                }
            }
            Cond::Not(c) => c.for_each_atom(f),
        }
    }

    fn shifted(&self, n: i64) -> Cond {
        match self {
            Cond::True => Cond::True,
            Cond::False => Cond::False,
            Cond::Atom(a) => Cond::Atom(a.shifted(n)),
            Cond::And(cs) => Cond::And(cs.iter().map(|c| c.shifted(n)).collect()),
            Cond::Or(cs) => Cond::Or(cs.iter().map(|c| c.shifted(n)).collect()),
            Cond::DisjointOr(cs) => {
                Cond::DisjointOr(cs.iter().map(|c| c.shifted(n)).collect())
            }
            Cond::Not(c) => Cond::Not(Box::new(c.shifted(n))),
        }
    }
}

// ---------------------------------------------------------------------------
// CylinderSet
// ---------------------------------------------------------------------------

/// A finite-level definable subset of `A^d((t))`: points whose coordinates
/// have poles of order at most `pole_bound`, cut out by `cond`.
#[derive(Clone, PartialEq, Debug)]
pub struct CylinderSet {
    dim_d: usize,
    pole_bound: i64,
    cond: Cond,
}

impl CylinderSet {
    pub fn new(dim_d: usize, pole_bound: i64, cond: Cond) -> Result<CylinderSet> {
        if dim_d == 0 {
            return Err(Error::Domain("dimension must be positive".into()));
        }
        if pole_bound < 0 {
            return Err(Error::Domain("pole bound must be nonnegative".into()));
        }
        let mut bad = None;
        let mut check = |a: &Atom| {
            for idx in [a.min_index()] {
                if idx < -pole_bound {
                    bad = Some(idx);
                }
            }
            match a {
                Atom::CoeffEq(i, _, _)
                | Atom::CoeffNonzero(i, _)
                | Atom::OrdExact(i, _)
                | Atom::OrdAtLeast(i, _) => {
                    if *i >= dim_d {
                        bad = Some(*i as i64);
                    }
                }
                Atom::Linear(eq) => {
                    for (i, _, _) in &eq.terms {
                        if *i >= dim_d {
                            bad = Some(*i as i64);
                        }
                    }
                }
            }
        };
        cond.for_each_atom(&mut check);
        if bad.is_some() {
            return Err(Error::Domain(format!(
                "atom index underflows the pole bound {pole_bound} or exceeds dimension {dim_d}"
            )));
        }
        Ok(CylinderSet {
            dim_d,
            pole_bound,
            cond,
        })
    }

    /// The full arc space `L(A^d)`.
    pub fn full(dim_d: usize) -> CylinderSet {
        CylinderSet::new(dim_d, 0, Cond::True).unwrap()
    }

    pub fn empty(dim_d: usize) -> CylinderSet {
        CylinderSet::new(dim_d, 0, Cond::False).unwrap()
    }

    /// `B_n = { ord(x_0) >= n }` in `L(A^1)`.
    pub fn b_n(n: i64) -> CylinderSet {
        CylinderSet::new(1, 0, Cond::Atom(Atom::OrdAtLeast(0, n))).unwrap()
    }

    pub fn dim(&self) -> usize {
        self.dim_d
    }

    pub fn pole_bound(&self) -> i64 {
        self.pole_bound
    }

    pub fn cond(&self) -> &Cond {
        &self.cond
    }

    /// View the same set inside the larger ambient `(A^d)^(N')`, N' >= N:
    /// the implicit pole bound of the old ambient becomes an explicit order
    /// condition on every coordinate.
    pub fn with_pole_bound(&self, n: i64) -> Result<CylinderSet> {
        if n < self.pole_bound {
            return Err(Error::Domain(format!(
                "cannot lower pole bound {} to {}",
                self.pole_bound, n
            )));
        }
        if n == self.pole_bound {
            return Ok(self.clone());
        }
        let mut parts = vec![self.cond.clone()];
        for i in 0..self.dim_d {
            parts.push(Cond::Atom(Atom::OrdAtLeast(i, -self.pole_bound)));
        }
        CylinderSet::new(self.dim_d, n, Cond::and(parts))
    }

    /// Least level n such that no atom constrains an index above n; on the
    /// affine space weak stability at this level implies stability.
    pub fn stable_level(&self) -> i64 {
        let mut level = 0i64;
        self.cond.for_each_atom(&mut |a: &Atom| {
            level = level.max(a.max_index());
        });
        level
    }

    /// The shift action: image of the set under multiplication by t^N
    /// (indices move up by N); N may be negative for the inverse shift.
    pub fn shift(&self, n: i64) -> Result<CylinderSet> {
        let new_bound = (self.pole_bound - n).max(0);
        CylinderSet::new(self.dim_d, new_bound, self.cond.shifted(n))
    }

    pub fn intersect(&self, other: &CylinderSet) -> Result<CylinderSet> {
        self.boolean(other, |a, b| Cond::and(vec![a, b]))
    }

    pub fn union(&self, other: &CylinderSet) -> Result<CylinderSet> {
        self.boolean(other, |a, b| Cond::or(vec![a, b]))
    }

    pub fn difference(&self, other: &CylinderSet) -> Result<CylinderSet> {
        self.boolean(other, |a, b| Cond::and(vec![a, Cond::not(b)]))
    }

    pub fn complement_in_full(&self) -> Result<CylinderSet> {
        CylinderSet::new(self.dim_d, self.pole_bound, Cond::not(self.cond.clone()))
    }

    fn boolean<F: Fn(Cond, Cond) -> Cond>(
        &self,
        other: &CylinderSet,
        f: F,
    ) -> Result<CylinderSet> {
        if self.dim_d != other.dim_d {
            return Err(Error::Domain("dimension mismatch in set operation".into()));
        }
        let bound = self.pole_bound.max(other.pole_bound);
        let a = self.with_pole_bound(bound)?;
        let b = other.with_pole_bound(bound)?;
        CylinderSet::new(self.dim_d, bound, f(a.cond, b.cond))
    }

    /// Point membership; requires the point precision to cover every
    /// constrained index.
    pub fn membership(&self, point: &LaurentVector) -> Result<bool> {
        if point.dim() != self.dim_d {
            return Err(Error::Domain("dimension mismatch in membership".into()));
        }
        eval_cond(&self.cond, point)
    }

    /// The class `[pi_m(A)]` of the level-m truncation in the Grothendieck
    /// ring, for sets with pole bound 0 and m at least the stable level.
    pub fn jet_class(&self, m: i64) -> Result<MotClass> {
        if self.pole_bound != 0 {
            return Err(Error::Domain(
                "jet_class requires pole bound 0; shift the set first".into(),
            ));
        }
        if m < self.stable_level() {
            return Err(Error::Domain(format!(
                "level {m} below the stable level {}",
                self.stable_level()
            )));
        }
        let ctx = SlotCtx {
            dim: self.dim_d,
            lo: 0,
            hi: m,
        };
        let systems = disjoint_systems(&self.cond, &ctx)?;
        let mut acc = MotClass::zero();
        for sys in &systems {
            acc = acc.add(&class_of_system(sys, &ctx)?);
        }
        Ok(acc)
    }

    /// Whether the level-m truncation is empty (class zero at a sufficient
    /// level).
    pub fn is_empty_set(&self) -> Result<bool> {
        let shifted = self.shift(self.pole_bound)?;
        let m = shifted.stable_level();
        Ok(shifted.jet_class(m)?.is_zero())
    }
}

/// Named operations mirroring the public surface.
pub fn shift_set(a: &CylinderSet, n: i64) -> Result<CylinderSet> {
    a.shift(n)
}
pub fn jet_class(a: &CylinderSet, m: i64) -> Result<MotClass> {
    a.jet_class(m)
}
pub fn stable_level(a: &CylinderSet) -> i64 {
    a.stable_level()
}
pub fn set_union(a: &CylinderSet, b: &CylinderSet) -> Result<CylinderSet> {
    a.union(b)
}
pub fn set_intersect(a: &CylinderSet, b: &CylinderSet) -> Result<CylinderSet> {
    a.intersect(b)
}
pub fn set_difference(a: &CylinderSet, b: &CylinderSet) -> Result<CylinderSet> {
    a.difference(b)
}
pub fn membership(point: &LaurentVector, a: &CylinderSet) -> Result<bool> {
    a.membership(point)
}

// ---------------------------------------------------------------------------
// Pointwise evaluation
// ---------------------------------------------------------------------------

fn coeff_value(point: &LaurentVector, i: usize, j: i64) -> Result<Coeff> {
    point.entry(i).coeff_at(j)
}

fn eval_atom(atom: &Atom, point: &LaurentVector) -> Result<bool> {
    let field = point.field();
    match atom {
        Atom::CoeffEq(i, j, c) => {
            let want = Coeff::from_rational(field, c)?;
            Ok(coeff_value(point, *i, *j)? == want)
        }
        Atom::CoeffNonzero(i, j) => Ok(!coeff_value(point, *i, *j)?.is_zero()),
        Atom::OrdAtLeast(i, e) => match point.entry(*i).ord() {
            Ok(OrdVal::Infinite) => Ok(true),
            Ok(OrdVal::Finite(v)) => Ok(v >= *e),
            Err(_) => {
                // zero up to precision P: ord >= P
                let p = point.entry(*i).precision().unwrap_or(i64::MAX);
                if p >= *e {
                    Ok(true)
                } else {
                    Err(Error::InsufficientPrecision(format!(
                        "order condition at {e} undecidable at precision {p}"
                    )))
                }
            }
        },
        Atom::OrdExact(i, e) => match point.entry(*i).ord() {
            Ok(OrdVal::Infinite) => Ok(false),
            Ok(OrdVal::Finite(v)) => Ok(v == *e),
            Err(_) => {
                let p = point.entry(*i).precision().unwrap_or(i64::MAX);
                if p > *e {
                    Ok(false)
                } else {
                    Err(Error::InsufficientPrecision(format!(
                        "exact-order condition at {e} undecidable at precision {p}"
                    )))
                }
            }
        },
        Atom::Linear(eq) => {
            let mut acc = Coeff::zero(field);
            for (i, j, c) in &eq.terms {
                let coef = Coeff::from_rational(field, c)?;
                acc = acc.add(&coef.mul(&coeff_value(point, *i, *j)?)?)?;
            }
            let rhs = Coeff::from_rational(field, &eq.rhs)?;
            Ok(acc == rhs)
        }
    }
}

fn eval_cond(cond: &Cond, point: &LaurentVector) -> Result<bool> {
    match cond {
        Cond::True => Ok(true),
        Cond::False => Ok(false),
        Cond::Atom(a) => eval_atom(a, point),
        Cond::And(cs) => {
            for c in cs {
                if !eval_cond(c, point)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Cond::Or(cs) | Cond::DisjointOr(cs) => {
            for c in cs {
                if eval_cond(c, point)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        Cond::Not(c) => Ok(!eval_cond(c, point)?),
    }
}

// ---------------------------------------------------------------------------
// Class counting by disjointification and linear algebra
// ---------------------------------------------------------------------------

struct SlotCtx {
    dim: usize,
    lo: i64,
    hi: i64, // inclusive
}

impl SlotCtx {
    fn nslots(&self) -> usize {
        self.dim * ((self.hi - self.lo + 1) as usize)
    }

    fn slot(&self, i: usize, j: i64) -> Result<usize> {
        if j < self.lo || j > self.hi {
            return Err(Error::UnsupportedConstraint(format!(
                "coefficient index {j} outside the slot window [{}, {}]",
                self.lo, self.hi
            )));
        }
        Ok(i * ((self.hi - self.lo + 1) as usize) + (j - self.lo) as usize)
    }
}

/// One affine equation over the slot space.
#[derive(Clone, Debug)]
struct AffEq {
    coeffs: Vec<(usize, BigRational)>,
    rhs: BigRational,
}

#[derive(Clone, Debug)]
enum Lit {
    Eq(AffEq),
    Neq(AffEq),
}

/// A conjunction: equations plus negated equations.
type System = Vec<Lit>;

fn atom_to_system(atom: &Atom, ctx: &SlotCtx) -> Result<System> {
    let mut lits = Vec::new();
    match atom {
        Atom::CoeffEq(i, j, c) => lits.push(Lit::Eq(AffEq {
            coeffs: vec![(ctx.slot(*i, *j)?, BigRational::one())],
            rhs: c.clone(),
        })),
        Atom::CoeffNonzero(i, j) => lits.push(Lit::Neq(AffEq {
            coeffs: vec![(ctx.slot(*i, *j)?, BigRational::one())],
            rhs: BigRational::zero(),
        })),
        Atom::OrdAtLeast(i, e) => {
            for j in ctx.lo..*e {
                lits.push(Lit::Eq(AffEq {
                    coeffs: vec![(ctx.slot(*i, j)?, BigRational::one())],
                    rhs: BigRational::zero(),
                }));
            }
        }
        Atom::OrdExact(i, e) => {
            for j in ctx.lo..*e {
                lits.push(Lit::Eq(AffEq {
                    coeffs: vec![(ctx.slot(*i, j)?, BigRational::one())],
                    rhs: BigRational::zero(),
                }));
            }
            lits.push(Lit::Neq(AffEq {
                coeffs: vec![(ctx.slot(*i, *e)?, BigRational::one())],
                rhs: BigRational::zero(),
            }));
        }
        Atom::Linear(eq) => {
            let mut coeffs = Vec::new();
            for (i, j, c) in &eq.terms {
                coeffs.push((ctx.slot(*i, *j)?, c.clone()));
            }
            lits.push(Lit::Eq(AffEq {
                coeffs,
                rhs: eq.rhs.clone(),
            }));
        }
    }
    Ok(lits)
}

/// Negation of an atom within the window: a union of atom conjunctions.
fn negate_atom(atom: &Atom, ctx: &SlotCtx) -> Cond {
    match atom {
        Atom::CoeffEq(i, j, c) => {
            // slot != c, as a negated linear equation
            Cond::Not(Box::new(Cond::Atom(Atom::Linear(LinearEq {
                terms: vec![(*i, *j, BigRational::one())],
                rhs: c.clone(),
            }))))
        }
        Atom::CoeffNonzero(i, j) => Cond::Atom(Atom::CoeffEq(*i, *j, BigRational::zero())),
        Atom::OrdAtLeast(i, e) => {
            // ord < e: one of the finitely many exact orders below e,
            // pairwise disjoint by construction
            let mut parts = Vec::new();
            for v in ctx.lo..*e {
                parts.push(Cond::Atom(Atom::OrdExact(*i, v)));
            }
            Cond::disjoint_or(parts)
        }
        Atom::OrdExact(i, e) => {
            let mut parts = Vec::new();
            for v in ctx.lo..*e {
                parts.push(Cond::Atom(Atom::OrdExact(*i, v)));
            }
            parts.push(Cond::Atom(Atom::OrdAtLeast(*i, e + 1)));
            Cond::disjoint_or(parts)
        }
        Atom::Linear(_) => unreachable!("handled by caller"),
    }
}

/// Negation-normal form, with atom negations expanded into the language.
fn nnf(cond: &Cond, ctx: &SlotCtx, negate: bool) -> Cond {
    match cond {
        Cond::True => {
            if negate {
                Cond::False
            } else {
                Cond::True
            }
        }
        Cond::False => {
            if negate {
                Cond::True
            } else {
                Cond::False
            }
        }
        Cond::Atom(a) => {
            if !negate {
                Cond::Atom(a.clone())
            } else {
                match a {
                    Atom::Linear(_) => Cond::Not(Box::new(Cond::Atom(a.clone()))),
                    other => {
                        let n = negate_atom(other, ctx);
                        // the expansion may itself contain atoms only
                        n
                    }
                }
            }
        }
        Cond::And(cs) => {
            let parts: Vec<Cond> = cs.iter().map(|c| nnf(c, ctx, negate)).collect();
            if negate {
                Cond::or(parts)
            } else {
                Cond::and(parts)
            }
        }
        Cond::Or(cs) => {
            let parts: Vec<Cond> = cs.iter().map(|c| nnf(c, ctx, negate)).collect();
            if negate {
                Cond::and(parts)
            } else {
                Cond::or(parts)
            }
        }
        Cond::DisjointOr(cs) => {
            let parts: Vec<Cond> = cs.iter().map(|c| nnf(c, ctx, negate)).collect();
            if negate {
                Cond::and(parts)
            } else {
                Cond::DisjointOr(parts)
            }
        }
        Cond::Not(c) => nnf(c, ctx, !negate),
    }
}

/// Expand a condition into pairwise disjoint conjunctive systems.
fn disjoint_systems(cond: &Cond, ctx: &SlotCtx) -> Result<Vec<System>> {
    let n = nnf(cond, ctx, false);
    expand(&n, ctx)
}

fn expand(cond: &Cond, ctx: &SlotCtx) -> Result<Vec<System>> {
    match cond {
        Cond::True => Ok(vec![Vec::new()]),
        Cond::False => Ok(Vec::new()),
        Cond::Atom(a) => Ok(vec![atom_to_system(a, ctx)?]),
        Cond::Not(inner) => match inner.as_ref() {
            Cond::Atom(Atom::Linear(eq)) => {
                let mut coeffs = Vec::new();
                for (i, j, c) in &eq.terms {
                    coeffs.push((ctx.slot(*i, *j)?, c.clone()));
                }
                Ok(vec![vec![Lit::Neq(AffEq {
                    coeffs,
                    rhs: eq.rhs.clone(),
                })]])
            }
            _ => Err(Error::UnsupportedConstraint(
                "unexpected negation after normalization".into(),
            )),
        },
        Cond::And(cs) => {
            let mut acc: Vec<System> = vec![Vec::new()];
            for c in cs {
                let pieces = expand(c, ctx)?;
                let mut next = Vec::new();
                for a in &acc {
                    for p in &pieces {
                        let mut sys = a.clone();
                        sys.extend(p.iter().cloned());
                        next.push(sys);
                    }
                }
                acc = next;
                if acc.len() > 200_000 {
                    return Err(Error::UnsupportedConstraint(
                        "condition expansion too large".into(),
                    ));
                }
            }
            Ok(acc)
        }
        Cond::DisjointOr(cs) => {
            let mut acc = Vec::new();
            for c in cs {
                acc.extend(expand(c, ctx)?);
                if acc.len() > 200_000 {
                    return Err(Error::UnsupportedConstraint(
                        "condition expansion too large".into(),
                    ));
                }
            }
            Ok(acc)
        }
        Cond::Or(cs) => {
            // disjointify: c_k and not(c_1), ..., not(c_{k-1})
            let mut acc = Vec::new();
            for (k, c) in cs.iter().enumerate() {
                let mut parts = vec![c.clone()];
                for prev in &cs[..k] {
                    parts.push(nnf(prev, ctx, true));
                }
                let piece = Cond::and(parts);
                acc.extend(expand(&nnf(&piece, ctx, false), ctx)?);
                if acc.len() > 200_000 {
                    return Err(Error::UnsupportedConstraint(
                        "condition expansion too large".into(),
                    ));
                }
            }
            Ok(acc)
        }
    }
}

/// Gaussian elimination: (rank, consistent) of an affine system.
fn rank_of(eqs: &[&AffEq], nslots: usize) -> (usize, bool) {
    let mut rows: Vec<Vec<BigRational>> = eqs
        .iter()
        .map(|e| {
            let mut row = vec![BigRational::zero(); nslots + 1];
            for (s, c) in &e.coeffs {
                row[*s] += c;
            }
            row[nslots] = e.rhs.clone();
            row
        })
        .collect();
    let mut rank = 0usize;
    for col in 0..nslots {
        let pivot = (rank..rows.len()).find(|&r| !rows[r][col].is_zero());
        let Some(p) = pivot else { continue };
        rows.swap(rank, p);
        let pv = rows[rank][col].clone();
        for r in 0..rows.len() {
            if r != rank && !rows[r][col].is_zero() {
                let factor = &rows[r][col] / &pv;
                for c2 in col..=nslots {
                    let sub = &rows[rank][c2] * &factor;
                    rows[r][c2] -= sub;
                }
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    // inconsistent iff some remaining row is 0 = nonzero
    let consistent = rows.iter().all(|row| {
        let lhs_zero = row[..nslots].iter().all(|c| c.is_zero());
        !(lhs_zero && !row[nslots].is_zero())
    });
    (rank, consistent)
}

/// Class of one conjunctive system by inclusion-exclusion over the
/// non-equations.
fn class_of_system(sys: &System, ctx: &SlotCtx) -> Result<MotClass> {
    let nslots = ctx.nslots();
    let eqs: Vec<&AffEq> = sys
        .iter()
        .filter_map(|l| match l {
            Lit::Eq(e) => Some(e),
            _ => None,
        })
        .collect();
    let neqs: Vec<&AffEq> = sys
        .iter()
        .filter_map(|l| match l {
            Lit::Neq(e) => Some(e),
            _ => None,
        })
        .collect();
    if neqs.len() > 20 {
        return Err(Error::UnsupportedConstraint(format!(
            "too many non-equations ({}) for inclusion-exclusion",
            neqs.len()
        )));
    }
    let mut acc = MotClass::zero();
    for mask in 0u64..(1u64 << neqs.len()) {
        let mut all: Vec<&AffEq> = eqs.clone();
        let mut sign_neg = false;
        for (b, ne) in neqs.iter().enumerate() {
            if mask & (1 << b) != 0 {
                all.push(ne);
                sign_neg = !sign_neg;
            }
        }
        let (rank, consistent) = rank_of(&all, nslots);
        if !consistent {
            continue;
        }
        let dim = nslots - rank;
        let term = MotClass::l_pow(dim as i64);
        acc = if sign_neg {
            acc.sub(&term)
        } else {
            acc.add(&term)
        };
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// Pattern families
// ---------------------------------------------------------------------------

/// A countable family of pairwise disjoint cylinder sets indexed by a stratum
/// parameter, whose measures are asserted to follow the geometric law
/// `c * L^{-k e}`; the assertion is verified on a prefix before summation.
pub struct PatternFamily {
    gen: Box<dyn Fn(i64) -> Result<CylinderSet> + Send + Sync>,
    start: i64,
    class_c: MotClass,
    class_k: i64,
}

impl PatternFamily {
    pub fn new(
        gen: Box<dyn Fn(i64) -> Result<CylinderSet> + Send + Sync>,
        start: i64,
        class_c: MotClass,
        class_k: i64,
    ) -> Self {
        PatternFamily {
            gen,
            start,
            class_c,
            class_k,
        }
    }

    pub fn stratum(&self, e: i64) -> Result<CylinderSet> {
        (self.gen)(e)
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    pub fn pattern(&self) -> (&MotClass, i64) {
        (&self.class_c, self.class_k)
    }
}

impl fmt::Debug for PatternFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PatternFamily")
            .field("start", &self.start)
            .field("class_c", &self.class_c)
            .field("class_k", &self.class_k)
            .finish()
    }
}

// ---------------------------------------------------------------------------
// Set grammar parsing
// ---------------------------------------------------------------------------

/// Parse the condition grammar, e.g.
/// `ord(x0) >= 2 & coeff(x1, 0) != 0 | !(ord(x1) == 1)`.
///
/// Variable names are mapped to coordinates by the caller.
pub fn parse_condition(s: &str, vars: &[(&str, usize)]) -> Result<Cond> {
    let mut p = CondParser {
        s: s.as_bytes(),
        pos: 0,
        vars,
    };
    let c = p.parse_or()?;
    p.skip_ws();
    if p.pos != p.s.len() {
        return Err(Error::Parse(format!(
            "trailing input in condition at byte {}",
            p.pos
        )));
    }
    Ok(c)
}

struct CondParser<'a> {
    s: &'a [u8],
    pos: usize,
    vars: &'a [(&'a str, usize)],
}

impl<'a> CondParser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && (self.s[self.pos] as char).is_whitespace() {
            self.pos += 1;
        }
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.skip_ws();
        if self.s[self.pos..].starts_with(tok.as_bytes()) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &str) -> Result<()> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(Error::Parse(format!(
                "expected {tok:?} at byte {} of condition",
                self.pos
            )))
        }
    }

    fn parse_or(&mut self) -> Result<Cond> {
        let mut parts = vec![self.parse_and()?];
        while self.eat("|") {
            parts.push(self.parse_and()?);
        }
        Ok(Cond::or(parts))
    }

    fn parse_and(&mut self) -> Result<Cond> {
        let mut parts = vec![self.parse_unary()?];
        while self.eat("&") {
            parts.push(self.parse_unary()?);
        }
        Ok(Cond::and(parts))
    }

    fn parse_unary(&mut self) -> Result<Cond> {
        self.skip_ws();
        if self.eat("!") {
            return Ok(Cond::not(self.parse_unary()?));
        }
        if self.eat("(") {
            let inner = self.parse_or()?;
            self.expect(")")?;
            return Ok(inner);
        }
        self.parse_atom()
    }

    fn parse_int(&mut self) -> Result<i64> {
        self.skip_ws();
        let start = self.pos;
        if self.pos < self.s.len() && (self.s[self.pos] == b'-' || self.s[self.pos] == b'+') {
            self.pos += 1;
        }
        while self.pos < self.s.len() && (self.s[self.pos] as char).is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.s[start..self.pos])
            .ok()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::Parse(format!("expected integer at byte {start}")))
    }

    fn parse_rational(&mut self) -> Result<BigRational> {
        let n = self.parse_int()?;
        self.skip_ws();
        if self.pos < self.s.len() && self.s[self.pos] == b'/' {
            self.pos += 1;
            let d = self.parse_int()?;
            Ok(BigRational::new(BigInt::from(n), BigInt::from(d)))
        } else {
            Ok(BigRational::from_integer(BigInt::from(n)))
        }
    }

    fn parse_var(&mut self) -> Result<usize> {
        self.skip_ws();
        for (name, idx) in self.vars {
            if self.s[self.pos..].starts_with(name.as_bytes()) {
                // longest-match guard: next char must not be alphanumeric
                let end = self.pos + name.len();
                let next_alnum = self
                    .s
                    .get(end)
                    .map_or(false, |c| (*c as char).is_ascii_alphanumeric());
                if !next_alnum {
                    self.pos = end;
                    return Ok(*idx);
                }
            }
        }
        Err(Error::Parse(format!(
            "unknown variable at byte {} of condition",
            self.pos
        )))
    }

    fn parse_atom(&mut self) -> Result<Cond> {
        self.skip_ws();
        if self.eat("ord") {
            self.expect("(")?;
            let v = self.parse_var()?;
            self.expect(")")?;
            self.skip_ws();
            if self.eat(">=") {
                let e = self.parse_int()?;
                return Ok(Cond::Atom(Atom::OrdAtLeast(v, e)));
            }
            if self.eat("==") || self.eat("=") {
                let e = self.parse_int()?;
                return Ok(Cond::Atom(Atom::OrdExact(v, e)));
            }
            return Err(Error::Parse("expected >= or == after ord(..)".into()));
        }
        if self.eat("coeff") {
            self.expect("(")?;
            let v = self.parse_var()?;
            self.expect(",")?;
            let j = self.parse_int()?;
            self.expect(")")?;
            self.skip_ws();
            if self.eat("!=") {
                let c = self.parse_rational()?;
                if c.is_zero() {
                    return Ok(Cond::Atom(Atom::CoeffNonzero(v, j)));
                }
                return Ok(Cond::not(Cond::Atom(Atom::CoeffEq(v, j, c))));
            }
            if self.eat("==") || self.eat("=") {
                let c = self.parse_rational()?;
                return Ok(Cond::Atom(Atom::CoeffEq(v, j, c)));
            }
            return Err(Error::Parse("expected ==, = or != after coeff(..)".into()));
        }
        Err(Error::Parse(format!(
            "expected atom at byte {} of condition",
            self.pos
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::{parse_laurent, FieldTag, LaurentVector};

    fn lv(parts: &[&str]) -> LaurentVector {
        LaurentVector::new(
            parts
                .iter()
                .map(|s| parse_laurent(s, FieldTag::Rationals).unwrap())
                .collect(),
        )
        .unwrap()
    }

    fn ord_exact(i: usize, e: i64) -> Cond {
        Cond::Atom(Atom::OrdExact(i, e))
    }
    fn ord_at_least(i: usize, e: i64) -> Cond {
        Cond::Atom(Atom::OrdAtLeast(i, e))
    }

    /// Sets are equal when their jet classes agree at a common level and no
    /// sampled point separates them.
    fn sets_agree(a: &CylinderSet, b: &CylinderSet, samples: &[LaurentVector]) -> bool {
        let m = a.stable_level().max(b.stable_level());
        let ca = a.jet_class(m).unwrap();
        let cb = b.jet_class(m).unwrap();
        if ca != cb {
            return false;
        }
        samples
            .iter()
            .all(|p| a.membership(p).unwrap() == b.membership(p).unwrap())
    }

    #[test]
    fn stable_level_examples() {
        assert_eq!(CylinderSet::b_n(3).stable_level(), 2);
        assert_eq!(CylinderSet::full(2).stable_level(), 0);
        let c = CylinderSet::new(
            1,
            0,
            Cond::Atom(Atom::CoeffEq(0, 3, BigRational::from_integer(5.into()))),
        )
        .unwrap();
        assert_eq!(c.stable_level(), 3);
    }

    #[test]
    fn shift_examples() {
        // {ord(x) >= -2} with N = 2 becomes the full arc space
        let a = CylinderSet::new(1, 2, ord_at_least(0, -2)).unwrap();
        let s = a.shift(2).unwrap();
        assert_eq!(s.pole_bound(), 0);
        assert_eq!(s.jet_class(0).unwrap(), MotClass::l());
        // B_n shifted by 1 is the ord >= n+1 set
        let b2 = CylinderSet::b_n(2).shift(1).unwrap();
        assert!(sets_agree(
            &b2,
            &CylinderSet::b_n(3),
            &[lv(&["t^3"]), lv(&["t^2"]), lv(&["1"])]
        ));
        // {coeff(x,-1) != 0} shifted by 1
        let c = CylinderSet::new(1, 1, Cond::Atom(Atom::CoeffNonzero(0, -1))).unwrap();
        let cs = c.shift(1).unwrap();
        assert_eq!(
            cs.cond(),
            &Cond::Atom(Atom::CoeffNonzero(0, 0)),
            "index moves to 0"
        );
    }

    #[test]
    fn shift_membership_equivariance() {
        let a = CylinderSet::new(
            2,
            1,
            Cond::and(vec![ord_at_least(0, -1), Cond::Atom(Atom::CoeffNonzero(1, 0))]),
        )
        .unwrap();
        let s = a.shift(1).unwrap();
        for p in [
            lv(&["t^-1 + 3", "1 + t"]),
            lv(&["t^-1", "t"]),
            lv(&["5", "2 + t^2"]),
        ] {
            let direct = a.membership(&p).unwrap();
            let shifted = s.membership(&p.t_shift(1)).unwrap();
            assert_eq!(direct, shifted);
        }
    }

    #[test]
    fn jet_class_examples() {
        // {ord(x) == 2} in A^1 at level 2: slots a0 = a1 = 0, a2 != 0
        let a = CylinderSet::new(1, 0, ord_exact(0, 2)).unwrap();
        let lm1 = MotClass::l() - MotClass::one();
        assert_eq!(a.jet_class(2).unwrap(), lm1);
        // full arc space at level 0
        assert_eq!(CylinderSet::full(1).jet_class(0).unwrap(), MotClass::l());
        // {ord(x)>=1 and coeff(y,0) != 0} in A^2 at level 1: (L-1) * L^2
        let c = CylinderSet::new(
            2,
            0,
            Cond::and(vec![ord_at_least(0, 1), Cond::Atom(Atom::CoeffNonzero(1, 0))]),
        )
        .unwrap();
        let expected = (MotClass::l() - MotClass::one()).mul(&MotClass::l_pow(2));
        assert_eq!(c.jet_class(1).unwrap(), expected);
    }

    #[test]
    fn jet_class_is_level_consistent() {
        let sets = [
            CylinderSet::b_n(2),
            CylinderSet::new(1, 0, ord_exact(0, 1)).unwrap(),
            CylinderSet::new(
                2,
                0,
                Cond::or(vec![ord_at_least(0, 2), Cond::Atom(Atom::CoeffNonzero(1, 1))]),
            )
            .unwrap(),
        ];
        for a in &sets {
            let m = a.stable_level();
            let base = a.jet_class(m).unwrap();
            for extra in 1..=3i64 {
                let up = a.jet_class(m + extra).unwrap();
                let expected = base.mul(&MotClass::l_pow(a.dim() as i64 * extra));
                assert_eq!(up, expected, "level consistency failed at m+{extra}");
            }
        }
    }

    #[test]
    fn boolean_examples() {
        let b1 = CylinderSet::b_n(1);
        let b2 = CylinderSet::b_n(2);
        let b3 = CylinderSet::b_n(3);
        let full = CylinderSet::full(1);
        let samples = [lv(&["1 + t"]), lv(&["t"]), lv(&["t^2"]), lv(&["t^3 + t^4"])];
        // B1 union complement = full
        let u = b1.union(&full.difference(&b1).unwrap()).unwrap();
        assert!(sets_agree(&u, &full, &samples));
        // B2 minus B3 = {ord == 2}
        let d = b2.difference(&b3).unwrap();
        let oe2 = CylinderSet::new(1, 0, ord_exact(0, 2)).unwrap();
        assert!(sets_agree(&d, &oe2, &samples));
        // B1 cap B2 = B2
        let i = b1.intersect(&b2).unwrap();
        assert!(sets_agree(&i, &b2, &samples));
    }

    #[test]
    fn membership_examples() {
        let a = CylinderSet::new(1, 0, ord_at_least(0, 2)).unwrap();
        assert!(a.membership(&lv(&["t^3"])).unwrap());
        assert!(!CylinderSet::b_n(1).membership(&lv(&["1 + t"])).unwrap());
        let c = CylinderSet::new(2, 1, Cond::Atom(Atom::CoeffNonzero(0, -1))).unwrap();
        assert!(c.membership(&lv(&["t^-1", "1"])).unwrap());
    }

    #[test]
    fn membership_precision_guard() {
        let a = CylinderSet::new(1, 0, ord_at_least(0, 5)).unwrap();
        let p = LaurentVector::new(vec![parse_laurent("O(t^3)", FieldTag::Rationals).unwrap()])
            .unwrap();
        assert!(matches!(
            a.membership(&p),
            Err(Error::InsufficientPrecision(_))
        ));
    }

    #[test]
    fn linear_relation_classes() {
        // one independent linear relation cuts one factor of L
        let eq = LinearEq::new(
            vec![
                (0, 0, BigRational::from_integer(1.into())),
                (0, 1, BigRational::from_integer(2.into())),
            ],
            BigRational::from_integer(3.into()),
        );
        let a = CylinderSet::new(1, 0, Cond::Atom(Atom::Linear(eq.clone()))).unwrap();
        assert_eq!(a.jet_class(1).unwrap(), MotClass::l());
        // adding the same relation twice changes nothing
        let twice = CylinderSet::new(
            1,
            0,
            Cond::and(vec![
                Cond::Atom(Atom::Linear(eq.clone())),
                Cond::Atom(Atom::Linear(eq)),
            ]),
        )
        .unwrap();
        assert_eq!(twice.jet_class(1).unwrap(), MotClass::l());
    }

    #[test]
    fn inconsistent_system_is_empty() {
        let a = CylinderSet::new(
            1,
            0,
            Cond::and(vec![
                Cond::Atom(Atom::CoeffEq(0, 0, BigRational::from_integer(1.into()))),
                Cond::Atom(Atom::CoeffEq(0, 0, BigRational::from_integer(2.into()))),
            ]),
        )
        .unwrap();
        assert!(a.is_empty_set().unwrap());
    }

    #[test]
    fn condition_grammar() {
        let vars = [("x0", 0usize), ("x1", 1usize)];
        let c = parse_condition("ord(x0) >= 2 & coeff(x1, 0) != 0", &vars).unwrap();
        let set = CylinderSet::new(2, 0, c).unwrap();
        assert!(set.membership(&lv(&["t^2", "1 + t"])).unwrap());
        assert!(!set.membership(&lv(&["t", "1"])).unwrap());
        let c2 = parse_condition("!(ord(x0) == 1) | coeff(x0, 0) == 1/2", &vars).unwrap();
        let set2 = CylinderSet::new(2, 0, c2).unwrap();
        assert!(set2.membership(&lv(&["1 + t", "0"])).unwrap());
        assert!(!set2.membership(&lv(&["t", "0"])).unwrap());
    }

    #[test]
    fn pole_bound_validation() {
        assert!(CylinderSet::new(1, 0, Cond::Atom(Atom::CoeffNonzero(0, -1))).is_err());
        assert!(CylinderSet::new(1, 1, Cond::Atom(Atom::CoeffNonzero(0, -1))).is_ok());
    }
}
