//! Motivic volumes: the stable-set measure, its extension to bounded sets of
//! `A^d((t))` through the shift isomorphisms, weighted integrals against a
//! monomial density, sigma-additive sums of geometric stratum families, and
//! the syntactic translate/scaling actions used by the invariance checks.

use num_rational::BigRational;
use num_traits::Zero;

use crate::cylinder::{Atom, Cond, CylinderSet, LinearEq, PatternFamily};
use crate::laurent::{Coeff, LaurentScalar, LaurentVector, OrdVal};
use crate::mpoly::{ratfn_det, MPoly, RatFn};
use crate::ring::{geometric_sum, MotClass};
use crate::{Error, Result};

/// Default stratification cutoff for weighted integrals; tails must match a
/// geometric pattern on the last four strata of the window.
pub const DEFAULT_STRATUM_CUTOFF: i64 = 6;

// ---------------------------------------------------------------------------
// Stable and bounded measures
// ---------------------------------------------------------------------------

/// Volume of a stable set at pole bound 0: `[pi_m(A)] L^{-m d}` for any
/// level m at least the stable level.
pub fn measure_stable(a: &CylinderSet) -> Result<MotClass> {
    if a.pole_bound() != 0 {
        return Err(Error::Domain(
            "measure_stable expects pole bound 0; use measure_bounded".into(),
        ));
    }
    let m = a.stable_level();
    let class = a.jet_class(m)?;
    Ok(class.mul(&MotClass::l_pow(-m * a.dim() as i64)))
}

/// Volume of a bounded set: `L^{N d} * measure_stable(S_N(A))` with
/// N the pole bound.
pub fn measure_bounded(a: &CylinderSet) -> Result<MotClass> {
    measure_bounded_at(a, a.pole_bound())
}

/// Same, computed through any admissible pole bound `n >= pole_bound(A)`;
/// the result does not depend on the choice.
pub fn measure_bounded_at(a: &CylinderSet, n: i64) -> Result<MotClass> {
    if n < a.pole_bound() {
        return Err(Error::Domain(format!(
            "pole bound {n} below the set's bound {}",
            a.pole_bound()
        )));
    }
    let relabeled = a.with_pole_bound(n)?;
    let shifted = relabeled.shift(n)?;
    let inner = measure_stable(&shifted)?;
    Ok(MotClass::l_pow(n * a.dim() as i64).mul(&inner))
}

/// Order of the Jacobian ideal of the shift morphism `x_i -> t^N u_i` on
/// d coordinates, computed through the symbolic determinant `det(t^N Id)`.
pub fn shift_jacobian_order(n: i64, d: usize) -> Result<i64> {
    if n < 0 || d == 0 {
        return Err(Error::Domain("shift order needs N >= 0, d >= 1".into()));
    }
    let field = crate::laurent::FieldTag::Rationals;
    let tn = LaurentScalar::t_pow(field, n);
    // the coordinate form of the shift: h_i = t^N x_i
    let comps: Vec<RatFn> = (0..d)
        .map(|i| {
            RatFn::from_poly(
                MPoly::var(d, i, field)
                    .scale(&tn)
                    .expect("same field"),
            )
        })
        .collect();
    let jac: Vec<Vec<RatFn>> = comps
        .iter()
        .map(|h| (0..d).map(|j| h.derivative(j).expect("poly")).collect())
        .collect();
    let det = ratfn_det(&jac)?;
    // the determinant is the constant t^{Nd}
    let unit = LaurentVector::new(vec![LaurentScalar::one(field); d])?;
    let value = det.eval(&unit)?;
    match value.ord()? {
        OrdVal::Finite(v) => {
            debug_assert_eq!(v, n * d as i64);
            Ok(v)
        }
        OrdVal::Infinite => Err(Error::Domain("degenerate shift Jacobian".into())),
    }
}

// ---------------------------------------------------------------------------
// Weight specifications
// ---------------------------------------------------------------------------

/// The density of a form `omega = g dx_1 ... dx_d` in the restricted class
/// the engine integrates exactly: a monomial `t^{t_order} * prod x_i^{e_i}`
/// with integer (possibly negative) exponents.  The weight of an arc is
/// `L^{-ord_t(g o gamma)}`.
#[derive(Clone, PartialEq, Debug)]
pub struct WeightSpec {
    exponents: Vec<i64>,
    t_order: i64,
}

impl WeightSpec {
    pub fn trivial(d: usize) -> Self {
        WeightSpec {
            exponents: vec![0; d],
            t_order: 0,
        }
    }

    pub fn monomial(exponents: Vec<i64>, t_order: i64) -> Self {
        WeightSpec { exponents, t_order }
    }

    /// Single coordinate `x_i`.
    pub fn coordinate(d: usize, i: usize) -> Self {
        let mut exponents = vec![0; d];
        exponents[i] = 1;
        WeightSpec {
            exponents,
            t_order: 0,
        }
    }

    /// Extract a monomial density from a polynomial; anything with two or
    /// more terms is outside the supported language.
    pub fn from_poly(g: &MPoly) -> Result<Self> {
        if g.is_known_zero() {
            return Err(Error::Domain("zero density".into()));
        }
        match g.as_monomial() {
            Some((mono, c)) => {
                let t_order = match c.ord()? {
                    OrdVal::Finite(v) => v,
                    OrdVal::Infinite => return Err(Error::Domain("zero density".into())),
                };
                Ok(WeightSpec {
                    exponents: mono.iter().map(|e| *e as i64).collect(),
                    t_order,
                })
            }
            None => Err(Error::UnsupportedConstraint(
                "only monomial densities are integrable in the restricted language".into(),
            )),
        }
    }

    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    pub fn exponents(&self) -> &[i64] {
        &self.exponents
    }

    pub fn t_order(&self) -> i64 {
        self.t_order
    }

    pub fn is_trivial(&self) -> bool {
        self.t_order == 0 && self.exponents.iter().all(|e| *e == 0)
    }

    /// Multiplicative inverse density (weight exponent flips sign).
    pub fn inverse(&self) -> WeightSpec {
        WeightSpec {
            exponents: self.exponents.iter().map(|e| -e).collect(),
            t_order: -self.t_order,
        }
    }

    /// `ord_t(g o gamma)` at a concrete point.
    pub fn ord_at(&self, point: &LaurentVector) -> Result<OrdVal> {
        let mut acc = self.t_order;
        for (i, e) in self.exponents.iter().enumerate() {
            if *e == 0 {
                continue;
            }
            match point.entry(i).ord()? {
                OrdVal::Finite(v) => acc += e * v,
                OrdVal::Infinite => return Ok(OrdVal::Infinite),
            }
        }
        Ok(OrdVal::Finite(acc))
    }

    /// The substituted density of the shift identity:
    /// `g~(t^N x) = g(x)`, so `g~ = t^{-N deg} g`.
    pub fn shift_substituted(&self, n: i64) -> WeightSpec {
        let deg: i64 = self.exponents.iter().sum();
        WeightSpec {
            exponents: self.exponents.clone(),
            t_order: self.t_order - n * deg,
        }
    }
}

// ---------------------------------------------------------------------------
// Order partition
// ---------------------------------------------------------------------------

/// Strata `{ ord_t(g o gamma) = e }` of a set, for a monomial density whose
/// exponents do not mix signs, plus the residual where the order escapes the
/// window.
pub fn ord_partition(
    g: &WeightSpec,
    a: &CylinderSet,
    e_max: i64,
) -> Result<(Vec<(i64, CylinderSet)>, Option<CylinderSet>)> {
    if g.dim() != a.dim() {
        return Err(Error::Domain("weight dimension mismatch".into()));
    }
    let pos = g.exponents.iter().any(|e| *e > 0);
    let neg = g.exponents.iter().any(|e| *e < 0);
    if pos && neg {
        return Err(Error::UnsupportedConstraint(
            "mixed-sign monomial densities are not stratifiable in the restricted language".into(),
        ));
    }
    let coords: Vec<(usize, i64)> = g
        .exponents
        .iter()
        .enumerate()
        .filter(|(_, e)| **e != 0)
        .map(|(i, e)| (i, *e))
        .collect();
    if coords.is_empty() {
        // constant density: a single stratum at e = t_order
        return Ok((vec![(g.t_order, a.clone())], None));
    }
    let n = a.pole_bound();
    // per-coordinate enumeration cap so that every stratum with
    // |e - t_order| within the window is complete
    let total_abs: i64 = coords.iter().map(|(_, e)| e.abs()).sum();
    let cap = e_max.abs() + n * total_abs + a.stable_level() + g.t_order.abs() + 4;
    let mut tuples: Vec<Vec<(usize, i64)>> = vec![Vec::new()];
    for (i, _) in &coords {
        let mut next = Vec::new();
        for t in &tuples {
            for o in -n..=cap {
                let mut t2 = t.clone();
                t2.push((*i, o));
                next.push(t2);
            }
        }
        tuples = next;
        if tuples.len() > 2_000_000 {
            return Err(Error::UnsupportedConstraint(
                "order partition enumeration too large".into(),
            ));
        }
    }
    // window of orders that the enumeration provably covers; it always
    // reaches past the set's stable level so no constrained stratum with
    // mass is missed, and past e_max so the tail can be certified
    let (window_lo, window_hi) = if neg {
        (g.t_order - total_abs * cap, g.t_order + total_abs * n)
    } else {
        (g.t_order - total_abs * n, g.t_order + total_abs * cap)
    };
    let level_reach = total_abs * (a.stable_level() + 2) + g.t_order.abs();
    let (win_lo, win_hi) = if neg {
        (
            window_lo.max(-(e_max.abs().max(level_reach) + n * total_abs + 1)),
            window_hi,
        )
    } else {
        (window_lo, window_hi.min(e_max.max(level_reach)))
    };
    let win_lo = win_lo.min(win_hi);
    let mut strata: Vec<(i64, CylinderSet)> = Vec::new();
    let mut covered: Vec<Cond> = Vec::new();
    for e in win_lo..=win_hi {
        let mut parts = Vec::new();
        for t in &tuples {
            let order: i64 = g.t_order
                + t.iter()
                    .map(|(i, o)| g.exponents[*i] * o)
                    .sum::<i64>();
            if order == e {
                parts.push(Cond::and(
                    t.iter()
                        .map(|(i, o)| Cond::Atom(Atom::OrdExact(*i, *o)))
                        .collect(),
                ));
            }
        }
        let cond = Cond::disjoint_or(parts);
        covered.push(cond.clone());
        let stratum = CylinderSet::new(a.dim(), n, cond)?.intersect(a)?;
        strata.push((e, stratum));
    }
    // the enumerated strata exhaust the box of order profiles up to `cap`,
    // so the residual is exactly "some constrained coordinate has ord > cap"
    let residual_cond = Cond::or(
        coords
            .iter()
            .map(|(i, _)| Cond::Atom(Atom::OrdAtLeast(*i, cap + 1)))
            .collect(),
    );
    let residual = CylinderSet::new(a.dim(), n, residual_cond)?.intersect(a)?;
    let residual = if residual.is_empty_set()? {
        None
    } else {
        Some(residual)
    };
    Ok((strata, residual))
}

// ---------------------------------------------------------------------------
// Weighted integration
// ---------------------------------------------------------------------------

/// A measure computation with its audit trail: the closed-form value, the
/// per-stratum decomposition, and the tail law when a geometric tail was
/// summed in closed form.
#[derive(Clone, Debug)]
pub struct MeasureResult {
    pub value: MotClass,
    pub decomposition: Vec<(String, MotClass)>,
    pub tail: Option<(String, MotClass)>,
}

impl MeasureResult {
    pub fn plain(value: MotClass) -> Self {
        MeasureResult {
            decomposition: vec![("total".into(), value.clone())],
            tail: None,
            value,
        }
    }
}

/// Fit a geometric law on a stratum window: the nonzero entries must be
/// evenly spaced with a constant per-step ratio `L^{-r}`.  Returns
/// `Some((r, last nonzero value))` for a contracting law, `None` when the
/// window is identically zero, and an error when the entries are not
/// geometric or do not contract.
fn fit_geometric_ratio(values: &[MotClass]) -> Result<Option<(i64, MotClass)>> {
    let nonzero: Vec<(usize, &MotClass)> = values
        .iter()
        .enumerate()
        .filter(|(_, v)| !v.is_zero())
        .collect();
    if nonzero.is_empty() {
        return Ok(None);
    }
    if nonzero.len() == 1 {
        return Err(Error::PatternMismatch(
            "a single nonzero stratum in the tail window cannot certify a law".into(),
        ));
    }
    let gap = nonzero[1].0 - nonzero[0].0;
    let mut ratio: Option<i64> = None;
    for w in nonzero.windows(2) {
        if w[1].0 - w[0].0 != gap {
            return Err(Error::PatternMismatch(
                "tail strata are not evenly spaced".into(),
            ));
        }
        let r = match (w[0].1.vdim(), w[1].1.vdim()) {
            (Some(a), Some(b)) => a - b,
            _ => unreachable!("entries are nonzero"),
        };
        if w[1].1.mul(&MotClass::l_pow(r)) != w[0].1.clone() {
            return Err(Error::PatternMismatch(format!(
                "tail strata are not geometric: {} then {}",
                w[0].1, w[1].1
            )));
        }
        match ratio {
            None => ratio = Some(r),
            Some(prev) if prev == r => {}
            Some(prev) => {
                return Err(Error::PatternMismatch(format!(
                    "tail ratio changes from L^-{prev} to L^-{r}"
                )));
            }
        }
    }
    let r = ratio.expect("at least two nonzero entries");
    if r < 1 {
        return Err(Error::Divergence(format!(
            "stratum terms do not tend to zero (ratio L^{})",
            -r
        )));
    }
    Ok(Some((r, nonzero.last().unwrap().1.clone())))
}

/// The integrand of a weighted integral: a single bounded set or a declared
/// geometric family.
pub enum Integrand<'a> {
    Set(&'a CylinderSet),
    Family(&'a PatternFamily),
}

/// `integral over A of L^{-ord_t(g o gamma)} d mu_a`, with stratification by
/// the order of the density, exact closed-form tail, and audit trail.
pub fn integrate_weighted(g: &WeightSpec, a: Integrand<'_>) -> Result<MeasureResult> {
    match a {
        Integrand::Set(set) => integrate_weighted_set(g, set, DEFAULT_STRATUM_CUTOFF),
        Integrand::Family(family) => integrate_weighted_family(g, family),
    }
}

pub fn integrate_weighted_set(
    g: &WeightSpec,
    a: &CylinderSet,
    e_max: i64,
) -> Result<MeasureResult> {
    if g.is_trivial() {
        return Ok(MeasureResult::plain(measure_bounded(a)?));
    }
    let (strata, residual) = ord_partition(g, a, e_max)?;
    let mut decomposition = Vec::new();
    let mut total = MotClass::zero();
    let mut terms = Vec::new();
    for (e, stratum) in &strata {
        let mu = measure_bounded(stratum)?;
        let term = MotClass::l_pow(-e).mul(&mu);
        decomposition.push((format!("ord={e}"), term.clone()));
        total = total.add(&term);
        terms.push((*e, term));
    }
    let tail = match residual {
        None => None,
        Some(_) => {
            // the open end is at high e for nonnegative exponents, low e for
            // nonpositive ones
            let neg = g.exponents.iter().any(|e| *e < 0);
            let window: Vec<MotClass> = if neg {
                terms.iter().take(4).map(|(_, t)| t.clone()).rev().collect()
            } else {
                terms
                    .iter()
                    .rev()
                    .take(4)
                    .rev()
                    .map(|(_, t)| t.clone())
                    .collect()
            };
            if window.len() < 4 {
                return Err(Error::PatternMismatch(
                    "not enough strata to certify the tail".into(),
                ));
            }
            match fit_geometric_ratio(&window)? {
                None => {
                    return Err(Error::PatternMismatch(
                        "strata vanish in the window but the residual set is nonempty".into(),
                    ))
                }
                Some((r, last_nonzero)) => {
                    // the tail continues the law past the last nonzero
                    // stratum: sum_{n >= 1} T L^{-r n} = geometric_sum(T, r, 1)
                    let tail_value = geometric_sum(&last_nonzero, r, 1)?;
                    total = total.add(&tail_value);
                    let open_end = if neg {
                        terms.first().expect("nonempty").0 - 1
                    } else {
                        terms.last().expect("nonempty").0 + 1
                    };
                    let label =
                        format!("geometric tail from ord={open_end} with ratio L^-{r}");
                    Some((label, tail_value))
                }
            }
        }
    };
    Ok(MeasureResult {
        value: total,
        decomposition,
        tail,
    })
}

fn integrate_weighted_family(g: &WeightSpec, f: &PatternFamily) -> Result<MeasureResult> {
    let mut decomposition = Vec::new();
    let mut prefix = Vec::new();
    for e in f.start()..f.start() + 4 {
        let stratum = f.stratum(e)?;
        let r = integrate_weighted_set(g, &stratum, DEFAULT_STRATUM_CUTOFF)?;
        decomposition.push((format!("stratum {e}"), r.value.clone()));
        prefix.push(r.value);
    }
    let fitted = fit_geometric_ratio(&prefix)?;
    let mut total = MotClass::zero();
    for v in &prefix {
        total = total.add(v);
    }
    let tail = match fitted {
        None => None,
        Some((r, last_nonzero)) => {
            let tail_value = geometric_sum(&last_nonzero, r, 1)?;
            total = total.add(&tail_value);
            Some((format!("geometric tail with ratio L^-{r}"), tail_value))
        }
    };
    Ok(MeasureResult {
        value: total,
        decomposition,
        tail,
    })
}

/// The shift form of the weighted integral:
/// `int_A L^{-ord(g)} dmu = L^{Nd} int_{S_N A} L^{-ord(g~)}` with
/// `g~(t^N x) = g(x)`.  Returns whether both sides agree exactly.
pub fn weighted_shift_consistency(g: &WeightSpec, a: &CylinderSet, n: i64) -> Result<bool> {
    if n < a.pole_bound() {
        return Err(Error::Domain(
            "shift level must cover the pole bound".into(),
        ));
    }
    let lhs = integrate_weighted_set(g, a, DEFAULT_STRATUM_CUTOFF)?.value;
    let shifted = a.with_pole_bound(n)?.shift(n)?;
    let gt = g.shift_substituted(n);
    let inner = integrate_weighted_set(&gt, &shifted, DEFAULT_STRATUM_CUTOFF)?.value;
    let rhs = MotClass::l_pow(n * a.dim() as i64).mul(&inner);
    Ok(lhs == rhs)
}

// ---------------------------------------------------------------------------
// Sigma-summation of pattern families
// ---------------------------------------------------------------------------

/// Measure of a countable disjoint union with declared geometric law
/// `mu(stratum e) = c * L^{-k e}`: the law is verified on the first four
/// strata (including pairwise disjointness) and the tail is summed in closed
/// form; a non-contracting law is a divergence error.
pub fn measure_sigma(f: &PatternFamily) -> Result<MotClass> {
    let (c, k) = f.pattern();
    if k < 1 {
        return Err(Error::Divergence(format!(
            "declared pattern ratio L^{} does not tend to zero",
            -k
        )));
    }
    let mut prefix_sets = Vec::new();
    let mut prefix_sum = MotClass::zero();
    for e in f.start()..f.start() + 4 {
        let stratum = f.stratum(e)?;
        let mu = measure_bounded(&stratum)?;
        let expected = c.mul(&MotClass::l_pow(-k * e));
        if mu != expected {
            return Err(Error::PatternMismatch(format!(
                "stratum {e} has measure {mu}, declared {expected}"
            )));
        }
        prefix_sets.push(stratum);
        prefix_sum = prefix_sum.add(&mu);
    }
    for i in 0..prefix_sets.len() {
        for j in i + 1..prefix_sets.len() {
            let inter = prefix_sets[i].intersect(&prefix_sets[j])?;
            if !inter.is_empty_set()? {
                return Err(Error::PatternMismatch(format!(
                    "strata {} and {} overlap",
                    f.start() + i as i64,
                    f.start() + j as i64
                )));
            }
        }
    }
    let tail = geometric_sum(c, k, f.start() + 4)?;
    let total = prefix_sum.add(&tail);
    // closed form must agree with prefix + tail
    let direct = geometric_sum(c, k, f.start())?;
    debug_assert_eq!(total, direct);
    Ok(total)
}

// ---------------------------------------------------------------------------
// Affine coordinate actions (translations and unit scalings)
// ---------------------------------------------------------------------------

/// The image of a cylinder set under the coordinate-wise affine map
/// `x_i -> u_i * x_i + v_i`, with exact nonzero `u_i` and exact `v_i`;
/// membership conditions are rewritten inside the restricted language
/// (order shifts, coefficient equations, and linear relations).
pub fn affine_image(a: &CylinderSet, maps: &[(LaurentScalar, LaurentScalar)]) -> Result<CylinderSet> {
    if maps.len() != a.dim() {
        return Err(Error::Domain("affine map dimension mismatch".into()));
    }
    let mut scale_ord = Vec::new();
    for (u, _) in maps {
        if u.precision().is_some() {
            return Err(Error::InsufficientPrecision(
                "affine scaling must be exact".into(),
            ));
        }
        match u.ord()? {
            OrdVal::Finite(k) => scale_ord.push(k),
            OrdVal::Infinite => {
                return Err(Error::DivisionByZero("zero scaling in affine map".into()))
            }
        }
    }
    // new pole bound: coordinate floors of u_i * x_i + v_i
    let n = a.pole_bound();
    let mut new_bound = 0i64;
    for (i, (_, v)) in maps.iter().enumerate() {
        let mut floor = scale_ord[i] - n;
        if let Ok(OrdVal::Finite(vv)) = v.ord() {
            floor = floor.min(vv);
        }
        new_bound = new_bound.max(-floor);
    }
    // the preimage ambient's implicit pole bound is part of the set
    let mut parts = vec![a.cond().clone()];
    for i in 0..a.dim() {
        parts.push(Cond::Atom(Atom::OrdAtLeast(i, -n)));
    }
    let cond = rewrite_cond(&Cond::and(parts), a, maps, &scale_ord, new_bound)?;
    CylinderSet::new(a.dim(), new_bound, cond)
}

/// Translate a set by a vector: `A + v`.
pub fn translate(a: &CylinderSet, v: &LaurentVector) -> Result<CylinderSet> {
    if v.dim() != a.dim() {
        return Err(Error::Domain("translation dimension mismatch".into()));
    }
    let maps: Vec<(LaurentScalar, LaurentScalar)> = v
        .entries()
        .iter()
        .map(|vi| (LaurentScalar::one(v.field()), vi.clone()))
        .collect();
    affine_image(a, &maps)
}

/// Scale coordinates by exact nonzero units/monomials: `x_i -> u_i x_i`.
pub fn scale_coords(a: &CylinderSet, units: &[LaurentScalar]) -> Result<CylinderSet> {
    let field = units
        .first()
        .map(|u| u.field())
        .ok_or_else(|| Error::Domain("empty scaling".into()))?;
    let maps: Vec<(LaurentScalar, LaurentScalar)> = units
        .iter()
        .map(|u| (u.clone(), LaurentScalar::zero(field)))
        .collect();
    affine_image(a, &maps)
}

/// Coordinate map data for preimages: `x'_i = (num/den) * w_i + v`, with
/// exact `num`, `den`, `v`.
#[derive(Clone, Debug)]
pub struct AffineMap {
    pub num: LaurentScalar,
    pub den: LaurentScalar,
    pub shift: LaurentScalar,
}

impl AffineMap {
    pub fn identity(field: crate::laurent::FieldTag) -> AffineMap {
        AffineMap {
            num: LaurentScalar::one(field),
            den: LaurentScalar::one(field),
            shift: LaurentScalar::zero(field),
        }
    }

    pub fn scale(u: LaurentScalar) -> AffineMap {
        let field = u.field();
        AffineMap {
            num: u,
            den: LaurentScalar::one(field),
            shift: LaurentScalar::zero(field),
        }
    }

    pub fn scale_inv(u: LaurentScalar) -> AffineMap {
        let field = u.field();
        AffineMap {
            num: LaurentScalar::one(field),
            den: u,
            shift: LaurentScalar::zero(field),
        }
    }

    pub fn shift(v: LaurentScalar) -> AffineMap {
        let field = v.field();
        AffineMap {
            num: LaurentScalar::one(field),
            den: LaurentScalar::one(field),
            shift: v,
        }
    }

    fn ratio_ord(&self) -> Result<i64> {
        let n = match self.num.ord()? {
            OrdVal::Finite(v) => v,
            OrdVal::Infinite => return Err(Error::DivisionByZero("zero scaling".into())),
        };
        let d = match self.den.ord()? {
            OrdVal::Finite(v) => v,
            OrdVal::Infinite => return Err(Error::DivisionByZero("zero denominator".into())),
        };
        Ok(n - d)
    }

    /// Exact coefficient of `t^m` in `num/den`.
    fn ratio_coeff(&self, m: i64) -> Result<BigRational> {
        let r = self.ratio_ord()?;
        if m < r {
            return Ok(BigRational::zero());
        }
        let den_ord = match self.den.ord()? {
            OrdVal::Finite(v) => v,
            OrdVal::Infinite => unreachable!(),
        };
        let working = ((m - r) + 4).max(4) as usize;
        let inv = self.den.inv_with(working)?;
        // sum over the (finite) support of num
        let num_ord = match self.num.ord()? {
            OrdVal::Finite(v) => v,
            OrdVal::Infinite => unreachable!(),
        };
        let mut acc = BigRational::zero();
        let mut k = num_ord;
        loop {
            let nk = match self.num.coeff_at(k) {
                Ok(c) => c,
                Err(_) => break,
            };
            if !nk.is_zero() {
                let j = m - k;
                if j >= -den_ord {
                    let ij = inv.coeff_at(j)?;
                    acc += rat_of(&nk)? * rat_of(&ij)?;
                }
            }
            k += 1;
            if k > m + den_ord.abs() + num_ord.abs() + 64 {
                break;
            }
        }
        Ok(acc)
    }
}

/// The preimage `{ w : F(w) in A }` of a cylinder set under the
/// coordinate-wise affine map `F_i(w) = (num_i/den_i) w_i + v_i`.  All atom
/// kinds of the restricted language rewrite into it (order conditions become
/// coefficient equations, coefficient conditions become linear relations),
/// so the preimage is again a cylinder set.
pub fn affine_preimage(a: &CylinderSet, maps: &[AffineMap]) -> Result<CylinderSet> {
    if maps.len() != a.dim() {
        return Err(Error::Domain("affine map dimension mismatch".into()));
    }
    let n = a.pole_bound();
    let mut r_ords = Vec::new();
    let mut floors = Vec::new();
    for m in maps {
        if m.num.precision().is_some() || m.den.precision().is_some() || m.shift.precision().is_some()
        {
            return Err(Error::InsufficientPrecision(
                "affine preimage needs exact map data".into(),
            ));
        }
        let r = m.ratio_ord()?;
        r_ords.push(r);
        let mut img_floor = -n;
        if let Ok(OrdVal::Finite(v)) = m.shift.ord() {
            img_floor = img_floor.min(v);
        }
        floors.push(img_floor - r);
    }
    let new_bound = floors.iter().map(|f| (-f).max(0)).max().unwrap_or(0);
    let pre = Preimage {
        maps,
        r_ords: &r_ords,
        new_bound,
    };
    // the implicit ambient of A: every image coordinate has ord >= -N
    let mut parts = vec![pre.rewrite(a.cond())?];
    for i in 0..a.dim() {
        parts.push(pre.ord_at_least(i, -n)?);
    }
    CylinderSet::new(a.dim(), new_bound, Cond::and(parts))
}

struct Preimage<'a> {
    maps: &'a [AffineMap],
    r_ords: &'a [i64],
    new_bound: i64,
}

impl<'a> Preimage<'a> {
    /// Lowest index at which `F_i(w)` can have a nonzero coefficient.
    fn image_floor(&self, i: usize) -> i64 {
        let mut f = self.r_ords[i] - self.new_bound;
        if let Ok(OrdVal::Finite(v)) = self.maps[i].shift.ord() {
            f = f.min(v);
        }
        f
    }

    /// The linear equation `coeff_j(F_i(w)) = rhs`.
    fn coeff_eq(&self, i: usize, j: i64, rhs: BigRational) -> Result<LinearEq> {
        let m = &self.maps[i];
        let mut terms = Vec::new();
        for l in -self.new_bound..=(j - self.r_ords[i]) {
            let c = m.ratio_coeff(j - l)?;
            if !c.is_zero() {
                terms.push((i, l, c));
            }
        }
        let vj = rat_of(&m.shift.coeff_at(j)?)?;
        Ok(LinearEq::new(terms, rhs - vj))
    }

    fn ord_at_least(&self, i: usize, e: i64) -> Result<Cond> {
        let mut parts = Vec::new();
        for j in self.image_floor(i)..e {
            parts.push(Cond::Atom(Atom::Linear(self.coeff_eq(
                i,
                j,
                BigRational::zero(),
            )?)));
        }
        Ok(Cond::and(parts))
    }

    fn rewrite(&self, cond: &Cond) -> Result<Cond> {
        Ok(match cond {
            Cond::True => Cond::True,
            Cond::False => Cond::False,
            Cond::Atom(atom) => self.rewrite_atom(atom)?,
            Cond::And(cs) => {
                Cond::and(cs.iter().map(|c| self.rewrite(c)).collect::<Result<_>>()?)
            }
            Cond::Or(cs) => {
                Cond::or(cs.iter().map(|c| self.rewrite(c)).collect::<Result<_>>()?)
            }
            Cond::DisjointOr(cs) => Cond::disjoint_or(
                cs.iter().map(|c| self.rewrite(c)).collect::<Result<_>>()?,
            ),
            Cond::Not(c) => Cond::not(self.rewrite(c)?),
        })
    }

    fn rewrite_atom(&self, atom: &Atom) -> Result<Cond> {
        Ok(match atom {
            Atom::OrdAtLeast(i, e) => self.ord_at_least(*i, *e)?,
            Atom::OrdExact(i, e) => {
                let base = self.ord_at_least(*i, *e)?;
                let at = Cond::not(Cond::Atom(Atom::Linear(self.coeff_eq(
                    *i,
                    *e,
                    BigRational::zero(),
                )?)));
                Cond::and(vec![base, at])
            }
            Atom::CoeffEq(i, j, c) => {
                Cond::Atom(Atom::Linear(self.coeff_eq(*i, *j, c.clone())?))
            }
            Atom::CoeffNonzero(i, j) => Cond::not(Cond::Atom(Atom::Linear(self.coeff_eq(
                *i,
                *j,
                BigRational::zero(),
            )?))),
            Atom::Linear(eq) => {
                // sum_{(i,j)} a * coeff_j(F_i(w)) = rhs
                let mut terms: Vec<(usize, i64, BigRational)> = Vec::new();
                let mut rhs = eq.rhs.clone();
                for (i, j, a) in &eq.terms {
                    let sub = self.coeff_eq(*i, *j, BigRational::zero())?;
                    for (si, sj, b) in sub.terms {
                        terms.push((si, sj, a * b));
                    }
                    // coeff_j(F_i) = sum b w + v_j and sub.rhs = -v_j
                    rhs += a * sub.rhs;
                }
                Cond::Atom(Atom::Linear(LinearEq::new(terms, rhs)))
            }
        })
    }
}

fn rat_of(c: &Coeff) -> Result<BigRational> {
    match c {
        Coeff::Rat(r) => Ok(r.clone()),
        Coeff::Fp { .. } => Err(Error::UnsupportedConstraint(
            "affine rewriting is done over the rationals".into(),
        )),
    }
}

/// Coefficient of `t^m` in `u^{-1}`, exactly.
fn inv_coeff(u: &LaurentScalar, m: i64) -> Result<BigRational> {
    let k = match u.ord()? {
        OrdVal::Finite(k) => k,
        OrdVal::Infinite => return Err(Error::DivisionByZero("zero scaling".into())),
    };
    if m < -k {
        return Ok(BigRational::zero());
    }
    let needed = (m + k + 2) as usize;
    let inv = u.inv_with(needed.max(4))?;
    rat_of(&inv.coeff_at(m)?)
}

/// Rewrite `coeff((w_i - v_i)/u_i, j) = rhs` as a linear relation on the
/// coefficient slots of w_i.
fn coeff_condition(
    i: usize,
    j: i64,
    rhs: BigRational,
    maps: &[(LaurentScalar, LaurentScalar)],
    scale_ord: &[i64],
    new_bound: i64,
) -> Result<LinearEq> {
    let (u, v) = &maps[i];
    let k = scale_ord[i];
    let lo = -new_bound;
    let hi = j + k;
    let mut terms = Vec::new();
    let mut constant = rhs;
    for l in lo..=hi {
        let a = inv_coeff(u, j - l)?;
        if a.is_zero() {
            continue;
        }
        // a * (w_l - v_l)
        terms.push((i, l, a.clone()));
        let vl = rat_of(&v.coeff_at(l)?)?;
        constant += a * vl;
    }
    Ok(LinearEq::new(terms, constant))
}

fn rewrite_atom(
    atom: &Atom,
    maps: &[(LaurentScalar, LaurentScalar)],
    scale_ord: &[i64],
    new_bound: i64,
) -> Result<Cond> {
    match atom {
        Atom::OrdAtLeast(i, e) => {
            // ord(w_i - v_i) >= e + k: pin w-coefficients to v's below e + k
            let (_, v) = &maps[*i];
            let cut = e + scale_ord[*i];
            let mut parts = Vec::new();
            for l in -new_bound..cut {
                let vl = rat_of(&v.coeff_at(l)?)?;
                parts.push(Cond::Atom(Atom::CoeffEq(*i, l, vl)));
            }
            Ok(Cond::and(parts))
        }
        Atom::OrdExact(i, e) => {
            let (_, v) = &maps[*i];
            let cut = e + scale_ord[*i];
            let mut parts = Vec::new();
            for l in -new_bound..cut {
                let vl = rat_of(&v.coeff_at(l)?)?;
                parts.push(Cond::Atom(Atom::CoeffEq(*i, l, vl)));
            }
            let vcut = rat_of(&v.coeff_at(cut)?)?;
            parts.push(Cond::not(Cond::Atom(Atom::CoeffEq(*i, cut, vcut))));
            Ok(Cond::and(parts))
        }
        Atom::CoeffEq(i, j, c) => {
            let eq = coeff_condition(*i, *j, c.clone(), maps, scale_ord, new_bound)?;
            Ok(Cond::Atom(Atom::Linear(eq)))
        }
        Atom::CoeffNonzero(i, j) => {
            let eq = coeff_condition(*i, *j, BigRational::zero(), maps, scale_ord, new_bound)?;
            Ok(Cond::not(Cond::Atom(Atom::Linear(eq))))
        }
        Atom::Linear(eq) => {
            // substitute each slot of the preimage coordinates
            let mut terms: Vec<(usize, i64, BigRational)> = Vec::new();
            let mut rhs = eq.rhs.clone();
            for (i, j, a) in &eq.terms {
                let sub = coeff_condition(*i, *j, BigRational::zero(), maps, scale_ord, new_bound)?;
                // sub: sum b * w = const with rhs folded; here we need
                // coeff_j(preimage_i) = sum b*w - const0 where const0 came
                // from v; fold a * that into the accumulating relation
                for (si, sj, b) in sub.terms {
                    terms.push((si, sj, a * b));
                }
                // coeff_condition returned sum b*w = rhs0 meaning
                // coeff = sum b*(w) - (rhs0 - rhs_input); with rhs_input = 0,
                // coeff_j(pre_i) = sum b*w - rhs0
                rhs += a * sub.rhs;
            }
            Ok(Cond::Atom(Atom::Linear(LinearEq::new(terms, rhs))))
        }
    }
}

fn rewrite_cond(
    cond: &Cond,
    a: &CylinderSet,
    maps: &[(LaurentScalar, LaurentScalar)],
    scale_ord: &[i64],
    new_bound: i64,
) -> Result<Cond> {
    Ok(match cond {
        Cond::True => Cond::True,
        Cond::False => Cond::False,
        Cond::Atom(atom) => rewrite_atom(atom, maps, scale_ord, new_bound)?,
        Cond::And(cs) => Cond::and(
            cs.iter()
                .map(|c| rewrite_cond(c, a, maps, scale_ord, new_bound))
                .collect::<Result<Vec<_>>>()?,
        ),
        Cond::Or(cs) => Cond::or(
            cs.iter()
                .map(|c| rewrite_cond(c, a, maps, scale_ord, new_bound))
                .collect::<Result<Vec<_>>>()?,
        ),
        Cond::DisjointOr(cs) => Cond::disjoint_or(
            cs.iter()
                .map(|c| rewrite_cond(c, a, maps, scale_ord, new_bound))
                .collect::<Result<Vec<_>>>()?,
        ),
        Cond::Not(c) => Cond::not(rewrite_cond(c, a, maps, scale_ord, new_bound)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cylinder::parse_condition;
    use crate::laurent::{parse_laurent, FieldTag};
    use crate::ring::ring_mul;

    const Q: FieldTag = FieldTag::Rationals;

    fn lm1() -> MotClass {
        MotClass::l() - MotClass::one()
    }

    fn set(d: usize, n: i64, cond: &str, vars: &[(&str, usize)]) -> CylinderSet {
        CylinderSet::new(d, n, parse_condition(cond, vars).unwrap()).unwrap()
    }

    fn x_vars() -> Vec<(&'static str, usize)> {
        vec![("x0", 0), ("x1", 1), ("x2", 2)]
    }

    #[test]
    fn measure_stable_examples() {
        // B_n in L(A^1) has volume L^{-n+1}
        for n in 1..=10 {
            assert_eq!(
                measure_stable(&CylinderSet::b_n(n)).unwrap(),
                MotClass::l_pow(-n + 1)
            );
        }
        // the full arc line has volume L
        assert_eq!(
            measure_stable(&CylinderSet::full(1)).unwrap(),
            MotClass::l()
        );
        // {ord == n} has volume (L-1) L^{-n}
        for n in 0..=3 {
            let a = set(1, 0, &format!("ord(x0) == {n}"), &x_vars());
            assert_eq!(
                measure_stable(&a).unwrap(),
                lm1().mul(&MotClass::l_pow(-n))
            );
        }
    }

    #[test]
    fn example5_scaling_law() {
        let total = measure_stable(&CylinderSet::full(1)).unwrap();
        for n in 1..=10 {
            let bn = measure_stable(&CylinderSet::b_n(n)).unwrap();
            assert_eq!(bn, MotClass::l_pow(-n).mul(&total));
        }
    }

    #[test]
    fn measure_bounded_examples() {
        // the full pole-bound-N line has volume L^{N+1}
        for n in 0..=3 {
            let a = CylinderSet::new(1, n, Cond::True).unwrap();
            assert_eq!(measure_bounded(&a).unwrap(), MotClass::l_pow(n + 1));
        }
        // the coset t^{-2} + O: coefficients -2 and -1 pinned
        let a = set(1, 2, "coeff(x0, -2) == 1 & coeff(x0, -1) == 0", &x_vars());
        assert_eq!(measure_bounded(&a).unwrap(), MotClass::l());
        // full L(A^d) seen at any pole bound keeps volume L^d
        for d in 1..=3usize {
            let a = CylinderSet::full(d).with_pole_bound(2).unwrap();
            assert_eq!(measure_bounded(&a).unwrap(), MotClass::l_pow(d as i64));
        }
    }

    #[test]
    fn measure_bounded_is_independent_of_the_bound() {
        let sets = [
            set(1, 2, "coeff(x0, -2) == 1 & coeff(x0, -1) == 0", &x_vars()),
            set(2, 1, "ord(x0) >= -1 & coeff(x1, 0) != 0", &x_vars()),
            set(1, 0, "ord(x0) == 2", &x_vars()),
        ];
        for a in &sets {
            let base = measure_bounded(a).unwrap();
            for k in 1..=3 {
                assert_eq!(
                    measure_bounded_at(a, a.pole_bound() + k).unwrap(),
                    base,
                    "bound independence failed at +{k}"
                );
            }
        }
    }

    #[test]
    fn shift_jacobian_order_examples() {
        assert_eq!(shift_jacobian_order(1, 1).unwrap(), 1);
        for d in 1..=3 {
            assert_eq!(shift_jacobian_order(0, d).unwrap(), 0);
        }
        assert_eq!(shift_jacobian_order(3, 2).unwrap(), 6);
        for n in 0..=4 {
            for d in 1..=3 {
                assert_eq!(shift_jacobian_order(n, d).unwrap(), n * d as i64);
            }
        }
    }

    #[test]
    fn ord_partition_examples() {
        // g = s on the unit arcs: single stratum at e = 0
        let units = set(1, 0, "ord(x0) == 0", &x_vars());
        let g = WeightSpec::coordinate(1, 0);
        let (strata, residual) = ord_partition(&g, &units, 6).unwrap();
        let nonempty: Vec<i64> = strata
            .iter()
            .filter(|(_, s)| !s.is_empty_set().unwrap())
            .map(|(e, _)| *e)
            .collect();
        assert_eq!(nonempty, vec![0]);
        assert!(residual.is_none());
        // g = s on the whole line: strata ord == e
        let line = CylinderSet::full(1);
        let (strata, residual) = ord_partition(&g, &line, 6).unwrap();
        for (e, s) in &strata {
            if *e >= 0 {
                assert_eq!(
                    measure_bounded(s).unwrap(),
                    lm1().mul(&MotClass::l_pow(-e))
                );
            }
        }
        assert!(residual.is_some(), "deep zeros remain");
        // g = x*y on the plane: stratum e is the union over i+j = e
        let plane = CylinderSet::full(2);
        let gxy = WeightSpec::monomial(vec![1, 1], 0);
        let (strata, _) = ord_partition(&gxy, &plane, 4).unwrap();
        for (e, s) in strata.iter().take(3) {
            let mut expected = MotClass::zero();
            for i in 0..=*e {
                let j = e - i;
                expected = expected.add(&ring_mul(
                    &lm1().mul(&MotClass::l_pow(-i)),
                    &lm1().mul(&MotClass::l_pow(-j)),
                ));
            }
            assert_eq!(measure_bounded(s).unwrap(), expected, "stratum {e}");
        }
    }

    #[test]
    fn integrate_weighted_examples() {
        // g = s over the unit arcs: L - 1
        let units = set(1, 0, "ord(x0) == 0", &x_vars());
        let g = WeightSpec::coordinate(1, 0);
        let r = integrate_weighted(&g, Integrand::Set(&units)).unwrap();
        assert_eq!(r.value, lm1());
        // trivial density returns the plain measure
        let b3 = CylinderSet::b_n(3);
        let r = integrate_weighted(&WeightSpec::trivial(1), Integrand::Set(&b3)).unwrap();
        assert_eq!(r.value, MotClass::l_pow(-2));
        // g = s over the whole line: sum (L-1) L^{-2e} = L^2 / (L+1)
        let line = CylinderSet::full(1);
        let r = integrate_weighted(&g, Integrand::Set(&line)).unwrap();
        let expected: MotClass = "(L^3 - L^2) / (L^2 - 1)".parse().unwrap();
        assert_eq!(r.value, expected);
        assert!(r.tail.is_some());
        // cross-check by expansion against explicit partial sums
        let mut partial = MotClass::zero();
        for e in 0..40 {
            partial = partial.add(&lm1().mul(&MotClass::l_pow(-2 * e)));
        }
        assert_eq!(r.value.expand(-10), partial.expand(-10));
    }

    #[test]
    fn integrate_weighted_captures_mass_beyond_the_default_window() {
        // the whole set sits at ord 20, far past the default cutoff
        let vars = x_vars();
        let a = set(1, 0, "ord(x0) == 20", &vars);
        let g = WeightSpec::coordinate(1, 0);
        let r = integrate_weighted(&g, Integrand::Set(&a)).unwrap();
        // weight L^{-20} times measure (L-1) L^{-20}
        assert_eq!(
            r.value,
            lm1().mul(&MotClass::l_pow(-40))
        );
    }

    #[test]
    fn integrate_weighted_handles_zero_interleaved_strata() {
        // density s^2 only hits even orders; odd strata are empty
        let line = CylinderSet::full(1);
        let g = WeightSpec::monomial(vec![2], 0);
        let r = integrate_weighted(&g, Integrand::Set(&line)).unwrap();
        // sum over o >= 0 of (L-1) L^{-o} L^{-2o} = (L-1) L^3/(L^3 - 1)
        let expected = lm1()
            .mul(&MotClass::l_pow(3))
            .mul(&MotClass::inv_l_pow_minus_one(3, 1));
        assert_eq!(r.value, expected);
        // cross-check by expansion against partial sums
        let mut partial = MotClass::zero();
        for o in 0..30 {
            partial = partial.add(&lm1().mul(&MotClass::l_pow(-3 * o)));
        }
        assert_eq!(r.value.expand(-12), partial.expand(-12));
    }

    #[test]
    fn integrate_weighted_detects_divergence() {
        // weight L^{+ord s} over all integral s diverges
        let line = CylinderSet::full(1);
        let g = WeightSpec::monomial(vec![-1], 0);
        assert!(matches!(
            integrate_weighted(&g, Integrand::Set(&line)),
            Err(Error::Divergence(_)) | Err(Error::PatternMismatch(_))
        ));
    }

    #[test]
    fn weighted_shift_consistency_examples() {
        let vars = x_vars();
        // trivial density: reduces to well-definedness of the bounded measure
        let a = set(1, 1, "ord(x0) >= -1", &vars);
        assert!(weighted_shift_consistency(&WeightSpec::trivial(1), &a, 1).unwrap());
        // g = s, units at pole bound 1, N = 1
        let units = set(1, 1, "ord(x0) == 0", &vars);
        let g = WeightSpec::coordinate(1, 0);
        assert!(weighted_shift_consistency(&g, &units, 1).unwrap());
        assert!(weighted_shift_consistency(&g, &units, 2).unwrap());
        // g = x*y on a sample subset of the pole-bound-1 plane
        let sample = set(2, 1, "ord(x0) >= -1 & ord(x1) == 1", &vars);
        let gxy = WeightSpec::monomial(vec![1, 1], 0);
        assert!(weighted_shift_consistency(&gxy, &sample, 1).unwrap());
        assert!(weighted_shift_consistency(&gxy, &sample, 2).unwrap());
    }

    #[test]
    fn measure_sigma_examples() {
        // ord-strata of the line sum to L
        let f = PatternFamily::new(
            Box::new(|e| {
                CylinderSet::new(1, 0, Cond::Atom(Atom::OrdExact(0, e)))
            }),
            0,
            lm1(),
            1,
        );
        assert_eq!(measure_sigma(&f).unwrap(), MotClass::l());
        // starting at e = 1: L - (L-1) = 1
        let f1 = PatternFamily::new(
            Box::new(|e| {
                CylinderSet::new(1, 0, Cond::Atom(Atom::OrdExact(0, e)))
            }),
            1,
            lm1(),
            1,
        );
        assert_eq!(measure_sigma(&f1).unwrap(), MotClass::one());
        // a non-contracting declared pattern diverges
        let bad = PatternFamily::new(
            Box::new(|e| {
                CylinderSet::new(1, 0, Cond::Atom(Atom::OrdExact(0, e)))
            }),
            0,
            lm1(),
            -1,
        );
        assert!(matches!(measure_sigma(&bad), Err(Error::Divergence(_))));
        // a wrong declared law is a pattern mismatch
        let wrong = PatternFamily::new(
            Box::new(|e| {
                CylinderSet::new(1, 0, Cond::Atom(Atom::OrdExact(0, e)))
            }),
            0,
            MotClass::l(),
            1,
        );
        assert!(matches!(
            measure_sigma(&wrong),
            Err(Error::PatternMismatch(_))
        ));
    }

    #[test]
    fn measure_is_additive_on_disjoint_unions() {
        let vars = x_vars();
        let pairs = [
            (set(1, 0, "ord(x0) == 2", &vars), set(1, 0, "ord(x0) >= 3", &vars)),
            (set(1, 0, "ord(x0) == 0", &vars), set(1, 0, "ord(x0) == 1", &vars)),
            (
                set(2, 1, "ord(x0) == -1 & ord(x1) >= 0", &vars),
                set(2, 1, "ord(x0) >= 0 & ord(x1) >= 0", &vars),
            ),
        ];
        for (a, b) in &pairs {
            assert!(a.intersect(b).unwrap().is_empty_set().unwrap());
            let union = a.union(b).unwrap();
            assert_eq!(
                measure_bounded(&union).unwrap(),
                measure_bounded(a).unwrap().add(&measure_bounded(b).unwrap())
            );
        }
    }

    #[test]
    fn translation_preserves_measure() {
        let vars = x_vars();
        let sets = [
            set(1, 0, "ord(x0) >= 2", &vars),
            set(1, 0, "ord(x0) == 1", &vars),
            set(2, 1, "ord(x0) >= -1 & coeff(x1, 0) != 0", &vars),
            set(2, 0, "coeff(x0, 1) == 3 | ord(x1) >= 2", &vars),
        ];
        let shifts = [
            vec!["t^-2 + 1", "0"],
            vec!["1 + t", "t^-1"],
            vec!["t^-3", "2"],
        ];
        for a in &sets {
            let base = measure_bounded(a).unwrap();
            for sh in &shifts {
                let v = LaurentVector::new(
                    sh.iter()
                        .take(a.dim())
                        .map(|s| parse_laurent(s, Q).unwrap())
                        .collect(),
                )
                .unwrap();
                let moved = translate(a, &v).unwrap();
                assert_eq!(measure_bounded(&moved).unwrap(), base);
            }
        }
    }

    #[test]
    fn translated_membership_matches() {
        let vars = x_vars();
        let a = set(1, 0, "ord(x0) == 1 | coeff(x0, 2) == 5", &vars);
        let v = LaurentVector::new(vec![parse_laurent("t^-1 + 2", Q).unwrap()]).unwrap();
        let image = translate(&a, &v).unwrap();
        for p in ["t + t^2", "3 + t", "5*t^2 + 7*t^3", "t^-1"] {
            let pt = LaurentVector::new(vec![parse_laurent(p, Q).unwrap()]).unwrap();
            let direct = a.membership(&pt).unwrap();
            let moved = pt.add(&v).unwrap();
            assert_eq!(image.membership(&moved).unwrap(), direct, "point {p}");
        }
    }

    #[test]
    fn scaling_preserves_measure_and_membership() {
        let vars = x_vars();
        let a = set(2, 0, "ord(x0) >= 1 & coeff(x1, 0) != 0", &vars);
        let units = vec![
            parse_laurent("t^2", Q).unwrap(),
            parse_laurent("1 + t", Q).unwrap(),
        ];
        let image = scale_coords(&a, &units).unwrap();
        // unit scaling and t-power scaling together multiply the measure by
        // L^{sum of t-orders}; here ord t^2 = 2 on the first coordinate
        let got = measure_bounded(&image).unwrap();
        let base = measure_bounded(&a).unwrap();
        assert_eq!(got, base.mul(&MotClass::l_pow(-2)));
        for p in [vec!["t", "1"], vec!["t^2", "1 + t"], vec!["t^3", "t"]] {
            let pt = LaurentVector::new(
                p.iter().map(|s| parse_laurent(s, Q).unwrap()).collect(),
            )
            .unwrap();
            let moved = LaurentVector::new(vec![
                pt.entry(0).mul(&units[0]).unwrap(),
                pt.entry(1).mul(&units[1]).unwrap(),
            ])
            .unwrap();
            assert_eq!(
                image.membership(&moved).unwrap(),
                a.membership(&pt).unwrap()
            );
        }
    }
}
