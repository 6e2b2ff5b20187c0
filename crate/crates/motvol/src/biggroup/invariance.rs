//! Translation invariance of the Haar measure, verified with both sides
//! computed independently, and chart independence.
//!
//! Two translate routes are implemented.  For sets given in chart
//! coordinates and translations whose coordinate action is coordinate-wise
//! affine (lower-triangular elements), the translate is the affine preimage
//! of the set and stays inside the restricted constraint language.  For
//! subsets of the integral points cut by order conditions on the
//! first-column entries, left translation by any integral unimodular matrix
//! rewrites the conditions exactly (entries of `g0 w` are Laurent-linear in
//! the entries of `w`), and the translate is measured through the same
//! det-solved stratification as the original — including upper-triangular
//! and Weyl translations, which no chart-affine route covers.

use num_rational::BigRational;
use num_traits::Zero;

use crate::cylinder::{Atom, Cond, CylinderSet, LinearEq, PatternFamily};
use crate::laurent::{Coeff, FieldTag, LaurentScalar, OrdVal};
use crate::measure::{
    affine_preimage, integrate_weighted_set, measure_sigma, AffineMap, MeasureResult,
    DEFAULT_STRATUM_CUTOFF,
};
use crate::ring::MotClass;
use crate::{Error, Result};

use super::haar::{haar_measure, OmegaRepr, OmegaSet};
use super::{BigCellChart, ChartKind, GroupKind, Mat2};

// ---------------------------------------------------------------------------
// Entry sets
// ---------------------------------------------------------------------------

/// A subset of the integral points `SL2(O)` cut by order conditions on
/// Laurent-linear combinations `ca * w11 + cc * w21` of the first-column
/// entries.  Closed under left translation by integral unimodular matrices.
#[derive(Clone, Debug)]
pub struct EntrySet {
    pub conds: Vec<EntryCond>,
}

/// An order condition on `ca * w11 + cc * w21`.
#[derive(Clone, Debug)]
pub enum EntryCond {
    /// the combination is a unit: ord = 0
    ComboUnit { ca: LaurentScalar, cc: LaurentScalar },
    /// ord >= min
    ComboOrdAtLeast {
        ca: LaurentScalar,
        cc: LaurentScalar,
        min: i64,
    },
}

impl EntryCond {
    fn coeffs(&self) -> (&LaurentScalar, &LaurentScalar) {
        match self {
            EntryCond::ComboUnit { ca, cc } => (ca, cc),
            EntryCond::ComboOrdAtLeast { ca, cc, .. } => (ca, cc),
        }
    }

    fn with_coeffs(&self, ca: LaurentScalar, cc: LaurentScalar) -> EntryCond {
        match self {
            EntryCond::ComboUnit { .. } => EntryCond::ComboUnit { ca, cc },
            EntryCond::ComboOrdAtLeast { min, .. } => EntryCond::ComboOrdAtLeast {
                ca,
                cc,
                min: *min,
            },
        }
    }
}

impl EntrySet {
    /// All of `L(SL2) = SL2(O)`.
    pub fn full_integral() -> EntrySet {
        EntrySet { conds: Vec::new() }
    }

    /// The arcs of the big cell: `w11` a unit.
    pub fn cell_arcs() -> EntrySet {
        let field = FieldTag::Rationals;
        EntrySet {
            conds: vec![EntryCond::ComboUnit {
                ca: LaurentScalar::one(field),
                cc: LaurentScalar::zero(field),
            }],
        }
    }

    /// `{ w in SL2(O) : ord(w21) >= min }`.
    pub fn lower_left_ord_at_least(min: i64) -> EntrySet {
        let field = FieldTag::Rationals;
        EntrySet {
            conds: vec![EntryCond::ComboOrdAtLeast {
                ca: LaurentScalar::zero(field),
                cc: LaurentScalar::one(field),
                min,
            }],
        }
    }
}

/// The left translate `g0^{-1} E = { w : g0 w in E }` of an entry set, for
/// integral unimodular g0: entry conditions pull back along the linear
/// action on the first column.
pub fn translate_entry_set(e: &EntrySet, g0: &Mat2) -> Result<EntrySet> {
    if !g0.is_integral() {
        return Err(Error::UnsupportedConstraint(
            "entry-set translation needs an integral translator".into(),
        ));
    }
    if !g0.det_is_one()? {
        return Err(Error::Domain("translator is not in SL2".into()));
    }
    let mut conds = Vec::new();
    for c in &e.conds {
        let (ca, cc) = c.coeffs();
        // combo(g0 w) = (ca a + cc c) w11 + (ca b + cc d) w21
        let na = ca.mul(&g0.a)?.add(&cc.mul(&g0.c)?)?;
        let nc = ca.mul(&g0.b)?.add(&cc.mul(&g0.d)?)?;
        conds.push(c.with_coeffs(na, nc));
    }
    Ok(EntrySet { conds })
}

// ---------------------------------------------------------------------------
// Measuring entry sets: stratum 0 in chart coordinates, higher strata in
// det-solved coordinates
// ---------------------------------------------------------------------------

fn rat_of(c: &Coeff) -> Result<BigRational> {
    match c {
        Coeff::Rat(r) => Ok(r.clone()),
        Coeff::Fp { .. } => Err(Error::UnsupportedConstraint(
            "entry conditions are evaluated over the rationals".into(),
        )),
    }
}

/// Condition `ord(c1 + c2 * gamma_coord) rel`, for an integral coordinate:
/// the coefficients of the series are affine in the coefficient slots.
fn affine_series_ord(
    c1: &LaurentScalar,
    c2: &LaurentScalar,
    coord: usize,
    rel: OrdRel,
) -> Result<Cond> {
    let o1 = match c1.ord()? {
        OrdVal::Finite(v) => Some(v),
        OrdVal::Infinite => None,
    };
    let o2 = match c2.ord()? {
        OrdVal::Finite(v) => Some(v),
        OrdVal::Infinite => None,
    };
    let j_lo = match (o1, o2) {
        (None, None) => {
            // identically zero combination
            return Ok(match rel {
                OrdRel::Unit => Cond::False,
                OrdRel::AtLeast(_) => Cond::True,
            });
        }
        (Some(a), None) => a,
        (None, Some(b)) => b,
        (Some(a), Some(b)) => a.min(b),
    };
    let eq_at = |j: i64| -> Result<Cond> {
        // sum_i (c2)_{j-i} slot_i = -(c1)_j, slots of the integral coordinate
        let mut terms = Vec::new();
        if let Some(b) = o2 {
            for i in 0..=(j - b).max(-1) {
                let coef = rat_of(&c2.coeff_at(j - i)?)?;
                if !coef.is_zero() {
                    terms.push((coord, i, coef));
                }
            }
        }
        let rhs = -rat_of(&c1.coeff_at(j)?)?;
        Ok(Cond::Atom(Atom::Linear(LinearEq::new(terms, rhs))))
    };
    match rel {
        OrdRel::AtLeast(m) => {
            let mut parts = Vec::new();
            for j in j_lo..m {
                parts.push(eq_at(j)?);
            }
            Ok(Cond::and(parts))
        }
        OrdRel::Unit => {
            if j_lo > 0 {
                return Ok(Cond::False);
            }
            let mut parts = Vec::new();
            for j in j_lo..0 {
                parts.push(eq_at(j)?);
            }
            parts.push(Cond::not(eq_at(0)?));
            Ok(Cond::and(parts))
        }
    }
}

#[derive(Clone, Copy, Debug)]
enum OrdRel {
    Unit,
    AtLeast(i64),
}

/// Chart-dependent rewrite of an entry condition on the unit-pivot stratum,
/// where the chart coordinates are integral with unit torus entry.
fn stratum0_condition(chart: &BigCellChart, cond: &EntryCond) -> Result<Cond> {
    let (ca, cc) = cond.coeffs();
    let rel = match cond {
        EntryCond::ComboUnit { .. } => OrdRel::Unit,
        EntryCond::ComboOrdAtLeast { min, .. } => OrdRel::AtLeast(*min),
    };
    match chart.kind {
        // w11 = s, w21 = y s: combo = s (ca + cc y)
        ChartKind::Standard => affine_series_ord(ca, cc, 1, rel),
        // w11 = s(1+y), w21 = y s: combo = s (ca + (ca + cc) y)
        ChartKind::Conjugated => {
            let sum = ca.add(cc)?;
            affine_series_ord(ca, &sum, 1, rel)
        }
        // w11 = (1 + x y)/s, w21 = x/s: combo = (ca (1 + x y) + cc x)/s,
        // linear only when ca = 0: then ord = ord(cc x)
        ChartKind::WeylSwapped => {
            if ca.is_known_zero() {
                affine_series_ord(&LaurentScalar::zero(cc.field()), cc, 0, rel)
            } else {
                Err(Error::UnsupportedConstraint(
                    "w11-conditions are outside the swapped chart's linear language".into(),
                ))
            }
        }
    }
}

/// Knowledge about the order of a combination on a det-solved stratum.
#[derive(Clone, Copy, Debug)]
struct OrdInfo {
    /// Some(order) when determined for every point of the stratum
    /// (None = infinite order).
    exact: Option<Option<i64>>,
    /// a valid lower bound when not exact
    lower: Option<i64>,
}

fn ord_of(c: &LaurentScalar) -> Result<Option<i64>> {
    Ok(match c.ord()? {
        OrdVal::Finite(v) => Some(v),
        OrdVal::Infinite => None,
    })
}

/// The order of `ca w11 + cc w21` on the chart's det-solved stratum of pivot
/// order e, decided by term dominance in the solved coordinates.
fn solved_ord_info(chart: &BigCellChart, ca: &LaurentScalar, cc: &LaurentScalar, e: i64) -> Result<OrdInfo> {
    let oa = ord_of(ca)?;
    let oc = ord_of(cc)?;
    Ok(match chart.kind {
        // tau = w11 (ord e), u = w12 (unit), w = w22 (free):
        // u * combo = ca tau u + cc tau w - cc
        ChartKind::Standard => match (oa, oc) {
            (None, None) => OrdInfo {
                exact: Some(None),
                lower: None,
            },
            (Some(a), None) => OrdInfo {
                exact: Some(Some(a + e)),
                lower: None,
            },
            (_, Some(k)) => {
                let bound_other = oa.map(|a| a + e);
                let dominated = bound_other.map_or(true, |b| k < b);
                // cc tau w has order >= k + e > k always (e >= 1)
                if dominated {
                    OrdInfo {
                        exact: Some(Some(k)),
                        lower: None,
                    }
                } else {
                    OrdInfo {
                        exact: None,
                        lower: Some(k.min(bound_other.unwrap())),
                    }
                }
            }
        },
        // tau = w22 (ord e), u = w21 (unit), w = w11 (free):
        // combo = ca w + cc u
        ChartKind::WeylSwapped => match (oa, oc) {
            (None, None) => OrdInfo {
                exact: Some(None),
                lower: None,
            },
            (None, Some(k)) => OrdInfo {
                exact: Some(Some(k)),
                lower: None,
            },
            (Some(a), None) => OrdInfo {
                exact: None,
                lower: Some(a),
            },
            (Some(a), Some(k)) => {
                if k < a {
                    OrdInfo {
                        exact: Some(Some(k)),
                        lower: None,
                    }
                } else {
                    OrdInfo {
                        exact: None,
                        lower: Some(a.min(k)),
                    }
                }
            }
        },
        // tau = w11 - w21 (ord e), u = w11 (unit), w = w12 (free):
        // combo = (ca + cc) u - cc tau
        ChartKind::Conjugated => {
            let cs = ca.add(cc)?;
            let os = ord_of(&cs)?;
            match (os, oc) {
                (None, None) => OrdInfo {
                    exact: Some(None),
                    lower: None,
                },
                (Some(s), None) => OrdInfo {
                    exact: Some(Some(s)),
                    lower: None,
                },
                (None, Some(k)) => OrdInfo {
                    exact: Some(Some(k + e)),
                    lower: None,
                },
                (Some(s), Some(k)) => {
                    if s < k + e {
                        OrdInfo {
                            exact: Some(Some(s)),
                            lower: None,
                        }
                    } else if k + e < s {
                        OrdInfo {
                            exact: Some(Some(k + e)),
                            lower: None,
                        }
                    } else {
                        OrdInfo {
                            exact: None,
                            lower: Some(s),
                        }
                    }
                }
            }
        }
    })
}

/// True/False decision of a condition on the stratum, when dominance decides
/// it for all points at once.
fn solved_decision(chart: &BigCellChart, cond: &EntryCond, e: i64) -> Result<Option<bool>> {
    let (ca, cc) = cond.coeffs();
    let info = solved_ord_info(chart, ca, cc, e)?;
    Ok(match cond {
        EntryCond::ComboUnit { .. } => match info.exact {
            Some(None) => Some(false),
            Some(Some(v)) => Some(v == 0),
            None => match info.lower {
                Some(l) if l > 0 => Some(false),
                _ => None,
            },
        },
        EntryCond::ComboOrdAtLeast { min, .. } => match info.exact {
            Some(None) => Some(true),
            Some(Some(v)) => Some(v >= *min),
            None => match info.lower {
                Some(l) if l >= *min => Some(true),
                _ => None,
            },
        },
    })
}

/// The unit-pivot stratum of an entry set as a chart-coordinate cylinder:
/// integral coordinates, unit torus entry, and the rewritten conditions.
fn stratum0_cylinder(e: &EntrySet, chart: &BigCellChart) -> Result<CylinderSet> {
    let mut parts = vec![
        Cond::Atom(Atom::OrdAtLeast(0, 0)),
        Cond::Atom(Atom::OrdAtLeast(1, 0)),
        Cond::Atom(Atom::OrdExact(2, 0)),
    ];
    for c in &e.conds {
        parts.push(stratum0_condition(chart, c)?);
    }
    CylinderSet::new(3, 0, Cond::and(parts))
}

/// Uniform keep/drop decision on the det-solved strata of positive pivot
/// order: the conditions must decide every stratum by term dominance, the
/// same way across the prefix, stably in the tail.
fn solved_strata_kept(e: &EntrySet, chart: &BigCellChart) -> Result<bool> {
    let mut keep_prefix = Vec::new();
    for e_idx in (1i64..=6).chain([7, 50, 1000]) {
        let mut keep = true;
        for c in &e.conds {
            match solved_decision(chart, c, e_idx)? {
                Some(true) => {}
                Some(false) => {
                    keep = false;
                    break;
                }
                None => {
                    return Err(Error::UnsupportedConstraint(format!(
                        "entry condition undecided by dominance on pivot stratum {e_idx}"
                    )))
                }
            }
        }
        keep_prefix.push(keep);
    }
    if keep_prefix.iter().any(|k| *k != keep_prefix[0]) {
        return Err(Error::UnsupportedConstraint(
            "entry condition decision is not constant across the strata".into(),
        ));
    }
    Ok(keep_prefix[0])
}

/// An entry set whose det-solved strata are all empty is contained in the
/// unit-pivot stratum and is therefore an ordinary chart cylinder.
pub fn entry_as_chart_set(e: &EntrySet, chart: &BigCellChart) -> Result<Option<CylinderSet>> {
    if solved_strata_kept(e, chart)? {
        Ok(None)
    } else {
        Ok(Some(stratum0_cylinder(e, chart)?))
    }
}

/// The measure of an entry set through a chart: the unit-pivot stratum in
/// chart coordinates (weighted by the chart density) plus the det-solved
/// strata of positive pivot order with their geometric tail; the locus where
/// the pivot vanishes identically has measure zero.
pub fn sl2_entry_measure(e: &EntrySet, chart: &BigCellChart) -> Result<MeasureResult> {
    if chart.group.kind != GroupKind::Sl2 {
        return Err(Error::Domain("entry sets live in SL2".into()));
    }
    let stratum0 = stratum0_cylinder(e, chart)?;
    let r0 = integrate_weighted_set(&chart.density(), &stratum0, DEFAULT_STRATUM_CUTOFF)?;
    let mut decomposition = vec![("unit-pivot stratum".to_string(), r0.value.clone())];
    let mut total = r0.value;
    if solved_strata_kept(e, chart)? {
        let lm1 = MotClass::l() - MotClass::one();
        let c = MotClass::l().mul(&lm1.pow(2));
        let family = PatternFamily::new(
            Box::new(|e| {
                CylinderSet::new(
                    3,
                    0,
                    Cond::and(vec![
                        Cond::Atom(Atom::OrdExact(0, e)),
                        Cond::Atom(Atom::CoeffNonzero(1, 0)),
                    ]),
                )
            }),
            1,
            c,
            1,
        );
        let fam_total = measure_sigma(&family)?;
        decomposition.push(("det-solved strata (pivot order >= 1)".into(), fam_total.clone()));
        total = total.add(&fam_total);
    } else {
        decomposition.push((
            "det-solved strata (pivot order >= 1)".into(),
            MotClass::zero(),
        ));
    }
    decomposition.push(("pivot identically zero".into(), MotClass::zero()));
    Ok(MeasureResult {
        value: total,
        decomposition,
        tail: None,
    })
}

// ---------------------------------------------------------------------------
// Translation factors
// ---------------------------------------------------------------------------

/// A generator of the translation group with an exact coordinate action.
#[derive(Clone, Debug)]
pub enum TranslationFactor {
    /// diag(u, u^{-1}); u must be an exact monomial so the inverse is exact
    Diag(LaurentScalar),
    /// `[[1,0],[c,1]]`
    Lower(LaurentScalar),
    /// `[[1,b],[0,1]]`
    Upper(LaurentScalar),
    /// `[[0,1],[-1,0]]`
    Weyl,
}

impl TranslationFactor {
    pub fn matrix(&self, field: FieldTag) -> Result<Mat2> {
        Ok(match self {
            TranslationFactor::Diag(u) => {
                let inv = u.inv()?;
                if inv.precision().is_some() {
                    return Err(Error::UnsupportedConstraint(
                        "diagonal factors must have exactly invertible entries".into(),
                    ));
                }
                Mat2::diag(u.clone(), inv)
            }
            TranslationFactor::Lower(c) => Mat2::lower(c.clone()),
            TranslationFactor::Upper(b) => Mat2::upper(b.clone()),
            TranslationFactor::Weyl => Mat2::new(
                LaurentScalar::zero(field),
                LaurentScalar::one(field),
                LaurentScalar::from_int(field, -1),
                LaurentScalar::zero(field),
            ),
        })
    }

    /// Coordinate maps of the left-translation `h_f` in the standard chart,
    /// when it is coordinate-wise affine (lower-triangular factors):
    /// diag(u, 1/u): (x, y, s) -> (u^2 x, y/u^2, u s);
    /// `[[1,0],[c,1]]`: (x, y, s) -> (x, y + c, s).
    fn chart_affine_maps(&self, field: FieldTag) -> Result<Vec<AffineMap>> {
        match self {
            TranslationFactor::Diag(u) => {
                let u2 = u.mul(u)?;
                Ok(vec![
                    AffineMap::scale(u2.clone()),
                    AffineMap::scale_inv(u2),
                    AffineMap::scale(u.clone()),
                ])
            }
            TranslationFactor::Lower(c) => Ok(vec![
                AffineMap::identity(field),
                AffineMap::shift(c.clone()),
                AffineMap::identity(field),
            ]),
            TranslationFactor::Upper(_) | TranslationFactor::Weyl => {
                Err(Error::UnsupportedConstraint(
                    "this translation is not coordinate-wise affine; use an entry set".into(),
                ))
            }
        }
    }
}

/// LU-style decomposition of an SL2 element into translation factors:
/// `g = lower(c/a) diag(a, 1/a) upper(b/a)` when the corner entry `a` is an
/// exact monomial (so every division and the diagonal inverse stay exact).
pub fn decompose_translator(g: &Mat2) -> Result<Vec<TranslationFactor>> {
    if !g.det_is_one()? {
        return Err(Error::Domain("translator is not in SL2".into()));
    }
    match g.a.ord() {
        Ok(OrdVal::Finite(_)) => {}
        _ => {
            return Err(Error::UnsupportedConstraint(
                "translators with vanishing corner entry are outside the factored family"
                    .into(),
            ))
        }
    }
    let ainv = g.a.inv()?;
    if ainv.precision().is_some() {
        return Err(Error::UnsupportedConstraint(
            "corner entry must be exactly invertible (a monomial)".into(),
        ));
    }
    let mut factors = Vec::new();
    let c_over_a = g.c.mul(&ainv)?;
    if !c_over_a.is_known_zero() {
        factors.push(TranslationFactor::Lower(c_over_a));
    }
    factors.push(TranslationFactor::Diag(g.a.clone()));
    let b_over_a = g.b.mul(&ainv)?;
    if !b_over_a.is_known_zero() {
        factors.push(TranslationFactor::Upper(b_over_a));
    }
    Ok(factors)
}

/// Product matrix of a factor word.
pub fn factor_product(factors: &[TranslationFactor], field: FieldTag) -> Result<Mat2> {
    let mut g = Mat2::identity(field);
    for f in factors {
        g = g.mul(&f.matrix(field)?)?;
    }
    Ok(g)
}

// ---------------------------------------------------------------------------
// Invariance check
// ---------------------------------------------------------------------------

/// The two independently computed sides of an invariance check.
#[derive(Debug)]
pub struct InvarianceReport {
    pub lhs: MotClass,
    pub rhs: MotClass,
    pub equal: bool,
    pub route: String,
    pub lhs_decomposition: Vec<(String, MotClass)>,
    pub rhs_decomposition: Vec<(String, MotClass)>,
}

/// Translate an Omega-measurable set by `g0^{-1}` (the set `{w : g0 w in A}`
/// for `g0` the product of the factors), staying in the representable
/// classes: chart sets via affine preimages, entry sets via the linear entry
/// action.
pub fn translate_omega(
    a: &OmegaSet,
    factors: &[TranslationFactor],
    _chart: &BigCellChart,
) -> Result<OmegaSet> {
    let field = FieldTag::Rationals;
    match &a.repr {
        OmegaRepr::Chart(set) => {
            // preimage under h_{g0} = h_{f1} o ... o h_{fk}: pre-compose
            // factor by factor, first factor first
            let mut current = set.clone();
            for f in factors {
                let maps = match a.group.kind {
                    GroupKind::Sl2 => f.chart_affine_maps(field)?,
                    GroupKind::Additive { d } => match f {
                        TranslationFactor::Lower(c) => {
                            // translation of the vector group by a vector is
                            // modeled per coordinate; reuse Lower as shift on
                            // every coordinate
                            vec![AffineMap::shift(c.clone()); d]
                        }
                        _ => {
                            return Err(Error::UnsupportedConstraint(
                                "vector groups translate by shifts only".into(),
                            ))
                        }
                    },
                    GroupKind::Torus { m } => match f {
                        TranslationFactor::Diag(u) => {
                            vec![AffineMap::scale(u.clone()); m]
                        }
                        _ => {
                            return Err(Error::UnsupportedConstraint(
                                "torus translations are coordinate scalings".into(),
                            ))
                        }
                    },
                };
                current = affine_preimage(&current, &maps)?;
            }
            OmegaSet::chart(a.group, current)
        }
        OmegaRepr::Entry(e) => {
            let g0 = factor_product(factors, field)?;
            if g0.is_integral() {
                Ok(OmegaSet::entry(translate_entry_set(e, &g0)?))
            } else if let Some(cyl) = entry_as_chart_set(e, _chart)? {
                // the set lives in the unit-pivot stratum: translate its
                // chart form instead
                let as_chart = OmegaSet::chart(a.group, cyl)?;
                translate_omega(&as_chart, factors, _chart)
            } else {
                Err(Error::UnsupportedConstraint(
                    "non-integral translation of a set with det-solved strata".into(),
                ))
            }
        }
        OmegaRepr::ZPart => Ok(OmegaSet::z_part(a.group)),
        OmegaRepr::Union(parts) => {
            let translated: Result<Vec<OmegaSet>> = parts
                .iter()
                .map(|p| translate_omega(p, factors, _chart))
                .collect();
            Ok(OmegaSet {
                group: a.group,
                repr: OmegaRepr::Union(translated?),
            })
        }
    }
}

/// Verify `mu(A) = mu(g0^{-1} A)` with both sides computed independently:
/// the left side directly, the right side by translating the set
/// description and running the same measure pipeline on the result.
pub fn invariance_check(
    a: &OmegaSet,
    factors: &[TranslationFactor],
    chart: &BigCellChart,
) -> Result<InvarianceReport> {
    let lhs = haar_measure(a, chart)?;
    let translated = translate_omega(a, factors, chart)?;
    let rhs = haar_measure(&translated, chart)?;
    let route = match &a.repr {
        OmegaRepr::Chart(_) => "chart-affine preimage".to_string(),
        OmegaRepr::Entry(_) => "entry-linear action with det-solved strata".to_string(),
        OmegaRepr::ZPart => "measure-zero part".to_string(),
        OmegaRepr::Union(_) => "piecewise".to_string(),
    };
    Ok(InvarianceReport {
        equal: lhs.value == rhs.value,
        lhs: lhs.value,
        rhs: rhs.value,
        route,
        lhs_decomposition: lhs.decomposition,
        rhs_decomposition: rhs.decomposition,
    })
}

// ---------------------------------------------------------------------------
// Chart independence
// ---------------------------------------------------------------------------

#[derive(Debug)]
pub struct ChartIndependenceReport {
    pub values: Vec<(ChartKind, MotClass)>,
    pub equal: bool,
}

/// Measure a chart-neutral set (entry conditions or measure-zero parts)
/// through several charts and compare the values exactly.
pub fn chart_independence_check(
    a: &OmegaSet,
    charts: &[BigCellChart],
) -> Result<ChartIndependenceReport> {
    fn chart_neutral(a: &OmegaSet) -> bool {
        match &a.repr {
            OmegaRepr::Chart(_) => false,
            OmegaRepr::Entry(_) | OmegaRepr::ZPart => true,
            OmegaRepr::Union(parts) => parts.iter().all(chart_neutral),
        }
    }
    if !chart_neutral(a) {
        return Err(Error::UnsupportedConstraint(
            "chart-coordinate sets are bound to their chart; use entry conditions".into(),
        ));
    }
    let mut values = Vec::new();
    for chart in charts {
        let v = haar_measure(a, chart)?.value;
        values.push((chart.kind, v));
    }
    let equal = values.windows(2).all(|w| w[0].1 == w[1].1);
    Ok(ChartIndependenceReport { values, equal })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::biggroup::GroupSpec;
    use crate::laurent::parse_laurent;

    const Q: FieldTag = FieldTag::Rationals;

    fn ls(s: &str) -> LaurentScalar {
        parse_laurent(s, Q).unwrap()
    }

    fn sl2_chart() -> BigCellChart {
        BigCellChart::sl2(ChartKind::Standard)
    }

    fn lm1() -> MotClass {
        MotClass::l() - MotClass::one()
    }

    fn arcs_chart_set() -> OmegaSet {
        OmegaSet::cell_arcs(GroupSpec::sl2())
    }

    #[test]
    fn entry_arcs_measure_matches_the_chart_arcs() {
        let e = OmegaSet::entry(EntrySet::cell_arcs());
        let r = haar_measure(&e, &sl2_chart()).unwrap();
        assert_eq!(r.value, MotClass::l_pow(2).mul(&lm1()));
        // full integral points: the SL2 class
        let full = OmegaSet::entry(EntrySet::full_integral());
        let r = haar_measure(&full, &sl2_chart()).unwrap();
        assert_eq!(r.value, MotClass::l_pow(3) - MotClass::l());
    }

    #[test]
    fn invariance_for_diagonal_translations() {
        let chart = sl2_chart();
        for k in 1..=3i64 {
            let f = vec![TranslationFactor::Diag(ls(&format!("t^{k}")))];
            let r = invariance_check(&arcs_chart_set(), &f, &chart).unwrap();
            assert!(r.equal, "diag(t^{k}) failed: {} vs {}", r.lhs, r.rhs);
        }
        // constant-scaled monomial
        let f = vec![TranslationFactor::Diag(ls("2*t"))];
        let r = invariance_check(&arcs_chart_set(), &f, &chart).unwrap();
        assert!(r.equal);
    }

    #[test]
    fn invariance_for_lower_unipotent_translations() {
        let chart = sl2_chart();
        for c in ["t^-2", "t^-2 + 1", "3 + t^3"] {
            let f = vec![TranslationFactor::Lower(ls(c))];
            let r = invariance_check(&arcs_chart_set(), &f, &chart).unwrap();
            assert!(r.equal, "lower({c}) failed: {} vs {}", r.lhs, r.rhs);
        }
    }

    #[test]
    fn invariance_for_upper_unipotent_translations_via_entry_route() {
        let chart = sl2_chart();
        let arcs = OmegaSet::entry(EntrySet::cell_arcs());
        for b in ["1", "1 + t", "t + t^2"] {
            let f = vec![TranslationFactor::Upper(ls(b))];
            let r = invariance_check(&arcs, &f, &chart).unwrap();
            assert!(r.equal, "upper({b}) failed: {} vs {}", r.lhs, r.rhs);
            assert_eq!(r.lhs, MotClass::l_pow(2).mul(&lm1()));
        }
    }

    #[test]
    fn invariance_for_the_weyl_translation() {
        let chart = sl2_chart();
        let arcs = OmegaSet::entry(EntrySet::cell_arcs());
        let r = invariance_check(&arcs, &[TranslationFactor::Weyl], &chart).unwrap();
        assert!(r.equal, "weyl failed: {} vs {}", r.lhs, r.rhs);
        // the translate is the unit-lower-left set: its stratified measure
        // includes a nonzero det-solved tail
        let translated = translate_omega(&arcs, &[TranslationFactor::Weyl], &chart).unwrap();
        let rr = haar_measure(&translated, &chart).unwrap();
        let tail_piece = rr
            .decomposition
            .iter()
            .find(|(l, _)| l.contains("det-solved"))
            .unwrap();
        assert!(!tail_piece.1.is_zero());
    }

    #[test]
    fn invariance_on_composite_factors() {
        let chart = sl2_chart();
        let f = vec![
            TranslationFactor::Lower(ls("t^-1")),
            TranslationFactor::Diag(ls("t")),
        ];
        let r = invariance_check(&arcs_chart_set(), &f, &chart).unwrap();
        assert!(r.equal, "composite failed: {} vs {}", r.lhs, r.rhs);
    }

    #[test]
    fn translate_entry_set_requires_integrality() {
        let e = EntrySet::cell_arcs();
        let g = Mat2::diag(ls("t^-1"), ls("t"));
        assert!(matches!(
            translate_entry_set(&e, &g),
            Err(Error::UnsupportedConstraint(_))
        ));
    }

    #[test]
    fn chart_independence_on_neutral_sets() {
        let charts = [
            BigCellChart::sl2(ChartKind::Standard),
            BigCellChart::sl2(ChartKind::WeylSwapped),
            BigCellChart::sl2(ChartKind::Conjugated),
        ];
        // the full integral points measure L^3 - L in every chart
        let full = OmegaSet::entry(EntrySet::full_integral());
        let r = chart_independence_check(&full, &charts).unwrap();
        assert!(r.equal, "{:?}", r.values);
        assert_eq!(r.values[0].1, MotClass::l_pow(3) - MotClass::l());
        // {ord(w21) >= 1} is expressible in all three charts
        let sub = OmegaSet::entry(EntrySet::lower_left_ord_at_least(1));
        let r = chart_independence_check(&sub, &charts).unwrap();
        assert!(r.equal, "{:?}", r.values);
        assert_eq!(r.values[0].1, MotClass::l().mul(&lm1()));
        // chart-bound sets are rejected
        assert!(chart_independence_check(&arcs_chart_set(), &charts).is_err());
    }

    #[test]
    fn decompose_translator_reproduces_the_matrix() {
        // lower-triangular word: the affine chart route applies
        let g = Mat2::lower(ls("3"))
            .mul(&Mat2::diag(ls("2*t"), ls("1/2*t^-1")))
            .unwrap();
        let factors = decompose_translator(&g).unwrap();
        let back = factor_product(&factors, Q).unwrap();
        assert_eq!(back, g);
        let r = invariance_check(
            &OmegaSet::entry(EntrySet::cell_arcs()),
            &factors,
            &sl2_chart(),
        )
        .unwrap();
        assert!(r.equal, "{} vs {}", r.lhs, r.rhs);
        // integral word with an upper factor: the entry route applies
        let g2 = Mat2::lower(ls("t"))
            .mul(&Mat2::upper(ls("1 + t")))
            .unwrap();
        let factors2 = decompose_translator(&g2).unwrap();
        assert_eq!(factor_product(&factors2, Q).unwrap(), g2);
        let r2 = invariance_check(
            &OmegaSet::entry(EntrySet::cell_arcs()),
            &factors2,
            &sl2_chart(),
        )
        .unwrap();
        assert!(r2.equal, "{} vs {}", r2.lhs, r2.rhs);
        // a non-integral word with an upper factor is outside both routes
        let g3 = Mat2::diag(ls("t"), ls("t^-1"))
            .mul(&Mat2::upper(ls("1")))
            .unwrap();
        let factors3 = decompose_translator(&g3).unwrap();
        assert!(invariance_check(
            &OmegaSet::entry(EntrySet::cell_arcs()),
            &factors3,
            &sl2_chart()
        )
        .is_err());
    }

    #[test]
    fn z_part_translates_to_measure_zero() {
        let chart = sl2_chart();
        let z = OmegaSet::z_part(GroupSpec::sl2());
        let r = invariance_check(&z, &[TranslationFactor::Diag(ls("t"))], &chart).unwrap();
        assert!(r.equal);
        assert!(r.lhs.is_zero());
    }
}
