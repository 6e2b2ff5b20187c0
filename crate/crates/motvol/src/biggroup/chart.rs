//! Big-cell coordinates on SL2, translation maps in those coordinates, their
//! Jacobian determinants, and the invariant-form identity
//! `p(h(x,y,s)) det J = p(x,y,s)` with `p = 1/s`.
//!
//! The reference chart writes a big-cell element as the product
//! `[[1,0],[y,1]] [[1,x],[0,1]] diag(s, 1/s)`, so for `g = [[a,b],[c,d]]`
//! the coordinates are `s = a`, `y = c/a`, `x = a b`.  The Weyl-swapped and
//! constant-conjugated charts reuse the same machinery through an entry
//! relabeling.

use crate::laurent::{FieldTag, LaurentScalar, LaurentVector, OrdVal};
use crate::measure::WeightSpec;
use crate::mpoly::{mpoly_div_exact, mpoly_gcd, ratfn_det, MPoly, RatFn, ZeroStatus};
use crate::{Error, Result};

use super::{GroupKind, GroupSpec};

// ---------------------------------------------------------------------------
// 2x2 matrices over Laurent scalars
// ---------------------------------------------------------------------------

/// A 2x2 matrix with Laurent-series entries, row major.
#[derive(Clone, PartialEq, Debug)]
pub struct Mat2 {
    pub a: LaurentScalar,
    pub b: LaurentScalar,
    pub c: LaurentScalar,
    pub d: LaurentScalar,
}

impl Mat2 {
    pub fn new(a: LaurentScalar, b: LaurentScalar, c: LaurentScalar, d: LaurentScalar) -> Mat2 {
        Mat2 { a, b, c, d }
    }

    pub fn identity(field: FieldTag) -> Mat2 {
        Mat2 {
            a: LaurentScalar::one(field),
            b: LaurentScalar::zero(field),
            c: LaurentScalar::zero(field),
            d: LaurentScalar::one(field),
        }
    }

    pub fn field(&self) -> FieldTag {
        self.a.field()
    }

    pub fn diag(u: LaurentScalar, v: LaurentScalar) -> Mat2 {
        let field = u.field();
        Mat2 {
            a: u,
            b: LaurentScalar::zero(field),
            c: LaurentScalar::zero(field),
            d: v,
        }
    }

    pub fn upper(b: LaurentScalar) -> Mat2 {
        let field = b.field();
        Mat2 {
            a: LaurentScalar::one(field),
            b,
            c: LaurentScalar::zero(field),
            d: LaurentScalar::one(field),
        }
    }

    pub fn lower(c: LaurentScalar) -> Mat2 {
        let field = c.field();
        Mat2 {
            a: LaurentScalar::one(field),
            b: LaurentScalar::zero(field),
            c,
            d: LaurentScalar::one(field),
        }
    }

    pub fn mul(&self, other: &Mat2) -> Result<Mat2> {
        Ok(Mat2 {
            a: self.a.mul(&other.a)?.add(&self.b.mul(&other.c)?)?,
            b: self.a.mul(&other.b)?.add(&self.b.mul(&other.d)?)?,
            c: self.c.mul(&other.a)?.add(&self.d.mul(&other.c)?)?,
            d: self.c.mul(&other.b)?.add(&self.d.mul(&other.d)?)?,
        })
    }

    pub fn det(&self) -> Result<LaurentScalar> {
        self.a.mul(&self.d)?.sub(&self.b.mul(&self.c)?)
    }

    /// Inverse of a determinant-one matrix (the adjugate); stays exact.
    pub fn inverse_unimodular(&self) -> Mat2 {
        Mat2 {
            a: self.d.clone(),
            b: self.b.neg(),
            c: self.c.neg(),
            d: self.a.clone(),
        }
    }

    /// Is `det - 1` zero, at least up to the working precision?
    pub fn det_is_one(&self) -> Result<bool> {
        let diff = self.det()?.sub(&LaurentScalar::one(self.field()))?;
        Ok(diff.is_zero_up_to_precision())
    }

    pub fn entries(&self) -> [&LaurentScalar; 4] {
        [&self.a, &self.b, &self.c, &self.d]
    }

    /// All entries integral (nonnegative order)?
    pub fn is_integral(&self) -> bool {
        self.entries().iter().all(|e| match e.ord() {
            Ok(OrdVal::Infinite) => true,
            Ok(OrdVal::Finite(v)) => v >= 0,
            Err(_) => false,
        })
    }
}

/// Parse the matrix literal grammar `[[1+t, t^-2],[t^3, *]]` with Laurent
/// entries; a single `*` is solved from the determinant-one constraint.
pub fn parse_mat2(s: &str, field: FieldTag) -> Result<Mat2> {
    parse_mat2_with(s, field, crate::laurent::DEFAULT_WORKING_PRECISION)
}

/// Same, with an explicit working precision for the division that solves a
/// `*` entry.
pub fn parse_mat2_with(s: &str, field: FieldTag, working: usize) -> Result<Mat2> {
    let t = s.trim();
    let inner = t
        .strip_prefix("[[")
        .and_then(|x| x.strip_suffix("]]"))
        .ok_or_else(|| Error::Parse("matrix literal must look like [[.,.],[.,.]]".into()))?;
    let rows: Vec<&str> = inner.split("],[").collect();
    if rows.len() != 2 {
        return Err(Error::Parse("matrix literal needs two rows".into()));
    }
    let mut cells = Vec::new();
    for row in rows {
        let parts: Vec<&str> = row.split(',').collect();
        if parts.len() != 2 {
            return Err(Error::Parse("matrix row needs two entries".into()));
        }
        for p in parts {
            cells.push(p.trim().to_string());
        }
    }
    let stars: Vec<usize> = cells
        .iter()
        .enumerate()
        .filter(|(_, c)| c.as_str() == "*")
        .map(|(i, _)| i)
        .collect();
    if stars.len() > 1 {
        return Err(Error::Parse("at most one * entry is allowed".into()));
    }
    let parse_cell = |c: &str| crate::laurent::parse_laurent(c, field);
    let divide = |n: LaurentScalar, d: &LaurentScalar| n.div_with(d, working);
    match stars.first() {
        None => {
            let a = parse_cell(&cells[0])?;
            let b = parse_cell(&cells[1])?;
            let c = parse_cell(&cells[2])?;
            let d = parse_cell(&cells[3])?;
            Ok(Mat2::new(a, b, c, d))
        }
        Some(&pos) => {
            let known: Vec<LaurentScalar> = cells
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != pos)
                .map(|(_, c)| parse_cell(c))
                .collect::<Result<_>>()?;
            let one = LaurentScalar::one(field);
            // indices in `known` follow cell order with `pos` removed
            let m = match pos {
                0 => {
                    let (b, c, d) = (&known[0], &known[1], &known[2]);
                    let a = divide(one.add(&b.mul(c)?)?, d)?;
                    Mat2::new(a, b.clone(), c.clone(), d.clone())
                }
                1 => {
                    let (a, c, d) = (&known[0], &known[1], &known[2]);
                    let b = divide(a.mul(d)?.sub(&one)?, c)?;
                    Mat2::new(a.clone(), b, c.clone(), d.clone())
                }
                2 => {
                    let (a, b, d) = (&known[0], &known[1], &known[2]);
                    let c = divide(a.mul(d)?.sub(&one)?, b)?;
                    Mat2::new(a.clone(), b.clone(), c, d.clone())
                }
                _ => {
                    let (a, b, c) = (&known[0], &known[1], &known[2]);
                    let d = divide(one.add(&b.mul(c)?)?, a)?;
                    Mat2::new(a.clone(), b.clone(), c.clone(), d)
                }
            };
            Ok(m)
        }
    }
}

// ---------------------------------------------------------------------------
// Charts
// ---------------------------------------------------------------------------

/// Which big-cell chart of SL2: the reference chart, the Weyl-swapped chart
/// obtained by exchanging the roles of the unipotent coordinates and
/// inverting the torus coordinate, or the chart conjugated by the constant
/// unipotent `[[1,1],[0,1]]`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ChartKind {
    Standard,
    WeylSwapped,
    Conjugated,
}

/// Chart data for a supported group: coordinate maps in and out of the big
/// cell, and the density of the invariant form in chart coordinates.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct BigCellChart {
    pub group: GroupSpec,
    pub kind: ChartKind,
}

impl BigCellChart {
    pub fn standard(group: GroupSpec) -> BigCellChart {
        BigCellChart {
            group,
            kind: ChartKind::Standard,
        }
    }

    pub fn sl2(kind: ChartKind) -> BigCellChart {
        BigCellChart {
            group: GroupSpec::sl2(),
            kind,
        }
    }

    pub fn dim(&self) -> usize {
        self.group.d
    }

    /// Weight of the invariant form in chart coordinates: the density
    /// `p = 1 / (s_1 ... s_m)`, encoded so that the arc weight is
    /// `L^{-ord_t(p o gamma)} = L^{+ ord_t(s_1 ... s_m o gamma)}`.
    pub fn density(&self) -> WeightSpec {
        match self.group.kind {
            GroupKind::Additive { d } => WeightSpec::trivial(d),
            GroupKind::Torus { m } => WeightSpec::monomial(vec![-1; m], 0),
            GroupKind::Sl2 => WeightSpec::monomial(vec![0, 0, -1], 0),
        }
    }

    /// How the conjugated chart transports a matrix before reading off the
    /// reference coordinates.
    fn conjugate(&self, w: &Mat2) -> Result<Mat2> {
        let field = w.field();
        match self.kind {
            ChartKind::Standard | ChartKind::WeylSwapped => Ok(w.clone()),
            ChartKind::Conjugated => {
                let u0 = Mat2::upper(LaurentScalar::one(field));
                let u0inv = u0.inverse_unimodular();
                u0inv.mul(w)?.mul(&u0)
            }
        }
    }

    /// The coordinate map `i` of the cell: for SL2 in the reference chart,
    /// `(x, y, s) = (a b, c/a, a)`.
    pub fn embed(&self, g: &Mat2) -> Result<LaurentVector> {
        if self.group.kind != GroupKind::Sl2 {
            return Err(Error::Domain(
                "matrix charts exist only for SL2; vector groups use the identity chart".into(),
            ));
        }
        if !g.det_is_one()? {
            return Err(Error::Domain("matrix is not in SL2 (det != 1)".into()));
        }
        let w = self.conjugate(g)?;
        let (pa, pb, pc) = match self.kind {
            // pivot entry, and the two entries that produce x and y
            ChartKind::Standard | ChartKind::Conjugated => {
                (w.a.clone(), w.b.clone(), w.c.clone())
            }
            // swapped chart: s = d, x = c d, y = b / d
            ChartKind::WeylSwapped => (w.d.clone(), w.c.clone(), w.b.clone()),
        };
        match pa.ord() {
            Ok(OrdVal::Infinite) => {
                return Err(Error::NotInBigCell(
                    "pivot entry vanishes identically".into(),
                ))
            }
            Ok(OrdVal::Finite(_)) => {}
            Err(_) => {
                return Err(Error::InsufficientPrecision(
                    "pivot entry is zero up to precision; cell membership undecidable".into(),
                ))
            }
        }
        let s = pa.clone();
        let x = pa.mul(&pb)?;
        let y = pc.div(&pa)?;
        LaurentVector::new(vec![x, y, s])
    }

    /// The inverse coordinate map on points.
    pub fn extract_point(&self, coords: &LaurentVector) -> Result<Mat2> {
        if self.group.kind != GroupKind::Sl2 {
            return Err(Error::Domain("matrix charts exist only for SL2".into()));
        }
        let x = coords.entry(0);
        let y = coords.entry(1);
        let s = coords.entry(2);
        let one = LaurentScalar::one(coords.field());
        let a = s.clone();
        let b = x.div(s)?;
        let c = y.mul(s)?;
        let d = one.add(&x.mul(y)?)?.div(s)?;
        match self.kind {
            ChartKind::Standard => Ok(Mat2::new(a, b, c, d)),
            ChartKind::WeylSwapped => Ok(Mat2::new(d, c, b, a)),
            ChartKind::Conjugated => {
                let u0 = Mat2::upper(one);
                u0.mul(&Mat2::new(a, b, c, d))?.mul(&u0.inverse_unimodular())
            }
        }
    }

    /// The symbolic section of the chart: matrix entries as rational
    /// functions of (x, y, s).
    pub fn extract_symbolic(&self, field: FieldTag) -> Result<[[RatFn; 2]; 2]> {
        if self.group.kind != GroupKind::Sl2 {
            return Err(Error::Domain("matrix charts exist only for SL2".into()));
        }
        let x = MPoly::var(3, 0, field);
        let y = MPoly::var(3, 1, field);
        let s = MPoly::var(3, 2, field);
        let one = MPoly::one(3, field);
        let a = RatFn::from_poly(s.clone());
        let b = RatFn::new(x.clone(), s.clone())?;
        let c = RatFn::from_poly(y.mul(&s)?);
        let d = RatFn::new(one.add(&x.mul(&y)?)?, s)?;
        let m = match self.kind {
            ChartKind::Standard => [[a, b], [c, d]],
            ChartKind::WeylSwapped => [[d, c], [b, a]],
            ChartKind::Conjugated => {
                // u0 * W * u0^{-1} with u0 = [[1,1],[0,1]]
                let a2 = a.add(&c)?;
                let b2 = b.add(&d)?.sub(&a)?.sub(&c)?;
                let c2 = c.clone();
                let d2 = d.sub(&c)?;
                [[a2, b2], [c2, d2]]
            }
        };
        Ok(m)
    }
}

/// Chart coordinates of a matrix: the named operation.
pub fn chart_embed(g: &Mat2, chart: &BigCellChart) -> Result<LaurentVector> {
    chart.embed(g)
}

// ---------------------------------------------------------------------------
// Translation maps
// ---------------------------------------------------------------------------

/// A d-tuple of polynomial fractions with a shared cleared denominator:
/// the coordinate expression of a translation, in the form
/// `h(t^{-M} x, t^{-M} y, t^{-M} s) = (f_1/Delta, ..., f_d/Delta)`.
#[derive(Clone, Debug)]
pub struct RationalMap {
    pub numerators: Vec<MPoly>,
    pub denominator: MPoly,
    /// gcd(f_1, .., f_d, Delta) = 1 including powers of t
    pub cleared: bool,
}

impl RationalMap {
    pub fn dim(&self) -> usize {
        self.numerators.len()
    }

    pub fn component(&self, i: usize) -> Result<RatFn> {
        RatFn::new(self.numerators[i].clone(), self.denominator.clone())
    }

    pub fn components(&self) -> Result<Vec<RatFn>> {
        (0..self.dim()).map(|i| self.component(i)).collect()
    }

    pub fn eval(&self, point: &LaurentVector) -> Result<LaurentVector> {
        let den = self.denominator.eval(point)?;
        let entries: Result<Vec<LaurentScalar>> = self
            .numerators
            .iter()
            .map(|n| n.eval(point)?.div(&den))
            .collect();
        LaurentVector::new(entries?)
    }

    /// The coordinate form of the shift morphism: `x_i -> t^N x_i`.
    pub fn shift_map(n: i64, d: usize, field: FieldTag) -> RationalMap {
        let tn = LaurentScalar::t_pow(field, n);
        RationalMap {
            numerators: (0..d)
                .map(|i| MPoly::var(d, i, field).scale(&tn).expect("same field"))
                .collect(),
            denominator: MPoly::one(d, field),
            cleared: true,
        }
    }
}

/// The left-translation map by g0 in chart coordinates, with the pole-shift
/// substitution applied and the denominator cleared:
/// `h(t^{-M} x, t^{-M} y, t^{-M} s)` as a tuple over a common denominator
/// with `gcd(f_1, ..., f_d, Delta) = 1`.
pub fn translation_map(g0: &Mat2, chart: &BigCellChart, m_shift: i64) -> Result<RationalMap> {
    let field = g0.field();
    let w = chart.extract_symbolic(field)?;
    let as_const = |v: &LaurentScalar| RatFn::constant(3, v.clone());
    // V = g0 W
    let v11 = as_const(&g0.a).mul(&w[0][0])?.add(&as_const(&g0.b).mul(&w[1][0])?)?;
    let v12 = as_const(&g0.a).mul(&w[0][1])?.add(&as_const(&g0.b).mul(&w[1][1])?)?;
    let v21 = as_const(&g0.c).mul(&w[0][0])?.add(&as_const(&g0.d).mul(&w[1][0])?)?;
    let v22 = as_const(&g0.c).mul(&w[0][1])?.add(&as_const(&g0.d).mul(&w[1][1])?)?;
    // chart coordinates of V
    let (p, qx, qy) = match chart.kind {
        ChartKind::Standard => (v11, v12, v21),
        ChartKind::WeylSwapped => (v22, v21, v12),
        ChartKind::Conjugated => {
            // coordinates of u0^{-1} V u0
            let a2 = v11.sub(&v21)?;
            let b2 = v11.add(&v12)?.sub(&v21)?.sub(&v22)?;
            let c2 = v21.clone();
            let _d2 = v21.add(&v22)?;
            (a2, b2, c2)
        }
    };
    let comp_s = p.clone();
    let comp_x = p.mul(&qx)?;
    let comp_y = qy.div(&p)?;
    let comps = [comp_x, comp_y, comp_s];
    // substitute x -> t^{-M} x componentwise
    let tm = LaurentScalar::t_pow(field, -m_shift);
    let scalars = vec![tm.clone(), tm.clone(), tm];
    let mut nums = Vec::new();
    let mut dens = Vec::new();
    for c in &comps {
        nums.push(c.num().subst_scale_all(&scalars)?);
        dens.push(c.den().subst_scale_all(&scalars)?);
    }
    let exact = nums.iter().chain(dens.iter()).all(|p| p.is_exact())
        && field == FieldTag::Rationals;
    if exact {
        // common denominator via lcm, full gcd clearing, t-normalization
        let mut den = dens[0].clone();
        for d in &dens[1..] {
            let g = mpoly_gcd(&den, d)?;
            den = den.mul(&mpoly_div_exact(d, &g)?)?;
        }
        let mut numerators = Vec::new();
        for (n, d) in nums.iter().zip(&dens) {
            let cof = mpoly_div_exact(&den, d)?;
            numerators.push(n.mul(&cof)?);
        }
        let mut g = den.clone();
        for n in &numerators {
            g = mpoly_gcd(&g, n)?;
        }
        let nontrivial = g.total_degree().unwrap_or(0) > 0 || g.num_terms() > 1;
        if nontrivial {
            den = mpoly_div_exact(&den, &g)?;
            for n in numerators.iter_mut() {
                *n = mpoly_div_exact(n, &g)?;
            }
        }
        // clear the overall power of t: minimal coefficient valuation 0
        let mut nu: Option<i64> = den.min_coeff_valuation()?;
        for n in &numerators {
            if let Some(v) = n.min_coeff_valuation()? {
                nu = Some(nu.map_or(v, |m| m.min(v)));
            }
        }
        let nu = nu.unwrap_or(0);
        let mut numerators: Vec<MPoly> = numerators.iter().map(|n| n.t_shift(-nu)).collect();
        let mut den = den.t_shift(-nu);
        // deterministic unit normalization by the leading rational of Delta
        if let Some((_, lead)) = den
            .terms()
            .max_by(|(m1, _), (m2, _)| {
                let d1: u32 = m1.iter().map(|e| *e as u32).sum();
                let d2: u32 = m2.iter().map(|e| *e as u32).sum();
                d1.cmp(&d2).then_with(|| m1.cmp(m2))
            })
            .map(|(m, c)| (m.clone(), c.clone()))
        {
            if let Ok(lc) = lead.leading() {
                if !lc.is_zero() {
                    let unit = LaurentScalar::monomial(lc.inv()?, 0);
                    den = den.scale(&unit)?;
                    for n in numerators.iter_mut() {
                        *n = n.scale(&unit)?;
                    }
                }
            }
        }
        Ok(RationalMap {
            numerators,
            denominator: den,
            cleared: true,
        })
    } else {
        // no exact gcd available: multiply denominators out
        let mut den = MPoly::one(3, field);
        for d in &dens {
            den = den.mul(d)?;
        }
        let mut numerators = Vec::new();
        for i in 0..3 {
            let mut n = nums[i].clone();
            for (j, d) in dens.iter().enumerate() {
                if j != i {
                    n = n.mul(d)?;
                }
            }
            numerators.push(n);
        }
        Ok(RationalMap {
            numerators,
            denominator: den,
            cleared: false,
        })
    }
}

/// Symbolic determinant of the Jacobian matrix of the (uncleared) map.
pub fn jacobian_det(h: &RationalMap) -> Result<RatFn> {
    let d = h.dim();
    let comps = h.components()?;
    let mut rows = Vec::with_capacity(d);
    for c in &comps {
        let row: Result<Vec<RatFn>> = (0..d).map(|j| c.derivative(j)).collect();
        rows.push(row?);
    }
    ratfn_det(&rows)
}

// ---------------------------------------------------------------------------
// The invariance identity
// ---------------------------------------------------------------------------

/// Outcome of checking `p(h(x,y,s)) det J - p(x,y,s) = 0`.
#[derive(Clone, Debug)]
pub struct IdentityReport {
    pub holds: bool,
    /// Exact when the difference is known zero; otherwise the t-precision up
    /// to which all coefficients vanish.
    pub exact: bool,
    pub qualified_precision: Option<i64>,
    /// Rendered normalized difference when the identity fails.
    pub witness: Option<String>,
}

/// Check the invariant-form identity for the translation by g0 in the given
/// chart: `p(h) * det J = p` as rational functions, with `p = 1/s`.
pub fn invariance_identity_check(g0: &Mat2, chart: &BigCellChart) -> Result<IdentityReport> {
    let field = g0.field();
    let h = translation_map(g0, chart, 0)?;
    let det = jacobian_det(&h)?;
    // p o h = Delta / f_s (the s-component is index 2)
    let p_of_h = RatFn::new(h.denominator.clone(), h.numerators[2].clone())?;
    let p = RatFn::new(
        MPoly::one(3, field),
        MPoly::var(3, 2, field),
    )?;
    let lhs = p_of_h.mul(&det)?;
    let status = lhs.equal_status(&p)?;
    Ok(match status {
        ZeroStatus::KnownZero => IdentityReport {
            holds: true,
            exact: true,
            qualified_precision: None,
            witness: None,
        },
        ZeroStatus::UpToPrecision(prec) => IdentityReport {
            holds: true,
            exact: false,
            qualified_precision: Some(prec),
            witness: None,
        },
        ZeroStatus::Nonzero => {
            let diff = lhs.sub(&p)?;
            IdentityReport {
                holds: false,
                exact: true,
                qualified_precision: None,
                witness: Some(diff.render(&["x", "y", "s"])),
            }
        }
    })
}

// ---------------------------------------------------------------------------
// Deterministic pseudo-random SL2 elements (products of exact generators)
// ---------------------------------------------------------------------------

/// Deterministic sample of SL2(F) elements built as products of diagonal,
/// upper and lower generators with exact Laurent-polynomial entries.  Used
/// by the randomized verification suites.
pub fn sample_sl2_elements(seed: u64, count: usize) -> Vec<Mat2> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let field = FieldTag::Rationals;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let factors = rng.gen_range(1..=4);
        let mut m = Mat2::identity(field);
        for _ in 0..factors {
            let choice = rng.gen_range(0..3);
            let term = |rng: &mut rand_chacha::ChaCha8Rng| {
                let mut terms = Vec::new();
                let nterms = rng.gen_range(1..=2);
                for _ in 0..nterms {
                    let k = rng.gen_range(-2..=2);
                    let c = *[1i64, -1, 2, 3].get(rng.gen_range(0..4)).unwrap();
                    terms.push((k, c));
                }
                LaurentScalar::from_int_terms(field, &terms)
            };
            let g = match choice {
                0 => {
                    let k = rng.gen_range(-3..=3i64);
                    let c = *[1i64, -1, 2].get(rng.gen_range(0..3)).unwrap();
                    let u = LaurentScalar::from_int_terms(field, &[(k, c)]);
                    Mat2::diag(u.clone(), u.inv().expect("monomial"))
                }
                1 => {
                    let b = term(&mut rng);
                    if b.is_known_zero() {
                        Mat2::identity(field)
                    } else {
                        Mat2::upper(b)
                    }
                }
                _ => {
                    let c = term(&mut rng);
                    if c.is_known_zero() {
                        Mat2::identity(field)
                    } else {
                        Mat2::lower(c)
                    }
                }
            };
            m = m.mul(&g).expect("same field");
        }
        out.push(m);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::parse_laurent;

    const Q: FieldTag = FieldTag::Rationals;

    fn ls(s: &str) -> LaurentScalar {
        parse_laurent(s, Q).unwrap()
    }

    fn std_chart() -> BigCellChart {
        BigCellChart::sl2(ChartKind::Standard)
    }

    #[test]
    fn embed_examples() {
        let chart = std_chart();
        // identity -> (0, 0, 1)
        let id = Mat2::identity(Q);
        let c = chart.embed(&id).unwrap();
        assert!(c.entry(0).is_known_zero());
        assert!(c.entry(1).is_known_zero());
        assert_eq!(c.entry(2), &ls("1"));
        // diag(t, t^-1) -> (0, 0, t)
        let g = Mat2::diag(ls("t"), ls("t^-1"));
        let c = chart.embed(&g).unwrap();
        assert!(c.entry(0).is_known_zero());
        assert!(c.entry(1).is_known_zero());
        assert_eq!(c.entry(2), &ls("t"));
        // [[1,0],[t^-1,1]] -> (0, t^-1, 1)
        let g = Mat2::lower(ls("t^-1"));
        let c = chart.embed(&g).unwrap();
        assert!(c.entry(0).is_known_zero());
        assert_eq!(c.entry(1), &ls("t^-1"));
        assert_eq!(c.entry(2), &ls("1"));
    }

    #[test]
    fn embed_rejects_cell_complement_and_non_sl2() {
        let chart = std_chart();
        let zero = LaurentScalar::zero(Q);
        // a = 0 with det 1: b c = -1
        let g = Mat2::new(zero.clone(), ls("1"), ls("-1"), ls("3"));
        assert!(matches!(chart.embed(&g), Err(Error::NotInBigCell(_))));
        let h = Mat2::new(ls("1"), ls("1"), ls("1"), ls("1"));
        assert!(chart.embed(&h).is_err());
    }

    #[test]
    fn extract_embed_round_trip_on_samples() {
        for kind in [ChartKind::Standard, ChartKind::WeylSwapped, ChartKind::Conjugated] {
            let chart = BigCellChart::sl2(kind);
            let mut checked = 0;
            for g in sample_sl2_elements(0xC0FFEE, 220) {
                let coords = match chart.embed(&g) {
                    Ok(c) => c,
                    Err(_) => continue, // outside this chart's cell
                };
                let back = chart.extract_point(&coords).unwrap();
                for (orig, rt) in g.entries().iter().zip(back.entries()) {
                    assert!(
                        orig.agrees_with(rt),
                        "round trip failed in {kind:?}: {orig} vs {rt}"
                    );
                }
                checked += 1;
            }
            assert!(checked >= 200, "only {checked} samples landed in the cell");
        }
    }

    #[test]
    fn extract_has_determinant_one_symbolically() {
        for kind in [ChartKind::Standard, ChartKind::WeylSwapped, ChartKind::Conjugated] {
            let chart = BigCellChart::sl2(kind);
            let w = chart.extract_symbolic(Q).unwrap();
            let det = w[0][0]
                .mul(&w[1][1])
                .unwrap()
                .sub(&w[0][1].mul(&w[1][0]).unwrap())
                .unwrap();
            let one = RatFn::constant(3, ls("1"));
            assert_eq!(det.equal_status(&one).unwrap(), ZeroStatus::KnownZero);
        }
    }

    #[test]
    fn translation_map_identity() {
        let h = translation_map(&Mat2::identity(Q), &std_chart(), 0).unwrap();
        assert!(h.cleared);
        // h = identity, Delta = 1
        let pt = LaurentVector::new(vec![ls("t^2"), ls("1 + t"), ls("2 + t^3")]).unwrap();
        let out = h.eval(&pt).unwrap();
        for i in 0..3 {
            assert!(out.entry(i).agrees_with(pt.entry(i)));
        }
        assert_eq!(h.denominator.total_degree(), Some(0));
    }

    #[test]
    fn translation_map_matches_pointwise_composition() {
        let chart = std_chart();
        let g0s = vec![
            Mat2::diag(ls("2"), ls("1/2")),
            Mat2::diag(ls("t"), ls("t^-1")),
            Mat2::upper(ls("1 + t")),
            Mat2::lower(ls("t^-1")),
            Mat2::upper(ls("t^-2")).mul(&Mat2::diag(ls("t"), ls("t^-1"))).unwrap(),
        ];
        let points: Vec<LaurentVector> = (0..20)
            .map(|i| {
                let a = 1 + (i % 3) as i64;
                LaurentVector::new(vec![
                    ls(&format!("{a}*t + t^2")),
                    ls(&format!("{} + t^3", i % 2)),
                    ls(&format!("{a} + t")),
                ])
                .unwrap()
            })
            .collect();
        for g0 in &g0s {
            let h = translation_map(g0, &chart, 0).unwrap();
            for pt in &points {
                let w = chart.extract_point(pt).unwrap();
                let moved = g0.mul(&w).unwrap();
                let direct = match chart.embed(&moved) {
                    Ok(c) => c,
                    Err(_) => continue,
                };
                let via_map = h.eval(pt).unwrap();
                for i in 0..3 {
                    assert!(
                        direct.entry(i).agrees_with(via_map.entry(i)),
                        "component {i} mismatch for point {pt:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn translation_map_diagonal_closed_form() {
        // g0 = diag(a, 1/a) acts by (x, y, s) -> (a^2 x, y / a^2, a s)
        let chart = std_chart();
        let g0 = Mat2::diag(ls("3"), ls("1/3"));
        let h = translation_map(&g0, &chart, 0).unwrap();
        let pt = LaurentVector::new(vec![ls("t"), ls("1 + t"), ls("1")]).unwrap();
        let out = h.eval(&pt).unwrap();
        assert!(out.entry(0).agrees_with(&ls("9*t")));
        assert!(out.entry(1).agrees_with(&ls("1/9 + 1/9*t")));
        assert!(out.entry(2).agrees_with(&ls("3")));
    }

    #[test]
    fn translation_map_cleared_with_pole_shift() {
        // g0 = [[1, t^-1],[0, 1]], M = 1: positive-degree Delta, gcd 1
        let g0 = Mat2::upper(ls("t^-1"));
        let h = translation_map(&g0, &std_chart(), 1).unwrap();
        assert!(h.cleared);
        assert!(h.denominator.total_degree().unwrap_or(0) > 0);
        // min coefficient valuation over all parts is 0 (t cleared)
        let mut nu = h.denominator.min_coeff_valuation().unwrap();
        for n in &h.numerators {
            if let Some(v) = n.min_coeff_valuation().unwrap() {
                nu = Some(nu.map_or(v, |m: i64| m.min(v)));
            }
        }
        assert_eq!(nu, Some(0));
    }

    #[test]
    fn jacobian_of_shift_map() {
        // the Jacobian determinant of x -> t^N x on d coordinates is t^{Nd}
        for (n, d) in [(1i64, 1usize), (2, 2), (3, 3)] {
            let h = RationalMap::shift_map(n, d, Q);
            let det = jacobian_det(&h).unwrap();
            let expected = RatFn::constant(d, ls(&format!("t^{}", n * d as i64)));
            assert_eq!(det.equal_status(&expected).unwrap(), ZeroStatus::KnownZero);
        }
    }

    #[test]
    fn invariance_identity_examples() {
        let chart = std_chart();
        for g0 in [
            Mat2::identity(Q),
            Mat2::diag(ls("t"), ls("t^-1")),
            Mat2::diag(ls("t^3"), ls("t^-3")),
            Mat2::upper(ls("t^-2")),
            Mat2::lower(ls("t^-2 + 1")),
        ] {
            let r = invariance_identity_check(&g0, &chart).unwrap();
            assert!(r.holds && r.exact, "identity failed for {g0:?}");
        }
    }

    #[test]
    fn invariance_identity_on_random_products() {
        let chart = std_chart();
        for g0 in sample_sl2_elements(42, 25) {
            let r = invariance_identity_check(&g0, &chart).unwrap();
            assert!(r.holds && r.exact, "identity failed for {g0:?}");
        }
    }

    #[test]
    fn matrix_literal_parsing() {
        let m = parse_mat2("[[1+t, t^-2],[t^3, *]]", Q).unwrap();
        // d = (1 + t^-2 t^3) / (1+t) = 1 exactly
        assert!(m.d.agrees_with(&ls("1")));
        assert!(m.det_is_one().unwrap());
        let m2 = parse_mat2("[[t, 0],[0, t^-1]]", Q).unwrap();
        assert_eq!(m2, Mat2::diag(ls("t"), ls("t^-1")));
        assert!(parse_mat2("[[*, *],[1, 1]]", Q).is_err());
    }

    #[test]
    fn sampled_elements_are_unimodular_and_exact() {
        for g in sample_sl2_elements(7, 50) {
            assert!(g.det().unwrap().sub(&ls("1")).unwrap().is_known_zero());
            for e in g.entries() {
                assert!(e.precision().is_none(), "inexact entry {e}");
            }
        }
    }
}
