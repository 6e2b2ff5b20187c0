//! Multivariate polynomials and rational functions with Laurent-series
//! coefficients, together with exact gcd over the rationals.
//!
//! Polynomials with exact coefficients over `Q` are reduced by clearing the
//! overall `t`-valuation and working in `Q[t, x_1, ..., x_d]`, where `t` is
//! just another variable.  Gcds there use a primitive pseudo-remainder
//! sequence, so the cleared-denominator forms and rational-function
//! normalizations below are exact; inexact coefficients simply skip the
//! reduction step (identities are then decided up to the stated precision).

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::laurent::{Coeff, FieldTag, LaurentScalar, LaurentVector, OrdVal};
use crate::{Error, Result};

pub type Mono = Vec<u16>;

// ---------------------------------------------------------------------------
// MPoly
// ---------------------------------------------------------------------------

/// Zero-detection outcome for objects with truncated coefficients.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ZeroStatus {
    /// Identically zero, exactly.
    KnownZero,
    /// All coefficients vanish up to this t-precision.
    UpToPrecision(i64),
    /// Some coefficient is known nonzero.
    Nonzero,
}

impl ZeroStatus {
    pub fn is_zero_like(self) -> bool {
        !matches!(self, ZeroStatus::Nonzero)
    }
}

/// A multivariate polynomial over Laurent-series coefficients.
#[derive(Clone, PartialEq, Debug)]
pub struct MPoly {
    nvars: usize,
    field: FieldTag,
    terms: BTreeMap<Mono, LaurentScalar>,
}

impl MPoly {
    pub fn zero(nvars: usize, field: FieldTag) -> Self {
        MPoly {
            nvars,
            field,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: LaurentScalar) -> Self {
        let field = c.field();
        let mut terms = BTreeMap::new();
        if !c.is_known_zero() {
            terms.insert(vec![0u16; nvars], c);
        }
        MPoly {
            nvars,
            field,
            terms,
        }
    }

    pub fn one(nvars: usize, field: FieldTag) -> Self {
        Self::constant(nvars, LaurentScalar::one(field))
    }

    pub fn var(nvars: usize, i: usize, field: FieldTag) -> Self {
        assert!(i < nvars);
        let mut mono = vec![0u16; nvars];
        mono[i] = 1;
        let mut terms = BTreeMap::new();
        terms.insert(mono, LaurentScalar::one(field));
        MPoly {
            nvars,
            field,
            terms,
        }
    }

    pub fn monomial(nvars: usize, mono: Mono, c: LaurentScalar) -> Self {
        assert_eq!(mono.len(), nvars);
        let field = c.field();
        let mut terms = BTreeMap::new();
        if !c.is_known_zero() {
            terms.insert(mono, c);
        }
        MPoly {
            nvars,
            field,
            terms,
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn field(&self) -> FieldTag {
        self.field
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &LaurentScalar)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_known_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// All coefficients exact (no truncation)?
    pub fn is_exact(&self) -> bool {
        self.terms.values().all(|c| c.precision().is_none())
    }

    pub fn zero_status(&self) -> ZeroStatus {
        if self.terms.is_empty() {
            return ZeroStatus::KnownZero;
        }
        let mut min_prec: Option<i64> = None;
        for c in self.terms.values() {
            if !c.is_zero_up_to_precision() {
                return ZeroStatus::Nonzero;
            }
            if let Some(p) = c.precision() {
                min_prec = Some(min_prec.map_or(p, |m: i64| m.min(p)));
            }
        }
        ZeroStatus::UpToPrecision(min_prec.unwrap_or(i64::MAX))
    }

    fn normalized(mut self) -> Self {
        self.terms.retain(|_, c| !c.is_known_zero());
        self
    }

    pub fn map_coeffs<F: Fn(&LaurentScalar) -> LaurentScalar>(&self, f: F) -> MPoly {
        MPoly {
            nvars: self.nvars,
            field: self.field,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), f(c))).collect(),
        }
        .normalized()
    }

    pub fn add(&self, other: &MPoly) -> Result<MPoly> {
        assert_eq!(self.nvars, other.nvars);
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            match terms.get_mut(m) {
                Some(existing) => {
                    *existing = existing.add(c)?;
                }
                None => {
                    terms.insert(m.clone(), c.clone());
                }
            }
        }
        Ok(MPoly {
            nvars: self.nvars,
            field: self.field,
            terms,
        }
        .normalized())
    }

    pub fn neg(&self) -> MPoly {
        self.map_coeffs(|c| c.neg())
    }

    pub fn sub(&self, other: &MPoly) -> Result<MPoly> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &MPoly) -> Result<MPoly> {
        assert_eq!(self.nvars, other.nvars);
        let mut terms: BTreeMap<Mono, LaurentScalar> = BTreeMap::new();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let mono: Mono = m1.iter().zip(m2).map(|(a, b)| a + b).collect();
                let prod = c1.mul(c2)?;
                match terms.get_mut(&mono) {
                    Some(existing) => {
                        *existing = existing.add(&prod)?;
                    }
                    None => {
                        terms.insert(mono, prod);
                    }
                }
            }
        }
        Ok(MPoly {
            nvars: self.nvars,
            field: self.field,
            terms,
        }
        .normalized())
    }

    pub fn scale(&self, c: &LaurentScalar) -> Result<MPoly> {
        if c.is_known_zero() {
            return Ok(MPoly::zero(self.nvars, self.field));
        }
        let mut terms = BTreeMap::new();
        for (m, a) in &self.terms {
            terms.insert(m.clone(), a.mul(c)?);
        }
        Ok(MPoly {
            nvars: self.nvars,
            field: self.field,
            terms,
        }
        .normalized())
    }

    pub fn pow(&self, k: u32) -> Result<MPoly> {
        let mut acc = MPoly::one(self.nvars, self.field);
        for _ in 0..k {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Formal partial derivative with respect to variable i.
    pub fn derivative(&self, i: usize) -> Result<MPoly> {
        assert!(i < self.nvars);
        let mut out = MPoly::zero(self.nvars, self.field);
        for (m, c) in &self.terms {
            let e = m[i];
            if e == 0 {
                continue;
            }
            let mut mono = m.clone();
            mono[i] = e - 1;
            let factor = LaurentScalar::from_int(self.field, e as i64);
            let coeff = c.mul(&factor)?;
            out = out.add(&MPoly::monomial(self.nvars, mono, coeff))?;
        }
        Ok(out)
    }

    /// Substitute `x_i -> c_i * x_i` for every variable.
    pub fn subst_scale_all(&self, scalars: &[LaurentScalar]) -> Result<MPoly> {
        assert_eq!(scalars.len(), self.nvars);
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            let mut coeff = c.clone();
            for (i, e) in m.iter().enumerate() {
                if *e > 0 {
                    coeff = coeff.mul(&scalars[i].pow(*e as i64)?)?;
                }
            }
            terms.insert(m.clone(), coeff);
        }
        Ok(MPoly {
            nvars: self.nvars,
            field: self.field,
            terms,
        }
        .normalized())
    }

    /// Evaluate at a point of `A^d((t))`.
    pub fn eval(&self, point: &LaurentVector) -> Result<LaurentScalar> {
        if point.dim() != self.nvars {
            return Err(Error::Domain(format!(
                "arity mismatch: {} variables, {}-dimensional point",
                self.nvars,
                point.dim()
            )));
        }
        let mut acc = LaurentScalar::zero(self.field);
        for (m, c) in &self.terms {
            let mut term = c.clone();
            for (i, e) in m.iter().enumerate() {
                if *e > 0 {
                    term = term.mul(&point.entry(i).pow(*e as i64)?)?;
                }
            }
            acc = acc.add(&term)?;
        }
        Ok(acc)
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms
            .keys()
            .map(|m| m.iter().map(|e| *e as u32).sum())
            .max()
    }

    pub fn degree_in(&self, i: usize) -> Option<u16> {
        self.terms.keys().map(|m| m[i]).max()
    }

    /// Minimal t-valuation over the coefficients with a determinate order.
    pub fn min_coeff_valuation(&self) -> Result<Option<i64>> {
        let mut min = None;
        for c in self.terms.values() {
            if let OrdVal::Finite(v) = c.ord()? {
                min = Some(match min {
                    None => v,
                    Some(m) if v < m => v,
                    Some(m) => m,
                });
            }
        }
        Ok(min)
    }

    /// Multiply every coefficient by t^k.
    pub fn t_shift(&self, k: i64) -> MPoly {
        self.map_coeffs(|c| c.t_shift(k))
    }

    /// `Some((mono, coeff))` if the polynomial has a single term.
    pub fn as_monomial(&self) -> Option<(&Mono, &LaurentScalar)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    pub fn render(&self, vars: &[&str]) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (m, c) in self.terms.iter().rev() {
            let mut factors = Vec::new();
            for (i, e) in m.iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(vars[i].to_string()),
                    _ => factors.push(format!("{}^{}", vars[i], e)),
                }
            }
            let cs = c.to_string();
            let coeff_part = if factors.is_empty() {
                format!("({cs})")
            } else if cs == "1" {
                String::new()
            } else {
                format!("({cs})*")
            };
            parts.push(format!("{}{}", coeff_part, factors.join("*")));
        }
        parts.join(" + ")
    }
}

/// Evaluate a polynomial at a point; the named operation of the scalar layer.
pub fn poly_eval(f: &MPoly, point: &LaurentVector) -> Result<LaurentScalar> {
    f.eval(point)
}

// ---------------------------------------------------------------------------
// Exact rational-coefficient polynomials (t adjoined as variable 0)
// ---------------------------------------------------------------------------

/// Flat polynomial over `Q` used for gcd computations. Variable 0 is `t`.
#[derive(Clone, PartialEq, Debug)]
pub(crate) struct QPoly {
    nvars: usize,
    terms: BTreeMap<Mono, BigRational>,
}

impl QPoly {
    fn zero(nvars: usize) -> Self {
        QPoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    fn one(nvars: usize) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(vec![0u16; nvars], BigRational::one());
        QPoly { nvars, terms }
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn is_constant(&self) -> bool {
        self.terms.len() <= 1 && self.terms.keys().all(|m| m.iter().all(|e| *e == 0))
    }

    fn normalized(mut self) -> Self {
        self.terms.retain(|_, c| !c.is_zero());
        self
    }

    fn add(&self, other: &QPoly) -> QPoly {
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            *terms.entry(m.clone()).or_insert_with(BigRational::zero) += c;
        }
        QPoly {
            nvars: self.nvars,
            terms,
        }
        .normalized()
    }

    fn neg(&self) -> QPoly {
        QPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    fn sub(&self, other: &QPoly) -> QPoly {
        self.add(&other.neg())
    }

    fn mul(&self, other: &QPoly) -> QPoly {
        let mut terms: BTreeMap<Mono, BigRational> = BTreeMap::new();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let mono: Mono = m1.iter().zip(m2).map(|(a, b)| a + b).collect();
                *terms.entry(mono).or_insert_with(BigRational::zero) += c1 * c2;
            }
        }
        QPoly {
            nvars: self.nvars,
            terms,
        }
        .normalized()
    }

    fn scale(&self, c: &BigRational) -> QPoly {
        if c.is_zero() {
            return QPoly::zero(self.nvars);
        }
        QPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    fn degree_in(&self, v: usize) -> i64 {
        self.terms.keys().map(|m| m[v] as i64).max().unwrap_or(-1)
    }

    /// Coefficient of x_v^k, as a polynomial with exponent v zeroed out.
    fn coeff_in(&self, v: usize, k: u16) -> QPoly {
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            if m[v] == k {
                let mut mono = m.clone();
                mono[v] = 0;
                terms.insert(mono, c.clone());
            }
        }
        QPoly {
            nvars: self.nvars,
            terms,
        }
    }

    /// Multiply by x_v^k.
    fn shift_var(&self, v: usize, k: u16) -> QPoly {
        QPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    let mut mono = m.clone();
                    mono[v] += k;
                    (mono, c.clone())
                })
                .collect(),
        }
    }

    /// Graded-lex leading term.
    fn leading(&self) -> Option<(&Mono, &BigRational)> {
        self.terms.iter().max_by(|(m1, _), (m2, _)| {
            let d1: u32 = m1.iter().map(|e| *e as u32).sum();
            let d2: u32 = m2.iter().map(|e| *e as u32).sum();
            d1.cmp(&d2).then_with(|| m1.cmp(m2))
        })
    }

    /// Exact multivariate division; None when not divisible.
    fn div_exact(&self, d: &QPoly) -> Option<QPoly> {
        if self.is_zero() {
            return Some(QPoly::zero(self.nvars));
        }
        let (dm, dc) = d.leading()?;
        let dm = dm.clone();
        let dc = dc.clone();
        let mut rem = self.clone();
        let mut quot = QPoly::zero(self.nvars);
        let mut guard = 0usize;
        while !rem.is_zero() {
            guard += 1;
            if guard > 200_000 {
                return None;
            }
            let (rm, rc) = rem.leading()?;
            if rm.iter().zip(&dm).any(|(a, b)| a < b) {
                return None;
            }
            let mono: Mono = rm.iter().zip(&dm).map(|(a, b)| a - b).collect();
            let coef = rc / &dc;
            let mut t = BTreeMap::new();
            t.insert(mono, coef);
            let qterm = QPoly {
                nvars: self.nvars,
                terms: t,
            };
            quot = quot.add(&qterm);
            rem = rem.sub(&qterm.mul(d));
        }
        Some(quot)
    }

    /// Pseudo-remainder of self by d with respect to variable v.
    fn pseudo_rem(&self, d: &QPoly, v: usize) -> QPoly {
        let dd = d.degree_in(v);
        debug_assert!(dd >= 0);
        let lc = d.coeff_in(v, dd as u16);
        let mut r = self.clone();
        while !r.is_zero() && r.degree_in(v) >= dd {
            let dr = r.degree_in(v);
            let lr = r.coeff_in(v, dr as u16);
            r = lc.mul(&r).sub(&lr.shift_var(v, (dr - dd) as u16).mul(d));
        }
        r
    }

    /// Content with respect to variable v (gcd of the v-coefficients).
    fn content_in(&self, v: usize) -> QPoly {
        let mut c = QPoly::zero(self.nvars);
        for k in 0..=self.degree_in(v).max(0) {
            let coeff = self.coeff_in(v, k as u16);
            if !coeff.is_zero() {
                c = qgcd(&c, &coeff);
            }
        }
        c
    }

    /// Scale so the graded-lex leading coefficient is 1.
    fn monic(&self) -> QPoly {
        match self.leading() {
            None => self.clone(),
            Some((_, c)) => {
                let inv = BigRational::one() / c.clone();
                self.scale(&inv)
            }
        }
    }

    fn vars_present(&self) -> Vec<usize> {
        let mut present = vec![false; self.nvars];
        for m in self.terms.keys() {
            for (i, e) in m.iter().enumerate() {
                if *e > 0 {
                    present[i] = true;
                }
            }
        }
        present
            .into_iter()
            .enumerate()
            .filter_map(|(i, p)| if p { Some(i) } else { None })
            .collect()
    }
}

/// Gcd over Q[t, x...] via primitive pseudo-remainder sequences, normalized
/// to a graded-lex monic representative.
pub(crate) fn qgcd(f: &QPoly, g: &QPoly) -> QPoly {
    if f.is_zero() {
        return g.monic();
    }
    if g.is_zero() {
        return f.monic();
    }
    if f.is_constant() || g.is_constant() {
        return QPoly::one(f.nvars);
    }
    let v = *f
        .vars_present()
        .iter()
        .chain(g.vars_present().iter())
        .max()
        .expect("nonconstant");
    let cf = f.content_in(v);
    let cg = g.content_in(v);
    let c = qgcd(&cf, &cg);
    let fp = f.div_exact(&cf).expect("content divides");
    let gp = g.div_exact(&cg).expect("content divides");
    let (mut a, mut b) = if fp.degree_in(v) >= gp.degree_in(v) {
        (fp, gp)
    } else {
        (gp, fp)
    };
    loop {
        if b.is_zero() {
            break;
        }
        if b.degree_in(v) == 0 {
            // constant in the main variable: the v-parts are coprime
            return c.monic();
        }
        let r = a.pseudo_rem(&b, v);
        let r = if r.is_zero() {
            r
        } else {
            let cont = r.content_in(v);
            r.div_exact(&cont).expect("content divides")
        };
        a = b;
        b = r;
    }
    let cont = a.content_in(v);
    let pp = a.div_exact(&cont).expect("content divides");
    c.mul(&pp).monic()
}

/// Convert an exact rational-coefficient MPoly into `(tmin, Q[t, x...])`
/// with the overall `t`-valuation cleared.
pub(crate) fn mpoly_to_qpoly(f: &MPoly) -> Result<(i64, QPoly)> {
    if f.field() != FieldTag::Rationals {
        return Err(Error::UnsupportedConstraint(
            "exact polynomial reduction is only available over the rationals".into(),
        ));
    }
    if !f.is_exact() {
        return Err(Error::InsufficientPrecision(
            "polynomial has truncated coefficients".into(),
        ));
    }
    if f.is_known_zero() {
        return Ok((0, QPoly::zero(f.nvars() + 1)));
    }
    let tmin = f.min_coeff_valuation()?.expect("nonzero exact polynomial");
    let mut terms = BTreeMap::new();
    for (m, c) in f.terms() {
        let v = match c.ord()? {
            OrdVal::Finite(v) => v,
            OrdVal::Infinite => continue,
        };
        // exact scalars have finite support; walk it
        let mut k = v;
        loop {
            let coeff = match c.coeff_at(k) {
                Ok(x) => x,
                Err(_) => break,
            };
            if !coeff.is_zero() {
                let r = match coeff {
                    Coeff::Rat(r) => r,
                    _ => unreachable!("field checked above"),
                };
                let mut mono = Vec::with_capacity(f.nvars() + 1);
                mono.push((k - tmin) as u16);
                mono.extend(m.iter().cloned());
                terms.insert(mono, r);
            }
            k += 1;
            if coeff_tail_is_zero(c, k) {
                break;
            }
        }
    }
    Ok((
        tmin,
        QPoly {
            nvars: f.nvars() + 1,
            terms,
        }
        .normalized(),
    ))
}

fn coeff_tail_is_zero(c: &LaurentScalar, from: i64) -> bool {
    for j in from..from + 256 {
        match c.coeff_at(j) {
            Ok(x) => {
                if !x.is_zero() {
                    return false;
                }
            }
            Err(_) => return true,
        }
    }
    true
}

/// Convert back: `t^tshift * q(t, x...)` as an MPoly over `Q`.
pub(crate) fn qpoly_to_mpoly(q: &QPoly, tshift: i64, nvars: usize) -> MPoly {
    let field = FieldTag::Rationals;
    let mut acc: BTreeMap<Mono, Vec<(i64, Coeff)>> = BTreeMap::new();
    for (m, c) in &q.terms {
        let texp = m[0] as i64 + tshift;
        let mono: Mono = m[1..].to_vec();
        acc.entry(mono)
            .or_default()
            .push((texp, Coeff::Rat(c.clone())));
    }
    let mut out = MPoly::zero(nvars, field);
    for (mono, ts) in acc {
        let c = LaurentScalar::from_terms(field, &ts);
        out = out
            .add(&MPoly::monomial(nvars, mono, c))
            .expect("same field");
    }
    out
}

/// Exact gcd of MPolys over Q (up to a unit `c * t^k`); errors on truncated
/// coefficients.
pub fn mpoly_gcd(f: &MPoly, g: &MPoly) -> Result<MPoly> {
    let (_, qf) = mpoly_to_qpoly(f)?;
    let (_, qg) = mpoly_to_qpoly(g)?;
    let gc = qgcd(&qf, &qg);
    // strip any t factor: t is a unit in Laurent coefficients
    let tord = gc.terms.keys().map(|m| m[0]).min().unwrap_or(0);
    let shifted = if tord > 0 {
        let mut terms = BTreeMap::new();
        for (m, c) in &gc.terms {
            let mut mono = m.clone();
            mono[0] -= tord;
            terms.insert(mono, c.clone());
        }
        QPoly {
            nvars: gc.nvars,
            terms,
        }
    } else {
        gc
    };
    Ok(qpoly_to_mpoly(&shifted, 0, f.nvars()))
}

/// Exact quotient f / g when g divides f (as Laurent-coefficient
/// polynomials); errors otherwise.
pub fn mpoly_div_exact(f: &MPoly, g: &MPoly) -> Result<MPoly> {
    let (tf, qf) = mpoly_to_qpoly(f)?;
    let (tg, qg) = mpoly_to_qpoly(g)?;
    let q = qf
        .div_exact(&qg)
        .ok_or_else(|| Error::Domain("polynomial division is not exact".into()))?;
    Ok(qpoly_to_mpoly(&q, tf - tg, f.nvars()))
}

// ---------------------------------------------------------------------------
// Rational functions
// ---------------------------------------------------------------------------

/// A quotient of multivariate polynomials.
#[derive(Clone, Debug)]
pub struct RatFn {
    num: MPoly,
    den: MPoly,
}

impl RatFn {
    pub fn new(num: MPoly, den: MPoly) -> Result<RatFn> {
        if den.zero_status() == ZeroStatus::KnownZero {
            return Err(Error::DivisionByZero("zero denominator".into()));
        }
        let mut r = RatFn { num, den };
        r.reduce();
        Ok(r)
    }

    pub fn from_poly(num: MPoly) -> RatFn {
        let den = MPoly::one(num.nvars(), num.field());
        RatFn { num, den }
    }

    pub fn constant(nvars: usize, c: LaurentScalar) -> RatFn {
        RatFn::from_poly(MPoly::constant(nvars, c))
    }

    pub fn var(nvars: usize, i: usize, field: FieldTag) -> RatFn {
        RatFn::from_poly(MPoly::var(nvars, i, field))
    }

    pub fn num(&self) -> &MPoly {
        &self.num
    }

    pub fn den(&self) -> &MPoly {
        &self.den
    }

    pub fn nvars(&self) -> usize {
        self.num.nvars()
    }

    pub fn field(&self) -> FieldTag {
        self.num.field()
    }

    /// Cancel the gcd and normalize the denominator's leading coefficient to
    /// `1 * t^0 + ...` when all coefficients are exact rationals; otherwise
    /// leave the pair as is.
    fn reduce(&mut self) {
        if self.num.is_known_zero() {
            self.den = MPoly::one(self.num.nvars(), self.num.field());
            return;
        }
        if self.num.field() == FieldTag::Rationals && self.num.is_exact() && self.den.is_exact() {
            if let Ok(g) = mpoly_gcd(&self.num, &self.den) {
                if g.total_degree().unwrap_or(0) > 0 || g.num_terms() > 1 {
                    if let (Ok(n), Ok(d)) = (
                        mpoly_div_exact(&self.num, &g),
                        mpoly_div_exact(&self.den, &g),
                    ) {
                        self.num = n;
                        self.den = d;
                    }
                }
            }
        }
        // deterministic normalization by the exact unit `c * t^k` carried by
        // the denominator's graded-lex leading coefficient
        let lead = self
            .den
            .terms()
            .max_by(|(m1, _), (m2, _)| {
                let d1: u32 = m1.iter().map(|e| *e as u32).sum();
                let d2: u32 = m2.iter().map(|e| *e as u32).sum();
                d1.cmp(&d2).then_with(|| m1.cmp(m2))
            })
            .map(|(_, c)| c.clone());
        if let Some(c) = lead {
            if let (Ok(OrdVal::Finite(k)), Ok(lc)) = (c.ord(), c.leading()) {
                if let Ok(inv) = lc.inv() {
                    let unit = LaurentScalar::monomial(inv, -k);
                    if let (Ok(n), Ok(d)) = (self.num.scale(&unit), self.den.scale(&unit)) {
                        self.num = n;
                        self.den = d;
                    }
                }
            }
        }
    }

    pub fn add(&self, other: &RatFn) -> Result<RatFn> {
        let num = self.num.mul(&other.den)?.add(&other.num.mul(&self.den)?)?;
        let den = self.den.mul(&other.den)?;
        RatFn::new(num, den)
    }

    pub fn sub(&self, other: &RatFn) -> Result<RatFn> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> RatFn {
        RatFn {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, other: &RatFn) -> Result<RatFn> {
        RatFn::new(self.num.mul(&other.num)?, self.den.mul(&other.den)?)
    }

    pub fn div(&self, other: &RatFn) -> Result<RatFn> {
        if other.num.zero_status() == ZeroStatus::KnownZero {
            return Err(Error::DivisionByZero("division by zero function".into()));
        }
        RatFn::new(self.num.mul(&other.den)?, self.den.mul(&other.num)?)
    }

    pub fn inv(&self) -> Result<RatFn> {
        if self.num.zero_status() == ZeroStatus::KnownZero {
            return Err(Error::DivisionByZero("inverse of zero function".into()));
        }
        RatFn::new(self.den.clone(), self.num.clone())
    }

    /// Quotient-rule partial derivative.
    pub fn derivative(&self, i: usize) -> Result<RatFn> {
        let num = self
            .num
            .derivative(i)?
            .mul(&self.den)?
            .sub(&self.num.mul(&self.den.derivative(i)?)?)?;
        let den = self.den.mul(&self.den)?;
        RatFn::new(num, den)
    }

    pub fn eval(&self, point: &LaurentVector) -> Result<LaurentScalar> {
        let n = self.num.eval(point)?;
        let d = self.den.eval(point)?;
        n.div(&d)
    }

    /// Zero status of the function (numerator status after reduction).
    pub fn zero_status(&self) -> ZeroStatus {
        self.num.zero_status()
    }

    /// Status of `self - other`, decided by cross multiplication.
    pub fn equal_status(&self, other: &RatFn) -> Result<ZeroStatus> {
        let diff = self.num.mul(&other.den)?.sub(&other.num.mul(&self.den)?)?;
        Ok(diff.zero_status())
    }

    pub fn render(&self, vars: &[&str]) -> String {
        let den_is_one = self.den.as_monomial().map_or(false, |(m, c)| {
            m.iter().all(|e| *e == 0)
                && c.precision().is_none()
                && c.ord().ok() == Some(OrdVal::Finite(0))
                && c.leading().map_or(false, |l| l.is_one())
        });
        if den_is_one {
            self.num.render(vars)
        } else {
            format!("({}) / ({})", self.num.render(vars), self.den.render(vars))
        }
    }
}

/// Determinant of a square matrix of rational functions, by Laplace
/// expansion along the first column.
pub fn ratfn_det(m: &[Vec<RatFn>]) -> Result<RatFn> {
    let n = m.len();
    assert!(n > 0 && m.iter().all(|row| row.len() == n));
    if n == 1 {
        return Ok(m[0][0].clone());
    }
    let nv = m[0][0].nvars();
    let field = m[0][0].field();
    let mut acc = RatFn::constant(nv, LaurentScalar::zero(field));
    for i in 0..n {
        if m[i][0].zero_status() == ZeroStatus::KnownZero {
            continue;
        }
        let minor: Vec<Vec<RatFn>> = m
            .iter()
            .enumerate()
            .filter(|(r, _)| *r != i)
            .map(|(_, row)| row[1..].to_vec())
            .collect();
        let sub = ratfn_det(&minor)?;
        let term = m[i][0].mul(&sub)?;
        acc = if i % 2 == 0 {
            acc.add(&term)?
        } else {
            acc.sub(&term)?
        };
    }
    Ok(acc)
}

impl fmt::Display for RatFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (0..self.nvars()).map(|i| format!("x{i}")).collect();
        let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        write!(f, "{}", self.render(&refs))
    }
}
