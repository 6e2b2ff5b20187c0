//! Truncated Laurent series over the rationals or a prime field, with
//! explicit valuation and precision tracking.
//!
//! A nonzero scalar is stored as a dense coefficient window
//! `[val, prec)` whose leading entry is nonzero; coefficients below `val`
//! are zero and coefficients at indices `>= prec` are unknown.  Exact
//! (polynomial-supported) scalars carry no precision bound, so cancellation
//! among exact series produces a distinguished known-zero instead of a
//! spurious indeterminate.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::{Error, Result};

/// Working precision used when an inverse (or quotient) of an exact series
/// has to be truncated: this many coefficients past the valuation are kept.
pub const DEFAULT_WORKING_PRECISION: usize = 24;

// ---------------------------------------------------------------------------
// Ground fields
// ---------------------------------------------------------------------------

/// The coefficient field: exact rationals for symbolic work, a prime field
/// for the counting oracle.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub enum FieldTag {
    Rationals,
    Prime(u64),
}

impl fmt::Display for FieldTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldTag::Rationals => write!(f, "Q"),
            FieldTag::Prime(p) => write!(f, "F{p}"),
        }
    }
}

/// An element of the ground field.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Coeff {
    Rat(BigRational),
    Fp { p: u64, v: u64 },
}

fn mod_inv(a: u64, p: u64) -> Option<u64> {
    // extended Euclid; p is a small prime
    let (mut t, mut new_t) = (0i128, 1i128);
    let (mut r, mut new_r) = (p as i128, (a % p) as i128);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    if r != 1 {
        return None;
    }
    Some(t.rem_euclid(p as i128) as u64)
}

impl Coeff {
    pub fn tag(&self) -> FieldTag {
        match self {
            Coeff::Rat(_) => FieldTag::Rationals,
            Coeff::Fp { p, .. } => FieldTag::Prime(*p),
        }
    }

    pub fn zero(tag: FieldTag) -> Coeff {
        match tag {
            FieldTag::Rationals => Coeff::Rat(BigRational::zero()),
            FieldTag::Prime(p) => Coeff::Fp { p, v: 0 },
        }
    }

    pub fn one(tag: FieldTag) -> Coeff {
        match tag {
            FieldTag::Rationals => Coeff::Rat(BigRational::one()),
            FieldTag::Prime(p) => Coeff::Fp { p, v: 1 },
        }
    }

    pub fn from_int(tag: FieldTag, n: i64) -> Coeff {
        match tag {
            FieldTag::Rationals => Coeff::Rat(BigRational::from_integer(BigInt::from(n))),
            FieldTag::Prime(p) => Coeff::Fp {
                p,
                v: n.rem_euclid(p as i64) as u64,
            },
        }
    }

    /// Interpret an exact rational in the field; fails if the denominator is
    /// divisible by the characteristic.
    pub fn from_rational(tag: FieldTag, r: &BigRational) -> Result<Coeff> {
        match tag {
            FieldTag::Rationals => Ok(Coeff::Rat(r.clone())),
            FieldTag::Prime(p) => {
                let pb = BigInt::from(p);
                let reduce = |x: &BigInt| -> u64 {
                    let m = ((x % &pb) + &pb) % &pb;
                    m.to_string().parse::<u64>().unwrap_or(0)
                };
                let num = reduce(r.numer());
                let den = reduce(r.denom());
                let dinv = mod_inv(den, p).ok_or_else(|| {
                    Error::Domain(format!("denominator of {r} vanishes mod {p}"))
                })?;
                Ok(Coeff::Fp {
                    p,
                    v: num * dinv % p,
                })
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Coeff::Rat(r) => r.is_zero(),
            Coeff::Fp { v, .. } => *v == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Coeff::Rat(r) => r.is_one(),
            Coeff::Fp { v, .. } => *v == 1,
        }
    }

    fn check(&self, other: &Coeff) -> Result<()> {
        if self.tag() != other.tag() {
            return Err(Error::FieldMismatch(format!(
                "{} vs {}",
                self.tag(),
                other.tag()
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Coeff) -> Result<Coeff> {
        self.check(other)?;
        Ok(match (self, other) {
            (Coeff::Rat(a), Coeff::Rat(b)) => Coeff::Rat(a + b),
            (Coeff::Fp { p, v: a }, Coeff::Fp { v: b, .. }) => Coeff::Fp {
                p: *p,
                v: (a + b) % p,
            },
            _ => unreachable!(),
        })
    }

    pub fn mul(&self, other: &Coeff) -> Result<Coeff> {
        self.check(other)?;
        Ok(match (self, other) {
            (Coeff::Rat(a), Coeff::Rat(b)) => Coeff::Rat(a * b),
            (Coeff::Fp { p, v: a }, Coeff::Fp { v: b, .. }) => Coeff::Fp {
                p: *p,
                v: a * b % p,
            },
            _ => unreachable!(),
        })
    }

    pub fn neg(&self) -> Coeff {
        match self {
            Coeff::Rat(a) => Coeff::Rat(-a),
            Coeff::Fp { p, v } => Coeff::Fp {
                p: *p,
                v: if *v == 0 { 0 } else { p - v },
            },
        }
    }

    pub fn sub(&self, other: &Coeff) -> Result<Coeff> {
        self.add(&other.neg())
    }

    pub fn inv(&self) -> Result<Coeff> {
        if self.is_zero() {
            return Err(Error::DivisionByZero("coefficient inverse of 0".into()));
        }
        Ok(match self {
            Coeff::Rat(a) => Coeff::Rat(a.recip()),
            Coeff::Fp { p, v } => Coeff::Fp {
                p: *p,
                v: mod_inv(*v, *p)
                    .ok_or_else(|| Error::DivisionByZero(format!("{v} not a unit mod {p}")))?,
            },
        })
    }
}

impl fmt::Display for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coeff::Rat(r) => write!(f, "{r}"),
            Coeff::Fp { v, .. } => write!(f, "{v}"),
        }
    }
}

// ---------------------------------------------------------------------------
// LaurentScalar
// ---------------------------------------------------------------------------

/// Truncated Laurent series: an element of `k((t))` known up to a precision.
#[derive(Clone, PartialEq, Debug)]
pub struct LaurentScalar {
    field: FieldTag,
    repr: Repr,
}

#[derive(Clone, PartialEq, Debug)]
enum Repr {
    /// Exactly zero (infinite precision).
    Zero,
    /// Dense coefficient window starting at `val`; the window end is `prec`
    /// when finite and `val + coeffs.len()` for exact series.  The leading
    /// coefficient is nonzero unless the window is empty, which encodes
    /// "zero modulo t^prec" for finite precision.
    Ser {
        val: i64,
        coeffs: Vec<Coeff>,
        prec: Option<i64>,
    },
}

/// Order of vanishing: finite for nonzero series, `Infinite` for known zero.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum OrdVal {
    Finite(i64),
    Infinite,
}

impl OrdVal {
    pub fn finite(self) -> Option<i64> {
        match self {
            OrdVal::Finite(v) => Some(v),
            OrdVal::Infinite => None,
        }
    }
}

impl LaurentScalar {
    fn normalized(
        field: FieldTag,
        mut val: i64,
        mut coeffs: Vec<Coeff>,
        prec: Option<i64>,
    ) -> Self {
        if let Some(p) = prec {
            let want = (p - val).max(0) as usize;
            coeffs.truncate(want);
            while coeffs.len() < want {
                coeffs.push(Coeff::zero(field));
            }
        }
        let mut start = 0;
        while start < coeffs.len() && coeffs[start].is_zero() {
            start += 1;
        }
        val += start as i64;
        coeffs.drain(..start);
        match prec {
            None => {
                while coeffs.last().map_or(false, |c| c.is_zero()) {
                    coeffs.pop();
                }
                if coeffs.is_empty() {
                    return LaurentScalar {
                        field,
                        repr: Repr::Zero,
                    };
                }
                LaurentScalar {
                    field,
                    repr: Repr::Ser { val, coeffs, prec },
                }
            }
            Some(p) => {
                if coeffs.is_empty() {
                    val = p;
                }
                LaurentScalar {
                    field,
                    repr: Repr::Ser { val, coeffs, prec },
                }
            }
        }
    }

    /// Exact zero with the known-zero flag.
    pub fn zero(field: FieldTag) -> Self {
        LaurentScalar {
            field,
            repr: Repr::Zero,
        }
    }

    pub fn one(field: FieldTag) -> Self {
        Self::monomial(Coeff::one(field), 0)
    }

    pub fn from_int(field: FieldTag, n: i64) -> Self {
        Self::monomial(Coeff::from_int(field, n), 0)
    }

    /// c * t^k, exact.
    pub fn monomial(c: Coeff, k: i64) -> Self {
        let field = c.tag();
        Self::normalized(field, k, vec![c], None)
    }

    /// t^k, exact.
    pub fn t_pow(field: FieldTag, k: i64) -> Self {
        Self::monomial(Coeff::one(field), k)
    }

    /// Exact series from (exponent, coefficient) terms.
    pub fn from_terms(field: FieldTag, terms: &[(i64, Coeff)]) -> Self {
        if terms.is_empty() {
            return Self::zero(field);
        }
        let lo = terms.iter().map(|(k, _)| *k).min().unwrap();
        let hi = terms.iter().map(|(k, _)| *k).max().unwrap();
        let mut coeffs = vec![Coeff::zero(field); (hi - lo + 1) as usize];
        for (k, c) in terms {
            let slot = &mut coeffs[(k - lo) as usize];
            *slot = slot.add(c).expect("same field");
        }
        Self::normalized(field, lo, coeffs, None)
    }

    /// Exact series with small integer coefficients (convenience).
    pub fn from_int_terms(field: FieldTag, terms: &[(i64, i64)]) -> Self {
        let ts: Vec<(i64, Coeff)> = terms
            .iter()
            .map(|(k, c)| (*k, Coeff::from_int(field, *c)))
            .collect();
        Self::from_terms(field, &ts)
    }

    /// "Zero modulo t^prec": nothing known except the window bound.
    pub fn unknown_beyond(field: FieldTag, prec: i64) -> Self {
        LaurentScalar {
            field,
            repr: Repr::Ser {
                val: prec,
                coeffs: Vec::new(),
                prec: Some(prec),
            },
        }
    }

    pub fn field(&self) -> FieldTag {
        self.field
    }

    pub fn is_known_zero(&self) -> bool {
        matches!(self.repr, Repr::Zero)
    }

    /// True when every stored coefficient vanishes (known zero, or zero up to
    /// the stated precision).
    pub fn is_zero_up_to_precision(&self) -> bool {
        match &self.repr {
            Repr::Zero => true,
            Repr::Ser { coeffs, .. } => coeffs.is_empty(),
        }
    }

    /// Precision bound: first unknown exponent, `None` for exact series.
    pub fn precision(&self) -> Option<i64> {
        match &self.repr {
            Repr::Zero => None,
            Repr::Ser { prec, .. } => *prec,
        }
    }

    /// The valuation; an error if all known coefficients vanish without the
    /// series being known zero, `Infinite` for the exact zero.
    pub fn ord(&self) -> Result<OrdVal> {
        match &self.repr {
            Repr::Zero => Ok(OrdVal::Infinite),
            Repr::Ser { val, coeffs, prec } => {
                if coeffs.is_empty() {
                    Err(Error::IndeterminateOrder(format!(
                        "series is 0 mod t^{} but not known zero",
                        prec.unwrap_or(*val)
                    )))
                } else {
                    Ok(OrdVal::Finite(*val))
                }
            }
        }
    }

    /// Leading coefficient of a series with known order.
    pub fn leading(&self) -> Result<Coeff> {
        match &self.repr {
            Repr::Zero => Ok(Coeff::zero(self.field)),
            Repr::Ser { coeffs, .. } => coeffs
                .first()
                .cloned()
                .ok_or_else(|| Error::IndeterminateOrder("no known leading coefficient".into())),
        }
    }

    /// Coefficient at exponent j; an error if j is beyond the precision.
    pub fn coeff_at(&self, j: i64) -> Result<Coeff> {
        match &self.repr {
            Repr::Zero => Ok(Coeff::zero(self.field)),
            Repr::Ser { val, coeffs, prec } => {
                if let Some(p) = prec {
                    if j >= *p {
                        return Err(Error::InsufficientPrecision(format!(
                            "coefficient at t^{j} requested, known only below t^{p}"
                        )));
                    }
                }
                if j < *val {
                    Ok(Coeff::zero(self.field))
                } else {
                    let idx = (j - val) as usize;
                    Ok(coeffs
                        .get(idx)
                        .cloned()
                        .unwrap_or_else(|| Coeff::zero(self.field)))
                }
            }
        }
    }

    fn check(&self, other: &LaurentScalar) -> Result<()> {
        if self.field != other.field {
            return Err(Error::FieldMismatch(format!(
                "{} vs {}",
                self.field, other.field
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &LaurentScalar) -> Result<LaurentScalar> {
        self.check(other)?;
        match (&self.repr, &other.repr) {
            (Repr::Zero, _) => Ok(other.clone()),
            (_, Repr::Zero) => Ok(self.clone()),
            (
                Repr::Ser {
                    val: v1,
                    coeffs: c1,
                    prec: p1,
                },
                Repr::Ser {
                    val: v2,
                    coeffs: c2,
                    prec: p2,
                },
            ) => {
                let prec = match (p1, p2) {
                    (None, None) => None,
                    (Some(a), None) => Some(*a),
                    (None, Some(b)) => Some(*b),
                    (Some(a), Some(b)) => Some(*a.min(b)),
                };
                let lo = (*v1).min(*v2);
                let hi_known = (*v1 + c1.len() as i64).max(*v2 + c2.len() as i64);
                let hi = prec.unwrap_or(hi_known).max(lo);
                let mut coeffs = Vec::new();
                for j in lo..hi {
                    let a = if j >= *v1 && j < v1 + c1.len() as i64 {
                        c1[(j - v1) as usize].clone()
                    } else {
                        Coeff::zero(self.field)
                    };
                    let b = if j >= *v2 && j < v2 + c2.len() as i64 {
                        c2[(j - v2) as usize].clone()
                    } else {
                        Coeff::zero(self.field)
                    };
                    coeffs.push(a.add(&b)?);
                }
                Ok(Self::normalized(self.field, lo, coeffs, prec))
            }
        }
    }

    pub fn neg(&self) -> LaurentScalar {
        match &self.repr {
            Repr::Zero => self.clone(),
            Repr::Ser { val, coeffs, prec } => LaurentScalar {
                field: self.field,
                repr: Repr::Ser {
                    val: *val,
                    coeffs: coeffs.iter().map(|c| c.neg()).collect(),
                    prec: *prec,
                },
            },
        }
    }

    pub fn sub(&self, other: &LaurentScalar) -> Result<LaurentScalar> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &LaurentScalar) -> Result<LaurentScalar> {
        self.check(other)?;
        match (&self.repr, &other.repr) {
            (Repr::Zero, _) | (_, Repr::Zero) => Ok(Self::zero(self.field)),
            (
                Repr::Ser {
                    val: v1,
                    coeffs: c1,
                    prec: p1,
                },
                Repr::Ser {
                    val: v2,
                    coeffs: c2,
                    prec: p2,
                },
            ) => {
                let mut cands = Vec::new();
                if let Some(p2) = p2 {
                    cands.push(v1 + p2);
                }
                if let Some(p1) = p1 {
                    cands.push(v2 + p1);
                }
                let prec = cands.into_iter().min();
                let lo = v1 + v2;
                let hi = match prec {
                    Some(p) => p,
                    None => lo + (c1.len() + c2.len()) as i64 - 1,
                };
                let n = (hi - lo).max(0) as usize;
                let mut coeffs = vec![Coeff::zero(self.field); n];
                for (i, a) in c1.iter().enumerate() {
                    if a.is_zero() {
                        continue;
                    }
                    for (j, b) in c2.iter().enumerate() {
                        if i + j < n {
                            coeffs[i + j] = coeffs[i + j].add(&a.mul(b)?)?;
                        }
                    }
                }
                Ok(Self::normalized(self.field, lo, coeffs, prec))
            }
        }
    }

    /// Multiplicative inverse, truncating to the working precision when the
    /// result is an infinite series.
    pub fn inv_with(&self, working: usize) -> Result<LaurentScalar> {
        match &self.repr {
            Repr::Zero => Err(Error::DivisionByZero("inverse of known zero".into())),
            Repr::Ser { val, coeffs, prec } => {
                if coeffs.is_empty() {
                    return Err(Error::IndeterminateOrder(
                        "inverse of a series that is zero up to precision".into(),
                    ));
                }
                let v = *val;
                let c0 = coeffs[0].inv()?;
                if coeffs.len() == 1 && prec.is_none() {
                    // exact monomial: exact inverse
                    return Ok(Self::monomial(c0, -v));
                }
                let out_prec = match prec {
                    Some(p) => (p - 2 * v).min(-v + working as i64),
                    None => -v + working as i64,
                };
                let n = (out_prec + v).max(0) as usize;
                let mut b: Vec<Coeff> = Vec::with_capacity(n);
                b.push(c0.clone());
                for k in 1..n {
                    let mut acc = Coeff::zero(self.field);
                    for i in 1..=k.min(coeffs.len() - 1) {
                        acc = acc.add(&coeffs[i].mul(&b[k - i])?)?;
                    }
                    b.push(acc.neg().mul(&c0)?);
                }
                Ok(Self::normalized(self.field, -v, b, Some(out_prec)))
            }
        }
    }

    pub fn inv(&self) -> Result<LaurentScalar> {
        self.inv_with(DEFAULT_WORKING_PRECISION)
    }

    pub fn div(&self, other: &LaurentScalar) -> Result<LaurentScalar> {
        // exact division first: if self = q * other with exact q, keep it exact
        if let (Repr::Ser { prec: None, .. }, Repr::Ser { prec: None, .. }) =
            (&self.repr, &other.repr)
        {
            if let Some(q) = self.div_exact(other) {
                return Ok(q);
            }
        }
        self.mul(&other.inv()?)
    }

    pub fn div_with(&self, other: &LaurentScalar, working: usize) -> Result<LaurentScalar> {
        if let (Repr::Ser { prec: None, .. }, Repr::Ser { prec: None, .. }) =
            (&self.repr, &other.repr)
        {
            if let Some(q) = self.div_exact(other) {
                return Ok(q);
            }
        }
        self.mul(&other.inv_with(working)?)
    }

    /// Exact quotient of exact series, when the division terminates.
    fn div_exact(&self, other: &LaurentScalar) -> Option<LaurentScalar> {
        let (v1, c1) = match &self.repr {
            Repr::Zero => return Some(self.clone()),
            Repr::Ser {
                val,
                coeffs,
                prec: None,
            } => (*val, coeffs.clone()),
            _ => return None,
        };
        let (v2, c2) = match &other.repr {
            Repr::Ser {
                val,
                coeffs,
                prec: None,
            } => (*val, coeffs.clone()),
            _ => return None,
        };
        // long division from the low end; terminates iff the quotient is a
        // Laurent polynomial of degree <= len(c1) - len(c2)
        if c1.len() < c2.len() {
            return None;
        }
        let n = c1.len() - c2.len() + 1;
        let lead_inv = c2[0].inv().ok()?;
        let mut rem = c1;
        let mut quot = Vec::with_capacity(n);
        for k in 0..n {
            let q = rem[k].mul(&lead_inv).ok()?;
            for (j, d) in c2.iter().enumerate() {
                let prod = q.mul(d).ok()?;
                rem[k + j] = rem[k + j].sub(&prod).ok()?;
            }
            quot.push(q);
        }
        if rem.iter().any(|c| !c.is_zero()) {
            return None;
        }
        Some(Self::normalized(self.field, v1 - v2, quot, None))
    }

    /// Multiplication by t^N: shifts valuation and precision.
    pub fn t_shift(&self, n: i64) -> LaurentScalar {
        match &self.repr {
            Repr::Zero => self.clone(),
            Repr::Ser { val, coeffs, prec } => LaurentScalar {
                field: self.field,
                repr: Repr::Ser {
                    val: val + n,
                    coeffs: coeffs.clone(),
                    prec: prec.map(|p| p + n),
                },
            },
        }
    }

    pub fn pow(&self, k: i64) -> Result<LaurentScalar> {
        if k < 0 {
            return self.inv()?.pow(-k);
        }
        let mut acc = Self::one(self.field);
        for _ in 0..k {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Drop knowledge beyond the given exponent.
    pub fn truncate(&self, prec: i64) -> LaurentScalar {
        match &self.repr {
            Repr::Zero => Self::unknown_beyond(self.field, prec),
            Repr::Ser {
                val,
                coeffs,
                prec: p,
            } => {
                let newp = match p {
                    Some(q) => (*q).min(prec),
                    None => prec,
                };
                Self::normalized(self.field, *val, coeffs.clone(), Some(newp))
            }
        }
    }

    /// Do the two scalars agree on every coefficient both of them know?
    pub fn agrees_with(&self, other: &LaurentScalar) -> bool {
        if self.field != other.field {
            return false;
        }
        let lo = match (&self.repr, &other.repr) {
            (Repr::Zero, Repr::Zero) => return true,
            (Repr::Ser { val, .. }, Repr::Zero) | (Repr::Zero, Repr::Ser { val, .. }) => *val,
            (Repr::Ser { val: a, .. }, Repr::Ser { val: b, .. }) => (*a).min(*b),
        };
        let end = |x: &LaurentScalar| match &x.repr {
            Repr::Zero => lo,
            Repr::Ser { val, coeffs, .. } => val + coeffs.len() as i64,
        };
        let hi = match (self.precision(), other.precision()) {
            (None, None) => end(self).max(end(other)),
            (Some(p), None) | (None, Some(p)) => p,
            (Some(p), Some(q)) => p.min(q),
        };
        for j in lo..hi {
            match (self.coeff_at(j), other.coeff_at(j)) {
                (Ok(a), Ok(b)) => {
                    if a != b {
                        return false;
                    }
                }
                _ => return false,
            }
        }
        true
    }
}

/// Named operations mirroring the public surface.
pub fn l_add(a: &LaurentScalar, b: &LaurentScalar) -> Result<LaurentScalar> {
    a.add(b)
}
pub fn l_mul(a: &LaurentScalar, b: &LaurentScalar) -> Result<LaurentScalar> {
    a.mul(b)
}
pub fn l_neg(a: &LaurentScalar) -> LaurentScalar {
    a.neg()
}
pub fn l_inv(a: &LaurentScalar) -> Result<LaurentScalar> {
    a.inv()
}
pub fn ord_t(a: &LaurentScalar) -> Result<OrdVal> {
    a.ord()
}
pub fn t_shift(a: &LaurentScalar, n: i64) -> LaurentScalar {
    a.t_shift(n)
}

// ---------------------------------------------------------------------------
// LaurentVector
// ---------------------------------------------------------------------------

/// A point of `A^d((t))`: a tuple of Laurent scalars over a common field.
#[derive(Clone, PartialEq, Debug)]
pub struct LaurentVector {
    entries: Vec<LaurentScalar>,
}

impl LaurentVector {
    pub fn new(entries: Vec<LaurentScalar>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Domain("empty vector".into()));
        }
        let tag = entries[0].field();
        for e in &entries {
            if e.field() != tag {
                return Err(Error::FieldMismatch("mixed fields in vector".into()));
            }
        }
        Ok(LaurentVector { entries })
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn field(&self) -> FieldTag {
        self.entries[0].field()
    }

    pub fn entry(&self, i: usize) -> &LaurentScalar {
        &self.entries[i]
    }

    pub fn entries(&self) -> &[LaurentScalar] {
        &self.entries
    }

    /// Common precision floor over the entries (None when all exact).
    pub fn min_precision(&self) -> Option<i64> {
        self.entries.iter().filter_map(|e| e.precision()).min()
    }

    /// Multiply every entry by t^N.
    pub fn t_shift(&self, n: i64) -> LaurentVector {
        LaurentVector {
            entries: self.entries.iter().map(|e| e.t_shift(n)).collect(),
        }
    }

    pub fn add(&self, other: &LaurentVector) -> Result<LaurentVector> {
        if self.dim() != other.dim() {
            return Err(Error::Domain("dimension mismatch".into()));
        }
        let entries: Result<Vec<_>> = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.add(b))
            .collect();
        Ok(LaurentVector { entries: entries? })
    }
}

// ---------------------------------------------------------------------------
// Rendering and parsing: "c_v*t^v + ... + O(t^P)"
// ---------------------------------------------------------------------------

impl fmt::Display for LaurentScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Zero => write!(f, "0"),
            Repr::Ser { val, coeffs, prec } => {
                let mut first = true;
                for (i, c) in coeffs.iter().enumerate() {
                    if c.is_zero() {
                        continue;
                    }
                    let k = val + i as i64;
                    let (neg, mag) = match c {
                        Coeff::Rat(r) => (r.is_negative(), Coeff::Rat(r.abs())),
                        Coeff::Fp { .. } => (false, c.clone()),
                    };
                    if first {
                        if neg {
                            write!(f, "-")?;
                        }
                    } else if neg {
                        write!(f, " - ")?;
                    } else {
                        write!(f, " + ")?;
                    }
                    if k == 0 {
                        write!(f, "{mag}")?;
                    } else {
                        if !mag.is_one() {
                            write!(f, "{mag}*")?;
                        }
                        if k == 1 {
                            write!(f, "t")?;
                        } else {
                            write!(f, "t^{k}")?;
                        }
                    }
                    first = false;
                }
                match prec {
                    Some(p) => {
                        if !first {
                            write!(f, " + ")?;
                        }
                        write!(f, "O(t^{p})")
                    }
                    None => {
                        if first {
                            write!(f, "0")?;
                        }
                        Ok(())
                    }
                }
            }
        }
    }
}

/// Parse the scalar grammar `c_v*t^v + ... + O(t^P)`, with integer or
/// fraction coefficients, in the given field.
pub fn parse_laurent(s: &str, field: FieldTag) -> Result<LaurentScalar> {
    let s = s.trim();
    if s == "0" {
        return Ok(LaurentScalar::zero(field));
    }
    let mut terms: Vec<(i64, BigRational)> = Vec::new();
    let mut prec: Option<i64> = None;
    // split on top-level + and - that are not exponent signs
    let mut chunks: Vec<(i64, String)> = Vec::new();
    let mut cur = String::new();
    let mut sign = 1i64;
    for (i, ch) in s.char_indices() {
        match ch {
            '+' | '-' => {
                let prev = s[..i].trim_end().chars().last();
                if matches!(prev, Some('^')) || matches!(prev, Some('(')) {
                    cur.push(ch);
                } else if cur.trim().is_empty() {
                    if ch == '-' {
                        sign = -sign;
                    }
                } else {
                    chunks.push((sign, cur.trim().to_string()));
                    cur = String::new();
                    sign = if ch == '-' { -1 } else { 1 };
                }
            }
            _ => cur.push(ch),
        }
    }
    if !cur.trim().is_empty() {
        chunks.push((sign, cur.trim().to_string()));
    }
    for (sg, body) in chunks {
        if let Some(rest) = body.strip_prefix("O(") {
            let inner = rest
                .strip_suffix(')')
                .ok_or_else(|| Error::Parse(format!("bad O-term {body:?}")))?;
            let p = if inner == "t" {
                1
            } else {
                inner
                    .strip_prefix("t^")
                    .ok_or_else(|| Error::Parse(format!("bad O-term {body:?}")))?
                    .parse::<i64>()
                    .map_err(|_| Error::Parse(format!("bad O-term exponent in {body:?}")))?
            };
            prec = Some(match prec {
                Some(q) => q.min(p),
                None => p,
            });
            continue;
        }
        let (coef_str, t_part) = match body.find('t') {
            Some(pos) => (
                body[..pos].trim().trim_end_matches('*').trim(),
                Some(body[pos..].trim()),
            ),
            None => (body.as_str(), None),
        };
        let coef: BigRational = if coef_str.is_empty() {
            BigRational::one()
        } else if let Some((n, d)) = coef_str.split_once('/') {
            let n: BigInt = n
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad coefficient {coef_str:?}")))?;
            let d: BigInt = d
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad coefficient {coef_str:?}")))?;
            BigRational::new(n, d)
        } else {
            let n: BigInt = coef_str
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad coefficient {coef_str:?}")))?;
            BigRational::from_integer(n)
        };
        let exp = match t_part {
            None => 0,
            Some("t") => 1,
            Some(t) => t
                .strip_prefix("t^")
                .ok_or_else(|| Error::Parse(format!("bad term {body:?}")))?
                .parse::<i64>()
                .map_err(|_| Error::Parse(format!("bad exponent in {body:?}")))?,
        };
        let signed = if sg < 0 { -coef } else { coef };
        terms.push((exp, signed));
    }
    let mut cs: Vec<(i64, Coeff)> = Vec::new();
    for (k, r) in terms {
        cs.push((k, Coeff::from_rational(field, &r)?));
    }
    let exact = LaurentScalar::from_terms(field, &cs);
    Ok(match prec {
        Some(p) => exact.truncate(p),
        None => exact,
    })
}
