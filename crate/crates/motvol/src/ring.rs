//! Arithmetic in the computable subring of the localized, dimensionally
//! completed Grothendieck ring.
//!
//! Elements are rational functions `P(L) / (L^a * prod_j (L^{b_j} - 1)^{m_j})`
//! with integer-coefficient numerator.  Internally the denominator is kept as
//! a multiset of cyclotomic factors `Phi_n(L)`: the products `L^b - 1`
//! generate the same multiplicative lattice, and only the cyclotomic basis
//! admits a unique fully reduced form (e.g. `1/(L+1)` has no gcd-reduced
//! representation with `L^b - 1` factors alone, but `Phi_2 = L + 1` does).
//! Rendering and parsing use the `L^b - 1` grammar; the conversion between
//! the two bases is Moebius inversion on divisors.
//!
//! Structural equality of canonical forms coincides with ring equality.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Dense integer polynomials in one variable (the Lefschetz class L).
// ---------------------------------------------------------------------------

/// Integer polynomial, coefficients ascending, no trailing zeros.
#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub(crate) struct ZPoly(Vec<BigInt>);

impl ZPoly {
    pub fn zero() -> Self {
        ZPoly(Vec::new())
    }

    pub fn one() -> Self {
        ZPoly(vec![BigInt::one()])
    }

    pub fn constant(c: BigInt) -> Self {
        if c.is_zero() {
            Self::zero()
        } else {
            ZPoly(vec![c])
        }
    }

    pub fn monomial(c: BigInt, k: usize) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        let mut v = vec![BigInt::zero(); k + 1];
        v[k] = c;
        ZPoly(v)
    }

    pub fn from_coeffs(mut v: Vec<BigInt>) -> Self {
        while v.last().map_or(false, |c| c.is_zero()) {
            v.pop();
        }
        ZPoly(v)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.0.len() as i64 - 1)
        }
    }

    /// Index of the lowest nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.0.iter().position(|c| !c.is_zero())
    }

    pub fn coeff(&self, k: usize) -> BigInt {
        self.0.get(k).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn add(&self, other: &ZPoly) -> ZPoly {
        let n = self.0.len().max(other.0.len());
        let mut v = Vec::with_capacity(n);
        for k in 0..n {
            v.push(self.coeff(k) + other.coeff(k));
        }
        ZPoly::from_coeffs(v)
    }

    pub fn sub(&self, other: &ZPoly) -> ZPoly {
        let n = self.0.len().max(other.0.len());
        let mut v = Vec::with_capacity(n);
        for k in 0..n {
            v.push(self.coeff(k) - other.coeff(k));
        }
        ZPoly::from_coeffs(v)
    }

    pub fn neg(&self) -> ZPoly {
        ZPoly(self.0.iter().map(|c| -c).collect())
    }

    pub fn mul(&self, other: &ZPoly) -> ZPoly {
        if self.is_zero() || other.is_zero() {
            return ZPoly::zero();
        }
        let mut v = vec![BigInt::zero(); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.0.iter().enumerate() {
                v[i + j] += a * b;
            }
        }
        ZPoly::from_coeffs(v)
    }

    /// Multiply by L^k.
    pub fn shl(&self, k: usize) -> ZPoly {
        if self.is_zero() {
            return ZPoly::zero();
        }
        let mut v = vec![BigInt::zero(); k];
        v.extend(self.0.iter().cloned());
        ZPoly(v)
    }

    /// Divide by L^k (must be exactly divisible).
    pub fn shr(&self, k: usize) -> ZPoly {
        if self.is_zero() {
            return ZPoly::zero();
        }
        debug_assert!(self.valuation().map_or(true, |v| v >= k));
        ZPoly(self.0[k..].to_vec())
    }

    /// Exact division by a monic divisor; None if not exactly divisible.
    pub fn div_exact_monic(&self, d: &ZPoly) -> Option<ZPoly> {
        if self.is_zero() {
            return Some(ZPoly::zero());
        }
        let dd = d.degree().expect("monic divisor is nonzero") as usize;
        debug_assert!(d.0[dd].is_one(), "divisor must be monic");
        let nd = self.0.len() - 1;
        if nd < dd {
            return None;
        }
        let mut rem = self.0.clone();
        let mut quot = vec![BigInt::zero(); nd - dd + 1];
        for k in (0..=nd - dd).rev() {
            let c = rem[k + dd].clone();
            if c.is_zero() {
                continue;
            }
            quot[k] = c.clone();
            for (j, dj) in d.0.iter().enumerate() {
                rem[k + j] -= &c * dj;
            }
        }
        if rem.iter().any(|c| !c.is_zero()) {
            None
        } else {
            Some(ZPoly::from_coeffs(quot))
        }
    }

    pub fn eval_rational(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.0.iter().rev() {
            acc = acc * x + BigRational::from_integer(c.clone());
        }
        acc
    }
}

/// Euler totient, for degrees of cyclotomic polynomials.
pub(crate) fn euler_phi(n: u32) -> u32 {
    let mut n = n;
    let mut result = n;
    let mut p = 2u32;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}

/// The n-th cyclotomic polynomial, by exact division of L^n - 1 by the
/// cyclotomic polynomials of the proper divisors.
pub(crate) fn cyclotomic(n: u32) -> ZPoly {
    debug_assert!(n >= 1);
    // L^n - 1
    let mut num = ZPoly::monomial(BigInt::one(), n as usize);
    num = num.sub(&ZPoly::one());
    for d in 1..n {
        if n % d == 0 {
            let phi_d = cyclotomic(d);
            num = num
                .div_exact_monic(&phi_d)
                .expect("cyclotomic division is exact");
        }
    }
    num
}

/// Sorted divisors of n.
fn divisors(n: u32) -> Vec<u32> {
    let mut ds: Vec<u32> = (1..=n).filter(|d| n % d == 0).collect();
    ds.sort_unstable();
    ds
}

/// Moebius function.
fn moebius(n: u32) -> i64 {
    let mut n = n;
    let mut k = 0;
    let mut p = 2u32;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            k += 1;
        }
        p += 1;
    }
    if n > 1 {
        k += 1;
    }
    if k % 2 == 0 {
        1
    } else {
        -1
    }
}

// ---------------------------------------------------------------------------
// MotClass
// ---------------------------------------------------------------------------

/// An element of `Z[L, L^{-1}, (L^b - 1)^{-1} : b >= 1]` in canonical form.
///
/// The value is `numer(L) / (L^lpow * prod_n Phi_n(L)^{cyclo[n]})`.
/// Invariants of the canonical form: the numerator has nonzero constant term
/// (powers of L are absorbed into `lpow`), no cyclotomic factor of the
/// denominator divides it, and the zero element is `(0, 0, {})`.  Structural
/// equality therefore decides ring equality.
#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub struct MotClass {
    numer: ZPoly,
    lpow: i64,
    cyclo: BTreeMap<u32, u32>,
}

impl MotClass {
    fn canonical(mut numer: ZPoly, mut lpow: i64, mut cyclo: BTreeMap<u32, u32>) -> Self {
        if numer.is_zero() {
            return MotClass {
                numer: ZPoly::zero(),
                lpow: 0,
                cyclo: BTreeMap::new(),
            };
        }
        if let Some(v) = numer.valuation() {
            if v > 0 {
                numer = numer.shr(v);
                lpow -= v as i64;
            }
        }
        let ns: Vec<u32> = cyclo.keys().cloned().collect();
        for n in ns {
            let phi = cyclotomic(n);
            while *cyclo.get(&n).unwrap_or(&0) > 0 {
                match numer.div_exact_monic(&phi) {
                    Some(q) => {
                        numer = q;
                        let e = cyclo.get_mut(&n).unwrap();
                        *e -= 1;
                        if *e == 0 {
                            cyclo.remove(&n);
                            break;
                        }
                    }
                    None => break,
                }
            }
        }
        MotClass { numer, lpow, cyclo }
    }

    pub fn zero() -> Self {
        MotClass::canonical(ZPoly::zero(), 0, BTreeMap::new())
    }

    pub fn one() -> Self {
        MotClass::canonical(ZPoly::one(), 0, BTreeMap::new())
    }

    pub fn is_zero(&self) -> bool {
        self.numer.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self == &Self::one()
    }

    /// The Lefschetz class L.
    pub fn l() -> Self {
        Self::l_pow(1)
    }

    /// L^k for any integer k.
    pub fn l_pow(k: i64) -> Self {
        MotClass::canonical(ZPoly::one(), -k, BTreeMap::new())
    }

    pub fn int(c: i64) -> Self {
        MotClass::canonical(ZPoly::constant(BigInt::from(c)), 0, BTreeMap::new())
    }

    /// c * L^k from integer data.
    pub fn term(c: i64, k: i64) -> Self {
        MotClass::canonical(ZPoly::constant(BigInt::from(c)), -k, BTreeMap::new())
    }

    /// 1 / (L^b - 1)^m.
    pub fn inv_l_pow_minus_one(b: u32, m: u32) -> Self {
        assert!(b >= 1);
        let mut cyclo = BTreeMap::new();
        for d in divisors(b) {
            cyclo.insert(d, m);
        }
        MotClass::canonical(ZPoly::one(), 0, cyclo)
    }

    /// (L - 1)^m, the class of an m-torus.
    pub fn torus(m: u32) -> Self {
        let mut acc = MotClass::one();
        let lm1 = MotClass::l() - MotClass::one();
        for _ in 0..m {
            acc = &acc * &lm1;
        }
        acc
    }

    pub fn add(&self, other: &MotClass) -> MotClass {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        // Common denominator: L^max(a1,a2) * prod Phi_n^{max(e1,e2)}.
        let a = self.lpow.max(other.lpow);
        let mut cyclo = BTreeMap::new();
        for (n, e) in self.cyclo.iter().chain(other.cyclo.iter()) {
            let cur = cyclo.entry(*n).or_insert(0u32);
            *cur = (*cur).max(*e);
        }
        let lift = |x: &MotClass| -> ZPoly {
            let mut p = x.numer.shl((a - x.lpow) as usize);
            for (n, e) in &cyclo {
                let have = x.cyclo.get(n).cloned().unwrap_or(0);
                let phi = cyclotomic(*n);
                for _ in have..*e {
                    p = p.mul(&phi);
                }
            }
            p
        };
        let numer = lift(self).add(&lift(other));
        MotClass::canonical(numer, a, cyclo)
    }

    pub fn mul(&self, other: &MotClass) -> MotClass {
        if self.is_zero() || other.is_zero() {
            return MotClass::zero();
        }
        let numer = self.numer.mul(&other.numer);
        let lpow = self.lpow + other.lpow;
        let mut cyclo = self.cyclo.clone();
        for (n, e) in &other.cyclo {
            *cyclo.entry(*n).or_insert(0) += e;
        }
        MotClass::canonical(numer, lpow, cyclo)
    }

    pub fn neg(&self) -> MotClass {
        MotClass {
            numer: self.numer.neg(),
            lpow: self.lpow,
            cyclo: self.cyclo.clone(),
        }
    }

    pub fn sub(&self, other: &MotClass) -> MotClass {
        self.add(&other.neg())
    }

    pub fn pow(&self, k: u32) -> MotClass {
        let mut acc = MotClass::one();
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Virtual dimension: the degree in L as a rational function.
    /// `None` encodes minus infinity (the zero element).
    pub fn vdim(&self) -> Option<i64> {
        let d = self.numer.degree()?;
        let denom_deg: i64 = self
            .cyclo
            .iter()
            .map(|(n, e)| euler_phi(*n) as i64 * *e as i64)
            .sum();
        Some(d - self.lpow - denom_deg)
    }

    /// The norm 2^vdim with norm(0) = 0, used only for convergence
    /// bookkeeping.
    pub fn norm(&self) -> f64 {
        match self.vdim() {
            None => 0.0,
            Some(v) => (v as f64).exp2(),
        }
    }

    /// Value at L = q as an exact rational. Requires q >= 2 so that no
    /// denominator factor vanishes.
    pub fn specialize(&self, q: i64) -> Result<BigRational> {
        if q < 2 {
            return Err(Error::Domain(format!(
                "specialize requires q >= 2, got {q}"
            )));
        }
        let qr = BigRational::from_integer(BigInt::from(q));
        let mut val = self.numer.eval_rational(&qr);
        let lq = qr.clone();
        // divide by L^lpow
        if self.lpow >= 0 {
            for _ in 0..self.lpow {
                val /= lq.clone();
            }
        } else {
            for _ in 0..-self.lpow {
                val *= lq.clone();
            }
        }
        for (n, e) in &self.cyclo {
            let phi_q = cyclotomic(*n).eval_rational(&qr);
            for _ in 0..*e {
                val /= phi_q.clone();
            }
        }
        Ok(val)
    }

    /// Terms of the L^{-1}-adic expansion with exponent > m; the remainder
    /// lies in the filtration piece F_m.
    pub fn expand(&self, m: i64) -> TruncatedSeries {
        let mut terms = BTreeMap::new();
        if let Some(top) = self.vdim() {
            if top > m {
                let need = (top - m) as usize;
                // denominator D = prod Phi_n^e, monic of degree tdeg
                let mut den = ZPoly::one();
                for (n, e) in &self.cyclo {
                    let phi = cyclotomic(*n);
                    for _ in 0..*e {
                        den = den.mul(&phi);
                    }
                }
                let pdeg = self.numer.degree().unwrap() as usize;
                let tdeg = den.degree().unwrap() as usize;
                // reversed coefficient sequences: series in u = L^{-1}
                let rev = |p: &ZPoly, d: usize| -> Vec<BigInt> {
                    (0..=d).map(|i| p.coeff(d - i)).collect()
                };
                let pr = rev(&self.numer, pdeg);
                let dr = rev(&den, tdeg); // constant term 1
                debug_assert!(dr[0].is_one());
                // q = pr / dr as a power series in u, to `need` terms
                let mut quot = Vec::with_capacity(need);
                for k in 0..need {
                    let mut c = pr.get(k).cloned().unwrap_or_else(BigInt::zero);
                    for j in 1..=k.min(tdeg) {
                        c -= &dr[j] * &quot[k - j];
                    }
                    quot.push(c);
                }
                // coefficient of u^k corresponds to exponent pdeg - tdeg - lpow - k
                let top_exp = pdeg as i64 - tdeg as i64 - self.lpow;
                debug_assert_eq!(top_exp, top);
                for (k, c) in quot.into_iter().enumerate() {
                    if !c.is_zero() {
                        terms.insert(top_exp - k as i64, c);
                    }
                }
            }
        }
        TruncatedSeries { cutoff: m, terms }
    }

    /// Render as `(numer, lpow, factors)` in the `L^b - 1` basis.  Factors
    /// with negative multiplicity are multiplied into the numerator.
    fn render_parts(&self) -> (ZPoly, i64, Vec<(u32, u32)>) {
        // Moebius inversion: multiplicity of (L^b - 1) is
        // sum over multiples n = b*k present of mu(k) * e_n.
        let mut mult: BTreeMap<u32, i64> = BTreeMap::new();
        let mut ns: Vec<u32> = Vec::new();
        for n in self.cyclo.keys() {
            for d in divisors(*n) {
                if !ns.contains(&d) {
                    ns.push(d);
                }
            }
        }
        ns.sort_unstable();
        for b in &ns {
            let mut m = 0i64;
            for (n, e) in &self.cyclo {
                if n % b == 0 {
                    m += moebius(n / b) * *e as i64;
                }
            }
            if m != 0 {
                mult.insert(*b, m);
            }
        }
        let mut numer = self.numer.clone();
        let mut factors = Vec::new();
        for (b, m) in mult {
            if m > 0 {
                factors.push((b, m as u32));
            } else {
                // (L^b - 1)^{-m} into the numerator
                let f = ZPoly::monomial(BigInt::one(), b as usize).sub(&ZPoly::one());
                for _ in 0..(-m) {
                    numer = numer.mul(&f);
                }
            }
        }
        (numer, self.lpow, factors)
    }
}

impl std::ops::Add for &MotClass {
    type Output = MotClass;
    fn add(self, rhs: &MotClass) -> MotClass {
        MotClass::add(self, rhs)
    }
}
impl std::ops::Sub for &MotClass {
    type Output = MotClass;
    fn sub(self, rhs: &MotClass) -> MotClass {
        MotClass::sub(self, rhs)
    }
}
impl std::ops::Mul for &MotClass {
    type Output = MotClass;
    fn mul(self, rhs: &MotClass) -> MotClass {
        MotClass::mul(self, rhs)
    }
}
impl std::ops::Neg for &MotClass {
    type Output = MotClass;
    fn neg(self) -> MotClass {
        MotClass::neg(self)
    }
}
impl std::ops::Add for MotClass {
    type Output = MotClass;
    fn add(self, rhs: MotClass) -> MotClass {
        MotClass::add(&self, &rhs)
    }
}
impl std::ops::Sub for MotClass {
    type Output = MotClass;
    fn sub(self, rhs: MotClass) -> MotClass {
        MotClass::sub(&self, &rhs)
    }
}
impl std::ops::Mul for MotClass {
    type Output = MotClass;
    fn mul(self, rhs: MotClass) -> MotClass {
        MotClass::mul(&self, &rhs)
    }
}

/// Named ring operations, mirroring the engine's public surface.
pub fn ring_add(x: &MotClass, y: &MotClass) -> MotClass {
    x.add(y)
}
pub fn ring_mul(x: &MotClass, y: &MotClass) -> MotClass {
    x.mul(y)
}

/// Closed form of the convergent geometric family
/// `sum_{n >= n0} c * L^{-k n} = c * L^{-k(n0-1)} / (L^k - 1)`, k >= 1.
pub fn geometric_sum(c: &MotClass, k: i64, n0: i64) -> Result<MotClass> {
    if k <= 0 {
        return Err(Error::Divergence(format!(
            "geometric ratio L^{} does not tend to zero in the completion",
            -k
        )));
    }
    if c.is_zero() {
        return Ok(MotClass::zero());
    }
    let tail = MotClass::l_pow(-k * (n0 - 1)).mul(&MotClass::inv_l_pow_minus_one(k as u32, 1));
    Ok(c.mul(&tail))
}

// ---------------------------------------------------------------------------
// Truncated series with respect to the dimensional filtration
// ---------------------------------------------------------------------------

/// Finitely many terms `sum c_k L^k` with `k > cutoff`, representing an
/// element of the completion modulo the filtration piece F_cutoff.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TruncatedSeries {
    cutoff: i64,
    terms: BTreeMap<i64, BigInt>,
}

impl TruncatedSeries {
    pub fn new(cutoff: i64, terms: BTreeMap<i64, BigInt>) -> Self {
        let terms = terms
            .into_iter()
            .filter(|(k, c)| *k > cutoff && !c.is_zero())
            .collect();
        TruncatedSeries { cutoff, terms }
    }

    pub fn cutoff(&self) -> i64 {
        self.cutoff
    }

    pub fn terms(&self) -> &BTreeMap<i64, BigInt> {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Re-truncate at a coarser cutoff m' >= m.
    pub fn restrict(&self, cutoff: i64) -> TruncatedSeries {
        assert!(cutoff >= self.cutoff);
        TruncatedSeries {
            cutoff,
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| **k > cutoff)
                .map(|(k, c)| (*k, c.clone()))
                .collect(),
        }
    }
}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "O(L^{})", self.cutoff);
        }
        let mut first = true;
        for (k, c) in self.terms.iter().rev() {
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let a = c.abs();
            if a.is_one() {
                write!(f, "L^{}", k)?;
            } else {
                write!(f, "{}*L^{}", a, k)?;
            }
            first = false;
        }
        write!(f, " + O(L^{})", self.cutoff)
    }
}

// ---------------------------------------------------------------------------
// Rendering and parsing
// ---------------------------------------------------------------------------

fn fmt_poly(p: &ZPoly, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if p.is_zero() {
        return write!(f, "0");
    }
    let deg = p.degree().unwrap() as usize;
    let mut first = true;
    for k in (0..=deg).rev() {
        let c = p.coeff(k);
        if c.is_zero() {
            continue;
        }
        if first {
            if c.is_negative() {
                write!(f, "-")?;
            }
        } else if c.is_negative() {
            write!(f, " - ")?;
        } else {
            write!(f, " + ")?;
        }
        let a = c.abs();
        if k == 0 {
            write!(f, "{}", a)?;
        } else {
            if !a.is_one() {
                write!(f, "{}*", a)?;
            }
            if k == 1 {
                write!(f, "L")?;
            } else {
                write!(f, "L^{}", k)?;
            }
        }
        first = false;
    }
    Ok(())
}

impl fmt::Display for MotClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let (numer, lpow, factors) = self.render_parts();
        // Pure term c*L^k renders compactly.
        if factors.is_empty() && numer.degree() == Some(numer.valuation().unwrap() as i64) {
            let k = numer.valuation().unwrap() as i64 - lpow;
            let c = numer.coeff(numer.valuation().unwrap());
            if k == 0 {
                return write!(f, "{}", c);
            }
            let var = if k == 1 { "L".to_string() } else { format!("L^{}", k) };
            if c.is_one() {
                return write!(f, "{}", var);
            }
            if c == BigInt::from(-1) {
                return write!(f, "-{}", var);
            }
            return write!(f, "{}*{}", c, var);
        }
        // numerator, shifted by negative lpow if any
        let (numer, lpow) = if lpow < 0 {
            (numer.shl((-lpow) as usize), 0)
        } else {
            (numer, lpow)
        };
        if lpow == 0 && factors.is_empty() {
            return fmt_poly(&numer, f);
        }
        let multi_term = {
            let v = numer.valuation().unwrap() as i64;
            numer.degree() != Some(v)
        };
        if multi_term {
            write!(f, "(")?;
            fmt_poly(&numer, f)?;
            write!(f, ")")?;
        } else {
            fmt_poly(&numer, f)?;
        }
        if lpow == 0 && factors.len() == 1 {
            // single cyclotomic-product factor: no extra paren group
            let (b, m) = factors[0];
            if b == 1 {
                write!(f, " / (L - 1)")?;
            } else {
                write!(f, " / (L^{} - 1)", b)?;
            }
            if m > 1 {
                write!(f, "^{}", m)?;
            }
            return Ok(());
        }
        write!(f, " / (")?;
        let mut first = true;
        if lpow > 0 {
            if lpow == 1 {
                write!(f, "L")?;
            } else {
                write!(f, "L^{}", lpow)?;
            }
            first = false;
        }
        for (b, m) in &factors {
            if !first {
                write!(f, " * ")?;
            }
            if *b == 1 {
                write!(f, "(L - 1)")?;
            } else {
                write!(f, "(L^{} - 1)", b)?;
            }
            if *m > 1 {
                write!(f, "^{}", m)?;
            }
            first = false;
        }
        write!(f, ")")
    }
}

// Tokenizer for the MotClass grammar.
#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    L,
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
    LParen,
    RParen,
}

fn tokenize(s: &str) -> Result<Vec<Tok>> {
    let mut toks = Vec::new();
    let b = s.as_bytes();
    let mut i = 0;
    while i < b.len() {
        let c = b[i] as char;
        match c {
            ' ' | '\t' | '\n' => i += 1,
            'L' => {
                toks.push(Tok::L);
                i += 1;
            }
            '+' => {
                toks.push(Tok::Plus);
                i += 1;
            }
            '-' => {
                toks.push(Tok::Minus);
                i += 1;
            }
            '*' => {
                toks.push(Tok::Star);
                i += 1;
            }
            '^' => {
                toks.push(Tok::Caret);
                i += 1;
            }
            '/' => {
                toks.push(Tok::Slash);
                i += 1;
            }
            '(' => {
                toks.push(Tok::LParen);
                i += 1;
            }
            ')' => {
                toks.push(Tok::RParen);
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < b.len() && (b[i] as char).is_ascii_digit() {
                    i += 1;
                }
                let n: BigInt = s[start..i].parse().map_err(|_| {
                    Error::Parse(format!("bad integer in {:?}", &s[start..i]))
                })?;
                toks.push(Tok::Int(n));
            }
            _ => return Err(Error::Parse(format!("unexpected character {c:?} in {s:?}"))),
        }
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }
    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }
    fn expect(&mut self, t: Tok) -> Result<()> {
        match self.next() {
            Some(got) if got == t => Ok(()),
            got => Err(Error::Parse(format!("expected {t:?}, got {got:?}"))),
        }
    }

    /// signed integer (exponent position)
    fn exponent(&mut self) -> Result<i64> {
        let neg = matches!(self.peek(), Some(Tok::Minus));
        if neg {
            self.next();
        }
        match self.next() {
            Some(Tok::Int(n)) => {
                let v: i64 = n
                    .to_string()
                    .parse()
                    .map_err(|_| Error::Parse("exponent overflow".into()))?;
                Ok(if neg { -v } else { v })
            }
            got => Err(Error::Parse(format!("expected exponent, got {got:?}"))),
        }
    }

    /// term := INT [*] [L [^exp]] | L [^exp]
    /// Returns (coefficient, exponent) with possibly negative exponent.
    fn term(&mut self) -> Result<(BigInt, i64)> {
        let mut coeff = BigInt::one();
        let mut have_coeff = false;
        if let Some(Tok::Int(_)) = self.peek() {
            if let Some(Tok::Int(n)) = self.next() {
                coeff = n;
                have_coeff = true;
            }
            if matches!(self.peek(), Some(Tok::Star)) {
                self.next();
            } else if !matches!(self.peek(), Some(Tok::L)) {
                return Ok((coeff, 0));
            }
        }
        match self.peek() {
            Some(Tok::L) => {
                self.next();
                let exp = if matches!(self.peek(), Some(Tok::Caret)) {
                    self.next();
                    self.exponent()?
                } else {
                    1
                };
                Ok((coeff, exp))
            }
            _ if have_coeff => Ok((coeff, 0)),
            got => Err(Error::Parse(format!("expected term, got {got:?}"))),
        }
    }

    /// poly := ['-'] term (('+'|'-') term)*  -- stops at '/' or ')' or end
    fn poly(&mut self) -> Result<MotClass> {
        let mut acc = MotClass::zero();
        let mut sign = BigInt::one();
        if matches!(self.peek(), Some(Tok::Minus)) {
            self.next();
            sign = -sign;
        }
        loop {
            let (c, e) = self.term()?;
            let t = MotClass::canonical(ZPoly::constant(sign.clone() * c), -e, BTreeMap::new());
            acc = acc.add(&t);
            match self.peek() {
                Some(Tok::Plus) => {
                    self.next();
                    sign = BigInt::one();
                }
                Some(Tok::Minus) => {
                    self.next();
                    sign = -BigInt::one();
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    /// denominator factor: L [^k] | (L^b - 1) [^m] | ( ... nested parens for (L - 1) )
    fn denom_factor(&mut self) -> Result<MotClass> {
        match self.peek() {
            Some(Tok::L) => {
                self.next();
                let k = if matches!(self.peek(), Some(Tok::Caret)) {
                    self.next();
                    self.exponent()?
                } else {
                    1
                };
                Ok(MotClass::l_pow(-k))
            }
            Some(Tok::LParen) => {
                self.next();
                self.expect(Tok::L)?;
                let b = if matches!(self.peek(), Some(Tok::Caret)) {
                    self.next();
                    self.exponent()?
                } else {
                    1
                };
                if b < 1 {
                    return Err(Error::Parse("denominator exponent must be >= 1".into()));
                }
                self.expect(Tok::Minus)?;
                match self.next() {
                    Some(Tok::Int(n)) if n.is_one() => {}
                    got => return Err(Error::Parse(format!("expected 1, got {got:?}"))),
                }
                self.expect(Tok::RParen)?;
                let m = if matches!(self.peek(), Some(Tok::Caret)) {
                    self.next();
                    self.exponent()?
                } else {
                    1
                };
                if m < 1 {
                    return Err(Error::Parse("factor multiplicity must be >= 1".into()));
                }
                Ok(MotClass::inv_l_pow_minus_one(b as u32, m as u32))
            }
            got => Err(Error::Parse(format!("expected denominator factor, got {got:?}"))),
        }
    }
}

impl FromStr for MotClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<MotClass> {
        let toks = tokenize(s)?;
        let mut p = Parser { toks, pos: 0 };
        // numerator: either parenthesized poly or a bare poly
        let numer = if matches!(p.peek(), Some(Tok::LParen)) {
            // try parenthesized polynomial; on structural mismatch this is
            // unreachable for denominators since numerators come first
            p.next();
            let inner = p.poly()?;
            p.expect(Tok::RParen)?;
            inner
        } else {
            p.poly()?
        };
        let mut result = numer;
        if matches!(p.peek(), Some(Tok::Slash)) {
            p.next();
            if matches!(p.peek(), Some(Tok::LParen)) {
                // Either a paren group "( factor * factor * ... )" or a single
                // cyclotomic factor "(L^b - 1)[^m]". Try the group form first
                // and roll back on failure.
                let save = p.pos;
                let group = (|p: &mut Parser| -> Result<MotClass> {
                    p.expect(Tok::LParen)?;
                    let mut denom = p.denom_factor()?;
                    loop {
                        match p.peek() {
                            Some(Tok::Star) => {
                                p.next();
                                let f = p.denom_factor()?;
                                denom = denom.mul(&f);
                            }
                            Some(Tok::RParen) => {
                                p.next();
                                break;
                            }
                            got => {
                                return Err(Error::Parse(format!(
                                    "expected * or ) in denominator, got {got:?}"
                                )))
                            }
                        }
                    }
                    Ok(denom)
                })(&mut p);
                match group {
                    Ok(denom) => result = result.mul(&denom),
                    Err(_) => {
                        p.pos = save;
                        let f = p.denom_factor()?;
                        result = result.mul(&f);
                    }
                }
            } else {
                let f = p.denom_factor()?;
                result = result.mul(&f);
            }
        }
        if p.peek().is_some() {
            return Err(Error::Parse("trailing input".into()));
        }
        Ok(result)
    }
}
