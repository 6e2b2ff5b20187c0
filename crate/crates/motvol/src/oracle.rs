//! Independent brute-force verification over small finite fields: enumerate
//! jet points, count solutions, and compare with motivic classes specialized
//! at `L = q`.  Counting is deliberately naive; its whole value is being
//! independent of the symbolic path.

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::biggroup::{GroupKind, GroupSpec};
use crate::cylinder::CylinderSet;
use crate::laurent::{Coeff, FieldTag, LaurentScalar, LaurentVector};
use crate::measure::measure_bounded;
use crate::ring::MotClass;
use crate::{Error, Result};

/// Enumeration budget: at most this many tuples are visited.
pub const ENUMERATION_BUDGET: u64 = 100_000_000;

fn check_budget(q: u64, slots: u32) -> Result<u64> {
    let total = q.checked_pow(slots).filter(|t| *t <= ENUMERATION_BUDGET);
    total.ok_or_else(|| {
        Error::BudgetExceeded(format!(
            "jet enumeration needs {q}^{slots} points, budget is {ENUMERATION_BUDGET}"
        ))
    })
}

/// Iterate over all base-q digit tuples of the given length.
fn for_each_tuple<F: FnMut(&[u64]) -> Result<()>>(q: u64, len: usize, mut f: F) -> Result<()> {
    let mut digits = vec![0u64; len];
    loop {
        f(&digits)?;
        let mut i = 0;
        loop {
            if i == len {
                return Ok(());
            }
            digits[i] += 1;
            if digits[i] < q {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}

/// Build the zero-tail lift of a jet: the exact polynomial with the given
/// coefficients at indices `lo..lo+len`.
fn jet_point(field: FieldTag, d: usize, lo: i64, per_coord: usize, digits: &[u64]) -> LaurentVector {
    let mut entries = Vec::with_capacity(d);
    for i in 0..d {
        let terms: Vec<(i64, Coeff)> = (0..per_coord)
            .map(|j| {
                (
                    lo + j as i64,
                    Coeff::from_int(field, digits[i * per_coord + j] as i64),
                )
            })
            .collect();
        entries.push(LaurentScalar::from_terms(field, &terms));
    }
    LaurentVector::new(entries).expect("nonempty")
}

/// Exact count of level-m jets over F_q satisfying the set's condition
/// (pole bound 0; m at least the stable level so the count matches the
/// class of `pi_m(A)`).
pub fn count_jet_points(a: &CylinderSet, m: i64, q: u64) -> Result<u64> {
    if a.pole_bound() != 0 {
        return Err(Error::Domain(
            "count_jet_points expects pole bound 0; shift the set first".into(),
        ));
    }
    if m < a.stable_level() {
        return Err(Error::Domain(format!(
            "level {m} below stable level {}",
            a.stable_level()
        )));
    }
    let d = a.dim();
    let per_coord = (m + 1) as usize;
    check_budget(q, (d * per_coord) as u32)?;
    let field = FieldTag::Prime(q);
    let mut count = 0u64;
    for_each_tuple(q, d * per_coord, |digits| {
        let pt = jet_point(field, d, 0, per_coord, digits);
        if a.membership(&pt)? {
            count += 1;
        }
        Ok(())
    })?;
    Ok(count)
}

/// Does the symbolic jet class specialize to the brute-force count?
pub fn check_class(a: &CylinderSet, m: i64, q: u64) -> Result<bool> {
    let class = a.jet_class(m)?;
    let expected = class.specialize(q as i64)?;
    let count = count_jet_points(a, m, q)?;
    Ok(expected == BigRational::from_integer(BigInt::from(count)))
}

/// Oracle bookkeeping for a bounded measure: with N the pole bound and
/// m >= stable level of the shifted set,
/// `count_m(S_N A) = specialize(mu(A) * L^{m d - N d}, q)`.
pub fn check_measure_bounded(a: &CylinderSet, m: i64, q: u64) -> Result<bool> {
    let n = a.pole_bound();
    let shifted = a.shift(n)?;
    let m = m.max(shifted.stable_level());
    let mu = measure_bounded(a)?;
    let correction = MotClass::l_pow((m - n) * a.dim() as i64);
    let expected = mu.mul(&correction).specialize(q as i64)?;
    let count = count_jet_points(&shifted, m, q)?;
    Ok(expected == BigRational::from_integer(BigInt::from(count)))
}

// ---------------------------------------------------------------------------
// Group jets
// ---------------------------------------------------------------------------

/// Multiply truncated polynomials mod t^{m+1} over F_q.
fn polymul_trunc(a: &[u64], b: &[u64], q: u64) -> Vec<u64> {
    let n = a.len();
    let mut out = vec![0u64; n];
    for (i, ai) in a.iter().enumerate() {
        if *ai == 0 {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            if i + j < n {
                out[i + j] = (out[i + j] + ai * bj) % q;
            }
        }
    }
    out
}

/// Count points of `SL2(F_q[t]/t^{m+1})` whose four entry jets satisfy the
/// predicate; entries are passed as coefficient slices (a, b, c, d).
pub fn count_sl2_jets_where<F>(m: usize, q: u64, mut pred: F) -> Result<u64>
where
    F: FnMut(&[u64], &[u64], &[u64], &[u64]) -> bool,
{
    let per = m + 1;
    check_budget(q, (4 * per) as u32)?;
    let mut count = 0u64;
    for_each_tuple(q, 4 * per, |digits| {
        let (a, rest) = digits.split_at(per);
        let (b, rest) = rest.split_at(per);
        let (c, d) = rest.split_at(per);
        // det = ad - bc = 1 mod t^{m+1}
        let ad = polymul_trunc(a, d, q);
        let bc = polymul_trunc(b, c, q);
        let ok = (0..per).all(|k| {
            let det_k = (ad[k] + q - bc[k]) % q;
            det_k == if k == 0 { 1 } else { 0 }
        });
        if ok && pred(a, b, c, d) {
            count += 1;
        }
        Ok(())
    })?;
    Ok(count)
}

/// `|G(F_q[t]/t^{m+1})|` by exhaustive enumeration.
pub fn count_group_jets(g: &GroupSpec, m: usize, q: u64) -> Result<u64> {
    match g.kind {
        GroupKind::Additive { d } => {
            check_budget(q, (d * (m + 1)) as u32)?;
            Ok(q.pow((d * (m + 1)) as u32))
        }
        GroupKind::Torus { m: rank } => {
            // units of F_q[t]/t^{m+1}, one per torus coordinate
            check_budget(q, (rank * (m + 1)) as u32)?;
            let units = (q - 1) * q.pow(m as u32);
            Ok(units.pow(rank as u32))
        }
        GroupKind::Sl2 => count_sl2_jets_where(m, q, |_, _, _, _| true),
    }
}

/// Helper for order-of-vanishing predicates on entry jets: the order of a
/// truncated polynomial, with `per` meaning "identically zero at this level".
pub fn jet_ord(coeffs: &[u64]) -> usize {
    coeffs
        .iter()
        .position(|c| *c != 0)
        .unwrap_or(coeffs.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cylinder::parse_condition;
    use crate::measure::translate;
    use crate::ring::MotClass;

    fn set(d: usize, n: i64, cond: &str) -> CylinderSet {
        let vars = [("x0", 0), ("x1", 1), ("x2", 2)];
        CylinderSet::new(d, n, parse_condition(cond, &vars).unwrap()).unwrap()
    }

    #[test]
    fn count_jet_points_examples() {
        // {ord == 1} at level 1 over F_3: points (0, a1 != 0)
        let a = set(1, 0, "ord(x0) == 1");
        assert_eq!(count_jet_points(&a, 1, 3).unwrap(), 2);
        // full line at level 2 over F_2
        assert_eq!(count_jet_points(&CylinderSet::full(1), 2, 2).unwrap(), 8);
        // two nonzero constant terms over F_5
        let b = set(2, 0, "coeff(x0, 0) != 0 & coeff(x1, 0) != 0");
        assert_eq!(count_jet_points(&b, 0, 5).unwrap(), 16);
    }

    #[test]
    fn check_class_examples() {
        // B_2 at level 2: class L, count q
        assert!(check_class(&CylinderSet::b_n(2), 2, 3).unwrap());
        // {ord == 0} at level 0: class L - 1
        assert!(check_class(&set(1, 0, "ord(x0) == 0"), 0, 2).unwrap());
        // the empty set: 0 = 0
        assert!(check_class(&CylinderSet::empty(1), 1, 2).unwrap());
        // the derived example: {ord(x) >= 1 & coeff(y,0) != 0} at level 1
        let c = set(2, 0, "ord(x0) >= 1 & coeff(x1, 0) != 0");
        for q in [2, 3] {
            assert!(check_class(&c, 1, q).unwrap());
        }
    }

    #[test]
    fn check_class_on_a_small_corpus() {
        let corpus = [
            set(1, 0, "ord(x0) >= 2"),
            set(1, 0, "ord(x0) == 1 | coeff(x0, 0) == 1"),
            set(2, 0, "ord(x0) >= 1 & coeff(x1, 1) != 0"),
            set(2, 0, "!(coeff(x0, 0) == 0) | ord(x1) == 2"),
        ];
        for a in &corpus {
            for m in a.stable_level()..=3 {
                for q in [2u64, 3, 5] {
                    let slots = (a.dim() as u32) * (m as u32 + 1);
                    if q.checked_pow(slots).map_or(true, |t| t > 1_000_000) {
                        continue;
                    }
                    assert!(check_class(a, m, q).unwrap(), "corpus set failed at m={m} q={q}");
                }
            }
        }
    }

    #[test]
    fn check_measure_bookkeeping_with_poles() {
        let sets = [
            set(1, 2, "coeff(x0, -2) == 1 & coeff(x0, -1) == 0"),
            set(2, 1, "ord(x0) >= -1 & coeff(x1, 0) != 0"),
        ];
        for a in &sets {
            for q in [2u64, 3] {
                assert!(check_measure_bounded(a, 2, q).unwrap());
            }
        }
    }

    #[test]
    fn stratified_counts_sum_to_the_whole_after_translation() {
        // oracle counts of ord-strata of a translated set sum to the count
        // of the whole set
        let a = set(1, 0, "ord(x0) >= 1");
        let v = LaurentVector::new(vec![LaurentScalar::from_int_terms(
            FieldTag::Rationals,
            &[(-1, 1)],
        )])
        .unwrap();
        let moved = translate(&a, &v).unwrap();
        let shifted = moved.shift(moved.pole_bound()).unwrap();
        let m = shifted.stable_level() + 1;
        let whole = count_jet_points(&shifted, m, 3).unwrap();
        let mut sum = 0;
        for e in 0..=m {
            let stratum = shifted
                .intersect(&set(1, 0, &format!("ord(x0) == {e}")))
                .unwrap();
            sum += count_jet_points(&stratum, m, 3).unwrap();
        }
        assert_eq!(whole, sum);
    }

    #[test]
    fn count_group_jets_examples() {
        let sl2 = GroupSpec::sl2();
        assert_eq!(count_group_jets(&sl2, 0, 2).unwrap(), 6);
        assert_eq!(count_group_jets(&sl2, 0, 3).unwrap(), 24);
        assert_eq!(count_group_jets(&sl2, 1, 2).unwrap(), 48);
        // 48 = specialize((L^3 - L) * L^3, 2)
        let expected = (MotClass::l_pow(3) - MotClass::l())
            .mul(&MotClass::l_pow(3))
            .specialize(2)
            .unwrap();
        assert_eq!(expected, BigRational::from_integer(BigInt::from(48u32)));
        // SL2(F_5) has 120 elements
        assert_eq!(count_group_jets(&sl2, 0, 5).unwrap(), 120);
    }

    #[test]
    fn group_jet_counts_match_the_canonical_class() {
        let sl2_class = MotClass::l_pow(3) - MotClass::l();
        for (m, q) in [(0u32, 2u64), (1, 2), (2, 2), (0, 3), (1, 3)] {
            let count = count_group_jets(&GroupSpec::sl2(), m as usize, q).unwrap();
            let class = sl2_class.mul(&MotClass::l_pow(3 * m as i64));
            assert_eq!(
                class.specialize(q as i64).unwrap(),
                BigRational::from_integer(BigInt::from(count)),
                "stability bookkeeping at m={m} q={q}"
            );
        }
    }

    #[test]
    fn budget_is_enforced() {
        assert!(matches!(
            count_jet_points(&CylinderSet::full(3), 10, 5),
            Err(Error::BudgetExceeded(_))
        ));
    }

    #[test]
    fn big_cell_counts() {
        // the big cell of SL2(F_q) has q^2 (q-1) points (w11 != 0)
        for q in [2u64, 3] {
            let count = count_sl2_jets_where(0, q, |a, _, _, _| a[0] != 0).unwrap();
            assert_eq!(count, q * q * (q - 1));
        }
    }

    #[test]
    fn z_locus_jets_grow_slower_than_full_dimension() {
        // jets landing in the big-cell complement {w11 = 0}: their count
        // times q stays below q^{3(m+1)}, the dimension-drop bound
        for m in 0..=2usize {
            let zcount = count_sl2_jets_where(m, 2, |a, _, _, _| jet_ord(a) == m + 1).unwrap();
            let full = 2u64.pow(3 * (m as u32 + 1));
            assert!(zcount * 2 <= full, "no dimension drop at level {m}");
        }
        // the same for a translated locus g Z((t)): with g = [[1,1],[0,1]],
        // membership means (g^{-1} w)11 = w11 - w21 vanishes as a jet
        for m in 0..=2usize {
            let zcount = count_sl2_jets_where(m, 2, |a, _, c, _| {
                a.iter().zip(c).all(|(x, y)| x == y)
            })
            .unwrap();
            let full = 2u64.pow(3 * (m as u32 + 1));
            assert!(zcount * 2 <= full, "no dimension drop for the translate at level {m}");
        }
    }
}
