//! Randomized algebraic invariants of the core layers.

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

use motvol::cylinder::{Atom, Cond, CylinderSet};
use motvol::laurent::{FieldTag, LaurentScalar, LaurentVector};
use motvol::measure::{measure_bounded, translate};
use motvol::ring::{geometric_sum, MotClass};

const Q: FieldTag = FieldTag::Rationals;

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

/// Random elements of the value ring built from L-powers, small integers and
/// geometric tails, combined by ring operations.
fn arb_motclass() -> impl Strategy<Value = MotClass> {
    let leaf = prop_oneof![
        (-4i64..=4).prop_map(MotClass::l_pow),
        (-5i64..=5).prop_map(MotClass::int),
        ((1i64..=3), (-2i64..=2)).prop_map(|(k, n0)| {
            geometric_sum(&MotClass::one(), k, n0).unwrap()
        }),
    ];
    leaf.prop_recursive(3, 24, 4, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.add(&b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.mul(&b)),
            (inner.clone(), inner).prop_map(|(a, b)| a.sub(&b)),
        ]
    })
}

/// Exact Laurent polynomials with small support.
fn arb_exact_laurent() -> impl Strategy<Value = LaurentScalar> {
    prop::collection::vec(((-4i64..=5), (-4i64..=4)), 0..4).prop_map(|terms| {
        LaurentScalar::from_int_terms(Q, &terms)
    })
}

/// Random cylinder sets in the restricted language (pole bound 0).
fn arb_cylinder(d: usize) -> impl Strategy<Value = CylinderSet> {
    let atom = (0..d, 0i64..=2, -2i64..=2, 0u8..4).prop_map(|(i, j, c, kind)| match kind {
        0 => Cond::Atom(Atom::OrdAtLeast(i, j)),
        1 => Cond::Atom(Atom::OrdExact(i, j)),
        2 => Cond::Atom(Atom::CoeffEq(i, j, BigRational::from_integer(BigInt::from(c)))),
        _ => Cond::Atom(Atom::CoeffNonzero(i, j)),
    });
    prop::collection::vec(atom, 1..4).prop_map(move |atoms| {
        let cond = if atoms.len() % 2 == 0 {
            Cond::or(atoms)
        } else {
            Cond::and(atoms)
        };
        CylinderSet::new(d, 0, cond).unwrap()
    })
}

// ---------------------------------------------------------------------------
// Value-ring invariants
// ---------------------------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Canonical-form uniqueness: x - y normalizes to zero exactly when the
    /// truncated expansions agree well below both virtual dimensions.
    #[test]
    fn canonical_form_decides_equality(x in arb_motclass(), y in arb_motclass()) {
        let diff_zero = x.sub(&y).is_zero();
        let floor = x
            .vdim()
            .unwrap_or(0)
            .min(y.vdim().unwrap_or(0))
            .min(0) - 10;
        let expansions_agree = x.expand(floor) == y.expand(floor);
        prop_assert_eq!(diff_zero, expansions_agree);
    }

    /// Degree additivity of the virtual dimension.
    #[test]
    fn vdim_is_additive(x in arb_motclass(), y in arb_motclass()) {
        if let (Some(a), Some(b)) = (x.vdim(), y.vdim()) {
            prop_assert_eq!(x.mul(&y).vdim(), Some(a + b));
        }
        let sum = x.add(&y);
        if let Some(s) = sum.vdim() {
            let bound = x.vdim().unwrap_or(i64::MIN).max(y.vdim().unwrap_or(i64::MIN));
            prop_assert!(s <= bound);
        }
    }

    /// The counting specialization is a ring homomorphism.
    #[test]
    fn specialize_commutes(x in arb_motclass(), y in arb_motclass()) {
        for q in [2i64, 3, 5] {
            let sum = x.add(&y).specialize(q).unwrap();
            prop_assert_eq!(sum, x.specialize(q).unwrap() + y.specialize(q).unwrap());
            let prod = x.mul(&y).specialize(q).unwrap();
            prop_assert_eq!(prod, x.specialize(q).unwrap() * y.specialize(q).unwrap());
        }
    }

    /// Truncated expansions are compatible with re-truncation.
    #[test]
    fn expand_recoarsens(x in arb_motclass(), m in -12i64..=-2, extra in 1i64..=6) {
        let fine = x.expand(m - extra);
        prop_assert_eq!(fine.restrict(m), x.expand(m));
    }
}

// ---------------------------------------------------------------------------
// Laurent invariants
// ---------------------------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Field axioms hold exactly on polynomial-supported series.
    #[test]
    fn exact_series_distribute(
        a in arb_exact_laurent(),
        b in arb_exact_laurent(),
        c in arb_exact_laurent()
    ) {
        let lhs = a.add(&b).unwrap().mul(&c).unwrap();
        let rhs = a.mul(&c).unwrap().add(&b.mul(&c).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    /// The shift is a bijection moving the order by exactly N.
    #[test]
    fn t_shift_bijection(a in arb_exact_laurent(), n in -5i64..=5) {
        let shifted = a.t_shift(n);
        prop_assert_eq!(shifted.t_shift(-n), a.clone());
        match (a.ord(), shifted.ord()) {
            (Ok(x), Ok(y)) => match (x.finite(), y.finite()) {
                (Some(v), Some(w)) => prop_assert_eq!(w, v + n),
                (None, None) => {}
                _ => prop_assert!(false, "shift changed zero-ness"),
            },
            _ => prop_assert!(false, "exact series have determinate order"),
        }
    }

    /// inv satisfies its precision contract on nonzero exact series.
    #[test]
    fn inv_contract(a in arb_exact_laurent()) {
        prop_assume!(!a.is_known_zero());
        let inv = a.inv_with(12).unwrap();
        let prod = a.mul(&inv).unwrap();
        let diff = prod.sub(&LaurentScalar::one(Q)).unwrap();
        prop_assert!(diff.is_zero_up_to_precision());
    }
}

// ---------------------------------------------------------------------------
// Cylinder invariants
// ---------------------------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// The jet class grows by exactly L^d per extra level: the piecewise
    /// trivial fibration of stability.
    #[test]
    fn jet_class_level_consistency(a in arb_cylinder(2), extra in 1i64..=2) {
        let m = a.stable_level();
        let base = a.jet_class(m).unwrap();
        let up = a.jet_class(m + extra).unwrap();
        prop_assert_eq!(up, base.mul(&MotClass::l_pow(2 * extra)));
    }

    /// The shift action commutes with unions and with membership.
    #[test]
    fn shift_respects_boolean_structure(
        a in arb_cylinder(1),
        b in arb_cylinder(1),
        n in 0i64..=2,
        terms in prop::collection::vec(((0i64..=4), (-2i64..=2)), 0..4)
    ) {
        let union = a.union(&b).unwrap();
        let su = union.shift(n).unwrap();
        let us = a.shift(n).unwrap().union(&b.shift(n).unwrap()).unwrap();
        // compare as sets: equal jet classes and agreeing membership
        let m = su.stable_level().max(us.stable_level());
        prop_assert_eq!(su.jet_class(m).unwrap(), us.jet_class(m).unwrap());
        let pt = LaurentVector::new(vec![LaurentScalar::from_int_terms(Q, &terms)]).unwrap();
        prop_assert_eq!(
            su.membership(&pt.t_shift(n)).unwrap(),
            union.membership(&pt).unwrap()
        );
        prop_assert_eq!(
            us.membership(&pt.t_shift(n)).unwrap(),
            union.membership(&pt).unwrap()
        );
    }

    /// Translation by an integral vector preserves both membership and the
    /// bounded measure.
    #[test]
    fn translation_equivariance(
        a in arb_cylinder(1),
        vterms in prop::collection::vec(((0i64..=3), (-2i64..=2)), 0..3),
        pterms in prop::collection::vec(((0i64..=4), (-2i64..=2)), 0..4)
    ) {
        let v = LaurentVector::new(vec![LaurentScalar::from_int_terms(Q, &vterms)]).unwrap();
        let image = translate(&a, &v).unwrap();
        prop_assert_eq!(
            measure_bounded(&image).unwrap(),
            measure_bounded(&a).unwrap()
        );
        let pt = LaurentVector::new(vec![LaurentScalar::from_int_terms(Q, &pterms)]).unwrap();
        let moved = pt.add(&v).unwrap();
        prop_assert_eq!(
            image.membership(&moved).unwrap(),
            a.membership(&pt).unwrap()
        );
    }
}
