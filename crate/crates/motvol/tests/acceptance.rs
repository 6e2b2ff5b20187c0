//! Acceptance suite: every exactness and oracle-equivalence criterion the
//! engine guarantees, one test per criterion, each printing a PASS line.
//!
//! All comparisons are exact symbolic equalities in the value ring or exact
//! integer equalities against brute-force finite-field counts; there are no
//! numerical tolerances anywhere.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use motvol::biggroup::{
    canonical_restriction_check, chart_independence_check, haar_measure, invariance_check,
    invariance_identity_check, jacobian_det, sample_sl2_elements, BigCellChart, ChartKind,
    EntrySet, GroupSpec, Mat2, OmegaSet, RationalMap, TranslationFactor,
};
use motvol::cylinder::{Atom, Cond, CylinderSet, PatternFamily};
use motvol::laurent::{parse_laurent, FieldTag, LaurentScalar, LaurentVector};
use motvol::measure::{
    measure_bounded, measure_bounded_at, measure_sigma, measure_stable, shift_jacobian_order,
    translate,
};
use motvol::mpoly::{RatFn, ZeroStatus};
use motvol::oracle;
use motvol::ring::{geometric_sum, MotClass};

const Q: FieldTag = FieldTag::Rationals;

fn ls(s: &str) -> LaurentScalar {
    parse_laurent(s, Q).unwrap()
}

fn lm1() -> MotClass {
    MotClass::l() - MotClass::one()
}

fn ord_at_least(i: usize, e: i64) -> Cond {
    Cond::Atom(Atom::OrdAtLeast(i, e))
}
fn ord_exact(i: usize, e: i64) -> Cond {
    Cond::Atom(Atom::OrdExact(i, e))
}
fn coeff_eq(i: usize, j: i64, c: i64) -> Cond {
    Cond::Atom(Atom::CoeffEq(i, j, BigRational::from_integer(BigInt::from(c))))
}
fn coeff_nonzero(i: usize, j: i64) -> Cond {
    Cond::Atom(Atom::CoeffNonzero(i, j))
}

/// A deterministic corpus of cylinder sets across dimensions and pole
/// bounds, inside the restricted constraint language.
fn cylinder_corpus() -> Vec<CylinderSet> {
    corpus_with_constants(&[-2, -1, 1, 2, 3])
}

/// Corpus for finite-field comparisons: coefficient constants stay in
/// {0, 1}, so the char-0 class specializes faithfully at every q >= 2
/// (distinct constants never collide mod q, and 1 never vanishes).
fn oracle_corpus() -> Vec<CylinderSet> {
    corpus_with_constants(&[1])
}

fn corpus_with_constants(consts: &[i64]) -> Vec<CylinderSet> {
    let mut corpus = Vec::new();
    let mut push = |d: usize, n: i64, cond: Cond| {
        corpus.push(CylinderSet::new(d, n, cond).unwrap());
    };
    // hand-written sets
    push(1, 0, Cond::True);
    push(1, 0, ord_at_least(0, 2));
    push(1, 0, ord_exact(0, 1));
    push(1, 1, ord_at_least(0, -1));
    push(1, 2, Cond::and(vec![coeff_eq(0, -2, 1), coeff_eq(0, -1, 0)]));
    push(1, 3, ord_exact(0, -3));
    push(1, 0, Cond::or(vec![ord_exact(0, 0), ord_exact(0, 2)]));
    push(1, 0, Cond::and(vec![coeff_nonzero(0, 0), coeff_eq(0, 1, consts[consts.len() - 1])]));
    push(2, 0, Cond::True);
    push(2, 0, Cond::and(vec![ord_at_least(0, 1), coeff_nonzero(1, 0)]));
    push(2, 1, Cond::and(vec![ord_at_least(0, -1), ord_exact(1, 0)]));
    push(2, 2, Cond::and(vec![ord_exact(0, -2), ord_at_least(1, 2)]));
    push(2, 0, Cond::or(vec![
        Cond::and(vec![ord_exact(0, 0), ord_at_least(1, 1)]),
        ord_exact(1, 0),
    ]));
    push(2, 0, Cond::and(vec![coeff_eq(0, 0, consts[0]), coeff_eq(1, 1, consts[consts.len() - 1])]));
    push(2, 1, Cond::not(coeff_eq(0, -1, 0)));
    push(3, 0, Cond::True);
    push(3, 0, Cond::and(vec![
        ord_at_least(0, 0),
        ord_at_least(1, 0),
        ord_exact(2, 0),
    ]));
    push(3, 1, Cond::and(vec![
        ord_at_least(0, -1),
        coeff_nonzero(1, 0),
        ord_exact(2, 1),
    ]));
    push(3, 0, Cond::or(vec![ord_exact(0, 1), ord_exact(1, 1), ord_exact(2, 1)]));
    push(3, 2, Cond::and(vec![coeff_eq(0, -2, 1), ord_at_least(1, 0), ord_at_least(2, -1)]));
    // seeded random sets
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE5);
    while corpus.len() < 34 {
        let d = rng.gen_range(1..=3usize);
        let n = rng.gen_range(0..=3i64);
        let mut parts = Vec::new();
        for _ in 0..rng.gen_range(1..=3usize) {
            let i = rng.gen_range(0..d);
            let atom = match rng.gen_range(0..4u8) {
                0 => ord_at_least(i, rng.gen_range(-n..=2)),
                1 => ord_exact(i, rng.gen_range(-n..=2)),
                2 => coeff_eq(
                    i,
                    rng.gen_range(-n..=2),
                    consts[rng.gen_range(0..consts.len())],
                ),
                _ => coeff_nonzero(i, rng.gen_range(-n..=2)),
            };
            parts.push(atom);
        }
        let cond = if rng.gen_bool(0.3) {
            Cond::or(parts)
        } else {
            Cond::and(parts)
        };
        corpus.push(CylinderSet::new(d, n, cond).unwrap());
    }
    corpus
}

#[test]
fn acceptance_01_example5_volumes() {
    let total = measure_stable(&CylinderSet::full(1)).unwrap();
    assert_eq!(total, MotClass::l());
    for n in 1..=10 {
        let bn = measure_stable(&CylinderSet::b_n(n)).unwrap();
        assert_eq!(bn, MotClass::l_pow(-n + 1), "B_{n} volume");
        assert_eq!(bn, MotClass::l_pow(-n).mul(&total), "B_{n} scaling law");
    }
    println!("ACCEPTANCE 01 PASS: B_n volumes L^(-n+1) and the scaling law, n = 1..10");
}

#[test]
fn acceptance_02_shift_jacobian_law() {
    for n in 0..=4i64 {
        for d in 1..=3usize {
            assert_eq!(shift_jacobian_order(n, d).unwrap(), n * d as i64);
            // the symbolic determinant path
            let h = RationalMap::shift_map(n, d, Q);
            let det = jacobian_det(&h).unwrap();
            let expected = RatFn::constant(d, ls(&format!("t^{}", n * d as i64)));
            assert_eq!(
                det.equal_status(&expected).unwrap(),
                ZeroStatus::KnownZero,
                "det(t^{n} Id_{d})"
            );
        }
    }
    println!("ACCEPTANCE 02 PASS: shift Jacobian order N*d for N <= 4, d <= 3, via det(t^N Id)");
}

#[test]
fn acceptance_03_bounded_measure_well_defined() {
    let corpus = cylinder_corpus();
    assert!(corpus.len() >= 30);
    for (idx, a) in corpus.iter().enumerate() {
        let base = measure_bounded(a).unwrap();
        for k in 1..=3 {
            let relabeled = measure_bounded_at(a, a.pole_bound() + k).unwrap();
            assert_eq!(relabeled, base, "corpus set {idx} at pole bound +{k}");
        }
    }
    println!(
        "ACCEPTANCE 03 PASS: measure_bounded independent of the pole bound on {} sets, k = 1,2,3",
        corpus.len()
    );
}

#[test]
fn acceptance_04_additive_invariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7A54);
    let corpus = cylinder_corpus();
    let mut checked = 0;
    'outer: loop {
        for a in &corpus {
            if checked >= 100 {
                break 'outer;
            }
            // random translation vector with pole order <= 3
            let mut entries = Vec::new();
            for _ in 0..a.dim() {
                let mut terms = Vec::new();
                for _ in 0..rng.gen_range(0..=3usize) {
                    terms.push((rng.gen_range(-3..=4i64), rng.gen_range(-3..=3i64)));
                }
                entries.push(LaurentScalar::from_int_terms(Q, &terms));
            }
            let v = LaurentVector::new(entries).unwrap();
            let moved = translate(a, &v).unwrap();
            assert_eq!(
                measure_bounded(&moved).unwrap(),
                measure_bounded(a).unwrap(),
                "translation invariance failed for {a:?} by {v:?}"
            );
            checked += 1;
        }
    }
    println!("ACCEPTANCE 04 PASS: 100 randomized (set, vector) pairs with equal volumes");
}

#[test]
fn acceptance_05_invariance_identity() {
    let chart = BigCellChart::sl2(ChartKind::Standard);
    let mut elements: Vec<(String, Mat2)> = Vec::new();
    for k in 1..=3i64 {
        elements.push((
            format!("diag(t^{k}, t^-{k})"),
            Mat2::diag(ls(&format!("t^{k}")), ls(&format!("t^-{k}"))),
        ));
    }
    elements.push(("upper(t^-2)".into(), Mat2::upper(ls("t^-2"))));
    elements.push(("upper(t^-2 + 1)".into(), Mat2::upper(ls("t^-2 + 1"))));
    elements.push(("lower(t^-2)".into(), Mat2::lower(ls("t^-2"))));
    elements.push(("lower(t^-2 + 3*t)".into(), Mat2::lower(ls("t^-2 + 3*t"))));
    for (i, m) in sample_sl2_elements(0x1DE7, 16).into_iter().enumerate() {
        elements.push((format!("random product {i}"), m));
    }
    assert!(elements.len() >= 20);
    for (label, g0) in &elements {
        let r = invariance_identity_check(g0, &chart).unwrap();
        assert!(r.holds && r.exact, "identity failed for {label}");
    }
    // precision robustness: an SL2 element known only to precision 16
    // satisfies the identity up to that precision
    let exact = Mat2::upper(ls("t^-2")).mul(&Mat2::lower(ls("t^3"))).unwrap();
    let truncated = Mat2::new(
        exact.a.truncate(16),
        exact.b.truncate(16),
        exact.c.truncate(16),
        exact.d.truncate(16),
    );
    let r = invariance_identity_check(&truncated, &chart).unwrap();
    assert!(r.holds, "identity must hold up to the stated precision");
    assert!(!r.exact);
    assert!(r.qualified_precision.unwrap_or(i64::MAX) >= 8);
    println!(
        "ACCEPTANCE 05 PASS: p(h) det J = p exactly for {} elements (plus a precision-16 run)",
        elements.len()
    );
}

#[test]
fn acceptance_06_haar_invariance() {
    let chart = BigCellChart::sl2(ChartKind::Standard);
    let sl2 = GroupSpec::sl2();
    let s_stratum = || {
        OmegaSet::chart(
            sl2,
            CylinderSet::new(
                3,
                0,
                Cond::and(vec![ord_at_least(0, 0), ord_at_least(1, 0), ord_exact(2, 1)]),
            )
            .unwrap(),
        )
        .unwrap()
    };
    let refined = || {
        OmegaSet::chart(
            sl2,
            CylinderSet::new(
                3,
                0,
                Cond::and(vec![
                    ord_at_least(0, 0),
                    ord_at_least(1, 0),
                    ord_exact(2, 0),
                    coeff_eq(1, 0, 2),
                ]),
            )
            .unwrap(),
        )
        .unwrap()
    };
    use TranslationFactor::*;
    let pairs: Vec<(String, OmegaSet, Vec<TranslationFactor>)> = vec![
        ("arcs / diag(t)".into(), OmegaSet::cell_arcs(sl2), vec![Diag(ls("t"))]),
        ("arcs / diag(t^3)".into(), OmegaSet::cell_arcs(sl2), vec![Diag(ls("t^3"))]),
        ("arcs / diag(2t)".into(), OmegaSet::cell_arcs(sl2), vec![Diag(ls("2*t"))]),
        ("s-stratum / diag(t)".into(), s_stratum(), vec![Diag(ls("t"))]),
        ("arcs / lower(t^-2)".into(), OmegaSet::cell_arcs(sl2), vec![Lower(ls("t^-2"))]),
        (
            "arcs / lower(t^-2 + 1)".into(),
            OmegaSet::cell_arcs(sl2),
            vec![Lower(ls("t^-2 + 1"))],
        ),
        ("refined / lower(3 + t^3)".into(), refined(), vec![Lower(ls("3 + t^3"))]),
        (
            "arcs / lower(t^-1) diag(t)".into(),
            OmegaSet::cell_arcs(sl2),
            vec![Lower(ls("t^-1")), Diag(ls("t"))],
        ),
        (
            "integral arcs / upper(1)".into(),
            OmegaSet::entry(EntrySet::cell_arcs()),
            vec![Upper(ls("1"))],
        ),
        (
            "integral arcs / upper(1 + t)".into(),
            OmegaSet::entry(EntrySet::cell_arcs()),
            vec![Upper(ls("1 + t"))],
        ),
        (
            "integral arcs / weyl".into(),
            OmegaSet::entry(EntrySet::cell_arcs()),
            vec![Weyl],
        ),
        (
            "w21-set / lower(2)".into(),
            OmegaSet::entry(EntrySet::lower_left_ord_at_least(1)),
            vec![Lower(ls("2"))],
        ),
        (
            "w21-set / upper(t)".into(),
            OmegaSet::entry(EntrySet::lower_left_ord_at_least(1)),
            vec![Upper(ls("t"))],
        ),
        (
            "full integral / upper(1)".into(),
            OmegaSet::entry(EntrySet::full_integral()),
            vec![Upper(ls("1"))],
        ),
        (
            "integral arcs / diag(t) via chart form".into(),
            OmegaSet::entry(EntrySet::cell_arcs()),
            vec![Diag(ls("t"))],
        ),
    ];
    assert!(pairs.len() >= 10);
    let mut stratified_with_tail = 0;
    for (label, set, factors) in &pairs {
        let r = invariance_check(set, factors, &chart).unwrap();
        assert!(r.equal, "{label}: {} vs {}", r.lhs, r.rhs);
        if r
            .rhs_decomposition
            .iter()
            .any(|(l, v)| l.contains("det-solved") && !v.is_zero())
        {
            stratified_with_tail += 1;
        }
    }
    assert!(
        stratified_with_tail >= 3,
        "expected several stratified translates with geometric tails"
    );
    println!(
        "ACCEPTANCE 06 PASS: {} invariance pairs, {} via stratified tails",
        pairs.len(),
        stratified_with_tail
    );
}

#[test]
fn acceptance_07_chart_independence() {
    let charts = [
        BigCellChart::sl2(ChartKind::Standard),
        BigCellChart::sl2(ChartKind::WeylSwapped),
        BigCellChart::sl2(ChartKind::Conjugated),
    ];
    // chart-neutral corpus: the same subset of SL2((t)) measured through
    // all three charts
    let corpus = vec![
        ("full integral points", OmegaSet::entry(EntrySet::full_integral())),
        (
            "ord(w21) >= 1",
            OmegaSet::entry(EntrySet::lower_left_ord_at_least(1)),
        ),
        (
            "ord(w21) >= 2",
            OmegaSet::entry(EntrySet::lower_left_ord_at_least(2)),
        ),
        ("Z((t)) piece", OmegaSet::z_part(GroupSpec::sl2())),
    ];
    for (label, set) in &corpus {
        let r = chart_independence_check(set, &charts).unwrap();
        assert!(r.equal, "{label}: {:?}", r.values);
    }
    // the pivot-unit set is expressible in the standard and conjugated
    // charts (its combination involves w11); values agree there
    let pivot = OmegaSet::entry(EntrySet::cell_arcs());
    let two = [charts[0], charts[2]];
    let r = chart_independence_check(&pivot, &two).unwrap();
    assert!(r.equal, "{:?}", r.values);
    // each chart assigns its own cell arcs the class of the cell
    for chart in &charts {
        let arcs = OmegaSet::cell_arcs(GroupSpec::sl2());
        let v = haar_measure(&arcs, chart).unwrap().value;
        assert_eq!(v, MotClass::l_pow(2).mul(&lm1()), "{:?}", chart.kind);
    }
    println!("ACCEPTANCE 07 PASS: measures agree across the Weyl-swapped and conjugated charts");
}

#[test]
fn acceptance_08_canonical_restriction() {
    let chart = BigCellChart::sl2(ChartKind::Standard);
    // specialize([SL2] L^{3m}, q) = |SL2(F_q[t]/t^{m+1})| on the stated grid
    let sl2_class = MotClass::l_pow(3) - MotClass::l();
    for (m, q) in [(0usize, 2u64), (1, 2), (2, 2), (0, 3), (1, 3)] {
        let count = oracle::count_group_jets(&GroupSpec::sl2(), m, q).unwrap();
        let expected = sl2_class
            .mul(&MotClass::l_pow(3 * m as i64))
            .specialize(q as i64)
            .unwrap();
        assert_eq!(
            expected,
            BigRational::from_integer(BigInt::from(count)),
            "(m, q) = ({m}, {q})"
        );
    }
    // haar of the cell arcs with its oracle
    let arcs = OmegaSet::cell_arcs(GroupSpec::sl2());
    assert_eq!(
        haar_measure(&arcs, &chart).unwrap().value,
        MotClass::l_pow(2).mul(&lm1())
    );
    for q in [2u64, 3] {
        let count = oracle::count_sl2_jets_where(0, q, |a, _, _, _| a[0] != 0).unwrap();
        assert_eq!(count, q * q * (q - 1), "big cell of SL2(F_{q})");
    }
    // the full stratified report
    let report = canonical_restriction_check(2, &[2, 3], &chart).unwrap();
    for line in &report.lines {
        assert!(line.passed, "{}: {}", line.label, line.detail);
    }
    println!(
        "ACCEPTANCE 08 PASS: canonical restriction verified ({} report lines)",
        report.lines.len()
    );
}

#[test]
fn acceptance_09_oracle_agreement() {
    // corpus without rational linear relations and with {0,1} constants, so
    // class and count live over the same primes
    let corpus = oracle_corpus();
    let mut checked = 0;
    let mut skipped = 0;
    for a in &corpus {
        let shifted = a.shift(a.pole_bound()).unwrap();
        let base = shifted.stable_level();
        for m in base..=3 {
            for q in [2u64, 3, 5] {
                let slots = (shifted.dim() as u32) * (m as u32 + 1);
                let feasible = q
                    .checked_pow(slots)
                    .map_or(false, |n| n <= 2_000_000);
                if !feasible {
                    skipped += 1;
                    continue;
                }
                assert!(
                    oracle::check_class(&shifted, m, q).unwrap(),
                    "oracle mismatch for {a:?} at m={m}, q={q}"
                );
                checked += 1;
            }
        }
    }
    assert!(checked >= 150, "only {checked} oracle comparisons ran");
    println!(
        "ACCEPTANCE 09 PASS: {} class/count comparisons (skipped {} over budget)",
        checked, skipped
    );
}

#[test]
fn acceptance_10_sigma_summation() {
    // the ord-strata of L(A^1) sum to L
    let family = PatternFamily::new(
        Box::new(|e| CylinderSet::new(1, 0, Cond::Atom(Atom::OrdExact(0, e)))),
        0,
        lm1(),
        1,
    );
    let total = measure_sigma(&family).unwrap();
    assert_eq!(total, MotClass::l());
    // expansion agreement with explicit partial sums at several cutoffs
    for cutoff in [-5i64, -10, -20] {
        let mut partial = MotClass::zero();
        let terms = (-cutoff + 4) as i64;
        for e in 0..terms {
            partial = partial.add(&measure_stable(&family.stratum(e).unwrap()).unwrap());
        }
        assert_eq!(
            total.expand(cutoff),
            partial.expand(cutoff),
            "partial sums disagree at cutoff {cutoff}"
        );
    }
    // and the closed form is the geometric sum
    assert_eq!(total, geometric_sum(&lm1(), 1, 0).unwrap());
    println!("ACCEPTANCE 10 PASS: sigma-sum of the ord strata is L, matching partial sums");
}
