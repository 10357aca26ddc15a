//! Randomized structural laws for the exact-series algebra and the
//! number-theory helpers.

use proptest::collection::btree_map;
use proptest::prelude::*;

use orthomod::exact::{factor, rat, valuation, Int, Rat};
use orthomod::series::ortho::{Axis, IndexKey, OrthoSeries, Parity};

const PREC: i64 = 32;

fn arb_parity() -> impl Strategy<Value = Parity> {
    prop_oneof![Just(Parity::Integral), Just(Parity::HalfIntegral)]
}

fn arb_coeff() -> impl Strategy<Value = Rat> {
    ((-30i64..30).prop_filter("nonzero", |n| *n != 0), 1i64..8)
        .prop_map(|(n, d)| rat(n, d))
}

fn arb_key(parity: Parity) -> impl Strategy<Value = IndexKey> {
    (0i64..4, 0i64..4, -4i64..5).prop_map(move |(a, b, c)| match parity {
        Parity::Integral => IndexKey {
            n: 2 * a,
            r: 2 * c,
            m: 2 * b,
        },
        Parity::HalfIntegral => IndexKey {
            n: 2 * a + 1,
            r: 2 * c + 1,
            m: 2 * b + 1,
        },
    })
}

fn series_of(parity: Parity) -> impl Strategy<Value = OrthoSeries> {
    btree_map(arb_key(parity), arb_coeff(), 1..8).prop_map(move |terms| {
        OrthoSeries::from_terms(parity, PREC, terms).expect("keys share the parity class")
    })
}

fn arb_series() -> impl Strategy<Value = OrthoSeries> {
    arb_parity().prop_flat_map(series_of)
}

/// Two series in the same parity class, so sums are defined.
fn same_parity_pair() -> impl Strategy<Value = (OrthoSeries, OrthoSeries)> {
    arb_parity().prop_flat_map(|p| (series_of(p), series_of(p)))
}

fn same_terms(a: &OrthoSeries, b: &OrthoSeries) -> bool {
    a.terms().eq(b.terms())
}

proptest! {
    #[test]
    fn multiplication_commutes(f in arb_series(), g in arb_series()) {
        prop_assert!(same_terms(&f.multiply(&g), &g.multiply(&f)));
    }

    #[test]
    fn multiplication_associates(f in arb_series(), g in arb_series(), h in arb_series()) {
        let left = f.multiply(&g).multiply(&h);
        let right = f.multiply(&g.multiply(&h));
        let prec = left.prec().min(right.prec());
        prop_assert!(left.eq_within(&right, prec));
    }

    #[test]
    fn multiplication_distributes((f, g) in same_parity_pair(), h in arb_series()) {
        let left = f.add(&g).unwrap().multiply(&h);
        let right = f.multiply(&h).add(&g.multiply(&h)).unwrap();
        let prec = left.prec().min(right.prec());
        prop_assert!(left.eq_within(&right, prec));
    }

    #[test]
    fn swap_is_an_involution(f in arb_series()) {
        prop_assert!(same_terms(&f.swap_tau_omega().swap_tau_omega(), &f));
    }

    #[test]
    fn swap_is_multiplicative(f in arb_series(), g in arb_series()) {
        let left = f.multiply(&g).swap_tau_omega();
        let right = f.swap_tau_omega().multiply(&g.swap_tau_omega());
        prop_assert!(same_terms(&left, &right));
    }

    #[test]
    fn derivatives_satisfy_the_product_rule(
        f in arb_series(),
        g in arb_series(),
        axis in prop_oneof![Just(Axis::Tau), Just(Axis::Z), Just(Axis::Omega)],
    ) {
        let left = f.multiply(&g).derivative(axis);
        let right = f
            .derivative(axis)
            .multiply(&g)
            .add(&f.multiply(&g.derivative(axis)))
            .unwrap();
        let prec = left.prec().min(right.prec());
        prop_assert!(left.eq_within(&right, prec));
    }

    #[test]
    fn disc_is_swap_and_reflection_invariant(key in arb_parity().prop_flat_map(arb_key)) {
        prop_assert_eq!(key.disc(), key.swapped().disc());
        let reflected = IndexKey { n: key.n, r: -key.r, m: key.m };
        prop_assert_eq!(key.disc(), reflected.disc());
    }

    #[test]
    fn valuation_is_additive(
        (xn, xd) in ((-300i64..300).prop_filter("nonzero", |n| *n != 0), 1i64..40),
        (yn, yd) in ((-300i64..300).prop_filter("nonzero", |n| *n != 0), 1i64..40),
        p in prop_oneof![Just(2u64), Just(3), Just(5), Just(7), Just(11)],
    ) {
        let x = rat(xn, xd);
        let y = rat(yn, yd);
        let sum = valuation(&x, p).unwrap() + valuation(&y, p).unwrap();
        prop_assert_eq!(valuation(&(x * y), p).unwrap(), sum);
    }

    #[test]
    fn factorization_reconstructs_the_input(n in (-100_000i64..100_000).prop_filter("nonzero", |n| *n != 0)) {
        let f = factor(n).unwrap();
        prop_assert_eq!(f.value(), Int::from(n));
        prop_assert_eq!(f.is_negative(), n < 0);
    }

    #[test]
    fn truncated_products_agree_with_the_oracle(
        f in arb_series(),
        g in arb_series(),
        pf in 2i64..6,
        pg in 2i64..6,
    ) {
        let oracle = f.multiply(&g);
        let truncated = f.truncated(pf).multiply(&g.truncated(pg));
        let prec = truncated.prec().min(oracle.prec());
        prop_assert!(truncated.eq_within(&oracle, prec));
    }

    #[test]
    fn square_roots_round_trip(f in arb_series()) {
        let sq = f.multiply(&f);
        let root = sq.sqrt().unwrap();
        prop_assert!(same_terms(&root, &f) || same_terms(&root, &f.neg()));
    }

    #[test]
    fn exact_division_round_trips(f in arb_series(), g in arb_series()) {
        let q = f.multiply(&g).divide_exact(&g).unwrap();
        let prec = q.prec().min(f.prec());
        prop_assert!(q.eq_within(&f, prec));
    }
}
