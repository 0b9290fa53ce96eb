use hyperlab::words::{
    count_uncontrolled, count_x, count_x_meet_in_middle, in_x, is_uncontrolled, split_xy,
    split_xy_counts, t_ladder_log, LadderParams, Word,
};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::ToPrimitive;
use proptest::prelude::*;

/// Rationals `p/q` strictly inside `(0, 1/2)`.
fn alpha() -> impl Strategy<Value = BigRational> {
    (3u32..60)
        .prop_flat_map(|q| (1..q.div_ceil(2), Just(q)))
        .prop_filter("below one half", |(p, q)| 2 * p < *q)
        .prop_map(|(p, q)| BigRational::new(BigInt::from(p), BigInt::from(q)))
}

fn brute_uncontrolled(t0: usize, a: &BigRational) -> u64 {
    Word::all(t0)
        .unwrap()
        .filter(|w| is_uncontrolled(w, a))
        .count() as u64
}

#[test]
fn a_twenty_fifth_leaves_only_the_all_twos_block_below_twenty_five() {
    let a = BigRational::new(BigInt::from(1), BigInt::from(25));
    for t0 in 1..25 {
        assert_eq!(count_uncontrolled(t0, &a).unwrap(), BigUint::from(1u32));
    }
    assert_eq!(count_uncontrolled(25, &a).unwrap(), BigUint::from(26u32));
}

#[test]
fn three_block_words_by_every_route() {
    let a = BigRational::new(BigInt::from(1), BigInt::from(3));
    let (x, y) = split_xy_counts(3, &a).unwrap();
    assert_eq!(x + y, 1 << 24);
    assert_eq!(BigUint::from(x), count_x_meet_in_middle(3, &a).unwrap());
    assert_eq!(x, 4u64.pow(8));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closed_form_matches_enumeration(t0 in 1usize..=16, a in alpha()) {
        prop_assert_eq!(count_uncontrolled(t0, &a).unwrap(), BigUint::from(brute_uncontrolled(t0, &a)));
    }

    #[test]
    fn counts_respect_the_entropy_bound(t0 in 1usize..=200, a in alpha()) {
        let af = a.to_f64().unwrap();
        let entropy = -af * af.log2() - (1.0 - af) * (1.0 - af).log2();
        let count = count_uncontrolled(t0, &a).unwrap();
        let bits = count.to_f64().unwrap().log2();
        prop_assert!(bits <= entropy * t0 as f64 + 1e-9);
    }

    #[test]
    fn membership_compares_exactly(bits in any::<u16>(), len in 1usize..=16, a in alpha()) {
        let w = Word::from_bits(u64::from(bits) & ((1 << len) - 1), len).unwrap();
        let lhs = BigRational::new(BigInt::from(w.ones()), BigInt::from(len));
        prop_assert_eq!(is_uncontrolled(&w, &a), lhs <= a);
    }

    #[test]
    fn split_routes_agree(t0 in 1usize..=2, a in alpha()) {
        let (x, y) = split_xy(t0, &a).unwrap();
        let (cx, cy) = split_xy_counts(t0, &a).unwrap();
        prop_assert_eq!((x.len() as u64, y.len() as u64), (cx, cy));
        prop_assert!(x.iter().all(|w| in_x(w, t0, &a)));
        prop_assert!(y.iter().all(|w| !in_x(w, t0, &a)));
        prop_assert_eq!(BigUint::from(cx), count_x_meet_in_middle(t0, &a).unwrap());
        let eighth = count_uncontrolled(t0, &a).unwrap();
        prop_assert_eq!(BigUint::from(cx), num_traits::pow(eighth, 8));
    }

    #[test]
    fn ladder_is_monotone_and_tight(l in 1.0f64..500.0, d in 0.0f64..50.0, rho in 0.76f64..0.99) {
        let (t0, t1) = t_ladder_log(l, rho).unwrap();
        prop_assert_eq!(t1, 4 * t0);
        prop_assert!(t0 as f64 >= rho / 4.0 * l - 1e-9);
        prop_assert!((t0 as f64) < rho / 4.0 * l + 1.0);
        prop_assert!(t_ladder_log(l + d, rho).unwrap().0 >= t0);
    }

    #[test]
    fn ladder_counts_use_the_block_length(l in 4.0f64..200.0, a in alpha()) {
        let p = LadderParams::from_log_inv_h(l, 0.9, a.clone()).unwrap();
        let per_block = count_uncontrolled(p.t0, &a).unwrap();
        prop_assert_eq!(count_x(&p).unwrap(), num_traits::pow(per_block, 8));
    }

    #[test]
    fn blocks_reassemble(bits in any::<u64>(), t0 in 1usize..=8) {
        let len = 8 * t0;
        let mask = if len == 64 { u64::MAX } else { (1u64 << len) - 1 };
        let w = Word::from_bits(bits & mask, len).unwrap();
        let mut joined = w.block(0, t0);
        for b in 1..8 {
            joined = joined.concat(&w.block(b, t0)).unwrap();
        }
        prop_assert_eq!(joined, w);
    }
}
