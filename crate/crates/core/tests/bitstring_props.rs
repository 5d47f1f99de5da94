use dpe_core::{BitString, Offset};
use proptest::prelude::*;

fn arb_pair_len() -> impl Strategy<Value = u32> {
    1u32..=64
}

fn arb_word(len: u32) -> impl Strategy<Value = BitString> {
    let max = if len == 64 { u64::MAX } else { (1u64 << len) - 1 };
    (0..=max).prop_map(move |v| BitString::from_decimal(v, len).unwrap())
}

fn arb_triple() -> impl Strategy<Value = (BitString, BitString, BitString)> {
    arb_pair_len().prop_flat_map(|n| (arb_word(n), arb_word(n), arb_word(n)))
}

proptest! {
    #[test]
    fn metric_axioms_on_long_words((x, y, z) in arb_triple()) {
        let dxy = x.distance(&y).unwrap();
        prop_assert_eq!(dxy, y.distance(&x).unwrap());
        prop_assert_eq!(dxy == 0, x == y);
        prop_assert!(dxy as u128 <= 1u128 << (x.len() - 1));
        let via = x.distance(&z).unwrap() as u128 + z.distance(&y).unwrap() as u128;
        prop_assert!(dxy as u128 <= via);
    }

    #[test]
    fn add_is_a_group_action(
        x in arb_pair_len().prop_flat_map(arb_word),
        b1 in -1000i64..1000,
        b2 in -1000i64..1000,
    ) {
        let n = x.len();
        let m = 1i128 << n;
        let reduce = |b: i128| b.rem_euclid(m);
        let (b1, b2) = (reduce(b1 as i128), reduce(b2 as i128));
        let step = x.add(Offset(b1)).unwrap().add(Offset(b2)).unwrap();
        let once = x.add(Offset(reduce(b1 + b2))).unwrap();
        prop_assert_eq!(step, once);
    }

    #[test]
    fn min_offset_reaches_target((x, y, _) in arb_triple()) {
        let b = x.min_offset(&y).unwrap();
        prop_assert_eq!(x.add(b).unwrap(), y);
        prop_assert_eq!(b.magnitude(), x.distance(&y).unwrap() as u128);
    }

    #[test]
    fn prefix_suffix_catenate_split(x in (2u32..=64).prop_flat_map(arb_word), cut in 1u32..64) {
        let cut = 1 + cut % (x.len() - 1);
        let joined = x.prefix(cut).unwrap().catenate(&x.suffix(x.len() - cut).unwrap()).unwrap();
        prop_assert_eq!(joined, x);
    }

    #[test]
    fn text_and_decimal_round_trip(x in arb_pair_len().prop_flat_map(arb_word)) {
        let text = x.to_string();
        prop_assert_eq!(text.len() as u32, x.len());
        prop_assert_eq!(text.parse::<BitString>().unwrap(), x);
        prop_assert_eq!(BitString::from_decimal(x.decimal(), x.len()).unwrap(), x);
    }
}
