//! Property tests over randomized inputs.

use proptest::prelude::*;
use quasivi::lds::{generate, SequenceSource, SourceKind};
use quasivi::transforms::{inverse_normal_cdf, normal_cdf};

fn any_kind() -> impl Strategy<Value = SourceKind> {
    prop_oneof![
        Just(SourceKind::Mc),
        Just(SourceKind::QmcSobol),
        Just(SourceKind::RqmcShift),
        Just(SourceKind::RqmcScramble),
    ]
}

proptest! {
    #[test]
    fn generate_is_pure_in_its_arguments(
        kind in any_kind(),
        d in 1usize..16,
        seed in any::<u64>(),
        skip in 0usize..64,
        n in 1usize..128,
    ) {
        let src = SequenceSource { kind, d, seed, skip };
        let a = generate(&src, n).unwrap();
        let b = generate(&src, n).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn generated_points_stay_in_the_half_open_cube(
        kind in any_kind(),
        d in 1usize..8,
        seed in any::<u64>(),
        n in 1usize..64,
    ) {
        let src = SequenceSource { kind, d, seed, skip: 0 };
        let batch = generate(&src, n).unwrap();
        for row in batch.rows() {
            for &u in row {
                prop_assert!((0.0..1.0).contains(&u));
            }
        }
    }

    #[test]
    fn quantile_round_trip_within_contract(u in 1e-9f64..=0.999999999) {
        let x = inverse_normal_cdf(u).unwrap();
        prop_assert!((normal_cdf(x) - u).abs() <= 1e-9);
    }

    #[test]
    fn quantile_preserves_order(a in 0.001f64..0.999, b in 0.001f64..0.999) {
        prop_assume!(a < b);
        let xa = inverse_normal_cdf(a).unwrap();
        let xb = inverse_normal_cdf(b).unwrap();
        prop_assert!(xa < xb);
    }
}
