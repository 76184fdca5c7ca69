mod common;

use common::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn ring(a in series(), b in series(), c in series()) {
        ring_axioms(&a, &b, &c)?;
    }

    #[test]
    fn inverse_and_division(u in unit(), a in series()) {
        inversion_round_trip(&u, &a)?;
    }

    #[test]
    fn truncation_is_sound(a in series(), b in series(), u in unit()) {
        precision_soundness(&a, &b, &u)?;
    }

    #[test]
    fn derivations(a in series(), b in series()) {
        leibniz(&a, &b)?;
    }

    #[test]
    fn json_round_trip(a in series()) {
        let back: mjf_core::QZSeries = serde_json::from_str(&serde_json::to_string(&a).unwrap()).unwrap();
        prop_assert_eq!(back, a);
    }
}
