//! The standard prolongation equals the evolutionary one plus the
//! total-derivative part, on random fields and expressions.

mod common;

use common::{expr, field_field, lattice_field, Space};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn lattice_prolongations_agree(x in lattice_field(), e in expr(Space::Lattice, 2)) {
        let r = x.equivalence_residual(&e);
        prop_assert!(r.is_zero(), "residual {r}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_prolongations_agree(x in field_field(), e in expr(Space::Field, 2)) {
        let r = x.equivalence_residual(&e);
        prop_assert!(r.is_zero(), "residual {r}");
    }
}
