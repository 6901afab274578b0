//! Kernel invariants over random inputs.

mod common;

use std::collections::BTreeSet;

use common::{expr, field_field, lattice_field, Space};
use dds_core::expr::{collect, parse, Atom, Direction, Expr};
use dds_core::jet::{shift, total_derivative};
use dds_core::vfield::VectorField;
use proptest::prelude::*;

fn jacobi(x: &VectorField, y: &VectorField, z: &VectorField) -> VectorField {
    let b = |a: &VectorField, b: &VectorField| a.commutator(b).unwrap();
    let s = b(&b(x, y), z).combine(&b(&b(y, z), x), |p, q| p + q).unwrap();
    s.combine(&b(&b(z, x), y), |p, q| p + q).unwrap()
}

/// Jets that occur in some denominator factor.
fn denominator_jets(e: &Expr) -> BTreeSet<Atom> {
    e.denominator_factors()
        .iter()
        .flat_map(|(p, _)| Expr::from_poly(p.clone()).jets())
        .map(Atom::Jet)
        .collect()
}

fn reconstruct(e: &Expr, kernels: bool) {
    let bad = denominator_jets(e);
    let mut vars: BTreeSet<Atom> = e.jets().into_iter().map(Atom::Jet).filter(|a| !bad.contains(a)).collect();
    if !kernels {
        // Without kernel splitting, variables may not sit inside exp arguments.
        let in_exp: BTreeSet<Atom> = e
            .numerator()
            .terms()
            .filter_map(|(m, _)| m.exp_arg().cloned())
            .flat_map(|a| a.jets())
            .map(Atom::Jet)
            .collect();
        vars.retain(|a| !in_exp.contains(a));
    }
    let parts = collect(e, &vars, kernels).unwrap();
    let sum: Expr = parts.iter().map(|(k, c)| k.to_expr() * c).sum();
    prop_assert_eq_helper(&sum, e);
    for c in parts.values() {
        assert!(c.atoms().iter().all(|a| !vars.contains(a)), "coefficient {c} still contains a split variable");
    }
}

fn prop_assert_eq_helper(a: &Expr, b: &Expr) {
    assert!((a - b).is_zero(), "{a} != {b}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn normal_form_is_idempotent(e in expr(Space::Lattice, 3)) {
        let again = parse(&e.to_string()).unwrap();
        prop_assert!((&again - &e).is_zero());
        prop_assert_eq!(parse(&again.to_string()).unwrap().to_string(), again.to_string());
    }

    #[test]
    fn shift_commutes_with_total_derivatives(e in expr(Space::Lattice, 3), f in expr(Space::Field, 2), k in -2i32..=2) {
        prop_assert_eq!(shift(&total_derivative(&e, Direction::T), k), total_derivative(&shift(&e, k), Direction::T));
        for d in [Direction::X, Direction::Y] {
            prop_assert_eq!(shift(&total_derivative(&f, d), k), total_derivative(&shift(&f, k), d));
        }
        prop_assert_eq!(shift(&shift(&e, k), -k), e);
    }

    #[test]
    fn collect_reconstructs(e in expr(Space::Lattice, 3)) {
        reconstruct(&e, false);
        reconstruct(&e, true);
    }

    #[test]
    fn brackets_satisfy_jacobi(x in lattice_field(), y in lattice_field(), z in lattice_field(), a in field_field(), b in field_field(), c in field_field()) {
        prop_assert!(jacobi(&x, &y, &z).is_zero());
        prop_assert!(jacobi(&a, &b, &c).is_zero());
    }
}
