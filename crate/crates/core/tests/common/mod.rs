//! Random expressions and vector fields for the property suites.
#![allow(dead_code)]

use dds_core::expr::{parse, Expr};
use dds_core::vfield::VectorField;
use proptest::prelude::*;

#[derive(Clone, Copy, Debug)]
pub enum Space {
    Lattice,
    Field,
}

fn leaf(space: Space) -> BoxedStrategy<String> {
    let jets: Vec<String> = match space {
        Space::Lattice => (-2..=2)
            .map(|k| format!("u[{k}]"))
            .chain((-1..=1).map(|k| format!("ut[{k}]")))
            .chain(["utt[0]".to_string(), "t".into()])
            .collect(),
        Space::Field => (-1..=1)
            .map(|k| format!("u[{k}]"))
            .chain((-1..=1).flat_map(|k| [format!("ux[{k}]"), format!("uy[{k}]")]))
            .chain(["uxx[0]".to_string(), "uxy[0]".into(), "x".into(), "y".into()])
            .collect(),
    };
    prop_oneof![
        3 => proptest::sample::select(jets),
        1 => proptest::sample::select(vec!["n".to_string(), "alt".into()]),
        1 => (-3i32..=3).prop_map(|c| format!("({c})")),
    ]
    .boxed()
}

fn jet_pair(space: Space) -> BoxedStrategy<String> {
    let r = match space {
        Space::Lattice => -2..=2i32,
        Space::Field => -1..=1i32,
    };
    (r.clone(), r).prop_map(|(a, b)| format!("exp(u[{a}] - u[{b}])")).boxed()
}

/// Source text of a random expression in the jet space of `space`.
pub fn expr_src(space: Space, depth: u32) -> BoxedStrategy<String> {
    let base = prop_oneof![4 => leaf(space), 1 => jet_pair(space)];
    base.prop_recursive(depth, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} + {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} - {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})*({b})")),
            inner.clone().prop_map(|a| format!("({a})^2")),
            (inner.clone(), inner).prop_map(|(a, b)| format!("({a})/(({b})^2 + 1)")),
        ]
    })
    .boxed()
}

pub fn expr(space: Space, depth: u32) -> BoxedStrategy<Expr> {
    expr_src(space, depth).prop_map(|s| parse(&s).expect("generated source parses")).boxed()
}

/// A coefficient a point field of the given space may carry.
pub fn coefficient(space: Space) -> BoxedStrategy<Expr> {
    let atoms: Vec<&'static str> = match space {
        Space::Lattice => vec!["t", "u[0]", "n", "alt", "1", "2", "-1"],
        Space::Field => vec!["x", "y", "u[0]", "n", "alt", "1", "-2"],
    };
    let atom = proptest::sample::select(atoms).prop_map(str::to_string);
    atom.prop_recursive(2, 8, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} + {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})*({b})")),
            inner.prop_map(|a| format!("({a})/(u[0]^2 + 1)")),
        ]
    })
    .prop_map(|s| parse(&s).unwrap())
    .boxed()
}

pub fn lattice_field() -> BoxedStrategy<VectorField> {
    (coefficient(Space::Lattice), coefficient(Space::Lattice))
        .prop_map(|(tau, phi)| VectorField::lattice(tau, phi))
        .boxed()
}

pub fn field_field() -> BoxedStrategy<VectorField> {
    (coefficient(Space::Field), coefficient(Space::Field), coefficient(Space::Field))
        .prop_map(|(xi, eta, phi)| VectorField::field(xi, eta, phi))
        .boxed()
}
