//! Proptest strategies shared by the unit tests.

use alloc::vec::Vec;

use proptest::prelude::*;

use crate::semantics::{LassoModel, World};
use crate::syntax::Formula;

pub const ATOMS: [&str; 3] = ["p", "q", "r"];

/// Propositional modal formulas over the first `atoms` of p, q, r with
/// modal depth at most `depth` and at most `size` nodes.
pub fn formula(atoms: usize, depth: usize, size: usize) -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![
        6 => (0..atoms).prop_map(|k| Formula::prop(ATOMS[k])),
        1 => Just(Formula::top()),
    ];
    leaf.prop_recursive(6, size as u32, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            inner.clone().prop_map(Formula::dia),
            inner.prop_map(Formula::boxed),
        ]
    })
    .prop_filter("bounds", move |f| f.modal_depth() <= depth && f.size() <= size)
}

pub fn world(atoms: usize) -> impl Strategy<Value = World> {
    proptest::bits::u8::between(0, atoms).prop_map(move |bits| {
        World::props(&(0..atoms).filter(|k| bits & (1 << k) != 0).map(|k| ATOMS[k]).collect::<Vec<_>>())
    })
}

pub fn lasso(max_prefix: usize, max_loop: usize, atoms: usize) -> impl Strategy<Value = LassoModel> {
    (
        proptest::collection::vec(world(atoms), 0..=max_prefix),
        proptest::collection::vec(world(atoms), 1..=max_loop),
    )
        .prop_map(|(p, l)| LassoModel::propositional(p, l).unwrap())
}
