//! Separation of constraints into a cyclic Horn part and an acyclic
//! existential part.

mod common;

use common::{generated_instances_separate, separability_case, SEPARABILITY};

#[test]
fn constructed_instances() {
    for (src, acyclic, blocker) in SEPARABILITY {
        separability_case(src, acyclic, blocker).unwrap();
    }
}

#[test]
fn cyclic_variable_under_existential_is_not_separable() {
    let (src, acyclic, blocker) = SEPARABILITY[3];
    assert!(!acyclic);
    assert_eq!(blocker, Some("k"));
    separability_case(src, acyclic, blocker).unwrap();
}

#[test]
fn cyclic_guard_dominating_existential_is_not_separable() {
    let (src, acyclic, blocker) = SEPARABILITY[6];
    separability_case(src, acyclic, blocker).unwrap();
}

#[test]
fn generated_instances_are_acyclic() {
    for seed in 0..100 {
        generated_instances_separate(seed).unwrap();
    }
}
