//! Randomized checks of the solving pipeline against the brute-force oracle.

mod common;

use std::collections::BTreeSet;

use common::*;
use irt::ehc::oracle::brute_force_valid;
use irt::name::Fresh;
use irt::qe::CcQe;
use irt::solver::{poke, sides, solve};
use proptest::prelude::*;

const CASES: u32 = 128;

fn check(outcome: Outcome) -> Result<(), TestCaseError> {
    outcome.map_err(TestCaseError::fail)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(CASES))]

    #[test]
    fn poke_is_equisatisfiable(seed in any::<u64>()) {
        check(common::poke_is_equisatisfiable(seed))?;
    }

    #[test]
    fn noside_is_existential_free_nnf(seed in any::<u64>()) {
        check(common::noside_is_existential_free_nnf(seed))?;
    }

    #[test]
    fn noside_and_sides_decompose(seed in any::<u64>()) {
        check(common::noside_and_sides_decompose(seed))?;
    }

    #[test]
    fn kappa_elimination_is_equisatisfiable(seed in any::<u64>()) {
        check(common::kappa_elimination_is_equisatisfiable(seed))?;
    }

    #[test]
    fn recursive_skolems_are_redundant(seed in any::<u64>()) {
        check(common::recursive_skolems_are_redundant(seed))?;
    }

    #[test]
    fn cutting_nested_skolems_strengthens(seed in any::<u64>()) {
        check(common::cutting_nested_skolems_strengthens(seed))?;
    }

    #[test]
    fn safe_is_sound(seed in any::<u64>()) {
        check(common::safe_is_sound(seed))?;
    }

    #[test]
    fn cc_qe_strengthens(seed in any::<u64>()) {
        check(common::cc_qe_strengthens(seed))?;
    }
}

#[test]
fn nested_existentials_get_nested_skolems() {
    let c = irt::ehc::text::parse_constraint("(exists (a Int) (exists (b Int) (= a b)))").unwrap();
    let (hc, pis) = poke(&c, &Fresh::new(1));
    assert_eq!(pis.len(), 2);
    let params: Vec<Vec<&str>> = pis.iter().map(|p| p.params.iter().map(|(x, _)| x.as_str()).collect()).collect();
    assert_eq!(params, vec![vec!["a"], vec!["b", "a"]]);
    assert_eq!(sides(&hc).to_string().matches("exists").count(), 2);
}

#[test]
fn generator_covers_interesting_shapes() {
    let (mut with_exists, mut with_kappa_guard, mut nested_pi, mut valid) = (0, 0, 0, 0);
    for seed in 0..CASES as u64 {
        let c = instance(seed);
        with_exists += c.has_exists() as u32;
        with_kappa_guard += c.to_string().contains("(forall (x") as u32 & !c.kvars().is_empty() as u32;
        let (free, _) = kappa_free(&c);
        nested_pi += (drop_recursive_pis(&free, &BTreeSet::new()) != free) as u32;
        let vc = solve(&c, &CcQe, &Fresh::new(1)).unwrap().vc();
        valid += (c.has_exists() && brute_force_valid(&vc, &dom()).unwrap()) as u32;
    }
    assert!(valid > CASES / 8, "only {valid} instances with existentials solve to a valid VC");
    assert!(with_exists > CASES / 4, "{with_exists}");
    assert!(with_kappa_guard > CASES / 4, "{with_kappa_guard}");
    assert!(nested_pi > 0, "no instance exercises recursive Skolem predicates");
}
