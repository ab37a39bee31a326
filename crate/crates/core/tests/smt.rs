//! Validity checks through the external solver, cross-checked against the
//! brute-force evaluator.

use irt::ehc::oracle::{brute_force_valid, Domain};
use irt::ehc::random::{closed_vc, VC_RANGE};
use irt::ehc::text::parse_constraint;
use irt::smt::{check_valid, SmtConfig, SmtResult};
use rand::rngs::StdRng;
use rand::SeedableRng;

fn verdict(src: &str) -> SmtResult {
    check_valid(&parse_constraint(src).unwrap(), &SmtConfig::default()).unwrap()
}

#[test]
fn constants() {
    assert_eq!(verdict("true"), SmtResult::Valid);
    assert!(matches!(verdict("false"), SmtResult::Invalid(_)));
}

#[test]
fn singleton_implications() {
    assert_eq!(verdict("(forall (v Int) (= v 1) (= v 1))"), SmtResult::Valid);
    assert!(matches!(verdict("(forall (v Int) true (= v 1))"), SmtResult::Invalid(_)));
}

#[test]
fn unit_sort_is_declared() {
    assert_eq!(verdict("(forall (u Unit) true (= u unit))"), SmtResult::Valid);
}

#[test]
fn random_vcs_agree_with_brute_force() {
    let dom = Domain::ints(VC_RANGE.0..=VC_RANGE.1);
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let (mut valid, mut invalid) = (0, 0);
    for _ in 0..50 {
        let vc = closed_vc(&mut rng, 5);
        let expected = brute_force_valid(&vc, &dom).unwrap();
        let got = check_valid(&vc, &SmtConfig::default()).unwrap();
        match got {
            SmtResult::Valid => assert!(expected, "solver says valid, evaluator disagrees: {vc}"),
            SmtResult::Invalid(_) => assert!(!expected, "solver says invalid, evaluator disagrees: {vc}"),
            other => panic!("{other:?} on {vc}"),
        }
        if expected { valid += 1 } else { invalid += 1 }
    }
    assert!(valid >= 5 && invalid >= 5, "unbalanced sample: {valid} valid, {invalid} invalid");
}
