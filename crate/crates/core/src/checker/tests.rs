use super::*;
use crate::model::{Distribution, StateId, Verdict};

fn r(n: i64, d: i64) -> Real {
    Real::ratio(n, d)
}

/// Birth-death walk on ℤ with target 0 and `q` the probability of moving
/// toward 0 (for positive states).
fn walk(q: Real) -> TransitionSystem {
    TransitionSystem::new(
        "walk",
        1,
        |s| s.head() == 0,
        move |s| {
            let n = s.head();
            let toward = if n > 0 { n - 1 } else { n + 1 };
            let away = if n > 0 { n + 1 } else { n - 1 };
            Ok(vec![Distribution::exact(vec![
                (StateId::scalar(toward), q.clone()),
                (StateId::scalar(away), Real::one() - &q),
            ])?])
        },
        vec![StateId::scalar(1)],
    )
    .unwrap()
}

fn abs_v() -> Variant {
    Variant::new("|s|", 1, |s| Real::int(s.head().abs()))
}

fn exact(h: i64) -> CheckConfig {
    CheckConfig::exact(Real::int(h), 100_000)
}

#[test]
fn wellformed_examples() {
    let sys = walk(r(1, 2));
    assert_eq!(check_variant_wellformed(&sys, &abs_v(), &exact(20)).unwrap().verdict, Verdict::Pass);

    let shifted = Variant::new("|s|-1", 1, |s| Real::int(s.head().abs() - 1));
    let rep = check_variant_wellformed(&sys, &shifted, &exact(20)).unwrap();
    assert_eq!(rep.verdict, Verdict::Fail);
    assert!(rep.counterexamples.iter().any(|c| c.state == StateId::scalar(1)));

    let two_sided = sys.with_initial_states(vec![StateId::scalar(1), StateId::scalar(-1)]).unwrap();
    let signed = Variant::new("s", 1, |s| Real::int(s.head()));
    let rep = check_variant_wellformed(&two_sided, &signed, &exact(20)).unwrap();
    assert_eq!(rep.verdict, Verdict::Fail);
    assert_eq!(rep.counterexamples[0].state, StateId::scalar(-1));
}

#[test]
fn supermartingale_of_walks() {
    let rep = check_supermartingale(&walk(r(1, 2)), &abs_v(), &exact(10)).unwrap();
    assert_eq!(rep.verdict, Verdict::Pass);
    assert_eq!(rep.condition("supermartingale").unwrap().worst_slack, Some(Real::zero()));

    let rep = check_supermartingale(&walk(r(1, 3)), &abs_v(), &exact(10)).unwrap();
    assert_eq!(rep.verdict, Verdict::Fail);
    let cx = &rep.counterexamples[0];
    assert_eq!(cx.state, StateId::scalar(1));
    assert_eq!((cx.lhs.clone(), cx.rhs.clone()), (r(4, 3), Real::one()));
}

#[test]
fn progress_of_symmetric_walk() {
    let pd = PdWitness::constant(r(1, 2), Real::one()).unwrap();
    let rep = check_pd_rule(&walk(r(1, 2)), &abs_v(), &pd, &exact(100)).unwrap();
    assert_eq!(rep.verdict, Verdict::Pass);
    let b = rep.bounds.unwrap();
    assert_eq!(b.termination_lower_bound, r(99, 100));
    assert_eq!(b.escape_lower_bound, r(1, 2).powi(100));
    assert!(rep.warnings.is_empty());
}

#[test]
fn progress_fails_when_p_too_large() {
    let pd = PdWitness::constant(r(3, 4), Real::one()).unwrap();
    let rep = check_progress(&walk(r(1, 2)), &abs_v(), &pd, &exact(10)).unwrap();
    assert_eq!(rep.verdict, Verdict::Fail);
    assert!(rep.bounds.is_none());
}

#[test]
fn nabla_rejects_exact_martingale() {
    let nabla = NablaWitness::constant(r(1, 1000)).unwrap();
    let rep = check_nabla(&walk(r(1, 2)), &abs_v(), &nabla, &exact(10)).unwrap();
    assert_eq!(rep.verdict, Verdict::Fail);
}

#[test]
fn constant_nabla_on_drifting_walk() {
    // toward 0 with probability 3/4: expected decrease exactly 1/2
    let nabla = NablaWitness::constant(r(1, 2)).unwrap();
    let rep = check_nabla_rule(&walk(r(3, 4)), &abs_v(), &nabla, &exact(50)).unwrap();
    assert_eq!(rep.verdict, Verdict::Pass);
    assert!(rep.bounds.is_some());
    let too_much = NablaWitness::constant(r(3, 4)).unwrap();
    assert_eq!(check_nabla(&walk(r(3, 4)), &abs_v(), &too_much, &exact(50)).unwrap().verdict, Verdict::Fail);
}

#[test]
fn escape_bound_examples() {
    let pd = |p: Real, d: Real| PdWitness::constant(p, d).unwrap();
    assert_eq!(escape_bound(&Real::int(100), &pd(r(1, 2), Real::one())), r(1, 2).powi(100));
    assert_eq!(escape_bound(&Real::one(), &pd(Real::one(), Real::one())), Real::one());
    assert_eq!(escape_bound(&Real::int(3), &pd(r(1, 3), Real::int(2))), r(1, 9));
    let log = escape_bound_log10(&Real::int(100), &pd(r(1, 2), Real::one()));
    assert!((log + 100.0 * 2f64.log10()).abs() < 1e-9);
}

#[test]
fn termination_bound_examples() {
    assert_eq!(termination_lower_bound(&Real::one(), &Real::int(100)).unwrap(), r(99, 100));
    assert_eq!(
        termination_lower_bound(&Real::one(), &Real::int(1_000_000)).unwrap(),
        Real::one() - r(1, 1_000_000)
    );
    assert_eq!(termination_lower_bound(&Real::int(7), &Real::int(7)).unwrap(), Real::zero());
    assert!(termination_lower_bound(&Real::int(8), &Real::int(7)).is_err());
}

#[test]
fn start_outside_window_is_inconclusive() {
    let pd = PdWitness::constant(r(1, 2), Real::one()).unwrap();
    let cfg = CheckConfig::exact(r(1, 2), 100);
    let rep = check_pd_rule(&walk(r(1, 2)), &abs_v(), &pd, &cfg).unwrap();
    assert_eq!(rep.verdict, Verdict::InconclusiveWindow);
    assert!(rep.bounds.is_none());
}

#[test]
fn truncated_window_is_inconclusive() {
    let pd = PdWitness::constant(r(1, 2), Real::one()).unwrap();
    let cfg = CheckConfig::exact(Real::int(100), 10);
    let rep = check_pd_rule(&walk(r(1, 2)), &abs_v(), &pd, &cfg).unwrap();
    assert_eq!(rep.verdict, Verdict::InconclusiveWindow);
    assert!(rep.window.truncated);
}

#[test]
fn exact_mode_refuses_floats() {
    let v = Variant::new("float", 1, |s| Real::float(s.head().abs() as f64));
    assert!(matches!(check_supermartingale(&walk(r(1, 2)), &v, &exact(5)), Err(CheckError::Inexact(_))));
    let cfg = CheckConfig::float(Real::int(5), 1000, 1e-9);
    assert_eq!(check_supermartingale(&walk(r(1, 2)), &v, &cfg).unwrap().verdict, Verdict::Pass);
    let mut bad = exact(5);
    bad.tolerance = 1e-3;
    assert!(check_supermartingale(&walk(r(1, 2)), &abs_v(), &bad).is_err());
}

#[test]
fn diagnostic_flags_constant_bias() {
    let v = Variant::new("2-2^(1-s)", 1, |s| Real::int(2) - Real::int(2).powi(1 - s.head() as i32));
    let cfg = CheckConfig::exact(Real::int(2) - Real::int(2).powi(-60), 1000);
    let diag = bounded_variant_diagnostic(&walk(r(1, 3)), &v, &cfg).unwrap();
    assert!(diag.warning.is_some(), "{diag:?}");
    assert!((diag.observed_sup - 2.0).abs() < 1e-9);

    let diag = bounded_variant_diagnostic(&walk(r(1, 2)), &abs_v(), &exact(200)).unwrap();
    assert!(diag.warning.is_none());
}

#[test]
fn demonic_choice_is_universal() {
    let base = walk(r(1, 2));
    let pd = PdWitness::constant(r(1, 2), Real::one()).unwrap();
    // an adversary option that stays put
    let lazy = base.with_extra_choice(|s| Some(Distribution::point(s.clone())));
    let rep = check_pd_rule(&lazy, &abs_v(), &pd, &exact(20)).unwrap();
    assert_eq!(rep.verdict, Verdict::Fail);
    assert!(rep.counterexamples.iter().all(|c| c.distribution == Some(1)));
}
