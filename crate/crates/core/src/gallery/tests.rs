use std::collections::{HashMap, HashSet, VecDeque};

use super::*;
use crate::checker::{check_supermartingale, Mode};
use crate::model::Verdict;
use crate::procdsl;
use crate::sim::exact_reachability;

fn verdict(name: &str) -> Option<Verdict> {
    build(name).unwrap().run().unwrap().map(|r| r.verdict)
}

#[test]
fn every_bundle_reproduces_its_verdict() {
    for name in NAMES {
        let b = build(name).unwrap();
        let rep = b.run().unwrap();
        match b.expected {
            Expected::NoCertificate => assert!(rep.is_none(), "{name}"),
            _ => {
                let rep = rep.unwrap();
                assert_eq!(rep.verdict, Verdict::Pass, "{name}: {rep}");
            }
        }
    }
}

#[test]
fn unknown_name_is_an_error() {
    assert!(matches!(build("random-walk-3d"), Err(GalleryError::Unknown(_))));
}

#[test]
fn symmetric_walk_has_zero_slack() {
    let b = build("symmetric-walk").unwrap();
    let rep = check_supermartingale(&b.system, b.variant.as_ref().unwrap(), &CheckConfig::exact(Real::int(10), 1000)).unwrap();
    assert_eq!(rep.verdict, Verdict::Pass);
    assert_eq!(rep.condition("supermartingale").unwrap().worst_slack, Some(Real::zero()));
}

#[test]
fn blackwell_tree_table() {
    let b = build("blackwell-tree").unwrap();
    let v = b.variant.unwrap();
    let want = [r(0, 1), r(1, 1), r(3, 2), r(7, 4), r(2, 1), r(17, 8), r(9, 4), r(19, 8), r(5, 2)];
    for (d, w) in want.iter().enumerate() {
        assert_eq!(v.eval(&StateId::scalar(d as i64)).unwrap(), *w);
    }
    // depth 2^k carries 1 + k/2
    for k in 0..10 {
        assert_eq!(v.eval(&StateId::scalar(1 << k)).unwrap(), Real::one() + r(k, 2));
    }
}

#[test]
fn captured_spline_escape_converges_to_half() {
    let b = build("captured-spline").unwrap();
    let z = exact_reachability(&b.system, b.variant.as_ref().unwrap(), &b.config.horizon, &StateId::scalar(1), 10_000)
        .unwrap();
    // the window ends at node 1000, reached with probability Π_{m=2}^{1000} (1 − 1/m²) = 1001/2000
    assert_eq!(z.z.unwrap(), Real::one() - r(1001, 2000));
}

#[test]
fn tinsel_root_calculation() {
    let b = tinsel(TINSEL_RIBBONS).unwrap();
    let d = &b.system.transitions(&StateId::pair(0, 0)).unwrap()[0];
    let v = b.variant.unwrap();
    let e: Real = d.iter().map(|(t, p)| p * v.eval(t).unwrap()).sum();
    assert_eq!(e, Real::int(2) - r(1, 1 << (TINSEL_RIBBONS - 1)));
    // ribbon n is entered at value n and runs 2^n − 1 steps
    for n in 1..8 {
        assert_eq!(tinsel_value((1 << n) - 1), Real::int(n));
    }
    assert_eq!(tinsel_value(2), r(3, 2));
}

#[test]
fn curtain_runs() {
    for k in 1..12 {
        assert_eq!(curtain_value((1 << k) - k), Real::int(k));
    }
    assert_eq!(curtain_value(3), Real::int(2) + r(1, 3));
    let b = build("curtain").unwrap();
    let Certificate::Pd(pd) = &b.certificate else { panic!() };
    assert_eq!(*pd.d.eval(&Real::int(2)), Real::one());
    assert_eq!(*pd.d.eval(&r(5, 2)), r(1, 3));
    assert_eq!(*pd.d.eval(&Real::int(4)), r(1, 7));
}

#[test]
fn harmonic_walk_first_step() {
    let b = build("harmonic-bias-walk").unwrap();
    let d = &b.system.transitions(&StateId::scalar(1)).unwrap()[0];
    assert_eq!(d.prob_of(&StateId::scalar(0)), r(1, 3));
}

#[test]
fn certificates_are_mutually_exclusive() {
    // pd-certified bundles: the variant is unbounded, so no bound survives
    for name in ["symmetric-walk", "escaping-spline", "harmonic-bias-walk"] {
        let b = build(name).unwrap();
        let v = b.variant.clone().unwrap().with_declared_sup(Real::int(3));
        let w = RefutationWitness::new(v, RefuteMode::SubMartingale).unwrap();
        let rep = refute_act(&b.system, &w, &b.config).unwrap();
        assert_ne!(rep.verdict, Verdict::Pass, "{name}");
    }
    // refuted bundles: Progress with a constant witness fails before H
    for name in ["constant-bias-walk", "captured-spline"] {
        let b = build(name).unwrap();
        let pd = PdWitness::constant(r(1, 4), r(1, 100)).unwrap();
        let cfg = CheckConfig::exact(b.config.horizon.clone(), BUDGET);
        let rep = check_pd_rule(&b.system, b.variant.as_ref().unwrap(), &pd, &cfg).unwrap();
        assert_eq!(rep.verdict, Verdict::Fail, "{name}");
    }
}

#[test]
fn dsl_sources_are_bisimilar_to_programmatic_systems() {
    for name in NAMES {
        let b = build(name).unwrap();
        let Some(src) = &b.dsl else { continue };
        let e = procdsl::elaborate(&procdsl::parse(src).unwrap()).unwrap();
        assert_eq!(e.name, *name);
        assert_eq!(e.system.initial_states(), b.system.initial_states());
        let mut seen = HashSet::new();
        let mut queue: VecDeque<StateId> = b.system.initial_states().iter().cloned().collect();
        let mut visited = 0;
        while let Some(s) = queue.pop_front() {
            if visited == 200 {
                break;
            }
            if !seen.insert(s.clone()) {
                continue;
            }
            visited += 1;
            assert_eq!(e.system.is_target(&s), b.system.is_target(&s), "{name} at {s}");
            if let (Some(v1), Some(v2)) = (&e.variant, &b.variant) {
                assert_eq!(v1.eval(&s).unwrap(), v2.eval(&s).unwrap(), "{name} at {s}");
            }
            if b.system.is_target(&s) {
                continue;
            }
            let (d1, d2) = (e.system.transitions(&s).unwrap(), b.system.transitions(&s).unwrap());
            assert_eq!(d1.len(), d2.len(), "{name} at {s}");
            for (a, c) in d1.iter().zip(&d2) {
                let ma: HashMap<&StateId, &Real> = a.iter().collect();
                let mc: HashMap<&StateId, &Real> = c.iter().collect();
                assert_eq!(ma, mc, "{name} at {s}");
                queue.extend(c.iter().map(|(t, _)| t.clone()));
            }
        }
        assert!(visited >= 50, "{name}: only {visited} states");
        match (&b.certificate, &e.pd, &e.bound) {
            (Certificate::Pd(pd), Some(q), _) => assert_eq!(pd, q, "{name}"),
            (Certificate::Refute(w), _, Some(bound)) => assert_eq!(w.bound(), bound, "{name}"),
            (Certificate::None, None, None) => {}
            _ => panic!("{name}: DSL witness does not match the bundle"),
        }
    }
}

#[test]
fn exact_where_rational() {
    for name in NAMES {
        let b = build(name).unwrap();
        let want = if *name == "symmetric-walk-log" { Mode::Float } else { Mode::Exact };
        assert_eq!(b.config.mode, want, "{name}");
    }
    assert_eq!(verdict("walk-2d"), None);
}
