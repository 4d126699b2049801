//! Acceptance criteria, one line each. Runs without the libtest harness so
//! the lines print under plain `cargo test`.

use std::panic;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::{Duration, Instant};

use actcert_core::checker::{check_supermartingale, termination_lower_bound, CheckConfig};
use actcert_core::gallery::{self, Certificate, CURTAIN_LEVELS, TINSEL_RIBBONS};
use actcert_core::model::{expected_value, Distribution, Real, StateId, TransitionSystem, Variant, Verdict};
use actcert_core::refute::{refute_act, RefutationWitness, RefuteMode};
use actcert_core::sim::{exact_reachability, expected_exit_time, simulate, SimConfig};
use actcert_core::synth::{
    birth_death_martingale, foster_variant, markov_bound, pd_from_epsilon, tree_variant, FosterConfig, LineIndexing,
    TreeSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

type Outcome = Result<String, String>;

fn r(n: i64, d: i64) -> Real {
    Real::ratio(n, d)
}

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn actcert(args: &[&str]) -> (i32, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_actcert")).args(args).output().expect("binary runs");
    (o.status.code().unwrap_or(-1), String::from_utf8_lossy(&o.stdout).into_owned())
}

fn parse(out: &str) -> Result<Value, String> {
    serde_json::from_str(out).map_err(|e| format!("bad JSON ({e})"))
}

fn within(limit: Duration, t0: Instant) -> Result<(), String> {
    let t = t0.elapsed();
    if t > limit {
        Err(format!("took {:.2}s, limit {:.0}s", t.as_secs_f64(), limit.as_secs_f64()))
    } else {
        Ok(())
    }
}

fn fig8_table() -> Outcome {
    let t0 = Instant::now();
    let t = tree_variant(&TreeSpec::powers_of_two(), 8).map_err(|e| e.to_string())?;
    let want = [r(0, 1), r(1, 1), r(3, 2), r(7, 4), r(2, 1), r(17, 8), r(9, 4), r(19, 8), r(5, 2)];
    for (d, w) in want.iter().enumerate() {
        ensure!(t.get(d) == Some(w), "depth {d}: {:?} ≠ {w}", t.get(d));
    }
    let b = gallery::build("blackwell-tree").map_err(|e| e.to_string())?;
    let v = b.variant.as_ref().unwrap();
    let d4 = &b.system.transitions(&StateId::scalar(4)).map_err(|e| e.to_string())?[0];
    let e4 = expected_value(d4, v).map_err(|e| e.to_string())?;
    ensure!(e4 == r(2, 1), "depth-4 expectation {e4}");
    let rep = check_supermartingale(&b.system, v, &CheckConfig::exact(Real::int(4), 100_000)).map_err(|e| e.to_string())?;
    ensure!(rep.verdict == Verdict::Pass, "supermartingale: {}", rep.verdict);
    let slack = rep.condition("supermartingale").and_then(|c| c.worst_slack.clone());
    ensure!(slack == Some(Real::zero()), "worst slack {slack:?}");
    within(Duration::from_secs(1), t0)?;
    Ok(format!("depths 0..8 exact, ⅓·7/4 + ⅔·17/8 = {e4}, zero slack over {} states", rep.window.states_visited))
}

fn symmetric_walk_bound() -> Outcome {
    let t0 = Instant::now();
    let b = gallery::build("symmetric-walk").map_err(|e| e.to_string())?;
    let v = b.variant.as_ref().unwrap();
    let h = Real::int(100);
    let from = StateId::scalar(1);
    let z = exact_reachability(&b.system, v, &h, &from, 10_000).map_err(|e| e.to_string())?;
    ensure!(z.z == Some(r(99, 100)), "exact z = {:?}", z.z);
    ensure!(z.residual <= 1e-12, "value iteration residual {}", z.residual);
    let bound = termination_lower_bound(&Real::one(), &h).map_err(|e| e.to_string())?;
    ensure!(bound == r(99, 100), "termination bound {bound}");
    let sim = simulate(&b.system, v, &SimConfig::new(100_000, h, 2024), &from).map_err(|e| e.to_string())?;
    let zh = sim.z_hat.ok_or("no finished trials")?;
    ensure!((zh - 0.99).abs() <= 0.01, "Monte Carlo z_hat = {zh}");
    within(Duration::from_secs(10), t0)?;
    Ok(format!("z = 99/100 (residual {:.1e}), 1 − V/H = 99/100, z_hat = {zh:.4} from 10^5 trials", z.residual))
}

fn martingale_synthesis() -> Outcome {
    let t0 = Instant::now();
    let t = birth_death_martingale(|_| r(1, 3), 20).map_err(|e| e.to_string())?;
    for n in 1..=20i64 {
        let want = (Real::int(2).powi(n as i32) - Real::one()) / Real::int(2).powi(n as i32 - 1);
        ensure!(t.get(n as usize) == Some(&want), "V({n}) = {:?} ≠ {want}", t.get(n as usize));
    }
    let b = gallery::build("constant-bias-walk").map_err(|e| e.to_string())?;
    let v = b.variant.clone().unwrap().with_declared_sup(Real::int(2));
    let w = RefutationWitness::new(v, RefuteMode::ExactMartingale).map_err(|e| e.to_string())?;
    let rep = refute_act(&b.system, &w, &b.config).map_err(|e| e.to_string())?;
    ensure!(rep.verdict == Verdict::Pass, "refutation {}", rep.verdict);
    ensure!(rep.window.states_visited >= 1000, "window of {} states", rep.window.states_visited);
    within(Duration::from_secs(1), t0)?;
    Ok(format!("V(n) = (2^n − 1)/2^(n−1) for n ≤ 20; B = 2 refutes on {} states", rep.window.states_visited))
}

fn captured_spline() -> Outcome {
    let t0 = Instant::now();
    let b = gallery::build("captured-spline").map_err(|e| e.to_string())?;
    let v = b.variant.as_ref().unwrap();
    let z = exact_reachability(&b.system, v, &b.config.horizon, &StateId::scalar(1), 10_000).map_err(|e| e.to_string())?;
    let hit = z.z.ok_or("no exact value")?;
    // partial product 1 − Π_{m=2}^{k} (1 − 1/m²) = 1 − (k+1)/(2k) at k = 1000
    ensure!(hit == Real::one() - r(1001, 2000), "oracle {hit}");
    ensure!((hit.to_f64() - 0.5).abs() <= 1e-3, "oracle {hit} not within 1e-3 of 1/2");
    let Certificate::Refute(w) = &b.certificate else { return Err("bundle has no refutation witness".into()) };
    ensure!(*w.bound() == Real::int(2), "bound {}", w.bound());
    let rep = refute_act(&b.system, w, &b.config).map_err(|e| e.to_string())?;
    ensure!(rep.verdict == Verdict::Pass, "refutation {}", rep.verdict);
    within(Duration::from_secs(5), t0)?;
    Ok(format!("termination probability within depth 10^3 = {hit} (≈ {:.4}); V = 2s/(s+1), B = 2 refutes", hit.to_f64()))
}

fn lgg_scan() -> Outcome {
    let t0 = Instant::now();
    let (code, out) = actcert(&["scan-lgg", "--max", "1000", "--function", "loglog", "--json"]);
    ensure!(code == 0, "loglog exit code {code}");
    let v = parse(&out)?;
    ensure!(v["violations"] == Value::Array(vec![]), "loglog violations present");
    let cells = v["cells"].as_u64().unwrap_or(0);
    let (code, out) = actcert(&["scan-lgg", "--max", "100", "--function", "log", "--json"]);
    ensure!(code == 1, "log exit code {code}");
    let v = parse(&out)?;
    let viol = v["violations"].as_array().ok_or("no violation list")?;
    ensure!(!viol.is_empty(), "log shows no violation");
    let near = viol.iter().filter(|c| {
        let xy: Vec<i64> = c["coords"].as_array().unwrap().iter().map(|x| x.as_i64().unwrap().abs()).collect();
        (xy[0] - xy[1]).abs() <= 1
    });
    let near = near.count();
    ensure!(near > 0, "no log violation with ||x| − |y|| ≤ 1");
    within(Duration::from_secs(60), t0)?;
    Ok(format!("loglog clean on {cells} cells; log fails at {} cells, {near} within one of |x| = |y|", viol.len()))
}

fn lemma_suites() -> Outcome {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut checked = 0;
    for _ in 0..10_000 {
        let k = rng.random_range(4..=8);
        let weights: Vec<i64> = (0..k).map(|_| rng.random_range(1..=20)).collect();
        let total: i64 = weights.iter().sum();
        let f: Vec<Real> = (0..k).map(|_| r(rng.random_range(0..=60), rng.random_range(1..=6))).collect();
        let mean: Real = weights.iter().zip(&f).map(|(w, x)| r(*w, total) * x).sum();
        let y = &mean + r(rng.random_range(0..=5), 4);
        let y_prime = &y * r(rng.random_range(1..=40), 10);
        let bound = markov_bound(&y, &y_prime);
        // brute-force mass on {f < y'}
        let mass: Real = weights.iter().zip(&f).filter(|(_, x)| **x < y_prime).map(|(w, _)| r(*w, total)).sum();
        ensure!(bound.to_f64() <= mass.to_f64() + 1e-12, "markov bound {bound} exceeds tail mass {mass}");
    }
    while checked < 10_000 {
        let k = rng.random_range(4..=8);
        let v_s = r(rng.random_range(1..=40), rng.random_range(1..=4));
        let weights: Vec<i64> = (0..k).map(|_| rng.random_range(1..=20)).collect();
        let total: i64 = weights.iter().sum();
        let outcomes: Vec<Real> = (0..k).map(|_| &v_s * r(rng.random_range(0..=30), 10)).collect();
        let mean: Real = weights.iter().zip(&outcomes).map(|(w, x)| r(*w, total) * x).sum();
        let eps = &v_s - &mean;
        if !eps.is_positive() {
            continue;
        }
        checked += 1;
        let pd = pd_from_epsilon(&v_s, &eps);
        // every outcome enumerated: mass that moves down by at least d
        let down = &v_s - &pd.d;
        let mass: Real = weights.iter().zip(&outcomes).filter(|(_, x)| **x <= down).map(|(w, _)| r(*w, total)).sum();
        ensure!(mass >= pd.p, "v = {v_s}, ε = {eps}: mass {mass} < p = {}", pd.p);
        ensure!(pd.d.is_positive() && pd.p.is_positive() && pd.p <= Real::one(), "bad point {pd:?}");
    }
    Ok(format!("markov_bound on 10^4 distributions, pd_from_epsilon on {checked} decreasing instances ({:.1}s)", t0.elapsed().as_secs_f64()))
}

fn one_sided_walk() -> TransitionSystem {
    TransitionSystem::new(
        "one-sided-walk",
        1,
        |s| s.head() == 0,
        |s| {
            let n = s.head();
            Ok(vec![Distribution::exact(vec![(StateId::scalar(n - 1), r(1, 2)), (StateId::scalar(n + 1), r(1, 2))])?])
        },
        vec![StateId::scalar(1)],
    )
    .unwrap()
}

fn foster() -> Outcome {
    let t0 = Instant::now();
    let sys = one_sided_walk();
    let fv = foster_variant(&sys, Arc::new(LineIndexing), &FosterConfig::new(50_000, 50)).map_err(|e| e.to_string())?;
    ensure!(fv.values[0] == 0.0, "V(s0) = {}", fv.values[0]);
    ensure!(fv.values.iter().all(|v| *v >= 0.0), "negative value");
    ensure!(fv.values.windows(2).all(|w| w[1] > w[0]), "not strictly increasing");
    // f⁽²ᵏ⁻¹⁾₁ = C_{k−1}/2^{2k−1}, by the Catalan ratio (2k−1)/(2(k+1))
    let mut a = 0.5;
    let mut worst: f64 = 0.0;
    for k in 1..=25_000usize {
        worst = worst.max((fv.table.get(2 * k - 1, 1) - a).abs()).max(fv.table.get(2 * k, 1).abs());
        a *= (2 * k - 1) as f64 / (2 * (k + 1)) as f64;
    }
    ensure!(worst <= 1e-12, "column 1 off the Catalan values by {worst:e}");
    let width = fv.max_interval_width();
    let v: Variant = fv.variant();
    let h = Real::float(fv.values[49]);
    let rep = check_supermartingale(&sys, &v, &CheckConfig::float(h.clone(), 1000, 1e-6 + width)).map_err(|e| e.to_string())?;
    ensure!(rep.verdict == Verdict::Pass, "supermartingale {}: {rep}", rep.verdict);
    // the truncation interval is wide (the tail midpoint is crude); the check also holds without it
    let tight = check_supermartingale(&sys, &v, &CheckConfig::float(h, 1000, 1e-6)).map_err(|e| e.to_string())?;
    ensure!(tight.verdict == Verdict::Pass, "supermartingale at 1e-6 alone: {tight}");
    let slack = tight.condition("supermartingale").and_then(|c| c.worst_slack.clone()).map(|s| s.to_f64()).unwrap_or(0.0);
    within(Duration::from_secs(60), t0)?;
    Ok(format!(
        "V ≥ 0, V(s0) = 0, increasing; SMart on {} states, worst slack {slack:.1e} (interval width {width:.1e}); Catalan error {worst:.1e}",
        rep.window.interior_states
    ))
}

fn gallery_end_to_end() -> Outcome {
    let t0 = Instant::now();
    let (code, out) = actcert(&["examples", "list", "--json"]);
    ensure!(code == 0, "examples list exit {code}");
    let list = parse(&out)?;
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR"));
    let mut checked = Vec::new();
    for ex in list.as_array().ok_or("examples list is not an array")? {
        let name = ex["name"].as_str().unwrap();
        let expected = ex["expected"].as_str().unwrap();
        let horizon = ex["horizon"].as_str().unwrap();
        let mode: Vec<String> = match ex["mode"].as_str().unwrap() {
            "exact" => vec!["--exact".into()],
            _ => vec!["--tol".into(), ex["tolerance"].as_f64().unwrap().to_string()],
        };
        let source: Vec<String> = if ex["dsl"].as_bool().unwrap() {
            let (code, src) = actcert(&["examples", "emit", name]);
            ensure!(code == 0, "{name}: emit exit {code}");
            let path = dir.join(format!("{name}.acts"));
            std::fs::write(&path, src).map_err(|e| e.to_string())?;
            vec![path.to_string_lossy().into_owned()]
        } else {
            vec!["--example".into(), name.into()]
        };
        let cmd = if expected == "refute-pass" { "refute" } else { "check" };
        let mut args: Vec<String> = vec![cmd.into()];
        args.extend(source);
        args.extend(["--horizon".into(), horizon.into(), "--json".into()]);
        args.extend(mode);
        let argv: Vec<&str> = args.iter().map(String::as_str).collect();
        let (code, out) = actcert(&argv);
        let v = parse(&out)?;
        let (want_code, want_verdict, want_rule) = match expected {
            "pd-pass" => (0, "pass", "pd"),
            "nabla-pass" => (0, "pass", "nabla"),
            "refute-pass" => (0, "pass", "martingale-or-sub"),
            _ => (2, "no-variant", "none"),
        };
        ensure!(code == want_code, "{name}: exit {code}, expected {want_code}");
        ensure!(v["verdict"] == want_verdict, "{name}: verdict {}", v["verdict"]);
        ensure!(want_rule == "martingale-or-sub" || v["rule"] == want_rule, "{name}: rule {}", v["rule"]);
        checked.push(name.to_string());
    }
    ensure!(checked.len() == gallery::NAMES.len(), "only {} bundles listed", checked.len());
    ensure!(checked.iter().any(|n| n == "symmetric-walk-demonic"), "demonic variant missing");

    // infinite expected stopping times, seen as exit times growing with the window
    let mut rows = Vec::new();
    for name in ["tinsel", "curtain"] {
        let b = gallery::build(name).map_err(|e| e.to_string())?;
        let v = b.variant.as_ref().unwrap();
        let root = b.system.initial_states()[0].clone();
        let mut prev: Option<Real> = None;
        let mut means = Vec::new();
        for k in 3..=10i64 {
            // runs at V < k + ½ are at most 2^k long
            let hv = r(2 * k + 1, 2);
            let m = expected_exit_time(&b.system, v, &hv, &root, 1_000_000).map_err(|e| format!("{name}: {e}"))?;
            if let Some(p) = &prev {
                ensure!(m > *p, "{name}: mean {m} at H = 2^{k} does not exceed {p}");
            }
            means.push(format!("{:.2}", m.to_f64()));
            prev = Some(m);
        }
        rows.push(format!("{name} [{}]", means.join(", ")));
    }
    ensure!(TINSEL_RIBBONS > 10 && CURTAIN_LEVELS > 10, "gallery tables shorter than 2^10");
    Ok(format!(
        "{} bundles via the CLI; mean exit time over H = 2^3..2^10: {} ({:.1}s)",
        checked.len(),
        rows.join("; "),
        t0.elapsed().as_secs_f64()
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("tree variant table", fig8_table),
        ("symmetric walk bound", symmetric_walk_bound),
        ("martingale synthesis and refutation", martingale_synthesis),
        ("captured spline", captured_spline),
        ("Lgg scan", lgg_scan),
        ("lemma property suites", lemma_suites),
        ("Foster construction", foster),
        ("gallery regression", gallery_end_to_end),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let label = format!("criterion {} ({name})", i + 1);
        if !filter.is_empty() && !filter.iter().any(|p| label.contains(p.as_str())) {
            continue;
        }
        let res = panic::catch_unwind(f).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or(e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        match res {
            Ok(detail) => println!("PASS {label}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {label}: {why}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
