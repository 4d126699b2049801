use std::sync::Arc;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use actcert_core::checker::{check_nabla_rule, check_pd_rule, check_without_witness, CheckConfig, Mode};
use actcert_core::gallery;
use actcert_core::lggscan::{self, LggFunction, ScanConfig, ScanReport};
use actcert_core::model::{CheckReport, Distribution, Real, StateId, TransitionSystem, Verdict};
use actcert_core::refute::{refute_act, RefutationWitness, RefuteMode};
use actcert_core::sim::{exact_reachability, simulate, Adversary, Reachability, SimConfig, SimResult};
use actcert_core::synth::{
    birth_death_martingale, foster_variant, pd_witness_from_nabla, tree_variant, FosterConfig, LineIndexing, TreeSpec,
};
use serde::Serialize;

use crate::source::{config, load, real};
use crate::{
    CheckArgs, Command, ExamplesCommand, RefuteArgs, RefuteModeArg, Rule, ScanArgs, SimulateArgs, Status, SynthCommand,
};

pub fn run(cmd: Command) -> Result<Status> {
    match cmd {
        Command::Check(a) => check(a),
        Command::Refute(a) => refute(a),
        Command::Simulate(a) => sim(a),
        Command::Synthesize(s) => synthesize(s),
        Command::ScanLgg(a) => scan_lgg(a),
        Command::Examples(e) => examples(e),
    }
}

fn print_json<T: Serialize>(v: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn status(v: Verdict) -> Status {
    match v {
        Verdict::Pass => Status::Ok,
        Verdict::Fail => Status::Fail,
        Verdict::InconclusiveWindow => Status::Inconclusive,
    }
}

fn mode_name(cfg: &CheckConfig) -> &'static str {
    match cfg.mode {
        Mode::Exact => "exact",
        Mode::Float => "float",
    }
}

#[derive(Serialize)]
struct ReportOut<'a> {
    command: &'static str,
    system: &'a str,
    rule: &'static str,
    mode: &'static str,
    verdict: String,
    report: Option<&'a CheckReport>,
}

fn emit_report(out: ReportOut, json: bool) -> Result<Status> {
    let st = out.report.map_or(Status::Inconclusive, |r| status(r.verdict));
    if json {
        print_json(&out)?;
    } else {
        println!("system: {}\nrule: {} ({} arithmetic)", out.system, out.rule, out.mode);
        match out.report {
            Some(r) => print!("{r}"),
            None => println!("verdict: {}", out.verdict),
        }
    }
    Ok(st)
}

fn check(a: CheckArgs) -> Result<Status> {
    let l = load(&a.source)?;
    let cfg = config(&l, &a.window)?;
    let rule = a.rule.or(if l.pd.is_some() {
        Some(Rule::Pd)
    } else if l.nabla.is_some() {
        Some(Rule::Nabla)
    } else {
        None
    });
    let (rule_name, report) = match &l.variant {
        None => ("none", None),
        Some(v) => match (rule, &l.pd, &l.nabla) {
            (Some(Rule::Pd), Some(pd), _) => ("pd", Some(check_pd_rule(&l.system, v, pd, &cfg)?)),
            (Some(Rule::Nabla), _, Some(n)) => ("nabla", Some(check_nabla_rule(&l.system, v, n, &cfg)?)),
            (requested, _, _) => {
                let mut r = check_without_witness(&l.system, v, &cfg)?;
                if let Some(req) = requested {
                    let which = if req == Rule::Pd { "pd" } else { "nabla" };
                    r.warn(format!("{} declares no {which} witness", l.name));
                }
                ("none", Some(r))
            }
        },
    };
    let verdict = match &report {
        Some(r) => r.verdict.to_string(),
        None => "no-variant".to_string(),
    };
    let out = ReportOut { command: "check", system: &l.name, rule: rule_name, mode: mode_name(&cfg), verdict, report: report.as_ref() };
    emit_report(out, a.json)
}

fn refute(a: RefuteArgs) -> Result<Status> {
    let l = load(&a.source)?;
    let cfg = config(&l, &a.window)?;
    let v = l.variant.as_ref().ok_or_else(|| anyhow!("{} declares no variant", l.name))?;
    let bound = match (&a.bound, &l.bound) {
        (Some(b), _) => real(b, "--bound")?,
        (None, Some(b)) => b.clone(),
        (None, None) => bail!("no bound: pass --bound B or declare `bound : B`"),
    };
    let (mode, rule) = match a.mode {
        RefuteModeArg::Martingale => (RefuteMode::ExactMartingale, "martingale"),
        RefuteModeArg::Submartingale => (RefuteMode::SubMartingale, "submartingale"),
    };
    let w = RefutationWitness::new(v.clone().with_declared_sup(bound), mode)?;
    let report = refute_act(&l.system, &w, &cfg)?;
    let out = ReportOut {
        command: "refute",
        system: &l.name,
        rule,
        mode: mode_name(&cfg),
        verdict: report.verdict.to_string(),
        report: Some(&report),
    };
    emit_report(out, a.json)
}

fn parse_state(s: &str, arity: usize) -> Result<StateId> {
    let coords = s
        .split(',')
        .map(|c| c.trim().parse::<i64>().map_err(|_| anyhow!("bad coordinate {c:?} in --from")))
        .collect::<Result<Vec<_>>>()?;
    if coords.len() != arity {
        bail!("--from has {} coordinates, the system has {arity}", coords.len());
    }
    Ok(StateId::new(coords))
}

fn parse_adversary(s: &str) -> Result<Adversary> {
    Ok(match s {
        "uniform" => Adversary::UniformRandom,
        "first" => Adversary::FirstChoice,
        script => Adversary::Scripted(
            script
                .split(',')
                .map(|c| c.trim().parse::<usize>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| anyhow!("--adversary is uniform, first, or a list like 0,1,1"))?,
        ),
    })
}

#[derive(Serialize)]
struct SimOut<'a> {
    system: &'a str,
    from: &'a StateId,
    horizon: &'a Real,
    seed: u64,
    result: &'a SimResult,
    oracle: Option<Reachability>,
    oracle_error: Option<String>,
}

fn sim(a: SimulateArgs) -> Result<Status> {
    let l = load(&a.source)?;
    let v = l.variant.as_ref().ok_or_else(|| anyhow!("{} declares no variant", l.name))?;
    let horizon = match (&a.horizon, &l.config) {
        (Some(h), _) => real(h, "--horizon")?,
        (None, Some(c)) => c.horizon.clone(),
        (None, None) => bail!("--horizon is required for a file source"),
    };
    let from = match &a.from {
        Some(s) => parse_state(s, l.system.arity())?,
        None => l.system.initial_states()[0].clone(),
    };
    let mut cfg = SimConfig::new(a.trials, horizon.clone(), a.seed);
    cfg.max_steps = a.max_steps;
    cfg.adversary = parse_adversary(&a.adversary)?;
    cfg.record_trace = a.trace.is_some();
    let result = simulate(&l.system, v, &cfg, &from)?;
    if let (Some(path), Some(trace)) = (&a.trace, &result.trace) {
        let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
        for rec in trace {
            w.serialize(rec)?;
        }
        w.flush()?;
    }
    let (oracle, oracle_error) = if a.oracle {
        match exact_reachability(&l.system, v, &horizon, &from, a.budget) {
            Ok(z) => (Some(z), None),
            Err(e) => (None, Some(e.to_string())),
        }
    } else {
        (None, None)
    };
    let out = SimOut { system: &l.name, from: &from, horizon: &horizon, seed: a.seed, result: &result, oracle, oracle_error };
    if a.json {
        print_json(&out)?;
    } else {
        println!("system: {} from {} with H = {}", l.name, from, horizon);
        println!(
            "trials: {}  hit: {}  escaped: {}  still running: {}",
            result.trials, result.hits_target, result.escaped_high, result.still_running
        );
        match result.z_hat {
            Some(z) => println!("z_hat = {z:.6} ± {:.6}", result.half_width),
            None => println!("z_hat undefined: no trial finished"),
        }
        println!("steps: mean {:.2}, max {}", result.mean_steps, result.max_steps);
        if result.still_running_flag {
            println!("warning: more than 1% of trials hit the step cap");
        }
        if let Some(z) = &out.oracle {
            match &z.z {
                Some(x) => println!("oracle: z = {x} over {} states", z.states),
                None => println!("oracle: z in [{:.9}, {:.9}] over {} states", z.z_min, z.z_max, z.states),
            }
        }
        if let Some(e) = &out.oracle_error {
            println!("oracle: {e}");
        }
    }
    Ok(Status::Ok)
}

#[derive(Serialize)]
struct TableOut {
    values: Vec<Real>,
}

fn print_table(values: Vec<Real>, json: bool, label: &str) -> Result<()> {
    if json {
        return print_json(&TableOut { values });
    }
    for (i, v) in values.iter().enumerate() {
        println!("{label} {i:>4}  {v}");
    }
    Ok(())
}

fn one_sided_walk() -> Result<TransitionSystem> {
    Ok(TransitionSystem::new(
        "one-sided-walk",
        1,
        |s| s.head() == 0,
        |s| {
            let n = s.head();
            Ok(vec![Distribution::exact(vec![
                (StateId::scalar(n - 1), Real::ratio(1, 2)),
                (StateId::scalar(n + 1), Real::ratio(1, 2)),
            ])?])
        },
        vec![StateId::scalar(1)],
    )?)
}

#[derive(Serialize)]
struct FosterOut<'a> {
    t_max: usize,
    i_max: usize,
    values: &'a [f64],
    intervals: &'a [(f64, f64)],
    unresolved_mass: f64,
    warnings: &'a [String],
}

fn synthesize(cmd: SynthCommand) -> Result<Status> {
    match cmd {
        SynthCommand::Tree { children, depth, json } => {
            let spec = match children.as_str() {
                "pow2" => TreeSpec::powers_of_two(),
                c => TreeSpec::constant(c.parse().map_err(|_| anyhow!("--children is pow2 or a positive integer"))?),
            };
            let t = tree_variant(&spec, depth)?;
            print_table((0..=t.max_index()).map(|i| t.get(i).unwrap().clone()).collect(), json, "depth")?;
        }
        SynthCommand::BirthDeath { q, max, json } => {
            let q = real(&q, "--q")?;
            let t = birth_death_martingale(move |_| q.clone(), max)?;
            print_table((0..=t.max_index()).map(|i| t.get(i).unwrap().clone()).collect(), json, "n")?;
        }
        SynthCommand::PdFromNabla { source, hint } => {
            let l = load(&source)?;
            let n = l.nabla.as_ref().ok_or_else(|| anyhow!("{} declares no nabla witness", l.name))?;
            let pd = pd_witness_from_nabla(n, &real(&hint, "--hint")?)?;
            println!("pd : p = {}, d = {}", pd.p.to_piecewise(), pd.d.to_piecewise());
        }
        SynthCommand::Foster { t_max, i_max, json } => {
            let fv = foster_variant(&one_sided_walk()?, Arc::new(LineIndexing), &FosterConfig::new(t_max, i_max))?;
            if json {
                print_json(&FosterOut {
                    t_max,
                    i_max,
                    values: &fv.values,
                    intervals: &fv.intervals,
                    unresolved_mass: fv.unresolved_mass,
                    warnings: &fv.warnings,
                })?;
            } else {
                for (i, (v, (lo, hi))) in fv.values.iter().zip(&fv.intervals).enumerate() {
                    println!("s{i:<4} {v:.12}  [{lo:.12}, {hi:.12}]");
                }
                println!("unresolved mass at s1: {:e}", fv.unresolved_mass);
                for w in &fv.warnings {
                    println!("warning: {w}");
                }
            }
        }
    }
    Ok(Status::Ok)
}

#[derive(Serialize)]
struct ScanSummary<'a> {
    #[serde(flatten)]
    report: &'a ScanReport,
    holds: bool,
}

fn scan_lgg(a: ScanArgs) -> Result<Status> {
    let function: LggFunction = a.function.parse()?;
    let cfg = ScanConfig { max_n: a.max_n, exclusion_radius: a.radius, function, chunk: a.chunk, dims: a.dims };
    let t0 = Instant::now();
    let rep = lggscan::scan(&cfg)?;
    let elapsed = t0.elapsed();
    if let Some(path) = &a.csv {
        let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
        let mut header = vec!["kind"];
        header.extend(["x", "y", "z"].iter().take(rep.dims));
        header.push("slack");
        w.write_record(&header)?;
        for (kind, cells) in [("violation", &rep.violations), ("marginal", &rep.marginals)] {
            for c in cells {
                let mut row = vec![kind.to_string()];
                row.extend(c.coords.iter().map(i64::to_string));
                row.push(format!("{:e}", c.slack));
                w.write_record(&row)?;
            }
        }
        w.flush()?;
    }
    if a.json {
        print_json(&ScanSummary { report: &rep, holds: rep.holds() })?;
    } else {
        println!("{} on {}-D grid, |coords| ≤ {}: {} cells decided", rep.function, rep.dims, rep.max_n, rep.cells);
        println!(
            "violations: {}  marginal: {}  excluded: {}",
            rep.violations.len(),
            rep.marginals.len(),
            rep.excluded.len()
        );
        if let (Some(s), Some(at)) = (rep.min_slack, &rep.min_at) {
            println!("min slack {s:e} at {at:?}");
        }
        let mut worst: Vec<_> = rep.violations.iter().collect();
        worst.sort_by(|a, b| a.slack.total_cmp(&b.slack).then_with(|| a.coords.cmp(&b.coords)));
        for c in worst.into_iter().take(10) {
            println!("  violation at {:?}: slack {:e}", c.coords, c.slack);
        }
        println!(
            "mirror checks: {} ({} mismatched); {:.2}s",
            rep.mirror_checks,
            rep.mirror_mismatches,
            elapsed.as_secs_f64()
        );
    }
    if rep.mirror_mismatches > 0 {
        eprintln!("warning: {} mirrored cells disagreed", rep.mirror_mismatches);
    }
    Ok(if rep.holds() { Status::Ok } else { Status::Fail })
}

#[derive(Serialize)]
struct ExampleInfo {
    name: &'static str,
    summary: &'static str,
    expected: gallery::Expected,
    horizon: Real,
    mode: &'static str,
    tolerance: f64,
    dsl: bool,
}

/// Flags reproducing a bundle's window on the command line.
fn window_flags(cfg: &CheckConfig) -> String {
    match cfg.mode {
        Mode::Exact => format!("--horizon {} --exact", cfg.horizon),
        Mode::Float => format!("--horizon {} --tol {:e}", cfg.horizon, cfg.tolerance),
    }
}

fn examples(cmd: ExamplesCommand) -> Result<Status> {
    match cmd {
        ExamplesCommand::List { json } => {
            let mut infos = Vec::new();
            for name in gallery::NAMES {
                let b = gallery::build(name)?;
                infos.push(ExampleInfo {
                    name: b.name,
                    summary: b.summary,
                    expected: b.expected,
                    horizon: b.config.horizon.clone(),
                    mode: mode_name(&b.config),
                    tolerance: b.config.tolerance,
                    dsl: b.dsl.is_some(),
                });
            }
            if json {
                print_json(&infos)?;
            } else {
                for i in &infos {
                    let src = if i.dsl { "dsl" } else { "programmatic-only" };
                    println!("{:<24} {:<15} {:<18} {}", i.name, i.expected.label(), src, i.summary);
                }
            }
            Ok(Status::Ok)
        }
        ExamplesCommand::Emit { name } => {
            let b = gallery::build(&name)?;
            match &b.dsl {
                Some(src) => {
                    println!("# expected: {}; window: {}", b.expected.label(), window_flags(&b.config));
                    print!("{src}");
                    Ok(Status::Ok)
                }
                None => {
                    println!("# {name}: programmatic-only; use --example {name}");
                    Ok(Status::Inconclusive)
                }
            }
        }
    }
}
