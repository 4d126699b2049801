//! The p,d rule and the ∇ rule, checked over an enumerated window `S_H`.

mod diagnostic;

use rayon::prelude::*;

use crate::model::{
    enumerate_window, Bounds, CheckReport, Counterexample, Verdict, ModelError, MonotoneStepFn, NablaWitness, PdWitness, Real,
    TransitionSystem, Variant, Window, MAX_COUNTEREXAMPLES,
};

pub use diagnostic::{bounded_variant_diagnostic, bounded_variant_diagnostic_on, BoundedVariantDiagnostic};

pub const DEFAULT_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_NODE_BUDGET: usize = 1_000_000;

/// Exponents above this are evaluated in floating point by `escape_bound`.
const EXACT_POW_LIMIT: i64 = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Float,
}

#[derive(Clone, Debug)]
pub struct CheckConfig {
    pub horizon: Real,
    pub node_budget: usize,
    pub tolerance: f64,
    pub mode: Mode,
}

impl CheckConfig {
    pub fn exact(horizon: Real, node_budget: usize) -> Self {
        CheckConfig { horizon, node_budget, tolerance: 0.0, mode: Mode::Exact }
    }

    pub fn float(horizon: Real, node_budget: usize, tolerance: f64) -> Self {
        CheckConfig { horizon, node_budget, tolerance, mode: Mode::Float }
    }

    pub fn validate(&self) -> Result<(), CheckError> {
        if self.mode == Mode::Exact && self.tolerance != 0.0 {
            return Err(CheckError::ToleranceInExactMode(self.tolerance));
        }
        if !(self.tolerance >= 0.0) {
            return Err(CheckError::BadTolerance(self.tolerance));
        }
        Ok(())
    }

    fn leq(&self, lhs: &Real, rhs: &Real) -> bool {
        match self.mode {
            Mode::Exact => lhs <= rhs,
            Mode::Float => lhs.to_f64() <= rhs.to_f64() + self.tolerance,
        }
    }

    fn diff(&self, a: &Real, b: &Real) -> Real {
        match self.mode {
            Mode::Exact => a - b,
            Mode::Float => Real::float(a.to_f64() - b.to_f64()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CheckError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("exact mode needs exact values, but {0} is a float")]
    Inexact(String),
    #[error("tolerance must be 0 in exact mode, got {0}")]
    ToleranceInExactMode(f64),
    #[error("tolerance must be non-negative, got {0}")]
    BadTolerance(f64),
    #[error("start variant {v} lies outside the window (H = {horizon})")]
    StartOutsideWindow { v: String, horizon: String },
}

/// Refuses float data in exact mode.
pub(crate) fn ensure_exact(w: &Window, fns: &[&MonotoneStepFn], cfg: &CheckConfig) -> Result<(), CheckError> {
    if cfg.mode != Mode::Exact {
        return Ok(());
    }
    if !cfg.horizon.is_exact() {
        return Err(CheckError::Inexact(format!("horizon {}", cfg.horizon)));
    }
    if let Some(i) = (0..w.len()).find(|&i| !w.values[i].is_exact()) {
        return Err(CheckError::Inexact(format!("V({}) = {}", w.states[i], w.values[i])));
    }
    for &i in &w.interior {
        for d in w.transitions[i].as_ref().unwrap() {
            if !d.is_exact() {
                return Err(CheckError::Inexact(format!("a transition probability at {}", w.states[i])));
            }
        }
    }
    for f in fns {
        if let Some(y) = f.breakpoints().iter().chain(f.values()).find(|y| !y.is_exact()) {
            return Err(CheckError::Inexact(format!("witness value {y}")));
        }
    }
    Ok(())
}

pub fn window_for(sys: &TransitionSystem, v: &Variant, cfg: &CheckConfig) -> Result<Window, CheckError> {
    cfg.validate()?;
    Ok(enumerate_window(sys, v, &cfg.horizon, cfg.node_budget)?)
}

/// Outcome of one state (or one state/choice pair) for one condition.
struct Local {
    slack: Option<Real>,
    cex: Vec<Counterexample>,
}

fn fold(name: &str, locals: Vec<Local>) -> (Vec<Counterexample>, usize, Option<Real>) {
    let mut cex = Vec::new();
    let mut violations = 0;
    let mut worst: Option<Real> = None;
    for l in locals {
        violations += l.cex.len();
        if cex.len() < MAX_COUNTEREXAMPLES {
            cex.extend(l.cex);
        }
        if let Some(s) = l.slack {
            worst = Some(match worst {
                Some(w) => w.min(s),
                None => s,
            });
        }
    }
    debug_assert!(cex.iter().all(|c| c.condition == name));
    (cex, violations, worst)
}

/// Per-choice comparison `lhs ≤ rhs` over every interior state.
fn per_choice(
    w: &Window,
    cfg: &CheckConfig,
    name: &str,
    eval: impl Fn(usize, usize) -> (Real, Real) + Sync,
) -> (Vec<Counterexample>, usize, Option<Real>) {
    let locals: Vec<Local> = w
        .interior
        .par_iter()
        .map(|&i| {
            let ds = w.transitions[i].as_ref().unwrap();
            let mut slack: Option<Real> = None;
            let mut cex = Vec::new();
            for j in 0..ds.len() {
                let (lhs, rhs) = eval(i, j);
                let s = cfg.diff(&rhs, &lhs);
                if !cfg.leq(&lhs, &rhs) {
                    cex.push(Counterexample {
                        condition: name.to_string(),
                        state: w.states[i].clone(),
                        distribution: Some(j),
                        lhs,
                        rhs,
                    });
                }
                slack = Some(match slack {
                    Some(x) => x.min(s),
                    None => s,
                });
            }
            Local { slack, cex }
        })
        .collect();
    fold(name, locals)
}

/// `Exp_δ V` using the window's cached values.
fn window_expectation(w: &Window, i: usize, j: usize) -> Real {
    let d = &w.transitions[i].as_ref().unwrap()[j];
    d.iter().map(|(t, p)| p * &w.values[w.index[t]]).sum()
}

pub fn wellformed_on(w: &Window, cfg: &CheckConfig) -> Result<CheckReport, CheckError> {
    ensure_exact(w, &[], cfg)?;
    let name = "wellformed";
    let locals: Vec<Local> = (0..w.len())
        .into_par_iter()
        .map(|i| {
            let v = &w.values[i];
            let bad = if w.is_target[i] { !v.is_zero() } else { !v.is_positive() };
            let cex = if bad {
                vec![Counterexample {
                    condition: name.to_string(),
                    state: w.states[i].clone(),
                    distribution: None,
                    lhs: v.clone(),
                    rhs: Real::zero(),
                }]
            } else {
                Vec::new()
            };
            Local { slack: None, cex }
        })
        .collect();
    let (cex, n, _) = fold(name, locals);
    let mut r = CheckReport::new(w.summary());
    r.add_condition(name, cex, n, None);
    Ok(r)
}

/// `V(s) = 0` exactly on targets and `V(s) > 0` elsewhere, over the window.
pub fn check_variant_wellformed(sys: &TransitionSystem, v: &Variant, cfg: &CheckConfig) -> Result<CheckReport, CheckError> {
    wellformed_on(&window_for(sys, v, cfg)?, cfg)
}

pub fn supermartingale_on(w: &Window, cfg: &CheckConfig) -> Result<CheckReport, CheckError> {
    ensure_exact(w, &[], cfg)?;
    let name = "supermartingale";
    let (cex, n, worst) = per_choice(w, cfg, name, |i, j| (window_expectation(w, i, j), w.values[i].clone()));
    let mut r = CheckReport::new(w.summary());
    r.add_condition(name, cex, n, worst);
    Ok(r)
}

/// `Exp_δ V ≤ V(s)` for every interior state and every `δ ∈ T(s)`.
pub fn check_supermartingale(sys: &TransitionSystem, v: &Variant, cfg: &CheckConfig) -> Result<CheckReport, CheckError> {
    supermartingale_on(&window_for(sys, v, cfg)?, cfg)
}

pub fn progress_on(w: &Window, pd: &PdWitness, cfg: &CheckConfig) -> Result<CheckReport, CheckError> {
    pd.validate()?;
    ensure_exact(w, &[&pd.p, &pd.d], cfg)?;
    let name = "progress";
    let (cex, n, worst) = per_choice(w, cfg, name, |i, j| {
        let v = &w.values[i];
        let threshold = v - pd.d.eval(v);
        let d = &w.transitions[i].as_ref().unwrap()[j];
        let mass: Real = d
            .iter()
            .filter(|(t, _)| cfg.leq(&w.values[w.index[*t]], &threshold))
            .map(|(_, p)| p.clone())
            .sum();
        // mass ≥ p(v), phrased as lhs ≤ rhs
        (pd.p.eval(v).clone(), mass)
    });
    let mut r = CheckReport::new(w.summary());
    r.add_condition("witness-valid", Vec::new(), 0, None);
    r.add_condition(name, cex, n, worst);
    Ok(r)
}

/// `δ{s' | V(s') ≤ v − d(v)} ≥ p(v)` at `v = V(s)`, for every interior
/// state and every choice. Also re-validates `p` and `d` on all of `(0, ∞)`.
pub fn check_progress(
    sys: &TransitionSystem,
    v: &Variant,
    pd: &PdWitness,
    cfg: &CheckConfig,
) -> Result<CheckReport, CheckError> {
    progress_on(&window_for(sys, v, cfg)?, pd, cfg)
}

pub fn nabla_on(w: &Window, nabla: &NablaWitness, cfg: &CheckConfig) -> Result<CheckReport, CheckError> {
    nabla.nabla.validate()?;
    ensure_exact(w, &[&nabla.nabla], cfg)?;
    let name = "nabla";
    let (cex, n, worst) = per_choice(w, cfg, name, |i, j| {
        let v = &w.values[i];
        (window_expectation(w, i, j), v - nabla.nabla.eval(v))
    });
    let mut r = CheckReport::new(w.summary());
    r.add_condition("witness-valid", Vec::new(), 0, None);
    r.add_condition(name, cex, n, worst);
    Ok(r)
}

/// `Exp_δ V ≤ V(s) − ∇(V(s))` for every interior state and every choice.
pub fn check_nabla(
    sys: &TransitionSystem,
    v: &Variant,
    nabla: &NablaWitness,
    cfg: &CheckConfig,
) -> Result<CheckReport, CheckError> {
    nabla_on(&window_for(sys, v, cfg)?, nabla, cfg)
}

/// `⌈H / d(H)⌉`, the number of `d`-steps needed to cross `(0, H]`.
fn escape_steps(h: &Real, pd: &PdWitness) -> Option<i64> {
    (h / pd.d.eval(h)).ceil_i64()
}

/// `p(H)^⌈H/d(H)⌉`, the uniform lower bound on escaping `S_H`.
pub fn escape_bound(h: &Real, pd: &PdWitness) -> Real {
    let p = pd.p.eval(h);
    match escape_steps(h, pd) {
        Some(k) if k <= EXACT_POW_LIMIT && p.is_exact() => p.powi(k as i32),
        Some(k) if k <= i32::MAX as i64 => p.to_float().powi(k as i32),
        _ => Real::float((escape_bound_log10(h, pd) * std::f64::consts::LN_10).exp()),
    }
}

/// `log₁₀` of `escape_bound`, finite even when the bound underflows.
pub fn escape_bound_log10(h: &Real, pd: &PdWitness) -> f64 {
    let p = pd.p.eval(h).to_f64();
    let k = (h.to_f64() / pd.d.eval(h).to_f64()).ceil();
    k * p.log10()
}

/// `1 − v/H`.
pub fn termination_lower_bound(v_start: &Real, h: &Real) -> Result<Real, CheckError> {
    if v_start > h {
        return Err(CheckError::StartOutsideWindow { v: v_start.to_string(), horizon: h.to_string() });
    }
    if !h.is_positive() {
        return Err(ModelError::BadHorizon(h.to_string()).into());
    }
    Ok(Real::one() - v_start / h)
}

fn start_variant(w: &Window, sys: &TransitionSystem) -> Real {
    sys.initial_states()
        .iter()
        .filter_map(|s| w.value_of(s).cloned())
        .fold(Real::zero(), Real::max)
}

fn attach_bounds(r: &mut CheckReport, w: &Window, sys: &TransitionSystem, pd: &PdWitness, cfg: &CheckConfig) {
    let start = start_variant(w, sys);
    match termination_lower_bound(&start, &cfg.horizon) {
        Ok(z) => r.set_bounds(Bounds {
            start_variant: start,
            escape_lower_bound: escape_bound(&cfg.horizon, pd),
            escape_lower_bound_log10: escape_bound_log10(&cfg.horizon, pd),
            termination_lower_bound: z,
        }),
        Err(e) => r.warn(format!("no termination bound: {e}")),
    }
}

/// Full p,d rule: well-formedness, SMart and Progress, plus the bounds
/// on a pass and the bounded-variant diagnostic as a warning.
pub fn check_pd_rule(
    sys: &TransitionSystem,
    v: &Variant,
    pd: &PdWitness,
    cfg: &CheckConfig,
) -> Result<CheckReport, CheckError> {
    let w = window_for(sys, v, cfg)?;
    let mut r = wellformed_on(&w, cfg)?;
    r.merge(supermartingale_on(&w, cfg)?);
    r.merge(progress_on(&w, pd, cfg)?);
    if let Some(msg) = bounded_variant_diagnostic_on(&w).warning {
        r.warn(msg);
    }
    attach_bounds(&mut r, &w, sys, pd, cfg);
    Ok(r)
}

/// Full ∇ rule: well-formedness and strict expected decrease. Bounds come
/// from the p,d witness the ∇ witness induces up to `H`.
pub fn check_nabla_rule(
    sys: &TransitionSystem,
    v: &Variant,
    nabla: &NablaWitness,
    cfg: &CheckConfig,
) -> Result<CheckReport, CheckError> {
    let w = window_for(sys, v, cfg)?;
    let mut r = wellformed_on(&w, cfg)?;
    r.merge(nabla_on(&w, nabla, cfg)?);
    if let Some(msg) = bounded_variant_diagnostic_on(&w).warning {
        r.warn(msg);
    }
    let hint = w.interior.iter().map(|&i| w.values[i].clone()).fold(cfg.horizon.clone(), Real::max);
    if let Ok(pd) = crate::synth::pd_witness_from_nabla(nabla, &hint) {
        attach_bounds(&mut r, &w, sys, &pd, cfg);
    }
    Ok(r)
}

/// Well-formedness and SMart without a Progress witness. A clean run is
/// reported as inconclusive, since nothing establishes termination.
pub fn check_without_witness(sys: &TransitionSystem, v: &Variant, cfg: &CheckConfig) -> Result<CheckReport, CheckError> {
    let w = window_for(sys, v, cfg)?;
    let mut r = wellformed_on(&w, cfg)?;
    r.merge(supermartingale_on(&w, cfg)?);
    if let Some(msg) = bounded_variant_diagnostic_on(&w).warning {
        r.warn(msg);
    }
    r.warn("no witness supplied; Progress was not checked");
    if r.verdict == Verdict::Pass {
        r.verdict = Verdict::InconclusiveWindow;
    }
    Ok(r)
}

#[cfg(test)]
mod tests;
