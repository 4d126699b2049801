//! Refuting almost-certain termination with a bounded (sub-)martingale.

use rayon::prelude::*;

use crate::checker::{ensure_exact, wellformed_on, window_for, CheckConfig, CheckError, Mode};
use crate::model::{CheckReport, Counterexample, ModelError, Real, TransitionSystem, Variant, Window, MAX_COUNTEREXAMPLES};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RefuteMode {
    ExactMartingale,
    SubMartingale,
}

#[derive(Clone, Debug)]
pub struct RefutationWitness {
    variant: Variant,
    bound: Real,
    pub mode: RefuteMode,
}

impl RefutationWitness {
    /// The variant must carry its claimed bound `B` (`declared_sup`).
    pub fn new(variant: Variant, mode: RefuteMode) -> Result<Self, ModelError> {
        let bound = variant
            .declared_sup()
            .cloned()
            .ok_or_else(|| ModelError::BadWitness("refutation variant has no declared bound".into()))?;
        if !bound.is_finite() || !bound.is_positive() {
            return Err(ModelError::BadWitness(format!("declared bound {bound} must be finite and positive")));
        }
        Ok(RefutationWitness { variant, bound, mode })
    }

    pub fn variant(&self) -> &Variant {
        &self.variant
    }

    pub fn bound(&self) -> &Real {
        &self.bound
    }

    /// `c·V` with bound `c·B`.
    pub fn scaled(&self, c: Real) -> Self {
        let variant = self.variant.scaled(c);
        let bound = variant.declared_sup().cloned().unwrap();
        RefutationWitness { variant, bound, mode: self.mode }
    }
}

fn bounded_on(w: &Window, bound: &Real, cfg: &CheckConfig) -> (Vec<Counterexample>, usize) {
    let bad: Vec<usize> = (0..w.len())
        .into_par_iter()
        .filter(|&i| match cfg.mode {
            Mode::Exact => w.values[i] > *bound,
            Mode::Float => w.values[i].to_f64() > bound.to_f64() + cfg.tolerance,
        })
        .collect();
    let cex = bad
        .iter()
        .take(MAX_COUNTEREXAMPLES)
        .map(|&i| Counterexample {
            condition: "bounded".into(),
            state: w.states[i].clone(),
            distribution: None,
            lhs: w.values[i].clone(),
            rhs: bound.clone(),
        })
        .collect();
    (cex, bad.len())
}

/// `Exp_δ V ≥ V(s)` (or `=` in exact-martingale mode) for every interior
/// state and every choice.
fn submartingale_on(w: &Window, mode: RefuteMode, cfg: &CheckConfig) -> (Vec<Counterexample>, usize, Option<Real>) {
    let name = match mode {
        RefuteMode::ExactMartingale => "martingale",
        RefuteMode::SubMartingale => "submartingale",
    };
    let per_state: Vec<(Vec<Counterexample>, Option<Real>)> = w
        .interior
        .par_iter()
        .map(|&i| {
            let v = &w.values[i];
            let mut cex = Vec::new();
            let mut worst: Option<Real> = None;
            for (j, d) in w.transitions[i].as_ref().unwrap().iter().enumerate() {
                let e: Real = d.iter().map(|(t, p)| p * &w.values[w.index[t]]).sum();
                let (ok, slack) = match cfg.mode {
                    Mode::Exact => {
                        let s = &e - v;
                        let ok = match mode {
                            RefuteMode::ExactMartingale => s.is_zero(),
                            RefuteMode::SubMartingale => !s.is_negative(),
                        };
                        (ok, s)
                    }
                    Mode::Float => {
                        let s = e.to_f64() - v.to_f64();
                        let ok = match mode {
                            RefuteMode::ExactMartingale => s.abs() <= cfg.tolerance,
                            RefuteMode::SubMartingale => s >= -cfg.tolerance,
                        };
                        (ok, Real::float(s))
                    }
                };
                // for exact martingales the relevant slack is −|E − V|
                let slack = if mode == RefuteMode::ExactMartingale { -slack.abs() } else { slack };
                if !ok {
                    cex.push(Counterexample {
                        condition: name.into(),
                        state: w.states[i].clone(),
                        distribution: Some(j),
                        lhs: e,
                        rhs: v.clone(),
                    });
                }
                worst = Some(match worst {
                    Some(x) => x.min(slack),
                    None => slack,
                });
            }
            (cex, worst)
        })
        .collect();
    let mut cex = Vec::new();
    let mut n = 0;
    let mut worst: Option<Real> = None;
    for (c, s) in per_state {
        n += c.len();
        if cex.len() < MAX_COUNTEREXAMPLES {
            cex.extend(c);
        }
        if let Some(s) = s {
            worst = Some(match worst {
                Some(x) => x.min(s),
                None => s,
            });
        }
    }
    (cex, n, worst)
}

/// Checks on the window that `V ≤ B` everywhere visited, that `V` is 0
/// exactly on targets, and the (sub-)martingale inequality for every
/// choice. A pass means ACT is refuted relative to the window.
pub fn refute_act(sys: &TransitionSystem, w: &RefutationWitness, cfg: &CheckConfig) -> Result<CheckReport, CheckError> {
    let win = window_for(sys, &w.variant, cfg)?;
    ensure_exact(&win, &[], cfg)?;
    if cfg.mode == Mode::Exact && !w.bound.is_exact() {
        return Err(CheckError::Inexact(format!("bound {}", w.bound)));
    }
    let mut r = wellformed_on(&win, cfg)?;
    let (cex, n) = bounded_on(&win, &w.bound, cfg);
    r.add_condition("bounded", cex, n, None);
    let (cex, n, worst) = submartingale_on(&win, w.mode, cfg);
    let name = if w.mode == RefuteMode::ExactMartingale { "martingale" } else { "submartingale" };
    r.add_condition(name, cex, n, worst);
    if r.window.truncated && r.conditions.iter().all(|c| c.pass) {
        r.warn(format!(
            "window did not close below H = {}; a horizon below the bound {} gives a closed window",
            cfg.horizon, w.bound
        ));
    }
    Ok(r)
}
