use std::fmt;

use serde::Serialize;

use super::{Real, StateId};

/// Counterexamples kept per condition; the total is still counted.
pub const MAX_COUNTEREXAMPLES: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    InconclusiveWindow,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::InconclusiveWindow => "inconclusive-window",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionResult {
    pub name: String,
    pub pass: bool,
    /// `min (rhs − lhs)` over the checked states; absent for purely
    /// structural conditions.
    pub worst_slack: Option<Real>,
    pub violations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Counterexample {
    pub condition: String,
    pub state: StateId,
    /// Index into `T(s)`; absent for state-level conditions.
    pub distribution: Option<usize>,
    pub lhs: Real,
    pub rhs: Real,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WindowSummary {
    pub horizon: Real,
    pub states_visited: usize,
    pub interior_states: usize,
    pub truncated: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Bounds {
    pub start_variant: Real,
    /// `p(H)^⌈H/d(H)⌉`.
    pub escape_lower_bound: Real,
    pub escape_lower_bound_log10: f64,
    /// `1 − V(s)/H` for the largest initial variant.
    pub termination_lower_bound: Real,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub verdict: Verdict,
    pub conditions: Vec<ConditionResult>,
    pub counterexamples: Vec<Counterexample>,
    pub window: WindowSummary,
    pub bounds: Option<Bounds>,
    pub warnings: Vec<String>,
}

impl CheckReport {
    pub fn new(window: WindowSummary) -> Self {
        CheckReport {
            verdict: Verdict::InconclusiveWindow,
            conditions: Vec::new(),
            counterexamples: Vec::new(),
            window,
            bounds: None,
            warnings: Vec::new(),
        }
    }

    /// Records one condition. `violations` may exceed the number of
    /// counterexamples passed in when the list was capped.
    pub fn add_condition(
        &mut self,
        name: &str,
        mut counterexamples: Vec<Counterexample>,
        violations: usize,
        worst_slack: Option<Real>,
    ) {
        counterexamples.truncate(MAX_COUNTEREXAMPLES);
        self.conditions.push(ConditionResult { name: name.to_string(), pass: violations == 0, worst_slack, violations });
        self.counterexamples.extend(counterexamples);
        self.refresh_verdict();
    }

    pub fn warn(&mut self, msg: impl Into<String>) {
        self.warnings.push(msg.into());
    }

    /// Folds another report over the same window into this one.
    pub fn merge(&mut self, other: CheckReport) {
        self.conditions.extend(other.conditions);
        self.counterexamples.extend(other.counterexamples);
        self.warnings.extend(other.warnings);
        self.window.truncated |= other.window.truncated;
        self.window.states_visited = self.window.states_visited.max(other.window.states_visited);
        self.window.interior_states = self.window.interior_states.max(other.window.interior_states);
        self.refresh_verdict();
    }

    pub fn condition(&self, name: &str) -> Option<&ConditionResult> {
        self.conditions.iter().find(|c| c.name == name)
    }

    pub fn set_bounds(&mut self, bounds: Bounds) {
        if self.verdict == Verdict::Pass {
            self.bounds = Some(bounds);
        }
    }

    fn refresh_verdict(&mut self) {
        self.verdict = if self.conditions.iter().any(|c| !c.pass) {
            Verdict::Fail
        } else if self.window.truncated || self.window.interior_states == 0 || self.conditions.is_empty() {
            Verdict::InconclusiveWindow
        } else {
            Verdict::Pass
        };
        if self.verdict != Verdict::Pass {
            self.bounds = None;
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "verdict: {}", self.verdict)?;
        writeln!(
            f,
            "window: H = {}, {} states visited ({} interior){}",
            self.window.horizon,
            self.window.states_visited,
            self.window.interior_states,
            if self.window.truncated { ", truncated by node budget" } else { "" }
        )?;
        for c in &self.conditions {
            write!(f, "  {:<28} {}", c.name, if c.pass { "ok" } else { "FAILED" })?;
            if let Some(s) = &c.worst_slack {
                write!(f, "  worst slack {s}")?;
            }
            if c.violations > 0 {
                write!(f, "  ({} violations)", c.violations)?;
            }
            writeln!(f)?;
        }
        for cx in self.counterexamples.iter().take(10) {
            match cx.distribution {
                Some(i) => writeln!(f, "  at {} choice {}: {} has {} vs {}", cx.state, i, cx.condition, cx.lhs, cx.rhs)?,
                None => writeln!(f, "  at {}: {} has {} vs {}", cx.state, cx.condition, cx.lhs, cx.rhs)?,
            }
        }
        if self.counterexamples.len() > 10 {
            writeln!(f, "  … {} more counterexamples", self.counterexamples.len() - 10)?;
        }
        if let Some(b) = &self.bounds {
            writeln!(
                f,
                "bounds: escape from S_H at least {} (log10 {:.3}); from V = {} termination probability at least {}",
                short(&b.escape_lower_bound),
                b.escape_lower_bound_log10,
                b.start_variant,
                b.termination_lower_bound
            )?;
        }
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        Ok(())
    }
}

fn short(x: &Real) -> String {
    let s = x.to_string();
    if s.len() > 40 {
        format!("{:e}", x.to_f64())
    } else {
        s
    }
}
