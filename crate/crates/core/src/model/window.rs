use std::collections::{HashMap, VecDeque};

use super::{Distribution, ModelError, Real, StateId, TransitionSystem, Variant, WindowSummary};

/// The explored part of the state space: interior states (non-target,
/// `V ≤ H`, expanded) and frontier states (targets, `V > H`, or left
/// unexpanded when the budget ran out). States are stored in BFS order.
#[derive(Clone, Debug)]
pub struct Window {
    pub horizon: Real,
    pub states: Vec<StateId>,
    pub values: Vec<Real>,
    pub is_target: Vec<bool>,
    /// `Some(T(s))` exactly for interior states.
    pub transitions: Vec<Option<Vec<Distribution>>>,
    pub index: HashMap<StateId, usize>,
    pub interior: Vec<usize>,
    pub truncated: bool,
}

impl Window {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn value_of(&self, s: &StateId) -> Option<&Real> {
        self.index.get(s).map(|&i| &self.values[i])
    }

    pub fn is_interior(&self, i: usize) -> bool {
        self.transitions[i].is_some()
    }

    pub fn frontier(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.states.len()).filter(|&i| !self.is_interior(i))
    }

    pub fn summary(&self) -> WindowSummary {
        WindowSummary {
            horizon: self.horizon.clone(),
            states_visited: self.states.len(),
            interior_states: self.interior.len(),
            truncated: self.truncated,
        }
    }
}

/// Breadth-first closure of the initial states through `S_H`, with every
/// successor of an expanded state recorded. At most `node_budget` states
/// are expanded; if more remained, the window is marked truncated.
pub fn enumerate_window(
    sys: &TransitionSystem,
    v: &Variant,
    horizon: &Real,
    node_budget: usize,
) -> Result<Window, ModelError> {
    enumerate(sys, v, horizon, node_budget, false)
}

/// As `enumerate_window`, but only states with `V < H` are interior:
/// reaching the horizon itself counts as leaving.
pub fn enumerate_window_below(
    sys: &TransitionSystem,
    v: &Variant,
    horizon: &Real,
    node_budget: usize,
) -> Result<Window, ModelError> {
    enumerate(sys, v, horizon, node_budget, true)
}

fn enumerate(
    sys: &TransitionSystem,
    v: &Variant,
    horizon: &Real,
    node_budget: usize,
    strict: bool,
) -> Result<Window, ModelError> {
    if !horizon.is_positive() || !horizon.is_finite() {
        return Err(ModelError::BadHorizon(horizon.to_string()));
    }
    if node_budget == 0 {
        return Err(ModelError::ZeroBudget);
    }
    if v.arity() != sys.arity() {
        return Err(ModelError::ArityMismatch { expected: sys.arity(), found: v.arity() });
    }
    let mut w = Window {
        horizon: horizon.clone(),
        states: Vec::new(),
        values: Vec::new(),
        is_target: Vec::new(),
        transitions: Vec::new(),
        index: HashMap::new(),
        interior: Vec::new(),
        truncated: false,
    };
    let mut queue = VecDeque::new();
    let visit = |w: &mut Window, queue: &mut VecDeque<usize>, s: &StateId| -> Result<(), ModelError> {
        if w.index.contains_key(s) {
            return Ok(());
        }
        let val = v.eval(s)?;
        let target = sys.is_target(s);
        let i = w.states.len();
        if !target && (val < *horizon || (!strict && val == *horizon)) {
            queue.push_back(i);
        }
        w.index.insert(s.clone(), i);
        w.states.push(s.clone());
        w.values.push(val);
        w.is_target.push(target);
        w.transitions.push(None);
        Ok(())
    };
    for s in sys.initial_states() {
        visit(&mut w, &mut queue, s)?;
    }
    while let Some(i) = queue.pop_front() {
        if w.interior.len() >= node_budget {
            w.truncated = true;
            break;
        }
        let s = w.states[i].clone();
        let ds = sys.transitions(&s)?;
        for d in &ds {
            for (t, _) in d.iter() {
                visit(&mut w, &mut queue, t)?;
            }
        }
        w.transitions[i] = Some(ds);
        w.interior.push(i);
    }
    Ok(w)
}
