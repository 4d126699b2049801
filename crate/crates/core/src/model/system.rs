use std::fmt;
use std::sync::Arc;

use super::{Distribution, ModelError, Real, StateId};

type TargetFn = dyn Fn(&StateId) -> bool + Send + Sync;
type TransitionFn = dyn Fn(&StateId) -> Result<Vec<Distribution>, ModelError> + Send + Sync;
type VariantFn = dyn Fn(&StateId) -> Result<Real, ModelError> + Send + Sync;

/// A probabilistic/demonic transition system with target set `S₀`.
///
/// `transitions(s)` returns the demonic choice set `T(s)` for non-target
/// states; each entry is one distribution the adversary may pick.
#[derive(Clone)]
pub struct TransitionSystem {
    label: String,
    arity: usize,
    is_target: Arc<TargetFn>,
    transitions: Arc<TransitionFn>,
    initial_states: Vec<StateId>,
}

impl TransitionSystem {
    pub fn new(
        label: impl Into<String>,
        arity: usize,
        is_target: impl Fn(&StateId) -> bool + Send + Sync + 'static,
        transitions: impl Fn(&StateId) -> Result<Vec<Distribution>, ModelError> + Send + Sync + 'static,
        initial_states: Vec<StateId>,
    ) -> Result<Self, ModelError> {
        if arity == 0 {
            return Err(ModelError::ZeroArity);
        }
        if initial_states.is_empty() {
            return Err(ModelError::NoInitialStates);
        }
        if let Some(s) = initial_states.iter().find(|s| s.arity() != arity) {
            return Err(ModelError::ArityMismatch { expected: arity, found: s.arity() });
        }
        Ok(TransitionSystem {
            label: label.into(),
            arity,
            is_target: Arc::new(is_target),
            transitions: Arc::new(transitions),
            initial_states,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn initial_states(&self) -> &[StateId] {
        &self.initial_states
    }

    pub fn with_initial_states(&self, initial_states: Vec<StateId>) -> Result<Self, ModelError> {
        if initial_states.is_empty() {
            return Err(ModelError::NoInitialStates);
        }
        if let Some(s) = initial_states.iter().find(|s| s.arity() != self.arity) {
            return Err(ModelError::ArityMismatch { expected: self.arity, found: s.arity() });
        }
        Ok(TransitionSystem { initial_states, ..self.clone() })
    }

    pub fn is_target(&self, s: &StateId) -> bool {
        (self.is_target)(s)
    }

    /// `T(s)`. Refuses target states, arity mismatches and empty choice
    /// sets, and checks every returned distribution's arity.
    pub fn transitions(&self, s: &StateId) -> Result<Vec<Distribution>, ModelError> {
        if s.arity() != self.arity {
            return Err(ModelError::ArityMismatch { expected: self.arity, found: s.arity() });
        }
        if self.is_target(s) {
            return Err(ModelError::TargetQueried(s.clone()));
        }
        let ds = (self.transitions)(s)?;
        if ds.is_empty() {
            return Err(ModelError::NoTransitions(s.clone()));
        }
        for d in &ds {
            if d.arity() != self.arity {
                return Err(ModelError::ArityMismatch { expected: self.arity, found: d.arity() });
            }
        }
        Ok(ds)
    }

    /// Same system with one more demonic option available wherever
    /// `extra` returns one.
    pub fn with_extra_choice(
        &self,
        extra: impl Fn(&StateId) -> Option<Distribution> + Send + Sync + 'static,
    ) -> TransitionSystem {
        let base = self.transitions.clone();
        TransitionSystem {
            label: format!("{}+demonic", self.label),
            transitions: Arc::new(move |s| {
                let mut ds = base(s)?;
                if let Some(d) = extra(s) {
                    ds.push(d);
                }
                Ok(ds)
            }),
            ..self.clone()
        }
    }
}

impl fmt::Debug for TransitionSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TransitionSystem")
            .field("label", &self.label)
            .field("arity", &self.arity)
            .field("initial_states", &self.initial_states)
            .finish_non_exhaustive()
    }
}

/// A variant function `V` on states, optionally with a claimed upper bound.
#[derive(Clone)]
pub struct Variant {
    label: String,
    arity: usize,
    eval: Arc<VariantFn>,
    declared_sup: Option<Real>,
}

impl Variant {
    pub fn new(
        label: impl Into<String>,
        arity: usize,
        eval: impl Fn(&StateId) -> Real + Send + Sync + 'static,
    ) -> Self {
        Self::fallible(label, arity, move |s| Ok(eval(s)))
    }

    pub fn fallible(
        label: impl Into<String>,
        arity: usize,
        eval: impl Fn(&StateId) -> Result<Real, ModelError> + Send + Sync + 'static,
    ) -> Self {
        Variant { label: label.into(), arity, eval: Arc::new(eval), declared_sup: None }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn declared_sup(&self) -> Option<&Real> {
        self.declared_sup.as_ref()
    }

    pub fn with_declared_sup(mut self, sup: Real) -> Self {
        self.declared_sup = Some(sup);
        self
    }

    /// `V(s)`; rejects arity mismatches and non-finite values.
    pub fn eval(&self, s: &StateId) -> Result<Real, ModelError> {
        if s.arity() != self.arity {
            return Err(ModelError::ArityMismatch { expected: self.arity, found: s.arity() });
        }
        let v = (self.eval)(s)?;
        if !v.is_finite() {
            return Err(ModelError::NonFiniteVariant(s.clone()));
        }
        Ok(v)
    }

    /// `c·V`, with the declared bound scaled alongside.
    pub fn scaled(&self, c: Real) -> Variant {
        let inner = self.eval.clone();
        let k = c.clone();
        Variant {
            label: format!("{}*{}", c, self.label),
            arity: self.arity,
            eval: Arc::new(move |s| Ok(&k * inner(s)?)),
            declared_sup: self.declared_sup.as_ref().map(|b| b * &c),
        }
    }

    /// `a·V₁ + b·V₂`.
    pub fn linear(a: Real, v1: &Variant, b: Real, v2: &Variant) -> Result<Variant, ModelError> {
        if v1.arity != v2.arity {
            return Err(ModelError::ArityMismatch { expected: v1.arity, found: v2.arity });
        }
        let (f1, f2) = (v1.eval.clone(), v2.eval.clone());
        Ok(Variant {
            label: format!("{a}*{} + {b}*{}", v1.label, v2.label),
            arity: v1.arity,
            eval: Arc::new(move |s| Ok(&a * f1(s)? + &b * f2(s)?)),
            declared_sup: None,
        })
    }
}

impl fmt::Debug for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Variant")
            .field("label", &self.label)
            .field("arity", &self.arity)
            .field("declared_sup", &self.declared_sup)
            .finish_non_exhaustive()
    }
}
