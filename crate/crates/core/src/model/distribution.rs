use super::{ModelError, Real, StateId};

/// Default slack allowed on `Σ probs = 1` for float-weighted distributions.
pub const DEFAULT_NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// A probability in `[0, 1]`.
#[derive(Clone, Debug, PartialEq, PartialOrd)]
pub struct Prob(Real);

impl Prob {
    pub fn new(value: Real) -> Result<Self, ModelError> {
        if !value.is_finite() || value.is_negative() || value > Real::one() {
            return Err(ModelError::BadProbability(value.to_string()));
        }
        Ok(Prob(value))
    }

    pub fn value(&self) -> &Real {
        &self.0
    }

    pub fn into_inner(self) -> Real {
        self.0
    }
}

/// Finite-support discrete distribution over states.
#[derive(Clone, Debug)]
pub struct Distribution {
    support: Vec<(StateId, Prob)>,
    normalization_tolerance: f64,
}

impl Distribution {
    /// Validates positivity, distinctness and normalization. Exact
    /// weights must sum to exactly one.
    pub fn new(support: Vec<(StateId, Real)>, normalization_tolerance: f64) -> Result<Self, ModelError> {
        if support.is_empty() {
            return Err(ModelError::EmptyDistribution);
        }
        let arity = support[0].0.arity();
        let mut out = Vec::with_capacity(support.len());
        for (i, (s, p)) in support.into_iter().enumerate() {
            if s.arity() != arity {
                return Err(ModelError::ArityMismatch { expected: arity, found: s.arity() });
            }
            if !p.is_positive() {
                return Err(ModelError::BadProbability(p.to_string()));
            }
            if out[..i].iter().any(|(t, _): &(StateId, Prob)| *t == s) {
                return Err(ModelError::DuplicateSupport(s));
            }
            out.push((s, Prob::new(p)?));
        }
        let total: Real = out.iter().map(|(_, p)| p.value().clone()).sum();
        let ok = match total.as_exact() {
            Some(_) => total == Real::one(),
            None => (total.to_f64() - 1.0).abs() <= normalization_tolerance,
        };
        if !ok {
            return Err(ModelError::NotNormalized(total.to_string()));
        }
        Ok(Distribution { support: out, normalization_tolerance })
    }

    /// Builds a distribution from weighted outcomes, merging repeated
    /// states and dropping zero weights. First-occurrence order is kept.
    pub fn from_weights(
        weights: impl IntoIterator<Item = (StateId, Real)>,
        normalization_tolerance: f64,
    ) -> Result<Self, ModelError> {
        let mut merged: Vec<(StateId, Real)> = Vec::new();
        for (s, p) in weights {
            if p.is_negative() {
                return Err(ModelError::BadProbability(p.to_string()));
            }
            match merged.iter_mut().find(|(t, _)| *t == s) {
                Some((_, q)) => *q = &*q + &p,
                None => merged.push((s, p)),
            }
        }
        merged.retain(|(_, p)| !p.is_zero());
        Self::new(merged, normalization_tolerance)
    }

    /// Exact-weight shorthand.
    pub fn exact(weights: impl IntoIterator<Item = (StateId, Real)>) -> Result<Self, ModelError> {
        Self::from_weights(weights, DEFAULT_NORMALIZATION_TOLERANCE)
    }

    pub fn point(s: StateId) -> Self {
        Distribution {
            support: vec![(s, Prob(Real::one()))],
            normalization_tolerance: DEFAULT_NORMALIZATION_TOLERANCE,
        }
    }

    pub fn support(&self) -> &[(StateId, Prob)] {
        &self.support
    }

    pub fn iter(&self) -> impl Iterator<Item = (&StateId, &Real)> {
        self.support.iter().map(|(s, p)| (s, p.value()))
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn normalization_tolerance(&self) -> f64 {
        self.normalization_tolerance
    }

    pub fn arity(&self) -> usize {
        self.support[0].0.arity()
    }

    /// `δ_{S'}` for the set of support states satisfying `pred`.
    pub fn mass_where(&self, mut pred: impl FnMut(&StateId) -> bool) -> Real {
        self.iter().filter(|(s, _)| pred(s)).map(|(_, p)| p.clone()).sum()
    }

    pub fn prob_of(&self, s: &StateId) -> Real {
        self.iter().find(|(t, _)| *t == s).map(|(_, p)| p.clone()).unwrap_or_else(Real::zero)
    }

    pub fn is_exact(&self) -> bool {
        self.support.iter().all(|(_, p)| p.value().is_exact())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: i64) -> StateId {
        StateId::scalar(x)
    }

    #[test]
    fn rejects_unnormalized_exact_weights() {
        let err = Distribution::new(vec![(s(0), Real::ratio(1, 3)), (s(1), Real::ratio(1, 3))], 0.0).unwrap_err();
        assert!(matches!(err, ModelError::NotNormalized(ref t) if t == "2/3"));
    }

    #[test]
    fn float_weights_use_tolerance() {
        let d = Distribution::new(vec![(s(0), Real::float(0.1)), (s(1), Real::float(0.9 + 1e-12))], 1e-9);
        assert!(d.is_ok());
        let d = Distribution::new(vec![(s(0), Real::float(0.1)), (s(1), Real::float(0.8))], 1e-9);
        assert!(d.is_err());
    }

    #[test]
    fn merges_duplicates_and_drops_zeros() {
        let d = Distribution::exact(vec![
            (s(1), Real::ratio(1, 4)),
            (s(2), Real::zero()),
            (s(1), Real::ratio(1, 4)),
            (s(3), Real::ratio(1, 2)),
        ])
        .unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.prob_of(&s(1)), Real::ratio(1, 2));
    }

    #[test]
    fn rejects_duplicates_and_nonpositive() {
        assert!(Distribution::new(vec![(s(1), Real::ratio(1, 2)), (s(1), Real::ratio(1, 2))], 0.0).is_err());
        assert!(Distribution::new(vec![(s(1), Real::one()), (s(2), Real::zero())], 0.0).is_err());
    }
}
