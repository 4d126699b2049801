use super::{ModelError, MonotoneStepFn, Real};

/// Probability/decrease pair for the p,d rule.
#[derive(Clone, Debug, PartialEq)]
pub struct PdWitness {
    pub p: MonotoneStepFn,
    pub d: MonotoneStepFn,
}

impl PdWitness {
    pub fn new(p: MonotoneStepFn, d: MonotoneStepFn) -> Result<Self, ModelError> {
        let w = PdWitness { p, d };
        w.validate()?;
        Ok(w)
    }

    pub fn constant(p: Real, d: Real) -> Result<Self, ModelError> {
        Self::new(MonotoneStepFn::constant(p)?, MonotoneStepFn::constant(d)?)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        self.p.validate()?;
        self.d.validate()?;
        if *self.p.max_value() > Real::one() {
            return Err(ModelError::BadWitness(format!("p takes value {} > 1", self.p.max_value())));
        }
        Ok(())
    }
}

/// Strictly positive, non-increasing expected-decrease function.
#[derive(Clone, Debug, PartialEq)]
pub struct NablaWitness {
    pub nabla: MonotoneStepFn,
}

impl NablaWitness {
    pub fn new(nabla: MonotoneStepFn) -> Result<Self, ModelError> {
        nabla.validate()?;
        Ok(NablaWitness { nabla })
    }

    pub fn constant(eps: Real) -> Result<Self, ModelError> {
        Self::new(MonotoneStepFn::constant(eps)?)
    }
}
