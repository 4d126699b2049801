use std::fmt;

use super::{ModelError, Real};

/// A non-increasing, strictly positive step function on `(0, ∞)`.
///
/// With breakpoints `v₁ < … < v_k` and values `y₀ ≥ … ≥ y_k`, the function
/// is `y₀` on `(0, v₁]`, `y_i` on `(v_i, v_{i+1}]` and `y_k` on `(v_k, ∞)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MonotoneStepFn {
    breakpoints: Vec<Real>,
    values: Vec<Real>,
}

impl MonotoneStepFn {
    pub fn new(breakpoints: Vec<Real>, values: Vec<Real>) -> Result<Self, ModelError> {
        let f = MonotoneStepFn { breakpoints, values };
        f.validate()?;
        Ok(f)
    }

    pub fn constant(value: Real) -> Result<Self, ModelError> {
        Self::new(Vec::new(), vec![value])
    }

    /// Re-checks every invariant; also called by the checker.
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.values.len() != self.breakpoints.len() + 1 {
            return Err(ModelError::BadStepFn(format!(
                "{} breakpoints need {} values, got {}",
                self.breakpoints.len(),
                self.breakpoints.len() + 1,
                self.values.len()
            )));
        }
        for b in &self.breakpoints {
            if !b.is_finite() || !b.is_positive() {
                return Err(ModelError::BadStepFn(format!("breakpoint {b} is not a positive real")));
            }
        }
        for w in self.breakpoints.windows(2) {
            if w[0] >= w[1] {
                return Err(ModelError::BadStepFn(format!(
                    "breakpoints not strictly increasing at {} then {}",
                    w[0], w[1]
                )));
            }
        }
        for y in &self.values {
            if !y.is_finite() || !y.is_positive() {
                return Err(ModelError::BadStepFn(format!("value {y} is not strictly positive")));
            }
        }
        for (i, w) in self.values.windows(2).enumerate() {
            if w[1] > w[0] {
                return Err(ModelError::NotNonIncreasing(format!(
                    "value rises from {} to {} after v = {}",
                    w[0], w[1], self.breakpoints[i]
                )));
            }
        }
        Ok(())
    }

    pub fn breakpoints(&self) -> &[Real] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[Real] {
        &self.values
    }

    /// Index of the interval containing `v`.
    pub fn interval_of(&self, v: &Real) -> usize {
        self.breakpoints.partition_point(|b| b < v)
    }

    pub fn eval(&self, v: &Real) -> &Real {
        &self.values[self.interval_of(v)]
    }

    pub fn max_value(&self) -> &Real {
        &self.values[0]
    }

    pub fn min_value(&self) -> &Real {
        self.values.last().expect("non-empty")
    }

    /// Pointwise minimum; breakpoints are merged.
    pub fn pointwise_min(&self, other: &MonotoneStepFn) -> MonotoneStepFn {
        let mut bps: Vec<Real> = self.breakpoints.iter().chain(other.breakpoints.iter()).cloned().collect();
        bps.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
        bps.dedup_by(|a, b| a == b);
        let mut values = Vec::with_capacity(bps.len() + 1);
        for i in 0..=bps.len() {
            // any point strictly inside the interval selects the right value;
            // the right endpoint does too since intervals are right-closed
            let probe = if i < bps.len() { bps[i].clone() } else { bps.last().map(|b| b + Real::one()).unwrap_or_else(Real::one) };
            values.push(self.eval(&probe).clone().min(other.eval(&probe).clone()));
        }
        simplify(bps, values)
    }

    /// `v ↦ c^k · f(v / c)` for `c > 0`: rescales the argument and
    /// multiplies the values by `c^k`.
    pub fn rescaled(&self, c: &Real, value_power: i32) -> MonotoneStepFn {
        let factor = c.powi(value_power);
        MonotoneStepFn {
            breakpoints: self.breakpoints.iter().map(|b| b * c).collect(),
            values: self.values.iter().map(|y| y * &factor).collect(),
        }
    }

    /// Renders as DSL `piecewise { v <= b: y; …; else: y }`.
    pub fn to_piecewise(&self) -> String {
        let mut out = String::from("piecewise {");
        for (b, y) in self.breakpoints.iter().zip(&self.values) {
            out.push_str(&format!(" v <= {}: {};", dsl_number(b), dsl_number(y)));
        }
        out.push_str(&format!(" else: {} }}", dsl_number(self.min_value())));
        out
    }
}

fn simplify(bps: Vec<Real>, values: Vec<Real>) -> MonotoneStepFn {
    let mut out_b = Vec::new();
    let mut out_v = vec![values[0].clone()];
    for (b, y) in bps.into_iter().zip(values.into_iter().skip(1)) {
        if y != *out_v.last().unwrap() {
            out_b.push(b);
            out_v.push(y);
        }
    }
    MonotoneStepFn { breakpoints: out_b, values: out_v }
}

/// Number syntax accepted by the DSL: integers, `a/b`, or decimals.
pub(crate) fn dsl_number(x: &Real) -> String {
    match x {
        Real::Exact(r) if r.is_integer() => r.numer().to_string(),
        Real::Exact(r) => format!("{}/{}", r.numer(), r.denom()),
        Real::Float(f) => {
            let s = format!("{f:?}");
            if s.contains('e') {
                format!("{f:.17}")
            } else {
                s
            }
        }
    }
}

impl fmt::Display for MonotoneStepFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_piecewise())
    }
}
