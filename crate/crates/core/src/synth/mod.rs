//! Variant and witness constructions.

mod compose;
mod foster;
mod tables;

pub use compose::{compose_nabla, Component, Composite, Part};
pub use foster::{foster_variant, DiamondIndexing, FirstPassageTable, FosterConfig, FosterVariant, LineIndexing, StateIndexing, Weighting};
pub use tables::{birth_death_martingale, spline_variant, tree_variant, TableVariant, TreeSpec};

use crate::model::{ModelError, MonotoneStepFn, NablaWitness, PdWitness, Real};

/// Guaranteed mass on `{x | f(x) < y'}` when `Exp f ≤ y` and `f ≥ 0`:
/// `max(0, 1 − y/y')`.
pub fn markov_bound(y: &Real, y_prime: &Real) -> Real {
    if y_prime <= y {
        return Real::zero();
    }
    (Real::one() - y / y_prime).max(Real::zero())
}

#[derive(Clone, Debug, PartialEq)]
pub struct PdPoint {
    pub p: Real,
    pub d: Real,
    /// `ε ≥ 2 v_s` would give `p > 1`; `p` was clamped to 1.
    pub clamped: bool,
}

/// `d = ε/2`, `p = d/(v_s − d)`: a state whose expected variant drops by
/// at least `ε` moves mass `p` down by `d`.
pub fn pd_from_epsilon(v_s: &Real, epsilon: &Real) -> PdPoint {
    let d = epsilon / Real::int(2);
    let room = v_s - &d;
    if !room.is_positive() {
        return PdPoint { p: Real::one(), d, clamped: true };
    }
    let p = &d / room;
    if p > Real::one() {
        PdPoint { p: Real::one(), d, clamped: true }
    } else {
        PdPoint { p, d, clamped: false }
    }
}

/// Discretizes `pd_from_epsilon` over the steps of `∇`, taking each
/// interval's right endpoint as the worst-case `v_s`. The unbounded last
/// step is cut at `v_max_hint`; the `p` value beyond the hint repeats the
/// one at the hint, so the witness is only guaranteed for `v ≤ v_max_hint`.
pub fn pd_witness_from_nabla(w: &NablaWitness, v_max_hint: &Real) -> Result<PdWitness, ModelError> {
    let nabla = &w.nabla;
    let mut ends: Vec<Real> = nabla.breakpoints().to_vec();
    let last = ends.last().cloned();
    match last {
        Some(b) if b >= *v_max_hint => {}
        _ => ends.push(v_max_hint.clone()),
    }
    let mut p_vals = Vec::with_capacity(ends.len() + 1);
    let mut d_vals = Vec::with_capacity(ends.len() + 1);
    for r in &ends {
        let pt = pd_from_epsilon(r, nabla.eval(r));
        p_vals.push(pt.p);
        d_vals.push(pt.d);
    }
    // beyond the last endpoint: same values as at it
    p_vals.push(p_vals.last().unwrap().clone());
    d_vals.push(d_vals.last().unwrap().clone());
    let p = MonotoneStepFn::new(ends.clone(), p_vals)?;
    let d = MonotoneStepFn::new(ends, d_vals)?;
    PdWitness::new(normalize(p), normalize(d))
}

/// Drops breakpoints across which the value does not change.
fn normalize(f: MonotoneStepFn) -> MonotoneStepFn {
    let mut b = Vec::new();
    let mut v = vec![f.values()[0].clone()];
    for (bp, y) in f.breakpoints().iter().zip(&f.values()[1..]) {
        if y != v.last().unwrap() {
            b.push(bp.clone());
            v.push(y.clone());
        }
    }
    MonotoneStepFn::new(b, v).expect("coarsening keeps monotonicity")
}
