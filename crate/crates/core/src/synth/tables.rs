use std::sync::Arc;

use crate::model::{ModelError, Real, StateId, Variant};

/// Children per depth of a radially symmetric tree.
#[derive(Clone)]
pub struct TreeSpec {
    children: Arc<dyn Fn(u64) -> u64 + Send + Sync>,
}

impl TreeSpec {
    pub fn from_fn(f: impl Fn(u64) -> u64 + Send + Sync + 'static) -> Self {
        TreeSpec { children: Arc::new(f) }
    }

    pub fn constant(c: u64) -> Self {
        Self::from_fn(move |_| c)
    }

    /// Two children exactly at depths 1, 2, 4, 8, …; one elsewhere.
    pub fn powers_of_two() -> Self {
        Self::from_fn(|d| if d >= 1 && d.is_power_of_two() { 2 } else { 1 })
    }

    pub fn children(&self, depth: u64) -> Result<u64, ModelError> {
        match (self.children)(depth) {
            0 => Err(ModelError::Eval(format!("tree has no children at depth {depth}"))),
            c => Ok(c),
        }
    }
}

/// A variant tabulated on `0..=max` over one-coordinate states.
#[derive(Clone, Debug, PartialEq)]
pub struct TableVariant {
    pub values: Vec<Real>,
}

impl TableVariant {
    pub fn get(&self, n: usize) -> Option<&Real> {
        self.values.get(n)
    }

    pub fn max_index(&self) -> usize {
        self.values.len() - 1
    }

    /// Reads `V(s)` at `s.head()`; out-of-table states are an error.
    pub fn variant(&self, label: &str) -> Variant {
        let values = Arc::new(self.values.clone());
        Variant::fallible(label, 1, move |s: &StateId| {
            let n = s.head();
            usize::try_from(n)
                .ok()
                .and_then(|k| values.get(k).cloned())
                .ok_or_else(|| ModelError::Eval(format!("state {n} lies outside the synthesized table")))
        })
    }
}

/// `V(d) = Σ_{i<d} 1/(c₀⋯c_i)`.
pub fn tree_variant(tree: &TreeSpec, max_depth: usize) -> Result<TableVariant, ModelError> {
    let mut values = Vec::with_capacity(max_depth + 1);
    values.push(Real::zero());
    let mut prod = Real::one();
    let mut acc = Real::zero();
    for i in 0..max_depth {
        prod = prod * Real::int(tree.children(i as u64)? as i64);
        acc = acc + prod.recip();
        values.push(acc.clone());
    }
    Ok(TableVariant { values })
}

/// Solves `V(n) = q_n V(n−1) + (1 − q_n) V(n+1)` from `V(0) = 0`, `V(1) = 1`.
pub fn birth_death_martingale(q: impl Fn(i64) -> Real, max_n: usize) -> Result<TableVariant, ModelError> {
    let mut values = vec![Real::zero()];
    if max_n >= 1 {
        values.push(Real::one());
    }
    for n in 1..max_n {
        let qn = q(n as i64);
        if !qn.is_positive() || qn >= Real::one() {
            return Err(ModelError::BadProbability(format!("q({n}) = {qn} is not in (0,1)")));
        }
        let pn = Real::one() - &qn;
        let next = (&values[n] - &qn * &values[n - 1]) / pn;
        values.push(next);
    }
    Ok(TableVariant { values })
}

/// `V(n) = 1 / Π_{1≤k<n} (1 − escape(k))` with `V(0) = 0`: each node's value
/// is the previous one divided by the probability of not escaping.
pub fn spline_variant(escape: impl Fn(i64) -> Real, max_n: usize) -> Result<TableVariant, ModelError> {
    let mut values = vec![Real::zero()];
    if max_n >= 1 {
        values.push(Real::one());
    }
    for n in 1..max_n {
        let e = escape(n as i64);
        if !e.is_positive() || e >= Real::one() {
            return Err(ModelError::BadProbability(format!("escape({n}) = {e} is not in (0,1)")));
        }
        let next = &values[n] / (Real::one() - e);
        values.push(next);
    }
    Ok(TableVariant { values })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Real {
        Real::ratio(n, d)
    }

    #[test]
    fn powers_of_two_tree_table() {
        let t = tree_variant(&TreeSpec::powers_of_two(), 8).unwrap();
        let want = [r(0, 1), r(1, 1), r(3, 2), r(7, 4), r(2, 1), r(17, 8), r(9, 4), r(19, 8), r(5, 2)];
        assert_eq!(t.values, want);
    }

    #[test]
    fn unit_tree_is_identity() {
        let t = tree_variant(&TreeSpec::constant(1), 20).unwrap();
        for (d, v) in t.values.iter().enumerate() {
            assert_eq!(*v, Real::int(d as i64));
        }
    }

    #[test]
    fn binary_tree_is_bounded() {
        // c₀ = 2 as well, so the sum is 1 − 2^{−d}
        let t = tree_variant(&TreeSpec::constant(2), 30).unwrap();
        for (d, v) in t.values.iter().enumerate() {
            assert_eq!(*v, Real::one() - Real::int(2).powi(-(d as i32)));
            assert!(*v < Real::one());
        }
    }

    #[test]
    fn birth_death_third() {
        let t = birth_death_martingale(|_| r(1, 3), 20).unwrap();
        for n in 1..=20i32 {
            let want = (Real::int(2).powi(n) - Real::one()) / Real::int(2).powi(n - 1);
            assert_eq!(t.values[n as usize], want);
        }
        let half = birth_death_martingale(|_| r(1, 2), 10).unwrap();
        assert_eq!(half.values[7], Real::int(7));
        assert!(birth_death_martingale(|_| Real::one(), 3).is_err());
    }

    #[test]
    fn birth_death_harmonic() {
        let t = birth_death_martingale(|n| r(n, 2 * n + 1), 30).unwrap();
        let mut h = Real::zero();
        for n in 1..=30 {
            h = h + r(1, n as i64);
            assert_eq!(t.values[n], h);
        }
    }

    #[test]
    fn spline_examples() {
        let esc = spline_variant(|n| r(1, n + 1), 10).unwrap();
        assert_eq!(&esc.values[1..5], &[r(1, 1), r(2, 1), r(3, 1), r(4, 1)]);
        let cap = spline_variant(|n| r(1, (n + 1) * (n + 1)), 50).unwrap();
        for n in 1..=50i64 {
            assert_eq!(cap.values[n as usize], r(2 * n, n + 1));
        }
        let half = spline_variant(|_| r(1, 2), 12).unwrap();
        assert_eq!(half.values[12], Real::int(2048));
    }
}
