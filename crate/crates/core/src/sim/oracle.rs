use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;

use super::SimError;
use crate::model::{enumerate_window_below, Real, StateId, TransitionSystem, Variant, Window};

const VI_TOLERANCE: f64 = 1e-12;
const VI_MAX_SWEEPS: usize = 200_000;

/// Probability of reaching a target before `V ≥ H`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Reachability {
    /// Solved by elimination; present only for systems without choice.
    /// Exact whenever every probability is.
    pub z: Option<Real>,
    /// Demonic and angelic values from value iteration.
    pub z_min: f64,
    pub z_max: f64,
    /// Largest change in the last sweep.
    pub residual: f64,
    pub sweeps: usize,
    pub states: usize,
}

fn window_from(sys: &TransitionSystem, v: &Variant, horizon: &Real, from: &StateId, budget: usize) -> Result<Window, SimError> {
    if sys.is_target(from) {
        return Err(SimError::StartIsTarget(from.clone()));
    }
    let local = sys.with_initial_states(vec![from.clone()])?;
    let w = enumerate_window_below(&local, v, horizon, budget)?;
    if w.truncated {
        return Err(SimError::Truncated(w.len()));
    }
    if w.interior.is_empty() {
        return Err(SimError::StartOutsideWindow {
            state: from.clone(),
            v: w.values[0].to_string(),
            horizon: horizon.to_string(),
        });
    }
    Ok(w)
}

/// Interior states from which some path (under some choice) reaches a
/// state in `goal`.
fn backward_closure(w: &Window, goal: impl Fn(usize) -> bool) -> Vec<bool> {
    let n = w.len();
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &i in &w.interior {
        for d in w.transitions[i].as_ref().unwrap() {
            for (t, _) in d.iter() {
                preds[w.index[t]].push(i);
            }
        }
    }
    let mut mark = vec![false; n];
    let mut queue: VecDeque<usize> = (0..n).filter(|&i| goal(i)).collect();
    for &i in &queue {
        mark[i] = true;
    }
    while let Some(j) = queue.pop_front() {
        for &i in &preds[j] {
            if !mark[i] {
                mark[i] = true;
                queue.push_back(i);
            }
        }
    }
    mark
}

/// Solves `x_i − Σ_j P_ij x_j = b_i` over the `unknowns` (window indices);
/// other states enter through `known`. `I − P` restricted to transient
/// states is a nonsingular M-matrix, so elimination needs no pivoting.
fn solve_linear(w: &Window, unknowns: &[usize], known: impl Fn(usize) -> Real, b: impl Fn(usize) -> Real) -> Vec<Real> {
    let n = unknowns.len();
    let mut col_of = vec![usize::MAX; w.len()];
    for (k, &i) in unknowns.iter().enumerate() {
        col_of[i] = k;
    }
    let mut rows: Vec<BTreeMap<usize, Real>> = Vec::with_capacity(n);
    let mut rhs: Vec<Real> = Vec::with_capacity(n);
    let mut cols: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for (k, &i) in unknowns.iter().enumerate() {
        let d = &w.transitions[i].as_ref().unwrap()[0];
        let mut row: BTreeMap<usize, Real> = BTreeMap::new();
        row.insert(k, Real::one());
        let mut r = b(i);
        for (t, p) in d.iter() {
            let j = w.index[t];
            if col_of[j] == usize::MAX {
                r = r + p * known(j);
            } else {
                let e = row.entry(col_of[j]).or_insert_with(Real::zero);
                *e = &*e - p;
            }
        }
        row.retain(|_, a| !a.is_zero());
        for &c in row.keys() {
            cols[c].insert(k);
        }
        rows.push(row);
        rhs.push(r);
    }
    for k in 0..n {
        let pivot = rows[k][&k].clone();
        let below: Vec<usize> = cols[k].range(k + 1..).copied().collect();
        let pivot_row: Vec<(usize, Real)> = rows[k].range(k + 1..).map(|(c, a)| (*c, a.clone())).collect();
        for r in below {
            let f = match rows[r].remove(&k) {
                Some(a) => a / &pivot,
                None => continue,
            };
            cols[k].remove(&r);
            for (c, a) in &pivot_row {
                let e = rows[r].entry(*c).or_insert_with(Real::zero);
                *e = &*e - &f * a;
                if e.is_zero() {
                    rows[r].remove(c);
                    cols[*c].remove(&r);
                } else {
                    cols[*c].insert(r);
                }
            }
            rhs[r] = &rhs[r] - &f * &rhs[k];
        }
    }
    let mut x = vec![Real::zero(); n];
    for k in (0..n).rev() {
        let mut acc = rhs[k].clone();
        for (c, a) in rows[k].range(k + 1..) {
            acc = acc - a * &x[*c];
        }
        x[k] = acc / &rows[k][&k];
    }
    x
}

fn deterministic(w: &Window) -> bool {
    w.interior.iter().all(|&i| w.transitions[i].as_ref().unwrap().len() == 1)
}

/// Gauss-Seidel iteration from zero; converges to the least fixed point,
/// which is the min (resp. max) reachability probability.
fn value_iteration(w: &Window, live: &[bool], hit: &[bool], maximize: bool) -> (Vec<f64>, f64, usize) {
    let mut x: Vec<f64> = (0..w.len()).map(|i| if hit[i] { 1.0 } else { 0.0 }).collect();
    let order: Vec<usize> = w.interior.iter().copied().filter(|&i| live[i]).collect();
    let succ: Vec<Vec<Vec<(usize, f64)>>> = order
        .iter()
        .map(|&i| {
            w.transitions[i]
                .as_ref()
                .unwrap()
                .iter()
                .map(|d| d.iter().map(|(t, p)| (w.index[t], p.to_f64())).collect())
                .collect()
        })
        .collect();
    let mut residual = f64::INFINITY;
    let mut sweeps = 0;
    while residual > VI_TOLERANCE && sweeps < VI_MAX_SWEEPS {
        residual = 0.0;
        for (k, &i) in order.iter().enumerate() {
            let vals = succ[k].iter().map(|d| d.iter().map(|&(j, p)| p * x[j]).sum::<f64>());
            let new = if maximize { vals.fold(f64::NEG_INFINITY, f64::max) } else { vals.fold(f64::INFINITY, f64::min) };
            residual = residual.max((new - x[i]).abs());
            x[i] = new;
        }
        sweeps += 1;
    }
    (x, residual, sweeps)
}

/// Probability, from `from`, of hitting a target before reaching a state
/// with `V ≥ H`, computed on the finite window. A truncated window is an
/// error rather than an approximation.
pub fn exact_reachability(
    sys: &TransitionSystem,
    v: &Variant,
    horizon: &Real,
    from: &StateId,
    node_budget: usize,
) -> Result<Reachability, SimError> {
    let w = window_from(sys, v, horizon, from, node_budget)?;
    let hit = w.is_target.clone();
    let live = backward_closure(&w, |i| hit[i]);
    let start = w.index[from];
    let z = if deterministic(&w) {
        let unknowns: Vec<usize> = w.interior.iter().copied().filter(|&i| live[i]).collect();
        if live[start] {
            let x = solve_linear(&w, &unknowns, |j| if hit[j] { Real::one() } else { Real::zero() }, |_| Real::zero());
            let k = unknowns.iter().position(|&i| i == start).unwrap();
            Some(x[k].clone())
        } else {
            Some(Real::zero())
        }
    } else {
        None
    };
    let (lo, r1, s1) = value_iteration(&w, &live, &hit, false);
    let (hi, r2, s2) = value_iteration(&w, &live, &hit, true);
    Ok(Reachability {
        z,
        z_min: lo[start],
        z_max: hi[start],
        residual: r1.max(r2),
        sweeps: s1.max(s2),
        states: w.len(),
    })
}

/// Expected number of steps from `from` until a target is hit or `V ≥ H`
/// is reached. Only for systems without choice.
pub fn expected_exit_time(
    sys: &TransitionSystem,
    v: &Variant,
    horizon: &Real,
    from: &StateId,
    node_budget: usize,
) -> Result<Real, SimError> {
    let w = window_from(sys, v, horizon, from, node_budget)?;
    if !deterministic(&w) {
        return Err(SimError::Unsolvable("expected exit time is defined here only without choice".into()));
    }
    let exits = backward_closure(&w, |i| !w.is_interior(i));
    if let Some(&i) = w.interior.iter().find(|&&i| !exits[i]) {
        return Err(SimError::Unsolvable(format!("state {} never leaves the window", w.states[i])));
    }
    let x = solve_linear(&w, &w.interior, |_| Real::zero(), |_| Real::one());
    let k = w.interior.iter().position(|&i| i == w.index[from]).unwrap();
    Ok(x[k].clone())
}
