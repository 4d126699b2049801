//! First-passage tables and the square-root-tail variant built from them.

use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use rayon::prelude::*;

use crate::model::{ModelError, Real, StateId, TransitionSystem, Variant};

/// Enumeration `s₀, s₁, …` of the states, with `s₀` the absorbing target.
pub trait StateIndexing: Send + Sync + std::fmt::Debug {
    fn state(&self, i: usize) -> StateId;
    fn index(&self, s: &StateId) -> Option<usize>;
}

/// `s_i = i` on the non-negative integers.
#[derive(Clone, Copy, Debug, Default)]
pub struct LineIndexing;

impl StateIndexing for LineIndexing {
    fn state(&self, i: usize) -> StateId {
        StateId::scalar(i as i64)
    }

    fn index(&self, s: &StateId) -> Option<usize> {
        usize::try_from(s.head()).ok()
    }
}

/// Points of `ℤ²` ordered by Manhattan distance from the origin, then
/// lexicographically within each diamond.
#[derive(Clone, Copy, Debug, Default)]
pub struct DiamondIndexing;

impl DiamondIndexing {
    fn ring(r: i64) -> Vec<(i64, i64)> {
        if r == 0 {
            return vec![(0, 0)];
        }
        let mut pts = Vec::with_capacity(4 * r as usize);
        for x in -r..=r {
            let y = r - x.abs();
            pts.push((x, -y));
            if y != 0 {
                pts.push((x, y));
            }
        }
        pts
    }

    fn ring_start(r: i64) -> usize {
        if r == 0 {
            0
        } else {
            (1 + 2 * r * (r - 1)) as usize
        }
    }
}

impl StateIndexing for DiamondIndexing {
    fn state(&self, i: usize) -> StateId {
        let mut r = 0i64;
        while Self::ring_start(r + 1) <= i {
            r += 1;
        }
        let (x, y) = Self::ring(r)[i - Self::ring_start(r)];
        StateId::pair(x, y)
    }

    fn index(&self, s: &StateId) -> Option<usize> {
        let (x, y) = (s.coords()[0], s.coords()[1]);
        let r = x.abs() + y.abs();
        let pos = Self::ring(r).iter().position(|&p| p == (x, y))?;
        Some(Self::ring_start(r) + pos)
    }
}

/// Denominator used in the variant's terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Weighting {
    /// `√(f₁⁽ᵗ⁾ + f₁⁽ᵗ⁺¹⁾ + ⋯)`.
    SqrtTail,
    /// Denominator 1; the construction collapses to the all-ones variant.
    Unit,
}

#[derive(Clone, Debug)]
pub struct FosterConfig {
    pub t_max: usize,
    pub i_max: usize,
    pub weighting: Weighting,
    /// Relative half-width above which a warning is issued.
    pub warn_relative_width: f64,
}

impl FosterConfig {
    pub fn new(t_max: usize, i_max: usize) -> Self {
        FosterConfig { t_max, i_max, weighting: Weighting::SqrtTail, warn_relative_width: 0.1 }
    }
}

/// `f[t−1][i−1] = f⁽ᵗ⁾_i` for `1 ≤ t ≤ T_max`, `1 ≤ i ≤ I_max`.
#[derive(Clone, Debug)]
pub struct FirstPassageTable {
    pub t_max: usize,
    pub i_max: usize,
    f: Vec<f64>,
    /// `tail₁[t−1] = Σ_{t ≤ u ≤ T_max} f₁⁽ᵘ⁾`, without the unknown remainder.
    pub tail1: Vec<f64>,
}

impl FirstPassageTable {
    pub fn get(&self, t: usize, i: usize) -> f64 {
        self.f[(t - 1) * self.i_max + (i - 1)]
    }

    /// `Σ_{t ≤ T_max} f⁽ᵗ⁾_i`.
    pub fn reached(&self, i: usize) -> f64 {
        (1..=self.t_max).map(|t| self.get(t, i)).sum()
    }
}

#[derive(Clone, Debug)]
pub struct FosterVariant {
    pub table: FirstPassageTable,
    /// `V(s₀), V(s₁), …, V(s_{I_max})`.
    pub values: Vec<f64>,
    /// Per-state estimated interval from the unknown tail beyond `T_max`.
    pub intervals: Vec<(f64, f64)>,
    /// `1 − Σ_{t≤T_max} f₁⁽ᵗ⁾`, the mass of `s₁` not resolved by the table.
    pub unresolved_mass: f64,
    /// Midpoint estimate used for the tail of column 1.
    pub tail_estimate: f64,
    pub warnings: Vec<String>,
    indexing: Arc<dyn StateIndexing>,
}

impl FosterVariant {
    pub fn max_interval_width(&self) -> f64 {
        self.intervals.iter().map(|(lo, hi)| hi - lo).fold(0.0, f64::max)
    }

    pub fn variant(&self) -> Variant {
        let values = Arc::new(self.values.clone());
        let idx = self.indexing.clone();
        Variant::fallible("foster", idx.state(0).arity(), move |s| {
            idx.index(s)
                .and_then(|i| values.get(i).copied())
                .map(Real::float)
                .ok_or_else(|| ModelError::Eval(format!("state {s} lies outside the synthesized table")))
        })
    }
}

/// Sparse one-step rows restricted to the light cone of `s₁…s_{I_max}`.
struct Cone {
    /// States in BFS order from the seeds; seeds first, in index order.
    to_target: Vec<f64>,
    rows: Vec<Vec<(u32, f64)>>,
    /// `prefix[r]` = number of cone states at distance ≤ r.
    prefix: Vec<usize>,
}

fn build_cone(sys: &TransitionSystem, seeds: &[StateId], depth: usize) -> Result<Cone, ModelError> {
    let mut index: HashMap<StateId, u32> = HashMap::new();
    let mut states: Vec<StateId> = Vec::new();
    let mut dist: Vec<usize> = Vec::new();
    let mut queue = VecDeque::new();
    for s in seeds {
        if sys.is_target(s) {
            return Err(ModelError::Eval(format!("seed state {s} is a target")));
        }
        if index.insert(s.clone(), states.len() as u32).is_none() {
            queue.push_back(states.len());
            states.push(s.clone());
            dist.push(0);
        }
    }
    let mut to_target = Vec::new();
    let mut rows = Vec::new();
    while let Some(k) = queue.pop_front() {
        debug_assert_eq!(k, rows.len());
        let s = states[k].clone();
        let ds = sys.transitions(&s)?;
        if ds.len() != 1 {
            return Err(ModelError::Eval(format!("state {s} has {} choices; a deterministic system is required", ds.len())));
        }
        let mut tt = 0.0;
        let mut row = Vec::new();
        for (t, p) in ds[0].iter() {
            if sys.is_target(t) {
                tt += p.to_f64();
                continue;
            }
            let j = match index.get(t) {
                Some(&j) => j,
                None if dist[k] + 1 <= depth => {
                    let j = states.len() as u32;
                    index.insert(t.clone(), j);
                    states.push(t.clone());
                    dist.push(dist[k] + 1);
                    queue.push_back(j as usize);
                    j
                }
                // beyond the cone; never needed for t ≤ T_max
                None => continue,
            };
            row.push((j, p.to_f64()));
        }
        to_target.push(tt);
        rows.push(row);
    }
    let maxd = dist.last().copied().unwrap_or(0);
    let mut prefix = vec![0; maxd + 1];
    for &d in &dist {
        prefix[d] += 1;
    }
    for r in 1..=maxd {
        prefix[r] += prefix[r - 1];
    }
    Ok(Cone { to_target, rows, prefix })
}

const PAR_THRESHOLD: usize = 16_384;

fn first_passage(cone: &Cone, t_max: usize, i_max: usize) -> FirstPassageTable {
    let maxd = cone.prefix.len() - 1;
    let live = |t: usize| cone.prefix[(t_max - t).min(maxd)];
    let mut f = vec![0.0; t_max * i_max];
    let mut cur: Vec<f64> = cone.to_target[..live(1)].to_vec();
    let mut next: Vec<f64> = Vec::new();
    for t in 1..=t_max {
        f[(t - 1) * i_max..t * i_max].copy_from_slice(&cur[..i_max]);
        if t == t_max {
            break;
        }
        let n = live(t + 1);
        next.clear();
        next.resize(n, 0.0);
        let step = |j: usize, out: &mut f64| {
            *out = cone.rows[j].iter().map(|&(k, p)| p * cur.get(k as usize).copied().unwrap_or(0.0)).sum();
        };
        if n >= PAR_THRESHOLD {
            next.par_iter_mut().enumerate().for_each(|(j, o)| step(j, o));
        } else {
            next.iter_mut().enumerate().for_each(|(j, o)| step(j, o));
        }
        std::mem::swap(&mut cur, &mut next);
    }
    let mut tail1 = vec![0.0; t_max];
    let mut acc = 0.0;
    for t in (1..=t_max).rev() {
        acc += f[(t - 1) * i_max];
        tail1[t - 1] = acc;
    }
    FirstPassageTable { t_max, i_max, f, tail1 }
}

/// `V(s_i) = Σ_{t≤T} f⁽ᵗ⁾_i / w(t) + R_i / w(T+1)` with `w(t) = √(R̂ + tail₁(t))`,
/// `R_i = 1 − Σ_{t≤T} f⁽ᵗ⁾_i` and `R̂` the midpoint of `[0, R₁]`.
fn assemble(table: &FirstPassageTable, r_hat: f64, weighting: Weighting) -> Vec<f64> {
    let w = |t: usize| -> f64 {
        match weighting {
            Weighting::Unit => 1.0,
            Weighting::SqrtTail if t > table.t_max => r_hat.sqrt(),
            Weighting::SqrtTail => (r_hat + table.tail1[t - 1]).sqrt(),
        }
    };
    let inv: Vec<f64> = (1..=table.t_max + 1).map(|t| 1.0 / w(t)).collect();
    let mut values = vec![0.0];
    for i in 1..=table.i_max {
        let mut sum = 0.0;
        let mut reached = 0.0;
        for t in 1..=table.t_max {
            let f = table.get(t, i);
            sum += f * inv[t - 1];
            reached += f;
        }
        let rest = (1.0 - reached).max(0.0);
        values.push(sum + rest * inv[table.t_max]);
    }
    values
}

/// Builds the first-passage table by dynamic programming on
/// `f⁽ᵗ⁺¹⁾_i = Σ_j p_ij f⁽ᵗ⁾_j` and turns it into a variant. The part of
/// each sum beyond `T_max` is closed with the unresolved mass `R_i`, which
/// keeps the super-martingale identity exact up to rounding.
pub fn foster_variant(
    sys: &TransitionSystem,
    indexing: Arc<dyn StateIndexing>,
    cfg: &FosterConfig,
) -> Result<FosterVariant, ModelError> {
    if cfg.t_max < 1 || cfg.i_max < 1 {
        return Err(ModelError::Eval("T_max and I_max must be positive".into()));
    }
    if !sys.is_target(&indexing.state(0)) {
        return Err(ModelError::Eval(format!("s0 = {} is not a target state", indexing.state(0))));
    }
    let seeds: Vec<StateId> = (1..=cfg.i_max).map(|i| indexing.state(i)).collect();
    let cone = build_cone(sys, &seeds, cfg.t_max.saturating_sub(1))?;
    let table = first_passage(&cone, cfg.t_max, cfg.i_max);
    let unresolved_mass = (1.0 - table.reached(1)).max(0.0);
    let r_hat = unresolved_mass / 2.0;
    if cfg.weighting == Weighting::SqrtTail && r_hat <= 0.0 {
        let t = table.tail1.iter().position(|&x| x <= 0.0).map_or(table.t_max + 1, |t| t + 1);
        return Err(ModelError::Eval(format!(
            "s1 cannot reach s0 at step {t} or later; the tail sum vanishes"
        )));
    }
    let values = assemble(&table, r_hat, cfg.weighting);
    let (intervals, warnings) = match cfg.weighting {
        Weighting::Unit => (values.iter().map(|&v| (v, v)).collect(), Vec::new()),
        Weighting::SqrtTail => {
            // the true remainder lies in [0, R₁]; the full-remainder end is
            // finite, the zero end is not, so mirror the former
            let lo = assemble(&table, unresolved_mass, cfg.weighting);
            let intervals: Vec<(f64, f64)> = values.iter().zip(&lo).map(|(&v, &l)| (l, 2.0 * v - l)).collect();
            let mut warnings = Vec::new();
            if let Some((i, _)) = intervals
                .iter()
                .enumerate()
                .skip(1)
                .find(|(i, (l, h))| (h - l) / 2.0 > cfg.warn_relative_width * values[*i])
            {
                warnings.push(format!(
                    "truncation at T_max = {} leaves V(s_{i}) uncertain by more than {:.0}%",
                    cfg.t_max,
                    cfg.warn_relative_width * 100.0
                ));
            }
            (intervals, warnings)
        }
    };
    Ok(FosterVariant { table, values, intervals, unresolved_mass, tail_estimate: r_hat, warnings, indexing })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Distribution;

    fn one_sided_walk() -> TransitionSystem {
        TransitionSystem::new(
            "walk",
            1,
            |s| s.head() == 0,
            |s| {
                let n = s.head();
                Ok(vec![Distribution::exact(vec![
                    (StateId::scalar(n - 1), Real::ratio(1, 2)),
                    (StateId::scalar(n + 1), Real::ratio(1, 2)),
                ])?])
            },
            vec![StateId::scalar(1)],
        )
        .unwrap()
    }

    #[test]
    fn column_one_is_catalan() {
        let fv = foster_variant(&one_sided_walk(), Arc::new(LineIndexing), &FosterConfig::new(2001, 5)).unwrap();
        // f⁽²ᵏ⁻¹⁾₁ = C_{k−1} / 2^{2k−1}, via the ratio (2k−1)/(2(k+1))
        let mut a = 0.5;
        for k in 1..=1000usize {
            let t = 2 * k - 1;
            assert!((fv.table.get(t, 1) - a).abs() < 1e-15, "t = {t}");
            assert_eq!(fv.table.get(t + 1, 1), 0.0);
            a *= (2 * k - 1) as f64 / (2 * (k + 1)) as f64;
        }
    }

    #[test]
    fn unit_weighting_gives_all_ones() {
        let mut cfg = FosterConfig::new(500, 10);
        cfg.weighting = Weighting::Unit;
        let fv = foster_variant(&one_sided_walk(), Arc::new(LineIndexing), &cfg).unwrap();
        assert_eq!(fv.values[0], 0.0);
        for v in &fv.values[1..] {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn increasing_on_walk() {
        let fv = foster_variant(&one_sided_walk(), Arc::new(LineIndexing), &FosterConfig::new(3000, 12)).unwrap();
        for w in fv.values.windows(2) {
            assert!(w[1] > w[0]);
        }
    }

    #[test]
    fn diamond_indexing_round_trips() {
        let d = DiamondIndexing;
        assert_eq!(d.state(0), StateId::pair(0, 0));
        for i in 0..200 {
            assert_eq!(d.index(&d.state(i)), Some(i));
        }
        assert_eq!(DiamondIndexing::ring(3).len(), 12);
    }
}
