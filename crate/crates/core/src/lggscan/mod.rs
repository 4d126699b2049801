//! Grid scan of the discrete super-harmonic inequality for `log` and
//! `log log` of the squared radius on ℤ² (and ℤ³ for comparison).
//!
//! At a cell `c` with `u = |c|²` the slack is `2·dims·g(u) − Σ g(|c ± eᵢ|²)`;
//! the inequality holds strictly when the slack is positive. Differences
//! `g(u+δ) − g(u)` are evaluated through `ln_1p`, so the slack keeps its
//! relative precision when it is tiny compared with `g(u)`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

/// Slack at or below `-MARGIN` is a violation; `|slack| < MARGIN` is marginal.
pub const MARGIN: f64 = 1e-12;
/// Mirrored re-evaluations must agree to this absolute tolerance.
const MIRROR_TOL: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LggFunction {
    Log,
    LogLog,
}

impl LggFunction {
    /// `g(u + δ) − g(u)` for `u > 1`, `u + δ > 1`.
    fn diff(self, u: f64, delta: f64) -> f64 {
        let r = (delta / u).ln_1p();
        match self {
            LggFunction::Log => r,
            LggFunction::LogLog => (r / u.ln()).ln_1p(),
        }
    }
}

impl fmt::Display for LggFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LggFunction::Log => "log",
            LggFunction::LogLog => "loglog",
        })
    }
}

impl FromStr for LggFunction {
    type Err = ScanError;

    fn from_str(s: &str) -> Result<Self, ScanError> {
        match s {
            "log" => Ok(LggFunction::Log),
            "loglog" | "log-log" => Ok(LggFunction::LogLog),
            _ => Err(ScanError::Function(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScanError {
    #[error("max N must be at least 2, got {0}")]
    MaxN(i64),
    #[error("exclusion radius must be at least 1, got {0}")]
    Radius(i64),
    #[error("dims must be 2 or 3, got {0}")]
    Dims(usize),
    #[error("chunk size must be positive")]
    Chunk,
    #[error("unknown function {0:?} (expected log or loglog)")]
    Function(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScanConfig {
    /// Largest `|x|`, `|y|` (and `|z|`) scanned.
    pub max_n: i64,
    /// A cell is excluded when any squared radius it involves is at most this.
    pub exclusion_radius: i64,
    pub function: LggFunction,
    /// Rows of the fundamental domain handed to one task.
    pub chunk: usize,
    pub dims: usize,
}

impl ScanConfig {
    pub fn new(max_n: i64, function: LggFunction) -> Self {
        ScanConfig { max_n, exclusion_radius: 2, function, chunk: 8, dims: 2 }
    }

    pub fn validate(&self) -> Result<(), ScanError> {
        if self.max_n < 2 {
            return Err(ScanError::MaxN(self.max_n));
        }
        if self.exclusion_radius < 1 {
            return Err(ScanError::Radius(self.exclusion_radius));
        }
        if self.dims != 2 && self.dims != 3 {
            return Err(ScanError::Dims(self.dims));
        }
        if self.chunk == 0 {
            return Err(ScanError::Chunk);
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cell {
    pub coords: Vec<i64>,
    pub slack: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanReport {
    pub function: LggFunction,
    pub dims: usize,
    pub max_n: i64,
    pub exclusion_radius: i64,
    /// Grid cells decided (excluded cells and the origin not counted).
    pub cells: u64,
    /// Every grid cell with slack ≤ −MARGIN, sorted.
    pub violations: Vec<Cell>,
    /// Every grid cell with |slack| < MARGIN, sorted.
    pub marginals: Vec<Cell>,
    /// Grid cells skipped by the exclusion rule, sorted.
    pub excluded: Vec<Vec<i64>>,
    pub min_slack: Option<f64>,
    /// A representative with `x ≥ y (≥ z) ≥ 0`.
    pub min_at: Option<Vec<i64>>,
    pub mirror_checks: u64,
    pub mirror_mismatches: u64,
}

impl ScanReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Slack at one cell, or `None` if the exclusion rule removes it.
pub fn slack(function: LggFunction, exclusion_radius: i64, coords: &[i64]) -> Option<f64> {
    let u: i64 = coords.iter().map(|c| c * c).sum();
    if u <= exclusion_radius {
        return None;
    }
    let mut total = 0.0;
    for &c in coords {
        for delta in [2 * c + 1, 1 - 2 * c] {
            if u + delta <= exclusion_radius {
                return None;
            }
            total -= function.diff(u as f64, delta as f64);
        }
    }
    Some(total)
}

/// Number of distinct images of `coords` under sign changes and permutations.
fn orbit_size(coords: &[i64]) -> u64 {
    let mut abs: Vec<u64> = coords.iter().map(|c| c.unsigned_abs()).collect();
    abs.sort_unstable();
    let fact = |n: usize| (1..=n as u64).product::<u64>();
    let mut perms = fact(abs.len());
    for run in abs.chunk_by(|a, b| a == b) {
        perms /= fact(run.len());
    }
    perms << abs.iter().filter(|&&a| a != 0).count()
}

fn orbit(coords: &[i64]) -> BTreeSet<Vec<i64>> {
    fn perms(rest: &[i64], acc: &mut Vec<i64>, out: &mut BTreeSet<Vec<i64>>) {
        if rest.is_empty() {
            out.insert(acc.clone());
            return;
        }
        for i in 0..rest.len() {
            let mut r = rest.to_vec();
            let c = r.remove(i);
            for v in [c, -c] {
                acc.push(v);
                perms(&r, acc, out);
                acc.pop();
            }
        }
    }
    let mut out = BTreeSet::new();
    perms(coords, &mut Vec::with_capacity(coords.len()), &mut out);
    out
}

/// Deterministic ~1% sample of fundamental cells for the mirror check.
fn sampled(coords: &[i64]) -> bool {
    let h = coords.iter().fold(0x9e37_79b9_7f4a_7c15_u64, |h, &c| (h ^ c as u64).wrapping_mul(0x1000_0000_01b3));
    (h >> 17) % 100 == 0
}

/// A non-trivial image: reverse the coordinates and negate the first.
fn mirror(coords: &[i64]) -> Vec<i64> {
    let mut m: Vec<i64> = coords.iter().rev().copied().collect();
    m[0] = -m[0];
    m
}

#[derive(Default)]
struct Partial {
    cells: u64,
    violations: Vec<Cell>,
    marginals: Vec<Cell>,
    excluded: Vec<Vec<i64>>,
    min: Option<(f64, Vec<i64>)>,
    mirror_checks: u64,
    mirror_mismatches: u64,
}

impl Partial {
    fn visit(&mut self, cfg: &ScanConfig, coords: &[i64]) {
        let Some(s) = slack(cfg.function, cfg.exclusion_radius, coords) else {
            self.excluded.extend(orbit(coords));
            return;
        };
        self.cells += orbit_size(coords);
        if sampled(coords) {
            self.mirror_checks += 1;
            match slack(cfg.function, cfg.exclusion_radius, &mirror(coords)) {
                Some(m) if (m - s).abs() <= MIRROR_TOL => {}
                _ => self.mirror_mismatches += 1,
            }
        }
        if self.min.as_ref().is_none_or(|(m, _)| s < *m) {
            self.min = Some((s, coords.to_vec()));
        }
        let bucket = if s <= -MARGIN {
            &mut self.violations
        } else if s.abs() < MARGIN {
            &mut self.marginals
        } else {
            return;
        };
        bucket.extend(orbit(coords).into_iter().map(|c| Cell { coords: c, slack: s }));
    }

    fn merge(mut self, other: Partial) -> Partial {
        self.cells += other.cells;
        self.violations.extend(other.violations);
        self.marginals.extend(other.marginals);
        self.excluded.extend(other.excluded);
        self.mirror_checks += other.mirror_checks;
        self.mirror_mismatches += other.mirror_mismatches;
        self.min = match (self.min, other.min) {
            (Some(a), Some(b)) => Some(if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a }),
            (a, b) => a.or(b),
        };
        self
    }
}

/// Scans every cell with `0 < max |cᵢ| ≤ N`, evaluating only the fundamental
/// domain `x ≥ y (≥ z) ≥ 0` and expanding listed cells to their orbits.
pub fn scan(cfg: &ScanConfig) -> Result<ScanReport, ScanError> {
    cfg.validate()?;
    let rows: Vec<i64> = (0..=cfg.max_n).collect();
    let total = rows
        .par_chunks(cfg.chunk)
        .map(|xs| {
            let mut part = Partial::default();
            for &x in xs {
                for y in 0..=x {
                    if cfg.dims == 2 {
                        if x > 0 {
                            part.visit(cfg, &[x, y]);
                        }
                    } else {
                        for z in 0..=y {
                            if x > 0 {
                                part.visit(cfg, &[x, y, z]);
                            }
                        }
                    }
                }
            }
            part
        })
        .reduce(Partial::default, Partial::merge);

    let mut violations = total.violations;
    let mut marginals = total.marginals;
    let mut excluded = total.excluded;
    violations.sort_by(|a, b| a.coords.cmp(&b.coords));
    marginals.sort_by(|a, b| a.coords.cmp(&b.coords));
    excluded.sort();
    let (min_slack, min_at) = match total.min {
        Some((s, at)) => (Some(s), Some(at)),
        None => (None, None),
    };
    Ok(ScanReport {
        function: cfg.function,
        dims: cfg.dims,
        max_n: cfg.max_n,
        exclusion_radius: cfg.exclusion_radius,
        cells: total.cells,
        violations,
        marginals,
        excluded,
        min_slack,
        min_at,
        mirror_checks: total.mirror_checks,
        mirror_mismatches: total.mirror_mismatches,
    })
}
