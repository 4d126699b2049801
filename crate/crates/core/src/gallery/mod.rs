//! The example processes, each bundled with its variant, its certificate
//! and the verdict that certificate should produce.

use std::sync::Arc;

use crate::checker::{check_nabla_rule, check_pd_rule, CheckConfig, CheckError, DEFAULT_TOLERANCE};
use crate::model::{
    CheckReport, Distribution, ModelError, MonotoneStepFn, NablaWitness, PdWitness, Real, StateId, TransitionSystem,
    Variant,
};
use crate::refute::{refute_act, RefutationWitness, RefuteMode};
use crate::synth::{tree_variant, TreeSpec};

pub const NAMES: &[&str] = &[
    "symmetric-walk",
    "symmetric-walk-demonic",
    "symmetric-walk-log",
    "constant-bias-walk",
    "harmonic-bias-walk",
    "tinsel",
    "curtain",
    "escaping-spline",
    "captured-spline",
    "blackwell-tree",
    "walk-2d",
];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GalleryError {
    #[error("unknown example '{0}'; try one of: {list}", list = NAMES.join(", "))]
    Unknown(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expected {
    PdPass,
    NablaPass,
    RefutePass,
    NoCertificate,
}

impl Expected {
    pub fn label(self) -> &'static str {
        match self {
            Expected::PdPass => "pd-pass",
            Expected::NablaPass => "nabla-pass",
            Expected::RefutePass => "refute-pass",
            Expected::NoCertificate => "no-certificate",
        }
    }
}

#[derive(Clone, Debug)]
pub enum Certificate {
    Pd(PdWitness),
    Nabla(NablaWitness),
    Refute(RefutationWitness),
    None,
}

#[derive(Clone, Debug)]
pub struct Bundle {
    pub name: &'static str,
    pub summary: &'static str,
    pub system: TransitionSystem,
    pub variant: Option<Variant>,
    pub certificate: Certificate,
    pub expected: Expected,
    /// Window on which the certificate is checked.
    pub config: CheckConfig,
    /// `.acts` source, when the language can express the bundle.
    pub dsl: Option<String>,
}

impl Bundle {
    /// Runs the bundle's certificate through the matching checker;
    /// `None` when there is no certificate.
    pub fn run(&self) -> Result<Option<CheckReport>, CheckError> {
        self.run_with(&self.config)
    }

    pub fn run_with(&self, cfg: &CheckConfig) -> Result<Option<CheckReport>, CheckError> {
        let v = match &self.variant {
            Some(v) => v,
            None => return Ok(None),
        };
        Ok(Some(match &self.certificate {
            Certificate::Pd(pd) => check_pd_rule(&self.system, v, pd, cfg)?,
            Certificate::Nabla(n) => check_nabla_rule(&self.system, v, n, cfg)?,
            Certificate::Refute(w) => refute_act(&self.system, w, cfg)?,
            Certificate::None => return Ok(None),
        }))
    }
}

pub fn build(name: &str) -> Result<Bundle, GalleryError> {
    Ok(match name {
        "symmetric-walk" => symmetric_walk()?,
        "symmetric-walk-demonic" => symmetric_walk_demonic()?,
        "symmetric-walk-log" => symmetric_walk_log()?,
        "constant-bias-walk" => constant_bias_walk()?,
        "harmonic-bias-walk" => harmonic_bias_walk()?,
        "tinsel" => tinsel(TINSEL_RIBBONS)?,
        "curtain" => curtain()?,
        "escaping-spline" => escaping_spline()?,
        "captured-spline" => captured_spline()?,
        "blackwell-tree" => blackwell_tree()?,
        "walk-2d" => walk_2d()?,
        _ => return Err(GalleryError::Unknown(name.to_string())),
    })
}

const BUDGET: usize = 200_000;

fn r(n: i64, d: i64) -> Real {
    Real::ratio(n, d)
}

fn pow2(k: u32) -> i64 {
    1i64 << k
}

/// Step function from consecutive right endpoints and values, merging runs
/// of equal values.
fn levels(pieces: Vec<(Real, Real)>, tail: Real) -> Result<MonotoneStepFn, ModelError> {
    let mut bps: Vec<Real> = Vec::new();
    let mut vals: Vec<Real> = Vec::new();
    for (b, y) in pieces {
        match vals.last() {
            Some(last) if *last == y => *bps.last_mut().unwrap() = b,
            _ => {
                bps.push(b);
                vals.push(y);
            }
        }
    }
    if vals.last() == Some(&tail) {
        bps.pop();
    } else {
        vals.push(tail);
    }
    if vals.is_empty() {
        vals.push(Real::one());
    }
    MonotoneStepFn::new(bps, vals)
}

fn one_dim(
    label: &str,
    target: impl Fn(i64) -> bool + Send + Sync + 'static,
    step: impl Fn(i64) -> Result<Vec<Distribution>, ModelError> + Send + Sync + 'static,
    init: i64,
) -> Result<TransitionSystem, ModelError> {
    TransitionSystem::new(label, 1, move |s| target(s.head()), move |s| step(s.head()), vec![StateId::scalar(init)])
}

fn fair_step(n: i64) -> Result<Distribution, ModelError> {
    Distribution::exact(vec![(StateId::scalar(n + 1), r(1, 2)), (StateId::scalar(n - 1), r(1, 2))])
}

fn symmetric_walk() -> Result<Bundle, ModelError> {
    let system = one_dim("symmetric-walk", |n| n == 0, |n| Ok(vec![fair_step(n)?]), 1)?;
    Ok(Bundle {
        name: "symmetric-walk",
        summary: "fair ±1 walk on the integers, V = |s|, p ≡ 1/2, d ≡ 1",
        system,
        variant: Some(Variant::new("|s|", 1, |s| Real::int(s.head().abs()))),
        certificate: Certificate::Pd(PdWitness::constant(r(1, 2), Real::one())?),
        expected: Expected::PdPass,
        config: CheckConfig::exact(Real::int(100), BUDGET),
        dsl: Some(SYMMETRIC_WALK_DSL.to_string()),
    })
}

const SYMMETRIC_WALK_DSL: &str = "\
# fair walk on the integers
system symmetric-walk
var s : int
target : s == 0
rule when s != 0 :
  choice :
    1/2 -> s := s + 1
    1/2 -> s := s - 1
variant : abs(s)
pd : p = piecewise { else: 1/2 }, d = piecewise { else: 1 }
init : 1
";

/// Away from ±1 the adversary may also jump two steps either way.
fn symmetric_walk_demonic() -> Result<Bundle, ModelError> {
    let mut b = symmetric_walk()?;
    b.system = b.system.with_extra_choice(|s| {
        let n = s.head();
        (n.abs() >= 2).then(|| {
            Distribution::exact(vec![(StateId::scalar(n + 2), r(1, 2)), (StateId::scalar(n - 2), r(1, 2))]).unwrap()
        })
    });
    b.name = "symmetric-walk-demonic";
    b.summary = "symmetric walk with an extra demonic ±2 jump wherever |s| ≥ 2";
    b.dsl = Some(
        "\
system symmetric-walk-demonic
var s : int
target : s == 0
rule when abs(s) >= 2 :
  choice :
    1/2 -> s := s + 1
    1/2 -> s := s - 1
  choice :
    1/2 -> s := s + 2
    1/2 -> s := s - 2
rule when s != 0 :
  choice :
    1/2 -> s := s + 1
    1/2 -> s := s - 1
variant : abs(s)
pd : p = piecewise { else: 1/2 }, d = piecewise { else: 1 }
init : 1
"
        .to_string(),
    );
    Ok(b)
}

const LOG_LEVELS: i64 = 4000;

/// Expected decrease of `ln(1+|n|)` at `|n| = m − 1`: `½ ln(m²/(m²−1))`.
pub fn log_walk_decrease(m: i64) -> f64 {
    let m = m as f64;
    0.5 * (1.0 / (m * m - 1.0)).ln_1p()
}

fn symmetric_walk_log() -> Result<Bundle, ModelError> {
    let system = one_dim("symmetric-walk-log", |n| n == 0, |n| Ok(vec![fair_step(n)?]), 1)?;
    let variant = Variant::new("ln(1+|s|)", 1, |s| Real::float((s.head().abs() as f64).ln_1p()));
    let pieces = (1..=LOG_LEVELS).map(|k| (Real::float((k as f64).ln_1p()), Real::float(log_walk_decrease(k + 1)))).collect();
    let nabla = levels(pieces, Real::float(log_walk_decrease(LOG_LEVELS + 2)))?;
    Ok(Bundle {
        name: "symmetric-walk-log",
        summary: "two-sided fair walk, V = ln(1+|s|), ∇ = ½ ln(m²/(m²−1)) at m = |s|+1",
        system,
        variant: Some(variant),
        certificate: Certificate::Nabla(NablaWitness::new(nabla)?),
        expected: Expected::NablaPass,
        config: CheckConfig::float(Real::float(1001f64.ln()), BUDGET, DEFAULT_TOLERANCE),
        dsl: None,
    })
}

fn biased_step(n: i64, down: Real) -> Result<Distribution, ModelError> {
    let up = Real::one() - &down;
    Distribution::exact(vec![(StateId::scalar(n - 1), down), (StateId::scalar(n + 1), up)])
}

/// `2 − 2^{1−s}`, the bounded exact martingale of the 1/3-biased walk.
pub fn constant_bias_value(s: i64) -> Real {
    Real::int(2) - Real::int(2).powi(1 - s as i32)
}

fn constant_bias_walk() -> Result<Bundle, ModelError> {
    let system = one_dim("constant-bias-walk", |n| n <= 0, |n| Ok(vec![biased_step(n, r(1, 3))?]), 1)?;
    let variant = Variant::new("2 - 2^(1-s)", 1, |s| constant_bias_value(s.head())).with_declared_sup(Real::int(2));
    Ok(Bundle {
        name: "constant-bias-walk",
        summary: "walk stepping toward 0 w.p. 1/3; bounded martingale 2 − 2^(1−s) refutes ACT",
        system,
        variant: Some(variant.clone()),
        certificate: Certificate::Refute(RefutationWitness::new(variant, RefuteMode::ExactMartingale)?),
        expected: Expected::RefutePass,
        config: CheckConfig::exact(constant_bias_value(1000), BUDGET),
        dsl: Some(
            "\
system constant-bias-walk
var s : int
target : s <= 0
rule when s > 0 :
  choice :
    1/3 -> s := s - 1
    2/3 -> s := s + 1
variant : 2 - 1/pow(2, s - 1)
bound : 2
init : 1
"
            .to_string(),
        ),
    })
}

const HARMONIC_LEVELS: i64 = 400;

fn harmonic_numbers(n: usize) -> Arc<Vec<Real>> {
    let mut h = Vec::with_capacity(n + 1);
    h.push(Real::zero());
    for k in 1..=n {
        let next = &h[k - 1] + r(1, k as i64);
        h.push(next);
    }
    Arc::new(h)
}

fn harmonic_bias_walk() -> Result<Bundle, ModelError> {
    let system = one_dim("harmonic-bias-walk", |n| n <= 0, |n| Ok(vec![biased_step(n, r(n, 2 * n + 1))?]), 1)?;
    let h = harmonic_numbers(4096);
    let hv = h.clone();
    let variant = Variant::fallible("H_s", 1, move |s: &StateId| {
        let n = s.head().max(0) as usize;
        hv.get(n).cloned().ok_or_else(|| ModelError::Eval(format!("H_{n} lies outside the tabulated range")))
    });
    // d is 1/s on (H_{s−1}, H_s]
    let pieces = (1..=HARMONIC_LEVELS).map(|s| (h[s as usize].clone(), r(1, s))).collect();
    let d = levels(pieces, r(1, HARMONIC_LEVELS + 1))?;
    Ok(Bundle {
        name: "harmonic-bias-walk",
        summary: "walk stepping toward 0 w.p. s/(2s+1); V = H_s, p ≡ 1/3, d = 1/s",
        system,
        variant: Some(variant),
        certificate: Certificate::Pd(PdWitness::new(MonotoneStepFn::constant(r(1, 3))?, d)?),
        expected: Expected::PdPass,
        config: CheckConfig::exact(Real::int(5), BUDGET),
        dsl: None,
    })
}

pub const TINSEL_RIBBONS: u32 = 16;

/// Value `r` steps before the end of a ribbon: level `k` (between `k−1`
/// and `k`) is descended in `2^{k−1}` steps of `1/2^{k−1}`.
pub fn tinsel_value(remaining: i64) -> Real {
    if remaining <= 0 {
        return Real::zero();
    }
    let k = 64 - (remaining as u64).leading_zeros() as i64; // 2^{k−1} ≤ r < 2^k
    let base = pow2(k as u32 - 1);
    Real::int(k - 1) + r(remaining - base + 1, base)
}

/// Root `(0,0)` drops into ribbon `n` w.p. `2^{−n}` (the last ribbon takes
/// the remaining mass); ribbon `n` has states `(n, r)` with `r` steps left,
/// entered at `r = 2^n − 1`.
pub fn tinsel(ribbons: u32) -> Result<Bundle, ModelError> {
    let system = TransitionSystem::new(
        "tinsel",
        2,
        |s| s.coords()[0] >= 1 && s.coords()[1] == 0,
        move |s| {
            let (n, rem) = (s.coords()[0], s.coords()[1]);
            if n == 0 {
                let mut support = Vec::with_capacity(ribbons as usize);
                for k in 1..=ribbons {
                    let p = if k < ribbons { r(1, pow2(k)) } else { r(1, pow2(ribbons - 1)) };
                    support.push((StateId::pair(k as i64, pow2(k) - 1), p));
                }
                Ok(vec![Distribution::exact(support)?])
            } else {
                Ok(vec![Distribution::point(StateId::pair(n, rem - 1))])
            }
        },
        vec![StateId::pair(0, 0)],
    )?;
    let variant = Variant::new("tinsel", 2, |s| if s.coords()[0] == 0 { Real::int(2) } else { tinsel_value(s.coords()[1]) });
    let p = MonotoneStepFn::new(vec![Real::one()], vec![Real::one(), r(1, 2)])?;
    let k = ribbons as i64;
    let pieces = (1..=k).map(|j| (Real::int(j), r(1, pow2(j as u32 - 1)))).collect();
    let d = levels(pieces, r(1, pow2(k as u32)))?;
    Ok(Bundle {
        name: "tinsel",
        summary: "root drops into ribbons of length 2^n w.p. 2^(−n); p,d from the level table",
        system,
        variant: Some(variant),
        certificate: Certificate::Pd(PdWitness::new(p, d)?),
        expected: Expected::PdPass,
        config: CheckConfig::exact(Real::int(8), BUDGET),
        dsl: None,
    })
}

pub const CURTAIN_LEVELS: i64 = 40;

/// Steps needed to run down from value `j`: `2^j − j`.
fn curtain_steps(j: i64) -> i64 {
    pow2(j as u32) - j
}

/// Value `r` steps before the end of a run: level 1 is one step, level
/// `j ≥ 2` is `2^{j−1} − 1` steps of `1/(2^{j−1} − 1)`.
pub fn curtain_value(remaining: i64) -> Real {
    if remaining <= 0 {
        return Real::zero();
    }
    if remaining == 1 {
        return Real::one();
    }
    let mut j = 2;
    while curtain_steps(j) < remaining {
        j += 1;
    }
    let below = curtain_steps(j - 1);
    Real::int(j - 1) + r(remaining - below, pow2(j as u32 - 1) - 1)
}

/// Spine `(0, k)` with `V = k+1` moves on w.p. ½ or drops into run `k`,
/// states `(k, r)` entered at `r = 2^k − k` with `V = k`.
fn curtain() -> Result<Bundle, ModelError> {
    let system = TransitionSystem::new(
        "curtain",
        2,
        |s| s.coords()[0] >= 1 && s.coords()[1] == 0,
        |s| {
            let (a, b) = (s.coords()[0], s.coords()[1]);
            if a == 0 {
                Ok(vec![Distribution::exact(vec![
                    (StateId::pair(0, b + 1), r(1, 2)),
                    (StateId::pair(b, curtain_steps(b)), r(1, 2)),
                ])?])
            } else {
                Ok(vec![Distribution::point(StateId::pair(a, b - 1))])
            }
        },
        vec![StateId::pair(0, 1)],
    )?;
    let variant = Variant::new("curtain", 2, |s| {
        let (a, b) = (s.coords()[0], s.coords()[1]);
        if a == 0 {
            Real::int(b + 1)
        } else {
            curtain_value(b)
        }
    });
    let mut pieces = vec![(Real::int(2), Real::one())];
    pieces.extend((3..=CURTAIN_LEVELS).map(|j| (Real::int(j), r(1, pow2(j as u32 - 1) - 1))));
    let d = levels(pieces, r(1, pow2(CURTAIN_LEVELS as u32) - 1))?;
    Ok(Bundle {
        name: "curtain",
        summary: "spine with ½ chance per step of dropping into a run of length 2^k − k",
        system,
        variant: Some(variant),
        certificate: Certificate::Pd(PdWitness::new(MonotoneStepFn::constant(r(1, 2))?, d)?),
        expected: Expected::PdPass,
        config: CheckConfig::exact(Real::int(8), BUDGET),
        dsl: None,
    })
}

fn spline_step(n: i64, escape: Real) -> Result<Distribution, ModelError> {
    let stay = Real::one() - &escape;
    Distribution::exact(vec![(StateId::scalar(0), escape), (StateId::scalar(n + 1), stay)])
}

const SPLINE_LEVELS: i64 = 200;

fn escaping_spline() -> Result<Bundle, ModelError> {
    let system = one_dim("escaping-spline", |n| n <= 0, |n| Ok(vec![spline_step(n, r(1, n + 1))?]), 1)?;
    let pieces: Vec<(Real, Real)> = (1..=SPLINE_LEVELS).map(|k| (Real::int(k), r(1, k + 1))).collect();
    let p = levels(pieces, r(1, SPLINE_LEVELS + 2))?;
    let pd = PdWitness::new(p, MonotoneStepFn::constant(Real::one())?)?;
    let dsl = format!(
        "\
system escaping-spline
var s : int
target : s <= 0
rule when s > 0 :
  choice :
    1/(s + 1) -> s := 0
    s/(s + 1) -> s := s + 1
variant : s
pd : p = {}, d = {}
init : 1
",
        pd.p.to_piecewise(),
        pd.d.to_piecewise()
    );
    Ok(Bundle {
        name: "escaping-spline",
        summary: "escape w.p. 1/(n+1) at node n; V = s, p(v) = 1/(v+1), d ≡ 1",
        system,
        variant: Some(Variant::new("s", 1, |s| Real::int(s.head()))),
        certificate: Certificate::Pd(pd),
        expected: Expected::PdPass,
        config: CheckConfig::exact(Real::int(50), BUDGET),
        dsl: Some(dsl),
    })
}

/// `2s/(s+1)`.
pub fn captured_spline_value(s: i64) -> Real {
    r(2 * s, s + 1)
}

fn captured_spline() -> Result<Bundle, ModelError> {
    let system =
        one_dim("captured-spline", |n| n <= 0, |n| Ok(vec![spline_step(n, r(1, (n + 1) * (n + 1)))?]), 1)?;
    let variant = Variant::new("2s/(s+1)", 1, |s| captured_spline_value(s.head())).with_declared_sup(Real::int(2));
    Ok(Bundle {
        name: "captured-spline",
        summary: "escape w.p. 1/(n+1)² at node n; bounded martingale 2s/(s+1) refutes ACT",
        system,
        variant: Some(variant.clone()),
        certificate: Certificate::Refute(RefutationWitness::new(variant, RefuteMode::ExactMartingale)?),
        expected: Expected::RefutePass,
        config: CheckConfig::exact(captured_spline_value(1000), BUDGET),
        dsl: Some(
            "\
system captured-spline
var s : int
target : s <= 0
rule when s > 0 :
  choice :
    1/((s + 1)*(s + 1)) -> s := 0
    1 - 1/((s + 1)*(s + 1)) -> s := s + 1
variant : 2*s/(s + 1)
bound : 2
init : 1
"
            .to_string(),
        ),
    })
}

const TREE_DEPTH: usize = 4096;

/// Depth chain of the uniform walk on the tree with two children exactly
/// at depths that are powers of two.
fn blackwell_tree() -> Result<Bundle, ModelError> {
    let tree = TreeSpec::powers_of_two();
    let table = tree_variant(&tree, TREE_DEPTH)?;
    let t2 = tree.clone();
    let system = one_dim(
        "blackwell-tree",
        |d| d <= 0,
        move |d| {
            let c = t2.children(d as u64)? as i64;
            Ok(vec![Distribution::exact(vec![
                (StateId::scalar(d - 1), r(1, c + 1)),
                (StateId::scalar(d + 1), r(c, c + 1)),
            ])?])
        },
        1,
    )?;
    let v = &table.values;
    let pieces = (1..TREE_DEPTH).map(|n| (v[n].clone(), &v[n] - &v[n - 1])).collect();
    let d = levels(pieces, &v[TREE_DEPTH] - &v[TREE_DEPTH - 1])?;
    Ok(Bundle {
        name: "blackwell-tree",
        summary: "radially symmetric tree, two children at depths 1, 2, 4, 8, …; V(d) = Σ 1/(c₀⋯c_i)",
        system,
        variant: Some(table.variant("tree")),
        certificate: Certificate::Pd(PdWitness::new(MonotoneStepFn::constant(r(1, 3))?, d)?),
        expected: Expected::PdPass,
        config: CheckConfig::exact(Real::int(4), BUDGET),
        dsl: None,
    })
}

fn walk_2d() -> Result<Bundle, ModelError> {
    let system = TransitionSystem::new(
        "walk-2d",
        2,
        |s| s.coords() == [0, 0],
        |s| {
            let (x, y) = (s.coords()[0], s.coords()[1]);
            Ok(vec![Distribution::exact(
                [(1, 0), (-1, 0), (0, 1), (0, -1)].into_iter().map(|(dx, dy)| (StateId::pair(x + dx, y + dy), r(1, 4))),
            )?])
        },
        vec![StateId::pair(1, 0)],
    )?;
    Ok(Bundle {
        name: "walk-2d",
        summary: "uniform nearest-neighbour walk on Z²; no certificate is known",
        system,
        variant: None,
        certificate: Certificate::None,
        expected: Expected::NoCertificate,
        config: CheckConfig::exact(Real::int(10), BUDGET),
        dsl: Some(
            "\
system walk-2d
var x : int
var y : int
target : x == 0 && y == 0
rule when true :
  choice :
    1/4 -> x := x + 1
    1/4 -> x := x - 1
    1/4 -> y := y + 1
    1/4 -> y := y - 1
init : 1, 0
"
            .to_string(),
        ),
    })
}

#[cfg(test)]
mod tests;
