//! Systems and witnesses from `.acts` files or gallery bundles.

use anyhow::{anyhow, bail, Context, Result};
use actcert_core::checker::{CheckConfig, Mode};
use actcert_core::gallery::{self, Certificate};
use actcert_core::model::{NablaWitness, PdWitness, Real, TransitionSystem, Variant};
use actcert_core::procdsl;

use crate::{SourceArgs, WindowArgs};

pub const DEFAULT_TOL: f64 = 1e-9;

pub struct Loaded {
    pub name: String,
    pub system: TransitionSystem,
    pub variant: Option<Variant>,
    pub pd: Option<PdWitness>,
    pub nabla: Option<NablaWitness>,
    pub bound: Option<Real>,
    /// The bundle's own window, for `--example`.
    pub config: Option<CheckConfig>,
}

pub fn load(src: &SourceArgs) -> Result<Loaded> {
    if let Some(name) = &src.example {
        let b = gallery::build(name)?;
        let (mut pd, mut nabla, mut bound) = (None, None, None);
        match &b.certificate {
            Certificate::Pd(w) => pd = Some(w.clone()),
            Certificate::Nabla(w) => nabla = Some(w.clone()),
            Certificate::Refute(w) => bound = Some(w.bound().clone()),
            Certificate::None => {}
        }
        return Ok(Loaded {
            name: b.name.to_string(),
            system: b.system,
            variant: b.variant,
            pd,
            nabla,
            bound,
            config: Some(b.config),
        });
    }
    let path = src.file.as_ref().ok_or_else(|| anyhow!("give a file or --example NAME"))?;
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let spec = procdsl::parse(&text).map_err(|e| anyhow!("{}:{e}", path.display()))?;
    let e = procdsl::elaborate(&spec).with_context(|| format!("elaborating {}", path.display()))?;
    Ok(Loaded {
        name: e.name,
        system: e.system,
        variant: e.variant,
        pd: e.pd,
        nabla: e.nabla,
        bound: e.bound,
        config: None,
    })
}

pub fn real(s: &str, what: &str) -> Result<Real> {
    s.parse::<Real>().map_err(|e| anyhow!("{what}: {e}"))
}

/// Flags win over the bundle's window; files default to float mode.
pub fn config(loaded: &Loaded, w: &WindowArgs) -> Result<CheckConfig> {
    let horizon = match (&w.horizon, &loaded.config) {
        (Some(h), _) => real(h, "--horizon")?,
        (None, Some(c)) => c.horizon.clone(),
        (None, None) => bail!("--horizon is required for a file source"),
    };
    if !horizon.is_positive() {
        bail!("--horizon must be positive");
    }
    let mode = match (w.exact, w.tol, &loaded.config) {
        (true, _, _) => Mode::Exact,
        (false, Some(_), _) => Mode::Float,
        (false, None, Some(c)) => c.mode,
        (false, None, None) => Mode::Float,
    };
    let budget = w.budget;
    Ok(match mode {
        Mode::Exact => CheckConfig::exact(horizon, budget),
        Mode::Float => {
            let tol = w.tol.or(loaded.config.as_ref().map(|c| c.tolerance)).unwrap_or(DEFAULT_TOL);
            CheckConfig::float(horizon, budget, tol)
        }
    })
}
