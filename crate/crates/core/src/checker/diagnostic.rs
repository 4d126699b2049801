use serde::Serialize;

use super::{window_for, CheckConfig, CheckError};
use crate::model::{Real, TransitionSystem, Variant, Window};

/// Heuristic look at whether `V` creeps up to a finite supremum while the
/// realized decrease (or its probability) fades out. Never a verdict.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundedVariantDiagnostic {
    pub observed_sup: f64,
    pub distinct_values: usize,
    /// Fitted `α` in `Δ_k ~ k^{−α}` for gaps between consecutive distinct
    /// values; `α > 1` suggests a finite limit.
    pub tail_exponent: Option<f64>,
    pub realized_d_low: Option<f64>,
    pub realized_d_high: Option<f64>,
    pub realized_p_low: Option<f64>,
    pub realized_p_high: Option<f64>,
    pub warning: Option<String>,
}

const MIN_DISTINCT: usize = 16;
const BOUNDED_ALPHA: f64 = 1.5;
const FADE_RATIO: f64 = 0.25;

pub fn bounded_variant_diagnostic(
    sys: &TransitionSystem,
    v: &Variant,
    cfg: &CheckConfig,
) -> Result<BoundedVariantDiagnostic, CheckError> {
    Ok(bounded_variant_diagnostic_on(&window_for(sys, v, cfg)?))
}

/// Worst case over choices of the largest available decrease and of the
/// mass on strictly smaller variant values.
fn realized(w: &Window, i: usize) -> (f64, f64) {
    let v = w.values[i].to_f64();
    let mut d_min = f64::INFINITY;
    let mut p_min = f64::INFINITY;
    for d in w.transitions[i].as_ref().unwrap() {
        let mut best = 0.0f64;
        let mut mass = 0.0;
        for (t, p) in d.iter() {
            let vt = w.values[w.index[t]].to_f64();
            if vt < v {
                best = best.max(v - vt);
                mass += p.to_f64();
            }
        }
        d_min = d_min.min(best);
        p_min = p_min.min(mass);
    }
    (d_min, p_min)
}

fn min_over(w: &Window, idx: &[usize]) -> (Option<f64>, Option<f64>) {
    if idx.is_empty() {
        return (None, None);
    }
    let (mut d, mut p) = (f64::INFINITY, f64::INFINITY);
    for &i in idx {
        let (a, b) = realized(w, i);
        d = d.min(a);
        p = p.min(b);
    }
    (Some(d), Some(p))
}

pub fn bounded_variant_diagnostic_on(w: &Window) -> BoundedVariantDiagnostic {
    let mut vals: Vec<f64> = w.interior.iter().map(|&i| w.values[i].to_f64()).collect();
    vals.sort_by(|a, b| a.total_cmp(b));
    vals.dedup();
    let observed_sup = w.values.iter().map(Real::to_f64).fold(0.0, f64::max);
    let n = vals.len();
    let mut out = BoundedVariantDiagnostic {
        observed_sup,
        distinct_values: n,
        tail_exponent: None,
        realized_d_low: None,
        realized_d_high: None,
        realized_p_low: None,
        realized_p_high: None,
        warning: None,
    };
    if n < MIN_DISTINCT {
        return out;
    }
    let k = n / 4;
    let gap_k = vals[k] - vals[k - 1];
    let gap_2k = vals[2 * k] - vals[2 * k - 1];
    let alpha = if gap_2k > 0.0 && gap_k > 0.0 { (gap_k / gap_2k).log2() } else { f64::INFINITY };
    out.tail_exponent = Some(alpha);

    let low_cut = vals[k];
    let high_cut = vals[n - 1 - k];
    let low: Vec<usize> = w.interior.iter().copied().filter(|&i| w.values[i].to_f64() <= low_cut).collect();
    let high: Vec<usize> = w.interior.iter().copied().filter(|&i| w.values[i].to_f64() >= high_cut).collect();
    let (dl, pl) = min_over(w, &low);
    let (dh, ph) = min_over(w, &high);
    out.realized_d_low = dl;
    out.realized_d_high = dh;
    out.realized_p_low = pl;
    out.realized_p_high = ph;

    if alpha < BOUNDED_ALPHA {
        return out;
    }
    let fades = |lo: Option<f64>, hi: Option<f64>| matches!((lo, hi), (Some(l), Some(h)) if h < FADE_RATIO * l);
    let d_fades = fades(dl, dh);
    let p_fades = fades(pl, ph);
    if d_fades || p_fades {
        let which = match (d_fades, p_fades) {
            (true, true) => format!("d falls to {:.3e} and p to {:.3e}", dh.unwrap(), ph.unwrap()),
            (true, false) => format!("d falls to {:.3e}", dh.unwrap()),
            _ => format!("p falls to {:.3e}", ph.unwrap()),
        };
        out.warning = Some(format!(
            "bounded variant: observed values approach {observed_sup:.6} (gap decay exponent {alpha:.2}) while the realized {which} near the top, so no positive p(v), d(v) can hold there"
        ));
    }
    out
}
