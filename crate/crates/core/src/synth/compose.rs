//! Pasting finitely many ∇-certified components into a master system.

use std::sync::Arc;

use crate::model::{Distribution, ModelError, NablaWitness, Real, StateId, TransitionSystem, Variant};

#[derive(Clone, Debug)]
pub struct Part {
    pub system: TransitionSystem,
    pub variant: Variant,
    pub nabla: NablaWitness,
}

/// A component entered when the master reaches `attach_at`, one of its
/// target states; the walk continues from `start`.
#[derive(Clone, Debug)]
pub struct Component {
    pub part: Part,
    pub start: StateId,
    pub attach_at: StateId,
}

#[derive(Clone, Debug)]
pub struct Composite {
    pub system: TransitionSystem,
    pub variant: Variant,
    pub nabla: NablaWitness,
    /// `max_n V_n(start_n)`, added to the master's variant.
    pub v_c: Real,
}

/// Composite states are `[tag, coords…]` padded with zeros; tag 0 is the
/// master and tag `n ≥ 1` the `n`-th component.
fn tagged(tag: usize, s: &StateId, width: usize) -> StateId {
    let mut c = Vec::with_capacity(width + 1);
    c.push(tag as i64);
    c.extend_from_slice(s.coords());
    c.resize(width + 1, 0);
    StateId::new(c)
}

fn untag(s: &StateId, arity: usize) -> (usize, StateId) {
    (s.head() as usize, StateId::from(&s.coords()[1..=arity]))
}

/// Composes the certificates: the master's variant is shifted up by
/// `v_C` and `∇⊓` is the pointwise minimum of all the ∇ witnesses. With
/// no components the master is returned unchanged.
pub fn compose_nabla(master: &Part, components: &[Component]) -> Result<Composite, ModelError> {
    if components.is_empty() {
        return Ok(Composite {
            system: master.system.clone(),
            variant: master.variant.clone(),
            nabla: master.nabla.clone(),
            v_c: Real::zero(),
        });
    }
    for c in components {
        if !master.system.is_target(&c.attach_at) {
            return Err(ModelError::Eval(format!("attach point {} is not a master target", c.attach_at)));
        }
        if c.part.system.is_target(&c.start) {
            return Err(ModelError::Eval(format!("component start {} is a target", c.start)));
        }
    }
    let mut v_c = Real::zero();
    for c in components {
        v_c = v_c.max(c.part.variant.eval(&c.start)?);
    }
    let mut nabla = master.nabla.nabla.clone();
    for c in components {
        nabla = nabla.pointwise_min(&c.part.nabla.nabla);
    }

    let width = components.iter().map(|c| c.part.system.arity()).chain([master.system.arity()]).max().unwrap();
    let parts: Arc<Vec<Part>> = Arc::new(
        std::iter::once(master.clone()).chain(components.iter().map(|c| c.part.clone())).collect(),
    );
    let attach: Arc<Vec<(StateId, usize, StateId)>> = Arc::new(
        components.iter().enumerate().map(|(n, c)| (c.attach_at.clone(), n + 1, c.start.clone())).collect(),
    );

    let redirect = {
        let attach = attach.clone();
        move |tag: usize, s: &StateId| -> StateId {
            if tag == 0 {
                if let Some((_, n, start)) = attach.iter().find(|(a, _, _)| a == s) {
                    return tagged(*n, start, width);
                }
            }
            tagged(tag, s, width)
        }
    };
    let redirect = Arc::new(redirect);

    let is_target = {
        let parts = parts.clone();
        move |s: &StateId| match parts.get(s.head() as usize) {
            Some(part) => part.system.is_target(&untag(s, part.system.arity()).1),
            None => false,
        }
    };
    let transitions = {
        let parts = parts.clone();
        let redirect = redirect.clone();
        move |s: &StateId| -> Result<Vec<Distribution>, ModelError> {
            let tag = s.head() as usize;
            let (_, inner) = untag(s, parts[tag].system.arity());
            parts[tag]
                .system
                .transitions(&inner)?
                .into_iter()
                .map(|d| {
                    Distribution::from_weights(
                        d.iter().map(|(t, p)| (redirect(tag, t), p.clone())),
                        d.normalization_tolerance(),
                    )
                })
                .collect()
        }
    };
    let initial: Vec<StateId> = master.system.initial_states().iter().map(|s| redirect(0, s)).collect();
    let system = TransitionSystem::new(
        format!("{}+{} components", master.system.label(), components.len()),
        width + 1,
        is_target,
        transitions,
        initial,
    )?;

    let variant = {
        let parts = parts.clone();
        let v_c = v_c.clone();
        Variant::fallible("composite", width + 1, move |s| {
            let tag = s.head() as usize;
            let part = parts.get(tag).ok_or_else(|| ModelError::Eval(format!("unknown tag in {s}")))?;
            let (_, inner) = untag(s, part.system.arity());
            if tag == 0 && !part.system.is_target(&inner) {
                Ok(part.variant.eval(&inner)? + &v_c)
            } else {
                part.variant.eval(&inner)
            }
        })
    };
    Ok(Composite { system, variant, nabla: NablaWitness::new(nabla)?, v_c })
}
