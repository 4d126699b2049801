use std::sync::Arc;

use super::{BinOp, Expr, Func, Piecewise, SystemSpec, UnOp, Witness};
use crate::model::{
    dsl_number, Distribution, ModelError, MonotoneStepFn, NablaWitness, PdWitness, Real, StateId, TransitionSystem,
    Variant,
};

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Value {
    Num(Real),
    Bool(bool),
}

/// An expression with variables resolved to coordinate indices.
#[derive(Clone, Debug)]
pub(crate) enum CExpr {
    Const(Value),
    Var(usize),
    Unary(UnOp, Box<CExpr>),
    Binary(BinOp, Box<CExpr>, Box<CExpr>),
    Call(Func, Vec<CExpr>),
}

pub(crate) fn compile(e: &Expr, vars: &[String]) -> CExpr {
    match e {
        Expr::Num { value, .. } => CExpr::Const(Value::Num(value.clone())),
        Expr::Bool(b) => CExpr::Const(Value::Bool(*b)),
        Expr::Var(v) => CExpr::Var(vars.iter().position(|x| x == v).expect("parser resolves variables")),
        Expr::Unary(op, a) => CExpr::Unary(*op, Box::new(compile(a, vars))),
        Expr::Binary(op, a, b) => CExpr::Binary(*op, Box::new(compile(a, vars)), Box::new(compile(b, vars))),
        Expr::Call(f, args) => CExpr::Call(*f, args.iter().map(|a| compile(a, vars)).collect()),
    }
}

impl CExpr {
    fn num(&self, s: &[i64]) -> Result<Real, String> {
        match self.eval(s)? {
            Value::Num(x) => Ok(x),
            Value::Bool(_) => Err("expected a number, got a boolean".into()),
        }
    }

    fn truth(&self, s: &[i64]) -> Result<bool, String> {
        match self.eval(s)? {
            Value::Bool(b) => Ok(b),
            Value::Num(_) => Err("expected a boolean, got a number".into()),
        }
    }

    pub(crate) fn eval(&self, s: &[i64]) -> Result<Value, String> {
        Ok(match self {
            CExpr::Const(v) => v.clone(),
            CExpr::Var(i) => Value::Num(Real::int(s[*i])),
            CExpr::Unary(UnOp::Neg, a) => Value::Num(-a.num(s)?),
            CExpr::Unary(UnOp::Not, a) => Value::Bool(!a.truth(s)?),
            CExpr::Binary(BinOp::And, a, b) => Value::Bool(a.truth(s)? && b.truth(s)?),
            CExpr::Binary(BinOp::Or, a, b) => Value::Bool(a.truth(s)? || b.truth(s)?),
            CExpr::Binary(op, a, b) => {
                let (x, y) = (a.num(s)?, b.num(s)?);
                match op {
                    BinOp::Add => Value::Num(x + y),
                    BinOp::Sub => Value::Num(x - y),
                    BinOp::Mul => Value::Num(x * y),
                    BinOp::Div if y.is_zero() => return Err(format!("division by zero ({} / 0)", dsl_number(&x))),
                    BinOp::Div => Value::Num(x / y),
                    BinOp::Eq => Value::Bool(x == y),
                    BinOp::Ne => Value::Bool(x != y),
                    BinOp::Lt => Value::Bool(x < y),
                    BinOp::Le => Value::Bool(x <= y),
                    BinOp::Gt => Value::Bool(x > y),
                    BinOp::Ge => Value::Bool(x >= y),
                    BinOp::And | BinOp::Or => unreachable!(),
                }
            }
            CExpr::Call(f, args) => {
                let xs = args.iter().map(|a| a.num(s)).collect::<Result<Vec<_>, _>>()?;
                match f {
                    Func::Abs => Value::Num(xs[0].abs()),
                    Func::Min => Value::Num(xs[0].clone().min(xs[1].clone())),
                    Func::Max => Value::Num(xs[0].clone().max(xs[1].clone())),
                    Func::Pow => {
                        let k = xs[1]
                            .as_i64()
                            .and_then(|k| i32::try_from(k).ok())
                            .ok_or_else(|| format!("pow needs a small integer exponent, got {}", dsl_number(&xs[1])))?;
                        if xs[0].is_zero() && k < 0 {
                            return Err("pow(0, k) with k < 0".into());
                        }
                        Value::Num(xs[0].powi(k))
                    }
                }
            }
        })
    }
}

struct CRule {
    guard: CExpr,
    choices: Vec<Vec<(CExpr, Vec<(usize, CExpr)>)>>,
}

struct Program {
    target: CExpr,
    rules: Vec<CRule>,
}

impl Program {
    fn transitions(&self, s: &StateId) -> Result<Vec<Distribution>, ModelError> {
        let c = s.coords();
        fn ev<T>(s: &StateId, r: Result<T, String>) -> Result<T, ModelError> {
            r.map_err(|m| ModelError::Eval(format!("at state {s}: {m}")))
        }
        for r in &self.rules {
            if !ev(s, r.guard.truth(c))? {
                continue;
            }
            let mut out = Vec::with_capacity(r.choices.len());
            for branches in &r.choices {
                let mut support: Vec<(StateId, Real)> = Vec::with_capacity(branches.len());
                let mut sum = Real::zero();
                for (prob, updates) in branches {
                    let p = ev(s, prob.num(c))?;
                    if p.is_negative() {
                        return Err(ModelError::BadProbability(format!("{} at state {s}", dsl_number(&p))));
                    }
                    sum = sum + &p;
                    if p.is_zero() {
                        continue;
                    }
                    let mut next = c.to_vec();
                    for (i, e) in updates {
                        let x = ev(s, e.num(c))?;
                        next[*i] = x.as_i64().ok_or_else(|| {
                            ModelError::Eval(format!("at state {s}: update gives non-integer {}", dsl_number(&x)))
                        })?;
                    }
                    let t = StateId::from(next.as_slice());
                    match support.iter_mut().find(|(u, _)| *u == t) {
                        Some((_, q)) => *q = &*q + &p,
                        None => support.push((t, p)),
                    }
                }
                if sum != Real::one() {
                    return Err(ModelError::NotNormalized(format!(
                        "branch probabilities sum to {} ≠ 1 at state {s}",
                        dsl_number(&sum)
                    )));
                }
                out.push(Distribution::exact(support)?);
            }
            return Ok(out);
        }
        Err(ModelError::NoTransitions(s.clone()))
    }
}

/// A compiled system together with whatever the source declared.
#[derive(Clone, Debug)]
pub struct Elaborated {
    pub name: String,
    pub system: TransitionSystem,
    pub variant: Option<Variant>,
    pub pd: Option<PdWitness>,
    pub nabla: Option<NablaWitness>,
    /// Declared refutation bound; also set as the variant's `declared_sup`.
    pub bound: Option<Real>,
}

fn constant(e: &Expr) -> Result<Real, ModelError> {
    match compile(e, &[]).eval(&[]) {
        Ok(Value::Num(x)) => Ok(x),
        Ok(Value::Bool(_)) => Err(ModelError::Eval(format!("{e} is not numeric"))),
        Err(m) => Err(ModelError::Eval(m)),
    }
}

fn step_fn(pw: &Piecewise) -> Result<MonotoneStepFn, ModelError> {
    let mut breakpoints = Vec::with_capacity(pw.pieces.len());
    let mut values = Vec::with_capacity(pw.pieces.len() + 1);
    for (b, e) in &pw.pieces {
        breakpoints.push(constant(b)?);
        values.push(constant(e)?);
    }
    values.push(constant(&pw.otherwise)?);
    MonotoneStepFn::new(breakpoints, values)
}

pub fn elaborate(spec: &SystemSpec) -> Result<Elaborated, ModelError> {
    let vars = &spec.vars;
    let program = Arc::new(Program {
        target: compile(&spec.target, vars),
        rules: spec
            .rules
            .iter()
            .map(|r| CRule {
                guard: compile(&r.guard, vars),
                choices: r
                    .choices
                    .iter()
                    .map(|ch| {
                        ch.branches
                            .iter()
                            .map(|b| {
                                let ups = b
                                    .updates
                                    .iter()
                                    .map(|(v, e)| (vars.iter().position(|x| x == v).unwrap(), compile(e, vars)))
                                    .collect();
                                (compile(&b.prob, vars), ups)
                            })
                            .collect()
                    })
                    .collect(),
            })
            .collect(),
    });
    let mut inits = Vec::with_capacity(spec.inits.len());
    for tuple in &spec.inits {
        let coords = tuple
            .iter()
            .map(|e| {
                let x = constant(e)?;
                x.as_i64().ok_or_else(|| ModelError::Eval(format!("initial value {e} is not an integer")))
            })
            .collect::<Result<Vec<i64>, _>>()?;
        inits.push(StateId::new(coords));
    }
    let (pt, pr) = (program.clone(), program);
    let system = TransitionSystem::new(
        spec.name.clone(),
        vars.len(),
        move |s| pt.target.truth(s.coords()).unwrap_or(false),
        move |s| pr.transitions(s),
        inits,
    )?;

    let mut pd = None;
    let mut nabla = None;
    let mut bound = None;
    for w in &spec.witnesses {
        let dup = |what: &str| ModelError::BadWitness(format!("more than one {what} witness"));
        match w {
            Witness::Pd { p, d } => {
                if pd.is_some() {
                    return Err(dup("pd"));
                }
                pd = Some(PdWitness::new(step_fn(p)?, step_fn(d)?)?);
            }
            Witness::Nabla(n) => {
                if nabla.is_some() {
                    return Err(dup("nabla"));
                }
                nabla = Some(NablaWitness::new(step_fn(n)?)?);
            }
            Witness::Bound(b) => {
                if bound.is_some() {
                    return Err(dup("bound"));
                }
                bound = Some(constant(b)?);
            }
        }
    }
    let variant = spec.variant.as_ref().map(|e| {
        let c = Arc::new(compile(e, vars));
        let v = Variant::fallible(format!("{e}"), vars.len(), move |s: &StateId| {
            c.num(s.coords()).map_err(|m| ModelError::Eval(format!("variant at state {s}: {m}")))
        });
        match &bound {
            Some(b) => v.with_declared_sup(b.clone()),
            None => v,
        }
    });
    Ok(Elaborated { name: spec.name.clone(), system, variant, pd, nabla, bound })
}
