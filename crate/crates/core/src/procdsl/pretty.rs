use std::fmt::Write;

use super::{Expr, Piecewise, SystemSpec, UnOp, Witness};

const PREC_NOT: u8 = 3;
const PREC_NEG: u8 = 7;
const PREC_ATOM: u8 = 8;

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Binary(op, ..) => op.prec(),
        Expr::Unary(UnOp::Not, _) => PREC_NOT,
        Expr::Unary(UnOp::Neg, _) => PREC_NEG,
        _ => PREC_ATOM,
    }
}

fn write_expr(out: &mut String, e: &Expr, min: u8) {
    let wrap = prec(e) < min;
    if wrap {
        out.push('(');
    }
    match e {
        Expr::Num { text, .. } => out.push_str(text),
        Expr::Var(v) => out.push_str(v),
        Expr::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Expr::Unary(UnOp::Neg, a) => {
            out.push('-');
            write_expr(out, a, PREC_NEG);
        }
        Expr::Unary(UnOp::Not, a) => {
            out.push('!');
            write_expr(out, a, PREC_NOT);
        }
        Expr::Binary(op, a, b) => {
            let p = op.prec();
            // comparisons do not chain, so both sides bind tighter
            let left = if p == 4 { p + 1 } else { p };
            write_expr(out, a, left);
            let _ = write!(out, " {} ", op.symbol());
            write_expr(out, b, p + 1);
        }
        Expr::Call(f, args) => {
            out.push_str(f.name());
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(out, a, 0);
            }
            out.push(')');
        }
    }
    if wrap {
        out.push(')');
    }
}

pub(crate) fn expr(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(&mut s, e, 0);
    s
}

fn piecewise(pw: &Piecewise) -> String {
    let mut s = String::from("piecewise { ");
    for (b, e) in &pw.pieces {
        let _ = write!(s, "v <= {}: {}; ", expr(b), expr(e));
    }
    let _ = write!(s, "else: {} }}", expr(&pw.otherwise));
    s
}

/// Canonical source text; `parse(pretty(s)) == s`.
pub fn pretty(spec: &SystemSpec) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "system {}", spec.name);
    for v in &spec.vars {
        let _ = writeln!(s, "var {v} : int");
    }
    let _ = writeln!(s, "target : {}", expr(&spec.target));
    for r in &spec.rules {
        let _ = writeln!(s, "rule when {} :", expr(&r.guard));
        for c in &r.choices {
            s.push_str("  choice :\n");
            for b in &c.branches {
                let mut p = expr(&b.prob);
                if p.starts_with('-') {
                    p = format!("({p})");
                }
                let ups: Vec<String> = b.updates.iter().map(|(v, e)| format!("{v} := {}", expr(e))).collect();
                let _ = writeln!(s, "    {p} -> {}", ups.join(", "));
            }
        }
    }
    if let Some(v) = &spec.variant {
        let _ = writeln!(s, "variant : {}", expr(v));
    }
    for w in &spec.witnesses {
        match w {
            Witness::Pd { p, d } => {
                let _ = writeln!(s, "pd : p = {}, d = {}", piecewise(p), piecewise(d));
            }
            Witness::Nabla(n) => {
                let _ = writeln!(s, "nabla : {}", piecewise(n));
            }
            Witness::Bound(b) => {
                let _ = writeln!(s, "bound : {}", expr(b));
            }
        }
    }
    for t in &spec.inits {
        let vals: Vec<String> = t.iter().map(expr).collect();
        let _ = writeln!(s, "init : {}", vals.join(", "));
    }
    s
}
