use std::collections::HashSet;

use super::elaborate::{compile, Value};
use super::lexer::{lex, Tok, Token};
use super::{BinOp, Branch, Choice, DslError, Expr, Func, Piecewise, Rule, SystemSpec, UnOp, Witness, KEYWORDS};
use crate::model::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Ty {
    Num,
    Bool,
}

impl Ty {
    fn name(self) -> &'static str {
        match self {
            Ty::Num => "numeric",
            Ty::Bool => "boolean",
        }
    }
}

/// Which identifiers an expression may mention.
#[derive(Clone, Copy)]
enum Scope {
    State,
    Constant,
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    vars: Vec<String>,
}

pub fn parse(src: &str) -> Result<SystemSpec, DslError> {
    let mut p = Parser { toks: lex(src)?, pos: 0, vars: Vec::new() };
    let spec = p.system()?;
    p.expect_eof()?;
    Ok(spec)
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn err(&self, msg: impl Into<String>) -> DslError {
        let t = self.peek();
        DslError::new(t.line, t.col, msg)
    }

    fn at_err(&self, t: &Token, msg: impl Into<String>) -> DslError {
        DslError::new(t.line, t.col, msg)
    }

    fn describe(t: &Tok) -> String {
        match t {
            Tok::Ident(s) => format!("'{s}'"),
            Tok::Num(s) => format!("number {s}"),
            Tok::Sym(s) => format!("'{s}'"),
            Tok::Eof => "end of input".into(),
        }
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(&self.peek().tok, Tok::Sym(x) if *x == s)
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(x) if x == w)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.next();
            true
        } else {
            false
        }
    }

    fn sym(&mut self, s: &str) -> Result<(), DslError> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            Err(self.err(format!("expected '{s}', found {}", Self::describe(&self.peek().tok))))
        }
    }

    fn word(&mut self, w: &str) -> Result<(), DslError> {
        if self.is_word(w) {
            self.next();
            Ok(())
        } else {
            Err(self.err(format!("expected '{w}', found {}", Self::describe(&self.peek().tok))))
        }
    }

    fn ident(&mut self) -> Result<(String, Token), DslError> {
        let t = self.next();
        match &t.tok {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => Ok((s.clone(), t.clone())),
            other => Err(self.at_err(&t, format!("expected an identifier, found {}", Self::describe(other)))),
        }
    }

    fn expect_eof(&self) -> Result<(), DslError> {
        match &self.peek().tok {
            Tok::Eof => Ok(()),
            t => Err(self.err(format!("unexpected {} after the init line", Self::describe(t)))),
        }
    }

    fn system(&mut self) -> Result<SystemSpec, DslError> {
        self.word("system")?;
        let (name, _) = self.ident()?;
        let mut seen = HashSet::new();
        while self.is_word("var") {
            self.next();
            let (v, tok) = self.ident()?;
            if Func::from_name(&v).is_some() {
                return Err(self.at_err(&tok, format!("'{v}' cannot be a variable name")));
            }
            if !seen.insert(v.clone()) {
                return Err(self.at_err(&tok, format!("duplicate variable '{v}'")));
            }
            self.sym(":")?;
            self.word("int")?;
            self.eat_sym(";");
            self.vars.push(v);
        }
        if self.vars.is_empty() {
            return Err(self.err("at least one 'var' declaration is needed"));
        }
        self.word("target")?;
        self.sym(":")?;
        let target = self.typed(Scope::State, Ty::Bool)?;
        self.eat_sym(";");
        let mut rules = Vec::new();
        while self.is_word("rule") {
            rules.push(self.rule()?);
        }
        if rules.is_empty() {
            return Err(self.err("at least one 'rule' is needed"));
        }
        let variant = if self.is_word("variant") {
            self.next();
            self.sym(":")?;
            let e = self.typed(Scope::State, Ty::Num)?;
            self.eat_sym(";");
            Some(e)
        } else {
            None
        };
        let mut witnesses = Vec::new();
        loop {
            if self.is_word("pd") {
                self.next();
                self.sym(":")?;
                self.word("p")?;
                self.sym("=")?;
                let p = self.piecewise()?;
                self.sym(",")?;
                self.word("d")?;
                self.sym("=")?;
                let d = self.piecewise()?;
                witnesses.push(Witness::Pd { p, d });
            } else if self.is_word("nabla") {
                self.next();
                self.sym(":")?;
                witnesses.push(Witness::Nabla(self.piecewise()?));
            } else if self.is_word("bound") {
                self.next();
                self.sym(":")?;
                witnesses.push(Witness::Bound(self.typed(Scope::Constant, Ty::Num)?));
            } else {
                break;
            }
            self.eat_sym(";");
        }
        let mut inits = Vec::new();
        while self.is_word("init") {
            let at = self.next();
            self.sym(":")?;
            let mut tuple = vec![self.typed(Scope::Constant, Ty::Num)?];
            while self.eat_sym(",") {
                tuple.push(self.typed(Scope::Constant, Ty::Num)?);
            }
            if tuple.len() != self.vars.len() {
                return Err(self.at_err(
                    &at,
                    format!("init gives {} values for {} variables", tuple.len(), self.vars.len()),
                ));
            }
            self.eat_sym(";");
            inits.push(tuple);
        }
        if inits.is_empty() {
            return Err(self.err(format!("expected 'init', found {}", Self::describe(&self.peek().tok))));
        }
        Ok(SystemSpec { name, vars: self.vars.clone(), target, rules, variant, witnesses, inits })
    }

    fn rule(&mut self) -> Result<Rule, DslError> {
        self.word("rule")?;
        self.word("when")?;
        let guard = self.typed(Scope::State, Ty::Bool)?;
        self.sym(":")?;
        let mut choices = Vec::new();
        while self.is_word("choice") {
            let at = self.next();
            self.sym(":")?;
            let mut branches = Vec::new();
            while !self.at_section_end() {
                branches.push(self.branch()?);
            }
            if branches.is_empty() {
                return Err(self.at_err(&at, "a choice needs at least one branch"));
            }
            check_constant_sum(&branches).map_err(|m| self.at_err(&at, m))?;
            choices.push(Choice { branches });
        }
        if choices.is_empty() {
            return Err(self.err("a rule needs at least one 'choice'"));
        }
        Ok(Rule { guard, choices })
    }

    fn at_section_end(&self) -> bool {
        matches!(&self.peek().tok, Tok::Eof)
            || ["choice", "rule", "variant", "pd", "nabla", "bound", "init"].iter().any(|w| self.is_word(w))
    }

    fn branch(&mut self) -> Result<Branch, DslError> {
        let prob = self.typed(Scope::State, Ty::Num)?;
        self.sym("->")?;
        let mut updates: Vec<(String, Expr)> = Vec::new();
        loop {
            let (v, tok) = self.ident()?;
            if !self.vars.contains(&v) {
                return Err(self.at_err(&tok, format!("unknown identifier '{v}'")));
            }
            if updates.iter().any(|(u, _)| *u == v) {
                return Err(self.at_err(&tok, format!("'{v}' is assigned twice in one branch")));
            }
            self.sym(":=")?;
            updates.push((v, self.typed(Scope::State, Ty::Num)?));
            if !self.eat_sym(",") {
                break;
            }
        }
        self.eat_sym(";");
        Ok(Branch { prob, updates })
    }

    fn piecewise(&mut self) -> Result<Piecewise, DslError> {
        self.word("piecewise")?;
        self.sym("{")?;
        let mut pieces = Vec::new();
        while !self.is_word("else") {
            self.word("v")?;
            self.sym("<=")?;
            let b = self.typed(Scope::Constant, Ty::Num)?;
            self.sym(":")?;
            let e = self.typed(Scope::Constant, Ty::Num)?;
            self.sym(";")?;
            pieces.push((b, e));
        }
        self.word("else")?;
        self.sym(":")?;
        let otherwise = self.typed(Scope::Constant, Ty::Num)?;
        self.eat_sym(";");
        self.sym("}")?;
        Ok(Piecewise { pieces, otherwise })
    }

    fn typed(&mut self, scope: Scope, want: Ty) -> Result<Expr, DslError> {
        let at = self.peek().clone();
        let (e, ty) = self.or(scope)?;
        if ty != want {
            return Err(self.at_err(&at, format!("expected a {} expression, found a {} one", want.name(), ty.name())));
        }
        Ok(e)
    }

    fn binary_level(
        &mut self,
        scope: Scope,
        ops: &[(&str, BinOp)],
        operand: Ty,
        result: Ty,
        sub: fn(&mut Self, Scope) -> Result<(Expr, Ty), DslError>,
        chain: bool,
    ) -> Result<(Expr, Ty), DslError> {
        let at = self.peek().clone();
        let (mut lhs, mut ty) = sub(self, scope)?;
        loop {
            let Some(&(_, op)) = ops.iter().find(|(s, _)| self.is_sym(s)) else { break };
            let op_tok = self.next();
            let rhs_at = self.peek().clone();
            let (rhs, rty) = sub(self, scope)?;
            if ty != operand {
                return Err(self.at_err(&at, format!("'{}' needs {} operands", op.symbol(), operand.name())));
            }
            if rty != operand {
                return Err(self.at_err(&rhs_at, format!("'{}' needs {} operands", op.symbol(), operand.name())));
            }
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
            ty = result;
            if !chain {
                if ops.iter().any(|(s, _)| self.is_sym(s)) {
                    return Err(self.at_err(&op_tok, "comparisons do not chain; use parentheses"));
                }
                break;
            }
        }
        Ok((lhs, ty))
    }

    fn or(&mut self, scope: Scope) -> Result<(Expr, Ty), DslError> {
        self.binary_level(scope, &[("||", BinOp::Or)], Ty::Bool, Ty::Bool, Self::and, true)
    }

    fn and(&mut self, scope: Scope) -> Result<(Expr, Ty), DslError> {
        self.binary_level(scope, &[("&&", BinOp::And)], Ty::Bool, Ty::Bool, Self::not, true)
    }

    fn not(&mut self, scope: Scope) -> Result<(Expr, Ty), DslError> {
        if self.is_sym("!") {
            let at = self.next();
            let (e, ty) = self.not(scope)?;
            if ty != Ty::Bool {
                return Err(self.at_err(&at, "'!' needs a boolean operand"));
            }
            return Ok((Expr::Unary(UnOp::Not, Box::new(e)), Ty::Bool));
        }
        self.cmp(scope)
    }

    fn cmp(&mut self, scope: Scope) -> Result<(Expr, Ty), DslError> {
        let ops = [
            ("==", BinOp::Eq),
            ("!=", BinOp::Ne),
            ("<=", BinOp::Le),
            (">=", BinOp::Ge),
            ("<", BinOp::Lt),
            (">", BinOp::Gt),
        ];
        self.binary_level(scope, &ops, Ty::Num, Ty::Bool, Self::add, false)
    }

    fn add(&mut self, scope: Scope) -> Result<(Expr, Ty), DslError> {
        self.binary_level(scope, &[("+", BinOp::Add), ("-", BinOp::Sub)], Ty::Num, Ty::Num, Self::mul, true)
    }

    fn mul(&mut self, scope: Scope) -> Result<(Expr, Ty), DslError> {
        self.binary_level(scope, &[("*", BinOp::Mul), ("/", BinOp::Div)], Ty::Num, Ty::Num, Self::unary, true)
    }

    fn unary(&mut self, scope: Scope) -> Result<(Expr, Ty), DslError> {
        if self.is_sym("-") {
            let at = self.next();
            let (e, ty) = self.unary(scope)?;
            if ty != Ty::Num {
                return Err(self.at_err(&at, "unary '-' needs a numeric operand"));
            }
            return Ok((Expr::Unary(UnOp::Neg, Box::new(e)), Ty::Num));
        }
        self.atom(scope)
    }

    fn atom(&mut self, scope: Scope) -> Result<(Expr, Ty), DslError> {
        let t = self.next();
        match &t.tok {
            Tok::Num(s) => {
                let value: Real = s.parse().map_err(|_| self.at_err(&t, format!("bad number {s}")))?;
                Ok((Expr::Num { text: s.clone(), value }, Ty::Num))
            }
            Tok::Sym("(") => {
                let r = self.or(scope)?;
                self.sym(")")?;
                Ok(r)
            }
            Tok::Ident(w) if w == "true" || w == "false" => Ok((Expr::Bool(w == "true"), Ty::Bool)),
            Tok::Ident(w) if self.is_sym("(") && Func::from_name(w).is_some() => {
                let f = Func::from_name(w).unwrap();
                self.next();
                let mut args = Vec::new();
                if !self.is_sym(")") {
                    loop {
                        let at = self.peek().clone();
                        let (a, ty) = self.or(scope)?;
                        if ty != Ty::Num {
                            return Err(self.at_err(&at, format!("{w} takes numeric arguments")));
                        }
                        args.push(a);
                        if !self.eat_sym(",") {
                            break;
                        }
                    }
                }
                self.sym(")")?;
                if args.len() != f.arity() {
                    return Err(self.at_err(&t, format!("{w} takes {} argument(s), got {}", f.arity(), args.len())));
                }
                Ok((Expr::Call(f, args), Ty::Num))
            }
            Tok::Ident(w) if !KEYWORDS.contains(&w.as_str()) => match scope {
                Scope::State if self.vars.contains(w) => Ok((Expr::Var(w.clone()), Ty::Num)),
                Scope::Constant if self.vars.contains(w) => {
                    Err(self.at_err(&t, format!("'{w}' is a state variable; a constant is expected here")))
                }
                _ => Err(self.at_err(&t, format!("unknown identifier '{w}'"))),
            },
            other => Err(self.at_err(&t, format!("expected an expression, found {}", Self::describe(other)))),
        }
    }
}

/// When every branch probability is a constant, their sum must be 1.
fn check_constant_sum(branches: &[Branch]) -> Result<(), String> {
    if !branches.iter().all(|b| b.prob.is_constant()) {
        return Ok(());
    }
    let mut sum = Real::zero();
    for b in branches {
        match compile(&b.prob, &[]).eval(&[]) {
            Ok(Value::Num(x)) => sum = sum + x,
            Ok(Value::Bool(_)) => unreachable!("typed as numeric"),
            Err(m) => return Err(m),
        }
    }
    if sum != Real::one() {
        return Err(format!("branch probabilities sum to {} ≠ 1", crate::model::dsl_number(&sum)));
    }
    Ok(())
}
