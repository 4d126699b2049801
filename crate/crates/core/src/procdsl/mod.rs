//! The `.acts` description language: guarded rules over integer state
//! variables, an optional variant, and optional witnesses.
//!
//! ```text
//! system symmetric-walk
//! var s : int
//! target : s == 0
//! rule when s != 0 :
//!   choice :
//!     1/2 -> s := s + 1
//!     1/2 -> s := s - 1
//! variant : abs(s)
//! pd : p = piecewise { else : 1/2 }, d = piecewise { else : 1 }
//! init : 1
//! ```

mod elaborate;
mod lexer;
mod parser;
mod pretty;

use std::fmt;

use crate::model::Real;

pub use elaborate::{elaborate, Elaborated};
pub use parser::parse;
pub use pretty::pretty;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{col}: {msg}")]
pub struct DslError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

impl DslError {
    pub(crate) fn new(line: usize, col: usize, msg: impl Into<String>) -> Self {
        DslError { line, col, msg: msg.into() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SystemSpec {
    pub name: String,
    pub vars: Vec<String>,
    pub target: Expr,
    pub rules: Vec<Rule>,
    pub variant: Option<Expr>,
    pub witnesses: Vec<Witness>,
    /// One tuple per initial state, in variable order.
    pub inits: Vec<Vec<Expr>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Rule {
    pub guard: Expr,
    pub choices: Vec<Choice>,
}

/// One demonic option.
#[derive(Clone, Debug, PartialEq)]
pub struct Choice {
    pub branches: Vec<Branch>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    pub prob: Expr,
    /// Simultaneous; unassigned variables keep their value.
    pub updates: Vec<(String, Expr)>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Witness {
    Pd { p: Piecewise, d: Piecewise },
    Nabla(Piecewise),
    /// Declared bound `B` of a refutation variant.
    Bound(Expr),
}

/// `piecewise { v <= b₁ : e₁; …; else : e }` with constant expressions.
#[derive(Clone, Debug, PartialEq)]
pub struct Piecewise {
    pub pieces: Vec<(Expr, Expr)>,
    pub otherwise: Expr,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Or,
    And,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    pub(crate) fn symbol(self) -> &'static str {
        match self {
            BinOp::Or => "||",
            BinOp::And => "&&",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }

    /// Binding strength; higher binds tighter.
    pub(crate) fn prec(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div => 6,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Abs,
    Min,
    Max,
    Pow,
}

impl Func {
    pub(crate) fn name(self) -> &'static str {
        match self {
            Func::Abs => "abs",
            Func::Min => "min",
            Func::Max => "max",
            Func::Pow => "pow",
        }
    }

    pub(crate) fn from_name(s: &str) -> Option<Func> {
        match s {
            "abs" => Some(Func::Abs),
            "min" => Some(Func::Min),
            "max" => Some(Func::Max),
            "pow" => Some(Func::Pow),
            _ => None,
        }
    }

    pub(crate) fn arity(self) -> usize {
        match self {
            Func::Abs => 1,
            _ => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    /// Literal as written, with its exact value.
    Num { text: String, value: Real },
    Var(String),
    Bool(bool),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

impl Expr {
    pub fn num(text: &str) -> Expr {
        let value = text.parse().expect("numeric literal");
        Expr::Num { text: text.to_string(), value }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Num { .. } | Expr::Bool(_) => true,
            Expr::Var(_) => false,
            Expr::Unary(_, e) => e.is_constant(),
            Expr::Binary(_, a, b) => a.is_constant() && b.is_constant(),
            Expr::Call(_, args) => args.iter().all(Expr::is_constant),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&pretty::expr(self))
    }
}

pub(crate) const KEYWORDS: &[&str] = &[
    "system", "var", "int", "target", "rule", "when", "choice", "variant", "pd", "nabla", "bound", "piecewise", "else",
    "init", "true", "false",
];
