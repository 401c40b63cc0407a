//! Arithmetic expressions for coefficient functions and initial data.
//!
//! The language is deliberately small: real literals, the variables `u`, `v`
//! and `x`, the four binary operators, unary minus, integer powers written
//! `a^n`, and the functions `exp`, `ln`, `sin`, `cos`, `sqrt`. Parsing yields
//! an immutable [`Expr`] tree which can be differentiated symbolically and
//! evaluated directly or through a flattened [`Program`].

mod diff;
mod eval;
mod parse;

use std::fmt;

pub use eval::{Bindings, EvalError, Program};
pub use parse::{parse, ParseError};

/// One of the three identifiers an expression may reference.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    U,
    V,
    X,
}

impl Var {
    pub const ALL: [Var; 3] = [Var::U, Var::V, Var::X];

    pub fn name(self) -> &'static str {
        match self {
            Var::U => "u",
            Var::V => "v",
            Var::X => "x",
        }
    }

    pub fn from_name(name: &str) -> Option<Var> {
        match name {
            "u" => Some(Var::U),
            "v" => Some(Var::V),
            "x" => Some(Var::X),
            _ => None,
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Ln,
    Sin,
    Cos,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        match name {
            "exp" => Some(Func::Exp),
            "ln" => Some(Func::Ln),
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "sqrt" => Some(Func::Sqrt),
            _ => None,
        }
    }
}

/// Expression tree. Literals are kept as `f64` regardless of the scalar type
/// used for evaluation.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(Var),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    /// Integer power with a literal nonnegative exponent.
    Pow(Box<Expr>, u32),
    Call(Func, Box<Expr>),
}

impl Expr {
    /// Returns true if `var` occurs anywhere in the tree.
    pub fn references(&self, var: Var) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(w) => *w == var,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.references(var),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.references(var) || b.references(var)
            }
        }
    }

    /// Variables referenced by the expression, in `u, v, x` order.
    pub fn variables(&self) -> Vec<Var> {
        Var::ALL.into_iter().filter(|&w| self.references(w)).collect()
    }

    /// The literal value if the whole tree is a constant.
    pub fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) => 1,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => 1 + a.size(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                1 + a.size() + b.size()
            }
        }
    }
}

/// Renders a fully parenthesized form that [`parse`] accepts and that
/// evaluates identically to the original tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => {
                if *c < 0.0 || (*c == 0.0 && c.is_sign_negative()) {
                    write!(f, "(-{:?})", -c)
                } else {
                    write!(f, "{:?}", c)
                }
            }
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, n) => match **a {
                Expr::Const(c) if c >= 0.0 => write!(f, "({a})^{n}"),
                _ => write!(f, "{a}^{n}"),
            },
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}
