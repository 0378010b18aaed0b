//! A small arithmetic expression language used for warp functions and
//! custom metric entries.
//!
//! Grammar (standard precedence, `^` binds tightest):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := base ('^' factor)?
//! base   := number | ident | ident '(' expr ')' | '(' expr ')' | '-' base
//! ```
//!
//! Exponents must fold to a constant. Functions: `sin cos exp log sqrt`.
//! Named constants: `pi`, `e`. Any other identifier is a variable.

mod diff;
mod eval;
mod parse;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

pub use eval::{eval, Compiled};
pub use parse::parse;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprError {
    #[error("parse error at byte {offset}: expected {}, found {found}", expected.join(" or "))]
    Parse {
        offset: usize,
        expected: Vec<String>,
        found: String,
    },
    #[error("unknown function `{name}` at byte {offset}")]
    UnknownFunction { name: String, offset: usize },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("expression is not differentiable: {0}")]
    NonDifferentiable(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
}

impl UnaryOp {
    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Exp => "exp",
            UnaryOp::Log => "log",
            UnaryOp::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => UnaryOp::Sin,
            "cos" => UnaryOp::Cos,
            "exp" => UnaryOp::Exp,
            "log" => UnaryOp::Log,
            "sqrt" => UnaryOp::Sqrt,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinaryOp {
    fn symbol(self) -> char {
        match self {
            BinaryOp::Add => '+',
            BinaryOp::Sub => '-',
            BinaryOp::Mul => '*',
            BinaryOp::Div => '/',
            BinaryOp::Pow => '^',
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinaryOp::Add | BinaryOp::Sub => 1,
            BinaryOp::Mul | BinaryOp::Div => 2,
            BinaryOp::Pow => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Ast {
    Const(f64),
    Var(String),
    Unary(UnaryOp, Box<Ast>),
    Binary(BinaryOp, Box<Ast>, Box<Ast>),
}

impl Ast {
    pub fn var(name: impl Into<String>) -> Ast {
        Ast::Var(name.into())
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Ast::Const(c) if *c == 0.0)
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Ast::Const(c) if *c == 1.0)
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Ast::Const(c) => Some(*c),
            _ => None,
        }
    }

    // Smart constructors with 0/1 folding. Constant subtrees are folded only
    // when the result is finite.

    pub fn neg(a: Ast) -> Ast {
        match a {
            Ast::Const(c) => Ast::Const(-c),
            Ast::Unary(UnaryOp::Neg, inner) => *inner,
            a => Ast::Unary(UnaryOp::Neg, Box::new(a)),
        }
    }

    pub fn unary(op: UnaryOp, a: Ast) -> Ast {
        if op == UnaryOp::Neg {
            return Ast::neg(a);
        }
        if let Ast::Const(c) = a {
            let v = eval::apply_unary(op, c);
            if let Ok(v) = v {
                return Ast::Const(v);
            }
        }
        Ast::Unary(op, Box::new(a))
    }

    pub fn add(a: Ast, b: Ast) -> Ast {
        match (a, b) {
            (a, b) if a.is_zero() => b,
            (a, b) if b.is_zero() => a,
            (Ast::Const(x), Ast::Const(y)) => Ast::Const(x + y),
            (a, Ast::Unary(UnaryOp::Neg, b)) => Ast::sub(a, *b),
            (a, b) => Ast::Binary(BinaryOp::Add, Box::new(a), Box::new(b)),
        }
    }

    pub fn sub(a: Ast, b: Ast) -> Ast {
        match (a, b) {
            (a, b) if b.is_zero() => a,
            (a, b) if a.is_zero() => Ast::neg(b),
            (Ast::Const(x), Ast::Const(y)) => Ast::Const(x - y),
            (a, Ast::Unary(UnaryOp::Neg, b)) => Ast::add(a, *b),
            (a, b) => Ast::Binary(BinaryOp::Sub, Box::new(a), Box::new(b)),
        }
    }

    pub fn mul(a: Ast, b: Ast) -> Ast {
        match (a, b) {
            (a, _) if a.is_zero() => Ast::Const(0.0),
            (_, b) if b.is_zero() => Ast::Const(0.0),
            (a, b) if a.is_one() => b,
            (a, b) if b.is_one() => a,
            (Ast::Const(x), Ast::Const(y)) => Ast::Const(x * y),
            (Ast::Const(c), b) if c == -1.0 => Ast::neg(b),
            (a, Ast::Const(c)) if c == -1.0 => Ast::neg(a),
            (Ast::Unary(UnaryOp::Neg, a), b) => Ast::neg(Ast::mul(*a, b)),
            // keep constants on the left
            (a, Ast::Const(c)) => Ast::Binary(BinaryOp::Mul, Box::new(Ast::Const(c)), Box::new(a)),
            (a, b) => Ast::Binary(BinaryOp::Mul, Box::new(a), Box::new(b)),
        }
    }

    pub fn div(a: Ast, b: Ast) -> Ast {
        match (a, b) {
            (a, _) if a.is_zero() => Ast::Const(0.0),
            (a, b) if b.is_one() => a,
            (Ast::Const(x), Ast::Const(y)) if y != 0.0 => Ast::Const(x / y),
            (Ast::Unary(UnaryOp::Neg, a), b) => Ast::neg(Ast::div(*a, b)),
            (a, b) => Ast::Binary(BinaryOp::Div, Box::new(a), Box::new(b)),
        }
    }

    pub fn pow(base: Ast, exponent: f64) -> Ast {
        if exponent == 0.0 {
            return Ast::Const(1.0);
        }
        if exponent == 1.0 {
            return base;
        }
        if let Ast::Const(b) = base {
            let v = b.powf(exponent);
            if v.is_finite() {
                return Ast::Const(v);
            }
        }
        Ast::Binary(BinaryOp::Pow, Box::new(base), Box::new(Ast::Const(exponent)))
    }

    /// Names of all variables, sorted.
    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Ast::Const(_) => {}
            Ast::Var(v) => {
                out.insert(v.clone());
            }
            Ast::Unary(_, a) => a.collect_vars(out),
            Ast::Binary(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Renames every variable through `f`.
    pub fn rename_vars(&self, f: &impl Fn(&str) -> String) -> Ast {
        match self {
            Ast::Const(c) => Ast::Const(*c),
            Ast::Var(v) => Ast::Var(f(v)),
            Ast::Unary(op, a) => Ast::Unary(*op, Box::new(a.rename_vars(f))),
            Ast::Binary(op, a, b) => {
                Ast::Binary(*op, Box::new(a.rename_vars(f)), Box::new(b.rename_vars(f)))
            }
        }
    }

    /// Shifts coordinate variables `x<k>` to `x<k + offset>`; other names are kept.
    pub fn shift_coordinates(&self, offset: usize) -> Ast {
        self.rename_vars(&|name: &str| match coordinate_index(name) {
            Some(k) => coordinate_name(k + offset),
            None => name.to_string(),
        })
    }

    pub fn differentiate(&self, var: &str) -> Ast {
        diff::differentiate(self, var)
    }

    fn is_atomic(&self) -> bool {
        match self {
            Ast::Const(c) => *c >= 0.0,
            Ast::Var(_) => true,
            Ast::Unary(op, _) => *op != UnaryOp::Neg,
            Ast::Binary(..) => false,
        }
    }
}

/// `x1`, `x2`, ... : 0-based index of a coordinate variable.
pub fn coordinate_index(name: &str) -> Option<usize> {
    let digits = name.strip_prefix('x')?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) || digits.starts_with('0') {
        return None;
    }
    digits.parse::<usize>().ok().map(|k| k - 1)
}

/// Name of the 0-based coordinate `k` (`x1` for `k = 0`).
pub fn coordinate_name(k: usize) -> String {
    format!("x{}", k + 1)
}

pub fn coordinate_names(dim: usize) -> Vec<String> {
    (0..dim).map(coordinate_name).collect()
}

impl From<f64> for Ast {
    fn from(c: f64) -> Self {
        Ast::Const(c)
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, child: &Ast, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

impl fmt::Display for Ast {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ast::Const(c) => write!(f, "{c}"),
            Ast::Var(v) => write!(f, "{v}"),
            Ast::Unary(UnaryOp::Neg, a) => {
                write!(f, "-")?;
                write_child(f, a, !a.is_atomic())
            }
            Ast::Unary(op, a) => write!(f, "{}({a})", op.name()),
            Ast::Binary(BinaryOp::Pow, a, b) => {
                write_child(f, a, !a.is_atomic())?;
                write!(f, "^")?;
                write_child(f, b, !b.is_atomic())
            }
            Ast::Binary(op, a, b) => {
                let p = op.precedence();
                let left_parens = match a.as_ref() {
                    Ast::Binary(lop, ..) => lop.precedence() < p,
                    Ast::Const(c) => *c < 0.0 && p > 1,
                    _ => false,
                };
                let right_parens = match b.as_ref() {
                    // operators are left-associative; keep right nesting so floats round alike
                    Ast::Binary(rop, ..) => rop.precedence() <= p,
                    Ast::Const(c) => *c < 0.0,
                    Ast::Unary(UnaryOp::Neg, _) => true,
                    _ => false,
                };
                write_child(f, a, left_parens)?;
                match op {
                    BinaryOp::Add | BinaryOp::Sub => write!(f, " {} ", op.symbol())?,
                    _ => write!(f, "{}", op.symbol())?,
                }
                write_child(f, b, right_parens)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coordinate_names_round_trip() {
        assert_eq!(coordinate_index("x1"), Some(0));
        assert_eq!(coordinate_index("x12"), Some(11));
        assert_eq!(coordinate_index("x0"), None);
        assert_eq!(coordinate_index("y1"), None);
        assert_eq!(coordinate_name(3), "x4");
    }

    #[test]
    fn shift_renames_only_coordinates() {
        let a = parse("x1*x2 + t").unwrap();
        let b = a.shift_coordinates(2);
        assert_eq!(b.variables().into_iter().collect::<Vec<_>>(), vec!["t", "x3", "x4"]);
    }

    #[test]
    fn display_keeps_structure() {
        for src in ["2 + 3*x1", "exp(-x1/2)", "(x1 - x2) - (x3 - x1)", "-(x1^2)", "x1/(x2*x3)", "2^-1"] {
            let a = parse(src).unwrap();
            let printed = a.to_string();
            assert_eq!(parse(&printed).unwrap(), a, "{src} -> {printed}");
        }
    }
}
