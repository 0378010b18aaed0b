use std::collections::HashMap;

use super::{Ast, BinaryOp, ExprError, UnaryOp};

pub(crate) fn apply_unary(op: UnaryOp, v: f64) -> Result<f64, ExprError> {
    let out = match op {
        UnaryOp::Neg => -v,
        UnaryOp::Sin => v.sin(),
        UnaryOp::Cos => v.cos(),
        UnaryOp::Exp => v.exp(),
        UnaryOp::Log => {
            if v <= 0.0 {
                return Err(ExprError::Domain(format!("log of nonpositive value {v}")));
            }
            v.ln()
        }
        UnaryOp::Sqrt => {
            if v < 0.0 {
                return Err(ExprError::Domain(format!("sqrt of negative value {v}")));
            }
            v.sqrt()
        }
    };
    finite(out)
}

fn apply_binary(op: BinaryOp, a: f64, b: f64) -> Result<f64, ExprError> {
    let out = match op {
        BinaryOp::Add => a + b,
        BinaryOp::Sub => a - b,
        BinaryOp::Mul => a * b,
        BinaryOp::Div => {
            if b == 0.0 {
                return Err(ExprError::Domain("division by zero".into()));
            }
            a / b
        }
        BinaryOp::Pow => {
            if b.fract() == 0.0 && b.abs() <= i32::MAX as f64 {
                if a == 0.0 && b < 0.0 {
                    return Err(ExprError::Domain("zero raised to a negative power".into()));
                }
                a.powi(b as i32)
            } else {
                if a < 0.0 {
                    return Err(ExprError::Domain(format!("negative base {a} with non-integer exponent {b}")));
                }
                a.powf(b)
            }
        }
    };
    finite(out)
}

fn finite(v: f64) -> Result<f64, ExprError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ExprError::Domain(format!("non-finite result {v}")))
    }
}

/// Evaluates `a` with variables looked up in `env`.
pub fn eval(a: &Ast, env: &HashMap<String, f64>) -> Result<f64, ExprError> {
    match a {
        Ast::Const(c) => finite(*c),
        Ast::Var(v) => env.get(v).copied().ok_or_else(|| ExprError::UnboundVariable(v.clone())),
        Ast::Unary(op, x) => apply_unary(*op, eval(x, env)?),
        Ast::Binary(op, x, y) => apply_binary(*op, eval(x, env)?, eval(y, env)?),
    }
}

#[derive(Debug, Clone)]
enum Node {
    Const(f64),
    Slot(usize),
    Unary(UnaryOp, Box<Node>),
    Binary(BinaryOp, Box<Node>, Box<Node>),
}

/// An expression with variables bound to positional slots.
#[derive(Debug, Clone)]
pub struct Compiled {
    root: Node,
    arity: usize,
}

impl Compiled {
    /// Binds the variables of `ast` to positions in `vars`.
    pub fn new(ast: &Ast, vars: &[String]) -> Result<Self, ExprError> {
        fn go(a: &Ast, vars: &[String]) -> Result<Node, ExprError> {
            Ok(match a {
                Ast::Const(c) => Node::Const(*c),
                Ast::Var(v) => Node::Slot(
                    vars.iter()
                        .position(|n| n == v)
                        .ok_or_else(|| ExprError::UnknownVariable(v.clone()))?,
                ),
                Ast::Unary(op, x) => Node::Unary(*op, Box::new(go(x, vars)?)),
                Ast::Binary(op, x, y) => Node::Binary(*op, Box::new(go(x, vars)?), Box::new(go(y, vars)?)),
            })
        }
        Ok(Compiled { root: go(ast, vars)?, arity: vars.len() })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_constant_zero(&self) -> bool {
        matches!(self.root, Node::Const(c) if c == 0.0)
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64, ExprError> {
        fn go(n: &Node, x: &[f64]) -> Result<f64, ExprError> {
            match n {
                Node::Const(c) => Ok(*c),
                Node::Slot(i) => Ok(x[*i]),
                Node::Unary(op, a) => apply_unary(*op, go(a, x)?),
                Node::Binary(op, a, b) => apply_binary(*op, go(a, x)?, go(b, x)?),
            }
        }
        assert_eq!(x.len(), self.arity, "argument count must match bound variables");
        go(&self.root, x)
    }
}
