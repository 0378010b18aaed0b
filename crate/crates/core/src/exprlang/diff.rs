use super::{Ast, BinaryOp, UnaryOp};

/// Exact symbolic derivative with 0/1 folding.
pub(super) fn differentiate(a: &Ast, var: &str) -> Ast {
    match a {
        Ast::Const(_) => Ast::Const(0.0),
        Ast::Var(v) => Ast::Const(if v == var { 1.0 } else { 0.0 }),
        Ast::Unary(op, u) => {
            let du = differentiate(u, var);
            if du.is_zero() {
                return Ast::Const(0.0);
            }
            let u = (**u).clone();
            let outer = match op {
                UnaryOp::Neg => return Ast::neg(du),
                UnaryOp::Sin => Ast::unary(UnaryOp::Cos, u),
                UnaryOp::Cos => Ast::neg(Ast::unary(UnaryOp::Sin, u)),
                UnaryOp::Exp => Ast::unary(UnaryOp::Exp, u),
                UnaryOp::Log => return Ast::div(du, u),
                UnaryOp::Sqrt => {
                    return Ast::div(du, Ast::mul(Ast::Const(2.0), Ast::unary(UnaryOp::Sqrt, u)));
                }
            };
            Ast::mul(outer, du)
        }
        Ast::Binary(op, l, r) => {
            let dl = differentiate(l, var);
            match op {
                BinaryOp::Add => Ast::add(dl, differentiate(r, var)),
                BinaryOp::Sub => Ast::sub(dl, differentiate(r, var)),
                BinaryOp::Mul => {
                    let dr = differentiate(r, var);
                    Ast::add(
                        Ast::mul(dl, (**r).clone()),
                        Ast::mul((**l).clone(), dr),
                    )
                }
                BinaryOp::Div => {
                    let dr = differentiate(r, var);
                    if dr.is_zero() {
                        return Ast::div(dl, (**r).clone());
                    }
                    let num = Ast::sub(
                        Ast::mul(dl, (**r).clone()),
                        Ast::mul((**l).clone(), dr),
                    );
                    Ast::div(num, Ast::pow((**r).clone(), 2.0))
                }
                BinaryOp::Pow => {
                    // exponent is constant by construction
                    let c = r.as_const().unwrap_or_else(|| {
                        panic!("non-constant exponent in `{a}`; parse() rejects these")
                    });
                    if dl.is_zero() {
                        return Ast::Const(0.0);
                    }
                    Ast::mul(
                        Ast::mul(Ast::Const(c), Ast::pow((**l).clone(), c - 1.0)),
                        dl,
                    )
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{eval, parse};
    use super::*;
    use std::collections::HashMap;

    fn at(a: &Ast, x: f64) -> f64 {
        let env: HashMap<String, f64> = [("x1".to_string(), x)].into_iter().collect();
        eval(a, &env).unwrap()
    }

    #[test]
    fn power_rule_prints_cleanly() {
        let d = parse("x1^2").unwrap().differentiate("x1");
        assert_eq!(d.to_string(), "2*x1");
    }

    #[test]
    fn sin_at_zero() {
        let d = parse("sin(x1)").unwrap().differentiate("x1");
        assert_eq!(at(&d, 0.0), 1.0);
    }

    #[test]
    fn other_variables_are_constants() {
        let d = parse("x2^3 + 4").unwrap().differentiate("x1");
        assert!(d.is_zero());
    }

    #[test]
    fn exp_decay_matches_finite_differences() {
        let a = parse("exp(-x1/2)").unwrap();
        let d = a.differentiate("x1");
        let h = 1e-6;
        for k in 0..10 {
            let x = -3.0 + 0.61 * k as f64;
            let fd = (at(&a, x + h) - at(&a, x - h)) / (2.0 * h);
            assert!((at(&d, x) - fd).abs() <= 1e-7, "x={x}");
        }
    }
}
