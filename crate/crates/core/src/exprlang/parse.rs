use super::{eval, Ast, BinaryOp, ExprError, UnaryOp};

/// Parses an expression. Operators build raw nodes (no simplification), so
/// the tree mirrors the source; only exponents are folded to constants.
pub fn parse(src: &str) -> Result<Ast, ExprError> {
    let mut p = Parser { src, pos: 0 };
    p.skip_ws();
    if p.pos == src.len() {
        return Err(p.error(&["expression"]));
    }
    let ast = p.expr()?;
    p.skip_ws();
    if p.pos != src.len() {
        return Err(p.error(&["operator", "end of input"]));
    }
    Ok(ast)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<u8> {
        self.src.as_bytes().get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ' | b'\t' | b'\n' | b'\r')) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn error(&self, expected: &[&str]) -> ExprError {
        let found = match self.src[self.pos..].chars().next() {
            Some(c) => format!("`{c}`"),
            None => "end of input".to_string(),
        };
        ExprError::Parse {
            offset: self.pos,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found,
        }
    }

    fn expr(&mut self) -> Result<Ast, ExprError> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat(b'+') {
                BinaryOp::Add
            } else if self.eat(b'-') {
                BinaryOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.term()?;
            lhs = Ast::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Ast, ExprError> {
        let mut lhs = self.factor()?;
        loop {
            let op = if self.eat(b'*') {
                BinaryOp::Mul
            } else if self.eat(b'/') {
                BinaryOp::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.factor()?;
            lhs = Ast::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn factor(&mut self) -> Result<Ast, ExprError> {
        let base = self.base()?;
        if !self.eat(b'^') {
            return Ok(base);
        }
        let at = self.pos;
        let exponent = self.factor()?;
        if !exponent.variables().is_empty() {
            self.pos = at;
            return Err(self.error(&["constant exponent"]));
        }
        let value = eval::eval(&exponent, &Default::default())?;
        Ok(Ast::Binary(BinaryOp::Pow, Box::new(base), Box::new(Ast::Const(value))))
    }

    fn base(&mut self) -> Result<Ast, ExprError> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                let inner = self.base()?;
                Ok(Ast::Unary(UnaryOp::Neg, Box::new(inner)))
            }
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error(&["`)`"]));
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let ident = self.ident();
                if self.eat(b'(') {
                    let op = UnaryOp::from_name(ident).ok_or_else(|| ExprError::UnknownFunction {
                        name: ident.to_string(),
                        offset: start,
                    })?;
                    let arg = self.expr()?;
                    if !self.eat(b')') {
                        return Err(self.error(&["`)`"]));
                    }
                    return Ok(Ast::Unary(op, Box::new(arg)));
                }
                Ok(match ident {
                    "pi" => Ast::Const(std::f64::consts::PI),
                    "e" => Ast::Const(std::f64::consts::E),
                    _ => Ast::Var(ident.to_string()),
                })
            }
            _ => Err(self.error(&["number", "identifier", "`(`", "`-`"])),
        }
    }

    fn ident(&mut self) -> &'a str {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
            self.pos += 1;
        }
        &self.src[start..self.pos]
    }

    fn number(&mut self) -> Result<Ast, ExprError> {
        let bytes = self.src.as_bytes();
        let start = self.pos;
        let digits = |p: &mut usize| {
            let s = *p;
            while bytes.get(*p).is_some_and(|c| c.is_ascii_digit()) {
                *p += 1;
            }
            *p > s
        };
        let mut p = self.pos;
        let mut any = digits(&mut p);
        if bytes.get(p) == Some(&b'.') {
            p += 1;
            any |= digits(&mut p);
        }
        if !any {
            return Err(self.error(&["digit"]));
        }
        // exponent only when followed by digits, so `2e` stays `2` then `e`
        if matches!(bytes.get(p), Some(b'e' | b'E')) {
            let mut q = p + 1;
            if matches!(bytes.get(q), Some(b'+' | b'-')) {
                q += 1;
            }
            if digits(&mut q) {
                p = q;
            }
        }
        self.pos = p;
        self.src[start..p]
            .parse::<f64>()
            .map(Ast::Const)
            .map_err(|_| ExprError::Parse {
                offset: start,
                expected: vec!["number".into()],
                found: self.src[start..p].to_string(),
            })
    }
}
