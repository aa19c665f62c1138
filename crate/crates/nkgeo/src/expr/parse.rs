use super::{Expr, Func, Num};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown function `{name}` at byte {pos}")]
    UnknownFunction { pos: usize, name: String },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(i64),
    Dec(f64),
    Ident(String),
    Op(char),
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(Tok, usize)>, ParseError> {
        let mut lx = Lexer { src, pos: 0 };
        let mut out = Vec::new();
        loop {
            let (t, p) = lx.next()?;
            let end = t == Tok::End;
            out.push((t, p));
            if end {
                return Ok(out);
            }
        }
    }

    fn next(&mut self) -> Result<(Tok, usize), ParseError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && (bytes[self.pos] as char).is_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&b) = bytes.get(self.pos) else {
            return Ok((Tok::End, start));
        };
        let c = b as char;
        if c.is_ascii_digit() || c == '.' {
            while self.pos < bytes.len() && (bytes[self.pos] as char).is_ascii_digit() {
                self.pos += 1;
            }
            let mut is_dec = false;
            if self.pos < bytes.len() && bytes[self.pos] == b'.' {
                is_dec = true;
                self.pos += 1;
                while self.pos < bytes.len() && (bytes[self.pos] as char).is_ascii_digit() {
                    self.pos += 1;
                }
            }
            let text = &self.src[start..self.pos];
            if text == "." {
                return Err(ParseError::Syntax { pos: start, msg: "lone `.`".into() });
            }
            let tok = if is_dec {
                Tok::Dec(text.parse().map_err(|_| ParseError::Syntax {
                    pos: start,
                    msg: format!("bad number `{text}`"),
                })?)
            } else {
                match text.parse::<i64>() {
                    Ok(n) => Tok::Int(n),
                    // too long for i64: keep it as a float rather than failing
                    Err(_) => Tok::Dec(text.parse().unwrap_or(f64::INFINITY)),
                }
            };
            return Ok((tok, start));
        }
        if c.is_ascii_alphabetic() {
            while self.pos < bytes.len() && (bytes[self.pos] as char).is_ascii_alphanumeric() {
                self.pos += 1;
            }
            return Ok((Tok::Ident(self.src[start..self.pos].to_string()), start));
        }
        if "+-*/^(),".contains(c) {
            self.pos += 1;
            return Ok((Tok::Op(c), start));
        }
        let ch = self.src[start..].chars().next().unwrap_or('?');
        Err(ParseError::Syntax { pos: start, msg: format!("unexpected character `{ch}`") })
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    i: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].0
    }

    fn pos(&self) -> usize {
        self.toks[self.i].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.i].0.clone();
        if t != Tok::End {
            self.i += 1;
        }
        t
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if *self.peek() == Tok::Op(c) {
            self.bump();
            Ok(())
        } else {
            Err(ParseError::Syntax { pos: self.pos(), msg: format!("expected `{c}`") })
        }
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut terms = vec![self.term()?];
        loop {
            match self.peek() {
                Tok::Op('+') => {
                    self.bump();
                    terms.push(self.term()?);
                }
                Tok::Op('-') => {
                    self.bump();
                    terms.push(Expr::raw_neg(self.term()?));
                }
                _ => break,
            }
        }
        Ok(if terms.len() == 1 { terms.pop().unwrap() } else { Expr::raw_sum(terms) })
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut factors = vec![self.unary()?];
        let close = |f: &mut Vec<Expr>| {
            if f.len() == 1 {
                f.pop().unwrap()
            } else {
                Expr::raw_product(std::mem::take(f))
            }
        };
        loop {
            match self.peek() {
                Tok::Op('*') => {
                    self.bump();
                    factors.push(self.unary()?);
                }
                Tok::Op('/') => {
                    self.bump();
                    let den = self.unary()?;
                    let num = close(&mut factors);
                    factors.push(Expr::raw_quotient(num, den));
                }
                _ => break,
            }
        }
        Ok(close(&mut factors))
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Op('-') {
            self.bump();
            return Ok(Expr::raw_neg(self.unary()?));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if *self.peek() == Tok::Op('^') {
            self.bump();
            let exp = self.unary()?;
            return Ok(Expr::raw_pow(base, exp));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Tok::Int(n) => Ok(Expr::int(n)),
            Tok::Dec(f) => Ok(Expr::num(Num::F(f))),
            Tok::Op('(') => {
                let e = self.sum()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if *self.peek() == Tok::Op('(') {
                    let f = Func::from_name(&name)
                        .ok_or(ParseError::UnknownFunction { pos, name: name.clone() })?;
                    self.bump();
                    let arg = self.sum()?;
                    self.expect(')')?;
                    return Ok(Expr::func(f, arg));
                }
                Ok(match name.as_str() {
                    "i" => Expr::i(),
                    "pi" => Expr::pi(),
                    _ => Expr::var(&name),
                })
            }
            Tok::End => Err(ParseError::Syntax { pos, msg: "unexpected end of input".into() }),
            Tok::Op(c) => Err(ParseError::Syntax { pos, msg: format!("unexpected `{c}`") }),
        }
    }
}

/// Parse an infix expression.
///
/// Precedence from tightest: `^` (right associative), unary `-`, `* /`, `+ -`.
/// Chains of `+`/`-` become one sum node (with `a - b` stored as `a + (-b)`),
/// chains of `*` one product node; `/` is left associative.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let toks = Lexer::tokens(text)?;
    let mut p = Parser { toks, i: 0 };
    let e = p.sum()?;
    if *p.peek() != Tok::End {
        return Err(ParseError::Syntax { pos: p.pos(), msg: "trailing input".into() });
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Node;

    #[test]
    fn quotient_of_function() {
        let e = parse("sinh(y1)/x1").unwrap();
        match e.node() {
            Node::Quotient(a, b) => {
                assert_eq!(*a, Expr::func(Func::Sinh, Expr::var("y1")));
                assert_eq!(*b, Expr::var("x1"));
            }
            other => panic!("expected quotient, got {other:?}"),
        }
    }

    #[test]
    fn literal_zero() {
        assert_eq!(parse("0").unwrap(), Expr::zero());
    }

    #[test]
    fn sum_of_power_and_product() {
        let e = parse("x1^2 + 2*x1*y1").unwrap();
        let Node::Sum(terms) = e.node() else { panic!("not a sum") };
        assert!(matches!(terms[0].node(), Node::Pow(..)));
        assert!(matches!(terms[1].node(), Node::Product(c) if c.len() == 3));
    }

    #[test]
    fn precedence() {
        // -a^2 is -(a^2); 2^-x parses; a^b^c is right associative
        assert_eq!(parse("-a^2").unwrap(), Expr::raw_neg(Expr::raw_pow("a".into(), Expr::int(2))));
        assert!(parse("2^-x").is_ok());
        let e = parse("a^b^c").unwrap();
        let Node::Pow(_, rhs) = e.node() else { panic!() };
        assert!(matches!(rhs.node(), Node::Pow(..)));
    }

    #[test]
    fn errors_carry_positions() {
        assert_eq!(
            parse("foo(x)"),
            Err(ParseError::UnknownFunction { pos: 0, name: "foo".into() })
        );
        match parse("x + * y") {
            Err(ParseError::Syntax { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("(x"), Err(ParseError::Syntax { pos: 2, .. })));
        assert!(matches!(parse("x $"), Err(ParseError::Syntax { pos: 2, .. })));
    }

    #[test]
    fn constants() {
        assert_eq!(parse("i").unwrap(), Expr::i());
        assert_eq!(parse("2*pi").unwrap(), Expr::raw_product(vec![Expr::int(2), Expr::pi()]));
        assert_eq!(parse("0.5").unwrap(), Expr::decimal(0.5));
    }
}
