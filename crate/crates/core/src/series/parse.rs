//! Parser for polynomial expressions with rational coefficients, e.g.
//! `y^2 - x^3 - 1` or `(y - 1)/2 + 3/4*x*y`.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::parse_rat;
use crate::Rat;

use super::Polynomial;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Op(char),
}

fn lex(s: &str) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let cs: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let st = i;
            while i < cs.len() && (cs[i].is_ascii_digit() || cs[i] == '.') {
                i += 1;
            }
            out.push(Tok::Num(cs[st..i].iter().collect()));
        } else if c.is_alphabetic() || c == '_' {
            let st = i;
            while i < cs.len() && (cs[i].is_alphanumeric() || cs[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(cs[st..i].iter().collect()));
        } else if "+-*/^()".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(Error::Parse(format!("unexpected character {c:?} in {s:?}")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Tok>,
    pos: usize,
    vars: &'a [&'a str],
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Polynomial<Rat>> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = acc.add(&self.term()?);
            } else if self.eat('-') {
                acc = acc.sub(&self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial<Rat>> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = acc.mul(&self.unary()?);
            } else if self.eat('/') {
                let d = self.unary()?;
                let c = constant_value(&d)
                    .ok_or_else(|| Error::Parse("division only by nonzero constants".into()))?;
                if c.is_zero() {
                    return Err(Error::Parse("division by zero".into()));
                }
                acc = acc.scale(&(Rat::from_integer(1.into()) / c));
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Polynomial<Rat>> {
        if self.eat('-') {
            return Ok(self.unary()?.neg());
        }
        if self.eat('+') {
            return self.unary();
        }
        let base = self.atom()?;
        if self.eat('^') {
            match self.toks.get(self.pos).cloned() {
                Some(Tok::Num(k)) => {
                    self.pos += 1;
                    let k: u32 = k
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad exponent {k}")))?;
                    return Ok(base.pow(k));
                }
                other => return Err(Error::Parse(format!("expected exponent, found {other:?}"))),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Polynomial<Rat>> {
        let n = self.vars.len();
        match self.toks.get(self.pos).cloned() {
            Some(Tok::Num(s)) => {
                self.pos += 1;
                Ok(Polynomial::constant(n, parse_rat(&s)?))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                let i = self
                    .vars
                    .iter()
                    .position(|v| *v == name)
                    .ok_or_else(|| Error::Parse(format!("unknown variable {name:?}")))?;
                Ok(Polynomial::var(n, i))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(Error::Parse("missing ')'".into()));
                }
                Ok(e)
            }
            other => Err(Error::Parse(format!("unexpected token {other:?}"))),
        }
    }
}

fn constant_value(p: &Polynomial<Rat>) -> Option<Rat> {
    match p.terms().count() {
        0 => Some(Rat::zero()),
        1 => {
            let (e, c) = p.terms().next().unwrap();
            e.iter().all(|&x| x == 0).then(|| c.clone())
        }
        _ => None,
    }
}

/// Parses an expression over the named variables.
pub fn parse_polynomial(src: &str, vars: &[&str]) -> Result<Polynomial<Rat>> {
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
        vars,
    };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(Error::Parse(format!("trailing input in {src:?}")));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, rat_int};

    #[test]
    fn parses_elliptic() {
        let g = parse_polynomial("y^2 - x^3 - 1", &["x", "y"]).unwrap();
        assert_eq!(g.eval(&[rat_int(2), rat_int(3)]), rat_int(0));
        let h = parse_polynomial("(y - 1)/2 + 3/4*x*y", &["x", "y"]).unwrap();
        assert_eq!(h.eval(&[rat_int(1), rat_int(3)]), rat_int(1) + rat(9, 4));
        assert_eq!(
            parse_polynomial("-x^2", &["x"])
                .unwrap()
                .eval(&[rat_int(3)]),
            rat_int(-9)
        );
        assert_eq!(
            parse_polynomial("0.5*x", &["x"])
                .unwrap()
                .eval(&[rat_int(3)]),
            rat(3, 2)
        );
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_polynomial("x / y", &["x", "y"]).is_err());
        assert!(parse_polynomial("z", &["x"]).is_err());
        assert!(parse_polynomial("x +", &["x"]).is_err());
        assert!(parse_polynomial("(x", &["x"]).is_err());
        assert!(parse_polynomial("x / 0", &["x"]).is_err());
        assert!(parse_polynomial("x $ 1", &["x"]).is_err());
        assert!(parse_polynomial("x y", &["x", "y"]).is_err());
    }
}
