//! Parser for the expression DSL.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := primary ('^' exponent)?
//! primary := number | '(' expr ')' | 'exp' '(' expr ')' | name
//! ```
//!
//! Names are `t x y n alt`, jets `u[k]`, `ut[k]`, `uxy[k]`, ansatz
//! coefficients `c0 c1 ...`, declared parameters, and declared unknowns in
//! the forms `phi[k]`, `phi_tu[k]`, `f''(x)` and `xi_x(x,y)`.

use num_bigint::BigInt;
use thiserror::Error;

use super::atom::{Arg, JetVar, NDep, Symbol, UnknownApp, UnknownFn};
use super::poly::Q;
use super::{Expr, ExprError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown identifier `{name}` at {pos}")]
    UnknownIdentifier { pos: usize, name: String },
    #[error("exponent at {pos} is not an integer")]
    NonInteger { pos: usize },
    #[error(transparent)]
    Algebra(#[from] ExprError),
}

/// Names the parser accepts beyond the built-in ones.
#[derive(Clone, Debug, Default)]
pub struct ParseContext {
    pub params: Vec<String>,
    pub unknowns: Vec<UnknownFn>,
}

impl ParseContext {
    pub fn with_params<S: AsRef<str>>(params: &[S]) -> Self {
        ParseContext {
            params: params.iter().map(|s| s.as_ref().to_string()).collect(),
            unknowns: Vec::new(),
        }
    }

    fn unknown(&self, name: &str) -> Option<&UnknownFn> {
        self.unknowns.iter().find(|f| &*f.name == name)
    }
}

pub fn parse(src: &str) -> Result<Expr, ParseError> {
    parse_with(src, &ParseContext::default())
}

pub fn parse_with(src: &str, ctx: &ParseContext) -> Result<Expr, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, i: 0, ctx, end: src.len() };
    let e = p.expr()?;
    if p.i < p.toks.len() {
        return Err(p.err_here("unexpected trailing input"));
    }
    Ok(e)
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Q),
    Ident(String),
    Punct(char),
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let int_part = &src[start..i];
            let mut frac_part = "";
            if i < bytes.len() && bytes[i] == b'.' {
                i += 1;
                let fs = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                frac_part = &src[fs..i];
            }
            if int_part.is_empty() && frac_part.is_empty() {
                return Err(ParseError::Syntax { pos: start, msg: "malformed number".into() });
            }
            let digits = format!("{int_part}{frac_part}");
            let n: BigInt = digits.parse().unwrap();
            let d = BigInt::from(10u32).pow(frac_part.len() as u32);
            out.push((start, Tok::Num(Q::new(n, d))));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            while i < bytes.len() && bytes[i] == b'\'' {
                i += 1;
            }
            out.push((start, Tok::Ident(src[start..i].to_string())));
        } else if "+-*/^()[],".contains(c) {
            out.push((i, Tok::Punct(c)));
            i += 1;
        } else {
            return Err(ParseError::Syntax { pos: i, msg: format!("unexpected character `{c}`") });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    i: usize,
    ctx: &'a ParseContext,
    end: usize,
}

impl Parser<'_> {
    fn pos(&self) -> usize {
        self.toks.get(self.i).map(|t| t.0).unwrap_or(self.end)
    }

    fn err_here(&self, msg: &str) -> ParseError {
        ParseError::Syntax { pos: self.pos(), msg: msg.into() }
    }

    fn peek_punct(&self, c: char) -> bool {
        matches!(self.toks.get(self.i), Some((_, Tok::Punct(p))) if *p == c)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek_punct(c) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err_here(&format!("expected `{c}`")))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = acc + self.term()?;
            } else if self.eat('-') {
                acc = acc - self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = acc * self.unary()?;
            } else if self.eat('/') {
                let d = self.unary()?;
                acc = acc.checked_div(&d)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            return Ok(-self.unary()?);
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let k = self.exponent()?;
        Ok(base.pow(k)?)
    }

    fn exponent(&mut self) -> Result<i64, ParseError> {
        let paren = self.eat('(');
        let neg = self.eat('-');
        let pos = self.pos();
        let k = self.integer()?.ok_or(ParseError::NonInteger { pos })?;
        if paren {
            self.expect(')')?;
        }
        Ok(if neg { -k } else { k })
    }

    /// An unsigned integer literal; `None` if the next number is fractional.
    fn integer(&mut self) -> Result<Option<i64>, ParseError> {
        match self.toks.get(self.i) {
            Some((_, Tok::Num(q))) => {
                let q = q.clone();
                self.i += 1;
                if !q.is_integer() {
                    return Ok(None);
                }
                Ok(Some(i64::try_from(q.numer()).map_err(|_| self.err_here("integer too large"))?))
            }
            _ => Err(self.err_here("expected an integer")),
        }
    }

    fn site(&mut self) -> Result<i32, ParseError> {
        self.expect('[')?;
        let neg = self.eat('-');
        if !neg {
            self.eat('+');
        }
        let pos = self.pos();
        let k = self.integer()?.ok_or(ParseError::NonInteger { pos })? as i32;
        self.expect(']')?;
        Ok(if neg { -k } else { k })
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let (pos, tok) = match self.toks.get(self.i) {
            Some(t) => t.clone(),
            None => return Err(self.err_here("unexpected end of input")),
        };
        self.i += 1;
        match tok {
            Tok::Num(q) => Ok(Expr::rational(q)),
            Tok::Punct('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Punct(c) => Err(ParseError::Syntax { pos, msg: format!("unexpected `{c}`") }),
            Tok::Ident(name) => self.name(pos, &name),
        }
    }

    fn name(&mut self, pos: usize, name: &str) -> Result<Expr, ParseError> {
        match name {
            "t" => return Ok(Expr::t()),
            "x" => return Ok(Expr::x()),
            "y" => return Ok(Expr::y()),
            "n" => return Ok(Expr::n()),
            "alt" => return Ok(Expr::alt()),
            "exp" if self.peek_punct('(') => {
                self.i += 1;
                let arg = self.expr()?;
                self.expect(')')?;
                return Ok(Expr::exp(&arg));
            }
            _ => {}
        }
        if self.ctx.params.iter().any(|p| p == name) {
            return Ok(Expr::sym(Symbol::param(name)));
        }
        if let Some(app) = self.unknown_app(name)? {
            return Ok(Expr::unknown(app));
        }
        if let Some(j) = jet_name(name) {
            if self.peek_punct('[') {
                let s = self.site()?;
                return Ok(Expr::jet(j.shifted(s)));
            }
        }
        if let Some(d) = name.strip_prefix('c') {
            if !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()) {
                if let Ok(i) = d.parse::<u32>() {
                    return Ok(Expr::coef(i));
                }
            }
        }
        Err(ParseError::UnknownIdentifier { pos, name: name.to_string() })
    }

    fn unknown_app(&mut self, name: &str) -> Result<Option<UnknownApp>, ParseError> {
        // f''(x)
        let primes = name.bytes().rev().take_while(|b| *b == b'\'').count();
        let stem = &name[..name.len() - primes];
        let (func, orders) = if let Some(f) = self.ctx.unknown(stem) {
            let mut orders = [0u32; 4];
            if primes > 0 {
                if !f.is_formal() {
                    return Ok(None);
                }
                orders[f.args().next().unwrap() as usize] = primes as u32;
            }
            (f.clone(), orders)
        } else if primes > 0 {
            return Ok(None);
        } else if let Some((base, letters)) = name.rsplit_once('_') {
            let Some(f) = self.ctx.unknown(base) else { return Ok(None) };
            let mut orders = [0u32; 4];
            for c in letters.chars() {
                match Arg::from_letter(c) {
                    Some(a) if f.has(a) => orders[a as usize] += 1,
                    _ => return Ok(None),
                }
            }
            (f.clone(), orders)
        } else {
            return Ok(None);
        };
        let site = if self.peek_punct('[') {
            self.site()?
        } else if self.peek_punct('(') {
            if func.has(Arg::U) || func.ndep != NDep::Independent {
                return Err(self.err_here("lattice unknowns take a site index `[k]`"));
            }
            self.i += 1;
            let mut declared = func.args();
            loop {
                let pos = self.pos();
                let a = match self.toks.get(self.i) {
                    Some((_, Tok::Ident(s))) if s.len() == 1 => Arg::from_letter(s.as_bytes()[0] as char),
                    _ => None,
                };
                if a.is_none() || a != declared.next() {
                    return Err(ParseError::Syntax { pos, msg: "argument list does not match declaration".into() });
                }
                self.i += 1;
                if self.eat(')') {
                    break;
                }
                self.expect(',')?;
            }
            if declared.next().is_some() {
                return Err(self.err_here("argument list does not match declaration"));
            }
            0
        } else {
            return Err(self.err_here("expected `[k]` or an argument list"));
        };
        Ok(Some(UnknownApp::new(func, site, orders)))
    }
}

fn jet_name(name: &str) -> Option<JetVar> {
    let rest = name.strip_prefix('u')?;
    let mut j = JetVar::u(0);
    for c in rest.chars() {
        match c {
            't' => j.dt += 1,
            'x' => j.dx += 1,
            'y' => j.dy += 1,
            _ => return None,
        }
    }
    Some(j)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> ParseContext {
        ParseContext {
            params: vec!["a".into()],
            unknowns: vec![
                UnknownFn::new("phi", &[Arg::T, Arg::U], NDep::Free),
                UnknownFn::new("f", &[Arg::X], NDep::Independent),
                UnknownFn::new("xi", &[Arg::X, Arg::Y], NDep::Independent),
            ],
        }
    }

    #[test]
    fn precedence_and_powers() {
        let e = parse("-u[0]^2 + 2*u[1]/u[0]").unwrap();
        let u0 = Expr::u(0);
        let expect = -(&u0 * &u0) + Expr::integer(2) * Expr::u(1) * u0.inv().unwrap();
        assert_eq!(e, expect);
        assert_eq!(parse("u[1]^-1").unwrap(), parse("1/u[1]").unwrap());
        assert_eq!(parse("u[1]^(-2)").unwrap(), Expr::u(1).pow(-2).unwrap());
    }

    #[test]
    fn decimals_are_exact() {
        assert_eq!(parse("0.3").unwrap(), Expr::ratio(3, 10));
        assert_eq!(parse("2.50").unwrap(), Expr::ratio(5, 2));
    }

    #[test]
    fn derivative_jets() {
        assert_eq!(parse("utt[-1]").unwrap(), Expr::jet(JetVar::t_deriv(-1, 2)));
        assert_eq!(parse("uxy[0]").unwrap(), Expr::jet(JetVar::xy_deriv(0, 1, 1)));
    }

    #[test]
    fn unknown_forms() {
        let c = ctx();
        let e = parse_with("phi_tu[1] + f''(x) + xi_x(x,y) + a", &c).unwrap();
        assert_eq!(e.atoms().len(), 4);
        assert!(matches!(parse_with("f'(y)", &c), Err(ParseError::Syntax { .. })));
    }

    #[test]
    fn errors() {
        assert!(matches!(parse("u[0] +"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("zeta"), Err(ParseError::UnknownIdentifier { .. })));
        assert!(matches!(parse("u[0]^0.5"), Err(ParseError::NonInteger { .. })));
        assert!(matches!(parse("1/(u[0]-u[0])"), Err(ParseError::Algebra(ExprError::DivisionByZero))));
    }

    #[test]
    fn display_round_trip() {
        let c = ctx();
        for s in [
            "u[0]*(u[1] - u[-1])",
            "exp(u[-1] - u[0]) - exp(u[0] - u[1])",
            "(1 + alt)/(u[1] - u[-1])^2 + 3/7*t",
            "phi_tu[1]*f''(x)/(a + u[0])",
            "-1/u[0]",
            "2/(3*u[0])",
        ] {
            let e = parse_with(s, &c).unwrap();
            let back = parse_with(&e.to_string(), &c).unwrap();
            assert_eq!(e, back, "{s} -> {e}");
        }
    }
}
