//! Recursive-descent parser for the polynomial grammar.
//!
//! ```text
//! expr   := ['+'|'-'] term (('+'|'-') term)*
//! term   := factor (['*'] factor)*
//! factor := ('+'|'-') factor | atom ['^' integer]
//! atom   := integer | integer '/' integer | 'z' | 'lam' | '(' expr ')'
//! ```

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use super::{BiPoly, PolyError};
use crate::Rat;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Rat),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
    LParen,
    RParen,
}

fn syntax(pos: usize, msg: impl Into<String>) -> PolyError {
    PolyError::Syntax {
        pos,
        msg: msg.into(),
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, PolyError> {
    let bytes = text.as_bytes();
    let mut out: Vec<(usize, Tok)> = Vec::new();
    let mut i = 0;
    let skip_ws = |mut k: usize| {
        while k < bytes.len() && bytes[k].is_ascii_whitespace() {
            k += 1;
        }
        k
    };
    let digits = |mut k: usize| {
        while k < bytes.len() && bytes[k].is_ascii_digit() {
            k += 1;
        }
        k
    };
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'^' => Tok::Caret,
            b'/' => Tok::Slash,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' => {
                let end = digits(i);
                let num: BigInt = text[i..end].parse().expect("ascii digits");
                i = end;
                // `a/b` is a literal unless the integer is an exponent.
                let after_caret = matches!(out.last(), Some((_, Tok::Caret)));
                let slash = skip_ws(i);
                if !after_caret && slash < bytes.len() && bytes[slash] == b'/' {
                    let dstart = skip_ws(slash + 1);
                    let dend = digits(dstart);
                    if dend > dstart {
                        let den: BigInt = text[dstart..dend].parse().expect("ascii digits");
                        if den.is_zero() {
                            return Err(syntax(dstart, "zero denominator"));
                        }
                        i = dend;
                        out.push((start, Tok::Num(Rat::new(num, den))));
                        continue;
                    }
                }
                out.push((start, Tok::Num(Rat::from_integer(num))));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let mut end = i;
                while end < bytes.len()
                    && (bytes[end].is_ascii_alphanumeric() || bytes[end] == b'_')
                {
                    end += 1;
                }
                let name = text[i..end].to_string();
                i = end;
                out.push((start, Tok::Ident(name)));
                continue;
            }
            _ => {
                let ch = text[i..].chars().next().unwrap_or('?');
                return Err(syntax(i, format!("unexpected character `{ch}`")));
            }
        };
        out.push((start, tok));
        i += 1;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Self, PolyError> {
        Ok(Parser {
            toks: lex(text)?,
            at: 0,
            end: text.len(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |(p, _)| *p)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|(_, t)| t.clone());
        self.at += 1;
        t
    }

    fn expr(&mut self) -> Result<BiPoly, PolyError> {
        let mut acc = match self.peek() {
            Some(Tok::Minus) => {
                self.bump();
                -self.term()?
            }
            Some(Tok::Plus) => {
                self.bump();
                self.term()?
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    acc = &acc + &self.term()?;
                }
                Some(Tok::Minus) => {
                    self.bump();
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<BiPoly, PolyError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    acc = &acc * &self.factor()?;
                }
                Some(Tok::Num(_) | Tok::Ident(_) | Tok::LParen) => {
                    acc = &acc * &self.factor()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<BiPoly, PolyError> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.bump();
                return Ok(-self.factor()?);
            }
            Some(Tok::Plus) => {
                self.bump();
                return self.factor();
            }
            _ => {}
        }
        let base = self.atom()?;
        if self.peek() == Some(&Tok::Caret) {
            self.bump();
            let pos = self.pos();
            match self.bump() {
                Some(Tok::Num(n)) if n.is_integer() => {
                    let e = n
                        .to_integer()
                        .to_u32()
                        .ok_or_else(|| syntax(pos, "exponent out of range"))?;
                    return Ok(base.pow(e));
                }
                _ => return Err(syntax(pos, "expected a nonnegative integer exponent")),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<BiPoly, PolyError> {
        let pos = self.pos();
        match self.bump() {
            Some(Tok::Num(c)) => Ok(BiPoly::constant(c)),
            Some(Tok::Ident(name)) => match name.as_str() {
                "z" => Ok(BiPoly::z()),
                "lam" => Ok(BiPoly::lam()),
                _ => Err(PolyError::UnknownVariable { pos, name }),
            },
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                let close = self.pos();
                match self.bump() {
                    Some(Tok::RParen) => Ok(inner),
                    _ => Err(syntax(close, "expected `)`")),
                }
            }
            Some(Tok::Slash) => Err(syntax(
                pos,
                "`/` is only allowed inside a rational coefficient",
            )),
            Some(t) => Err(syntax(pos, format!("unexpected token {t:?}"))),
            None => Err(syntax(pos, "unexpected end of input")),
        }
    }

    fn finish(&self) -> Result<(), PolyError> {
        match self.peek() {
            None => Ok(()),
            Some(Tok::Slash) => Err(syntax(
                self.pos(),
                "`/` is only allowed inside a rational coefficient",
            )),
            Some(_) => Err(syntax(self.pos(), "unexpected trailing input")),
        }
    }
}

pub(super) fn parse_poly(text: &str) -> Result<BiPoly, PolyError> {
    let mut p = Parser::new(text)?;
    let out = p.expr()?;
    p.finish()?;
    Ok(out)
}

/// Parses `num` or `num / den` where both sides follow the polynomial
/// grammar. The returned denominator is `1` when absent.
pub fn parse_fraction(text: &str) -> Result<(BiPoly, BiPoly), PolyError> {
    let mut p = Parser::new(text)?;
    let num = p.expr()?;
    let den = if p.peek() == Some(&Tok::Slash) {
        p.bump();
        p.expr()?
    } else {
        BiPoly::one()
    };
    p.finish()?;
    Ok((num, den))
}
