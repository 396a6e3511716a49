//! Recursive-descent parser for coefficient expressions:
//! integers, `p/q`, `i`, `z1..zn`, `zb1..zbn`, `t`, `+ - * / ^` and
//! parentheses. Division is only by nonzero constants.

use thiserror::Error;

use crate::coeff::{Chart, GaussRational, PolySeries, MAX_EXPONENT};
use crate::error::KernelError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message} at offset {offset} (near `{token}`)")]
pub struct ExprError {
    /// Byte offset into the expression.
    pub offset: usize,
    pub token: String,
    pub message: String,
}

/// A parsed expression. `truncated` is set when terms beyond `t^N` were dropped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Parsed {
    pub value: PolySeries,
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Int(String),
    Ident(String),
    Op(char),
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn next(&mut self) -> Result<(usize, Tok), ExprError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&c) = bytes.get(self.pos) else {
            return Ok((start, Tok::End));
        };
        let take = |lex: &mut Self, pred: fn(u8) -> bool| {
            while lex.pos < bytes.len() && pred(bytes[lex.pos]) {
                lex.pos += 1;
            }
            lex.src[start..lex.pos].to_string()
        };
        if c.is_ascii_digit() {
            return Ok((start, Tok::Int(take(self, |b| b.is_ascii_digit()))));
        }
        if c.is_ascii_alphabetic() {
            return Ok((start, Tok::Ident(take(self, |b| b.is_ascii_alphanumeric()))));
        }
        if b"+-*/^()".contains(&c) {
            self.pos += 1;
            return Ok((start, Tok::Op(c as char)));
        }
        let ch = self.src[start..].chars().next().unwrap_or('?');
        Err(ExprError { offset: start, token: ch.to_string(), message: "unexpected character".into() })
    }
}

struct Parser<'a> {
    lex: Lexer<'a>,
    tok: Tok,
    at: usize,
    chart: Chart,
}

fn tok_text(t: &Tok) -> String {
    match t {
        Tok::Int(s) | Tok::Ident(s) => s.clone(),
        Tok::Op(c) => c.to_string(),
        Tok::End => "end of input".into(),
    }
}

impl<'a> Parser<'a> {
    fn bump(&mut self) -> Result<(), ExprError> {
        let (at, tok) = self.lex.next()?;
        self.at = at;
        self.tok = tok;
        Ok(())
    }

    fn err(&self, message: impl Into<String>) -> ExprError {
        ExprError { offset: self.at, token: tok_text(&self.tok), message: message.into() }
    }

    fn kernel(&self, at: usize, token: &str, e: KernelError) -> ExprError {
        ExprError { offset: at, token: token.to_string(), message: e.to_string() }
    }

    fn expr(&mut self) -> Result<PolySeries, ExprError> {
        let mut acc = self.term()?;
        while let Tok::Op(c @ ('+' | '-')) = self.tok {
            self.bump()?;
            let rhs = self.term()?;
            acc = if c == '+' { &acc + &rhs } else { &acc - &rhs };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<PolySeries, ExprError> {
        let mut acc = self.unary()?;
        while let Tok::Op(c @ ('*' | '/')) = self.tok {
            let (at, token) = (self.at, tok_text(&self.tok));
            self.bump()?;
            let rhs = self.unary()?;
            if c == '*' {
                acc = acc.checked_mul(&rhs).map_err(|e| self.kernel(at, &token, e))?;
            } else {
                let d = constant_of(&rhs).ok_or_else(|| ExprError {
                    offset: at,
                    token: token.clone(),
                    message: "division is only allowed by a nonzero constant".into(),
                })?;
                let inv = d.inv().ok_or_else(|| ExprError { offset: at, token, message: "division by zero".into() })?;
                acc = acc.scale(&inv);
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<PolySeries, ExprError> {
        match self.tok {
            Tok::Op('-') => {
                self.bump()?;
                Ok(-self.unary()?)
            }
            Tok::Op('+') => {
                self.bump()?;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<PolySeries, ExprError> {
        let base = self.atom()?;
        if self.tok != Tok::Op('^') {
            return Ok(base);
        }
        self.bump()?;
        let Tok::Int(s) = &self.tok else {
            return Err(self.err("exponent must be a non-negative integer"));
        };
        let e: u32 = s.parse().ok().filter(|e| *e <= MAX_EXPONENT).ok_or_else(|| self.err("exponent too large"))?;
        let (at, token) = (self.at, s.clone());
        self.bump()?;
        let mut acc = PolySeries::one(self.chart);
        for _ in 0..e {
            acc = acc.checked_mul(&base).map_err(|err| self.kernel(at, &token, err))?;
        }
        Ok(acc)
    }

    fn atom(&mut self) -> Result<PolySeries, ExprError> {
        let chart = self.chart;
        let at = self.at;
        let value = match &self.tok {
            Tok::Int(s) => {
                let v: i64 = s.parse().map_err(|_| self.err("integer literal too large"))?;
                PolySeries::from_int(chart, v)
            }
            Tok::Ident(name) => {
                let name = name.clone();
                variable(chart, &name).map_err(|message| ExprError { offset: at, token: name, message })?
            }
            Tok::Op('(') => {
                self.bump()?;
                let inner = self.expr()?;
                if self.tok != Tok::Op(')') {
                    return Err(self.err("expected `)`"));
                }
                inner
            }
            _ => return Err(self.err("expected a number, variable or `(`")),
        };
        self.bump()?;
        Ok(value)
    }
}

fn constant_of(p: &PolySeries) -> Option<GaussRational> {
    if p.is_zero() {
        return Some(GaussRational::from_int(0));
    }
    if !p.is_constant_in_chart() || p.t_degree() != Some(0) {
        return None;
    }
    p.terms().next().map(|(_, c)| c.clone())
}

fn variable(chart: Chart, name: &str) -> Result<PolySeries, String> {
    if name == "i" {
        return Ok(PolySeries::constant(chart, GaussRational::i()));
    }
    if name == "t" {
        return Ok(PolySeries::t(chart));
    }
    if name == "tb" {
        return Err("antiholomorphic dependence on t is not supported".into());
    }
    let (zb, digits) = if let Some(d) = name.strip_prefix("zb") {
        (true, d)
    } else if let Some(d) = name.strip_prefix('z') {
        (false, d)
    } else {
        return Err(format!("unknown identifier `{name}`"));
    };
    let idx: usize = match digits.parse() {
        Ok(v) if !digits.starts_with('0') => v,
        _ => return Err(format!("unknown identifier `{name}`")),
    };
    if idx == 0 || idx > chart.dim {
        return Err(format!("variable `{name}` is out of range for n = {}", chart.dim));
    }
    let r = if zb { PolySeries::zb(chart, idx - 1) } else { PolySeries::z(chart, idx - 1) };
    r.map_err(|e| e.to_string())
}

/// Parses `src` in the given chart; terms beyond `t^N` are dropped and reported.
pub fn parse_expr(chart: Chart, src: &str) -> Result<Parsed, ExprError> {
    let wide = Chart { dim: chart.dim, order: MAX_EXPONENT as usize };
    let mut p = Parser { lex: Lexer { src, pos: 0 }, tok: Tok::End, at: 0, chart: wide };
    p.bump()?;
    let v = p.expr()?;
    if p.tok != Tok::End {
        return Err(p.err("unexpected token"));
    }
    let value = v.with_order(chart.order);
    let truncated = value.len() != v.len();
    Ok(Parsed { value, truncated })
}

/// Canonical text of a coefficient; parses back to the same value.
pub fn print_expr(p: &PolySeries) -> String {
    p.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(n: usize, order: usize) -> Chart {
        Chart::new(n, order).unwrap()
    }

    fn parse(ch: Chart, s: &str) -> PolySeries {
        parse_expr(ch, s).unwrap().value
    }

    #[test]
    fn basics() {
        let ch = c(2, 2);
        let z1 = PolySeries::z(ch, 0).unwrap();
        let zb2 = PolySeries::zb(ch, 1).unwrap();
        assert_eq!(parse(ch, "z1 + zb2"), &z1 + &zb2);
        assert_eq!(parse(ch, " 3/2 * z1 "), z1.scale(&GaussRational::from_frac(3, 2)));
        assert_eq!(parse(ch, "-z1^2"), -(&z1 * &z1));
        assert_eq!(parse(ch, "(1 - 2*i)*t"), PolySeries::t(ch).scale(&(&GaussRational::from_int(1) - &GaussRational::i().scale_int(2))));
        assert_eq!(parse(ch, "i*i"), PolySeries::from_int(ch, -1));
        assert_eq!(parse(ch, "z1 - z1"), PolySeries::zero(ch));
    }

    #[test]
    fn truncation_is_reported() {
        let ch = c(1, 2);
        let p = parse_expr(ch, "t + t^3").unwrap();
        assert!(p.truncated);
        assert_eq!(p.value, PolySeries::t(ch));
        assert!(!parse_expr(ch, "t^2").unwrap().truncated);
    }

    #[test]
    fn errors() {
        let ch = c(2, 2);
        let e = parse_expr(ch, "z1 + zb3").unwrap_err();
        assert_eq!((e.offset, e.token.as_str()), (5, "zb3"));
        assert!(parse_expr(ch, "tb").is_err());
        assert!(parse_expr(ch, "z1 / z2").is_err());
        assert!(parse_expr(ch, "1/0").is_err());
        assert!(parse_expr(ch, "(z1").is_err());
        assert!(parse_expr(ch, "z1 z2").is_err());
        assert!(parse_expr(ch, "z1^-1").is_err());
        assert!(parse_expr(ch, "z01").is_err());
        assert!(parse_expr(ch, "z1 # 2").is_err());
        assert!(parse_expr(ch, "").is_err());
    }

    #[test]
    fn print_round_trip() {
        let ch = c(2, 3);
        for s in ["0", "1", "-i", "3/2*z1*zb2 - t^2*zb1 + (1+i)*z2^2", "(2-3*i)/5 + t*(z1 - zb1)^2"] {
            let v = parse(ch, s);
            assert_eq!(parse(ch, &print_expr(&v)), v, "{s} -> {}", print_expr(&v));
        }
    }
}
