//! Scalar coefficient expressions in the frequency `s` and the parameters `p1..pd`.
//!
//! Every term of a structured system carries one of these as its scalar
//! coefficient. The textual form is a small, closed grammar:
//!
//! ```text
//! expr     = signed { ("+" | "-") term } ;
//! signed   = "-" term | term ;
//! term     = factor { ("*" | "/") factor } ;
//! factor   = "-" factor | power ;
//! power    = primary [ "^" exponent ] ;
//! exponent = integer | "(" [ "-" ] integer [ "/" integer ] ")" ;
//! primary  = number | "i" | "s" | param | func "(" expr ")" | "(" expr ")" ;
//! number   = digits [ "." digits ] [ ("e" | "E") [ "+" | "-" ] digits ] [ "i" ] ;
//! param    = "p" digits ;                       (* 1-based *)
//! func     = "sqrt" | "exp" | "neg" ;
//! ```
//!
//! Whitespace between tokens is ignored. `^` binds tighter than negation, so
//! `-s^2` is `-(s^2)`; a leading minus negates the whole product that follows
//! it, so `-1*s` is `-(1*s)`. Exponents are exact integers or rationals.
//!
//! `sqrt` and rational powers use the principal branch: the argument of the
//! base is taken in `(-pi, pi]`, with a signed-zero imaginary part treated as
//! `+0`. The branch point `0` itself is rejected for even roots.

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use core::fmt;

use num_complex::Complex64;
use num_traits::Zero;
use thiserror::Error;

/// Exact exponent `num / den` with `den >= 1` and the fraction in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Exponent {
    num: i32,
    den: u32,
}

impl Exponent {
    pub fn new(num: i32, den: u32) -> Option<Self> {
        if den == 0 {
            return None;
        }
        let g = gcd(num.unsigned_abs(), den).max(1);
        Some(Self {
            num: num / g as i32,
            den: den / g,
        })
    }

    pub fn integer(num: i32) -> Self {
        Self { num, den: 1 }
    }

    pub fn numerator(&self) -> i32 {
        self.num
    }

    pub fn denominator(&self) -> u32 {
        self.den
    }
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(Complex64),
    /// The frequency variable `s`.
    S,
    /// Parameter `p_k`, stored 1-based as written.
    Param(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Exponent),
    Sqrt(Box<Expr>),
    Exp(Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnexpectedChar(char),
    UnexpectedEnd,
    UnknownSymbol(String),
    ParamOutOfRange { index: usize, declared: usize },
    BadNumber,
    BadExponent,
    TrailingInput,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::UnexpectedChar(c) => write!(f, "unexpected character {c:?}"),
            Self::UnexpectedEnd => f.write_str("unexpected end of input"),
            Self::UnknownSymbol(name) => write!(f, "unknown symbol `{name}`"),
            Self::ParamOutOfRange { index, declared } => write!(
                f,
                "parameter p{index} out of range (system declares d = {declared})"
            ),
            Self::BadNumber => f.write_str("malformed number"),
            Self::BadExponent => {
                f.write_str("exponent must be an integer or a parenthesized rational like (1/2)")
            }
            Self::TrailingInput => f.write_str("unexpected trailing input"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at byte {offset}: {kind}")]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("division by zero (pole hit at the evaluation point)")]
    DivisionByZero,
    #[error("even root of the branch point 0")]
    BranchPoint,
    #[error("parameter p{index} requested but only {len} parameter values supplied")]
    MissingParam { index: usize, len: usize },
    #[error("non-finite value")]
    NonFinite,
}

/// Parses `text`, rejecting parameters `p_k` with `k > params`.
pub fn parse_coeff(text: &str, params: usize) -> Result<Expr, ParseError> {
    let mut parser = Parser {
        src: text.as_bytes(),
        pos: 0,
        params,
    };
    let expr = parser.expr()?;
    parser.skip_ws();
    if parser.pos < parser.src.len() {
        return Err(parser.error(ParseErrorKind::TrailingInput));
    }
    Ok(expr)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    params: usize,
}

impl Parser<'_> {
    fn error(&self, kind: ParseErrorKind) -> ParseError {
        ParseError {
            offset: self.pos,
            kind,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        match self.peek() {
            Some(got) if got == c => {
                self.pos += 1;
                Ok(())
            }
            Some(_) => Err(self.error(ParseErrorKind::UnexpectedChar(self.current_char()))),
            None => Err(self.error(ParseErrorKind::UnexpectedEnd)),
        }
    }

    fn current_char(&self) -> char {
        core::str::from_utf8(&self.src[self.pos..])
            .ok()
            .and_then(|s| s.chars().next())
            .unwrap_or(char::REPLACEMENT_CHARACTER)
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = if self.eat(b'-') {
            Expr::Neg(Box::new(self.term()?))
        } else {
            self.term()?
        };
        loop {
            if self.eat(b'+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            if self.eat(b'*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
            } else if self.eat(b'/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if self.eat(b'-') {
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let base = self.primary()?;
        if self.eat(b'^') {
            let exp = self.exponent()?;
            return Ok(Expr::Pow(Box::new(base), exp));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<Exponent, ParseError> {
        if self.eat(b'(') {
            let negative = self.eat(b'-');
            let mut num = self.integer()?;
            if negative {
                num = -num;
            }
            let den = if self.eat(b'/') { self.integer()? } else { 1 };
            self.expect(b')')?;
            let den = u32::try_from(den).map_err(|_| self.error(ParseErrorKind::BadExponent))?;
            Exponent::new(num, den).ok_or_else(|| self.error(ParseErrorKind::BadExponent))
        } else {
            Ok(Exponent::integer(self.integer()?))
        }
    }

    fn integer(&mut self) -> Result<i32, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error(ParseErrorKind::BadExponent));
        }
        let text = core::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        text.parse::<i32>().map_err(|_| ParseError {
            offset: start,
            kind: ParseErrorKind::BadExponent,
        })
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let Some(c) = self.peek() else {
            return Err(self.error(ParseErrorKind::UnexpectedEnd));
        };
        if c == b'(' {
            self.pos += 1;
            let inner = self.expr()?;
            self.expect(b')')?;
            return Ok(inner);
        }
        if c.is_ascii_digit() || c == b'.' {
            return self.number();
        }
        if c.is_ascii_alphabetic() {
            return self.symbol();
        }
        Err(self.error(ParseErrorKind::UnexpectedChar(self.current_char())))
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let src = self.src;
        let digits = |mut pos: usize| {
            while pos < src.len() && src[pos].is_ascii_digit() {
                pos += 1;
            }
            pos
        };
        let mut end = digits(start);
        if end < src.len() && src[end] == b'.' {
            end = digits(end + 1);
        }
        if end < src.len() && (src[end] == b'e' || src[end] == b'E') {
            let mut exp_end = end + 1;
            if exp_end < src.len() && (src[exp_end] == b'+' || src[exp_end] == b'-') {
                exp_end += 1;
            }
            let after = digits(exp_end);
            if after > exp_end {
                end = after;
            }
        }
        let text = core::str::from_utf8(&src[start..end]).unwrap_or("");
        let value: f64 = text.parse().map_err(|_| ParseError {
            offset: start,
            kind: ParseErrorKind::BadNumber,
        })?;
        self.pos = end;
        // An `i` glued to the literal makes it imaginary, unless it begins a
        // longer identifier.
        if self.pos < src.len()
            && src[self.pos] == b'i'
            && !src
                .get(self.pos + 1)
                .is_some_and(|b| b.is_ascii_alphanumeric())
        {
            self.pos += 1;
            return Ok(Expr::Num(Complex64::new(0.0, value)));
        }
        Ok(Expr::Num(Complex64::new(value, 0.0)))
    }

    fn symbol(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        let name = core::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        let func = |this: &mut Self, wrap: fn(Box<Expr>) -> Expr| -> Result<Expr, ParseError> {
            this.expect(b'(')?;
            let arg = this.expr()?;
            this.expect(b')')?;
            Ok(wrap(Box::new(arg)))
        };
        match name {
            "s" => Ok(Expr::S),
            "i" => Ok(Expr::Num(Complex64::new(0.0, 1.0))),
            "sqrt" => func(self, Expr::Sqrt),
            "exp" => func(self, Expr::Exp),
            "neg" => func(self, Expr::Neg),
            _ => {
                let index = name
                    .strip_prefix('p')
                    .filter(|rest| !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()))
                    .and_then(|rest| rest.parse::<usize>().ok());
                match index {
                    Some(index) if index >= 1 && index <= self.params => Ok(Expr::Param(index)),
                    Some(index) => Err(ParseError {
                        offset: start,
                        kind: ParseErrorKind::ParamOutOfRange {
                            index,
                            declared: self.params,
                        },
                    }),
                    None => Err(ParseError {
                        offset: start,
                        kind: ParseErrorKind::UnknownSymbol(name.to_string()),
                    }),
                }
            }
        }
    }
}

fn checked(z: Complex64) -> Result<Complex64, EvalError> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(EvalError::NonFinite)
    }
}

/// Maps a `-0.0` imaginary part to `+0.0` so the principal argument stays in `(-pi, pi]`.
fn on_principal_sheet(z: Complex64) -> Complex64 {
    if z.im == 0.0 {
        Complex64::new(z.re, 0.0)
    } else {
        z
    }
}

fn integer_power(z: Complex64, n: i32) -> Result<Complex64, EvalError> {
    if n < 0 && z.is_zero() {
        return Err(EvalError::DivisionByZero);
    }
    checked(z.powi(n))
}

fn principal_root(z: Complex64, den: u32) -> Result<Complex64, EvalError> {
    if z.is_zero() {
        return if den % 2 == 0 {
            Err(EvalError::BranchPoint)
        } else {
            Ok(Complex64::zero())
        };
    }
    let z = on_principal_sheet(z);
    if den == 2 {
        return Ok(z.sqrt());
    }
    let radius = libm::pow(z.norm(), 1.0 / den as f64);
    let angle = libm::atan2(z.im, z.re) / den as f64;
    Ok(Complex64::from_polar(radius, angle))
}

impl Expr {
    pub fn num(value: f64) -> Self {
        Expr::Num(Complex64::new(value, 0.0))
    }

    pub fn one() -> Self {
        Self::num(1.0)
    }

    pub fn param(index: usize) -> Self {
        Expr::Param(index)
    }

    pub fn neg(self) -> Self {
        Expr::Neg(Box::new(self))
    }

    pub fn add(self, rhs: Expr) -> Self {
        Expr::Add(Box::new(self), Box::new(rhs))
    }

    pub fn mul(self, rhs: Expr) -> Self {
        Expr::Mul(Box::new(self), Box::new(rhs))
    }

    pub fn div(self, rhs: Expr) -> Self {
        Expr::Div(Box::new(self), Box::new(rhs))
    }

    pub fn exp(self) -> Self {
        Expr::Exp(Box::new(self))
    }

    pub fn sqrt(self) -> Self {
        Expr::Sqrt(Box::new(self))
    }

    pub fn eval(&self, s: Complex64, params: &[f64]) -> Result<Complex64, EvalError> {
        match self {
            Expr::Num(z) => Ok(*z),
            Expr::S => Ok(s),
            Expr::Param(index) => params
                .get(index - 1)
                .map(|&v| Complex64::new(v, 0.0))
                .ok_or(EvalError::MissingParam {
                    index: *index,
                    len: params.len(),
                }),
            Expr::Neg(a) => Ok(-a.eval(s, params)?),
            Expr::Add(a, b) => checked(a.eval(s, params)? + b.eval(s, params)?),
            Expr::Sub(a, b) => checked(a.eval(s, params)? - b.eval(s, params)?),
            Expr::Mul(a, b) => checked(a.eval(s, params)? * b.eval(s, params)?),
            Expr::Div(a, b) => {
                let num = a.eval(s, params)?;
                let den = b.eval(s, params)?;
                if den.is_zero() {
                    return Err(EvalError::DivisionByZero);
                }
                checked(num / den)
            }
            Expr::Pow(base, exp) => {
                let z = base.eval(s, params)?;
                if exp.den == 1 {
                    integer_power(z, exp.num)
                } else {
                    integer_power(principal_root(z, exp.den)?, exp.num)
                }
            }
            Expr::Sqrt(a) => principal_root(a.eval(s, params)?, 2),
            Expr::Exp(a) => checked(a.eval(s, params)?.exp()),
        }
    }

    /// Largest 1-based parameter index referenced, or 0.
    pub fn max_param_index(&self) -> usize {
        match self {
            Expr::Num(_) | Expr::S => 0,
            Expr::Param(k) => *k,
            Expr::Neg(a) | Expr::Sqrt(a) | Expr::Exp(a) | Expr::Pow(a, _) => a.max_param_index(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.max_param_index().max(b.max_param_index())
            }
        }
    }

    /// True when every literal is real, so the expression commutes with
    /// complex conjugation of `s` (away from branch cuts).
    pub fn has_real_literals(&self) -> bool {
        match self {
            Expr::Num(z) => z.im == 0.0,
            Expr::S | Expr::Param(_) => true,
            Expr::Neg(a) | Expr::Sqrt(a) | Expr::Exp(a) | Expr::Pow(a, _) => a.has_real_literals(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.has_real_literals() && b.has_real_literals()
            }
        }
    }

    /// True when the expression takes a root (`sqrt` or a fractional power).
    pub fn has_branch_cut(&self) -> bool {
        match self {
            Expr::Num(_) | Expr::S | Expr::Param(_) => false,
            Expr::Sqrt(_) => true,
            Expr::Pow(a, e) => e.den != 1 || a.has_branch_cut(),
            Expr::Neg(a) | Expr::Exp(a) => a.has_branch_cut(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.has_branch_cut() || b.has_branch_cut()
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            Expr::Num(z) if z.im != 0.0 || z.re.is_sign_negative() => 1,
            _ => 5,
        }
    }

    fn fmt_child(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        // Negations are always wrapped when nested so the printed text parses
        // back to the same tree.
        if self.precedence() < min || matches!(self, Expr::Neg(_)) {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

fn fmt_real(f: &mut fmt::Formatter<'_>, v: f64) -> fmt::Result {
    if v == 0.0 || (1e-4..1e15).contains(&v.abs()) {
        write!(f, "{v}")
    } else {
        write!(f, "{v:e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(z) => {
                if z.im == 0.0 {
                    if z.re.is_sign_negative() {
                        f.write_str("-")?;
                    }
                    fmt_real(f, z.re.abs())
                } else if z.re == 0.0 && !z.re.is_sign_negative() {
                    if z.im.is_sign_negative() {
                        f.write_str("-")?;
                    }
                    fmt_real(f, z.im.abs())?;
                    f.write_str("i")
                } else {
                    if z.re.is_sign_negative() {
                        f.write_str("-")?;
                    }
                    fmt_real(f, z.re.abs())?;
                    f.write_str(if z.im.is_sign_negative() { "-" } else { "+" })?;
                    fmt_real(f, z.im.abs())?;
                    f.write_str("i")
                }
            }
            Expr::S => f.write_str("s"),
            Expr::Param(k) => write!(f, "p{k}"),
            Expr::Neg(a) => {
                f.write_str("-")?;
                a.fmt_child(f, 4)
            }
            Expr::Add(a, b) => {
                a.fmt_child(f, 1)?;
                f.write_str(" + ")?;
                b.fmt_child(f, 2)
            }
            Expr::Sub(a, b) => {
                a.fmt_child(f, 1)?;
                f.write_str(" - ")?;
                b.fmt_child(f, 2)
            }
            Expr::Mul(a, b) => {
                a.fmt_child(f, 2)?;
                f.write_str("*")?;
                b.fmt_child(f, 4)
            }
            Expr::Div(a, b) => {
                a.fmt_child(f, 2)?;
                f.write_str("/")?;
                b.fmt_child(f, 4)
            }
            Expr::Pow(a, e) => {
                a.fmt_child(f, 5)?;
                match (e.num, e.den) {
                    (n, 1) if n >= 0 => write!(f, "^{n}"),
                    (n, 1) => write!(f, "^({n})"),
                    (n, d) => write!(f, "^({n}/{d})"),
                }
            }
            Expr::Sqrt(a) => write!(f, "sqrt({a})"),
            Expr::Exp(a) => write!(f, "exp({a})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn parses_reference_shapes() {
        assert_eq!(
            parse_coeff("s^2", 0).unwrap(),
            Expr::Pow(Box::new(Expr::S), Exponent::integer(2))
        );
        assert_eq!(
            parse_coeff("1/sqrt(s)", 0).unwrap(),
            Expr::one().div(Expr::S.sqrt())
        );
        assert_eq!(
            parse_coeff("exp(-1*s)", 0).unwrap(),
            Expr::one().mul(Expr::S).neg().exp()
        );
    }

    #[test]
    fn precedence_and_whitespace() {
        let a = parse_coeff(" 2 + 3 * s ^ 2 ", 0).unwrap();
        let b = parse_coeff("2+(3*(s^2))", 0).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            parse_coeff("-s^2", 0).unwrap(),
            Expr::Pow(Box::new(Expr::S), Exponent::integer(2)).neg()
        );
        assert_eq!(
            parse_coeff("2*-s", 0).unwrap(),
            Expr::num(2.0).mul(Expr::S.neg())
        );
        let sub = parse_coeff("1 - 2 - 3", 0).unwrap();
        assert_eq!(sub.eval(c(0.0, 0.0), &[]).unwrap(), c(-4.0, 0.0));
    }

    #[test]
    fn evaluates_reference_values() {
        let e = parse_coeff("s^2", 0).unwrap();
        assert_eq!(e.eval(c(0.0, 2.0), &[]).unwrap(), c(-4.0, 0.0));
        let e = parse_coeff("exp(-1*s)", 0).unwrap();
        assert_eq!(e.eval(c(0.0, 0.0), &[]).unwrap(), c(1.0, 0.0));
        let e = parse_coeff("1/(s+1.05)", 0).unwrap();
        let v = e.eval(c(0.0, 0.0), &[]).unwrap();
        assert!((v.re - 1.0 / 1.05).abs() <= 2.0 * f64::EPSILON && v.im == 0.0);
        assert!((v.re - 0.952_380_952_380_952_4).abs() < 1e-15);
    }

    #[test]
    fn parameters_and_imaginary_literals() {
        let e = parse_coeff("-p2*s + 2i", 2).unwrap();
        let v = e.eval(c(1.0, 0.0), &[0.0, 3.0]).unwrap();
        assert_eq!(v, c(-3.0, 2.0));
        assert_eq!(parse_coeff("i*i", 0).unwrap().eval(c(0.0, 0.0), &[]).unwrap(), c(-1.0, 0.0));
        assert!(matches!(
            e.eval(c(0.0, 0.0), &[1.0]),
            Err(EvalError::MissingParam { index: 2, len: 1 })
        ));
    }

    #[test]
    fn parse_errors_carry_offsets() {
        let err = parse_coeff("s + q", 0).unwrap_err();
        assert_eq!(err.offset, 4);
        assert_eq!(err.kind, ParseErrorKind::UnknownSymbol("q".into()));

        let err = parse_coeff("p3*s", 2).unwrap_err();
        assert_eq!(
            err.kind,
            ParseErrorKind::ParamOutOfRange {
                index: 3,
                declared: 2
            }
        );
        let err = parse_coeff("p0", 2).unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::ParamOutOfRange { index: 0, .. }));

        let err = parse_coeff("(s + 1", 0).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnexpectedEnd);
        assert_eq!(err.offset, 6);

        let err = parse_coeff("s $ 1", 0).unwrap_err();
        assert_eq!((err.offset, err.kind), (2, ParseErrorKind::TrailingInput));

        assert!(parse_coeff("s^0.5", 0).is_err());
        assert!(parse_coeff("s^(1/0)", 0).is_err());
        assert!(parse_coeff("", 0).is_err());
    }

    #[test]
    fn division_by_zero_and_branch_point() {
        let e = parse_coeff("1/(s+1)", 0).unwrap();
        assert_eq!(e.eval(c(-1.0, 0.0), &[]), Err(EvalError::DivisionByZero));
        let e = parse_coeff("sqrt(s)", 0).unwrap();
        assert_eq!(e.eval(c(0.0, 0.0), &[]), Err(EvalError::BranchPoint));
        let e = parse_coeff("s^(-2)", 0).unwrap();
        assert_eq!(e.eval(c(0.0, 0.0), &[]), Err(EvalError::DivisionByZero));
        let e = parse_coeff("s^(1/3)", 0).unwrap();
        assert_eq!(e.eval(c(0.0, 0.0), &[]).unwrap(), c(0.0, 0.0));
        let e = parse_coeff("exp(s)", 0).unwrap();
        assert_eq!(e.eval(c(1000.0, 0.0), &[]), Err(EvalError::NonFinite));
    }

    #[test]
    fn principal_branch() {
        let e = parse_coeff("sqrt(s)", 0).unwrap();
        // arg(-4) = pi, so sqrt(-4) = 2i on both signed zeros
        assert!((e.eval(c(-4.0, 0.0), &[]).unwrap() - c(0.0, 2.0)).norm() < 1e-15);
        assert!((e.eval(c(-4.0, -0.0), &[]).unwrap() - c(0.0, 2.0)).norm() < 1e-15);
        let v = e.eval(c(0.0, 2.0), &[]).unwrap();
        assert!((v - c(1.0, 1.0)).norm() < 1e-15);

        // s^(3/2) composes root then integer power
        let e = parse_coeff("s^(3/2)", 0).unwrap();
        let v = e.eval(c(0.0, 4.0), &[]).unwrap();
        let root = c(2.0f64.sqrt(), 2.0f64.sqrt());
        assert!((v - root * root * root).norm() < 1e-13);

        // cube root of -8 on the principal sheet is 2 e^{i pi/3}
        let e = parse_coeff("s^(1/3)", 0).unwrap();
        let v = e.eval(c(-8.0, 0.0), &[]).unwrap();
        assert!((v - Complex64::from_polar(2.0, core::f64::consts::FRAC_PI_3)).norm() < 1e-14);
    }

    #[test]
    fn rational_exponents_reduce() {
        let e = parse_coeff("s^(2/4)", 0).unwrap();
        assert_eq!(e, Expr::Pow(Box::new(Expr::S), Exponent::new(1, 2).unwrap()));
        let e = parse_coeff("s^(-4/2)", 0).unwrap();
        assert_eq!(e, Expr::Pow(Box::new(Expr::S), Exponent::integer(-2)));
    }

    #[test]
    fn display_round_trips() {
        for text in [
            "s^2",
            "-1/sqrt(s)",
            "exp(-1*s)",
            "1/(s + 1.05)",
            "-p1",
            "(s - 2)^(-3/2)*p2 + 1e-300",
            "neg(s - -s)",
            "2.5i*s - (1 + 2i)",
            "(s^2)^3",
            "1 - (2 - 3)",
        ] {
            let e = parse_coeff(text, 2).unwrap();
            let printed = format!("{e}");
            let again = parse_coeff(&printed, 2).unwrap();
            assert_eq!(e, again, "{text} -> {printed}");
        }
        let negative_literal = Expr::Num(c(-1.5, -0.25)).mul(Expr::S);
        let printed = format!("{negative_literal}");
        let again = parse_coeff(&printed, 0).unwrap();
        let z = c(0.3, 1.7);
        assert_eq!(negative_literal.eval(z, &[]), again.eval(z, &[]));
    }

    #[test]
    fn feature_queries() {
        let e = parse_coeff("s^2 - 1/sqrt(s) + p3", 3).unwrap();
        assert_eq!(e.max_param_index(), 3);
        assert!(e.has_branch_cut());
        assert!(e.has_real_literals());
        assert!(!parse_coeff("2i*s", 0).unwrap().has_real_literals());
        assert!(!parse_coeff("exp(-s)", 0).unwrap().has_branch_cut());
    }
}
