//! Problem-file language.
//!
//! ```text
//! problem := stmt+
//! stmt    := key ':' value ';'
//! key     := equation | m1 | m2 | data | trunc_t | trunc_z | kappa | gevrey_s
//! ```
//!
//! Equations are polynomials in `L` (λ) and `Z` (ζ) with `+ - * / ^ ( )`,
//! implicit multiplication, rationals `p/q`, decimals and imaginary literals
//! such as `2i`. Data is a comma-separated list of `[c0, c1, ...]`,
//! `rat(p(z)/q(z))` or `gamma_coeffs(s)`. `#` starts a comment.

use std::collections::BTreeMap;
use std::fmt;

use num::complex::Complex64;
use num::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use msumma_core::characteristic::{characteristic, CharPolynomial};
use msumma_core::moments::{gamma_scaled, MomentFunction, Rational};
use msumma_core::{RamifiedSeries, ScaledComplex};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub expected: Vec<String>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected {})", self.expected.join(", "))?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseError {}

/// Well-formed input that does not describe a solvable problem.
#[derive(Debug, Clone, PartialEq)]
pub struct SemanticError {
    pub message: String,
    pub hint: String,
}

impl fmt::Display for SemanticError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.message)?;
        if !self.hint.is_empty() {
            write!(f, "\n  hint: {}", self.hint)?;
        }
        Ok(())
    }
}

impl std::error::Error for SemanticError {}

fn semantic(message: impl Into<String>, hint: impl Into<String>) -> SemanticError {
    SemanticError {
        message: message.into(),
        hint: hint.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(Rational),
    Imag(Rational),
    Var(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
}

#[derive(Debug, Clone, PartialEq)]
pub enum MomentAtom {
    Gamma(Rational),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentExpr {
    /// `(divide, atom)` pairs; the first entry is never a divisor.
    pub factors: Vec<(bool, MomentAtom)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SeriesSpec {
    Inline(Vec<Expr>),
    Rat(Expr),
    GammaCoeffs(Rational),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ProblemFile {
    pub equation: Option<Expr>,
    pub m1: Option<MomentExpr>,
    pub m2: Option<MomentExpr>,
    pub data: Vec<SeriesSpec>,
    pub trunc_t: Option<u64>,
    pub trunc_z: Option<u64>,
    pub kappa: Option<u64>,
    pub gevrey_s: Option<Rational>,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(Rational),
    Imag(Rational),
    Punct(char),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Num(r) => format!("number `{r}`"),
            Tok::Imag(r) => format!("imaginary `{r}i`"),
            Tok::Punct(c) => format!("`{c}`"),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn decimal(int: &str, frac: &str) -> Option<Rational> {
    let digits = format!("{int}{frac}");
    let n: i64 = digits.parse().ok()?;
    let d = 10i64.checked_pow(frac.len() as u32)?;
    Some(Rational::new(n, d))
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let (l0, c0) = (line, col);
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let int: String = chars[start..i].iter().collect();
            let mut frac = String::new();
            if i < chars.len() && chars[i] == '.' {
                i += 1;
                let fs = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                frac = chars[fs..i].iter().collect();
            }
            let value = decimal(&int, &frac).ok_or_else(|| ParseError {
                line: l0,
                column: c0,
                message: "numeric literal out of range".into(),
                expected: Vec::new(),
            })?;
            let imag = i < chars.len()
                && chars[i] == 'i'
                && !chars.get(i + 1).is_some_and(|d| d.is_alphanumeric() || *d == '_');
            if imag {
                i += 1;
            }
            col += i - start;
            out.push(Token {
                tok: if imag { Tok::Imag(value) } else { Tok::Num(value) },
                line: l0,
                column: c0,
            });
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            let word: String = chars[start..i].iter().collect();
            let tok = if word == "i" { Tok::Imag(Rational::one()) } else { Tok::Ident(word) };
            out.push(Token { tok, line: l0, column: c0 });
            continue;
        }
        if ":;,()[]+-*/^".contains(c) {
            out.push(Token {
                tok: Tok::Punct(c),
                line: l0,
                column: c0,
            });
            i += 1;
            col += 1;
            continue;
        }
        return Err(ParseError {
            line: l0,
            column: c0,
            message: format!("unexpected character `{c}`"),
            expected: Vec::new(),
        });
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        column: col,
    });
    Ok(out)
}

const KEYS: [&str; 8] = ["equation", "m1", "m2", "data", "trunc_t", "trunc_z", "kappa", "gevrey_s"];

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, message: impl Into<String>, expected: &[&str]) -> ParseError {
        let t = self.peek();
        ParseError {
            line: t.line,
            column: t.column,
            message: message.into(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn unexpected(&self, expected: &[&str]) -> ParseError {
        let found = self.peek().tok.describe();
        self.error_here(format!("unexpected {found}"), expected)
    }

    fn is_punct(&self, c: char) -> bool {
        self.peek().tok == Tok::Punct(c)
    }

    fn expect_punct(&mut self, c: char) -> Result<(), ParseError> {
        if self.is_punct(c) {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&[&format!("`{c}`")]))
        }
    }

    fn problem(&mut self) -> Result<ProblemFile, ParseError> {
        let mut pf = ProblemFile::default();
        let mut seen: Vec<String> = Vec::new();
        if self.peek().tok == Tok::Eof {
            return Err(self.error_here("empty problem file", &["key"]));
        }
        while self.peek().tok != Tok::Eof {
            let key = match &self.peek().tok {
                Tok::Ident(k) if KEYS.contains(&k.as_str()) => k.clone(),
                _ => return Err(self.unexpected(&KEYS)),
            };
            if seen.contains(&key) {
                return Err(self.error_here(format!("duplicate key `{key}`"), &[]));
            }
            seen.push(key.clone());
            self.bump();
            self.expect_punct(':')?;
            match key.as_str() {
                "equation" => pf.equation = Some(self.expr(&["L", "Z"])?),
                "m1" => pf.m1 = Some(self.moment()?),
                "m2" => pf.m2 = Some(self.moment()?),
                "data" => pf.data = self.data()?,
                "trunc_t" => pf.trunc_t = Some(self.integer()?),
                "trunc_z" => pf.trunc_z = Some(self.integer()?),
                "kappa" => pf.kappa = Some(self.integer()?),
                "gevrey_s" => pf.gevrey_s = Some(self.signed_rational()?),
                _ => unreachable!(),
            }
            if !self.is_punct(';') {
                return Err(self.unexpected(&["`;`", "operator"]));
            }
            self.bump();
        }
        Ok(pf)
    }

    fn integer(&mut self) -> Result<u64, ParseError> {
        match self.peek().tok.clone() {
            Tok::Num(r) if r.is_integer() && !r.is_negative() => {
                self.bump();
                Ok(r.to_integer() as u64)
            }
            _ => Err(self.unexpected(&["nonnegative integer"])),
        }
    }

    fn unsigned_rational(&mut self) -> Result<Rational, ParseError> {
        let Tok::Num(n) = self.peek().tok.clone() else {
            return Err(self.unexpected(&["rational"]));
        };
        self.bump();
        if self.is_punct('/') {
            self.bump();
            let Tok::Num(d) = self.peek().tok.clone() else {
                return Err(self.unexpected(&["rational"]));
            };
            if d.is_zero() {
                return Err(self.error_here("division by zero", &[]));
            }
            self.bump();
            return Ok(n / d);
        }
        Ok(n)
    }

    fn signed_rational(&mut self) -> Result<Rational, ParseError> {
        if self.is_punct('-') {
            self.bump();
            return Ok(-self.unsigned_rational()?);
        }
        self.unsigned_rational()
    }

    fn moment(&mut self) -> Result<MomentExpr, ParseError> {
        let mut factors = vec![(false, self.moment_atom()?)];
        loop {
            let div = if self.is_punct('*') {
                false
            } else if self.is_punct('/') {
                true
            } else {
                break;
            };
            self.bump();
            factors.push((div, self.moment_atom()?));
        }
        Ok(MomentExpr { factors })
    }

    fn moment_atom(&mut self) -> Result<MomentAtom, ParseError> {
        match &self.peek().tok {
            Tok::Ident(w) if w == "Gamma" => {
                self.bump();
                self.expect_punct('(')?;
                let s = self.signed_rational()?;
                self.expect_punct(')')?;
                Ok(MomentAtom::Gamma(s))
            }
            _ => Err(self.unexpected(&["`Gamma`"])),
        }
    }

    fn data(&mut self) -> Result<Vec<SeriesSpec>, ParseError> {
        let mut out = vec![self.series_spec()?];
        while self.is_punct(',') {
            self.bump();
            out.push(self.series_spec()?);
        }
        Ok(out)
    }

    fn series_spec(&mut self) -> Result<SeriesSpec, ParseError> {
        if self.is_punct('[') {
            self.bump();
            let mut items = vec![self.expr(&[])?];
            while self.is_punct(',') {
                self.bump();
                items.push(self.expr(&[])?);
            }
            self.expect_punct(']')?;
            return Ok(SeriesSpec::Inline(items));
        }
        match &self.peek().tok {
            Tok::Ident(w) if w == "rat" => {
                self.bump();
                self.expect_punct('(')?;
                let e = self.expr(&["z"])?;
                self.expect_punct(')')?;
                Ok(SeriesSpec::Rat(e))
            }
            Tok::Ident(w) if w == "gamma_coeffs" => {
                self.bump();
                self.expect_punct('(')?;
                let s = self.signed_rational()?;
                self.expect_punct(')')?;
                Ok(SeriesSpec::GammaCoeffs(s))
            }
            _ => Err(self.unexpected(&["`[`", "`rat`", "`gamma_coeffs`"])),
        }
    }

    fn expr(&mut self, vars: &[&str]) -> Result<Expr, ParseError> {
        let mut lhs = self.term(vars)?;
        loop {
            if self.is_punct('+') {
                self.bump();
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term(vars)?));
            } else if self.is_punct('-') {
                self.bump();
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term(vars)?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn starts_primary(&self) -> bool {
        matches!(self.peek().tok, Tok::Num(_) | Tok::Imag(_) | Tok::Ident(_) | Tok::Punct('('))
    }

    fn term(&mut self, vars: &[&str]) -> Result<Expr, ParseError> {
        let mut lhs = self.unary(vars)?;
        loop {
            if self.is_punct('*') {
                self.bump();
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary(vars)?));
            } else if self.is_punct('/') {
                self.bump();
                let rhs = self.unary(vars)?;
                lhs = fold_div(lhs, rhs);
            } else if self.starts_primary() {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.power(vars)?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self, vars: &[&str]) -> Result<Expr, ParseError> {
        if self.is_punct('-') {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary(vars)?)));
        }
        self.power(vars)
    }

    fn power(&mut self, vars: &[&str]) -> Result<Expr, ParseError> {
        let base = self.primary(vars)?;
        if self.is_punct('^') {
            self.bump();
            let Tok::Num(r) = self.peek().tok.clone() else {
                return Err(self.unexpected(&["nonnegative integer"]));
            };
            let e = r.to_u32().filter(|_| r.is_integer());
            let Some(e) = e else {
                return Err(self.unexpected(&["nonnegative integer"]));
            };
            self.bump();
            return Ok(Expr::Pow(Box::new(base), e));
        }
        Ok(base)
    }

    fn primary(&mut self, vars: &[&str]) -> Result<Expr, ParseError> {
        let mut expected: Vec<String> = vec!["number".into(), "`(`".into()];
        expected.extend(vars.iter().map(|v| format!("`{v}`")));
        let expected: Vec<&str> = expected.iter().map(|s| s.as_str()).collect();
        match self.peek().tok.clone() {
            Tok::Num(r) => {
                self.bump();
                Ok(Expr::Num(r))
            }
            Tok::Imag(r) => {
                self.bump();
                Ok(Expr::Imag(r))
            }
            Tok::Ident(w) if vars.contains(&w.as_str()) => {
                self.bump();
                Ok(Expr::Var(w))
            }
            Tok::Ident(w) => Err(self.error_here(format!("unknown symbol `{w}`"), &expected)),
            Tok::Punct('(') => {
                self.bump();
                let e = self.expr(vars)?;
                self.expect_punct(')')?;
                Ok(e)
            }
            _ => Err(self.unexpected(&expected)),
        }
    }
}

fn fold_div(lhs: Expr, rhs: Expr) -> Expr {
    match (&lhs, &rhs) {
        (Expr::Num(a), Expr::Num(b)) if !b.is_zero() => Expr::Num(a / b),
        (Expr::Imag(a), Expr::Num(b)) if !b.is_zero() => Expr::Imag(a / b),
        _ => Expr::Div(Box::new(lhs), Box::new(rhs)),
    }
}

/// Parses a constant such as `0.05i`, `-1/2` or `1+2i`.
pub fn parse_complex(text: &str) -> Result<Complex64, String> {
    let toks = lex(text).map_err(|e| e.to_string())?;
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr(&[]).map_err(|e| e.to_string())?;
    if p.peek().tok != Tok::Eof {
        return Err(p.unexpected(&["end of input"]).to_string());
    }
    constant(&e).map_err(|e| e.to_string())
}

pub fn parse_problem(text: &str) -> Result<ProblemFile, ParseError> {
    let toks = lex(text)?;
    Parser { toks, pos: 0 }.problem()
}

// Pretty-printing. Precedences: 1 additive, 2 multiplicative, 3 unary, 4 power, 5 atom.
fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Mul(..) | Expr::Div(..) => 2,
        Expr::Num(r) | Expr::Imag(r) if !r.is_integer() => 2,
        Expr::Neg(_) => 3,
        Expr::Pow(..) => 4,
        _ => 5,
    }
}

fn wrap(e: &Expr, min: u8) -> String {
    if prec(e) < min {
        format!("({e})")
    } else {
        e.to_string()
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(r) => write!(f, "{r}"),
            Expr::Imag(r) => {
                if r.is_integer() {
                    write!(f, "{}i", r.numer())
                } else {
                    write!(f, "{}i/{}", r.numer(), r.denom())
                }
            }
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Neg(e) => write!(f, "-{}", wrap(e, 3)),
            Expr::Add(a, b) => write!(f, "{} + {}", wrap(a, 1), wrap(b, 2)),
            Expr::Sub(a, b) => write!(f, "{} - {}", wrap(a, 1), wrap(b, 2)),
            Expr::Mul(a, b) => write!(f, "{}*{}", wrap(a, 2), wrap(b, 3)),
            Expr::Div(a, b) => write!(f, "{}/{}", wrap(a, 2), wrap(b, 3)),
            Expr::Pow(b, e) => write!(f, "{}^{e}", wrap(b, 5)),
        }
    }
}

impl fmt::Display for MomentExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (div, MomentAtom::Gamma(s))) in self.factors.iter().enumerate() {
            if i > 0 {
                f.write_str(if *div { "/" } else { "*" })?;
            }
            write!(f, "Gamma({s})")?;
        }
        Ok(())
    }
}

impl fmt::Display for SeriesSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeriesSpec::Inline(items) => {
                let parts: Vec<String> = items.iter().map(|e| e.to_string()).collect();
                write!(f, "[{}]", parts.join(", "))
            }
            SeriesSpec::Rat(e) => write!(f, "rat({e})"),
            SeriesSpec::GammaCoeffs(s) => write!(f, "gamma_coeffs({s})"),
        }
    }
}

impl fmt::Display for ProblemFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(e) = &self.equation {
            writeln!(f, "equation: {e};")?;
        }
        if let Some(m) = &self.m1 {
            writeln!(f, "m1: {m};")?;
        }
        if let Some(m) = &self.m2 {
            writeln!(f, "m2: {m};")?;
        }
        if !self.data.is_empty() {
            let parts: Vec<String> = self.data.iter().map(|d| d.to_string()).collect();
            writeln!(f, "data: {};", parts.join(", "))?;
        }
        if let Some(v) = self.trunc_t {
            writeln!(f, "trunc_t: {v};")?;
        }
        if let Some(v) = self.trunc_z {
            writeln!(f, "trunc_z: {v};")?;
        }
        if let Some(v) = self.kappa {
            writeln!(f, "kappa: {v};")?;
        }
        if let Some(v) = self.gevrey_s {
            writeln!(f, "gevrey_s: {v};")?;
        }
        Ok(())
    }
}

/// Polynomial in up to two symbols, keyed by exponents.
type Poly = BTreeMap<(u32, u32), Complex64>;

fn poly_const(c: Complex64) -> Poly {
    let mut p = Poly::new();
    if c != Complex64::zero() {
        p.insert((0, 0), c);
    }
    p
}

fn poly_add(a: &Poly, b: &Poly, sign: f64) -> Poly {
    let mut out = a.clone();
    for (k, v) in b {
        *out.entry(*k).or_insert(Complex64::zero()) += v * sign;
    }
    out.retain(|_, v| *v != Complex64::zero());
    out
}

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::new();
    for (ka, va) in a {
        for (kb, vb) in b {
            *out.entry((ka.0 + kb.0, ka.1 + kb.1)).or_insert(Complex64::zero()) += va * vb;
        }
    }
    out.retain(|_, v| *v != Complex64::zero());
    out
}

fn poly_constant_value(p: &Poly) -> Option<Complex64> {
    match p.len() {
        0 => Some(Complex64::zero()),
        1 => p.get(&(0, 0)).copied(),
        _ => None,
    }
}

fn rat_c(r: &Rational) -> Complex64 {
    Complex64::new(r.to_f64().unwrap_or(f64::NAN), 0.0)
}

/// Rational function `num/den` in the symbols.
#[derive(Debug, Clone)]
struct RatFn {
    num: Poly,
    den: Poly,
}

fn eval_ratfn(e: &Expr, slot: &dyn Fn(&str) -> (u32, u32)) -> Result<RatFn, SemanticError> {
    let one = poly_const(Complex64::new(1.0, 0.0));
    Ok(match e {
        Expr::Num(r) => RatFn {
            num: poly_const(rat_c(r)),
            den: one,
        },
        Expr::Imag(r) => RatFn {
            num: poly_const(Complex64::new(0.0, r.to_f64().unwrap_or(f64::NAN))),
            den: one,
        },
        Expr::Var(v) => {
            let mut p = Poly::new();
            p.insert(slot(v), Complex64::new(1.0, 0.0));
            RatFn { num: p, den: one }
        }
        Expr::Neg(a) => {
            let a = eval_ratfn(a, slot)?;
            RatFn {
                num: poly_add(&Poly::new(), &a.num, -1.0),
                den: a.den,
            }
        }
        Expr::Add(a, b) | Expr::Sub(a, b) => {
            let sign = if matches!(e, Expr::Add(..)) { 1.0 } else { -1.0 };
            let (a, b) = (eval_ratfn(a, slot)?, eval_ratfn(b, slot)?);
            if a.den == b.den {
                RatFn {
                    num: poly_add(&a.num, &b.num, sign),
                    den: a.den,
                }
            } else {
                RatFn {
                    num: poly_add(&poly_mul(&a.num, &b.den), &poly_mul(&b.num, &a.den), sign),
                    den: poly_mul(&a.den, &b.den),
                }
            }
        }
        Expr::Mul(a, b) => {
            let (a, b) = (eval_ratfn(a, slot)?, eval_ratfn(b, slot)?);
            RatFn {
                num: poly_mul(&a.num, &b.num),
                den: poly_mul(&a.den, &b.den),
            }
        }
        Expr::Div(a, b) => {
            let (a, b) = (eval_ratfn(a, slot)?, eval_ratfn(b, slot)?);
            if b.num.is_empty() {
                return Err(semantic(format!("division by zero in `{e}`"), "check the denominator"));
            }
            RatFn {
                num: poly_mul(&a.num, &b.den),
                den: poly_mul(&a.den, &b.num),
            }
        }
        Expr::Pow(b, n) => {
            let b = eval_ratfn(b, slot)?;
            let mut out = RatFn {
                num: one.clone(),
                den: one,
            };
            for _ in 0..*n {
                out.num = poly_mul(&out.num, &b.num);
                out.den = poly_mul(&out.den, &b.den);
            }
            out
        }
    })
}

fn lz_slot(v: &str) -> (u32, u32) {
    if v == "L" {
        (1, 0)
    } else {
        (0, 1)
    }
}

/// Expands the equation into `Σ c_ab λ^a ζ^b`.
pub fn equation_polynomial(e: &Expr) -> Result<CharPolynomial, SemanticError> {
    let r = eval_ratfn(e, &lz_slot)?;
    let d = poly_constant_value(&r.den).ok_or_else(|| {
        semantic(
            "the equation must be a polynomial in L and Z",
            "divide only by nonzero constants",
        )
    })?;
    let map: BTreeMap<(u32, u32), Complex64> = r.num.iter().map(|(k, v)| (*k, v / d)).collect();
    CharPolynomial::from_map(&map).map_err(|err| semantic(err.to_string(), "the equation needs at least one term with a power of L"))
}

pub fn moment_function(m: &MomentExpr) -> MomentFunction {
    let mut out = MomentFunction::one();
    for (div, MomentAtom::Gamma(s)) in &m.factors {
        let g = MomentFunction::gamma(*s);
        out = if *div { out.div(&g) } else { out.mul(&g) };
    }
    out
}

fn constant(e: &Expr) -> Result<Complex64, SemanticError> {
    let r = eval_ratfn(e, &|_| (0, 0))?;
    let n = poly_constant_value(&r.num);
    let d = poly_constant_value(&r.den);
    match (n, d) {
        (Some(n), Some(d)) if d != Complex64::zero() => Ok(n / d),
        _ => Err(semantic(format!("`{e}` is not a constant"), "inline coefficients must be numbers")),
    }
}

/// Coefficients `0..=n` of a data series in integer powers of `z`.
pub fn series_coefficients(spec: &SeriesSpec, n: usize) -> Result<Vec<ScaledComplex>, SemanticError> {
    match spec {
        SeriesSpec::Inline(items) => {
            let mut out = vec![ScaledComplex::ZERO; n + 1];
            for (slot, e) in out.iter_mut().zip(items) {
                *slot = ScaledComplex::from_complex(constant(e)?);
            }
            Ok(out)
        }
        SeriesSpec::Rat(e) => {
            let r = eval_ratfn(e, &|_| (0, 1))?;
            let coef = |p: &Poly, k: usize| p.get(&(0, k as u32)).copied().unwrap_or(Complex64::zero());
            let d0 = coef(&r.den, 0);
            if d0 == Complex64::zero() {
                return Err(semantic(
                    format!("rat({e}) is singular at z = 0"),
                    "data must be a power series; shift or rescale the rational function",
                ));
            }
            let mut out: Vec<Complex64> = Vec::with_capacity(n + 1);
            for k in 0..=n {
                let mut acc = coef(&r.num, k);
                for i in 1..=k {
                    acc -= coef(&r.den, i) * out[k - i];
                }
                out.push(acc / d0);
            }
            Ok(out.into_iter().map(ScaledComplex::from_complex).collect())
        }
        SeriesSpec::GammaCoeffs(s) => {
            let sf = s.to_f64().unwrap_or(f64::NAN);
            (0..=n)
                .map(|k| {
                    gamma_scaled(1.0 + sf * k as f64).map_err(|err| {
                        semantic(
                            format!("gamma_coeffs({s}) hits a pole at n = {k}: {err}"),
                            "use a nonnegative growth order",
                        )
                    })
                })
                .collect()
        }
    }
}

/// Fully resolved problem together with the options that were defaulted.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub problem: msumma_core::solver::PdeProblem,
    pub trunc_z: usize,
    pub kappa: u32,
}

pub const DEFAULT_TRUNC_T: u64 = 30;

pub fn resolve(pf: &ProblemFile, trunc_override: Option<usize>) -> Result<Resolved, SemanticError> {
    let eq = pf
        .equation
        .as_ref()
        .ok_or_else(|| semantic("missing `equation`", "add a line such as `equation: L - Z^2;`"))?;
    let p = equation_polynomial(eq)?;
    let n = p.degree() as usize;
    if pf.data.len() != n {
        let hint = if pf.data.len() < n {
            format!("add {} more data series to `data:`", n - pf.data.len())
        } else {
            format!("remove {} data series from `data:`", pf.data.len() - n)
        };
        return Err(semantic(
            format!("equation has degree {n} in L but {} data series were given", pf.data.len()),
            hint,
        ));
    }
    let ch = characteristic(&p).map_err(|e| semantic(e.to_string(), "check the leading coefficient in L"))?;
    let kappa = match pf.kappa {
        Some(k) if k == 0 || !(k as u32).is_multiple_of(ch.kappa) => {
            return Err(semantic(
                format!("kappa = {k} is not a positive multiple of the characteristic ramification {}", ch.kappa),
                format!("use kappa: {};", ch.kappa),
            ))
        }
        Some(k) => k as u32,
        None => ch.kappa,
    };
    let trunc_t = trunc_override.unwrap_or(pf.trunc_t.unwrap_or(DEFAULT_TRUNC_T) as usize);
    let max_b = p.max_zeta_degree() as usize;
    let trunc_z = pf.trunc_z.map(|v| v as usize).unwrap_or(max_b.max(1) * trunc_t + 60);
    let gevrey_s = pf.gevrey_s.unwrap_or_else(|| {
        pf.data
            .iter()
            .filter_map(|d| match d {
                SeriesSpec::GammaCoeffs(s) => Some(*s),
                _ => None,
            })
            .max()
            .unwrap_or_else(Rational::zero)
            .max(Rational::zero())
    });
    let m1 = pf.m1.as_ref().map(moment_function).unwrap_or_else(|| MomentFunction::gamma(Rational::one()));
    let m2 = pf.m2.as_ref().map(moment_function).unwrap_or_else(|| MomentFunction::gamma(Rational::one()));
    let mut data = Vec::with_capacity(n);
    for spec in &pf.data {
        let c = series_coefficients(spec, trunc_z)?;
        let s = RamifiedSeries::new(1, c).map_err(|e| semantic(e.to_string(), ""))?;
        data.push(s.ramify(kappa));
    }
    let problem = msumma_core::solver::PdeProblem::new(p, m1, m2, data, gevrey_s, trunc_t)
        .map_err(|e| semantic(e.to_string(), ""))?;
    Ok(Resolved {
        problem,
        trunc_z,
        kappa,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heat_problem() {
        let pf = parse_problem("equation: L - Z^2; m1: Gamma(1); m2: Gamma(1); data: rat(1/(1-z));").unwrap();
        let r = resolve(&pf, Some(10)).unwrap();
        assert_eq!(r.problem.order(), 1);
        assert_eq!(r.kappa, 1);
        for k in 0..5 {
            assert_eq!(r.problem.data[0].coeff(k).to_f64(), 1.0);
        }
    }

    #[test]
    fn implicit_product_two_roots() {
        let pf = parse_problem("equation: (L - Z)(L + Z);\ndata: rat(1/(1-z)), rat(0);").unwrap();
        let p = equation_polynomial(pf.equation.as_ref().unwrap()).unwrap();
        assert_eq!(p.degree(), 2);
        assert_eq!(p.coeff(0, 2), Complex64::new(-1.0, 0.0));
        assert!(resolve(&pf, Some(5)).is_ok());
        let short = parse_problem("equation: (L - Z)(L + Z); data: rat(1/(1-z));").unwrap();
        let err = resolve(&short, None).unwrap_err();
        assert!(err.hint.contains("add 1"));
    }

    #[test]
    fn gamma_diagnostic() {
        let err = parse_problem("m1: Gamma(;").unwrap_err();
        assert_eq!((err.line, err.column), (1, 11));
        assert_eq!(err.expected, vec!["rational".to_string()]);
    }

    #[test]
    fn literals() {
        let pf = parse_problem("equation: 0.5L + (2+3i)Z^2 - i/4; data: [1, 1/2, -2i];").unwrap();
        let p = equation_polynomial(pf.equation.as_ref().unwrap()).unwrap();
        assert_eq!(p.coeff(1, 0), Complex64::new(0.5, 0.0));
        assert_eq!(p.coeff(0, 2), Complex64::new(2.0, 3.0));
        assert_eq!(p.coeff(0, 0), Complex64::new(0.0, -0.25));
        let c = series_coefficients(&pf.data[0], 4).unwrap();
        assert_eq!(c[2].to_complex(), Complex64::new(0.0, -2.0));
        assert!(c[3].is_zero());
    }

    #[test]
    fn complex_flags() {
        assert_eq!(parse_complex("0.05i").unwrap(), Complex64::new(0.0, 0.05));
        assert_eq!(parse_complex("-0.2").unwrap(), Complex64::new(-0.2, 0.0));
        assert_eq!(parse_complex("1-2i").unwrap(), Complex64::new(1.0, -2.0));
        assert!(parse_complex("1+").is_err());
    }

    #[test]
    fn round_trip() {
        let text = "equation: -L^2*(1/2) + 3i/2*Z - (L - Z)(L + 2Z)/4; m1: Gamma(1/2)*Gamma(1)/Gamma(-1/2); \
                    data: [1, -1/3, 2i], rat((1 + z)/(1 - 2z)^2); trunc_t: 7; gevrey_s: -1/2; kappa: 2;";
        let pf = parse_problem(text).unwrap();
        let again = parse_problem(&pf.to_string()).unwrap();
        assert_eq!(pf, again, "{pf}");
    }
}
