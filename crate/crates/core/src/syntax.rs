//! Text form of coefficients and field expressions.
//!
//! ```text
//! expr    := term (("+" | "-") term)*
//! term    := unary (("*" | "/") unary)*
//! unary   := ("-" | "+") unary | power
//! power   := primary ("^" int)?
//! primary := int | "kappa" | generator | "d" "(" expr ")" | "d" int "(" expr ")"
//!          | ":" primary+ ":" | "(" expr ")"
//! ```
//!
//! `:a b c:` is the right-nested Wick product `:a (:b c:):`. A `:` inside a
//! group always closes it, so nested groups need parentheses: `:(:b c:) c:`.

use std::fmt;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::algebras::AlgebraSpec;
use crate::coeff::Coefficient;
use crate::engine::{Engine, EngineError};
use crate::expr::{FieldExpr, WickMonomial};

const MAX_DEPTH: usize = 128;
const MAX_EXPONENT: u32 = 64;
const MAX_DERIVATIVE: u32 = 32;
const MAX_DIGITS: usize = 200;
const MAX_DEGREE: usize = 256;
const MAX_TERMS: usize = 20_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyntaxError {
    pub pos: Pos,
    pub message: String,
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.pos.line, self.pos.column, self.message)
    }
}

impl std::error::Error for SyntaxError {}

fn err<T>(pos: Pos, message: impl Into<String>) -> Result<T, SyntaxError> {
    Err(SyntaxError {
        pos,
        message: message.into(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Colon,
    End,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Int(n) => format!("number `{n}`"),
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Plus => "`+`".into(),
        Tok::Minus => "`-`".into(),
        Tok::Star => "`*`".into(),
        Tok::Slash => "`/`".into(),
        Tok::Caret => "`^`".into(),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::Colon => "`:`".into(),
        Tok::End => "end of input".into(),
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, Pos)>, SyntaxError> {
    let mut out = Vec::new();
    let mut line = 1;
    let mut column = 1;
    let mut chars = src.chars().peekable();
    while let Some(&ch) = chars.peek() {
        let pos = Pos { line, column };
        if ch == '\n' {
            chars.next();
            line += 1;
            column = 1;
            continue;
        }
        if ch.is_whitespace() {
            chars.next();
            column += 1;
            continue;
        }
        if ch.is_ascii_digit() {
            let mut s = String::new();
            while let Some(&d) = chars.peek() {
                if !d.is_ascii_digit() {
                    break;
                }
                s.push(d);
                chars.next();
                column += 1;
            }
            if s.len() > MAX_DIGITS {
                return err(pos, "integer literal is too long");
            }
            out.push((Tok::Int(s.parse().expect("digits")), pos));
            continue;
        }
        if ch.is_ascii_alphabetic() || ch == '_' {
            let mut s = String::new();
            while let Some(&d) = chars.peek() {
                if !(d.is_ascii_alphanumeric() || d == '_') {
                    break;
                }
                s.push(d);
                chars.next();
                column += 1;
            }
            out.push((Tok::Ident(s), pos));
            continue;
        }
        let t = match ch {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ':' => Tok::Colon,
            _ => return err(pos, format!("unexpected character `{ch}`")),
        };
        chars.next();
        column += 1;
        out.push((t, pos));
    }
    out.push((Tok::End, Pos { line, column }));
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AstKind {
    Int(BigInt),
    Kappa,
    Lambda,
    Generator(String),
    Neg(Box<Ast>),
    /// Terms with a flag set on subtracted ones.
    Sum(Vec<(bool, Ast)>),
    /// Factors with a flag set on divisors; the first flag is always clear.
    Product(Vec<(bool, Ast)>),
    Pow(Box<Ast>, u32),
    Derivative(u32, Box<Ast>),
    Wick(Vec<Ast>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ast {
    pub kind: AstKind,
    pub pos: Pos,
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    depth: usize,
}

fn derivative_order(name: &str) -> Option<u32> {
    let rest = name.strip_prefix('d')?;
    if rest.is_empty() {
        return Some(1);
    }
    if !rest.bytes().all(|b| b.is_ascii_digit()) || rest.len() > 6 {
        return None;
    }
    rest.parse().ok()
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<(), SyntaxError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            err(self.pos(), format!("expected {}, found {}", describe(&want), describe(self.peek())))
        }
    }

    fn enter(&mut self) -> Result<(), SyntaxError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return err(self.pos(), "expression is nested too deeply");
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Ast, SyntaxError> {
        self.enter()?;
        let pos = self.pos();
        let mut terms = vec![(false, self.term()?)];
        loop {
            let negative = match self.peek() {
                Tok::Plus => false,
                Tok::Minus => true,
                _ => break,
            };
            self.bump();
            terms.push((negative, self.term()?));
        }
        self.depth -= 1;
        if terms.len() == 1 {
            return Ok(terms.pop().expect("one term").1);
        }
        Ok(Ast {
            kind: AstKind::Sum(terms),
            pos,
        })
    }

    fn term(&mut self) -> Result<Ast, SyntaxError> {
        let pos = self.pos();
        let mut factors = vec![(false, self.unary()?)];
        loop {
            let divide = match self.peek() {
                Tok::Star => false,
                Tok::Slash => true,
                _ => break,
            };
            self.bump();
            factors.push((divide, self.unary()?));
        }
        if factors.len() == 1 {
            return Ok(factors.pop().expect("one factor").1);
        }
        Ok(Ast {
            kind: AstKind::Product(factors),
            pos,
        })
    }

    fn unary(&mut self) -> Result<Ast, SyntaxError> {
        let pos = self.pos();
        match self.peek() {
            Tok::Minus => {
                self.bump();
                self.enter()?;
                let inner = self.unary()?;
                self.depth -= 1;
                Ok(Ast {
                    kind: AstKind::Neg(Box::new(inner)),
                    pos,
                })
            }
            Tok::Plus => {
                self.bump();
                self.enter()?;
                let inner = self.unary()?;
                self.depth -= 1;
                Ok(inner)
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Ast, SyntaxError> {
        let base = self.primary()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        let pos = self.pos();
        self.bump();
        let (t, p) = self.bump();
        let Tok::Int(k) = t else {
            return err(p, "exponent must be a nonnegative integer");
        };
        let k = k.to_u32().filter(|&k| k <= MAX_EXPONENT);
        let Some(k) = k else {
            return err(p, format!("exponent exceeds {MAX_EXPONENT}"));
        };
        Ok(Ast {
            kind: AstKind::Pow(Box::new(base), k),
            pos,
        })
    }

    fn primary(&mut self) -> Result<Ast, SyntaxError> {
        let (t, pos) = self.bump();
        let kind = match t {
            Tok::Int(n) => AstKind::Int(n),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                return Ok(e);
            }
            Tok::Colon => {
                self.enter()?;
                let mut factors = Vec::new();
                while *self.peek() != Tok::Colon {
                    if *self.peek() == Tok::End {
                        return err(self.pos(), "unterminated Wick product; expected `:`");
                    }
                    factors.push(self.primary()?);
                }
                self.bump();
                self.depth -= 1;
                if factors.is_empty() {
                    return err(pos, "empty Wick product `::`");
                }
                AstKind::Wick(factors)
            }
            Tok::Ident(name) => {
                if name == "kappa" {
                    AstKind::Kappa
                } else if name == "lambda" {
                    AstKind::Lambda
                } else if let (Some(k), Tok::LParen) = (derivative_order(&name), self.peek()) {
                    if k > MAX_DERIVATIVE {
                        return err(pos, format!("derivative order exceeds {MAX_DERIVATIVE}"));
                    }
                    self.bump();
                    self.enter()?;
                    let e = self.expr()?;
                    self.depth -= 1;
                    self.expect(Tok::RParen)?;
                    AstKind::Derivative(k, Box::new(e))
                } else {
                    AstKind::Generator(name)
                }
            }
            other => return err(pos, format!("expected an operand, found {}", describe(&other))),
        };
        Ok(Ast { kind, pos })
    }
}

/// Parses text into an unchecked syntax tree.
pub fn parse(src: &str) -> Result<Ast, SyntaxError> {
    let mut p = Parser {
        toks: lex(src)?,
        at: 0,
        depth: 0,
    };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return err(p.pos(), format!("unexpected {}", describe(p.peek())));
    }
    Ok(e)
}

#[derive(Clone, Debug)]
enum Value {
    Scalar(Coefficient),
    Field(FieldExpr),
}

/// Errors from parsing and interpreting an expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseError {
    Syntax(SyntaxError),
    Engine(EngineError),
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseError::Syntax(e) => e.fmt(f),
            ParseError::Engine(e) => e.fmt(f),
        }
    }
}

impl std::error::Error for ParseError {}

impl From<SyntaxError> for ParseError {
    fn from(e: SyntaxError) -> Self {
        ParseError::Syntax(e)
    }
}

impl From<EngineError> for ParseError {
    fn from(e: EngineError) -> Self {
        ParseError::Engine(e)
    }
}

struct Lowering<'a> {
    engine: Option<&'a Engine>,
}

impl Lowering<'_> {
    fn alg(&self) -> Option<&AlgebraSpec> {
        self.engine.map(Engine::algebra)
    }

    fn field(&self, v: Value) -> FieldExpr {
        match v {
            Value::Field(f) => f,
            Value::Scalar(c) => FieldExpr::scalar(c),
        }
    }

    fn check_size(&self, v: Value, pos: Pos) -> Result<Value, ParseError> {
        let ok = match &v {
            Value::Scalar(c) => c.numer().degree().unwrap_or(0) <= MAX_DEGREE && c.denom().degree().unwrap_or(0) <= MAX_DEGREE,
            Value::Field(f) => f.len() <= MAX_TERMS && f.terms().all(|(_, c)| c.numer().degree().unwrap_or(0) <= MAX_DEGREE),
        };
        if ok {
            Ok(v)
        } else {
            Err(SyntaxError {
                pos,
                message: "expression grows too large".into(),
            }
            .into())
        }
    }

    fn lower(&self, ast: &Ast) -> Result<Value, ParseError> {
        let pos = ast.pos;
        let v = match &ast.kind {
            AstKind::Int(n) => Value::Scalar(Coefficient::from_bigint(n.clone())),
            AstKind::Kappa => match self.alg() {
                None => Value::Scalar(Coefficient::kappa()),
                Some(a) => match a.kappa() {
                    Some(k) => Value::Scalar(k.clone()),
                    None => return err(pos, format!("`kappa` is not a parameter of {}", a.key())).map_err(Into::into),
                },
            },
            AstKind::Lambda => {
                return err(pos, "`lambda` is fixed by the algebra selector `bc:<integer>`").map_err(Into::into)
            }
            AstKind::Generator(name) => {
                let Some(a) = self.alg() else {
                    return err(pos, format!("unexpected identifier `{name}` in a coefficient")).map_err(Into::into);
                };
                match a.field(name, 0) {
                    Some(f) => Value::Field(f),
                    None => return err(pos, format!("unknown generator `{name}` in {}", a.key())).map_err(Into::into),
                }
            }
            AstKind::Neg(x) => match self.lower(x)? {
                Value::Scalar(c) => Value::Scalar(-c),
                Value::Field(f) => Value::Field(f.neg()),
            },
            AstKind::Sum(terms) => {
                let mut acc = Value::Scalar(Coefficient::zero());
                for (negative, t) in terms {
                    let sign = if *negative {
                        -Coefficient::one()
                    } else {
                        Coefficient::one()
                    };
                    acc = match (acc, self.lower(t)?) {
                        (Value::Scalar(a), Value::Scalar(b)) => Value::Scalar(a + b * sign),
                        (a, b) => {
                            let mut f = self.field(a);
                            f.add_scaled(&self.field(b), &sign).map_err(EngineError::from)?;
                            Value::Field(f)
                        }
                    };
                    acc = self.check_size(acc, t.pos)?;
                }
                acc
            }
            AstKind::Product(factors) => {
                let mut acc = Value::Scalar(Coefficient::one());
                for (divide, x) in factors {
                    let v = self.lower(x)?;
                    acc = if *divide {
                        let d = match v {
                            Value::Scalar(c) => c,
                            Value::Field(_) => return err(x.pos, "cannot divide by a field").map_err(Into::into),
                        };
                        let Some(inv) = d.recip() else {
                            return err(x.pos, "division by zero").map_err(Into::into);
                        };
                        match acc {
                            Value::Scalar(a) => Value::Scalar(a * inv),
                            Value::Field(f) => Value::Field(f.scale(&inv)),
                        }
                    } else {
                        match (acc, v) {
                            (Value::Scalar(a), Value::Scalar(b)) => Value::Scalar(a * b),
                            (Value::Scalar(c), Value::Field(f)) | (Value::Field(f), Value::Scalar(c)) => {
                                Value::Field(f.scale(&c))
                            }
                            (Value::Field(_), Value::Field(_)) => {
                                return err(x.pos, "cannot multiply two fields; write the Wick product as `:u v:`")
                                    .map_err(Into::into)
                            }
                        }
                    };
                    acc = self.check_size(acc, x.pos)?;
                }
                acc
            }
            AstKind::Pow(x, k) => match self.lower(x)? {
                Value::Scalar(c) => {
                    let deg = c.numer().degree().unwrap_or(0).max(c.denom().degree().unwrap_or(0));
                    if deg * (*k as usize) > MAX_DEGREE {
                        return err(pos, "power grows too large").map_err(Into::into);
                    }
                    Value::Scalar(c.pow(*k))
                }
                Value::Field(_) => return err(pos, "powers of fields are not defined; use Wick products").map_err(Into::into),
            },
            AstKind::Derivative(k, x) => {
                let mut f = self.field(self.lower(x)?);
                for _ in 0..*k {
                    f = f.formal_derivative();
                    if f.len() > MAX_TERMS {
                        return err(pos, "expression grows too large").map_err(Into::into);
                    }
                }
                Value::Field(f)
            }
            AstKind::Wick(factors) => {
                let Some(engine) = self.engine else {
                    return err(pos, "Wick products are not coefficients").map_err(Into::into);
                };
                let mut vals = Vec::with_capacity(factors.len());
                for f in factors {
                    vals.push(self.field(self.lower(f)?));
                }
                let mut acc = vals.pop().expect("nonempty group");
                while let Some(left) = vals.pop() {
                    acc = wick_raw(engine, &left, &acc)?;
                    if acc.len() > MAX_TERMS {
                        return err(pos, "expression grows too large").map_err(Into::into);
                    }
                }
                Value::Field(acc)
            }
        };
        self.check_size(v, pos)
    }
}

/// `:u v:` without re-canonicalizing when `u` is a combination of single
/// field terms (the result is then a literal monomial list); otherwise the
/// engine's Wick product.
fn wick_raw(engine: &Engine, u: &FieldExpr, v: &FieldExpr) -> Result<FieldExpr, EngineError> {
    if u.monomials().any(|m| m.len() > 1) {
        return engine.wick(u, v);
    }
    let key = engine.algebra().key().clone();
    let mut out = FieldExpr::zero();
    for (mu, cu) in u.terms() {
        for (mv, cv) in v.terms() {
            let m = match mu.factors().first() {
                Some(t) => mv.prepend(*t),
                None => mv.clone(),
            };
            out.add_term(m, &(cu * cv));
        }
    }
    Ok(out.with_algebra(key))
}

/// Parses an expression over the engine's algebra. The result is the literal
/// value of the text, not yet in normal form.
pub fn parse_expr(src: &str, engine: &Engine) -> Result<FieldExpr, ParseError> {
    let ast = parse(src)?;
    let l = Lowering { engine: Some(engine) };
    let f = l.field(l.lower(&ast)?);
    Ok(f.with_algebra(engine.algebra().key().clone()))
}

/// Parses a coefficient: integers, `kappa`, `+ - * / ^` and parentheses.
pub fn parse_coefficient(src: &str) -> Result<Coefficient, ParseError> {
    let ast = parse(src)?;
    match (Lowering { engine: None }).lower(&ast)? {
        Value::Scalar(c) => Ok(c),
        Value::Field(_) => err(ast.pos, "expected a coefficient").map_err(Into::into),
    }
}

/// Text of one monomial, e.g. `b`, `d3(c)`, `:d(b) c L:`.
pub fn render_monomial(m: &WickMonomial, alg: &AlgebraSpec) -> String {
    let term = |t: &crate::expr::FieldTerm| {
        let name = &alg.generator(t.generator).name;
        match t.order {
            0 => name.clone(),
            1 => format!("d({name})"),
            k => format!("d{k}({name})"),
        }
    };
    match m.factors() {
        [] => "1".to_string(),
        [t] => term(t),
        ts => format!(":{}:", ts.iter().map(term).collect::<Vec<_>>().join(" ")),
    }
}

/// Coefficient text safe to place before `*`.
fn coefficient_factor(c: &Coefficient) -> String {
    let s = c.to_string();
    let body = s.strip_prefix('-').unwrap_or(&s);
    let mut depth = 0i32;
    let mut top_level_sum = false;
    for (i, ch) in body.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            '+' | '-' if depth == 0 && i > 0 => top_level_sum = true,
            _ => {}
        }
    }
    if top_level_sum {
        format!("({s})")
    } else {
        s
    }
}

/// Deterministic text in canonical monomial order; `parse_expr` inverts it.
pub fn render(e: &FieldExpr, alg: &AlgebraSpec) -> String {
    if e.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (i, (m, c)) in e.terms().enumerate() {
        let piece = if m.is_identity() {
            coefficient_factor(c)
        } else if c.is_one() {
            render_monomial(m, alg)
        } else if (-c).is_one() {
            format!("-{}", render_monomial(m, alg))
        } else {
            format!("{}*{}", coefficient_factor(c), render_monomial(m, alg))
        };
        if i == 0 {
            out.push_str(&piece);
        } else if let Some(rest) = piece.strip_prefix('-') {
            out.push_str(" - ");
            out.push_str(rest);
        } else {
            out.push_str(" + ");
            out.push_str(&piece);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebras::{bc_algebra, brst_algebra};

    fn brst() -> Engine {
        Engine::new(brst_algebra(Coefficient::kappa()).unwrap().0).unwrap()
    }

    #[test]
    fn parses_generators_and_wick_groups() {
        let e = brst();
        let a = e.algebra();
        assert_eq!(parse_expr("b", &e).unwrap(), a.field("b", 0).unwrap());
        let j = parse_expr(":c L: + :b c d(c):", &e).unwrap();
        let mut want = a.wick_monomial(&[("c", 0), ("L", 0)]).unwrap();
        want.add_term(
            WickMonomial::new(vec![a.term(0, 0), a.term(1, 0), a.term(1, 1)]),
            &Coefficient::one(),
        );
        assert_eq!(j, want);
        let s = parse_expr("(kappa/2)*1", &e).unwrap();
        assert_eq!(s, FieldExpr::scalar(Coefficient::kappa() * Coefficient::ratio(1, 2)));
        assert_eq!(parse_expr("d3(c)", &e).unwrap(), a.field("c", 3).unwrap());
    }

    #[test]
    fn errors_carry_positions() {
        let e = brst();
        let ParseError::Syntax(s) = parse_expr("b +\n  * c", &e).unwrap_err() else {
            panic!("expected a syntax error");
        };
        assert_eq!(s.pos, Pos { line: 2, column: 3 });
        assert!(parse_expr("x", &e).is_err());
        assert!(parse_expr("lambda*b", &e).is_err());
        assert!(parse_expr("b*c", &e).is_err());
        assert!(parse_expr(":b c", &e).is_err());
        assert!(parse_expr("b/0", &e).is_err());
        let bc = Engine::new(bc_algebra(2)).unwrap();
        assert!(parse_expr("kappa*b", &bc).is_err());
        let deep = "(".repeat(500) + "b" + &")".repeat(500);
        assert!(parse_expr(&deep, &e).is_err());
    }

    #[test]
    fn nested_wick_uses_the_engine() {
        let e = brst();
        // a composite left factor is normal ordered on the spot
        let x = parse_expr(":(:b c:) d(c):", &e).unwrap();
        assert_eq!(x, e.normal_form(&x).unwrap());
    }

    #[test]
    fn rendering() {
        let e = brst();
        let a = e.algebra();
        assert_eq!(render(&FieldExpr::zero(), a), "0");
        let bc = a.wick_monomial(&[("b", 0), ("c", 0)]).unwrap();
        assert_eq!(render(&bc.neg(), a), "-:b c:");
        let x = a
            .wick_monomial(&[("c", 3), ("c", 0)])
            .unwrap()
            .scale(&((Coefficient::kappa() - Coefficient::from_int(26)) / Coefficient::from_int(12)));
        assert_eq!(render(&x, a), "(kappa - 26)/12*:d3(c) c:");
        let y = a.field("L", 0).unwrap().scale(&(Coefficient::kappa() - Coefficient::from_int(2)));
        assert_eq!(render(&y, a), "(kappa - 2)*L");
        for e2 in [bc.neg(), x.clone(), y.clone(), FieldExpr::scalar(Coefficient::ratio(-3, 2))] {
            assert_eq!(parse_expr(&render(&e2, a), &e).unwrap(), e2);
        }
    }

    #[test]
    fn coefficients_round_trip() {
        for s in ["(kappa - 26)/12", "-2*kappa", "1/(2*kappa + 1)", "kappa^3 - kappa", "-3/2", "0"] {
            let c = parse_coefficient(s).unwrap();
            assert_eq!(parse_coefficient(&c.to_string()).unwrap(), c, "{s}");
        }
        assert!(parse_coefficient("b").is_err());
        assert!(parse_coefficient("kappa^100000").is_err());
    }
}
