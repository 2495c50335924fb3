//! Recursive-descent parser for the modeling language.
//!
//! ```text
//! problem    := (decl | constraint)* ;
//! decl       := "var" IDENT "in" "[" bound "," bound "]" ";" ;
//! constraint := expr "=" expr ";" ;
//! expr       := term (("+"|"-") term)* ;
//! term       := factor (("*"|"/") factor)* ;
//! factor     := atom ("^" INTEGER)? ;
//! atom       := NUMBER | IDENT | ("exp"|"cos"|"sqrt") "(" expr ")"
//!             | "(" expr ")" | "-" factor ;
//! ```
//!
//! `bound` is an optionally signed NUMBER or `inf`. `#` starts a comment
//! that runs to the end of the line.

use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

use crate::domain::IntervalBox;
use crate::expr::{BinaryOp, Constraint, Expr, Problem, UnaryOp, VarId};
use crate::interval::Interval;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: undeclared variable `{name}`")]
    Undeclared { line: usize, col: usize, name: String },
    #[error("{line}:{col}: variable `{name}` declared twice")]
    Redeclared { line: usize, col: usize, name: String },
    #[error("{line}:{col}: exponent must be a positive integer, found `{found}`")]
    BadExponent { line: usize, col: usize, found: String },
    #[error("{line}:{col}: empty domain for `{name}`")]
    EmptyDomain { line: usize, col: usize, name: String },
    #[error("{line}:{col}: only equations are supported; inequality `{op}` is not allowed")]
    Inequality { line: usize, col: usize, op: String },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(String),
    Sym(char),
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
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
        let start = i;
        if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            out.push(Token { tok: Tok::Ident(s), line: tl, col: tc });
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            out.push(Token { tok: Tok::Number(s), line: tl, col: tc });
            continue;
        }
        if c == '<' || c == '>' || c == '!' {
            let op: String = if chars.get(i + 1) == Some(&'=') {
                format!("{c}=")
            } else {
                c.to_string()
            };
            return Err(ParseError::Inequality { line: tl, col: tc, op });
        }
        if "+-*/^()[],;=".contains(c) {
            i += 1;
            col += 1;
            out.push(Token { tok: Tok::Sym(c), line: tl, col: tc });
            continue;
        }
        return Err(ParseError::Syntax { line: tl, col: tc, msg: format!("unexpected character `{c}`") });
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

/// Exact rational value of a decimal literal.
fn decimal_value(s: &str) -> Option<BigRational> {
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(k) => (&s[..k], s[k + 1..].parse::<i64>().ok()?),
        None => (s, 0),
    };
    let (int_part, frac_part) = match mant.split_once('.') {
        Some((a, b)) => (a, b),
        None => (mant, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let num: BigInt = digits.parse().ok()?;
    let scale = exp - frac_part.len() as i64;
    if scale.abs() > 400 {
        // far outside f64 range; only the sign of the exponent matters
        let ten = BigInt::from(10u32).pow(400);
        return Some(if scale > 0 {
            BigRational::from_integer(num * ten)
        } else {
            BigRational::new(num, ten)
        });
    }
    let pow = BigInt::from(10u32).pow(scale.unsigned_abs() as u32);
    Some(if scale >= 0 {
        BigRational::from_integer(num * pow)
    } else {
        BigRational::new(num, pow)
    })
}

/// Enclosure of a nonnegative decimal literal: the literal's float when it is
/// exactly representable, otherwise the two floats around it.
pub fn enclose_decimal(s: &str) -> Result<Interval, ()> {
    let exact = decimal_value(s).ok_or(())?;
    let nearest: f64 = s.parse().map_err(|_| ())?;
    if nearest.is_infinite() {
        return Ok(Interval::new(f64::MAX, f64::INFINITY));
    }
    let as_rational = BigRational::from_float(nearest).ok_or(())?;
    Ok(match as_rational.cmp(&exact) {
        std::cmp::Ordering::Equal => Interval::point(nearest),
        std::cmp::Ordering::Less => Interval::new(nearest, nearest.next_up()),
        std::cmp::Ordering::Greater => Interval::new(nearest.next_down(), nearest),
    })
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    names: Vec<String>,
    domains: Vec<Interval>,
    constraints: Vec<Constraint>,
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

    fn syntax<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        let t = self.peek();
        Err(ParseError::Syntax { line: t.line, col: t.col, msg: msg.into() })
    }

    fn describe(t: &Tok) -> String {
        match t {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(s) => format!("`{s}`"),
            Tok::Sym(c) => format!("`{c}`"),
            Tok::Eof => "end of input".into(),
        }
    }

    fn expect_sym(&mut self, c: char) -> Result<(), ParseError> {
        if self.peek().tok == Tok::Sym(c) {
            self.bump();
            Ok(())
        } else {
            let found = Self::describe(&self.peek().tok);
            self.syntax(format!("expected `{c}`, found {found}"))
        }
    }

    fn problem(&mut self) -> Result<(), ParseError> {
        loop {
            match &self.peek().tok {
                Tok::Eof => return Ok(()),
                Tok::Ident(s) if s == "var" => self.decl()?,
                _ => {
                    let lhs = self.expr()?;
                    self.expect_sym('=')?;
                    let rhs = self.expr()?;
                    self.expect_sym(';')?;
                    self.constraints.push(Constraint::new(lhs, rhs));
                }
            }
        }
    }

    fn decl(&mut self) -> Result<(), ParseError> {
        self.bump(); // var
        let name_tok = self.bump();
        let name = match name_tok.tok {
            Tok::Ident(ref s) if !is_keyword(s) => s.clone(),
            ref other => {
                return Err(ParseError::Syntax {
                    line: name_tok.line,
                    col: name_tok.col,
                    msg: format!("expected variable name, found {}", Self::describe(other)),
                })
            }
        };
        if self.names.contains(&name) {
            return Err(ParseError::Redeclared { line: name_tok.line, col: name_tok.col, name });
        }
        match &self.peek().tok {
            Tok::Ident(s) if s == "in" => {
                self.bump();
            }
            other => {
                let found = Self::describe(other);
                return self.syntax(format!("expected `in`, found {found}"));
            }
        }
        self.expect_sym('[')?;
        let lo = self.bound()?;
        self.expect_sym(',')?;
        let hi = self.bound()?;
        self.expect_sym(']')?;
        self.expect_sym(';')?;
        let dom = Interval::new(lo.lo(), hi.hi());
        if dom.is_empty() {
            return Err(ParseError::EmptyDomain { line: name_tok.line, col: name_tok.col, name });
        }
        self.names.push(name);
        self.domains.push(dom);
        Ok(())
    }

    /// A domain bound as an enclosure of the written value.
    fn bound(&mut self) -> Result<Interval, ParseError> {
        let negative = if self.peek().tok == Tok::Sym('-') {
            self.bump();
            true
        } else {
            false
        };
        let t = self.bump();
        let v = match &t.tok {
            Tok::Number(s) => enclose_decimal(s).map_err(|_| ParseError::Syntax {
                line: t.line,
                col: t.col,
                msg: format!("malformed number `{s}`"),
            })?,
            Tok::Ident(s) if s == "inf" => Interval::new(f64::INFINITY.next_down(), f64::INFINITY),
            other => {
                return Err(ParseError::Syntax {
                    line: t.line,
                    col: t.col,
                    msg: format!("expected a number, found {}", Self::describe(other)),
                })
            }
        };
        Ok(if negative { -v } else { v })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut left = self.term()?;
        loop {
            let op = match self.peek().tok {
                Tok::Sym('+') => BinaryOp::Add,
                Tok::Sym('-') => BinaryOp::Sub,
                _ => return Ok(left),
            };
            self.bump();
            let right = self.term()?;
            left = Expr::binary(op, left, right);
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut left = self.factor()?;
        loop {
            let op = match self.peek().tok {
                Tok::Sym('*') => BinaryOp::Mul,
                Tok::Sym('/') => BinaryOp::Div,
                _ => return Ok(left),
            };
            self.bump();
            let right = self.factor()?;
            left = Expr::binary(op, left, right);
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.peek().tok != Tok::Sym('^') {
            return Ok(base);
        }
        self.bump();
        let t = self.bump();
        let n = match &t.tok {
            Tok::Number(s) => match s.parse::<u32>() {
                Ok(n) if n >= 1 => n,
                _ => return Err(ParseError::BadExponent { line: t.line, col: t.col, found: s.clone() }),
            },
            Tok::Sym('-') => {
                let found = match &self.peek().tok {
                    Tok::Number(s) => format!("-{s}"),
                    _ => "-".into(),
                };
                return Err(ParseError::BadExponent { line: t.line, col: t.col, found });
            }
            other => {
                return Err(ParseError::Syntax {
                    line: t.line,
                    col: t.col,
                    msg: format!("expected an integer exponent, found {}", Self::describe(other)),
                })
            }
        };
        Ok(if n == 1 { base } else { Expr::pow(base, n) })
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let t = self.peek().clone();
        match &t.tok {
            Tok::Number(s) => {
                self.bump();
                let c = enclose_decimal(s).map_err(|_| ParseError::Syntax {
                    line: t.line,
                    col: t.col,
                    msg: format!("malformed number `{s}`"),
                })?;
                Ok(Expr::Const(c))
            }
            Tok::Ident(s) => {
                self.bump();
                let func = match s.as_str() {
                    "exp" => Some(UnaryOp::Exp),
                    "cos" => Some(UnaryOp::Cos),
                    "sqrt" => Some(UnaryOp::Sqrt),
                    _ => None,
                };
                if let Some(op) = func {
                    self.expect_sym('(')?;
                    let e = self.expr()?;
                    self.expect_sym(')')?;
                    return Ok(Expr::unary(op, e));
                }
                if is_keyword(s) {
                    return Err(ParseError::Syntax {
                        line: t.line,
                        col: t.col,
                        msg: format!("unexpected keyword `{s}`"),
                    });
                }
                match self.names.iter().position(|n| n == s) {
                    Some(i) => Ok(Expr::Var(VarId(i))),
                    None => Err(ParseError::Undeclared { line: t.line, col: t.col, name: s.clone() }),
                }
            }
            Tok::Sym('[') => {
                self.bump();
                let lo = self.bound()?;
                self.expect_sym(',')?;
                let hi = self.bound()?;
                self.expect_sym(']')?;
                let c = Interval::new(lo.lo(), hi.hi());
                if c.is_empty() {
                    return Err(ParseError::Syntax { line: t.line, col: t.col, msg: "empty interval constant".into() });
                }
                Ok(Expr::Const(c))
            }
            Tok::Sym('(') => {
                self.bump();
                let e = self.expr()?;
                self.expect_sym(')')?;
                Ok(e)
            }
            Tok::Sym('-') => {
                self.bump();
                let e = self.factor()?;
                Ok(Expr::unary(UnaryOp::Neg, e))
            }
            other => {
                let found = Self::describe(other);
                self.syntax(format!("expected an expression, found {found}"))
            }
        }
    }
}

fn is_keyword(s: &str) -> bool {
    matches!(s, "var" | "in" | "exp" | "cos" | "sqrt" | "inf")
}

/// Parses a problem in the modeling language.
pub fn parse(src: &str) -> Result<Problem, ParseError> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, pos: 0, names: Vec::new(), domains: Vec::new(), constraints: Vec::new() };
    p.problem()?;
    Ok(Problem { names: p.names, domains: IntervalBox::new(p.domains), constraints: p.constraints })
}
