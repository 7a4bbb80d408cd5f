//! A small arithmetic language for coefficient fields and boundary data.
//!
//! Grammar (lowest to highest precedence):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' powrhs)?
//! powrhs  := '-' powrhs | power
//! primary := number | variable | 'pi' | func '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! Variables are `x`, `y` (chart coordinates), `theta` (boundary angle) and
//! `s` (boundary arc length).

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {msg}")]
    Syntax { offset: usize, msg: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("function `{func}` takes {expected} argument(s), got {found} (byte {offset})")]
    Arity { func: &'static str, expected: usize, found: usize, offset: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("variable `{0}` is not available at this evaluation point")]
    MissingVariable(&'static str),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Var {
    X,
    Y,
    Theta,
    S,
}

impl Var {
    fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::Y => "y",
            Var::Theta => "theta",
            Var::S => "s",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Abs,
    Min,
    Max,
}

impl Func {
    fn lookup(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "min" => Func::Min,
            "max" => Func::Max,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    fn arity(self) -> usize {
        match self {
            Func::Min | Func::Max => 2,
            _ => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

/// Variables available at one evaluation point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EvalContext {
    pub x: f64,
    pub y: f64,
    pub theta: Option<f64>,
    pub s: Option<f64>,
}

impl EvalContext {
    pub fn interior(x: f64, y: f64) -> Self {
        EvalContext { x, y, theta: None, s: None }
    }

    pub fn boundary(x: f64, y: f64, theta: f64, s: f64) -> Self {
        EvalContext { x, y, theta: Some(theta), s: Some(s) }
    }
}

fn finite(v: f64, what: &str) -> Result<f64, ExprError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ExprError::Domain(format!("{what} is not finite")))
    }
}

impl Expr {
    pub fn eval(&self, ctx: &EvalContext) -> Result<f64, ExprError> {
        match self {
            Expr::Num(v) => Ok(*v),
            Expr::Var(v) => match v {
                Var::X => Ok(ctx.x),
                Var::Y => Ok(ctx.y),
                Var::Theta => ctx.theta.ok_or(ExprError::MissingVariable("theta")),
                Var::S => ctx.s.ok_or(ExprError::MissingVariable("s")),
            },
            Expr::Neg(e) => Ok(-e.eval(ctx)?),
            Expr::Bin(op, l, r) => {
                let (a, b) = (l.eval(ctx)?, r.eval(ctx)?);
                match op {
                    BinOp::Add => finite(a + b, "sum"),
                    BinOp::Sub => finite(a - b, "difference"),
                    BinOp::Mul => finite(a * b, "product"),
                    BinOp::Div => {
                        if b == 0.0 {
                            Err(ExprError::Domain("division by zero".into()))
                        } else {
                            finite(a / b, "quotient")
                        }
                    }
                    BinOp::Pow => {
                        if a == 0.0 && b < 0.0 {
                            return Err(ExprError::Domain("zero raised to a negative power".into()));
                        }
                        if a < 0.0 && b.fract() != 0.0 {
                            return Err(ExprError::Domain("negative base with non-integer exponent".into()));
                        }
                        finite(a.powf(b), "power")
                    }
                }
            }
            Expr::Call(f, args) => {
                let a = args[0].eval(ctx)?;
                match f {
                    Func::Sin => Ok(a.sin()),
                    Func::Cos => Ok(a.cos()),
                    Func::Exp => finite(a.exp(), "exp"),
                    Func::Log => {
                        if a <= 0.0 {
                            Err(ExprError::Domain(format!("log of non-positive value {a}")))
                        } else {
                            Ok(a.ln())
                        }
                    }
                    Func::Sqrt => {
                        if a < 0.0 {
                            Err(ExprError::Domain(format!("sqrt of negative value {a}")))
                        } else {
                            Ok(a.sqrt())
                        }
                    }
                    Func::Abs => Ok(a.abs()),
                    Func::Min => Ok(a.min(args[1].eval(ctx)?)),
                    Func::Max => Ok(a.max(args[1].eval(ctx)?)),
                }
            }
        }
    }

    /// True if the expression mentions `v`.
    pub fn uses(&self, v: Var) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::Var(w) => *w == v,
            Expr::Neg(e) => e.uses(v),
            Expr::Bin(_, l, r) => l.uses(v) || r.uses(v),
            Expr::Call(_, args) => args.iter().any(|a| a.uses(v)),
        }
    }

    /// Constant value if the tree contains no variables.
    pub fn constant(&self) -> Option<f64> {
        if [Var::X, Var::Y, Var::Theta, Var::S].iter().any(|&v| self.uses(v)) {
            None
        } else {
            self.eval(&EvalContext::default()).ok()
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Expr::Num(_) | Expr::Var(_) => 1,
            Expr::Neg(e) => 1 + e.depth(),
            Expr::Bin(_, l, r) => 1 + l.depth().max(r.depth()),
            Expr::Call(_, args) => 1 + args.iter().map(Expr::depth).max().unwrap_or(0),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Neg(_) => 3,
            Expr::Bin(BinOp::Pow, ..) => 4,
            _ => 5,
        }
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

/// Canonical form with minimal parentheses.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => {
                if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) {
                    write!(f, "({v})")
                } else {
                    write!(f, "{v}")
                }
            }
            Expr::Var(v) => f.write_str(v.name()),
            Expr::Neg(e) => {
                f.write_str("-")?;
                write_child(f, e, e.precedence() < 3)
            }
            Expr::Bin(op, l, r) => {
                let p = self.precedence();
                match op {
                    BinOp::Pow => {
                        write_child(f, l, l.precedence() <= p)?;
                        f.write_str("^")?;
                        write_child(f, r, r.precedence() < 3)
                    }
                    _ => {
                        write_child(f, l, l.precedence() < p)?;
                        f.write_str(match op {
                            BinOp::Add => " + ",
                            BinOp::Sub => " - ",
                            BinOp::Mul => "*",
                            _ => "/",
                        })?;
                        write_child(f, r, r.precedence() <= p)
                    }
                }
            }
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
    End,
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    tok: Tok,
    tok_start: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Result<Self, ExprError> {
        let mut p = Parser { src: text.as_bytes(), pos: 0, tok: Tok::End, tok_start: 0 };
        p.advance()?;
        Ok(p)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError::Syntax { offset: self.tok_start, msg: msg.into() })
    }

    fn advance(&mut self) -> Result<(), ExprError> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        self.tok_start = self.pos;
        let Some(&c) = self.src.get(self.pos) else {
            self.tok = Tok::End;
            return Ok(());
        };
        if c.is_ascii_digit() || c == b'.' {
            let start = self.pos;
            while self.pos < self.src.len() && (self.src[self.pos].is_ascii_digit() || self.src[self.pos] == b'.') {
                self.pos += 1;
            }
            if self.pos < self.src.len() && matches!(self.src[self.pos], b'e' | b'E') {
                let mut q = self.pos + 1;
                if q < self.src.len() && matches!(self.src[q], b'+' | b'-') {
                    q += 1;
                }
                if q < self.src.len() && self.src[q].is_ascii_digit() {
                    while q < self.src.len() && self.src[q].is_ascii_digit() {
                        q += 1;
                    }
                    self.pos = q;
                }
            }
            let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
            match text.parse::<f64>() {
                Ok(v) if v.is_finite() => self.tok = Tok::Num(v),
                _ => return self.err(format!("invalid number `{text}`")),
            }
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let start = self.pos;
            while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_') {
                self.pos += 1;
            }
            self.tok = Tok::Ident(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned());
        } else if b"+-*/^(),".contains(&c) {
            self.pos += 1;
            self.tok = Tok::Sym(c as char);
        } else {
            return Err(ExprError::Syntax { offset: self.pos, msg: format!("unexpected character `{}`", c as char) });
        }
        Ok(())
    }

    fn eat(&mut self, c: char) -> Result<bool, ExprError> {
        if self.tok == Tok::Sym(c) {
            self.advance()?;
            Ok(true)
        } else {
            Ok(false)
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.tok {
                Tok::Sym('+') => BinOp::Add,
                Tok::Sym('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.advance()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.term()?));
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.tok {
                Tok::Sym('*') => BinOp::Mul,
                Tok::Sym('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.advance()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.eat('-')? {
            Ok(Expr::Neg(Box::new(self.unary()?)))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.primary()?;
        if self.eat('^')? {
            Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(self.power_rhs()?)))
        } else {
            Ok(base)
        }
    }

    fn power_rhs(&mut self) -> Result<Expr, ExprError> {
        if self.eat('-')? {
            Ok(Expr::Neg(Box::new(self.power_rhs()?)))
        } else {
            self.power()
        }
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        let start = self.tok_start;
        match self.tok.clone() {
            Tok::Num(v) => {
                self.advance()?;
                Ok(Expr::Num(v))
            }
            Tok::Sym('(') => {
                self.advance()?;
                let e = self.expr()?;
                if !self.eat(')')? {
                    return self.err("expected `)`");
                }
                Ok(e)
            }
            Tok::Ident(name) => {
                self.advance()?;
                let var = match name.as_str() {
                    "x" => Some(Var::X),
                    "y" => Some(Var::Y),
                    "theta" => Some(Var::Theta),
                    "s" => Some(Var::S),
                    _ => None,
                };
                if let Some(v) = var {
                    return Ok(Expr::Var(v));
                }
                if name == "pi" {
                    return Ok(Expr::Num(std::f64::consts::PI));
                }
                let Some(func) = Func::lookup(&name) else {
                    return Err(ExprError::UnknownIdentifier { name, offset: start });
                };
                if !self.eat('(')? {
                    return self.err(format!("expected `(` after `{name}`"));
                }
                let mut args = vec![self.expr()?];
                while self.eat(',')? {
                    args.push(self.expr()?);
                }
                if !self.eat(')')? {
                    return self.err("expected `)` or `,`");
                }
                if args.len() != func.arity() {
                    return Err(ExprError::Arity { func: func.name(), expected: func.arity(), found: args.len(), offset: start });
                }
                Ok(Expr::Call(func, args))
            }
            Tok::End => self.err("unexpected end of input"),
            Tok::Sym(c) => self.err(format!("unexpected `{c}`")),
        }
    }
}

/// A parsed scalar field.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldExpr {
    ast: Expr,
}

impl FieldExpr {
    pub fn constant(v: f64) -> Self {
        FieldExpr { ast: Expr::Num(v) }
    }

    pub fn ast(&self) -> &Expr {
        &self.ast
    }

    pub fn eval(&self, ctx: &EvalContext) -> Result<f64, ExprError> {
        self.ast.eval(ctx)
    }

    pub fn constant_value(&self) -> Option<f64> {
        self.ast.constant()
    }
}

impl FromStr for FieldExpr {
    type Err = ExprError;

    fn from_str(s: &str) -> Result<Self, ExprError> {
        parse_field(s)
    }
}

impl fmt::Display for FieldExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.ast.fmt(f)
    }
}

pub fn parse_field(text: &str) -> Result<FieldExpr, ExprError> {
    let mut p = Parser::new(text)?;
    if p.tok == Tok::End {
        return p.err("empty expression");
    }
    let ast = p.expr()?;
    if p.tok != Tok::End {
        return p.err("unexpected trailing input");
    }
    Ok(FieldExpr { ast })
}

pub fn eval_field(expr: &FieldExpr, ctx: &EvalContext) -> Result<f64, ExprError> {
    expr.eval(ctx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn at(x: f64, y: f64) -> EvalContext {
        EvalContext::interior(x, y)
    }

    #[test]
    fn constants_and_structure() {
        assert_eq!(parse_field("1").unwrap().ast(), &Expr::Num(1.0));
        let e = parse_field("cos(3*theta)").unwrap();
        match e.ast() {
            Expr::Call(Func::Cos, args) => assert!(matches!(args[0], Expr::Bin(BinOp::Mul, ..))),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn precedence_and_associativity() {
        let ev = |s: &str| parse_field(s).unwrap().eval(&at(0.0, 0.0)).unwrap();
        assert_eq!(ev("2+3*4"), 14.0);
        assert_eq!(ev("2^3^2"), 512.0);
        assert_eq!(ev("-2^2"), -4.0);
        assert_eq!(ev("8/4/2"), 1.0);
        assert_eq!(ev("8-4-2"), 2.0);
        assert_eq!(ev("2^-1"), 0.5);
        assert_eq!(ev("exp(0)*min(2,5)"), 2.0);
        assert_eq!(ev("1.5e1 + 2E-1"), 15.2);
    }

    #[test]
    fn evaluation_examples() {
        let e = parse_field("x^2+y^2").unwrap();
        assert_eq!(e.eval(&at(3.0, 4.0)).unwrap(), 25.0);
        let e = parse_field("sin(theta)").unwrap();
        assert_eq!(e.eval(&at(1.0, 0.0)), Err(ExprError::MissingVariable("theta")));
        assert_eq!(e.eval(&EvalContext::boundary(1.0, 0.0, 0.0, 0.0)).unwrap(), 0.0);
    }

    #[test]
    fn domain_errors() {
        for s in ["1/0", "log(0)", "log(-1)", "sqrt(-1)", "exp(1000)", "(-8)^0.5", "0^-1"] {
            let r = parse_field(s).unwrap().eval(&at(0.0, 0.0));
            assert!(matches!(r, Err(ExprError::Domain(_))), "{s}: {r:?}");
        }
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse_field(""), Err(ExprError::Syntax { offset: 0, .. })));
        assert!(matches!(parse_field("1 + "), Err(ExprError::Syntax { offset: 4, .. })));
        assert!(matches!(parse_field("foo(1)"), Err(ExprError::UnknownIdentifier { offset: 0, .. })));
        assert!(matches!(parse_field("2*z"), Err(ExprError::UnknownIdentifier { offset: 2, .. })));
        assert!(matches!(parse_field("min(1)"), Err(ExprError::Arity { expected: 2, found: 1, .. })));
        assert!(matches!(parse_field("sin(1, 2)"), Err(ExprError::Arity { .. })));
        assert!(matches!(parse_field("(1"), Err(ExprError::Syntax { .. })));
        assert!(matches!(parse_field("1 $ 2"), Err(ExprError::Syntax { offset: 2, .. })));
        assert!(matches!(parse_field("1e999"), Err(ExprError::Syntax { .. })));
    }

    #[test]
    fn canonical_printing() {
        let e = parse_field("(x+1)*(y - 2)^2 - -x").unwrap();
        assert_eq!(e.to_string(), "(x + 1)*(y - 2)^2 - -x");
        let e = parse_field("a").err().unwrap();
        assert!(matches!(e, ExprError::UnknownIdentifier { .. }));
        let e = parse_field("(2^3)^2").unwrap();
        assert_eq!(e.to_string(), "(2^3)^2");
        let e = parse_field("1-(2-3)").unwrap();
        assert_eq!(e.to_string(), "1 - (2 - 3)");
    }

    fn leaf() -> impl Strategy<Value = String> {
        prop_oneof![
            (0u32..1000).prop_map(|v| format!("{}", v as f64 / 8.0)),
            Just("x".to_string()),
            Just("y".to_string()),
            Just("theta".to_string()),
            Just("s".to_string()),
            Just("pi".to_string()),
        ]
    }

    fn expr_text() -> impl Strategy<Value = String> {
        leaf().prop_recursive(7, 64, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone(), prop::sample::select(vec!["+", "-", "*", "/", "^"]))
                    .prop_map(|(a, b, op)| format!("({a}){op}({b})")),
                inner.clone().prop_map(|a| format!("-{a}")),
                (inner.clone(), prop::sample::select(vec!["sin", "cos", "exp", "log", "sqrt", "abs"]))
                    .prop_map(|(a, f)| format!("{f}({a})")),
                (inner.clone(), inner, prop::sample::select(vec!["min", "max"]))
                    .prop_map(|(a, b, f)| format!("{f}({a}, {b})")),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(text in expr_text()) {
            let e = parse_field(&text).unwrap();
            let printed = e.to_string();
            let again = parse_field(&printed).unwrap();
            prop_assert_eq!(again.ast(), e.ast());
            prop_assert_eq!(again.to_string(), printed);
        }

        #[test]
        fn evaluation_is_total(text in expr_text(), x in -3.0f64..3.0, y in -3.0f64..3.0, t in -4.0f64..4.0, s in 0.0f64..7.0) {
            let e = parse_field(&text).unwrap();
            prop_assume!(e.ast().depth() <= 9);
            let ctx = EvalContext::boundary(x, y, t, s);
            match e.eval(&ctx) {
                Ok(v) => {
                    prop_assert!(v.is_finite());
                    prop_assert_eq!(v.to_bits(), e.eval(&ctx).unwrap().to_bits());
                }
                Err(err) => prop_assert!(matches!(err, ExprError::Domain(_))),
            }
        }
    }
}
