//! Scalar expression language for scene-defined coordinate maps.
//!
//! Grammar (whitespace-insensitive, identifiers case-sensitive):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?
//! primary := number | ident | ident '(' expr ')' | '(' expr ')'
//! number  := digit+ ('.' digit+)? (('e' | 'E') ('+' | '-')? digit+)?
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so `-u1^2`
//! is `-(u1^2)` and `2^3^2` is `2^(3^2)`. Positions are 0-based byte offsets.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::jets::{Jet2, JetError, UnaryFn};

pub const CONSTANTS: [(&str, f64); 2] = [("pi", std::f64::consts::PI), ("e", std::f64::consts::E)];

/// Source offset of a node. Never participates in equality, so trees parsed
/// from differently formatted sources compare structurally.
#[derive(Debug, Clone, Copy, Default)]
pub struct Pos(pub usize);

impl PartialEq for Pos {
    fn eq(&self, _: &Pos) -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Ident {
        name: String,
        pos: Pos,
    },
    Neg(Box<Expr>),
    Binary {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
        pos: Pos,
    },
    Call {
        func: UnaryFn,
        arg: Box<Expr>,
        pos: Pos,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at {position}: {message} (expected {expected})")]
pub struct ParseError {
    pub position: usize,
    pub message: String,
    pub expected: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound identifier `{name}` at {pos}")]
    Unbound { name: String, pos: usize },
    #[error("identifier `{name}` bound more than once")]
    Ambiguous { name: String },
    #[error("at {pos}: {source}")]
    Jet { pos: usize, source: JetError },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
    End,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn digits(&mut self) -> usize {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        self.pos - start
    }

    fn err(&self, at: usize, message: &str, expected: &str) -> ParseError {
        ParseError {
            position: at,
            message: message.to_string(),
            expected: expected.to_string(),
        }
    }

    /// Returns the next token and its starting offset.
    fn next(&mut self) -> Result<(Tok, usize), ParseError> {
        self.skip_ws();
        let start = self.pos;
        let Some(&c) = self.src.get(self.pos) else {
            return Ok((Tok::End, start));
        };
        if c.is_ascii_digit() {
            self.digits();
            if self.src.get(self.pos) == Some(&b'.') {
                self.pos += 1;
                if self.digits() == 0 {
                    return Err(self.err(self.pos, "incomplete fraction", "digit"));
                }
            }
            if matches!(self.src.get(self.pos), Some(b'e') | Some(b'E')) {
                self.pos += 1;
                if matches!(self.src.get(self.pos), Some(b'+') | Some(b'-')) {
                    self.pos += 1;
                }
                if self.digits() == 0 {
                    return Err(self.err(self.pos, "incomplete exponent", "digit"));
                }
            }
            let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
            let v: f64 = text.parse().expect("lexer admits only valid floats");
            if !v.is_finite() {
                return Err(self.err(start, "number out of range", "finite number"));
            }
            return Ok((Tok::Num(v), start));
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while self.pos < self.src.len()
                && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
            {
                self.pos += 1;
            }
            let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
            return Ok((Tok::Ident(text.to_string()), start));
        }
        if b"+-*/^()".contains(&c) {
            self.pos += 1;
            return Ok((Tok::Sym(c as char), start));
        }
        Err(self.err(
            start,
            "unexpected character",
            "number, identifier, operator or parenthesis",
        ))
    }
}

struct Parser<'a> {
    lex: Lexer<'a>,
    tok: Tok,
    at: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Self, ParseError> {
        let mut lex = Lexer {
            src: src.as_bytes(),
            pos: 0,
        };
        let (tok, at) = lex.next()?;
        Ok(Parser { lex, tok, at })
    }

    fn bump(&mut self) -> Result<(), ParseError> {
        let (tok, at) = self.lex.next()?;
        self.tok = tok;
        self.at = at;
        Ok(())
    }

    fn fail(&self, message: &str, expected: &str) -> ParseError {
        ParseError {
            position: self.at,
            message: message.to_string(),
            expected: expected.to_string(),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        while let Tok::Sym(c @ ('+' | '-')) = self.tok {
            let pos = Pos(self.at);
            self.bump()?;
            let rhs = self.term()?;
            let op = if c == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                pos,
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while let Tok::Sym(c @ ('*' | '/')) = self.tok {
            let pos = Pos(self.at);
            self.bump()?;
            let rhs = self.unary()?;
            let op = if c == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                pos,
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.tok == Tok::Sym('-') {
            self.bump()?;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if self.tok == Tok::Sym('^') {
            let pos = Pos(self.at);
            self.bump()?;
            let exp = self.unary()?;
            return Ok(Expr::Binary {
                op: BinOp::Pow,
                lhs: Box::new(base),
                rhs: Box::new(exp),
                pos,
            });
        }
        Ok(base)
    }

    fn expect_close(&mut self) -> Result<(), ParseError> {
        if self.tok != Tok::Sym(')') {
            return Err(self.fail("unbalanced parenthesis", "')'"));
        }
        self.bump()
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        match self.tok.clone() {
            Tok::Num(v) => {
                self.bump()?;
                Ok(Expr::Num(v))
            }
            Tok::Ident(name) => {
                let pos = Pos(self.at);
                self.bump()?;
                if self.tok != Tok::Sym('(') {
                    return Ok(Expr::Ident { name, pos });
                }
                let func = UnaryFn::from_name(&name).ok_or_else(|| ParseError {
                    position: pos.0,
                    message: format!("unknown function `{name}`"),
                    expected: "one of sin, cos, tan, sinh, cosh, tanh, exp, log, sqrt, atan"
                        .to_string(),
                })?;
                self.bump()?;
                let arg = self.expr()?;
                self.expect_close()?;
                Ok(Expr::Call {
                    func,
                    arg: Box::new(arg),
                    pos,
                })
            }
            Tok::Sym('(') => {
                self.bump()?;
                let inner = self.expr()?;
                self.expect_close()?;
                Ok(inner)
            }
            Tok::End => Err(self.fail("unexpected end of input", "operand")),
            Tok::Sym(c) => Err(self.fail(&format!("unexpected `{c}`"), "operand")),
        }
    }
}

pub fn parse(source: &str) -> Result<Expr, ParseError> {
    let mut p = Parser::new(source)?;
    let e = p.expr()?;
    if p.tok != Tok::End {
        return Err(p.fail("trailing input", "operator or end of input"));
    }
    Ok(e)
}

/// Identifiers not resolved by the built-in constants.
pub fn free_vars(ast: &Expr) -> BTreeSet<String> {
    fn walk(e: &Expr, out: &mut BTreeSet<String>) {
        match e {
            Expr::Num(_) => {}
            Expr::Ident { name, .. } => {
                if !CONSTANTS.iter().any(|(c, _)| c == name) {
                    out.insert(name.clone());
                }
            }
            Expr::Neg(x) => walk(x, out),
            Expr::Binary { lhs, rhs, .. } => {
                walk(lhs, out);
                walk(rhs, out);
            }
            Expr::Call { arg, .. } => walk(arg, out),
        }
    }
    let mut out = BTreeSet::new();
    walk(ast, &mut out);
    out
}

// Binding strength used by the printer; higher binds tighter.
fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Binary {
            op: BinOp::Add | BinOp::Sub,
            ..
        } => 1,
        Expr::Binary {
            op: BinOp::Mul | BinOp::Div,
            ..
        } => 2,
        Expr::Neg(_) => 3,
        Expr::Binary { op: BinOp::Pow, .. } => 4,
        Expr::Num(_) | Expr::Ident { .. } | Expr::Call { .. } => 5,
    }
}

fn write_at(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    if prec(e) < min {
        write!(f, "(")?;
        write_expr(f, e)?;
        write!(f, ")")
    } else {
        write_expr(f, e)
    }
}

fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    match e {
        Expr::Num(v) => write!(f, "{v}"),
        Expr::Ident { name, .. } => write!(f, "{name}"),
        Expr::Neg(x) => {
            write!(f, "-")?;
            write_at(f, x, 3)
        }
        Expr::Binary { op, lhs, rhs, .. } => {
            let (l, r) = match op {
                BinOp::Add | BinOp::Sub => (1, 2),
                BinOp::Mul | BinOp::Div => (2, 3),
                BinOp::Pow => (5, 3),
            };
            write_at(f, lhs, l)?;
            if *op == BinOp::Pow {
                write!(f, "^")?;
            } else {
                write!(f, " {} ", op.symbol())?;
            }
            write_at(f, rhs, r)
        }
        Expr::Call { func, arg, .. } => {
            write!(f, "{}(", func.name())?;
            write_expr(f, arg)?;
            write!(f, ")")
        }
    }
}

/// Canonical form with minimal parentheses; re-parses to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self)
    }
}

/// Resolves identifiers: chart variables, then parameters, then constants.
pub struct Bindings<'a> {
    pub vars: &'a HashMap<String, Jet2>,
    pub params: &'a HashMap<String, f64>,
}

impl Bindings<'_> {
    fn lookup(&self, name: &str, pos: usize, m: usize) -> Result<Jet2, EvalError> {
        let var = self.vars.get(name);
        let param = self.params.get(name);
        let constant = CONSTANTS.iter().find(|(c, _)| *c == name).map(|(_, v)| *v);
        let hits = var.is_some() as u8 + param.is_some() as u8 + constant.is_some() as u8;
        if hits > 1 {
            return Err(EvalError::Ambiguous {
                name: name.to_string(),
            });
        }
        if let Some(j) = var {
            return Ok(j.clone());
        }
        if let Some(v) = param.copied().or(constant) {
            return Ok(Jet2::constant(v, m));
        }
        Err(EvalError::Unbound {
            name: name.to_string(),
            pos,
        })
    }
}

/// Evaluates the expression as a 2-jet over the chart variables in `vars`.
///
/// All jets in `vars` must share one dimension; parameters and constants
/// enter as constant jets.
pub fn eval_jet(
    ast: &Expr,
    vars: &HashMap<String, Jet2>,
    params: &HashMap<String, f64>,
) -> Result<Jet2, EvalError> {
    let m = vars.values().next().map_or(0, Jet2::dim);
    let b = Bindings { vars, params };
    eval_node(ast, &b, m)
}

fn jet_err(pos: usize) -> impl Fn(JetError) -> EvalError {
    move |source| EvalError::Jet { pos, source }
}

fn eval_node(e: &Expr, b: &Bindings<'_>, m: usize) -> Result<Jet2, EvalError> {
    match e {
        Expr::Num(v) => Ok(Jet2::constant(*v, m)),
        Expr::Ident { name, pos } => b.lookup(name, pos.0, m),
        Expr::Neg(x) => Ok(-eval_node(x, b, m)?),
        Expr::Call { func, arg, pos } => {
            let a = eval_node(arg, b, m)?;
            func.apply(&a).map_err(jet_err(pos.0))
        }
        Expr::Binary { op, lhs, rhs, pos } => {
            let l = eval_node(lhs, b, m)?;
            let r = eval_node(rhs, b, m)?;
            let err = jet_err(pos.0);
            match op {
                BinOp::Add => l.try_add(&r).map_err(err),
                BinOp::Sub => l.try_sub(&r).map_err(err),
                BinOp::Mul => l.try_mul(&r).map_err(err),
                BinOp::Div => l.try_div(&r).map_err(err),
                BinOp::Pow => {
                    if r.is_constant() {
                        UnaryFn::PowConst(r.value()).apply(&l).map_err(err)
                    } else {
                        // x^y = exp(y log x)
                        let lg = UnaryFn::Log.apply(&l).map_err(&err)?;
                        let prod = r.try_mul(&lg).map_err(&err)?;
                        UnaryFn::Exp.apply(&prod).map_err(err)
                    }
                }
            }
        }
    }
}

/// Plain real evaluation with the same lowering rules as [`eval_jet`].
pub fn eval_real(
    ast: &Expr,
    vars: &HashMap<String, f64>,
    params: &HashMap<String, f64>,
) -> Result<f64, EvalError> {
    match ast {
        Expr::Num(v) => Ok(*v),
        Expr::Ident { name, pos } => {
            let constant = CONSTANTS.iter().find(|(c, _)| *c == name).map(|(_, v)| *v);
            let hits = [vars.get(name).copied(), params.get(name).copied(), constant];
            let mut found = hits.iter().flatten();
            match (found.next(), found.next()) {
                (Some(_), Some(_)) => Err(EvalError::Ambiguous { name: name.clone() }),
                (Some(v), None) => Ok(*v),
                _ => Err(EvalError::Unbound {
                    name: name.clone(),
                    pos: pos.0,
                }),
            }
        }
        Expr::Neg(x) => Ok(-eval_real(x, vars, params)?),
        Expr::Call { func, arg, pos } => {
            let a = eval_real(arg, vars, params)?;
            func.eval(a).map_err(jet_err(pos.0))
        }
        Expr::Binary { op, lhs, rhs, pos } => {
            let l = eval_real(lhs, vars, params)?;
            let r = eval_real(rhs, vars, params)?;
            match op {
                BinOp::Add => Ok(l + r),
                BinOp::Sub => Ok(l - r),
                BinOp::Mul => Ok(l * r),
                BinOp::Div if r == 0.0 => Err(EvalError::Jet {
                    pos: pos.0,
                    source: JetError::DivisionByZero,
                }),
                BinOp::Div => Ok(l / r),
                BinOp::Pow => UnaryFn::PowConst(r).eval(l).map_err(jet_err(pos.0)),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ev(src: &str, vars: &[(&str, f64)], params: &[(&str, f64)]) -> f64 {
        let ast = parse(src).unwrap();
        let v = vars.iter().map(|(k, x)| (k.to_string(), *x)).collect();
        let p = params.iter().map(|(k, x)| (k.to_string(), *x)).collect();
        eval_real(&ast, &v, &p).unwrap()
    }

    fn jet_vars(vals: &[(&str, f64)]) -> HashMap<String, Jet2> {
        let m = vals.len();
        vals.iter()
            .enumerate()
            .map(|(i, (k, v))| (k.to_string(), Jet2::var(i, *v, m).unwrap()))
            .collect()
    }

    #[test]
    fn spec_examples() {
        assert_eq!(ev("2+3*4", &[], &[]), 14.0);
        assert_eq!(ev("-u1^2", &[("u1", 3.0)], &[]), -9.0);
        assert_eq!(ev("b*cos(s/b)", &[("s", 0.0)], &[("b", 0.6)]), 0.6);
        assert_eq!(parse("sin(").unwrap_err().position, 4);
    }

    #[test]
    fn pythagorean_identity_has_flat_jet() {
        let ast = parse("sin(u1)^2+cos(u1)^2").unwrap();
        for u in [-2.0, -0.3, 0.0, 0.9, 2.7] {
            let j = eval_jet(&ast, &jet_vars(&[("u1", u)]), &HashMap::new()).unwrap();
            assert!((j.value() - 1.0).abs() <= 1e-15);
            assert!(j.grad()[0].abs() <= 1e-12);
            assert!(j.hess()[0].abs() <= 1e-10);
        }
    }

    #[test]
    fn product_jet() {
        let ast = parse("u1*u2").unwrap();
        let j = eval_jet(
            &ast,
            &jet_vars(&[("u1", 2.0), ("u2", 3.0)]),
            &HashMap::new(),
        )
        .unwrap();
        assert_eq!(j.value(), 6.0);
        assert_eq!(j.grad(), &[3.0, 2.0]);
        assert_eq!(j.hess(), &[0.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn free_variable_sets() {
        let names = |s: &str| {
            free_vars(&parse(s).unwrap())
                .into_iter()
                .collect::<Vec<_>>()
        };
        assert_eq!(names("b*cos(s/b)"), vec!["b", "s"]);
        assert!(names("pi").is_empty());
        assert_eq!(names("u1+q"), vec!["q", "u1"]);
    }

    #[test]
    fn unbound_and_ambiguous_identifiers() {
        let ast = parse("u1 + q").unwrap();
        let err = eval_jet(&ast, &jet_vars(&[("u1", 1.0)]), &HashMap::new()).unwrap_err();
        assert_eq!(
            err,
            EvalError::Unbound {
                name: "q".into(),
                pos: 5
            }
        );
        let params = HashMap::from([("u1".to_string(), 2.0)]);
        assert!(matches!(
            eval_jet(&ast, &jet_vars(&[("u1", 1.0)]), &params),
            Err(EvalError::Ambiguous { .. })
        ));
    }

    #[test]
    fn domain_errors_carry_positions() {
        let ast = parse("1 + log(u1)").unwrap();
        let err = eval_jet(&ast, &jet_vars(&[("u1", -1.0)]), &HashMap::new()).unwrap_err();
        assert!(matches!(err, EvalError::Jet { pos: 4, .. }), "{err:?}");
        let ast = parse("u1 ^ u2").unwrap();
        let err = eval_jet(
            &ast,
            &jet_vars(&[("u1", -1.0), ("u2", 0.5)]),
            &HashMap::new(),
        )
        .unwrap_err();
        assert!(matches!(err, EvalError::Jet { pos: 3, .. }), "{err:?}");
    }

    #[test]
    fn variable_exponent_lowers_to_exp_log() {
        let ast = parse("u1^u2").unwrap();
        let j = eval_jet(
            &ast,
            &jet_vars(&[("u1", 2.0), ("u2", 3.0)]),
            &HashMap::new(),
        )
        .unwrap();
        assert!((j.value() - 8.0).abs() < 1e-12);
        // d/du2 = x^y ln x
        assert!((j.grad()[1] - 8.0 * 2f64.ln()).abs() < 1e-12);
        assert!((j.grad()[0] - 12.0).abs() < 1e-12);
    }

    fn num() -> impl Strategy<Value = Expr> {
        prop_oneof![
            (0u32..1000).prop_map(|n| Expr::Num(n as f64)),
            (0.0..1e3f64).prop_map(Expr::Num),
            (1e-9..1e-3f64).prop_map(Expr::Num),
        ]
    }

    fn leaf() -> impl Strategy<Value = Expr> {
        prop_oneof![
            num(),
            prop::sample::select(vec!["u1", "u2", "s", "a", "b", "pi", "e"]).prop_map(|n| {
                Expr::Ident {
                    name: n.to_string(),
                    pos: Pos(0),
                }
            }),
        ]
    }

    fn ast() -> impl Strategy<Value = Expr> {
        leaf().prop_recursive(5, 48, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|x| Expr::Neg(Box::new(x))),
                (
                    prop::sample::select(vec![
                        BinOp::Add,
                        BinOp::Sub,
                        BinOp::Mul,
                        BinOp::Div,
                        BinOp::Pow
                    ]),
                    inner.clone(),
                    inner.clone()
                )
                    .prop_map(|(op, l, r)| Expr::Binary {
                        op,
                        lhs: Box::new(l),
                        rhs: Box::new(r),
                        pos: Pos(0)
                    }),
                (prop::sample::select(UnaryFn::NAMED.to_vec()), inner).prop_map(|(f, x)| {
                    Expr::Call {
                        func: f,
                        arg: Box::new(x),
                        pos: Pos(0),
                    }
                }),
            ]
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn printer_round_trips(e in ast()) {
            let printed = e.to_string();
            let back = parse(&printed).unwrap();
            prop_assert_eq!(&back, &e, "printed: {}", printed);
            let again = parse(&back.to_string()).unwrap();
            prop_assert_eq!(again, back);
        }

        #[test]
        fn constant_jets_match_real_evaluation(e in ast(), u1 in -2.0..2.0f64, s in -2.0..2.0f64) {
            let params = HashMap::from([("a".to_string(), 0.8), ("b".to_string(), 0.6)]);
            let reals = HashMap::from([
                ("u1".to_string(), u1), ("u2".to_string(), 0.25), ("s".to_string(), s),
            ]);
            let jets: HashMap<String, Jet2> =
                reals.iter().map(|(k, v)| (k.clone(), Jet2::constant(*v, 3))).collect();
            let r = eval_real(&e, &reals, &params);
            let j = eval_jet(&e, &jets, &params);
            match (r, j) {
                (Ok(r), Ok(j)) => prop_assert!(r.to_bits() == j.value().to_bits() || (r.is_nan() && j.value().is_nan())),
                (Err(_), Err(_)) => {}
                (r, j) => prop_assert!(false, "disagree: {:?} vs {:?}", r, j),
            }
        }
    }
}
