//! Scalar expressions over the chart coordinates `u` (= u¹) and `v` (= u²).
//!
//! Grammar (precedence climbing, lowest first):
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' unary)?
//! atom  := number | 'pi' | 'e' | 'u' | 'v' | func '(' expr ')' | '(' expr ')'
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so `-v^2`
//! is `-(v^2)`. There is no implicit multiplication.

mod parser;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::jet::{BiJet, Jet3, Scalar};

pub use parser::parse;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("domain error: {0}")]
    Domain(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    /// First chart coordinate u¹.
    U,
    /// Second chart coordinate u².
    V,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::U => "u",
            Var::V => "v",
        }
    }

    fn slot(self) -> usize {
        match self {
            Var::U => 0,
            Var::V => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constant {
    Pi,
    E,
}

impl Constant {
    pub fn value(self) -> f64 {
        match self {
            Constant::Pi => std::f64::consts::PI,
            Constant::E => std::f64::consts::E,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Sinh,
    Cosh,
    Tanh,
    Abs,
}

impl Func {
    pub const ALL: [Func; 10] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Exp,
        Func::Log,
        Func::Sqrt,
        Func::Sinh,
        Func::Cosh,
        Func::Tanh,
        Func::Abs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Abs => "abs",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }

    /// `[f, f', f'', f''', f'''']` at `x`.
    fn derivatives(self, x: f64, has_derivatives: bool) -> Result<[f64; 5], ExprError> {
        let d = match self {
            Func::Sin => {
                let (s, c) = x.sin_cos();
                [s, c, -s, -c, s]
            }
            Func::Cos => {
                let (s, c) = x.sin_cos();
                [c, -s, -c, s, c]
            }
            Func::Tan => {
                if x.cos() == 0.0 {
                    return Err(ExprError::Domain(format!("tan undefined at {x}")));
                }
                let t = x.tan();
                let sec2 = 1.0 + t * t;
                [
                    t,
                    sec2,
                    2.0 * t * sec2,
                    2.0 * sec2 * (1.0 + 3.0 * t * t),
                    8.0 * t * sec2 * (2.0 + 3.0 * t * t),
                ]
            }
            Func::Exp => {
                let e = x.exp();
                [e; 5]
            }
            Func::Log => {
                if x <= 0.0 {
                    return Err(ExprError::Domain(format!("log of non-positive value {x}")));
                }
                let r = 1.0 / x;
                [x.ln(), r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r]
            }
            Func::Sqrt => {
                if x < 0.0 || (x == 0.0 && has_derivatives) {
                    return Err(ExprError::Domain(format!("sqrt of {x}")));
                }
                let s = x.sqrt();
                if x == 0.0 {
                    [0.0; 5]
                } else {
                    [
                        s,
                        0.5 / s,
                        -0.25 / (x * s),
                        0.375 / (x * x * s),
                        -0.9375 / (x * x * x * s),
                    ]
                }
            }
            Func::Sinh => {
                let (s, c) = (x.sinh(), x.cosh());
                [s, c, s, c, s]
            }
            Func::Cosh => {
                let (s, c) = (x.sinh(), x.cosh());
                [c, s, c, s, c]
            }
            Func::Tanh => {
                let t = x.tanh();
                let q = 1.0 - t * t;
                [
                    t,
                    q,
                    -2.0 * t * q,
                    q * (6.0 * t * t - 2.0),
                    8.0 * t * q * (2.0 - 3.0 * t * t),
                ]
            }
            Func::Abs => {
                if x == 0.0 && has_derivatives {
                    return Err(ExprError::Domain("abs is not differentiable at 0".into()));
                }
                [x.abs(), x.signum(), 0.0, 0.0, 0.0]
            }
        };
        Ok(d)
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
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Const(Constant),
    Var(Var),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

// Printing precedence levels.
const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_UNARY: u8 = 3;
const PREC_POW: u8 = 4;
const PREC_ATOM: u8 = 5;

impl Expr {
    pub fn num(x: f64) -> Expr {
        Expr::Num(x)
    }

    pub fn var(v: Var) -> Expr {
        Expr::Var(v)
    }

    pub fn binary(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    pub fn call(f: Func, a: Expr) -> Expr {
        Expr::Call(f, Box::new(a))
    }

    pub fn neg(a: Expr) -> Expr {
        Expr::Neg(Box::new(a))
    }

    /// Variables referenced anywhere in the tree.
    pub fn variables(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Expr::Var(v) => {
                out.insert(*v);
            }
            Expr::Num(_) | Expr::Const(_) => {}
            Expr::Neg(a) | Expr::Call(_, a) => a.collect_vars(out),
            Expr::Binary(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Num(x) if x.is_sign_negative() => PREC_UNARY,
            Expr::Num(_) | Expr::Const(_) | Expr::Var(_) | Expr::Call(..) => PREC_ATOM,
            Expr::Neg(_) => PREC_UNARY,
            Expr::Binary(op, ..) => match op {
                BinOp::Add | BinOp::Sub => PREC_ADD,
                BinOp::Mul | BinOp::Div => PREC_MUL,
                BinOp::Pow => PREC_POW,
            },
        }
    }

    fn write_at(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        let parens = self.precedence() < min_prec;
        if parens {
            f.write_str("(")?;
        }
        match self {
            Expr::Num(x) => write!(f, "{x}")?,
            Expr::Const(Constant::Pi) => f.write_str("pi")?,
            Expr::Const(Constant::E) => f.write_str("e")?,
            Expr::Var(v) => f.write_str(v.name())?,
            Expr::Neg(a) => {
                f.write_str("-")?;
                a.write_at(f, PREC_UNARY)?;
            }
            Expr::Call(func, a) => {
                write!(f, "{}(", func.name())?;
                a.write_at(f, 0)?;
                f.write_str(")")?;
            }
            Expr::Binary(op, a, b) => {
                // Left-associative operators need a strictly tighter right
                // operand; `^` needs an atom on the left.
                let (lp, rp) = match op {
                    BinOp::Add | BinOp::Sub => (PREC_ADD, PREC_MUL),
                    BinOp::Mul | BinOp::Div => (PREC_MUL, PREC_UNARY),
                    BinOp::Pow => (PREC_ATOM, PREC_UNARY),
                };
                a.write_at(f, lp)?;
                write!(f, " {} ", op.symbol())?;
                b.write_at(f, rp)?;
            }
        }
        if parens {
            f.write_str(")")?;
        }
        Ok(())
    }

    /// Evaluates with `vars = [u, v]`.
    pub fn eval<S: Scalar>(&self, vars: &[S; 2]) -> Result<S, ExprError> {
        let out = match self {
            Expr::Num(x) => S::constant(*x),
            Expr::Const(c) => S::constant(c.value()),
            Expr::Var(v) => vars[v.slot()],
            Expr::Neg(a) => -a.eval(vars)?,
            Expr::Call(func, a) => {
                let x = a.eval(vars)?;
                let d = func.derivatives(x.value(), !x.is_constant())?;
                x.compose(d)
            }
            Expr::Binary(op, a, b) => {
                let x = a.eval(vars)?;
                let y = b.eval(vars)?;
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => {
                        if y.value() == 0.0 {
                            return Err(ExprError::Domain("division by zero".into()));
                        }
                        x * y.recip()
                    }
                    BinOp::Pow => power(x, y)?,
                }
            }
        };
        if !out.is_finite() {
            return Err(ExprError::Domain(format!("non-finite result in `{self}`")));
        }
        Ok(out)
    }

    pub fn eval_f64(&self, u: f64, v: f64) -> Result<f64, ExprError> {
        self.eval(&[u, v])
    }

    /// Bivariate jet to total order 4 at `(u, v)`.
    pub fn eval_bijet(&self, u: f64, v: f64) -> Result<BiJet, ExprError> {
        self.eval(&[BiJet::variable(u, 0), BiJet::variable(v, 1)])
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_at(f, 0)
    }
}

fn power<S: Scalar>(base: S, exponent: S) -> Result<S, ExprError> {
    let x = base.value();
    if exponent.is_constant() {
        let p = exponent.value();
        if p.fract() == 0.0 && p.abs() < i32::MAX as f64 {
            let n = p as i32;
            if x == 0.0 && n < 0 {
                return Err(ExprError::Domain("zero raised to a negative power".into()));
            }
            // Terms with a vanishing falling-factorial coefficient are dropped
            // so that 0^(negative) never enters.
            let mut d = [0.0; 5];
            let mut coeff = 1.0;
            for (k, slot) in d.iter_mut().enumerate() {
                if coeff != 0.0 {
                    *slot = coeff * x.powi(n - k as i32);
                }
                coeff *= (n - k as i32) as f64;
            }
            return Ok(base.compose(d));
        }
        if x < 0.0 || (x == 0.0 && (p <= 0.0 || !base.is_constant())) {
            return Err(ExprError::Domain(format!(
                "{x} raised to non-integer power {p}"
            )));
        }
        let d = [
            x.powf(p),
            p * x.powf(p - 1.0),
            p * (p - 1.0) * x.powf(p - 2.0),
            p * (p - 1.0) * (p - 2.0) * x.powf(p - 3.0),
            p * (p - 1.0) * (p - 2.0) * (p - 3.0) * x.powf(p - 4.0),
        ];
        return Ok(base.compose(d));
    }
    if x <= 0.0 {
        return Err(ExprError::Domain(format!(
            "non-positive base {x} with a variable exponent"
        )));
    }
    let r = 1.0 / x;
    let ln = base.compose([x.ln(), r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r]);
    let z = exponent * ln;
    let e = z.value().exp();
    Ok(z.compose([e; 5]))
}

/// Value and first three derivatives of `e` in `wrt` at `at = (u, v)`.
pub fn eval_jet3(e: &Expr, at: (f64, f64), wrt: Var) -> Result<Jet3, ExprError> {
    let (u, v) = at;
    let vars = match wrt {
        Var::U => [Jet3::variable(u), Jet3::constant(v)],
        Var::V => [Jet3::constant(u), Jet3::variable(v)],
    };
    e.eval(&vars)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn jet(src: &str, at: (f64, f64), wrt: Var) -> Jet3 {
        eval_jet3(&parse(src).unwrap(), at, wrt).unwrap()
    }

    #[test]
    fn sin_taylor_at_zero() {
        let j = jet("sin(v)", (0.0, 0.0), Var::V);
        assert_eq!(j.as_array(), [0.0, 1.0, 0.0, -1.0]);
    }

    #[test]
    fn cube_derivatives() {
        let j = jet("v^3", (0.0, 2.0), Var::V);
        assert_eq!(j.as_array(), [8.0, 12.0, 12.0, 6.0]);
    }

    #[test]
    fn unary_minus_is_looser_than_power() {
        let e = parse("-v^2").unwrap();
        assert_eq!(e.eval_f64(0.0, 3.0).unwrap(), -9.0);
        assert_eq!(parse("(-v)^2").unwrap().eval_f64(0.0, 3.0).unwrap(), 9.0);
    }

    #[test]
    fn power_is_right_associative() {
        assert_eq!(parse("2^3^2").unwrap().eval_f64(0.0, 0.0).unwrap(), 512.0);
        assert_eq!(parse("2^-1").unwrap().eval_f64(0.0, 0.0).unwrap(), 0.5);
    }

    #[test]
    fn domain_errors() {
        let cases = ["log(v)", "sqrt(v - 1)", "1/v", "log(0)"];
        for src in cases {
            let e = parse(src).unwrap();
            assert!(
                matches!(e.eval_f64(0.0, 0.0), Err(ExprError::Domain(_))),
                "{src} should fail at v=0"
            );
        }
        let e = parse("sqrt(v)").unwrap();
        assert_eq!(e.eval_f64(0.0, 0.0).unwrap(), 0.0);
        assert!(eval_jet3(&e, (0.0, 0.0), Var::V).is_err());
    }

    #[test]
    fn integer_power_at_zero() {
        let j = jet("v^1", (0.0, 0.0), Var::V);
        assert_eq!(j.as_array(), [0.0, 1.0, 0.0, 0.0]);
        let j = jet("v^2", (0.0, 0.0), Var::V);
        assert_eq!(j.as_array(), [0.0, 0.0, 2.0, 0.0]);
        let j = jet("(v - 1)^2", (0.0, -1.0), Var::V);
        assert_eq!(j.as_array(), [4.0, -4.0, 2.0, 0.0]);
    }

    #[test]
    fn variable_exponent() {
        // d/dv 2^v = ln2 * 2^v
        let j = jet("2^v", (0.0, 1.0), Var::V);
        let l = 2f64.ln();
        assert!((j.d1 - 2.0 * l).abs() < 1e-14);
        assert!((j.d3 - 2.0 * l * l * l).abs() < 1e-14);
    }

    #[test]
    fn mixed_partials_through_bijet() {
        let e = parse("sin(u) * exp(v)").unwrap();
        let j = e.eval_bijet(0.4, 0.2).unwrap();
        let expect = 0.4f64.cos() * 0.2f64.exp();
        assert!((j.derivative(1, 1) - expect).abs() < 1e-15);
        assert!((j.derivative(2, 1) + 0.4f64.sin() * 0.2f64.exp()).abs() < 1e-15);
    }

    #[test]
    fn printing_round_trip() {
        for src in [
            "-v^2",
            "(-v)^2",
            "2 - (3 - v)",
            "2^3^2",
            "(2^3)^2",
            "--v",
            "u / (v * 2)",
        ] {
            let e = parse(src).unwrap();
            let printed = e.to_string();
            assert_eq!(parse(&printed).unwrap(), e, "{src} -> {printed}");
        }
    }

    #[test]
    fn variable_set() {
        let e = parse("sin(u) + v*pi").unwrap();
        assert_eq!(
            e.variables().into_iter().collect::<Vec<_>>(),
            vec![Var::U, Var::V]
        );
        assert!(parse("2 + 1*cos(v)").unwrap().variables().contains(&Var::V));
    }
}
