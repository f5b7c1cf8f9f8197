//! Scalar expression trees for user-supplied functions (`F(w)`, `H(w)`,
//! initial slices, gauge functions). Parsing lives in the `phe` crate; here
//! expressions are evaluated on jets and differentiated symbolically.

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::jet::Jet;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Exp,
    Ln,
    Sqrt,
    Sin,
    Cos,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Sin => "sin",
            Func::Cos => "cos",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "ln" | "log" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Func(Func, Box<Expr>),
}

/// Name-to-jet bindings for evaluation. Later bindings shadow earlier ones.
#[derive(Clone, Debug)]
pub struct Bindings {
    proto: Jet,
    vars: Vec<(String, Jet)>,
}

impl Bindings {
    /// `proto` fixes the jet layout used for numeric constants.
    pub fn new(proto: &Jet) -> Self {
        Bindings { proto: proto.lift(0.0), vars: Vec::new() }
    }

    pub fn var(mut self, name: &str, value: Jet) -> Self {
        self.vars.push((name.to_string(), value));
        self
    }

    pub fn constant(mut self, name: &str, value: f64) -> Self {
        let j = self.proto.lift(value);
        self.vars.push((name.to_string(), j));
        self
    }

    pub fn get(&self, name: &str) -> Option<&Jet> {
        self.vars.iter().rev().find(|(n, _)| n == name).map(|(_, j)| j)
    }

    pub fn proto(&self) -> &Jet {
        &self.proto
    }
}

impl Expr {
    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    pub fn free_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            Expr::Num(_) => {}
            Expr::Var(n) => {
                if !out.contains(n) {
                    out.push(n.clone());
                }
            }
            Expr::Neg(a) | Expr::Func(_, a) => a.collect_vars(out),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    pub fn eval(&self, env: &Bindings) -> Result<Jet> {
        Ok(match self {
            Expr::Num(v) => env.proto.lift(*v),
            Expr::Var(n) => env.get(n).cloned().ok_or_else(|| Error::UnboundVariable(n.clone()))?,
            Expr::Neg(a) => -a.eval(env)?,
            Expr::Add(a, b) => a.eval(env)? + b.eval(env)?,
            Expr::Sub(a, b) => a.eval(env)? - b.eval(env)?,
            Expr::Mul(a, b) => a.eval(env)? * b.eval(env)?,
            Expr::Div(a, b) => a.eval(env)?.checked_div(&b.eval(env)?)?,
            Expr::Pow(a, b) => {
                let base = a.eval(env)?;
                let exp = b.eval(env)?;
                if exp.coeffs()[1..].iter().all(|&c| c == 0.0) {
                    base.powf(exp.value())?
                } else {
                    (exp * base.ln()?).exp()
                }
            }
            Expr::Func(f, a) => {
                let v = a.eval(env)?;
                match f {
                    Func::Exp => v.exp(),
                    Func::Ln => v.ln()?,
                    Func::Sqrt => v.sqrt()?,
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                }
            }
        })
    }

    /// Plain numeric evaluation with scalar bindings.
    pub fn eval_f64(&self, vars: &[(&str, f64)]) -> Result<f64> {
        let proto = Jet::constant(1, 0, 0.0);
        let mut env = Bindings::new(&proto);
        for (n, v) in vars {
            env = env.constant(n, *v);
        }
        Ok(self.eval(&env)?.value())
    }

    /// Symbolic derivative with light constant folding.
    pub fn diff(&self, var: &str) -> Expr {
        use Expr::*;
        match self {
            Num(_) => Num(0.0),
            Var(n) => Num(if n == var { 1.0 } else { 0.0 }),
            Neg(a) => neg(a.diff(var)),
            Add(a, b) => add(a.diff(var), b.diff(var)),
            Sub(a, b) => sub(a.diff(var), b.diff(var)),
            Mul(a, b) => add(mul(a.diff(var), (**b).clone()), mul((**a).clone(), b.diff(var))),
            Div(a, b) => div(
                sub(mul(a.diff(var), (**b).clone()), mul((**a).clone(), b.diff(var))),
                mul((**b).clone(), (**b).clone()),
            ),
            Pow(a, b) => {
                let db = b.diff(var);
                if db.is_zero() {
                    // d(a^n) = n a^(n-1) a'
                    mul(
                        mul((**b).clone(), pow((**a).clone(), sub((**b).clone(), Num(1.0)))),
                        a.diff(var),
                    )
                } else {
                    // d(a^b) = a^b (b' ln a + b a'/a)
                    mul(
                        self.clone(),
                        add(
                            mul(db, Func(self::Func::Ln, a.clone())),
                            div(mul((**b).clone(), a.diff(var)), (**a).clone()),
                        ),
                    )
                }
            }
            Func(f, a) => {
                let da = a.diff(var);
                let outer = match f {
                    self::Func::Exp => self.clone(),
                    self::Func::Ln => div(Num(1.0), (**a).clone()),
                    self::Func::Sqrt => div(Num(0.5), self.clone()),
                    self::Func::Sin => Func(self::Func::Cos, a.clone()),
                    self::Func::Cos => neg(Func(self::Func::Sin, a.clone())),
                };
                mul(outer, da)
            }
        }
    }

    /// Substitute `value` for every occurrence of variable `name`.
    pub fn substitute(&self, name: &str, value: &Expr) -> Expr {
        use Expr::*;
        let s = |e: &Expr| Box::new(e.substitute(name, value));
        match self {
            Num(v) => Num(*v),
            Var(n) if n == name => value.clone(),
            Var(n) => Var(n.clone()),
            Neg(a) => Neg(s(a)),
            Add(a, b) => Add(s(a), s(b)),
            Sub(a, b) => Sub(s(a), s(b)),
            Mul(a, b) => Mul(s(a), s(b)),
            Div(a, b) => Div(s(a), s(b)),
            Pow(a, b) => Pow(s(a), s(b)),
            Func(f, a) => Func(*f, s(a)),
        }
    }

    fn is_zero(&self) -> bool {
        matches!(self, Expr::Num(v) if *v == 0.0)
    }

    fn is_one(&self) -> bool {
        matches!(self, Expr::Num(v) if *v == 1.0)
    }
}

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Num(v) => Expr::Num(-v),
        a => Expr::Neg(Box::new(a)),
    }
}

fn add(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Num(x), Expr::Num(y)) => Expr::Num(x + y),
        (a, b) if a.is_zero() => b,
        (a, b) if b.is_zero() => a,
        (a, b) => Expr::Add(Box::new(a), Box::new(b)),
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Num(x), Expr::Num(y)) => Expr::Num(x - y),
        (a, b) if b.is_zero() => a,
        (a, b) if a.is_zero() => neg(b),
        (a, b) => Expr::Sub(Box::new(a), Box::new(b)),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Num(x), Expr::Num(y)) => Expr::Num(x * y),
        (a, b) if a.is_zero() || b.is_zero() => Expr::Num(0.0),
        (a, b) if a.is_one() => b,
        (a, b) if b.is_one() => a,
        (a, b) => Expr::Mul(Box::new(a), Box::new(b)),
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (a, _) if a.is_zero() => Expr::Num(0.0),
        (a, b) if b.is_one() => a,
        (a, b) => Expr::Div(Box::new(a), Box::new(b)),
    }
}

fn pow(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (_, b) if b.is_zero() => Expr::Num(1.0),
        (a, b) if b.is_one() => a,
        (a, b) => Expr::Pow(Box::new(a), Box::new(b)),
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(n) => f.write_str(n),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, b) => write!(f, "({a} ^ {b})"),
            Expr::Func(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

impl core::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        add(self, rhs)
    }
}

impl core::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        sub(self, rhs)
    }
}

impl core::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        mul(self, rhs)
    }
}

impl core::ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        div(self, rhs)
    }
}

impl core::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        neg(self)
    }
}

impl Expr {
    pub fn pow(self, e: Expr) -> Expr {
        pow(self, e)
    }

    pub fn apply(f: Func, a: Expr) -> Expr {
        Expr::Func(f, Box::new(a))
    }
}
