use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Sqrt,
    Exp,
    Log,
    Sin,
    Cos,
}

impl UnaryOp {
    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Sqrt => "sqrt",
            UnaryOp::Exp => "exp",
            UnaryOp::Log => "log",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
        }
    }

    pub fn from_name(name: &str) -> Option<UnaryOp> {
        Some(match name {
            "sqrt" => UnaryOp::Sqrt,
            "exp" => UnaryOp::Exp,
            "log" => UnaryOp::Log,
            "sin" => UnaryOp::Sin,
            "cos" => UnaryOp::Cos,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Scalar field over chart coordinates. Variables are 1-based (`x1`, `x2`, ...).
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    /// Integer power.
    Pow(Box<Expr>, i32),
}

// Printing precedences.
const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_NEG: u8 = 3;
const PREC_POW: u8 = 4;
const PREC_ATOM: u8 = 5;

impl Expr {
    pub fn constant(v: f64) -> Expr {
        Expr::Const(v)
    }

    pub fn var(i: usize) -> Expr {
        Expr::Var(i)
    }

    pub fn unary(op: UnaryOp, e: Expr) -> Expr {
        Expr::Unary(op, Box::new(e))
    }

    pub fn sqrt(self) -> Expr {
        Expr::unary(UnaryOp::Sqrt, self)
    }

    pub fn exp(self) -> Expr {
        Expr::unary(UnaryOp::Exp, self)
    }

    pub fn log(self) -> Expr {
        Expr::unary(UnaryOp::Log, self)
    }

    /// Integer power, folding the trivial exponents.
    pub fn powi(self, n: i32) -> Expr {
        match n {
            0 => Expr::Const(1.0),
            1 => self,
            _ => match self {
                Expr::Const(c) => Expr::Const(c.powi(n)),
                e => Expr::Pow(Box::new(e), n),
            },
        }
    }

    /// Real power of a positive field, written with grammar primitives only:
    /// integer powers directly, half-integers via sqrt, anything else via exp/log.
    pub fn real_pow(self, p: f64) -> Expr {
        if p.fract() == 0.0 {
            return self.powi(p as i32);
        }
        if (2.0 * p).fract() == 0.0 {
            return self.sqrt().powi((2.0 * p) as i32);
        }
        (Expr::Const(p) * self.log()).exp()
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    /// Largest variable index referenced (0 if none).
    pub fn max_var(&self) -> usize {
        match self {
            Expr::Const(_) => 0,
            Expr::Var(i) => *i,
            Expr::Unary(_, e) | Expr::Pow(e, _) => e.max_var(),
            Expr::Binary(_, a, b) => a.max_var().max(b.max_var()),
        }
    }

    /// Replace variable `i` by `vars[i - 1]`.
    pub fn substitute(&self, vars: &[Expr]) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(*c),
            Expr::Var(i) => vars[*i - 1].clone(),
            Expr::Unary(op, e) => Expr::unary(*op, e.substitute(vars)),
            Expr::Binary(op, a, b) => {
                Expr::Binary(*op, Box::new(a.substitute(vars)), Box::new(b.substitute(vars)))
            }
            Expr::Pow(e, n) => Expr::Pow(Box::new(e.substitute(vars)), *n),
        }
    }

    /// Plain floating-point evaluation at `x` (`x[i - 1]` is variable `i`).
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        let dom = |primitive: &'static str, value: f64, e: &Expr| Error::Domain {
            primitive,
            subexpr: e.to_string(),
            value,
        };
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Var(i) => x[*i - 1],
            Expr::Unary(op, e) => {
                let v = e.eval(x)?;
                match op {
                    UnaryOp::Neg => -v,
                    UnaryOp::Sqrt if v <= 0.0 => return Err(dom("sqrt", v, self)),
                    UnaryOp::Sqrt => v.sqrt(),
                    UnaryOp::Exp => v.exp(),
                    UnaryOp::Log if v <= 0.0 => return Err(dom("log", v, self)),
                    UnaryOp::Log => v.ln(),
                    UnaryOp::Sin => v.sin(),
                    UnaryOp::Cos => v.cos(),
                }
            }
            Expr::Binary(op, a, b) => {
                let (p, q) = (a.eval(x)?, b.eval(x)?);
                match op {
                    BinOp::Add => p + q,
                    BinOp::Sub => p - q,
                    BinOp::Mul => p * q,
                    BinOp::Div if q == 0.0 => return Err(dom("division", q, self)),
                    BinOp::Div => p / q,
                }
            }
            Expr::Pow(e, n) => {
                let v = e.eval(x)?;
                if *n < 0 && v == 0.0 {
                    return Err(dom("division", v, self));
                }
                v.powi(*n)
            }
        })
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Const(_) | Expr::Var(_) => PREC_ATOM,
            Expr::Unary(UnaryOp::Neg, _) => PREC_NEG,
            Expr::Unary(..) => PREC_ATOM,
            Expr::Binary(BinOp::Add | BinOp::Sub, ..) => PREC_ADD,
            Expr::Binary(..) => PREC_MUL,
            Expr::Pow(..) => PREC_POW,
        }
    }

    /// Render as source text with minimal parentheses, naming variables with `name`.
    pub fn to_source_with(&self, name: &dyn Fn(usize) -> String) -> String {
        let mut out = String::new();
        self.write_src(&mut out, name);
        out
    }

    fn write_src(&self, out: &mut String, name: &dyn Fn(usize) -> String) {
        let child = |e: &Expr, out: &mut String, paren: bool| {
            if paren {
                out.push('(');
            }
            e.write_src(out, name);
            if paren {
                out.push(')');
            }
        };
        match self {
            Expr::Const(c) => {
                if *c < 0.0 {
                    out.push_str(&format!("({c})"));
                } else {
                    out.push_str(&format!("{c}"));
                }
            }
            Expr::Var(i) => out.push_str(&name(*i)),
            Expr::Unary(UnaryOp::Neg, e) => {
                out.push('-');
                child(e, out, e.precedence() < PREC_NEG);
            }
            Expr::Unary(op, e) => {
                out.push_str(op.name());
                child(e, out, true);
            }
            Expr::Binary(op, a, b) => {
                let (p, sym) = match op {
                    BinOp::Add => (PREC_ADD, "+"),
                    BinOp::Sub => (PREC_ADD, "-"),
                    BinOp::Mul => (PREC_MUL, "*"),
                    BinOp::Div => (PREC_MUL, "/"),
                };
                child(a, out, a.precedence() < p);
                out.push_str(sym);
                child(b, out, b.precedence() <= p);
            }
            Expr::Pow(e, n) => {
                child(e, out, e.precedence() < PREC_ATOM);
                out.push_str(&format!("^{n}"));
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_source_with(&|i| format!("x{i}")))
    }
}

// Builder arithmetic with light constant folding; the parser never uses these.
impl Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => Expr::Const(a + b),
            (Some(z), _) if z == 0.0 => rhs,
            (_, Some(z)) if z == 0.0 => self,
            _ => Expr::Binary(BinOp::Add, Box::new(self), Box::new(rhs)),
        }
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => Expr::Const(a - b),
            (_, Some(z)) if z == 0.0 => self,
            (Some(z), _) if z == 0.0 => -rhs,
            _ => Expr::Binary(BinOp::Sub, Box::new(self), Box::new(rhs)),
        }
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => Expr::Const(a * b),
            (Some(z), _) | (_, Some(z)) if z == 0.0 => Expr::Const(0.0),
            (Some(o), _) if o == 1.0 => rhs,
            (_, Some(o)) if o == 1.0 => self,
            _ => Expr::Binary(BinOp::Mul, Box::new(self), Box::new(rhs)),
        }
    }
}

impl Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) if b != 0.0 => Expr::Const(a / b),
            (_, Some(o)) if o == 1.0 => self,
            _ => Expr::Binary(BinOp::Div, Box::new(self), Box::new(rhs)),
        }
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(-c),
            e => Expr::unary(UnaryOp::Neg, e),
        }
    }
}

impl From<f64> for Expr {
    fn from(v: f64) -> Expr {
        Expr::Const(v)
    }
}
