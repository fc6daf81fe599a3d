use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use super::space::Space;
use crate::error::{Error, Result};

/// Truncated multivariate Taylor polynomial around a base point.
///
/// Coefficient `c[m]` multiplies the monomial `m` in the displacement from the
/// base point; a mixed partial is `c[m] * m!`. Binary operations truncate to
/// the smaller of the two orders.
#[derive(Clone)]
pub struct Jet {
    space: &'static Space,
    order: usize,
    c: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("nvars", &self.space.nvars())
            .field("order", &self.order)
            .field("value", &self.value())
            .finish()
    }
}

impl PartialEq for Jet {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self.space, other.space) && self.order == other.order && self.c == other.c
    }
}

fn domain(primitive: &'static str, value: f64) -> Error {
    Error::Domain {
        primitive,
        subexpr: String::new(),
        value,
    }
}

impl Jet {
    pub fn constant(space: &'static Space, order: usize, value: f64) -> Jet {
        assert!(order <= space.max_order(), "jet order {order} exceeds table");
        let mut c = vec![0.0; space.len(order)];
        c[0] = value;
        Jet { space, order, c }
    }

    /// The coordinate function `var`, expanded around `value`.
    pub fn variable(space: &'static Space, order: usize, var: usize, value: f64) -> Jet {
        let mut j = Jet::constant(space, order, value);
        if order >= 1 {
            j.c[1 + var] = 1.0;
        }
        j
    }

    /// `a + t` in the univariate series space.
    pub fn series_variable(a: f64, order: usize) -> Jet {
        Jet::variable(Space::series(), order, 0, a)
    }

    pub fn space(&self) -> &'static Space {
        self.space
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    /// Mixed partial derivative at the base point for the exponent vector `alpha`.
    pub fn partial(&self, alpha: &[u8]) -> Result<f64> {
        let deg: usize = alpha.iter().map(|&a| a as usize).sum();
        if deg > self.order {
            return Err(Error::JetOrder {
                needed: deg,
                have: self.order,
            });
        }
        let idx = self
            .space
            .index_of(alpha)
            .expect("multi-index length must match the jet's variable count");
        Ok(self.c[idx] * self.space.factorial(idx))
    }

    /// All univariate derivatives f, f', ..., f^(order) (series space only).
    pub fn derivatives(&self) -> Vec<f64> {
        debug_assert_eq!(self.space.nvars(), 1);
        self.c
            .iter()
            .enumerate()
            .map(|(k, v)| v * super::space::fact(k))
            .collect()
    }

    pub fn truncate(&self, order: usize) -> Jet {
        let order = order.min(self.order);
        Jet {
            space: self.space,
            order,
            c: self.c[..self.space.len(order)].to_vec(),
        }
    }

    /// Partial derivative with respect to `var`; the result has order `order - 1`.
    pub fn diff(&self, var: usize) -> Jet {
        assert!(self.order >= 1, "cannot differentiate an order-0 jet");
        let order = self.order - 1;
        let mut c = vec![0.0; self.space.len(order)];
        for &(src, dst, f) in self.space.derivative_table(var, order) {
            c[dst as usize] += f * self.c[src as usize];
        }
        Jet {
            space: self.space,
            order,
            c,
        }
    }

    pub fn scale(&self, k: f64) -> Jet {
        Jet {
            space: self.space,
            order: self.order,
            c: self.c.iter().map(|v| v * k).collect(),
        }
    }

    pub fn add_scalar(&self, k: f64) -> Jet {
        let mut out = self.clone();
        out.c[0] += k;
        out
    }

    fn zip(&self, other: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        debug_assert!(std::ptr::eq(self.space, other.space));
        let order = self.order.min(other.order);
        let n = self.space.len(order);
        let c = self.c[..n]
            .iter()
            .zip(&other.c[..n])
            .map(|(a, b)| f(*a, *b))
            .collect();
        Jet {
            space: self.space,
            order,
            c,
        }
    }

    fn product(&self, other: &Jet) -> Jet {
        debug_assert!(std::ptr::eq(self.space, other.space));
        let order = self.order.min(other.order);
        let mut c = vec![0.0; self.space.len(order)];
        for &(a, b, r) in self.space.products(order) {
            c[r as usize] += self.c[a as usize] * other.c[b as usize];
        }
        Jet {
            space: self.space,
            order,
            c,
        }
    }

    /// Compose a univariate function with this jet, given its Taylor
    /// coefficients `f^(k)(a) / k!` at `a = self.value()` for k = 0..=order.
    pub fn compose(&self, taylor: &[f64]) -> Jet {
        assert!(taylor.len() > self.order, "not enough Taylor coefficients");
        let mut h = self.clone();
        h.c[0] = 0.0;
        let mut acc = Jet::constant(self.space, self.order, taylor[self.order]);
        for k in (0..self.order).rev() {
            acc = acc.product(&h);
            acc.c[0] += taylor[k];
        }
        acc
    }

    pub fn recip(&self) -> Result<Jet> {
        let a = self.value();
        if a == 0.0 || !a.is_finite() {
            return Err(domain("division", a));
        }
        let mut t = Vec::with_capacity(self.order + 1);
        let mut p = 1.0 / a;
        for _ in 0..=self.order {
            t.push(p);
            p *= -1.0 / a;
        }
        Ok(self.compose(&t))
    }

    pub fn try_div(&self, other: &Jet) -> Result<Jet> {
        Ok(self.product(&other.recip()?))
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        let t: Vec<f64> = (0..=self.order)
            .scan(e, |acc, k| {
                if k > 0 {
                    *acc /= k as f64;
                }
                Some(*acc)
            })
            .collect();
        self.compose(&t)
    }

    pub fn ln(&self) -> Result<Jet> {
        let a = self.value();
        if a <= 0.0 || !a.is_finite() {
            return Err(domain("log", a));
        }
        let mut t = vec![a.ln()];
        for k in 1..=self.order {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            t.push(sign / (k as f64 * a.powi(k as i32)));
        }
        Ok(self.compose(&t))
    }

    /// `self^r` for real `r`; requires a positive base.
    pub fn powf(&self, r: f64) -> Result<Jet> {
        let a = self.value();
        if a <= 0.0 || !a.is_finite() {
            return Err(domain("real power", a));
        }
        let mut t = vec![a.powf(r)];
        for k in 1..=self.order {
            let prev = t[k - 1];
            t.push(prev * (r - (k as f64 - 1.0)) / (k as f64 * a));
        }
        Ok(self.compose(&t))
    }

    pub fn sqrt(&self) -> Result<Jet> {
        let a = self.value();
        if a <= 0.0 || !a.is_finite() {
            return Err(domain("sqrt", a));
        }
        self.powf(0.5)
    }

    pub fn powi(&self, n: i32) -> Result<Jet> {
        if n < 0 {
            let r = self.recip()?;
            return Ok(r.powi_nonneg(n.unsigned_abs()));
        }
        Ok(self.powi_nonneg(n as u32))
    }

    fn powi_nonneg(&self, mut n: u32) -> Jet {
        let mut result = Jet::constant(self.space, self.order, 1.0);
        let mut base = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                result = result.product(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.product(&base);
            }
        }
        result
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        self.compose(&trig_taylor(s, c, self.order))
    }

    pub fn cos(&self) -> Jet {
        // cos(a + h) = sin(a + pi/2 + h)
        let (s, c) = self.value().sin_cos();
        self.compose(&trig_taylor(c, -s, self.order))
    }
}

/// Taylor coefficients of g(a + h) where g(a) = v, g'(a) = d and g'' = -g.
fn trig_taylor(v: f64, d: f64, order: usize) -> Vec<f64> {
    let cycle = [v, d, -v, -d];
    (0..=order)
        .map(|k| cycle[k % 4] / super::space::fact(k))
        .collect()
}

macro_rules! binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl $tr<&Jet> for &Jet {
            type Output = Jet;
            fn $m(self, rhs: &Jet) -> Jet {
                let f: fn(&Jet, &Jet) -> Jet = $body;
                f(self, rhs)
            }
        }
        impl $tr<Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: &Jet) -> Jet {
                (&self).$m(rhs)
            }
        }
        impl $tr<Jet> for &Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                self.$m(&rhs)
            }
        }
    };
}

binop!(Add, add, |a, b| a.zip(b, |x, y| x + y));
binop!(Sub, sub, |a, b| a.zip(b, |x, y| x - y));
binop!(Mul, mul, |a, b| a.product(b));

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, k: f64) -> Jet {
        self.scale(k)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, k: f64) -> Jet {
        self.scale(k)
    }
}

impl Mul<&Jet> for f64 {
    type Output = Jet;
    fn mul(self, j: &Jet) -> Jet {
        j.scale(self)
    }
}

impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, j: Jet) -> Jet {
        j.scale(self)
    }
}

impl Add<f64> for &Jet {
    type Output = Jet;
    fn add(self, k: f64) -> Jet {
        self.add_scalar(k)
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(self, k: f64) -> Jet {
        self.add_scalar(k)
    }
}

impl Sub<f64> for &Jet {
    type Output = Jet;
    fn sub(self, k: f64) -> Jet {
        self.add_scalar(-k)
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(self, k: f64) -> Jet {
        self.add_scalar(-k)
    }
}

impl Div<f64> for &Jet {
    type Output = Jet;
    fn div(self, k: f64) -> Jet {
        self.scale(1.0 / k)
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    fn div(self, k: f64) -> Jet {
        self.scale(1.0 / k)
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn field_var(v: usize, a: f64, k: usize) -> Jet {
        Jet::variable(Space::field(), k, v, a)
    }

    #[test]
    fn polynomial_partials() {
        // x1^2 + x2^2 at (3, 4)
        let x1 = field_var(0, 3.0, 2);
        let x2 = field_var(1, 4.0, 2);
        let f = &x1 * &x1 + &x2 * &x2;
        assert_eq!(f.value(), 25.0);
        assert_eq!(f.partial(&[1, 0, 0, 0]).unwrap(), 6.0);
        assert_eq!(f.partial(&[0, 1, 0, 0]).unwrap(), 8.0);
        assert_eq!(f.partial(&[2, 0, 0, 0]).unwrap(), 2.0);
        assert_eq!(f.partial(&[0, 2, 0, 0]).unwrap(), 2.0);
        assert_eq!(f.partial(&[1, 1, 0, 0]).unwrap(), 0.0);
        assert!(f.partial(&[3, 0, 0, 0]).is_err());
    }

    #[test]
    fn univariate_series_match_known_coefficients() {
        let t = Jet::series_variable(0.0, 5);
        let e = t.exp();
        assert_relative_eq!(e.coeffs()[4], 1.0 / 24.0, epsilon = 1e-15);
        let s = t.sin();
        assert_relative_eq!(s.coeffs()[3], -1.0 / 6.0, epsilon = 1e-15);
        let c = t.cos();
        assert_relative_eq!(c.coeffs()[4], 1.0 / 24.0, epsilon = 1e-15);
        let one_minus = (-&t).add_scalar(1.0);
        let g = one_minus.recip().unwrap();
        for k in 0..=5 {
            assert_relative_eq!(g.coeffs()[k], 1.0, epsilon = 1e-14);
        }
        let l = t.add_scalar(1.0).ln().unwrap();
        assert_relative_eq!(l.coeffs()[4], -0.25, epsilon = 1e-15);
    }

    #[test]
    fn derivative_lowers_order_and_matches() {
        let x = Jet::series_variable(0.7, 6);
        let f = x.powi(5).unwrap();
        let d = f.diff(0);
        assert_eq!(d.order(), 5);
        assert_relative_eq!(d.value(), 5.0 * 0.7f64.powi(4), epsilon = 1e-14);
        assert_relative_eq!(d.derivatives()[1], 20.0 * 0.7f64.powi(3), epsilon = 1e-13);
    }

    #[test]
    fn domain_errors_at_order_zero() {
        let z = Jet::constant(Space::field(), 3, 0.0);
        assert!(z.sqrt().is_err());
        assert!(z.ln().is_err());
        assert!(z.recip().is_err());
        let n = Jet::constant(Space::field(), 3, -1.0);
        assert!(n.powf(0.3).is_err());
        assert!(n.powi(-3).is_ok());
    }

    #[test]
    fn powf_matches_repeated_product_for_integer_exponent() {
        let x = field_var(0, 1.3, 5) + field_var(2, 0.2, 5);
        let a = x.powf(3.0).unwrap();
        let b = &x * &x * &x;
        for (p, q) in a.coeffs().iter().zip(b.coeffs()) {
            assert_relative_eq!(*p, *q, epsilon = 1e-13, max_relative = 1e-13);
        }
    }
}
