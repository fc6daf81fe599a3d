//! Riemannian base layer: a_ij and its inverse, Christoffel symbols, the spray
//! of alpha, the covariant derivative of beta and its symmetric/antisymmetric
//! split, and the Gauss curvature.
//!
//! Everything is computed on jets over the (x, y) block, so derived fields
//! carry their own derivatives; the numeric entry points read off values.

use nalgebra::{Matrix2, Vector2};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exprlang::MetricDef;
use crate::jets::{eval_expr_jet, Jet, Space};

pub type J2 = [Jet; 2];
pub type J22 = [[Jet; 2]; 2];
pub type J222 = [[[Jet; 2]; 2]; 2];

/// Index of the x^k variable in the field space.
pub const fn xv(k: usize) -> usize {
    k
}

/// Index of the y^k variable in the field space.
pub const fn yv(k: usize) -> usize {
    2 + k
}

pub(crate) fn map2<T>(f: impl FnMut(usize) -> T) -> [T; 2] {
    std::array::from_fn(f)
}

pub(crate) fn map22<T>(mut f: impl FnMut(usize, usize) -> T) -> [[T; 2]; 2] {
    std::array::from_fn(|i| std::array::from_fn(|j| f(i, j)))
}

pub(crate) fn map222<T>(mut f: impl FnMut(usize, usize, usize) -> T) -> [[[T; 2]; 2]; 2] {
    std::array::from_fn(|i| std::array::from_fn(|j| std::array::from_fn(|k| f(i, j, k))))
}

pub(crate) fn values2(v: &J2) -> [f64; 2] {
    map2(|i| v[i].value())
}

pub(crate) fn values22(m: &J22) -> [[f64; 2]; 2] {
    map22(|i, j| m[i][j].value())
}

/// The metric fields at a point, as jets to a chosen order, with everything
/// that needs only x: inverse, b^i, b^2, Christoffel symbols and b_{i|j}.
#[derive(Debug, Clone)]
pub struct FieldJets {
    pub x: [f64; 2],
    pub order: usize,
    pub a: J22,
    pub a_inv: J22,
    pub b: J2,
    pub b_up: J2,
    pub b2: Jet,
    /// gamma[i][j][k] = gamma^i_jk, one order lower than the fields.
    pub gamma: J222,
    /// nabla_b[i][j] = b_{i|j}, one order lower than the fields.
    pub nabla_b: J22,
}

/// Symmetric-factorization check of a 2x2 matrix with a relative pivot tolerance.
pub fn check_positive_definite(a: [[f64; 2]; 2], x: [f64; 2]) -> Result<()> {
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-12 * scale;
    let d1 = a[0][0];
    if !(d1 > tol) {
        return Err(Error::NotPositiveDefinite { x, pivot: d1 });
    }
    let d2 = a[1][1] - a[0][1] * a[1][0] / d1;
    if !(d2 > tol) {
        return Err(Error::NotPositiveDefinite { x, pivot: d2 });
    }
    Ok(())
}

impl FieldJets {
    /// Evaluate the metric fields at `x` to total order `order` (at least 1).
    pub fn eval(def: &MetricDef, x: [f64; 2], order: usize) -> Result<FieldJets> {
        if def.dim != 2 {
            return Err(Error::UnsupportedDimension(def.dim));
        }
        assert!(order >= 1, "field jets need order >= 1 for connection data");
        let space = Space::field();
        if order > space.max_order() {
            return Err(Error::JetOrder {
                needed: order,
                have: space.max_order(),
            });
        }
        let vars = [
            Jet::variable(space, order, xv(0), x[0]),
            Jet::variable(space, order, xv(1), x[1]),
        ];
        let a: J22 = {
            let a11 = eval_expr_jet(&def.a[0][0], &vars)?;
            let a12 = eval_expr_jet(&def.a[0][1], &vars)?;
            let a22 = eval_expr_jet(&def.a[1][1], &vars)?;
            [[a11, a12.clone()], [a12, a22]]
        };
        check_positive_definite(values22(&a), x)?;
        let b: J2 = [eval_expr_jet(&def.b[0], &vars)?, eval_expr_jet(&def.b[1], &vars)?];

        let det = &a[0][0] * &a[1][1] - &a[0][1] * &a[1][0];
        let inv_det = det.recip()?;
        let a_inv: J22 = [
            [&a[1][1] * &inv_det, -(&a[0][1] * &inv_det)],
            [-(&a[1][0] * &inv_det), &a[0][0] * &inv_det],
        ];
        let b_up: J2 = map2(|i| &a_inv[i][0] * &b[0] + &a_inv[i][1] * &b[1]);
        let b2 = &b[0] * &b_up[0] + &b[1] * &b_up[1];

        // da[l][j][k] = d_k a_lj
        let da = map222(|l, j, k| a[l][j].diff(xv(k)));
        // first-kind symbols [jk, l] = 1/2 (d_j a_lk + d_k a_lj - d_l a_jk)
        let first = map222(|l, j, k| (&da[l][k][j] + &da[l][j][k] - &da[j][k][l]).scale(0.5));
        let a_inv_low = map22(|i, l| a_inv[i][l].truncate(order - 1));
        let gamma = map222(|i, j, k| &a_inv_low[i][0] * &first[0][j][k] + &a_inv_low[i][1] * &first[1][j][k]);
        let b_low = map2(|m| b[m].truncate(order - 1));
        let nabla_b = map22(|i, j| b[i].diff(xv(j)) - &b_low[0] * &gamma[0][i][j] - &b_low[1] * &gamma[1][i][j]);

        Ok(FieldJets {
            x,
            order,
            a,
            a_inv,
            b,
            b_up,
            b2,
            gamma,
            nabla_b,
        })
    }

    /// The direction y as jets in the y-variables, at `order`.
    pub fn direction(&self, y: [f64; 2], order: usize) -> J2 {
        let space = Space::field();
        map2(|i| Jet::variable(space, order, yv(i), y[i]))
    }

    /// r_ij and s_ij.
    pub fn r_s(&self) -> (J22, J22) {
        let nb = &self.nabla_b;
        let r = map22(|i, j| (&nb[i][j] + &nb[j][i]).scale(0.5));
        let s = map22(|i, j| (&nb[i][j] - &nb[j][i]).scale(0.5));
        (r, s)
    }

    /// alpha^2 = a_ij y^i y^j for direction jets `y`.
    pub fn alpha2(&self, y: &J2) -> Jet {
        let mut acc = &self.a[0][0] * &y[0] * &y[0];
        acc = acc + (&self.a[0][1] * &y[0] * &y[1]).scale(2.0);
        acc + &self.a[1][1] * &y[1] * &y[1]
    }

    pub fn beta(&self, y: &J2) -> Jet {
        &self.b[0] * &y[0] + &self.b[1] * &y[1]
    }

    /// Spray of alpha by Christoffel contraction, G^i = 1/2 gamma^i_jk y^j y^k.
    pub fn riemann_spray(&self, y: &J2) -> J2 {
        map2(|i| {
            let g = &self.gamma[i];
            let mut acc = &g[0][0] * &y[0] * &y[0];
            acc = acc + (&g[0][1] * &y[0] * &y[1]).scale(2.0);
            (acc + &g[1][1] * &y[1] * &y[1]).scale(0.5)
        })
    }

    /// Spray of alpha from 1/4 a^il {[alpha^2]_{x^k y^l} y^k - [alpha^2]_{x^l}}; two orders below the fields.
    pub fn riemann_spray_direct(&self, y: &J2) -> J2 {
        let q = self.alpha2(y);
        let bracket = map2(|l| {
            let qyl = q.diff(yv(l));
            let mixed = &qyl.diff(xv(0)) * &y[0] + &qyl.diff(xv(1)) * &y[1];
            mixed - q.diff(xv(l)).truncate(self.order - 2)
        });
        map2(|i| (&self.a_inv[i][0] * &bracket[0] + &self.a_inv[i][1] * &bracket[1]).scale(0.25))
    }
}

/// Values of the metric data at a point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricAt {
    pub x: [f64; 2],
    pub a: [[f64; 2]; 2],
    pub a_inv: [[f64; 2]; 2],
    /// da[i][j][k] = d_k a_ij.
    pub da: [[[f64; 2]; 2]; 2],
    /// d2a[i][j][k][l] = d_k d_l a_ij.
    pub d2a: [[[[f64; 2]; 2]; 2]; 2],
    pub b: [f64; 2],
    /// db[i][k] = d_k b_i.
    pub db: [[f64; 2]; 2],
    pub b_up: [f64; 2],
    pub b2: f64,
}

impl MetricAt {
    pub fn a_matrix(&self) -> Matrix2<f64> {
        Matrix2::new(self.a[0][0], self.a[0][1], self.a[1][0], self.a[1][1])
    }

    pub fn b_vector(&self) -> Vector2<f64> {
        Vector2::new(self.b[0], self.b[1])
    }
}

pub fn metric_at(def: &MetricDef, x: [f64; 2]) -> Result<MetricAt> {
    let f = FieldJets::eval(def, x, 3)?;
    let p = |j: &Jet, alpha: [u8; 2]| j.partial(&[alpha[0], alpha[1], 0, 0]).expect("order 3 jet");
    let unit = |k: usize| if k == 0 { [1u8, 0] } else { [0u8, 1] };
    let two = |k: usize, l: usize| {
        let mut e = [0u8; 2];
        e[k] += 1;
        e[l] += 1;
        e
    };
    Ok(MetricAt {
        x,
        a: values22(&f.a),
        a_inv: values22(&f.a_inv),
        da: map222(|i, j, k| p(&f.a[i][j], unit(k))),
        d2a: std::array::from_fn(|i| map222(|j, k, l| p(&f.a[i][j], two(k, l)))),
        b: values2(&f.b),
        db: map22(|i, k| p(&f.b[i], unit(k))),
        b_up: values2(&f.b_up),
        b2: f.b2.value(),
    })
}

/// gamma^i_jk at x.
pub fn christoffel(def: &MetricDef, x: [f64; 2]) -> Result<[[[f64; 2]; 2]; 2]> {
    let f = FieldJets::eval(def, x, 1)?;
    Ok(map222(|i, j, k| f.gamma[i][j][k].value()))
}

/// Spray of alpha by Christoffel contraction.
pub fn riemann_spray(def: &MetricDef, x: [f64; 2], y: [f64; 2]) -> Result<[f64; 2]> {
    let f = FieldJets::eval(def, x, 1)?;
    let yj = f.direction(y, 0);
    Ok(values2(&f.riemann_spray(&yj)))
}

/// Spray of alpha from its defining formula in alpha^2.
pub fn riemann_spray_direct(def: &MetricDef, x: [f64; 2], y: [f64; 2]) -> Result<[f64; 2]> {
    let f = FieldJets::eval(def, x, 2)?;
    let yj = f.direction(y, 2);
    Ok(values2(&f.riemann_spray_direct(&yj)))
}

/// Covariant derivative of beta and the derived contractions at (x, y).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CovariantData {
    pub nabla_b: [[f64; 2]; 2],
    pub r: [[f64; 2]; 2],
    pub s: [[f64; 2]; 2],
    pub r_vec: [f64; 2],
    pub s_vec: [f64; 2],
    pub s_up: [f64; 2],
    pub r00: f64,
    pub s0: f64,
    pub s0_up: [f64; 2],
}

impl CovariantData {
    /// Residual of s_ij = (b_i s_j - b_j s_i) / b^2, relative to max(1, |s_12|).
    pub fn two_dim_identity_residual(&self, b: [f64; 2], b2: f64) -> f64 {
        let rhs = (b[0] * self.s_vec[1] - b[1] * self.s_vec[0]) / b2;
        (self.s[0][1] - rhs).abs() / self.s[0][1].abs().max(1.0)
    }
}

pub fn covariant_data(def: &MetricDef, x: [f64; 2], y: [f64; 2]) -> Result<CovariantData> {
    let f = FieldJets::eval(def, x, 1)?;
    let nabla_b = values22(&f.nabla_b);
    let (r, s) = f.r_s();
    let (r, s) = (values22(&r), values22(&s));
    let b_up = values2(&f.b_up);
    let a_inv = values22(&f.a_inv);
    let r_vec = map2(|j| b_up[0] * r[0][j] + b_up[1] * r[1][j]);
    let s_vec = map2(|j| b_up[0] * s[0][j] + b_up[1] * s[1][j]);
    let s_up = map2(|i| a_inv[i][0] * s_vec[0] + a_inv[i][1] * s_vec[1]);
    let mut r00 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            r00 += r[i][j] * y[i] * y[j];
        }
    }
    let s0 = s_vec[0] * y[0] + s_vec[1] * y[1];
    let s_low0 = map2(|k| s[k][0] * y[0] + s[k][1] * y[1]);
    let s0_up = map2(|i| a_inv[i][0] * s_low0[0] + a_inv[i][1] * s_low0[1]);
    Ok(CovariantData {
        nabla_b,
        r,
        s,
        r_vec,
        s_vec,
        s_up,
        r00,
        s0,
        s0_up,
    })
}

/// Gauss curvature of alpha at x.
pub fn gauss_curvature(def: &MetricDef, x: [f64; 2]) -> Result<f64> {
    let f = FieldJets::eval(def, x, 2)?;
    let g = &f.gamma;
    let dg = map222(|i, j, k| [g[i][j][k].diff(xv(0)).value(), g[i][j][k].diff(xv(1)).value()]);
    let gv = map222(|i, j, k| g[i][j][k].value());
    // R(d_1, d_2) d_2 = R^l d_l
    let rl = map2(|l| {
        let mut v = dg[l][1][1][0] - dg[l][0][1][1];
        for m in 0..2 {
            v += gv[m][1][1] * gv[l][0][m] - gv[m][0][1] * gv[l][1][m];
        }
        v
    });
    let a = values22(&f.a);
    let num = a[0][0] * rl[0] + a[0][1] * rl[1];
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    Ok(num / det)
}
