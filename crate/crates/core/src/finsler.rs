//! F = alpha phi(beta / alpha): the function itself, its spray assembled from
//! the Riemannian data and phi, an independent spray from the fundamental
//! tensor, the Hamel residual and the projective factor.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exprlang::MetricDef;
use crate::geometry::{map2, map22, values2, values22, xv, yv, FieldJets, J2, J22};
use crate::jets::Jet;
use crate::phi::PhiSpec;

/// phi composed with the jet `s`.
pub fn phi_of(spec: &PhiSpec, s: &Jet) -> Result<Jet> {
    let series = spec.series(s.value(), s.order())?;
    Ok(s.compose(series.coeffs()))
}

/// alpha, beta and s = beta / alpha as jets.
pub struct AlphaBeta {
    pub alpha: Jet,
    pub beta: Jet,
    pub s: Jet,
}

pub fn alpha_beta(fields: &FieldJets, y: &J2) -> Result<AlphaBeta> {
    let a2 = fields.alpha2(y);
    if !(a2.value() > 0.0) {
        return Err(Error::ZeroDirection {
            x: fields.x,
            y: values2(y),
        });
    }
    let alpha = a2.sqrt()?;
    let beta = fields.beta(y);
    let s = beta.try_div(&alpha)?;
    Ok(AlphaBeta { alpha, beta, s })
}

/// F as a jet of `order` at (x, y).
pub fn finsler_function(def: &MetricDef, x: [f64; 2], y: [f64; 2], order: usize) -> Result<Jet> {
    let fields = FieldJets::eval(def, x, order.max(1))?;
    finsler_function_with(&fields, &def.phi, y, order)
}

pub fn finsler_function_with(fields: &FieldJets, phi: &PhiSpec, y: [f64; 2], order: usize) -> Result<Jet> {
    let yj = fields.direction(y, order);
    let ab = alpha_beta(fields, &yj)?;
    let s = ab.s.truncate(order);
    Ok(&ab.alpha * &phi_of(phi, &s)?)
}

/// The spray G^i of F as jets, together with the pieces it was assembled from.
#[derive(Debug, Clone)]
pub struct SprayJets {
    pub order: usize,
    pub fields: FieldJets,
    pub y: J2,
    pub g: J2,
    pub g_alpha: J2,
    pub f: Jet,
}

impl SprayJets {
    /// N^i_j = dG^i/dy^j.
    pub fn n(&self) -> J22 {
        map22(|i, j| self.g[i].diff(yv(j)))
    }

    /// G^i_jk = d^2 G^i / dy^j dy^k.
    pub fn connection(&self) -> [J22; 2] {
        map2(|i| map22(|j, k| self.g[i].diff(yv(j)).diff(yv(k))))
    }
}

/// Spray from the alpha spray, covariant data and phi, to jet order `order`.
pub fn spray_jets(def: &MetricDef, x: [f64; 2], y: [f64; 2], order: usize) -> Result<SprayJets> {
    let fields = FieldJets::eval(def, x, order + 1)?;
    spray_jets_with(fields, &def.phi, y, order)
}

pub fn spray_jets_with(fields: FieldJets, phi: &PhiSpec, y: [f64; 2], order: usize) -> Result<SprayJets> {
    let yj = fields.direction(y, order);
    let ab = alpha_beta(&fields, &yj)?;
    let s = ab.s.truncate(order);
    let (q_series, qp_series) = phi.q_series(s.value(), order)?;
    let q = s.compose(q_series.coeffs());
    let qp = s.compose(qp_series.coeffs());
    let b2 = fields.b2.truncate(order);
    let delta = (&s * &q + (&b2 - &s * &s) * &qp).add_scalar(1.0);
    if delta.value().abs() < 1e-12 {
        return Err(Error::VanishingDelta { s: s.value() });
    }
    let half_inv_delta = delta.recip()?.scale(0.5);
    let theta = (&q - &s * &qp) * &half_inv_delta;
    let psi = &qp * &half_inv_delta;

    let (r, sk) = fields.r_s();
    let b_up = &fields.b_up;
    let a_inv = &fields.a_inv;
    // s_k = b^i s_ik, s^i_0 = a^ik s_kj y^j
    let s_low = map2(|k| &b_up[0] * &sk[0][k] + &b_up[1] * &sk[1][k]);
    let s0 = &s_low[0] * &yj[0] + &s_low[1] * &yj[1];
    let s_k0 = map2(|k| &sk[k][0] * &yj[0] + &sk[k][1] * &yj[1]);
    let s_up0 = map2(|i| &a_inv[i][0] * &s_k0[0] + &a_inv[i][1] * &s_k0[1]);
    let mut r00 = &r[0][0] * &yj[0] * &yj[0];
    r00 = r00 + (&r[0][1] * &yj[0] * &yj[1]).scale(2.0);
    r00 = r00 + &r[1][1] * &yj[1] * &yj[1];

    let alpha = ab.alpha.truncate(order);
    let g_alpha = fields.riemann_spray(&yj);
    let bracket = &r00 - (&alpha * &q * &s0).scale(2.0);
    let along_y = &alpha.recip()? * &theta * &bracket;
    let along_b = &psi * &bracket;
    let aq = &alpha * &q;
    let g = map2(|i| &g_alpha[i] + &aq * &s_up0[i] + &along_y * &yj[i] + &along_b * &b_up[i]);
    let f = &alpha * &phi_of(phi, &s)?;
    Ok(SprayJets {
        order,
        fields,
        y: yj,
        g,
        g_alpha,
        f,
    })
}

/// Spray from G^i = 1/4 g^il {[F^2]_{x^k y^l} y^k - [F^2]_{x^l}} with
/// g_ij = 1/2 [F^2]_{y^i y^j}, to jet order `order`.
pub fn direct_spray_jets(def: &MetricDef, x: [f64; 2], y: [f64; 2], order: usize) -> Result<J2> {
    let fields = FieldJets::eval(def, x, order + 2)?;
    let yj = fields.direction(y, order + 2);
    let f = finsler_function_with(&fields, &def.phi, y, order + 2)?;
    let f2 = &f * &f;
    let fy = map2(|l| f2.diff(yv(l)));
    let g = map22(|i, j| fy[i].diff(yv(j)).scale(0.5));
    let det = &g[0][0] * &g[1][1] - &g[0][1] * &g[1][0];
    let scale = g[0][0].value().abs() + g[1][1].value().abs() + g[0][1].value().abs();
    if det.value().abs() <= 1e-12 * scale * scale {
        return Err(Error::SingularFundamentalTensor { det: det.value() });
    }
    let inv_det = det.recip()?;
    let g_inv = [
        [&g[1][1] * &inv_det, -(&g[0][1] * &inv_det)],
        [-(&g[1][0] * &inv_det), &g[0][0] * &inv_det],
    ];
    let y_low = map2(|k| yj[k].truncate(order));
    let bracket = map2(|l| {
        let mixed = &fy[l].diff(xv(0)) * &y_low[0] + &fy[l].diff(xv(1)) * &y_low[1];
        mixed - f2.diff(xv(l)).truncate(order)
    });
    Ok(map2(|i| (&g_inv[i][0] * &bracket[0] + &g_inv[i][1] * &bracket[1]).scale(0.25)))
}

pub fn direct_spray_oracle(def: &MetricDef, x: [f64; 2], y: [f64; 2]) -> Result<[f64; 2]> {
    Ok(values2(&direct_spray_jets(def, x, y, 0)?))
}

/// Spray values and first derivatives at (x, y).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SprayEval {
    pub x: [f64; 2],
    pub y: [f64; 2],
    #[serde(rename = "F")]
    pub f: f64,
    #[serde(rename = "G")]
    pub g: [f64; 2],
    #[serde(rename = "G_alpha")]
    pub g_alpha: [f64; 2],
    /// n[i][j] = dG^i/dy^j.
    #[serde(rename = "N")]
    pub n: [[f64; 2]; 2],
    /// conn[i][j][k] = d^2 G^i / dy^j dy^k.
    #[serde(rename = "G_conn")]
    pub conn: [[[f64; 2]; 2]; 2],
    /// gx[i][k] = dG^i/dx^k.
    #[serde(rename = "Gx")]
    pub gx: [[f64; 2]; 2],
}

impl SprayEval {
    /// |N^i_j y^j - 2 G^i| relative to |G|.
    pub fn euler_residual(&self) -> f64 {
        let mut num = 0.0f64;
        for i in 0..2 {
            let v = self.n[i][0] * self.y[0] + self.n[i][1] * self.y[1] - 2.0 * self.g[i];
            num = num.max(v.abs());
        }
        num / self.g[0].abs().max(self.g[1].abs()).max(f64::MIN_POSITIVE)
    }
}

pub fn finsler_spray(def: &MetricDef, x: [f64; 2], y: [f64; 2]) -> Result<SprayEval> {
    let sj = spray_jets(def, x, y, 2)?;
    let conn = sj.connection();
    Ok(SprayEval {
        x,
        y,
        f: sj.f.value(),
        g: values2(&sj.g),
        g_alpha: values2(&sj.g_alpha),
        n: values22(&sj.n()),
        conn: map2(|i| values22(&conn[i])),
        gx: map22(|i, k| sj.g[i].diff(xv(k)).value()),
    })
}

/// F_{x^m y^l} y^m - F_{x^l}.
pub fn hamel_residual(def: &MetricDef, x: [f64; 2], y: [f64; 2]) -> Result<[f64; 2]> {
    let f = finsler_function(def, x, y, 2)?;
    Ok(map2(|l| {
        let fyl = f.diff(yv(l));
        fyl.diff(xv(0)).value() * y[0] + fyl.diff(xv(1)).value() * y[1] - f.diff(xv(l)).value()
    }))
}

/// P = F_{x^m} y^m / (2F), with the Hamel precondition reported rather than enforced.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectiveFactor {
    #[serde(rename = "P")]
    pub p: f64,
    pub hamel_holds: bool,
    pub hamel_residual: f64,
    /// |G - P y| / |G|.
    pub spray_misfit: f64,
}

pub fn projective_factor(def: &MetricDef, x: [f64; 2], y: [f64; 2]) -> Result<ProjectiveFactor> {
    let f = finsler_function(def, x, y, 2)?;
    if f.value() == 0.0 {
        return Err(Error::ZeroMetric);
    }
    let fx = [f.diff(xv(0)).value(), f.diff(xv(1)).value()];
    let p = (fx[0] * y[0] + fx[1] * y[1]) / (2.0 * f.value());
    let h = hamel_residual(def, x, y)?;
    let hn = h[0].hypot(h[1]);
    let scale = fx[0].hypot(fx[1]).max(f.value().abs()).max(1.0);
    let g = finsler_spray(def, x, y)?.g;
    let gn = g[0].hypot(g[1]);
    let misfit = (g[0] - p * y[0]).hypot(g[1] - p * y[1]);
    Ok(ProjectiveFactor {
        p,
        hamel_holds: hn <= 1e-8 * scale,
        hamel_residual: hn,
        spray_misfit: if gn > 0.0 { misfit / gn } else { misfit },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprlang::parse_expr;

    fn def(a: [&str; 3], b: [&str; 2], phi: PhiSpec) -> MetricDef {
        let p = |s: &str| parse_expr(s, 2).unwrap();
        MetricDef::new([[p(a[0]), p(a[1])], [p(a[1]), p(a[2])]], [p(b[0]), p(b[1])], phi).unwrap()
    }

    fn close(a: [f64; 2], b: [f64; 2], rel: f64) -> bool {
        let scale = a[0].abs().max(a[1].abs()).max(1e-300);
        (0..2).all(|i| (a[i] - b[i]).abs() <= rel * scale)
    }

    #[test]
    fn parallel_form_on_flat_alpha_has_zero_spray() {
        let d = def(["1", "0", "1"], ["0.6", "0.2"], PhiSpec::Thm41Iv { m: 2.0, k: 0.3 });
        let e = finsler_spray(&d, [0.7, 1.1], [0.8, 0.3]).unwrap();
        assert_eq!(e.g, [0.0, 0.0]);
    }

    #[test]
    fn kropina_spray_matches_fundamental_tensor_path() {
        let d = def(["1", "0", "1"], ["x2", "-x1"], PhiSpec::MKropina { c: 0.0, m: -1.0 });
        for (x, y) in [([0.7, 1.2], [0.9, -0.4]), ([1.3, 0.6], [-0.2, 1.0])] {
            let a = finsler_spray(&d, x, y).unwrap().g;
            let b = direct_spray_oracle(&d, x, y).unwrap();
            assert!(close(a, b, 1e-8), "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn riemannian_control_matches_alpha_spray() {
        let d = def(
            ["2+x1*x2", "0.1*x1", "1+x2^2"],
            ["x1", "x2"],
            PhiSpec::Custom(crate::exprlang::parse_phi_expr("1").unwrap()),
        );
        let (x, y) = ([0.9, 1.1], [0.4, 0.7]);
        let a = direct_spray_oracle(&d, x, y).unwrap();
        let b = crate::geometry::riemann_spray(&d, x, y).unwrap();
        assert!(close(a, b, 1e-10));
        let c = finsler_spray(&d, x, y).unwrap().g;
        assert!(close(a, c, 1e-10));
    }

    #[test]
    fn degenerate_fundamental_tensor() {
        // phi = s^2: phi - s phi' + (b^2 - s^2) phi'' = 2 b^2 - 3 s^2 vanishes at s^2 = 2 b^2 / 3
        let d = def(["1", "0", "1"], ["1", "0"], PhiSpec::Thm41Iv { m: 2.0, k: 0.0 });
        let s = (2.0f64 / 3.0).sqrt();
        let y = [s, (1.0 - s * s).sqrt()];
        assert!(matches!(
            direct_spray_oracle(&d, [1.0, 1.0], y),
            Err(Error::SingularFundamentalTensor { .. })
        ));
    }

    #[test]
    fn spray_is_two_homogeneous() {
        let d = def(["1+x1^2", "0.2", "2"], ["x2", "x1*x2"], PhiSpec::Thm41Iii { k1: 0.3, k2: -0.2, m: 2.0 });
        let (x, y) = ([0.8, 1.2], [0.5, 0.3]);
        let e = finsler_spray(&d, x, y).unwrap();
        assert!(e.euler_residual() < 1e-9);
        let e2 = finsler_spray(&d, x, [2.0 * y[0], 2.0 * y[1]]).unwrap();
        assert!(close(e2.g, [4.0 * e.g[0], 4.0 * e.g[1]], 1e-9));
    }

    #[test]
    fn hamel_on_normal_form_chart() {
        // F = c eta(x1) y1 + y1^m |y|^(1-m): alpha = eta^(m/(m-1)) |y|, beta = eta y1
        let m = -2.0f64;
        let e = m / (m - 1.0);
        let eta = "(1+x1^2)";
        let a = format!("{eta}^2*exp({}*log({eta}))", 2.0 * e - 2.0);
        let d = def([&a, "0", &a], [eta, "0"], PhiSpec::MKropina { c: 0.7, m });
        let (x, y) = ([0.9, 1.3], [0.8, 0.35]);
        let h = hamel_residual(&d, x, y).unwrap();
        assert!(h[0].abs() < 1e-9 && h[1].abs() < 1e-9, "{h:?}");
        let pf = projective_factor(&d, x, y).unwrap();
        assert!(pf.hamel_holds);
        assert!(pf.spray_misfit < 1e-8);
        let f = finsler_function(&d, x, y, 0).unwrap().value();
        let want = 0.7 * 2.0 * x[0] / (2.0 * f) * y[0] * y[0];
        assert!((pf.p - want).abs() < 1e-9 * want.abs());
    }
}
