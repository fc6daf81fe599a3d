//! Symbolic deformations of (alpha, beta) and explicit constructions from a
//! harmonic pair. Every result is a new `MetricDef` built from expression
//! trees, so it runs through the full engine including high derivatives.

use serde::Serialize;

use crate::criteria::{lstsq, rij_condition_check, RijCase};
use crate::error::{Error, Result};
use crate::exprlang::{Expr, MetricDef};
use crate::geometry::{check_positive_definite, covariant_data, metric_at};
use crate::jets::eval_jet;
use crate::phi::PhiSpec;

pub const CR_TOLERANCE: f64 = 1e-9;

fn k(v: f64) -> Expr {
    Expr::Const(v)
}

fn x(i: usize) -> Expr {
    Expr::Var(i)
}

/// b^2 = a^ij b_i b_j through the 2x2 adjugate.
pub fn b2_expr(def: &MetricDef) -> Expr {
    let (a11, a12, a22) = (def.a[0][0].clone(), def.a[0][1].clone(), def.a[1][1].clone());
    let (b1, b2) = (def.b[0].clone(), def.b[1].clone());
    let num = a22.clone() * b1.clone().powi(2) - k(2.0) * a12.clone() * b1 * b2.clone() + a11.clone() * b2.powi(2);
    num / (a11 * a22 - a12.powi(2))
}

/// A deformed or constructed metric with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeformedMetric {
    #[serde(serialize_with = "ser_def")]
    pub def: MetricDef,
    pub kind: String,
    pub params: Vec<(String, f64)>,
    /// For constructions with a harmonic pair and eta: whether eta_1 v = eta_2 u
    /// held at every validation point.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closed_beta_condition: Option<bool>,
}

fn ser_def<S: serde::Serializer>(d: &MetricDef, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&d.to_toml())
}

fn provenance(def: MetricDef, kind: &str, params: &[(&str, f64)]) -> DeformedMetric {
    DeformedMetric {
        def,
        kind: kind.to_string(),
        params: params.iter().map(|(n, v)| (n.to_string(), *v)).collect(),
        closed_beta_condition: None,
    }
}

fn validate_at(def: &MetricDef, points: &[[f64; 2]]) -> Result<()> {
    for p in points {
        let m = metric_at(def, *p)?;
        if !(m.b2 > 0.0) {
            return Err(Error::ZeroCovector(*p));
        }
    }
    Ok(())
}

fn scaled_a(def: &MetricDef, f: &Expr, g: Option<(&Expr, &[Expr; 2])>) -> [[Expr; 2]; 2] {
    let entry = |i: usize, j: usize| {
        let base = f.clone() * def.a[i][j].clone();
        match g {
            Some((h, b)) => base + h.clone() * b[i].clone() * b[j].clone(),
            None => base,
        }
    };
    let off = entry(0, 1);
    [[entry(0, 0), off.clone()], [off, entry(1, 1)]]
}

/// alpha~ = b^m alpha, beta~ = b^(m-1) beta, so that beta~ has unit alpha~-norm.
pub fn kropina_deform(def: &MetricDef, m: f64, points: &[[f64; 2]]) -> Result<DeformedMetric> {
    validate_at(def, points)?;
    let b2 = b2_expr(def);
    let fa = b2.clone().real_pow(m);
    let fb = b2.real_pow(0.5 * (m - 1.0));
    let a = scaled_a(def, &fa, None);
    let b = [fb.clone() * def.b[0].clone(), fb * def.b[1].clone()];
    let out = MetricDef::new(a, b, def.phi.clone())?;
    for p in points {
        check_positive_definite(metric_at(&out, *p)?.a, *p)?;
    }
    Ok(provenance(out, "kropina", &[("m", m)]))
}

/// xi = 1 / (b^2 (4 + 3 c b^4)) and eta = 3 (5 + 8 c b^4 + 3 c^2 b^8) / (b^4 (4 + 3 c b^4)) at x.
pub fn m3_coefficients(b2: f64, c: f64) -> (f64, f64) {
    let b4 = b2 * b2;
    let q = 4.0 + 3.0 * c * b4;
    (1.0 / (b2 * q), 3.0 * (5.0 + 8.0 * c * b4 + 3.0 * c * c * b4 * b4) / (b4 * q))
}

/// alpha~^2 = xi alpha^2 + eta beta^2 with beta unchanged.
pub fn m3_deform(def: &MetricDef, c: f64, points: &[[f64; 2]]) -> Result<DeformedMetric> {
    validate_at(def, points)?;
    for p in points {
        let b2 = metric_at(def, *p)?.b2;
        if 4.0 + 3.0 * c * b2 * b2 <= 0.0 {
            return Err(Error::Precondition {
                what: "4 + 3 c b^4 > 0".into(),
                x: *p,
            });
        }
    }
    let b2 = b2_expr(def);
    let b4 = b2.clone().powi(2);
    let q = k(4.0) + k(3.0 * c) * b4.clone();
    let xi = k(1.0) / (b2 * q.clone());
    let eta = k(3.0) * (k(5.0) + k(8.0 * c) * b4.clone() + k(3.0 * c * c) * b4.clone().powi(2)) / (b4 * q);
    let b = [def.b[0].clone(), def.b[1].clone()];
    let a = scaled_a(def, &xi, Some((&eta, &b)));
    let out = MetricDef::new(a, b, def.phi.clone())?;
    for p in points {
        metric_at(&out, *p)?;
    }
    Ok(provenance(out, "m3", &[("c", c)]))
}

/// Checks of the m = -3 deformation at x.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct M3Checks {
    /// |beta|^2 in alpha~ against b^4 / (4 + 3 c b^4), relative.
    pub norm_residual: f64,
    /// Closed-form inverse of a~ against numeric inversion, relative.
    pub inverse_residual: f64,
    /// r~_ij against its best multiple of a~_ij, relative.
    pub conformal_residual: f64,
    /// The fitted multiple lambda in r~_ij = lambda a~_ij.
    pub conformal_factor: f64,
    /// -16 tau b^4 / (4 + 3 c b^4)^2 with tau from the original metric.
    pub predicted_factor: Option<f64>,
}

pub fn m3_checks(original: &MetricDef, deformed: &MetricDef, c: f64, x: [f64; 2]) -> Result<M3Checks> {
    let m0 = metric_at(original, x)?;
    let m1 = metric_at(deformed, x)?;
    let b2 = m0.b2;
    let b4 = b2 * b2;
    let want = b4 / (4.0 + 3.0 * c * b4);
    let norm_residual = (m1.b2 - want).abs() / want.abs();

    let (xi, eta) = m3_coefficients(b2, c);
    let mut inv_err = 0.0f64;
    let mut inv_scale = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            let formula = (m0.a_inv[i][j] - eta * m0.b_up[i] * m0.b_up[j] / (xi + eta * b2)) / xi;
            inv_err = inv_err.max((formula - m1.a_inv[i][j]).abs());
            inv_scale = inv_scale.max(m1.a_inv[i][j].abs());
        }
    }

    let r = covariant_data(deformed, x, [0.0, 0.0])?.r;
    let a = m1.a;
    let rows: Vec<Vec<f64>> = vec![vec![a[0][0]], vec![a[0][1]], vec![a[1][1]]];
    let rhs = [r[0][0], r[0][1], r[1][1]];
    let (lam, misfit) = lstsq(&rows, &rhs)?;
    let rn = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mn = misfit.iter().map(|v| v * v).sum::<f64>().sqrt();
    let predicted_factor = rij_condition_check(RijCase::Cor61Ii, original, x)
        .ok()
        .map(|rep| -16.0 * rep.tau * b4 / (4.0 + 3.0 * c * b4).powi(2));
    Ok(M3Checks {
        norm_residual,
        inverse_residual: inv_err / inv_scale,
        conformal_residual: if rn > 1e-12 { mn / rn } else { mn },
        conformal_factor: lam[0],
        predicted_factor,
    })
}

/// alpha-bar^2 = alpha^2 + k beta^2 with beta unchanged.
pub fn bar_alpha(def: &MetricDef, kk: f64, points: &[[f64; 2]]) -> Result<DeformedMetric> {
    let b = [def.b[0].clone(), def.b[1].clone()];
    let a = scaled_a(def, &k(1.0), Some((&k(kk), &b)));
    let out = MetricDef::new(a, b, def.phi.clone())?;
    for p in points {
        metric_at(&out, *p)?;
    }
    Ok(provenance(out, "bar_alpha", &[("k", kk)]))
}

/// Real and imaginary parts of a function meant to be complex analytic.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicPair {
    pub u: Expr,
    pub v: Expr,
}

impl HarmonicPair {
    pub fn new(u: Expr, v: Expr) -> HarmonicPair {
        HarmonicPair { u, v }
    }

    /// Largest Cauchy-Riemann residual over the points, scaled by max(1, |grad|).
    pub fn cr_residual(&self, points: &[[f64; 2]]) -> Result<(f64, [f64; 2])> {
        let mut worst = (0.0, [f64::NAN; 2]);
        for p in points {
            let u = eval_jet(&self.u, p, 1)?;
            let v = eval_jet(&self.v, p, 1)?;
            let d = |j: &crate::jets::Jet, i: u8| j.partial(&[(i == 0) as u8, (i == 1) as u8, 0, 0]).unwrap_or(0.0);
            let (u1, u2, v1, v2) = (d(&u, 0), d(&u, 1), d(&v, 0), d(&v, 1));
            let scale = 1f64.max(u1.abs()).max(u2.abs()).max(v1.abs()).max(v2.abs());
            let r = (u1 - v2).abs().max((u2 + v1).abs()) / scale;
            if r > worst.0 || worst.1[0].is_nan() {
                worst = (r, *p);
            }
        }
        Ok(worst)
    }

    pub fn validate(&self, points: &[[f64; 2]]) -> Result<()> {
        let (residual, x) = self.cr_residual(points)?;
        if residual > CR_TOLERANCE {
            return Err(Error::CauchyRiemann { residual, x });
        }
        Ok(())
    }

    fn norm2(&self) -> Expr {
        self.u.clone().powi(2) + self.v.clone().powi(2)
    }
}

/// alpha^2 = B^3 / (u^2 + v^2) |y|^2 - 3 (5 + 3 c B^2)(1 + c B^2) / B beta^2 and
/// beta = B^2 / ((4 + 3 c B^2)(u^2 + v^2)) (u y^1 + v y^2), with phi = c s + s^-3.
pub fn construct_thm12_ii(bb: &Expr, pair: &HarmonicPair, c: f64, points: &[[f64; 2]]) -> Result<DeformedMetric> {
    pair.validate(points)?;
    let n = pair.norm2();
    let b2 = bb.clone().powi(2);
    let coef = bb.clone().powi(2) / ((k(4.0) + k(3.0 * c) * b2.clone()) * n.clone());
    let b = [coef.clone() * pair.u.clone(), coef * pair.v.clone()];
    let conf = bb.clone().powi(3) / n;
    let lam = k(3.0) * (k(5.0) + k(3.0 * c) * b2.clone()) * (k(1.0) + k(c) * b2) / bb.clone();
    let off = k(0.0) - lam.clone() * b[0].clone() * b[1].clone();
    let a = [
        [conf.clone() - lam.clone() * b[0].clone().powi(2), off.clone()],
        [off, conf - lam * b[1].clone().powi(2)],
    ];
    let out = MetricDef::new(a, b, PhiSpec::MKropina { c, m: -3.0 })?;
    for p in points {
        metric_at(&out, *p)?;
    }
    Ok(provenance(out, "thm12_ii", &[("c", c)]))
}

/// alpha = eta^(m/(m-1)) |y| / sqrt(u^2 + v^2), beta = eta (u y^1 + v y^2) / (u^2 + v^2),
/// with phi = c s + s^m.
pub fn construct_rem61(pair: &HarmonicPair, eta: &Expr, m: f64, c: f64, points: &[[f64; 2]]) -> Result<DeformedMetric> {
    pair.validate(points)?;
    let n = pair.norm2();
    let conf = eta.clone().real_pow(2.0 * m / (m - 1.0)) / n.clone();
    let a = [[conf.clone(), k(0.0)], [k(0.0), conf]];
    let b = [eta.clone() * pair.u.clone() / n.clone(), eta.clone() * pair.v.clone() / n];
    let out = MetricDef::new(a, b, PhiSpec::MKropina { c, m })?;
    let mut closed = true;
    for p in points {
        metric_at(&out, *p)?;
        let e = eval_jet(eta, p, 1)?;
        let e1 = e.partial(&[1, 0, 0, 0])?;
        let e2 = e.partial(&[0, 1, 0, 0])?;
        let u = pair.u.eval(p)?;
        let v = pair.v.eval(p)?;
        let scale = 1f64.max((e1 * v).abs()).max((e2 * u).abs());
        closed &= (e1 * v - e2 * u).abs() <= CR_TOLERANCE * scale;
    }
    let mut d = provenance(out, "rem61", &[("m", m), ("c", c)]);
    d.closed_beta_condition = Some(closed);
    Ok(d)
}

/// The metric in coordinates x = A x': a'(x') = A^T a(A x') A, b'(x') = A^T b(A x').
pub fn linear_chart_change(def: &MetricDef, am: [[f64; 2]; 2]) -> Result<MetricDef> {
    let det = am[0][0] * am[1][1] - am[0][1] * am[1][0];
    if det.abs() < 1e-12 {
        return Err(Error::Precondition {
            what: "invertible chart change".into(),
            x: [f64::NAN; 2],
        });
    }
    let sub = [
        k(am[0][0]) * x(1) + k(am[0][1]) * x(2),
        k(am[1][0]) * x(1) + k(am[1][1]) * x(2),
    ];
    let at: Vec<Vec<Expr>> = def.a.iter().map(|r| r.iter().map(|e| e.substitute(&sub)).collect()).collect();
    let bt: Vec<Expr> = def.b.iter().map(|e| e.substitute(&sub)).collect();
    let a = std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let mut e = k(0.0);
            for p in 0..2 {
                for q in 0..2 {
                    e = e + k(am[p][i] * am[q][j]) * at[p][q].clone();
                }
            }
            e
        })
    });
    let mut a: [[Expr; 2]; 2] = a;
    a[1][0] = a[0][1].clone();
    let b = std::array::from_fn(|i| k(am[0][i]) * bt[0].clone() + k(am[1][i]) * bt[1].clone());
    MetricDef::new(a, b, def.phi.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprlang::parse_expr;
    use crate::finsler::finsler_function;
    use crate::sampling::{random_metric, rng, Region};

    fn p(s: &str) -> Expr {
        parse_expr(s, 2).unwrap()
    }

    #[test]
    fn kropina_deform_of_constant_data() {
        let d = MetricDef::new([[p("1"), p("0")], [p("0"), p("1")]], [p("2"), p("0")], PhiSpec::MKropina { c: 0.0, m: 3.0 })
            .unwrap();
        let out = kropina_deform(&d, 3.0, &[[1.0, 1.0]]).unwrap().def;
        let m = metric_at(&out, [1.0, 1.0]).unwrap();
        assert!((m.a[0][0] - 64.0).abs() < 1e-12 && (m.b[0] - 8.0).abs() < 1e-12);
        assert!((m.b2 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn kropina_deform_keeps_f() {
        let phi = PhiSpec::MKropina { c: 0.0, m: -2.0 };
        let d = random_metric(&mut rng(51), phi);
        let pts = Region::default().points(5, 1);
        let out = kropina_deform(&d, -2.0, &pts).unwrap().def;
        for x in pts {
            assert!((metric_at(&out, x).unwrap().b2 - 1.0).abs() < 1e-10);
            let y = [0.7, 0.4];
            let f0 = finsler_function(&d, x, y, 0).unwrap().value();
            let f1 = finsler_function(&out, x, y, 0).unwrap().value();
            assert!((f0 - f1).abs() <= 1e-12 * f0.abs());
        }
    }

    #[test]
    fn bar_alpha_identity_and_degenerate() {
        let d = random_metric(&mut rng(52), PhiSpec::KropinaLinear { c: 0.0 });
        let same = bar_alpha(&d, 0.0, &[[1.0, 1.0]]).unwrap().def;
        let x = [0.9, 1.2];
        assert_eq!(metric_at(&same, x).unwrap().a, metric_at(&d, x).unwrap().a);
        let c = MetricDef::new([[p("1"), p("0")], [p("0"), p("1")]], [p("0.5"), p("0")], PhiSpec::KropinaLinear { c: 0.0 })
            .unwrap();
        assert!(matches!(bar_alpha(&c, -4.0, &[[1.0, 1.0]]), Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn cauchy_riemann_violation() {
        let pair = HarmonicPair::new(p("x1"), p("x1"));
        let r = construct_thm12_ii(&p("x1"), &pair, 1.0, &[[1.0, 1.0]]);
        assert!(matches!(r, Err(Error::CauchyRiemann { .. })));
    }

    #[test]
    fn normal_form_constants() {
        let d = construct_rem61(&HarmonicPair::new(p("1"), p("0")), &p("1"), 2.0, 0.0, &[[1.0, 1.0]]).unwrap();
        let m = metric_at(&d.def, [0.8, 1.3]).unwrap();
        assert_eq!(m.a, [[1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(m.b, [1.0, 0.0]);
        assert_eq!(d.closed_beta_condition, Some(true));
    }

    #[test]
    fn chart_change_preserves_f() {
        let d = random_metric(&mut rng(53), PhiSpec::MKropina { c: 0.3, m: -2.0 });
        let am = [[1.1, 0.3], [-0.2, 0.9]];
        let e = linear_chart_change(&d, am).unwrap();
        let xp = [0.8, 0.9];
        let yp = [0.5, 0.6];
        let x = [am[0][0] * xp[0] + am[0][1] * xp[1], am[1][0] * xp[0] + am[1][1] * xp[1]];
        let y = [am[0][0] * yp[0] + am[0][1] * yp[1], am[1][0] * yp[0] + am[1][1] * yp[1]];
        let f0 = finsler_function(&d, x, y, 0).unwrap().value();
        let f1 = finsler_function(&e, xp, yp, 0).unwrap().value();
        assert!((f0 - f1).abs() < 1e-13 * f0);
    }
}
