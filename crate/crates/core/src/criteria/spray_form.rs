//! Closed forms of the alpha spray for projectively flat metrics in each case,
//! with the 1-form rho fitted over sampled directions.

use serde::Serialize;

use super::douglas::{lstsq, rms};
use super::rij::{rij_condition_check_with, CaseConstants, RijCase};
use crate::error::{Error, Result};
use crate::exprlang::MetricDef;
use crate::geometry::{christoffel, covariant_data, metric_at, CovariantData, MetricAt};
use crate::phi::PhiSpec;

pub const SPRAY_FORM_THRESHOLD: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SprayFormCase {
    /// Kropina with a linear term.
    W001,
    /// Theorem 4.1(ii) family.
    Cw002,
    /// Theorem 4.1(iii) family.
    W1,
    /// Theorem 4.1(iv) family.
    W3,
    /// Integral family.
    W4,
    /// Kropina, for c = 0.
    Cor71Kropina,
    /// m = -3 Kropina-type family.
    Cor71M3,
}

impl SprayFormCase {
    pub const ALL: [SprayFormCase; 7] = [
        SprayFormCase::W001,
        SprayFormCase::Cw002,
        SprayFormCase::W1,
        SprayFormCase::W3,
        SprayFormCase::W4,
        SprayFormCase::Cor71Kropina,
        SprayFormCase::Cor71M3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SprayFormCase::W001 => "w001",
            SprayFormCase::Cw002 => "cw002",
            SprayFormCase::W1 => "w1",
            SprayFormCase::W3 => "w3",
            SprayFormCase::W4 => "w4",
            SprayFormCase::Cor71Kropina => "cor71_kropina",
            SprayFormCase::Cor71M3 => "cor71_m3",
        }
    }

    pub fn from_name(name: &str) -> Option<SprayFormCase> {
        SprayFormCase::ALL.into_iter().find(|c| c.name() == name)
    }

    /// The r_ij case whose tau enters the form.
    pub fn tau_case(self) -> Option<RijCase> {
        match self {
            SprayFormCase::Cw002 => Some(RijCase::Thm41Ii),
            SprayFormCase::W1 => Some(RijCase::Thm41Iii),
            SprayFormCase::W3 => Some(RijCase::Thm41Iv),
            SprayFormCase::Cor71M3 => Some(RijCase::Cor61Ii),
            _ => None,
        }
    }
}

/// Constants of a spray-form case carried by `phi`.
pub fn form_constants(case: SprayFormCase, phi: &PhiSpec) -> Option<CaseConstants> {
    let z = CaseConstants::default();
    match (case, phi) {
        (SprayFormCase::W001, PhiSpec::KropinaLinear { c }) => Some(CaseConstants { c: *c, m: -1.0, ..z }),
        (SprayFormCase::W001 | SprayFormCase::Cor71Kropina, PhiSpec::MKropina { c, m }) if *m == -1.0 => {
            Some(CaseConstants { c: *c, m: -1.0, ..z })
        }
        (SprayFormCase::Cor71Kropina, PhiSpec::KropinaLinear { c }) => Some(CaseConstants { c: *c, m: -1.0, ..z }),
        (SprayFormCase::Cw002, PhiSpec::Thm41Ii { k1, k2 }) => Some(CaseConstants { k1: *k1, k2: *k2, m: -3.0, ..z }),
        (SprayFormCase::W1, PhiSpec::Thm41Iii { k1, k2, m }) => Some(CaseConstants { k1: *k1, k2: *k2, m: *m, ..z }),
        (SprayFormCase::W1, PhiSpec::MKropina { c, m }) => Some(CaseConstants { k1: *c, m: *m, ..z }),
        (SprayFormCase::W1 | SprayFormCase::W3, PhiSpec::Thm41Iv { m, k }) => {
            Some(CaseConstants { k: *k, k2: *k, m: *m, ..z })
        }
        (SprayFormCase::W3, PhiSpec::MKropina { m, c }) => Some(CaseConstants { m: *m, c: *c, ..z }),
        (SprayFormCase::W3, PhiSpec::Thm41IvConstB { m, b }) => Some(CaseConstants { m: *m, k: -1.0 / (b * b), ..z }),
        (SprayFormCase::W4, PhiSpec::Thm41V { m, k, .. }) => Some(CaseConstants { m: *m, k: *k, ..z }),
        (SprayFormCase::Cor71M3, PhiSpec::MKropina { c, m }) if *m == -3.0 => Some(CaseConstants { c: *c, m: -3.0, ..z }),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SprayFormFit {
    pub case: SprayFormCase,
    pub x: [f64; 2],
    /// rho = rho_i y^i.
    pub rho: [f64; 2],
    pub tau: f64,
    pub residual: f64,
    pub samples_used: usize,
    pub holds: bool,
}

/// Pointwise quantities the forms are built from.
pub(crate) struct FormData {
    pub m: MetricAt,
    pub cov: CovariantData,
    pub gamma: [[[f64; 2]; 2]; 2],
}

impl FormData {
    pub fn at(def: &MetricDef, x: [f64; 2]) -> Result<FormData> {
        let m = metric_at(def, x)?;
        if !(m.b2 > 0.0) {
            return Err(Error::ZeroCovector(x));
        }
        Ok(FormData {
            m,
            cov: covariant_data(def, x, [0.0, 0.0])?,
            gamma: christoffel(def, x)?,
        })
    }

    pub fn alpha2(&self, y: [f64; 2]) -> f64 {
        let a = self.m.a;
        a[0][0] * y[0] * y[0] + 2.0 * a[0][1] * y[0] * y[1] + a[1][1] * y[1] * y[1]
    }

    pub fn beta(&self, y: [f64; 2]) -> f64 {
        self.m.b[0] * y[0] + self.m.b[1] * y[1]
    }

    pub fn r00(&self, y: [f64; 2]) -> f64 {
        let r = self.cov.r;
        r[0][0] * y[0] * y[0] + 2.0 * r[0][1] * y[0] * y[1] + r[1][1] * y[1] * y[1]
    }

    pub fn s0(&self, y: [f64; 2]) -> f64 {
        self.cov.s_vec[0] * y[0] + self.cov.s_vec[1] * y[1]
    }

    pub fn g_alpha(&self, y: [f64; 2]) -> [f64; 2] {
        let g = &self.gamma;
        std::array::from_fn(|i| {
            0.5 * (g[i][0][0] * y[0] * y[0] + 2.0 * g[i][0][1] * y[0] * y[1] + g[i][1][1] * y[1] * y[1])
        })
    }
}

/// The form's G_alpha minus rho y, as (coefficient of b^i, coefficient of s^i).
fn rest_coefficients(case: SprayFormCase, k: &CaseConstants, tau: f64, fd: &FormData, y: [f64; 2]) -> (f64, f64) {
    let b2 = fd.m.b2;
    let a2 = fd.alpha2(y);
    let be = fd.beta(y);
    let bt2 = be * be;
    let m = k.m;
    match case {
        SprayFormCase::W001 => (-fd.r00(y) / (2.0 * b2), -(a2 - k.c * bt2) / (2.0 * b2)),
        SprayFormCase::Cor71Kropina => (-fd.r00(y) / (2.0 * b2), -a2 / (2.0 * b2)),
        SprayFormCase::Cw002 => {
            let (k1, k2) = (k.k1, k.k2);
            let s = (k1 - k2 * k2) / (8.0 * (1.0 + k2 * b2)) * (3.0 * b2 * a2 - bt2)
                + (k2 / 2.0 - 3.0 / (4.0 * b2)) * a2
                - k2 / b2 * bt2;
            (tau * (3.0 * a2 + k2 * bt2), s)
        }
        SprayFormCase::W1 => (-tau * (m * a2 - k.k2 * bt2), 0.0),
        SprayFormCase::W3 => {
            let kk = k.k;
            (
                -tau * (m * a2 - kk * bt2),
                ((2.0 * kk + m / b2) * a2 - kk / b2 * bt2) / (1.0 - m),
            )
        }
        SprayFormCase::W4 => (0.0, -((m - 2.0) * a2 + k.k * bt2) / ((m - 1.0) * b2)),
        SprayFormCase::Cor71M3 => (
            3.0 * tau * a2,
            k.c / 8.0 * (3.0 * b2 * a2 - bt2) - 3.0 * a2 / (4.0 * b2),
        ),
    }
}

pub(crate) fn fit_tau(case: SprayFormCase, k: &CaseConstants, def: &MetricDef, x: [f64; 2]) -> Result<f64> {
    match case.tau_case() {
        Some(rc) => Ok(rij_condition_check_with(rc, *k, def, x)?.tau),
        None => Ok(0.0),
    }
}

/// Fit rho in G_alpha^i = rho y^i + (form)^i over 24 directions. With `tau`
/// omitted it is taken from the matching r_ij fit.
pub fn spray_form_fit(case: SprayFormCase, def: &MetricDef, x: [f64; 2], tau: Option<f64>) -> Result<SprayFormFit> {
    let k = form_constants(case, &def.phi).ok_or_else(|| Error::CaseMismatch {
        case: case.name().into(),
        why: format!("phi family {} does not carry this form's constants", def.phi.tag()),
    })?;
    let fd = FormData::at(def, x)?;
    let tau = match tau {
        Some(t) => t,
        None => fit_tau(case, &k, def, x)?,
    };
    let n = crate::sampling::DIRECTION_COUNT;
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    let mut ga = Vec::new();
    let mut rest_all = Vec::new();
    for j in 0..n {
        let th = std::f64::consts::TAU * (j as f64 + 0.5) / n as f64;
        let y = [th.cos(), th.sin()];
        let g = fd.g_alpha(y);
        let (cb, cs) = rest_coefficients(case, &k, tau, &fd, y);
        for i in 0..2 {
            let rest = cb * fd.m.b_up[i] + cs * fd.cov.s_up[i];
            rows.push(vec![y[0] * y[i], y[1] * y[i]]);
            rhs.push(g[i] - rest);
            ga.push(g[i]);
            rest_all.push(rest);
        }
    }
    let (rho, misfit) = lstsq(&rows, &rhs)?;
    let den = rms(&ga).max(rms(&rest_all));
    let residual = if den > 0.0 { rms(&misfit) / den } else { rms(&misfit) };
    Ok(SprayFormFit {
        case,
        x,
        rho: [rho[0], rho[1]],
        tau,
        residual,
        samples_used: n,
        holds: residual <= SPRAY_FORM_THRESHOLD,
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

    #[test]
    fn flat_alpha_parallel_beta() {
        let d = def(["1", "0", "1"], ["0.5", "0.2"], PhiSpec::Thm41Iii { k1: 0.1, k2: 0.3, m: 2.0 });
        let f = spray_form_fit(SprayFormCase::W1, &d, [1.0, 1.0], None).unwrap();
        assert!(f.rho[0].abs() < 1e-14 && f.rho[1].abs() < 1e-14);
        assert!(f.residual <= 1e-10);
    }

    #[test]
    fn wrong_family_is_refused() {
        let d = def(["1", "0", "1"], ["0.5", "0.2"], PhiSpec::Thm41V { m: 2.0, k: 0.0, b: 2.0 });
        assert!(spray_form_fit(SprayFormCase::W001, &d, [1.0, 1.0], None).is_err());
    }
}
