//! Closed forms of the projective factor P in G^i = P y^i.

use serde::Serialize;

use super::rij::rij_condition_check_with;
use super::spray_form::{form_constants, spray_form_fit, FormData, SprayFormCase};
use crate::error::{Error, Result};
use crate::exprlang::MetricDef;
use crate::finsler::{finsler_function, projective_factor, ProjectiveFactor};
use crate::geometry::metric_at;
use crate::phi::PhiSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectiveCase {
    W0001,
    Cw0002,
    W01,
    W03,
    W04,
    /// Normal-form chart with b = (eta(x1), 0).
    Ycw107,
}

impl ProjectiveCase {
    pub const ALL: [ProjectiveCase; 6] = [
        ProjectiveCase::W0001,
        ProjectiveCase::Cw0002,
        ProjectiveCase::W01,
        ProjectiveCase::W03,
        ProjectiveCase::W04,
        ProjectiveCase::Ycw107,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProjectiveCase::W0001 => "w0001",
            ProjectiveCase::Cw0002 => "cw0002",
            ProjectiveCase::W01 => "w01",
            ProjectiveCase::W03 => "w03",
            ProjectiveCase::W04 => "w04",
            ProjectiveCase::Ycw107 => "ycw107",
        }
    }

    pub fn from_name(name: &str) -> Option<ProjectiveCase> {
        ProjectiveCase::ALL.into_iter().find(|c| c.name() == name)
    }

    fn form(self) -> Option<SprayFormCase> {
        match self {
            ProjectiveCase::W0001 => Some(SprayFormCase::W001),
            ProjectiveCase::Cw0002 => Some(SprayFormCase::Cw002),
            ProjectiveCase::W01 => Some(SprayFormCase::W1),
            ProjectiveCase::W03 => Some(SprayFormCase::W3),
            ProjectiveCase::W04 => Some(SprayFormCase::W4),
            ProjectiveCase::Ycw107 => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectiveFormula {
    pub case: ProjectiveCase,
    pub x: [f64; 2],
    pub y: [f64; 2],
    #[serde(rename = "P")]
    pub p: f64,
    pub rho: [f64; 2],
    pub tau: f64,
    /// P from F_{x^m} y^m / (2F).
    pub reference: ProjectiveFactor,
    /// |P - P_reference| / max(|P_reference|, |F|); P and F share degree 1 in y.
    pub discrepancy: f64,
    /// The case's r_ij condition and spray form hold at x.
    pub hypotheses_hold: bool,
}

/// Closed-form P at (x, y). `rho` and `tau` default to their fitted values.
pub fn projective_factor_formula(
    case: ProjectiveCase,
    def: &MetricDef,
    x: [f64; 2],
    y: [f64; 2],
    rho: Option<[f64; 2]>,
    tau: Option<f64>,
) -> Result<ProjectiveFormula> {
    let reference = projective_factor(def, x, y)?;
    let (p, rho, tau, hypotheses_hold) = match case.form() {
        None => {
            let PhiSpec::MKropina { c, .. } = def.phi else {
                return Err(mismatch(case, def));
            };
            let m = metric_at(def, x)?;
            let f = finsler_function(def, x, y, 0)?.value();
            let normal_form = m.b[1].abs() <= 1e-12 && m.db[1][0].abs() <= 1e-12 && m.db[1][1].abs() <= 1e-12
                && m.db[0][1].abs() <= 1e-12;
            (c * m.db[0][0] / (2.0 * f) * y[0] * y[0], [0.0; 2], 0.0, normal_form && reference.hamel_holds)
        }
        Some(form) => {
            let k = form_constants(form, &def.phi)
                .filter(|_| !(case == ProjectiveCase::W03 && def.phi.linear_coefficient() != 0.0))
                .ok_or_else(|| mismatch(case, def))?;
            let fit = spray_form_fit(form, def, x, tau)?;
            let rho = rho.unwrap_or(fit.rho);
            let tau = fit.tau;
            let rij_ok = match (form.tau_case(), case) {
                (Some(rc), _) => rij_condition_check_with(rc, k, def, x)?.verdict.passed(),
                (None, ProjectiveCase::W04) => {
                    rij_condition_check_with(super::rij::RijCase::Thm41V, k, def, x)?.verdict.passed()
                }
                _ => true,
            };
            let fd = FormData::at(def, x)?;
            let a2 = fd.alpha2(y);
            let alpha = a2.sqrt();
            let beta = fd.beta(y);
            let s = beta / alpha;
            let b2 = fd.m.b2;
            let s0 = fd.s0(y);
            let r00 = fd.r00(y);
            let rho_y = rho[0] * y[0] + rho[1] * y[1];
            let m = k.m;
            let dlog = || -> Result<f64> {
                let d = def.phi.derivatives(s)?;
                Ok(d[1] / d[0])
            };
            let p = match case {
                ProjectiveCase::W0001 => {
                    rho_y - ((a2 - k.c * beta * beta) * s0 + r00 * beta) / (b2 * (a2 + k.c * beta * beta))
                }
                ProjectiveCase::Cw0002 => {
                    let (k1, k2) = (k.k1, k.k2);
                    let c = k1 - k2 * k2;
                    let bt2 = beta * beta;
                    let d = a2 * a2 + c * bt2 * bt2 + k2 * bt2 * (2.0 * a2 + k2 * bt2);
                    let t = c
                        * (4.0 * bt2 * (2.0 * bt2 - b2 * a2)
                            + 3.0 * b2 * b2 * (a2 * a2 + c * bt2 * bt2)
                            + k2 * b2 * bt2 * (6.0 * b2 * a2 + 4.0 * bt2 + 3.0 * k2 * b2 * bt2))
                        / (8.0 * b2 * (1.0 + k2 * b2) * d);
                    rho_y
                        + 2.0 * tau * beta * (3.0 - 2.0 * c * bt2 * bt2 / d)
                        + ((k2 * b2 - 3.0) / (2.0 * b2) + t) * s0
                }
                ProjectiveCase::W01 => {
                    let k2 = k.k2;
                    rho_y + tau * alpha * (s * (-m + k2 * s * s) - s * s * (1.0 + k2 * s * s) * dlog()?)
                }
                ProjectiveCase::W03 => {
                    rho_y - 2.0 * m * tau * beta - 2.0 * (m + k.k * b2) / ((m - 1.0) * b2) * s0
                }
                ProjectiveCase::W04 => {
                    let kk = k.k;
                    rho_y + (s * (kk * s * s - 1.0) * dlog()? - kk * s * s - m + 2.0) * s0 / ((m - 1.0) * b2)
                }
                ProjectiveCase::Ycw107 => unreachable!(),
            };
            (p, rho, tau, rij_ok && fit.holds)
        }
    };
    let f = finsler_function(def, x, y, 0)?.value().abs();
    let discrepancy = (p - reference.p).abs() / reference.p.abs().max(f).max(1e-300);
    Ok(ProjectiveFormula {
        case,
        x,
        y,
        p,
        rho,
        tau,
        reference,
        discrepancy,
        hypotheses_hold,
    })
}

fn mismatch(case: ProjectiveCase, def: &MetricDef) -> Error {
    Error::CaseMismatch {
        case: case.name().into(),
        why: format!("phi family {} does not belong to this case", def.phi.tag()),
    }
}
