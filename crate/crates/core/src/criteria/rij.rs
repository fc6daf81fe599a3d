//! Tensor conditions on r_ij or b_{i|j} that characterize each Douglas case,
//! with the scalar tau fitted per point.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exprlang::MetricDef;
use crate::geometry::{covariant_data, metric_at};
use crate::phi::PhiSpec;

pub const RIJ_THRESHOLD: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RijCase {
    Thm41Ii,
    Thm41Iii,
    Thm41Iv,
    Thm41IvConstb,
    Thm41V,
    Cor61Ii,
    Cor61Iii,
    Cor61Iv,
}

impl RijCase {
    pub const ALL: [RijCase; 8] = [
        RijCase::Thm41Ii,
        RijCase::Thm41Iii,
        RijCase::Thm41Iv,
        RijCase::Thm41IvConstb,
        RijCase::Thm41V,
        RijCase::Cor61Ii,
        RijCase::Cor61Iii,
        RijCase::Cor61Iv,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RijCase::Thm41Ii => "thm41_ii",
            RijCase::Thm41Iii => "thm41_iii",
            RijCase::Thm41Iv => "thm41_iv",
            RijCase::Thm41IvConstb => "thm41_iv_constb",
            RijCase::Thm41V => "thm41_v",
            RijCase::Cor61Ii => "cor61_ii",
            RijCase::Cor61Iii => "cor61_iii",
            RijCase::Cor61Iv => "cor61_iv",
        }
    }

    pub fn from_name(name: &str) -> Option<RijCase> {
        RijCase::ALL.into_iter().find(|c| c.name() == name)
    }

    /// Theorem label of the case.
    pub fn label(self) -> &'static str {
        match self {
            RijCase::Thm41Ii => "Theorem 4.1(ii)",
            RijCase::Thm41Iii => "Theorem 4.1(iii)",
            RijCase::Thm41Iv => "Theorem 4.1(iv)",
            RijCase::Thm41IvConstb => "Theorem 4.1(iv), b constant",
            RijCase::Thm41V => "Theorem 4.1(v)",
            RijCase::Cor61Ii => "Theorem 1.2(ii)",
            RijCase::Cor61Iii => "Theorem 1.2(iv)",
            RijCase::Cor61Iv => "Theorem 1.2(iii)",
        }
    }
}

/// Structural constants a case reads from the phi family.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CaseConstants {
    pub m: f64,
    pub k: f64,
    pub k1: f64,
    pub k2: f64,
    pub c: f64,
}

/// Constants of `case` carried by `phi`, or `None` when the family does not
/// belong to that case.
pub fn case_constants(case: RijCase, phi: &PhiSpec) -> Option<CaseConstants> {
    let z = CaseConstants::default();
    match (case, phi) {
        (RijCase::Thm41Ii, PhiSpec::Thm41Ii { k1, k2 }) => Some(CaseConstants { m: -3.0, k1: *k1, k2: *k2, ..z }),
        (RijCase::Thm41Iii, PhiSpec::Thm41Iii { k1, k2, m }) => Some(CaseConstants { m: *m, k1: *k1, k2: *k2, ..z }),
        (RijCase::Thm41Iv, PhiSpec::Thm41Iv { m, k }) => Some(CaseConstants { m: *m, k: *k, ..z }),
        (RijCase::Thm41Iv, PhiSpec::Thm41Ii { k1, k2 }) if (k1 - k2 * k2).abs() <= 1e-12 * k1.abs().max(1.0) => {
            Some(CaseConstants { m: -3.0, k: *k2, ..z })
        }
        (RijCase::Thm41IvConstb, PhiSpec::Thm41IvConstB { m, b }) => Some(CaseConstants { m: *m, k: -1.0 / (b * b), ..z }),
        (RijCase::Thm41IvConstb, PhiSpec::Thm41Iv { m, k }) => Some(CaseConstants { m: *m, k: *k, ..z }),
        (RijCase::Thm41V, PhiSpec::Thm41V { m, k, .. }) => Some(CaseConstants { m: *m, k: *k, ..z }),
        (RijCase::Cor61Ii, PhiSpec::MKropina { c, m }) if *m == -3.0 => Some(CaseConstants { m: -3.0, c: *c, ..z }),
        (RijCase::Cor61Iii, PhiSpec::MKropina { c, m }) if *m != -1.0 => Some(CaseConstants { m: *m, c: *c, ..z }),
        (RijCase::Cor61Iv, PhiSpec::MKropina { c, m }) if *m != -1.0 && *c == 0.0 => {
            Some(CaseConstants { m: *m, ..z })
        }
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub case: RijCase,
    pub x: [f64; 2],
    pub tau: f64,
    pub residual: f64,
    pub verdict: Verdict,
    /// Tensor components entering the fit.
    pub samples_used: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn of(ok: bool) -> Verdict {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

type M2 = [[f64; 2]; 2];

fn lin(terms: &[(f64, &M2)]) -> M2 {
    let mut out = [[0.0; 2]; 2];
    for (c, m) in terms {
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] += c * m[i][j];
            }
        }
    }
    out
}

fn dot(a: &M2, b: &M2) -> f64 {
    (0..2).flat_map(|i| (0..2).map(move |j| (i, j))).map(|(i, j)| a[i][j] * b[i][j]).sum()
}

fn fro(a: &M2) -> f64 {
    dot(a, a).sqrt()
}

/// Check `case` at x with constants taken from the metric's phi family.
pub fn rij_condition_check(case: RijCase, def: &MetricDef, x: [f64; 2]) -> Result<ConditionReport> {
    let k = case_constants(case, &def.phi).ok_or_else(|| Error::CaseMismatch {
        case: case.name().into(),
        why: format!("phi family {} does not carry this case's constants", def.phi.tag()),
    })?;
    rij_condition_check_with(case, k, def, x)
}

/// Check `case` at x with explicit constants.
pub fn rij_condition_check_with(case: RijCase, k: CaseConstants, def: &MetricDef, x: [f64; 2]) -> Result<ConditionReport> {
    let m_at = metric_at(def, x)?;
    let b2 = m_at.b2;
    if !(b2 > 0.0) {
        return Err(Error::ZeroCovector(x));
    }
    let cov = covariant_data(def, x, [0.0, 0.0])?;
    let a = m_at.a;
    let b = m_at.b;
    let bb: M2 = [[b[0] * b[0], b[0] * b[1]], [b[1] * b[0], b[1] * b[1]]];
    let sv = cov.s_vec;
    let bs: M2 = [[2.0 * b[0] * sv[0], b[0] * sv[1] + b[1] * sv[0]], [b[1] * sv[0] + b[0] * sv[1], 2.0 * b[1] * sv[1]]];
    let m = k.m;
    let mut warning = None;
    // (left side, tau coefficient, fixed term)
    let (lhs, t, c): (M2, Option<M2>, M2) = match case {
        RijCase::Thm41Ii => {
            let d = 1.0 + k.k2 * b2;
            if d.abs() < 1e-3 {
                warning = Some(format!("1 + k2 b^2 = {d:.3e} is close to zero; the fit is ill-conditioned"));
            }
            let coef = ((3.0 * k.k1 + k.k2 * k.k2) * b2 * b2 - 4.0) / (8.0 * b2 * d);
            (
                cov.r,
                Some(lin(&[(-6.0 * b2, &a), (-2.0 * (k.k2 * b2 - 2.0), &bb)])),
                lin(&[(coef, &bs)]),
            )
        }
        RijCase::Thm41Iii => (
            cov.nabla_b,
            Some(lin(&[(2.0 * m * b2, &a), (-2.0 * (m + 1.0 + k.k2 * b2), &bb)])),
            [[0.0; 2]; 2],
        ),
        RijCase::Thm41Iv => (
            cov.r,
            Some(lin(&[(2.0 * m * b2, &a), (-2.0 * (m + 1.0 + k.k * b2), &bb)])),
            lin(&[(-(m + 1.0 + 2.0 * k.k * b2) / ((m - 1.0) * b2), &bs)]),
        ),
        RijCase::Thm41IvConstb => (
            cov.r,
            Some(lin(&[(2.0 * b2, &a), (-2.0, &bb)])),
            lin(&[(-1.0 / b2, &bs)]),
        ),
        RijCase::Thm41V => (cov.r, None, lin(&[(-1.0 / b2, &bs)])),
        RijCase::Cor61Ii => (
            cov.r,
            Some(lin(&[(-6.0 * b2, &a), (4.0, &bb)])),
            lin(&[((3.0 * k.c * b2 * b2 - 4.0) / (8.0 * b2), &bs)]),
        ),
        RijCase::Cor61Iii => (
            cov.nabla_b,
            Some(lin(&[(2.0 * m * b2, &a), (-2.0 * (m + 1.0), &bb)])),
            [[0.0; 2]; 2],
        ),
        RijCase::Cor61Iv => (
            cov.r,
            Some(lin(&[(2.0 * m * b2, &a), (-2.0 * (m + 1.0), &bb)])),
            lin(&[(-(m + 1.0) / ((m - 1.0) * b2), &bs)]),
        ),
    };
    let target = lin(&[(1.0, &lhs), (-1.0, &c)]);
    let (tau, err) = match t {
        Some(t) => {
            let tt = dot(&t, &t);
            let tau = if tt > 0.0 { dot(&target, &t) / tt } else { 0.0 };
            (tau, lin(&[(1.0, &target), (-tau, &t)]))
        }
        None => (0.0, target),
    };
    let scale = fro(&cov.nabla_b);
    let residual = if scale > 1e-12 { fro(&err) / scale } else { fro(&err) };
    let samples_used = if matches!(case, RijCase::Thm41Iii | RijCase::Cor61Iii) { 4 } else { 3 };
    Ok(ConditionReport {
        case,
        x,
        tau,
        residual,
        verdict: Verdict::of(residual <= RIJ_THRESHOLD),
        samples_used,
        warning,
    })
}
