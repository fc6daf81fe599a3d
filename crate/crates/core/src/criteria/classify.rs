//! Region classification: Douglas test at every point, then the r_ij checks
//! compatible with the phi family.

use serde::Serialize;

use super::douglas::douglas_fit_default;
use super::rij::{case_constants, rij_condition_check, ConditionReport, RijCase};
use crate::exprlang::MetricDef;
use crate::par::Execution;
use crate::phi::PhiSpec;

pub const MIN_POINTS: usize = 5;
pub const NOT_DOUGLAS: &str = "not Douglas";
pub const KROPINA_LABEL: &str = "Theorem 4.1(i) / Theorem 1.2(i)";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointEvidence {
    pub index: usize,
    pub x: [f64; 2],
    pub douglas_residual: Option<f64>,
    pub cases: Vec<ConditionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub label: String,
    pub douglas: bool,
    /// Cases that pass at every usable point.
    pub passing_cases: Vec<RijCase>,
    pub points_used: usize,
    pub points: Vec<PointEvidence>,
}

/// The r_ij cases whose constants the family carries.
pub fn compatible_cases(phi: &PhiSpec) -> Vec<RijCase> {
    RijCase::ALL.into_iter().filter(|c| case_constants(*c, phi).is_some()).collect()
}

fn is_kropina(phi: &PhiSpec) -> bool {
    matches!(phi, PhiSpec::KropinaLinear { .. }) || matches!(phi, PhiSpec::MKropina { m, .. } if *m == -1.0)
}

fn evidence(def: &MetricDef, index: usize, x: [f64; 2], cases: &[RijCase]) -> PointEvidence {
    let mut ev = PointEvidence {
        index,
        x,
        douglas_residual: None,
        cases: Vec::new(),
        error: None,
    };
    match douglas_fit_default(def, x) {
        Ok(f) => ev.douglas_residual = Some(f.residual),
        Err(e) => {
            ev.error = Some(e.to_string());
            return ev;
        }
    }
    for c in cases {
        match rij_condition_check(*c, def, x) {
            Ok(r) => ev.cases.push(r),
            Err(e) => ev.error = Some(e.to_string()),
        }
    }
    ev
}

pub fn classify(def: &MetricDef, points: &[[f64; 2]], exec: Execution) -> Classification {
    let cases = compatible_cases(&def.phi);
    let indexed: Vec<(usize, [f64; 2])> = points.iter().copied().enumerate().collect();
    let mut evs = exec.map(&indexed, |(i, x)| evidence(def, *i, *x, &cases));
    evs.sort_by_key(|e| e.index);
    let used: Vec<&PointEvidence> = evs.iter().filter(|e| e.douglas_residual.is_some()).collect();
    let douglas = used
        .iter()
        .all(|e| e.douglas_residual.is_some_and(|r| r <= super::douglas::DOUGLAS_THRESHOLD));
    let passing: Vec<RijCase> = cases
        .iter()
        .copied()
        .filter(|c| {
            used.iter().all(|e| e.cases.iter().any(|r| r.case == *c && r.verdict.passed()))
        })
        .collect();
    let label = if used.len() < MIN_POINTS {
        format!("undetermined: {} usable points, need {MIN_POINTS}", used.len())
    } else if !douglas {
        NOT_DOUGLAS.to_string()
    } else if is_kropina(&def.phi) {
        KROPINA_LABEL.to_string()
    } else if passing.is_empty() {
        "Douglas, no catalog case matched".to_string()
    } else {
        passing.iter().map(|c| c.label()).collect::<Vec<_>>().join(" / ")
    };
    Classification {
        label,
        douglas: douglas && used.len() >= MIN_POINTS,
        passing_cases: passing,
        points_used: used.len(),
        points: evs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{random_metric, rng, Region};

    #[test]
    fn kropina_with_linear_term() {
        let d = random_metric(&mut rng(41), PhiSpec::KropinaLinear { c: 0.6 });
        let c = classify(&d, &Region::default().points(6, 1), Execution::Parallel);
        assert_eq!(c.label, KROPINA_LABEL);
    }

    #[test]
    fn random_non_douglas() {
        let d = random_metric(&mut rng(42), PhiSpec::MKropina { c: 0.0, m: 2.0 });
        let c = classify(&d, &Region::default().points(6, 2), Execution::Sequential);
        assert_eq!(c.label, NOT_DOUGLAS);
    }

    #[test]
    fn both_modes_agree() {
        let d = random_metric(&mut rng(43), PhiSpec::Thm41Iv { m: 2.0, k: 0.2 });
        let pts = Region::default().points(6, 3);
        assert_eq!(classify(&d, &pts, Execution::Sequential), classify(&d, &pts, Execution::Parallel));
    }
}
