//! Adapted-frame conditions along a grid of s values: the Douglas pair built
//! from the fitted G^i_kl and the projective-flatness pair built from the
//! connection of alpha.

use serde::Serialize;

use super::douglas::{douglas_fit_default, DouglasFit};
use super::frame::{special_frame, SpecialFrame};
use crate::error::Result;
use crate::exprlang::MetricDef;
use crate::geometry::{christoffel, covariant_data};
use crate::phi::{phi_eval, PhiSpec};

type Conn = [[[f64; 2]; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridResidual {
    pub s: f64,
    pub first: f64,
    pub second: f64,
}

/// Kropina relations between G^i_kl and r, s in the adapted frame, as scaled residuals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KropinaRelations {
    /// G^1_11 = G^2_12 + G^2_21 + r_11 / b.
    pub g111: f64,
    /// G^1_22 = r_22 / b.
    pub g122: f64,
    /// G^1_12 + G^1_21 - G^2_22 = (2 r_12 - s_12) / b.
    pub xi: f64,
    /// G^2_11 = (1 - c b^2) s_12 / b.
    pub g211: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridReport {
    pub x: [f64; 2],
    pub b: f64,
    pub samples: Vec<GridResidual>,
    /// s values dropped from the grid.
    pub excluded: Vec<f64>,
    pub max_residual: f64,
    pub douglas_residual: Option<f64>,
    pub kropina: Option<KropinaRelations>,
}

fn scaled(lhs: f64, rhs: f64) -> f64 {
    (lhs - rhs).abs() / 1f64.max(lhs.abs()).max(rhs.abs())
}

/// s = +-b (0.1, 0.2, ..., 0.9).
pub fn default_s_grid(b: f64) -> Vec<f64> {
    (1..=9).flat_map(|k| [-0.1 * k as f64 * b, 0.1 * k as f64 * b]).collect()
}

struct FrameData {
    frame: SpecialFrame,
    r: [[f64; 2]; 2],
    s12: f64,
}

fn frame_data(def: &MetricDef, x: [f64; 2]) -> Result<FrameData> {
    let frame = special_frame(def, x)?;
    let cov = covariant_data(def, x, [0.0, 0.0])?;
    let r = frame.bilinear(cov.r);
    let s12 = frame.bilinear(cov.s)[0][1];
    Ok(FrameData { frame, r, s12 })
}

/// Evaluate both conditions over the grid. `sign` is +1 with the Douglas G^i_kl
/// and -1 with the connection of alpha.
fn grid(phi: &PhiSpec, fd: &FrameData, g: &Conn, sign: f64, s_grid: &[f64]) -> (Vec<GridResidual>, Vec<f64>) {
    let b = fd.frame.b;
    let b2 = b * b;
    let r = fd.r;
    let mut out = Vec::new();
    let mut excluded = Vec::new();
    for &s in s_grid {
        let w = b2 - s * s;
        let pe = match phi_eval(phi, s, b2) {
            Ok(pe) if w > 0.0 => pe,
            _ => {
                excluded.push(s);
                continue;
            }
        };
        let (q, psi) = (pe.q, pe.psi);
        let l1 = sign * (s * s / (2.0 * w) * (g[0][0][0] - g[1][0][1] - g[1][1][0]) + 0.5 * g[0][1][1]);
        let r1 = b * psi * (r[0][0] * s * s / w + r[1][1]);
        let l2 = (-s * s / w + 2.0 * psi * b2 - 1.0) * b * q * fd.s12 - 2.0 * b * psi * r[0][1] * s;
        let r2 = sign * (g[1][0][0] * s.powi(3) / (2.0 * w) + 0.5 * (g[1][1][1] - g[0][0][1] - g[0][1][0]) * s);
        out.push(GridResidual {
            s,
            first: scaled(l1, r1),
            second: scaled(l2, r2),
        });
    }
    (out, excluded)
}

fn max_of(samples: &[GridResidual]) -> f64 {
    samples.iter().map(|g| g.first.max(g.second)).fold(0.0, f64::max)
}

fn kropina_relations(phi: &PhiSpec, fd: &FrameData, g: &Conn) -> Option<KropinaRelations> {
    let c = match phi {
        PhiSpec::KropinaLinear { c } => *c,
        PhiSpec::MKropina { c, m } if *m == -1.0 => *c,
        _ => return None,
    };
    let b = fd.frame.b;
    let r = fd.r;
    Some(KropinaRelations {
        g111: scaled(g[0][0][0], g[1][0][1] + g[1][1][0] + r[0][0] / b),
        g122: scaled(g[0][1][1], r[1][1] / b),
        xi: scaled(g[0][0][1] + g[0][1][0] - g[1][1][1], (2.0 * r[0][1] - fd.s12) / b),
        g211: scaled(g[1][0][0], (1.0 - c * b * b) / b * fd.s12),
    })
}

/// The Douglas conditions with G^i_kl from a Douglas fit at x.
pub fn prop34_residual(def: &MetricDef, x: [f64; 2], s_grid: &[f64]) -> Result<GridReport> {
    let fit: DouglasFit = douglas_fit_default(def, x)?;
    let fd = frame_data(def, x)?;
    let g = fd.frame.connection(fit.g_kl);
    let (samples, excluded) = grid(&def.phi, &fd, &g, 1.0, s_grid);
    Ok(GridReport {
        x,
        b: fd.frame.b,
        max_residual: max_of(&samples),
        samples,
        excluded,
        douglas_residual: Some(fit.residual),
        kropina: kropina_relations(&def.phi, &fd, &g),
    })
}

/// The projective-flatness conditions with the connection of alpha at x.
pub fn prop35_residual(def: &MetricDef, x: [f64; 2], s_grid: &[f64]) -> Result<GridReport> {
    let fd = frame_data(def, x)?;
    let g = fd.frame.connection(christoffel(def, x)?);
    let (samples, excluded) = grid(&def.phi, &fd, &g, -1.0, s_grid);
    Ok(GridReport {
        x,
        b: fd.frame.b,
        max_residual: max_of(&samples),
        samples,
        excluded,
        douglas_residual: None,
        kropina: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{random_metric, rng};

    #[test]
    fn kropina_satisfies_douglas_conditions() {
        let d = random_metric(&mut rng(21), PhiSpec::MKropina { c: 0.0, m: -1.0 });
        for x in [[0.8, 1.1], [1.2, 0.7]] {
            let b = special_frame(&d, x).unwrap().b;
            let rep = prop34_residual(&d, x, &default_s_grid(b)).unwrap();
            assert!(rep.excluded.is_empty());
            assert!(rep.max_residual <= 1e-6, "{rep:?}");
            let k = rep.kropina.unwrap();
            assert!(k.g111 <= 1e-6 && k.g122 <= 1e-6 && k.xi <= 1e-6 && k.g211 <= 1e-6, "{k:?}");
        }
    }

    #[test]
    fn non_douglas_control_is_bounded_away() {
        let d = random_metric(&mut rng(22), PhiSpec::MKropina { c: 0.0, m: 2.0 });
        let x = [1.0, 1.0];
        let b = special_frame(&d, x).unwrap().b;
        let rep = prop34_residual(&d, x, &default_s_grid(b)).unwrap();
        assert!(rep.max_residual > 1e-3, "{}", rep.max_residual);
    }

    #[test]
    fn grid_excludes_s_beyond_b() {
        let d = random_metric(&mut rng(23), PhiSpec::MKropina { c: 0.0, m: -1.0 });
        let x = [1.0, 1.0];
        let b = special_frame(&d, x).unwrap().b;
        let rep = prop35_residual(&d, x, &[0.5 * b, 1.5 * b]).unwrap();
        assert_eq!(rep.excluded, vec![1.5 * b]);
        assert_eq!(rep.samples.len(), 1);
    }
}
