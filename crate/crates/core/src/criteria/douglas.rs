//! Douglas test: G^1 y^2 - G^2 y^1 must be a cubic form in y.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exprlang::MetricDef;
use crate::finsler::spray_jets_with;
use crate::geometry::{values2, FieldJets};
use crate::sampling::{valid_directions, MIN_DIRECTIONS};

pub const DOUGLAS_THRESHOLD: f64 = 1e-7;

type Conn = [[[f64; 2]; 2]; 2];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DouglasFit {
    pub x: [f64; 2],
    /// A symmetric connection with G^i = 1/2 Gamma^i_jk y^j y^k + P y^i, up to
    /// the projective freedom, fixed so that Gamma^i_12 = gamma^i_12.
    #[serde(rename = "Gamma")]
    pub gamma: Conn,
    /// Gamma^i_kl - gamma^i_kl.
    #[serde(rename = "G_kl")]
    pub g_kl: Conn,
    /// Coefficients of y1^3, y1^2 y2, y1 y2^2, y2^3.
    pub cubic: [f64; 4],
    pub residual: f64,
    pub samples_used: usize,
    pub douglas: bool,
}

/// Least squares solution and relative misfit, refusing near-rank-deficient systems.
pub fn lstsq(rows: &[Vec<f64>], rhs: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = rhs.len();
    let k = rows.first().map_or(0, Vec::len);
    let m = DMatrix::from_fn(n, k, |i, j| rows[i][j]);
    let b = DVector::from_column_slice(rhs);
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if n < k || !(smax > 0.0) || smin <= 1e-12 * smax {
        return Err(Error::RankDeficient);
    }
    let sol = svd.solve(&b, 0.0).map_err(|_| Error::RankDeficient)?;
    let misfit = &m * &sol - &b;
    Ok((sol.iter().copied().collect(), misfit.iter().copied().collect()))
}

pub(crate) fn rms(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt()
}

/// Fit on the given directions; those where the spray is undefined are skipped.
pub fn douglas_fit(def: &MetricDef, x: [f64; 2], dirs: &[[f64; 2]]) -> Result<DouglasFit> {
    let fields = FieldJets::eval(def, x, 1)?;
    if !(fields.b2.value() > 0.0) {
        return Err(Error::ZeroCovector(x));
    }
    let mut rows = Vec::new();
    let mut d = Vec::new();
    let mut scale = Vec::new();
    let gamma_max = fields.gamma.iter().flatten().flatten().fold(0.0f64, |m, g| m.max(g.value().abs()));
    for y in dirs {
        let Ok(sj) = spray_jets_with(fields.clone(), &def.phi, *y, 0) else {
            continue;
        };
        let g = values2(&sj.g);
        let [y1, y2] = *y;
        let ny = y1.hypot(y2);
        // each row is divided by |y|^3, which makes the fit blind to the length of y
        let w = ny.powi(-3);
        rows.push(vec![w * y1 * y1 * y1, w * y1 * y1 * y2, w * y1 * y2 * y2, w * y2 * y2 * y2]);
        d.push(w * (g[0] * y2 - g[1] * y1));
        scale.push(w * (g[0].hypot(g[1]) * ny).max(gamma_max * ny.powi(3)));
    }
    if d.len() < MIN_DIRECTIONS {
        return Err(Error::InsufficientSamples {
            valid: d.len(),
            required: MIN_DIRECTIONS,
        });
    }
    let (c, misfit) = lstsq(&rows, &d)?;
    // D identically zero would make a purely relative residual meaningless;
    // the floor scales with the spray and the alpha connection
    let den = rms(&d).max(1e-6 * rms(&scale));
    let residual = if den > 0.0 { rms(&misfit) / den } else { 0.0 };

    let gam = |i: usize, j: usize, k: usize| fields.gamma[i][j][k].value();
    let mut big = [[[0.0; 2]; 2]; 2];
    big[0][1][1] = 2.0 * c[3];
    big[1][0][0] = -2.0 * c[0];
    big[0][0][1] = gam(0, 0, 1);
    big[1][0][1] = gam(1, 0, 1);
    big[0][0][0] = 2.0 * (c[1] + big[1][0][1]);
    big[1][1][1] = 2.0 * (big[0][0][1] - c[2]);
    for b in big.iter_mut() {
        b[1][0] = b[0][1];
    }
    let mut g_kl = big;
    for (i, gi) in g_kl.iter_mut().enumerate() {
        for (j, gij) in gi.iter_mut().enumerate() {
            for (k, v) in gij.iter_mut().enumerate() {
                *v -= gam(i, j, k);
            }
        }
    }
    Ok(DouglasFit {
        x,
        gamma: big,
        g_kl,
        cubic: [c[0], c[1], c[2], c[3]],
        residual,
        samples_used: d.len(),
        douglas: residual <= DOUGLAS_THRESHOLD,
    })
}

/// Fit on the default adapted-frame direction set.
pub fn douglas_fit_default(def: &MetricDef, x: [f64; 2]) -> Result<DouglasFit> {
    douglas_fit(def, x, &valid_directions(def, x)?)
}

/// Whether each G^i is itself quadratic in y.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadraticSprayFit {
    pub x: [f64; 2],
    /// conn[i][j][k] with G^i = 1/2 conn^i_jk y^j y^k.
    pub conn: Conn,
    pub residual: f64,
    pub samples_used: usize,
}

pub fn quadratic_spray_fit(def: &MetricDef, x: [f64; 2]) -> Result<QuadraticSprayFit> {
    let fields = FieldJets::eval(def, x, 1)?;
    let dirs = valid_directions(def, x)?;
    let mut rows = Vec::new();
    let mut g = [Vec::new(), Vec::new()];
    for y in &dirs {
        let sj = spray_jets_with(fields.clone(), &def.phi, *y, 0)?;
        rows.push(vec![y[0] * y[0], y[0] * y[1], y[1] * y[1]]);
        for (i, gi) in g.iter_mut().enumerate() {
            gi.push(sj.g[i].value());
        }
    }
    let mut conn = [[[0.0; 2]; 2]; 2];
    let mut misfit = Vec::new();
    for i in 0..2 {
        let (c, m) = lstsq(&rows, &g[i])?;
        conn[i] = [[2.0 * c[0], c[1]], [c[1], 2.0 * c[2]]];
        misfit.extend(m);
    }
    let all: Vec<f64> = g.concat();
    let den = rms(&all);
    Ok(QuadraticSprayFit {
        x,
        conn,
        residual: if den > 0.0 { rms(&misfit) / den } else { rms(&misfit) },
        samples_used: dirs.len(),
    })
}
