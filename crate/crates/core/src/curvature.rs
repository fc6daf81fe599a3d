//! Curvature of the spray: Riemann curvature R^i_k, the flag curvature in two
//! dimensions, the Berwald h-curvature contractions H^i_jkl, H_jk, H_j, the
//! K-curvature K_12 and the projective-flatness test built on it.

use serde::Serialize;

use crate::criteria::douglas_fit_default;
use crate::error::{Error, Result};
use crate::exprlang::MetricDef;
use crate::finsler::{finsler_function, spray_jets, SprayJets};
use crate::geometry::{map2, map22, values2, values22, xv, yv, J2, J22};
use crate::jets::Jet;
use crate::par::Execution;
use crate::sampling::{normalize_alpha, valid_directions};

/// Jet order of the spray used for K_12: R loses two orders, H two more and
/// the h-derivative one more.
pub const K12_SPRAY_ORDER: usize = 5;
/// |K_12| at unit alpha-norm y below this counts as zero.
pub const K12_ZERO: f64 = 1e-8;

type J2222 = [[[[Jet; 2]; 2]; 2]; 2];

/// R^i_k = 2 dG^i/dx^k - y^j d^2G^i/dx^j dy^k + 2 G^j d^2G^i/dy^j dy^k - dG^i/dy^j dG^j/dy^k.
pub fn riemann_jets(sj: &SprayJets) -> J22 {
    let g = &sj.g;
    let y = &sj.y;
    let gy = map22(|i, j| g[i].diff(yv(j)));
    map22(|i, k| {
        let gx = g[i].diff(xv(k));
        let mut r = gx.scale(2.0);
        for j in 0..2 {
            r = r - &y[j] * &gx_y(g, i, j, k);
            r = r + (&g[j] * &gy[i][j].diff(yv(k))).scale(2.0);
            r = r - &gy[i][j] * &gy[j][k];
        }
        r
    })
}

fn gx_y(g: &J2, i: usize, j: usize, k: usize) -> Jet {
    g[i].diff(xv(j)).diff(yv(k))
}

/// Flag curvature trace(R) / F^2 as a jet.
pub fn flag_jet(sj: &SprayJets, r: &J22) -> Result<Jet> {
    let f2 = &sj.f * &sj.f;
    if f2.value() == 0.0 {
        return Err(Error::ZeroMetric);
    }
    (&r[0][0] + &r[1][1]).try_div(&f2)
}

/// H^i_jkl = 1/3 (d^2 R^i_l / dy^j dy^k - d^2 R^i_k / dy^j dy^l).
pub fn h4_jets(r: &J22) -> J2222 {
    std::array::from_fn(|i| {
        map2(|j| {
            map22(|k, l| {
                let a = r[i][l].diff(yv(j)).diff(yv(k));
                let b = r[i][k].diff(yv(j)).diff(yv(l));
                (a - b).scale(1.0 / 3.0)
            })
        })
    })
}

/// H_jk = H^p_jkp.
pub fn h2_jets(h4: &J2222) -> J22 {
    map22(|j, k| &h4[0][j][k][0] + &h4[1][j][k][1])
}

/// H_j = 2 H_kj y^k + H_jk y^k.
pub fn h1_jets(h2: &J22, y: &J2) -> J2 {
    map2(|j| {
        let mut h = Jet::constant(h2[0][0].space(), h2[0][0].order(), 0.0);
        for k in 0..2 {
            h = h + (&h2[k][j] * &y[k]).scale(2.0) + &h2[j][k] * &y[k];
        }
        h
    })
}

/// H_{i;j} = dH_i/dx^j - dH_i/dy^m N^m_j - H_m G^m_ij for the Berwald connection.
pub fn h_derivative(h1: &J2, sj: &SprayJets) -> J22 {
    let n = sj.n();
    let conn = sj.connection();
    map22(|i, j| {
        let mut d = h1[i].diff(xv(j));
        for m in 0..2 {
            d = d - &h1[i].diff(yv(m)) * &n[m][j];
            d = d - &h1[m] * &conn[m][i][j];
        }
        d
    })
}

/// All curvature quantities at (x, y).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureEval {
    pub x: [f64; 2],
    pub y: [f64; 2],
    #[serde(rename = "F")]
    pub f: f64,
    #[serde(rename = "R")]
    pub r: [[f64; 2]; 2],
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "H4")]
    pub h4: [[[[f64; 2]; 2]; 2]; 2],
    #[serde(rename = "H2")]
    pub h2: [[f64; 2]; 2],
    #[serde(rename = "H1")]
    pub h1: [f64; 2],
    #[serde(rename = "K12")]
    pub k12: f64,
}

pub fn curvature_eval(def: &MetricDef, x: [f64; 2], y: [f64; 2]) -> Result<CurvatureEval> {
    let sj = spray_jets(def, x, y, K12_SPRAY_ORDER)?;
    let r = riemann_jets(&sj);
    let k = flag_jet(&sj, &r)?;
    let h4 = h4_jets(&r);
    let h2 = h2_jets(&h4);
    let h1 = h1_jets(&h2, &sj.y);
    let hd = h_derivative(&h1, &sj);
    Ok(CurvatureEval {
        x,
        y,
        f: sj.f.value(),
        r: values22(&r),
        k: k.value(),
        h4: std::array::from_fn(|i| map2(|j| values22(&h4[i][j]))),
        h2: values22(&h2),
        h1: values2(&h1),
        k12: hd[0][1].value() - hd[1][0].value(),
    })
}

pub fn riemann_curvature(def: &MetricDef, x: [f64; 2], y: [f64; 2]) -> Result<[[f64; 2]; 2]> {
    let sj = spray_jets(def, x, y, 2)?;
    Ok(values22(&riemann_jets(&sj)))
}

pub fn flag_curvature_2d(def: &MetricDef, x: [f64; 2], y: [f64; 2]) -> Result<f64> {
    let sj = spray_jets(def, x, y, 2)?;
    Ok(flag_jet(&sj, &riemann_jets(&sj))?.value())
}

pub fn h_tensors(def: &MetricDef, x: [f64; 2], y: [f64; 2]) -> Result<CurvatureEval> {
    let sj = spray_jets(def, x, y, 4)?;
    let r = riemann_jets(&sj);
    let k = flag_jet(&sj, &r)?;
    let h4 = h4_jets(&r);
    let h2 = h2_jets(&h4);
    let h1 = h1_jets(&h2, &sj.y);
    Ok(CurvatureEval {
        x,
        y,
        f: sj.f.value(),
        r: values22(&r),
        k: k.value(),
        h4: std::array::from_fn(|i| map2(|j| values22(&h4[i][j]))),
        h2: values22(&h2),
        h1: values2(&h1),
        k12: f64::NAN,
    })
}

pub fn k_curvature(def: &MetricDef, x: [f64; 2], y: [f64; 2]) -> Result<f64> {
    Ok(curvature_eval(def, x, y)?.k12)
}

/// Relative residual of H_i = 3 (1/3 F^2 dK/dy^i + K F dF/dy^i), which holds
/// when the flag curvature K depends on (x, y) only.
pub fn scalar_flag_h_residual(def: &MetricDef, x: [f64; 2], y: [f64; 2]) -> Result<f64> {
    let sj = spray_jets(def, x, y, 4)?;
    let r = riemann_jets(&sj);
    let k = flag_jet(&sj, &r)?;
    let h1 = h1_jets(&h2_jets(&h4_jets(&r)), &sj.y);
    let f = sj.f.value();
    let mut num = 0.0f64;
    let mut den = 0.0f64;
    for i in 0..2 {
        let rhs = 3.0 * (f * f * k.diff(yv(i)).value() / 3.0 + k.value() * f * sj.f.diff(yv(i)).value());
        let lhs = h1[i].value();
        num = num.max((lhs - rhs).abs());
        den = den.max(lhs.abs()).max(rhs.abs());
    }
    Ok(if den > 1e-14 { num / den } else { num })
}

/// Fit K_12 = k1 y^1 + k2 y^2 over unit directions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearFit {
    pub coefficients: [f64; 2],
    pub residual: f64,
    pub max_abs: f64,
}

pub fn k12_linear_fit(def: &MetricDef, x: [f64; 2]) -> Result<LinearFit> {
    let dirs = valid_directions(def, x)?;
    let vals = dirs.iter().map(|y| k_curvature(def, x, *y)).collect::<Result<Vec<_>>>()?;
    let rows: Vec<Vec<f64>> = dirs.iter().map(|y| vec![y[0], y[1]]).collect();
    let (c, misfit) = crate::criteria::lstsq(&rows, &vals)?;
    let rms = |v: &[f64]| (v.iter().map(|a| a * a).sum::<f64>() / v.len() as f64).sqrt();
    let den = rms(&vals);
    Ok(LinearFit {
        coefficients: [c[0], c[1]],
        residual: if den > 0.0 { rms(&misfit) / den } else { rms(&misfit) },
        max_abs: vals.iter().fold(0.0, |m, v| m.max(v.abs())),
    })
}

/// log2 of K_12(x, 2y) / K_12(x, y).
pub fn k12_homogeneity_degree(def: &MetricDef, x: [f64; 2], y: [f64; 2]) -> Result<f64> {
    let a = k_curvature(def, x, y)?;
    let b = k_curvature(def, x, [2.0 * y[0], 2.0 * y[1]])?;
    Ok((b / a).abs().log2())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PflatPoint {
    pub index: usize,
    pub x: [f64; 2],
    pub douglas_residual: Option<f64>,
    /// max |K_12| over unit alpha-norm directions.
    pub max_abs_k12: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PflatReport {
    pub projectively_flat: bool,
    pub douglas: bool,
    pub k12_vanishes: bool,
    pub points: Vec<PflatPoint>,
}

/// Number of directions per point at which K_12 is sampled.
const PFLAT_DIRECTIONS: usize = 6;
/// K_12 is sampled only where F / alpha is at least this fraction of its
/// largest value over the direction set; near F = 0 rounding dominates.
const PFLAT_MIN_F_FRACTION: f64 = 0.25;

/// Unit alpha-norm directions for the K_12 sweep.
pub fn k12_sample_directions(def: &MetricDef, x: [f64; 2], count: usize) -> Result<Vec<[f64; 2]>> {
    let mut dirs = Vec::new();
    for y in valid_directions(def, x)? {
        let y = normalize_alpha(def, x, y)?;
        dirs.push((y, finsler_function(def, x, y, 0)?.value()));
    }
    let fmax = dirs.iter().fold(0.0f64, |m, d| m.max(d.1));
    let kept: Vec<[f64; 2]> = dirs.into_iter().filter(|d| d.1 >= PFLAT_MIN_F_FRACTION * fmax).map(|d| d.0).collect();
    let step = (kept.len() / count).max(1);
    Ok(kept.into_iter().step_by(step).take(count).collect())
}

fn pflat_point(def: &MetricDef, index: usize, x: [f64; 2]) -> PflatPoint {
    let mut p = PflatPoint {
        index,
        x,
        douglas_residual: None,
        max_abs_k12: None,
        error: None,
    };
    let run = |p: &mut PflatPoint| -> Result<()> {
        p.douglas_residual = Some(douglas_fit_default(def, x)?.residual);
        let mut worst = 0.0f64;
        for y in k12_sample_directions(def, x, PFLAT_DIRECTIONS)? {
            worst = worst.max(k_curvature(def, x, y)?.abs());
        }
        p.max_abs_k12 = Some(worst);
        Ok(())
    };
    if let Err(e) = run(&mut p) {
        p.error = Some(e.to_string());
    }
    p
}

/// Projectively flat iff Douglas and K_12 = 0 at every sample point.
pub fn matsumoto_pflat_test(def: &MetricDef, points: &[[f64; 2]], exec: Execution) -> PflatReport {
    let indexed: Vec<(usize, [f64; 2])> = points.iter().copied().enumerate().collect();
    let mut pts = exec.map(&indexed, |(i, x)| pflat_point(def, *i, *x));
    pts.sort_by_key(|p| p.index);
    let all_ok = pts.iter().all(|p| p.error.is_none()) && !pts.is_empty();
    let douglas = all_ok
        && pts
            .iter()
            .all(|p| p.douglas_residual.is_some_and(|r| r <= crate::criteria::DOUGLAS_THRESHOLD));
    let k12_vanishes = all_ok && pts.iter().all(|p| p.max_abs_k12.is_some_and(|k| k <= K12_ZERO));
    PflatReport {
        projectively_flat: douglas && k12_vanishes,
        douglas,
        k12_vanishes,
        points: pts,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprlang::parse_expr;
    use crate::phi::PhiSpec;

    fn def(a: [&str; 3], b: [&str; 2], phi: PhiSpec) -> MetricDef {
        let p = |s: &str| parse_expr(s, 2).unwrap();
        MetricDef::new([[p(a[0]), p(a[1])], [p(a[1]), p(a[2])]], [p(b[0]), p(b[1])], phi).unwrap()
    }

    #[test]
    fn round_sphere_control() {
        let w = "(1+(x1^2+x2^2)/4)^-2";
        let one = crate::exprlang::parse_phi_expr("1").unwrap();
        let d = def([w, "0", w], ["1", "0"], PhiSpec::Custom(one));
        let k = flag_curvature_2d(&d, [0.4, 0.7], [0.3, 0.9]).unwrap();
        assert!((k - 1.0).abs() < 1e-7, "{k}");
    }

    #[test]
    fn minkowski_has_no_curvature() {
        let d = def(["1", "0", "2"], ["0.3", "0.5"], PhiSpec::KropinaLinear { c: 0.5 });
        let c = curvature_eval(&d, [1.0, 1.0], [0.6, 0.2]).unwrap();
        assert!(c.r.iter().flatten().all(|v| *v == 0.0));
        assert_eq!(c.k12, 0.0);
        assert!(c.h1.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn h4_is_antisymmetric_and_r_is_two_homogeneous() {
        let d = def(["1+x2^2", "0.1*x1", "2"], ["x2", "1"], PhiSpec::KropinaLinear { c: 0.5 });
        let (x, y) = ([0.8, 1.1], [0.6, 0.2]);
        let c = h_tensors(&d, x, y).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        assert_eq!(c.h4[i][j][k][l], -c.h4[i][j][l][k]);
                    }
                }
            }
        }
        let r1 = riemann_curvature(&d, x, y).unwrap();
        let r2 = riemann_curvature(&d, x, [2.0 * y[0], 2.0 * y[1]]).unwrap();
        for i in 0..2 {
            for k in 0..2 {
                assert!((r2[i][k] - 4.0 * r1[i][k]).abs() <= 1e-9 * r1[i][k].abs().max(1e-3));
            }
        }
    }

    #[test]
    fn kropina_with_cubic_eta() {
        // F = c beta + alpha^2 / beta with alpha^2 = eta |y|^2, beta = eta y1, eta = x2^3 + 2
        let d = def(["x2^3+2", "0", "x2^3+2"], ["x2^3+2", "0"], PhiSpec::KropinaLinear { c: 1.0 });
        for (x, y2) in [([0.9, 1.1], 0.4), ([1.3, 0.7], -0.8)] {
            let k = k_curvature(&d, x, [1.0, y2]).unwrap();
            assert!((k + 9.0).abs() < 1e-6 * 9.0, "{k}");
        }
    }
}
