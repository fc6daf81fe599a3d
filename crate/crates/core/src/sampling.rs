//! Seeded sample points, direction sets and random test inputs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::criteria::special_frame;
use crate::error::{Error, Result};
use crate::exprlang::{Expr, MetricDef, UnaryOp};
use crate::finsler::spray_jets_with;
use crate::geometry::{metric_at, FieldJets};
use crate::phi::PhiSpec;

pub const DEFAULT_SEED: u64 = 20240611;

/// Number of equally spaced angles in a direction set.
pub const DIRECTION_COUNT: usize = 24;
/// Fewest surviving directions for a fit at a point.
pub const MIN_DIRECTIONS: usize = 12;
/// Directions with |s| below this fraction of b are dropped.
pub const S_MIN_FRACTION: f64 = 0.05;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Axis-aligned sampling box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl Default for Region {
    fn default() -> Self {
        Region {
            lo: [0.5, 0.5],
            hi: [1.5, 1.5],
        }
    }
}

impl Region {
    pub fn sample(&self, rng: &mut impl Rng) -> [f64; 2] {
        [rng.gen_range(self.lo[0]..self.hi[0]), rng.gen_range(self.lo[1]..self.hi[1])]
    }

    pub fn points(&self, n: usize, seed: u64) -> Vec<[f64; 2]> {
        let mut r = rng(seed);
        (0..n).map(|_| self.sample(&mut r)).collect()
    }

    /// A `n x n` grid including the corners.
    pub fn grid(&self, n: usize) -> Vec<[f64; 2]> {
        let t = |k: usize| if n > 1 { k as f64 / (n - 1) as f64 } else { 0.5 };
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                out.push([
                    self.lo[0] + t(i) * (self.hi[0] - self.lo[0]),
                    self.lo[1] + t(j) * (self.hi[1] - self.lo[1]),
                ]);
            }
        }
        out
    }
}

/// `count` equally spaced, half-step offset angles in the alpha-orthonormal
/// frame adapted to beta, so that s = b cos(theta).
pub fn frame_directions(def: &MetricDef, x: [f64; 2], count: usize) -> Result<Vec<[f64; 2]>> {
    let t = special_frame(def, x)?.t;
    Ok((0..count)
        .map(|k| {
            let th = std::f64::consts::TAU * (k as f64 + 0.5) / count as f64;
            let (sn, cs) = th.sin_cos();
            [t[(0, 0)] * cs + t[(0, 1)] * sn, t[(1, 0)] * cs + t[(1, 1)] * sn]
        })
        .collect())
}

/// The default direction set at x: frame directions with |s| >= s_min where F
/// is positive definite and the spray is computable.
pub fn valid_directions(def: &MetricDef, x: [f64; 2]) -> Result<Vec<[f64; 2]>> {
    let fields = FieldJets::eval(def, x, 1)?;
    let b = fields.b2.value().sqrt();
    let beta = |y: &[f64; 2]| fields.b[0].value() * y[0] + fields.b[1].value() * y[1];
    let dirs: Vec<[f64; 2]> = frame_directions(def, x, DIRECTION_COUNT)?
        .into_iter()
        // frame directions have unit alpha-norm, so beta is s
        .filter(|y| beta(y).abs() >= S_MIN_FRACTION * b)
        .filter(|y| strongly_convex(&def.phi, beta(y), b * b))
        .filter(|y| spray_jets_with(fields.clone(), &def.phi, *y, 0).is_ok())
        .collect();
    if dirs.len() < MIN_DIRECTIONS {
        return Err(Error::InsufficientSamples {
            valid: dirs.len(),
            required: MIN_DIRECTIONS,
        });
    }
    Ok(dirs)
}

/// phi > 0 and phi - s phi' + (b^2 - s^2) phi'' > 0 at s.
pub fn strongly_convex(phi: &PhiSpec, s: f64, b2: f64) -> bool {
    phi.derivatives(s)
        .is_ok_and(|[p, dp, d2p, _]| p > 0.0 && p - s * dp + (b2 - s * s) * d2p > 0.0)
}

/// Scale y to unit alpha-norm.
pub fn normalize_alpha(def: &MetricDef, x: [f64; 2], y: [f64; 2]) -> Result<[f64; 2]> {
    let a = metric_at(def, x)?.a;
    let n2 = a[0][0] * y[0] * y[0] + 2.0 * a[0][1] * y[0] * y[1] + a[1][1] * y[1] * y[1];
    if !(n2 > 0.0) {
        return Err(Error::ZeroDirection { x, y });
    }
    let n = n2.sqrt();
    Ok([y[0] / n, y[1] / n])
}

fn c(v: f64) -> Expr {
    Expr::Const(v)
}

fn x(i: usize) -> Expr {
    Expr::Var(i)
}

/// A random smooth Riemannian metric and 1-form, positive definite everywhere:
/// the diagonal stays in [1, 2] and the off-diagonal entry below 0.3.
pub fn random_metric(rng: &mut impl Rng, phi: PhiSpec) -> MetricDef {
    let mut u = |lo: f64, hi: f64| c(rng.gen_range(lo..hi));
    let a11 = c(1.5) + c(0.5) * sin(u(-1.0, 1.0) * x(1) + u(-1.0, 1.0) * x(2));
    let a22 = c(1.5) + c(0.5) * cos(u(-1.0, 1.0) * x(1) - u(-1.0, 1.0) * x(2));
    let a12 = c(0.3) * sin(u(-1.0, 1.0) * x(1) * x(2));
    // b1 stays above 0.17 on the default region
    let b1 = u(0.8, 1.2) + u(-0.2, 0.2) * x(1) + u(-0.1, 0.1) * x(2).powi(2) + u(-0.1, 0.1) * sin(x(1) * x(2));
    let b2 = u(-0.8, 0.8) + u(-0.5, 0.5) * x(1) * x(2) + u(-0.3, 0.3) * (u(-0.5, 0.5) * x(1)).exp();
    MetricDef::new([[a11, a12.clone()], [a12, a22]], [b1, b2], phi).expect("generated metric is valid")
}

/// A random smooth expression in x1, x2 that is defined on the positive quadrant.
pub fn random_field_expr<R: Rng>(rng: &mut R, depth: usize) -> Expr {
    if depth == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..3) {
            0 => c((rng.gen_range(-1.5..1.5f64) * 100.0).round() / 100.0),
            _ => x(rng.gen_range(1..=2)),
        };
    }
    let pick = rng.gen_range(0..9);
    let n = rng.gen_range(-2..=3);
    let mut sub = || random_field_expr(&mut *rng, depth - 1);
    match pick {
        0 => sub() + sub(),
        1 => sub() - sub(),
        2 => sub() * sub(),
        // denominators and radicands kept positive
        3 => sub() / (c(1.0) + sub().powi(2)),
        4 => (c(0.5) + sub().powi(2)).sqrt(),
        5 => (c(0.5) + sub().powi(2)).log(),
        6 => sin(c(0.5) * sub()),
        7 => cos(c(0.5) * sub()),
        _ if n < 0 => (c(1.0) + sub().powi(2)).powi(n),
        _ => sub().powi(n),
    }
}

fn sin(e: Expr) -> Expr {
    Expr::unary(UnaryOp::Sin, e)
}

fn cos(e: Expr) -> Expr {
    Expr::unary(UnaryOp::Cos, e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_points_are_reproducible() {
        let r = Region::default();
        assert_eq!(r.points(5, 7), r.points(5, 7));
        assert_ne!(r.points(5, 7), r.points(5, 8));
        assert!(r.points(50, 1).iter().all(|p| (0.5..1.5).contains(&p[0]) && (0.5..1.5).contains(&p[1])));
    }

    #[test]
    fn random_metrics_are_positive_definite_on_region() {
        let mut g = rng(3);
        for _ in 0..10 {
            let d = random_metric(&mut g, PhiSpec::MKropina { c: 0.0, m: -1.0 });
            for p in Region::default().grid(4) {
                metric_at(&d, p).unwrap();
            }
        }
    }

    #[test]
    fn random_expressions_evaluate() {
        let mut g = rng(11);
        for _ in 0..100 {
            let e = random_field_expr(&mut g, 3);
            assert!(e.eval(&[0.9, 1.1]).unwrap().is_finite(), "{e}");
        }
    }

    #[test]
    fn direction_set_filters_small_s() {
        let d = random_metric(&mut rng(5), PhiSpec::MKropina { c: 0.0, m: -1.0 });
        let dirs = valid_directions(&d, [1.0, 1.0]).unwrap();
        assert!(dirs.len() >= MIN_DIRECTIONS);
    }
}
