//! The alpha-orthonormal frame at a point in which beta = b y^1.

use nalgebra::{Matrix2, Vector2};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exprlang::MetricDef;
use crate::geometry::metric_at;

/// Columns of `t` are the frame vectors e1, e2 in chart components.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpecialFrame {
    pub x: [f64; 2],
    #[serde(serialize_with = "ser_matrix")]
    pub t: Matrix2<f64>,
    #[serde(skip)]
    pub t_inv: Matrix2<f64>,
    /// The alpha-norm of beta.
    pub b: f64,
}

fn ser_matrix<S: serde::Serializer>(m: &Matrix2<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::Serialize;
    [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]].serialize(s)
}

impl SpecialFrame {
    /// Covector components v_j T^j_i.
    pub fn covector(&self, v: [f64; 2]) -> [f64; 2] {
        let w = self.t.transpose() * Vector2::new(v[0], v[1]);
        [w[0], w[1]]
    }

    /// Vector components (T^-1)^i_j v^j.
    pub fn vector(&self, v: [f64; 2]) -> [f64; 2] {
        let w = self.t_inv * Vector2::new(v[0], v[1]);
        [w[0], w[1]]
    }

    /// Chart components of the frame vector with components `v`.
    pub fn to_chart(&self, v: [f64; 2]) -> [f64; 2] {
        let w = self.t * Vector2::new(v[0], v[1]);
        [w[0], w[1]]
    }

    /// A 2-covariant tensor: T^T m T.
    pub fn bilinear(&self, m: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
        let m = Matrix2::new(m[0][0], m[0][1], m[1][0], m[1][1]);
        let r = self.t.transpose() * m * self.t;
        [[r[(0, 0)], r[(0, 1)]], [r[(1, 0)], r[(1, 1)]]]
    }

    /// A (1,2) tensor such as a connection difference: (T^-1)^i_p G^p_qr T^q_k T^r_l.
    pub fn connection(&self, g: [[[f64; 2]; 2]; 2]) -> [[[f64; 2]; 2]; 2] {
        let mut out = [[[0.0; 2]; 2]; 2];
        for (i, oi) in out.iter_mut().enumerate() {
            for (k, oik) in oi.iter_mut().enumerate() {
                for (l, v) in oik.iter_mut().enumerate() {
                    for p in 0..2 {
                        for q in 0..2 {
                            for r in 0..2 {
                                *v += self.t_inv[(i, p)] * g[p][q][r] * self.t[(q, k)] * self.t[(r, l)];
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

/// Frame from the values of a and b at a point.
pub fn frame_from(a: Matrix2<f64>, b: Vector2<f64>, x: [f64; 2]) -> Result<SpecialFrame> {
    let a_inv = a.try_inverse().ok_or(Error::NotPositiveDefinite { x, pivot: 0.0 })?;
    let b_up = a_inv * b;
    let b2 = b.dot(&b_up);
    if !(b2 > 0.0) || b.norm() == 0.0 {
        return Err(Error::ZeroCovector(x));
    }
    let bn = b2.sqrt();
    let e1 = b_up / bn;
    let mut e2 = Vector2::new(-b[1], b[0]);
    e2 /= (e2.transpose() * a * e2)[(0, 0)].sqrt();
    let mut t = Matrix2::from_columns(&[e1, e2]);
    if t.determinant() < 0.0 {
        t.set_column(1, &(-e2));
    }
    let t_inv = t.try_inverse().ok_or(Error::ZeroCovector(x))?;
    Ok(SpecialFrame { x, t, t_inv, b: bn })
}

pub fn special_frame(def: &MetricDef, x: [f64; 2]) -> Result<SpecialFrame> {
    let m = metric_at(def, x)?;
    frame_from(m.a_matrix(), m.b_vector(), x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn adapted_input_gives_identity() {
        let f = frame_from(Matrix2::identity(), Vector2::new(0.7, 0.0), [0.0; 2]).unwrap();
        assert_abs_diff_eq!(f.t, Matrix2::identity(), epsilon = 1e-15);
        assert_eq!(f.b, 0.7);
    }

    #[test]
    fn rotation_case() {
        let f = frame_from(Matrix2::identity(), Vector2::new(0.0, 1.3), [0.0; 2]).unwrap();
        let bt = f.covector([0.0, 1.3]);
        assert!((bt[0] - 1.3).abs() < 1e-12 && bt[1].abs() < 1e-12);
        assert!(f.t.determinant() > 0.0);
    }

    #[test]
    fn defining_equations_for_random_input() {
        use rand::{Rng, SeedableRng};
        let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let l = Matrix2::new(r.gen_range(0.5..2.0), 0.0, r.gen_range(-1.0..1.0), r.gen_range(0.5..2.0));
            let a = l * l.transpose();
            let b = Vector2::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0));
            let f = frame_from(a, b, [0.0; 2]).unwrap();
            assert_abs_diff_eq!(f.t.transpose() * a * f.t, Matrix2::identity(), epsilon = 1e-12);
            let bt = f.covector([b[0], b[1]]);
            assert!((bt[0] - f.b).abs() < 1e-12 && bt[1].abs() < 1e-12);
        }
    }

    #[test]
    fn zero_covector_is_refused() {
        assert!(matches!(
            frame_from(Matrix2::identity(), Vector2::zeros(), [0.0; 2]),
            Err(Error::ZeroCovector(_))
        ));
    }
}
