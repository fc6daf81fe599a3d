//! Finite-difference oracle for mixed partial derivatives.
//!
//! Used by tests to cross-check jet propagation. It only evaluates the field
//! as a plain function, so it shares no code path with [`super::Jet`].

/// Central-difference estimate of the mixed partial `alpha` of `f` at `x`,
/// with one Richardson extrapolation step (error O(h^4)).
///
/// `alpha[v]` is the derivative count in variable `v`; the total order must
/// be at most 4.
pub fn finite_diff_oracle<F>(f: F, x: &[f64], alpha: &[u8], h: f64) -> f64
where
    F: Fn(&[f64]) -> f64,
{
    assert_eq!(x.len(), alpha.len());
    assert!(alpha.iter().map(|&a| a as usize).sum::<usize>() <= 4);
    let coarse = central(&f, x, alpha, h);
    let fine = central(&f, x, alpha, 0.5 * h);
    (4.0 * fine - coarse) / 3.0
}

/// Second-order central stencil: offsets (in units of h) and weights,
/// already divided by h^k.
fn stencil(k: u8, h: f64) -> Vec<(f64, f64)> {
    match k {
        0 => vec![(0.0, 1.0)],
        1 => vec![(1.0, 0.5 / h), (-1.0, -0.5 / h)],
        2 => {
            let w = 1.0 / (h * h);
            vec![(1.0, w), (0.0, -2.0 * w), (-1.0, w)]
        }
        3 => {
            let w = 0.5 / (h * h * h);
            vec![(2.0, w), (1.0, -2.0 * w), (-1.0, 2.0 * w), (-2.0, -w)]
        }
        4 => {
            let w = 1.0 / (h * h * h * h);
            vec![
                (2.0, w),
                (1.0, -4.0 * w),
                (0.0, 6.0 * w),
                (-1.0, -4.0 * w),
                (-2.0, w),
            ]
        }
        _ => unreachable!("orders above 4 are not supported"),
    }
}

fn central<F>(f: &F, x: &[f64], alpha: &[u8], h: f64) -> f64
where
    F: Fn(&[f64]) -> f64,
{
    let stencils: Vec<Vec<(f64, f64)>> = alpha.iter().map(|&k| stencil(k, h)).collect();
    let mut point = x.to_vec();
    let mut total = 0.0;
    tensor_sum(f, x, &stencils, 0, 1.0, &mut point, h, &mut total);
    total
}

#[allow(clippy::too_many_arguments)]
fn tensor_sum<F>(
    f: &F,
    x: &[f64],
    stencils: &[Vec<(f64, f64)>],
    var: usize,
    weight: f64,
    point: &mut Vec<f64>,
    h: f64,
    total: &mut f64,
) where
    F: Fn(&[f64]) -> f64,
{
    if var == stencils.len() {
        *total += weight * f(point);
        return;
    }
    for &(off, w) in &stencils[var] {
        point[var] = x[var] + off * h;
        tensor_sum(f, x, stencils, var + 1, weight * w, point, h, total);
    }
    point[var] = x[var];
}
