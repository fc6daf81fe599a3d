//! Finite-difference oracle shared by the integration tests.

#![allow(dead_code)]

fn binomial(n: u8, k: u8) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Tensor-product central difference for the partial `a` with step h.
pub fn central_difference(f: &dyn Fn(&[f64]) -> f64, x: &[f64; 2], a: [u8; 2], h: f64) -> f64 {
    let mut acc = 0.0;
    for i in 0..=a[0] {
        for j in 0..=a[1] {
            let sign = if (a[0] - i + a[1] - j).is_multiple_of(2) { 1.0 } else { -1.0 };
            let q = [
                x[0] + (i as f64 - a[0] as f64 / 2.0) * h,
                x[1] + (j as f64 - a[1] as f64 / 2.0) * h,
            ];
            acc += sign * binomial(a[0], i) * binomial(a[1], j) * f(&q);
        }
    }
    acc / h.powi((a[0] + a[1]) as i32)
}

/// Ridders' polynomial extrapolation of central differences to h = 0.
/// Returns the estimate and its error estimate.
pub fn ridders(f: &dyn Fn(&[f64]) -> f64, x: &[f64; 2], a: [u8; 2], h0: f64) -> (f64, f64) {
    const SHRINK: f64 = 1.4;
    const TABLE: usize = 12;
    let mut t = vec![vec![0.0; TABLE]; TABLE];
    let mut h = h0;
    t[0][0] = central_difference(f, x, a, h);
    let (mut best, mut err) = (t[0][0], f64::INFINITY);
    for i in 1..TABLE {
        h /= SHRINK;
        t[0][i] = central_difference(f, x, a, h);
        let mut fac = SHRINK * SHRINK;
        for j in 1..=i {
            t[j][i] = (t[j - 1][i] * fac - t[j - 1][i - 1]) / (fac - 1.0);
            fac *= SHRINK * SHRINK;
            let e = (t[j][i] - t[j - 1][i]).abs().max((t[j][i] - t[j - 1][i - 1]).abs());
            if e <= err {
                err = e;
                best = t[j][i];
            }
        }
        if (t[i][i] - t[i - 1][i - 1]).abs() >= 2.0 * err {
            break;
        }
    }
    (best, err)
}

/// The Ridders estimate with the smallest error estimate over a few starting steps.
pub fn extrapolated_partial(f: &dyn Fn(&[f64]) -> f64, x: &[f64; 2], a: [u8; 2]) -> f64 {
    [0.02, 0.05, 0.1, 0.2]
        .iter()
        .map(|&h| ridders(f, x, a, h))
        .min_by(|p, q| p.1.total_cmp(&q.1))
        .expect("nonempty step list")
        .0
}
