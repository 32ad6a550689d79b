//! Small interpolation helpers shared by the dilation and gluing code.

/// Cubic Hermite interpolation on `[t0, t1]` with end values and slopes.
pub fn hermite(t0: f64, t1: f64, y0: f64, y1: f64, d0: f64, d1: f64, t: f64) -> f64 {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1
}

/// Index `k` with `xs[k] <= x <= xs[k + 1]`, clamped to the valid range.
pub fn bracket(xs: &[f64], x: f64) -> usize {
    let n = xs.len();
    match xs.partition_point(|&v| v <= x) {
        0 => 0,
        k if k >= n => n - 2,
        k => k - 1,
    }
}

/// Four-point Lagrange (cubic) interpolation on a uniform grid starting at
/// `x0` with spacing `h`. Falls back to one-sided stencils near the edges.
/// Returns `None` outside `[x0, x0 + (n - 1) h]`.
pub fn cubic_uniform(x0: f64, h: f64, ys: &[f64], x: f64) -> Option<f64> {
    let n = ys.len();
    let u = (x - x0) / h;
    let last = (n - 1) as f64;
    if n < 4 || u < -1e-9 || u > last + 1e-9 {
        return None;
    }
    let u = u.clamp(0.0, last);
    let base = (u.floor() as isize - 1).clamp(0, n as isize - 4) as usize;
    let s = u - base as f64;
    let nodes = [0.0, 1.0, 2.0, 3.0];
    let mut acc = 0.0;
    for i in 0..4 {
        let mut w = 1.0;
        for k in 0..4 {
            if k != i {
                w *= (s - nodes[k]) / (nodes[i] - nodes[k]);
            }
        }
        acc += w * ys[base + i];
    }
    Some(acc)
}
