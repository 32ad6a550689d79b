//! Gauss curvature of the cigar profile `f = tanh r` against `2 sech^2 r`,
//! on two grids to show second-order convergence.

use ricci_collapse::metric::{gauss_curvature, End, RadialProfile};

/// Max error of `K` for each spacing `h`.
pub fn run_example() -> ricci_collapse::Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for h in [0.02, 0.01] {
        let n = (4.0 / h) as usize + 1;
        let p = RadialProfile::from_fn(0.0, 4.0, n, |_| 1.0, f64::tanh, End::Smooth, End::Open)?;
        let k = gauss_curvature(&p)?;
        let err = p
            .r_grid()
            .iter()
            .zip(&k)
            .map(|(r, k)| (k - 2.0 / r.cosh().powi(2)).abs())
            .fold(0.0, f64::max);
        out.push((h, err));
    }
    Ok(out)
}

#[allow(dead_code)]
fn main() -> ricci_collapse::Result<()> {
    let errs = run_example()?;
    for (h, e) in &errs {
        println!("h = {h:<5} max |K - 2 sech^2| = {e:.3e}  ({:.2} h^2)", e / (h * h));
    }
    println!("ratio {:.3}", errs[0].1 / errs[1].1);
    Ok(())
}
