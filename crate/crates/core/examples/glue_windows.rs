//! Cut a profile into overlapping windows, recover the overlap shifts,
//! reglue, and close the result into a disk.

use ricci_collapse::metric::{gauss_curvature, quotient_metric, End, RadialProfile};
use ricci_collapse::virtual_limit::{cut_windows, extend_to_disk, glue, GlueConfig};

pub struct GlueRun {
    pub h: f64,
    pub reconstruction_error: f64,
    pub shifts: Vec<f64>,
    pub cone_order: Option<u32>,
    /// Minimum Gauss curvature of the `(a, b) = (1, 1)` quotient of the cigar.
    pub quotient_min_k: f64,
}

pub fn run_example() -> ricci_collapse::Result<GlueRun> {
    let p = RadialProfile::from_fn(0.0, 16.0, 401, |_| 1.0, f64::tanh, End::Smooth, End::Open)?;
    let windows = cut_windows(&p)?;
    let g = glue(&windows, &GlueConfig::default())?;
    let reconstruction_error = g.profile.f().iter().zip(p.f()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let disk = extend_to_disk(&g.profile)?;
    let cigar = RadialProfile::from_fn(0.0, 8.0, 201, |_| 1.0, f64::tanh, End::Smooth, End::Open)?;
    let q = quotient_metric(&cigar, 1.0, 1.0, 1.0)?;
    let quotient_min_k = gauss_curvature(&q)?.into_iter().fold(f64::INFINITY, f64::min);
    Ok(GlueRun {
        h: p.spacing(),
        reconstruction_error,
        shifts: g.overlaps.iter().map(|o| o.shift).collect(),
        cone_order: disk.cone_order,
        quotient_min_k,
    })
}

#[allow(dead_code)]
fn main() -> ricci_collapse::Result<()> {
    let r = run_example()?;
    println!("reglue error {:.3e} (2h^2 = {:.3e})", r.reconstruction_error, 2.0 * r.h * r.h);
    println!("overlap shifts {:?}", r.shifts);
    println!("cone order {:?}; quotient min K {:.4e}", r.cone_order, r.quotient_min_k);
    Ok(())
}
