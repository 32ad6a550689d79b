//! Shrinking round sphere: `K(t) = 1 / (1 - 2t)` and the area law
//! `A(t) = 4 pi - 8 pi t`.

use std::f64::consts::PI;

use ricci_collapse::flow::{evolve, FlowConfig};
use ricci_collapse::metric::{gauss_curvature, End, RadialProfile};

pub struct SphereRun {
    pub k_rel_error: f64,
    pub area_rel_error: f64,
}

pub fn run_example() -> ricci_collapse::Result<SphereRun> {
    let p = RadialProfile::from_fn(0.0, PI, 101, |_| 1.0, f64::sin, End::Smooth, End::Smooth)?;
    let cfg = FlowConfig::default();
    let sol = evolve(&p, 0.25, 1000, &cfg)?;
    let k = gauss_curvature(sol.last())?;
    let k_rel_error = (k[k.len() / 2] - 2.0).abs() / 2.0;

    let sol = evolve(&p, 0.4, 200, &cfg)?;
    let a0 = 4.0 * PI;
    let area_rel_error = sol
        .times()
        .iter()
        .zip(sol.areas())
        .map(|(t, a)| (a - (a0 - 8.0 * PI * t)).abs() / a0)
        .fold(0.0, f64::max);
    Ok(SphereRun { k_rel_error, area_rel_error })
}

#[allow(dead_code)]
fn main() -> ricci_collapse::Result<()> {
    let r = run_example()?;
    println!("K(0.25) relative error   {:.3e}", r.k_rel_error);
    println!("area law relative error  {:.3e}", r.area_rel_error);
    Ok(())
}
