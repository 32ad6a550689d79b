//! `cigar x S^1(eps)` collapses to the cigar: sampled Gromov-Hausdorff
//! bounds shrink with `eps`, and the correlation dimension tells a curve
//! from a surface.

use ricci_collapse::collapse::{sample_space, SampleConfig, SampleTarget};
use ricci_collapse::gh::{dim_estimate, gh_bound, GhBounds};
use ricci_collapse::metric::{End, RadialProfile, Warped3Metric};

pub struct CollapseRun {
    pub bounds: Vec<(f64, GhBounds)>,
    pub interval_dim: f64,
    pub disk_dim: f64,
}

pub fn run_example() -> ricci_collapse::Result<CollapseRun> {
    let base = RadialProfile::from_fn(0.0, 8.0, 201, |_| 1.0, f64::tanh, End::Smooth, End::Open)?;
    let cfg = SampleConfig { radial_stride: 2, ..SampleConfig::new(64, 0, (0.0, 6.0)) };
    let surface = sample_space(SampleTarget::Surface(&base), &cfg)?;
    let mut bounds = Vec::new();
    for eps in [0.2, 0.1, 0.05] {
        let m = Warped3Metric::product(base.clone(), eps)?;
        let s = sample_space(SampleTarget::Metric(&m), &cfg)?;
        bounds.push((eps, gh_bound(&s.space, &surface.space, 8, 0)));
    }
    let interval = sample_space(SampleTarget::Interval { length: 1.0 }, &SampleConfig::new(256, 0, (0.0, 1.0)))?;
    let disk = RadialProfile::from_fn(0.0, 1.0, 101, |_| 1.0, |r| r, End::Smooth, End::Open)?;
    let disk = sample_space(SampleTarget::Surface(&disk), &SampleConfig::new(256, 0, (0.0, 1.0)))?;
    Ok(CollapseRun {
        bounds,
        interval_dim: dim_estimate(&interval.space)?.dimension,
        disk_dim: dim_estimate(&disk.space)?.dimension,
    })
}

#[allow(dead_code)]
fn main() -> ricci_collapse::Result<()> {
    let r = run_example()?;
    for (eps, b) in &r.bounds {
        println!("eps = {eps:<5} GH in [{:.4e}, {:.4e}]  (4 eps = {})", b.lower, b.upper, 4.0 * eps);
    }
    println!("dimension: interval {:.3}, disk {:.3}", r.interval_dim, r.disk_dim);
    Ok(())
}
