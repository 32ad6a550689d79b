//! Hamilton-Ivey pinching: the scalar threshold, the `lambda3` lower
//! bound, and the detector on lifted flows and on a planted violation.

use std::f64::consts::{E, PI};

use ricci_collapse::flow::{evolve, lift_product, FlowConfig};
use ricci_collapse::metric::{CurvatureSpectrum, End, RadialProfile};
use ricci_collapse::pinching::{check_pinching, hamilton_ivey_threshold, lambda3_lower_bound, PinchingParams};

pub struct PinchingRun {
    pub thresholds: [f64; 2],
    pub lambda3: [f64; 3],
    pub lifted_violations: usize,
    pub planted_violations: usize,
}

pub fn run_example() -> ricci_collapse::Result<PinchingRun> {
    let unit = PinchingParams::new(1.0, 0.0)?;
    let thresholds = [
        hamilton_ivey_threshold(-1.0, &unit, 0.0)?,
        hamilton_ivey_threshold(-2.0 * E.powi(3) / (1.0 + 2.0 * 3.0), &PinchingParams::new(2.0, 0.0)?, 3.0)?,
    ];
    let lambda3 = [
        lambda3_lower_bound(-E * E, &unit, 0.0)?,
        lambda3_lower_bound(-E.powi(4), &unit, 0.0)?,
        lambda3_lower_bound(-1.0, &unit, 0.0)?,
    ];

    let cfg = FlowConfig::default();
    let sphere = RadialProfile::from_fn(0.0, PI, 101, |_| 1.0, f64::sin, End::Smooth, End::Smooth)?;
    let cigar = RadialProfile::from_fn(0.0, 8.0, 201, |_| 1.0, f64::tanh, End::Smooth, End::Open)?;
    let mut lifted_violations = 0;
    for (p, t) in [(&sphere, 0.2), (&cigar, 0.5)] {
        let sol = evolve(p, t, 100, &cfg)?;
        let spectra = lift_product(&sol, 0.1)?.spectra()?;
        lifted_violations += check_pinching(sol.times(), &spectra, &PinchingParams::new(1.0, 1e-9)?).violations.len();
    }

    // lambda = (-e^4, 0, 0) at t = 1/e - 1: the threshold is 0 > R = -e^4
    let planted = CurvatureSpectrum::from_triples([[-E.powi(4), 0.0, 0.0], [-1.0, 0.0, 0.0]]);
    let rep = check_pinching(&[1.0 / E - 1.0], &[planted], &unit);
    Ok(PinchingRun { thresholds, lambda3, lifted_violations, planted_violations: rep.violations.len() })
}

#[allow(dead_code)]
fn main() -> ricci_collapse::Result<()> {
    let r = run_example()?;
    println!("Hamilton-Ivey thresholds {:?}", r.thresholds);
    println!("lambda3 lower bounds     {:?}", r.lambda3);
    println!("violations on lifted sphere/cigar flows: {}", r.lifted_violations);
    println!("violations on the planted field:         {}", r.planted_violations);
    Ok(())
}
