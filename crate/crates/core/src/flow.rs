//! Ricci flow of rotationally symmetric surfaces.
//!
//! In two dimensions the flow is `dg/dt = -2 K g`, which on the warped form
//! `phi^2 dr^2 + f^2 dtheta^2` with a fixed coordinate grid reads
//! `phi_t = -K phi`, `f_t = -K f`. Integration is explicit RK4 with `K`
//! recomputed at every stage.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{curvature_raw, gauss_curvature, CurvatureSpectrum, End, RadialProfile, Warped3Metric};

/// Knobs of the explicit integrator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FlowConfig {
    /// Fraction of the stability limit used for each step.
    pub cfl_fraction: f64,
    /// `max |K|` above which the run is declared singular.
    pub blowup_ceiling: f64,
    /// Rescale `f` after every step so a smooth tip keeps `f'/phi = 1` exactly.
    pub renormalize_tip: bool,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig { cfl_fraction: 0.2, blowup_ceiling: 1e6, renormalize_tip: true }
    }
}

/// Largest admissible step: `cfl * min((h min phi)^2, 1 / max|K|)`.
///
/// The first term is the diffusive limit of `f_t = f_rr / phi^2 + ...`, the
/// second keeps the reaction term `-K f` resolved.
pub fn stable_dt(p: &RadialProfile, cfg: &FlowConfig) -> Result<f64> {
    let k = gauss_curvature(p)?;
    Ok(stable_dt_with(p, &k, cfg))
}

fn stable_dt_with(p: &RadialProfile, k: &[f64], cfg: &FlowConfig) -> f64 {
    let min_phi = p.phi().iter().cloned().fold(f64::INFINITY, f64::min);
    let max_k = k.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let diffusive = (p.spacing() * min_phi).powi(2);
    let reactive = if max_k > 0.0 { 1.0 / max_k } else { f64::INFINITY };
    cfg.cfl_fraction * diffusive.min(reactive)
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Result of one step: the new profile and the `theta` rescaling applied to
/// restore a smooth tip (1 when none was needed).
#[derive(Clone, Debug)]
pub struct StepOutcome {
    pub profile: RadialProfile,
    pub theta_scale: f64,
}

/// One RK4 step of size `dt`.
pub fn step(p: &RadialProfile, dt: f64, cfg: &FlowConfig) -> Result<StepOutcome> {
    let k0 = gauss_curvature(p)?;
    let max_k = max_abs(&k0);
    if !max_k.is_finite() || max_k > cfg.blowup_ceiling {
        return Err(Error::CurvatureBlowup { max_k, time: p.time_stamp() });
    }
    let bound = stable_dt_with(p, &k0, cfg);
    if !(dt > 0.0) || dt > bound * (1.0 + 1e-9) {
        return Err(Error::CflViolation { dt, bound });
    }

    let h = p.spacing();
    let (tc, ec) = (p.tip().is_closed(), p.end().is_closed());
    let n = p.len();
    let rhs = |phi: &[f64], f: &[f64], k: Option<&[f64]>| -> (Vec<f64>, Vec<f64>) {
        let owned;
        let k = match k {
            Some(k) => k,
            None => {
                owned = curvature_raw(h, phi, f, tc, ec);
                &owned
            }
        };
        let dphi = (0..n).map(|j| -k[j] * phi[j]).collect();
        let df = (0..n).map(|j| -k[j] * f[j]).collect();
        (dphi, df)
    };
    let axpy = |x: &[f64], a: f64, y: &[f64]| -> Vec<f64> {
        x.iter().zip(y).map(|(x, y)| x + a * y).collect()
    };

    let (phi0, f0) = (p.phi(), p.f());
    let (a1, b1) = rhs(phi0, f0, Some(&k0));
    let (phi1, f1) = (axpy(phi0, 0.5 * dt, &a1), axpy(f0, 0.5 * dt, &b1));
    let (a2, b2) = rhs(&phi1, &f1, None);
    let (phi2, f2) = (axpy(phi0, 0.5 * dt, &a2), axpy(f0, 0.5 * dt, &b2));
    let (a3, b3) = rhs(&phi2, &f2, None);
    let (phi3, f3) = (axpy(phi0, dt, &a3), axpy(f0, dt, &b3));
    let (a4, b4) = rhs(&phi3, &f3, None);

    let combine = |y: &[f64], k1: &[f64], k2: &[f64], k3: &[f64], k4: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|j| y[j] + dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]))
            .collect()
    };
    let phi_new = combine(phi0, &a1, &a2, &a3, &a4);
    let mut f_new = combine(f0, &b1, &b2, &b3, &b4);
    if tc {
        f_new[0] = 0.0;
    }
    if ec {
        f_new[n - 1] = 0.0;
    }

    let next = RadialProfile::with_ends(
        p.r_grid().to_vec(),
        phi_new,
        f_new,
        // closure is checked after renormalisation below
        if tc { End::Unresolved } else { End::Open },
        if ec { End::Unresolved } else { End::Open },
        p.time_stamp() + dt,
    )?;

    let mut theta_scale = 1.0;
    let mut next = next;
    if cfg.renormalize_tip && p.tip() == End::Smooth && !ec {
        let ratio = next.closure_ratio(false);
        theta_scale = 1.0 / ratio;
        let f = next.f().iter().map(|v| v * theta_scale).collect();
        next = next.with_fields(next.phi().to_vec(), f)?;
    }
    let profile = next.with_end_states(p.tip(), p.end())?;
    Ok(StepOutcome { profile, theta_scale })
}

/// Marker left by a run that hit the curvature ceiling.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Blowup {
    pub time: f64,
    pub max_curvature: f64,
}

/// A recorded Ricci-flow trajectory on a shared grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceSolution {
    times: Vec<f64>,
    profiles: Vec<RadialProfile>,
    /// Cumulative `theta` rescaling applied up to each recorded time.
    theta_scale: Vec<f64>,
    blowup: Option<Blowup>,
}

impl SurfaceSolution {
    pub fn new(profiles: Vec<RadialProfile>) -> Result<Self> {
        let n = profiles.len();
        Self::from_parts(profiles, vec![1.0; n], None)
    }

    pub fn from_parts(
        profiles: Vec<RadialProfile>,
        theta_scale: Vec<f64>,
        blowup: Option<Blowup>,
    ) -> Result<Self> {
        let first = profiles
            .first()
            .ok_or_else(|| Error::InvalidProfile("empty solution".into()))?;
        if theta_scale.len() != profiles.len() {
            return Err(Error::InvalidProfile("theta_scale length mismatch".into()));
        }
        for w in profiles.windows(2) {
            if !(w[1].time_stamp() > w[0].time_stamp()) {
                return Err(Error::InvalidProfile("times must increase strictly".into()));
            }
        }
        for p in &profiles {
            if p.r_grid() != first.r_grid() || p.tip() != first.tip() || p.end().is_closed() != first.end().is_closed()
            {
                return Err(Error::InvalidProfile(
                    "profiles must share grid and tip type".into(),
                ));
            }
        }
        let times = profiles.iter().map(|p| p.time_stamp()).collect();
        Ok(SurfaceSolution { times, profiles, theta_scale, blowup })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn profiles(&self) -> &[RadialProfile] {
        &self.profiles
    }

    pub fn theta_scale(&self) -> &[f64] {
        &self.theta_scale
    }

    pub fn blowup(&self) -> Option<Blowup> {
        self.blowup
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> &RadialProfile {
        self.profiles.last().expect("non-empty by construction")
    }

    /// Area of each recorded profile.
    pub fn areas(&self) -> Vec<f64> {
        self.profiles.iter().map(RadialProfile::area).collect()
    }

    /// Gauss curvature of each recorded profile.
    pub fn curvatures(&self) -> Result<Vec<Vec<f64>>> {
        self.profiles.iter().map(gauss_curvature).collect()
    }

    /// `max |phi - mean| / mean` per time: zero while the radial coefficient
    /// stays spatially constant.
    pub fn phi_variation(&self) -> Vec<f64> {
        self.profiles
            .iter()
            .map(|p| {
                let mean = p.phi().iter().sum::<f64>() / p.len() as f64;
                p.phi().iter().fold(0.0_f64, |m, v| m.max((v - mean).abs())) / mean
            })
            .collect()
    }
}

/// Integrates from `p.time_stamp()` to `t_end`, recording every
/// `output_stride`-th step and the final state.
///
/// A curvature blowup ends the run early; the partial solution carries a
/// [`Blowup`] marker.
pub fn evolve(p: &RadialProfile, t_end: f64, output_stride: usize, cfg: &FlowConfig) -> Result<SurfaceSolution> {
    if !(t_end > p.time_stamp()) {
        return Err(Error::DomainError(format!(
            "t_end {t_end} must exceed the start time {}",
            p.time_stamp()
        )));
    }
    let stride = output_stride.max(1);
    let mut profiles = vec![p.clone()];
    let mut scales = vec![1.0];
    let mut current = p.clone();
    let mut scale = 1.0;
    let mut steps = 0usize;
    let mut blowup = None;
    loop {
        let k = gauss_curvature(&current)?;
        let max_k = max_abs(&k);
        if !max_k.is_finite() || max_k > cfg.blowup_ceiling {
            blowup = Some(Blowup { time: current.time_stamp(), max_curvature: max_k });
            break;
        }
        let remaining = t_end - current.time_stamp();
        let mut dt = stable_dt_with(&current, &k, cfg);
        let last = dt >= remaining;
        if last {
            dt = remaining;
        }
        let out = match step(&current, dt, cfg) {
            Ok(out) => out,
            Err(Error::CurvatureBlowup { max_k, time }) => {
                blowup = Some(Blowup { time, max_curvature: max_k });
                break;
            }
            Err(e) => return Err(e),
        };
        current = out.profile;
        scale *= out.theta_scale;
        steps += 1;
        if last {
            current = current.with_time_stamp(t_end);
        }
        if last || steps % stride == 0 {
            profiles.push(current.clone());
            scales.push(scale);
        }
        if last {
            break;
        }
    }
    if blowup.is_some() && profiles.last().map(|q| q.time_stamp()) != Some(current.time_stamp()) {
        profiles.push(current);
        scales.push(scale);
    }
    SurfaceSolution::from_parts(profiles, scales, blowup)
}

/// A time-indexed family of three-metrics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiftedSolution {
    pub times: Vec<f64>,
    pub metrics: Vec<Warped3Metric>,
}

impl LiftedSolution {
    pub fn spectra(&self) -> Result<Vec<CurvatureSpectrum>> {
        self.metrics.iter().map(Warped3Metric::local_spectrum).collect()
    }
}

/// Product of the evolving surface with a static circle. The flat factor is
/// stationary under Ricci flow, so this is again a solution.
pub fn lift_product(sol: &SurfaceSolution, fiber_length: f64) -> Result<LiftedSolution> {
    let metrics = sol
        .profiles()
        .iter()
        .map(|p| Warped3Metric::product(p.clone(), fiber_length))
        .collect::<Result<Vec<_>>>()?;
    Ok(LiftedSolution { times: sol.times().to_vec(), metrics })
}
