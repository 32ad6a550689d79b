//! Point-time selection and parabolic rescaling for Type IIb dilations.
//!
//! Given a recorded curvature history and a window end `T`, we pick the
//! spacetime point maximising `t (T - t) |Rm|` and blow the solution up by
//! `g_i(t) = K_i g(t_i + t / K_i)`. The rescaled curvature then obeys
//! `|Rm| <= 1/(1-eps) * alpha/(alpha + t) * omega/(omega - t)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{lift_product, LiftedSolution, SurfaceSolution};
use crate::interp::{bracket, hermite};
use crate::metric::{gauss_curvature, CurvatureSpectrum, End, RadialProfile};

const TIME_TOL: f64 = 1e-12;

/// Curvature spectra on a fixed spatial grid at a sequence of times, with the
/// radial arclength positions of the grid points at each time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureHistory {
    pub times: Vec<f64>,
    pub spectra: Vec<CurvatureSpectrum>,
    pub positions: Vec<Vec<f64>>,
}

impl CurvatureHistory {
    pub fn new(times: Vec<f64>, spectra: Vec<CurvatureSpectrum>, positions: Vec<Vec<f64>>) -> Result<Self> {
        if times.is_empty() || spectra.len() != times.len() || positions.len() != times.len() {
            return Err(Error::InconsistentInput(format!(
                "history lengths: {} times, {} spectra, {} position rows",
                times.len(),
                spectra.len(),
                positions.len()
            )));
        }
        let n = spectra[0].len();
        if n == 0 || spectra.iter().any(|s| s.len() != n) || positions.iter().any(|p| p.len() != n) {
            return Err(Error::InconsistentInput("ragged spatial grid in history".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InconsistentInput("history times must increase strictly".into()));
        }
        Ok(CurvatureHistory { times, spectra, positions })
    }

    /// History of spatial `|Rm|` fields, each point carrying eigenvalues
    /// `(0, 0, rm)`. Points sit `spacing` apart.
    pub fn from_rm_fields(times: Vec<f64>, fields: Vec<Vec<f64>>, spacing: f64) -> Result<Self> {
        let spectra: Vec<CurvatureSpectrum> = fields
            .iter()
            .map(|row| CurvatureSpectrum::from_triples(row.iter().map(|&v| [0.0, 0.0, v])))
            .collect();
        let positions = fields
            .iter()
            .map(|row| (0..row.len()).map(|j| j as f64 * spacing).collect())
            .collect();
        Self::new(times, spectra, positions)
    }

    pub fn from_lifted(sol: &LiftedSolution) -> Result<Self> {
        let spectra = sol.spectra()?;
        let positions = sol.metrics.iter().map(|m| m.base.arclength()).collect();
        Self::new(sol.times.clone(), spectra, positions)
    }

    /// History of the product lift `sol x S^1`. The fiber length does not
    /// enter the curvature.
    pub fn from_surface(sol: &SurfaceSolution) -> Result<Self> {
        Self::from_lifted(&lift_product(sol, 1.0)?)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn points(&self) -> usize {
        self.spectra[0].len()
    }

    /// Spectrum at time `t`: the record itself when `t` is a recorded time,
    /// otherwise cubic Hermite in time with finite-difference slopes.
    pub fn spectrum_at(&self, t: f64) -> Result<CurvatureSpectrum> {
        let (t0, t1) = (self.times[0], self.times[self.len() - 1]);
        if t < t0 - TIME_TOL || t > t1 + TIME_TOL {
            return Err(Error::WindowOutOfRange { lo: t, hi: t, t0, t1 });
        }
        if let Some(k) = self.record_index(t) {
            return Ok(self.spectra[k].clone());
        }
        let k = bracket(&self.times, t);
        let slope = |i: usize, pick: fn(&CurvatureSpectrum) -> &Vec<f64>, j: usize| -> f64 {
            let (a, b) = (i.saturating_sub(1), (i + 1).min(self.len() - 1));
            (pick(&self.spectra[b])[j] - pick(&self.spectra[a])[j]) / (self.times[b] - self.times[a])
        };
        let field = |pick: fn(&CurvatureSpectrum) -> &Vec<f64>, j: usize| -> f64 {
            hermite(
                self.times[k],
                self.times[k + 1],
                pick(&self.spectra[k])[j],
                pick(&self.spectra[k + 1])[j],
                slope(k, pick, j),
                slope(k + 1, pick, j),
                t,
            )
        };
        let triples = (0..self.points()).map(|j| {
            [field(|s| &s.lambda1, j), field(|s| &s.lambda2, j), field(|s| &s.lambda3, j)]
        });
        Ok(CurvatureSpectrum::from_triples(triples.collect::<Vec<_>>()))
    }

    fn record_index(&self, t: f64) -> Option<usize> {
        let scale = self.times.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        self.times.iter().position(|&s| (s - t).abs() <= TIME_TOL * scale)
    }
}

/// Chosen dilation point-time and the derived scales.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DilationRecord {
    pub point_index: usize,
    pub t_i: f64,
    #[serde(rename = "K_i")]
    pub k_i: f64,
    #[serde(rename = "T_i")]
    pub t_window_end: f64,
    pub epsilon_i: f64,
    /// `t_i K_i`.
    pub alpha_i: f64,
    /// `(T_i - t_i) K_i`.
    pub omega_i: f64,
    /// Selected value over the sup of `t (T - t) |Rm|` on the recorded grid.
    pub selection_ratio: f64,
}

impl DilationRecord {
    pub fn new(point_index: usize, t_i: f64, k_i: f64, t_window_end: f64, epsilon_i: f64) -> Result<Self> {
        if !(0.0 < t_i && t_i < t_window_end) || !(k_i > 0.0) || !(0.0..1.0).contains(&epsilon_i) {
            return Err(Error::DomainError(format!(
                "dilation record needs 0 < t_i < T_i, K_i > 0, 0 <= eps < 1; got t_i={t_i}, T_i={t_window_end}, K_i={k_i}, eps={epsilon_i}"
            )));
        }
        Ok(DilationRecord {
            point_index,
            t_i,
            k_i,
            t_window_end,
            epsilon_i,
            alpha_i: t_i * k_i,
            omega_i: (t_window_end - t_i) * k_i,
            selection_ratio: 1.0,
        })
    }
}

/// Maximises `t (T - t) |Rm|` over the recorded grid with `t <= T`.
///
/// Ties go to the smallest time index, then the smallest point index. The
/// scan is split by time slice; the reduction is order independent.
pub fn select_point(history: &CurvatureHistory, t_window_end: f64, epsilon: f64) -> Result<DilationRecord> {
    let (t0, t1) = (history.times[0], history.times[history.len() - 1]);
    if t0 > TIME_TOL || t1 < t_window_end - TIME_TOL * t_window_end.abs().max(1.0) {
        return Err(Error::WindowOutOfRange { lo: 0.0, hi: t_window_end, t0, t1 });
    }
    let best = history
        .times
        .par_iter()
        .enumerate()
        .filter(|(_, &t)| t <= t_window_end)
        .filter_map(|(ti, &t)| {
            let w = t * (t_window_end - t);
            history.spectra[ti]
                .rm_norm
                .iter()
                .enumerate()
                .map(|(j, &rm)| (w * rm, ti, j))
                .reduce(better)
        })
        .reduce_with(better);
    match best {
        Some((v, ti, j)) if v > 0.0 => {
            let t = history.times[ti];
            let k = history.spectra[ti].rm_norm[j];
            DilationRecord::new(j, t, k, t_window_end, epsilon)
        }
        _ => Err(Error::FlatHistory),
    }
}

fn better(a: (f64, usize, usize), b: (f64, usize, usize)) -> (f64, usize, usize) {
    use std::cmp::Ordering::*;
    match a.0.total_cmp(&b.0) {
        Greater => a,
        Less => b,
        Equal => {
            if (a.1, a.2) <= (b.1, b.2) {
                a
            } else {
                b
            }
        }
    }
}

/// `1/(1-eps) * alpha/(alpha+t) * omega/(omega-t)` on `(-alpha, omega)`.
pub fn rescaled_bound(rec: &DilationRecord, t: f64) -> Result<f64> {
    let (a, w) = (rec.alpha_i, rec.omega_i);
    if !(t > -a && t < w) {
        return Err(Error::DomainError(format!("t = {t} outside (-{a}, {w})")));
    }
    Ok(a / (a + t) * (w / (w - t)) / (1.0 - rec.epsilon_i))
}

fn check_window(times: &[f64], center: f64, k: f64, beta: f64, psi: f64) -> Result<(f64, f64)> {
    if !(k > 0.0) {
        return Err(Error::DomainError(format!("scale K = {k} must be positive")));
    }
    if !(beta <= 0.0 && 0.0 <= psi && beta < psi) {
        return Err(Error::DomainError(format!("need beta <= 0 <= psi, got [{beta}, {psi}]")));
    }
    let (lo, hi) = (center + beta / k, center + psi / k);
    let (t0, t1) = (times[0], times[times.len() - 1]);
    let slack = TIME_TOL * t1.abs().max(1.0);
    if lo < t0 - slack || hi > t1 + slack {
        return Err(Error::WindowOutOfRange { lo, hi, t0, t1 });
    }
    Ok((lo.max(t0), hi.min(t1)))
}

/// Rescaled sample times: every recorded time inside the window, the
/// window ends, and the new origin.
fn sample_times(times: &[f64], center: f64, lo: f64, hi: f64) -> Vec<f64> {
    let scale = times.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let mut out: Vec<f64> = vec![lo, center, hi];
    out.extend(times.iter().copied().filter(|&t| t >= lo && t <= hi));
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() <= TIME_TOL * scale);
    // snap to recorded times so those samples are not interpolated
    for t in &mut out {
        if let Some(&s) = times.iter().find(|&&s| (s - *t).abs() <= TIME_TOL * scale) {
            *t = s;
        }
    }
    out
}

/// `K g(t_c + t / K)` on `[beta, psi]` for a surface solution.
///
/// Off-grid times use cubic Hermite interpolation with the Ricci-flow
/// right-hand side as slopes, applied in a common `theta` gauge.
pub fn rescale_about(sol: &SurfaceSolution, center: f64, k: f64, beta: f64, psi: f64) -> Result<SurfaceSolution> {
    let times = sol.times();
    let (lo, hi) = check_window(times, center, k, beta, psi)?;
    let root_k = k.sqrt();
    let mut profiles = Vec::new();
    let mut scales = Vec::new();
    let mut prev: Option<f64> = None;
    for t in sample_times(times, center, lo, hi) {
        let tau = (t - center) * k;
        // identical rescaled times can arise from rounding at tiny K
        if prev.is_some_and(|p| tau <= p) {
            continue;
        }
        prev = Some(tau);
        let (p, scale) = profile_at(sol, t)?;
        let phi = p.phi().iter().map(|v| v * root_k).collect();
        let f = p.f().iter().map(|v| v * root_k).collect();
        profiles.push(p.with_fields(phi, f)?.with_time_stamp(tau));
        scales.push(scale);
    }
    SurfaceSolution::from_parts(profiles, scales, None)
}

/// Rescales a surface solution about a selected point-time.
pub fn rescale(sol: &SurfaceSolution, rec: &DilationRecord, beta: f64, psi: f64) -> Result<SurfaceSolution> {
    rescale_about(sol, rec.t_i, rec.k_i, beta, psi)
}

/// Rescales a curvature history: spectra scale by `1/K`, lengths by `sqrt K`.
pub fn rescale_history(h: &CurvatureHistory, rec: &DilationRecord, beta: f64, psi: f64) -> Result<CurvatureHistory> {
    let (center, k) = (rec.t_i, rec.k_i);
    let (lo, hi) = check_window(&h.times, center, k, beta, psi)?;
    let mut times = Vec::new();
    let mut spectra = Vec::new();
    let mut positions = Vec::new();
    for t in sample_times(&h.times, center, lo, hi) {
        let tau = (t - center) * k;
        if times.last().is_some_and(|&p: &f64| tau <= p) {
            continue;
        }
        times.push(tau);
        spectra.push(h.spectrum_at(t)?.scaled(1.0 / k));
        let (pa, pb, w) = if h.len() == 1 {
            (&h.positions[0], &h.positions[0], 0.0)
        } else {
            let i = bracket(&h.times, t);
            let (a, b) = (h.times[i], h.times[i + 1]);
            (&h.positions[i], &h.positions[i + 1], ((t - a) / (b - a)).clamp(0.0, 1.0))
        };
        positions.push(pa.iter().zip(pb).map(|(x, y)| ((1.0 - w) * x + w * y) * k.sqrt()).collect());
    }
    CurvatureHistory::new(times, spectra, positions)
}

/// The recorded profile at `t`, or a Hermite interpolant. Also returns the
/// cumulative `theta` scale of the result.
fn profile_at(sol: &SurfaceSolution, t: f64) -> Result<(RadialProfile, f64)> {
    let times = sol.times();
    let scale_t = times.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    if let Some(i) = times.iter().position(|&s| (s - t).abs() <= TIME_TOL * scale_t) {
        return Ok((sol.profiles()[i].clone(), sol.theta_scale()[i]));
    }
    let i = bracket(times, t);
    let (pa, pb) = (&sol.profiles()[i], &sol.profiles()[i + 1]);
    let (sa, sb) = (sol.theta_scale()[i], sol.theta_scale()[i + 1]);
    // undo the theta renormalisation so both ends are one Ricci-flow solution
    let fa: Vec<f64> = pa.f().iter().map(|v| v / sa).collect();
    let fb: Vec<f64> = pb.f().iter().map(|v| v / sb).collect();
    let ka = gauss_curvature(pa)?;
    let kb = gauss_curvature(pb)?;
    let (ta, tb) = (times[i], times[i + 1]);
    let n = pa.len();
    let phi: Vec<f64> = (0..n)
        .map(|j| hermite(ta, tb, pa.phi()[j], pb.phi()[j], -ka[j] * pa.phi()[j], -kb[j] * pb.phi()[j], t))
        .collect();
    let mut f: Vec<f64> = (0..n).map(|j| hermite(ta, tb, fa[j], fb[j], -ka[j] * fa[j], -kb[j] * fb[j], t)).collect();
    let (tip, end) = (pa.tip(), pa.end());
    if tip.is_closed() {
        f[0] = 0.0;
    }
    if end.is_closed() {
        f[n - 1] = 0.0;
    }
    let loose = |e: End| if e.is_closed() { End::Unresolved } else { End::Open };
    let raw = RadialProfile::with_ends(pa.r_grid().to_vec(), phi, f, loose(tip), loose(end), t)?;
    // the recorded profiles are gauged so a smooth tip closes with ratio 1
    let gauge = if tip == End::Smooth && !end.is_closed() { 1.0 / raw.closure_ratio(false) } else { 1.0 };
    let f = raw.f().iter().map(|v| v * gauge).collect();
    let out = raw.with_fields(raw.phi().to_vec(), f)?.with_end_states(tip, end)?;
    Ok((out, gauge))
}

/// Result of a dilatability probe.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DilatableReport {
    /// Max of `|Rm| / K_i` over the ball and time window.
    pub c: f64,
    /// The requested ball reaches past the truncated domain; `c` is then
    /// computed on the clipped ball.
    pub ball_out_of_grid: bool,
    pub ball_lo: usize,
    pub ball_hi: usize,
    pub times_used: usize,
}

/// Bounds `|Rm| / K_i` on the ball of radius `rho / sqrt K_i` about `x_i`
/// (measured at `t_i`) over the times `t_i + [beta, psi] / K_i`.
pub fn dilatable_check(
    history: &CurvatureHistory,
    rec: &DilationRecord,
    beta: f64,
    psi: f64,
    rho: f64,
    closed_tip: bool,
) -> Result<DilatableReport> {
    if !(rho > 0.0) {
        return Err(Error::DomainError(format!("radius rho = {rho} must be positive")));
    }
    let (lo, hi) = check_window(&history.times, rec.t_i, rec.k_i, beta, psi)?;
    let n = history.points();
    if rec.point_index >= n {
        return Err(Error::InconsistentInput(format!("point {} of {n}", rec.point_index)));
    }
    let ti = (0..history.len())
        .min_by(|&a, &b| (history.times[a] - rec.t_i).abs().total_cmp(&(history.times[b] - rec.t_i).abs()))
        .expect("non-empty history");
    let s = &history.positions[ti];
    let radius = rho / rec.k_i.sqrt();
    let sx = s[rec.point_index];
    let inside: Vec<usize> = (0..n).filter(|&j| (s[j] - sx).abs() <= radius).collect();
    let (ball_lo, ball_hi) = (inside[0], inside[inside.len() - 1]);
    // a closed tip is an interior point of the surface, so only open ends truncate
    let out_left = !closed_tip && sx - radius < s[0];
    let out_right = sx + radius > s[n - 1];
    let mut c = 0.0_f64;
    let mut used = 0;
    for t in sample_times(&history.times, rec.t_i, lo, hi) {
        let spec = history.spectrum_at(t)?;
        used += 1;
        for j in ball_lo..=ball_hi {
            c = c.max(spec.rm_norm[j] / rec.k_i);
        }
    }
    Ok(DilatableReport { c, ball_out_of_grid: out_left || out_right, ball_lo, ball_hi, times_used: used })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{evolve, FlowConfig};
    use std::f64::consts::PI;

    fn grid(t0: f64, t1: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| t0 + (t1 - t0) * i as f64 / (n - 1) as f64).collect()
    }

    fn synthetic(times: &[f64], points: usize, rm: impl Fn(f64, usize) -> f64) -> CurvatureHistory {
        let fields = times.iter().map(|&t| (0..points).map(|j| rm(t, j)).collect()).collect();
        CurvatureHistory::from_rm_fields(times.to_vec(), fields, 0.1).unwrap()
    }

    #[test]
    fn constant_history_picks_midpoint() {
        let times = grid(0.0, 10.0, 41);
        let h = synthetic(&times, 5, |_, _| 1.0);
        let rec = select_point(&h, 10.0, 0.0).unwrap();
        assert_eq!(rec.t_i, 5.0);
        assert_eq!(rec.point_index, 0);
        assert_eq!(rec.selection_ratio, 1.0);
    }

    #[test]
    fn spike_is_selected() {
        let times = grid(0.0, 4.0, 9);
        let h = synthetic(&times, 7, |_, j| if j == 4 { 3.0 } else { 1.0 });
        assert_eq!(select_point(&h, 4.0, 0.1).unwrap().point_index, 4);
    }

    #[test]
    fn exponential_matches_scan_and_is_scale_invariant() {
        let times = grid(0.0, 10.0, 1001);
        let h = synthetic(&times, 3, |t, j| t.exp() * (1.0 + 0.1 * j as f64));
        let rec = select_point(&h, 10.0, 0.0).unwrap();
        let (mut best, mut arg) = (f64::NEG_INFINITY, (0, 0));
        for (i, &t) in times.iter().enumerate() {
            for j in 0..3 {
                let v = t * (10.0 - t) * h.spectra[i].rm_norm[j];
                if v > best {
                    best = v;
                    arg = (i, j);
                }
            }
        }
        assert_eq!((rec.point_index, rec.t_i), (arg.1, times[arg.0]));
        let scaled = synthetic(&times, 3, |t, j| 7.5 * t.exp() * (1.0 + 0.1 * j as f64));
        let r2 = select_point(&scaled, 10.0, 0.0).unwrap();
        assert_eq!((r2.point_index, r2.t_i), (rec.point_index, rec.t_i));
    }

    #[test]
    fn flat_history_is_rejected() {
        let h = synthetic(&grid(0.0, 1.0, 5), 3, |_, _| 0.0);
        assert_eq!(select_point(&h, 1.0, 0.0), Err(Error::FlatHistory));
        let h = synthetic(&grid(0.0, 1.0, 5), 3, |_, _| 1.0);
        assert!(matches!(select_point(&h, 2.0, 0.0), Err(Error::WindowOutOfRange { .. })));
    }

    #[test]
    fn alpha_grows_with_window() {
        let times = grid(0.0, 10.0, 2001);
        let h = synthetic(&times, 2, |t, _| t.exp());
        let alphas: Vec<f64> = [6.0, 8.0, 10.0].iter().map(|&t| select_point(&h, t, 0.0).unwrap().alpha_i).collect();
        assert!(alphas.windows(2).all(|w| w[1] > w[0]), "{alphas:?}");
    }

    #[test]
    fn bound_values() {
        let rec = DilationRecord::new(0, 1.0, 10.0, 2.0, 0.0).unwrap();
        assert!((rescaled_bound(&rec, 5.0).unwrap() - 4.0 / 3.0).abs() < 1e-15);
        let rec = DilationRecord::new(0, 1.0, 10.0, 2.0, 0.25).unwrap();
        assert!((rescaled_bound(&rec, 0.0).unwrap() - 4.0 / 3.0).abs() < 1e-15);
        assert!(rescaled_bound(&rec, 9.999999).unwrap() > 1e5);
        assert!(rescaled_bound(&rec, 10.0).is_err());
        assert!(rescaled_bound(&rec, -10.0).is_err());
    }

    #[test]
    fn rescaled_history_respects_bound() {
        let times = grid(0.0, 10.0, 1001);
        let h = synthetic(&times, 4, |t, j| t.exp() * (1.0 + 0.2 * (j as f64).sin()));
        let rec = select_point(&h, 10.0, 0.0).unwrap();
        let r = rescale_history(&h, &rec, -rec.alpha_i / 2.0, rec.omega_i / 2.0).unwrap();
        let zero = r.times.iter().position(|&t| t == 0.0).unwrap();
        assert!((r.spectra[zero].rm_norm[rec.point_index] - 1.0).abs() < 1e-6);
        for (t, s) in r.times.iter().zip(&r.spectra) {
            let b = rescaled_bound(&rec, *t).unwrap();
            assert!(s.rm_norm.iter().all(|&v| v <= b + 1e-8), "t = {t}");
        }
    }

    #[test]
    fn record_serializes_all_fields() {
        let rec = DilationRecord::new(3, 1.0, 2.0, 4.0, 0.1).unwrap();
        let v = serde_json::to_value(rec).unwrap();
        for key in ["point_index", "t_i", "K_i", "T_i", "epsilon_i", "alpha_i", "omega_i"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        let back: DilationRecord = serde_json::from_value(v).unwrap();
        assert_eq!(back, rec);
    }

    fn sphere_solution() -> SurfaceSolution {
        let p = RadialProfile::from_fn(0.0, PI, 201, |_| 1.0, f64::sin, End::Smooth, End::Smooth).unwrap();
        evolve(&p, 0.3, 40, &FlowConfig::default()).unwrap()
    }

    #[test]
    fn sphere_rescaling_matches_closed_form() {
        let sol = sphere_solution();
        let h = CurvatureHistory::from_surface(&sol).unwrap();
        let rec = select_point(&h, 0.3, 0.0).unwrap();
        let out = rescale(&sol, &rec, -0.3, 0.3).unwrap();
        let mid = 100;
        for p in out.profiles() {
            let tau = p.time_stamp();
            let k = gauss_curvature(p).unwrap()[mid];
            // the lift has |Rm| = 2K, so K_i = 2 K(t_i)
            let expect = 1.0 / (1.0 - 2.0 * (rec.t_i + tau / rec.k_i)) / rec.k_i;
            assert!(((k - expect) / expect).abs() < 1e-3, "tau {tau}: {k} vs {expect}");
        }
        let zero = out.profiles().iter().find(|p| p.time_stamp() == 0.0).unwrap();
        let k0 = gauss_curvature(zero).unwrap()[rec.point_index];
        assert!((2.0 * k0 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn unit_scale_only_shifts_time() {
        let sol = sphere_solution();
        let t_c = sol.times()[3];
        let out = rescale_about(&sol, t_c, 1.0, -t_c, 0.3 - t_c).unwrap();
        for p in out.profiles() {
            let i = sol.times().iter().position(|&t| (t - t_c - p.time_stamp()).abs() < 1e-12).unwrap();
            assert_eq!(p.phi(), sol.profiles()[i].phi());
            assert_eq!(p.f(), sol.profiles()[i].f());
        }
    }

    #[test]
    fn rescaling_round_trips() {
        let sol = sphere_solution();
        let (t_c, k) = (0.1234, 3.7);
        let once = rescale_about(&sol, t_c, k, -0.2, 0.3).unwrap();
        let back = rescale_about(&once, 0.0, 1.0 / k, -0.2 / k, 0.3 / k).unwrap();
        for p in back.profiles() {
            let (q, _) = profile_at(&sol, t_c + p.time_stamp()).unwrap();
            let err = p.f().iter().zip(q.f()).chain(p.phi().iter().zip(q.phi())).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
            assert!(err < 2e-6, "t {}: {err}", p.time_stamp());
        }
    }

    #[test]
    fn dilatable_constant_and_spike() {
        let times = grid(0.0, 1.0, 11);
        // constant in space, K(t) = 1/(1 - t/2)
        let h = synthetic(&times, 21, |t, _| 1.0 / (1.0 - 0.5 * t));
        let rec = DilationRecord::new(10, 0.5, h.spectra[5].rm_norm[10], 1.0, 0.0).unwrap();
        let r = dilatable_check(&h, &rec, -0.3 * rec.k_i, 0.5 * rec.k_i, 0.5, false).unwrap();
        assert!((r.c - (1.0 / 0.5) / (1.0 / 0.75)).abs() < 1e-12, "{r:?}");
        assert!(!r.ball_out_of_grid);
        let spike = synthetic(&times, 21, |t, j| if t > 0.75 && j == 11 { 2.0 } else { 1.0 });
        let rec = DilationRecord::new(10, 0.5, 1.0, 1.0, 0.0).unwrap();
        let r = dilatable_check(&spike, &rec, -0.2, 0.4, 0.15, false).unwrap();
        assert_eq!(r.c, 2.0);
        let r = dilatable_check(&spike, &rec, -0.2, 0.4, 5.0, false).unwrap();
        assert!(r.ball_out_of_grid);
    }
}
