//! The virtual limit: local warped windows glued into one rotationally
//! symmetric profile, closed up into a disk, classified and compared with
//! the cigar soliton.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::SurfaceSolution;
use crate::interp::{bracket, cubic_uniform};
use crate::metric::{gauss_curvature, End, RadialProfile, CONE_TOL, MAX_CONE_ORDER, TIP_REGULARITY_TOL};

/// Spacing of window centers, `P_k = 4k`.
pub const WINDOW_PERIOD: f64 = 4.0;
/// Windows are `(4k - 3, 4k + 3)` (and `[0, 3)` at the start).
pub const WINDOW_HALF: f64 = 3.0;
/// Nominal discretisation tolerance of a profile grid.
pub const GRID_TOL: f64 = 1e-3;

/// How the right window of a pair sits on the left one:
/// `f_right(x) = theta_scale * f_left(x + shift)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlapRecord {
    pub shift: f64,
    pub theta_scale: f64,
    /// Max `|f_right - theta_scale f_left|` on the overlap after the fit.
    pub residual: f64,
    pub points: usize,
}

impl OverlapRecord {
    /// Whether the fitted `theta` rescaling is an isometry (`|c1| = 1`).
    pub fn is_isometric(&self, tol: f64) -> bool {
        (self.theta_scale.abs() - 1.0).abs() <= tol
    }
}

/// A profile on a sub-interval in its own local coordinate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileWindow {
    pub profile: RadialProfile,
    pub center_r: f64,
    pub overlap_left: Option<OverlapRecord>,
    pub overlap_right: Option<OverlapRecord>,
}

impl ProfileWindow {
    pub fn new(profile: RadialProfile, center_r: f64) -> Self {
        ProfileWindow { profile, center_r, overlap_left: None, overlap_right: None }
    }
}

/// Cuts `p` into the covering `[0, 3), (1, 7), (5, 11), ...` measured from
/// the first grid point. Window `k` uses the local coordinate `r - 4k`.
pub fn cut_windows(p: &RadialProfile) -> Result<Vec<ProfileWindow>> {
    let r = p.r_grid();
    let n = p.len();
    let r0 = r[0];
    let mut out = Vec::new();
    for k in 0.. {
        let center = WINDOW_PERIOD * k as f64;
        let lo = if k == 0 { 0.0 } else { center - WINDOW_HALF };
        if r0 + lo >= r[n - 1] {
            break;
        }
        let eps = 1e-9 * p.spacing();
        let idx: Vec<usize> = (0..n)
            .filter(|&j| {
                let x = r[j] - r0 - center;
                let left_ok = if k == 0 { x >= -eps } else { x > -WINDOW_HALF + eps };
                left_ok && x < WINDOW_HALF - eps
            })
            .collect();
        if idx.len() < 4 {
            break;
        }
        let (a, b) = (idx[0], idx[idx.len() - 1]);
        let tip = if a == 0 { p.tip() } else { End::Open };
        let end = if b == n - 1 { p.end() } else { End::Open };
        let local: Vec<f64> = r[a..=b].iter().map(|x| x - r0 - center).collect();
        let w = RadialProfile::with_ends(
            local,
            p.phi()[a..=b].to_vec(),
            p.f()[a..=b].to_vec(),
            tip,
            end,
            p.time_stamp(),
        )?;
        out.push(ProfileWindow::new(w, center));
        if b == n - 1 {
            break;
        }
    }
    Ok(out)
}

struct Fit {
    rms: f64,
    c1: f64,
    max_res: f64,
    points: usize,
}

fn fit_at(left: &RadialProfile, right: &RadialProfile, s: f64) -> Option<Fit> {
    let (l0, hl) = (left.r_grid()[0], left.spacing());
    let mut pairs = Vec::new();
    for (x, &fr) in right.r_grid().iter().zip(right.f()) {
        if let Some(fl) = cubic_uniform(l0, hl, left.f(), x + s) {
            pairs.push((fl, fr));
        }
    }
    if pairs.len() < 3 {
        return None;
    }
    let sll: f64 = pairs.iter().map(|(l, _)| l * l).sum();
    let slr: f64 = pairs.iter().map(|(l, r)| l * r).sum();
    let c1 = if sll > 0.0 { slr / sll } else { 1.0 };
    let mut sq = 0.0;
    let mut max_res = 0.0_f64;
    for (l, r) in &pairs {
        let e = r - c1 * l;
        sq += e * e;
        max_res = max_res.max(e.abs());
    }
    Some(Fit { rms: (sq / pairs.len() as f64).sqrt(), c1, max_res, points: pairs.len() })
}

/// Finds `shift` in `search` (scanned at `h/16`, then refined by a parabola
/// through the best three samples) and the least-squares `theta` scale.
/// Near-ties go to the candidate nearest the centre of the bracket.
pub fn overlap_identify(left: &RadialProfile, right: &RadialProfile, search: (f64, f64)) -> Result<OverlapRecord> {
    let (lo, hi) = search;
    if !(hi >= lo) {
        return Err(Error::DomainError(format!("empty shift bracket [{lo}, {hi}]")));
    }
    let step = left.spacing().min(right.spacing()) / 16.0;
    let centre = 0.5 * (lo + hi);
    let kmax = ((hi - lo) / 2.0 / step).floor() as i64;
    // candidates ordered by distance from the centre so ties keep the first
    let mut ks: Vec<i64> = (-kmax..=kmax).collect();
    ks.sort_by_key(|k| (k.abs(), *k));
    let fits: Vec<(i64, Option<Fit>)> = ks.par_iter().map(|&k| (k, fit_at(left, right, centre + k as f64 * step))).collect();
    let mut best: Option<(i64, &Fit)> = None;
    for (k, fit) in &fits {
        if let Some(f) = fit {
            let better = match best {
                None => true,
                Some((_, b)) => f.rms < b.rms * (1.0 - 1e-9) - 1e-15,
            };
            if better {
                best = Some((*k, f));
            }
        }
    }
    let Some((kb, fb)) = best else {
        return Err(Error::NoOverlap(f64::INFINITY));
    };
    let mut shift = centre + kb as f64 * step;
    let mut chosen = Fit { rms: fb.rms, c1: fb.c1, max_res: fb.max_res, points: fb.points };
    let neighbour = |k: i64| fits.iter().find(|(j, _)| *j == k).and_then(|(_, f)| f.as_ref()).map(|f| f.rms * f.rms);
    if let (Some(a), Some(c)) = (neighbour(kb - 1), neighbour(kb + 1)) {
        let b = chosen.rms * chosen.rms;
        let denom = a - 2.0 * b + c;
        if denom > 0.0 {
            let offset = (0.5 * (a - c) / denom).clamp(-1.0, 1.0) * step;
            let s = shift + offset;
            if let Some(f) = fit_at(left, right, s) {
                if f.rms <= chosen.rms {
                    shift = s;
                    chosen = f;
                }
            }
        }
    }
    if chosen.max_res > 10.0 * GRID_TOL {
        return Err(Error::NoOverlap(chosen.max_res));
    }
    Ok(OverlapRecord { shift, theta_scale: chosen.c1, residual: chosen.max_res, points: chosen.points })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlueConfig {
    /// Largest accepted overlap residual.
    pub seam_tol: f64,
    /// Half-width of the shift bracket around the nominal centre offset.
    pub search_half_width: f64,
}

impl Default for GlueConfig {
    fn default() -> Self {
        GlueConfig { seam_tol: 10.0 * GRID_TOL, search_half_width: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlueOutput {
    pub profile: RadialProfile,
    pub overlaps: Vec<OverlapRecord>,
    pub max_residual: f64,
    /// The extension stopped early where `f` reached zero.
    pub halted_at: Option<f64>,
}

/// `C^inf` step from 0 to 1 on `[0, 1]`.
fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    a / (a + b)
}

/// Glues a chain of windows into one profile in the first window's
/// coordinate, blending overlaps with a smooth partition of unity.
pub fn glue(windows: &[ProfileWindow], cfg: &GlueConfig) -> Result<GlueOutput> {
    let first = windows.first().ok_or_else(|| Error::DomainError("no windows to glue".into()))?;
    let overlaps: Vec<OverlapRecord> = (0..windows.len().saturating_sub(1))
        .into_par_iter()
        .map(|k| match windows[k].overlap_right {
            Some(o) => Ok(o),
            None => {
                let d = windows[k + 1].center_r - windows[k].center_r;
                overlap_identify(
                    &windows[k].profile,
                    &windows[k + 1].profile,
                    (d - cfg.search_half_width, d + cfg.search_half_width),
                )
            }
        })
        .collect::<Result<_>>()?;
    for (k, o) in overlaps.iter().enumerate() {
        if o.residual > cfg.seam_tol {
            return Err(Error::SeamMismatch { left: k, right: k + 1, residual: o.residual });
        }
    }
    let mut offset = vec![0.0];
    let mut scale = vec![1.0];
    for o in &overlaps {
        offset.push(offset[offset.len() - 1] + o.shift);
        scale.push(scale[scale.len() - 1] * o.theta_scale);
    }
    let span = |k: usize| {
        let r = windows[k].profile.r_grid();
        (r[0] + offset[k], r[r.len() - 1] + offset[k])
    };
    let spans: Vec<(f64, f64)> = (0..windows.len()).map(span).collect();
    let h = windows.iter().map(|w| w.profile.spacing()).fold(f64::INFINITY, f64::min);
    let start = spans[0].0;
    let stop = spans.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    let n = ((stop - start) / h + 1e-6).floor() as usize + 1;
    let tol = 1e-9 * h;
    let weight = |k: usize, x: f64| -> f64 {
        let (s, e) = spans[k];
        if x < s - tol || x > e + tol {
            return 0.0;
        }
        let mut w = 1.0;
        if k > 0 && spans[k - 1].1 > s {
            w *= smooth_step((x - s) / (spans[k - 1].1 - s));
        }
        if k + 1 < spans.len() && spans[k + 1].0 < e {
            w *= 1.0 - smooth_step((x - spans[k + 1].0) / (e - spans[k + 1].0));
        }
        w
    };
    let mut r = Vec::with_capacity(n);
    let mut phi = Vec::with_capacity(n);
    let mut f = Vec::with_capacity(n);
    for j in 0..n {
        let x = start + j as f64 * h;
        let (mut wsum, mut ps, mut fs) = (0.0, 0.0, 0.0);
        for (k, w) in windows.iter().enumerate() {
            let wk = weight(k, x);
            if wk == 0.0 {
                continue;
            }
            let p = &w.profile;
            let local = (x - offset[k]).clamp(p.r_grid()[0], p.r_grid()[p.len() - 1]);
            let (r0, hk) = (p.r_grid()[0], p.spacing());
            let (Some(pv), Some(fv)) = (cubic_uniform(r0, hk, p.phi(), local), cubic_uniform(r0, hk, p.f(), local)) else {
                continue;
            };
            wsum += wk;
            ps += wk * pv;
            fs += wk * fv / scale[k];
        }
        if wsum == 0.0 {
            return Err(Error::DomainError(format!("no window covers r = {x}")));
        }
        r.push(x);
        phi.push(ps / wsum);
        f.push(fs / wsum);
    }
    let tip = first.profile.tip();
    let mut end = windows[windows.len() - 1].profile.end();
    // stop the extension where f first reaches zero
    let fmax = f.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut halted_at = None;
    if let Some(j) = (1..n).find(|&j| f[j] <= 1e-12 * fmax) {
        if j < n - 1 || !end.is_closed() {
            halted_at = Some(r[j]);
            r.truncate(j + 1);
            phi.truncate(j + 1);
            f.truncate(j + 1);
            f[j] = 0.0;
            end = End::Unresolved;
        }
    }
    if tip.is_closed() && end.is_closed() {
        return Err(Error::TwoClosedEnds);
    }
    let profile = RadialProfile::with_ends(r, phi, f, tip, end, first.profile.time_stamp())?;
    let max_residual = overlaps.iter().map(|o| o.residual).fold(0.0, f64::max);
    Ok(GlueOutput { profile, overlaps, max_residual, halted_at })
}

/// Result of closing a profile into a disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiskExtension {
    pub profile: RadialProfile,
    pub cone_order: Option<u32>,
    /// Measured `f'/phi` at the closing end.
    pub closure_ratio: f64,
    /// Factor folded into `f` to make a near-smooth tip exactly smooth.
    pub theta_fold: f64,
}

/// Re-bases `p` so the end where `f` vanishes is `r = 0` and attaches the
/// closing angle: smooth for `f'/phi ~ 1`, a `D^2/Z_p` cone for `~ 1/p`.
pub fn extend_to_disk(p: &RadialProfile) -> Result<DiskExtension> {
    let n = p.len();
    let fmax = p.f().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let zero = |v: f64| v.abs() <= 1e-12 * fmax;
    let inner = p.tip().is_closed() || zero(p.f()[0]);
    let outer = p.end().is_closed() || zero(p.f()[n - 1]);
    let (mut phi, mut f) = (p.phi().to_vec(), p.f().to_vec());
    match (inner, outer) {
        (true, true) => return Err(Error::TwoClosedEnds),
        (false, false) => return Err(Error::DomainError("f vanishes at neither end".into())),
        (false, true) => {
            phi.reverse();
            f.reverse();
        }
        (true, false) => {}
    }
    let h = p.spacing();
    let r: Vec<f64> = (0..n).map(|j| j as f64 * h).collect();
    let raw = RadialProfile::with_ends(r, phi, f, End::Unresolved, End::Open, p.time_stamp())?;
    let ratio = raw.closure_ratio(false);
    if !(ratio > 0.0) {
        return Err(Error::ClosureFailure(ratio));
    }
    let (order, gap) = (1..=MAX_CONE_ORDER)
        .map(|q| (q, (ratio - 1.0 / q as f64).abs()))
        .fold((1, f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b });
    if gap >= CONE_TOL {
        return Err(Error::ClosureFailure(ratio));
    }
    let (tip, fold) = if order == 1 {
        (End::Smooth, if (ratio - 1.0).abs() > TIP_REGULARITY_TOL { 1.0 / ratio } else { 1.0 })
    } else {
        (End::Cone(order), 1.0)
    };
    let f: Vec<f64> = raw.f().iter().map(|v| v * fold).collect();
    let profile = raw.with_fields(raw.phi().to_vec(), f)?.with_end_states(tip, End::Open)?;
    Ok(DiskExtension { profile, cone_order: (order > 1).then_some(order), closure_ratio: ratio, theta_fold: fold })
}

/// Resamples `p` onto `n` uniform points of radial arclength (so `phi = 1`)
/// with local degree-5 interpolation in `s`.
pub fn arclength_gauge(p: &RadialProfile, n: usize) -> Result<RadialProfile> {
    if n < 4 || p.len() < 6 {
        return Err(Error::GridTooSmall(n.min(p.len()), 6));
    }
    let s = p.arclength();
    let total = s[s.len() - 1];
    let grid: Vec<f64> = (0..n).map(|j| total * j as f64 / (n - 1) as f64).collect();
    resample_arclength(p, &s, grid, p.end())
}

fn resample_arclength(p: &RadialProfile, s: &[f64], grid: Vec<f64>, end: End) -> Result<RadialProfile> {
    // a closed tip makes f odd in s, so reflected nodes keep the stencil centred
    let pad = if p.tip().is_closed() { 3 } else { 0 };
    let mut xs: Vec<f64> = (1..=pad).rev().map(|j| -s[j]).collect();
    let mut ys: Vec<f64> = (1..=pad).rev().map(|j| -p.f()[j]).collect();
    xs.extend_from_slice(s);
    ys.extend_from_slice(p.f());
    let m = xs.len();
    let fs: Vec<f64> = grid
        .iter()
        .map(|&x| {
            let k = bracket(&xs, x);
            let a = k.saturating_sub(2).min(m - 6);
            lagrange(&xs[a..a + 6], &ys[a..a + 6], x)
        })
        .collect();
    let n = grid.len();
    RadialProfile::with_ends(grid, vec![1.0; n], fs, p.tip(), end, p.time_stamp())
}

fn lagrange(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let mut sum = 0.0;
    for i in 0..xs.len() {
        let mut w = 1.0;
        for j in 0..xs.len() {
            if j != i {
                w *= (x - xs[j]) / (xs[i] - xs[j]);
            }
        }
        sum += w * ys[i];
    }
    sum
}

/// Resamples every profile of `sol` to arclength spacing `h_s` on the
/// common interval `[0, shortest total length]`.
pub fn arclength_solution(sol: &SurfaceSolution, h_s: f64) -> Result<SurfaceSolution> {
    if !(h_s > 0.0) {
        return Err(Error::DomainError(format!("arclength spacing {h_s} must be positive")));
    }
    let lengths: Vec<Vec<f64>> = sol.profiles().iter().map(RadialProfile::arclength).collect();
    let len = lengths.iter().map(|s| s[s.len() - 1]).fold(f64::INFINITY, f64::min);
    let n = (len / h_s + 1e-9).floor() as usize + 1;
    if n < 4 {
        return Err(Error::GridTooSmall(n, 4));
    }
    let profiles = sol
        .profiles()
        .par_iter()
        .zip(&lengths)
        .map(|(p, s)| {
            let total = s[s.len() - 1];
            let grid: Vec<f64> = (0..n).map(|j| j as f64 * h_s).collect();
            let end = if total - grid[n - 1] < 1e-9 * total { p.end() } else { End::Open };
            resample_arclength(p, s, grid, end)
        })
        .collect::<Result<Vec<_>>>()?;
    SurfaceSolution::from_parts(profiles, sol.theta_scale().to_vec(), sol.blowup())
}

/// Group descriptor of the local fundamental pseudogroup.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "p")]
pub enum GammaDescriptor {
    Trivial,
    /// `(r, theta, u) -> (r, -theta, -u)`.
    Z2ThetaU,
    /// `(r, theta, u) -> (-r, theta, -u)`, `f` even.
    Z2RU,
    /// `(r, theta, u) -> (-r, -theta, u)`, `f` even.
    Z2RTheta,
    #[serde(rename = "so2")]
    SO2,
    O2,
    Zp(u32),
    D2p(u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LocalCase {
    #[serde(rename = "1i")]
    C1i,
    #[serde(rename = "1ii")]
    C1ii,
    #[serde(rename = "1iii")]
    C1iii,
    #[serde(rename = "1iv")]
    C1iv,
    #[serde(rename = "2ai")]
    C2ai,
    #[serde(rename = "2aii")]
    C2aii,
    #[serde(rename = "2bi")]
    C2bi,
    #[serde(rename = "2bii")]
    C2bii,
}

impl LocalCase {
    pub fn label(self) -> &'static str {
        match self {
            LocalCase::C1i => "1i",
            LocalCase::C1ii => "1ii",
            LocalCase::C1iii => "1iii",
            LocalCase::C1iv => "1iv",
            LocalCase::C2ai => "2ai",
            LocalCase::C2aii => "2aii",
            LocalCase::C2bi => "2bi",
            LocalCase::C2bii => "2bii",
        }
    }
}

/// Identity component `G_inf^0` of the limit pseudogroup.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentityComponent {
    /// `R^2_loc`
    R2Loc,
    /// `R^1_loc x SO(2)`
    #[serde(rename = "r1_loc_times_so2")]
    R1LocTimesSO2,
    /// `R_loc`
    RLoc,
}

/// Local topology of the limit near the point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "p")]
pub enum LocalTopology {
    /// `(a, b)` with `a < 0 < b`
    OpenInterval,
    /// `[0, b)`
    HalfInterval,
    /// `D^2 / Z_p`
    DiskModZp(u32),
    /// `D^2 / D_2p`
    DiskModD2p(u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LocalModel {
    pub case: LocalCase,
    pub gamma: GammaDescriptor,
    pub g_infty0: IdentityComponent,
    pub local_topology: LocalTopology,
}

/// Either a row of the local-model tables or one of the excluded cases.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict")]
pub enum LocalVerdict {
    Model(LocalModel),
    Excluded { m: u32, reason: &'static str },
}

pub const CASE0_REASON: &str = "cannot occur because of the unbounded diameters assumption";
pub const CASE3_REASON: &str = "cannot occur: dim Delta >= 1 forces m = 3 - dim Delta <= 2";

/// Looks up the local model for orbit dimension `m` and group `gamma`.
///
/// `(a, b)` are the constants of the collapsing direction
/// `tau -> (theta + a tau, u + b tau)`; `b = 0` would not collapse the
/// fiber. The `m = 2` rows and the `r`-reflections fix the centre point, so
/// they need `has_fixed_point`.
pub fn classify_local_model(m: u32, gamma: GammaDescriptor, a: f64, b: f64, has_fixed_point: bool) -> Result<LocalVerdict> {
    use GammaDescriptor as G;
    match m {
        0 => return Ok(LocalVerdict::Excluded { m, reason: CASE0_REASON }),
        3 => return Ok(LocalVerdict::Excluded { m, reason: CASE3_REASON }),
        1 | 2 => {}
        _ => return Err(Error::InconsistentInput(format!("orbit dimension m = {m} is not in 0..=3"))),
    }
    if !a.is_finite() || !b.is_finite() || b == 0.0 {
        return Err(Error::InconsistentInput(format!("collapsing direction (a, b) = ({a}, {b}) needs b != 0")));
    }
    let (case, g0, topo) = match (m, gamma) {
        (1, G::Trivial) => (LocalCase::C1i, IdentityComponent::R2Loc, LocalTopology::OpenInterval),
        (1, G::Z2ThetaU) => (LocalCase::C1ii, IdentityComponent::R2Loc, LocalTopology::OpenInterval),
        (1, G::Z2RU) => (LocalCase::C1iii, IdentityComponent::R2Loc, LocalTopology::HalfInterval),
        (1, G::Z2RTheta) => (LocalCase::C1iv, IdentityComponent::R2Loc, LocalTopology::HalfInterval),
        (2, G::SO2) => (LocalCase::C2ai, IdentityComponent::R1LocTimesSO2, LocalTopology::HalfInterval),
        (2, G::O2) => (LocalCase::C2aii, IdentityComponent::R1LocTimesSO2, LocalTopology::HalfInterval),
        (2, G::Zp(p)) if p >= 1 => (LocalCase::C2bi, IdentityComponent::RLoc, LocalTopology::DiskModZp(p)),
        (2, G::D2p(p)) if p >= 1 => (LocalCase::C2bii, IdentityComponent::RLoc, LocalTopology::DiskModD2p(p)),
        _ => {
            return Err(Error::InconsistentInput(format!("no local model with m = {m} and Gamma = {gamma:?}")));
        }
    };
    let needs_fixed = m == 2 || matches!(case, LocalCase::C1iii | LocalCase::C1iv);
    if needs_fixed && !has_fixed_point {
        return Err(Error::InconsistentInput(format!("case {} requires a fixed point at the centre", case.label())));
    }
    Ok(LocalVerdict::Model(LocalModel { case, gamma, g_infty0: g0, local_topology: topo }))
}

/// Isotropy type of a sampled orbifold point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "p")]
pub enum PointKind {
    Regular,
    Cone(u32),
    Dihedral(u32),
}

impl PointKind {
    pub fn is_singular(self) -> bool {
        match self {
            PointKind::Regular => false,
            PointKind::Cone(p) => p > 1,
            PointKind::Dihedral(_) => true,
        }
    }
}

impl From<End> for PointKind {
    fn from(e: End) -> Self {
        match e {
            End::Cone(p) => PointKind::Cone(p),
            _ => PointKind::Regular,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbifoldPoint {
    pub position: f64,
    pub kind: PointKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularReport {
    pub singular: Vec<OrbifoldPoint>,
    pub min_curvature: f64,
    /// More than one singular point together with positive curvature: the
    /// input data are inconsistent with the at-most-one rule.
    pub rule_violation: bool,
}

/// Lists singular points and checks the at-most-one rule under `K > 0`.
pub fn detect_singular_points(points: &[OrbifoldPoint], curvature: &[f64]) -> SingularReport {
    let singular: Vec<OrbifoldPoint> = points.iter().copied().filter(|p| p.kind.is_singular()).collect();
    let min_curvature = curvature.iter().cloned().fold(f64::INFINITY, f64::min);
    let rule_violation = singular.len() > 1 && min_curvature > 0.0;
    SingularReport { singular, min_curvature, rule_violation }
}

/// Comparison of a closed-tip solution with the cigar soliton.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CigarReport {
    /// Max over times of the normalised profile deviation.
    pub deviation: f64,
    pub deviations: Vec<f64>,
    pub times: Vec<f64>,
    pub k_tip: Vec<f64>,
    /// `max |K_tip(t) / K_tip(t0) - 1|`.
    pub k_tip_drift: f64,
    /// `(s, K / K_tip)` at the last time.
    pub series: Vec<[f64; 2]>,
    pub trusted_points: usize,
}

/// Points excluded at the open end of the trusted window.
pub const DEFAULT_TRIM: usize = 5;

fn profile_deviation(p: &RadialProfile, trim: usize) -> Result<(f64, f64, Vec<[f64; 2]>)> {
    if !p.tip().is_closed() {
        return Err(Error::DomainError("cigar comparison needs a closed tip".into()));
    }
    let k = gauss_curvature(p)?;
    let s = p.arclength();
    let n = p.len().saturating_sub(trim);
    if n < 2 {
        return Err(Error::DomainError("trusted window is empty".into()));
    }
    let kmin = k[..n].iter().cloned().fold(f64::INFINITY, f64::min);
    if !(kmin > 0.0) {
        return Err(Error::NotPositive(kmin));
    }
    let k_tip = k[0];
    let sigma = (0.5 * k_tip).sqrt();
    let mut dev = 0.0_f64;
    let mut series = Vec::with_capacity(n);
    for j in 0..n {
        let norm = k[j] / k_tip;
        let sech = 1.0 / (sigma * s[j]).cosh();
        dev = dev.max((norm - sech * sech).abs());
        series.push([s[j], norm]);
    }
    Ok((dev, k_tip, series))
}

/// Fits the cigar `K = K_tip sech^2(sqrt(K_tip/2) s)` at each recorded time
/// and reports the worst normalised deviation and the drift of `K_tip`.
pub fn cigar_compare(sol: &SurfaceSolution, trim: usize) -> Result<CigarReport> {
    cigar_compare_profiles(sol.profiles(), trim)
}

/// As [`cigar_compare`] for profiles that need not share a grid.
pub fn cigar_compare_profiles(profiles: &[RadialProfile], trim: usize) -> Result<CigarReport> {
    if profiles.is_empty() {
        return Err(Error::DomainError("no profiles to compare".into()));
    }
    let per: Vec<(f64, f64, Vec<[f64; 2]>)> =
        profiles.par_iter().map(|p| profile_deviation(p, trim)).collect::<Result<_>>()?;
    let deviations: Vec<f64> = per.iter().map(|x| x.0).collect();
    let k_tip: Vec<f64> = per.iter().map(|x| x.1).collect();
    let k_tip_drift = k_tip.iter().map(|k| (k / k_tip[0] - 1.0).abs()).fold(0.0, f64::max);
    let series = per.last().map(|x| x.2.clone()).unwrap_or_default();
    Ok(CigarReport {
        deviation: deviations.iter().cloned().fold(0.0, f64::max),
        trusted_points: series.len(),
        deviations,
        times: profiles.iter().map(RadialProfile::time_stamp).collect(),
        k_tip,
        k_tip_drift,
        series,
    })
}

/// Single-profile comparison.
pub fn cigar_compare_profile(p: &RadialProfile, trim: usize) -> Result<CigarReport> {
    cigar_compare_profiles(std::slice::from_ref(p), trim)
}
