//! Discrete rotationally symmetric metrics and their pointwise curvature.
//!
//! A surface metric is stored as `phi(r)^2 dr^2 + f(r)^2 dtheta^2` on a uniform
//! grid in `r`. Three-dimensional metrics are products (or twisted quotients)
//! of such a surface with a circle, and their curvature-operator spectra are
//! derived from the surface Gauss curvature.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default tolerance on `|f'(tip)/phi(tip) - 1|` for a smooth tip.
pub const TIP_REGULARITY_TOL: f64 = 1e-3;
/// Tolerance on `|f'(tip)/phi(tip) - 1/p|` for a cone point of order `p`.
pub const CONE_TOL: f64 = 0.02;
/// Largest cone order searched for.
pub const MAX_CONE_ORDER: u32 = 12;

const UNIFORM_TOL: f64 = 1e-8;

/// State of one end of the radial grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "order")]
pub enum End {
    /// `f > 0` at the boundary point; the grid is a truncation.
    Open,
    /// `f = 0` and `f'/phi = 1`: a smooth rotation fixed point.
    Smooth,
    /// `f = 0` and `f'/phi = 1/p`: a `D^2/Z_p` cone point.
    Cone(u32),
    /// `f = 0` but the closing angle has not been checked yet.
    Unresolved,
}

impl End {
    pub fn is_closed(self) -> bool {
        !matches!(self, End::Open)
    }

    pub fn cone_order(self) -> Option<u32> {
        match self {
            End::Cone(p) => Some(p),
            _ => None,
        }
    }
}

/// A rotationally symmetric surface metric `phi^2 dr^2 + f^2 dtheta^2` at one time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    r_grid: Vec<f64>,
    phi: Vec<f64>,
    f: Vec<f64>,
    tip: End,
    end: End,
    time_stamp: f64,
}

impl RadialProfile {
    /// Builds a profile whose inner end is closed (`f[0] = 0`, smooth tip) when
    /// `closed_tip` is set and open otherwise. The outer end is open.
    pub fn new(
        r_grid: Vec<f64>,
        phi: Vec<f64>,
        f: Vec<f64>,
        closed_tip: bool,
        time_stamp: f64,
    ) -> Result<Self> {
        let tip = if closed_tip { End::Smooth } else { End::Open };
        Self::with_ends(r_grid, phi, f, tip, End::Open, time_stamp)
    }

    /// Builds a profile with explicit end states.
    pub fn with_ends(
        r_grid: Vec<f64>,
        phi: Vec<f64>,
        mut f: Vec<f64>,
        tip: End,
        end: End,
        time_stamp: f64,
    ) -> Result<Self> {
        let n = r_grid.len();
        if n < 4 {
            return Err(Error::GridTooSmall(n, 4));
        }
        if phi.len() != n || f.len() != n {
            return Err(Error::InvalidProfile(format!(
                "length mismatch: r {n}, phi {}, f {}",
                phi.len(),
                f.len()
            )));
        }
        if r_grid.iter().chain(&phi).chain(&f).any(|v| !v.is_finite()) || !time_stamp.is_finite() {
            return Err(Error::InvalidProfile("non-finite sample".into()));
        }
        let h = (r_grid[n - 1] - r_grid[0]) / (n - 1) as f64;
        if h <= 0.0 {
            return Err(Error::InvalidProfile("r_grid is not increasing".into()));
        }
        for (j, w) in r_grid.windows(2).enumerate() {
            if ((w[1] - w[0]) - h).abs() > UNIFORM_TOL * h.max(r_grid[n - 1].abs()) {
                return Err(Error::InvalidProfile(format!(
                    "r_grid is not uniform at index {j}"
                )));
            }
        }
        if let Some(j) = phi.iter().position(|&p| p <= 0.0) {
            return Err(Error::DegenerateMetric(format!("phi[{j}] = {} <= 0", phi[j])));
        }
        let scale = f.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1e-300);
        let zero = |v: f64| v.abs() <= 1e-12 * scale;
        for (closed, idx, name) in [(tip.is_closed(), 0, "tip"), (end.is_closed(), n - 1, "end")] {
            if closed {
                if !zero(f[idx]) {
                    return Err(Error::InvalidProfile(format!(
                        "closed {name} requires f = 0, found {}",
                        f[idx]
                    )));
                }
                f[idx] = 0.0;
            } else if f[idx] <= 0.0 {
                return Err(Error::DegenerateMetric(format!(
                    "f = {} at the open {name}",
                    f[idx]
                )));
            }
        }
        if let Some(j) = (1..n - 1).find(|&j| f[j] <= 0.0) {
            return Err(Error::DegenerateMetric(format!("f[{j}] = {} <= 0", f[j])));
        }
        let p = RadialProfile { r_grid, phi, f, tip, end, time_stamp };
        p.check_end_regularity(TIP_REGULARITY_TOL)?;
        Ok(p)
    }

    /// Samples `phi` and `f` on `n` uniform points of `[r0, r1]`.
    pub fn from_fn(
        r0: f64,
        r1: f64,
        n: usize,
        phi: impl Fn(f64) -> f64,
        f: impl Fn(f64) -> f64,
        tip: End,
        end: End,
    ) -> Result<Self> {
        let r = uniform_grid(r0, r1, n);
        let phis = r.iter().map(|&x| phi(x)).collect();
        let fs = r.iter().map(|&x| f(x)).collect();
        Self::with_ends(r, phis, fs, tip, end, 0.0)
    }

    /// Checks the closing angle at every closed end against its declared state.
    pub fn check_end_regularity(&self, tol: f64) -> Result<()> {
        for (state, at_end) in [(self.tip, false), (self.end, true)] {
            let ratio = self.closure_ratio(at_end);
            match state {
                End::Smooth if (ratio - 1.0).abs() > tol => {
                    return Err(Error::InvalidProfile(format!(
                        "smooth closure requires f'/phi = 1, found {ratio:.6}"
                    )))
                }
                End::Cone(p) if p < 2 || (ratio - 1.0 / p as f64).abs() >= CONE_TOL => {
                    return Err(Error::InvalidProfile(format!(
                        "cone order {p} requires f'/phi = 1/{p}, found {ratio:.6}"
                    )))
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// `|f'/phi|` at the inner (`at_end = false`) or outer boundary point, from a
    /// third-order one-sided stencil pointing into the grid.
    pub fn closure_ratio(&self, at_end: bool) -> f64 {
        let h = self.spacing();
        let n = self.len();
        let (v, p0) = if at_end {
            let v = [self.f[n - 1], self.f[n - 2], self.f[n - 3], self.f[n - 4]];
            (v, self.phi[n - 1])
        } else {
            ([self.f[0], self.f[1], self.f[2], self.f[3]], self.phi[0])
        };
        let d = (-11.0 * v[0] + 18.0 * v[1] - 9.0 * v[2] + 2.0 * v[3]) / (6.0 * h);
        d / p0
    }

    pub fn r_grid(&self) -> &[f64] {
        &self.r_grid
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn f(&self) -> &[f64] {
        &self.f
    }

    pub fn len(&self) -> usize {
        self.r_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r_grid.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        let n = self.len();
        (self.r_grid[n - 1] - self.r_grid[0]) / (n - 1) as f64
    }

    pub fn tip(&self) -> End {
        self.tip
    }

    pub fn end(&self) -> End {
        self.end
    }

    pub fn closed_tip(&self) -> bool {
        self.tip.is_closed()
    }

    pub fn cone_order(&self) -> Option<u32> {
        self.tip.cone_order()
    }

    pub fn time_stamp(&self) -> f64 {
        self.time_stamp
    }

    pub fn with_time_stamp(mut self, t: f64) -> Self {
        self.time_stamp = t;
        self
    }

    /// Replaces `phi` and `f` keeping grid, ends and time stamp.
    pub fn with_fields(&self, phi: Vec<f64>, f: Vec<f64>) -> Result<Self> {
        Self::with_ends(self.r_grid.clone(), phi, f, self.tip, self.end, self.time_stamp)
    }

    /// Same data, relabelled end states. Used when closing angles are resolved.
    pub fn with_end_states(&self, tip: End, end: End) -> Result<Self> {
        Self::with_ends(
            self.r_grid.clone(),
            self.phi.clone(),
            self.f.clone(),
            tip,
            end,
            self.time_stamp,
        )
    }

    /// Radial arclength from the first grid point, by the trapezoidal rule.
    pub fn arclength(&self) -> Vec<f64> {
        let h = self.spacing();
        let mut s = Vec::with_capacity(self.len());
        s.push(0.0);
        for j in 1..self.len() {
            s.push(s[j - 1] + 0.5 * h * (self.phi[j] + self.phi[j - 1]));
        }
        s
    }

    /// Area `2 pi int phi f dr` (trapezoidal).
    pub fn area(&self) -> f64 {
        let h = self.spacing();
        let w: Vec<f64> = self.phi.iter().zip(&self.f).map(|(p, f)| p * f).collect();
        let n = w.len();
        let inner: f64 = w[1..n - 1].iter().sum();
        2.0 * std::f64::consts::PI * h * (inner + 0.5 * (w[0] + w[n - 1]))
    }
}

fn cubic_ghost(v0: f64, v1: f64, v2: f64, v3: f64) -> f64 {
    4.0 * v0 - 6.0 * v1 + 4.0 * v2 - v3
}

/// `n` uniform points on `[a, b]`.
pub fn uniform_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    let h = (b - a) / (n.max(2) - 1) as f64;
    (0..n).map(|j| a + h * j as f64).collect()
}

/// Gauss curvature `K = -(1/(f phi)) d/dr[(1/phi) df/dr]` at every grid point.
///
/// Interior points use the compact flux stencil with midpoint `phi`; boundary
/// points use ghost values (cubic extrapolation at open ends, odd/even
/// reflection at closed ends). At a closed end `K` is the even extrapolation
/// `(4 K_1 - K_2) / 3` of its neighbours.
pub fn gauss_curvature(p: &RadialProfile) -> Result<Vec<f64>> {
    let n = p.len();
    if n < 5 {
        return Err(Error::GridTooSmall(n, 5));
    }
    Ok(curvature_raw(p.spacing(), &p.phi, &p.f, p.tip.is_closed(), p.end.is_closed()))
}

/// Curvature kernel on bare slices; callers guarantee `len >= 5` and positivity.
pub(crate) fn curvature_raw(h: f64, phi: &[f64], f: &[f64], tip_closed: bool, end_closed: bool) -> Vec<f64> {
    let n = phi.len();
    let (gl, gr) = ghosts(phi, f, tip_closed, end_closed);
    let phi_at = |j: isize| -> f64 {
        if j < 0 {
            gl[0]
        } else if j as usize >= n {
            gr[0]
        } else {
            phi[j as usize]
        }
    };
    let f_at = |j: isize| -> f64 {
        if j < 0 {
            gl[1]
        } else if j as usize >= n {
            gr[1]
        } else {
            f[j as usize]
        }
    };
    let mut k = vec![0.0; n];
    for (j, kj) in k.iter_mut().enumerate() {
        let jj = j as isize;
        let f0 = f_at(jj);
        if f0 == 0.0 {
            continue;
        }
        let (fm, fp) = (f_at(jj - 1), f_at(jj + 1));
        let (pm, p0, pp) = (phi_at(jj - 1), phi_at(jj), phi_at(jj + 1));
        let flux_p = (fp - f0) / (0.5 * (p0 + pp));
        let flux_m = (f0 - fm) / (0.5 * (pm + p0));
        *kj = -(flux_p - flux_m) / (h * h * f0 * p0);
    }
    if tip_closed {
        k[0] = (4.0 * k[1] - k[2]) / 3.0;
    }
    if end_closed {
        k[n - 1] = (4.0 * k[n - 2] - k[n - 3]) / 3.0;
    }
    k
}

/// Ghost values one step outside each boundary, `([phi, f] left, [phi, f] right)`.
fn ghosts(phi: &[f64], f: &[f64], tip_closed: bool, end_closed: bool) -> ([f64; 2], [f64; 2]) {
    let n = phi.len();
    let left = if tip_closed {
        [phi[1], -f[1]]
    } else {
        [cubic_ghost(phi[0], phi[1], phi[2], phi[3]), cubic_ghost(f[0], f[1], f[2], f[3])]
    };
    let right = if end_closed {
        [phi[n - 2], -f[n - 2]]
    } else {
        [
            cubic_ghost(phi[n - 1], phi[n - 2], phi[n - 3], phi[n - 4]),
            cubic_ghost(f[n - 1], f[n - 2], f[n - 3], f[n - 4]),
        ]
    };
    (left, right)
}

/// Surface scalar curvature `R = 2K`.
pub fn surface_scalar(p: &RadialProfile) -> Result<Vec<f64>> {
    Ok(gauss_curvature(p)?.into_iter().map(|k| 2.0 * k).collect())
}

/// A surface profile times a circle of circumference `fiber_length`,
/// optionally quotiented by the twisted action `(r, theta + a t, u + b t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Warped3Metric {
    pub base: RadialProfile,
    pub fiber_length: f64,
    pub twist_a: f64,
    pub twist_b: f64,
}

impl Warped3Metric {
    pub fn product(base: RadialProfile, fiber_length: f64) -> Result<Self> {
        Self::twisted(base, fiber_length, 0.0, 0.0)
    }

    pub fn twisted(base: RadialProfile, fiber_length: f64, a: f64, b: f64) -> Result<Self> {
        if !(fiber_length > 0.0 && fiber_length.is_finite()) {
            return Err(Error::DomainError(format!("fiber length {fiber_length} must be positive")));
        }
        Ok(Warped3Metric { base, fiber_length, twist_a: a, twist_b: b })
    }

    pub fn is_product(&self) -> bool {
        self.twist_a == 0.0 && self.twist_b == 0.0
    }

    /// Curvature spectrum of the local geometry. A twisted quotient by a
    /// discrete translation is locally isometric to the product, so both cases
    /// share the product spectrum.
    pub fn local_spectrum(&self) -> Result<CurvatureSpectrum> {
        product_spectrum_of(&self.base)
    }

    /// Gauss curvature of the orbit-space metric of the twisted action.
    pub fn quotient_curvature(&self) -> Result<Vec<f64>> {
        let q = quotient_metric(&self.base, self.twist_a, self.twist_b, self.fiber_length)?;
        gauss_curvature(&q)
    }
}

/// Per-point eigenvalues `lambda1 <= lambda2 <= lambda3` of the curvature operator.
///
/// Each eigenvalue is twice a sectional curvature.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureSpectrum {
    pub lambda1: Vec<f64>,
    pub lambda2: Vec<f64>,
    pub lambda3: Vec<f64>,
    pub rm_norm: Vec<f64>,
    pub scalar: Vec<f64>,
}

impl CurvatureSpectrum {
    /// Sorts each triple and derives the norm and scalar curvature.
    pub fn from_triples(triples: impl IntoIterator<Item = [f64; 3]>) -> Self {
        let mut s = CurvatureSpectrum {
            lambda1: Vec::new(),
            lambda2: Vec::new(),
            lambda3: Vec::new(),
            rm_norm: Vec::new(),
            scalar: Vec::new(),
        };
        for mut t in triples {
            t.sort_by(f64::total_cmp);
            s.lambda1.push(t[0]);
            s.lambda2.push(t[1]);
            s.lambda3.push(t[2]);
            s.rm_norm.push((t[0] * t[0] + t[1] * t[1] + t[2] * t[2]).sqrt());
            s.scalar.push(t[0] + t[1] + t[2]);
        }
        s
    }

    pub fn len(&self) -> usize {
        self.lambda1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda1.is_empty()
    }

    pub fn triple(&self, j: usize) -> [f64; 3] {
        [self.lambda1[j], self.lambda2[j], self.lambda3[j]]
    }

    /// Multiplies every eigenvalue by `s > 0`.
    pub fn scaled(&self, s: f64) -> Self {
        Self::from_triples((0..self.len()).map(|j| {
            let t = self.triple(j);
            [t[0] * s, t[1] * s, t[2] * s]
        }))
    }
}

/// Spectrum of an untwisted product `Sigma^2 x S^1(eps)`: `(0, 0, 2K)` sorted.
pub fn spectrum_product(m: &Warped3Metric) -> Result<CurvatureSpectrum> {
    if !m.is_product() {
        return Err(Error::DomainError(
            "spectrum_product needs an untwisted product metric".into(),
        ));
    }
    product_spectrum_of(&m.base)
}

fn product_spectrum_of(base: &RadialProfile) -> Result<CurvatureSpectrum> {
    let k = gauss_curvature(base)?;
    Ok(CurvatureSpectrum::from_triples(k.into_iter().map(|k| [0.0, 0.0, 2.0 * k])))
}

/// Orbit-space metric of `Sigma x R` under `(r, theta, u) -> (r, theta + a t, u + b t)`:
/// same `phi`, warping `F = f / sqrt(1 + (a/b)^2 f^2)`.
pub fn quotient_metric(p: &RadialProfile, a: f64, b: f64, fiber_length: f64) -> Result<RadialProfile> {
    if b == 0.0 {
        return Err(Error::ZeroB);
    }
    if !(fiber_length > 0.0) {
        return Err(Error::DomainError(format!("fiber length {fiber_length} must be positive")));
    }
    let c2 = (a / b) * (a / b);
    let f = p.f.iter().map(|&f| f / (1.0 + c2 * f * f).sqrt()).collect();
    p.with_fields(p.phi.clone(), f)
}

/// `R = lambda1 + lambda2 + lambda3` pointwise.
pub fn scalar_from_spectrum(s: &CurvatureSpectrum) -> Vec<f64> {
    (0..s.len())
        .map(|j| s.lambda1[j] + s.lambda2[j] + s.lambda3[j])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn tanh_profile(n: usize) -> RadialProfile {
        RadialProfile::from_fn(0.0, 8.0, n, |_| 1.0, f64::tanh, End::Smooth, End::Open).unwrap()
    }

    fn max_err_vs_cigar(n: usize) -> (f64, f64) {
        let p = tanh_profile(n);
        let k = gauss_curvature(&p).unwrap();
        let err = p
            .r_grid()
            .iter()
            .zip(&k)
            .map(|(&r, &k)| (k - 2.0 / r.cosh().powi(2)).abs())
            .fold(0.0, f64::max);
        (p.spacing(), err)
    }

    #[test]
    fn flat_cylinder_has_zero_curvature() {
        let p = RadialProfile::from_fn(0.0, 10.0, 101, |_| 1.0, |_| 1.0, End::Open, End::Open).unwrap();
        assert!(gauss_curvature(&p).unwrap().iter().all(|k| k.abs() < 1e-10));
    }

    #[test]
    fn sphere_band_has_unit_curvature() {
        let p = RadialProfile::from_fn(0.1, PI - 0.1, 201, |_| 1.0, f64::sin, End::Open, End::Open)
            .unwrap();
        let h = p.spacing();
        for k in gauss_curvature(&p).unwrap() {
            assert!((k - 1.0).abs() < 2.0 * h * h, "{k}");
        }
    }

    #[test]
    fn cigar_curvature_is_second_order() {
        let (h1, e1) = max_err_vs_cigar(401);
        let (h2, e2) = max_err_vs_cigar(801);
        assert!(e1 < 4.0 * h1 * h1 && e2 < 4.0 * h2 * h2, "{e1} {e2}");
        let ratio = e1 / e2;
        assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn whole_sphere_with_two_tips() {
        let p = RadialProfile::from_fn(0.0, PI, 201, |_| 1.0, f64::sin, End::Smooth, End::Smooth)
            .unwrap();
        let k = gauss_curvature(&p).unwrap();
        assert!(k.iter().all(|k| (k - 1.0).abs() < 1e-3));
        assert!((p.area() - 4.0 * PI).abs() < 1e-3);
    }

    #[test]
    fn grid_too_small() {
        let p = RadialProfile::from_fn(0.0, 1.0, 4, |_| 1.0, |_| 1.0, End::Open, End::Open).unwrap();
        assert_eq!(gauss_curvature(&p), Err(Error::GridTooSmall(4, 5)));
    }

    #[test]
    fn rejects_degenerate_samples() {
        let r = uniform_grid(0.0, 1.0, 6);
        let bad_phi = RadialProfile::new(r.clone(), vec![1.0, 1.0, 0.0, 1.0, 1.0, 1.0], vec![1.0; 6], false, 0.0);
        assert!(matches!(bad_phi, Err(Error::DegenerateMetric(_))));
        let bad_f = RadialProfile::new(r.clone(), vec![1.0; 6], vec![1.0, 1.0, -0.1, 1.0, 1.0, 1.0], false, 0.0);
        assert!(matches!(bad_f, Err(Error::DegenerateMetric(_))));
        let mut skew = r.clone();
        skew[3] += 0.01;
        assert!(RadialProfile::new(skew, vec![1.0; 6], vec![1.0; 6], false, 0.0).is_err());
    }

    #[test]
    fn tip_regularity_is_enforced() {
        let cone = RadialProfile::from_fn(0.0, 4.0, 401, |_| 1.0, |r| r.tanh() / 2.0, End::Smooth, End::Open);
        assert!(cone.is_err());
        let cone = RadialProfile::from_fn(0.0, 4.0, 401, |_| 1.0, |r| r.tanh() / 2.0, End::Cone(2), End::Open)
            .unwrap();
        assert_eq!(cone.cone_order(), Some(2));
        assert!(cone.closed_tip());
    }

    #[test]
    fn product_spectra() {
        let flat = RadialProfile::from_fn(0.0, 10.0, 101, |_| 1.0, |_| 1.0, End::Open, End::Open).unwrap();
        let s = spectrum_product(&Warped3Metric::product(flat, 0.3).unwrap()).unwrap();
        assert!(s.rm_norm.iter().all(|v| v.abs() < 1e-10));

        let band = RadialProfile::from_fn(0.1, PI - 0.1, 201, |_| 1.0, f64::sin, End::Open, End::Open).unwrap();
        let s = spectrum_product(&Warped3Metric::product(band, 0.1).unwrap()).unwrap();
        for j in 0..s.len() {
            assert_eq!(s.lambda1[j], 0.0);
            assert_eq!(s.lambda2[j], 0.0);
            assert!((s.lambda3[j] - 2.0).abs() < 1e-3);
        }

        let cigar = tanh_profile(801);
        let h = cigar.spacing();
        let a = spectrum_product(&Warped3Metric::product(cigar.clone(), 0.1).unwrap()).unwrap();
        let b = spectrum_product(&Warped3Metric::product(cigar.clone(), 5.0).unwrap()).unwrap();
        assert_eq!(a, b);
        for (r, l3) in cigar.r_grid().iter().zip(&a.lambda3) {
            assert!((l3 - 4.0 / r.cosh().powi(2)).abs() < 8.0 * h * h);
        }
    }

    #[test]
    fn spectrum_product_rejects_twist() {
        let cigar = tanh_profile(101);
        let m = Warped3Metric::twisted(cigar, 0.1, 1.0, 1.0).unwrap();
        assert!(spectrum_product(&m).is_err());
        assert!(m.local_spectrum().is_ok());
    }

    #[test]
    fn quotient_examples() {
        let cigar = tanh_profile(801);
        assert_eq!(quotient_metric(&cigar, 0.0, 2.0, 1.0).unwrap(), cigar);
        assert_eq!(quotient_metric(&cigar, 1.0, 0.0, 1.0), Err(Error::ZeroB));

        let flat = RadialProfile::from_fn(0.0, 10.0, 101, |_| 1.0, |_| 1.0, End::Open, End::Open).unwrap();
        let q = quotient_metric(&flat, 1.0, 1.0, 1.0).unwrap();
        assert!(q.f().iter().all(|v| (v - 0.5_f64.sqrt()).abs() < 1e-15));

        let q = quotient_metric(&cigar, 1.0, 1.0, 1.0).unwrap();
        let k = gauss_curvature(&q).unwrap();
        assert!(k.iter().all(|&k| k > 0.0), "min {}", k.iter().cloned().fold(f64::INFINITY, f64::min));
    }

    #[test]
    fn quotient_large_f_limit() {
        let big = RadialProfile::from_fn(0.0, 1.0, 11, |_| 1.0, |r| 1e9 * (1.0 + r), End::Open, End::Open).unwrap();
        let q = quotient_metric(&big, 2.0, 3.0, 1.0).unwrap();
        assert!(q.f().iter().all(|v| (v - 1.5).abs() < 1e-6));
    }

    #[test]
    fn scalar_sums() {
        let s = CurvatureSpectrum::from_triples([[0.0, 0.0, 0.0], [0.0, 0.0, 2.0], [5.0, -1.0, 0.0]]);
        assert_eq!(scalar_from_spectrum(&s), vec![0.0, 2.0, 4.0]);
        assert_eq!(s.triple(2), [-1.0, 0.0, 5.0]);
        assert_eq!(s.scalar, scalar_from_spectrum(&s));
    }

    #[test]
    fn surface_scalar_is_twice_gauss() {
        let p = tanh_profile(101);
        let k = gauss_curvature(&p).unwrap();
        let r = surface_scalar(&p).unwrap();
        assert!(k.iter().zip(&r).all(|(k, r)| *r == 2.0 * k));
    }
}
