//! Collapsing families `Sigma x S^1(eps_i)` (optionally twisted), fiber-loop
//! lengths, and sampled finite metric spaces for GH analysis.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::SurfaceSolution;
use crate::gh::FiniteMetricSpace;
use crate::metric::{RadialProfile, Warped3Metric};

/// Members `sol x S^1(eps_i)` with a shared base solution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapseFamily {
    pub base_solution: SurfaceSolution,
    pub epsilons: Vec<f64>,
    pub twist: Option<(f64, f64)>,
    /// `members[i][k]` is member `i` at recorded time `k`.
    pub members: Vec<Vec<Warped3Metric>>,
}

pub fn make_family(sol: &SurfaceSolution, epsilons: &[f64], twist: Option<(f64, f64)>) -> Result<CollapseFamily> {
    if epsilons.is_empty() || epsilons.iter().any(|&e| !(e > 0.0)) || epsilons.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::DomainError("epsilons must be positive and strictly decreasing".into()));
    }
    if let Some((_, b)) = twist {
        if b == 0.0 {
            return Err(Error::ZeroB);
        }
    }
    let members = epsilons
        .iter()
        .map(|&eps| {
            sol.profiles()
                .iter()
                .map(|p| match twist {
                    None => Warped3Metric::product(p.clone(), eps),
                    Some((a, b)) => Warped3Metric::twisted(p.clone(), eps, a, b),
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CollapseFamily { base_solution: sol.clone(), epsilons: epsilons.to_vec(), twist, members })
}

/// Angle the base rotates by when the fiber closes up once.
fn twist_angle(m: &Warped3Metric) -> f64 {
    if m.is_product() {
        return 0.0;
    }
    let raw = m.twist_a * m.fiber_length / m.twist_b;
    // wrap into (-pi, pi]
    let w = raw.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

/// Half the length of the fiber loop through the point: `eps / 2` for a
/// product; for a twisted member the loop also sweeps the base angle by
/// `a eps / b`. Loops in the base direction are ignored (the truncated base
/// is simply connected).
pub fn inj_proxy(m: &Warped3Metric, point_index: usize) -> Result<f64> {
    let f = m.base.f();
    if point_index >= f.len() {
        return Err(Error::DomainError(format!("point {point_index} of {}", f.len())));
    }
    let sweep = f[point_index] * twist_angle(m);
    Ok(0.5 * (m.fiber_length * m.fiber_length + sweep * sweep).sqrt())
}

/// What to sample.
#[derive(Clone, Copy, Debug)]
pub enum SampleTarget<'a> {
    Metric(&'a Warped3Metric),
    Surface(&'a RadialProfile),
    Interval { length: f64 },
}

/// Sampling window and graph resolution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleConfig {
    pub n: usize,
    pub seed: u64,
    /// Radial window `[r0, r1]`; ignored for intervals.
    pub window: (f64, f64),
    pub theta_nodes: usize,
    pub fiber_nodes: usize,
    /// Use every `radial_stride`-th grid node radially.
    pub radial_stride: usize,
}

impl SampleConfig {
    pub fn new(n: usize, seed: u64, window: (f64, f64)) -> Self {
        SampleConfig { n, seed, window, theta_nodes: 64, fiber_nodes: 8, radial_stride: 1 }
    }
}

/// Sampled space plus the coordinates of each sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledSpace {
    pub space: FiniteMetricSpace,
    /// `(r, theta, u)` per sample (`theta = u = 0` where absent).
    pub coords: Vec<[f64; 3]>,
    pub seed: u64,
    pub window: (f64, f64),
}

/// `i`-th element of the van der Corput sequence in `base`.
fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    while i > 0 {
        out += (i % base) as f64 * inv;
        i /= base;
        inv /= base as f64;
    }
    out
}

/// Halton points in `[0,1)^3` with a seeded Cranley–Patterson shift. The
/// shift for each coordinate depends only on the seed, so spaces sampled
/// with the same seed share their first coordinates.
fn halton(n: usize, seed: u64) -> Vec<[f64; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: [f64; 3] = [rng.gen(), rng.gen(), rng.gen()];
    (1..=n as u64)
        .map(|i| {
            let h = [radical_inverse(i, 2), radical_inverse(i, 3), radical_inverse(i, 5)];
            [(h[0] + shift[0]).fract(), (h[1] + shift[1]).fract(), (h[2] + shift[2]).fract()]
        })
        .collect()
}

/// Sparse symmetric weighted graph.
struct Graph {
    adj: Vec<Vec<(u32, f64)>>,
}

impl Graph {
    fn with_nodes(n: usize) -> Self {
        Graph { adj: vec![Vec::new(); n] }
    }

    fn edge(&mut self, a: usize, b: usize, w: f64) {
        if a != b {
            self.adj[a].push((b as u32, w));
            self.adj[b].push((a as u32, w));
        }
    }

    fn dijkstra(&self, src: usize) -> Vec<f64> {
        let mut dist = vec![f64::INFINITY; self.adj.len()];
        let mut heap = BinaryHeap::new();
        dist[src] = 0.0;
        heap.push(Reverse((Key(0.0), src as u32)));
        while let Some(Reverse((Key(d), u))) = heap.pop() {
            let u = u as usize;
            if d > dist[u] {
                continue;
            }
            for &(v, w) in &self.adj[u] {
                let nd = d + w;
                if nd < dist[v as usize] {
                    dist[v as usize] = nd;
                    heap.push(Reverse((Key(nd), v)));
                }
            }
        }
        dist
    }
}

#[derive(Clone, Copy)]
struct Key(f64);

impl PartialEq for Key {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other).is_eq()
    }
}

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Grid of `(ring, theta, u)` nodes over a radial window. A closed tip ring
/// is a single node per fiber position.
struct Lattice {
    r: Vec<f64>,
    phi: Vec<f64>,
    f: Vec<f64>,
    h: f64,
    mt: usize,
    mu: usize,
    tip: bool,
    /// `theta` index shift applied when `u` wraps.
    wrap_shift: isize,
    fiber: f64,
}

const BASE_STEPS: [(isize, isize); 8] = [(1, 0), (0, 1), (1, 1), (1, -1), (1, 2), (1, -2), (2, 1), (2, -1)];

impl Lattice {
    fn nodes(&self) -> usize {
        let rings = self.r.len() - usize::from(self.tip);
        (rings * self.mt + usize::from(self.tip)) * self.mu
    }

    fn id(&self, ring: usize, t: isize, u: usize) -> usize {
        let per_u = (self.r.len() - usize::from(self.tip)) * self.mt + usize::from(self.tip);
        let base = if self.tip {
            if ring == 0 {
                0
            } else {
                1 + (ring - 1) * self.mt + t.rem_euclid(self.mt as isize) as usize
            }
        } else {
            ring * self.mt + t.rem_euclid(self.mt as isize) as usize
        };
        u * per_u + base
    }

    fn base_weight(&self, ring: usize, dr: isize, dt: isize) -> f64 {
        let r2 = (ring as isize + dr) as usize;
        let phi = 0.5 * (self.phi[ring] + self.phi[r2]);
        let f = 0.5 * (self.f[ring] + self.f[r2]);
        let dth = 2.0 * PI / self.mt as f64;
        ((phi * dr as f64 * self.h).powi(2) + (f * dt as f64 * dth).powi(2)).sqrt()
    }

    fn build(&self) -> Graph {
        let mut g = Graph::with_nodes(self.nodes());
        let nr = self.r.len();
        let du = self.fiber / self.mu as f64;
        let u_steps: &[isize] = if self.mu > 1 { &[-1, 0, 1] } else { &[0] };
        // moves that end in (ring2, t2, u + s) with the wrap twist applied
        let target = |ring2: usize, t2: isize, u: usize, s: isize| -> usize {
            let raw = u as isize + s;
            let wraps = raw.div_euclid(self.mu as isize);
            let u2 = raw.rem_euclid(self.mu as isize) as usize;
            self.id(ring2, t2 + wraps * self.wrap_shift, u2)
        };
        for u in 0..self.mu {
            if self.mu > 1 {
                // pure fiber moves
                for ring in 0..nr {
                    let ts = if self.tip && ring == 0 { 1 } else { self.mt };
                    for t in 0..ts as isize {
                        g.edge(self.id(ring, t, u), target(ring, t, u, 1), du);
                    }
                }
            }
            for ring in 0..nr {
                let tip_ring = self.tip && ring == 0;
                let ts = if tip_ring { 1 } else { self.mt };
                for t in 0..ts as isize {
                    let from = self.id(ring, t, u);
                    for &(dr, dt) in &BASE_STEPS {
                        let r2 = ring as isize + dr;
                        if r2 >= nr as isize || (dr == 0 && tip_ring) {
                            continue;
                        }
                        let r2 = r2 as usize;
                        // the tip connects radially to every angle of nearby rings
                        let targets: Vec<isize> = if tip_ring {
                            if dt != 0 {
                                continue;
                            }
                            (0..self.mt as isize).collect()
                        } else {
                            vec![t + dt]
                        };
                        let wb = self.base_weight(ring, dr, if tip_ring { 0 } else { dt });
                        for t2 in targets {
                            for &s in u_steps {
                                let w = (wb * wb + (s as f64 * du).powi(2)).sqrt();
                                g.edge(from, target(r2, t2, u, s), w);
                            }
                        }
                    }
                }
            }
        }
        g
    }
}

/// Samples `cfg.n` points quasi-uniformly (area weighted in `r`) and computes
/// graph geodesic distances. The base point is the sample closest to the
/// start of the window, ties broken by index.
pub fn sample_space(target: SampleTarget<'_>, cfg: &SampleConfig) -> Result<SampledSpace> {
    if cfg.n < 2 {
        return Err(Error::DomainError(format!("need n >= 2 samples, got {}", cfg.n)));
    }
    let pts = halton(cfg.n, cfg.seed);
    let (profile, fiber, wrap) = match target {
        SampleTarget::Interval { length } => {
            if !(length > 0.0) {
                return Err(Error::WindowEmpty);
            }
            let x: Vec<f64> = pts.iter().map(|p| p[0] * length).collect();
            let n = x.len();
            let mut dist = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    dist[i * n + j] = (x[i] - x[j]).abs();
                }
            }
            let base = (0..n).min_by(|&a, &b| x[a].total_cmp(&x[b])).unwrap_or(0);
            let space = FiniteMetricSpace::from_flat(n, dist, base)?;
            let coords = x.iter().map(|&v| [v, 0.0, 0.0]).collect();
            return Ok(SampledSpace { space, coords, seed: cfg.seed, window: (0.0, length) });
        }
        SampleTarget::Surface(p) => (p, 0.0, 0.0),
        SampleTarget::Metric(m) => (&m.base, m.fiber_length, twist_angle(m)),
    };
    let (r0, r1) = cfg.window;
    let stride = cfg.radial_stride.max(1);
    let idx: Vec<usize> = (0..profile.len())
        .filter(|&j| j % stride == 0 && profile.r_grid()[j] >= r0 - 1e-12 && profile.r_grid()[j] <= r1 + 1e-12)
        .collect();
    if idx.len() < 2 || cfg.theta_nodes < 3 {
        return Err(Error::WindowEmpty);
    }
    let mu = if fiber > 0.0 { cfg.fiber_nodes.max(1) } else { 1 };
    let mt = cfg.theta_nodes;
    let lat = Lattice {
        r: idx.iter().map(|&j| profile.r_grid()[j]).collect(),
        phi: idx.iter().map(|&j| profile.phi()[j]).collect(),
        f: idx.iter().map(|&j| profile.f()[j]).collect(),
        h: profile.spacing() * stride as f64,
        mt,
        mu,
        tip: profile.closed_tip() && idx[0] == 0,
        wrap_shift: (wrap / (2.0 * PI / mt as f64)).round() as isize,
        fiber: fiber.max(0.0),
    };
    // area-weighted inverse CDF in r
    let w: Vec<f64> = lat.phi.iter().zip(&lat.f).map(|(p, f)| p * f).collect();
    let mut cdf = vec![0.0];
    for k in 1..w.len() {
        cdf.push(cdf[k - 1] + 0.5 * (w[k] + w[k - 1]) * lat.h);
    }
    let total = cdf[cdf.len() - 1];
    if !(total > 0.0) {
        return Err(Error::WindowEmpty);
    }
    let ring_of = |q: f64| -> usize {
        let target = q * total;
        let k = cdf.partition_point(|&c| c < target).clamp(1, cdf.len() - 1);
        let (c0, c1) = (cdf[k - 1], cdf[k]);
        let frac = if c1 > c0 { (target - c0) / (c1 - c0) } else { 0.0 };
        if frac < 0.5 {
            k - 1
        } else {
            k
        }
    };
    let mut nodes = Vec::with_capacity(cfg.n);
    let mut coords = Vec::with_capacity(cfg.n);
    for p in &pts {
        let ring = ring_of(p[0]);
        let t = ((p[1] * mt as f64).round() as usize) % mt;
        let u = ((p[2] * mu as f64).round() as usize) % mu;
        let t = if lat.tip && ring == 0 { 0 } else { t };
        nodes.push(lat.id(ring, t as isize, u));
        coords.push([lat.r[ring], 2.0 * PI * t as f64 / mt as f64, fiber * u as f64 / mu as f64]);
    }
    let graph = lat.build();
    let rows: Vec<Vec<f64>> = nodes
        .par_iter()
        .map(|&s| {
            let d = graph.dijkstra(s);
            nodes.iter().map(|&t| d[t]).collect()
        })
        .collect();
    let n = cfg.n;
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            // shortest paths are symmetric up to summation order
            let v = if i == j { 0.0 } else { rows[i][j].min(rows[j][i]) };
            if !v.is_finite() {
                return Err(Error::DegenerateMetric("sample graph is disconnected".into()));
            }
            dist[i * n + j] = v;
        }
    }
    // base coordinates only, so a product and its base pick the same index
    let base = (0..n).min_by(|&a, &b| coords[a][0].total_cmp(&coords[b][0]).then(a.cmp(&b))).unwrap_or(0);
    let space = FiniteMetricSpace::from_flat(n, dist, base)?;
    Ok(SampledSpace { space, coords, seed: cfg.seed, window: cfg.window })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{End, RadialProfile};
    use crate::pinching::{classify_origin, OriginKind};

    fn cylinder(len: f64, n: usize) -> RadialProfile {
        RadialProfile::from_fn(0.0, len, n, |_| 1.0, |_| 1.0, End::Open, End::Open).unwrap()
    }

    fn cigar() -> RadialProfile {
        RadialProfile::from_fn(0.0, 6.0, 121, |_| 1.0, f64::tanh, End::Smooth, End::Open).unwrap()
    }

    #[test]
    fn family_members_share_base() {
        let sol = SurfaceSolution::new(vec![cigar()]).unwrap();
        let fam = make_family(&sol, &[1.0, 0.5, 0.25], None).unwrap();
        assert_eq!(fam.members.len(), 3);
        let s0 = fam.members[0][0].local_spectrum().unwrap();
        for m in &fam.members {
            assert_eq!(m[0].base, fam.members[0][0].base);
            assert_eq!(m[0].local_spectrum().unwrap(), s0);
        }
        assert!(make_family(&sol, &[0.5, 1.0], None).is_err());
        assert_eq!(make_family(&sol, &[1.0], Some((1.0, 0.0))), Err(Error::ZeroB));
        let tw = make_family(&sol, &[1.0], Some((1.0, 1.0))).unwrap();
        let k = tw.members[0][0].quotient_curvature().unwrap();
        assert!(k.iter().all(|&v| v > 0.0));
    }

    #[test]
    fn inj_proxy_values() {
        let m = Warped3Metric::product(cigar(), 0.2).unwrap();
        for j in [0, 10, 120] {
            assert!((inj_proxy(&m, j).unwrap() - 0.1).abs() < 1e-15);
        }
        // collapsing origins: |Rm| inj^2 ~ 1/i^2 at the tip
        let rm_tip = m.local_spectrum().unwrap().rm_norm[0];
        let products: Vec<f64> = (1..=4)
            .map(|i| {
                let mi = Warped3Metric::product(cigar(), 1.0 / i as f64).unwrap();
                rm_tip * inj_proxy(&mi, 0).unwrap().powi(2)
            })
            .collect();
        for (i, v) in products.iter().enumerate() {
            let expect = rm_tip / (4.0 * ((i + 1) * (i + 1)) as f64);
            assert!((v - expect).abs() < 1e-12);
        }
        let tip = m.local_spectrum().unwrap().triple(0);
        assert_eq!(classify_origin(tip, 0.1).unwrap(), OriginKind::SplitLike);
        let tw = Warped3Metric::twisted(cigar(), 0.2, 1.0, 1.0).unwrap();
        let j = 100;
        let f = tw.base.f()[j];
        assert!((inj_proxy(&tw, j).unwrap() - 0.5 * (0.04 + 0.04 * f * f).sqrt()).abs() < 1e-14);
        assert!(inj_proxy(&tw, 0).unwrap() == 0.1);
    }

    #[test]
    fn flat_cylinder_distances() {
        let m = Warped3Metric::product(cylinder(4.0, 41), 0.4).unwrap();
        let run = |stride: usize| {
            let cfg = SampleConfig { radial_stride: stride, ..SampleConfig::new(24, 3, (0.0, 4.0)) };
            sample_space(SampleTarget::Metric(&m), &cfg).unwrap()
        };
        let s = run(1);
        // pick the extreme radial samples on the same angle and fiber position
        let lat = Lattice {
            r: (0..41).map(|j| j as f64 * 0.1).collect(),
            phi: vec![1.0; 41],
            f: vec![1.0; 41],
            h: 0.1,
            mt: 16,
            mu: 8,
            tip: false,
            wrap_shift: 0,
            fiber: 0.4,
        };
        let g = lat.build();
        let d = g.dijkstra(lat.id(0, 0, 0));
        assert!((d[lat.id(40, 0, 0)] - 4.0).abs() < 0.02 * 4.0);
        assert!((d[lat.id(0, 0, 4)] - 0.2).abs() < 0.02 * 0.2);
        let s2 = run(2);
        assert_eq!(s.space.len(), s2.space.len());
    }

    #[test]
    fn identical_points_have_zero_distance() {
        let p = cylinder(1.0, 11);
        let cfg = SampleConfig { theta_nodes: 4, ..SampleConfig::new(2, 0, (0.0, 0.0)) };
        assert!(matches!(sample_space(SampleTarget::Surface(&p), &cfg), Err(Error::WindowEmpty)));
        let s = sample_space(SampleTarget::Interval { length: 1.0 }, &SampleConfig::new(2, 0, (0.0, 1.0))).unwrap();
        assert_eq!(s.space.d(0, 0), 0.0);
    }

    #[test]
    fn product_projects_onto_base() {
        let base = cigar();
        let m = Warped3Metric::product(base.clone(), 0.2).unwrap();
        let cfg = SampleConfig { radial_stride: 2, ..SampleConfig::new(32, 7, (0.0, 4.0)) };
        let a = sample_space(SampleTarget::Metric(&m), &cfg).unwrap();
        let b = sample_space(SampleTarget::Surface(&base), &cfg).unwrap();
        for i in 0..32 {
            assert_eq!(a.coords[i][..2], b.coords[i][..2]);
            for j in 0..32 {
                let (dp, db) = (a.space.d(i, j), b.space.d(i, j));
                assert!(dp >= db - 1e-12 && dp <= db + 0.1 + 1e-12);
            }
        }
        assert_eq!(a.space.base(), b.space.base());
    }
}
