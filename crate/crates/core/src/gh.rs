//! Finite metric spaces, Gromov–Hausdorff distance estimates and a
//! correlation-dimension estimator.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest side handled by [`gh_exact`].
pub const EXACT_LIMIT: usize = 8;

/// Slack for the metric axioms, relative to `max(1, diam)`.
pub const AXIOM_SLACK: f64 = 1e-12;

/// Distance matrix with a distinguished base point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteMetricSpace {
    n: usize,
    dist: Vec<f64>,
    base: usize,
}

impl FiniteMetricSpace {
    /// Validates symmetry, zero diagonal, nonnegativity and the triangle
    /// inequality (all within [`AXIOM_SLACK`]).
    pub fn new(rows: Vec<Vec<f64>>, base: usize) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InconsistentInput("distance matrix is not square".into()));
        }
        let dist: Vec<f64> = rows.into_iter().flatten().collect();
        Self::from_flat(n, dist, base)
    }

    pub fn from_flat(n: usize, dist: Vec<f64>, base: usize) -> Result<Self> {
        if n == 0 || dist.len() != n * n {
            return Err(Error::InconsistentInput(format!("need a non-empty {n}x{n} matrix")));
        }
        if base >= n {
            return Err(Error::InconsistentInput(format!("base point {base} of {n}")));
        }
        let space = FiniteMetricSpace { n, dist, base };
        space.check_axioms()?;
        Ok(space)
    }

    /// Euclidean distances between the given points.
    pub fn from_points(points: &[Vec<f64>], base: usize) -> Result<Self> {
        let n = points.len();
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..i {
                let d = points[i].iter().zip(&points[j]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                dist[i * n + j] = d;
                dist[j * n + i] = d;
            }
        }
        Self::from_flat(n, dist, base)
    }

    pub fn check_axioms(&self) -> Result<()> {
        let n = self.n;
        let slack = AXIOM_SLACK * self.diameter().max(1.0);
        for i in 0..n {
            if self.d(i, i) != 0.0 {
                return Err(Error::InconsistentInput(format!("d({i},{i}) = {}", self.d(i, i))));
            }
            for j in 0..n {
                let v = self.d(i, j);
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InconsistentInput(format!("d({i},{j}) = {v}")));
                }
                if (v - self.d(j, i)).abs() > slack {
                    return Err(Error::InconsistentInput(format!("asymmetric at ({i},{j})")));
                }
            }
        }
        let bad = (0..n).into_par_iter().find_any(|&i| {
            (0..n).any(|j| (0..n).any(|k| self.d(i, k) > self.d(i, j) + self.d(j, k) + slack))
        });
        match bad {
            Some(i) => Err(Error::InconsistentInput(format!("triangle inequality fails through point {i}"))),
            None => Ok(()),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn base(&self) -> usize {
        self.base
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.dist[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn diameter(&self) -> f64 {
        self.dist.iter().cloned().fold(0.0, f64::max)
    }

    pub fn scaled(&self, s: f64) -> Self {
        FiniteMetricSpace { n: self.n, dist: self.dist.iter().map(|v| v * s).collect(), base: self.base }
    }

    /// The sub-space on `idx`, with base point `idx[base]`.
    pub fn subspace(&self, idx: &[usize], base: usize) -> Result<Self> {
        let rows = idx.iter().map(|&i| idx.iter().map(|&j| self.d(i, j)).collect()).collect();
        Self::new(rows, base)
    }
}

/// Whether the correspondence must pair the base points.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GhMode {
    Unpointed,
    Pointed,
}

/// Exact (unpointed) GH distance for spaces of at most [`EXACT_LIMIT`] points.
pub fn gh_exact(a: &FiniteMetricSpace, b: &FiniteMetricSpace) -> Result<f64> {
    gh_exact_mode(a, b, GhMode::Unpointed)
}

/// Exact pointed GH distance: correspondences must contain the base pair.
pub fn gh_exact_pointed(a: &FiniteMetricSpace, b: &FiniteMetricSpace) -> Result<f64> {
    gh_exact_mode(a, b, GhMode::Pointed)
}

/// Half the least distortion of a correspondence. Candidate distortion
/// values are the finitely many `|dA - dB|`; for each we test whether a
/// covering clique of compatible pairs exists.
pub fn gh_exact_mode(a: &FiniteMetricSpace, b: &FiniteMetricSpace, mode: GhMode) -> Result<f64> {
    for s in [a, b] {
        if s.len() > EXACT_LIMIT {
            return Err(Error::TooLarge(s.len(), EXACT_LIMIT));
        }
    }
    let (na, nb) = (a.len(), b.len());
    let mut cands = vec![0.0];
    for i in 0..na {
        for j in 0..na {
            for k in 0..nb {
                for l in 0..nb {
                    cands.push((a.d(i, j) - b.d(k, l)).abs());
                }
            }
        }
    }
    cands.sort_by(f64::total_cmp);
    cands.dedup();
    // feasibility is monotone in the threshold
    let (mut lo, mut hi) = (0, cands.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if covering_exists(a, b, cands[mid], mode) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(0.5 * cands[lo])
}

fn covering_exists(a: &FiniteMetricSpace, b: &FiniteMetricSpace, delta: f64, mode: GhMode) -> bool {
    let (na, nb) = (a.len(), b.len());
    let pair = |i: usize, k: usize| i * nb + k;
    let np = na * nb;
    // compat[p] = bitmask of pairs compatible with p (and with themselves)
    let mut compat = vec![0u64; np];
    for i in 0..na {
        for k in 0..nb {
            let mut m = 0u64;
            for j in 0..na {
                for l in 0..nb {
                    if (a.d(i, j) - b.d(k, l)).abs() <= delta {
                        m |= 1 << pair(j, l);
                    }
                }
            }
            compat[pair(i, k)] = m;
        }
    }
    let row_mask = |i: usize| ((1u64 << nb) - 1) << (i * nb);
    let col_mask = |k: usize| (0..na).fold(0u64, |m, i| m | 1 << pair(i, k));
    let rows: Vec<u64> = (0..na).map(row_mask).collect();
    let cols: Vec<u64> = (0..nb).map(col_mask).collect();
    let all = if np == 64 { u64::MAX } else { (1u64 << np) - 1 };
    let (chosen, allowed) = match mode {
        GhMode::Unpointed => (0u64, all),
        GhMode::Pointed => {
            let p = pair(a.base(), b.base());
            if compat[p] & (1 << p) == 0 {
                return false;
            }
            (1u64 << p, compat[p])
        }
    };
    search(chosen, allowed, &compat, &rows, &cols)
}

/// Depth-first clique search: pick the first element of A or B not yet
/// covered, branch over the allowed pairs that would cover it.
fn search(chosen: u64, allowed: u64, compat: &[u64], rows: &[u64], cols: &[u64]) -> bool {
    let mut target = None;
    for m in rows.iter().chain(cols) {
        if chosen & m == 0 {
            let opts = allowed & m;
            if opts == 0 {
                return false;
            }
            if target.is_none_or(|t: u64| opts.count_ones() < t.count_ones()) {
                target = Some(opts);
            }
        }
    }
    let Some(mut opts) = target else {
        return true;
    };
    while opts != 0 {
        let p = opts.trailing_zeros() as usize;
        opts &= opts - 1;
        if search(chosen | 1 << p, allowed & compat[p], compat, rows, cols) {
            return true;
        }
    }
    false
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GhBounds {
    pub lower: f64,
    pub upper: f64,
    pub mode: GhMode,
}

/// Pointed GH bounds (both spaces always carry a base point).
pub fn gh_bound(a: &FiniteMetricSpace, b: &FiniteMetricSpace, iterations: usize, seed: u64) -> GhBounds {
    gh_bound_mode(a, b, iterations, seed, GhMode::Pointed)
}

/// Lower bound from distance-profile invariants, upper bound from the best
/// correspondence found by seeded greedy matching plus local refinement.
pub fn gh_bound_mode(a: &FiniteMetricSpace, b: &FiniteMetricSpace, iterations: usize, seed: u64, mode: GhMode) -> GhBounds {
    let lower = gh_lower(a, b, mode);
    let upper = gh_upper(a, b, iterations, seed, mode);
    let upper = upper.max(lower);
    GhBounds { lower, upper, mode }
}

fn sorted_rows(s: &FiniteMetricSpace) -> Vec<Vec<f64>> {
    (0..s.len())
        .map(|i| {
            let mut r = s.row(i).to_vec();
            r.sort_by(f64::total_cmp);
            r
        })
        .collect()
}

/// Hausdorff distance between two sorted finite subsets of the line.
fn hausdorff_sorted(x: &[f64], y: &[f64]) -> f64 {
    fn one_sided(x: &[f64], y: &[f64]) -> f64 {
        let mut k = 0;
        let mut worst = 0.0_f64;
        for &v in x {
            while k + 1 < y.len() && y[k + 1] <= v {
                k += 1;
            }
            let mut best = (y[k] - v).abs();
            if k + 1 < y.len() {
                best = best.min((y[k + 1] - v).abs());
            }
            worst = worst.max(best);
        }
        worst
    }
    one_sided(x, y).max(one_sided(y, x))
}

/// If `(a, b)` lies in a correspondence of distortion `D`, the distance sets
/// `{d(a, .)}` and `{d(b, .)}` are within Hausdorff distance `D`. Every
/// point must be paired, so half the worst best-match is a lower bound.
fn gh_lower(a: &FiniteMetricSpace, b: &FiniteMetricSpace, mode: GhMode) -> f64 {
    let (ra, rb) = (sorted_rows(a), sorted_rows(b));
    let h: Vec<f64> = ra
        .par_iter()
        .flat_map_iter(|x| rb.iter().map(move |y| hausdorff_sorted(x, y)))
        .collect();
    let nb = b.len();
    let best_a = (0..a.len()).map(|i| (0..nb).map(|k| h[i * nb + k]).fold(f64::INFINITY, f64::min));
    let best_b = (0..nb).map(|k| (0..a.len()).map(|i| h[i * nb + k]).fold(f64::INFINITY, f64::min));
    let mut bound = best_a.chain(best_b).fold(0.0, f64::max);
    if mode == GhMode::Pointed {
        bound = bound.max(h[a.base() * nb + b.base()]);
    }
    0.5 * bound
}

/// Correspondence `graph(f) u graph(g)^T` for maps `f: A -> B`, `g: B -> A`.
#[derive(Clone, Debug)]
struct Matching {
    f: Vec<usize>,
    g: Vec<usize>,
}

impl Matching {
    fn pairs(&self) -> Vec<(usize, usize)> {
        let mut p: Vec<(usize, usize)> = self.f.iter().enumerate().map(|(i, &k)| (i, k)).collect();
        p.extend(self.g.iter().enumerate().map(|(k, &i)| (i, k)));
        p.sort_unstable();
        p.dedup();
        p
    }
}

fn distortion(a: &FiniteMetricSpace, b: &FiniteMetricSpace, pairs: &[(usize, usize)]) -> f64 {
    pairs
        .par_iter()
        .map(|&(i, k)| pair_excess(a, b, pairs, i, k))
        .reduce(|| 0.0, f64::max)
}

#[inline]
fn pair_excess(a: &FiniteMetricSpace, b: &FiniteMetricSpace, pairs: &[(usize, usize)], i: usize, k: usize) -> f64 {
    let (ra, rb) = (a.row(i), b.row(k));
    pairs.iter().fold(0.0_f64, |m, &(j, l)| m.max((ra[j] - rb[l]).abs()))
}

fn gh_upper(a: &FiniteMetricSpace, b: &FiniteMetricSpace, iterations: usize, seed: u64, mode: GhMode) -> f64 {
    let (na, nb) = (a.len(), b.len());
    let mut starts: Vec<Matching> = Vec::new();
    // index-aligned start: exact for spaces sampled with shared coordinates
    let mut aligned = Matching {
        f: (0..na).map(|i| i * nb / na).collect(),
        g: (0..nb).map(|k| k * na / nb).collect(),
    };
    if mode == GhMode::Pointed {
        aligned.f[a.base()] = b.base();
        aligned.g[b.base()] = a.base();
    }
    starts.push(aligned);
    for it in 0..iterations.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(it as u64));
        starts.push(greedy(a, b, mode, &mut rng));
    }
    starts
        .into_par_iter()
        .enumerate()
        .map(|(idx, m)| (refine(a, b, m, mode), idx))
        .reduce_with(|x, y| if (x.0, x.1) <= (y.0, y.1) || y.0.is_nan() { x } else { y })
        .map(|(v, _)| 0.5 * v)
        .unwrap_or(0.0)
}

/// Adds points one at a time in random order, pairing each with the partner
/// of least excess against the pairs chosen so far.
fn greedy(a: &FiniteMetricSpace, b: &FiniteMetricSpace, mode: GhMode, rng: &mut ChaCha8Rng) -> Matching {
    let (na, nb) = (a.len(), b.len());
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let mut f = vec![usize::MAX; na];
    let mut g = vec![usize::MAX; nb];
    if mode == GhMode::Pointed {
        pairs.push((a.base(), b.base()));
        f[a.base()] = b.base();
        g[b.base()] = a.base();
    }
    let mut order: Vec<(bool, usize)> = (0..na).map(|i| (true, i)).chain((0..nb).map(|k| (false, k))).collect();
    order.shuffle(rng);
    for (from_a, x) in order {
        if from_a && f[x] != usize::MAX || !from_a && g[x] != usize::MAX {
            continue;
        }
        let width = if from_a { nb } else { na };
        let (mut best, mut arg) = (f64::INFINITY, 0);
        for y in 0..width {
            let (i, k) = if from_a { (x, y) } else { (y, x) };
            let e = pair_excess(a, b, &pairs, i, k);
            if e < best {
                best = e;
                arg = y;
            }
        }
        let (i, k) = if from_a { (x, arg) } else { (arg, x) };
        pairs.push((i, k));
        if f[i] == usize::MAX {
            f[i] = k;
        }
        if g[k] == usize::MAX {
            g[k] = i;
        }
        if from_a {
            f[i] = k;
        } else {
            g[k] = i;
        }
    }
    Matching { f, g }
}

/// Repeatedly moves an endpoint of a worst pair to the partner that
/// lowers the distortion most.
fn refine(a: &FiniteMetricSpace, b: &FiniteMetricSpace, mut m: Matching, mode: GhMode) -> f64 {
    let mut pairs = m.pairs();
    let mut current = distortion(a, b, &pairs);
    for _ in 0..4 * (a.len() + b.len()) {
        // the worst pair (i, k) and which map produced it
        let (_, wi, wk) = pairs
            .iter()
            .map(|&(i, k)| (pair_excess(a, b, &pairs, i, k), i, k))
            .fold((-1.0, 0, 0), |acc, x| if x.0 > acc.0 { x } else { acc });
        let mut improved = false;
        for from_a in [true, false] {
            let x = if from_a { wi } else { wk };
            let fixed = mode == GhMode::Pointed && (if from_a { x == a.base() } else { x == b.base() });
            if fixed || (from_a && m.f[x] != wk) || (!from_a && m.g[x] != wi) {
                continue;
            }
            let width = if from_a { b.len() } else { a.len() };
            let mut best = (current, usize::MAX);
            for y in 0..width {
                let mut trial = m.clone();
                if from_a {
                    trial.f[x] = y;
                } else {
                    trial.g[x] = y;
                }
                let tp = trial.pairs();
                let d = distortion(a, b, &tp);
                if d < best.0 {
                    best = (d, y);
                }
            }
            if best.1 != usize::MAX {
                if from_a {
                    m.f[x] = best.1;
                } else {
                    m.g[x] = best.1;
                }
                pairs = m.pairs();
                current = best.0;
                improved = true;
                break;
            }
        }
        if !improved {
            break;
        }
    }
    current
}

/// Correlation-dimension estimate with its fit diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimEstimate {
    pub dimension: f64,
    /// Root-mean-square residual of the log-log fit.
    pub residual: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub scales: usize,
}

/// Default scale window as percentiles of the pairwise distances.
pub const DIM_WINDOW: (f64, f64) = (0.05, 0.5);

/// Slope of `log C(r)` against `log r`, where `C(r)` is the fraction of
/// pairs within distance `r`, over the default percentile window.
pub fn dim_estimate(a: &FiniteMetricSpace) -> Result<DimEstimate> {
    dim_estimate_window(a, DIM_WINDOW)
}

pub fn dim_estimate_window(a: &FiniteMetricSpace, window: (f64, f64)) -> Result<DimEstimate> {
    let n = a.len();
    if n == 1 {
        return Ok(DimEstimate { dimension: 0.0, residual: 0.0, r_min: 0.0, r_max: 0.0, scales: 0 });
    }
    let mut d: Vec<f64> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).map(|(i, j)| a.d(i, j)).collect();
    d.sort_by(f64::total_cmp);
    let m = d.len();
    let q = |p: f64| d[((p * (m - 1) as f64).round() as usize).min(m - 1)];
    let (r_min, r_max) = (q(window.0), q(window.1));
    if !(r_min > 0.0) || !(r_max > r_min) {
        return Err(Error::DegenerateScales(usize::from(r_max > 0.0)));
    }
    const SCALES: usize = 16;
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for s in 0..SCALES {
        let r = r_min * (r_max / r_min).powf(s as f64 / (SCALES - 1) as f64);
        let count = d.partition_point(|&v| v <= r);
        if count > 0 && pts.last().is_none_or(|&(_, c)| (count as f64).ln() > c) {
            pts.push((r.ln(), (count as f64).ln()));
        }
    }
    if pts.len() < 3 {
        return Err(Error::DegenerateScales(pts.len()));
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let slope = sxy / sxx;
    let residual = (pts.iter().map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2)).sum::<f64>() / k).sqrt();
    Ok(DimEstimate { dimension: slope, residual, r_min, r_max, scales: pts.len() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simplex(n: usize) -> FiniteMetricSpace {
        let rows = (0..n).map(|i| (0..n).map(|j| if i == j { 0.0 } else { 1.0 }).collect()).collect();
        FiniteMetricSpace::new(rows, 0).unwrap()
    }

    fn circle(n: usize, length: f64) -> FiniteMetricSpace {
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let k = (i as isize - j as isize).unsigned_abs();
                        k.min(n - k) as f64 * length / n as f64
                    })
                    .collect()
            })
            .collect();
        FiniteMetricSpace::new(rows, 0).unwrap()
    }

    #[test]
    fn axioms_are_enforced() {
        assert!(FiniteMetricSpace::new(vec![vec![0.0, 1.0], vec![2.0, 0.0]], 0).is_err());
        assert!(FiniteMetricSpace::new(vec![vec![1.0]], 0).is_err());
        let bad = vec![vec![0.0, 1.0, 5.0], vec![1.0, 0.0, 1.0], vec![5.0, 1.0, 0.0]];
        assert!(FiniteMetricSpace::new(bad, 0).is_err());
        assert!(FiniteMetricSpace::new(vec![vec![0.0]], 1).is_err());
    }

    #[test]
    fn exact_examples() {
        let p = simplex(1);
        assert_eq!(gh_exact(&simplex(2), &p).unwrap(), 0.5);
        assert_eq!(gh_exact(&simplex(3), &p).unwrap(), 0.5);
        assert_eq!(gh_exact(&circle(6, 6.0), &circle(6, 6.0)).unwrap(), 0.0);
        assert_eq!(gh_exact(&simplex(9), &p), Err(Error::TooLarge(9, 8)));
        // 2 points at distance 1 vs 2 points at distance 3
        let two = |d: f64| FiniteMetricSpace::new(vec![vec![0.0, d], vec![d, 0.0]], 0).unwrap();
        assert_eq!(gh_exact(&two(1.0), &two(3.0)).unwrap(), 1.0);
    }

    #[test]
    fn bounds_on_circle_vs_point() {
        let c = circle(40, 4.0);
        let b = gh_bound(&c, &simplex(1), 4, 0);
        assert!(b.lower >= 1.0 - 1e-12 && b.lower <= b.upper);
        assert!((b.upper - 1.0).abs() < 0.2);
        let same = gh_bound(&c, &c, 2, 0);
        assert_eq!((same.lower, same.upper), (0.0, 0.0));
    }

    #[test]
    fn hausdorff_on_line() {
        assert_eq!(hausdorff_sorted(&[0.0, 1.0], &[0.0, 1.0]), 0.0);
        assert_eq!(hausdorff_sorted(&[0.0, 1.0], &[0.0, 3.0]), 2.0);
        assert_eq!(hausdorff_sorted(&[0.0], &[0.0, 1.0, 2.0]), 2.0);
    }

    #[test]
    fn dimension_of_a_point_and_of_lines() {
        assert_eq!(dim_estimate(&simplex(1)).unwrap().dimension, 0.0);
        let pts: Vec<Vec<f64>> = (0..200).map(|i| vec![i as f64 / 199.0]).collect();
        let s = FiniteMetricSpace::from_points(&pts, 0).unwrap();
        let e = dim_estimate(&s).unwrap();
        assert!((e.dimension - 1.0).abs() < 0.2, "{e:?}");
        let e2 = dim_estimate(&s.scaled(37.0)).unwrap();
        assert!((e.dimension - e2.dimension).abs() < 1e-6);
        assert!(matches!(dim_estimate(&simplex(5)), Err(Error::DegenerateScales(_))));
    }
}
