// Property checks against independent oracles.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ricci_collapse::dilation::{select_point, CurvatureHistory};
use ricci_collapse::gh::{gh_bound_mode, gh_exact_mode, FiniteMetricSpace, GhMode};
use ricci_collapse::metric::{End, RadialProfile};
use ricci_collapse::pinching::{classify_sequence, lambda3_lower_bound, PinchingParams};
use ricci_collapse::virtual_limit::{cigar_compare_profile, extend_to_disk, overlap_identify, DEFAULT_TRIM};

/// Random metric: shortest paths over random positive edge weights.
fn random_space(rng: &mut ChaCha8Rng, n: usize) -> FiniteMetricSpace {
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let w = rng.gen_range(0.1..3.0);
            d[i][j] = w;
            d[j][i] = w;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    FiniteMetricSpace::new(d, rng.gen_range(0..n)).unwrap()
}

/// Half the least distortion over every relation with full projections.
fn brute_force_gh(a: &FiniteMetricSpace, b: &FiniteMetricSpace, pointed: bool) -> f64 {
    let (na, nb) = (a.len(), b.len());
    let pairs: Vec<(usize, usize)> = (0..na).flat_map(|i| (0..nb).map(move |j| (i, j))).collect();
    let mut best = f64::INFINITY;
    for mask in 1u32..(1 << pairs.len()) {
        let rel: Vec<(usize, usize)> = (0..pairs.len()).filter(|k| mask >> k & 1 == 1).map(|k| pairs[k]).collect();
        let covers_a = (0..na).all(|i| rel.iter().any(|p| p.0 == i));
        let covers_b = (0..nb).all(|j| rel.iter().any(|p| p.1 == j));
        if !covers_a || !covers_b || (pointed && !rel.contains(&(a.base(), b.base()))) {
            continue;
        }
        let mut dis = 0.0_f64;
        for &(i, j) in &rel {
            for &(k, l) in &rel {
                dis = dis.max((a.d(i, k) - b.d(j, l)).abs());
            }
        }
        best = best.min(dis);
    }
    0.5 * best
}

#[test]
fn gh_exact_is_a_pseudometric() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let spaces: Vec<FiniteMetricSpace> = (0..3).map(|_| {
            let n = rng.gen_range(1..=5);
            random_space(&mut rng, n)
        }).collect();
        let g = |x: usize, y: usize| gh_exact_mode(&spaces[x], &spaces[y], GhMode::Unpointed).unwrap();
        assert!(g(0, 0).abs() <= 1e-12);
        assert!((g(0, 1) - g(1, 0)).abs() <= 1e-12);
        assert!(g(0, 2) <= g(0, 1) + g(1, 2) + 1e-12);
        assert!(g(0, 1) >= 0.0);
    }
}

#[test]
fn gh_exact_matches_brute_force_on_small_spaces() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..300 {
        let (na, nb) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
        let a = random_space(&mut rng, na);
        let b = random_space(&mut rng, nb);
        for (mode, pointed) in [(GhMode::Unpointed, false), (GhMode::Pointed, true)] {
            let exact = gh_exact_mode(&a, &b, mode).unwrap();
            let oracle = brute_force_gh(&a, &b, pointed);
            assert!((exact - oracle).abs() < 1e-12, "{exact} vs {oracle}");
        }
    }
}

#[test]
fn bounds_sandwich_the_exact_value() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for trial in 0..200 {
        let (na, nb) = (rng.gen_range(1..=7), rng.gen_range(1..=7));
        let a = random_space(&mut rng, na);
        let b = random_space(&mut rng, nb);
        for mode in [GhMode::Unpointed, GhMode::Pointed] {
            let exact = gh_exact_mode(&a, &b, mode).unwrap();
            let bounds = gh_bound_mode(&a, &b, 4, trial, mode);
            assert!(bounds.lower <= exact + 1e-12 && exact <= bounds.upper + 1e-12, "{bounds:?} vs {exact}");
        }
    }
}

fn tanh_window(r0: f64, len: f64, n: usize, shift: f64) -> RadialProfile {
    RadialProfile::from_fn(r0, r0 + len, n, |_| 1.0, move |x| (x + shift).tanh(), End::Open, End::Open).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn overlap_shifts_compose(s1 in 0.3f64..0.9, s2 in 0.3f64..0.9) {
        // A, B, C sample tanh(x + 1), tanh(x + 1 + s1), tanh(x + 1 + s1 + s2)
        let (a, b, c) = (tanh_window(0.0, 3.0, 151, 1.0), tanh_window(0.0, 3.0, 151, 1.0 + s1), tanh_window(0.0, 3.0, 151, 1.0 + s1 + s2));
        let h = a.spacing();
        let ab = overlap_identify(&a, &b, (s1 - 0.5, s1 + 0.5)).unwrap().shift;
        let bc = overlap_identify(&b, &c, (s2 - 0.5, s2 + 0.5)).unwrap().shift;
        let ac = overlap_identify(&a, &c, (s1 + s2 - 0.5, s1 + s2 + 0.5)).unwrap().shift;
        prop_assert!((ac - ab - bc).abs() < h / 4.0);
    }

    #[test]
    fn cone_order_is_scale_invariant(p in 1u32..=6, s in 0.2f64..5.0) {
        let n = 201;
        let r: Vec<f64> = (0..n).map(|j| j as f64 * 0.02).collect();
        let f: Vec<f64> = r.iter().map(|x| s * x.tanh() / p as f64).collect();
        let prof = RadialProfile::with_ends(r, vec![s; n], f, End::Unresolved, End::Open, 0.0).unwrap();
        let e = extend_to_disk(&prof).unwrap();
        prop_assert_eq!(e.cone_order, (p > 1).then_some(p));
    }

    #[test]
    fn cigar_deviation_is_scale_invariant(s in 0.2f64..5.0) {
        let p = RadialProfile::from_fn(0.0, 6.0, 301, |_| 1.0, f64::tanh, End::Smooth, End::Open).unwrap();
        let q = p.with_fields(p.phi().iter().map(|v| s * v).collect(), p.f().iter().map(|v| s * v).collect()).unwrap();
        let (d0, d1) = (cigar_compare_profile(&p, DEFAULT_TRIM).unwrap().deviation, cigar_compare_profile(&q, DEFAULT_TRIM).unwrap().deviation);
        prop_assert!((d0 - d1).abs() < 1e-10);
    }

    #[test]
    fn sequence_verdict_survives_reparametrisation(sigma in 0.1f64..10.0) {
        let t: Vec<f64> = (1..=50).map(f64::from).collect();
        for k in [t.iter().map(|t| 1.0 / t).collect::<Vec<_>>(), vec![1.0; 50]] {
            let ts: Vec<f64> = t.iter().map(|x| sigma * x).collect();
            let ks: Vec<f64> = k.iter().map(|x| x / sigma).collect();
            prop_assert_eq!(classify_sequence(&t, &k, 1.0).kind, classify_sequence(&ts, &ks, 1.0).kind);
        }
    }

    #[test]
    fn selection_is_scale_invariant(c in 0.01f64..100.0) {
        let times: Vec<f64> = (0..=200).map(|i| i as f64 * 0.05).collect();
        let field = |c: f64| times.iter().map(|&t| (0..4).map(|j| c * (t.exp() + j as f64)).collect()).collect();
        let a = select_point(&CurvatureHistory::from_rm_fields(times.clone(), field(1.0), 0.1).unwrap(), 10.0, 0.0).unwrap();
        let b = select_point(&CurvatureHistory::from_rm_fields(times.clone(), field(c), 0.1).unwrap(), 10.0, 0.0).unwrap();
        prop_assert_eq!((a.t_i, a.point_index), (b.t_i, b.point_index));
    }

    #[test]
    fn lambda3_bound_is_superlinear(extra in 0.0f64..30.0, c0 in 0.1f64..10.0, t in 0.0f64..5.0) {
        let params = PinchingParams::new(c0, 0.0).unwrap();
        let m = (22.0 + extra).exp() / (1.0 / c0 + t);
        prop_assert!(lambda3_lower_bound(-m, &params, t).unwrap() / m > 10.0);
    }
}
