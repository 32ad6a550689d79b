// Every runnable example, run as a test.

#[allow(dead_code)]
#[path = "../examples/curvature_kernels.rs"]
mod curvature_kernels;
#[allow(dead_code)]
#[path = "../examples/sphere_flow.rs"]
mod sphere_flow;
#[allow(dead_code)]
#[path = "../examples/cigar_steady.rs"]
mod cigar_steady;
#[allow(dead_code)]
#[path = "../examples/pinching_bounds.rs"]
mod pinching_bounds;
#[allow(dead_code)]
#[path = "../examples/type2b_dilation.rs"]
mod type2b_dilation;
#[allow(dead_code)]
#[path = "../examples/collapse_gh.rs"]
mod collapse_gh;
#[allow(dead_code)]
#[path = "../examples/glue_windows.rs"]
mod glue_windows;
#[allow(dead_code)]
#[path = "../examples/local_models.rs"]
mod local_models;
#[allow(dead_code)]
#[path = "../examples/type2b_pipeline.rs"]
mod type2b_pipeline;

#[test]
fn curvature_converges_at_second_order() {
    let e = curvature_kernels::run_example().unwrap();
    for (h, err) in &e {
        assert!(*err < 4.0 * h * h);
    }
    let ratio = e[0].1 / e[1].1;
    assert!((3.5..=4.5).contains(&ratio), "{ratio}");
}

#[test]
fn sphere_flow_matches_ode() {
    let r = sphere_flow::run_example().unwrap();
    assert!(r.k_rel_error < 1e-3 && r.area_rel_error < 1e-2);
}

#[test]
fn cigar_stays_put() {
    let r = cigar_steady::run_example().unwrap();
    assert!(r.scalar_drift < 0.01 && r.deviation < 0.02);
}

#[test]
fn pinching_example() {
    let r = pinching_bounds::run_example().unwrap();
    assert!((r.thresholds[0] + 3.0).abs() < 1e-12 && r.thresholds[1].abs() < 1e-12);
    assert_eq!(r.lifted_violations, 0);
    assert_eq!(r.planted_violations, 1);
}

#[test]
fn dilation_example() {
    let r = type2b_dilation::run_example().unwrap();
    assert!((r.rm_at_origin - 1.0).abs() < 1e-6);
    assert!(r.worst_excess <= 1e-8);
    assert!(r.records.windows(2).all(|w| w[1].alpha_i > w[0].alpha_i));
}

#[test]
fn collapse_example() {
    let r = collapse_gh::run_example().unwrap();
    for (eps, b) in &r.bounds {
        assert!(b.lower <= b.upper && b.upper <= 4.0 * eps);
    }
    assert!((r.interval_dim - 1.0).abs() < 0.2 && (r.disk_dim - 2.0).abs() < 0.3);
}

#[test]
fn glue_example() {
    let r = glue_windows::run_example().unwrap();
    assert!(r.reconstruction_error < 2.0 * r.h * r.h);
    assert!(r.shifts.iter().all(|s| (s - 4.0).abs() < r.h / 8.0));
    assert_eq!(r.cone_order, None);
    assert!(r.quotient_min_k > 0.0);
}

#[test]
fn local_model_example() {
    let (verdicts, checks) = local_models::run_example().unwrap();
    assert_eq!(verdicts.len(), 10);
    assert_eq!(checks, [true; 3]);
}

#[test]
fn pipeline_example() {
    let s = type2b_pipeline::run_example().unwrap();
    assert_eq!(s["pass"], serde_json::Value::Bool(true));
}
