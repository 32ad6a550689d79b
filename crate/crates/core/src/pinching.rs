//! Curvature pinching inequalities and sequence classification.
//!
//! The Hamilton–Ivey type lower bound `R >= -l1 [ln(-l1) + ln(1 + C0 t) - ln C0 - 3]`
//! (valid wherever `l1 < 0`), the derived lower bound on `l3`, and the
//! bookkeeping that decides whether a dilation sequence is Type III-like or
//! Type IIb-like and whether its origins are bump-like or split-like.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::CurvatureSpectrum;

/// Default witness threshold for bump-like origins.
pub const DEFAULT_C_THRESHOLD: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PinchingParams {
    /// Initial lower bound `lambda1 >= -c0` at time 0.
    pub c0: f64,
    /// Slack for floating-point comparisons.
    pub tolerance: f64,
}

impl PinchingParams {
    pub fn new(c0: f64, tolerance: f64) -> Result<Self> {
        if !(c0 > 0.0) || !(tolerance >= 0.0) {
            return Err(Error::DomainError(format!(
                "pinching params need c0 > 0 and tolerance >= 0, got ({c0}, {tolerance})"
            )));
        }
        Ok(PinchingParams { c0, tolerance })
    }
}

fn require_negative(lambda1: f64) -> Result<()> {
    if lambda1 < 0.0 {
        Ok(())
    } else {
        Err(Error::DomainError(format!("the bound needs lambda1 < 0, got {lambda1}")))
    }
}

/// Lower bound on the scalar curvature at a point where `lambda1 < 0`.
pub fn hamilton_ivey_threshold(lambda1: f64, params: &PinchingParams, t: f64) -> Result<f64> {
    require_negative(lambda1)?;
    let m = -lambda1;
    Ok(m * (m.ln() + (params.c0 * t).ln_1p() - params.c0.ln() - 3.0))
}

/// Lower bound `lambda3 >= -l1/2 ln[-l1 (1/C0 + t) e^-2]`, obtained from the
/// scalar bound and `R <= lambda1 + 2 lambda3`. Negative values are vacuous.
pub fn lambda3_lower_bound(lambda1: f64, params: &PinchingParams, t: f64) -> Result<f64> {
    require_negative(lambda1)?;
    let m = -lambda1;
    Ok(0.5 * m * (m.ln() + (1.0 / params.c0 + t).ln() - 2.0))
}

/// A point-time where the scalar bound fails.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub grid_index: usize,
    pub time_index: usize,
    pub lambda1: f64,
    pub scalar: f64,
    pub threshold: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PinchingReport {
    pub violations: Vec<Violation>,
    /// Number of point-times where `lambda1 < 0` and the bound was tested.
    pub tested: usize,
}

impl PinchingReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Tests the scalar lower bound at every point-time with `lambda1 < 0`.
pub fn check_pinching(times: &[f64], spectra: &[CurvatureSpectrum], params: &PinchingParams) -> PinchingReport {
    let mut report = PinchingReport::default();
    for (ti, (&t, s)) in times.iter().zip(spectra).enumerate() {
        for j in 0..s.len() {
            let l1 = s.lambda1[j];
            if l1 >= 0.0 {
                continue;
            }
            report.tested += 1;
            let threshold = hamilton_ivey_threshold(l1, params, t).expect("lambda1 < 0 checked above");
            if s.scalar[j] < threshold - params.tolerance {
                report.violations.push(Violation {
                    grid_index: j,
                    time_index: ti,
                    lambda1: l1,
                    scalar: s.scalar[j],
                    threshold,
                });
            }
        }
    }
    report
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "witness")]
pub enum OriginKind {
    /// `lambda1 / |Rm| >= c` with the witness `c`.
    BumpLike(f64),
    SplitLike,
}

/// Classifies an essential origin from its eigenvalues.
pub fn classify_origin(lambdas: [f64; 3], c_threshold: f64) -> Result<OriginKind> {
    let mut l = lambdas;
    l.sort_by(f64::total_cmp);
    let norm = (l[0] * l[0] + l[1] * l[1] + l[2] * l[2]).sqrt();
    if norm == 0.0 {
        return Err(Error::NotEssential);
    }
    let ratio = l[0] / norm;
    Ok(if ratio >= c_threshold { OriginKind::BumpLike(ratio) } else { OriginKind::SplitLike })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SequenceKind {
    TypeIIILike,
    TypeIIbLike,
    Indeterminate,
}

/// Verdict plus the raw `t_i K_i` products the heuristic looked at.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceVerdict {
    pub kind: SequenceKind,
    pub t_k: Vec<f64>,
    pub c: f64,
}

/// Type III-like when `K_i <= C / t_i` for every sample; Type IIb-like when
/// `t_i K_i` ends more than ten times above its first value and is
/// nondecreasing over the final half of the samples.
pub fn classify_sequence(t_list: &[f64], k_list: &[f64], c: f64) -> SequenceVerdict {
    let t_k: Vec<f64> = t_list.iter().zip(k_list).map(|(t, k)| t * k).collect();
    let kind = if t_k.is_empty() {
        SequenceKind::Indeterminate
    } else if t_k.iter().all(|&p| p <= c * (1.0 + 1e-12)) {
        SequenceKind::TypeIIILike
    } else {
        let n = t_k.len();
        let tail = &t_k[n / 2..];
        let monotone = tail.windows(2).all(|w| w[1] >= w[0]);
        if n >= 2 && t_k[n - 1] > 10.0 * t_k[0] && monotone {
            SequenceKind::TypeIIbLike
        } else {
            SequenceKind::Indeterminate
        }
    };
    SequenceVerdict { kind, t_k, c }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnscReport {
    pub holds: bool,
    /// Smallest `min(lambda1) / delta_i` over the members.
    pub worst_ratio: f64,
    pub deltas: Vec<f64>,
}

/// Geometric schedule `delta_i = delta0 2^-i`.
pub fn geometric_deltas(delta0: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| delta0 * 0.5_f64.powi(i as i32)).collect()
}

/// Checks `min lambda1 >= -delta_i` on the ball sampled by each member's spectrum.
pub fn ansc_verify(members: &[CurvatureSpectrum], deltas: &[f64]) -> Result<AnscReport> {
    if deltas.len() != members.len() {
        return Err(Error::DomainError(format!(
            "{} members but {} deltas",
            members.len(),
            deltas.len()
        )));
    }
    if deltas.iter().any(|&d| !(d > 0.0)) || deltas.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::DomainError("deltas must be positive and nonincreasing".into()));
    }
    let mut holds = true;
    let mut worst = f64::INFINITY;
    for (s, &d) in members.iter().zip(deltas) {
        let min_l1 = s.lambda1.iter().cloned().fold(f64::INFINITY, f64::min);
        if min_l1 < -d {
            holds = false;
        }
        worst = worst.min(min_l1 / d);
    }
    Ok(AnscReport { holds, worst_ratio: worst, deltas: deltas.to_vec() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn params(c0: f64) -> PinchingParams {
        PinchingParams::new(c0, 0.0).unwrap()
    }

    #[test]
    fn threshold_points() {
        assert!((hamilton_ivey_threshold(-1.0, &params(1.0), 0.0).unwrap() + 3.0).abs() < 1e-12);
        for (c0, t) in [(1.0, 0.0), (2.0, 3.0), (0.5, 10.0)] {
            let l1 = -c0 * E.powi(3) / (1.0 + c0 * t);
            assert!(hamilton_ivey_threshold(l1, &params(c0), t).unwrap().abs() < 1e-12);
        }
        assert!(hamilton_ivey_threshold(-1e-9, &params(1.0), 0.0).unwrap().abs() < 3e-8);
        assert!(hamilton_ivey_threshold(0.0, &params(1.0), 0.0).is_err());
    }

    #[test]
    fn lambda3_points() {
        let p = params(1.0);
        assert!(lambda3_lower_bound(-E * E, &p, 0.0).unwrap().abs() < 1e-12);
        let v = lambda3_lower_bound(-E.powi(4), &p, 0.0).unwrap();
        assert!((v - E.powi(4)).abs() < 1e-12);
        assert!((lambda3_lower_bound(-1.0, &p, 0.0).unwrap() + 1.0).abs() < 1e-12);
        assert!(lambda3_lower_bound(1.0, &p, 0.0).is_err());
    }

    #[test]
    fn origin_classification() {
        match classify_origin([1.0, 1.0, 1.0], 0.1).unwrap() {
            OriginKind::BumpLike(c) => assert!((c - 1.0 / 3f64.sqrt()).abs() < 1e-15),
            other => panic!("{other:?}"),
        }
        assert_eq!(classify_origin([0.0, 0.0, 2.0], 0.1).unwrap(), OriginKind::SplitLike);
        assert_eq!(classify_origin([0.01, 1.0, 1.0], 0.1).unwrap(), OriginKind::SplitLike);
        assert_eq!(classify_origin([0.0; 3], 0.1), Err(Error::NotEssential));
    }

    #[test]
    fn sequence_classification() {
        let t: Vec<f64> = (1..=20).map(f64::from).collect();
        let inv: Vec<f64> = t.iter().map(|t| 1.0 / t).collect();
        assert_eq!(classify_sequence(&t, &inv, 1.0).kind, SequenceKind::TypeIIILike);
        let ones = vec![1.0; t.len()];
        assert_eq!(classify_sequence(&t, &ones, 1.0).kind, SequenceKind::TypeIIbLike);
        // t K = ln(1 + i) only clears the 10x escape test once i > 2^10
        let t: Vec<f64> = (1..=2000).map(f64::from).collect();
        let logs: Vec<f64> = t.iter().map(|t| (1.0 + t).ln() / t).collect();
        assert_eq!(classify_sequence(&t, &logs, 1.0).kind, SequenceKind::TypeIIbLike);
        let wobble = [1.0, 5.0, 2.0, 6.0, 3.0];
        let ts = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(classify_sequence(&ts, &wobble, 1.0).kind, SequenceKind::Indeterminate);
    }

    #[test]
    fn ansc_cases() {
        let pos = CurvatureSpectrum::from_triples([[0.0, 1.0, 2.0], [0.5, 0.5, 0.5]]);
        let r = ansc_verify(&[pos.clone(), pos], &[1.0, 0.5]).unwrap();
        assert!(r.holds);
        let neg = CurvatureSpectrum::from_triples([[-1.0, 1.0, 2.0]]);
        let r = ansc_verify(&[neg], &[0.5]).unwrap();
        assert!(!r.holds);
        assert_eq!(r.worst_ratio, -2.0);
        assert_eq!(geometric_deltas(1.0, 3), vec![1.0, 0.5, 0.25]);
        assert!(ansc_verify(&[], &[]).unwrap().holds);
    }
}
