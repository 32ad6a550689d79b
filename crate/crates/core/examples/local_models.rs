//! The local-model table of the collapsed limit, and the one-singular-point
//! rule for positively curved orbifold limits.

use ricci_collapse::virtual_limit::{
    classify_local_model, detect_singular_points, GammaDescriptor as G, LocalVerdict, OrbifoldPoint, PointKind,
};

/// `(m, Gamma, has_fixed_point)` for every table row.
pub const ROWS: [(u32, G, bool); 8] = [
    (1, G::Trivial, false),
    (1, G::Z2ThetaU, false),
    (1, G::Z2RU, true),
    (1, G::Z2RTheta, true),
    (2, G::SO2, true),
    (2, G::O2, true),
    (2, G::Zp(3), true),
    (2, G::D2p(3), true),
];

pub fn run_example() -> ricci_collapse::Result<(Vec<LocalVerdict>, [bool; 3])> {
    let mut verdicts = Vec::new();
    for (m, gamma, fixed) in ROWS {
        verdicts.push(classify_local_model(m, gamma, 0.5, 1.0, fixed)?);
    }
    verdicts.push(classify_local_model(0, G::Trivial, 0.0, 1.0, false)?);
    verdicts.push(classify_local_model(3, G::Trivial, 0.0, 1.0, false)?);

    let pos_k = [1.0, 0.5, 0.1];
    let smooth = [OrbifoldPoint { position: 0.0, kind: PointKind::Regular }];
    let one = [OrbifoldPoint { position: 0.0, kind: PointKind::Cone(2) }];
    let two = [one[0], OrbifoldPoint { position: 5.0, kind: PointKind::Cone(3) }];
    let a = detect_singular_points(&smooth, &pos_k);
    let b = detect_singular_points(&one, &pos_k);
    let c = detect_singular_points(&two, &pos_k);
    let checks = [
        a.singular.is_empty() && !a.rule_violation,
        b.singular.len() == 1 && !b.rule_violation,
        c.singular.len() == 2 && c.rule_violation,
    ];
    Ok((verdicts, checks))
}

#[allow(dead_code)]
fn main() -> ricci_collapse::Result<()> {
    let (verdicts, checks) = run_example()?;
    for v in &verdicts {
        println!("{}", serde_json::to_string(v).expect("serialisable"));
    }
    println!("singular-point cases pass: {checks:?}");
    Ok(())
}
