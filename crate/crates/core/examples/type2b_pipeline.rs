//! The whole chain through the library API: flow the cigar, dilate about
//! the selected point, cut and reglue the rescaled surface, close it into
//! a disk and compare with the cigar. Artifacts go to a scratch directory.

use std::path::Path;

use ricci_collapse::pipeline::{run, Command, Manifest, Recipe, RunConfig};

pub fn run_in(out: &Path) -> ricci_collapse::Result<(Manifest, serde_json::Value)> {
    let m = run(Command::Pipeline, Some(Recipe::Type2b), &RunConfig::default(), out, 0)?;
    let summary = ricci_collapse::io::read_json(&out.join("summary.json"))?;
    Ok((m, summary))
}

pub fn run_example() -> ricci_collapse::Result<serde_json::Value> {
    let dir = std::env::temp_dir().join(format!("ricci-collapse-type2b-{}", std::process::id()));
    let (_, summary) = run_in(&dir)?;
    std::fs::remove_dir_all(&dir)?;
    Ok(summary)
}

#[allow(dead_code)]
fn main() -> ricci_collapse::Result<()> {
    let s = run_example()?;
    for m in s["members"].as_array().into_iter().flatten() {
        println!(
            "eps {:<5} K_i {:.4} cigar deviation {:.3e} cone {:?}",
            m["epsilon_fiber"], m["record"]["K_i"].as_f64().unwrap_or(f64::NAN), m["cigar_deviation"].as_f64().unwrap_or(f64::NAN), m["cone_order"]
        );
    }
    println!("pass: {}", s["pass"]);
    Ok(())
}
