//! File formats: profile CSV + sidecar JSON, solution directories,
//! distance-matrix CSV + metadata, and JSON reports.
//!
//! Floats are written in `{:.16e}` so every value round-trips exactly.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::collapse::SampledSpace;
use crate::error::{Error, Result};
use crate::flow::{Blowup, SurfaceSolution};
use crate::gh::FiniteMetricSpace;
use crate::metric::{End, RadialProfile};

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Sidecar of a profile CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileMeta {
    pub time_stamp: f64,
    pub closed_tip: bool,
    pub cone_order: Option<u32>,
    pub tip: End,
    pub end: End,
}

impl ProfileMeta {
    pub fn of(p: &RadialProfile) -> Self {
        ProfileMeta { time_stamp: p.time_stamp(), closed_tip: p.closed_tip(), cone_order: p.cone_order(), tip: p.tip(), end: p.end() }
    }
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let s = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(serde_json::from_str(&s)?)
}

/// Writes rows of floats under `header`.
pub fn write_table(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    if !header.is_empty() {
        w.write_record(header).map_err(csv_err)?;
    }
    for row in rows {
        w.write_record(row.iter().map(|v| num(*v))).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn read_table(path: &Path, has_header: bool) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::ReaderBuilder::new().has_headers(has_header).from_path(path).map_err(csv_err)?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let row = rec
            .iter()
            .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Io(format!("{}: `{s}`: {e}", path.display()))))
            .collect::<Result<Vec<_>>>()?;
        out.push(row);
    }
    Ok(out)
}

fn sidecar(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

/// `r,phi,f` CSV at `path` plus `path.json`-style sidecar (same stem).
pub fn write_profile(path: &Path, p: &RadialProfile) -> Result<()> {
    let rows = (0..p.len()).map(|j| vec![p.r_grid()[j], p.phi()[j], p.f()[j]]);
    write_table(path, &["r", "phi", "f"], rows)?;
    write_json(&sidecar(path), &ProfileMeta::of(p))
}

/// Reads a profile; without a sidecar both ends are taken as open.
pub fn read_profile(path: &Path) -> Result<RadialProfile> {
    let rows = read_table(path, true)?;
    if rows.iter().any(|r| r.len() != 3) {
        return Err(Error::Io(format!("{}: expected columns r,phi,f", path.display())));
    }
    let col = |k: usize| rows.iter().map(|r| r[k]).collect::<Vec<_>>();
    let meta_path = sidecar(path);
    let (tip, end, t) = if meta_path.exists() {
        let m: ProfileMeta = read_json(&meta_path)?;
        (m.tip, m.end, m.time_stamp)
    } else {
        (End::Open, End::Open, 0.0)
    };
    RadialProfile::with_ends(col(0), col(1), col(2), tip, end, t)
}

/// Where a rescaled solution came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: String,
    pub record: serde_json::Value,
    pub beta: f64,
    pub psi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionIndex {
    pub times: Vec<f64>,
    pub theta_scale: Vec<f64>,
    pub points: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub tip: End,
    pub end: End,
    pub blowup: Option<Blowup>,
    pub files: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

/// One `profile_NNNNN.csv` per time plus `index.json`.
pub fn write_solution(dir: &Path, sol: &SurfaceSolution, provenance: Option<Provenance>) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut files = Vec::new();
    for (k, p) in sol.profiles().iter().enumerate() {
        let name = format!("profile_{k:05}.csv");
        let path = dir.join(&name);
        write_profile(&path, p)?;
        written.push(path.clone());
        written.push(sidecar(&path));
        files.push(name);
    }
    let first = &sol.profiles()[0];
    let index = SolutionIndex {
        times: sol.times().to_vec(),
        theta_scale: sol.theta_scale().to_vec(),
        points: first.len(),
        r_min: first.r_grid()[0],
        r_max: first.r_grid()[first.len() - 1],
        tip: first.tip(),
        end: first.end(),
        blowup: sol.blowup(),
        files,
        provenance,
    };
    let ip = dir.join("index.json");
    write_json(&ip, &index)?;
    written.push(ip);
    Ok(written)
}

pub fn read_solution(dir: &Path) -> Result<(SurfaceSolution, SolutionIndex)> {
    let index: SolutionIndex = read_json(&dir.join("index.json"))?;
    let profiles = index.files.iter().map(|f| read_profile(&dir.join(f))).collect::<Result<Vec<_>>>()?;
    let sol = SurfaceSolution::from_parts(profiles, index.theta_scale.clone(), index.blowup)?;
    Ok((sol, index))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceMeta {
    pub n: usize,
    pub base: usize,
    pub seed: Option<u64>,
    pub window: Option<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub coords: Vec<[f64; 3]>,
}

/// Headerless `n x n` distance matrix plus metadata sidecar.
pub fn write_space(path: &Path, space: &FiniteMetricSpace, meta: &SpaceMeta) -> Result<()> {
    write_table(path, &[], space.rows())?;
    write_json(&sidecar(path), meta)
}

pub fn write_sampled(path: &Path, s: &SampledSpace) -> Result<()> {
    let meta = SpaceMeta { n: s.space.len(), base: s.space.base(), seed: Some(s.seed), window: Some(s.window), coords: s.coords.clone() };
    write_space(path, &s.space, &meta)
}

/// Reads a distance matrix; the base point comes from the sidecar if present.
pub fn read_space(path: &Path) -> Result<(FiniteMetricSpace, Option<SpaceMeta>)> {
    let rows = read_table(path, false)?;
    let meta_path = sidecar(path);
    let meta: Option<SpaceMeta> = if meta_path.exists() { Some(read_json(&meta_path)?) } else { None };
    let base = meta.as_ref().map_or(0, |m| m.base);
    Ok((FiniteMetricSpace::new(rows, base)?, meta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{evolve, FlowConfig};

    #[test]
    fn profile_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let p = RadialProfile::from_fn(0.0, 3.0, 31, |r| 1.0 + 0.1 * r, f64::tanh, End::Smooth, End::Open)
            .unwrap()
            .with_time_stamp(0.125);
        let path = dir.path().join("p.csv");
        write_profile(&path, &p).unwrap();
        assert_eq!(read_profile(&path).unwrap(), p);
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("r,phi,f\n"));
    }

    #[test]
    fn solution_and_space_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = RadialProfile::from_fn(0.0, 4.0, 41, |_| 1.0, f64::tanh, End::Smooth, End::Open).unwrap();
        let sol = evolve(&p, 0.05, 20, &FlowConfig::default()).unwrap();
        write_solution(dir.path(), &sol, None).unwrap();
        let (back, index) = read_solution(dir.path()).unwrap();
        assert_eq!(back, sol);
        assert_eq!(index.points, 41);

        let space = FiniteMetricSpace::from_points(&[vec![0.0], vec![1.0], vec![3.0]], 1).unwrap();
        let path = dir.path().join("d.csv");
        write_space(&path, &space, &SpaceMeta { n: 3, base: 1, seed: Some(7), window: None, coords: vec![] }).unwrap();
        let (s2, meta) = read_space(&path).unwrap();
        assert_eq!(s2, space);
        assert_eq!(meta.unwrap().seed, Some(7));
    }
}
