//! Batch runs driven by one JSON config: each command writes CSV/JSON
//! artifacts plus a `manifest.json` with content hashes.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::collapse::{inj_proxy, make_family, sample_space, SampleConfig, SampleTarget};
use crate::dilation::{dilatable_check, rescale, rescale_history, rescaled_bound, select_point, CurvatureHistory, DilationRecord};
use crate::error::{Error, Result};
use crate::flow::{evolve, lift_product, FlowConfig, SurfaceSolution};
use crate::gh::{dim_estimate, gh_bound, gh_exact_mode, GhMode, EXACT_LIMIT};
use crate::io::{self, Provenance};
use crate::metric::{gauss_curvature, End, RadialProfile};
use crate::pinching::{check_pinching, PinchingParams};
use crate::virtual_limit::{
    arclength_solution, cigar_compare_profiles, classify_local_model, cut_windows, detect_singular_points, extend_to_disk,
    glue, GammaDescriptor, GlueConfig, LocalVerdict, OrbifoldPoint, PointKind,
};

/// Initial surface.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileSpec {
    /// `f = tanh r`, `phi = 1` on `[0, length]`.
    Cigar { length: f64, h: f64 },
    /// Round sphere of the given radius, both ends closed.
    Sphere { radius: f64, h: f64 },
    /// Flat disk `f = r` on `[0, length]`.
    Disk { length: f64, h: f64 },
    /// A profile CSV (with its sidecar).
    File { path: PathBuf },
}

impl Default for ProfileSpec {
    fn default() -> Self {
        ProfileSpec::Cigar { length: 8.0, h: 0.04 }
    }
}

impl ProfileSpec {
    fn validate(&self) -> Result<()> {
        let grid = |len: f64, h: f64| {
            if !(len > 0.0 && len.is_finite()) {
                return Err(Error::Config(format!("profile length {len} must be positive")));
            }
            if !(h > 0.0) || len / h < 5.0 {
                return Err(Error::Config(format!("grid spacing h = {h} must be positive and give at least 5 points")));
            }
            Ok(())
        };
        match self {
            ProfileSpec::Cigar { length, h } | ProfileSpec::Disk { length, h } => grid(*length, *h),
            ProfileSpec::Sphere { radius, h } => grid(std::f64::consts::PI * radius, *h),
            ProfileSpec::File { .. } => Ok(()),
        }
    }

    pub fn build(&self) -> Result<RadialProfile> {
        let points = |len: f64, h: f64| (len / h).round() as usize + 1;
        match self {
            ProfileSpec::Cigar { length, h } => {
                RadialProfile::from_fn(0.0, *length, points(*length, *h), |_| 1.0, f64::tanh, End::Smooth, End::Open)
            }
            ProfileSpec::Disk { length, h } => {
                RadialProfile::from_fn(0.0, *length, points(*length, *h), |_| 1.0, |r| r, End::Smooth, End::Open)
            }
            ProfileSpec::Sphere { radius, h } => {
                let len = std::f64::consts::PI * radius;
                let rr = *radius;
                RadialProfile::from_fn(0.0, len, points(len, *h), |_| 1.0, |r| rr * (r / rr).sin(), End::Smooth, End::Smooth)
            }
            ProfileSpec::File { path } => io::read_profile(path),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowSpec {
    pub t_end: f64,
    pub output_stride: usize,
    pub cfl_fraction: f64,
    pub blowup_ceiling: f64,
}

impl Default for FlowSpec {
    fn default() -> Self {
        let d = FlowConfig::default();
        FlowSpec { t_end: 1.0, output_stride: 50, cfl_fraction: d.cfl_fraction, blowup_ceiling: d.blowup_ceiling }
    }
}

impl FlowSpec {
    fn config(&self) -> FlowConfig {
        FlowConfig { cfl_fraction: self.cfl_fraction, blowup_ceiling: self.blowup_ceiling, ..FlowConfig::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CollapseSpec {
    /// Fiber lengths, strictly decreasing.
    pub epsilons: Vec<f64>,
    pub twist: Option<(f64, f64)>,
    pub samples: usize,
    pub window: (f64, f64),
    pub theta_nodes: usize,
    pub fiber_nodes: usize,
    pub radial_stride: usize,
}

impl Default for CollapseSpec {
    fn default() -> Self {
        CollapseSpec {
            epsilons: vec![0.2, 0.1, 0.05],
            twist: None,
            samples: 64,
            window: (0.0, 6.0),
            theta_nodes: 64,
            fiber_nodes: 8,
            radial_stride: 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DilationSpec {
    /// Window ends `T_i`, strictly increasing.
    pub t_schedule: Vec<f64>,
    /// Selection slack `eps_i` in `[0, 1)`.
    pub epsilon_schedule: Vec<f64>,
    /// Rescaled window is `[-beta_fraction alpha_i, psi_fraction omega_i]`.
    pub beta_fraction: f64,
    pub psi_fraction: f64,
    /// Radius of the dilatability ball.
    pub rho: f64,
}

impl Default for DilationSpec {
    fn default() -> Self {
        DilationSpec {
            t_schedule: vec![0.6, 0.8, 1.0],
            epsilon_schedule: vec![0.1, 0.05, 0.025],
            beta_fraction: 0.5,
            psi_fraction: 0.5,
            rho: 2.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GhSpec {
    pub iterations: usize,
    /// Explicit spaces to compare; otherwise the collapse family is sampled.
    pub a: Option<PathBuf>,
    pub b: Option<PathBuf>,
    pub pointed: bool,
}

impl Default for GhSpec {
    fn default() -> Self {
        GhSpec { iterations: 8, a: None, b: None, pointed: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GlueSpec {
    /// Profile CSV to cut and reglue; otherwise the configured profile.
    pub input: Option<PathBuf>,
    /// Resample to arclength with this spacing before cutting.
    pub arclength_spacing: Option<f64>,
    pub seam_tol: f64,
    pub search_half_width: f64,
}

impl Default for GlueSpec {
    fn default() -> Self {
        let g = GlueConfig::default();
        GlueSpec { input: None, arclength_spacing: Some(0.04), seam_tol: g.seam_tol, search_half_width: g.search_half_width }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareSpec {
    /// Profile CSV or solution directory; otherwise the configured profile.
    pub input: Option<PathBuf>,
    pub trim: usize,
    /// Pass threshold on the deviation.
    pub tolerance: f64,
}

impl Default for CompareSpec {
    fn default() -> Self {
        CompareSpec { input: None, trim: crate::virtual_limit::DEFAULT_TRIM, tolerance: 0.05 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelQuery {
    pub m: u32,
    pub gamma: GammaDescriptor,
    #[serde(default)]
    pub a: f64,
    #[serde(default = "one")]
    pub b: f64,
    #[serde(default)]
    pub has_fixed_point: bool,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifySpec {
    pub models: Vec<ModelQuery>,
    pub points: Vec<OrbifoldPoint>,
    pub curvature: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub profile: ProfileSpec,
    pub flow: FlowSpec,
    pub collapse: CollapseSpec,
    pub dilation: DilationSpec,
    pub gh: GhSpec,
    pub glue: GlueSpec,
    pub compare: CompareSpec,
    pub classify: ClassifySpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            profile: ProfileSpec::default(),
            flow: FlowSpec::default(),
            collapse: CollapseSpec::default(),
            dilation: DilationSpec::default(),
            gh: GhSpec::default(),
            glue: GlueSpec::default(),
            compare: CompareSpec::default(),
            classify: ClassifySpec::default(),
        }
    }
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let cfg: RunConfig = serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks tolerances and schedules before anything is written.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        self.profile.validate()?;
        let f = &self.flow;
        if !(f.t_end > 0.0) || f.output_stride == 0 || !(f.cfl_fraction > 0.0 && f.cfl_fraction <= 1.0) || !(f.blowup_ceiling > 0.0) {
            return bad(format!("flow block needs t_end > 0, stride >= 1, 0 < cfl <= 1, ceiling > 0: {f:?}"));
        }
        let c = &self.collapse;
        if c.epsilons.is_empty() || c.epsilons.iter().any(|&e| !(e > 0.0)) || c.epsilons.windows(2).any(|w| !(w[1] < w[0])) {
            return bad(format!("epsilons must be positive and decreasing: {:?}", c.epsilons));
        }
        if c.samples < 2 || c.theta_nodes < 3 || c.fiber_nodes < 3 || c.radial_stride == 0 || !(c.window.1 > c.window.0) {
            return bad("collapse sampling block is degenerate".into());
        }
        if matches!(c.twist, Some((_, b)) if b == 0.0) {
            return bad("twist needs b != 0".into());
        }
        let d = &self.dilation;
        if d.t_schedule.is_empty() || d.t_schedule.iter().any(|&t| !(t > 0.0)) || d.t_schedule.windows(2).any(|w| !(w[1] > w[0])) {
            return bad(format!("T schedule must be positive and increasing: {:?}", d.t_schedule));
        }
        if d.epsilon_schedule.len() != d.t_schedule.len() || d.epsilon_schedule.iter().any(|e| !(0.0..1.0).contains(e)) {
            return bad("epsilon schedule must match the T schedule and lie in [0, 1)".into());
        }
        if !(d.beta_fraction > 0.0 && d.beta_fraction < 1.0 && d.psi_fraction > 0.0 && d.psi_fraction < 1.0 && d.rho > 0.0) {
            return bad("dilation fractions must lie in (0, 1) and rho > 0".into());
        }
        if self.gh.iterations == 0 || self.gh.a.is_some() != self.gh.b.is_some() {
            return bad("gh needs iterations >= 1 and both or neither of a, b".into());
        }
        let g = &self.glue;
        if !(g.seam_tol > 0.0 && g.search_half_width > 0.0) || g.arclength_spacing.is_some_and(|h| !(h > 0.0)) {
            return bad("glue tolerances must be positive".into());
        }
        if !(self.compare.tolerance > 0.0) {
            return bad("compare tolerance must be positive".into());
        }
        Ok(())
    }

    fn glue_config(&self) -> GlueConfig {
        GlueConfig { seam_tol: self.glue.seam_tol, search_half_width: self.glue.search_half_width }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Simulate,
    Collapse,
    Dilate,
    Gh,
    Glue,
    Compare,
    Classify,
    Pipeline,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Recipe {
    Type2b,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: Command,
    pub recipe: Option<Recipe>,
    pub seed: u64,
    pub files: Vec<ManifestEntry>,
}

/// Maps an error to the process exit code: 2 for configuration, 1 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => 2,
        _ => 1,
    }
}

fn stage<T>(name: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Config(_) | Error::Pipeline { .. } => e,
        other => Error::Pipeline { stage: name.into(), message: other.to_string() },
    })
}

/// Runs `command` and writes its artifacts and the manifest under `out`.
/// The config is validated before `out` is touched. On a stage failure the
/// files written so far stay in place and are listed in the manifest.
pub fn run(command: Command, recipe: Option<Recipe>, cfg: &RunConfig, out: &Path, seed: u64) -> Result<Manifest> {
    cfg.validate()?;
    if command == Command::Pipeline && recipe.is_none() {
        return Err(Error::Config("pipeline needs a recipe (type2b)".into()));
    }
    fs::create_dir_all(out)?;
    let mut ctx = Ctx { out: out.to_path_buf(), cfg, seed };
    let result = match command {
        Command::Simulate => ctx.simulate(),
        Command::Collapse => ctx.collapse(),
        Command::Dilate => ctx.dilate(),
        Command::Gh => ctx.gh(),
        Command::Glue => ctx.glue(),
        Command::Compare => ctx.compare(),
        Command::Classify => ctx.classify(),
        Command::Pipeline => ctx.type2b(),
    };
    let manifest = write_manifest(out, command, recipe, seed)?;
    result.map(|_| manifest)
}

fn write_manifest(out: &Path, command: Command, recipe: Option<Recipe>, seed: u64) -> Result<Manifest> {
    let mut files = Vec::new();
    collect_files(out, out, &mut files)?;
    files.sort();
    let files = files
        .into_iter()
        .filter(|rel| rel != "manifest.json")
        .map(|rel| {
            let bytes = fs::read(out.join(&rel))?;
            Ok(ManifestEntry { sha256: hex::encode(Sha256::digest(&bytes)), bytes: bytes.len() as u64, path: rel })
        })
        .collect::<Result<Vec<_>>>()?;
    let m = Manifest { command, recipe, seed, files };
    io::write_json(&out.join("manifest.json"), &m)?;
    Ok(m)
}

fn collect_files(root: &Path, dir: &Path, acc: &mut Vec<String>) -> Result<()> {
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            collect_files(root, &path, acc)?;
        } else {
            let rel = path.strip_prefix(root).expect("walked below root");
            acc.push(rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/"));
        }
    }
    Ok(())
}

struct Ctx<'a> {
    out: PathBuf,
    cfg: &'a RunConfig,
    seed: u64,
}

#[derive(Serialize)]
struct SimulateSummary {
    times: usize,
    t_final: f64,
    blowup: Option<crate::flow::Blowup>,
    max_curvature_initial: f64,
    max_curvature_final: f64,
    area_initial: f64,
    area_final: f64,
    pinching_tested: usize,
    pinching_violations: usize,
}

#[derive(Serialize)]
struct MemberSummary {
    epsilon: f64,
    inj_proxy_base: f64,
    gh_lower: Option<f64>,
    gh_upper: Option<f64>,
}

#[derive(Serialize)]
struct Type2bMember {
    epsilon_fiber: f64,
    record: DilationRecord,
    rescaled_fiber: f64,
    rescaled_rm_at_origin: f64,
    bound_violation: f64,
    dilatable_c: f64,
    glue_max_residual: f64,
    cone_order: Option<u32>,
    closure_ratio: f64,
    cigar_deviation: f64,
    k_tip_drift: f64,
    local_model: LocalVerdict,
}

#[derive(Serialize)]
struct Type2bSummary {
    members: Vec<Type2bMember>,
    max_cigar_deviation: f64,
    tolerance: f64,
    pass: bool,
}

impl Ctx<'_> {
    fn path(&self, rel: &str) -> Result<PathBuf> {
        let p = self.out.join(rel);
        if let Some(parent) = p.parent() {
            fs::create_dir_all(parent)?;
        }
        Ok(p)
    }

    fn flow(&self) -> Result<SurfaceSolution> {
        let p = stage("profile", self.cfg.profile.build())?;
        stage("flow", evolve(&p, self.cfg.flow.t_end, self.cfg.flow.output_stride, &self.cfg.flow.config()))
    }

    fn simulate(&mut self) -> Result<()> {
        let sol = self.flow()?;
        io::write_solution(&self.path("solution")?, &sol, None)?;
        let k = stage("curvature", sol.curvatures())?;
        let areas = sol.areas();
        let maxk: Vec<f64> = k.iter().map(|v| v.iter().fold(f64::NEG_INFINITY, |m, x| m.max(*x))).collect();
        let rows = (0..sol.len()).map(|i| vec![sol.times()[i], areas[i], maxk[i]]);
        io::write_table(&self.path("area.csv")?, &["t", "area", "max_K"], rows)?;
        let lifted = stage("lift", lift_product(&sol, 1.0))?;
        let spectra = stage("lift", lifted.spectra())?;
        let params = stage("pinching", PinchingParams::new(1.0, 1e-9))?;
        let rep = check_pinching(sol.times(), &spectra, &params);
        io::write_json(&self.path("pinching.json")?, &rep)?;
        let summary = SimulateSummary {
            times: sol.len(),
            t_final: sol.times()[sol.len() - 1],
            blowup: sol.blowup(),
            max_curvature_initial: maxk[0],
            max_curvature_final: maxk[maxk.len() - 1],
            area_initial: areas[0],
            area_final: areas[areas.len() - 1],
            pinching_tested: rep.tested,
            pinching_violations: rep.violations.len(),
        };
        io::write_json(&self.path("summary.json")?, &summary)
    }

    fn sample_config(&self) -> SampleConfig {
        let c = &self.cfg.collapse;
        SampleConfig {
            theta_nodes: c.theta_nodes,
            fiber_nodes: c.fiber_nodes,
            radial_stride: c.radial_stride,
            ..SampleConfig::new(c.samples, self.seed, c.window)
        }
    }

    /// Samples every family member and the base at the final time.
    fn sample_family(&self, with_gh: bool) -> Result<Vec<MemberSummary>> {
        let sol = self.flow()?;
        let c = &self.cfg.collapse;
        let family = stage("collapse", make_family(&sol, &c.epsilons, c.twist))?;
        let sc = self.sample_config();
        let last = sol.len() - 1;
        let base = stage("sample", sample_space(SampleTarget::Surface(&sol.profiles()[last]), &sc))?;
        io::write_sampled(&self.path("spaces/base.csv")?, &base)?;
        let mut out = Vec::new();
        for (i, eps) in c.epsilons.iter().enumerate() {
            let m = &family.members[i][last];
            let s = stage("sample", sample_space(SampleTarget::Metric(m), &sc))?;
            io::write_sampled(&self.path(&format!("spaces/member_{i:02}.csv"))?, &s)?;
            let (lo, hi) = if with_gh {
                let g = gh_bound(&s.space, &base.space, self.cfg.gh.iterations, self.seed);
                (Some(g.lower), Some(g.upper))
            } else {
                (None, None)
            };
            out.push(MemberSummary { epsilon: *eps, inj_proxy_base: stage("collapse", inj_proxy(m, 0))?, gh_lower: lo, gh_upper: hi });
        }
        Ok(out)
    }

    fn collapse(&mut self) -> Result<()> {
        let members = self.sample_family(false)?;
        io::write_json(&self.path("family.json")?, &members)
    }

    fn gh(&mut self) -> Result<()> {
        let g = &self.cfg.gh;
        let mode = if g.pointed { GhMode::Pointed } else { GhMode::Unpointed };
        if let (Some(a), Some(b)) = (&g.a, &g.b) {
            let (sa, _) = stage("read", io::read_space(a))?;
            let (sb, _) = stage("read", io::read_space(b))?;
            let bounds = crate::gh::gh_bound_mode(&sa, &sb, g.iterations, self.seed, mode);
            let exact = if sa.len() <= EXACT_LIMIT && sb.len() <= EXACT_LIMIT {
                Some(stage("gh", gh_exact_mode(&sa, &sb, mode))?)
            } else {
                None
            };
            let dims = (dim_estimate(&sa).ok(), dim_estimate(&sb).ok());
            let rep = serde_json::json!({
                "seed": self.seed, "iterations": g.iterations, "bounds": bounds, "exact": exact,
                "dimension_a": dims.0, "dimension_b": dims.1,
            });
            return io::write_json(&self.path("gh.json")?, &rep);
        }
        let members = self.sample_family(true)?;
        let rep = serde_json::json!({ "seed": self.seed, "iterations": g.iterations, "members": members });
        io::write_json(&self.path("gh.json")?, &rep)
    }

    fn records(&self, sol: &SurfaceSolution, fiber: f64) -> Result<(CurvatureHistory, Vec<DilationRecord>)> {
        let lifted = stage("lift", lift_product(sol, fiber))?;
        let h = stage("history", CurvatureHistory::from_lifted(&lifted))?;
        let d = &self.cfg.dilation;
        let recs = d
            .t_schedule
            .iter()
            .zip(&d.epsilon_schedule)
            .map(|(&t, &e)| stage("select", select_point(&h, t, e)))
            .collect::<Result<Vec<_>>>()?;
        Ok((h, recs))
    }

    fn window(&self, rec: &DilationRecord) -> (f64, f64) {
        let d = &self.cfg.dilation;
        (-d.beta_fraction * rec.alpha_i, d.psi_fraction * rec.omega_i)
    }

    fn dilate(&mut self) -> Result<()> {
        let sol = self.flow()?;
        let (h, recs) = self.records(&sol, self.cfg.collapse.epsilons[0])?;
        let mut summary = Vec::new();
        for (i, rec) in recs.iter().enumerate() {
            io::write_json(&self.path(&format!("record_{i:02}.json"))?, rec)?;
            let (beta, psi) = self.window(rec);
            let r = stage("rescale", rescale(&sol, rec, beta, psi))?;
            let prov = Provenance { source: format!("record_{i:02}.json"), record: serde_json::to_value(rec)?, beta, psi };
            io::write_solution(&self.path(&format!("rescaled_{i:02}"))?, &r, Some(prov))?;
            let (viol, _) = stage("bound", bound_violation(&h, rec, beta, psi))?;
            summary.push(serde_json::json!({ "record": rec, "bound_violation": viol }));
        }
        io::write_json(&self.path("dilation.json")?, &summary)
    }

    fn input_profile(&self, input: &Option<PathBuf>) -> Result<RadialProfile> {
        match input {
            Some(p) => stage("read", io::read_profile(p)),
            None => stage("profile", self.cfg.profile.build()),
        }
    }

    fn glue(&mut self) -> Result<()> {
        let mut p = self.input_profile(&self.cfg.glue.input)?;
        if let Some(hs) = self.cfg.glue.arclength_spacing {
            let sol = stage("arclength", SurfaceSolution::new(vec![p.clone()]))?;
            p = stage("arclength", arclength_solution(&sol, hs))?.profiles()[0].clone();
        }
        let windows = stage("cut", cut_windows(&p))?;
        for (k, w) in windows.iter().enumerate() {
            io::write_profile(&self.path(&format!("windows/window_{k:02}.csv"))?, &w.profile)?;
        }
        let g = stage("glue", glue(&windows, &self.cfg.glue_config()))?;
        io::write_json(&self.path("overlaps.json")?, &g.overlaps)?;
        io::write_profile(&self.path("glued.csv")?, &g.profile)?;
        let err = g.profile.f().iter().zip(p.f()).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        let rep = serde_json::json!({
            "windows": windows.len(), "max_residual": g.max_residual, "halted_at": g.halted_at,
            "reconstruction_error": if g.profile.len() == p.len() { Some(err) } else { None },
        });
        io::write_json(&self.path("glue.json")?, &rep)
    }

    fn compare(&mut self) -> Result<()> {
        let profiles = match &self.cfg.compare.input {
            Some(p) if p.is_dir() => stage("read", io::read_solution(p))?.0.profiles().to_vec(),
            other => vec![self.input_profile(other)?],
        };
        let rep = stage("compare", cigar_compare_profiles(&profiles, self.cfg.compare.trim))?;
        io::write_table(&self.path("cigar_series.csv")?, &["s", "K_over_K_tip"], rep.series.iter().map(|x| x.to_vec()))?;
        io::write_json(&self.path("compare.json")?, &rep)
    }

    fn classify(&mut self) -> Result<()> {
        let c = &self.cfg.classify;
        let verdicts: Vec<serde_json::Value> = c
            .models
            .iter()
            .map(|q| match classify_local_model(q.m, q.gamma, q.a, q.b, q.has_fixed_point) {
                Ok(v) => serde_json::json!({ "query": q, "verdict": v }),
                Err(e) => serde_json::json!({ "query": q, "error": e.to_string() }),
            })
            .collect();
        io::write_json(&self.path("local_models.json")?, &verdicts)?;
        io::write_json(&self.path("singular_points.json")?, &detect_singular_points(&c.points, &c.curvature))
    }

    /// Cigar x S^1(eps_i) -> dilation -> windows -> glue -> disk -> cigar.
    fn type2b(&mut self) -> Result<()> {
        let sol = self.flow()?;
        let eps = &self.cfg.collapse.epsilons;
        let d = &self.cfg.dilation;
        if eps.len() != d.t_schedule.len() {
            return Err(Error::Config("type2b pairs each epsilon with one T_i; lengths differ".into()));
        }
        let hs = self.cfg.glue.arclength_spacing.unwrap_or(GlueSpec::default().arclength_spacing.unwrap_or(0.04));
        let mut members = Vec::new();
        for (i, &fiber) in eps.iter().enumerate() {
            let dir = format!("member_{i:02}");
            let (h, recs) = self.records(&sol, fiber)?;
            let rec = recs[i];
            io::write_json(&self.path(&format!("{dir}/dilation_record.json"))?, &rec)?;
            let (beta, psi) = self.window(&rec);
            let rescaled = stage("rescale", rescale(&sol, &rec, beta, psi))?;
            let prov = Provenance { source: format!("{dir}/dilation_record.json"), record: serde_json::to_value(rec)?, beta, psi };
            io::write_solution(&self.path(&format!("{dir}/rescaled"))?, &rescaled, Some(prov))?;
            let (viol, rm0) = stage("bound", bound_violation(&h, &rec, beta, psi))?;
            let dil = stage("dilatable", dilatable_check(&h, &rec, beta, psi, d.rho, true))?;

            let arc = stage("arclength", arclength_solution(&rescaled, hs))?;
            let mut disks = Vec::new();
            let mut max_res = 0.0_f64;
            let mut origin = None;
            for p in arc.profiles() {
                let windows = stage("cut", cut_windows(p))?;
                let g = stage("glue", glue(&windows, &self.cfg.glue_config()))?;
                max_res = max_res.max(g.max_residual);
                let disk = stage("extend", extend_to_disk(&g.profile))?;
                if p.time_stamp() == 0.0 {
                    io::write_profile(&self.path(&format!("{dir}/glued_profile.csv"))?, &disk.profile)?;
                    io::write_json(&self.path(&format!("{dir}/overlaps.json"))?, &g.overlaps)?;
                    origin = Some(disk.clone());
                }
                disks.push(disk.profile);
            }
            let origin = origin.ok_or_else(|| Error::Pipeline { stage: "extend".into(), message: "no profile at tau = 0".into() })?;
            let cmp = stage("compare", cigar_compare_profiles(&disks, self.cfg.compare.trim))?;
            io::write_table(&self.path(&format!("{dir}/cigar_series.csv"))?, &["s", "K_over_K_tip"], cmp.series.iter().map(|x| x.to_vec()))?;
            io::write_json(&self.path(&format!("{dir}/cigar_report.json"))?, &cmp)?;
            let gamma = GammaDescriptor::Zp(origin.cone_order.unwrap_or(1));
            let model = stage("classify", classify_local_model(2, gamma, 0.0, 1.0, true))?;
            members.push(Type2bMember {
                epsilon_fiber: fiber,
                record: rec,
                rescaled_fiber: fiber * rec.k_i.sqrt(),
                rescaled_rm_at_origin: rm0,
                bound_violation: viol,
                dilatable_c: dil.c,
                glue_max_residual: max_res,
                cone_order: origin.cone_order,
                closure_ratio: origin.closure_ratio,
                cigar_deviation: cmp.deviation,
                k_tip_drift: cmp.k_tip_drift,
                local_model: model,
            });
        }
        let max_dev = members.iter().map(|m| m.cigar_deviation).fold(0.0, f64::max);
        let tol = self.cfg.compare.tolerance;
        let summary = Type2bSummary { members, max_cigar_deviation: max_dev, tolerance: tol, pass: max_dev < tol };
        io::write_json(&self.path("summary.json")?, &summary)?;
        // the singular-point rule on the glued disks: only the tip can be a cone point
        let pts: Vec<OrbifoldPoint> = summary
            .members
            .iter()
            .map(|m| OrbifoldPoint { position: 0.0, kind: m.cone_order.map_or(PointKind::Regular, PointKind::Cone) })
            .collect();
        let kmin = {
            let p = io::read_profile(&self.out.join("member_00/glued_profile.csv"))?;
            stage("classify", gauss_curvature(&p))?.into_iter().fold(f64::INFINITY, f64::min)
        };
        let mut by_member = BTreeMap::new();
        for (i, p) in pts.iter().enumerate() {
            by_member.insert(format!("member_{i:02}"), detect_singular_points(std::slice::from_ref(p), &[kmin]));
        }
        io::write_json(&self.path("singular_points.json")?, &by_member)
    }
}

/// Largest excess of rescaled `|Rm|` over the rescaled bound on the
/// window, and the rescaled `|Rm|` at the selected point at `tau = 0`.
pub fn bound_violation(h: &CurvatureHistory, rec: &DilationRecord, beta: f64, psi: f64) -> Result<(f64, f64)> {
    let r = rescale_history(h, rec, beta, psi)?;
    let mut worst = f64::NEG_INFINITY;
    let mut at_origin = f64::NAN;
    for (k, &tau) in r.times.iter().enumerate() {
        let bound = rescaled_bound(rec, tau)?;
        for &rm in &r.spectra[k].rm_norm {
            worst = worst.max(rm - bound);
        }
        if tau == 0.0 {
            at_origin = r.spectra[k].rm_norm[rec.point_index];
        }
    }
    Ok((worst, at_origin))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invalid_config_writes_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("run");
        let cfg: RunConfig = serde_json::from_str(r#"{"profile": {"kind": "cigar", "length": 8, "h": -0.1}}"#).unwrap();
        let e = run(Command::Simulate, None, &cfg, &out, 0).unwrap_err();
        assert_eq!(exit_code(&e), 2);
        assert!(!out.exists());
        assert!(serde_json::from_str::<RunConfig>(r#"{"flow": {"t_end": 1, "bogus": 2}}"#).is_err());
    }

    #[test]
    fn simulate_sphere_writes_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let cfg: RunConfig =
            serde_json::from_str(r#"{"profile": {"kind": "sphere", "radius": 1, "h": 0.05}, "flow": {"t_end": 0.1, "output_stride": 200}}"#)
                .unwrap();
        let m = run(Command::Simulate, None, &cfg, dir.path(), 0).unwrap();
        let names: Vec<&str> = m.files.iter().map(|f| f.path.as_str()).collect();
        assert!(names.contains(&"area.csv") && names.contains(&"solution/index.json"));
        assert!(dir.path().join("manifest.json").exists());
    }

    #[test]
    fn stage_failure_names_the_stage() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig { glue: GlueSpec { input: Some(dir.path().join("missing.csv")), ..GlueSpec::default() }, ..RunConfig::default() };
        let e = run(Command::Glue, None, &cfg, &dir.path().join("o"), 0).unwrap_err();
        assert!(matches!(&e, Error::Pipeline { stage, .. } if stage == "read"), "{e}");
        assert_eq!(exit_code(&e), 1);
        assert!(dir.path().join("o/manifest.json").exists());
    }
}
