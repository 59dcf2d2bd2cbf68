//! Declarative scenario configuration: JSON in, validated core types out.

use actionlab_core::{InitialAction, ModelSpec, PotentialSpec};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::PathBuf;

/// Canonical route order; tolerance keys are "{a}_vs_{b}" with a before b
/// in this list.
pub const ROUTES: [&str; 5] = ["analytic", "hopf_lax", "nested", "pde", "shooting"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: String,
    pub model: ModelConfig,
    #[serde(flatten)]
    pub mode: ModeConfig,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from(".")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub mass: f64,
    pub dimension: usize,
    pub potential: PotentialConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialConfig {
    Free,
    Linear { k: Vec<f64> },
    Harmonic { omega: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum ModeConfig {
    El(ElParams),
    HopfLax(HopfLaxParams),
    Pde(PdeParams),
    Pilot(PilotParams),
    Compare(CompareParams),
    Figures(FiguresParams),
}

impl ModeConfig {
    pub fn mode_name(&self) -> &'static str {
        match self {
            ModeConfig::El(_) => "el",
            ModeConfig::HopfLax(_) => "hopf-lax",
            ModeConfig::Pde(_) => "pde",
            ModeConfig::Pilot(_) => "pilot",
            ModeConfig::Compare(_) => "compare",
            ModeConfig::Figures(_) => "figures",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElParams {
    pub x0: Vec<f64>,
    pub x: Vec<f64>,
    pub t: f64,
    #[serde(default)]
    pub amplitudes: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Probe {
    pub x: Vec<f64>,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum S0Config {
    LinearForm { v0: Vec<f64>, mass: f64 },
    Tabulated { grid: Vec<f64>, values: Vec<f64> },
    SingularAt { x0: Vec<f64> },
}

impl S0Config {
    pub fn to_core(&self) -> InitialAction {
        match self {
            S0Config::LinearForm { v0, mass } => InitialAction::LinearForm {
                v0: v0.clone(),
                mass: *mass,
            },
            S0Config::Tabulated { grid, values } => InitialAction::Tabulated {
                grid: grid.clone(),
                values: values.clone(),
            },
            S0Config::SingularAt { x0 } => InitialAction::SingularAt { x0: x0.clone() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HopfLaxParams {
    pub s0: S0Config,
    pub probes: Vec<Probe>,
    pub search_box: Vec<(f64, f64)>,
    #[serde(default = "default_coarse_n")]
    pub coarse_n: usize,
}

fn default_coarse_n() -> usize {
    33
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdeParams {
    pub s0: S0Config,
    pub lo: f64,
    pub hi: f64,
    pub grid_n: usize,
    pub t_final: f64,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    pub snapshot_times: Vec<f64>,
    #[serde(default = "default_cap")]
    pub cap: f64,
}

fn default_cfl() -> f64 {
    0.5
}

fn default_cap() -> f64 {
    1e4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PilotParams {
    pub source: PilotSourceConfig,
    pub starts: Vec<Vec<f64>>,
    #[serde(default)]
    pub t0: f64,
    pub t1: f64,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub probe_times: Vec<f64>,
    #[serde(default)]
    pub probe_xs: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PilotSourceConfig {
    /// Closed-form field of the uniform-force family.
    Analytic { v0: Vec<f64> },
    /// Field produced by a grid solve with these parameters.
    Grid(PdeParams),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdeCompareParams {
    pub lo: f64,
    pub hi: f64,
    pub grid_n: usize,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default = "default_cap")]
    pub cap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareParams {
    pub s0: S0Config,
    pub probes: Vec<Probe>,
    pub search_box: Vec<(f64, f64)>,
    #[serde(default = "default_coarse_n")]
    pub coarse_n: usize,
    #[serde(default = "default_segments")]
    pub n_segments: usize,
    #[serde(default = "default_shooting_steps")]
    pub shooting_steps: usize,
    #[serde(default = "default_shooting_tol")]
    pub shooting_tol: f64,
    #[serde(default)]
    pub pde: Option<PdeCompareParams>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub mandatory: Vec<String>,
}

fn default_segments() -> usize {
    256
}

fn default_shooting_steps() -> usize {
    16384
}

fn default_shooting_tol() -> f64 {
    1e-10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiguresParams {
    #[serde(default)]
    pub fig1: Option<Fig1Params>,
    #[serde(default)]
    pub fig2: Option<Fig2Params>,
    #[serde(default)]
    pub fig3: Option<Fig3Params>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fig1Params {
    pub x0: Vec<f64>,
    pub x: Vec<f64>,
    pub t: f64,
    pub amplitudes: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fig2Params {
    pub x0_list: Vec<Vec<f64>>,
    pub x: Vec<f64>,
    pub t: f64,
    #[serde(default = "default_fig_steps")]
    pub n_steps: usize,
}

fn default_fig_steps() -> usize {
    200
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fig3Params {
    pub v0: Vec<f64>,
    pub starts: Vec<Vec<f64>>,
    pub t1: f64,
    pub probe_times: Vec<f64>,
    pub probe_xs: Vec<f64>,
}

impl ModelConfig {
    pub fn to_core(&self) -> Result<ModelSpec, String> {
        let potential = match &self.potential {
            PotentialConfig::Free => PotentialSpec::Free,
            PotentialConfig::Linear { k } => PotentialSpec::Linear { k: k.clone() },
            PotentialConfig::Harmonic { omega } => PotentialSpec::Harmonic { omega: *omega },
        };
        ModelSpec::new(self.mass, self.dimension, potential).map_err(|e| format!("model: {e}"))
    }
}

/// Command-line overrides applied on top of a loaded config.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub mass: Option<f64>,
    pub k: Option<Vec<f64>>,
    pub x0: Option<Vec<f64>>,
    pub x: Option<Vec<f64>>,
    pub t: Option<f64>,
    pub v0: Option<Vec<f64>>,
    pub out: Option<PathBuf>,
    pub grid_n: Option<usize>,
    pub tol: Option<f64>,
}

fn override_s0_v0(s0: &mut S0Config, v0: &[f64]) -> Result<(), String> {
    match s0 {
        S0Config::LinearForm { v0: slot, .. } => {
            *slot = v0.to_vec();
            Ok(())
        }
        _ => Err("--v0 applies only to linear-form initial actions".into()),
    }
}

fn override_s0_mass(s0: &mut S0Config, mass: f64) {
    if let S0Config::LinearForm { mass: slot, .. } = s0 {
        *slot = mass;
    }
}

pub fn apply_overrides(cfg: &mut ScenarioConfig, ov: &Overrides) -> Result<(), String> {
    if let Some(mass) = ov.mass {
        cfg.model.mass = mass;
        match &mut cfg.mode {
            ModeConfig::HopfLax(p) => override_s0_mass(&mut p.s0, mass),
            ModeConfig::Pde(p) => override_s0_mass(&mut p.s0, mass),
            ModeConfig::Compare(p) => override_s0_mass(&mut p.s0, mass),
            ModeConfig::Pilot(p) => {
                if let PilotSourceConfig::Grid(g) = &mut p.source {
                    override_s0_mass(&mut g.s0, mass);
                }
            }
            _ => {}
        }
    }
    if let Some(k) = &ov.k {
        match &mut cfg.model.potential {
            PotentialConfig::Linear { k: slot } => *slot = k.clone(),
            _ => return Err("--k applies only to linear potentials".into()),
        }
    }
    if let Some(out) = &ov.out {
        cfg.out_dir = out.clone();
    }
    if let Some(x0) = &ov.x0 {
        match &mut cfg.mode {
            ModeConfig::El(p) => p.x0 = x0.clone(),
            ModeConfig::Figures(f) => {
                let fig1 = f.fig1.as_mut().ok_or("--x0 needs a fig1 section")?;
                fig1.x0 = x0.clone();
            }
            ModeConfig::Pilot(p) if p.starts.len() == 1 => p.starts[0] = x0.clone(),
            _ => return Err("--x0 applies to el, figures (fig1) and single-start pilot configs".into()),
        }
    }
    if let Some(x) = &ov.x {
        match &mut cfg.mode {
            ModeConfig::El(p) => p.x = x.clone(),
            ModeConfig::Figures(f) => {
                let fig1 = f.fig1.as_mut().ok_or("--x needs a fig1 section")?;
                fig1.x = x.clone();
            }
            ModeConfig::HopfLax(p) if p.probes.len() == 1 => p.probes[0].x = x.clone(),
            ModeConfig::Compare(p) if p.probes.len() == 1 => p.probes[0].x = x.clone(),
            _ => return Err("--x applies to el, figures (fig1) and single-probe configs".into()),
        }
    }
    if let Some(t) = ov.t {
        match &mut cfg.mode {
            ModeConfig::El(p) => p.t = t,
            ModeConfig::Pde(p) => p.t_final = t,
            ModeConfig::Pilot(p) => p.t1 = t,
            ModeConfig::Figures(f) => {
                let fig1 = f.fig1.as_mut().ok_or("--t needs a fig1 section")?;
                fig1.t = t;
            }
            ModeConfig::HopfLax(p) if p.probes.len() == 1 => p.probes[0].t = t,
            ModeConfig::Compare(p) if p.probes.len() == 1 => p.probes[0].t = t,
            _ => return Err("--t applies to el, pde, pilot, figures and single-probe configs".into()),
        }
    }
    if let Some(v0) = &ov.v0 {
        match &mut cfg.mode {
            ModeConfig::HopfLax(p) => override_s0_v0(&mut p.s0, v0)?,
            ModeConfig::Pde(p) => override_s0_v0(&mut p.s0, v0)?,
            ModeConfig::Compare(p) => override_s0_v0(&mut p.s0, v0)?,
            ModeConfig::Pilot(p) => match &mut p.source {
                PilotSourceConfig::Analytic { v0: slot } => *slot = v0.clone(),
                PilotSourceConfig::Grid(g) => override_s0_v0(&mut g.s0, v0)?,
            },
            ModeConfig::Figures(f) => {
                let fig3 = f.fig3.as_mut().ok_or("--v0 needs a fig3 section")?;
                fig3.v0 = v0.clone();
            }
            _ => return Err("--v0 applies to hopf-lax, pde, pilot, compare and figures configs".into()),
        }
    }
    if let Some(n) = ov.grid_n {
        match &mut cfg.mode {
            ModeConfig::Pde(p) => p.grid_n = n,
            ModeConfig::Pilot(p) => match &mut p.source {
                PilotSourceConfig::Grid(g) => g.grid_n = n,
                _ => return Err("--grid-n needs a grid pilot source".into()),
            },
            ModeConfig::Compare(p) => {
                let pde = p.pde.as_mut().ok_or("--grid-n needs a pde section")?;
                pde.grid_n = n;
            }
            _ => return Err("--grid-n applies to pde, pilot (grid source) and compare configs".into()),
        }
    }
    if let Some(tol) = ov.tol {
        match &mut cfg.mode {
            ModeConfig::Compare(p) => p.shooting_tol = tol,
            _ => return Err("--tol applies to compare configs (shooting tolerance)".into()),
        }
    }
    Ok(())
}

fn check_dim(what: &str, v: &[f64], dim: usize) -> Result<(), String> {
    if v.len() != dim {
        return Err(format!("{what}: expected {dim} components, got {}", v.len()));
    }
    if v.iter().any(|c| !c.is_finite()) {
        return Err(format!("{what}: components must be finite"));
    }
    Ok(())
}

fn check_s0(s0: &S0Config, model: &ModelConfig) -> Result<(), String> {
    match s0 {
        S0Config::LinearForm { v0, mass } => {
            check_dim("s0.v0", v0, model.dimension)?;
            if *mass != model.mass {
                return Err(format!(
                    "s0.mass ({mass}) must equal the model mass ({})",
                    model.mass
                ));
            }
        }
        S0Config::Tabulated { grid, values } => {
            if model.dimension != 1 {
                return Err("s0: tabulated initial actions are one-dimensional".into());
            }
            if grid.len() < 2 || grid.len() != values.len() {
                return Err("s0: tabulated grid/values must have equal length >= 2".into());
            }
            if grid.windows(2).any(|w| !(w[1] > w[0])) {
                return Err("s0.grid must be strictly increasing".into());
            }
            if values.iter().any(|v| !v.is_finite()) {
                return Err("s0.values must be finite".into());
            }
        }
        S0Config::SingularAt { x0 } => check_dim("s0.x0", x0, model.dimension)?,
    }
    Ok(())
}

fn check_box(search_box: &[(f64, f64)], dim: usize) -> Result<(), String> {
    if search_box.len() != dim {
        return Err(format!(
            "search_box: expected {dim} intervals, got {}",
            search_box.len()
        ));
    }
    for &(lo, hi) in search_box {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(format!("search_box: interval [{lo}, {hi}] invalid"));
        }
    }
    Ok(())
}

fn check_probes(probes: &[Probe], dim: usize) -> Result<(), String> {
    for (i, p) in probes.iter().enumerate() {
        check_dim(&format!("probes[{i}].x"), &p.x, dim)?;
        if !(p.t > 0.0) {
            return Err(format!("probes[{i}].t must be > 0, got {}", p.t));
        }
    }
    Ok(())
}

fn check_pde_common(
    lo: f64,
    hi: f64,
    grid_n: usize,
    cfl: f64,
    cap: f64,
    model: &ModelConfig,
) -> Result<(), String> {
    if model.dimension != 1 {
        return Err("pde runs are one-dimensional".into());
    }
    if !(lo < hi) {
        return Err(format!("grid bounds [{lo}, {hi}] invalid"));
    }
    if grid_n < 16 {
        return Err(format!("grid_n must be >= 16, got {grid_n}"));
    }
    if !(cfl > 0.0 && cfl <= 1.0) {
        return Err(format!("cfl must lie in (0, 1], got {cfl}"));
    }
    if !(cap > 0.0) {
        return Err(format!("cap must be > 0, got {cap}"));
    }
    Ok(())
}

fn check_pde(p: &PdeParams, model: &ModelConfig) -> Result<(), String> {
    check_s0(&p.s0, model)?;
    check_pde_common(p.lo, p.hi, p.grid_n, p.cfl, p.cap, model)?;
    if !(p.t_final > 0.0) {
        return Err(format!("t_final must be > 0, got {}", p.t_final));
    }
    if p.snapshot_times.is_empty() {
        return Err("snapshot_times must not be empty".into());
    }
    if p.snapshot_times.iter().any(|&t| !(0.0..=p.t_final).contains(&t)) {
        return Err("snapshot_times must lie in [0, t_final]".into());
    }
    Ok(())
}

fn pair_key(a: &str, b: &str) -> String {
    format!("{a}_vs_{b}")
}

/// All canonical tolerance keys in route order.
pub fn canonical_pairs() -> Vec<String> {
    let mut out = Vec::new();
    for i in 0..ROUTES.len() {
        for j in (i + 1)..ROUTES.len() {
            out.push(pair_key(ROUTES[i], ROUTES[j]));
        }
    }
    out
}

pub fn validate(cfg: &ScenarioConfig) -> Result<(), String> {
    if cfg.name.is_empty() {
        return Err("name must not be empty".into());
    }
    if !cfg
        .name
        .chars()
        .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.')
    {
        return Err(format!(
            "name '{}' may only contain alphanumerics, '-', '_' and '.'",
            cfg.name
        ));
    }
    cfg.model.to_core()?;
    let dim = cfg.model.dimension;

    match &cfg.mode {
        ModeConfig::El(p) => {
            check_dim("x0", &p.x0, dim)?;
            check_dim("x", &p.x, dim)?;
            if !(p.t > 0.0) {
                return Err(format!("t must be > 0, got {}", p.t));
            }
            if p.amplitudes.iter().any(|a| !a.is_finite()) {
                return Err("amplitudes must be finite".into());
            }
        }
        ModeConfig::HopfLax(p) => {
            check_s0(&p.s0, &cfg.model)?;
            check_probes(&p.probes, dim)?;
            check_box(&p.search_box, dim)?;
            if p.coarse_n < 2 {
                return Err(format!("coarse_n must be >= 2, got {}", p.coarse_n));
            }
        }
        ModeConfig::Pde(p) => check_pde(p, &cfg.model)?,
        ModeConfig::Pilot(p) => {
            match &p.source {
                PilotSourceConfig::Analytic { v0 } => {
                    check_dim("source.v0", v0, dim)?;
                    if matches!(cfg.model.potential, PotentialConfig::Harmonic { .. }) {
                        return Err("analytic pilot sources need a free or linear potential".into());
                    }
                }
                PilotSourceConfig::Grid(g) => {
                    check_pde(g, &cfg.model)?;
                    if g.snapshot_times.len() < 2 {
                        return Err("grid pilot sources need at least 2 snapshot times".into());
                    }
                }
            }
            if p.starts.is_empty() {
                return Err("pilot needs at least one start point".into());
            }
            for (i, s) in p.starts.iter().enumerate() {
                check_dim(&format!("starts[{i}]"), s, dim)?;
            }
            if !(p.t1 > p.t0) {
                return Err(format!("t1 ({}) must exceed t0 ({})", p.t1, p.t0));
            }
            if let Some(dt) = p.dt {
                if !(dt > 0.0) {
                    return Err(format!("dt must be > 0, got {dt}"));
                }
            }
            for (i, x) in p.probe_xs.iter().enumerate() {
                check_dim(&format!("probe_xs[{i}]"), x, dim)?;
            }
        }
        ModeConfig::Compare(p) => {
            if matches!(cfg.model.potential, PotentialConfig::Harmonic { .. }) {
                return Err("compare needs a free or linear potential (closed-form routes)".into());
            }
            check_s0(&p.s0, &cfg.model)?;
            check_probes(&p.probes, dim)?;
            check_box(&p.search_box, dim)?;
            if p.n_segments < 2 {
                return Err(format!("n_segments must be >= 2, got {}", p.n_segments));
            }
            if p.shooting_steps < 2 {
                return Err(format!("shooting_steps must be >= 2, got {}", p.shooting_steps));
            }
            if !(p.shooting_tol > 0.0) {
                return Err(format!("shooting_tol must be > 0, got {}", p.shooting_tol));
            }
            if let Some(pde) = &p.pde {
                check_pde_common(pde.lo, pde.hi, pde.grid_n, pde.cfl, pde.cap, &cfg.model)?;
            }
            let known = canonical_pairs();
            for (key, tol) in &p.tolerances {
                if !known.contains(key) {
                    return Err(format!(
                        "tolerances: unknown pair '{key}' (canonical keys: {})",
                        known.join(", ")
                    ));
                }
                if !(*tol > 0.0) {
                    return Err(format!("tolerances.{key} must be > 0, got {tol}"));
                }
            }
            for route in &p.mandatory {
                if !ROUTES.contains(&route.as_str()) {
                    return Err(format!(
                        "mandatory: unknown route '{route}' (routes: {})",
                        ROUTES.join(", ")
                    ));
                }
            }
        }
        ModeConfig::Figures(f) => {
            if dim != 1 {
                return Err("figure scenarios are one-dimensional".into());
            }
            if f.fig1.is_none() && f.fig2.is_none() && f.fig3.is_none() {
                return Err("figures config needs at least one of fig1, fig2, fig3".into());
            }
            if let Some(p) = &f.fig1 {
                check_dim("fig1.x0", &p.x0, 1)?;
                check_dim("fig1.x", &p.x, 1)?;
                if !(p.t > 0.0) {
                    return Err(format!("fig1.t must be > 0, got {}", p.t));
                }
            }
            if let Some(p) = &f.fig2 {
                check_dim("fig2.x", &p.x, 1)?;
                if !(p.t > 0.0) {
                    return Err(format!("fig2.t must be > 0, got {}", p.t));
                }
                if p.n_steps < 2 {
                    return Err(format!("fig2.n_steps must be >= 2, got {}", p.n_steps));
                }
                for (i, x0) in p.x0_list.iter().enumerate() {
                    check_dim(&format!("fig2.x0_list[{i}]"), x0, 1)?;
                }
            }
            if let Some(p) = &f.fig3 {
                check_dim("fig3.v0", &p.v0, 1)?;
                if matches!(cfg.model.potential, PotentialConfig::Harmonic { .. }) {
                    return Err("fig3 needs a free or linear potential".into());
                }
                if !(p.t1 > 0.0) {
                    return Err(format!("fig3.t1 must be > 0, got {}", p.t1));
                }
                for (i, s) in p.starts.iter().enumerate() {
                    check_dim(&format!("fig3.starts[{i}]"), s, 1)?;
                }
                if p.probe_times.iter().any(|t| !t.is_finite()) {
                    return Err("fig3.probe_times must be finite".into());
                }
                if p.probe_xs.iter().any(|x| !x.is_finite()) {
                    return Err("fig3.probe_xs must be finite".into());
                }
            }
        }
    }
    Ok(())
}
