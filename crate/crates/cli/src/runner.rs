//! Scenario execution: dispatches a validated config to the solver routes
//! and writes the declared CSV/JSON artifacts.

use crate::config::{
    apply_overrides, validate, CompareParams, ElParams, Fig1Params, Fig2Params,
    FiguresParams, HopfLaxParams, ModeConfig, Overrides, PdeParams, PilotParams,
    PilotSourceConfig, S0Config, ScenarioConfig, ROUTES,
};
use crate::csvfmt::{coord_headers, csv_document, fmt_f64};
use crate::report::{ComparisonReport, PairDiff, ProbeReport};
use actionlab_core::{
    analytic_el_action_linear, analytic_hj_action_linear, hj_action_hopf_lax,
    hj_action_nested, integrate_pilot_trajectory, sample_initial_action, solve_bvp_shooting,
    solve_hj_pde, trajectory_family, velocity_field, ActionField, Error as CoreError, ModelSpec, SpatialGrid, Trajectory, VelocityFieldView,
};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Exit contract: 0 success, 1 validation error, 2 numerical failure.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Numerical(m) => m,
        }
    }
}

fn from_core(e: CoreError) -> CliError {
    match e {
        CoreError::NoConvergence { .. }
        | CoreError::Divergence { .. }
        | CoreError::DomainExit { .. }
        | CoreError::NonSmoothField { .. }
        | CoreError::OutOfDomain { .. } => CliError::Numerical(e.to_string()),
        other => CliError::Validation(other.to_string()),
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub name: String,
    /// Artifact file names (relative to the scenario's out_dir).
    pub artifacts: Vec<String>,
}

/// Entry point for one subcommand invocation. `config_path` may be a single
/// JSON file or a directory of them (batch mode, processed in file-name
/// order). Returns the process exit code.
pub fn execute(subcommand: &str, config_path: &Path, ov: &Overrides) -> i32 {
    if config_path.is_dir() {
        execute_batch(subcommand, config_path, ov)
    } else {
        match run_config_file(subcommand, config_path, ov) {
            Ok(outcome) => {
                println!(
                    "{}: ok ({} artifact{})",
                    outcome.name,
                    outcome.artifacts.len(),
                    if outcome.artifacts.len() == 1 { "" } else { "s" }
                );
                0
            }
            Err(e) => {
                eprintln!("error: {}", e.message());
                e.exit_code()
            }
        }
    }
}

fn execute_batch(subcommand: &str, dir: &Path, ov: &Overrides) -> i32 {
    let mut files: Vec<PathBuf> = match std::fs::read_dir(dir) {
        Ok(entries) => entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().map(|x| x == "json").unwrap_or(false))
            .collect(),
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", dir.display());
            return 1;
        }
    };
    files.sort();
    if files.is_empty() {
        return 0; // empty batch: nothing to do, no artifacts
    }

    #[derive(serde::Serialize)]
    struct BatchEntry {
        file: String,
        name: String,
        status: String,
        exit_code: i32,
        artifacts: Vec<String>,
    }

    let mut entries = Vec::new();
    let mut worst = 0;
    for file in &files {
        let file_name = file
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        match run_config_file(subcommand, file, ov) {
            Ok(outcome) => {
                entries.push(BatchEntry {
                    file: file_name,
                    name: outcome.name,
                    status: "ok".into(),
                    exit_code: 0,
                    artifacts: outcome.artifacts,
                });
            }
            Err(e) => {
                eprintln!("error in {}: {}", file.display(), e.message());
                worst = worst.max(e.exit_code());
                entries.push(BatchEntry {
                    file: file_name.clone(),
                    name: file
                        .file_stem()
                        .map(|s| s.to_string_lossy().into_owned())
                        .unwrap_or(file_name),
                    status: e.message().to_string(),
                    exit_code: e.exit_code(),
                    artifacts: Vec::new(),
                });
            }
        }
    }

    let summary_dir = ov.out.clone().unwrap_or_else(|| PathBuf::from("."));
    let summary = serde_json::json!({ "scenarios": entries });
    let body = serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n";
    if let Err(e) = std::fs::create_dir_all(&summary_dir)
        .and_then(|_| std::fs::write(summary_dir.join("batch_summary.json"), body))
    {
        eprintln!("error: cannot write batch summary: {e}");
        return 1.max(worst);
    }
    println!("batch: {} scenario(s), summary in batch_summary.json", entries.len());
    worst
}

fn run_config_file(subcommand: &str, path: &Path, ov: &Overrides) -> Result<RunOutcome, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
    let mut cfg: ScenarioConfig = serde_json::from_str(&text).map_err(|e| {
        CliError::Validation(format!(
            "{}: line {}, column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })?;
    if cfg.mode.mode_name() != subcommand {
        return Err(CliError::Validation(format!(
            "{}: config mode '{}' does not match the '{subcommand}' subcommand",
            path.display(),
            cfg.mode.mode_name()
        )));
    }
    apply_overrides(&mut cfg, ov).map_err(CliError::Validation)?;
    run_scenario(&cfg)
}

/// Validate and run one scenario, writing its artifacts.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunOutcome, CliError> {
    validate(cfg).map_err(CliError::Validation)?;
    let spec = cfg.model.to_core().map_err(CliError::Validation)?;
    let mode = cfg.mode.clone();
    match &mode {
        ModeConfig::El(p) => run_el(cfg, &spec, p),
        ModeConfig::HopfLax(p) => run_hopf_lax(cfg, &spec, p),
        ModeConfig::Pde(p) => run_pde_mode(cfg, &spec, p),
        ModeConfig::Pilot(p) => run_pilot(cfg, &spec, p),
        ModeConfig::Compare(p) => run_compare(cfg, &spec, p),
        ModeConfig::Figures(p) => run_figures(cfg, &spec, p),
    }
}

fn write_artifact(cfg: &ScenarioConfig, file_name: &str, body: String) -> Result<String, CliError> {
    std::fs::create_dir_all(&cfg.out_dir).map_err(|e| {
        CliError::Validation(format!("cannot create {}: {e}", cfg.out_dir.display()))
    })?;
    let path = cfg.out_dir.join(file_name);
    std::fs::write(&path, body)
        .map_err(|e| CliError::Validation(format!("cannot write {}: {e}", path.display())))?;
    Ok(file_name.to_string())
}

fn trajectory_rows(prefix: &[String], tr: &Trajectory) -> Vec<Vec<String>> {
    let mut rows = Vec::with_capacity(tr.len());
    for k in 0..tr.len() {
        let mut row = prefix.to_vec();
        row.push(fmt_f64(tr.times[k]));
        row.extend(tr.positions[k].iter().map(|&c| fmt_f64(c)));
        rows.push(row);
    }
    rows
}

fn family_csv(spec: &ModelSpec, p: &Fig1Params) -> Result<(String, f64, Vec<f64>), CliError> {
    let family =
        trajectory_family(spec, &p.x0, &p.x, p.t, &p.amplitudes).map_err(from_core)?;
    let mut header = vec![
        "trajectory".to_string(),
        "amplitude".to_string(),
        "action".to_string(),
        "s".to_string(),
    ];
    header.extend(coord_headers("x", spec.dimension));
    let mut rows = Vec::new();
    for (idx, member) in family.iter().enumerate() {
        let prefix = vec![
            idx.to_string(),
            fmt_f64(member.amplitude),
            fmt_f64(member.action),
        ];
        rows.extend(trajectory_rows(&prefix, &member.trajectory));
    }
    let optimal = &family[0];
    Ok((
        csv_document(&header, &rows),
        optimal.action,
        optimal.trajectory.initial_velocity().to_vec(),
    ))
}

fn run_el(cfg: &ScenarioConfig, spec: &ModelSpec, p: &ElParams) -> Result<RunOutcome, CliError> {
    let fig = Fig1Params {
        x0: p.x0.clone(),
        x: p.x.clone(),
        t: p.t,
        amplitudes: p.amplitudes.clone(),
    };
    let (body, action, v0) = family_csv(spec, &fig)?;
    let artifact = write_artifact(cfg, &format!("{}.family.csv", cfg.name), body)?;
    println!(
        "{}: optimal action {} with initial velocity [{}]",
        cfg.name,
        fmt_f64(action),
        v0.iter().map(|&c| fmt_f64(c)).collect::<Vec<_>>().join(", ")
    );
    Ok(RunOutcome {
        name: cfg.name.clone(),
        artifacts: vec![artifact],
    })
}

fn run_hopf_lax(
    cfg: &ScenarioConfig,
    spec: &ModelSpec,
    p: &HopfLaxParams,
) -> Result<RunOutcome, CliError> {
    let s0 = p.s0.to_core();
    let mut header = coord_headers("x", spec.dimension);
    header.push("t".into());
    header.push("value".into());
    header.extend(coord_headers("argmin_x0", spec.dimension));
    header.push("candidates_evaluated".into());
    header.push("boundary_warning".into());

    let mut rows = Vec::new();
    for probe in &p.probes {
        let r = hj_action_hopf_lax(spec, &s0, &probe.x, probe.t, &p.search_box, p.coarse_n)
            .map_err(from_core)?;
        let mut row: Vec<String> = probe.x.iter().map(|&c| fmt_f64(c)).collect();
        row.push(fmt_f64(probe.t));
        row.push(fmt_f64(r.value));
        row.extend(r.argmin_x0.iter().map(|&c| fmt_f64(c)));
        row.push(r.candidates_evaluated.to_string());
        row.push(r.boundary_warning.to_string());
        rows.push(row);
    }
    let artifact = write_artifact(
        cfg,
        &format!("{}.hopflax.csv", cfg.name),
        csv_document(&header, &rows),
    )?;
    Ok(RunOutcome {
        name: cfg.name.clone(),
        artifacts: vec![artifact],
    })
}

fn solve_field(spec: &ModelSpec, p: &PdeParams) -> Result<ActionField, CliError> {
    let grid = SpatialGrid::new(p.lo, p.hi, p.grid_n).map_err(from_core)?;
    let samples = sample_initial_action(spec, &p.s0.to_core(), &grid, p.cap).map_err(from_core)?;
    solve_hj_pde(spec, &grid, &samples, p.t_final, p.cfl, &p.snapshot_times).map_err(from_core)
}

fn field_csv(field: &ActionField) -> String {
    let header = vec!["x".to_string(), "t".to_string(), "S".to_string()];
    let mut rows = Vec::new();
    for (j, t) in field.times.iter().enumerate() {
        for i in 0..field.grid.n {
            rows.push(vec![
                fmt_f64(field.grid.x(i)),
                fmt_f64(*t),
                fmt_f64(field.values[j][i]),
            ]);
        }
    }
    csv_document(&header, &rows)
}

fn run_pde_mode(
    cfg: &ScenarioConfig,
    spec: &ModelSpec,
    p: &PdeParams,
) -> Result<RunOutcome, CliError> {
    let field = solve_field(spec, p)?;
    let artifact = write_artifact(cfg, &format!("{}.field.csv", cfg.name), field_csv(&field))?;
    println!(
        "{}: solved {} steps of S on [{}, {}] up to t = {}",
        cfg.name,
        field.times.len(),
        p.lo,
        p.hi,
        p.t_final
    );
    Ok(RunOutcome {
        name: cfg.name.clone(),
        artifacts: vec![artifact],
    })
}

fn build_view(spec: &ModelSpec, source: &PilotSourceConfig) -> Result<VelocityFieldView, CliError> {
    match source {
        PilotSourceConfig::Analytic { v0 } => {
            VelocityFieldView::analytic_linear(v0.clone(), spec.clone()).map_err(from_core)
        }
        PilotSourceConfig::Grid(p) => {
            let field = solve_field(spec, p)?;
            VelocityFieldView::from_action_field(field).map_err(from_core)
        }
    }
}

fn paths_csv(dim: usize, trajectories: &[Trajectory]) -> String {
    let mut header = vec!["path".to_string(), "s".to_string()];
    header.extend(coord_headers("x", dim));
    let mut rows = Vec::new();
    for (idx, tr) in trajectories.iter().enumerate() {
        rows.extend(trajectory_rows(&[idx.to_string()], tr));
    }
    csv_document(&header, &rows)
}

fn probe_table_csv(
    view: &VelocityFieldView,
    dim: usize,
    times: &[f64],
    xs: &[Vec<f64>],
) -> Result<String, CliError> {
    let mut header = vec!["t".to_string()];
    header.extend(coord_headers("x", dim));
    header.extend(coord_headers("v", dim));
    let mut rows = Vec::new();
    for &t in times {
        for x in xs {
            let v = velocity_field(view, x, t).map_err(from_core)?;
            let mut row = vec![fmt_f64(t)];
            row.extend(x.iter().map(|&c| fmt_f64(c)));
            row.extend(v.iter().map(|&c| fmt_f64(c)));
            rows.push(row);
        }
    }
    Ok(csv_document(&header, &rows))
}

fn run_pilot(
    cfg: &ScenarioConfig,
    spec: &ModelSpec,
    p: &PilotParams,
) -> Result<RunOutcome, CliError> {
    let view = build_view(spec, &p.source)?;
    let mut trajectories = Vec::new();
    for start in &p.starts {
        trajectories
            .push(integrate_pilot_trajectory(&view, start, p.t0, p.t1, p.dt).map_err(from_core)?);
    }
    let dim = spec.dimension;
    let mut artifacts = vec![write_artifact(
        cfg,
        &format!("{}.paths.csv", cfg.name),
        paths_csv(dim, &trajectories),
    )?];
    if !p.probe_times.is_empty() && !p.probe_xs.is_empty() {
        artifacts.push(write_artifact(
            cfg,
            &format!("{}.field_probes.csv", cfg.name),
            probe_table_csv(&view, dim, &p.probe_times, &p.probe_xs)?,
        )?);
    }
    Ok(RunOutcome {
        name: cfg.name.clone(),
        artifacts,
    })
}

fn run_figures(
    cfg: &ScenarioConfig,
    spec: &ModelSpec,
    p: &FiguresParams,
) -> Result<RunOutcome, CliError> {
    let mut artifacts = Vec::new();
    if let Some(fig1) = &p.fig1 {
        let (body, _, _) = family_csv(spec, fig1)?;
        artifacts.push(write_artifact(cfg, &format!("{}.fig1.csv", cfg.name), body)?);
    }
    if let Some(fig2) = &p.fig2 {
        artifacts.push(write_artifact(
            cfg,
            &format!("{}.fig2.csv", cfg.name),
            fig2_csv(spec, fig2)?,
        )?);
    }
    if let Some(fig3) = &p.fig3 {
        let view = build_view(
            spec,
            &PilotSourceConfig::Analytic { v0: fig3.v0.clone() },
        )?;
        let xs: Vec<Vec<f64>> = fig3.probe_xs.iter().map(|&x| vec![x]).collect();
        artifacts.push(write_artifact(
            cfg,
            &format!("{}.fig3_field.csv", cfg.name),
            probe_table_csv(&view, 1, &fig3.probe_times, &xs)?,
        )?);
        let mut trajectories = Vec::new();
        for start in &fig3.starts {
            trajectories
                .push(integrate_pilot_trajectory(&view, start, 0.0, fig3.t1, None).map_err(from_core)?);
        }
        artifacts.push(write_artifact(
            cfg,
            &format!("{}.fig3_paths.csv", cfg.name),
            paths_csv(1, &trajectories),
        )?);
    }
    Ok(RunOutcome {
        name: cfg.name.clone(),
        artifacts,
    })
}

/// Classical paths from each listed initial point to the common endpoint,
/// with the initial velocity that achieves the connection.
fn fig2_csv(spec: &ModelSpec, p: &Fig2Params) -> Result<String, CliError> {
    let header = vec![
        "path".to_string(),
        "x0".to_string(),
        "v0".to_string(),
        "s".to_string(),
        "x".to_string(),
    ];
    let mut rows = Vec::new();
    for (idx, x0) in p.x0_list.iter().enumerate() {
        let sol =
            solve_bvp_shooting(spec, x0, &p.x, p.t, p.n_steps, 1e-10).map_err(from_core)?;
        let prefix = vec![
            idx.to_string(),
            fmt_f64(x0[0]),
            fmt_f64(sol.initial_velocity[0]),
        ];
        rows.extend(trajectory_rows(&prefix, &sol.trajectory));
    }
    Ok(csv_document(&header, &rows))
}

fn run_compare(
    cfg: &ScenarioConfig,
    spec: &ModelSpec,
    p: &CompareParams,
) -> Result<RunOutcome, CliError> {
    let report = build_comparison(cfg, spec, p)?;
    let body = serde_json::to_string_pretty(&report)
        .map_err(|e| CliError::Validation(format!("cannot serialize report: {e}")))?
        + "\n";
    let artifact = write_artifact(cfg, &format!("{}.report.json", cfg.name), body)?;

    for (route, secs) in &report.route_runtimes {
        println!("{}: route {route} took {:.3} ms", cfg.name, secs * 1e3);
    }
    let mut pass = 0usize;
    let mut fail = 0usize;
    for probe in &report.probes {
        for diff in &probe.diffs {
            match diff.pass {
                Some(true) => pass += 1,
                Some(false) => {
                    fail += 1;
                    println!(
                        "{}: FAIL {} at x = {:?}, t = {}: |diff| = {} > {}",
                        cfg.name,
                        diff.pair,
                        probe.x,
                        probe.t,
                        fmt_f64(diff.abs_diff),
                        fmt_f64(diff.tolerance.unwrap())
                    );
                }
                None => {}
            }
        }
    }
    println!(
        "{}: {pass} pairwise check(s) passed, {fail} failed",
        cfg.name
    );

    if !report.all_mandatory_ok {
        return Err(CliError::Numerical(format!(
            "{}: a mandatory route failed (see {})",
            cfg.name, artifact
        )));
    }
    Ok(RunOutcome {
        name: cfg.name.clone(),
        artifacts: vec![artifact],
    })
}

fn build_comparison(
    cfg: &ScenarioConfig,
    spec: &ModelSpec,
    p: &CompareParams,
) -> Result<ComparisonReport, CliError> {
    let s0 = p.s0.to_core();
    let singular_anchor = match &p.s0 {
        S0Config::SingularAt { x0 } => Some(x0.clone()),
        _ => None,
    };
    let linear_v0 = match &p.s0 {
        S0Config::LinearForm { v0, .. } => Some(v0.clone()),
        _ => None,
    };

    // One grid solve serves every probe.
    let mut runtimes: BTreeMap<String, f64> = BTreeMap::new();
    let field: Option<std::result::Result<ActionField, String>> = p.pde.as_ref().map(|pde| {
        let t_final = p
            .probes
            .iter()
            .map(|probe| probe.t)
            .fold(0.0f64, f64::max);
        let mut snapshot_times: Vec<f64> = p.probes.iter().map(|probe| probe.t).collect();
        snapshot_times.push(0.0);
        snapshot_times.sort_by(|a, b| a.partial_cmp(b).unwrap());
        snapshot_times.dedup();
        let started = Instant::now();
        let result = (|| {
            let grid = SpatialGrid::new(pde.lo, pde.hi, pde.grid_n)?;
            let samples = sample_initial_action(spec, &s0, &grid, pde.cap)?;
            solve_hj_pde(spec, &grid, &samples, t_final, pde.cfl, &snapshot_times)
        })()
        .map_err(|e| e.to_string());
        *runtimes.entry("pde".into()).or_default() += started.elapsed().as_secs_f64();
        result
    });

    let mut probes = Vec::new();
    let mut mandatory_ok = true;
    for probe in &p.probes {
        let mut values: BTreeMap<String, Option<f64>> = BTreeMap::new();
        let mut failures: BTreeMap<String, String> = BTreeMap::new();

        let record = |route: &str,
                          outcome: std::result::Result<f64, String>,
                          values: &mut BTreeMap<String, Option<f64>>,
                          failures: &mut BTreeMap<String, String>| {
            match outcome {
                Ok(v) => {
                    values.insert(route.into(), Some(v));
                }
                Err(msg) => {
                    values.insert(route.into(), None);
                    failures.insert(route.into(), msg);
                }
            }
        };

        // analytic closed form
        let started = Instant::now();
        if let Some(v0) = &linear_v0 {
            let r = analytic_hj_action_linear(spec, v0, &probe.x, probe.t)
                .map_err(|e| e.to_string());
            record("analytic", r, &mut values, &mut failures);
        } else if let Some(x0) = &singular_anchor {
            let r = analytic_el_action_linear(spec, x0, &probe.x, probe.t)
                .map_err(|e| e.to_string());
            record("analytic", r, &mut values, &mut failures);
        }
        *runtimes.entry("analytic".into()).or_default() += started.elapsed().as_secs_f64();

        // min-plus with the closed-form inner action
        let started = Instant::now();
        let r = hj_action_hopf_lax(spec, &s0, &probe.x, probe.t, &p.search_box, p.coarse_n)
            .map(|r| r.value)
            .map_err(|e| e.to_string());
        record("hopf_lax", r, &mut values, &mut failures);
        *runtimes.entry("hopf_lax".into()).or_default() += started.elapsed().as_secs_f64();

        // min-plus with the discretized inner minimization
        let started = Instant::now();
        match hj_action_nested(
            spec,
            &s0,
            &probe.x,
            probe.t,
            &p.search_box,
            p.coarse_n,
            p.n_segments,
        ) {
            Ok(r) => {
                values.insert("nested".into(), Some(r.value));
                if r.stalled {
                    failures.insert("nested".into(), "inner minimization stalled".into());
                }
            }
            Err(e) => {
                values.insert("nested".into(), None);
                failures.insert("nested".into(), e.to_string());
            }
        }
        *runtimes.entry("nested".into()).or_default() += started.elapsed().as_secs_f64();

        // grid field sample
        if let Some(field_result) = &field {
            let started = Instant::now();
            let r = match field_result {
                Ok(field) => field
                    .value_at(probe.x[0], probe.t)
                    .map_err(|e| e.to_string()),
                Err(msg) => Err(msg.clone()),
            };
            record("pde", r, &mut values, &mut failures);
            *runtimes.entry("pde".into()).or_default() += started.elapsed().as_secs_f64();
        }

        // endpoint shooting from the singular anchor
        if let Some(x0) = &singular_anchor {
            let started = Instant::now();
            let r = solve_bvp_shooting(spec, x0, &probe.x, probe.t, p.shooting_steps, p.shooting_tol)
                .map(|sol| sol.action)
                .map_err(|e| e.to_string());
            record("shooting", r, &mut values, &mut failures);
            *runtimes.entry("shooting".into()).or_default() += started.elapsed().as_secs_f64();
        }

        for route in &p.mandatory {
            let ok = values.get(route.as_str()).map(|v| v.is_some()).unwrap_or(false)
                && !failures.contains_key(route.as_str());
            if !ok {
                mandatory_ok = false;
            }
        }

        // pairwise deviations in canonical route order
        let mut diffs = Vec::new();
        for i in 0..ROUTES.len() {
            for j in (i + 1)..ROUTES.len() {
                let (a, b) = (ROUTES[i], ROUTES[j]);
                let (Some(Some(va)), Some(Some(vb))) = (values.get(a), values.get(b)) else {
                    continue;
                };
                let pair = format!("{a}_vs_{b}");
                let tolerance = p.tolerances.get(&pair).copied();
                let abs_diff = (va - vb).abs();
                diffs.push(PairDiff {
                    pair,
                    abs_diff,
                    tolerance,
                    pass: tolerance.map(|tol| abs_diff <= tol),
                });
            }
        }

        probes.push(ProbeReport {
            x: probe.x.clone(),
            t: probe.t,
            values,
            failures,
            diffs,
        });
    }

    Ok(ComparisonReport {
        name: cfg.name.clone(),
        probes,
        tolerances: p.tolerances.clone(),
        mandatory: p.mandatory.clone(),
        all_mandatory_ok: mandatory_ok,
        route_runtimes: runtimes,
    })
}
