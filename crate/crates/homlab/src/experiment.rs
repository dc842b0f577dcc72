//! The four commands: `cell`, `micro`, `sweep` and `verify`.
//!
//! Every command writes into `<output>/run-<name>/<command>/` and refuses to
//! touch an existing directory unless forced.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use homlab_core::fem::assembly::assemble_reaction_load;
use homlab_core::fem::norms::{h1_error, h1_norm, l2_error};
use homlab_core::fem::{apply_dirichlet, assemble_load, assemble_stiffness, poincare_constant, solve_spd, GaugedSystem};
use homlab_core::geometry::{cells_per_side_for, FaceTag, PeriodicRole};
use homlab_core::hierarchy::classical::{effective_tensor, solve_classical_correctors};
use homlab_core::picard::iterate;
use homlab_core::{
    build_cell_mesh, build_perforated_mesh, contraction_bound, corrector_error, evaluate_expansion,
    fit_convergence_order, flux_check, residual_diagnostics, solve_microscale, CellGeometry, Coefficient,
    CoefficientSpec, ConvergenceReport, ConvergenceSample, CorrectorHierarchy, IterationTrace, MicroProblem,
    MicroSolution, Mode, PicardOptions, QuadMesh, ReactionKind, ReactionSpec, ReportFlag,
};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::ExperimentConfig;
use crate::error::{AppError, Result};
use crate::format::{field_dump, mesh_dump, trace_json, write, write_hierarchy, write_json};
use crate::report::{describe, report_csv, summary_json};

/// Command-line overrides.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Worker threads for the sweep; all cores when `None`.
    pub jobs: Option<usize>,
    pub force: bool,
    /// Replaces `output_dir` of the config.
    pub output: Option<PathBuf>,
}

/// File written into every command directory; `--force` only removes
/// directories that carry it.
const RUN_MARKER: &str = "run.json";

fn prepare_dir(config: &ExperimentConfig, options: &RunOptions, command: &str) -> Result<PathBuf> {
    let base = options.output.clone().unwrap_or_else(|| config.output_dir.clone());
    let dir = base.join(format!("run-{}", config.run_name())).join(command);
    if dir.exists() {
        if !options.force {
            return Err(AppError::Config(format!(
                "{} already exists; pass --force to overwrite it",
                dir.display()
            )));
        }
        if !dir.join(RUN_MARKER).exists() {
            return Err(AppError::Config(format!(
                "{} exists but was not written by homlab; refusing to overwrite it",
                dir.display()
            )));
        }
        fs::remove_dir_all(&dir).map_err(AppError::io(&dir))?;
    }
    fs::create_dir_all(&dir).map_err(AppError::io(&dir))?;
    write_json(
        &dir.join(RUN_MARKER),
        &json!({
            "command": command,
            "version": env!("CARGO_PKG_VERSION"),
            "config": serde_json::to_value(config).expect("config serializes"),
        }),
    )?;
    Ok(dir)
}

fn build_hierarchy(config: &ExperimentConfig) -> Result<CorrectorHierarchy> {
    let cell = build_cell_mesh(config.cell_geometry()?);
    Ok(CorrectorHierarchy::build(
        &cell,
        &config.coefficient_spec()?,
        &config.reaction_spec()?,
        config.expansion_config()?,
        &config.hierarchy_options()?,
    )?)
}

fn trace_line(t: &IterationTrace) -> String {
    format!(
        "level {}: {} iterations, last increment {:.3e}, observed ratio {}",
        t.level,
        t.iterations,
        t.increments.last().copied().unwrap_or(0.0),
        t.observed_ratio.map_or_else(|| "-".to_string(), |r| format!("{r:.4}"))
    )
}

pub struct CellOutcome {
    pub dir: PathBuf,
    pub hierarchy: CorrectorHierarchy,
    pub manifest: Value,
}

impl CellOutcome {
    pub fn summary(&self) -> String {
        let h = &self.hierarchy;
        let mut s = format!("C_p = {:.10}, kappa_p = {:.10}, porosity = {}\n", h.c_p, h.kappa_p, h.porosity);
        if let Some(d) = h.d_hom() {
            s += &format!("d_hom = [[{:.10}, {:.10}], [{:.10}, {:.10}]]\n", d[0][0], d[0][1], d[1][0], d[1][1]);
        }
        for t in h.traces() {
            s += &trace_line(t);
            s.push('\n');
        }
        s + &format!("archive written to {}", self.dir.display())
    }
}

pub fn cmd_cell(config: &ExperimentConfig, options: &RunOptions) -> Result<CellOutcome> {
    let hierarchy = build_hierarchy(config)?;
    let dir = prepare_dir(config, options, "cell")?;
    let manifest = write_hierarchy(&dir, &hierarchy)?;
    Ok(CellOutcome { dir, hierarchy, manifest })
}

fn micro_problem(config: &ExperimentConfig, eps: f64) -> Result<MicroProblem> {
    let k = cells_per_side_for(eps)?;
    Ok(MicroProblem {
        mesh: build_perforated_mesh(config.cell_geometry()?, k)?,
        coefficient: config.coefficient_spec()?,
        reaction: config.reaction_spec()?,
    })
}

fn micro_metadata(problem: &MicroProblem, s: &MicroSolution) -> Value {
    let mesh = &problem.mesh.mesh;
    let flux = flux_check(mesh, &s.d, &s.u.values);
    json!({
        "eps": problem.mesh.eps(),
        "cells_per_side": problem.mesh.cells_per_side(),
        "n_per_cell": problem.mesh.n_per_cell(),
        "nodes": mesh.node_count(),
        "elements": mesh.element_count(),
        "energy": s.energy,
        "reaction_work": s.reaction_work,
        "energy_identity_residual": s.energy_identity_residual(),
        "flux": { "faces": flux.faces, "l2": flux.l2, "max_abs": flux.max_abs },
        "trace": trace_json(&s.trace),
    })
}

pub struct MicroOutcome {
    pub dir: PathBuf,
    pub metadata: Value,
}

impl MicroOutcome {
    pub fn summary(&self) -> String {
        let m = &self.metadata;
        format!(
            "eps = {}, {} nodes, {} Picard iterations, energy identity residual {:.3e}\nwritten to {}",
            m["eps"],
            m["nodes"],
            m["trace"]["iterations"],
            m["energy_identity_residual"].as_f64().unwrap_or(f64::NAN),
            self.dir.display()
        )
    }
}

pub fn cmd_micro(config: &ExperimentConfig, options: &RunOptions) -> Result<MicroOutcome> {
    let eps = match &config.micro {
        Some(m) => m.eps,
        None => *config
            .sweep
            .eps
            .first()
            .ok_or_else(|| AppError::Config("micro needs micro.eps or a sweep eps".into()))?,
    };
    let problem = micro_problem(config, eps)?;
    let solution = solve_microscale(&problem, &config.picard_options())?;
    let metadata = micro_metadata(&problem, &solution);
    let dir = prepare_dir(config, options, "micro")?;
    write(&dir.join("u_eps.field"), &field_dump(&solution.u))?;
    write(&dir.join("omega.mesh"), &mesh_dump(&problem.mesh.mesh, &[]))?;
    write_json(&dir.join("metadata.json"), &metadata)?;
    Ok(MicroOutcome { dir, metadata })
}

/// One `ε` of a sweep.
#[derive(Clone, Debug)]
pub struct SweepPoint {
    pub eps: f64,
    pub error: f64,
    pub energy_identity_residual: f64,
    pub converged: bool,
    pub record: Value,
}

fn sweep_point(config: &ExperimentConfig, h: &CorrectorHierarchy, eps: f64) -> Result<SweepPoint> {
    let problem = micro_problem(config, eps)?;
    let solution = solve_microscale(&problem, &config.picard_options())?;
    let expansion = evaluate_expansion(h, &problem.mesh)?;
    let error = corrector_error(&problem.mesh.mesh, &solution.u.values, &expansion)?;
    let diag = residual_diagnostics(&problem, &solution.u.values, h)?;
    let mut record = micro_metadata(&problem, &solution);
    record["error"] = json!(error);
    record["interpolation_gap"] = json!(expansion.interpolation_gap(&problem.mesh.mesh));
    record["residuals"] = json!({ "reaction": diag.reaction, "volume": diag.volume, "surface": diag.surface });
    Ok(SweepPoint {
        eps,
        error,
        energy_identity_residual: solution.energy_identity_residual(),
        converged: solution.trace.converged,
        record,
    })
}

pub struct SweepOutcome {
    pub dir: PathBuf,
    pub mode: Mode,
    pub report: ConvergenceReport,
    pub points: Vec<SweepPoint>,
    pub summary: Value,
    /// Order gate in classical mode, convergence of every solve otherwise.
    pub passed: bool,
}

impl SweepOutcome {
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for p in &self.points {
            s += &format!("eps = {:<10} error = {:.6e}\n", p.eps, p.error);
        }
        s += &describe(&self.report);
        s + &format!("\nwritten to {}", self.dir.display())
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            6
        }
    }
}

fn pool(jobs: Option<usize>) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| AppError::Config(format!("cannot start {} worker threads: {e}", jobs.unwrap_or(0))))
}

pub fn cmd_sweep(config: &ExperimentConfig, options: &RunOptions) -> Result<SweepOutcome> {
    if config.sweep.eps.len() < 3 {
        return Err(AppError::Config(format!("a sweep needs at least 3 eps values, got {}", config.sweep.eps.len())));
    }
    let h = build_hierarchy(config)?;
    let mut eps = config.sweep.eps.clone();
    eps.sort_by(|a, b| b.total_cmp(a));
    let results: Vec<Result<SweepPoint>> = pool(options.jobs)?.install(|| eps.par_iter().map(|&e| sweep_point(config, &h, e)).collect());
    let points = results.into_iter().collect::<Result<Vec<_>>>()?;
    let samples: Vec<ConvergenceSample> = points.iter().map(|p| ConvergenceSample { eps: p.eps, error: p.error }).collect();
    let report = fit_convergence_order(&samples, config.expansion.order)?;
    let mode = h.mode();
    let passed = match mode {
        Mode::Classical => report.has(ReportFlag::Degenerate) || report.order_gate_passed(),
        Mode::Nonlinear => points.iter().all(|p| p.converged),
    };
    let summary = summary_json(&report, h.kappa_p, h.c_p);

    let dir = prepare_dir(config, options, "sweep")?;
    write(&dir.join("report.csv"), &report_csv(&report))?;
    write_json(&dir.join("summary.json"), &summary)?;
    write_json(
        &dir.join("points.json"),
        &json!({
            "mode": if mode == Mode::Classical { "classical" } else { "nonlinear" },
            "d_hom": h.d_hom(),
            "gate_passed": passed,
            "hierarchy_traces": h.traces().into_iter().map(trace_json).collect::<Vec<_>>(),
            "points": points.iter().map(|p| p.record.clone()).collect::<Vec<_>>(),
        }),
    )?;
    Ok(SweepOutcome { dir, mode, report, points, summary, passed })
}

/// Result of one verification property.
#[derive(Clone, Debug)]
pub struct Property {
    pub name: &'static str,
    pub passed: bool,
    pub detail: Value,
}

fn fitted_slope(hs: &[f64], errors: &[f64]) -> Result<f64> {
    let samples: Vec<_> = hs.iter().zip(errors).map(|(&eps, &error)| ConvergenceSample { eps, error }).collect();
    Ok(fit_convergence_order(&samples, 3)?.slope.unwrap_or(f64::NAN))
}

/// `u = sin(πx₁) sin(πx₂)` on the unit square at `h = 1/16, 1/32, 1/64`;
/// L² order `2 ± 0.2`, H¹ order `1 ± 0.2`.
pub fn verify_manufactured() -> Result<Property> {
    let exact = |x: [f64; 2]| (PI * x[0]).sin() * (PI * x[1]).sin();
    let grad = |x: [f64; 2]| [PI * (PI * x[0]).cos() * (PI * x[1]).sin(), PI * (PI * x[0]).sin() * (PI * x[1]).cos()];
    let (mut hs, mut l2, mut h1) = (vec![], vec![], vec![]);
    for n in [16, 32, 64] {
        let mesh = QuadMesh::unit_square(n)?;
        let system = assemble_stiffness(&mesh, &CoefficientSpec::constant(1.0)?)?;
        let rhs = assemble_load(&mesh, |x| 2.0 * PI * PI * exact(x));
        let u = solve_spd(&apply_dirichlet(&system, &mesh, FaceTag::Outer, 0.0).with_rhs(&rhs), 1e-12)?;
        hs.push(1.0 / n as f64);
        l2.push(l2_error(&mesh, &u, exact));
        h1.push(h1_error(&mesh, &u, grad));
    }
    let (p_l2, p_h1) = (fitted_slope(&hs, &l2)?, fitted_slope(&hs, &h1)?);
    Ok(Property {
        name: "manufactured-solution-orders",
        passed: (p_l2 - 2.0).abs() <= 0.2 && (p_h1 - 1.0).abs() <= 0.2,
        detail: json!({ "h": hs, "l2_error": l2, "h1_error": h1, "l2_order": p_l2, "h1_order": p_h1 }),
    })
}

fn tensor_of(geometry: CellGeometry, coefficient: Coefficient) -> Result<[[f64; 2]; 2]> {
    let cell = build_cell_mesh(geometry);
    let d = CoefficientSpec::sampled(coefficient, &cell.mesh)?.element_values(&cell.mesh)?;
    let system = GaugedSystem::periodic(&cell, &d, PeriodicRole::LowerMaster, 1e-12, 1e-8);
    let chi = solve_classical_correctors(&system, &cell.mesh, &d)?;
    Ok(effective_tensor(&cell.mesh, &d, &chi))
}

/// `d ≡ 1` gives the identity within `1e-10`; layers `a = 1`, `b = 4` give
/// `diag(1.6, 2.5)` within 1% at `n = 32`.
pub fn verify_layered_tensor() -> Result<Property> {
    let identity = tensor_of(CellGeometry::unperforated(32)?, Coefficient::Constant(1.0))?;
    let layered = tensor_of(CellGeometry::unperforated(32)?, Coefficient::Layered { a: 1.0, b: 4.0 })?;
    let id_err = (0..4).map(|k| (identity[k / 2][k % 2] - if k % 3 == 0 { 1.0 } else { 0.0 }).abs()).fold(0.0, f64::max);
    let rel = |v: f64, t: f64| (v - t).abs() / t;
    let layered_ok = rel(layered[0][0], 1.6) <= 0.01
        && rel(layered[1][1], 2.5) <= 0.01
        && layered[0][1].abs() <= 0.01
        && layered[1][0].abs() <= 0.01;
    Ok(Property {
        name: "effective-tensor",
        passed: id_err <= 1e-10 && layered_ok,
        detail: json!({ "identity": identity, "identity_error": id_err, "layered": layered }),
    })
}

/// Tanh cell level with `κ_p = 0.5`: every iterate within the contraction
/// bound of an over-converged limit, median ratio at most `κ_p + 0.05`.
pub fn verify_contraction(geometry: CellGeometry) -> Result<Property> {
    let cell = build_cell_mesh(geometry);
    let mesh = &cell.mesh;
    let d = vec![1.0; mesh.element_count()];
    let c_p = poincare_constant(&cell)?;
    let kappa = 0.5;
    let reaction = ReactionSpec::builtin(ReactionKind::SinTanh { lambda: kappa / c_p })?;
    let system = GaugedSystem::periodic(&cell, &d, PeriodicRole::LowerMaster, 1e-13, 1e-8);
    let mut iterates = Vec::new();
    let options = PicardOptions { tol: 1e-12, max_iter: 200, linear_tol: 1e-13 };
    let (limit, trace) = iterate(
        &options,
        0,
        vec![0.0; mesh.node_count()],
        |u| {
            let sol = system.solve_projected(&assemble_reaction_load(mesh, u, &reaction), Some(u))?;
            iterates.push(sol.values.clone());
            Ok((sol.values, sol.defect))
        },
        |v| h1_norm(mesh, v),
    )?;
    let trace = trace.with_kappa(kappa, c_p);
    let mut worst_margin = f64::NEG_INFINITY;
    let mut errors = Vec::with_capacity(iterates.len());
    for (k, u) in iterates.iter().enumerate() {
        let diff: Vec<f64> = u.iter().zip(&limit).map(|(a, b)| a - b).collect();
        let e = h1_norm(mesh, &diff);
        worst_margin = worst_margin.max(e - contraction_bound(kappa, k + 1, trace.norm_u1) - 1e-8);
        errors.push(e);
    }
    let ratio = trace.observed_ratio.unwrap_or(f64::NAN);
    Ok(Property {
        name: "picard-contraction",
        passed: worst_margin <= 0.0 && ratio <= kappa + 0.05,
        detail: json!({
            "kappa_p": kappa,
            "c_p": c_p,
            "lambda": kappa / c_p,
            "observed_ratio": ratio,
            "errors": errors,
            "bounds": trace.bounds,
            "worst_margin": worst_margin,
        }),
    })
}

pub struct VerifyOutcome {
    pub dir: PathBuf,
    pub properties: Vec<Property>,
}

impl VerifyOutcome {
    pub fn passed(&self) -> bool {
        self.properties.iter().all(|p| p.passed)
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        for p in &self.properties {
            s += &format!("{} {}\n", if p.passed { "PASS" } else { "FAIL" }, p.name);
        }
        s + &format!("written to {}", self.dir.display())
    }
}

/// Runs the property suites; the contraction check uses the configured cell.
pub fn cmd_verify(config: &ExperimentConfig, options: &RunOptions) -> Result<VerifyOutcome> {
    let geometry = config.cell_geometry()?;
    let properties = vec![verify_manufactured()?, verify_layered_tensor()?, verify_contraction(geometry)?];
    let dir = prepare_dir(config, options, "verify")?;
    write_json(
        &dir.join("verify.json"),
        &json!({
            "passed": properties.iter().all(|p| p.passed),
            "properties": properties
                .iter()
                .map(|p| json!({ "name": p.name, "passed": p.passed, "detail": p.detail }))
                .collect::<Vec<_>>(),
        }),
    )?;
    Ok(VerifyOutcome { dir, properties })
}

/// Wall time of `f` in seconds.
pub fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed().as_secs_f64())
}

pub fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).map_err(AppError::io(path))?;
    serde_json::from_str(&text).map_err(|e| AppError::Config(format!("{}: {e}", path.display())))
}
