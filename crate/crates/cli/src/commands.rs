use std::path::{Path, PathBuf};

use num_complex::Complex64;
use quasidark_core::dynamics::{Schedule, SweepConfig};
use quasidark_core::hamiltonian::{self, bosonization_check};
use quasidark_core::params::{self, EffectiveParams, FrohlichCoefficients};
use quasidark_core::protocol::{self, StorageReport, StorageTask};
use quasidark_core::spectral;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::write_atomic;

/// Schema version of the verify summary.
pub const VERIFY_SCHEMA_VERSION: u32 = 1;

/// Duration used for `--sudden` [us].
pub const SUDDEN_DURATION_US: f64 = 1e-3;

pub const DERIVE_HEADER: [&str; 17] = [
    "Omega",
    "omega_g",
    "detuning_MHz",
    "eta1",
    "eta2",
    "eta3",
    "alpha",
    "beta",
    "g_m",
    "omega_g_prime",
    "omega_B",
    "omega_D",
    "Omega_d",
    "Delta",
    "Theta",
    "theta",
    "beta_sin_theta",
];

pub const FIGURE_FILES: [&str; 3] = ["fig_theta.csv", "fig_detuning.csv", "fig_leakage.csv"];

fn out_dir(cfg: &RunConfig) -> PathBuf {
    cfg.output.clone().unwrap_or_else(|| PathBuf::from("out"))
}

fn grid(cfg: &RunConfig) -> Result<Vec<f64>, CliError> {
    Ok(protocol::omega_grid(cfg.grid.omega_max, cfg.grid.steps)?)
}

/// `(rabi, omega_g, constants)` per grid point.
fn constants_on_grid(cfg: &RunConfig) -> Result<Vec<(f64, f64, EffectiveParams)>, CliError> {
    let p = cfg.system.params();
    let grid = grid(cfg)?;
    if cfg.system.track_resonance {
        Ok(protocol::track_resonance(&p, &grid)?
            .into_iter()
            .map(|pt| (pt.rabi, pt.omega_g, pt.effective))
            .collect())
    } else {
        grid.iter()
            .map(|&x| Ok((x, p.omega_g, params::effective_constants(&p, x)?)))
            .collect()
    }
}

fn csv_text(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut text = header.join(",");
    text.push('\n');
    for row in rows {
        // `+ 0.0` folds negative zero
        let cells: Vec<String> = row.iter().map(|x| (x + 0.0).to_string()).collect();
        text.push_str(&cells.join(","));
        text.push('\n');
    }
    text
}

/// Effective constants over the Omega grid as CSV. Written to
/// `<out>/effective_params.csv` when an output directory is configured.
pub fn cmd_derive(cfg: &RunConfig) -> Result<String, CliError> {
    let p = cfg.system.params();
    let rows: Vec<Vec<f64>> = constants_on_grid(cfg)?
        .into_iter()
        .map(|(x, wg, e)| {
            vec![
                x,
                wg,
                p.omega - wg,
                e.eta.eta1,
                e.eta.eta2,
                e.eta.eta3,
                e.alpha,
                e.beta,
                e.g_m,
                e.omega_g_prime,
                e.omega_b,
                e.omega_d,
                e.drive,
                e.detuning,
                e.splitting,
                e.theta,
                e.leakage(),
            ]
        })
        .collect();
    let text = csv_text(&DERIVE_HEADER, &rows);
    if let Some(dir) = &cfg.output {
        write_atomic(&dir.join("effective_params.csv"), text.as_bytes())?;
    }
    Ok(text)
}

/// Write the three figure tables into the output directory.
pub fn cmd_figures(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let p = cfg.system.params();
    let grid = grid(cfg)?;
    let dir = out_dir(cfg);
    let tables = [
        protocol::figure_theta(&p, &grid)?,
        protocol::figure_detuning(&p, &grid)?,
        protocol::figure_leakage(&p, &grid)?,
    ];
    let mut written = Vec::new();
    for (name, table) in FIGURE_FILES.iter().zip(&tables) {
        let path = dir.join(name);
        write_atomic(&path, table.to_csv_string()?.as_bytes())?;
        written.push(path);
    }
    Ok(written)
}

#[derive(Debug, Clone)]
pub struct StorageRun {
    pub report: StorageReport,
    pub files: Vec<PathBuf>,
}

impl StorageRun {
    /// The report without the final state, for the terminal.
    pub fn report_summary(&self) -> Result<String, CliError> {
        let mut value = serde_json::to_value(&self.report).map_err(|e| CliError::Io(e.to_string()))?;
        if let Some(map) = value.as_object_mut() {
            map.remove("final_state");
        }
        serde_json::to_string_pretty(&value).map_err(|e| CliError::Io(e.to_string()))
    }
}

pub fn storage_task(cfg: &RunConfig) -> Result<StorageTask, CliError> {
    let p = cfg.system.params();
    let sch = &cfg.schedule;
    let duration = if cfg.storage.sudden { SUDDEN_DURATION_US } else { sch.duration_us };
    let schedule = Schedule::new(&p, sch.ramp, sch.omega_start, sch.omega_end, duration, sch.samples)?;
    let st = &cfg.storage;
    let gamma = st.gamma.unwrap_or_else(|| (1.0 - st.delta_abs * st.delta_abs).max(0.0).sqrt());
    let task = StorageTask::new(
        Complex64::new(gamma, 0.0),
        Complex64::from_polar(st.delta_abs, st.delta_phase),
        schedule,
        st.model,
        cfg.space,
    )
    .map_err(|e| CliError::Config(e.to_string()))?;
    Ok(task.with_sweep(SweepConfig {
        integrator: cfg.integrator.config(),
        dressing: st.dressing,
    }))
}

/// Storage (and optionally retrieval): trajectory CSVs plus a JSON report.
pub fn cmd_storage(cfg: &RunConfig) -> Result<StorageRun, CliError> {
    let task = storage_task(cfg)?;
    let dir = out_dir(cfg);
    let mut files = Vec::new();
    let (stored, retrieved) = if cfg.storage.retrieve {
        let (s, r) = protocol::run_round_trip(&task)?;
        (s, Some(r))
    } else {
        (protocol::run_storage(&task)?, None)
    };
    let path = dir.join("trajectory.csv");
    write_atomic(&path, stored.trajectory.to_csv_string()?.as_bytes())?;
    files.push(path);
    if let Some(r) = &retrieved {
        let path = dir.join("retrieval_trajectory.csv");
        write_atomic(&path, r.trajectory.to_csv_string()?.as_bytes())?;
        files.push(path);
        let path = dir.join("retrieval_report.json");
        write_atomic(&path, r.report.to_json()?.as_bytes())?;
        files.push(path);
    }
    let path = dir.join("storage_report.json");
    write_atomic(&path, stored.report.to_json()?.as_bytes())?;
    files.push(path);
    Ok(StorageRun {
        report: stored.report,
        files,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Worst value observed.
    pub value: f64,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifySummary {
    pub schema_version: u32,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl VerifySummary {
    pub fn failed(&self) -> Vec<String> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect()
    }
}

fn check(name: &str, value: f64, tolerance: f64, detail: Option<String>) -> Check {
    Check {
        name: name.to_string(),
        passed: value <= tolerance,
        value,
        tolerance,
        detail,
    }
}

/// Test hooks for `cmd_verify`.
#[derive(Debug, Clone, Copy, Default)]
pub struct VerifyHooks {
    /// Relative error added to `eta1` before building the generator.
    pub eta_error: f64,
}

/// Invariant suite: resonance, Frohlich residual and consistency,
/// eigensystem identities, bosonization, perturbative validity and
/// Hermiticity. Failed checks are listed in the summary; the caller decides
/// the exit status.
pub fn cmd_verify(cfg: &RunConfig, hooks: VerifyHooks) -> Result<VerifySummary, CliError> {
    let p = cfg.system.params();
    let points = constants_on_grid(cfg)?;
    let v = &cfg.verify;
    let frohlich_space = quasidark_core::SpaceSpec::new(
        cfg.space.n_cavity.max(3),
        cfg.space.n_a.max(3),
        cfg.space.n_c.max(3),
    )?;
    let mut checks = Vec::new();

    let mismatch = points.iter().map(|(_, _, e)| e.resonance_mismatch().abs()).fold(0.0, f64::max);
    if cfg.system.track_resonance {
        checks.push(check("resonance", mismatch, 1e-6, None));
    }

    let mut residual: f64 = 0.0;
    let mut consistency: f64 = 0.0;
    let mut hermiticity: f64 = 0.0;
    for (rabi, wg, _) in &points {
        let tuned = p.with_omega_g(*wg);
        let (h0, hi) = hamiltonian::build_rotating_frame(&tuned, &frohlich_space, *rabi)?;
        let eta = params::frohlich_coefficients(&tuned, *rabi)?;
        let eta = FrohlichCoefficients {
            eta1: eta.eta1 * (1.0 + hooks.eta_error),
            ..eta
        };
        let s = hamiltonian::build_generator_from(&eta, &frohlich_space)?;
        residual = residual.max(hamiltonian::commutator_residual(&h0, &hi, &s, &frohlich_space)?);
        consistency = consistency.max(hamiltonian::frohlich_consistency(&tuned, &frohlich_space, *rabi)?.relative_deviation);
        let lab = hamiltonian::build_collective(&tuned, &cfg.space, *rabi, 0.37)?;
        let eff = hamiltonian::build_effective(&tuned, &cfg.space, *rabi)?;
        for op in [&h0, &hi, &lab, &eff] {
            hermiticity = hermiticity.max(op.hermiticity_error() / op.frobenius_norm().max(1.0));
        }
    }
    checks.push(check("frohlich_residual", residual, v.residual_tolerance, None));
    checks.push(check("frohlich_consistency", consistency, 1e-9, None));
    checks.push(check("hermiticity", hermiticity, 1e-14, None));

    let mut eigen_values: f64 = 0.0;
    let mut eigen_vectors: f64 = 0.0;
    for (_, _, eff) in &points {
        let r = spectral::verify_eigensystem(eff, &cfg.space)?;
        eigen_values = eigen_values.max(r.eigenvalue_error).max(r.radical_form_error);
        eigen_vectors = eigen_vectors.max(r.max_residual).max(r.orthonormality_error).max(r.overlap_deficit);
    }
    checks.push(check("eigenvalues", eigen_values, v.eigen_tolerance, None));
    checks.push(check("eigenvectors", eigen_vectors, 1e-9, None));

    let validity = points
        .iter()
        .map(|(x, wg, _)| params::frohlich_coefficients(&p.with_omega_g(*wg), *x).map(|e| e.max_abs()))
        .collect::<Result<Vec<f64>, _>>()?
        .into_iter()
        .fold(0.0, f64::max);
    checks.push(check("perturbative_validity", validity, params::DEFAULT_VALIDITY_THRESHOLD, None));

    let mid = cfg.grid.omega_max * 0.5;
    let wg_mid = if cfg.system.track_resonance {
        params::solve_resonant_qubit_frequency(&p, mid)?
    } else {
        p.omega_g
    };
    let mut single: f64 = 0.0;
    let mut doubles = Vec::new();
    for n in 1..=v.max_molecules {
        let r = bosonization_check(&p.with_omega_g(wg_mid), n, 2, mid)?;
        single = single.max(r.single_excitation_deviation).max(r.invariance_residual);
        if let Some(d) = r.double_excitation_deviation {
            doubles.push((n, d));
        }
    }
    checks.push(check("bosonization_single_excitation", single, 1e-10, None));
    if doubles.len() >= 2 {
        let increasing = doubles.windows(2).filter(|w| w[1].1 >= w[0].1).count();
        let detail = doubles.iter().map(|(n, d)| format!("N={n}: {d:.3e}")).collect::<Vec<_>>().join("; ");
        checks.push(check("bosonization_double_excitation_trend", increasing as f64, 0.0, Some(detail)));
    }

    let passed = checks.iter().all(|c| c.passed);
    let summary = VerifySummary {
        schema_version: VERIFY_SCHEMA_VERSION,
        passed,
        checks,
    };
    if let Some(dir) = &cfg.output {
        let json = serde_json::to_string_pretty(&summary).map_err(|e| CliError::Io(e.to_string()))?;
        write_atomic(&dir.join("verify.json"), json.as_bytes())?;
    }
    Ok(summary)
}

/// Convenience for tests and scripts: figures into `dir` with defaults.
pub fn figures_into(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let cfg = RunConfig {
        output: Some(dir.to_path_buf()),
        ..RunConfig::default()
    };
    cmd_figures(&cfg)
}

