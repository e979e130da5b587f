//! Storage and retrieval runs, fidelity reports and figure tables.

use std::io::Write;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{self, Dressing, Model, Schedule, SweepConfig, Trajectory};
use crate::error::{Error, Result};
use crate::hilbert::{self, BasisLabel, SerializedState, SpaceSpec, StateVector};
use crate::params::{self, EffectiveParams, ResonanceSolver, SystemParams};

/// Version tag carried by every JSON report.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// Store `gamma|g> + delta|e>` through `schedule`.
#[derive(Debug, Clone)]
pub struct StorageTask {
    pub gamma: C64,
    pub delta: C64,
    pub schedule: Schedule,
    pub model: Model,
    pub spec: SpaceSpec,
    pub sweep: SweepConfig,
}

impl StorageTask {
    pub fn new(gamma: C64, delta: C64, schedule: Schedule, model: Model, spec: SpaceSpec) -> Result<Self> {
        let norm = gamma.norm_sqr() + delta.norm_sqr();
        if (norm - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::InvalidParameter(format!(
                "|gamma|^2 + |delta|^2 must be 1, got {norm}"
            )));
        }
        spec.validate()?;
        Ok(StorageTask {
            gamma,
            delta,
            schedule,
            model,
            spec,
            sweep: SweepConfig::default(),
        })
    }

    /// Polar form `delta = |delta| e^{i phase}`, `gamma = sqrt(1 - |delta|^2)`.
    pub fn from_polar(delta_abs: f64, delta_phase: f64, schedule: Schedule, model: Model, spec: SpaceSpec) -> Result<Self> {
        if !(0.0..=1.0).contains(&delta_abs) {
            return Err(Error::InvalidParameter(format!("|delta| must lie in [0, 1], got {delta_abs}")));
        }
        let gamma = C64::new((1.0 - delta_abs * delta_abs).sqrt(), 0.0);
        Self::new(gamma, C64::from_polar(delta_abs, delta_phase), schedule, model, spec)
    }

    pub fn with_sweep(mut self, sweep: SweepConfig) -> Self {
        self.sweep = sweep;
        self
    }

    /// `(gamma + delta sigma+)|0>`
    pub fn initial_state(&self) -> Result<StateVector> {
        let vac = self.spec.vacuum();
        let e = self.spec.basis_state(BasisLabel { qubit: 1, ..BasisLabel::VACUUM })?;
        vac.scale(self.gamma).add(&e.scale(self.delta))
    }

    /// `|g> (gamma|vac> + delta (alpha|c> + beta|a>))` at the end of the ramp,
    /// the admixture of |a> included.
    pub fn ideal_target(&self) -> Result<StateVector> {
        let eff = self.schedule.effective_at(self.schedule.duration)?;
        self.memory_like(eff.alpha, eff.beta)
    }

    /// `|g> (gamma|vac> + delta|c>)`
    pub fn memory_target(&self) -> Result<StateVector> {
        self.memory_like(1.0, 0.0)
    }

    fn memory_like(&self, c_amp: f64, a_amp: f64) -> Result<StateVector> {
        let vac = self.spec.vacuum();
        let c = self.spec.basis_state(BasisLabel { c: 1, ..BasisLabel::VACUUM })?;
        let a = self.spec.basis_state(BasisLabel { a: 1, ..BasisLabel::VACUUM })?;
        let excitation = c.scale(C64::new(c_amp, 0.0)).add(&a.scale(C64::new(a_amp, 0.0)))?;
        vac.scale(self.gamma).add(&excitation.scale(self.delta))
    }

    /// Map a zero-photon target into the frame the chosen model evolves in.
    fn in_model_frame(&self, target: &StateVector, at: f64) -> Result<StateVector> {
        match (self.model, self.sweep.dressing) {
            (Model::Full, Dressing::Dressed) => {
                dynamics::dress(&self.schedule.params_at(at), self.schedule.rabi(at), &self.spec, target)
            }
            _ => Ok(target.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Populations {
    pub e: f64,
    pub photon: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "C")]
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StorageReport {
    pub schema_version: u32,
    pub model: Model,
    pub duration_us: f64,
    pub omega_start: f64,
    pub omega_end: f64,
    /// Phase-optimized fidelity against the target with the |a> admixture.
    pub fidelity_vs_ideal: f64,
    /// Phase-optimized fidelity against the pure |c> memory target.
    pub fidelity_vs_memory: f64,
    pub leakage_max: f64,
    pub photon_max: f64,
    pub adiabaticity_max: f64,
    pub max_norm_drift: f64,
    pub final_populations: Populations,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub round_trip_fidelity: Option<f64>,
    pub final_state: SerializedState,
}

impl StorageReport {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))
    }
}

#[derive(Debug, Clone)]
pub struct StorageOutcome {
    pub report: StorageReport,
    pub trajectory: Trajectory,
}

fn report_for(
    task: &StorageTask,
    schedule: &Schedule,
    trajectory: &Trajectory,
    ideal: &StateVector,
    memory: &StateVector,
) -> Result<StorageReport> {
    let partition = task.spec.vacuum_partition();
    let last = trajectory.final_state();
    let obs = trajectory.observables.last().expect("trajectory has samples");
    Ok(StorageReport {
        schema_version: REPORT_SCHEMA_VERSION,
        model: task.model,
        duration_us: schedule.duration,
        omega_start: schedule.rabi_start,
        omega_end: schedule.rabi_end,
        fidelity_vs_ideal: hilbert::phase_optimized_fidelity(ideal, last, &partition)?,
        fidelity_vs_memory: hilbert::phase_optimized_fidelity(memory, last, &partition)?,
        leakage_max: trajectory.max_leakage(),
        photon_max: trajectory.max_photon_population(),
        adiabaticity_max: trajectory.max_adiabaticity(),
        max_norm_drift: trajectory.max_norm_drift,
        final_populations: Populations {
            e: obs.pop_e,
            photon: obs.pop_photon,
            a: obs.pop_a,
            c: obs.pop_c,
        },
        round_trip_fidelity: None,
        final_state: last.to_serialized(&task.spec)?,
    })
}

pub fn run_storage(task: &StorageTask) -> Result<StorageOutcome> {
    let psi0 = task.initial_state()?;
    let trajectory = dynamics::storage_sweep(&task.schedule, &task.spec, &psi0, task.model, &task.sweep)?;
    let end = task.schedule.duration;
    let ideal = task.in_model_frame(&task.ideal_target()?, end)?;
    let memory = task.in_model_frame(&task.memory_target()?, end)?;
    let report = report_for(task, &task.schedule, &trajectory, &ideal, &memory)?;
    Ok(StorageOutcome { report, trajectory })
}

/// Release `stored` back into the qubit along `reverse`. Both fidelities in
/// the returned report are taken against the original qubit state (in the
/// model frame for `fidelity_vs_ideal`, bare for `fidelity_vs_memory`);
/// `round_trip_fidelity` repeats the former.
pub fn run_retrieval(task: &StorageTask, stored: &StateVector, reverse: &Schedule) -> Result<StorageOutcome> {
    let trajectory = dynamics::sweep_from(reverse, &task.spec, stored, task.model, &task.sweep.integrator)?;
    let original = task.initial_state()?;
    let framed = match (task.model, task.sweep.dressing) {
        (Model::Full, Dressing::Dressed) => dynamics::dress(
            &reverse.params_at(reverse.duration),
            reverse.rabi(reverse.duration),
            &task.spec,
            &original,
        )?,
        _ => original.clone(),
    };
    let mut report = report_for(task, reverse, &trajectory, &framed, &original)?;
    report.round_trip_fidelity = Some(report.fidelity_vs_ideal);
    Ok(StorageOutcome { report, trajectory })
}

/// Storage followed by retrieval along the reversed ramp. The storage report
/// gains `round_trip_fidelity`.
pub fn run_round_trip(task: &StorageTask) -> Result<(StorageOutcome, StorageOutcome)> {
    let mut stored = run_storage(task)?;
    let retrieved = run_retrieval(task, stored.trajectory.final_state(), &task.schedule.reversed())?;
    stored.report.round_trip_fidelity = retrieved.report.round_trip_fidelity;
    Ok((stored, retrieved))
}

/// `steps + 1` evenly spaced Rabi frequencies on `[0, omega_max]`.
pub fn omega_grid(omega_max: f64, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 {
        return Err(Error::EmptyGrid);
    }
    if !(omega_max.is_finite() && omega_max >= 0.0) {
        return Err(Error::InvalidParameter(format!("omega_max must be finite and >= 0, got {omega_max}")));
    }
    Ok((0..=steps).map(|i| omega_max * i as f64 / steps as f64).collect())
}

/// Two-column figure table.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureTable {
    pub header: [&'static str; 2],
    pub rows: Vec<(f64, f64)>,
}

impl FigureTable {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(self.header).map_err(io)?;
        for (x, y) in &self.rows {
            w.write_record([x.to_string(), y.to_string()]).map_err(io)?;
        }
        w.flush().map_err(|e| Error::Io(e.to_string()))
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
    }
}

/// One resonance-tracked row per grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackedPoint {
    pub rabi: f64,
    pub omega_g: f64,
    pub effective: EffectiveParams,
}

/// Effective constants along `grid` with the qubit held on resonance.
pub fn track_resonance(p: &SystemParams, grid: &[f64]) -> Result<Vec<TrackedPoint>> {
    let omega_gs = ResonanceSolver::default().track(p, grid)?;
    grid.iter()
        .zip(omega_gs)
        .map(|(&rabi, omega_g)| {
            Ok(TrackedPoint {
                rabi,
                omega_g,
                effective: params::effective_constants(&p.with_omega_g(omega_g), rabi)?,
            })
        })
        .collect()
}

fn figure(p: &SystemParams, grid: &[f64], header: [&'static str; 2], f: impl Fn(&SystemParams, &TrackedPoint) -> f64) -> Result<FigureTable> {
    let rows = track_resonance(p, grid)?.iter().map(|pt| (pt.rabi, f(p, pt))).collect();
    Ok(FigureTable { header, rows })
}

/// Mixing angle `theta(Omega)`.
pub fn figure_theta(p: &SystemParams, grid: &[f64]) -> Result<FigureTable> {
    figure(p, grid, ["Omega", "theta"], |_, pt| pt.effective.theta)
}

/// Cavity-qubit detuning `omega - omega_g(Omega)` [MHz].
pub fn figure_detuning(p: &SystemParams, grid: &[f64]) -> Result<FigureTable> {
    figure(p, grid, ["Omega", "detuning_MHz"], |p, pt| p.omega - pt.omega_g)
}

/// Excited-level admixture `beta sin(theta)` of the quasi-dark state.
pub fn figure_leakage(p: &SystemParams, grid: &[f64]) -> Result<FigureTable> {
    figure(p, grid, ["Omega", "beta_sin_theta"], |_, pt| pt.effective.leakage())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::RampShape;

    fn schedule(duration: f64) -> Schedule {
        Schedule::new(&SystemParams::experimental(), RampShape::Cosine, 30.0, 0.0, duration, 33).unwrap()
    }

    fn spec() -> SpaceSpec {
        SpaceSpec::new(2, 2, 2).unwrap()
    }

    #[test]
    fn rejects_unnormalized_amplitudes() {
        let r = StorageTask::new(C64::new(1.0, 0.0), C64::new(1.0, 0.0), schedule(1.0), Model::Effective, spec());
        assert!(r.is_err());
        assert!(StorageTask::from_polar(1.5, 0.0, schedule(1.0), Model::Effective, spec()).is_err());
    }

    #[test]
    fn vacuum_is_stored_trivially() {
        for model in [Model::Effective, Model::Full] {
            let task = StorageTask::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0), schedule(5.0), model, spec()).unwrap();
            let (stored, retrieved) = run_round_trip(&task).unwrap();
            assert!((stored.report.fidelity_vs_ideal - 1.0).abs() < 1e-9, "{model:?}");
            assert!((stored.report.fidelity_vs_memory - 1.0).abs() < 1e-9);
            assert!((retrieved.report.round_trip_fidelity.unwrap() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn slow_storage_of_excitation() {
        let task = StorageTask::new(C64::new(0.0, 0.0), C64::new(1.0, 0.0), schedule(320.0), Model::Effective, spec()).unwrap();
        let out = run_storage(&task).unwrap();
        assert!(out.report.final_populations.c >= 0.99);
        assert!(out.report.fidelity_vs_ideal >= 0.99);
        // the bright remainder of sigma+|0> ends on B = A at Omega = 0
        let theta0 = task.schedule.effective_at(0.0).unwrap().theta;
        assert!(out.report.final_populations.a <= theta0.sin().powi(2));
        let json = out.report.to_json().unwrap();
        assert!(json.contains("\"schema_version\": 1"));
    }

    #[test]
    fn transported_dark_state_has_small_a_population() {
        let spec = spec();
        let sched = schedule(320.0);
        let dark = crate::spectral::quasi_dark_state(&sched.effective_at(0.0).unwrap(), &spec).unwrap();
        let traj = dynamics::storage_sweep(&sched, &spec, &dark, Model::Effective, &SweepConfig::default()).unwrap();
        assert!(traj.observables.last().unwrap().pop_a <= 0.0052f64.powi(2));
    }

    #[test]
    fn sudden_retrieval_fails() {
        let task = StorageTask::new(C64::new(0.0, 0.0), C64::new(1.0, 0.0), schedule(320.0), Model::Effective, spec()).unwrap();
        let stored = run_storage(&task).unwrap();
        let sudden = task.schedule.reversed().with_duration(1e-3).unwrap();
        let back = run_retrieval(&task, stored.trajectory.final_state(), &sudden).unwrap();
        assert!(back.report.round_trip_fidelity.unwrap() < 0.1);
    }

    #[test]
    fn figure_endpoints() {
        let p = SystemParams::experimental();
        let grid = omega_grid(30.0, 30).unwrap();
        let theta = figure_theta(&p, &grid).unwrap();
        assert_eq!(theta.rows[0].1, std::f64::consts::FRAC_PI_2);
        assert!((theta.rows[30].1 - 0.0678815).abs() < 1e-6);
        let det = figure_detuning(&p, &grid).unwrap();
        assert!((det.rows[0].1 - 197.97958971132712).abs() < 1e-6);
        assert!((det.rows[30].1 - 202.56727).abs() < 1e-4);
        let leak = figure_leakage(&p, &grid).unwrap();
        assert_eq!(leak.rows[0].1, 0.0);
        assert!((leak.rows[30].1 - 0.0051625).abs() < 1e-6);
        assert!(leak.to_csv_string().unwrap().starts_with("Omega,beta_sin_theta\n"));
    }

    #[test]
    fn empty_grid_rejected() {
        assert_eq!(omega_grid(30.0, 0), Err(Error::EmptyGrid));
    }
}
