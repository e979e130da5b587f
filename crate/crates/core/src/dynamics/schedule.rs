//! Control-field ramps and the resonance-tracked qubit frequency.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{self, EffectiveParams, ResonanceSolver, SystemParams};

/// Largest node spacing of the cached resonance table [MHz].
pub const RESONANCE_TABLE_STEP: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RampShape {
    Linear,
    /// `Omega(t) = Omega_s + (Omega_e - Omega_s) (1 - cos(pi t / T)) / 2`
    Cosine,
}

impl std::str::FromStr for RampShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(RampShape::Linear),
            "cosine" => Ok(RampShape::Cosine),
            other => Err(Error::InvalidParameter(format!("unknown ramp shape '{other}' (expected linear or cosine)"))),
        }
    }
}

/// Piecewise-cubic Hermite table of the resonant `omega_g(Omega)`.
///
/// Node slopes come from central differences of the solver, which keeps the
/// interpolation error well below the solver tolerance at 0.25 MHz spacing.
#[derive(Debug, Clone, PartialEq)]
pub struct ResonanceTable {
    lo: f64,
    step: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl ResonanceTable {
    pub fn build(p: &SystemParams, lo: f64, hi: f64, solver: &ResonanceSolver) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || hi < lo {
            return Err(Error::InvalidParameter(format!("bad resonance table range [{lo}, {hi}]")));
        }
        let intervals = ((hi - lo) / RESONANCE_TABLE_STEP).ceil().max(1.0) as usize;
        let step = if hi > lo { (hi - lo) / intervals as f64 } else { 1.0 };
        let nodes: Vec<f64> = (0..=intervals).map(|i| lo + step * i as f64).collect();
        let values = solver.track(p, &nodes)?;
        let delta = 1e-3;
        let mut slopes = Vec::with_capacity(nodes.len());
        for (&x, &v) in nodes.iter().zip(&values) {
            let seed = p.omega - v;
            let up = solver.solve_from(p, x + delta, seed)?;
            let down = solver.solve_from(p, x - delta, seed)?;
            slopes.push((up - down) / (2.0 * delta));
        }
        Ok(ResonanceTable {
            lo,
            step,
            values,
            slopes,
        })
    }

    pub fn range(&self) -> (f64, f64) {
        (self.lo, self.lo + self.step * (self.values.len() - 1) as f64)
    }

    /// Interpolated `omega_g`; clamps to the table range.
    pub fn eval(&self, rabi: f64) -> f64 {
        let n = self.values.len();
        if n == 1 {
            return self.values[0];
        }
        let u = ((rabi - self.lo) / self.step).clamp(0.0, (n - 1) as f64);
        let i = (u.floor() as usize).min(n - 2);
        let s = u - i as f64;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.slopes[i] * self.step, self.slopes[i + 1] * self.step);
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * y0 + (s3 - 2.0 * s2 + s) * m0 + (-2.0 * s3 + 3.0 * s2) * y1 + (s3 - s2) * m1
    }
}

/// A control ramp together with the qubit frequency that keeps the two-photon
/// resonance at every instant.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub base: SystemParams,
    pub shape: RampShape,
    pub rabi_start: f64,
    pub rabi_end: f64,
    /// Ramp duration [us].
    pub duration: f64,
    /// Number of output samples, endpoints included.
    pub samples: usize,
    table: ResonanceTable,
}

impl Schedule {
    pub fn new(
        base: &SystemParams,
        shape: RampShape,
        rabi_start: f64,
        rabi_end: f64,
        duration: f64,
        samples: usize,
    ) -> Result<Self> {
        base.validate()?;
        if !(duration.is_finite() && duration > 0.0) {
            return Err(Error::InvalidParameter(format!("ramp duration must be positive, got {duration}")));
        }
        if !(rabi_start.is_finite() && rabi_end.is_finite()) {
            return Err(Error::InvalidParameter("non-finite Rabi frequency".into()));
        }
        if samples < 2 {
            return Err(Error::InvalidParameter("a schedule needs at least two samples".into()));
        }
        let table = ResonanceTable::build(
            base,
            rabi_start.min(rabi_end),
            rabi_start.max(rabi_end),
            &ResonanceSolver::default(),
        )?;
        Ok(Schedule {
            base: *base,
            shape,
            rabi_start,
            rabi_end,
            duration,
            samples,
            table,
        })
    }

    /// Same ramp run backwards in `Omega`, reusing the resonance table.
    pub fn reversed(&self) -> Schedule {
        Schedule {
            rabi_start: self.rabi_end,
            rabi_end: self.rabi_start,
            ..self.clone()
        }
    }

    pub fn with_duration(&self, duration: f64) -> Result<Schedule> {
        if !(duration.is_finite() && duration > 0.0) {
            return Err(Error::InvalidParameter(format!("ramp duration must be positive, got {duration}")));
        }
        Ok(Schedule {
            duration,
            ..self.clone()
        })
    }

    fn progress(&self, t: f64) -> f64 {
        (t / self.duration).clamp(0.0, 1.0)
    }

    pub fn rabi(&self, t: f64) -> f64 {
        let s = self.progress(t);
        let w = match self.shape {
            RampShape::Linear => s,
            RampShape::Cosine => 0.5 * (1.0 - (std::f64::consts::PI * s).cos()),
        };
        self.rabi_start + (self.rabi_end - self.rabi_start) * w
    }

    /// `dOmega/dt` [MHz/us].
    pub fn rabi_rate(&self, t: f64) -> f64 {
        if !(0.0..=self.duration).contains(&t) {
            return 0.0;
        }
        let span = self.rabi_end - self.rabi_start;
        match self.shape {
            RampShape::Linear => span / self.duration,
            RampShape::Cosine => {
                let pi = std::f64::consts::PI;
                span * pi / (2.0 * self.duration) * (pi * self.progress(t)).sin()
            }
        }
    }

    pub fn omega_g(&self, t: f64) -> f64 {
        self.table.eval(self.rabi(t))
    }

    pub fn params_at(&self, t: f64) -> SystemParams {
        self.base.with_omega_g(self.omega_g(t))
    }

    pub fn effective_at(&self, t: f64) -> Result<EffectiveParams> {
        params::effective_constants(&self.params_at(t), self.rabi(t))
    }

    pub fn table(&self) -> &ResonanceTable {
        &self.table
    }

    /// Evenly spaced output times on `[0, duration]`.
    pub fn times(&self) -> Vec<f64> {
        let n = self.samples - 1;
        (0..=n).map(|i| self.duration * i as f64 / n as f64).collect()
    }
}
