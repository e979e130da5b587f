//! Adaptive Dormand-Prince 5(4) integration of `i d/dt psi = H(t) psi`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    /// Componentwise relative local error bound.
    pub rtol: f64,
    pub atol: f64,
    /// First trial step [us]; chosen from the Hamiltonian norm when `None`.
    #[serde(default)]
    pub initial_step: Option<f64>,
    pub min_step: f64,
    pub max_steps: usize,
    /// Renormalize after every accepted step. Off by default so that the
    /// reported drift measures the integrator.
    #[serde(default)]
    pub renormalize: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rtol: 1e-9,
            atol: 1e-12,
            initial_step: None,
            min_step: 1e-14,
            max_steps: 50_000_000,
            renormalize: false,
        }
    }
}

/// States sampled on the requested grid.
#[derive(Debug, Clone)]
pub struct Evolution {
    pub times: Vec<f64>,
    pub states: Vec<DVector<C64>>,
    /// `max | ||psi(t)|| - ||psi(0)|| |` over the grid.
    pub max_norm_drift: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

// Dormand-Prince tableau
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth minus fourth order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;
// PI controller exponents (Hairer & Wanner, order 5)
const ALPHA: f64 = 0.7 / 5.0;
const BETA: f64 = 0.4 / 5.0;

fn rhs(h: &DMatrix<C64>, psi: &DVector<C64>) -> DVector<C64> {
    (h * psi) * C64::new(0.0, -1.0)
}

fn combine(base: &DVector<C64>, h: f64, terms: &[(f64, &DVector<C64>)]) -> DVector<C64> {
    let mut out = base.clone();
    for &(w, k) in terms {
        if w != 0.0 {
            out.axpy(C64::new(h * w, 0.0), k, C64::new(1.0, 0.0));
        }
    }
    out
}

/// Integrate from `grid[0]` through every grid time, landing on each exactly.
pub fn integrate<F>(mut hamiltonian: F, psi0: &DVector<C64>, grid: &[f64], cfg: &IntegratorConfig) -> Result<Evolution>
where
    F: FnMut(f64) -> Result<DMatrix<C64>>,
{
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter("time grid must be nondecreasing".into()));
    }
    let norm0 = psi0.norm();
    let mut t = grid[0];
    let mut y = psi0.clone();
    let mut times = vec![t];
    let mut states = vec![y.clone()];
    let mut max_norm_drift: f64 = 0.0;

    let h_mat = hamiltonian(t)?;
    if h_mat.nrows() != y.len() || h_mat.ncols() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: y.len(),
            found: h_mat.nrows(),
        });
    }
    let mut k1 = rhs(&h_mat, &y);
    let scale = h_mat.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-12);
    let mut step = cfg.initial_step.unwrap_or(0.01 / scale);
    let mut err_prev: f64 = 1e-4;
    let (mut accepted, mut rejected) = (0usize, 0usize);

    for &target in &grid[1..] {
        while t < target {
            if accepted + rejected >= cfg.max_steps {
                return Err(Error::StepSizeUnderflow { t, h: step });
            }
            let last = target - t <= step * (1.0 + 1e-12);
            let h = if last { target - t } else { step };
            if h < cfg.min_step && !last {
                return Err(Error::StepSizeUnderflow { t, h });
            }

            let y2 = combine(&y, h, &[(A21, &k1)]);
            let k2 = rhs(&hamiltonian(t + C2 * h)?, &y2);
            let y3 = combine(&y, h, &[(A31, &k1), (A32, &k2)]);
            let k3 = rhs(&hamiltonian(t + C3 * h)?, &y3);
            let y4 = combine(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
            let k4 = rhs(&hamiltonian(t + C4 * h)?, &y4);
            let y5 = combine(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
            let k5 = rhs(&hamiltonian(t + C5 * h)?, &y5);
            let y6 = combine(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]);
            let k6 = rhs(&hamiltonian(t + h)?, &y6);
            let y_new = combine(&y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
            let h_next = hamiltonian(t + h)?;
            let k7 = rhs(&h_next, &y_new);

            let mut err_sq = 0.0;
            for i in 0..y.len() {
                let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = cfg.atol + cfg.rtol * y[i].norm().max(y_new[i].norm());
                err_sq += (e.norm() / sc).powi(2);
            }
            let err = (err_sq / y.len() as f64).sqrt();

            if err <= 1.0 {
                t = if last { target } else { t + h };
                y = y_new;
                if cfg.renormalize {
                    let n = y.norm();
                    y *= C64::new(norm0 / n, 0.0);
                    k1 = rhs(&h_next, &y);
                } else {
                    k1 = k7;
                }
                accepted += 1;
                let err_c = err.max(1e-10);
                let factor = (SAFETY * err_c.powf(-ALPHA) * err_prev.powf(BETA)).clamp(MIN_FACTOR, MAX_FACTOR);
                err_prev = err_c;
                // a truncated final step says little about the natural step
                step = if last && h < step { step * factor.min(1.0) } else { h * factor };
            } else {
                rejected += 1;
                let factor = (SAFETY * err.powf(-ALPHA)).clamp(MIN_FACTOR, 1.0);
                step = h * factor;
                if step < cfg.min_step {
                    return Err(Error::StepSizeUnderflow { t, h: step });
                }
            }
        }
        max_norm_drift = max_norm_drift.max((y.norm() - norm0).abs());
        times.push(target);
        states.push(y.clone());
    }

    Ok(Evolution {
        times,
        states,
        max_norm_drift,
        accepted_steps: accepted,
        rejected_steps: rejected,
    })
}
