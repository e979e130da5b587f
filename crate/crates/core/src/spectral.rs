//! Quasi-dark state and bright modes of the effective Hamiltonian.
//!
//! In the zero-photon single-excitation subspace spanned by
//! `(sigma+|0>, B^dag|0>, D^dag|0>)` the effective Hamiltonian is
//!
//! ```text
//! [[0,   g_m, 0  ],
//!  [g_m, Delta, Omega_d],
//!  [0,   Omega_d, 0  ]]
//! ```
//!
//! with a zero mode `cos(theta) sigma+|0> - s sin(theta) D^dag|0>` (`s` the
//! relative sign of `g_m` and `Omega_d`, `+1` over the usual sweep) and two
//! bright modes at `E+- = (Delta +- Theta) / 2`.

use nalgebra::{DMatrix, Matrix3, Vector3};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{self, single_excitation_basis};
use crate::hilbert::{SpaceSpec, StateVector};
use crate::linalg;
use crate::params::EffectiveParams;

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DarkStateDecomposition {
    pub theta: f64,
    pub dark: StateVector,
    pub bright_plus: StateVector,
    pub bright_minus: StateVector,
    pub e_plus: f64,
    pub e_minus: f64,
    pub splitting: f64,
}

/// The 3x3 effective block in `(e, B, D)`.
pub fn single_excitation_block(eff: &EffectiveParams) -> Matrix3<f64> {
    Matrix3::new(0.0, eff.g_m, 0.0, eff.g_m, eff.detuning, eff.drive, 0.0, eff.drive, 0.0)
}

/// Dark-state coordinates in `(e, B, D)` for mixing angle `theta`.
pub fn dark_coordinates(eff: &EffectiveParams, theta: f64) -> Vector3<f64> {
    Vector3::new(theta.cos(), 0.0, -eff.relative_sign() * theta.sin())
}

/// Bright-mode coordinates in `(e, B, D)`; `plus` selects `E+`.
fn bright_coordinates(eff: &EffectiveParams, plus: bool) -> Vector3<f64> {
    let (t, d) = (eff.splitting, eff.detuning);
    let (b_amp, side) = if plus {
        (((t + d) / (2.0 * t)).sqrt(), ((t - d) / (2.0 * t)).sqrt())
    } else {
        (((t - d) / (2.0 * t)).sqrt(), -((t + d) / (2.0 * t)).sqrt())
    };
    let side = side * eff.coupling_sign();
    Vector3::new(
        side * eff.theta.sin(),
        b_amp,
        side * eff.relative_sign() * eff.theta.cos(),
    )
}

fn embed_coordinates(coords: &Vector3<f64>, eff: &EffectiveParams, spec: &SpaceSpec) -> Result<StateVector> {
    let [e, b, d] = single_excitation_basis(eff, spec)?;
    e.scale(re(coords[0])).add(&b.scale(re(coords[1])))?.add(&d.scale(re(coords[2])))
}

fn has_coupling(eff: &EffectiveParams) -> bool {
    eff.g_m * eff.g_m + eff.drive * eff.drive > 0.0
}

/// Normalized quasi-dark state `F^dag|0>`.
pub fn quasi_dark_state(eff: &EffectiveParams, spec: &SpaceSpec) -> Result<StateVector> {
    if !has_coupling(eff) {
        return Err(Error::UndefinedAngle);
    }
    embed_coordinates(&dark_coordinates(eff, eff.theta), eff, spec)
}

/// Analytic bright energies `(E+, E-) = ((Delta + Theta)/2, (Delta - Theta)/2)`.
pub fn bright_energies(eff: &EffectiveParams) -> (f64, f64) {
    (0.5 * (eff.detuning + eff.splitting), 0.5 * (eff.detuning - eff.splitting))
}

/// Bright energies in the radical form
/// `E+- = +- sqrt((Theta +- Delta)(g_m^2 + Omega_d^2) / (Theta -+ Delta))`.
pub fn radical_energies(eff: &EffectiveParams) -> Result<(f64, f64)> {
    let (t, d) = (eff.splitting, eff.detuning);
    if t - d.abs() <= 0.0 {
        return Err(Error::DegenerateBrightModes);
    }
    let r2 = eff.g_m * eff.g_m + eff.drive * eff.drive;
    Ok((((t + d) * r2 / (t - d)).sqrt(), -((t - d) * r2 / (t + d)).sqrt()))
}

pub fn bright_modes(eff: &EffectiveParams, spec: &SpaceSpec) -> Result<DarkStateDecomposition> {
    if eff.splitting - eff.detuning.abs() <= 0.0 || !has_coupling(eff) {
        return Err(Error::DegenerateBrightModes);
    }
    let (e_plus, e_minus) = bright_energies(eff);
    Ok(DarkStateDecomposition {
        theta: eff.theta,
        dark: quasi_dark_state(eff, spec)?,
        bright_plus: embed_coordinates(&bright_coordinates(eff, true), eff, spec)?,
        bright_minus: embed_coordinates(&bright_coordinates(eff, false), eff, spec)?,
        e_plus,
        e_minus,
        splitting: eff.splitting,
    })
}

/// Amplitude of |a> (A-mode excitation) in the quasi-dark state, `beta sin(theta)`.
pub fn leakage_amplitude(eff: &EffectiveParams) -> f64 {
    eff.leakage()
}

/// `||H_int |dark(theta)>||` for an arbitrary angle, in the 3x3 block.
pub fn dark_residual(eff: &EffectiveParams, theta: f64) -> f64 {
    (single_excitation_block(eff) * dark_coordinates(eff, theta)).norm()
}

/// Analytic eigensystem versus a dense solve of the single-excitation block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigensystemReport {
    /// `max |analytic - numeric|` over `{E-, 0, E+}` [MHz].
    pub eigenvalue_error: f64,
    /// `max |radical form - closed form|` [MHz].
    pub radical_form_error: f64,
    /// `max ||H v - E v||` over the three analytic vectors [MHz].
    pub max_residual: f64,
    /// `max |<v_i|v_j> - delta_ij|`
    pub orthonormality_error: f64,
    /// `max (1 - |<analytic|numeric>|^2)`
    pub overlap_deficit: f64,
}

impl EigensystemReport {
    pub fn worst(&self) -> f64 {
        self.eigenvalue_error
            .max(self.radical_form_error)
            .max(self.max_residual)
            .max(self.orthonormality_error)
            .max(self.overlap_deficit)
    }
}

/// Cross-check `{0, E+-}` and their vectors against a dense eigensolve of the
/// zero-photon single-excitation block of the composite effective operator.
pub fn verify_eigensystem(eff: &EffectiveParams, spec: &SpaceSpec) -> Result<EigensystemReport> {
    let decomposition = bright_modes(eff, spec)?;
    let h = hamiltonian::effective_operator(eff, spec)?;
    let sector: Vec<usize> = [
        crate::hilbert::BasisLabel { qubit: 1, ..crate::hilbert::BasisLabel::VACUUM },
        crate::hilbert::BasisLabel { a: 1, ..crate::hilbert::BasisLabel::VACUUM },
        crate::hilbert::BasisLabel { c: 1, ..crate::hilbert::BasisLabel::VACUUM },
    ]
    .iter()
    .map(|l| spec.index(*l).expect("single excitations fit any cutoff"))
    .collect();
    let block = linalg::submatrix(h.matrix(), &sector);
    let (values, vectors) = linalg::hermitian_eigen(&block);

    let analytic = [
        (decomposition.e_minus, &decomposition.bright_minus),
        (0.0, &decomposition.dark),
        (decomposition.e_plus, &decomposition.bright_plus),
    ];
    let restrict = |v: &StateVector| DMatrix::from_fn(3, 1, |i, _| v.data()[sector[i]]);

    let mut eigenvalue_error: f64 = 0.0;
    let mut max_residual: f64 = 0.0;
    let mut overlap_deficit: f64 = 0.0;
    for (k, (energy, vector)) in analytic.iter().enumerate() {
        eigenvalue_error = eigenvalue_error.max((values[k] - energy).abs());
        let hv = h.apply(vector)?;
        let residual = hv.add(&vector.scale(re(-energy)))?.norm();
        max_residual = max_residual.max(residual);
        let numeric = vectors.column(k);
        let overlap = (numeric.adjoint() * restrict(vector))[(0, 0)].norm_sqr();
        overlap_deficit = overlap_deficit.max((1.0 - overlap).abs());
    }

    let mut orthonormality_error: f64 = 0.0;
    for (i, (_, u)) in analytic.iter().enumerate() {
        for (j, (_, v)) in analytic.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            orthonormality_error = orthonormality_error.max((u.inner(v)? - re(target)).norm());
        }
    }

    let (rp, rm) = radical_energies(eff)?;
    let radical_form_error = (rp - decomposition.e_plus).abs().max((rm - decomposition.e_minus).abs());

    Ok(EigensystemReport {
        eigenvalue_error,
        radical_form_error,
        max_residual,
        orthonormality_error,
        overlap_deficit,
    })
}
