//! Hamiltonian builders on the composite space.
//!
//! `build_rotating_frame` returns the split `H0 + HI` in the frame co-rotating
//! with the control field; `build_generator` returns the Frohlich generator
//! `S` that removes `HI` to first order. `build_effective` is the resulting
//! three-mode interaction Hamiltonian in the two-photon resonant frame.

mod microscopic;

pub use microscopic::{
    bosonization_check, build_microscopic, collective_map, BosonizationReport, CollectiveMap, MicroscopicSpace,
    SymmetricLabel, MAX_MOLECULES,
};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hilbert::{self, BasisLabel, Mode, Operator, SpaceSpec, StateVector};
use crate::linalg;
use crate::params::{self, EffectiveParams, FrohlichCoefficients, SystemParams};

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Embedded ladder operators of every factor.
#[derive(Debug, Clone)]
pub struct ModeOperators {
    pub spec: SpaceSpec,
    pub sigma_z: DMatrix<C64>,
    pub sigma_plus: DMatrix<C64>,
    pub sigma_minus: DMatrix<C64>,
    pub a: DMatrix<C64>,
    pub a_dag: DMatrix<C64>,
    pub big_a: DMatrix<C64>,
    pub big_a_dag: DMatrix<C64>,
    pub big_c: DMatrix<C64>,
    pub big_c_dag: DMatrix<C64>,
}

impl ModeOperators {
    pub fn new(spec: &SpaceSpec) -> Result<Self> {
        spec.validate()?;
        let e = |mode, local: DMatrix<C64>| hilbert::embed(mode, &local, spec).map(Operator::into_matrix);
        let sigma_plus = e(Mode::Qubit, hilbert::sigma_plus())?;
        let a = e(Mode::Cavity, hilbert::annihilator(spec.n_cavity)?)?;
        let big_a = e(Mode::A, hilbert::annihilator(spec.n_a)?)?;
        let big_c = e(Mode::C, hilbert::annihilator(spec.n_c)?)?;
        Ok(ModeOperators {
            spec: *spec,
            sigma_z: e(Mode::Qubit, hilbert::sigma_z())?,
            sigma_minus: sigma_plus.adjoint(),
            sigma_plus,
            a_dag: a.adjoint(),
            a,
            big_a_dag: big_a.adjoint(),
            big_a,
            big_c_dag: big_c.adjoint(),
            big_c,
        })
    }

    pub fn qubit_excitation(&self) -> DMatrix<C64> {
        &self.sigma_plus * &self.sigma_minus
    }

    pub fn photon_number(&self) -> DMatrix<C64> {
        &self.a_dag * &self.a
    }

    pub fn a_number(&self) -> DMatrix<C64> {
        &self.big_a_dag * &self.big_a
    }

    pub fn c_number(&self) -> DMatrix<C64> {
        &self.big_c_dag * &self.big_c
    }

    /// Total excitation number, conserved by every rotating-frame builder.
    pub fn excitation_number(&self) -> DMatrix<C64> {
        self.qubit_excitation() + self.photon_number() + self.a_number() + self.c_number()
    }

    fn wrap(&self, m: DMatrix<C64>) -> Operator {
        Operator::from_matrix(self.spec.dims().to_vec(), m).expect("dimensions fixed by spec")
    }
}

pub fn excitation_number(spec: &SpaceSpec) -> Result<Operator> {
    let ops = ModeOperators::new(spec)?;
    Ok(ops.wrap(ops.excitation_number()))
}

/// Jaynes-Cummings qubit-cavity Hamiltonian, identity on the ensemble modes.
pub fn build_circuit_qed(p: &SystemParams, spec: &SpaceSpec) -> Result<Operator> {
    p.validate()?;
    let o = ModeOperators::new(spec)?;
    let h = &o.sigma_z * re(0.5 * p.omega_g)
        + o.photon_number() * re(p.omega)
        + (&o.a * &o.sigma_plus + &o.a_dag * &o.sigma_minus) * re(p.g);
    Ok(o.wrap(h))
}

/// Laboratory-frame collective Hamiltonian at time `t` (us), including the
/// `exp(-i omega_f t)` phase of the control field.
pub fn build_collective(p: &SystemParams, spec: &SpaceSpec, rabi: f64, t: f64) -> Result<Operator> {
    p.validate()?;
    let o = ModeOperators::new(spec)?;
    let free = &o.sigma_z * re(0.5 * p.omega_g)
        + o.photon_number() * re(p.omega)
        + o.a_number() * re(p.omega_a)
        + o.c_number() * re(p.omega_c);
    let phase = C64::from_polar(rabi, -p.omega_f * t);
    let drive = &o.big_a_dag * &o.big_c * phase;
    let interaction = (&o.a * &o.sigma_plus + &o.a_dag * &o.sigma_minus) * re(p.g)
        + (&o.a * &o.big_a_dag + &o.a_dag * &o.big_a) * re(p.zeta)
        + drive.adjoint()
        + drive;
    Ok(o.wrap(free + interaction))
}

/// Time-independent `(H0, HI)` in the frame `U = exp(i omega_f t C^dag C)`.
pub fn build_rotating_frame(p: &SystemParams, spec: &SpaceSpec, rabi: f64) -> Result<(Operator, Operator)> {
    p.validate()?;
    p.check_frequency_matching()?;
    let o = ModeOperators::new(spec)?;
    let (h0, hi) = rotating_frame_matrices(&o, p, rabi);
    Ok((o.wrap(h0), o.wrap(hi)))
}

pub(crate) fn rotating_frame_matrices(o: &ModeOperators, p: &SystemParams, rabi: f64) -> (DMatrix<C64>, DMatrix<C64>) {
    let h0 = &o.sigma_z * re(0.5 * p.omega_g)
        + o.photon_number() * re(p.omega)
        + (o.a_number() + o.c_number()) * re(p.omega_a)
        + (&o.big_a_dag * &o.big_c + &o.big_c_dag * &o.big_a) * re(rabi);
    let hi = (&o.a * &o.sigma_plus + &o.a_dag * &o.sigma_minus) * re(p.g)
        + (&o.a * &o.big_a_dag + &o.a_dag * &o.big_a) * re(p.zeta);
    (h0, hi)
}

/// Frohlich generator `S = eta1 a sigma+ + eta2 a A^dag + eta3 a C^dag - h.c.`
pub fn build_generator(p: &SystemParams, spec: &SpaceSpec, rabi: f64) -> Result<Operator> {
    let eta = params::frohlich_coefficients(p, rabi)?;
    build_generator_from(&eta, spec)
}

/// Generator for explicitly supplied coefficients.
pub fn build_generator_from(eta: &FrohlichCoefficients, spec: &SpaceSpec) -> Result<Operator> {
    let o = ModeOperators::new(spec)?;
    let forward = &o.a * &o.sigma_plus * re(eta.eta1)
        + &o.a * &o.big_a_dag * re(eta.eta2)
        + &o.a * &o.big_c_dag * re(eta.eta3);
    let s = &forward - forward.adjoint();
    Ok(o.wrap(s))
}

/// `||HI + [H0, S]||_F / ||HI||_F` on the block where no bosonic factor sits
/// in its top Fock level. A vanishing `HI` gives 0.
pub fn commutator_residual(h0: &Operator, hi: &Operator, s: &Operator, spec: &SpaceSpec) -> Result<f64> {
    let comm = h0.commutator(s)?;
    let residual = hi.add(&comm)?;
    if residual.dims() != spec.dims() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            found: residual.dim(),
        });
    }
    let physical: Vec<usize> = (0..spec.dim()).filter(|&i| spec.is_physical(i)).collect();
    let r = linalg::submatrix(residual.matrix(), &physical).norm();
    let h = linalg::submatrix(hi.matrix(), &physical).norm();
    if h == 0.0 {
        return Ok(if r == 0.0 { 0.0 } else { f64::INFINITY });
    }
    Ok(r / h)
}

/// `H0 + [HI, S] / 2`, the second-order Frohlich Hamiltonian.
pub fn second_order_hamiltonian(h0: &Operator, hi: &Operator, s: &Operator) -> Result<Operator> {
    h0.add(&hi.commutator(s)?.scale(re(0.5)))
}

/// Effective interaction Hamiltonian
/// `Delta B^dag B + g_m (sigma- B^dag + h.c.) + Omega_d (B^dag D + h.c.)`
/// with `B = alpha A + beta C`, `D = beta A - alpha C`; the cavity factor is
/// a spectator.
pub fn build_effective(p: &SystemParams, spec: &SpaceSpec, rabi: f64) -> Result<Operator> {
    let eff = params::effective_constants(p, rabi)?;
    effective_operator(&eff, spec)
}

pub fn effective_operator(eff: &EffectiveParams, spec: &SpaceSpec) -> Result<Operator> {
    let o = ModeOperators::new(spec)?;
    Ok(o.wrap(effective_matrix(&o, eff)))
}

pub(crate) fn effective_matrix(o: &ModeOperators, eff: &EffectiveParams) -> DMatrix<C64> {
    let b = &o.big_a * re(eff.alpha) + &o.big_c * re(eff.beta);
    let d = &o.big_a * re(eff.beta) - &o.big_c * re(eff.alpha);
    let b_dag = b.adjoint();
    let coupling = &o.sigma_minus * &b_dag * re(eff.g_m);
    let drive = &b_dag * &d * re(eff.drive);
    &b_dag * &b * re(eff.detuning) + coupling.adjoint() + coupling + drive.adjoint() + drive
}

/// Single-excitation vectors `sigma+|0>`, `B^dag|0>`, `D^dag|0>` (zero photons).
pub fn single_excitation_basis(eff: &EffectiveParams, spec: &SpaceSpec) -> Result<[StateVector; 3]> {
    let e = spec.basis_state(BasisLabel { qubit: 1, ..BasisLabel::VACUUM })?;
    let a = spec.basis_state(BasisLabel { a: 1, ..BasisLabel::VACUUM })?;
    let c = spec.basis_state(BasisLabel { c: 1, ..BasisLabel::VACUUM })?;
    let b_vec = a.scale(re(eff.alpha)).add(&c.scale(re(eff.beta)))?;
    let d_vec = a.scale(re(eff.beta)).add(&c.scale(re(-eff.alpha)))?;
    Ok([e, b_vec, d_vec])
}

/// Matrix of `op` in the given orthonormal vectors.
pub fn block(op: &Operator, basis: &[StateVector]) -> Result<DMatrix<C64>> {
    let n = basis.len();
    let mut m = DMatrix::zeros(n, n);
    for (j, v) in basis.iter().enumerate() {
        let hv = op.apply(v)?;
        for (i, u) in basis.iter().enumerate() {
            m[(i, j)] = u.inner(&hv)?;
        }
    }
    Ok(m)
}

/// Outcome of comparing the projected second-order Hamiltonian with the
/// effective three-mode block.
#[derive(Debug, Clone, PartialEq)]
pub struct FrohlichConsistency {
    /// `<.|H0 + [HI,S]/2|.>` on (e, B, D), minus the vacuum energy.
    pub second_order_block: DMatrix<C64>,
    pub effective_block: DMatrix<C64>,
    /// Subtracted interaction-picture zero point (`omega_d`).
    pub zero_point: f64,
    /// `max |difference| / max |effective block|`
    pub relative_deviation: f64,
}

/// Project `H0 + [HI,S]/2` onto the zero-photon single-excitation subspace
/// and compare it with `build_effective`.
pub fn frohlich_consistency(p: &SystemParams, spec: &SpaceSpec, rabi: f64) -> Result<FrohlichConsistency> {
    let (h0, hi) = build_rotating_frame(p, spec, rabi)?;
    let s = build_generator(p, spec, rabi)?;
    let h2 = second_order_hamiltonian(&h0, &hi, &s)?;
    let eff = params::effective_constants(p, rabi)?;
    let basis = single_excitation_basis(&eff, spec)?;
    let vacuum = spec.vacuum();
    let e0 = hilbert::expectation(&vacuum, &h2)?.re;

    let mut second = block(&h2, &basis)?;
    for k in 0..3 {
        second[(k, k)] -= re(e0 + eff.omega_d);
    }
    let effective = block(&effective_operator(&eff, spec)?, &basis)?;
    let scale = linalg::max_abs(&effective).max(f64::MIN_POSITIVE);
    let relative_deviation = linalg::max_abs(&(&second - &effective)) / scale;
    Ok(FrohlichConsistency {
        second_order_block: second,
        effective_block: effective,
        zero_point: eff.omega_d,
        relative_deviation,
    })
}
