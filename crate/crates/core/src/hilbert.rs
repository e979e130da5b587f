//! Truncated composite space qubit (x) cavity (x) A-mode (x) C-mode.
//!
//! Basis order is fixed, qubit slowest:
//! `index = ((q * n_cavity + n_cav) * n_a + n_A) * n_c + n_C`
//! with `q = 0` for the qubit ground state |g> and `q = 1` for |e>.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Version tag written into serialized states.
pub const STATE_SCHEMA_VERSION: u32 = 1;

const ZERO_NORM: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    Qubit,
    Cavity,
    A,
    C,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::Qubit, Mode::Cavity, Mode::A, Mode::C];

    fn slot(self) -> usize {
        match self {
            Mode::Qubit => 0,
            Mode::Cavity => 1,
            Mode::A => 2,
            Mode::C => 3,
        }
    }
}

/// Fock cutoffs of the three bosonic factors; the qubit is always 2-level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    pub n_cavity: usize,
    pub n_a: usize,
    pub n_c: usize,
}

/// Occupations of one composite basis state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisLabel {
    pub qubit: usize,
    pub photons: usize,
    pub a: usize,
    pub c: usize,
}

impl BasisLabel {
    pub const VACUUM: BasisLabel = BasisLabel {
        qubit: 0,
        photons: 0,
        a: 0,
        c: 0,
    };

    pub fn excitations(&self) -> usize {
        self.qubit + self.photons + self.a + self.c
    }
}

impl SpaceSpec {
    pub fn new(n_cavity: usize, n_a: usize, n_c: usize) -> Result<Self> {
        let spec = SpaceSpec { n_cavity, n_a, n_c };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, n) in [("n_cavity", self.n_cavity), ("n_a", self.n_a), ("n_c", self.n_c)] {
            if n < 2 {
                return Err(Error::InvalidParameter(format!("{name} must be >= 2, got {n}")));
            }
        }
        Ok(())
    }

    pub fn dims(&self) -> [usize; 4] {
        [2, self.n_cavity, self.n_a, self.n_c]
    }

    pub fn dim(&self) -> usize {
        2 * self.n_cavity * self.n_a * self.n_c
    }

    /// Index of a basis state; `None` when an occupation exceeds its cutoff.
    pub fn index(&self, label: BasisLabel) -> Option<usize> {
        if label.qubit > 1 || label.photons >= self.n_cavity || label.a >= self.n_a || label.c >= self.n_c {
            return None;
        }
        Some(((label.qubit * self.n_cavity + label.photons) * self.n_a + label.a) * self.n_c + label.c)
    }

    pub fn label(&self, index: usize) -> BasisLabel {
        let c = index % self.n_c;
        let rest = index / self.n_c;
        let a = rest % self.n_a;
        let rest = rest / self.n_a;
        let photons = rest % self.n_cavity;
        let qubit = rest / self.n_cavity;
        BasisLabel { qubit, photons, a, c }
    }

    pub fn labels(&self) -> impl Iterator<Item = BasisLabel> + '_ {
        (0..self.dim()).map(|i| self.label(i))
    }

    /// No bosonic factor sits in its top (truncation-affected) level.
    pub fn is_physical(&self, index: usize) -> bool {
        let l = self.label(index);
        l.photons + 1 < self.n_cavity && l.a + 1 < self.n_a && l.c + 1 < self.n_c
    }

    /// Indices of the states carrying exactly `k` excitations.
    pub fn sector(&self, k: usize) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.label(i).excitations() == k).collect()
    }

    /// `true` on the composite vacuum, `false` elsewhere: the two branches of
    /// a stored qubit superposition.
    pub fn vacuum_partition(&self) -> Partition {
        Partition((0..self.dim()).map(|i| self.label(i).excitations() == 0).collect())
    }

    /// Basis state with the given occupations.
    pub fn basis_state(&self, label: BasisLabel) -> Result<StateVector> {
        let idx = self.index(label).ok_or_else(|| {
            Error::InvalidParameter(format!("basis label {label:?} outside the truncated space"))
        })?;
        let mut v = DVector::zeros(self.dim());
        v[idx] = C64::new(1.0, 0.0);
        Ok(StateVector::from_vector(self.dims().to_vec(), v))
    }

    pub fn vacuum(&self) -> StateVector {
        self.basis_state(BasisLabel::VACUUM).expect("vacuum always representable")
    }
}

impl Default for SpaceSpec {
    fn default() -> Self {
        SpaceSpec { n_cavity: 2, n_a: 2, n_c: 2 }
    }
}

/// Dense operator tagged with the dimensions of its tensor factors.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    dims: Vec<usize>,
    matrix: DMatrix<C64>,
}

impl Operator {
    pub fn from_matrix(dims: Vec<usize>, matrix: DMatrix<C64>) -> Result<Self> {
        linalg::check_square(&matrix)?;
        let dim: usize = dims.iter().product();
        if matrix.nrows() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: matrix.nrows(),
            });
        }
        Ok(Operator { dims, matrix })
    }

    pub fn zeros(dims: Vec<usize>) -> Self {
        let n = dims.iter().product();
        Operator {
            dims,
            matrix: DMatrix::zeros(n, n),
        }
    }

    pub fn identity(dims: Vec<usize>) -> Self {
        let n = dims.iter().product();
        Operator {
            dims,
            matrix: DMatrix::identity(n, n),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    fn check(&self, other: &Operator) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    pub fn adjoint(&self) -> Operator {
        Operator {
            dims: self.dims.clone(),
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn add(&self, other: &Operator) -> Result<Operator> {
        self.check(other)?;
        Ok(Operator {
            dims: self.dims.clone(),
            matrix: &self.matrix + &other.matrix,
        })
    }

    pub fn sub(&self, other: &Operator) -> Result<Operator> {
        self.check(other)?;
        Ok(Operator {
            dims: self.dims.clone(),
            matrix: &self.matrix - &other.matrix,
        })
    }

    /// Operator product `self * other`.
    pub fn compose(&self, other: &Operator) -> Result<Operator> {
        self.check(other)?;
        Ok(Operator {
            dims: self.dims.clone(),
            matrix: &self.matrix * &other.matrix,
        })
    }

    pub fn commutator(&self, other: &Operator) -> Result<Operator> {
        self.check(other)?;
        Ok(Operator {
            dims: self.dims.clone(),
            matrix: linalg::commutator(&self.matrix, &other.matrix),
        })
    }

    pub fn scale(&self, factor: C64) -> Operator {
        Operator {
            dims: self.dims.clone(),
            matrix: &self.matrix * factor,
        }
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        if self.dims != state.dims {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: state.dim(),
            });
        }
        Ok(StateVector {
            dims: self.dims.clone(),
            data: &self.matrix * &state.data,
        })
    }

    /// `max |M - M^dagger|`
    pub fn hermiticity_error(&self) -> f64 {
        linalg::hermiticity_error(&self.matrix)
    }

    /// `max |M + M^dagger|`
    pub fn antihermiticity_error(&self) -> f64 {
        linalg::max_abs(&(&self.matrix + self.matrix.adjoint()))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.norm()
    }
}

/// Dense pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    dims: Vec<usize>,
    data: DVector<C64>,
}

impl StateVector {
    pub fn from_vector(dims: Vec<usize>, data: DVector<C64>) -> Self {
        debug_assert_eq!(dims.iter().product::<usize>(), data.len());
        StateVector { dims, data }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn data(&self) -> &DVector<C64> {
        &self.data
    }

    pub fn into_vector(self) -> DVector<C64> {
        self.data
    }

    pub fn norm(&self) -> f64 {
        self.data.norm()
    }

    pub fn normalized(&self) -> Result<StateVector> {
        let n = self.norm();
        if n < ZERO_NORM {
            return Err(Error::ZeroNorm);
        }
        Ok(StateVector {
            dims: self.dims.clone(),
            data: &self.data / C64::new(n, 0.0),
        })
    }

    /// `<self|other>`
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self.data.dotc(&other.data))
    }

    /// Sum of amplitudes squared on the given indices.
    pub fn population(&self, indices: &[usize]) -> f64 {
        indices.iter().map(|&i| self.data[i].norm_sqr()).sum()
    }

    /// Zero every amplitude outside `keep`.
    pub fn project(&self, keep: impl Fn(usize) -> bool) -> StateVector {
        let data = DVector::from_iterator(
            self.dim(),
            self.data.iter().enumerate().map(|(i, &z)| if keep(i) { z } else { C64::new(0.0, 0.0) }),
        );
        StateVector {
            dims: self.dims.clone(),
            data,
        }
    }

    pub fn scale(&self, factor: C64) -> StateVector {
        StateVector {
            dims: self.dims.clone(),
            data: &self.data * factor,
        }
    }

    pub fn add(&self, other: &StateVector) -> Result<StateVector> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(StateVector {
            dims: self.dims.clone(),
            data: &self.data + &other.data,
        })
    }

    pub fn to_serialized(&self, spec: &SpaceSpec) -> Result<SerializedState> {
        if self.dims != spec.dims() {
            return Err(Error::DimensionMismatch {
                expected: spec.dim(),
                found: self.dim(),
            });
        }
        Ok(SerializedState {
            schema_version: STATE_SCHEMA_VERSION,
            space: *spec,
            amplitudes: self.data.iter().map(|z| [z.re, z.im]).collect(),
        })
    }
}

/// JSON form of a composite state: header plus `(re, im)` pairs in basis order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SerializedState {
    pub schema_version: u32,
    pub space: SpaceSpec,
    pub amplitudes: Vec<[f64; 2]>,
}

impl SerializedState {
    pub fn to_state(&self) -> Result<StateVector> {
        self.space.validate()?;
        if self.amplitudes.len() != self.space.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.space.dim(),
                found: self.amplitudes.len(),
            });
        }
        let data = DVector::from_iterator(self.amplitudes.len(), self.amplitudes.iter().map(|&[re, im]| C64::new(re, im)));
        Ok(StateVector::from_vector(self.space.dims().to_vec(), data))
    }
}

/// Two-way split of the basis used to optimize one relative phase.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition(pub Vec<bool>);

impl Partition {
    pub fn from_fn(dim: usize, f: impl Fn(usize) -> bool) -> Self {
        Partition((0..dim).map(f).collect())
    }
}

/// Lowering operator on `cutoff` Fock levels.
pub fn annihilator(cutoff: usize) -> Result<DMatrix<C64>> {
    if cutoff < 2 {
        return Err(Error::InvalidParameter(format!("cutoff must be >= 2, got {cutoff}")));
    }
    let mut m = DMatrix::zeros(cutoff, cutoff);
    for n in 1..cutoff {
        m[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    Ok(m)
}

pub fn creator(cutoff: usize) -> Result<DMatrix<C64>> {
    Ok(annihilator(cutoff)?.adjoint())
}

/// `|e><g|` in the (g, e) ordering.
pub fn sigma_plus() -> DMatrix<C64> {
    let mut m = DMatrix::zeros(2, 2);
    m[(1, 0)] = C64::new(1.0, 0.0);
    m
}

pub fn sigma_minus() -> DMatrix<C64> {
    sigma_plus().adjoint()
}

/// `|e><e| - |g><g|`
pub fn sigma_z() -> DMatrix<C64> {
    DMatrix::from_diagonal(&DVector::from_vec(vec![C64::new(-1.0, 0.0), C64::new(1.0, 0.0)]))
}

/// Tensor-embed `local` on factor `mode`, identity elsewhere.
pub fn embed(mode: Mode, local: &DMatrix<C64>, spec: &SpaceSpec) -> Result<Operator> {
    let dims = spec.dims();
    Operator::from_matrix(dims.to_vec(), embed_matrix(&dims, mode.slot(), local)?)
}

/// Kronecker embedding of `local` at position `slot` of a product space.
pub fn embed_matrix(dims: &[usize], slot: usize, local: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    if local.nrows() != dims[slot] || local.ncols() != dims[slot] {
        return Err(Error::DimensionMismatch {
            expected: dims[slot],
            found: local.nrows(),
        });
    }
    let before: usize = dims[..slot].iter().product();
    let after: usize = dims[slot + 1..].iter().product();
    let left = DMatrix::<C64>::identity(before, before).kronecker(local);
    Ok(left.kronecker(&DMatrix::<C64>::identity(after, after)))
}

pub fn expectation(state: &StateVector, op: &Operator) -> Result<C64> {
    let applied = op.apply(state)?;
    state.inner(&applied)
}

/// Real part of `<psi|M|psi>` for a raw Hermitian matrix of matching size.
pub fn expectation_matrix(state: &StateVector, m: &DMatrix<C64>) -> f64 {
    (state.data().adjoint() * (m * state.data()))[(0, 0)].re
}

/// `|<s1|s2>|^2`. Inputs are expected normalized; a projected (sub-normalized)
/// state yields the correspondingly reduced overlap.
pub fn fidelity(s1: &StateVector, s2: &StateVector) -> Result<f64> {
    if s1.norm() < ZERO_NORM || s2.norm() < ZERO_NORM {
        return Err(Error::ZeroNorm);
    }
    Ok(s1.inner(s2)?.norm_sqr().min(1.0))
}

/// `max_phi |<s1| (P + e^{i phi} (1 - P)) |s2>|^2 = (|<s1|P s2>| + |<s1|(1-P) s2>|)^2`
pub fn phase_optimized_fidelity(s1: &StateVector, s2: &StateVector, partition: &Partition) -> Result<f64> {
    if s1.norm() < ZERO_NORM || s2.norm() < ZERO_NORM {
        return Err(Error::ZeroNorm);
    }
    if s1.dims != s2.dims {
        return Err(Error::DimensionMismatch {
            expected: s1.dim(),
            found: s2.dim(),
        });
    }
    if partition.0.len() != s1.dim() {
        return Err(Error::DimensionMismatch {
            expected: s1.dim(),
            found: partition.0.len(),
        });
    }
    let (mut inside, mut outside) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
    for (i, &flag) in partition.0.iter().enumerate() {
        let term = s1.data[i].conj() * s2.data[i];
        if flag {
            inside += term;
        } else {
            outside += term;
        }
    }
    Ok((inside.norm() + outside.norm()).powi(2).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn annihilator_entries() {
        let a2 = annihilator(2).unwrap();
        assert_eq!(a2, DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)]));
        let a3 = annihilator(3).unwrap();
        assert_eq!(a3[(1, 2)], c(2f64.sqrt()));
        let n = a3.adjoint() * &a3;
        for k in 0..3 {
            assert!((n[(k, k)].re - k as f64).abs() < 1e-15);
        }
        assert!(annihilator(1).is_err());
    }

    #[test]
    fn sigma_z_squares_to_identity() {
        let spec = SpaceSpec::default();
        let sz = embed(Mode::Qubit, &sigma_z(), &spec).unwrap();
        let sq = sz.compose(&sz).unwrap();
        assert_eq!(sq, Operator::identity(spec.dims().to_vec()));
    }

    #[test]
    fn boson_commutator_deviates_only_on_top_level() {
        let spec = SpaceSpec::new(2, 3, 2).unwrap();
        let a = embed(Mode::A, &annihilator(3).unwrap(), &spec).unwrap();
        let comm = a.commutator(&a.adjoint()).unwrap();
        for i in 0..spec.dim() {
            for j in 0..spec.dim() {
                let expected = if i == j {
                    if spec.label(i).a == 2 {
                        -2.0
                    } else {
                        1.0
                    }
                } else {
                    0.0
                };
                assert!((comm.matrix()[(i, j)] - c(expected)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn different_modes_commute_exactly() {
        let spec = SpaceSpec::new(3, 3, 3).unwrap();
        let ops: Vec<Operator> = Mode::ALL
            .iter()
            .map(|&m| {
                let local = if m == Mode::Qubit {
                    sigma_minus()
                } else {
                    annihilator(spec.dims()[m.slot()]).unwrap()
                };
                embed(m, &local, &spec).unwrap()
            })
            .collect();
        for (i, x) in ops.iter().enumerate() {
            for (j, y) in ops.iter().enumerate() {
                if i == j {
                    continue;
                }
                for yy in [y.clone(), y.adjoint()] {
                    let comm = x.commutator(&yy).unwrap();
                    assert_eq!(linalg::max_abs(comm.matrix()), 0.0);
                }
            }
        }
    }

    #[test]
    fn embed_rejects_wrong_local_dimension() {
        let spec = SpaceSpec::default();
        let err = embed(Mode::Cavity, &annihilator(3).unwrap(), &spec).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { expected: 2, found: 3 });
    }

    #[test]
    fn basis_ordering_round_trips() {
        let spec = SpaceSpec::new(3, 2, 4).unwrap();
        for i in 0..spec.dim() {
            assert_eq!(spec.index(spec.label(i)), Some(i));
        }
        let l = BasisLabel { qubit: 1, photons: 2, a: 1, c: 3 };
        assert_eq!(spec.index(l), Some(((3 + 2) * 2 + 1) * 4 + 3));
        assert!(SpaceSpec::new(1, 2, 2).is_err());
    }

    #[test]
    fn fidelity_examples() {
        let spec = SpaceSpec::default();
        let vac = spec.vacuum();
        let c1 = spec.basis_state(BasisLabel { c: 1, ..BasisLabel::VACUUM }).unwrap();
        assert!((fidelity(&vac, &vac).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(fidelity(&vac, &c1).unwrap(), 0.0);

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus = vac.scale(c(h)).add(&c1.scale(c(h))).unwrap();
        let minus = vac.scale(c(h)).add(&c1.scale(c(-h))).unwrap();
        assert!(fidelity(&plus, &minus).unwrap() < 1e-15);
        let f = phase_optimized_fidelity(&plus, &minus, &spec.vacuum_partition()).unwrap();
        assert!((f - 1.0).abs() < 1e-12);

        let zero = vac.scale(c(0.0));
        assert_eq!(fidelity(&zero, &vac), Err(Error::ZeroNorm));
    }

    #[test]
    fn serialization_round_trip() {
        let spec = SpaceSpec::new(2, 3, 2).unwrap();
        let s = spec
            .basis_state(BasisLabel { qubit: 1, ..BasisLabel::VACUUM })
            .unwrap()
            .scale(C64::new(0.6, 0.8));
        let json = serde_json::to_string(&s.to_serialized(&spec).unwrap()).unwrap();
        let back: SerializedState = serde_json::from_str(&json).unwrap();
        assert_eq!(back.to_state().unwrap(), s);
        assert!(json.contains("\"schema_version\":1"));
    }

    #[test]
    fn serialized_state_rejects_wrong_length() {
        let spec = SpaceSpec::default();
        let bad = SerializedState {
            schema_version: 1,
            space: spec,
            amplitudes: vec![[1.0, 0.0]; 3],
        };
        assert!(matches!(bad.to_state(), Err(Error::DimensionMismatch { .. })));
    }
}
