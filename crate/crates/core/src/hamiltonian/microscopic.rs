//! Exact N-molecule Lambda-ensemble model and its permutation-symmetric
//! subspace, used to check the collective-boson description.
//!
//! Molecule levels are ordered `b = 0`, `a = 1`, `c = 2`; the basis is
//! qubit (slowest), cavity, then molecules `1..N`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hilbert::{self, BasisLabel, Operator, SpaceSpec};
use crate::linalg;
use crate::params::SystemParams;

use super::{rotating_frame_matrices, ModeOperators};

pub const MAX_MOLECULES: usize = 4;

const LEVEL_A: usize = 1;
const LEVEL_C: usize = 2;

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn unit(n: usize, row: usize, col: usize) -> DMatrix<C64> {
    let mut m = DMatrix::zeros(n, n);
    m[(row, col)] = re(1.0);
    m
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MicroscopicSpace {
    pub n_molecules: usize,
    pub n_cavity: usize,
}

impl MicroscopicSpace {
    pub fn new(n_molecules: usize, n_cavity: usize) -> Result<Self> {
        if n_molecules == 0 || n_molecules > MAX_MOLECULES {
            return Err(Error::SizeLimit {
                requested: n_molecules,
                max: MAX_MOLECULES,
            });
        }
        if n_cavity < 2 {
            return Err(Error::InvalidParameter(format!("n_cavity must be >= 2, got {n_cavity}")));
        }
        Ok(MicroscopicSpace { n_molecules, n_cavity })
    }

    pub fn dims(&self) -> Vec<usize> {
        let mut d = vec![2, self.n_cavity];
        d.extend(std::iter::repeat_n(3, self.n_molecules));
        d
    }

    pub fn dim(&self) -> usize {
        2 * self.n_cavity * 3usize.pow(self.n_molecules as u32)
    }

    /// `(qubit, photons, molecule levels)` of a basis index.
    pub fn label(&self, index: usize) -> (usize, usize, Vec<usize>) {
        let mut rest = index;
        let mut levels = vec![0; self.n_molecules];
        for slot in (0..self.n_molecules).rev() {
            levels[slot] = rest % 3;
            rest /= 3;
        }
        let photons = rest % self.n_cavity;
        let qubit = rest / self.n_cavity;
        (qubit, photons, levels)
    }

    pub fn excitations(&self, index: usize) -> usize {
        let (q, ph, levels) = self.label(index);
        q + ph + levels.iter().filter(|&&l| l != 0).count()
    }

    pub fn sector(&self, k: usize) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.excitations(i) == k).collect()
    }
}

/// Kronecker product with the given local operators, identity elsewhere.
fn kron_chain(dims: &[usize], factors: &[(usize, &DMatrix<C64>)]) -> DMatrix<C64> {
    let mut out = DMatrix::<C64>::identity(1, 1);
    for (slot, &d) in dims.iter().enumerate() {
        out = match factors.iter().find(|(s, _)| *s == slot) {
            Some((_, m)) => out.kronecker(*m),
            None => out.kronecker(&DMatrix::<C64>::identity(d, d)),
        };
    }
    out
}

/// Rotating-frame Hamiltonian of `n` individual Lambda molecules, each coupled
/// with `xi = zeta / sqrt(n)`.
pub fn build_microscopic(p: &SystemParams, n: usize, n_cavity: usize, rabi: f64) -> Result<Operator> {
    p.validate()?;
    p.check_frequency_matching()?;
    let space = MicroscopicSpace::new(n, n_cavity)?;
    let dims = space.dims();
    let xi = p.zeta / (n as f64).sqrt();

    let sz = hilbert::sigma_z();
    let sp = hilbert::sigma_plus();
    let a = hilbert::annihilator(n_cavity)?;
    let a_dag = a.adjoint();
    let num = &a_dag * &a;

    let mut h = kron_chain(&dims, &[(0, &sz)]) * re(0.5 * p.omega_g) + kron_chain(&dims, &[(1, &num)]) * re(p.omega);
    let qubit_cavity = kron_chain(&dims, &[(0, &sp), (1, &a)]) * re(p.g);
    h += &qubit_cavity + qubit_cavity.adjoint();

    let excited = unit(3, LEVEL_A, LEVEL_A) + unit(3, LEVEL_C, LEVEL_C);
    let raise_ab = unit(3, LEVEL_A, 0);
    let raise_ac = unit(3, LEVEL_A, LEVEL_C);
    for j in 0..n {
        let slot = 2 + j;
        h += kron_chain(&dims, &[(slot, &excited)]) * re(p.omega_a);
        let cavity_term = kron_chain(&dims, &[(1, &a), (slot, &raise_ab)]) * re(xi);
        h += &cavity_term + cavity_term.adjoint();
        let drive = kron_chain(&dims, &[(slot, &raise_ac)]) * re(rabi);
        h += &drive + drive.adjoint();
    }
    Operator::from_matrix(dims, h)
}

/// Occupation label of a permutation-symmetric microscopic state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SymmetricLabel {
    pub qubit: usize,
    pub photons: usize,
    pub n_a: usize,
    pub n_c: usize,
}

impl SymmetricLabel {
    pub fn excitations(&self) -> usize {
        self.qubit + self.photons + self.n_a + self.n_c
    }

    pub fn as_basis_label(&self) -> BasisLabel {
        BasisLabel {
            qubit: self.qubit,
            photons: self.photons,
            a: self.n_a,
            c: self.n_c,
        }
    }
}

/// Isometry from the permutation-symmetric subspace into the microscopic
/// space. Column `k` is the normalized symmetric state with occupations
/// `labels[k]`; in the single-excitation sector these are exactly
/// `A^dag|b>` and `C^dag|b>` of the collective description.
#[derive(Debug, Clone)]
pub struct CollectiveMap {
    pub space: MicroscopicSpace,
    pub isometry: DMatrix<C64>,
    pub labels: Vec<SymmetricLabel>,
}

pub fn collective_map(n: usize, n_cavity: usize) -> Result<CollectiveMap> {
    let space = MicroscopicSpace::new(n, n_cavity)?;
    let mut labels = Vec::new();
    for qubit in 0..2 {
        for photons in 0..n_cavity {
            for n_a in 0..=n {
                for n_c in 0..=(n - n_a) {
                    labels.push(SymmetricLabel { qubit, photons, n_a, n_c });
                }
            }
        }
    }
    let mut isometry = DMatrix::<C64>::zeros(space.dim(), labels.len());
    for idx in 0..space.dim() {
        let (qubit, photons, levels) = space.label(idx);
        let n_a = levels.iter().filter(|&&l| l == LEVEL_A).count();
        let n_c = levels.iter().filter(|&&l| l == LEVEL_C).count();
        let col = labels
            .iter()
            .position(|l| *l == SymmetricLabel { qubit, photons, n_a, n_c })
            .expect("every configuration has a symmetric label");
        isometry[(idx, col)] = re(1.0);
    }
    for mut col in isometry.column_iter_mut() {
        let norm = col.norm();
        col /= re(norm);
    }
    Ok(CollectiveMap { space, isometry, labels })
}

/// Microscopic versus collective spectra in the low excitation sectors.
#[derive(Debug, Clone, PartialEq)]
pub struct BosonizationReport {
    pub n_molecules: usize,
    /// `max |H V - V (V^dag H V)|`: the symmetric subspace is invariant.
    pub invariance_residual: f64,
    /// Largest distance from a collective single-excitation eigenvalue to the
    /// nearest eigenvalue of the full microscopic single-excitation sector.
    pub single_excitation_deviation: f64,
    /// Largest sorted eigenvalue difference between the symmetric
    /// double-excitation block and the bosonic one; `None` for `N < 2`.
    pub double_excitation_deviation: Option<f64>,
}

/// Compare the exact `n`-molecule model with the collective bosonic model.
/// Energies are measured in the frame rotating at `omega_a` per excitation.
pub fn bosonization_check(p: &SystemParams, n: usize, n_cavity: usize, rabi: f64) -> Result<BosonizationReport> {
    let micro = build_microscopic(p, n, n_cavity, rabi)?;
    let map = collective_map(n, n_cavity)?;
    let space = map.space;
    let h = micro.matrix();

    let hv = h * &map.isometry;
    let h_sym = map.isometry.adjoint() * &hv;
    let invariance_residual = linalg::max_abs(&(hv - &map.isometry * &h_sym));

    let spec = SpaceSpec::new(n_cavity.max(3), 3, 3)?;
    let ops = ModeOperators::new(&spec)?;
    let (h0, hi) = rotating_frame_matrices(&ops, p, rabi);
    let bosonic = h0 + hi;

    let shifted = |m: DMatrix<C64>, k: usize| -> Vec<f64> {
        let mut m = m;
        for i in 0..m.nrows() {
            m[(i, i)] -= re(p.omega_a * k as f64);
        }
        linalg::hermitian_eigenvalues(&m)
    };
    let bosonic_sector = |k: usize| {
        let idx: Vec<usize> = (0..spec.dim())
            .filter(|&i| {
                let l = spec.label(i);
                l.excitations() == k && l.photons < n_cavity
            })
            .collect();
        shifted(linalg::submatrix(&bosonic, &idx), k)
    };
    let symmetric_sector = |k: usize| {
        let idx: Vec<usize> = (0..map.labels.len()).filter(|&i| map.labels[i].excitations() == k).collect();
        shifted(linalg::submatrix(&h_sym, &idx), k)
    };

    let micro_single = shifted(linalg::submatrix(h, &space.sector(1)), 1);
    let single_excitation_deviation = bosonic_sector(1)
        .iter()
        .map(|b| micro_single.iter().map(|m| (m - b).abs()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);

    let double_excitation_deviation = if n >= 2 {
        let boson = bosonic_sector(2);
        let sym = symmetric_sector(2);
        debug_assert_eq!(boson.len(), sym.len());
        Some(boson.iter().zip(&sym).map(|(b, s)| (b - s).abs()).fold(0.0, f64::max))
    } else {
        None
    };

    Ok(BosonizationReport {
        n_molecules: n,
        invariance_residual,
        single_excitation_deviation,
        double_excitation_deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::resonant_constants;

    fn tuned(rabi: f64) -> SystemParams {
        resonant_constants(&SystemParams::experimental(), rabi).unwrap().0
    }

    #[test]
    fn size_limit_enforced() {
        let p = tuned(0.0);
        assert_eq!(
            build_microscopic(&p, 5, 2, 0.0).unwrap_err(),
            Error::SizeLimit { requested: 5, max: 4 }
        );
        assert!(build_microscopic(&p, 0, 2, 0.0).is_err());
    }

    #[test]
    fn microscopic_is_hermitian_with_expected_dimension() {
        let h = build_microscopic(&tuned(10.0), 4, 2, 10.0).unwrap();
        assert_eq!(h.dim(), 324);
        assert!(h.hermiticity_error() <= 1e-12);
    }

    #[test]
    fn collective_map_is_isometry() {
        let map = collective_map(3, 2).unwrap();
        let gram = map.isometry.adjoint() * &map.isometry;
        let id = DMatrix::<C64>::identity(gram.nrows(), gram.ncols());
        assert!(linalg::max_abs(&(gram - id)) < 1e-14);
    }

    #[test]
    fn single_molecule_matches_collective_model_exactly() {
        // N = 1: the symmetric subspace is the whole space; compare matrix
        // elements in the single-excitation sector directly.
        let p = tuned(12.0);
        let micro = build_microscopic(&p, 1, 2, 12.0).unwrap();
        let map = collective_map(1, 2).unwrap();
        let h_sym = map.isometry.adjoint() * micro.matrix() * &map.isometry;
        let spec = SpaceSpec::default();
        let (h0, hi) = super::super::build_rotating_frame(&p, &spec, 12.0).unwrap();
        let bos = h0.add(&hi).unwrap();
        for (i, li) in map.labels.iter().enumerate() {
            for (j, lj) in map.labels.iter().enumerate() {
                if li.excitations() > 1 || lj.excitations() > 1 {
                    continue;
                }
                let bi = spec.index(li.as_basis_label()).unwrap();
                let bj = spec.index(lj.as_basis_label()).unwrap();
                assert!((h_sym[(i, j)] - bos.matrix()[(bi, bj)]).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn spectra_agree_in_single_excitation_sector() {
        let p = tuned(15.0);
        for n in 1..=MAX_MOLECULES {
            let r = bosonization_check(&p, n, 3, 15.0).unwrap();
            assert!(r.invariance_residual < 1e-10, "N={n}: {}", r.invariance_residual);
            assert!(r.single_excitation_deviation < 1e-10, "N={n}: {}", r.single_excitation_deviation);
        }
    }

    #[test]
    fn double_excitation_deviation_shrinks_with_n() {
        let p = tuned(15.0);
        let devs: Vec<f64> = (2..=MAX_MOLECULES)
            .map(|n| bosonization_check(&p, n, 3, 15.0).unwrap().double_excitation_deviation.unwrap())
            .collect();
        assert!(devs.windows(2).all(|w| w[1] < w[0]), "{devs:?}");
        assert!(devs[0] > 1e-3);
        assert_eq!(bosonization_check(&p, 1, 3, 15.0).unwrap().double_excitation_deviation, None);
    }
}
