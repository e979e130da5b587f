//! Small dense helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen(m: &DMatrix<C64>) -> (DVector<f64>, DMatrix<C64>) {
    let eig = nalgebra::linalg::SymmetricEigen::new(m.clone());
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let mut v: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// `exp(S)` for anti-Hermitian `S`, computed through the Hermitian matrix `iS`.
pub fn expm_antihermitian(s: &DMatrix<C64>) -> DMatrix<C64> {
    let h = s * C64::i();
    let (vals, vecs) = hermitian_eigen(&h);
    // S = -i H  =>  exp(S) = V exp(-i lambda) V^dagger
    let phases = DMatrix::from_diagonal(&vals.map(|l| C64::from_polar(1.0, -l)));
    &vecs * phases * vecs.adjoint()
}

pub fn commutator(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a * b - b * a
}

/// max |M_ij - conj(M_ji)|
pub fn hermiticity_error(m: &DMatrix<C64>) -> f64 {
    (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Restrict `m` to the rows and columns listed in `idx`.
pub fn submatrix(m: &DMatrix<C64>, idx: &[usize]) -> DMatrix<C64> {
    DMatrix::from_fn(idx.len(), idx.len(), |i, j| m[(idx[i], idx[j])])
}

pub(crate) fn check_square(m: &DMatrix<C64>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_sorted_and_reconstructs() {
        let m = DMatrix::from_row_slice(
            3,
            3,
            &[
                C64::new(4.0, 0.0),
                C64::new(1.0, 1.0),
                C64::new(0.0, 0.0),
                C64::new(1.0, -1.0),
                C64::new(3.0, 0.0),
                C64::new(0.5, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.5, 0.0),
                C64::new(2.0, 0.0),
            ],
        );
        let (vals, vecs) = hermitian_eigen(&m);
        assert!(vals[0] <= vals[1] && vals[1] <= vals[2]);
        let rebuilt = &vecs * DMatrix::from_diagonal(&vals.map(|x| C64::new(x, 0.0))) * vecs.adjoint();
        assert!(max_abs(&(rebuilt - &m)) < 1e-12);
    }

    #[test]
    fn exponential_of_antihermitian_is_unitary() {
        let mut s = DMatrix::<C64>::zeros(3, 3);
        s[(0, 1)] = C64::new(0.3, 0.1);
        s[(1, 0)] = -s[(0, 1)].conj();
        s[(2, 1)] = C64::new(-0.2, 0.0);
        s[(1, 2)] = -s[(2, 1)].conj();
        let u = expm_antihermitian(&s);
        let id = DMatrix::<C64>::identity(3, 3);
        assert!(max_abs(&(u.adjoint() * &u - id)) < 1e-13);
        // compare against a truncated Taylor series
        let mut taylor = DMatrix::<C64>::identity(3, 3);
        let mut term = DMatrix::<C64>::identity(3, 3);
        for k in 1..30 {
            term = &term * &s / C64::new(k as f64, 0.0);
            taylor += &term;
        }
        assert!(max_abs(&(u - taylor)) < 1e-13);
    }
}
