//! Small dense and vector helpers shared by the integrators.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub(crate) fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// `y += alpha · x`
pub(crate) fn axpy(alpha: Complex64, x: &[Complex64], y: &mut [Complex64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub(crate) fn scale(alpha: f64, x: &mut [Complex64]) {
    for v in x.iter_mut() {
        *v *= alpha;
    }
}

/// Eigendecomposition `h = V diag(λ) V†` of the Hermitian part of `h`.
pub(crate) fn hermitian_eigh(h: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let sym = (h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

/// `V diag(exp(i s λ)) V†`.
pub(crate) fn unitary_from_eigh(
    vals: &[f64],
    vecs: &DMatrix<Complex64>,
    s: f64,
) -> DMatrix<Complex64> {
    let mut scaled = vecs.clone();
    for (j, &l) in vals.iter().enumerate() {
        let phase = Complex64::from_polar(1.0, s * l);
        for v in scaled.column_mut(j).iter_mut() {
            *v *= phase;
        }
    }
    scaled * vecs.adjoint()
}

/// Exponential of an anti-Hermitian matrix via the Hermitian matrix `i·a`;
/// the result is unitary to round-off.
pub(crate) fn expm_antihermitian(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    // a = -i (i a); exp(a) = V exp(-i Λ) V†
    let h = a * Complex64::new(0.0, 1.0);
    let (vals, vecs) = hermitian_eigh(&h);
    unitary_from_eigh(&vals, &vecs, -1.0)
}

/// General matrix exponential (Padé scaling and squaring).
pub(crate) fn expm(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    a.exp()
}

pub(crate) fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|v| v.norm()).fold(0.0, f64::max)
}
