use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// (A + A†) / 2
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Largest entrywise deviation |A_ij − conj(A_ji)|.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Eigenvalues (ascending) and eigenvectors (columns) of a Hermitian matrix.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = SymmetricEigen::new(hermitian_part(m));
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(m.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub fn eigvalsh(m: &CMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = SymmetricEigen::new(hermitian_part(m))
        .eigenvalues
        .iter()
        .copied()
        .collect();
    v.sort_by(f64::total_cmp);
    v
}

/// V · diag(f(w)) · V† for the spectral decomposition of a Hermitian matrix.
pub fn hermitian_map<F: Fn(f64) -> f64>(m: &CMatrix, f: F) -> CMatrix {
    let (w, v) = eigh(m);
    let mut scaled = v.clone();
    for (j, wj) in w.iter().enumerate() {
        scaled.column_mut(j).scale_mut(f(*wj));
    }
    scaled * v.adjoint()
}

/// Eigenvalues at or below this multiple of the largest are roundoff.
const ROUNDOFF: f64 = 64.0 * f64::EPSILON;

/// √x for an eigenvalue of a PSD matrix whose largest eigenvalue is `max`.
/// Roundoff-level values would otherwise contribute √ε ≈ 1e-8.
fn psd_eigen_sqrt(x: f64, max: f64) -> f64 {
    if x <= ROUNDOFF * max {
        0.0
    } else {
        x.sqrt()
    }
}

/// Principal square root of a PSD matrix; negative eigenvalues are treated as zero.
pub fn sqrt_psd(m: &CMatrix) -> CMatrix {
    let (w, v) = eigh(m);
    let max = w.last().copied().unwrap_or(0.0).max(0.0);
    let mut scaled = v.clone();
    for (j, wj) in w.iter().enumerate() {
        scaled.column_mut(j).scale_mut(psd_eigen_sqrt(*wj, max));
    }
    scaled * v.adjoint()
}

/// tr √M for a PSD matrix M.
pub fn trace_sqrt_psd(m: &CMatrix) -> f64 {
    let w = eigvalsh(m);
    let max = w.last().copied().unwrap_or(0.0).max(0.0);
    w.iter().map(|&x| psd_eigen_sqrt(x, max)).sum()
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Orthonormalizes the columns of `m` (modified Gram-Schmidt). Columns must be
/// linearly independent.
pub fn orthonormalize_columns(m: &mut CMatrix) {
    for j in 0..m.ncols() {
        for k in 0..j {
            let proj: Complex64 = m.column(k).dotc(&m.column(j));
            let qk = m.column(k).into_owned();
            m.column_mut(j).axpy(-proj, &qk, ONE);
        }
        let norm = m.column(j).norm();
        m.column_mut(j).unscale_mut(norm);
    }
}
