//! Samplers for random states, used by the property suites and the oracles.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Exp1, StandardNormal};

use super::linalg::{orthonormalize_columns, trace, CMatrix, CVector};
use super::{DensityOperator, PureState};

/// Standard complex Gaussian, E|z|² = 1.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Haar-distributed pure state (normalized complex Gaussian vector).
pub fn random_pure<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> PureState {
    loop {
        let v = CVector::from_fn(dim, |_, _| complex_gaussian(rng));
        if let Ok(s) = PureState::normalized(v.iter().copied().collect()) {
            return s;
        }
    }
}

/// Full-rank random density operator `G G† / tr(G G†)`.
pub fn random_density<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DensityOperator {
    let g = gaussian_matrix(dim, dim, rng);
    let m = &g * g.adjoint();
    let tr = trace(&m).re;
    DensityOperator::from_trusted(super::linalg::hermitian_part(&m.unscale(tr)))
}

/// `rows × cols` matrix with orthonormal columns (`rows ≥ cols`).
pub fn random_isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    assert!(rows >= cols);
    let mut g = gaussian_matrix(rows, cols, rng);
    orthonormalize_columns(&mut g);
    g
}

/// Uniform point on the probability simplex with `n` vertices.
pub fn random_simplex_point<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let e: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = e.iter().sum();
    e.into_iter().map(|x| x / total).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeded_rng;

    #[test]
    fn samplers_respect_invariants() {
        let mut rng = seeded_rng(11);
        for dim in [2, 4] {
            let rho = random_density(dim, &mut rng);
            assert!(DensityOperator::new(rho.matrix().clone()).is_ok());
            assert!((random_pure(dim, &mut rng).amplitudes().norm() - 1.0).abs() < 1e-12);
        }
        let v = random_isometry(4, 2, &mut rng);
        let gram = v.adjoint() * &v;
        assert!((gram - CMatrix::identity(2, 2)).norm() < 1e-12);
        let p = random_simplex_point(5, &mut rng);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
