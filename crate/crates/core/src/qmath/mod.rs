//! Dense small-dimension quantum linear algebra: pure states, density
//! operators, trace distance, fidelity and the Helstrom guessing bound.
//!
//! Fidelity is the non-squared form `tr √(√ρ σ √ρ)`; squared uses are
//! written out as `F²` by callers.

pub mod linalg;
pub mod random;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
pub use linalg::{CMatrix, CVector};
use linalg::{eigh, eigvalsh, hermitian_deviation, kron, sqrt_psd, trace, trace_sqrt_psd, ZERO};

const NORM_TOL: f64 = 1e-12;
const HERMITIAN_TOL: f64 = 1e-12;
const NEG_EIGEN_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-10;
const ORTHO_TOL: f64 = 1e-10;

/// A normalized state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: CVector,
}

impl PureState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let amplitudes = CVector::from_vec(amplitudes);
        let norm = amplitudes.norm();
        if amplitudes.is_empty() || (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { amplitudes })
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(amplitudes.iter().map(|&a| Complex64::new(a, 0.0)).collect())
    }

    /// Rescales an arbitrary nonzero vector to unit norm.
    pub fn normalized(amplitudes: Vec<Complex64>) -> Result<Self> {
        let v = CVector::from_vec(amplitudes);
        let norm = v.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self {
            amplitudes: v.unscale(norm),
        })
    }

    /// Computational basis vector `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut amplitudes = CVector::zeros(dim);
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    /// ⟨self|other⟩
    pub fn inner(&self, other: &PureState) -> Complex64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn tensor(&self, other: &PureState) -> PureState {
        let a = &self.amplitudes;
        let b = &other.amplitudes;
        let amplitudes = CVector::from_fn(a.len() * b.len(), |i, _| a[i / b.len()] * b[i % b.len()]);
        PureState { amplitudes }
    }

    /// |ψ⟩⟨ψ|
    pub fn projector(&self) -> DensityOperator {
        DensityOperator {
            matrix: &self.amplitudes * self.amplitudes.adjoint(),
        }
    }
}

/// Hermitian, positive semidefinite, unit-trace operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: CMatrix,
}

impl DensityOperator {
    /// Validates and normalizes a candidate density matrix.
    ///
    /// Eigenvalues in `[-1e-10, 0)` are clamped to zero and the spectrum is
    /// renormalized; anything more negative is rejected.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        let deviation = hermitian_deviation(&matrix);
        if !(deviation <= HERMITIAN_TOL) {
            return Err(Error::NotHermitian { deviation });
        }
        let tr = trace(&matrix).re;
        if !((tr - 1.0).abs() <= TRACE_TOL) {
            return Err(Error::TraceNotUnit { trace: tr });
        }
        let (values, vectors) = eigh(&matrix);
        let min = values[0];
        if min < -NEG_EIGEN_TOL {
            return Err(Error::NotPositive { eigenvalue: min });
        }
        if min < 0.0 {
            let clamped: Vec<f64> = values.iter().map(|v| v.max(0.0)).collect();
            let total: f64 = clamped.iter().sum();
            let mut scaled = vectors.clone();
            for (j, w) in clamped.iter().enumerate() {
                scaled.column_mut(j).scale_mut(w / total);
            }
            return Ok(Self {
                matrix: linalg::hermitian_part(&(scaled * vectors.adjoint())),
            });
        }
        Ok(Self {
            matrix: linalg::hermitian_part(&matrix),
        })
    }

    /// Skips validation; callers guarantee the invariants (products, partial
    /// traces and convex combinations of valid operators).
    pub(crate) fn from_trusted(matrix: CMatrix) -> Self {
        Self { matrix }
    }

    pub fn from_diagonal(weights: &[f64]) -> Result<Self> {
        let dist = ProbDist::new(weights.to_vec())?;
        let n = dist.len();
        Ok(Self {
            matrix: CMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    Complex64::new(dist.weights()[i], 0.0)
                } else {
                    ZERO
                }
            }),
        })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: CMatrix::identity(dim, dim).unscale(dim as f64),
        }
    }

    /// Convex combination Σ p_i ρ_i. Weights must form a distribution.
    pub fn mixture(parts: &[(f64, &DensityOperator)]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidDistribution("empty mixture".into()))?;
        ProbDist::new(parts.iter().map(|(p, _)| *p).collect())?;
        let dim = first.1.dim();
        let mut m = CMatrix::zeros(dim, dim);
        for (p, rho) in parts {
            check_dims(dim, rho.dim())?;
            m += rho.matrix.scale(*p);
        }
        Ok(Self { matrix: m })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        eigvalsh(&self.matrix)
    }

    /// ⟨φ|ρ|φ⟩
    pub fn expectation(&self, phi: &PureState) -> Result<f64> {
        check_dims(self.dim(), phi.dim())?;
        let v = phi.amplitudes();
        Ok(v.dotc(&(&self.matrix * v)).re)
    }

    /// Conjugation U ρ U† by a unitary (not checked).
    pub fn conjugate_by(&self, unitary: &CMatrix) -> Result<Self> {
        check_dims(self.dim(), unitary.nrows())?;
        Ok(Self {
            matrix: unitary * &self.matrix * unitary.adjoint(),
        })
    }

    /// Diagonal entries are the only nonzero entries (within `tol`).
    pub fn is_diagonal(&self, tol: f64) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| i == j || self.matrix[(i, j)].norm() <= tol))
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &DensityOperator) -> f64 {
        (&self.matrix - &other.matrix)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// A finite probability distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbDist {
    weights: Vec<f64>,
}

impl ProbDist {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidDistribution("no outcomes".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidDistribution(format!("weight {w} is not a nonnegative number")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidDistribution(format!("weights sum to {total}")));
        }
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Which factor of a bipartite space `X ⊗ Y` to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    X,
    Y,
}

fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Kronecker product `a ⊗ b`.
pub fn tensor(a: &DensityOperator, b: &DensityOperator) -> DensityOperator {
    DensityOperator::from_trusted(kron(&a.matrix, &b.matrix))
}

/// Reduced state on `keep` of an operator on `X ⊗ Y` with `dims = (dim X, dim Y)`.
pub fn partial_trace(rho: &DensityOperator, keep: Subsystem, dims: (usize, usize)) -> Result<DensityOperator> {
    let (dx, dy) = dims;
    check_dims(dx * dy, rho.dim())?;
    let m = &rho.matrix;
    let reduced = match keep {
        Subsystem::X => CMatrix::from_fn(dx, dx, |i, j| (0..dy).map(|k| m[(i * dy + k, j * dy + k)]).sum()),
        Subsystem::Y => CMatrix::from_fn(dy, dy, |i, j| (0..dx).map(|k| m[(k * dy + i, k * dy + j)]).sum()),
    };
    Ok(DensityOperator::from_trusted(reduced))
}

/// D(ρ, σ) = ½ Σ |eigenvalues of σ − ρ|.
pub fn trace_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    check_dims(rho.dim(), sigma.dim())?;
    let diff = &sigma.matrix - &rho.matrix;
    let d = 0.5 * eigvalsh(&diff).iter().map(|e| e.abs()).sum::<f64>();
    Ok(d.clamp(0.0, 1.0))
}

/// F(ρ, σ) = tr √(√ρ σ √ρ).
pub fn fidelity(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    check_dims(rho.dim(), sigma.dim())?;
    let root = sqrt_psd(&rho.matrix);
    let inner = &root * &sigma.matrix * &root;
    Ok(trace_sqrt_psd(&inner).clamp(0.0, 1.0))
}

/// Fidelity against a fixed first argument, for repeated evaluation against
/// mixtures of pure states `Σ p_i |g_i⟩⟨g_i|`.
#[derive(Debug, Clone)]
pub struct FidelityKernel {
    /// √ρ g_i, one column per generator.
    images: CMatrix,
}

impl FidelityKernel {
    pub fn new(rho: &DensityOperator, generators: &[PureState]) -> Result<Self> {
        let dim = rho.dim();
        for g in generators {
            check_dims(dim, g.dim())?;
        }
        let root = sqrt_psd(&rho.matrix);
        let mut images = CMatrix::zeros(dim, generators.len());
        for (i, g) in generators.iter().enumerate() {
            images.set_column(i, &(&root * g.amplitudes()));
        }
        Ok(Self { images })
    }

    /// F(ρ, Σ p_i |g_i⟩⟨g_i|) for weights `p` (not validated).
    pub fn eval(&self, weights: &[f64]) -> f64 {
        let mut scaled = self.images.clone();
        for (i, p) in weights.iter().enumerate() {
            scaled.column_mut(i).scale_mut(p.max(0.0).sqrt());
        }
        // nonzero spectrum of A A† equals that of A† A
        let gram = if scaled.ncols() < scaled.nrows() {
            scaled.adjoint() * &scaled
        } else {
            &scaled * scaled.adjoint()
        };
        trace_sqrt_psd(&gram).clamp(0.0, 1.0)
    }
}

/// Δ(p, q) = ½ Σ |p_i − q_i| over a shared finite index set.
pub fn statistical_distance(p: &ProbDist, q: &ProbDist) -> Result<f64> {
    check_dims(p.len(), q.len())?;
    Ok(0.5 * p.weights.iter().zip(&q.weights).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// Optimal probability of guessing a uniformly chosen index of `{ρ0, ρ1}`.
pub fn helstrom_bound(rho0: &DensityOperator, rho1: &DensityOperator) -> Result<f64> {
    Ok(0.5 + 0.5 * trace_distance(rho0, rho1)?)
}

/// A validated orthonormal basis spanning its space.
#[derive(Debug, Clone)]
pub struct OrthonormalBasis {
    vectors: Vec<PureState>,
}

impl OrthonormalBasis {
    pub fn new(vectors: Vec<PureState>) -> Result<Self> {
        let dim = vectors.first().map(PureState::dim).ok_or(Error::NonOrthonormalBasis)?;
        if vectors.len() != dim || vectors.iter().any(|v| v.dim() != dim) {
            return Err(Error::NonOrthonormalBasis);
        }
        for (i, a) in vectors.iter().enumerate() {
            if (a.amplitudes.norm() - 1.0).abs() > ORTHO_TOL {
                return Err(Error::NonOrthonormalBasis);
            }
            for b in &vectors[i + 1..] {
                if a.inner(b).norm() > ORTHO_TOL {
                    return Err(Error::NonOrthonormalBasis);
                }
            }
        }
        Ok(Self { vectors })
    }

    pub fn vectors(&self) -> &[PureState] {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    /// Outcome probabilities |⟨e_i|ψ⟩|².
    pub fn probabilities(&self, state: &PureState) -> Result<Vec<f64>> {
        check_dims(self.dim(), state.dim())?;
        Ok(self.vectors.iter().map(|e| e.inner(state).norm_sqr()).collect())
    }

    /// Samples an outcome index with the Born-rule probabilities.
    pub fn measure<R: Rng + ?Sized>(&self, state: &PureState, rng: &mut R) -> Result<usize> {
        let probs = self.probabilities(state)?;
        let u: f64 = rng.gen::<f64>() * probs.iter().sum::<f64>();
        let mut acc = 0.0;
        for (i, p) in probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return Ok(i);
            }
        }
        // u landed on rounding slack; return the last outcome with support
        Ok(probs.iter().rposition(|p| *p > 0.0).unwrap_or(probs.len() - 1))
    }
}

/// Projective measurement of `state` in `basis`.
pub fn measure_projective<R: Rng + ?Sized>(state: &PureState, basis: &[PureState], rng: &mut R) -> Result<usize> {
    OrthonormalBasis::new(basis.to_vec())?.measure(state, rng)
}
