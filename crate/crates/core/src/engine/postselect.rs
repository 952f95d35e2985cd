//! Bob's postselection attack on the encrypted protocol: he applies an
//! operation with a success flag to the two registers and restarts whenever
//! it fails, so the state he keeps is reweighted by Γ.

use rand::Rng;

use crate::error::{Error, Result};
use crate::qmath::linalg::{CMatrix, ZERO};
use crate::qmath::random::random_pure;
use crate::qmath::{trace_distance, DensityOperator, PureState};
use crate::states::{Bit, LambdaParam};

pub const MAX_RESIDUAL_DIM: usize = 8;

#[derive(Debug, Clone)]
pub struct PostselectionAttack {
    /// Γ_{u,v} at index 2u + v.
    gamma: [f64; 4],
    /// ψ_{u,v} at index 2u + v.
    residuals: Vec<PureState>,
}

impl PostselectionAttack {
    pub fn new(gamma: [f64; 4], residuals: Vec<PureState>) -> Result<Self> {
        if let Some(&g) = gamma.iter().find(|g| !(g.is_finite() && **g >= 0.0)) {
            return Err(Error::OutOfRange {
                name: "gamma",
                value: g,
                constraint: "weights must be finite and nonnegative",
            });
        }
        if gamma.iter().all(|&g| g == 0.0) {
            return Err(Error::ZeroGamma);
        }
        if residuals.len() != 4 {
            return Err(Error::Precondition(format!("expected 4 residual states, got {}", residuals.len())));
        }
        let d = residuals[0].dim();
        if d > MAX_RESIDUAL_DIM {
            return Err(Error::OutOfRange {
                name: "residual dimension",
                value: d as f64,
                constraint: "d <= 8",
            });
        }
        if let Some(r) = residuals.iter().find(|r| r.dim() != d) {
            return Err(Error::DimensionMismatch { expected: d, found: r.dim() });
        }
        Ok(Self { gamma, residuals })
    }

    /// Γ uniform on [0, 1], ψ_{u,v} Haar-random in dimension `d`.
    pub fn random<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<Self> {
        let gamma = [rng.gen(), rng.gen(), rng.gen(), rng.gen()];
        let residuals = (0..4).map(|_| random_pure(d, rng)).collect();
        Self::new(gamma, residuals)
    }

    pub fn gamma(&self) -> &[f64; 4] {
        &self.gamma
    }

    pub fn residuals(&self) -> &[PureState] {
        &self.residuals
    }

    pub fn residual_dim(&self) -> usize {
        self.residuals[0].dim()
    }

    /// Bob's postselected state ξ_c^A on the classical pad register ⊗ residual.
    pub fn postselected_state(&self, c: Bit, lambda: LambdaParam) -> DensityOperator {
        let l = lambda.value();
        let q = |u: Bit, a: Bit| if u == a { l } else { 1.0 - l };
        let d = self.residual_dim();
        let s: f64 = self.gamma.iter().sum();
        let mut m = CMatrix::from_element(4 * d, 4 * d, ZERO);
        for r in 0..4u8 {
            let (a, b) = (c ^ (r >> 1), c ^ (r & 1));
            let mut block = m.view_mut((r as usize * d, r as usize * d), (d, d));
            for uv in 0..4u8 {
                let w = q(uv >> 1, a) * q(uv & 1, b) * self.gamma[uv as usize] / s;
                let psi = self.residuals[uv as usize].amplitudes();
                block += (psi * psi.adjoint()).scale(w);
            }
        }
        DensityOperator::new(m).expect("postselected state is a density operator")
    }
}

/// D(ξ_0^A, ξ_1^A) for the given attack.
pub fn adversary_bob_postselect(attack: &PostselectionAttack, lambda: LambdaParam) -> f64 {
    let x0 = attack.postselected_state(0, lambda);
    let x1 = attack.postselected_state(1, lambda);
    trace_distance(&x0, &x1).expect("equal dimensions")
}
