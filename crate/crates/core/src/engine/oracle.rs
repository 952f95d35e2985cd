//! Cheating-Alice commitments: the optimal single-register commitment and
//! the purification-sampling check of the pass-probability bound F²(σ, L).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::{nelder_mead_max, NelderMeadOptions};
use crate::qmath::linalg::{eigh, orthonormalize_columns, CMatrix};
use crate::qmath::random::{gaussian_matrix, random_isometry};
use crate::qmath::{DensityOperator, PureState};
use crate::seeded_rng;
use crate::states::{fidelity_to_check_set, CheckSet, LambdaParam};

fn bloch_state(theta: f64, phase: f64) -> PureState {
    let (s, c) = (0.5 * theta).sin_cos();
    PureState::new(vec![Complex64::new(c, 0.0), Complex64::from_polar(s, phase)]).expect("unit Bloch vector")
}

/// Average over c of the single-register pass probability ½(1 + F²(σ, L_c)).
fn single_register_value(state: &PureState, sets: &[CheckSet; 2]) -> f64 {
    let sigma = state.projector();
    sets.iter()
        .map(|set| {
            let f = fidelity_to_check_set(&sigma, set).expect("qubit dims");
            0.5 * (1.0 + f * f)
        })
        .sum::<f64>()
        / 2.0
}

/// Pure qubit commitment maximizing ½ Σ_c ½(1 + F²(σ, L_c)), and that value.
///
/// Coarse grid over the Bloch sphere followed by Nelder-Mead refinement of
/// the best few grid points.
pub fn alice_optimal_commit(lambda: LambdaParam) -> (PureState, f64) {
    let sets = [CheckSet::single(0, lambda), CheckSet::single(1, lambda)];
    let objective = |x: &[f64]| single_register_value(&bloch_state(x[0], x[1]), &sets);

    const GRID: usize = 24;
    let mut grid: Vec<(f64, [f64; 2])> = Vec::with_capacity(GRID * GRID);
    for i in 0..=GRID {
        for j in 0..GRID {
            let x = [std::f64::consts::PI * i as f64 / GRID as f64, std::f64::consts::TAU * j as f64 / GRID as f64];
            grid.push((objective(&x), x));
        }
    }
    grid.sort_by(|a, b| b.0.total_cmp(&a.0));

    let opts = NelderMeadOptions {
        initial_step: 0.1,
        value_tol: 1e-13,
        max_evals: 2_000,
    };
    let mut best = (grid[0].0, grid[0].1.to_vec());
    for (_, start) in grid.iter().take(4) {
        let r = nelder_mead_max(objective, start, opts);
        if r.value > best.0 {
            best = (r.value, r.x);
        }
    }
    (bloch_state(best.1[0], best.1[1]), best.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    /// Best pass probability found over sampled purifications.
    pub max_found: f64,
    /// F²(σ, L).
    pub bound: f64,
}

/// Samples purifications |Ω⟩ = Σ_j √μ_j |e_j⟩ ⊗ V|j⟩ of σ (V a random
/// isometry into the reveal register), refines each by local ascent, and
/// reports the largest ⟨Ω|P_K|Ω⟩ with P_K = Σ_i |i⟩⟨i| ⊗ |g_i⟩⟨g_i|.
///
/// `sigma` is positive semidefinite by construction of [`DensityOperator`].
pub fn master_theorem_oracle(sigma: &DensityOperator, set: &CheckSet, samples: usize, seed: u64) -> Result<OracleResult> {
    const ASCENT_STEPS: usize = 200;
    if sigma.dim() != set.dim() {
        return Err(Error::DimensionMismatch {
            expected: set.dim(),
            found: sigma.dim(),
        });
    }
    let f = fidelity_to_check_set(sigma, set)?;
    let bound = f * f;

    let n = sigma.dim();
    let m = set.generators().len();
    let ancilla = m.max(n);
    let (mu, vecs) = eigh(sigma.matrix());
    // overlap[i][j] = √μ_j ⟨g_i|e_j⟩
    let overlap = CMatrix::from_fn(m, n, |i, j| {
        let g = set.generators()[i].amplitudes();
        g.dotc(&vecs.column(j)) * mu[j].max(0.0).sqrt()
    });
    let pass = |v: &CMatrix| -> f64 {
        (0..m)
            .map(|i| (0..n).map(|j| overlap[(i, j)] * v[(i, j)]).sum::<Complex64>().norm_sqr())
            .sum()
    };

    let mut rng = seeded_rng(seed);
    let mut max_found = 0.0f64;
    for _ in 0..samples {
        let mut v = random_isometry(ancilla, n, &mut rng);
        let mut value = pass(&v);
        let mut step = 0.3;
        for _ in 0..ASCENT_STEPS {
            let mut trial = &v + gaussian_matrix(ancilla, n, &mut rng).scale(step);
            orthonormalize_columns(&mut trial);
            let tv = pass(&trial);
            if tv > value {
                v = trial;
                value = tv;
                step = (step * 1.5).min(1.0);
            } else {
                step *= 0.7;
            }
        }
        max_found = max_found.max(value);
    }
    Ok(OracleResult { max_found, bound })
}
