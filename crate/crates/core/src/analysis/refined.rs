//! Numeric cheating-Alice value for the two-register protocol.
//!
//! Alice commits an arbitrary two-qubit ξ and keeps its purification. Once
//! she knows which bit c to open she measures her purifying system with a
//! four-outcome POVM {E_b} that picks the claimed bases b = (b1, b2). Bob's
//! per-register test accepts with operator ½I + ½|φ^{b_i}_c⟩⟨φ^{b_i}_c|
//! (half the time he measured in the other basis), so for fixed ξ the best
//! opening is
//!
//! ```text
//! max Σ_b tr(E_b Q_b),   Q_b = √ξ M_{b,c} √ξ,   Σ_b E_b = I,
//! ```
//!
//! solved by the fixed-point iteration E_b ← G⁻¹ Q_b E_b Q_b G⁻¹ with
//! G = (Σ_b Q_b E_b Q_b)^{1/2}. The outer maximization over ξ = TT†/tr(TT†)
//! (T lower triangular, 16 real parameters) is a restarted Nelder-Mead.
//!
//! Each term of the objective is bounded by a fidelity to a check set, so the
//! result never exceeds [`per_case_value`].

use nalgebra::{Cholesky, Matrix4, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;

use crate::engine::alice_optimal_commit;
use crate::optim::{nelder_mead_max, NelderMeadOptions};
use crate::qmath::linalg::CMatrix;
use crate::qmath::{partial_trace, DensityOperator, Subsystem};
use crate::seeded_rng;
use crate::states::{fidelity_to_check_set, phi, Bit, CheckSet, LambdaParam};

type M4 = Matrix4<Complex64>;

const PARAMS: usize = 16;
const JRF_MAX_ITERATIONS: usize = 2_000;
const JRF_GAP: f64 = 1e-10;
const WARM_ITERATIONS: usize = 40;
const WARM_MIX: f64 = 1e-3;
/// Eigenvalues below this fraction of the largest are treated as zero.
const EIGEN_FLOOR: f64 = 1e-11;

fn psd_power(m: &M4, p: f64) -> M4 {
    let h = (m + m.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(h);
    let floor = EIGEN_FLOOR * eig.eigenvalues.max().max(0.0);
    let mut scaled = eig.eigenvectors;
    for (j, &w) in eig.eigenvalues.iter().enumerate() {
        let s = if w > floor && w > 0.0 { w.powf(p) } else { 0.0 };
        scaled.column_mut(j).scale_mut(s);
    }
    scaled * eig.eigenvectors.adjoint()
}

fn to_m4(m: &CMatrix) -> M4 {
    M4::from_fn(|i, j| m[(i, j)])
}

/// Bob's acceptance operators M_{b,c} for b = 2·b1 + b2.
fn acceptance_operators(c: Bit, lambda: LambdaParam) -> [M4; 4] {
    let single = |b: Bit| {
        let v = phi(b, c, lambda);
        let p = v.amplitudes() * v.amplitudes().adjoint();
        (CMatrix::identity(2, 2) + p).scale(0.5)
    };
    let a = [single(0), single(1)];
    std::array::from_fn(|b| to_m4(&a[b >> 1].kronecker(&a[b & 1])))
}

/// S^{-1/2} E_b S^{-1/2} with S = Σ_b E_b, so roundoff never lets the
/// elements sum past the identity.
fn renormalize(e: &mut [M4; 4]) {
    let n = psd_power(&e.iter().sum::<M4>(), -0.5);
    for eb in e.iter_mut() {
        let m = n * *eb * n;
        *eb = (m + m.adjoint()).scale(0.5);
    }
}

/// Upper bound on the opening value from the dual feasible point
/// Y = herm(Σ_b Q_b E_b) + t·I, t = max_b λ_max(Q_b − herm(Σ_b Q_b E_b)).
fn dual_bound(q: &[M4; 4], e: &[M4; 4]) -> f64 {
    let y: M4 = (0..4).map(|b| q[b] * e[b]).sum();
    let y = (y + y.adjoint()).scale(0.5);
    let shift = q
        .iter()
        .map(|qb| {
            let d = qb - y;
            SymmetricEigen::new((d + d.adjoint()).scale(0.5)).eigenvalues.max()
        })
        .fold(0.0f64, f64::max);
    y.trace().re + 4.0 * shift
}

type Povm = [M4; 4];

fn uniform_povm() -> Povm {
    [M4::identity().scale(0.25); 4]
}

/// Moves `e` towards the optimum of Σ_b tr(E_b Q_b) for at most
/// `max_iterations` steps and returns the final iterate's value. Every
/// iterate is a valid (sub-)POVM, so the result is achievable; iteration
/// stops early once the dual bound is within [`JRF_GAP`].
fn improve_opening(q: &[M4; 4], e: &mut Povm, max_iterations: usize) -> f64 {
    let value = |e: &Povm| (0..4).map(|b| (q[b] * e[b]).trace().re).sum::<f64>();
    let mut current = value(e);
    for it in 1..=max_iterations {
        let terms: [M4; 4] = std::array::from_fn(|b| q[b] * e[b] * q[b]);
        let g_inv = psd_power(&terms.iter().sum::<M4>(), -0.5);
        for b in 0..4 {
            e[b] = g_inv * terms[b] * g_inv;
        }
        renormalize(e);
        current = value(e);
        if it % 10 == 0 && dual_bound(q, e) - current < JRF_GAP {
            break;
        }
    }
    current
}

fn best_opening(q: &[M4; 4]) -> f64 {
    improve_opening(q, &mut uniform_povm(), JRF_MAX_ITERATIONS)
}

fn opening_operators(xi: &M4, m: &[M4; 4]) -> [M4; 4] {
    let root = psd_power(xi, 0.5);
    std::array::from_fn(|b| root * m[b] * root)
}

fn joint_value_m4(xi: &M4, ops: &[[M4; 4]; 2]) -> f64 {
    ops.iter().map(|m| best_opening(&opening_operators(xi, m))).sum::<f64>() / 2.0
}

/// Cheap evaluation for the outer search: a short run started from the
/// previous evaluation's measurement, pulled slightly towards I/4 so it
/// stays full rank.
fn warm_value(xi: &M4, ops: &[[M4; 4]; 2], warm: &mut [Povm; 2]) -> f64 {
    let mut total = 0.0;
    for (m, e) in ops.iter().zip(warm.iter_mut()) {
        for eb in e.iter_mut() {
            *eb = eb.scale(1.0 - WARM_MIX) + M4::identity().scale(0.25 * WARM_MIX);
        }
        total += improve_opening(&opening_operators(xi, m), e, WARM_ITERATIONS);
    }
    total / 2.0
}

/// Alice's success probability with commitment `xi` and the best opening
/// measurement, averaged over the bit she is asked to open.
pub fn joint_opening_value(xi: &DensityOperator, lambda: LambdaParam) -> f64 {
    assert_eq!(xi.dim(), 4, "two-register commitment");
    let ops = [acceptance_operators(0, lambda), acceptance_operators(1, lambda)];
    joint_value_m4(&to_m4(xi.matrix()), &ops)
}

/// ½ Σ_c ¼(1 + F²(ξ_X, L_c) + F²(ξ_Y, L_c) + F²(ξ, L_c ⊗ L_c)): each
/// acceptance term maximized separately.
pub fn per_case_value(xi: &DensityOperator, lambda: LambdaParam) -> f64 {
    let f2 = |rho: &DensityOperator, set: &CheckSet| fidelity_to_check_set(rho, set).expect("matching dims").powi(2);
    let x = partial_trace(xi, Subsystem::X, (2, 2)).expect("4-dim");
    let y = partial_trace(xi, Subsystem::Y, (2, 2)).expect("4-dim");
    (0..2u8)
        .map(|c| {
            let single = CheckSet::single(c, lambda);
            0.25 * (1.0 + f2(&x, &single) + f2(&y, &single) + f2(xi, &CheckSet::product(c, lambda)))
        })
        .sum::<f64>()
        / 2.0
}

fn xi_from_params(p: &[f64]) -> M4 {
    let mut t = M4::zeros();
    let mut k = 4;
    for i in 0..4 {
        t[(i, i)] = Complex64::new(p[i], 0.0);
        for j in 0..i {
            t[(i, j)] = Complex64::new(p[k], p[k + 1]);
            k += 2;
        }
    }
    let m = t * t.adjoint();
    let tr = m.trace().re;
    if tr < 1e-300 {
        return M4::identity().scale(0.25);
    }
    m.unscale(tr)
}

/// Lower-triangular factor of a slightly regularized `xi`, as parameters.
fn params_from_xi(xi: &M4) -> Vec<f64> {
    let reg = xi.scale(1.0 - 1e-6) + M4::identity().scale(0.25e-6);
    let l = Cholesky::new(reg).expect("regularized state is positive definite").l();
    let mut p = vec![0.0; PARAMS];
    let mut k = 4;
    for i in 0..4 {
        p[i] = l[(i, i)].re;
        for j in 0..i {
            p[k] = l[(i, j)].re;
            p[k + 1] = l[(i, j)].im;
            k += 2;
        }
    }
    p
}

#[derive(Debug, Clone)]
pub struct RefinedBound {
    pub value: f64,
    pub xi: DensityOperator,
    pub restarts: usize,
    pub evaluations: usize,
}

/// Restarted search over two-qubit commitments. Restart 0 starts from the
/// optimal product commitment ψ⊗ψ (value g(2, λ)); the others from random T.
pub fn refined_alice_search(lambda: LambdaParam, restarts: usize, seed: u64) -> RefinedBound {
    let ops = [acceptance_operators(0, lambda), acceptance_operators(1, lambda)];
    let mut warm = [uniform_povm(), uniform_povm()];

    let (psi, _) = alice_optimal_commit(lambda);
    let pp = psi.tensor(&psi);
    let product = to_m4(&(pp.amplitudes() * pp.amplitudes().adjoint()));
    let mut best_xi = product;
    let mut best = joint_value_m4(&product, &ops);
    let mut evaluations = 1;

    let opts = NelderMeadOptions {
        initial_step: 0.2,
        value_tol: 1e-10,
        max_evals: 6_000,
    };
    let mut rng = seeded_rng(seed);
    for r in 0..restarts.max(1) {
        let start = if r == 0 {
            params_from_xi(&product)
        } else {
            (0..PARAMS).map(|_| rng.gen_range(-1.0..1.0)).collect()
        };
        let res = nelder_mead_max(|p: &[f64]| warm_value(&xi_from_params(p), &ops, &mut warm), &start, opts);
        evaluations += res.evals;
        // Re-solve the opening from scratch at the restart's best point.
        let xi = xi_from_params(&res.x);
        let value = joint_value_m4(&xi, &ops);
        if value > best {
            best = value;
            best_xi = xi;
        }
    }
    let dense = CMatrix::from_fn(4, 4, |i, j| best_xi[(i, j)]);
    RefinedBound {
        value: best,
        xi: DensityOperator::new(dense).expect("TT†/tr is a state"),
        restarts: restarts.max(1),
        evaluations,
    }
}

/// Best cheating-Alice value found by [`refined_alice_search`].
pub fn refined_alice_bound(lambda: LambdaParam, restarts: usize, seed: u64) -> f64 {
    refined_alice_search(lambda, restarts, seed).value
}
