//! Protocol states: the λ-parameterized qubit encodings, the mixed
//! commitments ρ_c and their tensor powers, the one-time-padded two-register
//! state, and the check sets Bob verifies openings against.

use rand::Rng;

use crate::error::{Error, Result};
use crate::optim::golden_section_max;
use crate::qmath::random::random_simplex_point;
use crate::qmath::{self, CMatrix, DensityOperator, FidelityKernel, OrthonormalBasis, PureState};
use crate::seeded_rng;

/// A classical bit, stored as 0 or 1.
pub type Bit = u8;

fn check_bit(b: Bit) {
    assert!(b <= 1, "bit value {b} is not 0 or 1");
}

/// Encoding parameter λ ∈ [½, 1].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct LambdaParam(f64);

impl LambdaParam {
    pub fn new(value: f64) -> Result<Self> {
        if !(0.5..=1.0).contains(&value) {
            return Err(Error::OutOfRange {
                name: "lambda",
                value,
                constraint: "must satisfy 1/2 <= lambda <= 1",
            });
        }
        Ok(Self(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// √(λ(1−λ))
    pub fn overlap_term(self) -> f64 {
        (self.0 * (1.0 - self.0)).sqrt()
    }

    /// `n` evenly spaced values covering [½, 1] inclusive.
    pub fn grid(n: usize) -> Vec<LambdaParam> {
        assert!(n >= 2);
        (0..n)
            .map(|i| LambdaParam(0.5 + 0.5 * i as f64 / (n - 1) as f64))
            .collect()
    }
}

impl TryFrom<f64> for LambdaParam {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Self::new(v)
    }
}

impl From<LambdaParam> for f64 {
    fn from(l: LambdaParam) -> f64 {
        l.0
    }
}

/// Bit `bit` encoded in basis `basis`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EncodedQubit {
    pub basis: Bit,
    pub bit: Bit,
    pub lambda: LambdaParam,
}

impl EncodedQubit {
    pub fn state(&self) -> PureState {
        phi(self.basis, self.bit, self.lambda)
    }
}

/// |φ^b_c(λ)⟩, the encoding of bit `c` in basis `b`:
///
/// ```text
/// φ^0_0 = √λ|0⟩ + √(1−λ)|1⟩     φ^0_1 = √(1−λ)|0⟩ − √λ|1⟩
/// φ^1_0 = √λ|0⟩ − √(1−λ)|1⟩     φ^1_1 = √(1−λ)|0⟩ + √λ|1⟩
/// ```
pub fn phi(b: Bit, c: Bit, lambda: LambdaParam) -> PureState {
    check_bit(b);
    check_bit(c);
    let a = lambda.value().sqrt();
    let s = (1.0 - lambda.value()).sqrt();
    let amps = match (b, c) {
        (0, 0) => [a, s],
        (0, _) => [s, -a],
        (_, 0) => [a, -s],
        _ => [s, a],
    };
    PureState::from_real(&amps).expect("encoding amplitudes are normalized")
}

/// The basis B^b(λ) = {φ^b_0, φ^b_1}; outcome index equals the decoded bit.
pub fn encoding_basis(b: Bit, lambda: LambdaParam) -> OrthonormalBasis {
    OrthonormalBasis::new(vec![phi(b, 0, lambda), phi(b, 1, lambda)]).expect("B^b(λ) is orthonormal")
}

/// ρ_c = λ|c⟩⟨c| + (1−λ)|1−c⟩⟨1−c|.
pub fn rho_mixed(c: Bit, lambda: LambdaParam) -> DensityOperator {
    check_bit(c);
    let l = lambda.value();
    let w = if c == 0 { [l, 1.0 - l] } else { [1.0 - l, l] };
    DensityOperator::from_diagonal(&w).expect("valid diagonal")
}

/// ½ Σ_b |φ^b_c⟩⟨φ^b_c|, the basis-averaged commitment (equal to [`rho_mixed`]).
pub fn rho_mixed_from_encodings(c: Bit, lambda: LambdaParam) -> DensityOperator {
    let p0 = phi(0, c, lambda).projector();
    let p1 = phi(1, c, lambda).projector();
    DensityOperator::mixture(&[(0.5, &p0), (0.5, &p1)]).expect("uniform mixture")
}

pub const MAX_TENSOR_POWER: usize = 8;

/// ρ_c^{⊗k} for 1 ≤ k ≤ 8.
pub fn xi_k(c: Bit, lambda: LambdaParam, k: usize) -> Result<DensityOperator> {
    if !(1..=MAX_TENSOR_POWER).contains(&k) {
        return Err(Error::OutOfRange {
            name: "k",
            value: k as f64,
            constraint: "tensor power must satisfy 1 <= k <= 8",
        });
    }
    let base = rho_mixed(c, lambda);
    let mut acc = base.clone();
    for _ in 1..k {
        acc = qmath::tensor(&acc, &base);
    }
    Ok(acc)
}

/// ξ^{r1,r2}_c = ρ_{c⊕r1} ⊗ ρ_{c⊕r2}.
pub fn encrypted_pair_state(c: Bit, r1: Bit, r2: Bit, lambda: LambdaParam) -> DensityOperator {
    check_bit(r1);
    check_bit(r2);
    qmath::tensor(&rho_mixed(c ^ r1, lambda), &rho_mixed(c ^ r2, lambda))
}

/// Convex hull of the projectors onto a list of pure states.
#[derive(Debug, Clone)]
pub struct CheckSet {
    generators: Vec<PureState>,
    arity: usize,
}

impl CheckSet {
    pub fn new(generators: Vec<PureState>, arity: usize) -> Result<Self> {
        let dim = generators
            .first()
            .map(PureState::dim)
            .ok_or_else(|| Error::Precondition("check set needs at least one generator".into()))?;
        for g in &generators {
            if g.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: g.dim(),
                });
            }
        }
        if dim != 1usize << arity {
            return Err(Error::DimensionMismatch {
                expected: 1 << arity,
                found: dim,
            });
        }
        Ok(Self { generators, arity })
    }

    /// L_c = conv{ |φ^0_c⟩⟨φ^0_c|, |φ^1_c⟩⟨φ^1_c| }.
    pub fn single(c: Bit, lambda: LambdaParam) -> Self {
        Self {
            generators: vec![phi(0, c, lambda), phi(1, c, lambda)],
            arity: 1,
        }
    }

    /// Two-register hull conv{ |φ^{b1}_c φ^{b2}_c⟩⟨…| : b1, b2 ∈ {0,1} }.
    pub fn product(c: Bit, lambda: LambdaParam) -> Self {
        let mut generators = Vec::with_capacity(4);
        for b1 in 0..2 {
            for b2 in 0..2 {
                generators.push(phi(b1, c, lambda).tensor(&phi(b2, c, lambda)));
            }
        }
        Self { generators, arity: 2 }
    }

    pub fn generators(&self) -> &[PureState] {
        &self.generators
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn dim(&self) -> usize {
        self.generators[0].dim()
    }

    /// Σ p_i |g_i⟩⟨g_i|
    pub fn member(&self, weights: &[f64]) -> Result<DensityOperator> {
        if weights.len() != self.generators.len() {
            return Err(Error::DimensionMismatch {
                expected: self.generators.len(),
                found: weights.len(),
            });
        }
        let projectors: Vec<DensityOperator> = self.generators.iter().map(PureState::projector).collect();
        let parts: Vec<(f64, &DensityOperator)> = weights.iter().copied().zip(projectors.iter()).collect();
        DensityOperator::mixture(&parts)
    }

    pub fn sample_member<R: Rng + ?Sized>(&self, rng: &mut R) -> DensityOperator {
        let w = random_simplex_point(self.generators.len(), rng);
        self.member(&w).expect("simplex point is a distribution")
    }

    /// Least-squares membership test: the best-fitting generator weights must
    /// reproduce `rho` with residual ≤ 1e-9, be nonnegative and sum to one.
    pub fn contains(&self, rho: &DensityOperator) -> bool {
        const TOL: f64 = 1e-9;
        if rho.dim() != self.dim() {
            return false;
        }
        let n = self.dim();
        let m = self.generators.len();
        let rows = 2 * n * n;
        let mut a = nalgebra::DMatrix::<f64>::zeros(rows, m);
        for (j, g) in self.generators.iter().enumerate() {
            let p = g.projector();
            for (k, z) in p.matrix().iter().enumerate() {
                a[(2 * k, j)] = z.re;
                a[(2 * k + 1, j)] = z.im;
            }
        }
        let b = nalgebra::DVector::<f64>::from_fn(rows, |k, _| {
            let z = rho.matrix().as_slice()[k / 2];
            if k % 2 == 0 {
                z.re
            } else {
                z.im
            }
        });
        let svd = a.clone().svd(true, true);
        let Ok(x) = svd.solve(&b, 1e-12) else {
            return false;
        };
        let residual = (&a * &x - &b).norm();
        residual <= TOL && x.iter().all(|w| *w >= -TOL) && (x.sum() - 1.0).abs() <= TOL
    }
}

/// Search settings for maximizing a concave function over the probability simplex.
#[derive(Debug, Clone, Copy)]
pub struct SimplexSearch {
    pub restarts: usize,
    pub tolerance: f64,
}

impl SimplexSearch {
    /// 1-D golden-section tolerance for two-generator sets.
    pub const PAIR_TOLERANCE: f64 = 1e-10;
}

impl Default for SimplexSearch {
    fn default() -> Self {
        Self {
            restarts: 50,
            tolerance: 1e-8,
        }
    }
}

/// Pairwise coordinate ascent: repeatedly moves mass between two vertices
/// along the best point of the connecting edge, until a full sweep improves
/// the objective by less than `tol`.
fn coordinate_ascent<F: Fn(&[f64]) -> f64>(f: &F, start: Vec<f64>, tol: f64) -> (Vec<f64>, f64) {
    const MAX_SWEEPS: usize = 500;
    let n = start.len();
    let mut w = start;
    let mut best = f(&w);
    for _ in 0..MAX_SWEEPS {
        let before = best;
        for i in 0..n {
            for j in i + 1..n {
                let total = w[i] + w[j];
                if total <= 0.0 {
                    continue;
                }
                let mut trial = w.clone();
                let (s, v) = golden_section_max(
                    |s| {
                        trial[i] = s;
                        trial[j] = total - s;
                        f(&trial)
                    },
                    0.0,
                    total,
                    tol * total.max(1e-3),
                );
                if v > best {
                    w[i] = s;
                    w[j] = total - s;
                    best = v;
                }
            }
        }
        if best - before < tol {
            break;
        }
    }
    (w, best)
}

/// Maximizes a concave function of simplex weights.
pub(crate) fn maximize_on_simplex<F: Fn(&[f64]) -> f64>(
    f: &F,
    n: usize,
    search: SimplexSearch,
    warm_start: Option<&[f64]>,
) -> (Vec<f64>, f64) {
    if n == 1 {
        let w = vec![1.0];
        let v = f(&w);
        return (w, v);
    }
    if n == 2 {
        let (p, v) = golden_section_max(|p| f(&[p, 1.0 - p]), 0.0, 1.0, SimplexSearch::PAIR_TOLERANCE);
        return (vec![p, 1.0 - p], v);
    }
    let mut rng = seeded_rng(0x00c0_ffee);
    let mut starts: Vec<Vec<f64>> = Vec::with_capacity(search.restarts.max(1));
    starts.push(warm_start.map_or_else(|| vec![1.0 / n as f64; n], <[f64]>::to_vec));
    while starts.len() < search.restarts.max(1) {
        starts.push(random_simplex_point(n, &mut rng));
    }
    starts
        .into_iter()
        .map(|s| coordinate_ascent(f, s, search.tolerance))
        .fold((vec![], f64::NEG_INFINITY), |best, cand| if cand.1 > best.1 { cand } else { best })
}

/// Maximizing weights and value of F(ρ, σ) over σ in the check set.
pub fn best_check_set_member(rho: &DensityOperator, set: &CheckSet, search: SimplexSearch) -> Result<(Vec<f64>, f64)> {
    let kernel = FidelityKernel::new(rho, set.generators())?;
    Ok(maximize_on_simplex(&|w: &[f64]| kernel.eval(w), set.generators().len(), search, None))
}

/// F(ρ, set) = max_{σ ∈ set} F(ρ, σ).
pub fn fidelity_to_check_set(rho: &DensityOperator, set: &CheckSet) -> Result<f64> {
    best_check_set_member(rho, set, SimplexSearch::default()).map(|(_, f)| f)
}

/// F(L_0, L_1) = max over σ ∈ L_0, σ′ ∈ L_1 of F(σ, σ′), for single-register
/// (`arity = 1`) or two-register product-hull (`arity = 2`) check sets.
pub fn check_set_pair_fidelity(lambda: LambdaParam, arity: usize) -> Result<f64> {
    match arity {
        1 => {
            let set0 = CheckSet::single(0, lambda);
            let set1 = CheckSet::single(1, lambda);
            let (_, best) = golden_section_max(
                |p| {
                    let sigma = set0.member(&[p, 1.0 - p]).expect("valid weights");
                    let kernel = FidelityKernel::new(&sigma, set1.generators()).expect("matching dims");
                    golden_section_max(|q| kernel.eval(&[q, 1.0 - q]), 0.0, 1.0, SimplexSearch::PAIR_TOLERANCE).1
                },
                0.0,
                1.0,
                1e-8,
            );
            Ok(best)
        }
        2 => Ok(alternating_pair_fidelity(&CheckSet::product(0, lambda), &CheckSet::product(1, lambda))),
        _ => Err(Error::OutOfRange {
            name: "arity",
            value: arity as f64,
            constraint: "arity must be 1 or 2",
        }),
    }
}

/// Block ascent for the jointly concave F(σ_p, σ′_q): optimize p with q
/// fixed, then q with p fixed, until the value stalls.
fn alternating_pair_fidelity(a: &CheckSet, b: &CheckSet) -> f64 {
    let inner = SimplexSearch {
        restarts: 1,
        tolerance: 1e-10,
    };
    let na = a.generators().len();
    let nb = b.generators().len();
    let mut wa = vec![1.0 / na as f64; na];
    let mut wb = vec![1.0 / nb as f64; nb];
    let mut value = f64::NEG_INFINITY;
    for _ in 0..200 {
        let sigma_b = b.member(&wb).expect("valid weights");
        let kernel = FidelityKernel::new(&sigma_b, a.generators()).expect("matching dims");
        let (new_wa, _) = maximize_on_simplex(&|w: &[f64]| kernel.eval(w), na, inner, Some(&wa));
        wa = new_wa;
        let sigma_a = a.member(&wa).expect("valid weights");
        let kernel = FidelityKernel::new(&sigma_a, b.generators()).expect("matching dims");
        let (new_wb, v) = maximize_on_simplex(&|w: &[f64]| kernel.eval(w), nb, inner, Some(&wb));
        wb = new_wb;
        if v - value < 1e-12 {
            value = value.max(v);
            break;
        }
        value = v;
    }
    value
}

/// Bit-flip Pauli X.
pub fn pauli_x() -> CMatrix {
    use crate::qmath::linalg::{ONE, ZERO};
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::{fidelity, trace_distance};
    use approx::assert_abs_diff_eq;

    fn lam(v: f64) -> LambdaParam {
        LambdaParam::new(v).unwrap()
    }

    type Real2 = [[f64; 2]; 2];

    /// Real 2×2 matrix p|g0⟩⟨g0| + (1−p)|g1⟩⟨g1| for a real-amplitude qubit set.
    fn real_member(set: &CheckSet, p: f64) -> Real2 {
        let g: Vec<[f64; 2]> = set
            .generators()
            .iter()
            .map(|g| [g.amplitudes()[0].re, g.amplitudes()[1].re])
            .collect();
        let mut m = [[0.0; 2]; 2];
        for (w, v) in [(p, g[0]), (1.0 - p, g[1])] {
            for i in 0..2 {
                for j in 0..2 {
                    m[i][j] += w * v[i] * v[j];
                }
            }
        }
        m
    }

    /// Qubit fidelity from F² = tr(ρσ) + 2√(det ρ det σ), independent of the
    /// eigendecomposition route.
    fn qubit_fidelity(a: &Real2, b: &Real2) -> f64 {
        let det = |m: &Real2| m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let overlap = a[0][0] * b[0][0] + a[0][1] * b[1][0] + a[1][0] * b[0][1] + a[1][1] * b[1][1];
        (overlap + 2.0 * (det(a).max(0.0) * det(b).max(0.0)).sqrt()).max(0.0).sqrt()
    }

    #[test]
    fn lambda_domain() {
        assert!(LambdaParam::new(0.49).is_err());
        assert!(LambdaParam::new(1.01).is_err());
        assert!(LambdaParam::new(f64::NAN).is_err());
        assert!(LambdaParam::new(0.5).is_ok());
        assert!(LambdaParam::new(1.0).is_ok());
    }

    #[test]
    fn phi_examples() {
        let p = phi(0, 0, lam(1.0));
        assert!(p.inner(&PureState::basis(2, 0)).norm() > 1.0 - 1e-15);

        let p = phi(0, 0, lam(0.9));
        assert_abs_diff_eq!(p.amplitudes()[0].re, 0.9f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(p.amplitudes()[1].re, 0.1f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(p.amplitudes()[0].re, 0.948683, epsilon = 1e-6);
        assert_abs_diff_eq!(p.amplitudes()[1].re, 0.316228, epsilon = 1e-6);

        for l in [0.5, 0.7, 0.9, 1.0] {
            assert!(phi(0, 0, lam(l)).inner(&phi(0, 1, lam(l))).norm() < 1e-15);
        }
        let q = EncodedQubit { basis: 1, bit: 1, lambda: lam(0.7) };
        assert_eq!(q.state(), phi(1, 1, lam(0.7)));
    }

    #[test]
    fn bases_are_orthonormal_on_grid() {
        for l in LambdaParam::grid(100) {
            for b in 0..2 {
                let g = [phi(b, 0, l), phi(b, 1, l)];
                assert!(OrthonormalBasis::new(g.to_vec()).is_ok());
                assert!(g[0].inner(&g[1]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn rho_mixed_examples() {
        let r = rho_mixed(0, lam(0.9));
        assert!(r.max_abs_diff(&DensityOperator::from_diagonal(&[0.9, 0.1]).unwrap()) < 1e-15);
        assert!(rho_mixed(0, lam(0.5)).max_abs_diff(&DensityOperator::maximally_mixed(2)) < 1e-15);
        for l in LambdaParam::grid(100) {
            for c in 0..2 {
                assert!(rho_mixed(c, l).max_abs_diff(&rho_mixed_from_encodings(c, l)) < 1e-12);
            }
            let flipped = rho_mixed(0, l).conjugate_by(&pauli_x()).unwrap();
            assert!(flipped.max_abs_diff(&rho_mixed(1, l)) < 1e-15);
        }
    }

    #[test]
    fn xi_k_examples() {
        let l = lam(0.9);
        assert!(xi_k(0, l, 1).unwrap().max_abs_diff(&rho_mixed(0, l)) < 1e-15);
        let x = xi_k(0, l, 2).unwrap();
        assert!(x.max_abs_diff(&DensityOperator::from_diagonal(&[0.81, 0.09, 0.09, 0.01]).unwrap()) < 1e-15);
        assert!(xi_k(0, l, 0).is_err());
        assert!(xi_k(0, l, 9).is_err());
        assert_eq!(xi_k(1, l, 8).unwrap().dim(), 256);
        for l in LambdaParam::grid(50) {
            let d = trace_distance(&xi_k(0, l, 2).unwrap(), &xi_k(1, l, 2).unwrap()).unwrap();
            assert_abs_diff_eq!(d, 2.0 * l.value() - 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn encrypted_pair_examples() {
        let l = lam(0.9);
        assert!(encrypted_pair_state(0, 0, 0, l).max_abs_diff(&xi_k(0, l, 2).unwrap()) < 1e-15);
        assert!(encrypted_pair_state(0, 1, 1, l).max_abs_diff(&xi_k(1, l, 2).unwrap()) < 1e-15);
        let e = encrypted_pair_state(0, 1, 0, l);
        assert!(e.max_abs_diff(&DensityOperator::from_diagonal(&[0.09, 0.01, 0.81, 0.09]).unwrap()) < 1e-15);
    }

    #[test]
    fn encryption_hides_the_bit() {
        for l in LambdaParam::grid(20) {
            let avg = |c: Bit| {
                let states: Vec<DensityOperator> = (0..4).map(|r| encrypted_pair_state(c, r >> 1, r & 1, l)).collect();
                let parts: Vec<(f64, &DensityOperator)> = states.iter().map(|s| (0.25, s)).collect();
                DensityOperator::mixture(&parts).unwrap()
            };
            assert!(trace_distance(&avg(0), &avg(1)).unwrap() < 1e-12);
        }
    }

    #[test]
    fn check_set_membership() {
        let l = lam(0.8);
        let set = CheckSet::single(0, l);
        assert!(set.contains(&rho_mixed(0, l)));
        assert!(set.contains(&phi(1, 0, l).projector()));
        assert!(!set.contains(&rho_mixed(1, l)));
        assert!(!set.contains(&DensityOperator::maximally_mixed(2)));
        let prod = CheckSet::product(1, l);
        assert!(prod.contains(&xi_k(1, l, 2).unwrap()));
        assert!(!prod.contains(&xi_k(0, l, 2).unwrap()));
        assert!(CheckSet::new(vec![PureState::basis(2, 0), PureState::basis(4, 0)], 1).is_err());
    }

    #[test]
    fn fidelity_to_check_set_examples() {
        let l = lam(0.9);
        let l0 = CheckSet::single(0, l);
        let f = fidelity_to_check_set(&phi(0, 0, l).projector(), &l0).unwrap();
        assert_abs_diff_eq!(f, 1.0, epsilon = 1e-9);
        let f = fidelity_to_check_set(&rho_mixed(0, l), &l0).unwrap();
        assert_abs_diff_eq!(f, 1.0, epsilon = 1e-9);

        // brute-force grid over the mixture weight, step 1e-6
        let rho = phi(0, 1, l).projector();
        let g = phi(0, 1, l);
        let (x, y) = (g.amplitudes()[0].re, g.amplitudes()[1].re);
        let rho_real = [[x * x, x * y], [x * y, y * y]];
        let mut grid_best = 0.0f64;
        for i in 0..=1_000_000 {
            let sigma = real_member(&l0, i as f64 * 1e-6);
            grid_best = grid_best.max(qubit_fidelity(&rho_real, &sigma));
        }
        let f = fidelity_to_check_set(&rho, &l0).unwrap();
        assert_abs_diff_eq!(f, grid_best, epsilon = 1e-8);
        assert_abs_diff_eq!(f, 0.6, epsilon = 1e-8);

        assert!(fidelity_to_check_set(&DensityOperator::maximally_mixed(4), &l0).is_err());
    }

    #[test]
    fn maximizer_dominates_sampled_members() {
        let mut rng = seeded_rng(3);
        let l = lam(0.8);
        for set in [CheckSet::single(0, l), CheckSet::product(1, l)] {
            let rho = crate::qmath::random::random_density(set.dim(), &mut rng);
            let best = fidelity_to_check_set(&rho, &set).unwrap();
            for _ in 0..1000 {
                let sigma = set.sample_member(&mut rng);
                assert!(best >= fidelity(&rho, &sigma).unwrap() - 1e-9);
            }
        }
    }

    #[test]
    fn pair_fidelity_examples() {
        assert_abs_diff_eq!(check_set_pair_fidelity(lam(1.0), 1).unwrap(), 0.0, epsilon = 1e-9);
        assert!(check_set_pair_fidelity(lam(0.9), 1).unwrap() <= 0.6 + 1e-8);
        assert!(check_set_pair_fidelity(lam(0.9), 3).is_err());

        // 2-D brute-force grid, step 1e-4
        let l = lam(0.75);
        let (s0, s1) = (CheckSet::single(0, l), CheckSet::single(1, l));
        let mut grid_best = 0.0f64;
        let members1: Vec<Real2> = (0..=10_000).map(|j| real_member(&s1, j as f64 * 1e-4)).collect();
        for i in 0..=10_000 {
            let a = real_member(&s0, i as f64 * 1e-4);
            for b in &members1 {
                grid_best = grid_best.max(qubit_fidelity(&a, b));
            }
        }
        assert_abs_diff_eq!(check_set_pair_fidelity(l, 1).unwrap(), grid_best, epsilon = 1e-8);
    }

    #[test]
    fn product_hull_pair_fidelity_is_squared_single() {
        for v in [0.6, 0.75, 0.9] {
            let l = lam(v);
            let f2 = check_set_pair_fidelity(l, 2).unwrap();
            let f = 2.0 * l.overlap_term();
            assert!(f2 <= f * f + 1e-8);
            assert_abs_diff_eq!(f2, f * f, epsilon = 1e-6);
        }
    }
}
