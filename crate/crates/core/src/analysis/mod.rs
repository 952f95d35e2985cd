//! Cheating-probability bounds, the minimax choice of λ and the k-fold sweep.

mod refined;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::engine::Protocol;
use crate::error::{Error, Result};
use crate::optim::bisect;
use crate::states::LambdaParam;

pub use refined::{joint_opening_value, per_case_value, refined_alice_bound, refined_alice_search, RefinedBound};

/// Largest repetition count accepted by the k-fold formulas.
pub const MAX_K: u32 = 64;
/// Grid size of the monotonicity precheck run before each bisection.
pub const MONOTONICITY_GRID: usize = 1000;
pub const LAMBDA_TOLERANCE: f64 = 1e-10;

fn check_k(k: u32) -> Result<()> {
    if k == 0 || k > MAX_K {
        return Err(Error::OutOfRange {
            name: "k",
            value: k as f64,
            constraint: "repetition count must satisfy 1 <= k <= 64",
        });
    }
    Ok(())
}

/// (P*_A, P*_B) = (¾ + √(λ(1−λ))/2, λ) for the single-register protocol.
pub fn berlin_bounds(lambda: LambdaParam) -> BoundsReport {
    let p = berlin_pair(lambda);
    BoundsReport {
        protocol: Protocol::Berlin,
        lambda: lambda.value(),
        k: 1,
        p_alice_upper: p.0,
        p_alice_lower: Some(p.0),
        p_bob: p.1,
        which_exact: ExactFlags { alice: true, bob: true },
    }
}

fn berlin_pair(lambda: LambdaParam) -> (f64, f64) {
    (0.75 + 0.5 * lambda.overlap_term(), lambda.value())
}

/// ½ + ½((1 + 2√(λ(1−λ)))/2)².
pub fn ours_alice_bound(lambda: LambdaParam) -> f64 {
    let h = 0.5 * (1.0 + 2.0 * lambda.overlap_term());
    0.5 + 0.5 * h * h
}

/// f(k,λ) = ½ + ½(½ + √(λ(1−λ)))^k.
pub fn kfold_alice_upper(k: u32, lambda: LambdaParam) -> Result<f64> {
    check_k(k)?;
    Ok(0.5 + 0.5 * (0.5 + lambda.overlap_term()).powi(k as i32))
}

/// g(k,λ) = (¾ + √(λ(1−λ))/2)^k, achieved by the product strategy.
pub fn kfold_alice_lower(k: u32, lambda: LambdaParam) -> Result<f64> {
    check_k(k)?;
    Ok((0.75 + 0.5 * lambda.overlap_term()).powi(k as i32))
}

/// ½ + D(ρ_0^{⊗k}, ρ_1^{⊗k})/2, summing over Hamming-weight classes.
pub fn kfold_bob_exact(k: u32, lambda: LambdaParam) -> Result<f64> {
    check_k(k)?;
    let l = lambda.value();
    let mut binom = 1.0f64;
    let mut d = 0.0;
    for w in 0..=k {
        if w > 0 {
            binom = binom * (k - w + 1) as f64 / w as f64;
        }
        let a = l.powi((k - w) as i32) * (1.0 - l).powi(w as i32);
        let b = l.powi(w as i32) * (1.0 - l).powi((k - w) as i32);
        d += binom * (a - b).abs();
    }
    Ok(0.5 + 0.25 * d)
}

/// Which of the reported probabilities are tight rather than upper bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactFlags {
    pub alice: bool,
    pub bob: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub protocol: Protocol,
    pub lambda: f64,
    pub k: u32,
    pub p_alice_upper: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_alice_lower: Option<f64>,
    pub p_bob: f64,
    pub which_exact: ExactFlags,
}

/// Bounds for `protocol`. Only the unencrypted repetition uses `k`; the
/// single-register and encrypted protocols have k = 1 and k = 2.
pub fn bounds(protocol: Protocol, lambda: LambdaParam, k: u32) -> Result<BoundsReport> {
    Ok(match protocol {
        Protocol::Berlin => berlin_bounds(lambda),
        Protocol::Ours => BoundsReport {
            protocol,
            lambda: lambda.value(),
            k: 2,
            p_alice_upper: ours_alice_bound(lambda),
            p_alice_lower: Some(kfold_alice_lower(2, lambda)?),
            p_bob: kfold_bob_exact(2, lambda)?,
            which_exact: ExactFlags { alice: false, bob: true },
        },
        Protocol::Unencrypted => BoundsReport {
            protocol,
            lambda: lambda.value(),
            k,
            p_alice_upper: kfold_alice_upper(k, lambda)?,
            p_alice_lower: Some(kfold_alice_lower(k, lambda)?),
            p_bob: kfold_bob_exact(k, lambda)?,
            which_exact: ExactFlags { alice: k == 1, bob: true },
        },
    })
}

/// The cheating-Alice curve paired with Bob's exact k-fold probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AliceCurve {
    Berlin,
    Ours,
    KfoldUpper(u32),
    KfoldLower(u32),
}

impl AliceCurve {
    pub fn k(self) -> u32 {
        match self {
            AliceCurve::Berlin => 1,
            AliceCurve::Ours => 2,
            AliceCurve::KfoldUpper(k) | AliceCurve::KfoldLower(k) => k,
        }
    }

    pub fn alice(self, lambda: LambdaParam) -> Result<f64> {
        match self {
            AliceCurve::Berlin => Ok(berlin_pair(lambda).0),
            AliceCurve::Ours => Ok(ours_alice_bound(lambda)),
            AliceCurve::KfoldUpper(k) => kfold_alice_upper(k, lambda),
            AliceCurve::KfoldLower(k) => kfold_alice_lower(k, lambda),
        }
    }

    pub fn bob(self, lambda: LambdaParam) -> Result<f64> {
        kfold_bob_exact(self.k(), lambda)
    }
}

impl fmt::Display for AliceCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AliceCurve::Berlin => f.write_str("berlin"),
            AliceCurve::Ours => f.write_str("ours"),
            AliceCurve::KfoldUpper(k) => write!(f, "kfold-upper({k})"),
            AliceCurve::KfoldLower(k) => write!(f, "kfold-lower({k})"),
        }
    }
}

impl FromStr for AliceCurve {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "berlin" => return Ok(AliceCurve::Berlin),
            "ours" => return Ok(AliceCurve::Ours),
            _ => {}
        }
        let parse_k = |inner: &str| inner.trim_end_matches(')').parse::<u32>().map_err(|e| format!("bad k in {s:?}: {e}"));
        if let Some(rest) = s.strip_prefix("kfold-upper(") {
            return Ok(AliceCurve::KfoldUpper(parse_k(rest)?));
        }
        if let Some(rest) = s.strip_prefix("kfold-lower(") {
            return Ok(AliceCurve::KfoldLower(parse_k(rest)?));
        }
        Err(format!("unknown curve {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Bisection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub curve: AliceCurve,
    pub lambda_star: f64,
    pub p_star: f64,
    pub bias: f64,
    pub solver: Solver,
    pub iterations: usize,
    pub tolerance: f64,
    /// Set when the curves do not cross on [½, 1] and an endpoint was returned.
    pub boundary: bool,
}

fn lambda_at(x: f64) -> LambdaParam {
    LambdaParam::new(x.clamp(0.5, 1.0)).expect("clamped into [1/2, 1]")
}

/// Requires Alice's curve nonincreasing and Bob's nondecreasing on the grid.
fn check_monotone(curve: AliceCurve) -> Result<()> {
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..=MONOTONICITY_GRID {
        let l = lambda_at(0.5 + 0.5 * i as f64 / MONOTONICITY_GRID as f64);
        let (a, b) = (curve.alice(l)?, curve.bob(l)?);
        if let Some((pa, pb)) = prev {
            if a > pa + 1e-12 || b < pb - 1e-12 {
                return Err(Error::Precondition(format!(
                    "{curve}: curves are not monotone near lambda = {:.6}",
                    l.value()
                )));
            }
        }
        prev = Some((a, b));
    }
    Ok(())
}

/// Minimizes max(P_A(λ), P_B(λ)) over λ ∈ [½, 1] by bisecting on the crossing.
pub fn optimize_lambda(curve: AliceCurve) -> Result<OptimizationResult> {
    check_k(curve.k())?;
    check_monotone(curve)?;
    let gap = |x: f64| {
        let l = lambda_at(x);
        curve.alice(l).expect("k checked") - curve.bob(l).expect("k checked")
    };
    let (lambda_star, iterations, boundary) = match bisect(gap, 0.5, 1.0, LAMBDA_TOLERANCE) {
        Some(root) => (root.x, root.iterations, false),
        None => {
            // No crossing: the max of the two curves is monotone, so an endpoint wins.
            let worst = |x: f64| {
                let l = lambda_at(x);
                curve.alice(l).expect("k checked").max(curve.bob(l).expect("k checked"))
            };
            let x = if worst(0.5) <= worst(1.0) { 0.5 } else { 1.0 };
            (x, 0, true)
        }
    };
    let l = lambda_at(lambda_star);
    let p_star = curve.alice(l)?.max(curve.bob(l)?);
    Ok(OptimizationResult {
        curve,
        lambda_star,
        p_star,
        bias: p_star - 0.5,
        solver: Solver::Bisection,
        iterations,
        tolerance: LAMBDA_TOLERANCE,
        boundary,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub k: u32,
    pub lambda_star_lower: f64,
    pub p_lower: f64,
    pub lambda_star_upper: f64,
    pub p_upper: f64,
}

/// Minimax rows for k = 1..=k_max using both Alice curves.
pub fn sweep_k(k_max: u32) -> Result<Vec<SweepRow>> {
    if !(3..=20).contains(&k_max) {
        return Err(Error::OutOfRange {
            name: "k_max",
            value: k_max as f64,
            constraint: "sweep range must satisfy 3 <= k_max <= 20",
        });
    }
    (1..=k_max)
        .map(|k| {
            let lower = optimize_lambda(AliceCurve::KfoldLower(k))?;
            let upper = optimize_lambda(AliceCurve::KfoldUpper(k))?;
            Ok(SweepRow {
                k,
                lambda_star_lower: lower.lambda_star,
                p_lower: lower.p_star,
                lambda_star_upper: upper.lambda_star,
                p_upper: upper.p_star,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::trace_distance;
    use crate::states::xi_k;
    use approx::assert_abs_diff_eq;

    fn lam(v: f64) -> LambdaParam {
        LambdaParam::new(v).unwrap()
    }

    #[test]
    fn berlin_examples() {
        let r = berlin_bounds(lam(0.9));
        assert_abs_diff_eq!(r.p_alice_upper, 0.9, epsilon = 1e-12);
        assert_abs_diff_eq!(r.p_bob, 0.9, epsilon = 1e-12);
        let r = berlin_bounds(lam(0.5));
        assert_abs_diff_eq!(r.p_alice_upper, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.p_bob, 0.5, epsilon = 1e-12);
        let r = berlin_bounds(lam(1.0));
        assert_abs_diff_eq!(r.p_alice_upper, 0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(r.p_bob, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn ours_examples() {
        assert_abs_diff_eq!(ours_alice_bound(lam(0.5)), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ours_alice_bound(lam(1.0)), 0.625, epsilon = 1e-12);
        assert_abs_diff_eq!(ours_alice_bound(lam(0.859)), 0.8596, epsilon = 5e-4);
        // Independent evaluation: s = √(0.8596·0.1404), ½ + ½(½ + s)².
        let s = (0.8596f64 * 0.1404).sqrt();
        assert_abs_diff_eq!(ours_alice_bound(lam(0.8596)), 0.5 + 0.5 * (0.5 + s) * (0.5 + s), epsilon = 1e-12);
        assert_abs_diff_eq!(ours_alice_bound(lam(0.8596)), 0.859045, epsilon = 1e-6);
    }

    #[test]
    fn kfold_identities_on_grid() {
        for l in LambdaParam::grid(1000) {
            let b = berlin_bounds(l);
            assert_abs_diff_eq!(kfold_alice_upper(1, l).unwrap(), b.p_alice_upper, epsilon = 1e-12);
            assert_abs_diff_eq!(kfold_alice_upper(2, l).unwrap(), ours_alice_bound(l), epsilon = 1e-12);
            assert_abs_diff_eq!(kfold_bob_exact(1, l).unwrap(), l.value(), epsilon = 1e-12);
            assert_abs_diff_eq!(kfold_bob_exact(2, l).unwrap(), l.value(), epsilon = 1e-12);
            for k in 1..=12 {
                assert!(kfold_alice_lower(k, l).unwrap() <= kfold_alice_upper(k, l).unwrap() + 1e-12);
                assert!(kfold_alice_upper(k + 1, l).unwrap() <= kfold_alice_upper(k, l).unwrap() + 1e-12);
                assert!(kfold_alice_lower(k + 1, l).unwrap() <= kfold_alice_lower(k, l).unwrap() + 1e-12);
                assert!(kfold_bob_exact(k + 1, l).unwrap() >= kfold_bob_exact(k, l).unwrap() - 1e-12);
            }
        }
    }

    #[test]
    fn kfold_examples() {
        assert_abs_diff_eq!(kfold_alice_lower(1, lam(0.9)).unwrap(), 0.9, epsilon = 1e-12);
        assert_abs_diff_eq!(kfold_alice_lower(2, lam(0.9)).unwrap(), 0.81, epsilon = 1e-12);
        assert_abs_diff_eq!(kfold_bob_exact(3, lam(0.8)).unwrap(), 0.896, epsilon = 1e-12);
        assert!(kfold_alice_upper(60, lam(0.9)).unwrap() - 0.5 < 1e-4);
        assert!(kfold_bob_exact(0, lam(0.9)).is_err());
        assert!(kfold_bob_exact(65, lam(0.9)).is_err());
        assert!(kfold_bob_exact(64, lam(0.9)).is_ok());
    }

    #[test]
    fn bob_weight_classes_match_trace_distance() {
        for l in LambdaParam::grid(11) {
            for k in 1..=8 {
                let d = trace_distance(&xi_k(0, l, k).unwrap(), &xi_k(1, l, k).unwrap()).unwrap();
                assert_abs_diff_eq!(kfold_bob_exact(k as u32, l).unwrap(), 0.5 + 0.5 * d, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn optimize_examples() {
        let b = optimize_lambda(AliceCurve::Berlin).unwrap();
        assert_abs_diff_eq!(b.lambda_star, 0.9, epsilon = 1e-9);
        assert_abs_diff_eq!(b.p_star, 0.9, epsilon = 1e-9);
        assert_abs_diff_eq!(b.bias, 0.4, epsilon = 1e-9);
        assert!(!b.boundary);

        let o = optimize_lambda(AliceCurve::Ours).unwrap();
        assert!((0.858..=0.861).contains(&o.lambda_star));
        assert!((0.858..=0.861).contains(&o.p_star));
        assert!((0.358..=0.361).contains(&o.bias));
        assert_abs_diff_eq!(o.lambda_star, 0.8593040859717764, epsilon = 1e-9);
        let l = lam(o.lambda_star);
        assert!((ours_alice_bound(l) - l.value()).abs() <= 1e-9);

        let k2 = optimize_lambda(AliceCurve::KfoldUpper(2)).unwrap();
        assert_abs_diff_eq!(k2.lambda_star, o.lambda_star, epsilon = 1e-9);
        assert_abs_diff_eq!(k2.p_star, o.p_star, epsilon = 1e-9);
    }

    #[test]
    fn sweep_matches_reference_crossings() {
        // Crossings computed independently at high precision.
        let reference = [
            (1, 0.9, 0.9),
            (2, 0.8563265641827411, 0.8593040859717764),
            (3, 0.876468969755028, 0.8793643348275965),
            (4, 0.85839, 0.86246),
            (5, 0.87087, 0.87453),
            (6, 0.85946, 0.86384),
            (7, 0.86839, 0.87240),
            (8, 0.86006, 0.86458),
            (9, 0.86700, 0.87120),
            (10, 0.86044, 0.86504),
        ];
        let rows = sweep_k(10).unwrap();
        assert_eq!(rows.len(), 10);
        for (row, (k, p_lower, p_upper)) in rows.iter().zip(reference) {
            assert_eq!(row.k, k);
            assert_abs_diff_eq!(row.p_lower, p_lower, epsilon = 1e-5);
            assert_abs_diff_eq!(row.p_upper, p_upper, epsilon = 1e-5);
        }
        assert_abs_diff_eq!(rows[2].lambda_star_lower, 0.7803624616998058, epsilon = 1e-9);
        assert_abs_diff_eq!(rows[2].lambda_star_upper, 0.7831910518054442, epsilon = 1e-9);
        let argmin = |f: fn(&SweepRow) -> f64| rows.iter().min_by(|a, b| f(a).total_cmp(&f(b))).unwrap().k;
        assert_eq!(argmin(|r| r.p_lower), 2);
        assert_eq!(argmin(|r| r.p_upper), 2);
        assert!(sweep_k(2).is_err());
        assert!(sweep_k(21).is_err());
    }

    #[test]
    fn crossing_residuals() {
        for k in 1..=20 {
            for curve in [AliceCurve::KfoldUpper(k), AliceCurve::KfoldLower(k)] {
                let r = optimize_lambda(curve).unwrap();
                let l = lam(r.lambda_star);
                assert!((curve.alice(l).unwrap() - curve.bob(l).unwrap()).abs() <= 1e-9, "{curve}");
            }
        }
    }

    #[test]
    fn curve_names_round_trip() {
        for c in [AliceCurve::Berlin, AliceCurve::Ours, AliceCurve::KfoldUpper(7), AliceCurve::KfoldLower(12)] {
            assert_eq!(c.to_string().parse::<AliceCurve>().unwrap(), c);
        }
    }
}
