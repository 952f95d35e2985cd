//! Named invariant and property checks run by `coinflip verify`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    berlin_bounds, kfold_alice_upper, kfold_bob_exact, optimize_lambda, ours_alice_bound, sweep_k, AliceCurve,
};
use crate::engine::{
    adversary_bob_postselect, master_theorem_oracle, parse_transcripts, run_honest, ChannelModel, PostselectionAttack,
    Protocol, Scenario, Adversary,
};
use crate::qmath::random::{random_density, random_pure, random_simplex_point};
use crate::qmath::{fidelity, statistical_distance, trace_distance, DensityOperator, ProbDist};
use crate::seeded_rng;
use crate::states::{
    check_set_pair_fidelity, encoding_basis, encrypted_pair_state, xi_k, CheckSet, LambdaParam,
};
use crate::SimRng;

/// Slack allowed on every inequality.
pub const TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub instances: u64,
    pub violations: u64,
    /// Largest amount by which the checked inequality (or equality) was missed.
    pub worst_excess: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifySummary {
    pub seed: u64,
    pub passed: usize,
    pub failed: usize,
    pub checks: Vec<CheckOutcome>,
}

impl VerifySummary {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }
}

/// Accumulates excesses of `lhs ≤ rhs` style checks.
struct Tracker {
    instances: u64,
    violations: u64,
    worst: f64,
    tolerance: f64,
}

impl Tracker {
    fn new() -> Self {
        Self::with_tolerance(TOLERANCE)
    }

    fn with_tolerance(tolerance: f64) -> Self {
        Self {
            instances: 0,
            violations: 0,
            worst: f64::NEG_INFINITY,
            tolerance,
        }
    }

    /// Records `excess`; positive means the inequality failed by that much.
    fn record(&mut self, excess: f64) {
        self.instances += 1;
        self.worst = self.worst.max(excess);
        if !(excess <= self.tolerance) {
            self.violations += 1;
        }
    }

    fn le(&mut self, lhs: f64, rhs: f64) {
        self.record(lhs - rhs);
    }

    fn eq(&mut self, a: f64, b: f64) {
        self.record((a - b).abs());
    }

    fn ok(&mut self, cond: bool) {
        self.record(if cond { 0.0 } else { 1.0 });
    }

    fn finish(self, name: &str) -> CheckOutcome {
        CheckOutcome {
            name: name.to_string(),
            instances: self.instances,
            violations: self.violations,
            worst_excess: if self.instances == 0 { 0.0 } else { self.worst },
            passed: self.violations == 0 && self.instances > 0,
        }
    }
}

/// The five distance and fidelity inequalities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Property {
    FidelityInequality1,
    FidelityInequality2,
    AdditiveFidelity,
    ConvOfTraceDistance,
    DistanceBound,
}

impl Property {
    pub const ALL: [Property; 5] = [
        Property::FidelityInequality1,
        Property::FidelityInequality2,
        Property::AdditiveFidelity,
        Property::ConvOfTraceDistance,
        Property::DistanceBound,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::FidelityInequality1 => "FidelityInequality1",
            Property::FidelityInequality2 => "FidelityInequality2",
            Property::AdditiveFidelity => "AdditiveFidelity",
            Property::ConvOfTraceDistance => "ConvOfTraceDistance",
            Property::DistanceBound => "DistanceBound",
        }
    }
}

fn pick_dim(rng: &mut SimRng) -> usize {
    if rng.gen_bool(0.5) {
        2
    } else {
        4
    }
}

/// Checks `property` on `instances` random instances.
pub fn property_check(property: Property, instances: u64, seed: u64) -> CheckOutcome {
    let mut rng = seeded_rng(seed);
    let mut t = Tracker::new();
    for _ in 0..instances {
        let d = pick_dim(&mut rng);
        match property {
            // 1 − F ≤ D ≤ √(1 − F²)
            Property::FidelityInequality1 => {
                let (rho, sigma) = (random_density(d, &mut rng), random_density(d, &mut rng));
                let f = fidelity(&rho, &sigma).expect("same dim");
                let dist = trace_distance(&rho, &sigma).expect("same dim");
                let upper = (1.0 - f * f).max(0.0).sqrt();
                t.record(((1.0 - f) - dist).max(dist - upper));
            }
            // F²(ρ,σ0) + F²(ρ,σ1) ≤ 1 + F(σ0,σ1)
            Property::FidelityInequality2 => {
                let rho = random_density(d, &mut rng);
                let s0 = random_density(d, &mut rng);
                let s1 = random_density(d, &mut rng);
                let f = |a: &DensityOperator, b: &DensityOperator| fidelity(a, b).expect("same dim");
                t.le(f(&rho, &s0).powi(2) + f(&rho, &s1).powi(2), 1.0 + f(&s0, &s1));
            }
            // F²(ρ, Σ p_i σ_i) ≥ Σ p_i F²(ρ, σ_i)
            Property::AdditiveFidelity => {
                let rho = random_density(d, &mut rng);
                let n = rng.gen_range(2..=4);
                let p = random_simplex_point(n, &mut rng);
                let sigmas: Vec<DensityOperator> = (0..n).map(|_| random_density(d, &mut rng)).collect();
                let parts: Vec<(f64, &DensityOperator)> = p.iter().copied().zip(sigmas.iter()).collect();
                let mix = DensityOperator::mixture(&parts).expect("valid mixture");
                let rhs = fidelity(&rho, &mix).expect("same dim").powi(2);
                let lhs: f64 = parts.iter().map(|(w, s)| w * fidelity(&rho, s).expect("same dim").powi(2)).sum();
                t.le(lhs, rhs);
            }
            // D(Σ X_i ψ_i, Σ Y_i ψ_i) ≤ Δ(X, Y)
            Property::ConvOfTraceDistance => {
                let n = rng.gen_range(2..=4);
                let family: Vec<DensityOperator> = (0..n).map(|_| random_pure(d, &mut rng).projector()).collect();
                let x = random_simplex_point(n, &mut rng);
                let y = random_simplex_point(n, &mut rng);
                let mix = |w: &[f64]| {
                    let parts: Vec<(f64, &DensityOperator)> = w.iter().copied().zip(family.iter()).collect();
                    DensityOperator::mixture(&parts).expect("valid mixture")
                };
                let dist = trace_distance(&mix(&x), &mix(&y)).expect("same dim");
                let delta = statistical_distance(&ProbDist::new(x).expect("simplex"), &ProbDist::new(y).expect("simplex"))
                    .expect("same length");
                t.le(dist, delta);
            }
            // |⟨φ|ρ0|φ⟩ − ⟨φ|ρ1|φ⟩| ≤ D(ρ0, ρ1)
            Property::DistanceBound => {
                let (r0, r1) = (random_density(d, &mut rng), random_density(d, &mut rng));
                let phi = random_pure(d, &mut rng);
                let gap = (r0.expectation(&phi).expect("dim") - r1.expectation(&phi).expect("dim")).abs();
                t.le(gap, trace_distance(&r0, &r1).expect("same dim"));
            }
        }
    }
    t.finish(property.name())
}

/// Runs every named check. Deterministic for a given seed.
pub fn verify_suite(seed: u64, instances: u64) -> VerifySummary {
    let mut checks: Vec<CheckOutcome> = Property::ALL
        .iter()
        .enumerate()
        .map(|(i, &p)| property_check(p, instances, seed.wrapping_add(i as u64)))
        .collect();
    let grid = LambdaParam::grid(101);

    let mut t = Tracker::new();
    for &l in &grid {
        for b in 0..2 {
            let basis = encoding_basis(b, l);
            let v = basis.vectors();
            t.eq(v[0].inner(&v[1]).norm(), 0.0);
        }
    }
    checks.push(t.finish("encoding bases orthonormal"));

    let mut t = Tracker::new();
    for &l in &grid {
        let d = trace_distance(&xi_k(0, l, 2).expect("k=2"), &xi_k(1, l, 2).expect("k=2")).expect("dim 4");
        t.eq(d, 2.0 * l.value() - 1.0);
    }
    checks.push(t.finish("two-register D = 2λ−1"));

    let mut t = Tracker::new();
    for &l in &grid {
        let avg = |c| {
            let parts: Vec<DensityOperator> = (0..4u8).map(|r| encrypted_pair_state(c, r >> 1, r & 1, l)).collect();
            let refs: Vec<(f64, &DensityOperator)> = parts.iter().map(|p| (0.25, p)).collect();
            DensityOperator::mixture(&refs).expect("uniform mixture")
        };
        t.eq(avg(0).max_abs_diff(&avg(1)), 0.0);
    }
    checks.push(t.finish("pad hides the committed bit"));

    let mut t = Tracker::with_tolerance(1e-8);
    for &l in LambdaParam::grid(21).iter() {
        t.le(check_set_pair_fidelity(l, 1).expect("arity 1"), 2.0 * l.overlap_term());
    }
    checks.push(t.finish("check-set fidelity F(L0,L1) ≤ 2√(λ(1−λ))"));

    let mut t = Tracker::new();
    let mut rng = seeded_rng(seed ^ 0x5eed);
    let set = CheckSet::single(0, LambdaParam::new(0.9).expect("valid"));
    for i in 0..20 {
        let sigma = random_density(2, &mut rng);
        let r = master_theorem_oracle(&sigma, &set, 30, seed.wrapping_add(i)).expect("qubit");
        t.le(r.max_found, r.bound);
    }
    checks.push(t.finish("purification Pr[pass] ≤ F²(σ,L)"));

    let mut t = Tracker::new();
    for _ in 0..200 {
        let attack = PostselectionAttack::random(4, &mut rng).expect("random attack");
        for &l in LambdaParam::grid(10).iter() {
            t.le(adversary_bob_postselect(&attack, l), 2.0 * l.value() - 1.0);
        }
    }
    checks.push(t.finish("postselection D ≤ 2λ−1"));

    let mut t = Tracker::new();
    for &l in &grid {
        t.eq(kfold_alice_upper(1, l).expect("k"), berlin_bounds(l).p_alice_upper);
        t.eq(kfold_alice_upper(2, l).expect("k"), ours_alice_bound(l));
        t.eq(kfold_bob_exact(2, l).expect("k"), l.value());
    }
    checks.push(t.finish("k-fold identities"));

    let mut t = Tracker::new();
    for curve in [AliceCurve::Berlin, AliceCurve::Ours] {
        match optimize_lambda(curve) {
            Ok(r) => {
                let l = LambdaParam::new(r.lambda_star).expect("in range");
                t.le((curve.alice(l).expect("k") - curve.bob(l).expect("k")).abs(), 0.0);
            }
            Err(_) => t.ok(false),
        }
    }
    checks.push(t.finish("minimax crossing residual"));

    let mut t = Tracker::new();
    match sweep_k(10) {
        Ok(rows) => {
            let argmin = |f: fn(&crate::analysis::SweepRow) -> f64| {
                rows.iter().min_by(|a, b| f(a).total_cmp(&f(b))).map(|r| r.k)
            };
            t.ok(argmin(|r| r.p_upper) == Some(2));
            t.ok(argmin(|r| r.p_lower) == Some(2));
        }
        Err(_) => t.ok(false),
    }
    checks.push(t.finish("two-fold repetition is optimal"));

    let mut t = Tracker::new();
    let lambda = LambdaParam::new(0.859).expect("valid");
    for eta in [0.0, 0.5] {
        let channel = ChannelModel::new(eta).expect("valid eta");
        match run_honest(Protocol::Ours, lambda, channel, 2_000, seed) {
            Ok(stats) => t.ok(stats.freq_abort == 0.0),
            Err(_) => t.ok(false),
        }
    }
    checks.push(t.finish("honest parties never abort"));

    let mut t = Tracker::new();
    let scenario = Scenario {
        protocol: Protocol::Ours,
        lambda,
        channel: ChannelModel::new(0.3).expect("valid eta"),
        adversary: Adversary::None,
    };
    let mut text = String::new();
    let mut originals = Vec::new();
    let _ = scenario.run_with(50, seed, |tr| {
        tr.write_lines(&mut text);
        originals.push(tr.clone());
    });
    match parse_transcripts(&text) {
        Ok(parsed) => {
            t.ok(parsed == originals);
            for tr in &parsed {
                t.ok(tr.is_well_ordered());
            }
        }
        Err(_) => t.ok(false),
    }
    checks.push(t.finish("transcripts well ordered"));

    let passed = checks.iter().filter(|c| c.passed).count();
    VerifySummary {
        seed,
        passed,
        failed: checks.len() - passed,
        checks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn properties_hold_on_small_samples() {
        for p in Property::ALL {
            let r = property_check(p, 300, 1);
            assert!(r.passed, "{r:?}");
            assert!(r.instances >= 300);
        }
    }

    #[test]
    fn tracker_flags_violations() {
        let mut t = Tracker::new();
        t.le(1.0, 0.5);
        t.le(0.0, 1.0);
        let r = t.finish("x");
        assert_eq!((r.instances, r.violations, r.passed), (2, 1, false));
        assert!(!Tracker::new().finish("empty").passed);
    }
}
