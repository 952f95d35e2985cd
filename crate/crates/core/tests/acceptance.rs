//! End-to-end acceptance criteria. Prints one PASS/FAIL line per criterion
//! and exits nonzero if any fails or overruns its time budget.

use std::process::Command;
use std::time::{Duration, Instant};

use coinflip::analysis::{kfold_alice_lower, ours_alice_bound, refined_alice_bound, OptimizationResult, SweepRow};
use coinflip::cli::{property_check, Property};
use coinflip::engine::{
    adversary_alice_product, adversary_bob_discriminate, adversary_bob_postselect, master_theorem_oracle, run_honest,
    ChannelModel, PostselectionAttack, Protocol, RunStats,
};
use coinflip::qmath::random::random_density;
use coinflip::qmath::{helstrom_bound, trace_distance};
use coinflip::seeded_rng;
use coinflip::states::{check_set_pair_fidelity, rho_mixed, xi_k, CheckSet, LambdaParam};

type Outcome = Result<String, String>;
type Criterion = (&'static str, u64, fn() -> Outcome);

fn lam(v: f64) -> LambdaParam {
    LambdaParam::new(v).unwrap()
}

fn cli_json(args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_coinflip"))
        .args(args)
        .args(["--format", "json"])
        .env_remove("COINFLIP_SEED")
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("exit {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr)));
    }
    String::from_utf8(out.stdout).map_err(|e| e.to_string())
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(x: f64, lo: f64, hi: f64) -> bool {
    (lo..=hi).contains(&x)
}

fn criterion_1() -> Outcome {
    let r: OptimizationResult = serde_json::from_str(&cli_json(&["optimize", "--protocol", "berlin"])?).map_err(|e| e.to_string())?;
    ensure((r.lambda_star - 0.9).abs() <= 1e-6, || format!("lambda* = {}", r.lambda_star))?;
    ensure((r.p_star - 0.9).abs() <= 1e-6, || format!("P* = {}", r.p_star))?;
    ensure((r.bias - 0.4).abs() <= 1e-6, || format!("bias = {}", r.bias))?;
    Ok(format!("lambda*={:.6} P*={:.6} bias={:.6}", r.lambda_star, r.p_star, r.bias))
}

fn criterion_2() -> Outcome {
    let r: OptimizationResult = serde_json::from_str(&cli_json(&["optimize", "--protocol", "ours"])?).map_err(|e| e.to_string())?;
    ensure(within(r.lambda_star, 0.858, 0.861), || format!("lambda* = {}", r.lambda_star))?;
    ensure(within(r.p_star, 0.858, 0.861), || format!("P* = {}", r.p_star))?;
    ensure(within(r.bias, 0.358, 0.361), || format!("bias = {}", r.bias))?;
    Ok(format!("lambda*={:.6} P*={:.6} bias={:.6}", r.lambda_star, r.p_star, r.bias))
}

fn criterion_3() -> Outcome {
    let mut worst = 0.0f64;
    for i in 0..1000 {
        let l = lam(0.5 + 0.5 * i as f64 / 999.0);
        let d = trace_distance(&xi_k(0, l, 2).unwrap(), &xi_k(1, l, 2).unwrap()).unwrap();
        worst = worst.max((d - (2.0 * l.value() - 1.0)).abs());
    }
    ensure(worst <= 1e-10, || format!("max |D - (2λ-1)| = {worst:e}"))?;
    Ok(format!("1000 λ values, max deviation {worst:.2e}"))
}

fn criterion_4() -> Outcome {
    let mut rng = seeded_rng(2024);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..1000 {
        let attack = PostselectionAttack::random(4, &mut rng).map_err(|e| e.to_string())?;
        for i in 0..10 {
            let l = lam(0.5 + 0.5 * i as f64 / 9.0);
            worst = worst.max(adversary_bob_postselect(&attack, l) - (2.0 * l.value() - 1.0));
        }
    }
    ensure(worst <= 1e-9, || format!("max excess {worst:e}"))?;
    Ok(format!("10^4 (attack, λ) pairs, max D − (2λ−1) = {worst:.2e}"))
}

fn criterion_5() -> Outcome {
    let mut rng = seeded_rng(5);
    let set = CheckSet::single(0, lam(0.9));
    let (mut worst_excess, mut worst_gap) = (f64::NEG_INFINITY, 0.0f64);
    for i in 0..200 {
        let sigma = random_density(2, &mut rng);
        let r = master_theorem_oracle(&sigma, &set, 40, 1000 + i).map_err(|e| e.to_string())?;
        worst_excess = worst_excess.max(r.max_found - r.bound);
        worst_gap = worst_gap.max(r.bound - r.max_found);
    }
    ensure(worst_excess <= 1e-9, || format!("sampled pass probability exceeds F² by {worst_excess:e}"))?;
    ensure(worst_gap < 0.02, || format!("gap {worst_gap}"))?;
    Ok(format!("200 states, max excess {worst_excess:.2e}, max gap {worst_gap:.2e}"))
}

fn criterion_6() -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    for i in 0..1000 {
        let l = lam(0.5 + 0.5 * i as f64 / 999.0);
        let f = check_set_pair_fidelity(l, 1).map_err(|e| e.to_string())?;
        worst = worst.max(f - 2.0 * (l.value() * (1.0 - l.value())).sqrt());
    }
    ensure(worst <= 1e-8, || format!("excess {worst:e}"))?;
    Ok(format!("1000 λ values, max F(L0,L1) − 2√(λ(1−λ)) = {worst:.2e}"))
}

fn criterion_7() -> Outcome {
    let n = 100_000;
    let mut runs: Vec<(f64, RunStats)> = Vec::new();
    for eta in [0.0, 0.5, 0.9] {
        let s = run_honest(Protocol::Ours, lam(0.859), ChannelModel::new(eta).unwrap(), n, 7).map_err(|e| e.to_string())?;
        ensure(s.freq_abort == 0.0, || format!("η={eta}: aborts {}", s.freq_abort))?;
        ensure(s.discarded == 0, || format!("η={eta}: {} discarded", s.discarded))?;
        let sd = (0.25 / s.completed() as f64).sqrt();
        ensure((s.freq_x0 - 0.5).abs() <= 4.0 * sd, || format!("η={eta}: freq_x0 = {}", s.freq_x0))?;
        runs.push((eta, s));
    }
    for pair in runs.windows(2) {
        let (a, b) = (&pair[0].1, &pair[1].1);
        let sd = (0.25 / a.completed() as f64 + 0.25 / b.completed() as f64).sqrt();
        ensure((a.freq_x0 - b.freq_x0).abs() <= 4.0 * sd, || {
            format!("freq_x0 differs between η={} and η={}", pair[0].0, pair[1].0)
        })?;
    }
    let fx: Vec<String> = runs.iter().map(|(e, s)| format!("η={e}: x0={:.4}", s.freq_x0)).collect();
    Ok(format!("no aborts; {}", fx.join(", ")))
}

fn criterion_8() -> Outcome {
    let l = lam(0.9);
    let helstrom = helstrom_bound(&rho_mixed(0, l), &rho_mixed(1, l)).map_err(|e| e.to_string())?;
    let bob = adversary_bob_discriminate(Protocol::Berlin, l, 0, 1_000_000, 8).map_err(|e| e.to_string())?;
    let wb = bob.adversary_win_rate.ok_or("missing win rate")?;
    let sb = bob.sigma(0.9);
    ensure((wb - 0.9).abs() <= 4.0 * sb, || format!("Bob win rate {wb}"))?;
    ensure(wb <= helstrom + 4.0 * sb, || format!("Bob win rate {wb} above Helstrom {helstrom}"))?;
    let alice = adversary_alice_product(l, 1, 1_000_000, 9).map_err(|e| e.to_string())?;
    let wa = alice.adversary_win_rate.ok_or("missing win rate")?;
    ensure((wa - 0.9).abs() <= 4.0 * alice.sigma(0.9), || format!("Alice win rate {wa}"))?;
    Ok(format!("Bob {wb:.5} (Helstrom {helstrom:.6}), Alice {wa:.5}, 4σ = {:.5}", 4.0 * sb))
}

fn criterion_9() -> Outcome {
    let rows: Vec<SweepRow> = serde_json::from_str(&cli_json(&["sweep", "--k-max", "10"])?).map_err(|e| e.to_string())?;
    ensure(rows.len() == 10, || format!("{} rows", rows.len()))?;
    let argmin = |f: fn(&SweepRow) -> f64| rows.iter().min_by(|a, b| f(a).total_cmp(&f(b))).map(|r| r.k);
    ensure(argmin(|r| r.p_upper) == Some(2), || "p_upper minimum not at k=2".into())?;
    ensure(argmin(|r| r.p_lower) == Some(2), || "p_lower minimum not at k=2".into())?;
    let p2 = rows[1].p_upper;
    ensure(within(p2, 0.858, 0.861), || format!("k=2 p_upper = {p2}"))?;
    Ok(format!("minima at k=2; p_upper(2)={p2:.6}, p_lower(2)={:.6}", rows[1].p_lower))
}

fn criterion_10() -> Outcome {
    let l = lam(0.858);
    let v = refined_alice_bound(l, 50, 10);
    let lower = kfold_alice_lower(2, l).unwrap();
    let upper = ours_alice_bound(l);
    ensure(v >= lower - 1e-6 && v <= upper + 1e-6, || format!("{v} outside [{lower}, {upper}]"))?;
    ensure((v - 0.858).abs() <= 2e-3, || format!("{v} not within 2e-3 of 0.858"))?;
    Ok(format!("value {v:.6} in [{lower:.6}, {upper:.6}]"))
}

fn criterion_11() -> Outcome {
    let mut parts = Vec::new();
    for (i, p) in Property::ALL.into_iter().enumerate() {
        let r = property_check(p, 10_000, 1100 + i as u64);
        ensure(r.passed && r.instances == 10_000, || format!("{}: {} violations", r.name, r.violations))?;
        parts.push(format!("{} ok", r.name));
    }
    Ok(parts.join(", "))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("Berlin baseline", 1, criterion_1),
        ("two-register minimax", 1, criterion_2),
        ("two-register distinguishability", 5, criterion_3),
        ("loss tolerance under postselection", 60, criterion_4),
        ("purification oracle vs F²", 120, criterion_5),
        ("check-set fidelity bound", 30, criterion_6),
        ("honest behavior under loss", 60, criterion_7),
        ("adversaries reach their bounds", 120, criterion_8),
        ("k-fold sweep", 10, criterion_9),
        ("refined Alice bound", 600, criterion_10),
        ("distance and fidelity inequalities", 60, criterion_11),
    ];
    let mut failures = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let over = elapsed > Duration::from_secs(*budget);
        let (status, detail) = match (&result, over) {
            (Ok(d), false) => ("PASS", d.clone()),
            (Ok(d), true) => ("FAIL", format!("{d}; over the {budget} s budget")),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        if status == "FAIL" {
            failures += 1;
        }
        println!("criterion {:>2} {status} {name}: {detail} [{:.2} s]", i + 1, elapsed.as_secs_f64());
    }
    println!("{} of 11 criteria passed", 11 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
