use coinflip::analysis::{berlin_bounds, bounds, kfold_alice_lower, kfold_bob_exact};
use coinflip::engine::{adversary_alice_product, adversary_bob_discriminate, run_honest, ChannelModel, Protocol};
use coinflip::states::LambdaParam;

fn lam(v: f64) -> LambdaParam {
    LambdaParam::new(v).unwrap()
}

const N: u64 = 40_000;

#[test]
fn discriminating_bob_stays_under_exact_bound() {
    for protocol in [Protocol::Berlin, Protocol::Ours] {
        for l in [0.5, 0.7, 0.859, 0.95] {
            let l = lam(l);
            let exact = bounds(protocol, l, 1).unwrap().p_bob;
            for target in [0, 1] {
                let s = adversary_bob_discriminate(protocol, l, target, N, 100 + target as u64).unwrap();
                let w = s.adversary_win_rate.unwrap();
                assert!(w <= exact + 4.0 * s.sigma(exact), "{protocol:?} λ={} target {target}: {w} > {exact}", l.value());
                assert!((w - exact).abs() <= 4.0 * s.sigma(exact), "{protocol:?} λ={}: {w} vs {exact}", l.value());
            }
        }
    }
}

#[test]
fn encrypted_registers_leak_only_lambda() {
    let l = lam(0.859);
    assert!((kfold_bob_exact(2, l).unwrap() - 0.859).abs() < 1e-12);
    let s = adversary_bob_discriminate(Protocol::Ours, lam(0.5), 0, N, 3).unwrap();
    let w = s.adversary_win_rate.unwrap();
    assert!((w - 0.5).abs() <= 4.0 * s.sigma(0.5));
}

#[test]
fn product_alice_matches_lower_bound() {
    for (k, l) in [(1usize, 0.9), (2, 0.859), (2, 0.7)] {
        let l = lam(l);
        let p = kfold_alice_lower(k as u32, l).unwrap();
        let s = adversary_alice_product(l, k, N, 40 + k as u64).unwrap();
        let w = s.adversary_win_rate.unwrap();
        assert!((w - p).abs() <= 4.0 * s.sigma(p), "k={k} λ={}: {w} vs {p}", l.value());
    }
    let l = lam(0.9);
    assert!((kfold_alice_lower(1, l).unwrap() - berlin_bounds(l).p_alice_upper).abs() < 1e-12);
}

#[test]
fn honest_runs_never_abort_under_loss() {
    for protocol in [Protocol::Berlin, Protocol::Ours, Protocol::Unencrypted] {
        for eta in [0.0, 0.6] {
            let s = run_honest(protocol, lam(0.8), ChannelModel::new(eta).unwrap(), 5_000, 21).unwrap();
            assert_eq!(s.freq_abort, 0.0);
            assert!((s.freq_x0 + s.freq_x1 - 1.0).abs() < 1e-12);
            assert!((s.freq_x0 - 0.5).abs() <= 4.0 * s.sigma(0.5));
            if eta > 0.0 {
                assert!(s.mean_restarts > 0.0);
            }
        }
    }
}
