use btmlab::env::{mean_trap, Environment, TrapLaw};
use btmlab::numeric::mean_and_se;
use btmlab::sums::{tail_probe, v_alpha};

#[test]
fn empirical_tail_within_binomial_band() {
    let n = 1_000_000;
    let env = Environment::sample(1.5, 0, n - 1, 3).unwrap();
    for u in [2.0f64, 4.0, 8.0] {
        let p = u.powf(-1.5);
        let frac = env.taps().iter().filter(|&&t| t >= u).count() as f64 / n as f64;
        assert!(
            (frac - p).abs() <= 4.0 * (p / n as f64).sqrt(),
            "u = {u}: {frac} vs {p}"
        );
    }
}

#[test]
fn volume_is_shift_consistent() {
    let env = Environment::sample(0.7, -300, 300, 9).unwrap();
    for x in [-120, -3, 0, 57, 200] {
        for n in [0u64, 1, 10, 64] {
            assert_eq!(
                env.volume(x, n).unwrap(),
                env.shifted(x).volume(0, n).unwrap()
            );
        }
    }
}

#[test]
fn mean_trap_matches_ten_million_draws() {
    let law = TrapLaw::pareto(3.0).unwrap();
    let draws: Vec<f64> = (0..10_000_000).map(|x| law.site_depth(21, x)).collect();
    let (m, se) = mean_and_se(&draws);
    let exact = mean_trap(3.0).unwrap();
    assert!((m - exact).abs() <= 4.0 * se, "{m} vs {exact} (se {se})");
}

#[test]
fn windows_with_the_same_seed_agree() {
    let small = Environment::sample(0.5, -100, 100, 5).unwrap();
    let big = Environment::sample(0.5, -200, 200, 5).unwrap();
    assert_eq!(
        small.slice(-100, 100).unwrap(),
        big.slice(-100, 100).unwrap()
    );
}

#[test]
fn lower_tail_vanishes_below_the_trivial_bound() {
    for (alpha, n) in [(0.8, 1000u64), (0.5, 200), (1.5, 500)] {
        let lambdas = [1.0, 2.0, 4.0, 8.0, 16.0];
        let r = tail_probe(alpha, n, &lambdas, 10_000, 4).unwrap();
        let v = v_alpha(n as f64, alpha).unwrap();
        for (l, p) in lambdas.iter().zip(&r.lower) {
            if v / l < n as f64 {
                assert_eq!(*p, 0.0, "alpha {alpha}, lambda {l}");
            }
        }
    }
}
