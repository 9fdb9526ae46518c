use btmlab::env::Environment;
use btmlab::kernel::{
    build_generator, expected_exit_time, generator_for, green_function, transition_row,
    transition_rows, Boundary,
};
use btmlab::rng::{derive_seed, tags, StreamRng};

const TOL: f64 = 1e-11;

fn envs() -> impl Iterator<Item = Environment> {
    (0..5u64).map(|i| {
        Environment::sample(3.0, -100, 100, derive_seed(77, tags::ENV_ENSEMBLE, i)).unwrap()
    })
}

#[test]
fn rows_are_stochastic_up_to_leak() {
    for env in envs() {
        let gen = build_generator(&env, -100, 100, Boundary::Absorbing).unwrap();
        for x in [-30, 0, 12] {
            for row in transition_rows(&gen, x, &[0.5, 5.0, 40.0], TOL).unwrap() {
                assert!((row.total() + row.leak - 1.0).abs() <= 10.0 * TOL);
            }
        }
    }
}

#[test]
fn reversibility_on_random_triples() {
    for (i, env) in envs().enumerate() {
        let gen = build_generator(&env, -100, 100, Boundary::Absorbing).unwrap();
        let mut rng = StreamRng::new(78, tags::BOOTSTRAP, i as u64);
        for _ in 0..100 {
            let x = rng.below(61) as i64 - 30;
            let y = rng.below(61) as i64 - 30;
            let t = 50.0 * rng.uniform();
            let pxy = transition_row(&gen, x, t, TOL).unwrap().prob(y);
            let pyx = transition_row(&gen, y, t, TOL).unwrap().prob(x);
            let (tx, ty) = (env.get(x).unwrap(), env.get(y).unwrap());
            assert!((tx * pxy - ty * pyx).abs() <= 10.0 * TOL, "({x}, {y}, {t})");
        }
    }
}

#[test]
fn semigroup_on_a_201_site_window() {
    for env in envs() {
        let gen = build_generator(&env, -100, 100, Boundary::Absorbing).unwrap();
        let rows = transition_rows(&gen, 0, &[5.0, 10.0], TOL).unwrap();
        let from: Vec<_> = (-50..=50)
            .map(|z| (z, transition_row(&gen, z, 5.0, TOL).unwrap()))
            .collect();
        for y in -20..=20 {
            let composed: f64 = from.iter().map(|(z, r)| rows[0].prob(*z) * r.prob(y)).sum();
            assert!((composed - rows[1].prob(y)).abs() <= 100.0 * TOL, "y = {y}");
        }
    }
}

#[test]
fn green_function_integrates_to_exit_time() {
    for env in envs() {
        let n = 12;
        for y in [-11, -4, 0, 7] {
            let total: f64 = (1 - n..n)
                .map(|z| green_function(&env, 0, n, y, z).unwrap() * env.get(z).unwrap())
                .sum();
            let exit = expected_exit_time(&env, 0, n, y).unwrap();
            assert!(
                ((total - exit) / exit).abs() < 1e-10,
                "y = {y}: {total} vs {exit}"
            );
        }
    }
}

#[test]
fn on_diagonal_decay_is_at_most_diffusive() {
    let times = [1.0, 3.0, 10.0, 30.0, 100.0, 300.0, 1000.0, 3000.0, 10000.0];
    for i in 0..5u64 {
        let env = Environment::sample(3.0, 0, 0, derive_seed(79, tags::ENV_ENSEMBLE, i)).unwrap();
        let (_, gen) = generator_for(&env, 0, 10000.0, 1e-10).unwrap();
        for (row, t) in transition_rows(&gen, 0, &times, 1e-10)
            .unwrap()
            .iter()
            .zip(times)
        {
            let scaled = row.density(&gen, 0) * t.sqrt();
            assert!(scaled <= 5.0, "t = {t}: {scaled}");
        }
    }
}
