use proptest::prelude::*;

use btmlab::cli::config::parse_pairs;
use btmlab::env::{Environment, TrapLaw};
use btmlab::kernel::{
    build_generator, green_closed_form, green_function, transition_row, Boundary,
};
use btmlab::sums::{phi_alpha, v_alpha};
use btmlab::table::ResultTable;
use btmlab::walk::{ks_two_sample, std_normal_cdf};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernel_rows_are_reversible_and_stochastic(
        taps in prop::collection::vec(1.0f64..50.0, 21),
        x in -10i64..=10,
        y in -10i64..=10,
        t in 0.0f64..20.0,
    ) {
        let env = Environment::from_taps(TrapLaw::pareto(1.0).unwrap(), -10, taps, 0).unwrap();
        let gen = build_generator(&env, -10, 10, Boundary::Reflecting).unwrap();
        let rx = transition_row(&gen, x, t, 1e-12).unwrap();
        let ry = transition_row(&gen, y, t, 1e-12).unwrap();
        prop_assert!((rx.total() - 1.0).abs() < 1e-10);
        prop_assert!(rx.probs.iter().all(|&p| p >= 0.0));
        let lhs = env.get(x).unwrap() * rx.prob(y);
        let rhs = env.get(y).unwrap() * ry.prob(x);
        prop_assert!((lhs - rhs).abs() < 1e-10 * lhs.max(1.0));
    }

    #[test]
    fn green_function_is_depth_free(
        taps in prop::collection::vec(1.0f64..1e4, 15),
        y in -6i64..=6,
        z in -6i64..=6,
    ) {
        let env = Environment::from_taps(TrapLaw::pareto(0.5).unwrap(), -7, taps, 0).unwrap();
        let g = green_function(&env, 0, 7, y, z).unwrap();
        prop_assert!((g - green_closed_form(0, 7, y, z)).abs() < 1e-9 * g.max(1.0));
        prop_assert!((g - green_function(&env, 0, 7, z, y).unwrap()).abs() < 1e-9 * g.max(1.0));
    }

    #[test]
    fn scaling_functions_are_monotone(alpha in 0.05f64..4.0, a in 2.0f64..1e6, b in 2.0f64..1e6) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assume!(hi > lo * (1.0 + 1e-9));
        prop_assert!(phi_alpha(hi, alpha).unwrap() < phi_alpha(lo, alpha).unwrap());
        prop_assert!(v_alpha(hi, alpha).unwrap() > v_alpha(lo, alpha).unwrap());
    }

    #[test]
    fn normal_cdf_is_a_cdf(a in -40.0f64..40.0, b in -40.0f64..40.0) {
        let (fa, fb) = (std_normal_cdf(a), std_normal_cdf(b));
        prop_assert!((0.0..=1.0).contains(&fa));
        prop_assert!((a <= b) == (fa <= fb) || fa == fb);
        prop_assert!((fa + std_normal_cdf(-a) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn two_sample_statistic_is_a_symmetric_distance(
        mut a in prop::collection::vec(-5i32..5, 1..60),
        mut b in prop::collection::vec(-5i32..5, 1..60),
    ) {
        a.sort();
        b.sort();
        let fa: Vec<f64> = a.iter().map(|&v| v as f64).collect();
        let fb: Vec<f64> = b.iter().map(|&v| v as f64).collect();
        let d = ks_two_sample(&fa, &fb).unwrap();
        prop_assert!((0.0..=1.0).contains(&d));
        prop_assert_eq!(d, ks_two_sample(&fb, &fa).unwrap());
        prop_assert_eq!(ks_two_sample(&fa, &fa).unwrap(), 0.0);
    }

    #[test]
    fn tables_round_trip_through_csv(
        rows in prop::collection::vec(prop::collection::vec(-1e300f64..1e300, 3), 0..20),
        seed in any::<u64>(),
    ) {
        let mut t = ResultTable::new(&["a", "b", "c"]).with_param("seed", seed);
        for r in &rows {
            t.push_row(r.clone());
        }
        let back = ResultTable::parse(t.to_csv_string().as_bytes()).unwrap();
        prop_assert_eq!(back.rows(), t.rows());
        let expected = seed.to_string();
        prop_assert_eq!(back.param("seed"), Some(expected.as_str()));
    }

    #[test]
    fn config_lines_parse_back(
        pairs in prop::collection::vec(("[a-z_]{1,8}", "[0-9a-z.,-]{0,12}"), 0..10),
    ) {
        let text: String = pairs.iter().map(|(k, v)| format!("{k} = {v}  # note\n")).collect();
        let parsed = parse_pairs(&text).unwrap();
        prop_assert_eq!(parsed.len(), pairs.len());
        for ((k, v), (pk, pv)) in pairs.iter().zip(&parsed) {
            prop_assert_eq!(k, pk);
            prop_assert_eq!(v, pv);
        }
    }
}
