use fts_core::gk::check_gk;
use fts_core::inequality::{power_gap_inequality, sum_power_sandwich};
use fts_core::linplant::{controller_exponents, observer_exponents};
use fts_core::monitor::{default_gk_grid, gamma_budget, ConditionSum};
use fts_core::{GkFunction, LyapunovFunction};
use proptest::prelude::*;

fn pairs() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    prop::collection::vec((0.0..1e3f64, 0.0..1.0f64), 1..=20)
        .prop_map(|v| v.into_iter().map(|(a, t)| (a, a * t)).unzip())
}

proptest! {
    #[test]
    fn power_gap_holds((a, b) in pairs(), r in 0.01..0.99f64) {
        prop_assert!(power_gap_inequality(&a, &b, r).unwrap().holds);
    }

    #[test]
    fn sandwich_holds(z in prop::collection::vec(0.0..1e4f64, 1..=20), r in 0.01..=1.0f64) {
        let s = sum_power_sandwich(&z, r).unwrap();
        prop_assert!(s.holds, "{:?}", s);
    }

    #[test]
    fn gk_closed_under_compose_and_add(a1 in 0.1..10.0f64, b1 in 0.2..3.0f64, a2 in 0.1..10.0f64, b2 in 0.2..3.0f64) {
        let f = GkFunction::power_law(a1, b1);
        let g = GkFunction::power_law(a2, b2);
        let grid = default_gk_grid();
        prop_assert!(check_gk(&f.compose(&g), &grid).unwrap().ok);
        prop_assert!(check_gk(&f.add(&g), &grid).unwrap().ok);
        let r = 1.7;
        prop_assert!((f.compose(&g).eval(r) - f.eval(g.eval(r))).abs() <= 1e-12 * (1.0 + f.eval(g.eval(r))));
    }

    #[test]
    fn quadratic_dominates_smallest_eigenvalue(m in prop::collection::vec(-3.0..3.0f64, 9), x in prop::collection::vec(-10.0..10.0f64, 3)) {
        // P = MᵀM + I/2
        let mut p = [0.0; 9];
        for i in 0..3 {
            for j in 0..3 {
                p[3 * i + j] = (0..3).map(|k| m[3 * k + i] * m[3 * k + j]).sum::<f64>() + if i == j { 0.5 } else { 0.0 };
            }
        }
        let v = LyapunovFunction::quadratic(3, &p).unwrap();
        let lm = v.lambda_min().unwrap();
        prop_assert!(lm >= 0.5 - 1e-9);
        let n2: f64 = x.iter().map(|t| t * t).sum();
        prop_assert!(v.value(&x) >= lm * n2 * (1.0 - 1e-9) - 1e-12);
    }

    #[test]
    fn gamma_nondecreasing_in_norm(r1 in 0.0..50.0f64, dr in 0.0..50.0f64, c in 0.1..5.0f64, beta in 0.05..0.95f64, n_f in 1usize..6) {
        let a = [
            GkFunction::power_law(2.0, 2.0),
            GkFunction::power_law(0.5, 1.0),
            GkFunction::zero(),
            GkFunction::power_law(0.1, 3.0),
        ];
        let g1 = gamma_budget(r1, &a, n_f, c, beta).unwrap();
        let g2 = gamma_budget(r1 + dr, &a, n_f, c, beta).unwrap();
        prop_assert!(g2 >= g1 * (1.0 - 1e-12));
    }

    #[test]
    fn prefix_max_bounds_total(terms in prop::collection::vec(-5.0..5.0f64, 0..40)) {
        let s = ConditionSum::from_terms(terms.clone());
        prop_assert!(s.prefix_max >= s.total - 1e-12);
        prop_assert!(s.prefix_max >= 0.0);
        let mut acc = 0.0;
        for t in terms {
            acc += t;
            prop_assert!(acc <= s.prefix_max + 1e-12);
        }
    }

    #[test]
    fn observer_exponents_in_unit_interval(n in 1usize..=6, t in 0.001..0.999f64) {
        let alpha = 1.0 - t / n as f64;
        let e = observer_exponents(n, alpha);
        prop_assert_eq!(e.len(), n);
        for w in e.windows(2) {
            prop_assert!(w[1] < w[0]);
        }
        prop_assert!(e.iter().all(|&v| v > 0.0 && v <= 1.0));
    }

    #[test]
    fn controller_exponents_harmonic(n in 1usize..=6, beta in 0.05..0.999f64) {
        // 1/β_j is an arithmetic sequence ending at 1/β_{n+1} = 1
        let e = controller_exponents(n, beta).unwrap();
        prop_assert!((e[n - 1] - beta).abs() < 1e-15);
        for (j, v) in e.iter().enumerate() {
            let want = 1.0 + (n - j) as f64 * (1.0 / beta - 1.0);
            prop_assert!((1.0 / v - want).abs() < 1e-9 * want);
        }
    }
}
