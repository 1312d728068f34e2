use proptest::prelude::*;

use saddle_core::fgm::{next_alpha, run_fgm};
use saddle_core::mirror_prox::{assemble_saddle_operator, run_mirror_prox, stack, MpOptions, ViOperator};
use saddle_core::objective::{CompositeObjective, QuadraticOracle, SetIndicator};
use saddle_core::problem::{FeasibleSet, Vector};
use saddle_core::sliding::{alg5_params, SlidingSpec};
use saddle_core::spectral::{spectral, spectral_norm};
use saddle_core::testbed::{gen_bilinear_with, gen_quadratic, gen_quadratic_saddle, Instance};

fn vec_strategy(n: usize) -> impl Strategy<Value = Vector> {
    proptest::collection::vec(-5.0f64..5.0, n).prop_map(Vector::from_vec)
}

fn instance(seed: u64, bilinear: bool, n: usize, m: usize, cond: f64, mu_x: f64, mu_y: f64) -> Instance {
    if bilinear {
        Instance::Bilinear(gen_bilinear_with(n, m, cond, mu_x, mu_y, seed).unwrap())
    } else {
        Instance::Quadratic(gen_quadratic_saddle(n, m, cond, mu_x, mu_y, 2.0, 2.0, seed).unwrap())
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn next_alpha_solves_its_quadratic(big_a in 0.0f64..1e3, l in 1e-3f64..1e3) {
        let a = next_alpha(big_a, l);
        prop_assert!(a > 0.0);
        prop_assert!((l * a * a - big_a - a).abs() <= 1e-9 * (big_a + a).max(1.0));
    }

    #[test]
    fn ball_projection_is_nonexpansive(u in vec_strategy(4), v in vec_strategy(4), c in vec_strategy(4), r in 0.1f64..5.0) {
        let set = FeasibleSet::ball(&c, r);
        let (pu, pv) = (set.project(&u), set.project(&v));
        prop_assert!(set.contains(&pu, 1e-12));
        prop_assert!((&pu - &pv).norm() <= (&u - &v).norm() + 1e-12);
        prop_assert!((set.project(&pu) - &pu).norm() <= 1e-12);
    }

    #[test]
    fn alg5_ranges(l_r in 1e-3f64..1e3, ratio in 1.0f64..1e4, mu_frac in 1e-4f64..1.0, split in 0.0f64..1.0, eps in 1e-10f64..1.0) {
        let l_g = l_r * ratio;
        let mu = mu_frac * l_r;
        let spec = SlidingSpec::new(l_r, l_g, mu * split, mu * (1.0 - split));
        let p = alg5_params(&spec, eps, 1.0).unwrap();
        prop_assert!(p.ranges_hold(), "{:?}", p);
        prop_assert!(p.t_inner == p.inner_per_restart * p.inner_restarts);
        prop_assert!(p.delta_r > 0.0 && p.delta_g > 0.0);
    }

    #[test]
    fn saddle_operator_is_strongly_monotone(seed in 0u64..1000, bilinear: bool, z1 in vec_strategy(7), z2 in vec_strategy(7)) {
        let inst = instance(seed, bilinear, 3, 4, 30.0, 0.5, 2.0);
        let p = inst.to_problem();
        let mut op = assemble_saddle_operator(&p).unwrap();
        let d = &z1 - &z2;
        let lhs = (op.evaluate(&z1).unwrap() - op.evaluate(&z2).unwrap()).dot(&d);
        prop_assert!(lhs >= op.modulus() * d.norm_squared() - 1e-9);
    }

    #[test]
    fn operator_vanishes_at_closed_form(seed in 0u64..1000, bilinear: bool) {
        let inst = instance(seed, bilinear, 4, 3, 10.0, 1.0, 0.5);
        let (xs, ys) = inst.closed_form();
        let p = inst.to_problem();
        let mut op = assemble_saddle_operator(&p).unwrap();
        prop_assert!(op.evaluate(&stack(xs, ys)).unwrap().norm() <= 1e-9);
    }

    #[test]
    fn mirror_prox_average_bound(seed in 0u64..1000, bilinear: bool, n in 1usize..60) {
        let inst = instance(seed, bilinear, 3, 3, 10.0, 1.0, 1.0);
        let (xs, ys) = inst.closed_form();
        let zs = stack(xs, ys);
        let p = inst.to_problem();
        let mut op = assemble_saddle_operator(&p).unwrap();
        let (l, mu) = (op.lipschitz(), op.modulus());
        let z0 = Vector::zeros(6);
        let rep = run_mirror_prox(&mut op, &z0, n, &MpOptions::default()).unwrap();
        let d2 = (&rep.x_final - &zs).norm_squared();
        prop_assert!(d2 <= l * zs.norm_squared() / (2.0 * mu * n as f64) + 1e-9);
    }

    #[test]
    fn fgm_values_bounded_by_rate(seed in 0u64..1000, n in 2usize..20) {
        let (h, b) = gen_quadratic(n, 0.01, 10.0, seed);
        let xs = h.clone().cholesky().unwrap().solve(&b);
        let f = |x: &Vector| 0.5 * x.dot(&(&h * x)) - b.dot(x);
        let fs = f(&xs);
        let gap = |x: &Vector| f(x) - fs;
        let mut oracle = QuadraticOracle::new(h.clone(), b.clone());
        let mut ind = SetIndicator { set: FeasibleSet::AllSpace };
        let mut obj = CompositeObjective::new(&mut oracle, &mut ind, 10.0, 0.01);
        let rep = run_fgm(&mut obj, &Vector::zeros(n), 40, 0.0, Some(&gap)).unwrap();
        prop_assert_eq!(rep.smooth_queries, 40);
        for row in rep.history.iter().skip(1) {
            let k = row.iter as f64;
            prop_assert!(row.gap <= 2.0 * 10.0 * xs.norm_squared() / ((k + 1.0) * (k + 1.0)) + 1e-9);
        }
    }

    #[test]
    fn spectrum_matches_norm(seed in 0u64..1000, n in 1usize..6, m in 1usize..6) {
        let inst = gen_bilinear_with(n, m, 20.0, 1.0, 1.0, seed).unwrap();
        let s = spectral(&inst.a).unwrap();
        let norm = spectral_norm(&inst.a);
        prop_assert!((s.lambda_max - norm * norm).abs() <= 1e-9 * s.lambda_max.max(1.0));
        prop_assert!(s.lambda_min_plus > 0.0 && s.lambda_min_plus <= s.lambda_max * (1.0 + 1e-12));
        prop_assert!(s.rank <= n.min(m));
        prop_assert_eq!(s.kernel_basis.ncols(), n - s.rank);
    }
}
