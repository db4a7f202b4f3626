//! Property tests. The runner seed comes from `HOPFSEG_SEED` so failures
//! reproduce.

mod common;

use common::*;
use hopfseg::analytic::{Factor, Polynomial};
use hopfseg::branch::{build_slit_disk, primitive};
use hopfseg::desingularize::beta_moment;
use hopfseg::diffusion::{solve, DiffusionConfig};
use hopfseg::mobius::{pushforward_hopf, MobiusMap};
use hopfseg::nodal::{trace, verify_index};
use hopfseg::quadrature::{integrate_real, QuadOptions};
use hopfseg::segregation::reconstruct;
use hopfseg::{Func, C64};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};
use rand::SeedableRng;
use std::f64::consts::PI;

fn config(cases: u32) -> Config {
    Config {
        cases,
        rng_seed: RngSeed::Fixed(seed()),
        failure_persistence: None,
        ..Config::default()
    }
}

fn point(max_radius: f64) -> impl Strategy<Value = C64> {
    (0.0..1.0f64, 0.0..2.0 * PI).prop_map(move |(r, t)| C64::from_polar(max_radius * r.sqrt(), t))
}

fn mobius() -> impl Strategy<Value = MobiusMap<f64>> {
    (point(0.6), 0.0..2.0 * PI).prop_map(|(a, t)| MobiusMap::new(a, t).unwrap())
}

/// Functions with two or three simple or double roots, pairwise apart.
fn rooted() -> impl Strategy<Value = Func> {
    (any::<u64>(), 2usize..=3).prop_map(|(s, n)| {
        let mut rng = rand::rngs::StdRng::seed_from_u64(s);
        let roots = separated_points(&mut rng, n, 0.6, 0.2);
        let factors = roots.iter().enumerate().map(|(i, &z)| Factor::new(z, 1 + (i as u32 % 2))).collect();
        Func::new(c(0.3, -0.1), factors, vec![], vec![]).unwrap()
    })
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn mobius_inverse_compose_and_disk(m in mobius(), n in mobius(), z in point(0.99), t in 0.0..2.0 * PI) {
        prop_assert!((m.invert().apply(m.apply(z)) - z).norm() < 1e-12);
        prop_assert!((m.compose(&n).apply(z) - m.apply(n.apply(z))).norm() < 1e-12);
        prop_assert!(m.apply(z).norm() < 1.0);
        prop_assert!((m.apply(C64::from_polar(1.0, t)).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pushforward_moves_roots_and_transforms(f in rooted(), m in (point(0.3), 0.0..2.0 * PI).prop_map(|(a, t)| MobiusMap::new(a, t).unwrap()), z in point(0.9)) {
        let g = pushforward_hopf(&f, &m).unwrap();
        prop_assert_eq!(g.interior_order(), f.interior_order());
        for r in f.roots() {
            prop_assert_eq!(g.order_at(m.invert().apply(r.root)), r.mult);
        }
        let d = m.derivative(z);
        let want = f.eval_unchecked(m.apply(z)) * d * d;
        prop_assert!((g.eval_unchecked(z) - want).norm() <= 1e-10 * (1.0 + want.norm()));
    }

    #[test]
    fn primitive_differentiates_to_twice_the_root(f in rooted(), z in point(0.85)) {
        prop_assume!(f.roots().iter().all(|r| (r.root - z).norm() > 0.1));
        let base = f.odd_zeros()[0].location;
        let slit = build_slit_disk(&f, base).unwrap();
        prop_assume!(!slit.on_cut_interior(z) && slit.cuts().iter().all(|k| k.distance(z) > 0.01));
        prop_assert!(primitive(&f, &slit, base, 1e-12).unwrap().value.norm() < 1e-12);
        let h = 1e-4;
        let fp = primitive(&f, &slit, z + h, 1e-12).unwrap().value;
        let fm = primitive(&f, &slit, z - h, 1e-12).unwrap().value;
        let deriv = (fp - fm) / (2.0 * h);
        let want = f.eval(z).unwrap() * 4.0;
        prop_assert!((deriv * deriv - want).norm() <= 1e-6 * (1.0 + want.norm()), "{} vs {}", deriv * deriv, want);
    }

    #[test]
    fn winding_counts_enclosed_roots(seed in any::<u64>(), center in point(0.5), radius in 0.1..0.6f64) {
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let roots = separated_points(&mut rng, 4, 0.9, 0.05);
        prop_assume!(roots.iter().all(|r| ((r - center).norm() - radius).abs() > 0.02));
        let mut p = Polynomial::one();
        for &r in &roots {
            p = p.mul(&Polynomial::linear(c(1.0, 0.0), -r));
        }
        let inside = roots.iter().filter(|r| (*r - center).norm() < radius).count() as i64;
        prop_assert_eq!(p.winding(center, radius).unwrap(), inside);
    }

    #[test]
    fn beta_moment_matches_quadrature(k in 0u32..6, q in 0u32..6) {
        let oracle = integrate_real(
            |t: f64| t.powi(k as i32) * (1.0 - t).powf(q as f64 / 2.0),
            0.0,
            1.0,
            QuadOptions::abs(1e-13),
        )
        .value
        .re;
        prop_assert!((beta_moment(k, q) - oracle).abs() <= 1e-9, "k={} q={}", k, q);
    }

    #[test]
    fn diffusion_config_rejects_overlap_and_negatives(samples in 16usize..64, at in 0usize..16, v in 0.01..1.0f64) {
        let bump = |lo: usize, hi: usize| (0..samples).map(|k| if k >= lo && k < hi { 1.0 } else { 0.0 }).collect::<Vec<f64>>();
        let half = samples / 2;
        prop_assert!(DiffusionConfig::new(vec![bump(0, half), bump(half, samples)], 1.0, 32).is_ok());
        let mut overlap = bump(half, samples);
        overlap[at % half] = v;
        prop_assert!(DiffusionConfig::new(vec![bump(0, half), overlap], 1.0, 32).is_err());
        let mut negative = bump(0, half);
        negative[half + at % (samples - half)] = -v;
        prop_assert!(DiffusionConfig::new(vec![negative], 1.0, 32).is_err());
    }
}

proptest! {
    #![proptest_config(config(12))]

    #[test]
    fn diffusion_maximum_principle_and_sign_structure(arcs in 2usize..5, mu in 0.0..1e3f64, amp in prop::collection::vec(0.1..2.0f64, 4)) {
        let samples = 64;
        let g: Vec<Vec<f64>> = (0..arcs)
            .map(|j| {
                (0..samples)
                    .map(|k| {
                        let t = k as f64 / samples as f64 * arcs as f64;
                        if t.floor() as usize == j { amp[j] * (PI * t.fract()).sin() } else { 0.0 }
                    })
                    .collect()
            })
            .collect();
        let cfg = DiffusionConfig::new(g.clone(), mu, 32).unwrap();
        let field = solve(&cfg).unwrap();
        prop_assert!(field.min_value() >= 0.0);
        for (j, gj) in g.iter().enumerate() {
            let top = gj.iter().cloned().fold(0.0, f64::max);
            prop_assert!(field.max_value(j) <= top + 1e-9, "species {}: {} > {}", j, field.max_value(j), top);
            prop_assert!(field.superharmonic_violation(j) <= 1e-6, "species {}: {}", j, field.superharmonic_violation(j));
        }
    }

    #[test]
    fn index_formulas_on_even_functions(s in any::<u64>()) {
        let mut rng = rand::rngs::StdRng::seed_from_u64(s);
        let (f, base) = random_even(&mut rng);
        prop_assume!(resolvable(&f, base, 128));
        let state = reconstruct(&f, base, 128).unwrap();
        let graph = trace(&state).unwrap();
        prop_assert!(graph.issues.is_empty(), "{:?}", graph.issues);
        let r = verify_index(&graph);
        prop_assert!(r.formula_check && r.euler_check && r.degree_check, "{:?}", r);
    }

    #[test]
    fn index_formulas_on_moved_five_point(m in (point(0.4), 0.0..2.0 * PI).prop_map(|(a, t)| MobiusMap::new(a, t).unwrap())) {
        let (f, base) = pushed(&monomial(3), c(0.0, 0.0), &m);
        let state = reconstruct(&f, base, 128).unwrap();
        let graph = trace(&state).unwrap();
        prop_assert!(graph.issues.is_empty(), "{:?}", graph.issues);
        let r = verify_index(&graph);
        prop_assert_eq!((r.m, r.n, r.t, r.index_sum), (5, 5, 1, 3));
        prop_assert!(r.formula_check && r.euler_check && r.degree_check);
    }
}
