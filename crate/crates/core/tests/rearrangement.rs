mod common;

use edgeworth_rearrange::metrics::lp_error;
use edgeworth_rearrange::rearrangement::{
    eta_p, first_inversion, pullback, rearrange, rearrange_by_definition, sort_by_exchanges,
    sorting_step, weighted_rearrange, GridFunction, WeightCdf,
};
use common::{strict_gain_instance, strict_gain_parameters};
use itertools::Itertools;
use proptest::prelude::*;
use proptest::strategy::ValueTree;

const NORMS: [f64; 5] = [1.0, 2.0, 3.0, 4.0, f64::INFINITY];

/// Values on a coarse lattice so ties show up regularly.
fn values(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(
        prop_oneof![(-50i32..50).prop_map(|k| k as f64 / 4.0), -20.0f64..20.0],
        len,
    )
}

fn grid(v: Vec<f64>) -> GridFunction {
    GridFunction::new(0.0, 1.0, v).unwrap()
}

fn nondecreasing(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

fn sorted(v: &[f64]) -> Vec<f64> {
    nondecreasing(v.to_vec())
}

fn power_sum(a: &[f64], b: &[f64], p: f64) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs().powf(p)).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn distribution_is_preserved_and_rearrangement_is_idempotent(v in values(2..300)) {
        let f = grid(v.clone());
        let r = rearrange(&f);
        prop_assert_eq!(sorted(r.values()), sorted(&v));
        prop_assert!(r.is_nondecreasing());
        prop_assert_eq!(rearrange(&r), r.clone());
        prop_assert!(r.same_mesh(&f));
    }

    #[test]
    fn weak_contraction(pair in (2usize..250).prop_flat_map(|m| (values(m..m + 1), values(m..m + 1)))) {
        let (fhat, f0) = pair;
        let fhat = grid(fhat);
        let f0 = grid(nondecreasing(f0));
        let r = rearrange(&fhat);
        for p in NORMS {
            let before = lp_error(&fhat, &f0, p).unwrap();
            let after = lp_error(&r, &f0, p).unwrap();
            prop_assert!(after <= before + 1e-12, "p = {}: {} > {}", p, after, before);
        }
    }

    #[test]
    fn each_sorting_step_weakly_reduces_error(
        pair in (2usize..40).prop_flat_map(|m| (values(m..m + 1), values(m..m + 1))),
        p in prop_oneof![Just(1.0), Just(1.5), Just(2.0), Just(3.0), 1.0f64..6.0],
    ) {
        let (start, f0) = pair;
        let f0 = nondecreasing(f0);
        let mut cur = start.clone();
        let mut before = power_sum(&cur, &f0, p);
        while let Some((l, m)) = first_inversion(&cur) {
            cur = sorting_step(&cur, l, m).unwrap();
            let after = power_sum(&cur, &f0, p);
            prop_assert!(after <= before + 1e-9 * before.max(1.0));
            before = after;
        }
        prop_assert_eq!(cur, sorted(&start));
    }

    #[test]
    fn exhaustive_exchanges_sort(v in values(0..60)) {
        prop_assert_eq!(sort_by_exchanges(&v), sorted(&v));
    }

    #[test]
    fn lorentz_inequality(
        pair in (1usize..=12).prop_flat_map(|m| (values(m..m + 1), values(m..m + 1))),
        p in prop_oneof![Just(1.0), Just(1.5), Just(2.0), Just(3.0)],
    ) {
        let (fhat, f0) = pair;
        let (a, b) = (sorted(&fhat), sorted(&f0));
        let s_sorted = power_sum(&a, &b, p);
        let s_orig = power_sum(&fhat, &f0, p);
        prop_assert!(s_sorted <= s_orig + 1e-9 * s_orig.max(1.0));
    }
}

#[test]
fn matches_definition_on_random_grids() {
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    for _ in 0..100 {
        let v = values(101..102).new_tree(&mut runner).unwrap().current();
        let f = grid(v);
        let r = rearrange(&f);
        for (i, x) in f.nodes().enumerate() {
            assert_eq!(rearrange_by_definition(&f, x).unwrap(), r.values()[i]);
        }
    }
}

#[test]
fn sorted_pairing_is_optimal_among_all_pairings() {
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    let strategy = (1usize..=7).prop_flat_map(|m| (values(m..m + 1), values(m..m + 1)));
    for (case, p) in (0..200).zip([1.0, 1.5, 2.0, 3.0].into_iter().cycle()) {
        let (fhat, f0) = strategy.new_tree(&mut runner).unwrap().current();
        let b = sorted(&f0);
        let best = fhat
            .iter()
            .copied()
            .permutations(fhat.len())
            .map(|perm: Vec<f64>| power_sum(&perm, &b, p))
            .fold(f64::INFINITY, f64::min);
        let s_sorted = power_sum(&sorted(&fhat), &b, p);
        assert!(s_sorted <= best + 1e-9 * best.max(1.0), "case {case}: {s_sorted} > {best}");
    }
}

#[test]
fn strict_gain_meets_delta_eta_bound() {
    for seed in 0..100u64 {
        let (fhat, f0, a, b) = strict_gain_instance(seed);
        let (m, k) = (fhat.len(), a.len());
        assert!(k * 10 >= m && a.iter().all(|&i| b.iter().all(|&j| i < j)));
        let (delta, eps, lo, hi) = strict_gain_parameters(&fhat, &f0, &a, &b);
        assert!(eps > 0.0);
        let eta = eta_p(2.0, eps, lo, hi).unwrap();

        let f = grid(fhat);
        let target = grid(f0);
        let before = lp_error(&f, &target, 2.0).unwrap().powi(2);
        let after = lp_error(&rearrange(&f), &target, 2.0).unwrap().powi(2);
        assert!(
            after <= before - delta * eta + 1e-12 * before,
            "seed {seed}: {after} > {before} - {delta}*{eta}"
        );
    }
}

#[test]
fn eta_four_agrees_with_dense_grid_search() {
    let (eps, lo, hi, step) = (1.0, 0.0, 2.0, 0.01);
    let pts: Vec<f64> = (0..=200).map(|i| lo + i as f64 * step).collect();
    let pairs: Vec<(f64, f64)> = pts
        .iter()
        .flat_map(|&v| pts.iter().filter(move |&&w| w >= v + eps - 1e-12).map(move |&w| (v, w)))
        .collect();
    let f = |x: f64| x.powi(4);
    let mut best = f64::INFINITY;
    for &(v, vp) in &pairs {
        for &(t, tp) in &pairs {
            let val = f(v - tp) + f(vp - t) - f(v - t) - f(vp - tp);
            best = best.min(val);
        }
    }
    let eta = eta_p(4.0, eps, lo, hi).unwrap();
    assert!(eta > 0.0);
    assert!((eta - best).abs() < 1e-4, "eta {eta} vs grid {best}");
}

#[test]
fn weighted_contraction_in_the_u_domain() {
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    let w = WeightCdf::normal(0.0, 1.0, -3.0, 3.0).unwrap();
    for _ in 0..100 {
        let (fhat, f0) = (values(201..202), values(201..202))
            .new_tree(&mut runner)
            .unwrap()
            .current();
        let fhat = GridFunction::new(-3.0, 3.0, fhat).unwrap();
        let f0 = GridFunction::new(-3.0, 3.0, nondecreasing(f0)).unwrap();
        let (gu, f0u) = (pullback(&fhat, &w).unwrap(), pullback(&f0, &w).unwrap());
        assert!(f0u.is_nondecreasing());
        for p in NORMS {
            let before = lp_error(&gu, &f0u, p).unwrap();
            let after = lp_error(&rearrange(&gu), &f0u, p).unwrap();
            assert!(after <= before + 1e-12);
        }
    }
}

#[test]
fn weighted_rearrangement_converges_under_mesh_refinement() {
    let w = |m: usize| {
        let f = GridFunction::from_fn(-3.0, 3.0, m, |x| (2.0 * x).sin() + 0.3 * x).unwrap();
        let weight = WeightCdf::normal(0.0, 1.0, -3.0, 3.0).unwrap();
        weighted_rearrange(&f, &weight).unwrap()
    };
    let reference = w(16_001);
    let gap = |g: &GridFunction| {
        (0..=500)
            .map(|i| -2.5 + 5.0 * i as f64 / 500.0)
            .map(|x| (g.interpolate(x) - reference.interpolate(x)).abs())
            .fold(0.0, f64::max)
    };
    let coarse = gap(&w(251));
    let medium = gap(&w(1001));
    let fine = gap(&w(4001));
    assert!(medium < coarse && fine < medium, "{coarse} {medium} {fine}");
    assert!(fine < 1e-2);
}
