mod common;

use common::*;
use jobs_core::analysis::{
    bagging_error_bound, brip_jobs, jobs_error_bound, rip_constant_exhaustive, BoundInputs,
    RipQuery, DELTA_LIMIT,
};
use jobs_core::linalg::normalize_columns;
use jobs_core::sampling::{distinct_count_pmf, distinct_tail, generate_subsets};
use jobs_core::{IndexMultiset, SamplingPlan, Scheme};
use proptest::prelude::*;

#[test]
fn rip_random_8x10_s2_matches_brute_force() {
    let mut r = rng(21);
    let a = unit_columns(&gaussian_matrix(&mut r, 8, 10));
    let got = rip_constant_exhaustive(&RipQuery::new(a.clone(), 2)).unwrap();
    assert!((got - rip_brute_force(&a, 2)).abs() < 1e-12);
}

#[test]
fn rip_is_monotone_in_s() {
    let mut r = rng(22);
    for _ in 0..5 {
        let a = unit_columns(&gaussian_matrix(&mut r, 7, 9));
        let d: Vec<f64> = (1..=3)
            .map(|s| rip_constant_exhaustive(&RipQuery::new(a.clone(), s)).unwrap())
            .collect();
        assert!(d[0] <= d[1] && d[1] <= d[2]);
    }
}

#[test]
fn brip_single_full_subset_is_plain_rip() {
    let mut r = rng(23);
    let a = gaussian_matrix(&mut r, 6, 5);
    let full = IndexMultiset::full(6).unwrap();
    let (normalized, _) = normalize_columns(&a).unwrap();
    let plain = rip_constant_exhaustive(&RipQuery::new(normalized, 2)).unwrap();
    assert_eq!(brip_jobs(&a, &[full.clone()], 2).unwrap(), plain);
    assert_eq!(brip_jobs(&a, &[full.clone(), full], 2).unwrap(), plain);
}

#[test]
fn brip_grows_when_subsets_are_appended() {
    let mut r = rng(24);
    let a = gaussian_matrix(&mut r, 6, 5);
    let plan = SamplingPlan { m: 6, subset_size: 6, count: 6, scheme: Scheme::Bootstrap, master_seed: 3 };
    let subsets = generate_subsets(&plan).unwrap();
    let mut prev = 0.0;
    for k in 1..=6 {
        let d = brip_jobs(&a, &subsets[..k], 2).unwrap();
        assert!(d >= prev);
        assert!((d - brip_block_diagonal(&a, &subsets[..k], 2)).abs() < 1e-12);
        prev = d;
    }
}

#[test]
fn pmf_matches_exact_rational_formula() {
    for m in 1..=30 {
        for l in 1..=30 {
            let got = distinct_count_pmf(m, l).unwrap();
            let exact = birthday_pmf_exact(m, l);
            for (g, e) in got.iter().zip(&exact) {
                let e = to_f64(e);
                assert!((g - e).abs() <= 1e-14 + 1e-12 * e, "m={m} L={l}: {g} vs {e}");
            }
        }
    }
    for (m, l) in [(100, 100), (200, 60), (60, 200)] {
        let got = distinct_count_pmf(m, l).unwrap();
        let exact = birthday_pmf_exact(m, l);
        for (g, e) in got.iter().zip(&exact) {
            let e = to_f64(e);
            assert!((g - e).abs() <= 1e-15 + 1e-11 * e, "m={m} L={l}: {g} vs {e}");
        }
    }
}

#[test]
fn tail_matches_exact_sum() {
    let exact = birthday_pmf_exact(40, 25);
    for d in 1..=25 {
        let want: f64 = exact[d - 1..].iter().map(to_f64).sum();
        assert!((distinct_tail(40, 25, d).unwrap() - want).abs() < 1e-13);
    }
}

fn inputs() -> impl Strategy<Value = BoundInputs> {
    (0.0..DELTA_LIMIT * 0.99, 1usize..300, 1usize..500, 1usize..100, 0.05f64..3.0, 0.01f64..5.0, 0.0f64..1.0)
        .prop_map(|(delta, l, m, k, tau, z_l2, frac)| BoundInputs {
            delta,
            l,
            m,
            k,
            tau,
            z_l2,
            z_linf: frac * z_l2,
            ..BoundInputs::default()
        })
}

proptest! {
    #[test]
    fn probability_monotone_in_k_and_noise(b in inputs(), dk in 1usize..50, shrink in 0.0f64..1.0) {
        for f in [jobs_error_bound, bagging_error_bound] {
            let p = f(&b, true).unwrap().probability_lower_bound;
            prop_assert!((0.0..=1.0).contains(&p));
            let more_k = f(&BoundInputs { k: b.k + dk, ..b }, true).unwrap().probability_lower_bound;
            prop_assert!(more_k >= p);
            let less_noise = f(&BoundInputs { z_linf: b.z_linf * shrink, ..b }, true).unwrap().probability_lower_bound;
            prop_assert!(less_noise >= p);
        }
    }

    #[test]
    fn jobs_dominates_bagging(b in inputs()) {
        let pj = jobs_error_bound(&b, true).unwrap().probability_lower_bound;
        let pb = bagging_error_bound(&b, true).unwrap().probability_lower_bound;
        prop_assert!(pj >= pb);
    }

    #[test]
    fn general_mode_with_zero_error_reduces(b in inputs(), a_inf1 in 0.0f64..10.0) {
        let b = BoundInputs { a_inf1, ..b };
        prop_assert_eq!(jobs_error_bound(&b, false).unwrap(), jobs_error_bound(&b, true).unwrap());
    }
}
