use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use proptest::prelude::*;

use apportion_core::montecarlo::{
    estimate_violation_prob_with, Interval, SamplerKind, SamplerSpec,
};
use apportion_core::probability::exact_probability;
use apportion_core::report::{Report, ReportRow};
use apportion_core::tau::{d_star, tau_of, violatory_set, x_on_line, y_on_line};
use apportion_core::{
    apportion, classify_violation, classify_violation_f64, criteria_test, modified_apportion,
    standard_quotas, Error, Method, PopulationInstance, TauValue, ViolationStatus,
};

fn method() -> impl Strategy<Value = Method> {
    prop::sample::select(Method::ALL.to_vec())
}

fn guaranteed() -> impl Strategy<Value = Method> {
    prop::sample::select(Method::GUARANTEED.to_vec())
}

/// Distinct integer populations.
fn pops(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<u64>> {
    prop::collection::btree_set(1u64..2_000_000, n).prop_map(|s| s.into_iter().collect())
}

fn shuffled(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<u64>> {
    pops(n).prop_shuffle()
}

fn instance(p: &[u64], seats: u32) -> PopulationInstance {
    let q = p
        .iter()
        .map(|&v| BigRational::from_integer(BigInt::from(v)))
        .collect();
    PopulationInstance::new(q, seats).unwrap()
}

fn triple() -> impl Strategy<Value = [f64; 3]> {
    (1e-3f64..1.0, 1e-3f64..1.0, 1e-3f64..1.0)
        .prop_filter("distinct", |(a, b, c)| a != b && b != c && a != c)
        .prop_map(|(a, b, c)| [a, b, c])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn quotas_sum_to_house_size(p in pops(2..=8), seats in 8u32..200) {
        let q = standard_quotas(&instance(&p, seats));
        prop_assert_eq!(q.sum(), BigRational::from_integer(BigInt::from(seats)));
    }

    #[test]
    fn every_seat_is_awarded(m in method(), p in pops(2..=6), seats in 6u32..120) {
        match apportion(m, &instance(&p, seats)) {
            Ok(a) => {
                prop_assert_eq!(a.seats.iter().sum::<u32>(), seats);
                prop_assert_eq!(a.house_size(), seats);
                if m.guarantees_nonzero() {
                    prop_assert!(a.seats.iter().all(|&s| s >= 1));
                }
            }
            Err(e) => prop_assert!(matches!(e, Error::TieDetected { .. }), "{}", e),
        }
    }

    #[test]
    fn scale_invariance(m in method(), p in shuffled(3..=5), seats in 5u32..80, num in 1u64..1000, den in 1u64..1000) {
        let base = instance(&p, seats);
        let factor = BigRational::new(BigInt::from(num), BigInt::from(den));
        let scaled = base.scaled(&factor).unwrap();
        let a = apportion(m, &base).map(|a| a.seats).ok();
        prop_assert_eq!(&a, &apportion(m, &scaled).map(|a| a.seats).ok());
        let status = |i: &PopulationInstance| classify_violation(m, i).map(|r| (r.status, r.cause)).ok();
        prop_assert_eq!(status(&base), status(&scaled));
    }

    #[test]
    fn permutation_invariance(m in method(), p in shuffled(3..=5), seats in 5u32..80, rot in 0usize..5) {
        let base = instance(&p, seats);
        let n = p.len();
        let perm: Vec<usize> = (0..n).map(|i| (i + rot) % n).collect();
        let permuted = base.permuted(&perm).unwrap();
        if let (Ok(a), Ok(b)) = (apportion(m, &base), apportion(m, &permuted)) {
            for (i, &j) in perm.iter().enumerate() {
                prop_assert_eq!(b.seats[i], a.seats[j]);
            }
        }
        let (ra, rb) = (classify_violation(m, &base), classify_violation(m, &permuted));
        prop_assert_eq!(ra.is_ok(), rb.is_ok());
        if let (Ok(ra), Ok(rb)) = (ra, rb) {
            prop_assert_eq!(ra.status, rb.status);
            prop_assert_eq!(ra.cause, rb.cause);
            let mapped: Vec<usize> = rb.offending_states.iter().map(|&i| perm[i]).collect();
            let mut want = ra.offending_states.clone();
            want.sort_unstable();
            let mut got = mapped;
            got.sort_unstable();
            prop_assert_eq!(got, want);
        }
    }

    #[test]
    fn two_states_never_violate(m in method(), p in pops(2..=2), seats in 2u32..300) {
        if let Ok(r) = classify_violation(m, &instance(&p, seats)) {
            prop_assert_eq!(r.status, ViolationStatus::None);
        }
    }

    #[test]
    fn no_mixed_violations(m in method(), p in pops(3..=3), seats in 3u32..200) {
        let r = classify_violation(m, &instance(&p, seats));
        prop_assert!(!matches!(r, Err(Error::MixedViolation)), "{:?}", r);
    }

    #[test]
    fn modified_method_gives_smallest_state_one_seat(m in guaranteed(), p in pops(3..=5), seats in 5u32..80) {
        if let Ok(a) = modified_apportion(m, &instance(&p, seats)) {
            prop_assert_eq!(a.seats[0], 1);
            prop_assert_eq!(a.seats.iter().sum::<u32>(), seats);
        }
    }

    #[test]
    fn float_path_matches_exact(m in method(), t in triple(), seats in 3u32..100) {
        let exact = PopulationInstance::from_f64(&t, seats).and_then(|i| classify_violation(m, &i));
        let fast = classify_violation_f64(m, &t, seats);
        prop_assert_eq!(exact.ok(), fast.ok());
    }

    #[test]
    fn criteria_test_matches_engine(m in guaranteed(), p in pops(3..=3), seats in 3u32..120) {
        let inst = instance(&p, seats);
        if let Ok(r) = classify_violation(m, &inst) {
            let q = standard_quotas(&inst);
            prop_assert_eq!(criteria_test(m, &q, seats).unwrap(), r.status == ViolationStatus::Lower);
        }
    }

    #[test]
    fn lower_violations_have_the_expected_shape(m in guaranteed(), p in pops(3..=3), seats in 3u32..120) {
        let inst = instance(&p, seats);
        if let Ok(r) = classify_violation(m, &inst) {
            if r.status == ViolationStatus::Lower {
                let q = standard_quotas(&inst);
                let (c, f) = (q.ceilings(), q.floors());
                let a: Vec<u64> = apportion(m, &inst).unwrap().seats.iter().map(|&s| u64::from(s)).collect();
                prop_assert_eq!(a, vec![c[0], c[1], f[2] - 1]);
            }
        }
    }

    #[test]
    fn tau_is_in_range_and_scale_free(t in triple(), scale in 1e-3f64..1e3) {
        let tau = tau_of(t).unwrap().get();
        prop_assert!(tau > -1.0 / 3.0 && tau < 1.0 / 3.0);
        let scaled = tau_of(t.map(|v| v * scale)).unwrap().get();
        prop_assert!((tau - scaled).abs() < 1e-12);
    }

    #[test]
    fn tau_line_round_trip(tau in -0.33f64..0.33, x in 1.5f64..1e6) {
        let t = TauValue::new(tau).unwrap();
        let y = y_on_line(x, t).unwrap();
        prop_assert!((x_on_line(y, t).unwrap() - x).abs() <= 1e-9 * x);
        prop_assert!((tau_of([1.0, x, y]).unwrap().get() - tau).abs() < 1e-9);
    }

    #[test]
    fn probability_is_scaled_violatory_length(m in guaranteed(), seats in 3u32..400) {
        let p = exact_probability(m, seats).unwrap().value;
        prop_assert!((0.0..=1.0).contains(&p));
        prop_assert!((p - 1.5 * violatory_set(m, seats).unwrap().total_length).abs() < 1e-12);
        prop_assert!(d_star(m, seats, seats / 2).unwrap() <= 0.0);
    }

    #[test]
    fn report_rows_round_trip(vals in prop::collection::vec((-1e6f64..1e6, any::<bool>(), 0i64..1000), 1..6)) {
        let rows = vals
            .iter()
            .map(|&(v, b, i)| ReportRow::new().text("name", "a,b").int("i", i).num("v", v).flag("b", b))
            .collect();
        let r = Report::new(rows);
        prop_assert_eq!(Report::from_csv(&r.to_csv()).unwrap(), r.clone());
        prop_assert_eq!(Report::from_json(&r.to_json()).unwrap(), r);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn estimates_are_reproducible_and_thread_independent(
        m in guaranteed(),
        seats in 3u32..30,
        seed in any::<u64>(),
        n in 1u64..10_000,
    ) {
        let spec = SamplerSpec::new(SamplerKind::ExpIID { lambda: 1.0 }, seed).unwrap();
        let a = estimate_violation_prob_with(m, seats, &spec, n, Interval::Wald, true).unwrap();
        let b = estimate_violation_prob_with(m, seats, &spec, n, Interval::Wald, true).unwrap();
        let c = estimate_violation_prob_with(m, seats, &spec, n, Interval::Wald, false).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(&a, &c);
        prop_assert!(a.ci_low <= a.p_hat && a.p_hat <= a.ci_high);
    }
}

#[test]
fn exact_quota_floor_matches_integer_division() {
    let inst = instance(&[1, 100, 1990], 10);
    let q = standard_quotas(&inst);
    let want: Vec<u64> = [10u64, 1000, 19900].iter().map(|v| v / 2091).collect();
    assert_eq!(q.floors(), want);
    assert_eq!(q.quotas()[0].to_f64().unwrap(), 10.0 / 2091.0);
    assert!(q.quotas()[0] < BigRational::one());
}
