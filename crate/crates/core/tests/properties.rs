use proptest::prelude::*;
use tensorpow::bounds::PreasymptoticParams;
use tensorpow::hypercount::{a2_sandwich, a_count_int, tensor_count_pair, CountOptions};
use tensorpow::prelude::*;

/// Nonincreasing prefix with a continuous power tail.
fn spectrum() -> impl Strategy<Value = UnivariateSpectrum> {
    (prop::collection::vec((0.3f64..1.0, prop::bool::weighted(0.25)), 1..6), 1.5f64..3.0).prop_map(|(steps, s)| {
        let mut values = vec![1.0];
        for (f, tie) in steps {
            let last = *values.last().unwrap();
            values.push(if tie { last } else { last * f });
        }
        let last = *values.last().unwrap();
        let c = last * (values.len() as f64).powf(s);
        custom_spectrum(&values, Tail::Power { c, s }).unwrap()
    })
}

fn product() -> impl Strategy<Value = TensorProduct> {
    prop_oneof![
        (spectrum(), 1usize..=3).prop_map(|(sp, d)| TensorProduct::power(sp, d)),
        prop::collection::vec(spectrum(), 2..=3).prop_map(TensorProduct::product),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn tau_at_matches_topk(p in product(), n in 1u64..300) {
        let t = tau_at(&p, n).unwrap();
        let top = tau_topk(&p, n).unwrap();
        prop_assert!(t.is_certified());
        prop_assert!(p.tolerance().eq(t.tau_log, top[n as usize - 1]));
        prop_assert_eq!(t.count_ge.checked_sub(&t.count_gt).unwrap(), t.tie_class_size.clone());
    }

    #[test]
    fn topk_is_nonincreasing(p in product(), k in 1u64..400) {
        let top = tau_topk(&p, k).unwrap();
        prop_assert!(top.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn factor_order_is_irrelevant(a in spectrum(), b in spectrum(), c in spectrum(), n in 1u64..200) {
        let abc = TensorProduct::product(vec![a.clone(), b.clone(), c.clone()]);
        let cab = TensorProduct::product(vec![c, a, b]);
        let x = tau_at(&abc, n).unwrap();
        let y = tau_at(&cab, n).unwrap();
        prop_assert!(abc.tolerance().eq(x.tau_log, y.tau_log));
        prop_assert_eq!(x.count_ge, y.count_ge);
        prop_assert_eq!(x.count_gt, y.count_gt);
    }

    #[test]
    fn one_factor_is_identity(sp in spectrum(), n in 1u64..10_000) {
        let t = tau_at(&TensorProduct::power(sp.clone(), 1), n).unwrap();
        prop_assert!(sp.tolerance().eq(t.tau_log, sp.log_sigma(n).unwrap()));
    }

    #[test]
    fn counts_fall_as_threshold_rises(p in product(), a in -6.0f64..0.0, b in -6.0f64..0.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let opts = CountOptions::default();
        let at_lo = tensor_count_pair(&p, Dd::from_f64(lo), &opts).unwrap();
        let at_hi = tensor_count_pair(&p, Dd::from_f64(hi), &opts).unwrap();
        prop_assert!(at_hi.ge <= at_lo.ge);
        prop_assert!(at_hi.gt <= at_lo.gt);
        prop_assert!(at_lo.gt <= at_lo.ge);
    }

    #[test]
    fn a_count_monotone(n in 1u64..4, r in 1u64..3_000, l in 1u32..5) {
        prop_assert!(a_count_int(n + 1, r, l) <= a_count_int(n, r, l));
        prop_assert!(a_count_int(n, r, l) <= a_count_int(n, r + 1, l));
    }

    #[test]
    fn sandwich_brackets(l in 2u32..5, extra in 0u64..100_000) {
        let r = 4u64.pow(l) + extra;
        let (lo, hi) = a2_sandwich(r as f64, l).unwrap();
        let exact = a_count_int(2, r, l).to_f64();
        prop_assert!(lo <= exact && exact <= hi, "{lo} <= {exact} <= {hi}");
    }

    #[test]
    fn alpha_falls_with_delta(d in 1u32..500, s in 0.5f64..4.0, d1 in 0.05f64..=1.0, d2 in 0.05f64..=1.0) {
        let (small, large) = if d1 < d2 { (d1, d2) } else { (d2, d1) };
        let p = PreasymptoticParams::new(1.0, 0.5, 2, 3.0, s, d, small).unwrap();
        let q = p.with_delta(large).unwrap();
        prop_assert!(q.alpha() <= p.alpha());
    }

    #[test]
    fn beta_rises_with_n(d in 2u32..30, v in 1u64..4, a in 2u64..1_000_000, b in 2u64..1_000_000) {
        let p = PreasymptoticParams::new(1.0, 0.4, v, 3.0, 1.0, d, 0.5).unwrap();
        let end = p.lower_range_end();
        let (lo, hi) = (a.min(b).min(end), a.max(b).min(end));
        prop_assert!(p.beta(lo).unwrap() <= p.beta(hi).unwrap());
    }

    #[test]
    fn complexity_falls_with_eps(d in 1u32..5, e1 in 0.02f64..1.0, e2 in 0.02f64..1.0) {
        let sp = jacobi_spectrum(0.5, 0.5, 1.5).unwrap();
        let (small, large) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
        prop_assert!(info_complexity(&sp, d, large).unwrap() <= info_complexity(&sp, d, small).unwrap());
    }
}

#[test]
fn complexity_matches_topk() {
    let sp = torus_spectrum(TorusNormKind::new(TorusNorm::Hash, 1.0, 1.0, (0.0, std::f64::consts::TAU))).unwrap();
    for d in 1..=3u32 {
        let product = TensorProduct::power(sp.clone(), d as usize);
        let top = tau_topk(&product, 5_000).unwrap();
        for eps in [0.5, 0.25, 0.1, 0.05] {
            let n = info_complexity(&sp, d, eps).unwrap().to_u64().unwrap();
            let by_list = top.iter().filter(|t| product.tolerance().ge(**t, Dd::from_f64(eps).ln())).count() as u64;
            assert!(n < 5_000, "list too short for d={d} eps={eps}");
            assert_eq!(n, by_list, "d={d} eps={eps}");
        }
    }
}
