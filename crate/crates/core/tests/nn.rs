use ddf_core::nn::{aggregate_2d, encoded_len, loss, positional_encode, softplus, AttentionBlock, Prediction, Target, BCE_CLAMP};
use ddf_core::sampling::{streams, RayRng};
use proptest::prelude::*;

fn vecs(rng: &mut RayRng, n: usize, c: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..c).map(|_| rng.uniform_range(-2.0, 2.0)).collect()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn encoding_layout(x in prop::collection::vec(-3f64..3.0, 1..6), bands in 0usize..7) {
        let e = positional_encode(&x, bands);
        prop_assert_eq!(e.len(), encoded_len(x.len(), bands));
        prop_assert_eq!(e.len(), x.len() * (2 * bands + 1));
        prop_assert_eq!(&e[..x.len()], &x[..]);
        for (i, &xi) in x.iter().enumerate() {
            for k in 0..bands {
                let w = (1u64 << k) as f64 * std::f64::consts::PI * xi;
                let base = x.len() + k * 2 * x.len() + 2 * i;
                prop_assert!((e[base] - w.sin()).abs() < 1e-12 && (e[base + 1] - w.cos()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn softplus_is_positive_and_smooth(x in -50f64..50.0) {
        let y = softplus(x);
        prop_assert!(y >= 0.0 && y >= x);
        prop_assert!((y - (1.0 + x.exp()).ln()).abs() <= 1e-12 * (1.0 + y));
    }

    #[test]
    fn attention_is_permutation_invariant(seed in any::<u64>(), n in 1usize..10) {
        let mut rng = RayRng::new(seed, streams::EVAL);
        let block = AttentionBlock::<f64>::new(8, 2, &mut RayRng::new(seed, streams::INIT)).unwrap();
        let f_p = vecs(&mut rng, 1, 8).remove(0);
        let keys = vecs(&mut rng, n, 8);
        let mut rev = keys.clone();
        rev.reverse();
        let a = aggregate_2d(&block, &f_p, &keys).unwrap();
        let b = aggregate_2d(&block, &f_p, &rev).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-9);
        }
        for w in block.attention_weights(&f_p, &keys).unwrap() {
            prop_assert!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        }
        prop_assert_eq!(aggregate_2d(&block, &f_p, &[]).unwrap(), f_p);
    }

    #[test]
    fn loss_terms_are_bounded(logit in -40f64..40.0, depth in 0f64..3.0, target in 0f64..3.0, xi: bool) {
        let p = [Prediction { xi_logit: logit, depth }];
        let t = [Target { xi, depth: xi.then_some(target) }];
        let l = loss(&p, &t, &[], 5.0, 0.5).unwrap();
        prop_assert!(l.l_vis >= 0.0 && l.l_vis <= BCE_CLAMP + 1e-6);
        prop_assert_eq!(l.l_depth, if xi { (depth - target).abs() } else { 0.0 });
        prop_assert!((l.total - (l.l_vis + 5.0 * l.l_depth)).abs() <= 1e-12);
    }
}

#[test]
fn loss_examples() {
    let p = [Prediction { xi_logit: 0.0, depth: 1.0 }];
    let l = loss(&p, &[Target { xi: true, depth: Some(1.0) }], &[], 5.0, 0.5).unwrap();
    assert!((l.l_vis - std::f64::consts::LN_2).abs() < 1e-12);
    let l = loss(&p, &[Target { xi: true, depth: Some(1.0) }], &[(1.0, 1.8)], 5.0, 0.5).unwrap();
    assert!((l.l_sym - 0.8).abs() < 1e-12);
    assert!(loss(&p, &[], &[], 5.0, 0.5).is_err());
}
