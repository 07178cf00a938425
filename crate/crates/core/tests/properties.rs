use camalign::cam::{
    eigen_cam, grad_cam, grad_cam_map, layer_cam, xgrad_cam, xgrad_cam_map, LayerActivations,
    LayerGradients, SaliencyMap,
};
use camalign::focus::{
    activation_ratio, top_fraction_region, AnatomyMask, BinaryMask,
};
use camalign::splits::make_splits;
use camalign::stats::{
    auroc, average_ranks, confusion_metrics, paired_t_test, pearson, spearman, ConfusionCounts,
    PairedSamples,
};
use camalign::tensor::{bilinear_resize, minmax_normalize, Tensor};
use proptest::prelude::*;

fn grid(max_side: usize) -> impl Strategy<Value = (usize, usize, Vec<f32>)> {
    (1..=max_side, 1..=max_side).prop_flat_map(|(h, w)| {
        (Just(h), Just(w), prop::collection::vec(-5.0f32..5.0, h * w))
    })
}

fn khw(max_k: usize, max_side: usize) -> impl Strategy<Value = (usize, usize, usize, Vec<f32>)> {
    (1..=max_k, 1..=max_side, 1..=max_side).prop_flat_map(|(k, h, w)| {
        (Just(k), Just(h), Just(w), prop::collection::vec(0.0f32..3.0, k * h * w))
    })
}

fn acts(k: usize, h: usize, w: usize, data: Vec<f32>) -> LayerActivations {
    LayerActivations::new(Tensor::new(vec![k, h, w], data).unwrap()).unwrap()
}

fn close(a: &[f32], b: &[f32], tol: f32) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn resize_bounds_and_constants((h, w, data) in grid(6), oh in 1usize..10, ow in 1usize..10, c in -3.0f32..3.0) {
        let src = Tensor::new(vec![h, w], data).unwrap();
        let out = bilinear_resize(&src, oh, ow).unwrap();
        prop_assert_eq!(out.dims(), &[oh, ow]);
        prop_assert!(out.min() >= src.min() && out.max() <= src.max());
        prop_assert_eq!(bilinear_resize(&src, h, w).unwrap(), src);
        let flat = Tensor::filled(&[h, w], c).unwrap();
        prop_assert!(bilinear_resize(&flat, oh, ow).unwrap().data().iter().all(|&v| v == c));
    }

    #[test]
    fn minmax_range_argmax_and_affine((h, w, data) in grid(6), a in 0.5f32..4.0, b in -1.0f32..1.0) {
        let t = Tensor::new(vec![h, w], data).unwrap();
        let n = minmax_normalize(&t);
        prop_assert!(n.data().iter().all(|&v| (0.0..=1.0).contains(&v)));
        if t.max() - t.min() > 0.5 {
            let argmax = |x: &Tensor| -> Vec<usize> {
                let m = x.max();
                (0..x.len()).filter(|&i| x.data()[i] == m).collect()
            };
            prop_assert_eq!(argmax(&t), argmax(&n));
            let moved = minmax_normalize(&t.map(|v| a * v + b));
            prop_assert!(close(moved.data(), n.data(), 1e-5));
        }
    }

    #[test]
    fn saliency_in_unit_range((k, h, w, data) in khw(4, 5), grads in prop::collection::vec(-2.0f32..2.0, 100)) {
        let a = acts(k, h, w, data);
        let g = LayerGradients::new(Tensor::new(vec![k, h, w], grads[..k * h * w].to_vec()).unwrap()).unwrap();
        let out = (h * 3, w * 2);
        for s in [grad_cam(&a, &g, out), xgrad_cam(&a, &g, out), layer_cam(&a, &g, out), eigen_cam(&a, out)] {
            let s = s.unwrap();
            prop_assert_eq!(s.shape(), out);
            prop_assert!(s.values().data().iter().all(|v| v.is_finite() && (0.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn focus_region_invariant_to_gradient_scale((k, h, w, data) in khw(4, 6), grads in prop::collection::vec(-2.0f32..2.0, 144), c in prop::sample::select(vec![0.1f32, 0.5, 3.0, 10.0])) {
        let a = acts(k, h, w, data);
        let g = Tensor::new(vec![k, h, w], grads[..k * h * w].to_vec()).unwrap();
        let g1 = LayerGradients::new(g.clone()).unwrap();
        let gc = LayerGradients::new(g.map(|v| v * c)).unwrap();
        let out = (4 * h, 4 * w);
        for f in [grad_cam, xgrad_cam, layer_cam] {
            let r1 = top_fraction_region(&f(&a, &g1, out).unwrap(), 0.1).unwrap();
            let rc = top_fraction_region(&f(&a, &gc, out).unwrap(), 0.1).unwrap();
            prop_assert_eq!(r1, rc);
        }
    }

    #[test]
    fn grad_equals_xgrad_for_constant_gradients((k, h, w, data) in khw(4, 5), per_channel in prop::collection::vec(-2.0f32..2.0, 4)) {
        prop_assume!((0..k).all(|c| data[c * h * w..(c + 1) * h * w].iter().sum::<f32>() > 0.0));
        let a = acts(k, h, w, data);
        let g: Vec<f32> = (0..k * h * w).map(|i| per_channel[i / (h * w)]).collect();
        let g = LayerGradients::new(Tensor::new(vec![k, h, w], g).unwrap()).unwrap();
        prop_assert!(close(grad_cam_map(&a, &g).unwrap().data(), xgrad_cam_map(&a, &g).unwrap().data(), 1e-5));
        let out = (2 * h, 2 * w);
        prop_assert!(close(grad_cam(&a, &g, out).unwrap().values().data(), xgrad_cam(&a, &g, out).unwrap().values().data(), 1e-6));
    }

    #[test]
    fn eigen_cam_permutation_and_duplication((k, h, w, data) in khw(4, 5), shift in 0usize..4) {
        let out = (2 * h, 2 * w);
        let base = eigen_cam(&acts(k, h, w, data.clone()), out).unwrap();
        let hw = h * w;
        let rotated: Vec<f32> = (0..k).flat_map(|c| data[((c + shift) % k) * hw..((c + shift) % k + 1) * hw].to_vec()).collect();
        let perm = eigen_cam(&acts(k, h, w, rotated), out).unwrap();
        prop_assert!(close(base.values().data(), perm.values().data(), 1e-6));
        let mut doubled = data.clone();
        doubled.extend_from_slice(&data);
        let dup = eigen_cam(&acts(2 * k, h, w, doubled), out).unwrap();
        prop_assert!(close(base.values().data(), dup.values().data(), 1e-6));
    }

    #[test]
    fn focus_count_partition_and_monotone((h, w, data) in grid(8), bits in prop::collection::vec(any::<bool>(), 64), q in 0.05f64..1.0) {
        let t = minmax_normalize(&Tensor::new(vec![h, w], data).unwrap());
        let s = SaliencyMap::new(t.clone()).unwrap();
        let n = (q * (h * w) as f64 + 1e-9).floor() as usize;
        prop_assume!(n >= 1);
        let r = top_fraction_region(&s, q).unwrap();
        prop_assert_eq!(r.count(), n);
        prop_assert_eq!(r.mask().count(), n);
        let a = AnatomyMask::from_mask(BinaryMask::new(h, w, bits[..h * w].to_vec()).unwrap());
        let sum = activation_ratio(&r, &a).unwrap() + activation_ratio(&r, &a.complement()).unwrap();
        prop_assert!((sum - 1.0).abs() < 1e-12);
        let squashed = SaliencyMap::new(t.map(|v| v * v * v)).unwrap();
        prop_assert_eq!(top_fraction_region(&squashed, q).unwrap(), r);
    }

    #[test]
    fn mask_as_saliency_is_optimal(h in 1usize..4, w in 1usize..4, bits in prop::collection::vec(any::<bool>(), 9), q in 0.1f64..1.0) {
        let bits = bits[..h * w].to_vec();
        let total = h * w;
        let n = (q * total as f64 + 1e-9).floor() as usize;
        prop_assume!(n >= 1);
        let a = AnatomyMask::from_mask(BinaryMask::new(h, w, bits.clone()).unwrap());
        let s = SaliencyMap::new(a.mask().to_tensor()).unwrap();
        let got = activation_ratio(&top_fraction_region(&s, q).unwrap(), &a).unwrap();
        let mut best = 0.0f64;
        for subset in 0u32..(1 << total) {
            if subset.count_ones() as usize != n {
                continue;
            }
            let hits = (0..total).filter(|&i| subset >> i & 1 == 1 && bits[i]).count();
            best = best.max(hits as f64 / n as f64);
        }
        prop_assert_eq!(got, best);
    }

    #[test]
    fn correlation_properties(x in prop::collection::vec(0.0f64..1.0, 3..30), noise in prop::collection::vec(-1.0f64..1.0, 30), a in 0.1f64..10.0, b in -10.0f64..10.0) {
        let y: Vec<f64> = x.iter().zip(&noise).map(|(v, e)| v + e).collect();
        let s = PairedSamples::new(x.clone(), y.clone()).unwrap();
        let Ok(p) = pearson(&s) else { return Ok(()); };
        prop_assert!((-1.0..=1.0).contains(&p.coefficient));
        prop_assert!((0.0..=1.0).contains(&p.test.p_value));
        let moved = PairedSamples::new(x.iter().map(|v| a * v + b).collect(), y.clone()).unwrap();
        prop_assert!((pearson(&moved).unwrap().coefficient - p.coefficient).abs() < 1e-12);
        let flipped = PairedSamples::new(x.iter().map(|v| -a * v + b).collect(), y.clone()).unwrap();
        prop_assert!((pearson(&flipped).unwrap().coefficient + p.coefficient).abs() < 1e-12);
        if let Ok(sp) = spearman(&s) {
            let ranked = PairedSamples::new(average_ranks(&x), average_ranks(&y)).unwrap();
            prop_assert_eq!(sp, pearson(&ranked).unwrap());
            let monotone = PairedSamples::new(x.iter().map(|v| v.exp()).collect(), y.clone()).unwrap();
            prop_assert!((spearman(&monotone).unwrap().coefficient - sp.coefficient).abs() < 1e-12);
        }
    }

    #[test]
    fn paired_t_shift_invariance(x in prop::collection::vec(0.0f64..1.0, 2..20), y in prop::collection::vec(0.0f64..1.0, 20), c in -2.0f64..2.0) {
        let y = y[..x.len()].to_vec();
        let Ok(t) = paired_t_test(&PairedSamples::new(x.clone(), y.clone()).unwrap()) else { return Ok(()); };
        prop_assert!((0.0..=1.0).contains(&t.p_value));
        let shifted = PairedSamples::new(x.iter().map(|v| v + c).collect(), y.iter().map(|v| v + c).collect()).unwrap();
        let ts = paired_t_test(&shifted).unwrap();
        prop_assert!((ts.statistic - t.statistic).abs() <= 1e-9 * t.statistic.abs().max(1.0));
        let swapped = paired_t_test(&PairedSamples::new(y, x).unwrap()).unwrap();
        prop_assert_eq!(swapped.statistic, -t.statistic);
    }

    #[test]
    fn confusion_consistency(scores in prop::collection::vec(0.0f64..1.0, 2..40), labels in prop::collection::vec(any::<bool>(), 40), tau in 0.0f64..1.0) {
        let labels = labels[..scores.len()].to_vec();
        prop_assume!(labels.iter().any(|&l| l) && labels.iter().any(|&l| !l));
        let m = confusion_metrics(&scores, &labels, tau).unwrap();
        let c = ConfusionCounts::at_threshold(&scores, &labels, tau);
        let p = labels.iter().filter(|&&l| l).count() as f64;
        let n = labels.len() as f64 - p;
        let recovered = m.sensitivity.unwrap() * p + m.specificity.unwrap() * n;
        prop_assert!((recovered - (c.tp + c.tn) as f64).abs() < 1e-9);
        prop_assert!((m.accuracy.unwrap() - (c.tp + c.tn) as f64 / labels.len() as f64).abs() < 1e-15);
        let inverted: Vec<f64> = scores.iter().map(|s| -s).collect();
        prop_assert!((auroc(&inverted, &labels).unwrap() + auroc(&scores, &labels).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn splits_partition(cases in 3usize..40, controls in 3usize..40, seed in any::<u64>()) {
        let mut labels = vec![true; cases];
        labels.extend(vec![false; controls]);
        let s = make_splits(&labels, seed).unwrap();
        prop_assert_eq!(&s, &make_splits(&labels, seed).unwrap());
        let mut test_hits = vec![0usize; labels.len()];
        for sc in &s.scenarios {
            let mut all: Vec<usize> = sc.train.iter().chain(&sc.val).chain(&sc.test).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..labels.len()).collect::<Vec<_>>());
            for &i in &sc.test {
                test_hits[i] += 1;
            }
        }
        prop_assert!(test_hits.iter().all(|&c| c == 2));
        for class in [true, false] {
            let counts: Vec<usize> = s.subsets.iter().map(|b| b.iter().filter(|&&i| labels[i] == class).count()).collect();
            prop_assert!(counts.iter().max().unwrap() - counts.iter().min().unwrap() <= 1);
        }
        let sizes: Vec<usize> = s.subsets.iter().map(Vec::len).collect();
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
    }
}
