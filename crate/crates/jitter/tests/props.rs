//! Property tests for the wrapper transforms, samplers, curve tools, and
//! the IDX codec.

use jitter::analysis::{count_local_minima, flip_curve, jensen_check, CurveSamples};
use jitter::data::{dataset_from_idx, encode_idx_images, encode_idx_labels};
use jitter::loss::{flooding_transform, grad_sign, jitter_transform, LossWrapper};
use jitter::rng::RngStream;
use jitter::sampler::{sample, JitterSpec};
use jitter::train::make_batches;
use proptest::prelude::*;

proptest! {
    #[test]
    fn wrapped_loss_dominates_and_matches_exactly_above(
        loss in -10.0f64..10.0,
        alpha in -10.0f64..10.0,
    ) {
        let wrapped = jitter_transform(loss, alpha);
        prop_assert!(wrapped >= loss);
        if loss >= alpha {
            prop_assert_eq!(wrapped.to_bits(), loss.to_bits());
        } else {
            prop_assert!(wrapped > loss);
            prop_assert_eq!(wrapped, 2.0 * alpha - loss);
        }
    }

    #[test]
    fn nonpositive_levels_never_touch_nonnegative_losses(
        loss in 0.0f64..100.0,
        alpha in -100.0f64..=0.0,
    ) {
        prop_assert_eq!(jitter_transform(loss, alpha).to_bits(), loss.to_bits());
        prop_assert_eq!(grad_sign(loss, alpha), 1.0);
    }

    #[test]
    fn flooding_is_idempotent_and_floored(
        loss in -10.0f64..10.0,
        level in 1e-6f64..10.0,
    ) {
        let once = flooding_transform(loss, level);
        prop_assert!(once >= level);
        prop_assert_eq!(flooding_transform(once, level).to_bits(), once.to_bits());
    }

    #[test]
    fn grad_sign_agrees_with_the_transform_branch(
        loss in -10.0f64..10.0,
        alpha in -10.0f64..10.0,
    ) {
        let sign = grad_sign(loss, alpha);
        prop_assert!(sign == 1.0 || sign == -1.0);
        let wrapped = jitter_transform(loss, alpha);
        prop_assert_eq!(sign == 1.0, wrapped.to_bits() == loss.to_bits());
    }

    #[test]
    fn applied_wrapper_reports_consistent_fields(
        raw in 0.0f64..5.0,
        seed in 0u64..1000,
    ) {
        let spec = JitterSpec::uniform(0.0, 0.04).unwrap();
        let mut rng = RngStream::new(seed, 2);
        let w = jitter::loss::apply(&LossWrapper::jitter(spec), raw, &mut rng).unwrap();
        prop_assert_eq!(w.raw, raw);
        prop_assert!(w.wrapped >= w.raw);
        let alpha = w.alpha.unwrap();
        prop_assert_eq!(w.wrapped, jitter_transform(raw, alpha));
        prop_assert_eq!(w.grad_sign, grad_sign(raw, alpha));
    }

    #[test]
    fn truncated_draws_stay_inside_their_window(
        mu in -1.0f64..1.0,
        sigma in 0.01f64..1.0,
        left in -3.0f64..-0.1,
        right in 0.1f64..3.0,
        correction in 0.1f64..2.0,
        seed in 0u64..500,
    ) {
        let lo = mu + sigma * left;
        let hi = mu + sigma * right;
        let spec = JitterSpec::trunc_gaussian(mu, sigma, lo, hi)
            .unwrap()
            .with_correction(correction)
            .unwrap();
        let mut rng = RngStream::new(seed, 16);
        for _ in 0..50 {
            let a = sample(&spec, &mut rng).unwrap();
            prop_assert!(a >= correction * lo && a <= correction * hi);
        }
    }

    #[test]
    fn jensen_upper_bound_holds_for_any_batch_list(
        pairs in prop::collection::vec((0.0f64..3.0, -1.0f64..1.0), 1..40),
    ) {
        let check = jensen_check(&pairs, 1e-12).unwrap();
        prop_assert!(check.pass, "lhs {} rhs {}", check.lhs, check.rhs);
    }

    #[test]
    fn flipping_never_decreases_any_sample(
        ys in prop::collection::vec(-5.0f64..5.0, 3..200),
        level in -6.0f64..6.0,
    ) {
        let xs: Vec<f64> = (0..ys.len()).map(|i| i as f64).collect();
        let curve = CurveSamples::new(xs, ys.clone()).unwrap();
        let flipped = flip_curve(&curve, level);
        for (a, b) in ys.iter().zip(flipped.ys()) {
            prop_assert!(b >= a);
        }
    }

    #[test]
    fn flipping_a_strictly_convex_curve_yields_two_minima(
        a in 0.5f64..3.0,
        c in -0.5f64..0.5,
        k in 0.0f64..1.0,
        t in 0.1f64..0.9,
    ) {
        let curve = CurveSamples::from_fn(-2.0, 2.0, 801, |x| a * (x - c) * (x - c) + k).unwrap();
        let edge = curve.ys()[0].min(curve.ys()[curve.len() - 1]);
        // Level strictly between the interior minimum and the lower edge.
        let level = k + 0.05 + t * (edge - k - 0.1);
        let flipped = flip_curve(&curve, level);
        prop_assert_eq!(count_local_minima(&flipped, 1e-12).unwrap(), 2);
        prop_assert_eq!(count_local_minima(&curve, 1e-12).unwrap(), 1);
    }

    #[test]
    fn batches_partition_their_range(
        n in 1usize..400,
        bs_frac in 0.01f64..1.0,
        seed in 0u64..100,
    ) {
        let batch_size = ((n as f64 * bs_frac) as usize).max(1);
        let mut rng = RngStream::new(seed, 1);
        let batches = make_batches(n, batch_size, &mut rng).unwrap();
        prop_assert_eq!(batches.len(), n.div_ceil(batch_size));
        for b in &batches[..batches.len() - 1] {
            prop_assert_eq!(b.len(), batch_size);
        }
        let mut all: Vec<usize> = batches.concat();
        all.sort_unstable();
        let expected: Vec<usize> = (0..n).collect();
        prop_assert_eq!(all, expected);
    }

    #[test]
    fn idx_bytes_round_trip(
        rows in 1u32..6,
        cols in 1u32..6,
        n in 1usize..5,
        seed in 0u64..1000,
    ) {
        let mut rng = RngStream::new(seed, 3);
        let pixels: Vec<u8> = (0..n * rows as usize * cols as usize)
            .map(|_| rng.u64_below(256) as u8)
            .collect();
        let labels: Vec<u8> = (0..n).map(|_| rng.u64_below(10) as u8).collect();
        let img_bytes = encode_idx_images(rows, cols, &pixels).unwrap();
        let lbl_bytes = encode_idx_labels(&labels);
        let ds = dataset_from_idx(&img_bytes, &lbl_bytes).unwrap();
        prop_assert_eq!(ds.len(), n);
        prop_assert_eq!(ds.dim(), (rows * cols) as usize);
        for (i, &p) in pixels.iter().enumerate() {
            let (r, c) = (i / ds.dim(), i % ds.dim());
            prop_assert_eq!(ds.features().get(r, c), p as f64 / 255.0);
        }
        let back: Vec<u8> = ds
            .features()
            .values()
            .iter()
            .map(|&v| (v * 255.0).round() as u8)
            .collect();
        prop_assert_eq!(encode_idx_images(rows, cols, &back).unwrap(), img_bytes);
        let lbl_back: Vec<u8> = ds.labels().iter().map(|&l| l as u8).collect();
        prop_assert_eq!(encode_idx_labels(&lbl_back), lbl_bytes);
    }
}
