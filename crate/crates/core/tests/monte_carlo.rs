mod common;

use common::{random_precoders, random_system, SystemShape};
use kronmac::det_equiv::{solve_fixed_point, stieltjes_de};
use kronmac::linalg::{CMatrix, HermitianMatrix};
use kronmac::monte_carlo::{
    empirical_mutual_info, empirical_rate_region, empirical_stieltjes, ergodic_estimate, mean_and_std_error,
    mutual_info_samples, sample_channel, stieltjes_samples, ChannelSampler,
};
use kronmac::{
    scenario_two_user, ArrayGeometry, CorrelationMatrix, Side, SystemConfig, UserLink, UserSubset,
};
use num_complex::Complex64;
use proptest::prelude::*;

const SHAPE: SystemShape = SystemShape {
    max_users: 3,
    max_rx: 8,
    max_tx: 6,
    invertible_t: false,
};

fn two_user_linear(n: usize) -> SystemConfig {
    scenario_two_user(ArrayGeometry::Linear, n, 0.1, 1.0)
        .unwrap()
        .with_snr_db(20.0)
        .unwrap()
}

#[test]
fn channel_second_moment_matches_trace_identity() {
    for config_seed in 0..12 {
        let cfg = random_system(&SHAPE, &mut common::rng(config_seed));
        let sampler = ChannelSampler::new(&cfg).unwrap();
        let per_user: Vec<Vec<f64>> = (0..cfg.n_users())
            .map(|k| {
                (0..1000)
                    .map(|t| sampler.sample(t, 3).unwrap().h[k].iter().map(|z| z.norm_sqr()).sum())
                    .collect()
            })
            .collect();
        for samples in &per_user {
            let (mean, se) = mean_and_std_error(samples);
            let n = cfg.n_rx() as f64;
            assert!((mean - n).abs() <= 3.0 * se, "config {config_seed}: {mean} vs {n} (SE {se})");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sampling_is_deterministic_per_trial(seed in any::<u64>(), trial in 0u64..1000) {
        let cfg = random_system(&SHAPE, &mut common::rng(seed));
        let a = sample_channel(&cfg, trial, seed).unwrap();
        let b = ChannelSampler::new(&cfg).unwrap().sample(trial, seed).unwrap();
        prop_assert_eq!(&a, &b);
        let other = sample_channel(&cfg, trial + 1, seed).unwrap();
        prop_assert_ne!(&a.h, &other.h);
    }

    #[test]
    fn mutual_information_per_realization(seed in any::<u64>(), trial in 0u64..100) {
        let mut rng = common::rng(seed);
        let cfg = random_system(&SHAPE, &mut rng);
        let p = random_precoders(&cfg, &mut rng);
        let real = sample_channel(&cfg, trial, seed).unwrap();
        let region = empirical_rate_region(&real, Some(&p), cfg.sigma2()).unwrap();
        for (&s, &v) in &region {
            prop_assert!(v >= 0.0);
            for k in 0..cfg.n_users() {
                if !s.contains(k) {
                    prop_assert!(region[&s.insert(k)] >= v - 1e-12);
                }
            }
        }
        let mut previous = f64::INFINITY;
        for x in [1e-2, 1e-1, 1.0, 1e1, 1e2, 1e4, 1e8] {
            let v = empirical_mutual_info(&real, Some(&p), x, cfg.all_users()).unwrap();
            prop_assert!(v <= previous);
            previous = v;
        }
        prop_assert!(previous < 1e-6);
    }

    #[test]
    fn resolvent_is_herglotz_per_realization(seed in any::<u64>(), re in -3.0f64..6.0, im in 0.01f64..3.0) {
        let cfg = random_system(&SHAPE, &mut common::rng(seed));
        let samples = stieltjes_samples(&cfg, 4, Complex64::new(re, im), seed).unwrap();
        prop_assert!(samples.iter().all(|m| m.im > 0.0));
    }
}

#[test]
fn marchenko_pastur_mean_and_consistency() {
    let mut gaps = Vec::new();
    for n in [4, 16, 64] {
        let cfg = common::iid(n, n, 1.0);
        let r = ergodic_estimate(&cfg, None, cfg.all_users(), 10_000, 0).unwrap();
        assert!((r.det_equiv - common::mp_shannon()).abs() < 1e-10);
        if n == 64 {
            assert!(r.z_score() <= 3.0, "{} vs {} (SE {})", r.mean, r.det_equiv, r.std_error);
        }
        gaps.push(r.rel_gap);
    }
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
}

#[test]
fn two_user_constraints_within_two_percent() {
    let cfg = two_user_linear(8);
    for s in UserSubset::enumerate(2) {
        let r = ergodic_estimate(&cfg, None, s, 2000, 0).unwrap();
        assert!(r.rel_gap < 0.02, "{s}: {:.4}", r.rel_gap);
    }
}

#[test]
fn two_trial_estimates_are_reproducible() {
    let cfg = two_user_linear(4);
    let a = ergodic_estimate(&cfg, None, cfg.all_users(), 2, 17).unwrap();
    let b = ergodic_estimate(&cfg, None, cfg.all_users(), 2, 17).unwrap();
    assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
    assert_eq!(a.mean.to_bits(), b.mean.to_bits());
    let samples = mutual_info_samples(&cfg, None, cfg.all_users(), 2, 17).unwrap();
    assert_eq!(mean_and_std_error(&samples).1.to_bits(), a.std_error.to_bits());
}

#[test]
fn zero_transmit_correlation_gives_free_resolvent() {
    let t = CorrelationMatrix::unnormalized(HermitianMatrix::zeros(3), Side::Transmit).unwrap();
    let link = UserLink::new(CorrelationMatrix::identity(5, Side::Receive), t, 1.0).unwrap();
    let cfg = SystemConfig::new(vec![link], 1.0).unwrap();
    let m = empirical_stieltjes(&cfg, 4, Complex64::new(-0.25, 0.0), 0).unwrap();
    assert_eq!(m, Complex64::new(4.0, 0.0));
}

#[test]
fn marchenko_pastur_stieltjes_at_large_n() {
    let cfg = common::iid(256, 256, 1.0);
    let m = empirical_stieltjes(&cfg, 20, Complex64::new(-1.0, 0.0), 0).unwrap();
    assert!((m.re - common::GOLDEN).abs() < 0.01 && m.im == 0.0);
}

#[test]
fn stieltjes_estimate_tracks_the_equivalent_for_correlated_links() {
    let cfg = two_user_linear(16);
    let z = Complex64::new(-0.5, 0.2);
    let de = stieltjes_de(&cfg, z, &solve_fixed_point(&cfg, z, None).unwrap()).unwrap();
    let mc = empirical_stieltjes(&cfg, 400, z, 0).unwrap();
    assert!((mc - de).norm() / de.norm() < 0.01, "{mc} vs {de}");
}

#[test]
fn invalid_inputs() {
    let cfg = common::iid(2, 2, 1.0);
    assert!(ergodic_estimate(&cfg, None, cfg.all_users(), 1, 0).is_err());
    assert!(empirical_stieltjes(&cfg, 10, Complex64::new(1.0, 0.0), 0).is_err());
    assert!(ergodic_estimate(&cfg, None, UserSubset::single(3), 10, 0).is_err());
    let real = kronmac::ChannelRealization {
        h: vec![CMatrix::zeros(2, 2)],
        trial: 0,
        seed: 0,
    };
    assert!(empirical_mutual_info(&real, None, 0.0, cfg.all_users()).is_err());
}
