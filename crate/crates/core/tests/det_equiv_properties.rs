mod common;

use common::{random_correlation, random_precoders, random_system, SystemShape};
use kronmac::det_equiv::{
    rate_region_constraints, shannon_de, solve_fixed_point, solve_fixed_point_with, stieltjes_de, FixedPointOptions,
    DEFAULT_TOLERANCE,
};
use kronmac::linalg::HermitianMatrix;
use kronmac::{CorrelationMatrix, PrecoderSet, Side, SystemConfig, UserLink, UserSubset};
use num_complex::Complex64;
use proptest::prelude::*;

const SHAPE: SystemShape = SystemShape {
    max_users: 3,
    max_rx: 12,
    max_tx: 10,
    invertible_t: false,
};

fn config(seed: u64) -> SystemConfig {
    random_system(&SHAPE, &mut common::rng(seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn real_negative_z_gives_positive_solutions(seed in any::<u64>(), x in 0.01f64..50.0) {
        let cfg = config(seed);
        let sol = solve_fixed_point(&cfg, Complex64::new(-x, 0.0), None).unwrap();
        prop_assert!(sol.residual <= DEFAULT_TOLERANCE);
        for (e, d) in sol.e.iter().zip(&sol.delta) {
            prop_assert!(e.re > 0.0 && e.im == 0.0);
            prop_assert!(d.re >= 0.0);
        }
    }

    #[test]
    fn solution_is_unique(seed in any::<u64>(), x in 0.01f64..20.0) {
        let cfg = config(seed);
        let z = Complex64::new(-x, 0.0);
        let opts = FixedPointOptions::default();
        let a = solve_fixed_point_with(&cfg, z, None, &opts, None).unwrap();
        let far = vec![Complex64::new(10.0 / x, 0.0); cfg.n_users()];
        let b = solve_fixed_point_with(&cfg, z, None, &opts, Some(&far)).unwrap();
        for (ea, eb) in a.e.iter().zip(&b.e) {
            prop_assert!((ea - eb).norm() <= 10.0 * DEFAULT_TOLERANCE);
        }
    }

    #[test]
    fn herglotz_on_upper_half_plane(seed in any::<u64>(), re in -4.0f64..8.0, log_im in -1.5f64..1.5) {
        let cfg = config(seed);
        let z = Complex64::new(re, 10f64.powf(log_im));
        let sol = solve_fixed_point(&cfg, z, None).unwrap();
        let m = stieltjes_de(&cfg, z, &sol).unwrap();
        prop_assert!(m.im > 0.0);
        prop_assert!((z * m).im > 0.0);
        prop_assert!(sol.e.iter().all(|e| e.im > 0.0));
    }

    #[test]
    fn shannon_decreases_in_noise_power(seed in any::<u64>()) {
        let cfg = config(seed);
        let p = random_precoders(&cfg, &mut common::rng(seed ^ 1));
        let grid = [0.01, 0.03, 0.1, 0.3, 1.0, 3.0, 10.0, 30.0, 100.0];
        let values: Vec<f64> = grid.iter().map(|&x| shannon_de(&cfg, x, Some(&p)).unwrap().value).collect();
        prop_assert!(values.windows(2).all(|w| w[1] < w[0]), "{values:?}");
        prop_assert!(values.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn shannon_is_sum_of_its_parts(seed in any::<u64>(), x in 0.01f64..10.0) {
        let cfg = config(seed);
        let v = shannon_de(&cfg, x, None).unwrap();
        prop_assert!((v.value - (v.logdet_transmit + v.logdet_receive - v.coupling)).abs() <= 1e-12);
    }

    #[test]
    fn adding_a_user_never_lowers_a_constraint(seed in any::<u64>()) {
        let cfg = config(seed);
        let p = random_precoders(&cfg, &mut common::rng(seed ^ 2));
        let region = rate_region_constraints(&cfg, &p).unwrap();
        for (&s, &v) in &region {
            for k in 0..cfg.n_users() {
                if !s.contains(k) {
                    prop_assert!(region[&s.insert(k)] >= v - 1e-12);
                }
            }
        }
    }

    #[test]
    fn scaling_noise_and_power_together(seed in any::<u64>()) {
        let cfg = config(seed);
        let p = random_precoders(&cfg, &mut common::rng(seed ^ 3));
        let base = shannon_de(&cfg, cfg.sigma2(), Some(&p)).unwrap().value;
        let alpha = 2.0;
        let budgets: Vec<f64> = cfg.budgets().iter().map(|b| alpha * b).collect();
        let scaled_cfg = cfg.clone().with_budgets(&budgets).unwrap();
        let scaled_p = PrecoderSet::new(p.matrices().iter().map(|m| m.scaled(alpha)).collect(), budgets).unwrap();
        let scaled = shannon_de(&scaled_cfg, alpha * cfg.sigma2(), Some(&scaled_p)).unwrap().value;
        prop_assert!((scaled - base).abs() <= 1e-9, "{base} vs {scaled}");
    }

    #[test]
    fn zero_transmit_correlation(seed in any::<u64>(), x in 0.05f64..20.0) {
        let mut rng = common::rng(seed);
        let r = random_correlation(5, 3, 0.0, Side::Receive, &mut rng);
        let t = CorrelationMatrix::unnormalized(HermitianMatrix::zeros(3), Side::Transmit).unwrap();
        let cfg = SystemConfig::new(vec![UserLink::new(r, t, 1.0).unwrap()], 1.0).unwrap();
        let sol = solve_fixed_point(&cfg, Complex64::new(-x, 0.0), None).unwrap();
        prop_assert!((sol.e[0].re - 1.0 / x).abs() <= 1e-12 / x);
        prop_assert_eq!(sol.delta[0].re, 0.0);
    }
}

fn identity_receive(k: usize, n_rx: usize, seed: u64) -> SystemConfig {
    let mut rng = common::rng(seed);
    let users = (0..k)
        .map(|_| {
            let t = random_correlation(4, 2, 0.0, Side::Transmit, &mut rng);
            UserLink::new(CorrelationMatrix::identity(n_rx, Side::Receive), t, 1.0).unwrap()
        })
        .collect();
    SystemConfig::new(users, 1.0).unwrap()
}

#[test]
fn identity_receive_makes_m_equal_e() {
    let cfg = identity_receive(2, 6, 4);
    for z in [Complex64::new(-0.7, 0.0), Complex64::new(1.0, 0.5)] {
        let sol = solve_fixed_point(&cfg, z, None).unwrap();
        let m = stieltjes_de(&cfg, z, &sol).unwrap();
        for e in &sol.e {
            assert!((m - e).norm() < 1e-9);
        }
    }
}

#[test]
fn resolvent_normalization_at_large_imaginary_z() {
    let cfg = config(11);
    let mut previous = f64::INFINITY;
    for y in [1e1, 1e3, 1e5] {
        let z = Complex64::new(0.0, y);
        let sol = solve_fixed_point(&cfg, z, None).unwrap();
        let gap = (z * stieltjes_de(&cfg, z, &sol).unwrap() + 1.0).norm();
        assert!(gap < previous);
        previous = gap;
    }
    assert!(previous < 1e-4);
}

#[test]
fn symmetric_users_share_a_solution() {
    let mut rng = common::rng(12);
    let r = random_correlation(6, 4, 0.0, Side::Receive, &mut rng);
    let t = random_correlation(5, 5, 0.1, Side::Transmit, &mut rng);
    let link = UserLink::new(r, t, 1.0).unwrap();
    let cfg = SystemConfig::new(vec![link.clone(), link], 0.5).unwrap();
    let sol = solve_fixed_point(&cfg, Complex64::new(-0.5, 0.0), None).unwrap();
    assert!((sol.e[0] - sol.e[1]).norm() <= 1e-12);

    let region = rate_region_constraints(&cfg, &PrecoderSet::uniform(&cfg)).unwrap();
    assert!((region[&UserSubset::single(0)] - region[&UserSubset::single(1)]).abs() <= 1e-12);
}

#[test]
fn single_user_region_is_the_shannon_value() {
    let cfg = common::iid(3, 5, 0.4);
    let p = PrecoderSet::uniform(&cfg);
    let region = rate_region_constraints(&cfg, &p).unwrap();
    assert_eq!(region.len(), 1);
    assert_eq!(region[&cfg.all_users()], shannon_de(&cfg, 0.4, Some(&p)).unwrap().value);
}

#[test]
fn vanishing_snr() {
    let cfg = config(13);
    assert!(shannon_de(&cfg, 1e9, None).unwrap().value < 1e-8);
}
