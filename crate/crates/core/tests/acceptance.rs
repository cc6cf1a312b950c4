//! Acceptance criteria, one line each. Exits nonzero if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::{random_precoders, random_system, SystemShape};
use kronmac::det_equiv::{solve_fixed_point, stieltjes_de};
use kronmac::linalg::{hermitian_eig, HermitianMatrix};
use kronmac::monte_carlo::{empirical_stieltjes, ergodic_estimate, relative_gap};
use kronmac::{
    concavity_probe, iterative_waterfill, scenario_two_user, shannon_de, shannon_integral_check, ArrayGeometry,
    PrecoderSet, SystemConfig,
};
use num_complex::Complex64;
use rand::Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn mp_closed_form() -> Outcome {
    let started = Instant::now();
    let cfg = common::iid(16, 16, 1.0);
    let sol = solve_fixed_point(&cfg, Complex64::new(-1.0, 0.0), None).unwrap();
    let v = shannon_de(&cfg, 1.0, None).unwrap();
    let elapsed = started.elapsed();
    let e_err = (sol.e[0].re - common::GOLDEN).abs();
    let v_err = (v.value - common::mp_shannon()).abs();
    outcome(
        e_err <= 1e-8 && v_err <= 1e-8 && elapsed < Duration::from_secs(1),
        format!("|e - e*| = {e_err:.2e}, |V - V*| = {v_err:.2e}, {elapsed:.2?}"),
    )
}

fn integral_identity() -> Outcome {
    let started = Instant::now();
    let mut rng = common::rng(2);
    let shape = SystemShape {
        max_users: 3,
        max_rx: 32,
        max_tx: 32,
        invertible_t: false,
    };
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let cfg = random_system(&shape, &mut rng);
        let closed = shannon_de(&cfg, cfg.sigma2(), None).unwrap().value;
        let integral = shannon_integral_check(&cfg, cfg.sigma2(), 1e6).unwrap();
        worst = worst.max((closed - integral).abs());
    }
    let elapsed = started.elapsed();
    outcome(
        worst <= 1e-4 && elapsed < Duration::from_secs(30),
        format!("20 configs, max gap {worst:.2e}, {elapsed:.2?}"),
    )
}

fn two_user_linear(n: usize) -> SystemConfig {
    scenario_two_user(ArrayGeometry::Linear, n, 0.1, 1.0)
        .unwrap()
        .with_snr_db(20.0)
        .unwrap()
}

fn monte_carlo_agreement() -> Outcome {
    let started = Instant::now();
    let cfg = two_user_linear(8);
    let r = ergodic_estimate(&cfg, None, cfg.all_users(), 10_000, 0).unwrap();
    let elapsed = started.elapsed();
    let z = r.z_score();
    outcome(
        r.rel_gap < 0.02 && z <= 4.0 && elapsed < Duration::from_secs(300),
        format!(
            "mean {:.5}, det-equiv {:.5}, SE {:.2e}, rel_gap {:.2}%, {z:.1} SE apart, {elapsed:.2?}",
            r.mean,
            r.det_equiv,
            r.std_error,
            100.0 * r.rel_gap
        ),
    )
}

fn consistency_in_n() -> Outcome {
    let z = Complex64::new(-1.0, 0.0);
    let mut gaps = Vec::new();
    for n in [16, 64, 256] {
        let cfg = common::iid(n, n, 1.0);
        let sol = solve_fixed_point(&cfg, z, None).unwrap();
        let m_de = stieltjes_de(&cfg, z, &sol).unwrap().re;
        let m_mc = empirical_stieltjes(&cfg, 200, z, 0).unwrap().re;
        gaps.push(relative_gap(m_mc, m_de));
    }
    let monotone = gaps.windows(2).all(|w| w[1] < w[0]);
    outcome(
        monotone && gaps[2] < 1e-2,
        format!("rel_gap at N=16, 64, 256: {:.2e}, {:.2e}, {:.2e}", gaps[0], gaps[1], gaps[2]),
    )
}

// All power splits on a 0.02 P grid with mean power P over n modes.
fn simplex_grid(n: usize) -> Vec<Vec<f64>> {
    const UNITS: usize = 50;
    fn rec(left: usize, parts: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 1 {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for u in 0..=left {
            prefix.push(u);
            rec(left - u, parts - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(UNITS * n, n, &mut Vec::new(), &mut out);
    out.into_iter()
        .map(|v| v.into_iter().map(|u| u as f64 / UNITS as f64).collect())
        .collect()
}

fn grid_oracle(cfg: &SystemConfig) -> f64 {
    let bases: Vec<_> = cfg
        .users()
        .iter()
        .map(|u| hermitian_eig(u.transmit.matrix()).unwrap().eigenvectors)
        .collect();
    let grids: Vec<_> = cfg.users().iter().map(|u| simplex_grid(u.n_tx())).collect();
    let mut best = f64::NEG_INFINITY;
    let mut index = vec![0usize; grids.len()];
    loop {
        let matrices = (0..grids.len())
            .map(|k| {
                let p: Vec<f64> = grids[k][index[k]].iter().map(|f| f * cfg.user(k).budget).collect();
                HermitianMatrix::from_spectrum(&bases[k], &p).unwrap()
            })
            .collect();
        let p = PrecoderSet::new(matrices, cfg.budgets()).unwrap();
        best = best.max(shannon_de(cfg, cfg.sigma2(), Some(&p)).unwrap().value);
        let mut k = 0;
        while k < index.len() {
            index[k] += 1;
            if index[k] < grids[k].len() {
                break;
            }
            index[k] = 0;
            k += 1;
        }
        if k == index.len() {
            return best;
        }
    }
}

const ROUND_OFF: f64 = 1e-12;

fn waterfill_correctness() -> Outcome {
    let mut rng = common::rng(5);
    let shape = SystemShape {
        max_users: 3,
        max_rx: 16,
        max_tx: 8,
        invertible_t: false,
    };
    let mut worst_kkt: f64 = 0.0;
    let mut unconverged = 0;
    let mut below_uniform = 0;
    let mut min_margin = f64::INFINITY;
    for _ in 0..50 {
        let cfg = random_system(&shape, &mut rng);
        let r = iterative_waterfill(&cfg, cfg.all_users()).unwrap();
        if !r.converged {
            unconverged += 1;
            continue;
        }
        worst_kkt = worst_kkt.max(r.kkt_residual);
        let uniform = shannon_de(&cfg, cfg.sigma2(), Some(&PrecoderSet::uniform(&cfg))).unwrap().value;
        // equal up to round-off when every user has a single transmit mode
        min_margin = min_margin.min(r.objective - uniform);
        if r.objective < uniform - ROUND_OFF {
            below_uniform += 1;
        }
    }

    let small = SystemShape {
        max_users: 1,
        max_rx: 4,
        max_tx: 3,
        invertible_t: false,
    };
    let pairs = SystemShape {
        max_users: 2,
        max_rx: 4,
        max_tx: 2,
        invertible_t: false,
    };
    let mut worst_excess = f64::NEG_INFINITY;
    for i in 0..10 {
        let cfg = random_system(if i % 2 == 0 { &small } else { &pairs }, &mut rng);
        let r = iterative_waterfill(&cfg, cfg.all_users()).unwrap();
        worst_excess = worst_excess.max(grid_oracle(&cfg) - r.objective);
    }
    outcome(
        unconverged == 0 && worst_kkt <= 1e-6 && worst_excess <= 1e-3 && below_uniform == 0,
        format!(
            "50 configs: {unconverged} unconverged, max KKT {worst_kkt:.1e}, {below_uniform} below uniform \
             (min margin {min_margin:.1e}); \
             grid oracle excess {worst_excess:.1e} on 10 small configs"
        ),
    )
}

fn concavity() -> Outcome {
    let mut rng = common::rng(6);
    let shape = SystemShape {
        max_users: 3,
        max_rx: 8,
        max_tx: 6,
        invertible_t: true,
    };
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..100 {
        let cfg = random_system(&shape, &mut rng);
        let pair = (random_precoders(&cfg, &mut rng), random_precoders(&cfg, &mut rng));
        let report = concavity_probe(&cfg, &[pair], 10).unwrap();
        worst = worst.max(report.max_second_difference);
    }
    outcome(worst < 0.0, format!("100 segments, max second difference {worst:.3e}"))
}

fn antenna_scaling() -> Outcome {
    let rate = |geometry, n| {
        let cfg = scenario_two_user(geometry, n, 0.5, 1.0)
            .unwrap()
            .with_snr_db(20.0)
            .unwrap();
        let r = iterative_waterfill(&cfg, cfg.all_users()).unwrap();
        assert!(r.converged, "water-filling did not converge for N={n}");
        r.objective
    };
    let cubic: Vec<f64> = [8, 27, 64].iter().map(|&n| rate(ArrayGeometry::Cubic, n)).collect();
    let linear64 = rate(ArrayGeometry::Linear, 64);
    let non_increasing = cubic.windows(2).all(|w| w[1] <= w[0]);
    outcome(
        non_increasing && cubic[2] < linear64,
        format!(
            "cubic N=8, 27, 64: {:.4}, {:.4}, {:.4} nats; linear N=64: {linear64:.4} nats",
            cubic[0], cubic[1], cubic[2]
        ),
    )
}

fn herglotz() -> Outcome {
    let mut rng = common::rng(8);
    let shape = SystemShape {
        max_users: 3,
        max_rx: 16,
        max_tx: 16,
        invertible_t: false,
    };
    let mut smallest_m = f64::INFINITY;
    let mut smallest_e = f64::INFINITY;
    for _ in 0..100 {
        let cfg = random_system(&shape, &mut rng);
        for _ in 0..10 {
            let z = Complex64::new(rng.random_range(-3.0..6.0), 10f64.powf(rng.random_range(-2.0..1.0)));
            let sol = solve_fixed_point(&cfg, z, None).unwrap();
            smallest_m = smallest_m.min(stieltjes_de(&cfg, z, &sol).unwrap().im);
            smallest_e = sol.e.iter().map(|e| e.im).fold(smallest_e, f64::min);
        }
    }
    outcome(
        smallest_m > 0.0 && smallest_e > 0.0,
        format!("1000 points, min Im m {smallest_m:.3e}, min Im e {smallest_e:.3e}"),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 8] = [
        ("marchenko-pastur closed form", mp_closed_form),
        ("integral identity", integral_identity),
        ("monte carlo agreement, two-user linear N=8", monte_carlo_agreement),
        ("consistency in N", consistency_in_n),
        ("water-filling correctness", waterfill_correctness),
        ("concavity along precoder segments", concavity),
        ("antenna scaling, cubic vs linear", antenna_scaling),
        ("herglotz positivity", herglotz),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        if !result.passed {
            failed += 1;
        }
        println!(
            "[{}] {}. {name}: {}",
            if result.passed { "PASS" } else { "FAIL" },
            i + 1,
            result.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
