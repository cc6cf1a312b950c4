//! Closed-form and oracle checks runnable from an installed binary.

use num_complex::Complex64;

use crate::correlation::{scenario_two_user, ArrayGeometry, CorrelationMatrix, Side};
use crate::det_equiv::{shannon_de, shannon_integral_check, solve_fixed_point, stieltjes_de};
use crate::error::Result;
use crate::linalg::{hermitian_eig, hermitian_eigenvalues, log_det_hpd, HermitianMatrix};
use crate::monte_carlo::empirical_stieltjes;
use crate::system::{SystemConfig, UserLink};
use crate::waterfill::{iterative_waterfill, waterfill_step};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn iid(n: usize) -> Result<SystemConfig> {
    let link = UserLink::new(
        CorrelationMatrix::identity(n, Side::Receive),
        CorrelationMatrix::identity(n, Side::Transmit),
        1.0,
    )?;
    SystemConfig::new(vec![link], 1.0)
}

fn within(name: &'static str, got: f64, want: f64, tol: f64) -> Check {
    let err = (got - want).abs();
    Check {
        name,
        passed: err <= tol,
        detail: format!("got {got:.12}, want {want:.12}, |err| {err:.2e} <= {tol:.0e}"),
    }
}

fn run(name: &'static str, f: impl FnOnce() -> Result<Check>) -> Check {
    f().unwrap_or_else(|e| Check {
        name,
        passed: false,
        detail: format!("error: {e}"),
    })
}

pub fn run_selftest() -> Vec<Check> {
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    vec![
        run("marchenko-pastur fixed point", || {
            let sol = solve_fixed_point(&iid(8)?, Complex64::new(-1.0, 0.0), None)?;
            Ok(within("marchenko-pastur fixed point", sol.e[0].re, golden, 1e-8))
        }),
        run("marchenko-pastur shannon", || {
            let s5 = 5f64.sqrt();
            let want = 2.0 * ((1.0 + s5) / 2.0).ln() - (s5 - 1.0).powi(2) / 4.0;
            Ok(within("marchenko-pastur shannon", shannon_de(&iid(8)?, 1.0, None)?.value, want, 1e-8))
        }),
        run("integral identity", || {
            let cfg = scenario_two_user(ArrayGeometry::Linear, 4, 0.25, 1.0)?.with_snr_db(10.0)?;
            let closed = shannon_de(&cfg, cfg.sigma2(), None)?.value;
            let integral = shannon_integral_check(&cfg, cfg.sigma2(), 1e6)?;
            Ok(within("integral identity", integral, closed, 1e-6))
        }),
        run("herglotz sign", || {
            let cfg = scenario_two_user(ArrayGeometry::Linear, 4, 0.5, 1.0)?;
            let mut worst = f64::INFINITY;
            for z in [Complex64::new(0.5, 0.1), Complex64::new(-2.0, 1.0), Complex64::new(3.0, 0.01)] {
                let sol = solve_fixed_point(&cfg, z, None)?;
                let m = stieltjes_de(&cfg, z, &sol)?;
                worst = sol.e.iter().map(|e| e.im).fold(m.im.min(worst), f64::min);
            }
            Ok(Check {
                name: "herglotz sign",
                passed: worst > 0.0,
                detail: format!("smallest imaginary part {worst:.3e}"),
            })
        }),
        run("two-mode water-filling", || {
            let (p, mu) = waterfill_step(&[2.0, 1.0], 1.0, 1.0, 1.0)?;
            let err = (mu - 1.75).abs().max((p[0] - 1.25).abs()).max((p[1] - 0.75).abs());
            Ok(within("two-mode water-filling", err, 0.0, 1e-14))
        }),
        run("water-filling beats uniform", || {
            let cfg = scenario_two_user(ArrayGeometry::Linear, 4, 0.1, 1.0)?.with_snr_db(20.0)?;
            let opt = iterative_waterfill(&cfg, cfg.all_users())?;
            let uniform = shannon_de(&cfg, cfg.sigma2(), None)?.value;
            Ok(Check {
                name: "water-filling beats uniform",
                passed: opt.converged && opt.kkt_residual <= 1e-6 && opt.objective >= uniform,
                detail: format!(
                    "optimal {:.6} vs uniform {uniform:.6}, KKT residual {:.1e}",
                    opt.objective, opt.kkt_residual
                ),
            })
        }),
        run("zero-channel resolvent", || {
            let t = CorrelationMatrix::unnormalized(HermitianMatrix::zeros(3), Side::Transmit)?;
            let link = UserLink::new(CorrelationMatrix::identity(4, Side::Receive), t, 1.0)?;
            let cfg = SystemConfig::new(vec![link], 1.0)?;
            let m = empirical_stieltjes(&cfg, 4, Complex64::new(-2.0, 0.0), 0)?;
            Ok(within("zero-channel resolvent", m.re, 0.5, 0.0))
        }),
        run("eigensolver agreement", || {
            let cfg = scenario_two_user(ArrayGeometry::Cubic, 8, 0.5, 1.0)?;
            let r = cfg.user(0).receive.matrix();
            let jacobi = hermitian_eig(r)?.eigenvalues;
            let qr = hermitian_eigenvalues(r);
            let gap = jacobi.iter().zip(&qr).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let logdet: f64 = jacobi.iter().map(|v| (1.0 + v).ln()).sum();
            let shifted = r.combine(1.0, &HermitianMatrix::identity(r.dim()), 1.0)?;
            let gap = gap.max((log_det_hpd(&shifted)? - logdet).abs());
            Ok(within("eigensolver agreement", gap, 0.0, 1e-10))
        }),
    ]
}
