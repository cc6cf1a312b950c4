//! Solve the fixed-point equations of the two-user scenario on and off the
//! real axis and evaluate the Stieltjes transform.

use kronmac::det_equiv::{solve_fixed_point_with, stieltjes_de, FixedPointOptions};
use kronmac::{scenario_two_user, ArrayGeometry};
use num_complex::Complex64;

fn main() -> kronmac::Result<()> {
    let cfg = scenario_two_user(ArrayGeometry::Linear, 8, 0.1, 1.0)?.with_snr_db(20.0)?;
    let points = [
        Complex64::new(-cfg.sigma2(), 0.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.5, 0.1),
        Complex64::new(2.0, 1e-2),
    ];
    for tol in [1e-6, 1e-10] {
        let opts = FixedPointOptions::with_tolerance(tol);
        println!("tolerance {tol:e}");
        for z in points {
            let sol = solve_fixed_point_with(&cfg, z, None, &opts, None)?;
            let m = stieltjes_de(&cfg, z, &sol)?;
            println!(
                "  z = {z:<14} iterations {:>4}  residual {:.1e}  e = [{:.6}, {:.6}]  m = {m:.6}",
                sol.iterations, sol.residual, sol.e[0], sol.e[1]
            );
        }
    }
    Ok(())
}
