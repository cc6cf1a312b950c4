//! Imaginary parts of the deterministic equivalent stay positive above the
//! real axis, and z m(z) tends to -1 far from it.

use kronmac::{scenario_two_user, solve_fixed_point, stieltjes_de, ArrayGeometry};
use num_complex::Complex64;

fn main() -> kronmac::Result<()> {
    let cfg = scenario_two_user(ArrayGeometry::Cubic, 27, 0.5, 1.0)?;
    for y in [1e-2, 1e-1, 1.0, 1e2, 1e4] {
        for x in [-1.0, 0.0, 1.0, 4.0] {
            let z = Complex64::new(x, y);
            let sol = solve_fixed_point(&cfg, z, None)?;
            let m = stieltjes_de(&cfg, z, &sol)?;
            println!(
                "z = {z:<12} Im m {:>10.3e}  Im e = [{:.3e}, {:.3e}]  |z m + 1| {:.2e}",
                m.im,
                sol.e[0].im,
                sol.e[1].im,
                (z * m + 1.0).norm()
            );
        }
    }
    Ok(())
}
