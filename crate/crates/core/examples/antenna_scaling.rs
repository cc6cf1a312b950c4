//! Optimal per-antenna sum rate as more antennas are packed at half-wavelength
//! spacing on a line and in a cube.

use std::f64::consts::LN_2;

use kronmac::{iterative_waterfill, scenario_two_user, ArrayGeometry};

fn main() -> kronmac::Result<()> {
    for (geometry, sizes) in [(ArrayGeometry::Linear, vec![8, 27, 64]), (ArrayGeometry::Cubic, vec![8, 27, 64])] {
        for n in sizes {
            let cfg = scenario_two_user(geometry, n, 0.5, 1.0)?.with_snr_db(20.0)?;
            let r = iterative_waterfill(&cfg, cfg.all_users())?;
            println!(
                "{geometry:?} N={n:<3} {:.4} bits/antenna ({} iterations)",
                r.objective / LN_2,
                r.outer_iterations
            );
        }
    }
    Ok(())
}
