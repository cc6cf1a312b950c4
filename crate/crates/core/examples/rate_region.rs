//! Rate region constraints under uniform and per-subset optimal precoding,
//! in bits per receive antenna.

use std::f64::consts::LN_2;

use kronmac::{iterative_waterfill, rate_region_constraints, scenario_two_user, ArrayGeometry, PrecoderSet};

fn main() -> kronmac::Result<()> {
    let cfg = scenario_two_user(ArrayGeometry::Linear, 8, 0.1, 1.0)?.with_snr_db(20.0)?;
    let uniform = rate_region_constraints(&cfg, &PrecoderSet::uniform(&cfg))?;
    println!("{:<6} {:>10} {:>10}", "subset", "uniform", "optimal");
    for (subset, value) in uniform {
        let optimal = iterative_waterfill(&cfg, subset)?.objective;
        println!("{subset:<6} {:>10.4} {:>10.4}", value / LN_2, optimal / LN_2);
    }
    Ok(())
}
