//! Ergodic sum rate from simulated channels against the deterministic
//! equivalent, for growing arrays. Pass the trial count as the first argument.

use std::f64::consts::LN_2;

use kronmac::monte_carlo::ergodic_estimate;
use kronmac::{iterative_waterfill, scenario_two_user, ArrayGeometry};

fn main() -> kronmac::Result<()> {
    let trials: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(2000);
    println!("{trials} trials, spacing lambda/10, 20 dB; bits per receive antenna");
    println!("{:>3} {:>8} {:>10} {:>10} {:>9} {:>8}", "N", "precoder", "det-equiv", "MC mean", "MC SE", "gap %");
    for n in [2, 4, 8] {
        let cfg = scenario_two_user(ArrayGeometry::Linear, n, 0.1, 1.0)?.with_snr_db(20.0)?;
        let optimal = iterative_waterfill(&cfg, cfg.all_users())?.precoders;
        for (label, p) in [("uniform", None), ("optimal", Some(&optimal))] {
            let r = ergodic_estimate(&cfg, p, cfg.all_users(), trials, 0)?;
            println!(
                "{n:>3} {label:>8} {:>10.4} {:>10.4} {:>9.1e} {:>8.2}",
                r.det_equiv / LN_2,
                r.mean / LN_2,
                r.std_error / LN_2,
                100.0 * r.rel_gap
            );
        }
    }
    Ok(())
}
