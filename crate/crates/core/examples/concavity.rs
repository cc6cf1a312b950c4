//! The Shannon transform along a segment between uniform and water-filled
//! precoders. Negative second differences indicate concavity.

use kronmac::{concavity_probe, iterative_waterfill, scenario_two_user, ArrayGeometry, PrecoderSet};

fn main() -> kronmac::Result<()> {
    let cfg = scenario_two_user(ArrayGeometry::Linear, 8, 0.1, 1.0)?.with_snr_db(20.0)?;
    let optimal = iterative_waterfill(&cfg, cfg.all_users())?.precoders;
    let report = concavity_probe(&cfg, &[(optimal, PrecoderSet::uniform(&cfg))], 10)?;
    for (lambda, v) in report.lambdas.iter().zip(&report.values[0]) {
        println!("lambda {lambda:.1}  V = {v:.6}");
    }
    println!(
        "max second difference {:.3e} (strictly concave: {})",
        report.max_second_difference,
        report.strictly_concave()
    );
    Ok(())
}
