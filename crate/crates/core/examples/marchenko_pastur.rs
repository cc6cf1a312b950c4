//! Uncorrelated single-user channel with N = n: the fixed point and the
//! Shannon transform have closed forms at x = 1.

use kronmac::monte_carlo::ergodic_estimate;
use kronmac::{shannon_de, solve_fixed_point, CorrelationMatrix, Side, SystemConfig, UserLink};
use num_complex::Complex64;

fn main() -> kronmac::Result<()> {
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    let closed = 2.0 * (1.0 / golden).ln() - golden * golden;
    println!("closed form: e = {golden:.12}, V = {closed:.12} nats");
    println!("{:>5} {:>16} {:>16} {:>12} {:>12}", "N", "e", "V", "MC mean", "MC SE");
    for n in [4, 16, 64] {
        let link = UserLink::new(
            CorrelationMatrix::identity(n, Side::Receive),
            CorrelationMatrix::identity(n, Side::Transmit),
            1.0,
        )?;
        let cfg = SystemConfig::new(vec![link], 1.0)?;
        let sol = solve_fixed_point(&cfg, Complex64::new(-1.0, 0.0), None)?;
        let v = shannon_de(&cfg, 1.0, None)?;
        let mc = ergodic_estimate(&cfg, None, cfg.all_users(), 2000, 0)?;
        println!(
            "{n:>5} {:>16.12} {:>16.12} {:>12.6} {:>12.2e}",
            sol.e[0].re, v.value, mc.mean, mc.std_error
        );
    }
    Ok(())
}
