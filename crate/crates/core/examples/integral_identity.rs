//! The closed-form Shannon transform against direct integration of the
//! Stieltjes transform along the negative real axis.

use kronmac::{scenario_two_user, shannon_de, shannon_integral_check, ArrayGeometry};

fn main() -> kronmac::Result<()> {
    for snr_db in [0.0, 10.0, 20.0] {
        let cfg = scenario_two_user(ArrayGeometry::Linear, 8, 0.1, 1.0)?.with_snr_db(snr_db)?;
        let v = shannon_de(&cfg, cfg.sigma2(), None)?;
        let integral = shannon_integral_check(&cfg, cfg.sigma2(), 1e6)?;
        println!(
            "{snr_db:>4} dB  closed {:.12}  integral {integral:.12}  gap {:.1e}",
            v.value,
            (v.value - integral).abs()
        );
        println!(
            "         log det terms {:.6} + {:.6}, coupling {:.6}",
            v.logdet_transmit, v.logdet_receive, v.coupling
        );
    }
    Ok(())
}
