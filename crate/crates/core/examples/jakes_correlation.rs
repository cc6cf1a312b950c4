//! Correlation matrices of linear and cubic arrays seen through a
//! horizontal angular sector, and how their spectra spread.

use std::f64::consts::PI;

use kronmac::linalg::hermitian_eigenvalues;
use kronmac::{jakes_correlation, AngularSpread, ArrayGeometry, Side};

fn main() -> kronmac::Result<()> {
    let sectors = [
        ("full circle", AngularSpread::full_circle()),
        ("half plane", AngularSpread::new(0.0, PI)?),
        ("narrow", AngularSpread::new(-PI / 12.0, PI / 12.0)?),
    ];
    for (geometry, n) in [(ArrayGeometry::Linear, 8), (ArrayGeometry::Cubic, 8), (ArrayGeometry::Cubic, 27)] {
        let array = geometry.array(n, 0.5, 1.0)?;
        for (label, spread) in &sectors {
            let r = jakes_correlation(&array, spread, Side::Receive)?;
            let eig = hermitian_eigenvalues(r.matrix());
            let significant = eig.iter().filter(|&&v| v > 1e-3 * eig[0]).count();
            println!(
                "{geometry:?} N={n:<3} {label:<12} lambda_max {:>7.3}  modes above 1e-3: {significant:>2}  r_12 = {:.4}",
                eig[0],
                r.matrix().get(0, 1)
            );
        }
    }
    Ok(())
}
