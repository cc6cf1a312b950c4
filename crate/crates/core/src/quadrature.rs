//! Globally adaptive Gauss–Kronrod (7/15) quadrature on a finite interval.

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Maximum number of panels kept before giving up.
pub const MAX_PANELS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn kronrod15<E>(f: &mut impl FnMut(f64) -> Result<f64, E>, a: f64, b: f64) -> Result<Panel, E> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(center - dx)? + f(center + dx)?;
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    Ok(Panel {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    })
}

/// Integrates a fallible integrand to an absolute error bound.
///
/// Integrand errors propagate through the outer `Result`; running out of
/// panels yields `Ok(Err(Error::QuadratureFailed))` with the best estimate.
pub fn integrate_fallible<E>(
    mut f: impl FnMut(f64) -> Result<f64, E>,
    a: f64,
    b: f64,
    abs_tol: f64,
) -> Result<Result<Quadrature>, E> {
    if a == b {
        return Ok(Ok(Quadrature {
            value: 0.0,
            error: 0.0,
            panels: 0,
        }));
    }
    let mut panels = vec![kronrod15(&mut f, a, b)?];
    loop {
        let value: f64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        if error <= abs_tol {
            return Ok(Ok(Quadrature {
                value,
                error,
                panels: panels.len(),
            }));
        }
        if panels.len() >= MAX_PANELS || !error.is_finite() {
            return Ok(Err(Error::QuadratureFailed {
                estimate: value,
                error,
                tolerance: abs_tol,
            }));
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .expect("at least one panel");
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            return Ok(Err(Error::QuadratureFailed {
                estimate: value,
                error,
                tolerance: abs_tol,
            }));
        }
        panels.push(kronrod15(&mut f, p.a, mid)?);
        panels.push(kronrod15(&mut f, mid, p.b)?);
    }
}

/// Integrates `f` over `[a, b]` to absolute tolerance `abs_tol`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, abs_tol: f64) -> Result<Quadrature> {
    match integrate_fallible::<std::convert::Infallible>(|x| Ok(f(x)), a, b, abs_tol) {
        Ok(r) => r,
        Err(never) => match never {},
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let q = integrate(|x| x.powi(5) - 2.0 * x, -1.0, 2.0, 1e-12).unwrap();
        assert!((q.value - (64.0 / 6.0 - 1.0 / 6.0 - 3.0)).abs() < 1e-13);
        assert_eq!(q.panels, 1);
    }

    #[test]
    fn oscillatory_integrand() {
        // int_0^pi cos(50 cos t) dt = pi J0(50)
        let q = integrate(|t| (50.0 * t.cos()).cos(), 0.0, PI, 1e-11).unwrap();
        let j0_50 = 0.055812327669252086; // J0(50)
        assert!((q.value - PI * j0_50).abs() < 1e-10, "{}", q.value);
    }

    #[test]
    fn empty_interval() {
        assert_eq!(integrate(|x| x, 3.0, 3.0, 1e-9).unwrap().value, 0.0);
    }

    #[test]
    fn reports_failure_with_estimate() {
        let err = integrate(|x| 1.0 / x.abs().sqrt(), -1.0, 1.0, 1e-300).unwrap_err();
        assert!(matches!(err, Error::QuadratureFailed { .. }));
    }
}
