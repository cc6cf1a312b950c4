//! Spatial correlation matrices from antenna geometry and angular spread.
//!
//! Entry `(a, b)` of a correlation matrix is the average, over the horizontal
//! directions `theta` of the angular sector, of the phase term
//! `exp(2 pi i / lambda * <x_b - x_a, u(theta)>)` with
//! `u(theta) = (cos theta, sin theta, 0)`. For antennas on a line along the
//! x axis this is `(1/L) int exp(2 pi i d cos theta / lambda) d theta` with
//! `d` the antenna distance. Averaging over the sector makes every diagonal
//! entry exactly one, so `tr R = N`.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, HermitianMatrix};
use crate::quadrature::integrate;
use crate::system::{SystemConfig, UserLink};

/// Absolute tolerance on each normalized correlation entry.
pub const ENTRY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Transmit,
    Receive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AntennaArray {
    positions: Vec<[f64; 3]>,
    wavelength: f64,
}

impl AntennaArray {
    pub fn new(positions: Vec<[f64; 3]>, wavelength: f64) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::invalid("antenna array needs at least one antenna"));
        }
        if positions.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::invalid("antenna coordinates must be finite"));
        }
        if !(wavelength > 0.0 && wavelength.is_finite()) {
            return Err(Error::invalid(format!("wavelength must be positive, got {wavelength}")));
        }
        Ok(Self {
            positions,
            wavelength,
        })
    }

    pub fn positions(&self) -> &[[f64; 3]] {
        &self.positions
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn translated(&self, offset: [f64; 3]) -> Self {
        Self {
            positions: self
                .positions
                .iter()
                .map(|p| [p[0] + offset[0], p[1] + offset[1], p[2] + offset[2]])
                .collect(),
            wavelength: self.wavelength,
        }
    }
}

/// Regular `nx x ny x nz` lattice with the given spacing; x varies slowest.
pub fn grid_array(dims: (usize, usize, usize), spacing: f64, wavelength: f64) -> Result<AntennaArray> {
    let (nx, ny, nz) = dims;
    if nx * ny * nz == 0 {
        return Err(Error::invalid("grid needs at least one antenna along every axis"));
    }
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(Error::invalid(format!("spacing must be positive, got {spacing}")));
    }
    let mut positions = Vec::with_capacity(nx * ny * nz);
    for i in 0..nx {
        for j in 0..ny {
            for k in 0..nz {
                positions.push([i as f64 * spacing, j as f64 * spacing, k as f64 * spacing]);
            }
        }
    }
    AntennaArray::new(positions, wavelength)
}

/// Horizontal sector of effective propagation directions, traversed
/// counterclockwise from `theta_min` to `theta_max` (wrapping through 2 pi
/// when `theta_max < theta_min`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularSpread {
    theta_min: f64,
    theta_max: f64,
    arc: f64,
}

impl AngularSpread {
    pub fn new(theta_min: f64, theta_max: f64) -> Result<Self> {
        if !(theta_min.is_finite() && theta_max.is_finite()) {
            return Err(Error::invalid("angular spread bounds must be finite"));
        }
        let raw = theta_max - theta_min;
        if raw == 0.0 {
            return Err(Error::invalid("angular spread has zero length"));
        }
        let mut arc = raw.rem_euclid(2.0 * PI);
        if arc == 0.0 {
            arc = 2.0 * PI;
        }
        Ok(Self {
            theta_min,
            theta_max,
            arc,
        })
    }

    pub fn full_circle() -> Self {
        Self::new(0.0, 2.0 * PI).expect("valid")
    }

    pub fn theta_min(&self) -> f64 {
        self.theta_min
    }

    pub fn theta_max(&self) -> f64 {
        self.theta_max
    }

    pub fn arc_length(&self) -> f64 {
        self.arc
    }
}

/// Hermitian nonnegative correlation matrix tagged with the link side it models.
#[derive(Debug, Clone)]
pub struct CorrelationMatrix {
    matrix: HermitianMatrix,
    side: Side,
}

impl CorrelationMatrix {
    /// Checks unit diagonal (1e-12), trace (1e-10) and nonnegativity.
    pub fn new(matrix: HermitianMatrix, side: Side) -> Result<Self> {
        let dim = matrix.dim() as f64;
        if let Some((i, d)) = matrix
            .diagonal()
            .into_iter()
            .enumerate()
            .find(|(_, d)| (d - 1.0).abs() > 1e-12)
        {
            return Err(Error::invalid(format!(
                "correlation diagonal entry {i} is {d}, expected 1"
            )));
        }
        if (matrix.trace() - dim).abs() > 1e-10 {
            return Err(Error::invalid("correlation trace differs from dimension"));
        }
        hermitian_eig(&matrix)?.clamped_eigenvalues()?;
        Ok(Self { matrix, side })
    }

    /// Accepts any Hermitian nonnegative matrix, skipping the unit-diagonal
    /// normalization. For analytic cases such as `T = 0` or a prescribed
    /// diagonal spectrum.
    pub fn unnormalized(matrix: HermitianMatrix, side: Side) -> Result<Self> {
        hermitian_eig(&matrix)?.clamped_eigenvalues()?;
        Ok(Self { matrix, side })
    }

    pub fn identity(dim: usize, side: Side) -> Self {
        Self {
            matrix: HermitianMatrix::identity(dim),
            side,
        }
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

/// Sector average of the plane-wave phase for a horizontal displacement of
/// length `rho` (in wavelengths) at azimuth `psi`.
fn sector_average(rho: f64, psi: f64, spread: &AngularSpread) -> Result<Complex64> {
    if rho == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let k = 2.0 * PI * rho;
    let lo = spread.theta_min() - psi;
    let hi = lo + spread.arc_length();
    let tol = ENTRY_TOLERANCE * spread.arc_length();
    let re = integrate(|t| (k * t.cos()).cos(), lo, hi, tol)?;
    let im = integrate(|t| (k * t.cos()).sin(), lo, hi, tol)?;
    Ok(Complex64::new(re.value, im.value) / spread.arc_length())
}

pub fn jakes_correlation(array: &AntennaArray, spread: &AngularSpread, side: Side) -> Result<CorrelationMatrix> {
    let n = array.len();
    let lambda = array.wavelength();
    let pos = array.positions();

    // lattices repeat displacements; key on the displacement in units of 1e-12 wavelengths
    let mut cache: HashMap<(i64, i64), Complex64> = HashMap::new();
    let mut entries = vec![Complex64::new(1.0, 0.0); n * n];
    for b in 0..n {
        for a in 0..b {
            let dx = (pos[b][0] - pos[a][0]) / lambda;
            let dy = (pos[b][1] - pos[a][1]) / lambda;
            let key = ((dx * 1e12).round() as i64, (dy * 1e12).round() as i64);
            let value = match cache.get(&key) {
                Some(v) => *v,
                None => {
                    let v = sector_average(dx.hypot(dy), dy.atan2(dx), spread)?;
                    cache.insert(key, v);
                    v
                }
            };
            entries[a * n + b] = value;
        }
    }
    let matrix = HermitianMatrix::from_upper_fn(n, |i, j| entries[i * n + j])?;
    CorrelationMatrix::new(matrix, side)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArrayGeometry {
    /// `n` antennas on a line along the x axis.
    Linear,
    /// `m x m x m` cube with `m^3 = n`.
    Cubic,
}

impl ArrayGeometry {
    pub fn array(self, n: usize, spacing: f64, wavelength: f64) -> Result<AntennaArray> {
        match self {
            ArrayGeometry::Linear => grid_array((n, 1, 1), spacing, wavelength),
            ArrayGeometry::Cubic => {
                let m = cube_root(n).ok_or_else(|| {
                    Error::invalid(format!("cubic array needs a perfect cube antenna count, got {n}"))
                })?;
                grid_array((m, m, m), spacing, wavelength)
            }
        }
    }
}

fn cube_root(n: usize) -> Option<usize> {
    let m = (n as f64).cbrt().round() as usize;
    (m >= 1 && m * m * m == n).then_some(m)
}

/// Angular sectors `(T_1, T_2, R_1, R_2)` of the two-user uplink scenario.
pub const TWO_USER_SPREADS: [(f64, f64); 4] = [
    (0.0, PI),
    (PI / 3.0, 4.0 * PI / 3.0),
    (2.0 * PI / 3.0, -2.0 * PI / 3.0),
    (PI, 0.0),
];

/// Two-user uplink with `N = n_1 = n_2 = n` antennas per device, all on the
/// same geometry. Noise power is 1 and budgets are 1; adjust with
/// [`SystemConfig::with_snr_db`].
pub fn scenario_two_user(geometry: ArrayGeometry, n: usize, spacing: f64, wavelength: f64) -> Result<SystemConfig> {
    if n == 0 {
        return Err(Error::invalid("antenna count must be at least 1"));
    }
    let array = geometry.array(n, spacing, wavelength)?;
    let [t1, t2, r1, r2] = TWO_USER_SPREADS.map(|(lo, hi)| AngularSpread::new(lo, hi).expect("valid"));
    let users = vec![
        UserLink::new(
            jakes_correlation(&array, &r1, Side::Receive)?,
            jakes_correlation(&array, &t1, Side::Transmit)?,
            1.0,
        )?,
        UserLink::new(
            jakes_correlation(&array, &r2, Side::Receive)?,
            jakes_correlation(&array, &t2, Side::Transmit)?,
            1.0,
        )?,
    ];
    SystemConfig::new(users, 1.0)
}
