//! Uniform spatial grids, time slicings, complex lattice functions and the
//! Riemann quadrature they carry.
//!
//! Every inner product and norm in this crate uses the plain Riemann weight
//! `dx` per node. Grids are truncations of the real line: operations that
//! build localized states reject inputs whose amplitude at the edges is not
//! negligible, instead of wrapping around periodically.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative amplitude allowed at the grid edges for localized states.
pub const EDGE_TAIL_BOUND: f64 = 1e-6;

/// Uniform 1D lattice on `[x_min, x_max]` with `n_points` nodes.
///
/// Node `i` sits at exactly `x_min + i * spacing`; the same expression is
/// used everywhere so coordinates are bit-reproducible.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialGrid {
    x_min: f64,
    x_max: f64,
    n_points: usize,
    spacing: f64,
}

impl SpatialGrid {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !x_min.is_finite() || !x_max.is_finite() || x_max <= x_min {
            return Err(Error::GridBounds { x_min, x_max });
        }
        if n_points < 2 {
            return Err(Error::GridTooSmall { n_points });
        }
        let spacing = (x_max - x_min) / (n_points - 1) as f64;
        Ok(Self {
            x_min,
            x_max,
            n_points,
            spacing,
        })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    /// Lattice spacing `dx`, also the quadrature weight per node.
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Coordinate of node `i`.
    pub fn node(&self, i: usize) -> f64 {
        debug_assert!(i < self.n_points);
        self.x_min + i as f64 * self.spacing
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |i| self.node(i))
    }

    /// Index of the node closest to `x`.
    pub fn nearest_node(&self, x: f64) -> usize {
        let raw = ((x - self.x_min) / self.spacing).round();
        (raw.max(0.0) as usize).min(self.n_points - 1)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_min && x <= self.x_max
    }

    /// Node indices excluding a fractional margin at each boundary.
    pub fn interior(&self, margin: f64) -> std::ops::Range<usize> {
        let skip = ((self.n_points as f64) * margin).floor() as usize;
        skip..self.n_points - skip
    }
}

/// Division of `[t_a, t_b]` into `n_slices` equal steps of length `epsilon`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeSlicing {
    t_a: f64,
    t_b: f64,
    n_slices: usize,
    epsilon: f64,
}

impl TimeSlicing {
    pub fn new(t_a: f64, t_b: f64, n_slices: usize) -> Result<Self> {
        if !t_a.is_finite() || !t_b.is_finite() || t_b <= t_a {
            return Err(Error::TimeOrder { t_a, t_b });
        }
        if n_slices == 0 {
            return Err(Error::NonPositive {
                name: "n_slices",
                value: 0.0,
            });
        }
        let epsilon = (t_b - t_a) / n_slices as f64;
        Ok(Self {
            t_a,
            t_b,
            n_slices,
            epsilon,
        })
    }

    pub fn t_a(&self) -> f64 {
        self.t_a
    }

    pub fn t_b(&self) -> f64 {
        self.t_b
    }

    pub fn n_slices(&self) -> usize {
        self.n_slices
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn duration(&self) -> f64 {
        self.t_b - self.t_a
    }

    /// Time of node `i`, `i = 0..=n_slices`.
    pub fn node(&self, i: usize) -> f64 {
        debug_assert!(i <= self.n_slices);
        self.t_a + i as f64 * self.epsilon
    }
}

/// Planck's reduced constant and the particle mass, in whatever unit system
/// the caller adopts. The defaults `hbar = m = 1` are the natural units used
/// throughout the test suite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub mass: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            hbar: 1.0,
            mass: 1.0,
        }
    }
}

impl PhysicalConstants {
    pub fn new(hbar: f64, mass: f64) -> Result<Self> {
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::NonPositive {
                name: "hbar",
                value: hbar,
            });
        }
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::NonPositive {
                name: "mass",
                value: mass,
            });
        }
        Ok(Self { hbar, mass })
    }
}

/// Complex amplitudes sampled on a [`SpatialGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    grid: SpatialGrid,
    values: Vec<Complex64>,
}

impl WaveFunction {
    pub fn new(grid: SpatialGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(Error::InvalidArgument(format!(
                "value count {} does not match grid of {} points",
                values.len(),
                grid.n_points()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: SpatialGrid) -> Self {
        let values = vec![Complex64::new(0.0, 0.0); grid.n_points()];
        Self { grid, values }
    }

    /// Normalized Gaussian packet
    /// `psi(x) = (2 pi sigma^2)^(-1/4) exp(-(x - center)^2 / (4 sigma^2)) exp(i k0 x)`.
    ///
    /// `momentum` is the wavenumber `k0 = p0 / hbar`. The packet must sit
    /// well inside the grid: the analytic tail at either edge may not exceed
    /// [`EDGE_TAIL_BOUND`] of the peak.
    pub fn gaussian(grid: SpatialGrid, center: f64, width: f64, momentum: f64) -> Result<Self> {
        if !(width.is_finite() && width > 0.0) {
            return Err(Error::NonPositive {
                name: "width",
                value: width,
            });
        }
        if !grid.contains(center - 4.0 * width) || !grid.contains(center + 4.0 * width) {
            return Err(Error::InvalidArgument(format!(
                "packet support [{}, {}] exceeds grid bounds [{}, {}]",
                center - 4.0 * width,
                center + 4.0 * width,
                grid.x_min(),
                grid.x_max()
            )));
        }
        let edge_dist = (center - grid.x_min())
            .abs()
            .min((grid.x_max() - center).abs());
        let tail = (-edge_dist * edge_dist / (4.0 * width * width)).exp();
        if tail > EDGE_TAIL_BOUND {
            return Err(Error::EdgeAmplitude {
                ratio: tail,
                bound: EDGE_TAIL_BOUND,
            });
        }
        let prefactor = (2.0 * std::f64::consts::PI * width * width).powf(-0.25);
        let values = grid
            .nodes()
            .map(|x| {
                let envelope =
                    prefactor * (-(x - center) * (x - center) / (4.0 * width * width)).exp();
                envelope * Complex64::from_polar(1.0, momentum * x)
            })
            .collect();
        Ok(Self { grid, values })
    }

    /// Lattice delta at `node`: value `1/dx` there, zero elsewhere, so that
    /// `sum_i delta_i * dx = 1`.
    pub fn delta(grid: SpatialGrid, node: usize) -> Result<Self> {
        if node >= grid.n_points() {
            return Err(Error::IndexOutOfRange {
                index: node,
                len: grid.n_points(),
            });
        }
        let mut psi = Self::zeros(grid);
        psi.values[node] = Complex64::new(1.0 / grid.spacing(), 0.0);
        Ok(psi)
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    /// `sum_i |psi_i|^2 dx`.
    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.spacing()
    }

    /// L2 norm `sqrt(sum_i |psi_i|^2 dx)`.
    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Lattice inner product `<self, other> = sum_i conj(self_i) other_i dx`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let dot: Complex64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(dot * self.grid.spacing())
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    /// L2 norm of `self - other`.
    pub fn difference_norm(&self, other: &Self) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let sum: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        Ok((sum * self.grid.spacing()).sqrt())
    }

    /// Mean position of the probability density `|psi|^2`.
    pub fn mean_position(&self) -> f64 {
        let dx = self.grid.spacing();
        let total = self.norm_sqr();
        let weighted: f64 = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| self.grid.node(i) * v.norm_sqr())
            .sum::<f64>()
            * dx;
        weighted / total
    }

    /// Standard deviation of `|psi|^2`; for a Gaussian packet this is the
    /// width parameter sigma.
    pub fn position_spread(&self) -> f64 {
        let mean = self.mean_position();
        let dx = self.grid.spacing();
        let total = self.norm_sqr();
        let second: f64 = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let d = self.grid.node(i) - mean;
                d * d * v.norm_sqr()
            })
            .sum::<f64>()
            * dx;
        (second / total).sqrt()
    }
}
