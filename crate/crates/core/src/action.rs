//! Lagrangians, discrete actions, classical trajectories and
//! stationary-phase diagnostics.
//!
//! A path is a list of positions at the nodes of a [`TimeSlicing`]. The
//! action of a slice is the midpoint rule
//! `eps * L((x1 - x0)/eps, (x1 + x0)/2, (t1 + t0)/2)`: velocity is the
//! forward difference across the slice, position and time are slice
//! midpoints. The path action is the sum of slice actions.

use crate::error::{Error, Result};
use crate::lattice::{PhysicalConstants, SpatialGrid, TimeSlicing};

/// Potential energy family `V(x, t)`. All built-in families are static in
/// time; the `t` argument exists so callers can treat them uniformly.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialModel {
    /// `V = 0` everywhere.
    Free,
    /// `V = m omega^2 x^2 / 2`.
    Harmonic { omega: f64 },
    /// Samples on a grid, linearly interpolated; evaluation outside the
    /// grid is an error.
    Tabulated {
        grid: SpatialGrid,
        samples: Vec<f64>,
    },
    /// Zero inside any aperture interval, a flat barrier elsewhere.
    MaskedFree {
        apertures: Vec<(f64, f64)>,
        barrier_height: f64,
    },
}

impl PotentialModel {
    pub fn harmonic(omega: f64) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::NonPositive {
                name: "omega",
                value: omega,
            });
        }
        Ok(Self::Harmonic { omega })
    }

    pub fn tabulated(grid: SpatialGrid, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.n_points() {
            return Err(Error::InvalidArgument(format!(
                "tabulated potential has {} samples for a grid of {} points",
                samples.len(),
                grid.n_points()
            )));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "tabulated potential has non-finite samples".into(),
            ));
        }
        Ok(Self::Tabulated { grid, samples })
    }

    pub fn masked_free(apertures: Vec<(f64, f64)>, barrier_height: f64) -> Result<Self> {
        if apertures.is_empty() {
            return Err(Error::InvalidArgument(
                "masked potential needs at least one aperture".into(),
            ));
        }
        for &(lo, hi) in &apertures {
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return Err(Error::InvalidArgument(format!("bad aperture [{lo}, {hi}]")));
            }
        }
        if !barrier_height.is_finite() {
            return Err(Error::InvalidArgument(
                "barrier height must be finite".into(),
            ));
        }
        Ok(Self::MaskedFree {
            apertures,
            barrier_height,
        })
    }

    /// Potential energy at `(x, t)`.
    pub fn value(&self, x: f64, _t: f64, c: &PhysicalConstants) -> Result<f64> {
        match self {
            Self::Free => Ok(0.0),
            Self::Harmonic { omega } => Ok(0.5 * c.mass * omega * omega * x * x),
            Self::Tabulated { grid, samples } => {
                if !grid.contains(x) {
                    return Err(Error::OutOfDomain {
                        x,
                        lo: grid.x_min(),
                        hi: grid.x_max(),
                    });
                }
                let pos = (x - grid.x_min()) / grid.spacing();
                let i = (pos.floor() as usize).min(grid.n_points() - 2);
                let frac = pos - i as f64;
                Ok(samples[i] * (1.0 - frac) + samples[i + 1] * frac)
            }
            Self::MaskedFree {
                apertures,
                barrier_height,
            } => {
                let open = apertures.iter().any(|&(lo, hi)| x >= lo && x <= hi);
                Ok(if open { 0.0 } else { *barrier_height })
            }
        }
    }

    /// `dV/dx` at `(x, t)`: analytic where the family permits, central
    /// difference with step `1e-6` for tabulated data.
    pub fn gradient(&self, x: f64, t: f64, c: &PhysicalConstants) -> Result<f64> {
        match self {
            Self::Free => Ok(0.0),
            Self::Harmonic { omega } => Ok(c.mass * omega * omega * x),
            Self::Tabulated { .. } => {
                let h = 1e-6;
                let plus = self.value(x + h, t, c)?;
                let minus = self.value(x - h, t, c)?;
                Ok((plus - minus) / (2.0 * h))
            }
            // Piecewise constant: zero almost everywhere.
            Self::MaskedFree { .. } => Ok(0.0),
        }
    }
}

/// Positions `x_0..x_N` at the nodes of a time slicing. The endpoints are
/// the boundary conditions of the path.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretePath {
    slicing: TimeSlicing,
    positions: Vec<f64>,
}

impl DiscretePath {
    pub fn new(slicing: TimeSlicing, positions: Vec<f64>) -> Result<Self> {
        if positions.len() != slicing.n_slices() + 1 {
            return Err(Error::InvalidArgument(format!(
                "path has {} positions for {} slices (need n_slices + 1)",
                positions.len(),
                slicing.n_slices()
            )));
        }
        if positions.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument(
                "path has non-finite positions".into(),
            ));
        }
        Ok(Self { slicing, positions })
    }

    /// Sample `x(t)` at every slicing node.
    pub fn from_fn(slicing: TimeSlicing, x_of_t: impl Fn(f64) -> f64) -> Self {
        let positions = (0..=slicing.n_slices())
            .map(|i| x_of_t(slicing.node(i)))
            .collect();
        Self { slicing, positions }
    }

    pub fn slicing(&self) -> &TimeSlicing {
        &self.slicing
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn start(&self) -> f64 {
        self.positions[0]
    }

    pub fn end(&self) -> f64 {
        *self.positions.last().unwrap()
    }
}

/// A value of the action functional, in units of `hbar` when the natural
/// unit system is in force.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ActionValue(pub f64);

impl ActionValue {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Lagrangian `L = m v^2 / 2 - V(x, t)`.
pub fn lagrangian(
    velocity: f64,
    x: f64,
    t: f64,
    pot: &PotentialModel,
    c: &PhysicalConstants,
) -> Result<f64> {
    Ok(0.5 * c.mass * velocity * velocity - pot.value(x, t, c)?)
}

/// Midpoint-rule action of one slice starting at time `t_i`.
pub fn slice_action(
    x_i: f64,
    x_next: f64,
    t_i: f64,
    epsilon: f64,
    pot: &PotentialModel,
    c: &PhysicalConstants,
) -> Result<ActionValue> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::NonPositive {
            name: "epsilon",
            value: epsilon,
        });
    }
    let v = (x_next - x_i) / epsilon;
    let x_mid = 0.5 * (x_i + x_next);
    let t_mid = t_i + 0.5 * epsilon;
    Ok(ActionValue(epsilon * lagrangian(v, x_mid, t_mid, pot, c)?))
}

/// Total action of a discrete path: the sum of its slice actions.
pub fn path_action(
    path: &DiscretePath,
    pot: &PotentialModel,
    c: &PhysicalConstants,
) -> Result<ActionValue> {
    let s = &path.slicing;
    let eps = s.epsilon();
    let mut total = 0.0;
    for i in 0..s.n_slices() {
        total += slice_action(
            path.positions[i],
            path.positions[i + 1],
            s.node(i),
            eps,
            pot,
            c,
        )?
        .0;
    }
    Ok(ActionValue(total))
}

/// Maupertuis' abbreviated action `S0 = integral of 2T dt`, discretized as
/// `sum_i eps * m * ((x_{i+1} - x_i)/eps)^2`.
pub fn abbreviated_action(path: &DiscretePath, c: &PhysicalConstants) -> ActionValue {
    let s = &path.slicing;
    let eps = s.epsilon();
    let total: f64 = (0..s.n_slices())
        .map(|i| {
            let v = (path.positions[i + 1] - path.positions[i]) / eps;
            eps * c.mass * v * v
        })
        .sum();
    ActionValue(total)
}

/// Classical trajectory between fixed endpoints, sampled on the slicing.
///
/// Supported families: `Free` (straight line) and `Harmonic`, where
/// `x(t) = [x_a sin w(t_b - t) + x_b sin w(t - t_a)] / sin w(t_b - t_a)`.
/// A harmonic interval with `w (t_b - t_a)` a multiple of pi has no unique
/// solution and is rejected.
pub fn classical_path(
    pot: &PotentialModel,
    x_a: f64,
    x_b: f64,
    slicing: TimeSlicing,
    _c: &PhysicalConstants,
) -> Result<DiscretePath> {
    match pot {
        PotentialModel::Free => {
            let t_a = slicing.t_a();
            let span = slicing.duration();
            Ok(DiscretePath::from_fn(slicing, |t| {
                x_a + (x_b - x_a) * (t - t_a) / span
            }))
        }
        PotentialModel::Harmonic { omega } => {
            let span = slicing.duration();
            let s = (omega * span).sin();
            if s.abs() < 1e-9 {
                return Err(Error::DegenerateInterval {
                    omega_t: omega * span,
                });
            }
            let (t_a, t_b) = (slicing.t_a(), slicing.t_b());
            let (w, s_inv) = (*omega, 1.0 / s);
            Ok(DiscretePath::from_fn(slicing, move |t| {
                (x_a * (w * (t_b - t)).sin() + x_b * (w * (t - t_a)).sin()) * s_inv
            }))
        }
        _ => Err(Error::UnsupportedPotential {
            op: "classical_path",
            required: "Free and Harmonic",
        }),
    }
}

/// Conserved energy `T + V` of the classical trajectory, evaluated from the
/// analytic initial velocity at `t_a`.
pub fn classical_energy(
    pot: &PotentialModel,
    x_a: f64,
    x_b: f64,
    slicing: TimeSlicing,
    c: &PhysicalConstants,
) -> Result<f64> {
    let span = slicing.duration();
    let v_a = match pot {
        PotentialModel::Free => (x_b - x_a) / span,
        PotentialModel::Harmonic { omega } => {
            let s = (omega * span).sin();
            if s.abs() < 1e-9 {
                return Err(Error::DegenerateInterval {
                    omega_t: omega * span,
                });
            }
            omega * (x_b - x_a * (omega * span).cos()) / s
        }
        _ => {
            return Err(Error::UnsupportedPotential {
                op: "classical_energy",
                required: "Free and Harmonic",
            })
        }
    };
    Ok(0.5 * c.mass * v_a * v_a + pot.value(x_a, slicing.t_a(), c)?)
}

/// Finite-difference Euler-Lagrange residual
/// `m (x_{i+1} - 2 x_i + x_{i-1}) / eps^2 + dV/dx(x_i, t_i)`
/// at each interior node. Zero for an exact solution of the equation of
/// motion, `O(eps^2)` for a sampled smooth solution.
pub fn euler_lagrange_residual(
    path: &DiscretePath,
    pot: &PotentialModel,
    c: &PhysicalConstants,
) -> Result<Vec<f64>> {
    let s = &path.slicing;
    if s.n_slices() < 2 {
        return Err(Error::InvalidArgument(
            "Euler-Lagrange residual needs at least 2 slices".into(),
        ));
    }
    let eps = s.epsilon();
    let x = &path.positions;
    (1..s.n_slices())
        .map(|i| {
            let accel = c.mass * (x[i + 1] - 2.0 * x[i] + x[i - 1]) / (eps * eps);
            Ok(accel + pot.gradient(x[i], s.node(i), c)?)
        })
        .collect()
}

/// Action change `S[base + a * shape] - S[base]` for one perturbation
/// amplitude. The shape is sampled as a function of normalized time
/// `tau = (t - t_a) / (t_b - t_a)` and must vanish at the endpoints.
pub fn action_variation(
    base: &DiscretePath,
    pot: &PotentialModel,
    c: &PhysicalConstants,
    shape: impl Fn(f64) -> f64,
    amplitude: f64,
) -> Result<f64> {
    if shape(0.0).abs() > 1e-12 || shape(1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(
            "perturbation shape must vanish at both endpoints".into(),
        ));
    }
    let s = base.slicing;
    let n = s.n_slices();
    let positions: Vec<f64> = (0..=n)
        .map(|i| base.positions[i] + amplitude * shape(i as f64 / n as f64))
        .collect();
    let perturbed = DiscretePath::new(s, positions)?;
    let s_base = path_action(base, pot, c)?.0;
    let s_pert = path_action(&perturbed, pot, c)?.0;
    Ok(s_pert - s_base)
}

/// Least-squares slope of `log |Delta S|` against `log a` around an
/// arbitrary base path. Near a stationary (classical) path the slope is 2;
/// where the first variation survives it is 1.
pub fn stationarity_exponent_at(
    base: &DiscretePath,
    pot: &PotentialModel,
    c: &PhysicalConstants,
    shape: impl Fn(f64) -> f64,
    amplitudes: &[f64],
) -> Result<f64> {
    if amplitudes.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "need at least 3 amplitudes, got {}",
            amplitudes.len()
        )));
    }
    if amplitudes.iter().any(|&a| !(a.is_finite() && a > 0.0)) {
        return Err(Error::InvalidArgument("amplitudes must be positive".into()));
    }
    let mut pts = Vec::with_capacity(amplitudes.len());
    for &a in amplitudes {
        let ds = action_variation(base, pot, c, &shape, a)?;
        if ds == 0.0 {
            return Err(Error::InvalidArgument(format!(
                "action variation vanished exactly at amplitude {a}; exponent undefined"
            )));
        }
        pts.push((a.ln(), ds.abs().ln()));
    }
    let n = pts.len() as f64;
    let mean_x = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mean_x) * (p.0 - mean_x)).sum();
    Ok(sxy / sxx)
}

/// [`stationarity_exponent_at`] around the classical path between the given
/// endpoints.
pub fn stationarity_exponent(
    pot: &PotentialModel,
    x_a: f64,
    x_b: f64,
    slicing: TimeSlicing,
    c: &PhysicalConstants,
    shape: impl Fn(f64) -> f64,
    amplitudes: &[f64],
) -> Result<f64> {
    let base = classical_path(pot, x_a, x_b, slicing, c)?;
    stationarity_exponent_at(&base, pot, c, shape, amplitudes)
}
